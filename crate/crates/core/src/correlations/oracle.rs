//! Direct numerical maximisation of the CHSH value and the fully entangled
//! fraction. These only evaluate the defining objectives on the 4x4 matrix
//! and share no spectral code with the closed forms they are checked against.

use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::bell_operator;
use crate::qmat::{c64, kron, pauli, CMat2, RMat3, Vec3, C64};
use crate::states::TwoQubitState;

const ASCENT_ITERATIONS: usize = 200;
const ASCENT_STAGNATION: f64 = 1e-12;

/// Measurement directions for the two CHSH parties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub alice: Vec3,
    pub alice_prime: Vec3,
    pub bob: Vec3,
    pub bob_prime: Vec3,
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.try_normalize(1e-12) {
            return u;
        }
    }
}

/// Normalised `v`, or `fallback` when `v` vanishes.
fn direction(v: Vec3, fallback: Vec3) -> Vec3 {
    v.try_normalize(1e-300).unwrap_or(fallback)
}

fn correlation_matrix(rho: &TwoQubitState) -> RMat3 {
    let s = pauli();
    RMat3::from_fn(|i, j| (rho.matrix() * kron(&s[i], &s[j])).trace().re)
}

fn chsh_value(t: &RMat3, s: &ChshSettings) -> f64 {
    s.alice.dot(&(t * (s.bob + s.bob_prime))) + s.alice_prime.dot(&(t * (s.bob - s.bob_prime)))
}

/// Best `|tr(rho B)|` over Bell operators found by alternating best-response
/// ascent from `restarts` random starting directions.
pub fn chsh_oracle(rho: &TwoQubitState, restarts: usize, seed: u64) -> (f64, ChshSettings) {
    let t = correlation_matrix(rho);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut best: Option<(f64, ChshSettings)> = None;

    for _ in 0..restarts.max(1) {
        let mut s = ChshSettings {
            alice: random_unit(&mut rng),
            alice_prime: random_unit(&mut rng),
            bob: random_unit(&mut rng),
            bob_prime: random_unit(&mut rng),
        };
        let mut value = chsh_value(&t, &s);
        for _ in 0..ASCENT_ITERATIONS {
            s.alice = direction(t * (s.bob + s.bob_prime), s.alice);
            s.alice_prime = direction(t * (s.bob - s.bob_prime), s.alice_prime);
            s.bob = direction(t.transpose() * (s.alice + s.alice_prime), s.bob);
            s.bob_prime = direction(t.transpose() * (s.alice - s.alice_prime), s.bob_prime);
            let next = chsh_value(&t, &s);
            let gain = next - value;
            value = next;
            if gain.abs() < ASCENT_STAGNATION {
                break;
            }
        }
        let exact = (rho.matrix() * bell_operator(&s)).trace().re.abs();
        if best.as_ref().is_none_or(|(b, _)| exact > *b) {
            best = Some((exact, s));
        }
    }
    best.expect("at least one restart")
}

/// `q0 1 + i (q1 sx + q2 sy + q3 sz)` for a unit quaternion `q`.
fn su2(q: &Vector4<f64>) -> CMat2 {
    let p = pauli();
    CMat2::identity() * c64(q[0], 0.0)
        + (p[0] * c64(q[1], 0.0) + p[1] * c64(q[2], 0.0) + p[2] * c64(q[3], 0.0)) * c64(0.0, 1.0)
}

fn overlap(rho: &TwoQubitState, u: &CMat2) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // (1 x U)|phi+> = (|0>U|0> + |1>U|1>)/sqrt2
    let phi = Vector4::<C64>::new(u[(0, 0)] * h, u[(1, 0)] * h, u[(0, 1)] * h, u[(1, 1)] * h);
    (phi.adjoint() * rho.matrix() * phi)[(0, 0)].re
}

/// Lower bound on the fully entangled fraction from Haar-random local
/// unitaries on Bob's side, refined by a compass search over the three
/// rotation angles.
pub fn fef_oracle(rho: &TwoQubitState, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut best_u = CMat2::identity();
    let mut best = overlap(rho, &best_u);

    for _ in 0..samples {
        let q = Vector4::<f64>::from_fn(|_, _| rng.sample(StandardNormal));
        let Some(q) = q.try_normalize(1e-12) else { continue };
        let u = su2(&q);
        let v = overlap(rho, &u);
        if v > best {
            best = v;
            best_u = u;
        }
    }

    let p = pauli();
    let mut step = 0.25_f64;
    while step > 1e-9 {
        let (sin, cos) = step.sin_cos();
        let mut improved = false;
        for generator in &p {
            for sign in [1.0, -1.0] {
                let rot = CMat2::identity() * c64(cos, 0.0) + generator * c64(0.0, sign * sin);
                let u = best_u * rot;
                let v = overlap(rho, &u);
                if v > best {
                    best = v;
                    best_u = u;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}
