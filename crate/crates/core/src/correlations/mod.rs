//! Correlation measures of two-qubit states.
//!
//! CHSH value, fully entangled fraction, teleportation fidelity, concurrence,
//! negativity and symmetric extendibility, all evaluated on general (not
//! necessarily canonical) states. [`oracle`] holds brute-force optimisers
//! for the two measures defined as maxima.

pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    self, c64, hermitian_eig, kron, partial_transpose, pauli, psd_sqrt, symmetric_eig,
    to_magic_basis, CMat4, Subsystem,
};
use crate::states::TwoQubitState;
use crate::steering;

pub use oracle::{chsh_oracle, fef_oracle, ChshSettings};

/// Eigenvalues of `sqrt(rho) rho^ sqrt(rho)` at or below this are zero.
///
/// Their square roots would otherwise turn roundoff of order 1e-17 into
/// spurious `lambda_i` of order 1e-9.
pub const SPIN_FLIP_ZERO_CUTOFF: f64 = 1e-14;
/// Equality slack for the extendibility criterion.
pub const EXTENDIBILITY_TIE_TOL: f64 = 1e-9;
/// Determinants in `[-DET_CLIP, 0)` are treated as zero.
pub const DET_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureDiagnostics {
    /// Square roots of the eigenvalues of `rho rho^`, non-increasing.
    pub lambda: [f64; 4],
    /// Smallest eigenvalue of the partial transpose on Bob.
    pub mu_min: f64,
    /// Two largest eigenvalues of `T^T T`, non-increasing.
    pub chsh_eigs: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub beta: f64,
    pub fef: f64,
    pub fidelity: f64,
    pub concurrence: f64,
    pub negativity: f64,
    pub sym_extendible: bool,
    /// `None` when Bob's marginal is singular and no ellipsoid exists.
    pub c_norm: Option<f64>,
}

/// Two largest eigenvalues of `T^T T`.
pub fn chsh_eigenvalues(rho: &TwoQubitState) -> [f64; 2] {
    let t = rho.fano().corr;
    let (values, _) = symmetric_eig(&(t.transpose() * t)).expect("T^T T is symmetric");
    [values[2].max(0.0), values[1].max(0.0)]
}

/// Maximal CHSH value `2 sqrt(u1 + u2)`.
pub fn chsh_beta(rho: &TwoQubitState) -> f64 {
    let [u1, u2] = chsh_eigenvalues(rho);
    2.0 * (u1 + u2).sqrt()
}

/// Largest overlap with a maximally entangled state: the top eigenvalue of the
/// real part of the state in the magic basis.
pub fn fully_entangled_fraction(rho: &TwoQubitState) -> f64 {
    let m = to_magic_basis(rho.matrix());
    let real = m.map(|z| z.re);
    let real = (real + real.transpose()) * 0.5;
    let (values, _) = symmetric_eig(&real).expect("real part is symmetric");
    values[3].min(1.0)
}

/// Average teleportation fidelity `(2f + 1)/3`.
pub fn teleportation_fidelity(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange { name: "f", value: f });
    }
    Ok((2.0 * f + 1.0) / 3.0)
}

/// `(sigma_y x sigma_y) rho* (sigma_y x sigma_y)`.
pub fn spin_flip(rho: &CMat4) -> CMat4 {
    let y = pauli()[1];
    let yy = kron(&y, &y);
    yy * rho.conjugate() * yy
}

fn spin_flip_lambdas(rho: &TwoQubitState) -> [f64; 4] {
    let root = psd_sqrt(rho.matrix()).expect("validated state is PSD");
    let r = root * spin_flip(rho.matrix()) * root;
    let eig = hermitian_eig(&qmat::hermitian_part(&r)).expect("symmetrised product is Hermitian");
    let lam = |k: usize| {
        let v = eig.values[k];
        if v <= SPIN_FLIP_ZERO_CUTOFF {
            0.0
        } else {
            v.sqrt()
        }
    };
    [lam(3), lam(2), lam(1), lam(0)]
}

fn partial_transpose_min(rho: &TwoQubitState) -> f64 {
    hermitian_eig(&partial_transpose(rho.matrix(), Subsystem::B))
        .expect("partial transpose of a Hermitian matrix is Hermitian")
        .min()
}

pub fn diagnostics(rho: &TwoQubitState) -> MeasureDiagnostics {
    MeasureDiagnostics {
        lambda: spin_flip_lambdas(rho),
        mu_min: partial_transpose_min(rho),
        chsh_eigs: chsh_eigenvalues(rho),
    }
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`.
pub fn concurrence(rho: &TwoQubitState) -> (f64, MeasureDiagnostics) {
    let d = diagnostics(rho);
    let [l1, l2, l3, l4] = d.lambda;
    ((l1 - l2 - l3 - l4).clamp(0.0, 1.0), d)
}

/// `max(0, -2 mu_min)`.
pub fn negativity(rho: &TwoQubitState) -> (f64, MeasureDiagnostics) {
    let d = diagnostics(rho);
    ((-2.0 * d.mu_min).max(0.0), d)
}

/// `tr(rho_A^2) - tr(rho^2) + 4 sqrt(det rho)`; non-negative iff the state has
/// a symmetric extension on Alice's side.
pub fn extendibility_margin(rho: &TwoQubitState) -> f64 {
    let rho_a = rho.marginal(Subsystem::A);
    let purity_a = (rho_a * rho_a).trace().re;
    let purity = rho.purity();
    let det = rho.spectrum().iter().product::<f64>();
    let det = if (-DET_CLIP..0.0).contains(&det) { 0.0 } else { det };
    purity_a - purity + 4.0 * det.max(0.0).sqrt()
}

pub fn symmetric_extendible(rho: &TwoQubitState) -> bool {
    extendibility_margin(rho) >= -EXTENDIBILITY_TIE_TOL
}

pub fn full_report(rho: &TwoQubitState) -> CorrelationReport {
    let fef = fully_entangled_fraction(rho);
    let d = diagnostics(rho);
    let [l1, l2, l3, l4] = d.lambda;
    CorrelationReport {
        beta: chsh_beta(rho),
        fef,
        fidelity: (2.0 * fef + 1.0) / 3.0,
        concurrence: (l1 - l2 - l3 - l4).clamp(0.0, 1.0),
        negativity: (-2.0 * d.mu_min).max(0.0),
        sym_extendible: symmetric_extendible(rho),
        c_norm: steering::ellipsoid_of(rho).ok().map(|e| e.center_norm()),
    }
}

/// Bell operator `a.s x (b + b').s + a'.s x (b - b').s`.
pub fn bell_operator(s: &ChshSettings) -> CMat4 {
    let p = pauli();
    let dot = |v: &qmat::Vec3| {
        p[0] * c64(v.x, 0.0) + p[1] * c64(v.y, 0.0) + p[2] * c64(v.z, 0.0)
    };
    kron(&dot(&s.alice), &dot(&(s.bob + s.bob_prime)))
        + kron(&dot(&s.alice_prime), &dot(&(s.bob - s.bob_prime)))
}
