//! Two-qubit states: validation, named families and random ensembles.

use std::fmt;
use std::str::FromStr;

use nalgebra::{SMatrix, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    self, c64, fano_decompose, hermitian_eig, kron, pauli, CMat2, CMat4, FanoForm, Subsystem,
    Vec3, C64,
};
use crate::steering;

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
const BLOCH_TOL: f64 = 1e-10;
/// Resampling attempts before giving up on one index.
pub const MAX_RESAMPLES: usize = 100;

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: CMat4,
}

impl TwoQubitState {
    pub fn matrix(&self) -> &CMat4 {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat4 {
        self.matrix
    }

    pub fn fano(&self) -> FanoForm {
        fano_decompose(&self.matrix).expect("validated state is Hermitian")
    }

    pub fn marginal(&self, keep: Subsystem) -> CMat2 {
        qmat::partial_trace(&self.matrix, keep)
    }

    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> [f64; 4] {
        let eig = hermitian_eig(&self.matrix).expect("validated state is Hermitian");
        [eig.values[0], eig.values[1], eig.values[2], eig.values[3]]
    }
}

/// Checks Hermiticity, unit trace and positivity, in that order.
pub fn validate(rho: &CMat4) -> Result<TwoQubitState> {
    qmat::ensure_hermitian(rho)?;
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::NotUnitTrace { trace });
    }
    let eig = hermitian_eig(rho)?;
    if eig.min() < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: eig.min() });
    }
    Ok(TwoQubitState { matrix: *rho })
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value })
    }
}

fn pure(amps: Vector4<C64>) -> CMat4 {
    amps * amps.adjoint()
}

fn real_ket(amps: [f64; 4]) -> Vector4<C64> {
    Vector4::from_fn(|i, _| c64(amps[i], 0.0))
}

pub fn phi_plus() -> TwoQubitState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    TwoQubitState { matrix: pure(real_ket([h, 0.0, 0.0, h])) }
}

pub fn psi_plus() -> TwoQubitState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    TwoQubitState { matrix: pure(real_ket([0.0, h, h, 0.0])) }
}

pub fn singlet() -> TwoQubitState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    TwoQubitState { matrix: pure(real_ket([0.0, h, -h, 0.0])) }
}

pub fn maximally_mixed() -> TwoQubitState {
    TwoQubitState { matrix: CMat4::identity() * c64(0.25, 0.0) }
}

/// The maximal-volume canonical state with ellipsoid centre `(0, 0, c)`:
/// `(1 - c/2)|psi_c><psi_c| + (c/2)|00><00|` with
/// `|psi_c> = (|01> + sqrt(1-c)|10>)/sqrt(2-c)`.
pub fn max_obese(c: f64) -> Result<TwoQubitState> {
    check_unit_interval("c", c)?;
    // (1 - c/2)/(2 - c) = 1/2 so the weights fold into the unnormalised ket.
    let psi = real_ket([0.0, 1.0, (1.0 - c).sqrt(), 0.0]);
    let mut m = pure(psi) * c64(0.5, 0.0);
    m[(0, 0)] += c64(c / 2.0, 0.0);
    validate(&m)
}

/// Choi state of the amplitude-damping channel with decay probability `c`,
/// reference qubit first, channel output second.
pub fn ad_choi(c: f64) -> Result<TwoQubitState> {
    check_unit_interval("c", c)?;
    let o = c64(0.0, 0.0);
    let k0 = CMat2::new(c64(1.0, 0.0), o, o, c64((1.0 - c).sqrt(), 0.0));
    let k1 = CMat2::new(o, c64(c.sqrt(), 0.0), o, o);
    let phi = *phi_plus().matrix();
    let id = CMat2::identity();
    let m = [k0, k1].iter().fold(CMat4::zeros(), |acc, k| {
        let lifted = kron(&id, k);
        acc + lifted * phi * lifted.adjoint()
    });
    validate(&m)
}

/// `SWAP (X x 1)`, the local relabelling that maps [`ad_choi`] onto [`max_obese`].
pub fn choi_relabeling() -> CMat4 {
    let one = c64(1.0, 0.0);
    let mut swap = CMat4::zeros();
    swap[(0, 0)] = one;
    swap[(1, 2)] = one;
    swap[(2, 1)] = one;
    swap[(3, 3)] = one;
    swap * kron(&pauli()[0], &CMat2::identity())
}

/// `p |psi-><psi-| + (1 - p) 1/4`.
pub fn werner(p: f64) -> Result<TwoQubitState> {
    check_unit_interval("p", p)?;
    let m = singlet().matrix * c64(p, 0.0) + CMat4::identity() * c64((1.0 - p) / 4.0, 0.0);
    validate(&m)
}

pub fn bloch_qubit(v: &Vec3) -> CMat2 {
    let s = pauli();
    (CMat2::identity() + s[0] * c64(v.x, 0.0) + s[1] * c64(v.y, 0.0) + s[2] * c64(v.z, 0.0))
        * c64(0.5, 0.0)
}

pub fn product_state(a: &Vec3, b: &Vec3) -> Result<TwoQubitState> {
    if a.norm() > 1.0 + BLOCH_TOL {
        return Err(Error::OutOfRange { name: "|a|", value: a.norm() });
    }
    if b.norm() > 1.0 + BLOCH_TOL {
        return Err(Error::OutOfRange { name: "|b|", value: b.norm() });
    }
    validate(&kron(&bloch_qubit(a), &bloch_qubit(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    /// Hilbert-Schmidt induced measure with the configured rank.
    GinibreMixed,
    /// Rank-one states.
    Pure,
    /// A ginibre-mixed draw mapped to its canonical state.
    CanonicalFiltered,
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleKind::GinibreMixed => "ginibre-mixed",
            EnsembleKind::Pure => "pure",
            EnsembleKind::CanonicalFiltered => "canonical-filtered",
        })
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ginibre-mixed" => Ok(EnsembleKind::GinibreMixed),
            "pure" => Ok(EnsembleKind::Pure),
            "canonical-filtered" => Ok(EnsembleKind::CanonicalFiltered),
            other => Err(Error::Parse(format!("unknown ensemble '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rank {
    Fixed(u8),
    /// Uniform over 1..=4, drawn per sample.
    Mixed,
}

impl Rank {
    pub fn fixed(k: u8) -> Result<Self> {
        if (1..=4).contains(&k) {
            Ok(Rank::Fixed(k))
        } else {
            Err(Error::OutOfRange { name: "rank", value: f64::from(k) })
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Fixed(k) => write!(f, "{k}"),
            Rank::Mixed => f.write_str("mixed"),
        }
    }
}

impl FromStr for Rank {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixed" => Ok(Rank::Mixed),
            other => other
                .parse::<u8>()
                .map_err(|_| Error::Parse(format!("invalid rank '{other}'")))
                .and_then(Rank::fixed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub rank: Rank,
    pub seed: u64,
    pub count: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, rank: Rank, seed: u64, count: usize) -> Self {
        Self { kind, rank, seed, count }
    }

    /// Random generator for one index. Streams for different indices are
    /// disjoint, so results do not depend on evaluation order.
    pub fn rng_for(&self, index: usize) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

/// One draw with the rank actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub rank: u8,
    pub state: TwoQubitState,
}

/// `G G^dagger / tr(G G^dagger)` for a 4 x `rank` complex Gaussian `G`.
pub fn ginibre_state<R: Rng + ?Sized>(rng: &mut R, rank: u8) -> CMat4 {
    let mut g = SMatrix::<C64, 4, 4>::zeros();
    for col in 0..rank as usize {
        for row in 0..4 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(row, col)] = c64(re, im);
        }
    }
    let m = g * g.adjoint();
    let m = qmat::hermitian_part(&m);
    m / m.trace()
}

fn draw_rank<R: Rng + ?Sized>(rng: &mut R, rank: Rank) -> u8 {
    match rank {
        Rank::Fixed(k) => k,
        Rank::Mixed => rng.random_range(1..=4),
    }
}

/// Deterministic sample `index` of the ensemble.
pub fn sample_random(spec: &EnsembleSpec, index: usize) -> Result<Sample> {
    if index >= spec.count {
        return Err(Error::OutOfRange { name: "index", value: index as f64 });
    }
    let mut rng = spec.rng_for(index);
    for _ in 0..MAX_RESAMPLES {
        let rank = match spec.kind {
            EnsembleKind::Pure => 1,
            _ => draw_rank(&mut rng, spec.rank),
        };
        let Ok(state) = validate(&ginibre_state(&mut rng, rank)) else {
            continue;
        };
        match spec.kind {
            EnsembleKind::CanonicalFiltered => {
                if let Ok(canonical) = steering::canonical_filter(&state) {
                    return Ok(Sample { rank, state: canonical });
                }
            }
            _ => return Ok(Sample { rank, state }),
        }
    }
    Err(Error::InternalSamplingFailure { attempts: MAX_RESAMPLES })
}

/// On-disk state representation: 16 `[re, im]` pairs in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub matrix: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_matrix(m: &CMat4) -> Self {
        let mut entries = Vec::with_capacity(16);
        for r in 0..4 {
            for c in 0..4 {
                entries.push([m[(r, c)].re, m[(r, c)].im]);
            }
        }
        Self { matrix: entries }
    }

    pub fn to_matrix(&self) -> Result<CMat4> {
        if self.matrix.len() != 16 {
            return Err(Error::Parse(format!(
                "expected 16 matrix entries, found {}",
                self.matrix.len()
            )));
        }
        if self.matrix.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        Ok(CMat4::from_fn(|r, c| {
            let [re, im] = self.matrix[4 * r + c];
            c64(re, im)
        }))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// JSON with every float written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let entries: Vec<String> = self
            .matrix
            .iter()
            .map(|[re, im]| format!("[{}, {}]", fmt_f64(*re), fmt_f64(*im)))
            .collect();
        format!("{{\"matrix\": [{}]}}\n", entries.join(", "))
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses and validates a state file.
pub fn read_state(text: &str) -> Result<TwoQubitState> {
    validate(&StateFile::parse(text)?.to_matrix()?)
}

pub fn write_state(state: &TwoQubitState) -> String {
    StateFile::from_matrix(state.matrix()).to_json()
}
