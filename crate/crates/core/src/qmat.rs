//! Fixed-size complex linear algebra for qubit and two-qubit operators.
//!
//! Everything here works on stack-allocated `nalgebra` matrices of size 2, 3
//! or 4. Two-qubit operators use the computational basis ordered
//! `|00>, |01>, |10>, |11>` with Alice as the first (most significant) factor.

use nalgebra::{Complex, Matrix2, Matrix3, Matrix4, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat2 = Matrix2<C64>;
pub type CMat4 = Matrix4<C64>;
pub type RMat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Entrywise tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Negative eigenvalues of PSD inputs down to this value are clipped to zero.
pub const PSD_CLIP_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted by the inverse square root.
pub const INVERSE_SQRT_MIN_EIGENVALUE: f64 = 1e-8;
/// `|det T| ` below this maps to chirality zero.
pub const CHIRALITY_DET_CUTOFF: f64 = 1e-12;

const MAX_JACOBI_SWEEPS: usize = 64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// The Pauli matrices `[sigma_x, sigma_y, sigma_z]`.
pub fn pauli() -> [CMat2; 3] {
    let o = c64(0.0, 0.0);
    let l = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    [
        CMat2::new(o, l, l, o),
        CMat2::new(o, -i, i, o),
        CMat2::new(l, o, o, -l),
    ]
}

pub fn identity2() -> CMat2 {
    CMat2::identity()
}

pub fn kron(a: &CMat2, b: &CMat2) -> CMat4 {
    let mut out = CMat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Unitary whose columns are the magic basis vectors
/// `e1 = (|00>+|11>)/sqrt2`, `e2 = i(|00>-|11>)/sqrt2`,
/// `e3 = i(|01>+|10>)/sqrt2`, `e4 = (|01>-|10>)/sqrt2`.
///
/// In this basis every maximally entangled state has real coordinates up to a
/// global phase.
pub fn magic_basis() -> CMat4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = c64(h, 0.0);
    let i = c64(0.0, h);
    let o = c64(0.0, 0.0);
    #[rustfmt::skip]
    let m = CMat4::new(
        r,  i,  o,  o,
        o,  o,  i,  r,
        o,  o,  i, -r,
        r, -i,  o,  o,
    );
    m
}

pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_residual<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn ensure_hermitian<const N: usize>(m: &SMatrix<C64, N, N>) -> Result<()> {
    let residual = hermitian_residual(m);
    if residual.is_finite() && residual <= HERMITIAN_TOL {
        Ok(())
    } else {
        Err(Error::NotHermitian { residual })
    }
}

/// `(M + M^dagger)/2`.
pub fn hermitian_part<const N: usize>(m: &SMatrix<C64, N, N>) -> SMatrix<C64, N, N> {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace<const N: usize>(m: &SMatrix<C64, N, N>) -> C64 {
    m.trace()
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen<const N: usize> {
    /// Eigenvalues in ascending order.
    pub values: SVector<f64, N>,
    /// Orthonormal eigenvectors, column `k` belongs to `values[k]`.
    pub vectors: SMatrix<C64, N, N>,
}

impl<const N: usize> HermitianEigen<N> {
    pub fn reconstruct(&self) -> SMatrix<C64, N, N> {
        let diag = SMatrix::<C64, N, N>::from_diagonal(&self.values.map(|v| c64(v, 0.0)));
        self.vectors * diag * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[N - 1]
    }

    /// Rebuild `V f(Lambda) V^dagger` for a real spectral function.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> SMatrix<C64, N, N> {
        let diag = SMatrix::<C64, N, N>::from_diagonal(&self.values.map(|v| c64(f(v), 0.0)));
        self.vectors * diag * self.vectors.adjoint()
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eig<const N: usize>(m: &SMatrix<C64, N, N>) -> Result<HermitianEigen<N>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NotHermitian { residual: f64::NAN });
    }
    ensure_hermitian(m)?;

    let mut a = hermitian_part(m);
    let mut v = SMatrix::<C64, N, N>::identity();
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>();

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..N)
            .flat_map(|p| (p + 1..N).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off == 0.0 || off <= scale * 1e-36 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * r).atan2(app - aqq);
                let (s, c) = theta.sin_cos();

                // G = diag(1, conj(phase)) * [[c, -s], [s, c]] embedded at (p, q)
                let mut g = SMatrix::<C64, N, N>::identity();
                g[(p, p)] = c64(c, 0.0);
                g[(p, q)] = c64(-s, 0.0);
                g[(q, p)] = phase.conj() * s;
                g[(q, q)] = phase.conj() * c;

                a = g.adjoint() * a * g;
                a[(p, q)] = c64(0.0, 0.0);
                a[(q, p)] = c64(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                v *= g;
            }
        }
    }

    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = SVector::<f64, N>::from_fn(|k, _| a[(order[k], order[k])].re);
    let vectors = SMatrix::<C64, N, N>::from_fn(|r, k| v[(r, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eig<const N: usize>(
    m: &SMatrix<f64, N, N>,
) -> Result<(SVector<f64, N>, SMatrix<f64, N, N>)> {
    let eig = hermitian_eig(&m.map(|x| c64(x, 0.0)))?;
    // Real input keeps every Jacobi phase at +-1, so the vectors stay real.
    Ok((eig.values, eig.vectors.map(|z| z.re)))
}

/// Principal square root of a PSD matrix.
pub fn psd_sqrt<const N: usize>(m: &SMatrix<C64, N, N>) -> Result<SMatrix<C64, N, N>> {
    let eig = hermitian_eig(m)?;
    if eig.min() < -PSD_CLIP_TOL {
        return Err(Error::NotPsd { min_eigenvalue: eig.min() });
    }
    Ok(eig.map_spectrum(|x| x.max(0.0).sqrt()))
}

/// `(M^{1/2}, M^{-1/2})` for a positive definite 2x2 matrix.
pub fn psd_sqrt_invsqrt(m: &CMat2) -> Result<(CMat2, CMat2)> {
    let eig = hermitian_eig(m)?;
    let min = eig.min();
    if min < -PSD_CLIP_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    if min <= INVERSE_SQRT_MIN_EIGENVALUE {
        return Err(Error::SingularMarginal { min_eigenvalue: min });
    }
    Ok((eig.map_spectrum(f64::sqrt), eig.map_spectrum(|x| 1.0 / x.sqrt())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Reduced state on `keep`.
pub fn partial_trace(rho: &CMat4, keep: Subsystem) -> CMat2 {
    CMat2::from_fn(|i, j| match keep {
        Subsystem::A => rho[(2 * i, 2 * j)] + rho[(2 * i + 1, 2 * j + 1)],
        Subsystem::B => rho[(i, j)] + rho[(2 + i, 2 + j)],
    })
}

/// Transpose of the `on` factor, entries are permuted, never recomputed.
pub fn partial_transpose(rho: &CMat4, on: Subsystem) -> CMat4 {
    CMat4::from_fn(|r, c| {
        let (i, k) = (r / 2, r % 2);
        let (j, l) = (c / 2, c % 2);
        match on {
            Subsystem::A => rho[(2 * j + k, 2 * i + l)],
            Subsystem::B => rho[(2 * i + l, 2 * j + k)],
        }
    })
}

/// Pauli-basis coordinates of a two-qubit operator:
/// `rho = 1/4 (1 + a.sigma x 1 + 1 x b.sigma + sum T_ij sigma_i x sigma_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoForm {
    pub alice: Vec3,
    pub bob: Vec3,
    pub corr: RMat3,
}

/// Bob's Bloch vector norm below this marks a canonical state.
pub const CANONICAL_BOB_TOL: f64 = 1e-9;

impl FanoForm {
    pub fn new(alice: Vec3, bob: Vec3, corr: RMat3) -> Self {
        Self { alice, bob, corr }
    }

    pub fn is_canonical(&self) -> bool {
        self.bob.norm() <= CANONICAL_BOB_TOL
    }
}

fn real_expectation(rho: &CMat4, op: &CMat4) -> Result<f64> {
    let z = (rho * op).trace();
    if z.im.abs() > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual: z.im.abs() });
    }
    Ok(z.re)
}

pub fn fano_decompose(rho: &CMat4) -> Result<FanoForm> {
    ensure_hermitian(rho)?;
    let s = pauli();
    let id = identity2();
    let mut alice = Vec3::zeros();
    let mut bob = Vec3::zeros();
    let mut corr = RMat3::zeros();
    for i in 0..3 {
        alice[i] = real_expectation(rho, &kron(&s[i], &id))?;
        bob[i] = real_expectation(rho, &kron(&id, &s[i]))?;
        for j in 0..3 {
            corr[(i, j)] = real_expectation(rho, &kron(&s[i], &s[j]))?;
        }
    }
    Ok(FanoForm { alice, bob, corr })
}

pub fn fano_assemble(f: &FanoForm) -> CMat4 {
    let s = pauli();
    let id = identity2();
    let mut m = CMat4::identity();
    for i in 0..3 {
        m += kron(&s[i], &id) * c64(f.alice[i], 0.0);
        m += kron(&id, &s[i]) * c64(f.bob[i], 0.0);
        for j in 0..3 {
            m += kron(&s[i], &s[j]) * c64(f.corr[(i, j)], 0.0);
        }
    }
    m * c64(0.25, 0.0)
}

/// `E^dagger rho E` with `E` from [`magic_basis`].
pub fn to_magic_basis(rho: &CMat4) -> CMat4 {
    let e = magic_basis();
    e.adjoint() * rho * e
}

/// Sign of `det T`, zero when the determinant is below the degeneracy cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Chirality {
    Negative,
    Degenerate,
    Positive,
}

impl Chirality {
    pub fn from_det(det: f64) -> Self {
        if det.abs() < CHIRALITY_DET_CUTOFF {
            Chirality::Degenerate
        } else if det < 0.0 {
            Chirality::Negative
        } else {
            Chirality::Positive
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Chirality::Negative => -1,
            Chirality::Degenerate => 0,
            Chirality::Positive => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }
}

impl From<Chirality> for i8 {
    fn from(c: Chirality) -> i8 {
        c.value()
    }
}

impl TryFrom<i8> for Chirality {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Chirality::Negative),
            0 => Ok(Chirality::Degenerate),
            1 => Ok(Chirality::Positive),
            other => Err(format!("invalid chirality {other}")),
        }
    }
}

/// Singular values of a 3x3 real matrix with the determinant's sign attached
/// to the smallest one.
///
/// When the chirality is degenerate `signed[2]` is zero even if `s[2]` is not
/// exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SignedSpectrum3 {
    /// Descending.
    pub s: [f64; 3],
    pub chi: Chirality,
    pub signed: [f64; 3],
}

pub fn signed_svd3(t: &RMat3) -> SignedSpectrum3 {
    let gram = t.transpose() * t;
    // TᵀT is exactly symmetric, finite input is the only precondition.
    let (values, _) = symmetric_eig(&gram).expect("T^T T is symmetric");
    let s = [
        values[2].max(0.0).sqrt(),
        values[1].max(0.0).sqrt(),
        values[0].max(0.0).sqrt(),
    ];
    let chi = Chirality::from_det(t.determinant());
    SignedSpectrum3 { s, chi, signed: [s[0], s[1], chi.as_f64() * s[2]] }
}
