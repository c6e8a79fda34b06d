//! Quantum steering ellipsoids.
//!
//! The ellipsoid of a state is read off its canonical form, obtained by
//! filtering Bob's qubit until his marginal is maximally mixed:
//! `rho~ = (1 x (2 rho_B)^{-1/2}) rho (1 x (2 rho_B)^{-1/2})`. In that frame
//! Alice's Bloch vector is the centre `c` and the correlation matrix `T~`
//! gives the shape matrix `Q = T~ T~^T`. Semiaxes are the singular values of
//! `T~` and the chirality is the sign of `det T~`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    self, c64, kron, psd_sqrt_invsqrt, signed_svd3, CMat2, Chirality, RMat3, SignedSpectrum3,
    Subsystem, Vec3,
};
use crate::states::{self, TwoQubitState};

/// Slack for the necessary physicality checks.
pub const CONDITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringEllipsoid {
    pub center: Vec3,
    pub q: RMat3,
    pub spectrum: SignedSpectrum3,
}

impl SteeringEllipsoid {
    pub fn semiaxes(&self) -> [f64; 3] {
        self.spectrum.s
    }

    pub fn chirality(&self) -> Chirality {
        self.spectrum.chi
    }

    pub fn center_norm(&self) -> f64 {
        self.center.norm()
    }

    pub fn from_center_and_correlations(center: Vec3, corr: &RMat3) -> Self {
        Self { center, q: corr * corr.transpose(), spectrum: signed_svd3(corr) }
    }
}

/// Maps a state to its canonical form, in which Bob's marginal is `1/2`.
pub fn canonical_filter(rho: &TwoQubitState) -> Result<TwoQubitState> {
    let rho_b = rho.marginal(Subsystem::B);
    let (_, inv_sqrt) = psd_sqrt_invsqrt(&(rho_b * c64(2.0, 0.0)))?;
    let k = kron(&CMat2::identity(), &inv_sqrt);
    let filtered = k * rho.matrix() * k;
    // Exact arithmetic gives a Hermitian unit-trace result; restore both
    // after roundoff amplified by the inverse square root.
    let filtered = qmat::hermitian_part(&filtered);
    let filtered = filtered / filtered.trace();
    states::validate(&filtered)
}

pub fn ellipsoid_of(rho: &TwoQubitState) -> Result<SteeringEllipsoid> {
    let canonical = canonical_filter(rho)?;
    let fano = canonical.fano();
    Ok(SteeringEllipsoid::from_center_and_correlations(fano.alice, &fano.corr))
}

/// Ellipsoid of the maximally obese state with centre `(0, 0, c)`.
pub fn max_volume_ellipsoid(c: f64) -> Result<SteeringEllipsoid> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::OutOfRange { name: "c", value: c });
    }
    let major = (1.0 - c).sqrt();
    let minor = 1.0 - c;
    let chi = if c < 1.0 { Chirality::Negative } else { Chirality::Degenerate };
    Ok(SteeringEllipsoid {
        center: Vec3::new(0.0, 0.0, c),
        q: RMat3::from_diagonal(&Vec3::new(major * major, major * major, minor * minor)),
        spectrum: SignedSpectrum3 {
            s: [major, major, minor],
            chi,
            signed: [major, major, chi.as_f64() * minor],
        },
    })
}

/// Outcome of the two necessary physicality inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `s3 <= 1 - |c|`: the minor axis fits inside the Bloch ball.
    pub containment_ok: bool,
    /// `s1^2 + s2^2 <= 1 - |c|^2 + 2 s1 s2 s3 - s3^2`, checked when `chi = -1`.
    pub entangled_inequality_ok: bool,
    /// `s3 - (1 - |c|)`.
    pub containment_margin: f64,
    /// LHS minus RHS of the entangled inequality, `None` unless `chi = -1`.
    pub entangled_margin: Option<f64>,
}

impl ConditionReport {
    pub fn all_ok(&self) -> bool {
        self.containment_ok && self.entangled_inequality_ok
    }
}

pub fn necessary_conditions(e: &SteeringEllipsoid) -> ConditionReport {
    let [s1, s2, s3] = e.spectrum.s;
    let c = e.center_norm();
    let containment_margin = s3 - (1.0 - c);
    let entangled_margin = (e.spectrum.chi == Chirality::Negative)
        .then_some(s1 * s1 + s2 * s2 - (1.0 - c * c + 2.0 * s1 * s2 * s3 - s3 * s3));
    ConditionReport {
        containment_ok: containment_margin <= CONDITION_TOL,
        entangled_inequality_ok: entangled_margin.is_none_or(|m| m <= CONDITION_TOL),
        containment_margin,
        entangled_margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::max_abs;
    use crate::states::{max_obese, product_state, werner};

    #[test]
    fn filter_removes_bob_polarisation_of_product() {
        let a = Vec3::new(0.2, -0.1, 0.5);
        let rho = product_state(&a, &Vec3::new(0.0, 0.0, 0.5)).unwrap();
        let want = product_state(&a, &Vec3::zeros()).unwrap();
        let got = canonical_filter(&rho).unwrap();
        assert!(max_abs(&(got.matrix() - want.matrix())) < 1e-14);
    }

    #[test]
    fn obese_state_is_already_canonical() {
        let rho = max_obese(0.3).unwrap();
        let got = canonical_filter(&rho).unwrap();
        assert!(max_abs(&(got.matrix() - rho.matrix())) < 1e-12);
    }

    #[test]
    fn pure_bob_marginal_is_singular() {
        let up = Vec3::new(0.0, 0.0, 1.0);
        let rho = product_state(&up, &up).unwrap();
        assert!(matches!(canonical_filter(&rho), Err(Error::SingularMarginal { .. })));
        assert!(matches!(ellipsoid_of(&rho), Err(Error::SingularMarginal { .. })));
    }

    #[test]
    fn werner_ellipsoid() {
        let e = ellipsoid_of(&werner(0.5).unwrap()).unwrap();
        assert!(e.center.norm() < 1e-15);
        for s in e.spectrum.s {
            assert!((s - 0.5).abs() < 1e-14);
        }
        assert_eq!(e.chirality(), Chirality::Negative);
    }

    #[test]
    fn obese_ellipsoid_at_point_four() {
        let e = ellipsoid_of(&max_obese(0.4).unwrap()).unwrap();
        assert!((e.center - Vec3::new(0.0, 0.0, 0.4)).norm() < 1e-14);
        let [s1, s2, s3] = e.semiaxes();
        assert!((s1 - 0.6f64.sqrt()).abs() < 1e-14);
        assert!((s2 - 0.6f64.sqrt()).abs() < 1e-14);
        assert!((s3 - 0.6).abs() < 1e-14);
        assert_eq!(e.chirality(), Chirality::Negative);
    }

    #[test]
    fn product_state_gives_point_ellipsoid() {
        let rho = product_state(&Vec3::new(0.0, 0.0, 0.7), &Vec3::new(0.0, 0.0, 0.2)).unwrap();
        let e = ellipsoid_of(&rho).unwrap();
        assert!((e.center - Vec3::new(0.0, 0.0, 0.7)).norm() < 1e-14);
        assert!(e.semiaxes().iter().all(|s| s.abs() < 1e-7));
        assert_eq!(e.chirality(), Chirality::Degenerate);
    }

    #[test]
    fn max_volume_matches_obese_state() {
        for k in 0..=100 {
            let c = k as f64 / 100.0;
            let want = max_volume_ellipsoid(c).unwrap();
            let got = ellipsoid_of(&max_obese(c).unwrap()).unwrap();
            assert!((got.center - want.center).norm() <= 1e-12);
            assert!((got.q - want.q).abs().max() <= 1e-12);
            for i in 0..3 {
                assert!((got.spectrum.s[i] - want.spectrum.s[i]).abs() <= 1e-12, "c = {c}");
                assert!((got.spectrum.signed[i] - want.spectrum.signed[i]).abs() <= 1e-12);
            }
            assert_eq!(got.chirality(), want.chirality());
        }
    }

    #[test]
    fn max_volume_endpoints() {
        let e = max_volume_ellipsoid(0.0).unwrap();
        assert_eq!(e.spectrum.s, [1.0, 1.0, 1.0]);
        let e = max_volume_ellipsoid(1.0).unwrap();
        assert_eq!(e.spectrum.s, [0.0, 0.0, 0.0]);
        assert_eq!(e.chirality(), Chirality::Degenerate);
        assert!(max_volume_ellipsoid(1.2).is_err());
    }

    #[test]
    fn conditions_on_max_volume_family() {
        let r = necessary_conditions(&max_volume_ellipsoid(0.4).unwrap());
        assert!(r.all_ok());
        assert!(r.containment_margin.abs() < 1e-15);
        assert!(r.entangled_margin.unwrap().abs() < 1e-15);
    }

    #[test]
    fn oversized_sphere_fails_containment() {
        let e = SteeringEllipsoid {
            center: Vec3::new(0.0, 0.0, 0.5),
            q: RMat3::identity() * 0.64,
            spectrum: SignedSpectrum3 {
                s: [0.8, 0.8, 0.8],
                chi: Chirality::Negative,
                signed: [0.8, 0.8, -0.8],
            },
        };
        let r = necessary_conditions(&e);
        assert!(!r.containment_ok);
        assert!((r.containment_margin - 0.3).abs() < 1e-15);
    }

    #[test]
    fn entangled_inequality_skipped_for_positive_chirality() {
        let e = SteeringEllipsoid::from_center_and_correlations(
            Vec3::zeros(),
            &(RMat3::identity() * 0.9),
        );
        let r = necessary_conditions(&e);
        assert!(r.entangled_margin.is_none());
        assert!(r.entangled_inequality_ok);
    }
}
