//! Monte Carlo scans, obese-family sweeps and the property verification
//! suite. The command-line front end is a thin layer over these functions.
//!
//! Every sample is derived from `(seed, index)` alone and results are
//! collected in index order, so outputs do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{
    self, chsh_beta, chsh_oracle, concurrence, fef_oracle, full_report, fully_entangled_fraction,
    negativity, symmetric_extendible,
};
use crate::error::{Error, Result};
use crate::qmat::{c64, kron, max_abs, CMat2, CMat4, Chirality};
use crate::states::{
    self, fmt_f64, sample_random, EnsembleKind, EnsembleSpec, Rank, StateFile, TwoQubitState,
};
use crate::steering::{self, canonical_filter, ellipsoid_of, SteeringEllipsoid};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SCAN_SAMPLES: usize = 100_000;
pub const DEFAULT_VERIFY_SAMPLES: usize = 10_000;
pub const DEFAULT_SWEEP_POINTS: usize = 101;

pub const CHSH_ORACLE_TOL: f64 = 1e-6;
pub const FEF_ORACLE_TOL: f64 = 1e-4;
pub const FILTER_INVARIANCE_TOL: f64 = 1e-8;
pub const IDEMPOTENCE_TOL: f64 = 1e-12;
/// Concurrence above this counts as entangled.
pub const ENTANGLED_TOL: f64 = 1e-9;
pub const ORACLE_STATES: usize = 100;
pub const CHSH_ORACLE_RESTARTS: usize = 32;
pub const FEF_ORACLE_SAMPLES: usize = 10_000;
/// Largest condition number accepted for random Bob-side filters.
pub const MAX_FILTER_CONDITION: f64 = 10.0;

pub const SCAN_HEADER: &str = "index,rank,c_norm,beta,fef,beta_bound,fef_bound";
pub const SWEEP_HEADER: &str =
    "c,beta,fef,fidelity,concurrence,negativity,extendible,beta_ref,fef_ref,c_ref,n_ref";

/// Conjectured CHSH bound `max(2 sqrt(2(1-c)), 2)`.
pub fn beta_bound(c_norm: f64) -> f64 {
    (2.0 * (2.0 * (1.0 - c_norm)).max(0.0).sqrt()).max(2.0)
}

/// Conjectured fully entangled fraction bound `1 - c/2`.
pub fn fef_bound(c_norm: f64) -> f64 {
    1.0 - c_norm / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub index: usize,
    pub rank: u8,
    pub c_norm: f64,
    pub beta: f64,
    pub fef: f64,
    pub beta_bound: f64,
    pub fef_bound: f64,
}

impl ScanRecord {
    pub fn beta_gap(&self) -> f64 {
        self.beta - self.beta_bound
    }

    pub fn fef_gap(&self) -> f64 {
        self.fef - self.fef_bound
    }

    pub fn violates(&self, tol: f64) -> bool {
        self.beta_gap() > tol || self.fef_gap() > tol
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.index,
            self.rank,
            fmt_f64(self.c_norm),
            fmt_f64(self.beta),
            fmt_f64(self.fef),
            fmt_f64(self.beta_bound),
            fmt_f64(self.fef_bound)
        )
    }
}

pub fn scan_record(index: usize, rank: u8, rho: &TwoQubitState) -> Result<ScanRecord> {
    let c_norm = ellipsoid_of(rho)?.center_norm();
    Ok(ScanRecord {
        index,
        rank,
        c_norm,
        beta: chsh_beta(rho),
        fef: fully_entangled_fraction(rho),
        beta_bound: beta_bound(c_norm),
        fef_bound: fef_bound(c_norm),
    })
}

/// A sample that crossed a conjectured bound, kept with its state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub record: ScanRecord,
    pub state: StateFile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub records: Vec<ScanRecord>,
    pub skipped_singular: usize,
    /// Largest `beta - beta_bound`, `-inf` for an empty run.
    pub max_beta_gap: f64,
    pub max_fef_gap: f64,
    pub violations: Vec<Counterexample>,
}

impl ScanOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 140 + 64);
        out.push_str(SCAN_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn summary_line(&self) -> String {
        format!(
            "scan: {} records, {} singular-marginal skips, {} violations, max beta gap {}, max fef gap {}",
            self.records.len(),
            self.skipped_singular,
            self.violations.len(),
            fmt_f64(self.max_beta_gap),
            fmt_f64(self.max_fef_gap)
        )
    }
}

/// Scores every sample of `spec` against both conjectured bounds.
pub fn run_scan(spec: &EnsembleSpec, tol: f64) -> Result<ScanOutcome> {
    let rows: Vec<Result<Option<(ScanRecord, TwoQubitState)>>> = (0..spec.count)
        .into_par_iter()
        .map(|index| {
            let sample = sample_random(spec, index)?;
            match scan_record(index, sample.rank, &sample.state) {
                Ok(rec) => Ok(Some((rec, sample.state))),
                Err(Error::SingularMarginal { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut outcome = ScanOutcome {
        records: Vec::with_capacity(spec.count),
        skipped_singular: 0,
        max_beta_gap: f64::NEG_INFINITY,
        max_fef_gap: f64::NEG_INFINITY,
        violations: Vec::new(),
    };
    for row in rows {
        match row? {
            None => outcome.skipped_singular += 1,
            Some((rec, state)) => {
                outcome.max_beta_gap = outcome.max_beta_gap.max(rec.beta_gap());
                outcome.max_fef_gap = outcome.max_fef_gap.max(rec.fef_gap());
                if rec.violates(tol) {
                    outcome.violations.push(Counterexample {
                        record: rec,
                        state: StateFile::from_matrix(state.matrix()),
                    });
                }
                outcome.records.push(rec);
            }
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub c: f64,
    pub beta: f64,
    pub fef: f64,
    pub fidelity: f64,
    pub concurrence: f64,
    pub negativity: f64,
    pub extendible: bool,
    pub c_norm: Option<f64>,
    pub beta_ref: f64,
    pub fef_ref: f64,
    pub c_ref: f64,
    pub n_ref: f64,
    pub extendible_ref: bool,
}

impl SweepRecord {
    pub fn at(c: f64) -> Result<Self> {
        let rho = states::max_obese(c)?;
        let report = full_report(&rho);
        let major = (1.0 - c).sqrt();
        Ok(SweepRecord {
            c,
            beta: report.beta,
            fef: report.fef,
            fidelity: report.fidelity,
            concurrence: report.concurrence,
            negativity: report.negativity,
            extendible: report.sym_extendible,
            c_norm: report.c_norm,
            beta_ref: 2.0 * (2.0 * (1.0 - c)).sqrt(),
            fef_ref: (1.0 + major).powi(2) / 4.0,
            c_ref: major,
            n_ref: 1.0 - c,
            extendible_ref: c >= 0.5,
        })
    }

    /// Named deviations from the closed forms larger than `tol`.
    pub fn mismatches(&self, tol: f64) -> Vec<(&'static str, f64)> {
        let checks = [
            ("beta", (self.beta - self.beta_ref).abs()),
            ("fef", (self.fef - self.fef_ref).abs()),
            ("fidelity", (self.fidelity - (2.0 * self.fef_ref + 1.0) / 3.0).abs()),
            ("concurrence", (self.concurrence - self.c_ref).abs()),
            ("negativity", (self.negativity - self.n_ref).abs()),
            ("concurrence_sqrt_negativity", (self.concurrence - self.negativity.sqrt()).abs()),
        ];
        // Negated so that NaN differences count as mismatches.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let mut out: Vec<_> = checks.into_iter().filter(|(_, d)| !(*d <= tol)).collect();
        if self.extendible != self.extendible_ref {
            out.push(("extendible", 1.0));
        }
        out
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(self.c),
            fmt_f64(self.beta),
            fmt_f64(self.fef),
            fmt_f64(self.fidelity),
            fmt_f64(self.concurrence),
            fmt_f64(self.negativity),
            self.extendible,
            fmt_f64(self.beta_ref),
            fmt_f64(self.fef_ref),
            fmt_f64(self.c_ref),
            fmt_f64(self.n_ref)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    /// `(c, quantity, deviation)` for every failed comparison.
    pub mismatches: Vec<(f64, &'static str, f64)>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Uniform grid `0, 1/(n-1), ..., 1`.
pub fn c_grid(points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points).map(|k| if k + 1 == points { 1.0 } else { k as f64 / last }).collect()
}

pub fn run_sweep(grid_points: usize, tol: f64) -> Result<SweepOutcome> {
    if grid_points < 2 {
        return Err(Error::OutOfRange { name: "grid_points", value: grid_points as f64 });
    }
    let records = c_grid(grid_points)
        .into_iter()
        .map(SweepRecord::at)
        .collect::<Result<Vec<_>>>()?;
    let mismatches = records
        .iter()
        .flat_map(|r| r.mismatches(tol).into_iter().map(move |(name, d)| (r.c, name, d)))
        .collect();
    Ok(SweepOutcome { records, mismatches })
}

/// Result of one property suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    /// Non-fatal suites are reported but never fail the run.
    pub fatal: bool,
    pub checked: usize,
    pub threshold: f64,
    /// Largest observed margin; positive values mean the property was
    /// exceeded by that amount.
    pub worst_margin: Option<f64>,
    pub worst_state: Option<StateFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub suites: Vec<SuiteResult>,
}

type Margin = Option<(f64, CMat4)>;

fn suite(name: &str, fatal: bool, threshold: f64, margins: Vec<Margin>) -> SuiteResult {
    let checked = margins.iter().filter(|m| m.is_some()).count();
    let mut worst: Option<(f64, CMat4)> = None;
    for (m, state) in margins.into_iter().flatten() {
        // NaN always wins so it cannot hide.
        let replace = match &worst {
            None => true,
            Some((w, _)) => m > *w || (m.is_nan() && !w.is_nan()),
        };
        if replace {
            worst = Some((m, state));
        }
    }
    let passed = worst.as_ref().is_none_or(|(m, _)| *m <= threshold);
    SuiteResult {
        name: name.to_string(),
        passed,
        fatal,
        checked,
        threshold,
        worst_margin: worst.as_ref().map(|(m, _)| *m),
        worst_state: worst.map(|(_, s)| StateFile::from_matrix(&s)),
    }
}

fn par_margins<F>(count: usize, f: F) -> Vec<Margin>
where
    F: Fn(usize) -> Margin + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

fn ellipsoid_distance(a: &SteeringEllipsoid, b: &SteeringEllipsoid) -> f64 {
    let center = (a.center - b.center).abs().max();
    let axes = (0..3).map(|i| (a.spectrum.s[i] - b.spectrum.s[i]).abs()).fold(0.0, f64::max);
    let chi = f64::from((a.chirality().value() - b.chirality().value()).abs());
    center.max(axes).max(chi)
}

/// Random invertible 2x2 filter with bounded condition number.
fn random_filter(rng: &mut impl rand::Rng) -> CMat2 {
    use rand_distr::StandardNormal;
    loop {
        let m = CMat2::from_fn(|_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let sv = m.singular_values();
        if sv[1] > 0.0 && sv[0] / sv[1] <= MAX_FILTER_CONDITION {
            return m;
        }
    }
}

/// `(1 x M) rho (1 x M^dagger)` renormalised.
pub fn bob_filtered(rho: &TwoQubitState, m: &CMat2) -> Result<TwoQubitState> {
    let k = kron(&CMat2::identity(), m);
    let out = k * rho.matrix() * k.adjoint();
    let out = crate::qmat::hermitian_part(&out);
    states::validate(&(out / out.trace()))
}

struct Pools {
    general: Vec<TwoQubitState>,
    canonical: Vec<(TwoQubitState, SteeringEllipsoid)>,
}

fn pools(samples: usize, seed: u64) -> Result<Pools> {
    let general_spec = EnsembleSpec::new(EnsembleKind::GinibreMixed, Rank::Mixed, seed, samples);
    let canonical_spec = EnsembleSpec::new(
        EnsembleKind::CanonicalFiltered,
        Rank::Mixed,
        seed ^ 0x5bd1_e995_9e37_79b9,
        samples,
    );
    let general = (0..samples)
        .into_par_iter()
        .map(|i| sample_random(&general_spec, i).map(|s| s.state))
        .collect::<Result<Vec<_>>>()?;
    let canonical = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = sample_random(&canonical_spec, i)?.state;
            let e = ellipsoid_of(&s)?;
            Ok((s, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pools { general, canonical })
}

/// Runs every property suite at the given sample count.
pub fn run_verify(samples: usize, seed: u64, tol: f64) -> Result<VerifySummary> {
    let mut warnings = Vec::new();
    if samples == 0 {
        warnings.push("samples = 0: random-state suites are vacuous".to_string());
    }
    let Pools { general, canonical } = pools(samples, seed)?;
    let oracle_count = samples.min(ORACLE_STATES);
    let grid: Vec<(f64, TwoQubitState)> = c_grid(DEFAULT_SWEEP_POINTS)
        .into_iter()
        .map(|c| states::max_obese(c).map(|s| (c, s)))
        .collect::<Result<_>>()?;

    let mut suites = Vec::new();

    let filter_spec = EnsembleSpec::new(EnsembleKind::GinibreMixed, Rank::Mixed, seed ^ 0xf11e, samples);
    suites.push(suite(
        "steering.filter_invariance",
        true,
        FILTER_INVARIANCE_TOL,
        par_margins(samples, |i| {
            let rho = &general[i];
            let mut rng = filter_spec.rng_for(i);
            let m = random_filter(&mut rng);
            let e = ellipsoid_of(rho).ok()?;
            let filtered = bob_filtered(rho, &m).ok()?;
            let e2 = ellipsoid_of(&filtered).ok()?;
            Some((ellipsoid_distance(&e, &e2), *rho.matrix()))
        }),
    ));

    suites.push(suite(
        "steering.filter_idempotent",
        true,
        IDEMPOTENCE_TOL,
        par_margins(canonical.len(), |i| {
            let rho = &canonical[i].0;
            let again = canonical_filter(rho).ok()?;
            Some((max_abs(&(again.matrix() - rho.matrix())), *rho.matrix()))
        }),
    ));

    suites.push(suite(
        "steering.entangled_chirality",
        true,
        ENTANGLED_TOL,
        par_margins(samples, |i| {
            let rho = &general[i];
            let e = ellipsoid_of(rho).ok()?;
            let c = concurrence(rho).0;
            let margin = if e.chirality() == Chirality::Negative { 0.0 } else { c };
            Some((margin, *rho.matrix()))
        }),
    ));

    let containment = |rho: &TwoQubitState, e: &SteeringEllipsoid| {
        let r = steering::necessary_conditions(e);
        Some((r.containment_margin, *rho.matrix()))
    };
    let mut containment_margins = par_margins(samples, |i| {
        let rho = &general[i];
        containment(rho, &ellipsoid_of(rho).ok()?)
    });
    containment_margins.extend(par_margins(canonical.len(), |i| {
        containment(&canonical[i].0, &canonical[i].1)
    }));
    suites.push(suite("steering.containment", true, tol, containment_margins));

    suites.push(suite(
        "steering.entangled_inequality",
        true,
        tol,
        par_margins(canonical.len(), |i| {
            let (rho, e) = &canonical[i];
            let m = steering::necessary_conditions(e).entangled_margin?;
            Some((m, *rho.matrix()))
        }),
    ));

    suites.push(suite(
        "correlations.chsh_oracle",
        true,
        CHSH_ORACLE_TOL,
        par_margins(oracle_count, |i| {
            let rho = &general[i];
            let (found, _) = chsh_oracle(rho, CHSH_ORACLE_RESTARTS, seed.wrapping_add(i as u64));
            Some(((found - chsh_beta(rho)).abs(), *rho.matrix()))
        }),
    ));

    suites.push(suite(
        "correlations.fef_oracle",
        true,
        FEF_ORACLE_TOL,
        par_margins(oracle_count, |i| {
            let rho = &general[i];
            let found = fef_oracle(rho, FEF_ORACLE_SAMPLES, seed.wrapping_add(i as u64));
            Some(((found - fully_entangled_fraction(rho)).abs(), *rho.matrix()))
        }),
    ));

    suites.push(suite(
        "correlations.canonical_reduction",
        true,
        tol,
        par_margins(canonical.len(), |i| {
            let (rho, e) = &canonical[i];
            let [s1, s2, s3] = e.spectrum.s;
            let eq4 = 0.25 * (1.0 + s1 + s2 - e.chirality().as_f64() * s3);
            let eq3 = 2.0 * (s1 * s1 + s2 * s2).sqrt();
            let d = (fully_entangled_fraction(rho) - eq4).abs().max((chsh_beta(rho) - eq3).abs());
            Some((d, *rho.matrix()))
        }),
    ));

    let canonical_bound = |name: &str, fatal: bool, f: &(dyn Fn(&TwoQubitState, &SteeringEllipsoid) -> f64 + Sync)| {
        suite(
            name,
            fatal,
            tol,
            par_margins(canonical.len(), |i| {
                let (rho, e) = &canonical[i];
                Some((f(rho, e), *rho.matrix()))
            }),
        )
    };
    suites.push(canonical_bound("theorem1.chsh_bound", true, &|rho, e| {
        chsh_beta(rho) - 2.0 * (2.0 * (1.0 - e.center_norm())).max(0.0).sqrt()
    }));
    suites.push(canonical_bound("theorem3.fef_bound", true, &|rho, e| {
        fully_entangled_fraction(rho) - (1.0 + (1.0 - e.center_norm()).max(0.0).sqrt()).powi(2) / 4.0
    }));
    suites.push(canonical_bound("bounds.concurrence_center", true, &|rho, e| {
        concurrence(rho).0 - (1.0 - e.center_norm()).max(0.0).sqrt()
    }));
    suites.push(canonical_bound("bounds.concurrence_major_axis", true, &|rho, e| {
        concurrence(rho).0 - e.spectrum.s[0]
    }));
    suites.push(canonical_bound("bounds.chsh_concurrence", true, &|rho, _| {
        2.0 * std::f64::consts::SQRT_2 * concurrence(rho).0 - chsh_beta(rho)
    }));
    suites.push(canonical_bound("bounds.negativity_minor_axis", false, &|rho, e| {
        negativity(rho).0 - e.spectrum.s[2]
    }));

    suites.push(suite(
        "obese.closed_forms",
        true,
        tol,
        grid.iter()
            .map(|(c, rho)| {
                let r = SweepRecord::at(*c).ok()?;
                let d = [
                    (r.beta - r.beta_ref).abs(),
                    (r.fef - r.fef_ref).abs(),
                    (r.concurrence - r.c_ref).abs(),
                    (r.negativity - r.n_ref).abs(),
                    (r.concurrence - r.negativity.sqrt()).abs(),
                    if r.extendible == r.extendible_ref { 0.0 } else { 1.0 },
                ]
                .into_iter()
                .fold(0.0, f64::max);
                Some((d, *rho.matrix()))
            })
            .collect(),
    ));

    suites.push(suite(
        "theorem2.partition",
        true,
        tol,
        grid.iter()
            .map(|(c, rho)| {
                let beta = chsh_beta(rho);
                let extendible = symmetric_extendible(rho);
                let nonlocal = beta > 2.0 + tol;
                let margin = if *c == 0.5 {
                    if extendible { (beta - 2.0).abs() } else { 1.0 }
                } else if extendible != nonlocal && extendible == (*c >= 0.5) {
                    0.0
                } else {
                    1.0
                };
                Some((margin, *rho.matrix()))
            })
            .collect(),
    ));

    suites.push(suite(
        "terhal.exclusivity",
        true,
        tol,
        par_margins(samples, |i| {
            let rho = &general[i];
            symmetric_extendible(rho).then(|| (chsh_beta(rho) - 2.0, *rho.matrix()))
        }),
    ));

    suites.push(suite(
        "correlations.concurrence_dominates_negativity",
        true,
        tol,
        par_margins(samples, |i| {
            let rho = &general[i];
            Some((correlations::negativity(rho).0 - concurrence(rho).0, *rho.matrix()))
        }),
    ));

    let passed = suites.iter().all(|s| s.passed || !s.fatal);
    Ok(VerifySummary { samples, seed, tol, passed, warnings, suites })
}

/// Report for a single state: measures plus the ellipsoid when one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub report: correlations::CorrelationReport,
    pub ellipsoid: Option<EllipsoidSummary>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidSummary {
    pub center: [f64; 3],
    pub semiaxes: [f64; 3],
    pub chirality: Chirality,
}

pub fn state_report(rho: &TwoQubitState) -> StateReport {
    let report = full_report(rho);
    match ellipsoid_of(rho) {
        Ok(e) => StateReport {
            report,
            ellipsoid: Some(EllipsoidSummary {
                center: [e.center.x, e.center.y, e.center.z],
                semiaxes: e.spectrum.s,
                chirality: e.chirality(),
            }),
            note: None,
        },
        Err(err) => StateReport { report, ellipsoid: None, note: Some(err.to_string()) },
    }
}
