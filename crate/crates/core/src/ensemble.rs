//! Exactly solvable example families, the sub-half-power counterexample
//! construction, seeded random spec ensembles, and the conjecture probe for
//! the one-sided bond-defect variant of the mixed bound.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::band_functional;
use crate::eigen::discrete_spectrum;
use crate::error::{Error, Result};
use crate::operator::{Band, LineKind, Perturbation, TruncationPlan};

/// The solvable one-defect families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleId {
    /// Whole line, single diagonal entry b at site 0.
    Ex41,
    /// Whole line, single bond weight a at bond 0.
    Ex42,
    /// Half line, single diagonal entry b at site 1.
    HalfLineSite1,
    /// Half line, single bond weight a at bond 1.
    HalfLineBond1,
}

impl ExampleId {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "Ex4_1" => ExampleId::Ex41,
            "Ex4_2" => ExampleId::Ex42,
            "HalfLineSite1" => ExampleId::HalfLineSite1,
            "HalfLineBond1" => ExampleId::HalfLineBond1,
            other => return Err(Error::Input(format!("unknown example id {other:?}"))),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ExampleId::Ex41 => "Ex4_1",
            ExampleId::Ex42 => "Ex4_2",
            ExampleId::HalfLineSite1 => "HalfLineSite1",
            ExampleId::HalfLineBond1 => "HalfLineBond1",
        }
    }
}

/// A solvable spec with its closed-form predictions.
#[derive(Debug, Clone)]
pub struct AnalyticExample {
    pub id: ExampleId,
    pub parameter: f64,
    pub spec: Perturbation,
    /// Eigenvalues outside the band, descending above / ascending below,
    /// merged into one descending list.
    pub predicted: Vec<f64>,
    pub t1_lhs: f64,
    pub t1_rhs: f64,
}

/// Builds the requested example with its closed-form eigenvalues.
pub fn analytic_example(id: ExampleId, parameter: f64) -> Result<AnalyticExample> {
    match id {
        ExampleId::Ex41 => {
            let b = parameter;
            if b == 0.0 || !b.is_finite() {
                return Err(Error::Domain("Ex4_1 needs b != 0".into()));
            }
            let spec = Perturbation::whole_line([], [(0, b)])?;
            let energy = b.signum() * (b * b + 4.0).sqrt();
            Ok(AnalyticExample {
                id,
                parameter,
                spec,
                predicted: vec![energy],
                t1_lhs: b.abs(),
                t1_rhs: b.abs(),
            })
        }
        ExampleId::Ex42 => {
            let a = parameter;
            if !(a > 1.0) || !a.is_finite() {
                return Err(Error::Domain("Ex4_2 needs a > 1".into()));
            }
            let spec = Perturbation::whole_line([(0, a)], [])?;
            let energy = a + 1.0 / a;
            Ok(AnalyticExample {
                id,
                parameter,
                spec,
                predicted: vec![energy, -energy],
                t1_lhs: 2.0 * (a - 1.0 / a),
                t1_rhs: 4.0 * (a - 1.0),
            })
        }
        ExampleId::HalfLineSite1 => {
            let b = parameter;
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::Domain("HalfLineSite1 needs b > 0".into()));
            }
            let spec = Perturbation::half_line([], [(1, b)])?;
            // decaying solution u(n) = mu^n fits iff mu = 1/b < 1
            let (predicted, t1_lhs) = if b > 1.0 {
                (vec![b + 1.0 / b], b - 1.0 / b)
            } else {
                (vec![], 0.0)
            };
            Ok(AnalyticExample {
                id,
                parameter,
                spec,
                predicted,
                t1_lhs,
                t1_rhs: b,
            })
        }
        ExampleId::HalfLineBond1 => {
            let a = parameter;
            if !(a > 1.0) || !a.is_finite() {
                return Err(Error::Domain("HalfLineBond1 needs a > 1".into()));
            }
            let spec = Perturbation::half_line([(1, a)], [])?;
            // matching a decaying tail through the strengthened bond pins
            // mu^{-2} = a^2 - 1; a bound state needs mu < 1, i.e. a > sqrt(2)
            let (predicted, t1_lhs) = if a * a > 2.0 {
                let mu = (a * a - 1.0).powf(-0.5);
                let energy = mu + 1.0 / mu;
                (vec![energy, -energy], 2.0 * (1.0 / mu - mu))
            } else {
                (vec![], 0.0)
            };
            Ok(AnalyticExample {
                id,
                parameter,
                spec,
                predicted,
                t1_lhs,
                t1_rhs: 4.0 * (a - 1.0),
            })
        }
    }
}

/// Periodic-spike construction showing that no translation-invariant norm
/// controls moments below the half power.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub spec: Perturbation,
    pub p: f64,
    pub beta: f64,
    pub n_spikes: usize,
    pub spacing: i64,
    /// l1 norm of (b, a - 1): N beta for this construction.
    pub l1_norm: f64,
    /// Guaranteed lower moment mass N (beta^2/6)^p, valid once the spikes
    /// decouple (spacing large).
    pub moment_lower_bound: f64,
    /// Set when the spacing is below the 10/beta decoupling guideline; the
    /// computed moment sum may then undershoot the lower bound.
    pub spacing_warning: bool,
}

pub fn counterexample_theorem3(p: f64, beta: f64, n_spikes: usize, spacing: i64) -> Result<Counterexample> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Domain(format!(
            "the construction targets 0 <= p < 1/2, got p = {p}"
        )));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "spike height must satisfy 0 < beta < 1, got {beta}"
        )));
    }
    if n_spikes < 1 {
        return Err(Error::Input("need at least one spike".into()));
    }
    if spacing < 1 {
        return Err(Error::Input("spacing must be >= 1".into()));
    }
    let spec = Perturbation::half_line(
        [],
        (1..=n_spikes as i64).map(|k| (k * spacing, beta)),
    )?;
    Ok(Counterexample {
        spec,
        p,
        beta,
        n_spikes,
        spacing,
        l1_norm: n_spikes as f64 * beta,
        moment_lower_bound: n_spikes as f64 * (beta * beta / 6.0).powf(p),
        spacing_warning: (spacing as f64) < 10.0 / beta,
    })
}

/// Desk-scale instantiation of the epsilon scaling: beta ~ eps^{2/(1-2p)},
/// N ~ eps^{-(1+2p)/(1-2p)}, spacing at the decoupling guideline 10/beta.
pub fn counterexample_scaling(p: f64, eps: f64) -> Result<(f64, usize, i64)> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Domain(format!("scaling needs 0 <= p < 1/2, got {p}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Input(format!("eps must lie in (0, 1], got {eps}")));
    }
    let beta = 0.64 * eps.powf(2.0 / (1.0 - 2.0 * p));
    let n = eps.powf(-(1.0 + 2.0 * p) / (1.0 - 2.0 * p)).ceil() as usize;
    let m = (10.0 / beta).ceil() as i64;
    Ok((beta, n, m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPolicy {
    Mixed,
    Positive,
    Negative,
}

impl SignPolicy {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "mixed" => SignPolicy::Mixed,
            "positive" => SignPolicy::Positive,
            "negative" => SignPolicy::Negative,
            other => return Err(Error::Input(format!("unknown sign policy {other:?}"))),
        })
    }
}

/// Deterministic ensemble description: sample k is a pure function of
/// (seed, k), independent of iteration order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub count: usize,
    pub kind: LineKind,
    /// Inclusive range of support sizes (number of consecutive sites).
    pub support: (usize, usize),
    /// Inclusive range of |b| magnitudes.
    pub b_range: (f64, f64),
    /// Inclusive range of bond weights; (1, 1) keeps all bonds free.
    pub a_range: (f64, f64),
    pub sign_policy: SignPolicy,
}

impl EnsembleConfig {
    pub fn diagonal_positive(seed: u64, count: usize, kind: LineKind) -> Self {
        EnsembleConfig {
            seed,
            count,
            kind,
            support: (1, 6),
            b_range: (0.3, 3.0),
            a_range: (1.0, 1.0),
            sign_policy: SignPolicy::Positive,
        }
    }

    pub fn mixed(seed: u64, count: usize, kind: LineKind) -> Self {
        EnsembleConfig {
            seed,
            count,
            kind,
            support: (1, 8),
            b_range: (0.0, 2.0),
            a_range: (0.2, 3.0),
            sign_policy: SignPolicy::Mixed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.support.0 < 1 || self.support.0 > self.support.1 {
            return Err(Error::Input("empty support size range".into()));
        }
        if !(self.b_range.0 <= self.b_range.1) || self.b_range.0 < 0.0 {
            return Err(Error::Input("invalid |b| magnitude range".into()));
        }
        if !(self.a_range.0 <= self.a_range.1) || self.a_range.0 <= 0.0 {
            return Err(Error::Input("invalid bond weight range".into()));
        }
        Ok(())
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    // counter-based key: one independent stream per (seed, index)
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(b"bandedge");
    ChaCha8Rng::from_seed(key)
}

/// Sample `index` of the ensemble, independent of any other sample.
pub fn ensemble_member(cfg: &EnsembleConfig, index: usize) -> Result<Perturbation> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, index as u64);
    let size = rng.gen_range(cfg.support.0..=cfg.support.1);
    let start: i64 = match cfg.kind {
        LineKind::HalfLine => rng.gen_range(1..=4),
        LineKind::WholeLine => rng.gen_range(-(size as i64)..=2),
    };
    let mut b = Vec::with_capacity(size);
    for k in 0..size {
        let mag = rng.gen_range(cfg.b_range.0..=cfg.b_range.1);
        let sign = match cfg.sign_policy {
            SignPolicy::Positive => 1.0,
            SignPolicy::Negative => -1.0,
            SignPolicy::Mixed => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        b.push((start + k as i64, sign * mag));
    }
    let mut a = Vec::new();
    if cfg.a_range != (1.0, 1.0) && size > 1 {
        for k in 0..size - 1 {
            a.push((start + k as i64, rng.gen_range(cfg.a_range.0..=cfg.a_range.1)));
        }
    }
    Perturbation::new(cfg.kind, a, b)
}

/// All samples of the ensemble in index order.
pub fn random_ensemble(cfg: &EnsembleConfig) -> impl Iterator<Item = Result<Perturbation>> + '_ {
    (0..cfg.count).map(move |k| ensemble_member(cfg, k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFinding {
    pub index: usize,
    pub slack: f64,
}

/// Outcome of the one-sided bond-defect probe: the minimum slack of
/// sum sqrt(E^2-4) <= sum |b| + 4 sum (a-1)_+ over the ensemble, with the
/// witnessing spec. Negative slack beyond tolerance is a finding, not a
/// failure.
#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub samples: usize,
    pub min_slack: f64,
    pub witness: Option<(usize, Perturbation)>,
    pub findings: Vec<ProbeFinding>,
    pub skipped: usize,
}

pub fn conjecture_probe(cfg: &EnsembleConfig, plan: &TruncationPlan) -> Result<ProbeOutcome> {
    cfg.validate()?;
    let band = Band::chain();
    let mut min_slack = f64::INFINITY;
    let mut witness = None;
    let mut findings = Vec::new();
    let mut skipped = 0usize;
    for index in 0..cfg.count {
        let spec = ensemble_member(cfg, index)?;
        let report = match discrete_spectrum(&spec, plan, &band) {
            Ok(r) => r,
            Err(Error::NoConvergence { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut lhs = 0.0;
        for &e in report.e_plus.iter().chain(&report.e_minus) {
            lhs += band_functional(e)?;
        }
        let rhs_positive_defects: f64 = spec
            .b_entries()
            .map(|(_, v)| v.abs())
            .sum::<f64>()
            + 4.0
                * spec
                    .a_entries()
                    .map(|(_, v)| (v - 1.0).max(0.0))
                    .sum::<f64>();
        let slack = rhs_positive_defects - lhs;
        if slack < min_slack {
            min_slack = slack;
            witness = Some((index, spec));
        }
        if slack < -(1e-8 + report.max_error()) {
            findings.push(ProbeFinding { index, slack });
        }
    }
    Ok(ProbeOutcome {
        samples: cfg.count,
        min_slack,
        witness,
        findings,
        skipped,
    })
}

/// Half-line diagonal n^{-alpha} up to the cutoff.
pub fn decay_profile(alpha: f64, cutoff: i64) -> Result<Perturbation> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("decay exponent must exceed 1, got {alpha}")));
    }
    if cutoff < 1 {
        return Err(Error::Input("cutoff must be >= 1".into()));
    }
    let b: BTreeMap<i64, f64> = (1..=cutoff).map(|n| (n, (n as f64).powf(-alpha))).collect();
    Perturbation::half_line([], b)
}
