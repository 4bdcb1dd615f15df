//! Scripted studies: volume of the unit ball, the q-norm and arctan
//! expectations, small probabilities, and binomial interval coverage.
//!
//! Every grid cell gets its own randomness. Estimator cells run with the
//! seed `derive_seed(seed, cell_index)`; coverage cells draw from stream
//! `(seed, cell_index)`. Rows are sorted before they are returned, so the
//! output does not depend on scheduling.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::bounds::{growth_exponent_table, plan_sample_size, relative_tail, BoundSpec, SamplePlan};
use crate::error::{domain, Result};
use crate::estimators::{estimate_expectation, estimate_volume, CertifiedEstimate, Convexity, Domain, Integrand, Sampler};
use crate::families::{
    arctan_integrand, arctan_truth_1d, in_unit_ball, qnorm_integrand, qnorm_truth_1d, ExampleFamily,
};
use crate::intervals::{IntervalTable, Method};
use crate::sampling::{cholesky, make_stream, sample_binomial, CovarianceFactor};
use crate::specfun::unit_ball_volume;

/// Default cap on the number of samples a single study cell may draw.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Method label for rows whose sample size exceeded the budget or the plan cap.
pub const INFEASIBLE: &str = "infeasible";

/// SplitMix64 mix of `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One record of an estimation study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub study: String,
    pub p: Option<u32>,
    /// Family parameter: `q`, `γ`, or `ζ` depending on the study.
    pub param: Option<f64>,
    pub n: u64,
    pub estimate: Option<f64>,
    pub truth: Option<f64>,
    pub abs_error: Option<f64>,
    pub rel_error: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub method: String,
    pub seed: u64,
}

impl StudyRow {
    pub fn from_estimate(
        study: &str,
        p: Option<u32>,
        param: Option<f64>,
        est: &CertifiedEstimate,
        truth: Option<f64>,
        seed: u64,
    ) -> Self {
        let truth = truth.filter(|t| t.is_finite());
        let abs_error = truth.map(|t| (est.estimate - t).abs());
        let rel_error = match (abs_error, truth) {
            (Some(e), Some(t)) if t != 0.0 => Some(e / t.abs()),
            _ => None,
        };
        Self {
            study: study.to_string(),
            p,
            param,
            n: est.n,
            estimate: Some(est.estimate),
            truth,
            abs_error,
            rel_error,
            ci_lower: Some(est.ci_lower),
            ci_upper: Some(est.ci_upper),
            method: est.bound_kind().label().to_string(),
            seed,
        }
    }

    fn infeasible(study: &str, p: Option<u32>, param: Option<f64>, n: u64, truth: Option<f64>, seed: u64) -> Self {
        Self {
            study: study.to_string(),
            p,
            param,
            n,
            estimate: None,
            truth,
            abs_error: None,
            rel_error: None,
            ci_lower: None,
            ci_upper: None,
            method: INFEASIBLE.to_string(),
            seed,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.method == INFEASIBLE
    }

    fn sort_key(&self, other: &Self) -> Ordering {
        self.study
            .cmp(&other.study)
            .then(self.p.cmp(&other.p))
            .then(cmp_opt(self.param, other.param))
            .then(self.method.cmp(&other.method))
    }
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => a.total_cmp(&b),
        (a, b) => a.is_some().cmp(&b.is_some()),
    }
}

/// Rows plus free-text remarks (plans, bounds) that accompany them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StudyOutput {
    pub rows: Vec<StudyRow>,
    pub notes: Vec<String>,
}

/// One record of the coverage study.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageRow {
    pub k: u64,
    pub alpha: f64,
    pub p_true: f64,
    pub method: Method,
    pub replications: u64,
    pub coverage: f64,
    pub exact_coverage: f64,
    pub avg_width: f64,
}

/// How many samples a study cell draws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleRule {
    Fixed(u64),
    /// The sample-size plan at this relative error.
    Planned { delta: f64 },
}

fn check_ascending(name: &'static str, values: &[u32]) -> Result<()> {
    if values.is_empty() {
        return Err(domain(name, "at least one value is required"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain(name, "values must be strictly ascending"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain("alpha", format!("must lie in (0, 1), got {alpha}")))
    }
}

fn plan_note(label: &str, plan: &SamplePlan, delta: f64) -> String {
    match plan {
        SamplePlan::Feasible(n) => format!("{label}: planned n = {n} for relative error {delta}"),
        SamplePlan::Infeasible { required } => {
            format!("{label}: planned n ≈ {required:e} for relative error {delta} exceeds 2^62")
        }
    }
}

fn resolve_n(rule: SampleRule, spec: &BoundSpec, alpha: f64) -> Result<(Option<u64>, SamplePlan)> {
    Ok(match rule {
        SampleRule::Fixed(n) => (Some(n), SamplePlan::Feasible(n)),
        SampleRule::Planned { delta } => {
            let plan = plan_sample_size(spec, delta, alpha)?;
            (plan.feasible(), plan)
        }
    })
}

/// Hit-or-miss volume of the unit ball inside `[-1,1]^p`.
///
/// `plan_delta` is the relative error at which the (typically enormous)
/// plan is reported alongside the rows.
pub fn hypersphere_study(
    p_list: &[u32],
    rule: SampleRule,
    alpha: f64,
    seed: u64,
    budget: u64,
    plan_delta: f64,
) -> Result<StudyOutput> {
    check_ascending("p_list", p_list)?;
    check_alpha(alpha)?;
    let mut out = StudyOutput::default();
    for (cell, &p) in p_list.iter().enumerate() {
        let cell_seed = derive_seed(seed, cell as u64);
        let truth = unit_ball_volume(p)?;
        let spec = ExampleFamily::Hypersphere.bound_spec(p)?;
        let exhibit = plan_sample_size(&spec, plan_delta, alpha)?;
        out.notes.push(plan_note(&format!("hypersphere p={p}"), &exhibit, plan_delta));

        let (n, _) = resolve_n(rule, &spec, alpha)?;
        match n {
            Some(n) if n >= 1 && n <= budget => {
                let envelope = Sampler::SymmetricCube { dim: p as usize };
                let est = estimate_volume(cell_seed, &in_unit_ball, 2f64.powi(p as i32), &envelope, n as usize, alpha)?;
                out.notes.push(format!("hypersphere p={p}: {} hits of {n}", est.hits));
                out.rows.push(StudyRow::from_estimate(
                    "hypersphere",
                    Some(p),
                    None,
                    &est.certified,
                    Some(truth),
                    cell_seed,
                ));
            }
            n => out.rows.push(StudyRow::infeasible(
                "hypersphere",
                Some(p),
                None,
                n.unwrap_or(u64::MAX),
                Some(truth),
                cell_seed,
            )),
        }
    }
    out.rows.sort_by(StudyRow::sort_key);
    Ok(out)
}

/// Single-run volume of the unit ball in `[-1,1]^p` with the seed used as given.
pub fn volume_run(p: u32, n: u64, alpha: f64, seed: u64) -> Result<StudyRow> {
    let envelope = Sampler::SymmetricCube { dim: p as usize };
    let truth = unit_ball_volume(p)?;
    let est = estimate_volume(seed, &in_unit_ball, 2f64.powi(p as i32), &envelope, n as usize, alpha)?;
    Ok(StudyRow::from_estimate("volume", Some(p), None, &est.certified, Some(truth), seed))
}

/// The q-norm integrand `1/(1 + ‖x‖_q)` on `[0,1]^p` with its declared metadata.
pub fn qnorm_family_integrand(q: f64, p: u32) -> Result<(Integrand, BoundSpec)> {
    let family = ExampleFamily::qnorm(q)?;
    let spec = family.bound_spec(p)?;
    let lipschitz = spec.lipschitz().unwrap_or(1.0);
    let f = Integrand::new(p as usize, Domain::UnitCube, move |x| qnorm_integrand(x, q))
        .with_lipschitz(lipschitz)
        .with_convexity(Convexity::Convex)
        .with_mean_lower_bound(spec.mean_lower_bound().unwrap_or(1.0));
    Ok((f, spec))
}

/// `arctan(1 + ‖x‖₁)` under `N(0, Σ)`, with `γ` taken from the factor.
pub fn arctan_family_integrand(factor: &CovarianceFactor) -> Result<(Integrand, BoundSpec)> {
    let p = factor.dim() as u32;
    let spec = ExampleFamily::arctan_mvn(factor.gamma())?.bound_spec(p)?;
    let f = Integrand::new(p as usize, Domain::RealSpace, arctan_integrand)
        .with_lipschitz(spec.lipschitz().unwrap_or(1.0))
        .with_mean_lower_bound(spec.mean_lower_bound().unwrap_or(1.0));
    Ok((f, spec))
}

/// Single-run expectation for the q-norm family.
pub fn qnorm_run(q: f64, p: u32, n: u64, alpha: f64, seed: u64) -> Result<StudyRow> {
    let (f, spec) = qnorm_family_integrand(q, p)?;
    let est = estimate_expectation(seed, &f, &Sampler::UnitCube { dim: p as usize }, n as usize, alpha, &spec)?;
    let truth = (p == 1).then(qnorm_truth_1d);
    Ok(StudyRow::from_estimate("qnorm", Some(p), Some(q), &est, truth, seed))
}

/// `1/(1 + ‖x‖_q)` on `[0,1]^p` at the planned sample size for each `p`.
pub fn qnorm_study(q: f64, p_list: &[u32], delta: f64, alpha: f64, seed: u64, budget: u64) -> Result<StudyOutput> {
    check_ascending("p_list", p_list)?;
    check_alpha(alpha)?;
    let mut out = StudyOutput::default();
    for (cell, &p) in p_list.iter().enumerate() {
        let cell_seed = derive_seed(seed, cell as u64);
        let (f, spec) = qnorm_family_integrand(q, p)?;
        let (n, plan) = resolve_n(SampleRule::Planned { delta }, &spec, alpha)?;
        out.notes.push(plan_note(&format!("qnorm q={q} p={p}"), &plan, delta));
        let truth = (p == 1).then(qnorm_truth_1d);
        match n.filter(|&n| n <= budget) {
            Some(n) => {
                let est = estimate_expectation(cell_seed, &f, &Sampler::UnitCube { dim: p as usize }, n as usize, alpha, &spec)?;
                if let Some(rel) = est.relative_halfwidth {
                    out.notes.push(format!("qnorm q={q} p={p}: relative half-width {rel} (target {delta})"));
                }
                out.rows.push(StudyRow::from_estimate("qnorm", Some(p), Some(q), &est, truth, cell_seed));
            }
            None => out.rows.push(StudyRow::infeasible(
                "qnorm",
                Some(p),
                Some(q),
                n.unwrap_or(u64::MAX),
                truth,
                cell_seed,
            )),
        }
    }
    out.rows.sort_by(StudyRow::sort_key);
    Ok(out)
}

/// Covariance structure for the arctan study, per dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaSpec {
    Identity,
    /// `Σ = variance · I`, so `γ = 1 / variance`.
    Isotropic { variance: f64 },
    /// Unit variances with common correlation `rho`.
    Equicorrelated { rho: f64 },
}

impl SigmaSpec {
    pub fn matrix(&self, p: usize) -> Vec<f64> {
        let mut m = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                m[i * p + j] = match *self {
                    SigmaSpec::Identity => f64::from(i == j),
                    SigmaSpec::Isotropic { variance } => variance * f64::from(i == j),
                    SigmaSpec::Equicorrelated { rho } => {
                        if i == j {
                            1.0
                        } else {
                            rho
                        }
                    }
                };
            }
        }
        m
    }

    pub fn factor(&self, p: usize) -> Result<CovarianceFactor> {
        cholesky(&self.matrix(p), p)
    }
}

/// Single-run expectation for the arctan family.
pub fn arctan_run(p: u32, sigma: SigmaSpec, n: u64, alpha: f64, seed: u64) -> Result<StudyRow> {
    let factor = sigma.factor(p as usize)?;
    let (f, spec) = arctan_family_integrand(&factor)?;
    let truth = (p == 1).then(|| arctan_truth_1d(factor.sigma()[0]));
    let gamma = spec.gamma();
    let est = estimate_expectation(seed, &f, &Sampler::Mvn(factor), n as usize, alpha, &spec)?;
    Ok(StudyRow::from_estimate("arctan", Some(p), gamma, &est, truth, seed))
}

/// `E[arctan(1 + ‖X‖₁)]` under `N(0, Σ)` at the planned sample size for each `p`.
pub fn arctan_mvn_study(
    p_list: &[u32],
    sigma: SigmaSpec,
    delta: f64,
    alpha: f64,
    seed: u64,
    budget: u64,
) -> Result<StudyOutput> {
    check_ascending("p_list", p_list)?;
    check_alpha(alpha)?;
    let mut out = StudyOutput::default();
    for (cell, &p) in p_list.iter().enumerate() {
        let cell_seed = derive_seed(seed, cell as u64);
        let factor = sigma.factor(p as usize)?;
        let (f, spec) = arctan_family_integrand(&factor)?;
        let gamma = spec.gamma();
        let (n, plan) = resolve_n(SampleRule::Planned { delta }, &spec, alpha)?;
        out.notes.push(plan_note(&format!("arctan p={p} gamma={}", gamma.unwrap_or(f64::NAN)), &plan, delta));
        let truth = (p == 1).then(|| arctan_truth_1d(factor.sigma()[0]));
        match n.filter(|&n| n <= budget) {
            Some(n) => {
                let est = estimate_expectation(cell_seed, &f, &Sampler::Mvn(factor), n as usize, alpha, &spec)?;
                out.rows.push(StudyRow::from_estimate("arctan", Some(p), gamma, &est, truth, cell_seed));
            }
            None => out.rows.push(StudyRow::infeasible(
                "arctan",
                Some(p),
                gamma,
                n.unwrap_or(u64::MAX),
                truth,
                cell_seed,
            )),
        }
    }
    out.rows.sort_by(StudyRow::sort_key);
    Ok(out)
}

/// Bernoulli(ζ) proportions, with the relative tail bound at `delta` reported per ζ.
pub fn small_probability_study(
    zeta_list: &[f64],
    rule: SampleRule,
    alpha: f64,
    delta: f64,
    seed: u64,
    budget: u64,
) -> Result<StudyOutput> {
    check_alpha(alpha)?;
    if zeta_list.is_empty() {
        return Err(domain("zeta_list", "at least one value is required"));
    }
    if let Some(z) = zeta_list.iter().find(|z| !(**z > 0.0 && **z <= 1.0)) {
        return Err(domain("zeta_list", format!("each ζ must lie in (0, 1], got {z}")));
    }
    let mut out = StudyOutput::default();
    for (cell, &zeta) in zeta_list.iter().enumerate() {
        let cell_seed = derive_seed(seed, cell as u64);
        let spec = BoundSpec::bounded(1.0)?.with_mean_lower_bound(zeta)?;
        let (n, plan) = resolve_n(rule, &spec, alpha)?;
        if let SampleRule::Planned { delta } = rule {
            out.notes.push(plan_note(&format!("smallprob zeta={zeta}"), &plan, delta));
        }
        match n.filter(|&n| n >= 1 && n <= budget) {
            Some(n) => {
                let indicator = move |x: &[f64]| x[0] < zeta;
                let est = estimate_volume(cell_seed, &indicator, 1.0, &Sampler::UnitCube { dim: 1 }, n as usize, alpha)?;
                let bound = relative_tail(&spec, n, delta)?.probability_bound;
                out.notes.push(format!(
                    "smallprob zeta={zeta}: n={n}, hits={}, P(rel error > {delta}) <= {bound:e}",
                    est.hits
                ));
                out.rows.push(StudyRow::from_estimate("smallprob", None, Some(zeta), &est.certified, Some(zeta), cell_seed));
            }
            None => out.rows.push(StudyRow::infeasible(
                "smallprob",
                None,
                Some(zeta),
                n.unwrap_or(u64::MAX),
                Some(zeta),
                cell_seed,
            )),
        }
    }
    out.rows.sort_by(StudyRow::sort_key);
    Ok(out)
}

/// One row of a sample-size plan table.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanRecord {
    pub example: String,
    pub p: u32,
    pub param: Option<f64>,
    pub delta: f64,
    pub alpha: f64,
    pub n_continuous: f64,
    /// Empty when the plan exceeds `2^62`.
    pub n_required: Option<u64>,
}

pub fn plan_table(family: &ExampleFamily, p_list: &[u32], delta: f64, alpha: f64) -> Result<Vec<PlanRecord>> {
    Ok(growth_exponent_table(family, p_list, delta, alpha)?
        .into_iter()
        .map(|row| PlanRecord {
            example: family.to_string(),
            p: row.p,
            param: family.param(),
            delta,
            alpha,
            n_continuous: row.required,
            n_required: row.plan.feasible(),
        })
        .collect())
}

/// An inclusive grid `start, start + step, …, stop` with
/// `round((stop − start)/step) + 1` points.
pub fn inclusive_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(domain("grid", format!("invalid grid {start}:{stop}:{step}")));
    }
    let count = ((stop - start) / step).round() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// The default `p` grid `0.01, 0.02, …, 0.99`.
pub fn default_p_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

/// Empirical and exact coverage of the three binomial intervals over a grid.
pub fn coverage_study(
    k_list: &[u64],
    alpha_list: &[f64],
    p_grid: &[f64],
    replications: u64,
    seed: u64,
) -> Result<Vec<CoverageRow>> {
    if replications == 0 {
        return Err(domain("replications", "at least one replication is required"));
    }
    if k_list.is_empty() || alpha_list.is_empty() || p_grid.is_empty() {
        return Err(domain("grid", "k, alpha and p lists must be nonempty"));
    }
    if let Some(p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(domain("p_grid", format!("probabilities must lie in [0, 1], got {p}")));
    }
    for &a in alpha_list {
        check_alpha(a)?;
    }

    let mut cells = Vec::new();
    for &k in k_list {
        for &alpha in alpha_list {
            let tables = Method::ALL
                .into_iter()
                .map(|m| IntervalTable::new(m, k, alpha))
                .collect::<Result<Vec<_>>>()?;
            for &p in p_grid {
                cells.push((k, alpha, p, tables.clone()));
            }
        }
    }

    let mut rows = cells
        .into_par_iter()
        .enumerate()
        .map(|(index, (k, alpha, p_true, tables))| {
            let mut stream = make_stream(seed, index as u64);
            let draws = (0..replications)
                .map(|_| sample_binomial(&mut stream, k, p_true))
                .collect::<Result<Vec<u64>>>()?;
            tables
                .iter()
                .map(|table| {
                    let (mut covered, mut width) = (0u64, 0.0);
                    for &x in &draws {
                        let iv = table.get(x);
                        covered += u64::from(iv.contains(p_true));
                        width += iv.width();
                    }
                    Ok(CoverageRow {
                        k,
                        alpha,
                        p_true,
                        method: table.method(),
                        replications,
                        coverage: covered as f64 / replications as f64,
                        exact_coverage: table.exact_coverage(p_true)?,
                        avg_width: width / replications as f64,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();

    rows.sort_by(|a, b| {
        a.k.cmp(&b.k)
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.p_true.total_cmp(&b.p_true))
            .then(a.method.cmp(&b.method))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        assert_eq!(inclusive_grid(0.01, 0.99, 0.01).unwrap().len(), 99);
        assert_eq!(inclusive_grid(0.0, 1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(inclusive_grid(0.5, 0.5, 0.1).unwrap(), vec![0.5]);
        assert!(inclusive_grid(0.5, 0.1, 0.1).is_err());
        assert!(inclusive_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn one_dimensional_ball_is_exact() {
        let out = hypersphere_study(&[1], SampleRule::Fixed(57), 0.05, 3, DEFAULT_BUDGET, 0.5).unwrap();
        let row = &out.rows[0];
        assert_eq!(row.estimate, Some(2.0));
        assert!(row.abs_error.unwrap() < 1e-14);
    }

    #[test]
    fn budget_flags_infeasible_rows() {
        let out = hypersphere_study(&[2, 40], SampleRule::Planned { delta: 0.5 }, 0.05, 1, 1_000_000, 0.5).unwrap();
        assert!(!out.rows[0].is_infeasible());
        assert!(out.rows[1].is_infeasible());
        assert!(out.rows[1].estimate.is_none());
        assert!(hypersphere_study(&[4, 2], SampleRule::Fixed(10), 0.05, 1, 100, 0.5).is_err());
    }

    #[test]
    fn study_row_errors() {
        let spec = BoundSpec::bounded(1.0).unwrap();
        let est = CertifiedEstimate {
            estimate: 1.5,
            n: 10,
            alpha: 0.05,
            halfwidth: 0.1,
            ci_lower: 1.4,
            ci_upper: 1.6,
            spec,
            relative_halfwidth: None,
        };
        let r = StudyRow::from_estimate("x", None, None, &est, Some(2.0), 0);
        assert_eq!(r.abs_error, Some(0.5));
        assert_eq!(r.rel_error, Some(0.25));
        let r = StudyRow::from_estimate("x", None, None, &est, Some(0.0), 0);
        assert_eq!(r.abs_error, Some(1.5));
        assert_eq!(r.rel_error, None);
        let r = StudyRow::from_estimate("x", None, None, &est, None, 0);
        assert_eq!((r.abs_error, r.rel_error), (None, None));
    }

    #[test]
    fn small_probability_rejects_bad_zeta() {
        assert!(small_probability_study(&[0.0], SampleRule::Fixed(10), 0.05, 0.1, 0, 100).is_err());
        assert!(small_probability_study(&[1.5], SampleRule::Fixed(10), 0.05, 0.1, 0, 100).is_err());
    }

    #[test]
    fn coverage_row_count_and_order() {
        let rows = coverage_study(&[10], &[0.1], &default_p_grid(), 50, 1).unwrap();
        assert_eq!(rows.len(), 297);
        assert!(rows.windows(2).all(|w| w[0].p_true <= w[1].p_true));
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.coverage)));
    }
}
