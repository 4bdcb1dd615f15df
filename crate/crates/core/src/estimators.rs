//! Monte Carlo estimators that carry a non-asymptotic confidence interval,
//! plus sampled checks of the two structural facts the intervals rely on:
//! block averages of Lipschitz functions shrink the constant by `√n`, and
//! products of strongly log-concave densities keep the same modulus.
//!
//! Work is split into fixed-size chunks. Chunk `k` draws from stream
//! `(seed, k)` and per-chunk results are merged in ascending `k`, so the
//! output does not depend on how many worker threads ran.

use std::fmt;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;

use crate::bounds::{ci_halfwidth, BoundKind, BoundSpec};
use crate::error::{domain, Error, Result};
use crate::sampling::{
    make_stream, sample_mvn, sample_symmetric_cube, sample_unit_cube, CovarianceFactor, RngStream, SampleBatch,
    SamplerId,
};

/// Points per chunk in the parallel estimators.
pub const CHUNK_SIZE: usize = 1 << 14;

pub const DEFAULT_PAIR_COUNT: usize = 10_000;
pub const DEFAULT_TRIPLE_COUNT: usize = 10_000;

const SMOKE_POINTS: usize = 10_000;

/// Streaming count, mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StreamingMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl StreamingMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Unbiased sample variance; NaN with fewer than two values.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        merge_moments(self, other)
    }
}

impl FromIterator<f64> for StreamingMoments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Self::new();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

/// Pairwise (Chan et al.) combination of two moment summaries.
pub fn merge_moments(a: &StreamingMoments, b: &StreamingMoments) -> StreamingMoments {
    if a.count == 0 {
        return *b;
    }
    if b.count == 0 {
        return *a;
    }
    let count = a.count + b.count;
    let (na, nb, n) = (a.count as f64, b.count as f64, count as f64);
    let delta = b.mean - a.mean;
    StreamingMoments {
        count,
        mean: a.mean + delta * (nb / n),
        m2: a.m2 + b.m2 + delta * delta * (na * nb / n),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    Concave,
    Neither,
}

/// Where an integrand is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    UnitCube,
    SymmetricCube,
    RealSpace,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::UnitCube => "unit_cube",
            Domain::SymmetricCube => "symmetric_cube",
            Domain::RealSpace => "real_space",
        })
    }
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A function `R^p → R` with caller-declared analytic metadata.
#[derive(Clone)]
pub struct Integrand {
    dim: usize,
    domain: Domain,
    evaluate: Arc<EvalFn>,
    lipschitz: Option<f64>,
    convexity: Convexity,
    mean_lower_bound: Option<f64>,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("lipschitz", &self.lipschitz)
            .field("convexity", &self.convexity)
            .field("mean_lower_bound", &self.mean_lower_bound)
            .finish_non_exhaustive()
    }
}

/// Result of the registration smoke test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmokeReport {
    pub points_checked: usize,
    /// Largest `|f(x) − f(y)| / ‖x − y‖` seen over consecutive point pairs.
    pub max_pair_ratio: f64,
    /// Pairs whose ratio exceeded the declared Lipschitz constant.
    pub lipschitz_violations: usize,
}

impl Integrand {
    pub fn new(dim: usize, domain: Domain, evaluate: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            domain,
            evaluate: Arc::new(evaluate),
            lipschitz: None,
            convexity: Convexity::Neither,
            mean_lower_bound: None,
        }
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = Some(lipschitz);
        self
    }

    pub fn with_convexity(mut self, convexity: Convexity) -> Self {
        self.convexity = convexity;
        self
    }

    pub fn with_mean_lower_bound(mut self, mu: f64) -> Self {
        self.mean_lower_bound = Some(mu);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    pub fn mean_lower_bound(&self) -> Option<f64> {
        self.mean_lower_bound
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.evaluate)(x)
    }

    /// Validates metadata and runs the smoke test, returning the integrand on success.
    pub fn register(self, seed: u64) -> Result<Self> {
        self.smoke_check(seed)?;
        Ok(self)
    }

    /// Evaluates the integrand on `10^4` domain points. Non-finite values are
    /// an error; pairs that exceed the declared Lipschitz constant are only
    /// reported (and logged), since the constant is the caller's claim.
    pub fn smoke_check(&self, seed: u64) -> Result<SmokeReport> {
        if self.dim == 0 {
            return Err(domain("dim", "integrand dimension must be at least 1"));
        }
        if let Some(l) = self.lipschitz {
            if !(l > 0.0 && l.is_finite()) {
                return Err(domain("lipschitz", format!("must be finite and > 0, got {l}")));
            }
        }
        if let Some(mu) = self.mean_lower_bound {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(domain("mean_lower_bound", format!("must be finite and > 0, got {mu}")));
            }
        }
        let mut stream = make_stream(seed, 0);
        let batch = sample_domain(&mut stream, self.domain, self.dim, SMOKE_POINTS)?;
        let values: Vec<f64> = batch.rows().map(|x| self.eval(x)).collect();
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation { index, value });
        }
        let mut max_pair_ratio: f64 = 0.0;
        let mut lipschitz_violations = 0;
        for i in 0..SMOKE_POINTS - 1 {
            let dist = euclidean(batch.row(i), batch.row(i + 1));
            if dist == 0.0 {
                continue;
            }
            let ratio = (values[i] - values[i + 1]).abs() / dist;
            max_pair_ratio = max_pair_ratio.max(ratio);
            if let Some(l) = self.lipschitz {
                if ratio > l * (1.0 + 1e-9) {
                    lipschitz_violations += 1;
                }
            }
        }
        if lipschitz_violations > 0 {
            warn!(
                "declared Lipschitz constant {:?} exceeded on {lipschitz_violations} sampled pairs (max ratio {max_pair_ratio})",
                self.lipschitz
            );
        }
        Ok(SmokeReport {
            points_checked: SMOKE_POINTS,
            max_pair_ratio,
            lipschitz_violations,
        })
    }
}

fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn sample_domain(stream: &mut RngStream, domain: Domain, p: usize, n: usize) -> Result<SampleBatch> {
    match domain {
        Domain::UnitCube => sample_unit_cube(stream, p, n),
        Domain::SymmetricCube => sample_symmetric_cube(stream, p, n),
        Domain::RealSpace => sample_mvn(stream, &CovarianceFactor::identity(p)?, n),
    }
}

/// The law points are drawn from.
#[derive(Clone, Debug, PartialEq)]
pub enum Sampler {
    UnitCube { dim: usize },
    SymmetricCube { dim: usize },
    Mvn(CovarianceFactor),
}

impl Sampler {
    pub fn id(&self) -> SamplerId {
        match self {
            Sampler::UnitCube { .. } => SamplerId::UnitCube,
            Sampler::SymmetricCube { .. } => SamplerId::SymmetricCube,
            Sampler::Mvn(_) => SamplerId::MultivariateNormal,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Sampler::UnitCube { dim } | Sampler::SymmetricCube { dim } => *dim,
            Sampler::Mvn(f) => f.dim(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Sampler::UnitCube { .. } => Domain::UnitCube,
            Sampler::SymmetricCube { .. } => Domain::SymmetricCube,
            Sampler::Mvn(_) => Domain::RealSpace,
        }
    }

    pub fn sample(&self, stream: &mut RngStream, n: usize) -> Result<SampleBatch> {
        match self {
            Sampler::UnitCube { dim } => sample_unit_cube(stream, *dim, n),
            Sampler::SymmetricCube { dim } => sample_symmetric_cube(stream, *dim, n),
            Sampler::Mvn(f) => sample_mvn(stream, f, n),
        }
    }
}

/// A point estimate with its non-asymptotic `1 − α` interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedEstimate {
    pub estimate: f64,
    pub n: u64,
    pub alpha: f64,
    pub halfwidth: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub spec: BoundSpec,
    /// `halfwidth / μ` when a mean lower bound `μ` is known.
    pub relative_halfwidth: Option<f64>,
}

impl CertifiedEstimate {
    fn new(estimate: f64, n: u64, alpha: f64, spec: BoundSpec) -> Result<Self> {
        let halfwidth = ci_halfwidth(&spec, n, alpha)?;
        Ok(Self {
            estimate,
            n,
            alpha,
            halfwidth,
            ci_lower: estimate - halfwidth,
            ci_upper: estimate + halfwidth,
            spec,
            relative_halfwidth: spec.mean_lower_bound().map(|mu| halfwidth / mu),
        })
    }

    pub fn bound_kind(&self) -> BoundKind {
        self.spec.kind()
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_lower <= value && value <= self.ci_upper
    }

    /// The interval clipped to a known support. Presentation only: the
    /// certificate is the unclipped interval.
    pub fn clipped(&self, min: f64, max: f64) -> (f64, f64) {
        (self.ci_lower.clamp(min, max), self.ci_upper.clamp(min, max))
    }
}

/// A hit-or-miss volume estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub certified: CertifiedEstimate,
    pub hits: u64,
    pub envelope_volume: f64,
}

impl VolumeEstimate {
    /// The hit fraction, i.e. the estimate of `Vol(F) / Vol(F′)`.
    pub fn proportion(&self) -> f64 {
        self.hits as f64 / self.certified.n as f64
    }
}

fn chunk_sizes(n: usize) -> Vec<usize> {
    let full = n / CHUNK_SIZE;
    let rest = n % CHUNK_SIZE;
    let mut sizes = vec![CHUNK_SIZE; full];
    if rest > 0 {
        sizes.push(rest);
    }
    sizes
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain("alpha", format!("must lie in (0, 1), got {alpha}")))
    }
}

/// Estimates `Vol(F)` as `V′ · hits / n` with points drawn uniformly from an
/// envelope `F′ ⊇ F` of volume `V′`.
pub fn estimate_volume(
    seed: u64,
    indicator: &(dyn Fn(&[f64]) -> bool + Sync),
    envelope_volume: f64,
    envelope_sampler: &Sampler,
    n: usize,
    alpha: f64,
) -> Result<VolumeEstimate> {
    if n == 0 {
        return Err(domain("n", "sample size must be at least 1"));
    }
    check_alpha(alpha)?;
    let spec = BoundSpec::bounded(envelope_volume)?;
    let hits = chunk_sizes(n)
        .into_par_iter()
        .enumerate()
        .map(|(k, size)| {
            let mut stream = make_stream(seed, k as u64);
            let batch = envelope_sampler.sample(&mut stream, size)?;
            Ok(batch.rows().filter(|x| indicator(x)).count() as u64)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    let estimate = envelope_volume * (hits as f64 / n as f64);
    Ok(VolumeEstimate {
        certified: CertifiedEstimate::new(estimate, n as u64, alpha, spec)?,
        hits,
        envelope_volume,
    })
}

fn check_spec(integrand: &Integrand, sampler: &Sampler, spec: &BoundSpec) -> Result<()> {
    let mismatch = |m: String| Err(Error::SpecMismatch(m));
    if integrand.dim() != sampler.dim() {
        return mismatch(format!(
            "integrand dimension {} differs from sampler dimension {}",
            integrand.dim(),
            sampler.dim()
        ));
    }
    if integrand.domain() != sampler.domain() {
        return mismatch(format!(
            "integrand is defined on {} but the sampler draws from {}",
            integrand.domain(),
            sampler.domain()
        ));
    }
    if let (Some(declared), Some(used)) = (integrand.lipschitz(), spec.lipschitz()) {
        if used < declared * (1.0 - 1e-12) {
            return mismatch(format!(
                "bound uses Lipschitz constant {used} below the declared {declared}"
            ));
        }
    }
    match spec.kind() {
        BoundKind::BoundedSubGaussian => {}
        BoundKind::ConvexLipschitzCube => {
            if integrand.convexity() == Convexity::Neither {
                return mismatch("convex-Lipschitz bound needs a convex or concave integrand".into());
            }
            if !matches!(sampler, Sampler::UnitCube { .. }) {
                return mismatch("convex-Lipschitz bound needs independent coordinates on the unit cube".into());
            }
            if integrand.lipschitz().is_none() {
                return mismatch("convex-Lipschitz bound needs a declared Lipschitz constant".into());
            }
        }
        BoundKind::LipschitzLogConcave => {
            let Sampler::Mvn(factor) = sampler else {
                return mismatch("log-concave bound needs a strongly log-concave (normal) sampler".into());
            };
            if integrand.lipschitz().is_none() {
                return mismatch("log-concave bound needs a declared Lipschitz constant".into());
            }
            let gamma = spec.gamma().unwrap_or(f64::NAN);
            let actual = factor.gamma();
            if !(gamma <= actual * (1.0 + 1e-8)) {
                return mismatch(format!(
                    "bound uses gamma {gamma} but the sampler is only {actual}-strongly log-concave"
                ));
            }
        }
    }
    Ok(())
}

/// Plain Monte Carlo mean of `integrand` with the interval of the matching bound.
///
/// If `spec` carries no mean lower bound the integrand's declared one is used
/// for the relative half-width.
pub fn estimate_expectation(
    seed: u64,
    integrand: &Integrand,
    sampler: &Sampler,
    n: usize,
    alpha: f64,
    spec: &BoundSpec,
) -> Result<CertifiedEstimate> {
    if n == 0 {
        return Err(domain("n", "sample size must be at least 1"));
    }
    check_alpha(alpha)?;
    check_spec(integrand, sampler, spec)?;
    let spec = match (spec.mean_lower_bound(), integrand.mean_lower_bound()) {
        (None, Some(mu)) => spec.with_mean_lower_bound(mu)?,
        _ => *spec,
    };

    let moments = chunk_sizes(n)
        .into_par_iter()
        .enumerate()
        .map(|(k, size)| {
            let mut stream = make_stream(seed, k as u64);
            let batch = sampler.sample(&mut stream, size)?;
            let mut m = StreamingMoments::new();
            for (i, x) in batch.rows().enumerate() {
                let value = integrand.eval(x);
                if !value.is_finite() {
                    return Err(Error::NonFiniteEvaluation {
                        index: k * CHUNK_SIZE + i,
                        value,
                    });
                }
                m.push(value);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?
        .iter()
        .fold(StreamingMoments::new(), |acc, m| merge_moments(&acc, m));

    CertifiedEstimate::new(moments.mean(), n as u64, alpha, spec)
}

/// How point pairs are drawn in [`empirical_lipschitz_ratio`].
#[derive(Clone, Debug, PartialEq)]
pub enum PairSampling {
    /// Both points drawn independently from the integrand's domain.
    Independent,
    /// `y = x + scale · g` with `g` standard normal in the product space.
    Local { scale: f64 },
    /// `y_i = x_i + t · d / ‖d‖` in every block, `t ~ U(0, 1]`.
    Aligned { direction: Vec<f64> },
}

/// Result of a Lipschitz probe of a block average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzProbe {
    pub max_ratio: f64,
    /// `L / √n`, the constant the block average must respect.
    pub bound: f64,
    pub pairs: usize,
}

/// Largest sampled `|g(x) − g(y)| / ‖x − y‖₂` for the block average
/// `g(x_1, …, x_n) = Σ f(x_i) / n` on the `n·p`-dimensional product domain.
pub fn empirical_lipschitz_ratio(
    f: &Integrand,
    blocks: usize,
    pair_count: usize,
    pairs: &PairSampling,
    seed: u64,
) -> Result<LipschitzProbe> {
    let lipschitz = f.lipschitz().ok_or(Error::MissingLipschitz)?;
    if blocks == 0 {
        return Err(domain("blocks", "at least one block is required"));
    }
    let p = f.dim();
    let unit_direction = match pairs {
        PairSampling::Aligned { direction } => {
            if direction.len() != p {
                return Err(domain("direction", format!("expected length {p}, got {}", direction.len())));
            }
            let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(domain("direction", "must be nonzero"));
            }
            Some(direction.iter().map(|v| v / norm).collect::<Vec<_>>())
        }
        PairSampling::Local { scale } if !(*scale > 0.0) => {
            return Err(domain("scale", format!("must be > 0, got {scale}")));
        }
        _ => None,
    };

    let block_average = |z: &[f64]| z.chunks_exact(p).map(|b| f.eval(b)).sum::<f64>() / blocks as f64;
    let mut stream = make_stream(seed, 0);
    let mut y = vec![0.0; p * blocks];
    let mut noise = vec![0.0; p * blocks];
    let mut max_ratio: f64 = 0.0;
    for _ in 0..pair_count {
        let x = sample_domain(&mut stream, f.domain(), p, blocks)?;
        let x = x.points();
        match pairs {
            PairSampling::Independent => {
                y.copy_from_slice(sample_domain(&mut stream, f.domain(), p, blocks)?.points());
            }
            PairSampling::Local { scale } => {
                stream.fill_standard_normal(&mut noise);
                for ((yi, xi), g) in y.iter_mut().zip(x).zip(&noise) {
                    *yi = xi + scale * g;
                }
            }
            PairSampling::Aligned { .. } => {
                let d = unit_direction.as_deref().unwrap_or_default();
                let t = 1.0 - stream.uniform();
                for (yb, xb) in y.chunks_exact_mut(p).zip(x.chunks_exact(p)) {
                    for ((yi, xi), di) in yb.iter_mut().zip(xb).zip(d) {
                        *yi = xi + t * di;
                    }
                }
            }
        }
        let dist = euclidean(x, &y);
        if dist == 0.0 {
            continue;
        }
        let ratio = (block_average(x) - block_average(&y)).abs() / dist;
        max_ratio = max_ratio.max(ratio);
    }
    Ok(LipschitzProbe {
        max_ratio,
        bound: lipschitz / (blocks as f64).sqrt(),
        pairs: pair_count,
    })
}

/// `γ/2 · λ(1−λ)‖y−z‖² − [λψ(y) + (1−λ)ψ(z) − ψ(λy + (1−λ)z)]`.
///
/// Nonpositive exactly when the strong-convexity inequality holds at this triple.
pub fn logconcavity_gap(psi: &dyn Fn(&[f64]) -> f64, gamma: f64, lambda: f64, y: &[f64], z: &[f64]) -> f64 {
    let mix: Vec<f64> = y.iter().zip(z).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
    let dist2: f64 = y.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    let required = 0.5 * gamma * lambda * (1.0 - lambda) * dist2;
    let achieved = lambda * psi(y) + (1.0 - lambda) * psi(z) - psi(&mix);
    required - achieved
}

/// Maximum of [`logconcavity_gap`] over `triple_count` sampled `(λ, y, z)`,
/// with `λ ~ U[0,1]` and `y, z ~ N(0, 4I)` in `R^dim`.
pub fn strong_logconcavity_check(
    psi: &dyn Fn(&[f64]) -> f64,
    dim: usize,
    gamma: f64,
    triple_count: usize,
    seed: u64,
) -> Result<f64> {
    if dim == 0 {
        return Err(domain("dim", "dimension must be at least 1"));
    }
    if !(gamma > 0.0) {
        return Err(domain("gamma", format!("must be > 0, got {gamma}")));
    }
    let mut stream = make_stream(seed, 0);
    let mut y = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..triple_count {
        stream.fill_standard_normal(&mut y);
        stream.fill_standard_normal(&mut z);
        y.iter_mut().chain(z.iter_mut()).for_each(|v| *v *= 2.0);
        let lambda = stream.uniform();
        let gap = logconcavity_gap(psi, gamma, lambda, &y, &z);
        if !gap.is_finite() {
            return Err(Error::NonFiniteEvaluation { index: 0, value: gap });
        }
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Negative log-density of `copies` independent blocks, each with negative log-density `psi`.
pub fn joint_neg_log_density(
    psi: impl Fn(&[f64]) -> f64,
    block_dim: usize,
) -> impl Fn(&[f64]) -> f64 {
    move |x: &[f64]| x.chunks_exact(block_dim).map(&psi).sum()
}
