//! Seedable, stream-keyed sampling for every distribution the studies need.
//!
//! Each [`RngStream`] is a ChaCha8 keystream keyed by `seed` with the 64-bit
//! ChaCha stream id set to `stream_index`. The counter-based construction
//! means stream `k` is fixed by `(seed, k)` alone, so a computation split
//! into chunks gives the same numbers no matter how many threads run it.
//!
//! Normals come from the Marsaglia polar method; both members of each
//! accepted pair are used, in order.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};

/// A reproducible random stream identified by `(seed, stream_index)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

/// Creates the stream keyed by `(seed, stream_index)`.
pub fn make_stream(seed: u64, stream_index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_index);
    RngStream {
        seed,
        stream_index,
        rng,
    }
}

impl RngStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// One standard normal pair (Marsaglia polar method).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                return (u * scale, v * scale);
            }
        }
    }

    /// Fills `out` with independent standard normals.
    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = self.normal_pair();
            pair[0] = a;
            pair[1] = b;
        }
        if let [last] = chunks.into_remainder() {
            *last = self.normal_pair().0;
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Which sampler produced a batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SamplerId {
    UnitCube,
    SymmetricCube,
    MultivariateNormal,
}

impl SamplerId {
    pub fn label(self) -> &'static str {
        match self {
            SamplerId::UnitCube => "unit_cube",
            SamplerId::SymmetricCube => "symmetric_cube",
            SamplerId::MultivariateNormal => "mvn",
        }
    }
}

impl fmt::Display for SamplerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `count` points in `R^dim`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    count: usize,
    points: Vec<f64>,
    sampler_id: SamplerId,
    seed: u64,
}

impl SampleBatch {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn sampler_id(&self) -> SamplerId {
        self.sampler_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Flat row-major storage.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }
}

fn check_shape(p: usize, n: usize) -> Result<()> {
    if p == 0 {
        return Err(domain("p", "dimension must be at least 1"));
    }
    if n == 0 {
        return Err(domain("n", "sample count must be at least 1"));
    }
    Ok(())
}

/// `n` iid points uniform on `[0, 1]^p`.
pub fn sample_unit_cube(stream: &mut RngStream, p: usize, n: usize) -> Result<SampleBatch> {
    check_shape(p, n)?;
    let points = (0..n * p).map(|_| stream.uniform()).collect();
    Ok(SampleBatch {
        dim: p,
        count: n,
        points,
        sampler_id: SamplerId::UnitCube,
        seed: stream.seed,
    })
}

/// `n` iid points uniform on `[-1, 1]^p`, obtained as `2u - 1` from the unit-cube draws.
pub fn sample_symmetric_cube(stream: &mut RngStream, p: usize, n: usize) -> Result<SampleBatch> {
    check_shape(p, n)?;
    let points = (0..n * p).map(|_| 2.0 * stream.uniform() - 1.0).collect();
    Ok(SampleBatch {
        dim: p,
        count: n,
        points,
        sampler_id: SamplerId::SymmetricCube,
        seed: stream.seed,
    })
}

/// Lower-triangular Cholesky factor of a covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceFactor {
    dim: usize,
    lower: Vec<f64>,
    sigma: Vec<f64>,
}

/// Cholesky factorization of a symmetric positive-definite `p×p` matrix given row-major.
///
/// Pivots at or below `1e-12 × max diagonal` are rejected; singular
/// matrices are never regularized.
pub fn cholesky(sigma: &[f64], p: usize) -> Result<CovarianceFactor> {
    if p == 0 {
        return Err(domain("p", "dimension must be at least 1"));
    }
    if sigma.len() != p * p {
        return Err(domain(
            "sigma",
            format!("expected {} entries for a {p}x{p} matrix, got {}", p * p, sigma.len()),
        ));
    }
    if let Some(bad) = sigma.iter().position(|v| !v.is_finite()) {
        return Err(domain("sigma", format!("non-finite entry at {bad}")));
    }
    let max_diag = (0..p).map(|i| sigma[i * p + i]).fold(f64::MIN, f64::max);
    for i in 0..p {
        for j in 0..i {
            let (a, b) = (sigma[i * p + j], sigma[j * p + i]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(max_diag.abs()) {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    let threshold = 1e-12 * max_diag.max(0.0);

    let mut lower = vec![0.0; p * p];
    for j in 0..p {
        let mut pivot = sigma[j * p + j];
        for k in 0..j {
            pivot -= lower[j * p + k] * lower[j * p + k];
        }
        if !(pivot > threshold) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let diag = pivot.sqrt();
        lower[j * p + j] = diag;
        for i in j + 1..p {
            let mut s = sigma[i * p + j];
            for k in 0..j {
                s -= lower[i * p + k] * lower[j * p + k];
            }
            lower[i * p + j] = s / diag;
        }
    }
    Ok(CovarianceFactor {
        dim: p,
        lower,
        sigma: sigma.to_vec(),
    })
}

impl CovarianceFactor {
    pub fn identity(p: usize) -> Result<Self> {
        let mut sigma = vec![0.0; p * p];
        for i in 0..p {
            sigma[i * p + i] = 1.0;
        }
        cholesky(&sigma, p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major lower-triangular factor `L` with `L Lᵀ = Σ`.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Smallest eigenvalue of `Σ⁻¹`, i.e. `1 / λ_max(Σ)`, by power iteration on `Σ`.
    pub fn gamma(&self) -> f64 {
        1.0 / largest_eigenvalue(&self.sigma, self.dim, 1e-10, 100_000)
    }

    /// Writes `L z` into `out`.
    pub fn apply(&self, z: &[f64], out: &mut [f64]) {
        let p = self.dim;
        for (i, o) in out.iter_mut().enumerate().take(p) {
            let row = &self.lower[i * p..i * p + i + 1];
            *o = row.iter().zip(z).map(|(l, z)| l * z).sum();
        }
    }
}

/// Power iteration on a symmetric positive semi-definite matrix.
pub(crate) fn largest_eigenvalue(m: &[f64], p: usize, tol: f64, max_iter: usize) -> f64 {
    let diagonal = (0..p).all(|i| (0..p).all(|j| i == j || m[i * p + j] == 0.0));
    if diagonal {
        return (0..p).map(|i| m[i * p + i]).fold(f64::NEG_INFINITY, f64::max);
    }
    // deterministic start with distinct entries
    let mut v: Vec<f64> = (0..p).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    normalize(&mut v);
    let mut w = vec![0.0; p];
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        for i in 0..p {
            w[i] = m[i * p..(i + 1) * p].iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let norm = normalize(&mut w);
        if norm == 0.0 {
            return 0.0;
        }
        std::mem::swap(&mut v, &mut w);
        if (next - lambda).abs() <= tol * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// `n` iid draws of `L z`, `z ~ N(0, I)`.
pub fn sample_mvn(stream: &mut RngStream, factor: &CovarianceFactor, n: usize) -> Result<SampleBatch> {
    let p = factor.dim;
    check_shape(p, n)?;
    let mut points = vec![0.0; n * p];
    let mut z = vec![0.0; p];
    for row in points.chunks_exact_mut(p) {
        stream.fill_standard_normal(&mut z);
        factor.apply(&z, row);
    }
    Ok(SampleBatch {
        dim: p,
        count: n,
        points,
        sampler_id: SamplerId::MultivariateNormal,
        seed: stream.seed,
    })
}

/// Number of successes in `k` Bernoulli(`prob`) trials.
pub fn sample_binomial(stream: &mut RngStream, k: u64, prob: f64) -> Result<u64> {
    if k == 0 {
        return Err(domain("k", "at least one trial is required"));
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(domain("prob", format!("must lie in [0, 1], got {prob}")));
    }
    Ok((0..k).filter(|_| stream.uniform() < prob).count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(seed: u64, idx: u64) -> Vec<u64> {
        let mut s = make_stream(seed, idx);
        (0..1000).map(|_| s.next_u64()).collect()
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        assert_eq!(draws(42, 0), draws(42, 0));
        assert_ne!(draws(42, 0), draws(42, 1));
        assert_ne!(draws(42, 0), draws(43, 0));
    }

    #[test]
    fn unit_cube_shape_and_support() {
        let b = sample_unit_cube(&mut make_stream(1, 0), 3, 5).unwrap();
        assert_eq!((b.count(), b.dim()), (5, 3));
        assert_eq!(b.points().len(), 15);
        assert!(b.points().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(b.sampler_id(), SamplerId::UnitCube);
    }

    #[test]
    fn rejects_empty_shapes() {
        assert!(sample_unit_cube(&mut make_stream(1, 0), 0, 5).is_err());
        assert!(sample_unit_cube(&mut make_stream(1, 0), 2, 0).is_err());
        assert!(sample_symmetric_cube(&mut make_stream(1, 0), 0, 1).is_err());
    }

    #[test]
    fn unit_cube_mean() {
        let b = sample_unit_cube(&mut make_stream(5, 0), 1, 100_000).unwrap();
        let mean = b.points().iter().sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.01);
    }

    #[test]
    fn unit_cube_coordinates_uncorrelated() {
        let n = 100_000;
        let b = sample_unit_cube(&mut make_stream(6, 0), 2, n).unwrap();
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for r in b.rows() {
            sx += r[0];
            sy += r[1];
            sxx += r[0] * r[0];
            syy += r[1] * r[1];
            sxy += r[0] * r[1];
        }
        let nf = n as f64;
        let cov = sxy / nf - sx * sy / nf / nf;
        let vx = sxx / nf - (sx / nf).powi(2);
        let vy = syy / nf - (sy / nf).powi(2);
        let rho = cov / (vx * vy).sqrt();
        // 3/√n ≈ 0.0095 is the independence band
        assert!(rho.abs() < 3.0 / nf.sqrt(), "rho={rho}");
        assert!(rho.abs() < 0.02);
    }

    #[test]
    fn symmetric_cube_is_affine_image_of_unit_cube() {
        let u = sample_unit_cube(&mut make_stream(9, 3), 4, 50).unwrap();
        let s = sample_symmetric_cube(&mut make_stream(9, 3), 4, 50).unwrap();
        for (a, b) in u.points().iter().zip(s.points()) {
            assert_eq!(2.0 * a - 1.0, *b);
        }
        assert!(s.points().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn symmetric_cube_mean() {
        let b = sample_symmetric_cube(&mut make_stream(10, 0), 1, 100_000).unwrap();
        let mean = b.points().iter().sum::<f64>() / 1e5;
        assert!(mean.abs() < 0.02);
    }

    #[test]
    fn cholesky_identity() {
        let f = CovarianceFactor::identity(3).unwrap();
        assert_eq!(f.lower(), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((f.gamma() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cholesky_two_by_two() {
        let f = cholesky(&[4.0, 2.0, 2.0, 3.0], 2).unwrap();
        let l = f.lower();
        assert!((l[0] - 2.0).abs() < 1e-15);
        assert_eq!(l[1], 0.0);
        assert!((l[2] - 1.0).abs() < 1e-15);
        assert!((l[3] - 2f64.sqrt()).abs() < 1e-15);
        // L Lᵀ reproduces the input
        let rebuilt = [
            l[0] * l[0],
            l[0] * l[2],
            l[2] * l[0],
            l[2] * l[2] + l[3] * l[3],
        ];
        for (a, b) in rebuilt.iter().zip([4.0, 2.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        // eigenvalues of [[4,2],[2,3]] are (7 ± √17)/2
        let lmax = (7.0 + 17f64.sqrt()) / 2.0;
        assert!((f.gamma() - 1.0 / lmax).abs() < 1e-9);
    }

    #[test]
    fn cholesky_rejects_indefinite_and_singular() {
        assert!(matches!(
            cholesky(&[1.0, 2.0, 2.0, 1.0], 2),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            cholesky(&[1.0, 1.0, 1.0, 1.0], 2),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            cholesky(&[1.0, 0.5, 0.0, 1.0], 2),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn mvn_identity_variance() {
        let f = CovarianceFactor::identity(2).unwrap();
        let b = sample_mvn(&mut make_stream(11, 0), &f, 100_000).unwrap();
        for c in 0..2 {
            let xs: Vec<f64> = b.rows().map(|r| r[c]).collect();
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            assert!((0.97..=1.03).contains(&v), "coordinate {c} variance {v}");
        }
    }

    #[test]
    fn mvn_scaled_variance() {
        let f = cholesky(&[4.0, 0.0, 0.0, 1.0], 2).unwrap();
        let b = sample_mvn(&mut make_stream(12, 0), &f, 100_000).unwrap();
        let xs: Vec<f64> = b.rows().map(|r| r[0]).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((v / 4.0 - 1.0).abs() < 0.05, "variance {v}");
        assert!((f.gamma() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn mvn_single_row() {
        let f = cholesky(&[2.0, 0.3, 0.3, 1.0], 2).unwrap();
        let b = sample_mvn(&mut make_stream(13, 0), &f, 1).unwrap();
        assert_eq!(b.count(), 1);
        assert!(b.row(0).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn binomial_edges_and_mean() {
        let mut s = make_stream(14, 0);
        assert_eq!(sample_binomial(&mut s, 10, 0.0).unwrap(), 0);
        assert_eq!(sample_binomial(&mut s, 10, 1.0).unwrap(), 10);
        assert!(sample_binomial(&mut s, 10, 1.2).is_err());
        assert!(sample_binomial(&mut s, 10, -0.1).is_err());
        let total: u64 = (0..10_000)
            .map(|_| sample_binomial(&mut s, 100, 0.3).unwrap())
            .sum();
        let mean = total as f64 / 1e4;
        assert!((29.5..=30.5).contains(&mean), "mean {mean}");
    }

    #[test]
    fn chunked_batches_match_single_batch_in_distribution() {
        // 8 chunks of 12_500 vs one batch of 100_000; compare means at 4σ
        let mut chunked = Vec::new();
        for k in 0..8 {
            let b = sample_unit_cube(&mut make_stream(77, k), 1, 12_500).unwrap();
            chunked.extend_from_slice(b.points());
        }
        let single = sample_unit_cube(&mut make_stream(78, 0), 1, 100_000).unwrap();
        let m1 = chunked.iter().sum::<f64>() / 1e5;
        let m2 = single.points().iter().sum::<f64>() / 1e5;
        let se = (2.0 / 12.0 / 1e5_f64).sqrt();
        assert!((m1 - m2).abs() < 4.0 * se);
    }
}
