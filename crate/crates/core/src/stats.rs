//! Statistics helpers: least-squares fits on log scale, KS distances, moments.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Straight-line least-squares fit `y ≈ intercept + slope·x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals.
    pub residual: f64,
    pub points: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sq: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Some(LinearFit { slope, intercept, residual: (sq / nf).sqrt(), points: n })
}

/// One row of an empirical tail table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub x: f64,
    pub probability: f64,
    /// Number of samples behind the estimate.
    pub hits: u64,
}

/// `P ≈ C·e^{−rate·x}` fitted on log-probabilities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub constant: f64,
    pub rate: f64,
    /// Per-unit ratio `e^{−rate}`.
    pub ratio: f64,
    pub residual: f64,
    pub points: usize,
    /// Inclusion rule applied to the table.
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("not enough tail mass: {usable} usable points, need {needed}")]
pub struct InsufficientTail {
    pub usable: usize,
    pub needed: usize,
}

/// Fewest points a tail fit accepts.
pub const MIN_TAIL_POINTS: usize = 5;
/// Bins with fewer hits than this are below the noise floor and skipped.
pub const MIN_TAIL_HITS: u64 = 20;

/// Fit a tail table, skipping bins with zero probability or fewer than
/// `min_hits` hits.
pub fn tail_fit(table: &[TailPoint], min_hits: u64) -> Result<TailFit, InsufficientTail> {
    let used: Vec<&TailPoint> = table.iter().filter(|p| p.probability > 0.0 && p.hits >= min_hits).collect();
    if used.len() < MIN_TAIL_POINTS {
        return Err(InsufficientTail { usable: used.len(), needed: MIN_TAIL_POINTS });
    }
    let xs: Vec<f64> = used.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.probability.ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or(InsufficientTail { usable: 0, needed: MIN_TAIL_POINTS })?;
    Ok(TailFit {
        constant: fit.intercept.exp(),
        rate: -fit.slope,
        ratio: fit.slope.exp(),
        residual: fit.residual,
        points: fit.points,
        rule: format!("bins with probability > 0 and at least {min_hits} hits"),
    })
}

/// Tail table of exact probabilities (every bin counts).
pub fn exact_tail(xs: &[f64], probabilities: &[f64]) -> Vec<TailPoint> {
    xs.iter()
        .zip(probabilities)
        .map(|(&x, &p)| TailPoint { x, probability: p, hits: u64::MAX })
        .collect()
}

/// `sup_x |F_n(x) − F(x)|` for a continuous reference cdf.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    ks_statistic_with(sample, &cdf, &cdf)
}

/// KS distance to a reference with atoms: `left(x)` is the limit `F(x⁻)`.
pub fn ks_statistic_with(sample: &[f64], cdf: impl Fn(f64) -> f64, left: impl Fn(f64) -> f64) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        d = d.max((upto - cdf(xs[i])).abs()).max((below - left(xs[i])).abs());
        i = j;
    }
    d
}

/// Empirical cdf of a sample, with its left limits.
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(sample: &[f64]) -> Self {
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        EmpiricalCdf { sorted }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").cdf(x)
}

/// Sample moments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Moments {
    pub fn of(sample: &[f64]) -> Self {
        let n = sample.len();
        let nf = n as f64;
        let mean = sample.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for x in sample {
            let d = x - mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        m2 /= nf;
        m3 /= nf;
        m4 /= nf;
        let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        let (skewness, excess_kurtosis) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0) } else { (0.0, 0.0) };
        Moments { count: n, mean, variance, skewness, excess_kurtosis }
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    /// Normal-approximation 95% interval for the mean.
    pub fn interval(&self) -> (f64, f64) {
        let h = 1.96 * self.standard_error();
        (self.mean - h, self.mean + h)
    }
}

/// Standard error of an empirical proportion.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Total-variation distance between two finitely supported laws.
pub fn total_variation<K: std::hash::Hash + Eq>(
    a: &std::collections::HashMap<K, f64>,
    b: &std::collections::HashMap<K, f64>,
) -> f64 {
    let mut s = 0.0;
    for (k, p) in a {
        s += (p - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, q) in b {
        if !a.contains_key(k) {
            s += q;
        }
    }
    s / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand::Rng;

    /// Box-Muller draws, independent of the code under test.
    fn normal_draws<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = 1.0 - rng.random::<f64>();
                let v: f64 = rng.random();
                (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
            })
            .collect()
    }

    #[test]
    fn geometric_tail_rate() {
        let xs: Vec<f64> = (0..12).map(f64::from).collect();
        let ps: Vec<f64> = xs.iter().map(|x| 0.5f64.powf(*x)).collect();
        let fit = tail_fit(&exact_tail(&xs, &ps), MIN_TAIL_HITS).unwrap();
        assert!((fit.rate - std::f64::consts::LN_2).abs() < 1e-6);
        assert!((fit.constant - 1.0).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn thin_tables_decline_to_fit() {
        let t: Vec<TailPoint> = (0..8).map(|i| TailPoint { x: i as f64, probability: 0.1, hits: 5 }).collect();
        assert!(tail_fit(&t, MIN_TAIL_HITS).is_err());
    }

    #[test]
    fn ks_against_own_empirical_cdf_is_zero() {
        let s = [3.0, 1.0, 2.0, 2.0, 5.0, 1.0];
        let e = EmpiricalCdf::new(&s);
        assert_eq!(ks_statistic_with(&s, |x| e.cdf(x), |x| e.left(x)), 0.0);
    }

    #[test]
    fn ks_of_normal_draws_is_small() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let xs = normal_draws(&mut rng, 10_000);
        // Kolmogorov: P[√n·D > 1.63] ≈ 0.01, so D ≤ 0.0163 with probability 0.99
        assert!(ks_statistic(&xs, normal_cdf) <= 0.02);
    }

    #[test]
    fn moments_of_small_sample() {
        let m = Moments::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-12);
        assert!(m.skewness.abs() < 1e-12);
    }
}
