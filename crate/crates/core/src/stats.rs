//! Order statistics, distribution distances, and small fitting helpers used
//! across the experiment drivers.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Linear-interpolation quantile (the "type 7" convention) of unsorted data.
pub fn quantile<T: Scalar>(samples: &[T], q: f64) -> T {
    let mut sorted: Vec<T> = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, q)
}

pub fn quantile_sorted<T: Scalar>(sorted: &[T], q: f64) -> T {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&q));
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = T::of(h - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn median<T: Scalar>(samples: &[T]) -> T {
    quantile(samples, 0.5)
}

/// Interquartile range. The width measure of choice here: finite for every
/// stable law, unlike the variance.
pub fn iqr<T: Scalar>(samples: &[T]) -> T {
    let mut sorted: Vec<T> = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)
}

pub fn mean<T: Scalar>(samples: &[T]) -> T {
    let mut acc = T::zero();
    for &s in samples {
        acc = acc + s;
    }
    acc / T::of(samples.len() as f64)
}

pub fn variance<T: Scalar>(samples: &[T]) -> T {
    let m = mean(samples);
    let mut acc = T::zero();
    for &s in samples {
        let d = s - m;
        acc = acc + d * d;
    }
    acc / T::of(samples.len() as f64)
}

/// Sample excess kurtosis, `m4 / m2^2 - 3`.
pub fn excess_kurtosis<T: Scalar>(samples: &[T]) -> T {
    let m = mean(samples);
    let mut m2 = T::zero();
    let mut m4 = T::zero();
    for &s in samples {
        let d = s - m;
        let d2 = d * d;
        m2 = m2 + d2;
        m4 = m4 + d2 * d2;
    }
    let n = T::of(samples.len() as f64);
    m2 = m2 / n;
    m4 = m4 / n;
    m4 / (m2 * m2) - T::of(3.0)
}

/// Kolmogorov-Smirnov distance between an empirical sample and a reference
/// CDF given as a callable.
pub fn ks_statistic<T: Scalar, F: Fn(T) -> T>(samples: &[T], cdf: F) -> T {
    let mut sorted: Vec<T> = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut worst = T::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = T::of(i as f64 / n);
        let hi = T::of((i + 1) as f64 / n);
        worst = worst.max((f - lo).abs()).max((hi - f).abs());
    }
    worst
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut sa: Vec<T> = a.to_vec();
    let mut sb: Vec<T> = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst = T::zero();
    while i < sa.len() && j < sb.len() {
        if sa[i] <= sb[j] {
            i += 1;
        } else {
            j += 1;
        }
        let d = (T::of(i as f64 / na) - T::of(j as f64 / nb)).abs();
        worst = worst.max(d);
    }
    worst
}

/// Ordinary least squares fit `y = intercept + slope * x`.
pub fn linear_fit<T: Scalar>(x: &[T], y: &[T]) -> Result<(T, T)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::FitFailure(format!(
            "need >= 2 paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&xi, &yi) in x.iter().zip(y.iter()) {
        sxx = sxx + (xi - mx) * (xi - mx);
        sxy = sxy + (xi - mx) * (yi - my);
    }
    if sxx == T::zero() {
        return Err(Error::FitFailure("degenerate abscissa".into()));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

/// Slope of `log y` against `log x`; every y must be positive.
pub fn loglog_slope<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let mut ly = Vec::with_capacity(y.len());
    for &v in y {
        if !(v > T::zero()) {
            return Err(Error::FitFailure(format!(
                "log-log fit needs positive ordinates, got {}",
                v.to64()
            )));
        }
        ly.push(v.ln());
    }
    linear_fit(&lx, &ly).map(|(_, m)| m)
}

/// Percentile bootstrap of an arbitrary statistic.
///
/// Returns `(lo, hi)` at the requested confidence level plus the bootstrap
/// standard error.
pub fn bootstrap<T, R, F>(
    samples: &[T],
    resamples: usize,
    confidence: f64,
    rng: &mut R,
    stat: F,
) -> (T, T, T)
where
    T: Scalar,
    R: Rng + ?Sized,
    F: Fn(&[T]) -> T,
{
    let n = samples.len();
    let mut vals = Vec::with_capacity(resamples);
    let mut buf = vec![T::zero(); n];
    for _ in 0..resamples {
        for slot in buf.iter_mut() {
            *slot = samples[rng.random_range(0..n)];
        }
        vals.push(stat(&buf));
    }
    let se = variance(&vals).sqrt();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tail = (1.0 - confidence) / 2.0;
    (
        quantile_sorted(&vals, tail),
        quantile_sorted(&vals, 1.0 - tail),
        se,
    )
}

/// Error function via the Chebyshev-fitted complementary form (fractional
/// error below 1.2e-7 everywhere), adequate for CDF comparisons here.
pub fn erf<T: Scalar>(x: T) -> T {
    T::one() - erfc(x)
}

pub fn erfc<T: Scalar>(x: T) -> T {
    let z = x.abs();
    let t = T::one() / (T::one() + z * T::of(0.5));
    let poly = T::of(-1.26551223)
        + t * (T::of(1.00002368)
            + t * (T::of(0.37409196)
                + t * (T::of(0.09678418)
                    + t * (T::of(-0.18628806)
                        + t * (T::of(0.27886807)
                            + t * (T::of(-1.13520398)
                                + t * (T::of(1.48851587)
                                    + t * (T::of(-0.82215223) + t * T::of(0.17087277)))))))));
    let ans = t * (-z * z + poly).exp();
    if x >= T::zero() {
        ans
    } else {
        T::of(2.0) - ans
    }
}

/// Standard normal CDF.
pub fn normal_cdf<T: Scalar>(x: T, mean: T, sd: T) -> T {
    let z = (x - mean) / (sd * T::SQRT_2());
    T::of(0.5) * (T::one() + erf(z))
}

/// Gamma function by the Lanczos approximation (g = 7, n = 9), accurate to
/// ~1e-13 relative over the arguments used here.
pub fn gamma_fn(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_fn(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = G[0];
        let t = x + 7.5;
        for (i, &g) in G.iter().enumerate().skip(1) {
            a += g / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantiles_match_hand_values() {
        let data = [1.0f64, 2.0, 3.0, 4.0];
        assert_eq!(median(&data), 2.5);
        assert!((quantile(&data, 0.25) - 1.75).abs() < 1e-12);
        assert!((iqr(&data) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ks_of_matching_distribution_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let d = ks_statistic(&samples, |x: f64| x.clamp(0.0, 1.0));
        assert!(d < 0.015, "uniform KS {d}");
    }

    #[test]
    fn loglog_recovers_power_law() {
        let x: Vec<f64> = (1..6).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(1.7)).collect();
        let slope = loglog_slope(&x, &y).unwrap();
        assert!((slope - 1.7).abs() < 1e-10);
    }

    #[test]
    fn erf_reference_points() {
        assert!((erf(0.0f64)).abs() < 2e-7);
        assert!((erf(1.0f64) - 0.8427007929).abs() < 2e-7);
        assert!((erf(-2.0f64) + 0.9953222650).abs() < 2e-7);
        assert!((erf(5.0f64) - 1.0).abs() < 2e-7);
    }

    #[test]
    fn gamma_reference_points() {
        assert!((gamma_fn(1.0) - 1.0).abs() < 1e-12);
        assert!((gamma_fn(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((gamma_fn(5.0) - 24.0).abs() < 1e-10);
        // Gamma(5/3), used for stable-density spot checks.
        assert!((gamma_fn(5.0 / 3.0) - 0.902_745_292_950_933_6).abs() < 1e-12);
    }

    #[test]
    fn kurtosis_of_gaussianish_data() {
        // a deterministic standard normal via inverse-CDF-ish construction is
        // overkill; uniform data has excess kurtosis -1.2 exactly.
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((excess_kurtosis(&samples) + 1.2).abs() < 1e-3);
    }
}
