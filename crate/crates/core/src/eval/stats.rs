use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
}

fn domain(msg: impl Into<String>) -> StatsError {
    StatsError::Domain(msg.into())
}

/// Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval {
    pub low: f64,
    pub high: f64,
    /// Half the unclamped width.
    pub half_width: f64,
}

pub const Z_95: f64 = 1.96;

pub fn wilson_interval(wins: u64, games: u64, z: f64) -> Result<WilsonInterval, StatsError> {
    if games == 0 {
        return Err(domain("no games"));
    }
    if wins > games {
        return Err(domain(format!("{wins} wins out of {games} games")));
    }
    if !(z.is_finite() && z > 0.0) {
        return Err(domain("z must be positive"));
    }
    let n = games as f64;
    let p = wins as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half_width = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The bounds touch 0 and 1 exactly at p̂ = 0 and p̂ = 1; pin them
    // there instead of trusting rounding.
    let low = if wins == 0 { 0.0 } else { (centre - half_width).clamp(0.0, p) };
    let high = if wins == games { 1.0 } else { (centre + half_width).clamp(p, 1.0) };
    Ok(WilsonInterval {
        low,
        high,
        half_width,
    })
}

pub fn mean(xs: &[f64]) -> Result<f64, StatsError> {
    if xs.is_empty() {
        return Err(domain("empty sample"));
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation (divisor `n − 1`).
pub fn sample_std(xs: &[f64]) -> Result<f64, StatsError> {
    if xs.len() < 2 {
        return Err(domain("need at least two values"));
    }
    let m = mean(xs)?;
    Ok((xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

/// One-sample t statistic against `mu0`, with its degrees of freedom.
pub fn one_sample_t(xs: &[f64], mu0: f64) -> Result<(f64, usize), StatsError> {
    let s = sample_std(xs)?;
    if s == 0.0 {
        return Err(domain("zero variance"));
    }
    let n = xs.len() as f64;
    Ok(((mean(xs)? - mu0) / (s / n.sqrt()), xs.len() - 1))
}

/// Sample Pearson correlation coefficient.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(domain("samples differ in length"));
    }
    if x.len() < 2 {
        return Err(domain("need at least two pairs"));
    }
    let (mx, my) = (mean(x)?, mean(y)?);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(domain("zero variance"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_boundaries() {
        let w = wilson_interval(0, 10, Z_95).unwrap();
        assert_eq!(w.low, 0.0);
        let w = wilson_interval(10, 10, Z_95).unwrap();
        assert_eq!(w.high, 1.0);
        assert!(wilson_interval(11, 10, Z_95).is_err());
        assert!(wilson_interval(0, 0, Z_95).is_err());
    }

    #[test]
    fn wilson_contains_estimate() {
        for games in [1u64, 7, 100, 500] {
            for wins in 0..=games {
                let w = wilson_interval(wins, games, Z_95).unwrap();
                let p = wins as f64 / games as f64;
                assert!(w.low <= p && p <= w.high && w.low >= 0.0 && w.high <= 1.0);
            }
        }
    }

    #[test]
    fn wilson_half_widths() {
        // Hand evaluation at (50, 100): sqrt(0.0025 + 0.00009604) * 1.96 / 1.038416.
        let hand = 1.96 * (0.25f64 / 100.0 + 1.96 * 1.96 / 40_000.0).sqrt() / (1.0 + 1.96 * 1.96 / 100.0);
        let w = wilson_interval(50, 100, Z_95).unwrap();
        assert!((w.half_width - hand).abs() < 1e-12);
        assert!((w.half_width - 0.0962).abs() < 0.0005);
        assert!((wilson_interval(396, 500, Z_95).unwrap().half_width - 0.0357).abs() < 0.0005);
    }

    #[test]
    fn t_and_r_trivia() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson_r(&xs, &xs).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson_r(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
        let noisy = [5.0 - 1e-3, 5.0 + 1e-3, 5.0 - 2e-3, 5.0 + 2e-3];
        assert!(one_sample_t(&noisy, 5.0).unwrap().0.abs() < 1e-9);
        assert!(one_sample_t(&[3.0, 3.0], 1.0).is_err());
        assert!(one_sample_t(&[3.0], 1.0).is_err());
        assert!(pearson_r(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
