//! Sample statistics for campaign aggregation and the acceptance checks.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Mean of a set of per-drop samples with its confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// `None` when fewer than two samples exist.
    pub half_width: Option<f64>,
    pub samples: usize,
}

impl Estimate {
    pub fn zero() -> Self {
        Estimate {
            mean: 0.0,
            half_width: None,
            samples: 0,
        }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width.unwrap_or(0.0)
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width.unwrap_or(0.0)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Two-sided Student-t quantile `t_{1 - (1 - level)/2, dof}`.
pub fn t_quantile(level: f64, dof: usize) -> f64 {
    let t = StudentsT::new(0.0, 1.0, dof as f64).expect("positive degrees of freedom");
    t.inverse_cdf(1.0 - (1.0 - level) / 2.0)
}

/// Mean and `t * s / sqrt(n)` half-width at confidence `level`.
pub fn confidence_interval(xs: &[f64], level: f64) -> Estimate {
    match xs.len() {
        0 => Estimate::zero(),
        1 => Estimate {
            mean: xs[0],
            half_width: None,
            samples: 1,
        },
        n => Estimate {
            mean: mean(xs),
            half_width: Some(t_quantile(level, n - 1) * sample_std(xs) / (n as f64).sqrt()),
            samples: n,
        },
    }
}

/// Paired t-test on `a[i] - b[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    pub mean_difference: f64,
    pub t_statistic: f64,
    /// P(T >= t) under H0: mean difference is zero.
    pub p_greater: f64,
    pub p_two_sided: f64,
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> PairedTest {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    assert!(a.len() >= 2, "paired test needs at least two pairs");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let m = mean(&d);
    let s = sample_std(&d);
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("positive degrees of freedom");
    let (t, p_greater, p_two_sided) = if s == 0.0 {
        // Every difference identical: either exactly null or infinitely significant.
        if m == 0.0 {
            (0.0, 0.5, 1.0)
        } else {
            let t = m.signum() * f64::INFINITY;
            (t, if m > 0.0 { 0.0 } else { 1.0 }, 0.0)
        }
    } else {
        let t = m / (s / n.sqrt());
        (t, 1.0 - dist.cdf(t), 2.0 * (1.0 - dist.cdf(t.abs())))
    };
    PairedTest {
        mean_difference: m,
        t_statistic: t,
        p_greater,
        p_two_sided,
    }
}

/// Welch's unequal-variance two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t_statistic: f64,
    pub dof: f64,
    pub p_two_sided: f64,
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> WelchTest {
    assert!(a.len() >= 2 && b.len() >= 2, "each sample needs at least two values");
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_std(a).powi(2) / na, sample_std(b).powi(2) / nb);
    let diff = mean(a) - mean(b);
    if va + vb == 0.0 {
        let p = if diff == 0.0 { 1.0 } else { 0.0 };
        return WelchTest {
            t_statistic: if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY },
            dof: na + nb - 2.0,
            p_two_sided: p,
        };
    }
    let t = diff / (va + vb).sqrt();
    let dof = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
    WelchTest {
        t_statistic: t,
        dof,
        p_two_sided: 2.0 * (1.0 - dist.cdf(t.abs())),
    }
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 && sxx > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}
