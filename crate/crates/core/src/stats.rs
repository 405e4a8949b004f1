//! Binomial proportion estimates with Wilson score intervals.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::Seed;

/// How each trial was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ExactSolver,
    GtProcedure,
    /// Probability 1 known without sampling (`k > 2ρ(G)`).
    Certified,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactSolver => "exact-solver",
            Method::GtProcedure => "gt-procedure",
            Method::Certified => "certified",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "exact-solver" | "exact" => Some(Method::ExactSolver),
            "gt-procedure" | "gt" => Some(Method::GtProcedure),
            "certified" => Some(Method::Certified),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub seed: Seed,
    pub method: Method,
}

impl Estimate {
    pub fn new(successes: u64, trials: u64, level: f64, seed: Seed, method: Method) -> Result<Self> {
        if trials == 0 || successes > trials {
            return Err(Error::invalid(format!(
                "need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}"
            )));
        }
        let (ci_low, ci_high) = wilson_interval(successes, trials, level)?;
        Ok(Estimate {
            successes,
            trials,
            point: successes as f64 / trials as f64,
            ci_low,
            ci_high,
            level,
            seed,
            method,
        })
    }

    /// Estimate of a probability known to be exactly 1.
    pub fn certified(trials: u64, level: f64, seed: Seed) -> Result<Self> {
        check_level(level)?;
        Ok(Estimate {
            successes: trials,
            trials,
            point: 1.0,
            ci_low: 1.0,
            ci_high: 1.0,
            level,
            seed,
            method: Method::Certified,
        })
    }

    /// Largest distance from the point estimate to an interval end.
    pub fn half_width(&self) -> f64 {
        (self.point - self.ci_low).max(self.ci_high - self.point)
    }

    /// Same counts, interval recomputed at another level.
    pub fn at_level(&self, level: f64) -> Result<Self> {
        if self.method == Method::Certified {
            return Estimate::certified(self.trials, level, self.seed);
        }
        Estimate::new(self.successes, self.trials, level, self.seed, self.method)
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("confidence level {level} not in (0,1)")));
    }
    Ok(())
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn z_for_level(level: f64) -> Result<f64> {
    check_level(level)?;
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - (1.0 - level) / 2.0))
}

/// Wilson score interval for `successes` out of `trials`, clamped to [0, 1].
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let z = z_for_level(level)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let margin = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = (center - margin).clamp(0.0, p);
    let hi = (center + margin).clamp(p, 1.0);
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_five_of_ten() {
        let (lo, hi) = wilson_interval(5, 10, 0.95).unwrap();
        assert!((lo - 0.2366).abs() < 5e-4, "{lo}");
        assert!((hi - 0.7634).abs() < 5e-4, "{hi}");
    }

    #[test]
    fn wilson_extremes_stay_in_unit_interval() {
        let (lo, hi) = wilson_interval(0, 50, 0.99).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.2);
        let (lo, hi) = wilson_interval(50, 50, 0.99).unwrap();
        assert_eq!(hi, 1.0);
        assert!(lo > 0.8 && lo < 1.0);
    }

    #[test]
    fn z_values() {
        assert!((z_for_level(0.95).unwrap() - 1.959963984540054).abs() < 1e-9);
        assert!((z_for_level(0.999).unwrap() - 3.2905267314919).abs() < 1e-9);
        assert!(z_for_level(1.0).is_err());
        assert!(z_for_level(0.0).is_err());
    }

    #[test]
    fn estimate_validation() {
        assert!(Estimate::new(1, 0, 0.95, Seed(0), Method::ExactSolver).is_err());
        assert!(Estimate::new(3, 2, 0.95, Seed(0), Method::ExactSolver).is_err());
        let e = Estimate::new(7, 20, 0.95, Seed(0), Method::GtProcedure).unwrap();
        assert!(e.ci_low <= e.point && e.point <= e.ci_high);
    }
}
