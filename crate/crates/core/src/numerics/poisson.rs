use super::factorial::ln_factorial;
use crate::{Error, Result};

/// Terms below `exp(LOG_FLOOR)` are zero in double precision.
const LOG_FLOOR: f64 = -745.0;

fn check_mean(mean: f64) -> Result<()> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(Error::Domain(format!(
            "Poisson mean must be finite and >= 0, got {mean}"
        )));
    }
    Ok(())
}

fn check_tail_mass(tail_mass: f64) -> Result<()> {
    if !(tail_mass > 0.0 && tail_mass < 1.0) {
        return Err(Error::Domain(format!(
            "tail mass must lie in (0, 1), got {tail_mass}"
        )));
    }
    Ok(())
}

/// `ln(a + b)` given `ln a` and `ln b`; either may be `-inf`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[inline]
fn log_pmf_unchecked(n: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    n as f64 * mean.ln() - mean - ln_factorial(n)
}

/// `ln[e^(-mean) mean^n / n!]`. A zero mean is a point mass at `n = 0`, so
/// every other count gets `-inf`.
pub fn log_poisson_pmf(n: u64, mean: f64) -> Result<f64> {
    check_mean(mean)?;
    Ok(log_pmf_unchecked(n, mean))
}

/// Log-pmf values from 0 up to the point where the remaining upper tail is
/// below the smallest representable double.
struct LogPmfTable {
    log_pmf: Vec<f64>,
    /// `log_suffix[k] = ln P(X >= k)`, with one trailing `-inf`.
    log_suffix: Vec<f64>,
    /// `log_prefix[k] = ln P(X < k)`.
    log_prefix: Vec<f64>,
}

impl LogPmfTable {
    fn new(mean: f64) -> Self {
        let mut log_pmf = Vec::new();
        if mean == 0.0 {
            log_pmf.push(0.0);
        } else {
            let mut k = 0u64;
            loop {
                let lp = log_pmf_unchecked(k, mean);
                log_pmf.push(lp);
                let kf = k as f64;
                if kf > mean {
                    // Beyond the mode the terms fall at least geometrically
                    // with ratio mean / (k + 1).
                    let ratio = mean / (kf + 1.0);
                    if lp - (1.0 - ratio).ln() < LOG_FLOOR {
                        break;
                    }
                }
                k += 1;
            }
        }
        let len = log_pmf.len();
        let mut log_suffix = vec![f64::NEG_INFINITY; len + 1];
        for k in (0..len).rev() {
            log_suffix[k] = log_add_exp(log_suffix[k + 1], log_pmf[k]);
        }
        let mut log_prefix = vec![f64::NEG_INFINITY; len + 1];
        for k in 0..len {
            log_prefix[k + 1] = log_add_exp(log_prefix[k], log_pmf[k]);
        }
        Self {
            log_pmf,
            log_suffix,
            log_prefix,
        }
    }

    fn len(&self) -> usize {
        self.log_pmf.len()
    }

    /// `ln P(X > n)`.
    fn log_upper(&self, n: u64) -> f64 {
        let idx = n as usize + 1;
        if idx >= self.len() {
            f64::NEG_INFINITY
        } else {
            self.log_suffix[idx]
        }
    }

    /// `ln P(X < n)`.
    fn log_lower(&self, n: u64) -> f64 {
        let idx = (n as usize).min(self.len());
        self.log_prefix[idx]
    }

    fn upper_cutoff(&self, log_tail: f64) -> u64 {
        (0..self.len() as u64)
            .find(|&n| self.log_upper(n) < log_tail)
            .unwrap_or(self.len() as u64)
    }

    fn lower_cutoff(&self, log_tail: f64) -> u64 {
        let mut lo = 0u64;
        while (lo as usize) < self.len() && self.log_lower(lo + 1) < log_tail {
            lo += 1;
        }
        lo
    }
}

/// Smallest `N` with `P(X > N) < tail_mass` for `X ~ Poisson(mean)`.
pub fn poisson_tail_cutoff(mean: f64, tail_mass: f64) -> Result<u64> {
    check_mean(mean)?;
    check_tail_mass(tail_mass)?;
    if mean == 0.0 {
        return Ok(0);
    }
    Ok(LogPmfTable::new(mean).upper_cutoff(tail_mass.ln()))
}

/// Largest `L` with `P(X < L) < tail_mass`.
pub fn poisson_lower_cutoff(mean: f64, tail_mass: f64) -> Result<u64> {
    check_mean(mean)?;
    check_tail_mass(tail_mass)?;
    if mean == 0.0 {
        return Ok(0);
    }
    Ok(LogPmfTable::new(mean).lower_cutoff(tail_mass.ln()))
}

/// `P(X > n)`, summed from the small end so tiny tails keep full relative precision.
pub fn poisson_upper_tail(mean: f64, n: u64) -> Result<f64> {
    check_mean(mean)?;
    Ok(LogPmfTable::new(mean).log_upper(n).exp())
}

/// `P(X < n)`.
pub fn poisson_lower_tail(mean: f64, n: u64) -> Result<f64> {
    check_mean(mean)?;
    Ok(LogPmfTable::new(mean).log_lower(n).exp())
}

/// A contiguous range of counts `[lo, hi]` carrying all but a bounded amount of
/// Poisson mass, with the log-pmf cached across it.
#[derive(Debug, Clone)]
pub struct PoissonWindow {
    pub mean: f64,
    pub lo: u64,
    pub hi: u64,
    log_pmf: Vec<f64>,
    /// Probability mass below `lo` plus mass above `hi`.
    pub outside_mass: f64,
}

impl PoissonWindow {
    /// Window whose lower and upper tails are each below `tail_mass`.
    pub fn new(mean: f64, tail_mass: f64) -> Result<Self> {
        check_mean(mean)?;
        check_tail_mass(tail_mass)?;
        let table = LogPmfTable::new(mean);
        let log_tail = tail_mass.ln();
        let lo = table.lower_cutoff(log_tail);
        let hi = table.upper_cutoff(log_tail).max(lo);
        Ok(Self::from_table(mean, &table, lo, hi))
    }

    /// Window over an explicit range of counts.
    pub fn with_range(mean: f64, lo: u64, hi: u64) -> Result<Self> {
        check_mean(mean)?;
        if lo > hi {
            return Err(Error::Domain(format!("empty window [{lo}, {hi}]")));
        }
        Ok(Self::from_table(mean, &LogPmfTable::new(mean), lo, hi))
    }

    fn from_table(mean: f64, table: &LogPmfTable, lo: u64, hi: u64) -> Self {
        let log_pmf = (lo..=hi).map(|k| log_pmf_unchecked(k, mean)).collect();
        let outside_mass = table.log_lower(lo).exp() + table.log_upper(hi).exp();
        Self {
            mean,
            lo,
            hi,
            log_pmf,
            outside_mass,
        }
    }

    /// Log-pmf at `k`; `-inf` outside the window.
    pub fn log_pmf(&self, k: u64) -> f64 {
        if k < self.lo || k > self.hi {
            f64::NEG_INFINITY
        } else {
            self.log_pmf[(k - self.lo) as usize]
        }
    }

    pub fn log_pmf_slice(&self) -> &[f64] {
        &self.log_pmf
    }

    pub fn counts(&self) -> std::ops::RangeInclusive<u64> {
        self.lo..=self.hi
    }
}
