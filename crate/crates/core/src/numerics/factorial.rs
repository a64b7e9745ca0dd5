use std::sync::OnceLock;

/// Size of the process-wide table behind [`ln_factorial`].
const SHARED_TABLE_LEN: usize = 20_001;

/// Cached `ln(n!)` for `0 <= n <= max`.
#[derive(Debug, Clone)]
pub struct LogFactorialTable {
    values: Vec<f64>,
}

impl LogFactorialTable {
    pub fn new(max: usize) -> Self {
        let mut values = Vec::with_capacity(max + 1);
        values.push(0.0);
        // Kahan-compensated running sum keeps the increments equal to ln(n)
        // up to the rounding of the stored values.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for n in 1..=max {
            let y = (n as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            values.push(sum);
        }
        Self { values }
    }

    pub fn max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

fn shared() -> &'static LogFactorialTable {
    static TABLE: OnceLock<LogFactorialTable> = OnceLock::new();
    TABLE.get_or_init(|| LogFactorialTable::new(SHARED_TABLE_LEN - 1))
}

/// `ln(n!)`, from the shared table when possible and Stirling's series beyond it.
pub fn ln_factorial(n: u64) -> f64 {
    let table = shared();
    if (n as usize) <= table.max() {
        return table.values[n as usize];
    }
    stirling_ln_factorial(n as f64)
}

fn stirling_ln_factorial(n: f64) -> f64 {
    // ln Γ(n+1) asymptotic series; at n > 2e4 the first correction terms
    // already reach full double precision.
    let x = n + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_starts_at_zero_and_increments_by_ln_n() {
        let table = LogFactorialTable::new(5000);
        assert_eq!(table.get(0), Some(0.0));
        assert_eq!(table.get(1), Some(0.0));
        for n in 1..=table.max() {
            let step = table.as_slice()[n] - table.as_slice()[n - 1];
            let scale = table.as_slice()[n].max(1.0);
            assert!(
                (step - (n as f64).ln()).abs() <= 1e-13 * scale,
                "n = {n}: step {step}"
            );
            assert!(step >= 0.0);
        }
    }

    #[test]
    fn small_values_match_direct_products() {
        let mut fact = 1.0f64;
        for n in 1..=20u64 {
            fact *= n as f64;
            assert!((ln_factorial(n) - fact.ln()).abs() < 1e-13 * fact.ln().max(1.0));
        }
    }

    #[test]
    fn stirling_branch_continues_the_table() {
        let n = (SHARED_TABLE_LEN - 1) as u64;
        let from_table = ln_factorial(n);
        let from_series = stirling_ln_factorial(n as f64);
        assert!((from_table - from_series).abs() < 1e-13 * from_table);
        let next = ln_factorial(n + 1);
        assert!((next - from_table - ((n + 1) as f64).ln()).abs() < 1e-13 * next);
    }

    #[test]
    fn out_of_range_lookup_is_none() {
        assert!(LogFactorialTable::new(3).get(4).is_none());
    }
}
