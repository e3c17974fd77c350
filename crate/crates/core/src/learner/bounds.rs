//! Sample-size formulas.

use crate::error::{Error, Result};

fn check_probability(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {x}")));
    }
    Ok(())
}

fn to_count(x: f64, what: &str) -> Result<u64> {
    if !x.is_finite() || x > u64::MAX as f64 {
        return Err(Error::SizeBound(format!("{what} does not fit in u64")));
    }
    Ok(x as u64)
}

/// Hoeffding sample count for estimating a probability within `epsilon`
/// with confidence `1 - delta`: `⌈−ln(δ/2) / (2ε²)⌉`.
pub fn required_samples_c(epsilon: f64, delta: f64) -> Result<u64> {
    check_probability("epsilon", epsilon)?;
    check_probability("delta", delta)?;
    to_count((-(delta / 2.0).ln() / (2.0 * epsilon * epsilon)).ceil(), "sample count")
}

/// Visits after which a state-action pair counts as known:
/// `⌈−ln(δ'/2) / (2ε'²)⌉` with `ε' = ε/(NT)` and `δ' = δ/(NK)`.
pub fn known_threshold_k(n_states: usize, n_actions: usize, horizon: usize, epsilon: f64, delta: f64) -> Result<u64> {
    check_probability("epsilon", epsilon)?;
    check_probability("delta", delta)?;
    if n_states == 0 || n_actions == 0 || horizon == 0 {
        return Err(Error::InvalidParameter("N, K and T must be positive".into()));
    }
    let eps = epsilon / (n_states as f64 * horizon as f64);
    let del = delta / (n_states as f64 * n_actions as f64);
    to_count((-(del / 2.0).ln() / (2.0 * eps * eps)).ceil(), "known threshold")
}

/// Number of steps on which the learner's policy may fail to be near
/// optimal: `T⌈max(kNK/ε, (kNK − ln δ)/(2ε²))⌉`.
pub fn mistake_bound_c(k: u64, n_states: usize, n_actions: usize, horizon: usize, epsilon: f64, delta: f64) -> Result<u64> {
    check_probability("epsilon", epsilon)?;
    check_probability("delta", delta)?;
    if k == 0 || n_states == 0 || n_actions == 0 || horizon == 0 {
        return Err(Error::InvalidParameter("k, N, K and T must be positive".into()));
    }
    let knk = k as f64 * n_states as f64 * n_actions as f64;
    let inner = (knk / epsilon).max((knk - delta.ln()) / (2.0 * epsilon * epsilon)).ceil();
    to_count(horizon as f64 * inner, "mistake bound")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_count_examples() {
        assert_eq!(required_samples_c(0.05, 0.1).unwrap(), 600);
        assert_eq!(required_samples_c(0.5, 0.999).unwrap(), 2);
        assert!(required_samples_c(0.5, 1.0).is_err());
    }

    #[test]
    fn mistake_bound_example() {
        assert_eq!(mistake_bound_c(1, 1, 1, 1, 0.5, 0.5).unwrap(), 4);
    }

    #[test]
    fn known_threshold_magnitudes() {
        let grid = known_threshold_k(12, 4, 19, 1.0 / 20.0, 0.1).unwrap();
        assert!((grid as f64 - 7.14e7).abs() < 0.01e7, "{grid}");
        let chain = known_threshold_k(8, 2, 8, 1.0 / 60.0, 0.1).unwrap();
        assert!((chain as f64 - 4.25e7).abs() < 0.01e7, "{chain}");
    }
}
