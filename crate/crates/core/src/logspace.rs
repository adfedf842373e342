//! Log-space arithmetic.

use crate::error::{Error, Result};

/// `ln Σ exp(v_i)`, shifted by the maximum so large magnitudes don't
/// overflow. All `-inf` input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(log_sum_exp_unchecked(values))
}

#[inline]
pub(crate) fn log_sum_exp_unchecked(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Replaces `scores` with their log-softmax.
pub(crate) fn log_softmax_in_place(scores: &mut [f64]) {
    let lse = log_sum_exp_unchecked(scores);
    for s in scores.iter_mut() {
        *s -= lse;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(log_sum_exp(&[0.0]).unwrap(), 0.0);
        let half = 0.5f64.ln();
        assert!(log_sum_exp(&[half, half]).unwrap().abs() < 1e-15);
        // max-shift by hand: -1000 + ln(e^0 + e^0)
        let v = log_sum_exp(&[-1000.0, -1000.0]).unwrap();
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((v - -999.3069).abs() < 1e-4);
    }

    #[test]
    fn edge_cases() {
        assert!(matches!(log_sum_exp(&[]), Err(Error::EmptyInput)));
        let ninf = f64::NEG_INFINITY;
        assert_eq!(log_sum_exp(&[ninf, ninf]).unwrap(), ninf);
        assert_eq!(log_sum_exp(&[ninf, 0.0]).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn bounded_by_max(v in prop::collection::vec(-500.0f64..500.0, 1..40)) {
            let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let l = log_sum_exp(&v).unwrap();
            prop_assert!(l >= m - 1e-12);
            prop_assert!(l <= m + (v.len() as f64).ln() + 1e-12);
        }

        #[test]
        fn permutation_invariant(v in prop::collection::vec(-50.0f64..50.0, 1..30), seed in any::<u64>()) {
            let mut w = v.clone();
            // deterministic shuffle keyed by `seed`
            let n = w.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                w.swap(i, j);
            }
            let a = log_sum_exp(&v).unwrap();
            let b = log_sum_exp(&w).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
