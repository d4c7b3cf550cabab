//! Scalar math through `libm` so results do not depend on the platform's
//! `std` float routines, plus log-space reductions.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Sum by recursive halving. The reduction order depends only on the
/// slice length, so results are reproducible however the terms were
/// produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `ln(sum(exp(x)))`, `-inf` for an empty slice or when every term is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + ln(shifted_exp_sum(values, max))
}

/// `ln(mean(exp(x)))` over all entries, counting `-inf` terms as zeros.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NEG_INFINITY;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    // Dividing before the log keeps identical terms exact.
    max + ln(shifted_exp_sum(values, max) / values.len() as f64)
}

fn shifted_exp_sum(values: &[f64], shift: f64) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().fold(0.0, |acc, &v| acc + exp(v - shift));
    }
    let mid = values.len() / 2;
    shifted_exp_sum(&values[..mid], shift) + shifted_exp_sum(&values[mid..], shift)
}

/// Kish effective sample size of log-weights.
pub fn effective_sample_size(log_weights: &[f64]) -> f64 {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for &w in log_weights {
        let v = exp(w - max);
        s1 += v;
        s2 += v * v;
    }
    s1 * s1 / s2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs = [-1.0, -2.0, -3.0];
        let direct = ln(exp(-1.0) + exp(-2.0) + exp(-3.0));
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_survives_underflow() {
        let xs = [-1000.0, -1000.0];
        assert!((log_sum_exp(&xs) - (-1000.0 + ln(2.0))).abs() < 1e-12);
    }

    #[test]
    fn all_negative_infinity() {
        let xs = [f64::NEG_INFINITY; 4];
        assert_eq!(log_sum_exp(&xs), f64::NEG_INFINITY);
        assert_eq!(log_mean_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_mean_exp_of_identical_terms_is_exact() {
        for n in [1usize, 10, 100, 1000] {
            let xs = alloc::vec![-3.25; n];
            assert_eq!(log_mean_exp(&xs), -3.25);
        }
    }

    #[test]
    fn pairwise_sum_small_and_large() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        let xs: alloc::vec::Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn ess_bounds() {
        assert!((effective_sample_size(&[0.0; 10]) - 10.0).abs() < 1e-12);
        let w = [0.0, f64::NEG_INFINITY, f64::NEG_INFINITY];
        assert!((effective_sample_size(&w) - 1.0).abs() < 1e-12);
    }
}
