//! One-dimensional maximization on a bounded interval.
//!
//! Both searches assume a unimodal objective and count every objective
//! evaluation. The golden-section search keeps one interior point from
//! the previous step, so each iteration costs a single evaluation; the
//! two-point shrinking search evaluates the trisection points afresh
//! every iteration.

use crate::math::ln;

/// Best point found and the number of objective evaluations spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieceMaximum {
    pub t: f64,
    pub value: f64,
    pub evaluations: usize,
}

impl PieceMaximum {
    fn better(self, other: PieceMaximum) -> PieceMaximum {
        let evaluations = self.evaluations + other.evaluations;
        let best = if other.value > self.value { other } else { self };
        PieceMaximum { evaluations, ..best }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Evaluation bound of [`golden_section_max`]: `log(w/eps)/log(1.618) + 2`.
pub fn golden_section_bound(width: f64, epsilon: f64) -> f64 {
    ln(width / epsilon) / ln(1.618) + 2.0
}

/// Evaluation bound of [`two_point_max`]: `2 log(w/eps)/log(3/2)`.
pub fn two_point_bound(width: f64, epsilon: f64) -> f64 {
    2.0 * ln(width / epsilon) / ln(1.5)
}

/// Golden-section search on `[a, b]`, stopping once the bracket is at most
/// `epsilon` wide. Intervals narrower than `epsilon` return the midpoint.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, epsilon: f64) -> PieceMaximum {
    let (mut a, mut b) = (a, b);
    if b - a <= epsilon {
        let t = 0.5 * (a + b);
        return PieceMaximum { t, value: f(t), evaluations: 1 };
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    // After k evaluations the bracket is (b - a) * 0.618^(k - 1) wide.
    while b - a > epsilon {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            if b - a <= epsilon {
                break;
            }
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            if b - a <= epsilon {
                break;
            }
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
        evaluations += 1;
    }
    let (t, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    PieceMaximum { t, value, evaluations }
}

/// Two-point shrinking search: evaluate the trisection points `c < d`;
/// if `f(c) < f(d)` the maximizer lies in `(c, b)`, otherwise in `(a, d)`.
/// Stops when the bracket is at most `2 * epsilon` wide and returns its
/// midpoint, which is then within `epsilon` of the maximizer.
pub fn two_point_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, epsilon: f64) -> PieceMaximum {
    let (mut a, mut b) = (a, b);
    let mut evaluations = 0;
    while b - a > 2.0 * epsilon {
        let w = b - a;
        let c = a + w / 3.0;
        let d = a + 2.0 * w / 3.0;
        if f(c) < f(d) {
            a = c;
        } else {
            b = d;
        }
        evaluations += 2;
    }
    let t = 0.5 * (a + b);
    PieceMaximum { t, value: f(t), evaluations: evaluations + 1 }
}

/// Larger of the two endpoint values, for objectives that are convex on
/// the interval.
pub fn endpoint_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> PieceMaximum {
    let left = PieceMaximum { t: a, value: f(a), evaluations: 1 };
    let right = PieceMaximum { t: b, value: f(b), evaluations: 1 };
    // On ties keep the earlier time.
    left.better(right)
}

/// Combine two results, summing their evaluation counts.
pub fn best_of(a: PieceMaximum, b: PieceMaximum) -> PieceMaximum {
    a.better(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;
    use crate::rng::{open_unit, stream};

    #[test]
    fn golden_finds_parabola_peak() {
        let r = golden_section_max(|t| -(t - 1.0) * (t - 1.0), 0.0, 3.0, 1e-3);
        assert!((r.t - 1.0).abs() <= 1e-3);
        assert!(r.evaluations as f64 <= golden_section_bound(3.0, 1e-3));
    }

    #[test]
    fn two_point_finds_parabola_peak() {
        let r = two_point_max(|t| -(t - 1.0) * (t - 1.0), 0.0, 3.0, 1e-3);
        assert!((r.t - 1.0).abs() <= 1e-3);
        assert!(r.evaluations as f64 <= two_point_bound(3.0, 1e-3));
    }

    #[test]
    fn endpoints_of_convex_exponential_sum() {
        let f = |t: f64| exp(t) + exp(-t);
        let r = endpoint_max(f, -1.0, 2.0);
        assert_eq!(r.t, 2.0);
        assert!((r.value - (exp(2.0) + exp(-2.0))).abs() < 1e-12);
    }

    #[test]
    fn degenerate_interval_returns_midpoint() {
        let r = golden_section_max(|t| t, 1.0, 1.0 + 1e-9, 1e-6);
        assert_eq!(r.evaluations, 1);
        assert!((r.t - (1.0 + 5e-10)).abs() < 1e-15);
    }

    #[test]
    fn evaluation_counts_within_bounds() {
        let mut rng = stream(21, &[]);
        for _ in 0..100 {
            let a = -10.0 + 20.0 * open_unit(&mut rng);
            let w = 1e-2 + 50.0 * open_unit(&mut rng);
            let eps = w * libm::pow(10.0, -1.0 - 8.0 * open_unit(&mut rng)) / 2.0;
            let peak = a + w * open_unit(&mut rng);
            let f = |t: f64| -libm::fabs(t - peak);
            let g = golden_section_max(f, a, a + w, eps);
            assert!(g.evaluations as f64 <= golden_section_bound(w, eps), "{w} {eps}");
            assert!((g.t - peak).abs() <= eps);
            let p = two_point_max(f, a, a + w, eps);
            assert!(p.evaluations as f64 <= two_point_bound(w, eps), "{w} {eps}");
            assert!((p.t - peak).abs() <= eps);
        }
    }
}
