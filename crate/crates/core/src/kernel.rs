//! Weibull transmission-time kernels.
//!
//! A kernel with shape `k` and per-edge scale `alpha` has density
//! `k tau^(k-1) / alpha^k * exp(-(tau/alpha)^k)` on `tau >= 0` and zero for
//! negative delays. Shape 1 is the exponential kernel with rate `1/alpha`;
//! shape 2 is the Rayleigh kernel. Likelihood code works with
//! [`Kernel::log_survival`] and [`Kernel::hazard`]; the checked free
//! functions at the bottom validate their parameters.

use rand::RngCore;

use crate::error::{check_positive, Error, Result};
use crate::math::{exp, ln, powf};
use crate::rng::open_unit;

/// Global kernel shape shared by every edge of a network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    shape: f64,
}

impl Kernel {
    pub const EXPONENTIAL: Kernel = Kernel { shape: 1.0 };
    pub const RAYLEIGH: Kernel = Kernel { shape: 2.0 };

    pub fn new(shape: f64) -> Result<Self> {
        check_positive("kernel shape", shape)?;
        Ok(Kernel { shape })
    }

    #[inline]
    pub fn shape(&self) -> f64 {
        self.shape
    }

    #[inline]
    pub fn is_exponential(&self) -> bool {
        self.shape == 1.0
    }

    /// `ln S(tau)`; zero for `tau <= 0`.
    #[inline]
    pub fn log_survival(&self, tau: f64, alpha: f64) -> f64 {
        if tau <= 0.0 {
            0.0
        } else if self.is_exponential() {
            -tau / alpha
        } else {
            -powf(tau / alpha, self.shape)
        }
    }

    #[inline]
    pub fn survival(&self, tau: f64, alpha: f64) -> f64 {
        exp(self.log_survival(tau, alpha))
    }

    #[inline]
    pub fn cdf(&self, tau: f64, alpha: f64) -> f64 {
        if tau <= 0.0 {
            0.0
        } else {
            -libm::expm1(self.log_survival(tau, alpha))
        }
    }

    /// Instantaneous rate `f(tau) / S(tau) = k/alpha (tau/alpha)^(k-1)`.
    /// Defined for `tau >= 0`.
    #[inline]
    pub fn hazard(&self, tau: f64, alpha: f64) -> f64 {
        if self.is_exponential() {
            1.0 / alpha
        } else if tau == 0.0 {
            if self.shape < 1.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            self.shape / alpha * powf(tau / alpha, self.shape - 1.0)
        }
    }

    #[inline]
    pub fn log_hazard(&self, tau: f64, alpha: f64) -> f64 {
        if self.is_exponential() {
            -ln(alpha)
        } else {
            ln(self.hazard(tau, alpha))
        }
    }

    /// `ln f(tau)`, `-inf` for negative delays.
    #[inline]
    pub fn log_density(&self, tau: f64, alpha: f64) -> f64 {
        if tau < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.log_hazard(tau, alpha) + self.log_survival(tau, alpha)
        }
    }

    #[inline]
    pub fn density(&self, tau: f64, alpha: f64) -> f64 {
        if tau < 0.0 {
            0.0
        } else {
            self.hazard(tau, alpha) * self.survival(tau, alpha)
        }
    }

    /// Inverse-CDF transform of a uniform `u` in (0, 1).
    #[inline]
    pub fn quantile_of_survival(&self, u: f64, alpha: f64) -> f64 {
        let e = -ln(u);
        if self.is_exponential() {
            alpha * e
        } else {
            alpha * powf(e, 1.0 / self.shape)
        }
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, alpha: f64, rng: &mut R) -> f64 {
        self.quantile_of_survival(open_unit(rng), alpha)
    }
}

fn checked(alpha: f64, shape: f64) -> Result<Kernel> {
    check_positive("alpha", alpha)?;
    Kernel::new(shape)
}

pub fn density(tau: f64, alpha: f64, shape: f64) -> Result<f64> {
    Ok(checked(alpha, shape)?.density(tau, alpha))
}

pub fn survival(tau: f64, alpha: f64, shape: f64) -> Result<f64> {
    Ok(checked(alpha, shape)?.survival(tau, alpha))
}

pub fn hazard(tau: f64, alpha: f64, shape: f64) -> Result<f64> {
    let kernel = checked(alpha, shape)?;
    if tau < 0.0 {
        return Err(Error::InvalidParameter { name: "hazard delay", value: tau });
    }
    Ok(kernel.hazard(tau, alpha))
}

pub fn sample<R: RngCore + ?Sized>(alpha: f64, shape: f64, rng: &mut R) -> Result<f64> {
    Ok(checked(alpha, shape)?.sample(alpha, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use alloc::vec::Vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn density_examples() {
        assert!(close(density(1.0, 2.0, 1.0).unwrap(), 0.5 * exp(-0.5), 1e-15));
        assert!(close(density(1.0, 2.0, 1.0).unwrap(), 0.303265, 1e-6));
        assert_eq!(density(-1.0, 3.0, 1.7).unwrap(), 0.0);
        assert!(close(density(1.0, 1.0, 2.0).unwrap(), 2.0 * exp(-1.0), 1e-15));
        assert!(close(density(1.0, 1.0, 2.0).unwrap(), 0.735759, 1e-6));
    }

    #[test]
    fn survival_examples() {
        assert_eq!(survival(0.0, 4.0, 2.0).unwrap(), 1.0);
        assert_eq!(survival(-3.0, 4.0, 2.0).unwrap(), 1.0);
        assert!(close(survival(3.0, 3.0, 1.0).unwrap(), 0.367879, 1e-6));
        assert!(close(survival(2.0, 1.0, 2.0).unwrap(), exp(-4.0), 1e-15));
        assert!(close(survival(2.0, 1.0, 2.0).unwrap(), 0.018316, 1e-5));
    }

    #[test]
    fn hazard_examples() {
        for tau in [0.0, 0.5, 10.0] {
            assert_eq!(hazard(tau, 4.0, 1.0).unwrap(), 0.25);
        }
        assert!(close(hazard(3.0, 1.0, 2.0).unwrap(), 6.0, 1e-15));
        assert_eq!(hazard(0.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(hazard(-0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(density(1.0, 0.0, 1.0).is_err());
        assert!(density(1.0, 1.0, -2.0).is_err());
        assert!(survival(1.0, -1.0, 1.0).is_err());
        assert!(Kernel::new(f64::NAN).is_err());
    }

    #[test]
    fn hazard_times_survival_is_density() {
        for &k in &[0.5, 1.0, 1.5, 2.0, 3.0] {
            let kernel = Kernel::new(k).unwrap();
            for &alpha in &[0.3, 1.0, 5.0, 10.0] {
                for i in 1..50 {
                    let tau = i as f64 * 0.173;
                    let lhs = kernel.hazard(tau, alpha) * kernel.survival(tau, alpha);
                    let rhs = kernel.density(tau, alpha);
                    if rhs > 0.0 {
                        assert!(((lhs - rhs) / rhs).abs() <= 1e-12, "k={k} a={alpha} t={tau}");
                    }
                }
            }
        }
    }

    #[test]
    fn survival_monotone_density_nonnegative() {
        let kernel = Kernel::new(1.7).unwrap();
        let mut prev = 1.0;
        for i in -10..200 {
            let tau = i as f64 * 0.05;
            let s = kernel.survival(tau, 2.0);
            assert!(s <= prev);
            assert!(kernel.density(tau, 2.0) >= 0.0);
            prev = s;
        }
    }

    #[test]
    fn forced_uniform_inverts_at_scale() {
        let tau = Kernel::EXPONENTIAL.quantile_of_survival(exp(-1.0), 3.5);
        assert!(close(tau, 3.5, 1e-15));
    }

    #[test]
    fn sample_means() {
        let mut rng = stream(11, &[]);
        let n = 100_000;
        let mean1: f64 = (0..n).map(|_| Kernel::EXPONENTIAL.sample(1.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((0.99..=1.01).contains(&mean1), "{mean1}");
        let mean2: f64 = (0..n).map(|_| Kernel::RAYLEIGH.sample(1.0, &mut rng)).sum::<f64>() / n as f64;
        // Gamma(1.5) = sqrt(pi)/2
        assert!((mean2 - 0.886_226_925).abs() < 0.01, "{mean2}");
    }

    #[test]
    fn kolmogorov_smirnov_against_cdf() {
        let n = 10_000;
        // 1% critical value of the one-sample KS statistic.
        let critical = 1.628 / libm::sqrt(n as f64);
        for &(k, alpha) in &[(1.0, 2.0), (2.0, 1.0), (0.7, 3.0)] {
            let kernel = Kernel::new(k).unwrap();
            let mut rng = stream(3, &[(k * 10.0) as u64]);
            let mut xs: Vec<f64> = (0..n).map(|_| kernel.sample(alpha, &mut rng)).collect();
            xs.sort_by(f64::total_cmp);
            let mut d: f64 = 0.0;
            for (i, &x) in xs.iter().enumerate() {
                let f = kernel.cdf(x, alpha);
                d = d.max((i as f64 + 1.0) / n as f64 - f).max(f - i as f64 / n as f64);
            }
            assert!(d < critical, "k={k}: D={d}");
        }
    }
}
