use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};

/// Below this point `ln Phi(x)` switches to the asymptotic tail series.
const LOG_TAIL_SWITCH: f64 = -35.0;

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `ln Phi(x)`, finite far into the lower tail.
pub fn ln_normal_cdf(x: f64) -> f64 {
    if x >= LOG_TAIL_SWITCH {
        return normal_cdf(x).ln();
    }
    // Phi(-z) = phi(z)/z * (1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 - 945/z^10 + ...)
    let z = -x;
    let w = 1.0 / (z * z);
    let series = 1.0 + w * (-1.0 + w * (3.0 + w * (-15.0 + w * (105.0 + w * -945.0))));
    -0.5 * z * z - z.ln() - 0.5 * (2.0 * PI).ln() + series.ln()
}

/// Inverse Gaussian law with the given mean and shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IGParams {
    mean: f64,
    shape: f64,
}

impl IGParams {
    pub fn new(mean: f64, shape: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::domain(format!("IG mean must be > 0, got {mean}")));
        }
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::domain(format!("IG shape must be > 0, got {shape}")));
        }
        Ok(Self { mean, shape })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn variance(&self) -> f64 {
        self.mean.powi(3) / self.shape
    }

    /// `(a, b, ln e^{2 shape/mean} Phi(-b))` shared by the CDF and survival function.
    fn terms(&self, x: f64) -> (f64, f64) {
        let s = (self.shape / x).sqrt();
        let a = s * (x / self.mean - 1.0);
        let b = s * (x / self.mean + 1.0);
        (a, 2.0 * self.shape / self.mean + ln_normal_cdf(-b))
    }
}

pub fn ig_pdf(x: f64, ig: &IGParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (m, l) = (ig.mean, ig.shape);
    (l / (2.0 * PI * x.powi(3))).sqrt() * (-l * (x - m).powi(2) / (2.0 * m * m * x)).exp()
}

pub fn ig_cdf(x: f64, ig: &IGParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let (a, log_tail) = ig.terms(x);
    (normal_cdf(a) + log_tail.exp()).clamp(0.0, 1.0)
}

/// `1 - F(x)` without the cancellation of subtracting from one.
pub fn ig_sf(x: f64, ig: &IGParams) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let (a, log_tail) = ig.terms(x);
    (normal_cdf(-a) - log_tail.exp()).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values from 40-digit arithmetic
    const PHI_1: f64 = 0.841_344_746_068_542_9;
    const PHI_M8: f64 = 6.220_960_574_271_784e-16;
    const PHI_M20: f64 = 2.753_624_118_606_234e-89;

    #[test]
    fn normal_cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - PHI_1).abs() < 1e-15);
        assert!((normal_cdf(40.0) - 1.0).abs() <= 1e-15);
        assert!((normal_cdf(-8.0) / PHI_M8 - 1.0).abs() < 1e-13);
        assert!((normal_cdf(-20.0) / PHI_M20 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn normal_cdf_symmetry_and_monotonicity() {
        let mut prev = 0.0;
        for i in -4000..=4000 {
            let x = i as f64 * 0.01;
            let p = normal_cdf(x);
            assert!((p + normal_cdf(-x) - 1.0).abs() <= 1e-15, "{x}");
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn log_cdf_is_continuous_across_the_switch() {
        let below = ln_normal_cdf(LOG_TAIL_SWITCH - 1e-9);
        let above = ln_normal_cdf(LOG_TAIL_SWITCH + 1e-9);
        assert!((below - above).abs() < 1e-9 * below.abs());
        assert!((ln_normal_cdf(-20.0) - PHI_M20.ln()).abs() < 1e-12);
        assert!(ln_normal_cdf(-1e4).is_finite());
    }

    #[test]
    fn ig_cdf_support_and_mass() {
        let ig = IGParams::new(1.302_296_834_242_533, 0.831_028_751_794_280_6).unwrap();
        assert_eq!(ig_cdf(0.0, &ig), 0.0);
        assert!((ig_cdf(1e6 * ig.mean(), &ig) - 1.0).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 1..2000 {
            let f = ig_cdf(i as f64 * 0.01, &ig);
            assert!(f >= prev);
            prev = f;
        }
    }

    #[test]
    fn ig_cdf_matches_density_quadrature() {
        let ig = IGParams::new(1.302_296_834_242_533, 0.831_028_751_794_280_6).unwrap();
        // composite Simpson on the density written out independently
        let pdf = |x: f64| {
            if x <= 0.0 {
                return 0.0;
            }
            let (m, l) = (ig.mean(), ig.shape());
            (l / (2.0 * PI * x * x * x)).sqrt() * (-(l * (x - m) * (x - m)) / (2.0 * m * m * x)).exp()
        };
        let upper = 4.558;
        let n = 200_000;
        let h = upper / n as f64;
        let mut acc = pdf(0.0) + pdf(upper);
        for i in 1..n {
            acc += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let quad = acc * h / 3.0;
        assert!((ig_cdf(upper, &ig) - quad).abs() < 1e-3);
        assert!((ig_cdf(upper, &ig) - 0.955_073_976_198_934).abs() < 1e-10);
    }

    #[test]
    fn ig_sf_is_complement_and_survives_large_shape() {
        let ig = IGParams::new(1.3, 0.83).unwrap();
        for x in [0.1, 1.0, 3.0, 10.0] {
            assert!((ig_sf(x, &ig) + ig_cdf(x, &ig) - 1.0).abs() < 1e-14);
        }
        // shape/mean ~ 48: e^{2 shape/mean} overflows a naive evaluation
        let big = IGParams::new(98.7, 4772.0).unwrap();
        let sf = ig_sf(345.0, &big);
        assert!(sf > 0.0 && sf < 1e-15, "{sf}");
        let huge = IGParams::new(10.0, 1e6).unwrap();
        assert!(ig_cdf(10.0, &huge).is_finite());
        assert!((ig_cdf(10.0, &huge) - 0.5).abs() < 0.01);
    }

    #[test]
    fn ig_rejects_non_positive_parameters() {
        assert!(IGParams::new(0.0, 1.0).is_err());
        assert!(IGParams::new(1.0, -1.0).is_err());
    }
}
