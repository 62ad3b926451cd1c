//! Legendre polynomials, digamma and the series form of digamma used for
//! the close-gap correction terms.

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

/// Bernoulli numbers B_2, B_4, ..., B_16.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Streams `(P_n(x), P_n'(x))` for `n = 0, 1, 2, ...`.
///
/// Uses Bonnet's recurrence for the values and
/// `P'_{n+1} = P'_{n-1} + (2n + 1) P_n` for the derivatives, which stays
/// well defined at `x = +-1`.
#[derive(Debug, Clone)]
pub struct LegendreSeq {
    x: f64,
    n: usize,
    p_prev: f64,
    p: f64,
    dp_prev: f64,
    dp: f64,
}

impl LegendreSeq {
    pub fn new(x: f64) -> Self {
        Self {
            x,
            n: 0,
            p_prev: 0.0,
            p: 1.0,
            dp_prev: 0.0,
            dp: 0.0,
        }
    }
}

impl Iterator for LegendreSeq {
    type Item = (f64, f64);

    #[inline]
    fn next(&mut self) -> Option<(f64, f64)> {
        let out = (self.p, self.dp);
        let n = self.n as f64;
        let p_next = if self.n == 0 {
            self.x
        } else {
            ((2.0 * n + 1.0) * self.x * self.p - n * self.p_prev) / (n + 1.0)
        };
        let dp_next = self.dp_prev + (2.0 * n + 1.0) * self.p;
        self.p_prev = self.p;
        self.p = p_next;
        self.dp_prev = self.dp;
        self.dp = dp_next;
        self.n += 1;
        Some(out)
    }
}

fn check_unit_interval(x: f64) -> Result<()> {
    if x.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "Legendre argument must lie in [-1, 1], got {x}"
        )))
    }
}

/// Legendre polynomial `P_n(x)` on `[-1, 1]`.
pub fn legendre_p(n: usize, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(LegendreSeq::new(x)
        .nth(n)
        .map(|(p, _)| p)
        .unwrap_or(f64::NAN))
}

/// Derivative `P_n'(x)` on `[-1, 1]`.
pub fn legendre_p_deriv(n: usize, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(LegendreSeq::new(x)
        .nth(n)
        .map(|(_, dp)| dp)
        .unwrap_or(f64::NAN))
}

/// Digamma function `psi(z) = d/dz ln Gamma(z)` for `z > 0`.
///
/// Upward recurrence to `z >= 10`, then the asymptotic expansion through
/// `B_16`; absolute error below `1e-14` for `z` in `(0, 10]` away from the
/// pole.
pub fn digamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidInput(format!("digamma needs z > 0, got {z}")));
    }
    let mut shift = CompensatedSum::new();
    let mut x = z;
    while x < 10.0 {
        shift.add(-1.0 / x);
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    let mut series = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        series += b / (2.0 * (k + 1) as f64) * pow;
        pow *= inv2;
    }
    shift.add(x.ln() - 0.5 / x - series);
    Ok(shift.value())
}

/// `sum_{n >= 1} z / (n (n - z))` for `z` in `(0, 1)`.
///
/// This is `-gamma - psi(1 - z)`. The first `HEAD - 1` terms are summed
/// directly; the remainder from `n = HEAD` on is evaluated in closed form by
/// Euler–Maclaurin on `f(x) = 1/(x - z) - 1/x`, whose odd derivatives are
/// explicit. With `HEAD = 32` and corrections through `B_12` the neglected
/// remainder is below `1e-22`.
pub fn digamma_series_tail(z: f64) -> Result<f64> {
    const HEAD: usize = 32;
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::InvalidInput(format!(
            "series argument must lie in (0, 1), got {z}"
        )));
    }
    let mut sum = CompensatedSum::new();
    for n in 1..HEAD {
        let n = n as f64;
        sum.add(z / (n * (n - z)));
    }
    let big_n = HEAD as f64;
    // integral of f from N to infinity
    sum.add(-(-z / big_n).ln_1p());
    sum.add(0.5 * z / (big_n * (big_n - z)));
    // -B_2k/(2k)! f^(2k-1)(N) = B_2k/(2k) [(N - z)^(-2k) - N^(-2k)]
    let (inv_shift, inv_n) = (1.0 / (big_n - z), 1.0 / big_n);
    let (mut ps, mut pn) = (inv_shift * inv_shift, inv_n * inv_n);
    for (k, b) in BERNOULLI_EVEN.iter().take(6).enumerate() {
        sum.add(b / (2.0 * (k + 1) as f64) * (ps - pn));
        ps *= inv_shift * inv_shift;
        pn *= inv_n * inv_n;
    }
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_endpoints() {
        for n in 0..=50 {
            assert_abs_diff_eq!(legendre_p(n, 1.0).unwrap(), 1.0, epsilon = 1e-13);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(legendre_p(n, -1.0).unwrap(), sign, epsilon = 1e-13);
            let slope = (n * (n + 1)) as f64 / 2.0;
            assert_abs_diff_eq!(legendre_p_deriv(n, 1.0).unwrap(), slope, epsilon = 1e-10);
        }
        assert_eq!(legendre_p(0, 0.37).unwrap(), 1.0);
        assert_eq!(legendre_p_deriv(1, -0.2).unwrap(), 1.0);
    }

    #[test]
    fn legendre_p5_explicit_polynomial() {
        // (63 x^5 - 70 x^3 + 15 x) / 8 at x = 0.3
        assert_abs_diff_eq!(legendre_p(5, 0.3).unwrap(), 0.345_386_25, epsilon = 1e-15);
    }

    #[test]
    fn legendre_derivative_against_central_difference() {
        let h = 1e-5;
        let fd = (legendre_p(7, 0.4 + h).unwrap() - legendre_p(7, 0.4 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(legendre_p_deriv(7, 0.4).unwrap(), fd, epsilon = 1e-8);
    }

    #[test]
    fn legendre_rejects_outside_interval() {
        assert!(legendre_p(3, 1.5).is_err());
        assert!(legendre_p_deriv(3, -1.01).is_err());
    }

    #[test]
    fn legendre_bounded_for_high_degree() {
        for &x in &[-1.0, -0.999_999, -0.3, 0.0, 0.5, 0.999_9, 1.0] {
            let worst = LegendreSeq::new(x)
                .take(1_000_001)
                .map(|(p, _)| p.abs())
                .fold(0.0, f64::max);
            assert!(worst <= 1.0 + 1e-10, "x = {x}: max |P_n| = {worst}");
        }
    }

    #[test]
    fn digamma_special_values() {
        assert_abs_diff_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, epsilon = 1e-15);
        let half = -EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
        assert_abs_diff_eq!(digamma(0.5).unwrap(), half, epsilon = 1e-15);
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
    }

    #[test]
    fn digamma_recurrence() {
        for k in 1..200 {
            let z = 0.05 * k as f64;
            let lhs = digamma(z + 1.0).unwrap() - digamma(z).unwrap();
            assert_abs_diff_eq!(lhs, 1.0 / z, epsilon = 1e-12 * (1.0 + 1.0 / z));
        }
    }

    #[test]
    fn tail_half_is_two_log_two() {
        assert_abs_diff_eq!(
            digamma_series_tail(0.5).unwrap(),
            2.0 * std::f64::consts::LN_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn tail_vanishes_with_argument() {
        assert!(digamma_series_tail(1e-12).unwrap() < 2e-12);
        assert!(digamma_series_tail(0.0).is_err());
        assert!(digamma_series_tail(1.0).is_err());
    }

    #[test]
    fn tail_at_point_three() {
        // 40-digit value of sum z / (n (n - z))
        assert_abs_diff_eq!(
            digamma_series_tail(0.3).unwrap(),
            0.642_807_888_796_401_754_142,
            epsilon = 1e-15
        );
    }

    #[test]
    fn tail_and_digamma_agree_through_identity() {
        for k in 1..=19 {
            let z = 0.05 * k as f64;
            let via_digamma = -EULER_GAMMA - digamma(1.0 - z).unwrap();
            assert_abs_diff_eq!(
                digamma_series_tail(z).unwrap(),
                via_digamma,
                epsilon = 1e-12
            );
        }
    }
}
