//! Scalar special functions: principal-branch Lambert W, log-gamma, the lower
//! incomplete gamma function (plain and log-domain) and the truncated
//! exponential.
//!
//! Probability-like ratios built from the incomplete gamma function routinely
//! fall hundreds of orders of magnitude below the smallest double, so the
//! regularized form is only exposed through [`LogValue`].

use std::f64::consts::{E, PI};

use thiserror::Error;

/// `1/e`, the magnitude of the Lambert W branch point.
const INV_E: f64 = 0.367_879_441_171_442_33;

const MAX_ITER: usize = 64;

/// Error type for the special functions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{function}: argument outside domain ({message})")]
    Domain { function: &'static str, message: String },
    #[error("{function}: no convergence after {iterations} iterations")]
    NoConvergence { function: &'static str, iterations: usize },
}

fn domain(function: &'static str, message: impl Into<String>) -> SpecialError {
    SpecialError::Domain {
        function,
        message: message.into(),
    }
}

/// Natural logarithm of a nonnegative quantity; `-inf` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue {
    log_magnitude: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
    };
    pub const ONE: LogValue = LogValue { log_magnitude: 0.0 };

    pub fn from_ln(log_magnitude: f64) -> Self {
        LogValue { log_magnitude }
    }

    /// Wraps a nonnegative value.
    pub fn from_value(value: f64) -> Self {
        debug_assert!(value >= 0.0);
        LogValue {
            log_magnitude: value.ln(),
        }
    }

    pub fn ln(self) -> f64 {
        self.log_magnitude
    }

    /// The represented quantity; underflows to 0 when it is below the double range.
    pub fn value(self) -> f64 {
        self.log_magnitude.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }
}

/// `ln(1 - u) + u`, accurate for small `u` where the two terms cancel.
pub fn ln1m_plus(u: f64) -> f64 {
    if u.abs() < 0.25 {
        // -(u^2/2 + u^3/3 + ...)
        let mut power = u * u;
        let mut sum = 0.0;
        for k in 2..200 {
            let term = power / k as f64;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            power *= u;
        }
        -sum
    } else {
        (-u).ln_1p() + u
    }
}

/// Principal branch `W_0` of the Lambert W function, `w * e^w = z`, `w >= -1`.
///
/// Halley iteration from a piecewise initial guess: branch-point series near
/// `-1/e`, Winitzki's approximation for moderate `z`, and the asymptotic
/// `ln z - ln ln z` guess (iterated in logarithmic form) for large `z`.
pub fn lambert_w0(z: f64) -> Result<f64, SpecialError> {
    if z.is_nan() {
        return Err(domain("lambert_w0", "z is NaN"));
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    // Offset from the branch point. A few ulps below -1/e is rounding of the
    // constant and is treated as the branch point itself.
    let q = z + INV_E;
    if q < -4.0 * f64::EPSILON * INV_E {
        return Err(domain("lambert_w0", format!("z = {z} < -1/e")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let q = q.max(0.0);
    if q == 0.0 {
        return Ok(-1.0);
    }

    let p = (2.0 * E * q).sqrt();
    if p < 1e-3 {
        // Series about the branch point is exact to double precision here and
        // Halley's update degenerates as w -> -1.
        return Ok(branch_series(p));
    }

    if z > E {
        return w0_log_form(z);
    }

    let mut w = if p < 0.5 {
        branch_series(p)
    } else {
        let l = z.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    };

    let mut prev_step = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let dw = f / denom;
        // Near the branch point the residual is rounding noise amplified by
        // 1/(w + 1); stop once steps no longer shrink.
        if dw.abs() >= prev_step {
            return Ok(w.max(-1.0));
        }
        w -= dw;
        if dw.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            return Ok(w.max(-1.0));
        }
        prev_step = dw.abs();
    }
    Err(SpecialError::NoConvergence {
        function: "lambert_w0",
        iterations: MAX_ITER,
    })
}

fn branch_series(p: f64) -> f64 {
    // W_0 = -1 + p - p^2/3 + 11/72 p^3 - 43/540 p^4 + 769/17280 p^5 - 221/8505 p^6
    let c = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
    ];
    c.iter().rev().fold(0.0, |acc, &ck| acc * p + ck)
}

/// Halley iteration on `w + ln w = ln z`, which cannot overflow for large `z`.
fn w0_log_form(z: f64) -> Result<f64, SpecialError> {
    let lz = z.ln();
    let l2 = lz.ln();
    let mut w = if lz > 1.5 { lz - l2 + l2 / lz } else { lz.max(1.0) * 0.7 };
    for _ in 0..MAX_ITER {
        let g = w + w.ln() - lz;
        let g1 = 1.0 + 1.0 / w;
        let g2 = -1.0 / (w * w);
        let dw = g / (g1 - g * g2 / (2.0 * g1));
        w -= dw;
        if dw.abs() <= 4.0 * f64::EPSILON * w.abs() {
            return Ok(w);
        }
    }
    Err(SpecialError::NoConvergence {
        function: "lambert_w0",
        iterations: MAX_ITER,
    })
}

/// `1 + W_0(-exp(s - 1))` for `s <= 0`, computed without forming the argument.
///
/// This is the distance of `W_0` from its branch value `-1`; it solves
/// `ln(1 - u) + u = s` for `u` in `[0, 1)`. Near the branch point the plain
/// evaluation loses half the significant digits through the square-root
/// singularity, while this form keeps full relative accuracy.
pub fn lambert_w0_branch_offset(s: f64) -> Result<f64, SpecialError> {
    if s.is_nan() || s > 0.0 {
        return Err(domain("lambert_w0_branch_offset", format!("s = {s} must be <= 0")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    if s < -30.0 {
        return Ok(1.0 + lambert_w0(-(s - 1.0).exp())?);
    }
    let mut u = if s > -1.0 {
        let p = (-2.0 * s).sqrt();
        p - p * p / 3.0
    } else {
        1.0 + lambert_w0(-(s - 1.0).exp())?
    };
    u = u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    for _ in 0..MAX_ITER {
        let f = ln1m_plus(u) - s;
        let step = f * (1.0 - u) / u;
        let next = (u + step).clamp(0.5 * u, 0.5 * (1.0 + u));
        let delta = next - u;
        u = next;
        if delta.abs() <= 2.0 * f64::EPSILON * u {
            return Ok(u);
        }
    }
    Err(SpecialError::NoConvergence {
        function: "lambert_w0_branch_offset",
        iterations: MAX_ITER,
    })
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(s)` for `s > 0`.
///
/// Exact factorial products for small integers, Lanczos (g = 7) below 10 and
/// the Stirling series above.
pub fn log_gamma(s: f64) -> Result<f64, SpecialError> {
    if s.is_nan() || s <= 0.0 {
        return Err(domain("log_gamma", format!("s = {s} must be > 0")));
    }
    if s == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(log_gamma_unchecked(s))
}

pub(crate) fn log_gamma_unchecked(s: f64) -> f64 {
    if s.fract() == 0.0 && s <= 23.0 {
        // (s-1)! is exactly representable up to 22!.
        let mut fact = 1.0_f64;
        let mut k = 2.0;
        while k < s {
            fact *= k;
            k += 1.0;
        }
        return fact.ln();
    }
    if s >= 10.0 {
        return stirling(s);
    }
    if s < 0.5 {
        return lanczos(s + 1.0) - s.ln();
    }
    lanczos(s)
}

fn lanczos(s: f64) -> f64 {
    let x = s - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn stirling(s: f64) -> f64 {
    // Bernoulli terms B_{2k} / (2k (2k-1) s^{2k-1}).
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / s;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut power = inv;
    for c in C {
        series += c * power;
        power *= inv2;
    }
    (s - 0.5) * s.ln() - s + 0.5 * (2.0 * PI).ln() + series
}

fn check_gamma_args(function: &'static str, s: f64, x: f64) -> Result<(), SpecialError> {
    if s.is_nan() || s <= 0.0 || !s.is_finite() {
        return Err(domain(function, format!("s = {s} must be finite and > 0")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain(function, format!("x = {x} must be >= 0")));
    }
    Ok(())
}

/// `ln(γ(s, x) / Γ(s))`, the log of the regularized lower incomplete gamma.
///
/// Series for `x < s + 1`, Lentz continued fraction for the complement
/// otherwise; both carried in log space so ratios far below `1e-300` stay
/// finite.
pub fn log_regularized_gamma_p(s: f64, x: f64) -> Result<LogValue, SpecialError> {
    check_gamma_args("log_regularized_gamma_p", s, x)?;
    if x == 0.0 {
        return Ok(LogValue::ZERO);
    }
    if x == f64::INFINITY {
        return Ok(LogValue::ONE);
    }
    let log_prefactor = s * x.ln() - x - log_gamma_unchecked(s);
    if x < s + 1.0 {
        let sum = lower_series(s, x)?;
        Ok(LogValue::from_ln((log_prefactor + sum.ln()).min(0.0)))
    } else {
        let cf = upper_continued_fraction(s, x)?;
        let q = (log_prefactor + cf.ln()).exp();
        Ok(LogValue::from_ln((-q).ln_1p()))
    }
}

/// `Σ_k x^k / (s (s+1) ... (s+k))`.
fn lower_series(s: f64, x: f64) -> Result<f64, SpecialError> {
    let mut term = 1.0 / s;
    let mut sum = term;
    let cap = 10_000 + (100.0 * s.sqrt()) as usize;
    for k in 1..cap {
        term *= x / (s + k as f64);
        sum += term;
        if term < sum * 1e-17 {
            return Ok(sum);
        }
    }
    Err(SpecialError::NoConvergence {
        function: "log_regularized_gamma_p",
        iterations: cap,
    })
}

/// Modified Lentz evaluation of the continued fraction for `Γ(s,x) e^x x^{-s}`.
fn upper_continued_fraction(s: f64, x: f64) -> Result<f64, SpecialError> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(SpecialError::NoConvergence {
        function: "log_regularized_gamma_p",
        iterations: 10_000,
    })
}

/// Lower incomplete gamma `γ(s, x) = ∫₀ˣ t^{s-1} e^{-t} dt`.
pub fn lower_gamma(s: f64, x: f64) -> Result<f64, SpecialError> {
    check_gamma_args("lower_gamma", s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let log_p = log_regularized_gamma_p(s, x)?;
    Ok((log_p.ln() + log_gamma_unchecked(s)).exp())
}

/// Truncated exponential `e_n(x) = Σ_{k=0}^n x^k / k!`.
///
/// Direct summation for `n <= 30`; larger orders go through
/// [`log_truncated_exp`] and may overflow to infinity.
pub fn truncated_exp(n: i64, x: f64) -> Result<f64, SpecialError> {
    check_truncated_args(n, x)?;
    if n <= 30 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=n {
            term *= x / k as f64;
            sum += term;
        }
        Ok(sum)
    } else {
        Ok(log_truncated_exp(n, x)?.value())
    }
}

/// `ln e_n(x)` by a log-sum-exp over the terms.
pub fn log_truncated_exp(n: i64, x: f64) -> Result<LogValue, SpecialError> {
    check_truncated_args(n, x)?;
    if x == 0.0 {
        return Ok(LogValue::ONE);
    }
    let lx = x.ln();
    let mut log_terms = Vec::with_capacity(n as usize + 1);
    let mut log_fact = 0.0;
    for k in 0..=n {
        if k > 1 {
            log_fact += (k as f64).ln();
        }
        log_terms.push(k as f64 * lx - log_fact);
    }
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_terms.iter().map(|&t| (t - max).exp()).sum();
    Ok(LogValue::from_ln(max + sum.ln()))
}

fn check_truncated_args(n: i64, x: f64) -> Result<(), SpecialError> {
    if n < 0 {
        return Err(domain("truncated_exp", format!("n = {n} must be >= 0")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain("truncated_exp", format!("x = {x} must be >= 0")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Plain Newton on w e^w = z, independent of the Halley implementation.
    fn newton_w(z: f64) -> f64 {
        let mut w: f64 = 0.5;
        for _ in 0..200 {
            let f = w * w.exp() - z;
            w -= f / (w.exp() * (w + 1.0));
        }
        w
    }

    #[test]
    fn lambert_trivial_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert_eq!(lambert_w0(-INV_E).unwrap(), -1.0);
        assert_eq!(lambert_w0(-1.0 / E).unwrap(), -1.0);
        assert_eq!(lambert_w0(-(-1.0f64).exp()).unwrap(), -1.0);
    }

    #[test]
    fn lambert_at_one_matches_newton() {
        let oracle = newton_w(1.0);
        assert!((oracle - 0.567_143_290_409_783_8).abs() < 1e-14);
        assert!((lambert_w0(1.0).unwrap() - oracle).abs() < 1e-14);
    }

    #[test]
    fn lambert_rejects_below_branch() {
        assert!(matches!(lambert_w0(-0.4), Err(SpecialError::Domain { .. })));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn lambert_large_arguments() {
        for z in [10.0, 1e3, 1e10, 1e100, 1e300] {
            let w = lambert_w0(z).unwrap();
            assert_relative_eq!(w + w.ln(), z.ln(), max_relative = 1e-14);
        }
    }

    #[test]
    fn branch_offset_matches_plain_evaluation() {
        for s in [-1e-12, -1e-6, -0.01, -0.3, -1.0, -2.5, -10.0, -40.0] {
            let z = -(s - 1.0f64).exp();
            let u = lambert_w0_branch_offset(s).unwrap();
            let plain = 1.0 + lambert_w0(z).unwrap();
            // The plain route loses ~ulp/u absolute accuracy near the branch point.
            assert!((u - plain).abs() <= 4e-16 / u + 1e-15, "s={s} u={u} plain={plain}");
            // Defining relation, up to its conditioning u/(1 - u) at the
            // representable neighbours of u.
            let conditioning = 4.0 * f64::EPSILON * u / (1.0 - u);
            assert!(
                (ln1m_plus(u) - s).abs() <= 1e-14 * s.abs() + conditioning,
                "s={s} u={u}"
            );
        }
        assert_eq!(lambert_w0_branch_offset(0.0).unwrap(), 0.0);
        assert!(lambert_w0_branch_offset(1e-3).is_err());
    }

    #[test]
    fn ln1m_plus_continuity_at_switch() {
        let below = ln1m_plus(0.25 - 1e-12);
        let above = ln1m_plus(0.25 + 1e-12);
        assert!((below - above).abs() < 1e-12);
        assert_relative_eq!(ln1m_plus(1e-5), -(5e-11 + 1e-15 / 3.0), max_relative = 1e-12);
    }

    #[test]
    fn log_gamma_examples() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        assert_relative_eq!(log_gamma(11.0).unwrap(), 3_628_800f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(log_gamma(0.5).unwrap(), PI.sqrt().ln(), max_relative = 1e-13);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn log_gamma_branches_agree() {
        // Recurrence ln Γ(s+1) = ln Γ(s) + ln s across the Lanczos/Stirling split.
        for s in [9.25, 9.5, 9.999, 10.5, 30.7, 1234.5, 9.9e5] {
            let lhs = log_gamma(s + 1.0).unwrap();
            let rhs = log_gamma(s).unwrap() + f64::ln(s);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    #[test]
    fn lower_gamma_examples() {
        for x in [0.5, 1.0, 2.0] {
            assert_relative_eq!(lower_gamma(1.0, x).unwrap(), 1.0 - (-x).exp(), max_relative = 1e-14);
        }
        assert_eq!(lower_gamma(3.5, 0.0).unwrap(), 0.0);
        assert_relative_eq!(lower_gamma(2.0, 1.0).unwrap(), 1.0 - 2.0 / E, max_relative = 1e-13);
        assert!(lower_gamma(0.0, 1.0).is_err());
        assert!(lower_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn log_regularized_examples() {
        let v = log_regularized_gamma_p(1.0, 2f64.ln()).unwrap();
        assert_relative_eq!(v.ln(), 0.5f64.ln(), max_relative = 1e-14);
        for s in [0.3, 1.0, 7.5, 40.0] {
            assert!(log_regularized_gamma_p(s, 745.0 * s).unwrap().ln().abs() < 1e-15);
        }
        // Truncated-exponential identity with n = 10, summed directly.
        let mut term = 1.0;
        let mut e10 = 1.0;
        for k in 1..=10 {
            term *= 5.0 / k as f64;
            e10 += term;
        }
        let oracle = 1.0 - (-5.0f64).exp() * e10;
        let got = log_regularized_gamma_p(11.0, 5.0).unwrap().value();
        assert_relative_eq!(got, oracle, max_relative = 1e-10);
        assert!(log_regularized_gamma_p(1.0, 0.0).unwrap().is_zero());
    }

    #[test]
    fn log_regularized_survives_underflow() {
        // ratio ~ 1e-4000: far below the double range.
        let v = log_regularized_gamma_p(1.0e4, 10.0).unwrap();
        assert!(v.ln().is_finite());
        assert!(v.ln() < -9000.0);
        assert_eq!(v.value(), 0.0);
        // Leading term: x^s e^{-x} / Γ(s+1).
        let lead = 1.0e4 * 10f64.ln() - 10.0 - log_gamma(1.0e4 + 1.0).unwrap();
        assert!((v.ln() - lead).abs() < 1e-2);
    }

    #[test]
    fn truncated_exp_examples() {
        assert_eq!(truncated_exp(0, 3.7).unwrap(), 1.0);
        assert_eq!(truncated_exp(2, 1.0).unwrap(), 2.5);
        let scaled = truncated_exp(10, 10.0).unwrap() * (-10.0f64).exp();
        assert!(scaled > 0.5 && scaled < 0.6, "{scaled}");
        assert!(truncated_exp(-1, 1.0).is_err());
    }

    #[test]
    fn truncated_exp_log_path_matches_plain() {
        for (n, x) in [(5, 2.0), (30, 12.0), (31, 12.0), (25, 0.1)] {
            let plain: f64 = {
                let mut t = 1.0;
                let mut s = 1.0;
                for k in 1..=n {
                    t *= x / k as f64;
                    s += t;
                }
                s
            };
            assert_relative_eq!(log_truncated_exp(n, x).unwrap().value(), plain, max_relative = 1e-13);
        }
    }

    #[test]
    fn gamma_half_mass_at_large_n() {
        let ratio = log_regularized_gamma_p(1.0e4 + 1.0, 1.0e4).unwrap().value();
        assert!((0.495..=0.505).contains(&ratio), "{ratio}");
    }

    proptest! {
        #[test]
        fn lambert_functional_relation(z in -INV_E..700.0f64) {
            let w = lambert_w0(z).unwrap();
            prop_assert!(w >= -1.0);
            prop_assert!((w * w.exp() - z).abs() <= 1e-12 * z.abs().max(1.0));
        }

        #[test]
        fn gamma_matches_truncated_exponential(n in 0i64..=20, x in 1e-6..30.0f64) {
            let fact = (1..=n).fold(1.0, |acc, k| acc * k as f64);
            let identity = fact * (1.0 - (-x).exp() * truncated_exp(n, x).unwrap());
            let direct = lower_gamma(n as f64 + 1.0, x).unwrap();
            prop_assert!((direct - identity).abs() <= 1e-10 * fact);
        }

        #[test]
        fn regularized_monotone_in_x(s in 0.05..200.0f64, x in 0.0..300.0f64, dx in 0.0..5.0f64) {
            let lo = log_regularized_gamma_p(s, x).unwrap().ln();
            let hi = log_regularized_gamma_p(s, x + dx).unwrap().ln();
            prop_assert!(hi - lo >= -1e-12);
        }
    }
}
