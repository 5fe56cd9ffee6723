//! Closed-form exit analytics for the perturbed vortex law.
//!
//! With `n = 1/(β|ln ε|)` and `x = c_ε z/β`, the probability of reaching `Â`
//! before 0 from `z` is `φ(z) = P(n+1, x) / P(n+1, n)`, where `P` is the
//! regularized lower incomplete gamma function. The nucleation probability of
//! `K = ε^{-α}` independent boundary vortices is `N = 1 − (1 − φ(ε^α))^K`.
//! Everything is carried in log domain.

use std::fmt;

use thiserror::Error;

use crate::params::PhysicalParams;
use crate::specialfn::{log_gamma, log_regularized_gamma_p, LogValue, SpecialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExitError {
    #[error("{operation}: {message}")]
    Domain { operation: &'static str, message: String },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("no limit of β ln h_ex detected on the probe sequence (last values {0} and {1})")]
    NoLimit(f64, f64),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

fn domain(operation: &'static str, message: impl Into<String>) -> ExitError {
    ExitError::Domain {
        operation,
        message: message.into(),
    }
}

fn check_noise(operation: &'static str, p: &PhysicalParams, beta: f64) -> Result<(), ExitError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(domain(operation, format!("beta = {beta} must be > 0")));
    }
    if p.lambda() <= 0.0 {
        return Err(domain(operation, "requires lambda > 0"));
    }
    Ok(())
}

/// `m_ε = c_ε ε^α/β` and `n_ε = 1/(β|ln ε|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaCoords {
    pub m_eps: f64,
    pub n_eps: f64,
}

impl GammaCoords {
    pub fn new(p: &PhysicalParams, beta: f64) -> Result<Self, ExitError> {
        check_noise("gamma_coords", p, beta)?;
        Ok(GammaCoords {
            m_eps: p.c_eps() * p.initial_distance() / beta,
            n_eps: 1.0 / (beta * p.log_eps()),
        })
    }
}

/// `ln φ(z)`; exactly `-inf` at `z = 0` and exactly 0 at `z = Â`.
pub fn log_exit_probability(z: f64, p: &PhysicalParams, beta: f64) -> Result<LogValue, ExitError> {
    check_noise("log_exit_probability", p, beta)?;
    let a_hat = p.a_hat();
    if !(z >= 0.0 && z <= a_hat) {
        return Err(domain("log_exit_probability", format!("z = {z} outside [0, {a_hat}]")));
    }
    if z == 0.0 {
        return Ok(LogValue::ZERO);
    }
    if z == a_hat {
        return Ok(LogValue::ONE);
    }
    let n = 1.0 / (beta * p.log_eps());
    let x = p.c_eps() * z / beta;
    let num = log_regularized_gamma_p(n + 1.0, x)?.ln();
    let den = log_regularized_gamma_p(n + 1.0, n)?.ln();
    Ok(LogValue::from_ln((num - den).min(0.0)))
}

/// `N = 1 − (1 − φ)^K` from `ln φ`, as `(ln N, N)`.
pub fn log_nucleation_from(log_phi: LogValue, k: f64) -> (LogValue, f64) {
    if log_phi.is_zero() {
        return (LogValue::ZERO, 0.0);
    }
    let phi = log_phi.value();
    if phi >= 1.0 {
        return (LogValue::ONE, 1.0);
    }
    let exponent = k * (-phi).ln_1p();
    if exponent > -1e-300 {
        // φ below the double range: N = Kφ to all represented digits.
        let ln_n = k.ln() + log_phi.ln();
        return (LogValue::from_ln(ln_n), ln_n.exp());
    }
    let n = -exponent.exp_m1();
    (LogValue::from_value(n), n)
}

/// Nucleation probability of `ε^{-α}` boundary vortices started at `ε^α`.
pub fn log_nucleation_probability(p: &PhysicalParams, beta: f64) -> Result<(LogValue, f64), ExitError> {
    check_noise("log_nucleation_probability", p, beta)?;
    let z = p.initial_distance();
    if z > p.a_hat() {
        return Err(domain(
            "log_nucleation_probability",
            format!("eps^alpha = {z} exceeds the nucleation distance {}", p.a_hat()),
        ));
    }
    let log_phi = log_exit_probability(z, p, beta)?;
    Ok(log_nucleation_from(log_phi, 1.0 / z))
}

/// `(1/β)(ln(λh)/|ln ε| − α) + ln(λh)`.
pub fn asymptotic_log_ratio(p: &PhysicalParams, beta: f64) -> Result<f64, ExitError> {
    check_noise("asymptotic_log_ratio", p, beta)?;
    let ln_field = p.field().ln();
    Ok((ln_field / p.log_eps() - p.alpha()) / beta + ln_field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeLabel {
    NoNucleation,
    Nucleation,
    Transitional,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegimeLabel::NoNucleation => "no-nucleation",
            RegimeLabel::Nucleation => "nucleation",
            RegimeLabel::Transitional => "transitional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub label: RegimeLabel,
    pub limit_value: f64,
}

/// Applied-field families `h_ex(ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldFamily {
    /// `C |ln ε|`.
    LogLinear { c: f64 },
    /// `C exp(|ln ε|^{1/2})`.
    ExpSqrtLog { c: f64 },
    /// `C ε^{-s}`; violates the growth hypothesis.
    PowerLaw { c: f64, s: f64 },
}

impl FieldFamily {
    pub fn h_ex(&self, eps: f64) -> f64 {
        let log_eps = -eps.ln();
        match *self {
            FieldFamily::LogLinear { c } => c * log_eps,
            FieldFamily::ExpSqrtLog { c } => c * log_eps.sqrt().exp(),
            FieldFamily::PowerLaw { c, s } => c * eps.powf(-s),
        }
    }
}

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A one-parameter family `ε ↦ (h_ex(ε), β(ε))`, optionally carrying the
/// known limit of `β ln h_ex`.
pub struct ParameterFamily {
    h_ex: ScalarFn,
    beta: ScalarFn,
    declared_limit: Option<f64>,
}

impl fmt::Debug for ParameterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParameterFamily")
            .field("declared_limit", &self.declared_limit)
            .finish_non_exhaustive()
    }
}

impl ParameterFamily {
    pub fn custom(
        h_ex: impl Fn(f64) -> f64 + Send + Sync + 'static,
        beta: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ParameterFamily {
            h_ex: Box::new(h_ex),
            beta: Box::new(beta),
            declared_limit: None,
        }
    }

    /// `β = κ / ln h_ex`, so that `β ln h_ex ≡ κ`.
    pub fn constant_product(field: FieldFamily, kappa: f64) -> Self {
        ParameterFamily {
            h_ex: Box::new(move |eps| field.h_ex(eps)),
            beta: Box::new(move |eps| kappa / field.h_ex(eps).ln()),
            declared_limit: Some(kappa),
        }
    }

    pub fn with_declared_limit(mut self, limit: f64) -> Self {
        self.declared_limit = Some(limit);
        self
    }

    pub fn h_ex(&self, eps: f64) -> f64 {
        (self.h_ex)(eps)
    }

    pub fn beta(&self, eps: f64) -> f64 {
        (self.beta)(eps)
    }

    pub fn declared_limit(&self) -> Option<f64> {
        self.declared_limit
    }
}

/// Probe sequence `ε_k = 10^{-k}`, `k = 4..=16`.
pub fn probe_sequence() -> Vec<f64> {
    (4..=16).map(|k| 10f64.powi(-k)).collect()
}

const LIMIT_TOLERANCE: f64 = 1e-3;

/// Classifies the family by the limit of `β ln h_ex` against `α`.
///
/// Along the probe sequence `h_ex` must grow and `ln h_ex/|ln ε|` must
/// decrease to below three quarters of its first value, the numerical stand-in
/// for `ε^s h_ex → 0` at every `s > 0`. The nucleation case additionally needs
/// `β` to decrease.
pub fn classify_regime(family: &ParameterFamily, alpha: f64) -> Result<Regime, ExitError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain("classify_regime", format!("alpha = {alpha} outside (0, 1]")));
    }
    let probes = probe_sequence();
    let mut h = Vec::with_capacity(probes.len());
    let mut beta = Vec::with_capacity(probes.len());
    for &eps in &probes {
        let hv = family.h_ex(eps);
        let bv = family.beta(eps);
        if !(hv > 1.0 && hv.is_finite()) {
            return Err(ExitError::HypothesisViolated(format!(
                "h_ex({eps:e}) = {hv} is not > 1"
            )));
        }
        if !(bv > 0.0 && bv.is_finite()) {
            return Err(domain("classify_regime", format!("beta({eps:e}) = {bv} must be > 0")));
        }
        h.push(hv);
        beta.push(bv);
    }
    if h.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExitError::HypothesisViolated(
            "h_ex does not grow as eps decreases".into(),
        ));
    }
    let growth: Vec<f64> = h.iter().zip(&probes).map(|(hv, eps)| hv.ln() / -eps.ln()).collect();
    let first = growth[0];
    let last = growth[growth.len() - 1];
    if growth.windows(2).any(|w| w[1] >= w[0]) || last >= 0.75 * first {
        return Err(ExitError::HypothesisViolated(format!(
            "eps^s h_ex does not vanish: ln h_ex/|ln eps| goes from {first} to {last}"
        )));
    }

    let products: Vec<f64> = h.iter().zip(&beta).map(|(hv, bv)| bv * hv.ln()).collect();
    let limit = match family.declared_limit() {
        Some(limit) => limit,
        None => {
            let k = products.len();
            let (prev, last) = (products[k - 2], products[k - 1]);
            if (last - prev).abs() >= LIMIT_TOLERANCE {
                return Err(ExitError::NoLimit(prev, last));
            }
            last
        }
    };
    let label = if (limit - alpha).abs() < LIMIT_TOLERANCE {
        RegimeLabel::Transitional
    } else if limit < alpha {
        RegimeLabel::NoNucleation
    } else {
        if beta.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ExitError::HypothesisViolated("beta does not decrease toward 0".into()));
        }
        RegimeLabel::Nucleation
    };
    Ok(Regime {
        label,
        limit_value: limit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundStatus::Pass => "pass",
            BoundStatus::Fail => "fail",
            BoundStatus::NotApplicable => "n/a",
        })
    }
}

/// Outcome of one bound; `slack` is the smaller log-domain margin, negative
/// when violated, NaN when not applicable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub status: BoundStatus,
    pub slack: f64,
}

impl BoundCheck {
    const NOT_APPLICABLE: BoundCheck = BoundCheck {
        status: BoundStatus::NotApplicable,
        slack: f64::NAN,
    };

    fn from_slack(slack: f64, scale: f64) -> Self {
        let status = if slack >= -1e-12 * scale.max(1.0) {
            BoundStatus::Pass
        } else {
            BoundStatus::Fail
        };
        BoundCheck { status, slack }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub coords: GammaCoords,
    pub log_phi: f64,
    pub log_nucleation: f64,
    /// `γ(n+1, m) ≤ m^{n+1}/(n+1)`.
    pub incomplete_gamma: BoundCheck,
    /// `e^{−m}(m/n)^{n+1} ≤ φ(ε^α) ≤ e^{n}(m/n)^{n+1}`, for `m, n ≤ 1`.
    pub exit_bracket: BoundCheck,
    /// `φ/(2ε^α) ≤ N ≤ 2φ/ε^α`, for `φ ε^{-α} ≤ 1/2`.
    pub nucleation_sandwich: BoundCheck,
}

impl BoundsReport {
    pub fn failures(&self) -> usize {
        [self.incomplete_gamma, self.exit_bracket, self.nucleation_sandwich]
            .iter()
            .filter(|b| b.status == BoundStatus::Fail)
            .count()
    }
}

/// Bracket `[lo, hi]` on `ln φ` from the two-sided bound on `γ(n+1, ·)`.
pub fn exit_bracket(m: f64, n: f64) -> (f64, f64) {
    let centre = (n + 1.0) * (m / n).ln();
    (centre - m, centre + n)
}

pub fn check_bounds(p: &PhysicalParams, beta: f64) -> Result<BoundsReport, ExitError> {
    let coords = GammaCoords::new(p, beta)?;
    let (m, n) = (coords.m_eps, coords.n_eps);
    let log_phi = log_exit_probability(p.initial_distance(), p, beta)?.ln();
    let (log_n, _) = log_nucleation_probability(p, beta)?;
    let log_n = log_n.ln();

    let lhs = log_regularized_gamma_p(n + 1.0, m)?.ln() + log_gamma(n + 1.0)?;
    let rhs = (n + 1.0) * m.ln() - (n + 1.0).ln();
    let incomplete_gamma = BoundCheck::from_slack(rhs - lhs, rhs.abs());

    let exit_bracket = if m <= 1.0 && n <= 1.0 {
        let (lo, hi) = exit_bracket(m, n);
        BoundCheck::from_slack((log_phi - lo).min(hi - log_phi), log_phi.abs())
    } else {
        BoundCheck::NOT_APPLICABLE
    };

    let log_k_phi = -p.initial_distance().ln() + log_phi;
    let nucleation_sandwich = if log_k_phi <= 0.5f64.ln() {
        let ln2 = std::f64::consts::LN_2;
        let slack = (log_n - (log_k_phi - ln2)).min(log_k_phi + ln2 - log_n);
        BoundCheck::from_slack(slack, log_n.abs())
    } else {
        BoundCheck::NOT_APPLICABLE
    };

    Ok(BoundsReport {
        coords,
        log_phi,
        log_nucleation: log_n,
        incomplete_gamma,
        exit_bracket,
        nucleation_sandwich,
    })
}
