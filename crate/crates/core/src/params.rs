//! Physical parameter record shared by every model.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameter {name} = {value}: {constraint}")]
pub struct ParamError {
    pub name: &'static str,
    pub value: f64,
    pub constraint: &'static str,
}

pub(crate) fn require(ok: bool, name: &'static str, value: f64, constraint: &'static str) -> Result<(), ParamError> {
    if ok {
        Ok(())
    } else {
        Err(ParamError {
            name,
            value,
            constraint,
        })
    }
}

/// Ginzburg-Landau parameter `ε`, initial-distance exponent `α`, boundary
/// coefficient `λ` and applied field `h_ex`, plus the derived constants.
///
/// The derived quantities are computed once here so that identities such as
/// `drift(a_hat) == 0` hold exactly wherever they are consumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    eps: f64,
    alpha: f64,
    lambda: f64,
    h_ex: f64,
    log_eps: f64,
    field: f64,
    c_eps: f64,
    a_hat: f64,
}

impl PhysicalParams {
    pub fn new(eps: f64, alpha: f64, lambda: f64, h_ex: f64) -> Result<Self, ParamError> {
        require(eps > 0.0 && eps < 1.0, "eps", eps, "0 < eps < 1")?;
        require(alpha > 0.0 && alpha <= 1.0, "alpha", alpha, "0 < alpha <= 1")?;
        require(lambda >= 0.0 && lambda.is_finite(), "lambda", lambda, "lambda >= 0")?;
        require(h_ex > 0.0 && h_ex.is_finite(), "h_ex", h_ex, "h_ex > 0")?;
        let log_eps = -eps.ln();
        let field = lambda * h_ex;
        let (c_eps, a_hat) = if lambda > 0.0 {
            (field / log_eps, 1.0 / field)
        } else {
            (0.0, f64::INFINITY)
        };
        Ok(PhysicalParams {
            eps,
            alpha,
            lambda,
            h_ex,
            log_eps,
            field,
            c_eps,
            a_hat,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn h_ex(&self) -> f64 {
        self.h_ex
    }

    /// `|ln ε|`.
    pub fn log_eps(&self) -> f64 {
        self.log_eps
    }

    /// `λ h_ex`.
    pub fn field(&self) -> f64 {
        self.field
    }

    /// `c_ε = λ h_ex / |ln ε|`.
    pub fn c_eps(&self) -> f64 {
        self.c_eps
    }

    /// Nucleation distance `Â = 1/(λ h_ex)`; infinite when `λ = 0`.
    pub fn a_hat(&self) -> f64 {
        self.a_hat
    }

    /// Initial vortex distance `ε^α`.
    pub fn initial_distance(&self) -> f64 {
        self.eps.powf(self.alpha)
    }

    /// `ε^{2α} |ln ε| / 2`, the leading-order annihilation time.
    pub fn leading_annihilation_time(&self) -> f64 {
        self.eps.powf(2.0 * self.alpha) * self.log_eps / 2.0
    }
}
