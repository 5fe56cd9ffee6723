//! Deterministic boundary-vortex law `ȧ = λh_ex/|ln ε| − 1/(|ln ε| a)`.
//!
//! Closed forms (Lambert-W trajectory, annihilation times), an adaptive
//! Dormand–Prince integrator that stops at a small position floor, the
//! energy-balance diagnostic for the log-corrected law, and the interior
//! vortex velocity.

use std::f64::consts::PI;

use thiserror::Error;

use crate::params::PhysicalParams;
use crate::specialfn::{lambert_w0_branch_offset, ln1m_plus, SpecialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("{operation}: {message}")]
    Domain { operation: &'static str, message: String },
    #[error(
        "step size underflow at t = {t:e} (h = {h:e}): drift singularity reached faster than the tolerance permits"
    )]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

fn domain(operation: &'static str, message: impl Into<String>) -> OdeError {
    OdeError::Domain {
        operation,
        message: message.into(),
    }
}

/// Right side of the vortex law; equals `-b_ε(a)`.
pub fn drift(a: f64, p: &PhysicalParams) -> Result<f64, OdeError> {
    if a.is_nan() || a <= 0.0 {
        return Err(domain("drift", format!("position a = {a} must be > 0")));
    }
    Ok(drift_unchecked(a, p))
}

/// `c_ε (1 − Â/a)`, which vanishes exactly at `a = Â`.
#[inline]
pub(crate) fn drift_unchecked(a: f64, p: &PhysicalParams) -> f64 {
    if p.lambda() > 0.0 {
        p.c_eps() * (1.0 - p.a_hat() / a)
    } else {
        -1.0 / (p.log_eps() * a)
    }
}

/// Time for the vortex started at `ε^α` to reach the boundary.
///
/// `λ > 0`: `(|ln ε|/(λh)²)(|ln(1 − λhε^α)| − λhε^α)`; `λ = 0`: `ε^{2α}|ln ε|/2`.
pub fn annihilation_time(p: &PhysicalParams) -> Result<f64, OdeError> {
    if p.lambda() == 0.0 {
        return Ok(p.leading_annihilation_time());
    }
    let x = p.field() * p.initial_distance();
    if x >= 1.0 {
        return Err(domain("annihilation_time", format!("λ h_ex ε^α = {x} must be < 1")));
    }
    Ok(p.log_eps() / (p.field() * p.field()) * -ln1m_plus(x))
}

/// Lambert-W trajectory `a(t) = (1 + W₀(−C e^{(λh)² t/|ln ε|}))/(λh)` with
/// `a(0) = ε^α`.
///
/// The exponent is formed as `(λh)²(t − t_ann)/|ln ε|`, which is the log of
/// `−e·W₀`'s argument; this keeps full accuracy near the boundary impact where
/// `W₀ → −1`, and returns exactly 0 at `t = annihilation_time(p)`.
pub fn exact_solution(t: f64, p: &PhysicalParams) -> Result<f64, OdeError> {
    if p.lambda() == 0.0 {
        return Err(domain("exact_solution", "requires λ > 0"));
    }
    let t_ann = annihilation_time(p)?;
    if t.is_nan() || t < 0.0 || t > t_ann * (1.0 + 4.0 * f64::EPSILON) {
        return Err(domain("exact_solution", format!("t = {t} outside [0, {t_ann}]")));
    }
    let rate = p.field() * p.field() / p.log_eps();
    let s = (rate * (t - t_ann)).min(0.0);
    Ok(lambert_w0_branch_offset(s)? * p.a_hat())
}

/// Interior vortex velocity `−d λ ∇ξ_m / π`.
pub fn interior_velocity(grad_xi: [f64; 2], degree: i32, lambda_coef: f64) -> Result<[f64; 2], OdeError> {
    if degree != 1 && degree != -1 {
        return Err(domain("interior_velocity", format!("degree {degree} must be ±1")));
    }
    let k = -(degree as f64) * lambda_coef / PI;
    Ok([k * grad_xi[0], k * grad_xi[1]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Annihilated,
    ReachedHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminal: Terminal,
    /// Position below which the run was declared annihilated.
    pub floor: f64,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> Sample {
        *self.samples.last().expect("trajectory has at least one sample")
    }
}

const MAX_STEPS: usize = 10_000_000;
const ENERGY_SAMPLES_PER_STEP: usize = 16;

/// Integrates the leading-order vortex law from `a0` up to `t_max`.
///
/// Runs are declared [`Terminal::Annihilated`] once the position drops to
/// `10⁻³·min(ε^α, a0)`; the crossing time is located by bisection inside the
/// final step and the last sample sits exactly on the floor.
pub fn integrate(p: &PhysicalParams, a0: f64, t_max: f64, tol: f64) -> Result<Trajectory, OdeError> {
    check_run(a0, t_max, tol)?;
    let floor = 1e-3 * p.initial_distance().min(a0);
    let rhs = |a: f64| {
        if a > 0.0 {
            Some(drift_unchecked(a, p))
        } else {
            None
        }
    };
    dormand_prince(rhs, a0, t_max, tol, floor, 1)
}

/// Integrates the log-corrected law `ȧ ln(a/ε) = λh_ex − 1/a`, whose energy
/// identity is checked by [`energy_balance_residual`].
///
/// The law is singular at `a = ε`; runs stop at the floor `2ε`. Every step
/// is sampled at interior points of the continuous extension so that the
/// trapezoid dissipation integral is resolved.
pub fn integrate_energy_form(p: &PhysicalParams, a0: f64, t_max: f64, tol: f64) -> Result<Trajectory, OdeError> {
    check_run(a0, t_max, tol)?;
    let floor = 2.0 * p.eps();
    if a0 <= floor {
        return Err(domain(
            "integrate_energy_form",
            format!("a0 = {a0} must exceed 2ε = {floor}"),
        ));
    }
    let rhs = |a: f64| energy_form_rhs(a, p);
    dormand_prince(rhs, a0, t_max, tol, floor, ENERGY_SAMPLES_PER_STEP)
}

fn energy_form_rhs(a: f64, p: &PhysicalParams) -> Option<f64> {
    let log_ratio = (a / p.eps()).ln();
    if a > 0.0 && log_ratio > 0.0 {
        Some((p.field() - 1.0 / a) / log_ratio)
    } else {
        None
    }
}

fn check_run(a0: f64, t_max: f64, tol: f64) -> Result<(), OdeError> {
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(domain("integrate", format!("a0 = {a0} must be > 0")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(domain("integrate", format!("t_max = {t_max} must be > 0")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(domain("integrate", format!("tol = {tol} must be > 0")));
    }
    Ok(())
}

/// Maximum over the samples of the defect in the energy-balance identity
///
/// `[π ln(a/ε) − πλh a] + ∫₀ᵗ π ln(a/ε) ȧ² ds = [π ln(a0/ε) − πλh a0]`,
///
/// with `ξ_m(0, y) ≈ −λy/2` and the dissipation integral by the trapezoid
/// rule on the samples. `ȧ` is taken from the log-corrected law, so the
/// trajectory must come from [`integrate_energy_form`].
pub fn energy_balance_residual(traj: &Trajectory, p: &PhysicalParams) -> Result<f64, OdeError> {
    let energy = |a: f64| PI * (a / p.eps()).ln() - PI * p.field() * a;
    let dissipation = |a: f64| {
        let log_ratio = (a / p.eps()).ln();
        let rate = (p.field() - 1.0 / a) / log_ratio;
        PI * log_ratio * rate * rate
    };
    let mut residual = 0.0_f64;
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let mut e0 = 0.0;
    for s in &traj.samples {
        if s.position.is_nan() || s.position <= p.eps() {
            return Err(domain(
                "energy_balance_residual",
                format!("position {} must exceed ε", s.position),
            ));
        }
        let d = dissipation(s.position);
        match prev {
            None => e0 = energy(s.position),
            Some((t_prev, d_prev)) => integral += 0.5 * (s.time - t_prev) * (d + d_prev),
        }
        prev = Some((s.time, d));
        residual = residual.max((energy(s.position) + integral - e0).abs());
    }
    Ok(residual)
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension coefficients of the DP5 pair.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct StepOutcome {
    y: f64,
    err: f64,
    k_last: f64,
    k: [f64; 7],
}

impl StepOutcome {
    /// Fourth-order interpolant at `y0 + θ·h`, `θ ∈ [0, 1]`.
    fn interpolate(&self, y0: f64, h: f64, theta: f64) -> f64 {
        let k = &self.k;
        let diff = self.y - y0;
        let b = h * k[0] - diff;
        let c = diff - h * k[6] - b;
        let d = h * (D1 * k[0] + D3 * k[2] + D4 * k[3] + D5 * k[4] + D6 * k[5] + D7 * k[6]);
        y0 + theta * (diff + (1.0 - theta) * (b + theta * (c + (1.0 - theta) * d)))
    }
}

/// One DP5(4) step from `(y, k1)`; `None` if any stage, including the
/// end-point evaluation, leaves the RHS domain.
fn dp_step<F: Fn(f64) -> Option<f64>>(rhs: &F, y: f64, k1: f64, h: f64) -> Option<StepOutcome> {
    let k2 = rhs(y + h * A21 * k1)?;
    let k3 = rhs(y + h * (A31 * k1 + A32 * k2))?;
    let k4 = rhs(y + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
    let k5 = rhs(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
    let k6 = rhs(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
    let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = rhs(y_new)?;
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    Some(StepOutcome {
        y: y_new,
        err: err.abs(),
        k_last: k7,
        k: [k1, k2, k3, k4, k5, k6, k7],
    })
}

/// Adaptive DP5(4) with a PI step controller and absolute local error `tol`.
///
/// Each accepted step records `per_step` samples, the interior ones taken
/// from the continuous extension.
fn dormand_prince<F: Fn(f64) -> Option<f64>>(
    rhs: F,
    a0: f64,
    t_max: f64,
    tol: f64,
    floor: f64,
    per_step: usize,
) -> Result<Trajectory, OdeError> {
    const SAFETY: f64 = 0.9;
    const EXP_ERR: f64 = 0.17;
    const EXP_PREV: f64 = 0.04;

    let mut samples = vec![Sample {
        time: 0.0,
        position: a0,
    }];
    let mut t = 0.0;
    let mut y = a0;
    let mut k1 = rhs(y).ok_or_else(|| domain("integrate", format!("a0 = {a0} outside the law's domain")))?;
    if y <= floor {
        return Ok(Trajectory {
            samples,
            terminal: Terminal::Annihilated,
            floor,
            rejected_steps: 0,
        });
    }
    let mut h = if k1 != 0.0 {
        (0.01 * y / k1.abs()).min(t_max)
    } else {
        0.01 * t_max
    };
    let mut err_prev = 1.0_f64;
    let mut rejected = 0;

    for _ in 0..MAX_STEPS {
        if t >= t_max {
            return Ok(Trajectory {
                samples,
                terminal: Terminal::ReachedHorizon,
                floor,
                rejected_steps: rejected,
            });
        }
        h = h.min(t_max - t);
        if h <= 1e-15 * t.max(f64::MIN_POSITIVE) || h < f64::MIN_POSITIVE {
            return Err(OdeError::StepSizeUnderflow { t, h });
        }
        let outcome = dp_step(&rhs, y, k1, h);
        let Some(step) = outcome else {
            rejected += 1;
            h *= 0.25;
            continue;
        };
        let err = step.err / tol;
        if err.is_nan() || err > 1.0 {
            rejected += 1;
            let factor = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.25
            };
            h *= factor;
            continue;
        }
        if step.y <= floor {
            let (tau, _) = bisect_crossing(&rhs, y, k1, h, floor);
            if per_step > 1 {
                if let Some(last) = dp_step(&rhs, y, k1, tau) {
                    push_interior(&mut samples, &last, t, y, tau, per_step);
                }
            }
            samples.push(Sample {
                time: t + tau,
                position: floor,
            });
            return Ok(Trajectory {
                samples,
                terminal: Terminal::Annihilated,
                floor,
                rejected_steps: rejected,
            });
        }
        push_interior(&mut samples, &step, t, y, h, per_step);
        t += h;
        y = step.y;
        k1 = step.k_last;
        samples.push(Sample { time: t, position: y });
        let err = err.max(1e-10);
        let factor = SAFETY * err.powf(-EXP_ERR) * err_prev.powf(EXP_PREV);
        h *= factor.clamp(0.2, 5.0);
        err_prev = err;
    }
    Err(OdeError::TooManySteps(MAX_STEPS))
}

fn push_interior(samples: &mut Vec<Sample>, step: &StepOutcome, t: f64, y: f64, h: f64, per_step: usize) {
    for j in 1..per_step {
        let theta = j as f64 / per_step as f64;
        samples.push(Sample {
            time: t + theta * h,
            position: step.interpolate(y, h, theta),
        });
    }
}

/// Locates `τ ∈ (0, h]` where the step solution `y(τ)` meets the floor.
fn bisect_crossing<F: Fn(f64) -> Option<f64>>(rhs: &F, y: f64, k1: f64, h: f64, floor: f64) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = h;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match dp_step(rhs, y, k1, mid) {
            Some(s) if s.y > floor => lo = mid,
            _ => hi = mid,
        }
    }
    (hi, floor)
}
