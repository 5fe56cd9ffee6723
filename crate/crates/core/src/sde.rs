//! Monte Carlo exit statistics for the perturbed vortex law
//! `da = (λh/|ln ε| − 1/(|ln ε| a)) dt + √(2β) dW`, absorbed at 0 and at `Â`.
//!
//! Paths use Euler–Maruyama with steps shrunk near the origin and a
//! Brownian-bridge check for barrier crossings inside a step. Each path draws
//! from its own ChaCha8 stream, selected by the path index, so results do not
//! depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::ode::drift_unchecked;
use crate::params::{require, ParamError, PhysicalParams};

/// Per-path step cap; longer paths report [`ExitLabel::HorizonExceeded`].
pub const MAX_PATH_STEPS: u64 = 100_000_000;

/// Near-origin step factor: `dt ≤ κ a² |ln ε|`.
pub const NEAR_ORIGIN_KAPPA: f64 = 0.1;

/// Positions at or below this fraction of `min(a0, Â)` count as annihilated.
const ABSORPTION_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdeError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("start point a0 = {a0} outside [0, {a_hat}]")]
    StartPoint { a0: f64, a_hat: f64 },
    #[error("trials = {0} must be at least 100")]
    TooFewTrials(u64),
    #[error("jobs must be at least 1")]
    NoWorkers,
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    beta: f64,
    seed: u64,
    dt_base: f64,
    max_time: f64,
}

impl NoiseParams {
    pub fn new(beta: f64, seed: u64, dt_base: f64, max_time: f64) -> Result<Self, ParamError> {
        require(beta > 0.0 && beta.is_finite(), "beta", beta, "beta > 0")?;
        require(dt_base > 0.0 && dt_base.is_finite(), "dt_base", dt_base, "dt_base > 0")?;
        require(max_time > 0.0, "max_time", max_time, "max_time > 0")?;
        Ok(NoiseParams {
            beta,
            seed,
            dt_base,
            max_time,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt_base(&self) -> f64 {
        self.dt_base
    }

    pub fn max_time(&self) -> f64 {
        self.max_time
    }

    pub fn with_dt_base(self, dt_base: f64) -> Result<Self, ParamError> {
        NoiseParams::new(self.beta, self.seed, dt_base, self.max_time)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseParams { seed, ..self }
    }
}

/// Drift used by the simulator. `Driftless` is the pure-diffusion control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftModel {
    #[default]
    Vortex,
    Driftless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExitLabel {
    Annihilated,
    Nucleated,
    HorizonExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitOutcome {
    pub label: ExitLabel,
    pub exit_time: f64,
    pub path_steps: u64,
    /// 0 for annihilated paths, at least `Â` for nucleated ones.
    pub final_position: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitStats {
    pub trials: u64,
    pub nucleated: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub horizon_exceeded: u64,
}

impl ExitStats {
    pub fn from_counts(trials: u64, nucleated: u64, horizon_exceeded: u64) -> Self {
        let estimate = nucleated as f64 / trials as f64;
        ExitStats {
            trials,
            nucleated,
            estimate,
            std_error: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
            horizon_exceeded,
        }
    }
}

/// Simulates one path of the vortex SDE from `a0`.
pub fn simulate_path(p: &PhysicalParams, n: &NoiseParams, a0: f64, path_index: u64) -> Result<ExitOutcome, SdeError> {
    simulate_path_with(DriftModel::Vortex, p, n, a0, path_index)
}

pub fn simulate_path_with(
    model: DriftModel,
    p: &PhysicalParams,
    n: &NoiseParams,
    a0: f64,
    path_index: u64,
) -> Result<ExitOutcome, SdeError> {
    check_start(p, a0)?;
    Ok(run_path(model, p, n, a0, path_index))
}

fn check_start(p: &PhysicalParams, a0: f64) -> Result<(), SdeError> {
    let a_hat = p.a_hat();
    if !(a0 >= 0.0 && a0 <= a_hat) || a0.is_infinite() {
        return Err(SdeError::StartPoint { a0, a_hat });
    }
    Ok(())
}

fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

fn run_path(model: DriftModel, p: &PhysicalParams, n: &NoiseParams, a0: f64, path_index: u64) -> ExitOutcome {
    let a_hat = p.a_hat();
    let outcome = |label, exit_time, path_steps, final_position| ExitOutcome {
        label,
        exit_time,
        path_steps,
        final_position,
    };
    if a0 <= 0.0 {
        return outcome(ExitLabel::Annihilated, 0.0, 0, 0.0);
    }
    if a0 >= a_hat {
        return outcome(ExitLabel::Nucleated, 0.0, 0, a0);
    }

    let mut rng = path_rng(n.seed, path_index);
    let beta = n.beta;
    let sigma = (2.0 * beta).sqrt();
    let floor = ABSORPTION_FLOOR * a0.min(a_hat);
    let near_origin = NEAR_ORIGIN_KAPPA * p.log_eps();
    let mut a = a0;
    let mut t = 0.0;
    let mut steps = 0u64;

    while steps < MAX_PATH_STEPS {
        if t >= n.max_time {
            return outcome(ExitLabel::HorizonExceeded, n.max_time, steps, a);
        }
        let mut dt = n.dt_base.min(n.max_time - t);
        let drift = match model {
            DriftModel::Vortex => {
                dt = dt.min(near_origin * a * a);
                drift_unchecked(a, p)
            }
            DriftModel::Driftless => 0.0,
        };
        let z: f64 = rng.sample(StandardNormal);
        let a_new = a + drift * dt + sigma * dt.sqrt() * z;
        t = (t + dt).min(n.max_time);
        steps += 1;

        if a_new <= floor {
            return outcome(ExitLabel::Annihilated, t, steps, 0.0);
        }
        if a_new >= a_hat {
            return outcome(ExitLabel::Nucleated, t, steps, a_new);
        }
        let p_origin = (-a * a_new / (beta * dt)).exp();
        let p_top = (-(a_hat - a) * (a_hat - a_new) / (beta * dt)).exp();
        if p_origin + p_top > 0.0 {
            let u: f64 = rng.random();
            if u < p_origin {
                return outcome(ExitLabel::Annihilated, t, steps, 0.0);
            }
            if u < p_origin + p_top {
                return outcome(ExitLabel::Nucleated, t, steps, a_hat);
            }
        }
        a = a_new;
    }
    outcome(ExitLabel::HorizonExceeded, t, steps, a)
}

/// Monte Carlo estimate of the nucleation probability from `a0` on the
/// current rayon pool.
pub fn estimate_exit_prob(p: &PhysicalParams, n: &NoiseParams, a0: f64, trials: u64) -> Result<ExitStats, SdeError> {
    check_estimate(p, a0, trials)?;
    Ok(tally(DriftModel::Vortex, p, n, a0, trials))
}

/// As [`estimate_exit_prob`], on a dedicated pool of `jobs` threads. The
/// result is identical for every `jobs`.
pub fn estimate_exit_prob_with(
    model: DriftModel,
    p: &PhysicalParams,
    n: &NoiseParams,
    a0: f64,
    trials: u64,
    jobs: usize,
) -> Result<ExitStats, SdeError> {
    check_estimate(p, a0, trials)?;
    if jobs == 0 {
        return Err(SdeError::NoWorkers);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SdeError::Pool(e.to_string()))?;
    Ok(pool.install(|| tally(model, p, n, a0, trials)))
}

fn check_estimate(p: &PhysicalParams, a0: f64, trials: u64) -> Result<(), SdeError> {
    if trials < 100 {
        return Err(SdeError::TooFewTrials(trials));
    }
    check_start(p, a0)
}

fn tally(model: DriftModel, p: &PhysicalParams, n: &NoiseParams, a0: f64, trials: u64) -> ExitStats {
    let (nucleated, horizon) = (0..trials)
        .into_par_iter()
        .map(|i| match run_path(model, p, n, a0, i).label {
            ExitLabel::Nucleated => (1u64, 0u64),
            ExitLabel::HorizonExceeded => (0, 1),
            ExitLabel::Annihilated => (0, 0),
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    ExitStats::from_counts(trials, nucleated, horizon)
}

/// Comparison Bessel dimension `1 + 1/(β|ln ε|)` as stated for the model.
pub fn bessel_dimension(p: &PhysicalParams, n: &NoiseParams) -> f64 {
    1.0 + 1.0 / (n.beta * p.log_eps())
}
