//! Gauge-free Ginzburg–Landau flow `∂_t u = Δu + u(1 − |u|²)/ε²` on a square
//! grid with zero-Neumann boundary, plus vortex diagnostics.
//!
//! The explicit step uses the 5-point Laplacian with ghost-node reflection.
//! [`gl_energy`] is the discrete energy whose weighted gradient that step
//! follows: edge differences (boundary edges at half weight) and trapezoid
//! node weights for the potential.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("unresolved configuration: {0}")]
    Resolution(String),
    #[error("unstable step dt = {dt:e} exceeds {limit:e}")]
    Stability { dt: f64, limit: f64 },
    #[error("{operation}: {message}")]
    Domain { operation: &'static str, message: String },
    #[error("no annihilation before the horizon t = {horizon:e}")]
    HorizonExceeded { horizon: f64 },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Square grid `[0, L]²` with `n × n` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn unit_square(n: usize) -> Self {
        GridSpec { n, length: 1.0 }
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    fn validate(&self) -> Result<(), FieldError> {
        if self.n < 8 || !(self.length > 0.0 && self.length.is_finite()) {
            return Err(FieldError::Domain {
                operation: "grid",
                message: format!(
                    "need n >= 8 and length > 0, got n = {} length = {}",
                    self.n, self.length
                ),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    n: usize,
    h: f64,
    eps: f64,
    /// Row-major, index `j·n + i` for the node `(i h, j h)`.
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn from_fn(grid: GridSpec, eps: f64, f: impl Fn(f64, f64) -> Complex64) -> Result<Self, FieldError> {
        grid.validate()?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(FieldError::Domain {
                operation: "field",
                message: format!("eps = {eps} must be > 0"),
            });
        }
        let h = grid.spacing();
        let n = grid.n;
        let values = (0..n * n).map(|k| f((k % n) as f64 * h, (k / n) as f64 * h)).collect();
        Ok(ComplexField { n, h, eps, values })
    }

    pub fn constant(grid: GridSpec, eps: f64, value: Complex64) -> Result<Self, FieldError> {
        ComplexField::from_fn(grid, eps, |_, _| value)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.n + i]
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|u| u.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.values.iter().map(|u| u.norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Vortex profile `tanh(s/(√2 ε))`.
pub fn profile(s: f64, eps: f64) -> f64 {
    (s / (SQRT_2 * eps)).tanh()
}

fn vortex_factor(x: f64, y: f64, centre: (f64, f64), degree: i32, eps: f64) -> Complex64 {
    let (dx, dy) = (x - centre.0, y - centre.1);
    let r = dx.hypot(dy);
    let theta = dy.atan2(dx) * degree as f64;
    Complex64::from_polar(profile(r, eps), theta)
}

fn check_resolved(grid: GridSpec, eps: f64, separation: f64) -> Result<(), FieldError> {
    grid.validate()?;
    let h = grid.spacing();
    if eps < 3.0 * h {
        return Err(FieldError::Resolution(format!("eps = {eps} below 3h = {}", 3.0 * h)));
    }
    if separation < 6.0 * h {
        return Err(FieldError::Resolution(format!(
            "vortex distance {separation} below 6h = {}",
            6.0 * h
        )));
    }
    Ok(())
}

/// A single vortex of the given degree at `centre`.
pub fn init_single_vortex(
    grid: GridSpec,
    eps: f64,
    centre: (f64, f64),
    degree: i32,
) -> Result<ComplexField, FieldError> {
    check_resolved(grid, eps, 6.0 * grid.spacing())?;
    ComplexField::from_fn(grid, eps, |x, y| vortex_factor(x, y, centre, degree, eps))
}

/// `+1` and `−1` vortices at `centre ∓ (ε^α/2, 0)`.
pub fn init_dipole(grid: GridSpec, eps: f64, alpha: f64, centre: (f64, f64)) -> Result<ComplexField, FieldError> {
    let d = eps.powf(alpha);
    check_resolved(grid, eps, d)?;
    let (plus, minus) = dipole_sites(eps, alpha, centre);
    ComplexField::from_fn(grid, eps, |x, y| {
        vortex_factor(x, y, plus, 1, eps) * vortex_factor(x, y, minus, -1, eps)
    })
}

pub fn dipole_sites(eps: f64, alpha: f64, centre: (f64, f64)) -> ((f64, f64), (f64, f64)) {
    let half = 0.5 * eps.powf(alpha);
    ((centre.0 - half, centre.1), (centre.0 + half, centre.1))
}

/// A `+1` vortex at distance `ε^α` above the middle of the bottom edge times
/// a `−1` image reflected across that edge, so that the field is even in the
/// edge and meets the zero-Neumann condition there from the start.
pub fn init_boundary_vortex(grid: GridSpec, eps: f64, alpha: f64) -> Result<ComplexField, FieldError> {
    let d = eps.powf(alpha);
    check_resolved(grid, eps, d)?;
    let site = boundary_site(grid, eps, alpha);
    let image = (site.0, -site.1);
    ComplexField::from_fn(grid, eps, |x, y| {
        vortex_factor(x, y, site, 1, eps) * vortex_factor(x, y, image, -1, eps)
    })
}

pub fn boundary_site(grid: GridSpec, eps: f64, alpha: f64) -> (f64, f64) {
    (0.5 * grid.length, eps.powf(alpha))
}

/// Stable explicit step bound `min(h², ε²)/4`.
pub fn stability_limit(field: &ComplexField) -> f64 {
    (field.h * field.h).min(field.eps * field.eps) / 4.0
}

/// One forward-Euler step on the current rayon pool.
pub fn step(field: &ComplexField, dt: f64) -> Result<ComplexField, FieldError> {
    let mut out = field.clone();
    step_into(field, &mut out, dt)?;
    Ok(out)
}

/// As [`step`], writing into `out`, which must have the same shape.
pub fn step_into(field: &ComplexField, out: &mut ComplexField, dt: f64) -> Result<(), FieldError> {
    let limit = stability_limit(field);
    if !(dt > 0.0 && dt <= limit) {
        return Err(FieldError::Stability { dt, limit });
    }
    let n = field.n;
    let inv_h2 = 1.0 / (field.h * field.h);
    let inv_eps2 = 1.0 / (field.eps * field.eps);
    let u = &field.values;
    out.values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let down = if j == 0 { 1 } else { j - 1 };
        let up = if j == n - 1 { n - 2 } else { j + 1 };
        for (i, slot) in row.iter_mut().enumerate() {
            let left = if i == 0 { 1 } else { i - 1 };
            let right = if i == n - 1 { n - 2 } else { i + 1 };
            let c = u[j * n + i];
            let lap = (u[j * n + left] + u[j * n + right] + u[down * n + i] + u[up * n + i] - 4.0 * c) * inv_h2;
            let reaction = c * ((1.0 - c.norm_sqr()) * inv_eps2);
            *slot = c + (lap + reaction) * dt;
        }
    });
    Ok(())
}

fn row_sums(n: usize, row: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    // Rows in parallel, summed in fixed order.
    let partial: Vec<f64> = (0..n).into_par_iter().map(row).collect();
    partial.iter().sum()
}

/// Discrete `∫ ½|∇u|² + (1 − |u|²)²/(4ε²)`.
pub fn gl_energy(field: &ComplexField) -> f64 {
    let n = field.n;
    let u = &field.values;
    let h2 = field.h * field.h;
    let inv_4eps2 = 1.0 / (4.0 * field.eps * field.eps);
    let weight = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    row_sums(n, |j| {
        let wj = weight(j);
        let mut sum = 0.0;
        for i in 0..n {
            let c = u[j * n + i];
            let defect = 1.0 - c.norm_sqr();
            sum += wj * weight(i) * h2 * defect * defect * inv_4eps2;
            // Edge terms: |Δu|²/h² times the edge's area h².
            if i + 1 < n {
                sum += 0.5 * wj * (u[j * n + i + 1] - c).norm_sqr();
            }
            if j + 1 < n {
                sum += 0.5 * weight(i) * (u[(j + 1) * n + i] - c).norm_sqr();
            }
        }
        sum
    })
}

/// Jacobian `J = ∂_x u × ∂_y u` at plaquette centres, `(n−1) × (n−1)`
/// row-major.
pub fn jacobian_field(field: &ComplexField) -> Vec<f64> {
    let n = field.n;
    let m = n - 1;
    let u = &field.values;
    let h = field.h;
    let mut out = vec![0.0; m * m];
    out.par_chunks_mut(m).enumerate().for_each(|(j, row)| {
        for (i, slot) in row.iter_mut().enumerate() {
            let (a, b, c, d) = (
                u[j * n + i],
                u[j * n + i + 1],
                u[(j + 1) * n + i],
                u[(j + 1) * n + i + 1],
            );
            let ux = (b - a + d - c) / (2.0 * h);
            let uy = (c - a + d - b) / (2.0 * h);
            *slot = ux.re * uy.im - ux.im * uy.re;
        }
    });
    out
}

/// `(∫J, ∫|J|)` by the midpoint rule on plaquettes.
pub fn jacobian_integrals(field: &ComplexField) -> (f64, f64) {
    let m = field.n - 1;
    let h2 = field.h * field.h;
    let jac = jacobian_field(field);
    let signed = row_sums(m, |j| jac[j * m..(j + 1) * m].iter().sum::<f64>()) * h2;
    let total = row_sums(m, |j| jac[j * m..(j + 1) * m].iter().map(|v| v.abs()).sum::<f64>()) * h2;
    (signed, total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexObservation {
    /// Plaquette centre.
    pub position: (f64, f64),
    pub degree: i32,
}

/// Corner modulus below which a winding plaquette counts as a vortex core.
pub const CORE_MODULUS: f64 = 0.7;

fn wrapped(d: f64) -> f64 {
    let mut w = d % (2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    } else if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Plaquettes whose wrapped phase circulation is `±2π` and whose smallest
/// corner modulus is below [`CORE_MODULUS`], in row-major order.
pub fn detect_vortices(field: &ComplexField) -> Vec<VortexObservation> {
    let n = field.n;
    let u = &field.values;
    let h = field.h;
    let rows: Vec<Vec<VortexObservation>> = (0..n - 1)
        .into_par_iter()
        .map(|j| {
            let mut found = Vec::new();
            for i in 0..n - 1 {
                let corners = [
                    u[j * n + i],
                    u[j * n + i + 1],
                    u[(j + 1) * n + i + 1],
                    u[(j + 1) * n + i],
                ];
                let min_mod = corners.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
                if min_mod >= CORE_MODULUS {
                    continue;
                }
                let circulation: f64 = (0..4)
                    .map(|q| wrapped(corners[(q + 1) % 4].arg() - corners[q].arg()))
                    .sum();
                let degree = (circulation / (2.0 * PI)).round() as i32;
                if degree == 1 || degree == -1 {
                    found.push(VortexObservation {
                        position: ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h),
                        degree,
                    });
                }
            }
            found
        })
        .collect();
    rows.into_iter().flatten().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentMode {
    Dipole,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub time: f64,
    pub energy: f64,
    pub vortices: usize,
    pub total_degree: i32,
    pub min_modulus: f64,
    pub max_modulus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilationRun {
    pub t_ann: f64,
    /// `ε^{2α}|ln ε|/2`.
    pub predicted: f64,
    pub dt: f64,
    pub steps: u64,
    pub trace: Vec<Diagnostic>,
}

/// Diagnostics per predicted annihilation time.
pub const SAMPLES_PER_PREDICTED: usize = 512;
/// Horizon in units of the predicted time.
pub const HORIZON_FACTOR: f64 = 20.0;

/// Evolves the initial configuration until no vortex is detected and
/// `min|u| ≥ 1/2`, sampling diagnostics every `1/512` of `ε^{2α}|ln ε|/2`.
/// Runs on a dedicated pool of `jobs` threads; results do not depend on it.
pub fn annihilation_experiment(
    eps: f64,
    alpha: f64,
    grid: GridSpec,
    mode: ExperimentMode,
    jobs: usize,
) -> Result<AnnihilationRun, FieldError> {
    if !(eps > 0.0 && eps < 1.0) || !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FieldError::Domain {
            operation: "annihilation_experiment",
            message: format!("need 0 < eps < 1 and 0 < alpha <= 1, got {eps}, {alpha}"),
        });
    }
    let initial = match mode {
        ExperimentMode::Dipole => {
            let c = 0.5 * grid.length;
            init_dipole(grid, eps, alpha, (c, c))?
        }
        ExperimentMode::Boundary => init_boundary_vortex(grid, eps, alpha)?,
    };
    run_until_annihilated(initial, alpha, jobs)
}

/// The evolution loop of [`annihilation_experiment`] from an arbitrary
/// initial field; `α` only sets the predicted time scale.
pub fn run_until_annihilated(initial: ComplexField, alpha: f64, jobs: usize) -> Result<AnnihilationRun, FieldError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FieldError::Domain {
            operation: "run_until_annihilated",
            message: format!("alpha = {alpha} outside (0, 1]"),
        });
    }
    if jobs == 0 {
        return Err(FieldError::Pool("jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| FieldError::Pool(e.to_string()))?;
    let eps = initial.eps;
    pool.install(|| evolve(initial, eps, alpha))
}

fn diagnose(field: &ComplexField, time: f64) -> Diagnostic {
    let vortices = detect_vortices(field);
    Diagnostic {
        time,
        energy: gl_energy(field),
        vortices: vortices.len(),
        total_degree: vortices.iter().map(|v| v.degree).sum(),
        min_modulus: field.min_modulus(),
        max_modulus: field.max_modulus(),
    }
}

fn evolve(initial: ComplexField, eps: f64, alpha: f64) -> Result<AnnihilationRun, FieldError> {
    let predicted = eps.powf(2.0 * alpha) * -eps.ln() / 2.0;
    let interval = predicted / SAMPLES_PER_PREDICTED as f64;
    let dt_cap = (initial.h * initial.h).min(eps * eps) / 8.0;
    let substeps = (interval / dt_cap).ceil() as u64;
    let dt = interval / substeps as f64;
    let max_samples = (HORIZON_FACTOR * SAMPLES_PER_PREDICTED as f64) as u64;

    let mut current = initial;
    let mut next = current.clone();
    let mut trace = vec![diagnose(&current, 0.0)];
    let mut steps = 0;
    let annihilated = |d: &Diagnostic| d.vortices == 0 && d.min_modulus >= 0.5;
    for sample in 1..=max_samples {
        let start = current.clone();
        for _ in 0..substeps {
            step_into(&current, &mut next, dt)?;
            std::mem::swap(&mut current, &mut next);
        }
        let time = sample as f64 * interval;
        let d = diagnose(&current, time);
        if !annihilated(&d) {
            steps += substeps;
            trace.push(d);
            continue;
        }
        current = start;
        let t0 = (sample - 1) as f64 * interval;
        for k in 1..=substeps {
            step_into(&current, &mut next, dt)?;
            std::mem::swap(&mut current, &mut next);
            steps += 1;
            let d = diagnose(&current, if k == substeps { time } else { t0 + k as f64 * dt });
            if annihilated(&d) {
                trace.push(d);
                return Ok(AnnihilationRun {
                    t_ann: d.time,
                    predicted,
                    dt,
                    steps,
                    trace,
                });
            }
        }
        unreachable!("annihilation detected at the sample but not within its substeps");
    }
    Err(FieldError::HorizonExceeded {
        horizon: HORIZON_FACTOR * predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::unit_square(n)
    }

    #[test]
    fn constant_fields_under_step() {
        let g = grid(32);
        let one = ComplexField::constant(g, 0.1, Complex64::new(1.0, 0.0)).unwrap();
        let dt = stability_limit(&one);
        assert_eq!(step(&one, dt).unwrap(), one);
        let zero = ComplexField::constant(g, 0.1, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(step(&zero, dt).unwrap(), zero);
        let half = ComplexField::constant(g, 0.1, Complex64::new(0.5, 0.0)).unwrap();
        let stepped = step(&half, dt).unwrap();
        let expected = 0.5 + dt * 0.5 * 0.75 / 0.01;
        assert!(stepped
            .values()
            .iter()
            .all(|u| (u.re - expected).abs() < 1e-15 && u.im == 0.0));
        assert!(step(&half, 1.01 * dt).is_err());
    }

    #[test]
    fn energy_of_constants() {
        let g = grid(33);
        let one = ComplexField::constant(g, 0.1, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(gl_energy(&one), 0.0);
        let zero = ComplexField::constant(g, 0.1, Complex64::new(0.0, 0.0)).unwrap();
        assert!((gl_energy(&zero) - 1.0 / (4.0 * 0.01)).abs() < 1e-12);
    }

    #[test]
    fn single_vortex_energy_follows_log_law() {
        let g = grid(512);
        let eps = 0.006;
        let field = init_single_vortex(g, eps, (0.5, 0.5), 1).unwrap();
        let ratio = gl_energy(&field) / (PI * (0.5 / eps).ln());
        assert!((0.8..=1.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn phase_only_field_has_small_jacobian() {
        let g = grid(64);
        let field = ComplexField::from_fn(g, 0.1, |x, y| Complex64::from_polar(1.0, x * x + 2.0 * y)).unwrap();
        let jac = jacobian_field(&field);
        assert!(jac.iter().all(|v| v.abs() < 1e-3));
        let flat = ComplexField::constant(g, 0.1, Complex64::new(0.3, 0.4)).unwrap();
        assert!(jacobian_field(&flat).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dipole_initial_state() {
        let g = grid(128);
        let (eps, alpha) = (0.05, 0.5);
        let field = init_dipole(g, eps, alpha, (0.5, 0.5)).unwrap();
        let found = detect_vortices(&field);
        assert_eq!(found.len(), 2, "{found:?}");
        let (plus, minus) = dipole_sites(eps, alpha, (0.5, 0.5));
        let h = g.spacing();
        for v in &found {
            let site = if v.degree == 1 { plus } else { minus };
            assert!((v.position.0 - site.0).abs() <= h && (v.position.1 - site.1).abs() <= h);
        }
        assert_eq!(found.iter().map(|v| v.degree).sum::<i32>(), 0);
        let (signed, total) = jacobian_integrals(&field);
        assert!(signed.abs() <= 0.05 * PI, "{signed}");
        assert!(total >= PI, "{total}");
        for site in [plus, minus] {
            let (i, j) = ((site.0 / h).round() as usize, (site.1 / h).round() as usize);
            let r = ((i as f64 * h - site.0).hypot(j as f64 * h - site.1)).max(0.0);
            assert!(field.at(i, j).norm() <= profile(h, eps).max(profile(r, eps)) + 1e-15);
        }
    }

    #[test]
    fn boundary_vortex_initial_state() {
        let g = grid(128);
        let (eps, alpha) = (0.05, 0.5);
        let field = init_boundary_vortex(g, eps, alpha).unwrap();
        let found = detect_vortices(&field);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].degree, 1);
        let site = boundary_site(g, eps, alpha);
        assert!((found[0].position.0 - site.0).abs() <= g.spacing());
        assert!((found[0].position.1 - site.1).abs() <= g.spacing());
        let (signed, _) = jacobian_integrals(&field);
        assert!((signed - PI).abs() <= 0.1 * PI, "{signed}");
        // The construction is even under reflection across the bottom edge.
        let reflected = ComplexField::from_fn(g, eps, |x, y| {
            let site = boundary_site(g, eps, alpha);
            vortex_factor(x, -y, site, 1, eps) * vortex_factor(x, -y, (site.0, -site.1), -1, eps)
        })
        .unwrap();
        for (a, b) in field.values().iter().zip(reflected.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        // Hence zero normal derivative on the edge: rows 1 and -1 coincide.
        let n = g.n;
        for i in 0..n {
            let below = reflected.at(i, 1);
            assert!((field.at(i, 1) - below).norm() < 1e-12);
        }
    }

    #[test]
    fn detection_is_resolution_independent() {
        // Refinement by 2 and 4; the core sits off the nodes of every grid.
        for n in [65, 129, 257] {
            let field = init_single_vortex(grid(n), 0.06, (0.4037, 0.5521), 1).unwrap();
            let total: i32 = detect_vortices(&field).iter().map(|v| v.degree).sum();
            assert_eq!(total, 1, "n = {n}");
        }
        let flat = ComplexField::constant(grid(32), 0.1, Complex64::new(1.0, 0.0)).unwrap();
        assert!(detect_vortices(&flat).is_empty());
    }

    #[test]
    fn resolution_checks() {
        assert!(init_dipole(grid(32), 0.05, 0.5, (0.5, 0.5)).is_err());
        assert!(init_dipole(grid(256), 0.001, 0.9, (0.5, 0.5)).is_err());
    }

    #[test]
    fn evolution_dissipates_and_respects_modulus() {
        let g = grid(64);
        let mut field = init_dipole(g, 0.1, 0.5, (0.5, 0.5)).unwrap();
        let dt = (g.spacing().powi(2)).min(0.01) / 8.0;
        let bound = field.max_modulus().max(1.0) + 1e-10;
        let mut energy = gl_energy(&field);
        for _ in 0..400 {
            field = step(&field, dt).unwrap();
            let e = gl_energy(&field);
            assert!(e <= energy + 1e-10, "{e} > {energy}");
            assert!(field.max_modulus() <= bound);
            energy = e;
        }
    }

    #[test]
    fn dipole_annihilates_with_conserved_degree() {
        let run = annihilation_experiment(0.1, 0.5, grid(64), ExperimentMode::Dipole, 1).unwrap();
        assert!(run.t_ann > 0.0);
        assert!(run.trace.iter().all(|d| d.total_degree == 0));
        assert!(run.trace.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-10));
        let last = run.trace.last().unwrap();
        assert_eq!(last.vortices, 0);
        assert!(last.min_modulus >= 0.5);
    }

    #[test]
    fn refinement_changes_little() {
        let coarse = annihilation_experiment(0.1, 0.5, grid(64), ExperimentMode::Dipole, 1).unwrap();
        let fine = annihilation_experiment(0.1, 0.5, grid(127), ExperimentMode::Dipole, 1).unwrap();
        let change = (fine.t_ann / coarse.t_ann - 1.0).abs();
        assert!(change < 0.1, "{} vs {}", coarse.t_ann, fine.t_ann);
    }

    #[test]
    fn workers_do_not_change_runs() {
        let one = annihilation_experiment(0.1, 0.5, grid(64), ExperimentMode::Dipole, 1).unwrap();
        let three = annihilation_experiment(0.1, 0.5, grid(64), ExperimentMode::Dipole, 3).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn boundary_vortex_exits() {
        let run = annihilation_experiment(0.1, 0.5, grid(64), ExperimentMode::Boundary, 1).unwrap();
        let first = run.trace.first().unwrap();
        assert_eq!(first.total_degree, 1);
        let drops = run
            .trace
            .windows(2)
            .filter(|w| w[1].total_degree != w[0].total_degree)
            .count();
        assert_eq!(drops, 1);
    }

    #[test]
    fn wrapping() {
        assert!((wrapped(1.5 * PI) + 0.5 * PI).abs() < 1e-15);
        assert!((wrapped(-1.5 * PI) - 0.5 * PI).abs() < 1e-15);
        assert_eq!(wrapped(PI), PI);
    }
}
