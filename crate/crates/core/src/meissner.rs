//! Meissner potential: `−Δξ + ξ + 1 = 0` in the domain, `ξ = 0` on its boundary.
//!
//! Second-order finite differences on an interval, a rectangle (5-point
//! stencil) or a disk (radial finite volumes), solved by conjugate gradients.
//! The solution supplies the boundary coefficient `λ = −2 ∂_ν ξ`, the first
//! critical field and the Meissner energy.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeissnerError {
    #[error("{operation}: {message}")]
    Domain { operation: &'static str, message: String },
    #[error("conjugate gradients stopped after {iterations} iterations with residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
}

fn domain(operation: &'static str, message: impl Into<String>) -> MeissnerError {
    MeissnerError::Domain {
        operation,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeissnerDomain {
    /// `[−L, L]`.
    Interval { half_width: f64 },
    /// `[0, Lx] × [0, Ly]`.
    Rectangle { lx: f64, ly: f64 },
    /// Disk of the given radius, solved in the radial variable.
    Disk { radius: f64 },
}

/// Target max-norm residual of the discrete equation.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MeissnerSolution {
    domain: MeissnerDomain,
    /// Node counts along each axis; `ny = 1` for one-dimensional grids.
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    values: Vec<f64>,
    boundary: Vec<bool>,
    residual: f64,
    iterations: usize,
}

impl MeissnerSolution {
    pub fn domain(&self) -> MeissnerDomain {
        self.domain
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Grid spacing along the first axis (the radius for the disk).
    pub fn spacing(&self) -> f64 {
        self.hx
    }

    /// Row-major over `(j, i)`: index `j·nx + i`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_boundary(&self, index: usize) -> bool {
        self.boundary[index]
    }

    /// Coordinates of a node: `x` for the interval, `(x, y)` for the
    /// rectangle, `r` for the disk.
    pub fn node(&self, index: usize) -> (f64, f64) {
        let (i, j) = (index % self.nx, index / self.nx);
        match self.domain {
            MeissnerDomain::Interval { half_width } => (-half_width + i as f64 * self.hx, 0.0),
            MeissnerDomain::Rectangle { .. } => (i as f64 * self.hx, j as f64 * self.hy),
            MeissnerDomain::Disk { .. } => (i as f64 * self.hx, 0.0),
        }
    }

    /// Max-norm residual of the discrete equation at the returned values.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Discrete Laplacian at interior nodes, linearly extrapolated to the
    /// boundary along the first axis and, for rectangles, the second.
    pub fn discrete_laplacian(&self) -> Vec<f64> {
        let op = Operator::new(self);
        let mut lap = vec![0.0; self.values.len()];
        for (k, l) in lap.iter_mut().enumerate() {
            if !self.boundary[k] {
                *l = op.laplacian_at(&self.values, k);
            }
        }
        let (nx, ny) = (self.nx, self.ny);
        match self.domain {
            MeissnerDomain::Interval { .. } => {
                lap[0] = 2.0 * lap[1] - lap[2];
                lap[nx - 1] = 2.0 * lap[nx - 2] - lap[nx - 3];
            }
            MeissnerDomain::Disk { .. } => {
                lap[nx - 1] = 2.0 * lap[nx - 2] - lap[nx - 3];
            }
            MeissnerDomain::Rectangle { .. } => {
                for j in 1..ny - 1 {
                    let row = j * nx;
                    lap[row] = 2.0 * lap[row + 1] - lap[row + 2];
                    lap[row + nx - 1] = 2.0 * lap[row + nx - 2] - lap[row + nx - 3];
                }
                for i in 0..nx {
                    lap[i] = 2.0 * lap[nx + i] - lap[2 * nx + i];
                    let top = (ny - 1) * nx + i;
                    lap[top] = 2.0 * lap[top - nx] - lap[top - 2 * nx];
                }
            }
        }
        lap
    }
}

/// The symmetric positive definite operator of the discrete problem.
///
/// Interval and rectangle rows are `−Δ_h ξ + ξ`; disk rows are the radial
/// finite-volume balance multiplied by the cell volume so the matrix stays
/// symmetric.
struct Operator {
    domain: MeissnerDomain,
    nx: usize,
    hx: f64,
    hy: f64,
}

impl Operator {
    fn new(sol: &MeissnerSolution) -> Self {
        Operator {
            domain: sol.domain,
            nx: sol.nx,

            hx: sol.hx,
            hy: sol.hy,
        }
    }

    fn disk_volume(&self, i: usize) -> f64 {
        let h = self.hx;
        if i == 0 {
            h * h / 8.0
        } else {
            i as f64 * h * h
        }
    }

    /// Discrete Laplacian at an interior node.
    fn laplacian_at(&self, v: &[f64], k: usize) -> f64 {
        match self.domain {
            MeissnerDomain::Interval { .. } => (v[k - 1] - 2.0 * v[k] + v[k + 1]) / (self.hx * self.hx),
            MeissnerDomain::Rectangle { .. } => {
                let nx = self.nx;
                (v[k - 1] - 2.0 * v[k] + v[k + 1]) / (self.hx * self.hx)
                    + (v[k - nx] - 2.0 * v[k] + v[k + nx]) / (self.hy * self.hy)
            }
            MeissnerDomain::Disk { .. } => {
                let outer = (k as f64 + 0.5) * (v[k + 1] - v[k]);
                let inner = if k == 0 {
                    0.0
                } else {
                    (k as f64 - 0.5) * (v[k] - v[k - 1])
                };
                (outer - inner) / self.disk_volume(k)
            }
        }
    }

    /// Row weight turning the PDE residual into the symmetric row.
    fn weight(&self, k: usize) -> f64 {
        match self.domain {
            MeissnerDomain::Disk { .. } => self.disk_volume(k),
            _ => 1.0,
        }
    }

    /// `y = A x` over the unknowns; boundary entries of `x` are ignored.
    fn apply(&self, x: &[f64], y: &mut [f64], interior: &[bool]) {
        for k in 0..x.len() {
            y[k] = if interior[k] {
                self.weight(k) * (x[k] - self.laplacian_at(x, k))
            } else {
                0.0
            };
        }
    }

    /// Max row sum of `|A|` in PDE scaling.
    fn norm(&self) -> f64 {
        match self.domain {
            MeissnerDomain::Interval { .. } | MeissnerDomain::Disk { .. } => 1.0 + 4.0 / (self.hx * self.hx),
            MeissnerDomain::Rectangle { .. } => 1.0 + 4.0 / (self.hx * self.hx) + 4.0 / (self.hy * self.hy),
        }
    }
}

pub fn solve_meissner(domain: MeissnerDomain, n: usize) -> Result<MeissnerSolution, MeissnerError> {
    if n < 16 {
        return Err(domain_error_n(n));
    }
    let (nx, ny, hx, hy) = match domain {
        MeissnerDomain::Interval { half_width } => {
            check_length(half_width, "half_width")?;
            (n + 1, 1, 2.0 * half_width / n as f64, 0.0)
        }
        MeissnerDomain::Rectangle { lx, ly } => {
            check_length(lx, "lx")?;
            check_length(ly, "ly")?;
            // n intervals along the longer side, matching spacing on the other.
            let long = lx.max(ly);
            let count = |len: f64| ((len / long) * n as f64).round().max(4.0) as usize;
            let (cx, cy) = (count(lx), count(ly));
            (cx + 1, cy + 1, lx / cx as f64, ly / cy as f64)
        }
        MeissnerDomain::Disk { radius } => {
            check_length(radius, "radius")?;
            (n + 1, 1, radius / n as f64, 0.0)
        }
    };
    let total = nx * ny;
    let boundary: Vec<bool> = (0..total)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            match domain {
                MeissnerDomain::Interval { .. } => i == 0 || i == nx - 1,
                MeissnerDomain::Disk { .. } => i == nx - 1,
                MeissnerDomain::Rectangle { .. } => i == 0 || j == 0 || i == nx - 1 || j == ny - 1,
            }
        })
        .collect();
    let mut sol = MeissnerSolution {
        domain,
        nx,
        ny,
        hx,
        hy,
        values: vec![0.0; total],
        boundary,
        residual: f64::INFINITY,
        iterations: 0,
    };
    conjugate_gradients(&mut sol)?;
    Ok(sol)
}

fn domain_error_n(n: usize) -> MeissnerError {
    domain("solve_meissner", format!("resolution n = {n} must be at least 16"))
}

fn check_length(value: f64, name: &str) -> Result<(), MeissnerError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(domain("solve_meissner", format!("{name} = {value} must be > 0")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Max-norm PDE residual `|−Δ_h ξ + ξ + 1|` over interior nodes.
fn pde_residual(op: &Operator, v: &[f64], interior: &[bool]) -> f64 {
    (0..v.len())
        .filter(|&k| interior[k])
        .map(|k| (v[k] - op.laplacian_at(v, k) + 1.0).abs())
        .fold(0.0, f64::max)
}

fn conjugate_gradients(sol: &mut MeissnerSolution) -> Result<(), MeissnerError> {
    let op = Operator::new(sol);
    let interior: Vec<bool> = sol.boundary.iter().map(|b| !b).collect();
    let len = sol.values.len();
    let diag: Vec<f64> = (0..len)
        .map(|k| {
            if !interior[k] {
                return 1.0;
            }
            match op.domain {
                MeissnerDomain::Interval { .. } => 1.0 + 2.0 / (op.hx * op.hx),
                MeissnerDomain::Rectangle { .. } => 1.0 + 2.0 / (op.hx * op.hx) + 2.0 / (op.hy * op.hy),
                MeissnerDomain::Disk { .. } => {
                    let inner = if k == 0 { 0.0 } else { k as f64 - 0.5 };
                    op.disk_volume(k) + (k as f64 + 0.5 + inner)
                }
            }
        })
        .collect();
    let rhs: Vec<f64> = (0..len)
        .map(|k| if interior[k] { -op.weight(k) } else { 0.0 })
        .collect();

    let x = &mut sol.values;
    let mut ax = vec![0.0; len];
    let mut r = rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = 20 * len + 1000;
    let floor = 4.0 * f64::EPSILON * op.norm();
    let mut best = f64::INFINITY;
    let mut stalled = 0;

    for iter in 1..=max_iter {
        op.apply(&p, &mut ax, &interior);
        let pap = dot(&p, &ax);
        if pap.is_nan() || pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for k in 0..len {
            x[k] += alpha * p[k];
            r[k] -= alpha * ax[k];
        }
        if iter % 25 == 0 || rz < 1e-40 {
            // Refresh from the true residual to avoid drift in the recurrence.
            op.apply(x, &mut ax, &interior);
            for k in 0..len {
                r[k] = rhs[k] - ax[k];
            }
            let res = pde_residual(&op, x, &interior);
            if res <= RESIDUAL_TOLERANCE {
                sol.residual = res;
                sol.iterations = iter;
                return Ok(());
            }
            let x_max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if res < 0.5 * best {
                best = res;
                stalled = 0;
            } else {
                stalled += 1;
            }
            if res <= 16.0 * floor * x_max || stalled > 40 {
                sol.iterations = iter;
                return polish(sol, &op, &interior, &rhs, &diag, floor);
            }
        }
        for k in 0..len {
            z[k] = r[k] / diag[k];
        }
        let rz_new = dot(&r, &z);
        let b = rz_new / rz;
        rz = rz_new;
        for k in 0..len {
            p[k] = z[k] + b * p[k];
        }
    }
    sol.iterations = max_iter;
    polish(sol, &op, &interior, &rhs, &diag, floor)
}

/// Red-black Gauss–Seidel sweeps that remove the rounding noise left by the
/// Krylov iteration; keeps the iterate with the smallest residual.
fn polish(
    sol: &mut MeissnerSolution,
    op: &Operator,
    interior: &[bool],
    rhs: &[f64],
    diag: &[f64],
    floor: f64,
) -> Result<(), MeissnerError> {
    const SWEEPS: usize = 50;
    let nx = sol.nx;
    let colour = |k: usize| match sol.domain {
        MeissnerDomain::Rectangle { .. } => (k % nx + k / nx) % 2,
        _ => k % 2,
    };
    let mut best_values = sol.values.clone();
    let mut best = pde_residual(op, &sol.values, interior);
    let x = &mut sol.values;
    for _ in 0..SWEEPS {
        if best <= RESIDUAL_TOLERANCE {
            break;
        }
        for c in 0..2 {
            for k in 0..x.len() {
                if interior[k] && colour(k) == c {
                    let row = op.weight(k) * (x[k] - op.laplacian_at(x, k));
                    x[k] += (rhs[k] - row) / diag[k];
                }
            }
        }
        let res = pde_residual(op, x, interior);
        if res < best {
            best = res;
            best_values.copy_from_slice(x);
        }
    }
    sol.values = best_values;
    sol.residual = best;
    let x_max = sol.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if best <= RESIDUAL_TOLERANCE.max(floor * x_max) {
        Ok(())
    } else {
        Err(MeissnerError::NoConvergence {
            iterations: sol.iterations,
            residual: best,
        })
    }
}

/// `−2 ∂_ν ξ` at a boundary node, with `ν` the inward normal and a three-point
/// one-sided difference. Rectangle corners have no normal and are rejected.
pub fn boundary_lambda(sol: &MeissnerSolution, index: usize) -> Result<f64, MeissnerError> {
    if index >= sol.values.len() {
        return Err(domain("boundary_lambda", format!("index {index} out of range")));
    }
    if !sol.boundary[index] {
        return Err(domain("boundary_lambda", format!("node {index} is interior")));
    }
    let v = &sol.values;
    let (nx, ny) = (sol.nx, sol.ny);
    let (i, j) = (index % nx, index / nx);
    // (stride to the first inward neighbour, spacing)
    let (stride, h): (isize, f64) = match sol.domain {
        MeissnerDomain::Interval { .. } => {
            if i == 0 {
                (1, sol.hx)
            } else {
                (-1, sol.hx)
            }
        }
        MeissnerDomain::Disk { .. } => (-1, sol.hx),
        MeissnerDomain::Rectangle { .. } => {
            let on_x = i == 0 || i == nx - 1;
            let on_y = j == 0 || j == ny - 1;
            if on_x && on_y {
                return Err(domain("boundary_lambda", "rectangle corners have no normal"));
            }
            if i == 0 {
                (1, sol.hx)
            } else if i == nx - 1 {
                (-1, sol.hx)
            } else if j == 0 {
                (nx as isize, sol.hy)
            } else {
                (-(nx as isize), sol.hy)
            }
        }
    };
    let at = |steps: isize| v[(index as isize + steps * stride) as usize];
    let derivative = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
    Ok(-2.0 * derivative)
}

/// `h_c1 = |ln ε| / (2 max|ξ|)`.
pub fn first_critical_field(sol: &MeissnerSolution, eps: f64) -> Result<f64, MeissnerError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain("first_critical_field", format!("eps = {eps} outside (0, 1)")));
    }
    let max_abs = sol
        .values
        .iter()
        .zip(&sol.boundary)
        .filter(|(_, b)| !**b)
        .fold(0.0_f64, |m, (v, _)| m.max(v.abs()));
    Ok(-eps.ln() / (2.0 * max_abs))
}

/// Meissner energy `h_ex² ∫ ½|∇ξ|² + ½|Δξ − 1|²`, evaluated with the PDE
/// substitution `Δξ − 1 = ξ` and with the discrete Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeissnerEnergy {
    pub via_pde: f64,
    pub via_laplacian: f64,
}

impl MeissnerEnergy {
    pub fn value(&self) -> f64 {
        self.via_pde
    }
}

/// Midpoint quadrature over grid cells with centred cell gradients.
pub fn meissner_energy(sol: &MeissnerSolution, h_ex: f64) -> Result<MeissnerEnergy, MeissnerError> {
    if !h_ex.is_finite() {
        return Err(domain("meissner_energy", format!("h_ex = {h_ex} must be finite")));
    }
    let lap = sol.discrete_laplacian();
    let shifted: Vec<f64> = lap.iter().map(|l| l - 1.0).collect();
    let v = &sol.values;
    let (nx, ny, hx, hy) = (sol.nx, sol.ny, sol.hx, sol.hy);
    let mut pde = 0.0;
    let mut direct = 0.0;
    match sol.domain {
        MeissnerDomain::Interval { .. } | MeissnerDomain::Disk { .. } => {
            let disk = matches!(sol.domain, MeissnerDomain::Disk { .. });
            for i in 0..nx - 1 {
                let grad = (v[i + 1] - v[i]) / hx;
                let mid = 0.5 * (v[i] + v[i + 1]);
                let mid_lap = 0.5 * (shifted[i] + shifted[i + 1]);
                let measure = if disk {
                    2.0 * std::f64::consts::PI * (i as f64 + 0.5) * hx * hx
                } else {
                    hx
                };
                pde += measure * 0.5 * (grad * grad + mid * mid);
                direct += measure * 0.5 * (grad * grad + mid_lap * mid_lap);
            }
        }
        MeissnerDomain::Rectangle { .. } => {
            for j in 0..ny - 1 {
                for i in 0..nx - 1 {
                    let k = j * nx + i;
                    let c = [k, k + 1, k + nx, k + nx + 1];
                    let gx = (v[c[1]] - v[c[0]] + v[c[3]] - v[c[2]]) / (2.0 * hx);
                    let gy = (v[c[2]] - v[c[0]] + v[c[3]] - v[c[1]]) / (2.0 * hy);
                    let mid = 0.25 * c.iter().map(|&q| v[q]).sum::<f64>();
                    let mid_lap = 0.25 * c.iter().map(|&q| shifted[q]).sum::<f64>();
                    let grad2 = gx * gx + gy * gy;
                    pde += hx * hy * 0.5 * (grad2 + mid * mid);
                    direct += hx * hy * 0.5 * (grad2 + mid_lap * mid_lap);
                }
            }
        }
    }
    let scale = h_ex * h_ex;
    Ok(MeissnerEnergy {
        via_pde: scale * pde,
        via_laplacian: scale * direct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(half_width: f64, n: usize) -> MeissnerSolution {
        solve_meissner(MeissnerDomain::Interval { half_width }, n).unwrap()
    }

    fn cosh_solution(x: f64, l: f64) -> f64 {
        x.cosh() / l.cosh() - 1.0
    }

    fn bessel_i0(r: f64) -> f64 {
        let q = 0.25 * r * r;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    fn interval_error(n: usize) -> f64 {
        let sol = interval(1.0, n);
        (0..sol.values().len())
            .map(|k| (sol.values()[k] - cosh_solution(sol.node(k).0, 1.0)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn interval_centre_value() {
        let sol = interval(1.0, 256);
        let centre = sol.values()[128];
        assert!((centre - (1.0 / 1f64.cosh() - 1.0)).abs() < 1e-5);
        assert!((centre + 0.351_945_7).abs() < 1e-5);
        assert!(sol.residual() <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn maximum_principle() {
        for domain in [
            MeissnerDomain::Interval { half_width: 3.0 },
            MeissnerDomain::Rectangle { lx: 2.0, ly: 1.0 },
            MeissnerDomain::Disk { radius: 1.5 },
        ] {
            let sol = solve_meissner(domain, 64).unwrap();
            for (k, v) in sol.values().iter().enumerate() {
                if sol.is_boundary(k) {
                    assert_eq!(*v, 0.0);
                } else {
                    assert!(*v < 0.0 && *v > -1.0, "{domain:?} node {k}: {v}");
                }
            }
        }
    }

    #[test]
    fn second_order_convergence() {
        let errors: Vec<f64> = [32, 64, 128].into_iter().map(interval_error).collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn disk_matches_bessel_series() {
        let sol = solve_meissner(MeissnerDomain::Disk { radius: 1.0 }, 256).unwrap();
        let i0_one = bessel_i0(1.0);
        let err = (0..sol.values().len())
            .map(|k| (sol.values()[k] - (bessel_i0(sol.node(k).0) / i0_one - 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-5, "{err}");
        assert!((sol.values()[0] - (1.0 / i0_one - 1.0)).abs() < 2e-5);
    }

    #[test]
    fn lambda_on_interval() {
        let sol = interval(1.0, 512);
        let expected = 2.0 * 1f64.tanh();
        assert!((boundary_lambda(&sol, 0).unwrap() - expected).abs() < 1e-4);
        assert!((boundary_lambda(&sol, 512).unwrap() - expected).abs() < 1e-4);
        assert!((expected - 1.523_188_3).abs() < 1e-7);
        assert!(boundary_lambda(&sol, 100).is_err());
        let wide = interval(12.0, 2048);
        assert!((boundary_lambda(&wide, 0).unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn lambda_positive_everywhere() {
        let rect = solve_meissner(MeissnerDomain::Rectangle { lx: 2.0, ly: 1.0 }, 64).unwrap();
        let (nx, ny) = rect.shape();
        for k in 0..rect.values().len() {
            let (i, j) = (k % nx, k / nx);
            let corner = (i == 0 || i == nx - 1) && (j == 0 || j == ny - 1);
            if rect.is_boundary(k) && !corner {
                assert!(boundary_lambda(&rect, k).unwrap() > 0.0);
            }
        }
        assert!(boundary_lambda(&rect, 0).is_err());
        let disk = solve_meissner(MeissnerDomain::Disk { radius: 1.0 }, 64).unwrap();
        assert!(boundary_lambda(&disk, 64).unwrap() > 0.0);
    }

    #[test]
    fn lambda_stable_under_refinement() {
        let coarse = interval(1.0, 128);
        let fine = interval(1.0, 256);
        let exact = 2.0 * 1f64.tanh();
        let e1 = (boundary_lambda(&coarse, 0).unwrap() - exact).abs();
        let e2 = (boundary_lambda(&fine, 0).unwrap() - exact).abs();
        assert!(e2 < e1 && e1 < 1e-3);
    }

    #[test]
    fn critical_field_examples() {
        let sol = interval(1.0, 512);
        let h = first_critical_field(&sol, 1e-3).unwrap();
        assert!((h - 1e-3f64.ln().abs() / (2.0 * (1.0 - 1.0 / 1f64.cosh()))).abs() < 1e-3);
        assert!((h - 9.813_67).abs() < 1e-3);
        assert!(first_critical_field(&sol, 1e-6).unwrap() > h);
        let wide = interval(4.0, 512);
        assert!(first_critical_field(&wide, 1e-3).unwrap() < h);
        assert!(first_critical_field(&sol, 1.0).is_err());
    }

    #[test]
    fn energy_examples() {
        let sol = interval(1.0, 512);
        assert_eq!(meissner_energy(&sol, 0.0).unwrap().value(), 0.0);
        let e1 = meissner_energy(&sol, 1.0).unwrap();
        let e2 = meissner_energy(&sol, 2.0).unwrap();
        assert_eq!(e2.via_pde, 4.0 * e1.via_pde);

        // ∫ ½ ξ'² + ½ ξ² over [−1, 1] by composite Simpson on the closed form.
        let f = |x: f64| {
            let d = x.sinh() / 1f64.cosh();
            let v = cosh_solution(x, 1.0);
            0.5 * (d * d + v * v)
        };
        let m = 20_000;
        let h = 2.0 / m as f64;
        let mut oracle = f(-1.0) + f(1.0);
        for k in 1..m {
            oracle += if k % 2 == 1 { 4.0 } else { 2.0 } * f(-1.0 + k as f64 * h);
        }
        oracle *= h / 3.0;
        assert!((e1.via_pde - oracle).abs() < 1e-5, "{} vs {oracle}", e1.via_pde);
        assert!((e1.via_laplacian - e1.via_pde).abs() < 1e-4);
    }

    #[test]
    fn rectangle_energy_routes_agree() {
        let sol = solve_meissner(MeissnerDomain::Rectangle { lx: 1.0, ly: 1.0 }, 64).unwrap();
        let e = meissner_energy(&sol, 1.0).unwrap();
        assert!((e.via_laplacian - e.via_pde).abs() <= 1e-3 * e.via_pde);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(solve_meissner(MeissnerDomain::Interval { half_width: 1.0 }, 8).is_err());
        assert!(solve_meissner(MeissnerDomain::Disk { radius: -1.0 }, 32).is_err());
    }
}
