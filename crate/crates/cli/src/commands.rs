//! Single-run subcommands. Each returns a [`Report`] whose table is the CSV
//! output.

use nucleation::exit::{
    check_bounds, classify_regime, log_exit_probability, log_nucleation_probability, probe_sequence, GammaCoords,
    ParameterFamily,
};
use nucleation::field::{annihilation_experiment, ExperimentMode, GridSpec};
use nucleation::meissner::{boundary_lambda, first_critical_field, meissner_energy, solve_meissner, MeissnerDomain};
use nucleation::ode::annihilation_time;
use nucleation::sde::{estimate_exit_prob_with, DriftModel, NoiseParams};
use nucleation::PhysicalParams;

use crate::config::FieldSpec;
use crate::table::{format_float, Cell, Table};
use crate::{
    CliError, Common, DomainKind, ExitArgs, GlArgs, McArgs, MeissnerArgs, ModeKind, PhysArgs, RegimeArgs, Report,
};

fn physical(a: &PhysArgs) -> Result<PhysicalParams, CliError> {
    PhysicalParams::new(a.eps, a.alpha, a.lambda, a.h_ex.at(a.eps)).map_err(CliError::domain)
}

/// Columns identifying one exit-probability query; shared by `exit-prob` and
/// `mc-exit` so their rows join on `key`.
const KEY_COLUMNS: [&str; 7] = ["key", "eps", "alpha", "lambda", "h_ex", "beta", "z"];

fn key_cells(p: &PhysicalParams, beta: f64, z: f64) -> Vec<Cell> {
    let key = format!(
        "eps={};alpha={};lambda={};h_ex={};beta={};z={}",
        format_float(p.eps()),
        format_float(p.alpha()),
        format_float(p.lambda()),
        format_float(p.h_ex()),
        format_float(beta),
        format_float(z)
    );
    vec![
        key.into(),
        p.eps().into(),
        p.alpha().into(),
        p.lambda().into(),
        p.h_ex().into(),
        beta.into(),
        z.into(),
    ]
}

fn phys_params(report: Report, p: &PhysicalParams) -> Report {
    report
        .param("eps", p.eps())
        .param("alpha", p.alpha())
        .param("lambda", p.lambda())
        .param("h_ex", p.h_ex())
}

/// Columns: eps, alpha, lambda, h_ex, a0, a_hat, t, t_leading.
pub fn annihilate(a: &PhysArgs) -> Result<Report, CliError> {
    let p = physical(a)?;
    let t = annihilation_time(&p).map_err(CliError::domain)?;
    let mut table = Table::new(["eps", "alpha", "lambda", "h_ex", "a0", "a_hat", "t", "t_leading"]);
    table.push(vec![
        p.eps().into(),
        p.alpha().into(),
        p.lambda().into(),
        p.h_ex().into(),
        p.initial_distance().into(),
        p.a_hat().into(),
        t.into(),
        p.leading_annihilation_time().into(),
    ]);
    Ok(phys_params(Report::new("annihilate", table), &p))
}

fn resolve_exit(a: &ExitArgs) -> Result<(PhysicalParams, f64, f64), CliError> {
    let p = physical(&a.phys)?;
    let beta = a.beta.at(p.h_ex());
    let z = a.z.unwrap_or_else(|| p.initial_distance());
    Ok((p, beta, z))
}

/// Key columns, then a_hat, m_eps, n_eps, log_phi, phi, log_nucleation,
/// nucleation. The nucleation columns are `nan` when `ε^α > Â`.
pub fn exit_prob(a: &ExitArgs) -> Result<Report, CliError> {
    let (p, beta, z) = resolve_exit(a)?;
    let coords = GammaCoords::new(&p, beta).map_err(CliError::domain)?;
    let log_phi = log_exit_probability(z, &p, beta).map_err(CliError::domain)?;
    let (ln_n, n) = if p.initial_distance() <= p.a_hat() {
        let (ln_n, n) = log_nucleation_probability(&p, beta).map_err(CliError::domain)?;
        (ln_n.ln(), n)
    } else {
        (f64::NAN, f64::NAN)
    };
    let mut header: Vec<&str> = KEY_COLUMNS.to_vec();
    header.extend([
        "a_hat",
        "m_eps",
        "n_eps",
        "log_phi",
        "phi",
        "log_nucleation",
        "nucleation",
    ]);
    let mut table = Table::new(header);
    let mut row = key_cells(&p, beta, z);
    row.extend([
        p.a_hat().into(),
        coords.m_eps.into(),
        coords.n_eps.into(),
        log_phi.ln().into(),
        log_phi.value().into(),
        ln_n.into(),
        n.into(),
    ]);
    table.push(row);
    Ok(phys_params(Report::new("exit-prob", table), &p)
        .param("beta", beta)
        .param("z", z))
}

/// Key columns, then drift, trials, nucleated, horizon_exceeded, p_hat,
/// std_error, dt_base, max_time, seed.
pub fn mc_exit(a: &McArgs, common: &Common) -> Result<Report, CliError> {
    let (p, beta, z) = resolve_exit(&a.exit)?;
    let scale = p.a_hat() * p.a_hat() / beta;
    let dt_base = a.dt_base.unwrap_or(1e-3 * scale);
    let max_time = a.max_time.unwrap_or(1e4 * scale);
    let noise = NoiseParams::new(beta, common.seed, dt_base, max_time).map_err(CliError::domain)?;
    let model = if a.driftless {
        DriftModel::Driftless
    } else {
        DriftModel::Vortex
    };
    let stats = estimate_exit_prob_with(model, &p, &noise, z, a.trials, common.jobs).map_err(CliError::domain)?;
    let mut header: Vec<&str> = KEY_COLUMNS.to_vec();
    header.extend([
        "drift",
        "trials",
        "nucleated",
        "horizon_exceeded",
        "p_hat",
        "std_error",
        "dt_base",
        "max_time",
        "seed",
    ]);
    let mut table = Table::new(header);
    let mut row = key_cells(&p, beta, z);
    row.extend([
        if a.driftless { "driftless" } else { "vortex" }.into(),
        stats.trials.into(),
        stats.nucleated.into(),
        stats.horizon_exceeded.into(),
        stats.estimate.into(),
        stats.std_error.into(),
        dt_base.into(),
        max_time.into(),
        common.seed.to_string().into(),
    ]);
    table.push(row);
    Ok(phys_params(Report::new("mc-exit", table), &p)
        .param("beta", beta)
        .param("z", z)
        .param("trials", a.trials)
        .param("dt_base", dt_base)
        .param("max_time", max_time))
}

/// One row per probe `ε`: eps, h_ex, beta, beta_ln_h, log_nucleation,
/// nucleation, bound_failures, label, limit.
pub fn regime(a: &RegimeArgs) -> Result<Report, CliError> {
    let FieldSpec::Family(field) = a.field else {
        return Err(CliError::Usage(
            "--field must be a family (log:C, expsqrt:C or power:C:S)".into(),
        ));
    };
    let family = match (a.kappa, a.beta) {
        (Some(kappa), _) => ParameterFamily::constant_product(field, kappa),
        (None, Some(beta)) => ParameterFamily::custom(move |eps| field.h_ex(eps), move |_| beta),
        (None, None) => return Err(CliError::Usage("one of --kappa or --beta is required".into())),
    };
    let regime = classify_regime(&family, a.alpha).map_err(CliError::domain)?;
    let mut table = Table::new([
        "eps",
        "h_ex",
        "beta",
        "beta_ln_h",
        "log_nucleation",
        "nucleation",
        "bound_failures",
        "label",
        "limit",
    ]);
    for eps in probe_sequence() {
        let h = family.h_ex(eps);
        let beta = family.beta(eps);
        let p = PhysicalParams::new(eps, a.alpha, a.lambda, h).map_err(CliError::domain)?;
        let (ln_n, n, failures) = match log_nucleation_probability(&p, beta) {
            Ok((ln_n, n)) => {
                let report = check_bounds(&p, beta).map_err(CliError::domain)?;
                (ln_n.ln(), n, Cell::from(report.failures()))
            }
            Err(_) => (f64::NAN, f64::NAN, Cell::Float(f64::NAN)),
        };
        table.push(vec![
            eps.into(),
            h.into(),
            beta.into(),
            (beta * h.ln()).into(),
            ln_n.into(),
            n.into(),
            failures,
            regime.label.to_string().into(),
            regime.limit_value.into(),
        ]);
    }
    let field_text = FieldSpec::Family(field).to_string();
    let mut report = Report::new("regime", table)
        .param("field", field_text)
        .param("alpha", a.alpha)
        .param("lambda", a.lambda);
    report = match (a.kappa, a.beta) {
        (Some(k), _) => report.param("kappa", k),
        (_, Some(b)) => report.param("beta", b),
        _ => report,
    };
    Ok(report
        .summarize("label", regime.label.to_string())
        .summarize("limit", regime.limit_value))
}

/// Summary row: domain, n, nodes, iterations, residual, min_xi,
/// boundary_lambda, h_c1, energy. The second value is the nodal profile
/// (x, y, xi) when requested.
pub fn meissner(a: &MeissnerArgs) -> Result<(Report, Option<Table>), CliError> {
    let domain = match a.domain {
        DomainKind::Interval => MeissnerDomain::Interval { half_width: a.size },
        DomainKind::Rectangle => MeissnerDomain::Rectangle {
            lx: a.size,
            ly: a.height.unwrap_or(a.size),
        },
        DomainKind::Disk => MeissnerDomain::Disk { radius: a.size },
    };
    let sol = solve_meissner(domain, a.n).map_err(CliError::domain)?;
    let (nx, ny) = sol.shape();
    let probe = match a.domain {
        DomainKind::Interval => 0,
        DomainKind::Disk => nx - 1,
        DomainKind::Rectangle => nx / 2,
    };
    let lambda = boundary_lambda(&sol, probe).map_err(CliError::domain)?;
    let h_c1 = match a.eps {
        Some(eps) => first_critical_field(&sol, eps).map_err(CliError::domain)?,
        None => f64::NAN,
    };
    let energy = match a.h_ex {
        Some(h) => meissner_energy(&sol, h).map_err(CliError::domain)?.value(),
        None => f64::NAN,
    };
    let min_xi = sol.values().iter().copied().fold(f64::INFINITY, f64::min);
    let name = match a.domain {
        DomainKind::Interval => "interval",
        DomainKind::Rectangle => "rectangle",
        DomainKind::Disk => "disk",
    };
    let mut table = Table::new([
        "domain",
        "n",
        "nodes",
        "iterations",
        "residual",
        "min_xi",
        "boundary_lambda",
        "h_c1",
        "energy",
    ]);
    table.push(vec![
        name.into(),
        a.n.into(),
        (nx * ny).into(),
        sol.iterations().into(),
        sol.residual().into(),
        min_xi.into(),
        lambda.into(),
        h_c1.into(),
        energy.into(),
    ]);
    let profile = a.profile.as_ref().map(|_| {
        let mut t = Table::new(["x", "y", "xi"]);
        for (i, &v) in sol.values().iter().enumerate() {
            let (x, y) = sol.node(i);
            t.push(vec![x.into(), y.into(), v.into()]);
        }
        t
    });
    let report = Report::new("meissner", table)
        .param("domain", name)
        .param("size", a.size)
        .param("height", a.height.unwrap_or(a.size))
        .param("n", a.n);
    Ok((report, profile))
}

/// Diagnostic trace: time, energy, vortices, total_degree, min_modulus,
/// max_modulus. The summary carries t_ann, predicted, dt and steps.
pub fn gl_run(a: &GlArgs, common: &Common) -> Result<Report, CliError> {
    let mode = match a.mode {
        ModeKind::Dipole => ExperimentMode::Dipole,
        ModeKind::Boundary => ExperimentMode::Boundary,
    };
    let run = annihilation_experiment(a.eps, a.alpha, GridSpec::unit_square(a.grid), mode, common.jobs)
        .map_err(CliError::domain)?;
    let mut table = Table::new([
        "time",
        "energy",
        "vortices",
        "total_degree",
        "min_modulus",
        "max_modulus",
    ]);
    for d in &run.trace {
        table.push(vec![
            d.time.into(),
            d.energy.into(),
            d.vortices.into(),
            i64::from(d.total_degree).into(),
            d.min_modulus.into(),
            d.max_modulus.into(),
        ]);
    }
    Ok(Report::new("gl-run", table)
        .param("eps", a.eps)
        .param("alpha", a.alpha)
        .param("grid", a.grid)
        .param(
            "mode",
            match a.mode {
                ModeKind::Dipole => "dipole",
                ModeKind::Boundary => "boundary",
            },
        )
        .summarize("t_ann", run.t_ann)
        .summarize("predicted", run.predicted)
        .summarize("dt", run.dt)
        .summarize("steps", run.steps))
}
