//! Config-driven parameter sweeps.
//!
//! Layout of the output directory:
//!
//! - `config.cfg`: canonical copy of the configuration;
//! - `cells/cell-NNNNNN.csv` and `.done`: one row per cell and its completion
//!   marker, each written atomically;
//! - `index.csv`: all cell rows in index order;
//! - `summary.json`: version, seed, cell count and the configuration.
//!
//! Cells with a marker are read back instead of recomputed, so an
//! interrupted sweep resumes where it stopped. Outputs do not depend on the
//! number of workers.

use std::path::{Path, PathBuf};

use nucleation::exit::{log_exit_probability, log_nucleation_probability};
use nucleation::field::{annihilation_experiment, ExperimentMode, GridSpec};
use nucleation::ode::annihilation_time;
use nucleation::sde::{estimate_exit_prob, NoiseParams};
use nucleation::PhysicalParams;
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::config::{CellParams, SweepConfig};
use crate::report::json_cell;
use crate::table::{Cell, Table};
use crate::{version, write_atomic, CliError};

pub const CELL_COLUMNS: [&str; 22] = [
    "index",
    "seed",
    "eps",
    "alpha",
    "lambda",
    "h_ex",
    "beta",
    "trials",
    "grid",
    "status",
    "a_hat",
    "t_ann",
    "t_leading",
    "log_phi",
    "phi",
    "log_nucleation",
    "nucleation",
    "p_hat",
    "std_error",
    "horizon_exceeded",
    "gl_t_ann",
    "gl_steps",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOutcome {
    pub cells: usize,
    pub computed: usize,
    pub resumed: usize,
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of cell `index` under the global `seed`.
pub fn cell_seed(seed: u64, index: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ index as u64)
}

pub fn cell_path(outputs: &Path, index: usize) -> PathBuf {
    outputs.join("cells").join(format!("cell-{index:06}.csv"))
}

fn marker_path(outputs: &Path, index: usize) -> PathBuf {
    outputs.join("cells").join(format!("cell-{index:06}.done"))
}

pub fn run_sweep(cfg: &SweepConfig, max_cells: usize) -> Result<SweepOutcome, CliError> {
    let cells = cfg.check_size(max_cells)?;
    if cfg.jobs == 0 {
        return Err(CliError::Usage("jobs must be at least 1".into()));
    }
    let canonical = cfg.render();
    let config_path = cfg.outputs.join("config.cfg");
    match std::fs::read_to_string(&config_path) {
        Ok(existing) if existing != canonical => {
            return Err(CliError::Usage(format!(
                "{} holds a different sweep; choose another outputs directory",
                cfg.outputs.display()
            )))
        }
        Ok(_) => {}
        Err(_) => write_atomic(&config_path, canonical.as_bytes())?,
    }
    std::fs::create_dir_all(cfg.outputs.join("cells")).map_err(crate::io)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let results: Vec<(Table, bool)> = pool.install(|| {
        (0..cells)
            .into_par_iter()
            .map(|i| process_cell(cfg, i))
            .collect::<Result<_, _>>()
    })?;

    let resumed = results.iter().filter(|(_, r)| *r).count();
    let mut index = Table::new(CELL_COLUMNS);
    for (table, _) in results {
        index.extend(table)?;
    }
    write_atomic(&cfg.outputs.join("index.csv"), index.to_csv().as_bytes())?;
    write_atomic(&cfg.outputs.join("summary.json"), summary_json(cfg, cells).as_bytes())?;
    Ok(SweepOutcome {
        cells,
        computed: cells - resumed,
        resumed,
    })
}

fn process_cell(cfg: &SweepConfig, index: usize) -> Result<(Table, bool), CliError> {
    let path = cell_path(&cfg.outputs, index);
    let marker = marker_path(&cfg.outputs, index);
    if marker.exists() {
        if let Ok(bytes) = std::fs::read(&path) {
            let table = Table::read_from(bytes.as_slice())?;
            if table.header() == CELL_COLUMNS && table.rows().len() == 1 {
                return Ok((table, true));
            }
        }
    }
    let mut table = Table::new(CELL_COLUMNS);
    table.push(cell_row(index, &cfg.cell(index), cell_seed(cfg.seed, index)));
    write_atomic(&path, table.to_csv().as_bytes())?;
    write_atomic(&marker, b"done\n")?;
    Ok((table, false))
}

/// Evaluates one cell. Failures of individual analyses are reported in the
/// `status` column and leave their columns `nan`.
pub fn cell_row(index: usize, c: &CellParams, seed: u64) -> Vec<Cell> {
    let nan = || Cell::Float(f64::NAN);
    let h_ex = c.h_ex.at(c.eps);
    let mut row: Vec<Cell> = vec![
        index.into(),
        seed.to_string().into(),
        c.eps.into(),
        c.alpha.into(),
        c.lambda.into(),
        h_ex.into(),
        nan(),
        c.trials.into(),
        c.grid.into(),
    ];
    let mut status: Vec<String> = Vec::new();
    let mut results: Vec<Cell> = (0..12).map(|_| nan()).collect();

    match PhysicalParams::new(c.eps, c.alpha, c.lambda, h_ex) {
        Err(e) => status.push(e.to_string()),
        Ok(p) => {
            results[0] = p.a_hat().into();
            results[2] = p.leading_annihilation_time().into();
            match annihilation_time(&p) {
                Ok(t) => results[1] = t.into(),
                Err(e) => status.push(e.to_string()),
            }
            if let Some(spec) = c.beta {
                let beta = spec.at(h_ex);
                row[6] = beta.into();
                exit_columns(&p, beta, c.trials, seed, &mut results, &mut status);
            }
        }
    }
    if c.grid > 0 {
        match annihilation_experiment(c.eps, c.alpha, GridSpec::unit_square(c.grid), ExperimentMode::Dipole, 1) {
            Ok(run) => {
                results[10] = run.t_ann.into();
                results[11] = run.steps.into();
            }
            Err(e) => status.push(e.to_string()),
        }
    }
    row.push(
        if status.is_empty() {
            "ok".to_string()
        } else {
            status.join("; ")
        }
        .into(),
    );
    row.extend(results);
    row
}

fn exit_columns(p: &PhysicalParams, beta: f64, trials: u64, seed: u64, results: &mut [Cell], status: &mut Vec<String>) {
    let z = p.initial_distance();
    match log_exit_probability(z, p, beta) {
        Ok(lp) => {
            results[3] = lp.ln().into();
            results[4] = lp.value().into();
        }
        Err(e) => {
            status.push(e.to_string());
            return;
        }
    }
    match log_nucleation_probability(p, beta) {
        Ok((ln_n, n)) => {
            results[5] = ln_n.ln().into();
            results[6] = n.into();
        }
        Err(e) => status.push(e.to_string()),
    }
    if trials == 0 {
        return;
    }
    let scale = p.a_hat() * p.a_hat() / beta;
    let stats = NoiseParams::new(beta, seed, 1e-3 * scale, 1e4 * scale)
        .map_err(|e| e.to_string())
        .and_then(|n| estimate_exit_prob(p, &n, z, trials).map_err(|e| e.to_string()));
    match stats {
        Ok(s) => {
            results[7] = s.estimate.into();
            results[8] = s.std_error.into();
            results[9] = s.horizon_exceeded.into();
        }
        Err(e) => status.push(e),
    }
}

fn summary_json(cfg: &SweepConfig, cells: usize) -> String {
    let mut config = Map::new();
    let floats = |xs: &[f64]| Value::Array(xs.iter().map(|x| json_cell(&Cell::Float(*x))).collect());
    config.insert("eps".into(), floats(&cfg.eps));
    config.insert("alpha".into(), floats(&cfg.alpha));
    config.insert("lambda".into(), floats(&cfg.lambda));
    config.insert(
        "beta".into(),
        Value::Array(cfg.beta.iter().map(|b| Value::String(b.to_string())).collect()),
    );
    config.insert(
        "h_ex".into(),
        Value::Array(cfg.h_ex.iter().map(|h| Value::String(h.to_string())).collect()),
    );
    config.insert("trials".into(), Value::from(cfg.trials.clone()));
    config.insert("grid".into(), Value::from(cfg.grid.clone()));
    let mut root = Map::new();
    root.insert("version".into(), Value::String(version()));
    root.insert("command".into(), Value::String("sweep".into()));
    root.insert("parameters".into(), Value::Object(config));
    root.insert("seed".into(), Value::from(cfg.seed));
    let mut results = Map::new();
    results.insert("cells".into(), Value::from(cells));
    results.insert("index".into(), Value::String("index.csv".into()));
    root.insert("results".into(), Value::Object(results));
    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("json serialization");
    text.push('\n');
    text
}
