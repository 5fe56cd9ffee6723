use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use nucleation_cli::{Cell, Table};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nucleation"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn table(args: &[&str]) -> (String, Table) {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    let t = Table::from_csv(&out).unwrap();
    (out, t)
}

fn float(t: &Table, row: usize, col: &str) -> f64 {
    t.get(row, col)
        .and_then(Cell::as_f64)
        .unwrap_or_else(|| panic!("column {col}"))
}

fn assert_round_trip(text: &str) {
    let t = Table::from_csv(text).unwrap();
    assert_eq!(t.to_csv(), text, "re-emitted csv differs");
}

#[test]
fn annihilate_leading_order_row() {
    let (text, t) = table(&["annihilate", "--eps", "1e-3", "--alpha", "0.5", "--lambda", "0"]);
    assert_eq!(t.rows().len(), 1);
    let expected = 1e-3 * (1e3f64).ln() / 2.0;
    let got = float(&t, 0, "t");
    assert!((got - expected).abs() <= 1e-15 * expected, "{got} vs {expected}");
    assert!((got - 3.45388e-3).abs() < 5e-9);
    assert_eq!(t.get(0, "a_hat"), Some(&Cell::Float(f64::INFINITY)));
    assert!(text.contains(",inf,"));
    assert_round_trip(&text);
}

#[test]
fn exit_prob_at_the_origin_is_zero() {
    let (text, t) = table(&["exit-prob", "--eps", "1e-4", "--beta", "0.1", "--z", "0"]);
    assert_eq!(float(&t, 0, "phi"), 0.0);
    assert_eq!(float(&t, 0, "log_phi"), f64::NEG_INFINITY);
    assert!(text.contains(",-inf,"));
    assert_round_trip(&text);
}

#[test]
fn exit_prob_at_the_nucleation_distance_is_one() {
    let (_, t) = table(&["exit-prob", "--eps", "1e-4", "--beta", "0.1", "--z", "1e-1"]);
    let phi = float(&t, 0, "phi");
    assert!(phi > 0.0 && phi < 1.0);
    let a_hat = float(&t, 0, "a_hat");
    let (_, t) = table(&[
        "exit-prob",
        "--eps",
        "1e-4",
        "--beta",
        "0.1",
        "--z",
        &format!("{a_hat:e}"),
    ]);
    assert_eq!(float(&t, 0, "phi"), 1.0);
}

#[test]
fn mc_and_analytic_rows_join_on_key() {
    let params = ["--eps", "1e-4", "--h-ex", "10", "--beta", "kappa:1", "--z", "0.05"];
    let mut a = vec!["exit-prob"];
    a.extend(params);
    let (text_a, exact) = table(&a);
    let mut m = vec!["mc-exit", "--trials", "2000", "--seed", "5"];
    m.extend(params);
    let (text_m, mc) = table(&m);
    assert_round_trip(&text_a);
    assert_round_trip(&text_m);
    assert_eq!(exact.header()[0], "key");
    assert_eq!(mc.header()[0], "key");
    assert_eq!(exact.get(0, "key"), mc.get(0, "key"));
    let phi = float(&exact, 0, "phi");
    let p_hat = float(&mc, 0, "p_hat");
    let se = float(&mc, 0, "std_error");
    assert!((p_hat - phi).abs() <= 5.0 * se, "{p_hat} vs {phi} (se {se})");
}

#[test]
fn mc_output_does_not_depend_on_jobs() {
    let base = [
        "mc-exit", "--eps", "1e-4", "--h-ex", "10", "--beta", "0.2", "--trials", "1000", "--seed", "9",
    ];
    let mut one = base.to_vec();
    one.extend(["--jobs", "1"]);
    let mut four = base.to_vec();
    four.extend(["--jobs", "4"]);
    assert_eq!(run(&one).1, run(&four).1);
}

#[test]
fn regime_rows_and_label() {
    let (text, t) = table(&["regime", "--field", "expsqrt:1", "--kappa", "0.25"]);
    assert_eq!(t.rows().len(), 13);
    assert_round_trip(&text);
    for r in 0..t.rows().len() {
        assert_eq!(t.get(r, "label"), Some(&Cell::Text("no-nucleation".into())));
        assert!((float(&t, r, "beta_ln_h") - 0.25).abs() < 1e-12);
    }
    let (_, t) = table(&["regime", "--field", "expsqrt:1", "--kappa", "1"]);
    assert_eq!(t.get(0, "label"), Some(&Cell::Text("nucleation".into())));
    let (code, _, err) = run(&["regime", "--field", "power:1:0.5", "--kappa", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("hypothesis"), "{err}");
    assert_eq!(run(&["regime", "--field", "expsqrt:1"]).0, 2);
}

#[test]
fn meissner_summary_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("xi.csv");
    let (text, t) = table(&[
        "meissner",
        "--domain",
        "interval",
        "--n",
        "256",
        "--eps",
        "1e-3",
        "--h-ex",
        "2",
        "--profile",
        profile.to_str().unwrap(),
    ]);
    assert_round_trip(&text);
    let lambda = float(&t, 0, "boundary_lambda");
    assert!((lambda - 2.0 * 1f64.tanh()).abs() < 1e-3, "{lambda}");
    let min_xi = float(&t, 0, "min_xi");
    assert!((min_xi - (1.0 / 1f64.cosh() - 1.0)).abs() < 1e-4);
    assert!(float(&t, 0, "energy").is_finite());
    let ptext = std::fs::read_to_string(&profile).unwrap();
    assert_round_trip(&ptext);
    let p = Table::from_csv(&ptext).unwrap();
    assert_eq!(p.rows().len(), 257);
    assert_eq!(float(&p, 0, "xi"), 0.0);
}

#[test]
fn gl_run_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let summary = dir.path().join("summary.json");
    let (code, _, err) = run(&[
        "gl-run",
        "--eps",
        "0.05",
        "--grid",
        "64",
        "--out",
        trace.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_round_trip(&text);
    let t = Table::from_csv(&text).unwrap();
    assert!(t.rows().len() > 2);
    assert_eq!(t.get(0, "vortices"), Some(&Cell::Int(2)));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    let t_ann = json["results"]["summary"]["t_ann"].as_f64().unwrap();
    assert_eq!(t_ann, float(&t, t.rows().len() - 1, "time"));
    assert!(json["wall_time_s"].as_f64().is_some());
    assert!(json["version"].as_str().unwrap().starts_with('v'));
}

#[test]
fn json_format_carries_parameters_and_seed() {
    let (code, out, _) = run(&["annihilate", "--eps", "1e-3", "--format", "json", "--seed", "4"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["seed"], 4);
    assert_eq!(v["parameters"]["eps"].as_f64(), Some(1e-3));
    assert!(v["results"]["rows"][0]["t"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_and_domain_errors() {
    let (code, _, err) = run(&["annihilate", "--eps", "1e-3", "--colour", "red"]);
    assert_eq!(code, 2);
    assert!(err.contains("--colour"), "{err}");
    let (code, _, err) = run(&["annihilate", "--eps", "nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("--eps"), "{err}");
    let (code, _, err) = run(&["exit-prob", "--eps", "1e-4", "--beta", "0.1", "--z", "5"]);
    assert_eq!(code, 1);
    assert!(err.contains("outside"), "{err}");
    let (code, _, err) = run(&["exit-prob", "--eps", "1e-4", "--beta=-1"]);
    assert_eq!(code, 1);
    assert!(err.contains("beta"), "{err}");
    assert_eq!(run(&["sweep", "--config", "/nonexistent.cfg"]).0, 2);
    assert_eq!(run(&[]).0, 2);
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn write_config(dir: &Path, name: &str) -> std::path::PathBuf {
    let outputs = dir.join(name);
    let cfg = dir.join(format!("{name}.cfg"));
    std::fs::write(
        &cfg,
        format!(
            "# sweep used by the tests\n\
             eps = 1e-3, 1e-4\n\
             alpha = 0.5\n\
             lambda = 1\n\
             beta = kappa:0.5, 0.05\n\
             h_ex = log:1, 3\n\
             trials = 0, 400\n\
             grid = 0\n\
             outputs = {}\n\
             seed = 11\n",
            outputs.display()
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn sweep_is_deterministic_across_jobs_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_a = write_config(dir.path(), "a");
    let cfg_b = write_config(dir.path(), "b");
    let (code, out, err) = run(&["sweep", "--config", cfg_a.to_str().unwrap(), "--jobs", "4"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("16 cells (16 computed, 0 resumed)"), "{out}");
    let first = snapshot(&dir.path().join("a"));
    let (code, out, _) = run(&["sweep", "--config", cfg_a.to_str().unwrap(), "--jobs", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("(0 computed, 16 resumed)"), "{out}");
    assert_eq!(snapshot(&dir.path().join("a")), first);

    assert_eq!(run(&["sweep", "--config", cfg_b.to_str().unwrap(), "--jobs", "1"]).0, 0);
    let a = &first;
    let b = snapshot(&dir.path().join("b"));
    let strip = |m: &BTreeMap<String, Vec<u8>>| -> BTreeMap<String, Vec<u8>> {
        m.iter()
            .filter(|(k, _)| k.as_str() != "config.cfg")
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    };
    assert_eq!(strip(a), strip(&b));

    let index = String::from_utf8(first["index.csv"].clone()).unwrap();
    assert_round_trip(&index);
    let t = Table::from_csv(&index).unwrap();
    assert_eq!(t.rows().len(), 16);
    for r in 0..16 {
        assert_eq!(t.get(r, "index"), Some(&Cell::Int(r as i64)));
    }
}

#[test]
fn sweep_resumes_without_recomputing_finished_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r");
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()]).0, 0);
    let cells = dir.path().join("r").join("cells");
    let original = std::fs::read_to_string(cells.join("cell-000003.csv")).unwrap();

    // A marked cell whose file was altered keeps the altered row: it is not recomputed.
    let mut t = Table::from_csv(&original).unwrap();
    let mut row = t.rows()[0].clone();
    let col = t.column("t_leading").unwrap();
    row[col] = Cell::Float(-1.0);
    t = {
        let mut fresh = Table::new(t.header().to_vec());
        fresh.push(row);
        fresh
    };
    std::fs::write(cells.join("cell-000003.csv"), t.to_csv()).unwrap();
    // An unmarked cell is recomputed.
    std::fs::remove_file(cells.join("cell-000005.done")).unwrap();
    std::fs::remove_file(cells.join("cell-000005.csv")).unwrap();

    let (code, out, _) = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("(1 computed, 15 resumed)"), "{out}");
    let index = Table::from_csv(&std::fs::read_to_string(dir.path().join("r").join("index.csv")).unwrap()).unwrap();
    assert_eq!(float(&index, 3, "t_leading"), -1.0);
    assert!(cells.join("cell-000005.done").exists());
}

#[test]
fn sweep_rejects_oversized_and_conflicting_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c");
    let (code, _, err) = run(&["sweep", "--config", cfg.to_str().unwrap(), "--max-cells", "15"]);
    assert_eq!(code, 2);
    assert!(err.contains("15"), "{err}");
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()]).0, 0);
    let text = std::fs::read_to_string(&cfg).unwrap().replace("seed = 11", "seed = 12");
    std::fs::write(&cfg, text).unwrap();
    let (code, _, err) = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("different sweep"), "{err}");
}

#[test]
fn plot_script_references_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("regime.csv");
    let (code, _, _) = run(&["regime", "--kappa", "0.25", "--out", data.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, script, err) = run(&["plot", "--input", data.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(script.contains(data.to_str().unwrap()));
    assert!(script.contains("using \"eps\":\"nucleation\""));
    assert!(!dir.path().join("regime.png").exists());
}
