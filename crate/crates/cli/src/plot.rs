//! Gnuplot scripts for the CSV outputs. Nothing is plotted in-process; the
//! script reads the CSVs by column name.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::table::Table;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Trace,
    Regime,
    Sweep,
    Profile,
    Annihilate,
    Generic,
}

fn kind(header: &[String]) -> Kind {
    let has = |c: &str| header.iter().any(|h| h == c);
    if has("time") && has("energy") {
        Kind::Trace
    } else if has("beta_ln_h") {
        Kind::Regime
    } else if has("index") && has("status") {
        Kind::Sweep
    } else if header == ["x", "y", "xi"] {
        Kind::Profile
    } else if has("t") && has("t_leading") {
        Kind::Annihilate
    } else {
        Kind::Generic
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One panel per input file, each written to `<stem>.png` (or the extension
/// of the terminal) beside the CSV.
pub fn script(inputs: &[PathBuf], terminal: &str) -> Result<String, CliError> {
    let ext = match terminal.split_whitespace().next().unwrap_or("") {
        t if t.starts_with("png") => "png",
        t if t.starts_with("pdf") => "pdf",
        t if t.starts_with("svg") => "svg",
        t if t.starts_with("post") || t.starts_with("eps") => "eps",
        _ => "out",
    };
    let mut s = String::new();
    s += "# gnuplot script\n";
    s += "set datafile separator ','\n";
    s += "set datafile missing 'nan'\n";
    s += "set key autotitle columnhead\n";
    let _ = writeln!(s, "set terminal {terminal}");
    for input in inputs {
        let text =
            std::fs::read_to_string(input).map_err(|e| CliError::Usage(format!("--input {}: {e}", input.display())))?;
        let table = Table::from_csv(&text)?;
        let header = table.header().to_vec();
        let data = quote(&input.display().to_string());
        let output = quote(&with_extension(input, ext).display().to_string());
        let _ = writeln!(s, "\n# {}", input.display());
        s += "reset session\nset datafile separator ','\nset key autotitle columnhead\n";
        let _ = writeln!(s, "set output {output}");
        match kind(&header) {
            Kind::Trace => {
                s += "set multiplot layout 2,1\nset xlabel 'time'\n";
                let _ = writeln!(
                    s,
                    "set ylabel 'energy'\nplot {data} using \"time\":\"energy\" with lines"
                );
                let _ = writeln!(
                    s,
                    "set ylabel 'modulus'\nplot {data} using \"time\":\"min_modulus\" with lines, \
                     {data} using \"time\":\"max_modulus\" with lines"
                );
                s += "unset multiplot\n";
            }
            Kind::Regime => {
                s += "set logscale xy\nset xlabel 'eps'\nset ylabel 'nucleation probability'\n";
                let _ = writeln!(s, "plot {data} using \"eps\":\"nucleation\" with linespoints");
            }
            Kind::Sweep => {
                s += "set logscale xy\nset xlabel 'eps'\nset ylabel 'annihilation time'\n";
                let _ = writeln!(
                    s,
                    "plot {data} using \"eps\":\"t_ann\" with points, {data} using \"eps\":\"t_leading\" with lines"
                );
            }
            Kind::Profile => {
                s += "set xlabel 'x'\nset ylabel 'xi'\n";
                let _ = writeln!(s, "plot {data} using \"x\":\"xi\" with lines");
            }
            Kind::Annihilate => {
                s += "set logscale xy\nset xlabel 'eps'\nset ylabel 't'\n";
                let _ = writeln!(
                    s,
                    "plot {data} using \"eps\":\"t\" with points, {data} using \"eps\":\"t_leading\" with lines"
                );
            }
            Kind::Generic => {
                if header.len() < 2 {
                    return Err(CliError::Data(format!(
                        "{} has fewer than two columns",
                        input.display()
                    )));
                }
                let _ = writeln!(s, "set xlabel {}", quote(&header[0]));
                let _ = writeln!(s, "plot for [c=2:{}] {data} using 1:c with linespoints", header.len());
            }
        }
        s += "unset output\n";
    }
    Ok(s)
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}
