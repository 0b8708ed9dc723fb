//! The quantize → solve → verify pipeline behind each subcommand.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rbembed::float_repr::format_f64;
use rbembed::law::quantize;
use rbembed::solver::{check_structure, solve};
use rbembed::verify::{
    compare_with_azema_yor, simulate_stopped, summarize, CurvePoint, Gate, OptimalityReport, StepFn,
};
use rbembed::{Barrier, DiscreteLaw, EmbedReport};
use serde::{Deserialize, Serialize};

use crate::config::{Mode, RunConfig};

/// Largest probability allowed to stay unembedded by a solve.
pub const MAX_UNEMBEDDED_MASS: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Module(#[from] rbembed::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Module(e) => e.kind(),
            RunError::Io { .. } => "Io",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// Gate results of a run, written next to the other artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: String,
    pub atoms: usize,
    pub breakpoints: usize,
    pub gates: Vec<Gate>,
    pub passed: bool,
}

enum Verification {
    Embed(EmbedReport),
    Compare(OptimalityReport),
}

impl Verification {
    fn report(&self) -> &EmbedReport {
        match self {
            Verification::Embed(r) => r,
            Verification::Compare(o) => &o.reversed_barrier,
        }
    }
}

fn gate(name: &str, value: f64, threshold: f64, passed: bool) -> Gate {
    Gate { name: name.into(), passed, value, threshold }
}

fn mode_name(mode: Mode, simulate: bool) -> &'static str {
    match (mode, simulate) {
        (Mode::Solve { .. }, false) => "solve",
        (Mode::Solve { .. }, true) => "solve+verify",
        (Mode::Verify, _) => "verify",
        (Mode::Compare, _) => "compare",
    }
}

/// Runs the pipeline and writes every artifact. Nothing is written unless
/// all computations succeed.
pub fn run(cfg: &RunConfig, mode: Mode, simulate: bool) -> Result<Summary, RunError> {
    cfg.solver.validate()?;
    if let Some(sim) = &cfg.sim {
        sim.validate()?;
    }
    let law = quantize(&cfg.law)?;

    let (barrier, solve_report) = match mode {
        Mode::Verify => {
            let path = cfg.barrier_input.as_deref().expect("checked by prepare");
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            (Barrier::from_csv(&text)?, None)
        }
        _ => {
            let r = solve(&law, &cfg.solver)?;
            (r.barrier.clone(), Some(r))
        }
    };

    let mut gates = Vec::new();
    let problems = check_structure(&law, &barrier);
    gates.push(gate("structure", problems.len() as f64, 0.0, problems.is_empty()));
    if let Some(r) = &solve_report {
        gates.push(gate(
            "unembedded_mass",
            r.unembedded_mass,
            MAX_UNEMBEDDED_MASS,
            r.unembedded_mass <= MAX_UNEMBEDDED_MASS,
        ));
    }

    let verification = if simulate {
        let sim = cfg.sim.as_ref().expect("filled by prepare");
        Some(if mode == Mode::Compare {
            Verification::Compare(compare_with_azema_yor(&law, &barrier, sim, &cfg.t_grid)?)
        } else {
            let samples = simulate_stopped(&barrier, sim)?;
            Verification::Embed(summarize(&law, &barrier, &samples, sim, &cfg.t_grid))
        })
    } else {
        None
    };
    if let Some(v) = &verification {
        gates.extend(v.report().gates.iter().cloned());
    }

    let summary = Summary {
        mode: mode_name(mode, simulate).into(),
        atoms: law.len(),
        breakpoints: barrier.len(),
        passed: gates.iter().all(|g| g.passed),
        gates,
    };

    let o = &cfg.outputs;
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    if mode != Mode::Verify {
        files.push((cfg.resolve(&o.barrier_csv), barrier.to_csv()));
    }
    if let Some(r) = &solve_report {
        files.push((cfg.resolve(&o.solve_report), to_json(r)));
    }
    if let Some(v) = &verification {
        let json = match v {
            Verification::Embed(r) => to_json(r),
            Verification::Compare(r) => to_json(r),
        };
        files.push((cfg.resolve(&o.embed_report), json));
        files.push((cfg.resolve(&o.ecdf_csv), ecdf_csv(&law, v.report())));
        let ay = match v {
            Verification::Compare(r) => Some(r.azema_yor_curve.as_slice()),
            Verification::Embed(_) => None,
        };
        files.push((cfg.resolve(&o.curves_csv), curves_csv(&v.report().truncated_expectation_curve, ay)));
    }
    files.push((cfg.resolve(&o.summary), to_json(&summary)));

    write_all(&files)?;
    Ok(summary)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes each file through a temporary sibling and a rename, so a reader
/// never sees a half-written artifact.
fn write_all(files: &[(PathBuf, String)]) -> Result<(), RunError> {
    for (path, _) in files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
    }
    let mut staged = Vec::new();
    for (path, body) in files {
        let mut tmp = path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        if let Err(e) = fs::write(&tmp, body) {
            for t in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(io_err(&tmp)(e));
        }
        staged.push(tmp);
    }
    for ((path, _), tmp) in files.iter().zip(&staged) {
        fs::rename(tmp, path).map_err(io_err(path))?;
    }
    Ok(())
}

/// `value,empirical,target` at every atom and every stopped value.
pub fn ecdf_csv(law: &DiscreteLaw, report: &EmbedReport) -> String {
    let emp = StepFn::new(0.0, report.empirical_cdf.clone());
    let target = StepFn::from_law(law);
    let mut xs: Vec<f64> = law
        .positions()
        .chain(report.empirical_cdf.iter().map(|p| p.0))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut out = String::from("value,empirical,target\n");
    for x in xs {
        let _ = writeln!(out, "{},{},{}", format_f64(x), format_f64(emp.eval(x)), format_f64(target.eval(x)));
    }
    out
}

/// `T,tau_mean,tau_se` plus `sigma_mean,sigma_se` when the comparison ran.
pub fn curves_csv(tau: &[CurvePoint], sigma: Option<&[CurvePoint]>) -> String {
    let mut out = String::from("T,tau_mean,tau_se");
    if sigma.is_some() {
        out.push_str(",sigma_mean,sigma_se");
    }
    out.push('\n');
    for (i, p) in tau.iter().enumerate() {
        let _ = write!(out, "{},{},{}", format_f64(p.t), format_f64(p.mean), format_f64(p.se));
        if let Some(s) = sigma {
            let _ = write!(out, ",{},{}", format_f64(s[i].mean), format_f64(s[i].se));
        }
        out.push('\n');
    }
    out
}
