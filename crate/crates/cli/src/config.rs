//! Run configuration read from a JSON file.

use std::path::{Path, PathBuf};

use rbembed::verify::DEFAULT_T_GRID;
use rbembed::{SimConfig, SolverConfig, TargetLawSpec};
use serde::{Deserialize, Serialize};

/// Directory used for artifacts when neither the config nor `--out-dir`
/// names one.
pub const OUT_DIR_ENV: &str = "RBEMBED_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub law: TargetLawSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Simulation settings. `solve` verifies only when this is present.
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub outputs: Outputs,
    /// Barrier CSV checked by `verify` instead of solving.
    #[serde(default)]
    pub barrier_input: Option<PathBuf>,
}

fn default_t_grid() -> Vec<f64> {
    DEFAULT_T_GRID.to_vec()
}

/// Artifact file names. Relative names are resolved against the output
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub dir: Option<PathBuf>,
    pub barrier_csv: PathBuf,
    pub solve_report: PathBuf,
    pub embed_report: PathBuf,
    pub ecdf_csv: PathBuf,
    pub curves_csv: PathBuf,
    pub summary: PathBuf,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: None,
            barrier_csv: "barrier.csv".into(),
            solve_report: "solve_report.json".into(),
            embed_report: "embed_report.json".into(),
            ecdf_csv: "ecdf.csv".into(),
            curves_csv: "curves.csv".into(),
            summary: "summary.json".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve { verify: bool },
    Verify,
    Compare,
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Applies flag overrides and checks that the sections `mode` needs are
    /// present. Returns whether a simulation will run.
    pub fn prepare(&mut self, mode: Mode, ov: &Overrides) -> Result<bool, String> {
        let simulate = match mode {
            Mode::Solve { verify } => verify || self.sim.is_some(),
            Mode::Verify | Mode::Compare => true,
        };
        if mode == Mode::Verify && self.barrier_input.is_none() {
            return Err("verify needs \"barrier_input\"".into());
        }
        if simulate {
            let sim = self.sim.get_or_insert_with(SimConfig::default);
            if let Some(n) = ov.n_paths {
                sim.n_paths = n;
            }
            if let Some(s) = ov.seed {
                sim.seed = s;
            }
        }
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| t.is_nan() || *t <= 0.0) {
            return Err("t_grid must hold positive values".into());
        }
        if let Some(d) = &ov.out_dir {
            self.outputs.dir = Some(d.clone());
        }
        Ok(simulate)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.outputs
            .dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn resolve(&self, name: &Path) -> PathBuf {
        if name.is_absolute() {
            name.to_path_buf()
        } else {
            self.out_dir().join(name)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = RunConfig::parse(r#"{"law": {"kind": "atoms", "atoms": [[1, 0.5], [2, 0.5]]}}"#).unwrap();
        assert_eq!(c.solver, SolverConfig::default());
        assert!(c.sim.is_none());
        assert_eq!(c.outputs.barrier_csv, PathBuf::from("barrier.csv"));
        assert_eq!(c.t_grid, DEFAULT_T_GRID.to_vec());
    }

    #[test]
    fn overrides_reach_sim() {
        let mut c = RunConfig::parse(r#"{"law": {"kind": "atoms", "atoms": [[-1, 0.5], [1, 0.5]]}}"#).unwrap();
        let ov = Overrides { n_paths: Some(10), seed: Some(3), out_dir: None };
        assert!(!c.prepare(Mode::Solve { verify: false }, &ov).unwrap());
        assert!(c.sim.is_none());
        assert!(c.prepare(Mode::Compare, &ov).unwrap());
        assert_eq!(c.sim.unwrap().n_paths, 10);
        assert_eq!(c.sim.unwrap().seed, 3);
    }

    #[test]
    fn verify_needs_barrier() {
        let mut c = RunConfig::parse(r#"{"law": {"kind": "atoms", "atoms": [[1, 1]]}}"#).unwrap();
        assert!(c.prepare(Mode::Verify, &Overrides::default()).is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::parse(r#"{"law": {"kind": "atoms", "atoms": [[1, 1]]}, "slover": {}}"#).is_err());
    }
}
