//! Config files (TOML or JSON) and their merge with command-line flags.
//! A flag beats the file, the file beats the built-in default.

use std::path::Path;

use groundstate::config::CcThresholds;
use groundstate::experiments::{AnnulusConfig, ExteriorConfig, IbetaConfig, ScalingConfig};
use groundstate::{Error, Result, SolverConfig};
use serde::{Deserialize, Serialize};

/// Problem description shared by the single-solve commands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemFile {
    pub space: Option<String>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub inner: Option<f64>,
    pub outer: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub solver: Option<SolverConfig>,
    pub problem: ProblemFile,
    pub cc: Option<CcThresholds>,
    pub scaling: Option<ScalingConfig>,
    pub ibeta: Option<IbetaConfig>,
    pub exterior: Option<ExteriorConfig>,
    pub annulus: Option<AnnulusConfig>,
}

impl FileConfig {
    /// Reads `.json` as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
        }
    }
}

/// Overrides of the solver settings available on every subcommand.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverFlags {
    pub seed: Option<u64>,
    pub m: Option<usize>,
    pub r_max: Option<f64>,
    pub tol: Option<f64>,
}

pub fn solver_config(file: &FileConfig, flags: &SolverFlags) -> SolverConfig {
    let mut cfg = file.solver.unwrap_or_default();
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(m) = flags.m {
        cfg.m = m;
    }
    if let Some(r) = flags.r_max {
        cfg.r_max = Some(r);
    }
    if let Some(t) = flags.tol {
        cfg.residual_tol = t;
    }
    cfg
}

/// Fills the unset fields of `flags` from `file`.
pub fn merge_problem(flags: &ProblemFile, file: &ProblemFile) -> ProblemFile {
    ProblemFile {
        space: flags.space.clone().or_else(|| file.space.clone()),
        n: flags.n.or(file.n),
        p: flags.p.or(file.p),
        lambda: flags.lambda.or(file.lambda),
        beta: flags.beta.or(file.beta),
        inner: flags.inner.or(file.inner),
        outer: flags.outer.or(file.outer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        std::fs::write(&t, "[solver]\nm = 1500\n\n[problem]\nspace = \"hyperbolic\"\np = 2.5\n").unwrap();
        let j = dir.path().join("c.json");
        std::fs::write(&j, r#"{"solver": {"m": 1500}, "problem": {"space": "hyperbolic", "p": 2.5}}"#).unwrap();
        let a = FileConfig::load(&t).unwrap();
        let b = FileConfig::load(&j).unwrap();
        assert_eq!(a.solver, b.solver);
        assert_eq!(a.problem, b.problem);
        assert_eq!(a.solver.unwrap().m, 1500);
        assert_eq!(a.solver.unwrap().residual_tol, SolverConfig::default().residual_tol);
    }

    #[test]
    fn flags_beat_file() {
        let file = FileConfig {
            solver: Some(SolverConfig::default().with_m(100)),
            ..FileConfig::default()
        };
        let cfg = solver_config(&file, &SolverFlags { m: Some(200), ..SolverFlags::default() });
        assert_eq!(cfg.m, 200);
        assert_eq!(solver_config(&file, &SolverFlags::default()).m, 100);
        let merged = merge_problem(
            &ProblemFile { p: Some(3.0), ..ProblemFile::default() },
            &ProblemFile { p: Some(2.0), n: Some(2), ..ProblemFile::default() },
        );
        assert_eq!((merged.p, merged.n), (Some(3.0), Some(2)));
    }

    #[test]
    fn rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        std::fs::write(&t, "[problem]\nlamda = 1.0\n").unwrap();
        assert!(FileConfig::load(&t).is_err());
    }
}
