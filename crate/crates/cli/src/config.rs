use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sigspec::optimizer::{OptimizerConfig, SymmetryMode};
use sigspec::pauli::{build_family, ErrorFamily, FamilyKind};

use crate::Failure;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// Qubit count; filled in from the family when omitted.
    pub n: Option<usize>,
    pub k: usize,
    pub family: FamilyKind,
    /// Signature tuple when it differs from the family.
    pub tuple: Option<Vec<String>>,
    #[serde(default = "unrestricted")]
    pub mode: SymmetryMode,
}

fn unrestricted() -> SymmetryMode {
    SymmetryMode::Unrestricted
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Everything a run depends on. Written back into every result file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Flag overrides shared by `scan` and `study`.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// TOML run configuration, or a JSON result file whose embedded config is reused.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Symmetry mode (unrestricted, cyclic_basis, cyclic_projector, pi_basis, pi_projector, soft_cyclic, soft_permutation).
    #[arg(long)]
    pub mode: Option<SymmetryMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Grid points for the target scan; 0 reports endpoints only.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn parse_toml(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a TOML config, or the `config` object of a JSON result file.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            let inner = value.get("config").cloned().unwrap_or(value);
            return serde_json::from_value(inner).map_err(|e| Failure::Config(format!("{}: {e}", path.display())));
        }
        Self::parse_toml(&text)
    }

    pub fn resolve(overrides: &Overrides) -> Result<Self, Failure> {
        let mut cfg = match &overrides.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        let opt = &mut cfg.optimizer;
        if let Some(s) = overrides.seed {
            opt.seed = s;
        }
        if let Some(r) = overrides.restarts {
            opt.restarts = r;
        }
        if let Some(g) = overrides.grid {
            opt.grid_points = g;
        }
        if let Some(m) = overrides.mode {
            match cfg.problem.as_mut() {
                Some(p) => p.mode = m,
                None => return Err(Failure::Config("--mode needs a problem section".into())),
            }
        }
        if let Some(o) = &overrides.out {
            cfg.output.path = Some(o.clone());
        }
        if let Some(f) = overrides.format {
            cfg.output.format = f;
        }
        cfg.optimizer.validate().map_err(|e| Failure::Config(e.to_string()))?;
        if let Some(p) = cfg.problem.as_mut() {
            let family = build_family(&p.family).map_err(|e| Failure::Config(e.to_string()))?;
            match p.n {
                Some(n) if n != family.n => {
                    return Err(Failure::Config(format!("problem.n = {n} but the family acts on {} qubits", family.n)));
                }
                _ => p.n = Some(family.n),
            }
        }
        Ok(cfg)
    }
}

impl ProblemSpec {
    pub fn families(&self) -> Result<(ErrorFamily, Option<ErrorFamily>), Failure> {
        let family = build_family(&self.family).map_err(|e| Failure::Config(e.to_string()))?;
        let tuple = match &self.tuple {
            Some(labels) => {
                let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                Some(ErrorFamily::from_labels(&refs).map_err(|e| Failure::Config(e.to_string()))?)
            }
            None => None,
        };
        Ok((family, tuple))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[problem]
k = 2
family = { kind = "explicit", paulis = ["XII", "IXI", "IIX", "ZII", "IZI", "IIZ"] }
mode = "cyclic_basis"

[optimizer]
restarts = 4
seed = 9
"#;

    #[test]
    fn snapshot_round_trip() {
        let cfg = RunConfig::resolve(&Overrides::default()).unwrap();
        assert!(cfg.problem.is_none());
        let parsed = RunConfig::parse_toml(SAMPLE).unwrap();
        let text = parsed.to_toml();
        assert_eq!(RunConfig::parse_toml(&text).unwrap(), parsed);
        // defaults are written out
        assert!(text.contains("adam_iterations"));
        assert!(text.contains("format = \"json\""));
    }

    #[test]
    fn overrides_apply() {
        let dir = std::env::temp_dir().join(format!("sigspec-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, SAMPLE).unwrap();
        let o = Overrides { config: Some(path), mode: Some(SymmetryMode::Unrestricted), grid: Some(0), ..Default::default() };
        let cfg = RunConfig::resolve(&o).unwrap();
        let p = cfg.problem.unwrap();
        assert_eq!((p.n, p.mode, cfg.optimizer.grid_points, cfg.optimizer.seed), (Some(3), SymmetryMode::Unrestricted, 0, 9));
    }

    #[test]
    fn bad_configs() {
        assert!(RunConfig::parse_toml("[problem]\nk = 2\n").is_err());
        assert!(RunConfig::parse_toml("[optimizer]\nrestartz = 3\n").is_err());
        let bad_n = SAMPLE.replace("k = 2", "n = 4\nk = 2");
        let dir = std::env::temp_dir().join(format!("sigspec-cfg-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, bad_n).unwrap();
        assert!(RunConfig::resolve(&Overrides { config: Some(path), ..Default::default() }).is_err());
    }
}
