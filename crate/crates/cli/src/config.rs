use clap::ValueEnum;
use heislab_core::flag::Kernel3;
use heislab_core::sio::LineKernel;
use heislab_core::{fixtures, KernelSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    GeomSelftest,
    KernelsCheck,
    TameExtend,
    Corona,
    SioNormSweep,
    BetaCarleson,
    FlagsNorm,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::GeomSelftest => "geom-selftest",
            Suite::KernelsCheck => "kernels-check",
            Suite::TameExtend => "tame-extend",
            Suite::Corona => "corona",
            Suite::SioNormSweep => "sio-norm-sweep",
            Suite::BetaCarleson => "beta-carleson",
            Suite::FlagsNorm => "flags-norm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoronaMode {
    Lipschitz,
    Tame,
}

/// Every field is optional in the file; unset fields take per-suite defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub suite: Option<Suite>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub samples: Option<usize>,
    pub kernels: Option<Vec<String>>,
    pub curve: Option<String>,
    pub n: Option<usize>,
    pub epsilons: Option<Vec<f64>>,
    pub timing: Option<bool>,
    pub mode: Option<CoronaMode>,
    pub fixtures: Option<Vec<String>>,
    pub etas: Option<Vec<f64>>,
    pub depth: Option<i32>,
    pub c: Option<f64>,
    pub flag: Option<String>,
    pub grid: Option<(usize, usize)>,
    pub t_window: Option<(f64, f64)>,
}

pub enum PairChoice {
    Heis(KernelSpec),
    Line(LineKernel),
}

pub fn parse_pair_kernel(s: &str) -> Option<PairChoice> {
    match s {
        "hilbert" => Some(PairChoice::Line(LineKernel::Hilbert)),
        "abs_reciprocal" => Some(PairChoice::Line(LineKernel::AbsReciprocal)),
        "zero" => Some(PairChoice::Line(LineKernel::Zero)),
        _ => KernelSpec::parse(s).map(PairChoice::Heis),
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub seed: u64,
    pub out: PathBuf,
    pub samples: usize,
    pub kernels: Vec<String>,
    pub curve: String,
    pub n: usize,
    pub epsilons: Vec<f64>,
    pub timing: bool,
    pub mode: CoronaMode,
    pub fixtures: Vec<String>,
    pub etas: Vec<f64>,
    pub depth: i32,
    pub c: f64,
    pub flag: String,
    pub grid: (usize, usize),
    pub t_window: (f64, f64),
}

pub fn load(path: &Path) -> Result<RawConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

fn owned(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl ExperimentConfig {
    pub fn resolve(suite: Suite, raw: RawConfig, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self, String> {
        if let Some(s) = raw.suite {
            if s != suite {
                return Err(format!("config is for suite '{}', not '{}'", s.name(), suite.name()));
            }
        }
        let mode = raw.mode.unwrap_or(CoronaMode::Lipschitz);
        let default_kernels: &[&str] = match suite {
            Suite::SioNormSweep => &["hilbert", "abs_reciprocal"],
            Suite::FlagsNorm => &["grad_norm_x"],
            _ => &["riesz_x", "riesz_y", "riesz_t", "gradlog_x", "gradlog_y"],
        };
        let default_fixtures: &[&str] = match mode {
            CoronaMode::Lipschitz => &fixtures::LIPSCHITZ,
            CoronaMode::Tame => &fixtures::TAME,
        };
        let cfg = ExperimentConfig {
            suite,
            seed: seed.or(raw.seed).unwrap_or(1),
            out: out.or(raw.out).unwrap_or_else(|| PathBuf::from("out").join(suite.name())),
            samples: raw.samples.unwrap_or(match suite {
                Suite::TameExtend => 100,
                _ => 1000,
            }),
            kernels: raw.kernels.unwrap_or_else(|| owned(default_kernels)),
            curve: raw.curve.unwrap_or_else(|| match suite {
                Suite::BetaCarleson => "ilg-sine".into(),
                _ => "hilbert-line".into(),
            }),
            n: raw.n.unwrap_or(match suite {
                Suite::BetaCarleson => 1025,
                _ => 1024,
            }),
            epsilons: raw.epsilons.unwrap_or_else(|| match suite {
                Suite::FlagsNorm => vec![0.25, 0.125, 0.0625],
                Suite::BetaCarleson => vec![0.05],
                _ => (3..=8).map(|k| 0.5f64.powi(k)).collect(),
            }),
            timing: raw.timing.unwrap_or(false),
            mode,
            fixtures: raw.fixtures.unwrap_or_else(|| owned(default_fixtures)),
            etas: raw.etas.unwrap_or_else(|| vec![0.5, 0.25]),
            depth: raw.depth.unwrap_or(match suite {
                Suite::BetaCarleson => 6,
                _ => 8,
            }),
            c: raw.c.unwrap_or(0.5),
            flag: raw.flag.unwrap_or_else(|| "abs".into()),
            grid: raw.grid.unwrap_or((64, 64)),
            t_window: raw.t_window.unwrap_or((-1.0 / 32.0, 1.0 / 32.0)),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: &[f64]| -> Result<(), String> {
            if v.is_empty() || v.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                return Err(format!("{name} must be a nonempty list of positive numbers"));
            }
            Ok(())
        };
        if self.samples == 0 {
            return Err("samples must be positive".into());
        }
        match self.suite {
            Suite::KernelsCheck => {
                for k in &self.kernels {
                    KernelSpec::parse(k).ok_or_else(|| format!("unknown kernel '{k}'"))?;
                }
            }
            Suite::SioNormSweep => {
                for k in &self.kernels {
                    parse_pair_kernel(k).ok_or_else(|| format!("unknown kernel '{k}'"))?;
                }
                if !fixtures::CURVES.contains(&self.curve.as_str()) {
                    return Err(format!("unknown curve '{}'", self.curve));
                }
                if self.n < 2 {
                    return Err("n must be at least 2".into());
                }
                positive("epsilons", &self.epsilons)?;
            }
            Suite::Corona => {
                let known: &[&str] = match self.mode {
                    CoronaMode::Lipschitz => &fixtures::LIPSCHITZ,
                    CoronaMode::Tame => &fixtures::TAME,
                };
                for f in &self.fixtures {
                    if !known.contains(&f.as_str()) {
                        return Err(format!("unknown fixture '{f}' for this corona mode"));
                    }
                }
                if self.etas.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) || self.etas.is_empty() {
                    return Err("etas must lie in (0, 1]".into());
                }
                if !(1..=12).contains(&self.depth) {
                    return Err("depth must be in 1..=12".into());
                }
            }
            Suite::BetaCarleson => {
                if !fixtures::CURVES.contains(&self.curve.as_str()) {
                    return Err(format!("unknown curve '{}'", self.curve));
                }
                if !(0..=16).contains(&self.depth) || self.n < 2 {
                    return Err("need depth in 0..=16 and n >= 2".into());
                }
                positive("epsilons", &self.epsilons)?;
            }
            Suite::FlagsNorm => {
                for k in &self.kernels {
                    Kernel3::parse(k).ok_or_else(|| format!("unknown flag kernel '{k}'"))?;
                }
                if !fixtures::FLAGS.contains(&self.flag.as_str()) {
                    return Err(format!("unknown flag '{}'", self.flag));
                }
                if self.grid.0 < 2 || self.grid.1 < 2 {
                    return Err("grid needs at least 2×2 nodes".into());
                }
                if !(self.t_window.0 < self.t_window.1) {
                    return Err("t_window must be an increasing pair".into());
                }
                positive("epsilons", &self.epsilons)?;
            }
            Suite::GeomSelftest | Suite::TameExtend => {}
        }
        Ok(())
    }
}
