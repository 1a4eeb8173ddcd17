//! Scenario files: JSON with every numeric field optional on input and
//! expanded to explicit values in the echoed copy written next to the outputs.

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use robin_core::geometry::{complex_repr, Polygon};
use robin_core::kernels::WaveParams;
use robin_core::pt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    VerifyHarmonic,
    VerifyHelmholtz,
    Solve,
    Compare,
    PlanPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub k: f64,
    #[serde(with = "complex_repr")]
    pub lambda: Complex64,
    pub direction: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeSpec {
    /// Polyline from the midpoint of the gap mouth.
    pub waypoints: Vec<[f64; 2]>,
    /// Direction of the final ray.
    pub ray: [f64; 2],
}

/// Scenario file as written by the user.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    command: Option<CommandKind>,
    #[serde(default)]
    geometry: Vec<PathBuf>,
    wave: Option<WaveSpec>,
    far_field_samples: Option<usize>,
    panels: Option<usize>,
    grading: Option<f64>,
    base_panels: Option<usize>,
    escape_path: Option<EscapeSpec>,
    budget: Option<usize>,
    tolerance_scale: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    corrupt_kernel_sign: Option<bool>,
    diagnostics: Option<bool>,
}

/// Command-line values taking precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
}

/// Fully resolved scenario.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub command: CommandKind,
    pub geometry: Vec<PathBuf>,
    #[serde(skip)]
    pub polygons: Vec<Polygon>,
    pub wave: Option<WaveSpec>,
    pub far_field_samples: usize,
    pub panels: usize,
    pub grading: f64,
    pub base_panels: usize,
    pub escape_path: Option<EscapeSpec>,
    pub budget: usize,
    pub tolerance_scale: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// Test hook: flips the sign of the reflection kernel.
    pub corrupt_kernel_sign: bool,
    /// Accept complex impedances in the solver.
    pub diagnostics: bool,
}

pub const DEFAULT_FAR_FIELD_SAMPLES: usize = 128;
pub const DEFAULT_PANELS: usize = 256;
pub const DEFAULT_GRADING: f64 = 3.0;
pub const DEFAULT_BASE_PANELS: usize = 96;
pub const DEFAULT_BUDGET: usize = 16;
pub const DEFAULT_SEED: u64 = 20240611;

impl Scenario {
    pub fn load(file: Option<&Path>, command: CommandKind, overrides: &Overrides) -> anyhow::Result<Self> {
        let (raw, base) = match file {
            Some(f) => {
                let text = fs::read_to_string(f).with_context(|| format!("cannot read {}", f.display()))?;
                let raw: ScenarioFile =
                    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", f.display()))?;
                (raw, f.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (ScenarioFile::default(), PathBuf::new()),
        };
        if let Some(c) = raw.command {
            if c != command {
                bail!("scenario is for {c:?}, not {command:?}");
            }
        }
        let mut polygons = Vec::new();
        for g in &raw.geometry {
            let path = base.join(g);
            let text = fs::read_to_string(&path).with_context(|| format!("cannot read geometry {}", path.display()))?;
            let poly: Polygon =
                serde_json::from_str(&text).with_context(|| format!("invalid geometry {}", path.display()))?;
            polygons.push(poly);
        }
        let needed = match command {
            CommandKind::VerifyHarmonic | CommandKind::VerifyHelmholtz => 0,
            CommandKind::Solve => 1,
            CommandKind::Compare | CommandKind::PlanPath => 2,
        };
        if polygons.len() != needed {
            bail!("{command:?} needs {needed} geometry file(s), got {}", polygons.len());
        }
        if matches!(command, CommandKind::Solve | CommandKind::Compare) && raw.wave.is_none() {
            bail!("wave parameters required");
        }
        if command == CommandKind::PlanPath && raw.escape_path.is_none() {
            bail!("escape path required");
        }
        let s = Scenario {
            command,
            geometry: raw.geometry,
            polygons,
            wave: raw.wave,
            far_field_samples: raw.far_field_samples.unwrap_or(DEFAULT_FAR_FIELD_SAMPLES),
            panels: raw.panels.unwrap_or(DEFAULT_PANELS),
            grading: raw.grading.unwrap_or(DEFAULT_GRADING),
            base_panels: raw.base_panels.unwrap_or(DEFAULT_BASE_PANELS),
            escape_path: raw.escape_path,
            budget: raw.budget.unwrap_or(DEFAULT_BUDGET),
            tolerance_scale: overrides.tolerance_scale.or(raw.tolerance_scale).unwrap_or(1.0),
            seed: overrides.seed.or(raw.seed).unwrap_or(DEFAULT_SEED),
            out: overrides.out.clone().or(raw.out).unwrap_or_else(|| PathBuf::from("out")),
            corrupt_kernel_sign: raw.corrupt_kernel_sign.unwrap_or(false),
            diagnostics: raw.diagnostics.unwrap_or(false),
        };
        if !(s.tolerance_scale > 0.0) || !s.tolerance_scale.is_finite() {
            bail!("tolerance scale must be positive");
        }
        if s.panels == 0 || s.base_panels == 0 {
            bail!("panel counts must be positive");
        }
        if !(s.grading >= 1.0) {
            bail!("grading exponent must be at least 1");
        }
        if let Some(w) = &s.wave {
            s.wave_params_of(w)?;
        }
        Ok(s)
    }

    fn wave_params_of(&self, w: &WaveSpec) -> anyhow::Result<WaveParams> {
        Ok(WaveParams::new(w.k, w.lambda, pt(w.direction[0], w.direction[1]))?)
    }

    pub fn wave_params(&self) -> anyhow::Result<WaveParams> {
        let w = self.wave.as_ref().context("wave parameters required")?;
        self.wave_params_of(w)
    }
}
