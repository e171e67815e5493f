//! Experiment configuration files.
//!
//! TOML, one table per concern. Every key is optional and unknown keys are
//! rejected. Complex numbers are written `"re,im"`, angles as rational
//! multiples of π (`"1/2"` is π/2, `"rad:0.3"` gives radians directly).
//!
//! ```toml
//! [setup]
//! lx = 3                        # bulk size, default 2
//! ly = 2                        # default 1
//! lz = 2                        # default 1
//! placement = "ideal"           # ideal | faithful
//! choreography = "repositioned" # repositioned | literal
//! init_seed = [0, 0, 0]         # seed excitation for faithful setups
//! storage = "x[,1]"             # gate storage region for faithful setups
//!
//! [setup.offsets]               # all seven, or none for the canonical ones
//! extract_z = 6
//! sep_z = 3
//! sweep_z = 5
//! extract_y = 6
//! sep_y = 3
//! sweep_y = 5
//! plane_sep = 4
//!
//! [collision]
//! phi = "1/2"                   # phase per wait, default π/2
//! delta_e = 1.0                 # on-site energy; t_int = phi / delta_e
//! mode = "physical"             # physical | selective
//! prune_tol = 1e-12
//!
//! [noise]                       # see NoiseModel; all default to 0 / false
//! loss_rate = 1e-4
//!
//! [input]                       # photonic input α|0⟩ + β|1⟩ + γ|2⟩
//! alpha = "1,0"
//! beta = "0,0"
//! gamma = "0,0"
//!
//! [mode]                        # collective mode function
//! kind = "uniform"              # uniform | delta | gaussian
//!
//! [run]
//! trajectories = 1
//! seed = 0
//! output = "results/gate.csv"   # optional; JSON-lines mirror alongside
//!
//! [tolerance]
//! fidelity = 1e-9
//! leakage = 1e-9
//! oracle = 1e-12
//! oracle_cases = 200
//!
//! [sweep]                       # noise-sweep grid
//! parameter = "loss_rate"
//! values = [0.0, 1e-4, 2e-4]
//!
//! [scaling]
//! experiment = "loss_duration"
//! sizes = [[2, 2, 2], [3, 2, 2]]
//! magnitude = 1e-4
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::choreography::{ChoreographyRegistry, InitOffsets, Placement, SetupSpec};
use crate::collective::{ModeProfile, PhotonicInput};
use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::noise::trajectory::TrajectoryConfig;
use crate::noise::NoiseModel;
use crate::primitives::CollisionParams;
use crate::schedule::{format_angle, parse_angle, CollisionModeKind, ExecOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetupSection {
    pub lx: i32,
    pub ly: i32,
    pub lz: i32,
    pub placement: Placement,
    pub choreography: String,
    /// Bulk site of the excitation that seeds faithful initialization.
    pub init_seed: [i32; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub storage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offsets: Option<InitOffsets>,
}

impl Default for SetupSection {
    fn default() -> Self {
        SetupSection {
            lx: 2,
            ly: 1,
            lz: 1,
            placement: Placement::Ideal,
            choreography: "repositioned".into(),
            init_seed: [0, 0, 0],
            storage: None,
            offsets: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollisionSection {
    pub phi: String,
    pub delta_e: f64,
    pub mode: CollisionModeKind,
    pub prune_tol: f64,
}

impl Default for CollisionSection {
    fn default() -> Self {
        CollisionSection {
            phi: "1/2".into(),
            delta_e: 1.0,
            mode: CollisionModeKind::Physical,
            prune_tol: crate::DEFAULT_PRUNE_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub alpha: String,
    pub beta: String,
    pub gamma: String,
}

impl Default for InputSection {
    fn default() -> Self {
        InputSection {
            alpha: "1,0".into(),
            beta: "0,0".into(),
            gamma: "0,0".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub trajectories: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            trajectories: 1,
            seed: 0,
            output: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    pub fidelity: f64,
    pub leakage: f64,
    pub oracle: f64,
    pub oracle_cases: usize,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            fidelity: 1e-9,
            leakage: 1e-9,
            oracle: 1e-12,
            oracle_cases: 200,
        }
    }
}

/// Grid for `noise-sweep`: one run per value of one noise parameter.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    /// Name in the scaling registry.
    pub experiment: String,
    /// `[lx, ly, lz]` per point; empty means the experiment's defaults.
    pub sizes: Vec<[i32; 3]>,
    /// Noise magnitude; absent means the experiment's default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub setup: SetupSection,
    pub collision: CollisionSection,
    pub noise: NoiseModel,
    pub input: InputSection,
    pub mode: ModeProfile,
    pub run: RunSection,
    pub tolerance: ToleranceSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
}

/// Noise parameters a sweep may vary.
pub const SWEEP_PARAMETERS: [&str; 8] = [
    "p_hole",
    "pulse_systematic",
    "pulse_sigma",
    "collision_systematic",
    "collision_sigma",
    "loss_rate",
    "dephasing_rate",
    "transport_phase",
];

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::Config(format!("malformed complex number '{s}', expected \"re,im\""));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    Ok(Complex64::new(
        re.trim().parse().map_err(|_| bad())?,
        im.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn format_complex(c: Complex64) -> String {
    format!("{:?},{:?}", c.re, c.im)
}

/// 1-based line of `key` inside `[section]`, or of the section header
/// when `key` is empty.
fn line_of(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[') {
            current = h.trim_end_matches(']').trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if !key.is_empty() && current == section {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl ExperimentConfig {
    /// Parses and validates a config. Errors carry the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(0);
            Error::Parse {
                line,
                message: e.message().to_string(),
            }
        })?;
        cfg.check().map_err(|(section, key, e)| match line_of(text, section, key)
            .or_else(|| line_of(text, section, ""))
        {
            Some(line) => Error::Parse {
                line,
                message: e.to_string(),
            },
            None => e,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { line, message } => Error::Format {
                path: path.into(),
                message: format!("line {line}: {message}"),
            },
            e => Error::Format {
                path: path.into(),
                message: e.to_string(),
            },
        })
    }

    /// Canonical text: every key, defaults included, in fixed order.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical text, in hex.
    /// SHA-256 of the canonical text. `run.output` is left out so that the
    /// destination does not change the run's identity.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.run.output = None;
        Sha256::digest(c.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn check(&self) -> std::result::Result<(), (&'static str, &'static str, Error)> {
        let s = &self.setup;
        for (key, v) in [("lx", s.lx), ("ly", s.ly), ("lz", s.lz)] {
            if v <= 0 {
                return Err(("setup", key, Error::Config(format!("{key} must be positive, got {v}"))));
            }
        }
        if ChoreographyRegistry::builtin().get(&s.choreography).is_err() {
            return Err((
                "setup",
                "choreography",
                Error::Config(format!("unknown choreography '{}'", s.choreography)),
            ));
        }
        if let Some(r) = &s.storage {
            r.parse::<Region>().map_err(|e| ("setup", "storage", e))?;
        }
        self.params().map_err(|e| ("collision", "phi", e))?;
        if !(self.collision.prune_tol >= 0.0) {
            return Err(("collision", "prune_tol", Error::Config("prune_tol must be non-negative".into())));
        }
        self.noise.validate().map_err(|e| ("noise", "", e))?;
        for (key, v) in [("alpha", &self.input.alpha), ("beta", &self.input.beta), ("gamma", &self.input.gamma)] {
            parse_complex(v).map_err(|e| ("input", key, e))?;
        }
        self.photonic_input().map_err(|e| ("input", "", e))?;
        if let ModeProfile::Gaussian { sigma, .. } = self.mode {
            if !(sigma > 0.0) {
                return Err(("mode", "sigma", Error::Config("sigma must be positive".into())));
            }
        }
        if self.run.trajectories == 0 {
            return Err(("run", "trajectories", Error::Config("trajectories must be at least 1".into())));
        }
        if let Some(sw) = &self.sweep {
            if !SWEEP_PARAMETERS.contains(&sw.parameter.as_str()) {
                return Err((
                    "sweep",
                    "parameter",
                    Error::Config(format!(
                        "unknown sweep parameter '{}', expected one of {}",
                        sw.parameter,
                        SWEEP_PARAMETERS.join(", ")
                    )),
                ));
            }
            for &v in &sw.values {
                let mut n = self.noise.clone();
                set_noise_parameter(&mut n, &sw.parameter, v);
                n.validate().map_err(|e| ("sweep", "values", e))?;
            }
        }
        Ok(())
    }

    pub fn setup_spec(&self) -> Result<SetupSpec> {
        let s = &self.setup;
        let mut spec = match s.placement {
            Placement::Ideal => SetupSpec::ideal(s.lx, s.ly, s.lz),
            Placement::Faithful => SetupSpec::faithful(s.lx, s.ly, s.lz),
        };
        spec.choreography = s.choreography.clone();
        spec.init_seed = Site::new(s.init_seed[0], s.init_seed[1], s.init_seed[2]);
        if s.offsets.is_some() {
            spec.offsets = s.offsets;
        }
        if let Some(r) = &s.storage {
            spec.storage = Some(r.parse()?);
        }
        Ok(spec)
    }

    pub fn params(&self) -> Result<CollisionParams> {
        CollisionParams::from_phase(parse_angle(&self.collision.phi)?, self.collision.delta_e)
    }

    pub fn exec_options(&self) -> ExecOptions {
        ExecOptions {
            collision_mode: self.collision.mode,
            prune_tol: self.collision.prune_tol,
            ..Default::default()
        }
    }

    pub fn photonic_input(&self) -> Result<PhotonicInput> {
        PhotonicInput::new(
            parse_complex(&self.input.alpha)?,
            parse_complex(&self.input.beta)?,
            parse_complex(&self.input.gamma)?,
        )
    }

    pub fn trajectory_config(&self) -> Result<TrajectoryConfig> {
        Ok(TrajectoryConfig {
            setup: self.setup_spec()?,
            params: self.params()?,
            mode: self.mode.clone(),
            options: self.exec_options(),
            noise: self.noise.clone(),
            trajectories: self.run.trajectories,
            seed: self.run.seed,
        })
    }

    /// Sets the collision phase, stored in its rational-of-π form.
    pub fn set_phi(&mut self, rad: f64) {
        self.collision.phi = format_angle(rad);
    }
}

/// Sets one named noise parameter; unknown names are ignored.
pub fn set_noise_parameter(n: &mut NoiseModel, name: &str, v: f64) {
    match name {
        "p_hole" => n.p_hole = v,
        "pulse_systematic" => n.pulse_systematic = v,
        "pulse_sigma" => n.pulse_sigma = v,
        "collision_systematic" => n.collision_systematic = v,
        "collision_sigma" => n.collision_sigma = v,
        "loss_rate" => n.loss_rate = v,
        "dephasing_rate" => n.dephasing_rate = v,
        "transport_phase" => n.transport_phase = v,
        _ => {}
    }
}

/// Resolves a `--config` argument: an existing path is used as is,
/// otherwise `name` is looked up as `<dir>/<name>.toml` in each of `dirs`.
pub fn resolve_config_path(name: &str, dirs: &[PathBuf]) -> Result<PathBuf> {
    let direct = PathBuf::from(name);
    if direct.is_file() {
        return Ok(direct);
    }
    for d in dirs {
        let p = d.join(format!("{name}.toml"));
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(Error::Config(format!("no config file '{name}' (also tried <configs>/{name}.toml)")))
}
