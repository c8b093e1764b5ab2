use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{BetaStudyConfig, EnergyStudyConfig, RandomData};
use crate::error::{Error, Result};
use crate::mesh::{build_inclusion_mesh, build_interval_mesh, build_split_rectangle_mesh, CellBox, Mesh};
use crate::model::{Conductivities, IonicModel};
use crate::stepper::{Problem, SourceSet, StepperConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[default]
    Run,
    Mms,
    Energy,
    Coercivity,
    BetaSweep,
    Stability,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Mms => "mms",
            Command::Energy => "energy",
            Command::Coercivity => "coercivity",
            Command::BetaSweep => "beta-sweep",
            Command::Stability => "stability",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshSpec {
    /// `[0, split]` is `B` with `n_b` cells, `[split, 1]` is `D` with `n_d`.
    Interval {
        n_b: usize,
        n_d: usize,
        #[serde(default = "half")]
        split: f64,
    },
    /// Unit square, `B` left of `x = split`.
    SplitRectangle {
        nx: usize,
        ny: usize,
        #[serde(default = "half")]
        split: f64,
    },
    /// `n × n` unit square with `D` the union of the cell boxes `[i0, i1, j0, j1]`.
    Inclusion { n: usize, boxes: Vec<[usize; 4]> },
}

fn half() -> f64 {
    0.5
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec::SplitRectangle {
            nx: 16,
            ny: 16,
            split: 0.5,
        }
    }
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh> {
        match self {
            MeshSpec::Interval { n_b, n_d, split } => build_interval_mesh(*n_b, *n_d, *split),
            MeshSpec::SplitRectangle { nx, ny, split } => build_split_rectangle_mesh(*nx, *ny, *split),
            MeshSpec::Inclusion { n, boxes } => {
                let boxes: Vec<CellBox> = boxes.iter().map(|b| CellBox::new(b[0], b[1], b[2], b[3])).collect();
                build_inclusion_mesh(*n, &boxes)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConductivitySpec {
    pub sigma_i: f64,
    pub sigma_e: f64,
    pub sigma_d: f64,
}

impl Default for ConductivitySpec {
    fn default() -> Self {
        Self {
            sigma_i: 1.0,
            sigma_e: 1.0,
            sigma_d: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterfaceSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for InterfaceSpec {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IonicSpec {
    /// `default`, `linear`, `clipped-cubic` or `zero`.
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
    /// Uniform initial gating value.
    pub w_in: f64,
}

impl Default for IonicSpec {
    fn default() -> Self {
        Self {
            model: "default".into(),
            slope: None,
            clip: None,
            w_in: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourcePreset {
    #[default]
    Zero,
    /// Gaussian pulse in `f1`, centered in `B`, decaying in time.
    Stimulus,
    /// Smooth random modes drawn from the run seed.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSpec {
    pub preset: SourcePreset,
    pub amplitude: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            preset: SourcePreset::Stimulus,
            amplitude: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPreset {
    #[default]
    Zero,
    /// `amplitude · sin(πx) sin(πy)`, or the constant `amplitude` for `s0`.
    Bump,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub v0: InitialPreset,
    pub v0_amplitude: f64,
    pub s0: InitialPreset,
    pub s0_amplitude: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            v0: InitialPreset::Zero,
            v0_amplitude: 1.0,
            s0: InitialPreset::Zero,
            s0_amplitude: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    pub horizon: f64,
    /// Relative residual for every linear solve.
    pub tolerance: f64,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 0.1,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Write a VTK snapshot every `cadence` steps; 0 writes only the first and last.
    pub cadence: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            cadence: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmsSpec {
    pub spatial_n0: usize,
    pub spatial_levels: usize,
    /// `dt = dt_factor · h²`
    pub dt_factor: f64,
    pub spatial_horizon: f64,
    pub temporal_n: usize,
    pub temporal_dt0: f64,
    pub temporal_levels: usize,
    pub temporal_horizon: f64,
}

impl Default for MmsSpec {
    fn default() -> Self {
        Self {
            spatial_n0: 8,
            spatial_levels: 3,
            dt_factor: 1.0,
            spatial_horizon: 0.1,
            temporal_n: 1024,
            temporal_dt0: 0.02,
            temporal_levels: 3,
            temporal_horizon: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySpec {
    pub mesh_sizes: Vec<usize>,
    pub datasets: usize,
}

impl Default for EnergySpec {
    fn default() -> Self {
        let d = EnergyStudyConfig::default();
        Self {
            mesh_sizes: d.mesh_sizes,
            datasets: d.datasets,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetaSweepSpec {
    pub betas: Vec<f64>,
    pub layer_resolution: f64,
}

impl Default for BetaSweepSpec {
    fn default() -> Self {
        let d = BetaStudyConfig::default();
        Self {
            betas: d.betas,
            layer_resolution: d.layer_resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySpec {
    pub deltas: Vec<f64>,
}

impl Default for StabilitySpec {
    fn default() -> Self {
        Self {
            deltas: vec![1e-3, 1e-2],
        }
    }
}

/// Everything a command needs. Every key is optional; see the `Default`
/// impls for the values used when it is absent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub mesh: MeshSpec,
    pub conductivity: ConductivitySpec,
    pub interface: InterfaceSpec,
    pub ionic: IonicSpec,
    pub sources: SourceSpec,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    pub output: OutputSpec,
    pub mms: MmsSpec,
    pub energy: EnergySpec,
    pub beta_sweep: BetaSweepSpec,
    pub stability: StabilitySpec,
}

/// Parses and validates a TOML document. Errors name the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::config(e.to_string().trim_end().to_string()))?;
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let inner = inner.trim_end();
        if path == "." || path.is_empty() {
            Error::config(inner.to_string())
        } else {
            Error::config(format!("{path}: {inner}"))
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

impl RunConfig {
    /// TOML text that parses back to `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config types serialize to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{key}: must be > 0 and finite, got {v}")))
            }
        }
        fn at_least(key: &str, v: usize, min: usize) -> Result<()> {
            if v >= min {
                Ok(())
            } else {
                Err(Error::config(format!("{key}: must be >= {min}, got {v}")))
            }
        }

        match &self.mesh {
            MeshSpec::Interval { n_b, n_d, split } => {
                at_least("mesh.n_b", *n_b, 1)?;
                at_least("mesh.n_d", *n_d, 1)?;
                if !(*split > 0.0 && *split < 1.0) {
                    return Err(Error::config(format!("mesh.split: must lie in (0, 1), got {split}")));
                }
            }
            MeshSpec::SplitRectangle { nx, ny, split } => {
                at_least("mesh.nx", *nx, 2)?;
                at_least("mesh.ny", *ny, 1)?;
                if !(*split > 0.0 && *split < 1.0) {
                    return Err(Error::config(format!("mesh.split: must lie in (0, 1), got {split}")));
                }
            }
            MeshSpec::Inclusion { n, boxes } => {
                at_least("mesh.n", *n, 3)?;
                if boxes.is_empty() {
                    return Err(Error::config("mesh.boxes: at least one box is required"));
                }
                for (k, b) in boxes.iter().enumerate() {
                    if b[0] >= b[1] || b[2] >= b[3] || b[1] > *n || b[3] > *n {
                        return Err(Error::config(format!(
                            "mesh.boxes[{k}]: need i0 < i1 <= n and j0 < j1 <= n, got {b:?}"
                        )));
                    }
                }
            }
        }
        positive("conductivity.sigma_i", self.conductivity.sigma_i)?;
        positive("conductivity.sigma_e", self.conductivity.sigma_e)?;
        positive("conductivity.sigma_d", self.conductivity.sigma_d)?;
        positive("interface.alpha", self.interface.alpha)?;
        positive("interface.beta", self.interface.beta)?;
        IonicModel::by_name(&self.ionic.model, self.ionic.slope, self.ionic.clip)
            .map_err(|e| Error::config(format!("ionic.model: {e}")))?;
        if !(0.0..=1.0).contains(&self.ionic.w_in) {
            return Err(Error::config(format!(
                "ionic.w_in: must lie in [0, 1], got {}",
                self.ionic.w_in
            )));
        }
        if !self.sources.amplitude.is_finite() {
            return Err(Error::config("sources.amplitude: must be finite"));
        }
        if !self.initial.v0_amplitude.is_finite() || !self.initial.s0_amplitude.is_finite() {
            return Err(Error::config("initial: amplitudes must be finite"));
        }
        positive("time.dt", self.time.dt)?;
        positive("time.horizon", self.time.horizon)?;
        if self.time.dt > self.time.horizon {
            return Err(Error::config(format!(
                "time.dt: must not exceed time.horizon ({} > {})",
                self.time.dt, self.time.horizon
            )));
        }
        if !(self.time.tolerance > 0.0 && self.time.tolerance < 1.0) {
            return Err(Error::config(format!(
                "time.tolerance: must lie in (0, 1), got {}",
                self.time.tolerance
            )));
        }
        let m = &self.mms;
        at_least("mms.spatial_n0", m.spatial_n0, 2)?;
        at_least("mms.spatial_levels", m.spatial_levels, 2)?;
        positive("mms.dt_factor", m.dt_factor)?;
        positive("mms.spatial_horizon", m.spatial_horizon)?;
        at_least("mms.temporal_n", m.temporal_n, 2)?;
        positive("mms.temporal_dt0", m.temporal_dt0)?;
        at_least("mms.temporal_levels", m.temporal_levels, 2)?;
        positive("mms.temporal_horizon", m.temporal_horizon)?;
        if self.energy.mesh_sizes.is_empty() {
            return Err(Error::config("energy.mesh_sizes: at least one mesh is required"));
        }
        for &n in &self.energy.mesh_sizes {
            at_least("energy.mesh_sizes", n, 2)?;
        }
        at_least("energy.datasets", self.energy.datasets, 1)?;
        if self.beta_sweep.betas.len() < 2 {
            return Err(Error::config(
                "beta_sweep.betas: at least two values are needed to fit a slope",
            ));
        }
        for &b in &self.beta_sweep.betas {
            positive("beta_sweep.betas", b)?;
        }
        positive("beta_sweep.layer_resolution", self.beta_sweep.layer_resolution)?;
        if self.stability.deltas.is_empty() || self.stability.deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::config("stability.deltas: need at least one finite value >= 0"));
        }
        Ok(())
    }

    pub fn ionic_model(&self) -> Result<IonicModel> {
        IonicModel::by_name(&self.ionic.model, self.ionic.slope, self.ionic.clip)
    }

    pub fn problem(&self) -> Result<Problem> {
        let mesh = self.mesh.build()?;
        let c = self.conductivity;
        let sigma = Conductivities::uniform(&mesh, c.sigma_i, c.sigma_e, c.sigma_d)?;
        Problem::new(mesh, sigma, self.ionic_model()?)
    }

    /// The ionic term is switched off for the `zero` model.
    pub fn stepper_config(&self) -> StepperConfig {
        StepperConfig::new(
            self.time.dt,
            self.time.horizon,
            self.interface.alpha,
            self.interface.beta,
        )
        .with_tolerance(self.time.tolerance)
        .with_ionic(self.ionic.model != "zero")
    }

    fn random_data(&self) -> RandomData {
        RandomData::batch(self.seed, 1).remove(0)
    }

    pub fn sources(&self) -> SourceSet {
        let a = self.sources.amplitude;
        match self.sources.preset {
            SourcePreset::Zero => SourceSet::zero(),
            SourcePreset::Stimulus => {
                // interval meshes live on y = 0
                let cy = if matches!(self.mesh, MeshSpec::Interval { .. }) {
                    0.0
                } else {
                    0.5
                };
                SourceSet::stimulus(
                    Arc::new(move |x: [f64; 2], t: f64| {
                        let r2 = (x[0] - 0.25).powi(2) + (x[1] - cy).powi(2);
                        a * (-r2 / 0.01).exp() * (-(t / 0.02).powi(2)).exp()
                    }),
                    Arc::new(|_, _| 0.0),
                )
            }
            SourcePreset::Random => {
                let d = self.random_data().sources();
                let (f1, f2) = (d.f1.expect("random f1"), d.f2.expect("random f2"));
                SourceSet::stimulus(
                    Arc::new(move |x: [f64; 2], t: f64| a * f1(x, t)),
                    Arc::new(move |x: [f64; 2], t: f64| a * f2(x, t)),
                )
            }
        }
    }

    pub fn v0(&self) -> Box<dyn Fn([f64; 2]) -> f64 + Send + Sync> {
        let a = self.initial.v0_amplitude;
        match self.initial.v0 {
            InitialPreset::Zero => Box::new(|_| 0.0),
            InitialPreset::Bump => Box::new(move |x: [f64; 2]| a * (PI * x[0]).sin() * (PI * x[1]).sin()),
            InitialPreset::Random => {
                let f = self.random_data().v0();
                Box::new(move |x| a * f(x))
            }
        }
    }

    pub fn s0(&self) -> Box<dyn Fn([f64; 2]) -> f64 + Send + Sync> {
        let a = self.initial.s0_amplitude;
        match self.initial.s0 {
            InitialPreset::Zero => Box::new(|_| 0.0),
            InitialPreset::Bump => Box::new(move |_| a),
            InitialPreset::Random => {
                let f = self.random_data().s0();
                Box::new(move |x| a * f(x))
            }
        }
    }

    pub fn energy_study_config(&self) -> EnergyStudyConfig {
        let c = self.conductivity;
        EnergyStudyConfig {
            mesh_sizes: self.energy.mesh_sizes.clone(),
            datasets: self.energy.datasets,
            seed: self.seed,
            dt: self.time.dt,
            horizon: self.time.horizon,
            alpha: self.interface.alpha,
            beta: self.interface.beta,
            sigma: [c.sigma_i, c.sigma_e, c.sigma_d],
            tolerance: self.time.tolerance,
            ..EnergyStudyConfig::default()
        }
    }

    pub fn beta_study_config(&self) -> BetaStudyConfig {
        BetaStudyConfig {
            betas: self.beta_sweep.betas.clone(),
            alpha: self.interface.alpha,
            dt_max: self.time.dt,
            layer_resolution: self.beta_sweep.layer_resolution,
            horizon: self.time.horizon,
            tolerance: self.time.tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_documented_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.interface.alpha, 1.0);
        assert_eq!(c.interface.beta, 1.0);
        assert_eq!(c.time.dt, 1e-3);
        assert_eq!(c.command, Command::Run);
    }

    #[test]
    fn negative_alpha_names_the_key() {
        let e = parse_config("[interface]\nalpha = -1.0\n").unwrap_err().to_string();
        assert!(e.contains("interface.alpha") && e.contains("> 0"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_path() {
        let e = parse_config("[time]\ndt = 1e-3\nstep = 2\n").unwrap_err().to_string();
        assert!(e.contains("time") && e.contains("step"), "{e}");
        let e = parse_config("colour = 1\n").unwrap_err().to_string();
        assert!(e.contains("colour"), "{e}");
    }

    #[test]
    fn type_mismatch_names_the_key() {
        let e = parse_config("[mesh]\nbuilder = \"interval\"\nn_b = \"four\"\nn_d = 4\nsplit = 0.5\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("mesh"), "{e}");
    }

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        assert_eq!(parse_config(&c.to_toml()).unwrap(), c);
    }
}
