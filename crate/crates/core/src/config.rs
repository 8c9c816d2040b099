//! Experiment configuration: a TOML document with `[model]`, `[partition]`,
//! `[fine]`, `[coarse]`, `[parareal]` and `[output]` sections. A top-level
//! `preset = "<name>"` starts from a named preset; keys in the document
//! override it. Every key has a default taken from the Dirichlet heat preset.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::driver::{Execution, InitialGuess, PararealConfig, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::heat::HeatModel;
use crate::hyperbolic::{AdvectionModel, WaveModel};
use crate::model::{substeps_for, Model};
use crate::pit::{Basis, BoundaryKind, PropagatorSpec, StateVector, TimePartition};
use crate::presets;
use crate::source::{PulsedGaussian, SourceTerm};
use crate::spectral::{ModeSource, SpectralModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Heat,
    Spectral,
    Advection,
    Wave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcName {
    Dirichlet,
    Neumann,
    Periodic,
    Inflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceName {
    Heater,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisName {
    Sine,
    Cosine,
}

/// Initial condition of grid models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialName {
    Zero,
    /// `sin(pi x)`, or `sin(2 pi x)` on periodic grids.
    Sine,
    /// `exp(-100 (x - 0.5)^2)`.
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseRole {
    Coarse,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessName {
    Default,
    Zero,
    ReplicateU0,
    CoarseSweep,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub bc: BcName,
    pub n_cells: usize,
    pub source: SourceName,
    pub initial: InitialName,
    /// Advection speed.
    pub speed: f64,
    /// Spectral domain `(0, L)`.
    pub domain_length: f64,
    pub basis: BasisName,
    /// Spectral fine mode count.
    pub modes: usize,
    /// Leading spectral coefficients of the initial condition.
    pub initial_modes: Vec<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Heat,
            bc: BcName::Dirichlet,
            n_cells: 128,
            source: SourceName::Heater,
            initial: InitialName::Zero,
            speed: 1.0,
            domain_length: PI,
            basis: BasisName::Sine,
            modes: 64,
            initial_modes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionSection {
    pub t_end: f64,
    pub n_slices: usize,
}

impl Default for PartitionSection {
    fn default() -> Self {
        Self {
            t_end: 3.0,
            n_slices: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FineSection {
    /// Fine time step; must divide the slice width.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Overrides `dt` when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps_per_slice: Option<usize>,
}

impl Default for FineSection {
    fn default() -> Self {
        Self {
            dt: Some(1.0 / 96.0),
            steps_per_slice: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoarseSection {
    pub role: CoarseRole,
    pub steps_per_slice: usize,
    /// Spectral coarse mode count; 0 means no coarse propagator.
    pub modes: usize,
}

impl Default for CoarseSection {
    fn default() -> Self {
        Self {
            role: CoarseRole::Coarse,
            steps_per_slice: 1,
            modes: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PararealSection {
    pub iterations: usize,
    pub initial_guess: GuessName,
    pub seed: u64,
    pub guess_amplitude: f64,
    pub tolerance: f64,
    /// Stop once the sup error reaches `tolerance`.
    pub early_stop: bool,
    pub parallel: bool,
    /// Fill the wall-time column. Off by default so traces are reproducible
    /// byte for byte.
    pub timing: bool,
}

impl Default for PararealSection {
    fn default() -> Self {
        Self {
            iterations: 48,
            initial_guess: GuessName::Default,
            seed: 0,
            guess_amplitude: 1.0,
            tolerance: DEFAULT_TOLERANCE,
            early_stop: true,
            parallel: true,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub model: ModelSection,
    pub partition: PartitionSection,
    pub fine: FineSection,
    pub coarse: CoarseSection,
    pub parareal: PararealSection,
    pub output: OutputSection,
}

/// A ready-to-run experiment.
pub struct Experiment {
    pub model: Box<dyn Model>,
    pub u0: StateVector,
    pub parareal: PararealConfig,
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn field_err(field: &str, e: impl std::fmt::Display) -> Error {
    Error::config(field, e.to_string())
}

impl ExperimentConfig {
    /// Parses a config document, applying its `preset` first if present.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| field_err("<document>", e))?;
        let mut merged = match table.get("preset") {
            Some(toml::Value::String(name)) => {
                let base = presets::preset(name)?;
                toml::Table::try_from(&base).map_err(|e| field_err("preset", e))?
            }
            Some(_) => return Err(Error::config("preset", "must be a string")),
            None => toml::Table::new(),
        };
        merge(&mut merged, table);
        let cfg: ExperimentConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| field_err(&offending_key(&e.to_string()), e))?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config("--config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn without_coarse(mut self) -> Self {
        self.coarse.role = CoarseRole::None;
        self.coarse.modes = 0;
        if self.parareal.initial_guess == GuessName::CoarseSweep {
            self.parareal.initial_guess = GuessName::Default;
        }
        self
    }

    fn source(&self) -> SourceTerm {
        match self.model.source {
            SourceName::Heater => SourceTerm::heater(),
            SourceName::Zero => SourceTerm::Zero,
        }
    }

    fn grid_initial(&self, periodic: bool) -> impl Fn(f64) -> f64 {
        let kind = self.model.initial;
        move |x: f64| match kind {
            InitialName::Zero => 0.0,
            InitialName::Sine if periodic => (2.0 * PI * x).sin(),
            InitialName::Sine => (PI * x).sin(),
            InitialName::Bump => (-100.0 * (x - 0.5) * (x - 0.5)).exp(),
        }
    }

    fn fine_steps(&self, slice_width: f64) -> Result<usize> {
        if let Some(s) = self.fine.steps_per_slice {
            if s == 0 {
                return Err(Error::config("fine.steps_per_slice", "must be at least 1"));
            }
            return Ok(s);
        }
        match self.fine.dt {
            Some(dt) => substeps_for(slice_width, dt, "fine.dt"),
            None => Err(Error::config(
                "fine.dt",
                "either dt or steps_per_slice is required",
            )),
        }
    }

    /// Builds the model, initial condition and driver configuration.
    pub fn build(&self) -> Result<Experiment> {
        let part = &self.partition;
        if !(part.t_end > 0.0) || !part.t_end.is_finite() {
            return Err(Error::config("partition.t_end", "must be positive"));
        }
        if part.n_slices == 0 {
            return Err(Error::config("partition.n_slices", "must be at least 1"));
        }
        let partition = TimePartition::uniform(part.t_end, part.n_slices)
            .map_err(|e| field_err("partition", e))?;
        let width = partition.slice_width();
        let m = &self.model;

        let coarse_present = self.coarse.role == CoarseRole::Coarse;
        let (model, u0, fine, coarse): (
            Box<dyn Model>,
            StateVector,
            PropagatorSpec,
            PropagatorSpec,
        ) = match m.kind {
            ModelKind::Spectral => {
                let basis = match m.basis {
                    BasisName::Sine => Basis::Sine,
                    BasisName::Cosine => Basis::Cosine,
                };
                if m.modes == 0 {
                    return Err(Error::config("model.modes", "must be at least 1"));
                }
                let source = match m.source {
                    SourceName::Zero => ModeSource::Zero,
                    SourceName::Heater => ModeSource::project_pulsed(
                        PulsedGaussian::heater(),
                        basis,
                        m.domain_length,
                        m.modes,
                    ),
                };
                let sm = SpectralModel::new(m.domain_length, basis, m.modes, source)
                    .map_err(|e| field_err("model.domain_length", e))?;
                let u0 = sm
                    .state(&m.initial_modes)
                    .map_err(|e| field_err("model.initial_modes", e))?;
                if coarse_present && self.coarse.modes >= m.modes {
                    return Err(Error::config(
                        "coarse.modes",
                        format!("must be below model.modes = {}", m.modes),
                    ));
                }
                let coarse = if coarse_present {
                    PropagatorSpec::coarse_modes(self.coarse.modes)
                } else {
                    PropagatorSpec::none()
                };
                (
                    Box::new(sm),
                    u0,
                    PropagatorSpec::fine_modes(m.modes),
                    coarse,
                )
            }
            kind => {
                let fine_steps = self.fine_steps(width)?;
                let coarse = if coarse_present {
                    if self.coarse.steps_per_slice == 0 {
                        return Err(Error::config(
                            "coarse.steps_per_slice",
                            "must be at least 1",
                        ));
                    }
                    PropagatorSpec::coarse(self.coarse.steps_per_slice)
                } else {
                    PropagatorSpec::none()
                };
                let fine = PropagatorSpec::fine(fine_steps);
                match kind {
                    ModelKind::Heat => {
                        let bc = match m.bc {
                            BcName::Dirichlet => BoundaryKind::DirichletZero,
                            BcName::Neumann => BoundaryKind::NeumannZero,
                            other => {
                                return Err(Error::config(
                                    "model.bc",
                                    format!("heat supports dirichlet or neumann, got {other:?}"),
                                ))
                            }
                        };
                        let hm = HeatModel::new(m.n_cells, bc, self.source())
                            .map_err(|e| field_err("model.n_cells", e))?;
                        let u0 = hm.state_from_fn(self.grid_initial(false));
                        (Box::new(hm), u0, fine, coarse)
                    }
                    ModelKind::Advection => {
                        let bc = match m.bc {
                            BcName::Periodic => BoundaryKind::Periodic,
                            BcName::Inflow | BcName::Dirichlet => BoundaryKind::Inflow,
                            other => {
                                return Err(Error::config(
                                    "model.bc",
                                    format!("advection supports periodic or inflow, got {other:?}"),
                                ))
                            }
                        };
                        if !(m.speed > 0.0) {
                            return Err(Error::config("model.speed", "must be positive"));
                        }
                        let am = AdvectionModel::new(m.speed, m.n_cells, bc, self.source())
                            .map_err(|e| field_err("model.n_cells", e))?;
                        for (spec, field) in
                            [(&fine, "fine.dt"), (&coarse, "coarse.steps_per_slice")]
                        {
                            if spec.is_none() {
                                continue;
                            }
                            let cfl = am.courant(width / spec.steps_per_slice as f64);
                            if cfl > 1.0 + 1e-12 {
                                return Err(Error::config(
                                    field,
                                    format!("upwind CFL number {cfl} exceeds 1"),
                                ));
                            }
                        }
                        let u0 = am.state_from_fn(self.grid_initial(bc == BoundaryKind::Periodic));
                        (Box::new(am), u0, fine, coarse)
                    }
                    ModelKind::Wave => {
                        if m.bc != BcName::Dirichlet {
                            return Err(Error::config("model.bc", "wave supports dirichlet only"));
                        }
                        let wm = WaveModel::new(m.n_cells, self.source())
                            .map_err(|e| field_err("model.n_cells", e))?;
                        let u0 = wm.state_from_fns(self.grid_initial(false), |_| 0.0);
                        (Box::new(wm), u0, fine, coarse)
                    }
                    ModelKind::Spectral => unreachable!(),
                }
            }
        };

        let p = &self.parareal;
        if p.iterations == 0 {
            return Err(Error::config("parareal.iterations", "must be at least 1"));
        }
        let initial_guess = match p.initial_guess {
            GuessName::Default => None,
            GuessName::Zero => Some(InitialGuess::Zero),
            GuessName::ReplicateU0 => Some(InitialGuess::ReplicateU0),
            GuessName::CoarseSweep => {
                if model.is_absent(&coarse) {
                    return Err(Error::config(
                        "parareal.initial_guess",
                        "coarse_sweep needs a coarse propagator",
                    ));
                }
                Some(InitialGuess::CoarseSweep)
            }
            GuessName::Random => {
                if !(p.guess_amplitude >= 0.0) || !p.guess_amplitude.is_finite() {
                    return Err(Error::config(
                        "parareal.guess_amplitude",
                        "must be a finite nonnegative number",
                    ));
                }
                Some(InitialGuess::Random {
                    seed: p.seed,
                    amplitude: p.guess_amplitude,
                })
            }
        };
        if p.early_stop && !(p.tolerance >= 0.0) {
            return Err(Error::config("parareal.tolerance", "must be nonnegative"));
        }
        let mut parareal = PararealConfig::new(partition, fine, coarse, p.iterations)
            .with_tolerance(p.early_stop.then_some(p.tolerance))
            .with_execution(if p.parallel {
                Execution::Parallel
            } else {
                Execution::Sequential
            });
        parareal.initial_guess = initial_guess;
        parareal.record_timing = p.timing;
        model
            .check_specs(&parareal.fine, &parareal.coarse)
            .map_err(|e| field_err("coarse", e))?;
        Ok(Experiment {
            model,
            u0,
            parareal,
        })
    }
}

/// Pulls a backquoted key name out of a deserialisation message, if any.
fn offending_key(msg: &str) -> String {
    msg.split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<document>".to_string())
}
