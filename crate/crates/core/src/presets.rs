//! Named experiment configurations.

use crate::config::{
    BcName, CoarseRole, ExperimentConfig, GuessName, InitialName, ModelKind, SourceName,
};
use crate::error::{Error, Result};

const PRESETS: &[(&str, &str)] = &[
    ("heat-dirichlet-N48", "heat, u = 0 at both ends, 48 slices"),
    ("heat-dirichlet-N24", "heat, u = 0 at both ends, 24 slices"),
    ("heat-dirichlet-N12", "heat, u = 0 at both ends, 12 slices"),
    ("heat-dirichlet-N6", "heat, u = 0 at both ends, 6 slices"),
    ("heat-neumann-N48", "heat, insulated ends, 48 slices"),
    ("heat-neumann-N24", "heat, insulated ends, 24 slices"),
    ("heat-neumann-N12", "heat, insulated ends, 12 slices"),
    ("heat-neumann-N6", "heat, insulated ends, 6 slices"),
    ("heat-dirichlet", "alias of heat-dirichlet-N48"),
    ("heat-neumann", "alias of heat-neumann-N48"),
    (
        "spectral-theorem",
        "sine modes on (0, pi), u0 = sin x, no coarse modes, 6 slices",
    ),
    (
        "advection-periodic",
        "upwind advection, a = 1, periodic, 12 slices",
    ),
    (
        "advection-inflow",
        "upwind advection, a = 2, zero inflow, 12 slices",
    ),
    ("wave", "Crank-Nicolson wave, bump initial data, 12 slices"),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn describe(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
}

fn heat(bc: BcName, n_slices: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.model.kind = ModelKind::Heat;
    cfg.model.bc = bc;
    cfg.partition.n_slices = n_slices;
    cfg.parareal.iterations = n_slices;
    cfg
}

fn hyperbolic(kind: ModelKind, bc: BcName, dt: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.model.kind = kind;
    cfg.model.bc = bc;
    cfg.partition.n_slices = 12;
    cfg.fine.dt = Some(dt);
    cfg.parareal.iterations = 12;
    cfg
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let mut cfg = match name {
        "heat-dirichlet" => return preset("heat-dirichlet-N48"),
        "heat-neumann" => return preset("heat-neumann-N48"),
        "heat-dirichlet-N48" => heat(BcName::Dirichlet, 48),
        "heat-dirichlet-N24" => heat(BcName::Dirichlet, 24),
        "heat-dirichlet-N12" => heat(BcName::Dirichlet, 12),
        "heat-dirichlet-N6" => heat(BcName::Dirichlet, 6),
        "heat-neumann-N48" => heat(BcName::Neumann, 48),
        "heat-neumann-N24" => heat(BcName::Neumann, 24),
        "heat-neumann-N12" => heat(BcName::Neumann, 12),
        "heat-neumann-N6" => heat(BcName::Neumann, 6),
        "spectral-theorem" => {
            let mut cfg = ExperimentConfig::default();
            cfg.model.kind = ModelKind::Spectral;
            cfg.model.source = SourceName::Zero;
            cfg.model.modes = 64;
            cfg.model.initial_modes = vec![1.0];
            cfg.partition.n_slices = 6;
            cfg.coarse.modes = 0;
            cfg.parareal.iterations = 6;
            cfg.parareal.initial_guess = GuessName::Zero;
            cfg.parareal.early_stop = false;
            cfg
        }
        "advection-periodic" => {
            let mut cfg = hyperbolic(ModelKind::Advection, BcName::Periodic, 1.0 / 128.0);
            cfg.model.speed = 1.0;
            cfg.coarse.role = CoarseRole::None;
            cfg
        }
        "advection-inflow" => {
            let mut cfg = hyperbolic(ModelKind::Advection, BcName::Inflow, 1.0 / 256.0);
            cfg.model.speed = 2.0;
            cfg.coarse.role = CoarseRole::None;
            cfg
        }
        "wave" => {
            let mut cfg = hyperbolic(ModelKind::Wave, BcName::Dirichlet, 1.0 / 128.0);
            cfg.model.source = SourceName::Zero;
            cfg.model.initial = InitialName::Bump;
            cfg
        }
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset `{other}`; see `parareal presets`"),
            ))
        }
    };
    cfg.preset = Some(name.to_string());
    Ok(cfg)
}
