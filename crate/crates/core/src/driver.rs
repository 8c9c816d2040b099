//! Parareal driver with an optional coarse propagator.
//!
//! With a coarse propagator `G` the update is
//! `U_{n+1}^{k+1} = F(U_n^k) + G(U_n^{k+1}) - G(U_n^k)`; without one it
//! reduces to the block Jacobi sweep `U_{n+1}^{k+1} = F(U_n^k)`.
//! Fine solves of one iteration run concurrently over slices, each writing
//! its own output slot, so results do not depend on scheduling.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::analysis::bound_from_rate;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::pit::{
    discrete_l2_norm, IterationTrace, PropagatorSpec, StateVector, TimePartition, TraceEntry,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialGuess {
    /// `U_n^0 = 0` for `n >= 1`.
    Zero,
    /// `U_n^0 = u_0` for every `n`.
    ReplicateU0,
    /// Sequential coarse sweep from `u_0`.
    CoarseSweep,
    /// `u_0` plus uniform noise in `[-amplitude, amplitude]`, seeded.
    Random { seed: u64, amplitude: f64 },
}

impl InitialGuess {
    pub fn label(&self) -> String {
        match self {
            InitialGuess::Zero => "zero".into(),
            InitialGuess::ReplicateU0 => "replicate_u0".into(),
            InitialGuess::CoarseSweep => "coarse_sweep".into(),
            InitialGuess::Random { seed, amplitude } => {
                format!("random(seed={seed}, amplitude={amplitude})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PararealConfig {
    pub partition: TimePartition,
    pub fine: PropagatorSpec,
    /// `Role::None` (or zero spectral modes) runs without coarse correction.
    pub coarse: PropagatorSpec,
    pub max_iterations: usize,
    /// `None` picks `CoarseSweep` when a coarse propagator exists and
    /// `ReplicateU0` otherwise.
    pub initial_guess: Option<InitialGuess>,
    /// Stop once the sup error drops to this value. `None` always runs
    /// `max_iterations`.
    pub tolerance: Option<f64>,
    pub execution: Execution,
    pub record_timing: bool,
}

impl PararealConfig {
    pub fn new(
        partition: TimePartition,
        fine: PropagatorSpec,
        coarse: PropagatorSpec,
        max_iterations: usize,
    ) -> Self {
        Self {
            partition,
            fine,
            coarse,
            max_iterations,
            initial_guess: None,
            tolerance: Some(DEFAULT_TOLERANCE),
            execution: Execution::Parallel,
            record_timing: false,
        }
    }

    pub fn with_initial_guess(mut self, guess: InitialGuess) -> Self {
        self.initial_guess = Some(guess);
        self
    }

    pub fn with_tolerance(mut self, tolerance: Option<f64>) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn without_coarse(mut self) -> Self {
        self.coarse = PropagatorSpec::none();
        self
    }

    pub fn resolved_guess(&self, model: &dyn Model) -> InitialGuess {
        self.initial_guess
            .unwrap_or(if model.is_absent(&self.coarse) {
                InitialGuess::ReplicateU0
            } else {
                InitialGuess::CoarseSweep
            })
    }

    pub fn validate(&self, model: &dyn Model, u0: &StateVector) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::config("parareal.iterations", "must be at least 1"));
        }
        if !self.partition.is_uniform() {
            return Err(Error::config(
                "partition",
                "the driver needs a uniform partition",
            ));
        }
        model.check_specs(&self.fine, &self.coarse)?;
        u0.ensure_layout(&model.layout())?;
        if self.resolved_guess(model) == InitialGuess::CoarseSweep && model.is_absent(&self.coarse)
        {
            return Err(Error::config(
                "parareal.initial_guess",
                "coarse_sweep needs a coarse propagator",
            ));
        }
        if let Some(InitialGuess::Random { amplitude, .. }) = self.initial_guess {
            if !(amplitude >= 0.0) || !amplitude.is_finite() {
                return Err(Error::config(
                    "parareal.guess_amplitude",
                    "must be a finite nonnegative number",
                ));
            }
        }
        Ok(())
    }
}

/// Interface values `U_0^k .. U_N^k` of one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct PararealState {
    pub k: usize,
    pub interfaces: Vec<StateVector>,
    pub previous: Option<Vec<StateVector>>,
}

/// Interface values of the sequential fine sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub interfaces: Vec<StateVector>,
}

/// `U_{n+1} = F(U_n)` from `u0`, slice after slice.
pub fn reference_fine_sequential(
    model: &dyn Model,
    u0: &StateVector,
    config: &PararealConfig,
) -> Result<ReferenceSolution> {
    let p = &config.partition;
    let mut interfaces = Vec::with_capacity(p.n_slices() + 1);
    interfaces.push(u0.clone());
    for n in 0..p.n_slices() {
        let (a, b) = p.slice(n);
        let next = model.propagate(&config.fine, &interfaces[n], a, b)?;
        interfaces.push(next);
    }
    Ok(ReferenceSolution { interfaces })
}

pub fn initialize_guess(
    model: &dyn Model,
    u0: &StateVector,
    config: &PararealConfig,
) -> Result<PararealState> {
    let p = &config.partition;
    let n = p.n_slices();
    let interfaces = match config.resolved_guess(model) {
        InitialGuess::Zero => {
            let mut v = vec![StateVector::zeros(model.layout()); n + 1];
            v[0] = u0.clone();
            v
        }
        InitialGuess::ReplicateU0 => vec![u0.clone(); n + 1],
        InitialGuess::CoarseSweep => {
            if model.is_absent(&config.coarse) {
                return Err(Error::config(
                    "parareal.initial_guess",
                    "coarse_sweep needs a coarse propagator",
                ));
            }
            let mut v = Vec::with_capacity(n + 1);
            v.push(u0.clone());
            for i in 0..n {
                let (a, b) = p.slice(i);
                let next = model.propagate(&config.coarse, &v[i], a, b)?;
                v.push(next);
            }
            v
        }
        InitialGuess::Random { seed, amplitude } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut v = Vec::with_capacity(n + 1);
            v.push(u0.clone());
            for _ in 0..n {
                let noisy = u0
                    .values()
                    .iter()
                    .map(|x| x + amplitude * rng.gen_range(-1.0..=1.0))
                    .collect();
                v.push(StateVector::new(*u0.layout(), noisy)?);
            }
            v
        }
    };
    Ok(PararealState {
        k: 0,
        interfaces,
        previous: None,
    })
}

fn map_slices<F>(execution: Execution, n: usize, f: F) -> Result<Vec<StateVector>>
where
    F: Fn(usize) -> Result<StateVector> + Sync + Send,
{
    match execution {
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        Execution::Sequential => (0..n).map(f).collect(),
    }
}

/// One Parareal iteration `k -> k + 1`.
pub fn parareal_iterate(
    model: &dyn Model,
    state: &PararealState,
    config: &PararealConfig,
) -> Result<PararealState> {
    let p = &config.partition;
    let n = p.n_slices();
    let current = &state.interfaces;

    let fine = map_slices(config.execution, n, |i| {
        let (a, b) = p.slice(i);
        model.propagate(&config.fine, &current[i], a, b)
    })?;

    let next = if model.is_absent(&config.coarse) {
        let mut next = Vec::with_capacity(n + 1);
        next.push(current[0].clone());
        next.extend(fine);
        next
    } else {
        let coarse_old = map_slices(config.execution, n, |i| {
            let (a, b) = p.slice(i);
            model.propagate(&config.coarse, &current[i], a, b)
        })?;
        let mut next: Vec<StateVector> = Vec::with_capacity(n + 1);
        next.push(current[0].clone());
        for i in 0..n {
            let (a, b) = p.slice(i);
            let coarse_new = model.propagate(&config.coarse, &next[i], a, b)?;
            // F + (G_new - G_old): the correction is exactly zero once the
            // incoming interface value stops changing.
            let values = fine[i]
                .values()
                .iter()
                .zip(coarse_new.values().iter().zip(coarse_old[i].values()))
                .map(|(f, (gn, go))| f + (gn - go))
                .collect();
            next.push(StateVector::new(*fine[i].layout(), values)?);
        }
        next
    };

    if next.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite interface value at iteration {}",
            state.k + 1
        )));
    }

    Ok(PararealState {
        k: state.k + 1,
        interfaces: next,
        previous: Some(current.clone()),
    })
}

/// Everything produced by a run: trace, reference and all iterates.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: IterationTrace,
    pub reference: ReferenceSolution,
    pub iterates: Vec<Vec<StateVector>>,
}

fn errors_against(reference: &ReferenceSolution, interfaces: &[StateVector]) -> Result<Vec<f64>> {
    interfaces
        .iter()
        .zip(&reference.interfaces)
        .map(|(u, r)| Ok(discrete_l2_norm(&u.difference(r)?)))
        .collect()
}

fn metadata(model: &dyn Model, config: &PararealConfig, trace: &mut IterationTrace) {
    let p = &config.partition;
    let m = &mut trace.metadata;
    m.insert("model".into(), model.name());
    m.insert("t_end".into(), format!("{}", p.t_end()));
    m.insert("n_slices".into(), p.n_slices().to_string());
    m.insert("slice_width".into(), format!("{}", p.slice_width()));
    m.insert(
        "fine_steps_per_slice".into(),
        config.fine.steps_per_slice.to_string(),
    );
    m.insert("fine_modes".into(), config.fine.mode_count.to_string());
    let coarse = if model.is_absent(&config.coarse) {
        "none".to_string()
    } else {
        format!(
            "steps_per_slice={} modes={}",
            config.coarse.steps_per_slice, config.coarse.mode_count
        )
    };
    m.insert("coarse".into(), coarse);
    m.insert("initial_guess".into(), config.resolved_guess(model).label());
    m.insert("max_iterations".into(), config.max_iterations.to_string());
    m.insert(
        "tolerance".into(),
        config
            .tolerance
            .map_or_else(|| "none".to_string(), |t| format!("{t:e}")),
    );
    m.insert(
        "norm".into(),
        "discrete L2: sqrt(dx * sum u^2) on grids, Parseval on modes".into(),
    );
    m.insert("error_reference".into(), "sequential fine sweep".into());
}

/// Runs Parareal and keeps every iterate.
pub fn run_detailed(
    model: &dyn Model,
    u0: &StateVector,
    config: &PararealConfig,
) -> Result<RunOutput> {
    config.validate(model, u0)?;
    let reference = reference_fine_sequential(model, u0, config)?;
    let rate = model.uncaptured_decay_rate(&config.coarse);
    let width = config.partition.slice_width();

    let mut trace = IterationTrace::default();
    metadata(model, config, &mut trace);

    let mut state = initialize_guess(model, u0, config)?;
    let mut iterates = vec![state.interfaces.clone()];
    let errors = errors_against(&reference, &state.interfaces)?;
    let sup0 = errors.iter().cloned().fold(0.0, f64::max);
    let record = |trace: &mut IterationTrace,
                  k: usize,
                  errors: &[f64],
                  elapsed: Option<f64>|
     -> Result<f64> {
        let bound = rate.map(|r| bound_from_rate(r, width, k, sup0));
        for (n, &e) in errors.iter().enumerate() {
            trace.push(TraceEntry {
                k,
                n,
                error_l2: e,
                bound,
                wall_time_ms: elapsed,
            })?;
        }
        Ok(errors.iter().cloned().fold(0.0, f64::max))
    };
    let timing0 = config.record_timing.then_some(0.0);
    let mut sup = record(&mut trace, 0, &errors, timing0)?;

    for _ in 0..config.max_iterations {
        if config.tolerance.is_some_and(|tol| sup <= tol) {
            break;
        }
        let start = Instant::now();
        state = parareal_iterate(model, &state, config)?;
        let elapsed = config
            .record_timing
            .then(|| start.elapsed().as_secs_f64() * 1e3);
        let errors = errors_against(&reference, &state.interfaces)?;
        sup = record(&mut trace, state.k, &errors, elapsed)?;
        iterates.push(state.interfaces.clone());
    }

    Ok(RunOutput {
        trace,
        reference,
        iterates,
    })
}

/// Runs Parareal and returns the error trace.
pub fn run(model: &dyn Model, u0: &StateVector, config: &PararealConfig) -> Result<IterationTrace> {
    Ok(run_detailed(model, u0, config)?.trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::HeatModel;
    use crate::pit::{make_uniform_partition, BoundaryKind};
    use crate::source::SourceTerm;
    use crate::spectral::{ModeSource, SpectralModel};
    use crate::Basis;
    use std::f64::consts::PI;

    fn small_heat(bc: BoundaryKind) -> HeatModel {
        HeatModel::new(32, bc, SourceTerm::heater()).unwrap()
    }

    fn heat_config(n: usize) -> PararealConfig {
        let p = make_uniform_partition(3.0, n).unwrap();
        let steps = (96 / n).max(1);
        PararealConfig::new(p, PropagatorSpec::fine(steps), PropagatorSpec::coarse(1), n)
            .with_tolerance(None)
    }

    #[test]
    fn single_slice_reference_is_one_fine_solve() {
        let m = small_heat(BoundaryKind::DirichletZero);
        let u0 = m.state_from_fn(|x| (PI * x).sin());
        let cfg = heat_config(1);
        let r = reference_fine_sequential(&m, &u0, &cfg).unwrap();
        let direct = m.propagate(&cfg.fine, &u0, 0.0, 3.0).unwrap();
        assert_eq!(r.interfaces.len(), 2);
        assert_eq!(r.interfaces[1], direct);
    }

    #[test]
    fn finite_step_property_is_exact() {
        for bc in [BoundaryKind::DirichletZero, BoundaryKind::NeumannZero] {
            let m = small_heat(bc);
            let u0 = StateVector::zeros(m.layout());
            for coarse in [true, false] {
                let mut cfg = heat_config(8);
                if !coarse {
                    cfg = cfg.without_coarse();
                }
                let out = run_detailed(&m, &u0, &cfg).unwrap();
                for (k, it) in out.iterates.iter().enumerate() {
                    for n in 0..=k.min(8) {
                        assert_eq!(it[n], out.reference.interfaces[n], "k={k} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn initial_guesses() {
        let m = small_heat(BoundaryKind::DirichletZero);
        let u0 = StateVector::zeros(m.layout());
        let cfg = heat_config(4).with_initial_guess(InitialGuess::Zero);
        let s = initialize_guess(&m, &u0, &cfg).unwrap();
        assert!(s
            .interfaces
            .iter()
            .all(|v| v.values().iter().all(|&x| x == 0.0)));

        let cfg = heat_config(4);
        assert_eq!(cfg.resolved_guess(&m), InitialGuess::CoarseSweep);
        let s = initialize_guess(&m, &u0, &cfg).unwrap();
        let one_step = m.backward_euler_step(&u0, 0.0, 0.75).unwrap();
        assert_eq!(s.interfaces[1], one_step);

        let cfg = heat_config(4).without_coarse();
        assert_eq!(cfg.resolved_guess(&m), InitialGuess::ReplicateU0);
        let bad = heat_config(4)
            .without_coarse()
            .with_initial_guess(InitialGuess::CoarseSweep);
        assert!(matches!(run(&m, &u0, &bad), Err(Error::Config { .. })));
    }

    #[test]
    fn replicate_guess_copies_modes() {
        let m = SpectralModel::new(PI, Basis::Sine, 8, ModeSource::Zero).unwrap();
        let u0 = m.state(&[1.0, 0.5, 0.25]).unwrap();
        let p = make_uniform_partition(2.0, 4).unwrap();
        let cfg = PararealConfig::new(p, PropagatorSpec::fine_modes(8), PropagatorSpec::none(), 4)
            .with_initial_guess(InitialGuess::ReplicateU0);
        let s = initialize_guess(&m, &u0, &cfg).unwrap();
        assert!(s.interfaces.iter().all(|v| v == &u0));
    }

    #[test]
    fn random_guess_is_seeded() {
        let m = small_heat(BoundaryKind::NeumannZero);
        let u0 = StateVector::zeros(m.layout());
        let cfg = heat_config(4).with_initial_guess(InitialGuess::Random {
            seed: 3,
            amplitude: 0.5,
        });
        let a = initialize_guess(&m, &u0, &cfg).unwrap();
        let b = initialize_guess(&m, &u0, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.interfaces[0], u0);
        assert!(a.interfaces[1].values().iter().all(|v| v.abs() <= 0.5));
    }

    #[test]
    fn spectral_single_mode_contracts_by_exp() {
        let m = SpectralModel::new(PI, Basis::Sine, 16, ModeSource::Zero).unwrap();
        let u0 = m.state(&[1.0]).unwrap();
        let p = make_uniform_partition(3.0, 6).unwrap();
        let cfg = PararealConfig::new(p, PropagatorSpec::fine_modes(16), PropagatorSpec::none(), 5)
            .with_initial_guess(InitialGuess::Zero)
            .with_tolerance(None);
        let trace = run(&m, &u0, &cfg).unwrap();
        let q = (-0.5f64).exp();
        for k in 0..5 {
            let r = trace.sup_error(k + 1).unwrap() / trace.sup_error(k).unwrap();
            assert!((r - q).abs() < 1e-13 * q);
        }
    }

    #[test]
    fn captured_modes_are_exact_after_one_iteration() {
        let m = SpectralModel::new(PI, Basis::Sine, 8, ModeSource::Zero).unwrap();
        let u0 = m.state(&[1.0, -0.5, 0.25, 0.125]).unwrap();
        let p = make_uniform_partition(3.0, 6).unwrap();
        let cfg = PararealConfig::new(
            p,
            PropagatorSpec::fine_modes(8),
            PropagatorSpec::coarse_modes(2),
            4,
        )
        .with_initial_guess(InitialGuess::ReplicateU0)
        .with_tolerance(None);
        let out = run_detailed(&m, &u0, &cfg).unwrap();
        for it in &out.iterates[1..] {
            for (u, r) in it.iter().zip(&out.reference.interfaces) {
                for idx in 0..2 {
                    assert!((u.values()[idx] - r.values()[idx]).abs() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn early_stop_and_bounds() {
        let m = SpectralModel::new(PI, Basis::Sine, 8, ModeSource::Zero).unwrap();
        let u0 = m.state(&[1.0]).unwrap();
        let p = make_uniform_partition(3.0, 6).unwrap();
        let cfg = PararealConfig::new(p, PropagatorSpec::fine_modes(8), PropagatorSpec::none(), 50);
        let trace = run(&m, &u0, &cfg).unwrap();
        assert!(trace.last_iteration().unwrap() <= 6);
        assert!(trace.sup_errors().last().unwrap() <= &DEFAULT_TOLERANCE);
        for k in 0..=trace.last_iteration().unwrap() {
            assert!(trace.sup_error(k).unwrap() <= trace.bound(k).unwrap() + 1e-12);
        }
    }

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let m = small_heat(BoundaryKind::NeumannZero);
        let u0 = StateVector::zeros(m.layout());
        let par = run(&m, &u0, &heat_config(12)).unwrap();
        let seq = run(
            &m,
            &u0,
            &heat_config(12).with_execution(Execution::Sequential),
        )
        .unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn zero_iterations_rejected() {
        let m = small_heat(BoundaryKind::DirichletZero);
        let u0 = StateVector::zeros(m.layout());
        let mut cfg = heat_config(4);
        cfg.max_iterations = 0;
        assert!(matches!(run(&m, &u0, &cfg), Err(Error::Config { .. })));
    }
}
