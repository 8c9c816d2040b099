//! Shared domain types: time partitions, state vectors, propagator
//! descriptions and iteration traces.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Interface times `T_0 < T_1 < ... < T_N` of a parallel-in-time run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    boundaries: Vec<f64>,
}

impl TimePartition {
    /// Uniform partition of `[0, t_end]` into `n_slices` slices.
    ///
    /// Each boundary is computed as `n * t_end / n_slices` rather than by
    /// accumulation, so boundaries never drift.
    pub fn uniform(t_end: f64, n_slices: usize) -> Result<Self> {
        Self::uniform_from(0.0, t_end, n_slices)
    }

    pub fn uniform_from(t_start: f64, t_end: f64, n_slices: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_start.is_finite()) || t_end <= t_start {
            return Err(Error::invalid(format!(
                "time interval must satisfy t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        if n_slices == 0 {
            return Err(Error::invalid("n_slices must be at least 1"));
        }
        let len = t_end - t_start;
        let n = n_slices as f64;
        let boundaries = (0..=n_slices)
            .map(|i| {
                if i == n_slices {
                    t_end
                } else {
                    t_start + i as f64 * len / n
                }
            })
            .collect();
        Ok(Self { boundaries })
    }

    /// Arbitrary strictly increasing boundaries.
    pub fn from_boundaries(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::invalid("a partition needs at least two boundaries"));
        }
        if boundaries.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "partition boundaries must be strictly increasing",
            ));
        }
        Ok(Self { boundaries })
    }

    pub fn n_slices(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn t_start(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn t_end(&self) -> f64 {
        self.boundaries[self.boundaries.len() - 1]
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// `(T_n, T_{n+1})` for slice `n`.
    pub fn slice(&self, n: usize) -> (f64, f64) {
        (self.boundaries[n], self.boundaries[n + 1])
    }

    /// Nominal slice width `(T_N - T_0) / N`.
    pub fn slice_width(&self) -> f64 {
        (self.t_end() - self.t_start()) / self.n_slices() as f64
    }

    /// True when every slice width agrees with the nominal one up to a few ulps
    /// of the interval length.
    pub fn is_uniform(&self) -> bool {
        let dt = self.slice_width();
        let tol = 16.0 * f64::EPSILON * (self.t_end().abs() + self.t_start().abs()).max(1.0);
        self.boundaries
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= tol)
    }
}

/// Convenience wrapper matching the operation name used throughout the docs.
pub fn make_uniform_partition(t_end: f64, n_slices: usize) -> Result<TimePartition> {
    TimePartition::uniform(t_end, n_slices)
}

/// Boundary treatment of a grid state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// Homogeneous Dirichlet; only interior points are stored.
    DirichletZero,
    /// Homogeneous Neumann; every point including both ends is stored.
    NeumannZero,
    /// Periodic; points `x_0 .. x_{n-1}`.
    Periodic,
    /// Zero inflow at the left end; points `x_1 .. x_n`.
    Inflow,
}

/// Spectral basis of a mode state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `sin(m pi x / L)`, `m >= 1` (Dirichlet).
    Sine,
    /// `cos(m pi x / L)`, `m >= 0` (Neumann, includes the constant mode).
    Cosine,
}

impl Basis {
    /// Mode number carried by coefficient slot `index`.
    pub fn mode_number(self, index: usize) -> usize {
        match self {
            Basis::Sine => index + 1,
            Basis::Cosine => index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    /// Point values on a uniform grid. `components` > 1 stacks several
    /// fields of `n_points` values each (e.g. displacement and velocity).
    Grid {
        n_points: usize,
        dx: f64,
        bc: BoundaryKind,
        components: usize,
    },
    /// `count` spectral coefficients on `(0, domain_length)`.
    Modes {
        count: usize,
        basis: Basis,
        domain_length: f64,
    },
}

impl Layout {
    pub fn grid(n_points: usize, dx: f64, bc: BoundaryKind) -> Self {
        Layout::Grid {
            n_points,
            dx,
            bc,
            components: 1,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Layout::Grid {
                n_points,
                components,
                ..
            } => n_points * components,
            Layout::Modes { count, .. } => count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A spatial snapshot: grid values or mode coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: Layout,
    values: Vec<f64>,
}

impl StateVector {
    pub fn new(layout: Layout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::invalid(format!(
                "state has {} values but layout expects {}",
                values.len(),
                layout.len()
            )));
        }
        Ok(Self { layout, values })
    }

    pub fn zeros(layout: Layout) -> Self {
        Self {
            values: vec![0.0; layout.len()],
            layout,
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same layout, new values. Panics on length mismatch (internal use).
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.layout.len());
        Self {
            layout: self.layout,
            values,
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.with_values(self.values.iter().map(|v| alpha * v).collect())
    }

    pub fn ensure_layout(&self, expected: &Layout) -> Result<()> {
        if &self.layout != expected {
            return Err(Error::invalid(format!(
                "state layout {:?} does not match model layout {:?}",
                self.layout, expected
            )));
        }
        Ok(())
    }

    /// `self - other`; layouts must agree.
    pub fn difference(&self, other: &StateVector) -> Result<StateVector> {
        other.ensure_layout(&self.layout)?;
        Ok(self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Discrete L2 norm. Grid layouts use `sqrt(dx * sum v^2)`; mode layouts use
/// the Parseval norm of the basis on `(0, L)`.
pub fn discrete_l2_norm(s: &StateVector) -> f64 {
    match *s.layout() {
        Layout::Grid { dx, .. } => (dx * s.values().iter().map(|v| v * v).sum::<f64>()).sqrt(),
        Layout::Modes {
            basis,
            domain_length,
            ..
        } => {
            let half = 0.5 * domain_length;
            let sum: f64 = s
                .values()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let w = if basis.mode_number(i) == 0 {
                        domain_length
                    } else {
                        half
                    };
                    w * c * c
                })
                .sum();
            sum.sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Fine,
    Coarse,
    /// No propagator at all: coarse-free Parareal.
    None,
}

/// How a model should propagate over one slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagatorSpec {
    pub role: Role,
    /// Substeps per slice for time-discrete models.
    pub steps_per_slice: usize,
    /// Retained basis functions for spectral models.
    pub mode_count: usize,
}

impl PropagatorSpec {
    pub fn fine(steps_per_slice: usize) -> Self {
        Self {
            role: Role::Fine,
            steps_per_slice,
            mode_count: 0,
        }
    }

    pub fn coarse(steps_per_slice: usize) -> Self {
        Self {
            role: Role::Coarse,
            steps_per_slice,
            mode_count: 0,
        }
    }

    pub fn fine_modes(mode_count: usize) -> Self {
        Self {
            role: Role::Fine,
            steps_per_slice: 1,
            mode_count,
        }
    }

    pub fn coarse_modes(mode_count: usize) -> Self {
        Self {
            role: Role::Coarse,
            steps_per_slice: 1,
            mode_count,
        }
    }

    pub fn none() -> Self {
        Self {
            role: Role::None,
            steps_per_slice: 0,
            mode_count: 0,
        }
    }

    /// Builds a spec from explicit fields and checks the role rules.
    pub fn new(role: Role, steps_per_slice: usize, mode_count: usize) -> Result<Self> {
        let spec = Self {
            role,
            steps_per_slice,
            mode_count,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.role == Role::Fine && self.steps_per_slice == 0 {
            return Err(Error::invalid("fine propagator needs steps_per_slice >= 1"));
        }
        if self.role == Role::Coarse && self.steps_per_slice == 0 {
            return Err(Error::invalid(
                "coarse propagator needs steps_per_slice >= 1",
            ));
        }
        Ok(())
    }

    /// True for `Role::None`. A spectral coarse spec with zero modes is also
    /// absent, but that is decided by the model (see `Model::is_absent`).
    pub fn is_none(&self) -> bool {
        self.role == Role::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub k: usize,
    pub n: usize,
    pub error_l2: f64,
    pub bound: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

/// Per-(iteration, slice) errors against the sequential fine reference.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub entries: Vec<TraceEntry>,
    pub metadata: BTreeMap<String, String>,
}

impl IterationTrace {
    pub fn push(&mut self, entry: TraceEntry) -> Result<()> {
        if !(entry.error_l2 >= 0.0) {
            return Err(Error::Numerical(format!(
                "error at (k={}, n={}) is {}",
                entry.k, entry.n, entry.error_l2
            )));
        }
        if self
            .entries
            .iter()
            .any(|e| e.k == entry.k && e.n == entry.n)
        {
            return Err(Error::invalid(format!(
                "duplicate trace entry (k={}, n={})",
                entry.k, entry.n
            )));
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Largest iteration index present.
    pub fn last_iteration(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.k).max()
    }

    pub fn iteration(&self, k: usize) -> impl Iterator<Item = &TraceEntry> {
        self.entries.iter().filter(move |e| e.k == k)
    }

    /// `sup_n` error at iteration `k`.
    pub fn sup_error(&self, k: usize) -> Result<f64> {
        sup_error(self, k)
    }

    pub fn sup_errors(&self) -> Vec<f64> {
        match self.last_iteration() {
            Some(last) => (0..=last).filter_map(|k| self.sup_error(k).ok()).collect(),
            None => Vec::new(),
        }
    }

    pub fn bound(&self, k: usize) -> Option<f64> {
        self.iteration(k).find_map(|e| e.bound)
    }
}

pub fn sup_error(trace: &IterationTrace, k: usize) -> Result<f64> {
    trace
        .iteration(k)
        .map(|e| e.error_l2)
        .fold(None, |acc: Option<f64>, e| {
            Some(acc.map_or(e, |a| a.max(e)))
        })
        .ok_or_else(|| Error::NotFound(format!("iteration {k} not in trace")))
}
