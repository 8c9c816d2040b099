//! Hyperbolic models on `(0, 1)`: first-order upwind advection `u_t + a u_x = f`
//! and the wave equation `u_tt = u_xx + f` as a first-order system in
//! `(u, v = u_t)` advanced by Crank-Nicolson.

use crate::error::{Error, Result};
use crate::heat::{thomas_solve, TridiagonalSystem};
use crate::model::{check_interval, check_present, Model};
use crate::pit::{BoundaryKind, Layout, PropagatorSpec, StateVector};
use crate::source::{sample_source, SourceTerm};

#[derive(Debug, Clone, PartialEq)]
pub struct AdvectionModel {
    speed: f64,
    n_cells: usize,
    bc: BoundaryKind,
    source: SourceTerm,
}

impl AdvectionModel {
    pub fn new(speed: f64, n_cells: usize, bc: BoundaryKind, source: SourceTerm) -> Result<Self> {
        if !(speed > 0.0) || !speed.is_finite() {
            return Err(Error::invalid(format!(
                "advection speed must be positive, got {speed}"
            )));
        }
        if n_cells < 2 {
            return Err(Error::invalid("advection model needs at least 2 cells"));
        }
        if !matches!(bc, BoundaryKind::Periodic | BoundaryKind::Inflow) {
            return Err(Error::invalid(format!(
                "advection supports periodic or inflow boundaries, got {bc:?}"
            )));
        }
        Ok(Self {
            speed,
            n_cells,
            bc,
            source,
        })
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn source(&self) -> &SourceTerm {
        &self.source
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        match self.bc {
            BoundaryKind::Periodic => (0..self.n_cells).map(|j| j as f64 * dx).collect(),
            _ => (1..=self.n_cells).map(|j| j as f64 * dx).collect(),
        }
    }

    pub fn state_from_fn(&self, f: impl Fn(f64) -> f64) -> StateVector {
        let values = self.points().into_iter().map(f).collect();
        StateVector::new(self.layout(), values).expect("layout length")
    }

    pub fn courant(&self, dt: f64) -> f64 {
        self.speed * dt / self.dx()
    }

    /// One upwind step `u_j <- (1 - nu) u_j + nu u_{j-1} + dt f(x_j, t)`.
    pub fn advection_step(&self, state: &StateVector, t: f64, dt: f64) -> Result<StateVector> {
        state.ensure_layout(&self.layout())?;
        let nu = self.courant(dt);
        if !(nu > 0.0) || nu > 1.0 + 1e-12 {
            return Err(Error::config(
                "dt",
                format!("upwind step needs 0 < CFL <= 1, got {nu}"),
            ));
        }
        let u = state.values();
        let n = u.len();
        let f = if self.source.is_zero() {
            None
        } else {
            Some(sample_source(&self.source, &self.points(), t))
        };
        let values = (0..n)
            .map(|j| {
                let upstream = match (j, self.bc) {
                    (0, BoundaryKind::Periodic) => u[n - 1],
                    (0, _) => 0.0,
                    _ => u[j - 1],
                };
                let mut next = (1.0 - nu) * u[j] + nu * upstream;
                if let Some(f) = &f {
                    next += dt * f[j];
                }
                next
            })
            .collect();
        StateVector::new(self.layout(), values)
    }
}

impl Model for AdvectionModel {
    fn name(&self) -> String {
        match self.bc {
            BoundaryKind::Periodic => "advection-periodic".into(),
            _ => "advection-inflow".into(),
        }
    }

    fn grid_points(&self) -> Option<Vec<f64>> {
        Some(self.points())
    }

    fn layout(&self) -> Layout {
        Layout::grid(self.n_cells, self.dx(), self.bc)
    }

    fn propagate(
        &self,
        spec: &PropagatorSpec,
        state: &StateVector,
        t_from: f64,
        t_to: f64,
    ) -> Result<StateVector> {
        check_present(spec)?;
        check_interval(t_from, t_to)?;
        let steps = spec.steps_per_slice;
        let h = (t_to - t_from) / steps as f64;
        let mut u = state.clone();
        for j in 0..steps {
            u = self.advection_step(&u, t_from + j as f64 * h, h)?;
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveModel {
    n_cells: usize,
    source: SourceTerm,
}

impl WaveModel {
    pub fn new(n_cells: usize, source: SourceTerm) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::invalid("wave model needs at least 2 cells"));
        }
        Ok(Self { n_cells, source })
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    /// Interior unknowns per component.
    pub fn n_unknowns(&self) -> usize {
        self.n_cells - 1
    }

    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (1..self.n_cells).map(|j| j as f64 * dx).collect()
    }

    pub fn state_from_fns(&self, u: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> StateVector {
        let pts = self.points();
        let mut values: Vec<f64> = pts.iter().map(|&x| u(x)).collect();
        values.extend(pts.iter().map(|&x| v(x)));
        StateVector::new(self.layout(), values).expect("layout length")
    }

    /// Displacement and velocity halves of a state.
    pub fn split<'a>(&self, state: &'a StateVector) -> (&'a [f64], &'a [f64]) {
        state.values().split_at(self.n_unknowns())
    }

    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let inv = 1.0 / (self.dx() * self.dx());
        (0..n)
            .map(|i| {
                let l = if i > 0 { u[i - 1] } else { 0.0 };
                let r = if i + 1 < n { u[i + 1] } else { 0.0 };
                (l - 2.0 * u[i] + r) * inv
            })
            .collect()
    }

    /// `||v||^2 + ||D u||^2` with `D` the forward difference including both
    /// boundary edges.
    pub fn energy(&self, state: &StateVector) -> f64 {
        let (u, v) = self.split(state);
        let dx = self.dx();
        let kinetic: f64 = v.iter().map(|x| x * x).sum::<f64>() * dx;
        let n = u.len();
        let mut potential = 0.0;
        for e in 0..=n {
            let right = if e < n { u[e] } else { 0.0 };
            let left = if e > 0 { u[e - 1] } else { 0.0 };
            let d = (right - left) / dx;
            potential += d * d;
        }
        kinetic + potential * dx
    }

    /// Trapezoidal step of `u' = v, v' = L u + f`. Negative `dt` steps back.
    pub fn wave_step(&self, state: &StateVector, t: f64, dt: f64) -> Result<StateVector> {
        state.ensure_layout(&self.layout())?;
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::invalid(format!(
                "wave step needs a finite nonzero dt, got {dt}"
            )));
        }
        let (u, v) = self.split(state);
        let n = u.len();
        let s = dt * dt / (4.0 * self.dx() * self.dx());
        let matrix =
            TridiagonalSystem::new(vec![-s; n - 1], vec![1.0 + 2.0 * s; n], vec![-s; n - 1])?;

        let g: Vec<f64> = if self.source.is_zero() {
            vec![0.0; n]
        } else {
            let pts = self.points();
            let f0 = sample_source(&self.source, &pts, t);
            let f1 = sample_source(&self.source, &pts, t + dt);
            f0.iter()
                .zip(&f1)
                .map(|(a, b)| 0.5 * dt * (a + b))
                .collect()
        };

        let lu = self.laplacian(u);
        let q = dt * dt / 4.0;
        let rhs: Vec<f64> = (0..n)
            .map(|i| u[i] + q * lu[i] + dt * v[i] + 0.5 * dt * g[i])
            .collect();
        let u_new = thomas_solve(&matrix, &rhs)?;
        let sum: Vec<f64> = u.iter().zip(&u_new).map(|(a, b)| a + b).collect();
        let l_sum = self.laplacian(&sum);
        let v_new: Vec<f64> = (0..n).map(|i| v[i] + 0.5 * dt * l_sum[i] + g[i]).collect();

        let mut values = u_new;
        values.extend(v_new);
        StateVector::new(self.layout(), values)
    }
}

impl Model for WaveModel {
    fn name(&self) -> String {
        "wave".into()
    }

    fn grid_points(&self) -> Option<Vec<f64>> {
        Some(self.points())
    }

    fn layout(&self) -> Layout {
        Layout::Grid {
            n_points: self.n_unknowns(),
            dx: self.dx(),
            bc: BoundaryKind::DirichletZero,
            components: 2,
        }
    }

    fn propagate(
        &self,
        spec: &PropagatorSpec,
        state: &StateVector,
        t_from: f64,
        t_to: f64,
    ) -> Result<StateVector> {
        check_present(spec)?;
        check_interval(t_from, t_to)?;
        let steps = spec.steps_per_slice;
        let h = (t_to - t_from) / steps as f64;
        let mut y = state.clone();
        for j in 0..steps {
            y = self.wave_step(&y, t_from + j as f64 * h, h)?;
        }
        Ok(y)
    }
}
