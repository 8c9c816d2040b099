//! 1D heat equation `u_t = u_xx + f` on `(0, 1)` with centred finite
//! differences in space and Backward Euler in time.

use crate::error::{Error, Result};
use crate::model::{check_interval, check_present, Model};
use crate::pit::{BoundaryKind, Layout, PropagatorSpec, StateVector};
use crate::source::{sample_source, SourceTerm};

/// Tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() != n - 1 || sup.len() != n - 1 {
            return Err(Error::invalid(format!(
                "tridiagonal sizes must be (n-1, n, n-1), got ({}, {}, {})",
                sub.len(),
                n,
                sup.len()
            )));
        }
        Ok(Self { sub, diag, sup })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.sup[i] * x[i + 1];
                }
                y
            })
            .collect()
    }
}

/// Solves `sys * x = rhs` by forward elimination and back substitution.
pub fn thomas_solve(sys: &TridiagonalSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = sys.len();
    if rhs.len() != n {
        return Err(Error::invalid(format!(
            "right-hand side has length {} but system has {n} rows",
            rhs.len()
        )));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];

    let mut pivot = sys.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularSystem { row: 0 });
    }
    if n > 1 {
        c[0] = sys.sup[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = sys.diag[i] - sys.sub[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        if i + 1 < n {
            c[i] = sys.sup[i] / pivot;
        }
        d[i] = (rhs[i] - sys.sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatModel {
    n_cells: usize,
    bc: BoundaryKind,
    source: SourceTerm,
}

impl HeatModel {
    pub fn new(n_cells: usize, bc: BoundaryKind, source: SourceTerm) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::invalid("heat model needs at least 2 cells"));
        }
        if !matches!(bc, BoundaryKind::DirichletZero | BoundaryKind::NeumannZero) {
            return Err(Error::invalid(format!(
                "heat model supports Dirichlet or Neumann boundaries, got {bc:?}"
            )));
        }
        Ok(Self {
            n_cells,
            bc,
            source,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
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

    pub fn n_unknowns(&self) -> usize {
        match self.bc {
            BoundaryKind::DirichletZero => self.n_cells - 1,
            _ => self.n_cells + 1,
        }
    }

    /// Coordinates of the stored unknowns.
    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        match self.bc {
            BoundaryKind::DirichletZero => (1..self.n_cells).map(|i| i as f64 * dx).collect(),
            _ => (0..=self.n_cells).map(|i| i as f64 * dx).collect(),
        }
    }

    pub fn state_from_fn(&self, f: impl Fn(f64) -> f64) -> StateVector {
        let values = self.points().into_iter().map(f).collect();
        StateVector::new(self.layout(), values).expect("layout length")
    }

    /// `I - dt * L` for the discrete Laplacian `L`.
    pub fn implicit_matrix(&self, dt: f64) -> TridiagonalSystem {
        let n = self.n_unknowns();
        let r = dt / (self.dx() * self.dx());
        let diag = vec![1.0 + 2.0 * r; n];
        let mut sub = vec![-r; n - 1];
        let mut sup = vec![-r; n - 1];
        if self.bc == BoundaryKind::NeumannZero {
            // Ghost point u_{-1} = u_1 (and symmetrically on the right).
            sup[0] = -2.0 * r;
            sub[n - 2] = -2.0 * r;
        }
        TridiagonalSystem { sub, diag, sup }
    }

    /// Discrete Laplacian applied to `u` (unknowns only).
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let inv = 1.0 / (self.dx() * self.dx());
        (0..n)
            .map(|i| {
                let (left, right) = match self.bc {
                    BoundaryKind::DirichletZero => (
                        if i > 0 { u[i - 1] } else { 0.0 },
                        if i + 1 < n { u[i + 1] } else { 0.0 },
                    ),
                    _ => (
                        if i > 0 { u[i - 1] } else { u[1] },
                        if i + 1 < n { u[i + 1] } else { u[n - 2] },
                    ),
                };
                (left - 2.0 * u[i] + right) * inv
            })
            .collect()
    }

    /// Mean of a grid function. Under Neumann closure the boundary points
    /// carry half weight; that weighted mean is what the scheme conserves.
    pub fn grid_mean(&self, state: &StateVector) -> f64 {
        let v = state.values();
        match self.bc {
            BoundaryKind::DirichletZero => v.iter().sum::<f64>() / (self.n_cells as f64),
            _ => {
                let n = v.len();
                let inner: f64 = v[1..n - 1].iter().sum();
                (inner + 0.5 * (v[0] + v[n - 1])) / self.n_cells as f64
            }
        }
    }

    /// Solves `(I - dt L) u_new = u + dt f(., t + dt)`.
    pub fn backward_euler_step(&self, state: &StateVector, t: f64, dt: f64) -> Result<StateVector> {
        state.ensure_layout(&self.layout())?;
        let matrix = self.implicit_matrix(dt);
        self.solve_step(&matrix, state, t + dt, dt)
    }

    fn solve_step(
        &self,
        matrix: &TridiagonalSystem,
        state: &StateVector,
        t_new: f64,
        dt: f64,
    ) -> Result<StateVector> {
        let mut rhs = state.values().to_vec();
        if !self.source.is_zero() {
            let f = sample_source(&self.source, &self.points(), t_new);
            for (r, fi) in rhs.iter_mut().zip(f) {
                *r += dt * fi;
            }
        }
        let x = thomas_solve(matrix, &rhs)?;
        StateVector::new(self.layout(), x)
    }
}

/// Eigenvalue of `-L` (Dirichlet) for the sampled mode `sin(m pi x)`.
pub fn dirichlet_eigenvalue(m: usize, dx: f64) -> f64 {
    (2.0 / (dx * dx)) * (1.0 - (m as f64 * std::f64::consts::PI * dx).cos())
}

impl Model for HeatModel {
    fn name(&self) -> String {
        let bc = match self.bc {
            BoundaryKind::DirichletZero => "dirichlet",
            _ => "neumann",
        };
        format!("heat-{bc}")
    }

    fn grid_points(&self) -> Option<Vec<f64>> {
        Some(self.points())
    }

    fn layout(&self) -> Layout {
        Layout::grid(self.n_unknowns(), self.dx(), self.bc)
    }

    /// `steps_per_slice` Backward Euler substeps of equal size.
    fn propagate(
        &self,
        spec: &PropagatorSpec,
        state: &StateVector,
        t_from: f64,
        t_to: f64,
    ) -> Result<StateVector> {
        check_present(spec)?;
        check_interval(t_from, t_to)?;
        state.ensure_layout(&self.layout())?;
        let steps = spec.steps_per_slice;
        let h = (t_to - t_from) / steps as f64;
        let matrix = self.implicit_matrix(h);
        let mut u = state.clone();
        for j in 0..steps {
            let t_new = if j + 1 == steps {
                t_to
            } else {
                t_from + (j + 1) as f64 * h
            };
            u = self.solve_step(&matrix, &u, t_new, h)?;
        }
        Ok(u)
    }
}
