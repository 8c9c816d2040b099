//! Sine/cosine spectral model of the heat equation with exact-in-time
//! evolution of each mode.
//!
//! Mode `m` of `u_t = u_xx + f` on `(0, L)` obeys `u_m' = -lambda_m u_m + f_m`
//! with `lambda_m = (m pi / L)^2`, so a slice `(t0, t1)` maps
//! `u_m -> u_m exp(-lambda_m (t1 - t0)) + int_{t0}^{t1} f_m(s) exp(-lambda_m (t1 - s)) ds`.
//! Propagators keep the lowest `mode_count` basis functions and drop the rest.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{check_interval, Model};
use crate::pit::{
    discrete_l2_norm, Basis, BoundaryKind, Layout, PropagatorSpec, Role, StateVector,
};
use crate::quadrature::composite_gauss_legendre;
use crate::source::PulsedGaussian;

/// Time dependence of one mode's forcing.
#[derive(Debug, Clone, Copy)]
pub enum ModeForcing<'a> {
    Zero,
    Constant(f64),
    /// `coefficient * pulses.temporal(t)`.
    Pulsed {
        coefficient: f64,
        pulses: &'a PulsedGaussian,
    },
}

impl ModeForcing<'_> {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ModeForcing::Zero => 0.0,
            ModeForcing::Constant(c) => c,
            ModeForcing::Pulsed {
                coefficient,
                pulses,
            } => coefficient * pulses.temporal(t),
        }
    }

    fn is_zero(&self) -> bool {
        match *self {
            ModeForcing::Zero => true,
            ModeForcing::Constant(c) => c == 0.0,
            ModeForcing::Pulsed { coefficient, .. } => coefficient == 0.0,
        }
    }
}

/// Per-mode forcing of the spectral model.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ModeSource {
    #[default]
    Zero,
    /// Time-independent coefficient per mode slot.
    Constant(Vec<f64>),
    /// Spatial coefficients times a common pulse train.
    Pulsed {
        coefficients: Vec<f64>,
        pulses: PulsedGaussian,
    },
}

impl ModeSource {
    /// Projects the spatial profile of `pulses` (defined on the unit interval,
    /// stretched to `(0, L)`) onto the first `count` basis functions.
    pub fn project_pulsed(
        pulses: PulsedGaussian,
        basis: Basis,
        domain_length: f64,
        count: usize,
    ) -> Self {
        let coefficients = (0..count)
            .map(|i| {
                let m = basis.mode_number(i) as f64;
                let k = m * PI / domain_length;
                let integrand = |x: f64| {
                    let g = pulses.spatial(x / domain_length);
                    match basis {
                        Basis::Sine => g * (k * x).sin(),
                        Basis::Cosine => g * (k * x).cos(),
                    }
                };
                let integral = composite_gauss_legendre(integrand, 0.0, domain_length, 256);
                let norm = if basis.mode_number(i) == 0 {
                    1.0 / domain_length
                } else {
                    2.0 / domain_length
                };
                norm * integral
            })
            .collect();
        ModeSource::Pulsed {
            coefficients,
            pulses,
        }
    }

    pub fn mode(&self, index: usize) -> ModeForcing<'_> {
        match self {
            ModeSource::Zero => ModeForcing::Zero,
            ModeSource::Constant(c) => c
                .get(index)
                .map_or(ModeForcing::Zero, |&c| ModeForcing::Constant(c)),
            ModeSource::Pulsed {
                coefficients,
                pulses,
            } => coefficients
                .get(index)
                .map_or(ModeForcing::Zero, |&coefficient| ModeForcing::Pulsed {
                    coefficient,
                    pulses,
                }),
        }
    }
}

/// Largest panel width for a decay rate and interval length.
fn panel_width(lambda: f64, len: f64) -> f64 {
    let mut h = 0.01f64.min(len / 8.0);
    if lambda > 0.0 {
        // Keep lambda * h small so each panel resolves the kernel.
        h = h.min(2.0 / lambda);
    }
    h
}

/// `int_{t_from}^{t_to} f(s) exp(-lambda (t_to - s)) ds` by composite 16-point
/// Gauss-Legendre with fixed panels.
pub fn source_mode_integral(lambda: f64, forcing: &ModeForcing<'_>, t_from: f64, t_to: f64) -> f64 {
    if forcing.is_zero() || t_to <= t_from {
        return 0.0;
    }
    let len = t_to - t_from;
    let panels = (len / panel_width(lambda, len)).ceil().max(1.0) as usize;
    let h = len / panels as f64;
    // Panels ending more than 745/lambda before t_to see a kernel below the
    // smallest subnormal; skip them.
    let skip = if lambda > 0.0 {
        let dead = ((len - 745.0 / lambda) / h).floor();
        if dead > 0.0 {
            (dead as usize).min(panels - 1)
        } else {
            0
        }
    } else {
        0
    };
    let a = t_from + skip as f64 * h;
    composite_gauss_legendre(
        |s| forcing.eval(s) * (-lambda * (t_to - s)).exp(),
        a,
        t_to,
        panels - skip,
    )
}

/// `u0 exp(-lambda t) + int_0^t f(s) exp(-lambda (t - s)) ds`.
pub fn exact_mode_solution(lambda: f64, u0: f64, forcing: &ModeForcing<'_>, t: f64) -> f64 {
    if t == 0.0 {
        return u0;
    }
    u0 * (-lambda * t).exp() + source_mode_integral(lambda, forcing, 0.0, t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    domain_length: f64,
    basis: Basis,
    n_modes: usize,
    source: ModeSource,
}

impl SpectralModel {
    pub fn new(
        domain_length: f64,
        basis: Basis,
        n_modes: usize,
        source: ModeSource,
    ) -> Result<Self> {
        if !(domain_length > 0.0) || !domain_length.is_finite() {
            return Err(Error::invalid(format!(
                "domain length must be positive, got {domain_length}"
            )));
        }
        if n_modes == 0 {
            return Err(Error::invalid("spectral model needs at least one mode"));
        }
        Ok(Self {
            domain_length,
            basis,
            n_modes,
            source,
        })
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn source(&self) -> &ModeSource {
        &self.source
    }

    /// `lambda` of coefficient slot `index`.
    pub fn decay_rate(&self, index: usize) -> f64 {
        decay_rate(self.basis.mode_number(index), self.domain_length)
    }

    pub fn decay_rates(&self) -> Vec<f64> {
        (0..self.n_modes).map(|i| self.decay_rate(i)).collect()
    }

    /// State from leading coefficients; missing slots are zero.
    pub fn state(&self, coefficients: &[f64]) -> Result<StateVector> {
        if coefficients.len() > self.n_modes {
            return Err(Error::invalid(format!(
                "{} coefficients given but the model has {} modes",
                coefficients.len(),
                self.n_modes
            )));
        }
        let mut values = vec![0.0; self.n_modes];
        values[..coefficients.len()].copy_from_slice(coefficients);
        StateVector::new(self.layout(), values)
    }

    /// Keeps the first `mode_count` coefficients, each evolved exactly over
    /// `(t_from, t_to)`; all higher slots are zero.
    pub fn spectral_propagate(
        &self,
        spec: &PropagatorSpec,
        state: &StateVector,
        t_from: f64,
        t_to: f64,
    ) -> Result<StateVector> {
        check_interval(t_from, t_to)?;
        state.ensure_layout(&self.layout())?;
        let keep = if spec.role == Role::None {
            0
        } else {
            spec.mode_count.min(self.n_modes)
        };
        let dt = t_to - t_from;
        let values = state
            .values()
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                if i < keep {
                    let lambda = self.decay_rate(i);
                    u * (-lambda * dt).exp()
                        + source_mode_integral(lambda, &self.source.mode(i), t_from, t_to)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(state.with_values(values))
    }
}

pub fn decay_rate(mode_number: usize, domain_length: f64) -> f64 {
    let k = mode_number as f64 * PI / domain_length;
    k * k
}

impl Model for SpectralModel {
    fn name(&self) -> String {
        match self.basis {
            Basis::Sine => "spectral-sine".into(),
            Basis::Cosine => "spectral-cosine".into(),
        }
    }

    fn layout(&self) -> Layout {
        Layout::Modes {
            count: self.n_modes,
            basis: self.basis,
            domain_length: self.domain_length,
        }
    }

    fn propagate(
        &self,
        spec: &PropagatorSpec,
        state: &StateVector,
        t_from: f64,
        t_to: f64,
    ) -> Result<StateVector> {
        self.spectral_propagate(spec, state, t_from, t_to)
    }

    fn is_absent(&self, spec: &PropagatorSpec) -> bool {
        spec.role == Role::None || (spec.role == Role::Coarse && spec.mode_count == 0)
    }

    fn uncaptured_decay_rate(&self, coarse: &PropagatorSpec) -> Option<f64> {
        let captured = if self.is_absent(coarse) {
            0
        } else {
            coarse.mode_count
        };
        Some(self.decay_rate(captured))
    }

    fn check_specs(&self, fine: &PropagatorSpec, coarse: &PropagatorSpec) -> Result<()> {
        if fine.role != Role::Fine {
            return Err(Error::invalid("fine propagator must have role fine"));
        }
        if fine.mode_count == 0 || fine.mode_count > self.n_modes {
            return Err(Error::invalid(format!(
                "fine mode count must be in 1..={}, got {}",
                self.n_modes, fine.mode_count
            )));
        }
        if !self.is_absent(coarse) && coarse.mode_count >= fine.mode_count {
            return Err(Error::invalid(format!(
                "coarse mode count {} must be below fine mode count {}",
                coarse.mode_count, fine.mode_count
            )));
        }
        Ok(())
    }
}

fn grid_extent(layout: &Layout) -> Result<(usize, f64, BoundaryKind)> {
    match *layout {
        Layout::Grid {
            n_points,
            dx,
            bc,
            components: 1,
        } => Ok((n_points, dx, bc)),
        _ => Err(Error::invalid("expected a single-component grid state")),
    }
}

/// Discrete sine (Dirichlet grid) or cosine (Neumann grid) transform onto the
/// first `count` basis functions of `(0, L)` with `L = n_cells * dx`.
pub fn project_to_modes(grid: &StateVector, count: usize) -> Result<StateVector> {
    let (n_points, dx, bc) = grid_extent(grid.layout())?;
    let (basis, n_cells) = match bc {
        BoundaryKind::DirichletZero => (Basis::Sine, n_points + 1),
        BoundaryKind::NeumannZero => (Basis::Cosine, n_points - 1),
        other => {
            return Err(Error::invalid(format!(
                "no spectral basis for {other:?} grids"
            )))
        }
    };
    let nyquist = match basis {
        Basis::Sine => n_cells - 1,
        Basis::Cosine => n_cells,
    };
    if count > nyquist {
        return Err(Error::invalid(format!(
            "{count} modes exceed the grid's Nyquist limit of {nyquist}"
        )));
    }
    let n = n_cells as f64;
    let u = grid.values();
    let coefficients = (0..count)
        .map(|idx| {
            let m = basis.mode_number(idx) as f64;
            match basis {
                Basis::Sine => {
                    (2.0 / n)
                        * u.iter()
                            .enumerate()
                            .map(|(j, v)| v * (m * PI * (j + 1) as f64 / n).sin())
                            .sum::<f64>()
                }
                Basis::Cosine => {
                    let s: f64 = u
                        .iter()
                        .enumerate()
                        .map(|(j, v)| {
                            let w = if j == 0 || j == n_cells { 0.5 } else { 1.0 };
                            w * v * (m * PI * j as f64 / n).cos()
                        })
                        .sum();
                    if idx == 0 {
                        s / n
                    } else {
                        2.0 * s / n
                    }
                }
            }
        })
        .collect();
    StateVector::new(
        Layout::Modes {
            count,
            basis,
            domain_length: n * dx,
        },
        coefficients,
    )
}

/// Evaluates a mode state on the points of `grid_layout`.
pub fn reconstruct(modes: &StateVector, grid_layout: &Layout) -> Result<StateVector> {
    let (basis, domain_length) = match *modes.layout() {
        Layout::Modes {
            basis,
            domain_length,
            ..
        } => (basis, domain_length),
        _ => return Err(Error::invalid("expected a mode state")),
    };
    let (n_points, dx, bc) = grid_extent(grid_layout)?;
    let offset = match (basis, bc) {
        (Basis::Sine, BoundaryKind::DirichletZero) => 1,
        (Basis::Cosine, BoundaryKind::NeumannZero) => 0,
        _ => {
            return Err(Error::invalid(
                "basis does not match grid boundary condition",
            ))
        }
    };
    let values = (0..n_points)
        .map(|j| {
            let x = (j + offset) as f64 * dx;
            modes
                .values()
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    let k = basis.mode_number(idx) as f64 * PI / domain_length;
                    match basis {
                        Basis::Sine => c * (k * x).sin(),
                        Basis::Cosine => c * (k * x).cos(),
                    }
                })
                .sum()
        })
        .collect();
    StateVector::new(*grid_layout, values)
}

/// L2 norm on `(0, L)` from the coefficients.
pub fn parseval_norm(modes: &StateVector) -> f64 {
    discrete_l2_norm(modes)
}
