//! Closed-form contraction factors of Parareal with and without a coarse
//! propagator, parameterised by the decay rate `lambda` of a mode.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Amplification factor of a one-step method applied to `u' = z u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StabilityFunction {
    #[default]
    BackwardEuler,
}

impl StabilityFunction {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            StabilityFunction::BackwardEuler => 1.0 / (1.0 - z),
        }
    }
}

/// `exp(-lambda dT)`: per-iteration error reduction of a mode the coarse
/// propagator does not see.
pub fn rho_no_coarse(lambda: f64, slice_width: f64) -> f64 {
    (-lambda * slice_width).exp()
}

/// `|exp(-lambda dT) - R(-lambda dT)| / (1 - |R(-lambda dT)|)`.
pub fn rho_with_coarse(lambda: f64, slice_width: f64, r: StabilityFunction) -> Result<f64> {
    let z = -lambda * slice_width;
    let rg = r.eval(z);
    if !(rg.abs() < 1.0) {
        return Err(Error::UndefinedFactor {
            magnitude: rg.abs(),
        });
    }
    Ok((z.exp() - rg).abs() / (1.0 - rg.abs()))
}

/// `exp(-((m_G + 1) pi / L)^2 k dT) * initial_sup_error`.
pub fn theorem1_bound(
    coarse_modes: usize,
    slice_width: f64,
    k: usize,
    initial_sup_error: f64,
    domain_length: f64,
) -> f64 {
    let rate = ((coarse_modes + 1) as f64 * PI / domain_length).powi(2);
    bound_from_rate(rate, slice_width, k, initial_sup_error)
}

/// Same bound for an arbitrary first uncaptured eigenvalue.
pub fn bound_from_rate(rate: f64, slice_width: f64, k: usize, initial_sup_error: f64) -> f64 {
    if k == 0 {
        return initial_sup_error;
    }
    (-rate * k as f64 * slice_width).exp() * initial_sup_error
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorPoint {
    pub m: usize,
    pub slice_width: f64,
    pub lambda: f64,
    pub rho_no_coarse: f64,
    pub rho_with_coarse: f64,
}

impl FactorPoint {
    /// Dropping the coarse propagator contracts faster here.
    pub fn coarse_free_wins(&self) -> bool {
        self.rho_no_coarse < self.rho_with_coarse
    }
}

/// Tabulated factors over a mode range and a set of slice widths.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGrid {
    pub points: Vec<FactorPoint>,
}

impl FactorGrid {
    pub fn crossover(&self) -> impl Iterator<Item = &FactorPoint> {
        self.points.iter().filter(|p| p.coarse_free_wins())
    }

    pub fn has_both_orderings(&self) -> bool {
        self.points.iter().any(|p| p.coarse_free_wins())
            && self
                .points
                .iter()
                .any(|p| p.rho_no_coarse > p.rho_with_coarse)
    }
}

/// Factors for every `(m, dT)` pair, `m`-major. `lambda_of` maps a mode
/// number to its decay rate.
pub fn factor_grid(
    modes: &[usize],
    slice_widths: &[f64],
    r: StabilityFunction,
    lambda_of: impl Fn(usize) -> f64,
) -> Result<FactorGrid> {
    if modes.is_empty() || slice_widths.is_empty() {
        return Err(Error::invalid(
            "factor grid needs nonempty mode and slice-width ranges",
        ));
    }
    let mut points = Vec::with_capacity(modes.len() * slice_widths.len());
    for &m in modes {
        let lambda = lambda_of(m);
        for &dt in slice_widths {
            if !(dt > 0.0) {
                return Err(Error::invalid(format!(
                    "slice width must be positive, got {dt}"
                )));
            }
            points.push(FactorPoint {
                m,
                slice_width: dt,
                lambda,
                rho_no_coarse: rho_no_coarse(lambda, dt),
                rho_with_coarse: rho_with_coarse(lambda, dt, r)?,
            });
        }
    }
    Ok(FactorGrid { points })
}

/// Powers of two `2^lo ..= 2^hi`.
pub fn dyadic_widths(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_coarse_values() {
        assert!((rho_no_coarse(1.0, 0.5) - 0.606_530_659_7).abs() < 1e-9);
        assert_eq!(rho_no_coarse(0.0, 0.5), 1.0);
        assert!((rho_no_coarse(4.0, 0.5) - 0.135_335_283_2).abs() < 1e-9);
    }

    #[test]
    fn with_coarse_values() {
        let be = StabilityFunction::BackwardEuler;
        let v = rho_with_coarse(1.0, 0.5, be).unwrap();
        let e = (-0.5f64).exp();
        assert!((v - (2.0 / 3.0 - e) / (1.0 / 3.0)).abs() < 1e-14);
        // mpmath (40 digits): 0.18040802086209972918...
        assert!((v - 0.180_408_020_862_099_7).abs() < 1e-15);

        assert!(rho_with_coarse(1.0, 1e-6, be).unwrap() < 1e-5);

        let v = rho_with_coarse(4.0, 1.0, be).unwrap();
        assert!((v - ((-4.0f64).exp() - 0.2).abs() / 0.8).abs() < 1e-15);
        assert!((v - 0.227_105_451_389_082_3).abs() < 1e-15);
    }

    #[test]
    fn zero_mode_factor_is_undefined_with_coarse() {
        assert!(matches!(
            rho_with_coarse(0.0, 1.0, StabilityFunction::BackwardEuler),
            Err(Error::UndefinedFactor { .. })
        ));
    }

    #[test]
    fn backward_euler_is_contractive_on_negative_axis() {
        let be = StabilityFunction::BackwardEuler;
        for z in [-1e-8, -0.5, -3.0, -1e6] {
            assert!(be.eval(z).abs() < 1.0);
        }
    }

    #[test]
    fn bound_values() {
        assert_eq!(theorem1_bound(0, 0.5, 0, 2.5, PI), 2.5);
        assert!((theorem1_bound(0, 0.5, 2, 1.0, PI) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((theorem1_bound(1, 0.25, 1, 1.0, PI) - (-1.0f64).exp()).abs() < 1e-15);
        // L = 1 rescales the rate by pi^2.
        let b = theorem1_bound(0, 0.1, 1, 1.0, 1.0);
        assert!((b - (-PI * PI * 0.1).exp()).abs() < 1e-15);
    }

    #[test]
    fn grid_rows_and_crossover() {
        let grid = factor_grid(&[1, 3], &[0.5], StabilityFunction::BackwardEuler, |m| {
            (m * m) as f64
        })
        .unwrap();
        let p1 = grid.points[0];
        assert!((p1.rho_no_coarse - 0.606_530_659_7).abs() < 1e-9);
        assert!((p1.rho_with_coarse - 0.180_408_020_862_099_7).abs() < 1e-15);
        assert!(!p1.coarse_free_wins());
        let p3 = grid.points[1];
        assert!((p3.rho_no_coarse - 0.011_108_996_5).abs() < 1e-9);
        assert!((p3.rho_with_coarse - 0.208_644_559_786_592_7).abs() < 1e-15);
        assert!(p3.coarse_free_wins());
    }

    #[test]
    fn small_slices_favour_the_coarse_propagator() {
        let be = StabilityFunction::BackwardEuler;
        let nc = rho_no_coarse(1.0, 1e-3);
        let wc = rho_with_coarse(1.0, 1e-3, be).unwrap();
        assert!(wc < 1e-3);
        assert!(nc > 0.99);
    }

    #[test]
    fn empty_ranges_are_rejected() {
        let be = StabilityFunction::BackwardEuler;
        assert!(factor_grid(&[], &[0.5], be, |m| m as f64).is_err());
        assert!(factor_grid(&[1], &[], be, |m| m as f64).is_err());
    }

    #[test]
    fn default_grid_has_both_orderings() {
        let modes: Vec<usize> = (1..=16).collect();
        let grid = factor_grid(
            &modes,
            &dyadic_widths(-6, 1),
            StabilityFunction::BackwardEuler,
            |m| (m * m) as f64,
        )
        .unwrap();
        assert!(grid.has_both_orderings());
        for p in &grid.points {
            assert!(p.rho_no_coarse <= 1.0 && p.rho_no_coarse >= 0.0);
            assert!(p.rho_with_coarse >= 0.0);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn no_coarse_decreasing(l in 0.0f64..50.0, dl in 0.01f64..5.0, dt in 0.01f64..2.0, ddt in 0.01f64..1.0) {
                prop_assert!(rho_no_coarse(l + dl, dt) < rho_no_coarse(l, dt));
                prop_assert!(rho_no_coarse(l + dl, dt + ddt) < rho_no_coarse(l + dl, dt));
            }
        }
    }
}
