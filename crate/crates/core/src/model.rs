use crate::error::{Error, Result};
use crate::pit::{Layout, PropagatorSpec, Role, StateVector};

/// An evolution problem that can be advanced over one time slice.
///
/// Implementations must be pure: the same inputs always give bit-identical
/// outputs, whichever thread calls them.
pub trait Model: Send + Sync {
    /// Short identifier echoed into trace metadata.
    fn name(&self) -> String;

    /// Layout of every state this model accepts and returns.
    fn layout(&self) -> Layout;

    /// Advance `state` from `t_from` to `t_to` as described by `spec`.
    fn propagate(
        &self,
        spec: &PropagatorSpec,
        state: &StateVector,
        t_from: f64,
        t_to: f64,
    ) -> Result<StateVector>;

    /// Coordinates of the first solution component on grid models.
    fn grid_points(&self) -> Option<Vec<f64>> {
        None
    }

    /// Whether `spec` denotes no propagator at all for this model.
    fn is_absent(&self, spec: &PropagatorSpec) -> bool {
        spec.is_none()
    }

    /// Decay rate of the slowest mode the coarse propagator leaves to the
    /// fine solver alone. Only models with a known spectrum return a value.
    fn uncaptured_decay_rate(&self, _coarse: &PropagatorSpec) -> Option<f64> {
        None
    }

    /// Model-specific consistency checks between the fine and coarse specs.
    fn check_specs(&self, fine: &PropagatorSpec, coarse: &PropagatorSpec) -> Result<()> {
        fine.validate()?;
        if fine.role != Role::Fine {
            return Err(Error::invalid("fine propagator must have role fine"));
        }
        if !self.is_absent(coarse) {
            coarse.validate()?;
        }
        Ok(())
    }
}

pub(crate) fn check_interval(t_from: f64, t_to: f64) -> Result<()> {
    if !(t_to > t_from) {
        return Err(Error::invalid(format!(
            "propagation interval must satisfy t_to > t_from, got ({t_from}, {t_to})"
        )));
    }
    Ok(())
}

pub(crate) fn check_present(spec: &PropagatorSpec) -> Result<()> {
    if spec.is_none() {
        return Err(Error::invalid("cannot propagate with an absent propagator"));
    }
    if spec.steps_per_slice == 0 {
        return Err(Error::invalid("steps_per_slice must be at least 1"));
    }
    Ok(())
}

/// Number of substeps of size `dt` in a slice of width `slice_width`;
/// rejects widths that are not an integer multiple of `dt`.
pub fn substeps_for(slice_width: f64, dt: f64, field: &str) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::config(
            field,
            format!("time step must be positive, got {dt}"),
        ));
    }
    let ratio = slice_width / dt;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::config(
            field,
            format!("slice width {slice_width} is not an integer multiple of time step {dt}"),
        ));
    }
    Ok(steps as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substeps_of_paper_setup() {
        assert_eq!(substeps_for(3.0 / 48.0, 1.0 / 96.0, "fine.dt").unwrap(), 6);
        assert_eq!(substeps_for(0.5, 1.0 / 96.0, "fine.dt").unwrap(), 48);
        let err = substeps_for(3.0 / 48.0, 0.025, "fine.dt").unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "fine.dt"));
    }
}
