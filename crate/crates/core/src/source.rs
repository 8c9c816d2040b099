//! Space-time source terms shared by the grid models.

/// Gaussian bump in space switched on by Gaussian pulses in time:
/// `amplitude * exp(-x_width (x - x_center)^2) * sum_j exp(-t_width (t - t_j)^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulsedGaussian {
    pub amplitude: f64,
    pub x_center: f64,
    /// Coefficient in the spatial exponent.
    pub x_width: f64,
    pub pulse_times: Vec<f64>,
    /// Coefficient in the temporal exponent.
    pub t_width: f64,
}

impl PulsedGaussian {
    /// Heating device switched on around `t = 0.1, 0.6, 1.35, 1.85`.
    pub fn heater() -> Self {
        Self {
            amplitude: 10.0,
            x_center: 0.5,
            x_width: 100.0,
            pulse_times: vec![0.1, 0.6, 1.35, 1.85],
            t_width: 100.0,
        }
    }

    pub fn spatial(&self, x: f64) -> f64 {
        let d = x - self.x_center;
        self.amplitude * (-self.x_width * d * d).exp()
    }

    pub fn temporal(&self, t: f64) -> f64 {
        self.pulse_times
            .iter()
            .map(|tj| {
                let d = t - tj;
                (-self.t_width * d * d).exp()
            })
            .sum()
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.spatial(x) * self.temporal(t)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum SourceTerm {
    #[default]
    Zero,
    PulsedGaussian(PulsedGaussian),
}

impl SourceTerm {
    pub fn heater() -> Self {
        SourceTerm::PulsedGaussian(PulsedGaussian::heater())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SourceTerm::Zero)
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            SourceTerm::Zero => 0.0,
            SourceTerm::PulsedGaussian(g) => g.eval(x, t),
        }
    }
}

/// Pointwise `f(x, t)` on the given grid points.
pub fn sample_source(source: &SourceTerm, points: &[f64], t: f64) -> Vec<f64> {
    match source {
        SourceTerm::Zero => vec![0.0; points.len()],
        SourceTerm::PulsedGaussian(g) => {
            let pulse = g.temporal(t);
            points.iter().map(|&x| g.spatial(x) * pulse).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_source_samples_zero() {
        let pts: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        assert!(sample_source(&SourceTerm::Zero, &pts, 0.3)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn heater_peak_at_first_pulse() {
        let s = SourceTerm::heater();
        let v = sample_source(&s, &[0.5], 0.1)[0];
        let expected = 10.0
            * (1.0
                + (-100.0f64 * 0.25).exp()
                + (-100.0f64 * 1.5625).exp()
                + (-100.0f64 * 3.0625).exp());
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 10.0).abs() < 1e-4);
    }

    #[test]
    fn heater_is_off_at_final_time() {
        let s = SourceTerm::heater();
        let pts: Vec<f64> = (0..=128).map(|i| i as f64 / 128.0).collect();
        let max = sample_source(&s, &pts, 3.0)
            .into_iter()
            .fold(0.0f64, f64::max);
        let d: f64 = 3.0 - 1.85;
        assert!(max <= 10.0 * 4.0 * (-100.0 * d * d).exp());
        assert!(max < 1e-55);
    }
}
