//! Learning-rate / batch-size schedules and the induced temperature.
//!
//! A schedule fixes the learning rate `gamma(t)`, batch size `M(t)`, and
//! inverse dataset-noise scale `beta`; the diffusion temperature is
//! `eta(t) = 2 M(t) / (gamma(t) beta)`. Schedules that settle toward a limit
//! expose a monotone envelope on `|eta(t) - eta_inf|`, which is what the
//! burn-in threshold search bisects.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyper-parameter schedule driving a simulation or solver.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// Fixed `gamma`, `batch`, `beta`.
    Constant { gamma: f64, batch: f64, beta: f64 },
    /// Batch size relaxing exponentially toward `batch`, so that
    /// `eta(t) = eta_inf * (1 + amplitude * exp(-rate * t))`.
    ExpApproach {
        gamma: f64,
        batch: f64,
        beta: f64,
        amplitude: f64,
        rate: f64,
    },
    /// Learning rate multiplied by `factor` every `period` time units.
    StepDecay {
        gamma0: f64,
        factor: f64,
        period: f64,
        batch: f64,
        beta: f64,
    },
}

impl Schedule {
    /// Shorthand for the common fixed-parameter case.
    pub fn constant(gamma: f64, batch: f64, beta: f64) -> Schedule {
        Schedule::Constant { gamma, batch, beta }
    }

    /// Check parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Argument(format!(
                    "schedule parameter {name} must be positive and finite, got {v}"
                )))
            }
        };
        match *self {
            Schedule::Constant { gamma, batch, beta } => {
                positive("gamma", gamma)?;
                positive("batch", batch)?;
                positive("beta", beta)
            }
            Schedule::ExpApproach { gamma, batch, beta, amplitude, rate } => {
                positive("gamma", gamma)?;
                positive("batch", batch)?;
                positive("beta", beta)?;
                positive("rate", rate)?;
                if amplitude <= -1.0 || !amplitude.is_finite() {
                    return Err(Error::Argument(format!(
                        "exp_approach amplitude must exceed -1 so the batch stays positive, got {amplitude}"
                    )));
                }
                Ok(())
            }
            Schedule::StepDecay { gamma0, factor, period, batch, beta } => {
                positive("gamma0", gamma0)?;
                positive("factor", factor)?;
                positive("period", period)?;
                positive("batch", batch)?;
                positive("beta", beta)
            }
        }
    }

    #[inline]
    pub fn gamma(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant { gamma, .. } | Schedule::ExpApproach { gamma, .. } => gamma,
            Schedule::StepDecay { gamma0, factor, period, .. } => {
                gamma0 * factor.powi((t / period).floor() as i32)
            }
        }
    }

    #[inline]
    pub fn batch(&self, t: f64) -> f64 {
        match *self {
            Schedule::Constant { batch, .. } | Schedule::StepDecay { batch, .. } => batch,
            Schedule::ExpApproach { batch, amplitude, rate, .. } => {
                batch * (1.0 + amplitude * (-rate * t).exp())
            }
        }
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        match *self {
            Schedule::Constant { beta, .. }
            | Schedule::ExpApproach { beta, .. }
            | Schedule::StepDecay { beta, .. } => beta,
        }
    }

    /// Temperature `eta(t) = 2 M(t) / (gamma(t) beta)`.
    #[inline]
    pub fn eta(&self, t: f64) -> f64 {
        2.0 * self.batch(t) / (self.gamma(t) * self.beta())
    }

    /// Limiting temperature, when one exists.
    pub fn eta_inf(&self) -> Option<f64> {
        match *self {
            Schedule::Constant { gamma, batch, beta } => Some(2.0 * batch / (gamma * beta)),
            Schedule::ExpApproach { gamma, batch, beta, .. } => {
                Some(2.0 * batch / (gamma * beta))
            }
            Schedule::StepDecay { gamma0, factor, batch, beta, .. } => {
                if factor == 1.0 {
                    Some(2.0 * batch / (gamma0 * beta))
                } else {
                    None
                }
            }
        }
    }

    /// Limiting batch size, when one exists.
    pub fn batch_inf(&self) -> Option<f64> {
        match *self {
            Schedule::Constant { batch, .. } | Schedule::ExpApproach { batch, .. } => Some(batch),
            Schedule::StepDecay { factor, batch, .. } => (factor == 1.0).then_some(batch),
        }
    }

    /// Monotone non-increasing bound on `sup_{s >= t} |eta(s) - eta_inf|`.
    ///
    /// Returns `None` when the schedule has no finite limit.
    pub fn deviation_envelope(&self, t: f64) -> Option<f64> {
        match *self {
            Schedule::Constant { .. } => Some(0.0),
            Schedule::ExpApproach { gamma, batch, beta, amplitude, rate } => {
                let eta_inf = 2.0 * batch / (gamma * beta);
                Some(eta_inf * amplitude.abs() * (-rate * t).exp())
            }
            Schedule::StepDecay { factor, .. } => (factor == 1.0).then_some(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_temperature() {
        let s = Schedule::constant(0.1, 10.0, 50.0);
        assert_relative_eq!(s.eta(0.0), 4.0);
        assert_relative_eq!(s.eta(17.0), 4.0);
        assert_eq!(s.eta_inf(), Some(4.0));
        assert_eq!(s.deviation_envelope(3.0), Some(0.0));
    }

    #[test]
    fn exp_approach_limits_and_envelope() {
        let s = Schedule::ExpApproach {
            gamma: 0.1,
            batch: 10.0,
            beta: 50.0,
            amplitude: 0.5,
            rate: 2.0,
        };
        s.validate().unwrap();
        assert_relative_eq!(s.eta(0.0), 6.0);
        assert_relative_eq!(s.eta_inf().unwrap(), 4.0);
        // Envelope bounds the actual deviation and decreases monotonically.
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let t = 0.1 * i as f64;
            let env = s.deviation_envelope(t).unwrap();
            assert!((s.eta(t) - 4.0).abs() <= env * (1.0 + 1e-9) + 1e-12);
            assert!(env <= prev);
            prev = env;
        }
    }

    #[test]
    fn step_decay_heats_up() {
        let s = Schedule::StepDecay {
            gamma0: 0.2,
            factor: 0.5,
            period: 1.0,
            batch: 10.0,
            beta: 50.0,
        };
        s.validate().unwrap();
        assert_relative_eq!(s.gamma(0.5), 0.2);
        assert_relative_eq!(s.gamma(1.5), 0.1);
        assert_relative_eq!(s.gamma(2.5), 0.05);
        assert_relative_eq!(s.eta(2.5), 2.0 * 10.0 / (0.05 * 50.0));
        assert_eq!(s.eta_inf(), None);
        assert_eq!(s.deviation_envelope(0.0), None);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(Schedule::constant(0.0, 1.0, 1.0).validate().is_err());
        assert!(Schedule::constant(0.1, -1.0, 1.0).validate().is_err());
        let s = Schedule::ExpApproach {
            gamma: 0.1,
            batch: 1.0,
            beta: 1.0,
            amplitude: -1.5,
            rate: 1.0,
        };
        assert!(s.validate().is_err());
    }
}
