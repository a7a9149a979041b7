//! Richardson extrapolation of one-sided difference quotients.
//!
//! Shared by the numeric smoothness oracle and the finite-difference
//! differentiator. Neither closed-form path depends on this module.

use crate::error::{Error, Result};

/// Geometric step schedule `t_k = initial * ratio^k`, `k < levels`, extrapolated
/// to `order` (the number of eliminated error terms `t, t^2, ...`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSchedule {
    pub initial: f64,
    pub levels: usize,
    pub ratio: f64,
    pub order: usize,
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self {
            initial: 1e-2,
            levels: 6,
            ratio: 0.5,
            order: 2,
        }
    }
}

impl StepSchedule {
    pub fn with_initial(initial: f64) -> Self {
        Self {
            initial,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial.is_finite() && self.initial > 0.0) {
            return Err(Error::BadSchedule("initial step must be positive"));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::BadSchedule("ratio must lie in (0, 1)"));
        }
        if self.levels < 2 || self.order == 0 || self.order >= self.levels {
            return Err(Error::BadSchedule("need 2 <= levels and 1 <= order < levels"));
        }
        Ok(())
    }

    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.levels).map(|k| self.initial * self.ratio.powi(k as i32))
    }

    pub fn finest(&self) -> f64 {
        self.initial * self.ratio.powi(self.levels as i32 - 1)
    }
}

/// Output of [`extrapolate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolated {
    pub estimate: Vec<f64>,
    /// Componentwise size of the last correction applied to the finest row.
    pub increment: Vec<f64>,
    /// Raw quotients per level, coarsest first.
    pub quotients: Vec<Vec<f64>>,
}

/// Extrapolates componentwise the quotients `quotient(t)` over `schedule`.
pub fn extrapolate<F>(schedule: &StepSchedule, mut quotient: F) -> Result<Extrapolated>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    schedule.validate()?;
    let quotients = schedule.steps().map(&mut quotient).collect::<Result<Vec<_>>>()?;
    let width = quotients[0].len();
    // tableau[k] holds column j for row k after the j-th pass.
    let mut prev: Vec<Vec<f64>> = quotients.clone();
    let mut increment = vec![0.0; width];
    for j in 1..=schedule.order {
        let factor = schedule.ratio.powi(-(j as i32)) - 1.0;
        let next: Vec<Vec<f64>> = (j..schedule.levels)
            .map(|k| {
                let (fine, coarse) = (&prev[k - j + 1], &prev[k - j]);
                fine.iter().zip(coarse).map(|(a, b)| a + (a - b) / factor).collect()
            })
            .collect();
        let last = next.last().expect("levels > order");
        let before = prev.last().expect("nonempty");
        increment = last.iter().zip(before).map(|(a, b)| (a - b).abs()).collect();
        prev = next;
    }
    Ok(Extrapolated {
        estimate: prev.pop().expect("nonempty"),
        increment,
        quotients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_cubic() {
        // (f(t) - f(0)) / t for f(t) = 2t + 3t^2 - t^3 is 2 + 3t - t^2; order 2 removes both terms.
        let out = extrapolate(&StepSchedule::default(), |t| Ok(vec![2.0 + 3.0 * t - t * t])).unwrap();
        assert!((out.estimate[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn exp_derivative() {
        let s = StepSchedule::with_initial(0.1);
        let out = extrapolate(&s, |t| Ok(vec![(t.exp() - 1.0) / t])).unwrap();
        assert!((out.estimate[0] - 1.0).abs() < 1e-7);
        assert!(out.increment[0] < 1e-4);
    }

    #[test]
    fn rejects_bad_schedules() {
        let bad = StepSchedule {
            order: 6,
            ..StepSchedule::default()
        };
        assert!(extrapolate(&bad, |_| Ok(vec![0.0])).is_err());
        assert!(StepSchedule::with_initial(-1.0).validate().is_err());
    }
}
