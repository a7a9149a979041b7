//! The extended function of smoothness `Psi(x, v) = lim_{t -> 0+} (|x + tv| - |x|) / t`.
//!
//! The analytic route uses `Psi(x, v) = <J x, v> / |x|` for `x != 0` and
//! `Psi(0, v) = |v|`. The numeric route extrapolates the defining quotient and
//! serves as its oracle.

use crate::duality::{j_p, j_x};
use crate::error::{Error, Result};
use crate::richardson::{extrapolate, StepSchedule};
use crate::space::{Element, InnerNorm};

/// Which route evaluates `Psi_p` inside the derivative formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PsiMode {
    #[default]
    Analytic,
    Numeric,
}

pub fn psi_x(inner: &InnerNorm, x: &[f64], v: &[f64]) -> Result<f64> {
    inner.check_len(x)?;
    inner.check_len(v)?;
    let v_norm = inner.norm(v);
    if v_norm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let x_norm = inner.norm(x);
    if x_norm == 0.0 {
        return Ok(v_norm);
    }
    let jx = j_x(inner, x);
    Ok(jx.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / x_norm)
}

pub fn psi_p(f: &Element, h: &Element) -> Result<f64> {
    let h_norm = h.norm();
    if h_norm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let f_norm = f.norm();
    if f_norm == 0.0 {
        return Ok(h_norm);
    }
    Ok(j_p(f).pairing(h)? / f_norm)
}

/// Extrapolated estimate of `Psi_p(f, h)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiEstimate {
    pub value: f64,
    pub error_bound: f64,
}

/// One-sided quotients `(|f + t h| - |f|) / t` over `schedule`, Richardson-extrapolated.
pub fn psi_numeric(f: &Element, h: &Element, schedule: &StepSchedule) -> Result<PsiEstimate> {
    if h.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let base = f.norm();
    let out = extrapolate(schedule, |t| Ok(vec![(f.axpy(t, h)?.norm() - base) / t]))?;
    let scale = base + schedule.initial * h.norm();
    let noise = 8.0 * f64::EPSILON * scale / schedule.finest();
    Ok(PsiEstimate {
        value: out.estimate[0],
        error_bound: out.increment[0].max(noise),
    })
}

/// `Psi_p` as used by the derivative formulas: zero directions give zero.
pub(crate) fn psi_for(f: &Element, h: &Element, mode: PsiMode) -> Result<f64> {
    if h.is_zero() {
        return Ok(0.0);
    }
    match mode {
        PsiMode::Analytic => psi_p(f, h),
        PsiMode::Numeric => {
            // Keep the quotient steps well inside the ball around f where the norm is smooth.
            let scale = if f.is_zero() { 1.0 } else { f.norm() / h.norm() };
            Ok(psi_numeric(f, h, &StepSchedule::with_initial(1e-2 * scale))?.value)
        }
    }
}
