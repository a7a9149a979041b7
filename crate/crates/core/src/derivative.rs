//! Closed-form directional derivatives `P'(g)(h)` of the three projections.
//!
//! Only open regions are covered. A base point on the sphere `S_A(v, r)` or on
//! the cylinder boundary yields [`DerivativeOutcome::NotCovered`].

use crate::error::{Error, Result};
use crate::projection::{classify, BallSpec, ClassifyTol, CylinderSpec, RegionClass, SetSpec, Side};
use crate::smoothness::{psi_for, PsiMode};
use crate::space::{Element, SupportSet};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DerivativeOptions {
    pub psi: PsiMode,
    pub tol: ClassifyTol,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DerivativeOutcome {
    Covered(Element),
    NotCovered(RegionClass),
}

impl DerivativeOutcome {
    pub fn covered(self) -> Option<Element> {
        match self {
            DerivativeOutcome::Covered(e) => Some(e),
            DerivativeOutcome::NotCovered(_) => None,
        }
    }

    pub fn is_covered(&self) -> bool {
        matches!(self, DerivativeOutcome::Covered(_))
    }
}

fn nonzero(h: &Element) -> Result<()> {
    if h.is_zero() {
        Err(Error::ZeroDirection)
    } else {
        Ok(())
    }
}

/// `P'(f)(h) = h_A`, independent of `f`.
pub fn d_project_subspace(f: &Element, h: &Element, a: &SupportSet) -> Result<Element> {
    nonzero(h)?;
    // The base point only has to live in the same space.
    f.sub(h)?;
    h.restrict(a)
}

/// `(r / |w|) (k - Psi_p(w, k) w / |w|)`, the derivative of radial clipping.
fn radial(w: &Element, k: &Element, r: f64, psi: PsiMode) -> Result<Element> {
    let n = w.norm();
    let s = psi_for(w, k, psi)?;
    Ok(k.axpy(-s / n, w)?.scale(r / n))
}

pub fn d_project_ball(g: &Element, h: &Element, ball: &BallSpec, opts: DerivativeOptions) -> Result<DerivativeOutcome> {
    nonzero(h)?;
    let region = classify(g, ball, opts.tol)?;
    let a = ball.support();
    let u = g.sub(ball.center())?;
    let ha = h.restrict(a)?;
    let h_in_subspace = h.max_abs_outside(a) <= opts.tol.subspace;
    let r = ball.radius();
    let value = match region {
        RegionClass::OnSphereInSubspace | RegionClass::OnCylinderBoundaryOffSubspace => {
            return Ok(DerivativeOutcome::NotCovered(region));
        }
        RegionClass::InBall => {
            if h_in_subspace {
                h.clone()
            } else {
                ha
            }
        }
        RegionClass::InSubspaceOutsideBall => {
            if h_in_subspace {
                radial(&u, h, r, opts.psi)?
            } else {
                radial(&u, &ha, r, opts.psi)?
            }
        }
        RegionClass::InCylinderOffSubspace => ha,
        RegionClass::OutsideCylinderOffSubspace => {
            let ua = u.restrict(a)?;
            radial(&ua, &ha, r, opts.psi)?
        }
    };
    Ok(DerivativeOutcome::Covered(value))
}

pub fn d_project_cylinder(
    g: &Element,
    h: &Element,
    cyl: &CylinderSpec,
    opts: DerivativeOptions,
) -> Result<DerivativeOutcome> {
    nonzero(h)?;
    let ball = cyl.base();
    let region = classify(g, ball, opts.tol)?;
    let value = match region.side() {
        Side::Boundary => return Ok(DerivativeOutcome::NotCovered(region)),
        Side::Interior => h.clone(),
        Side::Exterior => {
            let a = ball.support();
            let ua = g.sub(ball.center())?.restrict(a)?;
            let ha = h.restrict(a)?;
            // The S \ A part of h passes through unscaled.
            radial(&ua, &ha, ball.radius(), opts.psi)?.add(&h.restrict_complement(a)?)?
        }
    };
    Ok(DerivativeOutcome::Covered(value))
}

impl SetSpec {
    pub fn derivative(&self, g: &Element, h: &Element, opts: DerivativeOptions) -> Result<DerivativeOutcome> {
        match self {
            SetSpec::Subspace(a) => d_project_subspace(g, h, a).map(DerivativeOutcome::Covered),
            SetSpec::Ball(b) => d_project_ball(g, h, b, opts),
            SetSpec::Cylinder(c) => d_project_cylinder(g, h, c, opts),
        }
    }

    /// Distance from `|g_A - v_A|` to the radius; infinite for the subspace.
    pub fn boundary_distance(&self, g: &Element) -> Result<f64> {
        match self.ball() {
            None => Ok(f64::INFINITY),
            Some(b) => {
                let n = g.sub(b.center())?.restrict(b.support())?.norm();
                Ok((n - b.radius()).abs())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneityReport {
    /// `(lambda, |P'(g)(lambda h) - lambda P'(g)(h)|_max / (1 + |lambda P'(g)(h)|_max))`.
    pub residuals: Vec<(f64, f64)>,
    pub max_residual: f64,
}

/// Checks `P'(g)(lambda h) = lambda P'(g)(h)` for each `lambda > 0`.
pub fn homogeneity_check(
    set: &SetSpec,
    g: &Element,
    h: &Element,
    lambdas: &[f64],
    opts: DerivativeOptions,
) -> Result<Option<HomogeneityReport>> {
    let Some(base) = set.derivative(g, h, opts)?.covered() else {
        return Ok(None);
    };
    let mut residuals = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let Some(scaled) = set.derivative(g, &h.scale(lambda), opts)?.covered() else {
            return Ok(None);
        };
        let expected = base.scale(lambda);
        residuals.push((lambda, scaled.max_abs_diff(&expected) / (1.0 + expected.max_abs())));
    }
    let max_residual = residuals.iter().fold(0.0_f64, |m, r| m.max(r.1));
    Ok(Some(HomogeneityReport {
        residuals,
        max_residual,
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrechetReport {
    pub steps: Vec<f64>,
    /// `curves[j][k]`: residual of direction `j` at step `k`.
    pub curves: Vec<Vec<f64>>,
    /// Shared slope `c` fitted at the coarsest step.
    pub envelope: f64,
    /// Rounding allowance added at step `k`.
    pub noise: Vec<f64>,
    /// Largest `sup_j curves[j][k] / (2 c t_k + noise_k)` over `k`.
    pub ratio: f64,
    /// Every direction stays under `2 c t + noise(t)` at every step.
    pub pass: bool,
}

/// Uniformity proxy: residuals `|(P(g + t h) - P(g)) / t - P'(g)(h)|` over a
/// batch of unit directions must share one linear envelope in `t`.
pub fn frechet_uniformity_check(
    set: &SetSpec,
    g: &Element,
    directions: &[Element],
    steps: &[f64],
    opts: DerivativeOptions,
) -> Result<Option<FrechetReport>> {
    let pg = set.project(g)?;
    let mut curves = Vec::with_capacity(directions.len());
    for h in directions {
        let unit = h.scale(1.0 / h.norm());
        let Some(dp) = set.derivative(g, &unit, opts)?.covered() else {
            return Ok(None);
        };
        let mut curve = Vec::with_capacity(steps.len());
        for &t in steps {
            let q = set.project(&g.axpy(t, &unit)?)?.sub(&pg)?.scale(1.0 / t);
            curve.push(q.sub(&dp)?.norm());
        }
        curves.push(curve);
    }
    let scale = 1.0 + pg.norm() + g.norm();
    let noise: Vec<f64> = steps.iter().map(|t| 1e3 * f64::EPSILON * scale / t).collect();
    let sup = |k: usize| curves.iter().fold(0.0_f64, |m, c| m.max(c[k]));
    let envelope = sup(0) / steps[0];
    let ratio = (0..steps.len()).fold(0.0_f64, |m, k| m.max(sup(k) / (2.0 * envelope * steps[k] + noise[k])));
    Ok(Some(FrechetReport {
        steps: steps.to_vec(),
        curves,
        envelope,
        noise,
        ratio,
        pass: ratio <= 1.0,
    }))
}
