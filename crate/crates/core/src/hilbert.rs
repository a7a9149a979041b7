//! The Hilbert case `p = rho = 2`, written in flat coordinates.
//!
//! An element `f` becomes `x` with `x_(i,k) = sqrt(mu_i) f_(i,k)`, so `L_2(S; l_2^d)`
//! is plain `l_2` on `n d` coordinates and the support set becomes the index
//! mask `M = {(i, k) : i in A}`. Everything here uses Euclidean inner products
//! only and serves as a second route to the general formulas. Balls are
//! centered at the origin.

use crate::derivative::DerivativeOptions;
use crate::error::{Error, Result};
use crate::projection::SetSpec;
use crate::space::{Element, SpaceRef, SupportSet};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn masked(x: &[f64], mask: &[bool], keep: bool) -> Vec<f64> {
    x.iter()
        .zip(mask)
        .map(|(v, &m)| if m == keep { *v } else { 0.0 })
        .collect()
}

fn ensure_hilbert(space: &SpaceRef) -> Result<()> {
    if space.is_hilbert() {
        Ok(())
    } else {
        Err(Error::NotHilbert {
            p: space.p(),
            rho: space.inner().rho(),
        })
    }
}

/// Flat coordinates `sqrt(mu_i) f_(i,k)`.
pub fn to_flat(f: &Element) -> Result<Vec<f64>> {
    let space = f.space();
    ensure_hilbert(space)?;
    let d = space.dim();
    Ok(f.values()
        .iter()
        .enumerate()
        .map(|(j, v)| space.measure().weight(j / d).sqrt() * v)
        .collect())
}

pub fn from_flat(space: &SpaceRef, x: &[f64]) -> Result<Element> {
    ensure_hilbert(space)?;
    let d = space.dim();
    let values = x
        .iter()
        .enumerate()
        .map(|(j, v)| v / space.measure().weight(j / d).sqrt())
        .collect();
    Element::from_flat(space, values)
}

pub fn mask(a: &SupportSet) -> Vec<bool> {
    let d = a.space().dim();
    (0..a.space().len()).map(|j| a.contains(j / d)).collect()
}

/// Position of `x` relative to the ball `B_M(r)` and the cylinder `C_M(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HilbertRegion {
    /// `x` in the open ball `B_M^o(r)`.
    OpenBall,
    /// `x` in `H_M` with `|x| > r`.
    SubspaceExterior,
    /// `x` off `H_M` with `|x_M| < r`.
    OpenCylinder,
    /// `x` off `H_M` with `|x_M| > r`.
    Exterior,
    Boundary,
}

pub fn region(x: &[f64], mask: &[bool], r: f64) -> HilbertRegion {
    let on_m = masked(x, mask, false).iter().all(|v| v.abs() <= 1e-12);
    let nm = norm(&masked(x, mask, true));
    match (on_m, nm) {
        _ if (nm - r).abs() <= 1e-9 => HilbertRegion::Boundary,
        (true, n) if n < r => HilbertRegion::OpenBall,
        (true, _) => HilbertRegion::SubspaceExterior,
        (false, n) if n < r => HilbertRegion::OpenCylinder,
        (false, _) => HilbertRegion::Exterior,
    }
}

/// Projection onto `B_M(r)`, case by case.
pub fn project_ball(x: &[f64], mask: &[bool], r: f64) -> Vec<f64> {
    let on_m = masked(x, mask, false).iter().all(|v| *v == 0.0);
    let xm = masked(x, mask, true);
    let nm = norm(&xm);
    match (on_m, nm <= r) {
        (true, true) => x.to_vec(),
        (true, false) => x.iter().map(|v| r / norm(x) * v).collect(),
        (false, true) => xm,
        (false, false) => xm.iter().map(|v| r / nm * v).collect(),
    }
}

/// Projection onto `C_M(r)`: `x` itself, or `(r/|x_M|) x_M + x_(N \ M)`.
pub fn project_cylinder(x: &[f64], mask: &[bool], r: f64) -> Vec<f64> {
    let xm = masked(x, mask, true);
    let nm = norm(&xm);
    if nm <= r {
        return x.to_vec();
    }
    let rest = masked(x, mask, false);
    xm.iter().zip(&rest).map(|(a, b)| r / nm * a + b).collect()
}

/// `(r/|y|)(k - <y, k>/|y|^2 y)`.
fn tangent(y: &[f64], k: &[f64], r: f64) -> Vec<f64> {
    let n = norm(y);
    let c = dot(y, k) / (n * n);
    k.iter().zip(y).map(|(a, b)| r / n * (a - c * b)).collect()
}

/// Directional derivative of the ball projection; `None` on the boundary.
pub fn d_project_ball(x: &[f64], h: &[f64], mask: &[bool], r: f64) -> Option<Vec<f64>> {
    let h_in = masked(h, mask, false).iter().all(|v| v.abs() <= 1e-12);
    let hm = masked(h, mask, true);
    Some(match region(x, mask, r) {
        HilbertRegion::Boundary => return None,
        HilbertRegion::OpenBall if h_in => h.to_vec(),
        HilbertRegion::OpenBall | HilbertRegion::OpenCylinder => hm,
        HilbertRegion::SubspaceExterior if h_in => tangent(x, h, r),
        HilbertRegion::SubspaceExterior => tangent(x, &hm, r),
        HilbertRegion::Exterior => tangent(&masked(x, mask, true), &hm, r),
    })
}

/// Directional derivative of the cylinder projection; `None` on the boundary.
pub fn d_project_cylinder(x: &[f64], h: &[f64], mask: &[bool], r: f64) -> Option<Vec<f64>> {
    let nm = norm(&masked(x, mask, true));
    if (nm - r).abs() <= 1e-9 {
        return None;
    }
    if nm < r {
        return Some(h.to_vec());
    }
    let t = tangent(&masked(x, mask, true), &masked(h, mask, true), r);
    Some(t.iter().zip(&masked(h, mask, false)).map(|(a, b)| a + b).collect())
}

/// Largest coordinate gap between the general path and the flat formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Consistency {
    pub projection: f64,
    /// `None` when either route refuses the base point.
    pub derivative: Option<f64>,
    /// Both routes refuse, or both answer.
    pub coverage_agrees: bool,
}

/// Compares the general projection and derivative with the flat formulas.
pub fn consistency(g: &Element, h: &Element, set: &SetSpec, opts: DerivativeOptions) -> Result<Consistency> {
    let space = g.space();
    ensure_hilbert(space)?;
    let m = mask(set.support());
    let x = to_flat(g)?;
    let hx = to_flat(h)?;
    let (flat_p, flat_d) = match set {
        SetSpec::Subspace(_) => (masked(&x, &m, true), Some(masked(&hx, &m, true))),
        SetSpec::Ball(_) | SetSpec::Cylinder(_) => {
            let b = set.ball().expect("ball or cylinder");
            if !b.center().is_zero() {
                return Err(Error::NotSupported);
            }
            let r = b.radius();
            if matches!(set, SetSpec::Ball(_)) {
                (project_ball(&x, &m, r), d_project_ball(&x, &hx, &m, r))
            } else {
                (project_cylinder(&x, &m, r), d_project_cylinder(&x, &hx, &m, r))
            }
        }
    };
    let general_p = to_flat(&set.project(g)?)?;
    let projection = general_p
        .iter()
        .zip(&flat_p)
        .fold(0.0_f64, |a, (u, v)| a.max((u - v).abs()));
    let general_d = set.derivative(g, h, opts)?.covered();
    let coverage_agrees = general_d.is_some() == flat_d.is_some();
    let derivative = match (general_d, flat_d) {
        (Some(gd), Some(fd)) => {
            let gd = to_flat(&gd)?;
            Some(gd.iter().zip(&fd).fold(0.0_f64, |a, (u, v)| a.max((u - v).abs())))
        }
        _ => None,
    };
    Ok(Consistency {
        projection,
        derivative,
        coverage_agrees,
    })
}
