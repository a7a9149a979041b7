//! Closed-form metric projections onto the supported subspace `L_p(A; X)`,
//! the ball `B_A(v, r)` inside it, and the cylinder `C_A(v, r)` over that ball.
//!
//! Centered sets are handled by translation: with `u = g - v`, the projection
//! onto `B_A(v, r)` is `v` plus the projection of `u` onto `B_A(0, r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{same_space, Element, SpaceRef, SupportSet};

/// A closed ball of `L_p(A; X)`, viewed as a subset of `L_p(S; X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSpec {
    support: SupportSet,
    center: Element,
    radius: f64,
}

impl BallSpec {
    pub fn new(support: SupportSet, center: Element, radius: f64) -> Result<Self> {
        if !same_space(support.space(), center.space()) {
            return Err(Error::SpaceMismatch);
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::BadRadius(radius));
        }
        if !center.is_supported_in(&support) {
            return Err(Error::NotSupported);
        }
        Ok(Self {
            support,
            center,
            radius,
        })
    }

    /// `B_A(0, r)`.
    pub fn centered(support: SupportSet, radius: f64) -> Result<Self> {
        let center = Element::zeros(support.space());
        Self::new(support, center, radius)
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn center(&self) -> &Element {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn space(&self) -> &SpaceRef {
        self.support.space()
    }

    /// The same ball recentered at the origin.
    pub fn at_origin(&self) -> Self {
        Self {
            support: self.support.clone(),
            center: Element::zeros(self.space()),
            radius: self.radius,
        }
    }
}

/// `C_A(v, r) = { f : f_A in B_A(v, r) }`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderSpec {
    base: BallSpec,
}

impl CylinderSpec {
    pub fn new(base: BallSpec) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &BallSpec {
        &self.base
    }
}

/// Where a point sits relative to a ball `B_A(v, r)` and its cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegionClass {
    InBall,
    OnSphereInSubspace,
    InSubspaceOutsideBall,
    InCylinderOffSubspace,
    OnCylinderBoundaryOffSubspace,
    OutsideCylinderOffSubspace,
}

/// Position of `|u_A|` against the radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Interior,
    Boundary,
    Exterior,
}

impl RegionClass {
    pub const ALL: [RegionClass; 6] = [
        RegionClass::InBall,
        RegionClass::OnSphereInSubspace,
        RegionClass::InSubspaceOutsideBall,
        RegionClass::InCylinderOffSubspace,
        RegionClass::OnCylinderBoundaryOffSubspace,
        RegionClass::OutsideCylinderOffSubspace,
    ];

    pub fn in_subspace(self) -> bool {
        matches!(
            self,
            RegionClass::InBall | RegionClass::OnSphereInSubspace | RegionClass::InSubspaceOutsideBall
        )
    }

    pub fn side(self) -> Side {
        match self {
            RegionClass::InBall | RegionClass::InCylinderOffSubspace => Side::Interior,
            RegionClass::OnSphereInSubspace | RegionClass::OnCylinderBoundaryOffSubspace => Side::Boundary,
            RegionClass::InSubspaceOutsideBall | RegionClass::OutsideCylinderOffSubspace => Side::Exterior,
        }
    }

    pub fn is_boundary(self) -> bool {
        self.side() == Side::Boundary
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionClass::InBall => "IN_BALL",
            RegionClass::OnSphereInSubspace => "ON_SPHERE_IN_SUBSPACE",
            RegionClass::InSubspaceOutsideBall => "IN_SUBSPACE_OUTSIDE_BALL",
            RegionClass::InCylinderOffSubspace => "IN_CYLINDER_OFF_SUBSPACE",
            RegionClass::OnCylinderBoundaryOffSubspace => "ON_CYLINDER_BOUNDARY_OFF_SUBSPACE",
            RegionClass::OutsideCylinderOffSubspace => "OUTSIDE_CYLINDER_OFF_SUBSPACE",
        }
    }
}

impl std::fmt::Display for RegionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tolerances for [`classify`]: `boundary` is the half-width of the band
/// around the sphere, `subspace` the max-abs threshold for rows outside `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyTol {
    pub boundary: f64,
    pub subspace: f64,
}

impl Default for ClassifyTol {
    fn default() -> Self {
        Self {
            boundary: 1e-9,
            subspace: 1e-12,
        }
    }
}

/// Offset `u = g - v` of `g` from the ball center, with `|u_A|`.
fn offset(g: &Element, ball: &BallSpec) -> Result<(Element, Element, f64)> {
    let u = g.sub(&ball.center)?;
    let ua = u.restrict(&ball.support)?;
    let n = ua.norm();
    Ok((u, ua, n))
}

pub fn classify(g: &Element, ball: &BallSpec, tol: ClassifyTol) -> Result<RegionClass> {
    let (u, _, n) = offset(g, ball)?;
    let in_subspace = u.max_abs_outside(&ball.support) <= tol.subspace;
    let r = ball.radius;
    let side = if (n - r).abs() <= tol.boundary {
        Side::Boundary
    } else if n < r {
        Side::Interior
    } else {
        Side::Exterior
    };
    Ok(match (in_subspace, side) {
        (true, Side::Interior) => RegionClass::InBall,
        (true, Side::Boundary) => RegionClass::OnSphereInSubspace,
        (true, Side::Exterior) => RegionClass::InSubspaceOutsideBall,
        (false, Side::Interior) => RegionClass::InCylinderOffSubspace,
        (false, Side::Boundary) => RegionClass::OnCylinderBoundaryOffSubspace,
        (false, Side::Exterior) => RegionClass::OutsideCylinderOffSubspace,
    })
}

/// Nearest point of `L_p(A; X)`: the restriction `g_A`.
pub fn project_subspace(g: &Element, a: &SupportSet) -> Result<Element> {
    g.restrict(a)
}

/// Whether `w` lies in the inverse image `h + L_p(S \ A; X)` of `h`.
pub fn inverse_image_member(h: &Element, w: &Element, a: &SupportSet) -> Result<bool> {
    if !h.is_supported_in(a) {
        return Err(Error::NotSupported);
    }
    let wa = w.restrict(a)?;
    Ok(wa.values() == h.values())
}

/// Writes `center_A + local_A` into the `A` rows of `base`.
fn overwrite_support(base: &Element, ball: &BallSpec, local: &Element) -> Element {
    let d = base.space().dim();
    let mut values = base.values().to_vec();
    for i in ball.support.indices() {
        let (c, l) = (ball.center.row(i), local.row(i));
        for k in 0..d {
            values[i * d + k] = c[k] + l[k];
        }
    }
    Element::from_raw(base.space(), values)
}

/// Nearest point of `B_A(v, r)`.
///
/// With `u = g - v`: inside the ball, `u` itself; on the subspace outside it,
/// `(r/|u|) u`; off the subspace, `u_A` or `(r/|u_A|) u_A`. On the subspace
/// `u = u_A`, so all four reduce to radial clipping of `u_A`.
pub fn project_ball(g: &Element, ball: &BallSpec) -> Result<Element> {
    let (_, ua, n) = offset(g, ball)?;
    let local = if n <= ball.radius {
        ua
    } else {
        ua.scale(ball.radius / n)
    };
    Ok(overwrite_support(&Element::zeros(g.space()), ball, &local))
}

/// Nearest point of `C_A(v, r)`; rows outside `A` are copied from `g` unchanged.
pub fn project_cylinder(g: &Element, cyl: &CylinderSpec) -> Result<Element> {
    let ball = &cyl.base;
    let (_, ua, n) = offset(g, ball)?;
    if n <= ball.radius {
        return Ok(g.clone());
    }
    Ok(overwrite_support(g, ball, &ua.scale(ball.radius / n)))
}

/// One of the three closed convex families.
#[derive(Clone, Debug, PartialEq)]
pub enum SetSpec {
    Subspace(SupportSet),
    Ball(BallSpec),
    Cylinder(CylinderSpec),
}

impl SetSpec {
    pub fn support(&self) -> &SupportSet {
        match self {
            SetSpec::Subspace(a) => a,
            SetSpec::Ball(b) => b.support(),
            SetSpec::Cylinder(c) => c.base().support(),
        }
    }

    pub fn space(&self) -> &SpaceRef {
        self.support().space()
    }

    pub fn ball(&self) -> Option<&BallSpec> {
        match self {
            SetSpec::Subspace(_) => None,
            SetSpec::Ball(b) => Some(b),
            SetSpec::Cylinder(c) => Some(c.base()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SetSpec::Subspace(_) => "subspace",
            SetSpec::Ball(_) => "ball",
            SetSpec::Cylinder(_) => "cylinder",
        }
    }

    pub fn project(&self, g: &Element) -> Result<Element> {
        match self {
            SetSpec::Subspace(a) => project_subspace(g, a),
            SetSpec::Ball(b) => project_ball(g, b),
            SetSpec::Cylinder(c) => project_cylinder(g, c),
        }
    }

    /// `None` for the subspace, which has no radius to compare against.
    pub fn classify(&self, g: &Element, tol: ClassifyTol) -> Result<Option<RegionClass>> {
        self.ball().map(|b| classify(g, b, tol)).transpose()
    }

    /// Membership with slack `tol` on the radius and on rows that must vanish.
    pub fn contains(&self, f: &Element, tol: f64) -> Result<bool> {
        let a = self.support();
        let off_ok = f.max_abs_outside(a) <= tol;
        Ok(match self {
            SetSpec::Subspace(_) => off_ok,
            SetSpec::Ball(b) => off_ok && offset(f, b)?.2 <= b.radius + tol,
            SetSpec::Cylinder(c) => offset(f, c.base())?.2 <= c.base().radius + tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::BochnerSpace;

    fn two_atoms() -> (SpaceRef, SupportSet) {
        let s = BochnerSpace::build(vec![1.0, 1.0], 1, 2.0, 2.0).unwrap();
        let a = SupportSet::new(&s, &[0]).unwrap();
        (s, a)
    }

    #[test]
    fn worked_two_atom_instance() {
        let (s, a) = two_atoms();
        let ball = BallSpec::centered(a, 1.0).unwrap();
        let g = Element::from_flat(&s, vec![2.0, 3.0]).unwrap();
        assert_eq!(project_ball(&g, &ball).unwrap().values(), &[1.0, 0.0]);
        let cyl = CylinderSpec::new(ball.clone());
        assert_eq!(project_cylinder(&g, &cyl).unwrap().values(), &[1.0, 3.0]);
        assert_eq!(
            classify(&g, &ball, ClassifyTol::default()).unwrap(),
            RegionClass::OutsideCylinderOffSubspace
        );
    }

    #[test]
    fn classify_cases() {
        let s = BochnerSpace::build(vec![1.0, 2.0, 0.5], 2, 3.0, 1.5).unwrap();
        let a = SupportSet::new(&s, &[0, 1]).unwrap();
        let center = Element::from_flat(&s, vec![0.5, -0.5, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let ball = BallSpec::new(a.clone(), center.clone(), 0.8).unwrap();
        let tol = ClassifyTol::default();
        assert_eq!(classify(&center, &ball, tol).unwrap(), RegionClass::InBall);
        let dir = Element::from_flat(&s, vec![1.0, 2.0, -1.0, 0.5, 0.0, 0.0]).unwrap();
        let unit = dir.scale(1.0 / dir.norm());
        let far = center.axpy(1.6, &unit).unwrap();
        assert_eq!(classify(&far, &ball, tol).unwrap(), RegionClass::InSubspaceOutsideBall);
        let on = center.axpy(0.8, &unit).unwrap();
        assert_eq!(classify(&on, &ball, tol).unwrap(), RegionClass::OnSphereInSubspace);
        let off = Element::from_flat(&s, vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(
            classify(&on.add(&off).unwrap(), &ball, tol).unwrap(),
            RegionClass::OnCylinderBoundaryOffSubspace
        );
        assert_eq!(
            classify(&center.add(&off).unwrap(), &ball, tol).unwrap(),
            RegionClass::InCylinderOffSubspace
        );
    }

    #[test]
    fn subspace_projection_edges() {
        let (s, a) = two_atoms();
        let inside = Element::from_flat(&s, vec![2.0, 0.0]).unwrap();
        assert_eq!(project_subspace(&inside, &a).unwrap(), inside);
        let outside = Element::from_flat(&s, vec![0.0, 5.0]).unwrap();
        assert!(project_subspace(&outside, &a).unwrap().is_zero());
        let g = Element::from_flat(&s, vec![1.5, -2.0]).unwrap();
        let lhs = project_subspace(&g.scale(-3.0), &a).unwrap();
        assert_eq!(lhs, project_subspace(&g, &a).unwrap().scale(-3.0));
    }

    #[test]
    fn inverse_image() {
        let (s, a) = two_atoms();
        let h = Element::from_flat(&s, vec![1.5, 0.0]).unwrap();
        assert!(inverse_image_member(&h, &h, &a).unwrap());
        let w = Element::from_flat(&s, vec![1.5, -7.0]).unwrap();
        assert!(inverse_image_member(&h, &w, &a).unwrap());
        let w = Element::from_flat(&s, vec![1.25, 0.0]).unwrap();
        assert!(!inverse_image_member(&h, &w, &a).unwrap());
        let bad = Element::from_flat(&s, vec![1.0, 1.0]).unwrap();
        assert_eq!(inverse_image_member(&bad, &w, &a), Err(Error::NotSupported));
    }

    #[test]
    fn ball_special_values() {
        let s = BochnerSpace::build(vec![1.0, 0.5, 2.0], 2, 1.5, 3.0).unwrap();
        let a = SupportSet::new(&s, &[0, 1]).unwrap();
        let ball = BallSpec::centered(a.clone(), 0.7).unwrap();
        assert!(project_ball(&Element::zeros(&s), &ball).unwrap().is_zero());
        let g = Element::from_flat(&s, vec![1.0, 0.2, -0.4, 0.9, 0.0, 0.0]).unwrap();
        let g = g.scale(1.4 / g.norm());
        let pg = project_ball(&g, &ball).unwrap();
        assert!(pg.max_abs_diff(&g.scale(0.5)) < 1e-15);
    }

    #[test]
    fn unit_measure_indicator_projection() {
        let s = BochnerSpace::build(vec![0.25, 0.75, 1.0], 2, 3.0, 2.5).unwrap();
        let a = SupportSet::new(&s, &[0, 1]).unwrap();
        let ball = BallSpec::centered(a.clone(), 1.0).unwrap();
        let x = [1.5, -2.0];
        let g = Element::indicator(&a, &x).unwrap();
        let nx = s.inner().norm(&x);
        let expected = g.scale(1.0 / nx);
        assert!(project_ball(&g, &ball).unwrap().max_abs_diff(&expected) < 1e-15);
        let small = Element::indicator(&a, &[0.3, 0.1]).unwrap();
        assert_eq!(project_ball(&small, &ball).unwrap(), small);
    }

    #[test]
    fn cylinder_cases() {
        let s = BochnerSpace::build(vec![1.0, 1.0, 3.0], 1, 2.0, 1.5).unwrap();
        let a = SupportSet::new(&s, &[0, 1]).unwrap();
        let cyl = CylinderSpec::new(BallSpec::centered(a, 2.0).unwrap());
        let inside = Element::from_flat(&s, vec![0.5, -0.5, 9.0]).unwrap();
        assert_eq!(project_cylinder(&inside, &cyl).unwrap(), inside);
        let outside = Element::from_flat(&s, vec![3.0, -4.0, -0.0]).unwrap();
        let pg = project_cylinder(&outside, &cyl).unwrap();
        assert_eq!(pg.row(2)[0].to_bits(), (-0.0f64).to_bits());
        assert!((pg.restrict(cyl.base().support()).unwrap().norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn full_support_cylinder_is_ball() {
        let s = BochnerSpace::build(vec![1.0, 2.0], 2, 3.0, 1.5).unwrap();
        let ball = BallSpec::centered(SupportSet::full(&s), 0.5).unwrap();
        let cyl = CylinderSpec::new(ball.clone());
        let g = Element::from_flat(&s, vec![1.0, 2.0, -0.5, 0.25]).unwrap();
        let pb = project_ball(&g, &ball).unwrap();
        assert!(pb.max_abs_diff(&project_cylinder(&g, &cyl).unwrap()) == 0.0);
        assert!(pb.max_abs_diff(&g.scale(0.5 / g.norm())) < 1e-15);
    }

    #[test]
    fn ball_rejects_bad_input() {
        let (s, a) = two_atoms();
        assert_eq!(BallSpec::centered(a.clone(), 0.0), Err(Error::BadRadius(0.0)));
        let c = Element::from_flat(&s, vec![0.0, 1.0]).unwrap();
        assert_eq!(BallSpec::new(a, c, 1.0), Err(Error::NotSupported));
    }
}
