use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::gen::{self, BallOptions, Region, Shape};
use super::{finish, CheckResult, Ctx};
use crate::derivative::{
    d_project_subspace, frechet_uniformity_check, homogeneity_check, DerivativeOptions, DerivativeOutcome,
};
use crate::error::{Error, Result};
use crate::oracle::{fd_derivative, fd_schedule, smooth_radius, RegionLocked};
use crate::projection::{BallSpec, ClassifyTol, CylinderSpec, SetSpec};
use crate::smoothness::{psi_p, PsiMode};
use crate::space::Element;

const N: usize = 200;

#[derive(Clone, Copy)]
enum Case {
    Subspace,
    Ball(Region, bool),
    CylinderInterior,
    CylinderExterior,
}

impl Case {
    const ALL: [Case; 9] = [
        Case::Subspace,
        Case::Ball(Region::InBall, true),
        Case::Ball(Region::InBall, false),
        Case::Ball(Region::SubspaceExterior, true),
        Case::Ball(Region::SubspaceExterior, false),
        Case::Ball(Region::OpenCylinder, false),
        Case::Ball(Region::Exterior, false),
        Case::CylinderInterior,
        Case::CylinderExterior,
    ];

    fn name(self) -> &'static str {
        match self {
            Case::Subspace => "subspace",
            Case::Ball(Region::InBall, true) => "ball_interior_h_in_subspace",
            Case::Ball(Region::InBall, false) => "ball_interior",
            Case::Ball(Region::SubspaceExterior, true) => "ball_subspace_exterior_h_in_subspace",
            Case::Ball(Region::SubspaceExterior, false) => "ball_subspace_exterior",
            Case::Ball(Region::OpenCylinder, _) => "ball_open_cylinder",
            Case::Ball(Region::Exterior, _) => "ball_exterior",
            Case::CylinderInterior => "cylinder_interior",
            Case::CylinderExterior => "cylinder_exterior",
        }
    }

    fn statement(self) -> &'static str {
        match self {
            Case::Subspace => "P'(f)(h) = h_A",
            Case::Ball(Region::InBall, true) => "P'_{B_A}(g)(h) = h for h in L_p(A; X) inside the ball",
            Case::Ball(Region::InBall, false) => "P'_{B_A}(g)(h) = h_A inside the ball",
            Case::Ball(Region::SubspaceExterior, true) => {
                "P'_{B_A}(g)(h) = (r/|u|)(h - Psi_p(u, h) u / |u|) on the subspace outside the ball"
            }
            Case::Ball(Region::SubspaceExterior, false) => {
                "P'_{B_A}(g)(h) = (r/|u|)(h_A - Psi_p(u, h_A) u / |u|) on the subspace outside the ball"
            }
            Case::Ball(Region::OpenCylinder, _) => "P'_{B_A}(g)(h) = h_A off the subspace inside the cylinder",
            Case::Ball(Region::Exterior, _) => {
                "P'_{B_A}(g)(h) = (r/|u_A|)(h_A - Psi_p(u_A, h_A) u_A / |u_A|) outside the cylinder"
            }
            Case::CylinderInterior => "P'_{C_A}(g)(h) = h inside the cylinder",
            Case::CylinderExterior => {
                "P'_{C_A}(g)(h) = (r/|u_A|)(h_A - Psi_p(u_A, h_A) u_A / |u_A|) + h_{S \\ A} outside the cylinder"
            }
        }
    }

    /// A set, a base point in the case's open region, and a direction.
    fn instance(self, rng: &mut ChaCha8Rng, opts: BallOptions) -> Result<(SetSpec, Element, Element)> {
        Ok(match self {
            Case::Subspace => {
                let s = gen::space(rng, opts.shape);
                let proper = s.atoms() >= 2 && rng.random::<bool>();
                let a = gen::support(rng, &s, proper);
                let (g, h) = (gen::element(rng, &s), gen::element(rng, &s));
                (SetSpec::Subspace(a), g, h)
            }
            Case::Ball(region, h_in) => {
                let opts = if h_in {
                    opts
                } else {
                    BallOptions {
                        shape: opts.shape.at_least(2),
                        ..opts
                    }
                };
                let (b, g) = gen::ball_instance(rng, region, opts)?;
                let h = if h_in {
                    gen::supported(rng, b.support())
                } else {
                    gen::element(rng, g.space())
                };
                (SetSpec::Ball(b), g, h)
            }
            Case::CylinderInterior | Case::CylinderExterior => {
                let exterior = matches!(self, Case::CylinderExterior);
                let region = match (exterior, rng.random::<bool>()) {
                    (false, true) => Region::InBall,
                    (false, false) => Region::OpenCylinder,
                    (true, true) => Region::SubspaceExterior,
                    (true, false) => Region::Exterior,
                };
                let (b, g) = gen::ball_instance(rng, region, opts)?;
                let h = gen::element(rng, g.space());
                (SetSpec::Cylinder(CylinderSpec::new(b)), g, h)
            }
        })
    }
}

fn covered(out: DerivativeOutcome) -> Result<Element> {
    out.covered().ok_or(Error::NotCovered { step: 0.0 })
}

struct FdSample {
    error: f64,
    outlier: bool,
}

fn fd_sample(ctx: &Ctx, case: Case, rng: &mut ChaCha8Rng) -> Result<Option<FdSample>> {
    let (set, g, h) = case.instance(rng, BallOptions::default())?;
    let opts = DerivativeOptions {
        psi: ctx.psi(),
        tol: ClassifyTol::default(),
    };
    let closed = covered(set.derivative(&g, &h, opts)?)?;
    let lock = RegionLocked::at(&set, &g, opts.tol)?;
    let fd = fd_derivative(&lock, &g, &h, &fd_schedule(&set, &g, &h)?)?;
    let diff = closed.sub(&fd.estimate)?.norm();
    Ok(Some(FdSample {
        error: diff / (1.0 + closed.norm()),
        outlier: diff > 10.0 * fd.error_bound,
    }))
}

pub(super) fn run(ctx: &Ctx) -> Vec<CheckResult> {
    let n = ctx.count(N);
    let mut out = Vec::new();
    let mut outliers = Ok((0usize, 0usize));
    for case in Case::ALL {
        let id = format!("derivatives.{}.fd", case.name());
        let samples = ctx.samples(&id, n, |rng| fd_sample(ctx, case, rng));
        if let (Ok(acc), Ok(v)) = (&mut outliers, &samples) {
            acc.0 += v.iter().filter(|s| s.outlier).count();
            acc.1 += v.len();
        }
        if let Err(e) = &samples {
            outliers = Err(e.clone());
        }
        out.push(finish(
            &id,
            &format!("{}; agrees with the extrapolated difference quotient", case.statement()),
            1e-4,
            samples.map(|v| v.iter().map(|s| s.error).collect()),
        ));
    }
    let mut bound = finish(
        "derivatives.fd_error_bound",
        "|FD estimate - closed form| <= 10 x reported error bound on at least 99% of instances (outlier fraction)",
        0.01,
        outliers
            .clone()
            .map(|(bad, total)| vec![bad as f64 / total.max(1) as f64]),
    );
    if let Ok((bad, _)) = outliers {
        if bad > 0 {
            bound.note = Some(format!("{bad} outliers"));
        }
    }
    out.push(bound);

    out.push(ctx.max_check(
        "derivatives.annihilation_ball",
        "P'_{B_A(r)}(g)(g) = 0 for centered exterior g",
        1e-12,
        n,
        |rng| {
            let region = [Region::SubspaceExterior, Region::Exterior][rng.random_range(0..2)];
            let (b, g) = gen::ball_instance(
                rng,
                region,
                BallOptions {
                    centered: true,
                    ..BallOptions::default()
                },
            )?;
            let d = covered(SetSpec::Ball(b).derivative(&g, &g, DerivativeOptions::default())?)?;
            Ok(Some(d.max_abs() / (1.0 + g.max_abs())))
        },
    ));
    out.push(ctx.max_check(
        "derivatives.annihilation_cylinder",
        "P'_{C_A(r)}(g)(g) = g_{S \\ A} for centered exterior g",
        1e-12,
        n,
        |rng| {
            let region = [Region::SubspaceExterior, Region::Exterior][rng.random_range(0..2)];
            let (b, g) = gen::ball_instance(
                rng,
                region,
                BallOptions {
                    centered: true,
                    ..BallOptions::default()
                },
            )?;
            let rest = g.restrict_complement(b.support())?;
            let set = SetSpec::Cylinder(CylinderSpec::new(b));
            let d = covered(set.derivative(&g, &g, DerivativeOptions::default())?)?;
            Ok(Some(d.max_abs_diff(&rest) / (1.0 + g.max_abs())))
        },
    ));
    out.push(ctx.max_check(
        "derivatives.positive_homogeneity",
        "P'(g)(lambda h) = lambda P'(g)(h) for lambda > 0",
        1e-12,
        n,
        |rng| {
            let case = Case::ALL[rng.random_range(0..Case::ALL.len())];
            let (set, g, h) = case.instance(rng, BallOptions::default())?;
            let lambdas = [1e-3, 0.1, 0.5, 2.0, 10.0, 1e3];
            let report = homogeneity_check(&set, &g, &h, &lambdas, DerivativeOptions::default())?
                .ok_or(Error::NotCovered { step: 0.0 })?;
            Ok(Some(report.max_residual))
        },
    ));
    out.push(ctx.max_check(
        "derivatives.subspace_base_independence",
        "P'_{L_p(A;X)}(f)(h) does not depend on f",
        0.0,
        n,
        |rng| {
            let s = gen::space(rng, Shape::default());
            let a = gen::support(rng, &s, s.atoms() >= 2);
            let h = gen::element(rng, &s);
            let first = d_project_subspace(&gen::element(rng, &s), &h, &a)?;
            let mut differ = false;
            for _ in 0..9 {
                differ |= d_project_subspace(&gen::element(rng, &s), &h, &a)? != first;
            }
            Ok(Some(if differ { 1.0 } else { 0.0 }))
        },
    ));
    out.push(ctx.max_check(
        "derivatives.full_support_collapse",
        "with A = S the ball and cylinder derivatives coincide: h inside, (r/|g|)(h - Psi_p(g, h) g / |g|) outside",
        1e-12,
        n,
        |rng| {
            let region = [Region::InBall, Region::SubspaceExterior][rng.random_range(0..2)];
            let opts = BallOptions {
                centered: true,
                full: true,
                ..BallOptions::default()
            };
            let (b, g) = gen::ball_instance(rng, region, opts)?;
            let h = gen::element(rng, g.space());
            let r = b.radius();
            let db = covered(SetSpec::Ball(b.clone()).derivative(&g, &h, DerivativeOptions::default())?)?;
            let dc =
                covered(SetSpec::Cylinder(CylinderSpec::new(b)).derivative(&g, &h, DerivativeOptions::default())?)?;
            let n = g.norm();
            let expected = if n < r {
                h.clone()
            } else {
                h.axpy(-psi_p(&g, &h)? / n, &g)?.scale(r / n)
            };
            let scale = 1.0 + expected.max_abs();
            Ok(Some(
                (db.max_abs_diff(&dc) / scale).max(db.max_abs_diff(&expected) / scale),
            ))
        },
    ));
    out.push(ctx.max_check(
        "derivatives.numeric_psi_route",
        "derivative formulas give the same value with Psi_p from the extrapolated quotient",
        1e-6,
        n,
        |rng| {
            let case = Case::ALL[rng.random_range(0..Case::ALL.len())];
            let (set, g, h) = case.instance(rng, BallOptions::default())?;
            let a = covered(set.derivative(&g, &h, DerivativeOptions::default())?)?;
            let numeric = DerivativeOptions {
                psi: PsiMode::Numeric,
                ..DerivativeOptions::default()
            };
            let b = covered(set.derivative(&g, &h, numeric)?)?;
            Ok(Some(a.sub(&b)?.norm() / (1.0 + a.norm())))
        },
    ));
    out.push(ctx.max_check(
        "derivatives.boundary_refusal",
        "base points on the sphere or cylinder boundary are reported as not covered",
        0.0,
        n,
        |rng| {
            let region = Region::ALL[rng.random_range(0..4)];
            let (b, g) = gen::ball_instance(rng, region, BallOptions::default())?;
            let u = g.sub(b.center())?;
            let ua = u.restrict(b.support())?;
            let on = b
                .center()
                .add(&ua.scale(b.radius() / ua.norm()))?
                .add(&u.restrict_complement(b.support())?)?;
            let h = gen::element(rng, g.space());
            let opts = DerivativeOptions::default();
            let refused = !SetSpec::Ball(b.clone()).derivative(&on, &h, opts)?.is_covered()
                && !SetSpec::Cylinder(CylinderSpec::new(b))
                    .derivative(&on, &h, opts)?
                    .is_covered();
            Ok(Some(if refused { 0.0 } else { 1.0 }))
        },
    ));
    for (name, kind, statement) in [
        ("subspace", 0, "P_{L_p(A;X)} is Frechet differentiable"),
        (
            "cylinder_interior",
            1,
            "P_{C_A(r)} is Frechet differentiable inside the cylinder",
        ),
        (
            "cylinder_exterior",
            2,
            "P_{C_A(r)} is Frechet differentiable outside the cylinder",
        ),
    ] {
        let id = format!("derivatives.frechet.{name}");
        out.push(ctx.max_check(
            &id,
            &format!("{statement}: FD residuals of 64 unit directions share one envelope c t (worst ratio)"),
            1.0,
            ctx.scaled(10, N),
            |rng| frechet_sample(rng, kind).map(Some),
        ));
    }
    out
}

fn frechet_sample(rng: &mut ChaCha8Rng, kind: usize) -> Result<f64> {
    let (set, g) = match kind {
        0 => {
            let s = gen::space(rng, Shape::default().at_least(2));
            let a = gen::support(rng, &s, true);
            (SetSpec::Subspace(a), gen::element(rng, &s))
        }
        _ => {
            let region = match (kind, rng.random::<bool>()) {
                (1, true) => Region::InBall,
                (1, false) => Region::OpenCylinder,
                (_, true) => Region::SubspaceExterior,
                (_, false) => Region::Exterior,
            };
            let (b, g): (BallSpec, Element) = gen::ball_instance(rng, region, BallOptions::default())?;
            (SetSpec::Cylinder(CylinderSpec::new(b)), g)
        }
    };
    let dirs: Vec<Element> = (0..64).map(|_| gen::unit(rng, g.space())).collect();
    let t0 = 1e-2 * smooth_radius(&set, &g)?;
    let steps: Vec<f64> = (0..6).map(|k| t0 * 0.5f64.powi(k)).collect();
    let report = frechet_uniformity_check(&set, &g, &dirs, &steps, DerivativeOptions::default())?
        .ok_or(Error::NotCovered { step: 0.0 })?;
    Ok(report.ratio)
}
