use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::gen::{self, BallOptions, Region, Shape};
use super::{finish, CheckResult, Ctx};
use crate::error::Result;
use crate::oracle::{audit, objective, oracle_project, OracleConfig};
use crate::projection::{
    classify, inverse_image_member, project_ball, project_cylinder, project_subspace, BallSpec, ClassifyTol,
    CylinderSpec, SetSpec,
};
use crate::space::{BochnerSpace, Element, SupportSet};

const N: usize = 200;

#[derive(Clone, Copy)]
enum Case {
    Subspace,
    Ball(Region),
    CylinderInterior,
    CylinderExterior,
}

impl Case {
    const ALL: [Case; 7] = [
        Case::Subspace,
        Case::Ball(Region::InBall),
        Case::Ball(Region::SubspaceExterior),
        Case::Ball(Region::OpenCylinder),
        Case::Ball(Region::Exterior),
        Case::CylinderInterior,
        Case::CylinderExterior,
    ];

    fn name(self) -> &'static str {
        match self {
            Case::Subspace => "subspace",
            Case::Ball(Region::InBall) => "ball_interior",
            Case::Ball(Region::SubspaceExterior) => "ball_subspace_exterior",
            Case::Ball(Region::OpenCylinder) => "ball_open_cylinder",
            Case::Ball(Region::Exterior) => "ball_exterior",
            Case::CylinderInterior => "cylinder_interior",
            Case::CylinderExterior => "cylinder_exterior",
        }
    }

    fn statement(self) -> &'static str {
        match self {
            Case::Subspace => "P_{L_p(A;X)} g = g_A",
            Case::Ball(Region::InBall) => "P_{B_A(v,r)} g = g inside the ball",
            Case::Ball(Region::SubspaceExterior) => "P_{B_A(v,r)} g = v + r u / |u| on the subspace outside the ball",
            Case::Ball(Region::OpenCylinder) => "P_{B_A(v,r)} g = g_A off the subspace inside the cylinder",
            Case::Ball(Region::Exterior) => "P_{B_A(v,r)} g = v + r u_A / |u_A| outside the cylinder",
            Case::CylinderInterior => "P_{C_A(v,r)} g = g inside the cylinder",
            Case::CylinderExterior => "P_{C_A(v,r)} g = v + r u_A / |u_A| + g_{S \\ A} outside the cylinder",
        }
    }

    fn instance(self, rng: &mut ChaCha8Rng) -> Result<(SetSpec, Element)> {
        let opts = BallOptions {
            shape: Shape::oracle(),
            ..BallOptions::default()
        };
        Ok(match self {
            Case::Subspace => {
                let s = gen::space(rng, Shape::oracle());
                let proper = s.atoms() >= 2 && rng.random::<bool>();
                let a = gen::support(rng, &s, proper);
                (SetSpec::Subspace(a), gen::element(rng, &s))
            }
            Case::Ball(region) => {
                let (b, g) = gen::ball_instance(rng, region, opts)?;
                (SetSpec::Ball(b), g)
            }
            Case::CylinderInterior | Case::CylinderExterior => {
                let pick = rng.random::<bool>();
                let region = match (matches!(self, Case::CylinderExterior), pick) {
                    (false, true) => Region::InBall,
                    (false, false) => Region::OpenCylinder,
                    (true, true) => Region::SubspaceExterior,
                    (true, false) => Region::Exterior,
                };
                let (b, g) = gen::ball_instance(rng, region, opts)?;
                (SetSpec::Cylinder(CylinderSpec::new(b)), g)
            }
        })
    }
}

struct OracleSample {
    minimizer: f64,
    objective: f64,
    improvement: f64,
    variational: f64,
    oracle_improvement: f64,
}

fn oracle_sample(ctx: &Ctx, case: Case, rng: &mut ChaCha8Rng) -> Result<Option<OracleSample>> {
    let (set, g) = case.instance(rng)?;
    let closed = set.project(&g)?;
    let cfg = OracleConfig {
        audit_samples: ctx.cfg.audit_samples,
        rng_seed: rng.random(),
        ..OracleConfig::default()
    };
    let oracle = oracle_project(&g, &set, &cfg)?;
    let closed_obj = objective(&g, &closed)?;
    let report = audit(&g, &set, &closed, ctx.cfg.audit_samples, rng.random())?;
    Ok(Some(OracleSample {
        minimizer: closed.sub(&oracle.minimizer)?.norm(),
        objective: (closed_obj - oracle.objective).abs() / (1.0 + oracle.objective),
        improvement: report
            .best_improvement
            .max(report.radial_violation)
            .max(report.support_violation)
            .max(0.0),
        variational: (-report.min_variational).max(0.0),
        oracle_improvement: oracle.audit.best_improvement.max(0.0),
    }))
}

fn oracle_checks(ctx: &Ctx, case: Case, out: &mut Vec<CheckResult>) {
    let id = format!("projections.{}", case.name());
    let samples = ctx.samples(&id, ctx.count(N), |rng| oracle_sample(ctx, case, rng));
    let col = |f: fn(&OracleSample) -> f64| {
        samples
            .as_ref()
            .map(|v| v.iter().map(f).collect())
            .map_err(Clone::clone)
    };
    let stmt = case.statement();
    out.push(finish(
        &format!("{id}.minimizer"),
        &format!("{stmt}; barrier minimizer within 1e-4"),
        1e-4,
        col(|s| s.minimizer),
    ));
    out.push(finish(
        &format!("{id}.objective"),
        &format!("{stmt}; |g - P g|^p matches the barrier objective"),
        1e-8,
        col(|s| s.objective),
    ));
    out.push(finish(
        &format!("{id}.audit"),
        "no sampled feasible point is closer to g than P g",
        1e-8,
        col(|s| s.improvement),
    ));
    out.push(finish(
        &format!("{id}.variational"),
        "<J_p(g - P g), P g - z> >= 0 for sampled feasible z",
        1e-8,
        col(|s| s.variational),
    ));
    out.push(finish(
        &format!("{id}.oracle_audit"),
        "the barrier minimizer survives its own feasibility audit",
        OracleConfig::default().descent_tol,
        col(|s| s.oracle_improvement),
    ));
}

pub(super) fn run(ctx: &Ctx) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for case in Case::ALL {
        oracle_checks(ctx, case, &mut out);
    }
    let n = ctx.count(N);
    out.push(ctx.max_check(
        "projections.nonexpansive",
        "|P f - P g| <= |f - g| for the subspace projection",
        1e-12,
        ctx.scaled(10_000, N),
        |rng| {
            let s = gen::space(rng, Shape::default().at_least(2));
            let a = gen::support(rng, &s, true);
            let (f, g) = (gen::element(rng, &s), gen::element(rng, &s));
            let lhs = project_subspace(&f, &a)?.sub(&project_subspace(&g, &a)?)?.norm();
            let rhs = f.sub(&g)?.norm();
            Ok(Some((lhs - rhs).max(0.0) / (1.0 + rhs)))
        },
    ));
    out.push(ctx.max_check(
        "projections.inverse_image",
        "the preimage of h under P_{L_p(A;X)} is h + L_p(S \\ A; X)",
        0.0,
        ctx.scaled(1_000, N),
        |rng| {
            let s = gen::space(rng, Shape::default().at_least(2));
            let a = gen::support(rng, &s, true);
            let h = gen::supported(rng, &a);
            let k = gen::element(rng, &s).restrict_complement(&a)?;
            let w = h.add(&k)?;
            let member = inverse_image_member(&h, &w, &a)? && project_subspace(&w, &a)? == h;
            let zero_preimage = project_subspace(&k, &a)?.is_zero();
            // Moving w inside A leaves the preimage.
            let i = a.indices().next().expect("nonempty");
            let mut bumped = w.values().to_vec();
            bumped[i * s.dim()] += 0.5;
            let outsider = Element::from_flat(&s, bumped)?;
            let excluded = !inverse_image_member(&h, &outsider, &a)?;
            Ok(Some(if member && zero_preimage && excluded { 0.0 } else { 1.0 }))
        },
    ));
    out.push(ctx.max_check(
        "projections.idempotent",
        "P(P g) = P g for the subspace, ball and cylinder",
        1e-12,
        n,
        |rng| {
            let region = Region::ALL[rng.random_range(0..4)];
            let (b, g) = gen::ball_instance(rng, region, BallOptions::default())?;
            let sets = [
                SetSpec::Subspace(b.support().clone()),
                SetSpec::Cylinder(CylinderSpec::new(b.clone())),
                SetSpec::Ball(b),
            ];
            let mut worst = 0.0_f64;
            for set in &sets {
                let p = set.project(&g)?;
                worst = worst.max(set.project(&p)?.max_abs_diff(&p) / (1.0 + p.max_abs()));
            }
            Ok(Some(worst))
        },
    ));
    out.push(ctx.max_check(
        "projections.cylinder_passthrough",
        "P_{C_A(v,r)} g agrees with g bit for bit on S \\ A",
        0.0,
        n,
        |rng| {
            let region = [Region::OpenCylinder, Region::Exterior][rng.random_range(0..2)];
            let (b, g) = gen::ball_instance(rng, region, BallOptions::default())?;
            let a = b.support().clone();
            let p = project_cylinder(&g, &CylinderSpec::new(b))?;
            let d = g.space().dim();
            let same = (0..g.space().atoms()).filter(|i| !a.contains(*i)).all(|i| {
                let (x, y) = (&g.values()[i * d..(i + 1) * d], &p.values()[i * d..(i + 1) * d]);
                x.iter().zip(y).all(|(u, v)| u.to_bits() == v.to_bits())
            });
            Ok(Some(if same { 0.0 } else { 1.0 }))
        },
    ));
    out.push(ctx.max_check(
        "projections.region_classification",
        "generated points land in the intended region",
        0.0,
        n,
        |rng| {
            let region = Region::ALL[rng.random_range(0..4)];
            let (b, g) = gen::ball_instance(rng, region, BallOptions::default())?;
            Ok(Some(if classify(&g, &b, ClassifyTol::default())? == region.class() {
                0.0
            } else {
                1.0
            }))
        },
    ));
    out.push(ctx.max_check(
        "projections.full_support_collapse",
        "with A = S the ball and cylinder projections coincide and equal g or (r / |g|) g",
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
            let pb = project_ball(&g, &b)?;
            let pc = project_cylinder(&g, &CylinderSpec::new(b.clone()))?;
            let n = g.norm();
            let expected = if n <= b.radius() {
                g.clone()
            } else {
                g.scale(b.radius() / n)
            };
            let scale = 1.0 + expected.max_abs();
            Ok(Some(
                (pb.max_abs_diff(&pc) / scale).max(pb.max_abs_diff(&expected) / scale),
            ))
        },
    ));
    out.push(ctx.max_check(
        "projections.unit_measure_simple",
        "mu(A) = 1: P_{B_A(r)}(1_A x) is 1_A x or (r / |x|) 1_A x (error in ulps)",
        8.0,
        n,
        |rng| unit_measure_sample(rng).map(Some),
    ));
    out.push(finish(
        "projections.worked_example",
        "two unit atoms, A = {1}, r = 1: (2, 3) projects to (1, 0) on the ball and (1, 3) on the cylinder",
        0.0,
        worked_example().map(|e| vec![e]),
    ));
    out
}

/// Atoms with weights summing exactly to one on `A`.
fn unit_measure_sample(rng: &mut ChaCha8Rng) -> Result<f64> {
    let dim = rng.random_range(1..=3);
    let (rho, p) = (gen::exponent(rng), gen::exponent(rng));
    let split: &[f64] = [&[1.0][..], &[0.25, 0.75], &[0.5, 0.25, 0.25]][rng.random_range(0..3)];
    let mut weights = split.to_vec();
    let extra = rng.random_range(0..=2);
    weights.extend((0..extra).map(|_| rng.random_range(0.2..2.0)));
    let s = BochnerSpace::build(weights, dim, rho, p)?;
    let a = SupportSet::new(&s, &(0..split.len()).collect::<Vec<_>>())?;
    let x = gen::vector(rng, dim);
    let nx = s.inner().norm(&x);
    let radius = nx * [0.5, 2.0][rng.random_range(0..2)];
    let g = Element::indicator(&a, &x)?;
    let got = project_ball(&g, &BallSpec::centered(a.clone(), radius)?)?;
    let expected = if nx <= radius {
        g.clone()
    } else {
        Element::indicator(&a, &x.iter().map(|v| radius / nx * v).collect::<Vec<_>>())?
    };
    Ok(got.max_abs_diff(&expected) / (f64::EPSILON * expected.max_abs()))
}

fn worked_example() -> Result<f64> {
    let s = BochnerSpace::build(vec![1.0, 1.0], 1, 2.0, 2.0)?;
    let a = SupportSet::new(&s, &[0])?;
    let g = Element::from_flat(&s, vec![2.0, 3.0])?;
    let ball = BallSpec::centered(a, 1.0)?;
    let pb = project_ball(&g, &ball)?;
    let pc = project_cylinder(&g, &CylinderSpec::new(ball))?;
    Ok(pb
        .max_abs_diff(&Element::from_flat(&s, vec![1.0, 0.0])?)
        .max(pc.max_abs_diff(&Element::from_flat(&s, vec![1.0, 3.0])?)))
}
