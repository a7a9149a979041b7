use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::gen::{self, BallOptions, Region, Shape};
use super::{CheckResult, Ctx};
use crate::derivative::DerivativeOptions;
use crate::error::Result;
use crate::hilbert::{consistency, d_project_ball, d_project_cylinder, mask, to_flat};
use crate::projection::{CylinderSpec, SetSpec};

const N: usize = 200;
const TOL: f64 = 1e-12;

fn hilbert_opts(full: bool) -> BallOptions {
    BallOptions {
        shape: Shape::default().hilbert(),
        centered: true,
        full,
    }
}

/// `max(projection gap, derivative gap)`, infinite if only one route answers.
fn gap(rng: &mut ChaCha8Rng, kind: usize, full: bool) -> Result<f64> {
    let region = if full {
        [Region::InBall, Region::SubspaceExterior][rng.random_range(0..2)]
    } else {
        Region::ALL[rng.random_range(0..4)]
    };
    let (b, g) = gen::ball_instance(rng, region, hilbert_opts(full))?;
    let h = if rng.random::<bool>() {
        gen::supported(rng, b.support())
    } else {
        gen::element(rng, g.space())
    };
    let set = match kind {
        0 => SetSpec::Subspace(b.support().clone()),
        1 => SetSpec::Ball(b),
        _ => SetSpec::Cylinder(CylinderSpec::new(b)),
    };
    let c = consistency(&g, &h, &set, DerivativeOptions::default())?;
    if !c.coverage_agrees {
        return Ok(f64::INFINITY);
    }
    let scale = 1.0 + g.max_abs() + h.max_abs();
    Ok(c.projection.max(c.derivative.unwrap_or(0.0)) / scale)
}

pub(super) fn run(ctx: &Ctx) -> Vec<CheckResult> {
    let n = ctx.count(N);
    vec![
        ctx.max_check(
            "hilbert.subspace",
            "p = rho = 2: P_{H_M} x = x_M and P'(x)(h) = h_M",
            TOL,
            n,
            |rng| gap(rng, 0, false).map(Some),
        ),
        ctx.max_check(
            "hilbert.ball",
            "p = rho = 2: ball projection and derivative match the inner-product formulas in every region",
            TOL,
            n,
            |rng| gap(rng, 1, false).map(Some),
        ),
        ctx.max_check(
            "hilbert.cylinder",
            "p = rho = 2: cylinder projection and derivative match the inner-product formulas",
            TOL,
            n,
            |rng| gap(rng, 2, false).map(Some),
        ),
        ctx.max_check(
            "hilbert.full_ball",
            "p = rho = 2, M = N: P_{B(r)} x = (r / |x|) x outside and P'(x)(h) = (r/|x|)(h - <x, h> x / |x|^2)",
            TOL,
            n,
            |rng| {
                let kind = rng.random_range(1..3);
                gap(rng, kind, true).map(Some)
            },
        ),
        ctx.max_check(
            "hilbert.worked_values",
            "P'_{B(r)}(x)(x) = 0 outside B(r) and P'_{C_M(r)}(x)(x) = x_{N \\ M} outside C_M(r)",
            TOL,
            n,
            |rng| {
                let (bf, xf) = gen::ball_instance(rng, Region::SubspaceExterior, hilbert_opts(true))?;
                let region = [Region::SubspaceExterior, Region::Exterior][rng.random_range(0..2)];
                let (bc, xc) = gen::ball_instance(rng, region, hilbert_opts(false))?;
                let opts = DerivativeOptions::default();
                let general_ball = SetSpec::Ball(bf.clone()).derivative(&xf, &xf, opts)?.covered();
                let flat_ball = d_project_ball(&to_flat(&xf)?, &to_flat(&xf)?, &mask(bf.support()), bf.radius());
                let rest = to_flat(&xc.restrict_complement(bc.support())?)?;
                let m = mask(bc.support());
                let flat_cyl = d_project_cylinder(&to_flat(&xc)?, &to_flat(&xc)?, &m, bc.radius());
                let general_cyl = SetSpec::Cylinder(CylinderSpec::new(bc))
                    .derivative(&xc, &xc, opts)?
                    .covered();
                let (Some(gb), Some(fb), Some(gc), Some(fc)) = (general_ball, flat_ball, general_cyl, flat_cyl) else {
                    return Ok(Some(f64::INFINITY));
                };
                let gb = to_flat(&gb)?;
                let gc = to_flat(&gc)?;
                let worst = gb
                    .iter()
                    .chain(&fb)
                    .map(|v| v.abs())
                    .chain(gc.iter().zip(&rest).map(|(a, b)| (a - b).abs()))
                    .chain(fc.iter().zip(&rest).map(|(a, b)| (a - b).abs()))
                    .fold(0.0_f64, f64::max);
                Ok(Some(worst / (1.0 + xf.max_abs() + xc.max_abs())))
            },
        ),
    ]
}
