use rand::Rng;

use super::gen::{self, Shape};
use super::{CheckResult, Ctx};
use crate::richardson::StepSchedule;
use crate::smoothness::{psi_numeric, psi_p, psi_x};
use crate::space::{BochnerSpace, Element, InnerNorm, MeasureSpace};

const N: usize = 500;

/// Initial quotient step `1e-2 |f| / |h|`, inside the region where the norm is smooth.
fn schedule(f: &Element, h: &Element) -> StepSchedule {
    StepSchedule::with_initial(1e-2 * f.norm() / h.norm())
}

pub(super) fn run(ctx: &Ctx) -> Vec<CheckResult> {
    let n = ctx.count(N);
    vec![
        ctx.max_check(
            "smoothness.analytic_vs_numeric",
            "Psi_p(f, h) = <J_p f, h> / |f| against the extrapolated one-sided quotient",
            1e-5,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let f = gen::element(rng, &s);
                let h = gen::element(rng, &s);
                let a = psi_p(&f, &h)?;
                let num = psi_numeric(&f, &h, &schedule(&f, &h))?;
                Ok(Some((a - num.value).abs() / h.norm()))
            },
        ),
        ctx.max_check(
            "smoothness.inner_analytic_vs_numeric",
            "Psi_X(x, v) = <J_X x, v> / |x| against the extrapolated quotient in X",
            1e-5,
            n,
            |rng| {
                let inner = InnerNorm::new(rng.random_range(1..=3), gen::exponent(rng))?;
                let s = BochnerSpace::new(MeasureSpace::new(vec![1.0])?, inner, 2.0)?;
                let x = gen::element(rng, &s);
                let v = gen::element(rng, &s);
                let a = psi_x(s.inner(), x.values(), v.values())?;
                let num = psi_numeric(&x, &v, &schedule(&x, &v))?;
                Ok(Some((a - num.value).abs() / v.norm()))
            },
        ),
        ctx.max_check("smoothness.diagonal", "Psi(x, x) = |x|", 1e-12, n, |rng| {
            let s = gen::space(rng, Shape::default());
            let f = gen::element(rng, &s);
            let inner = s.inner();
            let row = f.row(0);
            let ex = (psi_x(inner, row, row)? - inner.norm(row)).abs() / (1.0 + inner.norm(row));
            let ep = (psi_p(&f, &f)? - f.norm()).abs() / (1.0 + f.norm());
            Ok(Some(ex.max(ep)))
        }),
        ctx.max_check("smoothness.at_origin", "Psi(0, v) = |v|", 0.0, n, |rng| {
            let s = gen::space(rng, Shape::default());
            let h = gen::element(rng, &s);
            let zero = Element::zeros(&s);
            let ex = (psi_x(s.inner(), zero.row(0), h.row(0))? - s.inner().norm(h.row(0))).abs();
            Ok(Some(ex.max((psi_p(&zero, &h)? - h.norm()).abs())))
        }),
        ctx.max_check(
            "smoothness.hilbert",
            "Psi(x, v) = <x, v> / |x| when p = rho = 2",
            1e-12,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default().hilbert());
                let f = gen::element(rng, &s);
                let h = gen::element(rng, &s);
                let w = s.measure().weights();
                let d = s.dim();
                let inner: f64 = f
                    .values()
                    .iter()
                    .zip(h.values())
                    .enumerate()
                    .map(|(j, (a, b))| w[j / d] * a * b)
                    .sum();
                let expected = inner / f.norm();
                Ok(Some((psi_p(&f, &h)? - expected).abs() / (1.0 + expected.abs())))
            },
        ),
        ctx.max_check(
            "smoothness.positive_homogeneity",
            "Psi(x, lambda v) = lambda Psi(x, v) for lambda > 0",
            1e-12,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let f = gen::element(rng, &s);
                let h = gen::element(rng, &s);
                let lambda = 10f64.powf(rng.random_range(-3.0..3.0));
                let base = psi_p(&f, &h)?;
                Ok(Some(
                    (psi_p(&f, &h.scale(lambda))? - lambda * base).abs() / (1.0 + (lambda * base).abs()),
                ))
            },
        ),
    ]
}
