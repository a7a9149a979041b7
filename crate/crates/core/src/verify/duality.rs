use rand::Rng;

use super::gen::{self, Shape};
use super::{CheckResult, Ctx};
use crate::duality::{j_p, j_p_decompose, j_p_simple, j_p_simple_sum, j_x, restriction_identities_check};
use crate::space::{simple_embed, BochnerSpace, Element, InnerNorm};

const N: usize = 500;
const TOL: f64 = 1e-10;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

pub(super) fn run(ctx: &Ctx) -> Vec<CheckResult> {
    let n = ctx.count(N);
    vec![
        ctx.max_check(
            "duality.inner_relations",
            "<J_X v, v> = |v|^2 and |J_X v|_* = |v| in l_rho",
            TOL,
            n,
            |rng| {
                let inner = InnerNorm::new(rng.random_range(1..=3), gen::exponent(rng))?;
                let v = gen::vector(rng, inner.dim());
                let j = j_x(&inner, &v);
                let norm = inner.norm(&v);
                let pair: f64 = j.iter().zip(&v).map(|(a, b)| a * b).sum();
                Ok(Some(rel(pair, norm * norm).max(rel(inner.dual_norm(&j), norm))))
            },
        ),
        ctx.max_check(
            "duality.bochner_relations",
            "<J_p f, f> = |f|^2 and |J_p f|_q = |f| in L_p(S; X)",
            TOL,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let f = gen::element(rng, &s);
                let j = j_p(&f);
                let norm = f.norm();
                Ok(Some(rel(j.pairing(&f)?, norm * norm).max(rel(j.norm(), norm))))
            },
        ),
        ctx.max_check(
            "duality.simple_function",
            "J_p(1_A x) = mu(A)^(1/p - 1/q) 1_A J_X x",
            TOL,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let a = gen::support(rng, &s, false);
                let x = gen::vector(rng, s.dim());
                let closed = j_p_simple(&a, &x)?;
                let direct = j_p(&Element::indicator(&a, &x)?);
                Ok(Some(closed.max_abs_diff(&direct) / (1.0 + direct.max_abs())))
            },
        ),
        ctx.max_check(
            "duality.simple_sum",
            "J_p of a finite sum of simple functions on disjoint sets",
            TOL,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let blocks = gen::partition(rng, &s);
                // Drop a block now and then so the sets need not cover S.
                let keep = if blocks.len() > 1 && rng.random::<bool>() {
                    blocks.len() - 1
                } else {
                    blocks.len()
                };
                let blocks = &blocks[..keep];
                let xs: Vec<Vec<f64>> = blocks.iter().map(|_| gen::vector(rng, s.dim())).collect();
                let closed = j_p_simple_sum(blocks, &xs)?;
                let direct = j_p(&Element::simple(blocks, &xs)?);
                Ok(Some(closed.max_abs_diff(&direct) / (1.0 + direct.max_abs())))
            },
        ),
        ctx.max_check(
            "duality.decomposition",
            "J_p f reassembled blockwise over a strong partition",
            TOL,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let blocks = gen::partition(rng, &s);
                let f = gen::element(rng, &s);
                let closed = j_p_decompose(&f, &blocks)?;
                let direct = j_p(&f);
                Ok(Some(closed.max_abs_diff(&direct) / (1.0 + direct.max_abs())))
            },
        ),
        ctx.max_check(
            "duality.restriction_support",
            "J_p f_A is supported in A",
            TOL,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let a = gen::support(rng, &s, false);
                let f = gen::element(rng, &s);
                Ok(Some(restriction_identities_check(&f, &a)?.support_residual))
            },
        ),
        ctx.max_check(
            "duality.restriction_scaling",
            "(J_p f)_A = (|f_A| / |f|)^(p-2) J_p f_A",
            TOL,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let a = gen::support(rng, &s, false);
                let f = gen::element(rng, &s);
                Ok(restriction_identities_check(&f, &a)?.scaling_residual)
            },
        ),
        ctx.max_check(
            "duality.restriction_gap",
            "(J_p f)_A differs from J_p f_A exactly when |f_A| < |f| and p != 2",
            0.0,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default().at_least(2));
                let proper = rng.random::<bool>();
                let a = gen::support(rng, &s, proper);
                let f = gen::element(rng, &s);
                Ok(Some(if restriction_identities_check(&f, &a)?.gap_consistent {
                    0.0
                } else {
                    1.0
                }))
            },
        ),
        ctx.max_check(
            "duality.embedding_isometry",
            "|mu(A)^(-1/p) 1_A x| = |x| and J_p of the embedding pairs to |x|^2",
            TOL,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let a = gen::support(rng, &s, false);
                let x = gen::vector(rng, s.dim());
                let e = simple_embed(&a, &x)?;
                let nx = s.inner().norm(&x);
                Ok(Some(rel(e.norm(), nx).max(rel(j_p(&e).pairing(&e)?, nx * nx))))
            },
        ),
        ctx.max_check(
            "duality.homogeneity",
            "J_p(lambda f) = lambda J_p f for lambda in {-2, -1, 0.5, 3}",
            1e-12,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let f = gen::element(rng, &s);
                let j = j_p(&f);
                let worst = [-2.0, -1.0, 0.5, 3.0].iter().fold(0.0_f64, |m, &l| {
                    let diff = j_p(&f.scale(l)).max_abs_diff(&j.scale(l));
                    m.max(diff / (l.abs() * (1.0 + j.max_abs())))
                });
                Ok(Some(worst))
            },
        ),
        ctx.max_check(
            "duality.simple_approximation",
            "|J_p f_n - J_p f| decreases strictly along five refinements f_n -> f",
            0.0,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default());
                let f = gen::element(rng, &s);
                let coarse = gen::element(rng, &s);
                let j = j_p(&f);
                let gaps = (1..=5)
                    .map(|k| {
                        let fk = f.axpy(10f64.powi(-k), &coarse.sub(&f)?)?;
                        Ok(j_p(&fk).sub(&j)?.norm())
                    })
                    .collect::<crate::error::Result<Vec<f64>>>()?;
                let bad = gaps.windows(2).filter(|w| !(w[1] < w[0])).count();
                Ok(Some(bad as f64))
            },
        ),
        ctx.max_check(
            "duality.hilbert_identity",
            "J_p is the identity when p = rho = 2",
            1e-12,
            n,
            |rng| {
                let s = gen::space(rng, Shape::default().hilbert());
                let f = gen::element(rng, &s);
                let j = j_p(&f);
                let diff = j
                    .values()
                    .iter()
                    .zip(f.values())
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                Ok(Some(diff / (1.0 + f.max_abs())))
            },
        ),
        ctx.max_check(
            "duality.scalar_space",
            "single unit atom: L_p(S; X) is X and J_p is J_X",
            TOL,
            n,
            |rng| {
                let inner = InnerNorm::new(rng.random_range(1..=3), gen::exponent(rng))?;
                let s = BochnerSpace::new(crate::space::MeasureSpace::new(vec![1.0])?, inner, gen::exponent(rng))?;
                let f = gen::element(rng, &s);
                let jx = j_x(s.inner(), f.values());
                let diff = j_p(&f)
                    .values()
                    .iter()
                    .zip(&jx)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                Ok(Some(diff / (1.0 + f.max_abs())))
            },
        ),
    ]
}
