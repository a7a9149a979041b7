//! Normalized duality mappings `J_X` on `(R^d, l_rho)` and `J_p` on `L_p(S; X)`.
//!
//! The factor `|v_k|^(rho-2) v_k` is evaluated as `sign(v_k) |v_k|^(rho-1)`,
//! which is continuous and vanishes at `v_k = 0` for every `rho > 1`. Both maps
//! send zero to zero.

use crate::error::{Error, Result};
use crate::space::{check_blocks, check_strong_partition, DualElement, Element, InnerNorm, SupportSet};

/// `(J_X v)_k = sign(v_k) |v_k|^(rho-1) / |v|_rho^(rho-2)`.
pub fn j_x(inner: &InnerNorm, v: &[f64]) -> Vec<f64> {
    let norm = inner.norm(v);
    if norm == 0.0 {
        return vec![0.0; v.len()];
    }
    let rho = inner.rho();
    let denom = norm.powf(rho - 2.0);
    v.iter()
        .map(|&x| x.signum() * x.abs().powf(rho - 1.0) / denom)
        .collect()
}

/// `(J_p f)(s) = |f(s)|^(p-2) J_X(f(s)) / |f|^(p-2)`.
pub fn j_p(f: &Element) -> DualElement {
    let space = f.space();
    let norm = f.norm();
    if norm == 0.0 {
        return DualElement::zeros(space);
    }
    let inner = space.inner();
    let p = space.p();
    let mut out = Vec::with_capacity(space.len());
    for row in f.rows() {
        let r = inner.norm(row);
        if r == 0.0 {
            out.extend(std::iter::repeat_n(0.0, row.len()));
            continue;
        }
        let c = (r / norm).powf(p - 2.0);
        out.extend(j_x(inner, row).into_iter().map(|v| c * v));
    }
    DualElement::from_raw(space, out)
}

/// `J_p(1_A (x) x) = mu(A)^(1/p - 1/q) (1_A (x) J_X x)`.
pub fn j_p_simple(a: &SupportSet, x: &[f64]) -> Result<DualElement> {
    let space = a.space();
    space.inner().check_len(x)?;
    let c = a.measure().powf(1.0 / space.p() - 1.0 / space.q());
    let jx = j_x(space.inner(), x);
    Ok(dual_indicator(a, &jx).scale(c))
}

/// Closed form of `J_p` on the simple function `sum_i 1_{A_i} (x) x_i`:
/// `(sum_j |x_j|^p mu(A_j))^-(1/q - 1/p) * sum_i |x_i|^(p-2) (1_{A_i} (x) J_X x_i)`.
pub fn j_p_simple_sum(blocks: &[SupportSet], xs: &[Vec<f64>]) -> Result<DualElement> {
    check_blocks(blocks, xs)?;
    let space = blocks[0].space();
    let inner = space.inner();
    let p = space.p();
    let q = space.q();
    let norms: Vec<f64> = xs.iter().map(|x| inner.norm(x)).collect();
    if norms.iter().all(|&n| n == 0.0) {
        return Err(Error::ZeroElement);
    }
    let mass: f64 = norms.iter().zip(blocks).map(|(n, b)| n.powf(p) * b.measure()).sum();
    let coeff = mass.powf(-(1.0 / q - 1.0 / p));
    let mut out = DualElement::zeros(space);
    for ((block, x), &n) in blocks.iter().zip(xs).zip(&norms) {
        if n == 0.0 {
            continue;
        }
        let term = dual_indicator(block, &j_x(inner, x)).scale(coeff * n.powf(p - 2.0));
        out = out.add(&term)?;
    }
    Ok(out)
}

/// Blockwise reconstruction `J_p f = |f|^(2-p) sum_n |f_{A_n}|^(p-2) J_p f_{A_n}`
/// over a strong partition. Blocks on which `f` vanishes contribute nothing.
pub fn j_p_decompose(f: &Element, blocks: &[SupportSet]) -> Result<DualElement> {
    check_strong_partition(blocks)?;
    let norm = f.norm();
    if norm == 0.0 {
        return Err(Error::ZeroElement);
    }
    let p = f.space().p();
    let mut out = DualElement::zeros(f.space());
    for block in blocks {
        let part = f.restrict(block)?;
        let part_norm = part.norm();
        if part_norm == 0.0 {
            continue;
        }
        out = out.axpy((part_norm / norm).powf(p - 2.0), &j_p(&part))?;
    }
    Ok(out)
}

fn dual_indicator(a: &SupportSet, phi: &[f64]) -> DualElement {
    let space = a.space();
    let d = space.dim();
    let mut values = vec![0.0; space.len()];
    for i in a.indices() {
        values[i * d..(i + 1) * d].copy_from_slice(phi);
    }
    DualElement::from_raw(space, values)
}

/// Residuals of the restriction identities for `J_p` on one `(f, A)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionReport {
    /// `max |(J_p f_A)_A - J_p f_A|`; exactly zero when `J_p` preserves support.
    pub support_residual: f64,
    /// `max |(J_p f)_A - (|f_A|^(p-2) / |f|^(p-2)) J_p f_A|`, `None` when `f_A = 0`.
    pub scaling_residual: Option<f64>,
    /// `max |(J_p f)_A - J_p f_A|`.
    pub restriction_gap: f64,
    /// Whether `|f_A| != |f|`; with `p != 2` and `f_A != 0` the gap must then be positive.
    pub norms_differ: bool,
    /// `restriction_gap > 0` exactly when it is expected to be.
    pub gap_consistent: bool,
}

/// Evaluates the restriction identities of `J_p` against restriction to `a`.
pub fn restriction_identities_check(f: &Element, a: &SupportSet) -> Result<RestrictionReport> {
    let fa = f.restrict(a)?;
    let jfa = j_p(&fa);
    let support_residual = jfa.restrict(a)?.max_abs_diff(&jfa);
    let jf_a = j_p(f).restrict(a)?;
    let (norm, norm_a) = (f.norm(), fa.norm());
    let p = f.space().p();
    let scaling_residual = if norm_a == 0.0 {
        None
    } else {
        let scaled = jfa.scale((norm_a / norm).powf(p - 2.0));
        Some(jf_a.max_abs_diff(&scaled))
    };
    let restriction_gap = jf_a.max_abs_diff(&jfa);
    let norms_differ = norm_a != norm;
    // With p = 2 the ratio |f_A|^(p-2)/|f|^(p-2) is 1 and the two sides agree.
    let gap_expected = norms_differ && norm_a > 0.0 && p != 2.0;
    let gap_consistent = if gap_expected {
        restriction_gap > 0.0
    } else {
        restriction_gap <= 1e-12 * (1.0 + jfa.max_abs())
    };
    Ok(RestrictionReport {
        support_residual,
        scaling_residual,
        restriction_gap,
        norms_differ,
        gap_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::BochnerSpace;

    #[test]
    fn hilbert_j_x_is_identity() {
        let x = InnerNorm::new(3, 2.0).unwrap();
        let v = [0.3, -1.7, 2.5];
        assert_eq!(j_x(&x, &v), v.to_vec());
        assert_eq!(j_x(&x, &[0.0; 3]), vec![0.0; 3]);
    }

    #[test]
    fn rho_three_j_x_of_ones() {
        let x = InnerNorm::new(2, 3.0).unwrap();
        let j = j_x(&x, &[1.0, 1.0]);
        let c = 2f64.powf(-1.0 / 3.0);
        assert!((j[0] - c).abs() < 1e-15 && (j[1] - c).abs() < 1e-15);
        let pairing: f64 = j.iter().sum();
        assert!((pairing - 2f64.powf(2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn small_rho_zero_coordinate() {
        let x = InnerNorm::new(2, 1.5).unwrap();
        let j = j_x(&x, &[0.0, -2.0]);
        assert_eq!(j[0], 0.0);
        assert!((j[1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn hilbert_j_p_is_identity() {
        let s = BochnerSpace::build(vec![0.5, 2.0], 2, 2.0, 2.0).unwrap();
        let f = Element::from_flat(&s, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(j_p(&f).values(), f.values());
    }

    #[test]
    fn two_atom_j_p() {
        let s = BochnerSpace::build(vec![1.0, 1.0], 1, 2.0, 3.0).unwrap();
        let f = Element::from_flat(&s, vec![1.0, 1.0]).unwrap();
        let j = j_p(&f);
        let c = 2f64.powf(-1.0 / 3.0);
        assert!(j.values().iter().all(|v| (v - c).abs() < 1e-15));
        assert!((j.pairing(&f).unwrap() - 2f64.powf(2.0 / 3.0)).abs() < 1e-14);
        assert!((j.norm() - f.norm()).abs() < 1e-14);
    }

    #[test]
    fn unit_measure_indicator() {
        let s = BochnerSpace::build(vec![0.25, 0.75, 3.0], 2, 3.0, 1.5).unwrap();
        let a = SupportSet::new(&s, &[0, 1]).unwrap();
        let x = [1.2, -0.4];
        let jx = j_x(s.inner(), &x);
        let direct = j_p(&Element::indicator(&a, &x).unwrap());
        let simple = j_p_simple(&a, &x).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                assert!((direct.row(i)[k] - jx[k]).abs() < 1e-14);
                assert!((simple.row(i)[k] - jx[k]).abs() < 1e-14);
            }
        }
        assert!(direct.row(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn p_two_simple_ignores_measure() {
        let s = BochnerSpace::build(vec![1.5, 2.5, 1.0], 2, 3.0, 2.0).unwrap();
        let a = SupportSet::new(&s, &[0, 1]).unwrap();
        let x = [0.7, -1.1];
        let simple = j_p_simple(&a, &x).unwrap();
        let direct = j_p(&Element::indicator(&a, &x).unwrap());
        let jx = j_x(s.inner(), &x);
        assert!(simple.max_abs_diff(&direct) < 1e-14);
        assert!((simple.row(0)[0] - jx[0]).abs() < 1e-15);
        assert!(j_p_simple(&a, &[0.0, 0.0]).unwrap().is_zero());
    }

    #[test]
    fn simple_sum_two_blocks() {
        let s = BochnerSpace::build(vec![1.0, 1.0], 1, 2.0, 3.0).unwrap();
        let blocks = [SupportSet::new(&s, &[0]).unwrap(), SupportSet::new(&s, &[1]).unwrap()];
        let xs = vec![vec![1.0], vec![1.0]];
        let closed = j_p_simple_sum(&blocks, &xs).unwrap();
        let direct = j_p(&Element::simple(&blocks, &xs).unwrap());
        assert!(closed.max_abs_diff(&direct) < 1e-15);
        assert!(matches!(
            j_p_simple_sum(&blocks, &[vec![0.0], vec![0.0]]),
            Err(Error::ZeroElement)
        ));
        let overlap = [blocks[0].clone(), blocks[0].clone()];
        assert!(matches!(
            j_p_simple_sum(&overlap, &xs),
            Err(Error::OverlappingBlocks(0, 1))
        ));
    }

    #[test]
    fn decompose_single_block_and_zero() {
        let s = BochnerSpace::build(vec![1.0, 2.0, 0.5], 2, 1.5, 3.0).unwrap();
        let f = Element::from_flat(&s, vec![1.0, -2.0, 0.0, 0.0, 0.3, 0.9]).unwrap();
        let whole = [SupportSet::full(&s)];
        assert!(j_p_decompose(&f, &whole).unwrap().max_abs_diff(&j_p(&f)) < 1e-15);
        let two = [
            SupportSet::new(&s, &[0, 1]).unwrap(),
            SupportSet::new(&s, &[2]).unwrap(),
        ];
        assert!(j_p_decompose(&f, &two).unwrap().max_abs_diff(&j_p(&f)) < 1e-14);
        assert_eq!(j_p_decompose(&Element::zeros(&s), &whole), Err(Error::ZeroElement));
    }

    #[test]
    fn restriction_report_flags_gap() {
        let s = BochnerSpace::build(vec![1.0, 1.0], 1, 2.0, 3.0).unwrap();
        let f = Element::from_flat(&s, vec![1.0, 2.0]).unwrap();
        let a = SupportSet::new(&s, &[0]).unwrap();
        let r = restriction_identities_check(&f, &a).unwrap();
        assert_eq!(r.support_residual, 0.0);
        assert!(r.scaling_residual.unwrap() < 1e-15);
        assert!(r.norms_differ && r.restriction_gap > 0.1 && r.gap_consistent);

        let h = BochnerSpace::build(vec![1.0, 1.0], 1, 2.0, 2.0).unwrap();
        let f = Element::from_flat(&h, vec![1.0, 2.0]).unwrap();
        let r = restriction_identities_check(&f, &SupportSet::new(&h, &[0]).unwrap()).unwrap();
        assert_eq!(r.restriction_gap, 0.0);
        assert!(r.gap_consistent);
    }
}
