//! Finite-atomic model of `L_p(S; X)` with `X = (R^d, |.|_rho)`.
//!
//! A measure space is a finite list of atoms with strictly positive weights,
//! so every "almost everywhere" statement becomes an exact per-atom
//! statement. Elements store one row of `d` reals per atom, row-major.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conjugate exponent `e / (e - 1)`.
pub fn conjugate(e: f64) -> f64 {
    e / (e - 1.0)
}

fn check_exponent(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 1.0 {
        Ok(())
    } else {
        Err(Error::BadExponent { name, value })
    }
}

/// `(sum_k |v_k|^e)^(1/e)`.
pub(crate) fn lp_norm(v: &[f64], e: f64) -> f64 {
    let s: f64 = v.iter().map(|x| x.abs().powf(e)).sum();
    if s == 0.0 {
        0.0
    } else {
        s.powf(1.0 / e)
    }
}

/// Atoms of the discretized measure space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpace {
    weights: Vec<f64>,
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NoAtoms);
        }
        for (index, &weight) in weights.iter().enumerate() {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::BadWeight { index, weight });
            }
        }
        Ok(Self { weights })
    }

    /// `n` atoms of weight `w` each.
    pub fn uniform(n: usize, w: f64) -> Result<Self> {
        Self::new(vec![w; n])
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// The `l_rho` norm on `R^d`, `1 < rho < inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerNorm {
    dim: usize,
    rho: f64,
}

impl InnerNorm {
    pub fn new(dim: usize, rho: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        check_exponent("rho", rho)?;
        Ok(Self { dim, rho })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Exponent of the dual norm on `X*`.
    pub fn rho_conjugate(&self) -> f64 {
        conjugate(self.rho)
    }

    /// `|v|_rho`.
    pub fn norm(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        lp_norm(v, self.rho)
    }

    /// `|phi|_rho'` for a functional on `X`.
    pub fn dual_norm(&self, phi: &[f64]) -> f64 {
        debug_assert_eq!(phi.len(), self.dim);
        lp_norm(phi, self.rho_conjugate())
    }

    pub fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }
}

/// Free-function form of [`InnerNorm::norm`].
pub fn norm_x(inner: &InnerNorm, v: &[f64]) -> f64 {
    inner.norm(v)
}

/// Fixes `L_p(S; X)` and, through the conjugate exponents, its dual `L_q(S; X*)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BochnerSpace {
    measure: MeasureSpace,
    inner: InnerNorm,
    p: f64,
}

/// Shared handle; elements and support sets keep one of these.
pub type SpaceRef = Arc<BochnerSpace>;

impl BochnerSpace {
    pub fn new(measure: MeasureSpace, inner: InnerNorm, p: f64) -> Result<SpaceRef> {
        check_exponent("p", p)?;
        Ok(Arc::new(Self { measure, inner, p }))
    }

    /// Convenience constructor from raw parameters.
    pub fn build(weights: Vec<f64>, dim: usize, rho: f64, p: f64) -> Result<SpaceRef> {
        Self::new(MeasureSpace::new(weights)?, InnerNorm::new(dim, rho)?, p)
    }

    pub fn measure(&self) -> &MeasureSpace {
        &self.measure
    }

    pub fn inner(&self) -> &InnerNorm {
        &self.inner
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Always derived from `p`, never stored.
    pub fn q(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn atoms(&self) -> usize {
        self.measure.atom_count()
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn len(&self) -> usize {
        self.atoms() * self.dim()
    }

    pub fn is_hilbert(&self) -> bool {
        self.p == 2.0 && self.inner.rho() == 2.0
    }

    fn mixed_norm(&self, values: &[f64], outer: f64, inner: f64) -> f64 {
        let d = self.dim();
        let s: f64 = values
            .chunks_exact(d)
            .zip(self.measure.weights())
            .map(|(row, w)| w * lp_norm(row, inner).powf(outer))
            .sum();
        if s == 0.0 {
            0.0
        } else {
            s.powf(1.0 / outer)
        }
    }
}

pub(crate) fn same_space(a: &SpaceRef, b: &SpaceRef) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn ensure_same(a: &SpaceRef, b: &SpaceRef) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

fn check_values(space: &BochnerSpace, values: &[f64]) -> Result<()> {
    if values.len() != space.len() {
        return Err(Error::Shape {
            expected: space.len(),
            got: values.len(),
        });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

macro_rules! row_storage {
    ($ty:ident) => {
        impl $ty {
            pub fn zeros(space: &SpaceRef) -> Self {
                Self {
                    space: space.clone(),
                    values: vec![0.0; space.len()],
                }
            }

            /// Row-major values, `atoms * dim` long, all finite.
            pub fn from_flat(space: &SpaceRef, values: Vec<f64>) -> Result<Self> {
                check_values(space, &values)?;
                Ok(Self {
                    space: space.clone(),
                    values,
                })
            }

            pub fn from_rows(space: &SpaceRef, rows: &[Vec<f64>]) -> Result<Self> {
                if rows.len() != space.atoms() {
                    return Err(Error::Shape {
                        expected: space.atoms(),
                        got: rows.len(),
                    });
                }
                let mut values = Vec::with_capacity(space.len());
                for row in rows {
                    space.inner().check_len(row)?;
                    values.extend_from_slice(row);
                }
                Self::from_flat(space, values)
            }

            pub(crate) fn from_raw(space: &SpaceRef, values: Vec<f64>) -> Self {
                debug_assert_eq!(values.len(), space.len());
                Self {
                    space: space.clone(),
                    values,
                }
            }

            pub fn space(&self) -> &SpaceRef {
                &self.space
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn into_values(self) -> Vec<f64> {
                self.values
            }

            pub fn row(&self, i: usize) -> &[f64] {
                let d = self.space.dim();
                &self.values[i * d..(i + 1) * d]
            }

            pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
                self.values.chunks_exact(self.space.dim())
            }

            pub fn to_rows(&self) -> Vec<Vec<f64>> {
                self.rows().map(<[f64]>::to_vec).collect()
            }

            pub fn is_zero(&self) -> bool {
                self.values.iter().all(|&v| v == 0.0)
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                ensure_same(&self.space, &other.space)?;
                Ok(self.zip_with(other, |a, b| a + b))
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                ensure_same(&self.space, &other.space)?;
                Ok(self.zip_with(other, |a, b| a - b))
            }

            pub fn scale(&self, lambda: f64) -> Self {
                Self::from_raw(&self.space, self.values.iter().map(|v| lambda * v).collect())
            }

            /// `self + lambda * other`.
            pub fn axpy(&self, lambda: f64, other: &Self) -> Result<Self> {
                ensure_same(&self.space, &other.space)?;
                Ok(self.zip_with(other, |a, b| a + lambda * b))
            }

            /// Rows in `a` copied, rows outside zeroed.
            pub fn restrict(&self, a: &SupportSet) -> Result<Self> {
                ensure_same(&self.space, &a.space)?;
                Ok(self.masked(|i| a.contains(i)))
            }

            /// Rows outside `a` copied, rows in `a` zeroed.
            pub fn restrict_complement(&self, a: &SupportSet) -> Result<Self> {
                ensure_same(&self.space, &a.space)?;
                Ok(self.masked(|i| !a.contains(i)))
            }

            /// Largest absolute entry among rows outside `a`.
            pub fn max_abs_outside(&self, a: &SupportSet) -> f64 {
                self.rows()
                    .enumerate()
                    .filter(|(i, _)| !a.contains(*i))
                    .flat_map(|(_, r)| r.iter())
                    .fold(0.0_f64, |m, v| m.max(v.abs()))
            }

            /// True iff every row outside `a` is exactly zero.
            pub fn is_supported_in(&self, a: &SupportSet) -> bool {
                self.max_abs_outside(a) == 0.0
            }

            pub fn max_abs(&self) -> f64 {
                self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.values
                    .iter()
                    .zip(&other.values)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
            }

            fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
                let values = self
                    .values
                    .iter()
                    .zip(&other.values)
                    .map(|(&a, &b)| f(a, b))
                    .collect();
                Self::from_raw(&self.space, values)
            }

            fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
                let d = self.space.dim();
                let mut values = self.values.clone();
                for (i, row) in values.chunks_exact_mut(d).enumerate() {
                    if !keep(i) {
                        row.fill(0.0);
                    }
                }
                Self::from_raw(&self.space, values)
            }
        }
    };
}

/// An `f` in `L_p(S; X)`: row `i` is `f(s_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    space: SpaceRef,
    values: Vec<f64>,
}

/// A `phi` in `L_q(S; X*)`, same shape as [`Element`].
#[derive(Clone, Debug, PartialEq)]
pub struct DualElement {
    space: SpaceRef,
    values: Vec<f64>,
}

row_storage!(Element);
row_storage!(DualElement);

impl Element {
    /// `(sum_i mu_i |f_i|_rho^p)^(1/p)`.
    pub fn norm(&self) -> f64 {
        let s = &self.space;
        s.mixed_norm(&self.values, s.p(), s.inner().rho())
    }

    /// `1_A (x) x`: the vector `x` on every atom of `a`, zero elsewhere.
    pub fn indicator(a: &SupportSet, x: &[f64]) -> Result<Self> {
        a.space.inner().check_len(x)?;
        let mut values = vec![0.0; a.space.len()];
        let d = a.space.dim();
        for i in a.indices() {
            values[i * d..(i + 1) * d].copy_from_slice(x);
        }
        Self::from_flat(&a.space, values)
    }

    /// Assemble `sum_i 1_{A_i} (x) x_i` over pairwise disjoint blocks.
    pub fn simple(blocks: &[SupportSet], xs: &[Vec<f64>]) -> Result<Self> {
        check_blocks(blocks, xs)?;
        let space = &blocks[0].space;
        let mut out = Self::zeros(space);
        for (block, x) in blocks.iter().zip(xs) {
            out = out.add(&Self::indicator(block, x)?)?;
        }
        Ok(out)
    }
}

impl DualElement {
    /// `(sum_i mu_i |phi_i|_rho'^q)^(1/q)`.
    pub fn norm(&self) -> f64 {
        let s = &self.space;
        s.mixed_norm(&self.values, s.q(), s.inner().rho_conjugate())
    }

    /// `<phi, f> = sum_i mu_i <phi_i, f_i>`.
    pub fn pairing(&self, f: &Element) -> Result<f64> {
        ensure_same(&self.space, &f.space)?;
        let w = self.space.measure().weights();
        Ok(self
            .rows()
            .zip(f.rows())
            .zip(w)
            .map(|((a, b), mu)| mu * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum())
    }
}

pub fn norm_lp(f: &Element) -> f64 {
    f.norm()
}

pub fn norm_lq(phi: &DualElement) -> f64 {
    phi.norm()
}

pub fn pairing(phi: &DualElement, f: &Element) -> Result<f64> {
    phi.pairing(f)
}

pub fn restrict(f: &Element, a: &SupportSet) -> Result<Element> {
    f.restrict(a)
}

/// `mu(A)^(-1/p) (1_A (x) x)`, the isometric copy of `x` in `L_p(S; X)`.
pub fn simple_embed(a: &SupportSet, x: &[f64]) -> Result<Element> {
    let c = a.measure().powf(-1.0 / a.space.p());
    Ok(Element::indicator(a, x)?.scale(c))
}

/// A nonempty set of atom indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSet {
    space: SpaceRef,
    mask: Vec<bool>,
}

impl SupportSet {
    /// Duplicate indices are tolerated; empty or out-of-range ones are not.
    pub fn new(space: &SpaceRef, indices: &[usize]) -> Result<Self> {
        let n = space.atoms();
        let mut mask = vec![false; n];
        for &index in indices {
            if index >= n {
                return Err(Error::AtomIndex { index, atoms: n });
            }
            mask[index] = true;
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::EmptySupport);
        }
        Ok(Self {
            space: space.clone(),
            mask,
        })
    }

    pub fn full(space: &SpaceRef) -> Self {
        Self {
            space: space.clone(),
            mask: vec![true; space.atoms()],
        }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.indices().collect()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the complement has measure zero, i.e. is empty.
    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    /// `mu(A)`.
    pub fn measure(&self) -> f64 {
        self.indices().map(|i| self.space.measure().weight(i)).sum()
    }

    /// `S \ A`, or `None` when it is empty.
    pub fn complement(&self) -> Option<SupportSet> {
        if self.is_full() {
            return None;
        }
        Some(Self {
            space: self.space.clone(),
            mask: self.mask.iter().map(|m| !m).collect(),
        })
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !(a & b))
    }
}

/// Pairwise disjoint blocks over one space with one vector per block.
pub(crate) fn check_blocks(blocks: &[SupportSet], xs: &[Vec<f64>]) -> Result<()> {
    let Some(first) = blocks.first() else {
        return Err(Error::EmptySupport);
    };
    if xs.len() != blocks.len() {
        return Err(Error::BlockCount {
            blocks: blocks.len(),
            vectors: xs.len(),
        });
    }
    for x in xs {
        first.space.inner().check_len(x)?;
    }
    check_disjoint(blocks)
}

pub(crate) fn check_disjoint(blocks: &[SupportSet]) -> Result<()> {
    for (i, a) in blocks.iter().enumerate() {
        ensure_same(&a.space, &blocks[0].space)?;
        for (j, b) in blocks.iter().enumerate().skip(i + 1) {
            if !a.is_disjoint(b) {
                return Err(Error::OverlappingBlocks(i, j));
            }
        }
    }
    Ok(())
}

/// Disjoint nonempty blocks covering every atom. Positive measure of each block
/// is automatic since every atom carries positive weight.
pub fn check_strong_partition(blocks: &[SupportSet]) -> Result<()> {
    let Some(first) = blocks.first() else {
        return Err(Error::EmptySupport);
    };
    check_disjoint(blocks)?;
    for i in 0..first.space.atoms() {
        if !blocks.iter().any(|b| b.contains(i)) {
            return Err(Error::IncompleteCover(i));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(weights: Vec<f64>, dim: usize, rho: f64, p: f64) -> SpaceRef {
        BochnerSpace::build(weights, dim, rho, p).unwrap()
    }

    #[test]
    fn euclidean_norm() {
        let x = InnerNorm::new(2, 2.0).unwrap();
        assert_eq!(x.norm(&[3.0, 4.0]), 5.0);
        assert_eq!(norm_x(&x, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn rho_three_norm_of_ones() {
        // 1 + 1 = 2, cube root of 2.
        let x = InnerNorm::new(2, 3.0).unwrap();
        let expected = 1.259_921_049_894_873_2_f64;
        assert!((x.norm(&[1.0, 1.0]) - expected).abs() < 1e-15);
    }

    #[test]
    fn single_atom_norm_is_inner_norm() {
        let s = space(vec![1.0], 2, 3.0, 1.7);
        let f = Element::from_flat(&s, vec![0.3, -1.2]).unwrap();
        assert!((f.norm() - s.inner().norm(&[0.3, -1.2])).abs() < 1e-15);
        assert_eq!(Element::zeros(&s).norm(), 0.0);
    }

    #[test]
    fn two_atom_norm() {
        let s = space(vec![1.0, 1.0], 1, 2.0, 3.0);
        let f = Element::from_flat(&s, vec![1.0, 1.0]).unwrap();
        assert!((f.norm() - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn plain_dot_product_pairing() {
        let s = space(vec![1.0], 2, 2.0, 2.0);
        let phi = DualElement::from_flat(&s, vec![1.0, 2.0]).unwrap();
        let f = Element::from_flat(&s, vec![3.0, 4.0]).unwrap();
        assert_eq!(phi.pairing(&f).unwrap(), 11.0);
        assert_eq!(DualElement::zeros(&s).pairing(&f).unwrap(), 0.0);
    }

    #[test]
    fn restriction_edges() {
        let s = space(vec![1.0, 0.5, 2.0], 2, 1.5, 2.5);
        let f = Element::from_flat(&s, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(f.restrict(&SupportSet::full(&s)).unwrap(), f);
        let a = SupportSet::new(&s, &[1]).unwrap();
        let outside = f.restrict_complement(&a).unwrap();
        assert!(outside.restrict(&a).unwrap().is_zero());
        assert_eq!(f.restrict(&a).unwrap().values(), &[0.0, 0.0, 3.0, 4.0, 0.0, 0.0]);
    }

    #[test]
    fn embed_with_measure_eight() {
        let s = space(vec![3.0, 5.0, 1.0], 1, 2.0, 3.0);
        let a = SupportSet::new(&s, &[0, 1]).unwrap();
        assert_eq!(a.measure(), 8.0);
        let e = simple_embed(&a, &[2.0]).unwrap();
        assert!((e.row(0)[0] - 1.0).abs() < 1e-15);
        assert!((e.row(1)[0] - 1.0).abs() < 1e-15);
        assert_eq!(e.row(2)[0], 0.0);
        assert!((e.norm() - 2.0).abs() < 1e-14);
        assert!(simple_embed(&a, &[0.0]).unwrap().is_zero());
    }

    #[test]
    fn embed_unit_measure_is_indicator() {
        let s = space(vec![0.25, 0.75, 2.0], 2, 3.0, 1.5);
        let a = SupportSet::new(&s, &[0, 1]).unwrap();
        let e = simple_embed(&a, &[1.5, -2.0]).unwrap();
        assert_eq!(e, Element::indicator(&a, &[1.5, -2.0]).unwrap());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(MeasureSpace::new(vec![]), Err(Error::NoAtoms));
        assert!(matches!(
            MeasureSpace::new(vec![1.0, 0.0]),
            Err(Error::BadWeight { index: 1, .. })
        ));
        assert!(InnerNorm::new(2, 1.0).is_err());
        assert!(InnerNorm::new(0, 2.0).is_err());
        assert!(BochnerSpace::build(vec![1.0], 1, 2.0, f64::INFINITY).is_err());
        let s = space(vec![1.0, 1.0], 1, 2.0, 2.0);
        assert_eq!(SupportSet::new(&s, &[]), Err(Error::EmptySupport));
        assert!(SupportSet::new(&s, &[2]).is_err());
        assert!(Element::from_flat(&s, vec![1.0]).is_err());
        assert_eq!(Element::from_flat(&s, vec![1.0, f64::NAN]), Err(Error::NonFinite(1)));
    }

    #[test]
    fn cross_space_is_an_error() {
        let s1 = space(vec![1.0, 1.0], 1, 2.0, 2.0);
        let s2 = space(vec![1.0, 1.0], 1, 2.0, 3.0);
        let f = Element::zeros(&s1);
        let g = Element::zeros(&s2);
        assert_eq!(f.add(&g), Err(Error::SpaceMismatch));
        // Structurally identical spaces are the same space.
        let s3 = space(vec![1.0, 1.0], 1, 2.0, 2.0);
        assert!(f.add(&Element::zeros(&s3)).is_ok());
    }

    #[test]
    fn partitions() {
        let s = space(vec![1.0; 4], 1, 2.0, 2.0);
        let a = SupportSet::new(&s, &[0, 1]).unwrap();
        let b = SupportSet::new(&s, &[2]).unwrap();
        let c = SupportSet::new(&s, &[3]).unwrap();
        assert!(check_strong_partition(&[a.clone(), b.clone(), c.clone()]).is_ok());
        assert_eq!(
            check_strong_partition(&[a.clone(), b.clone()]),
            Err(Error::IncompleteCover(3))
        );
        let ab = SupportSet::new(&s, &[1, 2]).unwrap();
        assert_eq!(
            check_strong_partition(&[a.clone(), ab, c]),
            Err(Error::OverlappingBlocks(0, 1))
        );
        assert_eq!(a.complement().unwrap().to_indices(), vec![2, 3]);
        assert!(SupportSet::full(&s).complement().is_none());
    }
}
