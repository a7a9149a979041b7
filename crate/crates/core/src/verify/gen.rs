//! Random instance generators.
//!
//! Coordinates are drawn as `+-U[0.2, 2]`, so no row of a generated element
//! sits near a coordinate hyperplane where `|.|^(rho-1)` loses smoothness.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::projection::{BallSpec, RegionClass};
use crate::space::{BochnerSpace, Element, SpaceRef, SupportSet};

pub const EXPONENTS: [f64; 3] = [1.5, 2.0, 3.0];

/// Shape limits for [`space`].
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub min_atoms: usize,
    pub max_atoms: usize,
    /// Upper bound on `n d`.
    pub max_len: usize,
    pub hilbert: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            min_atoms: 1,
            max_atoms: 5,
            max_len: 15,
            hilbert: false,
        }
    }
}

impl Shape {
    pub fn oracle() -> Self {
        Self {
            max_len: crate::oracle::MAX_VARIABLES,
            ..Self::default()
        }
    }

    pub fn at_least(self, atoms: usize) -> Self {
        Self {
            min_atoms: atoms,
            ..self
        }
    }

    pub fn hilbert(self) -> Self {
        Self { hilbert: true, ..self }
    }
}

pub fn coord(rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.random_range(0.2..2.0);
    if rng.random::<bool>() {
        m
    } else {
        -m
    }
}

pub fn exponent(rng: &mut ChaCha8Rng) -> f64 {
    EXPONENTS[rng.random_range(0..EXPONENTS.len())]
}

pub fn space(rng: &mut ChaCha8Rng, shape: Shape) -> SpaceRef {
    let (dim, atoms) = loop {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(shape.min_atoms..=shape.max_atoms);
        if n * d <= shape.max_len {
            break (d, n);
        }
    };
    let (rho, p) = if shape.hilbert {
        (2.0, 2.0)
    } else {
        (exponent(rng), exponent(rng))
    };
    let weights = (0..atoms).map(|_| rng.random_range(0.2..2.0)).collect();
    BochnerSpace::build(weights, dim, rho, p).expect("generated parameters are valid")
}

pub fn vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| coord(rng)).collect()
}

pub fn element(rng: &mut ChaCha8Rng, space: &SpaceRef) -> Element {
    let values = (0..space.len()).map(|_| coord(rng)).collect();
    Element::from_flat(space, values).expect("length matches")
}

pub fn supported(rng: &mut ChaCha8Rng, a: &SupportSet) -> Element {
    element(rng, a.space()).restrict(a).expect("same space")
}

/// Unit vector in `L_p(S; X)`.
pub fn unit(rng: &mut ChaCha8Rng, space: &SpaceRef) -> Element {
    let e = element(rng, space);
    e.scale(1.0 / e.norm())
}

/// Random nonempty support; `proper` also keeps the complement nonempty.
pub fn support(rng: &mut ChaCha8Rng, space: &SpaceRef, proper: bool) -> SupportSet {
    let n = space.atoms();
    assert!(!proper || n >= 2, "a proper support needs two atoms");
    loop {
        let picked: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
        if picked.is_empty() || (proper && picked.len() == n) {
            continue;
        }
        return SupportSet::new(space, &picked).expect("indices in range");
    }
}

/// Random strong partition into between one and `n` blocks.
pub fn partition(rng: &mut ChaCha8Rng, space: &SpaceRef) -> Vec<SupportSet> {
    let n = space.atoms();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let blocks = rng.random_range(1..=n);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(blocks - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(blocks);
    let mut start = 0;
    for end in cuts.into_iter().chain([n]) {
        out.push(SupportSet::new(space, &order[start..end]).expect("nonempty block"));
        start = end;
    }
    out
}

/// An open region of the ball/cylinder geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    InBall,
    SubspaceExterior,
    OpenCylinder,
    Exterior,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::InBall,
        Region::SubspaceExterior,
        Region::OpenCylinder,
        Region::Exterior,
    ];

    pub fn off_subspace(self) -> bool {
        matches!(self, Region::OpenCylinder | Region::Exterior)
    }

    pub fn exterior(self) -> bool {
        matches!(self, Region::SubspaceExterior | Region::Exterior)
    }

    pub fn class(self) -> RegionClass {
        match self {
            Region::InBall => RegionClass::InBall,
            Region::SubspaceExterior => RegionClass::InSubspaceOutsideBall,
            Region::OpenCylinder => RegionClass::InCylinderOffSubspace,
            Region::Exterior => RegionClass::OutsideCylinderOffSubspace,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BallOptions {
    pub shape: Shape,
    pub centered: bool,
    /// Use every atom as the support.
    pub full: bool,
}

impl Default for BallOptions {
    fn default() -> Self {
        Self {
            shape: Shape::default(),
            centered: false,
            full: false,
        }
    }
}

/// A ball and a point `g` in `region` relative to it.
pub fn ball_instance(rng: &mut ChaCha8Rng, region: Region, opts: BallOptions) -> Result<(BallSpec, Element)> {
    let shape = if region.off_subspace() {
        opts.shape.at_least(opts.shape.min_atoms.max(2))
    } else {
        opts.shape
    };
    let space = space(rng, shape);
    let a = if opts.full {
        SupportSet::full(&space)
    } else {
        let proper = region.off_subspace() || (space.atoms() >= 2 && rng.random::<bool>());
        support(rng, &space, proper)
    };
    let center = if opts.centered {
        Element::zeros(&space)
    } else {
        supported(rng, &a).scale(0.5)
    };
    let radius = rng.random_range(0.5..2.0);
    let ua = supported(rng, &a);
    let target = if region.exterior() {
        radius * rng.random_range(1.2..3.0)
    } else {
        radius * rng.random_range(0.1..0.9)
    };
    let mut u = ua.scale(target / ua.norm());
    if region.off_subspace() {
        u = u.add(&element(rng, &space).restrict_complement(&a)?)?;
    }
    let g = center.add(&u)?;
    Ok((BallSpec::new(a, center, radius)?, g))
}
