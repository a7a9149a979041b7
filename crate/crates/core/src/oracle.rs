//! Brute-force references for the closed forms.
//!
//! [`oracle_project`] minimizes the distance directly with a logarithmic
//! barrier and audits the result by random sampling; [`fd_derivative`]
//! differentiates any projector by extrapolated one-sided quotients. The norm,
//! its gradient and the feasibility test are written out here on flat arrays
//! and do not go through the projection or duality modules.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::projection::{ClassifyTol, SetSpec, Side};
use crate::richardson::{extrapolate, StepSchedule};
use crate::space::{Element, SpaceRef};

/// Largest number of free coordinates the barrier solver accepts.
pub const MAX_VARIABLES: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    pub barrier_weights: Vec<f64>,
    pub descent_tol: f64,
    /// Newton iterations allowed per barrier weight.
    pub max_iters: usize,
    pub audit_samples: usize,
    pub rng_seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            barrier_weights: (0..=12).map(|k| 10f64.powi(-k)).collect(),
            descent_tol: 1e-8,
            max_iters: 400,
            audit_samples: 10_000,
            rng_seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let w = &self.barrier_weights;
        if w.is_empty() || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::BadOracleConfig("barrier weights must be positive"));
        }
        if w.windows(2).any(|p| p[1] >= p[0]) {
            return Err(Error::BadOracleConfig("barrier weights must strictly decrease"));
        }
        if *w.last().expect("nonempty") > 1e-8 {
            return Err(Error::BadOracleConfig("last barrier weight must be at most 1e-8"));
        }
        if !(self.descent_tol.is_finite() && self.descent_tol > 0.0) {
            return Err(Error::BadOracleConfig("descent_tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::BadOracleConfig("max_iters must be positive"));
        }
        if self.audit_samples < 1000 {
            return Err(Error::BadOracleConfig("audit_samples must be at least 1000"));
        }
        Ok(())
    }
}

/// Flat description of the feasible set.
struct Geometry {
    weights: Vec<f64>,
    dim: usize,
    rho: f64,
    p: f64,
    in_a: Vec<bool>,
    /// Atoms carrying free coordinates, in order.
    free: Vec<usize>,
    center: Vec<f64>,
    radius: Option<f64>,
}

fn row_pow(row: &[f64], rho: f64, p: f64) -> f64 {
    finish_pow(row.iter().copied(), rho, p)
}

/// `|a - b|^p` for one row.
fn row_pow_diff(a: &[f64], b: &[f64], rho: f64, p: f64) -> f64 {
    finish_pow(a.iter().zip(b).map(|(x, y)| x - y), rho, p)
}

fn finish_pow(row: impl Iterator<Item = f64>, rho: f64, p: f64) -> f64 {
    let s: f64 = if rho == 2.0 {
        row.map(|x| x * x).sum()
    } else {
        row.map(|x| x.abs().powf(rho)).sum()
    };
    if p == rho {
        s
    } else {
        s.powf(p / rho)
    }
}

impl Geometry {
    fn new(set: &SetSpec) -> Self {
        let space = set.space();
        let n = space.atoms();
        let a = set.support();
        let in_a: Vec<bool> = (0..n).map(|i| a.contains(i)).collect();
        let (free, center, radius) = match set {
            SetSpec::Subspace(_) => (a.to_indices(), vec![0.0; space.len()], None),
            SetSpec::Ball(b) => (a.to_indices(), b.center().values().to_vec(), Some(b.radius())),
            SetSpec::Cylinder(c) => (
                (0..n).collect(),
                c.base().center().values().to_vec(),
                Some(c.base().radius()),
            ),
        };
        Self {
            weights: space.measure().weights().to_vec(),
            dim: space.dim(),
            rho: space.inner().rho(),
            p: space.p(),
            in_a,
            free,
            center,
            radius,
        }
    }

    fn vars(&self) -> usize {
        self.free.len() * self.dim
    }

    fn embed(&self, z: &[f64], len: usize) -> Vec<f64> {
        let mut f = vec![0.0; len];
        for (j, &i) in self.free.iter().enumerate() {
            f[i * self.dim..(i + 1) * self.dim].copy_from_slice(&z[j * self.dim..(j + 1) * self.dim]);
        }
        f
    }

    fn extract(&self, f: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .flat_map(|&i| f[i * self.dim..(i + 1) * self.dim].iter().copied())
            .collect()
    }

    /// `sum_i mu_i |e_i|^p` over the atoms selected by `keep`.
    fn mass(&self, e: &[f64], keep: impl Fn(usize) -> bool) -> f64 {
        (0..self.weights.len())
            .filter(|&i| keep(i))
            .map(|i| self.weights[i] * row_pow(&e[i * self.dim..(i + 1) * self.dim], self.rho, self.p))
            .sum()
    }

    /// Gradient of `sum_i mu_i |e_i|^p` with respect to the rows of `e`.
    fn mass_grad(&self, e: &[f64], i: usize, out: &mut [f64]) {
        let row = &e[i * self.dim..(i + 1) * self.dim];
        let n = row_pow(row, self.rho, 1.0);
        if n == 0.0 {
            out.iter_mut().for_each(|x| *x = 0.0);
            return;
        }
        let c = self.weights[i] * self.p * n.powf(self.p - self.rho);
        for (o, x) in out.iter_mut().zip(row) {
            *o = c * x.signum() * x.abs().powf(self.rho - 1.0);
        }
    }

    fn objective_p(&self, g: &[f64], f: &[f64]) -> f64 {
        let d = self.dim;
        (0..self.weights.len())
            .map(|i| self.weights[i] * row_pow_diff(&g[i * d..(i + 1) * d], &f[i * d..(i + 1) * d], self.rho, self.p))
            .sum()
    }

    /// Constraint value `|(f - v)_A|^p - r^p`, negative strictly inside.
    fn constraint(&self, f: &[f64]) -> Option<f64> {
        let r = self.radius?;
        let w: Vec<f64> = f.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        Some(self.mass(&w, |i| self.in_a[i]) - r.powf(self.p))
    }

    /// `|(f - v)_A|` and the largest entry on rows that must vanish.
    fn violation(&self, f: &[f64]) -> (f64, f64) {
        let off = match self.radius.is_some() && self.free.len() == self.weights.len() {
            true => 0.0,
            false => (0..self.weights.len())
                .filter(|&i| !self.in_a[i])
                .flat_map(|i| f[i * self.dim..(i + 1) * self.dim].iter())
                .fold(0.0_f64, |m, x| m.max(x.abs())),
        };
        let radial = match self.radius {
            None => 0.0,
            Some(r) => {
                let d = self.dim;
                let m: f64 = (0..self.weights.len())
                    .filter(|&i| self.in_a[i])
                    .map(|i| {
                        self.weights[i]
                            * row_pow_diff(
                                &f[i * d..(i + 1) * d],
                                &self.center[i * d..(i + 1) * d],
                                self.rho,
                                self.p,
                            )
                    })
                    .sum();
                (m.powf(1.0 / self.p) - r).max(0.0)
            }
        };
        (radial, off)
    }

    /// The `L_q` element `J(e)` as a flat array, zero when `e = 0`.
    fn dual_vector(&self, e: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; e.len()];
        let s = self.mass(e, |_| true);
        if s == 0.0 {
            return out;
        }
        let scale = s.powf(2.0 / self.p - 1.0) / self.p;
        for i in 0..self.weights.len() {
            let row = &mut out[i * self.dim..(i + 1) * self.dim];
            self.mass_grad(e, i, row);
            row.iter_mut().for_each(|x| *x *= scale);
        }
        out
    }
}

/// Barrier objective `|g - f|^2 - kappa log(-C(f))` on the free coordinates.
struct Barrier<'a> {
    geo: &'a Geometry,
    g: &'a [f64],
    kappa: f64,
}

impl Barrier<'_> {
    fn feasible(&self, z: &[f64]) -> bool {
        let f = self.geo.embed(z, self.g.len());
        self.geo.constraint(&f).is_none_or(|c| c < 0.0)
    }

    /// Gradients of `|g - f|^2` and of the constraint, plus the constraint value.
    fn parts(&self, z: &[f64]) -> (Vec<f64>, Option<(f64, Vec<f64>)>) {
        let geo = self.geo;
        let d = geo.dim;
        let f = geo.embed(z, self.g.len());
        let e: Vec<f64> = self.g.iter().zip(&f).map(|(a, b)| a - b).collect();
        let s = geo.mass(&e, |_| true);
        let outer = if s == 0.0 {
            0.0
        } else {
            (2.0 / geo.p) * s.powf(2.0 / geo.p - 1.0)
        };
        let mut grad = vec![0.0; z.len()];
        let mut buf = vec![0.0; d];
        for (j, &i) in geo.free.iter().enumerate() {
            geo.mass_grad(&e, i, &mut buf);
            for k in 0..d {
                grad[j * d + k] = -outer * buf[k];
            }
        }
        let constraint = geo.constraint(&f).map(|c| {
            let w: Vec<f64> = f.iter().zip(&geo.center).map(|(a, b)| a - b).collect();
            let mut gc = vec![0.0; z.len()];
            for (j, &i) in geo.free.iter().enumerate() {
                if geo.in_a[i] {
                    geo.mass_grad(&w, i, &mut buf);
                    gc[j * d..(j + 1) * d].copy_from_slice(&buf);
                }
            }
            (c, gc)
        });
        (grad, constraint)
    }

    /// Per free row, the smallest nonzero of `|g - f|_inf` and `|f - v|_inf`.
    fn row_scales(&self, z: &[f64]) -> Vec<f64> {
        let geo = self.geo;
        let d = geo.dim;
        geo.free
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                let zr = &z[j * d..(j + 1) * d];
                let e = zr
                    .iter()
                    .zip(&self.g[i * d..(i + 1) * d])
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                let w = zr
                    .iter()
                    .zip(&geo.center[i * d..(i + 1) * d])
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                [e, w].into_iter().filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let (mut grad, constraint) = self.parts(z);
        if let Some((c, gc)) = constraint {
            for (g, dc) in grad.iter_mut().zip(&gc) {
                *g += self.kappa * dc / -c;
            }
        }
        grad
    }

    /// Central differences of the objective and constraint gradients, which
    /// stay smooth across the barrier's edge, combined with the exact barrier
    /// terms `kappa (grad C grad C^T / C^2 + hess C / -C)`.
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let m = z.len();
        let mut hf = DMatrix::zeros(m, m);
        let mut hc = DMatrix::zeros(m, m);
        let residual = self.row_scales(z);
        let mut zp = z.to_vec();
        for j in 0..m {
            // Probe well below the row's residual so kinks at zero are not straddled.
            let delta = (1e-6 * (1.0 + z[j].abs()))
                .min(1e-3 * residual[j / self.geo.dim])
                .max(1e-15 * (1.0 + z[j].abs()));
            zp[j] = z[j] + delta;
            let (fu, cu) = self.parts(&zp);
            zp[j] = z[j] - delta;
            let (fd, cd) = self.parts(&zp);
            zp[j] = z[j];
            for i in 0..m {
                hf[(i, j)] = (fu[i] - fd[i]) / (2.0 * delta);
            }
            if let (Some((_, gu)), Some((_, gd))) = (cu, cd) {
                for i in 0..m {
                    hc[(i, j)] = (gu[i] - gd[i]) / (2.0 * delta);
                }
            }
        }
        let mut h = (&hf + hf.transpose()) * 0.5;
        if let (_, Some((c, gc))) = self.parts(z) {
            let gc = DVector::from_column_slice(&gc);
            h += (&gc * gc.transpose()) * (self.kappa / (c * c));
            h += (&hc + hc.transpose()) * (0.5 * self.kappa / -c);
        }
        h
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn step(z: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    z.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

/// Solves `(H + lambda I) x = -grad` with the smallest shift that factors.
fn newton_direction(h: DMatrix<f64>, grad: &[f64]) -> Option<Vec<f64>> {
    let m = grad.len();
    let rhs = -DVector::from_column_slice(grad);
    let diag = (0..m).fold(0.0_f64, |a, i| a.max(h[(i, i)].abs())).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..40 {
        let shifted = &h + DMatrix::identity(m, m) * shift;
        if let Some(ch) = shifted.cholesky() {
            return Some(ch.solve(&rhs).as_slice().to_vec());
        }
        shift = if shift == 0.0 { 1e-12 * diag } else { shift * 10.0 };
    }
    None
}

/// Exact line search along `d` by bisection on the sign of the directional
/// derivative. An infeasible trial point counts as overshooting.
fn line_search(b: &Barrier, z: &[f64], d: &[f64]) -> f64 {
    let slope = |a: f64| {
        let t = step(z, a, d);
        if b.feasible(&t) {
            dot(&b.gradient(&t), d)
        } else {
            f64::INFINITY
        }
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut grow = 0;
    while slope(hi) < 0.0 && grow < 30 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
    }
    if grow == 30 {
        return hi;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// One cyclic pass of exact line searches along the coordinate axes. Newton
/// steps share a single step length and stall when one coordinate sits at a
/// kink of `|.|^(rho-1)` or `|.|^(p-1)`; this pass settles such coordinates.
fn coordinate_sweep(b: &Barrier, z: &mut Vec<f64>) {
    for j in 0..z.len() {
        let g = b.gradient(z)[j];
        if g == 0.0 {
            continue;
        }
        let mut d = vec![0.0; z.len()];
        d[j] = -g.signum() * 1e-3 * (1.0 + z[j].abs());
        let alpha = line_search(b, z, &d);
        *z = step(z, alpha, &d);
    }
}

/// Runs damped Newton on one barrier weight; returns iterations used, or
/// `None` if the stage hit `max_iters` without settling.
fn minimize_stage(b: &Barrier, z: &mut Vec<f64>, max_iters: usize) -> Option<usize> {
    for it in 0..max_iters {
        let grad = b.gradient(z);
        let gmax = grad.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if gmax == 0.0 {
            return Some(it);
        }
        let mut d = newton_direction(b.hessian(z), &grad).unwrap_or_else(|| grad.iter().map(|x| -x).collect());
        if !(dot(&grad, &d) < 0.0) || d.iter().any(|x| !x.is_finite()) {
            d = grad.iter().map(|x| -x).collect();
        }
        let alpha = line_search(b, z, &d);
        let mut next = step(z, alpha, &d);
        if it >= 2 {
            coordinate_sweep(b, &mut next);
        }
        let moved = next
            .iter()
            .zip(z.iter())
            .fold(0.0_f64, |m, (a, c)| m.max((a - c).abs()));
        let size = z.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        *z = next;
        if moved <= 1e-13 * size {
            return Some(it + 1);
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub samples: usize,
    /// Samples that turned out feasible and were scored.
    pub evaluated: usize,
    /// Largest `F(candidate) - F(z)` over scored samples, `F = |g - .|^p`.
    pub best_improvement: f64,
    /// Smallest `<J(g - candidate), candidate - z>` over scored samples.
    pub min_variational: f64,
    /// Excess of `|(candidate - v)_A|` over the radius.
    pub radial_violation: f64,
    /// Largest entry of the candidate on rows that must vanish.
    pub support_violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub minimizer: Element,
    /// `|g - minimizer|^p`.
    pub objective: f64,
    pub audit_pass: bool,
    pub audit: AuditReport,
    pub iterations: usize,
}

/// Writes a random feasible point near `anchor` into `f`.
fn random_feasible_into(geo: &Geometry, anchor: &[f64], spread: f64, rng: &mut ChaCha8Rng, f: &mut [f64]) {
    let d = geo.dim;
    f.iter_mut().for_each(|x| *x = 0.0);
    match geo.radius {
        None => {
            for &i in &geo.free {
                for j in i * d..(i + 1) * d {
                    f[j] = anchor[j] + spread * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
        Some(r) => {
            let cylinder = geo.free.len() == geo.weights.len();
            for (i, &inside) in geo.in_a.iter().enumerate() {
                if inside {
                    for x in &mut f[i * d..(i + 1) * d] {
                        *x = rng.sample::<f64, _>(StandardNormal);
                    }
                } else if cylinder {
                    for j in i * d..(i + 1) * d {
                        f[j] = anchor[j] + spread * rng.sample::<f64, _>(StandardNormal);
                    }
                }
            }
            let n = geo.mass(f, |i| geo.in_a[i]).powf(1.0 / geo.p);
            let scale = if n > 0.0 {
                r * rng.random::<f64>().sqrt() / n
            } else {
                0.0
            };
            for (i, &inside) in geo.in_a.iter().enumerate() {
                if inside {
                    for j in i * d..(i + 1) * d {
                        f[j] = geo.center[j] + scale * f[j];
                    }
                }
            }
        }
    }
}

fn is_feasible(geo: &Geometry, f: &[f64]) -> bool {
    let (radial, off) = geo.violation(f);
    let r = geo.radius.unwrap_or(0.0);
    radial <= 1e-12 * (1.0 + r) && off == 0.0
}

/// Scores `candidate` against random feasible points: global samples, convex
/// combinations towards the candidate, and small perturbations of it.
pub fn audit(g: &Element, set: &SetSpec, candidate: &Element, samples: usize, seed: u64) -> Result<AuditReport> {
    if !crate::space::same_space(g.space(), set.space()) || !crate::space::same_space(candidate.space(), set.space()) {
        return Err(Error::SpaceMismatch);
    }
    let geo = Geometry::new(set);
    let (gv, cv) = (g.values(), candidate.values());
    let f_cand = geo.objective_p(gv, cv);
    let e: Vec<f64> = gv.iter().zip(cv).map(|(a, b)| a - b).collect();
    let je = geo.dual_vector(&e);
    let size = 1.0 + gv.iter().chain(cv).fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut evaluated, mut best, mut min_vi) = (0, f64::NEG_INFINITY, f64::INFINITY);
    let (mut z, mut y) = (vec![0.0; cv.len()], vec![0.0; cv.len()]);
    for s in 0..samples {
        match s % 3 {
            0 => random_feasible_into(&geo, gv, size, &mut rng, &mut z),
            1 => {
                random_feasible_into(&geo, cv, size, &mut rng, &mut y);
                let lambda = rng.random::<f64>().powi(3);
                for ((z, c), y) in z.iter_mut().zip(cv).zip(&y) {
                    *z = (1.0 - lambda) * c + lambda * y;
                }
            }
            _ => {
                let eps = size * 10f64.powf(-8.0 + 7.0 * rng.random::<f64>());
                for (z, c) in z.iter_mut().zip(cv) {
                    *z = c + eps * rng.sample::<f64, _>(StandardNormal);
                }
                for i in (0..geo.weights.len()).filter(|i| !geo.free.contains(i)) {
                    z[i * geo.dim..(i + 1) * geo.dim].iter_mut().for_each(|x| *x = 0.0);
                }
            }
        }
        if !is_feasible(&geo, &z) {
            continue;
        }
        evaluated += 1;
        best = best.max(f_cand - geo.objective_p(gv, &z));
        let pairing: f64 = je.iter().zip(cv.iter().zip(&z)).map(|(j, (c, z))| j * (c - z)).sum();
        min_vi = min_vi.min(pairing);
    }
    let (radial_violation, support_violation) = geo.violation(cv);
    Ok(AuditReport {
        samples,
        evaluated,
        best_improvement: best,
        min_variational: min_vi,
        radial_violation,
        support_violation,
    })
}

/// Minimizes `|g - f|` over the feasible set and audits the minimizer.
///
/// The barrier path minimizes `|g - f|^2`, which has the same minimizer as
/// `|g - f|^p` and better conditioning when the two differ.
pub fn oracle_project(g: &Element, set: &SetSpec, cfg: &OracleConfig) -> Result<OracleResult> {
    cfg.validate()?;
    if !crate::space::same_space(g.space(), set.space()) {
        return Err(Error::SpaceMismatch);
    }
    let geo = Geometry::new(set);
    let m = geo.vars();
    if m > MAX_VARIABLES {
        return Err(Error::OracleTooLarge {
            limit: MAX_VARIABLES,
            got: m,
        });
    }
    let gv = g.values();
    let mut z = match geo.radius {
        Some(_) => geo.extract(&geo.center),
        None => vec![0.0; m],
    };
    let gap: Vec<f64> = gv.iter().zip(&geo.center).map(|(a, b)| a - b).collect();
    let scale = 1.0 + geo.mass(&gap, |_| true).powf(2.0 / geo.p);
    let weights: &[f64] = if geo.radius.is_some() {
        &cfg.barrier_weights
    } else {
        &[0.0]
    };
    let mut iterations = 0;
    for (stage, &w) in weights.iter().enumerate() {
        let b = Barrier {
            geo: &geo,
            g: gv,
            kappa: w * scale,
        };
        match minimize_stage(&b, &mut z, cfg.max_iters) {
            Some(it) => iterations += it,
            None if stage + 1 == weights.len() => {
                return Err(Error::OracleDidNotConverge {
                    iterations: iterations + cfg.max_iters,
                });
            }
            None => iterations += cfg.max_iters,
        }
    }
    let f = geo.embed(&z, gv.len());
    let objective = geo.objective_p(gv, &f);
    let minimizer = Element::from_flat(g.space(), f)?;
    let report = audit(g, set, &minimizer, cfg.audit_samples, cfg.rng_seed)?;
    Ok(OracleResult {
        audit_pass: report.best_improvement <= cfg.descent_tol,
        minimizer,
        objective,
        audit: report,
        iterations,
    })
}

/// `|g - f|^p`, evaluated by the oracle's own routines.
pub fn objective(g: &Element, f: &Element) -> Result<f64> {
    if !crate::space::same_space(g.space(), f.space()) {
        return Err(Error::SpaceMismatch);
    }
    let space: &SpaceRef = g.space();
    let e: Vec<f64> = g.values().iter().zip(f.values()).map(|(a, b)| a - b).collect();
    Ok(e.chunks_exact(space.dim())
        .zip(space.measure().weights())
        .map(|(row, w)| w * row_pow(row, space.inner().rho(), space.p()))
        .sum())
}

/// Output of a projector evaluation inside [`fd_derivative`].
#[derive(Clone, Debug, PartialEq)]
pub enum Projected {
    Value(Element),
    NotCovered,
}

pub trait Projector: Sync {
    fn apply(&self, g: &Element) -> Result<Projected>;
}

pub struct Identity;

impl Projector for Identity {
    fn apply(&self, g: &Element) -> Result<Projected> {
        Ok(Projected::Value(g.clone()))
    }
}

impl Projector for SetSpec {
    fn apply(&self, g: &Element) -> Result<Projected> {
        self.project(g).map(Projected::Value)
    }
}

/// A projector that refuses points on a different side of the sphere than the base point.
pub struct RegionLocked<'a> {
    pub set: &'a SetSpec,
    pub side: Option<Side>,
    pub tol: ClassifyTol,
}

impl<'a> RegionLocked<'a> {
    pub fn at(set: &'a SetSpec, g: &Element, tol: ClassifyTol) -> Result<Self> {
        let side = set.classify(g, tol)?.map(|c| c.side());
        Ok(Self { set, side, tol })
    }
}

impl Projector for RegionLocked<'_> {
    fn apply(&self, g: &Element) -> Result<Projected> {
        let side = self.set.classify(g, self.tol)?.map(|c| c.side());
        if side != self.side || side == Some(Side::Boundary) {
            return Ok(Projected::NotCovered);
        }
        self.set.apply(g)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdEstimate {
    pub estimate: Element,
    pub error_bound: f64,
}

/// Extrapolated `lim_{t -> 0+} (P(g + t h) - P(g)) / t`.
pub fn fd_derivative(
    projector: &dyn Projector,
    g: &Element,
    h: &Element,
    schedule: &StepSchedule,
) -> Result<FdEstimate> {
    if h.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let eval = |x: &Element, t: f64| match projector.apply(x)? {
        Projected::Value(v) => Ok(v),
        Projected::NotCovered => Err(Error::NotCovered { step: t }),
    };
    let base = eval(g, 0.0)?;
    let out = extrapolate(schedule, |t| {
        let moved = eval(&g.axpy(t, h)?, t)?;
        Ok(moved.sub(&base)?.scale(1.0 / t).into_values())
    })?;
    let increment = Element::from_flat(g.space(), out.increment)?.norm();
    let floor = 16.0 * f64::EPSILON * (1.0 + base.norm() + g.norm()) / schedule.finest();
    Ok(FdEstimate {
        estimate: Element::from_flat(g.space(), out.estimate)?,
        error_bound: increment.max(floor),
    })
}

/// Radius around `g` on which the projection is smooth: the distance to the
/// sphere and, for `rho < 2`, to the nearest coordinate hyperplane of `g_A - v_A`.
pub fn smooth_radius(set: &SetSpec, g: &Element) -> Result<f64> {
    let mut dist = set.boundary_distance(g)?.min(1.0 + g.norm());
    if let Some(b) = set.ball() {
        if g.space().inner().rho() < 2.0 {
            let u = g.sub(b.center())?.restrict(b.support())?;
            let nearest = u
                .values()
                .iter()
                .filter(|v| **v != 0.0)
                .fold(f64::INFINITY, |m, v| m.min(v.abs()));
            dist = dist.min(nearest);
        }
    }
    Ok(dist)
}

/// Schedule whose first step is `1e-2` of [`smooth_radius`].
pub fn fd_schedule(set: &SetSpec, g: &Element, h: &Element) -> Result<StepSchedule> {
    Ok(StepSchedule::with_initial(1e-2 * smooth_radius(set, g)? / h.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{BallSpec, CylinderSpec};
    use crate::space::{BochnerSpace, SupportSet};

    fn two_atom() -> (SpaceRef, SupportSet) {
        let s = BochnerSpace::build(vec![1.0, 1.0], 1, 2.0, 2.0).unwrap();
        let a = SupportSet::new(&s, &[0]).unwrap();
        (s, a)
    }

    #[test]
    fn config_validation() {
        assert!(OracleConfig::default().validate().is_ok());
        let mut c = OracleConfig::default();
        c.audit_samples = 999;
        assert!(c.validate().is_err());
        let mut c = OracleConfig::default();
        c.barrier_weights = vec![1.0, 1e-4];
        assert!(c.validate().is_err());
        let mut c = OracleConfig::default();
        c.barrier_weights = vec![1e-9, 1e-9];
        assert!(c.validate().is_err());
    }

    #[test]
    fn worked_ball_instance() {
        let (s, a) = two_atom();
        let g = Element::from_flat(&s, vec![2.0, 3.0]).unwrap();
        let set = SetSpec::Ball(BallSpec::centered(a, 1.0).unwrap());
        let r = oracle_project(&g, &set, &OracleConfig::default()).unwrap();
        assert!((r.minimizer.values()[0] - 1.0).abs() < 1e-6);
        assert_eq!(r.minimizer.values()[1], 0.0);
        assert!((r.objective.sqrt() - 10f64.sqrt()).abs() < 1e-6);
        assert!(r.audit_pass);
    }

    #[test]
    fn worked_cylinder_instance() {
        let (s, a) = two_atom();
        let g = Element::from_flat(&s, vec![2.0, 3.0]).unwrap();
        let set = SetSpec::Cylinder(CylinderSpec::new(BallSpec::centered(a, 1.0).unwrap()));
        let r = oracle_project(&g, &set, &OracleConfig::default()).unwrap();
        assert!(
            r.minimizer
                .max_abs_diff(&Element::from_flat(&s, vec![1.0, 3.0]).unwrap())
                < 1e-6
        );
    }

    #[test]
    fn subspace_and_feasible_start() {
        let s = BochnerSpace::build(vec![0.5, 1.5, 1.0], 2, 3.0, 1.5).unwrap();
        let a = SupportSet::new(&s, &[0, 2]).unwrap();
        let g = Element::from_flat(&s, vec![1.0, -2.0, 0.3, 0.4, 0.5, -0.6]).unwrap();
        let r = oracle_project(&g, &SetSpec::Subspace(a.clone()), &OracleConfig::default()).unwrap();
        assert!(r.minimizer.max_abs_diff(&g.restrict(&a).unwrap()) < 1e-6);
        let inside = g.restrict(&a).unwrap().scale(0.1);
        let set = SetSpec::Ball(BallSpec::centered(a, 1.0).unwrap());
        let r = oracle_project(&inside, &set, &OracleConfig::default()).unwrap();
        assert!(r.minimizer.max_abs_diff(&inside) < 1e-6);
        assert!(r.objective < 1e-8);
    }

    #[test]
    fn audit_catches_a_bad_candidate() {
        let (s, a) = two_atom();
        let g = Element::from_flat(&s, vec![2.0, 3.0]).unwrap();
        let set = SetSpec::Ball(BallSpec::centered(a, 1.0).unwrap());
        let bad = Element::from_flat(&s, vec![0.5, 0.0]).unwrap();
        let r = audit(&g, &set, &bad, 3000, 7).unwrap();
        assert!(r.best_improvement > 1e-3);
        assert!(r.min_variational < 0.0);
    }

    #[test]
    fn too_large_is_rejected() {
        let s = BochnerSpace::build(vec![1.0; 5], 3, 2.0, 2.0).unwrap();
        let set = SetSpec::Subspace(SupportSet::full(&s));
        let g = Element::zeros(&s);
        assert!(matches!(
            oracle_project(&g, &set, &OracleConfig::default()),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn fd_identity_and_subspace() {
        let s = BochnerSpace::build(vec![0.5, 1.5], 2, 1.5, 3.0).unwrap();
        let a = SupportSet::new(&s, &[1]).unwrap();
        let g = Element::from_flat(&s, vec![1.0, -2.0, 0.3, 0.4]).unwrap();
        let h = Element::from_flat(&s, vec![0.7, 0.1, -0.9, 0.2]).unwrap();
        let sched = StepSchedule::default();
        let id = fd_derivative(&Identity, &g, &h, &sched).unwrap();
        assert!(id.estimate.max_abs_diff(&h) < 1e-10);
        let sub = fd_derivative(&SetSpec::Subspace(a.clone()), &g, &h, &sched).unwrap();
        assert!(sub.estimate.max_abs_diff(&h.restrict(&a).unwrap()) < 1e-10);
    }

    #[test]
    fn region_lock_reports_not_covered() {
        let (s, a) = two_atom();
        let set = SetSpec::Ball(BallSpec::centered(a, 1.0).unwrap());
        let g = Element::from_flat(&s, vec![0.999, 0.0]).unwrap();
        let h = Element::from_flat(&s, vec![1.0, 0.0]).unwrap();
        let lock = RegionLocked::at(&set, &g, ClassifyTol::default()).unwrap();
        assert!(matches!(
            fd_derivative(&lock, &g, &h, &StepSchedule::with_initial(0.1)),
            Err(Error::NotCovered { .. })
        ));
    }
}
