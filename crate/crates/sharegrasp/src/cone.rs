//! Polyhedral convex cone (PCC) algebra in dimensions 1–3.
//!
//! A PCC is the set of nonnegative combinations of finitely many generator
//! rays. This module maintains the dual description — generators (V-rep)
//! and inward facet normals (H-rep) — via a double-description routine
//! specialized to low dimension, and provides intersection, linear-map
//! projection, membership, and the angular depth metrics Δ and σ used by
//! the stability margins.
//!
//! The workhorse is [`rays_from_halfspaces`]: given inward normals it
//! returns the cone `{x : n·x ≥ 0 ∀n}` split into a lineality basis (the
//! largest linear subspace inside the cone) and extreme rays of the
//! pointed quotient. Every other conversion is polar duality: the inward
//! normals of `cone(G)` are the generators of its dual cone
//! `{y : g·y ≥ 0 ∀g}`, which is again a `rays_from_halfspaces` call with
//! the generators acting as normals.
//!
//! σ is evaluated against the *facets* of the outer cone: for a
//! full-dimensional pointed cone these are planes (2D faces) described by
//! their inward unit normal plus an anchor pair of supporting generators;
//! for a cone spanning only a plane the two boundary rays act as
//! one-dimensional facets and the ray-to-ray angle replaces the
//! ray-to-plane angle.

use nalgebra::{DMatrix, DVector, Vector3};
use thiserror::Error;

use crate::linalg;
use crate::tol;

/// Errors from cone operations whose preconditions can fail.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConeError {
    #[error("operation undefined on the zero cone")]
    ZeroCone,
    #[error("cone contains a line; facet description undefined")]
    NonPointed,
    #[error("inner cone is not contained in the outer cone")]
    NotContained,
    #[error("cones have mismatched dimensions {0} and {1}")]
    DimMismatch(usize, usize),
    #[error("operation unsupported in dimension {0}")]
    WrongDim(usize),
}

/// A polyhedral convex cone in dimension 1, 2, or 3, stored by unit
/// generator rays.
///
/// A cone containing a full line stores the line as an antipodal pair of
/// generators. The zero cone has no generators. Two construction paths
/// exist: [`Pcc::from_generators`] keeps the caller's rays (deduplicated,
/// order preserved — used where generator indices carry provenance) and
/// [`Pcc::canonical`] reduces to the sorted minimal extreme-ray
/// description (used for all derived cones).
#[derive(Debug, Clone, PartialEq)]
pub struct Pcc {
    dim: usize,
    generators: Vec<DVector<f64>>,
}

/// Result of [`rays_from_halfspaces`]: the cone `{x : n·x ≥ 0}` as the
/// direct sum of a linear subspace and a pointed cone orthogonal to it.
#[derive(Debug, Clone)]
pub struct HalfspaceCone {
    /// Orthonormal basis of the lineality space.
    pub lineality: Vec<DVector<f64>>,
    /// Extreme rays of the pointed quotient, unit norm, orthogonal to the
    /// lineality space.
    pub rays: Vec<DVector<f64>>,
}

impl HalfspaceCone {
    /// All generators: antipodal pairs for the lineality basis, then the
    /// pointed rays.
    pub fn all_generators(&self) -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(2 * self.lineality.len() + self.rays.len());
        for l in &self.lineality {
            out.push(l.clone());
            out.push(-l);
        }
        out.extend(self.rays.iter().cloned());
        out
    }
}

fn rot90(v: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![-v[1], v[0]])
}

fn v3(v: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn dv(v: Vector3<f64>) -> DVector<f64> {
    DVector::from_vec(vec![v.x, v.y, v.z])
}

/// Normalize, drop near-zero vectors, and deduplicate by chord distance.
/// Antipodal pairs are kept — they are how lines are represented.
fn tidy_rays(dim: usize, rays: impl IntoIterator<Item = DVector<f64>>) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for r in rays {
        debug_assert_eq!(r.len(), dim);
        let norm = r.norm();
        if norm < 1e-12 {
            continue;
        }
        let u = r / norm;
        if out.iter().all(|g| (g - &u).norm() > tol::DEDUPE) {
            out.push(u);
        }
    }
    out
}

/// Is `x` a nonnegative combination of `gens`? LP feasibility in the
/// given dimension; `x` should be unit-ish for the tolerance to be
/// meaningful.
fn in_span_nonneg(dim: usize, gens: &[DVector<f64>], x: &DVector<f64>) -> bool {
    if gens.is_empty() {
        return x.norm() <= tol::MEMBERSHIP;
    }
    let mut lp = crate::lp::LinearProgram::new(gens.len());
    for i in 0..gens.len() {
        lp.require_nonneg(i);
    }
    for row in 0..dim {
        let coeffs: Vec<f64> = gens.iter().map(|g| g[row]).collect();
        lp.add_eq(&coeffs, x[row]);
    }
    lp.is_feasible()
}

/// Enumerate the cone `{x ∈ R^dim : n·x ≥ 0 for every n in normals}`.
///
/// The lineality space is the common null space of the normals; the
/// quotient cone on its orthogonal complement is pointed and enumerated
/// exactly: by sign in 1D, by boundary-arc extremes in 2D, and by
/// filtered pairwise cross products pruned to extreme rays in 3D.
pub fn rays_from_halfspaces(dim: usize, normals: &[DVector<f64>]) -> HalfspaceCone {
    assert!((1..=3).contains(&dim), "supported dimensions are 1-3");
    let normals = tidy_rays(dim, normals.iter().cloned());
    if normals.is_empty() {
        // No constraints: the whole space.
        let mut lineality = Vec::new();
        for k in 0..dim {
            let mut e = DVector::zeros(dim);
            e[k] = 1.0;
            lineality.push(e);
        }
        return HalfspaceCone { lineality, rays: Vec::new() };
    }
    let nmat = DMatrix::from_fn(normals.len(), dim, |r, c| normals[r][c]);
    let null = linalg::null_space(&nmat); // dim × ℓ, orthonormal columns
    let ell = null.ncols();
    let lineality: Vec<DVector<f64>> =
        (0..ell).map(|c| null.column(c).into_owned()).collect();
    if ell == dim {
        return HalfspaceCone { lineality, rays: Vec::new() };
    }
    // Quotient onto W = lineality⊥. The normals already lie in W (they
    // annihilate the null space), so the reduction is lossless.
    let basis = if ell == 0 {
        DMatrix::identity(dim, dim)
    } else {
        let lin_rows = DMatrix::from_fn(ell, dim, |r, c| lineality[r][c]);
        linalg::orthonormal_complement(&lin_rows)
    };
    let w = basis.nrows();
    let reduced: Vec<DVector<f64>> = tidy_rays(
        w,
        normals.iter().map(|n| {
            let mut out = DVector::zeros(w);
            for r in 0..w {
                out[r] = basis.row(r).transpose().dot(n);
            }
            out
        }),
    );
    let quotient_rays = pointed_rays_from_halfspaces(w, &reduced);
    // Lift back to the ambient space.
    let rays = quotient_rays
        .into_iter()
        .map(|q| {
            let mut out = DVector::zeros(dim);
            for r in 0..w {
                out += basis.row(r).transpose() * q[r];
            }
            out.normalize()
        })
        .collect();
    HalfspaceCone { lineality, rays }
}

/// Extreme rays of `{u ∈ R^w : n·u ≥ 0}` under the promise that the cone
/// is pointed (the normals span R^w).
fn pointed_rays_from_halfspaces(w: usize, normals: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let feasible = |d: &DVector<f64>| normals.iter().all(|n| n.dot(d) >= -tol::MEMBERSHIP);
    match w {
        1 => {
            let pos = normals.iter().all(|n| n[0] > 0.0);
            let neg = normals.iter().all(|n| n[0] < 0.0);
            if pos {
                vec![DVector::from_vec(vec![1.0])]
            } else if neg {
                vec![DVector::from_vec(vec![-1.0])]
            } else {
                Vec::new()
            }
        }
        2 => {
            // Candidate boundary directions of each half-plane; the
            // feasible ones lie on the sector boundary. The sector is
            // pointed, hence spans < π and has no wrap-around ambiguity.
            let mut cands = Vec::new();
            for n in normals {
                let d = rot90(n);
                if feasible(&d) {
                    cands.push(d.clone());
                }
                let d = -d;
                if feasible(&d) {
                    cands.push(d);
                }
            }
            let cands = tidy_rays(2, cands);
            let Some(c0) = cands.first() else { return Vec::new() };
            let angle = |c: &DVector<f64>| {
                (c0[0] * c[1] - c0[1] * c[0]).atan2(c0.dot(c))
            };
            let lo = cands
                .iter()
                .min_by(|a, b| angle(a).partial_cmp(&angle(b)).unwrap())
                .unwrap()
                .clone();
            let hi = cands
                .iter()
                .max_by(|a, b| angle(a).partial_cmp(&angle(b)).unwrap())
                .unwrap()
                .clone();
            tidy_rays(2, [lo, hi])
        }
        3 => {
            // Every extreme ray lies on two active constraint planes, so
            // it is parallel to some pairwise cross product. Redundant
            // input normals can contribute feasible but non-extreme
            // candidates; an LP prune removes them.
            let mut cands = Vec::new();
            for i in 0..normals.len() {
                for j in (i + 1)..normals.len() {
                    let c = v3(&normals[i]).cross(&v3(&normals[j]));
                    if c.norm() > 1e-12 {
                        let c = dv(c.normalize());
                        if feasible(&c) {
                            cands.push(c.clone());
                        }
                        let c = -c;
                        if feasible(&c) {
                            cands.push(c);
                        }
                    }
                }
            }
            let mut cands = tidy_rays(3, cands);
            let mut k = 0;
            while k < cands.len() {
                let candidate = cands[k].clone();
                let others: Vec<DVector<f64>> = cands
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != k)
                    .map(|(_, c)| c.clone())
                    .collect();
                if in_span_nonneg(3, &others, &candidate) {
                    cands.remove(k);
                } else {
                    k += 1;
                }
            }
            cands
        }
        0 => Vec::new(),
        _ => unreachable!("dimension checked by caller"),
    }
}

/// One facet of a pointed cone, as seen by the σ depth metric.
#[derive(Debug, Clone, PartialEq)]
pub enum Facet {
    /// A two-dimensional facet of a full-span 3D cone (or a boundary ray
    /// of a 2D cone), described by its inward unit normal. `support`
    /// lists the generator indices lying on the facet; `anchor` is the
    /// first independent pair `(i, j)` of supporting generators such that
    /// `normal = orientation · (g_i × g_j) / ‖g_i × g_j‖` (3D only).
    Plane {
        normal: DVector<f64>,
        support: Vec<usize>,
        anchor: Option<(usize, usize)>,
        orientation: f64,
    },
    /// A boundary ray of a cone spanning only a plane in 3D: the facet is
    /// the generator itself and angular distances are measured ray to
    /// ray.
    Ray { index: usize, direction: DVector<f64> },
}

/// Angular distance from a ray `e` to the hyperplane with inward unit
/// normal `n`: `Δ = arcsin(n·e)`, in `[−π/2, π/2]`, positive on the
/// inward side.
pub fn delta(facet_normal: &DVector<f64>, edge: &DVector<f64>) -> f64 {
    facet_normal.dot(edge).clamp(-1.0, 1.0).asin()
}

/// Which facet and which inner edge attain the σ min-max.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaDetail {
    pub facet_index: usize,
    pub edge_index: usize,
    pub facet: Facet,
}

/// σ value plus the attaining indices (absent for the defined-zero case
/// of a single-generator outer cone).
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaResult {
    pub value: f64,
    pub detail: Option<SigmaDetail>,
}

impl Pcc {
    /// The cone containing only the origin.
    pub fn zero(dim: usize) -> Self {
        assert!((1..=3).contains(&dim));
        Pcc { dim, generators: Vec::new() }
    }

    /// Build from caller-supplied rays: normalized and deduplicated but
    /// otherwise kept verbatim (order and redundancy preserved), so that
    /// generator indices keep their meaning to the caller.
    pub fn from_generators(dim: usize, rays: impl IntoIterator<Item = DVector<f64>>) -> Self {
        assert!((1..=3).contains(&dim));
        Pcc { dim, generators: tidy_rays(dim, rays) }
    }

    /// Build the minimal canonical description of `cone(rays)`: extreme
    /// rays only (lines as antipodal pairs), sorted lexicographically.
    /// Realized as a double-description round trip through the dual cone.
    pub fn canonical(dim: usize, rays: impl IntoIterator<Item = DVector<f64>>) -> Self {
        let kept = Pcc::from_generators(dim, rays);
        if kept.is_zero() {
            return kept;
        }
        let hs = kept.halfspaces();
        let mut generators = rays_from_halfspaces(dim, &hs).all_generators();
        generators.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.partial_cmp(y).unwrap())
                .find(|o| !o.is_eq())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Pcc { dim, generators }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[DVector<f64>] {
        &self.generators
    }

    /// True when the cone is `{0}`.
    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    /// Inward unit normals of the H-representation: the generators of the
    /// dual cone, with the dual's lineality directions appearing as
    /// antipodal pairs (each such pair pins an equality plane). Empty for
    /// the full space; for the zero cone the normals force every
    /// coordinate to zero.
    pub fn halfspaces(&self) -> Vec<DVector<f64>> {
        rays_from_halfspaces(self.dim, &self.generators).all_generators()
    }

    /// Dimension of the linear span of the cone.
    pub fn span_dim(&self) -> usize {
        if self.is_zero() {
            return 0;
        }
        let m = DMatrix::from_fn(self.generators.len(), self.dim, |r, c| self.generators[r][c]);
        linalg::rank(&m)
    }

    /// A cone is pointed when it contains no full line, i.e. its dual
    /// spans the whole space.
    pub fn is_pointed(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        let dual = rays_from_halfspaces(self.dim, &self.generators).all_generators();
        if dual.is_empty() {
            return false;
        }
        let m = DMatrix::from_fn(dual.len(), self.dim, |r, c| dual[r][c]);
        linalg::rank(&m) == self.dim
    }

    /// True when the cone is the entire space (its dual is `{0}`).
    pub fn is_full(&self) -> bool {
        !self.is_zero() && self.halfspaces().is_empty()
    }

    /// Membership test by LP over the generators, tolerance
    /// [`tol::MEMBERSHIP`] on the unit-normalized query.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        assert_eq!(x.len(), self.dim);
        let norm = x.norm();
        if norm <= tol::MEMBERSHIP {
            return true;
        }
        let unit = x / norm;
        in_span_nonneg(self.dim, &self.generators, &unit)
    }

    /// Does this cone contain every generator of `other`?
    pub fn contains_cone(&self, other: &Pcc) -> bool {
        other.generators.iter().all(|g| self.contains(g))
    }

    /// Set equality: mutual containment.
    pub fn set_eq(&self, other: &Pcc) -> bool {
        self.dim == other.dim && self.contains_cone(other) && other.contains_cone(self)
    }

    /// Intersection by combining the H-representations and converting
    /// back to generators. The result is canonical.
    pub fn intersect(&self, other: &Pcc) -> Result<Pcc, ConeError> {
        if self.dim != other.dim {
            return Err(ConeError::DimMismatch(self.dim, other.dim));
        }
        if self.is_zero() || other.is_zero() {
            return Ok(Pcc::zero(self.dim));
        }
        let mut hs = self.halfspaces();
        hs.extend(other.halfspaces());
        if hs.is_empty() {
            // Both cones are the full space.
            return Ok(Pcc::canonical(self.dim, self.generators.clone()));
        }
        let cone = rays_from_halfspaces(self.dim, &hs);
        Ok(Pcc::canonical(self.dim, cone.all_generators()))
    }

    /// Image of the cone under a full-row-rank linear map `P` (rows ×
    /// dim). Zero images are dropped; the result is canonical, and may be
    /// non-pointed or the full target space.
    pub fn project(&self, p: &DMatrix<f64>) -> Pcc {
        assert_eq!(p.ncols(), self.dim);
        let target = p.nrows();
        assert!((1..=3).contains(&target));
        let images = self.generators.iter().map(|g| p * g);
        Pcc::canonical(target, images)
    }

    /// Facets of the cone for the σ depth metric (3D only).
    ///
    /// Span-3 pointed cones yield [`Facet::Plane`] entries; cones
    /// spanning only a plane yield their two boundary rays as
    /// [`Facet::Ray`]; a single-ray cone has no facets (σ is defined 0);
    /// non-pointed cones have no facet description.
    pub fn facets(&self) -> Result<Vec<Facet>, ConeError> {
        if self.dim != 3 {
            return Err(ConeError::WrongDim(self.dim));
        }
        if self.is_zero() {
            return Err(ConeError::ZeroCone);
        }
        let span = self.span_dim();
        if span == 1 {
            return Ok(Vec::new());
        }
        if !self.is_pointed() {
            return Err(ConeError::NonPointed);
        }
        if span == 2 {
            return Ok(self.planar_boundary_rays());
        }
        let hs = self.halfspaces();
        let mut out = Vec::with_capacity(hs.len());
        for n in &hs {
            let support: Vec<usize> = (0..self.generators.len())
                .filter(|&i| n.dot(&self.generators[i]).abs() <= 1e-9)
                .collect();
            let mut anchor = None;
            let mut orientation = 1.0;
            'pairs: for (a, &i) in support.iter().enumerate() {
                for &j in &support[a + 1..] {
                    let cr = v3(&self.generators[i]).cross(&v3(&self.generators[j]));
                    if cr.norm() > 1e-9 {
                        orientation = if dv(cr).dot(n) > 0.0 { 1.0 } else { -1.0 };
                        anchor = Some((i, j));
                        break 'pairs;
                    }
                }
            }
            debug_assert!(anchor.is_some(), "a facet of a span-3 cone supports an independent pair");
            out.push(Facet::Plane { normal: n.clone(), support, anchor, orientation });
        }
        Ok(out)
    }

    /// The two extreme generators of a cone spanning a 2D plane in 3D,
    /// as ray facets (ordered by signed in-plane angle, ties by index).
    fn planar_boundary_rays(&self) -> Vec<Facet> {
        let m = DMatrix::from_fn(self.generators.len(), 3, |r, c| self.generators[r][c]);
        let plane = linalg::row_space(&m); // 2×3 orthonormal in-plane basis
        let coords: Vec<DVector<f64>> = self
            .generators
            .iter()
            .map(|g| {
                DVector::from_vec(vec![
                    plane.row(0).transpose().dot(g),
                    plane.row(1).transpose().dot(g),
                ])
            })
            .collect();
        let c0 = &coords[0];
        let angle =
            |c: &DVector<f64>| (c0[0] * c[1] - c0[1] * c[0]).atan2(c0.dot(c));
        let mut lo = 0;
        let mut hi = 0;
        for (i, c) in coords.iter().enumerate() {
            if angle(c) < angle(&coords[lo]) - 1e-15 {
                lo = i;
            }
            if angle(c) > angle(&coords[hi]) + 1e-15 {
                hi = i;
            }
        }
        let mut idx = vec![lo, hi];
        idx.dedup();
        idx.into_iter()
            .map(|i| Facet::Ray { index: i, direction: self.generators[i].clone() })
            .collect()
    }
}

/// Depth of `inner` inside `outer`: `σ = min over facets F of outer of
/// (max over edges E of inner of Δ(F, E))`, with Δ the ray-to-plane angle
/// for plane facets and the ray-to-ray angle `arccos(F·E)` for ray
/// facets. Ties break to the first index. `σ = 0` when the outer cone
/// has a single generator.
pub fn sigma(outer: &Pcc, inner: &Pcc) -> Result<SigmaResult, ConeError> {
    if inner.is_zero() {
        return Err(ConeError::ZeroCone);
    }
    if outer.dim() != inner.dim() {
        return Err(ConeError::DimMismatch(outer.dim(), inner.dim()));
    }
    if !outer.contains_cone(inner) {
        return Err(ConeError::NotContained);
    }
    let facets = outer.facets()?;
    if facets.is_empty() {
        return Ok(SigmaResult { value: 0.0, detail: None });
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for (j, facet) in facets.iter().enumerate() {
        let mut worst: Option<(f64, usize)> = None;
        for (i, e) in inner.generators().iter().enumerate() {
            let d = match facet {
                Facet::Plane { normal, .. } => delta(normal, e),
                Facet::Ray { direction, .. } => direction.dot(e).clamp(-1.0, 1.0).acos(),
            };
            if worst.map_or(true, |(w, _)| d > w) {
                worst = Some((d, i));
            }
        }
        let (d, i) = worst.expect("inner cone has generators");
        if best.map_or(true, |(b, _, _)| d < b) {
            best = Some((d, j, i));
        }
    }
    let (value, facet_index, edge_index) = best.expect("outer cone has facets");
    Ok(SigmaResult {
        value,
        detail: Some(SigmaDetail {
            facet_index,
            edge_index,
            facet: facets[facet_index].clone(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn d3(x: f64, y: f64, z: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y, z])
    }

    fn d2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    fn octant() -> Pcc {
        Pcc::from_generators(3, [d3(1.0, 0.0, 0.0), d3(0.0, 1.0, 0.0), d3(0.0, 0.0, 1.0)])
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> DVector<f64> {
        loop {
            let v = d3(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if v.norm() > 0.1 {
                return v.normalize();
            }
        }
    }

    /// A random pointed 3D cone: rays clustered around a random center
    /// within an angular radius < π/2.
    fn random_pointed_cone(rng: &mut ChaCha8Rng, max_rays: usize) -> Pcc {
        let center = random_unit(rng);
        let n = rng.gen_range(1..=max_rays);
        let rays: Vec<DVector<f64>> = (0..n)
            .map(|_| {
                let mut v = random_unit(rng);
                // Blend toward the center so all rays stay in an open
                // half-space (pointedness).
                v = (&center * 1.2 + v).normalize();
                v
            })
            .collect();
        Pcc::from_generators(3, rays)
    }

    #[test]
    fn octant_facets_are_coordinate_planes() {
        let facets = octant().facets().unwrap();
        assert_eq!(facets.len(), 3);
        let mut normals: Vec<Vector3<f64>> = facets
            .iter()
            .map(|f| match f {
                Facet::Plane { normal, support, anchor, orientation } => {
                    assert_eq!(support.len(), 2);
                    let (i, j) = anchor.unwrap();
                    assert!(support.contains(&i) && support.contains(&j));
                    assert!(*orientation == 1.0 || *orientation == -1.0);
                    v3(normal)
                }
                Facet::Ray { .. } => panic!("full-span cone has plane facets"),
            })
            .collect();
        normals.sort_by(|a, b| {
            (a.x, a.y, a.z).partial_cmp(&(b.x, b.y, b.z)).unwrap()
        });
        assert_relative_eq!(normals[0], Vector3::z());
        assert_relative_eq!(normals[1], Vector3::y());
        assert_relative_eq!(normals[2], Vector3::x());
    }

    #[test]
    fn anchor_pair_reconstructs_the_facet_normal() {
        let c = Pcc::from_generators(
            3,
            [d3(1.0, 0.0, 0.3), d3(0.0, 1.0, 0.3), d3(-1.0, -1.0, 1.0)],
        );
        for f in c.facets().unwrap() {
            if let Facet::Plane { normal, anchor, orientation, .. } = f {
                let (i, j) = anchor.unwrap();
                let cross = v3(&c.generators()[i]).cross(&v3(&c.generators()[j]));
                assert_relative_eq!(
                    dv(cross.normalize() * orientation),
                    normal,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn single_generator_cone_has_no_facets() {
        let c = Pcc::from_generators(3, [d3(0.0, 1.0, 0.0)]);
        assert_eq!(c.facets().unwrap(), Vec::new());
    }

    #[test]
    fn planar_cone_facets_are_its_extreme_rays() {
        // Three coplanar rays in the z=0 plane; the middle one is
        // redundant.
        let c = Pcc::from_generators(
            3,
            [d3(1.0, 0.0, 0.0), d3(1.0, 1.0, 0.0), d3(0.0, 1.0, 0.0)],
        );
        let facets = c.facets().unwrap();
        assert_eq!(facets.len(), 2);
        let mut idx: Vec<usize> = facets
            .iter()
            .map(|f| match f {
                Facet::Ray { index, .. } => *index,
                _ => panic!("planar cone has ray facets"),
            })
            .collect();
        idx.sort();
        assert_eq!(idx, vec![0, 2]);
    }

    #[test]
    fn non_pointed_cone_has_no_facet_description() {
        let c = Pcc::from_generators(
            3,
            [d3(1.0, 0.0, 0.0), d3(-1.0, 0.0, 0.0), d3(0.0, 1.0, 0.0)],
        );
        assert!(!c.is_pointed());
        assert_eq!(c.facets(), Err(ConeError::NonPointed));
    }

    #[test]
    fn membership_agrees_with_halfspaces_on_random_rays() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let c = random_pointed_cone(&mut rng, 6);
            let hs = c.halfspaces();
            for _ in 0..40 {
                let x = random_unit(&mut rng);
                let by_lp = c.contains(&x);
                let by_hs = hs.iter().all(|n| n.dot(&x) >= -1e-7);
                assert_eq!(by_lp, by_hs, "cone {:?} ray {:?}", c, x);
            }
        }
    }

    #[test]
    fn generators_satisfy_own_halfspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let c = random_pointed_cone(&mut rng, 6);
            let hs = c.halfspaces();
            for g in c.generators() {
                for n in &hs {
                    assert!(n.dot(g) >= -1e-9);
                }
            }
            for f in c.facets().unwrap() {
                if let Facet::Plane { support, .. } = f {
                    assert!(support.len() >= 2, "facet supports at least two generators");
                }
            }
        }
    }

    #[test]
    fn double_description_round_trip_preserves_the_cone() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..60 {
            let c = random_pointed_cone(&mut rng, 6);
            let round = Pcc::canonical(3, rays_from_halfspaces(3, &c.halfspaces()).all_generators());
            assert!(round.set_eq(&c));
        }
    }

    #[test]
    fn intersection_is_idempotent_and_contained() {
        let c = octant();
        let same = c.intersect(&c).unwrap();
        assert!(same.set_eq(&c));

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let a = random_pointed_cone(&mut rng, 5);
            let b = random_pointed_cone(&mut rng, 5);
            let i = a.intersect(&b).unwrap();
            assert!(a.contains_cone(&i));
            assert!(b.contains_cone(&i));
            // Sampled membership equivalence.
            for _ in 0..20 {
                let x = random_unit(&mut rng);
                assert_eq!(i.contains(&x), a.contains(&x) && b.contains(&x));
            }
        }
    }

    #[test]
    fn halfplane_cone_intersects_axis_ray_in_2d() {
        let half = Pcc::from_generators(2, [d2(1.0, 0.0), d2(0.0, 1.0)]);
        let axis = Pcc::from_generators(2, [d2(0.0, 1.0)]);
        let inter = half.intersect(&axis).unwrap();
        assert!(inter.set_eq(&axis));
    }

    #[test]
    fn disjoint_rays_intersect_to_zero() {
        let a = Pcc::from_generators(3, [d3(1.0, 0.0, 0.0)]);
        let b = Pcc::from_generators(3, [d3(0.0, 1.0, 0.0)]);
        assert!(a.intersect(&b).unwrap().is_zero());
    }

    #[test]
    fn projection_drops_kernel_and_flags_lines() {
        let zray = Pcc::from_generators(3, [d3(0.0, 0.0, 1.0)]);
        let take_xy = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(zray.project(&take_xy).is_zero());

        let xline = Pcc::from_generators(3, [d3(1.0, 0.0, 0.0), d3(-1.0, 0.0, 0.0)]);
        let take_x = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let p = xline.project(&take_x);
        assert_eq!(p.dim(), 1);
        assert!(p.is_full());
        assert_eq!(p.generators().len(), 2);
    }

    #[test]
    fn projection_contains_images_of_members(){
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let c = random_pointed_cone(&mut rng, 5);
            let p = DMatrix::from_fn(2, 3, |_, _| rng.gen_range(-1.0..1.0));
            if linalg::rank(&p) < 2 {
                continue;
            }
            let proj = c.project(&p);
            for _ in 0..10 {
                // A random member: nonnegative combination of generators.
                let mut x = DVector::zeros(3);
                for g in c.generators() {
                    x += g * rng.gen_range(0.0..1.0);
                }
                if x.norm() < 1e-9 {
                    continue;
                }
                assert!(proj.contains(&(&p * &x)));
            }
        }
    }

    #[test]
    fn fullness_and_pointedness_classification() {
        assert!(octant().is_pointed());
        assert!(!octant().is_full());
        let all = Pcc::from_generators(
            3,
            [
                d3(1.0, 0.0, 0.0),
                d3(-1.0, 0.0, 0.0),
                d3(0.0, 1.0, 0.0),
                d3(0.0, -1.0, 0.0),
                d3(0.0, 0.0, 1.0),
                d3(0.0, 0.0, -1.0),
            ],
        );
        assert!(all.is_full());
        assert!(!all.is_pointed());
        let halfplane = Pcc::from_generators(2, [d2(1.0, 0.0), d2(-1.0, 0.0), d2(0.0, 1.0)]);
        assert!(!halfplane.is_full());
        assert!(!halfplane.is_pointed());
        assert!(Pcc::zero(3).is_pointed());
        assert!(!Pcc::zero(3).is_full());
    }

    #[test]
    fn canonical_prunes_redundant_rays_and_sorts() {
        let c = Pcc::canonical(
            3,
            [
                d3(1.0, 0.0, 0.0),
                d3(0.0, 1.0, 0.0),
                d3(1.0, 1.0, 0.0), // inside the first two
                d3(0.0, 0.0, 1.0),
            ],
        );
        assert_eq!(c.generators().len(), 3);
        assert!(c.set_eq(&octant()));
    }

    #[test]
    fn delta_examples_and_antisymmetry() {
        let n = d3(0.0, 0.0, 1.0);
        assert_relative_eq!(delta(&n, &n), FRAC_PI_2);
        assert_relative_eq!(delta(&n, &d3(1.0, 0.0, 0.0)), 0.0);
        let e = d3((3.0f64).sqrt() / 2.0, 0.0, 0.5);
        assert_relative_eq!(delta(&n, &e), FRAC_PI_6, epsilon = 1e-12);
        assert_relative_eq!(delta(&(-&n), &e), -FRAC_PI_6, epsilon = 1e-12);
    }

    #[test]
    fn sigma_of_single_ray_outer_is_zero() {
        let ray = Pcc::from_generators(3, [d3(0.0, 1.0, 0.0)]);
        let r = sigma(&ray, &ray).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.detail.is_none());
    }

    #[test]
    fn sigma_of_sector_and_bisector_ray() {
        // Outer spans the 90° sector between +x and +y (a planar cone in
        // a 2D space); inner is the bisector. Depth from either boundary
        // ray is 45°.
        let outer = Pcc::from_generators(2, [d2(1.0, 0.0), d2(0.0, 1.0)]);
        let inner = Pcc::from_generators(2, [d2(1.0, 1.0)]);
        // 2D facets are unsupported; embed in 3D instead.
        let outer3 = Pcc::from_generators(3, [d3(1.0, 0.0, 0.0), d3(0.0, 1.0, 0.0)]);
        let inner3 = Pcc::from_generators(3, [d3(1.0, 1.0, 0.0)]);
        assert!(outer.contains_cone(&inner));
        let r = sigma(&outer3, &inner3).unwrap();
        assert_relative_eq!(r.value, FRAC_PI_4, epsilon = 1e-12);
        let d = r.detail.unwrap();
        assert!(matches!(d.facet, Facet::Ray { .. }));
    }

    #[test]
    fn sigma_min_max_on_nested_sectors() {
        // Outer = sector [0°, 90°], inner = sector [45°, 90°] (both
        // planar cones embedded in 3D). From boundary ray 0°: farthest
        // inner edge is 90°. From boundary ray 90°: farthest inner edge
        // is 45°. σ = min(90°, 45°) = 45°.
        let outer = Pcc::from_generators(3, [d3(1.0, 0.0, 0.0), d3(0.0, 1.0, 0.0)]);
        let inner = Pcc::from_generators(3, [d3(1.0, 1.0, 0.0), d3(0.0, 1.0, 0.0)]);
        let r = sigma(&outer, &inner).unwrap();
        assert_relative_eq!(r.value, FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn sigma_rejects_uncontained_inner() {
        let outer = octant();
        let inner = Pcc::from_generators(3, [d3(-1.0, 0.0, 0.0)]);
        assert_eq!(sigma(&outer, &inner).unwrap_err(), ConeError::NotContained);
    }

    #[test]
    fn sigma_is_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let outer = random_pointed_cone(&mut rng, 6);
            let inner_rays: Vec<DVector<f64>> = {
                // Positive combinations of outer generators stay inside.
                (0..rng.gen_range(1..4))
                    .map(|_| {
                        let mut x = DVector::zeros(3);
                        for g in outer.generators() {
                            x += g * rng.gen_range(0.1..1.0);
                        }
                        x
                    })
                    .collect()
            };
            let inner = Pcc::from_generators(3, inner_rays);
            let base = sigma(&outer, &inner).unwrap().value;

            let axis = random_unit(&mut rng);
            let rot = nalgebra::Rotation3::from_axis_angle(
                &nalgebra::Unit::new_normalize(v3(&axis)),
                rng.gen_range(-3.0..3.0),
            );
            let spin = |c: &Pcc| {
                Pcc::from_generators(
                    3,
                    c.generators().iter().map(|g| dv(rot * v3(g))),
                )
            };
            let rotated = sigma(&spin(&outer), &spin(&inner)).unwrap().value;
            assert_relative_eq!(base, rotated, epsilon = 1e-9);
        }
    }
}
