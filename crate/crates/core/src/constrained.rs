//! Facets of a cone whose normals satisfy linear constraints `G b = 0`.
//!
//! Let the columns of `T` be an integer basis of `ker G`. Every constrained
//! facet normal is `b = T b~` for a facet normal `b~` of the cone generated by
//! the projected rays `w~ = T^T w`, and `w . (T b~) = w~ . b~` for every ray.
//! The facets of the projected cone are therefore a complete candidate list;
//! lifting them back and keeping the ones that are facets of the original cone
//! gives exactly the constrained facets.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use log::debug;
use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::cone::{self, Cone, ConeError, FacetReport, LinearInequality};
use crate::linalg::{self, IntMatrix, IntVector, LinalgError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstrainedError {
    #[error("constraint matrix has {found} columns but the cone lives in dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the constraints admit only the zero normal")]
    NoFreedom,
    #[error("candidate lifts to the zero vector")]
    ZeroLift,
    #[error(transparent)]
    Cone(#[from] ConeError),
}

impl From<LinalgError> for ConstrainedError {
    fn from(e: LinalgError) -> Self {
        ConstrainedError::Cone(e.into())
    }
}

/// The linear conditions `G b = 0` on admissible facet normals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    g: IntMatrix,
}

impl ConstraintSystem {
    pub fn new(g: IntMatrix) -> Self {
        Self { g }
    }

    pub fn from_rows(cols: usize, rows: Vec<IntVector>) -> Result<Self, ConstrainedError> {
        Ok(Self { g: IntMatrix::new(cols, rows)? })
    }

    /// No conditions at all.
    pub fn unconstrained(cols: usize) -> Self {
        Self { g: IntMatrix::zeros(0, cols) }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.g
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.g.nrows(), self.g.ncols())
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.g)
    }

    pub fn is_satisfied_by(&self, b: &IntVector) -> bool {
        self.g.rows().iter().all(|row| num_traits::Zero::is_zero(&row.dot(b)))
    }
}

/// Row encoding the affine condition `g . b_p = gamma` on a polytope
/// inequality with known bound `beta`, as a linear condition on the cone
/// normal `(beta, b_p)`.
pub fn homogenize_affine(g: &IntVector, gamma: &BigInt, beta: &BigInt) -> IntVector {
    g.scaled(beta).prepend(-gamma)
}

/// The kernel basis and the bookkeeping of the projection onto it.
#[derive(Clone, Debug)]
pub struct ProjectionContext {
    t: IntMatrix,
    basis: Vec<IntVector>,
    g_rank: usize,
    ray_map: Vec<Option<usize>>,
    multiplicity: Vec<usize>,
    zero_projections: usize,
    distinct_raw: usize,
}

impl ProjectionContext {
    /// `T`, of shape `ambient_dim x K`, whose columns span `ker G`.
    pub fn t(&self) -> &IntMatrix {
        &self.t
    }

    /// The columns of `T`.
    pub fn kernel_basis(&self) -> &[IntVector] {
        &self.basis
    }

    pub fn kernel_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn g_rank(&self) -> usize {
        self.g_rank
    }

    /// For each original ray, the index of its projected ray; `None` when the
    /// projection vanishes.
    pub fn ray_map(&self) -> &[Option<usize>] {
        &self.ray_map
    }

    /// Number of original rays mapped onto each projected ray.
    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    pub fn zero_projections(&self) -> usize {
        self.zero_projections
    }

    /// Number of distinct nonzero vectors `T^T w` before scaling them to
    /// primitive form.
    pub fn distinct_raw_projections(&self) -> usize {
        self.distinct_raw
    }

    /// Size of the image of the ray set under `w -> T^T w`, counting the zero
    /// vector when some ray is mapped to it.
    pub fn distinct_images(&self) -> usize {
        self.distinct_raw + usize::from(self.zero_projections > 0)
    }

    /// `T^T w` for a vector of the original space.
    pub fn project(&self, w: &IntVector) -> IntVector {
        self.basis.iter().map(|t| t.dot(w)).collect()
    }
}

/// Projects the rays of `c` onto `ker G` and returns the projected cone.
pub fn build_projection(c: &Cone, cs: &ConstraintSystem) -> Result<(ProjectionContext, Cone), ConstrainedError> {
    let d = c.ambient_dim();
    if cs.g.ncols() != d {
        return Err(ConstrainedError::DimensionMismatch { expected: d, found: cs.g.ncols() });
    }
    if !c.is_full_dimensional() {
        return Err(ConeError::NotFullDimensional { rank: c.rank(), ambient_dim: d }.into());
    }
    let basis = linalg::integer_kernel_basis(&cs.g);
    if basis.is_empty() {
        return Err(ConstrainedError::NoFreedom);
    }
    let g_rank = d - basis.len();
    let t = IntMatrix::from_columns(d, &basis)?;

    let mut index: HashMap<IntVector, usize> = HashMap::new();
    let mut raw_seen = std::collections::HashSet::new();
    let mut projected = Vec::new();
    let mut multiplicity = Vec::new();
    let mut ray_map = Vec::with_capacity(c.len());
    let mut zero_projections = 0;
    for w in c.rays() {
        let raw: IntVector = basis.iter().map(|t| t.dot(w)).collect();
        let Ok(p) = linalg::primitive(&raw) else {
            // tight on every candidate normal; constrains nothing
            zero_projections += 1;
            ray_map.push(None);
            continue;
        };
        raw_seen.insert(raw);
        let next = projected.len();
        let slot = *index.entry(p.clone()).or_insert_with(|| {
            projected.push(p);
            multiplicity.push(0);
            next
        });
        multiplicity[slot] += 1;
        ray_map.push(Some(slot));
    }
    if zero_projections > 0 {
        debug!("dropped {zero_projections} rays with zero projection");
    }
    let k = basis.len();
    let ctx =
        ProjectionContext { t, basis, g_rank, ray_map, multiplicity, zero_projections, distinct_raw: raw_seen.len() };
    Ok((ctx, Cone::new(k, projected)?))
}

/// Maps a normal of the projected cone back to the original space: `T b~`.
pub fn lift_candidate(
    ctx: &ProjectionContext,
    candidate: &LinearInequality,
) -> Result<LinearInequality, ConstrainedError> {
    let b = ctx.t.mul_vec(candidate.normal())?;
    if b.is_zero() {
        return Err(ConstrainedError::ZeroLift);
    }
    Ok(LinearInequality::new(b)?)
}

/// Result of a constrained facet search.
#[derive(Clone, Debug)]
pub struct ConstrainedFacets {
    pub context: ProjectionContext,
    pub projected: Cone,
    /// Number of facets of the projected cone.
    pub candidates: usize,
    /// Facets of the original cone obeying the constraints, sorted.
    pub facets: Vec<LinearInequality>,
    /// Lifted candidates that are valid faces but not facets of the original cone.
    pub rejected: Vec<(LinearInequality, FacetReport)>,
    pub timings: Timings,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timings {
    pub projection: Duration,
    pub enumeration: Duration,
    pub verification: Duration,
}

/// All facets `b` of `c` with `G b = 0`.
pub fn constrained_facets(c: &Cone, cs: &ConstraintSystem) -> Result<ConstrainedFacets, ConstrainedError> {
    let start = Instant::now();
    let (context, projected) = build_projection(c, cs)?;
    let projection = start.elapsed();
    let start = Instant::now();
    let candidates = cone::enumerate_facets(&projected)?;
    let enumeration = start.elapsed();
    let start = Instant::now();
    let checked: Vec<(LinearInequality, FacetReport)> = candidates
        .par_iter()
        .map(|cand| {
            let lifted = lift_candidate(&context, cand)?;
            let report = cone::is_facet(c, &lifted)?;
            Ok((lifted, report))
        })
        .collect::<Result<_, ConstrainedError>>()?;

    let mut facets = Vec::new();
    let mut rejected = Vec::new();
    for (lifted, report) in checked {
        debug_assert!(cs.is_satisfied_by(lifted.normal()));
        if report.is_facet {
            facets.push(lifted);
        } else {
            rejected.push((lifted, report));
        }
    }
    facets.sort();
    facets.dedup();
    let timings = Timings { projection, enumeration, verification: start.elapsed() };
    Ok(ConstrainedFacets { context, projected, candidates: candidates.len(), facets, rejected, timings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::embed_polytope;

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_i64s(x)
    }

    fn square() -> Cone {
        embed_polytope(&[v(&[1, 1]), v(&[1, -1]), v(&[-1, 1]), v(&[-1, -1])]).unwrap()
    }

    #[test]
    fn unconstrained_projection_is_identity() {
        let c = square();
        let (ctx, projected) = build_projection(&c, &ConstraintSystem::unconstrained(3)).unwrap();
        assert_eq!(ctx.t(), &IntMatrix::identity(3));
        assert_eq!(projected.rays(), c.rays());
        assert_eq!(ctx.kernel_dim(), 3);
        let cand = LinearInequality::new(v(&[1, 0, 1])).unwrap();
        assert_eq!(lift_candidate(&ctx, &cand).unwrap(), cand);
        let out = constrained_facets(&c, &ConstraintSystem::unconstrained(3)).unwrap();
        assert_eq!(out.facets, cone::enumerate_facets(&c).unwrap());
    }

    #[test]
    fn zero_rows_behave_like_no_rows() {
        let c = square();
        let cs = ConstraintSystem::from_rows(3, vec![v(&[0, 0, 0])]).unwrap();
        let out = constrained_facets(&c, &cs).unwrap();
        assert_eq!(out.facets.len(), 4);
    }

    #[test]
    fn constraint_selects_matching_facets() {
        // b = (beta, b1, b2) with b2 = 0 keeps the two facets 1 +- x >= 0
        let c = square();
        let cs = ConstraintSystem::from_rows(3, vec![v(&[0, 0, 1])]).unwrap();
        let out = constrained_facets(&c, &cs).unwrap();
        let normals: Vec<_> = out.facets.iter().map(|f| f.normal().clone()).collect();
        assert_eq!(normals, vec![v(&[1, -1, 0]), v(&[1, 1, 0])]);
        assert_eq!(out.context.kernel_dim(), 2);
        assert_eq!(out.context.g_rank(), 1);
    }

    #[test]
    fn full_rank_constraints_leave_no_freedom() {
        let c = square();
        let cs = ConstraintSystem::new(IntMatrix::identity(3));
        assert_eq!(build_projection(&c, &cs).unwrap_err(), ConstrainedError::NoFreedom);
    }

    #[test]
    fn rays_can_vanish_under_projection() {
        // ker G = span(e1); rays with zero first coordinate project to zero
        let c = Cone::new(3, vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1]), v(&[0, -1, -1])]).unwrap();
        let cs = ConstraintSystem::from_rows(3, vec![v(&[0, 1, 0]), v(&[0, 0, 1])]).unwrap();
        let out = constrained_facets(&c, &cs).unwrap();
        assert_eq!(out.context.zero_projections(), 3);
        assert_eq!(out.projected.rays(), &[v(&[1])]);
        assert_eq!(out.context.ray_map(), &[Some(0), None, None, None]);
        let normals: Vec<_> = out.facets.iter().map(|f| f.normal().clone()).collect();
        assert_eq!(normals, vec![v(&[1, 0, 0])]);
    }

    #[test]
    fn lower_dimensional_cones_are_rejected() {
        let c = Cone::new(3, vec![v(&[1, 0, 0]), v(&[0, 1, 0])]).unwrap();
        let err = build_projection(&c, &ConstraintSystem::unconstrained(3)).unwrap_err();
        assert_eq!(err, ConstrainedError::Cone(ConeError::NotFullDimensional { rank: 2, ambient_dim: 3 }));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let cs = ConstraintSystem::unconstrained(4);
        assert_eq!(
            build_projection(&square(), &cs).unwrap_err(),
            ConstrainedError::DimensionMismatch { expected: 3, found: 4 }
        );
    }

    #[test]
    fn projection_identity_holds() {
        let c = square();
        let cs = ConstraintSystem::from_rows(3, vec![v(&[1, 2, -1])]).unwrap();
        let (ctx, _) = build_projection(&c, &cs).unwrap();
        let cand = LinearInequality::new(v(&[3, -2])).unwrap();
        let lifted = ctx.t().mul_vec(cand.normal()).unwrap();
        assert!(cs.is_satisfied_by(&lifted));
        for w in c.rays() {
            assert_eq!(w.dot(&lifted), ctx.project(w).dot(cand.normal()));
        }
    }

    #[test]
    fn affine_rows_are_homogeneous() {
        // g . b = 3 with beta = 2 on b = (1, 1): (beta, b) = (2, 1, 1)
        let row = homogenize_affine(&v(&[1, 2]), &BigInt::from(3), &BigInt::from(2));
        assert_eq!(row, v(&[-3, 2, 4]));
        assert_eq!(row.dot(&v(&[2, 1, 1])), BigInt::from(0));
    }
}
