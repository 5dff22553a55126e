//! Polyhedral cones given by generating rays.
//!
//! A polytope with vertices `v_i` corresponds to the cone generated by the
//! vectors `(1, v_i)`. An inequality `x . b >= -beta` on the polytope becomes
//! `(1, x) . (beta, b) >= 0` on the cone, and facets correspond one-to-one.
//! Facet normals are always stored as primitive integer vectors with the
//! orientation `ray . normal >= 0`.

mod dd;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{self, IntVector, LinalgError};

pub use dd::Adjacency;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConeError {
    #[error("no generators given")]
    EmptyInput,
    #[error("the cone has no rays")]
    EmptyCone,
    #[error("ambient dimension must be positive")]
    ZeroDimension,
    #[error("cone is not full-dimensional (rank {rank} in dimension {ambient_dim}); project onto its span first")]
    NotFullDimensional { rank: usize, ambient_dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ray {index} is zero")]
    ZeroRay { index: usize },
    #[error("inequality normal is zero")]
    ZeroNormal,
}

impl From<LinalgError> for ConeError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::ZeroVector => ConeError::ZeroNormal,
            LinalgError::LengthMismatch { expected, found } => ConeError::DimensionMismatch { expected, found },
        }
    }
}

/// A cone given by primitive, pairwise distinct, nonzero generating rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    ambient_dim: usize,
    rays: Vec<IntVector>,
    small: Option<Vec<Vec<i64>>>,
}

impl Cone {
    /// Builds a cone, making every ray primitive and dropping repeated rays.
    /// The first occurrence of each ray keeps its position.
    pub fn new(ambient_dim: usize, rays: Vec<IntVector>) -> Result<Self, ConeError> {
        if ambient_dim == 0 {
            return Err(ConeError::ZeroDimension);
        }
        let mut seen = std::collections::HashSet::new();
        let mut kept = Vec::with_capacity(rays.len());
        for (index, ray) in rays.into_iter().enumerate() {
            if ray.len() != ambient_dim {
                return Err(ConeError::DimensionMismatch { expected: ambient_dim, found: ray.len() });
            }
            let ray = linalg::primitive(&ray).map_err(|_| ConeError::ZeroRay { index })?;
            if seen.insert(ray.clone()) {
                kept.push(ray);
            }
        }
        let small = kept.iter().map(IntVector::to_i64s).collect();
        Ok(Self { ambient_dim, rays: kept, small })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rays(&self) -> &[IntVector] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Dimension of the linear span of the rays.
    pub fn rank(&self) -> usize {
        linalg::rank_of_rows(&self.rays, self.ambient_dim)
    }

    pub fn is_full_dimensional(&self) -> bool {
        let d = self.ambient_dim;
        linalg::rank_with_ceiling(self.rays.iter(), d, d) == d
    }
}

/// The homogeneous inequality `x . normal >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearInequality {
    normal: IntVector,
}

impl LinearInequality {
    /// Primitive form of `normal`; errors on the zero vector.
    pub fn new(normal: IntVector) -> Result<Self, ConeError> {
        Ok(Self { normal: linalg::primitive(&normal)? })
    }

    pub fn normal(&self) -> &IntVector {
        &self.normal
    }

    pub fn into_normal(self) -> IntVector {
        self.normal
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn evaluate(&self, x: &IntVector) -> BigInt {
        self.normal.dot(x)
    }
}

/// Whether a generator of a polyhedron is a point or a direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Vertex,
    Ray,
}

/// The cone over a polytope: every vertex gets a leading coordinate 1.
pub fn embed_polytope(vertices: &[IntVector]) -> Result<Cone, ConeError> {
    let generators: Vec<_> = vertices.iter().map(|v| (GeneratorKind::Vertex, v.clone())).collect();
    embed_polyhedron(&generators)
}

/// The cone over a polyhedron: vertices get leading coordinate 1, rays 0.
pub fn embed_polyhedron(generators: &[(GeneratorKind, IntVector)]) -> Result<Cone, ConeError> {
    let Some((_, first)) = generators.first() else {
        return Err(ConeError::EmptyInput);
    };
    let dim = first.len();
    let rays = generators
        .iter()
        .map(|(kind, v)| {
            if v.len() != dim {
                return Err(ConeError::DimensionMismatch { expected: dim, found: v.len() });
            }
            let head = match kind {
                GeneratorKind::Vertex => BigInt::one(),
                GeneratorKind::Ray => BigInt::zero(),
            };
            Ok(v.prepend(head))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Cone::new(dim + 1, rays)
}

/// Converts the polytope inequality `x . b_p >= -beta` to the cone normal `(beta, b_p)`.
pub fn polytope_inequality_to_cone(b_p: &IntVector, beta: &BigInt) -> Result<LinearInequality, ConeError> {
    LinearInequality::new(b_p.prepend(beta.clone()))
}

/// Splits a cone normal `(beta, b_p)` back into `(b_p, beta)`.
pub fn cone_inequality_to_polytope(ineq: &LinearInequality) -> (IntVector, BigInt) {
    let entries = ineq.normal().entries();
    (entries[1..].iter().cloned().collect(), entries[0].clone())
}

/// All facets of a full-dimensional cone, sorted lexicographically.
///
/// Uses the double description method: the rays of the cone are inserted, in
/// lexicographic order, as constraints of the dual cone, whose extreme rays
/// are the facet normals.
pub fn enumerate_facets(c: &Cone) -> Result<Vec<LinearInequality>, ConeError> {
    enumerate_facets_with(c, Adjacency::Auto)
}

pub fn enumerate_facets_with(c: &Cone, adjacency: Adjacency) -> Result<Vec<LinearInequality>, ConeError> {
    if c.is_empty() {
        return Err(ConeError::EmptyCone);
    }
    let rank = c.rank();
    if rank != c.ambient_dim() {
        return Err(ConeError::NotFullDimensional { rank, ambient_dim: c.ambient_dim() });
    }
    let mut constraints = c.rays().to_vec();
    constraints.sort();
    let normals = dd::dual_extreme_rays(&constraints, c.ambient_dim(), adjacency);
    let mut facets: Vec<LinearInequality> = normals.into_iter().map(|n| LinearInequality { normal: n }).collect();
    facets.sort();
    facets.dedup();
    Ok(facets)
}

/// The reason an inequality fails to be facet-defining.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FacetViolation {
    /// Some ray lies strictly on the wrong side.
    Invalid { ray: usize, value: BigInt },
    /// Valid, but the saturating rays span too little.
    RankDeficit { rank: usize, required: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetReport {
    pub is_facet: bool,
    pub violation: Option<FacetViolation>,
    /// Indices of the rays with `ray . normal == 0`.
    pub saturating: Vec<usize>,
    pub saturation_rank: usize,
}

/// Checks validity on every ray and that the saturating rays have rank `d - 1`.
pub fn is_facet(c: &Cone, ineq: &LinearInequality) -> Result<FacetReport, ConeError> {
    let d = c.ambient_dim();
    if ineq.dim() != d {
        return Err(ConeError::DimensionMismatch { expected: d, found: ineq.dim() });
    }
    let mut invalid = None;
    let mut saturating = Vec::new();
    let mut record = |i: usize, value: BigInt| {
        if value.is_zero() {
            saturating.push(i);
        } else if value.is_negative() && invalid.is_none() {
            invalid = Some(FacetViolation::Invalid { ray: i, value });
        }
    };
    let small_normal = ineq.normal().to_i64s();
    for (i, ray) in c.rays().iter().enumerate() {
        let fast = c.small.as_ref().zip(small_normal.as_ref()).and_then(|(rays, b)| linalg::dot_i64(&rays[i], b));
        match fast {
            Some(0) => record(i, BigInt::zero()),
            Some(v) if v > 0 => {}
            _ => record(i, ineq.evaluate(ray)),
        }
    }
    // saturating rays lie in the hyperplane orthogonal to the normal
    let saturation_rank = match &c.small {
        Some(rays) if linalg::rank_lower_bound_i64(saturating.iter().map(|&i| rays[i].as_slice()), d) >= d - 1 => d - 1,
        _ => {
            let rows: Vec<&IntVector> = saturating.iter().map(|&i| &c.rays()[i]).collect();
            linalg::rank_with_ceiling(rows.iter().copied(), d, d - 1)
        }
    };
    let violation = invalid.or_else(|| {
        (saturation_rank != d - 1).then_some(FacetViolation::RankDeficit { rank: saturation_rank, required: d - 1 })
    });
    Ok(FacetReport { is_facet: violation.is_none(), violation, saturating, saturation_rank })
}
