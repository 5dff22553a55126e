//! Double description method for the dual of a generated cone.
//!
//! Given generators `w_1..w_m` spanning R^d, computes the extreme rays of
//! `{ b : w_i . b >= 0 for all i }` by inserting the constraints one at a time
//! into a simplicial starting cone. Each ray carries the set of inserted
//! constraints it is tight on.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::linalg::{self, EchelonBasis, IntMatrix, IntVector};

/// How two rays are tested for adjacency before being combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Adjacency {
    /// No third ray is tight on every constraint the pair is tight on.
    Combinatorial,
    /// The constraints tight at both rays have rank `d - 2`.
    Algebraic,
    /// Combinatorial while the ray list is small, algebraic beyond that.
    #[default]
    Auto,
}

const AUTO_COMBINATORIAL_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
struct ZeroSet(Vec<u64>);

impl ZeroSet {
    fn empty(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn intersect(&self, other: &ZeroSet) -> ZeroSet {
        ZeroSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_subset(&self, other: &ZeroSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(w, &bits)| (0..64).filter(move |b| bits & (1 << b) != 0).map(move |b| w * 64 + b))
    }
}

struct Ray {
    v: IntVector,
    zeros: ZeroSet,
}

/// Extreme rays of `{ b : a . b >= 0 for a in constraints }`.
///
/// The constraints must span R^dim; they are inserted in the given order.
pub(super) fn dual_extreme_rays(constraints: &[IntVector], dim: usize, adjacency: Adjacency) -> Vec<IntVector> {
    let m = constraints.len();
    let mut echelon = EchelonBasis::new(dim);
    let mut basis = Vec::with_capacity(dim);
    for (i, a) in constraints.iter().enumerate() {
        if echelon.insert(a) {
            basis.push(i);
            if basis.len() == dim {
                break;
            }
        }
    }
    assert_eq!(basis.len(), dim, "constraints must span the ambient space");

    let mut rays = Vec::with_capacity(dim);
    for &i in &basis {
        let others: Vec<IntVector> = basis.iter().filter(|&&j| j != i).map(|&j| constraints[j].clone()).collect();
        let kernel = linalg::integer_kernel_basis(&IntMatrix::new(dim, others).expect("rows have length dim"));
        debug_assert_eq!(kernel.len(), 1);
        let mut v = kernel.into_iter().next().expect("one-dimensional kernel");
        if constraints[i].dot(&v).is_negative() {
            v = v.neg();
        }
        let mut zeros = ZeroSet::empty(m);
        for &j in basis.iter().filter(|&&j| j != i) {
            zeros.insert(j);
        }
        rays.push(Ray { v, zeros });
    }

    let mut in_basis = vec![false; m];
    for &i in &basis {
        in_basis[i] = true;
    }
    for h in (0..m).filter(|&h| !in_basis[h]) {
        rays = add_constraint(rays, constraints, h, dim, adjacency);
        log::trace!("dd: after constraint {h}: {} rays", rays.len());
    }
    rays.into_iter().map(|r| r.v).collect()
}

fn add_constraint(rays: Vec<Ray>, constraints: &[IntVector], h: usize, dim: usize, adjacency: Adjacency) -> Vec<Ray> {
    let a = &constraints[h];
    let values: Vec<BigInt> = rays.par_iter().map(|r| a.dot(&r.v)).collect();
    let pos: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
    let neg: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();

    let mut new_rays = Vec::new();
    if !neg.is_empty() && !pos.is_empty() {
        let combinatorial = match adjacency {
            Adjacency::Combinatorial => true,
            Adjacency::Algebraic => false,
            Adjacency::Auto => rays.len() <= AUTO_COMBINATORIAL_LIMIT,
        };
        let by_row = if combinatorial { rays_by_row(&rays, constraints.len()) } else { Vec::new() };
        new_rays = pos
            .par_iter()
            .flat_map_iter(|&p| {
                let (rays, values, by_row) = (&rays, &values, &by_row);
                neg.iter().filter_map(move |&n| {
                    let common = rays[p].zeros.intersect(&rays[n].zeros);
                    if common.count() + 2 < dim {
                        return None;
                    }
                    let adjacent = if combinatorial {
                        combinatorially_adjacent(rays, by_row, p, n, &common)
                    } else {
                        algebraically_adjacent(constraints, &common, dim)
                    };
                    if !adjacent {
                        return None;
                    }
                    // positive combination that is tight on the new constraint
                    let v = rays[n].v.combine(&values[p], &rays[p].v, &-&values[n]);
                    let v = linalg::primitive(&v).expect("adjacent rays are independent");
                    let mut zeros = common;
                    zeros.insert(h);
                    Some(Ray { v, zeros })
                })
            })
            .collect();
    }

    let mut kept: Vec<Ray> = rays
        .into_iter()
        .zip(values)
        .filter_map(|(mut r, value)| {
            if value.is_negative() {
                None
            } else {
                if value.is_zero() {
                    r.zeros.insert(h);
                }
                Some(r)
            }
        })
        .collect();
    kept.extend(new_rays);
    kept
}

fn rays_by_row(rays: &[Ray], m: usize) -> Vec<Vec<usize>> {
    let mut by_row = vec![Vec::new(); m];
    for (i, r) in rays.iter().enumerate() {
        for row in r.zeros.ones() {
            by_row[row].push(i);
        }
    }
    by_row
}

fn combinatorially_adjacent(rays: &[Ray], by_row: &[Vec<usize>], p: usize, n: usize, common: &ZeroSet) -> bool {
    let shortest = common.ones().map(|row| &by_row[row]).min_by_key(|list| list.len());
    let blocks = |&r: &usize| r != p && r != n && common.is_subset(&rays[r].zeros);
    match shortest {
        Some(list) => !list.iter().any(blocks),
        None => !(0..rays.len()).any(|r| blocks(&r)),
    }
}

fn algebraically_adjacent(constraints: &[IntVector], common: &ZeroSet, dim: usize) -> bool {
    let rows: Vec<&IntVector> = common.ones().map(|i| &constraints[i]).collect();
    // both rays lie in the kernel of these rows, so the rank is at most dim - 2
    linalg::rank_with_ceiling(rows.iter().copied(), dim, dim.saturating_sub(2)) == dim.saturating_sub(2)
}
