//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's linear algebra.
#![allow(dead_code)]

use std::collections::BTreeSet;

use bellfacets::cone::Cone;
use bellfacets::constrained::ConstraintSystem;
use bellfacets::linalg::IntVector;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn to_rational(rows: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    rows.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect()
}

/// Reduced row echelon form over the rationals; returns the pivot columns.
fn rref(m: &mut [Vec<BigRational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(row, p);
        let lead = m[row][c].clone();
        for x in m[row].iter_mut() {
            *x /= &lead;
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && !other[c].is_zero() {
                let f = other[c].clone();
                for (x, p) in other.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

pub fn rational_rank(rows: &[Vec<BigInt>], cols: usize) -> usize {
    let mut m = to_rational(rows);
    rref(&mut m, cols).len()
}

/// Basis of `{x : rows x = 0}` over the rationals.
pub fn rational_kernel(rows: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut m = to_rational(rows);
    let pivots = rref(&mut m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); cols];
            x[f] = BigRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = -m[r][f].clone();
            }
            x
        })
        .collect()
}

/// Integer multiple of `x` with coprime entries.
pub fn clear_denominators(x: &[BigRational]) -> Vec<BigInt> {
    let lcm = x.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = x.iter().map(|q| (q * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|v| v / &g).collect()
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn subsets(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else { return };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Facets of the cone spanned by `rays` in `R^d` (assumed full-dimensional):
/// every hyperplane through `d - 1` independent rays that has all rays on
/// one side.
pub fn brute_force_facets(rays: &[Vec<BigInt>], d: usize) -> BTreeSet<Vec<BigInt>> {
    let mut out = BTreeSet::new();
    if d == 1 {
        let sign = rays[0][0].signum();
        out.insert(vec![sign]);
        return out;
    }
    subsets(rays.len(), d - 1, |s| {
        let rows: Vec<Vec<BigInt>> = s.iter().map(|&i| rays[i].clone()).collect();
        let kernel = rational_kernel(&rows, d);
        if kernel.len() != 1 {
            return;
        }
        let b = clear_denominators(&kernel[0]);
        let values: Vec<BigInt> = rays.iter().map(|r| dot(r, &b)).collect();
        if values.iter().all(|v| !v.is_negative()) {
            out.insert(b);
        } else if values.iter().all(|v| !v.is_positive()) {
            out.insert(b.iter().map(|x| -x).collect());
        }
    });
    out
}

pub fn to_rows(vs: &[IntVector]) -> Vec<Vec<BigInt>> {
    vs.iter().map(|v| v.entries().to_vec()).collect()
}

pub fn to_vectors(rows: &[Vec<BigInt>]) -> Vec<IntVector> {
    rows.iter().map(|r| IntVector::new(r.clone())).collect()
}

pub fn small(x: &[i64]) -> Vec<BigInt> {
    x.iter().map(|&v| BigInt::from(v)).collect()
}

/// A random full-dimensional cone with at most `max_rays` rays in dimension
/// at most `max_dim`.
pub fn random_cone(rng: &mut ChaCha8Rng, max_rays: usize, max_dim: usize) -> (Vec<Vec<BigInt>>, usize) {
    loop {
        let d = rng.gen_range(2..=max_dim);
        let n = rng.gen_range(d..=max_rays.max(d));
        let bound = rng.gen_range(1..=3);
        // a positive first coordinate keeps the cone pointed
        let rays: Vec<Vec<BigInt>> = (0..n)
            .map(|_| {
                let mut r = vec![rng.gen_range(1..=bound)];
                r.extend((1..d).map(|_| rng.gen_range(-bound..=bound)));
                small(&r)
            })
            .collect();
        if rational_rank(&rays, d) == d {
            return (rays, d);
        }
    }
}

fn random_row(rng: &mut ChaCha8Rng, d: usize) -> Vec<BigInt> {
    (0..d).map(|_| BigInt::from(rng.gen_range(-2i64..=2))).collect()
}

/// Random constraint rows: some generic, some orthogonal to chosen facets,
/// some saturation rows built from rays, so that both empty and nonempty
/// answers occur.
pub fn random_constraints(
    rng: &mut ChaCha8Rng,
    rays: &[Vec<BigInt>],
    d: usize,
    facets: &BTreeSet<Vec<BigInt>>,
) -> Vec<Vec<BigInt>> {
    let k = rng.gen_range(0..d);
    let facet_list: Vec<&Vec<BigInt>> = facets.iter().collect();
    match rng.gen_range(0..3) {
        0 => (0..k).map(|_| random_row(rng, d)).collect(),
        1 => {
            // rows orthogonal to one or two facets
            let count = rng.gen_range(1..=2);
            let chosen: Vec<&Vec<BigInt>> = facet_list.choose_multiple(rng, count).copied().collect();
            (0..k)
                .map(|_| {
                    let mut w = random_row(rng, d);
                    for b in &chosen {
                        let bb = dot(b, b);
                        let wb = dot(&w, b);
                        w = w.iter().zip(b.iter()).map(|(x, y)| x * &bb - y * &wb).collect();
                    }
                    w
                })
                .collect()
        }
        _ => {
            // rows are rays, so admissible normals vanish on them
            let mut idx: Vec<usize> = (0..rays.len()).collect();
            idx.shuffle(rng);
            idx.into_iter().take(k).map(|i| rays[i].clone()).collect()
        }
    }
}

pub struct ConstrainedCase {
    pub rays: Vec<Vec<BigInt>>,
    pub dim: usize,
    pub constraints: Vec<Vec<BigInt>>,
}

impl ConstrainedCase {
    pub fn cone(&self) -> Cone {
        Cone::new(self.dim, to_vectors(&self.rays)).unwrap()
    }

    pub fn system(&self) -> ConstraintSystem {
        ConstraintSystem::from_rows(self.dim, to_vectors(&self.constraints)).unwrap()
    }

    /// Brute-force facets of the cone whose normals satisfy every constraint.
    pub fn oracle(&self) -> BTreeSet<Vec<BigInt>> {
        brute_force_facets(&self.rays, self.dim)
            .into_iter()
            .filter(|b| self.constraints.iter().all(|g| dot(g, b).is_zero()))
            .collect()
    }
}

pub fn random_case(rng: &mut ChaCha8Rng, max_rays: usize, max_dim: usize) -> ConstrainedCase {
    let (rays, dim) = random_cone(rng, max_rays, max_dim);
    let facets = brute_force_facets(&rays, dim);
    let constraints = random_constraints(rng, &rays, dim, &facets);
    ConstrainedCase { rays, dim, constraints }
}

/// Correlators of a deterministic strategy given as explicit outcome tables,
/// one `Vec<i64>` per party indexed by setting `1..=I`.
pub fn correlations(outcomes: &[Vec<i64>], settings: usize) -> Vec<BigInt> {
    let n = outcomes.len();
    let width = settings + 1;
    let total = width.pow(n as u32);
    (0..total)
        .map(|mut j| {
            let mut multi = vec![0; n];
            for p in (0..n).rev() {
                multi[p] = j % width;
                j /= width;
            }
            let v: i64 = multi.iter().enumerate().map(|(p, &i)| if i == 0 { 1 } else { outcomes[p][i - 1] }).product();
            BigInt::from(v)
        })
        .collect()
}

/// All deterministic strategies, built from explicit outcome tables.
pub fn strategies(parties: usize, settings: usize) -> Vec<Vec<BigInt>> {
    let bits = parties * settings;
    (0..1usize << bits)
        .map(|k| {
            let outcomes: Vec<Vec<i64>> = (0..parties)
                .map(|p| (0..settings).map(|i| if k >> (p * settings + i) & 1 == 0 { 1 } else { -1 }).collect())
                .collect();
            correlations(&outcomes, settings)
        })
        .collect()
}
