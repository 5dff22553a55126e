//! Exact integer linear algebra.
//!
//! All arithmetic is carried out on arbitrary-precision integers. Rank uses
//! Bareiss elimination; kernels use fraction-free Gauss-Jordan elimination
//! with content removal, so no rational number is ever formed. Pivots are
//! always chosen as the first usable column, then the first nonzero row in
//! that column, which makes every result reproducible.

use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("the zero vector has no primitive form")]
    ZeroVector,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// A vector of exact integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVector(Vec<BigInt>);

impl IntVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        Self(entries)
    }

    pub fn from_i64s(entries: &[i64]) -> Self {
        Self(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![BigInt::zero(); len])
    }

    /// The `i`-th standard basis vector of length `len`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[i] = BigInt::one();
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BigInt> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Number of nonzero entries.
    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|x| !x.is_zero()).count()
    }

    /// Exact dot product. Panics if the lengths differ.
    pub fn dot(&self, other: &IntVector) -> BigInt {
        assert_eq!(self.len(), other.len(), "dot product of vectors with different lengths");
        self.0.iter().zip(&other.0).filter(|(a, b)| !a.is_zero() && !b.is_zero()).map(|(a, b)| a * b).sum()
    }

    /// Nonnegative gcd of all entries; zero for the zero vector.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for x in &self.0 {
            if !x.is_zero() {
                g = g.gcd(x);
                if g.is_one() {
                    break;
                }
            }
        }
        g
    }

    pub fn scaled(&self, factor: &BigInt) -> IntVector {
        Self(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn neg(&self) -> IntVector {
        Self(self.0.iter().map(|x| -x).collect())
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: &BigInt, other: &IntVector, b: &BigInt) -> IntVector {
        assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(x, y)| a * x + b * y).collect())
    }

    /// Entries as machine integers, if all of them fit.
    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }

    /// Prepends `head` to the entries.
    pub fn prepend(&self, head: BigInt) -> IntVector {
        let mut entries = Vec::with_capacity(self.len() + 1);
        entries.push(head);
        entries.extend(self.0.iter().cloned());
        Self(entries)
    }
}

impl Index<usize> for IntVector {
    type Output = BigInt;

    fn index(&self, i: usize) -> &BigInt {
        &self.0[i]
    }
}

impl From<Vec<BigInt>> for IntVector {
    fn from(entries: Vec<BigInt>) -> Self {
        Self(entries)
    }
}

impl FromIterator<BigInt> for IntVector {
    fn from_iter<T: IntoIterator<Item = BigInt>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A rectangular matrix of exact integers, stored by rows.
///
/// The column count is stored explicitly so that matrices without rows still
/// know their width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    cols: usize,
    rows: Vec<IntVector>,
}

impl IntMatrix {
    pub fn new(cols: usize, rows: Vec<IntVector>) -> Result<Self, LinalgError> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(LinalgError::LengthMismatch { expected: cols, found: bad.len() });
        }
        Ok(Self { cols, rows })
    }

    pub fn from_i64_rows(cols: usize, rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        Self::new(cols, rows.iter().map(|r| IntVector::from_i64s(r)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { cols, rows: vec![IntVector::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        Self { cols: n, rows: (0..n).map(|i| IntVector::unit(n, i)).collect() }
    }

    /// Builds the matrix whose columns are `columns`, each of length `height`.
    pub fn from_columns(height: usize, columns: &[IntVector]) -> Result<Self, LinalgError> {
        if let Some(bad) = columns.iter().find(|c| c.len() != height) {
            return Err(LinalgError::LengthMismatch { expected: height, found: bad.len() });
        }
        let rows = (0..height).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
        Ok(Self { cols: columns.len(), rows })
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[IntVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &IntVector {
        &self.rows[i]
    }

    pub fn column(&self, j: usize) -> IntVector {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    pub fn push_row(&mut self, row: IntVector) -> Result<(), LinalgError> {
        if row.len() != self.cols {
            return Err(LinalgError::LengthMismatch { expected: self.cols, found: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn transpose(&self) -> IntMatrix {
        let rows = (0..self.cols).map(|j| self.column(j)).collect();
        IntMatrix { cols: self.rows.len(), rows }
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &IntVector) -> Result<IntVector, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::LengthMismatch { expected: self.cols, found: v.len() });
        }
        Ok(self.rows.iter().map(|r| r.dot(v)).collect())
    }

    /// `v^T * self`, i.e. the row vector times the matrix.
    pub fn left_mul(&self, v: &IntVector) -> Result<IntVector, LinalgError> {
        if v.len() != self.rows.len() {
            return Err(LinalgError::LengthMismatch { expected: self.rows.len(), found: v.len() });
        }
        let mut out = vec![BigInt::zero(); self.cols];
        for (coef, row) in v.iter().zip(&self.rows) {
            if coef.is_zero() {
                continue;
            }
            for (acc, x) in out.iter_mut().zip(row.iter()) {
                if !x.is_zero() {
                    *acc += coef * x;
                }
            }
        }
        Ok(IntVector(out))
    }
}

/// Divides `v` by the positive gcd of its entries.
pub fn primitive(v: &IntVector) -> Result<IntVector, LinalgError> {
    let g = v.content();
    if g.is_zero() {
        return Err(LinalgError::ZeroVector);
    }
    if g.is_one() {
        return Ok(v.clone());
    }
    Ok(v.iter().map(|x| x / &g).collect())
}

/// Rank over the rationals.
pub fn rank(m: &IntMatrix) -> usize {
    rank_of_rows(m.rows.iter(), m.cols)
}

/// Rank of `m` with `extra` appended as one more row.
pub fn rank_with_rows(m: &IntMatrix, extra: &IntVector) -> Result<usize, LinalgError> {
    if extra.len() != m.cols {
        return Err(LinalgError::LengthMismatch { expected: m.cols, found: extra.len() });
    }
    Ok(rank_of_rows(m.rows.iter().chain(std::iter::once(extra)), m.cols))
}

/// Rank of a set of rows given by reference, each of length `cols`.
pub fn rank_of_rows<'a, I>(rows: I, cols: usize) -> usize
where
    I: IntoIterator<Item = &'a IntVector>,
{
    let mut a: Vec<Vec<BigInt>> = rows
        .into_iter()
        .filter(|r| !r.is_zero())
        .map(|r| {
            assert_eq!(r.len(), cols, "row length differs from column count");
            r.0.clone()
        })
        .collect();
    bareiss_rank(&mut a, cols)
}

fn bareiss_rank(a: &mut [Vec<BigInt>], cols: usize) -> usize {
    let nrows = a.len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (head, tail) = a.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        let pivot = &pivot_row[col];
        for row in tail.iter_mut() {
            let lead = std::mem::take(&mut row[col]);
            for c in col + 1..cols {
                // Sylvester's identity makes this division exact
                let mut v = pivot * &row[c];
                if !lead.is_zero() && !pivot_row[c].is_zero() {
                    v -= &lead * &pivot_row[c];
                }
                if !prev.is_one() {
                    v /= &prev;
                }
                row[c] = v;
            }
        }
        prev = pivot.clone();
        rank += 1;
    }
    rank
}

/// Reduced row echelon form computed without fractions.
///
/// Returns the nonzero reduced rows (each primitive, positive pivot) and the
/// pivot column of each row. Every non-pivot entry of a pivot column is zero.
pub fn integer_rref(m: &IntMatrix) -> (Vec<IntVector>, Vec<usize>) {
    let mut a: Vec<Vec<BigInt>> = m.rows.iter().filter(|r| !r.is_zero()).map(|r| r.0.clone()).collect();
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..m.cols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        if a[rank][col].is_negative() {
            for x in a[rank].iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        remove_content(&mut a[rank]);
        let pivot_row = a[rank].clone();
        let pivot = &pivot_row[col];
        for (r, row) in a.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let lead = std::mem::take(&mut row[col]);
            for c in 0..m.cols {
                if c == col {
                    continue;
                }
                let mut v = pivot * &row[c];
                if !pivot_row[c].is_zero() {
                    v -= &lead * &pivot_row[c];
                }
                row[c] = v;
            }
            remove_content(row);
        }
        pivots.push(col);
        rank += 1;
    }
    a.truncate(rank);
    (a.into_iter().map(IntVector).collect(), pivots)
}

fn remove_content(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in row.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                return;
            }
        }
    }
    if g.is_zero() {
        return;
    }
    for x in row.iter_mut() {
        *x /= &g;
    }
}

/// A basis of the rational kernel of `m` made of primitive integer vectors.
///
/// One vector per free column, in increasing free-column order; the vector
/// for free column `f` is positive at `f` and zero at every other free column.
/// The vectors are not normalized in any other way.
pub fn integer_kernel_basis(m: &IntMatrix) -> Vec<IntVector> {
    let (rref, pivots) = integer_rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::with_capacity(m.cols - pivots.len());
    for free in (0..m.cols).filter(|&c| !is_pivot[c]) {
        // x_free = L, x_pivot(i) = -row_i[free] * L / row_i[pivot(i)]
        let mut scale = BigInt::one();
        for (row, &p) in rref.iter().zip(&pivots) {
            if !row[free].is_zero() {
                scale = scale.lcm(&row[p]);
            }
        }
        let mut x = vec![BigInt::zero(); m.cols];
        x[free] = scale.clone();
        for (row, &p) in rref.iter().zip(&pivots) {
            if !row[free].is_zero() {
                x[p] = -(&row[free] * &scale / &row[p]);
            }
        }
        let x = IntVector(x);
        basis.push(primitive(&x).expect("kernel vector has a nonzero free entry"));
    }
    basis
}

/// Incrementally built echelon basis used for independence tests.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    cols: usize,
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl EchelonBasis {
    pub fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` if it is independent of the rows so far; reports whether it was.
    pub fn insert(&mut self, v: &IntVector) -> bool {
        assert_eq!(v.len(), self.cols);
        let mut x = v.0.clone();
        // each stored row vanishes at the pivots of the rows stored before it
        for (p, row) in &self.rows {
            if x[*p].is_zero() {
                continue;
            }
            let lead = x[*p].clone();
            for (xi, ri) in x.iter_mut().zip(row) {
                let mut t = &row[*p] * &*xi;
                if !ri.is_zero() {
                    t -= &lead * ri;
                }
                *xi = t;
            }
            remove_content(&mut x);
        }
        match x.iter().position(|e| !e.is_zero()) {
            Some(p) => {
                self.rows.push((p, x));
                true
            }
            None => false,
        }
    }
}

/// Primes just below powers of two, `2^61 - 1` first.
const PRIMES: [u64; 10] = [
    (1 << 61) - 1,
    (1 << 62) - 57,
    (1 << 60) - 93,
    (1 << 59) - 55,
    (1 << 58) - 27,
    (1 << 57) - 13,
    (1 << 56) - 5,
    (1 << 55) - 55,
    (1 << 54) - 33,
    (1 << 53) - 111,
];
const MODULUS: u64 = PRIMES[0];

fn reduce_mod(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits in u64")
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn residue_i64(x: i64, m: u64) -> u64 {
    x.rem_euclid(m as i64) as u64
}

fn residue(x: &BigInt, m: u64) -> u64 {
    x.to_i64().map_or_else(|| reduce_mod(x, m), |v| residue_i64(v, m))
}

/// Row echelon basis modulo a prime; every basis row has a leading `1` and
/// zeros at the pivots of the rows inserted before it.
struct ModularEchelon {
    modulus: u64,
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModularEchelon {
    fn insert(&mut self, mut row: Vec<u64>) {
        let m = self.modulus;
        for (pc, prow) in &self.rows {
            let factor = row[*pc];
            if factor == 0 {
                continue;
            }
            for c in *pc..row.len() {
                let sub = mul_mod(factor, prow[c], m);
                row[c] = (row[c] + m - sub) % m;
            }
        }
        if let Some(pc) = row.iter().position(|&x| x != 0) {
            let inv = pow_mod(row[pc], m - 2, m);
            for x in &mut row[pc..] {
                *x = mul_mod(*x, inv, m);
            }
            self.rows.push((pc, row));
        }
    }
}

fn modular_rank(modulus: u64, rows: impl Iterator<Item = Vec<u64>>, stop_at: usize) -> usize {
    let mut echelon = ModularEchelon { modulus, rows: Vec::new() };
    for row in rows {
        if echelon.rows.len() >= stop_at {
            break;
        }
        echelon.insert(row);
    }
    echelon.rows.len()
}

/// Upper bound on `log2 |M|` over all square minors `M`, from Hadamard's
/// inequality applied to the largest row norms.
fn hadamard_log2<'a>(rows: impl Iterator<Item = &'a IntVector>, cols: usize) -> f64 {
    let mut logs: Vec<f64> = rows
        .map(|r| {
            let sq: BigInt = r.iter().map(|x| x * x).sum();
            if sq.is_zero() {
                0.0
            } else {
                (sq.bits() as f64) / 2.0
            }
        })
        .collect();
    logs.sort_by(|a, b| b.total_cmp(a));
    logs.iter().take(cols).sum()
}

/// Rank of the rows reduced modulo the prime 2^61 - 1.
///
/// This never exceeds the rational rank, so it certifies a lower bound: if it
/// already reaches the largest possible value, the exact rank is known without
/// big-integer elimination.
pub fn rank_lower_bound<'a, I>(rows: I, cols: usize) -> usize
where
    I: IntoIterator<Item = &'a IntVector>,
{
    modular_rank(MODULUS, rows.into_iter().map(|r| r.iter().map(|x| residue(x, MODULUS)).collect()), cols)
}

/// As [`rank_lower_bound`] for rows given as machine integers.
pub fn rank_lower_bound_i64<'a, I>(rows: I, cols: usize) -> usize
where
    I: IntoIterator<Item = &'a [i64]>,
{
    modular_rank(MODULUS, rows.into_iter().map(|r| r.iter().map(|&x| residue_i64(x, MODULUS)).collect()), cols)
}

/// Exact dot product of machine integers, `None` on overflow.
pub fn dot_i64(a: &[i64], b: &[i64]) -> Option<i128> {
    a.iter().zip(b).try_fold(0i128, |acc, (&x, &y)| acc.checked_add(x as i128 * y as i128))
}

/// Exact rank from ranks modulo several primes.
///
/// Each modular rank is a lower bound. If the exact rank `R` were larger than
/// all of them, every prime would divide some fixed nonzero `R x R` minor, so
/// once the product of the primes exceeds the Hadamard bound the largest
/// modular rank is exact. `ceiling` is an upper bound known to the caller
/// (for example `cols - 1` for rows lying in a hyperplane) and stops the
/// search early.
pub fn rank_with_ceiling<'a, I>(rows: I, cols: usize, ceiling: usize) -> usize
where
    I: IntoIterator<Item = &'a IntVector> + Clone,
{
    let stop_at = ceiling.min(cols);
    let mut best = 0;
    let mut covered = 0.0;
    let mut needed = None;
    for &p in &PRIMES {
        let r = modular_rank(p, rows.clone().into_iter().map(|r| r.iter().map(|x| residue(x, p)).collect()), stop_at);
        best = best.max(r);
        if best >= stop_at {
            return best;
        }
        covered += ((p - 1) as f64).log2().floor();
        let needed = *needed.get_or_insert_with(|| hadamard_log2(rows.clone().into_iter(), cols) + 1.0);
        if covered > needed {
            return best;
        }
    }
    rank_of_rows(rows, cols)
}
