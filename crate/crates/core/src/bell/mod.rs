//! Dichotomic Bell scenarios in the correlator representation.
//!
//! Each party has settings `1..=I` plus a trivial setting `0` whose outcome is
//! always `+1`. A correlation vector lists `<A_{i_1} B_{i_2} ...>` for every
//! multi-index in `{0..=I}^N`, flattened row-major with the first party
//! slowest, so entry `0` is the constant `1`. Inequalities are stored as
//! `sum_i b_i <...>_i >= 0` with the bound folded into `b_0`.

pub mod catalog;
mod notation;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cone::Cone;
use crate::linalg::{self, IntVector};

pub use notation::{format_symmetric, parse_symmetric, symmetric_term_count};

/// A correlation vector; entries are indexed as described in the module docs.
pub type CorrelationVector = IntVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BellError {
    #[error("a scenario needs at least one party and one setting, got ({parties},{settings})")]
    InvalidScenario { parties: usize, settings: usize },
    #[error("scenario ({parties},{settings}) is too large")]
    ScenarioTooLarge { parties: usize, settings: usize },
    #[error("expected {expected} coefficients, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("inequality has no nonzero coefficient")]
    ZeroInequality,
    #[error("reduction vanishes identically")]
    ZeroReduction,
    #[error("coefficients are not symmetric under party exchange")]
    NotSymmetric,
    #[error("bad assignment {0:?}")]
    BadAssignment(String),
    #[error("bad setting map: {0}")]
    BadSettingMap(String),
    #[error("{0}")]
    Notation(String),
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("scenario mismatch: {0} vs {1}")]
    ScenarioMismatch(Scenario, Scenario),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    parties: usize,
    settings: usize,
}

impl Scenario {
    pub fn new(parties: usize, settings: usize) -> Result<Self, BellError> {
        if parties == 0 || settings == 0 {
            return Err(BellError::InvalidScenario { parties, settings });
        }
        let too_large = || BellError::ScenarioTooLarge { parties, settings };
        let exp = u32::try_from(parties).map_err(|_| too_large())?;
        (settings + 1).checked_pow(exp).ok_or_else(too_large)?;
        parties.checked_mul(settings).filter(|&b| b < usize::BITS as usize).ok_or_else(too_large)?;
        Ok(Self { parties, settings })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn settings(&self) -> usize {
        self.settings
    }

    /// Length of a correlation vector, `(I+1)^N`.
    pub fn dim(&self) -> usize {
        (self.settings + 1).pow(self.parties as u32)
    }

    /// Number of deterministic strategies, `2^(N I)`.
    pub fn vertex_count(&self) -> usize {
        1 << (self.parties * self.settings)
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        assert_eq!(multi.len(), self.parties);
        multi.iter().fold(0, |acc, &i| {
            assert!(i <= self.settings, "setting {i} out of range");
            acc * (self.settings + 1) + i
        })
    }

    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let base = self.settings + 1;
        let mut out = vec![0; self.parties];
        for slot in out.iter_mut().rev() {
            *slot = index % base;
            index /= base;
        }
        out
    }

    pub fn multi_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.dim()).map(|i| self.multi_index(i))
    }

    /// The same settings count with `parties` parties.
    pub fn with_parties(&self, parties: usize) -> Result<Scenario, BellError> {
        Scenario::new(parties, self.settings)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.parties, self.settings)
    }
}

impl FromStr for Scenario {
    type Err = BellError;

    /// Accepts `N,I`, optionally parenthesized.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let bad = |position: usize, message: &str| BellError::Parse { position, message: message.into() };
        let (n, i) = body.split_once(',').ok_or_else(|| bad(0, "expected N,I"))?;
        let n = n.trim().parse().map_err(|_| bad(0, "bad party count"))?;
        let i = i.trim().parse().map_err(|_| bad(body.find(',').unwrap_or(0) + 1, "bad settings count"))?;
        Scenario::new(n, i)
    }
}

/// Outcomes `xi_1..xi_I` for one party; `xi_0 = +1` is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    xi: Vec<i8>,
}

impl Assignment {
    pub fn new(xi: Vec<i8>) -> Result<Self, BellError> {
        if xi.is_empty() || xi.iter().any(|&x| x != 1 && x != -1) {
            return Err(BellError::BadAssignment(format!("{xi:?}")));
        }
        Ok(Self { xi })
    }

    /// All `2^I` assignments, starting from all `+1`, with the last setting
    /// flipping fastest.
    pub fn all(settings: usize) -> Vec<Assignment> {
        (0..1usize << settings)
            .map(|bits| Assignment {
                xi: (0..settings).map(|k| if bits >> (settings - 1 - k) & 1 == 0 { 1 } else { -1 }).collect(),
            })
            .collect()
    }

    pub fn settings(&self) -> usize {
        self.xi.len()
    }

    pub fn values(&self) -> &[i8] {
        &self.xi
    }

    /// Outcome of setting `k`, with setting `0` giving `+1`.
    pub fn value(&self, k: usize) -> i8 {
        if k == 0 {
            1
        } else {
            self.xi[k - 1]
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let signs: Vec<&str> = self.xi.iter().map(|&x| if x > 0 { "+" } else { "-" }).collect();
        f.write_str(&signs.join(","))
    }
}

impl FromStr for Assignment {
    type Err = BellError;

    /// Accepts `+,-,+`, `+-+` or `1,-1,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BellError::BadAssignment(s.to_string());
        let s = s.trim();
        let xi: Vec<i8> = if s.contains(',') {
            s.split(',')
                .map(|t| match t.trim() {
                    "+" | "+1" | "1" => Ok(1),
                    "-" | "-1" => Ok(-1),
                    _ => Err(bad()),
                })
                .collect::<Result<_, _>>()?
        } else {
            s.chars()
                .map(|c| match c {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    _ => Err(bad()),
                })
                .collect::<Result<_, _>>()?
        };
        Assignment::new(xi).map_err(|_| bad())
    }
}

/// Outcome `signs[p][s-1]` for setting `s >= 1` of party `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    signs: Vec<Vec<i8>>,
}

impl DeterministicStrategy {
    pub fn new(signs: Vec<Vec<i8>>) -> Result<Self, BellError> {
        let settings = signs.first().map_or(0, Vec::len);
        Scenario::new(signs.len(), settings)?;
        if signs.iter().any(|party| party.len() != settings || party.iter().any(|&x| x != 1 && x != -1)) {
            return Err(BellError::BadAssignment(format!("{signs:?}")));
        }
        Ok(Self { signs })
    }

    /// Strategy number `k` in the enumeration order of [`enumerate_vertices`].
    pub fn nth(s: &Scenario, k: usize) -> Self {
        let bits = s.parties * s.settings;
        let signs = (0..s.parties)
            .map(|p| {
                (0..s.settings).map(|i| if k >> (bits - 1 - (p * s.settings + i)) & 1 == 0 { 1 } else { -1 }).collect()
            })
            .collect();
        Self { signs }
    }

    pub fn signs(&self) -> &[Vec<i8>] {
        &self.signs
    }

    pub fn scenario(&self) -> Scenario {
        Scenario { parties: self.signs.len(), settings: self.signs[0].len() }
    }

    pub fn correlations(&self) -> CorrelationVector {
        let s = self.scenario();
        s.multi_indices()
            .map(|m| {
                let sign: i8 =
                    m.iter().enumerate().map(|(p, &i)| if i == 0 { 1 } else { self.signs[p][i - 1] }).product();
                BigInt::from(sign)
            })
            .collect()
    }
}

/// All deterministic correlation vectors, sign patterns in lexicographic order
/// with `+1` before `-1`, first party's first setting slowest.
pub fn enumerate_vertices(s: &Scenario) -> Vec<CorrelationVector> {
    (0..s.vertex_count()).map(|k| DeterministicStrategy::nth(s, k).correlations()).collect()
}

/// The cone over the local polytope. Vertices already carry the constant
/// `1` in entry `0`, so they serve as rays unchanged.
pub fn local_cone(s: &Scenario) -> Cone {
    Cone::new(s.dim(), enumerate_vertices(s)).expect("vertices are nonzero and of equal length")
}

/// A Bell inequality `sum_i b_i <...>_i >= 0`, kept primitive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellInequality {
    scenario: Scenario,
    coeffs: IntVector,
}

impl BellInequality {
    pub fn new(scenario: Scenario, coeffs: IntVector) -> Result<Self, BellError> {
        if coeffs.len() != scenario.dim() {
            return Err(BellError::LengthMismatch { expected: scenario.dim(), found: coeffs.len() });
        }
        let coeffs = linalg::primitive(&coeffs).map_err(|_| BellError::ZeroInequality)?;
        Ok(Self { scenario, coeffs })
    }

    /// Builds `bound + sum c <multi>` from a sparse list; repeated indices add up.
    pub fn from_terms(scenario: Scenario, bound: i64, terms: &[(&[usize], i64)]) -> Result<Self, BellError> {
        let mut coeffs = vec![BigInt::zero(); scenario.dim()];
        coeffs[0] += bound;
        for (multi, c) in terms {
            if multi.len() != scenario.parties || multi.iter().any(|&i| i > scenario.settings) {
                return Err(BellError::LengthMismatch { expected: scenario.parties, found: multi.len() });
            }
            coeffs[scenario.index(multi)] += *c;
        }
        Self::new(scenario, IntVector::new(coeffs))
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn coeffs(&self) -> &IntVector {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> IntVector {
        self.coeffs
    }

    /// Coefficient of the constant term.
    pub fn bound(&self) -> &BigInt {
        &self.coeffs[0]
    }

    pub fn coeff(&self, multi: &[usize]) -> &BigInt {
        &self.coeffs[self.scenario.index(multi)]
    }

    pub fn is_party_symmetric(&self) -> bool {
        symmetry_rows(&self.scenario).iter().all(|row| row.dot(&self.coeffs).is_zero())
    }

    /// Whether `self` is a positive multiple of `other`.
    pub fn is_positive_multiple_of(&self, other: &BellInequality) -> bool {
        self == other
    }
}

impl fmt::Display for BellInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.scenario, self.coeffs)
    }
}

pub fn evaluate(b: &BellInequality, v: &CorrelationVector) -> BigInt {
    b.coeffs.dot(v)
}

/// Minimum over deterministic strategies and the indices attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalBound {
    pub min: BigInt,
    pub argmin: Vec<usize>,
}

pub fn classical_bound(b: &BellInequality) -> ClassicalBound {
    let mut min: Option<BigInt> = None;
    let mut argmin = Vec::new();
    for (k, v) in enumerate_vertices(&b.scenario).iter().enumerate() {
        let value = evaluate(b, v);
        match &min {
            Some(m) if &value > m => {}
            Some(m) if &value == m => argmin.push(k),
            _ => {
                min = Some(value);
                argmin = vec![k];
            }
        }
    }
    ClassicalBound { min: min.expect("scenarios have at least one vertex"), argmin }
}

/// Deterministic vertices on which `b` evaluates to zero.
pub fn saturating_vertices(b: &BellInequality) -> Vec<CorrelationVector> {
    enumerate_vertices(&b.scenario).into_iter().filter(|v| evaluate(b, v).is_zero()).collect()
}

fn difference_row(s: &Scenario, plus: &[usize], minus: &[usize]) -> IntVector {
    let mut row = IntVector::zeros(s.dim()).into_entries();
    row[s.index(plus)] += 1;
    row[s.index(minus)] -= 1;
    IntVector::new(row)
}

/// Rows `g` with `g . b = 0` exactly when `b` is invariant under party
/// permutations.
///
/// For three parties this is the list `b_ijk - b_jki`, `b_ijk - b_kij`,
/// `b_ijk - b_ikj`, `b_ijk - b_kji`, `b_ijk - b_jik` for each `i<j<k`, followed
/// by `b_iij - b_iji`, `b_iij - b_jii`, `b_jji - b_jij`, `b_jji - b_ijj` for
/// each `i<j`. Other party counts use the sorted multi-index of every class
/// minus each other member of the class.
pub fn symmetry_rows(s: &Scenario) -> Vec<IntVector> {
    let n = s.settings + 1;
    if s.parties == 3 {
        let mut rows = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let base = [i, j, k];
                    for other in [[j, k, i], [k, i, j], [i, k, j], [k, j, i], [j, i, k]] {
                        rows.push(difference_row(s, &base, &other));
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                rows.push(difference_row(s, &[i, i, j], &[i, j, i]));
                rows.push(difference_row(s, &[i, i, j], &[j, i, i]));
                rows.push(difference_row(s, &[j, j, i], &[j, i, j]));
                rows.push(difference_row(s, &[j, j, i], &[i, j, j]));
            }
        }
        return rows;
    }
    let mut rows = Vec::new();
    for multi in s.multi_indices() {
        if multi.windows(2).any(|w| w[0] > w[1]) {
            continue;
        }
        for other in distinct_permutations(&multi).into_iter().skip(1) {
            rows.push(difference_row(s, &multi, &other));
        }
    }
    rows
}

/// Distinct rearrangements of `multi` in lexicographic order.
pub(crate) fn distinct_permutations(multi: &[usize]) -> Vec<Vec<usize>> {
    let mut current = multi.to_vec();
    current.sort_unstable();
    let mut out = vec![current.clone()];
    // next lexicographic permutation
    loop {
        let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..current.len()).rev().find(|&j| current[j] > current[i - 1]).expect("pivot has a successor");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Unit rows for every coefficient with at least one trivial setting, except
/// the constant term.
pub fn full_correlation_rows(s: &Scenario) -> Vec<IntVector> {
    (1..s.dim()).filter(|&i| s.multi_index(i).contains(&0)).map(|i| IntVector::unit(s.dim(), i)).collect()
}

/// Extends an `N`-party correlation vector by a party with fixed outcomes `xi`:
/// `r(i.., k) = v(i..) xi_k`.
pub fn lift_vertex(v: &CorrelationVector, s: &Scenario, xi: &Assignment) -> Result<CorrelationVector, BellError> {
    check_len(v, s)?;
    check_assignment(s, xi)?;
    Ok(v.iter().flat_map(|entry| (0..=s.settings).map(move |k| entry * BigInt::from(xi.value(k)))).collect())
}

/// `b'(i..) = sum_k b(i.., k) xi_k` without normalization.
pub fn reduce_raw(b: &BellInequality, xi: &Assignment) -> Result<IntVector, BellError> {
    let s = b.scenario;
    if s.parties < 2 {
        return Err(BellError::InvalidScenario { parties: s.parties - 1, settings: s.settings });
    }
    check_assignment(&s, xi)?;
    let width = s.settings + 1;
    Ok(b.coeffs
        .entries()
        .chunks(width)
        .map(|slab| slab.iter().enumerate().map(|(k, c)| c * BigInt::from(xi.value(k))).sum::<BigInt>())
        .collect())
}

/// Contracts the last party with fixed outcomes `xi`, normalized to be primitive.
pub fn reduce(b: &BellInequality, xi: &Assignment) -> Result<BellInequality, BellError> {
    let coeffs = reduce_raw(b, xi)?;
    if coeffs.is_zero() {
        return Err(BellError::ZeroReduction);
    }
    BellInequality::new(b.scenario.with_parties(b.scenario.parties - 1)?, coeffs)
}

/// Relabels settings by `merge[i]` on every party, adding coefficients that
/// land on the same multi-index. `merge[0]` must be `0` and the image must be
/// `0..=I'` for some `I' >= 1`.
pub fn identify_settings(b: &BellInequality, merge: &[usize]) -> Result<BellInequality, BellError> {
    let s = b.scenario;
    if merge.len() != s.settings + 1 {
        return Err(BellError::BadSettingMap(format!("expected {} entries, found {}", s.settings + 1, merge.len())));
    }
    if merge[0] != 0 || merge[1..].contains(&0) {
        return Err(BellError::BadSettingMap("only setting 0 may map to 0".into()));
    }
    let target = *merge.iter().max().expect("map is non-empty");
    if (1..=target).any(|t| !merge.contains(&t)) {
        return Err(BellError::BadSettingMap("image must be 0..=max".into()));
    }
    let out = Scenario::new(s.parties, target)?;
    let mut coeffs = vec![BigInt::zero(); out.dim()];
    for (i, multi) in s.multi_indices().enumerate() {
        let image: Vec<usize> = multi.iter().map(|&x| merge[x]).collect();
        coeffs[out.index(&image)] += &b.coeffs[i];
    }
    BellInequality::new(out, IntVector::new(coeffs))
}

/// `prod_p (1 + A^p_1) >= 0`, the simplest positivity facet.
pub fn positivity(s: &Scenario) -> BellInequality {
    let coeffs =
        s.multi_indices().map(|m| if m.iter().all(|&i| i <= 1) { BigInt::one() } else { BigInt::zero() }).collect();
    BellInequality::new(*s, coeffs).expect("constant term is nonzero")
}

fn check_len(v: &IntVector, s: &Scenario) -> Result<(), BellError> {
    if v.len() != s.dim() {
        return Err(BellError::LengthMismatch { expected: s.dim(), found: v.len() });
    }
    Ok(())
}

fn check_assignment(s: &Scenario, xi: &Assignment) -> Result<(), BellError> {
    if xi.settings() != s.settings {
        return Err(BellError::BadAssignment(format!(
            "{xi} has {} settings, scenario has {}",
            xi.settings(),
            s.settings
        )));
    }
    Ok(())
}

/// Whether `b` is nonnegative on every vertex in `vertices`.
pub fn is_valid_on(b: &BellInequality, vertices: &[CorrelationVector]) -> bool {
    vertices.iter().all(|v| !evaluate(b, v).is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn sc(n: usize, i: usize) -> Scenario {
        Scenario::new(n, i).unwrap()
    }

    #[test]
    fn scenario_indexing_round_trips() {
        let s = sc(3, 3);
        assert_eq!(s.dim(), 64);
        assert_eq!(s.index(&[0, 0, 0]), 0);
        assert_eq!(s.index(&[0, 0, 1]), 1);
        assert_eq!(s.index(&[1, 0, 0]), 16);
        for i in 0..s.dim() {
            assert_eq!(s.index(&s.multi_index(i)), i);
        }
        assert_eq!("3,3".parse::<Scenario>().unwrap(), s);
        assert_eq!("(2,3)".parse::<Scenario>().unwrap(), sc(2, 3));
        assert!("3".parse::<Scenario>().is_err());
        assert!(Scenario::new(0, 2).is_err());
        assert!(Scenario::new(40, 2).is_err());
    }

    #[test]
    fn vertex_counts_and_entries() {
        for (n, i, count, len) in [(2, 2, 16, 9), (2, 3, 64, 16), (3, 3, 512, 64)] {
            let vs = enumerate_vertices(&sc(n, i));
            assert_eq!(vs.len(), count);
            assert!(vs.iter().all(|v| v.len() == len && v[0] == BigInt::one()));
            assert!(vs.iter().all(|v| v.iter().all(|x| x.abs() == BigInt::one())));
            assert_eq!(vs.iter().collect::<HashSet<_>>().len(), count);
        }
    }

    #[test]
    fn vertex_order_starts_from_all_plus() {
        let s = sc(2, 2);
        let vs = enumerate_vertices(&s);
        assert!(vs[0].iter().all(|x| x.is_one()));
        // last bit is party 2, setting 2
        assert_eq!(DeterministicStrategy::nth(&s, 1).signs(), &[vec![1, 1], vec![1, -1]]);
        assert_eq!(vs[1][s.index(&[0, 2])], BigInt::from(-1));
        assert_eq!(vs[1][s.index(&[1, 2])], BigInt::from(-1));
        assert_eq!(vs[1][s.index(&[2, 1])], BigInt::from(1));
    }

    #[test]
    fn tripartite_vertices_have_affine_dimension_63() {
        let vs = enumerate_vertices(&sc(3, 3));
        assert_eq!(linalg::rank_of_rows(&vs, 64), 64);
    }

    #[test]
    fn assignments() {
        let all = Assignment::all(3);
        assert_eq!(all.len(), 8);
        assert_eq!(all[0].to_string(), "+,+,+");
        assert_eq!(all[1].to_string(), "+,+,-");
        assert_eq!(all[7].to_string(), "-,-,-");
        assert_eq!("+,-,+".parse::<Assignment>().unwrap().values(), &[1, -1, 1]);
        assert_eq!("+-+".parse::<Assignment>().unwrap().values(), &[1, -1, 1]);
        assert_eq!("1,-1,1".parse::<Assignment>().unwrap().values(), &[1, -1, 1]);
        assert!("+,0".parse::<Assignment>().is_err());
        assert!("".parse::<Assignment>().is_err());
        assert_eq!(all[5].value(0), 1);
    }

    #[test]
    fn inequalities_are_primitive() {
        let s = sc(2, 2);
        let b = BellInequality::from_terms(s, 4, &[(&[1, 1], -2)]).unwrap();
        assert_eq!(b.bound(), &BigInt::from(2));
        assert_eq!(b.coeff(&[1, 1]), &BigInt::from(-1));
        assert_eq!(BellInequality::new(s, IntVector::zeros(9)).unwrap_err(), BellError::ZeroInequality);
        assert!(BellInequality::new(s, IntVector::zeros(4)).is_err());
    }

    #[test]
    fn trivial_inequality_evaluates_to_one() {
        let s = sc(2, 3);
        let b = BellInequality::from_terms(s, 1, &[]).unwrap();
        for v in enumerate_vertices(&s) {
            assert_eq!(evaluate(&b, &v), BigInt::one());
        }
        assert!(saturating_vertices(&b).is_empty());
    }

    #[test]
    fn symmetry_row_counts() {
        assert_eq!(symmetry_rows(&sc(3, 3)).len(), 44);
        assert_eq!(symmetry_rows(&sc(3, 2)).len(), 5 + 3 * 4);
        assert_eq!(symmetry_rows(&sc(2, 3)).len(), 6);
        assert!(symmetry_rows(&sc(1, 3)).is_empty());
        let rank = |s: Scenario| linalg::rank_of_rows(&symmetry_rows(&s), s.dim());
        // rank = dim - number of multisets
        assert_eq!(rank(sc(3, 3)), 64 - 20);
        assert_eq!(rank(sc(4, 2)), 81 - 15);
    }

    #[test]
    fn symmetry_rows_detect_asymmetry() {
        let s = sc(3, 3);
        let mut coeffs = IntVector::zeros(64).into_entries();
        coeffs[s.index(&[0, 1, 2])] = BigInt::one();
        let b = BellInequality::new(s, IntVector::new(coeffs)).unwrap();
        let rows = symmetry_rows(&s);
        // the first row is b_012 - b_120
        assert_eq!(rows[0].dot(b.coeffs()), BigInt::one());
        assert!(!b.is_party_symmetric());
        let sym = BellInequality::from_terms(
            s,
            3,
            &[(&[0, 1, 2], 1), (&[0, 2, 1], 1), (&[1, 0, 2], 1), (&[1, 2, 0], 1), (&[2, 0, 1], 1), (&[2, 1, 0], 1)],
        )
        .unwrap();
        assert!(sym.is_party_symmetric());
    }

    #[test]
    fn distinct_permutations_are_lexicographic() {
        assert_eq!(distinct_permutations(&[2, 1, 1]), vec![vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1]]);
        assert_eq!(distinct_permutations(&[0, 1, 2]).len(), 6);
        assert_eq!(distinct_permutations(&[3, 3, 3]).len(), 1);
    }

    #[test]
    fn full_correlation_rows_count() {
        let s = sc(3, 3);
        let rows = full_correlation_rows(&s);
        assert_eq!(rows.len(), 36);
        let mut all = symmetry_rows(&s);
        all.extend(rows);
        assert_eq!(64 - linalg::rank_of_rows(&all, 64), 11);
    }

    #[test]
    fn lifting_and_reduction_are_adjoint() {
        let s2 = sc(2, 3);
        let s3 = sc(3, 3);
        let vertices3: HashSet<_> = enumerate_vertices(&s3).into_iter().collect();
        let b = BellInequality::new(s3, (0..64).map(|i| BigInt::from((i * 7 % 11) as i64 - 5)).collect()).unwrap();
        for xi in Assignment::all(3) {
            let reduced = reduce_raw(&b, &xi).unwrap();
            for v in enumerate_vertices(&s2) {
                let r = lift_vertex(&v, &s2, &xi).unwrap();
                assert!(vertices3.contains(&r));
                assert_eq!(reduced.dot(&v), evaluate(&b, &r));
            }
        }
    }

    #[test]
    fn lift_examples() {
        let s2 = sc(2, 3);
        let ones = enumerate_vertices(&s2)[0].clone();
        let plus = Assignment::all(3)[0].clone();
        assert!(lift_vertex(&ones, &s2, &plus).unwrap().iter().all(|x| x.is_one()));
        let minus = Assignment::all(3)[7].clone();
        let r = lift_vertex(&ones, &s2, &minus).unwrap();
        let s3 = sc(3, 3);
        for (i, m) in s3.multi_indices().enumerate() {
            assert_eq!(r[i], BigInt::from(if m[2] == 0 { 1 } else { -1 }));
        }
        assert!(lift_vertex(&ones, &s2, &"+,-".parse().unwrap()).is_err());
    }

    #[test]
    fn zero_reduction_is_reported() {
        // b(i,j,1) = 1 = -b(i,j,2): cancels for xi = (+,+,*)
        let s = sc(3, 3);
        let b = BellInequality::from_terms(s, 0, &[(&[0, 0, 1], 1), (&[0, 0, 2], -1)]).unwrap();
        assert_eq!(reduce(&b, &"+,+,-".parse().unwrap()).unwrap_err(), BellError::ZeroReduction);
        let r = reduce(&b, &"+,-,-".parse().unwrap()).unwrap();
        assert_eq!(r.coeffs(), &IntVector::unit(16, 0));
    }

    #[test]
    fn identify_settings_examples() {
        let s = sc(2, 3);
        let b = BellInequality::from_terms(s, 2, &[(&[1, 2], 1), (&[3, 3], -1)]).unwrap();
        assert_eq!(identify_settings(&b, &[0, 1, 2, 3]).unwrap(), b);
        let merged = identify_settings(&b, &[0, 1, 1, 1]).unwrap();
        assert_eq!(merged.scenario(), sc(2, 1));
        assert_eq!(merged.coeffs(), &IntVector::from_i64s(&[1, 0, 0, 0]));
        assert!(identify_settings(&b, &[0, 1, 3, 3]).is_err());
        assert!(identify_settings(&b, &[1, 1, 2, 3]).is_err());
        assert!(identify_settings(&b, &[0, 1, 2]).is_err());
    }

    #[test]
    fn positivity_is_a_valid_face() {
        let s = sc(2, 2);
        let p = positivity(&s);
        assert_eq!(classical_bound(&p).min, BigInt::zero());
        assert_eq!(saturating_vertices(&p).len(), 12);
    }
}
