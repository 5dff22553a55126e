//! Relabelings of parties, settings and outcomes, and canonical forms of
//! inequalities under them.
//!
//! A relabeling sends setting `s` of party `p` to setting `setting_perms[p][s]`
//! of party `party_perm[p]`, multiplying its outcome by `flips[p][s]`. Setting
//! `0` is fixed and never flipped. The same map acts on correlation vectors and
//! on coefficient vectors, so `evaluate` is invariant when both are relabeled.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::Neg;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::bell::{Assignment, BellInequality, Scenario};
use crate::linalg::IntVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelabelingError {
    #[error("expected {expected} parties, found {found}")]
    PartyCount { expected: usize, found: usize },
    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),
    #[error("setting 0 must stay fixed and unflipped")]
    MovesTrivialSetting,
    #[error("flips must be +1 or -1")]
    BadFlip,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relabeling {
    party_perm: Vec<usize>,
    setting_perms: Vec<Vec<usize>>,
    flips: Vec<Vec<i8>>,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

impl Relabeling {
    /// `setting_perms[p]` and `flips[p]` have `I + 1` entries indexed by the
    /// original setting of party `p`.
    pub fn new(
        s: &Scenario,
        party_perm: Vec<usize>,
        setting_perms: Vec<Vec<usize>>,
        flips: Vec<Vec<i8>>,
    ) -> Result<Self, RelabelingError> {
        let n = s.parties();
        for found in [party_perm.len(), setting_perms.len(), flips.len()] {
            if found != n {
                return Err(RelabelingError::PartyCount { expected: n, found });
            }
        }
        if !is_permutation(&party_perm) {
            return Err(RelabelingError::NotAPermutation(party_perm));
        }
        for perm in &setting_perms {
            if perm.len() != s.settings() + 1 || !is_permutation(perm) {
                return Err(RelabelingError::NotAPermutation(perm.clone()));
            }
            if perm[0] != 0 {
                return Err(RelabelingError::MovesTrivialSetting);
            }
        }
        for f in &flips {
            if f.len() != s.settings() + 1 || f.iter().any(|&x| x != 1 && x != -1) {
                return Err(RelabelingError::BadFlip);
            }
            if f[0] != 1 {
                return Err(RelabelingError::MovesTrivialSetting);
            }
        }
        Ok(Self { party_perm, setting_perms, flips })
    }

    pub fn identity(s: &Scenario) -> Self {
        let n = s.parties();
        Self {
            party_perm: (0..n).collect(),
            setting_perms: vec![(0..=s.settings()).collect(); n],
            flips: vec![vec![1; s.settings() + 1]; n],
        }
    }

    /// Exchanges parties `a` and `b`.
    pub fn party_swap(s: &Scenario, a: usize, b: usize) -> Self {
        let mut g = Self::identity(s);
        g.party_perm.swap(a, b);
        g
    }

    /// Flips the outcomes of party `p` according to `xi`.
    pub fn outcome_flip(s: &Scenario, p: usize, xi: &Assignment) -> Self {
        let mut g = Self::identity(s);
        g.flips[p] = (0..=s.settings()).map(|k| xi.value(k)).collect();
        g
    }

    pub fn party_perm(&self) -> &[usize] {
        &self.party_perm
    }

    pub fn setting_perms(&self) -> &[Vec<usize>] {
        &self.setting_perms
    }

    pub fn flips(&self) -> &[Vec<i8>] {
        &self.flips
    }

    fn scenario(&self) -> Scenario {
        Scenario::new(self.party_perm.len(), self.setting_perms[0].len() - 1).expect("validated on construction")
    }

    /// Relabels a correlation or coefficient vector.
    pub fn apply_vector(&self, v: &IntVector) -> IntVector {
        let s = self.scenario();
        assert_eq!(v.len(), s.dim());
        let mut out = vec![BigInt::zero(); s.dim()];
        let mut j = vec![0; s.parties()];
        for (idx, i) in s.multi_indices().enumerate() {
            let mut sign = 1;
            for (p, &ip) in i.iter().enumerate() {
                j[self.party_perm[p]] = self.setting_perms[p][ip];
                sign *= self.flips[p][ip];
            }
            out[s.index(&j)] = if sign > 0 { v[idx].clone() } else { -&v[idx] };
        }
        IntVector::new(out)
    }

    pub fn apply(&self, b: &BellInequality) -> BellInequality {
        assert_eq!(b.scenario(), self.scenario());
        BellInequality::new(b.scenario(), self.apply_vector(b.coeffs())).expect("relabeling preserves nonzero vectors")
    }

    pub fn apply_to_vertex(&self, v: &IntVector) -> IntVector {
        self.apply_vector(v)
    }

    /// `self` after `inner`: `self.compose(inner).apply(b) == self.apply(&inner.apply(b))`.
    pub fn compose(&self, inner: &Relabeling) -> Relabeling {
        let n = self.party_perm.len();
        let mut out = Relabeling::identity(&self.scenario());
        for p in 0..n {
            let q = inner.party_perm[p];
            out.party_perm[p] = self.party_perm[q];
            for (x, &mid) in inner.setting_perms[p].iter().enumerate() {
                out.setting_perms[p][x] = self.setting_perms[q][mid];
                out.flips[p][x] = inner.flips[p][x] * self.flips[q][mid];
            }
        }
        out
    }

    pub fn inverse(&self) -> Relabeling {
        let mut out = Relabeling::identity(&self.scenario());
        for (p, &q) in self.party_perm.iter().enumerate() {
            out.party_perm[q] = p;
            for (x, &y) in self.setting_perms[p].iter().enumerate() {
                out.setting_perms[q][y] = x;
                out.flips[q][y] = self.flips[p][x];
            }
        }
        out
    }
}

/// Which relabelings are allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    pub party_perms: bool,
    pub setting_perms: bool,
    pub flips: bool,
    /// Use the same setting permutation and flips on every party.
    pub diagonal: bool,
}

impl GroupSpec {
    pub const FULL: GroupSpec = GroupSpec { party_perms: true, setting_perms: true, flips: true, diagonal: false };
    /// Relabelings that map party-symmetric inequalities to party-symmetric ones.
    pub const SYMMETRIC: GroupSpec = GroupSpec { party_perms: true, setting_perms: true, flips: true, diagonal: true };

    /// Group order for scenario `s`.
    pub fn order(&self, s: &Scenario) -> u128 {
        let fact = |n: usize| (1..=n as u128).product::<u128>();
        let local = if self.setting_perms { fact(s.settings()) } else { 1 }
            * if self.flips { 1u128 << s.settings() } else { 1 };
        let parties = if self.party_perms { fact(s.parties()) } else { 1 };
        let per_party = if self.diagonal { local } else { local.pow(s.parties() as u32) };
        parties * per_party
    }
}

impl Default for GroupSpec {
    fn default() -> Self {
        Self::FULL
    }
}

/// A setting permutation with flips for one party, and its inverse lookup
/// `inv[t] = (sigma^-1(t), flip of sigma^-1(t))`.
#[derive(Clone, Debug)]
struct LocalMove {
    perm: Vec<usize>,
    flips: Vec<i8>,
    inv: Vec<(usize, i8)>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot has a successor");
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

fn local_moves(settings: usize, spec: &GroupSpec) -> Vec<LocalMove> {
    let perms = if spec.setting_perms { permutations(settings) } else { vec![(0..settings).collect()] };
    let flips =
        if spec.flips { Assignment::all(settings) } else { vec![Assignment::new(vec![1; settings]).expect("valid")] };
    let mut out = Vec::with_capacity(perms.len() * flips.len());
    for p in &perms {
        for f in &flips {
            let perm: Vec<usize> = std::iter::once(0).chain(p.iter().map(|x| x + 1)).collect();
            let flips: Vec<i8> = (0..=settings).map(|k| f.value(k)).collect();
            let mut inv = vec![(0, 1); settings + 1];
            for (x, &y) in perm.iter().enumerate() {
                inv[y] = (x, flips[x]);
            }
            out.push(LocalMove { perm, flips, inv });
        }
    }
    out
}

/// Every element of the group, identity first. Only practical for small groups.
pub fn group_elements(s: &Scenario, spec: &GroupSpec) -> Vec<Relabeling> {
    let n = s.parties();
    let moves = local_moves(s.settings(), spec);
    let party_perms = if spec.party_perms { permutations(n) } else { vec![(0..n).collect()] };
    let mut per_party: Vec<Vec<usize>> = vec![vec![]];
    if spec.diagonal {
        per_party = (0..moves.len()).map(|m| vec![m; n]).collect();
    } else {
        for _ in 0..n {
            per_party = per_party
                .into_iter()
                .flat_map(|prefix| {
                    (0..moves.len()).map(move |m| {
                        let mut next = prefix.clone();
                        next.push(m);
                        next
                    })
                })
                .collect();
        }
    }
    let mut out = Vec::new();
    for pp in &party_perms {
        for choice in &per_party {
            out.push(Relabeling {
                party_perm: pp.clone(),
                setting_perms: choice.iter().map(|&m| moves[m].perm.clone()).collect(),
                flips: choice.iter().map(|&m| moves[m].flips.clone()).collect(),
            });
        }
    }
    out
}

/// Distinct images of `b` under the group.
pub fn orbit(b: &BellInequality, spec: &GroupSpec) -> BTreeSet<BellInequality> {
    group_elements(&b.scenario(), spec).iter().map(|g| g.apply(b)).collect()
}

/// The lexicographically smallest image of an inequality and an element
/// reaching it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canonical {
    pub form: BellInequality,
    pub witness: Relabeling,
}

#[derive(Clone)]
struct Partial {
    /// Original party placed at each position; filled from the last position.
    parties: Vec<usize>,
    moves: Vec<usize>,
}

/// Branch and bound over positions from last to first. The first
/// `(I+1)^k` output entries only depend on the parties and moves placed at the
/// last `k` positions, so every level keeps just the partial assignments whose
/// next block of entries is lexicographically smallest.
fn search<T>(s: &Scenario, c: &[T], spec: &GroupSpec) -> (Vec<T>, Partial)
where
    T: Clone + Ord + Neg<Output = T>,
{
    let n = s.parties();
    let base = s.settings() + 1;
    let moves = local_moves(s.settings(), spec);
    let stride: Vec<usize> = (0..n).map(|q| base.pow((n - 1 - q) as u32)).collect();

    let mut states = vec![Partial { parties: Vec::new(), moves: Vec::new() }];
    let mut prefix: Vec<T> = vec![c[0].clone()];

    for level in 1..=n {
        let position = n - level;
        let rest_len = base.pow((level - 1) as u32);
        let mut best: Option<Vec<T>> = None;
        let mut survivors = Vec::new();
        let mut block = Vec::with_capacity((base - 1) * rest_len);
        let mut offsets = vec![(0usize, false); rest_len];
        for state in &states {
            // source index and sign of every digit combination on the placed positions
            for (r, slot) in offsets.iter_mut().enumerate() {
                let mut rest = r;
                let mut orig = 0;
                let mut negative = false;
                for k in 0..level - 1 {
                    let (x, f) = moves[state.moves[k]].inv[rest % base];
                    rest /= base;
                    orig += stride[state.parties[k]] * x;
                    negative ^= f < 0;
                }
                *slot = (orig, negative);
            }
            let used = |q: usize| state.parties.contains(&q);
            let candidates: Vec<usize> =
                if spec.party_perms { (0..n).filter(|&q| !used(q)).collect() } else { vec![position] };
            let move_choices: Vec<usize> = match (spec.diagonal, state.moves.first()) {
                (true, Some(&m)) => vec![m],
                _ => (0..moves.len()).collect(),
            };
            for &q in &candidates {
                for &m in &move_choices {
                    block.clear();
                    // stops as soon as the block exceeds the best one
                    let mut ord = if best.is_some() { Ordering::Equal } else { Ordering::Less };
                    'block: for digit in 1..base {
                        let (x, f) = moves[m].inv[digit];
                        let head = stride[q] * x;
                        for &(orig, negative) in &offsets {
                            let v = c[head + orig].clone();
                            let v = if negative ^ (f < 0) { -v } else { v };
                            if ord == Ordering::Equal {
                                ord = v.cmp(&best.as_ref().expect("set when comparing")[block.len()]);
                                if ord == Ordering::Greater {
                                    break 'block;
                                }
                            }
                            block.push(v);
                        }
                    }
                    match ord {
                        Ordering::Greater => continue,
                        Ordering::Less => {
                            best = Some(block.clone());
                            survivors.clear();
                        }
                        Ordering::Equal => {}
                    }
                    let mut next = state.clone();
                    next.parties.push(q);
                    next.moves.push(m);
                    survivors.push(next);
                }
            }
        }
        prefix.extend(best.expect("at least one candidate"));
        states = survivors;
    }
    (prefix, states.swap_remove(0))
}

fn witness(s: &Scenario, spec: &GroupSpec, state: &Partial) -> Relabeling {
    let moves = local_moves(s.settings(), spec);
    let n = s.parties();
    let mut g = Relabeling::identity(s);
    for (k, (&q, &m)) in state.parties.iter().zip(&state.moves).enumerate() {
        g.party_perm[q] = n - 1 - k;
        g.setting_perms[q] = moves[m].perm.clone();
        g.flips[q] = moves[m].flips.clone();
    }
    g
}

pub fn canonical_form_with(b: &BellInequality, spec: &GroupSpec) -> Canonical {
    let s = b.scenario();
    let small: Option<Vec<i64>> = b.coeffs().iter().map(|x| x.to_i64().filter(|v| v.checked_neg().is_some())).collect();
    let (form, state) = match small {
        Some(c) => {
            let (v, st) = search(&s, &c, spec);
            (v.into_iter().map(BigInt::from).collect(), st)
        }
        None => search(&s, b.coeffs().entries(), spec),
    };
    let form = BellInequality::new(s, IntVector::new(form)).expect("relabeling preserves nonzero vectors");
    Canonical { form, witness: witness(&s, spec, &state) }
}

/// Lexicographic minimum of the orbit under the full group.
pub fn canonical_form(b: &BellInequality) -> BellInequality {
    canonical_form_with(b, &GroupSpec::FULL).form
}

/// Orbit invariant used to rule out equivalence cheaply: the constant term and,
/// per number of nontrivial settings, the sorted coefficient magnitudes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitInvariant {
    bound: BigInt,
    magnitudes: Vec<Vec<BigInt>>,
}

pub fn orbit_invariant(b: &BellInequality) -> OrbitInvariant {
    let s = b.scenario();
    let mut magnitudes = vec![Vec::new(); s.parties() + 1];
    for (i, m) in s.multi_indices().enumerate() {
        let order = m.iter().filter(|&&x| x != 0).count();
        magnitudes[order].push(b.coeffs()[i].abs());
    }
    for list in &mut magnitudes {
        list.sort();
    }
    OrbitInvariant { bound: b.bound().clone(), magnitudes }
}

pub fn equivalent(a: &BellInequality, b: &BellInequality, spec: &GroupSpec) -> bool {
    a.scenario() == b.scenario()
        && orbit_invariant(a) == orbit_invariant(b)
        && canonical_form_with(a, spec).form == canonical_form_with(b, spec).form
}

/// Groups `list` into orbits: canonical form and the indices of its members,
/// sorted by canonical form.
pub fn classify(list: &[BellInequality], spec: &GroupSpec) -> Vec<(BellInequality, Vec<usize>)> {
    let forms: Vec<BellInequality> = list.par_iter().map(|b| canonical_form_with(b, spec).form).collect();
    let mut classes: BTreeMap<BellInequality, Vec<usize>> = BTreeMap::new();
    for (i, f) in forms.into_iter().enumerate() {
        classes.entry(f).or_default().push(i);
    }
    classes.into_iter().collect()
}

/// One canonical representative per orbit, sorted.
pub fn dedup(list: &[BellInequality], spec: &GroupSpec) -> Vec<BellInequality> {
    classify(list, spec).into_iter().map(|(f, _)| f).collect()
}
