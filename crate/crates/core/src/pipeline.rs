//! Symmetric three-party generalizations of I3322.
//!
//! For each outcome assignment `xi` of the third party, the admissible
//! normals are the party-symmetric `b` that vanish on every lifted vertex
//! `r = v (x) xi` for the deterministic vertices `v` saturating I3322. The
//! facets of the local cone obeying these conditions are collected over all
//! assignments and reduced to one representative per relabeling class.

use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::{self, catalog, Assignment, BellError, BellInequality, Scenario};
use crate::cone::{Cone, ConeError};
use crate::constrained::{self, ConstrainedError, ConstraintSystem};
use crate::equivalence::{self, GroupSpec};
use crate::linalg::{self, IntVector};

/// Reference values the run is checked against.
pub mod expected {
    pub const SATURATING_VERTICES: usize = 20;
    pub const G_ROWS: usize = 64;
    pub const G_COLS: usize = 64;
    pub const G_RANK: usize = 53;
    pub const KERNEL_DIM: usize = 11;
    pub const PROJECTED_RAYS: usize = 88;
    pub const CLASSES: usize = 3050;
    pub const BANCAL_CLASSES: usize = 20;
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("checkpoint {name} failed{context}: expected {expected}, found {found}")]
    Checkpoint { name: &'static str, context: String, expected: usize, found: usize },
    #[error(transparent)]
    Bell(#[from] BellError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Constrained(#[from] ConstrainedError),
    #[error("cannot build thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    pub strict: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub group: GroupSpec,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { strict: true, jobs: None, group: GroupSpec::FULL }
    }
}

/// Wall-clock seconds per phase; the only nondeterministic part of a report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTimings {
    pub projection: f64,
    pub enumeration: f64,
    pub verification: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub xi: String,
    pub g_shape: (usize, usize),
    pub g_rank: usize,
    pub kernel_dim: usize,
    /// Distinct images `T^T w` of the rays, the zero vector included.
    pub projected_ray_count: usize,
    /// Generators of the projected cone after scaling to primitive vectors.
    pub cone_ray_count: usize,
    pub zero_projections: usize,
    pub candidate_count: usize,
    pub facet_count: usize,
    pub accepted_count: usize,
    pub zero_reductions: usize,
    pub other_reductions: usize,
    pub timings: RunTimings,
}

impl RunReport {
    fn check(&self, strict: bool) -> Result<(), PipelineError> {
        let context = format!(" for xi = {}", self.xi);
        let checks = [
            ("g_rows", expected::G_ROWS, self.g_shape.0),
            ("g_cols", expected::G_COLS, self.g_shape.1),
            ("g_rank", expected::G_RANK, self.g_rank),
            ("kernel_dim", expected::KERNEL_DIM, self.kernel_dim),
            ("projected_rays", expected::PROJECTED_RAYS, self.projected_ray_count),
        ];
        checkpoint_all(&checks, &context, strict)
    }
}

fn checkpoint_all(checks: &[(&'static str, usize, usize)], context: &str, strict: bool) -> Result<(), PipelineError> {
    for &(name, expected, found) in checks {
        if expected != found {
            let err = PipelineError::Checkpoint { name, context: context.to_string(), expected, found };
            if strict {
                return Err(err);
            }
            warn!("{err}");
        }
    }
    Ok(())
}

/// One class of the final list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generalization {
    /// Smallest party-symmetric member found, up to symmetric relabelings.
    pub representative: BellInequality,
    /// Canonical form under the dedup group.
    pub canonical: BellInequality,
    pub terms: usize,
    /// Assignments whose run produced a member of the class.
    pub assignments: Vec<Assignment>,
}

#[derive(Clone, Debug)]
pub struct GeneralizationOutput {
    /// Ordered by number of symmetric terms, then representative.
    pub inequalities: Vec<Generalization>,
    /// Classes of the union in which every member reduces to zero.
    pub excluded: Vec<Generalization>,
    pub reports: Vec<RunReport>,
    /// Number of facets over all runs before dedup.
    pub union_size: usize,
}

impl GeneralizationOutput {
    /// Number of classes in the union of all runs, excluded ones included.
    pub fn union_classes(&self) -> usize {
        self.inequalities.len() + self.excluded.len()
    }
}

pub fn tripartite() -> Scenario {
    Scenario::new(3, 3).expect("valid scenario")
}

/// Rows of `G` for one assignment: the symmetry rows, then one lifted
/// saturating vertex per row.
pub fn i3322_constraints(xi: &Assignment) -> Result<ConstraintSystem, PipelineError> {
    let s3 = tripartite();
    let i3322 = catalog::i3322();
    let s2 = i3322.scenario();
    let mut rows = bell::symmetry_rows(&s3);
    for v in bell::saturating_vertices(&i3322) {
        rows.push(bell::lift_vertex(&v, &s2, xi)?);
    }
    Ok(ConstraintSystem::from_rows(s3.dim(), rows)?)
}

/// Result of a single assignment.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub xi: Assignment,
    pub accepted: Vec<BellInequality>,
    /// Facets obeying the constraints whose reduction vanishes.
    pub excluded: Vec<BellInequality>,
    pub report: RunReport,
}

pub fn run_assignment(cone: &Cone, xi: &Assignment, strict: bool) -> Result<RunOutput, PipelineError> {
    let start = Instant::now();
    let i3322 = catalog::i3322();
    let cs = i3322_constraints(xi)?;
    let out = constrained::constrained_facets(cone, &cs)?;
    let verify_start = Instant::now();
    let s3 = tripartite();
    let mut accepted = Vec::new();
    let mut excluded = Vec::new();
    let mut other_reductions = 0;
    for f in &out.facets {
        let b = BellInequality::new(s3, f.normal().clone())?;
        debug_assert!(b.is_party_symmetric());
        match bell::reduce(&b, xi) {
            Ok(r) if r.is_positive_multiple_of(&i3322) => accepted.push(b),
            Ok(r) => {
                warn!("xi = {xi}: facet reduces to {r}, not to I3322");
                other_reductions += 1;
            }
            Err(BellError::ZeroReduction) => {
                info!("xi = {xi}: facet with zero reduction excluded: {b}");
                excluded.push(b);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let (rows, cols) = cs.shape();
    let ctx = &out.context;
    let report = RunReport {
        xi: xi.to_string(),
        g_shape: (rows, cols),
        g_rank: ctx.g_rank(),
        kernel_dim: ctx.kernel_dim(),
        projected_ray_count: ctx.distinct_images(),
        cone_ray_count: out.projected.len(),
        zero_projections: ctx.zero_projections(),
        candidate_count: out.candidates,
        facet_count: out.facets.len(),
        accepted_count: accepted.len(),
        zero_reductions: excluded.len(),
        other_reductions,
        timings: RunTimings {
            projection: out.timings.projection.as_secs_f64(),
            enumeration: out.timings.enumeration.as_secs_f64(),
            verification: (out.timings.verification + verify_start.elapsed()).as_secs_f64(),
            total: start.elapsed().as_secs_f64(),
        },
    };
    info!(
        "xi = {}: rank {} kernel {} rays {} candidates {} facets {} accepted {}",
        report.xi,
        report.g_rank,
        report.kernel_dim,
        report.projected_ray_count,
        report.candidate_count,
        report.facet_count,
        report.accepted_count
    );
    report.check(strict)?;
    Ok(RunOutput { xi: xi.clone(), accepted, excluded, report })
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn check_saturation(strict: bool) -> Result<(), PipelineError> {
    let found = bell::saturating_vertices(&catalog::i3322()).len();
    checkpoint_all(&[("saturating_vertices", expected::SATURATING_VERTICES, found)], "", strict)
}

/// Runs every assignment, then merges and orders the classes.
pub fn generalize_i3322(opts: &PipelineOptions) -> Result<GeneralizationOutput, PipelineError> {
    check_saturation(opts.strict)?;
    let cone = bell::local_cone(&tripartite());
    let runs: Vec<RunOutput> = with_pool(opts.jobs, || {
        Assignment::all(3).par_iter().map(|xi| run_assignment(&cone, xi, opts.strict)).collect::<Result<Vec<_>, _>>()
    })??;
    let output = merge_runs(&runs, &opts.group, opts.jobs)?;
    checkpoint_all(&[("union_classes", expected::CLASSES, output.union_classes())], "", opts.strict)?;
    Ok(output)
}

/// Union of the runs, one entry per class under `group`.
pub fn merge_runs(
    runs: &[RunOutput],
    group: &GroupSpec,
    jobs: Option<usize>,
) -> Result<GeneralizationOutput, PipelineError> {
    let mut union = Vec::new();
    let mut origin = Vec::new();
    let mut is_accepted = Vec::new();
    for run in runs {
        for (b, ok) in run.accepted.iter().map(|b| (b, true)).chain(run.excluded.iter().map(|b| (b, false))) {
            union.push(b.clone());
            origin.push(run.xi.clone());
            is_accepted.push(ok);
        }
    }
    let union_size = union.len();
    let (inequalities, excluded) = with_pool(jobs, || {
        let classes = equivalence::classify(&union, group);
        let all: Vec<(bool, Generalization)> = classes
            .into_par_iter()
            .map(|(canonical, members)| {
                let accepted = members.iter().any(|&i| is_accepted[i]);
                let members: Vec<usize> = members.into_iter().filter(|&i| is_accepted[i] == accepted).collect();
                let representative = members
                    .iter()
                    .map(|&i| equivalence::canonical_form_with(&union[i], &GroupSpec::SYMMETRIC).form)
                    .min()
                    .expect("classes are nonempty");
                let mut assignments: Vec<Assignment> = members.iter().map(|&i| origin[i].clone()).collect();
                assignments.sort();
                assignments.dedup();
                let terms = bell::symmetric_term_count(&representative);
                (accepted, Generalization { representative, canonical, terms, assignments })
            })
            .collect();
        let (mut kept, mut dropped): (Vec<_>, Vec<_>) = all.into_iter().partition(|(ok, _)| *ok);
        for list in [&mut kept, &mut dropped] {
            list.sort_by(|(_, a), (_, b)| (a.terms, &a.representative).cmp(&(b.terms, &b.representative)));
        }
        let strip = |v: Vec<(bool, Generalization)>| v.into_iter().map(|(_, g)| g).collect::<Vec<_>>();
        (strip(kept), strip(dropped))
    })?;
    for g in &excluded {
        warn!(
            "class with vanishing reduction excluded: {}",
            bell::format_symmetric(&g.representative).unwrap_or_default()
        );
    }
    Ok(GeneralizationOutput {
        inequalities,
        excluded,
        reports: runs.iter().map(|r| r.report.clone()).collect(),
        union_size,
    })
}

#[derive(Clone, Debug)]
pub struct BancalOutput {
    /// Facets of the local cone with only full correlations, one per class.
    pub classes: Vec<BellInequality>,
    /// Facets of the projected cone, lifted, one per class. These are the facets
    /// of the symmetric full-correlation polytope, whether or not they are also
    /// facets of the local polytope.
    pub projected_classes: Vec<BellInequality>,
    pub report: RunReport,
}

/// Symmetric inequalities with only full correlations.
pub fn bancal_mode(opts: &PipelineOptions) -> Result<BancalOutput, PipelineError> {
    let start = Instant::now();
    let s = tripartite();
    let cone = bell::local_cone(&s);
    let mut rows = bell::symmetry_rows(&s);
    rows.extend(bell::full_correlation_rows(&s));
    let cs = ConstraintSystem::from_rows(s.dim(), rows)?;
    let out = with_pool(opts.jobs, || constrained::constrained_facets(&cone, &cs))??;
    let to_bell = |v: &IntVector| BellInequality::new(s, v.clone());
    let facets: Vec<BellInequality> = out.facets.iter().map(|f| to_bell(f.normal())).collect::<Result<_, _>>()?;
    let lifted: Vec<BellInequality> = out
        .facets
        .iter()
        .map(|f| f.normal())
        .chain(out.rejected.iter().map(|(f, _)| f.normal()))
        .map(to_bell)
        .collect::<Result<_, _>>()?;
    let classes = with_pool(opts.jobs, || equivalence::dedup(&facets, &opts.group))?;
    let projected_classes = with_pool(opts.jobs, || equivalence::dedup(&lifted, &opts.group))?;
    let (rows, cols) = cs.shape();
    let report = RunReport {
        xi: String::new(),
        g_shape: (rows, cols),
        g_rank: out.context.g_rank(),
        kernel_dim: out.context.kernel_dim(),
        projected_ray_count: out.context.distinct_images(),
        cone_ray_count: out.projected.len(),
        zero_projections: out.context.zero_projections(),
        candidate_count: out.candidates,
        facet_count: out.facets.len(),
        accepted_count: classes.len(),
        zero_reductions: 0,
        other_reductions: 0,
        timings: RunTimings {
            projection: out.timings.projection.as_secs_f64(),
            enumeration: out.timings.enumeration.as_secs_f64(),
            verification: out.timings.verification.as_secs_f64(),
            total: start.elapsed().as_secs_f64(),
        },
    };
    checkpoint_all(&[("bancal_classes", expected::BANCAL_CLASSES, classes.len())], "", opts.strict)?;
    Ok(BancalOutput { classes, projected_classes, report })
}

/// Rank of the tight vertices of `b` on the local cone of its scenario.
pub fn saturation_rank(b: &BellInequality) -> usize {
    let tight = bell::saturating_vertices(b);
    linalg::rank_of_rows(&tight, b.scenario().dim())
}
