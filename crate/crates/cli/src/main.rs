use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bellfacets::bell::{self, Assignment, BellInequality, Scenario};
use bellfacets::cone::{self, LinearInequality};
use bellfacets::constrained;
use bellfacets::equivalence::{self, GroupSpec};
use bellfacets::io::{self as bio, ConeFile, ConstraintFile, InequalityRecord, JsonInt};
use bellfacets::pipeline::{self, PipelineError, PipelineOptions, RunReport};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact facet enumeration for Bell local polytopes with two outcomes.
#[derive(Parser)]
#[command(name = "bellfacets", version)]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deterministic vertices of a scenario, written as a cone file.
    Vertices {
        #[arg(long, value_name = "N,I")]
        scenario: Scenario,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All facets of a scenario's local cone or of a cone read from a file.
    Facets {
        #[command(flatten)]
        source: ConeSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Facets `b` of a cone with `G b = 0`.
    ConstrainedFacets {
        #[arg(long)]
        cone_file: PathBuf,
        #[arg(long)]
        constraints_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetric three-party facets reducing to I3322.
    I3322Generalize {
        #[arg(long)]
        out: PathBuf,
        /// Run reports; defaults to the output path with extension `reports.jsonl`.
        #[arg(long)]
        reports: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Symmetric three-party facets with only full correlations.
    Bancal {
        #[arg(long)]
        out: PathBuf,
        /// Also write the lifted facets of the projected cone, one per class.
        #[arg(long)]
        projected: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tests whether each inequality defines a facet of the local polytope.
    CheckFacet {
        #[arg(long, value_name = "N,I")]
        scenario: Scenario,
        #[arg(long)]
        ineq_file: PathBuf,
    },
    /// Minimum of each inequality's left-hand side over local strategies.
    ClassicalBound {
        #[arg(long)]
        ineq_file: PathBuf,
    },
    /// Fixes the last party's outcomes and drops it.
    Reduce {
        #[arg(long)]
        ineq_file: PathBuf,
        #[arg(long, value_name = "+,-,+", allow_hyphen_values = true)]
        assign: Assignment,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical form of each inequality under relabelings.
    Canon {
        #[command(flatten)]
        files: InOut,
        #[arg(long, value_enum, default_value_t = Group::Full)]
        group: Group,
    },
    /// Keeps the first inequality of each relabeling class.
    Dedup {
        #[command(flatten)]
        files: InOut,
        #[arg(long, value_enum, default_value_t = Group::Full)]
        group: Group,
    },
    /// Summary of run reports.
    Report {
        #[arg(long)]
        run_reports: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ConeSource {
    #[arg(long, value_name = "N,I")]
    scenario: Option<Scenario>,
    #[arg(long)]
    cone_file: Option<PathBuf>,
}

#[derive(Args)]
struct InOut {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Fail on any checkpoint mismatch (default).
    #[arg(long, overrides_with = "no_strict")]
    strict: bool,
    /// Log checkpoint mismatches as warnings and continue.
    #[arg(long, overrides_with = "strict")]
    no_strict: bool,
    /// Worker threads.
    #[arg(long, value_name = "K")]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Group::Full)]
    group: Group,
}

impl RunArgs {
    fn options(&self) -> Result<PipelineOptions> {
        if self.jobs == Some(0) {
            return Err(Usage("--jobs must be positive".into()).into());
        }
        Ok(PipelineOptions { strict: !self.no_strict, jobs: self.jobs, group: self.group.spec() })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    /// Party permutations, setting permutations and outcome flips.
    Full,
    /// The same setting relabeling on every party, with party permutations.
    Symmetric,
    /// Setting permutations and outcome flips on each party.
    Local,
}

impl Group {
    fn spec(self) -> GroupSpec {
        match self {
            Group::Full => GroupSpec::FULL,
            Group::Symmetric => GroupSpec::SYMMETRIC,
            Group::Local => GroupSpec { party_perms: false, ..GroupSpec::FULL },
        }
    }
}

/// An input or usage problem, reported with exit status 2.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// A failed check, reported with exit status 1.
#[derive(Debug)]
struct Failed(String);

impl fmt::Display for Failed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

fn exit_status(err: &anyhow::Error) -> u8 {
    let failed = err.chain().any(|e| e.is::<Failed>() || e.is::<PipelineError>());
    if failed {
        1
    } else {
        2
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_inequalities(path: &Path) -> Result<Vec<(InequalityRecord, BellInequality)>> {
    bio::read_inequalities(open(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())).into())
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())).into())
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout.
fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp =
                tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
            {
                let mut w = BufWriter::new(tmp.as_file_mut());
                write(&mut w)?;
                w.flush()?;
            }
            tmp.persist(path).with_context(|| format!("cannot create {}", path.display()))?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn write_records(w: &mut dyn Write, records: &[InequalityRecord]) -> Result<()> {
    bio::write_json_lines(w, records)?;
    Ok(())
}

fn write_normals(w: &mut dyn Write, facets: &[LinearInequality]) -> Result<()> {
    let rows: Vec<Vec<JsonInt>> = facets.iter().map(|f| f.normal().iter().cloned().map(JsonInt).collect()).collect();
    bio::write_json_lines(w, &rows)?;
    Ok(())
}

fn records(list: &[BellInequality]) -> Vec<InequalityRecord> {
    list.iter().map(InequalityRecord::from_inequality).collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Vertices { scenario, out } => {
            let file = ConeFile::from_cone(&bell::local_cone(&scenario));
            emit(out.as_deref(), |w| {
                serde_json::to_writer(&mut *w, &file)?;
                writeln!(w)?;
                Ok(())
            })
        }
        Command::Facets { source, out } => {
            if let Some(s) = source.scenario {
                let facets = cone::enumerate_facets(&bell::local_cone(&s))?;
                let list: Vec<BellInequality> =
                    facets.into_iter().map(|f| BellInequality::new(s, f.into_normal())).collect::<Result<_, _>>()?;
                eprintln!("{} facets", list.len());
                emit(out.as_deref(), |w| write_records(w, &records(&list)))
            } else {
                let path = source.cone_file.expect("clap requires one source");
                let c =
                    read_json::<ConeFile>(&path)?.to_cone().map_err(|e| Usage(format!("{}: {e}", path.display())))?;
                let facets = cone::enumerate_facets(&c).map_err(|e| Usage(e.to_string()))?;
                eprintln!("{} facets", facets.len());
                emit(out.as_deref(), |w| write_normals(w, &facets))
            }
        }
        Command::ConstrainedFacets { cone_file, constraints_file, out } => {
            let c = read_json::<ConeFile>(&cone_file)?
                .to_cone()
                .map_err(|e| Usage(format!("{}: {e}", cone_file.display())))?;
            let cs = read_json::<ConstraintFile>(&constraints_file)?
                .to_system()
                .map_err(|e| Usage(format!("{}: {e}", constraints_file.display())))?;
            let result = constrained::constrained_facets(&c, &cs).map_err(|e| Usage(e.to_string()))?;
            let ctx = &result.context;
            eprintln!(
                "G rank {}, kernel dimension {}, projected rays {}, candidates {}, facets {}",
                ctx.g_rank(),
                ctx.kernel_dim(),
                ctx.distinct_images(),
                result.candidates,
                result.facets.len()
            );
            emit(out.as_deref(), |w| write_normals(w, &result.facets))
        }
        Command::I3322Generalize { out, reports, run } => {
            let opts = run.options()?;
            let result = pipeline::generalize_i3322(&opts)?;
            let reports_path = reports.unwrap_or_else(|| out.with_extension("reports.jsonl"));
            emit(Some(&out), |w| write_records(w, &bio::generalization_records(&result)))?;
            emit(Some(&reports_path), |w| Ok(bio::write_json_lines(w, &result.reports)?))?;
            println!("facets over all runs: {}", result.union_size);
            println!("classes: {}", result.union_classes());
            println!("accepted: {}", result.inequalities.len());
            println!("excluded (zero reduction): {}", result.excluded.len());
            for g in result.inequalities.iter().take(3) {
                println!("  {}", bell::format_symmetric(&g.representative)?);
            }
            Ok(())
        }
        Command::Bancal { out, projected, run } => {
            let opts = run.options()?;
            let result = pipeline::bancal_mode(&opts)?;
            emit(Some(&out), |w| write_records(w, &records(&result.classes)))?;
            if let Some(path) = projected {
                emit(Some(&path), |w| write_records(w, &records(&result.projected_classes)))?;
            }
            let r = &result.report;
            println!("G {}x{}, rank {}, kernel dimension {}", r.g_shape.0, r.g_shape.1, r.g_rank, r.kernel_dim);
            println!(
                "projected rays {}, candidates {}, facets {}",
                r.projected_ray_count, r.candidate_count, r.facet_count
            );
            println!("classes: {}", result.classes.len());
            println!("projected-cone classes: {}", result.projected_classes.len());
            Ok(())
        }
        Command::CheckFacet { scenario, ineq_file } => {
            let c = bell::local_cone(&scenario);
            for (_, b) in read_inequalities(&ineq_file)? {
                if b.scenario() != scenario {
                    bail!(Usage(format!("inequality is for {}, not {scenario}", b.scenario())));
                }
                let report = cone::is_facet(&c, &LinearInequality::new(b.coeffs().clone())?)?;
                println!("facet: {}, saturating vertices: {}", report.is_facet, report.saturating.len());
            }
            Ok(())
        }
        Command::ClassicalBound { ineq_file } => {
            for (_, b) in read_inequalities(&ineq_file)? {
                println!("{}", bell::classical_bound(&b).min);
            }
            Ok(())
        }
        Command::Reduce { ineq_file, assign, out } => {
            let mut reduced = Vec::new();
            for (i, (_, b)) in read_inequalities(&ineq_file)?.into_iter().enumerate() {
                match bell::reduce(&b, &assign) {
                    Ok(r) => reduced.push(r),
                    Err(bell::BellError::ZeroReduction) => {
                        bail!(Failed(format!("record {}: reduction vanishes", i + 1)))
                    }
                    Err(e) => bail!(Usage(format!("record {}: {e}", i + 1))),
                }
            }
            emit(out.as_deref(), |w| write_records(w, &records(&reduced)))
        }
        Command::Canon { files, group } => {
            let spec = group.spec();
            let list: Vec<InequalityRecord> = read_inequalities(&files.input)?
                .into_iter()
                .map(|(rec, b)| {
                    let mut out = InequalityRecord::from_inequality(&equivalence::canonical_form_with(&b, &spec).form);
                    out.provenance = rec.provenance;
                    out.excluded = rec.excluded;
                    out
                })
                .collect();
            emit(files.out.as_deref(), |w| write_records(w, &list))
        }
        Command::Dedup { files, group } => {
            let input = read_inequalities(&files.input)?;
            let list: Vec<BellInequality> = input.iter().map(|(_, b)| b.clone()).collect();
            let mut firsts: Vec<usize> =
                equivalence::classify(&list, &group.spec()).into_iter().map(|(_, members)| members[0]).collect();
            firsts.sort_unstable();
            eprintln!("{} classes among {} inequalities", firsts.len(), list.len());
            let kept: Vec<InequalityRecord> = firsts.into_iter().map(|i| input[i].0.clone()).collect();
            emit(files.out.as_deref(), |w| write_records(w, &kept))
        }
        Command::Report { run_reports } => {
            let reports =
                bio::read_reports(open(&run_reports)?).map_err(|e| Usage(format!("{}: {e}", run_reports.display())))?;
            print_reports(&reports);
            Ok(())
        }
    }
}

fn print_reports(reports: &[RunReport]) {
    println!(
        "{:<8} {:>7} {:>5} {:>6} {:>5} {:>5} {:>10} {:>7} {:>8} {:>5} {:>8}",
        "xi", "G", "rank", "kernel", "rays", "cone", "candidates", "facets", "accepted", "zero", "seconds"
    );
    for r in reports {
        println!(
            "{:<8} {:>7} {:>5} {:>6} {:>5} {:>5} {:>10} {:>7} {:>8} {:>5} {:>8.2}",
            if r.xi.is_empty() { "-" } else { &r.xi },
            format!("{}x{}", r.g_shape.0, r.g_shape.1),
            r.g_rank,
            r.kernel_dim,
            r.projected_ray_count,
            r.cone_ray_count,
            r.candidate_count,
            r.facet_count,
            r.accepted_count,
            r.zero_reductions,
            r.timings.total
        );
    }
    let facets: usize = reports.iter().map(|r| r.facet_count).sum();
    let accepted: usize = reports.iter().map(|r| r.accepted_count).sum();
    println!("{} runs, {facets} facets, {accepted} accepted before dedup", reports.len());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
