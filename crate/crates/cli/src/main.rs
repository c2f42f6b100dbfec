//! Command-line front end over the pipeline stages. Every command validates
//! its configuration, runs (or resumes from cache) the stages it needs, and
//! emits a machine-readable report whose hashed body is reproducible for a
//! fixed configuration; wall-clock timings stay outside the hash.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num::{BigRational, One};
use sympder_core::sym::MAX_GENUS;
use sympder_core::{Genus, SamplingBudget, Spider};
use sympder_linalg::{default_primes, is_prime_u64};
use sympder_pipeline::stage::{sha256_hex, Staged};
use sympder_pipeline::{
    certified_rank, chord_span_rank, es_factorization_check, es_matrix, stage_cocycle,
    stage_coordinates, stage_w_matrix, verify_cocycle_numeric, verify_cocycle_symbolic,
    ChordClassTable, Cocycle, CocycleVector, PipelineError, Report, ReportBuilder, ReportConfig,
    StageConfig,
};

#[derive(Parser)]
#[command(
    name = "sympder",
    about = "Symplectic derivation invariants: dimensions, bracket ranks, and the weight-12 cocycle"
)]
struct Cli {
    /// Genus g of the underlying symplectic space (1..=16).
    #[arg(long, global = true, default_value_t = 6)]
    genus: usize,
    /// Even weight of the invariant space (2..=12).
    #[arg(long, global = true, default_value_t = 12)]
    weight: usize,
    /// Seed for every pseudorandom choice; fixes all sampled artifacts.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Two distinct certification primes in (2^31, 2^62), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    /// Reserved for future parallel kernels; runs are currently serial.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Spiders sampled per stabilization batch.
    #[arg(long, global = true, default_value_t = 64)]
    batch_size: usize,
    /// Rank-stable batches required before a sampled rank is accepted.
    #[arg(long, global = true, default_value_t = 3)]
    stable_batches: usize,
    /// Hard cap on stabilization batches.
    #[arg(long, global = true, default_value_t = 400)]
    budget_batches: usize,
    /// Directory for resumable stage artifacts (content-hash checked).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Certified dimension of the invariant part at (genus, weight).
    DimInvariants,
    /// Certified rank of the bracket image inside the invariant part.
    BracketRank {
        /// Draw bracket generators at this genus (default: --genus).
        #[arg(long)]
        sampler_genus: Option<usize>,
    },
    /// Extract the one-dimensional cokernel vector and write it to a file.
    FindCocycle {
        /// Output path for the cocycle artifact (JSON).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a cocycle file against fresh brackets or symbolically.
    Verify {
        #[arg(long, value_enum)]
        mode: VerifyMode,
        #[arg(long)]
        cocycle: PathBuf,
        /// Numeric mode: holdout brackets to test across the genus range.
        #[arg(long, default_value_t = 120)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        min_genus: usize,
        #[arg(long, default_value_t = 8)]
        max_genus: usize,
    },
    /// Pair a cocycle file with one spider and print the value.
    Eval {
        #[arg(long)]
        cocycle: PathBuf,
        /// Spider text, e.g. "S(a1,b1,a2,b2)".
        spider: String,
    },
    /// Chord-diagram trace functionals: rank, or the factorization check.
    Es {
        #[arg(long, value_enum)]
        check: EsCheck,
        /// Factorization mode: reuse this cocycle file instead of extracting.
        #[arg(long)]
        cocycle: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Numeric,
    Symbolic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EsCheck {
    Rank,
    Factorization,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print_report(&report, cli.format, primary_value(&cli.command, &report));
            ExitCode::SUCCESS
        }
        Err(err) => {
            let failure = serde_json::json!({
                "command": command_name(&cli.command),
                "error": err.to_string(),
            });
            eprintln!("{failure}");
            ExitCode::FAILURE
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::DimInvariants => "dim-invariants",
        Command::BracketRank { .. } => "bracket-rank",
        Command::FindCocycle { .. } => "find-cocycle",
        Command::Verify { .. } => "verify",
        Command::Eval { .. } => "eval",
        Command::Es { .. } => "es",
    }
}

/// Single-value commands print just the value in text mode.
fn primary_value(cmd: &Command, report: &Report) -> Option<String> {
    let key = match cmd {
        Command::DimInvariants => "dim",
        Command::Eval { .. } => "value",
        _ => return None,
    };
    report.results.get(key).map(|v| match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    })
}

fn print_report(report: &Report, format: Format, primary: Option<String>) {
    match format {
        Format::Json => println!(
            "{}",
            report.to_json().expect("report serializes to JSON")
        ),
        Format::Csv => print!("{}", report.to_csv()),
        Format::Text => match primary {
            Some(value) => println!("{value}"),
            None => print!("{}", report.to_text()),
        },
    }
}

fn run(cli: &Cli) -> Result<Report, PipelineError> {
    let cfg = validate(cli)?;
    match &cli.command {
        Command::DimInvariants => cmd_dim_invariants(cli, &cfg),
        Command::BracketRank { sampler_genus } => cmd_bracket_rank(cli, &cfg, *sampler_genus),
        Command::FindCocycle { out } => cmd_find_cocycle(cli, &cfg, out.as_deref()),
        Command::Verify {
            mode,
            cocycle,
            count,
            min_genus,
            max_genus,
        } => cmd_verify(cli, &cfg, *mode, cocycle, *count, *min_genus..=*max_genus),
        Command::Eval { cocycle, spider } => cmd_eval(cli, &cfg, cocycle, spider),
        Command::Es { check, cocycle } => cmd_es(cli, &cfg, *check, cocycle.as_deref()),
    }
}

fn validate(cli: &Cli) -> Result<StageConfig, PipelineError> {
    if cli.genus == 0 || cli.genus > MAX_GENUS {
        return Err(PipelineError::Artifact(format!(
            "genus {} out of range 1..={MAX_GENUS}",
            cli.genus
        )));
    }
    if cli.weight == 0 || cli.weight % 2 != 0 || cli.weight > 12 {
        return Err(PipelineError::Artifact(format!(
            "weight {} must be even and in 2..=12",
            cli.weight
        )));
    }
    let primes = match &cli.primes {
        None => default_primes(),
        Some(list) => {
            if list.len() != 2 || list[0] == list[1] {
                return Err(PipelineError::Artifact(
                    "--primes needs two distinct primes".into(),
                ));
            }
            for &p in list {
                if p <= (1 << 31) || p >= (1 << 62) || !is_prime_u64(p) {
                    return Err(PipelineError::Artifact(format!(
                        "{p} is not a prime in (2^31, 2^62)"
                    )));
                }
            }
            [list[0], list[1]]
        }
    };
    if cli.threads == 0 {
        return Err(PipelineError::Artifact("--threads must be positive".into()));
    }
    if cli.batch_size == 0 || cli.stable_batches == 0 || cli.budget_batches == 0 {
        return Err(PipelineError::Artifact(
            "budget parameters must be positive".into(),
        ));
    }
    if cli.weight > 8 {
        eprintln!(
            "warning: weight {} runs recompute large matrices and can take tens of minutes",
            cli.weight
        );
    }
    Ok(StageConfig {
        genus: cli.genus,
        weight: cli.weight,
        seed: cli.seed,
        primes,
        budget: SamplingBudget {
            batch_size: cli.batch_size,
            stable_batches: cli.stable_batches,
            max_batches: cli.budget_batches,
        },
        cache_dir: cli.cache_dir.clone(),
    })
}

fn builder(cli: &Cli, cfg: &StageConfig) -> ReportBuilder {
    ReportBuilder::new(command_name(&cli.command), ReportConfig::new(cfg, cli.threads))
}

fn note_artifact<T>(b: &mut ReportBuilder, name: &str, staged: &Staged<T>) {
    if let Some(hash) = &staged.artifact_hash {
        b.artifact(name, hash);
    }
    b.cache(name, staged.cache_hit);
    b.timing(name, staged.elapsed.as_millis());
}

fn cmd_dim_invariants(cli: &Cli, cfg: &StageConfig) -> Result<Report, PipelineError> {
    let staged = stage_coordinates(cfg)?;
    let mut b = builder(cli, cfg);
    b.result("dim", staged.value.rank)
        .result("batches_used", staged.value.batches_used)
        .result("certified", true);
    note_artifact(&mut b, "coordinates", &staged);
    Ok(b.finish())
}

fn cmd_bracket_rank(
    cli: &Cli,
    cfg: &StageConfig,
    sampler_genus: Option<usize>,
) -> Result<Report, PipelineError> {
    let sampler_genus = sampler_genus.unwrap_or(cfg.genus);
    if sampler_genus == 0 || sampler_genus > MAX_GENUS {
        return Err(PipelineError::Artifact(format!(
            "sampler genus {sampler_genus} out of range 1..={MAX_GENUS}"
        )));
    }
    let coords = stage_coordinates(cfg)?;
    let w = stage_w_matrix(cfg, &coords.value, sampler_genus)?;
    let mut b = builder(cli, cfg);
    b.result("invariant_dim", coords.value.rank)
        .result("bracket_rank", w.value.rank)
        .result("corank", w.value.ncols - w.value.rank)
        .result("sampler_genus", sampler_genus)
        .result("batches_used", w.value.batches_used)
        .result("certified", true);
    note_artifact(&mut b, "coordinates", &coords);
    note_artifact(&mut b, "bracket-matrix", &w);
    Ok(b.finish())
}

fn cmd_find_cocycle(
    cli: &Cli,
    cfg: &StageConfig,
    out: Option<&std::path::Path>,
) -> Result<Report, PipelineError> {
    let coords = stage_coordinates(cfg)?;
    let w = stage_w_matrix(cfg, &coords.value, cfg.genus)?;
    let cocycle = stage_cocycle(cfg, &coords.value, &w.value)?;
    let artifact = cocycle.value.artifact();

    let out_path = out.map(PathBuf::from).unwrap_or_else(|| {
        let name = format!("cocycle-g{}-w{}-s{}.json", cfg.genus, cfg.weight, cfg.seed);
        match &cfg.cache_dir {
            Some(dir) => dir.join(name),
            None => PathBuf::from(name),
        }
    });
    artifact.save(&out_path)?;
    let file_hash = sha256_hex(&fs::read(&out_path)?);

    let support = cocycle
        .value
        .kernel()
        .iter()
        .filter(|k| !num::Zero::is_zero(*k))
        .count();
    let mut b = builder(cli, cfg);
    b.result("corank", 1usize)
        .result("witness", artifact.witness.clone())
        .result("raw_witness_value", artifact.raw_witness_value.clone())
        .result("normalized_witness_value", "5832")
        .result("primes_used", artifact.primes_used.len())
        .result("support", support)
        .result("out", out_path.display().to_string());
    note_artifact(&mut b, "coordinates", &coords);
    note_artifact(&mut b, "bracket-matrix", &w);
    b.artifact("cocycle", &file_hash);
    b.timing("cocycle", cocycle.elapsed.as_millis());
    Ok(b.finish())
}

/// Load a cocycle artifact and rebuild the coordinate system it indexes,
/// from the artifact's own (genus, weight, seed) so a mismatched CLI config
/// cannot silently reinterpret the kernel.
fn load_cocycle(
    cfg: &StageConfig,
    path: &std::path::Path,
) -> Result<(Cocycle, sympder_core::CoordinateSystem, String), PipelineError> {
    let bytes = fs::read(path)?;
    let file_hash = sha256_hex(&bytes);
    let artifact: CocycleVector = serde_json::from_slice(&bytes)?;
    let cs_cfg = StageConfig {
        genus: artifact.genus,
        weight: artifact.weight,
        seed: artifact.seed,
        primes: cfg.primes,
        budget: cfg.budget.clone(),
        cache_dir: cfg.cache_dir.clone(),
    };
    let cs = stage_coordinates(&cs_cfg)?.value;
    let cocycle = Cocycle::from_artifact(artifact, &cs)?;
    Ok((cocycle, cs, file_hash))
}

fn cmd_verify(
    cli: &Cli,
    cfg: &StageConfig,
    mode: VerifyMode,
    path: &std::path::Path,
    count: usize,
    genus_range: std::ops::RangeInclusive<usize>,
) -> Result<Report, PipelineError> {
    let (cocycle, _cs, file_hash) = load_cocycle(cfg, path)?;
    let mut b = builder(cli, cfg);
    b.artifact("cocycle", &file_hash);
    match mode {
        VerifyMode::Numeric => {
            if genus_range.is_empty() || *genus_range.end() > MAX_GENUS {
                return Err(PipelineError::Artifact(
                    "empty or out-of-range genus range".into(),
                ));
            }
            let checked = verify_cocycle_numeric(&cocycle, genus_range.clone(), count, cfg.seed)?;
            b.result("mode", "numeric")
                .result("brackets_checked", checked)
                .result("min_genus", *genus_range.start())
                .result("max_genus", *genus_range.end())
                .result("failures", 0usize);
        }
        VerifyMode::Symbolic => {
            let weight = cocycle.artifact().weight;
            for split in 1..=weight / 2 {
                if !verify_cocycle_symbolic(&cocycle, split)? {
                    return Err(PipelineError::Artifact(format!(
                        "symbolic bracket polynomial is nonzero at split {split}"
                    )));
                }
            }
            b.result("mode", "symbolic")
                .result("splits_checked", weight / 2)
                .result("all_zero", true);
        }
    }
    Ok(b.finish())
}

fn cmd_eval(
    cli: &Cli,
    cfg: &StageConfig,
    path: &std::path::Path,
    spider_text: &str,
) -> Result<Report, PipelineError> {
    let (cocycle, _cs, file_hash) = load_cocycle(cfg, path)?;
    let spider: Spider = spider_text.parse().map_err(PipelineError::Core)?;
    let value = cocycle.eval(&spider.expand())?;
    let mut b = builder(cli, cfg);
    b.artifact("cocycle", &file_hash);
    b.result("spider", spider.to_string())
        .result("value", display_rational(&value));
    Ok(b.finish())
}

fn display_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn cmd_es(
    cli: &Cli,
    cfg: &StageConfig,
    check: EsCheck,
    cocycle_path: Option<&std::path::Path>,
) -> Result<Report, PipelineError> {
    let table = ChordClassTable::new(cfg.weight)?;
    let mut b = builder(cli, cfg);
    b.result("classes", table.len());
    match check {
        EsCheck::Rank => {
            let coords = stage_coordinates(cfg)?;
            let rows = es_matrix(&coords.value, &table)?;
            let rank = certified_rank(&rows, table.len(), cfg.primes)?;
            let span = chord_span_rank(
                Genus::new(cfg.genus).map_err(PipelineError::Core)?,
                &table,
                cfg.seed,
                &cfg.budget,
                cfg.primes,
            )?;
            b.result("trace_rank", rank)
                .result("chord_span", span)
                .result("certified", true);
            note_artifact(&mut b, "coordinates", &coords);
        }
        EsCheck::Factorization => {
            let (cocycle, cs, file_hash) = match cocycle_path {
                Some(path) => {
                    let (c, cs, h) = load_cocycle(cfg, path)?;
                    (c, cs, h)
                }
                None => {
                    let coords = stage_coordinates(cfg)?;
                    let w = stage_w_matrix(cfg, &coords.value, cfg.genus)?;
                    let staged = stage_cocycle(cfg, &coords.value, &w.value)?;
                    let hash = staged.artifact_hash.clone().unwrap_or_default();
                    (staged.value, coords.value, hash)
                }
            };
            if !file_hash.is_empty() {
                b.artifact("cocycle", &file_hash);
            }
            let rows = es_matrix(&cs, &table)?;
            let outcome =
                es_factorization_check(&cocycle, &cs, &rows, &table, cfg.primes, cfg.seed)?;
            let certified = outcome.cocycle_vanishes_on_kernel && outcome.mutation_nonzero;
            b.result("kernel_dim", outcome.kernel_dim)
                .result("kernel_vectors_checked", outcome.checked)
                .result("vanishes_on_kernel", outcome.cocycle_vanishes_on_kernel)
                .result("mutation_control_nonzero", outcome.mutation_nonzero)
                .result("certified", certified);
            if !certified {
                return Err(PipelineError::Artifact(
                    "trace factorization check failed: cocycle does not vanish on the trace kernel"
                        .into(),
                ));
            }
        }
    }
    Ok(b.finish())
}
