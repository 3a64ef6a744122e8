//! `gbsbin`: binned photon-count distributions and sample validation.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gbs_binning::haar::{haar_gbs_asymptotic, monte_carlo_haar_average, FockLaw, Statistics};
use gbs_binning::validate::{generate_samples, ingest_samples, validate_samples};
use gbs_binning::{
    binned_distribution_of, BinPartition, BinnedDistribution, CutoffPolicy, Instance, SampleFormat, SqueezedInput,
    SqueezedInstance,
};

const EXIT_WARNINGS: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "gbsbin", version, about = "Binned photon-count distributions for Gaussian boson sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a binned distribution and write it as CSV plus a JSON sidecar.
    Dist(DistArgs),
    /// Report the photon cutoff chosen for an instance.
    Cutoff(CutoffArgs),
    /// Haar-averaged distribution for identical squeezers against the closed-form law.
    Haar(HaarArgs),
    /// Score a sample file against one or two hypotheses.
    Validate(ValidateArgs),
    /// Cross-check a small instance against the Fock-space simulator.
    Oracle(OracleArgs),
    /// Draw synthetic binned samples from an instance.
    Sample(SampleArgs),
}

#[derive(Args)]
struct PolicyArgs {
    /// Target tail probability beyond the cutoff.
    #[arg(long, default_value_t = 1e-10)]
    epsilon: f64,
    /// Smallest multiplier of the mean pair number tried by the cutoff search.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Fixed per-bin cutoff; skips the search.
    #[arg(long)]
    cutoff: Option<usize>,
}

impl PolicyArgs {
    fn policy(&self) -> Result<CutoffPolicy> {
        Ok(CutoffPolicy::new(self.epsilon, self.alpha, self.cutoff)?)
    }
}

#[derive(Args)]
struct DistArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Bins as one-based mode lists, e.g. '[[1,2],[3]]', or a file holding them.
    #[arg(long)]
    partition: String,
    #[command(flatten)]
    policy: PolicyArgs,
    /// CSV destination; the sidecar goes next to it with a .json extension.
    /// Without it the CSV goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CutoffArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
}

#[derive(Args)]
struct HaarArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    modes: usize,
    /// Squeezing parameter shared by all modes.
    #[arg(long)]
    squeezing: f64,
    /// Number of contiguous, near-equal bins covering all modes.
    #[arg(long, default_value_t = 2)]
    bins: usize,
    #[command(flatten)]
    policy: PolicyArgs,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for SampleFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => SampleFormat::Jsonl,
            FormatArg::Csv => SampleFormat::Csv,
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    /// Per-mode photon counts, one record per line.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
    #[arg(long)]
    hypothesis_a: PathBuf,
    #[arg(long, conflicts_with = "match_squashed")]
    hypothesis_b: Option<PathBuf>,
    /// Use squashed inputs with the mean photon number of hypothesis A as hypothesis B.
    #[arg(long)]
    match_squashed: bool,
    #[arg(long)]
    partition: String,
    #[command(flatten)]
    policy: PolicyArgs,
    /// JSON report destination (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    partition: String,
    /// Photon cutoff per bin for both tables.
    #[arg(long, default_value_t = 10)]
    cutoff: usize,
    /// Oracle table CSV destination.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Bins to sample; singletons give per-mode records.
    #[arg(long)]
    partition: String,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    policy: PolicyArgs,
    /// JSONL destination (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_partition(text: &str, modes: usize) -> Result<BinPartition> {
    let json = if text.trim_start().starts_with('[') {
        text.to_owned()
    } else {
        std::fs::read_to_string(text).with_context(|| format!("reading partition file {text}"))?
    };
    let bins: Vec<Vec<usize>> = serde_json::from_str(&json).context("partition must be a list of mode lists")?;
    Ok(BinPartition::from_one_based(&bins, modes)?)
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::load(path).with_context(|| format!("loading instance {}", path.display()))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn dist(args: DistArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let partition = parse_partition(&args.partition, inst.modes())?;
    let (d, _) = inst.binned_distribution(&partition, &args.policy.policy()?)?;
    let mut out = sink(args.output.as_deref())?;
    d.write_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &args.output {
        let mut sidecar = File::create(path.with_extension("json"))?;
        serde_json::to_writer_pretty(&mut sidecar, &d.sidecar())?;
        writeln!(sidecar)?;
    }
    Ok(0)
}

fn cutoff(args: CutoffArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let choice = inst.select_cutoff(&args.policy.policy()?)?;
    println!("{}", serde_json::to_string_pretty(&choice)?);
    Ok(0)
}

fn haar(args: HaarArgs) -> Result<u8> {
    let (m, r) = (args.modes, args.squeezing);
    let partition = BinPartition::contiguous(m, args.bins)?;
    let sizes = partition.sizes();
    let input = SqueezedInput::uniform(m, r)?;
    let choice = Instance::Squeezed(SqueezedInstance::new(input.clone(), gbs_binning::TransferMatrix::identity(m))?)
        .select_cutoff(&args.policy.policy()?)?;
    let avg = monte_carlo_haar_average(m, args.trials, args.seed, |u| {
        let inst = SqueezedInstance::new(input.clone(), u.clone())?;
        Ok(binned_distribution_of(&inst, &partition, choice.n)?.with_tail_bound(choice.tail_bound))
    })?;
    let mut out = sink(args.output.as_deref())?;
    let header: Vec<String> = (1..=args.bins).map(|i| format!("k_{i}")).collect();
    writeln!(out, "{},mc_mean,mc_stderr,asymptotic,asymptotic_distinguishable", header.join(","))?;
    for k in avg.patterns() {
        let (mean, se) = avg.get(&k).expect("pattern from the table");
        let law = |s| haar_gbs_asymptotic(&k, m, r, &sizes, s, FockLaw::Exact);
        let ks: Vec<String> = k.iter().map(usize::to_string).collect();
        writeln!(
            out,
            "{},{mean:.16e},{se:.16e},{:.16e},{:.16e}",
            ks.join(","),
            law(Statistics::Indistinguishable)?,
            law(Statistics::Distinguishable)?
        )?;
    }
    out.flush()?;
    Ok(0)
}

fn validate(args: ValidateArgs) -> Result<u8> {
    let samples = ingest_samples(&args.samples, args.format.into())
        .with_context(|| format!("reading samples {}", args.samples.display()))?;
    let a = load_instance(&args.hypothesis_a)?;
    let partition = parse_partition(&args.partition, a.modes())?;
    if samples.modes != a.modes() {
        bail!("samples have {} modes, hypothesis A has {}", samples.modes, a.modes());
    }
    let policy = args.policy.policy()?;
    let mut hypotheses: Vec<(String, BinnedDistribution)> = vec![("a".into(), a.binned_distribution(&partition, &policy)?.0)];
    let b = match (&args.hypothesis_b, args.match_squashed) {
        (Some(path), _) => Some(load_instance(path)?),
        (None, true) => Some(a.matched_squashed()?),
        (None, false) => None,
    };
    if let Some(b) = b {
        if b.modes() != a.modes() {
            bail!("hypothesis B has {} modes, hypothesis A has {}", b.modes(), a.modes());
        }
        hypotheses.push(("b".into(), b.binned_distribution(&partition, &policy)?.0));
    }
    let report = validate_samples(&samples, &partition, &hypotheses)?;
    let mut out = sink(args.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if report.has_warnings() { EXIT_WARNINGS } else { 0 })
}

fn oracle(args: OracleArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let partition = parse_partition(&args.partition, inst.modes())?;
    let brute = inst.oracle(&partition, args.cutoff)?;
    let analytic = inst.binned_distribution_at(&partition, args.cutoff)?;
    let summary = serde_json::json!({
        "cutoff": args.cutoff,
        "tv_distance": analytic.tv_distance(&brute.distribution),
        "truncation_loss": brute.truncation_loss,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(path) = &args.output {
        brute.distribution.write_csv(BufWriter::new(File::create(path)?))?;
    }
    Ok(0)
}

fn sample(args: SampleArgs) -> Result<u8> {
    let inst = load_instance(&args.instance)?;
    let partition = parse_partition(&args.partition, inst.modes())?;
    let (d, _) = inst.binned_distribution(&partition, &args.policy.policy()?)?;
    let samples = generate_samples(&d, args.count, args.seed)?;
    let mut out = sink(args.output.as_deref())?;
    samples.write_jsonl(&mut out)?;
    out.flush()?;
    Ok(0)
}

fn main() -> ExitCode {
    // usage errors share the error code; 2 is reserved for validation warnings
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Dist(a) => dist(a),
        Command::Cutoff(a) => cutoff(a),
        Command::Haar(a) => haar(a),
        Command::Validate(a) => validate(a),
        Command::Oracle(a) => oracle(a),
        Command::Sample(a) => sample(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
