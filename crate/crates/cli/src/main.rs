use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ldpcbound::complexity_bounds::{ip_complexity_bound, parallel_complexity_bound, rp_complexity_bound};
use ldpcbound::density_evolution::{de_threshold_with_tol, DensityEvolution};
use ldpcbound::io;
use ldpcbound::puncturing::punctured_design_rate;
use ldpcbound::rate_bounds::{ip_rate_bound, parallel_rate_bound, rp_rate_bound};
use ldpcbound::table::{render_csv, render_markdown, threshold_table, TableOptions};
use ldpcbound::thresholds::{capacity_limit_threshold, ml_threshold_with_tol, DEFAULT_TOL_PARAM};
use ldpcbound::{
    BoundResult, ChannelFamily, ChannelModel, DeConfig, EnsembleSpec, Error, ParallelAssignment,
    PuncturingPattern, TableRow, ThresholdResult,
};

#[derive(Parser, Debug)]
#[command(name = "ldpcbound", version, about = "Rate and complexity bounds and thresholds for LDPC ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Markdown,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Biawgn,
    Bec,
    Bsc,
}

impl From<Family> for ChannelFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Biawgn => ChannelFamily::Biawgn,
            Family::Bec => ChannelFamily::Bec,
            Family::Bsc => ChannelFamily::Bsc,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Upper bound on the rate of ensembles with vanishing bit error probability.
    BoundRate(BoundArgs),
    /// Lower bound on decoding complexity per iteration at a gap to capacity.
    BoundComplexity {
        #[command(flatten)]
        bound: BoundArgs,
        /// Multiplicative gap to capacity, in (0, 1].
        #[arg(long)]
        eps: f64,
    },
    /// Lowest channel quality compatible with the rate bound.
    ThresholdMl(ThresholdArgs),
    /// Channel quality at which capacity equals the design rate.
    ThresholdCapacity {
        #[command(flatten)]
        threshold: ThresholdArgs,
        /// Use this rate instead of deriving one from an ensemble.
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Density-evolution threshold of sum-product decoding.
    ThresholdIt {
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[command(flatten)]
        de: DeArgs,
        /// Write the per-iteration error probability at the threshold as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Threshold table for the bundled ensemble and puncturing patterns.
    Table1 {
        /// Comma-separated 1-based rows (default: all).
        #[arg(long, value_delimiter = ',')]
        rows: Option<Vec<usize>>,
        /// Skip the density-evolution column.
        #[arg(long)]
        skip_it: bool,
        #[arg(long, default_value_t = 1e-3)]
        tol_db: f64,
        #[command(flatten)]
        de: DeArgs,
    },
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Parallel-channel assignment (instead of --channel).
    #[arg(long, conflicts_with_all = ["channel", "pattern", "alpha"])]
    assignment: Option<PathBuf>,
    /// Intentional puncturing pattern.
    #[arg(long, conflicts_with = "alpha")]
    pattern: Option<PathBuf>,
    /// Fraction of bits selected for random puncturing.
    #[arg(long, requires = "ppct")]
    alpha: Option<f64>,
    /// Puncturing rate of the selected bits.
    #[arg(long, requires = "alpha")]
    ppct: Option<f64>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    pattern: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Family::Biawgn)]
    family: Family,
    /// Bisection resolution in dB (BIAWGN searches).
    #[arg(long, default_value_t = 1e-3)]
    tol_db: f64,
}

#[derive(Args, Debug)]
struct DeArgs {
    /// LLR saturation level.
    #[arg(long = "de-L", default_value_t = 30.0)]
    de_l: f64,
    /// LLR quantization step.
    #[arg(long = "de-step", default_value_t = 1.0 / 32.0)]
    de_step: f64,
    #[arg(long = "de-iters", default_value_t = 2000)]
    de_iters: usize,
}

impl DeArgs {
    fn config(&self) -> DeConfig {
        DeConfig {
            max_llr: self.de_l,
            step: self.de_step,
            max_iters: self.de_iters,
            ..DeConfig::default()
        }
    }
}

/// A failure with its exit status: 1 for bad input, 2 for numerical trouble.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numeric() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load<T>(path: &Path, parse: fn(&str) -> ldpcbound::Result<T>) -> Result<T, Failure> {
    parse(&read(path)?).map_err(|e| {
        let f = Failure::from(e);
        Failure {
            message: format!("{}: {}", path.display(), f.message),
            ..f
        }
    })
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    p.as_deref().ok_or_else(|| usage(format!("--{flag} is required here")))
}

fn load_pattern(p: &Option<PathBuf>) -> Result<PuncturingPattern, Failure> {
    match p {
        Some(path) => load(path, io::parse_pattern),
        None => Ok(PuncturingPattern::none()),
    }
}

fn num(value: f64, error: f64) -> Value {
    json!({ "value": value, "error_bound": error })
}

fn bound_json(b: &BoundResult<f64>) -> Value {
    json!({
        "bound": num(b.value, b.error_bound),
        "series_terms": b.series_terms,
        "argument_clamped": b.argument_clamped,
    })
}

/// Output in the requested format; the JSON form is rendered from a
/// `serde_json::Value` so that reparsing it reproduces the same bytes.
struct Report {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    json: Value,
}

impl Report {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = self.header.join(",");
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&r.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Markdown => {
                let mut s = format!("| {} |\n|", self.header.join(" | "));
                for _ in &self.header {
                    s.push_str("---|");
                }
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&format!("| {} |\n", r.join(" | ")));
                }
                s
            }
        }
    }
}

fn bound_rate(args: &BoundArgs) -> Result<Report, Failure> {
    let e: EnsembleSpec = load(required(&args.ensemble, "ensemble")?, io::parse_ensemble)?;
    let (mode, b) = if let Some(path) = &args.assignment {
        let a: ParallelAssignment = load(path, io::parse_assignment)?;
        ("parallel", parallel_rate_bound(&a, &e.gamma_node())?)
    } else {
        let ch: ChannelModel = load(required(&args.channel, "channel")?, io::parse_channel)?;
        match (args.alpha, args.ppct, &args.pattern) {
            (Some(alpha), Some(ppct), _) => ("random-puncturing", rp_rate_bound(&e, &ch, alpha, ppct)?),
            (_, _, Some(_)) => {
                let p = load_pattern(&args.pattern)?;
                ("intentional-puncturing", ip_rate_bound(&e, &ch, &p)?)
            }
            _ => (
                "single",
                parallel_rate_bound(&ParallelAssignment::single(ch), &e.gamma_node())?,
            ),
        }
    };
    let mut json = bound_json(&b);
    json["mode"] = json!(mode);
    Ok(Report {
        header: vec!["mode", "bound", "error_bound", "series_terms", "argument_clamped"],
        rows: vec![vec![
            mode.into(),
            format!("{:?}", b.value),
            format!("{:e}", b.error_bound),
            b.series_terms.to_string(),
            b.argument_clamped.to_string(),
        ]],
        json,
    })
}

fn bound_complexity(args: &BoundArgs, eps: f64) -> Result<Report, Failure> {
    let bound = if let Some(path) = &args.assignment {
        parallel_complexity_bound(&load(path, io::parse_assignment)?)?
    } else {
        let ch: ChannelModel = load(required(&args.channel, "channel")?, io::parse_channel)?;
        match (args.alpha, args.ppct, &args.pattern) {
            (Some(alpha), Some(ppct), _) => {
                let e = load(required(&args.ensemble, "ensemble")?, io::parse_ensemble)?;
                rp_complexity_bound(&e, &ch, alpha, ppct)?
            }
            (_, _, Some(_)) => {
                let e = load(required(&args.ensemble, "ensemble")?, io::parse_ensemble)?;
                ip_complexity_bound(&e, &ch, &load_pattern(&args.pattern)?)?
            }
            _ => parallel_complexity_bound(&ParallelAssignment::single(ch))?,
        }
    };
    let value = bound.at(eps)?;
    let variant = format!("{:?}", bound.variant);
    Ok(Report {
        header: vec!["variant", "eps", "k1", "k2", "average_capacity", "bound"],
        rows: vec![vec![
            variant.clone(),
            format!("{eps:?}"),
            format!("{:?}", bound.k1),
            format!("{:?}", bound.k2),
            format!("{:?}", bound.average_capacity),
            format!("{value:?}"),
        ]],
        json: json!({
            "variant": variant,
            "eps": eps,
            "k1": bound.k1,
            "k2": bound.k2,
            "average_capacity": bound.average_capacity,
            "bound": value,
        }),
    })
}

fn threshold_report(t: &ThresholdResult) -> Report {
    let kind = format!("{:?}", t.kind);
    let family = format!("{:?}", t.family);
    let db = t.eb_n0_db.map_or("-".into(), |v| format!("{v:.3}"));
    Report {
        header: vec!["kind", "family", "rate", "channel_param", "eb_n0_db", "tolerance"],
        rows: vec![vec![
            kind.clone(),
            family.clone(),
            format!("{:.6}", t.rate),
            format!("{:.6}", t.channel_param),
            db,
            format!("{:.1e}", t.tolerance),
        ]],
        json: json!({
            "kind": kind,
            "family": family,
            "rate": t.rate,
            "channel_param": t.channel_param,
            "eb_n0_db": t.eb_n0_db.map(|v| num(v, t.tolerance)),
            "tolerance": t.tolerance,
        }),
    }
}

fn search_tol(args: &ThresholdArgs) -> f64 {
    match args.family {
        Family::Biawgn => args.tol_db,
        _ => DEFAULT_TOL_PARAM,
    }
}

fn threshold_ml(args: &ThresholdArgs) -> Result<Report, Failure> {
    let e = load(required(&args.ensemble, "ensemble")?, io::parse_ensemble)?;
    let p = load_pattern(&args.pattern)?;
    let t = ml_threshold_with_tol(&e, &p, args.family.into(), search_tol(args))?;
    Ok(threshold_report(&t))
}

fn threshold_capacity(args: &ThresholdArgs, rate: Option<f64>) -> Result<Report, Failure> {
    let rate = match rate {
        Some(r) => r,
        None => {
            let e = load(required(&args.ensemble, "ensemble")?, io::parse_ensemble)?;
            punctured_design_rate(&e, &load_pattern(&args.pattern)?)?
        }
    };
    Ok(threshold_report(&capacity_limit_threshold(rate, args.family.into())?))
}

fn threshold_it(args: &ThresholdArgs, de: &DeArgs, trace: &Option<PathBuf>) -> Result<Report, Failure> {
    let e = load(required(&args.ensemble, "ensemble")?, io::parse_ensemble)?;
    let p = load_pattern(&args.pattern)?;
    let cfg = de.config();
    let family: ChannelFamily = args.family.into();
    let t = de_threshold_with_tol(&e, &p, family, &cfg, search_tol(args))?;
    if let Some(path) = trace {
        let coord = t.eb_n0_db.unwrap_or(t.channel_param);
        let mut engine = DensityEvolution::new(&e, &p, cfg)?;
        engine.set_channel(&family.channel_at(coord, t.rate)?)?;
        let mut steps = Vec::new();
        engine.run(Some(&mut steps))?;
        fs::write(path, ldpcbound::density_evolution::trace_csv(&steps))
            .map_err(|err| usage(format!("{}: {err}", path.display())))?;
    }
    Ok(threshold_report(&t))
}

fn table_json(rows: &[TableRow]) -> Value {
    let db = |t: &ThresholdResult| num(t.eb_n0_db.unwrap(), t.tolerance);
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "row": r.index,
                    "pattern": r.pattern.rates(),
                    "design_rate": num(r.design_rate, 0.0),
                    "capacity_limit_db": db(&r.capacity),
                    "ml_lower_bound_db": db(&r.ml),
                    "it_threshold_db": r.it.as_ref().map(db),
                    "fractional_gap": r.fractional_gap,
                    "tolerance_db": r.tolerance_db(),
                })
            })
            .collect(),
    )
}

fn table1(rows: &Option<Vec<usize>>, skip_it: bool, tol_db: f64, de: &DeArgs, format: Format) -> Result<String, Failure> {
    let (e, patterns) = io::bundled_table1()?;
    let wanted: Vec<usize> = match rows {
        Some(r) => r.clone(),
        None => (1..=patterns.len()).collect(),
    };
    let mut selected = Vec::new();
    for &i in &wanted {
        let p = patterns
            .get(i.wrapping_sub(1))
            .ok_or_else(|| usage(format!("row {i} does not exist (1..={})", patterns.len())))?;
        selected.push((i, p.clone()));
    }
    let opts = TableOptions {
        tol_db,
        de: if skip_it { None } else { Some(de.config()) },
    };
    let table = threshold_table(&e, &selected, &opts)?;
    Ok(match format {
        Format::Csv => render_csv(&table),
        Format::Markdown => render_markdown(&table),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&table_json(&table)).expect("JSON values serialize");
            s.push('\n');
            s
        }
    })
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("LDPCBOUND_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("LDPCBOUND_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<String, Failure> {
    configure_threads()?;
    let report = match &cli.command {
        Command::BoundRate(args) => bound_rate(args)?,
        Command::BoundComplexity { bound, eps } => bound_complexity(bound, *eps)?,
        Command::ThresholdMl(args) => threshold_ml(args)?,
        Command::ThresholdCapacity { threshold, rate } => threshold_capacity(threshold, *rate)?,
        Command::ThresholdIt { threshold, de, trace } => threshold_it(threshold, de, trace)?,
        Command::Table1 { rows, skip_it, tol_db, de } => {
            return table1(rows, *skip_it, *tol_db, de, cli.format);
        }
    };
    Ok(report.render(cli.format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
