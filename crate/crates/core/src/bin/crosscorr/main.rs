use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crosscorr::experiments::{
    collision_experiment, empirical_pmf, exact_distribution_oracle, run_trials, summarize, to_csv,
    total_variation, write_jsonl, ExperimentConfig, Mode, DEFAULT_ESTIMATOR_TRIALS,
};
use crosscorr::measures::{
    correlation_measure_with, cross_correlation_k_tuple, estimate_phi, estimate_phi_tilde,
    phi_tilde_with, phi_with, EnumOptions, MeasureResult, DEFAULT_BUDGET,
};
use crosscorr::seq::{format_sequence_file, sample_family, sample_generator};
use crosscorr::tailmath::{
    binom_point_lower_bound, hoeffding_bound, ml_exact, ml_tail, rk_threshold_scan, theorem_band,
    walk_tail_exact, BandKind, MlForm, ScanDirection, TailMode, TailQuery,
};
use crosscorr::{
    count_windows, parse_sequence_file, BinarySequence, Error, GeneratorSample, SeedStream,
    SequenceFamily,
};

#[derive(Parser, Debug)]
#[command(
    name = "crosscorr",
    version,
    about = "Correlation measures of binary sequences"
)]
struct Cli {
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MeasureKind {
    /// C_k of each sequence in the file
    C,
    /// C̃_k of the sequences in file order
    Ctilde,
    /// Φ_k of the family in the file
    Phi,
    /// Φ̃_k of the generator whose images are the file lines
    Phitilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Which {
    Family,
    Generator,
    Single,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a measure of sequences read from a file.
    Measure(MeasureArgs),
    /// Draw a random family or generator.
    Sample(SampleArgs),
    /// Monte Carlo trials against the typical-value band.
    Mc(McArgs),
    /// Typical-value band for a parameter set.
    Bounds(BoundsArgs),
    /// Binomial tails, Gaussian approximations and bounds.
    Tails(TailsArgs),
    /// The r_k deviation threshold.
    Rk(RkArgs),
    /// Exact distribution of Φ_k over all families, optionally against sampling.
    Oracle(OracleArgs),
    /// Collision-free rate of random generators.
    Collide(CollideArgs),
}

#[derive(Args, Debug)]
struct Budget {
    /// Max configurations for exact enumeration.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Ignore the budget.
    #[arg(long, conflicts_with = "approx")]
    force: bool,
    /// Over budget, report the sampling estimate (a lower bound) instead.
    #[arg(long)]
    approx: bool,
}

impl Budget {
    fn options(&self) -> EnumOptions {
        if self.force {
            EnumOptions::unlimited()
        } else {
            EnumOptions::with_budget(self.budget)
        }
    }
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = MeasureKind::Phi)]
    measure: MeasureKind,
    #[command(flatten)]
    budget: Budget,
    /// Estimator samples when --approx applies.
    #[arg(long, default_value_t = DEFAULT_ESTIMATOR_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
#[group(id = "card", required = true, multiple = false, args = ["size", "seeds"])]
struct Cardinality {
    /// Family size (distinct sequences).
    #[arg(long)]
    size: Option<usize>,
    /// Generator seed count (collisions allowed).
    #[arg(long)]
    seeds: Option<usize>,
}

impl Cardinality {
    fn resolve(&self) -> (Mode, usize) {
        match (self.size, self.seeds) {
            (Some(s), _) => (Mode::Family, s),
            (_, Some(s)) => (Mode::Generator, s),
            _ => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    length: usize,
    #[command(flatten)]
    card: Cardinality,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the sequences as an input file (must not exist).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long)]
    length: usize,
    #[command(flatten)]
    card: Cardinality,
    #[arg(long, conflicts_with_all = ["k_min", "k_max"], required_unless_present_all = ["k_min", "k_max"])]
    k: Option<usize>,
    #[arg(long, requires = "k_max")]
    k_min: Option<usize>,
    #[arg(long, requires = "k_min")]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Max configurations per exact computation.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Over budget, use the sampling estimator and flag records approximate.
    #[arg(long)]
    approx: bool,
    #[arg(long, default_value_t = DEFAULT_ESTIMATOR_TRIALS)]
    estimator_trials: u64,
    /// Target miss rate ε.
    #[arg(long, default_value_t = 0.05)]
    confidence: f64,
    /// Write full records as JSON Lines to a new file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    length: u64,
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 1)]
    cardinality: u64,
    #[arg(long, value_enum, default_value_t = Which::Family)]
    which: Which,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("query").required(true).args(["t", "c", "a", "point"])))]
struct TailsArgs {
    #[arg(long)]
    n: u64,
    /// P(S(n) ≥ t).
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Gaussian forms of P(S(n) ≥ ⌊n/2⌋ + c√n) against the exact value.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Hoeffding bound on P(S±(n) > a) against the exact value.
    #[arg(long)]
    a: Option<f64>,
    /// Lower estimate of P(S(n) = ⌊n/2⌋ + c) against the exact mass.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<i64>,
    /// Exact tail instead of the Gaussian approximation (with --t).
    #[arg(long)]
    exact: bool,
    /// Exact tail in rational arithmetic, n ≤ 256 (with --t).
    #[arg(long, requires = "exact")]
    rational: bool,
}

#[derive(Args, Debug)]
struct RkArgs {
    #[arg(long)]
    length: u64,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    seeds: u64,
    #[arg(long)]
    descending: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    length: usize,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    k: usize,
    /// Also sample this many families and report the total-variation distance.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct CollideArgs {
    #[arg(long)]
    length: usize,
    #[arg(long)]
    seeds: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Refused(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_feasibility() {
            Failure::Refused(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome = std::result::Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let start = Instant::now();
    let result = pool.install(|| dispatch(&cli));
    match result {
        Ok(out) => {
            print!("{out}");
            eprintln!("elapsed_ms: {}", start.elapsed().as_millis());
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Refused(msg)) => {
            eprintln!("refused: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Measure(a) => measure(a, cli.format),
        Command::Sample(a) => sample(a, cli.format),
        Command::Mc(a) => mc(a, cli.format),
        Command::Bounds(a) => bounds(a, cli.format),
        Command::Tails(a) => tails(a, cli.format),
        Command::Rk(a) => rk(a, cli.format),
        Command::Oracle(a) => oracle(a, cli.format),
        Command::Collide(a) => collide(a, cli.format),
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn read_input(path: &Path) -> Result<Vec<BinarySequence>, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(parse_sequence_file(&text)?)
}

fn measure_json(name: &str, n: usize, k: usize, r: &MeasureResult, approximate: bool) -> Value {
    json!({
        "measure": name,
        "n": n,
        "k": k,
        "value": r.value,
        "witness": {
            "members": r.witness.members,
            "d": r.witness.shifts,
            "m": r.witness.window,
        },
        "evaluated": r.evaluated,
        "approximate": approximate,
    })
}

fn measure(a: &MeasureArgs, format: Format) -> Outcome {
    let seqs = read_input(&a.input)?;
    let opts = a.budget.options();
    let n = seqs[0].len();
    let streams = SeedStream::new(a.seed);
    // exact first; over budget falls back to the estimator only with --approx
    let fallback = |exact: crosscorr::Result<MeasureResult>,
                    estimate: &dyn Fn() -> crosscorr::Result<MeasureResult>|
     -> Result<(MeasureResult, bool), Failure> {
        match exact {
            Err(Error::BudgetExceeded { .. }) if a.budget.approx => Ok((estimate()?, true)),
            other => Ok((other?, false)),
        }
    };
    let results: Vec<(String, MeasureResult, bool)> = match a.measure {
        MeasureKind::C => seqs
            .iter()
            .map(|s| {
                let r = correlation_measure_with(s, a.k, &opts)?;
                Ok(("c_k".to_string(), r, false))
            })
            .collect::<Result<_, Failure>>()?,
        MeasureKind::Ctilde => {
            let tuple: Vec<&BinarySequence> = seqs.iter().collect();
            if a.k != tuple.len() {
                return Err(Failure::Usage(format!(
                    "c-tilde of order {} needs {} sequences, file has {}",
                    a.k,
                    a.k,
                    tuple.len()
                )));
            }
            let count = count_windows(n, a.k, 1)?;
            if !a.budget.force && (count.saturated || count.count > a.budget.budget) {
                return Err(Error::BudgetExceeded {
                    count: count.count,
                    budget: a.budget.budget,
                }
                .into());
            }
            vec![(
                "c_tilde".into(),
                cross_correlation_k_tuple(&tuple, a.k)?,
                false,
            )]
        }
        MeasureKind::Phi => {
            let family = SequenceFamily::new(seqs.clone())?;
            let (r, approx) = fallback(phi_with(&family, a.k, &opts), &|| {
                estimate_phi(&family, a.k, a.trials, &streams)
            })?;
            vec![("phi".into(), r, approx)]
        }
        MeasureKind::Phitilde => {
            let gen = GeneratorSample::from_images(seqs.clone())?;
            let (r, approx) = fallback(phi_tilde_with(&gen, a.k, &opts), &|| {
                estimate_phi_tilde(&gen, a.k, a.trials, &streams)
            })?;
            vec![("phi_tilde".into(), r, approx)]
        }
    };
    Ok(match format {
        Format::Json => {
            let items: Vec<Value> = results
                .iter()
                .map(|(name, r, approx)| measure_json(name, n, a.k, r, *approx))
                .collect();
            if items.len() == 1 {
                pretty(&items[0])
            } else {
                pretty(&items)
            }
        }
        Format::Csv => csv_table(
            &[
                "measure",
                "n",
                "k",
                "value",
                "members",
                "d",
                "m",
                "evaluated",
                "approximate",
            ],
            &results
                .iter()
                .map(|(name, r, approx)| {
                    vec![
                        name.clone(),
                        n.to_string(),
                        a.k.to_string(),
                        r.value.to_string(),
                        join(&r.witness.members),
                        join(&r.witness.shifts),
                        r.witness.window.to_string(),
                        r.evaluated.to_string(),
                        approx.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    })
}

fn sample(a: &SampleArgs, format: Format) -> Outcome {
    let (mode, count) = a.card.resolve();
    let mut rng = SeedStream::new(a.seed).rng(0);
    let seqs: Vec<BinarySequence> = match mode {
        Mode::Family => sample_family(a.length, count, &mut rng)?.members().to_vec(),
        Mode::Generator => sample_generator(a.length, count, &mut rng)?
            .images()
            .cloned()
            .collect(),
    };
    if let Some(path) = &a.out {
        let mut file = fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        std::io::Write::write_all(&mut file, format_sequence_file(&seqs).as_bytes())
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(match format {
        Format::Json => pretty(&json!({
            "mode": mode.name(),
            "n": a.length,
            "cardinality": count,
            "seed": a.seed,
            "sequences": seqs.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        })),
        Format::Csv => csv_table(
            &["index", "sequence"],
            &seqs
                .iter()
                .enumerate()
                .map(|(i, s)| vec![i.to_string(), s.to_string()])
                .collect::<Vec<_>>(),
        ),
    })
}

fn mc(a: &McArgs, format: Format) -> Outcome {
    let (mode, cardinality) = a.card.resolve();
    let (k_min, k_max) = match (a.k, a.k_min, a.k_max) {
        (Some(k), _, _) => (k, k),
        (None, Some(lo), Some(hi)) => (lo, hi),
        _ => {
            return Err(Failure::Usage(
                "give --k or both --k-min and --k-max".into(),
            ))
        }
    };
    let config = ExperimentConfig {
        length: a.length,
        cardinality,
        k_min,
        k_max,
        trials: a.trials,
        seed: a.seed,
        mode,
        confidence: a.confidence,
        budget: Some(a.budget),
        allow_approx: a.approx,
        estimator_trials: a.estimator_trials,
    };
    config.validate()?;
    for k in config.ks() {
        for w in &config.band(k)?.warnings {
            eprintln!("warning: k = {k}: {w}");
        }
    }
    let records = run_trials(&config)?;
    if let Some(path) = &a.out {
        write_jsonl(path, &records)?;
    }
    let summary = summarize(&records)?;
    Ok(match format {
        Format::Json => {
            let rows: Vec<Value> = summary
                .iter()
                .map(|row| {
                    let mut v = serde_json::to_value(row).expect("row serializes");
                    let values = records.iter().filter(|r| r.k == row.k).map(|r| r.value);
                    let histogram: BTreeMap<u64, u64> = values.fold(BTreeMap::new(), |mut h, v| {
                        *h.entry(v).or_insert(0) += 1;
                        h
                    });
                    v["meets_confidence"] = json!(row.meets(config.confidence));
                    v["histogram"] = json!(histogram);
                    v
                })
                .collect();
            pretty(&json!({ "config": config, "summary": rows }))
        }
        Format::Csv => to_csv(&records),
    })
}

fn bounds(a: &BoundsArgs, format: Format) -> Outcome {
    let kind = match a.which {
        Which::Family => BandKind::Family,
        Which::Generator => BandKind::Generator,
        Which::Single => BandKind::Single,
    };
    let band = theorem_band(a.length, a.k, a.cardinality, kind)?;
    for w in &band.warnings {
        eprintln!("warning: {w}");
    }
    Ok(match format {
        Format::Json => pretty(&band),
        Format::Csv => csv_table(
            &["which", "n", "k", "cardinality", "base", "lower", "upper"],
            &[vec![
                kind.name().to_string(),
                band.n.to_string(),
                band.k.to_string(),
                band.cardinality.to_string(),
                band.base.to_string(),
                band.lower.to_string(),
                band.upper.to_string(),
            ]],
        ),
    })
}

fn object_csv(v: &Value) -> String {
    let obj = v.as_object().expect("flat object");
    let header: Vec<&str> = obj.keys().map(String::as_str).collect();
    let row: Vec<String> = obj
        .values()
        .map(|x| match x {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            other => other.to_string(),
        })
        .collect();
    csv_table(&header, &[row])
}

fn emit(v: Value, format: Format) -> String {
    match format {
        Format::Json => pretty(&v),
        Format::Csv => object_csv(&v),
    }
}

fn tails(a: &TailsArgs, format: Format) -> Outcome {
    let v = if let Some(t) = a.t {
        let mode = match (a.exact, a.rational) {
            (true, true) => TailMode::ExactRational,
            (true, false) => TailMode::ExactFloat,
            _ => TailMode::Approximate,
        };
        let tail = TailQuery {
            n: a.n,
            threshold: t,
            mode,
        }
        .evaluate()?;
        json!({ "n": a.n, "t": t, "mode": mode, "tail": tail })
    } else if let Some(c) = a.c {
        let integral = ml_tail(c, a.n, MlForm::Integral)?;
        let closed = if c > 0.0 {
            Some(ml_tail(c, a.n, MlForm::Closed)?)
        } else {
            None
        };
        json!({
            "n": a.n,
            "c": c,
            "integral": integral,
            "closed": closed,
            "exact": ml_exact(c, a.n),
        })
    } else if let Some(x) = a.a {
        let bound = hoeffding_bound(a.n, x)?;
        json!({ "n": a.n, "a": x, "hoeffding": bound, "exact": walk_tail_exact(a.n, x) })
    } else if let Some(c) = a.point {
        let p = binom_point_lower_bound(a.n, c)?;
        json!({ "n": a.n, "point": c, "bound": p.bound, "exact": p.exact, "ratio": p.ratio })
    } else {
        unreachable!("clap enforces the group")
    };
    Ok(emit(v, format))
}

fn rk(a: &RkArgs, format: Format) -> Outcome {
    let dir = if a.descending {
        ScanDirection::Descending
    } else {
        ScanDirection::Ascending
    };
    let r = rk_threshold_scan(a.length, a.k, a.seeds, dir)?;
    if r.below_zero {
        eprintln!("warning: even r = 0 misses the threshold");
    }
    let mut v = serde_json::to_value(&r).expect("serializes");
    let obj = v.as_object_mut().expect("object");
    let mut out = serde_json::Map::new();
    out.insert("n".into(), json!(a.length));
    out.insert("k".into(), json!(a.k));
    out.insert("seeds".into(), json!(a.seeds));
    out.append(obj);
    Ok(emit(Value::Object(out), format))
}

fn oracle(a: &OracleArgs, format: Format) -> Outcome {
    let exact = exact_distribution_oracle(a.length, a.size, a.k)?;
    let sampled = match a.trials {
        Some(trials) => {
            let config = ExperimentConfig::new(a.length, a.size, a.k, trials, a.seed);
            let records = run_trials(&config)?;
            Some(empirical_pmf(records.iter().map(|r| r.value)))
        }
        None => None,
    };
    let tv = sampled.as_ref().map(|s| total_variation(&exact, s));
    Ok(match format {
        Format::Json => pretty(&json!({
            "n": a.length,
            "size": a.size,
            "k": a.k,
            "pmf": exact,
            "empirical": sampled,
            "total_variation": tv,
        })),
        Format::Csv => {
            let mut values: Vec<u64> = exact.keys().copied().collect();
            if let Some(s) = &sampled {
                values.extend(s.keys());
                values.sort_unstable();
                values.dedup();
            }
            let rows: Vec<Vec<String>> = values
                .iter()
                .map(|v| {
                    vec![
                        v.to_string(),
                        exact.get(v).copied().unwrap_or(0.0).to_string(),
                        sampled
                            .as_ref()
                            .map(|s| s.get(v).copied().unwrap_or(0.0).to_string())
                            .unwrap_or_default(),
                    ]
                })
                .collect();
            csv_table(&["value", "probability", "empirical"], &rows)
        }
    })
}

fn collide(a: &CollideArgs, format: Format) -> Outcome {
    let report = collision_experiment(a.length, a.seeds, a.trials, a.seed)?;
    Ok(emit(
        serde_json::to_value(&report).expect("serializes"),
        format,
    ))
}
