//! `conedyn`: analyze orbits of order-preserving min-max maps on polyhedral
//! cones, tabulate period bounds, construct maps with prescribed periods, and
//! sweep randomized map corpora for property violations.
//!
//! Exit codes: 0 success/converged; 1 input or domain error; 2 unbounded
//! orbit; 3 inconclusive within budget; 4 construction search budget
//! exhausted; 5 a structural property was falsified.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Map as JsonMap, Value};

use conedyn::bounds::{beta, table, table_csv};
use conedyn::cone::ConeSpec;
use conedyn::construct::build_period_map;
use conedyn::dsl::{
    check_dt_nonexpansive, check_order_preserving, check_subhomogeneous, corpus, parse_map,
    CheckReport, CorpusConfig, MinMaxMap, Sampler,
};
use conedyn::dynamics::{iterate_orbit, orbit_report_json, OrbitOptions, OrbitReport, Outcome};
use conedyn::point::Point;
use conedyn::scalar::{parse_rational, Scalar};
use conedyn::Error;

#[derive(Parser)]
#[command(
    name = "conedyn",
    version,
    about = "Periodic orbits of order-preserving min-max maps on polyhedral cones"
)]
struct Cli {
    /// RNG seed; defaults to $CONEDYN_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Omit the wall-clock timestamp so identical runs are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate a map and classify the orbit (JSON report).
    Orbit(OrbitArgs),
    /// Tabulate the period bounds alpha_N and beta_N (CSV).
    Bounds(BoundsArgs),
    /// Build a map with a certified periodic point of period lcm(p, q).
    Construct(ConstructArgs),
    /// Run property checks over a map corpus or a single map.
    Check(CheckArgs),
    /// Shorthand for `bounds --n-max 15`.
    Table1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Arbitrary-precision rational arithmetic (the oracle).
    Exact,
    /// f64 arithmetic with tolerance-based cycle detection.
    Float,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(Args)]
struct OrbitArgs {
    /// Map file in the min-max expression format.
    #[arg(long, value_name = "PATH")]
    map: PathBuf,

    /// Cone: `standard:<n>` or a cone file path. Defaults to the standard
    /// orthant of the map's dimension.
    #[arg(long, value_name = "SPEC")]
    cone: Option<String>,

    /// Starting point, comma-separated rationals: `1,2,0` or `1/2,3,1`.
    #[arg(long, value_name = "COORDS")]
    start: String,

    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,

    #[command(flatten)]
    opts: OrbitOptArgs,
}

#[derive(Args)]
struct OrbitOptArgs {
    /// Iteration budget before giving up as inconclusive.
    #[arg(long)]
    max_iters: Option<u64>,

    /// Float-mode equality tolerance.
    #[arg(long)]
    float_tol: Option<f64>,

    /// Sup-norm threshold above which the orbit counts as unbounded.
    #[arg(long)]
    divergence_bound: Option<f64>,

    /// Float mode: iterations to discard before trusting recurrences.
    #[arg(long)]
    burn_in: Option<u64>,

    /// Float mode: consecutive hits required to accept a period.
    #[arg(long)]
    consecutive_hits: Option<u32>,

    /// Float mode: total pairwise comparisons allowed during detection.
    #[arg(long)]
    pair_check_budget: Option<u64>,
}

impl OrbitOptArgs {
    fn resolve(&self) -> OrbitOptions {
        let mut o = OrbitOptions::default();
        if let Some(v) = self.max_iters {
            o.max_iters = v;
        }
        if let Some(v) = self.float_tol {
            o.float_tol = v;
        }
        if let Some(v) = self.divergence_bound {
            o.divergence_norm_bound = v;
        }
        if let Some(v) = self.burn_in {
            o.burn_in = v;
        }
        if let Some(v) = self.consecutive_hits {
            o.consecutive_hits = v;
        }
        if let Some(v) = self.pair_check_budget {
            o.pair_check_budget = v;
        }
        o
    }
}

#[derive(Args)]
struct BoundsArgs {
    /// Largest N to tabulate.
    #[arg(long, value_name = "K")]
    n_max: u64,

    /// Append the growth-rate ratio column.
    #[arg(long)]
    stirling: bool,
}

#[derive(Args)]
struct ConstructArgs {
    /// Ambient dimension of the standard cone.
    #[arg(long)]
    n: usize,
    /// Support size of each vector.
    #[arg(long)]
    m: usize,
    /// Inner period, at most C(m, floor(m/2)).
    #[arg(long)]
    p: usize,
    /// Support count, at most C(n, m).
    #[arg(long)]
    q: usize,
}

#[derive(Args)]
struct CheckArgs {
    /// Corpus spec `seed=7,count=100,dim=4`; omitted keys default to the
    /// global seed, 100 maps, dimension 4.
    #[arg(long, value_name = "SPEC", conflicts_with = "map")]
    corpus: Option<String>,

    /// Check a single map file instead of a corpus.
    #[arg(long, value_name = "PATH")]
    map: Option<PathBuf>,

    /// Starting point for the single-map orbit checks.
    #[arg(long, value_name = "COORDS", requires = "map")]
    start: Option<String>,

    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let seed = cli
        .seed
        .or_else(|| {
            std::env::var("CONEDYN_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(0);
    let sink = Sink {
        out: cli.out.clone(),
    };
    let stamp = Stamp {
        enabled: !cli.no_timestamp,
    };
    match cli.command {
        Command::Orbit(args) => cmd_orbit(args, seed, &sink, &stamp),
        Command::Bounds(args) => cmd_bounds(args, &sink),
        Command::Table1 => cmd_bounds(
            BoundsArgs {
                n_max: 15,
                stirling: false,
            },
            &sink,
        ),
        Command::Construct(args) => cmd_construct(args, seed, &sink, &stamp),
        Command::Check(args) => cmd_check(args, seed, &sink, &stamp),
    }
}

/// Output destination: `--out` file or stdout.
struct Sink {
    out: Option<PathBuf>,
}

impl Sink {
    fn write(&self, content: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, content)
                .with_context(|| format!("writing {}", path.display()))?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(content.as_bytes())?;
                stdout.flush()?;
            }
        }
        Ok(())
    }

    fn write_json(&self, value: &Value) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(&text)
    }
}

struct Stamp {
    enabled: bool,
}

impl Stamp {
    fn apply(&self, obj: &mut JsonMap<String, Value>) {
        if self.enabled {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            obj.insert("timestamp".into(), json!(secs));
        }
    }
}

/// Parse `1,2,0` / `1/2,3,1` into exact coordinates.
fn parse_start(text: &str) -> anyhow::Result<Vec<BigRational>> {
    text.split(',')
        .map(|tok| parse_rational(tok).map_err(|e| anyhow!("bad coordinate {tok:?}: {e}")))
        .collect()
}

/// `standard:<n>` or a cone file path.
fn parse_cone_arg<S: Scalar>(spec: &str) -> anyhow::Result<ConeSpec<S>> {
    if let Some(n) = spec.strip_prefix("standard:") {
        let n: usize = n
            .parse()
            .map_err(|_| anyhow!("bad cone dimension in {spec:?}"))?;
        if n == 0 || n > conedyn::MAX_FACETS {
            bail!("cone dimension must be in 1..={}", conedyn::MAX_FACETS);
        }
        return Ok(ConeSpec::standard(n));
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading cone {spec}"))?;
    Ok(ConeSpec::parse(&text)?)
}

fn options_json(o: &OrbitOptions) -> Value {
    json!({
        "max_iters": o.max_iters,
        "float_tol": o.float_tol,
        "divergence_norm_bound": o.divergence_norm_bound,
        "burn_in": o.burn_in,
        "consecutive_hits": o.consecutive_hits,
        "pair_check_budget": o.pair_check_budget,
    })
}

fn cmd_orbit(args: OrbitArgs, seed: u64, sink: &Sink, stamp: &Stamp) -> anyhow::Result<u8> {
    let map_text = std::fs::read_to_string(&args.map)
        .with_context(|| format!("reading map {}", args.map.display()))?;
    let map = parse_map(&map_text)?;
    let cone_spec = args
        .cone
        .clone()
        .unwrap_or_else(|| format!("standard:{}", map.dim()));
    let start = parse_start(&args.start)?;
    let opts = args.opts.resolve();

    let (mut obj, outcome_code, falsified) = match args.mode {
        Mode::Exact => {
            let cone: ConeSpec<BigRational> = parse_cone_arg(&cone_spec)?;
            let x0 = Point::from_rationals(&start);
            let report = iterate_orbit(&cone, &map, &x0, &opts)?;
            finish_orbit(&report)
        }
        Mode::Float => {
            let cone: ConeSpec<f64> = parse_cone_arg(&cone_spec)?;
            let x0: Point<f64> = Point::from_rationals(&start).convert();
            let report = iterate_orbit(&cone, &map, &x0, &opts)?;
            finish_orbit(&report)
        }
    };

    obj.insert("seed".into(), json!(seed));
    obj.insert("mode".into(), json!(args.mode.name()));
    obj.insert("options".into(), options_json(&opts));
    stamp.apply(&mut obj);
    sink.write_json(&Value::Object(obj))?;

    if falsified {
        eprintln!("a structural cycle check was falsified; see the report");
        return Ok(5);
    }
    Ok(outcome_code)
}

fn finish_orbit<S: Scalar>(report: &OrbitReport<S>) -> (JsonMap<String, Value>, u8, bool) {
    let obj = match orbit_report_json(report) {
        Value::Object(m) => m,
        _ => unreachable!("orbit report is an object"),
    };
    let code = match report.outcome {
        Outcome::Converged { .. } => 0,
        Outcome::Unbounded { .. } => 2,
        Outcome::Inconclusive { .. } => 3,
    };
    (obj, code, report.falsification())
}

fn cmd_bounds(args: BoundsArgs, sink: &Sink) -> anyhow::Result<u8> {
    let rows = table(args.n_max, args.stirling)?;
    sink.write(&table_csv(&rows))?;
    Ok(0)
}

fn cmd_construct(args: ConstructArgs, seed: u64, sink: &Sink, stamp: &Stamp) -> anyhow::Result<u8> {
    let built = match build_period_map(args.n, args.m, args.p, args.q) {
        Ok(b) => b,
        Err(e @ Error::Budget { .. }) => {
            eprintln!("error: {e}");
            return Ok(4);
        }
        Err(e) => return Err(e.into()),
    };
    let start: Vec<String> = built.start.coords().iter().map(|c| c.to_string()).collect();
    let mut obj = JsonMap::new();
    obj.insert("map".into(), json!(built.map.to_string()));
    obj.insert("start".into(), json!(start));
    obj.insert("period".into(), json!(built.period));
    obj.insert("confirmed".into(), json!(true));
    obj.insert("seed".into(), json!(seed));
    stamp.apply(&mut obj);
    sink.write_json(&Value::Object(obj))?;
    Ok(0)
}

/// Key=value triple `seed=7,count=100,dim=4` with per-key defaults.
fn parse_corpus_spec(text: &str, default_seed: u64) -> anyhow::Result<CorpusConfig> {
    let mut cfg = CorpusConfig::new(default_seed, 100, 4);
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, got {part:?}"))?;
        match key.trim() {
            "seed" => cfg.seed = value.parse().context("corpus seed")?,
            "count" => cfg.count = value.parse().context("corpus count")?,
            "dim" => cfg.dim = value.parse().context("corpus dim")?,
            other => bail!("unknown corpus key {other:?} (expected seed, count, dim)"),
        }
    }
    if cfg.dim == 0 || cfg.dim > conedyn::MAX_FACETS {
        bail!("corpus dim must be in 1..={}", conedyn::MAX_FACETS);
    }
    Ok(cfg)
}

/// Pass/fail tallies for one sampled property across the run.
#[derive(Default)]
struct Tally {
    checked: usize,
    failures: usize,
}

impl Tally {
    fn absorb<S: Scalar>(
        &mut self,
        report: &CheckReport<S>,
        label: &str,
        map_index: usize,
        violations: &mut Vec<Value>,
    ) {
        self.checked += 1;
        if !report.passed() {
            self.failures += 1;
            violations.push(json!({
                "map_index": map_index,
                "property": label,
                "witness": format!("{report:?}"),
            }));
        }
    }

    fn json(&self) -> Value {
        json!({ "checked": self.checked, "failures": self.failures })
    }
}

fn cmd_check(args: CheckArgs, seed: u64, sink: &Sink, stamp: &Stamp) -> anyhow::Result<u8> {
    match (&args.corpus, &args.map) {
        (Some(spec), None) => {
            let cfg = parse_corpus_spec(spec, seed)?;
            match args.mode {
                Mode::Exact => check_corpus::<BigRational>(&cfg, args.mode, sink, stamp),
                Mode::Float => check_corpus::<f64>(&cfg, args.mode, sink, stamp),
            }
        }
        (None, Some(path)) => {
            let map_text = std::fs::read_to_string(path)
                .with_context(|| format!("reading map {}", path.display()))?;
            let map = parse_map(&map_text)?;
            let start = args.start.as_deref().map(parse_start).transpose()?;
            match args.mode {
                Mode::Exact => check_single::<BigRational>(
                    &map, path, start.as_deref(), seed, args.mode, sink, stamp,
                ),
                Mode::Float => {
                    check_single::<f64>(&map, path, start.as_deref(), seed, args.mode, sink, stamp)
                }
            }
        }
        (None, None) => bail!("check needs --corpus or --map"),
        (Some(_), Some(_)) => unreachable!("clap forbids --corpus with --map"),
    }
}

fn check_corpus<S: Scalar>(
    cfg: &CorpusConfig,
    mode: Mode,
    sink: &Sink,
    stamp: &Stamp,
) -> anyhow::Result<u8> {
    let maps = corpus(cfg);
    let cone = ConeSpec::<S>::standard(cfg.dim);
    let bound = beta(cfg.dim as u64)?;
    let opts = OrbitOptions {
        max_iters: 400,
        ..OrbitOptions::default()
    };

    let mut order = Tally::default();
    let mut subhom = Tally::default();
    let mut nonexp = Tally::default();
    let mut violations: Vec<Value> = Vec::new();
    let mut converged = 0usize;
    let mut max_period = 0usize;

    for (i, map) in maps.iter().enumerate() {
        let mut sampler = Sampler::<S>::new(cfg.seed.wrapping_add(i as u64), cfg.dim);
        order.absorb(
            &check_order_preserving(map, &mut sampler, 50)?,
            "order_preserving",
            i,
            &mut violations,
        );
        subhom.absorb(
            &check_subhomogeneous(map, &mut sampler, 50)?,
            "subhomogeneous",
            i,
            &mut violations,
        );
        nonexp.absorb(
            &check_dt_nonexpansive(&cone, map, &mut sampler, 30)?,
            "dt_nonexpansive",
            i,
            &mut violations,
        );

        let x0 = sampler.point();
        let report = iterate_orbit(&cone, map, &x0, &opts)?;
        if let Outcome::Converged { period, .. } = report.outcome {
            converged += 1;
            max_period = max_period.max(period);
            if report.falsification() {
                violations.push(json!({
                    "map_index": i,
                    "property": "cycle_checks",
                    "map": map.to_string(),
                    "witness": orbit_report_json(&report),
                }));
            }
        }
    }

    let mut obj = JsonMap::new();
    obj.insert("schema".into(), json!("check-report/1"));
    obj.insert("mode".into(), json!(mode.name()));
    obj.insert(
        "source".into(),
        json!({ "corpus": { "seed": cfg.seed, "count": cfg.count, "dim": cfg.dim } }),
    );
    obj.insert("seed".into(), json!(cfg.seed));
    obj.insert("maps".into(), json!(maps.len()));
    obj.insert("converged".into(), json!(converged));
    obj.insert("max_period".into(), json!(max_period));
    obj.insert("period_bound".into(), json!(bound.to_string()));
    obj.insert(
        "properties".into(),
        json!({
            "order_preserving": order.json(),
            "subhomogeneous": subhom.json(),
            "dt_nonexpansive": nonexp.json(),
        }),
    );
    obj.insert("violations".into(), Value::Array(violations.clone()));
    stamp.apply(&mut obj);
    sink.write_json(&Value::Object(obj))?;

    if !violations.is_empty() {
        eprintln!("{} property violation(s); see the witness dump", violations.len());
        return Ok(5);
    }
    Ok(0)
}

fn check_single<S: Scalar>(
    map: &MinMaxMap,
    path: &PathBuf,
    start: Option<&[BigRational]>,
    seed: u64,
    mode: Mode,
    sink: &Sink,
    stamp: &Stamp,
) -> anyhow::Result<u8> {
    let cone = ConeSpec::<S>::standard(map.dim());
    let mut sampler = Sampler::<S>::new(seed, map.dim());
    let mut violations: Vec<Value> = Vec::new();
    let mut props = JsonMap::new();

    let mut absorb = |label: &str, report: CheckReport<S>, violations: &mut Vec<Value>| {
        props.insert(label.into(), json!(if report.passed() { "pass" } else { "fail" }));
        if !report.passed() {
            violations.push(json!({ "property": label, "witness": format!("{report:?}") }));
        }
    };
    absorb(
        "order_preserving",
        check_order_preserving(map, &mut sampler, 100)?,
        &mut violations,
    );
    absorb(
        "subhomogeneous",
        check_subhomogeneous(map, &mut sampler, 100)?,
        &mut violations,
    );
    absorb(
        "dt_nonexpansive",
        check_dt_nonexpansive(&cone, map, &mut sampler, 50)?,
        &mut violations,
    );

    let mut obj = JsonMap::new();
    obj.insert("schema".into(), json!("check-report/1"));
    obj.insert("mode".into(), json!(mode.name()));
    obj.insert("source".into(), json!({ "map": path.display().to_string() }));
    obj.insert("seed".into(), json!(seed));

    if let Some(coords) = start {
        let x0 = Point::from_rationals(coords).convert::<S>();
        let report = iterate_orbit(&cone, map, &x0, &OrbitOptions::default())?;
        if let Some(checks) = &report.checks {
            let verdict = |pass: bool| json!(if pass { "pass" } else { "fail" });
            props.insert("antichain".into(), verdict(checks.antichain.pass));
            props.insert("m_invariance".into(), verdict(checks.m_invariance.pass));
            props.insert("period_bound".into(), verdict(checks.period_bound.pass));
            props.insert("factorization".into(), verdict(checks.factorization.pass));
            if report.falsification() {
                violations.push(json!({
                    "property": "cycle_checks",
                    "witness": orbit_report_json(&report),
                }));
            }
        }
        obj.insert("outcome".into(), json!(report.outcome.label()));
    }

    obj.insert("properties".into(), Value::Object(props));
    obj.insert("violations".into(), Value::Array(violations.clone()));
    stamp.apply(&mut obj);
    sink.write_json(&Value::Object(obj))?;

    if !violations.is_empty() {
        eprintln!("{} property violation(s); see the witness dump", violations.len());
        return Ok(5);
    }
    Ok(0)
}
