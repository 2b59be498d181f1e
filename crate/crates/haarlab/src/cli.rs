//! Argument parsing and command dispatch.
//!
//! Machine-readable output (JSON, CSV, SVG) goes to --out files or stdout;
//! human summaries go to stderr. Every run is determined by its flags and
//! seeds, so repeated invocations emit identical bytes.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use haarlab::dyadic::enumerate_shapes;
use haarlab::exact::{fmt_f64, parse_rat, Rat, Scalar, Value};
use haarlab::grid::{cell_count, DEFAULT_CELL_BUDGET, DEFAULT_EXACT_CELL_BUDGET};
use haarlab::report::{
    certificate_json, json_value, lemma_csv, lp_csv, mode_name, scaling_csv,
    scaling_summary_json, search_result_file, svg_loglog, tails_csv, Json, Series,
};
use haarlab::riesz::{
    certificate, derive_params, lemma_checks, lp_growth_scan, tail_profile, RieszParams,
};
use haarlab::search::{
    exhaustive_min, local_search, scaling_study, SearchResult, Strategy,
    DEFAULT_EXHAUSTIVE_CAP,
};
use haarlab::signs::{build_hyperbolic_sum, canonical_m, SignAssignment};
use haarlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "haarlab",
    version,
    about = "Hyperbolic Haar sign sums: norms, Riesz-product certificates, extremal search"
)]
struct Cli {
    /// Cap the worker thread count (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the shape vectors with scale sum n in dimension d.
    Shapes(ShapesArgs),
    /// Build H for a sign assignment and summarize its value distribution.
    Eval(EvalArgs),
    /// L^p norms of H for a list of exponents.
    Norms(NormsArgs),
    /// Riesz-product lower-bound certificate for the sup norm of H.
    Certificate(CertificateArgs),
    /// Product statistics: masses, minima, and coincidence moments per block.
    Lemma(LemmaArgs),
    /// Tail mass profile of one block sum against the Gaussian reference.
    Tails(TailsArgs),
    /// Norm growth scan of H across even exponents with a fitted slope.
    LpScan(LpScanArgs),
    /// Minimize the sup norm of H over sign assignments.
    Search(SearchArgs),
    /// Random-vs-searched sup norm scaling study across n.
    Scaling(ScalingArgs),
}

#[derive(Args)]
struct SignSource {
    /// Sign-file JSON path (mutually exclusive with --seed).
    #[arg(long)]
    signs: Option<PathBuf>,

    /// Seed for a random sign assignment; requires --n and --d.
    #[arg(long)]
    seed: Option<u64>,

    /// Scale budget n (required with --seed, checked against --signs).
    #[arg(long)]
    n: Option<u32>,

    /// Dimension d (required with --seed, checked against --signs).
    #[arg(long)]
    d: Option<usize>,
}

impl SignSource {
    fn resolve(&self) -> Result<SignAssignment> {
        match (&self.signs, self.seed) {
            (Some(_), Some(_)) => Err(Error::Usage(
                "--signs and --seed are mutually exclusive".into(),
            )),
            (Some(path), None) => {
                let a = SignAssignment::load(path)?;
                if let Some(n) = self.n {
                    if n != a.n() {
                        return Err(Error::Usage(format!(
                            "--n {} disagrees with the sign file (n = {})",
                            n,
                            a.n()
                        )));
                    }
                }
                if let Some(d) = self.d {
                    if d != a.d() {
                        return Err(Error::Usage(format!(
                            "--d {} disagrees with the sign file (d = {})",
                            d,
                            a.d()
                        )));
                    }
                }
                Ok(a)
            }
            (None, Some(seed)) => match (self.n, self.d) {
                (Some(n), Some(d)) => SignAssignment::random(seed, n, d),
                _ => Err(Error::Usage("--seed requires --n and --d".into())),
            },
            (None, None) => Err(Error::Usage(
                "no sign source: pass --signs FILE or --seed N (randomness never \
                 defaults to the clock)"
                    .into(),
            )),
        }
    }
}

#[derive(Args)]
struct RieszArgs {
    /// Amplitude a in the parameter schedule (0 < a <= 1).
    #[arg(long, default_value_t = 1.0)]
    a: f64,

    /// Exponent offset kappa; defaults to 1/(4d).
    #[arg(long)]
    kappa: Option<f64>,

    /// Explicit block count, overriding the schedule.
    #[arg(long)]
    q: Option<u32>,

    /// Coupling as an exact rational, e.g. 1/8; enables exact mode.
    #[arg(long, value_parser = parse_rat_cli)]
    rho_tilde: Option<Rat>,
}

impl RieszArgs {
    fn derive(&self, n: u32, d: usize) -> Result<RieszParams> {
        let kappa = self.kappa.unwrap_or(1.0 / (4.0 * d as f64));
        derive_params(n, d, self.a, kappa, self.q, self.rho_tilde)
    }
}

fn parse_rat_cli(s: &str) -> std::result::Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum Mode {
    /// Exact when a rational coupling is given and the grid is small enough.
    Auto,
    Exact,
    Float,
}

fn use_exact(mode: Mode, p: &RieszParams, d: usize, n: u32) -> Result<bool> {
    match mode {
        Mode::Exact => {
            if p.rho_tilde_exact.is_none() {
                return Err(Error::ExactNeedsRationalRho);
            }
            Ok(true)
        }
        Mode::Float => Ok(false),
        Mode::Auto => Ok(p.rho_tilde_exact.is_some()
            && cell_count(d, canonical_m(n)) <= DEFAULT_EXACT_CELL_BUDGET as u128),
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct ShapesArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    d: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the listing here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    src: SignSource,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Grid allocation cap in cells.
    #[arg(long)]
    cell_budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NormsArgs {
    #[command(flatten)]
    src: SignSource,
    /// Comma-separated exponents; "inf" selects the max.
    #[arg(long, default_value = "1,2,4,inf")]
    p_list: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    cell_budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertificateArgs {
    #[command(flatten)]
    src: SignSource,
    #[command(flatten)]
    riesz: RieszArgs,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    #[arg(long)]
    cell_budget: Option<u64>,
    /// Write the certificate JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LemmaArgs {
    #[command(flatten)]
    src: SignSource,
    #[command(flatten)]
    riesz: RieszArgs,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    /// Moment exponents for the coincidence tables.
    #[arg(long, default_value = "2,4")]
    p_list: String,
    #[arg(long)]
    cell_budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TailsArgs {
    #[command(flatten)]
    src: SignSource,
    #[command(flatten)]
    riesz: RieszArgs,
    /// Block index, 1-based.
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// Comma-separated thresholds x for the tail mass at x * rho * sqrt(#block).
    #[arg(long, default_value = "0,0.25,0.5,0.75,1,1.25,1.5,1.75,2,2.25,2.5,2.75,3")]
    x_grid: String,
    #[arg(long)]
    cell_budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LpScanArgs {
    #[command(flatten)]
    src: SignSource,
    /// Even exponents to scan, at least three.
    #[arg(long, default_value = "2,4,6,8")]
    p_list: String,
    #[arg(long)]
    cell_budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    d: usize,
    /// exhaustive, hillclimb, or anneal.
    #[arg(long, default_value = "hillclimb")]
    strategy: String,
    /// Seed for the search stream; required except for exhaustive.
    #[arg(long)]
    seed: Option<u64>,
    /// Objective evaluations allowed per restart.
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    restarts: u32,
    /// Exhaustive enumeration cap in sign bits.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap: u64,
    #[arg(long)]
    cell_budget: Option<u64>,
    /// Write the result sign file (with search metadata) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a log-log chart of the improvement trace here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long)]
    d: usize,
    /// Inclusive range "2..10" or a comma list "2,4,8".
    #[arg(long)]
    n_range: String,
    #[arg(long, default_value_t = 10)]
    trials: u32,
    /// Master seed; per-row seeds derive from (seed, n, trial).
    #[arg(long)]
    seed: Option<u64>,
    /// hillclimb or anneal.
    #[arg(long, default_value = "hillclimb")]
    strategy: String,
    /// Search evaluations per restart; 0 records random signs unsearched.
    #[arg(long, default_value_t = 200)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    restarts: u32,
    #[arg(long)]
    cell_budget: Option<u64>,
    /// Write the scaling CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-n summary JSON here.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Write a log-log chart of medians and reference curves here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        if t > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            if matches!(e, Error::DegenerateQ { .. }) {
                eprintln!("error: {e} (try --q 1)");
            } else {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Shapes(a) => cmd_shapes(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Norms(a) => cmd_norms(a),
        Cmd::Certificate(a) => cmd_certificate(a),
        Cmd::Lemma(a) => cmd_lemma(a),
        Cmd::Tails(a) => cmd_tails(a),
        Cmd::LpScan(a) => cmd_lp_scan(a),
        Cmd::Search(a) => cmd_search(a),
        Cmd::Scaling(a) => cmd_scaling(a),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, content)?),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn budget(cell_budget: Option<u64>) -> u64 {
    cell_budget.unwrap_or(DEFAULT_CELL_BUDGET)
}

fn parse_u32_list(s: &str, what: &str) -> Result<Vec<u32>> {
    let list: Vec<u32> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Usage(format!("bad {what} entry: {t:?}")))
        })
        .collect::<Result<_>>()?;
    if list.is_empty() {
        return Err(Error::Usage(format!("{what} is empty")));
    }
    Ok(list)
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad {what} entry: {t:?}")))
        })
        .collect()
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    s.parse()
}

fn parse_n_range(s: &str) -> Result<Vec<u32>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u32 = lo
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("bad range start: {lo:?}")))?;
        let hi: u32 = hi
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("bad range end: {hi:?}")))?;
        if hi < lo {
            return Err(Error::Usage(format!("empty range {lo}..{hi}")));
        }
        Ok((lo..=hi).collect())
    } else {
        parse_u32_list(s, "n-range")
    }
}

fn cmd_shapes(a: ShapesArgs) -> Result<()> {
    let shapes = enumerate_shapes(a.n, a.d)?;
    let content = match a.format {
        Format::Text => {
            let mut s = String::new();
            for r in &shapes {
                s.push_str(&r.to_string());
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let doc = Json::Obj(vec![
                ("n", Json::Int(a.n as i128)),
                ("d", Json::Int(a.d as i128)),
                ("count", Json::Int(shapes.len() as i128)),
                (
                    "shapes",
                    Json::Arr(
                        shapes
                            .iter()
                            .map(|r| {
                                Json::Arr(
                                    r.scales().iter().map(|k| Json::Int(*k as i128)).collect(),
                                )
                            })
                            .collect(),
                    ),
                ),
            ]);
            doc.render() + "\n"
        }
    };
    emit(&a.out, &content)?;
    eprintln!("{} shapes for n = {}, d = {}", shapes.len(), a.n, a.d);
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let signs = a.src.resolve()?;
    let h = build_hyperbolic_sum(&signs, budget(a.cell_budget))?;
    let mut hist = std::collections::BTreeMap::new();
    for v in h.values() {
        *hist.entry(*v).or_insert(0u64) += 1;
    }
    let l2_sq = h.moment_abs(2)?;
    let mean = h.mean();
    let content = match a.format {
        Format::Text => {
            let mut s = format!(
                "n: {}\nd: {}\nshapes: {}\nlinf: {}\nl2_sq: {}\nmean: {}\nhist:\n",
                signs.n(),
                signs.d(),
                signs.shapes().len(),
                h.linf(),
                Value::Exact(l2_sq).exact_string(),
                Value::Exact(mean).exact_string(),
            );
            for (v, c) in &hist {
                s.push_str(&format!("  {v}: {c}\n"));
            }
            s
        }
        Format::Json => {
            let doc = Json::Obj(vec![
                ("n", Json::Int(signs.n() as i128)),
                ("d", Json::Int(signs.d() as i128)),
                ("shape_count", Json::Int(signs.shapes().len() as i128)),
                ("linf", Json::Int(h.linf() as i128)),
                ("l2_sq", json_value(&Value::Exact(l2_sq))),
                ("mean", json_value(&Value::Exact(mean))),
                (
                    "hist",
                    Json::Arr(
                        hist.iter()
                            .map(|(v, c)| {
                                Json::Arr(vec![Json::Int(*v as i128), Json::Int(*c as i128)])
                            })
                            .collect(),
                    ),
                ),
            ]);
            doc.render() + "\n"
        }
    };
    emit(&a.out, &content)?;
    eprintln!(
        "H built: linf = {}, l2_sq = {} over {} cells",
        h.linf(),
        h.values().iter().map(|v| (*v as i128) * (*v as i128)).sum::<i128>(),
        h.len()
    );
    Ok(())
}

enum PEntry {
    Finite(u32),
    Inf,
}

fn parse_p_entries(s: &str) -> Result<Vec<PEntry>> {
    let mut list = Vec::new();
    for t in s.split(',') {
        let t = t.trim();
        if t.eq_ignore_ascii_case("inf") {
            list.push(PEntry::Inf);
        } else {
            let p: u32 = t
                .parse()
                .map_err(|_| Error::Usage(format!("bad p-list entry: {t:?}")))?;
            if p == 0 {
                return Err(Error::Usage("p must be >= 1".into()));
            }
            list.push(PEntry::Finite(p));
        }
    }
    if list.is_empty() {
        return Err(Error::Usage("p-list is empty".into()));
    }
    Ok(list)
}

fn parse_finite_p_list(s: &str) -> Result<Vec<u32>> {
    parse_p_entries(s)?
        .into_iter()
        .map(|e| match e {
            PEntry::Finite(p) => Ok(p),
            PEntry::Inf => Err(Error::Usage("inf is not valid here".into())),
        })
        .collect()
}

fn cmd_norms(a: NormsArgs) -> Result<()> {
    let signs = a.src.resolve()?;
    let entries = parse_p_entries(&a.p_list)?;
    let h = build_hyperbolic_sum(&signs, budget(a.cell_budget))?;
    let mut text = String::new();
    let mut rows = Vec::new();
    for e in &entries {
        match e {
            PEntry::Finite(p) => {
                let moment = h.moment_abs(*p)?;
                let norm = moment.to_f64().powf(1.0 / *p as f64);
                text.push_str(&format!(
                    "p={p} moment={} norm={}\n",
                    Value::Exact(moment).exact_string(),
                    fmt_f64(norm)
                ));
                rows.push(Json::Obj(vec![
                    ("p", Json::Int(*p as i128)),
                    ("moment", json_value(&Value::Exact(moment))),
                    ("norm", Json::Float(norm)),
                ]));
            }
            PEntry::Inf => {
                let max = h.linf();
                text.push_str(&format!("p=inf max={max}\n"));
                rows.push(Json::Obj(vec![
                    ("p", Json::Str("inf".into())),
                    ("max", Json::Int(max as i128)),
                ]));
            }
        }
    }
    let content = match a.format {
        Format::Text => text,
        Format::Json => {
            Json::Obj(vec![
                ("n", Json::Int(signs.n() as i128)),
                ("d", Json::Int(signs.d() as i128)),
                ("rows", Json::Arr(rows)),
            ])
            .render()
                + "\n"
        }
    };
    emit(&a.out, &content)?;
    Ok(())
}

fn cmd_certificate(a: CertificateArgs) -> Result<()> {
    let signs = a.src.resolve()?;
    let (n, d) = (signs.n(), signs.d());
    let params = a.riesz.derive(n, d)?;
    let b = budget(a.cell_budget);
    let (doc, summary) = if use_exact(a.mode, &params, d, n)? {
        let c = certificate::<Rat>(&params, &signs, b)?;
        (certificate_json(&params, &c), summarize_certificate(&c))
    } else {
        let c = certificate::<f64>(&params, &signs, b)?;
        (certificate_json(&params, &c), summarize_certificate(&c))
    };
    emit(&a.out, &(doc.render() + "\n"))?;
    eprint!("{summary}");
    Ok(())
}

fn summarize_certificate<T: Scalar>(c: &haarlab::riesz::Certificate<T>) -> String {
    let show = |v: &T| {
        let val = v.to_value();
        let s = val.exact_string();
        if s.is_empty() {
            fmt_f64(val.to_f64())
        } else {
            s
        }
    };
    format!(
        "mode: {}\nbound: {} <= linf: {} ({})\nl2_floor: {}  n_eta: {}  gain: {}  \
         principal_reference: {}\nprincipal: {}\nidentity residual: {} ({})\n",
        mode_name::<T>(),
        show(&c.bound),
        c.linf_exact,
        if c.sound { "sound" } else { "UNSOUND" },
        fmt_f64(c.l2_floor),
        fmt_f64(c.n_pow_eta),
        fmt_f64(c.gain),
        fmt_f64(c.principal_reference),
        show(&c.principal),
        show(&c.residual),
        mode_name::<T>(),
    )
}

fn cmd_lemma(a: LemmaArgs) -> Result<()> {
    let signs = a.src.resolve()?;
    let (n, d) = (signs.n(), signs.d());
    let params = a.riesz.derive(n, d)?;
    let p_list = parse_finite_p_list(&a.p_list)?;
    let b = budget(a.cell_budget);
    let csv = if use_exact(a.mode, &params, d, n)? {
        lemma_csv(&lemma_checks::<Rat>(&params, &signs, &p_list, b)?)
    } else {
        lemma_csv(&lemma_checks::<f64>(&params, &signs, &p_list, b)?)
    };
    emit(&a.out, &csv.render())?;
    eprintln!("{} report rows", csv.row_count());
    Ok(())
}

fn cmd_tails(a: TailsArgs) -> Result<()> {
    let signs = a.src.resolve()?;
    let params = a.riesz.derive(signs.n(), signs.d())?;
    let x_grid = parse_f64_list(&a.x_grid, "x-grid")?;
    let rows = tail_profile(a.t, &params, &signs, &x_grid, budget(a.cell_budget))?;
    let csv = tails_csv(a.t, &rows);
    emit(&a.out, &csv.render())?;
    Ok(())
}

fn cmd_lp_scan(a: LpScanArgs) -> Result<()> {
    let signs = a.src.resolve()?;
    let p_list = parse_finite_p_list(&a.p_list)?;
    let h = build_hyperbolic_sum(&signs, budget(a.cell_budget))?;
    let rep = lp_growth_scan(&h, &p_list)?;
    emit(&a.out, &lp_csv(&rep).render())?;
    eprintln!("fitted log-slope: {}", fmt_f64(rep.slope));
    Ok(())
}

fn cmd_search(a: SearchArgs) -> Result<()> {
    let strategy = parse_strategy(&a.strategy)?;
    let b = budget(a.cell_budget);
    let result = match strategy {
        Strategy::Exhaustive => {
            if a.seed.is_some() {
                return Err(Error::Usage(
                    "exhaustive enumeration is deterministic; drop --seed".into(),
                ));
            }
            exhaustive_min(a.n, a.d, a.cap, b)?
        }
        _ => {
            let seed = a.seed.ok_or_else(|| {
                Error::Usage(format!("--seed is required for {}", strategy.name()))
            })?;
            local_search(a.n, a.d, strategy, seed, a.budget, a.restarts, b)?
        }
    };
    emit(&a.out, &search_result_file(&result))?;
    if let Some(path) = &a.svg {
        fs::write(path, trace_svg(&result))?;
    }
    eprintln!(
        "{}: best linf = {} after {} evaluations (l2 floor {})",
        result.strategy.name(),
        result.best_value,
        result.evaluations,
        fmt_f64(result.l2_floor())
    );
    Ok(())
}

fn trace_svg(r: &SearchResult) -> String {
    let series = vec![Series {
        name: r.strategy.name().into(),
        points: r
            .trace
            .iter()
            .map(|(e, v)| ((*e + 1) as f64, *v as f64))
            .collect(),
    }];
    svg_loglog(&series, "search improvement trace", "evaluations + 1", "best linf")
}

fn cmd_scaling(a: ScalingArgs) -> Result<()> {
    let strategy = parse_strategy(&a.strategy)?;
    let seed = a.seed.ok_or_else(|| {
        Error::Usage("--seed is required (randomness never defaults to the clock)".into())
    })?;
    let n_range = parse_n_range(&a.n_range)?;
    let table = scaling_study(
        a.d,
        &n_range,
        a.trials,
        seed,
        strategy,
        a.budget,
        a.restarts,
        budget(a.cell_budget),
    )?;
    emit(&a.out, &scaling_csv(&table).render())?;
    let summary = scaling_summary_json(&table);
    if let Some(path) = &a.summary {
        fs::write(path, summary.render() + "\n")?;
    }
    if let Some(path) = &a.svg {
        fs::write(path, scaling_svg(&table, a.d))?;
    }
    eprintln!(
        "fitted exponents: random {}, searched {}",
        fmt_f64(table.slope_random),
        fmt_f64(table.slope_searched)
    );
    Ok(())
}

fn scaling_svg(t: &haarlab::search::ScalingTable, d: usize) -> String {
    let ns: Vec<f64> = t.summaries.iter().map(|s| s.n as f64).collect();
    let curve = |f: &dyn Fn(f64) -> f64| ns.iter().map(|n| (*n, f(*n))).collect::<Vec<_>>();
    let half = (d as f64 - 1.0) / 2.0;
    let series = vec![
        Series {
            name: "median random".into(),
            points: t
                .summaries
                .iter()
                .map(|s| (s.n as f64, s.median_random))
                .collect(),
        },
        Series {
            name: "median searched".into(),
            points: t
                .summaries
                .iter()
                .map(|s| (s.n as f64, s.median_searched))
                .collect(),
        },
        Series {
            name: "n^((d-1)/2)".into(),
            points: curve(&|n| n.powf(half)),
        },
        Series {
            name: "n^(d/2)".into(),
            points: curve(&|n| n.powf(d as f64 / 2.0)),
        },
        Series {
            name: "n^((d-1)/2+1/(8d))".into(),
            points: curve(&|n| n.powf(half + 1.0 / (8.0 * d as f64))),
        },
    ];
    svg_loglog(&series, "sup norm scaling", "n", "linf")
}
