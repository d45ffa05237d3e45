mod cache;
mod reference;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ratcher::apartment::{self, make_slope, regular_numbers, SlopeSpec, DEFAULT_ALCOVE_CAP};
use ratcher::coinvariant::DEFAULT_MONOMIAL_BUDGET;
use ratcher::dimensions::{total_dimension, DimOptions, DimReport, Parahoric};
use ratcher::rootdata::{build_root_datum, GroupSpec, RootDatum};
use ratcher::svg::apartment_figure;

use cache::Cache;
use reference::Feasibility;

#[derive(Parser)]
#[command(name = "ratcher", version, about = "Dimensions of spherical Cherednik modules via affine Springer fibers")]
struct Cli {
    /// Cache directory (overrides RATCHER_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Do not read or write the result cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the relative root datum of a group.
    Rootsys {
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Compute the total dimension at one slope.
    Dims(DimArgs),
    /// Per-clan breakdown at one slope.
    Clans(DimArgs),
    /// Draw the apartment of a rank-two (or rank-one) group as SVG.
    ApartmentSvg {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        slope: String,
        /// Output file; standard output if absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Batch over types and slopes.
    Table {
        /// Type labels, repeatable or comma-separated.
        #[arg(long = "type", value_delimiter = ',')]
        types: Vec<String>,
        /// Slopes `d/m`; by default every elliptic `1/m` with `m` regular.
        #[arg(long = "slope", value_delimiter = ',')]
        slopes: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Add runtime and cache-hit columns (output is then no longer reproducible).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        limits: Limits,
    },
    /// Verify the reference table of published values.
    Check {
        /// Alternative reference table (CSV).
        #[arg(long)]
        table: Option<PathBuf>,
        /// Also run entries marked as stretch goals.
        #[arg(long)]
        stretch: bool,
        /// Run entries marked as refused and confirm that they are refused.
        #[arg(long)]
        verify_refusals: bool,
        #[command(flatten)]
        limits: Limits,
    },
}

#[derive(Args, Clone)]
struct GroupArgs {
    /// Type label such as `E8`, `2A4`, `3D4`, or a bare family letter with `--rank`.
    #[arg(long = "type")]
    type_label: String,
    /// Absolute rank, when `--type` is a family letter.
    #[arg(long)]
    rank: Option<usize>,
    /// Order of the diagram automorphism (1, 2 or 3).
    #[arg(long)]
    twist: Option<u32>,
}

#[derive(Args, Clone)]
struct Limits {
    /// Largest monomial space the coinvariant computation may use.
    #[arg(long, default_value_t = DEFAULT_MONOMIAL_BUDGET)]
    budget: u128,
    /// Largest number of alcoves the enumeration may visit.
    #[arg(long, default_value_t = DEFAULT_ALCOVE_CAP)]
    alcove_cap: usize,
}

#[derive(Args, Clone)]
struct DimArgs {
    #[command(flatten)]
    group: GroupArgs,
    /// Slope `d/m`.
    #[arg(long)]
    slope: String,
    /// `I` for the Iwahori, or comma-separated affine nodes of a standard parahoric.
    #[arg(long, default_value = "I")]
    parahoric: String,
    /// Include per-clan Hilbert vectors.
    #[arg(long)]
    graded: bool,
    /// Enumerate at `d/m` directly instead of scaling the value at `1/m`.
    #[arg(long)]
    direct: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    limits: Limits,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cache = Cache::open(cli.cache_dir.clone(), !cli.no_cache);
    match run(cli.command, &cache) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<ratcher::Error>())
        .map(|e| e.exit_code() as u8)
        .unwrap_or(2)
}

fn run(command: Command, cache: &Cache) -> Result<ExitCode> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Rootsys { group } => {
            let datum = build_root_datum(group_spec(&group)?)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&RootsysReport::new(&datum))?)?;
        }
        Command::Dims(args) => {
            let (report, _) = dims(&args, cache)?;
            match args.format {
                Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?,
                Format::Csv => stdout.write_all(&summary_csv(&report)?)?,
            }
            return Ok(outcome(&report));
        }
        Command::Clans(args) => {
            let (report, _) = dims(&args, cache)?;
            match args.format {
                Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&report.per_clan)?)?,
                Format::Csv => stdout.write_all(&clans_csv(&report)?)?,
            }
            return Ok(outcome(&report));
        }
        Command::ApartmentSvg { group, slope, out, limits } => {
            let datum = build_root_datum(group_spec(&group)?)?;
            let (d, m) = parse_slope(&slope)?;
            let fig = apartment_figure(&datum, d, m, limits.budget, limits.alcove_cap)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, &fig.svg).with_context(|| format!("writing {}", path.display()))?;
                    writeln!(
                        stdout,
                        "{}: {} alcoves, {} clans, {} ν-walls, {} wall-group walls",
                        path.display(),
                        fig.alcoves,
                        fig.clans,
                        fig.nu_walls,
                        fig.w_walls
                    )?;
                }
                None => stdout.write_all(fig.svg.as_bytes())?,
            }
        }
        Command::Table { types, slopes, format, out, timings, limits } => {
            let bytes = table(&types, &slopes, format, timings, &limits, cache)?;
            match out {
                Some(path) => std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?,
                None => stdout.write_all(&bytes)?,
            }
        }
        Command::Check { table, stretch, verify_refusals, limits } => {
            return check(table, stretch, verify_refusals, &limits, cache, &mut stdout);
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// A partial report still prints, but the exit status says it was refused.
fn outcome(report: &DimReport) -> ExitCode {
    match &report.infeasible {
        Some(_) => ExitCode::from(ratcher::Error::Infeasible(String::new()).exit_code() as u8),
        None => ExitCode::SUCCESS,
    }
}

fn group_spec(g: &GroupArgs) -> Result<GroupSpec> {
    let spec = match g.rank {
        Some(n) => {
            let family = g.type_label.trim().parse()?;
            GroupSpec::new(family, n, g.twist.unwrap_or(1))?
        }
        None => {
            let parsed: GroupSpec = g.type_label.parse()?;
            match g.twist {
                Some(e) if e != parsed.e => GroupSpec::new(parsed.family, parsed.rank_abs, e)?,
                _ => parsed,
            }
        }
    };
    Ok(spec)
}

/// Parses `d/m` (or a bare `m`, read as `1/m`) and reduces it to lowest terms.
fn parse_slope(s: &str) -> Result<(u64, u64)> {
    let t = s.trim();
    let (d, m) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => ("1", t),
    };
    let d: i64 = d.parse().map_err(|_| ratcher::Error::Invalid(format!("bad slope numerator in '{s}'")))?;
    let m: i64 = m.parse().map_err(|_| ratcher::Error::Invalid(format!("bad slope denominator in '{s}'")))?;
    if d <= 0 || m <= 0 {
        bail!(ratcher::Error::Invalid(format!("slope '{s}' must be positive")));
    }
    let g = gcd(d, m);
    Ok(((d / g) as u64, (m / g) as u64))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn dims(args: &DimArgs, cache: &Cache) -> Result<(DimReport, bool)> {
    let datum = build_root_datum(group_spec(&args.group)?)?;
    let (d, m) = parse_slope(&args.slope)?;
    let slope = make_slope(&datum, d, m)?;
    let opts = DimOptions {
        parahoric: args.parahoric.parse::<Parahoric>()?,
        direct: args.direct,
        graded: args.graded,
        budget: args.limits.budget,
        alcove_cap: args.limits.alcove_cap,
    };
    Ok(compute(&datum, &slope, &opts, cache)?)
}

fn compute(datum: &RootDatum, slope: &SlopeSpec, opts: &DimOptions, cache: &Cache) -> ratcher::Result<(DimReport, bool)> {
    let key = Cache::key(&[
        &datum.spec.label(),
        &datum.spec.e.to_string(),
        &slope.to_string(),
        &opts.parahoric.to_string(),
        &opts.direct.to_string(),
        &opts.graded.to_string(),
        &opts.budget.to_string(),
        &opts.alcove_cap.to_string(),
        "grevlex",
    ]);
    if let Some(r) = cache.get::<DimReport>(&key) {
        return Ok((r, true));
    }
    let report = total_dimension(datum, slope, opts)?;
    if let Err(e) = cache.put(&key, &report) {
        eprintln!("warning: cache write failed: {e:#}");
    }
    Ok((report, false))
}

#[derive(Serialize)]
struct RootsysReport {
    #[serde(rename = "type")]
    type_label: String,
    relative_type: String,
    rank: usize,
    e: u32,
    abs_root_count: usize,
    n_positive_relative_roots: usize,
    degrees: Vec<u32>,
    twist_exponents: Vec<u32>,
    marks: Vec<u32>,
    dual_marks: Vec<u32>,
    h_theta: u32,
    h_dual_theta: u32,
    gram: Vec<Vec<i64>>,
    positive_roots: Vec<String>,
    regular_numbers: Vec<u64>,
    regular_source: apartment::RegularSource,
    elliptic_slopes: Vec<String>,
}

impl RootsysReport {
    fn new(datum: &RootDatum) -> Self {
        let (regular, source) = regular_numbers(datum);
        let n = datum.n_positive();
        RootsysReport {
            type_label: datum.spec.label(),
            relative_type: datum.relative_type.clone(),
            rank: datum.rank,
            e: datum.spec.e,
            abs_root_count: datum.abs_root_count,
            n_positive_relative_roots: n,
            degrees: datum.degrees.clone(),
            twist_exponents: datum.twist_exponents.clone(),
            marks: datum.marks.clone(),
            dual_marks: datum.dual_marks.clone(),
            h_theta: datum.h_theta,
            h_dual_theta: datum.h_dual_theta,
            gram: datum.gram.clone(),
            positive_roots: datum.roots[..n].iter().map(|r| apartment::linear_form_string(&r.coeffs)).collect(),
            elliptic_slopes: elliptic_unit_slopes(datum).iter().map(|s| s.to_string()).collect(),
            regular_numbers: regular,
            regular_source: source,
        }
    }
}

/// Every elliptic slope `1/m`, largest `m` first.
fn elliptic_unit_slopes(datum: &RootDatum) -> Vec<SlopeSpec> {
    let (mut regular, _) = regular_numbers(datum);
    regular.sort_unstable_by(|a, b| b.cmp(a));
    regular.into_iter().filter_map(|m| make_slope(datum, 1, m).ok()).filter(|s| s.elliptic).collect()
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn summary_csv(r: &DimReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "type", "relative_type", "rank", "e", "d", "m", "parahoric", "enumerated_slope", "scale_factor",
        "wallgroup_type", "wallgroup_order", "n_reflections", "n_cosets", "n_clans", "total", "dim_sp", "dim_m",
        "t_fixed_dim", "n_top", "status",
    ])?;
    w.write_record([
        r.type_label.clone(),
        r.relative_type.clone(),
        r.rank.to_string(),
        r.e.to_string(),
        r.slope.d1.to_string(),
        r.slope.m1.to_string(),
        r.parahoric.clone(),
        r.enumerated_slope.clone(),
        r.scale_factor.to_string(),
        r.wallgroup_type.clone(),
        r.wallgroup_order.to_string(),
        r.n_reflections.to_string(),
        r.n_cosets.to_string(),
        r.n_clans.to_string(),
        opt(r.total),
        r.formulas.dim_sp.to_string(),
        r.formulas.dim_m.to_string(),
        r.formulas.t_fixed_dim.to_string(),
        opt(r.formulas.n_top),
        status_of(r),
    ])?;
    Ok(w.into_inner()?)
}

fn status_of(r: &DimReport) -> String {
    match (&r.infeasible, &r.status) {
        (Some(msg), _) => format!("infeasible: {msg}"),
        (None, Some(s)) => s.clone(),
        (None, None) => "ok".into(),
    }
}

fn clans_csv(r: &DimReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sign_vector", "alcove_count", "lambda_degree", "expected_dim", "bounded", "image_dim", "subtotal", "hilbert",
    ])?;
    for c in &r.per_clan {
        let hilbert = c
            .hilbert
            .as_ref()
            .map(|h| h.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        w.write_record([
            c.sign_vector.clone(),
            c.alcove_count.to_string(),
            c.lambda_degree.to_string(),
            c.expected_dim.to_string(),
            c.bounded.to_string(),
            c.image_dim.map_or_else(|| "infeasible".to_string(), |x| x.to_string()),
            c.subtotal.map_or_else(|| "infeasible".to_string(), |x| x.to_string()),
            hilbert,
        ])?;
    }
    Ok(w.into_inner()?)
}

#[derive(Serialize)]
struct TableRow {
    #[serde(rename = "type")]
    type_label: String,
    rank: usize,
    e: u32,
    d: u64,
    m: u64,
    elliptic: bool,
    total: Option<u128>,
    n_clans: usize,
    n_cosets: usize,
    wallgroup_type: String,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    runtime_ms: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cache_hit: Option<bool>,
}

fn table(types: &[String], slopes: &[String], format: Format, timings: bool, limits: &Limits, cache: &Cache) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for t in types.iter().filter(|t| !t.trim().is_empty()) {
        let datum = build_root_datum(t.parse()?)?;
        let targets: Vec<SlopeSpec> = if slopes.is_empty() {
            elliptic_unit_slopes(&datum)
        } else {
            slopes
                .iter()
                .map(|s| parse_slope(s).and_then(|(d, m)| Ok(make_slope(&datum, d, m)?)))
                .collect::<Result<_>>()?
        };
        for slope in targets {
            let base = TableRow {
                type_label: datum.spec.label(),
                rank: datum.rank,
                e: datum.spec.e,
                d: slope.d1,
                m: slope.m1,
                elliptic: slope.elliptic,
                total: None,
                n_clans: 0,
                n_cosets: 0,
                wallgroup_type: String::new(),
                status: String::new(),
                runtime_ms: None,
                cache_hit: None,
            };
            if !slope.elliptic {
                rows.push(TableRow { status: "not elliptic".into(), ..base });
                continue;
            }
            let opts = DimOptions { budget: limits.budget, alcove_cap: limits.alcove_cap, ..DimOptions::default() };
            let start = Instant::now();
            let row = match compute(&datum, &slope, &opts, cache) {
                Ok((r, hit)) => TableRow {
                    total: r.total,
                    n_clans: r.n_clans,
                    n_cosets: r.n_cosets,
                    wallgroup_type: r.wallgroup_type.clone(),
                    status: status_of(&r),
                    runtime_ms: timings.then(|| start.elapsed().as_millis()),
                    cache_hit: timings.then_some(hit),
                    ..base
                },
                Err(e @ ratcher::Error::Infeasible(_)) => TableRow { status: format!("infeasible: {e}"), ..base },
                Err(e) => return Err(e.into()),
            };
            rows.push(row);
        }
    }
    match format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&rows)?;
            v.push(b'\n');
            Ok(v)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header =
                vec!["type", "rank", "e", "d", "m", "elliptic", "total", "n_clans", "n_cosets", "wallgroup_type", "status"];
            if timings {
                header.extend(["runtime_ms", "cache_hit"]);
            }
            w.write_record(&header)?;
            for r in &rows {
                let mut rec = vec![
                    r.type_label.clone(),
                    r.rank.to_string(),
                    r.e.to_string(),
                    r.d.to_string(),
                    r.m.to_string(),
                    r.elliptic.to_string(),
                    opt(r.total),
                    r.n_clans.to_string(),
                    r.n_cosets.to_string(),
                    r.wallgroup_type.clone(),
                    r.status.clone(),
                ];
                if timings {
                    rec.push(opt(r.runtime_ms));
                    rec.push(opt(r.cache_hit));
                }
                w.write_record(&rec)?;
            }
            Ok(w.into_inner()?)
        }
    }
}

fn check(
    table: Option<PathBuf>,
    stretch: bool,
    verify_refusals: bool,
    limits: &Limits,
    cache: &Cache,
    out: &mut impl Write,
) -> Result<ExitCode> {
    let entries = reference::load(table.as_deref())?;
    let (mut pass, mut fail, mut skipped) = (0, 0, 0);
    for entry in &entries {
        let name = format!("{} 1/{}", entry.type_label, entry.m1);
        let run = match entry.feasibility {
            Feasibility::Feasible => true,
            Feasibility::Stretch => stretch,
            Feasibility::Refused => verify_refusals,
        };
        if !run {
            skipped += 1;
            writeln!(out, "SKIP  {name:<10} ({:?}, not run)", entry.feasibility)?;
            continue;
        }
        let spec: GroupSpec = entry.type_label.parse()?;
        if spec.e != entry.e {
            bail!(ratcher::Error::Invalid(format!("{name}: twist column {} disagrees with the label", entry.e)));
        }
        let datum = build_root_datum(spec)?;
        let slope = make_slope(&datum, 1, entry.m1)?;
        let opts = DimOptions { budget: limits.budget, alcove_cap: limits.alcove_cap, ..DimOptions::default() };
        let got = match compute(&datum, &slope, &opts, cache) {
            Ok((r, _)) => r.total,
            Err(ratcher::Error::Infeasible(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let ok = match (entry.feasibility, entry.expected, got) {
            (Feasibility::Refused, _, None) => true,
            (Feasibility::Refused, _, Some(_)) => false,
            (_, Some(want), Some(have)) => want == have,
            _ => false,
        };
        let shown = got.map_or_else(|| "refused".to_string(), |x| x.to_string());
        let want = entry.expected.map_or_else(|| "refused".to_string(), |x| x.to_string());
        if ok {
            pass += 1;
            writeln!(out, "PASS  {name:<10} expected {want}, got {shown}")?;
        } else {
            fail += 1;
            writeln!(out, "FAIL  {name:<10} expected {want}, got {shown}")?;
        }
    }
    writeln!(out, "{pass} passed, {fail} failed, {skipped} skipped")?;
    Ok(if fail == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
