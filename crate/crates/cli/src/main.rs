//! `weakpath`: scriptable runs of pre- and post-selected pointer-measurement
//! scenarios. Gridded densities go to CSV, scalar results to JSON, and every
//! file output gets a run-report sidecar for reproducibility.

mod document;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use weakpath_core::composite::{default_grids, run_composite, sample_trials};
use weakpath_core::hilbert::Unitary;
use weakpath_core::pathways::{MeasurementStep, Scenario};
use weakpath_core::pointers::{
    design_postselection, reading_distribution_on, reading_distribution_with,
    scenario_weak_value, Axis, GridOptions, PointerSpec, ReadingDistribution,
};
use weakpath_core::scenarios;
use weakpath_core::Complex64;

use report::RunReport;

const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "weakpath",
    version,
    about = "Simulate sequences of von Neumann pointer measurements on pre- and post-selected systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Weak value of the observable measured by the scenario's single step
    Wv(WvArgs),
    /// Reading distribution on a grid, written as CSV
    Dist(DistArgs),
    /// Monte Carlo pointer readings with empirical means and standard errors
    Sample(SampleArgs),
    /// Compare the reduced description against the full composite simulation
    OracleCheck(OracleArgs),
    /// Design a post-selection that reaches a target weak value
    Design(DesignArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in scenario: double-slit, three-box, or cheshire
    #[arg(long, value_name = "NAME", conflicts_with = "file")]
    builtin: Option<String>,
    /// Path to a scenario document (JSON, schema version 1)
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,
    /// Observable to install on the first step (built-ins only)
    #[arg(long, value_name = "NAME")]
    obs: Option<String>,
    /// Gaussian width for the first pointer
    #[arg(long, value_name = "W")]
    width: Option<f64>,
    /// Gaussian width for a second measurement; built-ins append their
    /// companion observable when the scenario has a single step
    #[arg(long, value_name = "W")]
    width2: Option<f64>,
}

#[derive(Args)]
struct GridArgs {
    /// Grid spacing override
    #[arg(long, value_name = "H")]
    grid_h: Option<f64>,
    /// Half-extent beyond the eigenvalue range (default six widths)
    #[arg(long, value_name = "S")]
    grid_span: Option<f64>,
}

impl GridArgs {
    fn options(&self) -> GridOptions {
        GridOptions { spacing: self.grid_h, span: self.grid_span }
    }
}

#[derive(Args)]
struct WvArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Write the result as JSON (plus a run report) instead of only printing
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// CSV output path
    #[arg(long, value_name = "PATH", default_value = "distribution.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Number of trials
    #[arg(long, value_name = "K", default_value_t = 100_000)]
    trials: usize,
    /// Seed of the deterministic counter generator
    #[arg(long, value_name = "S", default_value_t = 1)]
    seed: u64,
    /// Write the JSON result (plus a run report) to a file
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Cap on grid points per pointer in the composite simulation
    #[arg(long, value_name = "M", default_value_t = 1024)]
    max_points: usize,
    /// Negative-control hook: corrupt the composite density before comparing
    #[arg(long, hide = true)]
    corrupt: bool,
    /// Write the JSON result (plus a run report) to a file
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Target weak value, e.g. "100", "-5i", "1.5+0.5i"
    #[arg(long, value_name = "Z", allow_hyphen_values = true)]
    target: String,
    /// Write the JSON result (plus a run report) to a file
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    DarkFringe(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::DarkFringe(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::DarkFringe(m) | CliError::Numeric(m) => m,
        }
    }
}

fn core_err(e: weakpath_core::Error) -> CliError {
    use weakpath_core::Error as E;
    match e {
        E::DarkFringe => CliError::DarkFringe(
            "dark fringe: the path-amplitude sum vanishes, so the requested quantity is undefined"
                .to_string(),
        ),
        E::ZeroTotalWeight
        | E::ResourceLimit { .. }
        | E::NotNormalized { .. }
        | E::ZeroNorm
        | E::NonFinite
        | E::ZeroDenominator
        | E::EigenConvergence
        | E::ShiftOffGrid { .. }
        | E::ShiftNotCommensurate { .. }
        | E::VanishingOverlap { .. }
        | E::ZeroReferenceAlpha => CliError::Numeric(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Wv(args) => cmd_weak_value(args),
        Cmd::Dist(args) => cmd_distribution(args),
        Cmd::Sample(args) => cmd_sample(args),
        Cmd::OracleCheck(args) => cmd_oracle_check(args),
        Cmd::Design(args) => cmd_design(args),
    }
}

/// Scenario plus the canonical document text it hashes to.
struct Resolved {
    scenario: Scenario,
    fingerprint: String,
}

fn resolve(source: &SourceArgs) -> Result<Resolved, CliError> {
    let mut scenario = if let Some(name) = &source.builtin {
        let built = scenarios::builtin(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown builtin {name:?} (choose double-slit, three-box, or cheshire)"
            ))
        })?;
        let mut s = built.scenario.clone();
        if let Some(obs) = &source.obs {
            let dec = built.observable(obs).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown observable {obs:?}; this builtin offers {}",
                    built.observable_names().join(", ")
                ))
            })?;
            s = s.with_step_observable(0, dec.clone()).map_err(core_err)?;
        }
        if let Some(w2) = source.width2 {
            if s.steps().len() == 1 {
                let companion = built
                    .observable("Bprime")
                    .expect("every builtin bundles Bprime")
                    .clone();
                s = s
                    .with_appended_step(
                        Unitary::identity(s.dim()),
                        MeasurementStep {
                            observable: companion,
                            pointer: PointerSpec::gaussian(w2).map_err(core_err)?,
                        },
                    )
                    .map_err(core_err)?;
            }
        }
        s
    } else if let Some(path) = &source.file {
        if source.obs.is_some() {
            return Err(CliError::Usage(
                "--obs selects among built-in observables and needs --builtin".to_string(),
            ));
        }
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read {}: {e}", path.display()))
        })?;
        document::parse_scenario(&text).map_err(|e| CliError::Usage(e.to_string()))?
    } else {
        return Err(CliError::Usage(
            "provide a scenario with --builtin NAME or --file PATH".to_string(),
        ));
    };

    if let Some(w2) = source.width2 {
        if scenario.steps().len() >= 2 {
            scenario = scenario
                .with_pointer(1, PointerSpec::gaussian(w2).map_err(core_err)?)
                .map_err(core_err)?;
        } else {
            return Err(CliError::Usage(
                "--width2 needs a scenario with a second measurement step".to_string(),
            ));
        }
    }
    if let Some(w) = source.width {
        scenario = scenario
            .with_pointer(0, PointerSpec::gaussian(w).map_err(core_err)?)
            .map_err(core_err)?;
    }

    let doc = document::document_from_scenario(&scenario)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let fingerprint = report::fingerprint(&document::canonical_json(&doc));
    Ok(Resolved { scenario, fingerprint })
}

fn source_parameters(report: &mut RunReport, source: &SourceArgs) {
    if let Some(b) = &source.builtin {
        report.parameter("builtin", b);
    }
    if let Some(f) = &source.file {
        report.parameter("file", f.display().to_string());
    }
    if let Some(o) = &source.obs {
        report.parameter("obs", o);
    }
    if let Some(w) = source.width {
        report.parameter("width", w);
    }
    if let Some(w) = source.width2 {
        report.parameter("width2", w);
    }
}

fn thread_count() -> usize {
    if let Ok(raw) = std::env::var("WEAKPATH_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => return n,
            _ => eprintln!("warning: ignoring invalid WEAKPATH_THREADS={raw:?}"),
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn format_complex(z: Complex64) -> String {
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    if im < 0.0 {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}

fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let t: String = text.trim().chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Usage(format!("cannot parse complex number {text:?}"));
    if let Ok(re) = t.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let body = t.strip_suffix('i').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let ch = bytes[k] as char;
        if (ch == '+' || ch == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
            split = Some(k);
            break;
        }
    }
    let imag = |s: &str| -> Result<f64, CliError> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        None => Ok(Complex64::new(0.0, imag(body)?)),
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[k..])?))
        }
    }
}

fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))
}

fn finish(report: &mut RunReport, out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_output(path, body)?;
            report.file(path);
            let sidecar = report::report_path(path);
            write_output(&sidecar, &report.to_json())?;
            println!("{}", path.display());
        }
        None => println!("{body}"),
    }
    Ok(())
}

fn cmd_weak_value(args: WvArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.source)?;
    let wv = scenario_weak_value(&resolved.scenario).map_err(core_err)?;
    let formatted = format_complex(wv.0);
    let mut report = RunReport::new("wv", resolved.fingerprint);
    source_parameters(&mut report, &args.source);
    report.scalar("weak_value_re", wv.re());
    report.scalar("weak_value_im", wv.im());
    match &args.out {
        Some(path) => {
            let body = serde_json::json!({
                "weak_value": {"re": wv.re(), "im": wv.im()},
                "formatted": formatted,
            });
            println!("{formatted}");
            write_output(path, &serde_json::to_string_pretty(&body).expect("json"))?;
            report.file(path);
            write_output(&report::report_path(path), &report.to_json())?;
        }
        None => println!("{formatted}"),
    }
    Ok(())
}

fn csv_of(dist: &ReadingDistribution) -> String {
    let axes = dist.axes();
    let mut out = String::new();
    out.push('f');
    for k in 2..=axes.len() {
        out.push_str(&format!(",f{k}"));
    }
    out.push_str(",density\n");
    let lens: Vec<usize> = axes.iter().map(Axis::len).collect();
    for (flat, d) in dist.density().iter().enumerate() {
        let mut rest = flat;
        let mut coords = vec![0usize; lens.len()];
        for a in (0..lens.len()).rev() {
            coords[a] = rest % lens[a];
            rest /= lens[a];
        }
        for (a, &i) in coords.iter().enumerate() {
            out.push_str(&format!("{},", axes[a].point(i)));
        }
        out.push_str(&format!("{d:e}\n"));
    }
    out
}

fn cmd_distribution(args: DistArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.source)?;
    let dist = reading_distribution_with(&resolved.scenario, &args.grid.options(), thread_count())
        .map_err(core_err)?;

    let mut report = RunReport::new("dist", resolved.fingerprint);
    source_parameters(&mut report, &args.source);
    if let Some(h) = args.grid.grid_h {
        report.parameter("grid_h", h);
    }
    if let Some(s) = args.grid.grid_span {
        report.parameter("grid_span", s);
    }
    report.scalar("integral", dist.integral());
    for (a, axis) in dist.axes().iter().enumerate() {
        report.scalar(&format!("axis{a}_points"), axis.len());
        report.scalar(&format!("axis{a}_spacing"), axis.step());
        report.scalar(
            &format!("axis{a}_mean"),
            dist.mean(a).map_err(core_err)?,
        );
    }

    write_output(&args.out, &csv_of(&dist))?;
    report.file(&args.out);
    write_output(&report::report_path(&args.out), &report.to_json())?;
    println!("{}", args.out.display());
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.source)?;
    let dist = reading_distribution_with(&resolved.scenario, &args.grid.options(), thread_count())
        .map_err(core_err)?;
    let (_, stats) = sample_trials(&dist, args.trials, args.seed).map_err(core_err)?;

    let mut report = RunReport::new("sample", resolved.fingerprint);
    source_parameters(&mut report, &args.source);
    report.parameter("trials", args.trials);
    report.parameter("seed", args.seed);
    report.scalar("means", &stats.means);
    report.scalar("std_errors", &stats.std_errors);

    let body = serde_json::json!({
        "count": stats.count,
        "seed": args.seed,
        "means": stats.means,
        "std_errors": stats.std_errors,
    });
    finish(
        &mut report,
        args.out.as_deref(),
        &serde_json::to_string_pretty(&body).expect("json"),
    )
}

fn cmd_oracle_check(args: OracleArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.source)?;
    let s = &resolved.scenario;
    let grids = default_grids(s, args.max_points).map_err(core_err)?;
    let composite = run_composite(s, &grids).map_err(core_err)?;
    let axes: Vec<Axis> = grids.iter().map(|g| g.axis().clone()).collect();
    let reduced = reading_distribution_on(s, &axes, thread_count()).map_err(core_err)?;

    let corruption = if args.corrupt { 1.0 + 1e-6 } else { 1.0 };
    let mut max_deviation: f64 = 0.0;
    let mut max_density: f64 = 0.0;
    for (a, b) in composite.density().iter().zip(reduced.density()) {
        max_deviation = max_deviation.max((a * corruption - b).abs());
        max_density = max_density.max(*b);
    }
    let relative = if max_density > 0.0 { max_deviation / max_density } else { 0.0 };
    let pass = relative <= ORACLE_TOLERANCE;

    let mut report = RunReport::new("oracle-check", resolved.fingerprint);
    source_parameters(&mut report, &args.source);
    report.parameter("max_points", args.max_points);
    report.scalar("max_deviation", max_deviation);
    report.scalar("max_density", max_density);
    report.scalar("relative", relative);
    report.scalar("tolerance", ORACLE_TOLERANCE);
    report.scalar("pass", pass);

    let body = serde_json::json!({
        "max_deviation": max_deviation,
        "max_density": max_density,
        "relative": relative,
        "tolerance": ORACLE_TOLERANCE,
        "pass": pass,
    });
    finish(
        &mut report,
        args.out.as_deref(),
        &serde_json::to_string_pretty(&body).expect("json"),
    )?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "composite and reduced densities deviate by {relative:.3e} relative (tolerance {ORACLE_TOLERANCE:.0e})"
        )))
    }
}

fn cmd_design(args: DesignArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.source)?;
    let s = &resolved.scenario;
    if s.steps().len() != 1 {
        return Err(CliError::Usage(
            "design needs a scenario with exactly one measurement step".to_string(),
        ));
    }
    let target = parse_complex(&args.target)?;
    let observable = &s.steps()[0].measurement.observable;
    let values: Vec<f64> =
        (0..s.dim()).map(|l| observable.value_of(l)).collect();
    let (imin, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        .expect("nonempty");
    let (imax, _) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        .expect("nonempty");
    if (values[imax] - values[imin]).abs() < 1e-12 {
        return Err(CliError::Usage(
            "the observable has a single eigenvalue, so its weak value is fixed".to_string(),
        ));
    }
    let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
    let delta = (target - mean) / (values[imin] - values[imax]);
    let mut alpha = vec![Complex64::new(1.0 / values.len() as f64, 0.0); values.len()];
    alpha[imin] += delta;
    alpha[imax] -= delta;

    let postselect = design_postselection(
        s.initial(),
        &s.steps()[0].evolution,
        s.final_evolution(),
        observable,
        target,
        &alpha,
    )
    .map_err(core_err)?;
    let designed = s.with_postselect(postselect.clone()).map_err(core_err)?;
    let wv = scenario_weak_value(&designed).map_err(core_err)?;

    let mut report = RunReport::new("design", resolved.fingerprint);
    source_parameters(&mut report, &args.source);
    report.parameter("target", &args.target);
    report.scalar("weak_value_re", wv.re());
    report.scalar("weak_value_im", wv.im());

    let body = serde_json::json!({
        "postselect": postselect.amps().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "weak_value": {"re": wv.re(), "im": wv.im()},
        "formatted": format_complex(wv.0),
    });
    finish(
        &mut report,
        args.out.as_deref(),
        &serde_json::to_string_pretty(&body).expect("json"),
    )
}
