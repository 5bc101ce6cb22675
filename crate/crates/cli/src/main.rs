use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use singcert::breadth_one::BreadthOneFixture;
use singcert::fixtures::{self, Fixture, FixtureKind, FixtureStatus};
use singcert::krawczyk::{verify_root, VerifyOptions};
use singcert::soundness::soundness_run;
use singcert::sysio::{parse_start, parse_system, Report, ToInclusionJson};
use singcert::viss::{viss, VissError, VissOptions};
use singcert::Scalar;

const EXIT_PARSE: u8 = 2;
const EXIT_NOT_CERTIFIED: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(
    name = "singcert",
    version,
    about = "Certify isolated singular roots of polynomial systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deflate and verify one system from a start point.
    Certify(CertifyArgs),
    /// Run the fixture registry and print a summary table.
    Bench(BenchArgs),
    /// Check certificates against planted roots of random regular systems.
    Soundness(SoundnessArgs),
}

#[derive(Args, Clone, Copy)]
struct VerifyFlags {
    /// Maximum number of deflation steps.
    #[arg(long, default_value_t = 10)]
    max_deflations: usize,
    /// Growth factor for the inflation radius.
    #[arg(long, default_value_t = 1.1)]
    inflation_factor: f64,
    /// Maximum number of inflation rounds.
    #[arg(long, default_value_t = 15)]
    inflation_rounds: usize,
}

impl VerifyFlags {
    fn options(&self, eps: f64) -> VissOptions {
        VissOptions {
            eps,
            max_deflations: self.max_deflations,
            verify: VerifyOptions {
                inflation_factor: self.inflation_factor,
                inflation_rounds: self.inflation_rounds,
                ..VerifyOptions::default()
            },
            ..VissOptions::default()
        }
    }
}

#[derive(Args)]
struct CertifyArgs {
    system: PathBuf,
    start: PathBuf,
    /// Rank threshold.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    /// Parse coefficients and start point as complex numbers.
    #[arg(long)]
    complex: bool,
    /// Write the JSON report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    verify: VerifyFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// Run only these fixtures (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Override every fixture's rank threshold.
    #[arg(long)]
    eps: Option<f64>,
    /// Print JSON lines instead of the table.
    #[arg(long)]
    json: bool,
    /// Write JSON lines to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    verify: VerifyFlags,
}

#[derive(Args)]
struct SoundnessArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Certify(a) => certify(&a),
        Command::Bench(a) => bench(&a),
        Command::Soundness(a) => soundness(&a),
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), ExitCode> {
    fs::write(path, text).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        ExitCode::FAILURE
    })
}

fn certify(a: &CertifyArgs) -> ExitCode {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()));
    let (sys, start) = match (read(&a.system), read(&a.start)) {
        (Ok(s), Ok(x)) => (s, x),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let name = a
        .system
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let opts = a.verify.options(a.eps);
    let outcome = if a.complex {
        run_one::<Complex64>(&name, &sys, &start, &opts)
    } else {
        run_one::<f64>(&name, &sys, &start, &opts)
    };
    let (report, code) = match outcome {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    if a.json {
        println!("{}", report.to_json_pretty());
    } else {
        print_summary(&report);
    }
    if let Some(out) = &a.out {
        if let Err(c) = write_out(out, &report.to_json_pretty()) {
            return c;
        }
    }
    ExitCode::from(code)
}

/// Parses and runs one system. `Err` means the input did not parse.
fn run_one<T>(name: &str, sys: &str, start: &str, opts: &VissOptions) -> Result<(Report, u8), String>
where
    T: Scalar,
    T::Enclosure: ToInclusionJson,
{
    let f = parse_system::<T>(sys).map_err(|e| format!("system: {e}"))?;
    let x = parse_start::<T>(start, f.nvars()).map_err(|e| format!("start: {e}"))?;
    Ok(run_system(name, &f, &x, opts))
}

fn run_system<T>(name: &str, f: &singcert::PolySystem<T>, x: &[T], opts: &VissOptions) -> (Report, u8)
where
    T: Scalar,
    T::Enclosure: ToInclusionJson,
{
    let t = Instant::now();
    let ms = || t.elapsed().as_secs_f64() * 1e3;
    match viss(f, x, opts) {
        Ok(r) => (Report::from_result(name, &r), 0),
        Err(VissError::NotCertified(r)) => (Report::from_result(name, &r), EXIT_NOT_CERTIFIED),
        Err(VissError::DeflationCap {
            last_corank, coranks, ..
        }) => {
            let reason = format!("deflation cap reached with corank {last_corank}");
            (
                Report::failure(name, f.len(), opts.eps, coranks, reason, ms()),
                EXIT_CAP,
            )
        }
        Err(e) => (
            Report::failure(name, f.len(), opts.eps, Vec::new(), e.to_string(), ms()),
            EXIT_NOT_CERTIFIED,
        ),
    }
}

fn print_summary(r: &Report) {
    println!("system:      {}", r.system);
    println!("certified:   {}", r.certified);
    println!("deflations:  {}", r.deflations);
    println!("coranks:     {}", arrow(&r.corank_sequence));
    if let (Some(b), Some(a)) = (r.sigma_min_before, r.sigma_min_after) {
        println!("sigma_min:   {b:.1e} -> {a:.1e}");
    }
    if let Some(d) = &r.diagnostics {
        println!("final size:  {}", d.final_size);
        if let Some(reason) = &d.reason {
            println!("reason:      {reason}");
        }
    }
    if r.certified {
        println!("x width:     {:.1e}", width(r.x_inclusions.as_deref()));
        println!("b width:     {:.1e}", width(r.b_inclusions.as_deref()));
        println!("perturbed system:\n{}", r.perturbed_system_text.trim_end());
    }
    println!("runtime:     {:.2} ms", r.runtime_ms);
}

fn arrow(seq: &[usize]) -> String {
    seq.iter().map(usize::to_string).collect::<Vec<_>>().join(" -> ")
}

/// Largest width over a list of JSON inclusions.
fn width(incl: Option<&[singcert::sysio::InclusionJson]>) -> f64 {
    use singcert::sysio::InclusionJson;
    let w = |e: &[String; 2]| match (e[0].parse::<f64>(), e[1].parse::<f64>()) {
        (Ok(lo), Ok(hi)) => hi - lo,
        _ => f64::NAN,
    };
    incl.unwrap_or_default()
        .iter()
        .map(|i| match i {
            InclusionJson::Real(e) => w(e),
            InclusionJson::Complex { re, im } => w(re).max(w(im)),
        })
        .fold(0.0, f64::max)
}

enum Row {
    Run(Box<Report>),
    Quarantined(&'static str, usize, Option<u32>, &'static [usize], &'static str),
}

fn bench_fixture(f: &Fixture, eps: Option<f64>, flags: &VerifyFlags) -> Row {
    if let FixtureStatus::Quarantined(why) = f.status {
        return Row::Quarantined(f.name, f.n, f.mu, f.expected_coranks, why);
    }
    let opts = flags.options(eps.unwrap_or(f.eps));
    match f.kind {
        FixtureKind::Viss if f.complex => bench_viss::<Complex64>(f, &opts),
        FixtureKind::Viss => bench_viss::<f64>(f, &opts),
        FixtureKind::BreadthOne => bench_breadth_one(f, &opts),
    }
}

fn bench_viss<T>(f: &Fixture, opts: &VissOptions) -> Row
where
    T: Scalar,
    T::Enclosure: ToInclusionJson,
{
    match f.load::<T>() {
        Ok((s, x)) => Row::Run(Box::new(run_system(f.name, &s, &x, opts).0)),
        Err(e) => Row::Run(Box::new(Report::failure(
            f.name,
            f.n,
            opts.eps,
            Vec::new(),
            e.to_string(),
            0.0,
        ))),
    }
}

fn bench_breadth_one(f: &Fixture, opts: &VissOptions) -> Row {
    let t = Instant::now();
    let fx = match BreadthOneFixture::load() {
        Ok(fx) => fx,
        Err(e) => {
            return Row::Run(Box::new(Report::failure(
                f.name,
                f.n,
                opts.eps,
                Vec::new(),
                e.to_string(),
                0.0,
            )))
        }
    };
    let cert = match verify_root(&fx.system, &fx.start, &opts.verify) {
        Ok(c) => c,
        Err(e) => {
            return Row::Run(Box::new(Report::failure(
                f.name,
                f.n,
                opts.eps,
                vec![0],
                e.to_string(),
                0.0,
            )))
        }
    };
    let certified = cert.is_certified();
    let pick = |idx: Vec<usize>| certified.then(|| idx.iter().map(|&i| cert.inclusion[i].to_json()).collect());
    let mut report = Report::failure(
        f.name,
        f.n,
        opts.eps,
        vec![0],
        cert.reason.clone().unwrap_or_default(),
        t.elapsed().as_secs_f64() * 1e3,
    );
    report.certified = certified;
    report.x_inclusions = pick(fx.x_indices());
    report.lambda_inclusions = pick(fx.lambda_indices());
    report.b_inclusions = pick(fx.b_indices());
    report.perturbed_system_text = singcert::sysio::format_system(&fx.system);
    report.sigma_min_after = cert.sigma_min_final.is_finite().then_some(cert.sigma_min_final);
    if let Some(d) = report.diagnostics.as_mut() {
        d.final_size = fx.system.len();
        d.newton_steps = cert.newton_steps;
        d.inflation_rounds = cert.inflation_rounds;
        d.residual_norm = cert.residual_norm;
        d.sigma_min_final = cert.sigma_min_final;
        d.reason = cert.reason.clone();
    }
    Row::Run(Box::new(report))
}

fn bench(a: &BenchArgs) -> ExitCode {
    let selected: Vec<&Fixture> = if a.only.is_empty() {
        fixtures::registry().iter().collect()
    } else {
        let mut v = Vec::new();
        for name in &a.only {
            match fixtures::find(name) {
                Some(f) => v.push(f),
                None => {
                    eprintln!("error: unknown fixture {name}");
                    return ExitCode::from(EXIT_PARSE);
                }
            }
        }
        v
    };
    let rows: Vec<Row> = selected
        .par_iter()
        .map(|f| bench_fixture(f, a.eps, &a.verify))
        .collect();

    let lines: Vec<String> = rows
        .iter()
        .filter_map(|r| match r {
            Row::Run(rep) => Some(rep.to_json_line()),
            Row::Quarantined(..) => None,
        })
        .collect();
    if a.json {
        for l in &lines {
            println!("{l}");
        }
    } else {
        print_table(&rows);
    }
    if let Some(out) = &a.out {
        let mut text = lines.join("\n");
        text.push('\n');
        if let Err(c) = write_out(out, &text) {
            return c;
        }
    }
    ExitCode::SUCCESS
}

fn print_table(rows: &[Row]) {
    println!(
        "{:<20} {:>3} {:>4}  {:<16} {:<20} {:>9} {:>9} {:>10}  status",
        "system", "n", "mu", "corank", "sigma_min", "width X", "width B", "time"
    );
    for row in rows {
        match row {
            Row::Run(r) => {
                let mu = fixtures::find(&r.system).and_then(|f| f.mu);
                let sigma = match (r.sigma_min_before, r.sigma_min_after) {
                    (Some(b), Some(a)) => format!("{b:.1e} -> {a:.1e}"),
                    (None, Some(a)) => format!("-> {a:.1e}"),
                    _ => "-".into(),
                };
                let (xb, bb) = if r.certified {
                    (
                        format!("{:.1e}", width(r.x_inclusions.as_deref())),
                        format!("{:.1e}", width(r.b_inclusions.as_deref())),
                    )
                } else {
                    ("-".into(), "-".into())
                };
                let status = if r.certified {
                    "certified".to_string()
                } else {
                    let why = r
                        .diagnostics
                        .as_ref()
                        .and_then(|d| d.reason.clone())
                        .unwrap_or_default();
                    format!("not certified: {why}")
                };
                println!(
                    "{:<20} {:>3} {:>4}  {:<16} {:<20} {:>9} {:>9} {:>8.2}ms  {}",
                    r.system,
                    r.n,
                    mu.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
                    arrow(&r.corank_sequence),
                    sigma,
                    xb,
                    bb,
                    r.runtime_ms,
                    status
                );
            }
            Row::Quarantined(name, n, mu, coranks, why) => println!(
                "{:<20} {:>3} {:>4}  {:<16} {:<20} {:>9} {:>9} {:>10}  quarantined: {}",
                name,
                n,
                mu.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
                arrow(coranks),
                "-",
                "-",
                "-",
                "-",
                why
            ),
        }
    }
}

fn soundness(a: &SoundnessArgs) -> ExitCode {
    let opts = VissOptions {
        eps: a.eps,
        ..VissOptions::default()
    };
    let s = soundness_run(a.seed, a.trials, &opts);
    println!(
        "trials {}  certified {}  false certificates {}",
        s.trials, s.certified, s.false_certificates
    );
    if s.false_certificates == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
