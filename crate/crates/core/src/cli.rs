//! Command-line front end: `run`, `verify`, `certificate` and `sweep`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use crate::config::{parse_config, RawConfig, RunConfig};
use crate::diagnostics::{blowup_certificate, Certificate, RowBuilder, CSV_HEADER};
use crate::grid::Grid;
use crate::initial::sample_initial;
use crate::lagrangian::SeedKind;
use crate::solver::{run, RunOutcome, RunResult};
use crate::suite::{evaluate, Evidence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ABORTED: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Caps the number of concurrent sweep runs.
pub const THREADS_VAR: &str = "ISOBLOW_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "isoblow",
    version,
    about = "Isothermal compressible Navier-Stokes with compactly supported density"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write its series, particle tracks and reports.
    Run {
        config: PathBuf,
        /// Output directory; defaults to `dir` in [output].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the diagnostics against quadrature and every invariant.
    Verify,
    /// Print the lifespan certificate of the initial data without running.
    Certificate { config: PathBuf },
    /// Run once per value of one config key.
    Sweep {
        config: PathBuf,
        /// `section.key` or a key that is unique across sections.
        #[arg(long)]
        key: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Output directory; defaults to `dir` in [output], then `sweep`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run { config, out } => cmd_run(&config, out.as_deref()),
        Command::Verify => cmd_verify(),
        Command::Certificate { config } => cmd_certificate(&config),
        Command::Sweep {
            config,
            key,
            values,
            out,
        } => cmd_sweep(&config, &key, &values, out.as_deref()),
    }
}

fn read_config_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = read_config_text(path)?;
    parse_config(&text, &path.display().to_string()).map_err(|e| e.to_string())
}

fn usage_error(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

/// Outcome of [`execute`]; the certificate fails on its own when the initial
/// energy is not finite, without hiding the run.
pub struct Executed {
    pub result: RunResult,
    pub certificate: Result<Certificate, String>,
}

/// Runs a configuration and writes every output file into `dir`.
pub fn execute(cfg: &RunConfig, dir: &Path) -> Result<Executed, String> {
    let grid = Grid::build(cfg.grid).map_err(|e| e.to_string())?;
    let result =
        run(&cfg.initial, &cfg.params, &grid, &cfg.scheme, &mut []).map_err(|e| e.to_string())?;
    let first = result
        .series
        .first()
        .expect("initial row is always recorded");
    let certificate =
        blowup_certificate(first, &cfg.params, cfg.initial.radius).map_err(|e| e.to_string());
    write_outputs(dir, cfg, &grid, &result, certificate.as_ref())
        .map_err(|e| format!("{}: {e}", dir.display()))?;
    Ok(Executed {
        result,
        certificate,
    })
}

pub fn cmd_run(config: &Path, out: Option<&Path>) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let Some(dir) = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
    else {
        return usage_error("no output directory: pass --out or set `dir` in [output]");
    };
    match execute(&cfg, &dir) {
        Err(e) => usage_error(e),
        Ok(Executed {
            result,
            certificate,
        }) => {
            println!("wrote {}", dir.display());
            match certificate {
                Ok(c) => println!("T* = {:?}", c.t_star),
                Err(e) => eprintln!("no certificate: {e}"),
            }
            match result.outcome {
                RunOutcome::Completed => EXIT_OK,
                RunOutcome::Aborted(e) => {
                    eprintln!("run aborted at t = {:?}: {e}", result.final_state.t);
                    EXIT_ABORTED
                }
            }
        }
    }
}

pub fn cmd_certificate(config: &Path) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let cert = Grid::build(cfg.grid).and_then(|grid| {
        let state = sample_initial(&cfg.initial, &grid)?;
        let row = RowBuilder::new(cfg.params, &grid, cfg.initial.radius, 0.0).observe(&state);
        blowup_certificate(&row, &cfg.params, cfg.initial.radius)
    });
    match cert {
        Ok(c) => {
            print!("{}", certificate_text(&c));
            EXIT_OK
        }
        Err(e) => usage_error(e),
    }
}

pub fn cmd_verify() -> i32 {
    let ev = match Evidence::collect() {
        Ok(ev) => ev,
        Err(e) => {
            eprintln!("verification could not run: {e}");
            return EXIT_VERIFY;
        }
    };
    print!("{}", ev.oracle.to_text());
    let verdicts = evaluate(&ev);
    for v in &verdicts {
        println!("{v}");
    }
    let failed = verdicts.iter().filter(|v| !v.passed).count();
    if failed == 0 {
        println!("all {} checks pass", verdicts.len());
        EXIT_OK
    } else {
        println!("{failed} of {} checks fail", verdicts.len());
        EXIT_VERIFY
    }
}

/// Worker count: `ISOBLOW_THREADS` if set, else the available parallelism, never
/// more than `jobs`.
fn sweep_threads(jobs: usize) -> Result<usize, String> {
    let cap = match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                return Err(format!(
                    "{THREADS_VAR} must be a positive integer, got `{v}`"
                ))
            }
        },
        Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    Ok(cap.min(jobs).max(1))
}

fn sweep_dir_name(key: &str, value: &str) -> String {
    let raw = format!("{key}={value}");
    raw.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._=-+".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub const SWEEP_HEADER: &str =
    "key,value,status,t_final,t_star,t_star_sharp,mass_drift,mom_residual,energy_residual,cum_grad_sq,gradient_bound";

pub fn cmd_sweep(config: &Path, key: &str, values: &[String], out: Option<&Path>) -> i32 {
    let text = match read_config_text(config) {
        Ok(t) => t,
        Err(e) => return usage_error(e),
    };
    let origin = config.display().to_string();
    let raw = match RawConfig::parse(&text, &origin) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    // Validate every variant before running any of them.
    let mut jobs = Vec::with_capacity(values.len());
    for value in values {
        let mut variant = raw.clone();
        let built = variant.set(key, value).and_then(|_| variant.build());
        match built {
            Ok(cfg) => jobs.push((value.clone(), cfg)),
            Err(e) => return usage_error(format!("{e} (with {key} = {value})")),
        }
    }
    let root = out
        .map(Path::to_path_buf)
        .or_else(|| jobs.first().and_then(|(_, c)| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("sweep"));
    let threads = match sweep_threads(jobs.len()) {
        Ok(t) => t,
        Err(e) => return usage_error(e),
    };

    let next = AtomicUsize::new(0);
    let lines: Mutex<Vec<Option<Result<String, String>>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((value, cfg)) = jobs.get(i) else {
                    break;
                };
                let dir = root.join(sweep_dir_name(key, value));
                let line = execute(cfg, &dir).map(|ex| sweep_line(key, value, &ex));
                lines
                    .lock()
                    .expect("no worker panics while holding the lock")[i] = Some(line);
            });
        }
    });

    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut code = EXIT_OK;
    for line in lines.into_inner().expect("workers finished") {
        match line.expect("every job ran") {
            Ok(l) => {
                if l.split(',').nth(2) != Some("completed") {
                    code = EXIT_ABORTED;
                }
                csv.push_str(&l);
                csv.push('\n');
            }
            Err(e) => return usage_error(e),
        }
    }
    let path = root.join("sweep.csv");
    if let Err(e) = fs::write(&path, csv) {
        return usage_error(format!("{}: {e}", path.display()));
    }
    println!("wrote {} runs to {}", jobs.len(), root.display());
    code
}

fn sweep_line(key: &str, value: &str, ex: &Executed) -> String {
    let rows = &ex.result.series.rows;
    let first = &rows[0];
    let last = rows.last().expect("initial row");
    let drift = rows
        .iter()
        .map(|r| (r.mass - first.mass).abs())
        .fold(0.0, f64::max);
    let status = match ex.result.outcome {
        RunOutcome::Completed => "completed",
        RunOutcome::Aborted(_) => "aborted",
    };
    let (t_star, t_star_sharp, bound) = match &ex.certificate {
        Ok(c) => (c.t_star, c.t_star_sharp, c.gradient_bound),
        Err(_) => (f64::NAN, f64::NAN, f64::NAN),
    };
    format!(
        "{key},{value},{status},{:?},{t_star:?},{t_star_sharp:?},{drift:?},{:?},{:?},{:?},{bound:?}",
        last.t, last.mom_residual, last.energy_residual, last.cum_grad_sq,
    )
}

pub fn certificate_text(c: &Certificate) -> String {
    let mut s = String::new();
    let mut line = |name: &str, value: String| {
        let _ = writeln!(s, "{name:<46} {value}");
    };
    line("dimension n", c.dimension.to_string());
    line("support radius R", format!("{:?}", c.radius));
    line("pressure coefficient a", format!("{:?}", c.a));
    line("initial mass m0", format!("{:?}", c.initial_mass));
    line(
        "initial weighted momentum M0",
        format!("{:?}", c.initial_weighted_momentum),
    );
    line("initial kinetic energy", format!("{:?}", c.initial_kinetic));
    line("initial entropy", format!("{:?}", c.initial_entropy));
    line(
        "Poincare constant K_n",
        format!("{:?}", c.poincare_constant),
    );
    line("energy bound E", format!("{:?}", c.energy_bound));
    line(
        "effective viscosity mu_eff",
        format!("{:?}", c.effective_viscosity),
    );
    line(
        "gradient bound C1 = E / mu_eff",
        format!("{:?}", c.gradient_bound),
    );
    line("cubic coefficient T^3", format!("{:?}", c.cubic[0]));
    line("cubic coefficient T", format!("{:?}", c.cubic[1]));
    line("cubic coefficient 1", format!("{:?}", c.cubic[2]));
    line("T*", format!("{:?}", c.t_star));
    line("degenerate", c.degenerate.to_string());
    line(
        "T* with leading coefficient n^2 a^2 m0^2 / 3",
        format!("{:?}", c.t_star_sharp),
    );
    s
}

fn series_csv(result: &RunResult) -> String {
    let mut s = String::with_capacity(256 * (result.series.rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for row in &result.series.rows {
        s.push_str(&row.to_csv());
        s.push('\n');
    }
    s
}

fn particles_csv(result: &RunResult) -> String {
    let mut s = String::from("t,particle_id,x\n");
    for (t, positions) in &result.series.tracks {
        for (i, x) in positions.iter().enumerate() {
            let _ = writeln!(s, "{t:?},{i},{x:?}");
        }
    }
    s
}

fn summary_text(
    cfg: &RunConfig,
    grid: &Grid,
    result: &RunResult,
    cert: Result<&Certificate, &String>,
) -> String {
    let rows = &result.series.rows;
    let first = &rows[0];
    let last = rows.last().expect("initial row");
    let mut s = String::new();
    let _ = writeln!(
        s,
        "geometry {:?}, N = {}, L = {:?}, h = {:?}",
        grid.geometry(),
        grid.len(),
        grid.extent(),
        grid.h()
    );
    let p = &cfg.params;
    let _ = writeln!(
        s,
        "a = {:?}, mu = {:?}, lambda = {:?}, R = {:?}",
        p.a(),
        p.mu(),
        p.lambda(),
        cfg.initial.radius
    );
    match &result.outcome {
        RunOutcome::Completed => {
            let _ = writeln!(s, "status: completed at t = {:?}", result.final_state.t);
        }
        RunOutcome::Aborted(e) => {
            let _ = writeln!(s, "status: aborted at t = {:?}: {e}", result.final_state.t);
        }
    }
    let _ = writeln!(s, "steps: {}, rows: {}", result.series.steps(), rows.len());
    let drift = rows
        .iter()
        .map(|r| (r.mass - first.mass).abs())
        .fold(0.0, f64::max);
    let _ = writeln!(s, "max mass drift / m0: {:?}", drift / first.mass);
    let _ = writeln!(s, "clipped mass: {:?}", result.series.clipped_mass);
    let _ = writeln!(
        s,
        "momentum identity residual at end: {:?}",
        last.mom_residual
    );
    let removed = result.series.vacuum_moment.last().copied().unwrap_or(0.0);
    let _ = writeln!(
        s,
        "weighted momentum removed below the vacuum cutoff: {removed:?} \
         (residual with it restored: {:?})",
        last.mom_residual + removed
    );
    let _ = writeln!(
        s,
        "energy identity residual at end: {:?}",
        last.energy_residual
    );
    match cert {
        Ok(c) => {
            let _ = writeln!(
                s,
                "cumulative grad_sq: {:?} (bound C1 = {:?})",
                last.cum_grad_sq, c.gradient_bound
            );
        }
        Err(_) => {
            let _ = writeln!(s, "cumulative grad_sq: {:?}", last.cum_grad_sq);
        }
    }
    let _ = writeln!(
        s,
        "support radius at end: {:?}{}",
        last.support_radius,
        if last.support_radius > cfg.initial.radius {
            " (beyond R; the Poincare bound is unproven there)"
        } else {
            ""
        }
    );
    let _ = writeln!(
        s,
        "largest boundary seed drift: {:?} (2h = {:?})",
        result.particles.max_drift(SeedKind::Boundary),
        2.0 * grid.h()
    );
    let _ = writeln!(
        s,
        "particles that left the domain: {}",
        result.series.escapes.len()
    );
    match cert {
        Ok(c) => {
            let _ = writeln!(s, "T*: {:?}", c.t_star);
            let _ = writeln!(
                s,
                "T* with leading coefficient n^2 a^2 m0^2 / 3: {:?}",
                c.t_star_sharp
            );
        }
        Err(e) => {
            let _ = writeln!(s, "certificate: {e}");
        }
    }
    s
}

const PLOT_SCRIPT: &str = "\
# gnuplot -persist plot.gp
set datafile separator ','
set key autotitle columnhead
set multiplot layout 2,2
set title 'mass'
plot 'series.csv' using 1:2 with lines
set title 'weighted momentum M(t)'
plot 'series.csv' using 1:3 with lines
set title 'identity residuals'
plot 'series.csv' using 1:10 with lines, '' using 1:11 with lines
set title 'particle paths'
plot 'particles.csv' using 3:1 with dots notitle
unset multiplot
";

fn write_outputs(
    dir: &Path,
    cfg: &RunConfig,
    grid: &Grid,
    result: &RunResult,
    cert: Result<&Certificate, &String>,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("series.csv"), series_csv(result))?;
    fs::write(dir.join("particles.csv"), particles_csv(result))?;
    let cert_text = match cert {
        Ok(c) => certificate_text(c),
        Err(e) => format!("no certificate: {e}\n"),
    };
    fs::write(dir.join("certificate.txt"), cert_text)?;
    fs::write(
        dir.join("summary.txt"),
        summary_text(cfg, grid, result, cert),
    )?;
    fs::write(dir.join("plot.gp"), PLOT_SCRIPT)?;
    Ok(())
}
