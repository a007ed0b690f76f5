use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pvrfid::summary::TraceSummary;
use pvrfid::{
    link_budget, load_scenario, min_capacitance, range_ratio, range_sweep, read_range,
    run_campaign, simulate, Error, Scenario, SimTrace,
};

/// Read-range, power-path and availability simulator for PV-assisted RFID tags.
#[derive(Parser, Debug)]
#[command(name = "pvrfid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ScenarioArg {
    /// Scenario file.
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print passive and semi-passive read range.
    Range {
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Write read range against carrier frequency as CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        f_lo: Option<f64>,
        #[arg(long)]
        f_hi: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Time-step the power path and write the trace and event CSVs.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Trace CSV; events go next to it as `<stem>_events.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run a reader campaign against the simulated tag.
    Campaign {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Campaign length in seconds.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Find the smallest capacitance meeting the target availability.
    Size {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Blackout intervals CSV of the sized design.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Summarize an existing trace CSV.
    Report {
        trace: PathBuf,
        /// Seconds excluded from the availability figure.
        #[arg(long, default_value_t = 0.0)]
        warmup: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn load(arg: &ScenarioArg, duration: Option<f64>, dt: Option<f64>) -> Result<Scenario, Error> {
    let mut sc = load_scenario(&arg.scenario)?;
    if let Some(d) = duration {
        sc.sim.duration_s = d;
    }
    if let Some(dt) = dt {
        sc.sim.dt_s = dt;
    }
    sc.validate()?;
    Ok(sc)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io_at(path, e))?,
    ))
}

fn run(command: Command) -> Result<(), Error> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Range { scenario } => {
            let sc = load(&scenario, None, None)?;
            let ic = &sc.power.ic;
            let passive = read_range(&sc.link, ic.sensitivity_passive_dbm);
            let semi = read_range(&sc.link, ic.sensitivity_semipassive_dbm);
            writeln!(out, "passive {passive:.2} m / semipassive {semi:.2} m")?;
            writeln!(
                out,
                "ratio {:.5} at {:.2} dBm {}, {:.1} MHz, tau {}",
                range_ratio(ic),
                sc.link.p_tx_dbm,
                sc.link.tx_label(),
                sc.link.frequency_hz / 1e6,
                sc.link.tau
            )?;
        }
        Command::Sweep {
            scenario,
            out: path,
            f_lo,
            f_hi,
            points,
        } => {
            let sc = load(&scenario, None, None)?;
            let matching = sc.matching()?;
            let points = range_sweep(
                &sc.link,
                &sc.power.ic,
                &matching,
                f_lo.unwrap_or(sc.sweep.f_lo_hz),
                f_hi.unwrap_or(sc.sweep.f_hi_hz),
                points.unwrap_or(sc.sweep.points),
            )?;
            let path = path.unwrap_or_else(|| sc.output_path("sweep"));
            link_budget::write_sweep_csv(create(&path)?, &points)?;
            writeln!(out, "wrote {} points to {}", points.len(), path.display())?;
        }
        Command::Simulate {
            scenario,
            out: path,
            duration,
            dt,
        } => {
            let sc = load(&scenario, duration, dt)?;
            let trace = simulate(
                &sc.power,
                &sc.light,
                sc.sim.duration_s,
                sc.sim.dt_s,
                sc.sim.v_initial,
            )?;
            let (trace_path, events_path) = match path {
                Some(p) => {
                    let events = sibling(&p, "events");
                    (p, events)
                }
                None => (sc.output_path("trace"), sc.output_path("events")),
            };
            trace.write_csv(create(&trace_path)?)?;
            trace.write_events_csv(create(&events_path)?)?;
            if !sc.power.eeprom_reachable() {
                eprintln!(
                    "note: clamp {} V is below the EEPROM threshold {} V; EEPROM writes are unreachable",
                    sc.power.v_clamp, sc.power.ic.v_eeprom
                );
            }
            write!(out, "{}", TraceSummary::new(&trace, sc.warmup_s())?)?;
        }
        Command::Campaign {
            scenario,
            out: path,
            seed,
            duration,
            dt,
        } => {
            let mut sc = load(&scenario, None, dt)?;
            if let Some(seed) = seed {
                sc.reader.rng_seed = seed;
            }
            if let Some(d) = duration {
                sc.campaign_duration_s = d;
            }
            let sim_duration = sc.sim.duration_s.max(sc.campaign_duration_s);
            let trace = simulate(
                &sc.power,
                &sc.light,
                sim_duration,
                sc.sim.dt_s,
                sc.sim.v_initial,
            )?;
            let result = run_campaign(
                &trace,
                &sc.link,
                &sc.power.ic,
                &sc.reader,
                sc.campaign_duration_s,
            )?;
            let path = path.unwrap_or_else(|| sc.output_path("campaign"));
            result.write_csv(create(&path)?)?;
            write!(out, "{}", result.summary())?;
        }
        Command::Size {
            scenario,
            out: path,
            target,
            duration,
            dt,
        } => {
            let sc = load(&scenario, duration, dt)?;
            let target = target.unwrap_or(sc.sim.target_availability);
            let problem = sc.sizing_problem();
            let sized = min_capacitance(
                &problem,
                target,
                sc.sim.c_lo_f,
                sc.sim.c_hi_f,
                sc.sim.rel_tol,
            )?;
            writeln!(out, "c_min_f = {:.6}", sized.capacitance_f)?;
            writeln!(out, "target_availability = {target}")?;
            writeln!(out, "bisection_iterations = {}", sized.iterations)?;
            let path_at_min = pvrfid::PowerPath {
                capacitance_f: sized.capacitance_f,
                ..sc.power
            };
            let trace = simulate(
                &path_at_min,
                &sc.light,
                sc.sim.duration_s,
                sc.sim.dt_s,
                sc.sim.v_initial.min(path_at_min.v_clamp),
            )?;
            let report = pvrfid::availability(&trace, problem.warmup_s)?;
            write!(out, "{}", report.summary())?;
            if let Some(p) = path.or_else(|| sc.outputs.blackouts.clone()) {
                report.write_blackouts_csv(create(&p)?)?;
            }
        }
        Command::Report { trace, warmup } => {
            let file = File::open(&trace).map_err(|e| Error::io_at(&trace, e))?;
            let trace = SimTrace::read_csv(file)?;
            write!(out, "{}", TraceSummary::new(&trace, warmup)?)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `dir/run.csv` -> `dir/run_<kind>.csv`.
fn sibling(path: &Path, kind: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    path.with_file_name(format!("{stem}_{kind}.csv"))
}
