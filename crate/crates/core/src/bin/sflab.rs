use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use sflab::charforms::chern_simons_form;
use sflab::cylinder::aps_index;
use sflab::dirac::DiracFamily;
use sflab::eta::{xi_affine_with_multiplicity, xi_truncated, DEFAULT_Z_EVAL};
use sflab::harness::config::ScenarioConfig;
use sflab::harness::output::{write_form_csv, write_json, write_spectrum_csv};
use sflab::harness::{calibrate, find_scenario, registry, verify_all, ConventionLedger, Scenario};
use sflab::spectralflow::flow;

#[derive(Parser)]
#[command(name = "sflab", version, about = "Spectral flow of twisted Dirac families on the circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Select {
    /// Registered scenario name.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// JSON scenario configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Select {
    fn resolve(&self) -> anyhow::Result<Scenario> {
        match (&self.scenario, &self.config) {
            (Some(name), _) => Ok(find_scenario(name)?),
            (None, Some(path)) => Ok(ScenarioConfig::load(path)?.to_scenario()?),
            (None, None) => bail!("pass --scenario NAME or --config FILE"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fix the global orientation sign from the winding-one scenario.
    Calibrate {
        #[arg(long, default_value = "sflab-ledger.json")]
        ledger: PathBuf,
    },
    /// Compare spectral flow with the geometric side plus xi terms.
    Verify {
        #[command(flatten)]
        select: Select,
        #[arg(long, conflicts_with_all = ["scenario", "config"])]
        all: bool,
        /// Ledger to use; calibrated and written on first use.
        #[arg(long, default_value = "sflab-ledger.json")]
        ledger: PathBuf,
        /// Write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Spectral flow with its gap certificate.
    Flow {
        #[command(flatten)]
        select: Select,
    },
    /// Eigenvalue curves as CSV.
    Spectrum {
        #[command(flatten)]
        select: Select,
        #[arg(long, default_value_t = 65)]
        samples: usize,
        #[arg(long, default_value_t = 5.0)]
        window: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Odd Chern character form on the grid as CSV.
    Csform {
        #[command(flatten)]
        select: Select,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// xi invariant of an affine spectrum, or of the scenario endpoints.
    #[command(allow_negative_numbers = true)]
    Xi {
        #[arg(long, conflicts_with_all = ["scenario", "config"])]
        offset: Option<f64>,
        #[arg(long, default_value_t = 1)]
        multiplicity: usize,
        #[command(flatten)]
        select: Select,
    },
    /// APS and modified APS index of a diagonal affine family
    /// `lambda_k(s) = k + offset + slope s`.
    #[command(allow_negative_numbers = true)]
    Aps {
        #[arg(long, default_value_t = 1.0)]
        slope: f64,
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
        #[arg(long, default_value_t = 8)]
        half_width: i64,
        #[arg(long, num_args = 2, default_values_t = [0.0, 1.0])]
        interval: Vec<f64>,
    },
}

fn sink(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| p.display().to_string())?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn ledger_at(path: &Path) -> anyhow::Result<ConventionLedger> {
    if path.exists() {
        return Ok(ConventionLedger::load(path)?);
    }
    let ledger = calibrate()?;
    ledger.save(path)?;
    eprintln!("calibrated sigma = {} and wrote {}", ledger.sigma, path.display());
    Ok(ledger)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Calibrate { ledger } => {
            let l = calibrate()?;
            l.save(&ledger)?;
            println!(
                "sigma = {} (sf = {}, raw geometric side = {:.12})",
                l.sigma, l.calibration_sf, l.calibration_geometric_raw
            );
            println!("ledger written to {}", ledger.display());
        }
        Command::Verify {
            select,
            all,
            ledger,
            json,
        } => {
            let ledger = ledger_at(&ledger)?;
            let scenarios = if all { registry() } else { vec![select.resolve()?] };
            let report = verify_all(&scenarios, &ledger)?;
            println!("sigma = {}", report.sigma);
            for e in &report.entries {
                println!(
                    "{:<4} {:<32} sf = {:>3}  geometric = {:>+.9}  xi diff = {:>+.9}  residual = {:.2e}  ({:.0} ms)",
                    if e.passed { "PASS" } else { "FAIL" },
                    e.name,
                    e.sf,
                    e.geometric,
                    e.xi_difference,
                    e.residual,
                    e.runtime_ms
                );
            }
            if let Some(path) = json {
                write_json(File::create(path)?, &report)?;
            }
            return Ok(report.all_passed);
        }
        Command::Flow { select } => {
            let sc = select.resolve()?;
            let r = flow(&sc.dirac()?, sc.settings.s_resolution, sc.settings.gap_margin)?;
            println!("sf = {}", r.sf);
            for p in &r.pieces {
                println!(
                    "[{:.6}, {:.6}]  a = {:.6}  rank {} -> {}  clearance {:.3e} (needed {:.3e})",
                    p.s_start, p.s_end, p.level, p.rank_start, p.rank_end, p.clearance, p.required
                );
            }
        }
        Command::Spectrum {
            select,
            samples,
            window,
            out,
        } => {
            let sc = select.resolve()?;
            write_spectrum_csv(sink(&out)?, &sc.dirac()?, samples, window)?;
        }
        Command::Csform { select, out } => {
            let sc = select.resolve()?;
            let ledger = ConventionLedger::load(Path::new("sflab-ledger.json")).map(|l| l.sigma).unwrap_or(1);
            let form = chern_simons_form(&sc.connection(ledger)?, sc.settings.s_samples)?;
            write_form_csv(sink(&out)?, &form)?;
        }
        Command::Xi {
            offset,
            multiplicity,
            select,
        } => {
            if let Some(c) = offset {
                let r = xi_affine_with_multiplicity(c, multiplicity);
                println!("eta = {}  h = {}  xi = {}", r.eta, r.h, r.xi);
            } else {
                let sc = select.resolve()?;
                let fam = sc.dirac()?;
                let trust = fam.trust_radius();
                let (a, b) = fam.interval();
                for (label, s) in [("a", a), ("b", b)] {
                    let r = xi_truncated(&fam.spectrum(s, trust)?.eigenvalues, trust, &DEFAULT_Z_EVAL)?;
                    println!("D^{label} (s = {s}): eta = {:.9}  h = {}  xi = {:.9}  bound {:.1e}", r.eta, r.h, r.xi, r.error_bound);
                }
            }
        }
        Command::Aps {
            slope,
            offset,
            half_width,
            interval,
        } => {
            let fam = DiracFamily::uniform_affine((interval[0], interval[1]), slope, offset, half_width)?;
            let r = aps_index(&fam)?;
            let sf = flow(&fam, 16, 1e-6)?.sf;
            println!("ind_APS = {}  ind_mAPS = {}  h(D^a) = {}  h(D^b) = {}  sf = {}", r.ind_aps, r.ind_maps, r.h_a, r.h_b, sf);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
