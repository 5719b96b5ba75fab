//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
//! 3 numerical-validity abort (edge contact, truncation, quadrature).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{Config, Mode};
use crate::continuum;
use crate::discrete;
use crate::error::{Error, Result};
use crate::model::{initial_state, SystemParams};
use crate::observables::{inversion, raw_inversion, spectrum, total_norm, TimeSeries, Window};
use crate::output::{manifest_text, read_series, series_csv, spectrum_csv, FieldDump};

/// Bundled scenario configs, addressable by name in place of a file path.
pub const SCENARIOS: [(&str, &str); 6] = [
    ("fig1", include_str!("../scenarios/fig1.cfg")),
    ("fig2", include_str!("../scenarios/fig2.cfg")),
    ("resonant", include_str!("../scenarios/resonant.cfg")),
    ("rabi", include_str!("../scenarios/rabi.cfg")),
    ("jcm", include_str!("../scenarios/jcm.cfg")),
    ("chains", include_str!("../scenarios/chains.cfg")),
];

pub fn scenario(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Debug, Parser)]
#[command(name = "mcqed", version, about = "Multi-chain cavity QED wave-packet simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation from a config file or bundled scenario name.
    Run(RunArgs),
    /// Compute the spectrum of a `t,value` CSV series.
    Spectrum {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value = "rectangular")]
        window: Window,
    },
    /// Parse and validate a config without running it.
    Validate { config: String },
    /// List bundled scenarios, or print one.
    Scenarios { name: Option<String> },
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Config path or bundled scenario name.
    config: String,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    dump_field: bool,
    #[arg(long)]
    spectrum: bool,
    #[arg(long)]
    window: Option<Window>,
    #[arg(long)]
    unnormalized_inversion: bool,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
}

/// Parses `args` (including the program name) and executes the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical_validity() {
        3
    } else if matches!(e, Error::Io(_) | Error::Series(_) | Error::ZeroNorm) {
        1
    } else {
        2
    }
}

fn load(source: &str) -> Result<(Config, Vec<u8>)> {
    let bytes = match scenario(source) {
        Some(text) if !Path::new(source).exists() => text.as_bytes().to_vec(),
        _ => std::fs::read(source)?,
    };
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Config {
        line: 0,
        reason: "config is not valid UTF-8".into(),
    })?;
    Ok((Config::parse(&text)?, bytes))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run(args) => run_command(args),
        Command::Spectrum {
            input,
            output,
            window,
        } => {
            let series = read_series(&input)?;
            std::fs::write(output, spectrum_csv(&spectrum(&series, window)?))?;
            Ok(())
        }
        Command::Validate { config } => {
            let (cfg, _) = load(&config)?;
            cfg.params.validate()?;
            initial_state(&cfg.params)?;
            println!(
                "ok: {} chains x {} sites, l_max = {}, {} steps, stability number {:.3}",
                cfg.params.n_chains,
                cfg.params.n_sites,
                cfg.params.l_max,
                cfg.params.n_steps(),
                cfg.params.stability_number()
            );
            Ok(())
        }
        Command::Scenarios { name: None } => {
            for (name, _) in SCENARIOS {
                println!("{name}");
            }
            Ok(())
        }
        Command::Scenarios { name: Some(name) } => match scenario(&name) {
            Some(text) => {
                print!("{text}");
                Ok(())
            }
            None => Err(Error::Config {
                line: 0,
                reason: format!("no bundled scenario named `{name}`"),
            }),
        },
    }
}

fn run_command(args: RunArgs) -> Result<()> {
    let (mut cfg, source) = load(&args.config)?;
    if let Some(m) = args.mode {
        cfg.run.mode = Some(m);
    }
    if let Some(w) = args.window {
        cfg.run.window = w;
    }
    if let Some(dt) = args.dt {
        cfg.params.dt = dt;
    }
    if let Some(t) = args.t_end {
        cfg.params.t_end = t;
    }
    cfg.run.dump_field |= args.dump_field;
    cfg.run.spectrum |= args.spectrum;
    cfg.run.unnormalized_inversion |= args.unnormalized_inversion;
    cfg.params.validate()?;
    let mode = cfg.run.mode.unwrap_or(Mode::Discrete);
    cfg.run.mode = Some(mode);

    std::fs::create_dir_all(&args.out)?;
    let out = args.out.as_path();
    match mode {
        Mode::Discrete => {
            let s = simulate(&cfg, Mode::Discrete, out, "")?;
            write_series(&cfg, out, "", &s)?;
        }
        Mode::Continuum => {
            let s = simulate(&cfg, Mode::Continuum, out, "")?;
            write_series(&cfg, out, "", &s)?;
        }
        Mode::Compare => {
            let d = simulate(&cfg, Mode::Discrete, out, "_discrete")?;
            let c = simulate(&cfg, Mode::Continuum, out, "_continuum")?;
            write_series(&cfg, out, "_discrete", &d)?;
            write_series(&cfg, out, "_continuum", &c)?;
            let (rms, max) = series_difference(&d.0, &c.0)?;
            std::fs::write(
                out.join("compare.txt"),
                format!(
                    "samples = {}\nrms_inversion_difference = {:.11e}\nmax_abs_inversion_difference = {:.11e}\n",
                    d.0.len(),
                    rms,
                    max
                ),
            )?;
            println!("rms inversion difference {rms:.3e}, max {max:.3e}");
        }
    }
    std::fs::write(out.join("manifest.txt"), manifest_text(&cfg, &source, out))?;
    Ok(())
}

/// Root-mean-square and maximum absolute difference between two series
/// sampled at the same times.
pub fn series_difference(a: &TimeSeries, b: &TimeSeries) -> Result<(f64, f64)> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Series(format!(
            "series lengths differ or are empty: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut ss = 0.0;
    let mut max = 0.0f64;
    for (x, y) in a.values.iter().zip(&b.values) {
        let d = x - y;
        ss += d * d;
        max = max.max(d.abs());
    }
    Ok(((ss / a.len() as f64).sqrt(), max))
}

fn simulate(cfg: &Config, mode: Mode, out: &Path, suffix: &str) -> Result<(TimeSeries, TimeSeries)> {
    let p: &SystemParams = &cfg.params;
    let mut w = TimeSeries::new("inversion");
    let mut norm = TimeSeries::new("norm");
    let mut dump = if cfg.run.dump_field {
        Some(FieldDump::create(&out.join(format!("field{suffix}.csv")))?)
    } else {
        None
    };
    let unnormalized = cfg.run.unnormalized_inversion;
    let observe = |t: f64, f: &crate::model::AmplitudeField| -> Result<()> {
        let v = if unnormalized { raw_inversion(f) } else { inversion(f)? };
        w.push(t, v);
        norm.push(t, total_norm(f));
        if let Some(d) = dump.as_mut() {
            d.write(t, f)?;
        }
        Ok(())
    };
    match mode {
        Mode::Continuum => {
            let quad = match (cfg.run.quad_h_max, cfg.run.quad_h_step) {
                (None, None) => None,
                (hm, hs) => {
                    let default = continuum::Quadrature::for_grid(p, &continuum::lattice_grid(p));
                    Some(continuum::Quadrature {
                        h_max: hm.unwrap_or(default.h_max),
                        h_step: hs.unwrap_or(default.h_step),
                    })
                }
            };
            continuum::run_with(p, quad, observe)?;
        }
        _ => discrete::integrate_with(&initial_state(p)?, p, observe)?,
    }
    if let Some(d) = dump {
        d.finish()?;
    }
    Ok((w, norm))
}

fn write_series(cfg: &Config, out: &Path, suffix: &str, s: &(TimeSeries, TimeSeries)) -> Result<()> {
    std::fs::write(out.join(format!("inversion{suffix}.csv")), series_csv(&s.0))?;
    std::fs::write(out.join(format!("norm{suffix}.csv")), series_csv(&s.1))?;
    if cfg.run.spectrum {
        let sp = spectrum(&s.0, cfg.run.window)?;
        std::fs::write(out.join(format!("spectrum{suffix}.csv")), spectrum_csv(&sp))?;
    }
    Ok(())
}
