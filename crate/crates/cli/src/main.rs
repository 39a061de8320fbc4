//! `tfpilot`: pilot generation, ambiguity surfaces, single-shot estimation and
//! NMSE sweeps from the command line.
//!
//! Every subcommand resolves a [`config::RunConfig`] from a preset, an
//! optional `--config` file, `--set key=value` overrides and finally its own
//! flags. Whenever a file is written, the resolved configuration is written
//! next to it as `<out>.config`.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tfpilot::channel::{apply_channel, sample_channel, NoiseModel};
use tfpilot::estimator::estimate_dd_with_q;
use tfpilot::fmt_sig9;
use tfpilot::scenario::{run_sweep, trial_rngs, true_delay_doppler, ScenarioConfig};
use tfpilot::sigops::{discrete_caf, linear_acf2d, twisted_acf, PhaseCoupling};
use tfpilot::tfgrid::Span;
use tfpilot::zcseq::{zc_sequence, PilotSpec};
use tfpilot::Error;

use config::{split_override, ConfigError, Preset, RunConfig};
use output::{magnitude_triplets, max_sidelobe, sidecar_path, write_atomic};

#[derive(Parser)]
#[command(name = "tfpilot", version, about = "Time-frequency pilot delay-Doppler estimation simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Flat `section.key=value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Default)]
struct PilotArgs {
    /// separable, stacked, stacked_transposed or zc1d.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// zc1d length.
    #[arg(long)]
    l: Option<usize>,
    /// zc1d root.
    #[arg(long)]
    r: Option<i64>,
    #[arg(long)]
    r_f: Option<i64>,
    #[arg(long)]
    r_t: Option<i64>,
    /// Comma-separated stacked roots.
    #[arg(long)]
    roots: Option<String>,
}

impl PilotArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut push = |k: &'static str, x: Option<String>| {
            if let Some(x) = x {
                v.push((k, x));
            }
        };
        push("pilot.m", self.m.map(|x| x.to_string()));
        push("pilot.n", self.n.map(|x| x.to_string()));
        push("pilot.l", self.l.map(|x| x.to_string()));
        push("pilot.r", self.r.map(|x| x.to_string()));
        push("pilot.r_f", self.r_f.map(|x| x.to_string()));
        push("pilot.r_t", self.r_t.map(|x| x.to_string()));
        push("pilot.roots", self.roots.clone());
        v
    }

    fn family(&self) -> &str {
        self.family.as_deref().unwrap_or("separable")
    }
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    kappa: Option<f64>,
    /// Trial index: selects the instant and the random streams.
    #[arg(long)]
    trial: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a pilot grid dump and print its energy.
    GenPilot {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pilot: PilotArgs,
    },
    /// Magnitude surface of a pilot's 2D linear or twisted autocorrelation.
    Acf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pilot: PilotArgs,
        #[arg(long)]
        twisted: bool,
        /// Phase coupling for --twisted; a number or `physical` (Δf·T).
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// 1D ambiguity surface instead (zc1d only).
        #[arg(long)]
        caf: bool,
    },
    /// Ambiguity surface of a 1D ZC sequence.
    Caf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pilot: PilotArgs,
    },
    /// Draw one delay-Doppler channel and write it as a grid dump.
    DumpChannel {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Single-shot delay-Doppler estimate; --out receives the |Q| surface.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pilot: PilotArgs,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<f64>,
    },
    /// NMSE sweep over pilots, κ and SNR; writes CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pilot: PilotArgs,
        /// Comma-separated pilot families.
        #[arg(long)]
        families: Option<String>,
        #[arg(long)]
        kappas: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        snrs: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads (0: all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::TruthOutsideGrid(_) | Error::EmptySearchRegion => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn resolve(common: &Common, flags: &[(&str, String)]) -> Result<RunConfig, CliError> {
    let text = match &common.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| io_err(p, e))?),
        None => None,
    };
    let mut cfg = RunConfig::from_text(text.as_deref().unwrap_or(""), common.preset)?;
    for s in &common.set {
        let (k, v) = split_override(s)?;
        cfg.set(&k, &v)?;
    }
    for (k, v) in flags {
        cfg.set(k, v)?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn emit(out: &Path, body: &str, cfg: &RunConfig) -> Result<(), CliError> {
    write_atomic(out, body).map_err(|e| io_err(out, e))?;
    let side = sidecar_path(out);
    write_atomic(&side, &cfg.to_text()).map_err(|e| io_err(&side, e))
}

fn out_or(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn describe(spec: &PilotSpec) -> String {
    match spec {
        PilotSpec::Zc1d { len, root } => format!("L={len}\nroot {root}"),
        PilotSpec::Separable { m, n, r_f, r_t } => format!("shape {m}x{n}\nroots r_f={r_f} r_t={r_t}"),
        PilotSpec::Stacked { m, n, roots } | PilotSpec::StackedTransposed { m, n, roots } => format!(
            "shape {m}x{n}\nroots {}",
            roots.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
        ),
    }
}

fn caf_surface(cfg: &RunConfig) -> Result<tfpilot::tfgrid::ComplexGrid, CliError> {
    let len = cfg.zc1d_len()?;
    let s = zc_sequence(len, cfg.r)?;
    let half = len as i64 - 1;
    let step = 1.0 / (len as f64 * cfg.delta_t);
    Ok(discrete_caf(&s, &s, Span::symmetric(half), step, cfg.delta_t)?)
}

fn single_point(cfg: &RunConfig) -> Result<(ScenarioConfig, f64, f64, f64), CliError> {
    let scen = cfg.scenario()?;
    scen.validate()?;
    let t = scen.instant(cfg.trial);
    let (tau, nu) = true_delay_doppler(t, &scen);
    Ok((scen, t, tau, nu))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Command::GenPilot { common, pilot } => {
            let cfg = resolve(&common, &pilot.overrides())?;
            let spec = cfg.pilot(pilot.family())?;
            let grid = spec.generate(cfg.spacing()?)?;
            emit(&out_or(&common, "pilot.txt"), &grid.to_dump_string(), &cfg)?;
            println!("family {}", spec.family());
            println!("{}", describe(&spec));
            println!("energy {:.9}", grid.energy());
        }
        Command::Acf { common, pilot, twisted, alpha, caf } => {
            let mut flags = pilot.overrides();
            if let Some(a) = alpha {
                flags.push(("channel.alpha", a));
            }
            let cfg = resolve(&common, &flags)?;
            let surface = if caf {
                if pilot.family() != "zc1d" {
                    return Err(CliError::Config("--caf requires --family zc1d".into()));
                }
                caf_surface(&cfg)?
            } else {
                let grid = cfg.pilot(pilot.family())?.generate(cfg.spacing()?)?;
                if twisted {
                    let pc = match cfg.alpha {
                        Some(a) => PhaseCoupling::new(a)?,
                        None => PhaseCoupling::physical(grid.spacing()),
                    };
                    twisted_acf(&grid, pc)
                } else {
                    linear_acf2d(&grid)
                }
            };
            emit(&out_or(&common, "acf.dat"), &magnitude_triplets(&surface), &cfg)?;
            println!("peak {}", fmt_sig9(surface.get(0, 0).norm()));
            println!("max_sidelobe {}", fmt_sig9(max_sidelobe(&surface)));
        }
        Command::Caf { common, pilot } => {
            let cfg = resolve(&common, &pilot.overrides())?;
            let surface = caf_surface(&cfg)?;
            emit(&out_or(&common, "caf.dat"), &magnitude_triplets(&surface), &cfg)?;
            println!("peak {}", fmt_sig9(surface.get(0, 0).norm()));
            println!("max_sidelobe {}", fmt_sig9(max_sidelobe(&surface)));
        }
        Command::DumpChannel { common, point } => {
            let cfg = resolve(&common, &point_flags(&point))?;
            let (scen, t, tau, nu) = single_point(&cfg)?;
            let ch_cfg = scen.channel_config(tau, nu, cfg.kappa)?;
            let (mut ch_rng, _) = trial_rngs(cfg.seed, cfg.trial);
            let h = sample_channel(&ch_cfg, &mut ch_rng)?;
            emit(&out_or(&common, "channel.txt"), &h.grid.to_dump_string(), &cfg)?;
            println!("t {}", fmt_sig9(t));
            println!("tau {}", fmt_sig9(tau));
            println!("nu {}", fmt_sig9(nu));
            println!("los_index {},{}", h.los_index.row, h.los_index.col);
        }
        Command::Estimate { common, pilot, point, snr } => {
            let mut flags = pilot.overrides();
            flags.extend(point_flags(&point));
            if let Some(s) = snr {
                flags.push(("channel.snr_db", s.to_string()));
            }
            let cfg = resolve(&common, &flags)?;
            let (scen, _, tau, nu) = single_point(&cfg)?;
            let x = cfg.pilot(pilot.family())?.generate(scen.spacing)?;
            let ch_cfg = scen.channel_config(tau, nu, cfg.kappa)?;
            let (mut ch_rng, mut noise_rng) = trial_rngs(cfg.seed, cfg.trial);
            let h = sample_channel(&ch_cfg, &mut ch_rng)?;
            let y = apply_channel(&h, &x, &NoiseModel::new(cfg.snr_db, cfg.snr_reference), &mut noise_rng);
            let est = estimate_dd_with_q(&y, &x, ch_cfg.alpha, scen.search_region()?)?;
            if let (Some(out), Some(q)) = (&common.out, &est.q_grid) {
                emit(out, &magnitude_triplets(q), &cfg)?;
            }
            println!("true_tau {}", fmt_sig9(tau));
            println!("true_nu {}", fmt_sig9(nu));
            println!("los_index {},{}", h.los_index.row, h.los_index.col);
            println!("l,k,nu,tau,peak");
            println!("{}", est.csv_line());
        }
        Command::Sweep { common, pilot, families, kappas, snrs, trials, threads } => {
            let mut flags = pilot.overrides();
            if let Some(f) = families.or(pilot.family.clone()) {
                flags.push(("pilot.families", f));
            }
            if let Some(k) = kappas {
                flags.push(("scenario.kappas", k));
            }
            if let Some(s) = snrs {
                flags.push(("scenario.snrs_db", s));
            }
            if let Some(t) = trials {
                flags.push(("scenario.trials", t.to_string()));
            }
            let cfg = resolve(&common, &flags)?;
            let scen = cfg.scenario()?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
            let result = pool.install(|| run_sweep(&scen))?;
            let out = out_or(&common, "sweep.csv");
            emit(&out, &result.to_csv(), &cfg)?;
            println!("wrote {} rows to {}", result.rows.len(), out.display());
        }
    }
    Ok(())
}

fn point_flags(p: &PointArgs) -> Vec<(&'static str, String)> {
    let mut v = Vec::new();
    if let Some(k) = p.kappa {
        v.push(("channel.kappa", k.to_string()));
    }
    if let Some(t) = p.trial {
        v.push(("channel.trial", t.to_string()));
    }
    v
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tfpilot: {e}");
            ExitCode::from(e.code())
        }
    }
}
