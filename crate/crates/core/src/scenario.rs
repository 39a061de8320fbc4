//! Moving-UE experiment: geometry, ground truth, NMSE and the Monte Carlo sweep.
//!
//! A UE circles a point at constant angular rate while a static base station
//! estimates the line-of-sight delay and Doppler at regularly spaced instants.
//! For every `(pilot, κ, SNR)` triple the sweep draws `trials_per_point`
//! channels and noise realizations, runs the twisted matched filter, and
//! reports the NMSE of the delay and Doppler estimates.
//!
//! Randomness is derived from `master_seed` and the trial index only, so all
//! triples share the same channel and noise draws (common random numbers) and
//! the result does not depend on how trials are scheduled across threads.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{apply_channel, sample_channel, DDChannelConfig, DopplerLayout, NoiseModel, SnrReference};
use crate::estimator::{estimate_dd, SearchRegion};
use crate::fmt::fmt_sig9;
use crate::sigops::PhaseCoupling;
use crate::tfgrid::{ComplexGrid, Span, Spacing};
use crate::zcseq::PilotSpec;
use crate::Error;

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Maximum Doppler the carrier frequency is calibrated against, Hz.
pub const NU_MAX: f64 = 1.5e3;

/// Nominal UE speed used for the carrier calibration, m/s (200 km/h).
pub const NOMINAL_SPEED: f64 = 200.0 / 3.6;

/// Reference maximum delay for the default power-delay-profile decay, s.
pub const TAU_MAX: f64 = 50e-6;

/// Carrier frequency at which a radial speed of `speed` m/s produces a Doppler of `nu_max` Hz.
pub fn carrier_for(nu_max: f64, speed: f64) -> f64 {
    nu_max * SPEED_OF_LIGHT / speed
}

/// `ln(100) / tau_max`: the profile falls to 1% of its zero-delay value at `tau_max`.
pub fn default_beta(tau_max: f64) -> f64 {
    100f64.ln() / tau_max
}

/// Which truth the NMSE compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruthReference {
    /// The continuous geometric delay and Doppler.
    #[default]
    Continuous,
    /// The truth snapped to the channel grid.
    Snapped,
}

impl TruthReference {
    pub fn name(&self) -> &'static str {
        match self {
            TruthReference::Continuous => "continuous",
            TruthReference::Snapped => "snapped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Base-station position, m.
    pub bs_position: (f64, f64),
    pub circle_center: (f64, f64),
    pub circle_radius: f64,
    /// rad/s.
    pub angular_rate: f64,
    /// Hz.
    pub carrier_freq: f64,
    /// Instants spread uniformly over one revolution.
    pub num_instants: usize,
    pub spacing: Spacing,
    pub delay_bins: usize,
    pub doppler_bins: i64,
    pub doppler_layout: DopplerLayout,
    pub kappas: Vec<f64>,
    /// `f64::INFINITY` for a noiseless point.
    pub snrs_db: Vec<f64>,
    pub snr_reference: SnrReference,
    pub trials_per_point: usize,
    pub master_seed: u64,
    pub pilots: Vec<PilotSpec>,
    pub beta: f64,
    pub normalize_nlos: bool,
    pub unit_los: bool,
    /// Twisted-convolution coupling; `None` means `Δf·T`.
    pub alpha: Option<f64>,
    pub truth: TruthReference,
}

fn kappa_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

impl ScenarioConfig {
    /// Full-size grid: `T = 0.5 µs`, `Δf = 10 Hz`, 100 delay bins, Doppler ±150,
    /// 23×17 pilots.
    pub fn paper() -> Self {
        let spacing = Spacing::new(10.0, 0.5e-6).expect("positive");
        ScenarioConfig {
            bs_position: (9_500.0, 9_500.0),
            circle_center: (4_000.0, 4_000.0),
            circle_radius: 3_500.0,
            angular_rate: 0.014,
            carrier_freq: carrier_for(NU_MAX, NOMINAL_SPEED),
            num_instants: 36,
            spacing,
            delay_bins: 100,
            doppler_bins: 150,
            doppler_layout: DopplerLayout::Signed,
            kappas: kappa_grid(),
            snrs_db: vec![-5.0, 0.0, 5.0],
            snr_reference: SnrReference::PerSample,
            trials_per_point: 100,
            master_seed: 42,
            pilots: default_pilots(23, 17),
            beta: default_beta(TAU_MAX),
            normalize_nlos: true,
            unit_los: true,
            alpha: None,
            truth: TruthReference::Continuous,
        }
    }

    /// Reduced grid for quick runs: 40 delay bins of 1 µs, Doppler ±40 bins
    /// of 40 Hz, 11×7 pilots. The coarser bins keep the whole trajectory on
    /// the grid.
    pub fn desk() -> Self {
        ScenarioConfig {
            spacing: Spacing::new(40.0, 1e-6).expect("positive"),
            delay_bins: 40,
            doppler_bins: 40,
            pilots: default_pilots(11, 7),
            ..Self::paper()
        }
    }

    pub fn phase_coupling(&self) -> Result<PhaseCoupling, Error> {
        match self.alpha {
            Some(a) => PhaseCoupling::new(a),
            None => Ok(PhaseCoupling::physical(self.spacing)),
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.angular_rate
    }

    /// Time of instant `i`.
    pub fn instant(&self, i: usize) -> f64 {
        self.period() * (i % self.num_instants) as f64 / self.num_instants as f64
    }

    pub fn doppler_span(&self) -> Result<Span, Error> {
        self.doppler_layout.span(self.doppler_bins)
    }

    /// Default search region: the channel grid.
    pub fn search_region(&self) -> Result<SearchRegion, Error> {
        Ok(SearchRegion::new(self.doppler_span()?, Span::zero_based(self.delay_bins.max(1))))
    }

    pub fn channel_config(&self, tau_los: f64, nu_los: f64, kappa: f64) -> Result<DDChannelConfig, Error> {
        Ok(DDChannelConfig {
            delay_bins: self.delay_bins,
            doppler_bins: self.doppler_bins,
            doppler_layout: self.doppler_layout,
            spacing: self.spacing,
            tau_los,
            nu_los,
            kappa,
            beta: self.beta,
            normalize_nlos: self.normalize_nlos,
            unit_los: self.unit_los,
            alpha: self.phase_coupling()?,
        })
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.trials_per_point == 0 {
            return bad("trials_per_point must be >= 1".into());
        }
        if self.num_instants == 0 {
            return bad("num_instants must be >= 1".into());
        }
        if !(self.angular_rate.is_finite() && self.angular_rate != 0.0) {
            return bad(format!("angular_rate must be finite and nonzero, got {}", self.angular_rate));
        }
        if !(self.carrier_freq > 0.0 && self.carrier_freq.is_finite()) {
            return bad(format!("carrier_freq must be positive, got {}", self.carrier_freq));
        }
        if self.delay_bins == 0 {
            return bad("delay_bins must be >= 1".into());
        }
        if self.pilots.is_empty() {
            return bad("no pilots requested".into());
        }
        if self.kappas.is_empty() || self.snrs_db.is_empty() {
            return bad("kappa and SNR lists must be non-empty".into());
        }
        for &k in &self.kappas {
            if !(0.0..=1.0).contains(&k) {
                return bad(format!("kappa {k} outside [0, 1]"));
            }
        }
        for &s in &self.snrs_db {
            if s.is_nan() || s == f64::NEG_INFINITY {
                return bad(format!("invalid SNR {s} dB"));
            }
        }
        for p in &self.pilots {
            p.validate()?;
        }
        self.phase_coupling()?;
        self.channel_config(0.0, 0.0, 1.0)?.validate()?;

        let doppler = self.doppler_span()?;
        let tau_max = (self.delay_bins - 1) as f64 * self.spacing.delta_t;
        let (nu_lo, nu_hi) = (doppler.lo() as f64 * self.spacing.delta_f, doppler.hi() as f64 * self.spacing.delta_f);
        for i in 0..self.num_instants {
            let t = self.instant(i);
            let (tau, nu) = true_delay_doppler(t, self);
            if tau > tau_max || nu < nu_lo || nu > nu_hi {
                return Err(Error::TruthOutsideGrid(format!(
                    "instant {i} (t={}s): tau={}s, nu={}Hz outside delay [0, {}] / Doppler [{}, {}]",
                    fmt_sig9(t),
                    fmt_sig9(tau),
                    fmt_sig9(nu),
                    fmt_sig9(tau_max),
                    fmt_sig9(nu_lo),
                    fmt_sig9(nu_hi)
                )));
            }
        }
        Ok(())
    }
}

/// Separable, stacked and 1D baseline pilots sized for an `m x n` grid.
pub fn default_pilots(m: usize, n: usize) -> Vec<PilotSpec> {
    vec![
        PilotSpec::separable(m, n),
        PilotSpec::stacked(m, n),
        PilotSpec::zc1d_matching(m, n, 1).expect("root 1 is coprime to everything"),
    ]
}

/// UE position at time `t`, m.
pub fn ue_position(t: f64, cfg: &ScenarioConfig) -> (f64, f64) {
    let a = cfg.angular_rate * t;
    (cfg.circle_center.0 + cfg.circle_radius * a.cos(), cfg.circle_center.1 + cfg.circle_radius * a.sin())
}

/// UE velocity at time `t`, m/s.
pub fn ue_velocity(t: f64, cfg: &ScenarioConfig) -> (f64, f64) {
    let a = cfg.angular_rate * t;
    let s = cfg.circle_radius * cfg.angular_rate;
    (-s * a.sin(), s * a.cos())
}

/// Line-of-sight `(delay s, Doppler Hz)`; Doppler is positive while the UE approaches.
pub fn true_delay_doppler(t: f64, cfg: &ScenarioConfig) -> (f64, f64) {
    let (x, y) = ue_position(t, cfg);
    let (vx, vy) = ue_velocity(t, cfg);
    let (dx, dy) = (x - cfg.bs_position.0, y - cfg.bs_position.1);
    let d = dx.hypot(dy);
    let radial = (dx * vx + dy * vy) / d;
    (d / SPEED_OF_LIGHT, -cfg.carrier_freq / SPEED_OF_LIGHT * radial)
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `Σ|η - η̂|² / Σ|η|²`.
pub fn nmse(truth: &[f64], est: &[f64]) -> Result<f64, Error> {
    if truth.len() != est.len() {
        return Err(Error::LengthMismatch(truth.len(), est.len()));
    }
    let den = compensated_sum(truth.iter().map(|v| v * v));
    if den <= 0.0 {
        return Err(Error::InvalidScenario("NMSE undefined for an all-zero truth vector".into()));
    }
    let num = compensated_sum(truth.iter().zip(est).map(|(t, e)| (t - e) * (t - e)));
    Ok(num / den)
}

/// One row of the sweep output.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub pilot: String,
    pub kappa: f64,
    pub snr_db: f64,
    pub trials: usize,
    pub nmse_tau: f64,
    pub nmse_nu: f64,
    /// Fraction of trials whose peak landed exactly on the snapped line-of-sight cell.
    pub exact_cell_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

pub const CSV_HEADER: &str = "pilot,kappa,snr_db,trials,nmse_tau,nmse_nu";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.pilot,
                fmt_sig9(r.kappa),
                fmt_sig9(r.snr_db),
                r.trials,
                fmt_sig9(r.nmse_tau),
                fmt_sig9(r.nmse_nu)
            ));
        }
        out
    }

    pub fn find(&self, pilot: &str, kappa: f64, snr_db: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.pilot == pilot && r.kappa == kappa && r.snr_db == snr_db)
    }
}

/// Per-trial random streams: ChaCha8 seeded with `master_seed`, stream number
/// `2·trial` for the channel and `2·trial + 1` for the noise.
pub fn trial_rngs(master_seed: u64, trial: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut ch = ChaCha8Rng::seed_from_u64(master_seed);
    ch.set_stream(2 * trial as u64);
    let mut noise = ChaCha8Rng::seed_from_u64(master_seed);
    noise.set_stream(2 * trial as u64 + 1);
    (ch, noise)
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub tau_true: f64,
    pub nu_true: f64,
    pub tau_hat: f64,
    pub nu_hat: f64,
    pub exact_cell: bool,
}

/// Runs trial `trial` for one pilot at one `(κ, SNR)` point.
pub fn run_trial(cfg: &ScenarioConfig, pilot: &ComplexGrid, kappa: f64, snr_db: f64, trial: usize) -> Result<TrialOutcome, Error> {
    let t = cfg.instant(trial);
    let (tau, nu) = true_delay_doppler(t, cfg);
    let ch_cfg = cfg.channel_config(tau, nu, kappa)?;
    let (mut ch_rng, mut noise_rng) = trial_rngs(cfg.master_seed, trial);
    let h = sample_channel(&ch_cfg, &mut ch_rng)?;
    let noise = NoiseModel::new(snr_db, cfg.snr_reference);
    let y = apply_channel(&h, pilot, &noise, &mut noise_rng);
    let est = estimate_dd(&y, pilot, ch_cfg.alpha, cfg.search_region()?)?;
    let (tau_true, nu_true) = match cfg.truth {
        TruthReference::Continuous => (tau, nu),
        TruthReference::Snapped => (
            h.los_index.col as f64 * cfg.spacing.delta_t,
            h.los_index.row as f64 * cfg.spacing.delta_f,
        ),
    };
    Ok(TrialOutcome { tau_true, nu_true, tau_hat: est.tau_hat, nu_hat: est.nu_hat, exact_cell: est.index() == h.los_index })
}

/// Runs every `(pilot, κ, SNR)` point; rows come out pilot-major, then κ, then SNR.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepResult, Error> {
    cfg.validate()?;
    let pilots: Vec<(String, ComplexGrid)> = cfg
        .pilots
        .iter()
        .map(|p| Ok((p.family().to_string(), p.generate(cfg.spacing)?)))
        .collect::<Result<_, Error>>()?;

    let mut points = Vec::new();
    for (pi, _) in pilots.iter().enumerate() {
        for &kappa in &cfg.kappas {
            for &snr in &cfg.snrs_db {
                points.push((pi, kappa, snr));
            }
        }
    }
    let trials = cfg.trials_per_point;
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..trials).map(move |t| (p, t))).collect();
    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(p, trial)| {
            let (pi, kappa, snr) = points[p];
            run_trial(cfg, &pilots[pi].1, kappa, snr, trial)
        })
        .collect::<Result<_, Error>>()?;

    let mut rows = Vec::with_capacity(points.len());
    for (p, chunk) in outcomes.chunks(trials).enumerate() {
        let (pi, kappa, snr) = points[p];
        let tau_true: Vec<f64> = chunk.iter().map(|o| o.tau_true).collect();
        let tau_hat: Vec<f64> = chunk.iter().map(|o| o.tau_hat).collect();
        let nu_true: Vec<f64> = chunk.iter().map(|o| o.nu_true).collect();
        let nu_hat: Vec<f64> = chunk.iter().map(|o| o.nu_hat).collect();
        rows.push(SweepRow {
            pilot: pilots[pi].0.clone(),
            kappa,
            snr_db: snr,
            trials,
            nmse_tau: nmse(&tau_true, &tau_hat)?,
            nmse_nu: nmse(&nu_true, &nu_hat)?,
            exact_cell_rate: chunk.iter().filter(|o| o.exact_cell).count() as f64 / trials as f64,
        });
    }
    Ok(SweepResult { rows })
}
