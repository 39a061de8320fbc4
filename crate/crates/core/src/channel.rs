//! Rician delay-Doppler channels and noisy reception.
//!
//! A channel realization is `H = κ·H_LoS + √(1 - κ²)·H_NLoS` on a grid of
//! Doppler rows `l` and delay columns `k`. `H_LoS` holds one tap at the grid
//! cell nearest the true line-of-sight delay and Doppler. `H_NLoS` is dense
//! Rayleigh scattering whose per-cell variance follows an exponential
//! power-delay profile that switches on at the line-of-sight delay.
//!
//! The received grid is the twisted convolution of `H` with the pilot plus
//! circular complex Gaussian noise over the full convolution extent.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use num_complex::Complex64;

use crate::sigops::{twisted_conv, PhaseCoupling};
use crate::tfgrid::{ComplexGrid, GridIndex, Span, Spacing};
use crate::Error;

/// Exponential power-delay profile: 0 before `tau_los`, `exp(-beta·tau)` from it on.
pub fn pdp(tau: f64, tau_los: f64, beta: f64) -> f64 {
    if tau < tau_los {
        0.0
    } else {
        (-beta * tau).exp()
    }
}

/// Nearest integer, exact halves rounded toward zero.
pub(crate) fn round_half_toward_zero(x: f64) -> i64 {
    let t = x.trunc();
    if (x - t).abs() == 0.5 {
        t as i64
    } else {
        x.round() as i64
    }
}

/// How the Doppler bin count is laid out on the signed row axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DopplerLayout {
    /// `doppler_bins = L` gives rows `[-L, L]` (`2L + 1` bins).
    #[default]
    Signed,
    /// `doppler_bins = L` is the total row count, centred: `[-⌊L/2⌋, ⌈L/2⌉ - 1]`.
    Total,
}

impl DopplerLayout {
    pub fn span(&self, bins: i64) -> Result<Span, Error> {
        match self {
            DopplerLayout::Signed => {
                if bins < 0 {
                    return Err(Error::InvalidChannel(format!("doppler_bins must be >= 0, got {bins}")));
                }
                Ok(Span::symmetric(bins))
            }
            DopplerLayout::Total => {
                if bins < 1 {
                    return Err(Error::InvalidChannel(format!("doppler_bins must be >= 1, got {bins}")));
                }
                Span::new(-(bins / 2), (bins + 1) / 2 - 1)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DopplerLayout::Signed => "signed",
            DopplerLayout::Total => "total",
        }
    }
}

/// Parameters of one channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct DDChannelConfig {
    /// Delay bins `K`: columns `0..K`.
    pub delay_bins: usize,
    pub doppler_bins: i64,
    pub doppler_layout: DopplerLayout,
    pub spacing: Spacing,
    /// Line-of-sight delay, seconds.
    pub tau_los: f64,
    /// Line-of-sight Doppler, Hz.
    pub nu_los: f64,
    /// Rician weight in `[0, 1]`.
    pub kappa: f64,
    /// Power-delay-profile decay, 1/s.
    pub beta: f64,
    /// Scale `H_NLoS` to unit expected total power.
    pub normalize_nlos: bool,
    /// Give the line-of-sight tap unit magnitude instead of `P(k_LoS·T)`.
    pub unit_los: bool,
    pub alpha: PhaseCoupling,
}

impl DDChannelConfig {
    pub fn delay_span(&self) -> Span {
        Span::zero_based(self.delay_bins.max(1))
    }

    pub fn doppler_span(&self) -> Result<Span, Error> {
        self.doppler_layout.span(self.doppler_bins)
    }

    /// Grid cell nearest `(nu_los / Δf, tau_los / T)`.
    pub fn los_index(&self) -> GridIndex {
        GridIndex::new(
            round_half_toward_zero(self.nu_los / self.spacing.delta_f),
            round_half_toward_zero(self.tau_los / self.spacing.delta_t),
        )
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidChannel(msg));
        if self.delay_bins == 0 {
            return bad("delay_bins must be positive".into());
        }
        let doppler = self.doppler_span()?;
        if !(0.0..=1.0).contains(&self.kappa) {
            return bad(format!("kappa must lie in [0, 1], got {}", self.kappa));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be finite and >= 0, got {}", self.beta));
        }
        let tau_max = (self.delay_bins - 1) as f64 * self.spacing.delta_t;
        if !(self.tau_los >= 0.0 && self.tau_los <= tau_max) {
            return bad(format!("tau_los={} outside [0, {}]", self.tau_los, tau_max));
        }
        let nu_lo = doppler.lo() as f64 * self.spacing.delta_f;
        let nu_hi = doppler.hi() as f64 * self.spacing.delta_f;
        if !(self.nu_los >= nu_lo && self.nu_los <= nu_hi) {
            return bad(format!("nu_los={} outside [{}, {}]", self.nu_los, nu_lo, nu_hi));
        }
        let los = self.los_index();
        if !doppler.contains(los.row) || !self.delay_span().contains(los.col) {
            return bad(format!("line-of-sight cell ({}, {}) is off the grid", los.row, los.col));
        }
        Ok(())
    }
}

/// One channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct DDChannel {
    pub grid: ComplexGrid,
    pub los_index: GridIndex,
    pub config: DDChannelConfig,
}

/// One circular complex Gaussian sample with variance `var`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * (var / 2.0).sqrt()
}

/// Draws `κ·H_LoS + √(1 - κ²)·H_NLoS`.
///
/// The profile switches on at the snapped line-of-sight delay bin, so every
/// column before `los_index.col` is exactly zero. One Gaussian pair is drawn
/// per cell in row-major order whatever the variances are, which keeps a
/// seeded stream aligned across `κ` values.
pub fn sample_channel<R: Rng + ?Sized>(cfg: &DDChannelConfig, rng: &mut R) -> Result<DDChannel, Error> {
    cfg.validate()?;
    let rows = cfg.doppler_span()?;
    let cols = cfg.delay_span();
    let los = cfg.los_index();
    let t = cfg.spacing.delta_t;
    let onset = los.col as f64 * t;
    let profile: Vec<f64> = cols.iter().map(|k| pdp(k as f64 * t, onset, cfg.beta)).collect();

    let mut nlos = ComplexGrid::zeros(rows, cols, cfg.spacing);
    let mut total_var = 0.0;
    for l in rows.iter() {
        for k in cols.iter() {
            let var = if l == los.row && k == los.col { 0.0 } else { profile[k as usize] };
            let draw = complex_gaussian(rng, 1.0);
            *nlos.get_mut(l, k).expect("in range") = draw * var.sqrt();
            total_var += var;
        }
    }
    let nlos_scale = if cfg.normalize_nlos && total_var > 0.0 { 1.0 / total_var.sqrt() } else { 1.0 };

    let los_value = if cfg.unit_los { 1.0 } else { profile[los.col as usize] };
    let w_nlos = (1.0 - cfg.kappa * cfg.kappa).max(0.0).sqrt() * nlos_scale;
    let mut grid = nlos.scale(Complex64::new(w_nlos, 0.0));
    *grid.get_mut(los.row, los.col).expect("validated") += Complex64::new(cfg.kappa * los_value, 0.0);
    Ok(DDChannel { grid, los_index: los, config: cfg.clone() })
}

/// Which power the SNR is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrReference {
    /// Noise variance `E_X / SNR` per sample: SNR relative to the whole pilot energy.
    PilotEnergy,
    /// Noise variance `(E_X / |X|) / SNR`: SNR relative to the mean power of one
    /// occupied pilot cell.
    #[default]
    PerSample,
}

impl SnrReference {
    pub fn name(&self) -> &'static str {
        match self {
            SnrReference::PilotEnergy => "pilot_energy",
            SnrReference::PerSample => "per_sample",
        }
    }
}

/// Additive noise level: `snr_db = None` means noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    pub snr_db: Option<f64>,
    pub reference: SnrReference,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel { snr_db: None, reference: SnrReference::default() }
    }

    pub fn new(snr_db: f64, reference: SnrReference) -> Self {
        let snr_db = (snr_db != f64::INFINITY).then_some(snr_db);
        NoiseModel { snr_db, reference }
    }

    /// Per-sample noise variance for pilot `x`, zero when noiseless.
    pub fn variance(&self, x: &ComplexGrid) -> f64 {
        let Some(db) = self.snr_db else { return 0.0 };
        let snr = 10f64.powf(db / 10.0);
        let reference = match self.reference {
            SnrReference::PilotEnergy => x.energy(),
            SnrReference::PerSample => {
                let occupied = x.support().count().max(1);
                x.energy() / occupied as f64
            }
        };
        reference / snr
    }
}

/// Adds i.i.d. `CN(0, var)` to every sample of `y`.
pub fn add_noise<R: Rng + ?Sized>(y: &mut ComplexGrid, var: f64, rng: &mut R) {
    if var <= 0.0 {
        return;
    }
    for v in y.as_mut_slice() {
        *v += complex_gaussian(rng, var);
    }
}

/// `Y = H *σ X + W` over the full output support of the twisted convolution.
pub fn apply_channel<R: Rng + ?Sized>(h: &DDChannel, x: &ComplexGrid, noise: &NoiseModel, rng: &mut R) -> ComplexGrid {
    let mut y = twisted_conv(&h.grid, x, h.config.alpha);
    add_noise(&mut y, noise.variance(x), rng);
    y
}
