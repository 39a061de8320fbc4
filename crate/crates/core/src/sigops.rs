//! Correlation, ambiguity and convolution primitives.
//!
//! Sequence correlations and the discrete cross-ambiguity function (CAF) are
//! normalized by signal energy so a unit-energy signal correlates to exactly
//! 1 with itself at zero lag. Reads beyond a sequence are zero (aperiodic)
//! everywhere except [`periodic_xcorr`].
//!
//! The twisted convolution
//!
//! ```text
//! z[m, n] = Σ_l Σ_k x[l, k] · y[m - l, n - k] · exp(j2π·α·(m - l)·k)
//! ```
//!
//! carries a Doppler-delay phase coupling `α`; with integer indices and
//! `α = 1` the phase is identically one, so `α` defaults to `Δf·T`
//! (see [`PhaseCoupling::physical`]). `α = 0` gives plain 2D convolution.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::estimator::matched_filter_gamma;
use crate::tfgrid::{ComplexGrid, Span, Spacing};
use crate::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficient `α` of the twisted-convolution phase `exp(j2π·α·(m - l)·k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCoupling {
    alpha: f64,
}

impl PhaseCoupling {
    pub fn new(alpha: f64) -> Result<Self, Error> {
        if !alpha.is_finite() {
            return Err(Error::InvalidChannel(format!("phase coupling must be finite, got {alpha}")));
        }
        Ok(PhaseCoupling { alpha })
    }

    /// `α = 0`: the twisted convolution collapses to [`conv2d`].
    pub fn none() -> Self {
        PhaseCoupling { alpha: 0.0 }
    }

    /// `α = Δf·T`, the Doppler-delay phase per (row step × column step).
    pub fn physical(spacing: Spacing) -> Self {
        PhaseCoupling { alpha: spacing.product() }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `exp(j2π·α·p)`.
    #[inline]
    pub fn phase(&self, p: i64) -> Complex64 {
        if self.alpha == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        Complex64::cis(2.0 * PI * self.alpha * p as f64)
    }
}

/// Values indexed by consecutive signed lags starting at `first_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagSeries {
    pub first_lag: i64,
    pub values: Vec<Complex64>,
}

impl LagSeries {
    /// Value at `lag`, zero outside the stored lags.
    pub fn at(&self, lag: i64) -> Complex64 {
        let i = lag - self.first_lag;
        if i < 0 {
            return ZERO;
        }
        self.values.get(i as usize).copied().unwrap_or(ZERO)
    }

    pub fn lags(&self) -> impl Iterator<Item = i64> {
        self.first_lag..self.first_lag + self.values.len() as i64
    }

    pub fn last_lag(&self) -> i64 {
        self.first_lag + self.values.len() as i64 - 1
    }
}

fn energy(s: &[Complex64]) -> f64 {
    s.iter().map(|v| v.norm_sqr()).sum()
}

/// `√(E_x·E_y)`, or 1 when either signal is silent (the output is then zero anyway).
fn cross_norm(x: &[Complex64], y: &[Complex64]) -> f64 {
    let e = (energy(x) * energy(y)).sqrt();
    if e > 0.0 {
        e
    } else {
        1.0
    }
}

/// Periodic correlation `R[k] = (1/E)·Σ_n y[n]·x*[(n + k) mod L]`, `k = 0..L-1`.
pub fn periodic_xcorr(x: &[Complex64], y: &[Complex64]) -> Result<Vec<Complex64>, Error> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let l = x.len();
    let norm = cross_norm(x, y);
    Ok((0..l)
        .map(|k| (0..l).map(|n| y[n] * x[(n + k) % l].conj()).sum::<Complex64>() / norm)
        .collect())
}

/// Aperiodic correlation `R[k] = (1/E)·Σ_n x[n]·y*[n + k]`.
///
/// The shorter input is zero-padded; lags run over `-(len - 1)..=(len - 1)`
/// where `len` is the longer length.
pub fn linear_xcorr(x: &[Complex64], y: &[Complex64]) -> LagSeries {
    let len = x.len().max(y.len()) as i64;
    let norm = cross_norm(x, y);
    let get = |s: &[Complex64], i: i64| if i >= 0 && (i as usize) < s.len() { s[i as usize] } else { ZERO };
    let values = (-(len - 1)..=(len - 1))
        .map(|k| (0..len).map(|n| get(x, n) * get(y, n + k).conj()).sum::<Complex64>() / norm)
        .collect();
    LagSeries { first_lag: -(len - 1), values }
}

/// Discrete cross-ambiguity function over Doppler bins `doppler` and all delays.
///
/// `A[l, k] = (1/E)·Σ_{n=0}^{L-1} x[n]·y*[n + k]·exp(-j2π·(l·Δf)·(n·t_s))`
/// with `Δf = doppler_step` (Hz) and `t_s = sample_period` (s). Row `l = 0`
/// is [`linear_xcorr`].
pub fn discrete_caf(
    x: &[Complex64],
    y: &[Complex64],
    doppler: Span,
    doppler_step: f64,
    sample_period: f64,
) -> Result<ComplexGrid, Error> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::InvalidGrid("ambiguity of empty sequences".into()));
    }
    let spacing = Spacing::new(doppler_step, sample_period)?;
    let len = x.len() as i64;
    let norm = cross_norm(x, y);
    let delays = Span::new(-(len - 1), len - 1)?;
    Ok(ComplexGrid::from_fn(doppler, delays, spacing, |l, k| {
        let mut acc = ZERO;
        for n in 0..len {
            let j = n + k;
            if (0..len).contains(&j) {
                let rot = Complex64::cis(-2.0 * PI * (l as f64 * doppler_step) * (n as f64 * sample_period));
                acc += x[n as usize] * y[j as usize].conj() * rot;
            }
        }
        acc / norm
    }))
}

/// Full linear 2D convolution; output ranges are the Minkowski sums of the inputs'.
pub fn conv2d(x: &ComplexGrid, y: &ComplexGrid) -> ComplexGrid {
    twisted_conv(x, y, PhaseCoupling::none())
}

/// Twisted convolution of `x` with `y` (order matters: the operation is
/// neither commutative nor associative).
pub fn twisted_conv(x: &ComplexGrid, y: &ComplexGrid, pc: PhaseCoupling) -> ComplexGrid {
    let rows = x.rows().sum(&y.rows());
    let cols = x.cols().sum(&y.cols());
    let mut z = ComplexGrid::zeros(rows, cols, x.spacing());
    let (yr, yc) = (y.rows(), y.cols());
    let zcols = cols.len();
    let out = z.as_mut_slice();
    // exp(j2π·α·(m - l)·k) depends on the y row offset (m - l) and the x column k.
    let mut phase_row = vec![ZERO; yr.len()];
    let mut last_k = None;
    for (idx, xv) in x.support() {
        if last_k != Some(idx.col) {
            for (slot, a) in phase_row.iter_mut().zip(yr.iter()) {
                *slot = pc.phase(a * idx.col);
            }
            last_k = Some(idx.col);
        }
        for (ai, a) in yr.iter().enumerate() {
            let w = xv * phase_row[ai];
            let yrow = y.row_slice(a).expect("row in range");
            let zr = (idx.row + a - rows.lo()) as usize;
            let base = zr * zcols + (idx.col + yc.lo() - cols.lo()) as usize;
            for (dst, yv) in out[base..base + yrow.len()].iter_mut().zip(yrow) {
                *dst += w * yv;
            }
        }
    }
    z
}

/// Energy-normalized 2D linear autocorrelation `Σ x[a, b]·x*[a - l, b - k] / E`.
pub fn linear_acf2d(x: &ComplexGrid) -> ComplexGrid {
    let e = x.energy();
    let acf = conv2d(x, &x.flip_conj());
    if e > 0.0 {
        acf.scale(Complex64::new(1.0 / e, 0.0))
    } else {
        acf
    }
}

/// Twisted matched-filter self-response: `x` twisted-convolved with its own
/// filter `Γ`. Peaks at the origin with value `energy(x)`.
pub fn twisted_acf(x: &ComplexGrid, pc: PhaseCoupling) -> ComplexGrid {
    twisted_conv(x, &matched_filter_gamma(x, pc), pc)
}

/// Closed-form magnitude of a `w`-term windowed autocorrelation of a
/// unit-modulus ZC sequence (length `n`, root `r`) at lag `u`:
/// `|sin(π·w·q/n)| / sin(π·q/n)` with `q = (-r·u) mod n`, and `w` when `q = 0`.
pub fn zc_acf_closed_form(u: i64, w: usize, n: usize, r: i64) -> f64 {
    let q = (-(r as i128) * u as i128).rem_euclid(n as i128) as f64;
    if q == 0.0 {
        return w as f64;
    }
    let nf = n as f64;
    (PI * w as f64 * q / nf).sin().abs() / (PI * q / nf).sin()
}
