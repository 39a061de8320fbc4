//! Twisted matched filtering and line-of-sight peak search.
//!
//! With the filter `Γ[l, k] = X*[-l, -k]·exp(j2π·α·l·k)`, the output
//! `Q = Y *σ Γ` of a noiseless received grid `Y = H *σ X` reproduces every
//! channel tap at its own index plus an interference term that depends on
//! the pilot's twisted autocorrelation:
//!
//! ```text
//! Q[l, k] = H[l, k] + I[l, k]
//! ```
//!
//! The peak of `|Q|` over the physical search region gives the delay and
//! Doppler estimate.
//!
//! [`appendix_oracle_q`], [`interference_sep`] and [`interference_stack`]
//! evaluate the fully expanded sums directly; they are slow references used to
//! validate the fast path, not estimators.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::sigops::{twisted_conv, PhaseCoupling};
use crate::tfgrid::{ComplexGrid, GridIndex, Span, Spacing};
use crate::zcseq::zc_phase;
use crate::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Γ[l, k] = X*[-l, -k]·exp(j2π·α·l·k)` on the negated support of `X`.
pub fn matched_filter_gamma(x: &ComplexGrid, pc: PhaseCoupling) -> ComplexGrid {
    ComplexGrid::from_fn(x.rows().neg(), x.cols().neg(), x.spacing(), |l, k| {
        x.get(-l, -k).conj() * pc.phase(l * k)
    })
}

/// `Q = Y *σ Γ` over its full support, operands in that order.
pub fn filter_output(y: &ComplexGrid, x: &ComplexGrid, pc: PhaseCoupling) -> ComplexGrid {
    twisted_conv(y, &matched_filter_gamma(x, pc), pc)
}

/// `Q` restricted to `rows × cols`.
///
/// Expanding the twisted convolution with `Γ` gives
/// `Q[l, k] = Σ_{a,b} Y[l + a, k + b]·X*[a, b]·exp(-j2π·α·a·k)`, which costs
/// `|region|·|X|` instead of `|Y|·|X|`.
pub fn filter_output_region(y: &ComplexGrid, x: &ComplexGrid, pc: PhaseCoupling, rows: Span, cols: Span) -> ComplexGrid {
    let taps: Vec<(GridIndex, Complex64)> = x.support().map(|(i, v)| (i, v.conj())).collect();
    let mut phase = vec![ZERO; x.rows().len()];
    let xr0 = x.rows().lo();
    let mut q = ComplexGrid::zeros(rows, cols, y.spacing());
    for k in cols.iter() {
        for (slot, a) in phase.iter_mut().zip(x.rows().iter()) {
            *slot = pc.phase(-a * k);
        }
        for l in rows.iter() {
            let mut acc = ZERO;
            for (idx, xc) in &taps {
                let yv = y.get(l + idx.row, k + idx.col);
                if yv != ZERO {
                    acc += yv * xc * phase[(idx.row - xr0) as usize];
                }
            }
            *q.get_mut(l, k).expect("in range") = acc;
        }
    }
    q
}

/// Direct evaluation of the fully expanded filter output
///
/// ```text
/// Q[l,k] = Σ_{m″,n″} H[m″,n″]·e^{j2πα(lk − m″n″)} Σ_{m′} e^{j2πα·m′(n″ − k)} Σ_{n′} X[m′−m″, n′−n″]·X*[m′−l, n′−k]
/// ```
///
/// over the support `supp H + supp X − supp X`. Deliberately naive.
pub fn appendix_oracle_q(h: &ComplexGrid, x: &ComplexGrid, pc: PhaseCoupling) -> ComplexGrid {
    let rows = h.rows().sum(&x.rows()).sum(&x.rows().neg());
    let cols = h.cols().sum(&x.cols()).sum(&x.cols().neg());
    let (xr, xc) = (x.rows(), x.cols());
    let cis = |p: f64| Complex64::cis(2.0 * PI * pc.alpha() * p);
    ComplexGrid::from_fn(rows, cols, h.spacing(), |l, k| {
        let mut total = ZERO;
        for (tap, hv) in h.support() {
            let (m2, n2) = (tap.row, tap.col);
            let mut over_m = ZERO;
            for m1 in (m2 + xr.lo()).max(l + xr.lo())..=(m2 + xr.hi()).min(l + xr.hi()) {
                let mut over_n = ZERO;
                for n1 in (n2 + xc.lo()).max(k + xc.lo())..=(n2 + xc.hi()).min(k + xc.hi()) {
                    over_n += x.get(m1 - m2, n1 - n2) * x.get(m1 - l, n1 - k).conj();
                }
                over_m += cis((m1 * (n2 - k)) as f64) * over_n;
            }
            total += hv * cis((l * k - m2 * n2) as f64) * over_m;
        }
        total
    })
}

fn overlap(a: i64, b: i64, len: usize) -> std::ops::RangeInclusive<i64> {
    a.max(b)..=(a.min(b) + len as i64 - 1)
}

/// The two factors of one separable-pilot interference term for a tap at
/// `(m2, n2)` seen from `(l, k)`: the frequency-axis ambiguity factor (which
/// carries the Doppler-delay phase) and the windowed time-axis ZC
/// autocorrelation. Both are unnormalized sums of unit-modulus terms.
pub fn separable_factors(m: usize, n: usize, r_f: i64, r_t: i64, pc: PhaseCoupling, tap: GridIndex, at: GridIndex) -> (Complex64, Complex64) {
    let (m2, n2, l, k) = (tap.row, tap.col, at.row, at.col);
    let ambiguity = overlap(m2, l, m)
        .map(|m1| pc.phase(m1 * (n2 - k)) * zc_phase(r_f, m1 - m2, m as i64) * zc_phase(r_f, m1 - l, m as i64).conj())
        .sum();
    let acf = overlap(n2, k, n)
        .map(|n1| zc_phase(r_t, n1 - n2, n as i64) * zc_phase(r_t, n1 - k, n as i64).conj())
        .sum();
    (ambiguity, acf)
}

/// Interference at `at` for the unit-energy separable pilot `(m, n, r_f, r_t)`:
/// every tap of `h` except the one at `at`, weighted by the factorized
/// ambiguity and windowed autocorrelation sums.
pub fn interference_sep(h: &ComplexGrid, m: usize, n: usize, r_f: i64, r_t: i64, pc: PhaseCoupling, at: GridIndex) -> Complex64 {
    let (l, k) = (at.row, at.col);
    let scale = 1.0 / (m * n) as f64;
    h.support()
        .filter(|(tap, _)| *tap != at)
        .filter(|(tap, _)| (tap.row - l).unsigned_abs() < m as u64 && (tap.col - k).unsigned_abs() < n as u64)
        .map(|(tap, hv)| {
            let (amb, acf) = separable_factors(m, n, r_f, r_t, pc, tap, at);
            hv * pc.phase(l * k - tap.row * tap.col) * amb * acf * scale
        })
        .sum()
}

/// Approximate interference at `at` for a stacked pilot: every row
/// cross-correlation is replaced by its flat magnitude `1/(M·√N)` (for a
/// unit-energy pilot), leaving only the Doppler-delay phase sums.
///
/// This is a diagnostic; the exact residual is
/// `appendix_oracle_q(h, x, pc) - h`.
pub fn interference_stack(h: &ComplexGrid, m: usize, n: usize, roots: &[i64], pc: PhaseCoupling, at: GridIndex) -> Result<Complex64, Error> {
    if roots.len() != m {
        return Err(Error::InvalidPilot(format!("stacked pilot needs {m} roots, got {}", roots.len())));
    }
    let (l, k) = (at.row, at.col);
    let scale = 1.0 / (m as f64 * (n as f64).sqrt());
    Ok(h
        .support()
        .filter(|(tap, _)| *tap != at)
        .filter(|(tap, _)| (tap.row - l).unsigned_abs() < m as u64 && (tap.col - k).unsigned_abs() < n as u64)
        .map(|(tap, hv)| {
            let rows: Complex64 = overlap(tap.row, l, m).map(|m1| pc.phase(m1 * (tap.col - k))).sum();
            hv * pc.phase(l * k - tap.row * tap.col) * rows * scale
        })
        .sum())
}

/// Doppler rows × delay columns searched for the peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchRegion {
    pub doppler: Span,
    pub delay: Span,
}

impl SearchRegion {
    pub fn new(doppler: Span, delay: Span) -> Self {
        SearchRegion { doppler, delay }
    }

    pub fn contains(&self, idx: GridIndex) -> bool {
        self.doppler.contains(idx.row) && self.delay.contains(idx.col)
    }
}

/// Peak of the matched-filter output and the corresponding physical estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub l_hat: i64,
    pub k_hat: i64,
    /// `l_hat·Δf`, Hz.
    pub nu_hat: f64,
    /// `k_hat·T`, seconds.
    pub tau_hat: f64,
    pub peak_magnitude: f64,
    pub q_grid: Option<ComplexGrid>,
}

impl EstimationResult {
    pub fn index(&self) -> GridIndex {
        GridIndex::new(self.l_hat, self.k_hat)
    }

    /// `l_hat,k_hat,nu_hat_hz,tau_hat_s,peak`.
    pub fn csv_line(&self) -> String {
        use crate::fmt::fmt_sig9;
        format!(
            "{},{},{},{},{}",
            self.l_hat,
            self.k_hat,
            fmt_sig9(self.nu_hat),
            fmt_sig9(self.tau_hat),
            fmt_sig9(self.peak_magnitude)
        )
    }
}

/// `true` when `a` should replace `b` on equal magnitude: smaller delay, then
/// smaller |Doppler|, then smaller Doppler.
fn wins_tie(a: GridIndex, b: GridIndex) -> bool {
    (a.col, a.row.abs(), a.row) < (b.col, b.row.abs(), b.row)
}

/// Peak of `|Q|` over a precomputed output grid.
pub fn peak_of(q: &ComplexGrid) -> (GridIndex, f64) {
    let mut best: Option<(GridIndex, f64)> = None;
    for (idx, v) in q.iter() {
        let p = v.norm_sqr();
        best = match best {
            Some((bi, bp)) if p < bp || (p == bp && !wins_tie(idx, bi)) => Some((bi, bp)),
            _ => Some((idx, p)),
        };
    }
    let (idx, p) = best.expect("grids are never empty");
    (idx, p.sqrt())
}

fn search(y: &ComplexGrid, x: &ComplexGrid, pc: PhaseCoupling, region: SearchRegion) -> Result<ComplexGrid, Error> {
    let q_rows = y.rows().sum(&x.rows().neg());
    let q_cols = y.cols().sum(&x.cols().neg());
    let rows = region.doppler.intersect(&q_rows).ok_or(Error::EmptySearchRegion)?;
    let cols = region.delay.intersect(&q_cols).ok_or(Error::EmptySearchRegion)?;
    Ok(filter_output_region(y, x, pc, rows, cols))
}

/// Argmax of `|Q|` over `region`; bin sizes come from `y`'s spacing.
pub fn estimate_dd(y: &ComplexGrid, x: &ComplexGrid, pc: PhaseCoupling, region: SearchRegion) -> Result<EstimationResult, Error> {
    let q = search(y, x, pc, region)?;
    Ok(result_from(&q, y.spacing()))
}

/// [`estimate_dd`] that also returns the searched part of `Q`.
pub fn estimate_dd_with_q(y: &ComplexGrid, x: &ComplexGrid, pc: PhaseCoupling, region: SearchRegion) -> Result<EstimationResult, Error> {
    let q = search(y, x, pc, region)?;
    let mut est = result_from(&q, y.spacing());
    est.q_grid = Some(q);
    Ok(est)
}

fn result_from(q: &ComplexGrid, sp: Spacing) -> EstimationResult {
    let (idx, peak) = peak_of(q);
    EstimationResult {
        l_hat: idx.row,
        k_hat: idx.col,
        nu_hat: idx.row as f64 * sp.delta_f,
        tau_hat: idx.col as f64 * sp.delta_t,
        peak_magnitude: peak,
        q_grid: None,
    }
}
