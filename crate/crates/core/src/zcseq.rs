//! Zadoff-Chu pilot generation.
//!
//! Three families are produced, all scaled to unit energy:
//!
//! * a 1D sequence `s[n] = exp(-jπ r n(n+1) / L) / √L`,
//! * the *separable* grid, the outer product of a length-`M` frequency
//!   sequence and a length-`N` time sequence,
//! * the *stacked* grid, one length-`N` sequence per subcarrier, each with
//!   its own root (and its transpose).
//!
//! Phases are reduced modulo `2L` in integer arithmetic before the
//! exponential is taken, so long sequences keep full double precision.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::tfgrid::{ComplexGrid, Span, Spacing};
use crate::Error;

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `exp(-jπ r n(n+1) / len)` with the exponent reduced exactly.
#[inline]
pub(crate) fn zc_phase(root: i64, n: i64, len: i64) -> Complex64 {
    let q = (root as i128 * (n as i128) * (n as i128 + 1)).rem_euclid(2 * len as i128) as f64;
    Complex64::from_polar(1.0, -PI * q / len as f64)
}

fn check_zc(len: usize, root: i64, what: &str) -> Result<(), Error> {
    if len.is_multiple_of(2) {
        return Err(Error::InvalidPilot(format!("{what} must be odd (got {len})")));
    }
    if gcd(root, len as i64) != 1 {
        return Err(Error::InvalidPilot(format!("root {root} is not coprime to {what}={len}")));
    }
    Ok(())
}

/// Unit-energy Zadoff-Chu sequence of odd length `len` and root `root`.
pub fn zc_sequence(len: usize, root: i64) -> Result<Vec<Complex64>, Error> {
    check_zc(len, root, "L")?;
    let scale = 1.0 / (len as f64).sqrt();
    Ok((0..len as i64).map(|n| zc_phase(root, n, len as i64) * scale).collect())
}

/// Separable ZC pilot: `M` subcarriers (rows) by `N` time slots (columns).
pub fn separable_zc(m: usize, n: usize, r_f: i64, r_t: i64, spacing: Spacing) -> Result<ComplexGrid, Error> {
    check_zc(m, r_f, "M")?;
    check_zc(n, r_t, "N")?;
    let u = zc_sequence(m, r_f)?;
    let v = zc_sequence(n, r_t)?;
    Ok(ComplexGrid::from_fn(Span::zero_based(m), Span::zero_based(n), spacing, |row, col| {
        u[row as usize] * v[col as usize]
    }))
}

/// Stacked ZC pilot: row `m` carries a length-`N` sequence with root `roots[m]`.
pub fn stacked_zc(m: usize, n: usize, roots: &[i64], spacing: Spacing) -> Result<ComplexGrid, Error> {
    if m == 0 {
        return Err(Error::InvalidPilot("M must be positive".into()));
    }
    if roots.len() != m {
        return Err(Error::InvalidPilot(format!("stacked pilot needs {m} roots, got {}", roots.len())));
    }
    let mut seen = HashSet::new();
    for &r in roots {
        check_zc(n, r, "N")?;
        if !seen.insert(r) {
            return Err(Error::InvalidPilot(format!("duplicate root {r}")));
        }
    }
    let scale = 1.0 / ((m * n) as f64).sqrt();
    Ok(ComplexGrid::from_fn(Span::zero_based(m), Span::zero_based(n), spacing, |row, col| {
        zc_phase(roots[row as usize], col, n as i64) * scale
    }))
}

/// The `m` smallest positive integers coprime to `n`, ascending.
pub fn default_roots(m: usize, n: usize) -> Vec<i64> {
    (1i64..).filter(|&r| gcd(r, n as i64) == 1).take(m).collect()
}

/// Largest odd length `<= samples` that is coprime to `root`.
pub fn default_zc1d_len(samples: usize, root: i64) -> Result<usize, Error> {
    let mut len = if samples.is_multiple_of(2) { samples.saturating_sub(1) } else { samples };
    while len >= 1 {
        if gcd(root, len as i64) == 1 {
            return Ok(len);
        }
        len = len.saturating_sub(2);
    }
    Err(Error::InvalidPilot(format!("no odd length <= {samples} is coprime to root {root}")))
}

/// A pilot family together with its dimensions and roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PilotSpec {
    /// Single-carrier sequence of length `len`, laid out on one row.
    Zc1d { len: usize, root: i64 },
    Separable { m: usize, n: usize, r_f: i64, r_t: i64 },
    Stacked { m: usize, n: usize, roots: Vec<i64> },
    /// Transpose of `Stacked { m, n, roots }`: `n` subcarriers by `m` time slots.
    StackedTransposed { m: usize, n: usize, roots: Vec<i64> },
}

impl PilotSpec {
    pub fn family(&self) -> &'static str {
        match self {
            PilotSpec::Zc1d { .. } => "zc1d",
            PilotSpec::Separable { .. } => "separable",
            PilotSpec::Stacked { .. } => "stacked",
            PilotSpec::StackedTransposed { .. } => "stacked_transposed",
        }
    }

    /// Separable pilot with the default roots `r_f = r_t = 1`.
    pub fn separable(m: usize, n: usize) -> Self {
        PilotSpec::Separable { m, n, r_f: 1, r_t: 1 }
    }

    /// Stacked pilot with [`default_roots`].
    pub fn stacked(m: usize, n: usize) -> Self {
        PilotSpec::Stacked { m, n, roots: default_roots(m, n) }
    }

    /// 1D baseline with the same sample budget as an `m x n` grid.
    pub fn zc1d_matching(m: usize, n: usize, root: i64) -> Result<Self, Error> {
        Ok(PilotSpec::Zc1d { len: default_zc1d_len(m * n, root)?, root })
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.generate(Spacing::default()).map(|_| ())
    }

    /// Number of occupied time-frequency cells.
    pub fn samples(&self) -> usize {
        match self {
            PilotSpec::Zc1d { len, .. } => *len,
            PilotSpec::Separable { m, n, .. } | PilotSpec::Stacked { m, n, .. } | PilotSpec::StackedTransposed { m, n, .. } => {
                m * n
            }
        }
    }

    pub fn generate(&self, spacing: Spacing) -> Result<ComplexGrid, Error> {
        match self {
            PilotSpec::Zc1d { len, root } => {
                let s = zc_sequence(*len, *root)?;
                ComplexGrid::from_vec(Span::zero_based(1), Span::zero_based(*len), spacing, s)
            }
            PilotSpec::Separable { m, n, r_f, r_t } => separable_zc(*m, *n, *r_f, *r_t, spacing),
            PilotSpec::Stacked { m, n, roots } => stacked_zc(*m, *n, roots, spacing),
            PilotSpec::StackedTransposed { m, n, roots } => {
                let swapped = Spacing { delta_f: spacing.delta_t, delta_t: spacing.delta_f };
                Ok(stacked_zc(*m, *n, roots, swapped)?.transpose())
            }
        }
    }
}
