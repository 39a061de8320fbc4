//! Complex sample grids over signed index ranges.
//!
//! A [`ComplexGrid`] stores a dense block of complex samples whose rows and
//! columns are addressed by signed integers. Rows run along the Doppler /
//! frequency axis (`l` or `m`), columns along the delay / time axis (`k` or
//! `n`). Reads outside the declared ranges return exactly zero, so the
//! convolution routines can probe freely beyond a grid's support.
//!
//! The same container holds pilots, channels, received signals and matched
//! filter outputs.

use std::fmt;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::fmt::{fmt_sig9, parse_complex, write_complex};
use crate::Error;

/// Inclusive signed interval `[lo, hi]`, never empty.
#[allow(clippy::len_without_is_empty)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    lo: i64,
    hi: i64,
}

impl Span {
    pub fn new(lo: i64, hi: i64) -> Result<Self, Error> {
        if lo > hi {
            return Err(Error::InvalidGrid(format!("empty index range [{lo},{hi}]")));
        }
        Ok(Span { lo, hi })
    }

    /// `[0, len - 1]`. Panics when `len == 0`.
    pub fn zero_based(len: usize) -> Self {
        assert!(len > 0, "span length must be positive");
        Span { lo: 0, hi: len as i64 - 1 }
    }

    /// `[-half, half]`.
    pub fn symmetric(half: i64) -> Self {
        let half = half.abs();
        Span { lo: -half, hi: half }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn shift(&self, by: i64) -> Self {
        Span { lo: self.lo + by, hi: self.hi + by }
    }

    pub fn neg(&self) -> Self {
        Span { lo: -self.hi, hi: -self.lo }
    }

    /// Minkowski sum `{a + b}`.
    pub fn sum(&self, other: &Span) -> Self {
        Span { lo: self.lo + other.lo, hi: self.hi + other.hi }
    }

    pub fn intersect(&self, other: &Span) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Span { lo, hi })
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// A (row, col) position: `(l, k)` on a channel grid, `(m, n)` on a pilot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GridIndex {
    pub row: i64,
    pub col: i64,
}

impl GridIndex {
    pub const ORIGIN: GridIndex = GridIndex { row: 0, col: 0 };

    pub fn new(row: i64, col: i64) -> Self {
        GridIndex { row, col }
    }
}

impl std::ops::Neg for GridIndex {
    type Output = GridIndex;

    fn neg(self) -> GridIndex {
        GridIndex::new(-self.row, -self.col)
    }
}

/// Physical bin sizes: `delta_f` Hz per row step, `delta_t` seconds per column step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacing {
    pub delta_f: f64,
    pub delta_t: f64,
}

impl Spacing {
    pub fn new(delta_f: f64, delta_t: f64) -> Result<Self, Error> {
        if !(delta_f > 0.0 && delta_f.is_finite()) || !(delta_t > 0.0 && delta_t.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "bin sizes must be positive and finite (delta_f={delta_f}, delta_t={delta_t})"
            )));
        }
        Ok(Spacing { delta_f, delta_t })
    }

    /// The Doppler-delay phase product `delta_f * delta_t`.
    pub fn product(&self) -> f64 {
        self.delta_f * self.delta_t
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Spacing { delta_f: 1.0, delta_t: 1.0 }
    }
}

/// Dense complex grid with signed row/column ranges and zero extension.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    rows: Span,
    cols: Span,
    spacing: Spacing,
    data: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn zeros(rows: Span, cols: Span, spacing: Spacing) -> Self {
        ComplexGrid { rows, cols, spacing, data: vec![Complex64::new(0.0, 0.0); rows.len() * cols.len()] }
    }

    pub fn from_fn(rows: Span, cols: Span, spacing: Spacing, mut f: impl FnMut(i64, i64) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for r in rows.iter() {
            for c in cols.iter() {
                data.push(f(r, c));
            }
        }
        ComplexGrid { rows, cols, spacing, data }
    }

    /// Row-major samples; `data.len()` must match the ranges.
    pub fn from_vec(rows: Span, cols: Span, spacing: Spacing, data: Vec<Complex64>) -> Result<Self, Error> {
        if data.len() != rows.len() * cols.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {}x{} samples, got {}",
                rows.len(),
                cols.len(),
                data.len()
            )));
        }
        Ok(ComplexGrid { rows, cols, spacing, data })
    }

    /// Unit impulse at `at`, on a 1x1 support.
    pub fn delta(at: GridIndex, spacing: Spacing) -> Self {
        let rows = Span { lo: at.row, hi: at.row };
        let cols = Span { lo: at.col, hi: at.col };
        ComplexGrid { rows, cols, spacing, data: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn rows(&self) -> Span {
        self.rows
    }

    pub fn cols(&self) -> Span {
        self.cols
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn with_spacing(mut self, spacing: Spacing) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn contains(&self, at: GridIndex) -> bool {
        self.rows.contains(at.row) && self.cols.contains(at.col)
    }

    #[inline]
    fn offset(&self, row: i64, col: i64) -> usize {
        (row - self.rows.lo) as usize * self.cols.len() + (col - self.cols.lo) as usize
    }

    /// Sample at `(row, col)`; zero outside the declared ranges.
    #[inline]
    pub fn get(&self, row: i64, col: i64) -> Complex64 {
        if self.rows.contains(row) && self.cols.contains(col) {
            self.data[self.offset(row, col)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn at(&self, idx: GridIndex) -> Complex64 {
        self.get(idx.row, idx.col)
    }

    pub fn get_mut(&mut self, row: i64, col: i64) -> Option<&mut Complex64> {
        if self.rows.contains(row) && self.cols.contains(col) {
            let o = self.offset(row, col);
            Some(&mut self.data[o])
        } else {
            None
        }
    }

    /// Row-major view of the stored samples.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// One row of samples (columns in ascending order), or `None` outside the row range.
    pub fn row_slice(&self, row: i64) -> Option<&[Complex64]> {
        if !self.rows.contains(row) {
            return None;
        }
        let start = self.offset(row, self.cols.lo);
        Some(&self.data[start..start + self.cols.len()])
    }

    /// `(index, value)` pairs in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (GridIndex, Complex64)> + '_ {
        let ncols = self.cols.len();
        self.data.iter().enumerate().map(move |(i, v)| {
            let row = self.rows.lo + (i / ncols) as i64;
            let col = self.cols.lo + (i % ncols) as i64;
            (GridIndex { row, col }, *v)
        })
    }

    /// Nonzero samples only.
    pub fn support(&self) -> impl Iterator<Item = (GridIndex, Complex64)> + '_ {
        self.iter().filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
    }

    /// Sum of squared magnitudes over the declared support.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Same samples, ranges moved by `shift`.
    pub fn translate(&self, shift: GridIndex) -> Self {
        ComplexGrid {
            rows: self.rows.shift(shift.row),
            cols: self.cols.shift(shift.col),
            spacing: self.spacing,
            data: self.data.clone(),
        }
    }

    pub fn scale(&self, by: Complex64) -> Self {
        self.map(|v| v * by)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        ComplexGrid {
            rows: self.rows,
            cols: self.cols,
            spacing: self.spacing,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Rescaled copy with unit energy. Returns `None` for an all-zero grid.
    pub fn normalize_energy(&self) -> Option<Self> {
        let e = self.energy();
        (e > 0.0).then(|| self.scale(Complex64::new(1.0 / e.sqrt(), 0.0)))
    }

    /// Swap the row and column axes (and the bin sizes with them).
    pub fn transpose(&self) -> Self {
        let spacing = Spacing { delta_f: self.spacing.delta_t, delta_t: self.spacing.delta_f };
        ComplexGrid::from_fn(self.cols, self.rows, spacing, |r, c| self.get(c, r))
    }

    /// `g[-row, -col]`, conjugated.
    pub fn flip_conj(&self) -> Self {
        ComplexGrid::from_fn(self.rows.neg(), self.cols.neg(), self.spacing, |r, c| self.get(-r, -c).conj())
    }

    /// Largest magnitude and the index holding it (first in row-major order on ties).
    pub fn max_abs(&self) -> (GridIndex, f64) {
        let mut best = (GridIndex::new(self.rows.lo, self.cols.lo), f64::NEG_INFINITY);
        for (idx, v) in self.iter() {
            let a = v.norm();
            if a > best.1 {
                best = (idx, a);
            }
        }
        best
    }

    /// Largest elementwise magnitude difference over the union of both supports.
    pub fn max_abs_diff(&self, other: &ComplexGrid) -> f64 {
        let rows = Span { lo: self.rows.lo.min(other.rows.lo), hi: self.rows.hi.max(other.rows.hi) };
        let cols = Span { lo: self.cols.lo.min(other.cols.lo), hi: self.cols.hi.max(other.cols.hi) };
        let mut worst = 0.0f64;
        for r in rows.iter() {
            for c in cols.iter() {
                worst = worst.max((self.get(r, c) - other.get(r, c)).norm());
            }
        }
        worst
    }

    /// Writes the plain-text dump: a header line, then one line per row with
    /// comma-separated `re+imj` values.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# rows=[{},{}] cols=[{},{}] delta_f={} delta_t={}",
            self.rows.lo,
            self.rows.hi,
            self.cols.lo,
            self.cols.hi,
            fmt_sig9(self.spacing.delta_f),
            fmt_sig9(self.spacing.delta_t)
        )?;
        let mut line = String::new();
        for r in self.rows.iter() {
            line.clear();
            for (i, v) in self.row_slice(r).unwrap().iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                write_complex(&mut line, *v);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_dump_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }

    /// Parses the format written by [`write_dump`](Self::write_dump).
    pub fn read_dump<R: BufRead>(r: R) -> Result<Self, Error> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid dump".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let (rows, cols, spacing) = parse_header(&header)?;
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        let mut nrows = 0usize;
        for line in lines {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let before = data.len();
            for tok in line.split(',') {
                data.push(parse_complex(tok.trim())?);
            }
            if data.len() - before != cols.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} values, expected {}",
                    nrows,
                    data.len() - before,
                    cols.len()
                )));
            }
            nrows += 1;
        }
        if nrows != rows.len() {
            return Err(Error::Parse(format!("found {nrows} rows, header declares {}", rows.len())));
        }
        ComplexGrid::from_vec(rows, cols, spacing, data)
    }

    pub fn from_dump_str(s: &str) -> Result<Self, Error> {
        Self::read_dump(s.as_bytes())
    }
}

fn parse_header(header: &str) -> Result<(Span, Span, Spacing), Error> {
    let body = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("missing '#' header: {header:?}")))?;
    let mut rows = None;
    let mut cols = None;
    let mut delta_f = None;
    let mut delta_t = None;
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header field {field:?}")))?;
        match key {
            "rows" => rows = Some(parse_span(value)?),
            "cols" => cols = Some(parse_span(value)?),
            "delta_f" => delta_f = Some(parse_f64(value)?),
            "delta_t" => delta_t = Some(parse_f64(value)?),
            other => return Err(Error::Parse(format!("unknown header field {other:?}"))),
        }
    }
    let missing = |name: &str| Error::Parse(format!("header is missing {name}"));
    let spacing = Spacing::new(delta_f.ok_or_else(|| missing("delta_f"))?, delta_t.ok_or_else(|| missing("delta_t"))?)?;
    Ok((rows.ok_or_else(|| missing("rows"))?, cols.ok_or_else(|| missing("cols"))?, spacing))
}

fn parse_span(s: &str) -> Result<Span, Error> {
    let inner = s
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("malformed range {s:?}")))?;
    let (lo, hi) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("malformed range {s:?}")))?;
    let p = |t: &str| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("bad index {t:?}: {e}")));
    Span::new(p(lo)?, p(hi)?)
}

fn parse_f64(s: &str) -> Result<f64, Error> {
    s.parse::<f64>().map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_grid_has_zero_energy() {
        let g = ComplexGrid::zeros(Span::zero_based(3), Span::zero_based(3), Spacing::default());
        assert_eq!(g.energy(), 0.0);
    }

    #[test]
    fn single_entry_energy() {
        let g = ComplexGrid::delta(GridIndex::new(4, -2), Spacing::default());
        assert_eq!(g.energy(), 1.0);
    }

    #[test]
    fn reads_outside_are_zero() {
        let g = ComplexGrid::from_fn(Span::new(-1, 1).unwrap(), Span::new(2, 3).unwrap(), Spacing::default(), |r, k| {
            c(r as f64, k as f64)
        });
        assert_eq!(g.get(-1, 2), c(-1.0, 2.0));
        assert_eq!(g.get(-2, 2), c(0.0, 0.0));
        assert_eq!(g.get(0, 4), c(0.0, 0.0));
        assert_eq!(g.get(i64::MIN, i64::MAX), c(0.0, 0.0));
    }

    #[test]
    fn translate_moves_delta() {
        let d = ComplexGrid::delta(GridIndex::ORIGIN, Spacing::default());
        assert_eq!(d.translate(GridIndex::ORIGIN), d);
        let moved = d.translate(GridIndex::new(2, 3));
        assert_eq!(moved.get(2, 3), c(1.0, 0.0));
        assert_eq!(moved.get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_metadata() {
        assert!(Span::new(2, 1).is_err());
        assert!(Spacing::new(0.0, 1.0).is_err());
        assert!(Spacing::new(1.0, -1.0).is_err());
        assert!(ComplexGrid::from_vec(Span::zero_based(2), Span::zero_based(2), Spacing::default(), vec![c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn dump_header_and_parse() {
        let sp = Spacing::new(10.0, 5e-7).unwrap();
        let g = ComplexGrid::from_fn(Span::new(-1, 0).unwrap(), Span::new(0, 2).unwrap(), sp, |r, k| {
            c(0.25 * r as f64, -1.5e-3 * k as f64)
        });
        let text = g.to_dump_string();
        assert!(text.starts_with("# rows=[-1,0] cols=[0,2] delta_f=10 delta_t=5e-07\n"), "{text}");
        assert_eq!(text.lines().count(), 3);
        let back = ComplexGrid::from_dump_str(&text).unwrap();
        assert_eq!(back.rows(), g.rows());
        assert_eq!(back.cols(), g.cols());
        assert!(back.max_abs_diff(&g) < 1e-12);
    }

    #[test]
    fn dump_parse_errors() {
        assert!(ComplexGrid::from_dump_str("").is_err());
        assert!(ComplexGrid::from_dump_str("# rows=[0,0] cols=[0,1] delta_f=1 delta_t=1\n1+0j\n").is_err());
        assert!(ComplexGrid::from_dump_str("# rows=[0,0] cols=[0,0] delta_f=1 delta_t=1 extra=3\n1+0j\n").is_err());
        assert!(ComplexGrid::from_dump_str("# rows=[0,1] cols=[0,0] delta_f=1 delta_t=1\n1+0j\n").is_err());
    }
}
