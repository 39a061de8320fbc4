//! Brute-force reference implementations, written straight from the defining
//! sums with hash maps and no index arithmetic shared with the library.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use tfpilot::prelude::*;

pub type Sparse = HashMap<(i64, i64), Complex64>;

pub fn to_sparse(g: &ComplexGrid) -> Sparse {
    g.iter().map(|(i, v)| ((i.row, i.col), v)).collect()
}

fn cis(x: f64) -> Complex64 {
    Complex64::new(x.cos(), x.sin())
}

/// `z[m, n] = Σ x[l, k]·y[m - l, n - k]·e^{j2πα(m - l)k}`.
pub fn twisted(x: &Sparse, y: &Sparse, alpha: f64) -> Sparse {
    let mut z = Sparse::new();
    for (&(l, k), &xv) in x {
        for (&(a, b), &yv) in y {
            let (m, n) = (l + a, k + b);
            *z.entry((m, n)).or_default() += xv * yv * cis(2.0 * PI * alpha * (a * k) as f64);
        }
    }
    z
}

/// `Γ[l, k] = X*[-l, -k]·e^{j2παlk}`.
pub fn gamma(x: &Sparse, alpha: f64) -> Sparse {
    x.iter().map(|(&(r, c), &v)| ((-r, -c), v.conj() * cis(2.0 * PI * alpha * (r * c) as f64))).collect()
}

pub fn filter(y: &Sparse, x: &Sparse, alpha: f64) -> Sparse {
    twisted(y, &gamma(x, alpha), alpha)
}

/// Largest elementwise difference between a dense grid and a sparse map.
pub fn max_diff(g: &ComplexGrid, s: &Sparse) -> f64 {
    let mut worst = 0.0f64;
    for (&(r, c), &v) in s {
        worst = worst.max((g.get(r, c) - v).norm());
    }
    for (i, v) in g.iter() {
        if !s.contains_key(&(i.row, i.col)) {
            worst = worst.max(v.norm());
        }
    }
    worst
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Dense random grid with `rows x cols` cells anchored at a random offset.
pub fn random_grid<R: Rng>(rng: &mut R, max_rows: usize, max_cols: usize, spacing: Spacing) -> ComplexGrid {
    let rows = rng.random_range(1..=max_rows);
    let cols = rng.random_range(1..=max_cols);
    let r0 = rng.random_range(-4..=4);
    let c0 = rng.random_range(-4..=4);
    let rs = Span::new(r0, r0 + rows as i64 - 1).unwrap();
    let cs = Span::new(c0, c0 + cols as i64 - 1).unwrap();
    ComplexGrid::from_fn(rs, cs, spacing, |_, _| random_complex(rng))
}

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// A random valid root for a ZC sequence of length `len`.
pub fn random_root<R: Rng>(rng: &mut R, len: usize) -> i64 {
    loop {
        let r = rng.random_range(1..=(3 * len as i64).max(2));
        if gcd(r, len as i64) == 1 {
            return r;
        }
    }
}

/// `M` distinct random roots coprime to `n`.
pub fn random_roots<R: Rng>(rng: &mut R, m: usize, n: usize) -> Vec<i64> {
    let mut roots = Vec::new();
    while roots.len() < m {
        let r = rng.random_range(1..=(4 * m * n) as i64);
        if gcd(r, n as i64) == 1 && !roots.contains(&r) {
            roots.push(r);
        }
    }
    roots
}

/// Unit-modulus ZC sample straight from the definition (no modular reduction).
pub fn zc_unit(r: i64, n: i64, len: i64) -> Complex64 {
    cis(-PI * (r * n * (n + 1)) as f64 / len as f64)
}

/// `|Σ_{n = n0}^{n0 + w - 1} s[n]·s*[n + u]|` for the unit-modulus sequence.
pub fn windowed_acf(r: i64, len: i64, u: i64, n0: i64, w: i64) -> f64 {
    (n0..n0 + w).map(|n| zc_unit(r, n, len) * zc_unit(r, n + u, len).conj()).sum::<Complex64>().norm()
}
