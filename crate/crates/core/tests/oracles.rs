mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfpilot::prelude::*;
use tfpilot::scenario::ScenarioConfig;

use common::*;

fn sp() -> Spacing {
    Spacing::new(10.0, 0.5e-6).unwrap()
}

#[test]
fn filter_output_matches_sparse_brute_force_at_large_alpha() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let alpha = rng.random_range(-0.5..0.5);
        let pc = PhaseCoupling::new(alpha).unwrap();
        let x = random_grid(&mut rng, 5, 5, sp());
        let y = random_grid(&mut rng, 6, 6, sp());
        let q = filter_output(&y, &x, pc);
        assert!(max_diff(&q, &filter(&to_sparse(&y), &to_sparse(&x), alpha)) < 1e-12);
    }
}

#[test]
fn region_filter_agrees_with_full_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let pc = PhaseCoupling::new(rng.random_range(-0.3..0.3)).unwrap();
        let x = separable_zc(5, 3, 2, 1, sp()).unwrap();
        let y = random_grid(&mut rng, 7, 7, sp());
        let full = filter_output(&y, &x, pc);
        let rows = Span::new(-3, 2).unwrap();
        let cols = Span::new(-1, 4).unwrap();
        let part = tfpilot::estimator::filter_output_region(&y, &x, pc, rows, cols);
        for r in rows.iter() {
            for c in cols.iter() {
                assert!((part.get(r, c) - full.get(r, c)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn appendix_oracle_with_large_alpha_and_offset_supports() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..20 {
        let pc = PhaseCoupling::new(rng.random_range(-1.0..1.0)).unwrap();
        let h = random_grid(&mut rng, 4, 4, sp());
        let x = if i % 2 == 0 {
            separable_zc(5, 7, 2, 3, sp()).unwrap()
        } else {
            stacked_zc(4, 5, &[1, 2, 3, 4], sp()).unwrap()
        }
        .translate(GridIndex::new(rng.random_range(-3..3), rng.random_range(-3..3)));
        let q = filter_output(&twisted_conv(&h, &x, pc), &x, pc);
        assert!(q.max_abs_diff(&appendix_oracle_q(&h, &x, pc)) < 1e-9);
    }
}

#[test]
fn separable_interference_is_the_exact_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (m, n, r_f, r_t) = (7usize, 5usize, 3i64, 2i64);
    let x = separable_zc(m, n, r_f, r_t, sp()).unwrap();
    for _ in 0..10 {
        let pc = PhaseCoupling::new(rng.random_range(-0.2..0.2)).unwrap();
        let h = random_grid(&mut rng, 4, 5, sp());
        let q = appendix_oracle_q(&h, &x, pc);
        for (at, _) in q.iter() {
            let expect = q.at(at) - h.at(at);
            let got = interference_sep(&h, m, n, r_f, r_t, pc, at);
            assert!((expect - got).norm() < 1e-9, "at {at:?}");
        }
    }
}

#[test]
fn stacked_interference_vanishes_for_one_tap() {
    let h = ComplexGrid::delta(GridIndex::new(2, 3), sp()).scale(Complex64::new(0.0, 2.0));
    let v = interference_stack(&h, 3, 7, &[1, 2, 3], PhaseCoupling::physical(sp()), GridIndex::new(2, 3)).unwrap();
    assert_eq!(v, Complex64::new(0.0, 0.0));
    assert!(interference_stack(&h, 3, 7, &[1, 2], PhaseCoupling::none(), GridIndex::ORIGIN).is_err());
}

fn brute_linear_xcorr(x: &[Complex64], y: &[Complex64], k: i64) -> Complex64 {
    let get = |s: &[Complex64], i: i64| usize::try_from(i).ok().and_then(|i| s.get(i).copied()).unwrap_or_default();
    let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
    (0..x.len().max(y.len()) as i64).map(|n| get(x, n) * get(y, n + k).conj()).sum::<Complex64>() / (ex * ey).sqrt()
}

#[test]
fn linear_xcorr_and_caf_zero_row() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let x: Vec<Complex64> = (0..9).map(|_| random_complex(&mut rng)).collect();
    let y: Vec<Complex64> = (0..9).map(|_| random_complex(&mut rng)).collect();
    let lin = linear_xcorr(&x, &y);
    let caf = discrete_caf(&x, &y, Span::symmetric(2), 100.0, 1e-4).unwrap();
    for k in lin.lags() {
        let b = brute_linear_xcorr(&x, &y, k);
        assert!((lin.at(k) - b).norm() < 1e-12);
        assert!((caf.get(0, k) - b).norm() < 1e-12);
    }
}

#[test]
fn caf_matches_definition() {
    let s = zc_sequence(11, 3).unwrap();
    let (step, ts) = (250.0, 2e-5);
    let caf = discrete_caf(&s, &s, Span::symmetric(4), step, ts).unwrap();
    for l in -4..=4i64 {
        for k in -10..=10i64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..11i64 {
                if (0..11).contains(&(n + k)) {
                    let ph = -2.0 * PI * (l as f64 * step) * (n as f64 * ts);
                    acc += s[n as usize] * s[(n + k) as usize].conj() * Complex64::new(ph.cos(), ph.sin());
                }
            }
            assert!((caf.get(l, k) - acc).norm() < 1e-12);
        }
    }
}

#[test]
fn zc_ambiguity_has_strong_false_peaks() {
    // With a Doppler step of 1/(L·T) a Doppler shift of r·k bins undoes a delay of k.
    let len = 17;
    let t = 1e-6;
    let s = zc_sequence(len, 1).unwrap();
    let caf = discrete_caf(&s, &s, Span::symmetric(16), 1.0 / (len as f64 * t), t).unwrap();
    assert!((caf.get(0, 0).norm() - 1.0).abs() < 1e-12);
    let strongest_off_origin = caf.iter().filter(|(i, _)| *i != GridIndex::ORIGIN).map(|(_, v)| v.norm()).fold(0.0, f64::max);
    assert!(strongest_off_origin > 0.5);
    // the ridge: |A(k, k)| = (L - |k|)/L for root 1
    for k in 1..8i64 {
        assert!((caf.get(k, k).norm() - (len as f64 - k as f64) / len as f64).abs() < 1e-12);
    }
}

fn max_off_origin(g: &ComplexGrid) -> f64 {
    g.iter().filter(|(i, _)| *i != GridIndex::ORIGIN).map(|(_, v)| v.norm()).fold(0.0, f64::max)
}

#[test]
#[ignore = "fails: stacked rows cross-correlate at about 1/sqrt(N) along the Doppler axis (0.225 vs 0.111)"]
fn stacked_twisted_acf_sidelobes_below_separable() {
    let sp = ScenarioConfig::paper().spacing;
    let pc = PhaseCoupling::physical(sp);
    let sep = twisted_acf(&separable_zc(17, 17, 1, 1, sp).unwrap(), pc);
    let stk = twisted_acf(&stacked_zc(17, 17, &default_roots(17, 17), sp).unwrap(), pc);
    assert!(max_off_origin(&stk) < max_off_origin(&sep), "{} vs {}", max_off_origin(&stk), max_off_origin(&sep));
}

#[test]
fn twisted_acf_sidelobe_structure() {
    let sp = ScenarioConfig::paper().spacing;
    let pc = PhaseCoupling::physical(sp);
    let u = zc_sequence(17, 1).unwrap();
    let acf_1d = linear_xcorr(&u, &u);
    let sep = twisted_acf(&separable_zc(17, 17, 1, 1, sp).unwrap(), pc);
    let roots = default_roots(17, 17);
    let stk = twisted_acf(&stacked_zc(17, 17, &roots, sp).unwrap(), pc);
    assert!((sep.get(0, 0).norm() - 1.0).abs() < 1e-12);
    assert!((stk.get(0, 0).norm() - 1.0).abs() < 1e-12);
    // separable: the delay axis is the 1D aperiodic ZC autocorrelation times a row phase sum
    for k in -16..=16i64 {
        let rows: Complex64 = (0..17).map(|a| pc.phase(-a * k) / 17.0).sum();
        assert!((sep.get(0, k).norm() - acf_1d.at(-k).norm() * rows.norm()).abs() < 1e-9, "lag {k}");
    }
    // stacked: the Doppler axis sums row cross-correlations of distinct roots
    for l in 1..=16i64 {
        let mut b = Complex64::new(0.0, 0.0);
        for m in l..17 {
            let a = zc_sequence(17, roots[m as usize]).unwrap();
            let c = zc_sequence(17, roots[(m - l) as usize]).unwrap();
            b += a.iter().zip(&c).map(|(p, q)| p * q.conj()).sum::<Complex64>();
        }
        assert!((stk.get(l, 0).norm() - b.norm() / 17.0).abs() < 1e-9, "row {l}");
    }
    assert!(max_off_origin(&stk) > 0.2 && max_off_origin(&sep) < 0.12);
}

#[test]
fn separable_linear_acf_peak_is_one() {
    let acf = linear_acf2d(&separable_zc(17, 17, 1, 1, sp()).unwrap());
    assert_eq!(acf.max_abs().0, GridIndex::ORIGIN);
    assert!((acf.get(0, 0) - 1.0).norm() < 1e-12);
}

#[test]
fn linear_acf_matches_brute_force() {
    let x = stacked_zc(3, 5, &[1, 2, 4], sp()).unwrap();
    let acf = linear_acf2d(&x);
    let sx = to_sparse(&x);
    for (idx, v) in acf.iter() {
        let mut b = Complex64::new(0.0, 0.0);
        for (&(a, c), &xv) in &sx {
            if let Some(w) = sx.get(&(a - idx.row, c - idx.col)) {
                b += xv * w.conj();
            }
        }
        assert!((v - b).norm() < 1e-12);
    }
}

#[test]
fn channel_statistics() {
    // Unnormalized NLoS power per cell is e^{-βkT}, switched on at the snapped line-of-sight column.
    let spacing = Spacing::new(40.0, 1e-6).unwrap();
    let cfg = DDChannelConfig {
        delay_bins: 12,
        doppler_bins: 2,
        doppler_layout: DopplerLayout::Signed,
        spacing,
        tau_los: 3.4e-6,
        nu_los: -41.0,
        kappa: 0.0,
        beta: 1.5e5,
        normalize_nlos: false,
        unit_los: false,
        alpha: PhaseCoupling::physical(spacing),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let trials = 4000;
    let mut power = [0.0f64; 12];
    for _ in 0..trials {
        let h = sample_channel(&cfg, &mut rng).unwrap();
        assert_eq!(h.los_index, GridIndex::new(-1, 3));
        for (idx, v) in h.grid.iter() {
            if idx.col < 3 {
                assert_eq!(v, Complex64::new(0.0, 0.0));
            }
            if idx.row == 0 {
                power[idx.col as usize] += v.norm_sqr() / trials as f64;
            }
        }
    }
    for (k, &got) in power.iter().enumerate().skip(3) {
        let expect = (-1.5e5 * k as f64 * 1e-6).exp();
        assert!((got - expect).abs() < 0.1 * expect, "col {k}: {got} vs {expect}");
    }
}

#[test]
fn noise_variance_is_empirically_right() {
    let x = separable_zc(7, 5, 1, 1, sp()).unwrap();
    for (reference, expect) in [(SnrReference::PilotEnergy, 1.0 / 10f64.powf(0.5)), (SnrReference::PerSample, 1.0 / 35.0 / 10f64.powf(0.5))] {
        let noise = NoiseModel::new(5.0, reference);
        assert!((noise.variance(&x) - expect).abs() < 1e-12);
        let mut y = ComplexGrid::zeros(Span::zero_based(100), Span::zero_based(100), sp());
        tfpilot::channel::add_noise(&mut y, expect, &mut ChaCha8Rng::seed_from_u64(17));
        let emp = y.energy() / 10_000.0;
        assert!((emp - expect).abs() < 0.05 * expect);
    }
}
