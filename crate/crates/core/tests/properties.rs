use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parabolic_core::compatibility::{
    build_traces, compatibility_residuals, exceptional_set_for_orders, is_exceptional, trace_orders,
};
use parabolic_core::interpolation::{interpolate_diag, psi_eval, InterpolationParam};
use parabolic_core::parabolicity::{
    check_condition_i, interior_grid, lopatinskii_margin, split_roots_zeta, BoundarySample, GridConfig,
};
use parabolic_core::poly::{MultiPoly, Poly};
use parabolic_core::spectral::{aniso_norm, aniso_radius, embedding_constants, SpectralField};
use parabolic_core::symbols::{Domain, ProblemSpec};
use parabolic_core::verifier::{apply_lambda_poly, apply_lambda_spectral, boundary_operator_poly, sweep_periods};
use parabolic_core::weights::{karamata_check, RegularityIndex, SlowlyVaryingFn};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn slab() -> Domain {
    Domain::Slab {
        lengths: vec![1.0, 1.0],
    }
}

/// 2×2 system on a 2-d slab with the given principal coefficients
/// `[a11, a12, a21, a22]` multiplying `D₁² + D₂²`, plus fixed lower-order and
/// boundary terms.
fn system(principal: [f64; 4], orders: Vec<u32>) -> ProblemSpec {
    let mut spec = ProblemSpec::new(2, 2, 1.0, orders.clone(), slab()).unwrap();
    let k = |v: f64| MultiPoly::constant(2, c(v));
    for (i, &v) in principal.iter().enumerate() {
        let (j, l) = (i / 2, i % 2);
        if v != 0.0 {
            spec.add_a(j, l, &[2, 0], k(v)).unwrap();
            spec.add_a(j, l, &[0, 2], k(v)).unwrap();
        }
    }
    spec.add_a(0, 1, &[0, 0], k(2.0)).unwrap();
    spec.add_a(1, 0, &[1, 0], k(-1.0)).unwrap();
    for (j, &l) in orders.iter().enumerate() {
        spec.add_b(j, j, if l == 1 { &[1, 0] } else { &[0, 0] }, k(1.0))
            .unwrap();
    }
    spec.add_b(0, 1, &[0, 0], k(0.5)).unwrap();
    spec
}

fn random_field(seed: u64, grid: &[usize], periods: &[f64], has_time: bool) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = grid.iter().product();
    let coeffs = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let space = grid.len() - has_time as usize;
    SpectralField::from_coeffs(space, has_time, grid, periods, coeffs).unwrap()
}

fn random_poly(seed: u64, degree: u32) -> MultiPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = MultiPoly::zero(2);
    for a in 0..=degree {
        for b in 0..=degree - a {
            for t in 0..=degree - a - b {
                let v: i32 = rng.random_range(-3..=3);
                if v != 0 {
                    p.add_term(&[a, b], t, c(v as f64));
                }
            }
        }
    }
    p
}

fn max_entry_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn entries(m: &impl std::ops::Index<(usize, usize), Output = Complex64>, n: usize) -> Vec<Complex64> {
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|ij| m[ij])
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn principal_symbol_is_homogeneous(
        a in prop::array::uniform4(-2.0f64..2.0),
        xi in prop::array::uniform2(-1.0f64..1.0),
        p in (-1.0f64..1.0, -1.0f64..1.0),
        lambda in 0.2f64..5.0,
    ) {
        let spec = system(a, vec![0, 0]);
        let p = Complex64::new(p.0, p.1);
        let base = spec.principal_symbol_a(&[0.3, 0.4], 0.2, &xi, p).unwrap();
        let scaled = spec
            .principal_symbol_a(&[0.3, 0.4], 0.2, &[lambda * xi[0], lambda * xi[1]], p * lambda * lambda)
            .unwrap();
        let expect: Vec<Complex64> = entries(&base, 2).iter().map(|z| z * lambda * lambda).collect();
        prop_assert!(max_entry_diff(&entries(&scaled, 2), &expect) <= 1e-12 * (1.0 + lambda * lambda) * 10.0);
    }

    #[test]
    fn determinant_in_p_matches_matrix_determinant(
        a in prop::array::uniform4(-2.0f64..2.0),
        xi in prop::array::uniform2(-1.0f64..1.0),
        p in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let spec = system(a, vec![0, 0]);
        let p = Complex64::new(p.0, p.1);
        let det = spec.det_poly_in_p(&[0.5, 0.5], 0.0, &xi).unwrap().eval(p);
        let direct = spec.principal_symbol_a(&[0.5, 0.5], 0.0, &xi, p).unwrap().determinant();
        prop_assert!((det - direct).norm() <= 1e-10 * (1.0 + direct.norm()));
    }

    #[test]
    fn adjugate_identity(
        a in prop::array::uniform4(-2.0f64..2.0),
        xi in -1.0f64..1.0,
        p in (0.0f64..1.0, -1.0f64..1.0),
        z in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let spec = system(a, vec![0, 1]);
        let (x, nu) = ([0.0, 0.5], [1.0, 0.0]);
        let p = Complex64::new(p.0, p.1);
        let z = Complex64::new(z.0, z.1);
        let am = spec.symbol_a_in_zeta(&x, 0.0, &[0.0, xi], &nu, p).unwrap().eval(z);
        let adj = spec.adjugate_symbol(&x, 0.0, &[0.0, xi], &nu, p).unwrap().eval(z);
        let det = spec.det_poly_in_zeta(&x, 0.0, &[0.0, xi], &nu, p).unwrap().poly.eval(z);
        let prod = &am * &adj;
        let scale = 1.0 + am.norm() * adj.norm();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { det } else { Complex64::new(0.0, 0.0) };
                prop_assert!((prod[(i, j)] - expect).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn lopatinskii_margin_scales_with_boundary_operator(
        scale in 0.1f64..10.0,
        xi in -0.9f64..0.9,
        angle in -1.2f64..1.2,
    ) {
        let base = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab()).unwrap();
        let mut scaled = ProblemSpec::new(2, 2, 1.0, vec![0, 0], slab()).unwrap();
        for ((j, k, alpha), v) in base.a_terms() {
            scaled.add_a(*j, *k, alpha, v.clone()).unwrap();
        }
        for ((j, k, alpha), v) in base.b_terms() {
            scaled.add_b(*j, *k, alpha, v.scale(c(scale))).unwrap();
        }
        let rho = 1.0 - xi * xi;
        let sample = BoundarySample {
            x: vec![0.0, 0.5],
            t: 0.0,
            xi: vec![0.0, xi],
            nu: vec![1.0, 0.0],
            p: Complex64::from_polar(rho, angle),
        };
        let m0 = lopatinskii_margin(&base, &sample, 1e-8).unwrap();
        let m1 = lopatinskii_margin(&scaled, &sample, 1e-8).unwrap();
        prop_assert!(m0 > 0.0);
        prop_assert!((m1 - scale * m0).abs() <= 1e-9 * scale * m0);
    }

    #[test]
    fn delta_scales_with_principal_part(kappa in 0.05f64..20.0) {
        let spec = system([kappa, 0.0, 0.0, 2.0 * kappa], vec![0, 0]);
        let grid = GridConfig::default();
        let rep = check_condition_i(&spec, &interior_grid(&spec, &grid)).unwrap();
        prop_assert!((rep.delta_estimate - kappa).abs() <= 1e-12 * kappa);
    }

    #[test]
    fn division_identity(
        num in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..9),
        den in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..5),
        lead in 0.5f64..3.0,
    ) {
        let p = Poly::new(num.iter().map(|&(a, b)| Complex64::new(a, b)).collect());
        let mut dc: Vec<Complex64> = den.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        dc.push(c(lead));
        let d = Poly::new(dc);
        let (q, r) = p.div_rem(&d).unwrap();
        let back = &(&q * &d) + &r;
        let n = back.coeffs().len().max(p.coeffs().len());
        for k in 0..n {
            prop_assert!((back.coeff(k) - p.coeff(k)).norm() <= 1e-9 * (1.0 + p.max_abs()));
        }
        prop_assert!(r.degree().is_none_or(|dr| dr < d.degree().unwrap()));
    }

    #[test]
    fn root_split_matches_argument_principle(
        pairs in prop::collection::vec(((-2.0f64..2.0, 0.2f64..2.0), (-2.0f64..2.0, 0.2f64..2.0)), 1..4),
    ) {
        // proper ellipticity: as many roots above the axis as below
        let roots: Vec<Complex64> = pairs
            .iter()
            .flat_map(|&((a, b), (c, d))| [Complex64::new(a, b), Complex64::new(c, -d)])
            .collect();
        let p = Poly::from_roots(&roots);
        let split = split_roots_zeta(&p, 1e-8).unwrap();
        // winding number of p around the upper half disc of radius 10
        let (radius, steps) = (10.0, 20_000);
        let mut contour: Vec<Complex64> = (0..=steps)
            .map(|i| c(-radius + 2.0 * radius * i as f64 / steps as f64))
            .collect();
        contour.extend((1..=steps).map(|i| Complex64::from_polar(radius, std::f64::consts::PI * i as f64 / steps as f64)));
        let mut turn = 0.0;
        for w in contour.windows(2) {
            turn += (p.eval(w[1]) / p.eval(w[0])).arg();
        }
        let winding = (turn / (2.0 * std::f64::consts::PI)).round() as usize;
        prop_assert_eq!(split.zeta_plus.len(), winding);
        prop_assert_eq!(split.m, winding);
        prop_assert_eq!(split.zeta_plus.len() + split.zeta_minus.len(), roots.len());
    }

    #[test]
    fn norm_is_absolutely_homogeneous(seed in any::<u64>(), s in 0.0f64..5.0, k in (-3.0f64..3.0, -3.0f64..3.0)) {
        let f = random_field(seed, &[8, 6, 4], &[1.0, 2.0, 0.5], true);
        let idx = RegularityIndex::new(s, SlowlyVaryingFn::log_multiscale(&[1.0]).unwrap()).unwrap();
        let k = Complex64::new(k.0, k.1);
        let a = aniso_norm(&f.scaled(k), &idx).unwrap();
        let b = k.norm() * aniso_norm(&f, &idx).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn norm_increases_with_order(seed in any::<u64>(), s in 0.0f64..4.0, ds in 0.0f64..2.0) {
        let f = random_field(seed, &[8, 6, 4], &[1.0, 2.0, 0.5], true);
        let lo = aniso_norm(&f, &RegularityIndex::sobolev(s)).unwrap();
        let hi = aniso_norm(&f, &RegularityIndex::sobolev(s + ds)).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-14));
    }

    #[test]
    fn embedding_chain_holds(seed in any::<u64>(), s in 2.5f64..4.0, gap in 0.05f64..1.0, theta in -2.0f64..2.0) {
        let grid = [8usize, 6, 4];
        let periods = [1.0, 2.0, 0.5];
        let f = random_field(seed, &grid, &periods, true);
        let mut r_max = 1.0f64;
        f.for_each_mode(|_, _, xi2, eta| r_max = r_max.max(aniso_radius(xi2, eta)));
        let idx = RegularityIndex::new(s, SlowlyVaryingFn::log_multiscale(&[theta]).unwrap()).unwrap();
        let k = embedding_constants(s - gap, &idx, s + gap, r_max).unwrap();
        let n0 = aniso_norm(&f, &RegularityIndex::sobolev(s - gap)).unwrap();
        let n = aniso_norm(&f, &idx).unwrap();
        let n1 = aniso_norm(&f, &RegularityIndex::sobolev(s + gap)).unwrap();
        prop_assert!(n0 <= k.c_low * n * (1.0 + 1e-9));
        prop_assert!(n <= k.c_high * n1 * (1.0 + 1e-9));
    }

    #[test]
    fn karamata_deviation_decreases_with_probe(
        theta in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
        nested in any::<bool>(),
        lambda in 1.1f64..50.0,
        lr in 3.0f64..30.0,
        step in 0.5f64..10.0,
    ) {
        let phi = if nested {
            SlowlyVaryingFn::log_multiscale(&[0.0, theta]).unwrap()
        } else {
            SlowlyVaryingFn::log_multiscale(&[theta]).unwrap()
        };
        let r0 = phi.splice_radius().unwrap().max(lr.exp());
        let r1 = r0 * step.exp();
        let d0 = karamata_check(&phi, &[lambda], r0, 1.0).unwrap().worst_deviation;
        let d1 = karamata_check(&phi, &[lambda], r1, 1.0).unwrap().worst_deviation;
        prop_assert!(d1 <= d0 * (1.0 + 1e-12), "{} > {}", d1, d0);
    }

    #[test]
    fn spectral_text_round_trip(seed in any::<u64>(), time in any::<bool>()) {
        let (grid, periods): (&[usize], &[f64]) = if time {
            (&[4, 6, 2], &[1.0, 0.25, 3.0])
        } else {
            (&[6, 4], &[0.1, 7.5])
        };
        let f = random_field(seed, grid, periods, time);
        let back = SpectralField::from_text(&f.to_text()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn spectral_lambda_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let spec = system([1.0, 0.0, 0.5, 1.0], vec![0, 1]);
        let periods = sweep_periods(&spec);
        let grid = [6, 4, 4];
        let u: Vec<_> = (0..2).map(|i| random_field(seed.wrapping_add(i), &grid, &periods, true)).collect();
        let v: Vec<_> = (0..2).map(|i| random_field(seed.wrapping_add(10 + i), &grid, &periods, true)).collect();
        let mix: Vec<SpectralField> = u
            .iter()
            .zip(&v)
            .map(|(x, y)| {
                let coeffs = x.coeffs().iter().zip(y.coeffs()).map(|(p, q)| p * a + q * b).collect();
                SpectralField::from_coeffs(2, true, &grid, &periods, coeffs).unwrap()
            })
            .collect();
        let lm = apply_lambda_spectral(&spec, &mix).unwrap();
        let lu = apply_lambda_spectral(&spec, &u).unwrap();
        let lv = apply_lambda_spectral(&spec, &v).unwrap();
        let close = |m: &SpectralField, x: &SpectralField, y: &SpectralField| {
            m.coeffs().iter().zip(x.coeffs().iter().zip(y.coeffs())).all(|(z, (p, q))| {
                let e = p * a + q * b;
                (z - e).norm() <= 1e-10 * (1.0 + e.norm())
            })
        };
        for j in 0..2 {
            prop_assert!(close(&lm.f[j], &lu.f[j], &lv.f[j]));
            prop_assert!(close(&lm.h[j], &lu.h[j], &lv.h[j]));
            for face in 0..lm.g.len() {
                prop_assert!(close(&lm.g[face][j], &lu.g[face][j], &lv.g[face][j]));
            }
        }
    }

    #[test]
    fn trace_counts_step_at_exceptional_points(s in 2.0f64..8.0, l in 0u32..=1) {
        prop_assume!(s > 2.0);
        let e = exceptional_set_for_orders(&[l], 20.0);
        let below = e.iter().filter(|&&x| x < s).count();
        // r = 0 needs l + 3/2 < s, which for l = 0 holds throughout s > 2
        let base = if l == 0 { 1 } else { 0 };
        prop_assert_eq!(trace_orders(s, l).len(), base + below);
    }

    #[test]
    fn manufactured_data_are_compatible(
        seed in any::<u64>(),
        s in 2.01f64..7.0,
        l2 in 0u32..=1,
        degree in 1u32..=4,
    ) {
        let spec = system([1.0, 0.0, 0.5, 2.0], vec![0, l2]);
        prop_assume!(!is_exceptional(spec.orders(), s));
        let u = vec![random_poly(seed, degree), random_poly(seed ^ 0x9e37, degree)];
        let img = apply_lambda_poly(&spec, &u).unwrap();
        let g = boundary_operator_poly(&spec, &u).unwrap();
        let sys = compatibility_residuals(&spec, &img.f, &g, &img.h, s, 1e-10).unwrap();
        prop_assert!(sys.compatible(), "max residual {}", sys.max_residual());
    }

    #[test]
    fn traces_are_operator_powers_without_forcing(seed in any::<u64>(), degree in 1u32..=4) {
        let spec = system([1.0, 0.0, 0.5, 2.0], vec![0, 0]);
        let h: Vec<MultiPoly> = (0..2).map(|i| random_poly(seed.wrapping_add(i), degree).at_t0()).collect();
        let f = vec![MultiPoly::zero(2); 2];
        let traces = build_traces(&spec, &f, &h, 3).unwrap();
        // v_{r+1} = −A v_r, where A v is the interior part of Λ applied to a
        // time-independent v
        let mut v = h.clone();
        for r in 0..=3u32 {
            for (j, vj) in v.iter().enumerate() {
                prop_assert_eq!(traces.get(j, r).unwrap(), vj);
            }
            let av = apply_lambda_poly(&spec, &v).unwrap().f;
            v = av.iter().map(|p| p.scale(c(-1.0))).collect();
        }
    }

    #[test]
    fn interpolated_weight_is_monotone(
        s0 in 2.0f64..3.0,
        t in 0.05f64..0.95,
        width in 0.5f64..3.0,
        w0 in 1.0f64..100.0,
        ratio in 1.0f64..1e6,
        bump in 1.0f64..10.0,
        lift in 0.0f64..0.9,
    ) {
        let s1 = s0 + width;
        let s = s0 + t * width;
        let p = InterpolationParam::new(s0, s, s1, SlowlyVaryingFn::one()).unwrap();
        let a = interpolate_diag(&[w0], &[w0 * ratio], &p).unwrap()[0];
        let b = interpolate_diag(&[w0], &[w0 * ratio * bump], &p).unwrap()[0];
        prop_assert!(a <= b * (1.0 + 1e-14));
        prop_assert!(a >= w0 * (1.0 - 1e-14) && a <= w0 * ratio * (1.0 + 1e-14));
        // a larger target order gives a larger ψ above r = 1
        let q = InterpolationParam::new(s0, s + lift * (s1 - s), s1, SlowlyVaryingFn::one()).unwrap();
        prop_assert!(psi_eval(&p, ratio).unwrap() <= psi_eval(&q, ratio).unwrap() * (1.0 + 1e-14));
    }
}
