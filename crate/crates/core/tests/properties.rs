use proptest::prelude::*;
use spinsq::efftwo;
use spinsq::noise::{lyapunov, solve_lyapunov, squeezing};
use spinsq::spinframe::{report, to_c_spin_two_level};
use spinsq::{reorder, CMatrix, Complex64, EffectiveParams};

fn point() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (1.0f64..300.0, 0.0f64..20.0, -0.3f64..0.3, 0.2f64..0.95)
        .prop_map(|(c, db, dc, f)| (c, db, dc, f * (1.0 + db * db) / 4.0))
}

fn ds(p: &EffectiveParams, i2: f64) -> Option<f64> {
    let ss = efftwo::steady_state(p, i2).ok()?;
    let sys = efftwo::fluctuation_system(p, &ss);
    if sys.stability_margin() < 1e-3 {
        return None;
    }
    Some(squeezing(&sys, &solve_lyapunov(&sys).ok()?).ok()?.ds_min)
}

fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn atom_number_drops_out((c, db, dc, i2) in point(), n in 1.0f64..1e6) {
        let p = EffectiveParams::new(c, db, dc, i2);
        let a = ds(&p, i2);
        prop_assume!(a.is_some());
        let b = ds(&p.with_n(n), i2).unwrap();
        prop_assert!((a.unwrap() - b).abs() <= 1e-6 * b);
    }

    #[test]
    fn uncertainty_product_is_respected((c, db, dc, i2) in point()) {
        let p = EffectiveParams::new(c, db, dc, i2);
        let ss = efftwo::steady_state(&p, i2).unwrap();
        let sys = efftwo::fluctuation_system(&p, &ss);
        prop_assume!(sys.stability_margin() > 1e-3);
        let rep = squeezing(&sys, &solve_lyapunov(&sys).unwrap()).unwrap();
        prop_assert!(rep.uncertainty_product() >= 1.0 - 1e-9, "{}", rep.uncertainty_product());
        prop_assert!(rep.ds_min <= rep.ds_max);
    }

    #[test]
    fn diffusion_is_self_adjoint_under_pairing((c, db, dc, i2) in point()) {
        let p = EffectiveParams::new(c, db, dc, i2);
        let ss = efftwo::steady_state(&p, i2).unwrap();
        let sys = efftwo::fluctuation_system(&p, &ss);
        prop_assert!(sys.diffusion_hermiticity_defect() < 1e-12);
        let back = reorder(&reorder(&sys.diffusion, &sys.pairing), &sys.pairing);
        prop_assert_eq!(back, sys.diffusion.clone());
    }

    #[test]
    fn rotation_about_the_mean_axis_leaves_variances_unchanged(
        vx in 0.05f64..1.0, vy in 0.05f64..1.0, cxy in -0.04f64..0.04, sz in 0.1f64..0.5, phi in -3.0f64..3.0,
    ) {
        let mut g = CMatrix::zeros(3, 3);
        g[(0, 0)] = Complex64::new(vx, 0.0);
        g[(1, 1)] = Complex64::new(vy, 0.0);
        g[(0, 1)] = Complex64::new(cxy, 0.0);
        g[(1, 0)] = Complex64::new(cxy, 0.0);
        g[(2, 2)] = Complex64::new(0.1, 0.0);
        let (s, c) = phi.sin_cos();
        let r = CMatrix::from_row_slice(3, 3, &[
            Complex64::new(c, 0.0), Complex64::new(-s, 0.0), Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0), Complex64::new(c, 0.0), Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0),
        ]);
        let a = report(&g, [0.0, 0.0, sz]).unwrap();
        let b = report(&(&r * &g * r.transpose()), [0.0, 0.0, sz]).unwrap();
        prop_assert!((a.ds_min - b.ds_min).abs() < 1e-12);
        prop_assert!((a.ds_max - b.ds_max).abs() < 1e-12);
    }

    #[test]
    fn spin_map_preserves_hermiticity(re_xy in -1.0f64..1.0, im_xy in -1.0f64..1.0) {
        let mut g = CMatrix::identity(3, 3);
        g[(0, 2)] = Complex64::new(re_xy, im_xy);
        g[(2, 0)] = Complex64::new(re_xy, -im_xy);
        let c = to_c_spin_two_level(&g);
        prop_assert!(frob(&(&c - c.adjoint())) < 1e-14);
    }

    #[test]
    fn lyapunov_residual_is_small(entries in prop::collection::vec(-1.0f64..1.0, 72), shift in 0.2f64..3.0) {
        let n = 6;
        let mut b = CMatrix::from_fn(n, n, |i, j| Complex64::new(entries[i * n + j], entries[36 + i * n + j]));
        let spread = b.iter().map(|z| z.norm()).sum::<f64>();
        for i in 0..n {
            b[(i, i)] += Complex64::new(spread + shift, 0.0);
        }
        let half = CMatrix::from_fn(n, n, |i, j| Complex64::new(entries[(i + j) % 72], entries[(i * j + 5) % 72]));
        let d = &half * half.adjoint();
        let (g, residual) = lyapunov(&b, &d).unwrap();
        prop_assert!(residual <= 1e-10);
        prop_assert!(frob(&(&g - g.adjoint())) <= 1e-12 * frob(&g).max(1.0));
        let direct = &b * &g + &g * b.adjoint() - &d;
        prop_assert!(frob(&direct) <= 1e-10 * frob(&d).max(1.0));
    }

    #[test]
    fn middle_branch_has_negative_slope(c in 20.0f64..400.0, db in 8.0f64..30.0) {
        let p = EffectiveParams::new(c, db, 0.0, 0.0);
        let tp = efftwo::turning_points(&p);
        prop_assume!(tp.len() == 2);
        let mid = 0.5 * (tp[0] + tp[1]);
        let lo = efftwo::input_intensity(&p, tp[0]).unwrap();
        let hi = efftwo::input_intensity(&p, tp[1]).unwrap();
        let m = efftwo::input_intensity(&p, mid).unwrap();
        prop_assert!(lo > m && m > hi);
    }
}
