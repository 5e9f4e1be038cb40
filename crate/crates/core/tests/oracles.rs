//! Reference values computed once with an independent dense implementation
//! (scipy's Bartels–Stewart solver and explicit resolvents) and frozen here.

use approx::assert_relative_eq;
use spinsq::efftwo;
use spinsq::noise::{outgoing_spectrum, solve_lyapunov, squeezing};
use spinsq::studies::{self, Model, ValidationSetup};
use spinsq::{EffectiveParams, Error};

fn ds(db: f64, dc: f64, i2: f64) -> spinsq::Result<f64> {
    let p = EffectiveParams::new(100.0, db, dc, i2);
    let ss = efftwo::steady_state(&p, i2)?;
    let sys = efftwo::fluctuation_system(&p, &ss);
    Ok(squeezing(&sys, &solve_lyapunov(&sys)?)?.ds_min)
}

#[test]
fn reference_operating_points() {
    let cases = [
        (0.0, 0.0, 0.25, 0.714_457_716_349_029_1),
        (5.0, -0.2, 6.5, 0.713_027_158_539_618_4),
        (10.0, 0.0, 25.2, 0.721_071_888_418_608_1),
        (10.0, 0.0, 25.25, 0.720_772_786_855_407_6),
        (20.0, -0.2, 100.0, 0.728_506_548_450_091_7),
    ];
    for (db, dc, i2, want) in cases {
        assert_relative_eq!(ds(db, dc, i2).unwrap(), want, max_relative = 1e-9);
    }
}

#[test]
fn reference_points_outside_the_stable_region() {
    for (db, dc, i2, margin) in [
        (15.0, -0.4, 56.5, -0.052_631_481_415_475_18),
        (12.0, -0.2, 40.0, -0.098_837_409_222_602_16),
    ] {
        let p = EffectiveParams::new(100.0, db, dc, i2);
        let ss = efftwo::steady_state(&p, i2).unwrap();
        let sys = efftwo::fluctuation_system(&p, &ss);
        assert_relative_eq!(sys.stability_margin(), margin, max_relative = 1e-8);
        assert!(matches!(solve_lyapunov(&sys), Err(Error::Unstable { .. })));
    }
}

#[test]
fn mirrored_noise_split_point() {
    assert_relative_eq!(ds(12.0, 0.2, 40.0).unwrap(), 0.717_157_097_845_541_9, max_relative = 1e-9);
}

#[test]
fn adiabatic_model_on_the_optimal_line() {
    let cs = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5];
    let want = [
        1.060_660_171_779_821_2,
        0.771_389_215_839_871_2,
        0.714_107_838_426_020_1,
        0.707_813_181_567_354,
        0.707_177_484_794_459_2,
        0.707_113_852_184_724_9,
    ];
    let got = studies::squeezing_vs_cooperativity(0.0, 0.0, 0.25, &cs, Model::Adiabatic).unwrap();
    for ((c, v), w) in got.into_iter().zip(want) {
        assert_relative_eq!(v, w, max_relative = 1e-8);
        assert_relative_eq!(efftwo::analytic_min_variance(c).unwrap(), w, max_relative = 1e-8);
    }
    let detuned = studies::squeezing_vs_cooperativity(10.0, 0.0, 25.25, &[100.0], Model::Adiabatic).unwrap();
    assert_relative_eq!(detuned[0].1, 0.720_740_169_599_176_4, max_relative = 1e-8);
}

#[test]
fn transmitted_field_spectrum() {
    let p = EffectiveParams::new(100.0, 10.0, 0.0, 25.2);
    let ss = efftwo::steady_state(&p, 25.2).unwrap();
    let sys = efftwo::fluctuation_system(&p, &ss);
    let out = outgoing_spectrum(&sys, &[0.0, 24.0, 122.0, 1000.0]).unwrap();
    let s_min = [1.034_271_125_329_723_9, 0.855_867_225_881_971_5, 0.927_091_260_814_053, 0.998_442_599_040_908_7];
    let s_max = [4_625.093_749_924_456, 1.225_171_486_383_392_5, 1.097_086_347_026_883_5, 1.001_905_003_544_282];
    for k in 0..4 {
        assert_relative_eq!(out.s_min[k], s_min[k], max_relative = 1e-8);
        assert_relative_eq!(out.s_max[k], s_max[k], max_relative = 1e-8);
    }
}

#[test]
fn turning_points_of_the_detuned_curve() {
    let tp = efftwo::turning_points(&EffectiveParams::new(100.0, 10.0, 0.0, 0.0));
    assert_relative_eq!(tp[0], 26.308_379_415_506_536, max_relative = 1e-7);
    assert_relative_eq!(tp[1], 446.948_031_268_018_67, max_relative = 1e-7);
}

#[test]
fn open_system_model_comparison() {
    let three = [0.722_101_017_636_501_4, 0.739_084_637_087_923_9, 0.757_732_663_416_665_7, 0.796_395_607_073_513_1];
    let two = [0.721_664_169_426_292, 0.723_219_253_503_121_3, 0.727_757_311_775_223_6, 0.744_212_486_692_035_9];
    let curve = studies::validate_models(&ValidationSetup::open(), &[0.0, 5.0, 10.0, 20.0]).unwrap();
    for (k, pt) in curve.points.iter().enumerate() {
        assert_relative_eq!(pt.three_level, three[k], max_relative = 1e-6);
        assert_relative_eq!(pt.two_level, two[k], max_relative = 1e-8);
    }
}

#[test]
fn transfer_efficiency_closed_form() {
    assert_relative_eq!(studies::transfer_efficiency(100.0, 1.0 / 2000.0), 0.994_527_611_815_982_6, max_relative = 1e-12);
    assert_relative_eq!(studies::transfer_efficiency(100.0, 0.5), 200.0 / 301.5, max_relative = 1e-14);
    let v = studies::transfer_variance_lyapunov(100.0, 1.0 / 2000.0, 1.0, 0.3).unwrap();
    assert_relative_eq!(v, studies::transfer_variance(100.0, 1.0 / 2000.0, 1.0), max_relative = 1e-10);
}
