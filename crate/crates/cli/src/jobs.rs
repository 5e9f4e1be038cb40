use spinsq::efftwo::{self, Branch};
use spinsq::lambda3;
use spinsq::noise::{self, solve_lyapunov, squeezing, CovarianceMatrix};
use spinsq::studies::{self, OptimizerOptions, ValidationSetup};
use spinsq::{Drive, EffectiveParams, FluctuationSystem};

use crate::config::{linear, need, ModelKind, Regime, RunConfig, Study};
use crate::error::CliError;
use crate::output::Table;

/// Tables produced by a job, plus warnings about leaving the model's regime
/// of validity.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn single(table: Table) -> Self {
        Self {
            tables: vec![table],
            warnings: Vec::new(),
        }
    }
}

pub fn branch_code(b: Branch) -> f64 {
    match b {
        Branch::Unique => 0.0,
        Branch::Lower => 1.0,
        Branch::Middle => 2.0,
        Branch::Upper => 3.0,
    }
}

pub fn effective_params(cfg: &RunConfig) -> Result<(EffectiveParams, f64), CliError> {
    let p = &cfg.params;
    let ctilde = need(p.ctilde, "Ctilde")?;
    let delta_bar = need(p.delta_tilde, "delta-tilde")?;
    let (drive, i2) = match p.r {
        Some(r) => (
            Drive::Squeezed {
                r,
                theta: p.theta.unwrap_or(0.0),
            },
            0.0,
        ),
        None => {
            let i2 = need(p.i2, "I2")?;
            (Drive::Coherent { i2 }, i2)
        }
    };
    let params = EffectiveParams::new(ctilde, delta_bar, p.delta_c.unwrap_or(0.0), i2)
        .with_rho(p.rho.unwrap_or(1.0 / 2000.0))
        .with_n(p.n.unwrap_or(1.0))
        .with_pumping(p.lambda1.unwrap_or(0.0))
        .with_gamma_p_ratio(p.gamma_p_ratio.unwrap_or(0.0))
        .with_drive(drive);
    params.validate()?;
    Ok((params, i2))
}

pub fn validation_setup(cfg: &RunConfig) -> ValidationSetup {
    let mut setup = match cfg.regime {
        Regime::Open => ValidationSetup::open(),
        Regime::Closed => ValidationSetup::closed(cfg.params.gamma_p_ratio.unwrap_or(100.0)),
    };
    if let Some(c) = cfg.params.ctilde {
        setup.g = (2.0 * setup.kappa * setup.gamma * c / setup.gamma_p_ratio / setup.n).sqrt();
    }
    setup.delta_c = cfg.params.delta_c.unwrap_or(0.0);
    setup
}

fn steady_2l(cfg: &RunConfig, p: &EffectiveParams, i2: f64) -> Result<efftwo::SteadyState2L, CliError> {
    Ok(match cfg.model {
        ModelKind::Corrected => efftwo::corrected_steady_state(p, i2, cfg.params.omega_ratio.unwrap_or(0.0))?,
        _ => efftwo::steady_state(p, i2)?,
    })
}

/// Linearized system of the configured model and any regime warnings.
pub fn build_system(cfg: &RunConfig) -> Result<(FluctuationSystem, Vec<String>), CliError> {
    let mut warnings = Vec::new();
    if cfg.model == ModelKind::ThreeLevel {
        let setup = validation_setup(cfg);
        let dt = need(cfg.params.delta_tilde, "delta-tilde")?;
        let i2 = need(cfg.params.i2, "I2")?;
        let ratio = i2.sqrt() * setup.delta * setup.gamma0() / setup.omega1.powi(2);
        if ratio > 0.02 {
            warnings.push(format!("|Ω2/Ω1| = {ratio:.3} exceeds 0.02; the two-level reduction is not accurate here"));
        }
        let (p, ss) = setup.three_level(dt, i2)?;
        return Ok((lambda3::fluctuation_system_3l(&p, &ss), warnings));
    }
    let (p, i2) = effective_params(cfg)?;
    let ss = steady_2l(cfg, &p, i2)?;
    if ss.branch == Branch::Middle {
        warnings.push(format!("I2 = {i2} lies on the middle branch of the bistability curve"));
    }
    let sys = if cfg.model == ModelKind::Adiabatic {
        let drift = efftwo::adiabatic_drift(&p, &ss);
        if !drift.in_regime {
            warnings.push(format!(
                "C̃ = {} with ρ = {} is outside 1 ≪ C̃ ≪ 1/ρ; adiabatic elimination is not justified",
                p.ctilde, p.rho
            ));
        }
        efftwo::adiabatic_system(&p, &ss)
    } else {
        efftwo::fluctuation_system(&p, &ss)
    };
    Ok((sys, warnings))
}

pub fn solve(sys: &FluctuationSystem, tol: f64) -> Result<CovarianceMatrix, CliError> {
    let cov = solve_lyapunov(sys)?;
    if cov.residual > tol {
        return Err(CliError::Numerical(spinsq::Error::NoConvergence { residual: cov.residual }));
    }
    Ok(cov)
}

pub fn run_study(cfg: &RunConfig, study: Study) -> Result<Outcome, CliError> {
    match study {
        Study::Steady => steady(cfg),
        Study::Bistability => bistability(cfg),
        Study::Variance => variance(cfg),
        Study::Spectrum => spectrum(cfg),
        Study::Decompose => decompose(cfg),
        Study::Optimize => optimize(cfg),
        Study::Transfer => transfer(cfg),
        Study::Validate => validate(cfg),
    }
}

fn steady(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.model == ModelKind::ThreeLevel {
        let setup = validation_setup(cfg);
        let (p, ss) = setup.three_level(need(cfg.params.delta_tilde, "delta-tilde")?, need(cfg.params.i2, "I2")?)?;
        let margin = lambda3::fluctuation_system_3l(&p, &ss).stability_margin();
        let mut t = Table::new(
            "results",
            &["a2_re", "a2_im", "pi1", "pi2", "pi3", "pr_re", "pr_im", "residual", "stability_margin"],
        );
        t.push(vec![ss.a2.re, ss.a2.im, ss.pi1, ss.pi2, ss.pi3, ss.pr.re, ss.pr.im, ss.residual, margin]);
        return Ok(Outcome::single(t));
    }
    let (p, i2) = effective_params(cfg)?;
    let ss = steady_2l(cfg, &p, i2)?;
    let margin = efftwo::fluctuation_system(&p, &ss).stability_margin();
    let mut t = Table::new(
        "results",
        &["i2", "i2_in", "beta2", "s_plus_re", "s_plus_im", "s_z", "stability_margin", "branch"],
    )
    .note("branch: 0 unique, 1 lower, 2 middle, 3 upper");
    t.push(vec![
        ss.i2,
        efftwo::input_intensity_at(&p, &ss),
        ss.beta2,
        ss.s_plus.re,
        ss.s_plus.im,
        ss.s_z,
        margin,
        branch_code(ss.branch),
    ]);
    Ok(Outcome::single(t))
}

fn bistability(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if matches!(cfg.model, ModelKind::ThreeLevel) {
        return Err(CliError::Config("bistability is available for the two-level models only".into()));
    }
    let mut c = cfg.clone();
    c.params.i2.get_or_insert(1.0);
    let (p, _) = effective_params(&c)?;
    let curve = studies::bistability_curve(&p, &cfg.grid.i2())?;
    let mut samples = Table::new("results", &["i2", "i2_in"]).plot_all_against(0);
    for (i, v) in &curve.samples {
        samples.push(vec![*i, *v]);
    }
    let mut tps = Table::new("turning_points", &["i2", "i2_in"]);
    for (i, v) in &curve.turning_points {
        tps.push(vec![*i, *v]);
    }
    if let Some(th) = studies::bistability_threshold(&p) {
        tps = tps.note(format!("bistability threshold C̃ = {}", crate::output::number(th)));
    }
    Ok(Outcome {
        tables: vec![samples, tps],
        warnings: Vec::new(),
    })
}

fn variance(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (sys, mut warnings) = build_system(cfg)?;
    let cov = solve(&sys, cfg.tolerances.lyapunov_residual)?;
    let rep = squeezing(&sys, &cov)?;
    if rep.uncertainty_product() < 1.0 - 1e-9 {
        warnings.push(format!("ΔS_min·ΔS_max = {} is below one", crate::output::number(rep.uncertainty_product())));
    }
    let mut t = Table::new(
        "results",
        &["ds_min", "ds_max", "alpha0", "theta", "phi", "mean_spin_norm", "stability_margin", "lyapunov_residual"],
    );
    t.push(vec![
        rep.ds_min,
        rep.ds_max,
        rep.alpha0,
        rep.theta,
        rep.phi,
        rep.mean_spin_norm,
        sys.stability_margin(),
        cov.residual,
    ]);
    Ok(Outcome {
        tables: vec![t],
        warnings,
    })
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (sys, warnings) = build_system(cfg)?;
    if sys.field.is_none() {
        return Err(CliError::Config("the adiabatic model has no cavity field to transmit".into()));
    }
    let grid = cfg.grid.omega();
    let out = noise::outgoing_spectrum(&sys, &grid)?;
    let mut t = Table::new("results", &["omega", "s_out_min", "s_out_max"]).plot_all_against(0);
    for k in 0..grid.len() {
        t.push(vec![grid[k], out.s_min[k], out.s_max[k]]);
    }
    Ok(Outcome {
        tables: vec![t],
        warnings,
    })
}

pub fn decomposition_tables(sys: &FluctuationSystem, grid: &[f64]) -> Result<(Table, Table), CliError> {
    let d = noise::decompose(sys, grid)?;
    let mut summary = Table::new(
        "results",
        &["ds_min", "ds_field", "ds_atomic", "field_fraction", "sum_defect"],
    );
    summary.push(vec![d.ds_min, d.ds_field, d.ds_atomic, d.field_fraction, d.sum_defect]);
    let total = noise::minimal_component(sys, &d.report, &d.total)?;
    let field = noise::minimal_component(sys, &d.report, &d.field)?;
    let atomic = noise::minimal_component(sys, &d.report, &d.atomic)?;
    let mut spectra = Table::new("spectra", &["omega", "total", "field", "atomic"]).plot_all_against(0);
    for k in 0..grid.len() {
        spectra.push(vec![grid[k], total[k], field[k], atomic[k]]);
    }
    Ok((summary, spectra))
}

fn decompose(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (sys, warnings) = build_system(cfg)?;
    let (summary, spectra) = decomposition_tables(&sys, &cfg.grid.omega())?;
    Ok(Outcome {
        tables: vec![summary, spectra],
        warnings,
    })
}

pub fn optimize_tables(base: &EffectiveParams, opts: &OptimizerOptions) -> Result<(Table, Table), CliError> {
    let opt = studies::optimize_with(base, opts)?;
    let pt = &opt.point;
    let mut best = Table::new(
        "results",
        &["ctilde", "delta_tilde", "delta_c", "i2", "ds_min", "ds_max", "stability_margin"],
    );
    best.push(vec![
        pt.params.ctilde,
        pt.params.delta_bar,
        pt.params.delta_c,
        pt.i2,
        pt.report.ds_min,
        pt.report.ds_max,
        pt.stability_margin,
    ]);
    let mut evals = Table::new("evaluations", &["delta_c", "i2", "ds_min"]).note("ds_min is NaN where the point is rejected");
    for e in &opt.evaluations {
        evals.push(vec![e.delta_c, e.i2, e.ds_min.unwrap_or(f64::NAN)]);
    }
    Ok((best, evals))
}

fn optimize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if !matches!(cfg.model, ModelKind::Effective | ModelKind::Corrected) {
        return Err(CliError::Config("optimize works on the effective two-level model".into()));
    }
    let mut c = cfg.clone();
    c.params.i2.get_or_insert(1.0);
    let (base, _) = effective_params(&c)?;
    let opts = OptimizerOptions {
        min_margin: cfg.tolerances.min_margin,
        ..OptimizerOptions::default()
    };
    let (best, evals) = optimize_tables(&base, &opts)?;
    Ok(Outcome {
        tables: vec![best, evals],
        warnings: Vec::new(),
    })
}

fn transfer(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ctilde = need(cfg.params.ctilde, "Ctilde")?;
    let rho = cfg.params.rho.unwrap_or(1.0 / 2000.0);
    let theta = cfg.params.theta.unwrap_or(0.0);
    let eta = studies::transfer_efficiency(ctilde, rho);
    let mut t = Table::new("results", &["r", "closed_form", "lyapunov"])
        .note(format!("eta = {}", crate::output::number(eta)))
        .plot_all_against(0);
    for &r in &cfg.grid.r_values {
        t.push(vec![
            r,
            studies::transfer_variance(ctilde, rho, r),
            studies::transfer_variance_lyapunov(ctilde, rho, r, theta)?,
        ]);
    }
    Ok(Outcome::single(t))
}

pub fn validation_table(setup: &ValidationSetup, grid: &[f64]) -> Result<(Table, Vec<String>), CliError> {
    let curve = studies::validate_models(setup, grid)?;
    let mut t = Table::new("results", &["delta_tilde", "i2", "two_level", "three_level", "omega_ratio"])
        .note(format!(
            "max |two_level - three_level| = {}",
            crate::output::number(curve.max_discrepancy)
        ));
    t.plots = vec![(0, 2), (0, 3)];
    let mut warnings = Vec::new();
    for p in &curve.points {
        if p.omega_ratio > 0.02 {
            warnings.push(format!("δ̃ = {}: |Ω2/Ω1| = {:.3} exceeds 0.02", p.delta_tilde, p.omega_ratio));
        }
        t.push(vec![p.delta_tilde, p.i2, p.two_level, p.three_level, p.omega_ratio]);
    }
    Ok((t, warnings))
}

fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let setup = validation_setup(cfg);
    let grid = linear(0.0, cfg.grid.delta_tilde_max, cfg.grid.delta_tilde_steps + 1);
    let (t, warnings) = validation_table(&setup, &grid)?;
    Ok(Outcome {
        tables: vec![t],
        warnings,
    })
}
