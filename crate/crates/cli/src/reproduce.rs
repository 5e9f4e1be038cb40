//! Parameter sets behind each table and figure.

use spinsq::efftwo;
use spinsq::studies::{self, Model, OptimizerOptions, ValidationSetup};
use spinsq::EffectiveParams;

use crate::config::{linear, Target};
use crate::error::CliError;
use crate::jobs::{decomposition_tables, optimize_tables, validation_table, Outcome};
use crate::output::Table;

const CTILDE: f64 = 100.0;

pub fn run(target: Target) -> Result<Outcome, CliError> {
    match target {
        Target::Table1 => table1(),
        Target::Table2 => table2(),
        Target::Fig2 => fig2(),
        Target::Fig3 => fig3(),
        Target::Fig4 => fig4(),
        Target::Fig5 => fig5(),
        Target::Fig6 => fig6(),
        Target::Fig7 => fig7(),
        Target::Fig8 => fig8(),
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    linear(lo.log10(), hi.log10(), points).into_iter().map(|e| 10f64.powf(e)).collect()
}

fn table1() -> Result<Outcome, CliError> {
    let reference = [
        (0.0, 0.0, 0.25, 0.713),
        (5.0, -0.2, 6.5, 0.716),
        (10.0, 0.0, 25.2, 0.72),
        (15.0, -0.4, 56.5, 0.72),
        (20.0, -0.2, 100.0, 0.728),
    ];
    let mut t = Table::new(
        "results",
        &[
            "delta_tilde",
            "delta_c",
            "i2",
            "ds_min",
            "stability_margin",
            "reference_delta_c",
            "reference_i2",
            "reference_ds_min",
        ],
    );
    for (db, dc, i2, ds) in reference {
        let base = EffectiveParams::new(CTILDE, db, 0.0, 1.0);
        let (best, _) = optimize_tables(&base, &OptimizerOptions::default())?;
        let r = &best.rows[0];
        t.push(vec![db, r[2], r[3], r[4], r[6], dc, i2, ds]);
    }
    Ok(Outcome {
        tables: vec![t],
        warnings: Vec::new(),
    })
}

fn table2() -> Result<Outcome, CliError> {
    let mut t = Table::new(
        "results",
        &["delta_c", "stability_margin", "ds_min", "ds_field", "ds_atomic", "field_fraction"],
    )
    .note("C̃=100, δ̄=12, I2=40, ρ=1/2000; the reference δc=-0.2 is unstable in this sign convention, δc=+0.2 is its mirror image");
    let mut warnings = Vec::new();
    for dc in [-0.2, 0.2] {
        let p = EffectiveParams::new(CTILDE, 12.0, dc, 40.0);
        let ss = efftwo::steady_state(&p, 40.0)?;
        let margin = efftwo::fluctuation_system(&p, &ss).stability_margin();
        match studies::noise_contributions(&p, 40.0) {
            Ok(d) => t.push(vec![dc, margin, d.ds_min, d.ds_field, d.ds_atomic, d.field_fraction]),
            Err(e) => {
                warnings.push(format!("δc = {dc}: {e}"));
                t.push(vec![dc, margin, f64::NAN, f64::NAN, f64::NAN, f64::NAN]);
            }
        }
    }
    Ok(Outcome {
        tables: vec![t],
        warnings,
    })
}

fn fig2() -> Result<Outcome, CliError> {
    let at = |c: f64, model: Model| {
        studies::squeezing_vs_cooperativity(0.0, 0.0, 0.25, &[c], model).map_or(f64::NAN, |v| v[0].1)
    };
    let mut t = Table::new("results", &["ctilde", "full", "adiabatic", "analytic"])
        .note("δ̄=0, δc=0, I2=0.25, ρ=1/2000; NaN where a model has no stable solution")
        .plot_all_against(0);
    for c in log_grid(1.0, 1e5, 51) {
        t.push(vec![c, at(c, Model::Full), at(c, Model::Adiabatic), efftwo::analytic_min_variance(c)?]);
    }
    Ok(Outcome {
        tables: vec![t],
        warnings: Vec::new(),
    })
}

fn fig3() -> Result<Outcome, CliError> {
    let p = EffectiveParams::new(CTILDE, 10.0, 0.0, 25.2);
    let ss = efftwo::steady_state(&p, 25.2)?;
    let sys = efftwo::fluctuation_system(&p, &ss);
    let grid = linear(0.0, 1000.0, 2001);
    let out = spinsq::noise::outgoing_spectrum(&sys, &grid)?;
    let band = studies::squeezing_band(&sys, 1000.0, 2001)?;
    let gp = efftwo::adiabatic_drift(&p, &ss).gamma_prime;
    let mut t = Table::new("results", &["omega", "s_out_min", "s_out_max"]).plot_all_against(0);
    for k in 0..grid.len() {
        t.push(vec![grid[k], out.s_min[k], out.s_max[k]]);
    }
    let mut summary = Table::new(
        "summary",
        &["omega_at_min", "s_out_min", "half_width", "shot_noise_crossing", "gamma_prime"],
    )
    .note("shot_noise_crossing is NaN when S_out_min stays below 1 up to the end of the grid");
    summary.push(vec![
        band.omega_at_min,
        band.s_min,
        band.half_width.unwrap_or(f64::NAN),
        band.shot_noise_crossing.unwrap_or(f64::NAN),
        gp,
    ]);
    Ok(Outcome {
        tables: vec![t, summary],
        warnings: Vec::new(),
    })
}

fn fig4() -> Result<Outcome, CliError> {
    let p = EffectiveParams::new(CTILDE, 12.0, 0.2, 40.0);
    let ss = efftwo::steady_state(&p, 40.0)?;
    let sys = efftwo::fluctuation_system(&p, &ss);
    let (summary, spectra) = decomposition_tables(&sys, &linear(0.0, 500.0, 1001))?;
    let note = "C̃=100, δ̄=12, δc=+0.2 (mirror of the unstable reference δc=-0.2), I2=40";
    Ok(Outcome {
        tables: vec![summary.note(note), spectra.note(note)],
        warnings: Vec::new(),
    })
}

fn fig5() -> Result<Outcome, CliError> {
    let rho = 1.0 / 2000.0;
    let rs = linear(0.0, 3.0, 61);
    let mut t = Table::new("results", &["r", "ctilde_10", "ctilde_100", "ctilde_1000", "lyapunov_ctilde_100"])
        .note("ΔS_min of the spin fed by squeezed vacuum, ρ=1/2000")
        .plot_all_against(0);
    for &r in &rs {
        t.push(vec![
            r,
            studies::transfer_variance(10.0, rho, r),
            studies::transfer_variance(100.0, rho, r),
            studies::transfer_variance(1000.0, rho, r),
            studies::transfer_variance_lyapunov(100.0, rho, r, 0.0)?,
        ]);
    }
    Ok(Outcome {
        tables: vec![t],
        warnings: Vec::new(),
    })
}

fn fig6() -> Result<Outcome, CliError> {
    let mut t = Table::new("results", &["ctilde", "eta_rho_1_2000", "eta_rho_1_2"]).plot_all_against(0);
    for c in log_grid(0.1, 1e4, 101) {
        t.push(vec![
            c,
            studies::transfer_efficiency(c, 1.0 / 2000.0),
            studies::transfer_efficiency(c, 0.5),
        ]);
    }
    Ok(Outcome {
        tables: vec![t],
        warnings: Vec::new(),
    })
}

fn fig7() -> Result<Outcome, CliError> {
    let grid = linear(0.0, 20.0, 21);
    let (t, warnings) = validation_table(&ValidationSetup::open(), &grid)?;
    Ok(Outcome {
        tables: vec![t.note("Γp=γ0=γ/1000, Δ=100γ, Ω1=√10γ, C=C̃=100")],
        warnings,
    })
}

fn fig8() -> Result<Outcome, CliError> {
    let setup = ValidationSetup::closed(100.0);
    let width = 1.0 + setup.gamma_p_ratio;
    let grid: Vec<f64> = linear(0.0, 20.0, 21).into_iter().map(|x| x * width).collect();
    let (t, warnings) = validation_table(&setup, &grid)?;
    Ok(Outcome {
        tables: vec![t.note("Γp/γ0=100, δ̃ in units of γ0 spanning 0..20(γ0+Γp), Ω2/Ω1 terms kept")],
        warnings,
    })
}
