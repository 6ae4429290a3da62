//! Scenario dispatch: builds the requested solver from a validated
//! configuration and renders its output into a [`ResultTable`].

use iohoem_core::correlations::{CrossCorrelationFn, ExponentialSeries, WavePacketSpec};
use iohoem_core::hierarchy::{HeomForm, Hierarchy, HierarchySpec, SystemModel};
use iohoem_core::integrator::StepControl;
use iohoem_core::markovian::{scattering_density, ScatteringConfig};
use iohoem_core::operators::{two_level, ComplexMatrix};
use iohoem_core::oracles;

use crate::config::{
    CouplingOp, FieldConfig, HierarchyRun, InitialState, RunConfig, ScatterRun, Scenario,
    ScenarioConfig,
};
use crate::error::CliError;
use crate::table::ResultTable;

fn coupling_matrix(op: CouplingOp) -> ComplexMatrix {
    match op {
        CouplingOp::SigmaZ => two_level::sigma_z(),
        CouplingOp::SigmaX => two_level::sigma_x(),
        CouplingOp::SigmaY => two_level::sigma_y(),
    }
}

fn initial_matrix(s: InitialState) -> ComplexMatrix {
    match s {
        InitialState::Plus => {
            ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).expect("fixed shape")
        }
        InitialState::Excited => two_level::excited(),
        InitialState::Ground => two_level::ground(),
    }
}

fn field_kernels(f: &FieldConfig) -> Result<Vec<CrossCorrelationFn>, CliError> {
    f.terms
        .iter()
        .map(|&(alpha, t)| {
            let series = ExponentialSeries::new(vec![(t.amplitude, t.rate)])?;
            Ok(CrossCorrelationFn::exponential(f.label, alpha, series))
        })
        .collect()
}

/// Runs the configured scenario and returns the rendered table.  Tolerance
/// verdicts of `oracle-compare` are recorded in the metadata (keys
/// `max_abs_diff`, `tolerance_abs`, `within_tolerance`) so the caller can
/// emit the table before deciding the exit code.
pub fn run_scenario(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let mut table = ResultTable::default();
    table.meta("config_sha256", &cfg.config_hash);
    table.meta("scenario", cfg.scenario.name());
    table.meta("tool_version", env!("CARGO_PKG_VERSION"));

    match (&cfg.params, cfg.scenario) {
        (ScenarioConfig::Hierarchy(h), _) => run_hierarchy(h, &mut table)?,
        (ScenarioConfig::Scatter(s), Scenario::MarkovScatter) => {
            run_scatter(s, false, &mut table)?
        }
        (ScenarioConfig::Scatter(s), _) => run_scatter(s, true, &mut table)?,
    }
    table.meta("rows", table.rows.len().to_string());
    Ok(table)
}

fn run_hierarchy(run: &HierarchyRun, table: &mut ResultTable) -> Result<(), CliError> {
    let h_s = two_level::sigma_z().scale(num_complex::Complex64::new(0.5 * run.omega_s, 0.0));
    let model = SystemModel::new(h_s, vec![coupling_matrix(run.coupling)])?;
    let bath = ExponentialSeries::new(run.bath.iter().map(|t| (t.amplitude, t.rate)).collect())?;

    let mut spec = HierarchySpec::from_causal(model, &bath, run.n_max)?.with_alpha0(run.alpha0)?;
    for f in &run.fields {
        let kernels = field_kernels(f)?;
        spec = if f.dynamic {
            spec.with_dynamic_field(f.label, kernels)?
        } else {
            spec.with_static_field(f.label, kernels)?
        };
    }
    let labels: Vec<usize> = run.fields.iter().map(|f| f.label).collect();

    let hierarchy = Hierarchy::new(spec, HeomForm::Canonical)?;
    table.meta("n_adm", hierarchy.n_adm().to_string());
    table.meta("n_max", run.n_max.to_string());
    let rho0 = initial_matrix(run.initial_state);
    let traj = hierarchy.integrate(&rho0, &run.t_grid, &[], &[], StepControl::default())?;

    let names = [
        ("rho_ee", 0, 0),
        ("rho_eg", 0, 1),
        ("rho_ge", 1, 0),
        ("rho_gg", 1, 1),
    ];
    for (y, &t) in traj.iter().zip(&run.t_grid) {
        let rho = hierarchy.rho_s(y)?;
        for (name, i, j) in names {
            let v = rho.get(i, j);
            table.push(t, 0.0, name, v.re, v.im);
        }
        for &label in &labels {
            let phi = hierarchy.reconstruct(y, &[label])?.trace();
            table.push(t, 0.0, format!("phi_{label}"), phi.re, phi.im);
        }
    }
    Ok(())
}

fn run_scatter(run: &ScatterRun, compare: bool, table: &mut ResultTable) -> Result<(), CliError> {
    let packet = WavePacketSpec::new(run.x_in, run.p_in, run.sigma_in, run.light_speed, run.gamma)?;
    let rho0 = two_level::ground();

    let mut peak: f64 = 0.0;
    let mut max_diff: f64 = 0.0;
    for &t_out in &run.t_out {
        for &x in &run.x_grid {
            let cfg = ScatteringConfig::new(
                run.omega_s,
                run.gamma,
                packet,
                x,
                t_out,
                run.cell_dx,
            )?;
            let got = scattering_density(&cfg, &rho0)?;
            table.push(t_out, x, "density", got, 0.0);
            if compare {
                let want = oracles::analytic_density(&cfg, x, t_out)?;
                table.push(t_out, x, "density_oracle", want, 0.0);
                peak = peak.max(want.abs());
                max_diff = max_diff.max((got - want).abs());
            }
        }
    }
    if compare {
        let tol = run.tolerance_rel_peak * peak;
        table.meta("max_abs_diff", format!("{max_diff:.16e}"));
        table.meta("tolerance_abs", format!("{tol:.16e}"));
        table.meta("within_tolerance", (max_diff <= tol).to_string());
    }
    Ok(())
}
