//! Benchmark fixtures: representative problem setups shared by the
//! criterion benches.

use num_complex::Complex64;

use iohoem_core::correlations::{ExponentialSeries, WavePacketSpec};
use iohoem_core::hierarchy::{HeomForm, Hierarchy, HierarchySpec, SystemModel};
use iohoem_core::markovian::ScatteringConfig;
use iohoem_core::operators::{two_level, ComplexMatrix};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A Rabi-coupled single-exponential hierarchy at the given depth.
pub fn rabi_hierarchy(n_max: usize) -> Hierarchy {
    let h_s = two_level::sigma_z().scale(c64(0.6, 0.0));
    let model = SystemModel::new(h_s, vec![two_level::sigma_x()]).expect("valid model");
    let series = ExponentialSeries::new(vec![(c64(0.09, 0.0), c64(0.3, 1.0))]).expect("valid series");
    let spec = HierarchySpec::from_causal(model, &series, n_max).expect("valid spec");
    Hierarchy::new(spec, HeomForm::Rescaled).expect("valid hierarchy")
}

/// The |+⟩⟨+| initial state.
pub fn plus_state() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).expect("fixed shape")
}

/// Benchmark-geometry scattering configuration at (x_out, t_out).
pub fn fig_scattering(x_out: f64, t_out: f64) -> ScatteringConfig {
    let packet = WavePacketSpec::new(-1.0, 4.5, 2.25, 1.0, 1.8).expect("valid packet");
    ScatteringConfig::new(4.5, 1.8, packet, x_out, t_out, 0.01).expect("valid config")
}
