//! Fixtures shared by the benchmarks.

use gaugecool::dynamics::apply_noise_all_edges;
use gaugecool::{DensityMatrix, NoiseKind, NoiseSpec, Simulator};

/// Vacuum after one Trotter step and depolarizing noise, so every syndrome
/// sector is populated.
pub fn noisy_state(sim: &Simulator) -> DensityMatrix {
    let rho = sim.context.trotter_step(&DensityMatrix::vacuum());
    let noise = NoiseSpec::new(NoiseKind::Depolarizing, 0.01).expect("valid rate");
    apply_noise_all_edges(&rho, &noise).expect("valid state")
}
