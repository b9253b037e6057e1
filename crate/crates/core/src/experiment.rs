//! End-to-end runs: noisy evolution with optional cooling, and the
//! single-step convergence study.

use faer::c64;

use crate::cooling::{CoolingReport, GaugeCooler};
use crate::dynamics::{
    amplitude_damping_channel, depolarizing_channel, fidelity, DensityMatrix, EvolutionContext, NoiseKind, NoiseSpec,
    TrotterConfig,
};
use crate::error::{invalid, Result};
use crate::lattice::{vacuum_state, N_EDGES};

/// Points at which a run hands the current state to an observer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Trotter { step: usize },
    NoiseEdge { step: usize, edge: usize },
    NoiseDone { step: usize },
    CoolVertex { step: usize, vertex: usize },
    CoolDone { step: usize },
}

pub type Observer<'a> = dyn FnMut(Stage, &DensityMatrix) -> Result<()> + 'a;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveConfig {
    pub trotter: TrotterConfig,
    pub noise: NoiseSpec,
    pub cooling: bool,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl EvolveConfig {
    pub fn new(trotter: TrotterConfig, noise: NoiseSpec, cooling: bool, tol: f64, max_sweeps: usize) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid(format!("tolerance {tol} must lie in (0, 1)")));
        }
        if max_sweeps == 0 {
            return Err(invalid("max_sweeps must be at least 1"));
        }
        Ok(Self { trotter, noise, cooling, tol, max_sweeps })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveRow {
    pub step: usize,
    pub time: f64,
    pub fidelity: f64,
    pub gi_overlap: f64,
    pub sweeps_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergeRow {
    pub sweep: usize,
    pub gi_overlap: f64,
    pub deficit: f64,
}

/// Hamiltonians, step unitary and cooling channels for one Trotter configuration.
#[derive(Clone, Debug)]
pub struct Simulator {
    pub context: EvolutionContext,
    pub cooler: GaugeCooler,
}

impl Simulator {
    pub fn new(trotter: TrotterConfig) -> Result<Self> {
        Ok(Self { context: EvolutionContext::new(trotter)?, cooler: GaugeCooler::new()? })
    }

    pub fn with_cooler(trotter: TrotterConfig, cooler: GaugeCooler) -> Result<Self> {
        Ok(Self { context: EvolutionContext::new(trotter)?, cooler })
    }

    fn noise_step(&self, rho: DensityMatrix, noise: &NoiseSpec, step: usize, observe: &mut Observer) -> Result<DensityMatrix> {
        let mut cur = rho;
        for edge in 0..N_EDGES {
            cur = match noise.kind {
                NoiseKind::Depolarizing => depolarizing_channel(&cur, edge, noise.rate)?,
                NoiseKind::AmplitudeDamping => amplitude_damping_channel(&cur, edge, noise.rate)?,
            };
            observe(Stage::NoiseEdge { step, edge }, &cur)?;
        }
        observe(Stage::NoiseDone { step }, &cur)?;
        Ok(cur)
    }

    /// Per step: Trotter, noise on e0..e3, then (if enabled) iterative cooling.
    /// Row 0 is the initial vacuum.
    pub fn run_evolve(&self, cfg: &EvolveConfig, observe: &mut Observer) -> Result<Vec<EvolveRow>> {
        if cfg.trotter != self.context.config {
            return Err(invalid("run configuration does not match the simulator's Trotter setup"));
        }
        let dt = cfg.trotter.dt();
        let mut psi: Vec<c64> = vacuum_state();
        let mut rho = DensityMatrix::vacuum();
        let mut rows = vec![EvolveRow { step: 0, time: 0.0, fidelity: 1.0, gi_overlap: self.cooler.gi_overlap(&rho), sweeps_used: 0 }];
        for step in 1..=cfg.trotter.n_steps {
            psi = self.context.evolve_state(&psi);
            rho = self.context.trotter_step(&rho);
            observe(Stage::Trotter { step }, &rho)?;
            rho = self.noise_step(rho, &cfg.noise, step, observe)?;
            let mut sweeps_used = 0;
            if cfg.cooling {
                let mut per_vertex = |v: usize, r: &DensityMatrix| observe(Stage::CoolVertex { step, vertex: v }, r);
                let (cooled, report) = self.cooler.iterative_cooling_observed(&rho, cfg.tol, cfg.max_sweeps, &mut per_vertex)?;
                rho = cooled;
                sweeps_used = report.sweeps_used;
                observe(Stage::CoolDone { step }, &rho)?;
            }
            rows.push(EvolveRow {
                step,
                time: step as f64 * dt,
                fidelity: fidelity(&rho, &psi)?,
                gi_overlap: self.cooler.gi_overlap(&rho),
                sweeps_used,
            });
        }
        Ok(rows)
    }

    /// Vacuum → one Trotter step → noise on every edge → cooling sweeps.
    pub fn run_converge(&self, noise: &NoiseSpec, tol: f64, max_sweeps: usize) -> Result<(Vec<ConvergeRow>, CoolingReport)> {
        let rho = self.context.trotter_step(&DensityMatrix::vacuum());
        let rho = self.noise_step(rho, noise, 1, &mut |_, _| Ok(()))?;
        let (_, report) = self.cooler.iterative_cooling(&rho, tol, max_sweeps)?;
        let rows = report
            .overlaps
            .iter()
            .enumerate()
            .map(|(sweep, &g)| ConvergeRow { sweep, gi_overlap: g, deficit: 1.0 - g })
            .collect();
        Ok((rows, report))
    }
}
