//! Syndrome operators, recovery channels and iterative gauge cooling.

use std::collections::BTreeMap;

use faer::c64;

use crate::dynamics::{DensityMatrix, KrausChannel};
use crate::error::{invalid, Result};
use crate::lattice::{build_cg_basis, CgEntry, VertexCgBasis, DIM, N_VERTICES};
use crate::linalg::{cr, zeros, CMatrix, RowMajor, SparseMatrix};
use crate::su2::SpinLabel;

/// Outcome (J, M, N) of syndrome extraction at one vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Syndrome {
    pub j: SpinLabel,
    pub twice_m: i32,
    pub twice_n: i32,
}

impl Syndrome {
    pub fn new(j: SpinLabel, twice_m: i32, twice_n: i32) -> Result<Self> {
        if j.index_of(twice_m).is_none() || j.index_of(twice_n).is_none() {
            return Err(invalid(format!("syndrome (J={j}, 2M={twice_m}, 2N={twice_n}) out of range")));
        }
        Ok(Self { j, twice_m, twice_n })
    }

    /// Every (J, M, N) with J drawn from `spins`.
    pub fn all(spins: &[SpinLabel]) -> Vec<Syndrome> {
        let mut out = Vec::new();
        for &j in spins {
            for m in j.twice_ms() {
                for n in j.twice_ms() {
                    out.push(Syndrome { j, twice_m: m, twice_n: n });
                }
            }
        }
        out
    }
}

fn entries_at(basis: &VertexCgBasis, j: SpinLabel, twice_m: i32) -> impl Iterator<Item = &CgEntry> {
    basis.entries.iter().filter(move |e| e.j == j && e.twice_m == twice_m)
}

/// T^(J)_{MN} = (2J+1)^{-1/2} Σ_copies |J,M,c⟩⟨J,N,c|.
pub fn syndrome_operator(basis: &VertexCgBasis, s: Syndrome) -> Result<CMatrix> {
    if basis.multiplicity(s.j) == 0 {
        return Err(invalid(format!("J={} does not occur at vertex {}", s.j, basis.vertex)));
    }
    Syndrome::new(s.j, s.twice_m, s.twice_n)?;
    let by_copy: BTreeMap<usize, &CgEntry> = entries_at(basis, s.j, s.twice_n).map(|e| (e.copy, e)).collect();
    let w = cr(1.0 / (s.j.dim() as f64).sqrt());
    let mut t = zeros(DIM, DIM);
    for ket in entries_at(basis, s.j, s.twice_m) {
        let bra = by_copy[&ket.copy];
        for &(i, a) in &ket.support {
            for &(k, b) in &bra.support {
                t[(i, k)] += a * b.conj() * w;
            }
        }
    }
    Ok(t)
}

/// p(J,M,N) = tr(P_N^J ρ)/(2J+1).
pub fn syndrome_probabilities(rho: &DensityMatrix, basis: &VertexCgBasis) -> BTreeMap<Syndrome, f64> {
    let mut weight: BTreeMap<(SpinLabel, i32), f64> = BTreeMap::new();
    for e in &basis.entries {
        *weight.entry((e.j, e.twice_m)).or_insert(0.0) += e.expectation(rho.matrix());
    }
    let mut out = BTreeMap::new();
    for s in Syndrome::all(&basis.spins()) {
        out.insert(s, weight[&(s.j, s.twice_n)] / s.j.dim() as f64);
    }
    out
}

/// K_{J,N} = Σ_α |0,0,α⟩⟨J,N,α| at one vertex.
#[derive(Clone, Debug)]
pub struct RecoveryChannel {
    pub vertex: usize,
    ops: Vec<((SpinLabel, i32), SparseMatrix)>,
}

impl RecoveryChannel {
    pub fn ops(&self) -> impl Iterator<Item = (SpinLabel, i32, &SparseMatrix)> {
        self.ops.iter().map(|((j, n), k)| (*j, *n, k))
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn completeness_error(&self) -> f64 {
        let s = self.ops.iter().fold(zeros(DIM, DIM), |acc, (_, k)| acc + k.gram());
        crate::linalg::max_abs_diff(&s, &crate::linalg::identity(DIM))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let mut out = zeros(DIM, DIM);
        let rows = RowMajor::new(rho.matrix());
        for (_, k) in &self.ops {
            k.sandwich_add_rows(&rows, &mut out);
        }
        DensityMatrix::from_raw(out)
    }

    pub fn to_kraus_channel(&self) -> Result<KrausChannel> {
        KrausChannel::new(self.ops.iter().map(|(_, k)| k.to_dense()).collect())
    }
}

pub fn recovery_kraus(basis: &VertexCgBasis) -> RecoveryChannel {
    let singlets: BTreeMap<usize, &CgEntry> = basis.sector(SpinLabel::ZERO).map(|e| (e.alpha, e)).collect();
    let mut ops = Vec::new();
    for j in basis.spins() {
        for n in j.twice_ms() {
            let mut trip = Vec::new();
            for e in entries_at(basis, j, n) {
                // copies beyond the singlet multiplicity have no partner
                let Some(s) = singlets.get(&e.alpha) else { continue };
                for &(i, a) in &s.support {
                    for &(k, b) in &e.support {
                        trip.push((i, k, a * b.conj()));
                    }
                }
            }
            ops.push(((j, n), SparseMatrix::from_triplets(DIM, DIM, &trip)));
        }
    }
    RecoveryChannel { vertex: basis.vertex, ops }
}

/// Trajectory of one iterative cooling run.
#[derive(Clone, Debug, PartialEq)]
pub struct CoolingReport {
    /// GI overlap before any sweep (index 0) and after each sweep.
    pub overlaps: Vec<f64>,
    pub sweeps_used: usize,
    pub converged: bool,
    pub final_deficit: f64,
}

impl CoolingReport {
    pub fn deficits(&self) -> Vec<f64> {
        self.overlaps.iter().map(|g| 1.0 - g).collect()
    }

    /// d_k / d_{k-1} for k = 1..
    pub fn ratios(&self) -> Vec<f64> {
        self.deficits().windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Cooling machinery for all four plaquette vertices.
#[derive(Clone, Debug)]
pub struct GaugeCooler {
    bases: Vec<VertexCgBasis>,
    channels: Vec<RecoveryChannel>,
}

impl GaugeCooler {
    pub fn new() -> Result<Self> {
        let bases = (0..N_VERTICES).map(build_cg_basis).collect::<Result<Vec<_>>>()?;
        let channels = bases.iter().map(recovery_kraus).collect();
        Ok(Self { bases, channels })
    }

    pub fn basis(&self, v: usize) -> &VertexCgBasis {
        &self.bases[v]
    }

    pub fn recovery(&self, v: usize) -> &RecoveryChannel {
        &self.channels[v]
    }

    pub fn cool_vertex(&self, rho: &DensityMatrix, v: usize) -> DensityMatrix {
        self.channels[v].apply(rho)
    }

    /// Vertices v0..v3 in order.
    pub fn cooling_sweep(&self, rho: &DensityMatrix) -> DensityMatrix {
        self.cooling_sweep_observed(rho, &mut |_, _| Ok(())).expect("observer cannot fail")
    }

    pub fn cooling_sweep_observed(
        &self,
        rho: &DensityMatrix,
        observe: &mut dyn FnMut(usize, &DensityMatrix) -> Result<()>,
    ) -> Result<DensityMatrix> {
        let mut cur = rho.clone();
        for v in 0..N_VERTICES {
            cur = self.cool_vertex(&cur, v);
            observe(v, &cur)?;
        }
        Ok(cur)
    }

    /// tr(Π_0^(v) ρ).
    pub fn vertex_overlap(&self, rho: &DensityMatrix, v: usize) -> f64 {
        self.bases[v].sector(SpinLabel::ZERO).map(|e| e.expectation(rho.matrix())).sum()
    }

    pub fn gi_overlap(&self, rho: &DensityMatrix) -> f64 {
        (0..N_VERTICES).map(|v| self.vertex_overlap(rho, v)).sum::<f64>() / N_VERTICES as f64
    }

    /// Sweeps until the GI overlap exceeds 1 - tol or `max_sweeps` is reached.
    pub fn iterative_cooling(&self, rho: &DensityMatrix, tol: f64, max_sweeps: usize) -> Result<(DensityMatrix, CoolingReport)> {
        self.iterative_cooling_observed(rho, tol, max_sweeps, &mut |_, _| Ok(()))
    }

    pub fn iterative_cooling_observed(
        &self,
        rho: &DensityMatrix,
        tol: f64,
        max_sweeps: usize,
        observe: &mut dyn FnMut(usize, &DensityMatrix) -> Result<()>,
    ) -> Result<(DensityMatrix, CoolingReport)> {
        if !(tol > 0.0) {
            return Err(invalid(format!("tolerance {tol} must be positive")));
        }
        if max_sweeps == 0 {
            return Err(invalid("max_sweeps must be at least 1"));
        }
        let mut cur = rho.clone();
        let mut overlaps = vec![self.gi_overlap(&cur)];
        while overlaps.len() - 1 < max_sweeps && *overlaps.last().unwrap() <= 1.0 - tol {
            cur = self.cooling_sweep_observed(&cur, observe)?;
            overlaps.push(self.gi_overlap(&cur));
        }
        let last = *overlaps.last().unwrap();
        let report = CoolingReport {
            sweeps_used: overlaps.len() - 1,
            converged: last > 1.0 - tol,
            final_deficit: 1.0 - last,
            overlaps,
        };
        Ok((cur, report))
    }
}

/// ‖T ψ‖² for a dense operator and state, used as a brute-force cross-check.
pub fn norm_sqr_after(t: &CMatrix, psi: &[c64]) -> f64 {
    (0..t.nrows())
        .map(|r| (0..t.ncols()).map(|c| t[(r, c)] * psi[c]).sum::<c64>().norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{apply_noise_all_edges, EvolutionContext, NoiseKind, NoiseSpec, TrotterConfig};
    use crate::linalg::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn cooler() -> &'static GaugeCooler {
        static C: OnceLock<GaugeCooler> = OnceLock::new();
        C.get_or_init(|| GaugeCooler::new().unwrap())
    }

    fn random_pure(rng: &mut ChaCha8Rng) -> Vec<c64> {
        let psi: Vec<c64> = (0..DIM).map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let n = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        psi.into_iter().map(|x| x / cr(n)).collect()
    }

    #[test]
    fn syndrome_validation() {
        assert!(Syndrome::new(SpinLabel::HALF, 0, 1).is_err());
        assert!(Syndrome::new(SpinLabel::ONE, 2, -2).is_ok());
        assert_eq!(Syndrome::all(&[SpinLabel::ZERO, SpinLabel::HALF, SpinLabel::ONE]).len(), 14);
        let b = cooler().basis(0);
        let s = Syndrome { j: SpinLabel::from_twice(4), twice_m: 0, twice_n: 0 };
        assert!(syndrome_operator(b, s).is_err());
    }

    #[test]
    fn trivial_syndrome_is_singlet_projector() {
        let b = cooler().basis(1);
        let t = syndrome_operator(b, Syndrome::new(SpinLabel::ZERO, 0, 0).unwrap()).unwrap();
        assert!(max_abs_diff(&t, &crate::lattice::singlet_projector(b)) < 1e-12);
    }

    #[test]
    fn syndrome_operator_algebra() {
        let b = cooler().basis(2);
        for s in Syndrome::all(&b.spins()) {
            let t = syndrome_operator(b, s).unwrap();
            let tt = t.adjoint() * &t;
            let mut pn = zeros(DIM, DIM);
            for e in entries_at(b, s.j, s.twice_n) {
                for &(i, a) in &e.support {
                    for &(k, c) in &e.support {
                        pn[(i, k)] += a * c.conj();
                    }
                }
            }
            let want = crate::linalg::scale(&pn, cr(1.0 / s.j.dim() as f64));
            assert!(max_abs_diff(&tt, &want) < 1e-10);
            // other sectors are annihilated
            for e in b.entries.iter().filter(|e| e.j != s.j).step_by(37) {
                assert!(norm_sqr_after(&t, &e.to_dense()) < 1e-20);
            }
        }
    }

    #[test]
    fn vacuum_syndrome_is_certain() {
        let p = syndrome_probabilities(&DensityMatrix::vacuum(), cooler().basis(0));
        let s0 = Syndrome::new(SpinLabel::ZERO, 0, 0).unwrap();
        assert!((p[&s0] - 1.0).abs() < 1e-12);
        assert!((p.values().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn probabilities_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = cooler().basis(3);
        let ops: Vec<(Syndrome, CMatrix)> = Syndrome::all(&b.spins()).into_iter().map(|s| (s, syndrome_operator(b, s).unwrap())).collect();
        for _ in 0..3 {
            let psi = random_pure(&mut rng);
            let rho = DensityMatrix::pure(&psi).unwrap();
            let p = syndrome_probabilities(&rho, b);
            assert!((p.values().sum::<f64>() - 1.0).abs() < 1e-10);
            for (s, t) in &ops {
                assert!((p[s] - norm_sqr_after(t, &psi)).abs() < 1e-10);
                let alt = Syndrome { twice_m: -s.twice_m, ..*s };
                assert!((p[s] - p[&alt]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recovery_is_complete_and_maps_copies_to_singlets() {
        for v in 0..4 {
            let ch = cooler().recovery(v);
            assert_eq!(ch.len(), 6);
            assert!(ch.completeness_error() < 1e-10);
        }
        let b = cooler().basis(0);
        let ch = cooler().recovery(0);
        let singlets: BTreeMap<usize, &CgEntry> = b.sector(SpinLabel::ZERO).map(|e| (e.alpha, e)).collect();
        for (j, n, k) in ch.ops() {
            let dense = k.to_dense();
            for e in entries_at(b, j, n).step_by(11) {
                let x = e.to_dense();
                let out: Vec<c64> = (0..DIM).map(|r| e.support.iter().map(|&(c, _)| dense[(r, c)] * x[c]).sum()).collect();
                let want = singlets[&e.alpha].to_dense();
                let err = out.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-10);
            }
        }
    }

    #[test]
    fn cooling_fixed_points_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = cooler();
        let rho = DensityMatrix::pure(&random_pure(&mut rng)).unwrap();
        let once = c.cool_vertex(&rho, 1);
        let twice = c.cool_vertex(&once, 1);
        assert!(max_abs_diff(once.matrix(), twice.matrix()) < 1e-10);
        assert!((c.vertex_overlap(&once, 1) - 1.0).abs() < 1e-10);
        assert!((once.trace() - cr(1.0)).norm() < 1e-12);
        let p = crate::lattice::singlet_projector(c.basis(1));
        assert!(max_abs_diff(&(&p * once.matrix() * &p), once.matrix()) < 1e-10);
        let vac = DensityMatrix::vacuum();
        assert!(max_abs_diff(c.cooling_sweep(&vac).matrix(), vac.matrix()) < 1e-12);
    }

    #[test]
    fn physical_states_are_fixed() {
        let phys = crate::lattice::physical_subspace().unwrap();
        let psi: Vec<c64> = (0..DIM).map(|r| phys[(r, 0)] * cr(0.6) + phys[(r, 1)] * c64::new(0.0, 0.8)).collect();
        let rho = DensityMatrix::pure(&psi).unwrap();
        let out = cooler().cooling_sweep(&rho);
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-10);
        let (_, rep) = cooler().iterative_cooling(&rho, 1e-5, 10).unwrap();
        assert_eq!(rep.sweeps_used, 0);
        assert!(rep.converged);
    }

    #[test]
    fn overlap_of_maximally_mixed_state() {
        let g = cooler().gi_overlap(&DensityMatrix::maximally_mixed());
        assert!((g - 0.2).abs() < 1e-12);
        assert!(cooler().iterative_cooling(&DensityMatrix::vacuum(), 0.0, 3).is_err());
        assert!(cooler().iterative_cooling(&DensityMatrix::vacuum(), 1e-5, 0).is_err());
    }

    #[test]
    fn one_step_depolarized_state_cools() {
        let ctx = EvolutionContext::new(TrotterConfig::new(1.0, 0.1, 1).unwrap()).unwrap();
        let rho = ctx.trotter_step(&DensityMatrix::vacuum());
        let spec = NoiseSpec::new(NoiseKind::Depolarizing, 0.005).unwrap();
        let noisy = apply_noise_all_edges(&rho, &spec).unwrap();
        let g0 = cooler().gi_overlap(&noisy);
        assert!((g0 - 0.992).abs() < 0.002);
        let g1 = cooler().gi_overlap(&cooler().cooling_sweep(&noisy));
        assert!((g1 - 0.993).abs() < 0.001);
    }
}
