//! Matrix exponentials, Trotter stepping, noise channels and fidelity.

use faer::c64;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::HamiltonianPair;
use crate::lattice::{digits, index_of, DIM, EDGE_DIM, N_EDGES};
use crate::linalg::{adjoint, cr, eigh, eigvalsh, hermiticity_error, identity, max_abs, max_abs_diff, trace, zeros, CMatrix};

const HERMITIAN_TOL: f64 = 1e-10;

/// Eigendecomposition of a Hermitian matrix kept around for repeated exponentials.
#[derive(Clone, Debug)]
pub struct SpectralCache {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl SpectralCache {
    pub fn new(h: &CMatrix) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::DimensionMismatch { expected: h.nrows(), actual: h.ncols() });
        }
        let err = hermiticity_error(h);
        if err > HERMITIAN_TOL * max_abs(h).max(1.0) {
            return Err(invalid(format!("matrix is not Hermitian (deviation {err:e})")));
        }
        let (values, vectors) = eigh(h)?;
        Ok(Self { values, vectors })
    }

    /// exp(-iHt).
    pub fn unitary(&self, t: f64) -> CMatrix {
        let v = &self.vectors;
        let n = v.nrows();
        let phases: Vec<c64> = self.values.iter().map(|&l| c64::cis(-l * t)).collect();
        let scaled = CMatrix::from_fn(n, n, |r, c| v[(r, c)] * phases[c]);
        scaled * v.adjoint()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }
}

/// exp(-iHt) for Hermitian H.
pub fn herm_expm(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(SpectralCache::new(h)?.unitary(t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrotterConfig {
    pub g2: f64,
    pub total_time: f64,
    pub n_steps: usize,
}

impl TrotterConfig {
    pub fn new(g2: f64, total_time: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(invalid("n_steps must be at least 1"));
        }
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(invalid(format!("total time {total_time} must be positive")));
        }
        if !(g2 > 0.0 && g2.is_finite()) {
            return Err(invalid(format!("coupling g² = {g2} must be positive")));
        }
        Ok(Self { g2, total_time, n_steps })
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }
}

impl Default for TrotterConfig {
    fn default() -> Self {
        Self { g2: 1.0, total_time: 3.0, n_steps: 30 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    Depolarizing,
    AmplitudeDamping,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depolarizing" => Ok(Self::Depolarizing),
            "amplitude-damping" => Ok(Self::AmplitudeDamping),
            _ => Err(invalid(format!("unknown noise model '{s}'"))),
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Depolarizing => "depolarizing",
            Self::AmplitudeDamping => "amplitude-damping",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub rate: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self { kind, rate })
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(invalid(format!("noise rate {rate} outside [0, 1]")));
    }
    Ok(())
}

/// Finite Kraus representation with Σ K†K = 1.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| invalid("a channel needs at least one Kraus operator"))?;
        let n = first.nrows();
        for k in &ops {
            if k.nrows() != n || k.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: k.nrows().max(k.ncols()) });
            }
        }
        let ch = Self { ops };
        let err = ch.completeness_error();
        if err > 1e-10 {
            return Err(Error::NumericalFailure(format!("Kraus completeness violated by {err:e}")));
        }
        Ok(ch)
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// max |Σ K†K - 1|.
    pub fn completeness_error(&self) -> f64 {
        let n = self.ops[0].nrows();
        let s = self.ops.iter().fold(zeros(n, n), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&s, &identity(n))
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.ops.iter().fold(zeros(rho.nrows(), rho.ncols()), |acc, k| acc + k * rho * k.adjoint())
    }

    /// Applies a single-edge channel to `edge` of a plaquette density matrix.
    pub fn apply_on_edge(&self, rho: &CMatrix, edge: usize) -> Result<CMatrix> {
        if self.dim() != EDGE_DIM {
            return Err(Error::DimensionMismatch { expected: EDGE_DIM, actual: self.dim() });
        }
        let mut out = zeros(DIM, DIM);
        for k in &self.ops {
            out += edge_sandwich(rho, edge, k, k);
        }
        Ok(out)
    }
}

// A ρ B† with A, B acting on one edge.
fn edge_sandwich(rho: &CMatrix, edge: usize, a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = zeros(DIM, DIM);
    for col in 0..DIM {
        let dc = digits(col);
        for row in 0..DIM {
            let dr = digits(row);
            let mut acc = cr(0.0);
            for x in 0..EDGE_DIM {
                let ax = a[(dr[edge], x)];
                if ax == cr(0.0) {
                    continue;
                }
                let mut r2 = dr;
                r2[edge] = x;
                for y in 0..EDGE_DIM {
                    let by = b[(dc[edge], y)];
                    if by == cr(0.0) {
                        continue;
                    }
                    let mut c2 = dc;
                    c2[edge] = y;
                    acc += ax * rho[(index_of(r2), index_of(c2))] * by.conj();
                }
            }
            out[(row, col)] = acc;
        }
    }
    out
}

pub fn amplitude_damping_kraus(gamma: f64) -> Result<KrausChannel> {
    check_rate(gamma)?;
    let mut ops = Vec::with_capacity(EDGE_DIM);
    let mut k0 = zeros(EDGE_DIM, EDGE_DIM);
    k0[(0, 0)] = cr(1.0);
    for i in 1..EDGE_DIM {
        k0[(i, i)] = cr((1.0 - gamma).sqrt());
    }
    ops.push(k0);
    for i in 1..EDGE_DIM {
        let mut k = zeros(EDGE_DIM, EDGE_DIM);
        k[(0, i)] = cr(gamma.sqrt());
        ops.push(k);
    }
    KrausChannel::new(ops)
}

/// Plaquette state. Invariants are checked by [`DensityMatrix::validate`].
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    rho: CMatrix,
}

/// Worst-case deviations of a state from being a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateHygiene {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateHygiene {
    pub fn within(&self, trace_tol: f64, herm_tol: f64, eig_floor: f64) -> bool {
        self.trace_error <= trace_tol && self.hermiticity_error <= herm_tol && self.min_eigenvalue >= eig_floor
    }
}

impl DensityMatrix {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != DIM || rho.ncols() != DIM {
            return Err(Error::DimensionMismatch { expected: DIM, actual: rho.nrows().max(rho.ncols()) });
        }
        let s = Self { rho };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn from_raw(rho: CMatrix) -> Self {
        Self { rho }
    }

    pub fn pure(psi: &[c64]) -> Result<Self> {
        if psi.len() != DIM {
            return Err(Error::DimensionMismatch { expected: DIM, actual: psi.len() });
        }
        let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("state norm² {norm} is not 1")));
        }
        Ok(Self { rho: CMatrix::from_fn(DIM, DIM, |r, c| psi[r] * psi[c].conj()) })
    }

    pub fn vacuum() -> Self {
        Self::pure(&crate::lattice::vacuum_state()).expect("vacuum is normalized")
    }

    pub fn maximally_mixed() -> Self {
        Self { rho: crate::linalg::scale(&identity(DIM), cr(1.0 / DIM as f64)) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn trace(&self) -> c64 {
        trace(&self.rho)
    }

    pub fn purity(&self) -> f64 {
        let mut s = 0.0;
        for c in 0..DIM {
            for r in 0..DIM {
                s += (self.rho[(r, c)] * self.rho[(c, r)]).re;
            }
        }
        s
    }

    pub fn hygiene(&self) -> Result<StateHygiene> {
        let herm = hermiticity_error(&self.rho);
        let sym = CMatrix::from_fn(DIM, DIM, |r, c| (self.rho[(r, c)] + self.rho[(c, r)].conj()) * cr(0.5));
        let w = eigvalsh(&sym)?;
        Ok(StateHygiene {
            trace_error: (self.trace() - cr(1.0)).norm(),
            hermiticity_error: herm,
            min_eigenvalue: w.iter().copied().fold(f64::INFINITY, f64::min),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hygiene()?;
        if !h.within(1e-10, 1e-10, -1e-8) {
            return Err(invalid(format!("not a density matrix: {h:?}")));
        }
        Ok(())
    }
}

/// (1-p)ρ + (p/5)·tr_e(ρ) ⊗ 1_e.
pub fn depolarizing_channel(rho: &DensityMatrix, edge: usize, p: f64) -> Result<DensityMatrix> {
    check_rate(p)?;
    check_edge(edge)?;
    let r = &rho.rho;
    let mut out = crate::linalg::scale(r, cr(1.0 - p));
    if p == 0.0 {
        return Ok(DensityMatrix::from_raw(out));
    }
    // reduced[(i, k)] for rows/cols with the edge digit set to 0
    let w = cr(p / EDGE_DIM as f64);
    for col in 0..DIM {
        let dc = digits(col);
        if dc[edge] != 0 {
            continue;
        }
        for row in 0..DIM {
            let dr = digits(row);
            if dr[edge] != 0 {
                continue;
            }
            let mut red = cr(0.0);
            let stride = edge_stride(edge);
            for x in 0..EDGE_DIM {
                red += r[(row + x * stride, col + x * stride)];
            }
            let red = red * w;
            for x in 0..EDGE_DIM {
                out[(row + x * stride, col + x * stride)] += red;
            }
        }
    }
    Ok(DensityMatrix::from_raw(out))
}

fn edge_stride(edge: usize) -> usize {
    EDGE_DIM.pow((N_EDGES - 1 - edge) as u32)
}

fn check_edge(edge: usize) -> Result<()> {
    if edge >= N_EDGES {
        return Err(invalid(format!("edge {edge} out of range")));
    }
    Ok(())
}

/// K_0 = |0⟩⟨0| + √(1-γ) Σ|i⟩⟨i|, K_i = √γ |0⟩⟨i| on one edge.
pub fn amplitude_damping_channel(rho: &DensityMatrix, edge: usize, gamma: f64) -> Result<DensityMatrix> {
    check_rate(gamma)?;
    check_edge(edge)?;
    let r = &rho.rho;
    let stride = edge_stride(edge);
    let keep = (1.0 - gamma).sqrt();
    let mut out = zeros(DIM, DIM);
    for col in 0..DIM {
        let yc = digits(col)[edge];
        let sc = if yc == 0 { 1.0 } else { keep };
        for row in 0..DIM {
            let yr = digits(row)[edge];
            let sr = if yr == 0 { 1.0 } else { keep };
            let mut v = r[(row, col)] * cr(sr * sc);
            if yr == 0 && yc == 0 && gamma > 0.0 {
                let mut decay = cr(0.0);
                for x in 1..EDGE_DIM {
                    decay += r[(row + x * stride, col + x * stride)];
                }
                v += decay * cr(gamma);
            }
            out[(row, col)] = v;
        }
    }
    Ok(DensityMatrix::from_raw(out))
}

/// The noise channel on e0, e1, e2, e3 in that order.
pub fn apply_noise_all_edges(rho: &DensityMatrix, spec: &NoiseSpec) -> Result<DensityMatrix> {
    apply_noise_edges(rho, spec, &[0, 1, 2, 3])
}

pub fn apply_noise_edges(rho: &DensityMatrix, spec: &NoiseSpec, order: &[usize]) -> Result<DensityMatrix> {
    let mut cur = rho.clone();
    for &e in order {
        cur = match spec.kind {
            NoiseKind::Depolarizing => depolarizing_channel(&cur, e, spec.rate)?,
            NoiseKind::AmplitudeDamping => amplitude_damping_channel(&cur, e, spec.rate)?,
        };
    }
    Ok(cur)
}

/// ⟨ψ|ρ|ψ⟩.
pub fn fidelity(rho: &DensityMatrix, psi: &[c64]) -> Result<f64> {
    if psi.len() != DIM {
        return Err(Error::DimensionMismatch { expected: DIM, actual: psi.len() });
    }
    let mut acc = cr(0.0);
    for c in 0..DIM {
        if psi[c] == cr(0.0) {
            continue;
        }
        let mut col = cr(0.0);
        for r in 0..DIM {
            col += psi[r].conj() * rho.rho[(r, c)];
        }
        acc += col * psi[c];
    }
    Ok(acc.re)
}

/// exp(-iH_E dt)·exp(-iH_B dt): the magnetic factor acts on kets first.
pub fn trotter_unitary(h: &HamiltonianPair, dt: f64) -> Result<CMatrix> {
    let ue = diagonal_expm(&h.electric, dt)?;
    let ub = herm_expm(&h.magnetic, dt)?;
    Ok(scale_rows(&ub, &ue))
}

// H_E is diagonal; exponentiate entrywise.
fn diagonal_expm(h: &CMatrix, t: f64) -> Result<Vec<c64>> {
    let n = h.nrows();
    for c in 0..n {
        for r in 0..n {
            if r != c && h[(r, c)] != cr(0.0) {
                return Err(invalid("electric Hamiltonian must be diagonal"));
            }
        }
    }
    Ok((0..n).map(|i| c64::cis(-h[(i, i)].re * t)).collect())
}

fn scale_rows(m: &CMatrix, d: &[c64]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| d[r] * m[(r, c)])
}

/// Cached Hamiltonians and one-step unitary for a Trotter configuration.
#[derive(Clone, Debug)]
pub struct EvolutionContext {
    pub config: TrotterConfig,
    pub hamiltonians: HamiltonianPair,
    step: CMatrix,
    step_adj: CMatrix,
}

impl EvolutionContext {
    pub fn new(config: TrotterConfig) -> Result<Self> {
        let hamiltonians = HamiltonianPair::new(config.g2)?;
        let step = trotter_unitary(&hamiltonians, config.dt())?;
        let step_adj = adjoint(&step);
        Ok(Self { config, hamiltonians, step, step_adj })
    }

    pub fn step_unitary(&self) -> &CMatrix {
        &self.step
    }

    pub fn trotter_step(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_raw(&self.step * &rho.rho * &self.step_adj)
    }

    pub fn evolve_state(&self, psi: &[c64]) -> Vec<c64> {
        let n = psi.len();
        (0..n).map(|r| (0..n).map(|c| self.step[(r, c)] * psi[c]).sum()).collect()
    }
}

pub fn trotter_step(rho: &DensityMatrix, ctx: &EvolutionContext) -> DensityMatrix {
    ctx.trotter_step(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, unitarity_error};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn ctx() -> &'static EvolutionContext {
        static C: OnceLock<EvolutionContext> = OnceLock::new();
        C.get_or_init(|| EvolutionContext::new(TrotterConfig::default()).unwrap())
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        &a + a.adjoint()
    }

    fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
        // mixture of a few random pure states
        let mut rho = zeros(DIM, DIM);
        for w in [0.5, 0.3, 0.2] {
            let psi: Vec<c64> = (0..DIM).map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let n: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
            rho += CMatrix::from_fn(DIM, DIM, |r, c| psi[r] * psi[c].conj() * cr(w / n));
        }
        DensityMatrix::from_raw(rho)
    }

    #[test]
    fn expm_basics() {
        assert!(max_abs_diff(&herm_expm(&zeros(4, 4), 1.3).unwrap(), &identity(4)) < 1e-15);
        let d = crate::linalg::diag_real(&[0.5, -1.0, 2.0]);
        let u = herm_expm(&d, 0.7).unwrap();
        for (i, l) in [0.5, -1.0, 2.0].into_iter().enumerate() {
            assert!((u[(i, i)] - c64::cis(-l * 0.7)).norm() < 1e-14);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(10, &mut rng);
        let (a, b) = (herm_expm(&h, 0.3).unwrap(), herm_expm(&h, 0.9).unwrap());
        assert!(max_abs_diff(&(&a * &b), &herm_expm(&h, 1.2).unwrap()) < 1e-9);
        assert!(unitarity_error(&a) < 1e-9);
        let bad = CMatrix::from_fn(3, 3, |r, c| cr((r * 3 + c) as f64));
        assert!(herm_expm(&bad, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrotterConfig::new(1.0, 3.0, 0).is_err());
        assert!(TrotterConfig::new(1.0, -1.0, 3).is_err());
        assert!((TrotterConfig::default().dt() - 0.1).abs() < 1e-15);
        assert!(NoiseSpec::new(NoiseKind::Depolarizing, 1.5).is_err());
        assert_eq!("amplitude-damping".parse::<NoiseKind>().unwrap(), NoiseKind::AmplitudeDamping);
        assert!("bitflip".parse::<NoiseKind>().is_err());
    }

    #[test]
    fn noiseless_trotter_preserves_purity() {
        let c = ctx();
        assert!(unitarity_error(c.step_unitary()) < 1e-9);
        let mut rho = DensityMatrix::vacuum();
        for _ in 0..3 {
            rho = c.trotter_step(&rho);
        }
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.trace() - cr(1.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_time_step_is_identity() {
        let h = HamiltonianPair::new(1.0).unwrap();
        let u = trotter_unitary(&h, 0.0).unwrap();
        assert!(max_abs_diff(&u, &identity(DIM)) < 1e-12);
    }

    #[test]
    fn trotter_error_is_second_order() {
        let h = &ctx().hamiltonians;
        let exact = SpectralCache::new(&h.total()).unwrap();
        let err = |dt: f64| max_abs(&(trotter_unitary(h, dt).unwrap() - exact.unitary(dt)));
        let (e1, e2) = (err(0.1), err(0.05));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn depolarizing_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_state(&mut rng);
        let same = depolarizing_channel(&rho, 2, 0.0).unwrap();
        assert!(max_abs_diff(same.matrix(), rho.matrix()) < 1e-15);
        let mm = DensityMatrix::maximally_mixed();
        let out = depolarizing_channel(&mm, 1, 0.37).unwrap();
        assert!(max_abs_diff(out.matrix(), mm.matrix()) < 1e-12);
        // p = 1 on the vacuum: the edge marginal becomes 1/5
        let v = depolarizing_channel(&DensityMatrix::vacuum(), 3, 1.0).unwrap();
        for x in 0..5 {
            assert!((v.matrix()[(x, x)].re - 0.2).abs() < 1e-15);
        }
        let spec = NoiseSpec::new(NoiseKind::Depolarizing, 0.2).unwrap();
        let fwd = apply_noise_edges(&rho, &spec, &[0, 1, 2, 3]).unwrap();
        let bwd = apply_noise_edges(&rho, &spec, &[3, 2, 1, 0]).unwrap();
        assert!(max_abs_diff(fwd.matrix(), bwd.matrix()) < 1e-12);
        assert!((fwd.trace() - cr(1.0)).norm() < 1e-12);
        assert!(depolarizing_channel(&rho, 0, -0.1).is_err());
        assert!(depolarizing_channel(&rho, 4, 0.1).is_err());
    }

    #[test]
    fn depolarizing_matches_partial_trace_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random_state(&mut rng);
        let p = 0.3;
        for edge in [0, 2] {
            // (1-p)ρ + p/5 Σ_{x,y} |x⟩⟨y| ρ |y⟩⟨x| in Kraus-like form
            let mut want = crate::linalg::scale(rho.matrix(), cr(1.0 - p));
            for x in 0..5 {
                for y in 0..5 {
                    let mut a = zeros(5, 5);
                    a[(x, y)] = cr(1.0);
                    want += crate::linalg::scale(&edge_sandwich(rho.matrix(), edge, &a, &a), cr(p / 5.0));
                }
            }
            let got = depolarizing_channel(&rho, edge, p).unwrap();
            assert!(max_abs_diff(got.matrix(), &want) < 1e-13);
        }
    }

    #[test]
    fn amplitude_damping_properties() {
        let k = amplitude_damping_kraus(0.3).unwrap();
        assert!(k.completeness_error() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_state(&mut rng);
        for edge in [0, 3] {
            let want = k.apply_on_edge(rho.matrix(), edge).unwrap();
            let got = amplitude_damping_channel(&rho, edge, 0.3).unwrap();
            assert!(max_abs_diff(got.matrix(), &want) < 1e-13);
        }
        let same = amplitude_damping_channel(&rho, 1, 0.0).unwrap();
        assert!(max_abs_diff(same.matrix(), rho.matrix()) < 1e-15);
        let spec = NoiseSpec::new(NoiseKind::AmplitudeDamping, 1.0).unwrap();
        let out = apply_noise_all_edges(&rho, &spec).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityMatrix::vacuum().matrix()) < 1e-12);
        assert!(amplitude_damping_channel(&rho, 0, 1.01).is_err());
    }

    #[test]
    fn full_decay_on_one_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = random_state(&mut rng);
        let out = amplitude_damping_channel(&rho, 1, 1.0).unwrap();
        for col in 0..DIM {
            for row in 0..DIM {
                if digits(row)[1] != 0 || digits(col)[1] != 0 {
                    assert_eq!(out.matrix()[(row, col)], cr(0.0));
                }
            }
        }
    }

    #[test]
    fn kraus_channel_validation() {
        assert!(KrausChannel::new(vec![]).is_err());
        assert!(KrausChannel::new(vec![crate::linalg::scale(&identity(2), cr(0.9))]).is_err());
        let ch = KrausChannel::new(vec![identity(3)]).unwrap();
        assert!(ch.apply_on_edge(&identity(DIM), 0).is_err());
        let big = kron(&identity(2), &identity(2));
        assert_eq!(KrausChannel::new(vec![big]).unwrap().dim(), 4);
    }

    #[test]
    fn fidelity_limits() {
        let vac = crate::lattice::vacuum_state();
        assert!((fidelity(&DensityMatrix::vacuum(), &vac).unwrap() - 1.0).abs() < 1e-15);
        assert!((fidelity(&DensityMatrix::maximally_mixed(), &vac).unwrap() - 1.0 / 625.0).abs() < 1e-15);
        let mut other = vec![cr(0.0); DIM];
        other[7] = cr(1.0);
        assert_eq!(fidelity(&DensityMatrix::vacuum(), &other).unwrap(), 0.0);
        assert!(DensityMatrix::pure(&[cr(1.0)]).is_err());
    }

    #[test]
    fn hygiene_flags_bad_states() {
        let good = DensityMatrix::vacuum().hygiene().unwrap();
        assert!(good.within(1e-12, 1e-12, -1e-8));
        let mut m = identity(DIM);
        m[(0, 0)] = cr(-1.0);
        assert!(DensityMatrix::new(m).is_err());
    }
}
