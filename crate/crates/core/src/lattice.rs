//! Single-plaquette geometry and the vertex representation theory on it.
//!
//! Edges e_k run v_k → v_{k+1}; the product space is e0 ⊗ e1 ⊗ e2 ⊗ e3 with e0
//! the most significant digit. Each edge is truncated at j_max = 1/2, giving
//! the 5-state Wigner basis |0,0,0⟩, |½,m,n⟩ with (m,n) ascending.

use std::collections::BTreeMap;

use faer::c64;

use crate::error::{Error, Result};
use crate::linalg::{cr, eigh, kron, zeros, CMatrix, SparseMatrix, I};
use crate::su2::{spin_matrices, wigner_d, Axis, GroupElement, SpinLabel};

pub const N_EDGES: usize = 4;
pub const N_VERTICES: usize = 4;
pub const EDGE_DIM: usize = 5;
pub const DIM: usize = 625;
const PAIR_DIM: usize = EDGE_DIM * EDGE_DIM;

/// |j, m, n⟩ on one edge, doubled quantum numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WignerIndex {
    pub j: SpinLabel,
    pub twice_m: i32,
    pub twice_n: i32,
}

impl WignerIndex {
    pub fn is_excited(&self) -> bool {
        self.j.twice() > 0
    }
}

/// Σ_{j ≤ j_max} (2j+1)², j in half-integer steps.
pub fn edge_dimension(j_max: SpinLabel) -> usize {
    (0..=j_max.twice() as usize).map(|t| (t + 1) * (t + 1)).sum()
}

/// Wigner labels ordered by j, then m, then n, all ascending.
pub fn edge_basis(j_max: SpinLabel) -> Vec<WignerIndex> {
    let mut out = Vec::with_capacity(edge_dimension(j_max));
    for tj in 0..=j_max.twice() {
        let j = SpinLabel::from_twice(tj);
        for tm in j.twice_ms() {
            for tn in j.twice_ms() {
                out.push(WignerIndex { j, twice_m: tm, twice_n: tn });
            }
        }
    }
    out
}

fn plaquette_edge_basis() -> [WignerIndex; EDGE_DIM] {
    let b = edge_basis(SpinLabel::HALF);
    std::array::from_fn(|k| b[k])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlaquetteGeometry;

impl PlaquetteGeometry {
    /// (source, target) of edge e.
    pub fn endpoints(e: usize) -> (usize, usize) {
        (e, (e + 1) % N_VERTICES)
    }

    pub fn out_edge(v: usize) -> usize {
        v
    }

    pub fn in_edge(v: usize) -> usize {
        (v + N_EDGES - 1) % N_EDGES
    }

    /// The two edges not touching v, ascending.
    pub fn other_edges(v: usize) -> [usize; 2] {
        let (o, i) = (Self::out_edge(v), Self::in_edge(v));
        let mut it = (0..N_EDGES).filter(|&e| e != o && e != i);
        [it.next().unwrap(), it.next().unwrap()]
    }
}

pub fn digits(index: usize) -> [usize; N_EDGES] {
    [index / 125, (index / 25) % 5, (index / 5) % 5, index % 5]
}

pub fn index_of(d: [usize; N_EDGES]) -> usize {
    ((d[0] * 5 + d[1]) * 5 + d[2]) * 5 + d[3]
}

pub fn vacuum_state() -> Vec<c64> {
    let mut v = vec![cr(0.0); DIM];
    v[0] = cr(1.0);
    v
}

/// Identity on every edge except `edge`.
pub fn embed_edge_operator(op: &CMatrix, edge: usize) -> Result<CMatrix> {
    if op.nrows() != EDGE_DIM || op.ncols() != EDGE_DIM {
        return Err(Error::DimensionMismatch { expected: EDGE_DIM, actual: op.nrows().max(op.ncols()) });
    }
    if edge >= N_EDGES {
        return Err(crate::error::invalid(format!("edge {edge} out of range")));
    }
    let id = crate::linalg::identity(EDGE_DIM);
    let f: Vec<&CMatrix> = (0..N_EDGES).map(|e| if e == edge { op } else { &id }).collect();
    Ok(kron(&kron(f[0], f[1]), &kron(f[2], f[3])))
}

fn pair_index(d: &[usize; N_EDGES], v: usize) -> usize {
    d[PlaquetteGeometry::out_edge(v)] * EDGE_DIM + d[PlaquetteGeometry::in_edge(v)]
}

fn with_pair(mut d: [usize; N_EDGES], v: usize, p: usize) -> usize {
    d[PlaquetteGeometry::out_edge(v)] = p / EDGE_DIM;
    d[PlaquetteGeometry::in_edge(v)] = p % EDGE_DIM;
    index_of(d)
}

/// Lifts an operator on (out-edge ⊗ in-edge) of v to the full space.
pub fn embed_vertex_operator(op: &CMatrix, v: usize) -> CMatrix {
    embed_vertex_operator_sparse(op, v).to_dense()
}

pub fn embed_vertex_operator_sparse(op: &CMatrix, v: usize) -> SparseMatrix {
    assert_eq!((op.nrows(), op.ncols()), (PAIR_DIM, PAIR_DIM));
    let mut trip = Vec::new();
    for col in 0..DIM {
        let d = digits(col);
        let p = pair_index(&d, v);
        for q in 0..PAIR_DIM {
            let x = op[(q, p)];
            if x != cr(0.0) {
                trip.push((with_pair(d, v, q), col, x));
            }
        }
    }
    SparseMatrix::from_triplets(DIM, DIM, &trip)
}

/// Single-edge left generator: -J_a* on the m index.
pub fn edge_left_generator(a: Axis) -> CMatrix {
    edge_spin_op(|j, r, c| -spin_matrices(j).axis(a)[(r, c)].conj(), true)
}

/// Single-edge right generator: J_a on the n index.
pub fn edge_right_generator(a: Axis) -> CMatrix {
    edge_spin_op(|j, r, c| spin_matrices(j).axis(a)[(r, c)], false)
}

// Builds a 5×5 edge operator acting within each j block on either the m index
// (n held fixed) or the n index (m held fixed).
fn edge_spin_op(f: impl Fn(SpinLabel, usize, usize) -> c64, on_m: bool) -> CMatrix {
    let b = plaquette_edge_basis();
    let mut out = zeros(EDGE_DIM, EDGE_DIM);
    for (c, sc) in b.iter().enumerate() {
        for (r, sr) in b.iter().enumerate() {
            if sr.j != sc.j {
                continue;
            }
            let (act_r, act_c, keep_r, keep_c) = if on_m {
                (sr.twice_m, sc.twice_m, sr.twice_n, sc.twice_n)
            } else {
                (sr.twice_n, sc.twice_n, sr.twice_m, sc.twice_m)
            };
            if keep_r != keep_c {
                continue;
            }
            let (ir, ic) = (sr.j.index_of(act_r).unwrap(), sr.j.index_of(act_c).unwrap());
            out[(r, c)] = f(sr.j, ir, ic);
        }
    }
    out
}

/// G_a on the out ⊗ in pair space of a vertex (same for every vertex).
pub fn pair_generator(a: Axis) -> CMatrix {
    let id = crate::linalg::identity(EDGE_DIM);
    kron(&edge_left_generator(a), &id) + kron(&id, &edge_right_generator(a))
}

pub fn pair_casimir() -> CMatrix {
    Axis::ALL.iter().fold(zeros(PAIR_DIM, PAIR_DIM), |acc, &a| {
        let g = pair_generator(a);
        acc + &g * &g
    })
}

pub fn gauge_generator(v: usize, a: Axis) -> CMatrix {
    embed_vertex_operator(&pair_generator(a), v)
}

pub fn casimir(v: usize) -> CMatrix {
    embed_vertex_operator(&pair_casimir(), v)
}

/// conj(π_j(g)) on m of the out-edge and π_j(g) on n of the in-edge, as a pair operator.
pub fn pair_gauge_action(g: &GroupElement) -> CMatrix {
    let b = plaquette_edge_basis();
    let d: Vec<CMatrix> = (0..=1).map(|tj| wigner_d(SpinLabel::from_twice(tj), g)).collect();
    let mut out_op = zeros(EDGE_DIM, EDGE_DIM);
    let mut in_op = zeros(EDGE_DIM, EDGE_DIM);
    for (c, sc) in b.iter().enumerate() {
        for (r, sr) in b.iter().enumerate() {
            if sr.j != sc.j {
                continue;
            }
            let dj = &d[sr.j.twice() as usize];
            let j = sr.j;
            if sr.twice_n == sc.twice_n {
                out_op[(r, c)] = dj[(j.index_of(sr.twice_m).unwrap(), j.index_of(sc.twice_m).unwrap())].conj();
            }
            if sr.twice_m == sc.twice_m {
                in_op[(r, c)] = dj[(j.index_of(sr.twice_n).unwrap(), j.index_of(sc.twice_n).unwrap())];
            }
        }
    }
    kron(&out_op, &in_op)
}

pub fn gauge_action(v: usize, g: &GroupElement) -> CMatrix {
    embed_vertex_operator(&pair_gauge_action(g), v)
}

pub fn gauge_action_sparse(v: usize, g: &GroupElement) -> SparseMatrix {
    embed_vertex_operator_sparse(&pair_gauge_action(g), v)
}

/// Quantum numbers left untouched by the gauge action at a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpectatorKey {
    pub twice_j_out: u32,
    pub twice_j_in: u32,
    pub twice_n_out: i32,
    pub twice_m_in: i32,
    /// Edge-basis indices of the two edges not at the vertex.
    pub others: [usize; 2],
}

impl SpectatorKey {
    fn of(index: usize, v: usize) -> Self {
        let b = plaquette_edge_basis();
        let d = digits(index);
        let (o, i) = (b[d[PlaquetteGeometry::out_edge(v)]], b[d[PlaquetteGeometry::in_edge(v)]]);
        let oe = PlaquetteGeometry::other_edges(v);
        Self {
            twice_j_out: o.j.twice(),
            twice_j_in: i.j.twice(),
            twice_n_out: o.twice_n,
            twice_m_in: i.twice_m,
            others: [d[oe[0]], d[oe[1]]],
        }
    }

    /// Ordering used when assigning multiplicity labels.
    fn pairing_order(&self) -> (u32, u32, i32, i32, [usize; 2]) {
        (self.twice_j_in, self.twice_j_out, self.twice_n_out, self.twice_m_in, self.others)
    }

    // Agreement score between a copy and a candidate singlet.
    fn agreement(&self, s: &SpectatorKey) -> (usize, usize) {
        let others = self.others.iter().zip(&s.others).filter(|(a, b)| a == b).count();
        let mut score = 0;
        score += usize::from(self.twice_j_out == s.twice_j_out);
        score += usize::from(self.twice_j_in == s.twice_j_in);
        let out_excited = self.twice_j_out > 0 && s.twice_j_out > 0;
        let in_excited = self.twice_j_in > 0 && s.twice_j_in > 0;
        score += usize::from(out_excited && self.twice_n_out == s.twice_n_out);
        score += usize::from(in_excited && self.twice_m_in == s.twice_m_in);
        (others, score)
    }
}

/// One basis vector |J, M, α⟩ at a vertex.
#[derive(Clone, Debug)]
pub struct CgEntry {
    pub j: SpinLabel,
    pub twice_m: i32,
    /// Multiplicity label shared with the paired singlet.
    pub alpha: usize,
    /// Index of the irreducible copy (raising chain) this vector belongs to.
    pub copy: usize,
    pub key: SpectatorKey,
    /// Nonzero amplitudes as (global index, value).
    pub support: Vec<(usize, c64)>,
}

impl CgEntry {
    pub fn to_dense(&self) -> Vec<c64> {
        let mut v = vec![cr(0.0); DIM];
        for &(i, x) in &self.support {
            v[i] = x;
        }
        v
    }

    /// ⟨self|ρ|self⟩ restricted to the support.
    pub fn expectation(&self, rho: &CMatrix) -> f64 {
        let mut acc = cr(0.0);
        for &(i, a) in &self.support {
            for &(k, b) in &self.support {
                acc += a.conj() * rho[(i, k)] * b;
            }
        }
        acc.re
    }

    pub fn overlap(&self, psi: &[c64]) -> c64 {
        self.support.iter().map(|&(i, a)| a.conj() * psi[i]).sum()
    }
}

#[derive(Clone, Debug)]
pub struct VertexCgBasis {
    pub vertex: usize,
    pub entries: Vec<CgEntry>,
    /// μ_J keyed by 2J.
    pub multiplicities: BTreeMap<u32, usize>,
}

impl VertexCgBasis {
    pub fn sector(&self, j: SpinLabel) -> impl Iterator<Item = &CgEntry> {
        self.entries.iter().filter(move |e| e.j == j)
    }

    pub fn multiplicity(&self, j: SpinLabel) -> usize {
        self.multiplicities.get(&j.twice()).copied().unwrap_or(0)
    }

    pub fn spins(&self) -> Vec<SpinLabel> {
        self.multiplicities.keys().map(|&t| SpinLabel::from_twice(t)).collect()
    }

    /// Columns are the basis vectors in entry order.
    pub fn to_matrix(&self) -> CMatrix {
        let mut m = zeros(DIM, self.entries.len());
        for (c, e) in self.entries.iter().enumerate() {
            for &(i, x) in &e.support {
                m[(i, c)] = x;
            }
        }
        m
    }
}

const CLUSTER_TOL: f64 = 1e-8;

/// Simultaneous eigenbasis of C^(v) and G_z^(v) with raising-chain phases and
/// spectator-preserving multiplicity labels.
pub fn build_cg_basis(v: usize) -> Result<VertexCgBasis> {
    if v >= N_VERTICES {
        return Err(crate::error::invalid(format!("vertex {v} out of range")));
    }
    let cas = pair_casimir();
    let gz = pair_generator(Axis::Z);
    let gp = pair_generator(Axis::X) + crate::linalg::scale(&pair_generator(Axis::Y), I);

    let mut blocks: BTreeMap<SpectatorKey, Vec<usize>> = BTreeMap::new();
    for idx in 0..DIM {
        blocks.entry(SpectatorKey::of(idx, v)).or_default().push(idx);
    }

    struct Copy {
        j: SpinLabel,
        key: SpectatorKey,
        chain: Vec<Vec<(usize, c64)>>,
    }
    let mut copies: Vec<Copy> = Vec::new();
    for (key, ids) in &blocks {
        let pairs: Vec<usize> = ids.iter().map(|&i| pair_index(&digits(i), v)).collect();
        let n = ids.len();
        let cb = CMatrix::from_fn(n, n, |r, c| cas[(pairs[r], pairs[c])]);
        let zb = CMatrix::from_fn(n, n, |r, c| gz[(pairs[r], pairs[c])]);
        let pb = CMatrix::from_fn(n, n, |r, c| gp[(pairs[r], pairs[c])]);
        let (w, u) = eigh(&cb)?;
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (w[end] - w[start]).abs() < CLUSTER_TOL {
                end += 1;
            }
            let c = w[start..end].iter().sum::<f64>() / (end - start) as f64;
            let tj = ((-1.0 + (1.0 + 4.0 * c).sqrt()).round().max(0.0)) as u32;
            let j = SpinLabel::from_twice(tj);
            if (j.casimir() - c).abs() > CLUSTER_TOL {
                return Err(Error::NumericalFailure(format!(
                    "Casimir eigenvalue {c} at vertex {v} matches no J(J+1)"
                )));
            }
            let sub = u.subcols(start, end - start).to_owned();
            let zsub = sub.adjoint() * &zb * &sub;
            let (zw, zu) = eigh(&zsub)?;
            let n_copies = (end - start) / j.dim();
            if n_copies * j.dim() != end - start {
                return Err(Error::NumericalFailure(format!(
                    "J={j} cluster of size {} at vertex {v} is not a whole number of multiplets",
                    end - start
                )));
            }
            for k in 0..n_copies {
                if (zw[k] + j.value()).abs() > CLUSTER_TOL {
                    return Err(Error::NumericalFailure(format!("lowest weight {} is not -J for J={j}", zw[k])));
                }
                let lw_coeff = zu.col(k).to_owned();
                let mut vec: Vec<c64> = (0..n).map(|r| (0..sub.ncols()).map(|c| sub[(r, c)] * lw_coeff[c]).sum()).collect();
                fix_phase(&mut vec);
                let mut chain = Vec::with_capacity(j.dim());
                let mut m = -j.value();
                loop {
                    chain.push(
                        vec.iter()
                            .enumerate()
                            .filter(|(_, x)| x.norm() > 1e-14)
                            .map(|(r, &x)| (ids[r], x))
                            .collect(),
                    );
                    if m >= j.value() - 1e-9 {
                        break;
                    }
                    let norm = (j.casimir() - m * (m + 1.0)).sqrt();
                    vec = (0..n).map(|r| (0..n).map(|c| pb[(r, c)] * vec[c]).sum::<c64>() / cr(norm)).collect();
                    m += 1.0;
                }
                copies.push(Copy { j, key: *key, chain });
            }
            start = end;
        }
    }

    let alphas = assign_alphas(copies.iter().map(|c| (c.j, c.key)).collect());
    let mut entries = Vec::with_capacity(DIM);
    let mut multiplicities = BTreeMap::new();
    for (ci, copy) in copies.into_iter().enumerate() {
        *multiplicities.entry(copy.j.twice()).or_insert(0) += 1;
        for (k, support) in copy.chain.into_iter().enumerate() {
            entries.push(CgEntry {
                j: copy.j,
                twice_m: 2 * k as i32 - copy.j.twice() as i32,
                alpha: alphas[ci],
                copy: ci,
                key: copy.key,
                support,
            });
        }
    }
    entries.sort_by_key(|e| (e.j, e.alpha, e.twice_m));
    Ok(VertexCgBasis { vertex: v, entries, multiplicities })
}

// First component of (numerically) maximal magnitude made real positive.
fn fix_phase(vec: &mut [c64]) {
    let max = vec.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if let Some(x) = vec.iter().find(|x| x.norm() >= max - 1e-12) {
        let ph = x.conj() / x.norm();
        for y in vec.iter_mut() {
            *y *= ph;
        }
    }
}

/// Multiplicity labels. Singlets are numbered in pairing order; every other
/// copy greedily takes the free singlet that keeps the most spectator data.
fn assign_alphas(copies: Vec<(SpinLabel, SpectatorKey)>) -> Vec<usize> {
    let mut singlets: Vec<usize> = (0..copies.len()).filter(|&i| copies[i].0 == SpinLabel::ZERO).collect();
    singlets.sort_by_key(|&i| copies[i].1.pairing_order());
    let mut alpha = vec![usize::MAX; copies.len()];
    for (a, &i) in singlets.iter().enumerate() {
        alpha[i] = a;
    }
    let mut spins: Vec<SpinLabel> = copies.iter().map(|c| c.0).filter(|j| *j != SpinLabel::ZERO).collect();
    spins.sort();
    spins.dedup();
    for j in spins {
        let mut members: Vec<usize> = (0..copies.len()).filter(|&i| copies[i].0 == j).collect();
        members.sort_by_key(|&i| copies[i].1.pairing_order());
        let mut free = vec![true; singlets.len()];
        let mut overflow = singlets.len();
        for i in members {
            let key = &copies[i].1;
            let best = (0..singlets.len())
                .filter(|&s| free[s])
                .max_by(|&a, &b| {
                    let ka = key.agreement(&copies[singlets[a]].1);
                    let kb = key.agreement(&copies[singlets[b]].1);
                    ka.cmp(&kb).then(b.cmp(&a))
                });
            match best {
                Some(s) => {
                    free[s] = false;
                    alpha[i] = s;
                }
                None => {
                    alpha[i] = overflow;
                    overflow += 1;
                }
            }
        }
    }
    alpha
}

/// Π_0^(v): projector onto the J = 0 sector.
pub fn singlet_projector(basis: &VertexCgBasis) -> CMatrix {
    let mut p = zeros(DIM, DIM);
    for e in basis.sector(SpinLabel::ZERO) {
        for &(i, a) in &e.support {
            for &(k, b) in &e.support {
                p[(i, k)] += a * b.conj();
            }
        }
    }
    p
}

/// Common null space of the four vertex Casimirs, as orthonormal columns.
pub fn physical_subspace() -> Result<CMatrix> {
    let total = (0..N_VERTICES).fold(zeros(DIM, DIM), |acc, v| acc + casimir(v));
    let (w, u) = eigh(&total)?;
    let k = w.iter().take_while(|x| x.abs() < 1e-8).count();
    Ok(u.subcols(0, k).to_owned())
}

pub fn physical_subspace_dimension() -> Result<usize> {
    Ok(physical_subspace()?.ncols())
}
