//! Kogut-Susskind Hamiltonian on the truncated plaquette.

use faer::c64;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::lattice::{embed_edge_operator, DIM, EDGE_DIM, N_EDGES};
use crate::linalg::{cr, diag_real, kron, scale, zeros, CMatrix};
use crate::su2::{clebsch_gordan, haar_sample, wigner_d, GroupElement, SpinLabel};

/// Electric energy on one edge: g²/2 · j(j+1).
pub fn edge_electric(g2: f64) -> CMatrix {
    let b = crate::lattice::edge_basis(SpinLabel::HALF);
    let d: Vec<f64> = b.iter().map(|w| g2 / 2.0 * w.j.casimir()).collect();
    diag_real(&d)
}

pub fn electric_hamiltonian(g2: f64) -> Result<CMatrix> {
    check_coupling(g2)?;
    let he = edge_electric(g2);
    let mut out = zeros(DIM, DIM);
    for e in 0..N_EDGES {
        out += embed_edge_operator(&he, e)?;
    }
    Ok(out)
}

fn check_coupling(g2: f64) -> Result<()> {
    if !(g2 > 0.0 && g2.is_finite()) {
        return Err(invalid(format!("coupling g² = {g2} must be positive")));
    }
    Ok(())
}

/// T[a][b] is the 5×5 matrix ⟨I'|g_ab|I⟩ for one link, a, b indexing the
/// fundamental (0 = -1/2, 1 = +1/2).
#[derive(Clone, Debug)]
pub struct EdgeTensor {
    pub t: [[CMatrix; 2]; 2],
}

pub fn edge_tensor() -> Result<EdgeTensor> {
    let basis = crate::lattice::edge_basis(SpinLabel::HALF);
    let mut t: [[CMatrix; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| zeros(EDGE_DIM, EDGE_DIM)));
    for (ia, ta) in [-1i32, 1].into_iter().enumerate() {
        for (ib, tb) in [-1i32, 1].into_iter().enumerate() {
            for (c, s) in basis.iter().enumerate() {
                for (r, sp) in basis.iter().enumerate() {
                    // selection rules, enforced structurally
                    if sp.twice_m != ta + s.twice_m || sp.twice_n != tb + s.twice_n {
                        continue;
                    }
                    let (tj, tjp) = (s.j.twice(), sp.j.twice());
                    if tjp + 1 < tj || tjp > tj + 1 || (tjp + tj + 1) % 2 != 0 {
                        continue;
                    }
                    let (dj, djp) = (s.j.dim() as f64, sp.j.dim() as f64);
                    let c1 = clebsch_gordan(1, ta, tj, s.twice_m, tjp, sp.twice_m)?;
                    let c2 = clebsch_gordan(1, tb, tj, s.twice_n, tjp, sp.twice_n)?;
                    t[ia][ib][(r, c)] = cr((djp * dj).sqrt() * c1 * c2 / djp);
                }
            }
        }
    }
    Ok(EdgeTensor { t })
}

/// tr_{1/2} of the plaquette product of link operators, before the -Re/g² step.
///
/// Contraction order: e0·e1 into a rank-4 intermediate, then e2, then e3
/// closing the trace index.
pub fn plaquette_operator() -> Result<CMatrix> {
    let t = edge_tensor()?.t;
    let x01: [[CMatrix; 2]; 2] = std::array::from_fn(|a| {
        std::array::from_fn(|b1| (0..2).fold(zeros(25, 25), |acc, b0| acc + kron(&t[a][b0], &t[b0][b1])))
    });
    let x012: [[CMatrix; 2]; 2] = std::array::from_fn(|a| {
        std::array::from_fn(|b2| (0..2).fold(zeros(125, 125), |acc, b1| acc + kron(&x01[a][b1], &t[b1][b2])))
    });
    let mut p = zeros(DIM, DIM);
    for a in 0..2 {
        for b2 in 0..2 {
            p += kron(&x012[a][b2], &t[b2][a]);
        }
    }
    Ok(p)
}

/// -(P + P†)/(2g²).
pub fn magnetic_hamiltonian(g2: f64) -> Result<CMatrix> {
    check_coupling(g2)?;
    let p = plaquette_operator()?;
    let herm = &p + p.adjoint();
    Ok(scale(&herm, cr(-0.5 / g2)))
}

#[derive(Clone, Debug)]
pub struct HamiltonianPair {
    pub g2: f64,
    pub electric: CMatrix,
    pub magnetic: CMatrix,
}

impl HamiltonianPair {
    pub fn new(g2: f64) -> Result<Self> {
        Ok(Self { g2, electric: electric_hamiltonian(g2)?, magnetic: magnetic_hamiltonian(g2)? })
    }

    pub fn total(&self) -> CMatrix {
        &self.electric + &self.magnetic
    }
}

/// Sampled estimate of the plaquette trace matrix.
///
/// Each link gets its own pool of `n_samples` Haar draws. Per link the
/// estimator averages g_ab · conj(φ_{I'}(g)) φ_I(g) with φ_I = √d_j D^j_mn;
/// the four link estimates are then closed cyclically over the fundamental
/// indices. Link pools are drawn from `rng` in edge order e0..e3.
pub fn haar_mc_oracle<R: Rng + ?Sized>(n_samples: usize, rng: &mut R) -> Result<CMatrix> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be positive"));
    }
    let basis = crate::lattice::edge_basis(SpinLabel::HALF);
    let mut link_means: Vec<[[[[c64; EDGE_DIM]; EDGE_DIM]; 2]; 2]> = Vec::with_capacity(N_EDGES);
    for _ in 0..N_EDGES {
        let mut acc = [[[[cr(0.0); EDGE_DIM]; EDGE_DIM]; 2]; 2];
        for _ in 0..n_samples {
            let g = haar_sample(rng);
            let phi = wigner_functions(&basis, &g);
            for (a, row) in acc.iter_mut().enumerate() {
                for (b, m) in row.iter_mut().enumerate() {
                    let gab = g.entry(a, b);
                    for (ip, mrow) in m.iter_mut().enumerate() {
                        let left = phi[ip].conj() * gab;
                        for (i, x) in mrow.iter_mut().enumerate() {
                            *x += left * phi[i];
                        }
                    }
                }
            }
        }
        let inv = cr(1.0 / n_samples as f64);
        for row in acc.iter_mut() {
            for m in row.iter_mut() {
                for mrow in m.iter_mut() {
                    for x in mrow.iter_mut() {
                        *x *= inv;
                    }
                }
            }
        }
        link_means.push(acc);
    }
    let mut out = zeros(DIM, DIM);
    for col in 0..DIM {
        let c = crate::lattice::digits(col);
        for row in 0..DIM {
            let r = crate::lattice::digits(row);
            let mut s = cr(0.0);
            for a in 0..2 {
                for b0 in 0..2 {
                    let x0 = link_means[0][a][b0][r[0]][c[0]];
                    if x0 == cr(0.0) {
                        continue;
                    }
                    for b1 in 0..2 {
                        let x1 = x0 * link_means[1][b0][b1][r[1]][c[1]];
                        for b2 in 0..2 {
                            s += x1 * link_means[2][b1][b2][r[2]][c[2]] * link_means[3][b2][a][r[3]][c[3]];
                        }
                    }
                }
            }
            out[(row, col)] = s;
        }
    }
    Ok(out)
}

fn wigner_functions(basis: &[crate::lattice::WignerIndex], g: &GroupElement) -> Vec<c64> {
    let ds: Vec<CMatrix> = (0..=1).map(|t| wigner_d(SpinLabel::from_twice(t), g)).collect();
    basis
        .iter()
        .map(|w| {
            let d = &ds[w.j.twice() as usize];
            let (m, n) = (w.j.index_of(w.twice_m).unwrap(), w.j.index_of(w.twice_n).unwrap());
            d[(m, n)] * cr((w.j.dim() as f64).sqrt())
        })
        .collect()
}
