//! Error-correction audit at a single coordination-4 vertex with four spin-1/2 edges.
//!
//! Edges are plain spin-1/2 factors (no dualization of incoming edges), coupled
//! as (12)(34) → J. Multiplicity labels are ordered (j12, j34) = (0,0), (1,1)
//! for singlets and (0,1), (1,0), (1,1) for triplets.

use faer::c64;
use faer::linalg::solvers::Solve;

use crate::error::{invalid, Error, Result};
use crate::linalg::{cr, identity, kron, max_abs, max_abs_diff, zeros, CMatrix, I};
use crate::su2::{clebsch_gordan, pauli, spherical_pauli, Axis, SpinLabel};

pub const COORD4_DIM: usize = 16;

#[derive(Clone, Debug)]
pub struct Coord4State {
    pub j12: SpinLabel,
    pub j34: SpinLabel,
    pub j: SpinLabel,
    pub twice_m: i32,
    pub vector: Vec<c64>,
}

#[derive(Clone, Debug)]
pub struct Coord4Basis {
    pub states: Vec<Coord4State>,
}

/// Iterated CG construction of the 16 coupled states.
pub fn coord4_cg_basis() -> Result<Coord4Basis> {
    let mut states = Vec::with_capacity(COORD4_DIM);
    for tj in [0u32, 2, 4] {
        for (t12, t34) in [(0u32, 0u32), (0, 2), (2, 0), (2, 2)] {
            if tj < t12.abs_diff(t34) || tj > t12 + t34 {
                continue;
            }
            let j = SpinLabel::from_twice(tj);
            for tm in j.twice_ms() {
                let mut vector = vec![cr(0.0); COORD4_DIM];
                for (s, x) in vector.iter_mut().enumerate() {
                    let m: [i32; 4] = std::array::from_fn(|q| if (s >> (3 - q)) & 1 == 1 { 1 } else { -1 });
                    let (m12, m34) = (m[0] + m[1], m[2] + m[3]);
                    if m12.unsigned_abs() > t12 || m34.unsigned_abs() > t34 || m12 + m34 != tm {
                        continue;
                    }
                    let c = clebsch_gordan(1, m[0], 1, m[1], t12, m12)?
                        * clebsch_gordan(1, m[2], 1, m[3], t34, m34)?
                        * clebsch_gordan(t12, m12, t34, m34, tj, tm)?;
                    *x = cr(c);
                }
                states.push(Coord4State {
                    j12: SpinLabel::from_twice(t12),
                    j34: SpinLabel::from_twice(t34),
                    j,
                    twice_m: tm,
                    vector,
                });
            }
        }
    }
    Ok(Coord4Basis { states })
}

impl Coord4Basis {
    /// States of sector (J, M) in multiplicity order.
    pub fn sector(&self, j: SpinLabel, twice_m: i32) -> Vec<&Coord4State> {
        self.states.iter().filter(|s| s.j == j && s.twice_m == twice_m).collect()
    }

    pub fn multiplicity(&self, j: SpinLabel) -> usize {
        self.sector(j, -(j.twice() as i32)).len()
    }

    pub fn projector(&self, j: SpinLabel) -> CMatrix {
        let mut p = zeros(COORD4_DIM, COORD4_DIM);
        for s in self.states.iter().filter(|s| s.j == j) {
            for r in 0..COORD4_DIM {
                for c in 0..COORD4_DIM {
                    p[(r, c)] += s.vector[r] * s.vector[c].conj();
                }
            }
        }
        p
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(COORD4_DIM, self.states.len(), |r, c| self.states[c].vector[r])
    }
}

/// A single-qubit error: a Cartesian Pauli or a spherical component O_q.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorOp {
    Pauli(Axis),
    Spherical(i32),
}

impl ErrorOp {
    pub fn matrix(&self) -> Result<CMatrix> {
        match *self {
            ErrorOp::Pauli(a) => Ok(pauli(a)),
            ErrorOp::Spherical(q) => spherical_pauli(q),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ErrorOp::Pauli(a) => format!("{a:?}"),
            ErrorOp::Spherical(q) => format!("O{q:+}"),
        }
    }
}

/// op on edge k, identity on the rest; edge 0 is the most significant qubit.
pub fn edge_operator(op: &CMatrix, k: usize) -> Result<CMatrix> {
    if k >= 4 {
        return Err(invalid(format!("edge {k} out of range")));
    }
    let id = identity(2);
    let f: Vec<&CMatrix> = (0..4).map(|e| if e == k { op } else { &id }).collect();
    Ok(kron(&kron(f[0], f[1]), &kron(f[2], f[3])))
}

/// ‖Π_0 E Π_0‖_max for a single-edge error.
pub fn detection_check(basis: &Coord4Basis, err: ErrorOp, k: usize) -> Result<f64> {
    let e = edge_operator(&err.matrix()?, k)?;
    Ok(sandwich_norm(basis, &e, SpinLabel::ZERO, SpinLabel::ZERO))
}

/// ‖Π_out E Π_in‖_max for an arbitrary 16×16 operator.
pub fn sandwich_norm(basis: &Coord4Basis, e: &CMatrix, out: SpinLabel, inp: SpinLabel) -> f64 {
    max_abs(&(basis.projector(out) * e * basis.projector(inp)))
}

#[derive(Clone, Debug)]
pub struct MultiplicityMap {
    pub edge: usize,
    pub error: ErrorOp,
    pub twice_m: i32,
    /// μ_1 × μ_0.
    pub a: CMatrix,
}

/// A[β, α] = ⟨1,M,β|E_k|0,0,α⟩ divided by the Wigner-Eckart factor ⟨0 0; 1 M|1 M⟩.
pub fn multiplicity_map(basis: &Coord4Basis, err: ErrorOp, k: usize, twice_m: i32) -> Result<MultiplicityMap> {
    if SpinLabel::ONE.index_of(twice_m).is_none() {
        return Err(invalid(format!("target 2M = {twice_m} is not a triplet component")));
    }
    let e = edge_operator(&err.matrix()?, k)?;
    let singlets = basis.sector(SpinLabel::ZERO, 0);
    let triplets = basis.sector(SpinLabel::ONE, twice_m);
    let we = clebsch_gordan(0, 0, 2, twice_m, 2, twice_m)?;
    let a = CMatrix::from_fn(triplets.len(), singlets.len(), |b, al| {
        let t = &triplets[b].vector;
        let s = &singlets[al].vector;
        let mut acc = cr(0.0);
        for r in 0..COORD4_DIM {
            for c in 0..COORD4_DIM {
                acc += t[r].conj() * e[(r, c)] * s[c];
            }
        }
        acc / cr(we)
    });
    Ok(MultiplicityMap { edge: k, error: err, twice_m, a })
}

/// A_a† A_b.
pub fn kl_product(a: &MultiplicityMap, b: &MultiplicityMap) -> Result<CMatrix> {
    if a.twice_m != b.twice_m {
        return Err(invalid(format!("maps target different M sectors ({} vs {})", a.twice_m, b.twice_m)));
    }
    Ok(a.a.adjoint() * &b.a)
}

/// Deviation of A†A from the nearest multiple of the identity.
pub fn kl_diagonal_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mean = crate::linalg::trace(m) / cr(n as f64);
    max_abs_diff(m, &crate::linalg::scale(&identity(n), mean))
}

/// Which ordering of the singlet labels reproduces a published 2×2 product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnOrder {
    /// (0,0) then (1,1).
    Declared,
    /// (1,1) then (0,0).
    Swapped,
}

pub fn match_column_order(product: &CMatrix, published: &CMatrix, tol: f64) -> Option<ColumnOrder> {
    if max_abs_diff(product, published) < tol {
        return Some(ColumnOrder::Declared);
    }
    let swapped = CMatrix::from_fn(2, 2, |r, c| product[(1 - r, 1 - c)]);
    (max_abs_diff(&swapped, published) < tol).then_some(ColumnOrder::Swapped)
}

/// Moore-Penrose inverse of a full-column-rank matrix.
pub fn pinv(a: &CMatrix) -> Result<CMatrix> {
    let g = a.adjoint() * a;
    let sv = crate::linalg::singular_values(a)?;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin < 1e-12 {
        return Err(Error::NumericalFailure("reference map is rank deficient".into()));
    }
    Ok(g.partial_piv_lu().solve(a.adjoint().to_owned()))
}

/// Weights |c_P|²/Σ|c|² of a 2×2 matrix in the standard Pauli basis I, X, Y, Z.
pub fn pauli_weights(b: &CMatrix) -> [f64; 4] {
    let c = [
        (b[(0, 0)] + b[(1, 1)]) * cr(0.5),
        (b[(0, 1)] + b[(1, 0)]) * cr(0.5),
        (b[(0, 1)] - b[(1, 0)]) * I * cr(0.5),
        (b[(0, 0)] - b[(1, 1)]) * cr(0.5),
    ];
    let total: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    c.map(|x| x.norm_sqr() / total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualRow {
    pub label: String,
    /// (I, X, Y, Z).
    pub weights: [f64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualTable {
    pub twice_m: i32,
    pub rows: Vec<ResidualRow>,
}

/// Residual logical action R·A_k with R the pseudoinverse of the reference
/// edge's map, for each of the four edges.
pub fn residual_pauli_weights(basis: &Coord4Basis, err: ErrorOp, twice_m: i32, reference_edge: usize) -> Result<ResidualTable> {
    let reference = multiplicity_map(basis, err, reference_edge, twice_m)?;
    let r = pinv(&reference.a)?;
    let mut rows = Vec::with_capacity(4);
    for k in 0..4 {
        let ak = multiplicity_map(basis, err, k, twice_m)?;
        rows.push(ResidualRow { label: format!("{}_{k}", err.label()), weights: pauli_weights(&(&r * &ak.a)) });
    }
    Ok(ResidualTable { twice_m, rows })
}

/// max ‖E_k Π_0 − Σ A_k[β,α] |1,q,β⟩⟨0,0,α|‖ for a spherical error O_q.
pub fn wigner_eckart_defect(basis: &Coord4Basis, q: i32, k: usize) -> Result<f64> {
    let err = ErrorOp::Spherical(q);
    let e = edge_operator(&err.matrix()?, k)?;
    let full = &e * basis.projector(SpinLabel::ZERO);
    let map = multiplicity_map(basis, err, k, 2 * q)?;
    let singlets = basis.sector(SpinLabel::ZERO, 0);
    let triplets = basis.sector(SpinLabel::ONE, 2 * q);
    let we = clebsch_gordan(0, 0, 2, 2 * q, 2, 2 * q)?;
    let mut rec = zeros(COORD4_DIM, COORD4_DIM);
    for (b, t) in triplets.iter().enumerate() {
        for (a, s) in singlets.iter().enumerate() {
            let w = map.a[(b, a)] * cr(we);
            for r in 0..COORD4_DIM {
                for c in 0..COORD4_DIM {
                    rec[(r, c)] += w * t.vector[r] * s.vector[c].conj();
                }
            }
        }
    }
    Ok(max_abs_diff(&full, &rec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_error;

    fn basis() -> Coord4Basis {
        coord4_cg_basis().unwrap()
    }

    #[test]
    fn coupled_basis_structure() {
        let b = basis();
        assert_eq!(b.states.len(), 16);
        assert!(unitarity_error(&b.to_matrix()) < 1e-12);
        assert_eq!(b.multiplicity(SpinLabel::ZERO), 2);
        assert_eq!(b.multiplicity(SpinLabel::ONE), 3);
        assert_eq!(b.multiplicity(SpinLabel::from_twice(4)), 1);
        let s = b.sector(SpinLabel::ZERO, 0);
        assert_eq!((s[0].j12.twice(), s[0].j34.twice(), s[1].j12.twice()), (0, 0, 2));
        let t = b.sector(SpinLabel::ONE, 0);
        let labels: Vec<(u32, u32)> = t.iter().map(|x| (x.j12.twice(), x.j34.twice())).collect();
        assert_eq!(labels, vec![(0, 2), (2, 0), (2, 2)]);
        let top = &b.sector(SpinLabel::from_twice(4), 4)[0].vector;
        assert!((top[15] - cr(1.0)).norm() < 1e-14);
    }

    #[test]
    fn single_qubit_errors_are_detected() {
        let b = basis();
        for a in Axis::ALL {
            for k in 0..4 {
                assert!(detection_check(&b, ErrorOp::Pauli(a), k).unwrap() < 1e-12);
                let e = edge_operator(&pauli(a), k).unwrap();
                assert!(sandwich_norm(&b, &e, SpinLabel::from_twice(4), SpinLabel::ZERO) < 1e-12);
            }
        }
        let id = edge_operator(&identity(2), 0).unwrap();
        let p0 = b.projector(SpinLabel::ZERO);
        let kept = &p0 * &id * &p0;
        assert!(max_abs_diff(&kept, &p0) < 1e-12);
        let top = crate::linalg::singular_values(&kept).unwrap()[0];
        assert!((top - 1.0).abs() < 1e-12);
        let zz = edge_operator(&pauli(Axis::Z), 0).unwrap() * edge_operator(&pauli(Axis::Z), 1).unwrap();
        assert!(sandwich_norm(&b, &zz, SpinLabel::ZERO, SpinLabel::ZERO) > 0.1);
    }

    #[test]
    fn multiplicity_map_singular_values() {
        let b = basis();
        for k in 0..4 {
            for q in [-1, 0, 1] {
                let m = multiplicity_map(&b, ErrorOp::Spherical(q), k, 2 * q).unwrap();
                let sv = crate::linalg::singular_values(&m.a).unwrap();
                assert!(sv.iter().all(|s| (s - 1.0).abs() < 1e-10), "{sv:?}");
            }
            for a in [Axis::X, Axis::Y] {
                let m = multiplicity_map(&b, ErrorOp::Pauli(a), k, 2).unwrap();
                let sv = crate::linalg::singular_values(&m.a).unwrap();
                assert!(sv.iter().all(|s| (s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10));
            }
        }
        assert!(multiplicity_map(&b, ErrorOp::Pauli(Axis::Z), 0, 3).is_err());
    }

    #[test]
    fn same_pair_maps_differ_by_signs() {
        let b = basis();
        let a0 = multiplicity_map(&b, ErrorOp::Pauli(Axis::Z), 0, 0).unwrap().a;
        let a1 = multiplicity_map(&b, ErrorOp::Pauli(Axis::Z), 1, 0).unwrap().a;
        for r in 0..3 {
            for c in 0..2 {
                assert!((a0[(r, c)].norm() - a1[(r, c)].norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn knill_laflamme_products() {
        let b = basis();
        let maps: Vec<MultiplicityMap> =
            (0..4).map(|k| multiplicity_map(&b, ErrorOp::Pauli(Axis::Z), k, 0).unwrap()).collect();
        for m in &maps {
            assert!(kl_diagonal_defect(&kl_product(m, m).unwrap()) < 1e-10);
        }
        let p01 = kl_product(&maps[0], &maps[1]).unwrap();
        let published = crate::linalg::diag_real(&[-1.0, 1.0 / 3.0]);
        assert_eq!(match_column_order(&p01, &published, 1e-10), Some(ColumnOrder::Declared));
        let p02 = kl_product(&maps[0], &maps[2]).unwrap();
        assert!(p02[(0, 1)].norm() > 0.1 || p02[(1, 0)].norm() > 0.1);
        let other = multiplicity_map(&b, ErrorOp::Pauli(Axis::X), 0, 2).unwrap();
        assert!(kl_product(&maps[0], &other).is_err());
    }

    #[test]
    fn residual_table_and_sector_consistency() {
        let b = basis();
        let t0 = residual_pauli_weights(&b, ErrorOp::Pauli(Axis::Z), 0, 0).unwrap();
        let want = [[1.0, 0.0, 0.0, 0.0], [0.2, 0.0, 0.0, 0.8], [0.2, 0.6, 0.0, 0.2], [0.2, 0.6, 0.0, 0.2]];
        for (row, w) in t0.rows.iter().zip(want) {
            for (x, y) in row.weights.iter().zip(w) {
                assert!((x - y).abs() < 1e-10, "{row:?}");
            }
            assert!((row.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        for a in [Axis::X, Axis::Y] {
            let t1 = residual_pauli_weights(&b, ErrorOp::Pauli(a), 2, 0).unwrap();
            for (r0, r1) in t0.rows.iter().zip(&t1.rows) {
                for (x, y) in r0.weights.iter().zip(r1.weights) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn wigner_eckart_reconstruction() {
        let b = basis();
        for k in 0..4 {
            for q in [-1, 0, 1] {
                assert!(wigner_eckart_defect(&b, q, k).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn pauli_weight_basics() {
        assert_eq!(pauli_weights(&identity(2)), [1.0, 0.0, 0.0, 0.0]);
        let y = CMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 1) => c64::new(0.0, -1.0),
            (1, 0) => c64::new(0.0, 1.0),
            _ => cr(0.0),
        });
        let w = pauli_weights(&y);
        assert!((w[2] - 1.0).abs() < 1e-15);
    }
}
