//! Unitary t-designs on SU(2), the truncated group Fourier transform, and the
//! check that design-averaged syndrome operators equal their continuum form.

use faer::c64;
use rand::Rng;

use crate::cooling::{syndrome_operator, Syndrome};
use crate::error::{invalid, Error, Result};
use crate::lattice::{edge_basis, edge_dimension, gauge_action_sparse, VertexCgBasis, DIM};
use crate::linalg::{cr, identity, max_abs_diff, zeros, CMatrix, SparseMatrix};
use crate::su2::{character, haar_sample, wigner_d, GroupElement, SpinLabel};

#[derive(Clone, Debug)]
pub struct DesignSet {
    pub elements: Vec<GroupElement>,
    /// Strength the set is advertised to have, if known.
    pub claimed_t: Option<u32>,
}

impl DesignSet {
    pub fn new(elements: Vec<GroupElement>, claimed_t: Option<u32>) -> Result<Self> {
        if elements.is_empty() {
            return Err(invalid("a design set needs at least one element"));
        }
        for (i, g) in elements.iter().enumerate() {
            if g.invariant_error() > 1e-12 {
                return Err(invalid(format!("element {i} is not in SU(2)")));
            }
        }
        Ok(Self { elements, claimed_t })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// One element per line as `a b c d` ↦ [[a+ib, c+id], [-c+id, a-ib]];
    /// blank lines and lines starting with '#' are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut elements = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: ln + 1, message: e.to_string() })?;
            let [a, b, c, d] = vals[..] else {
                return Err(Error::Parse { line: ln + 1, message: format!("expected 4 numbers, found {}", vals.len()) });
            };
            let g = GroupElement::from_quaternion(a, b, c, d)
                .map_err(|e| Error::Parse { line: ln + 1, message: e.to_string() })?;
            elements.push(g);
        }
        if elements.is_empty() {
            return Err(Error::Parse { line: 0, message: "no elements".into() });
        }
        Self::new(elements, None)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for g in &self.elements {
            let q = g.quaternion();
            s.push_str(&format!("{:.17e} {:.17e} {:.17e} {:.17e}\n", q[0], q[1], q[2], q[3]));
        }
        s
    }
}

fn quaternion_set(qs: impl IntoIterator<Item = [f64; 4]>) -> Vec<GroupElement> {
    qs.into_iter().map(|q| GroupElement::from_quaternion(q[0], q[1], q[2], q[3]).expect("unit quaternion")).collect()
}

fn signed_units() -> Vec<[f64; 4]> {
    let mut out = Vec::new();
    for i in 0..4 {
        for s in [1.0, -1.0] {
            let mut q = [0.0; 4];
            q[i] = s;
            out.push(q);
        }
    }
    out
}

/// Q8 = {±1, ±i, ±j, ±k}: a 1-design only.
pub fn quaternion_group() -> DesignSet {
    DesignSet::new(quaternion_set(signed_units()), Some(1)).unwrap()
}

/// Binary tetrahedral group 2T (24 elements), a 2-design.
pub fn binary_tetrahedral() -> DesignSet {
    let mut qs = signed_units();
    for bits in 0..16 {
        qs.push(std::array::from_fn(|k| if (bits >> k) & 1 == 1 { -0.5 } else { 0.5 }));
    }
    DesignSet::new(quaternion_set(qs), Some(2)).unwrap()
}

/// Binary octahedral group 2O (48 elements): 2T plus (±1, ±1, 0, 0)/√2 in all positions.
pub fn binary_octahedral_design() -> DesignSet {
    let mut qs: Vec<[f64; 4]> = binary_tetrahedral().elements.iter().map(|g| g.quaternion()).collect();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..4 {
        for j in i + 1..4 {
            for (si, sj) in [(r, r), (r, -r), (-r, r), (-r, -r)] {
                let mut q = [0.0; 4];
                q[i] = si;
                q[j] = sj;
                qs.push(q);
            }
        }
    }
    DesignSet::new(quaternion_set(qs), Some(3)).unwrap()
}

pub fn haar_random_set<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DesignSet> {
    DesignSet::new((0..n).map(|_| haar_sample(rng)).collect(), None)
}

/// t ≥ 2k·j_max + 2k_out·j_max.
pub fn required_design_strength(k: u32, k_out: u32, j_max: SpinLabel) -> Result<u32> {
    if k_out > k {
        return Err(invalid(format!("k_out = {k_out} exceeds k = {k}")));
    }
    Ok((k + k_out) * j_max.twice())
}

/// Bidegree (deg_g, deg_ḡ) of the plaquette syndrome integrand, doubled spins in.
pub fn integrand_bidegree(twice_j_in: u32, twice_j: u32, twice_j_out: u32) -> (u32, u32) {
    (twice_j_in, twice_j + twice_j_out)
}

/// Largest bidegree component over every (j_in, J, j_out) reachable at a
/// plaquette vertex with edges truncated at j_max.
pub fn plaquette_max_bidegree(j_max: SpinLabel) -> u32 {
    let tm = j_max.twice();
    let mut best = 0;
    for tin in 0..=tm {
        for tout in 0..=tm {
            for tj in (tin.abs_diff(tout)..=tin + tout).step_by(2) {
                let (a, b) = integrand_bidegree(tin, tj, tout);
                best = best.max(a).max(b);
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignReport {
    pub max_deviation: f64,
    /// Doubled spins (2j1, 2j2) of the worst irrep pair.
    pub worst_pair: (u32, u32),
}

impl DesignReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation < tol
    }
}

/// Schur orthogonality on every irrep pair with 2j1, 2j2 ≤ t.
pub fn verify_tdesign(d: &DesignSet, t: u32) -> Result<DesignReport> {
    if t == 0 {
        return Err(invalid("design strength must be at least 1"));
    }
    let n = d.len() as f64;
    let reps: Vec<Vec<CMatrix>> = (0..=t)
        .map(|tj| d.elements.iter().map(|g| wigner_d(SpinLabel::from_twice(tj), g)).collect())
        .collect();
    let mut report = DesignReport { max_deviation: 0.0, worst_pair: (0, 0) };
    for t1 in 0..=t as usize {
        for t2 in 0..=t as usize {
            let (d1, d2) = (t1 + 1, t2 + 1);
            for a in 0..d1 {
                for b in 0..d1 {
                    for c in 0..d2 {
                        for dd in 0..d2 {
                            let mut acc = cr(0.0);
                            for (x, y) in reps[t1].iter().zip(&reps[t2]) {
                                acc += x[(a, b)] * y[(c, dd)].conj();
                            }
                            let want = if t1 == t2 && a == c && b == dd { 1.0 / d1 as f64 } else { 0.0 };
                            let dev = (acc / cr(n) - cr(want)).norm();
                            if dev > report.max_deviation {
                                report = DesignReport { max_deviation: dev, worst_pair: (t1 as u32, t2 as u32) };
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct TruncatedQft {
    pub j_cut: SpinLabel,
    /// d_out × n_t.
    pub w: CMatrix,
}

/// W[(j,m,n), i] = √((2j+1)/n_t) · conj(π_j(g_i))_{mn}.
pub fn truncated_qft(d: &DesignSet, j_cut: SpinLabel) -> Result<TruncatedQft> {
    let d_out = edge_dimension(j_cut);
    let nt = d.len();
    if nt < d_out {
        return Err(invalid(format!("{nt} design elements cannot carry {d_out} Wigner rows")));
    }
    let rows = edge_basis(j_cut);
    let mut w = zeros(d_out, nt);
    for (i, g) in d.elements.iter().enumerate() {
        let ds: Vec<CMatrix> = (0..=j_cut.twice()).map(|t| wigner_d(SpinLabel::from_twice(t), g)).collect();
        for (r, lbl) in rows.iter().enumerate() {
            let dj = &ds[lbl.j.twice() as usize];
            let (m, n) = (lbl.j.index_of(lbl.twice_m).unwrap(), lbl.j.index_of(lbl.twice_n).unwrap());
            w[(r, i)] = dj[(m, n)].conj() * cr((lbl.j.dim() as f64 / nt as f64).sqrt());
        }
    }
    Ok(TruncatedQft { j_cut, w })
}

impl TruncatedQft {
    pub fn d_out(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.w.ncols()
    }

    /// max |WW† − 1|.
    pub fn isometry_error(&self) -> f64 {
        max_abs_diff(&(&self.w * self.w.adjoint()), &identity(self.d_out()))
    }
}

/// max |W†W − K| with K_ik = Σ_j ((2j+1)/n_t) χ_j(g_i g_k⁻¹).
pub fn qft_kernel_check(d: &DesignSet, j_cut: SpinLabel) -> Result<f64> {
    let q = truncated_qft(d, j_cut)?;
    let ww = q.w.adjoint() * &q.w;
    let nt = d.len() as f64;
    let mut dev = 0.0f64;
    for (i, gi) in d.elements.iter().enumerate() {
        for (k, gk) in d.elements.iter().enumerate() {
            let h = gi.mul(&gk.inverse());
            let kern: f64 = (0..=j_cut.twice())
                .map(|t| {
                    let j = SpinLabel::from_twice(t);
                    j.dim() as f64 / nt * character(j, &h)
                })
                .sum();
            dev = dev.max((ww[(i, k)] - cr(kern)).norm());
        }
    }
    Ok(dev)
}

/// Completes W to an n_t × n_t unitary by orthonormalizing standard basis
/// vectors in index order against the rows already present.
pub fn embed_unitary(q: &TruncatedQft) -> Result<CMatrix> {
    let err = q.isometry_error();
    if err > 1e-9 {
        return Err(invalid(format!("W is not an isometry (deviation {err:e})")));
    }
    let n = q.n_t();
    let mut rows: Vec<Vec<c64>> = (0..q.d_out()).map(|r| (0..n).map(|c| q.w[(r, c)]).collect()).collect();
    for e in 0..n {
        if rows.len() == n {
            break;
        }
        let mut v = vec![cr(0.0); n];
        v[e] = cr(1.0);
        // two passes of Gram-Schmidt for stability
        for _ in 0..2 {
            for r in &rows {
                let ov: c64 = r.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(r) {
                    *x -= ov * a;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            rows.push(v.into_iter().map(|x| x / cr(norm)).collect());
        }
    }
    if rows.len() != n {
        return Err(Error::NumericalFailure("orthonormal completion came up short".into()));
    }
    Ok(CMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyndromeCheck {
    pub max_deviation: f64,
    pub worst: Syndrome,
}

/// max over (J,M,N) of ‖T_disc − T_cont‖_max with
/// T_disc = (√(2J+1)/n) Σ_i conj(π_J(g_i))_{MN} U^(v)(g_i).
pub fn discrete_syndrome_check(d: &DesignSet, basis: &VertexCgBasis) -> Result<SyndromeCheck> {
    let us: Vec<SparseMatrix> = d.elements.iter().map(|g| gauge_action_sparse(basis.vertex, g)).collect();
    let n = d.len() as f64;
    let mut best: Option<SyndromeCheck> = None;
    for j in basis.spins() {
        let ds: Vec<CMatrix> = d.elements.iter().map(|g| wigner_d(j, g)).collect();
        for s in Syndrome::all(&[j]) {
            let (mi, ni) = (j.index_of(s.twice_m).unwrap(), j.index_of(s.twice_n).unwrap());
            let mut t = zeros(DIM, DIM);
            let pre = (j.dim() as f64).sqrt() / n;
            for (u, dg) in us.iter().zip(&ds) {
                u.add_scaled_to(&mut t, dg[(mi, ni)].conj() * cr(pre));
            }
            let dev = max_abs_diff(&t, &syndrome_operator(basis, s)?);
            if best.is_none_or(|b| dev > b.max_deviation) {
                best = Some(SyndromeCheck { max_deviation: dev, worst: s });
            }
        }
    }
    best.ok_or_else(|| invalid("basis has no sectors"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_error;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn closed(d: &DesignSet) -> bool {
        let has = |g: &GroupElement| d.elements.iter().any(|h| {
            let (a, b) = (g.quaternion(), h.quaternion());
            a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
        });
        d.elements.iter().all(|g| has(&g.inverse()) && d.elements.iter().all(|h| has(&g.mul(h))))
    }

    #[test]
    fn group_catalog() {
        let o = binary_octahedral_design();
        assert_eq!(o.len(), 48);
        assert!(closed(&o));
        assert!(closed(&binary_tetrahedral()));
        assert!(closed(&quaternion_group()));
        let has = |q: [f64; 4]| o.elements.iter().any(|g| g.quaternion() == q);
        assert!(has([1.0, 0.0, 0.0, 0.0]) && has([-1.0, 0.0, 0.0, 0.0]));
        // π-rotations about x, y, z are ±iσ_a
        for q in [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]] {
            assert!(has(q));
        }
    }

    #[test]
    fn design_strengths() {
        let o = binary_octahedral_design();
        assert!(verify_tdesign(&o, 3).unwrap().max_deviation < 1e-12);
        let four = verify_tdesign(&o, 4).unwrap();
        assert!(four.max_deviation > 0.01);
        assert_eq!(four.worst_pair.0.max(four.worst_pair.1), 4);
        assert!(verify_tdesign(&binary_tetrahedral(), 2).unwrap().max_deviation < 1e-12);
        assert!(verify_tdesign(&binary_tetrahedral(), 3).unwrap().max_deviation > 0.1);
        assert!(verify_tdesign(&quaternion_group(), 1).unwrap().max_deviation < 1e-12);
        assert!(verify_tdesign(&quaternion_group(), 2).unwrap().max_deviation > 0.1);
        let single = DesignSet::new(vec![GroupElement::identity()], None).unwrap();
        assert!(verify_tdesign(&single, 1).unwrap().max_deviation >= 0.5);
        for t in 1..=3 {
            assert!(verify_tdesign(&o, t).unwrap().max_deviation <= verify_tdesign(&o, 3).unwrap().max_deviation + 1e-15);
        }
    }

    #[test]
    fn strength_requirements() {
        assert_eq!(required_design_strength(2, 1, SpinLabel::HALF).unwrap(), 3);
        assert_eq!(required_design_strength(4, 2, SpinLabel::HALF).unwrap(), 6);
        for k in 1..6 {
            assert_eq!(required_design_strength(k, 0, SpinLabel::HALF).unwrap(), k);
        }
        assert!(required_design_strength(1, 2, SpinLabel::HALF).is_err());
        assert_eq!(plaquette_max_bidegree(SpinLabel::HALF), 3);
        assert_eq!(integrand_bidegree(1, 2, 1), (1, 3));
    }

    #[test]
    fn qft_isometry_and_kernel() {
        let o = binary_octahedral_design();
        let q = truncated_qft(&o, SpinLabel::HALF).unwrap();
        assert_eq!(q.d_out(), 5);
        let r = 1.0 / (48f64).sqrt();
        assert!((0..48).all(|i| (q.w[(0, i)] - cr(r)).norm() < 1e-15));
        for jc in [SpinLabel::HALF, SpinLabel::ONE] {
            let q = truncated_qft(&o, jc).unwrap();
            assert!(q.isometry_error() < 1e-12);
            assert!(qft_kernel_check(&o, jc).unwrap() < 1e-12);
        }
        assert_eq!(truncated_qft(&o, SpinLabel::ONE).unwrap().d_out(), 14);
        // the kernel identity holds for any element set
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = haar_random_set(20, &mut rng).unwrap();
        assert!(qft_kernel_check(&h, SpinLabel::ONE).unwrap() < 1e-12);
        assert!(truncated_qft(&quaternion_group(), SpinLabel::ONE).is_err());
    }

    #[test]
    fn unitary_completion() {
        let q = truncated_qft(&binary_octahedral_design(), SpinLabel::HALF).unwrap();
        let u = embed_unitary(&q).unwrap();
        assert!(unitarity_error(&u) < 1e-9);
        for r in 0..5 {
            for c in 0..48 {
                assert_eq!(u[(r, c)], q.w[(r, c)]);
            }
        }
        assert_eq!(embed_unitary(&q).unwrap(), u);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let bad = truncated_qft(&haar_random_set(6, &mut rng).unwrap(), SpinLabel::HALF).unwrap();
        assert!(embed_unitary(&bad).is_err());
    }

    #[test]
    fn discrete_syndrome_operators() {
        let basis = crate::lattice::build_cg_basis(0).unwrap();
        let o = binary_octahedral_design();
        assert!(discrete_syndrome_check(&o, &basis).unwrap().max_deviation < 1e-10);
        // A 2-design already integrates every bidegree the plaquette syndrome needs.
        assert!(discrete_syndrome_check(&binary_tetrahedral(), &basis).unwrap().max_deviation < 1e-10);
        let q8 = discrete_syndrome_check(&quaternion_group(), &basis).unwrap();
        assert!(q8.max_deviation > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let h = discrete_syndrome_check(&haar_random_set(48, &mut rng).unwrap(), &basis).unwrap();
        assert!(h.max_deviation > 1e-3);
        // trivial syndrome: the group average is the singlet projector
        let n = o.len() as f64;
        let mut avg = zeros(DIM, DIM);
        for g in &o.elements {
            gauge_action_sparse(0, g).add_scaled_to(&mut avg, cr(1.0 / n));
        }
        assert!(max_abs_diff(&avg, &crate::lattice::singlet_projector(&basis)) < 1e-10);
    }

    #[test]
    fn parse_design_files() {
        let o = binary_octahedral_design();
        let text = format!("# binary octahedral\n\n{}", o.to_text());
        let back = DesignSet::parse(&text).unwrap();
        assert_eq!(back.len(), 48);
        assert!(matches!(DesignSet::parse("1 0 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(DesignSet::parse("# c\n0.5 0.5 0 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(DesignSet::parse("1 0 0 x\n"), Err(Error::Parse { .. })));
        assert!(DesignSet::parse("# nothing\n").is_err());
    }
}
