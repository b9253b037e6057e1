//! SU(2) representation primitives.
//!
//! Every spin-j space uses the basis |j,m⟩ ordered m = -j, ..., +j. Half-integer
//! quantum numbers are stored doubled (`twice_j`, `twice_m`) so they stay exact.
//! The defining matrix g is read in the same ordering, which makes
//! `wigner_d(1/2, g) == g` and puts Pauli Z at `diag(-1, +1)`.

use faer::c64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{cr, eigh, zeros, CMatrix, I};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpinLabel {
    twice_j: u32,
}

impl SpinLabel {
    pub const ZERO: SpinLabel = SpinLabel { twice_j: 0 };
    pub const HALF: SpinLabel = SpinLabel { twice_j: 1 };
    pub const ONE: SpinLabel = SpinLabel { twice_j: 2 };

    pub const fn from_twice(twice_j: u32) -> Self {
        Self { twice_j }
    }

    pub const fn twice(self) -> u32 {
        self.twice_j
    }

    pub fn value(self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub const fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    /// `j(j+1)`.
    pub fn casimir(self) -> f64 {
        let j = self.value();
        j * (j + 1.0)
    }

    /// Doubled m values, ascending.
    pub fn twice_ms(self) -> impl Iterator<Item = i32> {
        let tj = self.twice_j as i32;
        (0..=tj).map(move |k| 2 * k - tj)
    }

    /// Position of `twice_m` in the ascending basis.
    pub fn index_of(self, twice_m: i32) -> Option<usize> {
        let tj = self.twice_j as i32;
        if twice_m.abs() > tj || (twice_m + tj) % 2 != 0 {
            return None;
        }
        Some(((twice_m + tj) / 2) as usize)
    }
}

impl std::fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.twice_j % 2 == 0 {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

#[derive(Clone, Debug)]
pub struct SpinMatrices {
    pub x: CMatrix,
    pub y: CMatrix,
    pub z: CMatrix,
}

impl SpinMatrices {
    pub fn axis(&self, a: Axis) -> &CMatrix {
        match a {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }

    pub fn raising(&self) -> CMatrix {
        &self.x + crate::linalg::scale(&self.y, I)
    }

    pub fn lowering(&self) -> CMatrix {
        &self.x - crate::linalg::scale(&self.y, I)
    }
}

/// Jx, Jy, Jz built from the ladder operators with Condon-Shortley phases.
pub fn spin_matrices(j: SpinLabel) -> SpinMatrices {
    let d = j.dim();
    let jj = j.value();
    let mut jp = zeros(d, d);
    for k in 0..d.saturating_sub(1) {
        let m = k as f64 - jj;
        jp[(k + 1, k)] = cr((jj * (jj + 1.0) - m * (m + 1.0)).sqrt());
    }
    let jm = jp.adjoint().to_owned();
    let half = cr(0.5);
    let x = CMatrix::from_fn(d, d, |r, c| (jp[(r, c)] + jm[(r, c)]) * half);
    let y = CMatrix::from_fn(d, d, |r, c| (jp[(r, c)] - jm[(r, c)]) * c64::new(0.0, -0.5));
    let z = CMatrix::from_fn(d, d, |r, c| if r == c { cr(r as f64 - jj) } else { cr(0.0) });
    SpinMatrices { x, y, z }
}

/// ⟨j1 m1; j2 m2 | J M⟩ with every argument doubled.
///
/// Built without tables: diagonalize the total J² in the M = J subspace of the
/// product space, fix the sign so the m1 = j1 component is positive, then walk
/// down with J₋.
pub fn clebsch_gordan(tj1: u32, tm1: i32, tj2: u32, tm2: i32, tj: u32, tm: i32) -> Result<f64> {
    let (s1, s2, s) = (SpinLabel::from_twice(tj1), SpinLabel::from_twice(tj2), SpinLabel::from_twice(tj));
    let (i1, i2) = match (s1.index_of(tm1), s2.index_of(tm2), s.index_of(tm)) {
        (Some(a), Some(b), Some(_)) => (a, b),
        _ => {
            return Err(invalid(format!(
                "malformed quantum numbers (2j1,2m1,2j2,2m2,2J,2M) = ({tj1},{tm1},{tj2},{tm2},{tj},{tm})"
            )))
        }
    };
    if tm1 + tm2 != tm {
        return Ok(0.0);
    }
    let (lo, hi) = ((tj1 as i64 - tj2 as i64).unsigned_abs() as u32, tj1 + tj2);
    if tj < lo || tj > hi || (tj + tj1 + tj2) % 2 != 0 {
        return Ok(0.0);
    }
    let coupled = coupled_vector(s1, s2, s, tm)?;
    Ok(coupled[i1 * s2.dim() + i2])
}

/// The product-space vector |J M⟩ in the (m1 slow, m2 fast) ordering.
fn coupled_vector(s1: SpinLabel, s2: SpinLabel, s: SpinLabel, tm: i32) -> Result<Vec<f64>> {
    let (d1, d2) = (s1.dim(), s2.dim());
    let (a, b) = (spin_matrices(s1), spin_matrices(s2));
    let n = d1 * d2;
    let ops: Vec<CMatrix> = Axis::ALL
        .iter()
        .map(|&ax| {
            crate::linalg::kron(a.axis(ax), &crate::linalg::identity(d2))
                + crate::linalg::kron(&crate::linalg::identity(d1), b.axis(ax))
        })
        .collect();
    let j2 = ops.iter().fold(zeros(n, n), |acc, o| acc + o * o);
    let tj = s.twice() as i32;
    let top: Vec<usize> = (0..n)
        .filter(|&k| {
            let m1 = 2 * (k / d2) as i32 - s1.twice() as i32;
            let m2 = 2 * (k % d2) as i32 - s2.twice() as i32;
            m1 + m2 == tj
        })
        .collect();
    let sub = CMatrix::from_fn(top.len(), top.len(), |r, c| j2[(top[r], top[c])]);
    let (w, v) = eigh(&sub)?;
    let target = s.casimir();
    let col = w
        .iter()
        .position(|x| (x - target).abs() < 1e-8)
        .ok_or_else(|| crate::error::Error::NumericalFailure(format!("no J={s} state in product")))?;
    let mut vec = vec![cr(0.0); n];
    for (r, &k) in top.iter().enumerate() {
        vec[k] = v[(r, col)];
    }
    // Condon-Shortley: component with m1 = j1 is real positive.
    let anchor = (d1 - 1) * d2 + ((tj - s1.twice() as i32 + s2.twice() as i32) / 2) as usize;
    let ph = vec[anchor];
    let ph = ph.conj() / ph.norm();
    for x in vec.iter_mut() {
        *x *= ph;
    }
    let lower = &ops[0] - crate::linalg::scale(&ops[1], I);
    let mut m = s.value();
    let mut cur_tm = tj;
    while cur_tm > tm {
        let norm = (s.casimir() - m * (m - 1.0)).sqrt();
        let next: Vec<c64> = (0..n)
            .map(|r| (0..n).map(|c| lower[(r, c)] * vec[c]).sum::<c64>() / cr(norm))
            .collect();
        vec = next;
        m -= 1.0;
        cur_tm -= 2;
    }
    Ok(vec.into_iter().map(|x| x.re).collect())
}

/// An element of SU(2) stored as its defining 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    u: [[c64; 2]; 2],
}

impl GroupElement {
    pub fn identity() -> Self {
        Self::from_quaternion_unchecked(1.0, 0.0, 0.0, 0.0)
    }

    /// `[[a+ib, c+id], [-c+id, a-ib]]`; requires unit norm within 1e-9.
    pub fn from_quaternion(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let n2 = a * a + b * b + c * c + d * d;
        if !n2.is_finite() || (n2 - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("quaternion norm² {n2} is not 1")));
        }
        let n = n2.sqrt();
        Ok(Self::from_quaternion_unchecked(a / n, b / n, c / n, d / n))
    }

    fn from_quaternion_unchecked(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            u: [[c64::new(a, b), c64::new(c, d)], [c64::new(-c, d), c64::new(a, -b)]],
        }
    }

    /// Validates unitarity and unit determinant within 1e-12.
    pub fn from_matrix(m: [[c64; 2]; 2]) -> Result<Self> {
        let g = Self { u: m };
        let err = g.invariant_error();
        if !(err <= 1e-12) {
            return Err(invalid(format!("matrix is not in SU(2): deviation {err:e}")));
        }
        Ok(g)
    }

    pub fn quaternion(&self) -> [f64; 4] {
        [self.u[0][0].re, self.u[0][0].im, self.u[0][1].re, self.u[0][1].im]
    }

    pub fn entry(&self, r: usize, c: usize) -> c64 {
        self.u[r][c]
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_fn(2, 2, |r, c| self.u[r][c])
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        let (a, b) = (&self.u, &other.u);
        let mut u = [[cr(0.0); 2]; 2];
        for (r, row) in u.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        GroupElement { u }
    }

    pub fn inverse(&self) -> GroupElement {
        let u = &self.u;
        GroupElement { u: [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]] }
    }

    pub fn trace(&self) -> c64 {
        self.u[0][0] + self.u[1][1]
    }

    /// max(|u†u - 1|, |det u - 1|).
    pub fn invariant_error(&self) -> f64 {
        let u = &self.u;
        let mut e = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let g = u[0][r].conj() * u[0][c] + u[1][r].conj() * u[1][c];
                let want = if r == c { 1.0 } else { 0.0 };
                e = e.max((g - cr(want)).norm());
            }
        }
        let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
        e.max((det - cr(1.0)).norm())
    }

    /// `exp(-iθσ_a/2) = cos(θ/2)·1 - i sin(θ/2)·σ_a`, with σ_a = 2J_a in the ascending basis.
    pub fn rotation(axis: Axis, theta: f64) -> GroupElement {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let sigma = pauli(axis);
        let mut u = [[cr(0.0); 2]; 2];
        for (r, row) in u.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                let id = if r == k { c } else { 0.0 };
                *x = cr(id) - I * cr(s) * sigma[(r, k)];
            }
        }
        GroupElement { u }
    }
}

/// Haar-random element: four independent normals, normalized onto S³.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> GroupElement {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return GroupElement::from_quaternion_unchecked(q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        }
    }
}

/// π_j(g) in the ascending basis.
///
/// Column n of D^j spans the symmetric power: with u = g·|↑⟩ and d = g·|↓⟩
/// expand d^(j-n)·u^(j+n) and read off coefficients, rescaled by the
/// binomial normalization of the symmetric basis.
pub fn wigner_d(j: SpinLabel, g: &GroupElement) -> CMatrix {
    let tj = j.twice() as usize;
    let d = tj + 1;
    let (g00, g01, g10, g11) = (g.u[0][0], g.u[0][1], g.u[1][0], g.u[1][1]);
    let fact: Vec<f64> = (0..=tj).scan(1.0, |acc, k| {
        if k > 0 {
            *acc *= k as f64;
        }
        Some(*acc)
    }).collect();
    let mut out = zeros(d, d);
    for col in 0..d {
        let (ups, downs) = (col, tj - col);
        let mut poly = vec![cr(0.0); d];
        poly[0] = cr(1.0);
        let mut deg = 0;
        for (c0, c1, times) in [(g01, g11, ups), (g00, g10, downs)] {
            for _ in 0..times {
                for k in (0..=deg + 1).rev() {
                    let lower = if k > 0 { poly[k - 1] * c1 } else { cr(0.0) };
                    let keep = if k <= deg { poly[k] * c0 } else { cr(0.0) };
                    poly[k] = keep + lower;
                }
                deg += 1;
            }
        }
        for row in 0..d {
            let norm = (fact[row] * fact[tj - row] / (fact[col] * fact[tj - col])).sqrt();
            out[(row, col)] = poly[row] * cr(norm);
        }
    }
    out
}

/// Character χ_j(g) = tr π_j(g), via the Chebyshev recursion in tr g.
pub fn character(j: SpinLabel, g: &GroupElement) -> f64 {
    let t = g.trace().re;
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..j.twice() {
        let next = t * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// σ_a = 2·J_a^(1/2) in the ascending basis.
pub fn pauli(axis: Axis) -> CMatrix {
    let s = spin_matrices(SpinLabel::HALF);
    crate::linalg::scale(s.axis(axis), cr(2.0))
}

/// O_0 = Z, O_{±1} = ∓(X ± iY)/√2.
pub fn spherical_pauli(q: i32) -> Result<CMatrix> {
    let (x, y, z) = (pauli(Axis::X), pauli(Axis::Y), pauli(Axis::Z));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match q {
        0 => Ok(z),
        1 => Ok(crate::linalg::scale(&(&x + crate::linalg::scale(&y, I)), cr(-r))),
        -1 => Ok(crate::linalg::scale(&(&x - crate::linalg::scale(&y, I)), cr(r))),
        _ => Err(invalid(format!("spherical component q = {q} not in {{-1, 0, 1}}"))),
    }
}
