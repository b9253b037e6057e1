//! Named invariant suites. Each check reports its measured deviation against
//! a tolerance so the CLI and the acceptance harness can print the same table.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::TrotterConfig;
use crate::error::{invalid, Error, Result};
use crate::experiment::{EvolveConfig, Simulator};
use crate::hamiltonian::{haar_mc_oracle, plaquette_operator, HamiltonianPair};
use crate::kl::{
    coord4_cg_basis, detection_check, edge_operator, kl_diagonal_defect, kl_product, match_column_order,
    multiplicity_map, residual_pauli_weights, sandwich_norm, ErrorOp,
};
use crate::lattice::{build_cg_basis, casimir, physical_subspace, N_VERTICES};
use crate::linalg::{commutator, diag_real, hermiticity_error, max_abs, max_abs_diff, unitarity_error, CMatrix};
use crate::su2::{pauli, Axis, SpinLabel};
use crate::tdesign::{
    binary_octahedral_design, discrete_syndrome_check, embed_unitary, plaquette_max_bidegree, qft_kernel_check,
    required_design_strength, truncated_qft, verify_tdesign, DesignSet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// Passes when measured < tolerance.
    Below,
    /// Passes when measured > tolerance.
    Above,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    pub detail: Option<String>,
}

impl CheckResult {
    pub fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::make(name.into(), measured, tolerance, Bound::Below)
    }

    pub fn above(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::make(name.into(), measured, tolerance, Bound::Above)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn make(name: String, measured: f64, tolerance: f64, bound: Bound) -> Self {
        // NaN fails either way
        let passed = match bound {
            Bound::Below => measured < tolerance,
            Bound::Above => measured > tolerance,
        };
        Self { name, measured, tolerance, bound, passed, detail: None }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::Below => '<',
            Bound::Above => '>',
        };
        write!(
            f,
            "{} {}: measured {:.3e} (want {op} {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )?;
        if let Some(d) = &self.detail {
            write!(f, " [{d}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Hamiltonian,
    Tdesign,
    Qft,
    Detection,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamiltonian" => Ok(Self::Hamiltonian),
            "tdesign" => Ok(Self::Tdesign),
            "qft" => Ok(Self::Qft),
            "detection" => Ok(Self::Detection),
            "all" => Ok(Self::All),
            other => Err(invalid(format!("unknown suite '{other}'"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hamiltonian => "hamiltonian",
            Self::Tdesign => "tdesign",
            Self::Qft => "qft",
            Self::Detection => "detection",
            Self::All => "all",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Replaces the built-in binary octahedral set in the tdesign suite.
    pub design: Option<DesignSet>,
    pub seed: u64,
    pub mc_samples: usize,
    pub g2: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { design: None, seed: 7, mc_samples: 100_000, g2: 1.0 }
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Vec<CheckResult>> {
    match suite {
        Suite::Hamiltonian => hamiltonian_suite(opts),
        Suite::Tdesign => tdesign_suite(opts),
        Suite::Qft => qft_suite(),
        Suite::Detection => detection_suite(),
        Suite::All => {
            let mut out = hamiltonian_suite(opts)?;
            out.extend(tdesign_suite(opts)?);
            out.extend(qft_suite()?);
            out.extend(detection_suite()?);
            Ok(out)
        }
    }
}

pub fn hamiltonian_suite(opts: &SuiteOptions) -> Result<Vec<CheckResult>> {
    let h = HamiltonianPair::new(opts.g2)?;
    let mut out = vec![CheckResult::below("H_B hermiticity", hermiticity_error(&h.magnetic), 1e-12)];
    for v in 0..N_VERTICES {
        let c = casimir(v);
        out.push(CheckResult::below(format!("[H_B, C^({v})]"), max_abs(&commutator(&h.magnetic, &c)), 1e-10));
        out.push(CheckResult::below(format!("[H_E, C^({v})]"), max_abs(&commutator(&h.electric, &c)), 1e-12));
    }

    let p = physical_subspace()?;
    out.push(CheckResult::below("physical subspace dimension - 2", (p.ncols() as f64 - 2.0).abs(), 0.5));
    let proj = &p * p.adjoint();
    let leak = max_abs(&(&h.total() * &p - &proj * h.total() * &p));
    out.push(CheckResult::below("physical subspace leakage under H", leak, 1e-12));

    let trotter = TrotterConfig::new(opts.g2, 3.0, 30)?;
    let sim = Simulator::new(trotter)?;
    let noise = crate::dynamics::NoiseSpec::new(crate::dynamics::NoiseKind::Depolarizing, 0.0)?;
    let rows = sim.run_evolve(&EvolveConfig::new(trotter, noise, false, 1e-5, 10)?, &mut |_, _| Ok(()))?;
    let worst = rows.iter().map(|r| (r.gi_overlap - 1.0).abs()).fold(0.0, f64::max);
    out.push(CheckResult::below("noiseless 30-step GI overlap drift", worst, 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let est = haar_mc_oracle(opts.mc_samples, &mut rng)?;
    let dev = max_abs_diff(&est, &plaquette_operator()?);
    out.push(
        CheckResult::below("Haar MC plaquette trace vs contraction", dev, 0.05)
            .with_detail(format!("{} samples, seed {}", opts.mc_samples, opts.seed)),
    );
    Ok(out)
}

pub fn tdesign_suite(opts: &SuiteOptions) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let t_req = required_design_strength(2, 1, SpinLabel::HALF)?;
    out.push(CheckResult::below("plaquette design strength - 3", (t_req as f64 - 3.0).abs(), 0.5));
    let square = required_design_strength(4, 2, SpinLabel::HALF)?;
    out.push(CheckResult::below("square-lattice design strength - 6", (square as f64 - 6.0).abs(), 0.5));
    out.push(CheckResult::below(
        "plaquette max bidegree - required strength",
        (plaquette_max_bidegree(SpinLabel::HALF) as f64 - t_req as f64).abs(),
        0.5,
    ));

    let (design, label) = match &opts.design {
        Some(d) => (d.clone(), "user design"),
        None => (binary_octahedral_design(), "binary octahedral"),
    };
    let rep = verify_tdesign(&design, t_req)?;
    let mut c = CheckResult::below(format!("{label} ({} elements) t={t_req}", design.len()), rep.max_deviation, 1e-12);
    if !c.passed {
        let (a, b) = rep.worst_pair;
        c = c.with_detail(format!("fails at bidegree ({a},{b})"));
    }
    let design_ok = c.passed;
    out.push(c);
    if opts.design.is_none() {
        let rep4 = verify_tdesign(&design, 4)?;
        let (a, b) = rep4.worst_pair;
        out.push(
            CheckResult::above("binary octahedral t=4 (negative)", rep4.max_deviation, 0.01)
                .with_detail(format!("worst bidegree ({a},{b})")),
        );
    }
    if design_ok {
        for v in 0..N_VERTICES {
            let basis = build_cg_basis(v)?;
            let s = discrete_syndrome_check(&design, &basis)?;
            out.push(
                CheckResult::below(format!("discrete syndrome operators, vertex {v}"), s.max_deviation, 1e-10).with_detail(
                    format!("worst (2J,2M,2N)=({},{},{})", s.worst.j.twice(), s.worst.twice_m, s.worst.twice_n),
                ),
            );
        }
    }
    Ok(out)
}

pub fn qft_suite() -> Result<Vec<CheckResult>> {
    let d = binary_octahedral_design();
    let mut out = Vec::new();
    for j in [SpinLabel::HALF, SpinLabel::ONE] {
        let q = truncated_qft(&d, j)?;
        out.push(CheckResult::below(format!("WW† = 1, j_cut={j}"), q.isometry_error(), 1e-12));
        out.push(CheckResult::below(format!("character kernel, j_cut={j}"), qft_kernel_check(&d, j)?, 1e-12));
        let u = embed_unitary(&q)?;
        out.push(CheckResult::below(format!("embedded unitary, j_cut={j}"), unitarity_error(&u), 1e-9));
    }
    Ok(out)
}

pub fn detection_suite() -> Result<Vec<CheckResult>> {
    let basis = coord4_cg_basis()?;
    let mut out = Vec::new();
    let mut worst0: f64 = 0.0;
    let mut worst2: f64 = 0.0;
    for a in Axis::ALL {
        for k in 0..4 {
            worst0 = worst0.max(detection_check(&basis, ErrorOp::Pauli(a), k)?);
            let e = edge_operator(&pauli(a), k)?;
            worst2 = worst2.max(sandwich_norm(&basis, &e, SpinLabel::from_twice(4), SpinLabel::ZERO));
        }
    }
    out.push(CheckResult::below("Π_0 E Π_0 over 12 Paulis", worst0, 1e-12));
    out.push(CheckResult::below("Π_2 E Π_0 over 12 Paulis", worst2, 1e-12));

    let mut kl_worst: f64 = 0.0;
    for (err, twice_m) in [(ErrorOp::Pauli(Axis::Z), 0), (ErrorOp::Pauli(Axis::X), 2), (ErrorOp::Pauli(Axis::Y), 2)] {
        for k in 0..4 {
            let m = multiplicity_map(&basis, err, k, twice_m)?;
            kl_worst = kl_worst.max(kl_diagonal_defect(&kl_product(&m, &m)?));
        }
    }
    out.push(CheckResult::below("A_k†A_k ∝ 1", kl_worst, 1e-10));

    let a0 = multiplicity_map(&basis, ErrorOp::Pauli(Axis::Z), 0, 0)?;
    let a1 = multiplicity_map(&basis, ErrorOp::Pauli(Axis::Z), 1, 0)?;
    let p01 = kl_product(&a0, &a1)?;
    let published = diag_real(&[-1.0, 1.0 / 3.0]);
    let order = match_column_order(&p01, &published, 1e-10);
    let dev = match order {
        Some(crate::kl::ColumnOrder::Swapped) => {
            max_abs_diff(&CMatrix::from_fn(2, 2, |r, c| p01[(1 - r, 1 - c)]), &published)
        }
        _ => max_abs_diff(&p01, &published),
    };
    out.push(
        CheckResult::below("A_Z0† A_Z1 = diag(-1, 1/3)", dev, 1e-10)
            .with_detail(format!("column order {}", order.map_or("unmatched".into(), |o| format!("{o:?}")))),
    );

    let table = residual_pauli_weights(&basis, ErrorOp::Pauli(Axis::Z), 0, 0)?;
    let want = [[1.0, 0.0, 0.0, 0.0], [0.2, 0.0, 0.0, 0.8], [0.2, 0.6, 0.0, 0.2], [0.2, 0.6, 0.0, 0.2]];
    let mut wdev: f64 = 0.0;
    let mut ymax: f64 = 0.0;
    for (row, w) in table.rows.iter().zip(want) {
        for (x, y) in row.weights.iter().zip(w) {
            wdev = wdev.max((x - y).abs());
        }
        ymax = ymax.max(row.weights[2]);
    }
    out.push(CheckResult::below("residual Pauli weight table", wdev, 0.01));
    out.push(CheckResult::below("residual Y weight", ymax, 1e-10));
    Ok(out)
}
