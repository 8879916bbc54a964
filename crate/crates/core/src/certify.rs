//! Certificates: the block decomposition `Σ p_i + γ = 0` with
//! `f_i + p_i` in the block's truncated ideal plus quadratic module, its
//! ε-relaxed form, membership tests, and sparse infeasibility certificates.
//!
//! Verification never trusts solver residuals: Gram data are re-expanded with
//! polynomial arithmetic and compared coefficient by coefficient.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{Exponent, Polynomial};
use crate::relax::{assemble, BlockRole, Model, RowRole, SdpProblem};
use crate::sdp::linalg::{eig_sym, sym};
use crate::sdp::{solve, SdpSolution, SdpStandard, SdpStatus};
use crate::sparsity::SparsityPattern;
use crate::SparsePop;

/// Eigenvalues of a Gram matrix below `-GRAM_FLOOR` invalidate it; those in
/// `[-GRAM_FLOOR, 0)` are clipped before re-expansion.
pub const GRAM_FLOOR: f64 = 1e-9;
pub const DEFAULT_CERT_TOL: f64 = 1e-5;

/// A PSD Gram matrix `G` contributing `g · bᵀ G b`, where `g` is the product
/// of the listed inequality constraints of the block (1 if none).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramTerm {
    pub constraints: Vec<usize>,
    pub basis: Vec<Exponent>,
    pub side: usize,
    /// Row-major, `side * side` entries.
    pub gram: Vec<f64>,
}

impl GramTerm {
    fn from_matrix(constraints: Vec<usize>, basis: Vec<Exponent>, m: &DMatrix<f64>) -> Self {
        let side = m.nrows();
        let mut gram = Vec::with_capacity(side * side);
        for r in 0..side {
            for c in 0..side {
                gram.push(m[(r, c)]);
            }
        }
        Self {
            constraints,
            basis,
            side,
            gram,
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.side, self.side, &self.gram)
    }
}

/// Multiplier `φ` of the equality constraint `h_{constraint}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealTerm {
    pub constraint: usize,
    pub multiplier: Polynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCertificate {
    pub block: usize,
    pub p: Polynomial,
    pub grams: Vec<GramTerm>,
    pub ideal: Vec<IdealTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cone {
    Qmodule,
    Preordering,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessCertificate {
    pub order: u32,
    pub gamma: f64,
    pub cone: Cone,
    /// Present on ε-certificates: `f_i + p_i + ε` is certified instead of `f_i + p_i`.
    pub epsilon: Option<f64>,
    pub blocks: Vec<BlockCertificate>,
    /// `‖Σ p_i + γ‖∞` at construction.
    pub identity_residual: f64,
    /// Per block `‖f_i + p_i (+ ε) − s_i‖∞` at construction.
    pub membership_residuals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub order: u32,
    /// `-1 + p_i = s_i` per block.
    pub blocks: Vec<BlockCertificate>,
    /// `‖Σ p_i‖∞`.
    pub identity_residual: f64,
    pub membership_residuals: Vec<f64>,
}

/// The block sums `s_i` read off a solved relaxation: Gram blocks from the
/// PSD part of the SOS side and ideal multipliers from the free part.
struct SosParts {
    blocks: Vec<(Vec<GramTerm>, Vec<IdealTerm>)>,
    /// Multiplier of the normalization row.
    x_norm: f64,
}

fn sos_parts(sdp: &SdpProblem, sol: &SdpSolution) -> Result<SosParts> {
    let pop = &sdp.pop;
    let n = pop.n();
    let m = pop.num_blocks();
    let mut blocks: Vec<(Vec<GramTerm>, Vec<IdealTerm>)> = vec![(Vec::new(), Vec::new()); m];
    for (psd, x) in sdp.psd.iter().zip(&sol.x) {
        let (block, constraints) = match &psd.role {
            BlockRole::Moment { block } => (*block, Vec::new()),
            BlockRole::Localizer { block, constraints } => (*block, constraints.clone()),
            BlockRole::Auxiliary => {
                return Err(Error::Certificate(
                    "auxiliary PSD blocks carry no certificate data".into(),
                ))
            }
        };
        blocks[block]
            .0
            .push(GramTerm::from_matrix(constraints, psd.basis.clone(), &sym(x)));
    }
    let mut ideal: Vec<BTreeMap<usize, Polynomial>> = vec![BTreeMap::new(); m];
    let mut x_norm = 0.0;
    for (row, &xf) in sdp.rows.iter().zip(&sol.x_free) {
        match &row.role {
            RowRole::Normalization => x_norm += xf,
            RowRole::Ideal {
                block,
                constraint,
                shift,
            } => {
                ideal[*block]
                    .entry(*constraint)
                    .or_insert_with(|| Polynomial::zero(n))
                    .add_term(shift.clone(), -xf);
            }
            RowRole::Auxiliary => return Err(Error::Certificate("auxiliary rows carry no certificate data".into())),
        }
    }
    for (i, terms) in ideal.into_iter().enumerate() {
        blocks[i].1 = terms
            .into_iter()
            .map(|(constraint, multiplier)| IdealTerm { constraint, multiplier })
            .collect();
    }
    Ok(SosParts { blocks, x_norm })
}

fn cone_of(model: Model) -> Cone {
    match model {
        Model::SparsePutinar | Model::DensePutinar => Cone::Qmodule,
        Model::SparseSchmudgen | Model::DenseSchmudgen => Cone::Preordering,
    }
}

/// `p_i := s_i − f_i` from a solved relaxation at value `gamma`.
pub fn split_representation(sdp: &SdpProblem, sol: &SdpSolution, gamma: f64) -> Result<TightnessCertificate> {
    if !matches!(
        sol.status,
        SdpStatus::Optimal | SdpStatus::NearOptimal | SdpStatus::Stalled
    ) {
        return Err(Error::Certificate(format!(
            "no certificate from a {:?} solve",
            sol.status
        )));
    }
    let gap = (sol.primal_objective - sol.dual_objective).abs();
    if !gap.is_finite() || gap > 1e-3 * (1.0 + gamma.abs()) {
        return Err(Error::Certificate(format!(
            "duality gap {gap:.3e} is too large to recover Gram data"
        )));
    }
    let pop = &sdp.pop;
    let parts = sos_parts(sdp, sol)?;
    let blocks = parts
        .blocks
        .into_iter()
        .enumerate()
        .map(|(i, (grams, ideal))| {
            let s = expand(pop, i, &grams, &ideal);
            BlockCertificate {
                block: i,
                p: s.sub(&pop.f_parts()[i]),
                grams,
                ideal,
            }
        })
        .collect();
    let mut cert = TightnessCertificate {
        order: sdp.order,
        gamma,
        cone: cone_of(sdp.model),
        epsilon: None,
        blocks,
        identity_residual: 0.0,
        membership_residuals: Vec::new(),
    };
    let rep = verify_certificate(&cert, pop, &[], DEFAULT_CERT_TOL);
    cert.identity_residual = rep.identity_residual;
    cert.membership_residuals = rep.membership_residuals;
    Ok(cert)
}

/// Turns a certificate at value `gamma` into an ε-certificate for `target`
/// (for instance the value at a feasible point): each `p_i` drops by
/// `(target − γ)/m` and the slack `ε − (target − γ)/m ≥ 0` is absorbed into
/// the constant entry of the block's SOS Gram matrix.
pub fn epsilon_certificate(
    cert: &TightnessCertificate,
    pop: &SparsePop,
    target: f64,
    eps: f64,
) -> Result<TightnessCertificate> {
    let m = cert.blocks.len() as f64;
    let delta = (target - cert.gamma) / m;
    let slack = eps - delta;
    if slack < -GRAM_FLOOR {
        return Err(Error::Certificate(format!(
            "ε = {eps:.3e} is below the per-block gap {delta:.3e}"
        )));
    }
    let mut out = cert.clone();
    out.gamma = target;
    out.epsilon = Some(eps + cert.epsilon.unwrap_or(0.0));
    let n = pop.n();
    for b in &mut out.blocks {
        b.p = b.p.sub(&Polynomial::constant(n, delta));
        let sos = b
            .grams
            .iter_mut()
            .find(|g| g.constraints.is_empty() && g.basis.first().is_some_and(Exponent::is_zero))
            .ok_or_else(|| Error::Certificate(format!("block {} has no SOS Gram term", b.block + 1)))?;
        sos.gram[0] += slack;
    }
    let rep = verify_certificate(&out, pop, &[], DEFAULT_CERT_TOL);
    out.identity_residual = rep.identity_residual;
    out.membership_residuals = rep.membership_residuals;
    Ok(out)
}

/// Symmetrizes and clips `G`; `Err` carries the offending eigenvalue.
fn floored(g: &GramTerm) -> std::result::Result<DMatrix<f64>, f64> {
    let m = sym(&g.matrix());
    if m.nrows() == 0 {
        return Ok(m);
    }
    let Ok((vals, vecs)) = eig_sym(&m) else {
        return Err(f64::NAN);
    };
    let lmin = vals[vals.len() - 1];
    if lmin < -GRAM_FLOOR {
        return Err(lmin);
    }
    if lmin >= 0.0 {
        return Ok(m);
    }
    let clipped = DMatrix::from_diagonal(&vals.map(|v| v.max(0.0)));
    Ok(sym(&(&vecs * clipped * vecs.transpose())))
}

/// `bᵀ G b` as a polynomial.
fn quadratic_form(n: usize, basis: &[Exponent], g: &DMatrix<f64>) -> Polynomial {
    let mut out = Polynomial::zero(n);
    for r in 0..basis.len() {
        for c in 0..basis.len() {
            if g[(r, c)] != 0.0 {
                out.add_term(basis[r].mul(&basis[c]), g[(r, c)]);
            }
        }
    }
    out
}

fn constraint_product(pop: &SparsePop, i: usize, constraints: &[usize]) -> Option<Polynomial> {
    let g = &pop.ineq()[i];
    if constraints.iter().any(|&j| j >= g.len()) {
        return None;
    }
    Some(Polynomial::product(pop.n(), constraints.iter().map(|&j| &g[j])))
}

/// `s_i = Σ g_J · bᵀ G b + Σ φ_j h_j`, with Gram matrices taken as given.
fn expand(pop: &SparsePop, i: usize, grams: &[GramTerm], ideal: &[IdealTerm]) -> Polynomial {
    let n = pop.n();
    let mut s = Polynomial::zero(n);
    for g in grams {
        if let Some(mult) = constraint_product(pop, i, &g.constraints) {
            s = s.add(&mult.mul(&quadratic_form(n, &g.basis, &g.matrix())));
        }
    }
    for t in ideal {
        if let Some(h) = pop.eq()[i].get(t.constraint) {
            s = s.add(&t.multiplier.mul(h));
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub identity_residual: f64,
    pub membership_residuals: Vec<f64>,
    /// Smallest Gram eigenvalue per block.
    pub min_gram_eigenvalues: Vec<f64>,
    pub problems: Vec<String>,
    /// For each candidate point, `max_i |f_i + p_i|` at its projections.
    pub common_zero: Vec<f64>,
    pub epsilon: Option<f64>,
    pub passed: bool,
}

/// Re-checks a certificate from scratch: PSD-ness and support of each Gram
/// term, degrees within the truncation, `Σ p_i + γ = 0`, and
/// `f_i + p_i (+ ε) = s_i` by polynomial re-expansion. With candidate
/// minimizers, also checks that each `f_i + p_i` vanishes there.
pub fn verify_certificate(
    cert: &TightnessCertificate,
    pop: &SparsePop,
    minimizers: &[Vec<f64>],
    tol: f64,
) -> VerifyReport {
    let n = pop.n();
    let shift = |p: &Polynomial, i: usize| -> Polynomial {
        let base = pop.f_parts()[i].add(p);
        match cert.epsilon {
            Some(e) => base.add(&Polynomial::constant(n, e)),
            None => base,
        }
    };
    let mut rep = check_blocks(pop, cert.order, &cert.blocks, shift);
    let mut sum = Polynomial::constant(n, cert.gamma);
    for b in &cert.blocks {
        sum = sum.add(&b.p);
    }
    rep.identity_residual = sum.max_abs_coeff();
    if rep.identity_residual > tol * (1.0 + cert.gamma.abs()) {
        rep.problems
            .push(format!("Σ p_i + γ has residual {:.3e}", rep.identity_residual));
    }
    for (i, r) in rep.membership_residuals.iter().enumerate() {
        if *r > tol * (1.0 + pop.f_parts()[i].max_abs_coeff()) {
            rep.problems
                .push(format!("block {}: membership residual {r:.3e}", i + 1));
        }
    }
    for x in minimizers {
        let v = cert
            .blocks
            .iter()
            .map(|b| {
                pop.f_parts()[b.block]
                    .add(&b.p)
                    .eval(x)
                    .map(f64::abs)
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max);
        if v > tol.sqrt() {
            rep.problems
                .push(format!("f_i + p_i does not vanish at a candidate ({v:.3e})"));
        }
        rep.common_zero.push(v);
    }
    rep.epsilon = cert.epsilon;
    rep.passed = rep.problems.is_empty();
    rep
}

/// Shared structural checks; fills the membership residuals of
/// `target(p_i, i) − s_i`.
fn check_blocks(
    pop: &SparsePop,
    order: u32,
    blocks: &[BlockCertificate],
    target: impl Fn(&Polynomial, usize) -> Polynomial,
) -> VerifyReport {
    let n = pop.n();
    let mut problems = Vec::new();
    let mut membership = Vec::new();
    let mut eigs = Vec::new();
    if blocks.len() != pop.num_blocks() {
        problems.push(format!(
            "certificate has {} blocks, problem has {}",
            blocks.len(),
            pop.num_blocks()
        ));
    }
    for (i, b) in blocks.iter().enumerate() {
        if b.block != i || i >= pop.num_blocks() {
            problems.push(format!("block entry {} is out of order", i + 1));
            membership.push(f64::INFINITY);
            eigs.push(f64::NAN);
            continue;
        }
        let vars = pop.pattern().block(i);
        if !b.p.support_check(vars) {
            problems.push(format!("block {}: p uses variables outside the block", i + 1));
        }
        let mut s = Polynomial::zero(n);
        let mut lmin = f64::INFINITY;
        for g in &b.grams {
            if g.gram.len() != g.side * g.side || g.basis.len() != g.side {
                problems.push(format!("block {}: malformed Gram matrix", i + 1));
                continue;
            }
            if g.basis.iter().any(|e| !e.supported_in(vars)) {
                problems.push(format!("block {}: Gram basis leaves the block", i + 1));
            }
            let Some(mult) = constraint_product(pop, i, &g.constraints) else {
                problems.push(format!("block {}: unknown constraint index", i + 1));
                continue;
            };
            let m = match floored(g) {
                Ok(m) => m,
                Err(l) => {
                    problems.push(format!("block {}: Gram eigenvalue {l:.3e} below the floor", i + 1));
                    lmin = lmin.min(l);
                    continue;
                }
            };
            if m.nrows() > 0 {
                lmin = lmin.min(crate::sdp::linalg::min_eigenvalue(&m));
            }
            let term = mult.mul(&quadratic_form(n, &g.basis, &m));
            if term.degree() > 2 * order && !term.is_zero() {
                problems.push(format!(
                    "block {}: Gram term of degree {} exceeds {}",
                    i + 1,
                    term.degree(),
                    2 * order
                ));
            }
            s = s.add(&term);
        }
        for t in &b.ideal {
            let Some(h) = pop.eq()[i].get(t.constraint) else {
                problems.push(format!("block {}: unknown equality index", i + 1));
                continue;
            };
            if !t.multiplier.support_check(vars) {
                problems.push(format!("block {}: ideal multiplier leaves the block", i + 1));
            }
            let term = t.multiplier.mul(h);
            if term.degree() > 2 * order && !term.is_zero() {
                problems.push(format!(
                    "block {}: ideal term of degree {} exceeds {}",
                    i + 1,
                    term.degree(),
                    2 * order
                ));
            }
            s = s.add(&term);
        }
        membership.push(target(&b.p, i).sub(&s).max_abs_coeff());
        eigs.push(lmin);
    }
    VerifyReport {
        identity_residual: 0.0,
        membership_residuals: membership,
        min_gram_eigenvalues: eigs,
        problems,
        common_zero: Vec::new(),
        epsilon: None,
        passed: false,
    }
}

/// Verifies `Σ p_i = 0` and `−1 + p_i = s_i` per block.
pub fn verify_infeasibility(cert: &InfeasibilityCertificate, pop: &SparsePop, tol: f64) -> VerifyReport {
    let n = pop.n();
    let mut rep = check_blocks(pop, cert.order, &cert.blocks, |p, _| {
        p.sub(&Polynomial::constant(n, 1.0))
    });
    let mut sum = Polynomial::zero(n);
    for b in &cert.blocks {
        sum = sum.add(&b.p);
    }
    rep.identity_residual = sum.max_abs_coeff();
    if rep.identity_residual > tol {
        rep.problems
            .push(format!("Σ p_i has residual {:.3e}", rep.identity_residual));
    }
    for (i, r) in rep.membership_residuals.iter().enumerate() {
        if *r > tol {
            rep.problems
                .push(format!("block {}: membership residual {r:.3e}", i + 1));
        }
    }
    rep.passed = rep.problems.is_empty();
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum InfeasibilityOutcome {
    Found { certificate: InfeasibilityCertificate },
    NotFound,
    Indeterminate { status: SdpStatus },
}

/// Searches for `p_i` with `Σ p_i = 0` and `−1 + p_i` in the block's
/// truncated ideal plus preordering, by solving the zero-objective
/// preordering relaxation and reading off an infeasibility ray.
pub fn sparse_infeasibility(pop: &SparsePop, k: u32) -> Result<InfeasibilityOutcome> {
    let n = pop.n();
    let m = pop.num_blocks();
    let zero = SparsePop::new(
        pop.pattern().clone(),
        vec![Polynomial::zero(n); m],
        pop.eq().to_vec(),
        pop.ineq().to_vec(),
    )?;
    let sdp = assemble(&zero, k, Model::SparseSchmudgen)?;
    let sol = solve(&SdpStandard::from_relaxation(&sdp), 1e-9, 200)?;
    match sol.status {
        SdpStatus::InfeasibleCertificate => {}
        SdpStatus::Optimal | SdpStatus::NearOptimal => return Ok(InfeasibilityOutcome::NotFound),
        status => return Ok(InfeasibilityOutcome::Indeterminate { status }),
    }
    // On the ray: Σ s_i = x_norm < 0. Scale so that Σ s_i = −m.
    let parts = sos_parts(&sdp, &sol)?;
    if parts.x_norm >= 0.0 {
        return Ok(InfeasibilityOutcome::Indeterminate { status: sol.status });
    }
    let scale = m as f64 / -parts.x_norm;
    let blocks: Vec<BlockCertificate> = parts
        .blocks
        .into_iter()
        .enumerate()
        .map(|(i, (mut grams, mut ideal))| {
            for g in &mut grams {
                g.gram.iter_mut().for_each(|v| *v *= scale);
            }
            for t in &mut ideal {
                t.multiplier = t.multiplier.scale(scale);
            }
            let s = expand(&zero, i, &grams, &ideal);
            BlockCertificate {
                block: i,
                p: s.add(&Polynomial::constant(n, 1.0)),
                grams,
                ideal,
            }
        })
        .collect();
    let mut cert = InfeasibilityCertificate {
        order: k,
        blocks,
        identity_residual: 0.0,
        membership_residuals: Vec::new(),
    };
    let rep = verify_infeasibility(&cert, pop, DEFAULT_CERT_TOL);
    cert.identity_residual = rep.identity_residual;
    cert.membership_residuals = rep.membership_residuals;
    if !rep.passed {
        return Ok(InfeasibilityOutcome::Indeterminate { status: sol.status });
    }
    Ok(InfeasibilityOutcome::Found { certificate: cert })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Membership {
    /// `q = Σ σ_J g_J + Σ φ_j h_j` with the given data.
    Member {
        certificate: BlockCertificate,
        residual: f64,
    },
    /// A moment vector feasible for the order-`k` constraints with `⟨q, y⟩ < 0`.
    NotMember { separator: Vec<f64>, value: f64 },
    /// The solver did not settle the question.
    Indeterminate { status: SdpStatus, reason: String },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// Decides whether `q` lies in the degree-`2k` truncation of
/// `Ideal[h] + QM[g]` (or the preordering) over the variables `vars`.
pub fn check_membership(
    q: &Polynomial,
    vars: &[usize],
    h: &[Polynomial],
    g: &[Polynomial],
    k: u32,
    cone: Cone,
) -> Result<Membership> {
    let n = q.nvars();
    let pattern = SparsityPattern::new(n, vec![vars.to_vec()])?;
    let pop = SparsePop::new(pattern, vec![q.clone()], vec![h.to_vec()], vec![g.to_vec()])?;
    let model = match cone {
        Cone::Qmodule => Model::SparsePutinar,
        Cone::Preordering => Model::SparseSchmudgen,
    };
    let sdp = assemble(&pop, k, model)?;
    let sol = solve(&SdpStandard::from_relaxation(&sdp), 1e-9, 200)?;
    if !sol.status.is_solved() {
        return Ok(Membership::Indeterminate {
            status: sol.status,
            reason: "the relaxation did not converge".into(),
        });
    }
    let gamma = -sol.dual_objective;
    let scale = 1.0 + q.max_abs_coeff();
    if gamma < -1e-6 * scale {
        let value = sdp.objective.eval(&sol.y);
        let feasible = sdp.violation(&sol.y) <= 1e-6 * scale;
        if value < 0.0 && feasible {
            return Ok(Membership::NotMember {
                separator: sol.y,
                value,
            });
        }
        return Ok(Membership::Indeterminate {
            status: sol.status,
            reason: format!("negative bound {gamma:.3e} without a clean separator"),
        });
    }
    // q = (q − γ) + γ with γ ≥ 0 (up to roundoff) folded into the constant Gram entry.
    let parts = sos_parts(&sdp, &sol)?;
    let (mut grams, ideal) = parts.blocks.into_iter().next().expect("one block");
    if let Some(sos) = grams
        .iter_mut()
        .find(|t| t.constraints.is_empty() && t.basis.first().is_some_and(Exponent::is_zero))
    {
        sos.gram[0] += gamma;
    }
    let certificate = BlockCertificate {
        block: 0,
        p: Polynomial::zero(n),
        grams,
        ideal,
    };
    let rep = check_blocks(&pop, k, std::slice::from_ref(&certificate), |_, _| q.clone());
    let residual = rep.membership_residuals[0];
    if !rep.problems.is_empty() || residual > 1e-6 * scale {
        return Ok(Membership::Indeterminate {
            status: sol.status,
            reason: format!("reconstruction residual {residual:.3e}; {}", rep.problems.join("; ")),
        });
    }
    Ok(Membership::Member { certificate, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, s: &str) -> Polynomial {
        Polynomial::parse(n, s).unwrap()
    }

    #[test]
    fn explicit_square_is_member() {
        let m = check_membership(&p(1, "x1^2 - 2*x1 + 1"), &[1], &[], &[], 1, Cone::Qmodule).unwrap();
        let Membership::Member { residual, .. } = m else {
            panic!("{m:?}")
        };
        assert!(residual <= 1e-6 * 3.0);
    }

    #[test]
    fn minus_one_is_not_member() {
        for k in 1..=2 {
            let m = check_membership(&p(2, "-1"), &[1, 2], &[], &[], k, Cone::Qmodule).unwrap();
            let Membership::NotMember { separator, value } = m else {
                panic!("{m:?}")
            };
            assert!((value + 1.0).abs() < 1e-8 && (separator[0] - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn interval_contradiction_is_certified() {
        // x1 >= 1 and -x1 >= 0
        let pattern = SparsityPattern::new(1, vec![vec![1]]).unwrap();
        let pop = SparsePop::new(
            pattern,
            vec![Polynomial::zero(1)],
            vec![vec![]],
            vec![vec![p(1, "x1 - 1"), p(1, "-x1")]],
        )
        .unwrap();
        let out = sparse_infeasibility(&pop, 1).unwrap();
        let InfeasibilityOutcome::Found { certificate } = out else {
            panic!("{out:?}")
        };
        assert!(verify_infeasibility(&certificate, &pop, 1e-6).passed);
    }

    #[test]
    fn feasible_set_has_no_certificate() {
        let pattern = SparsityPattern::new(2, vec![vec![1, 2]]).unwrap();
        let pop = SparsePop::new(
            pattern,
            vec![Polynomial::zero(2)],
            vec![vec![]],
            vec![vec![p(2, "1 - x1^2 - x2^2")]],
        )
        .unwrap();
        for k in 1..=2 {
            assert_eq!(sparse_infeasibility(&pop, k).unwrap(), InfeasibilityOutcome::NotFound);
        }
    }
}
