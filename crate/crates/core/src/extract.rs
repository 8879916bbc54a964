//! Rank tests on moment matrices, atom extraction and minimizer recovery.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{Exponent, MonomialBasis};
use crate::relax::{min_order, SparsePop, UnionIndex};
use crate::sdp::linalg::eig_sym;
use crate::sparsity::{intersect, RipReport};

pub const DEFAULT_RANK_TOL: f64 = 1e-6;
/// A rank gap `σ_r / σ_{r+1}` below this makes a rank decision ambiguous.
pub const MIN_RANK_GAP: f64 = 10.0;
pub const DEFAULT_MATCH_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankInfo {
    pub rank: usize,
    /// `σ_r / σ_{r+1}`; infinite when nothing is cut off.
    pub gap: f64,
    pub sigma_max: f64,
}

/// Number of singular values above `tau_rel · σ_max`, together with the gap
/// at the cut.
pub fn rank_info(m: &DMatrix<f64>, tau_rel: f64) -> Result<RankInfo> {
    if m.nrows() == 0 {
        return Ok(RankInfo {
            rank: 0,
            gap: f64::INFINITY,
            sigma_max: 0.0,
        });
    }
    let s = crate::sdp::linalg::singular_values_sym(m)?;
    let sigma_max = s[0];
    if sigma_max == 0.0 {
        return Ok(RankInfo {
            rank: 0,
            gap: f64::INFINITY,
            sigma_max,
        });
    }
    let rank = s.iter().filter(|&&v| v > tau_rel * sigma_max).count();
    let gap = if rank == s.len() {
        f64::INFINITY
    } else if s[rank] == 0.0 {
        f64::INFINITY
    } else {
        s[rank - 1] / s[rank]
    };
    Ok(RankInfo { rank, gap, sigma_max })
}

pub fn numeric_rank(m: &DMatrix<f64>, tau_rel: f64) -> usize {
    rank_info(m, tau_rel).map(|r| r.rank).unwrap_or(0)
}

/// Moments of a measure on the variables `vars`, up to some degree.
#[derive(Clone, Debug, Default)]
pub struct BlockMoments {
    pub vars: Vec<usize>,
    pub values: BTreeMap<Exponent, f64>,
}

impl BlockMoments {
    /// Restricts the moment vector `y` on `index` to exponents in `vars` of
    /// degree at most `degree`.
    pub fn from_union(index: &UnionIndex, y: &[f64], vars: &[usize], degree: u32) -> Result<Self> {
        let basis = MonomialBasis::new(vars, degree)?;
        let mut values = BTreeMap::new();
        for e in basis.exponents() {
            let pos = index
                .position(e)
                .ok_or_else(|| Error::Extraction(format!("moment {e} is outside the relaxation")))?;
            values.insert(e.clone(), y[pos]);
        }
        Ok(Self {
            vars: vars.to_vec(),
            values,
        })
    }

    /// Moments of `Σ λ_j δ_{u_j}` with points given in the order of `vars`.
    pub fn from_atoms(vars: &[usize], atoms: &[Atom], degree: u32) -> Result<Self> {
        let basis = MonomialBasis::new(vars, degree)?;
        let mut values = BTreeMap::new();
        for (k, e) in basis.exponents().iter().enumerate() {
            let v = atoms.iter().map(|a| a.weight * basis_eval(&basis, k, &a.point)).sum();
            values.insert(e.clone(), v);
        }
        Ok(Self {
            vars: vars.to_vec(),
            values,
        })
    }

    pub fn get(&self, e: &Exponent) -> Result<f64> {
        self.values
            .get(e)
            .copied()
            .ok_or_else(|| Error::Extraction(format!("moment {e} not available")))
    }

    /// `M^{(t)}` over the variables in `sub` (a subset of `vars`).
    pub fn moment_matrix_on(&self, sub: &[usize], t: u32) -> Result<DMatrix<f64>> {
        let basis = MonomialBasis::new(sub, t)?;
        let s = basis.len();
        let mut m = DMatrix::zeros(s, s);
        for a in 0..s {
            for b in a..s {
                let v = self.get(&basis.get(a).mul(basis.get(b)))?;
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        Ok(m)
    }

    pub fn moment_matrix(&self, t: u32) -> Result<DMatrix<f64>> {
        self.moment_matrix_on(&self.vars, t)
    }
}

/// Evaluates basis monomial `k` at a point given in block-local order.
fn basis_eval(basis: &MonomialBasis, k: usize, local: &[f64]) -> f64 {
    let e = basis.get(k);
    let vars = basis.block();
    e.entries()
        .iter()
        .map(|&(v, p)| {
            let i = vars.binary_search(&v).expect("exponent supported in block");
            local[i].powi(p as i32)
        })
        .product()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFlat {
    pub block: usize,
    /// Degree shift `d_i` (at least 1).
    pub d: u32,
    /// `(t, rank M^{(t)}, rank M^{(t - d)}, gap of M^{(t)})` for `t` in `[max(k0, d), k]`.
    pub ranks: Vec<(u32, usize, usize, f64)>,
    /// Smallest `t` with equal ranks.
    pub flat_at: Option<u32>,
    /// `r_i`, the common rank at `flat_at`.
    pub rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapFlat {
    pub blocks: (usize, usize),
    pub vars: Vec<usize>,
    pub t: u32,
    pub rank_t: usize,
    pub rank_t_minus_1: usize,
}

impl OverlapFlat {
    pub fn holds(&self) -> bool {
        self.rank_t == self.rank_t_minus_1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatReport {
    pub blocks: Vec<BlockFlat>,
    pub overlaps: Vec<OverlapFlat>,
    pub warnings: Vec<String>,
}

impl FlatReport {
    pub fn all_flat(&self) -> bool {
        self.blocks.iter().all(|b| b.flat_at.is_some())
    }

    /// Largest per-block flat degree, if every block is flat.
    pub fn common_t(&self) -> Option<u32> {
        self.blocks
            .iter()
            .map(|b| b.flat_at)
            .collect::<Option<Vec<_>>>()?
            .into_iter()
            .max()
    }

    pub fn equal_ranks(&self) -> bool {
        let mut r = self.blocks.iter().map(|b| b.rank);
        match r.next() {
            Some(Some(first)) => r.all(|x| x == Some(first)),
            _ => false,
        }
    }
}

/// The degree shift `d_i`, floored at 1 so that unconstrained blocks still
/// compare two different truncations.
pub fn block_shift(pop: &SparsePop, i: usize) -> u32 {
    min_order(pop).d[i].max(1)
}

/// Flat truncation test on each block and the overlap rank test on each
/// pair of overlapping blocks.
pub fn flat_truncation(y: &[f64], index: &UnionIndex, pop: &SparsePop, k: u32, tau_rel: f64) -> Result<FlatReport> {
    let order = min_order(pop);
    let k0 = order.k0;
    let pattern = pop.pattern();
    let mut blocks = Vec::with_capacity(pattern.num_blocks());
    let mut warnings = Vec::new();
    for i in 0..pattern.num_blocks() {
        let vars = pattern.block(i);
        let mom = BlockMoments::from_union(index, y, vars, 2 * k)?;
        let d = order.d[i].max(1);
        let mut ranks = Vec::new();
        let mut flat_at = None;
        let mut rank = None;
        for t in k0.max(d)..=k {
            let hi = rank_info(&mom.moment_matrix(t)?, tau_rel)?;
            let lo = rank_info(&mom.moment_matrix(t - d)?, tau_rel)?;
            ranks.push((t, hi.rank, lo.rank, hi.gap));
            if hi.rank == lo.rank && flat_at.is_none() {
                flat_at = Some(t);
                rank = Some(hi.rank);
                if hi.gap < MIN_RANK_GAP {
                    warnings.push(format!(
                        "block {} at t={t}: rank gap {:.2e} makes the rank decision ambiguous",
                        i + 1,
                        hi.gap
                    ));
                }
            }
        }
        blocks.push(BlockFlat {
            block: i,
            d,
            ranks,
            flat_at,
            rank,
        });
    }
    let mut overlaps = Vec::new();
    for ((i, j), vars) in crate::sparsity::overlaps(pattern) {
        let t = match (blocks[i].flat_at, blocks[j].flat_at) {
            (Some(a), Some(b)) => a.max(b),
            _ => k,
        };
        let mom = BlockMoments::from_union(index, y, &vars, 2 * t)?;
        overlaps.push(OverlapFlat {
            blocks: (i, j),
            rank_t: numeric_rank(&mom.moment_matrix(t)?, tau_rel),
            rank_t_minus_1: numeric_rank(&mom.moment_matrix(t - 1)?, tau_rel),
            vars,
            t,
        });
    }
    Ok(FlatReport {
        blocks,
        overlaps,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub weight: f64,
    /// Coordinates in the order of the measure's `vars`.
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    /// Block index, `None` for a measure on all variables.
    pub block: Option<usize>,
    pub vars: Vec<usize>,
    pub atoms: Vec<Atom>,
    pub t: u32,
    /// `‖y|_{2t} − Σ λ_j [u_j]_{2t}‖∞`.
    pub residual: f64,
}

/// Row selection for the monomial basis of the quotient.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Pivoting {
    /// First independent rows in graded order.
    Ordered,
    /// Largest remaining row each step.
    Largest,
}

fn select_rows(v: &DMatrix<f64>, candidates: &[usize], r: usize, mode: Pivoting) -> Option<Vec<usize>> {
    let scale = candidates.iter().map(|&i| v.row(i).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut q: Vec<DVector<f64>> = Vec::new();
    let mut chosen = Vec::new();
    let residual = |i: usize, q: &[DVector<f64>]| {
        let mut w: DVector<f64> = v.row(i).transpose();
        for _ in 0..2 {
            for b in q {
                let d = b.dot(&w);
                w.axpy(-d, b, 1.0);
            }
        }
        w
    };
    while chosen.len() < r {
        let pick = match mode {
            Pivoting::Ordered => candidates
                .iter()
                .filter(|i| !chosen.contains(*i))
                .map(|&i| (i, residual(i, &q)))
                .find(|(_, w)| w.norm() > 1e-5 * scale),
            Pivoting::Largest => candidates
                .iter()
                .filter(|i| !chosen.contains(*i))
                .map(|&i| (i, residual(i, &q)))
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()).then(b.0.cmp(&a.0)))
                .filter(|(_, w)| w.norm() > 1e-8 * scale),
        };
        let (i, w) = pick?;
        let n = w.norm();
        q.push(w / n);
        chosen.push(i);
    }
    Some(chosen)
}

/// Recovers an `r`-atomic measure from its moments up to degree `2t`.
pub fn extract_atoms(mom: &BlockMoments, t: u32, r: usize) -> Result<AtomicMeasure> {
    if r == 0 || t == 0 {
        return Err(Error::Extraction("extraction needs r >= 1 and t >= 1".into()));
    }
    let mut last_err = None;
    for (attempt, mode) in [Pivoting::Ordered, Pivoting::Largest].into_iter().enumerate() {
        match extract_once(mom, t, r, mode, attempt as u64) {
            Ok(m) => return Ok(m),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn extract_once(mom: &BlockMoments, t: u32, r: usize, mode: Pivoting, seed: u64) -> Result<AtomicMeasure> {
    let vars = &mom.vars;
    let basis = MonomialBasis::new(vars, t)?;
    let m = mom.moment_matrix(t)?;
    let (vals, vecs) = eig_sym(&m)?;
    if r > vals.len() || vals[r - 1] <= 0.0 {
        return Err(Error::Extraction(format!(
            "moment matrix has fewer than {r} positive eigenvalues"
        )));
    }
    let mut v = DMatrix::zeros(basis.len(), r);
    for j in 0..r {
        v.set_column(j, &(vecs.column(j) * vals[j].sqrt()));
    }
    // basis monomials must have degree <= t-1 so that x_i * b stays in range
    let candidates: Vec<usize> = (0..basis.len()).filter(|&k| basis.get(k).degree() < t).collect();
    let rows = select_rows(&v, &candidates, r, mode).ok_or_else(|| {
        Error::Extraction(format!(
            "no {r} independent monomials of degree < {t}; the truncation is not flat"
        ))
    })?;
    let mut vb = DMatrix::zeros(r, r);
    for (a, &i) in rows.iter().enumerate() {
        vb.set_row(a, &v.row(i));
    }
    let vb_inv = vb
        .try_inverse()
        .ok_or_else(|| Error::Extraction("selected monomial rows are singular".into()))?;
    let u = &v * vb_inv;

    let mult: Vec<DMatrix<f64>> = vars
        .iter()
        .map(|&x| {
            let mut n = DMatrix::zeros(r, r);
            for (j, &i) in rows.iter().enumerate() {
                let shifted = basis.get(i).mul(&Exponent::var(x, 1));
                let pos = basis
                    .position(&shifted)
                    .ok_or_else(|| Error::Extraction(format!("monomial {shifted} outside the basis")))?;
                n.set_row(j, &u.row(pos));
            }
            Ok(n)
        })
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ seed);
    let coeffs: Vec<f64> = (0..vars.len()).map(|_| rng.random_range(0.1..1.0)).collect();
    let mut combo = DMatrix::zeros(r, r);
    for (c, n) in coeffs.iter().zip(&mult) {
        combo += n * *c;
    }
    let q = nalgebra::Schur::try_new(combo, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Extraction("real Schur decomposition did not converge".into()))?
        .unpack()
        .0;
    let points: Vec<Vec<f64>> = (0..r)
        .map(|j| {
            let qj = q.column(j);
            mult.iter().map(|n| qj.dot(&(n * qj))).collect()
        })
        .collect();

    // Weights from the moment match on all exponents up to 2t.
    let full = MonomialBasis::new(vars, 2 * t)?;
    let mut a = DMatrix::zeros(full.len(), r);
    let mut b = DVector::zeros(full.len());
    for k in 0..full.len() {
        b[k] = mom.get(full.get(k))?;
        for (j, p) in points.iter().enumerate() {
            a[(k, j)] = basis_eval(&full, k, p);
        }
    }
    let weights = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Extraction(format!("weight solve failed: {e}")))?;
    if let Some(w) = weights.iter().find(|&&w| w < -1e-8) {
        return Err(Error::Extraction(format!("negative atom weight {w:.3e}")));
    }
    let residual = (&a * &weights - &b).amax();
    let atoms = points
        .into_iter()
        .zip(weights.iter())
        .map(|(point, &weight)| Atom { weight, point })
        .collect();
    Ok(AtomicMeasure {
        block: None,
        vars: vars.clone(),
        atoms,
        t,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StitchStatus {
    Stitched,
    Refused {
        reason: String,
    },
    /// Some atom of `block` has no counterpart among the partial points built
    /// from earlier blocks (`parent` is the block containing the overlap).
    Unstitchable {
        block: usize,
        parent: usize,
        atom: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StitchOutcome {
    pub status: StitchStatus,
    /// Global points, `n` coordinates each.
    pub points: Vec<Vec<f64>>,
}

fn refused(reason: impl Into<String>) -> StitchOutcome {
    StitchOutcome {
        status: StitchStatus::Refused { reason: reason.into() },
        points: Vec::new(),
    }
}

/// Assembles global points from per-block atoms along the RIP ordering.
/// Requires RIP, a connected cover and equal atom counts; anything else is
/// refused rather than guessed.
pub fn stitch(measures: &[AtomicMeasure], n: usize, rip: &RipReport, tol: f64) -> StitchOutcome {
    if !rip.holds {
        return refused("the running intersection property fails");
    }
    if !rip.connected_cover {
        return refused("the blocks are not a connected cover");
    }
    let Some(ordering) = &rip.ordering else {
        return refused("no running intersection ordering");
    };
    if measures.len() != ordering.len() {
        return refused(format!(
            "expected {} block measures, got {}",
            ordering.len(),
            measures.len()
        ));
    }
    let r = measures[0].atoms.len();
    if measures.iter().any(|m| m.atoms.len() != r) {
        let counts: Vec<usize> = measures.iter().map(|m| m.atoms.len()).collect();
        return refused(format!("atom counts differ across blocks: {counts:?}"));
    }
    let parent_of: BTreeMap<usize, usize> = rip
        .witness
        .iter()
        .filter_map(|w| match w {
            crate::sparsity::RipWitness::Contained { block, parent, .. } => Some((*block, *parent)),
            _ => None,
        })
        .collect();

    let root = &measures[ordering[0]];
    let mut points: Vec<Vec<f64>> = root
        .atoms
        .iter()
        .map(|a| {
            let mut u = vec![f64::NAN; n];
            for (&v, &x) in root.vars.iter().zip(&a.point) {
                u[v - 1] = x;
            }
            u
        })
        .collect();
    let mut assigned: Vec<usize> = root.vars.clone();

    for &b in &ordering[1..] {
        let mb = &measures[b];
        let overlap = intersect(&mb.vars, &assigned);
        let local: Vec<usize> = overlap
            .iter()
            .map(|v| mb.vars.binary_search(v).expect("overlap inside block"))
            .collect();
        let dist = |u: &[f64], a: &Atom| -> f64 {
            overlap
                .iter()
                .zip(&local)
                .map(|(&v, &l)| (u[v - 1] - a.point[l]).abs())
                .fold(0.0, f64::max)
        };
        // greedy nearest neighbor, ties to the lower atom index
        let mut used = vec![false; r];
        let mut assignment = vec![usize::MAX; r];
        for (pi, u) in points.iter().enumerate() {
            let best = (0..r)
                .filter(|&a| !used[a])
                .min_by(|&a1, &a2| {
                    dist(u, &mb.atoms[a1])
                        .total_cmp(&dist(u, &mb.atoms[a2]))
                        .then(a1.cmp(&a2))
                })
                .expect("r unused atoms for r points");
            used[best] = true;
            assignment[pi] = best;
        }
        // full bipartite check: every pair in the assignment must match
        let parent = parent_of.get(&b).copied().unwrap_or(ordering[0]);
        for (pi, &a) in assignment.iter().enumerate() {
            if dist(&points[pi], &mb.atoms[a]) > tol {
                return StitchOutcome {
                    status: StitchStatus::Unstitchable {
                        block: b,
                        parent,
                        atom: a,
                    },
                    points: Vec::new(),
                };
            }
        }
        for (pi, &a) in assignment.iter().enumerate() {
            for (&v, &x) in mb.vars.iter().zip(&mb.atoms[a].point) {
                if points[pi][v - 1].is_nan() {
                    points[pi][v - 1] = x;
                }
            }
        }
        assigned.extend(mb.vars.iter().copied());
        assigned.sort_unstable();
        assigned.dedup();
    }
    StitchOutcome {
        status: StitchStatus::Stitched,
        points,
    }
}

/// All points whose projection on every block is one of that block's atoms
/// (within `tol` on shared coordinates). Needs no RIP; each candidate still
/// has to pass [`certify_by_value`]. Stops after `limit` candidates.
pub fn join_candidates(measures: &[AtomicMeasure], n: usize, tol: f64, limit: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut current = vec![f64::NAN; n];
    // visit blocks with most overlap to earlier ones first: plain index order
    // keeps the search deterministic and is enough at these sizes
    fn rec(
        measures: &[AtomicMeasure],
        idx: usize,
        current: &mut Vec<f64>,
        tol: f64,
        limit: usize,
        out: &mut Vec<Vec<f64>>,
    ) {
        if out.len() >= limit {
            return;
        }
        if idx == measures.len() {
            out.push(current.clone());
            return;
        }
        let m = &measures[idx];
        for a in &m.atoms {
            let fits = m
                .vars
                .iter()
                .zip(&a.point)
                .all(|(&v, &x)| current[v - 1].is_nan() || (current[v - 1] - x).abs() <= tol);
            if !fits {
                continue;
            }
            let saved: Vec<(usize, f64)> = m.vars.iter().map(|&v| (v, current[v - 1])).collect();
            for (&v, &x) in m.vars.iter().zip(&a.point) {
                if current[v - 1].is_nan() {
                    current[v - 1] = x;
                }
            }
            rec(measures, idx + 1, current, tol, limit, out);
            for (v, x) in saved {
                current[v - 1] = x;
            }
        }
    }
    rec(measures, 0, &mut current, tol, limit, &mut out);
    // variables outside every block stay undetermined
    out.retain(|p| p.iter().all(|x| x.is_finite()));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    TightMinimizer { value: f64 },
    InfeasiblePoint { violation: f64 },
    NotTight { value: f64, excess: f64 },
}

impl Verdict {
    pub fn is_tight(&self) -> bool {
        matches!(self, Verdict::TightMinimizer { .. })
    }
}

/// `x` is a certified minimizer when it is feasible within `tol` and its
/// value does not exceed the lower bound by more than `tol·(1 + |bound|)`.
pub fn certify_by_value(x: &[f64], pop: &SparsePop, bound: f64, tol: f64) -> Result<Verdict> {
    let violation = pop.max_violation(x)?;
    if violation > tol {
        return Ok(Verdict::InfeasiblePoint { violation });
    }
    let value = pop.eval_objective(x)?;
    let excess = value - bound;
    if excess <= tol * (1.0 + bound.abs()) {
        Ok(Verdict::TightMinimizer { value })
    } else {
        Ok(Verdict::NotTight { value, excess })
    }
}

/// Flat truncation at an order `t < k` only certifies when the order-`t`
/// bound matches the order-`k` bound.
pub fn lower_order_accepted(f_t: f64, f_k: f64, tol: f64) -> bool {
    (f_t - f_k).abs() <= tol * (1.0 + f_k.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsity::{check_rip, SparsityPattern};

    fn atoms(list: &[(f64, &[f64])]) -> Vec<Atom> {
        list.iter()
            .map(|(w, p)| Atom {
                weight: *w,
                point: p.to_vec(),
            })
            .collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&DMatrix::identity(5, 5), DEFAULT_RANK_TOL), 5);
        assert_eq!(numeric_rank(&DMatrix::zeros(3, 3), DEFAULT_RANK_TOL), 0);
        let mom = BlockMoments::from_atoms(&[1, 2], &atoms(&[(1.0, &[0.5, -0.3])]), 4).unwrap();
        assert_eq!(numeric_rank(&mom.moment_matrix(2).unwrap(), DEFAULT_RANK_TOL), 1);
    }

    #[test]
    fn two_point_mixture_rank() {
        let mom = BlockMoments::from_atoms(&[1, 2], &atoms(&[(0.5, &[1.0, 1.0]), (0.5, &[2.0, 2.0])]), 4).unwrap();
        assert_eq!(numeric_rank(&mom.moment_matrix(2).unwrap(), DEFAULT_RANK_TOL), 2);
        assert_eq!(numeric_rank(&mom.moment_matrix(1).unwrap(), DEFAULT_RANK_TOL), 2);
        assert_eq!(numeric_rank(&mom.moment_matrix(0).unwrap(), DEFAULT_RANK_TOL), 1);
    }

    #[test]
    fn single_atom_round_trip() {
        let mom = BlockMoments::from_atoms(&[1, 2], &atoms(&[(1.0, &[0.5, -0.3])]), 4).unwrap();
        let m = extract_atoms(&mom, 2, 1).unwrap();
        assert_eq!(m.atoms.len(), 1);
        assert!((m.atoms[0].weight - 1.0).abs() < 1e-8);
        assert!((m.atoms[0].point[0] - 0.5).abs() < 1e-8);
        assert!((m.atoms[0].point[1] + 0.3).abs() < 1e-8);
    }

    #[test]
    fn mixture_round_trip() {
        let mom = BlockMoments::from_atoms(&[2, 3], &atoms(&[(0.5, &[1.0, 2.0]), (0.5, &[2.0, 1.0])]), 4).unwrap();
        let mut m = extract_atoms(&mom, 2, 2).unwrap();
        m.atoms.sort_by(|a, b| a.point[0].total_cmp(&b.point[0]));
        assert!((m.atoms[0].point[0] - 1.0).abs() < 1e-8 && (m.atoms[0].point[1] - 2.0).abs() < 1e-8);
        assert!((m.atoms[1].point[0] - 2.0).abs() < 1e-8 && (m.atoms[1].point[1] - 1.0).abs() < 1e-8);
        assert!(m.atoms.iter().all(|a| (a.weight - 0.5).abs() < 1e-8));
        assert!(m.residual < 1e-8);
    }

    #[test]
    fn non_flat_rank_is_rejected() {
        // three atoms on a line need degree 3 to separate; t = 1 cannot hold r = 3
        let mom = BlockMoments::from_atoms(&[1], &atoms(&[(0.2, &[0.0]), (0.3, &[1.0]), (0.5, &[-1.0])]), 2).unwrap();
        assert!(extract_atoms(&mom, 1, 3).is_err());
    }

    fn measure(block: usize, vars: &[usize], pts: &[&[f64]]) -> AtomicMeasure {
        AtomicMeasure {
            block: Some(block),
            vars: vars.to_vec(),
            atoms: pts
                .iter()
                .map(|p| Atom {
                    weight: 1.0 / pts.len() as f64,
                    point: p.to_vec(),
                })
                .collect(),
            t: 2,
            residual: 0.0,
        }
    }

    #[test]
    fn stitch_two_disks() {
        let s = 0.5f64.sqrt();
        let pattern = SparsityPattern::new(3, vec![vec![1, 2], vec![2, 3]]).unwrap();
        let rip = check_rip(&pattern);
        let ms = [
            measure(0, &[1, 2], &[&[s, -s], &[-s, s]]),
            measure(1, &[2, 3], &[&[s, -s], &[-s, s]]),
        ];
        let out = stitch(&ms, 3, &rip, DEFAULT_MATCH_TOL);
        assert_eq!(out.status, StitchStatus::Stitched);
        let mut pts = out.points;
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(pts[0], vec![-s, s, -s]);
        assert_eq!(pts[1], vec![s, -s, s]);
    }

    #[test]
    fn stitch_refuses_without_rip() {
        let pattern = SparsityPattern::new(3, vec![vec![1, 2], vec![2, 3], vec![1, 3]]).unwrap();
        let rip = check_rip(&pattern);
        let ms = [
            measure(0, &[1, 2], &[&[1.0, 1.0], &[2.0, 2.0]]),
            measure(1, &[2, 3], &[&[1.0, 2.0], &[2.0, 1.0]]),
            measure(2, &[1, 3], &[&[1.0, 1.0], &[2.0, 2.0]]),
        ];
        assert!(matches!(
            stitch(&ms, 3, &rip, 1e-5).status,
            StitchStatus::Refused { .. }
        ));
        // and no join exists either
        assert!(join_candidates(&ms, 3, 1e-5, 100).is_empty());
    }

    #[test]
    fn stitch_single_block_passthrough() {
        let pattern = SparsityPattern::new(2, vec![vec![1, 2]]).unwrap();
        let rip = check_rip(&pattern);
        let ms = [measure(0, &[1, 2], &[&[0.25, -1.0]])];
        let out = stitch(&ms, 2, &rip, 1e-5);
        assert_eq!(out.status, StitchStatus::Stitched);
        assert_eq!(out.points, vec![vec![0.25, -1.0]]);
    }

    #[test]
    fn stitch_reports_mismatch_and_unequal_counts() {
        let pattern = SparsityPattern::new(3, vec![vec![1, 2], vec![2, 3]]).unwrap();
        let rip = check_rip(&pattern);
        let ms = [measure(0, &[1, 2], &[&[0.0, 1.0]]), measure(1, &[2, 3], &[&[0.5, 1.0]])];
        assert!(matches!(
            stitch(&ms, 3, &rip, 1e-5).status,
            StitchStatus::Unstitchable { block: 1, .. }
        ));
        let ms = [
            measure(0, &[1, 2], &[&[0.0, 1.0], &[1.0, 0.0]]),
            measure(1, &[2, 3], &[&[1.0, 1.0]]),
        ];
        assert!(matches!(
            stitch(&ms, 3, &rip, 1e-5).status,
            StitchStatus::Refused { .. }
        ));
        // the join route still finds the consistent point
        assert_eq!(join_candidates(&ms, 3, 1e-5, 100), vec![vec![0.0, 1.0, 1.0]]);
    }

    #[test]
    fn lower_order_check() {
        assert!(lower_order_accepted(-1.0, -1.0 + 1e-10, 1e-8));
        assert!(!lower_order_accepted(-1.1, -1.0, 1e-8));
    }
}
