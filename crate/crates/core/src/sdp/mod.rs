//! Primal-dual interior-point solver for block-diagonal SDPs.
//!
//! The solver works on the pair
//!
//! ```text
//! (P)  min  <C, X> + c_fᵀ x_f   s.t.  A(X) + F x_f = b,   X ⪰ 0,  x_f free
//! (D)  max  bᵀ y                s.t.  A*(y) + Z = C,      Fᵀ y = c_f,  Z ⪰ 0
//! ```
//!
//! where `X`, `Z` are block diagonal. Moment relaxations are the `(D)` side:
//! `y` is the moment vector, `Z` collects the moment and localizing matrices
//! and the columns of `F` are the linear equality rows. The `(P)` side holds
//! the Gram matrices and ideal multipliers of the SOS certificate.
//!
//! Search directions are HKM with a Mehrotra predictor-corrector. The
//! equality rows `Fᵀ y = c_f` are eliminated before the iteration starts
//! and `x_f` is recovered afterwards by least squares.

pub mod linalg;
mod reduce;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relax::SdpProblem;
use linalg::{chol, max_step, sym};

/// One nonzero of a symmetric constraint matrix, upper triangle (`row <= col`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Default)]
pub struct FreeColumn {
    /// Nonzeros `(constraint index, value)` of a column of `F`.
    pub entries: Vec<(usize, f64)>,
    pub cost: f64,
}

#[derive(Clone, Debug)]
pub struct SdpStandard {
    pub sides: Vec<usize>,
    /// `A_i` for each constraint `i`.
    pub a: Vec<Vec<SymEntry>>,
    pub b: Vec<f64>,
    /// Per block upper-triangle nonzeros of `C`.
    pub c: Vec<Vec<(usize, usize, f64)>>,
    pub free: Vec<FreeColumn>,
}

impl SdpStandard {
    /// Maps a moment relaxation onto `(D)`: `Z_b` is the block evaluated at
    /// `y`, `b = -objective` and each equality row is a column of `F`.
    pub fn from_relaxation(sdp: &SdpProblem) -> Self {
        let m = sdp.num_vars;
        let mut a = vec![Vec::new(); m];
        let mut c = vec![Vec::new(); sdp.psd.len()];
        for (bi, block) in sdp.psd.iter().enumerate() {
            for (r, col, form) in &block.entries {
                for &(j, coef) in &form.terms {
                    a[j].push(SymEntry {
                        block: bi,
                        row: *r,
                        col: *col,
                        value: -coef,
                    });
                }
                if form.constant != 0.0 {
                    c[bi].push((*r, *col, form.constant));
                }
            }
        }
        let mut b = vec![0.0; m];
        for &(j, coef) in &sdp.objective.terms {
            b[j] -= coef;
        }
        let free = sdp
            .rows
            .iter()
            .map(|row| FreeColumn {
                entries: row.form.terms.clone(),
                cost: row.rhs - row.form.constant,
            })
            .collect();
        Self {
            sides: sdp.psd.iter().map(|p| p.side).collect(),
            a,
            b,
            c,
            free,
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn total_psd_dim(&self) -> usize {
        self.sides.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    NearOptimal,
    /// The `(D)` side (the moment problem) is infeasible; `X`, `x_f` hold an
    /// improving ray of `(P)`.
    InfeasibleCertificate,
    /// The `(D)` side is unbounded; `y` holds an improving ray.
    UnboundedCertificate,
    Stalled,
}

impl SdpStatus {
    pub fn is_solved(self) -> bool {
        matches!(self, SdpStatus::Optimal | SdpStatus::NearOptimal)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterLog {
    pub iter: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub mu: f64,
    pub residuals: Residuals,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Vec<DMatrix<f64>>,
    pub x_free: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub residuals: Residuals,
    /// Free columns dropped as linearly dependent.
    pub dropped_free: usize,
    pub log: Vec<IterLog>,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Cap on the sum of PSD block sides.
    pub psd_cap: usize,
    /// Residual level accepted as near-optimal when the iteration stops short
    /// of `tol` (typical for relaxations whose moment side has no interior).
    pub near_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            psd_cap: 2000,
            near_tol: 1e-5,
        }
    }
}

/// Entries of one block with both triangles expanded: `(constraint, row, col, value)`.
type FullEntries = Vec<(usize, usize, usize, f64)>;

struct Prepared<'a> {
    sdp: &'a SdpStandard,
    full: Vec<FullEntries>,
    c_dense: Vec<DMatrix<f64>>,
}

fn dense_c(sdp: &SdpStandard) -> Vec<DMatrix<f64>> {
    sdp.c
        .iter()
        .zip(&sdp.sides)
        .map(|(entries, &s)| {
            let mut d = DMatrix::zeros(s, s);
            for &(r, c, v) in entries {
                d[(r, c)] = v;
                d[(c, r)] = v;
            }
            d
        })
        .collect()
}

fn prepare(sdp: &SdpStandard) -> Prepared<'_> {
    let mut full: Vec<FullEntries> = vec![Vec::new(); sdp.sides.len()];
    for (i, row) in sdp.a.iter().enumerate() {
        for e in row {
            full[e.block].push((i, e.row, e.col, e.value));
            if e.row != e.col {
                full[e.block].push((i, e.col, e.row, e.value));
            }
        }
    }
    for f in &mut full {
        f.sort_by_key(|&(i, r, c, _)| (i, r, c));
    }
    Prepared {
        sdp,
        full,
        c_dense: dense_c(sdp),
    }
}

impl Prepared<'_> {
    fn apply_a(&self, mats: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.sdp.num_constraints());
        for (b, entries) in self.full.iter().enumerate() {
            let t = &mats[b];
            for &(i, r, c, v) in entries {
                out[i] += v * t[(r, c)];
            }
        }
        out
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.sdp
            .sides
            .iter()
            .zip(&self.full)
            .map(|(&s, entries)| {
                let mut out = DMatrix::zeros(s, s);
                for &(i, r, c, v) in entries {
                    out[(r, c)] += v * y[i];
                }
                out
            })
            .collect()
    }

    /// HKM Schur complement `M_ij = Σ_b tr(A_i X A_j W)`.
    fn schur(&self, x: &[DMatrix<f64>], w: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.sdp.num_constraints();
        let mut mat = DMatrix::zeros(m, m);
        for (b, entries) in self.full.iter().enumerate() {
            let (xb, wb) = (&x[b], &w[b]);
            for (k1, &(i, p, q, a1)) in entries.iter().enumerate() {
                // entries are sorted by constraint index, so j >= i from k1 on
                for &(j, r, s, a2) in &entries[k1..] {
                    let _ = j;
                    mat[(i, j)] += a1 * a2 * xb[(q, r)] * wb[(s, p)];
                }
                // pairs with the same constraint before k1 were counted once;
                // the loop above covers (k1, k2 >= k1) only.
                for &(j, r, s, a2) in entries[..k1].iter().rev() {
                    if j != i {
                        break;
                    }
                    mat[(i, j)] += a1 * a2 * xb[(q, r)] * wb[(s, p)];
                }
            }
        }
        // Only the upper triangle (i <= j) was filled.
        for i in 0..m {
            for j in 0..i {
                mat[(i, j)] = mat[(j, i)];
            }
        }
        mat
    }
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn factor_spd(mut a: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut reg = 0.0;
    for _ in 0..8 {
        if let Some(c) = Cholesky::new(a.clone()) {
            return Some(c);
        }
        let bump = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
        for i in 0..a.nrows() {
            a[(i, i)] += bump - reg;
        }
        reg = bump;
    }
    None
}

enum SchurFactor {
    Chol(Cholesky<f64, Dyn>),
    /// Pivoted LU when `M` is numerically singular.
    Lu(nalgebra::LU<f64, Dyn, Dyn>),
}

/// Solver for the Schur system `M dy = r` with iterative refinement.
struct Schur {
    mat: DMatrix<f64>,
    factor: SchurFactor,
}

impl Schur {
    fn new(mat: DMatrix<f64>) -> Option<Self> {
        let factor = match factor_spd(mat.clone()) {
            Some(c) => SchurFactor::Chol(c),
            None => {
                let lu = mat.clone().lu();
                if !lu.is_invertible() {
                    return None;
                }
                SchurFactor::Lu(lu)
            }
        };
        Some(Self { mat, factor })
    }

    fn raw_solve(&self, r: &DVector<f64>) -> DVector<f64> {
        match &self.factor {
            SchurFactor::Chol(c) => c.solve(r),
            SchurFactor::Lu(lu) => lu.solve(r).unwrap_or_else(|| DVector::zeros(r.len())),
        }
    }

    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        let mut d = self.raw_solve(r);
        for _ in 0..2 {
            let e = r - &self.mat * &d;
            d += self.raw_solve(&e);
        }
        d
    }
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    z: Vec<DMatrix<f64>>,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    dz: Vec<DMatrix<f64>>,
}

/// Solves `sdp` with default options except `tol` and `max_iter`.
pub fn solve(sdp: &SdpStandard, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    solve_with(
        sdp,
        &SolveOptions {
            tol,
            max_iter,
            ..Default::default()
        },
    )
}

pub fn solve_with(sdp: &SdpStandard, opts: &SolveOptions) -> Result<SdpSolution> {
    let total = sdp.total_psd_dim();
    if total > opts.psd_cap {
        return Err(Error::CapExceeded {
            what: "total PSD dimension".into(),
            size: total,
            cap: opts.psd_cap,
        });
    }
    let (reduced, map) = match reduce::reduce(sdp) {
        reduce::Reduced::Ok(r, m) => (r, m),
        reduce::Reduced::Inconsistent { ray } => return Ok(row_ray(sdp, ray)),
    };
    let core = if reduced.num_constraints() == 0 {
        pinned(&reduced, opts)?
    } else {
        ipm(&reduced, opts)
    };

    let ray_y = core.status == SdpStatus::UnboundedCertificate;
    let ray_x = core.status == SdpStatus::InfeasibleCertificate;
    let y = map.lift(core.y.as_slice(), !ray_y);
    let prep = prepare(sdp);
    let ax = prep.apply_a(&core.x);
    let rhs = if ray_x {
        -ax
    } else {
        DVector::from_column_slice(&sdp.b) - ax
    };
    let x_free = reduce::free_multipliers(sdp, &map, &rhs);
    let primal_objective =
        inner(&prep.c_dense, &core.x) + sdp.free.iter().zip(&x_free).map(|(c, x)| c.cost * x).sum::<f64>();
    let dual_objective = sdp.b.iter().zip(&y).map(|(b, y)| b * y).sum();
    Ok(SdpSolution {
        x: core.x,
        x_free,
        y,
        z: core.z,
        primal_objective,
        dual_objective,
        status: core.status,
        iterations: core.iterations,
        residuals: core.residuals,
        dropped_free: map.dropped,
        log: core.log,
    })
}

/// The equality rows alone are contradictory: the moment side is infeasible
/// with `X = 0` and a row combination as the ray.
fn row_ray(sdp: &SdpStandard, ray: Vec<f64>) -> SdpSolution {
    let primal_objective = sdp.free.iter().zip(&ray).map(|(c, x)| c.cost * x).sum();
    SdpSolution {
        x: sdp.sides.iter().map(|&s| DMatrix::zeros(s, s)).collect(),
        x_free: ray,
        y: vec![0.0; sdp.num_constraints()],
        z: sdp.sides.iter().map(|&s| DMatrix::zeros(s, s)).collect(),
        primal_objective,
        dual_objective: f64::NEG_INFINITY,
        status: SdpStatus::InfeasibleCertificate,
        iterations: 0,
        residuals: Residuals::default(),
        dropped_free: 0,
        log: Vec::new(),
    }
}

struct Core {
    x: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    z: Vec<DMatrix<f64>>,
    status: SdpStatus,
    iterations: usize,
    residuals: Residuals,
    log: Vec<IterLog>,
}

/// The equality rows determine `y` completely: `Z = C` is either PSD
/// (optimal with `X = 0`) or has a negative eigenvector `v`, and `X = v vᵀ`
/// is an improving ray.
fn pinned(sdp: &SdpStandard, opts: &SolveOptions) -> Result<Core> {
    let c = dense_c(sdp);
    let mut worst: Option<(usize, f64, DVector<f64>)> = None;
    for (b, cb) in c.iter().enumerate() {
        if cb.nrows() == 0 {
            continue;
        }
        let (vals, vecs) = linalg::eig_sym(cb)?;
        let k = vals.len() - 1;
        if worst.as_ref().is_none_or(|w| vals[k] < w.1) {
            worst = Some((b, vals[k], vecs.column(k).into_owned()));
        }
    }
    let norm_c = frob(&c);
    let mut x: Vec<DMatrix<f64>> = sdp.sides.iter().map(|&s| DMatrix::zeros(s, s)).collect();
    let status = match worst {
        Some((b, lmin, v)) if lmin < -opts.tol * (1.0 + norm_c) => {
            x[b] = &v * v.transpose();
            SdpStatus::InfeasibleCertificate
        }
        _ => SdpStatus::Optimal,
    };
    Ok(Core {
        x,
        y: DVector::zeros(0),
        z: c,
        status,
        iterations: 0,
        residuals: Residuals::default(),
        log: Vec::new(),
    })
}

/// Interior-point iteration on a problem without free columns.
fn ipm(sdp: &SdpStandard, opts: &SolveOptions) -> Core {
    let prep = prepare(sdp);
    let m = sdp.num_constraints();
    let nb = sdp.sides.len();
    let big_n: f64 = sdp.sides.iter().sum::<usize>().max(1) as f64;

    let bvec = DVector::from_column_slice(&sdp.b);
    let norm_b = bvec.norm();
    let norm_c = frob(&prep.c_dense);
    let max_b = bvec.amax();
    let max_c = prep.c_dense.iter().map(|c| c.amax()).fold(0.0, f64::max);
    let scale = 1.0 + max_b.max(max_c);
    let start = scale.max((big_n).sqrt()).max(10.0);

    let mut it = Iterate {
        x: sdp.sides.iter().map(|&s| DMatrix::identity(s, s) * start).collect(),
        y: DVector::zeros(m),
        z: sdp.sides.iter().map(|&s| DMatrix::identity(s, s) * start).collect(),
    };

    let mut log = Vec::new();
    let mut best: Option<(f64, Iterate, Residuals, f64, f64)> = None;
    let mut status = SdpStatus::Stalled;
    let mut iterations = 0;
    let mut stall_count = 0;
    let mut last_res = Residuals::default();

    for iter in 0..=opts.max_iter {
        iterations = iter;
        // Residuals of the current iterate.
        let rp = &bvec - prep.apply_a(&it.x);
        let aty = prep.apply_at(&it.y);
        let rd: Vec<DMatrix<f64>> = (0..nb).map(|b| &prep.c_dense[b] - &it.z[b] - &aty[b]).collect();
        let pobj = inner(&prep.c_dense, &it.x);
        let dobj = bvec.dot(&it.y);
        let xz = inner(&it.x, &it.z);
        let mu = xz / big_n;

        let res = Residuals {
            primal: rp.norm() / (1.0 + norm_b),
            dual: frob(&rd) / (1.0 + norm_c),
            gap: (pobj - dobj).abs().max(xz.abs()) / (1.0 + pobj.abs() + dobj.abs()),
        };
        last_res = res;
        let merit = res.max();
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((
                merit,
                Iterate {
                    x: it.x.clone(),
                    y: it.y.clone(),
                    z: it.z.clone(),
                },
                res,
                pobj,
                dobj,
            ));
        }
        if !pobj.is_finite() || !dobj.is_finite() {
            break;
        }
        if res.primal <= opts.tol && res.dual <= opts.tol && res.gap <= opts.tol {
            status = SdpStatus::Optimal;
            break;
        }
        // Improving rays.
        if dobj > 0.0 {
            let ray = frob(&rd.iter().zip(&prep.c_dense).map(|(r, c)| c - r).collect::<Vec<_>>()) / dobj;
            if ray < opts.tol && dobj > 1e6 * scale {
                status = SdpStatus::UnboundedCertificate;
                break;
            }
        }
        if pobj < 0.0 {
            let ray = (&bvec - &rp).norm() / (-pobj);
            if ray < opts.tol && -pobj > 1e6 * scale {
                status = SdpStatus::InfeasibleCertificate;
                break;
            }
        }
        if iter == opts.max_iter {
            break;
        }

        // Factorizations.
        let mut x_chol = Vec::with_capacity(nb);
        let mut w = Vec::with_capacity(nb);
        let mut z_chol = Vec::with_capacity(nb);
        let mut ok = true;
        for b in 0..nb {
            match (chol(&it.x[b]), chol(&it.z[b])) {
                (Ok(cx), Ok(cz)) => {
                    w.push(sym(&cz.inverse()));
                    x_chol.push(cx);
                    z_chol.push(cz);
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let Some(schur) = Schur::new(prep.schur(&it.x, &w)) else {
            break;
        };

        let direction = |sigma_mu: f64, corr: Option<&Direction>| -> Direction {
            let t: Vec<DMatrix<f64>> = (0..nb)
                .map(|b| {
                    let mut t = &w[b] * sigma_mu - &it.x[b] - &it.x[b] * &rd[b] * &w[b];
                    if let Some(c) = corr {
                        t -= &c.dx[b] * &c.dz[b] * &w[b];
                    }
                    sym(&t)
                })
                .collect();
            let r1 = &rp - prep.apply_a(&t);
            let dy = schur.solve(&r1);
            let atdy = prep.apply_at(&dy);
            let dz: Vec<DMatrix<f64>> = (0..nb).map(|b| &rd[b] - &atdy[b]).collect();
            let dx: Vec<DMatrix<f64>> = (0..nb).map(|b| &t[b] + sym(&(&it.x[b] * &atdy[b] * &w[b]))).collect();
            Direction { dx, dy, dz }
        };
        let step_lengths = |d: &Direction| -> (f64, f64) {
            let ap = (0..nb)
                .map(|b| max_step(&x_chol[b], &d.dx[b]))
                .fold(f64::INFINITY, f64::min);
            let ad = (0..nb)
                .map(|b| max_step(&z_chol[b], &d.dz[b]))
                .fold(f64::INFINITY, f64::min);
            (ap, ad)
        };

        // Predictor.
        let pred = direction(0.0, None);
        let (ap, ad) = step_lengths(&pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = (0..nb)
            .map(|b| (&it.x[b] + &pred.dx[b] * ap).dot(&(&it.z[b] + &pred.dz[b] * ad)))
            .sum::<f64>()
            / big_n;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // Corrector.
        let dir = direction(sigma * mu, Some(&pred));
        let (ap, ad) = step_lengths(&dir);
        let tau = 0.9 + 0.09 * ap.min(ad).min(1.0);
        let ap = (tau * ap).min(1.0);
        let ad = (tau * ad).min(1.0);

        for b in 0..nb {
            it.x[b] = sym(&(&it.x[b] + &dir.dx[b] * ap));
            it.z[b] = sym(&(&it.z[b] + &dir.dz[b] * ad));
        }
        it.y += &dir.dy * ad;

        log.push(IterLog {
            iter,
            primal_objective: pobj,
            dual_objective: dobj,
            mu,
            residuals: res,
            step_primal: ap,
            step_dual: ad,
        });
        log::trace!(
            "iter {iter:3} pobj {pobj:+.9e} dobj {dobj:+.9e} mu {mu:.2e} rp {:.1e} rd {:.1e} gap {:.1e} ap {ap:.3} ad {ad:.3}",
            res.primal,
            res.dual,
            res.gap
        );

        if ap.max(ad) < 1e-8 {
            stall_count += 1;
            if stall_count >= 3 {
                break;
            }
        } else {
            stall_count = 0;
        }
    }

    let (fin, residuals) = match status {
        SdpStatus::Optimal | SdpStatus::InfeasibleCertificate | SdpStatus::UnboundedCertificate => (it, last_res),
        _ => {
            let (_, b, r, _, _) = best.expect("at least one iterate evaluated");
            if r.max() <= opts.near_tol {
                status = SdpStatus::NearOptimal;
            }
            (b, r)
        }
    };
    Core {
        x: fin.x,
        y: fin.y,
        z: fin.z,
        status,
        iterations,
        residuals,
        log,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// min x s.t. x = 2, x >= 0, written as (D): max -y s.t. Z = y >= 0, y = 2.
    #[test]
    fn scalar_problem() {
        let sdp = SdpStandard {
            sides: vec![1],
            a: vec![vec![SymEntry {
                block: 0,
                row: 0,
                col: 0,
                value: -1.0,
            }]],
            b: vec![-1.0],
            c: vec![vec![]],
            free: vec![FreeColumn {
                entries: vec![(0, 1.0)],
                cost: 2.0,
            }],
        };
        let sol = solve(&sdp, 1e-9, 100).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((-sol.dual_objective - 2.0).abs() < 1e-7);
        assert!((sol.y[0] - 2.0).abs() < 1e-7);
    }

    /// max -y1 - y2 s.t. [[y1, 1], [1, y2]] ⪰ 0: optimum -2 at y = (1, 1).
    #[test]
    fn two_by_two_lmi() {
        let sdp = SdpStandard {
            sides: vec![2],
            a: vec![
                vec![SymEntry {
                    block: 0,
                    row: 0,
                    col: 0,
                    value: -1.0,
                }],
                vec![SymEntry {
                    block: 0,
                    row: 1,
                    col: 1,
                    value: -1.0,
                }],
            ],
            b: vec![-1.0, -1.0],
            c: vec![vec![(0, 1, 1.0)]],
            free: vec![],
        };
        let sol = solve(&sdp, 1e-9, 100).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.dual_objective + 2.0).abs() < 1e-7, "{}", sol.dual_objective);
        assert!((sol.primal_objective - sol.dual_objective).abs() < 1e-7);
    }

    #[test]
    fn cap_is_enforced() {
        let sdp = SdpStandard {
            sides: vec![3],
            a: vec![],
            b: vec![],
            c: vec![vec![]],
            free: vec![],
        };
        let opts = SolveOptions {
            psd_cap: 2,
            ..Default::default()
        };
        assert!(matches!(solve_with(&sdp, &opts), Err(Error::CapExceeded { .. })));
    }
}
