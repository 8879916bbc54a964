//! Assemble, solve, extract, stitch and certify, collected in one report.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::generate::Generator;
use crate::certify::{
    epsilon_certificate, sparse_infeasibility, split_representation, verify_certificate, verify_infeasibility,
    InfeasibilityCertificate, InfeasibilityOutcome, TightnessCertificate, VerifyReport,
};
use crate::error::{Error, Result};
use crate::extract::{
    certify_by_value, extract_atoms, flat_truncation, join_candidates, lower_order_accepted, stitch, AtomicMeasure,
    BlockMoments, FlatReport, StitchOutcome, StitchStatus, Verdict,
};
use crate::relax::{assemble_with, dense_moment_count, min_order, AssembleOptions, Model, SdpProblem};
use crate::sdp::{solve_with, Residuals, SdpStandard, SdpStatus, SolveOptions};
use crate::sparsity::{check_rip, RipReport};
use crate::SparsePop;

/// Default cap on the number of moments `|U_k|` of a dense relaxation.
pub const DEFAULT_PSD_CAP: usize = 2000;
pub const PSD_CAP_ENV: &str = "SPOP_PSD_CAP";

/// The dense cap, overridden by `SPOP_PSD_CAP` when set to an integer.
pub fn psd_cap_from_env() -> usize {
    std::env::var(PSD_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_PSD_CAP)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub model: Model,
    pub order: u32,
    /// Interior-point stopping tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub extract: bool,
    pub certify: bool,
    pub epsilon: Option<f64>,
    /// Allow orders below the minimal one by dropping constraints of degree above `2k`.
    pub force: bool,
    /// Cap on `|U_k|` for dense models.
    pub dense_cap: usize,
    /// Relative singular value threshold for numerical rank.
    pub rank_tol: f64,
    /// Coordinate tolerance when matching atoms across overlaps.
    pub match_tol: f64,
    /// Feasibility and value tolerance for candidate minimizers.
    pub value_tol: f64,
    /// Residual tolerance for certificates.
    pub cert_tol: f64,
    pub join_limit: usize,
}

impl SolveConfig {
    pub fn new(model: Model, order: u32) -> Self {
        Self {
            model,
            order,
            tol: 1e-8,
            max_iter: 200,
            extract: true,
            certify: true,
            epsilon: None,
            force: false,
            dense_cap: DEFAULT_PSD_CAP,
            rank_tol: crate::extract::DEFAULT_RANK_TOL,
            match_tol: crate::extract::DEFAULT_MATCH_TOL,
            value_tol: 1e-6,
            cert_tol: crate::certify::DEFAULT_CERT_TOL,
            join_limit: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SdpSize {
    pub variables: usize,
    pub psd_blocks: usize,
    pub max_side: usize,
    pub total_psd: usize,
    pub equality_rows: usize,
}

impl SdpSize {
    fn of(sdp: &SdpProblem) -> Self {
        Self {
            variables: sdp.num_vars,
            psd_blocks: sdp.psd.len(),
            max_side: sdp.max_block_side(),
            total_psd: sdp.psd.iter().map(|b| b.side).sum(),
            equality_rows: sdp.rows.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Induction along the running intersection ordering.
    Strict,
    /// Enumeration of globally consistent atom combinations.
    Join,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub route: Route,
    pub point: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerOrder {
    pub t: u32,
    pub bound_t: Option<f64>,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub gamma: f64,
    pub epsilon: Option<f64>,
    pub identity_residual: f64,
    pub membership_residuals: Vec<f64>,
    pub common_zero: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub problems: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Certificate verified and a stitched minimizer attains the bound.
    TightCertified,
    BoundOnly,
    InfeasibilityCertified,
}

impl Outcome {
    /// Process exit code; errors exit with 3.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::TightCertified => 0,
            Outcome::BoundOnly => 1,
            Outcome::InfeasibilityCertified => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub assemble: f64,
    pub solve: f64,
    pub extract: f64,
    pub certify: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: SolveConfig,
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
    pub generator: Option<Generator>,
    pub min_order: u32,
    pub warnings: Vec<String>,
    pub size: SdpSize,
    /// Lower bound on the minimum; absent when the relaxation is infeasible.
    pub bound: Option<f64>,
    pub status: SdpStatus,
    pub iterations: usize,
    pub residuals: Residuals,
    pub rip: RipReport,
    pub flat: Option<FlatReport>,
    pub atoms: Vec<AtomicMeasure>,
    pub stitch: Option<StitchOutcome>,
    pub candidates: Vec<Candidate>,
    pub lower_order: Option<LowerOrder>,
    pub certificate: Option<CertificateSummary>,
    pub infeasibility: Option<InfeasibilityOutcome>,
    pub outcome: Outcome,
    pub timings: Timings,
    /// Full certificate, written separately by the command-line tool.
    #[serde(skip)]
    pub certificate_data: Option<TightnessCertificate>,
}

impl Report {
    pub fn minimizers(&self) -> Vec<&[f64]> {
        self.candidates
            .iter()
            .filter(|c| c.verdict.is_tight())
            .map(|c| c.point.as_slice())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Drops constraints whose degree exceeds `2k`; the result is a relaxation
/// of the original problem, so its bound stays valid.
fn truncate_constraints(pop: &SparsePop, k: u32, warnings: &mut Vec<String>) -> Result<SparsePop> {
    let keep = |list: &[Vec<crate::Polynomial>], what: &str, warnings: &mut Vec<String>| {
        list.iter()
            .enumerate()
            .map(|(i, ps)| {
                ps.iter()
                    .enumerate()
                    .filter(|(j, p)| {
                        let ok = p.degree() <= 2 * k;
                        if !ok {
                            warnings.push(format!(
                                "dropped {what} {} of block {} (degree {})",
                                j + 1,
                                i + 1,
                                p.degree()
                            ));
                        }
                        ok
                    })
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect::<Vec<Vec<_>>>()
    };
    let eq = keep(pop.eq(), "equality", warnings);
    let ineq = keep(pop.ineq(), "inequality", warnings);
    SparsePop::new(pop.pattern().clone(), pop.f_parts().to_vec(), eq, ineq)
}

fn assemble_checked(pop: &SparsePop, k: u32, cfg: &SolveConfig) -> Result<SdpProblem> {
    let opts = AssembleOptions {
        dense_cap: Some(cfg.dense_cap),
        ..AssembleOptions::default()
    };
    assemble_with(pop, k, cfg.model, &opts)
}

fn solve_opts(cfg: &SolveConfig) -> SolveOptions {
    SolveOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        ..SolveOptions::default()
    }
}

/// Runs the full pipeline on `pop` with the given configuration.
pub fn run_solve(pop: &SparsePop, cfg: &SolveConfig, generator: Option<Generator>) -> Result<Report> {
    let start = Instant::now();
    let mut timings = Timings::default();
    let mut warnings = Vec::new();
    let k0 = min_order(pop).k0;
    let k = cfg.order;
    let work = if k < k0 {
        if !cfg.force {
            return Err(Error::Degree(format!(
                "order {k} is below the minimal order {k0} (use --force to drop high-degree constraints)"
            )));
        }
        truncate_constraints(pop, k, &mut warnings)?
    } else {
        pop.clone()
    };
    let rip = check_rip(pop.pattern());

    let t = Instant::now();
    let sdp = assemble_checked(&work, k, cfg)?;
    timings.assemble = t.elapsed().as_secs_f64();
    let target = &sdp.pop;

    let t = Instant::now();
    let sol = solve_with(&SdpStandard::from_relaxation(&sdp), &solve_opts(cfg))?;
    timings.solve = t.elapsed().as_secs_f64();

    let mut report = Report {
        config: cfg.clone(),
        n: pop.n(),
        blocks: pop.pattern().blocks().to_vec(),
        generator,
        min_order: k0,
        warnings,
        size: SdpSize::of(&sdp),
        bound: None,
        status: sol.status,
        iterations: sol.iterations,
        residuals: sol.residuals,
        rip,
        flat: None,
        atoms: Vec::new(),
        stitch: None,
        candidates: Vec::new(),
        lower_order: None,
        certificate: None,
        infeasibility: None,
        outcome: Outcome::BoundOnly,
        timings,
        certificate_data: None,
    };

    match sol.status {
        SdpStatus::InfeasibleCertificate => {
            if cfg.certify {
                let t = Instant::now();
                let inf = sparse_infeasibility(target, k)?;
                if matches!(inf, InfeasibilityOutcome::Found { .. }) {
                    report.outcome = Outcome::InfeasibilityCertified;
                }
                report.infeasibility = Some(inf);
                report.timings.certify = t.elapsed().as_secs_f64();
            }
            report.timings.total = start.elapsed().as_secs_f64();
            return Ok(report);
        }
        SdpStatus::UnboundedCertificate => {
            report.warnings.push("the moment relaxation is unbounded".into());
            report.timings.total = start.elapsed().as_secs_f64();
            return Ok(report);
        }
        SdpStatus::Stalled => {
            report
                .warnings
                .push("the solver stalled; the bound is the best iterate's value".into());
        }
        _ => {}
    }
    let bound = -sol.dual_objective;
    report.bound = Some(bound);

    if cfg.extract && sol.status.is_solved() {
        let t = Instant::now();
        extract_stage(&mut report, target, &sdp, &sol.y, bound, cfg)?;
        report.timings.extract = t.elapsed().as_secs_f64();
    }

    if cfg.certify && sol.status.is_solved() {
        let t = Instant::now();
        match split_representation(&sdp, &sol, bound) {
            Ok(mut cert) => {
                if let Some(eps) = cfg.epsilon {
                    // certify against the best feasible value found, if any
                    let target_value = report
                        .candidates
                        .iter()
                        .filter_map(|c| match c.verdict {
                            Verdict::TightMinimizer { value } | Verdict::NotTight { value, .. } => Some(value),
                            Verdict::InfeasiblePoint { .. } => None,
                        })
                        .fold(bound, f64::max);
                    cert = epsilon_certificate(&cert, target, target_value, eps)?;
                }
                let mins: Vec<Vec<f64>> = report.minimizers().iter().map(|p| p.to_vec()).collect();
                let rep = verify_certificate(&cert, target, &mins, cfg.cert_tol);
                report.certificate = Some(CertificateSummary {
                    gamma: cert.gamma,
                    epsilon: cert.epsilon,
                    identity_residual: rep.identity_residual,
                    membership_residuals: rep.membership_residuals.clone(),
                    common_zero: rep.common_zero.clone(),
                    tolerance: cfg.cert_tol,
                    passed: rep.passed,
                    problems: rep.problems.clone(),
                });
                report.certificate_data = Some(cert);
            }
            Err(e) => report.warnings.push(format!("no certificate: {e}")),
        }
        report.timings.certify = t.elapsed().as_secs_f64();
    }

    let certified = report
        .certificate
        .as_ref()
        .is_some_and(|c| c.passed && c.epsilon.is_none());
    if certified && !report.minimizers().is_empty() {
        report.outcome = Outcome::TightCertified;
    }
    report.timings.total = start.elapsed().as_secs_f64();
    Ok(report)
}

fn extract_stage(
    report: &mut Report,
    pop: &SparsePop,
    sdp: &SdpProblem,
    y: &[f64],
    bound: f64,
    cfg: &SolveConfig,
) -> Result<()> {
    let k = cfg.order;
    let flat = flat_truncation(y, &sdp.index, pop, k, cfg.rank_tol)?;
    report.warnings.extend(flat.warnings.iter().cloned());
    let all_flat = flat.all_flat();
    let common_t = flat.common_t();
    report.flat = Some(flat.clone());
    if !all_flat {
        return Ok(());
    }
    for b in &flat.blocks {
        let (Some(t), Some(r)) = (b.flat_at, b.rank) else {
            continue;
        };
        let vars = pop.pattern().block(b.block);
        let mom = BlockMoments::from_union(&sdp.index, y, vars, 2 * t)?;
        match extract_atoms(&mom, t, r) {
            Ok(mut m) => {
                m.block = Some(b.block);
                report.atoms.push(m);
            }
            Err(e) => {
                report.warnings.push(format!("block {}: {e}", b.block + 1));
                return Ok(());
            }
        }
    }

    // Flatness below k certifies only when the order-t bound matches.
    if let Some(t) = common_t.filter(|&t| t < k && t >= min_order(pop).k0) {
        let lower = assemble_checked(pop, t, cfg)
            .and_then(|s| solve_with(&SdpStandard::from_relaxation(&s), &solve_opts(cfg)))
            .ok()
            .filter(|s| s.status.is_solved())
            .map(|s| -s.dual_objective);
        report.lower_order = Some(LowerOrder {
            t,
            bound_t: lower,
            accepted: lower.is_some_and(|ft| lower_order_accepted(ft, bound, cfg.value_tol)),
        });
    }

    let n = pop.n();
    let outcome = stitch(&report.atoms, n, &report.rip, cfg.match_tol);
    let mut points: Vec<(Route, Vec<f64>)> = outcome.points.iter().map(|p| (Route::Strict, p.clone())).collect();
    if outcome.status != StitchStatus::Stitched {
        points.extend(
            join_candidates(&report.atoms, n, cfg.match_tol, cfg.join_limit)
                .into_iter()
                .map(|p| (Route::Join, p)),
        );
    }
    report.stitch = Some(outcome);
    for (route, point) in points {
        let verdict = certify_by_value(&point, pop, bound, cfg.value_tol)?;
        report.candidates.push(Candidate { route, point, verdict });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRun {
    pub bound: Option<f64>,
    pub status: SdpStatus,
    pub size: SdpSize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DenseRun {
    Solved(ModelRun),
    /// Refused by the dimension cap, the analog of running out of memory.
    OomAnalog {
        moments: usize,
        cap: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub generator: Option<Generator>,
    pub order: u32,
    pub sparse: ModelRun,
    pub dense: Option<DenseRun>,
    /// Whether both bounds agree within `1e-5` relative, when both solved.
    pub agree: Option<bool>,
    pub flag: Option<String>,
}

fn run_model(pop: &SparsePop, k: u32, model: Model, cap: usize) -> Result<ModelRun> {
    let mut cfg = SolveConfig::new(model, k);
    cfg.dense_cap = cap;
    let t = Instant::now();
    let sdp = assemble_checked(pop, k, &cfg)?;
    let sol = solve_with(&SdpStandard::from_relaxation(&sdp), &solve_opts(&cfg))?;
    Ok(ModelRun {
        bound: sol.status.is_solved().then(|| -sol.dual_objective),
        status: sol.status,
        size: SdpSize::of(&sdp),
        seconds: t.elapsed().as_secs_f64(),
    })
}

/// Sparse against dense at order `k`. `expect_equal` states that theory
/// predicts equal bounds (as for the convex generators); a disagreement is
/// then flagged.
pub fn run_compare(
    pop: &SparsePop,
    k: u32,
    cap: usize,
    with_dense: bool,
    expect_equal: bool,
    generator: Option<Generator>,
) -> Result<CompareRow> {
    let sparse = run_model(pop, k, Model::SparsePutinar, cap)?;
    let dense = if with_dense {
        match run_model(pop, k, Model::DensePutinar, cap) {
            Ok(r) => Some(DenseRun::Solved(r)),
            Err(Error::CapExceeded { .. }) => Some(DenseRun::OomAnalog {
                moments: dense_moment_count(pop.n(), k),
                cap,
            }),
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let mut flag = None;
    let agree = match (&dense, sparse.bound) {
        (Some(DenseRun::Solved(d)), Some(s))
            if d.status == SdpStatus::Optimal && sparse.status == SdpStatus::Optimal =>
        {
            let b = d.bound.expect("solved");
            let ok = (s - b).abs() <= 1e-5 * (1.0 + b.abs());
            if expect_equal && !ok {
                flag = Some(format!("bounds differ: sparse {s:.8}, dense {b:.8}"));
            }
            Some(ok)
        }
        (Some(DenseRun::OomAnalog { .. }), _) => {
            flag = Some("oom-analog".into());
            None
        }
        _ => None,
    };
    Ok(CompareRow {
        generator,
        order: k,
        sparse,
        dense,
        agree,
        flag,
    })
}

/// On-disk certificate, tagged by kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertificateFile {
    Tightness(TightnessCertificate),
    Infeasibility(InfeasibilityCertificate),
}

impl CertificateFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("certificate: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    /// Re-verifies against `pop` by independent expansion.
    pub fn verify(&self, pop: &SparsePop, tol: f64) -> VerifyReport {
        match self {
            CertificateFile::Tightness(c) => verify_certificate(c, pop, &[], tol),
            CertificateFile::Infeasibility(c) => verify_infeasibility(c, pop, tol),
        }
    }
}

impl Report {
    /// The certificate worth writing out, if any.
    pub fn certificate_file(&self) -> Option<CertificateFile> {
        if let Some(InfeasibilityOutcome::Found { certificate }) = &self.infeasibility {
            return Some(CertificateFile::Infeasibility(certificate.clone()));
        }
        self.certificate_data.clone().map(CertificateFile::Tightness)
    }
}
