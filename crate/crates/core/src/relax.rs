//! Moment relaxations of sparse polynomial optimization problems.
//!
//! A relaxation of order `k` works on one moment vector `y` indexed by the
//! union of the block monomial sets of degree `2k`. Moments of monomials
//! shared by several blocks occupy a single position, so overlap consistency
//! holds by construction. Every moment and localizing matrix is kept
//! symbolically: each entry is an affine form in `y`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{binomial, Exponent, MonomialBasis, Polynomial};
use crate::sparsity::SparsityPattern;

/// Largest constraint count per block for which all products are generated.
pub const DEFAULT_SCHMUDGEN_CAP: usize = 12;

/// A sparse polynomial optimization problem: minimize `Σ f_i` subject to
/// `h_i = 0`, `g_i >= 0`, where `f_i`, `h_i`, `g_i` only involve the
/// variables of block `i`.
#[derive(Clone, Debug)]
pub struct SparsePop {
    pattern: SparsityPattern,
    f_parts: Vec<Polynomial>,
    eq: Vec<Vec<Polynomial>>,
    ineq: Vec<Vec<Polynomial>>,
    products: OnceLock<Vec<Vec<(Vec<usize>, Polynomial)>>>,
}

impl SparsePop {
    pub fn new(
        pattern: SparsityPattern,
        f_parts: Vec<Polynomial>,
        eq: Vec<Vec<Polynomial>>,
        ineq: Vec<Vec<Polynomial>>,
    ) -> Result<Self> {
        let m = pattern.num_blocks();
        for (what, len) in [("objective", f_parts.len()), ("eq", eq.len()), ("ineq", ineq.len())] {
            if len != m {
                return Err(Error::Format(format!(
                    "{what} has {len} block entries but the pattern has {m} blocks"
                )));
            }
        }
        for i in 0..m {
            let block = pattern.block(i);
            if !f_parts[i].support_check(block) {
                return Err(Error::Support {
                    what: format!("objective part f_{}", i + 1),
                    block: i + 1,
                });
            }
            for (j, h) in eq[i].iter().enumerate() {
                if h.is_zero() {
                    return Err(Error::Format(format!(
                        "equality h_{},{} is the zero polynomial",
                        i + 1,
                        j + 1
                    )));
                }
                if !h.support_check(block) {
                    return Err(Error::Support {
                        what: format!("equality h_{},{}", i + 1, j + 1),
                        block: i + 1,
                    });
                }
            }
            for (j, g) in ineq[i].iter().enumerate() {
                if !g.support_check(block) {
                    return Err(Error::Support {
                        what: format!("inequality g_{},{}", i + 1, j + 1),
                        block: i + 1,
                    });
                }
            }
        }
        Ok(Self {
            pattern,
            f_parts,
            eq,
            ineq,
            products: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    pub fn num_blocks(&self) -> usize {
        self.pattern.num_blocks()
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn f_parts(&self) -> &[Polynomial] {
        &self.f_parts
    }

    pub fn eq(&self) -> &[Vec<Polynomial>] {
        &self.eq
    }

    pub fn ineq(&self) -> &[Vec<Polynomial>] {
        &self.ineq
    }

    /// The full objective `f = Σ f_i`.
    pub fn objective(&self) -> Polynomial {
        self.f_parts
            .iter()
            .fold(Polynomial::zero(self.n()), |acc, f| acc.add(f))
    }

    pub fn eval_objective(&self, x: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for f in &self.f_parts {
            total += f.eval(x)?;
        }
        Ok(total)
    }

    /// Largest violation of any constraint at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.num_blocks() {
            for h in &self.eq[i] {
                worst = worst.max(h.eval(x)?.abs());
            }
            for g in &self.ineq[i] {
                worst = worst.max(-g.eval(x)?);
            }
        }
        Ok(worst)
    }

    /// The dense reformulation: one block `[n]` carrying the whole
    /// objective and every constraint.
    pub fn densify(&self) -> SparsePop {
        let n = self.n();
        SparsePop::new(
            SparsityPattern::dense(n),
            vec![self.objective()],
            vec![self.eq.iter().flatten().cloned().collect()],
            vec![self.ineq.iter().flatten().cloned().collect()],
        )
        .expect("dense block contains every support")
    }

    /// Products `g_{i,J}` over nonempty `J ⊆ [s_i]`, per block, computed once.
    pub fn schmudgen_products(&self, cap: usize) -> Result<&[Vec<(Vec<usize>, Polynomial)>]> {
        if let Some(s) = self.ineq.iter().map(Vec::len).max() {
            if s > cap {
                return Err(Error::CapExceeded {
                    what: "constraints per block for product generation".into(),
                    size: s,
                    cap,
                });
            }
        }
        Ok(self.products.get_or_init(|| {
            self.ineq
                .iter()
                .map(|g| {
                    let s = g.len();
                    (1u32..(1u32 << s))
                        .map(|mask| {
                            let subset: Vec<usize> = (0..s).filter(|j| mask & (1 << j) != 0).collect();
                            let prod = Polynomial::product(self.n(), subset.iter().map(|&j| &g[j]));
                            (subset, prod)
                        })
                        .collect()
                })
                .collect()
        }))
    }
}

fn half_ceil(d: u32) -> u32 {
    d.div_ceil(2)
}

/// Minimal relaxation order and the per-block constraint degrees `d_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderInfo {
    pub k0: u32,
    pub d: Vec<u32>,
}

pub fn min_order(pop: &SparsePop) -> OrderInfo {
    let fdeg = pop.f_parts.iter().map(Polynomial::degree).max().unwrap_or(0);
    let mut k0 = half_ceil(fdeg);
    let mut d = Vec::with_capacity(pop.num_blocks());
    for i in 0..pop.num_blocks() {
        let hdeg = pop.eq[i].iter().map(Polynomial::degree).max().unwrap_or(0);
        let gdeg = pop.ineq[i].iter().map(Polynomial::degree).max().unwrap_or(0);
        k0 = k0.max(half_ceil(hdeg)).max(half_ceil(gdeg));
        d.push(half_ceil(hdeg).max(half_ceil(gdeg)));
    }
    OrderInfo { k0: k0.max(1), d }
}

/// Positions of the monomial union `U_k = ∪_i N^{Δ_i}_{2k}`.
#[derive(Clone, Debug)]
pub struct UnionIndex {
    k: u32,
    exponents: Vec<Exponent>,
    positions: BTreeMap<Exponent, usize>,
    block_bases: Vec<MonomialBasis>,
    block_positions: Vec<Vec<usize>>,
}

impl UnionIndex {
    pub fn new(pattern: &SparsityPattern, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Degree("relaxation order must be at least 1".into()));
        }
        let block_bases = pattern
            .blocks()
            .iter()
            .map(|b| MonomialBasis::new(b, 2 * k))
            .collect::<Result<Vec<_>>>()?;
        let mut positions: BTreeMap<Exponent, usize> = BTreeMap::new();
        for basis in &block_bases {
            for e in basis.exponents() {
                positions.entry(e.clone()).or_insert(0);
            }
        }
        let exponents: Vec<Exponent> = positions.keys().cloned().collect();
        for (i, v) in positions.values_mut().enumerate() {
            *v = i;
        }
        let block_positions = block_bases
            .iter()
            .map(|b| b.exponents().iter().map(|e| positions[e]).collect())
            .collect();
        Ok(Self {
            k,
            exponents,
            positions,
            block_bases,
            block_positions,
        })
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.exponents
    }

    pub fn position(&self, e: &Exponent) -> Option<usize> {
        self.positions.get(e).copied()
    }

    /// Degree-`2k` monomial basis of block `i`.
    pub fn block_basis(&self, i: usize) -> &MonomialBasis {
        &self.block_bases[i]
    }

    /// Union positions of block `i`'s monomials, in block-basis order.
    pub fn block_positions(&self, i: usize) -> &[usize] {
        &self.block_positions[i]
    }

    /// `[u]_{spa,2k}`: the moment vector of the Dirac measure at `u`.
    pub fn point_moments(&self, u: &[f64]) -> Vec<f64> {
        self.exponents.iter().map(|e| e.eval(u)).collect()
    }

    /// `<p, y>`: the Riesz functional. Fails if `p` has a monomial outside `U_k`.
    pub fn riesz(&self, p: &Polynomial, y: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (e, c) in p.terms() {
            let pos = self
                .position(e)
                .ok_or_else(|| Error::Degree(format!("monomial {e} is outside the moment index")))?;
            acc += c * y[pos];
        }
        Ok(acc)
    }
}

/// A linear form `Σ c_j y_j + constant`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AffineForm {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineForm {
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, &(j, c)| acc + c * y[j])
    }

    fn push(&mut self, j: usize, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.iter_mut().find(|(p, _)| *p == j) {
            Some(t) => t.1 += c,
            None => self.terms.push((j, c)),
        }
    }

    fn normalize(&mut self) {
        self.terms.retain(|&(_, c)| c != 0.0);
        self.terms.sort_by_key(|&(j, _)| j);
    }
}

/// What a PSD block of the relaxation encodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockRole {
    /// Moment matrix `M^{(k)}` of block `block`.
    Moment { block: usize },
    /// Localizing matrix of the product of `constraints` (indices into `g_block`).
    Localizer { block: usize, constraints: Vec<usize> },
    /// Extra scalar block used by feasibility reformulations.
    Auxiliary,
}

impl BlockRole {
    pub fn block(&self) -> Option<usize> {
        match self {
            BlockRole::Moment { block } | BlockRole::Localizer { block, .. } => Some(*block),
            BlockRole::Auxiliary => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PsdBlock {
    pub side: usize,
    /// Upper-triangle entries `(r, c, form)` with `r <= c`; missing entries are zero.
    pub entries: Vec<(usize, usize, AffineForm)>,
    pub role: BlockRole,
    /// Row/column monomials of the block.
    pub basis: Vec<Exponent>,
    /// The polynomial the block localizes (1 for moment matrices).
    pub multiplier: Polynomial,
}

impl PsdBlock {
    pub fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.side, self.side);
        for (r, c, f) in &self.entries {
            let v = f.eval(y);
            m[(*r, *c)] = v;
            m[(*c, *r)] = v;
        }
        m
    }

    pub fn form(&self, r: usize, c: usize) -> Option<&AffineForm> {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        self.entries
            .iter()
            .find(|(a, b, _)| *a == r && *b == c)
            .map(|(_, _, f)| f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowRole {
    /// `y_0 = 1`.
    Normalization,
    /// Entry `shift` of the localizing vector of `h_{block, constraint}`.
    Ideal {
        block: usize,
        constraint: usize,
        shift: Exponent,
    },
    Auxiliary,
}

#[derive(Clone, Debug)]
pub struct EqualityRow {
    pub form: AffineForm,
    pub rhs: f64,
    pub role: RowRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    SparsePutinar,
    SparseSchmudgen,
    DensePutinar,
    DenseSchmudgen,
}

impl Model {
    pub fn is_dense(self) -> bool {
        matches!(self, Model::DensePutinar | Model::DenseSchmudgen)
    }

    pub fn is_schmudgen(self) -> bool {
        matches!(self, Model::SparseSchmudgen | Model::DenseSchmudgen)
    }

    pub const ALL: [Model; 4] = [
        Model::SparsePutinar,
        Model::SparseSchmudgen,
        Model::DensePutinar,
        Model::DenseSchmudgen,
    ];
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::SparsePutinar => "sparse-putinar",
            Model::SparseSchmudgen => "sparse-schmudgen",
            Model::DensePutinar => "dense-putinar",
            Model::DenseSchmudgen => "dense-schmudgen",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Format(format!("unknown model {s:?}")))
    }
}

/// A moment relaxation as a block-diagonal SDP in the moment vector `y`:
/// minimize `<objective, y>` subject to every PSD block being PSD and every
/// equality row holding.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub model: Model,
    pub order: u32,
    /// Moment positions `0..index.len()`, followed by any auxiliary variables.
    pub num_vars: usize,
    pub objective: AffineForm,
    pub psd: Vec<PsdBlock>,
    pub rows: Vec<EqualityRow>,
    pub index: UnionIndex,
    /// The problem the relaxation was built from (dense models hold the
    /// densified problem).
    pub pop: SparsePop,
}

impl SdpProblem {
    pub fn max_block_side(&self) -> usize {
        self.psd.iter().map(|b| b.side).max().unwrap_or(0)
    }

    /// Largest violation of the relaxation's constraints at `y`: equality
    /// residuals and negative eigenvalues of the PSD blocks.
    pub fn violation(&self, y: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            worst = worst.max((row.form.eval(y) - row.rhs).abs());
        }
        for b in &self.psd {
            let m = b.eval(y);
            let min = m.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &v| a.min(v));
            worst = worst.max(-min);
        }
        worst
    }
}

/// Symbolic moment matrix `M^{(t)}` of block `i`: entry `(α, β)` is `y_{α+β}`.
pub fn moment_matrix_template(pattern: &SparsityPattern, i: usize, t: u32, index: &UnionIndex) -> Result<PsdBlock> {
    let n = pattern.n();
    localizing_matrix_template(&Polynomial::constant(n, 1.0), pattern, i, t, index).map(|mut b| {
        b.role = BlockRole::Moment { block: i };
        b
    })
}

/// Symbolic localizing matrix of `p` on block `i` at order `k`: side
/// `C(|Δ_i| + k2, k2)` with `k2 = ⌊k - deg(p)/2⌋`, entry `(α, β)` is
/// `Σ_γ p_γ y_{α+β+γ}`.
pub fn localizing_matrix_template(
    p: &Polynomial,
    pattern: &SparsityPattern,
    i: usize,
    k: u32,
    index: &UnionIndex,
) -> Result<PsdBlock> {
    let block = pattern.block(i);
    if !p.support_check(block) {
        return Err(Error::Support {
            what: "localizing polynomial".into(),
            block: i + 1,
        });
    }
    let dp = p.degree();
    if dp > 2 * k {
        return Err(Error::Degree(format!(
            "localizing polynomial of degree {dp} exceeds 2k = {}",
            2 * k
        )));
    }
    let k2 = (2 * k - dp) / 2;
    let basis = MonomialBasis::new(block, k2)?;
    let side = basis.len();
    let mut entries = Vec::with_capacity(side * (side + 1) / 2);
    for r in 0..side {
        for c in r..side {
            let ab = basis.get(r).mul(basis.get(c));
            let mut form = AffineForm::default();
            for (g, coef) in p.terms() {
                let e = ab.mul(g);
                let pos = index
                    .position(&e)
                    .ok_or_else(|| Error::Degree(format!("monomial {e} outside U_k")))?;
                form.push(pos, coef);
            }
            form.normalize();
            if !form.terms.is_empty() {
                entries.push((r, c, form));
            }
        }
    }
    Ok(PsdBlock {
        side,
        entries,
        role: BlockRole::Localizer {
            block: i,
            constraints: Vec::new(),
        },
        basis: basis.exponents().to_vec(),
        multiplier: p.clone(),
    })
}

/// Equality rows `<h * x^β, y> = 0` for `β` in the block basis of degree
/// `2k - deg(h)`.
pub fn localizing_vector_template(
    h: &Polynomial,
    pattern: &SparsityPattern,
    i: usize,
    k: u32,
    index: &UnionIndex,
) -> Result<Vec<(Exponent, AffineForm)>> {
    if h.is_zero() {
        return Err(Error::Format("localizing vector of the zero polynomial".into()));
    }
    let dh = h.degree();
    if dh > 2 * k {
        return Err(Error::Degree(format!("equality of degree {dh} exceeds 2k = {}", 2 * k)));
    }
    let basis = MonomialBasis::new(pattern.block(i), 2 * k - dh)?;
    let mut rows = Vec::with_capacity(basis.len());
    for beta in basis.exponents() {
        let mut form = AffineForm::default();
        for (g, coef) in h.terms() {
            let e = beta.mul(g);
            let pos = index
                .position(&e)
                .ok_or_else(|| Error::Degree(format!("monomial {e} outside U_k")))?;
            form.push(pos, coef);
        }
        form.normalize();
        rows.push((beta.clone(), form));
    }
    Ok(rows)
}

/// Builds the order-`k` relaxation of `pop` under `model` with default options.
pub fn assemble(pop: &SparsePop, k: u32, model: Model) -> Result<SdpProblem> {
    assemble_with(pop, k, model, &AssembleOptions::default())
}

#[derive(Clone, Debug)]
pub struct AssembleOptions {
    pub schmudgen_cap: usize,
    /// Upper bound on `|U_k|` for dense models (`None` for no bound).
    pub dense_cap: Option<usize>,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            schmudgen_cap: DEFAULT_SCHMUDGEN_CAP,
            dense_cap: None,
        }
    }
}

/// `|U_k|` of the dense relaxation in `n` variables: `C(n + 2k, 2k)`.
pub fn dense_moment_count(n: usize, k: u32) -> usize {
    binomial(n + 2 * k as usize, 2 * k as usize)
}

pub fn assemble_with(pop: &SparsePop, k: u32, model: Model, opts: &AssembleOptions) -> Result<SdpProblem> {
    let order = min_order(pop);
    if k < order.k0 {
        return Err(Error::Degree(format!(
            "order {k} is below the minimal order {}",
            order.k0
        )));
    }
    let work = if model.is_dense() {
        if let Some(cap) = opts.dense_cap {
            let size = dense_moment_count(pop.n(), k);
            if size > cap {
                return Err(Error::CapExceeded {
                    what: format!("dense moment vector at order {k}"),
                    size,
                    cap,
                });
            }
        }
        pop.densify()
    } else {
        pop.clone()
    };
    let pattern = work.pattern().clone();
    let index = UnionIndex::new(&pattern, k)?;

    let mut objective = AffineForm::default();
    for f in work.f_parts() {
        for (e, c) in f.terms() {
            let pos = index
                .position(e)
                .ok_or_else(|| Error::Degree(format!("objective monomial {e} outside U_k")))?;
            objective.push(pos, c);
        }
    }
    objective.normalize();

    let mut psd = Vec::new();
    let mut rows = vec![EqualityRow {
        form: AffineForm {
            terms: vec![(0, 1.0)],
            constant: 0.0,
        },
        rhs: 1.0,
        role: RowRole::Normalization,
    }];

    let products = if model.is_schmudgen() {
        Some(work.schmudgen_products(opts.schmudgen_cap)?)
    } else {
        None
    };

    for i in 0..pattern.num_blocks() {
        psd.push(moment_matrix_template(&pattern, i, k, &index)?);
        match products {
            Some(products) => {
                for (subset, g) in &products[i] {
                    if g.degree() > 2 * k {
                        continue;
                    }
                    let mut b = localizing_matrix_template(g, &pattern, i, k, &index)?;
                    b.role = BlockRole::Localizer {
                        block: i,
                        constraints: subset.clone(),
                    };
                    psd.push(b);
                }
            }
            None => {
                for (j, g) in work.ineq()[i].iter().enumerate() {
                    let mut b = localizing_matrix_template(g, &pattern, i, k, &index)?;
                    b.role = BlockRole::Localizer {
                        block: i,
                        constraints: vec![j],
                    };
                    psd.push(b);
                }
            }
        }
        for (j, h) in work.eq()[i].iter().enumerate() {
            for (shift, form) in localizing_vector_template(h, &pattern, i, k, &index)? {
                rows.push(EqualityRow {
                    form,
                    rhs: 0.0,
                    role: RowRole::Ideal {
                        block: i,
                        constraint: j,
                        shift,
                    },
                });
            }
        }
    }

    Ok(SdpProblem {
        model,
        order: k,
        num_vars: index.len(),
        objective,
        psd,
        rows,
        index,
        pop: work,
    })
}
