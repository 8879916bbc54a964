//! Sparse multivariate polynomials over globally indexed variables.
//!
//! Variables are numbered `1..=n`. An [`Exponent`] stores only the variables
//! with a positive power, so the same value describes a monomial both in the
//! ambient ring and inside any block that contains its support.
//!
//! Monomials are ordered graded-lexicographically: lower total degree first,
//! and within a degree the monomial with the larger power of the
//! lowest-numbered variable first. For two variables and degree two this gives
//! `1, x1, x2, x1^2, x1*x2, x2^2`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with magnitude at or below this are dropped after arithmetic.
pub const DROP_TOL: f64 = 1e-14;

/// A monomial power `alpha`, stored as sorted `(variable, power)` pairs.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "Vec<(usize, u32)>", try_from = "Vec<(usize, u32)>")]
pub struct Exponent {
    entries: Vec<(usize, u32)>,
    degree: u32,
}

impl Exponent {
    /// The zero exponent (the constant monomial).
    pub fn zero() -> Self {
        Self::default()
    }

    /// `x_var^power`.
    pub fn var(var: usize, power: u32) -> Self {
        if power == 0 {
            return Self::zero();
        }
        Self {
            entries: vec![(var, power)],
            degree: power,
        }
    }

    /// Builds an exponent from `(variable, power)` pairs in any order.
    /// Repeated variables have their powers summed; zero powers vanish.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Result<Self> {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for (v, p) in pairs {
            if v == 0 {
                return Err(Error::Format("variable indices are 1-based".into()));
            }
            *map.entry(v).or_insert(0) += p;
        }
        Ok(Self::from_sorted(map.into_iter().filter(|&(_, p)| p > 0).collect()))
    }

    fn from_sorted(entries: Vec<(usize, u32)>) -> Self {
        let degree = entries.iter().map(|&(_, p)| p).sum();
        Self { entries, degree }
    }

    /// Dense exponent over the given variables (`powers[j]` is the power of `vars[j]`).
    pub fn from_dense(vars: &[usize], powers: &[u32]) -> Self {
        debug_assert_eq!(vars.len(), powers.len());
        let mut entries: Vec<(usize, u32)> = vars
            .iter()
            .zip(powers)
            .filter(|(_, &p)| p > 0)
            .map(|(&v, &p)| (v, p))
            .collect();
        entries.sort_unstable();
        Self::from_sorted(entries)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    /// Power of `var` (0 if absent).
    pub fn power(&self, var: usize) -> u32 {
        self.entries
            .binary_search_by_key(&var, |&(v, _)| v)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Variables with positive power.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(v, _)| v)
    }

    /// True iff the support is contained in `block` (which must be sorted).
    pub fn supported_in(&self, block: &[usize]) -> bool {
        self.entries.iter().all(|(v, _)| block.binary_search(v).is_ok())
    }

    /// Largest variable index used, 0 for the constant monomial.
    pub fn max_var(&self) -> usize {
        self.entries.last().map(|&(v, _)| v).unwrap_or(0)
    }

    /// Monomial product `x^self * x^other`.
    pub fn mul(&self, other: &Exponent) -> Exponent {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Exponent {
            entries: out,
            degree: self.degree + other.degree,
        }
    }

    /// Restriction to the variables of `block`.
    pub fn restrict(&self, block: &[usize]) -> Exponent {
        Self::from_sorted(
            self.entries
                .iter()
                .copied()
                .filter(|(v, _)| block.binary_search(v).is_ok())
                .collect(),
        )
    }

    /// `u^alpha`, with `u` indexed by global variable (`u[v - 1]`).
    pub fn eval(&self, u: &[f64]) -> f64 {
        self.entries.iter().map(|&(v, p)| u[v - 1].powi(p as i32)).product()
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            // Walk both supports in variable order; the first variable where
            // the powers differ decides, larger power first.
            let (a, b) = (&self.entries, &other.entries);
            let (mut i, mut j) = (0, 0);
            loop {
                match (a.get(i), b.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (Some(&(va, pa)), Some(&(vb, pb))) => match va.cmp(&vb) {
                        Ordering::Less => return Ordering::Less,
                        Ordering::Greater => return Ordering::Greater,
                        Ordering::Equal => {
                            if pa != pb {
                                return pb.cmp(&pa);
                            }
                            i += 1;
                            j += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "1");
        }
        for (k, &(v, p)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if p == 1 {
                write!(f, "x{v}")?;
            } else {
                write!(f, "x{v}^{p}")?;
            }
        }
        Ok(())
    }
}

impl From<Exponent> for Vec<(usize, u32)> {
    fn from(e: Exponent) -> Self {
        e.entries
    }
}

impl TryFrom<Vec<(usize, u32)>> for Exponent {
    type Error = Error;
    fn try_from(pairs: Vec<(usize, u32)>) -> Result<Self> {
        Exponent::from_pairs(pairs)
    }
}

/// One term `c · x^e` in the serialized form `{"c": 2.0, "e": [[1, 2], [3, 1]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub c: f64,
    pub e: Exponent,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyRepr {
    n: usize,
    terms: Vec<Term>,
}

/// Sparse polynomial with real coefficients in `n` variables.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "PolyRepr", try_from = "PolyRepr")]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl From<Polynomial> for PolyRepr {
    fn from(p: Polynomial) -> Self {
        PolyRepr {
            n: p.n,
            terms: p.to_terms(),
        }
    }
}

impl TryFrom<PolyRepr> for Polynomial {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        Polynomial::from_term_list(r.n, &r.terms)
    }
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        if c != 0.0 {
            p.terms.insert(Exponent::zero(), c);
        }
        p
    }

    /// The coordinate polynomial `x_var`.
    pub fn var(n: usize, var: usize) -> Self {
        Self::monomial(n, Exponent::var(var, 1), 1.0)
    }

    pub fn monomial(n: usize, e: Exponent, c: f64) -> Self {
        let mut p = Self::zero(n);
        if c != 0.0 {
            p.terms.insert(e, c);
        }
        p
    }

    /// Builds a polynomial from terms taken verbatim: repeated exponents are
    /// summed and exact zeros dropped, but no tolerance is applied.
    pub fn from_terms<I: IntoIterator<Item = (Exponent, f64)>>(n: usize, terms: I) -> Result<Self> {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            if e.max_var() > n {
                return Err(Error::Format(format!("monomial {e} uses a variable beyond n = {n}")));
            }
            if !c.is_finite() {
                return Err(Error::Format(format!("non-finite coefficient on {e}")));
            }
            *p.terms.entry(e).or_insert(0.0) += c;
        }
        p.terms.retain(|_, c| *c != 0.0);
        Ok(p)
    }

    pub fn from_term_list(n: usize, terms: &[Term]) -> Result<Self> {
        Self::from_terms(n, terms.iter().map(|t| (t.e.clone(), t.c)))
    }

    /// Terms in graded order.
    pub fn to_terms(&self) -> Vec<Term> {
        self.terms.iter().map(|(e, &c)| Term { c, e: e.clone() }).collect()
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &Exponent) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Sorted list of variables that occur.
    pub fn support_vars(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self.terms.keys().flat_map(|e| e.support()).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// True iff every term is supported inside `block` (sorted).
    pub fn support_check(&self, block: &[usize]) -> bool {
        self.terms.keys().all(|e| e.supported_in(block))
    }

    /// Evaluates at `x` (length `n`), summing terms in monomial order.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            acc += c * e.eval(x);
        }
        acc
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() > DROP_TOL);
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.n = self.n.max(other.n);
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        out.prune();
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), c * s);
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Self::zero(self.n.max(other.n));
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                *out.terms.entry(ea.mul(eb)).or_insert(0.0) += ca * cb;
            }
        }
        out.prune();
        out
    }

    /// Adds `c * x^e` in place.
    pub fn add_term(&mut self, e: Exponent, c: f64) {
        let slot = self.terms.entry(e).or_insert(0.0);
        *slot += c;
        if slot.abs() <= DROP_TOL {
            self.terms.retain(|_, c| c.abs() > DROP_TOL);
        }
    }

    /// Product of a list of polynomials (1 for the empty list).
    pub fn product<'a, I: IntoIterator<Item = &'a Polynomial>>(n: usize, factors: I) -> Polynomial {
        factors
            .into_iter()
            .fold(Polynomial::constant(n, 1.0), |acc, p| acc.mul(p))
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Polynomial) -> f64 {
        let mut m: f64 = 0.0;
        for (e, c) in &self.terms {
            m = m.max((c - other.coeff(e)).abs());
        }
        for (e, c) in &other.terms {
            if !self.terms.contains_key(e) {
                m = m.max(c.abs());
            }
        }
        m
    }
}

impl Polynomial {
    /// Parses an expression such as `"x1^2 + 4*x1*x2 - (x3 - 1)^2"` over `n`
    /// variables. Supports `+ - * ^`, parentheses, decimal constants and
    /// variables `x1..xn`; exponents must be nonnegative integers.
    pub fn parse(n: usize, src: &str) -> Result<Polynomial> {
        let mut p = Parser {
            s: src.as_bytes(),
            pos: 0,
            n,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Format(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if op == b'+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.scale(-1.0))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let k = self.integer()?;
        let k = u32::try_from(k).map_err(|_| self.error("exponent too large"))?;
        Ok((0..k).fold(Polynomial::constant(self.n, 1.0), |acc, _| acc.mul(&base)))
    }

    fn integer(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.error("expected an integer"))
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                let v = self.integer()?;
                if v == 0 || v > self.n {
                    return Err(self.error(&format!("variable x{v} outside x1..x{}", self.n)));
                }
                Ok(Polynomial::var(self.n, v))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() {
                    let c = self.s[self.pos];
                    let exp_sign = (c == b'-' || c == b'+') && matches!(self.s[self.pos - 1], b'e' | b'E');
                    if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let v: f64 = std::str::from_utf8(&self.s[start..self.pos])
                    .ok()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| self.error("malformed number"))?;
                Ok(Polynomial::constant(self.n, v))
            }
            _ => Err(self.error("expected a number, variable or '('")),
        }
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let sign = if *c < 0.0 { "-" } else { "+" };
            if k == 0 {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if e.is_zero() {
                write!(f, "{}", c.abs())?;
            } else if c.abs() == 1.0 {
                write!(f, "{e}")?;
            } else {
                write!(f, "{}*{e}", c.abs())?;
            }
        }
        Ok(())
    }
}

/// All monomials of degree at most `degree` in the variables of `block`, in
/// graded lexicographic order.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    block: Vec<usize>,
    degree: u32,
    exponents: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

/// Binomial coefficient, saturating on overflow.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Checks that `block` is a nonempty, strictly increasing list of 1-based indices.
pub fn validate_block(block: &[usize]) -> Result<()> {
    if block.is_empty() {
        return Err(Error::Format("empty variable block".into()));
    }
    if block[0] == 0 {
        return Err(Error::Format("variable indices are 1-based".into()));
    }
    if block.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Format(format!(
            "block {block:?} is not strictly increasing (duplicate or unsorted index)"
        )));
    }
    Ok(())
}

impl MonomialBasis {
    pub fn new(block: &[usize], degree: u32) -> Result<Self> {
        validate_block(block)?;
        let mut exponents = Vec::with_capacity(binomial(block.len() + degree as usize, degree as usize));
        let mut powers = vec![0u32; block.len()];
        for d in 0..=degree {
            push_compositions(block, &mut powers, 0, d, &mut exponents);
        }
        let index = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Ok(Self {
            block: block.to_vec(),
            degree,
            exponents,
            index,
        })
    }

    pub fn block(&self) -> &[usize] {
        &self.block
    }

    pub fn degree(&self) -> u32 {
        self.degree
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

    pub fn get(&self, i: usize) -> &Exponent {
        &self.exponents[i]
    }

    pub fn position(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// `[u]_d`: the basis monomials evaluated at a global point `u`.
    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.exponents.iter().map(|e| e.eval(u)).collect()
    }
}

/// Pushes all exponents of total degree `remaining` over `block[pos..]`, in
/// decreasing order of the leading powers.
fn push_compositions(block: &[usize], powers: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Exponent>) {
    if pos + 1 == block.len() {
        powers[pos] = remaining;
        out.push(Exponent::from_dense(block, powers));
        powers[pos] = 0;
        return;
    }
    for p in (0..=remaining).rev() {
        powers[pos] = p;
        push_compositions(block, powers, pos + 1, remaining - p, out);
    }
    powers[pos] = 0;
}

/// Convenience wrapper for [`MonomialBasis::new`].
pub fn monomial_basis(block: &[usize], degree: u32) -> Result<MonomialBasis> {
    MonomialBasis::new(block, degree)
}
