//! Random convex instances on wrap-around blocks.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. Draws are taken
//! block by block (i = 1..n). Within a block the order is: the linear
//! objective vector `b_i`, the linear constraint vector `c_i`, then the
//! factors `R` of `Q_i = RᵀR`, `B_i` (and for quartics `D_i`, `H_i`), each
//! filled row by row. Normal draws use `rand_distr::StandardNormal`, uniform
//! ones `[0, 1)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{Exponent, Polynomial};
use crate::sparsity::SparsityPattern;
use crate::SparsePop;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Qcqp,
    Quartic,
}

/// Recorded in reports so generated instances can be replayed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub n: usize,
    pub w: usize,
    pub seed: u64,
}

impl Generator {
    pub fn build(&self) -> Result<SparsePop> {
        match self.kind {
            GeneratorKind::Qcqp => gen_qcqp(self.n, self.w, self.seed),
            GeneratorKind::Quartic => gen_quartic(self.n, self.w, self.seed),
        }
    }
}

/// `Δ_i = {i, …, i+w−1}` with indices past `n` wrapping to the front.
pub fn wrap_blocks(n: usize, w: usize) -> Result<Vec<Vec<usize>>> {
    if w < 2 || w > n {
        return Err(Error::Format(format!(
            "block width w = {w} must satisfy 2 <= w <= n = {n}"
        )));
    }
    Ok((1..=n)
        .map(|i| {
            let mut b: Vec<usize> = (0..w).map(|j| (i - 1 + j) % n + 1).collect();
            b.sort_unstable();
            b
        })
        .collect())
}

fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

fn gram_normal(rng: &mut ChaCha8Rng, w: usize) -> DMatrix<f64> {
    let r = DMatrix::from_row_slice(w, w, &normals(rng, w * w));
    r.transpose() * r
}

fn gram_uniform(rng: &mut ChaCha8Rng, w: usize) -> DMatrix<f64> {
    let v: Vec<f64> = (0..w * w).map(|_| rng.random::<f64>()).collect();
    let r = DMatrix::from_row_slice(w, w, &v);
    r.transpose() * r
}

/// `Σ_j v_j m_j` for monomials `m_j`.
fn linear(n: usize, monos: &[Exponent], v: &[f64]) -> Polynomial {
    Polynomial::from_terms(n, monos.iter().cloned().zip(v.iter().copied())).expect("variables within n")
}

/// `mᵀ A m` for monomials `m_j`.
fn quadratic(n: usize, monos: &[Exponent], a: &DMatrix<f64>) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for r in 0..monos.len() {
        for c in 0..monos.len() {
            p.add_term(monos[r].mul(&monos[c]), a[(r, c)]);
        }
    }
    p
}

fn generate(n: usize, w: usize, seed: u64, quartic: bool) -> Result<SparsePop> {
    let blocks = wrap_blocks(n, w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Vec::with_capacity(n);
    let mut ineq = Vec::with_capacity(n);
    for i in 1..=n {
        // draw in the natural (unsorted) order of the block
        let vars: Vec<usize> = (0..w).map(|j| (i - 1 + j) % n + 1).collect();
        let x: Vec<Exponent> = vars.iter().map(|&v| Exponent::var(v, 1)).collect();
        let x2: Vec<Exponent> = vars.iter().map(|&v| Exponent::var(v, 2)).collect();
        let b = normals(&mut rng, w);
        let c = normals(&mut rng, w);
        let q = gram_normal(&mut rng, w);
        let bm = gram_normal(&mut rng, w);
        let mut fi = linear(n, &x, &b).add(&quadratic(n, &x, &q));
        let mut gi = Polynomial::constant(n, 1.0)
            .sub(&linear(n, &x, &c))
            .sub(&quadratic(n, &x, &bm));
        if quartic {
            let d = gram_uniform(&mut rng, w);
            let h = gram_uniform(&mut rng, w);
            fi = fi.add(&quadratic(n, &x2, &d));
            gi = gi.sub(&quadratic(n, &x2, &h));
        }
        f.push(fi);
        ineq.push(vec![gi]);
    }
    let pattern = SparsityPattern::new(n, blocks)?;
    SparsePop::new(pattern, f, vec![Vec::new(); n], ineq)
}

/// Convex QCQP: `f_i = xᵀQ_i x + b_iᵀx`, `g_i = 1 − xᵀB_i x − c_iᵀx` on each
/// wrap-around block, with `Q_i`, `B_i` Gram matrices of normal factors.
pub fn gen_qcqp(n: usize, w: usize, seed: u64) -> Result<SparsePop> {
    generate(n, w, seed, false)
}

/// The QCQP plus `(x^[2])ᵀ D_i x^[2]` in the objective and
/// `−(x^[2])ᵀ H_i x^[2]` in the constraint, where `x^[2]` squares each
/// coordinate and `D_i`, `H_i` are Gram matrices of uniform factors.
pub fn gen_quartic(n: usize, w: usize, seed: u64) -> Result<SparsePop> {
    generate(n, w, seed, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::linalg::min_eigenvalue;

    #[test]
    fn wrap_around_blocks() {
        assert_eq!(
            wrap_blocks(6, 2).unwrap(),
            vec![vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 5], vec![5, 6], vec![1, 6]]
        );
        assert!(wrap_blocks(4, 4).unwrap().iter().all(|b| b == &vec![1, 2, 3, 4]));
        assert!(wrap_blocks(3, 4).is_err());
        assert!(wrap_blocks(3, 1).is_err());
    }

    #[test]
    fn deterministic_in_seed() {
        let a = gen_qcqp(6, 3, 1).unwrap();
        let b = gen_qcqp(6, 3, 1).unwrap();
        let c = gen_qcqp(6, 3, 2).unwrap();
        assert_eq!(a.objective(), b.objective());
        assert_ne!(a.objective(), c.objective());
    }

    /// The quadratic part of every objective block is PSD and the origin is
    /// strictly feasible.
    #[test]
    fn convex_structure() {
        for seed in 0..5 {
            let pop = gen_qcqp(7, 3, seed).unwrap();
            for (i, f) in pop.f_parts().iter().enumerate() {
                let vars = pop.pattern().block(i);
                let hess = DMatrix::from_fn(vars.len(), vars.len(), |r, c| {
                    let e = Exponent::var(vars[r], 1).mul(&Exponent::var(vars[c], 1));
                    let v = f.coeff(&e);
                    if r == c {
                        v
                    } else {
                        v / 2.0
                    }
                });
                assert!(min_eigenvalue(&hess) >= -1e-10);
                assert!(pop.ineq()[i][0].eval(&vec![0.0; 7]).unwrap() == 1.0);
            }
        }
    }

    #[test]
    fn quartic_degrees() {
        let pop = gen_quartic(4, 2, 7).unwrap();
        assert_eq!(pop.num_blocks(), 4);
        for i in 0..4 {
            assert_eq!(pop.f_parts()[i].degree(), 4);
            assert_eq!(pop.ineq()[i][0].degree(), 4);
        }
    }
}
