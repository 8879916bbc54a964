//! Elimination of the linear equality rows `Fᵀ y = c_f`.
//!
//! Each independent row fixes one pivot variable as an affine function of the
//! others, so `y = y0 + N w` over the remaining variables `w`. The reduced
//! problem has no free variables, which keeps the interior-point iteration
//! well conditioned when the ideal multipliers would otherwise drift.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::{SdpStandard, SymEntry};

/// Relative size below which an eliminated coefficient counts as zero.
const REL_TOL: f64 = 1e-10;

pub(crate) struct Reduction {
    /// Number of variables of the original problem.
    pub m: usize,
    pub y0: DVector<f64>,
    /// Column `j` of `N` as `(original index, coefficient)` pairs.
    pub columns: Vec<Vec<(usize, f64)>>,
    /// Original free columns that produced a pivot.
    pub kept: Vec<usize>,
    pub dropped: usize,
}

impl Reduction {
    pub fn lift(&self, w: &[f64], with_offset: bool) -> Vec<f64> {
        let mut y = if with_offset {
            self.y0.as_slice().to_vec()
        } else {
            vec![0.0; self.m]
        };
        for (col, &wj) in self.columns.iter().zip(w) {
            for &(i, c) in col {
                y[i] += c * wj;
            }
        }
        y
    }
}

/// Sparse affine expression `constant + Σ coef · y_var`.
#[derive(Clone, Default)]
struct Expr {
    terms: BTreeMap<usize, f64>,
    constant: f64,
    /// Combination of original rows this expression was derived from.
    prov: BTreeMap<usize, f64>,
}

fn axpy(acc: &mut BTreeMap<usize, f64>, a: f64, x: &BTreeMap<usize, f64>) {
    for (&k, &v) in x {
        *acc.entry(k).or_insert(0.0) += a * v;
    }
}

pub(crate) enum Reduced {
    Ok(SdpStandard, Reduction),
    /// A combination `x_f` of the rows with `F x_f = 0` and `c_fᵀ x_f = -1`.
    Inconsistent {
        ray: Vec<f64>,
    },
}

impl Expr {
    /// Replaces `y_var` by `sub` in place.
    fn substitute(&mut self, var: usize, sub: &Expr) {
        if let Some(a) = self.terms.remove(&var) {
            self.constant += a * sub.constant;
            for (&q, &e) in &sub.terms {
                *self.terms.entry(q).or_insert(0.0) += a * e;
            }
        }
    }

    fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, v| v.abs() > tol);
    }
}

pub(crate) fn reduce(sdp: &SdpStandard) -> Reduced {
    let m = sdp.num_constraints();
    let mut eliminated: BTreeMap<usize, Expr> = BTreeMap::new();
    let mut kept = Vec::new();
    let mut dropped = 0;

    for (k, col) in sdp.free.iter().enumerate() {
        // row: Σ a_i y_i - c = 0 stored as an expression equal to zero
        let mut row = Expr {
            terms: BTreeMap::new(),
            constant: -col.cost,
            prov: BTreeMap::from([(k, 1.0)]),
        };
        for &(i, v) in &col.entries {
            *row.terms.entry(i).or_insert(0.0) += v;
        }
        // Largest magnitude entering the row; cancellation below this level
        // is roundoff, not structure.
        let mut mag = row.terms.values().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut cmag = row.constant.abs();
        let subs: Vec<usize> = row
            .terms
            .keys()
            .copied()
            .filter(|i| eliminated.contains_key(i))
            .collect();
        for p in subs {
            let e = &eliminated[&p];
            let a = row.terms[&p].abs();
            mag = mag.max(a * e.terms.values().fold(0.0f64, |m, v| m.max(v.abs())));
            cmag = cmag.max(a * e.constant.abs());
            let c = row.terms[&p];
            axpy(&mut row.prov, -c, &e.prov);
            row.substitute(p, e);
        }
        row.prune(REL_TOL * mag);
        let Some((&p, &a)) = row
            .terms
            .iter()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()).then(y.0.cmp(x.0)))
        else {
            if row.constant.abs() > 1e-8 * (1.0 + cmag) {
                let mut ray = vec![0.0; sdp.free.len()];
                for (&j, &v) in &row.prov {
                    ray[j] = v / row.constant;
                }
                return Reduced::Inconsistent { ray };
            }
            dropped += 1;
            continue;
        };
        // y_p = -(constant + Σ_{q≠p} a_q y_q) / a
        row.terms.remove(&p);
        let expr = Expr {
            terms: row.terms.iter().map(|(&q, &v)| (q, -v / a)).collect(),
            constant: -row.constant / a,
            prov: row.prov.iter().map(|(&q, &v)| (q, v / a)).collect(),
        };
        for e in eliminated.values_mut() {
            if let Some(&d) = e.terms.get(&p) {
                axpy(&mut e.prov, d, &expr.prov);
            }
            e.substitute(p, &expr);
        }
        eliminated.insert(p, expr);
        kept.push(k);
    }

    // Remaining variables, in index order, become the columns of N.
    let remaining: Vec<usize> = (0..m).filter(|i| !eliminated.contains_key(i)).collect();
    let mut new_index = vec![usize::MAX; m];
    for (j, &i) in remaining.iter().enumerate() {
        new_index[i] = j;
    }
    let mut columns: Vec<Vec<(usize, f64)>> = remaining.iter().map(|&i| vec![(i, 1.0)]).collect();
    let mut y0 = DVector::zeros(m);
    for (&p, e) in &eliminated {
        y0[p] = e.constant;
        for (&q, &v) in &e.terms {
            columns[new_index[q]].push((p, v));
        }
    }

    let mut a = Vec::with_capacity(columns.len());
    let mut b = Vec::with_capacity(columns.len());
    for col in &columns {
        let mut acc: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        let mut bj = 0.0;
        for &(i, c) in col {
            bj += c * sdp.b[i];
            for e in &sdp.a[i] {
                *acc.entry((e.block, e.row, e.col)).or_insert(0.0) += c * e.value;
            }
        }
        a.push(
            acc.into_iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|((block, row, col), value)| SymEntry { block, row, col, value })
                .collect(),
        );
        b.push(bj);
    }

    // C - Σ y0_i A_i
    let mut c_acc: Vec<BTreeMap<(usize, usize), f64>> = sdp
        .c
        .iter()
        .map(|entries| entries.iter().map(|&(r, c, v)| ((r, c), v)).collect())
        .collect();
    for (&p, e) in &eliminated {
        if e.constant == 0.0 {
            continue;
        }
        for s in &sdp.a[p] {
            *c_acc[s.block].entry((s.row, s.col)).or_insert(0.0) -= e.constant * s.value;
        }
    }
    let c = c_acc
        .into_iter()
        .map(|m| {
            m.into_iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|((r, c), v)| (r, c, v))
                .collect()
        })
        .collect();

    let reduced = SdpStandard {
        sides: sdp.sides.clone(),
        a,
        b,
        c,
        free: Vec::new(),
    };
    Reduced::Ok(
        reduced,
        Reduction {
            m,
            y0,
            columns,
            kept,
            dropped,
        },
    )
}

/// Least-squares multipliers `x_f` of the kept free columns for
/// `F x_f ≈ rhs`, scattered back to all columns (dropped ones stay zero).
pub(crate) fn free_multipliers(sdp: &SdpStandard, red: &Reduction, rhs: &DVector<f64>) -> Vec<f64> {
    let mut out = vec![0.0; sdp.free.len()];
    if red.kept.is_empty() {
        return out;
    }
    let mut f = DMatrix::zeros(red.m, red.kept.len());
    for (j, &k) in red.kept.iter().enumerate() {
        for &(i, v) in &sdp.free[k].entries {
            f[(i, j)] += v;
        }
    }
    let svd = f.svd(true, true);
    if let Ok(x) = svd.solve(rhs, 1e-12) {
        for (j, &k) in red.kept.iter().enumerate() {
            out[k] = x[j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::FreeColumn;

    #[test]
    fn dependent_rows_are_dropped() {
        let sdp = SdpStandard {
            sides: vec![1],
            a: vec![
                vec![SymEntry {
                    block: 0,
                    row: 0,
                    col: 0,
                    value: 1.0,
                }],
                vec![SymEntry {
                    block: 0,
                    row: 0,
                    col: 0,
                    value: 2.0,
                }],
                vec![],
            ],
            b: vec![1.0, 0.0, 3.0],
            c: vec![vec![]],
            free: vec![
                FreeColumn {
                    entries: vec![(0, 1.0), (1, 1.0)],
                    cost: 2.0,
                },
                FreeColumn {
                    entries: vec![(0, 2.0), (1, 2.0)],
                    cost: 4.0,
                },
                FreeColumn {
                    entries: vec![(2, 1.0)],
                    cost: 5.0,
                },
            ],
        };
        let Reduced::Ok(red, map) = reduce(&sdp) else {
            panic!("consistent rows")
        };
        assert_eq!(map.dropped, 1);
        assert_eq!(map.kept, vec![0, 2]);
        assert_eq!(red.num_constraints(), 1);
        // every lifted point satisfies the rows
        for w in [-1.0, 0.0, 2.5] {
            let y = map.lift(&[w], true);
            assert!((y[0] + y[1] - 2.0).abs() < 1e-14);
            assert!((y[2] - 5.0).abs() < 1e-14);
        }
        // objective is preserved up to the constant offset
        let y = map.lift(&[1.0], true);
        let orig: f64 = sdp.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let off: f64 = sdp.b.iter().zip(map.y0.iter()).map(|(b, y)| b * y).sum();
        assert!((orig - off - red.b[0]).abs() < 1e-14);
    }

    #[test]
    fn inconsistent_rows_give_a_ray() {
        let sdp = SdpStandard {
            sides: vec![],
            a: vec![vec![]],
            b: vec![0.0],
            c: vec![],
            free: vec![
                FreeColumn {
                    entries: vec![(0, 1.0)],
                    cost: 1.0,
                },
                FreeColumn {
                    entries: vec![(0, 1.0)],
                    cost: 2.0,
                },
            ],
        };
        let Reduced::Inconsistent { ray } = reduce(&sdp) else {
            panic!("inconsistent rows")
        };
        // F x_f = 0 and c_fᵀ x_f = -1
        assert!((ray[0] + ray[1]).abs() < 1e-14);
        assert!((ray[0] * 1.0 + ray[1] * 2.0 + 1.0).abs() < 1e-14);
    }
}
