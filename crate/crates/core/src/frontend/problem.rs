//! The `.spop.json` problem format.
//!
//! ```json
//! {
//!   "version": 1,
//!   "n": 3,
//!   "blocks": [[1, 2], [2, 3]],
//!   "objective": [[{"c": 1, "e": [[1, 2]]}], [{"c": -1, "e": [[3, 2]]}]],
//!   "eq": [[], []],
//!   "ineq": [[[{"c": 1, "e": []}, {"c": -1, "e": [[1, 2]]}]], []]
//! }
//! ```
//!
//! `objective` holds one term list per block, `eq` and `ineq` one list of
//! term lists per block. Variables are 1-based; `e` lists `[var, power]`
//! pairs, and an empty `e` is the constant monomial. `eq`, `ineq` and
//! `labels` may be omitted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::{Polynomial, Term};
use crate::sparsity::SparsityPattern;
use crate::SparsePop;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
    pub objective: Vec<Vec<Term>>,
    #[serde(default)]
    pub eq: Vec<Vec<Vec<Term>>>,
    #[serde(default)]
    pub ineq: Vec<Vec<Vec<Term>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn block_name(vars: &[usize]) -> String {
    let v: Vec<String> = vars.iter().map(|x| format!("x{x}")).collect();
    format!("{{{}}}", v.join(", "))
}

impl ProblemFile {
    /// Parses the JSON text; syntax and type errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    /// Validates the file and builds the problem. Support violations name
    /// the polynomial and the block's variables.
    pub fn to_pop(&self) -> Result<SparsePop> {
        if self.blocks.is_empty() {
            return Err(Error::Format("the blocks list is empty".into()));
        }
        let m = self.blocks.len();
        let pattern = SparsityPattern::new(self.n, self.blocks.clone())?;
        let per_block = |what: &str, v: &Vec<Vec<Vec<Term>>>| -> Result<Vec<Vec<Vec<Term>>>> {
            match v.len() {
                0 => Ok(vec![Vec::new(); m]),
                l if l == m => Ok(v.clone()),
                l => Err(Error::Format(format!("{what} has {l} block entries, expected {m}"))),
            }
        };
        if self.objective.len() != m {
            return Err(Error::Format(format!(
                "objective has {} block entries, expected {m}",
                self.objective.len()
            )));
        }
        let eq = per_block("eq", &self.eq)?;
        let ineq = per_block("ineq", &self.ineq)?;
        let n = self.n;
        let build = |what: String, i: usize, terms: &[Term]| -> Result<Polynomial> {
            let p = Polynomial::from_term_list(n, terms).map_err(|e| Error::Format(format!("{what}: {e}")))?;
            let block = pattern.block(i);
            if !p.support_check(block) {
                let outside: Vec<String> = p
                    .support_vars()
                    .into_iter()
                    .filter(|v| block.binary_search(v).is_err())
                    .map(|v| format!("x{v}"))
                    .collect();
                return Err(Error::Format(format!(
                    "{what} uses {} outside block {} {}",
                    outside.join(", "),
                    i + 1,
                    block_name(block)
                )));
            }
            Ok(p)
        };
        let f = (0..m)
            .map(|i| build(format!("objective part {}", i + 1), i, &self.objective[i]))
            .collect::<Result<Vec<_>>>()?;
        let list = |what: &str, v: &[Vec<Vec<Term>>]| -> Result<Vec<Vec<Polynomial>>> {
            (0..m)
                .map(|i| {
                    v[i].iter()
                        .enumerate()
                        .map(|(j, t)| build(format!("{what} {} of block {}", j + 1, i + 1), i, t))
                        .collect()
                })
                .collect()
        };
        let eq = list("equality", &eq)?;
        let ineq = list("inequality", &ineq)?;
        SparsePop::new(pattern, f, eq, ineq)
    }

    pub fn from_pop(pop: &SparsePop) -> Self {
        let terms = |ps: &[Polynomial]| ps.iter().map(Polynomial::to_terms).collect::<Vec<_>>();
        Self {
            version: FORMAT_VERSION,
            n: pop.n(),
            blocks: pop.pattern().blocks().to_vec(),
            objective: pop.f_parts().iter().map(Polynomial::to_terms).collect(),
            eq: pop.eq().iter().map(|b| terms(b)).collect(),
            ineq: pop.ineq().iter().map(|b| terms(b)).collect(),
            labels: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_DISKS: &str = r#"{
        "version": 1,
        "n": 3,
        "blocks": [[1, 2], [2, 3]],
        "objective": [
            [{"c": 1, "e": [[1, 2]]}, {"c": 4, "e": [[1, 1], [2, 1]]}],
            [{"c": 4, "e": [[2, 1], [3, 1]]}, {"c": -1, "e": [[3, 2]]}]
        ],
        "ineq": [
            [[{"c": 1, "e": []}, {"c": -1, "e": [[1, 2]]}, {"c": -1, "e": [[2, 2]]}]],
            [[{"c": 1, "e": []}, {"c": -1, "e": [[2, 2]]}, {"c": -1, "e": [[3, 2]]}]]
        ]
    }"#;

    #[test]
    fn parses_two_disks() {
        let pop = ProblemFile::parse(TWO_DISKS).unwrap().to_pop().unwrap();
        assert_eq!(pop.num_blocks(), 2);
        assert_eq!(pop.objective().degree(), 2);
        assert_eq!(pop.eq().iter().map(Vec::len).sum::<usize>(), 0);
    }

    #[test]
    fn rejects_empty_blocks() {
        let text = r#"{"version": 1, "n": 2, "blocks": [], "objective": []}"#;
        let err = ProblemFile::parse(text).unwrap().to_pop().unwrap_err();
        assert!(err.to_string().contains("empty"), "{err}");
    }

    #[test]
    fn rejects_term_outside_block() {
        let text = r#"{"version": 1, "n": 3, "blocks": [[1, 2]],
            "objective": [[{"c": 1, "e": [[3, 2]]}]]}"#;
        let err = ProblemFile::parse(text).unwrap().to_pop().unwrap_err().to_string();
        assert!(err.contains("block 1 {x1, x2}") && err.contains("x3"), "{err}");
    }

    #[test]
    fn rejects_unknown_fields_and_bad_numbers() {
        let text = r#"{"version": 1, "n": 1, "blocks": [[1]], "objective": [[]], "extra": 0}"#;
        let err = ProblemFile::parse(text).unwrap_err().to_string();
        assert!(err.contains("extra") && err.contains("line"), "{err}");
        let text = r#"{"version": 1, "n": 1, "blocks": [[1]], "objective": [[{"c": "two", "e": []}]]}"#;
        assert!(ProblemFile::parse(text).is_err());
    }

    #[test]
    fn emit_then_parse() {
        let file = ProblemFile::parse(TWO_DISKS).unwrap();
        let pop = file.to_pop().unwrap();
        let again = ProblemFile::parse(&ProblemFile::from_pop(&pop).to_json()).unwrap();
        assert_eq!(again.to_pop().unwrap().objective(), pop.objective());
    }
}
