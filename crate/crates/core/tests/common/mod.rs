#![allow(dead_code)]

use spop::{Polynomial, SparsePop, SparsityPattern};

pub fn poly(n: usize, s: &str) -> Polynomial {
    Polynomial::parse(n, s).unwrap()
}

/// Builds a POP from strings; `eq` and `ineq` are per block.
pub fn pop(n: usize, blocks: &[&[usize]], f: &[&str], eq: &[&[&str]], ineq: &[&[&str]]) -> SparsePop {
    let pattern = SparsityPattern::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap();
    let list = |v: &[&[&str]]| v.iter().map(|b| b.iter().map(|s| poly(n, s)).collect()).collect();
    SparsePop::new(pattern, f.iter().map(|s| poly(n, s)).collect(), list(eq), list(ineq)).unwrap()
}

pub fn sextic_pair() -> SparsePop {
    pop(
        3,
        &[&[1, 2], &[2, 3]],
        &["x1^2*x2*(x1^2 + x2 - 1)", "x2^2*x3*(x2^2 + x3 - 1)"],
        &[&[], &[]],
        &[&["1 - x1^2 - x2^2"], &["1 - x2^2 - x3^2"]],
    )
}

pub fn two_disks() -> SparsePop {
    pop(
        3,
        &[&[1, 2], &[2, 3]],
        &["x1^2 + 4*x1*x2", "4*x2*x3 - x3^2"],
        &[&[], &[]],
        &[&["1 - x1^2 - x2^2"], &["1 - x2^2 - x3^2"]],
    )
}

pub fn binary_chain() -> SparsePop {
    pop(
        4,
        &[&[1, 2, 3], &[2, 3, 4]],
        &["x1*x2*x3 - x1*x2", "x2*x3*x4 - x3*x4"],
        &[
            &["x1^2 - x1", "x2^2 - x2", "x3^2 - x3"],
            &["x2^2 - x2", "x3^2 - x3", "x4^2 - x4"],
        ],
        &[&["x1 + x2 + x3 - 1"], &["x2 + x3 + x4 - 1"]],
    )
}

pub fn sextic_triangle() -> SparsePop {
    pop(
        3,
        &[&[1, 2], &[2, 3], &[1, 3]],
        &[
            "x1^6 + x2^6 + x1^3*x2^3 + x1",
            "x2^6 + x3^6 + x2^3*x3^3 - x2",
            "x1^6 + x3^6 + x1^3*x3^3 + 2*x3",
        ],
        &[&[], &[], &[]],
        &[&["1 - x1^4 - x2^4"], &["1 - x2^4 - x3^4"], &["1 - x1^4 - x3^4"]],
    )
}

pub fn cubic_cycle() -> SparsePop {
    pop(
        3,
        &[&[1, 2], &[2, 3], &[1, 3]],
        &["x1", "x2", "x3"],
        &[
            &["(x1 - 1)*(x1 - 2)*(x1 + x2 - 6)", "x1 - x2"],
            &["(x2 - 1)*(x2 - 2)*(x2 + x3 - 6)", "(x2 + x3 - 3)*(x2 - 3)"],
            &["(x3 - 1)*(x3 - 2)*(x1 + x3 - 6)", "x1 - x3"],
        ],
        &[&[], &[], &[]],
    )
}

/// Box-constrained sum where the sparse hierarchy stays below the minimum 1.
/// The bound on the shared variable goes to the first block.
pub fn split_box() -> SparsePop {
    pop(
        3,
        &[&[1, 2], &[2, 3]],
        &["x1^2 + (x1*x2 - 1)^2", "(x2*x3)^2 + (x3 - 1)^2"],
        &[&[], &[]],
        &[&["1 - x1^2", "1 - x2^2"], &["1 - x3^2"]],
    )
}
