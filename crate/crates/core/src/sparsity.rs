//! Correlative sparsity analysis.
//!
//! A [`SparsityPattern`] is the list of variable blocks the objective and the
//! constraints decompose over. The questions asked here are the ones the
//! hierarchy depends on: is there a block ordering with the running
//! intersection property, is the block family a connected cover, and what are
//! the pairwise overlaps.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::validate_block;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityPattern {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SparsityPattern {
    /// Blocks are 1-based index lists. They are sorted here; duplicate
    /// indices inside a block or indices beyond `n` are rejected.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Format("sparsity pattern has no blocks".into()));
        }
        let mut sorted = Vec::with_capacity(blocks.len());
        for (i, mut b) in blocks.into_iter().enumerate() {
            b.sort_unstable();
            validate_block(&b).map_err(|e| Error::Format(format!("block {}: {e}", i + 1)))?;
            if *b.last().unwrap() > n {
                return Err(Error::Format(format!(
                    "block {} uses variable {} but n = {n}",
                    i + 1,
                    b.last().unwrap()
                )));
            }
            sorted.push(b);
        }
        Ok(Self { n, blocks: sorted })
    }

    /// The single block `[n]`.
    pub fn dense(n: usize) -> Self {
        Self {
            n,
            blocks: vec![(1..=n).collect()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &[usize] {
        &self.blocks[i]
    }
}

/// Sorted intersection of two sorted index lists.
pub fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}

/// Adjacency sets of the correlative sparsity graph on vertices `1..=n`
/// (index 0 unused): `k1 ~ k2` iff both lie in a common block.
pub fn csp_graph(pattern: &SparsityPattern) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); pattern.n + 1];
    let unique: BTreeSet<&Vec<usize>> = pattern.blocks.iter().collect();
    for b in unique {
        for (x, &u) in b.iter().enumerate() {
            for &v in &b[x + 1..] {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
    }
    adj
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RipWitness {
    /// Block `block` (position `position` in the ordering) has its overlap
    /// with all earlier blocks inside block `parent`.
    Contained {
        position: usize,
        block: usize,
        parent: usize,
    },
    /// The spanning forest failed the clique-intersection property at this pair.
    Violation { block: usize, other: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RipReport {
    pub holds: bool,
    /// Block indices (0-based) in running-intersection order, when `holds`.
    pub ordering: Option<Vec<usize>>,
    pub witness: Vec<RipWitness>,
    pub connected_cover: bool,
    /// Connected components of the block-overlap graph.
    pub components: Vec<Vec<usize>>,
}

/// Maximum-weight spanning forest of the block intersection graph. Edges are
/// taken by decreasing weight, ties broken by the lexicographically smallest
/// pair. Returns the forest as adjacency lists.
fn max_weight_forest(blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let m = blocks.len();
    let mut edges = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let w = intersect(&blocks[i], &blocks[j]).len();
            if w > 0 {
                edges.push((w, i, j));
            }
        }
    }
    edges.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut uf = UnionFind::new(m);
    let mut adj = vec![Vec::new(); m];
    for (_, i, j) in edges {
        if uf.union(i, j) {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}

/// Tests the running intersection property: some ordering of the blocks has
/// each block's overlap with the union of its predecessors contained in one
/// predecessor.
pub fn check_rip(pattern: &SparsityPattern) -> RipReport {
    let blocks = &pattern.blocks;
    let m = blocks.len();
    let forest = max_weight_forest(blocks);
    let (connected_cover, components) = connected_cover(pattern);

    // Breadth-first order over each tree, roots in index order.
    let mut ordering = Vec::with_capacity(m);
    let mut parent = vec![usize::MAX; m];
    let mut seen = vec![false; m];
    for root in 0..m {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            ordering.push(u);
            for &v in &forest[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
    }

    // Clique-intersection property: every overlap must survive along the
    // tree path. Checking each node's overlap with its predecessors against
    // its parent is the same condition on this ordering.
    let mut witness = Vec::with_capacity(m);
    let mut union: BTreeSet<usize> = BTreeSet::new();
    let mut holds = true;
    for (pos, &b) in ordering.iter().enumerate() {
        if pos > 0 {
            let earlier: Vec<usize> = union.iter().copied().collect();
            let overlap = intersect(&blocks[b], &earlier);
            let p = if parent[b] == usize::MAX {
                ordering[0]
            } else {
                parent[b]
            };
            if is_subset(&overlap, &blocks[p]) {
                witness.push(RipWitness::Contained {
                    position: pos,
                    block: b,
                    parent: p,
                });
            } else {
                holds = false;
                let other = ordering[..pos]
                    .iter()
                    .copied()
                    .find(|&o| !is_subset(&intersect(&blocks[b], &blocks[o]), &blocks[p]))
                    .unwrap_or(p);
                witness.push(RipWitness::Violation { block: b, other });
            }
        }
        union.extend(blocks[b].iter().copied());
    }

    RipReport {
        holds,
        ordering: holds.then_some(ordering),
        witness: if holds {
            witness
        } else {
            witness
                .into_iter()
                .filter(|w| matches!(w, RipWitness::Violation { .. }))
                .collect()
        },
        connected_cover,
        components,
    }
}

/// Checks that `ordering` satisfies the running intersection property
/// directly from the definition, returning a witness parent per position.
pub fn verify_rip_ordering(blocks: &[Vec<usize>], ordering: &[usize]) -> Option<Vec<usize>> {
    let mut union: Vec<usize> = Vec::new();
    let mut parents = Vec::new();
    for (pos, &b) in ordering.iter().enumerate() {
        if pos > 0 {
            let overlap = intersect(&blocks[b], &union);
            let t = ordering[..pos]
                .iter()
                .copied()
                .find(|&t| is_subset(&overlap, &blocks[t]))?;
            parents.push(t);
        }
        union.extend(blocks[b].iter().copied());
        union.sort_unstable();
        union.dedup();
    }
    Some(parents)
}

/// Block-overlap connectivity: returns whether the overlap graph is
/// connected and the blocks cover `[n]`, together with the components.
pub fn connected_cover(pattern: &SparsityPattern) -> (bool, Vec<Vec<usize>>) {
    let m = pattern.blocks.len();
    let mut uf = UnionFind::new(m);
    for i in 0..m {
        for j in i + 1..m {
            if !intersect(&pattern.blocks[i], &pattern.blocks[j]).is_empty() {
                uf.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..m {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut components: Vec<Vec<usize>> = groups.into_values().collect();
    components.sort();
    let covered: BTreeSet<usize> = pattern.blocks.iter().flatten().copied().collect();
    let covers = covered.len() == pattern.n;
    (components.len() == 1 && covers, components)
}

/// All nonempty pairwise overlaps `(i, j) -> Δ_i ∩ Δ_j` with `i < j` (0-based).
pub fn overlaps(pattern: &SparsityPattern) -> BTreeMap<(usize, usize), Vec<usize>> {
    let mut out = BTreeMap::new();
    let m = pattern.blocks.len();
    for i in 0..m {
        for j in i + 1..m {
            let o = intersect(&pattern.blocks[i], &pattern.blocks[j]);
            if !o.is_empty() {
                out.insert((i, j), o);
            }
        }
    }
    out
}

/// Maximum cardinality search ordering (vertices `1..=n`, visit order).
pub fn maximum_cardinality_search(adj: &[BTreeSet<usize>]) -> Vec<usize> {
    let n = adj.len() - 1;
    let mut weight = vec![0usize; n + 1];
    let mut done = vec![false; n + 1];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (1..=n)
            .filter(|&v| !done[v])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .unwrap();
        done[v] = true;
        order.push(v);
        for &u in &adj[v] {
            if !done[u] {
                weight[u] += 1;
            }
        }
    }
    order
}

/// Chordality test: the reverse of an MCS order is a perfect elimination
/// ordering iff the graph is chordal. On success returns the maximal cliques.
pub fn chordal_maximal_cliques(adj: &[BTreeSet<usize>]) -> Option<Vec<Vec<usize>>> {
    let n = adj.len() - 1;
    let mcs = maximum_cardinality_search(adj);
    let mut rank = vec![0usize; n + 1];
    for (i, &v) in mcs.iter().enumerate() {
        rank[v] = i;
    }
    // Each vertex's earlier-visited neighbours must form a clique.
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for &v in &mcs {
        let earlier: Vec<usize> = adj[v].iter().copied().filter(|&u| rank[u] < rank[v]).collect();
        for (a, &x) in earlier.iter().enumerate() {
            for &y in &earlier[a + 1..] {
                if !adj[x].contains(&y) {
                    return None;
                }
            }
        }
        let mut c = earlier;
        c.push(v);
        c.sort_unstable();
        cliques.push(c);
    }
    let mut maximal: Vec<Vec<usize>> = Vec::new();
    for c in &cliques {
        if !cliques.iter().any(|d| d.len() > c.len() && is_subset(c, d)) && !maximal.contains(c) {
            maximal.push(c.clone());
        }
    }
    maximal.sort();
    Some(maximal)
}

/// Graph-side characterization of the running intersection property: the
/// sparsity graph is chordal and each of its maximal cliques lies inside
/// some block.
pub fn rip_via_chordality(pattern: &SparsityPattern) -> bool {
    let adj = csp_graph(pattern);
    match chordal_maximal_cliques(&adj) {
        None => false,
        Some(cliques) => cliques.iter().all(|c| {
            // isolated uncovered vertices are not constrained by any block
            (c.len() == 1 && !pattern.blocks.iter().any(|b| b.contains(&c[0])))
                || pattern.blocks.iter().any(|b| is_subset(c, b))
        }),
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}
