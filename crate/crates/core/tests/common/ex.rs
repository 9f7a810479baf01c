//! Exhaustive column-permutation oracle for execution accuracy.

use cypherkit_core::cypher::{Cell, ResultTable};
use cypherkit_core::metrics::cells_equal;

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

// Greedy removal is exact here because generated cells are either equal or far apart.
fn multiset_eq(a: &[Vec<Cell>], b: &[Vec<Cell>]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut left: Vec<&Vec<Cell>> = b.iter().collect();
    for row in a {
        let hit = left
            .iter()
            .position(|r| r.iter().zip(row).all(|(x, y)| cells_equal(x, y)));
        match hit {
            Some(i) => {
                left.swap_remove(i);
            }
            None => return false,
        }
    }
    true
}

pub fn permutation_oracle(gold: &ResultTable, pred: &ResultTable) -> bool {
    let k = gold.columns.len();
    if k != pred.columns.len() {
        return false;
    }
    permutations(k).into_iter().any(|p| {
        let permuted: Vec<Vec<Cell>> = pred
            .rows
            .iter()
            .map(|r| p.iter().map(|&j| r[j].clone()).collect())
            .collect();
        multiset_eq(&gold.rows, &permuted)
    })
}
