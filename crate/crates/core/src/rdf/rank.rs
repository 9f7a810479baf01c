use alloc::vec::Vec;

use super::statement::{Rank, Statement};

/// Rank filtering for one group of statements. Time-sensitive groups lose only
/// deprecated statements; other groups keep every statement at the best rank present.
pub fn select_by_rank<'a>(group: &[&'a Statement], time_sensitive: bool) -> Vec<&'a Statement> {
    let live = group.iter().copied().filter(|s| s.rank != Rank::Deprecated);
    if time_sensitive {
        return live.collect();
    }
    let best = group
        .iter()
        .map(|s| s.rank)
        .filter(|r| *r != Rank::Deprecated)
        .max();
    match best {
        Some(b) => live.filter(|s| s.rank == b).collect(),
        None => Vec::new(),
    }
}
