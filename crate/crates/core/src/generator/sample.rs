use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Direction, EntityId, PropertyGraph};

/// Induced subgraph of at most `max_entities` entities: one random seed per
/// label first, then breadth-first absorption of neighbours, reseeding at
/// random when the frontier dries up.
pub fn sample_subgraph(g: &PropertyGraph, max_entities: usize, seed: u64) -> PropertyGraph {
    let cap = max_entities.max(1);
    if cap >= g.entity_count() {
        return g.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: BTreeSet<EntityId> = BTreeSet::new();
    let mut queue: VecDeque<EntityId> = VecDeque::new();
    let labels: Vec<&str> = g.entity_labels().collect();
    for l in labels {
        if keep.len() >= cap {
            break;
        }
        if let Some(&e) = g.entities_with_label(l).choose(&mut rng) {
            keep.insert(e);
            queue.push_back(e);
        }
    }
    let all: Vec<EntityId> = g.entity_ids().collect();
    while keep.len() < cap {
        let Some(e) = queue.pop_front() else {
            // Reseed from an entity not taken yet.
            let start = rng.gen_range(0..all.len());
            let next = (0..all.len())
                .map(|k| all[(start + k) % all.len()])
                .find(|x| !keep.contains(x));
            match next {
                Some(x) => {
                    keep.insert(x);
                    queue.push_back(x);
                    continue;
                }
                None => break,
            }
        };
        let mut nbrs: Vec<EntityId> = g
            .incident(e, Direction::Outgoing, None)
            .iter()
            .map(|(_, r)| g.endpoints(*r).1)
            .chain(g.incident(e, Direction::Incoming, None).iter().map(|(_, r)| g.endpoints(*r).0))
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        nbrs.shuffle(&mut rng);
        for x in nbrs {
            if keep.len() >= cap {
                break;
            }
            if keep.insert(x) {
                queue.push_back(x);
            }
        }
    }
    g.induced_subgraph(&keep)
}
