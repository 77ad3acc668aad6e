// Each integration test compiles this module separately and uses only part
// of it, so dead-code analysis is per-consumer noise here.
#![allow(dead_code)]

//! Shared test oracles, independent of the library's evaluation path.
//!
//! The brute-force Tsirelson oracle enumerates admissible families of
//! arbitrary finite sets (not just intervals) over the whole index universe
//! `[1, max]`, and computes the defining iterates level by level until they
//! stabilize. No interval-hull reduction, no support-block DP, no memoized
//! recursion on the fixed point — just the definition, made finite.

use banach_lab_core::vector::{FiniteVector, Rat};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Every admissible family of disjoint separated subsets of `[1, universe]`:
/// a family is a nonempty subset together with a split into consecutive runs
/// (separated sets are exactly runs of the sorted union), subject to
/// `pieces <= min`. Pieces are bitmasks with bit `i` standing for index
/// `i + 1`.
pub fn subset_families(universe: u32) -> Vec<Vec<u32>> {
    assert!(universe <= 16, "oracle universes stay small");
    let mut out = Vec::new();
    for s in 1u32..(1u32 << universe) {
        let elems: Vec<u32> = (0..universe).filter(|b| s & (1 << b) != 0).collect();
        let min_val = elems[0] + 1;
        let gaps = elems.len() - 1;
        for split in 0u32..(1u32 << gaps) {
            let mut pieces = Vec::new();
            let mut cur = 1u32 << elems[0];
            for i in 1..elems.len() {
                if split & (1 << (i - 1)) != 0 {
                    pieces.push(cur);
                    cur = 0;
                }
                cur |= 1 << elems[i];
            }
            pieces.push(cur);
            if pieces.len() as u32 <= min_val {
                out.push(pieces);
            }
        }
    }
    out
}

/// Level tables of the defining iterates for every restriction of `x`:
/// `table[level][mask]` is `||x restricted to mask||_level`.
pub struct BruteTables {
    pub support_mask: u32,
    pub levels: Vec<Vec<Rat>>,
}

impl BruteTables {
    pub fn value(&self, mask: u32) -> &Rat {
        let last = self.levels.last().expect("at least level 0");
        &last[(mask & self.support_mask) as usize]
    }

    pub fn top_value(&self) -> &Rat {
        self.value(self.support_mask)
    }

    pub fn top_iterates(&self, n: usize) -> Vec<Rat> {
        (0..=n)
            .map(|l| {
                let l = l.min(self.levels.len() - 1);
                self.levels[l][self.support_mask as usize].clone()
            })
            .collect()
    }
}

/// Run the level iteration to stabilization. The universe is `[1, max]`
/// where `max` is the largest support index of `x`.
pub fn brute_tables(x: &FiniteVector) -> BruteTables {
    let universe = x.max_index().unwrap_or(1);
    assert!(universe <= 12, "brute force is exponential in the universe");
    let families = subset_families(universe);
    let size = 1usize << universe;
    let mut support_mask = 0u32;
    let mut coord = vec![Rat::zero(); universe as usize];
    for (i, v) in x.entries() {
        support_mask |= 1 << (i - 1);
        coord[(i - 1) as usize] = v.clone();
    }
    // level 0: sup norms per mask
    let mut level0 = vec![Rat::zero(); size];
    for m in 1..size {
        let low = m.trailing_zeros();
        let rest = level0[m & (m - 1)].clone();
        let own = coord[low as usize].abs();
        level0[m] = rest.max(own);
    }
    let half = banach_lab_core::rat(1, 2);
    let mut levels = vec![level0];
    loop {
        let cur = levels.last().expect("nonempty");
        let mut next = cur.clone();
        let mut changed = false;
        for m in 1..size {
            let mask = m as u32 & support_mask;
            if mask != m as u32 {
                // values only depend on the support part; copy below
                continue;
            }
            let mut best = cur[m].clone();
            for family in &families {
                let mut sum = Rat::zero();
                for piece in family {
                    sum += &cur[(piece & mask) as usize];
                }
                let v = sum * &half;
                if v > best {
                    best = v;
                }
            }
            if best != cur[m] {
                changed = true;
            }
            next[m] = best;
        }
        // propagate to non-canonical masks so lookups stay easy
        for m in 1..size {
            let mask = (m as u32 & support_mask) as usize;
            if mask != m {
                next[m] = next[mask].clone();
            }
        }
        levels.push(next);
        if !changed {
            break;
        }
        assert!(
            levels.len() < 40,
            "iterates failed to stabilize, oracle bug"
        );
    }
    BruteTables {
        support_mask,
        levels,
    }
}

pub fn brute_tsirelson(x: &FiniteVector) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    brute_tables(x).top_value().clone()
}

/// Deterministic corpus of random rational vectors.
pub fn random_vectors(
    count: usize,
    max_support: usize,
    max_index: u32,
    seed: u64,
) -> Vec<FiniteVector> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = rng.random_range(1..=max_support);
        let mut indices: Vec<u32> = (1..=max_index).collect();
        // Fisher-Yates prefix
        for i in 0..k.min(indices.len()) {
            let j = rng.random_range(i..indices.len());
            indices.swap(i, j);
        }
        let mut entries = Vec::new();
        for &idx in indices.iter().take(k) {
            let num: i64 = rng.random_range(-8..=8);
            let den: i64 = rng.random_range(1..=4);
            if num != 0 {
                entries.push((idx, banach_lab_core::rat(num, den)));
            }
        }
        if let Ok(v) = FiniteVector::new(entries) {
            if !v.is_zero() {
                out.push(v);
            }
        }
    }
    out
}
