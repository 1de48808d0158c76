//! Compact storage for sets of live candidates.
//!
//! Bit questions over `1..=N` carve the search space into subcubes of the
//! binary codes `id - 1`, so after `k` bit answers only `k + 1` blocks are
//! live no matter how large `N` is. Any other question that cuts a cube
//! partially materializes the cube into single ids.

use crate::game::{CandidateId, Question};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Block {
    /// Codes `c < limit` with `c & mask == pattern`; the candidate id is `c + 1`.
    Cube {
        mask: u64,
        pattern: u64,
    },
    Single(CandidateId),
}

/// Number of codes `c` in `[0, limit)` with `c & mask == pattern`.
pub(crate) fn count_below(mask: u64, pattern: u64, limit: u64) -> u64 {
    let mut total = 0u64;
    for bit in (0..64).rev() {
        if (limit >> bit) & 1 == 0 {
            continue;
        }
        let above = if bit == 63 { 0 } else { !0u64 << (bit + 1) };
        if (limit ^ pattern) & mask & above != 0 {
            continue;
        }
        let here = 1u64 << bit;
        if mask & here != 0 && pattern & here != 0 {
            continue;
        }
        let below = here - 1;
        let free = bit - (mask & below).count_ones();
        total += 1u64 << free;
    }
    total
}

impl Block {
    /// Members with id `<= cap`; cubes are additionally bounded by the universe.
    pub(crate) fn count(&self, universe: u64, cap: u64) -> u64 {
        match *self {
            Block::Cube { mask, pattern } => count_below(mask, pattern, universe.min(cap)),
            Block::Single(id) => u64::from(id <= cap),
        }
    }

    pub(crate) fn contains(&self, universe: u64, id: CandidateId) -> bool {
        match *self {
            Block::Cube { mask, pattern } => {
                id >= 1 && id <= universe && (id - 1) & mask == pattern
            }
            Block::Single(s) => s == id,
        }
    }

    /// Ascending member ids.
    pub(crate) fn ids(&self, universe: u64) -> Vec<CandidateId> {
        match *self {
            Block::Single(id) => vec![id],
            Block::Cube { mask, pattern } => {
                let span = if universe <= 1 {
                    0
                } else {
                    64 - (universe - 1).leading_zeros()
                };
                let low = if span >= 64 {
                    !0u64
                } else {
                    (1u64 << span) - 1
                };
                let free = !mask & low;
                let mut out = Vec::new();
                let mut sub = 0u64;
                loop {
                    let code = pattern | sub;
                    if code < universe {
                        out.push(code + 1);
                    }
                    if sub == free {
                        break;
                    }
                    sub = sub.wrapping_sub(free) & free;
                }
                out
            }
        }
    }

    /// Members of `question` inside this block, restricted to ids `<= cap`.
    /// Bit questions are not handled here; they always split cubes exactly.
    pub(crate) fn count_in(&self, question: &Question, universe: u64, cap: u64) -> u64 {
        match *self {
            Block::Single(id) => u64::from(id <= cap && question.contains(universe, id)),
            Block::Cube { mask, pattern } => {
                let top = universe.min(cap);
                match question {
                    Question::Bit(bit) => {
                        let here = 1u64 << bit;
                        if mask & here != 0 {
                            if pattern & here != 0 {
                                count_below(mask, pattern, top)
                            } else {
                                0
                            }
                        } else {
                            count_below(mask | here, pattern | here, top)
                        }
                    }
                    Question::Range { lo, hi } => {
                        let upper = (*hi).min(top);
                        let lower = (*lo - 1).min(upper);
                        count_below(mask, pattern, upper) - count_below(mask, pattern, lower)
                    }
                    Question::Set(members) => members
                        .iter()
                        .filter(|&&id| id <= top && (id - 1) & mask == pattern)
                        .count() as u64,
                }
            }
        }
    }

    /// Splits into the parts inside and outside `question`.
    pub(crate) fn split(&self, question: &Question, universe: u64) -> (Vec<Block>, Vec<Block>) {
        let nonempty = |b: &Block| b.count(universe, u64::MAX) > 0;
        match (*self, question) {
            (Block::Single(id), q) => {
                if q.contains(universe, id) {
                    (vec![*self], vec![])
                } else {
                    (vec![], vec![*self])
                }
            }
            (Block::Cube { mask, pattern }, Question::Bit(bit)) => {
                let here = 1u64 << bit;
                if mask & here != 0 {
                    if pattern & here != 0 {
                        (vec![*self], vec![])
                    } else {
                        (vec![], vec![*self])
                    }
                } else {
                    let inside = Block::Cube {
                        mask: mask | here,
                        pattern: pattern | here,
                    };
                    let outside = Block::Cube {
                        mask: mask | here,
                        pattern,
                    };
                    (
                        [inside].into_iter().filter(nonempty).collect(),
                        [outside].into_iter().filter(nonempty).collect(),
                    )
                }
            }
            (cube, q) => {
                let size = cube.count(universe, u64::MAX);
                let hit = cube.count_in(q, universe, u64::MAX);
                if hit == 0 {
                    (vec![], vec![cube])
                } else if hit == size {
                    (vec![cube], vec![])
                } else {
                    cube.ids(universe)
                        .into_iter()
                        .map(Block::Single)
                        .partition(|b| matches!(b, Block::Single(id) if q.contains(universe, *id)))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(mask: u64, pattern: u64, limit: u64) -> u64 {
        (0..limit).filter(|c| c & mask == pattern).count() as u64
    }

    #[test]
    fn count_below_matches_enumeration() {
        for limit in 0..70u64 {
            for mask in 0..16u64 {
                for pattern in 0..16u64 {
                    if pattern & !mask != 0 {
                        continue;
                    }
                    assert_eq!(
                        count_below(mask, pattern, limit),
                        brute(mask, pattern, limit),
                        "{mask} {pattern} {limit}"
                    );
                }
            }
        }
    }

    #[test]
    fn cube_ids_ascending_and_bounded() {
        let cube = Block::Cube {
            mask: 0b10,
            pattern: 0b10,
        };
        assert_eq!(cube.ids(7), vec![3, 4, 7]);
        assert_eq!(cube.count(7, u64::MAX), 3);
        assert_eq!(cube.count(7, 4), 2);
    }

    #[test]
    fn partial_range_materializes() {
        let cube = Block::Cube {
            mask: 0,
            pattern: 0,
        };
        let (inside, outside) = cube.split(&Question::Range { lo: 2, hi: 3 }, 4);
        assert_eq!(inside, vec![Block::Single(2), Block::Single(3)]);
        assert_eq!(outside, vec![Block::Single(1), Block::Single(4)]);
    }
}
