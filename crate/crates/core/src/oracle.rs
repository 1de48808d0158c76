//! Exact minimax solver over aggregate states `(a, b, j)`.
//!
//! A question is fully described, as far as counts go, by how many consistent
//! candidates (`i`) and pennies (`k`) it contains, and every such pair is
//! realized by some subset. The questioner wins from `(a, b, j)` when some
//! `(i, k)` leaves both children winnable with `j - 1` questions.
//!
//! This module shares nothing with the closed-form bounds: it never looks at
//! the `q_1` formula, only at the game tree.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::RwLock;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OracleKey {
    pub a: u32,
    pub b: u32,
    pub j: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    /// Largest `a + b` the solver will explore.
    pub max_candidates: u64,
    /// Largest `j`.
    pub max_questions: u32,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_candidates: 512,
            max_questions: 40,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state ({a},{b},{j}) is beyond the configured limits {limits:?}")]
    Refused {
        a: u64,
        b: u64,
        j: u32,
        limits: OracleLimits,
    },
    #[error("memo file: {0}")]
    Io(#[from] io::Error),
    #[error("memo file is malformed: {0}")]
    Format(&'static str),
}

const MEMO_MAGIC: &[u8; 8] = b"ULAMMEMO";
const MEMO_VERSION: u32 = 1;

/// Memoized solver. Lookups take a shared lock; inserts take it exclusively.
/// Entries are facts about the game, so insertion order never matters.
#[derive(Debug, Default)]
pub struct Oracle {
    limits: OracleLimits,
    memo: RwLock<HashMap<OracleKey, bool>>,
}

impl Oracle {
    pub fn new(limits: OracleLimits) -> Self {
        Self {
            limits,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn limits(&self) -> OracleLimits {
        self.limits
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().expect("memo lock").len()
    }

    fn check(&self, a: u64, b: u64, j: u32) -> Result<(), OracleError> {
        if a + b > self.limits.max_candidates || j > self.limits.max_questions {
            Err(OracleError::Refused {
                a,
                b,
                j,
                limits: self.limits,
            })
        } else {
            Ok(())
        }
    }

    /// Whether the questioner can force `a + b <= 1` within `j` questions.
    pub fn winnable(&self, a: u64, b: u64, j: u32) -> Result<bool, OracleError> {
        self.check(a, b, j)?;
        Ok(self.solve(a as u32, b as u32, j))
    }

    fn solve(&self, a: u32, b: u32, j: u32) -> bool {
        if a + b <= 1 {
            return true;
        }
        if j == 0 {
            return false;
        }
        // Weight above 2^j cannot be won.
        let (a64, b64) = (u64::from(a), u64::from(b));
        let half = 1u64 << (j - 1);
        if (u64::from(j) + 1) * a64 + b64 > 2 * half {
            return false;
        }
        let key = OracleKey { a, b, j };
        if let Some(&known) = self.memo.read().expect("memo lock").get(&key) {
            return known;
        }
        let result = self.search(a64, b64, j, half);
        self.memo.write().expect("memo lock").insert(key, result);
        result
    }

    fn search(&self, a: u64, b: u64, j: u32, half: u64) -> bool {
        let jj = u64::from(j);
        // Asking about (i, k) or its complement gives the same pair of children,
        // so only i <= a / 2 is tried, most balanced first.
        for i in (0..=a / 2).rev() {
            // Yes child (i, k + a - i) and No child (a - i, b - k + i), each
            // with j - 1 questions, must both weigh at most 2^(j-1).
            let yes_fixed = (jj - 1) * i + a;
            let no_fixed = jj * (a - i) + b + i;
            if yes_fixed > half {
                continue;
            }
            let k_hi = (half - yes_fixed).min(b);
            let k_lo = no_fixed.saturating_sub(half);
            if k_lo > k_hi {
                continue;
            }
            let k_max = if 2 * i == a { k_hi.min(b / 2) } else { k_hi };
            for k in k_lo..=k_max {
                let yes = (i, k + a - i);
                let no = (a - i, b - k + i);
                if self.solve(yes.0 as u32, yes.1 as u32, j - 1)
                    && self.solve(no.0 as u32, no.1 as u32, j - 1)
                {
                    return true;
                }
            }
        }
        false
    }

    /// Least `j` with `winnable(n, 0, j)`.
    pub fn q1(&self, n: u64) -> Result<u32, OracleError> {
        self.check(n, 0, 0)?;
        for j in 0..=self.limits.max_questions {
            if self.winnable(n, 0, j)? {
                return Ok(j);
            }
        }
        Err(OracleError::Refused {
            a: n,
            b: 0,
            j: self.limits.max_questions + 1,
            limits: self.limits,
        })
    }

    /// `q1(n)` for `n = 1..=n_max`, optionally in parallel. Results do not depend on the mode.
    pub fn q1_table(&self, n_max: u64, parallel: bool) -> Result<Vec<(u64, u32)>, OracleError> {
        let row = |n: u64| self.q1(n).map(|q| (n, q));
        if parallel {
            (1..=n_max).into_par_iter().map(row).collect()
        } else {
            (1..=n_max).map(row).collect()
        }
    }

    /// Writes the memo as `ULAMMEMO`, version and count, then sorted
    /// `(a, b, j, value)` records: three little-endian `u32` and one byte.
    pub fn save(&self, path: &Path) -> Result<(), OracleError> {
        let memo = self.memo.read().expect("memo lock");
        let mut entries: Vec<_> = memo.iter().map(|(k, v)| (*k, *v)).collect();
        entries.sort_unstable();
        let mut bytes = Vec::with_capacity(20 + entries.len() * 13);
        bytes.extend_from_slice(MEMO_MAGIC);
        bytes.extend_from_slice(&MEMO_VERSION.to_le_bytes());
        bytes.extend_from_slice(&(entries.len() as u64).to_le_bytes());
        for (key, value) in entries {
            for field in [key.a, key.b, key.j] {
                bytes.extend_from_slice(&field.to_le_bytes());
            }
            bytes.push(u8::from(value));
        }
        fs::write(path, bytes)?;
        Ok(())
    }

    /// Merges a memo file written by [`save`](Self::save).
    pub fn load(&self, path: &Path) -> Result<usize, OracleError> {
        let bytes = fs::read(path)?;
        let header = bytes
            .get(..20)
            .ok_or(OracleError::Format("truncated header"))?;
        if &header[..8] != MEMO_MAGIC {
            return Err(OracleError::Format("bad magic"));
        }
        if u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) != MEMO_VERSION {
            return Err(OracleError::Format("unsupported version"));
        }
        let count = u64::from_le_bytes(header[12..20].try_into().expect("8 bytes")) as usize;
        let body = &bytes[20..];
        if body.len() != count * 13 {
            return Err(OracleError::Format("record count does not match length"));
        }
        let word = |chunk: &[u8], at: usize| {
            u32::from_le_bytes(chunk[at..at + 4].try_into().expect("4 bytes"))
        };
        let mut memo = self.memo.write().expect("memo lock");
        for chunk in body.chunks_exact(13) {
            let key = OracleKey {
                a: word(chunk, 0),
                b: word(chunk, 4),
                j: word(chunk, 8),
            };
            let value = match chunk[12] {
                0 => false,
                1 => true,
                _ => return Err(OracleError::Format("value byte must be 0 or 1")),
            };
            memo.insert(key, value);
        }
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Unpruned, unmemoized minimax over every (i, k).
    fn naive(a: u64, b: u64, j: u32) -> bool {
        if a + b <= 1 {
            return true;
        }
        if j == 0 {
            return false;
        }
        (0..=a)
            .any(|i| (0..=b).any(|k| naive(i, k + a - i, j - 1) && naive(a - i, b - k + i, j - 1)))
    }

    #[test]
    fn matches_naive_search_on_small_states() {
        let oracle = Oracle::default();
        for j in 0..=5 {
            for a in 0..=4 {
                for b in 0..=7 {
                    assert_eq!(
                        oracle.winnable(a, b, j).unwrap(),
                        naive(a, b, j),
                        "({a},{b},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn examples() {
        let oracle = Oracle::default();
        assert!(oracle.winnable(1, 0, 0).unwrap());
        assert!(!oracle.winnable(2, 0, 2).unwrap());
        assert!(oracle.winnable(2, 0, 3).unwrap());
        assert!(oracle.winnable(1, 20, 5).unwrap());
        assert!(!oracle.winnable(3, 0, 2).unwrap());
        assert_eq!(oracle.q1(1).unwrap(), 0);
        assert_eq!(oracle.q1(5).unwrap(), 6);
        assert_eq!(oracle.q1(17).unwrap(), 8);
    }

    #[test]
    fn refuses_beyond_limits() {
        let oracle = Oracle::new(OracleLimits {
            max_candidates: 10,
            max_questions: 8,
        });
        assert!(matches!(
            oracle.winnable(11, 0, 3),
            Err(OracleError::Refused { .. })
        ));
        assert!(matches!(
            oracle.winnable(3, 0, 9),
            Err(OracleError::Refused { .. })
        ));
        assert!(matches!(oracle.q1(10), Ok(7)));
    }

    #[test]
    fn parallel_and_serial_agree() {
        let serial = Oracle::default().q1_table(24, false).unwrap();
        let parallel = Oracle::default().q1_table(24, true).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn memo_round_trip() {
        let oracle = Oracle::default();
        oracle.q1(12).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("memo.bin");
        oracle.save(&path).unwrap();
        let fresh = Oracle::default();
        assert_eq!(fresh.load(&path).unwrap(), oracle.memo_len());
        assert_eq!(fresh.memo_len(), oracle.memo_len());
        assert_eq!(fresh.q1(12).unwrap(), oracle.q1(12).unwrap());

        std::fs::write(&path, b"nope").unwrap();
        assert!(matches!(fresh.load(&path), Err(OracleError::Format(_))));
    }
}
