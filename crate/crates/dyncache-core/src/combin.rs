//! Combinatorial kernel shared by placement, scheduling, and analytics.
//!
//! Everything here is exact integer arithmetic:
//!
//! * binomial coefficients with overflow checks,
//! * the lexicographic bijection between k-subsets of `{0, …, n-1}` and
//!   ranks `0 … C(n,k)-1`,
//! * an iterator over all k-subsets in lexicographic order, and
//! * `mod1`, the 1-based circular index used by the cyclic window
//!   constructions (`mod1(c, c) = c`, `mod1(d + c, c) = mod1(d, c)`).
//!
//! Subsets are always represented as strictly increasing position vectors.
//! Callers that enumerate subsets of an arbitrary ordered ground list (for
//! example profile sequences sorted by served-user count) unrank positions
//! here and map them onto their own list.

use alloc::vec::Vec;

/// Binomial coefficient `C(n, k)` as an exact `u64`.
///
/// Returns 0 when `k > n`. Panics on overflow, which cannot occur for the
/// ground-set sizes used in this crate (`n` at most a few dozen).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // Multiply before dividing; the division is exact at every step
        // because C(n-k+i, i) is an integer.
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    u64::try_from(acc).expect("binomial coefficient exceeds u64")
}

/// 1-based circular index: maps `x ≥ 1` into `1..=c`.
///
/// This is the wrap-around convention used by the cyclic window and shift
/// constructions: `mod1(c, c) = c` and `mod1(d + c, c) = mod1(d, c)`.
pub fn mod1(x: usize, c: usize) -> usize {
    debug_assert!(x >= 1 && c >= 1);
    (x - 1) % c + 1
}

/// Lexicographic rank of a strictly increasing k-subset of `{0, …, n-1}`.
///
/// Rank 0 is `{0, 1, …, k-1}`; the last rank `C(n,k)-1` is
/// `{n-k, …, n-1}`. Inverse of [`unrank_subset`].
pub fn rank_subset(n: usize, subset: &[usize]) -> u64 {
    debug_assert!(subset.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(subset.last().is_none_or(|&last| last < n));
    let k = subset.len();
    let mut rank = 0u64;
    let mut prev = 0usize;
    for (i, &c) in subset.iter().enumerate() {
        for skipped in prev..c {
            rank += binomial(n - skipped - 1, k - i - 1);
        }
        prev = c + 1;
    }
    rank
}

/// Lexicographically `rank`-th k-subset of `{0, …, n-1}`.
///
/// Inverse of [`rank_subset`]. Panics if `rank ≥ C(n, k)`.
pub fn unrank_subset(n: usize, k: usize, mut rank: u64) -> Vec<usize> {
    debug_assert!(rank < binomial(n, k), "subset rank out of range");
    let mut subset = Vec::with_capacity(k);
    let mut candidate = 0usize;
    for slot in 0..k {
        loop {
            let with_candidate = binomial(n - candidate - 1, k - slot - 1);
            if with_candidate <= rank {
                rank -= with_candidate;
                candidate += 1;
            } else {
                subset.push(candidate);
                candidate += 1;
                break;
            }
        }
    }
    subset
}

/// Iterator over all k-subsets of `{0, …, n-1}` in lexicographic order.
pub fn lex_subsets(n: usize, k: usize) -> LexSubsets {
    LexSubsets { n, k, next: (k <= n).then(|| (0..k).collect()) }
}

/// See [`lex_subsets`].
#[derive(Debug, Clone)]
pub struct LexSubsets {
    n: usize,
    k: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for LexSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        // Standard successor: bump the rightmost element that still has
        // head-room, then reset everything to its right.
        let mut succ = current.clone();
        let mut i = self.k;
        while i > 0 {
            i -= 1;
            if succ[i] < self.n - (self.k - i) {
                succ[i] += 1;
                for j in i + 1..self.k {
                    succ[j] = succ[j - 1] + 1;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(current)
    }
}
