//! Mini-file and subpacket index algebra.
//!
//! Placement splits every file into `C(P, t̄)` equal mini-files, one per
//! `t̄`-subset `Λ ⊆ [P]`, and profile `p` caches exactly the mini-files
//! whose subset contains `p` — a `t̄/P = γ` fraction of the library. During
//! delivery each mini-file is further split into `S` subpackets, where `S`
//! depends on the strategy:
//!
//! * Strategy A: `S_A = β · C(P−t̄−1, Q−t̄−1)`;
//! * Strategy B: `S_B = (η̂t̄ + α) · C(P−t̄−1, Q−t̄−1) · C(Q−2, Q−t̄−2)`.
//!
//! Files are virtual throughout the crate: demands are symmetric and every
//! user wants a distinct file, so only the *indices* `(Λ, q)` matter, never
//! payload bytes. A user attached to profile `p` already holds every
//! subpacket with `p ∈ Λ` and must receive all `(1−γ)·C(P,t̄)·S` others.
//!
//! Subsets use **1-based** profile labels in the sorted order of the active
//! [`crate::model::Association`] (the delivery constructions are defined on
//! length-sorted profiles), kept ascending, and enumerate lexicographically.

use alloc::vec::Vec;

use crate::combin::{binomial, lex_subsets, rank_subset, unrank_subset};
use crate::model::{Association, NetworkConfig, Strategy};

/// Lexicographic index of all `t̄`-subsets of `[P]` — the mini-file
/// catalogue shared by every file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiniFileIndex {
    profiles: usize,
    t_bar: usize,
}

impl MiniFileIndex {
    /// Index over `t̄`-subsets of `{1, …, profiles}`.
    ///
    /// # Panics
    /// If `t_bar > profiles` (placement needs `t̄ ≤ P`).
    pub fn new(profiles: usize, t_bar: usize) -> Self {
        assert!(t_bar <= profiles, "replication degree cannot exceed profile count");
        MiniFileIndex { profiles, t_bar }
    }

    /// Number of profiles `P`.
    pub fn profiles(&self) -> usize {
        self.profiles
    }

    /// Subset size `t̄`.
    pub fn t_bar(&self) -> usize {
        self.t_bar
    }

    /// Number of mini-files per file, `C(P, t̄)`.
    pub fn count(&self) -> u64 {
        binomial(self.profiles, self.t_bar)
    }

    /// Lexicographic rank (0-based) of a sorted 1-based subset.
    pub fn rank(&self, lambda: &[usize]) -> u64 {
        debug_assert!(lambda.windows(2).all(|w| w[0] < w[1]), "subset must be sorted");
        debug_assert!(lambda.iter().all(|&p| (1..=self.profiles).contains(&p)));
        let zero_based: Vec<usize> = lambda.iter().map(|&p| p - 1).collect();
        rank_subset(self.profiles, &zero_based)
    }

    /// Sorted 1-based subset at lexicographic rank `rank`.
    pub fn subset(&self, rank: u64) -> Vec<usize> {
        let mut s = unrank_subset(self.profiles, self.t_bar, rank);
        for p in &mut s {
            *p += 1;
        }
        s
    }

    /// All subsets in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        lex_subsets(self.profiles, self.t_bar).map(|s| s.into_iter().map(|p| p + 1).collect())
    }
}

/// One deliverable unit: subpacket `q` of the mini-file indexed by `Λ`.
///
/// The demanding user (whose file the subpacket belongs to) is carried
/// alongside wherever it is not implied, e.g. in [`crate::scheduler::Stream`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubpacketId {
    /// Mini-file subset, sorted ascending, 1-based sorted-profile labels.
    pub lambda: Vec<usize>,
    /// 1-based subpacket index within the mini-file, `q ∈ [S]`.
    pub q: u32,
}

/// Every mini-file subset stored at profile `p`: all `Λ ∋ p`, in
/// lexicographic order. Size `C(P−1, t̄−1)`.
///
/// ```
/// use dyncache_core::placement::cache_contents;
///
/// assert_eq!(cache_contents(3, 1, 1), vec![vec![1]]);
/// assert_eq!(
///     cache_contents(5, 2, 1),
///     vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![1, 5]],
/// );
/// ```
pub fn cache_contents(profiles: usize, t_bar: usize, p: usize) -> Vec<Vec<usize>> {
    assert!((1..=profiles).contains(&p), "profile out of range");
    MiniFileIndex::new(profiles, t_bar).iter().filter(|lambda| lambda.contains(&p)).collect()
}

/// Per-mini-file subpacket count `S` for the configured strategy.
///
/// Requires a configuration accepted by [`crate::model::validate_config`]
/// (the formulas subtract `t̄ + 1` from `P` and `Q`).
pub fn subpacketization(cfg: &NetworkConfig) -> u64 {
    let t_bar = cfg.t_bar();
    let spread = binomial(cfg.profiles - t_bar - 1, cfg.q - t_bar - 1);
    match cfg.strategy {
        Strategy::A => cfg.beta as u64 * spread,
        Strategy::B => {
            (cfg.eta_hat * t_bar + cfg.alpha) as u64
                * spread
                * binomial(cfg.q - 2, cfg.q - t_bar - 2)
        }
    }
}

/// Everything user `user` still needs: one [`SubpacketId`] per `(Λ, q)`
/// with `Λ ∌ p[user]` and `q ∈ [S]`, grouped by `Λ` in lexicographic order
/// with `q` ascending inside each group. Count `(1−γ)·C(P,t̄)·S`.
pub fn missing_subpackets(
    cfg: &NetworkConfig,
    assoc: &Association,
    user: u32,
) -> Vec<SubpacketId> {
    let p = assoc.profile_of(user);
    let index = MiniFileIndex::new(cfg.profiles, cfg.t_bar());
    let lambdas: Vec<Vec<usize>> =
        index.iter().filter(|lambda| !lambda.contains(&p)).collect();
    if lambdas.is_empty() {
        return Vec::new();
    }
    let s = subpacketization(cfg);
    let mut out = Vec::with_capacity(lambdas.len() * s as usize);
    for lambda in lambdas {
        for q in 1..=s as u32 {
            out.push(SubpacketId { lambda: lambda.clone(), q });
        }
    }
    out
}
