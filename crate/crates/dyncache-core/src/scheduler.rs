//! Delivery scheduling: the two multicast constructions, interference-free
//! splitting, and the unicast fallback.
//!
//! Content delivery runs in two consecutive steps. The *coded-caching* (CC)
//! step serves the `K_M` users inside the service cap with multicast
//! transmissions built from either strategy:
//!
//! * **Strategy A** — the elevation process turns each profile's served set
//!   `V_p` into `η̂` sliding windows (`φ_p = max(β, δ_p)` populated ones),
//!   then a *transmission triple* `(r, c, l)` picks `Q` profiles
//!   `N = {r} ∪ M_r(l)` and serves the `c`-th window of each. Every served
//!   user `k` gets one subpacket per mini-file subset `Λ ⊂ N` with
//!   `Λ ∌ p[k]`, and the precoder for stream `(k, Λ)` must vanish at
//!   `G_k^Λ` — the users of the `N∖Λ` windows other than `k` (everyone
//!   else cancels the stream from cache).
//! * **Strategy B** — a *transmission quintuple* `(r, c, l, m, s)` serves a
//!   cyclic `θ`-window `E_r^m` of profile `r` plus `Q − 1` full windows:
//!   the profiles `F = {δ̄_c} ∪ I_c^r(l)` are drawn from `[P]∖{r}` sorted
//!   by non-increasing `δ`, every `⌊α/η̂⌋`-subset `B(n)` of `F` forms a
//!   merge group carrying mini-file `Λ(n) = F∖B(n)`, and the window users
//!   rotate through the groups with shift `s`. Stream `(k, Λ(n))` must
//!   vanish at `H_k^Λ` — the real `E`-users plus the `V_p` with
//!   `p ∈ B(n)`, minus `k`.
//!
//! Both constructions are *interference-free within a transmission*: the
//! raw triple/quintuple is split into `ν₂ = C(Q−1, Q−t̄−1)` (Strategy A)
//! or `ν₁ = C(Q−2, Q−t̄−2)` (Strategy B) sub-transmissions in which every
//! served user has exactly one stream, so no receiver ever needs successive
//! interference cancellation. Subpacket indices `q` are drawn from
//! per-`(user, Λ)` counters that advance sequentially, which guarantees no
//! subpacket is ever sent twice.
//!
//! The *unicast* (UC) step then serves the `K_U` overflow users (and any
//! rerouted subpackets): each round sorts users by remaining demand and
//! sends one subpacket to each of the first `min(α, ·)` of them.
//!
//! Scheduling is single-threaded and fully deterministic: identical inputs
//! produce identical schedules, byte for byte.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::combin::{lex_subsets, mod1, unrank_subset};
use crate::model::{validate_config, Association, ConfigError, NetworkConfig, Strategy};
use crate::placement::{missing_subpackets, subpacketization, MiniFileIndex, SubpacketId};

// --------------------------------------------------------------------------
// Schedule data model
// --------------------------------------------------------------------------

/// One precoded data stream inside a transmission.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stream {
    /// Receiving user (1-based; never a phantom).
    pub user: u32,
    /// Mini-file subset of the carried subpacket, sorted ascending.
    pub lambda: Vec<usize>,
    /// Subpacket index within the mini-file, `q ∈ [S]`.
    pub q: u32,
    /// Users whose channels the precoder must null, sorted ascending. Every
    /// co-served user outside this set holds `lambda` in its cache and
    /// cancels the stream without spatial help.
    pub nulling: Vec<u32>,
}

/// Which delivery step (and construction) produced a transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TxKind {
    /// Strategy A multicast sub-transmission.
    CcA,
    /// Strategy B multicast sub-transmission.
    CcB,
    /// Unicast round.
    Uc,
}

impl TxKind {
    /// Stable textual name used in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            TxKind::CcA => "CC_A",
            TxKind::CcB => "CC_B",
            TxKind::Uc => "UC",
        }
    }
}

/// Where a transmission came from, in the construction's own coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Strategy A triple: leader `r`, window `c`, companion-set index `l`.
    TripleA { r: usize, c: usize, l: u64 },
    /// Strategy B quintuple: leader `r`, position `c`, tail-set index `l`,
    /// window shift `m`, group shift `s`.
    QuintupleB { r: usize, c: usize, l: u64, m: usize, s: usize },
    /// Unicast round number (1-based).
    UcRound { round: u64 },
}

impl Origin {
    /// Compact `-`-joined label used in CSV output.
    pub fn label(&self) -> String {
        match *self {
            Origin::TripleA { r, c, l } => format!("{r}-{c}-{l}"),
            Origin::QuintupleB { r, c, l, m, s } => format!("{r}-{c}-{l}-{m}-{s}"),
            Origin::UcRound { round } => format!("{round}"),
        }
    }
}

/// One time slot: a set of concurrently precoded streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub kind: TxKind,
    pub origin: Origin,
    /// 1-based index within the interference-free split of the origin
    /// (`j ∈ [ν₂]` for Strategy A, `j ∈ [ν₁]` for Strategy B, 1 for UC).
    pub sub_index: u32,
    /// Streams in canonical emission order.
    pub streams: Vec<Stream>,
    /// Served users, sorted ascending. In CC transmissions every served
    /// user has exactly one stream, so this is `streams` re-sorted.
    pub served: Vec<u32>,
}

/// A complete delivery schedule plus its counting summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    /// CC transmissions first (enumeration order), then UC rounds.
    pub transmissions: Vec<Transmission>,
    /// Subpackets delivered by CC transmissions (total streams).
    pub j_m: u64,
    /// Number of CC transmissions.
    pub t_m: u64,
    /// Subpackets delivered by UC rounds.
    pub j_u: u64,
    /// Number of UC rounds.
    pub t_u: u64,
    /// Subpackets rerouted from the CC step into the UC queue, in reroute
    /// order: efficient-multicast drops first, then any per-`(user, Λ)`
    /// delivery shortfalls. Empty under the default options.
    pub residual: Vec<(u32, SubpacketId)>,
}

impl Schedule {
    /// Counted degrees of freedom numerator/denominator inputs as a tuple
    /// `(J_M + J_U, T_M + T_U)`.
    pub fn totals(&self) -> (u64, u64) {
        (self.j_m + self.j_u, self.t_m + self.t_u)
    }

    /// Dump the schedule as CSV, one row per stream:
    /// `tx_index,kind,origin,sub_index,user,lambda,q,nulling_set` with
    /// `lambda` `-`-joined and `nulling_set` `;`-joined.
    pub fn to_csv(&self) -> String {
        use core::fmt::Write as _;
        let mut out = String::from("tx_index,kind,origin,sub_index,user,lambda,q,nulling_set\n");
        for (tx_index, tx) in self.transmissions.iter().enumerate() {
            for stream in &tx.streams {
                let lambda = join(stream.lambda.iter(), "-");
                let nulling = join(stream.nulling.iter(), ";");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    tx_index,
                    tx.kind.name(),
                    tx.origin.label(),
                    tx.sub_index,
                    stream.user,
                    lambda,
                    stream.q,
                    nulling,
                );
            }
        }
        out
    }
}

fn join<T: core::fmt::Display>(items: impl Iterator<Item = T>, sep: &str) -> String {
    use core::fmt::Write as _;
    let mut out = String::new();
    for (i, item) in items.enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        let _ = write!(out, "{item}");
    }
    out
}

/// Knobs for [`full_schedule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SchedulerOptions {
    /// Drop CC transmissions serving fewer than `α` users and reroute their
    /// subpackets to the UC step, guaranteeing full spatial multiplexing in
    /// every remaining CC transmission (at the cost of a longer UC step).
    pub efficient_multicast: bool,
}

/// Why scheduling failed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    /// The configuration does not satisfy the design constraints.
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    /// A `(user, Λ)` counter was asked for more than `S` subpackets — the
    /// constructions deliver exactly `S` per pair, so this signals a bug
    /// rather than an input condition.
    #[error("subpacket counter exhausted for user {user}, mini-file {lambda:?}")]
    CounterExhausted { user: u32, lambda: Vec<usize> },
}

/// Sequential per-`(user, Λ)` subpacket counters: each call hands out the
/// next `q` so no subpacket is ever scheduled twice.
#[derive(Debug, Clone)]
pub struct QCounter {
    index: MiniFileIndex,
    limit: u32,
    counts: BTreeMap<(u32, u64), u32>,
}

impl QCounter {
    /// Counters for a validated configuration (`S` from the strategy).
    pub fn new(cfg: &NetworkConfig) -> Self {
        QCounter {
            index: MiniFileIndex::new(cfg.profiles, cfg.t_bar()),
            limit: subpacketization(cfg) as u32,
            counts: BTreeMap::new(),
        }
    }

    /// Next subpacket index for `(user, lambda)`, starting at 1.
    pub fn next(&mut self, user: u32, lambda: &[usize]) -> Result<u32, ScheduleError> {
        let rank = self.index.rank(lambda);
        let count = self.counts.entry((user, rank)).or_insert(0);
        *count += 1;
        if *count > self.limit {
            return Err(ScheduleError::CounterExhausted { user, lambda: lambda.to_vec() });
        }
        Ok(*count)
    }

    /// Subpackets handed out so far for `(user, lambda)`.
    pub fn issued(&self, user: u32, lambda: &[usize]) -> u32 {
        self.counts.get(&(user, self.index.rank(lambda))).copied().unwrap_or(0)
    }
}

// --------------------------------------------------------------------------
// Strategy A: elevation, triples, transmission build
// --------------------------------------------------------------------------

/// Sliding-window elevation: for each sorted profile `p`, `η̂` windows over
/// `V_p` — indexed `[profile − 1][window − 1]`, each a list of user ids.
///
/// The first `φ_p = max(β, δ_p)` windows are populated: `δ_p` circular
/// `β`-windows when `δ_p > β`, otherwise `β` copies of `V_p`; the remaining
/// `η̂ − φ_p` windows are empty.
pub fn elevate_a(cfg: &NetworkConfig, assoc: &Association) -> Vec<Vec<Vec<u32>>> {
    let mut all = Vec::with_capacity(assoc.profile_count());
    for p in 1..=assoc.profile_count() {
        let v: Vec<u32> = assoc.served(p).collect();
        let delta = v.len();
        let mut windows: Vec<Vec<u32>> = if delta > cfg.beta {
            (1..=delta)
                .map(|j| (1..=cfg.beta).map(|i| v[mod1(i + j - 1, delta) - 1]).collect())
                .collect()
        } else {
            (0..cfg.beta).map(|_| v.clone()).collect()
        };
        while windows.len() < cfg.eta_hat {
            windows.push(Vec::new());
        }
        all.push(windows);
    }
    all
}

/// A Strategy A transmission triple. `silent` marks leaders with `δ_r = 0`,
/// where nothing is sent (and nothing is lost: profiles after an empty one
/// are empty too, lengths being sorted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub r: usize,
    pub c: usize,
    pub l: u64,
    pub silent: bool,
}

/// All transmission triples `(r, c, l)` with `r ∈ [P−Q+1]`, `c ∈ [φ_r]`,
/// `l ∈ [C(P−r, Q−1)]`, in nested ascending order.
pub fn enumerate_triples(cfg: &NetworkConfig, assoc: &Association) -> Vec<Triple> {
    let p_total = cfg.profiles;
    let mut triples = Vec::new();
    for r in 1..=p_total - cfg.q + 1 {
        let silent = assoc.delta[r - 1] == 0;
        let companions = crate::combin::binomial(p_total - r, cfg.q - 1);
        for c in 1..=assoc.phi[r - 1] {
            for l in 1..=companions {
                triples.push(Triple { r, c, l, silent });
            }
        }
    }
    triples
}

/// The `Q` profiles of a triple: leader `r` plus the `l`-th lexicographic
/// `(Q−1)`-subset of `[r+1 : P]`, ascending.
fn triple_profiles(cfg: &NetworkConfig, triple: &Triple) -> Vec<usize> {
    let mut n = vec![triple.r];
    let companions =
        unrank_subset(cfg.profiles - triple.r, cfg.q - 1, triple.l - 1);
    n.extend(companions.into_iter().map(|z| z + triple.r + 1));
    n
}

/// Build the `ν₂` interference-free sub-transmissions of one Strategy A
/// triple. Returns an empty list for silent triples.
///
/// Stream `(k, Λ)` exists for every served user `k` and every `Λ ⊂ N` with
/// `|Λ| = t̄` and `Λ ∌ p[k]`; the `j`-th such `Λ` (lexicographic) lands in
/// sub-transmission `j`, so each user appears exactly once per
/// sub-transmission. The nulling set is `G_k^Λ`: all users of the `N∖Λ`
/// windows except `k` itself.
pub fn build_tx_a(
    cfg: &NetworkConfig,
    assoc: &Association,
    windows: &[Vec<Vec<u32>>],
    triple: &Triple,
    counter: &mut QCounter,
) -> Result<Vec<Transmission>, ScheduleError> {
    if triple.silent {
        return Ok(Vec::new());
    }
    let t_bar = cfg.t_bar();
    let n = triple_profiles(cfg, triple);
    let lambdas: Vec<Vec<usize>> = lex_subsets(n.len(), t_bar)
        .map(|pos| pos.into_iter().map(|i| n[i]).collect())
        .collect();

    // j_index[(p, li)] = how many earlier lambdas also exclude p, i.e. the
    // sub-transmission a profile-p stream of lambda li belongs to.
    let mut j_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &p in &n {
        let mut j = 0;
        for (li, lambda) in lambdas.iter().enumerate() {
            if !lambda.contains(&p) {
                j_index.insert((p, li), j);
                j += 1;
            }
        }
    }

    let nu2 = assoc.nu2 as usize;
    let mut buckets: Vec<Vec<Stream>> = vec![Vec::new(); nu2];
    for (li, lambda) in lambdas.iter().enumerate() {
        // G base: users of every window outside lambda (ascending profiles,
        // window order), sorted once per lambda.
        let mut g_base: Vec<u32> = Vec::new();
        for &p in &n {
            if !lambda.contains(&p) {
                g_base.extend(&windows[p - 1][triple.c - 1]);
            }
        }
        g_base.sort_unstable();
        for &p in &n {
            if lambda.contains(&p) {
                continue;
            }
            let j = j_index[&(p, li)];
            for &user in &windows[p - 1][triple.c - 1] {
                let q = counter.next(user, lambda)?;
                let nulling: Vec<u32> =
                    g_base.iter().copied().filter(|&u| u != user).collect();
                buckets[j].push(Stream { user, lambda: lambda.clone(), q, nulling });
            }
        }
    }

    let origin = Origin::TripleA { r: triple.r, c: triple.c, l: triple.l };
    Ok(assemble(TxKind::CcA, origin, buckets))
}

// --------------------------------------------------------------------------
// Strategy B: quintuples, transmission build
// --------------------------------------------------------------------------

/// A Strategy B transmission quintuple. `active` is the indicator `I⁺`:
/// inactive quintuples (`E_r^m` all phantom *and* the profile at position
/// `c` empty — hence every selected profile empty) send nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quintuple {
    pub r: usize,
    pub c: usize,
    pub l: u64,
    pub m: usize,
    pub s: usize,
    pub active: bool,
}

/// `[P]∖{r}` sorted by non-increasing `δ`, ties by ascending index. Profile
/// lengths are already sorted, so this is simply the ascending complement.
fn pbar(assoc: &Association, r: usize) -> Vec<usize> {
    (1..=assoc.profile_count()).filter(|&p| p != r).collect()
}

/// Real users of the cyclic window `E_r^m`: positions
/// `mod1(m + i, η̂), i ∈ [0, θ)` of `Y_r`, keeping construction order and
/// dropping phantom positions beyond `δ_r`. Shared with the analytics
/// module so the closed-form transmission count and the scheduler agree on
/// window emptiness by construction.
pub(crate) fn e_window_real(
    cfg: &NetworkConfig,
    assoc: &Association,
    r: usize,
    m: usize,
) -> Vec<u32> {
    let v: Vec<u32> = assoc.served(r).collect();
    (0..assoc.theta)
        .filter_map(|i| {
            let pos = mod1(m + i, cfg.eta_hat);
            (pos <= v.len()).then(|| v[pos - 1])
        })
        .collect()
}

/// All transmission quintuples `(r, c, l, m, s)` with `r ∈ [P]`,
/// `c ∈ [P−Q+1]`, `l ∈ [C(P−c−1, Q−2)]`, `m ∈ [η̂]`, `s ∈ [ν₂]`, in nested
/// ascending order.
pub fn enumerate_quintuples(cfg: &NetworkConfig, assoc: &Association) -> Vec<Quintuple> {
    let p_total = cfg.profiles;
    let nu2 = assoc.nu2 as usize;
    let mut quintuples = Vec::new();
    for r in 1..=p_total {
        let pbar_r = pbar(assoc, r);
        for c in 1..=p_total - cfg.q + 1 {
            let dbar_empty = assoc.delta[pbar_r[c - 1] - 1] == 0;
            let tails = crate::combin::binomial(p_total - c - 1, cfg.q - 2);
            for l in 1..=tails {
                for m in 1..=cfg.eta_hat {
                    let e_empty = e_window_real(cfg, assoc, r, m).is_empty();
                    let active = !(e_empty && dbar_empty);
                    for s in 1..=nu2 {
                        quintuples.push(Quintuple { r, c, l, m, s, active });
                    }
                }
            }
        }
    }
    quintuples
}

/// Build the `ν₁` interference-free sub-transmissions of one Strategy B
/// quintuple. Returns an empty list for inactive quintuples.
///
/// Group `n ∈ [ν₂]` serves the window users (all of them, whenever the
/// shifted indicator `mod1(n + s − 1, ν₂) ≤ ν₁` holds) together with `V_p`
/// for every `p ∈ B(n)`, each with mini-file `Λ(n) = F ∖ B(n)`. Every user
/// belongs to exactly `ν₁` groups; its `j`-th group (ascending `n`) lands
/// in sub-transmission `j`. The nulling set is `H_k^Λ`: the real window
/// users plus the `V_p`, `p ∈ B(n)`, minus `k` — everyone else in the
/// quintuple cancels the stream from cache.
pub fn build_tx_b(
    cfg: &NetworkConfig,
    assoc: &Association,
    quintuple: &Quintuple,
    counter: &mut QCounter,
) -> Result<Vec<Transmission>, ScheduleError> {
    if !quintuple.active {
        return Ok(Vec::new());
    }
    let nu1 = assoc.nu1 as usize;
    let nu2 = assoc.nu2 as usize;
    let floor = cfg.alpha / cfg.eta_hat;

    let e_real = e_window_real(cfg, assoc, quintuple.r, quintuple.m);
    let pbar_r = pbar(assoc, quintuple.r);
    // F: profile at position c, then the l-th (Q−2)-subset of the tail
    // positions — ascending positions, hence ascending profile labels.
    let mut f_profiles = vec![pbar_r[quintuple.c - 1]];
    let tail_len = pbar_r.len() - quintuple.c;
    let picked = unrank_subset(tail_len, cfg.q - 2, quintuple.l - 1);
    f_profiles.extend(picked.into_iter().map(|z| pbar_r[quintuple.c + z]));

    let b_sets: Vec<Vec<usize>> = lex_subsets(f_profiles.len(), floor).collect();
    debug_assert_eq!(b_sets.len(), nu2);

    let mut buckets: Vec<Vec<Stream>> = vec![Vec::new(); nu1];
    let mut occurrence: BTreeMap<u32, usize> = BTreeMap::new();
    for (n0, b_positions) in b_sets.iter().enumerate() {
        let n = n0 + 1;
        let b_profiles: Vec<usize> = b_positions.iter().map(|&i| f_profiles[i]).collect();
        let lambda: Vec<usize> = f_profiles
            .iter()
            .copied()
            .filter(|p| !b_profiles.contains(p))
            .collect();
        let window_in = mod1(n + quintuple.s - 1, nu2) <= nu1;

        // Group members in emission order: window users first, then the
        // full windows ascending by profile.
        let mut members: Vec<u32> = Vec::new();
        if window_in {
            members.extend(&e_real);
        }
        for &p in &b_profiles {
            members.extend(assoc.served(p));
        }
        if members.is_empty() {
            continue;
        }
        let mut h_base: Vec<u32> = e_real.clone();
        for &p in &b_profiles {
            h_base.extend(assoc.served(p));
        }
        h_base.sort_unstable();

        for &user in &members {
            let q = counter.next(user, &lambda)?;
            let nulling: Vec<u32> =
                h_base.iter().copied().filter(|&u| u != user).collect();
            let j = occurrence.entry(user).or_insert(0);
            buckets[*j].push(Stream { user, lambda: lambda.clone(), q, nulling });
            *j += 1;
        }
    }

    let origin = Origin::QuintupleB {
        r: quintuple.r,
        c: quintuple.c,
        l: quintuple.l,
        m: quintuple.m,
        s: quintuple.s,
    };
    Ok(assemble(TxKind::CcB, origin, buckets))
}

/// Turn per-sub-transmission stream buckets into [`Transmission`]s,
/// dropping any empty bucket (possible only for degenerate inputs).
fn assemble(kind: TxKind, origin: Origin, buckets: Vec<Vec<Stream>>) -> Vec<Transmission> {
    buckets
        .into_iter()
        .enumerate()
        .filter(|(_, streams)| !streams.is_empty())
        .map(|(j, streams)| {
            let mut served: Vec<u32> = streams.iter().map(|s| s.user).collect();
            served.sort_unstable();
            debug_assert!(served.windows(2).all(|w| w[0] < w[1]), "one stream per user");
            Transmission { kind, origin, sub_index: j as u32 + 1, streams, served }
        })
        .collect()
}

// --------------------------------------------------------------------------
// Unicast fallback
// --------------------------------------------------------------------------

/// Greedy unicast delivery: each round serves one subpacket to each of the
/// first `min(α, remaining)` users, sorted by remaining demand (descending,
/// ties by ascending id). Every stream's nulling set is the round's other
/// served users — none of them caches any part of another user's stream.
pub fn uc_schedule(
    missing: &BTreeMap<u32, Vec<SubpacketId>>,
    alpha: usize,
) -> Vec<Transmission> {
    let mut cursor: BTreeMap<u32, usize> = missing.keys().map(|&u| (u, 0)).collect();
    let mut transmissions = Vec::new();
    let mut round = 0u64;
    loop {
        let mut pending: Vec<(usize, u32)> = missing
            .iter()
            .filter_map(|(&user, subs)| {
                let remaining = subs.len() - cursor[&user];
                (remaining > 0).then_some((remaining, user))
            })
            .collect();
        if pending.is_empty() {
            break;
        }
        pending.sort_by_key(|&(remaining, user)| (core::cmp::Reverse(remaining), user));
        pending.truncate(alpha);
        round += 1;

        let mut served: Vec<u32> = pending.iter().map(|&(_, u)| u).collect();
        served.sort_unstable();
        let streams: Vec<Stream> = pending
            .iter()
            .map(|&(_, user)| {
                let at = cursor.get_mut(&user).expect("cursor exists for every queue");
                let sub = &missing[&user][*at];
                *at += 1;
                Stream {
                    user,
                    lambda: sub.lambda.clone(),
                    q: sub.q,
                    nulling: served.iter().copied().filter(|&u| u != user).collect(),
                }
            })
            .collect();
        transmissions.push(Transmission {
            kind: TxKind::Uc,
            origin: Origin::UcRound { round },
            sub_index: 1,
            streams,
            served,
        });
    }
    transmissions
}

// --------------------------------------------------------------------------
// End-to-end schedule
// --------------------------------------------------------------------------

/// Build the complete delivery schedule: the CC step for the configured
/// strategy, then the UC step for overflow users and rerouted subpackets.
///
/// With [`SchedulerOptions::efficient_multicast`], CC transmissions serving
/// fewer than `α` users are dropped and their subpackets rerouted to UC.
/// Independently, a safety net reroutes any `(user, Λ)` pair the CC step
/// left short of its `S` subpackets; both kinds of reroute are recorded in
/// [`Schedule::residual`] (the shortfall case is never expected to occur —
/// both constructions deliver exactly `S` per pair for every association).
pub fn full_schedule(
    cfg: &NetworkConfig,
    assoc: &Association,
    opts: SchedulerOptions,
) -> Result<Schedule, ScheduleError> {
    validate_config(cfg)?;
    debug_assert_eq!(assoc.profile_count(), cfg.profiles, "association built for this config");

    let mut counter = QCounter::new(cfg);
    let mut cc: Vec<Transmission> = Vec::new();
    match cfg.strategy {
        Strategy::A => {
            let windows = elevate_a(cfg, assoc);
            for triple in enumerate_triples(cfg, assoc) {
                cc.extend(build_tx_a(cfg, assoc, &windows, &triple, &mut counter)?);
            }
        }
        Strategy::B => {
            for quintuple in enumerate_quintuples(cfg, assoc) {
                cc.extend(build_tx_b(cfg, assoc, &quintuple, &mut counter)?);
            }
        }
    }

    // Efficient multicast: keep only CC transmissions that exhaust the
    // spatial multiplexing budget; reroute the rest.
    let mut residual: Vec<(u32, SubpacketId)> = Vec::new();
    if opts.efficient_multicast {
        let mut kept = Vec::with_capacity(cc.len());
        for tx in cc {
            if tx.served.len() < cfg.alpha {
                for stream in tx.streams {
                    residual
                        .push((stream.user, SubpacketId { lambda: stream.lambda, q: stream.q }));
                }
            } else {
                kept.push(tx);
            }
        }
        cc = kept;
    }

    // Safety net: any (user, Λ) pair the CC step left short of S goes to
    // UC. Both constructions deliver exactly S per pair, so this stays
    // empty; it is observable only through the residual log if it ever
    // fires.
    let s = subpacketization(cfg) as u32;
    let index = MiniFileIndex::new(cfg.profiles, cfg.t_bar());
    for p in 1..=assoc.profile_count() {
        for user in assoc.served(p) {
            for lambda in index.iter().filter(|lambda| !lambda.contains(&p)) {
                for q in counter.issued(user, &lambda) + 1..=s {
                    residual.push((user, SubpacketId { lambda: lambda.clone(), q }));
                }
            }
        }
    }

    // UC queue: overflow users' full demands, then reroutes in log order.
    let mut queues: BTreeMap<u32, Vec<SubpacketId>> = BTreeMap::new();
    for p in 1..=assoc.profile_count() {
        for user in assoc.excluded(p) {
            queues.insert(user, missing_subpackets(cfg, assoc, user));
        }
    }
    for (user, sub) in &residual {
        queues.entry(*user).or_default().push(sub.clone());
    }
    let uc = uc_schedule(&queues, cfg.alpha);

    let j_m = cc.iter().map(|tx| tx.streams.len() as u64).sum();
    let t_m = cc.len() as u64;
    let j_u = uc.iter().map(|tx| tx.streams.len() as u64).sum();
    let t_u = uc.len() as u64;
    let mut transmissions = cc;
    transmissions.extend(uc);
    Ok(Schedule { transmissions, j_m, t_m, j_u, t_u, residual })
}

// --------------------------------------------------------------------------
// Tests
// --------------------------------------------------------------------------
