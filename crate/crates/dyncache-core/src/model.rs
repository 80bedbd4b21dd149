//! System model: network configuration, delivery-design rules, and
//! user-to-profile associations.
//!
//! The network is a single multi-antenna transmitter (`L` antennas, able to
//! drive at most `α ≤ L` concurrent streams) serving `K` single-antenna
//! users. Users do not own caches; instead they attach to one of `P` caching
//! *profiles*, each a cache of `M` files out of a library of `N`. The cache
//! ratio is `γ = M/N` and the replication degree `t̄ = Pγ` must be an
//! integer: every file is split into `C(P, t̄)` mini-files, one per
//! `t̄`-subset of profiles, and profile `p` stores every mini-file whose
//! subset contains `p` (see [`crate::placement`]).
//!
//! A delivery design is the tuple `(η̂, β, Q, strategy)`:
//!
//! * `η̂` — the per-profile service cap: profile `p` has `η_p` attached
//!   users of which `δ_p = min(η̂, η_p)` are served by multicasting; the
//!   `η_p − η̂` overflow users fall back to unicast.
//! * `Q` — how many profiles are combined in one multicast group.
//! * `β` — how many users of a profile are packed into one scheduling
//!   window; feasibility requires `β ≤ min(α, η̂)` and
//!   `t̄ + 1 ≤ Q ≤ t̄ + ⌈α/β⌉` (so that every stream can still null its
//!   co-scheduled interferers with `α` transmit dimensions), plus `Q ≤ P`.
//! * `strategy` — [`Strategy::A`] packs `β` users per window directly;
//!   [`Strategy::B`] is the cyclic construction used when `α > η̂` with
//!   non-integer `α/η̂`, serving `η̂t̄ + α` users per transmission.
//!
//! [`choose_design`] picks the canonical design for given `(γ, α, η̂, P)`:
//!
//! * `α ≤ η̂` → `β = α`, `Q = t̄ + 1`, Strategy A;
//! * `α > η̂`, `α/η̂` integer → `β = η̂`, `Q = t̄ + α/η̂`, Strategy A;
//! * `α > η̂`, `α/η̂` fractional → `β = η̂`, `Q = t̄ + ⌈α/η̂⌉`, Strategy B
//!   (Strategy A remains valid for any `Q ≤ t̄ + ⌊α/η̂⌋` and callers may
//!   override `Q` within the feasible range).

use alloc::vec::Vec;
use num_rational::Ratio;
#[cfg(not(any(feature = "std", test)))]
use num_traits::Float as _; // f64::sqrt without std
use rand::RngExt;

use crate::combin::binomial;

/// Which multicast construction builds the content-delivery phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Direct windowing: `β` users per profile window, `Q` profiles per
    /// transmission, `Qβ`-ish users served at once.
    A,
    /// Cyclic construction for fractional `α/η̂`: one profile contributes a
    /// cyclic `θ`-window, `Q − 1` profiles contribute full windows, serving
    /// `η̂t̄ + α` users per transmission.
    B,
}

impl Strategy {
    /// Stable textual name used in CSV output and CLI flags.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::A => "A",
            Strategy::B => "B",
        }
    }
}

/// Static description of the network and the chosen delivery design.
///
/// `K` and the per-profile user counts are deliberately *not* part of the
/// configuration: they live in [`Association`], because the same network
/// serves many different user arrivals over its lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Transmit antennas `L`.
    pub antennas: usize,
    /// Library size `N` (number of files).
    pub files: u64,
    /// Cache capacity `M` in files; the cache ratio is `γ = M/N`.
    pub cache_size: u64,
    /// Number of caching profiles `P`.
    pub profiles: usize,
    /// Spatial multiplexing limit `α ≤ L`: the maximum number of users any
    /// single transmission may serve (equivalently, 1 + the largest
    /// interference-nulling set a precoder must handle).
    pub alpha: usize,
    /// Per-profile multicast service cap `η̂`.
    pub eta_hat: usize,
    /// Window size `β ≤ min(α, η̂)`.
    pub beta: usize,
    /// Profiles per multicast group `Q`, with `t̄ + 1 ≤ Q ≤ t̄ + ⌈α/β⌉`
    /// and `Q ≤ P`.
    pub q: usize,
    /// Multicast construction.
    pub strategy: Strategy,
    /// Receiver noise power `N0`.
    pub noise_power: f64,
    /// Transmit power budget `P_T` (sum over all concurrent streams).
    pub total_power: f64,
}

impl NetworkConfig {
    /// Cache ratio `γ = M/N` as an exact rational.
    pub fn gamma(&self) -> Ratio<u64> {
        Ratio::new(self.cache_size, self.files)
    }

    /// Fraction of each file a user is missing, `1 − γ`, exact.
    pub fn gamma_complement(&self) -> Ratio<u64> {
        Ratio::new(self.files - self.cache_size, self.files)
    }

    /// Replication degree `t̄ = Pγ`. Only meaningful once
    /// [`validate_config`] has accepted the configuration.
    pub fn t_bar(&self) -> usize {
        debug_assert_eq!((self.profiles as u64 * self.cache_size) % self.files, 0);
        (self.profiles as u64 * self.cache_size / self.files) as usize
    }
}

/// Why a [`NetworkConfig`] was rejected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    /// `Pγ = P·M/N` must be an integer for symmetric placement.
    #[error("replication degree P·M/N = {profiles}·{cache_size}/{files} is not an integer")]
    NonIntegerTBar { profiles: usize, cache_size: u64, files: u64 },
    /// One of the design inequalities does not hold; the message names it.
    #[error("configuration constraint violated: {0}")]
    ConstraintViolation(&'static str),
}

/// Check every structural invariant of a configuration.
///
/// ```
/// use dyncache_core::model::{validate_config, NetworkConfig, Strategy};
///
/// // A 3-profile network with γ = 1/3, serving windows of β = 3 users and
/// // Q = 3 profiles per transmission.
/// let cfg = NetworkConfig {
///     antennas: 6, files: 3, cache_size: 1, profiles: 3, alpha: 6,
///     eta_hat: 4, beta: 3, q: 3, strategy: Strategy::A,
///     noise_power: 1.0, total_power: 100.0,
/// };
/// assert!(validate_config(&cfg).is_ok());
/// ```
pub fn validate_config(cfg: &NetworkConfig) -> Result<(), ConfigError> {
    use ConfigError::ConstraintViolation as Violation;

    if cfg.profiles == 0 {
        return Err(Violation("P must be positive"));
    }
    if cfg.files == 0 || cfg.cache_size == 0 {
        return Err(Violation("N and M must be positive"));
    }
    if cfg.cache_size >= cfg.files {
        return Err(Violation("M < N required: a full cache leaves nothing to deliver"));
    }
    if (cfg.profiles as u64 * cfg.cache_size) % cfg.files != 0 {
        return Err(ConfigError::NonIntegerTBar {
            profiles: cfg.profiles,
            cache_size: cfg.cache_size,
            files: cfg.files,
        });
    }
    let t_bar = cfg.t_bar();
    if cfg.alpha == 0 {
        return Err(Violation("alpha must be positive"));
    }
    if cfg.alpha > cfg.antennas {
        return Err(Violation("alpha <= L: cannot multiplex more streams than antennas"));
    }
    if cfg.eta_hat == 0 {
        return Err(Violation("eta_hat must be positive"));
    }
    if cfg.beta == 0 || cfg.beta > cfg.alpha.min(cfg.eta_hat) {
        return Err(Violation("beta <= min(alpha, eta_hat) required"));
    }
    if cfg.q < t_bar + 1 {
        return Err(Violation("Q >= t_bar + 1 required"));
    }
    // A Strategy A stream may need nulling at up to (Q − t̄)·β − 1 users,
    // which must fit the α − 1 spatial budget: Q ≤ t̄ + ⌊α/β⌋. Strategy B
    // exists precisely to reach Q = t̄ + ⌈α/η̂⌉ without breaking that
    // budget; its exact Q is pinned below.
    if cfg.strategy == Strategy::A && cfg.q > t_bar + cfg.alpha / cfg.beta {
        return Err(Violation("Q <= t_bar + floor(alpha/beta) required for strategy A"));
    }
    if cfg.q > cfg.profiles {
        return Err(Violation("Q <= P required: a group cannot span more profiles than exist"));
    }
    if cfg.strategy == Strategy::B {
        if cfg.alpha <= cfg.eta_hat {
            return Err(Violation("strategy B requires alpha > eta_hat"));
        }
        if cfg.alpha % cfg.eta_hat == 0 {
            return Err(Violation("strategy B requires a fractional alpha/eta_hat"));
        }
        if cfg.q != t_bar + cfg.alpha.div_ceil(cfg.eta_hat) {
            return Err(Violation("strategy B fixes Q = t_bar + ceil(alpha/eta_hat)"));
        }
        if cfg.beta != cfg.eta_hat {
            return Err(Violation("strategy B fixes beta = eta_hat"));
        }
    }
    if !(cfg.noise_power.is_finite() && cfg.noise_power > 0.0) {
        return Err(Violation("N0 must be positive and finite"));
    }
    if !(cfg.total_power.is_finite() && cfg.total_power > 0.0) {
        return Err(Violation("P_T must be positive and finite"));
    }
    Ok(())
}

/// The `(β, Q, strategy)` triple produced by [`choose_design`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignChoice {
    pub beta: usize,
    pub q: usize,
    pub strategy: Strategy,
}

/// Canonical delivery design for `(γ, α, η̂, P)`; see the module docs for
/// the three regimes.
///
/// ```
/// use dyncache_core::model::{choose_design, Strategy};
/// use num_rational::Ratio;
///
/// let d = choose_design(Ratio::new(1, 3), 6, 4, 3).unwrap();
/// assert_eq!((d.beta, d.q, d.strategy), (4, 3, Strategy::B));
///
/// let d = choose_design(Ratio::new(1, 5), 2, 6, 5).unwrap();
/// assert_eq!((d.beta, d.q, d.strategy), (2, 2, Strategy::A));
///
/// let d = choose_design(Ratio::new(1, 5), 9, 3, 10).unwrap();
/// assert_eq!((d.beta, d.q, d.strategy), (3, 5, Strategy::A));
/// ```
pub fn choose_design(
    gamma: Ratio<u64>,
    alpha: usize,
    eta_hat: usize,
    profiles: usize,
) -> Result<DesignChoice, ConfigError> {
    if alpha == 0 || eta_hat == 0 || profiles == 0 {
        return Err(ConfigError::ConstraintViolation("alpha, eta_hat, P must be positive"));
    }
    let scaled = gamma * Ratio::from_integer(profiles as u64);
    if !scaled.is_integer() {
        return Err(ConfigError::NonIntegerTBar {
            profiles,
            cache_size: *gamma.numer(),
            files: *gamma.denom(),
        });
    }
    let t_bar = scaled.to_integer() as usize;
    let choice = if alpha <= eta_hat {
        DesignChoice { beta: alpha, q: t_bar + 1, strategy: Strategy::A }
    } else if alpha % eta_hat == 0 {
        DesignChoice { beta: eta_hat, q: t_bar + alpha / eta_hat, strategy: Strategy::A }
    } else {
        DesignChoice { beta: eta_hat, q: t_bar + alpha.div_ceil(eta_hat), strategy: Strategy::B }
    };
    if choice.q > profiles {
        return Err(ConfigError::ConstraintViolation(
            "chosen Q exceeds P; reduce alpha or increase eta_hat",
        ));
    }
    Ok(choice)
}

/// Why an association could not be built.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssociationError {
    /// No users at all: every profile length is zero.
    #[error("empty network: all profile lengths are zero")]
    EmptyNetwork,
    /// The lengths vector does not have one entry per profile.
    #[error("expected {expected} profile lengths, got {got}")]
    ProfileCountMismatch { expected: usize, got: usize },
}

/// A concrete user arrival: how many users sit behind each caching profile,
/// and everything the schedulers derive from those counts.
///
/// Profiles are **1-based** and kept sorted by non-increasing length
/// (`eta[0] ≥ eta[1] ≥ …`); [`Association::order`] maps each sorted slot
/// back to the caller's original profile label. Users are numbered `1..=K`
/// consecutively: profile 1 owns users `1..=η_1`, profile 2 the next `η_2`,
/// and so on. Within profile `p` the first `δ_p` users form the
/// multicast-served set `V_p`; the remainder overflow to unicast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    /// Profile lengths `η_p`, sorted non-increasing.
    pub eta: Vec<usize>,
    /// `order[i]` = original 1-based label of sorted profile `i + 1`
    /// (ties keep their input order).
    pub order: Vec<usize>,
    /// Multicast-served counts `δ_p = min(η̂, η_p)`.
    pub delta: Vec<usize>,
    /// Window counts `φ_p = max(β, δ_p)`.
    pub phi: Vec<usize>,
    /// First user id of each profile (users are consecutive).
    pub first_user: Vec<u32>,
    /// Total users `K = Σ η_p`.
    pub k_total: usize,
    /// Multicast-served users `K_M = Σ δ_p`.
    pub k_multicast: usize,
    /// Unicast-overflow users `K_U = Σ max(0, η_p − η̂)`.
    pub k_unicast: usize,
    /// Cyclic remainder `θ = α − η̂·⌊α/η̂⌋` (drives Strategy B's short
    /// window; zero when `η̂` divides `α`).
    pub theta: usize,
    /// `ν1 = C(Q−2, Q−t̄−2)`: interference-free sub-transmissions per
    /// Strategy-B transmission (0 when `Q = t̄+1`, where the cyclic
    /// construction is undefined).
    pub nu1: u64,
    /// `ν2 = C(Q−1, Q−t̄−1)`: sub-transmissions per Strategy-A
    /// transmission, and cyclic-shift period in Strategy B.
    pub nu2: u64,
}

impl Association {
    /// Number of profiles `P`.
    pub fn profile_count(&self) -> usize {
        self.eta.len()
    }

    /// All users attached to sorted profile `p` (1-based): the range `U_p`.
    pub fn users(&self, p: usize) -> core::ops::Range<u32> {
        let first = self.first_user[p - 1];
        first..first + self.eta[p - 1] as u32
    }

    /// Multicast-served users of sorted profile `p`: the first `δ_p` of
    /// `U_p` (the range `V_p`).
    pub fn served(&self, p: usize) -> core::ops::Range<u32> {
        let first = self.first_user[p - 1];
        first..first + self.delta[p - 1] as u32
    }

    /// Unicast-overflow users of sorted profile `p` (empty unless
    /// `η_p > η̂`).
    pub fn excluded(&self, p: usize) -> core::ops::Range<u32> {
        let first = self.first_user[p - 1];
        first + self.delta[p - 1] as u32..first + self.eta[p - 1] as u32
    }

    /// Sorted profile (1-based) that `user` is attached to.
    pub fn profile_of(&self, user: u32) -> usize {
        debug_assert!(user >= 1 && user <= self.k_total as u32);
        match self.first_user.binary_search(&user) {
            Ok(i) => {
                // `user` is the first member of profile i+1 unless that
                // profile is empty, in which case it belongs to an earlier
                // one; empty profiles share first_user with their successor
                // but sit after every populated profile (lengths sorted).
                i + 1
            }
            Err(i) => i,
        }
    }

    /// Iterator over every user id `1..=K`.
    pub fn all_users(&self) -> core::ops::RangeInclusive<u32> {
        1..=self.k_total as u32
    }
}

/// Build an [`Association`] from per-profile user counts.
///
/// `lengths[i]` is the number of users attached to the caller's profile
/// `i + 1`. Profiles are re-sorted by non-increasing length (stable, so
/// equal lengths keep their input order) and users are numbered
/// consecutively along the sorted order.
///
/// ```
/// use dyncache_core::model::{association_from_lengths, NetworkConfig, Strategy};
///
/// let cfg = NetworkConfig {
///     antennas: 6, files: 3, cache_size: 1, profiles: 3, alpha: 6,
///     eta_hat: 4, beta: 3, q: 3, strategy: Strategy::A,
///     noise_power: 1.0, total_power: 100.0,
/// };
/// let assoc = association_from_lengths(&cfg, &[5, 4, 3]).unwrap();
/// assert_eq!(assoc.delta, vec![4, 4, 3]);
/// assert_eq!((assoc.k_multicast, assoc.k_unicast), (11, 1));
/// assert_eq!(assoc.users(2), 6..10);
/// assert_eq!(assoc.served(3), 10..13);
/// assert_eq!(assoc.profile_of(5), 1);
/// ```
pub fn association_from_lengths(
    cfg: &NetworkConfig,
    lengths: &[usize],
) -> Result<Association, AssociationError> {
    if lengths.len() != cfg.profiles {
        return Err(AssociationError::ProfileCountMismatch {
            expected: cfg.profiles,
            got: lengths.len(),
        });
    }
    let k_total: usize = lengths.iter().sum();
    if k_total == 0 {
        return Err(AssociationError::EmptyNetwork);
    }

    let mut order: Vec<usize> = (1..=lengths.len()).collect();
    order.sort_by_key(|&label| core::cmp::Reverse(lengths[label - 1]));
    let eta: Vec<usize> = order.iter().map(|&label| lengths[label - 1]).collect();

    let delta: Vec<usize> = eta.iter().map(|&e| e.min(cfg.eta_hat)).collect();
    let phi: Vec<usize> = delta.iter().map(|&d| d.max(cfg.beta)).collect();
    let mut first_user = Vec::with_capacity(eta.len());
    let mut next = 1u32;
    for &e in &eta {
        first_user.push(next);
        next += e as u32;
    }

    let t_bar = cfg.t_bar();
    let floor = cfg.alpha / cfg.eta_hat;
    Ok(Association {
        order,
        delta: delta.clone(),
        phi,
        first_user,
        k_total,
        k_multicast: delta.iter().sum(),
        k_unicast: eta.iter().map(|&e| e.saturating_sub(cfg.eta_hat)).sum(),
        theta: cfg.alpha - cfg.eta_hat * floor,
        nu1: if cfg.q >= t_bar + 2 { binomial(cfg.q - 2, cfg.q - t_bar - 2) } else { 0 },
        nu2: if cfg.q >= t_bar + 1 { binomial(cfg.q - 1, cfg.q - t_bar - 1) } else { 0 },
        eta,
    })
}

/// Exact dispersion key: `Σ_p (P·η_p − K)²`.
///
/// Two associations have the same population standard deviation of profile
/// lengths if and only if they share this integer, so it is the bucket key
/// for σ-grouped aggregation (no floating-point comparisons involved).
pub fn sigma_key(lengths: &[usize]) -> u64 {
    let p = lengths.len() as i64;
    let k: i64 = lengths.iter().map(|&e| e as i64).sum();
    lengths.iter().map(|&e| (p * e as i64 - k).pow(2) as u64).sum()
}

/// Population standard deviation of the profile lengths,
/// `σ = sqrt(Σ_p (η_p − K/P)² / P)`.
pub fn sigma(lengths: &[usize]) -> f64 {
    let p = lengths.len() as f64;
    (sigma_key(lengths) as f64 / (p * p * p)).sqrt()
}

/// Uniformly random composition of `k` into `p` non-negative ordered parts
/// (stars and bars: a uniform `(p−1)`-subset of `k + p − 1` slot positions).
///
/// This is the association sampler used for randomized rate and DoF
/// experiments; each of the `C(k+p−1, p−1)` labeled compositions is equally
/// likely.
pub fn random_composition<R: RngExt + ?Sized>(rng: &mut R, k: usize, p: usize) -> Vec<usize> {
    assert!(p >= 1, "need at least one part");
    if p == 1 {
        return alloc::vec![k];
    }
    let slots = k + p - 1;
    // Floyd's algorithm: uniform (p-1)-subset of {0, …, slots-1}.
    let mut bars: Vec<usize> = Vec::with_capacity(p - 1);
    for j in slots - (p - 1)..slots {
        let t = rng.random_range(0..=j);
        if bars.contains(&t) {
            bars.push(j);
        } else {
            bars.push(t);
        }
    }
    bars.sort_unstable();
    let mut parts = Vec::with_capacity(p);
    let mut prev = 0;
    for &b in &bars {
        parts.push(b - prev);
        prev = b + 1;
    }
    parts.push(slots - prev);
    parts
}
