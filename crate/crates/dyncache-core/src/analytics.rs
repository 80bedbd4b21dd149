//! Closed-form degrees of freedom, the design line search, and ensemble
//! averages over user-to-profile associations.
//!
//! The delivery DoF — subpackets delivered per transmission slot — has a
//! closed form for both strategies:
//!
//! * the multicast step delivers `J_M = K_M · S · C(P−1, t̄)` subpackets
//!   (every served user gets all `S` subpackets of each foreign mini-file)
//!   in `T_M` transmissions, where `T_M` is `ν₂·Σ_r D(δ_r)·C(P−r, Q−1)`
//!   for Strategy A and `ν₁·N_M` for Strategy B, with `N_M` the exact count
//!   of populated quintuples;
//! * the unicast step delivers `J_U = K_U · S · C(P−1, t̄)` subpackets in
//!   `T_U = ⌈J_U / min(K_U, α)⌉` rounds.
//!
//! All DoF arithmetic is exact rational: the only non-linearity is the
//! ceiling in `T_U`, which floating point must never touch. The closed
//! forms are pinned against the schedule-counting oracle
//! ([`crate::verifier::count_dof`]) — the two agree exactly whenever the
//! residual log is empty.
//!
//! [`dof_max_search`] sweeps the free design parameters (`η̂`, `β`, `Q`,
//! strategy) for a given association and antenna budget, flooring the
//! result at the no-coded-caching baseline `min(α, K)`; [`dof_m_average`]
//! aggregates that maximum over every association of `K` users to `P`
//! profiles, bucketed by the spread of the profile populations.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::combin::binomial;
use crate::model::{
    association_from_lengths, sigma_key, validate_config, Association, NetworkConfig, Strategy,
};
use crate::scheduler::e_window_real;

#[cfg(not(any(feature = "std", test)))]
use num_traits::Float as _; // f64 methods without std

/// Exact integer ingredients of the closed-form DoF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofTerms {
    /// `β′ = β·C(P−t̄−1, Q−t̄−1)`: Strategy A subpackets per
    /// `(user, mini-file)` pair.
    pub beta_prime: u128,
    /// `α′ = (η̂t̄+α)·ν₁·C(P−t̄−1, Q−t̄−1)`: the Strategy B analogue.
    pub alpha_prime: u128,
    /// `D(δ_r)` per profile: `φ_r` when `δ_r ≠ 0`, else 0 (transmissions
    /// led by an empty profile are silent and not counted).
    pub d: Vec<u64>,
    /// Strategy B populated-transmission count before the ν₁ split:
    /// `Σ_{r,c,m,s} C(P−c−1, Q−2)·I⁺`; zero under Strategy A.
    pub n_m: u128,
    /// Unicast round count `⌈K_U·S·C(P−1, t̄)/min(K_U, α)⌉` (with `S` the
    /// active strategy's per-pair subpacket count); zero when `K_U = 0`.
    pub n_u: u128,
}

/// Activity indicator `I⁺` of a Strategy B transmission prefix `(r, c, m)`
/// (independent of the group shift `s`): zero exactly when the cyclic
/// window `E_r^m` contains no real user *and* the profile at position `c`
/// of `[P]∖{r}` is empty — profile lengths are sorted, so every later
/// profile is empty too and the transmission serves nobody.
pub fn iplus(cfg: &NetworkConfig, assoc: &Association, r: usize, c: usize, m: usize) -> u64 {
    let dbar = if c < r { c } else { c + 1 };
    let window_users = assoc.delta[dbar - 1] > 0;
    let e_users = !e_window_real(cfg, assoc, r, m).is_empty();
    u64::from(window_users || e_users)
}

/// Compute the closed-form ingredients for a validated configuration and
/// its association.
pub fn dof_terms(cfg: &NetworkConfig, assoc: &Association) -> DofTerms {
    let p = cfg.profiles;
    let t_bar = cfg.t_bar();
    let spread = binomial(p - t_bar - 1, cfg.q - t_bar - 1) as u128;
    let beta_prime = cfg.beta as u128 * spread;
    let alpha_prime =
        (cfg.eta_hat * t_bar + cfg.alpha) as u128 * assoc.nu1 as u128 * spread;
    let d: Vec<u64> = assoc
        .delta
        .iter()
        .zip(&assoc.phi)
        .map(|(&delta, &phi)| if delta == 0 { 0 } else { phi as u64 })
        .collect();
    let n_m: u128 = match cfg.strategy {
        Strategy::A => 0,
        Strategy::B => {
            let mut total: u128 = 0;
            for r in 1..=p {
                for c in 1..=p - cfg.q + 1 {
                    for m in 1..=cfg.eta_hat {
                        total += binomial(p - c - 1, cfg.q - 2) as u128
                            * assoc.nu2 as u128
                            * iplus(cfg, assoc, r, c, m) as u128;
                    }
                }
            }
            total
        }
    };
    let per_pair = match cfg.strategy {
        Strategy::A => beta_prime,
        Strategy::B => alpha_prime,
    };
    let n_u = if assoc.k_unicast == 0 {
        0
    } else {
        let j_u = assoc.k_unicast as u128 * binomial(p - 1, t_bar) as u128 * per_pair;
        j_u.div_ceil(assoc.k_unicast.min(cfg.alpha) as u128)
    };
    DofTerms { beta_prime, alpha_prime, d, n_m, n_u }
}

/// Closed-form DoF of a validated configuration, exact.
pub fn dof_closed_form(cfg: &NetworkConfig, assoc: &Association) -> Ratio<i128> {
    let terms = dof_terms(cfg, assoc);
    let p = cfg.profiles;
    let foreign = binomial(p - 1, cfg.t_bar()) as u128;
    let (j_m, t_m) = match cfg.strategy {
        Strategy::A => {
            let j = assoc.k_multicast as u128 * terms.beta_prime * foreign;
            let t = (1..=p - cfg.q + 1)
                .map(|r| terms.d[r - 1] as u128 * binomial(p - r, cfg.q - 1) as u128)
                .sum::<u128>()
                * assoc.nu2 as u128;
            (j, t)
        }
        Strategy::B => (
            assoc.k_multicast as u128 * terms.alpha_prime * foreign,
            assoc.nu1 as u128 * terms.n_m,
        ),
    };
    let per_pair = match cfg.strategy {
        Strategy::A => terms.beta_prime,
        Strategy::B => terms.alpha_prime,
    };
    let j_u = assoc.k_unicast as u128 * foreign * per_pair;
    ratio(j_m + j_u, t_m + terms.n_u)
}

fn ratio(numer: u128, denom: u128) -> Ratio<i128> {
    Ratio::new(
        i128::try_from(numer).expect("DoF numerator fits i128"),
        i128::try_from(denom).expect("DoF denominator fits i128"),
    )
}

/// Both sides of the diagonal binomial identity
/// `Σ_{r=1}^{P−Q+1} C(P−r, Q−1) = C(P, Q)` — the reason the per-user
/// delivery count is association-independent.
pub fn lemma1(p: usize, q: usize) -> (u64, u64) {
    let lhs = (1..=p - q + 1).map(|r| binomial(p - r, q - 1)).sum();
    (lhs, binomial(p, q))
}

/// DoF of plain multi-antenna unicasting: `min(α, K)` users per slot.
pub fn nocc_dof(k: usize, alpha: usize) -> u64 {
    k.min(alpha) as u64
}

/// One candidate design evaluated by [`dof_max_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchPick {
    pub eta_hat: usize,
    pub beta: usize,
    pub q: usize,
    pub strategy: Strategy,
    /// Closed-form DoF of this design (before the no-CC floor).
    pub dof: Ratio<i128>,
}

/// Result of the design line search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofSearch {
    /// Achievable DoF: the best coded design, floored at `min(α, K)`
    /// (demands can always be served by plain unicasting instead).
    pub dof: Ratio<i128>,
    /// Whether a coded design strictly beats the unicast baseline (false:
    /// plain multiplexing already matches the best coded candidate).
    pub coded: bool,
    /// Best coded design found, if any parameters are feasible at all.
    pub pick: Option<SearchPick>,
}

/// Exhaustive line search over the free delivery parameters for one
/// association: `η̂ ∈ [1, max_p η_p]`, every spatially feasible
/// `(β, Q)` for Strategy A (`Q ≤ t̄ + ⌊α/β⌋`), and Strategy B at its
/// construction point (`α/η̂` fractional, `Q = t̄ + ⌈α/η̂⌉`). Ties break
/// toward smaller `(η̂, Q)`, then Strategy A, then smaller `β`.
///
/// `lengths` need not be sorted; `gamma = M/N` must make `t̄ = Pγ` a
/// positive integer, otherwise no coded design exists and the no-CC
/// baseline is returned.
pub fn dof_max_search(lengths: &[usize], alpha: usize, gamma: Ratio<u64>) -> DofSearch {
    let p = lengths.len();
    let k_total: usize = lengths.iter().sum();
    let floor = Ratio::from_integer(nocc_dof(k_total, alpha) as i128);
    let eta_max = lengths.iter().copied().max().unwrap_or(0);

    let mut pick: Option<SearchPick> = None;
    let scaled = gamma * Ratio::from_integer(p as u64);
    if scaled.is_integer() && scaled.to_integer() >= 1 && k_total > 0 {
        let t_bar = scaled.to_integer() as usize;
        for eta_hat in 1..=eta_max {
            let mut candidates: Vec<(usize, usize, Strategy)> = Vec::new();
            for q in t_bar + 1..=p {
                for beta in 1..=alpha.min(eta_hat) {
                    if q <= t_bar + alpha / beta {
                        candidates.push((beta, q, Strategy::A));
                    }
                }
            }
            if alpha > eta_hat && alpha % eta_hat != 0 {
                let q = t_bar + alpha.div_ceil(eta_hat);
                if q <= p {
                    candidates.push((eta_hat, q, Strategy::B));
                }
            }
            for (beta, q, strategy) in candidates {
                let cfg = NetworkConfig {
                    antennas: alpha,
                    files: *gamma.denom(),
                    cache_size: *gamma.numer(),
                    profiles: p,
                    alpha,
                    eta_hat,
                    beta,
                    q,
                    strategy,
                    noise_power: 1.0,
                    total_power: 1.0,
                };
                debug_assert!(validate_config(&cfg).is_ok());
                let assoc = association_from_lengths(&cfg, lengths)
                    .expect("nonempty association");
                let dof = dof_closed_form(&cfg, &assoc);
                let candidate = SearchPick { eta_hat, beta, q, strategy, dof };
                let better = match &pick {
                    None => true,
                    Some(best) => {
                        dof > best.dof
                            || (dof == best.dof
                                && rank(&candidate) < rank(best))
                    }
                };
                if better {
                    pick = Some(candidate);
                }
            }
        }
    }

    match pick {
        Some(best) if best.dof > floor => {
            DofSearch { dof: best.dof, coded: true, pick: Some(best) }
        }
        other => DofSearch { dof: floor, coded: false, pick: other },
    }
}

/// Tie-break key: smaller is preferred.
fn rank(pick: &SearchPick) -> (usize, usize, u8, usize) {
    let strat = match pick.strategy {
        Strategy::A => 0,
        Strategy::B => 1,
    };
    (pick.eta_hat, pick.q, strat, pick.beta)
}

/// How to enumerate the associations of `K` users to `P` profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionMode {
    /// One representative per sorted profile population (profile labels
    /// are interchangeable for DoF, so this weights each shape once).
    Sorted,
    /// Every labeled composition, weighting each shape by the number of
    /// profile labelings that produce it.
    Labeled,
}

/// Mean maximum DoF over one population-spread bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaPoint {
    /// Exact bucket key `Σ_p (P·η_p − K)²`.
    pub key: u64,
    /// Population standard deviation `sqrt(key)/P^{3/2}`.
    pub sigma: f64,
    /// Number of associations in the bucket (per the enumeration mode).
    pub count: u64,
    /// Mean of [`dof_max_search`] over the bucket.
    pub mean_dof: f64,
}

/// Average the maximum achievable DoF over every association of `k` users
/// to `p` profiles, grouped by the spread of the profile populations.
/// Buckets are returned in ascending key order (uniform first).
pub fn dof_m_average(
    k: usize,
    p: usize,
    alpha: usize,
    gamma: Ratio<u64>,
    mode: CompositionMode,
) -> Vec<SigmaPoint> {
    let mut buckets: BTreeMap<u64, (f64, u64)> = BTreeMap::new();
    for shape in partitions(k, p) {
        let weight = match mode {
            CompositionMode::Sorted => 1,
            CompositionMode::Labeled => labelings(&shape),
        };
        let dof = ratio_f64(dof_max_search(&shape, alpha, gamma).dof);
        let entry = buckets.entry(sigma_key(&shape)).or_insert((0.0, 0));
        entry.0 += dof * weight as f64;
        entry.1 += weight;
    }
    buckets
        .into_iter()
        .map(|(key, (sum, count))| SigmaPoint {
            key,
            sigma: sigma_from_key(key, p),
            count,
            mean_dof: sum / count as f64,
        })
        .collect()
}

/// Lossy view of an exact DoF, for aggregation and display only.
pub fn ratio_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn sigma_from_key(key: u64, p: usize) -> f64 {
    let pf = p as f64;
    (key as f64 / (pf * pf * pf)).sqrt()
}

/// Non-increasing length vectors of `p` parts (zeros allowed) summing to
/// `k` — one representative per unordered association shape.
fn partitions(k: usize, p: usize) -> Vec<Vec<usize>> {
    fn recurse(
        remaining: usize,
        slots: usize,
        max_part: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if slots == 0 {
            if remaining == 0 {
                out.push(current.clone());
            }
            return;
        }
        for part in (0..=max_part.min(remaining)).rev() {
            if part * slots < remaining {
                break; // smaller parts cannot reach the target either
            }
            current.push(part);
            recurse(remaining - part, slots - 1, part, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    recurse(k, p, k, &mut Vec::with_capacity(p), &mut out);
    out
}

/// Number of labeled compositions with the given sorted shape:
/// `p! / Π_v (multiplicity of part value v)!`, computed as a product of
/// binomials `Π_i C(n_i, run_i)` over the runs of equal values (`n_i` the
/// cumulative slot count) so every intermediate stays an exact integer.
fn labelings(shape: &[usize]) -> u64 {
    let mut result: u64 = 1;
    let mut slots: u64 = 0;
    let mut i = 0;
    while i < shape.len() {
        let mut run = 0;
        while i + run < shape.len() && shape[i + run] == shape[i] {
            run += 1;
        }
        for j in 1..=run as u64 {
            slots += 1;
            result = result * slots / j;
        }
        i += run;
    }
    result
}
