//! Schedule verification: decodability, delivery coverage, and counted
//! degrees of freedom.
//!
//! The verifier re-derives correctness from first principles instead of
//! trusting the scheduler's bookkeeping:
//!
//! * [`decode_check`] — every receiver can isolate its own stream in every
//!   transmission it appears in. For each pair of co-served streams the
//!   interfering stream must either carry a mini-file subset the victim
//!   caches (`p[k] ∈ Λ_j`) or list the victim in its nulling set; on top of
//!   that, no transmission may serve a user twice (receivers never need
//!   successive interference cancellation), nulling sets must fit the
//!   `α − 1` spatial budget, and the `served` summary must match the
//!   streams.
//! * [`coverage_check`] — every user receives exactly the subpackets its
//!   cache misses: each `(Λ, q)` with `Λ ∌ p[k]`, `q ∈ [S]`, exactly once
//!   across the whole schedule, and nothing else.
//! * [`count_dof`] — the achieved degrees of freedom as an exact rational,
//!   counted from the schedule rather than predicted by a formula.
//!
//! A schedule that passes both checks is a complete, decodable delivery
//! regardless of which code path produced it.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::model::{Association, NetworkConfig};
use crate::placement::{missing_subpackets, SubpacketId};
use crate::scheduler::Schedule;

/// A verification failure, pointing at the first offending item.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    /// A transmission's `served` list disagrees with its streams.
    #[error("transmission {tx_index}: served list does not match streams")]
    ServedMismatch { tx_index: usize },
    /// A transmission carries two streams for the same user, which would
    /// require successive interference cancellation to decode.
    #[error("transmission {tx_index}: user {user} is served twice")]
    DuplicateStream { tx_index: usize, user: u32 },
    /// A stream lists its own receiver in the nulling set.
    #[error("transmission {tx_index}: stream for user {user} nulls itself")]
    SelfNulling { tx_index: usize, user: u32 },
    /// A nulling set exceeds the `α − 1` spatial budget.
    #[error("transmission {tx_index}: nulling set of user {user} has {size} users, budget is {budget}")]
    NullingBudget { tx_index: usize, user: u32, size: usize, budget: usize },
    /// A co-served stream is neither cancelled by the victim's cache nor
    /// nulled at the victim's antenna.
    #[error("transmission {tx_index}: user {victim} cannot remove the stream of user {interferer}")]
    InterferenceLeak { tx_index: usize, victim: u32, interferer: u32 },
    /// A user received a subpacket outside its demand (already cached,
    /// out-of-range index, or a duplicate of an earlier delivery).
    #[error("user {user} received unexpected subpacket {lambda:?}/{q}")]
    UnexpectedDelivery { user: u32, lambda: Vec<usize>, q: u32 },
    /// A subpacket of the user's demand never arrived.
    #[error("user {user} never received subpacket {lambda:?}/{q}")]
    MissedSubpacket { user: u32, lambda: Vec<usize>, q: u32 },
}

/// Check that every stream of every transmission is decodable at its
/// receiver without successive interference cancellation.
pub fn decode_check(
    cfg: &NetworkConfig,
    assoc: &Association,
    schedule: &Schedule,
) -> Result<(), VerifyError> {
    for (tx_index, tx) in schedule.transmissions.iter().enumerate() {
        let mut users: Vec<u32> = tx.streams.iter().map(|s| s.user).collect();
        users.sort_unstable();
        if let Some(pair) = users.windows(2).find(|w| w[0] == w[1]) {
            return Err(VerifyError::DuplicateStream { tx_index, user: pair[0] });
        }
        if users != tx.served {
            return Err(VerifyError::ServedMismatch { tx_index });
        }
        for stream in &tx.streams {
            if stream.nulling.binary_search(&stream.user).is_ok() {
                return Err(VerifyError::SelfNulling { tx_index, user: stream.user });
            }
            if stream.nulling.len() > cfg.alpha - 1 {
                return Err(VerifyError::NullingBudget {
                    tx_index,
                    user: stream.user,
                    size: stream.nulling.len(),
                    budget: cfg.alpha - 1,
                });
            }
        }
        for victim in &tx.streams {
            let profile = assoc.profile_of(victim.user);
            for interferer in &tx.streams {
                if interferer.user == victim.user {
                    continue;
                }
                let cached = interferer.lambda.contains(&profile);
                let nulled = interferer.nulling.binary_search(&victim.user).is_ok();
                if !cached && !nulled {
                    return Err(VerifyError::InterferenceLeak {
                        tx_index,
                        victim: victim.user,
                        interferer: interferer.user,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Check that the schedule delivers every user's cache misses exactly once
/// and nothing else.
pub fn coverage_check(
    cfg: &NetworkConfig,
    assoc: &Association,
    schedule: &Schedule,
) -> Result<(), VerifyError> {
    let mut delivered: BTreeMap<u32, Vec<SubpacketId>> = BTreeMap::new();
    for tx in &schedule.transmissions {
        for stream in &tx.streams {
            delivered
                .entry(stream.user)
                .or_default()
                .push(SubpacketId { lambda: stream.lambda.clone(), q: stream.q });
        }
    }
    for user in assoc.all_users() {
        let mut got = delivered.remove(&user).unwrap_or_default();
        got.sort();
        let want = missing_subpackets(cfg, assoc, user);
        let mut want_iter = want.into_iter();
        for sub in got {
            loop {
                match want_iter.next() {
                    None => {
                        return Err(VerifyError::UnexpectedDelivery {
                            user,
                            lambda: sub.lambda,
                            q: sub.q,
                        })
                    }
                    Some(expected) => {
                        if expected == sub {
                            break;
                        }
                        if expected < sub {
                            return Err(VerifyError::MissedSubpacket {
                                user,
                                lambda: expected.lambda,
                                q: expected.q,
                            });
                        }
                        return Err(VerifyError::UnexpectedDelivery {
                            user,
                            lambda: sub.lambda,
                            q: sub.q,
                        });
                    }
                }
            }
        }
        if let Some(expected) = want_iter.next() {
            return Err(VerifyError::MissedSubpacket {
                user,
                lambda: expected.lambda,
                q: expected.q,
            });
        }
    }
    // Streams aimed at users outside the association.
    if let Some((&user, subs)) = delivered.iter().next() {
        let sub = &subs[0];
        return Err(VerifyError::UnexpectedDelivery {
            user,
            lambda: sub.lambda.clone(),
            q: sub.q,
        });
    }
    Ok(())
}

/// Degrees of freedom actually achieved by a schedule: subpackets delivered
/// per transmission, as an exact rational.
///
/// Panics on an empty schedule (zero transmissions).
pub fn count_dof(schedule: &Schedule) -> Ratio<i128> {
    let (j, t) = schedule.totals();
    Ratio::new(j as i128, t as i128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{association_from_lengths, Strategy};
    use crate::scheduler::{full_schedule, SchedulerOptions, TxKind};

    fn reference(strategy: Strategy) -> (NetworkConfig, Association) {
        let beta = match strategy {
            Strategy::A => 3,
            Strategy::B => 4,
        };
        let cfg = NetworkConfig {
            antennas: 6,
            files: 3,
            cache_size: 1,
            profiles: 3,
            alpha: 6,
            eta_hat: 4,
            beta,
            q: 3,
            strategy,
            noise_power: 1.0,
            total_power: 100.0,
        };
        let assoc = association_from_lengths(&cfg, &[5, 4, 3]).unwrap();
        (cfg, assoc)
    }

    #[test]
    fn reference_schedules_verify_clean() {
        for strategy in [Strategy::A, Strategy::B] {
            for em in [false, true] {
                let (cfg, assoc) = reference(strategy);
                let opts = SchedulerOptions { efficient_multicast: em };
                let schedule = full_schedule(&cfg, &assoc, opts).unwrap();
                decode_check(&cfg, &assoc, &schedule).unwrap();
                coverage_check(&cfg, &assoc, &schedule).unwrap();
            }
        }
    }

    #[test]
    fn skewed_and_empty_profiles_verify_clean() {
        let (cfg, _) = reference(Strategy::A);
        for lengths in [[4usize, 1, 1], [6, 6, 0], [12, 0, 0], [4, 4, 4]] {
            let assoc = association_from_lengths(&cfg, &lengths).unwrap();
            for em in [false, true] {
                let opts = SchedulerOptions { efficient_multicast: em };
                let schedule = full_schedule(&cfg, &assoc, opts).unwrap();
                decode_check(&cfg, &assoc, &schedule).unwrap();
                coverage_check(&cfg, &assoc, &schedule).unwrap();
            }
        }
    }

    #[test]
    fn counted_dof_reference_values() {
        let (cfg, assoc) = reference(Strategy::A);
        let schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
        assert_eq!(count_dof(&schedule), Ratio::new(36, 7));

        let (cfg, assoc) = reference(Strategy::B);
        let schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
        assert_eq!(count_dof(&schedule), Ratio::new(60, 11));
    }

    #[test]
    fn efficient_multicast_restores_full_multiplexing() {
        // With thin transmissions dropped, every remaining slot carries α
        // streams: lengths (4,1,1) push everything to UC at exactly DoF α.
        let (cfg, _) = reference(Strategy::A);
        let assoc = association_from_lengths(&cfg, &[4, 1, 1]).unwrap();
        let schedule =
            full_schedule(&cfg, &assoc, SchedulerOptions { efficient_multicast: true }).unwrap();
        decode_check(&cfg, &assoc, &schedule).unwrap();
        coverage_check(&cfg, &assoc, &schedule).unwrap();
        assert_eq!(count_dof(&schedule), Ratio::new(6, 1));
    }

    #[test]
    fn detects_interference_leak() {
        let (cfg, assoc) = reference(Strategy::A);
        let mut schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
        // User 2's stream in the first transmission is cancelled at user 1
        // only by nulling (both share profile 1); remove that protection.
        let stream = schedule.transmissions[0]
            .streams
            .iter_mut()
            .find(|s| s.user == 2)
            .unwrap();
        stream.nulling.retain(|&u| u != 1);
        assert_eq!(
            decode_check(&cfg, &assoc, &schedule),
            Err(VerifyError::InterferenceLeak { tx_index: 0, victim: 1, interferer: 2 })
        );
    }

    #[test]
    fn detects_duplicate_stream() {
        let (cfg, assoc) = reference(Strategy::A);
        let mut schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
        let copy = schedule.transmissions[0].streams[0].clone();
        let user = copy.user;
        schedule.transmissions[0].streams.push(copy);
        assert_eq!(
            decode_check(&cfg, &assoc, &schedule),
            Err(VerifyError::DuplicateStream { tx_index: 0, user })
        );
    }

    #[test]
    fn detects_missing_and_duplicate_deliveries() {
        let (cfg, assoc) = reference(Strategy::A);
        let mut schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
        let dropped = schedule.transmissions.pop().unwrap();
        assert_eq!(dropped.kind, TxKind::Uc);
        let lost = &dropped.streams[0];
        assert_eq!(
            coverage_check(&cfg, &assoc, &schedule),
            Err(VerifyError::MissedSubpacket {
                user: lost.user,
                lambda: lost.lambda.clone(),
                q: lost.q,
            })
        );

        let mut schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
        let extra = schedule.transmissions.last().unwrap().clone();
        let dup = &extra.streams[0];
        let expect = VerifyError::UnexpectedDelivery {
            user: dup.user,
            lambda: dup.lambda.clone(),
            q: dup.q,
        };
        schedule.transmissions.push(extra);
        assert_eq!(coverage_check(&cfg, &assoc, &schedule), Err(expect));
    }

    #[test]
    fn detects_budget_and_self_nulling() {
        let (cfg, assoc) = reference(Strategy::A);
        let mut schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
        let user = schedule.transmissions[0].streams[0].user;
        schedule.transmissions[0].streams[0].nulling = alloc::vec![user];
        assert_eq!(
            decode_check(&cfg, &assoc, &schedule),
            Err(VerifyError::SelfNulling { tx_index: 0, user })
        );

        let mut schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
        schedule.transmissions[0].streams[0].nulling = (100..106).collect();
        assert_eq!(
            decode_check(&cfg, &assoc, &schedule),
            Err(VerifyError::NullingBudget { tx_index: 0, user, size: 6, budget: 5 })
        );
    }
}
