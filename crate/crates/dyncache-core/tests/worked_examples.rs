//! Exact reproduction of the two worked reference networks through the
//! public pipeline: window lists, served sets, per-stream mini-file
//! indices, interference-free splits, nulling sets, end-to-end schedule
//! totals, and counted-vs-closed-form degrees of freedom.
//!
//! Both networks share P = 3 profiles, γ = 1/3, lengths (5, 4, 3), α = 6,
//! η̂ = 4, Q = 3; the first runs the window-concatenation multicast
//! construction (β = 3), the second the merge-based construction (β = 4).

use dyncache_core::scheduler::{
    build_tx_a, build_tx_b, elevate_a, enumerate_quintuples, enumerate_triples, QCounter,
};
use dyncache_core::{
    association_from_lengths, count_dof, coverage_check, decode_check, dof_closed_form,
    full_schedule, validate_config, Association, NetworkConfig, SchedulerOptions, Strategy,
    Transmission, TxKind,
};
use num_rational::Ratio;

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
    validate_config(&cfg).expect("reference configuration is valid");
    let assoc = association_from_lengths(&cfg, &[5, 4, 3]).unwrap();
    (cfg, assoc)
}

/// `(user, Λ)` pairs of a transmission, sorted for set comparison.
fn stream_pairs(tx: &Transmission) -> Vec<(u32, Vec<usize>)> {
    let mut pairs: Vec<(u32, Vec<usize>)> = tx
        .streams
        .iter()
        .map(|s| (s.user, s.lambda.clone()))
        .collect();
    pairs.sort();
    pairs
}

fn nulling_of(tx: &Transmission, user: u32) -> Vec<u32> {
    tx.streams
        .iter()
        .find(|s| s.user == user)
        .expect("user is served")
        .nulling
        .clone()
}

#[test]
fn window_lists_of_the_first_network() {
    let (cfg, assoc) = reference(Strategy::A);
    let windows = elevate_a(&cfg, &assoc);

    // Profile 1 overflows the window size (δ = 4 > β = 3): four circular
    // 3-windows over {1,2,3,4}. User 5 is excluded up front (η̂ = 4).
    assert_eq!(
        windows[0],
        vec![vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 1], vec![4, 1, 2]]
    );
    // Profile 2 likewise: circular windows over {6,7,8,9}.
    assert_eq!(
        windows[1],
        vec![vec![6, 7, 8], vec![7, 8, 9], vec![8, 9, 6], vec![9, 6, 7]]
    );
    // Profile 3 fits in one window (δ = 3 ≤ β): three full copies, padded
    // with one empty window to the η̂ slots.
    assert_eq!(
        windows[2],
        vec![vec![10, 11, 12], vec![10, 11, 12], vec![10, 11, 12], vec![]]
    );
}

#[test]
fn first_network_reference_triple_and_split() {
    let (cfg, assoc) = reference(Strategy::A);
    let windows = elevate_a(&cfg, &assoc);
    let triples = enumerate_triples(&cfg, &assoc);

    // P = Q = 3 leaves r = 1 as the only leader: four triples, one per
    // window index, none silent.
    let coords: Vec<(usize, usize, u64)> = triples.iter().map(|t| (t.r, t.c, t.l)).collect();
    assert_eq!(coords, vec![(1, 1, 1), (1, 2, 1), (1, 3, 1), (1, 4, 1)]);
    assert!(triples.iter().all(|t| !t.silent));

    let mut counter = QCounter::new(&cfg);
    let subs = build_tx_a(&cfg, &assoc, &windows, &triples[0], &mut counter).unwrap();

    // ν₂ = C(2,1) = 2 interference-free sub-transmissions, both serving
    // the concatenation of the first windows of all three profiles.
    assert_eq!(subs.len(), 2);
    for sub in &subs {
        assert_eq!(sub.kind, TxKind::CcA);
        assert_eq!(sub.served, vec![1, 2, 3, 6, 7, 8, 10, 11, 12]);
        assert_eq!(sub.streams.len(), 9);
    }

    // First split part: profiles 2 and 3 receive mini-file index {1},
    // profile 1 receives {2}.
    assert_eq!(
        stream_pairs(&subs[0]),
        vec![
            (1, vec![2]),
            (2, vec![2]),
            (3, vec![2]),
            (6, vec![1]),
            (7, vec![1]),
            (8, vec![1]),
            (10, vec![1]),
            (11, vec![1]),
            (12, vec![1]),
        ]
    );
    // Second split part: profile 3 moves to {2}, profiles 1 and 2 to {3}.
    assert_eq!(
        stream_pairs(&subs[1]),
        vec![
            (1, vec![3]),
            (2, vec![3]),
            (3, vec![3]),
            (6, vec![3]),
            (7, vec![3]),
            (8, vec![3]),
            (10, vec![2]),
            (11, vec![2]),
            (12, vec![2]),
        ]
    );

    // User 1's spatial-nulling targets, one set per carried index.
    assert_eq!(nulling_of(&subs[0], 1), vec![2, 3, 10, 11, 12]);
    assert_eq!(nulling_of(&subs[1], 1), vec![2, 3, 6, 7, 8]);
}

#[test]
fn first_network_end_to_end() {
    let (cfg, assoc) = reference(Strategy::A);
    let schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();

    // Four triples × two split parts; eleven multicast users × six
    // subpackets each; user 5 overflows to six single-stream unicasts.
    assert_eq!(schedule.t_m, 8);
    assert_eq!(schedule.j_m, 66);
    assert_eq!(schedule.t_u, 6);
    assert_eq!(schedule.j_u, 6);
    assert!(schedule.residual.is_empty());
    let uc_users: Vec<u32> = schedule
        .transmissions
        .iter()
        .filter(|tx| tx.kind == TxKind::Uc)
        .flat_map(|tx| tx.served.clone())
        .collect();
    assert_eq!(uc_users, vec![5; 6]);

    decode_check(&cfg, &assoc, &schedule).unwrap();
    coverage_check(&cfg, &assoc, &schedule).unwrap();
    assert_eq!(count_dof(&schedule), Ratio::new(36, 7));
    assert_eq!(dof_closed_form(&cfg, &assoc), Ratio::new(36, 7));
}

#[test]
fn second_network_reference_quintuple() {
    let (cfg, assoc) = reference(Strategy::B);
    // α = 6 splits as 1·η̂ + θ with θ = 2 leftover slots.
    assert_eq!(assoc.theta, 2);

    let quintuples = enumerate_quintuples(&cfg, &assoc);
    let first = quintuples
        .iter()
        .find(|q| (q.r, q.c, q.l, q.m, q.s) == (1, 1, 1, 1, 1))
        .expect("leading quintuple exists");
    assert!(first.active);

    let mut counter = QCounter::new(&cfg);
    let subs = build_tx_b(&cfg, &assoc, first, &mut counter).unwrap();
    // ν₁ = C(1,0) = 1: no further split needed.
    assert_eq!(subs.len(), 1);
    let tx = &subs[0];
    assert_eq!(tx.kind, TxKind::CcB);

    // Served: the θ-window {1,2} of profile 1 plus the full service sets
    // of profiles 2 and 3 (the phantom padding profile 3 up to η̂ never
    // appears).
    assert_eq!(tx.served, vec![1, 2, 6, 7, 8, 9, 10, 11, 12]);
    let profile1_users: Vec<u32> = tx.served.iter().copied().filter(|&u| u <= 5).collect();
    assert_eq!(profile1_users, vec![1, 2]);

    // Merge structure: profiles 1 and 2 are paired (index {3}), profile 3
    // stands alone (index {2}).
    assert_eq!(
        stream_pairs(tx),
        vec![
            (1, vec![3]),
            (2, vec![3]),
            (6, vec![3]),
            (7, vec![3]),
            (8, vec![3]),
            (9, vec![3]),
            (10, vec![2]),
            (11, vec![2]),
            (12, vec![2]),
        ]
    );

    // Nulling sets of the two pinned receivers.
    assert_eq!(nulling_of(tx, 6), vec![1, 2, 7, 8, 9]);
    assert_eq!(nulling_of(tx, 10), vec![1, 2, 11, 12]);
}

#[test]
fn second_network_end_to_end() {
    let (cfg, assoc) = reference(Strategy::B);
    let schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();

    // Eleven multicast users × twenty subpackets; user 5's twenty
    // subpackets go out one at a time.
    assert_eq!(schedule.t_m, 24);
    assert_eq!(schedule.j_m, 220);
    assert_eq!(schedule.t_u, 20);
    assert_eq!(schedule.j_u, 20);
    assert!(schedule.residual.is_empty());

    decode_check(&cfg, &assoc, &schedule).unwrap();
    coverage_check(&cfg, &assoc, &schedule).unwrap();
    assert_eq!(count_dof(&schedule), Ratio::new(60, 11));
    assert_eq!(dof_closed_form(&cfg, &assoc), Ratio::new(60, 11));
}
