//! Cache-aided multi-antenna downlink: placement, scheduling, verification,
//! and beamforming for networks where users share a small set of caching
//! profiles.
//!
//! A single `L`-antenna transmitter serves `K` cache-less users, each
//! attached to one of `P` shared caching profiles that hold a `γ = M/N`
//! fraction of an `N`-file library. Content placement replicates every
//! mini-file across `t̄ = Pγ` profiles, so one multicast transmission can
//! serve users from several profiles at once: cached side information
//! cancels part of the interference, transmit beamforming nulls the rest.
//!
//! The crate is organised as a pipeline:
//!
//! * [`model`] — network configuration, delivery-design rules
//!   (`β`, `Q`, strategy selection), and user-to-profile associations;
//! * [`placement`] — mini-file indexing and per-profile cache contents;
//! * [`scheduler`] — the two multicast constructions (Strategy A windows,
//!   Strategy B cyclic windows), interference-free splitting, and the
//!   unicast fallback for users beyond the service cap;
//! * [`verifier`] — independent decodability/coverage checks and the
//!   counted degrees of freedom of a concrete schedule;
//! * [`analytics`] — closed-form degrees-of-freedom expressions, the
//!   design-parameter search, and averages over user arrivals;
//! * [`beamform`] — finite-SNR evaluation: random channels, max-min
//!   beamformers, zero-forcing baselines, and symmetric-rate accounting.
//!
//! Everything is deterministic given a seed, exact where the quantity is
//! rational (DoF values are `Ratio<i128>`), and `no_std`-compatible
//! (`alloc` required; the `std` feature, on by default, only widens error
//! types and is what the companion CLI uses).

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod combin;
pub mod placement;
pub mod model;
pub mod scheduler;
pub mod verifier;
pub mod analytics;
pub mod beamform;

pub use placement::{cache_contents, missing_subpackets, subpacketization, MiniFileIndex, SubpacketId};
pub use scheduler::{
    full_schedule, uc_schedule, Origin, Schedule, ScheduleError, SchedulerOptions, Stream,
    Transmission, TxKind,
};
pub use verifier::{count_dof, coverage_check, decode_check, VerifyError};
pub use analytics::{
    dof_closed_form, dof_m_average, dof_max_search, dof_terms, lemma1, nocc_dof,
    CompositionMode, DofSearch, DofTerms, SearchPick, SigmaPoint,
};
pub use model::{
    association_from_lengths, choose_design, random_composition, sigma, sigma_key, validate_config,
    Association, AssociationError, ConfigError, DesignChoice, NetworkConfig, Strategy,
};
pub use beamform::{
    draw_channels, draw_channels_stream, maxmin_solve, nocc_rate, nocc_rate_trial, sinr,
    solve_transmission, subpackets_per_file, symmetric_rate, symmetric_rate_trial,
    transmission_rate, two_user_grid_oracle, visibility_sets, zf_precoders, BeamSolution,
    BeamformError, ChannelSet, RateReport,
};
