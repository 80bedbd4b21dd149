//! Finite-SNR layer: Rayleigh channel generation, max-min optimized
//! multicast beamformers, a zero-forcing baseline, and the symmetric-rate
//! aggregate over a whole schedule.
//!
//! # Signal model
//!
//! Every stream of a transmission gets a length-`L` beamformer. The SINR
//! at a served user divides its own beamformed power by noise plus the
//! power of every stream the user cannot cancel from cache: a stream is
//! invisible to a user exactly when the user's profile is inside the
//! stream's mini-file index `Λ` — the same cancellation rule the decode
//! verifier enforces, so [`visibility_sets`] is its mirror image.
//!
//! # Max-min solver
//!
//! Per transmission we maximize the worst *weighted* rate `μ_k·R_k`
//! subject to the sum-power budget, where `μ_k` is the number of
//! subpackets a full file splits into (so `1/μ_k` is the file fraction a
//! stream carries, and `μ_k R_k` is a full-file delivery rate). The
//! solver bisects the common target `R_e`; each candidate is checked by
//! the uplink-downlink duality fixed point
//! `λ_k ← ω_k/(ω_k+1) · (h_k^H Σ_k^{-1} h_k)^{-1}` with
//! `Σ_k = I + Σ_{j∈G_k∪{k}} λ_j h_j h_j^H`, `ω_k = 2^{R_e/μ_k} − 1`,
//! followed by the SINR-equalization power solve
//! `(I − D F) p = N0·D·1` — feasible iff the powers are nonnegative and
//! fit the budget.
//!
//! # Symmetric rate
//!
//! A transmission whose per-stream payload is `1/μ` of a file and whose
//! worst served user decodes at `R_n` bits/s/Hz occupies the channel for
//! `1/(μ R_n)` file-normalized time units. A complete schedule therefore
//! delivers every user's request in `Σ_n 1/(μ R_n)` units, and the
//! symmetric per-user rate is its reciprocal `μ·(Σ_n 1/R_n)^{-1}`. The
//! no-coded-caching baseline pools the `(1−γ)K` unit demands into
//! full-rate groups of `min(α,K)` streams and aggregates the same way.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_rational::Ratio;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::combin::binomial;
use crate::model::{Association, NetworkConfig};
use crate::placement::subpacketization;
use crate::scheduler::{Schedule, Transmission};

#[cfg(not(any(feature = "std", test)))]
use num_traits::Float as _; // f64 methods without std

/// Bisection / fixed-point tolerance default, in weighted-rate bits.
pub const DEFAULT_TOL: f64 = 1e-4;
/// Fixed-point iteration budget default.
pub const DEFAULT_MAX_ITER: usize = 2_000;

type Cvec = DVector<Complex<f64>>;

/// One independent block-fading channel draw: a length-`L` vector per
/// user, each component circularly-symmetric complex normal with unit
/// variance (real and imaginary parts each variance 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Channel vector per user id.
    pub h: BTreeMap<u32, Cvec>,
    /// Seed the set was drawn from (metadata for reproducibility).
    pub rng_seed: u64,
}

/// Beamformers for one transmission: directions scaled by allocated
/// power, plus the solver by-products.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSolution {
    /// Scaled beamformer per stream, aligned with the stream order.
    pub w: Vec<Cvec>,
    /// Transmit power per stream (`‖w_k‖² = powers[k]`).
    pub powers: Vec<f64>,
    /// Weighted-rate target the solver settled on (`R_e = μ_k R_k`).
    pub target_rate: f64,
    /// Converged dual variables, one per stream (zero for baselines).
    pub duals: Vec<f64>,
    /// SINR targets `ω_k = 2^{R_e/μ_k} − 1` at the final target.
    pub omegas: Vec<f64>,
    /// Full-file subpacket count per stream (the rate weight).
    pub mu: Vec<f64>,
}

/// Beamforming-layer failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeamformError {
    /// The duality fixed point stalled before reaching the tolerance.
    #[error("fixed point stalled after {iterations} iterations (target {target_rate}, residual {residual})")]
    NonConvergence {
        iterations: usize,
        target_rate: f64,
        residual: f64,
    },
    /// No positive target was feasible — impossible for a positive power
    /// budget; indicates corrupted inputs.
    #[error("no positive weighted-rate target is feasible")]
    InfeasibleZero,
    /// A zero-forcing constraint set spans the whole antenna space.
    #[error("stream {stream} must null {victims} users but only {antennas} antennas are available")]
    RankDeficiency {
        stream: usize,
        victims: usize,
        antennas: usize,
    },
    /// A served user has no channel vector in the provided set.
    #[error("no channel drawn for user {user}")]
    MissingChannel { user: u32 },
    /// A transmission decoded at rate zero, so the harmonic aggregate
    /// diverges.
    #[error("transmission {tx_index} has zero worst-user rate")]
    DegenerateRate { tx_index: usize },
}

/// Draw one channel set: deterministic per `(seed)`, users filled in
/// ascending id order.
pub fn draw_channels(users: &[u32], l: usize, seed: u64) -> ChannelSet {
    draw_channels_stream(users, l, seed, 0)
}

/// Draw the channel set for one Monte-Carlo work unit. Distinct `stream`
/// values yield independent draws under the same seed, which keeps
/// per-(trial, transmission) channels reproducible regardless of
/// execution order.
pub fn draw_channels_stream(users: &[u32], l: usize, seed: u64, stream: u64) -> ChannelSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut sorted: Vec<u32> = users.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut h = BTreeMap::new();
    for user in sorted {
        let v = Cvec::from_fn(l, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(re * core::f64::consts::FRAC_1_SQRT_2, im * core::f64::consts::FRAC_1_SQRT_2)
        });
        h.insert(user, v);
    }
    ChannelSet { h, rng_seed: seed }
}

/// Interference index sets per stream: `visible[k]` lists the streams
/// user `k` cannot cancel from cache — exactly those whose mini-file
/// index misses the user's profile. Mirrors the decode verifier's rule,
/// so on a verified schedule `j ∈ visible[k]` iff user `k` is in stream
/// `j`'s nulling set.
pub fn visibility_sets(assoc: &Association, tx: &Transmission) -> Vec<Vec<usize>> {
    tx.streams
        .iter()
        .map(|victim| {
            let profile = assoc.profile_of(victim.user);
            tx.streams
                .iter()
                .enumerate()
                .filter(|(_, other)| {
                    other.user != victim.user && !other.lambda.contains(&profile)
                })
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

/// Subpackets per full file under the active delivery configuration —
/// the weight turning a per-stream rate into a full-file delivery rate.
pub fn subpackets_per_file(cfg: &NetworkConfig) -> u64 {
    binomial(cfg.profiles, cfg.t_bar()) * subpacketization(cfg)
}

/// SINR of stream `k` under the given beamformers: own beamformed power
/// over noise plus the power of every visible interferer.
pub fn sinr(k: usize, solution: &BeamSolution, h: &[Cvec], visible: &[Vec<usize>], n0: f64) -> f64 {
    let signal = h[k].dotc(&solution.w[k]).norm_sqr();
    let interference: f64 = visible[k]
        .iter()
        .map(|&j| h[k].dotc(&solution.w[j]).norm_sqr())
        .sum();
    signal / (interference + n0)
}

/// Worst served user's plain (unweighted) rate in bits/s/Hz.
pub fn transmission_rate(solution: &BeamSolution, h: &[Cvec], visible: &[Vec<usize>], n0: f64) -> f64 {
    (0..h.len())
        .map(|k| (1.0 + sinr(k, solution, h, visible, n0)).log2())
        .fold(f64::INFINITY, f64::min)
}

/// Maximize the worst weighted rate `μ_k R_k` for one transmission.
///
/// `h[k]` is the served user's channel, `visible[k]` its interference
/// index set, `mu[k]` its rate weight. Bisects the weighted target over
/// `[0, min_k μ_k · log2(1 + P_T·max‖h‖²/N0)]` to within `tol`; each
/// candidate runs the duality fixed point (initialized at
/// `P_T/(K·L)`) and the equalization power solve. A candidate whose
/// duals blow up is infeasible at any power (overloaded SINR targets),
/// not a numerical failure.
pub fn maxmin_solve(
    h: &[Cvec],
    visible: &[Vec<usize>],
    mu: &[f64],
    p_t: f64,
    n0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BeamSolution, BeamformError> {
    let k_count = h.len();
    assert!(k_count > 0, "a transmission serves at least one user");
    assert!(p_t > 0.0 && n0 > 0.0 && tol > 0.0);

    // Single stream: full power along the matched-filter direction.
    if k_count == 1 {
        let norm_sq = h[0].norm_squared();
        let snr = p_t * norm_sq / n0;
        let direction = &h[0] / Complex::from(norm_sq.sqrt());
        return Ok(BeamSolution {
            w: vec![direction * Complex::from(p_t.sqrt())],
            powers: vec![p_t],
            target_rate: mu[0] * (1.0 + snr).log2(),
            duals: vec![0.0],
            omegas: vec![snr],
            mu: mu.to_vec(),
        });
    }

    let l = h[0].nrows();
    let max_gain = h.iter().map(|v| v.norm_squared()).fold(0.0, f64::max);
    let mu_min = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = 0.0;
    let mut hi = mu_min * (1.0 + p_t * max_gain / n0).log2();
    let lambda0 = vec![p_t / (k_count as f64 * l as f64); k_count];
    let mut best: Option<Candidate> = None;

    while hi - lo > tol {
        let target = 0.5 * (lo + hi);
        match evaluate_target(h, visible, mu, p_t, n0, tol, max_iter, target, &lambda0, None)? {
            Some(candidate) => {
                best = Some(candidate);
                lo = target;
            }
            None => hi = target,
        }
    }

    let found = match best {
        Some(c) => c,
        // The bracket collapsed without one feasible candidate; a
        // vanishing target needs vanishing power, so only broken inputs
        // land here. Probe once at the floor to tell the two apart.
        None => {
            evaluate_target(h, visible, mu, p_t, n0, tol, max_iter, lo.max(tol), &lambda0, None)?
                .ok_or(BeamformError::InfeasibleZero)?
        }
    };

    let w = found
        .directions
        .iter()
        .zip(&found.powers)
        .map(|(dir, &p)| dir * Complex::from(p.sqrt()))
        .collect();
    Ok(BeamSolution {
        w,
        powers: found.powers,
        target_rate: found.target,
        duals: found.duals,
        omegas: found.omegas,
        mu: mu.to_vec(),
    })
}

struct Candidate {
    target: f64,
    duals: Vec<f64>,
    omegas: Vec<f64>,
    directions: Vec<Cvec>,
    powers: Vec<f64>,
}

/// Check one weighted-rate target: duality fixed point, normalized
/// directions, equalization powers. `Ok(None)` means infeasible.
/// `trace`, when given, records the sweep residuals `max_k |Δλ_k|`.
#[allow(clippy::too_many_arguments)]
fn evaluate_target(
    h: &[Cvec],
    visible: &[Vec<usize>],
    mu: &[f64],
    p_t: f64,
    n0: f64,
    tol: f64,
    max_iter: usize,
    target: f64,
    lambda0: &[f64],
    mut trace: Option<&mut Vec<f64>>,
) -> Result<Option<Candidate>, BeamformError> {
    let k_count = h.len();
    let omegas: Vec<f64> = mu.iter().map(|&m| (target / m).exp2() - 1.0).collect();
    let blowup = 1e8 * (1.0 + p_t);

    // Users sharing an interference closure share Σ; factor each closure
    // once per sweep.
    let mut closures: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for k in 0..k_count {
        let mut closure = visible[k].clone();
        closure.push(k);
        closure.sort_unstable();
        closures.entry(closure).or_default().push(k);
    }

    let mut lambda = lambda0.to_vec();
    let mut quad = vec![0.0; k_count];
    let mut converged = false;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        sweep_quadratic_forms(h, &closures, &lambda, &mut quad);
        residual = 0.0;
        let mut scale = 1.0_f64;
        for k in 0..k_count {
            let next = omegas[k] / (omegas[k] + 1.0) / quad[k];
            residual = residual.max((next - lambda[k]).abs());
            scale = scale.max(next);
            lambda[k] = next;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(residual);
        }
        if lambda.iter().any(|&x| x > blowup) {
            return Ok(None); // unbounded duals: target unreachable at any power
        }
        if residual < tol * scale.max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(BeamformError::NonConvergence {
            iterations: max_iter,
            target_rate: target,
            residual,
        });
    }

    // Normalized directions from the converged duals.
    let mut directions = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut sigma = DMatrix::identity(h[0].nrows(), h[0].nrows());
        for &j in visible[k].iter().chain(core::iter::once(&k)) {
            sigma += &h[j] * h[j].adjoint() * Complex::from(lambda[j]);
        }
        let solved = solve_hermitian(&sigma, &h[k]);
        let norm = solved.norm();
        directions.push(solved / Complex::from(norm));
    }

    // Powers from SINR equalization: (I − D F) p = N0 · D · 1.
    let gain = |k: usize, j: usize| h[k].dotc(&directions[j]).norm_sqr();
    let mut a = DMatrix::<f64>::identity(k_count, k_count);
    let mut rhs = DVector::<f64>::zeros(k_count);
    for k in 0..k_count {
        let d_k = omegas[k] / gain(k, k);
        for &j in &visible[k] {
            a[(k, j)] -= d_k * gain(k, j);
        }
        rhs[k] = n0 * d_k;
    }
    let powers = match a.lu().solve(&rhs) {
        Some(p) => p,
        None => return Ok(None),
    };
    if powers.iter().any(|&p| p < -1e-9) || powers.sum() > p_t * (1.0 + 1e-9) {
        return Ok(None);
    }
    Ok(Some(Candidate {
        target,
        duals: lambda,
        omegas,
        directions,
        powers: powers.iter().map(|&p| p.max(0.0)).collect(),
    }))
}

/// One fixed-point sweep: factor Σ per closure, fill
/// `quad[k] = h_k^H Σ^{-1} h_k` for every member.
fn sweep_quadratic_forms(
    h: &[Cvec],
    closures: &BTreeMap<Vec<usize>, Vec<usize>>,
    lambda: &[f64],
    quad: &mut [f64],
) {
    let l = h[0].nrows();
    for (closure, members) in closures {
        let mut sigma = DMatrix::identity(l, l);
        for &j in closure {
            sigma += &h[j] * h[j].adjoint() * Complex::from(lambda[j]);
        }
        let factor = sigma.clone().cholesky();
        for &k in members {
            let x = match &factor {
                Some(chol) => chol.solve(&h[k]),
                None => solve_hermitian(&sigma, &h[k]),
            };
            quad[k] = h[k].dotc(&x).re;
        }
    }
}

/// Solve `sigma · x = b` for a Hermitian positive-definite `sigma`,
/// falling back to LU when Cholesky rejects a borderline matrix.
fn solve_hermitian(sigma: &DMatrix<Complex<f64>>, b: &Cvec) -> Cvec {
    if let Some(chol) = sigma.clone().cholesky() {
        return chol.solve(b);
    }
    sigma
        .clone()
        .lu()
        .solve(b)
        .expect("shifted Gram matrix is invertible")
}

/// Zero-forcing baseline: each stream's direction is its user's channel
/// projected onto the null space of the channels it must suppress, with
/// the budget split equally. `victims[j]` lists the stream indices whose
/// users stream `j` must not reach.
pub fn zf_precoders(h: &[Cvec], victims: &[Vec<usize>], mu: &[f64], p_t: f64) -> Result<BeamSolution, BeamformError> {
    let k_count = h.len();
    let l = h[0].nrows();
    let per_stream = p_t / k_count as f64;
    let mut w = Vec::with_capacity(k_count);
    for j in 0..k_count {
        if victims[j].len() >= l {
            return Err(BeamformError::RankDeficiency {
                stream: j,
                victims: victims[j].len(),
                antennas: l,
            });
        }
        let mut direction = h[j].clone();
        if !victims[j].is_empty() {
            // Project out span{h_v}: direction ← (I − B(BᴴB)⁻¹Bᴴ) h_j.
            let basis = DMatrix::from_columns(
                &victims[j].iter().map(|&v| h[v].clone()).collect::<Vec<_>>(),
            );
            let gram = basis.adjoint() * &basis;
            let coeffs = gram
                .lu()
                .solve(&(basis.adjoint() * &direction))
                .ok_or(BeamformError::RankDeficiency {
                    stream: j,
                    victims: victims[j].len(),
                    antennas: l,
                })?;
            direction -= basis * coeffs;
        }
        let norm = direction.norm();
        if norm < 1e-9 {
            return Err(BeamformError::RankDeficiency {
                stream: j,
                victims: victims[j].len(),
                antennas: l,
            });
        }
        w.push(direction * Complex::from(per_stream.sqrt() / norm));
    }
    Ok(BeamSolution {
        w,
        powers: vec![per_stream; k_count],
        target_rate: 0.0,
        duals: vec![0.0; k_count],
        omegas: vec![0.0; k_count],
        mu: mu.to_vec(),
    })
}

/// Mean and standard error of a Monte-Carlo rate estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    /// Per-trial symmetric rates, in trial order.
    pub samples: Vec<f64>,
}

impl RateReport {
    fn from_samples(samples: Vec<f64>) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>()
                / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        RateReport { mean, stderr, trials: n, samples }
    }
}

/// Solve the beamformers for one schedule transmission against one
/// channel set, with the configuration's power budget and noise floor.
pub fn solve_transmission(
    cfg: &NetworkConfig,
    assoc: &Association,
    tx: &Transmission,
    channels: &ChannelSet,
    tol: f64,
    max_iter: usize,
) -> Result<BeamSolution, BeamformError> {
    let h = transmission_channels(tx, channels)?;
    let visible = visibility_sets(assoc, tx);
    let mu = vec![subpackets_per_file(cfg) as f64; h.len()];
    maxmin_solve(&h, &visible, &mu, cfg.total_power, cfg.noise_power, tol, max_iter)
}

fn transmission_channels(tx: &Transmission, channels: &ChannelSet) -> Result<Vec<Cvec>, BeamformError> {
    tx.streams
        .iter()
        .map(|s| {
            channels
                .h
                .get(&s.user)
                .cloned()
                .ok_or(BeamformError::MissingChannel { user: s.user })
        })
        .collect()
}

/// Symmetric per-user rate of one Monte-Carlo trial: independent
/// channels per transmission, optimized beamformers, harmonic
/// aggregation scaled to full-file units.
pub fn symmetric_rate_trial(
    cfg: &NetworkConfig,
    assoc: &Association,
    schedule: &Schedule,
    seed: u64,
    trial: u64,
) -> Result<f64, BeamformError> {
    let mu_file = subpackets_per_file(cfg) as f64;
    let mut inverse_sum = 0.0;
    for (n, tx) in schedule.transmissions.iter().enumerate() {
        let users: Vec<u32> = tx.streams.iter().map(|s| s.user).collect();
        let channels =
            draw_channels_stream(&users, cfg.antennas, seed, (trial << 32) | n as u64);
        let solution = solve_transmission(cfg, assoc, tx, &channels, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let h = transmission_channels(tx, &channels)?;
        let visible = visibility_sets(assoc, tx);
        let rate = transmission_rate(&solution, &h, &visible, cfg.noise_power);
        if rate <= 0.0 {
            return Err(BeamformError::DegenerateRate { tx_index: n });
        }
        inverse_sum += 1.0 / rate;
    }
    Ok(mu_file / inverse_sum)
}

/// Monte-Carlo symmetric rate of a verified schedule: `trials`
/// independent trials aggregated in trial order.
pub fn symmetric_rate(
    cfg: &NetworkConfig,
    assoc: &Association,
    schedule: &Schedule,
    trials: usize,
    seed: u64,
) -> Result<RateReport, BeamformError> {
    let mut samples = Vec::with_capacity(trials);
    for trial in 0..trials {
        samples.push(symmetric_rate_trial(cfg, assoc, schedule, seed, trial as u64)?);
    }
    Ok(RateReport::from_samples(samples))
}

/// One trial of the no-coded-caching baseline: the `(1−γ)K` unit demands
/// are pooled into full groups of `min(α, K)` simultaneous streams (the
/// last group weighted by its fractional fill), every stream interferes
/// with every other, and each group is solved max-min with unit weight.
pub fn nocc_rate_trial(
    k: usize,
    alpha: usize,
    gamma: Ratio<u64>,
    l: usize,
    p_t: f64,
    n0: f64,
    seed: u64,
    trial: u64,
) -> Result<f64, BeamformError> {
    assert!(k > 0 && alpha > 0);
    let gamma_f = *gamma.numer() as f64 / *gamma.denom() as f64;
    let streams = alpha.min(k);
    let units = (1.0 - gamma_f) * k as f64 / streams as f64;
    let group_count = units.ceil() as usize;
    let mut inverse_sum = 0.0;
    for g in 0..group_count {
        let users: Vec<u32> = (0..streams)
            .map(|i| ((g * streams + i) % k) as u32 + 1)
            .collect();
        let channels = draw_channels_stream(&users, l, seed, (trial << 32) | g as u64);
        let h: Vec<Cvec> = users.iter().map(|u| channels.h[u].clone()).collect();
        let visible: Vec<Vec<usize>> = (0..streams)
            .map(|i| (0..streams).filter(|&j| j != i).collect())
            .collect();
        let mu = vec![1.0; streams];
        let solution = maxmin_solve(&h, &visible, &mu, p_t, n0, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let rate = transmission_rate(&solution, &h, &visible, n0);
        if rate <= 0.0 {
            return Err(BeamformError::DegenerateRate { tx_index: g });
        }
        let weight = (units - g as f64).min(1.0);
        inverse_sum += weight / rate;
    }
    Ok(1.0 / inverse_sum)
}

/// Monte-Carlo symmetric rate of the no-coded-caching baseline.
#[allow(clippy::too_many_arguments)]
pub fn nocc_rate(
    k: usize,
    alpha: usize,
    gamma: Ratio<u64>,
    l: usize,
    p_t: f64,
    n0: f64,
    trials: usize,
    seed: u64,
) -> Result<RateReport, BeamformError> {
    let mut samples = Vec::with_capacity(trials);
    for trial in 0..trials {
        samples.push(nocc_rate_trial(k, alpha, gamma, l, p_t, n0, seed, trial as u64)?);
    }
    Ok(RateReport::from_samples(samples))
}

/// Exhaustive two-stream reference: mixing coefficients for both
/// precoders on a `steps`-point grid (cross phases anti-aligned, which
/// only reduces interference and never touches signal power), power
/// split equalizing the two SINRs solved exactly at each grid point.
/// Returns the best worst weighted rate found; used to validate the
/// iterative solver on the smallest nontrivial instances.
pub fn two_user_grid_oracle(h: &[Cvec], mu: &[f64], p_t: f64, n0: f64, steps: usize) -> f64 {
    assert_eq!(h.len(), 2);
    // Per stream j with victim v: in the {own-channel, in-plane ⊥} basis,
    // mixing fraction t puts signal ‖h_j‖²(1−t) on the user and
    // (|c|√(1−t) − e√t)² on the victim, where c = ĥ_j^H h_v and e the
    // out-of-line residual magnitude.
    let geometry = |j: usize, v: usize| {
        let own = h[j].norm();
        let unit = &h[j] / Complex::from(own);
        let c = unit.dotc(&h[v]).norm();
        let e = (h[v].norm_squared() - c * c).max(0.0).sqrt();
        (own * own, c, e)
    };
    let (s1, c1, e1) = geometry(0, 1);
    let (s2, c2, e2) = geometry(1, 0);

    let mut best = 0.0_f64;
    for i1 in 0..=steps {
        let t1 = i1 as f64 / steps as f64;
        let sig1 = s1 * (1.0 - t1);
        let leak1 = {
            let a = c1 * (1.0 - t1).sqrt() - e1 * t1.sqrt();
            a * a
        };
        for i2 in 0..=steps {
            let t2 = i2 as f64 / steps as f64;
            let sig2 = s2 * (1.0 - t2);
            let leak2 = {
                let a = c2 * (1.0 - t2).sqrt() - e2 * t2.sqrt();
                a * a
            };
            // Worst weighted rate as a function of the power split q is
            // the min of an increasing and a decreasing curve; its max
            // sits at the balance point or an endpoint.
            let rate = |q: f64| {
                let g1 = q * p_t * sig1 / (n0 + (1.0 - q) * p_t * leak2);
                let g2 = (1.0 - q) * p_t * sig2 / (n0 + q * p_t * leak1);
                (mu[0] * (1.0 + g1).log2()).min(mu[1] * (1.0 + g2).log2())
            };
            let balance = balance_point(sig1, leak1, sig2, leak2, mu, p_t, n0);
            let here = rate(balance).max(rate(0.0)).max(rate(1.0));
            best = best.max(here);
        }
    }
    best
}

/// Power split equalizing the two weighted rates, found by bisection
/// (exact enough that the surrounding grid dominates the oracle error).
fn balance_point(s1: f64, l1: f64, s2: f64, l2: f64, mu: &[f64], p_t: f64, n0: f64) -> f64 {
    let diff = |q: f64| {
        let g1 = q * p_t * s1 / (n0 + (1.0 - q) * p_t * l2);
        let g2 = (1.0 - q) * p_t * s2 / (n0 + q * p_t * l1);
        mu[0] * (1.0 + g1).log2() - mu[1] * (1.0 + g2).log2()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if diff(lo) > 0.0 || diff(hi) < 0.0 {
        return if diff(lo) > 0.0 { lo } else { hi };
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if diff(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{association_from_lengths, Strategy};
    use crate::scheduler::{full_schedule, SchedulerOptions};
    use approx::assert_relative_eq;

    fn cvec(entries: &[(f64, f64)]) -> Cvec {
        Cvec::from_iterator(entries.len(), entries.iter().map(|&(re, im)| Complex::new(re, im)))
    }

    fn random_channels(l: usize, k: usize, seed: u64) -> Vec<Cvec> {
        let users: Vec<u32> = (1..=k as u32).collect();
        let set = draw_channels(&users, l, seed);
        users.iter().map(|u| set.h[u].clone()).collect()
    }

    fn mutual_visibility(k: usize) -> Vec<Vec<usize>> {
        (0..k).map(|i| (0..k).filter(|&j| j != i).collect()).collect()
    }

    #[test]
    fn channel_draws_are_deterministic_and_seed_sensitive() {
        let users = [3, 1, 7];
        let a = draw_channels(&users, 4, 42);
        let b = draw_channels(&users, 4, 42);
        assert_eq!(a, b);
        let c = draw_channels(&users, 4, 43);
        assert_ne!(a, c);
        // User order in the input must not matter.
        let d = draw_channels(&[7, 3, 1], 4, 42);
        assert_eq!(a, d);
    }

    #[test]
    fn channel_norm_matches_the_distribution() {
        let l = 10;
        let mut total = 0.0;
        for trial in 0..1_000 {
            let set = draw_channels_stream(&(1..=10).collect::<Vec<_>>(), l, 7, trial);
            total += set.h.values().map(|h| h.norm_squared()).sum::<f64>();
        }
        let mean = total / 10_000.0;
        assert!((mean - l as f64).abs() < 0.03 * l as f64, "E‖h‖² = {mean}");
    }

    #[test]
    fn single_stream_closed_form() {
        let h = cvec(&[(1.0, 0.5), (-0.3, 0.2), (0.0, 1.1)]);
        let expected = 3.0 * (1.0 + 10.0 * h.norm_squared() / 0.5).log2();
        let sol = maxmin_solve(&[h.clone()], &[vec![]], &[3.0], 10.0, 0.5, 1e-6, 100).unwrap();
        assert_relative_eq!(sol.target_rate, expected, max_relative = 1e-6);
        assert_relative_eq!(sol.powers[0], 10.0, max_relative = 1e-12);
        assert_relative_eq!(sol.w[0].norm_squared(), 10.0, max_relative = 1e-9);
    }

    #[test]
    fn orthogonal_equal_channels_split_evenly() {
        let h = [cvec(&[(2.0, 0.0), (0.0, 0.0)]), cvec(&[(0.0, 0.0), (0.0, 2.0)])];
        let tol = 1e-6;
        let sol = maxmin_solve(&h, &mutual_visibility(2), &[1.0, 1.0], 8.0, 1.0, tol, 500).unwrap();
        assert_relative_eq!(sol.powers[0], sol.powers[1], max_relative = 1e-4);
        assert!((sol.powers.iter().sum::<f64>() - 8.0).abs() < 10.0 * tol * 8.0);
        // No cross-talk, so each stream hits the single-user rate at half power.
        let expected = (1.0_f64 + 4.0 * 4.0).log2();
        assert_relative_eq!(sol.target_rate, expected, epsilon = 1e-4);
        let visible = mutual_visibility(2);
        for k in 0..2 {
            let gamma = sinr(k, &sol, &h, &visible, 1.0);
            assert_relative_eq!((1.0 + gamma).log2(), expected, epsilon = 1e-4);
        }
    }

    #[test]
    fn sinr_matches_direct_evaluation() {
        let h = random_channels(3, 2, 11);
        let visible = mutual_visibility(2);
        let sol = maxmin_solve(&h, &visible, &[1.0, 1.0], 5.0, 1.0, 1e-5, 2_000).unwrap();
        for k in 0..2 {
            let j = 1 - k;
            let signal = h[k].dotc(&sol.w[k]).norm_sqr();
            let interference = h[k].dotc(&sol.w[j]).norm_sqr();
            let direct = signal / (interference + 1.0);
            assert_relative_eq!(sinr(k, &sol, &h, &visible, 1.0), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn weighted_rates_equalize_and_power_binds() {
        let tol = 1e-5;
        for seed in 0..6 {
            let k = 2 + (seed as usize % 3);
            let h = random_channels(4, k, 100 + seed);
            let visible = mutual_visibility(k);
            let mu: Vec<f64> = (0..k).map(|i| 1.0 + i as f64).collect();
            let sol = maxmin_solve(&h, &visible, &mu, 20.0, 1.0, tol, 5_000).unwrap();
            let rates: Vec<f64> = (0..k)
                .map(|i| mu[i] * (1.0 + sinr(i, &sol, &h, &visible, 1.0)).log2())
                .collect();
            for &r in &rates {
                assert!((r - sol.target_rate).abs() < 10.0 * tol * sol.target_rate.max(1.0),
                    "seed {seed}: weighted rate {r} vs target {}", sol.target_rate);
            }
            let total: f64 = sol.powers.iter().sum();
            assert!(total <= 20.0 * (1.0 + 1e-9));
            assert!((total - 20.0).abs() < 10.0 * tol * 20.0, "seed {seed}: Σp = {total}");
        }
    }

    #[test]
    fn dual_residuals_eventually_decrease() {
        let h = random_channels(4, 3, 77);
        let visible = mutual_visibility(3);
        let mu = vec![1.0; 3];
        let sol = maxmin_solve(&h, &visible, &mu, 10.0, 1.0, 1e-5, 5_000).unwrap();
        // Re-run the dual fixed point at a comfortably feasible target and
        // check the sweep residuals settle into a decreasing tail.
        let lambda0 = vec![10.0 / 12.0; 3];
        let mut trace = Vec::new();
        let result = evaluate_target(
            &h, &visible, &mu, 10.0, 1.0, 1e-8, 10_000,
            0.8 * sol.target_rate, &lambda0, Some(&mut trace),
        )
        .unwrap();
        assert!(result.is_some(), "0.8× the optimum must stay feasible");
        assert!(trace.len() >= 4, "trace too short: {trace:?}");
        let tail = &trace[trace.len() / 2..];
        for pair in tail.windows(2) {
            assert!(
                pair[1] <= pair[0] * (1.0 + 1e-9),
                "residual rose in the tail: {pair:?}"
            );
        }
    }

    #[test]
    fn objective_is_monotone_in_the_budget() {
        let h = random_channels(3, 3, 5);
        let visible = mutual_visibility(3);
        let mu = vec![1.0; 3];
        let mut last = 0.0;
        for p_t in [1.0, 5.0, 25.0, 125.0] {
            let sol = maxmin_solve(&h, &visible, &mu, p_t, 1.0, 1e-5, 5_000).unwrap();
            assert!(sol.target_rate >= last - 1e-6, "P_T={p_t}");
            last = sol.target_rate;
        }
    }

    #[test]
    fn zero_forcing_annihilates_its_victims() {
        let h = random_channels(3, 3, 9);
        let victims = vec![vec![1, 2], vec![0], vec![]];
        let sol = zf_precoders(&h, &victims, &[1.0; 3], 6.0).unwrap();
        for (j, vs) in victims.iter().enumerate() {
            for &v in vs {
                assert!(h[v].dotc(&sol.w[j]).norm() < 1e-10, "stream {j} leaks into {v}");
            }
            assert_relative_eq!(sol.powers[j], 2.0, max_relative = 1e-12);
        }
        // Stream 2 nulls nobody: matched-filter direction.
        let mrt = &h[2] / Complex::from(h[2].norm());
        let corr = mrt.dotc(&sol.w[2]).norm() / sol.w[2].norm();
        assert_relative_eq!(corr, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_forcing_reports_rank_deficiency() {
        let h = random_channels(2, 3, 13);
        let victims = vec![vec![1, 2], vec![0], vec![]];
        match zf_precoders(&h, &victims, &[1.0; 3], 6.0) {
            Err(BeamformError::RankDeficiency { stream: 0, victims: 2, antennas: 2 }) => {}
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn optimized_beats_zero_forcing() {
        for seed in 0..8 {
            let k = 3;
            let h = random_channels(4, k, 200 + seed);
            let visible = mutual_visibility(k);
            let mu = vec![1.0; k];
            let opt = maxmin_solve(&h, &visible, &mu, 10.0, 1.0, 1e-5, 5_000).unwrap();
            let zf = zf_precoders(&h, &visible, &mu, 10.0).unwrap();
            let zf_rate = (0..k)
                .map(|i| (1.0 + sinr(i, &zf, &h, &visible, 1.0)).log2())
                .fold(f64::INFINITY, f64::min);
            assert!(
                opt.target_rate >= zf_rate - 1e-6,
                "seed {seed}: optimized {} < ZF {zf_rate}",
                opt.target_rate
            );
        }
    }

    #[test]
    fn grid_oracle_confirms_the_solver() {
        for seed in [31, 32] {
            let h = random_channels(2, 2, seed);
            let mu = vec![1.0, 1.0];
            let sol = maxmin_solve(&h, &mutual_visibility(2), &mu, 10.0, 1.0, 1e-5, 5_000).unwrap();
            let oracle = two_user_grid_oracle(&h, &mu, 10.0, 1.0, 1_000);
            assert!(
                (sol.target_rate - oracle).abs() <= 1e-2,
                "seed {seed}: solver {} vs oracle {oracle}",
                sol.target_rate
            );
        }
    }

    #[test]
    fn visibility_mirrors_the_nulling_sets() {
        for strategy in [Strategy::A, Strategy::B] {
            let beta = if strategy == Strategy::A { 3 } else { 4 };
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
            let schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
            for tx in &schedule.transmissions {
                let visible = visibility_sets(&assoc, tx);
                for (k, stream_k) in tx.streams.iter().enumerate() {
                    for (j, stream_j) in tx.streams.iter().enumerate() {
                        if j == k {
                            continue;
                        }
                        let nulled = stream_j.nulling.binary_search(&stream_k.user).is_ok();
                        assert_eq!(
                            visible[k].contains(&j),
                            nulled,
                            "tx {} victim {} stream {}",
                            tx.origin.label(),
                            stream_k.user,
                            stream_j.user
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_rate_is_deterministic() {
        let cfg = NetworkConfig {
            antennas: 2,
            files: 3,
            cache_size: 2,
            profiles: 3,
            alpha: 2,
            eta_hat: 3,
            beta: 2,
            q: 3,
            strategy: Strategy::A,
            noise_power: 1.0,
            total_power: 10.0,
        };
        let assoc = association_from_lengths(&cfg, &[2, 2, 1]).unwrap();
        let schedule = full_schedule(&cfg, &assoc, SchedulerOptions::default()).unwrap();
        let a = symmetric_rate(&cfg, &assoc, &schedule, 4, 99).unwrap();
        let b = symmetric_rate(&cfg, &assoc, &schedule, 4, 99).unwrap();
        assert_eq!(a.samples, b.samples);
        assert!(a.mean > 0.0);
        assert!(a.stderr >= 0.0);
        let c = symmetric_rate(&cfg, &assoc, &schedule, 4, 100).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn nocc_single_user_is_plain_unicast() {
        let l = 4;
        let report = nocc_rate(1, 3, Ratio::new(0, 1), l, 10.0, 1.0, 3, 17).unwrap();
        for (trial, sample) in report.samples.iter().enumerate() {
            let set = draw_channels_stream(&[1], l, 17, (trial as u64) << 32);
            let expected = (1.0 + 10.0 * set.h[&1].norm_squared()).log2();
            assert_relative_eq!(*sample, expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn nocc_pools_demands_into_full_groups() {
        // K=4, α=2, γ=1/2: two unit demands pooled into one 2-stream group.
        let report = nocc_rate(4, 2, Ratio::new(1, 2), 4, 10.0, 1.0, 2, 23).unwrap();
        assert_eq!(report.trials, 2);
        for sample in &report.samples {
            assert!(*sample > 0.0);
        }
        // Fractional pooling: K=3, α=2, γ=0 → 1.5 groups; the second
        // group's inverse rate carries half weight, so the symmetric rate
        // exceeds the two-full-group aggregate of the same draws.
        let frac = nocc_rate_trial(3, 2, Ratio::new(0, 1), 4, 10.0, 1.0, 23, 0).unwrap();
        assert!(frac > 0.0);
    }

    #[test]
    fn rate_report_statistics() {
        let report = RateReport::from_samples(vec![1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(report.mean, 2.5);
        // Sample variance 5/3, stderr = sqrt(5/12).
        assert_relative_eq!(report.stderr, (5.0_f64 / 12.0).sqrt(), max_relative = 1e-12);
    }
}
