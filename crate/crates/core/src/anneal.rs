//! Classical stand-ins for the annealer: exact enumeration and Metropolis
//! simulated annealing, the gauge-averaged sampling protocol with
//! majority-vote decoding, and time-to-solution statistics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chimera::HardwareIsing;
use crate::embedding::{apply_gauge, ungauge_sample, Embedding, GaugeVector};
use crate::error::{Error, Result};
use crate::gen::mix_seed;
use crate::pubo::{IsingModel, PseudoBooleanPolynomial};

/// Sampling protocol: how many anneals at how many gauges, the per-anneal
/// time used for time-to-solution bookkeeping, and the annealing schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnealProtocol {
    pub anneals_per_gauge: usize,
    pub num_gauges: usize,
    pub anneal_time_us: f64,
    pub sa_sweeps: usize,
    pub sa_beta_start: f64,
    pub sa_beta_end: f64,
    pub seed: u64,
}

impl Default for AnnealProtocol {
    fn default() -> Self {
        Self {
            anneals_per_gauge: 45_000,
            num_gauges: 10,
            anneal_time_us: 20.0,
            sa_sweeps: 100,
            sa_beta_start: 0.1,
            // calibrated so weakly coupled chains still break occasionally
            // at readout, giving the internal coupling a measurable sweet
            // spot on size-8 scheduling instances
            sa_beta_end: 2.5,
            seed: 0,
        }
    }
}

impl AnnealProtocol {
    /// Shrunk protocol for desk-scale sweeps.
    pub fn desk_scale() -> Self {
        Self {
            anneals_per_gauge: 2_000,
            num_gauges: 4,
            ..Self::default()
        }
    }

    pub fn beta_schedule(&self) -> Vec<f64> {
        geometric_schedule(self.sa_beta_start, self.sa_beta_end, self.sa_sweeps)
    }
}

/// Geometric interpolation from `start` to `end` over `steps` values.
pub fn geometric_schedule(start: f64, end: f64, steps: usize) -> Vec<f64> {
    assert!(start > 0.0 && end > 0.0 && steps > 0);
    if steps == 1 {
        return vec![end];
    }
    let ratio = (end / start).powf(1.0 / (steps - 1) as f64);
    (0..steps).map(|i| start * ratio.powi(i as i32)).collect()
}

/// Exact minimum of a pseudo-Boolean polynomial with all minimizers, by
/// Gray-code enumeration with incremental energy updates. Limited to 26
/// variables; minimizers are returned as bitmasks.
pub fn brute_force_ground(poly: &PseudoBooleanPolynomial) -> Result<(f64, Vec<u64>)> {
    let n = poly.num_vars;
    if n > 26 {
        return Err(Error::CapabilityExceeded(format!(
            "exact enumeration supports up to 26 variables, got {}",
            n
        )));
    }
    // per-variable term lists for O(terms-with-v) flip deltas
    let mut var_terms: Vec<Vec<(Vec<u32>, f64)>> = vec![Vec::new(); n];
    for (m, c) in poly.terms() {
        for &v in m {
            let others: Vec<u32> = m.iter().copied().filter(|&x| x != v).collect();
            var_terms[v as usize].push((others, c));
        }
    }

    let mut bits = vec![false; n.max(1)];
    let mut energy = poly.constant_term();
    let mut min_energy = energy;
    let mut minimizers: Vec<u64> = vec![0];
    let mut state: u64 = 0;
    let total: u64 = 1u64 << n;
    for k in 1..total {
        let flip = k.trailing_zeros() as usize; // Gray-code step
        let sign = if bits[flip] { -1.0 } else { 1.0 };
        let mut delta = 0.0;
        for (others, c) in &var_terms[flip] {
            if others.iter().all(|&v| bits[v as usize]) {
                delta += c;
            }
        }
        energy += sign * delta;
        bits[flip] = !bits[flip];
        state ^= 1u64 << flip;
        if energy < min_energy - 1e-9 {
            min_energy = energy;
            minimizers.clear();
            minimizers.push(state);
        } else if (energy - min_energy).abs() <= 1e-9 {
            minimizers.push(state);
        }
    }
    minimizers.sort_unstable();
    Ok((min_energy, minimizers))
}

pub fn mask_to_bits(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

/// A sampler drawing spin configurations from an embedded Ising model.
pub trait Sampler {
    /// Draws `count` configurations; each covers every qubit slot.
    fn sample(&self, hw: &HardwareIsing, count: usize, seed: u64) -> Vec<Vec<i8>>;
}

/// Metropolis single-spin-flip simulated annealing. Each anneal starts from
/// a random configuration and performs one sweep over the usable qubits per
/// schedule entry; anneals are independent given per-anneal derived seeds.
#[derive(Debug, Clone)]
pub struct SimulatedAnnealer {
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
}

impl SimulatedAnnealer {
    pub fn from_protocol(p: &AnnealProtocol) -> Self {
        Self {
            sweeps: p.sa_sweeps,
            beta_start: p.sa_beta_start,
            beta_end: p.sa_beta_end,
        }
    }

    fn anneal_once(
        &self,
        hw: &HardwareIsing,
        usable: &[u32],
        neighbors: &[Vec<(u32, f64)>],
        schedule: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Vec<i8> {
        let slots = hw.graph.num_qubit_slots();
        let mut spins = vec![1i8; slots];
        for &q in usable {
            spins[q as usize] = if rng.gen::<bool>() { 1 } else { -1 };
        }
        // local field cache: field[q] = h_q - sum_r J_qr s_r, so the energy
        // contribution of q is -s_q * field[q] and a flip costs O(1)
        let mut field = vec![0.0f64; slots];
        for &q in usable {
            field[q as usize] = hw.fields[q as usize];
        }
        for (&(a, b), &j) in &hw.couplings {
            field[a as usize] -= j * spins[b as usize] as f64;
            field[b as usize] -= j * spins[a as usize] as f64;
        }
        for &beta in schedule {
            for &q in usable {
                let qi = q as usize;
                let s = spins[qi] as f64;
                let delta = 2.0 * field[qi] * s;
                if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                    let flipped = -spins[qi];
                    spins[qi] = flipped;
                    let step = 2.0 * flipped as f64;
                    for &(r, j) in &neighbors[qi] {
                        field[r as usize] -= j * step;
                    }
                }
            }
        }
        spins
    }
}

impl Sampler for SimulatedAnnealer {
    fn sample(&self, hw: &HardwareIsing, count: usize, seed: u64) -> Vec<Vec<i8>> {
        let usable = hw.graph.usable_qubits();
        let mut neighbors: Vec<Vec<(u32, f64)>> = vec![Vec::new(); hw.graph.num_qubit_slots()];
        for (&(a, b), &j) in &hw.couplings {
            neighbors[a as usize].push((b, j));
            neighbors[b as usize].push((a, j));
        }
        let schedule = geometric_schedule(self.beta_start, self.beta_end, self.sweeps);
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64));
                self.anneal_once(hw, &usable, &neighbors, &schedule, &mut rng)
            })
            .collect()
    }
}

/// Exact sampler: enumerates the ground states of the embedded model and
/// emits the full ground set, ignoring `count`. Usable only for small
/// hardware models.
#[derive(Debug, Clone, Copy)]
pub struct ExactSampler;

impl Sampler for ExactSampler {
    fn sample(&self, hw: &HardwareIsing, _count: usize, _seed: u64) -> Vec<Vec<i8>> {
        let usable = hw.graph.usable_qubits();
        let n = usable.len();
        assert!(n <= 24, "exact sampler supports up to 24 usable qubits");
        let mut best = f64::INFINITY;
        let mut ground: Vec<Vec<i8>> = Vec::new();
        for mask in 0u64..(1 << n) {
            let mut spins = vec![1i8; hw.graph.num_qubit_slots()];
            for (bit, &q) in usable.iter().enumerate() {
                spins[q as usize] = if mask >> bit & 1 == 1 { -1 } else { 1 };
            }
            let e = hw.energy(&spins).expect("full spin vector");
            if e < best - 1e-9 {
                best = e;
                ground.clear();
                ground.push(spins);
            } else if (e - best).abs() <= 1e-9 {
                ground.push(spins);
            }
        }
        ground
    }
}

/// Majority-vote decoding: each logical variable takes the majority bit of
/// its component, ties resolved by the lowest-index qubit.
pub fn majority_decode(embedding: &Embedding, spins: &[i8]) -> Vec<bool> {
    embedding
        .components
        .iter()
        .map(|comp| {
            let ones = comp.iter().filter(|&&q| spins[q as usize] < 0).count();
            let zeros = comp.len() - ones;
            if ones != zeros {
                ones > zeros
            } else {
                spins[comp[0] as usize] < 0 // components are sorted
            }
        })
        .collect()
}

/// Strict decoding: `Some(bits)` only when every component is uniform.
pub fn uniform_decode(embedding: &Embedding, spins: &[i8]) -> Option<Vec<bool>> {
    embedding
        .components
        .iter()
        .map(|comp| {
            let first = spins[comp[0] as usize];
            if comp.iter().all(|&q| spins[q as usize] == first) {
                Some(first < 0)
            } else {
                None
            }
        })
        .collect()
}

/// Hit statistics for one decoding mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitStats {
    pub hits: usize,
    pub success_rate: f64,
    /// Expected repetitions to 99% success; `None` when censored.
    pub expected_runs: Option<f64>,
    /// Expected total anneal time in microseconds; `None` when censored.
    pub expected_total_anneal_time_us: Option<f64>,
    pub censored: bool,
}

/// Outcome of a full sampling protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub num_samples: usize,
    pub raw: HitStats,
    pub corrected: HitStats,
}

fn hit_stats(hits: usize, total: usize, anneal_time_us: f64, target: f64) -> HitStats {
    let r = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
    match expected_tts(r, anneal_time_us, target) {
        Ok(Some(tts)) => HitStats {
            hits,
            success_rate: r,
            expected_runs: Some(tts / anneal_time_us),
            expected_total_anneal_time_us: Some(tts),
            censored: false,
        },
        _ => HitStats {
            hits,
            success_rate: r,
            expected_runs: None,
            expected_total_anneal_time_us: None,
            censored: true,
        },
    }
}

/// Which decoding produced a hit passed to a protocol observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitKind {
    Raw,
    Corrected,
}

/// Runs the sampling protocol: for each gauge, transform the embedded model,
/// sample, undo the gauge, and count ground-state hits. A raw hit requires
/// every component uniform and the decoded assignment at the logical ground
/// energy; a corrected hit majority-decodes first. The observer sees every
/// hit's decoded logical bits.
pub fn run_protocol_observed(
    logical: &IsingModel,
    hw: &HardwareIsing,
    embedding: &Embedding,
    logical_ground_energy: f64,
    protocol: &AnnealProtocol,
    sampler: &dyn Sampler,
    observer: &mut dyn FnMut(HitKind, &[bool]),
) -> Result<RunStats> {
    let mut raw_hits = 0usize;
    let mut corrected_hits = 0usize;
    let mut num_samples = 0usize;
    for gauge_idx in 0..protocol.num_gauges {
        let gauge_seed = mix_seed(protocol.seed, 0x6761_7567_6500 + gauge_idx as u64);
        let mut grng = ChaCha8Rng::seed_from_u64(gauge_seed);
        let gauge = GaugeVector::random(hw.graph.num_qubit_slots(), &mut grng);
        let gauged = apply_gauge(hw, &gauge)?;
        let samples = sampler.sample(
            &gauged,
            protocol.anneals_per_gauge,
            mix_seed(protocol.seed, gauge_idx as u64),
        );
        num_samples += samples.len();
        for sample in samples {
            let spins = ungauge_sample(&sample, &gauge);
            if let Some(bits) = uniform_decode(embedding, &spins) {
                let e = logical.energy(&crate::pubo::bits_to_spins(&bits))?;
                if (e - logical_ground_energy).abs() <= 1e-9 {
                    raw_hits += 1;
                    observer(HitKind::Raw, &bits);
                }
            }
            let bits = majority_decode(embedding, &spins);
            let e = logical.energy(&crate::pubo::bits_to_spins(&bits))?;
            if (e - logical_ground_energy).abs() <= 1e-9 {
                corrected_hits += 1;
                observer(HitKind::Corrected, &bits);
            }
        }
    }
    Ok(RunStats {
        num_samples,
        raw: hit_stats(raw_hits, num_samples, protocol.anneal_time_us, 0.99),
        corrected: hit_stats(corrected_hits, num_samples, protocol.anneal_time_us, 0.99),
    })
}

/// [`run_protocol_observed`] without an observer.
pub fn run_protocol(
    logical: &IsingModel,
    hw: &HardwareIsing,
    embedding: &Embedding,
    logical_ground_energy: f64,
    protocol: &AnnealProtocol,
    sampler: &dyn Sampler,
) -> Result<RunStats> {
    run_protocol_observed(
        logical,
        hw,
        embedding,
        logical_ground_energy,
        protocol,
        sampler,
        &mut |_, _| {},
    )
}

/// Expected total anneal time to reach the target success probability:
/// `anneal_time_us * ln(1 - target) / ln(1 - r)`. Returns `None` (censored)
/// at r = 0; at r = 1 a single run suffices by convention.
pub fn expected_tts(r: f64, anneal_time_us: f64, target: f64) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidInput(format!("r = {} is not a probability", r)));
    }
    if !(0.0 < target && target < 1.0) {
        return Err(Error::InvalidInput(format!("target {} outside (0, 1)", target)));
    }
    if r == 0.0 {
        return Ok(None);
    }
    if r == 1.0 {
        return Ok(Some(anneal_time_us));
    }
    let k = (1.0 - target).ln() / (1.0 - r).ln();
    Ok(Some(anneal_time_us * k))
}

/// Result of an exponential scaling fit `ln(tts) = alpha * n + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// Censored points excluded from the fit.
    pub excluded: usize,
}

/// Least-squares fit of the exponential scaling exponent on natural-log
/// time-to-solution values. Censored entries (`None`) are excluded and
/// counted.
pub fn fit_scaling(sizes: &[f64], median_tts: &[Option<f64>]) -> Result<ScalingFit> {
    if sizes.len() != median_tts.len() {
        return Err(Error::InvalidInput("sizes and tts lengths differ".into()));
    }
    let points: Vec<(f64, f64)> = sizes
        .iter()
        .zip(median_tts)
        .filter_map(|(&n, tts)| tts.map(|t| (n, t.ln())))
        .collect();
    let excluded = sizes.len() - points.len();
    if points.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least two censoring-free points to fit".into(),
        ));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return Err(Error::InvalidInput("degenerate fit: all sizes equal".into()));
    }
    let alpha = (n * sxy - sx * sy) / denom;
    let intercept = (sy - alpha * sx) / n;
    let residuals = points
        .iter()
        .map(|&(x, y)| y - (alpha * x + intercept))
        .collect();
    Ok(ScalingFit {
        alpha,
        intercept,
        residuals,
        excluded,
    })
}
