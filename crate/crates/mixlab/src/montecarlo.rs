//! Trajectory-level simulation of the pair-resampling chain at sizes beyond
//! exact matrices, with projected (Hamming-weight) statistics.
//!
//! Reproducibility contract: each trajectory owns an independent RNG stream
//! derived from (master seed, trajectory index), so results are identical
//! across runs and thread counts; aggregation is a commutative reduction of
//! count vectors. Uniform integers are drawn by rejection from power-of-two
//! draws, never by modulo.

use crate::chains::{stationary_f64, ChainKind};
use crate::error::{Error, Result};
use crate::matrix::{tv_slices, Distribution};
use crate::state::PauliString;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Chain variant: the plain pair-resampling rule, or the lazy variant that
/// idles with probability 1/n before applying it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChainVariant {
    Plain,
    Lazy,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryConfig {
    pub n: usize,
    pub steps: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub variant: ChainVariant,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n = {} below 2", self.n)));
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidParameter(
                "trajectory count must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Per-trajectory stream: the master seed expands to the ChaCha key, the
/// trajectory index selects the stream. Streams are independent and the
/// assignment does not depend on scheduling order.
pub fn trajectory_rng(master_seed: u64, trajectory: u64) -> ChaCha8Rng {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trajectory);
    rng
}

/// Uniform draw from `0..m` by rejection from the next power of two.
pub fn uniform_below(rng: &mut impl RngCore, m: u32) -> u32 {
    debug_assert!(m > 0);
    if m == 1 {
        return 0;
    }
    let bits = 32 - (m - 1).leading_zeros();
    let mask = if bits == 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    };
    loop {
        let draw = rng.next_u32() & mask;
        if draw < m {
            return draw;
        }
    }
}

/// Decode the k-th unordered pair (i < j) out of n(n-1)/2.
fn pair_from_rank(n: usize, mut k: usize) -> (usize, usize) {
    for i in 0..n - 1 {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
    }
    unreachable!("pair rank out of range");
}

/// What a single step did: which pair was chosen, and the resampled values
/// when the pair was active.
#[derive(Debug, Clone, Copy)]
pub struct StepEvent {
    pub pair: (usize, usize),
    pub resampled: Option<(u8, u8)>,
}

/// One step of the pair-resampling rule, in place.
pub fn sample_p_step(state: &mut PauliString, rng: &mut impl RngCore) -> StepEvent {
    let n = state.n();
    let pair_count = (n * (n - 1) / 2) as u32;
    let (i, j) = pair_from_rank(n, uniform_below(rng, pair_count) as usize);
    let coords = state.coords_mut();
    if coords[i] == 0 && coords[j] == 0 {
        return StepEvent {
            pair: (i, j),
            resampled: None,
        };
    }
    // Uniform over the 15 nonzero value pairs: skip index 0 = (0,0).
    let v = uniform_below(rng, 15) + 1;
    let (a, b) = ((v / 4) as u8, (v % 4) as u8);
    coords[i] = a;
    coords[j] = b;
    StepEvent {
        pair: (i, j),
        resampled: Some((a, b)),
    }
}

/// One step of the lazy variant: idle with probability 1/n.
pub fn sample_lazy_step(state: &mut PauliString, rng: &mut impl RngCore) -> Option<StepEvent> {
    let n = state.n() as u32;
    if uniform_below(rng, n) == 0 {
        None
    } else {
        Some(sample_p_step(state, rng))
    }
}

/// Exact permutation-randomizing move: a Durstenfeld shuffle of the
/// coordinates (n-1 swaps) followed by an independent uniform permutation of
/// the values {1,2,3} at each coordinate. The output is uniform over the
/// orbit of the input, so the Hamming weight is preserved.
pub fn hand_mix(state: &mut PauliString, rng: &mut impl RngCore) {
    let n = state.n();
    let coords = state.coords_mut();
    for k in (1..n).rev() {
        let j = uniform_below(rng, (k + 1) as u32) as usize;
        coords.swap(k, j);
    }
    // The six permutations of {1,2,3} in one-line notation.
    const VALUE_PERMS: [[u8; 3]; 6] = [
        [1, 2, 3],
        [1, 3, 2],
        [2, 1, 3],
        [2, 3, 1],
        [3, 1, 2],
        [3, 2, 1],
    ];
    for c in coords.iter_mut() {
        let perm = VALUE_PERMS[uniform_below(rng, 6) as usize];
        if *c != 0 {
            *c = perm[(*c - 1) as usize];
        }
    }
}

/// Weight histograms recorded at a set of checkpoints, plus hit-value counts.
#[derive(Debug, Clone, Serialize)]
pub struct WeightHistograms {
    pub config: TrajectoryConfig,
    pub checkpoints: Vec<usize>,
    /// `counts[c][h]` = trajectories with Hamming weight h at checkpoint c.
    pub counts: Vec<Vec<u64>>,
    /// Values observed at coordinates immediately after a hit, indexed 0..3.
    pub hit_value_counts: [u64; 4],
}

impl WeightHistograms {
    pub fn frequencies(&self, checkpoint: usize) -> Vec<f64> {
        let total = self.config.trajectories as f64;
        self.counts[checkpoint]
            .iter()
            .map(|&c| c as f64 / total)
            .collect()
    }

    /// Histogram CSV: `n,t,H,count,frequency`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,t,H,count,frequency")?;
        let total = self.config.trajectories as f64;
        for (c, &t) in self.checkpoints.iter().enumerate() {
            for (h, &count) in self.counts[c].iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    self.config.n,
                    t,
                    h,
                    count,
                    count as f64 / total
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Default, Clone)]
struct Accumulator {
    counts: Vec<Vec<u64>>,
    hit_values: [u64; 4],
}

impl Accumulator {
    fn new(checkpoints: usize, n: usize) -> Self {
        Self {
            counts: vec![vec![0; n + 1]; checkpoints],
            hit_values: [0; 4],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (x, y) in self.hit_values.iter_mut().zip(other.hit_values) {
            *x += y;
        }
        self
    }
}

/// Run trajectories from `initial`, recording the Hamming-weight histogram
/// at each checkpoint (sorted, each at most `config.steps`).
pub fn run_weight_histograms(
    config: &TrajectoryConfig,
    initial: &PauliString,
    checkpoints: &[usize],
) -> Result<WeightHistograms> {
    config.validate()?;
    if initial.n() != config.n {
        return Err(Error::DimensionMismatch {
            expected: config.n,
            found: initial.n(),
        });
    }
    let mut checkpoints = checkpoints.to_vec();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if checkpoints.last().is_some_and(|&t| t > config.steps) {
        return Err(Error::InvalidParameter(
            "checkpoint beyond configured steps".into(),
        ));
    }

    let acc = (0..config.trajectories as u64)
        .into_par_iter()
        .fold(
            || Accumulator::new(checkpoints.len(), config.n),
            |mut acc, traj| {
                let mut rng = trajectory_rng(config.seed, traj);
                let mut state = initial.clone();
                let mut next_checkpoint = 0;
                for t in 0..=config.steps {
                    while next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] == t {
                        acc.counts[next_checkpoint][state.hamming_weight().0] += 1;
                        next_checkpoint += 1;
                    }
                    if next_checkpoint == checkpoints.len() {
                        break;
                    }
                    let event = match config.variant {
                        ChainVariant::Plain => Some(sample_p_step(&mut state, &mut rng)),
                        ChainVariant::Lazy => sample_lazy_step(&mut state, &mut rng),
                    };
                    if let Some(StepEvent {
                        pair: (i, j),
                        resampled: Some(_),
                    }) = event
                    {
                        let coords = state.coords();
                        acc.hit_values[coords[i] as usize] += 1;
                        acc.hit_values[coords[j] as usize] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || Accumulator::new(checkpoints.len(), config.n),
            Accumulator::merge,
        );

    Ok(WeightHistograms {
        config: config.clone(),
        checkpoints,
        counts: acc.counts,
        hit_value_counts: acc.hit_values,
    })
}

/// Empirical weight marginal at the final step, reported against the
/// closed-form stationary weight distribution. The TV statistic is a
/// lower-bound estimate for the full-chain distance: projection can only
/// shrink TV, and sampling noise is quantified by the binomial radius.
#[derive(Debug, Clone, Serialize)]
pub struct ZMarginalReport {
    pub config: TrajectoryConfig,
    pub histogram: Vec<u64>,
    pub frequencies: Vec<f64>,
    /// TV between the empirical weight marginal and the stationary one.
    pub tv_lower_bound_estimate: f64,
    /// Half the summed per-bin binomial standard errors.
    pub confidence_radius: f64,
}

pub fn empirical_z_marginal(
    config: &TrajectoryConfig,
    initial: &PauliString,
) -> Result<ZMarginalReport> {
    let hist = run_weight_histograms(config, initial, &[config.steps])?;
    let counts = hist.counts[0].clone();
    let total = config.trajectories as f64;
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();

    // Stationary weight marginal, including the never-visited weight 0.
    let zeta = stationary_f64(ChainKind::Z, config.n)?;
    let mut target = vec![0.0; config.n + 1];
    target[1..].copy_from_slice(zeta.weights());

    let tv = tv_slices(&freqs, &target);
    let radius = 0.5
        * freqs
            .iter()
            .map(|&p| (p * (1.0 - p) / total).sqrt())
            .sum::<f64>();
    Ok(ZMarginalReport {
        config: config.clone(),
        histogram: counts,
        frequencies: freqs,
        tv_lower_bound_estimate: tv,
        confidence_radius: radius,
    })
}

/// Exact weight marginal of `delta_y P^t` for small n, the oracle for the
/// sampled histograms.
pub fn exact_weight_marginal(n: usize, y: &PauliString, t: usize) -> Result<Vec<f64>> {
    let p = crate::chains::build_p(n)?;
    let mut d: Distribution<f64> = Distribution::point_mass(p.matrix.dim(), y.index());
    let float = p.float();
    for _ in 0..t {
        d = d.step(&float)?;
    }
    let om = crate::orbits::hamming_orbits_pauli(n)?;
    Ok(crate::orbits::project_distribution(&d, &om)?
        .weights()
        .to_vec())
}
