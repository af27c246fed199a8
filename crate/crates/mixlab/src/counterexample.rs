//! Exact refutation of the uniform-conditional-hit claim.
//!
//! A coordinate is "hit" at a step when the chosen pair contains it and the
//! pre-step pair value is not (0,0) — the coupon-collector reading of the
//! pair-resampling rule. The claim under test: conditioned on every
//! coordinate having been hit, the state distribution is uniform over the
//! nonzero strings. Exhaustive enumeration of the two-step evolution tree
//! from (0,0,1) shows it is not: the conditional probabilities of reaching
//! (1,0,0) and (0,0,1) come out in the exact ratio 3:2.
//!
//! Everything here runs in exact rational arithmetic; the enumeration tree
//! for the default instance has at most (3*15)^2 weighted leaves.

use crate::error::{Error, Result};
use crate::matrix::{Distribution, Rat64};
use crate::state::PauliString;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

/// Marginal value of a coordinate immediately after being hit: probability
/// 1/5 of becoming 0 and 4/15 each of becoming 1, 2 or 3 (exact counting
/// over the 15 pair outcomes: three of them place 0 at the coordinate, four
/// place each nonzero value).
pub fn hit_value_distribution() -> [Rat64; 4] {
    let mut counts = [0i64; 4];
    for a in 0..4i64 {
        for b in 0..4i64 {
            if (a, b) != (0, 0) {
                counts[a as usize] += 1;
            }
        }
    }
    counts.map(|c| Rat64::new(c, 15))
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioJson {
    pub num: i64,
    pub den: i64,
}

impl From<Rat64> for RatioJson {
    fn from(r: Rat64) -> Self {
        Self {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

/// One contributing evolution: the pairs chosen per step, the resampled
/// values (None for an inert step), and the exact path probability.
#[derive(Debug, Clone, Serialize)]
pub struct HitPath {
    pub pairs: Vec<(usize, usize)>,
    pub outcomes: Vec<Option<(u8, u8)>>,
    pub final_state: String,
    pub probability: RatioJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionalHitReport {
    pub n: usize,
    pub initial: String,
    pub steps: usize,
    /// Probability of the conditioning event (all coordinates hit).
    pub event_probability: RatioJson,
    /// Exact conditional weights by final state, nonzero entries only.
    pub conditional: BTreeMap<String, RatioJson>,
    /// Paths satisfying the conditioning event.
    pub paths: Vec<HitPath>,
}

/// Pairs chosen and values resampled along one evolution.
type Trail = (Vec<(usize, usize)>, Vec<Option<(u8, u8)>>);

struct Enumerator {
    pairs: Vec<(usize, usize)>,
    /// (final state, hit mask) -> probability, plus the path log.
    outcomes: BTreeMap<(Vec<u8>, u32), Rat64>,
    paths: Vec<(Trail, Vec<u8>, Rat64)>,
    full_mask: u32,
}

impl Enumerator {
    fn run(&mut self, state: Vec<u8>, hits: u32, prob: Rat64, steps_left: usize, trail: Trail) {
        if steps_left == 0 {
            *self
                .outcomes
                .entry((state.clone(), hits))
                .or_insert_with(Rat64::zero) += prob;
            if hits == self.full_mask {
                self.paths.push((trail, state, prob));
            }
            return;
        }
        let pair_w = Rat64::new(1, self.pairs.len() as i64);
        let pairs = self.pairs.clone();
        for &(i, j) in &pairs {
            let mut pairs_trail = trail.0.clone();
            pairs_trail.push((i + 1, j + 1));
            if state[i] == 0 && state[j] == 0 {
                let mut outcome_trail = trail.1.clone();
                outcome_trail.push(None);
                self.run(
                    state.clone(),
                    hits,
                    prob * pair_w,
                    steps_left - 1,
                    (pairs_trail, outcome_trail),
                );
            } else {
                let w = prob * pair_w * Rat64::new(1, 15);
                let new_hits = hits | (1 << i) | (1 << j);
                for a in 0..4u8 {
                    for b in 0..4u8 {
                        if (a, b) == (0, 0) {
                            continue;
                        }
                        let mut next = state.clone();
                        next[i] = a;
                        next[j] = b;
                        let mut outcome_trail = trail.1.clone();
                        outcome_trail.push(Some((a, b)));
                        self.run(
                            next,
                            new_hits,
                            w,
                            steps_left - 1,
                            (pairs_trail.clone(), outcome_trail),
                        );
                    }
                }
            }
        }
    }
}

/// Exact conditional distribution over final states given that every
/// coordinate is hit within `steps` steps, starting from `y`.
pub fn conditional_hit_distribution(y: &PauliString, steps: usize) -> Result<ConditionalHitReport> {
    let n = y.n();
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "exhaustive conditioning supported for n in 2..=4, got {n}"
        )));
    }
    if steps > 4 {
        return Err(Error::InvalidParameter(format!(
            "enumeration tree too large at steps = {steps} (max 4)"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut enumerator = Enumerator {
        pairs,
        outcomes: BTreeMap::new(),
        paths: Vec::new(),
        full_mask: (1u32 << n) - 1,
    };
    enumerator.run(
        y.coords().to_vec(),
        0,
        Rat64::one(),
        steps,
        (Vec::new(), Vec::new()),
    );

    // The weighted tree is exhaustive: probabilities sum to one exactly.
    let total: Rat64 = enumerator.outcomes.values().copied().sum();
    assert!(total.is_one(), "path tree does not sum to 1: {total}");

    let event: Rat64 = enumerator
        .outcomes
        .iter()
        .filter(|((_, hits), _)| *hits == enumerator.full_mask)
        .map(|(_, p)| *p)
        .sum();
    if event.is_zero() {
        return Err(Error::EmptyConditioningEvent(format!(
            "no evolution from {y} hits all {n} coordinates within {steps} steps"
        )));
    }

    let mut conditional: BTreeMap<String, RatioJson> = BTreeMap::new();
    let mut by_state: BTreeMap<Vec<u8>, Rat64> = BTreeMap::new();
    for ((state, hits), p) in &enumerator.outcomes {
        if *hits == enumerator.full_mask {
            *by_state.entry(state.clone()).or_insert_with(Rat64::zero) += *p;
        }
    }
    for (state, p) in by_state {
        let label = PauliString::new(state)?.to_string();
        conditional.insert(label, RatioJson::from(p / event));
    }

    let paths = enumerator
        .paths
        .into_iter()
        .map(|((pairs, outcomes), state, p)| {
            Ok(HitPath {
                pairs,
                outcomes,
                final_state: PauliString::new(state)?.to_string(),
                probability: RatioJson::from(p),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ConditionalHitReport {
        n,
        initial: y.to_string(),
        steps,
        event_probability: RatioJson::from(event),
        conditional,
        paths,
    })
}

/// Unconditioned distribution after `steps` steps of the enumerator, for
/// cross-checking against the matrix builder.
pub fn unconditioned_distribution(y: &PauliString, steps: usize) -> Result<Distribution<Rat64>> {
    let n = y.n();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut enumerator = Enumerator {
        pairs,
        outcomes: BTreeMap::new(),
        paths: Vec::new(),
        full_mask: (1u32 << n) - 1,
    };
    enumerator.run(
        y.coords().to_vec(),
        0,
        Rat64::one(),
        steps,
        (Vec::new(), Vec::new()),
    );
    let dim = 4usize.pow(n as u32);
    let mut weights = vec![Rat64::zero(); dim];
    for ((state, _), p) in enumerator.outcomes {
        weights[PauliString::new(state)?.index()] += p;
    }
    Distribution::new(weights)
}

#[derive(Debug, Clone, Serialize)]
pub struct SstReport {
    pub report: ConditionalHitReport,
    pub witness_a: String,
    pub witness_b: String,
    pub witness_a_probability: RatioJson,
    pub witness_b_probability: RatioJson,
    /// Exact conditional ratio P(witness_a) / P(witness_b).
    pub ratio: RatioJson,
    /// Whether the conditional distribution is uniform over nonzero strings
    /// (the refuted claim says it should be).
    pub conditional_is_uniform: bool,
    pub pass: bool,
}

impl SstReport {
    /// Human-readable rendering with every contributing path.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let r = &self.report;
        out.push_str(&format!(
            "conditional hit distribution from {} after {} steps\n",
            r.initial, r.steps
        ));
        out.push_str(&format!(
            "conditioning event probability: {}/{}\n",
            r.event_probability.num, r.event_probability.den
        ));
        out.push_str(&format!(
            "witnesses: P({} | all hit) / P({} | all hit) = {}/{}\n",
            self.witness_a, self.witness_b, self.ratio.num, self.ratio.den
        ));
        out.push_str(&format!(
            "conditional distribution uniform: {}\n",
            self.conditional_is_uniform
        ));
        out.push_str(&format!("contributing paths ({}):\n", r.paths.len()));
        for p in &r.paths {
            let steps: Vec<String> = p
                .pairs
                .iter()
                .zip(&p.outcomes)
                .map(|(pair, outcome)| match outcome {
                    Some((a, b)) => format!("{{{},{}}}->({a},{b})", pair.0, pair.1),
                    None => format!("{{{},{}}} inert", pair.0, pair.1),
                })
                .collect();
            out.push_str(&format!(
                "  {} => {}  p = {}/{}\n",
                steps.join(" ; "),
                p.final_state,
                p.probability.num,
                p.probability.den
            ));
        }
        out
    }
}

/// Run the default instance — initial state (0,0,1), two steps — and check
/// the non-uniformity witness: conditional probabilities of (1,0,0) and
/// (0,0,1) in exact ratio 3:2.
pub fn refute_sst_claim() -> Result<SstReport> {
    refute_sst_claim_from(&PauliString::new(vec![0, 0, 1])?, 2)
}

pub fn refute_sst_claim_from(y: &PauliString, steps: usize) -> Result<SstReport> {
    let report = conditional_hit_distribution(y, steps)?;
    let n = y.n();
    let mut first = vec![0u8; n];
    first[0] = 1;
    let mut last = vec![0u8; n];
    last[n - 1] = 1;
    let witness_a = PauliString::new(first)?.to_string();
    let witness_b = PauliString::new(last)?.to_string();
    let get = |key: &str| -> Rat64 {
        report
            .conditional
            .get(key)
            .map(|r| Rat64::new(r.num, r.den))
            .unwrap_or_else(Rat64::zero)
    };
    let pa = get(&witness_a);
    let pb = get(&witness_b);
    if pb.is_zero() {
        return Err(Error::EmptyConditioningEvent(format!(
            "witness state {witness_b} has zero conditional probability"
        )));
    }
    let ratio = pa / pb;

    // Uniformity over the nonzero strings would mean conditional weight
    // 1/(4^n - 1) everywhere.
    let dim = 4usize.pow(report.n as u32);
    let uniform_share = Rat64::new(1, dim as i64 - 1);
    let conditional_is_uniform = (1..dim).all(|s| {
        let label = PauliString::from_index(report.n, s).unwrap().to_string();
        get(&label) == uniform_share
    });

    let expected = Rat64::new(3, 2);
    let pass = ratio == expected && !conditional_is_uniform;
    Ok(SstReport {
        witness_a_probability: RatioJson::from(pa),
        witness_b_probability: RatioJson::from(pb),
        witness_a,
        witness_b,
        ratio: RatioJson::from(ratio),
        conditional_is_uniform,
        pass,
        report,
    })
}
