//! Quantitative convergence checks tying the chain family together.
//!
//! The four numbered checks exposed through the CLI `verify` subcommand:
//!
//! 1. mixing-time equality — the pair-resampling chain and its support
//!    projection have identical worst-case TV traces, hence equal mixing
//!    times at every threshold;
//! 2. randomized-distance identity — averaging a distribution over
//!    coordinate permutations lands exactly as far from stationarity as its
//!    weight marginal is from the stationary weight marginal (lives in
//!    [`crate::orbits::verify_randomize_tv`]);
//! 3. swap-chain convergence — the lazy swap chain restricted to a weight
//!    class equals the stabilizer-coset projection of the full transposition
//!    walk, every distribution converges under it to its orbit average, and
//!    no weight class mixes slower than the full walk;
//! 4. restricted-ball mixing bound — starting anywhere in the ball
//!    B(gamma) = { nu : TV(nu S, nu_pi) <= gamma }, the support chain
//!    reaches eps in at most
//!    [ (5/2) (delta + sqrt(delta^2 + (4/5) t_T)) ]^2 steps, where t_T is
//!    the measured generalized swap mixing time at eps - gamma - e^(-2 delta^2).

use crate::chains::{self, ChainKind};
use crate::error::{Error, Result};
use crate::matrix::{tv_slices, Distribution};
use crate::mixing::{mixing_reports, MixingReport, MixingScan};
use crate::orbits::{hamming_orbits_support, project_chain, randomize_distribution, CosetOrbitMap};
use crate::spectral::{spectral_gap_lanczos, spectrum_reversible};
use serde::Serialize;
use std::io::Write;

/// Check #1: worst-case TV traces of the full chain and its support
/// projection agree entrywise, so the integer mixing times match at every
/// threshold.
#[derive(Debug, Clone, Serialize)]
pub struct MixingEqualityReport {
    pub n: usize,
    pub eps_list: Vec<f64>,
    pub t_full: Vec<usize>,
    pub t_projected: Vec<usize>,
    pub max_trace_difference: f64,
    pub pass: bool,
}

pub fn mixing_equality_report(n: usize, eps_list: &[f64]) -> Result<MixingEqualityReport> {
    if n > 5 {
        return Err(Error::InvalidParameter(format!(
            "exact full-chain scan supported for n <= 5, got {n}"
        )));
    }
    let p = chains::build_p(n)?;
    let q = chains::build_q(n)?;
    let pi = chains::stationary_f64(ChainKind::P, n)?;
    let nu = chains::stationary_f64(ChainKind::Q, n)?;
    let scan = MixingScan::new(eps_list).excluded(&[0]).full_trace(true);
    let rp = mixing_reports(&p.float(), &pi, &scan)?;
    let rq = mixing_reports(&q.float(), &nu, &scan)?;

    let t_full: Vec<usize> = rp.iter().map(|r| r.t_mix).collect();
    let t_projected: Vec<usize> = rq.iter().map(|r| r.t_mix).collect();
    // The trace identity starts at t = 1: at t = 0 the two sides compare
    // point masses against different stationary vectors and legitimately
    // disagree (1 - pi(x) vs 1 - nu_pi(q)).
    let trace_p = &rp[0].trace;
    let trace_q = &rq[0].trace;
    let mut max_diff = if trace_p.len() == trace_q.len() {
        0.0
    } else {
        f64::INFINITY
    };
    for (a, b) in trace_p.iter().zip(trace_q).skip(1) {
        max_diff = max_diff.max((a - b).abs());
    }
    let pass = t_full == t_projected && max_diff < 1e-12;
    Ok(MixingEqualityReport {
        n,
        eps_list: eps_list.to_vec(),
        t_full,
        t_projected,
        max_trace_difference: max_diff,
        pass,
    })
}

/// Mixing of the lazy swap chain within one weight class.
#[derive(Debug, Clone, Serialize)]
pub struct ClassMixing {
    pub weight: usize,
    pub class_size: usize,
    pub t_mix: usize,
}

/// Generalized swap mixing time: the largest over initial distributions nu of
/// the first t with TV(nu T^t, nu S) <= eps.
///
/// The map nu -> TV(nu T^t, nu S) = TV(nu (T^t - S), 0) is a seminorm of a
/// linear function of nu, hence convex, hence maximized at simplex vertices;
/// the scan therefore runs over point masses only. The swap chain preserves
/// weight classes and is invariant under coordinate permutations, which act
/// transitively within a class, so one representative per class suffices.
pub fn generalized_swap_mixing_detail(n: usize, eps: f64) -> Result<Vec<ClassMixing>> {
    if n > 12 {
        return Err(Error::InvalidParameter(format!(
            "swap scan supported for n <= 12, got {n}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} outside (0, 1)"
        )));
    }
    let t = chains::build_t(n)?.float();
    let om = hamming_orbits_support(n)?;
    let mut out = Vec::with_capacity(n + 1);
    for h in 0..=n {
        let class = om.orbit_states(h);
        if class.len() == 1 {
            out.push(ClassMixing {
                weight: h,
                class_size: 1,
                t_mix: 0,
            });
            continue;
        }
        let block = t.restrict(&class);
        let uniform = vec![1.0 / class.len() as f64; class.len()];
        let mut v = vec![0.0; class.len()];
        v[0] = 1.0;
        let mut steps = 0usize;
        while tv_slices(&v, &uniform) > eps {
            v = block.apply(&v);
            steps += 1;
            if steps > 200_000 {
                return Err(Error::NoConvergence { eps, steps });
            }
        }
        out.push(ClassMixing {
            weight: h,
            class_size: class.len(),
            t_mix: steps,
        });
    }
    Ok(out)
}

pub fn generalized_swap_mixing_time(n: usize, eps: f64) -> Result<usize> {
    Ok(generalized_swap_mixing_detail(n, eps)?
        .into_iter()
        .map(|c| c.t_mix)
        .max()
        .unwrap_or(0))
}

/// Check #3 report.
#[derive(Debug, Clone, Serialize)]
pub struct SwapProjectionReport {
    pub n: usize,
    pub eps: f64,
    /// Restriction of the lazy swap chain to each weight class equals the
    /// coset projection of the transposition walk, entrywise exactly.
    pub coset_projection_exact: bool,
    /// Sampled distributions converge monotonically to their orbit averages.
    pub convergence_monotone: bool,
    pub max_final_distance: f64,
    /// Standard mixing time of each weight-class block at eps.
    pub class_mixing: Vec<ClassMixing>,
    /// Standard mixing time of the full transposition walk at eps.
    pub walk_t_mix: usize,
    pub pass: bool,
}

pub fn swap_projection_report(n: usize, eps: f64) -> Result<SwapProjectionReport> {
    if n > 5 {
        return Err(Error::InvalidParameter(format!(
            "transposition walk materialized for n <= 5 here, got {n}"
        )));
    }
    let t_exact = chains::build_t(n)?;
    let rt = chains::build_rt(n)?;

    // (a) Entrywise equality of the restriction and the coset projection.
    let mut coset_projection_exact = true;
    for h in 0..=n {
        let cm = CosetOrbitMap::new(n, h)?;
        let projected = project_chain(&rt.matrix, cm.orbit_map())?;
        let restricted = t_exact.matrix.restrict(cm.orbit_patterns());
        if projected != restricted {
            coset_projection_exact = false;
        }
    }

    // (b) Sampled distributions: TV(nu T^t, nu S) non-increasing, heading to 0.
    let tf = t_exact.float();
    let dim = tf.dim();
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
    let mut convergence_monotone = true;
    let mut max_final_distance = 0.0f64;
    let horizon = 40 * n;
    for _ in 0..20 {
        let raw: Vec<f64> = (0..dim)
            .map(|_| -rng.random::<f64>().max(1e-300).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let mut nu: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let target = randomize_distribution(&Distribution::new_unchecked(nu.clone()), n)?;
        let mut prev = tv_slices(&nu, target.weights());
        for _ in 0..horizon {
            nu = tf.apply(&nu);
            let d = tv_slices(&nu, target.weights());
            if d > prev + 1e-12 {
                convergence_monotone = false;
            }
            prev = d;
        }
        max_final_distance = max_final_distance.max(prev);
    }

    // (c) Class mixing times never exceed the walk's.
    let class_mixing = standard_class_mixing(n, eps)?;
    let uniform = chains::stationary_f64(ChainKind::RT, n)?;
    let walk = mixing_reports(&rt.float(), &uniform, &MixingScan::new(&[eps]))?.remove(0);
    let max_class = class_mixing.iter().map(|c| c.t_mix).max().unwrap_or(0);

    let pass = coset_projection_exact
        && convergence_monotone
        && max_final_distance < 1e-6
        && max_class <= walk.t_mix;
    Ok(SwapProjectionReport {
        n,
        eps,
        coset_projection_exact,
        convergence_monotone,
        max_final_distance,
        class_mixing,
        walk_t_mix: walk.t_mix,
        pass,
    })
}

/// Standard (stationary-target) mixing time of each weight-class block of
/// the lazy swap chain, scanning every initial state in the class.
fn standard_class_mixing(n: usize, eps: f64) -> Result<Vec<ClassMixing>> {
    let t = chains::build_t(n)?.float();
    let om = hamming_orbits_support(n)?;
    let mut out = Vec::with_capacity(n + 1);
    for h in 0..=n {
        let class = om.orbit_states(h);
        if class.len() == 1 {
            out.push(ClassMixing {
                weight: h,
                class_size: 1,
                t_mix: 0,
            });
            continue;
        }
        let block = t.restrict(&class);
        let uniform = Distribution::new_unchecked(vec![1.0 / class.len() as f64; class.len()]);
        let report = mixing_reports(&block, &uniform, &MixingScan::new(&[eps]))?.remove(0);
        out.push(ClassMixing {
            weight: h,
            class_size: class.len(),
            t_mix: report.t_mix,
        });
    }
    Ok(out)
}

/// Membership test for the ball B(gamma): TV(nu S, nu_pi) <= gamma.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BallSpec {
    pub gamma: f64,
}

impl BallSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} negative")));
        }
        Ok(Self { gamma })
    }

    pub fn contains(
        &self,
        nu: &Distribution<f64>,
        n: usize,
        nu_pi: &Distribution<f64>,
    ) -> Result<bool> {
        let randomized = randomize_distribution(nu, n)?;
        Ok(tv_slices(randomized.weights(), nu_pi.weights()) <= self.gamma + 1e-12)
    }
}

/// Right-hand side of the restricted mixing bound, on the square-root scale:
/// `(5/2) [ delta + sqrt(delta^2 + (4/5) t_swap) ]`, valid whenever
/// `eps > e^(-2 delta^2) + gamma`.
pub fn restricted_bound_rhs(eps: f64, gamma: f64, delta: f64, t_swap: usize) -> Result<f64> {
    if delta <= 0.0 || gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need delta > 0 and gamma >= 0, got delta = {delta}, gamma = {gamma}"
        )));
    }
    let tail = (-2.0 * delta * delta).exp();
    if eps <= tail + gamma {
        return Err(Error::InvalidParameter(format!(
            "precondition eps > e^(-2 delta^2) + gamma violated: {eps} <= {tail} + {gamma}"
        )));
    }
    Ok(2.5 * (delta + (delta * delta + 0.8 * t_swap as f64).sqrt()))
}

/// Which members make up the search family inside the ball.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SearchFamily {
    pub point_masses: bool,
    pub orbit_skews: bool,
    pub boundary_mixtures: bool,
    pub evolved_states: bool,
}

impl Default for SearchFamily {
    fn default() -> Self {
        Self {
            point_masses: true,
            orbit_skews: true,
            boundary_mixtures: true,
            evolved_states: true,
        }
    }
}

/// Check #4 report. The supremum over the ball is approximated from below by
/// a documented search family (in-ball point masses, mixtures pushed to the
/// ball boundary, and the chain's own state after the weight walk has mixed
/// to gamma) and certified from above by the bound built from the measured
/// generalized swap mixing time.
#[derive(Debug, Clone, Serialize)]
pub struct RestrictedMixingReport {
    pub n: usize,
    pub eps: f64,
    pub gamma: f64,
    /// Certificate parameters; absent when gamma >= eps (the bound's
    /// precondition admits no delta there and only the empirical side runs).
    pub delta: Option<f64>,
    /// Threshold fed to the swap chain: eps - gamma - e^(-2 delta^2).
    pub swap_eps: Option<f64>,
    pub swap_t_mix: Option<usize>,
    pub family: SearchFamily,
    pub family_size: usize,
    pub point_mass_family_empty: bool,
    /// Largest first-passage time to eps over the family.
    pub empirical_max: usize,
    pub empirical_worst_member: String,
    /// Square of the bound: certified step count.
    pub certified_bound: Option<f64>,
    pub pass: bool,
}

/// Default parameter rule: delta^2 = (1/2) ln(4 / eps) when that satisfies
/// the precondition with margin, otherwise delta^2 = (1/2) ln(2 / (eps - gamma)).
pub fn default_delta(eps: f64, gamma: f64) -> Result<f64> {
    if !(0.0 < eps && eps < 1.0) || gamma < 0.0 || gamma >= eps {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps < 1 and 0 <= gamma < eps, got eps = {eps}, gamma = {gamma}"
        )));
    }
    let standard = (0.5 * (4.0 / eps).ln()).sqrt();
    if (-2.0 * standard * standard).exp() + gamma < eps {
        Ok(standard)
    } else {
        Ok((0.5 * (2.0 / (eps - gamma)).ln()).sqrt())
    }
}

pub fn restricted_mixing_report(
    n: usize,
    eps: f64,
    gamma: f64,
    family: SearchFamily,
) -> Result<RestrictedMixingReport> {
    if n > 10 {
        return Err(Error::InvalidParameter(format!(
            "restricted scan supported for n <= 10, got {n}"
        )));
    }
    if !(0.0 < eps && eps < 1.0) || gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps < 1 and gamma >= 0, got eps = {eps}, gamma = {gamma}"
        )));
    }
    let certificate = if gamma < eps {
        let delta = default_delta(eps, gamma)?;
        let swap_eps = eps - gamma - (-2.0 * delta * delta).exp();
        let swap_t_mix = generalized_swap_mixing_time(n, swap_eps)?;
        let rhs = restricted_bound_rhs(eps, gamma, delta, swap_t_mix)?;
        Some((delta, swap_eps, swap_t_mix, rhs))
    } else {
        None
    };

    let q = chains::build_q(n)?.float();
    let nu_pi = chains::stationary_f64(ChainKind::Q, n)?;
    let ball = BallSpec::new(gamma)?;
    let dim = q.dim();

    let mut members: Vec<(String, Vec<f64>)> =
        vec![("stationary".into(), nu_pi.weights().to_vec())];

    // Orbit-skewed members: the ball constraint only sees the weight
    // marginal, so concentrating each class's stationary mass on a single
    // state sits at the center of every ball while being far from
    // stationarity itself. These exercise the within-orbit randomization the
    // bound is actually about.
    let om = hamming_orbits_support(n)?;
    let class_rep = |h: usize| -> usize { (1usize << h) - 1 };
    let mut skew_all = vec![0.0; dim];
    let mut zeta = vec![0.0; n + 1];
    for q in 1..dim {
        zeta[om.label(q)] += nu_pi.weights()[q];
    }
    for h in 1..=n {
        skew_all[class_rep(h)] = zeta[h];
    }
    if family.orbit_skews {
        members.push(("skew:all".into(), skew_all.clone()));
        for h in 1..=n {
            let mut skew_one = nu_pi.weights().to_vec();
            for q in om.orbit_states(h) {
                skew_one[q] = 0.0;
            }
            skew_one[class_rep(h)] = zeta[h];
            members.push((format!("skew:H{h}"), skew_one));
        }
    }

    let mut point_mass_family_empty = true;
    for s in 1..dim {
        let point = Distribution::point_mass(dim, s);
        let dist = tv_slices(
            randomize_distribution(&point, n)?.weights(),
            nu_pi.weights(),
        );
        if family.point_masses && dist <= gamma + 1e-12 {
            point_mass_family_empty = false;
            members.push((format!("point:{s}"), point.weights().to_vec()));
        }
        if family.boundary_mixtures && dist > gamma {
            // (1 - beta) base + beta delta_s sits on the ball boundary when
            // beta = gamma / dist: the randomizer is linear and sends the
            // orbit-skewed base exactly to nu_pi.
            let beta = gamma / dist;
            let mix: Vec<f64> = skew_all
                .iter()
                .enumerate()
                .map(|(i, &w)| (1.0 - beta) * w + if i == s { beta } else { 0.0 })
                .collect();
            members.push((format!("skew-mixture:{s}"), mix));
        }
    }

    if family.evolved_states {
        // The chain's own state after the weight walk mixes to gamma; by the
        // randomized-distance identity these sit inside the ball.
        let z = chains::build_z(n)?;
        let zeta = chains::stationary_f64(ChainKind::Z, n)?;
        let t0 = mixing_reports(&z.float(), &zeta, &MixingScan::new(&[gamma.min(0.999)]))?
            .remove(0)
            .t_mix;
        for h in 1..=n {
            let start = (1usize << h) - 1;
            let mut v = vec![0.0; dim];
            v[start] = 1.0;
            for _ in 0..t0 {
                v = q.apply(&v);
            }
            members.push((format!("evolved:H{h}:t{t0}"), v));
        }
    }

    // Verify membership and scan first-passage times to eps.
    let cap = certificate
        .map(|(.., rhs)| (rhs * rhs).ceil() as usize + 10)
        .unwrap_or(100_000);
    let mut empirical_max = 0usize;
    let mut worst = String::from("stationary");
    let mut family_size = 0usize;
    for (label, v) in members {
        let member = Distribution::new_unchecked(v.clone());
        if !ball.contains(&member, n, &nu_pi)? {
            continue;
        }
        family_size += 1;
        let mut v = v;
        let mut t = 0usize;
        while tv_slices(&v, nu_pi.weights()) > eps {
            v = q.apply(&v);
            t += 1;
            if t > cap {
                break;
            }
        }
        if t > empirical_max {
            empirical_max = t;
            worst = label;
        }
    }

    let pass = match certificate {
        Some((.., rhs)) => (empirical_max as f64).sqrt() < rhs,
        None => empirical_max < cap,
    };
    Ok(RestrictedMixingReport {
        n,
        eps,
        gamma,
        delta: certificate.map(|(d, ..)| d),
        swap_eps: certificate.map(|(_, e, ..)| e),
        swap_t_mix: certificate.map(|(_, _, t, _)| t),
        family,
        family_size,
        point_mass_family_empty,
        empirical_max,
        empirical_worst_member: worst,
        certified_bound: certificate.map(|(.., rhs)| rhs * rhs),
        pass,
    })
}

/// Least-squares line with coefficient of determination.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitLine {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitLine> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two (x, y) pairs".into(),
        ));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate regressor".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(FitLine {
        slope,
        intercept,
        r2,
    })
}

/// Fit of measured mixing times against the model t = a * n * ln(n / eps) + b.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub pairs: Vec<(usize, usize)>,
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub r2: f64,
}

impl ScalingFit {
    pub fn from_pairs(pairs: &[(usize, usize)], eps: f64) -> Result<Self> {
        if pairs.len() < 5 {
            return Err(Error::InvalidParameter(format!(
                "scaling fit needs at least 5 sizes, got {}",
                pairs.len()
            )));
        }
        let xs: Vec<f64> = pairs
            .iter()
            .map(|&(n, _)| n as f64 * (n as f64 / eps).ln())
            .collect();
        let ys: Vec<f64> = pairs.iter().map(|&(_, t)| t as f64).collect();
        let line = linear_fit(&xs, &ys)?;
        Ok(Self {
            pairs: pairs.to_vec(),
            eps,
            a: line.slope,
            b: line.intercept,
            r2: line.r2,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub eps: f64,
    pub t_mix: usize,
    pub gap: Option<f64>,
    pub worst_state: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub kind: ChainKind,
    pub rows: Vec<SweepRow>,
    pub fit: Option<ScalingFit>,
}

impl SweepResult {
    /// Range of n * gap over the rows that carry a gap; the band staying
    /// within a constant factor witnesses gap scaling like 1/n.
    pub fn n_gap_band(&self) -> Option<(f64, f64)> {
        let values: Vec<f64> = self
            .rows
            .iter()
            .filter_map(|r| r.gap.map(|g| r.n as f64 * g))
            .collect();
        if values.is_empty() {
            return None;
        }
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(0.0f64, f64::max);
        Some((min, max))
    }

    /// CSV with header `n,eps,t_mix,gap,fit_a,fit_b,r2`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,eps,t_mix,gap,fit_a,fit_b,r2")?;
        for row in &self.rows {
            let gap = row.gap.map_or(String::new(), |g| format!("{g}"));
            let (a, b, r2) = self
                .fit
                .as_ref()
                .map_or((String::new(), String::new(), String::new()), |f| {
                    (format!("{}", f.a), format!("{}", f.b), format!("{}", f.r2))
                });
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                row.n, row.eps, row.t_mix, gap, a, b, r2
            )?;
        }
        Ok(())
    }
}

/// Initial-state representatives for the worst-case scan, one per weight
/// class, justified by the permutation invariance of the string chains and
/// by vertex transitivity for the transposition walk. Chains without such a
/// symmetry argument return `None` and are scanned in full.
pub fn scan_representatives(kind: ChainKind, n: usize) -> Option<Vec<usize>> {
    match kind {
        ChainKind::P => Some(
            (1..=n)
                .map(|h| (0..h).map(|k| 4usize.pow(k as u32)).sum())
                .collect(),
        ),
        ChainKind::Q => Some((1..=n).map(|h| (1usize << h) - 1).collect()),
        ChainKind::RT => Some(vec![0]),
        _ => None,
    }
}

/// Mixing time and spectral gap across a range of sizes, with the scaling
/// fit against n ln(n / eps).
pub fn sweep(kind: ChainKind, ns: &[usize], eps: f64, compute_gaps: bool) -> Result<SweepResult> {
    if !matches!(
        kind,
        ChainKind::P | ChainKind::Q | ChainKind::Z | ChainKind::RT
    ) {
        return Err(Error::InvalidParameter(format!(
            "sweep supports kinds P, Q, Z, RT; got {kind}"
        )));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let fam = chains::build(kind, n)?;
        let float = fam.float();
        let pi = chains::stationary_f64(kind, n)?;
        let excluded = fam.excluded();
        let mut scan = MixingScan::new(&[eps]).excluded(&excluded);
        if let Some(reps) = scan_representatives(kind, n) {
            scan = scan.initial_states(&reps);
        }
        let report: MixingReport = mixing_reports(&float, &pi, &scan)?.remove(0);
        let gap = if compute_gaps {
            let active = float.dim() - excluded.len();
            Some(if active <= 1100 {
                spectrum_reversible(&float, &pi, &excluded)?.gap()
            } else {
                spectral_gap_lanczos(&float, &pi, &excluded, 260, 2024)?.1
            })
        } else {
            None
        };
        rows.push(SweepRow {
            n,
            eps,
            t_mix: report.t_mix,
            gap,
            worst_state: report.worst_state,
        });
    }
    let pairs: Vec<(usize, usize)> = rows.iter().map(|r| (r.n, r.t_mix)).collect();
    let fit = if pairs.len() >= 5 {
        Some(ScalingFit::from_pairs(&pairs, eps)?)
    } else {
        None
    };
    Ok(SweepResult { kind, rows, fit })
}

/// Binomial(t, p) probability mass table by stable multiplicative recurrence.
pub fn binomial_pmf(t: usize, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let mut pmf = Vec::with_capacity(t + 1);
    let mut value = q.powi(t as i32);
    pmf.push(value);
    for i in 0..t {
        value *= (t - i) as f64 / (i + 1) as f64 * (p / q);
        pmf.push(value);
    }
    pmf
}

/// Lower tail `P(X <= cutoff)` of Binomial(t, p).
pub fn binomial_lower_tail(t: usize, p: f64, cutoff: usize) -> f64 {
    binomial_pmf(t, p).iter().take(cutoff.min(t) + 1).sum()
}
