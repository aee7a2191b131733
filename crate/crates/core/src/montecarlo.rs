//! Seeded Monte Carlo estimation of spatial capacity.
//!
//! Realization `r` of a plan is drawn from seeds derived from
//! `(base_seed, r)` only. Because transmitters enter a realization in order
//! of their density level, the realization at density `λ` is a leading block
//! of any realization drawn with the same seed at a higher density. A sweep
//! exploits this by drawing each realization once per group of compatible
//! plans and evaluating every plan on the matching sub-block, so all plans
//! of a group see common random numbers and every row equals what
//! [`estimate_capacity`] would return for that plan alone.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticParams;
use crate::channel::{draw_realization, NetworkRealization, RealizationView, SirVector};
use crate::error::{Error, Result};
use crate::geometry::SimWindow;
use crate::scheduling::{effective_capacity_factor, phase_noise, sirs_at_rows, SchemeConfig, SchemeKind};
use crate::streams::SeedStreams;

/// Default cap on the expected number of transmitters per realization.
pub const DEFAULT_MAX_POINTS: usize = 5000;

/// One Monte Carlo experiment: a scheme at a parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    params: AnalyticParams,
    scheme: SchemeConfig,
    window: SimWindow,
    realizations: usize,
    base_seed: u64,
    max_points: usize,
}

impl SimPlan {
    /// The decoding threshold of `scheme` must equal `params.beta()`.
    pub fn new(
        params: AnalyticParams,
        scheme: SchemeConfig,
        window: SimWindow,
        realizations: usize,
        base_seed: u64,
    ) -> Result<Self> {
        if realizations == 0 {
            return Err(Error::param("realizations", "must be at least 1"));
        }
        if scheme.beta() != params.beta() {
            return Err(Error::param(
                "beta",
                format!("scheme uses {} but parameters say {}", scheme.beta(), params.beta()),
            ));
        }
        Ok(SimPlan {
            params,
            scheme,
            window,
            realizations,
            base_seed,
            max_points: DEFAULT_MAX_POINTS,
        })
    }

    pub fn with_max_points(mut self, max_points: usize) -> Self {
        self.max_points = max_points;
        self
    }

    pub fn params(&self) -> &AnalyticParams {
        &self.params
    }
    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }
    pub fn window(&self) -> &SimWindow {
        &self.window
    }
    pub fn realizations(&self) -> usize {
        self.realizations
    }
    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }
    pub fn max_points(&self) -> usize {
        self.max_points
    }

    /// Expected transmitter count over the outer window.
    pub fn expected_points(&self) -> f64 {
        self.params.lambda0() * self.window.outer_area()
    }

    fn check_budget(&self) -> Result<()> {
        let expected = self.expected_points();
        if expected > self.max_points as f64 {
            return Err(Error::MemoryBudget {
                expected,
                budget: self.max_points,
            });
        }
        Ok(())
    }

    /// Random streams of realization `index`.
    pub fn streams(&self, index: usize) -> SeedStreams {
        SeedStreams::for_realization(self.base_seed, index as u64)
    }

    /// Realization `index` of this plan, exactly as the estimator sees it.
    pub fn realization(&self, index: usize) -> Result<NetworkRealization> {
        self.check_budget()?;
        draw_realization(
            self.params.lambda0(),
            &self.window,
            self.params.d(),
            self.params.alpha(),
            &self.streams(index),
        )
    }
}

/// Sample mean and spread of the per-realization spatial capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    /// Mean successful links per m² (already scaled by the time fraction).
    pub mean: f64,
    /// Sample standard deviation over `sqrt(realizations)`.
    pub std_error: f64,
    /// Interior successes over interior transmitters, pooled over all
    /// realizations (0 when no interior transmitter was ever drawn).
    pub success_prob_mean: f64,
    pub realizations: usize,
    pub base_seed: u64,
    /// Capacity of each realization in index order.
    pub per_realization: Vec<f64>,
}

/// Runs one plan.
pub fn estimate_capacity(plan: &SimPlan) -> Result<CapacityEstimate> {
    sweep(std::slice::from_ref(plan))
        .pop()
        .expect("one row per plan")
        .result
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub result: Result<CapacityEstimate>,
}

/// Runs every plan; rows come back in input order and a failing plan only
/// fails its own row.
pub fn sweep(plans: &[SimPlan]) -> Vec<SweepRow> {
    let mut rows: Vec<Option<Result<CapacityEstimate>>> = vec![None; plans.len()];
    let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for (i, plan) in plans.iter().enumerate() {
        match plan.check_budget() {
            Ok(()) => groups.entry(GroupKey::of(plan)).or_default().push(i),
            Err(e) => rows[i] = Some(Err(e)),
        }
    }
    for members in groups.values() {
        let results = run_group(plans, members);
        for (&i, r) in members.iter().zip(results) {
            rows[i] = Some(r);
        }
    }
    rows.into_iter()
        .enumerate()
        .map(|(index, r)| SweepRow {
            index,
            result: r.expect("every plan is assigned"),
        })
        .collect()
}

/// Plans sharing geometry, link model, realization count and seed can share
/// realizations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey {
    d: u64,
    alpha: u64,
    window: [u64; 4],
    realizations: usize,
    base_seed: u64,
}

impl GroupKey {
    fn of(plan: &SimPlan) -> Self {
        let w = plan.window;
        GroupKey {
            d: plan.params.d().to_bits(),
            alpha: plan.params.alpha().to_bits(),
            window: [
                w.outer_min().to_bits(),
                w.outer_max().to_bits(),
                w.inner_min().to_bits(),
                w.inner_max().to_bits(),
            ],
            realizations: plan.realizations,
            base_seed: plan.base_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    successes: usize,
    interior: usize,
}

fn run_group(plans: &[SimPlan], members: &[usize]) -> Vec<Result<CapacityEstimate>> {
    let lead = &plans[members[0]];
    let max_density = members
        .iter()
        .map(|&i| plans[i].params.lambda0())
        .fold(0.0, f64::max);
    let evaluator = GroupEvaluator::new(plans, members);
    let per_real: Vec<Result<Vec<Outcome>>> = (0..lead.realizations)
        .into_par_iter()
        .map(|r| {
            let streams = lead.streams(r);
            let real = draw_realization(
                max_density,
                &lead.window,
                lead.params.d(),
                lead.params.alpha(),
                &streams,
            )?;
            Ok(evaluator.evaluate(&real, &streams))
        })
        .collect();
    let per_real: Vec<Vec<Outcome>> = match per_real.into_iter().collect() {
        Ok(v) => v,
        Err(e) => return vec![Err(e); members.len()],
    };
    let area = lead.window.inner_area();
    members
        .iter()
        .enumerate()
        .map(|(slot, &i)| {
            let plan = &plans[i];
            let factor = effective_capacity_factor(&plan.scheme);
            let outcomes: Vec<Outcome> = per_real.iter().map(|o| o[slot]).collect();
            Ok(summarize(&outcomes, factor, area, plan.base_seed))
        })
        .collect()
}

fn summarize(outcomes: &[Outcome], factor: f64, area: f64, base_seed: u64) -> CapacityEstimate {
    let per_realization: Vec<f64> = outcomes
        .iter()
        .map(|o| factor * o.successes as f64 / area)
        .collect();
    let r = per_realization.len() as f64;
    let mean = per_realization.iter().sum::<f64>() / r;
    let std_error = if per_realization.len() > 1 {
        let var = per_realization.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (r - 1.0);
        (var / r).sqrt()
    } else {
        0.0
    };
    let successes: usize = outcomes.iter().map(|o| o.successes).sum();
    let interior: usize = outcomes.iter().map(|o| o.interior).sum();
    CapacityEstimate {
        mean,
        std_error,
        success_prob_mean: if interior > 0 {
            successes as f64 / interior as f64
        } else {
            0.0
        },
        realizations: outcomes.len(),
        base_seed,
        per_realization,
    }
}

/// An arm of the shared SIR-threshold evaluation. The reference scheme is
/// the arm with no thresholds.
#[derive(Debug, Clone)]
struct ThresholdArm {
    thresholds: Vec<f64>,
    beta: f64,
    slot: usize,
}

#[derive(Debug, Clone)]
enum OtherArm {
    Probability { stages: usize, beta: f64, slot: usize },
    Channel { threshold: f64, beta: f64, slot: usize },
}

/// All arms evaluated on one density block.
#[derive(Debug, Clone, Default)]
struct DensityBlock {
    density: f64,
    /// Threshold arms keyed by error variance (bit pattern); each list is
    /// sorted lexicographically by threshold sequence.
    threshold_arms: BTreeMap<u64, Vec<ThresholdArm>>,
    other_arms: Vec<OtherArm>,
}

struct GroupEvaluator {
    blocks: Vec<DensityBlock>,
    slots: usize,
}

impl GroupEvaluator {
    fn new(plans: &[SimPlan], members: &[usize]) -> Self {
        let mut by_density: BTreeMap<u64, DensityBlock> = BTreeMap::new();
        for (slot, &i) in members.iter().enumerate() {
            let plan = &plans[i];
            let density = plan.params.lambda0();
            let block = by_density.entry(density.to_bits()).or_insert_with(|| DensityBlock {
                density,
                ..Default::default()
            });
            let beta = plan.scheme.beta();
            match plan.scheme.kind() {
                SchemeKind::Reference => block.threshold_arms.entry(0f64.to_bits()).or_default().push(
                    ThresholdArm {
                        thresholds: Vec::new(),
                        beta,
                        slot,
                    },
                ),
                SchemeKind::SirThreshold {
                    thresholds,
                    sir_error_variance,
                } => block
                    .threshold_arms
                    .entry(sir_error_variance.to_bits())
                    .or_default()
                    .push(ThresholdArm {
                        thresholds: thresholds.clone(),
                        beta,
                        slot,
                    }),
                SchemeKind::ProbabilityBased { stages } => block.other_arms.push(OtherArm::Probability {
                    stages: *stages,
                    beta,
                    slot,
                }),
                SchemeKind::ChannelThreshold { threshold } => block.other_arms.push(OtherArm::Channel {
                    threshold: *threshold,
                    beta,
                    slot,
                }),
            }
        }
        for block in by_density.values_mut() {
            for arms in block.threshold_arms.values_mut() {
                arms.sort_by(|a, b| {
                    let n = a.thresholds.len().min(b.thresholds.len());
                    for k in 0..n {
                        let c = a.thresholds[k].total_cmp(&b.thresholds[k]);
                        if c.is_ne() {
                            return c;
                        }
                    }
                    a.thresholds.len().cmp(&b.thresholds.len())
                });
            }
        }
        GroupEvaluator {
            blocks: by_density.into_values().collect(),
            slots: members.len(),
        }
    }

    fn evaluate(&self, real: &NetworkRealization, streams: &SeedStreams) -> Vec<Outcome> {
        let mut out = vec![Outcome::default(); self.slots];
        for block in &self.blocks {
            let view = real.view_at_density(block.density);
            let n = view.len();
            let interior = view.interior();
            let interior_count = view.interior_count();
            let all = vec![true; n];
            let root = sirs_at_rows(&view, &all, &all);
            let ctx = Ctx { view: &view, interior };
            for (&sigma_bits, arms) in &block.threshold_arms {
                let variance = f64::from_bits(sigma_bits);
                let depth = arms.iter().map(|a| a.thresholds.len()).max().unwrap_or(0);
                let noise = if variance > 0.0 {
                    let mut rng = streams.decisions();
                    let sd = variance.sqrt();
                    (0..depth).map(|_| phase_noise(n, sd, &mut rng)).collect()
                } else {
                    Vec::new()
                };
                descend(&ctx, &noise, 0, &all, &root, arms, &mut out);
            }
            for arm in &block.other_arms {
                let (slot, successes) = match *arm {
                    OtherArm::Probability { stages, beta, slot } => (
                        slot,
                        probability_successes(&ctx, &root, stages, beta, &mut streams.decisions()),
                    ),
                    OtherArm::Channel { threshold, beta, slot } => {
                        let kept: Vec<bool> = (0..n).map(|i| view.direct_fading(i) >= threshold).collect();
                        (slot, final_successes(&ctx, &kept, beta))
                    }
                };
                out[slot] = Outcome {
                    successes,
                    interior: interior_count,
                };
            }
            for arms in block.threshold_arms.values() {
                for a in arms {
                    out[a.slot].interior = interior_count;
                }
            }
        }
        out
    }
}

struct Ctx<'v, 'a> {
    view: &'v RealizationView<'a>,
    interior: &'a [bool],
}

fn count_decoded(ctx: &Ctx<'_, '_>, active: &[bool], sirs: &SirVector, beta: f64) -> usize {
    (0..active.len())
        .filter(|&i| active[i] && ctx.interior[i] && sirs.get(i).is_some_and(|s| s >= beta))
        .count()
}

/// Interior successes when `active` transmits data.
fn final_successes(ctx: &Ctx<'_, '_>, active: &[bool], beta: f64) -> usize {
    let sirs = sirs_at_rows(ctx.view, active, ctx.interior);
    count_decoded(ctx, active, &sirs, beta)
}

/// Walks the prefix tree of threshold sequences. `arms` all share their
/// first `depth` thresholds; `active` and `sirs` describe phase `depth`,
/// with `sirs` valid on every active row whenever an arm continues past it.
fn descend(
    ctx: &Ctx<'_, '_>,
    noise: &[Vec<f64>],
    depth: usize,
    active: &[bool],
    sirs: &SirVector,
    arms: &[ThresholdArm],
    out: &mut [Outcome],
) {
    let split = arms.partition_point(|a| a.thresholds.len() == depth);
    for arm in &arms[..split] {
        out[arm.slot].successes = count_decoded(ctx, active, sirs, arm.beta);
    }
    let mut rest = &arms[split..];
    while let Some(first) = rest.first() {
        let gamma = first.thresholds[depth];
        let len = rest.partition_point(|a| a.thresholds[depth].to_bits() == gamma.to_bits());
        let (group, tail) = rest.split_at(len);
        rest = tail;
        let next: Vec<bool> = (0..active.len())
            .map(|i| {
                active[i] && {
                    let e = noise.get(depth).map_or(0.0, |v| v[i]);
                    sirs.get(i).expect("active row has SIR") + e >= gamma
                }
            })
            .collect();
        if next == active {
            descend(ctx, noise, depth + 1, active, sirs, group, out);
            continue;
        }
        let deeper = group.iter().any(|a| a.thresholds.len() > depth + 1);
        let rows: &[bool] = if deeper { &next } else { ctx.interior };
        let next_sirs = sirs_at_rows(ctx.view, &next, rows);
        descend(ctx, noise, depth + 1, &next, &next_sirs, group, out);
    }
}

/// Probability-based probing with phase-0 SIRs already known; consumes the
/// decision stream exactly as the trace-producing implementation does.
fn probability_successes<R: Rng + ?Sized>(
    ctx: &Ctx<'_, '_>,
    root: &SirVector,
    stages: usize,
    beta: f64,
    rng: &mut R,
) -> usize {
    let n = ctx.view.len();
    let mut active = vec![true; n];
    let mut sirs = root.clone();
    for stage in 0..stages {
        let draws: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let next: Vec<bool> = (0..n)
            .map(|i| active[i] && draws[i] < (sirs.get(i).unwrap() / beta).min(1.0))
            .collect();
        if next != active {
            let rows: &[bool] = if stage + 1 < stages { &next } else { ctx.interior };
            sirs = sirs_at_rows(ctx.view, &next, rows);
            active = next;
        }
    }
    count_decoded(ctx, &active, &sirs, beta)
}
