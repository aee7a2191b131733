//! Per-slot transmission schemes.
//!
//! Each scheme maps one realization to a [`PhaseTrace`]: the active set and
//! SIRs of every phase plus the final decoding outcome. Random decisions
//! (SIR feedback errors, coin flips) are drawn from a caller-supplied stream,
//! one value per link per phase, so a run is a pure function of its inputs.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{weights_from_mask, RealizationView, SirVector};
use crate::error::{Error, Result};

/// Which scheme to run and its scheme-specific knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeKind {
    /// Every transmitter sends data immediately.
    Reference,
    /// Multi-phase probing: stay while the fed-back SIR clears `γ_k`.
    SirThreshold {
        thresholds: Vec<f64>,
        /// Variance of the additive Gaussian error on fed-back SIR values.
        sir_error_variance: f64,
    },
    /// Stay in each phase with probability `min(SIR / β, 1)`.
    ProbabilityBased { stages: usize },
    /// Transmit iff the direct fading gain `h_ii` reaches the threshold.
    ChannelThreshold { threshold: f64 },
}

/// A validated scheme together with the decoding threshold and slot timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    kind: SchemeKind,
    beta: f64,
    slot_duration: f64,
    probe_duration: f64,
}

impl SchemeConfig {
    /// Validates and builds a configuration. Slot length `T` and probe length
    /// `τ` must satisfy `N τ < T`.
    pub fn new(kind: SchemeKind, beta: f64, slot_duration: f64, probe_duration: f64) -> Result<Self> {
        let cfg = SchemeConfig {
            kind,
            beta,
            slot_duration,
            probe_duration,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn reference(beta: f64) -> Result<Self> {
        Self::new(SchemeKind::Reference, beta, 1.0, 0.0)
    }

    pub fn sir_threshold(thresholds: Vec<f64>, beta: f64) -> Result<Self> {
        Self::new(
            SchemeKind::SirThreshold {
                thresholds,
                sir_error_variance: 0.0,
            },
            beta,
            1.0,
            0.0,
        )
    }

    pub fn probability_based(stages: usize, beta: f64) -> Result<Self> {
        Self::new(SchemeKind::ProbabilityBased { stages }, beta, 1.0, 0.0)
    }

    pub fn channel_threshold(threshold: f64, beta: f64) -> Result<Self> {
        Self::new(SchemeKind::ChannelThreshold { threshold }, beta, 1.0, 0.0)
    }

    /// Sets the SIR feedback error variance (SirThreshold only).
    pub fn with_sir_error(mut self, variance: f64) -> Result<Self> {
        match &mut self.kind {
            SchemeKind::SirThreshold {
                sir_error_variance, ..
            } => *sir_error_variance = variance,
            _ => {
                return Err(Error::param(
                    "sigma2",
                    "SIR error variance applies only to the SIR-threshold scheme",
                ))
            }
        }
        self.validate().map(|_| self)
    }

    pub fn with_timing(mut self, probe_duration: f64, slot_duration: f64) -> Result<Self> {
        self.probe_duration = probe_duration;
        self.slot_duration = slot_duration;
        self.validate().map(|_| self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::param("beta", format!("must be positive and finite, got {}", self.beta)));
        }
        if !(self.slot_duration > 0.0) || !self.slot_duration.is_finite() {
            return Err(Error::param("slot_duration", "must be positive and finite"));
        }
        if !(self.probe_duration >= 0.0) || !self.probe_duration.is_finite() {
            return Err(Error::param("tau", "must be nonnegative and finite"));
        }
        match &self.kind {
            SchemeKind::Reference => {}
            SchemeKind::SirThreshold {
                thresholds,
                sir_error_variance,
            } => {
                if thresholds.is_empty() {
                    return Err(Error::param("thresholds", "need at least one probing phase"));
                }
                if let Some(g) = thresholds.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
                    return Err(Error::param("thresholds", format!("must be finite and >= 0, got {g}")));
                }
                if !(*sir_error_variance >= 0.0) || !sir_error_variance.is_finite() {
                    return Err(Error::param("sigma2", "must be finite and >= 0"));
                }
            }
            SchemeKind::ProbabilityBased { stages } => {
                if *stages == 0 {
                    return Err(Error::param("stages", "need at least one probing phase"));
                }
            }
            SchemeKind::ChannelThreshold { threshold } => {
                if !(*threshold >= 0.0) {
                    return Err(Error::param("channel_threshold", "must be >= 0 (infinity allowed)"));
                }
            }
        }
        let n = self.probe_stages() as f64;
        if n * self.probe_duration >= self.slot_duration {
            return Err(Error::param(
                "tau",
                format!(
                    "probing overhead N*tau = {} must stay below the slot duration {}",
                    n * self.probe_duration,
                    self.slot_duration
                ),
            ));
        }
        Ok(())
    }

    pub fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn slot_duration(&self) -> f64 {
        self.slot_duration
    }

    pub fn probe_duration(&self) -> f64 {
        self.probe_duration
    }

    /// Number of probing phases `N` (zero for the reference scheme, one for
    /// channel thresholding).
    pub fn probe_stages(&self) -> usize {
        match &self.kind {
            SchemeKind::Reference => 0,
            SchemeKind::SirThreshold { thresholds, .. } => thresholds.len(),
            SchemeKind::ProbabilityBased { stages } => *stages,
            SchemeKind::ChannelThreshold { .. } => 1,
        }
    }
}

/// `(T - N τ) / T` for the probing schemes and 1 otherwise.
pub fn effective_capacity_factor(cfg: &SchemeConfig) -> f64 {
    match cfg.kind {
        SchemeKind::SirThreshold { .. } | SchemeKind::ProbabilityBased { .. } => {
            let n = cfg.probe_stages() as f64;
            (cfg.slot_duration - n * cfg.probe_duration) / cfg.slot_duration
        }
        SchemeKind::Reference | SchemeKind::ChannelThreshold { .. } => 1.0,
    }
}

/// Phase-by-phase record of one scheme run on one realization.
///
/// `retained[k]` is the active set during phase `k`; the last entry is the
/// data phase. `sirs[k]` holds the SIR of every member of `retained[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrace {
    pub retained: Vec<Vec<bool>>,
    pub sirs: Vec<SirVector>,
    pub success: Vec<bool>,
}

impl PhaseTrace {
    pub fn success_count(&self) -> usize {
        self.success.iter().filter(|&&s| s).count()
    }

    /// Successful links whose transmitter lies in `mask` (e.g. the interior).
    pub fn success_count_in(&self, mask: &[bool]) -> usize {
        self.success.iter().zip(mask).filter(|(&s, &m)| s && m).count()
    }
}

/// SIR over `active` evaluated at the rows selected by `rows`.
pub(crate) fn sirs_at_rows(view: &RealizationView<'_>, active: &[bool], rows: &[bool]) -> SirVector {
    let weights = weights_from_mask(active);
    let mut out = SirVector::inactive(view.len());
    for i in 0..view.len() {
        if active[i] && rows[i] {
            out.set(i, view.sir_at(i, &weights));
        }
    }
    out
}

fn decode(sirs: &SirVector, active: &[bool], beta: f64) -> Vec<bool> {
    active
        .iter()
        .enumerate()
        .map(|(i, &a)| a && sirs.get(i).is_some_and(|s| s >= beta))
        .collect()
}

fn wrong_kind(expected: &str) -> Error {
    Error::param("kind", format!("configuration is not a {expected} scheme"))
}

/// All transmitters send; success iff `SIR ≥ β`.
pub fn run_reference(view: &RealizationView<'_>, cfg: &SchemeConfig) -> Result<PhaseTrace> {
    if cfg.kind != SchemeKind::Reference {
        return Err(wrong_kind("reference"));
    }
    let all = vec![true; view.len()];
    let sirs = sirs_at_rows(view, &all, &all);
    let success = decode(&sirs, &all, cfg.beta);
    Ok(PhaseTrace {
        retained: vec![all],
        sirs: vec![sirs],
        success,
    })
}

/// Draws one standard normal per link for a probing phase.
pub(crate) fn phase_noise<R: Rng + ?Sized>(n: usize, std_dev: f64, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            std_dev * z
        })
        .collect()
}

/// Multi-phase SIR-threshold probing.
///
/// With a positive error variance, each phase draws `n` fresh Gaussian errors
/// (one per link, in link order) from `rng`; the final `SIR ≥ β` decoding
/// test uses the true SIR.
pub fn run_sir_threshold<R: Rng + ?Sized>(
    view: &RealizationView<'_>,
    cfg: &SchemeConfig,
    rng: &mut R,
) -> Result<PhaseTrace> {
    let SchemeKind::SirThreshold {
        thresholds,
        sir_error_variance,
    } = &cfg.kind
    else {
        return Err(wrong_kind("SIR-threshold"));
    };
    let n = view.len();
    let std_dev = sir_error_variance.sqrt();
    let all = vec![true; n];
    let mut retained = vec![all.clone()];
    let mut sirs = vec![sirs_at_rows(view, &all, &all)];
    for &gamma in thresholds {
        let prev = retained.last().expect("phase 0 present");
        let prev_sir = sirs.last().expect("phase 0 present");
        let noise = (std_dev > 0.0).then(|| phase_noise(n, std_dev, rng));
        let next: Vec<bool> = (0..n)
            .map(|i| {
                prev[i] && {
                    let fed_back = prev_sir.get(i).expect("active link has SIR")
                        + noise.as_ref().map_or(0.0, |e| e[i]);
                    fed_back >= gamma
                }
            })
            .collect();
        let next_sir = if next == *prev {
            prev_sir.clone()
        } else {
            sirs_at_rows(view, &next, &next)
        };
        retained.push(next);
        sirs.push(next_sir);
    }
    let success = decode(sirs.last().unwrap(), retained.last().unwrap(), cfg.beta);
    Ok(PhaseTrace {
        retained,
        sirs,
        success,
    })
}

/// Probability-based probing: in each phase an active link draws one uniform
/// and stays iff it falls below `min(SIR / β, 1)`. A link that leaves stays
/// idle for the remainder of the slot. One uniform is drawn per link per
/// phase regardless of its state.
pub fn run_probability_based<R: Rng + ?Sized>(
    view: &RealizationView<'_>,
    cfg: &SchemeConfig,
    rng: &mut R,
) -> Result<PhaseTrace> {
    let SchemeKind::ProbabilityBased { stages } = cfg.kind else {
        return Err(wrong_kind("probability-based"));
    };
    let n = view.len();
    let all = vec![true; n];
    let mut retained = vec![all.clone()];
    let mut sirs = vec![sirs_at_rows(view, &all, &all)];
    for _ in 0..stages {
        let prev = retained.last().unwrap();
        let prev_sir = sirs.last().unwrap();
        let draws: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let next: Vec<bool> = (0..n)
            .map(|i| {
                prev[i] && {
                    let p = (prev_sir.get(i).unwrap() / cfg.beta).min(1.0);
                    draws[i] < p
                }
            })
            .collect();
        let next_sir = if next == *prev {
            prev_sir.clone()
        } else {
            sirs_at_rows(view, &next, &next)
        };
        retained.push(next);
        sirs.push(next_sir);
    }
    let success = decode(sirs.last().unwrap(), retained.last().unwrap(), cfg.beta);
    Ok(PhaseTrace {
        retained,
        sirs,
        success,
    })
}

/// Channel thresholding: link `i` transmits data iff `h_ii ≥ γ′`. Phase 0 is
/// recorded with everyone active, though its SIRs play no part in the
/// decision.
pub fn run_channel_threshold(view: &RealizationView<'_>, cfg: &SchemeConfig) -> Result<PhaseTrace> {
    let SchemeKind::ChannelThreshold { threshold } = cfg.kind else {
        return Err(wrong_kind("channel-threshold"));
    };
    let n = view.len();
    let all = vec![true; n];
    let sir0 = sirs_at_rows(view, &all, &all);
    let kept: Vec<bool> = (0..n).map(|i| view.direct_fading(i) >= threshold).collect();
    let sir1 = sirs_at_rows(view, &kept, &kept);
    let success = decode(&sir1, &kept, cfg.beta);
    Ok(PhaseTrace {
        retained: vec![all, kept],
        sirs: vec![sir0, sir1],
        success,
    })
}

/// Runs whichever scheme `cfg` selects. `rng` is consulted only by the
/// randomised schemes.
pub fn run_scheme<R: Rng + ?Sized>(
    view: &RealizationView<'_>,
    cfg: &SchemeConfig,
    rng: &mut R,
) -> Result<PhaseTrace> {
    match cfg.kind {
        SchemeKind::Reference => run_reference(view, cfg),
        SchemeKind::SirThreshold { .. } => run_sir_threshold(view, cfg, rng),
        SchemeKind::ProbabilityBased { .. } => run_probability_based(view, cfg, rng),
        SchemeKind::ChannelThreshold { .. } => run_channel_threshold(view, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_realization, NetworkRealization};
    use crate::geometry::{Point2, PointSet, SimWindow};
    use crate::streams::SeedStreams;
    use proptest::prelude::*;

    fn realization(seed: u64, density: f64) -> NetworkRealization {
        draw_realization(density, &SimWindow::default(), 10.0, 4.0, &SeedStreams::new(seed)).unwrap()
    }

    /// Two links whose SIRs are 3.0 and 0.75 by construction.
    fn hand_built() -> NetworkRealization {
        two_links(3.0)
    }

    /// Link 0 gets SIR `25 h00 / h10`, link 1 gets SIR `81 h11 / h01`.
    fn two_links(sir0: f64) -> NetworkRealization {
        let tx = PointSet::new(vec![Point2 { x: 0.0, y: 0.0 }, Point2 { x: 0.0, y: 20.0 }]);
        let rx = PointSet::new(vec![Point2 { x: 10.0, y: 0.0 }, Point2 { x: 0.0, y: 30.0 }]);
        let fading = vec![vec![sir0, 25.0], vec![81.0, 0.75]];
        NetworkRealization::from_parts(tx, rx, fading, vec![true, true], 10.0, 4.0).unwrap()
    }

    #[test]
    fn reference_on_hand_built_network() {
        let real = hand_built();
        let view = real.view();
        let trace = run_reference(&view, &SchemeConfig::reference(2.5).unwrap()).unwrap();
        let s0 = trace.sirs[0].get(0).unwrap();
        let s1 = trace.sirs[0].get(1).unwrap();
        assert!((s0 - 3.0).abs() < 1e-12, "{s0}");
        assert!((s1 - 0.75).abs() < 1e-12, "{s1}");
        assert_eq!(trace.success, vec![true, false]);
    }

    #[test]
    fn empty_network_gives_empty_trace() {
        let real = realization(1, 0.0);
        let trace = run_reference(&real.view(), &SchemeConfig::reference(2.5).unwrap()).unwrap();
        assert!(trace.success.is_empty());
        assert_eq!(trace.retained.len(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::reference(0.0).is_err());
        assert!(SchemeConfig::sir_threshold(vec![], 2.5).is_err());
        assert!(SchemeConfig::sir_threshold(vec![-0.1], 2.5).is_err());
        assert!(SchemeConfig::probability_based(0, 2.5).is_err());
        assert!(SchemeConfig::channel_threshold(-1.0, 2.5).is_err());
        assert!(SchemeConfig::channel_threshold(f64::INFINITY, 2.5).is_ok());
        let ten = SchemeConfig::sir_threshold(vec![0.1; 10], 2.5).unwrap();
        assert!(ten.clone().with_timing(0.1, 1.0).is_err());
        assert!(ten.clone().with_timing(0.04, 1.0).is_ok());
        assert!(SchemeConfig::reference(2.5).unwrap().with_sir_error(0.1).is_err());
    }

    #[test]
    fn capacity_factor_values() {
        let ten = SchemeConfig::sir_threshold(vec![0.1; 10], 2.5)
            .unwrap()
            .with_timing(0.04, 1.0)
            .unwrap();
        assert!((effective_capacity_factor(&ten) - 0.6).abs() < 1e-12);
        let nineteen = SchemeConfig::sir_threshold(vec![0.1; 19], 2.5)
            .unwrap()
            .with_timing(0.04, 1.0)
            .unwrap();
        assert!((effective_capacity_factor(&nineteen) - 0.24).abs() < 1e-12);
        let free = SchemeConfig::probability_based(7, 2.5).unwrap();
        assert_eq!(effective_capacity_factor(&free), 1.0);
        let ct = SchemeConfig::channel_threshold(0.4, 2.5)
            .unwrap()
            .with_timing(0.04, 1.0)
            .unwrap();
        assert_eq!(effective_capacity_factor(&ct), 1.0);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let real = realization(3, 0.001);
        let v = real.view();
        let reference = SchemeConfig::reference(2.5).unwrap();
        let mut rng = SeedStreams::new(0).decisions();
        assert!(run_sir_threshold(&v, &reference, &mut rng).is_err());
        assert!(run_probability_based(&v, &reference, &mut rng).is_err());
        assert!(run_channel_threshold(&v, &reference).is_err());
        assert!(run_reference(&v, &SchemeConfig::probability_based(1, 2.5).unwrap()).is_err());
    }

    fn proposed(real: &NetworkRealization, gamma: f64) -> Vec<bool> {
        let cfg = SchemeConfig::sir_threshold(vec![gamma], 2.5).unwrap();
        run_sir_threshold(&real.view(), &cfg, &mut SeedStreams::new(0).decisions())
            .unwrap()
            .success
    }

    fn subset(a: &[bool], b: &[bool]) -> bool {
        a.iter().zip(b).all(|(&x, &y)| !x || y)
    }

    #[test]
    fn regime_inclusions_over_seeded_realizations() {
        let reference = SchemeConfig::reference(2.5).unwrap();
        for seed in 0..100 {
            let real = realization(seed, 0.0025);
            let base = run_reference(&real.view(), &reference).unwrap().success;
            assert_eq!(proposed(&real, 0.0), base);
            assert_eq!(proposed(&real, 2.5), base);
            assert!(subset(&base, &proposed(&real, 0.6)));
            assert!(subset(&proposed(&real, 4.0), &base));
        }
    }

    #[test]
    fn probability_based_certain_cases() {
        let real = hand_built();
        let cfg = SchemeConfig::probability_based(1, 2.5).unwrap();
        // SIR_0 = 3 ≥ β is always kept.
        for seed in 0..200 {
            let t = run_probability_based(&real.view(), &cfg, &mut SeedStreams::new(seed).decisions()).unwrap();
            assert!(t.retained[1][0]);
        }
        // A link with zero direct gain has SIR 0 and never stays.
        let tx = PointSet::new(vec![Point2 { x: 0.0, y: 0.0 }, Point2 { x: 50.0, y: 0.0 }]);
        let rx = PointSet::new(vec![Point2 { x: 10.0, y: 0.0 }, Point2 { x: 60.0, y: 0.0 }]);
        let real = NetworkRealization::from_parts(tx, rx, vec![vec![0.0, 1.0], vec![1.0, 1.0]], vec![true; 2], 10.0, 4.0)
            .unwrap();
        for seed in 0..200 {
            let t = run_probability_based(&real.view(), &cfg, &mut SeedStreams::new(seed).decisions()).unwrap();
            assert!(!t.retained[1][0]);
        }
    }

    #[test]
    fn probability_based_half_retention_frequency() {
        let real = two_links(1.25);
        let cfg = SchemeConfig::probability_based(1, 2.5).unwrap();
        let v = real.view();
        let sir = run_reference(&v, &SchemeConfig::reference(2.5).unwrap()).unwrap().sirs[0].get(0).unwrap();
        assert!((sir - 1.25).abs() < 1e-12);
        let runs = 10_000;
        let kept = (0..runs)
            .filter(|&s| {
                run_probability_based(&v, &cfg, &mut SeedStreams::new(s).decisions()).unwrap().retained[1][0]
            })
            .count();
        let freq = kept as f64 / runs as f64;
        let se = (0.25 / runs as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * se, "{freq}");
    }

    #[test]
    fn probability_based_all_strong_is_deterministic() {
        // Isolated links far apart: every SIR is enormous.
        let tx: Vec<Point2> = (0..5).map(|k| Point2 { x: 1000.0 * k as f64, y: 0.0 }).collect();
        let rx: Vec<Point2> = tx.iter().map(|p| Point2 { x: p.x + 10.0, y: 0.0 }).collect();
        let real =
            NetworkRealization::from_parts(PointSet::new(tx), PointSet::new(rx), vec![vec![1.0; 5]; 5], vec![true; 5], 10.0, 4.0)
                .unwrap();
        let cfg = SchemeConfig::probability_based(3, 2.5).unwrap();
        let t = run_probability_based(&real.view(), &cfg, &mut SeedStreams::new(9).decisions()).unwrap();
        assert!(t.retained.iter().all(|m| m.iter().all(|&b| b)));
    }

    #[test]
    fn channel_threshold_limits() {
        let beta = 2.5;
        for seed in 0..20 {
            let real = realization(seed, 0.0025);
            let v = real.view();
            let base = run_reference(&v, &SchemeConfig::reference(beta).unwrap()).unwrap();
            let zero = run_channel_threshold(&v, &SchemeConfig::channel_threshold(0.0, beta).unwrap()).unwrap();
            assert_eq!(zero.success, base.success);
            assert_eq!(zero.sirs[0], base.sirs[0]);
            let inf = run_channel_threshold(&v, &SchemeConfig::channel_threshold(f64::INFINITY, beta).unwrap())
                .unwrap();
            assert_eq!(inf.success_count(), 0);
        }
    }

    #[test]
    fn channel_threshold_retained_fraction() {
        let cfg = SchemeConfig::channel_threshold(0.4, 2.5).unwrap();
        let mut fractions = Vec::new();
        for seed in 0..2000 {
            let real = realization(seed, 0.0005);
            let t = run_channel_threshold(&real.view(), &cfg).unwrap();
            let n = t.retained[1].len();
            if n > 0 {
                fractions.push(t.retained[1].iter().filter(|&&b| b).count() as f64 / n as f64);
            }
        }
        let m = fractions.len() as f64;
        let mean = fractions.iter().sum::<f64>() / m;
        let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let se = (var / m).sqrt();
        assert!((mean - (-0.4f64).exp()).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn multi_stage_sir_never_decreases() {
        for seed in 0..30 {
            let real = realization(seed, 0.003);
            let cfg = SchemeConfig::sir_threshold(vec![0.01, 0.03, 0.06, 0.1, 0.15, 0.21], 2.0).unwrap();
            let t = run_sir_threshold(&real.view(), &cfg, &mut SeedStreams::new(seed).decisions()).unwrap();
            for k in 1..t.retained.len() {
                for i in 0..real.len() {
                    if t.retained[k][i] {
                        assert!(t.retained[k - 1][i]);
                        assert!(t.sirs[k].get(i).unwrap() >= t.sirs[k - 1].get(i).unwrap());
                    }
                }
            }
            assert!(subset(&t.success, t.retained.last().unwrap()));
        }
    }

    #[test]
    fn sir_error_uses_true_sir_for_decoding() {
        let real = realization(17, 0.0025);
        let cfg = SchemeConfig::sir_threshold(vec![0.4], 2.5)
            .unwrap()
            .with_sir_error(0.01)
            .unwrap();
        let t = run_sir_threshold(&real.view(), &cfg, &mut SeedStreams::new(5).decisions()).unwrap();
        for i in 0..real.len() {
            let expect = t.retained[1][i] && t.sirs[1].get(i).unwrap() >= 2.5;
            assert_eq!(t.success[i], expect);
        }
        // The error makes some phase-1 decisions differ from error-free ones.
        let clean = run_sir_threshold(
            &real.view(),
            &SchemeConfig::sir_threshold(vec![0.4], 2.5).unwrap(),
            &mut SeedStreams::new(5).decisions(),
        )
        .unwrap();
        assert_ne!(t.retained[1], clean.retained[1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn stages_are_nested(seed in any::<u64>(), g in proptest::collection::vec(0.0f64..3.0, 1..5), sigma2 in 0.0f64..0.1) {
            let real = realization(seed, 0.002);
            let v = real.view();
            let cfg = SchemeConfig::sir_threshold(g, 2.5).unwrap().with_sir_error(sigma2).unwrap();
            let t = run_sir_threshold(&v, &cfg, &mut SeedStreams::new(seed).decisions()).unwrap();
            for k in 1..t.retained.len() {
                prop_assert!(subset(&t.retained[k], &t.retained[k - 1]));
            }
            prop_assert!(subset(&t.success, t.retained.last().unwrap()));
            let pb = SchemeConfig::probability_based(3, 2.5).unwrap();
            let t = run_probability_based(&v, &pb, &mut SeedStreams::new(seed).decisions()).unwrap();
            for k in 1..t.retained.len() {
                prop_assert!(subset(&t.retained[k], &t.retained[k - 1]));
            }
        }

        #[test]
        fn extra_stage_below_beta_never_hurts(seed in any::<u64>(), g1 in 0.0f64..2.4, step in 0.0f64..1.0) {
            let real = realization(seed, 0.003);
            let v = real.view();
            let mut rng = SeedStreams::new(0).decisions();
            let g2 = (g1 + step).min(2.49);
            let one = run_sir_threshold(&v, &SchemeConfig::sir_threshold(vec![g1], 2.5).unwrap(), &mut rng).unwrap();
            let two = run_sir_threshold(&v, &SchemeConfig::sir_threshold(vec![g1, g2], 2.5).unwrap(), &mut rng).unwrap();
            prop_assert!(subset(&one.success, &two.success));
            let flat = run_sir_threshold(&v, &SchemeConfig::sir_threshold(vec![g1, g1 * 0.5], 2.5).unwrap(), &mut rng).unwrap();
            prop_assert_eq!(&one.success, &flat.success);
        }
    }
}
