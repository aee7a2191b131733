//! Path loss, Rayleigh fading and per-receiver SIR.
//!
//! A [`NetworkRealization`] is one slot: positions, a full fading matrix and
//! the derived gain matrix. Fading is drawn once per slot and shared by every
//! probing phase and the data phase.

use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::geometry::{
    interior_mask, place_receivers, sample_leveled_ppp, Point2, PointSet, SimWindow,
};
use crate::streams::SeedStreams;

/// `distance^(-alpha)`.
pub fn path_loss(distance: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::param(
            "distance",
            format!("must be positive and finite, got {distance}"),
        ));
    }
    Ok(distance.powf(-alpha))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::param(
            "alpha",
            format!("path-loss exponent must exceed 2, got {alpha}"),
        ));
    }
    Ok(())
}

#[inline]
fn path_loss_sq(dist_sq: f64, alpha: f64) -> f64 {
    let g = if alpha == 4.0 {
        1.0 / (dist_sq * dist_sq)
    } else {
        dist_sq.powf(-0.5 * alpha)
    };
    // Co-located pairs have probability zero; keep the matrix finite anyway.
    g.min(f64::MAX)
}

/// One sampled slot of the network.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    tx: PointSet,
    rx: PointSet,
    levels: Vec<f64>,
    link_distance: f64,
    alpha: f64,
    interior: Vec<bool>,
    /// `fading[i * n + j]` is `h_ji`, transmitter `j` into receiver `i`.
    fading: Vec<f64>,
    /// `gain[i * n + j] = h_ji * |x_j - r_i|^-alpha` for `j != i`, zero on the
    /// diagonal.
    gain: Vec<f64>,
    /// `h_ii * d^-alpha`.
    signal: Vec<f64>,
}

/// Draws one realization: PPP transmitters, receivers at `link_distance`,
/// interior mask and an `n x n` matrix of unit-mean exponential fading gains.
pub fn draw_realization(
    density: f64,
    window: &SimWindow,
    link_distance: f64,
    alpha: f64,
    streams: &SeedStreams,
) -> Result<NetworkRealization> {
    check_alpha(alpha)?;
    let leveled = sample_leveled_ppp(density, window, &mut streams.points())?;
    let rx = place_receivers(&leveled.points, link_distance, &mut streams.receivers())?;
    let n = leveled.points.count();
    let mut fading = vec![0.0; n * n];
    for (i, row) in fading.chunks_exact_mut(n.max(1)).take(n).enumerate() {
        let mut rng = streams.fading_row(i);
        for h in row.iter_mut() {
            *h = Exp1.sample(&mut rng);
        }
    }
    let interior = interior_mask(&leveled.points, window);
    NetworkRealization::assemble(
        leveled.points,
        rx,
        leveled.levels,
        fading,
        interior,
        link_distance,
        alpha,
    )
}

impl NetworkRealization {
    /// Builds a realization from explicit parts. `fading[i][j]` is the gain
    /// from transmitter `j` into receiver `i`. Used for hand-built scenarios.
    pub fn from_parts(
        tx: PointSet,
        rx: PointSet,
        fading: Vec<Vec<f64>>,
        interior: Vec<bool>,
        link_distance: f64,
        alpha: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let n = tx.count();
        if rx.count() != n || interior.len() != n || fading.len() != n {
            return Err(Error::param("fading", "dimension mismatch"));
        }
        if fading.iter().any(|r| r.len() != n) {
            return Err(Error::param("fading", "matrix must be square"));
        }
        if fading.iter().flatten().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(Error::param("fading", "entries must be finite and nonnegative"));
        }
        let flat = fading.into_iter().flatten().collect();
        let levels = vec![0.0; n];
        Self::assemble(tx, rx, levels, flat, interior, link_distance, alpha)
    }

    fn assemble(
        tx: PointSet,
        rx: PointSet,
        levels: Vec<f64>,
        fading: Vec<f64>,
        interior: Vec<bool>,
        link_distance: f64,
        alpha: f64,
    ) -> Result<Self> {
        let n = tx.count();
        let direct = path_loss(link_distance, alpha)?;
        let xs: Vec<f64> = tx.positions.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = tx.positions.iter().map(|p| p.y).collect();
        let mut gain = vec![0.0; n * n];
        let mut signal = vec![0.0; n];
        for i in 0..n {
            let r = rx.positions[i];
            let row = &mut gain[i * n..(i + 1) * n];
            let hrow = &fading[i * n..(i + 1) * n];
            let dist_sq = |j: usize| {
                let dx = xs[j] - r.x;
                let dy = ys[j] - r.y;
                dx * dx + dy * dy
            };
            // Two loop bodies so the common α = 4 case vectorises.
            if alpha == 4.0 {
                for (j, (g, &h)) in row.iter_mut().zip(hrow).enumerate() {
                    let d2 = dist_sq(j);
                    *g = h * (1.0 / (d2 * d2)).min(f64::MAX);
                }
            } else {
                for (j, (g, &h)) in row.iter_mut().zip(hrow).enumerate() {
                    *g = h * path_loss_sq(dist_sq(j), alpha);
                }
            }
            row[i] = 0.0;
            signal[i] = hrow[i] * direct;
        }
        Ok(NetworkRealization {
            tx,
            rx,
            levels,
            link_distance,
            alpha,
            interior,
            fading,
            gain,
            signal,
        })
    }

    pub fn len(&self) -> usize {
        self.tx.count()
    }

    pub fn is_empty(&self) -> bool {
        self.tx.is_empty()
    }

    pub fn transmitters(&self) -> &PointSet {
        &self.tx
    }

    pub fn receivers(&self) -> &PointSet {
        &self.rx
    }

    pub fn interior(&self) -> &[bool] {
        &self.interior
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn link_distance(&self) -> f64 {
        self.link_distance
    }

    /// Fading power gain `h_ji` from transmitter `j` to receiver `i`.
    pub fn fading(&self, j: usize, i: usize) -> f64 {
        self.fading[i * self.len() + j]
    }

    pub fn fading_matrix(&self) -> &[f64] {
        &self.fading
    }

    /// `|x_j - r_i|^-alpha`.
    pub fn path_loss_between(&self, j: usize, i: usize) -> f64 {
        path_loss_sq(self.tx.positions[j].distance_sq(self.rx.positions[i]), self.alpha)
    }

    pub fn view(&self) -> RealizationView<'_> {
        self.prefix_view(self.len())
    }

    /// The sub-realization at a lower intensity. Points appear in order of
    /// their density level, so this is the leading block of every matrix.
    pub fn view_at_density(&self, density: f64) -> RealizationView<'_> {
        let k = self.levels.partition_point(|&l| l <= density);
        self.prefix_view(k)
    }

    fn prefix_view(&self, k: usize) -> RealizationView<'_> {
        RealizationView {
            n: k,
            stride: self.len(),
            gain: &self.gain,
            fading: &self.fading,
            signal: &self.signal[..k],
            interior: &self.interior[..k],
            tx: &self.tx.positions[..k],
        }
    }
}

/// Borrowed view of the first `n` links of a realization.
#[derive(Debug, Clone, Copy)]
pub struct RealizationView<'a> {
    n: usize,
    stride: usize,
    gain: &'a [f64],
    fading: &'a [f64],
    signal: &'a [f64],
    interior: &'a [bool],
    tx: &'a [Point2],
}

impl<'a> RealizationView<'a> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn interior(&self) -> &'a [bool] {
        self.interior
    }

    pub fn interior_count(&self) -> usize {
        self.interior.iter().filter(|&&b| b).count()
    }

    pub fn transmitter(&self, i: usize) -> Point2 {
        self.tx[i]
    }

    /// Direct-link fading `h_ii`.
    pub fn direct_fading(&self, i: usize) -> f64 {
        self.fading[i * self.stride + i]
    }

    #[inline]
    fn gain_row(&self, i: usize) -> &'a [f64] {
        &self.gain[i * self.stride..i * self.stride + self.n]
    }

    /// Interference at receiver `i` from transmitters with weight 1.
    ///
    /// Summation runs over all `n` columns with a fixed lane assignment, so
    /// removing transmitters can never increase the rounded sum.
    #[inline]
    pub(crate) fn interference(&self, i: usize, weights: &[f64]) -> f64 {
        let row = self.gain_row(i);
        let mut acc = [0.0f64; 4];
        let rc = row.chunks_exact(4);
        let wc = weights.chunks_exact(4);
        let (rr, wr) = (rc.remainder(), wc.remainder());
        for (g, w) in rc.zip(wc) {
            acc[0] += g[0] * w[0];
            acc[1] += g[1] * w[1];
            acc[2] += g[2] * w[2];
            acc[3] += g[3] * w[3];
        }
        for (k, (g, w)) in rr.iter().zip(wr).enumerate() {
            acc[k] += g * w;
        }
        (acc[0] + acc[1]) + (acc[2] + acc[3])
    }

    #[inline]
    pub(crate) fn sir_at(&self, i: usize, weights: &[f64]) -> f64 {
        let interference = self.interference(i, weights);
        if interference > 0.0 {
            self.signal[i] / interference
        } else {
            f64::INFINITY
        }
    }
}

/// Linear-scale SIR per transmitter; `None` where the transmitter is idle.
/// A lone active transmitter sees no interference and gets `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct SirVector {
    values: Vec<f64>,
}

impl SirVector {
    pub(crate) fn inactive(n: usize) -> Self {
        SirVector {
            values: vec![f64::NAN; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        let v = self.values[i];
        (!v.is_nan()).then_some(v)
    }

    pub(crate) fn set(&mut self, i: usize, v: f64) {
        self.values[i] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

pub(crate) fn weights_from_mask(mask: &[bool]) -> Vec<f64> {
    mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

/// SIR at every active receiver of `view` with the active set `active`.
pub fn compute_sirs(view: &RealizationView<'_>, active: &[bool]) -> SirVector {
    assert_eq!(active.len(), view.len(), "mask length must equal link count");
    let weights = weights_from_mask(active);
    let mut out = SirVector::inactive(view.len());
    for (i, _) in active.iter().enumerate().filter(|(_, &a)| a) {
        out.set(i, view.sir_at(i, &weights));
    }
    out
}
