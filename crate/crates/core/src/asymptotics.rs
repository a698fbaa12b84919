//! Closed-form limits of the exterior energy `E_{r >= |t|}` as `t -> +-inf`,
//! and the studies built on them.
//!
//! With `phi_f = rho^{(d+1)/2} fhat` and `phi_g = rho^{(d-1)/2} ghat`, the limit
//! times `C(d)` is the baseline `pi/2 int (rho^2 fhat^2 + ghat^2) rho^{d-1}` plus
//!
//! * even `d`: `(-1)^{d/2}/2 (<H phi_f, phi_f> - <H phi_g, phi_g>) + s <phi_f, QH phi_g>`
//! * odd `d`: `s ((-1)^{(d-1)/2} <H phi_f, phi_g> + <phi_f, QH phi_g>)`
//!
//! where `s = +1` for `t -> +inf` and `-1` for `t -> -inf`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::Shape;
use crate::error::{domain, Error, Result};
use crate::halfline_ops::{hankel_quadform, hilbert_cross};
use crate::radial_transform::{sobolev_energy, CauchyData, DimensionParams, FrequencyGrid, RadialProfile};
use crate::wave_engine::{region_energy, Region};

/// `C(d) = pi (2 pi)^d / |S^{d-1}|`.
pub fn c_constant(dim: &DimensionParams) -> f64 {
    dim.c_norm
}

/// Recorded in every prediction summary: which limit each sign labels, and how
/// the sign of the cross terms was settled.
pub const DIRECTION_CONVENTION: &str =
    "'+' is t -> +inf, '-' is t -> -inf; cross-term sign fixed empirically against direct evolution";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// `t -> +inf`
    #[serde(rename = "+")]
    Plus,
    /// `t -> -inf`
    #[serde(rename = "-")]
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }

    pub fn both() -> [Direction; 2] {
        [Direction::Plus, Direction::Minus]
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Plus => "+",
            Direction::Minus => "-",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Direction::Plus),
            "-" | "minus" => Ok(Direction::Minus),
            _ => Err(Error::Validation { flag: "--direction".into(), msg: format!("expected + or -, got {s}") }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticBreakdown {
    pub d: u32,
    pub direction: Direction,
    pub baseline: f64,
    /// `<H phi_f, phi_f>`
    pub hankel_f: f64,
    /// `<H phi_g, phi_g>`
    pub hankel_g: f64,
    /// `<H phi_f, phi_g>`
    pub cross_hankel: f64,
    /// `<phi_f, QH phi_g>`
    pub cross_hilbert: f64,
    /// Signed cross contribution actually added to the baseline.
    pub cross: f64,
    pub rhs_total: f64,
    pub c_constant: f64,
    pub physical_prediction: f64,
    pub e_total: f64,
}

impl AsymptoticBreakdown {
    pub fn ratio(&self) -> f64 {
        if self.e_total > 0.0 {
            self.physical_prediction / self.e_total
        } else {
            0.0
        }
    }
}

/// Limit of the exterior energy `E_{r >= |t|}(t)` in the given direction.
pub fn predict_exterior(data: &CauchyData, direction: Direction) -> Result<AsymptoticBreakdown> {
    let dim = data.dim;
    let (pf, pg) = data.weighted_profiles();
    let baseline = PI / 2.0 * (pf.norm_sq() + pg.norm_sq());
    let hankel_f = hankel_quadform(&pf, &pf)?;
    let hankel_g = hankel_quadform(&pg, &pg)?;
    let cross_hankel = hankel_quadform(&pf, &pg)?;
    let cross_hilbert = hilbert_cross(&pf, &pg)?;
    let s = direction.sign();
    let (cross, rhs_total) = match (dim.even_sign(), dim.odd_sign()) {
        (Some(e), _) => {
            let cross = s * cross_hilbert;
            (cross, baseline + e / 2.0 * (hankel_f - hankel_g) + cross)
        }
        (None, Some(o)) => {
            let cross = s * (o * cross_hankel + cross_hilbert);
            (cross, baseline + cross)
        }
        (None, None) => unreachable!("every dimension has a parity"),
    };
    let c = c_constant(&dim);
    Ok(AsymptoticBreakdown {
        d: dim.d,
        direction,
        baseline,
        hankel_f,
        hankel_g,
        cross_hankel,
        cross_hilbert,
        cross,
        rhs_total,
        c_constant: c,
        physical_prediction: rhs_total / c,
        e_total: sobolev_energy(data).e_total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub measured: f64,
    pub predicted: f64,
    pub abs_error: f64,
}

/// Measured `E_{r >= |t|}` at `+t` (or `-t`) against the limit, for each `t` in `t_list`.
pub fn convergence_study(data: &CauchyData, direction: Direction, t_list: &[f64]) -> Result<Vec<ConvergenceRow>> {
    if t_list.windows(2).any(|w| w[1] <= w[0]) || t_list.iter().any(|&t| t < 0.0) {
        return domain("t_list must be nonnegative and strictly increasing");
    }
    let predicted = predict_exterior(data, direction)?.physical_prediction;
    t_list
        .par_iter()
        .map(|&t| {
            let snap = region_energy(data, direction.sign() * t, Region::ExteriorCone { delay: 0.0 })?;
            Ok(ConvergenceRow { t, measured: snap.value, predicted, abs_error: (snap.value - predicted).abs() })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x` over the positive pairs.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Nodes of the geometric grid used for the counterexample family on `[a, b]`.
pub fn counterexample_grid_size(a: f64, b: f64) -> usize {
    let n = ((40.0 * (b / a).ln()).ceil() as usize).max(257);
    n | 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleResult {
    pub d: u32,
    pub a: f64,
    pub b: f64,
    pub ratio_plus: f64,
    pub ratio_minus: f64,
    pub ratio: f64,
}

/// `(f, 0)` data with `fhat = rho^{-(d+2)/2} 1_[a,b]`, so that `phi_f` is the
/// indicator-over-root profile; returns the smaller limit-to-total ratio of
/// the two directions.
pub fn counterexample_ratio(d: u32, a: f64, b: f64) -> Result<CounterexampleResult> {
    let dim = DimensionParams::new(d)?;
    if !dim.is_even() {
        return domain(format!("counterexample family needs even d, got {d}"));
    }
    if !(a > 0.0 && b > a) {
        return Err(Error::BandEscape(format!("[{a}, {b}] is not a band in (0, inf)")));
    }
    let grid = Arc::new(FrequencyGrid::geometric(a, b, counterexample_grid_size(a, b))?);
    counterexample_on_grid(dim, a, b, grid)
}

/// Same as [`counterexample_ratio`] on a caller-supplied grid containing `[a, b]`.
pub fn counterexample_on_grid(
    dim: DimensionParams,
    a: f64,
    b: f64,
    grid: Arc<FrequencyGrid>,
) -> Result<CounterexampleResult> {
    let data = Shape::IndicatorSqrt { a, b }.data(crate::catalog::Slot::F, dim, grid)?;
    let plus = predict_exterior(&data, Direction::Plus)?.ratio();
    let minus = predict_exterior(&data, Direction::Minus)?.ratio();
    Ok(CounterexampleResult { d: dim.d, a, b, ratio_plus: plus, ratio_minus: minus, ratio: plus.min(minus) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DelayOutcome {
    Found {
        delay: f64,
        /// `(t, exterior fraction)` at the verification times, probe last.
        checks: Vec<(f64, f64)>,
    },
    NotFound {
        best_delay: f64,
        best_fraction: f64,
    },
}

impl DelayOutcome {
    pub fn delay(&self) -> Option<f64> {
        match self {
            DelayOutcome::Found { delay, .. } => Some(*delay),
            DelayOutcome::NotFound { .. } => None,
        }
    }
}

/// Verification times for a delay `T`: three interior points of `[T, t_probe]`, then `t_probe`.
pub fn delay_checkpoints(delay: f64, t_probe: f64) -> [f64; 4] {
    let span = t_probe - delay;
    [delay + 0.25 * span, delay + 0.5 * span, delay + 0.75 * span, t_probe]
}

/// Smallest `T` in `t_grid` with `E_{r >= t - T}(t) >= (1 - eps) E` at every checkpoint.
pub fn delay_finder(data: &CauchyData, eps: f64, t_grid: &[f64], t_probe: f64) -> Result<DelayOutcome> {
    if !(eps > 0.0 && eps <= 1.0) {
        return domain("eps must lie in (0, 1]");
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] < 0.0 {
        return domain("T grid must be nonempty, nonnegative and strictly increasing");
    }
    if t_probe < *t_grid.last().unwrap() {
        return domain("t_probe must be >= the largest grid delay");
    }
    let total = sobolev_energy(data).e_total;
    let target = (1.0 - eps) * total;
    let mut best = (t_grid[0], f64::NEG_INFINITY);
    for &delay in t_grid {
        let probe = region_energy(data, t_probe, Region::ExteriorCone { delay })?;
        let frac = probe.fraction();
        if frac > best.1 {
            best = (delay, frac);
        }
        if probe.value < target {
            continue;
        }
        let checks: Vec<(f64, f64, bool)> = delay_checkpoints(delay, t_probe)
            .par_iter()
            .map(|&t| {
                let s = region_energy(data, t, Region::ExteriorCone { delay })?;
                Ok((t, s.fraction(), s.value >= target))
            })
            .collect::<Result<_>>()?;
        if checks.iter().all(|c| c.2) {
            return Ok(DelayOutcome::Found { delay, checks: checks.iter().map(|c| (c.0, c.1)).collect() });
        }
    }
    Ok(DelayOutcome::NotFound { best_delay: best.0, best_fraction: if total > 0.0 { best.1 } else { 0.0 } })
}

/// Geometric grid `lo, lo q, ..., hi` with `n` points.
pub fn geometric_delays(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let q = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo * (q * i as f64).exp() }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub half_width: f64,
    pub sup_energy: f64,
    pub argmax_t: f64,
}

/// For each half-width `T`, the largest energy off the annulus `||x| - t| < T` over `t_list`.
pub fn concentration_curve(data: &CauchyData, widths: &[f64], t_list: &[f64]) -> Result<Vec<ConcentrationRow>> {
    if t_list.is_empty() {
        return domain("t_list must be nonempty");
    }
    let jobs: Vec<(usize, f64)> =
        widths.iter().enumerate().flat_map(|(i, _)| t_list.iter().map(move |&t| (i, t))).collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, t)| Ok(region_energy(data, t, Region::Annulus { half_width: widths[i] })?.value))
        .collect::<Result<_>>()?;
    Ok(widths
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let row = &values[i * t_list.len()..(i + 1) * t_list.len()];
            let (k, v) = row.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, &v)| {
                    if v > acc.1 {
                        (k, v)
                    } else {
                        acc
                    }
                },
            );
            ConcentrationRow { half_width: w, sup_energy: v, argmax_t: t_list[k] }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageRow {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

/// `(1/T) int_0^T int int e^{i tau (x + y)} / (x + y) phi(x) psi(y) (x y)^mu`,
/// using `(1/T) int_0^T e^{i tau s} = (sin(Ts) + i (1 - cos(Ts))) / (Ts)`.
pub fn averaged_hankel_decay(
    phi: &RadialProfile,
    psi: &RadialProfile,
    mu: f64,
    horizons: &[f64],
) -> Result<Vec<AverageRow>> {
    if !phi.same_grid(psi) {
        return Err(Error::MismatchedGrids);
    }
    if horizons.iter().any(|&t| !(t >= 0.0)) {
        return domain("averaging horizons must be nonnegative");
    }
    let grid = phi.grid();
    let (x, w) = (grid.nodes(), grid.weights());
    let a: Vec<f64> = x.iter().zip(w).zip(phi.values()).map(|((&r, &w), &p)| w * p * r.powf(mu)).collect();
    let b: Vec<f64> = x.iter().zip(w).zip(psi.values()).map(|((&r, &w), &p)| w * p * r.powf(mu)).collect();
    Ok(horizons
        .par_iter()
        .map(|&big_t| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &xi) in x.iter().enumerate() {
                if a[i] == 0.0 {
                    continue;
                }
                let (mut ri, mut ii) = (0.0, 0.0);
                for (j, &xj) in x.iter().enumerate() {
                    let s = xi + xj;
                    let ts = big_t * s;
                    let (kr, ki) = if ts == 0.0 { (1.0, 0.0) } else { (ts.sin() / ts, (1.0 - ts.cos()) / ts) };
                    ri += b[j] * kr / s;
                    ii += b[j] * ki / s;
                }
                re += a[i] * ri;
                im += a[i] * ii;
            }
            AverageRow { horizon: big_t, re, im, modulus: re.hypot(im) }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct StudySummary {
    pub d: u32,
    pub data_id: String,
    pub prediction_breakdown: AsymptoticBreakdown,
    pub fit_slope: Option<f64>,
}
