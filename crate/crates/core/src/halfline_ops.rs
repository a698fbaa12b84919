//! Half-line integral operators on a frequency grid:
//! `H` with kernel `1/(rho + sigma)`, the principal-value `QH` with kernel
//! `1/(rho - sigma)`, and the Laplace transform `L` with `H = L^2`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::Rule;
use crate::radial_transform::{FrequencyGrid, RadialProfile};

/// Gauss-Legendre order of the Laplace row panels.
const LAPLACE_ORDER: usize = 16;

/// `exp(-rho_lo * sigma_max)` must stay below this.
pub const LAPLACE_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Hankel,
    HilbertPv,
    Laplace,
}

/// Dense kernel with quadrature weights folded in symmetrically:
/// entry `(i, j)` is `sqrt(w_i) K(x_i, y_j) sqrt(v_j)`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub kind: KernelKind,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn zeros(kind: KernelKind, rows: usize, cols: usize) -> Self {
        Self { kind, rows, cols, entries: vec![0.0; rows * cols] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.entries.par_chunks(self.cols).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .into_par_iter()
            .map(|j| (0..self.rows).map(|i| self.entries[i * self.cols + j] * y[i]).sum())
            .collect()
    }

    /// `max |A - s A^T|` for `s = +1` (symmetry) or `-1` (antisymmetry).
    pub fn asymmetry(&self, s: f64) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows.min(self.cols) {
            for j in 0..self.rows.min(self.cols) {
                m = m.max((self.get(i, j) - s * self.get(j, i)).abs());
            }
        }
        m
    }
}

pub fn hankel_matrix(grid: &FrequencyGrid) -> KernelMatrix {
    let (x, w) = (grid.nodes(), grid.weights());
    let n = x.len();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut m = KernelMatrix::zeros(KernelKind::Hankel, n, n);
    m.entries.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for j in 0..n {
            row[j] = sw[i] * sw[j] / (x[i] + x[j]);
        }
    });
    m
}

/// Off-diagonal discretization of `QH`; exactly antisymmetric.
pub fn hilbert_matrix(grid: &FrequencyGrid) -> KernelMatrix {
    let (x, w) = (grid.nodes(), grid.weights());
    let n = x.len();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut m = KernelMatrix::zeros(KernelKind::HilbertPv, n, n);
    m.entries.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for j in 0..n {
            if i != j {
                row[j] = sw[i] * sw[j] / (x[i] - x[j]);
            }
        }
    });
    m
}

/// Rows on the Laplace variable grid, columns on the frequency grid.
pub fn laplace_matrix(grid: &FrequencyGrid, s: &LaplaceGrid) -> KernelMatrix {
    let (x, w) = (grid.nodes(), grid.weights());
    let n = x.len();
    let mut m = KernelMatrix::zeros(KernelKind::Laplace, s.rule.len(), n);
    m.entries.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
        let (sk, vk) = (s.rule.nodes[k], s.rule.weights[k].sqrt());
        for j in 0..n {
            row[j] = vk * (-sk * x[j]).exp() * w[j].sqrt();
        }
    });
    m
}

/// `(H phi)(rho_i) = int phi(sigma) / (rho_i + sigma) d sigma`.
pub fn hankel_apply(phi: &RadialProfile) -> RadialProfile {
    let grid = phi.grid();
    let (x, w) = (grid.nodes(), grid.weights());
    let v = phi.values();
    let out = x.par_iter().map(|&r| x.iter().zip(w).zip(v).map(|((&s, &ws), &p)| ws * p / (r + s)).sum()).collect();
    RadialProfile::new(grid.clone(), out).expect("finite")
}

#[derive(Debug, Clone)]
pub struct PvProfile {
    pub profile: RadialProfile,
    /// Nodes where the endpoint logarithm diverges; their values are set to 0.
    pub flagged: Vec<usize>,
}

/// Derivative at `x[i]` of the Lagrange interpolant through five neighbouring
/// nodes (shifted inward near the ends).
fn derivative_at(x: &[f64], v: &[f64], i: usize) -> f64 {
    let lo = i.saturating_sub(2).min(x.len().saturating_sub(5));
    let hi = (lo + 5).min(x.len());
    let xi = x[i];
    let mut acc = 0.0;
    for k in lo..hi {
        let wk = if k == i {
            (lo..hi).filter(|&m| m != i).map(|m| 1.0 / (xi - x[m])).sum()
        } else {
            let num: f64 = (lo..hi).filter(|&m| m != k && m != i).map(|m| xi - x[m]).product();
            let den: f64 = (lo..hi).filter(|&m| m != k).map(|m| x[k] - x[m]).product();
            num / den
        };
        acc += wk * v[k];
    }
    acc
}

/// Principal value `int phi(sigma) / (rho_i - sigma) d sigma` over the band by
/// singularity subtraction: the regularized integrand is integrated with the
/// grid rule and the subtracted constant contributes
/// `phi(rho_i) ln((rho_i - rho_lo) / (rho_hi - rho_i))`.
pub fn hilbert_pv_apply(phi: &RadialProfile) -> PvProfile {
    let grid = phi.grid();
    let (x, w) = (grid.nodes(), grid.weights());
    let v = phi.values();
    let n = x.len();
    let (lo, hi) = (grid.rho_lo(), grid.rho_hi());
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if i == 0 || i == n - 1 {
                return 0.0;
            }
            let (r, p) = (x[i], v[i]);
            let mut s = 0.0;
            for j in 0..n {
                let reg = if j == i { -derivative_at(x, v, i) } else { (v[j] - p) / (r - x[j]) };
                s += w[j] * reg;
            }
            s + p * ((r - lo) / (hi - r)).ln()
        })
        .collect();
    PvProfile { profile: RadialProfile::new(grid.clone(), out).expect("finite"), flagged: vec![0, n - 1] }
}

/// Two-node endpoint taper: 0 on the end nodes, 1/2 on their neighbours.
pub fn endpoint_taper(n: usize) -> Vec<f64> {
    let mut t = vec![1.0; n];
    if n >= 4 {
        t[0] = 0.0;
        t[n - 1] = 0.0;
        t[1] = 0.5;
        t[n - 2] = 0.5;
    }
    t
}

/// `<H phi, psi>`.
pub fn hankel_quadform(phi: &RadialProfile, psi: &RadialProfile) -> Result<f64> {
    if !phi.same_grid(psi) {
        return Err(Error::MismatchedGrids);
    }
    hankel_apply(phi).dot(psi)
}

/// `Re <phi, QH psi>` with the endpoint taper.
pub fn hilbert_cross(phi: &RadialProfile, psi: &RadialProfile) -> Result<f64> {
    if !phi.same_grid(psi) {
        return Err(Error::MismatchedGrids);
    }
    let q = hilbert_pv_apply(psi).profile;
    let taper = endpoint_taper(phi.grid().n());
    Ok(phi
        .grid()
        .weights()
        .iter()
        .zip(&taper)
        .zip(phi.values().iter().zip(q.values()))
        .map(|((w, t), (a, b))| w * t * a * b)
        .sum())
}

/// Graded rule on `[0, sigma_max]` for the Laplace variable.
#[derive(Debug, Clone)]
pub struct LaplaceGrid {
    pub rule: Rule,
    pub sigma_max: f64,
}

/// Smallest admissible `sigma_max` for a band starting at `rho_lo`.
pub fn laplace_sigma_min(rho_lo: f64) -> f64 {
    -LAPLACE_TAIL.ln() / rho_lo
}

/// Panels `[0, 1/(4 rho_hi)]`, then geometric growth by 1.25 up to `sigma_max`.
pub fn laplace_grid(rho_hi: f64, sigma_max: f64) -> LaplaceGrid {
    let mut breaks = vec![0.0];
    let mut b = 0.25 / rho_hi;
    while b < sigma_max {
        breaks.push(b);
        b *= 1.25;
    }
    breaks.push(sigma_max);
    LaplaceGrid { rule: Rule::gauss_on_breaks(&breaks, LAPLACE_ORDER), sigma_max }
}

/// `(L phi)(s_k) = int exp(-s_k sigma) phi(sigma) d sigma` on the row grid.
pub fn laplace_apply(phi: &RadialProfile, s: &LaplaceGrid) -> Result<Vec<f64>> {
    let grid = phi.grid();
    let need = laplace_sigma_min(grid.rho_lo());
    if s.sigma_max < need {
        return Err(Error::LaplaceTail { required: need, got: s.sigma_max });
    }
    let (x, w) = (grid.nodes(), grid.weights());
    let v = phi.values();
    Ok(s.rule
        .nodes
        .par_iter()
        .map(|&sk| x.iter().zip(w).zip(v).map(|((&r, &wr), &p)| wr * (-sk * r).exp() * p).sum())
        .collect())
}

/// `||L phi||^2` on the row grid.
pub fn laplace_norm_sq(phi: &RadialProfile, s: &LaplaceGrid) -> Result<f64> {
    let l = laplace_apply(phi, s)?;
    Ok(l.iter().zip(&s.rule.weights).map(|(v, w)| w * v * v).sum())
}

/// Largest singular value by power iteration on `A^T A`.
pub fn operator_norm_estimate(m: &KernelMatrix) -> Result<f64> {
    const CAP: usize = 20_000;
    if m.entries.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let mut x: Vec<f64> = (0..m.cols).map(|j| 1.0 + 0.25 * ((j as f64) * 0.618_033_988_75).fract()).collect();
    let mut prev = 0.0;
    for it in 0..CAP {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let y = m.matvec(&x);
        let est = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = m.matvec_t(&y);
        if it > 2 && (est - prev).abs() <= 1e-8 * est {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::NoConvergence { iterations: CAP, last: prev })
}

/// Relative grid resolution `max ((x_{i+1} - x_i) / x_i)^2`, the bound used for
/// the `pi (1 + 2 eps)` norm checks.
pub fn grid_epsilon(grid: &FrequencyGrid) -> f64 {
    grid.nodes().windows(2).map(|w| ((w[1] - w[0]) / w[0]).powi(2)).fold(0.0, f64::max)
}

/// Samples of `sigma^p 1_[a,b](sigma)`; jumps strictly inside the band take
/// the mean of the one-sided values.
pub fn indicator_power(grid: &Arc<FrequencyGrid>, a: f64, b: f64, p: f64) -> Result<RadialProfile> {
    let tol = |e: f64| 1e-12 * e.abs().max(1.0);
    if a < grid.rho_lo() - tol(a) || b > grid.rho_hi() + tol(b) || !(b > a) {
        return Err(Error::BandEscape(format!("[{a}, {b}] not inside [{}, {}]", grid.rho_lo(), grid.rho_hi())));
    }
    let a_inner = (a - grid.rho_lo()).abs() > tol(a);
    let b_inner = (b - grid.rho_hi()).abs() > tol(b);
    Ok(RadialProfile::from_fn(grid.clone(), |r| {
        let at_a = (r - a).abs() <= tol(a);
        let at_b = (r - b).abs() <= tol(b);
        if !(at_a || at_b) && (r < a || r > b) {
            return 0.0;
        }
        let half = at_a && a_inner || at_b && b_inner;
        (if half { 0.5 } else { 1.0 }) * r.powf(p)
    }))
}

/// `1_[a,b](sigma) / sqrt(sigma)`.
pub fn extremizer_profile(a: f64, b: f64, grid: &Arc<FrequencyGrid>) -> Result<RadialProfile> {
    indicator_power(grid, a, b, -0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_transform::FrequencyGrid;

    fn uniform(lo: f64, hi: f64, n: usize) -> Arc<FrequencyGrid> {
        Arc::new(FrequencyGrid::uniform(lo, hi, n).unwrap())
    }

    #[test]
    fn zero_inputs() {
        let g = uniform(1.0, 4.0, 101);
        let z = RadialProfile::zeros(g.clone());
        assert!(hankel_apply(&z).values().iter().all(|&v| v == 0.0));
        assert!(hilbert_pv_apply(&z).profile.values().iter().all(|&v| v == 0.0));
        let s = laplace_grid(4.0, laplace_sigma_min(1.0));
        assert!(laplace_apply(&z, &s).unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(operator_norm_estimate(&KernelMatrix::zeros(KernelKind::Hankel, 3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn hankel_of_indicator_is_log() {
        let g = uniform(1.0, 2.0, 201);
        let ind = RadialProfile::from_fn(g.clone(), |_| 1.0);
        let h = hankel_apply(&ind);
        for (&r, &v) in g.nodes().iter().zip(h.values()) {
            assert!((v - ((r + 2.0) / (r + 1.0)).ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn hilbert_of_constant_is_log() {
        let g = uniform(1.0, 3.0, 201);
        let one = RadialProfile::from_fn(g.clone(), |_| 1.0);
        let q = hilbert_pv_apply(&one);
        for i in 1..g.n() - 1 {
            let r = g.nodes()[i];
            assert!((q.profile.values()[i] - ((r - 1.0) / (3.0 - r)).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn laplace_of_indicator_closed_form() {
        let g = uniform(1.0, 2.0, 201);
        let ind = RadialProfile::from_fn(g.clone(), |_| 1.0);
        let s = laplace_grid(2.0, laplace_sigma_min(1.0));
        let l = laplace_apply(&ind, &s).unwrap();
        for (&sk, &v) in s.rule.nodes.iter().zip(&l) {
            let want = if sk < 1e-8 { 1.0 } else { ((-sk).exp() - (-2.0 * sk).exp()) / sk };
            assert!((v - want).abs() < 1e-9, "s={sk}");
        }
        assert!(matches!(laplace_apply(&ind, &laplace_grid(2.0, 1.0)), Err(Error::LaplaceTail { .. })));
    }

    #[test]
    fn matrix_symmetries() {
        let g = uniform(1.0, 4.0, 101);
        assert!(hankel_matrix(&g).asymmetry(1.0) < 1e-12);
        assert!(hilbert_matrix(&g).asymmetry(-1.0) < 1e-12);
    }

    #[test]
    fn narrow_band_norm_is_small() {
        let g = uniform(1.0, 1.1, 101);
        let n = operator_norm_estimate(&hankel_matrix(&g)).unwrap();
        assert!(n < 0.1 * std::f64::consts::PI);
    }

    #[test]
    fn extremizer_norm_is_log_ratio() {
        let g = Arc::new(FrequencyGrid::geometric(1.0, 10.0, 201).unwrap());
        let e = extremizer_profile(1.0, 10.0, &g).unwrap();
        assert!((e.norm_sq() - 10f64.ln()).abs() < 1e-12);
        assert!(extremizer_profile(0.5, 10.0, &g).is_err());
    }
}
