//! Dimension constants, frequency grids, band-limited radial profiles and the
//! radial Fourier pair
//!
//! ```text
//! f(r)    = (2 pi)^{-d/2} int fhat(rho) J_nu(r rho) (r rho)^{-nu} rho^{d-1} d rho
//! fhat(rho) = (2 pi)^{d/2} int f(r)   J_nu(r rho) (r rho)^{-nu} r^{d-1}   d r
//! ```
//!
//! Energies carry no factor 1/2: `e_pot = int |grad f|^2`, `e_kin = int |g|^2`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::quadrature::{simpson_weights, Rule};
use crate::specfun::{gamma_half, BesselOrder, RadialKernel};

/// Largest supported dimension; beyond it the Bessel switch point at 12
/// no longer gives 1e-10 accuracy for the orders involved.
pub const MAX_DIM: u32 = 8;

/// Minimal node count of a frequency grid.
pub const GRID_FLOOR: usize = 257;

/// Oversampling used when a grid is built from a node count alone.
pub const DEFAULT_OVERSAMPLE: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionParams {
    pub d: u32,
    pub nu: f64,
    pub mu: f64,
    pub tau: f64,
    pub sphere_area: f64,
    pub c_norm: f64,
    order: BesselOrder,
}

impl DimensionParams {
    pub fn new(d: u32) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return domain(format!("dimension {d} outside 2..={MAX_DIM}"));
        }
        let order = BesselOrder::for_dimension(d)?;
        let sphere_area = 2.0 * PI.powf(f64::from(d) / 2.0) / gamma_half(d);
        let c_norm = PI * (2.0 * PI).powi(d as i32) / sphere_area;
        Ok(Self { d, nu: order.nu(), mu: order.nu() + 0.5, tau: order.tau(), sphere_area, c_norm, order })
    }

    pub fn order(&self) -> BesselOrder {
        self.order
    }

    pub fn kernel(&self) -> RadialKernel {
        RadialKernel::new(self.order)
    }

    pub fn is_even(&self) -> bool {
        self.d.is_multiple_of(2)
    }

    /// `(-1)^{d/2}` for even `d`.
    pub fn even_sign(&self) -> Option<f64> {
        self.is_even().then(|| if (self.d / 2).is_multiple_of(2) { 1.0 } else { -1.0 })
    }

    /// `(-1)^{(d-1)/2}` for odd `d`.
    pub fn odd_sign(&self) -> Option<f64> {
        (!self.is_even()).then(|| if ((self.d - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 })
    }

    /// `(2 pi)^{-d/2}`, the synthesis prefactor.
    pub fn synthesis_factor(&self) -> f64 {
        (2.0 * PI).powf(-f64::from(self.d) / 2.0)
    }

    /// `(2 pi)^{-d} |S^{d-1}|`, converting `int |fhat|^2 rho^{d-1}` into `int |f|^2 dx`.
    pub fn plancherel_factor(&self) -> f64 {
        (2.0 * PI).powi(-(self.d as i32)) * self.sphere_area
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    Geometric,
}

/// Half-line band `[rho_lo, rho_hi]` with quadrature nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    kind: GridKind,
    rho_lo: f64,
    rho_hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    horizon: f64,
}

fn check_band(rho_lo: f64, rho_hi: f64) -> Result<()> {
    if !(rho_lo > 0.0 && rho_hi > rho_lo && rho_hi.is_finite()) {
        return domain(format!("band [{rho_lo}, {rho_hi}] must satisfy 0 < lo < hi"));
    }
    Ok(())
}

/// Node count making every phase `exp(i s rho)` with `|s| <= t_max + r_max`
/// sampled at `oversample` points per wavelength, odd and at least `GRID_FLOOR`.
pub fn grid_size(rho_lo: f64, rho_hi: f64, t_max: f64, r_max: f64, oversample: f64) -> usize {
    let need = oversample * (t_max + r_max) * (rho_hi - rho_lo) / (2.0 * PI);
    let mut n = (need.ceil() as usize + 1).max(GRID_FLOOR);
    if n.is_multiple_of(2) {
        n += 1;
    }
    n
}

/// Uniform Simpson grid certified for evolution up to `(t_max, r_max)`.
pub fn make_grid(rho_lo: f64, rho_hi: f64, t_max: f64, r_max: f64, oversample: f64) -> Result<Arc<FrequencyGrid>> {
    check_band(rho_lo, rho_hi)?;
    if !(t_max >= 0.0 && r_max >= 0.0) {
        return domain("t_max and r_max must be nonnegative");
    }
    if !(oversample >= 4.0) {
        return domain(format!("oversample {oversample} < 4"));
    }
    let n = grid_size(rho_lo, rho_hi, t_max, r_max, oversample);
    FrequencyGrid::uniform_with(rho_lo, rho_hi, n, oversample).map(Arc::new)
}

impl FrequencyGrid {
    pub fn uniform(rho_lo: f64, rho_hi: f64, n: usize) -> Result<Self> {
        Self::uniform_with(rho_lo, rho_hi, n, DEFAULT_OVERSAMPLE)
    }

    fn uniform_with(rho_lo: f64, rho_hi: f64, n: usize, oversample: f64) -> Result<Self> {
        check_band(rho_lo, rho_hi)?;
        if n < 3 || n.is_multiple_of(2) {
            return domain(format!("uniform grid needs an odd node count >= 3, got {n}"));
        }
        let h = (rho_hi - rho_lo) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| rho_lo + h * i as f64).collect();
        nodes[n - 1] = rho_hi;
        let weights = simpson_weights(rho_lo, rho_hi, n);
        Ok(Self { kind: GridKind::Uniform, rho_lo, rho_hi, nodes, weights, horizon: 2.0 * PI / (oversample * h) })
    }

    /// Simpson rule in `log rho`; suited to wide bands with scale-invariant
    /// integrands such as the half-line operators.
    pub fn geometric(rho_lo: f64, rho_hi: f64, n: usize) -> Result<Self> {
        check_band(rho_lo, rho_hi)?;
        if n < 3 || n.is_multiple_of(2) {
            return domain(format!("geometric grid needs an odd node count >= 3, got {n}"));
        }
        let len = (rho_hi / rho_lo).ln();
        let mut nodes: Vec<f64> = (0..n).map(|i| rho_lo * (len * i as f64 / (n - 1) as f64).exp()).collect();
        nodes[0] = rho_lo;
        nodes[n - 1] = rho_hi;
        let weights = simpson_weights(0.0, len, n).into_iter().zip(&nodes).map(|(w, r)| w * r).collect();
        let gap = rho_hi - nodes[n - 2];
        Ok(Self {
            kind: GridKind::Geometric,
            rho_lo,
            rho_hi,
            nodes,
            weights,
            horizon: 2.0 * PI / (DEFAULT_OVERSAMPLE * gap),
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn rho_lo(&self) -> f64 {
        self.rho_lo
    }

    pub fn rho_hi(&self) -> f64 {
        self.rho_hi
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest `|t| + r` the grid resolves at its oversampling.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Node spacing of a uniform grid, or the largest spacing otherwise.
    pub fn step(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn check_horizon(&self, required: f64) -> Result<()> {
        if required > self.horizon * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse { required, available: self.horizon });
        }
        Ok(())
    }
}

/// Real profile sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Arc<FrequencyGrid>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: Arc<FrequencyGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return domain(format!("profile has {} values for {} nodes", values.len(), grid.n()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("profile has non-finite entries");
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<FrequencyGrid>) -> Self {
        let n = grid.n();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<FrequencyGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_grid(&self, other: &RadialProfile) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|_, v| s * v)
    }

    /// Pointwise `f(rho, value)`.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&r, &v)| f(r, v)).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// `alpha self + beta other`.
    pub fn combine(&self, alpha: f64, other: &RadialProfile, beta: f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::MismatchedGrids);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    /// Half-line pairing `int phi psi d rho`.
    pub fn dot(&self, other: &RadialProfile) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::MismatchedGrids);
        }
        Ok(self.grid.weights().iter().zip(&self.values).zip(&other.values).map(|((w, a), b)| w * a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, a)| w * a * a).sum()
    }

    /// Multiply by `rho^p`.
    pub fn weighted(&self, p: f64) -> Self {
        self.map(|r, v| r.powf(p) * v)
    }
}

/// Radial Cauchy data `(fhat, ghat)` on a shared grid.
///
/// `phase_span` accumulates the absolute propagation time already folded into
/// the profiles; horizon checks add it to every requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub dim: DimensionParams,
    pub fhat: RadialProfile,
    pub ghat: RadialProfile,
    pub phase_span: f64,
}

impl CauchyData {
    pub fn new(dim: DimensionParams, fhat: RadialProfile, ghat: RadialProfile) -> Result<Self> {
        if !fhat.same_grid(&ghat) {
            return Err(Error::MismatchedGrids);
        }
        Ok(Self { dim, fhat, ghat, phase_span: 0.0 })
    }

    pub fn zero(dim: DimensionParams, grid: Arc<FrequencyGrid>) -> Self {
        Self { dim, fhat: RadialProfile::zeros(grid.clone()), ghat: RadialProfile::zeros(grid), phase_span: 0.0 }
    }

    pub fn grid(&self) -> &Arc<FrequencyGrid> {
        self.fhat.grid()
    }

    /// Free evolution by time `t`:
    /// `(fhat, ghat) -> (cos(t rho) fhat + sin(t rho) ghat / rho, -rho sin(t rho) fhat + cos(t rho) ghat)`.
    pub fn propagate(&self, t: f64) -> Self {
        let grid = self.grid().clone();
        let (f, g): (Vec<f64>, Vec<f64>) = grid
            .nodes()
            .iter()
            .zip(self.fhat.values().iter().zip(self.ghat.values()))
            .map(|(&r, (&f, &g))| {
                let (s, c) = (t * r).sin_cos();
                (c * f + s * g / r, -r * s * f + c * g)
            })
            .unzip();
        Self {
            dim: self.dim,
            fhat: RadialProfile { grid: grid.clone(), values: f },
            ghat: RadialProfile { grid, values: g },
            phase_span: self.phase_span + t.abs(),
        }
    }

    /// `alpha self + beta other`.
    pub fn combine(&self, alpha: f64, other: &CauchyData, beta: f64) -> Result<Self> {
        if self.dim.d != other.dim.d {
            return domain("combining data of different dimensions");
        }
        Ok(Self {
            dim: self.dim,
            fhat: self.fhat.combine(alpha, &other.fhat, beta)?,
            ghat: self.ghat.combine(alpha, &other.ghat, beta)?,
            phase_span: self.phase_span.max(other.phase_span),
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dim: self.dim, fhat: self.fhat.scaled(s), ghat: self.ghat.scaled(s), phase_span: self.phase_span }
    }

    /// Weighted profiles `(rho^{(d+1)/2} fhat, rho^{(d-1)/2} ghat)`.
    pub fn weighted_profiles(&self) -> (RadialProfile, RadialProfile) {
        (self.fhat.weighted(self.dim.mu + 1.0), self.ghat.weighted(self.dim.mu))
    }
}

/// Physical fields `(u, u_t, u_r)` at a fixed time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field {
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub ur: Vec<f64>,
}

/// Frequency-side coefficients of one solution at one time, premultiplied by
/// quadrature weight, `rho^{d-1}` and `(2 pi)^{-d/2}`.
#[derive(Debug, Clone)]
pub(crate) struct FieldCoeffs {
    /// multiplies `J_nu(r rho)(r rho)^{-nu}` for `u`
    pub(crate) a: Vec<f64>,
    /// multiplies the same kernel for `u_t`
    pub(crate) b: Vec<f64>,
    /// multiplies `J_{nu+1}(r rho)(r rho)^{-nu}` for `u_r`
    pub(crate) c: Vec<f64>,
}

impl FieldCoeffs {
    pub(crate) fn new(data: &CauchyData, t: f64) -> Self {
        let grid = data.grid();
        let pref = data.dim.synthesis_factor();
        let dm1 = (data.dim.d - 1) as i32;
        let n = grid.n();
        let (mut a, mut b, mut c) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for (i, &r) in grid.nodes().iter().enumerate() {
            let (s, co) = (t * r).sin_cos();
            let f = data.fhat.values()[i];
            let g = data.ghat.values()[i];
            let m = pref * grid.weights()[i] * r.powi(dm1);
            let amp_u = co * f + s * g / r;
            a.push(m * amp_u);
            b.push(m * (-s * r * f + co * g));
            c.push(-m * r * amp_u);
        }
        Self { a, b, c }
    }
}

/// Evaluates several solutions at one radius, sharing the kernel row.
pub(crate) fn eval_at(kernel: &RadialKernel, rho: &[f64], sets: &[&FieldCoeffs], r: f64, out: &mut [[f64; 3]]) {
    for o in out.iter_mut() {
        *o = [0.0; 3];
    }
    for (j, &p) in rho.iter().enumerate() {
        let (k0, k1) = kernel.eval(r * p);
        for (o, s) in out.iter_mut().zip(sets) {
            o[0] += s.a[j] * k0;
            o[1] += s.b[j] * k0;
            o[2] += s.c[j] * k1;
        }
    }
}

fn check_radii(r_nodes: &[f64]) -> Result<f64> {
    let mut rmax = 0.0f64;
    for &r in r_nodes {
        if !(r >= 0.0) || !r.is_finite() {
            return domain(format!("radius {r} must be finite and nonnegative"));
        }
        rmax = rmax.max(r);
    }
    Ok(rmax)
}

/// `(u, u_t, u_r)(t, r)` by quadrature on the data's grid.
pub fn synthesize_field(data: &CauchyData, t: f64, r_nodes: &[f64]) -> Result<Field> {
    let rmax = check_radii(r_nodes)?;
    data.grid().check_horizon(t.abs() + data.phase_span + rmax)?;
    let coeffs = FieldCoeffs::new(data, t);
    let kernel = data.dim.kernel();
    let rho = data.grid().nodes();
    let vals: Vec<[f64; 3]> = r_nodes
        .par_iter()
        .map(|&r| {
            let mut out = [[0.0; 3]; 1];
            eval_at(&kernel, rho, &[&coeffs], r, &mut out);
            out[0]
        })
        .collect();
    let mut field = Field::default();
    for v in vals {
        field.u.push(v[0]);
        field.ut.push(v[1]);
        field.ur.push(v[2]);
    }
    Ok(field)
}

/// Samples of a radial function against an r-quadrature rule.
#[derive(Debug, Clone)]
pub struct RadialSamples {
    pub rule: Rule,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub profile: RadialProfile,
    /// Set when the r-rule gap exceeds a quarter wavelength of the band edge.
    pub warning: Option<String>,
}

/// Forward transform `fhat(rho) = (2 pi)^{d/2} int f(r) J_nu(r rho)(r rho)^{-nu} r^{d-1} dr`
/// evaluated on the target grid.
pub fn analyze_profile(samples: &RadialSamples, dim: &DimensionParams, target: Arc<FrequencyGrid>) -> Result<Analysis> {
    if samples.values.len() != samples.rule.len() {
        return domain("sample count differs from the r-rule length");
    }
    check_radii(&samples.rule.nodes)?;
    let kernel = dim.kernel();
    let dm1 = (dim.d - 1) as i32;
    let pref = 1.0 / dim.synthesis_factor();
    let weighted: Vec<f64> = samples
        .rule
        .nodes
        .iter()
        .zip(&samples.rule.weights)
        .zip(&samples.values)
        .map(|((&r, &w), &v)| pref * w * v * r.powi(dm1))
        .collect();
    let values: Vec<f64> = target
        .nodes()
        .par_iter()
        .map(|&p| samples.rule.nodes.iter().zip(&weighted).map(|(&r, &w)| w * kernel.eval(r * p).0).sum())
        .collect();
    let quarter = PI / (2.0 * target.rho_hi());
    let warning = (samples.rule.max_gap > quarter)
        .then(|| format!("r-rule gap {:.4} exceeds quarter wavelength {:.4}", samples.rule.max_gap, quarter));
    Ok(Analysis { profile: RadialProfile::new(target, values)?, warning })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SobolevEnergy {
    pub e_total: f64,
    pub e_pot: f64,
    pub e_kin0: f64,
}

/// `e_pot = int |grad f|^2`, `e_kin0 = int |g|^2`, both evaluated on the frequency side.
pub fn sobolev_energy(data: &CauchyData) -> SobolevEnergy {
    let grid = data.grid();
    let dm1 = (data.dim.d - 1) as i32;
    let mut pot = 0.0;
    let mut kin = 0.0;
    for (i, &r) in grid.nodes().iter().enumerate() {
        let w = grid.weights()[i] * r.powi(dm1);
        let f = data.fhat.values()[i];
        let g = data.ghat.values()[i];
        pot += w * r * r * f * f;
        kin += w * g * g;
    }
    let c = data.dim.plancherel_factor();
    SobolevEnergy { e_total: c * (pot + kin), e_pot: c * pot, e_kin0: c * kin }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_constants() {
        let d3 = DimensionParams::new(3).unwrap();
        assert!((d3.sphere_area - 4.0 * PI).abs() < 1e-13);
        assert!((d3.c_norm - 2.0 * PI.powi(3)).abs() < 1e-11);
        let d2 = DimensionParams::new(2).unwrap();
        assert!((d2.c_norm - 2.0 * PI * PI).abs() < 1e-12);
        assert_eq!(d2.even_sign(), Some(-1.0));
        assert_eq!(DimensionParams::new(4).unwrap().even_sign(), Some(1.0));
        assert_eq!(DimensionParams::new(5).unwrap().odd_sign(), Some(1.0));
        assert_eq!(d3.odd_sign(), Some(-1.0));
        for d in 2..=MAX_DIM {
            let p = DimensionParams::new(d).unwrap();
            assert!((p.mu - p.nu - 0.5).abs() < 1e-15);
        }
        assert!(DimensionParams::new(1).is_err());
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(make_grid(1.0, 4.0, 0.0, 0.0, 8.0).unwrap().n(), GRID_FLOOR);
        let g = make_grid(1.0, 4.0, 100.0, 160.0, 8.0).unwrap();
        assert!(g.n() as f64 >= 8.0 * 260.0 * 3.0 / (2.0 * PI));
        assert_eq!(g.n() % 2, 1);
        let g2 = make_grid(1.0, 4.0, 100.0, 160.0, 16.0).unwrap();
        assert!(g2.n() >= 2 * g.n() - 2);
        assert!(make_grid(0.0, 4.0, 1.0, 1.0, 8.0).is_err());
        assert!(make_grid(1.0, 4.0, 1.0, 1.0, 2.0).is_err());
        assert!((g.weights().iter().sum::<f64>() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_grid_integrates_reciprocal() {
        let g = FrequencyGrid::geometric(1.0, 1e3, 401).unwrap();
        let s: f64 = g.weights().iter().zip(g.nodes()).map(|(w, r)| w / r).sum();
        assert!((s - 1e3f64.ln()).abs() < 1e-12);
        assert!((g.weights().iter().sum::<f64>() - 999.0).abs() < 1e-6);
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let dim = DimensionParams::new(3).unwrap();
        let grid = make_grid(1.0, 4.0, 10.0, 10.0, 8.0).unwrap();
        let data = CauchyData::zero(dim, grid);
        let f = synthesize_field(&data, 3.0, &[0.0, 1.0, 5.0]).unwrap();
        assert!(f.u.iter().chain(&f.ut).chain(&f.ur).all(|&v| v == 0.0));
        assert_eq!(sobolev_energy(&data).e_total, 0.0);
    }

    #[test]
    fn horizon_is_enforced() {
        let dim = DimensionParams::new(2).unwrap();
        let grid = make_grid(1.0, 4.0, 10.0, 10.0, 8.0).unwrap();
        let data = CauchyData::zero(dim, grid.clone());
        assert!(matches!(synthesize_field(&data, 10.0 * grid.horizon(), &[1.0]), Err(Error::GridTooCoarse { .. })));
    }
}
