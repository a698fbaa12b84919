//! Synthetic profile-decomposition sequences
//! `u_n = sum_j lambda_{j,n}^{1 - d/2} U^j(-t_{j,n} / lambda_{j,n}, x / lambda_{j,n}) + w_n`.
//!
//! On the frequency side the rescaling is `fhat -> lambda^{d/2+1} fhat(lambda rho)`,
//! `ghat -> lambda^{d/2} ghat(lambda rho)`; since scaling commutes with the flow as
//! `S(t) scale_lambda = scale_lambda S(t / lambda)`, each piece is built as
//! `S(-t_{j,n})` applied to the rescaled base on the master grid.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::radial_transform::{sobolev_energy, CauchyData, FrequencyGrid, RadialProfile};
use crate::wave_engine::{region_energy, shell_integral, Region};

/// Admissible range of scales, so every rescaled band fits one master band.
pub const LAMBDA_RANGE: (f64, f64) = (0.125, 8.0);

/// Parameter rule `coef * n^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeqRule {
    pub coef: f64,
    pub power: f64,
}

impl SeqRule {
    pub fn constant(c: f64) -> Self {
        Self { coef: c, power: 0.0 }
    }

    pub fn linear(c: f64) -> Self {
        Self { coef: c, power: 1.0 }
    }

    pub fn at(&self, n: f64) -> f64 {
        if self.power == 0.0 {
            self.coef
        } else {
            self.coef * n.powf(self.power)
        }
    }
}

impl fmt::Display for SeqRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.power {
            0.0 => write!(f, "{}", self.coef),
            1.0 => write!(f, "{}*n", self.coef),
            p => write!(f, "{}*n^{}", self.coef, p),
        }
    }
}

impl FromStr for SeqRule {
    type Err = Error;
    /// `c`, `n`, `-n`, `c*n`, `n^p`, `c*n^p`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation { flag: "profile rule".into(), msg: format!("cannot parse {s:?}") };
        let s = s.trim().replace(' ', "");
        if let Ok(c) = s.parse::<f64>() {
            return Ok(Self::constant(c));
        }
        let (coef, rest) = match s.split_once('*') {
            Some((c, r)) => (c.parse::<f64>().map_err(|_| bad())?, r.to_string()),
            None => match s.strip_prefix('-') {
                Some(r) => (-1.0, r.to_string()),
                None => (1.0, s.clone()),
            },
        };
        let power = match rest.strip_prefix('n').ok_or_else(bad)? {
            "" => 1.0,
            p => p.strip_prefix('^').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        Ok(Self { coef, power })
    }
}

#[derive(Debug, Clone)]
pub struct ProfileSpec {
    /// The profile at its own time zero, on its own grid.
    pub base: CauchyData,
    pub lambda: SeqRule,
    pub time: SeqRule,
}

/// Degree-5 Lagrange interpolation of `values` on increasing `nodes`; zero outside.
fn interpolate(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    let tol = 1e-12 * nodes[n - 1].abs();
    if x < nodes[0] - tol || x > nodes[n - 1] + tol {
        return 0.0;
    }
    let k = nodes.partition_point(|&v| v < x);
    if k < n && (nodes[k] - x).abs() <= tol {
        return values[k];
    }
    if k > 0 && (nodes[k - 1] - x).abs() <= tol {
        return values[k - 1];
    }
    let lo = k.saturating_sub(3).min(n.saturating_sub(6));
    let hi = (lo + 6).min(n);
    let mut acc = 0.0;
    for i in lo..hi {
        let mut li = 1.0;
        for m in lo..hi {
            if m != i {
                li *= (x - nodes[m]) / (nodes[i] - nodes[m]);
            }
        }
        acc += li * values[i];
    }
    acc
}

/// `scale_lambda` of `base`, resampled onto `master`.
pub fn rescale(base: &CauchyData, lambda: f64, master: &Arc<FrequencyGrid>) -> Result<CauchyData> {
    let d = f64::from(base.dim.d);
    let bg = base.grid();
    let (x, f, g) = (bg.nodes(), base.fhat.values(), base.ghat.values());
    let (cf, cg) = (lambda.powf(d / 2.0 + 1.0), lambda.powf(d / 2.0));
    let fhat = RadialProfile::from_fn(master.clone(), |r| cf * interpolate(x, f, lambda * r));
    let ghat = RadialProfile::from_fn(master.clone(), |r| cg * interpolate(x, g, lambda * r));
    let mut out = CauchyData::new(base.dim, fhat, ghat)?;
    out.phase_span = lambda * base.phase_span;
    Ok(out)
}

/// The rescaled, time-translated pieces at index `n` (without the remainder).
pub fn build_pieces(specs: &[ProfileSpec], n: f64, master: &Arc<FrequencyGrid>) -> Result<Vec<CauchyData>> {
    specs
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let lambda = s.lambda.at(n);
            let bg = s.base.grid();
            let escape = !(LAMBDA_RANGE.0..=LAMBDA_RANGE.1).contains(&lambda)
                || bg.rho_lo() / lambda < master.rho_lo() * (1.0 - 1e-12)
                || bg.rho_hi() / lambda > master.rho_hi() * (1.0 + 1e-12);
            if escape {
                return Err(Error::BandEscape(format!(
                    "profile {j} at n = {n}: lambda = {lambda} maps [{}, {}] outside [{}, {}]",
                    bg.rho_lo(),
                    bg.rho_hi(),
                    master.rho_lo(),
                    master.rho_hi()
                )));
            }
            Ok(rescale(&s.base, lambda, master)?.propagate(-s.time.at(n)))
        })
        .collect()
}

/// `sum_j piece_j + remainder` on the master grid.
pub fn build_sequence(
    specs: &[ProfileSpec],
    remainder: Option<&CauchyData>,
    n: f64,
    master: &Arc<FrequencyGrid>,
) -> Result<CauchyData> {
    let pieces = build_pieces(specs, n, master)?;
    let dim = match (specs.first(), remainder) {
        (Some(s), _) => s.base.dim,
        (None, Some(r)) => r.dim,
        (None, None) => return domain("empty profile sequence"),
    };
    let mut acc = CauchyData::zero(dim, master.clone());
    for p in pieces.iter().chain(remainder) {
        acc = acc.combine(1.0, p, 1.0)?;
    }
    Ok(acc)
}

/// `min_{i != j} |ln(lambda_j / lambda_i)| + |t_j - t_i| / lambda_j` at index `n`.
pub fn pseudo_orthogonality(specs: &[ProfileSpec], n: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (j, a) in specs.iter().enumerate() {
        for (i, b) in specs.iter().enumerate() {
            if i == j {
                continue;
            }
            let (lj, li) = (a.lambda.at(n), b.lambda.at(n));
            let v = (lj / li).ln().abs() + (a.time.at(n) - b.time.at(n)).abs() / lj;
            best = Some(best.map_or(v, |x: f64| x.min(v)));
        }
    }
    best
}

/// Energy on `r >= r_n` at time zero.
fn outer_energy(data: &CauchyData, r_n: f64) -> Result<f64> {
    let s = region_energy(data, 0.0, Region::Ball { radius: r_n })?;
    Ok(s.total - s.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectRow {
    pub n: f64,
    pub r_n: f64,
    pub defect: f64,
    pub total: f64,
}

/// `|E_{r >= r_n}(u_n) - sum_j E_{r >= r_n}(piece_j) - E_{r >= r_n}(w_n)|` at time zero.
pub fn pythagorean_defect(
    specs: &[ProfileSpec],
    remainder: Option<&CauchyData>,
    n: f64,
    r_n: f64,
    master: &Arc<FrequencyGrid>,
) -> Result<DefectRow> {
    let pieces = build_pieces(specs, n, master)?;
    let sum = build_sequence(specs, remainder, n, master)?;
    let whole = outer_energy(&sum, r_n)?;
    let parts: Vec<f64> = pieces.iter().chain(remainder).map(|p| outer_energy(p, r_n)).collect::<Result<_>>()?;
    Ok(DefectRow { n, r_n, defect: (whole - parts.iter().sum::<f64>()).abs(), total: sobolev_energy(&sum).e_total })
}

/// Defect rows for several `(n, r_n)` pairs, in input order.
pub fn defect_study(
    specs: &[ProfileSpec],
    remainder: Option<&CauchyData>,
    ns: &[(f64, f64)],
    master: &Arc<FrequencyGrid>,
) -> Result<Vec<DefectRow>> {
    ns.par_iter().map(|&(n, r)| pythagorean_defect(specs, remainder, n, r, master)).collect()
}

/// Energy inner product `int (grad a . grad b + a_t b_t) dx`, on the frequency side.
pub fn energy_pairing(a: &CauchyData, b: &CauchyData) -> Result<f64> {
    if a.dim.d != b.dim.d || !a.fhat.same_grid(&b.fhat) {
        return Err(Error::MismatchedGrids);
    }
    let grid = a.grid();
    let dm1 = (a.dim.d - 1) as i32;
    let s: f64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .enumerate()
        .map(|(i, (&r, &w))| {
            w * r.powi(dm1)
                * (r * r * a.fhat.values()[i] * b.fhat.values()[i] + a.ghat.values()[i] * b.ghat.values()[i])
        })
        .sum();
    Ok(a.dim.plancherel_factor() * s)
}

/// `int_{|x| > r_n} grad_{x,t} S(t_n) U . (grad_x w_0, w_1) dx`: the full-space
/// pairing minus its r-quadrature over the ball `r < r_n`.
pub fn bilinear_cross_term(u: &CauchyData, w: &CauchyData, t_n: f64, r_n: f64) -> Result<f64> {
    let full = energy_pairing(&u.propagate(t_n), w)?;
    Ok(full - ball_pairing(u, w, t_n, r_n)?)
}

/// The same pairing restricted to `r < r_max`, by r-quadrature of synthesized fields.
pub fn ball_pairing(u: &CauchyData, w: &CauchyData, t_n: f64, r_max: f64) -> Result<f64> {
    shell_integral(&[(u, t_n), (w, 0.0)], 0.0, r_max, |f| f[0][1] * f[1][1] + f[0][2] * f[1][2])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationCheck {
    /// Physical-side pairing of `S(t_n) U` with `w` over `r < r_max`.
    pub physical: f64,
    /// Frequency-side pairing of `U` with `S(-t_n) w`.
    pub frequency: f64,
}

impl ConservationCheck {
    pub fn rel_error(&self) -> f64 {
        (self.physical - self.frequency).abs() / self.frequency.abs().max(f64::MIN_POSITIVE)
    }
}

/// Compares the r-quadrature of `S(t_n) U . w` (to a radius beyond both supports)
/// with the conserved pairing of `U` and `S(-t_n) w`.
pub fn conservation_identity(u: &CauchyData, w: &CauchyData, t_n: f64, r_max: f64) -> Result<ConservationCheck> {
    Ok(ConservationCheck {
        physical: ball_pairing(u, w, t_n, r_max)?,
        frequency: energy_pairing(u, &w.propagate(-t_n))?,
    })
}

/// Defect CSV: `n,r_n,defect,total`.
pub fn write_defect_csv<W: std::io::Write>(w: W, rows: &[DefectRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n", "r_n", "defect", "total"])?;
    for r in rows {
        wtr.write_record(&[r.n.to_string(), r.r_n.to_string(), r.defect.to_string(), r.total.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Shape, Slot};
    use crate::radial_transform::{make_grid, DimensionParams};

    #[test]
    fn rules_parse() {
        assert_eq!("3".parse::<SeqRule>().unwrap(), SeqRule::constant(3.0));
        assert_eq!("-n".parse::<SeqRule>().unwrap(), SeqRule::linear(-1.0));
        assert_eq!("0.5*n^2".parse::<SeqRule>().unwrap(), SeqRule { coef: 0.5, power: 2.0 });
        assert_eq!("n^0.5".parse::<SeqRule>().unwrap().at(16.0), 4.0);
        assert!("m".parse::<SeqRule>().is_err());
        for s in ["2", "-1*n", "0.5*n^2"] {
            let r: SeqRule = s.parse().unwrap();
            assert_eq!(r.to_string().parse::<SeqRule>().unwrap(), r);
        }
    }

    #[test]
    fn identity_profile_round_trips() {
        let dim = DimensionParams::new(3).unwrap();
        let grid = make_grid(1.0, 4.0, 20.0, 20.0, 8.0).unwrap();
        let base = Shape::Bump.data(Slot::Both, dim, grid.clone()).unwrap();
        let spec = ProfileSpec { base: base.clone(), lambda: SeqRule::constant(1.0), time: SeqRule::constant(0.0) };
        let u = build_sequence(&[spec], None, 5.0, &grid).unwrap();
        assert_eq!(u.fhat.values(), base.fhat.values());
        assert_eq!(u.ghat.values(), base.ghat.values());
    }

    #[test]
    fn scaling_escape_names_the_profile() {
        let dim = DimensionParams::new(2).unwrap();
        let grid = make_grid(1.0, 4.0, 20.0, 20.0, 8.0).unwrap();
        let base = Shape::Bump.data(Slot::F, dim, grid.clone()).unwrap();
        let spec = ProfileSpec { base, lambda: SeqRule::constant(2.0), time: SeqRule::constant(0.0) };
        let err = build_sequence(&[spec], None, 1.0, &grid).unwrap_err();
        assert!(err.to_string().contains("profile 0"), "{err}");
    }

    #[test]
    fn zero_partner_pairs_to_zero() {
        let dim = DimensionParams::new(3).unwrap();
        let grid = make_grid(1.0, 4.0, 30.0, 30.0, 8.0).unwrap();
        let u = Shape::Bump.data(Slot::F, dim, grid.clone()).unwrap();
        let z = CauchyData::zero(dim, grid);
        assert_eq!(bilinear_cross_term(&u, &z, 5.0, 3.0).unwrap(), 0.0);
    }
}
