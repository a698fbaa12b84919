//! Physical-space energies of the evolved wave.
//!
//! Only compact r-intervals are ever integrated: exterior and annulus energies
//! are the conserved total minus a ball or shell integral.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadrature::Rule;
use crate::radial_transform::{eval_at, sobolev_energy, CauchyData, FieldCoeffs};

/// Gauss-Legendre nodes per r-panel.
pub const R_PANEL_ORDER: usize = 12;

/// Panel width in units of the base r-step.
pub const R_PANEL_STEPS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `r <= radius`
    Ball { radius: f64 },
    /// `r >= max(|t| - delay, 0)`
    ExteriorCone { delay: f64 },
    /// `| r - |t| | >= half_width`
    Annulus { half_width: f64 },
}

impl Region {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Region::Ball { .. } => "ball",
            Region::ExteriorCone { .. } => "exterior_cone",
            Region::Annulus { .. } => "annulus",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            Region::Ball { radius } => radius,
            Region::ExteriorCone { delay } => delay,
            Region::Annulus { half_width } => half_width,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind_name(), self.param())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySnapshot {
    pub t: f64,
    pub region: Region,
    pub value: f64,
    pub total: f64,
    pub interior_complement: f64,
}

impl EnergySnapshot {
    pub fn fraction(&self) -> f64 {
        if self.total > 0.0 {
            self.value / self.total
        } else {
            0.0
        }
    }
}

/// Base r-step `min(pi / (8 rho_hi), width / 64)`.
pub fn r_step(rho_hi: f64, width: f64) -> f64 {
    (PI / (8.0 * rho_hi)).min(width / 64.0)
}

pub(crate) fn r_rule(rho_hi: f64, a: f64, b: f64) -> Rule {
    let h = r_step(rho_hi, b - a);
    Rule::gauss_panels(a, b, R_PANEL_STEPS * h, R_PANEL_ORDER)
}

/// `int_a^b F(fields) r^{d-1} |S^{d-1}| dr`, where `fields[k] = (u, u_t, u_r)` of
/// the k-th `(data, time)` pair. All data share one grid and dimension.
pub(crate) fn shell_integral<F>(sets: &[(&CauchyData, f64)], a: f64, b: f64, integrand: F) -> Result<f64>
where
    F: Fn(&[[f64; 3]]) -> f64 + Sync,
{
    let first = sets.first().expect("at least one data set").0;
    if !(a >= 0.0 && b >= a) {
        return domain(format!("shell [{a}, {b}] is not an interval in r >= 0"));
    }
    for (data, t) in sets {
        if data.dim.d != first.dim.d || !data.fhat.same_grid(&first.fhat) {
            return Err(Error::MismatchedGrids);
        }
        data.grid().check_horizon(t.abs() + data.phase_span + b)?;
    }
    if b == a {
        return Ok(0.0);
    }
    let grid = first.grid();
    let rule = r_rule(grid.rho_hi(), a, b);
    let coeffs: Vec<FieldCoeffs> = sets.iter().map(|(d, t)| FieldCoeffs::new(d, *t)).collect();
    let refs: Vec<&FieldCoeffs> = coeffs.iter().collect();
    let kernel = first.dim.kernel();
    let dm1 = (first.dim.d - 1) as i32;
    let rho = grid.nodes();
    let parts: Vec<f64> = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(&r, &w)| {
            let mut out = vec![[0.0; 3]; refs.len()];
            eval_at(&kernel, rho, &refs, r, &mut out);
            w * r.powi(dm1) * integrand(&out)
        })
        .collect();
    Ok(first.dim.sphere_area * parts.iter().sum::<f64>())
}

/// Energy `int_a^b (u_t^2 + u_r^2) r^{d-1} |S^{d-1}| dr` at time `t`.
pub fn shell_energy(data: &CauchyData, t: f64, a: f64, b: f64) -> Result<f64> {
    shell_integral(&[(data, t)], a, b, |f| f[0][1] * f[0][1] + f[0][2] * f[0][2])
}

/// Full-space `(e_kin, e_pot)` at time `t`, computed on the frequency side.
pub fn energy_split(data: &CauchyData, t: f64) -> (f64, f64) {
    let e = sobolev_energy(&data.propagate(t));
    (e.e_kin0, e.e_pot)
}

pub fn region_energy(data: &CauchyData, t: f64, region: Region) -> Result<EnergySnapshot> {
    let total = sobolev_energy(data).e_total;
    let at = t.abs();
    let value = match region {
        Region::Ball { radius } => {
            if !(radius >= 0.0) {
                return domain("ball radius must be nonnegative");
            }
            shell_energy(data, t, 0.0, radius)?
        }
        Region::ExteriorCone { delay } => {
            if !(delay >= 0.0) {
                return domain("delay must be nonnegative");
            }
            total - shell_energy(data, t, 0.0, (at - delay).max(0.0))?
        }
        Region::Annulus { half_width } => {
            if !(half_width >= 0.0) {
                return domain("annulus half-width must be nonnegative");
            }
            total - shell_energy(data, t, (at - half_width).max(0.0), at + half_width)?
        }
    };
    Ok(EnergySnapshot { t, region, value, total, interior_complement: total - value })
}

/// Exterior-cone energies along increasing times at fixed delay.
pub fn monotonicity_scan(data: &CauchyData, delay: f64, t_list: &[f64]) -> Result<Vec<EnergySnapshot>> {
    if t_list.windows(2).any(|w| w[1] <= w[0]) {
        return domain("t_list must be strictly increasing");
    }
    if t_list.iter().any(|&t| t < delay) {
        return domain("every t must be >= the delay");
    }
    t_list.iter().map(|&t| region_energy(data, t, Region::ExteriorCone { delay })).collect()
}

/// Snapshot CSV: `t,region_kind,param,value,total,fraction`.
pub fn write_snapshots_csv<W: std::io::Write>(w: W, snaps: &[EnergySnapshot]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t", "region_kind", "param", "value", "total", "fraction"])?;
    for s in snaps {
        wtr.write_record(&[
            s.t.to_string(),
            s.region.kind_name().to_string(),
            s.region.param().to_string(),
            s.value.to_string(),
            s.total.to_string(),
            s.fraction().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
