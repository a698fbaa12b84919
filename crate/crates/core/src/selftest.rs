//! A fixed, fast invariant suite. Each check reports a value and the bound it
//! must meet; the output carries no timings so repeated runs are identical.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::asymptotics::{
    averaged_hankel_decay, concentration_curve, counterexample_ratio, delay_finder, predict_exterior, Direction,
};
use crate::catalog::{Shape, Slot};
use crate::error::Result;
use crate::halfline_ops::{hankel_quadform, laplace_grid, laplace_norm_sq, laplace_sigma_min};
use crate::profiles::{pythagorean_defect, ProfileSpec, SeqRule};
use crate::radial_transform::{make_grid, sobolev_energy, DimensionParams, FrequencyGrid};
use crate::specfun::{bessel_j_asymptotic, bessel_j_series, bessel_ode_residual, switch_point, BesselOrder};
use crate::wave_engine::{region_energy, shell_energy, Region};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Upper bound on `value`.
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.to_string(), value, tolerance, pass: value <= tolerance }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn run_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let mut ode = 0.0f64;
    let mut switch = 0.0f64;
    for tw in 0..=5 {
        let order = BesselOrder::from_twice(tw);
        for i in 1..=2000 {
            let x = 0.05 * f64::from(i);
            ode = ode.max(bessel_ode_residual(order, x)? / (1.0 + x * x));
        }
        let xs = switch_point(order);
        let env = (2.0 / (PI * xs)).sqrt();
        switch = switch.max((bessel_j_series(order, xs) - bessel_j_asymptotic(order, xs)).abs() / env);
    }
    out.push(Check::at_most("bessel_ode_residual", ode, 1e-9));
    out.push(Check::at_most("bessel_branch_mismatch", switch, 1e-10));

    let d3 = DimensionParams::new(3)?;
    let g3 = make_grid(1.0, 4.0, 100.0, 100.0, 8.0)?;
    let both3 = Shape::Bump.data(Slot::Both, d3, g3.clone())?;
    let e3 = sobolev_energy(&both3).e_total;
    out.push(Check::at_most("plancherel_d3", rel(shell_energy(&both3, 0.0, 0.0, 60.0)?, e3), 1e-6));
    out.push(Check::at_most("propagator_isometry", rel(sobolev_energy(&both3.propagate(37.0)).e_total, e3), 1e-12));

    let d2 = DimensionParams::new(2)?;
    let g2 = make_grid(1.0, 4.0, 100.0, 125.0, 8.0)?;
    let (_, phi) = Shape::Bump.data(Slot::G, d2, g2.clone())?.weighted_profiles();
    let hq = hankel_quadform(&phi, &phi)?;
    let lap = laplace_grid(g2.rho_hi(), laplace_sigma_min(g2.rho_lo()));
    out.push(Check::at_most("hankel_positivity", -hq, 1e-10));
    out.push(Check::at_most("hankel_laplace_square", (hq - laplace_norm_sq(&phi, &lap)?).abs() / phi.norm_sq(), 1e-6));

    let mut odd = 0.0f64;
    for d in [3, 5] {
        let dim = DimensionParams::new(d)?;
        let data = Shape::Bump.data(Slot::Both, dim, g3.clone())?;
        let p = predict_exterior(&data, Direction::Plus)?;
        let m = predict_exterior(&data, Direction::Minus)?;
        odd = odd.max(rel(p.physical_prediction + m.physical_prediction, p.e_total));
    }
    out.push(Check::at_most("odd_completeness", odd, 1e-8));

    let g_only = Shape::Bump.data(Slot::G, d3, g3.clone())?;
    let frac = region_energy(&g_only, 100.0, Region::ExteriorCone { delay: 0.0 })?.fraction();
    out.push(Check::at_most("exterior_half_d3", rel(frac, 0.5), 0.02));

    let d4 = DimensionParams::new(4)?;
    let f4 = Shape::Bump.data(Slot::F, d4, g3.clone())?;
    let measured = region_energy(&f4, 100.0, Region::ExteriorCone { delay: 0.0 })?.value;
    let predicted = predict_exterior(&f4, Direction::Plus)?.physical_prediction;
    out.push(Check::at_most("two_path_d4_bump_f", rel(measured, predicted), 0.02));

    let ratios: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&b| counterexample_ratio(2, 1.0, b).map(|r| r.ratio))
        .collect::<Result<_>>()?;
    let rise = ratios.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    out.push(Check { name: "counterexample_decreasing".into(), value: rise, tolerance: 0.0, pass: rise < 0.0 });

    let f2 = Shape::Bump.data(Slot::F, d2, g2.clone())?;
    let e2 = sobolev_energy(&f2).e_total;
    let delay = delay_finder(&f2, 0.1, &[1.0, 2.0, 4.0, 8.0], 100.0)?;
    let found = delay.delay().unwrap_or(f64::INFINITY);
    out.push(Check::at_most("delay_found_d2", found, 8.0));

    let curve = concentration_curve(&f2, &[5.0, 10.0, 20.0], &[25.0, 50.0, 100.0])?;
    let growth = curve.windows(2).map(|w| w[1].sup_energy - w[0].sup_energy).fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::at_most("concentration_nonincreasing", growth / e2, 1e-12));

    let avg = averaged_hankel_decay(&f2.fhat, &f2.fhat, d2.mu, &[1.0, 100.0])?;
    out.push(Check::at_most("averaged_decay", avg[1].modulus / avg[0].modulus, 0.2));

    let base_grid = make_grid(1.0, 4.0, 0.0, 0.0, 8.0)?;
    let base = Shape::PolyBump.data(Slot::F, d3, base_grid)?;
    let master: Arc<FrequencyGrid> = make_grid(0.5, 4.0, 64.0, 0.0, 8.0)?;
    let specs = [
        ProfileSpec { base: base.clone(), lambda: SeqRule::constant(1.0), time: SeqRule::linear(1.0) },
        ProfileSpec { base, lambda: SeqRule::constant(2.0), time: SeqRule::linear(-1.0) },
    ];
    let defects: Vec<f64> = [4.0, 16.0, 64.0]
        .iter()
        .map(|&n| pythagorean_defect(&specs, None, n, 0.0, &master).map(|r| r.defect / r.total))
        .collect::<Result<_>>()?;
    let rise = defects.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    out.push(Check { name: "pythagorean_defect_decreasing".into(), value: rise, tolerance: 0.0, pass: rise < 0.0 });
    out.push(Check::at_most("pythagorean_defect_n64", defects[2], 0.05));

    Ok(out)
}
