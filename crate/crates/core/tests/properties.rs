use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use radwave::asymptotics::{predict_exterior, Direction};
use radwave::catalog::{Shape, Slot};
use radwave::halfline_ops::{
    hankel_matrix, hankel_quadform, hilbert_cross, hilbert_matrix, laplace_grid, laplace_norm_sq, laplace_sigma_min,
};
use radwave::profiles::{energy_pairing, rescale, SeqRule};
use radwave::radial_transform::{
    make_grid, sobolev_energy, synthesize_field, CauchyData, DimensionParams, FrequencyGrid, RadialProfile,
};
use radwave::wave_engine::{region_energy, Region};

fn band_grid() -> Arc<FrequencyGrid> {
    make_grid(1.0, 4.0, 60.0, 60.0, 8.0).unwrap()
}

/// Window on the band times a cosine series with the given coefficients.
fn profile(g: &Arc<FrequencyGrid>, coef: &[f64]) -> RadialProfile {
    let (lo, hi) = (g.rho_lo(), g.rho_hi());
    RadialProfile::from_fn(g.clone(), |r| {
        let s = (r - lo) / (hi - lo);
        let series: f64 = coef.iter().enumerate().map(|(k, c)| c * (PI * k as f64 * s).cos()).sum();
        (PI * s).sin().powi(2) * series
    })
}

fn coefs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..8).prop_filter("nonzero", |v| v.iter().any(|c| c.abs() > 1e-3))
}

fn data(d: u32, f: &[f64], g: &[f64]) -> CauchyData {
    let grid = band_grid();
    CauchyData::new(DimensionParams::new(d).unwrap(), profile(&grid, f), profile(&grid, g)).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthesis_is_linear(d in 2u32..=6, f1 in coefs(), f2 in coefs(), g1 in coefs(), a in -2.0f64..2.0, t in 0.0f64..20.0) {
        let u = data(d, &f1, &g1);
        let v = data(d, &f2, &f1);
        let w = u.combine(a, &v, 1.0).unwrap();
        let r = [0.5, 3.0, 11.0, 27.0];
        let (fu, fv, fw) = (synthesize_field(&u, t, &r).unwrap(), synthesize_field(&v, t, &r).unwrap(), synthesize_field(&w, t, &r).unwrap());
        let scale = fu.ut.iter().chain(&fv.ut).chain(&fu.ur).fold(1e-12f64, |m, x| m.max(x.abs()));
        for i in 0..r.len() {
            prop_assert!((fw.u[i] - a * fu.u[i] - fv.u[i]).abs() <= 1e-12 * scale.max(fu.u[i].abs()));
            prop_assert!((fw.ut[i] - a * fu.ut[i] - fv.ut[i]).abs() <= 1e-12 * scale);
            prop_assert!((fw.ur[i] - a * fu.ur[i] - fv.ur[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn propagator_is_an_isometric_group(d in 2u32..=6, f in coefs(), g in coefs(), s in -30.0f64..30.0, t in -30.0f64..30.0) {
        let u = data(d, &f, &g);
        let e = sobolev_energy(&u).e_total;
        prop_assert!(close(sobolev_energy(&u.propagate(t)).e_total, e, 1e-12));
        let two = u.propagate(s).propagate(t);
        let one = u.propagate(s + t);
        let diff = two.combine(1.0, &one, -1.0).unwrap();
        prop_assert!(sobolev_energy(&diff).e_total <= 1e-20 * e);
    }

    #[test]
    fn pairing_is_conserved(d in 2u32..=6, f1 in coefs(), g1 in coefs(), f2 in coefs(), g2 in coefs(), t in -40.0f64..40.0) {
        let u = data(d, &f1, &g1);
        let w = data(d, &f2, &g2);
        let before = energy_pairing(&u, &w).unwrap();
        let after = energy_pairing(&u.propagate(t), &w.propagate(t)).unwrap();
        let scale = (sobolev_energy(&u).e_total * sobolev_energy(&w).e_total).sqrt();
        prop_assert!((before - after).abs() <= 1e-12 * scale);
    }

    #[test]
    fn hankel_form_is_positive_and_a_laplace_square(c in coefs()) {
        let g = band_grid();
        let phi = profile(&g, &c);
        let h = hankel_quadform(&phi, &phi).unwrap();
        let n = phi.norm_sq();
        prop_assert!(h >= -1e-10 * n);
        prop_assert!(h <= PI * n);
        let lap = laplace_grid(g.rho_hi(), laplace_sigma_min(g.rho_lo()));
        prop_assert!((h - laplace_norm_sq(&phi, &lap).unwrap()).abs() <= 1e-8 * n);
    }

    #[test]
    fn hankel_form_is_symmetric(a in coefs(), b in coefs()) {
        let g = band_grid();
        let (phi, psi) = (profile(&g, &a), profile(&g, &b));
        let s = (phi.norm_sq() * psi.norm_sq()).sqrt();
        prop_assert!((hankel_quadform(&phi, &psi).unwrap() - hankel_quadform(&psi, &phi).unwrap()).abs() <= 1e-12 * s);
    }

    #[test]
    fn hilbert_cross_is_antisymmetric(a in coefs(), b in coefs()) {
        let g = band_grid();
        let (phi, psi) = (profile(&g, &a), profile(&g, &b));
        let s = (phi.norm_sq() * psi.norm_sq()).sqrt();
        let sum = hilbert_cross(&phi, &psi).unwrap() + hilbert_cross(&psi, &phi).unwrap();
        prop_assert!(sum.abs() <= 1e-5 * s, "sum {sum} scale {s}");
        prop_assert!(hilbert_cross(&phi, &phi).unwrap().abs() <= 1e-5 * s);
    }

    #[test]
    fn exterior_energy_grows_with_delay(d in 2u32..=5, f in coefs(), g in coefs(), t in 5.0f64..40.0, t1 in 0.0f64..10.0, dt in 0.0f64..10.0) {
        let u = data(d, &f, &g);
        let a = region_energy(&u, t, Region::ExteriorCone { delay: t1 }).unwrap();
        let b = region_energy(&u, t, Region::ExteriorCone { delay: t1 + dt }).unwrap();
        prop_assert!(b.value >= a.value - 1e-10 * a.total);
        prop_assert!(a.value <= a.total * (1.0 + 1e-10));
    }

    #[test]
    fn time_reversal_swaps_directions(d in 2u32..=6, f in coefs(), g in coefs()) {
        let u = data(d, &f, &g);
        let rev = CauchyData::new(u.dim, u.fhat.clone(), u.ghat.scaled(-1.0)).unwrap();
        let p = predict_exterior(&u, Direction::Plus).unwrap().physical_prediction;
        let m = predict_exterior(&rev, Direction::Minus).unwrap().physical_prediction;
        prop_assert!(close(p, m, 1e-10));
    }

    #[test]
    fn odd_predictions_split_the_energy(d in prop::sample::select(vec![3u32, 5, 7]), f in coefs(), g in coefs()) {
        let u = data(d, &f, &g);
        let p = predict_exterior(&u, Direction::Plus).unwrap();
        let m = predict_exterior(&u, Direction::Minus).unwrap();
        prop_assert!(close(p.physical_prediction + m.physical_prediction, p.e_total, 1e-8));
    }

    #[test]
    fn rescaling_preserves_energy(d in 2u32..=6, lambda in 0.5f64..2.0) {
        let master = make_grid(0.5, 8.0, 80.0, 0.0, 8.0).unwrap();
        let base = Shape::Bump.data(Slot::Both, DimensionParams::new(d).unwrap(), make_grid(1.0, 4.0, 10.0, 0.0, 8.0).unwrap()).unwrap();
        let e0 = sobolev_energy(&base).e_total;
        let e1 = sobolev_energy(&rescale(&base, lambda, &master).unwrap()).e_total;
        prop_assert!(close(e0, e1, 1e-6), "{e0} vs {e1}");
    }

    #[test]
    fn seq_rules_round_trip(coef in -8.0f64..8.0, power in prop::sample::select(vec![0.0, 0.5, 1.0, 2.0])) {
        let r = SeqRule { coef, power };
        let back: SeqRule = r.to_string().parse().unwrap();
        prop_assert!(close(back.at(3.0), r.at(3.0), 1e-12));
    }
}

#[test]
fn kernel_matrices_have_exact_symmetry() {
    let g = make_grid(1.0, 4.0, 0.0, 0.0, 8.0).unwrap();
    assert_eq!(hankel_matrix(&g).asymmetry(1.0), 0.0);
    assert_eq!(hilbert_matrix(&g).asymmetry(-1.0), 0.0);
}
