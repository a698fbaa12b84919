//! Bessel functions of the first kind for integer and half-integer orders.
//!
//! Two evaluation regimes: the ascending power series for `x <= switch_point(nu)`
//! and the Hankel large-argument expansion above it. The expansion is summed
//! until its terms stop decreasing (optimal truncation), which at `x = 12`
//! already leaves a relative error near `1e-11`. For half-integer orders the
//! expansion terminates and is exact.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{domain, Result};

/// Lower bound of the asymptotic regime.
pub const SWITCH_X: f64 = 12.0;

/// Order `nu = m/2` of a Bessel function together with its phase shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder {
    twice_nu: u32,
    nu: f64,
    tau: f64,
}

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        let twice = 2.0 * nu;
        if !(nu >= 0.0) || (twice - twice.round()).abs() > 1e-12 || twice > 1e6 {
            return domain(format!("Bessel order {nu} is not a nonnegative multiple of 1/2"));
        }
        Ok(Self::from_twice(twice.round() as u32))
    }

    /// `nu = twice_nu / 2`.
    pub fn from_twice(twice_nu: u32) -> Self {
        let nu = f64::from(twice_nu) / 2.0;
        Self { twice_nu, nu, tau: nu * FRAC_PI_2 + FRAC_PI_4 }
    }

    /// The order `(d-2)/2` attached to space dimension `d`.
    pub fn for_dimension(d: u32) -> Result<Self> {
        if d < 2 {
            return domain(format!("dimension {d} < 2"));
        }
        Ok(Self::from_twice(d - 2))
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn twice_nu(&self) -> u32 {
        self.twice_nu
    }

    pub fn is_half_odd(&self) -> bool {
        self.twice_nu % 2 == 1
    }

    pub fn raised(&self, k: u32) -> Self {
        Self::from_twice(self.twice_nu + 2 * k)
    }
}

/// `Gamma(m/2)` for a positive integer `m`, by the exact product formula.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m > 0, "Gamma has a pole at 0");
    let mut x = f64::from(m) / 2.0;
    let mut acc = 1.0;
    while x > 1.0 {
        x -= 1.0;
        acc *= x;
    }
    if m % 2 == 1 {
        acc * PI.sqrt()
    } else {
        acc
    }
}

/// Point where the series hands over to the asymptotic expansion.
pub fn switch_point(order: BesselOrder) -> f64 {
    SWITCH_X.max(2.0 * order.nu)
}

/// Ascending series of `J_nu(x) x^{-nu}` for the two orders `nu` and `nu+1`,
/// returned as `(J_nu(x) x^{-nu}, J_{nu+1}(x) x^{-nu})`.
fn reduced_series(twice_nu: u32, x: f64) -> (f64, f64) {
    let nu = f64::from(twice_nu) / 2.0;
    let y = 0.25 * x * x;
    let scale = 0.5f64.powf(nu) / gamma_half(twice_nu + 2);
    // c_k = (-y)^k / (k! (nu+1)_k), the Pochhammer absorbing Gamma(k+nu+1)/Gamma(nu+1)
    let mut c = 1.0;
    let mut s0 = 1.0;
    let mut s1 = 1.0 / (nu + 1.0);
    let mut k = 0.0;
    loop {
        k += 1.0;
        c *= -y / (k * (k + nu));
        s0 += c;
        let d = c / (k + nu + 1.0);
        s1 += d;
        if k * k > y && c.abs() < 1e-17 * s0.abs().max(1e-300) && d.abs() < 1e-17 * s1.abs().max(1e-300) {
            break;
        }
        if k > 200.0 {
            break;
        }
    }
    (scale * s0, scale * 0.5 * x * s1)
}

/// Hankel expansion coefficients `P`, `Q` for order with `4 nu^2 = mu`,
/// optimally truncated.
fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let z = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut k = 1u32;
    loop {
        let odd = f64::from(2 * k - 1);
        let next = term * (mu - odd * odd) / (f64::from(k) * z);
        // terms may grow while (2k-1)^2 < mu; past that point growth means divergence
        if next == 0.0 || (odd * odd > mu && next.abs() >= term.abs()) {
            break;
        }
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 * p.abs() {
            break;
        }
        k += 1;
    }
    (p, q)
}

/// Asymptotic values `(J_nu(x), J_{nu+1}(x))` for large `x`.
fn asymptotic_pair(order: BesselOrder, x: f64) -> (f64, f64) {
    let nu = order.nu;
    let (sin_chi, cos_chi) = (x - order.tau).sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    let (p0, q0) = hankel_pq(4.0 * nu * nu, x);
    let (p1, q1) = hankel_pq(4.0 * (nu + 1.0) * (nu + 1.0), x);
    let j0 = amp * (p0 * cos_chi - q0 * sin_chi);
    // chi for nu+1 is chi - pi/2
    let j1 = amp * (p1 * sin_chi + q1 * cos_chi);
    (j0, j1)
}

/// `J_nu(x)` from the power series alone. Accurate for `x <= SWITCH_X`.
pub fn bessel_j_series(order: BesselOrder, x: f64) -> f64 {
    let (k0, _) = reduced_series(order.twice_nu, x);
    k0 * x.powf(order.nu)
}

/// `J_nu(x)` from the asymptotic expansion alone.
pub fn bessel_j_asymptotic(order: BesselOrder, x: f64) -> f64 {
    asymptotic_pair(order, x).0
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return domain(format!("Bessel argument {x} must be finite and nonnegative"));
    }
    Ok(())
}

/// `(J_nu(x), J_{nu+1}(x))` with the regime chosen by `switch_point`.
pub fn bessel_j_pair(order: BesselOrder, x: f64) -> Result<(f64, f64)> {
    check_x(x)?;
    if x <= switch_point(order) {
        let (k0, k1) = reduced_series(order.twice_nu, x);
        let s = x.powf(order.nu);
        Ok((k0 * s, k1 * s))
    } else {
        Ok(asymptotic_pair(order, x))
    }
}

pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    bessel_j_pair(order, x).map(|p| p.0)
}

/// `J'_nu(x) = (nu/x) J_nu(x) - J_{nu+1}(x)`.
pub fn bessel_j_deriv(order: BesselOrder, x: f64) -> Result<f64> {
    check_x(x)?;
    if x == 0.0 {
        return match order.twice_nu {
            0 | 1 => domain("J'_nu(0) requested for nu < 1"),
            2 => Ok(0.5),
            _ => Ok(0.0),
        };
    }
    let (j0, j1) = bessel_j_pair(order, x)?;
    Ok(order.nu / x * j0 - j1)
}

/// `(J_nu - sqrt(2/(pi x)) cos(x - tau), J'_nu + sqrt(2/(pi x)) sin(x - tau))`.
pub fn bessel_asymptotic_residual(order: BesselOrder, x: f64) -> Result<(f64, f64)> {
    if !(x >= 1.0) {
        return domain(format!("asymptotic residual needs x >= 1, got {x}"));
    }
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = (x - order.tau).sin_cos();
    let j = bessel_j(order, x)?;
    let dj = bessel_j_deriv(order, x)?;
    Ok((j - amp * c, dj + amp * s))
}

/// `|x^2 J'' + x J' + (x^2 - nu^2) J|` at `x > 0`, with both derivatives taken
/// by nine-point central differences of the branch that serves `x` (so the
/// stencil never mixes series and asymptotic values). The step is `min(1/10, x/16)`.
pub fn bessel_ode_residual(order: BesselOrder, x: f64) -> Result<f64> {
    const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("ODE residual needs finite x > 0, got {x}"));
    }
    let series = x <= switch_point(order);
    let j = |y: f64| if series { bessel_j_series(order, y) } else { bessel_j_asymptotic(order, y) };
    let h = 0.1f64.min(x / 16.0);
    let c = j(x);
    let (mut d1, mut d2) = (0.0, -205.0 / 72.0 * c);
    for (k, (a, b)) in D1.iter().zip(&D2).enumerate() {
        let s = (k + 1) as f64 * h;
        let (p, m) = (j(x + s), j(x - s));
        d1 += a * (p - m);
        d2 += b * (p + m);
    }
    let (d1, d2) = (d1 / h, d2 / (h * h));
    let nu = order.nu;
    Ok((x * x * d2 + x * d1 + (x * x - nu * nu) * c).abs())
}

/// `sup x^{3/2} max(|r1|, |r2|)` over `n` log-spaced samples of `[x_lo, x_hi]`.
pub fn residual_envelope(order: BesselOrder, x_lo: f64, x_hi: f64, n: usize) -> Result<f64> {
    let ratio = (x_hi / x_lo).ln();
    let mut sup = 0.0f64;
    for i in 0..n {
        let x = x_lo * (ratio * i as f64 / (n.max(2) - 1) as f64).exp();
        let (r1, r2) = bessel_asymptotic_residual(order, x)?;
        sup = sup.max(x.powf(1.5) * r1.abs().max(r2.abs()));
    }
    Ok(sup)
}

/// Half-integer orders in closed trigonometric form, by upward recurrence
/// from `J_{-1/2} = sqrt(2/(pi x)) cos x` and `J_{1/2} = sqrt(2/(pi x)) sin x`.
/// Stable for `x` not much smaller than the order.
pub fn bessel_j_half_closed(order: BesselOrder, x: f64) -> Result<f64> {
    if !order.is_half_odd() {
        return domain("closed form exists only for half-odd orders");
    }
    if !(x > 0.0) {
        return domain("closed form needs x > 0");
    }
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = x.sin_cos();
    let mut prev = amp * c;
    let mut cur = amp * s;
    let mut nu = 0.5;
    while nu < order.nu {
        let next = 2.0 * nu / x * cur - prev;
        prev = cur;
        cur = next;
        nu += 1.0;
    }
    Ok(cur)
}

/// Radial Fourier kernel in reduced form for a fixed dimension.
///
/// `eval(x)` returns `(J_nu(x) x^{-nu}, J_{nu+1}(x) x^{-nu})`; both are analytic
/// at `x = 0`, so small radii need no special casing. The first entry at zero
/// equals `2^{-nu} / Gamma(nu + 1)`.
#[derive(Debug, Clone, Copy)]
pub struct RadialKernel {
    order: BesselOrder,
    switch: f64,
}

impl RadialKernel {
    pub fn new(order: BesselOrder) -> Self {
        Self { order, switch: switch_point(order) }
    }

    pub fn order(&self) -> BesselOrder {
        self.order
    }

    #[inline]
    pub fn eval(&self, x: f64) -> (f64, f64) {
        if x <= self.switch {
            reduced_series(self.order.twice_nu, x)
        } else {
            let (j0, j1) = asymptotic_pair(self.order, x);
            let s = reduced_power(self.order.twice_nu, x);
            (j0 * s, j1 * s)
        }
    }

    /// Kernel value at the origin.
    pub fn at_zero(&self) -> f64 {
        0.5f64.powf(self.order.nu) / gamma_half(self.order.twice_nu + 2)
    }
}

#[inline]
fn reduced_power(twice_nu: u32, x: f64) -> f64 {
    let ip = (twice_nu / 2) as i32;
    let p = x.powi(-ip);
    if twice_nu % 2 == 1 {
        p / x.sqrt()
    } else {
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn rejects_bad_orders_and_arguments() {
        assert!(BesselOrder::new(-0.5).is_err());
        assert!(BesselOrder::new(0.3).is_err());
        assert!(bessel_j(ord(0.0), -1.0).is_err());
        assert!(bessel_j_deriv(ord(0.5), 0.0).is_err());
        assert!(bessel_asymptotic_residual(ord(0.0), 0.5).is_err());
    }

    #[test]
    fn tau_matches_dimension() {
        for d in 2..9u32 {
            let o = BesselOrder::for_dimension(d).unwrap();
            assert!((o.tau() - f64::from(d - 1) * PI / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(ord(0.0), 0.0).unwrap(), 1.0);
        assert!(bessel_j(ord(0.5), PI).unwrap().abs() < 1e-15);
        assert!((bessel_j_deriv(ord(1.0), 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0);
    }

    #[test]
    fn small_argument_derivative() {
        let h = 1e-4;
        let d = bessel_j_deriv(ord(0.0), h).unwrap();
        assert!((d + h / 2.0).abs() < 1e-12);
    }

    #[test]
    fn half_order_derivative_matches_symbolic() {
        // d/dx [sqrt(2/(pi x)) sin x] at pi/2 = -sqrt(2/pi) (pi/2)^{-3/2} / 2
        let x = FRAC_PI_2;
        let want = -0.5 * (2.0 / PI).sqrt() * x.powf(-1.5);
        assert!((bessel_j_deriv(ord(0.5), x).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn half_order_residual_is_exact_for_j() {
        for &x in &[1.0, 7.5, 33.0, 90.0] {
            let (r1, r2) = bessel_asymptotic_residual(ord(0.5), x).unwrap();
            assert!(r1.abs() < 1e-14, "x={x} r1={r1}");
            assert!(r2.abs() <= 0.5 * (2.0 / PI).sqrt() * x.powf(-1.5) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn kernel_matches_pair_and_limit() {
        for d in 2..7u32 {
            let o = BesselOrder::for_dimension(d).unwrap();
            let k = RadialKernel::new(o);
            assert!((k.eval(0.0).0 - k.at_zero()).abs() < 1e-16);
            for &x in &[1e-5, 0.3, 5.0, 11.9, 12.1, 40.0, 250.0] {
                let (j0, j1) = bessel_j_pair(o, x).unwrap();
                let (k0, k1) = k.eval(x);
                let s = x.powf(-o.nu());
                assert!((k0 - j0 * s).abs() < 1e-13 * (1.0 + k0.abs()), "d={d} x={x}");
                assert!((k1 - j1 * s).abs() < 1e-13 * (1.0 + k1.abs()), "d={d} x={x}");
            }
        }
    }

    #[test]
    fn residual_envelope_is_finite() {
        for tw in 0..6 {
            let c = residual_envelope(BesselOrder::from_twice(tw), 1.0, 100.0, 400).unwrap();
            assert!(c.is_finite() && c < 10.0, "twice_nu={tw} C={c}");
        }
    }
}
