//! Named band-limited Cauchy data.
//!
//! Shapes are written as `bump`, `poly-bump`, `indicator-sqrt(a,b)` and
//! `shifted(SHAPE,t0)`; a slot (`f`, `g` or `both`) says which component the
//! shape fills. `indicator-sqrt` is weighted so that the profile entering the
//! half-line operators is exactly `1_[a,b](rho) / sqrt(rho)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::radial_transform::{sobolev_energy, CauchyData, DimensionParams, FrequencyGrid, RadialProfile};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Bump,
    PolyBump,
    IndicatorSqrt { a: f64, b: f64 },
    Shifted { base: Box<Shape>, t0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    F,
    G,
    Both,
}

impl FromStr for Slot {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" => Ok(Slot::F),
            "g" => Ok(Slot::G),
            "both" => Ok(Slot::Both),
            _ => Err(Error::UnknownData(format!("slot {s}"))),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Slot::F => "f",
            Slot::G => "g",
            Slot::Both => "both",
        })
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Bump => f.write_str("bump"),
            Shape::PolyBump => f.write_str("poly-bump"),
            Shape::IndicatorSqrt { a, b } => write!(f, "indicator-sqrt({a},{b})"),
            Shape::Shifted { base, t0 } => write!(f, "shifted({base},{t0})"),
        }
    }
}

fn parse_num(s: &str, whole: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::UnknownData(whole.to_string()))
}

impl FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || Error::UnknownData(s.to_string());
        match s {
            "bump" => return Ok(Shape::Bump),
            "poly-bump" => return Ok(Shape::PolyBump),
            _ => {}
        }
        let (head, inner) = s.strip_suffix(')').and_then(|t| t.split_once('(')).ok_or_else(unknown)?;
        let (left, right) = inner.rsplit_once(',').ok_or_else(unknown)?;
        match head {
            "indicator-sqrt" => {
                let (a, b) = (parse_num(left, s)?, parse_num(right, s)?);
                if !(a > 0.0 && b > a) {
                    return Err(unknown());
                }
                Ok(Shape::IndicatorSqrt { a, b })
            }
            "shifted" => Ok(Shape::Shifted { base: Box::new(left.parse()?), t0: parse_num(right, s)? }),
            _ => Err(unknown()),
        }
    }
}

fn on_edge(x: f64, e: f64) -> bool {
    (x - e).abs() <= 1e-12 * e.abs().max(1.0)
}

impl Shape {
    /// Base profile value at `rho` for the given slot (`Both` uses the `f` weighting
    /// only for `indicator-sqrt`; other shapes are slot-independent).
    fn value(&self, rho: f64, lo: f64, hi: f64, d: u32, slot: Slot) -> f64 {
        match self {
            Shape::Bump => {
                let z = (2.0 * rho - lo - hi) / (hi - lo);
                if z.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - z * z)).exp()
                } else {
                    0.0
                }
            }
            Shape::PolyBump => {
                if rho > lo && rho < hi {
                    let p = (rho - lo) * (hi - rho);
                    p * p
                } else {
                    0.0
                }
            }
            Shape::IndicatorSqrt { a, b } => {
                if rho < *a && !on_edge(rho, *a) || rho > *b && !on_edge(rho, *b) {
                    return 0.0;
                }
                let p = match slot {
                    Slot::G => -f64::from(d) / 2.0,
                    _ => -f64::from(d + 2) / 2.0,
                };
                // a jump inside the band sits on a node shared by two panels: take the mean value
                let inner_edge = on_edge(rho, *a) && !on_edge(*a, lo) || on_edge(rho, *b) && !on_edge(*b, hi);
                let edge = if inner_edge { 0.5 } else { 1.0 };
                edge * rho.powf(p)
            }
            Shape::Shifted { .. } => unreachable!("shifted shapes are built by propagation"),
        }
    }

    /// Cauchy data with this shape in `slot`.
    pub fn data(&self, slot: Slot, dim: DimensionParams, grid: Arc<FrequencyGrid>) -> Result<CauchyData> {
        if let Shape::IndicatorSqrt { a, b } = self {
            if *a < grid.rho_lo() * (1.0 - 1e-12) || *b > grid.rho_hi() * (1.0 + 1e-12) {
                return Err(Error::BandEscape(format!(
                    "[{a}, {b}] not inside band [{}, {}]",
                    grid.rho_lo(),
                    grid.rho_hi()
                )));
            }
        }
        match slot {
            Slot::Both => {
                let f = self.data(Slot::F, dim, grid.clone())?;
                let g = self.data(Slot::G, dim, grid)?;
                f.combine(1.0, &g, 1.0)
            }
            _ => {
                if let Shape::Shifted { base, t0 } = self {
                    return Ok(base.data(slot, dim, grid)?.propagate(*t0));
                }
                let (lo, hi) = (grid.rho_lo(), grid.rho_hi());
                let p = RadialProfile::from_fn(grid.clone(), |r| self.value(r, lo, hi, dim.d, slot));
                let zero = RadialProfile::zeros(grid);
                let data = match slot {
                    Slot::F => CauchyData::new(dim, p, zero)?,
                    _ => CauchyData::new(dim, zero, p)?,
                };
                if *self == Shape::PolyBump {
                    let e = sobolev_energy(&data).e_total;
                    return Ok(data.scaled(1.0 / e.sqrt()));
                }
                Ok(data)
            }
        }
    }

    /// Total propagation time folded into the shape.
    pub fn phase_span(&self) -> f64 {
        match self {
            Shape::Shifted { base, t0 } => base.phase_span() + t0.abs(),
            _ => 0.0,
        }
    }
}

/// A named catalog datum.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub shape: Shape,
    pub slot: Slot,
}

impl CatalogEntry {
    pub fn new(shape: Shape, slot: Slot) -> Self {
        Self { shape, slot }
    }

    pub fn name(&self) -> String {
        format!("{}:{}", self.shape, self.slot)
    }

    pub fn build(&self, dim: DimensionParams, grid: Arc<FrequencyGrid>) -> Result<CauchyData> {
        self.shape.data(self.slot, dim, grid)
    }
}

impl FromStr for CatalogEntry {
    type Err = Error;
    /// `SHAPE` or `SHAPE:SLOT`, slot defaulting to `f`.
    fn from_str(s: &str) -> Result<Self> {
        match s.rsplit_once(':') {
            Some((shape, slot)) => Ok(Self::new(shape.parse()?, slot.parse()?)),
            None => Ok(Self::new(s.parse()?, Slot::F)),
        }
    }
}

/// Default band of the catalog.
pub const DEFAULT_BAND: (f64, f64) = (1.0, 4.0);

/// Time offset of the shifted catalog entries: incoming waves focusing at `t = 20`.
pub const SHIFT_T0: f64 = -20.0;

/// The smooth catalog swept by the studies.
pub fn default_catalog() -> Vec<CatalogEntry> {
    let shifted = Shape::Shifted { base: Box::new(Shape::Bump), t0: SHIFT_T0 };
    vec![
        CatalogEntry::new(Shape::Bump, Slot::F),
        CatalogEntry::new(Shape::Bump, Slot::G),
        CatalogEntry::new(Shape::Bump, Slot::Both),
        CatalogEntry::new(Shape::PolyBump, Slot::F),
        CatalogEntry::new(Shape::PolyBump, Slot::G),
        CatalogEntry::new(shifted, Slot::F),
    ]
}

/// Sum of per-slot shapes; `None` leaves a slot empty.
pub fn data_from_slots(
    f: Option<&Shape>,
    g: Option<&Shape>,
    dim: DimensionParams,
    grid: Arc<FrequencyGrid>,
) -> Result<CauchyData> {
    let mut acc = CauchyData::zero(dim, grid.clone());
    if let Some(s) = f {
        acc = acc.combine(1.0, &s.data(Slot::F, dim, grid.clone())?, 1.0)?;
    }
    if let Some(s) = g {
        acc = acc.combine(1.0, &s.data(Slot::G, dim, grid)?, 1.0)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_transform::make_grid;

    #[test]
    fn parses_and_prints() {
        for s in ["bump", "poly-bump", "indicator-sqrt(1,10)", "shifted(bump,50)", "shifted(indicator-sqrt(1,2),-3.5)"]
        {
            let sh: Shape = s.parse().unwrap();
            assert_eq!(sh.to_string(), s);
        }
        assert!("wiggle".parse::<Shape>().is_err());
        assert!("indicator-sqrt(3,1)".parse::<Shape>().is_err());
        let e: CatalogEntry = "bump:g".parse().unwrap();
        assert_eq!(e.slot, Slot::G);
    }

    #[test]
    fn deterministic_and_energy_preserving() {
        let dim = DimensionParams::new(3).unwrap();
        let grid = make_grid(1.0, 4.0, 60.0, 60.0, 8.0).unwrap();
        let a = CatalogEntry::new(Shape::Bump, Slot::F).build(dim, grid.clone()).unwrap();
        let b = CatalogEntry::new(Shape::Bump, Slot::F).build(dim, grid.clone()).unwrap();
        assert_eq!(a, b);
        let s = CatalogEntry::new("shifted(bump,50)".parse().unwrap(), Slot::F).build(dim, grid.clone()).unwrap();
        let (ea, es) = (sobolev_energy(&a).e_total, sobolev_energy(&s).e_total);
        assert!((ea - es).abs() < 1e-12 * ea);
        let p = CatalogEntry::new(Shape::PolyBump, Slot::G).build(dim, grid).unwrap();
        assert!((sobolev_energy(&p).e_total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn indicator_energy_is_log_ratio() {
        let dim = DimensionParams::new(2).unwrap();
        let grid = Arc::new(FrequencyGrid::geometric(1.0, 10.0, 201).unwrap());
        for slot in [Slot::F, Slot::G] {
            let data = Shape::IndicatorSqrt { a: 1.0, b: 10.0 }.data(slot, dim, grid.clone()).unwrap();
            let e = sobolev_energy(&data).e_total / dim.plancherel_factor();
            assert!((e - 10f64.ln()).abs() < 1e-12, "{slot}: {e}");
        }
        let grid = Arc::new(FrequencyGrid::geometric(0.5, 20.0, 201).unwrap());
        let data = Shape::IndicatorSqrt { a: 1.0, b: 10.0 }.data(Slot::G, dim, grid.clone()).unwrap();
        let e = sobolev_energy(&data).e_total / dim.plancherel_factor();
        assert!((e - 10f64.ln()).abs() < 0.05, "{e}");
    }
}
