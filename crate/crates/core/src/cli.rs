//! Command-line front end. Every subcommand writes `<out>/<name>.csv` and a
//! `<out>/<name>.json` summary that embeds the resolved configuration.
//!
//! Settings are resolved as: command-line flag, then `--config` file entry,
//! then built-in default. Config files hold `key = value` lines whose keys are
//! the flag names without leading dashes; `#` starts a comment.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{
    averaged_hankel_decay, concentration_curve, convergence_study, counterexample_ratio, delay_finder, fit_slope,
    predict_exterior, Direction, StudySummary, DIRECTION_CONVENTION,
};
use crate::catalog::{data_from_slots, CatalogEntry, Shape, Slot};
use crate::error::{Error, Result};
use crate::profiles::{defect_study, pseudo_orthogonality, write_defect_csv, ProfileSpec, SeqRule, LAMBDA_RANGE};
use crate::radial_transform::{make_grid, CauchyData, DimensionParams, FrequencyGrid};
use crate::selftest::{run_checks, Check};
use crate::wave_engine::{region_energy, write_snapshots_csv, Region};

#[derive(Debug, Parser)]
#[command(name = "radwave", version, about = "Exterior energy of radial free waves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Space dimension, 2..=8.
    #[arg(long)]
    dim: Option<String>,
    /// Frequency band `LO:HI`.
    #[arg(long)]
    band: Option<String>,
    /// Explicit (odd) number of frequency nodes.
    #[arg(long = "grid-n")]
    grid_n: Option<String>,
    #[arg(long)]
    oversample: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Flat `key = value` file with defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog entry `SHAPE[:SLOT]`.
    #[arg(long)]
    data: Option<String>,
    /// Shape for the displacement slot, or `none`.
    #[arg(long)]
    f: Option<String>,
    /// Shape for the velocity slot, or `none`.
    #[arg(long)]
    g: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region energies along a list of times.
    Energy {
        #[command(flatten)]
        common: Common,
        #[arg(long = "t-list", visible_alias = "t")]
        t_list: Option<String>,
        /// `ball:R`, `exterior:T` or `annulus:W`.
        #[arg(long)]
        region: Option<String>,
    },
    /// Limits of the exterior energy and their breakdown.
    Predict {
        #[command(flatten)]
        common: Common,
        /// `+`, `-` or `both`.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
    },
    /// Measured exterior energy against the predicted limit.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long = "t-list", visible_alias = "t")]
        t_list: Option<String>,
        /// Largest accepted `|measured - predicted| / predicted` at the last time.
        #[arg(long)]
        tol: Option<String>,
    },
    /// Limit-to-energy ratio of the indicator family on `[a, b]`.
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// Smallest delay keeping a `1 - eps` share of the energy outside the shifted cone.
    Delay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long = "T-list")]
        big_t_list: Option<String>,
        #[arg(long = "t-probe")]
        t_probe: Option<String>,
    },
    /// Energy off the annulus `||x| - t| < T`, maximized over times.
    Concentrate {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T-list")]
        big_t_list: Option<String>,
        #[arg(long = "t-list", visible_alias = "t")]
        t_list: Option<String>,
    },
    /// Time-averaged Hankel pairing of one data component with itself.
    AverageDecay {
        #[command(flatten)]
        common: Common,
        #[arg(long = "T-list")]
        big_t_list: Option<String>,
        /// `f` or `g`.
        #[arg(long)]
        component: Option<String>,
    },
    /// Pythagorean defect of a profile family read from `profile.J.*` config keys.
    Profiles {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-list")]
        n_list: Option<String>,
        /// `r_n = r-scale * n`.
        #[arg(long = "r-scale")]
        r_scale: Option<String>,
    },
    /// Fixed invariant suite with deterministic output.
    Selftest {
        #[arg(long)]
        out: Option<String>,
    },
}

/// Flag values, config-file values and the resolved settings of one command.
struct Settings {
    flags: BTreeMap<String, String>,
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

fn invalid(flag: &str, msg: impl Into<String>) -> Error {
    Error::Validation { flag: format!("--{flag}"), msg: msg.into() }
}

fn parse_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| invalid("config", format!("line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    fn new(command: &str, common: Option<&Common>, extra: &[(&str, &Option<String>)]) -> Result<Self> {
        let mut flags = BTreeMap::new();
        let mut file = BTreeMap::new();
        if let Some(c) = common {
            let pairs = [
                ("dim", &c.dim),
                ("band", &c.band),
                ("grid-n", &c.grid_n),
                ("oversample", &c.oversample),
                ("out", &c.out),
                ("data", &c.data),
                ("f", &c.f),
                ("g", &c.g),
            ];
            for (k, v) in pairs {
                if let Some(v) = v {
                    flags.insert(k.to_string(), v.clone());
                }
            }
            if let Some(p) = &c.config {
                file = parse_config(p)?;
            }
        }
        for (k, v) in extra {
            if let Some(v) = v {
                flags.insert(k.to_string(), v.clone());
            }
        }
        let mut resolved = BTreeMap::new();
        resolved.insert("command".to_string(), command.to_string());
        Ok(Self { flags, file, resolved })
    }

    fn raw(&self, key: &str) -> Option<String> {
        self.flags.get(key).or_else(|| self.file.get(key)).cloned()
    }

    fn get(&mut self, key: &str, default: &str) -> String {
        let v = self.raw(key).unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    fn parse<T: FromStr>(&mut self, key: &str, default: &str) -> Result<T> {
        let v = self.get(key, default);
        v.parse::<T>().map_err(|_| invalid(key, format!("cannot parse {v:?}")))
    }

    fn list(&mut self, key: &str, default: &str) -> Result<Vec<f64>> {
        let v = self.get(key, default);
        v.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(key, format!("bad number {s:?} in list"))))
            .collect()
    }

    /// Fails on config keys no step of this command consumed.
    fn reject_unused(&self, prefix_ok: Option<&str>) -> Result<()> {
        for k in self.file.keys() {
            let used = self.resolved.contains_key(k) || prefix_ok.is_some_and(|p| k.starts_with(p));
            if !used {
                return Err(invalid("config", format!("unknown key {k}")));
            }
        }
        Ok(())
    }

    fn out_dir(&mut self) -> Result<PathBuf> {
        let dir = PathBuf::from(self.get("out", "out"));
        fs::create_dir_all(&dir).map_err(|e| invalid("out", format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn dim(&mut self, default: &str) -> Result<DimensionParams> {
        let d: u32 = self.parse("dim", default)?;
        DimensionParams::new(d).map_err(|e| invalid("dim", e.to_string()))
    }

    fn band(&mut self) -> Result<(f64, f64)> {
        let v = self.get("band", "1:4");
        let (lo, hi) = v.split_once(':').ok_or_else(|| invalid("band", "expected LO:HI"))?;
        let (lo, hi): (f64, f64) = (
            lo.trim().parse().map_err(|_| invalid("band", "bad LO"))?,
            hi.trim().parse().map_err(|_| invalid("band", "bad HI"))?,
        );
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid("band", "need 0 < LO < HI"));
        }
        Ok((lo, hi))
    }

    /// Grid on `band` certified for times up to `t_max` and radii up to `r_max`.
    fn grid(&mut self, band: (f64, f64), t_max: f64, r_max: f64) -> Result<Arc<FrequencyGrid>> {
        let oversample: f64 = self.parse("oversample", "8")?;
        if !(oversample >= 4.0) {
            return Err(invalid("oversample", "must be >= 4"));
        }
        match self.raw("grid-n") {
            Some(_) => {
                let n: usize = self.parse("grid-n", "")?;
                let g = FrequencyGrid::uniform(band.0, band.1, n).map_err(|e| invalid("grid-n", e.to_string()))?;
                g.check_horizon(t_max + r_max).map_err(|e| invalid("grid-n", e.to_string()))?;
                Ok(Arc::new(g))
            }
            None => {
                make_grid(band.0, band.1, t_max, r_max, oversample).map_err(|e| invalid("oversample", e.to_string()))
            }
        }
    }

    /// Data selection: `--f`/`--g` slots if either is given, else the catalog entry `--data`.
    fn data_choice(&mut self, default: &str) -> Result<DataChoice> {
        if self.raw("f").is_some() || self.raw("g").is_some() {
            let parse_slot = |s: &mut Self, key: &str| -> Result<Option<Shape>> {
                let v = s.get(key, "none");
                if v == "none" {
                    return Ok(None);
                }
                v.parse::<Shape>().map(Some).map_err(|e| invalid(key, e.to_string()))
            };
            let f = parse_slot(self, "f")?;
            let g = parse_slot(self, "g")?;
            Ok(DataChoice::Slots(f, g))
        } else {
            let v = self.get("data", default);
            v.parse::<CatalogEntry>().map(DataChoice::Entry).map_err(|e| invalid("data", e.to_string()))
        }
    }

    fn finish(&self, dir: &Path, name: &str, result: Value) -> Result<()> {
        let summary = json!({ "command": name, "config": self.resolved, "result": result });
        let mut w = BufWriter::new(File::create(dir.join(format!("{name}.json")))?);
        serde_json::to_writer_pretty(&mut w, &summary)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

enum DataChoice {
    Entry(CatalogEntry),
    Slots(Option<Shape>, Option<Shape>),
}

impl DataChoice {
    fn id(&self) -> String {
        match self {
            DataChoice::Entry(e) => e.name(),
            DataChoice::Slots(f, g) => {
                let s = |x: &Option<Shape>| x.as_ref().map_or("none".to_string(), |v| v.to_string());
                format!("f={},g={}", s(f), s(g))
            }
        }
    }

    fn phase_span(&self) -> f64 {
        match self {
            DataChoice::Entry(e) => e.shape.phase_span(),
            DataChoice::Slots(f, g) => {
                f.as_ref().map_or(0.0, Shape::phase_span).max(g.as_ref().map_or(0.0, Shape::phase_span))
            }
        }
    }

    fn build(&self, dim: DimensionParams, grid: Arc<FrequencyGrid>) -> Result<CauchyData> {
        let r = match self {
            DataChoice::Entry(e) => e.build(dim, grid),
            DataChoice::Slots(f, g) => data_from_slots(f.as_ref(), g.as_ref(), dim, grid),
        };
        r.map_err(|e| match e {
            Error::BandEscape(m) => invalid("band", m),
            other => other,
        })
    }
}

/// Dimension, grid and data for a command needing times up to `t_max` and radii up to `r_max`.
fn setup(
    s: &mut Settings,
    dim_default: &str,
    data_default: &str,
    t_max: f64,
    r_max: f64,
) -> Result<(CauchyData, String)> {
    let dim = s.dim(dim_default)?;
    let band = s.band()?;
    let choice = s.data_choice(data_default)?;
    let grid = s.grid(band, t_max + choice.phase_span(), r_max)?;
    Ok((choice.build(dim, grid)?, choice.id()))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn parse_region(s: &str) -> Result<Region> {
    let (kind, val) = s.split_once(':').ok_or_else(|| invalid("region", "expected KIND:VALUE"))?;
    let v: f64 = val.parse().map_err(|_| invalid("region", format!("bad value {val:?}")))?;
    match kind {
        "ball" => Ok(Region::Ball { radius: v }),
        "exterior" => Ok(Region::ExteriorCone { delay: v }),
        "annulus" => Ok(Region::Annulus { half_width: v }),
        _ => Err(invalid("region", format!("unknown region kind {kind}"))),
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn directions(s: &mut Settings, default: &str) -> Result<Vec<Direction>> {
    match s.get("direction", default).as_str() {
        "both" => Ok(Direction::both().to_vec()),
        v => Ok(vec![v.parse::<Direction>()?]),
    }
}

fn cmd_energy(s: &mut Settings) -> Result<i32> {
    let ts = s.list("t-list", "0,25,50,100")?;
    let region = parse_region(&s.get("region", "exterior:0"))?;
    let t_max = max_abs(&ts);
    let r_max = match region {
        Region::Ball { radius } => radius,
        Region::ExteriorCone { .. } => t_max,
        Region::Annulus { half_width } => t_max + half_width,
    };
    let (data, id) = setup(s, "3", "bump:g", t_max, r_max)?;
    let dir = s.out_dir()?;
    s.reject_unused(None)?;
    let snaps = ts.iter().map(|&t| region_energy(&data, t, region)).collect::<Result<Vec<_>>>()?;
    write_snapshots_csv(BufWriter::new(File::create(dir.join("energy.csv"))?), &snaps)?;
    s.finish(&dir, "energy", json!({ "data_id": id, "d": data.dim.d, "snapshots": snaps }))?;
    Ok(0)
}

fn cmd_predict(s: &mut Settings) -> Result<i32> {
    let (data, id) = setup(s, "3", "bump:g", 0.0, 0.0)?;
    let dirs = directions(s, "both")?;
    let dir = s.out_dir()?;
    s.reject_unused(None)?;
    let rows = dirs.iter().map(|&d| predict_exterior(&data, d)).collect::<Result<Vec<_>>>()?;
    write_rows(&dir.join("predict.csv"), &rows)?;
    s.finish(
        &dir,
        "predict",
        json!({ "data_id": id, "d": data.dim.d, "direction_convention": DIRECTION_CONVENTION, "breakdowns": rows }),
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct VerifyRow {
    direction: String,
    t: f64,
    measured: f64,
    predicted: f64,
    abs_error: f64,
}

fn cmd_verify(s: &mut Settings) -> Result<i32> {
    let ts = s.list("t-list", "25,50,100")?;
    let tol: f64 = s.parse("tol", "0.02")?;
    let t_max = max_abs(&ts);
    let (data, id) = setup(s, "3", "bump:g", t_max, t_max)?;
    let dirs = directions(s, "+")?;
    let dir = s.out_dir()?;
    s.reject_unused(None)?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut ok = true;
    for d in dirs {
        let table = convergence_study(&data, d, &ts)?;
        let bd = predict_exterior(&data, d)?;
        let xs: Vec<f64> = table.iter().map(|r| r.t).collect();
        let ys: Vec<f64> = table.iter().map(|r| r.abs_error).collect();
        if let Some(last) = table.last() {
            ok &= last.abs_error <= tol * last.predicted.abs().max(f64::MIN_POSITIVE);
        }
        summaries.push(StudySummary {
            d: data.dim.d,
            data_id: id.clone(),
            prediction_breakdown: bd,
            fit_slope: fit_slope(&xs, &ys),
        });
        rows.extend(table.into_iter().map(|r| VerifyRow {
            direction: d.to_string(),
            t: r.t,
            measured: r.measured,
            predicted: r.predicted,
            abs_error: r.abs_error,
        }));
    }
    write_rows(&dir.join("verify.csv"), &rows)?;
    s.finish(
        &dir,
        "verify",
        json!({ "direction_convention": DIRECTION_CONVENTION, "studies": summaries, "within_tolerance": ok }),
    )?;
    Ok(if ok { 0 } else { 3 })
}

fn cmd_counterexample(s: &mut Settings) -> Result<i32> {
    let dim = s.dim("2")?;
    let a: f64 = s.parse("a", "1")?;
    let b: f64 = s.parse("b", "1000")?;
    let dir = s.out_dir()?;
    s.reject_unused(None)?;
    let r = counterexample_ratio(dim.d, a, b).map_err(|e| match e {
        Error::BandEscape(m) => invalid("b", m),
        Error::Domain(m) => invalid("dim", m),
        other => other,
    })?;
    write_rows(&dir.join("counterexample.csv"), &[r])?;
    s.finish(&dir, "counterexample", json!(r))?;
    Ok(0)
}

fn cmd_delay(s: &mut Settings) -> Result<i32> {
    let eps: f64 = s.parse("eps", "0.1")?;
    let grid_t = s.list("T-list", "1,2,4,8,16,32,64,128")?;
    let probe: f64 = s.parse("t-probe", "200")?;
    let (data, id) = setup(s, "2", "bump:f", probe, probe)?;
    let dir = s.out_dir()?;
    s.reject_unused(None)?;
    let out = delay_finder(&data, eps, &grid_t, probe).map_err(|e| match e {
        Error::Domain(m) => invalid("T-list", m),
        other => other,
    })?;
    let mut wtr = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("delay.csv"))?));
    wtr.write_record(["delay", "t", "fraction"])?;
    if let crate::asymptotics::DelayOutcome::Found { delay, checks } = &out {
        for (t, f) in checks {
            wtr.write_record([delay.to_string(), t.to_string(), f.to_string()])?;
        }
    }
    wtr.flush()?;
    let found = out.delay().is_some();
    s.finish(&dir, "delay", json!({ "data_id": id, "d": data.dim.d, "outcome": out }))?;
    Ok(if found { 0 } else { 3 })
}

fn cmd_concentrate(s: &mut Settings) -> Result<i32> {
    let widths = s.list("T-list", "5,10,20,50")?;
    let ts = s.list("t-list", "25,50,100,150,200")?;
    let t_max = max_abs(&ts);
    let (data, id) = setup(s, "2", "bump:f", t_max, t_max + max_abs(&widths))?;
    let dir = s.out_dir()?;
    s.reject_unused(None)?;
    let rows = concentration_curve(&data, &widths, &ts)?;
    write_rows(&dir.join("concentrate.csv"), &rows)?;
    s.finish(&dir, "concentrate", json!({ "data_id": id, "d": data.dim.d, "curve": rows }))?;
    Ok(0)
}

fn cmd_average(s: &mut Settings) -> Result<i32> {
    let horizons = s.list("T-list", "0,1,10,100")?;
    let comp: Slot = s.get("component", "g").parse().map_err(|_| invalid("component", "expected f or g"))?;
    let (data, id) = setup(s, "3", "bump:g", 0.0, 0.0)?;
    let dir = s.out_dir()?;
    s.reject_unused(None)?;
    let phi = match comp {
        Slot::F => &data.fhat,
        _ => &data.ghat,
    };
    let rows = averaged_hankel_decay(phi, phi, data.dim.mu, &horizons).map_err(|e| match e {
        Error::Domain(m) => invalid("T-list", m),
        other => other,
    })?;
    write_rows(&dir.join("average-decay.csv"), &rows)?;
    s.finish(
        &dir,
        "average-decay",
        json!({ "data_id": id, "d": data.dim.d, "component": comp.to_string(), "rows": rows }),
    )?;
    Ok(0)
}

const DEFAULT_FAMILY: [(&str, &str); 8] = [
    ("profile.1.shape", "poly-bump"),
    ("profile.1.slot", "f"),
    ("profile.1.lambda", "1"),
    ("profile.1.time", "n"),
    ("profile.2.shape", "poly-bump"),
    ("profile.2.slot", "f"),
    ("profile.2.lambda", "2"),
    ("profile.2.time", "-n"),
];

fn cmd_profiles(s: &mut Settings) -> Result<i32> {
    let dim = s.dim("3")?;
    let band = s.band()?;
    let ns = s.list("n-list", "4,16,64")?;
    let r_scale: f64 = s.parse("r-scale", "0")?;
    let oversample: f64 = s.parse("oversample", "8")?;
    let custom = s.file.keys().any(|k| k.starts_with("profile."));
    let mut ids: Vec<u32> = Vec::new();
    if custom {
        for k in s.file.keys() {
            if let Some(j) = k.strip_prefix("profile.").and_then(|r| r.split('.').next()) {
                let j: u32 = j.parse().map_err(|_| invalid("config", format!("bad profile index in {k}")))?;
                if !ids.contains(&j) {
                    ids.push(j);
                }
            }
        }
    } else {
        ids = vec![1, 2];
        for (k, v) in DEFAULT_FAMILY {
            s.file.insert(k.to_string(), v.to_string());
        }
    }
    let mut raw = Vec::new();
    for j in &ids {
        let key = |f: &str| format!("profile.{j}.{f}");
        let shape: Shape = s.get(&key("shape"), "bump").parse().map_err(|e: Error| invalid("config", e.to_string()))?;
        let slot: Slot = s.get(&key("slot"), "f").parse().map_err(|e: Error| invalid("config", e.to_string()))?;
        let lambda: SeqRule = s.get(&key("lambda"), "1").parse()?;
        let time: SeqRule = s.get(&key("time"), "0").parse()?;
        raw.push((shape, slot, lambda, time));
    }
    let dir = s.out_dir()?;
    s.reject_unused(None)?;
    let lams: Vec<f64> = raw.iter().flat_map(|r| ns.iter().map(move |&n| r.2.at(n))).collect();
    let (lmin, lmax) = lams.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    if !(lmin >= LAMBDA_RANGE.0 && lmax <= LAMBDA_RANGE.1) {
        return Err(invalid("config", format!("lambda values must stay in [{}, {}]", LAMBDA_RANGE.0, LAMBDA_RANGE.1)));
    }
    let t_max = raw
        .iter()
        .flat_map(|r| ns.iter().map(move |&n| r.3.at(n).abs() + r.0.phase_span() * r.2.at(n)))
        .fold(0.0, f64::max);
    let r_max = max_abs(&ns) * r_scale.abs();
    let master = make_grid(band.0 / lmax, band.1 / lmin, t_max, r_max, oversample)?;
    let specs = raw
        .iter()
        .map(|(shape, slot, lambda, time)| {
            let base_span = shape.phase_span();
            let base_grid = make_grid(band.0, band.1, base_span, 0.0, oversample)?;
            Ok(ProfileSpec { base: shape.data(*slot, dim, base_grid)?, lambda: *lambda, time: *time })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = ns.iter().map(|&n| (n, r_scale * n)).collect();
    let rows = defect_study(&specs, None, &pairs, &master)?;
    write_defect_csv(BufWriter::new(File::create(dir.join("profiles.csv"))?), &rows)?;
    let ortho: Vec<Option<f64>> = ns.iter().map(|&n| pseudo_orthogonality(&specs, n)).collect();
    s.finish(&dir, "profiles", json!({ "d": dim.d, "rows": rows, "pseudo_orthogonality": ortho }))?;
    Ok(0)
}

fn cmd_selftest(s: &mut Settings) -> Result<i32> {
    let dir = s.out_dir()?;
    let checks: Vec<Check> = run_checks()?;
    write_rows(&dir.join("selftest.csv"), &checks)?;
    let ok = checks.iter().all(|c| c.pass);
    s.finish(&dir, "selftest", json!({ "all_pass": ok, "checks": checks }))?;
    Ok(if ok { 0 } else { 3 })
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Energy { common, t_list, region } => {
            cmd_energy(&mut Settings::new("energy", Some(common), &[("t-list", t_list), ("region", region)])?)
        }
        Command::Predict { common, direction } => {
            cmd_predict(&mut Settings::new("predict", Some(common), &[("direction", direction)])?)
        }
        Command::Verify { common, direction, t_list, tol } => cmd_verify(&mut Settings::new(
            "verify",
            Some(common),
            &[("direction", direction), ("t-list", t_list), ("tol", tol)],
        )?),
        Command::Counterexample { common, a, b } => {
            cmd_counterexample(&mut Settings::new("counterexample", Some(common), &[("a", a), ("b", b)])?)
        }
        Command::Delay { common, eps, big_t_list, t_probe } => cmd_delay(&mut Settings::new(
            "delay",
            Some(common),
            &[("eps", eps), ("T-list", big_t_list), ("t-probe", t_probe)],
        )?),
        Command::Concentrate { common, big_t_list, t_list } => cmd_concentrate(&mut Settings::new(
            "concentrate",
            Some(common),
            &[("T-list", big_t_list), ("t-list", t_list)],
        )?),
        Command::AverageDecay { common, big_t_list, component } => cmd_average(&mut Settings::new(
            "average-decay",
            Some(common),
            &[("T-list", big_t_list), ("component", component)],
        )?),
        Command::Profiles { common, n_list, r_scale } => {
            cmd_profiles(&mut Settings::new("profiles", Some(common), &[("n-list", n_list), ("r-scale", r_scale)])?)
        }
        Command::Selftest { out } => cmd_selftest(&mut Settings::new("selftest", None, &[("out", out)])?),
    }
}

/// Exit code for an error: 3 for numerical failures, 2 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } | Error::LaplaceTail { .. } => 3,
        _ => 2,
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    if let Some(n) = std::env::var("NUM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        // a pool may already exist when called twice in one process; keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
