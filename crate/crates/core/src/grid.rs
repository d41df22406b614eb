//! Non-uniform time grids and step-ratio sequences.
//!
//! A grid is a partition `0 = t_0 < t_1 < ... < t_n = T`; the step ratios
//! `r_i = (t_i - t_{i-1}) / (t_{i-1} - t_{i-2})`, `i = 2..n`, are what the
//! matrix constructions actually consume. Grids come from closed-form maps
//! (`t_i = T * psi(i/n)`), from tabulated monotone maps, or from ratios drawn
//! uniformly at random with a splitmix64 generator.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Strictly increasing partition of `[0, T]` with at least two intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
    horizon: f64,
}

impl TimeGrid {
    /// Validates and wraps a point list. Requires `t_0 = 0`, strict
    /// monotonicity, and at least 3 points.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points, got {}",
                points.len()
            )));
        }
        if points[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("t_0 must be 0, got {}", points[0])));
        }
        for w in points.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "points not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        let horizon = *points.last().unwrap();
        Ok(Self { points, horizon })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of intervals `n`.
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    /// Step sizes `k_i = t_i - t_{i-1}`, `i = 1..n`.
    pub fn steps(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// CSV export with columns `i,t_i,r_i` (ratio column empty for `i < 2`).
    pub fn to_csv(&self) -> String {
        let ratios = ratios_of(self);
        let mut out = String::from("# schema vartoeplitz.grid.v1\ni,t_i,r_i\n");
        for (i, t) in self.points.iter().enumerate() {
            if i < 2 {
                let _ = writeln!(out, "{},{},", i, t);
            } else {
                let _ = writeln!(out, "{},{},{}", i, t, ratios.as_slice()[i - 2]);
            }
        }
        out
    }
}

/// Step-ratio sequence `r_2, ..., r_n`; all entries strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSequence {
    ratios: Vec<f64>,
}

impl RatioSequence {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::InvalidArgument("empty ratio list".into()));
        }
        for (i, &r) in ratios.iter().enumerate() {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "ratio r_{} = {} is not a positive finite real",
                    i + 2,
                    r
                )));
            }
        }
        Ok(Self { ratios })
    }

    /// Constant sequence `r_i = r` with `count` entries.
    pub fn constant(r: f64, count: usize) -> Result<Self> {
        Self::new(vec![r; count])
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.ratios
    }

    /// Reads a ratio list from CSV text: one value per line, `#` comments and
    /// an optional header line allowed.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut vals = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            // tolerate an `i,r_i` style two-column layout: take the last field
            let field = line.rsplit(',').next().unwrap().trim();
            match field.parse::<f64>() {
                Ok(v) => vals.push(v),
                Err(_) if vals.is_empty() => continue, // header line
                Err(_) => {
                    return Err(Error::Config(format!("bad ratio value: {line:?}")));
                }
            }
        }
        Self::new(vals)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema vartoeplitz.ratios.v1\ni,r_i\n");
        for (i, r) in self.ratios.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 2, r);
        }
        out
    }
}

/// Monotone map `[0,1] -> [0,1]` defining the grid through `t_i = T*map(i/n)`.
#[derive(Debug, Clone)]
pub enum GridMap {
    Identity,
    /// `x^p`, `p > 0`.
    Power(f64),
    /// `(x + x^2)/2`.
    AffineQuadratic,
    /// Tabulated monotone samples, monotone piecewise-cubic interpolation.
    Table(MonotoneTable),
}

impl GridMap {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!("power map needs p > 0, got {p}")));
        }
        Ok(GridMap::Power(p))
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        Ok(GridMap::Table(MonotoneTable::new(points)?))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            GridMap::Identity => x,
            GridMap::Power(p) => x.powf(*p),
            GridMap::AffineQuadratic => 0.5 * (x + x * x),
            GridMap::Table(t) => t.eval(x),
        }
    }

    /// Whether first and second derivatives are available in closed form.
    /// Table maps only expose finite-difference estimates.
    pub fn has_closed_form_derivatives(&self) -> bool {
        !matches!(self, GridMap::Table(_))
    }

    /// First derivative; finite differences (step 1e-6) for table maps.
    pub fn deriv1(&self, x: f64) -> f64 {
        match self {
            GridMap::Identity => 1.0,
            GridMap::Power(p) => p * x.powf(p - 1.0),
            GridMap::AffineQuadratic => 0.5 + x,
            GridMap::Table(t) => t.fd1(x),
        }
    }

    /// Second derivative; finite differences (step 1e-6) for table maps.
    pub fn deriv2(&self, x: f64) -> f64 {
        match self {
            GridMap::Identity => 0.0,
            GridMap::Power(p) => p * (p - 1.0) * x.powf(p - 2.0),
            GridMap::AffineQuadratic => 1.0,
            GridMap::Table(t) => t.fd2(x),
        }
    }

    /// Short name used in config blocks and CLI flags.
    pub fn kind_name(&self) -> String {
        match self {
            GridMap::Identity => "identity".into(),
            GridMap::Power(p) => format!("power{p}"),
            GridMap::AffineQuadratic => "affine-quadratic".into(),
            GridMap::Table(_) => "table".into(),
        }
    }

    /// Parses `identity`, `affine-quadratic`, `power<p>` or `power:<p>`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "identity" => Ok(GridMap::Identity),
            "affine-quadratic" | "affq" => Ok(GridMap::AffineQuadratic),
            _ => {
                if let Some(rest) = name.strip_prefix("power") {
                    let rest = rest.strip_prefix(':').unwrap_or(rest);
                    let p: f64 = rest
                        .parse()
                        .map_err(|_| Error::Config(format!("bad power map spec: {name:?}")))?;
                    GridMap::power(p)
                } else {
                    Err(Error::Config(format!("unknown grid map: {name:?}")))
                }
            }
        }
    }
}

/// Fritsch-Carlson monotone cubic interpolant through strictly increasing
/// sample points with endpoints `(0,0)` and `(1,1)`.
#[derive(Debug, Clone)]
pub struct MonotoneTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    tangents: Vec<f64>,
}

impl MonotoneTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if points.len() < 3 {
            return Err(Error::InvalidArgument("table map needs at least 3 points".into()));
        }
        let (x0, y0) = points[0];
        let (x1, y1) = *points.last().unwrap();
        if x0 != 0.0 || x1 != 1.0 || y0 != 0.0 || y1 != 1.0 {
            return Err(Error::InvalidArgument(
                "table map must run from (0,0) to (1,1)".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) || !(w[1].1 > w[0].1) {
                return Err(Error::InvalidArgument(
                    "table map samples must be strictly increasing".into(),
                ));
            }
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        let m = xs.len();
        let secants: Vec<f64> = (0..m - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut tangents = vec![0.0; m];
        tangents[0] = secants[0];
        tangents[m - 1] = secants[m - 2];
        for i in 1..m - 1 {
            tangents[i] = 0.5 * (secants[i - 1] + secants[i]);
        }
        // Fritsch-Carlson limiter keeps the interpolant monotone.
        for i in 0..m - 1 {
            let s = secants[i];
            let alpha = tangents[i] / s;
            let beta = tangents[i + 1] / s;
            let r2 = alpha * alpha + beta * beta;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                tangents[i] = tau * alpha * s;
                tangents[i + 1] = tau * beta * s;
            }
        }
        Ok(Self { xs, ys, tangents })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let m = self.xs.len();
        let mut i = match self.xs.partition_point(|&xi| xi <= x) {
            0 => 0,
            k => k - 1,
        };
        if i >= m - 1 {
            i = m - 2;
        }
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.tangents[i], self.tangents[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }

    const FD_STEP: f64 = 1e-6;

    fn fd1(&self, x: f64) -> f64 {
        let h = Self::FD_STEP;
        let lo = (x - h).max(0.0);
        let hi = (x + h).min(1.0);
        (self.eval(hi) - self.eval(lo)) / (hi - lo)
    }

    fn fd2(&self, x: f64) -> f64 {
        let h = Self::FD_STEP;
        let x = x.clamp(h, 1.0 - h);
        (self.eval(x + h) - 2.0 * self.eval(x) + self.eval(x - h)) / (h * h)
    }
}

/// Equispaced grid `t_i = i*T/n`.
pub fn uniform_grid(n: usize, horizon: f64) -> Result<TimeGrid> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need n >= 2, got {n}")));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidGrid(format!("need T > 0, got {horizon}")));
    }
    let points = (0..=n).map(|i| i as f64 * horizon / n as f64).collect();
    TimeGrid::new(points)
}

/// Mapped grid `t_i = T*map(i/n)`; rejects maps that fail to produce strictly
/// increasing points at this resolution.
pub fn mapped_grid(map: &GridMap, n: usize, horizon: f64) -> Result<TimeGrid> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need n >= 2, got {n}")));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidGrid(format!("need T > 0, got {horizon}")));
    }
    let points: Vec<f64> = (0..=n)
        .map(|i| horizon * map.eval(i as f64 / n as f64))
        .collect();
    TimeGrid::new(points).map_err(|e| {
        Error::InvalidGrid(format!("map {:?} does not yield a valid grid: {e}", map.kind_name()))
    })
}

/// Grid with step ratios drawn uniformly from `[lo, hi]`, splitmix64-seeded.
/// The first step is chosen so that `t_n = T`; a given seed yields a
/// bit-identical grid on every call.
pub fn random_ratio_grid(n: usize, horizon: f64, lo: f64, hi: f64, seed: u64) -> Result<TimeGrid> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need n >= 2, got {n}")));
    }
    if !(lo > 0.0) || hi < lo || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ratio bounds must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let ratios: Vec<f64> = (0..n - 1).map(|_| lo + (hi - lo) * rng.next_f64()).collect();
    grid_from_ratios(&RatioSequence::new(ratios)?, horizon)
}

/// Step ratios `r_i = k_i / k_{i-1}` of a valid grid.
pub fn ratios_of(grid: &TimeGrid) -> RatioSequence {
    let steps = grid.steps();
    let ratios = steps.windows(2).map(|w| w[1] / w[0]).collect();
    // grid invariants guarantee positive steps
    RatioSequence { ratios }
}

/// Inverse of [`ratios_of`] up to the free first step, which is fixed by the
/// normalization `t_n = T`.
pub fn grid_from_ratios(r: &RatioSequence, horizon: f64) -> Result<TimeGrid> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidGrid(format!("need T > 0, got {horizon}")));
    }
    let mut points = Vec::with_capacity(r.len() + 2);
    points.push(0.0);
    let mut step = 1.0;
    let mut t = step;
    points.push(t);
    for &ri in r.as_slice() {
        step *= ri;
        t += step;
        points.push(t);
    }
    let scale = horizon / t;
    for p in points.iter_mut() {
        *p *= scale;
    }
    *points.last_mut().unwrap() = horizon;
    TimeGrid::new(points)
}

/// splitmix64; doubles are formed from the top 53 bits.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Serializable description of a grid, the unit the CLI and config files
/// speak. Keys: `kind`, `n`, `T`, `p`, `lo`, `hi`, `seed`.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Uniform { n: usize, horizon: f64 },
    Mapped { kind: MapKind, n: usize, horizon: f64 },
    RandomRatio { n: usize, horizon: f64, lo: f64, hi: f64, seed: u64 },
}

/// Closed-form map kinds admissible in config blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    Identity,
    Power(f64),
    AffineQuadratic,
}

impl MapKind {
    pub fn to_map(self) -> GridMap {
        match self {
            MapKind::Identity => GridMap::Identity,
            MapKind::Power(p) => GridMap::Power(p),
            MapKind::AffineQuadratic => GridMap::AffineQuadratic,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        match *self {
            GridSpec::Uniform { n, horizon } => uniform_grid(n, horizon),
            GridSpec::Mapped { kind, n, horizon } => mapped_grid(&kind.to_map(), n, horizon),
            GridSpec::RandomRatio { n, horizon, lo, hi, seed } => {
                random_ratio_grid(n, horizon, lo, hi, seed)
            }
        }
    }

    /// Key-value block, one `key = value` per line.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        match self {
            GridSpec::Uniform { n, horizon } => {
                let _ = writeln!(out, "kind = uniform");
                let _ = writeln!(out, "n = {n}");
                let _ = writeln!(out, "T = {horizon}");
            }
            GridSpec::Mapped { kind, n, horizon } => {
                let name = match kind {
                    MapKind::Identity => "identity".to_string(),
                    MapKind::Power(p) => format!("power{p}"),
                    MapKind::AffineQuadratic => "affine-quadratic".to_string(),
                };
                let _ = writeln!(out, "kind = {name}");
                let _ = writeln!(out, "n = {n}");
                let _ = writeln!(out, "T = {horizon}");
            }
            GridSpec::RandomRatio { n, horizon, lo, hi, seed } => {
                let _ = writeln!(out, "kind = random");
                let _ = writeln!(out, "n = {n}");
                let _ = writeln!(out, "T = {horizon}");
                let _ = writeln!(out, "lo = {lo}");
                let _ = writeln!(out, "hi = {hi}");
                let _ = writeln!(out, "seed = {seed}");
            }
        }
        out
    }

    /// Parses a key-value block. Unknown keys are rejected.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key = value, got {line:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        for k in kv.keys() {
            if !matches!(k.as_str(), "kind" | "n" | "T" | "p" | "lo" | "hi" | "seed") {
                return Err(Error::Config(format!("unknown grid config key: {k:?}")));
            }
        }
        let kind = kv
            .get("kind")
            .ok_or_else(|| Error::Config("missing key: kind".into()))?
            .clone();
        let n: usize = parse_kv(&kv, "n")?.ok_or_else(|| Error::Config("missing key: n".into()))?;
        let horizon: f64 = parse_kv(&kv, "T")?.unwrap_or(1.0);
        match kind.as_str() {
            "uniform" => Ok(GridSpec::Uniform { n, horizon }),
            "identity" => Ok(GridSpec::Mapped { kind: MapKind::Identity, n, horizon }),
            "affine-quadratic" => {
                Ok(GridSpec::Mapped { kind: MapKind::AffineQuadratic, n, horizon })
            }
            "power" => {
                let p: f64 =
                    parse_kv(&kv, "p")?.ok_or_else(|| Error::Config("missing key: p".into()))?;
                if !(p > 0.0) {
                    return Err(Error::Config(format!("power map needs p > 0, got {p}")));
                }
                Ok(GridSpec::Mapped { kind: MapKind::Power(p), n, horizon })
            }
            "random" => {
                let lo: f64 =
                    parse_kv(&kv, "lo")?.ok_or_else(|| Error::Config("missing key: lo".into()))?;
                let hi: f64 =
                    parse_kv(&kv, "hi")?.ok_or_else(|| Error::Config("missing key: hi".into()))?;
                let seed: u64 = parse_kv(&kv, "seed")?.unwrap_or(0);
                Ok(GridSpec::RandomRatio { n, horizon, lo, hi, seed })
            }
            other => {
                if let Some(rest) = other.strip_prefix("power") {
                    let p: f64 = rest
                        .parse()
                        .map_err(|_| Error::Config(format!("bad kind: {other:?}")))?;
                    return Ok(GridSpec::Mapped { kind: MapKind::Power(p), n, horizon });
                }
                Err(Error::Config(format!("unknown grid kind: {other:?}")))
            }
        }
    }
}

fn parse_kv<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match kv.get(key) {
        None => Ok(None),
        Some(s) => s
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::Config(format!("bad value for {key}: {s:?}"))),
    }
}
