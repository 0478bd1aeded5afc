//! Cantor-type sets `E(p_1, p_2, ...)` and their singular functions.
//!
//! Each generation replaces every interval by its two end pieces, each of
//! relative length `1/(2 p_k)`; the removed central gap is the fraction
//! `1 - 1/p_k`. Generation `n` therefore has `2^n` intervals of total length
//! `prod_{k<=n} 1/p_k`. Lengths shrink super-exponentially for the
//! double-exponential rule, so everything is parametrised by `ln p_k` and
//! evaluated in relative coordinates.

use crate::capacity::{extrapolate_diameters, fekete_points, BoundedSet1D, CapacityEstimate, Method};
use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::str::FromStr;

/// Largest generation materialised as an explicit interval list.
pub const MAX_EXPLICIT_STAGE: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CantorRule {
    /// `p_k = c` for every `k`.
    Constant { c: f64 },
    /// `p_k = exp(2^(k + shift))`.
    DoubleExponential { shift: u32 },
    /// Explicit `p_1, p_2, ...`.
    Custom { p: Vec<f64> },
}

impl FromStr for CantorRule {
    type Err = crate::Error;

    /// `const:<c>`, `dexp`, `dexp:<shift>` or `list:<p1>,<p2>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = s.split_once(':').unwrap_or((s, ""));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| crate::Error::Domain(format!("bad number {t:?}")));
        match tag {
            "const" => Ok(Self::Constant { c: num(rest)? }),
            "dexp" if rest.is_empty() => Ok(Self::DoubleExponential { shift: 0 }),
            "dexp" => rest
                .trim()
                .parse()
                .map(|shift| Self::DoubleExponential { shift })
                .map_err(|_| crate::Error::Domain(format!("bad shift {rest:?}"))),
            "list" => Ok(Self::Custom { p: rest.split(',').map(num).collect::<Result<_>>()? }),
            _ => domain(format!("unknown Cantor rule {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub rule: CantorRule,
    pub depth: usize,
}

impl CantorSpec {
    pub fn new(rule: CantorRule, depth: usize) -> Result<Self> {
        if depth < 1 {
            return domain("Cantor depth must be at least 1");
        }
        match &rule {
            CantorRule::Constant { c } if !(*c > 1.0) || !c.is_finite() => {
                return domain(format!("p_k = {c} must exceed 1"));
            }
            CantorRule::DoubleExponential { shift } if *shift > 40 => {
                return domain("double-exponential shift is limited to 40");
            }
            CantorRule::Custom { p } => {
                if p.len() < depth {
                    return domain(format!("{} values given for depth {depth}", p.len()));
                }
                if let Some(bad) = p.iter().find(|x| !(**x > 1.0) || !x.is_finite()) {
                    return domain(format!("p_k = {bad} must exceed 1"));
                }
            }
            _ => {}
        }
        Ok(Self { rule, depth })
    }

    pub fn constant(c: f64, depth: usize) -> Result<Self> {
        Self::new(CantorRule::Constant { c }, depth)
    }

    /// `p_k = exp(2^k)`, the divergent example.
    pub fn double_exponential(depth: usize) -> Result<Self> {
        Self::new(CantorRule::DoubleExponential { shift: 0 }, depth)
    }

    /// `ln p_k` for `k >= 1`.
    pub fn ln_p(&self, k: usize) -> f64 {
        assert!(k >= 1, "generations start at 1");
        match &self.rule {
            CantorRule::Constant { c } => c.ln(),
            CantorRule::DoubleExponential { shift } => ((k + *shift as usize) as f64).exp2(),
            CantorRule::Custom { p } => p[k - 1].ln(),
        }
    }

    /// Relative length `1/(2 p_k)` of a child (may underflow to 0).
    pub fn child_ratio(&self, k: usize) -> f64 {
        match &self.rule {
            CantorRule::Constant { c } => 0.5 / c,
            CantorRule::Custom { p } => 0.5 / p[k - 1],
            CantorRule::DoubleExponential { .. } => (-self.ln_p(k) - LN_2).exp(),
        }
    }

    /// `ln` of the length of one generation-`n` interval.
    pub fn ln_interval_length(&self, n: usize) -> f64 {
        (1..=n).map(|k| -self.ln_p(k) - LN_2).sum()
    }

    fn check_generation(&self, n: usize) -> Result<()> {
        if n > self.depth {
            return domain(format!("generation {n} exceeds depth {}", self.depth));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CantorStage {
    pub n: usize,
    pub intervals: Vec<(f64, f64)>,
}

impl CantorStage {
    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn as_set(&self) -> Result<BoundedSet1D> {
        BoundedSet1D::intervals(&self.intervals)
    }
}

/// The `2^n` intervals of `E(p_1, ..., p_n)` in increasing order.
pub fn cantor_stage(spec: &CantorSpec, n: usize) -> Result<CantorStage> {
    spec.check_generation(n)?;
    if n > MAX_EXPLICIT_STAGE {
        return domain(format!("generation {n} has too many intervals to list"));
    }
    let mut intervals = vec![(0.0, 1.0)];
    for k in 1..=n {
        let s = spec.child_ratio(k);
        let mut next = Vec::with_capacity(2 * intervals.len());
        for &(a, b) in &intervals {
            let len = b - a;
            next.push((a, a + s * len));
            next.push((b - s * len, b));
        }
        intervals = next;
    }
    Ok(CantorStage { n, intervals })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCapacityReport {
    /// `Some` when the rule has a closed form deciding the series.
    pub diverges: Option<bool>,
    /// `2^{-k} ln p_k`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// For custom lists: whether the terms are nondecreasing over the horizon.
    pub trend_nondecreasing: bool,
}

/// The series `sum 2^{-k} ln p_k`; the limit set has zero capacity exactly
/// when it diverges.
pub fn is_zero_capacity(spec: &CantorSpec, horizon: usize) -> Result<ZeroCapacityReport> {
    if horizon < 1 {
        return domain("horizon must be at least 1");
    }
    let horizon = match &spec.rule {
        CantorRule::Custom { p } => horizon.min(p.len()),
        _ => horizon,
    };
    let terms: Vec<f64> = (1..=horizon).map(|k| spec.ln_p(k) * (-(k as f64)).exp2()).collect();
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let diverges = match spec.rule {
        CantorRule::Constant { .. } => Some(false),
        CantorRule::DoubleExponential { .. } => Some(true),
        CantorRule::Custom { .. } => None,
    };
    let trend_nondecreasing = terms.windows(2).all(|w| w[1] >= w[0]);
    Ok(ZeroCapacityReport { diverges, terms, partial_sums, trend_nondecreasing })
}

/// Continuous piecewise-linear function given by its breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaircaseFunction {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl StaircaseFunction {
    pub fn eval(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        if x <= bp[0] {
            return self.values[0];
        }
        if x >= bp[bp.len() - 1] {
            return self.values[bp.len() - 1];
        }
        let i = bp.partition_point(|&b| b <= x) - 1;
        let (x0, x1) = (bp[i], bp[i + 1]);
        if x1 <= x0 {
            return self.values[i + 1];
        }
        self.values[i] + (self.values[i + 1] - self.values[i]) * (x - x0) / (x1 - x0)
    }

    /// Slope of the linear piece containing `x`.
    pub fn derivative(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        let i = (bp.partition_point(|&b| b <= x).max(1) - 1).min(bp.len() - 2);
        let dx = bp[i + 1] - bp[i];
        if dx <= 0.0 {
            return f64::INFINITY;
        }
        (self.values[i + 1] - self.values[i]) / dx
    }
}

/// Generation-`n` approximant of the singular function: `j/2^n` on the gap
/// after the `j`-th interval, linear across each interval.
pub fn cantor_function(spec: &CantorSpec, n: usize) -> Result<StaircaseFunction> {
    let stage = cantor_stage(spec, n)?;
    let step = (-(n as f64)).exp2();
    let mut breakpoints = Vec::with_capacity(2 * stage.intervals.len());
    let mut values = Vec::with_capacity(2 * stage.intervals.len());
    for (j, &(a, b)) in stage.intervals.iter().enumerate() {
        breakpoints.push(a);
        values.push(j as f64 * step);
        breakpoints.push(b);
        values.push((j + 1) as f64 * step);
    }
    Ok(StaircaseFunction { breakpoints, values })
}

/// The singular function evaluated by descent through the generations.
///
/// `left` and `right` are the distances from the point to the ends of the
/// unit interval; tracking both keeps full relative precision next to
/// either end, which is where all the rise happens.
pub fn singular_value(spec: &CantorSpec, left: f64, right: f64) -> f64 {
    let (mut l, mut r) = (left, right);
    if l <= 0.0 {
        return 0.0;
    }
    if r <= 0.0 {
        return 1.0;
    }
    let mut value = 0.0;
    let mut weight = 0.5;
    for k in 1..=spec.depth {
        let s = spec.child_ratio(k);
        if l <= s {
            (l, r) = (l / s, (s - l) / s);
        } else if r <= s {
            value += weight;
            (l, r) = ((s - r) / s, r / s);
        } else {
            return value + weight;
        }
        weight *= 0.5;
    }
    // Inside a deepest interval: linear, carrying mass 2^{-depth}.
    value + 2.0 * weight * l / (l + r)
}

/// Robin constant of `E(p_from, ..., p_to)` scaled to `[0, 1]`, by the
/// two-cluster recursion: the children are far apart relative to their
/// size, each carries half the equilibrium mass, and they interact at
/// distance `1 - s`.
pub fn robin_by_recursion(spec: &CantorSpec, from: usize, to: usize) -> f64 {
    let mut robin = 4f64.ln();
    for k in (from..=to).rev() {
        let ln_s = -spec.ln_p(k) - LN_2;
        let s = ln_s.exp();
        robin = 0.5 * (robin - ln_s) - 0.5 * (-s).ln_1p();
    }
    robin
}

/// Capacity of `E(p_1, ..., p_n)` from Fekete-type configurations.
///
/// The configuration puts the `m`-point Fekete nodes of a segment into
/// every generation-`n` interval; its Vandermonde product is summed in log
/// form level by level, so lengths far below machine resolution are
/// handled exactly. The `m -> infinity` limit is extrapolated over
/// `m = 2..=m_max`.
pub fn cantor_capacity(spec: &CantorSpec, n: usize, m_max: usize) -> Result<CapacityEstimate> {
    spec.check_generation(n)?;
    if m_max < 7 {
        return domain("cantor_capacity needs m_max >= 7");
    }
    if n > 12 {
        return domain("cantor_capacity supports generations up to 12");
    }
    let mut ns = Vec::new();
    let mut ds = Vec::new();
    for m in 2..=m_max {
        let (count, log_v) = structured_log_product(spec, n, m)?;
        let pairs = (count * (count - 1) / 2) as f64;
        ns.push(count);
        ds.push((log_v / pairs).exp());
    }
    let (value, error_bar) = extrapolate_diameters(&ns, &ds, n == 0);
    let mut est = CapacityEstimate::new(value, error_bar, Method::Transfinite);
    est.n_sequence = ns;
    est.diameter_sequence = ds;
    Ok(est)
}

/// Point count and log-Vandermonde of the structured configuration.
fn structured_log_product(spec: &CantorSpec, n: usize, m: usize) -> Result<(usize, f64)> {
    let nodes = fekete_points(&BoundedSet1D::interval(0.0, 1.0)?, m)?;
    let intervals = 1usize << n;
    // Pairs inside one generation-n interval.
    let inner = nodes.log_v_n + (m * (m - 1) / 2) as f64 * spec.ln_interval_length(n);
    let mut total = intervals as f64 * inner;
    // Pairs split at level j: 2^{j-1} identical parents, each pairing the
    // points of its left child with those of its right child.
    for j in 1..=n {
        let s = spec.child_ratio(j);
        let ln_parent = spec.ln_interval_length(j - 1);
        let pos = subtree_positions(spec, j + 1, n, &nodes.params);
        let count = pos.len() as f64;
        let c = s / (1.0 - s);
        // Right-child point minus left-child point, relative to the parent:
        // (1 - s) + s (y - x) with x, y positions inside the children.
        let mut corr = 0.0;
        for &x in &pos {
            for &y in &pos {
                corr += (c * (y - x)).ln_1p();
            }
        }
        let per_parent = count * count * (ln_parent + (-s).ln_1p()) + corr;
        total += (1u64 << (j - 1)) as f64 * per_parent;
    }
    Ok((intervals * m, total))
}

/// Relative positions, inside a generation-`(from-1)` interval, of the
/// configuration points (levels `from..=to` below it).
fn subtree_positions(spec: &CantorSpec, from: usize, to: usize, nodes: &[f64]) -> Vec<f64> {
    let mut pos = nodes.to_vec();
    for k in (from..=to).rev() {
        let s = spec.child_ratio(k);
        let mut next = Vec::with_capacity(2 * pos.len());
        next.extend(pos.iter().map(|p| s * p));
        next.extend(pos.iter().map(|p| 1.0 - s + s * p));
        pos = next;
    }
    pos
}
