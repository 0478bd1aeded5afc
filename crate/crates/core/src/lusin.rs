//! Continuous antiderivatives that are exact off sets of small capacity.
//!
//! Data live on a uniform grid of `N` cells over `[a, b]`. Sampled
//! integrands are constant on each cell, so their running integral `H` is
//! exact at the nodes and linear inside cells. Flattening subtracts from
//! `H` a glued family of rescaled singular functions that match `H` at the
//! subdivision points; the difference keeps the derivative of `H` away from
//! the Cantor sets carrying the rise, and stays small in sup norm.
//!
//! The singular functions use `p_k = exp(2^(k+3))`: the rise of each piece
//! is confined to two clusters of relative size `e^{-16}/2` at its ends, and
//! after `D` generations the exceptional set is a union of Cantor stages
//! whose capacity is tracked in log form, far below grid resolution.

use crate::cantor::{cantor_stage, robin_by_recursion, singular_value, CantorRule, CantorSpec};
use crate::capacity::{minimise_energy, BoundedSet1D};
use crate::error::{domain, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Default number of grid cells.
pub const DEFAULT_CELLS: usize = 1 << 16;
/// Deepest generation considered when shrinking the exceptional set.
pub const MAX_DEPTH: usize = 60;

/// Singular-function rule used for flattening.
pub fn flattening_spec() -> CantorSpec {
    CantorSpec::new(CantorRule::DoubleExponential { shift: 3 }, MAX_DEPTH).expect("valid rule")
}

/// Uniform grid of `cells` cells on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub cells: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, cells: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return domain(format!("invalid interval [{a}, {b}]"));
        }
        if cells < 2 {
            return domain("a grid needs at least two cells");
        }
        Ok(Self { a, b, cells })
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }

    /// Cell containing `x` (the last cell for `x = b`).
    pub fn cell_of(&self, x: f64) -> usize {
        (((x - self.a) / self.step()).floor().max(0.0) as usize).min(self.cells - 1)
    }

    /// Node values of the running integral of cell values.
    pub fn integrate(&self, cell_values: &[f64]) -> Vec<f64> {
        let h = self.step();
        let mut out = Vec::with_capacity(cell_values.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for v in cell_values {
            acc += v * h;
            out.push(acc);
        }
        out
    }
}

/// Built-in integrands, sampled at cell midpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhiSource {
    Constant(f64),
    /// `-1` left of the midpoint of `[a, b]`, `+1` right of it.
    Sign,
    /// Independent uniform values in `[-1, 1]` from a seeded stream.
    Noise { seed: u64 },
}

impl PhiSource {
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        let mid = 0.5 * (grid.a + grid.b);
        match *self {
            Self::Constant(c) => vec![c; grid.cells],
            Self::Sign => (0..grid.cells)
                .map(|i| if grid.node(i) + 0.5 * grid.step() < mid { -1.0 } else { 1.0 })
                .collect(),
            Self::Noise { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..grid.cells).map(|_| rng.gen_range(-1.0..=1.0)).collect()
            }
        }
    }
}

/// One piece `[node start, node end]` of a flattening subdivision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub h_start: f64,
    pub h_end: f64,
}

impl Segment {
    pub fn rise(&self) -> f64 {
        self.h_end - self.h_start
    }
}

/// `F` glued from rescaled singular functions, and `G = H - F`.
#[derive(Debug, Clone, Serialize)]
pub struct Flattening {
    pub grid: Grid,
    pub segments: Vec<Segment>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    #[serde(skip)]
    spec: CantorSpec,
}

impl Flattening {
    /// `F` at an arbitrary point of `[a, b]`.
    pub fn eval_f(&self, x: f64) -> f64 {
        let grid = &self.grid;
        let k = self.segments.partition_point(|s| grid.node(s.end) <= x).min(self.segments.len() - 1);
        let seg = self.segments[k];
        let (xs, xe) = (grid.node(seg.start), grid.node(seg.end));
        let len = xe - xs;
        seg.h_start + seg.rise() * singular_value(&self.spec, (x - xs) / len, (xe - x) / len)
    }

    pub fn sup_g(&self) -> f64 {
        self.g.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Subdivides `[a, b]` so that `H` oscillates by less than `eps/2` on each
/// piece, and subtracts the singular interpolant of `H` on every piece.
///
/// `F` matches `H` at the subdivision nodes, so `G = H - F` vanishes there,
/// `|G| < eps/2` on every node, and `G' = H'` off the Cantor sets of `F`.
/// A single cell whose own oscillation reaches `eps/2` becomes its own piece.
pub fn flatten_on_subdivision(grid: &Grid, h: &[f64], eps: f64) -> Result<Flattening> {
    flatten_with(grid, h, eps, &flattening_spec())
}

pub fn flatten_with(grid: &Grid, h: &[f64], eps: f64, spec: &CantorSpec) -> Result<Flattening> {
    if h.len() != grid.cells + 1 {
        return domain(format!("table has {} values for {} cells", h.len(), grid.cells));
    }
    if !(eps > 0.0) {
        return domain("eps must be positive");
    }
    if h.iter().any(|v| !v.is_finite()) {
        return domain("table values must be finite");
    }
    let mut segments = Vec::new();
    let mut start = 0;
    let (mut lo, mut hi) = (h[0], h[0]);
    for j in 1..=grid.cells {
        let (nlo, nhi) = (lo.min(h[j]), hi.max(h[j]));
        if nhi - nlo >= 0.5 * eps && j - 1 > start {
            segments.push(Segment { start, end: j - 1, h_start: h[start], h_end: h[j - 1] });
            start = j - 1;
            lo = h[j - 1].min(h[j]);
            hi = h[j - 1].max(h[j]);
        } else {
            lo = nlo;
            hi = nhi;
        }
    }
    segments.push(Segment { start, end: grid.cells, h_start: h[start], h_end: h[grid.cells] });

    let mut f = vec![0.0; h.len()];
    for seg in &segments {
        let len = (seg.end - seg.start) as f64;
        for (i, fi) in f.iter_mut().enumerate().take(seg.end + 1).skip(seg.start) {
            let l = (i - seg.start) as f64 / len;
            let r = (seg.end - i) as f64 / len;
            *fi = seg.h_start + seg.rise() * singular_value(spec, l, r);
        }
        // Pin the end node: `h_start + rise` can round away from `h_end`.
        f[seg.end] = seg.h_end;
    }
    let g = h.iter().zip(&f).map(|(a, b)| a - b).collect();
    Ok(Flattening { grid: *grid, segments, f, g, spec: spec.clone() })
}

/// Node table `G` with `G = 0` on the cells marked in `closed`, `G' = g`
/// off the singular sets inside the remaining components, and
/// `|G| <= eps * dist(x, closed set)` up to the one-cell truncation at the
/// component ends.
///
/// Every component is cut at points accumulating geometrically at both ends
/// (midpoint, then halving the distance to each end down to one cell); on
/// the `j`-th piece of the `k`-th component the flattening budget is
/// `eps * min(distance to the component ends) / (k + |j|)`.
pub fn flatten_off_closed_set(grid: &Grid, g: &[f64], closed: &[bool], eps: f64) -> Result<Vec<f64>> {
    if g.len() != grid.cells || closed.len() != grid.cells {
        return domain("cell tables must match the grid");
    }
    if g.iter().any(|v| !v.is_finite()) {
        return domain("integrand must be bounded");
    }
    let h = grid.step();
    let mut out = vec![0.0; grid.cells + 1];
    let mut component = 0usize;
    let mut i = 0;
    while i < grid.cells {
        if closed[i] {
            i += 1;
            continue;
        }
        let s = i;
        while i < grid.cells && !closed[i] {
            i += 1;
        }
        let e = i;
        component += 1;
        let cuts = accumulating_cuts(s, e);
        let mid_index = cuts.iter().position(|&c| c == (s + e) / 2).unwrap_or(0) as i64;
        for (idx, w) in cuts.windows(2).enumerate() {
            let (u, v) = (w[0], w[1]);
            let j = idx as i64 - mid_index;
            let dist = |c: usize| (c - s).min(e - c) as f64 * h;
            let budget = eps * dist(u).max(dist(v)) / (component as f64 + j.unsigned_abs() as f64);
            let sub = Grid { a: grid.node(u), b: grid.node(v), cells: v - u };
            let table = sub.integrate(&g[u..v]);
            if table.iter().all(|&t| t == 0.0) {
                continue;
            }
            let fl = flatten_on_subdivision(&sub, &table, budget.max(f64::MIN_POSITIVE))?;
            out[u..=v].copy_from_slice(&fl.g);
        }
    }
    Ok(out)
}

/// `s < ... < mid < ... < e`, halving towards each end down to one cell.
fn accumulating_cuts(s: usize, e: usize) -> Vec<usize> {
    let mid = (s + e) / 2;
    let mut left = vec![s];
    let mut d = mid - s;
    let mut rev = Vec::new();
    while d > 1 {
        d /= 2;
        rev.push(s + d);
    }
    rev.reverse();
    left.extend(rev.into_iter().filter(|&c| c > s && c < mid));
    left.push(mid);
    let mut d = e - mid;
    while d > 1 {
        d /= 2;
        left.push(e - d);
    }
    left.push(e);
    left.dedup();
    left.retain(|&c| c >= s && c <= e);
    left
}

/// Capacity of the exceptional set of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceptionalCapacity {
    /// Generations of the singular sets kept in the exceptional set.
    pub depth: usize,
    pub robin_constant: f64,
    /// `e^{-V}`.
    pub value: f64,
    /// `1/V`.
    pub wiener: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LusinStage {
    pub n: usize,
    /// `Q_n`, resolved to the first Cantor generation; deeper generations
    /// only remove pieces far below `f64` resolution and are carried by
    /// `capacity.depth`.
    pub q: BoundedSet1D,
    /// `G_n` at the nodes.
    pub g: Vec<f64>,
    pub sup_g: f64,
    /// Capacity of `[a, b] \ Q_n`.
    pub capacity: ExceptionalCapacity,
}

#[derive(Debug, Clone, Serialize)]
pub struct LusinResult {
    pub grid: Grid,
    pub eps: f64,
    pub phi_samples: Vec<f64>,
    /// `Phi` at the nodes.
    pub phi: Vec<f64>,
    pub stages: Vec<LusinStage>,
    #[serde(skip)]
    flattening: Flattening,
    #[serde(skip)]
    running: Vec<f64>,
}

/// Difference-quotient comparison against the integrand on `Q_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientAudit {
    pub stage: usize,
    pub points: usize,
    pub passed: usize,
    pub fraction: f64,
    pub max_error: f64,
    pub step: f64,
    pub tolerance: f64,
}

/// Continuous `Phi` with `Phi(a) = Phi(b) = 0`, `|Phi| <= eps` and
/// `Phi' = phi` off a set whose capacity is driven below `1/n` at stage `n`.
///
/// Stage 1 flattens the running integral of `phi`. Its derivative equals
/// `phi` everywhere except on the singular sets, which have capacity zero,
/// so the residual `phi - Phi_m'` handed to later stages vanishes off a
/// capacity-zero set and their corrections `G_{m+1}` are identically zero;
/// those stages only shrink the recorded exceptional set by keeping more
/// Cantor generations, until its Wiener capacity drops below `1/(m+1)`.
pub fn lusin_antiderivative(grid: &Grid, phi: &[f64], eps: f64, stages: usize) -> Result<LusinResult> {
    if phi.len() != grid.cells {
        return domain(format!("{} samples for {} cells", phi.len(), grid.cells));
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return domain("phi samples must be bounded");
    }
    if !(eps > 0.0) || stages < 1 {
        return domain("need eps > 0 and at least one stage");
    }
    let running = grid.integrate(phi);
    let flattening = flatten_on_subdivision(grid, &running, eps)?;
    let spec = flattening.spec.clone();
    let phi_table = flattening.g.clone();

    let mut out_stages = Vec::with_capacity(stages);
    let mut depth = 1;
    let mut q_cells = vec![true; grid.cells];
    for n in 1..=stages {
        let g = if n == 1 {
            phi_table.clone()
        } else {
            // Residual of the exact derivative off the singular sets.
            let residual = vec![0.0; grid.cells];
            let budget = eps * (-(n as f64)).exp2();
            flatten_off_closed_set(grid, &residual, &q_cells, budget)?
        };
        let target = 1.0 / n as f64;
        let mut cap = exceptional_capacity(grid, &flattening.segments, &spec, depth);
        while cap.wiener >= target && depth < MAX_DEPTH {
            depth += 1;
            cap = exceptional_capacity(grid, &flattening.segments, &spec, depth);
        }
        let q = regular_set(grid, &flattening.segments, &spec)?;
        q_cells = (0..grid.cells)
            .map(|i| q.pieces().iter().any(|&(lo, hi)| lo <= grid.node(i) && grid.node(i + 1) <= hi))
            .collect();
        let sup_g = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        out_stages.push(LusinStage { n, q, g, sup_g, capacity: cap });
    }
    Ok(LusinResult {
        grid: *grid,
        eps,
        phi_samples: phi.to_vec(),
        phi: phi_table,
        stages: out_stages,
        flattening,
        running,
    })
}

/// `[a, b]` minus the first-generation clusters of every rising segment.
fn regular_set(grid: &Grid, segments: &[Segment], spec: &CantorSpec) -> Result<BoundedSet1D> {
    let s1 = spec.child_ratio(1);
    let mut pieces = Vec::with_capacity(segments.len());
    for seg in segments {
        let (xs, xe) = (grid.node(seg.start), grid.node(seg.end));
        if seg.rise() == 0.0 {
            pieces.push((xs, xe));
        } else {
            let ell = (xe - xs) * s1;
            pieces.push((xs + ell, xe - ell));
        }
    }
    BoundedSet1D::intervals(&pieces)
}

/// Robin constant of the union of the generation-`depth` clusters.
///
/// Each rising segment of length `L` contributes two clusters at its ends,
/// each a copy of generations `2..=depth` scaled by `L/(2 p_1)`. Clusters
/// are tiny compared with their separations, so the union is treated as
/// point-like charges with self-energy equal to their Robin constants.
fn exceptional_capacity(grid: &Grid, segments: &[Segment], spec: &CantorSpec, depth: usize) -> ExceptionalCapacity {
    let s1 = spec.child_ratio(1);
    let tail = robin_by_recursion(spec, 2, depth);
    let mut centres = Vec::new();
    let mut selfs = Vec::new();
    for seg in segments.iter().filter(|s| s.rise() != 0.0) {
        let (xs, xe) = (grid.node(seg.start), grid.node(seg.end));
        let ell = (xe - xs) * s1;
        let robin = tail - ((xe - xs).ln() - spec.ln_p(1) - std::f64::consts::LN_2);
        centres.push(xs + 0.5 * ell);
        selfs.push(robin);
        centres.push(xe - 0.5 * ell);
        selfs.push(robin);
    }
    if centres.is_empty() {
        return ExceptionalCapacity { depth, robin_constant: f64::INFINITY, value: 0.0, wiener: 0.0 };
    }
    let m = centres.len();
    let mut e = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        e[(i, i)] = selfs[i];
        for j in 0..i {
            let v = -(centres[i] - centres[j]).abs().ln();
            e[(i, j)] = v;
            e[(j, i)] = v;
        }
    }
    let w = minimise_energy(&e);
    let v = w.dot(&(&e * &w));
    ExceptionalCapacity {
        depth,
        robin_constant: v,
        value: (-v).exp(),
        wiener: if v > 0.0 { 1.0 / v } else { f64::INFINITY },
    }
}

impl LusinResult {
    /// `Phi` at any point of `[a, b]`, exact up to rounding.
    pub fn eval(&self, x: f64) -> f64 {
        let grid = &self.grid;
        let i = grid.cell_of(x);
        let h = self.running[i] + self.phi_samples[i] * (x - grid.node(i));
        h - self.flattening.eval_f(x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.phi.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn segments(&self) -> &[Segment] {
        &self.flattening.segments
    }

    /// The measure `dF` of the singular part as point masses `(x, weight)`:
    /// every rising segment carries its rise on the generation-`depth`
    /// Cantor intervals (atoms at their midpoints; atoms that coincide in
    /// floating point are merged). Later stages add no singular mass.
    pub fn singular_atoms(&self, depth: usize) -> Result<Vec<(f64, f64)>> {
        let spec = &self.flattening.spec;
        let stage = cantor_stage(spec, depth.min(spec.depth))?;
        let w = (-(stage.n as f64)).exp2();
        let grid = &self.grid;
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for seg in self.segments().iter().filter(|s| s.rise() != 0.0) {
            let (xs, xe) = (grid.node(seg.start), grid.node(seg.end));
            for &(l, r) in &stage.intervals {
                let x = xs + 0.5 * (l + r) * (xe - xs);
                match atoms.last_mut() {
                    Some(last) if last.0 == x => last.1 += w * seg.rise(),
                    _ => atoms.push((x, w * seg.rise())),
                }
            }
        }
        Ok(atoms)
    }

    /// Forward quotients with step `h/4` at the nodes whose step stays in
    /// `Q_n`, compared with the sample of the cell they start.
    pub fn quotient_audit(&self, stage: usize, tolerance: f64) -> Result<QuotientAudit> {
        let Some(st) = self.stages.get(stage.wrapping_sub(1)) else {
            return domain(format!("no stage {stage}"));
        };
        let grid = &self.grid;
        let step = 0.25 * grid.step();
        let (mut points, mut passed, mut max_error) = (0, 0, 0.0f64);
        for i in 0..grid.cells {
            let x = grid.node(i);
            let inside = st.q.pieces().iter().any(|&(lo, hi)| lo <= x && x + step <= hi);
            if !inside {
                continue;
            }
            let q = (self.eval(x + step) - self.eval(x)) / step;
            let err = (q - self.phi_samples[i]).abs();
            points += 1;
            max_error = max_error.max(err);
            if err <= tolerance {
                passed += 1;
            }
        }
        Ok(QuotientAudit {
            stage,
            points,
            passed,
            fraction: if points == 0 { 1.0 } else { passed as f64 / points as f64 },
            max_error,
            step,
            tolerance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(cells: usize) -> Grid {
        Grid::new(0.0, 1.0, cells).unwrap()
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let grid = unit_grid(256);
        let r = lusin_antiderivative(&grid, &vec![0.0; 256], 0.1, 2).unwrap();
        assert!(r.phi.iter().all(|&v| v == 0.0));
        assert_eq!(r.stages[0].q.pieces(), &[(0.0, 1.0)]);
        assert_eq!(r.stages[0].capacity.value, 0.0);
    }

    #[test]
    fn flattening_single_segment() {
        // H = x(1 - x)/4 oscillates by 1/16 < eps/2 for eps = 0.2.
        let grid = unit_grid(64);
        let h: Vec<f64> = (0..=64).map(|i| grid.node(i) * (1.0 - grid.node(i)) / 4.0).collect();
        let fl = flatten_on_subdivision(&grid, &h, 0.2).unwrap();
        assert_eq!(fl.segments.len(), 1);
        assert!(fl.sup_g() <= 0.2);
        assert_eq!(fl.g[0], 0.0);
        assert_eq!(fl.g[64], 0.0);
    }

    #[test]
    fn flattening_identity_ramp() {
        let grid = unit_grid(4096);
        let h: Vec<f64> = (0..=4096).map(|i| grid.node(i)).collect();
        let fl = flatten_on_subdivision(&grid, &h, 0.05).unwrap();
        assert!(fl.sup_g() < 0.025);
        for s in &fl.segments {
            assert_eq!(fl.f[s.start], h[s.start]);
            assert_eq!(fl.f[s.end], h[s.end]);
            // Flat in the middle of each piece.
            let mid = (s.start + s.end) / 2;
            assert_eq!(fl.f[mid], fl.f[mid + 1]);
        }
        let zero = flatten_on_subdivision(&grid, &vec![0.0; 4097], 0.05).unwrap();
        assert!(zero.f.iter().chain(&zero.g).all(|&v| v == 0.0));
    }

    #[test]
    fn cuts_accumulate_at_both_ends() {
        let c = accumulating_cuts(0, 64);
        assert_eq!(c, vec![0, 1, 2, 4, 8, 16, 32, 48, 56, 60, 62, 63, 64]);
        assert_eq!(accumulating_cuts(5, 6), vec![5, 6]);
    }

    #[test]
    fn off_closed_set_vanishes_on_the_set_and_decays() {
        let grid = unit_grid(1024);
        let closed: Vec<bool> = (0..1024).map(|i| !(256..768).contains(&i)).collect();
        let g = vec![1.0; 1024];
        let eps = 0.5;
        let out = flatten_off_closed_set(&grid, &g, &closed, eps).unwrap();
        assert!(out[..=256].iter().chain(&out[768..]).all(|&v| v == 0.0));
        // |G(x)| <= eps * dist(x, P) away from the truncated end cells.
        let h = grid.step();
        for (i, v) in out.iter().enumerate().take(767).skip(258) {
            let dist = (i - 256).min(768 - i) as f64 * h;
            assert!(v.abs() <= eps * dist, "i={i}");
        }
    }

    #[test]
    fn cluster_model_matches_direct_capacity() {
        // With p = 40 the first-generation clusters are wide enough to be
        // represented directly.
        let grid = unit_grid(3);
        let spec = CantorSpec::constant(40.0, 4).unwrap();
        let segments: Vec<Segment> =
            (0..3).map(|k| Segment { start: k, end: k + 1, h_start: k as f64, h_end: (k + 1) as f64 }).collect();
        let model = exceptional_capacity(&grid, &segments, &spec, 1);
        let s = spec.child_ratio(1);
        let mut pieces = Vec::new();
        for k in 0..3 {
            let (xs, xe) = (grid.node(k), grid.node(k + 1));
            pieces.push((xs, xs + s * (xe - xs)));
            pieces.push((xe - s * (xe - xs), xe));
        }
        let set = BoundedSet1D::intervals(&pieces).unwrap();
        let direct = crate::capacity::capacity_via_potential(&set, 400).unwrap();
        assert!((model.value / direct.value - 1.0).abs() < 0.02, "{} vs {}", model.value, direct.value);
    }
}
