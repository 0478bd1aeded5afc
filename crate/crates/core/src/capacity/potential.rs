use super::estimate::{CapacityEstimate, Method};
use super::set::{Ambient, BoundedSet1D};
use crate::error::{domain, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// Finitely many point masses of total mass one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassDistribution {
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
}

impl MassDistribution {
    pub fn new(nodes: Vec<Complex64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return domain("a mass distribution needs matching, nonempty nodes and weights");
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return domain("weights must be finite and nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("weights sum to {total}, not 1"));
        }
        Ok(Self { nodes, weights })
    }

    pub fn point_mass(z: Complex64) -> Self {
        Self { nodes: vec![z], weights: vec![1.0] }
    }

    /// Equal weights on the given nodes.
    pub fn uniform(nodes: Vec<Complex64>) -> Result<Self> {
        let w = 1.0 / nodes.len() as f64;
        let weights = vec![w; nodes.len()];
        Self::new(nodes, weights)
    }

    /// Like [`MassDistribution::new`], additionally requiring every node to
    /// lie within `tol` of `set`.
    pub fn on_set(set: &BoundedSet1D, nodes: Vec<Complex64>, weights: Vec<f64>, tol: f64) -> Result<Self> {
        let nu = Self::new(nodes, weights)?;
        if let Some(z) = nu.nodes.iter().find(|z| !lies_on(set, **z, tol)) {
            return domain(format!("node {z} is not on the carrier set"));
        }
        Ok(nu)
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn lies_on(set: &BoundedSet1D, z: Complex64, tol: f64) -> bool {
    let f = set.frame();
    let scale = f.factor.norm();
    let p = (z - f.shift) / f.factor;
    let tol = tol / scale;
    match set.ambient() {
        Ambient::Line => {
            p.im.abs() <= tol && set.pieces().iter().any(|&(a, b)| p.re >= a - tol && p.re <= b + tol)
        }
        Ambient::Circle => {
            if (p.norm() - 1.0).abs() > tol {
                return false;
            }
            let t = p.arg();
            set.pieces().iter().any(|&(a, b)| {
                [-TAU, 0.0, TAU].iter().any(|s| t + s >= a - tol && t + s <= b + tol)
            })
        }
    }
}

/// `U(z) = sum_i w_i log(1/|z - z_i|)`; `+inf` at a node of positive weight.
pub fn log_potential(nu: &MassDistribution, z: Complex64) -> f64 {
    let mut acc = 0.0;
    for (node, &w) in nu.nodes.iter().zip(&nu.weights) {
        if w == 0.0 {
            continue;
        }
        let d = (z - node).norm();
        if d == 0.0 {
            return f64::INFINITY;
        }
        acc -= w * d.ln();
    }
    acc
}

/// Discrete equilibrium measure: a mixture of normalised arclength on
/// parameter cells, with weights minimising the logarithmic energy.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumMeasure {
    /// Parameter cells carrying uniform densities.
    pub cells: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    /// Energy `I(nu)` of the discrete measure (in the plane's scale).
    pub energy: f64,
    /// Largest and smallest potential over the evaluation grid on the set.
    pub sup_potential: f64,
    pub inf_potential: f64,
    pub grid_size: usize,
}

impl EquilibriumMeasure {
    /// The measure as point masses at cell midpoints.
    pub fn to_point_masses(&self, set: &BoundedSet1D) -> MassDistribution {
        let nodes = self.cells.iter().map(|&(a, b)| set.point_at(0.5 * (a + b))).collect();
        let total: f64 = self.weights.iter().sum();
        let weights = self.weights.iter().map(|w| w / total).collect();
        MassDistribution { nodes, weights }
    }
}

/// `C = e^{-V}` with `V` the supremum over the set of the potential of the
/// discrete equilibrium measure. The error bar spans the gap to the
/// infimum, because `inf_E U <= V(E) <= sup_E U` for every measure on `E`.
pub fn capacity_via_potential(set: &BoundedSet1D, node_count: usize) -> Result<CapacityEstimate> {
    if node_count < 2 {
        return domain("capacity_via_potential needs node_count >= 2");
    }
    let Some(eq) = equilibrium_measure(set, node_count)? else {
        return Ok(CapacityEstimate::zero(Method::Potential));
    };
    let value = (-eq.sup_potential).exp();
    let upper = (-eq.inf_potential).exp();
    Ok(CapacityEstimate::new(value, upper - value, Method::Potential))
}

/// Energy-minimising cell mixture; `None` for sets of zero length (finite
/// point sets have zero capacity).
pub fn equilibrium_measure(set: &BoundedSet1D, node_count: usize) -> Result<Option<EquilibriumMeasure>> {
    if node_count < 2 {
        return domain("equilibrium_measure needs node_count >= 2");
    }
    let pieces: Vec<(f64, f64)> = set.pieces().iter().copied().filter(|(a, b)| b > a).collect();
    if pieces.is_empty() {
        return Ok(None);
    }
    let kernel = Kernel { ambient: set.ambient() };
    let cells = make_cells(&pieces, node_count, set.is_full_circle());
    let m = cells.len();
    let mut e = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = kernel.cell_energy(cells[i], cells[j]);
            e[(i, j)] = v;
            e[(j, i)] = v;
        }
    }
    let w = minimise_energy(&e);
    let log_scale = set.frame().factor.norm().ln();
    let energy = w.dot(&(&e * &w)) - log_scale;

    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    let mut grid_size = 0;
    for &(a, b) in &cells {
        for k in 0..10 {
            let x = a + (b - a) * k as f64 / 10.0;
            let u: f64 = cells.iter().zip(w.iter()).map(|(&c, &wj)| wj * kernel.cell_potential(c, x)).sum();
            sup = sup.max(u);
            inf = inf.min(u);
            grid_size += 1;
        }
    }
    for &(_, b) in &pieces {
        let u: f64 = cells.iter().zip(w.iter()).map(|(&c, &wj)| wj * kernel.cell_potential(c, b)).sum();
        sup = sup.max(u);
        inf = inf.min(u);
        grid_size += 1;
    }
    Ok(Some(EquilibriumMeasure {
        cells,
        weights: w.iter().copied().collect(),
        energy,
        sup_potential: sup - log_scale,
        inf_potential: inf - log_scale,
        grid_size,
    }))
}

/// Cells on each piece, apportioned by length, with Chebyshev spacing so
/// the endpoint singularities of the equilibrium density are resolved.
fn make_cells(pieces: &[(f64, f64)], total: usize, periodic: bool) -> Vec<(f64, f64)> {
    let lens: Vec<f64> = pieces.iter().map(|(a, b)| b - a).collect();
    let sum: f64 = lens.iter().sum();
    let total = total.max(pieces.len());
    let quotas: Vec<f64> = lens.iter().map(|l| total as f64 * l / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q.floor() as usize).max(1)).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&i, &j| (quotas[j] - quotas[j].floor()).total_cmp(&(quotas[i] - quotas[i].floor())).then(i.cmp(&j)));
    let mut k = 0;
    while assigned < total {
        counts[order[k % order.len()]] += 1;
        assigned += 1;
        k += 1;
    }
    let mut cells = Vec::with_capacity(assigned);
    for (&(a, b), &c) in pieces.iter().zip(&counts) {
        let node = |j: usize| {
            if periodic {
                a + (b - a) * j as f64 / c as f64
            } else {
                a + (b - a) * 0.5 * (1.0 - (PI * j as f64 / c as f64).cos())
            }
        };
        for j in 0..c {
            let hi = if j + 1 == c { b } else { node(j + 1) };
            cells.push((node(j), hi));
        }
    }
    cells
}

/// Minimiser of `w' E w` over the probability simplex: the bordered KKT
/// system first, then accelerated projected gradient if that solution has
/// negative weights.
pub(crate) fn minimise_energy(e: &DMatrix<f64>) -> DVector<f64> {
    let m = e.nrows();
    let mut k = DMatrix::<f64>::zeros(m + 1, m + 1);
    k.view_mut((0, 0), (m, m)).copy_from(e);
    for i in 0..m {
        k[(i, m)] = 1.0;
        k[(m, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(m + 1);
    rhs[m] = 1.0;
    let start = match k.lu().solve(&rhs) {
        Some(sol) => DVector::from_iterator(m, sol.iter().take(m).copied()),
        None => DVector::from_element(m, 1.0 / m as f64),
    };
    if start.iter().all(|&w| w >= 0.0) {
        return start;
    }
    let lipschitz = 2.0 * e.iter().map(|x| x * x).sum::<f64>().sqrt();
    let step = 1.0 / lipschitz;
    let mut x = project_simplex(&start);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..20_000 {
        let grad = 2.0 * (e * &y);
        let x_next = project_simplex(&(&y - step * grad));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let delta = (&x_next - &x).amax();
        y = &x_next + ((t - 1.0) / t_next) * (&x_next - &x);
        x = x_next;
        t = t_next;
        if delta < 1e-14 {
            break;
        }
    }
    x
}

/// Euclidean projection onto `{w >= 0, sum w = 1}`.
fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if ui - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

const GAUSS_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GAUSS_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Logarithmic kernel integrated against uniform densities on cells.
///
/// On the line everything is closed form. On the circle
/// `log|2 sin(u/2)| = log|u| + s(u)` with `s` smooth for `|u| < 2 pi`; the
/// `log|u|` part is closed form and `s` is integrated by Gauss-Legendre.
struct Kernel {
    ambient: Ambient,
}

impl Kernel {
    /// `-(1/|c|) int_c log|x - y| dy`.
    fn cell_potential(&self, (c, d): (f64, f64), x: f64) -> f64 {
        let h = d - c;
        let x = match self.ambient {
            Ambient::Line => x,
            Ambient::Circle => x - TAU * ((x - 0.5 * (c + d)) / TAU).round(),
        };
        let mut integral = antider_log(x - c) - antider_log(x - d);
        if self.ambient == Ambient::Circle {
            let (mid, half) = (0.5 * (c + d), 0.5 * h);
            integral += half
                * GAUSS_NODES
                    .iter()
                    .zip(&GAUSS_WEIGHTS)
                    .map(|(g, w)| w * smooth_part(x - (mid + half * g)))
                    .sum::<f64>();
        }
        -integral / h
    }

    /// `-(1/(|c1||c2|)) int_c1 int_c2 log|x - y| dy dx`.
    fn cell_energy(&self, (a, b): (f64, f64), (c, d): (f64, f64)) -> f64 {
        let (h1, h2) = (b - a, d - c);
        let shift = match self.ambient {
            Ambient::Line => 0.0,
            Ambient::Circle => TAU * ((0.5 * (a + b) - 0.5 * (c + d)) / TAU).round(),
        };
        let (a, b) = (a - shift, b - shift);
        let mut integral = antider2_log(b - c) - antider2_log(a - c) - antider2_log(b - d) + antider2_log(a - d);
        if self.ambient == Ambient::Circle {
            let (m1, r1, m2, r2) = (0.5 * (a + b), 0.5 * h1, 0.5 * (c + d), 0.5 * h2);
            let mut acc = 0.0;
            for (gi, wi) in GAUSS_NODES.iter().zip(&GAUSS_WEIGHTS) {
                for (gj, wj) in GAUSS_NODES.iter().zip(&GAUSS_WEIGHTS) {
                    acc += wi * wj * smooth_part((m1 + r1 * gi) - (m2 + r2 * gj));
                }
            }
            integral += r1 * r2 * acc;
        }
        -integral / (h1 * h2)
    }
}

/// `u log|u| - u`, an antiderivative of `log|u|`.
fn antider_log(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.abs().ln() - u
    }
}

/// `u^2/2 log|u| - 3u^2/4`, an antiderivative of [`antider_log`].
fn antider2_log(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        0.5 * u * u * u.abs().ln() - 0.75 * u * u
    }
}

/// `log|2 sin(u/2)| - log|u|`.
fn smooth_part(u: f64) -> f64 {
    let half = 0.5 * u;
    if half.abs() < 1e-8 {
        return -half * half / 6.0;
    }
    (half.sin() / half).abs().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_examples() {
        let nu = MassDistribution::point_mass(Complex64::new(0.0, 0.0));
        assert_eq!(log_potential(&nu, Complex64::new(1.0, 0.0)), 0.0);
        assert_eq!(log_potential(&nu, Complex64::new(0.0, 0.0)), f64::INFINITY);
        let two = MassDistribution::uniform(vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(log_potential(&two, Complex64::new(0.0, 0.0)), 0.0);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let z = vec![Complex64::new(0.0, 0.0); 2];
        assert!(MassDistribution::new(z.clone(), vec![0.5, 0.4]).is_err());
        assert!(MassDistribution::new(z, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn carrier_check() {
        let s = BoundedSet1D::interval(0.0, 1.0).unwrap();
        assert!(MassDistribution::on_set(&s, vec![Complex64::new(0.5, 0.0)], vec![1.0], 1e-12).is_ok());
        assert!(MassDistribution::on_set(&s, vec![Complex64::new(2.0, 0.0)], vec![1.0], 1e-12).is_err());
    }

    #[test]
    fn cell_potential_matches_quadrature() {
        for ambient in [Ambient::Line, Ambient::Circle] {
            let k = Kernel { ambient };
            let cell = (0.3, 0.5);
            let x = 1.7;
            let n = 20_000;
            let mut acc = 0.0;
            for j in 0..n {
                let y = 0.3 + 0.2 * (j as f64 + 0.5) / n as f64;
                acc -= super::super::set::param_log_distance(ambient, x, y);
            }
            acc /= n as f64;
            assert!((k.cell_potential(cell, x) - acc).abs() < 1e-8);
        }
    }

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_simplex(&DVector::from_vec(vec![0.9, 0.8, -0.3]));
        assert!((p.sum() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert!((p[0] - 0.55).abs() < 1e-12 && (p[1] - 0.45).abs() < 1e-12);
    }
}
