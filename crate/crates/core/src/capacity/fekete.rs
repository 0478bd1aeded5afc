use super::estimate::{CapacityEstimate, Method};
use super::set::{param_log_distance, Ambient, BoundedSet1D};
use crate::error::{domain, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// `prod_{k<l} |z_k - z_l|`, accumulated as a sum of logarithms.
pub fn vandermonde_product(points: &[Complex64]) -> Result<f64> {
    Ok(log_vandermonde(points)?.exp())
}

/// `sum_{k<l} log |z_k - z_l|` (`-inf` when two points coincide).
pub fn log_vandermonde(points: &[Complex64]) -> Result<f64> {
    if points.len() < 2 {
        return domain("the Vandermonde product needs at least two points");
    }
    let mut acc = 0.0;
    for (k, a) in points.iter().enumerate() {
        for b in &points[k + 1..] {
            acc += (a - b).norm().ln();
        }
    }
    Ok(acc)
}

/// A maximising `n`-point configuration on a set.
#[derive(Debug, Clone, Serialize)]
pub struct FeketeResult {
    pub n: usize,
    pub points: Vec<Complex64>,
    /// Parameters (abscissae or angles) of `points`.
    pub params: Vec<f64>,
    pub v_n: f64,
    pub log_v_n: f64,
    /// `V_n^{2/(n(n-1))}`, computed from `log_v_n` so it survives underflow of `v_n`.
    pub diameter_estimate: f64,
}

/// Knobs of the deterministic Fekete optimiser.
#[derive(Debug, Clone, Copy)]
pub struct FeketeOptions {
    /// Upper bound on single-point transfers between pieces.
    pub max_transfers: usize,
    pub golden_sweeps: usize,
    pub max_newton_steps: usize,
}

impl Default for FeketeOptions {
    fn default() -> Self {
        Self { max_transfers: 64, golden_sweeps: 1, max_newton_steps: 200 }
    }
}

pub fn fekete_points(set: &BoundedSet1D, n: usize) -> Result<FeketeResult> {
    fekete_points_with(set, n, &FeketeOptions::default())
}

/// Maximises the log-product over `n`-point configurations.
///
/// With the number of points on each piece fixed, and the points ordered,
/// the log-product is a concave function of the parameters, so golden-section
/// sweeps followed by projected Newton steps reach its maximum. The
/// apportionment among pieces starts proportional to length and is improved
/// by steepest single-point transfers between pieces.
pub fn fekete_points_with(set: &BoundedSet1D, n: usize, opts: &FeketeOptions) -> Result<FeketeResult> {
    if n < 2 {
        return domain("Fekete configurations need n >= 2");
    }
    if set.is_empty() {
        return domain("Fekete points of an empty set");
    }
    let pieces = set.pieces();
    let lens: Vec<f64> = pieces.iter().map(|(a, b)| b - a).collect();
    let total_len: f64 = lens.iter().sum();
    if total_len <= 0.0 {
        // Finitely many points: use them round robin.
        let mut t = Vec::with_capacity(n);
        let mut piece = Vec::with_capacity(n);
        for k in 0..n {
            t.push(pieces[k % pieces.len()].0);
            piece.push(k % pieces.len());
        }
        return Ok(Config { set, t, piece, periodic: false }.finish());
    }
    let (cfg, _) = search_allocation(set, apportion(&lens, n), opts);
    Ok(cfg.finish())
}

/// Steepest single-point transfers between pieces, starting from `counts`.
fn search_allocation<'a>(
    set: &'a BoundedSet1D,
    mut counts: Vec<usize>,
    opts: &FeketeOptions,
) -> (Config<'a>, Vec<usize>) {
    let pieces = set.pieces();
    let mut best = Config::placed(set, &counts);
    let mut best_f = best.optimise(opts);
    for _ in 0..opts.max_transfers {
        if pieces.len() < 2 {
            break;
        }
        let mut improved: Option<(f64, Vec<usize>, Config)> = None;
        for from in 0..pieces.len() {
            if counts[from] == 0 {
                continue;
            }
            for to in 0..pieces.len() {
                let (a, b) = pieces[to];
                if to == from || (b <= a && counts[to] >= 1) {
                    continue;
                }
                let mut trial = counts.clone();
                trial[from] -= 1;
                trial[to] += 1;
                let mut cfg = Config::placed(set, &trial);
                let f = cfg.optimise(opts);
                let bar = improved.as_ref().map_or(best_f + 1e-12 * (1.0 + best_f.abs()), |b| b.0);
                if f > bar {
                    improved = Some((f, trial, cfg));
                }
            }
        }
        match improved {
            Some((f, c, cfg)) => {
                best_f = f;
                counts = c;
                best = cfg;
            }
            None => break,
        }
    }
    (best, counts)
}

/// Largest-remainder apportionment of `n` points by piece length; pieces of
/// zero length get nothing.
fn apportion(lens: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = lens.iter().sum();
    let quotas: Vec<f64> = lens.iter().map(|l| n as f64 * l / total).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut rest = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..lens.len()).filter(|&i| lens[i] > 0.0).collect();
    order.sort_by(|&i, &j| {
        let fi = quotas[i] - quotas[i].floor();
        let fj = quotas[j] - quotas[j].floor();
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

/// Fekete sequence for `n = 4..=n_max` and its extrapolated limit.
pub fn transfinite_diameter(set: &BoundedSet1D, n_max: usize) -> Result<CapacityEstimate> {
    if n_max < 4 {
        return domain("transfinite_diameter needs n_max >= 4");
    }
    if set.is_empty() {
        return Ok(CapacityEstimate::zero(Method::Transfinite));
    }
    let ns: Vec<usize> = (4..=n_max).collect();
    let mut ds = Vec::with_capacity(ns.len());
    let lens: Vec<f64> = set.pieces().iter().map(|(a, b)| b - a).collect();
    if lens.iter().sum::<f64>() <= 0.0 {
        for &n in &ns {
            ds.push(fekete_points(set, n)?.diameter_estimate);
        }
    } else {
        // Each n starts from the apportionment found for n - 1, plus one
        // point on the piece furthest below its length quota.
        let opts = FeketeOptions::default();
        let mut counts = apportion(&lens, ns[0] - 1);
        for &n in &ns {
            let quota = apportion(&lens, n);
            let target = (0..lens.len())
                .filter(|&p| lens[p] > 0.0)
                .max_by_key(|&p| (quota[p] as i64 - counts[p] as i64, std::cmp::Reverse(p)))
                .expect("a piece of positive length");
            counts[target] += 1;
            let (cfg, found) = search_allocation(set, counts, &opts);
            counts = found;
            ds.push(cfg.finish().diameter_estimate);
        }
    }
    let smooth = set.pieces().len() == 1;
    let (value, error_bar) = extrapolate_diameters(&ns, &ds, smooth);
    let mut est = CapacityEstimate::new(value, error_bar, Method::Transfinite);
    est.n_sequence = ns;
    est.diameter_sequence = ds;
    Ok(est)
}

/// Limit of a Fekete diameter sequence.
///
/// `log d_n` is fitted by least squares in powers of `1/n` and `ln n/n`.
/// Sets made of one piece give smooth sequences and use a five-term model
/// on the second half of the data; with several pieces the sequence wobbles
/// as points move between pieces, so a three-term model over `n >= 8`
/// averages the wobble out. The error bar is the largest change of the
/// limit under dropping the last term or switching to a neighbouring model.
/// The sequence is nonincreasing, so the result is capped at its last term.
pub fn extrapolate_diameters(ns: &[usize], ds: &[f64], smooth: bool) -> (f64, f64) {
    assert_eq!(ns.len(), ds.len());
    if ds.is_empty() || ds.iter().any(|&d| d <= 0.0 || !d.is_finite()) {
        return (0.0, 0.0);
    }
    let last = *ds.last().expect("nonempty");
    if ds.len() < 6 {
        let prev = ds[ds.len().saturating_sub(2)];
        return (last, (last - prev).abs());
    }
    let n_max = *ns.last().expect("nonempty");
    let (primary, variants): (Fit, Vec<Fit>) = if smooth {
        let lo = n_max / 2;
        ((lo, 5), vec![(lo, 4), (lo.saturating_sub(lo / 2), 5)])
    } else {
        ((8, 3), vec![(16, 3), (8, 4)])
    };
    let value = fit_limit(ns, ds, primary);
    let mut err = (value - fit_limit(&ns[..ns.len() - 1], &ds[..ds.len() - 1], primary)).abs();
    for v in variants {
        err = err.max((value - fit_limit(ns, ds, v)).abs());
    }
    (value.min(last), err)
}

/// Smallest `n` used and number of basis functions.
type Fit = (usize, usize);

fn fit_limit(ns: &[usize], ds: &[f64], (lo, basis): Fit) -> f64 {
    let start = ns.iter().position(|&n| n >= lo).unwrap_or(0);
    let (ns, ds) = (&ns[start..], &ds[start..]);
    let basis = basis.min(ns.len().saturating_sub(1)).max(1);
    let mut a = DMatrix::<f64>::zeros(ns.len(), basis);
    let mut y = DVector::<f64>::zeros(ns.len());
    for (row, (&n, &d)) in ns.iter().zip(ds).enumerate() {
        let nf = n as f64;
        let ln = nf.ln();
        let cols = [1.0, ln / nf, 1.0 / nf, 1.0 / (nf * nf), ln / (nf * nf)];
        for c in 0..basis {
            a[(row, c)] = cols[c];
        }
        y[row] = d.ln();
    }
    match a.svd(true, true).solve(&y, 1e-14) {
        Ok(coef) => coef[0].exp(),
        Err(_) => *ds.last().expect("nonempty"),
    }
}

struct Config<'a> {
    set: &'a BoundedSet1D,
    /// Parameters in increasing order within each piece, pieces in order.
    t: Vec<f64>,
    piece: Vec<usize>,
    periodic: bool,
}

impl<'a> Config<'a> {
    /// Chebyshev-Lobatto positions on each piece (equispaced on a full circle).
    fn placed(set: &'a BoundedSet1D, counts: &[usize]) -> Self {
        let periodic = set.is_full_circle();
        let mut t = Vec::new();
        let mut piece = Vec::new();
        for (p, (&(a, b), &c)) in set.pieces().iter().zip(counts).enumerate() {
            for k in 0..c {
                let x = if periodic {
                    a + TAU * k as f64 / c as f64
                } else if c == 1 {
                    0.5 * (a + b)
                } else {
                    a + (b - a) * 0.5 * (1.0 - (PI * k as f64 / (c - 1) as f64).cos())
                };
                t.push(x);
                piece.push(p);
            }
        }
        Self { set, t, piece, periodic }
    }

    /// Maximises over positions with the apportionment fixed; returns the
    /// parameter-space objective.
    fn optimise(&mut self, opts: &FeketeOptions) -> f64 {
        for _ in 0..opts.golden_sweeps {
            self.golden_sweep();
        }
        self.newton(opts.max_newton_steps);
        self.objective()
    }

    fn ld(&self, s: f64, u: f64) -> f64 {
        param_log_distance(self.set.ambient(), s, u)
    }

    fn score(&self, i: usize, x: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &tj) in self.t.iter().enumerate() {
            if j != i {
                acc += self.ld(x, tj);
            }
        }
        acc
    }

    fn objective(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.t.len() {
            for j in i + 1..self.t.len() {
                acc += self.ld(self.t[i], self.t[j]);
            }
        }
        acc
    }

    /// Open bracket of admissible positions for point `i`: its neighbours on
    /// the same piece, or the piece ends.
    fn bracket(&self, i: usize) -> (f64, f64) {
        let p = self.piece[i];
        let (a, b) = self.set.pieces()[p];
        if self.periodic {
            let n = self.t.len();
            let prev = if i == 0 { self.t[n - 1] - TAU } else { self.t[i - 1] };
            let next = if i + 1 == n { self.t[0] + TAU } else { self.t[i + 1] };
            return (prev, next);
        }
        let lo = if i > 0 && self.piece[i - 1] == p { self.t[i - 1] } else { a };
        let hi = if i + 1 < self.t.len() && self.piece[i + 1] == p { self.t[i + 1] } else { b };
        (lo, hi)
    }

    /// Per-point golden-section maximisation inside the bracket.
    fn golden_sweep(&mut self) {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        for i in 0..self.t.len() {
            let (mut lo, mut hi) = self.bracket(i);
            if hi <= lo {
                continue;
            }
            let mut x1 = hi - INV_PHI * (hi - lo);
            let mut x2 = lo + INV_PHI * (hi - lo);
            let mut f1 = self.score(i, x1);
            let mut f2 = self.score(i, x2);
            for _ in 0..80 {
                if f1 < f2 {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + INV_PHI * (hi - lo);
                    f2 = self.score(i, x2);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - INV_PHI * (hi - lo);
                    f1 = self.score(i, x1);
                }
                if hi - lo < 1e-15 * (1.0 + hi.abs()) {
                    break;
                }
            }
            let (x, f) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
            let keep = self.score(i, self.t[i]);
            // Bracket ends are admissible when they are piece ends.
            let mut cands = vec![(x, f)];
            let (a, b) = self.set.pieces()[self.piece[i]];
            if !self.periodic {
                let (blo, bhi) = self.bracket(i);
                if blo == a {
                    cands.push((a, self.score(i, a)));
                }
                if bhi == b {
                    cands.push((b, self.score(i, b)));
                }
            }
            for (cx, cf) in cands {
                if cf > keep && cf > self.score(i, self.t[i]) {
                    self.t[i] = cx;
                }
            }
        }
    }

    fn gradient_hessian(&self) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.t.len();
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        let circle = self.set.ambient() == Ambient::Circle;
        for i in 0..n {
            for j in i + 1..n {
                let u = self.t[i] - self.t[j];
                let (d1, d2) = if circle {
                    let half = 0.5 * u;
                    let s = half.sin();
                    (0.5 * half.cos() / s, 0.25 / (s * s))
                } else {
                    (1.0 / u, 1.0 / (u * u))
                };
                g[i] += d1;
                g[j] -= d1;
                h[(i, i)] -= d2;
                h[(j, j)] -= d2;
                h[(i, j)] += d2;
                h[(j, i)] += d2;
            }
        }
        (g, h)
    }

    fn feasible(&self, t: &[f64]) -> bool {
        let n = t.len();
        for i in 0..n {
            let (a, b) = self.set.pieces()[self.piece[i]];
            if !self.periodic && (t[i] < a || t[i] > b) {
                return false;
            }
            if i + 1 < n && self.piece[i + 1] == self.piece[i] && t[i + 1] <= t[i] {
                return false;
            }
        }
        if self.periodic && n > 1 && t[n - 1] >= t[0] + TAU {
            return false;
        }
        true
    }

    /// Projected Newton ascent. With the ordering fixed the log-product is
    /// concave, so this converges to the maximiser for the current
    /// apportionment of points among pieces.
    fn newton(&mut self, max_steps: usize) {
        let n = self.t.len();
        let mut f = self.objective();
        for _ in 0..max_steps {
            let (g, h) = self.gradient_hessian();
            let free: Vec<usize> = (0..n)
                .filter(|&i| {
                    if self.periodic {
                        return i != 0;
                    }
                    let (a, b) = self.set.pieces()[self.piece[i]];
                    !((self.t[i] <= a && g[i] <= 0.0) || (self.t[i] >= b && g[i] >= 0.0))
                })
                .collect();
            if free.is_empty() {
                break;
            }
            let m = free.len();
            let mut neg_h = DMatrix::zeros(m, m);
            let mut rhs = DVector::zeros(m);
            for (r, &i) in free.iter().enumerate() {
                rhs[r] = g[i];
                for (c, &j) in free.iter().enumerate() {
                    neg_h[(r, c)] = -h[(i, j)];
                }
            }
            let ridge = 1e-13 * (0..m).map(|r| neg_h[(r, r)]).fold(0.0, f64::max);
            for r in 0..m {
                neg_h[(r, r)] += ridge;
            }
            let dir = match neg_h.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => rhs.clone(),
            };
            let mut alpha = 1.0;
            let mut accepted = false;
            // Near the optimum the gain drops below rounding, so accept steps
            // that lose at most a rounding-level amount.
            let slack = 1e-13 * (1.0 + f.abs());
            for _ in 0..60 {
                let mut trial = self.t.clone();
                for (r, &i) in free.iter().enumerate() {
                    let mut x = self.t[i] + alpha * dir[r];
                    if !self.periodic {
                        let (a, b) = self.set.pieces()[self.piece[i]];
                        x = x.clamp(a, b);
                    }
                    trial[i] = x;
                }
                if self.feasible(&trial) {
                    let saved = std::mem::replace(&mut self.t, trial);
                    let f_new = self.objective();
                    if f_new >= f - slack {
                        let moved = saved.iter().zip(&self.t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                        f = f.max(f_new);
                        accepted = true;
                        let scale = 1.0 + self.t.iter().map(|x| x.abs()).fold(0.0, f64::max);
                        if moved <= 1e-14 * scale {
                            return;
                        }
                        break;
                    }
                    self.t = saved;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }

    fn finish(self) -> FeketeResult {
        let n = self.t.len();
        let pairs = (n * (n - 1) / 2) as f64;
        let log_v = self.objective() + pairs * self.set.frame().factor.norm().ln();
        let points = self.t.iter().map(|&x| self.set.point_at(x)).collect();
        let diameter_estimate = if log_v == f64::NEG_INFINITY { 0.0 } else { (log_v / pairs).exp() };
        FeketeResult {
            n,
            points,
            params: self.t,
            v_n: log_v.exp(),
            log_v_n: log_v,
            diameter_estimate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vandermonde_examples() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert_eq!(vandermonde_product(&[c(0.0), c(1.0)]).unwrap(), 1.0);
        assert_eq!(vandermonde_product(&[c(0.0), c(1.0), c(1.0)]).unwrap(), 0.0);
        assert!((vandermonde_product(&[c(0.0), c(0.5), c(1.0)]).unwrap() - 0.25).abs() < 1e-15);
        assert!(vandermonde_product(&[c(0.0)]).is_err());
    }

    #[test]
    fn two_points_on_segment_are_endpoints() {
        let s = BoundedSet1D::interval(0.0, 1.0).unwrap();
        let r = fekete_points(&s, 2).unwrap();
        assert_eq!(r.params, vec![0.0, 1.0]);
        assert!((r.v_n - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_set_is_rejected() {
        assert!(fekete_points(&BoundedSet1D::empty(Ambient::Line), 3).is_err());
    }

    #[test]
    fn single_point_has_zero_product() {
        let s = BoundedSet1D::point(Complex64::new(0.3, 0.1));
        let r = fekete_points(&s, 5).unwrap();
        assert_eq!(r.v_n, 0.0);
        assert_eq!(r.diameter_estimate, 0.0);
        let est = transfinite_diameter(&s, 6).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.robin_constant.is_infinite());
    }

    #[test]
    fn three_points_on_segment() {
        let s = BoundedSet1D::interval(0.0, 1.0).unwrap();
        let r = fekete_points(&s, 3).unwrap();
        for (x, want) in r.params.iter().zip([0.0, 0.5, 1.0]) {
            assert!((x - want).abs() < 1e-12, "{:?}", r.params);
        }
        assert!((r.v_n - 0.25).abs() < 1e-12);
    }

    /// Zeros of `(1 - x^2) P'_{n-1}(x)` mapped to `[0, 1]`.
    fn lobatto_nodes(n: usize) -> Vec<f64> {
        let m = n - 1;
        let legendre = |x: f64| {
            // (P_m, P'_m, P''_m) by recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..m {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            let d1 = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let d2 = (2.0 * x * d1 - (m * (m + 1)) as f64 * p1) / (1.0 - x * x);
            (p1, d1, d2)
        };
        let mut out = vec![0.0];
        for j in 1..m {
            let mut x = -(PI * j as f64 / m as f64).cos();
            for _ in 0..100 {
                let (_, d1, d2) = legendre(x);
                x -= d1 / d2;
            }
            out.push(0.5 * (x + 1.0));
        }
        out.push(1.0);
        out
    }

    #[test]
    fn segment_points_are_lobatto_nodes() {
        let s = BoundedSet1D::interval(0.0, 1.0).unwrap();
        for n in [5, 9, 16] {
            let r = fekete_points(&s, n).unwrap();
            for (x, want) in r.params.iter().zip(lobatto_nodes(n)) {
                assert!((x - want).abs() < 1e-9, "n={n}: {x} vs {want}");
            }
        }
    }

    #[test]
    fn circle_points_are_equally_spaced() {
        // Equally spaced n-th roots of unity have product n^{n/2}.
        for n in [4, 7, 12] {
            let r = fekete_points(&BoundedSet1D::full_circle(), n).unwrap();
            let want = 0.5 * n as f64 * (n as f64).ln();
            assert!((r.log_v_n - want).abs() < 1e-9, "n={n}");
        }
        let r = fekete_points(&BoundedSet1D::full_circle(), 4).unwrap();
        assert!((r.diameter_estimate - 16f64.powf(1.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn product_matches_returned_points() {
        let s = BoundedSet1D::intervals(&[(0.0, 1.0), (1.5, 2.0)]).unwrap().rotated(0.4);
        let r = fekete_points(&s, 9).unwrap();
        let direct = log_vandermonde(&r.points).unwrap();
        assert!((direct - r.log_v_n).abs() < 1e-9);
    }

    #[test]
    fn extrapolation_of_exact_model() {
        // log d_n = log(0.3) + 2 ln n / n exactly: the fit must recover 0.3.
        let ns: Vec<usize> = (4..=40).collect();
        let ds: Vec<f64> = ns.iter().map(|&n| 0.3 * (2.0 * (n as f64).ln() / n as f64).exp()).collect();
        let (v, e) = extrapolate_diameters(&ns, &ds, true);
        assert!((v - 0.3).abs() < 1e-9, "{v}");
        assert!(e < 1e-9);
    }
}
