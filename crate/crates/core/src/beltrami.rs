//! Quasiconformal maps from the Beltrami equation `h_{zbar} = mu h_z`, and
//! the Riemann-Hilbert problem for its regular solutions.
//!
//! `mu` lives on a square lattice over `[-L, L]^2` and vanishes outside the
//! closed unit disk. The normalised solution is `h = z + T[omega]`, `T` the
//! Cauchy transform, where `omega = mu (1 + S omega)` is found by Neumann
//! iteration with the Beurling transform `S` applied as the Fourier
//! multiplier `conj(xi)/xi` on the periodic lattice.
//!
//! [`disk_normalize`] composes `h` with the Riemann map of `h(D)` (Theodorsen
//! iteration), and [`rh_beltrami`] transports the boundary data through the
//! resulting self-map `H` of the disk and solves the analytic problem there,
//! so that `f = F o H`.

use crate::error::{domain, Error, Result};
use crate::fft::{Plan1d, Plan2d};
use crate::harmonic::BoundaryFunction;
use crate::rh::{audit_solution, rh_solve, ResidualReport, RhOptions, RhSolution, UnimodularBV};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

pub const DEFAULT_EXTENT: f64 = 4.0;
pub const DEFAULT_LATTICE: usize = 512;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Nodes `-L + h (col + i row)`, `h = 2L/n`, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lattice {
    pub n: usize,
    pub extent: f64,
}

impl Lattice {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return domain(format!("lattice side {n}: need a power of two >= 16"));
        }
        if !(extent > 1.0) || !extent.is_finite() {
            return domain("the lattice must contain the closed unit disk");
        }
        Ok(Self { n, extent })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, index: usize) -> Complex64 {
        let (row, col) = (index / self.n, index % self.n);
        let h = self.step();
        Complex64::new(-self.extent + h * col as f64, -self.extent + h * row as f64)
    }

    /// Index of the node at `z`, if `z` is (to rounding) a node.
    pub fn index_of(&self, z: Complex64) -> Option<usize> {
        let h = self.step();
        let c = (z.re + self.extent) / h;
        let r = (z.im + self.extent) / h;
        let (ci, ri) = (c.round(), r.round());
        if (c - ci).abs() > 1e-9 || (r - ri).abs() > 1e-9 || ci < 0.0 || ri < 0.0 {
            return None;
        }
        let (ci, ri) = (ci as usize, ri as usize);
        (ci < self.n && ri < self.n).then_some(ri * self.n + ci)
    }

    /// Signed wavenumbers `(xi_x, xi_y)` of the transform bin `index`.
    fn wavenumber(&self, index: usize) -> (f64, f64) {
        let n = self.n as i64;
        let fold = |k: i64| if k < n / 2 { k } else { k - n };
        let (row, col) = ((index / self.n) as i64, (index % self.n) as i64);
        let unit = PI / self.extent;
        (unit * fold(col) as f64, unit * fold(row) as f64)
    }
}

/// Built-in coefficients, all supported in the closed unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuBuiltin {
    Zero,
    /// `k z / zbar`, whose normalised solution is `z |z|^{2k/(1-k)}` in the
    /// disk and `z` outside.
    Radial(f64),
    /// Constant `k`; the solution is `z + k zbar` in the disk, `z + k/z`
    /// outside.
    Constant(f64),
}

impl std::str::FromStr for MuBuiltin {
    type Err = Error;

    /// `zero`, `radial:<k>` or `const:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("unknown coefficient '{s}'"));
        match s.split_once(':') {
            None if s == "zero" => Ok(Self::Zero),
            Some(("radial", k)) => k.parse().map(Self::Radial).map_err(|_| bad()),
            Some(("const", k)) => k.parse().map(Self::Constant).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl MuBuiltin {
    pub fn eval(self, z: Complex64) -> Complex64 {
        match self {
            Self::Zero => ZERO,
            Self::Radial(k) if z == ZERO => Complex64::new(0.0 * k, 0.0),
            Self::Radial(k) => k * z / z.conj(),
            Self::Constant(k) => Complex64::new(k, 0.0),
        }
    }

    /// Closed-form normalised solution, where one is known.
    pub fn exact_solution(self, z: Complex64) -> Complex64 {
        let inside = z.norm() <= 1.0;
        match self {
            Self::Zero => z,
            Self::Radial(k) if inside => z * z.norm().powf(2.0 * k / (1.0 - k)),
            Self::Constant(k) if inside => (z + k * z.conj()) / (1.0 + k),
            Self::Constant(k) => (z + k / z) / (1.0 + k),
            Self::Radial(_) => z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeltramiCoefficient {
    pub lattice: Lattice,
    pub mu: Vec<Complex64>,
    pub k_bound: f64,
}

impl BeltramiCoefficient {
    pub fn new(lattice: Lattice, mu: Vec<Complex64>) -> Result<Self> {
        if mu.len() != lattice.len() {
            return domain(format!("{} samples for a {}^2 lattice", mu.len(), lattice.n));
        }
        let mut k_bound = 0.0f64;
        for (i, m) in mu.iter().enumerate() {
            if !m.re.is_finite() || !m.im.is_finite() {
                return domain("mu must be finite");
            }
            if *m != ZERO && lattice.point(i).norm() > 1.0 {
                return domain("mu must vanish outside the unit disk");
            }
            k_bound = k_bound.max(m.norm());
        }
        if k_bound >= 1.0 {
            return domain(format!("|mu| reaches {k_bound}; the equation must be nondegenerate"));
        }
        Ok(Self { lattice, mu, k_bound })
    }

    /// Samples `f` at the nodes of the closed unit disk, zero elsewhere.
    pub fn from_fn(lattice: Lattice, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        let mu = (0..lattice.len())
            .map(|i| {
                let z = lattice.point(i);
                if z.norm() <= 1.0 {
                    f(z)
                } else {
                    ZERO
                }
            })
            .collect();
        Self::new(lattice, mu)
    }

    pub fn builtin(lattice: Lattice, mu: MuBuiltin) -> Result<Self> {
        Self::from_fn(lattice, |z| mu.eval(z))
    }
}

/// `K_mu = (1 + |mu|)/(1 - |mu|)` at every node.
pub fn distortion_quotient(mu: &BeltramiCoefficient) -> Vec<f64> {
    mu.mu.iter().map(|m| (1.0 + m.norm()) / (1.0 - m.norm())).collect()
}

/// `-(1/pi) int_cell dA / (zeta - z)` over the square cell of side `h`
/// centred at `z + w`. Exact (edge integrals) within four cells, midpoint
/// rule beyond, where the square's vanishing second moments make it
/// fourth-order accurate.
fn cell_cauchy(w: Complex64, h: f64) -> Complex64 {
    if w.norm() > 4.0 * h {
        return -h * h / (PI * w);
    }
    let a = 0.5 * h;
    let corners = [
        w + Complex64::new(-a, -a),
        w + Complex64::new(a, -a),
        w + Complex64::new(a, a),
        w + Complex64::new(-a, a),
    ];
    // int dA / w = (1/2i) oint conj(w)/w dw.
    let mut total = ZERO;
    for k in 0..4 {
        let (wa, wb) = (corners[k], corners[(k + 1) % 4]);
        let e = wb - wa;
        let u = e / e.norm();
        let q = (u.conj() * wa).im;
        let pa = (u.conj() * wa).re;
        let pb = pa + e.norm();
        let anti = |p: f64| {
            if q == 0.0 {
                Complex64::new(p, 0.0)
            } else {
                Complex64::new(p - 2.0 * q * (p / q).atan(), -q * (p * p + q * q).ln())
            }
        };
        total += u.conj() * (anti(pb) - anti(pa));
    }
    -(total / Complex64::new(0.0, 2.0)) / PI
}

/// Cauchy transform of the cell-constant density `omega` at the nodes, by
/// zero-padded convolution.
fn cauchy_on_lattice(lattice: &Lattice, omega: &[Complex64]) -> Vec<Complex64> {
    let n = lattice.n;
    let big = 2 * n;
    let h = lattice.step();
    let plan = Plan2d::new(big);
    let mut kernel = vec![ZERO; big * big];
    for r in 0..big {
        for c in 0..big {
            let dr = if r < n { r as f64 } else { r as f64 - big as f64 };
            let dc = if c < n { c as f64 } else { c as f64 - big as f64 };
            // out_i = sum_j omega_j K(z_j - z_i) = (omega * G)_i, G(d) = K(-d).
            kernel[r * big + c] = cell_cauchy(Complex64::new(-dc * h, -dr * h), h);
        }
    }
    let mut data = vec![ZERO; big * big];
    for r in 0..n {
        data[r * big..r * big + n].copy_from_slice(&omega[r * n..(r + 1) * n]);
    }
    plan.forward(&mut kernel);
    plan.forward(&mut data);
    for (d, k) in data.iter_mut().zip(&kernel) {
        *d *= k;
    }
    plan.inverse(&mut data);
    (0..n * n).map(|i| data[(i / n) * big + i % n]).collect()
}

/// Beurling transform as the multiplier `conj(xi)/xi` on the periodic
/// lattice (the zero mode is dropped).
struct Beurling {
    plan: Plan2d,
    symbol: Vec<Complex64>,
}

impl Beurling {
    fn new(lattice: &Lattice) -> Self {
        let symbol = (0..lattice.len())
            .map(|i| {
                let (x, y) = lattice.wavenumber(i);
                let xi = Complex64::new(x, y);
                if xi == ZERO {
                    ZERO
                } else {
                    xi.conj() / xi
                }
            })
            .collect();
        Self { plan: Plan2d::new(lattice.n), symbol }
    }

    fn apply(&self, data: &mut [Complex64]) {
        self.plan.forward(data);
        for (d, s) in data.iter_mut().zip(&self.symbol) {
            *d *= s;
        }
        self.plan.inverse(data);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QcOptions {
    /// Stop when successive `omega` differ by less than this in lattice `L^2`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for QcOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 500 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanarQcMap {
    pub lattice: Lattice,
    /// Normalised `h` at the nodes: `h(0) = 0`, `h(1) = 1`.
    pub h: Vec<Complex64>,
    pub h_z: Vec<Complex64>,
    pub h_zbar: Vec<Complex64>,
    /// Lattice `L^2` norms of successive `omega` differences.
    pub increments: Vec<f64>,
    /// Largest ratio of successive increments above the rounding floor.
    pub contraction: f64,
    #[serde(skip)]
    omega: Vec<Complex64>,
    #[serde(skip)]
    support: Vec<usize>,
    /// Raw `h(0)` and `h(1) - h(0)` removed by the normalisation.
    shift: Complex64,
    scale: Complex64,
}

pub fn solve_qc(mu: &BeltramiCoefficient, opts: &QcOptions) -> Result<PlanarQcMap> {
    let lattice = mu.lattice;
    let h = lattice.step();
    let beurling = Beurling::new(&lattice);
    let norm = |v: &[Complex64]| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * h * h).sqrt();
    let mut omega = mu.mu.clone();
    let mut increments = Vec::new();
    let mut s_omega = omega.clone();
    let mut converged = mu.k_bound == 0.0;
    while !converged {
        if increments.len() >= opts.max_iterations {
            return Err(Error::NonContraction(format!(
                "no convergence after {} iterations (last increment {:.3e})",
                opts.max_iterations,
                increments.last().copied().unwrap_or(f64::NAN)
            )));
        }
        s_omega.copy_from_slice(&omega);
        beurling.apply(&mut s_omega);
        let next: Vec<Complex64> = mu.mu.iter().zip(&s_omega).map(|(m, s)| m * (1.0 + s)).collect();
        let diff: Vec<Complex64> = next.iter().zip(&omega).map(|(a, b)| a - b).collect();
        let inc = norm(&diff);
        if !inc.is_finite() || (increments.len() >= 3 && inc > 2.0 * increments[increments.len() - 3]) {
            return Err(Error::NonContraction(format!("increments grow: {inc:.3e}")));
        }
        increments.push(inc);
        omega = next;
        converged = inc < opts.tol;
    }
    let floor = 1e3 * f64::EPSILON * norm(&mu.mu).max(1.0);
    let contraction = increments
        .windows(2)
        .filter(|w| w[1] > floor)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);

    s_omega.copy_from_slice(&omega);
    beurling.apply(&mut s_omega);
    let t = cauchy_on_lattice(&lattice, &omega);
    let raw: Vec<Complex64> = (0..lattice.len()).map(|i| lattice.point(i) + t[i]).collect();
    let origin = lattice.index_of(ZERO).expect("the origin is a node");
    let one = lattice.index_of(Complex64::new(1.0, 0.0));
    let shift = raw[origin];
    let scale = match one {
        Some(i) => raw[i] - shift,
        None => {
            let support: Vec<usize> = (0..lattice.len()).filter(|&i| omega[i] != ZERO).collect();
            raw_eval(&lattice, &omega, &support, Complex64::new(1.0, 0.0)) - shift
        }
    };
    let support = (0..lattice.len()).filter(|&i| omega[i] != ZERO).collect();
    Ok(PlanarQcMap {
        lattice,
        h: raw.iter().map(|w| (w - shift) / scale).collect(),
        h_z: s_omega.iter().map(|s| (1.0 + s) / scale).collect(),
        h_zbar: omega.iter().map(|w| w / scale).collect(),
        increments,
        contraction,
        omega,
        support,
        shift,
        scale,
    })
}

fn raw_eval(lattice: &Lattice, omega: &[Complex64], support: &[usize], z: Complex64) -> Complex64 {
    let h = lattice.step();
    z + support.iter().map(|&j| omega[j] * cell_cauchy(lattice.point(j) - z, h)).sum::<Complex64>()
}

impl PlanarQcMap {
    /// `h(z)` anywhere, by direct quadrature of the Cauchy transform.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (raw_eval(&self.lattice, &self.omega, &self.support, z) - self.shift) / self.scale
    }

    /// `max |h_zbar - mu h_z|` over the lattice.
    pub fn equation_residual(&self, mu: &BeltramiCoefficient) -> f64 {
        (0..self.lattice.len())
            .map(|i| (self.h_zbar[i] - mu.mu[i] * self.h_z[i]).norm())
            .fold(0.0, f64::max)
    }

    /// `|h_z|^2 - |h_zbar|^2` at the nodes.
    pub fn jacobian(&self) -> Vec<f64> {
        self.h_z.iter().zip(&self.h_zbar).map(|(a, b)| a.norm_sqr() - b.norm_sqr()).collect()
    }
}

/// Riemann map `F` of the unit disk onto the domain bounded by a curve that
/// is star-shaped about `0`, with `F(0) = 0` and `F(1)` the curve's first
/// sample, from Theodorsen's iteration for the boundary correspondence.
#[derive(Debug, Clone, Serialize)]
pub struct DiskMap {
    /// `F(e^{i t_j}) = rho_j e^{i theta_j}`, `t_j = 2 pi j / m`.
    pub theta: Vec<f64>,
    pub log_rho: Vec<f64>,
    /// Taylor coefficients of `F`.
    pub taylor: Vec<Complex64>,
    pub iterations: usize,
    /// Largest coefficient of a negative power in the boundary values of `F`.
    pub negative_leakage: f64,
    /// Curve parameter angles and their unwrapped arguments.
    #[serde(skip)]
    curve_param: Vec<f64>,
    #[serde(skip)]
    curve_arg: Vec<f64>,
    #[serde(skip)]
    curve_log_r: Vec<f64>,
}

/// Periodic cubic (four-point Lagrange) interpolation in an increasing
/// table whose abscissae span one period starting at `xs[0]`; `ys` gains
/// `y_period` per period.
fn interp_periodic(xs: &[f64], ys: &[f64], y_period: f64, x: f64) -> f64 {
    let m = xs.len() as i64;
    let x = xs[0] + (x - xs[0]).rem_euclid(TAU);
    let k = xs.partition_point(|&v| v <= x) as i64 - 1;
    let node = |i: i64| {
        let wraps = i.div_euclid(m);
        let j = i.rem_euclid(m) as usize;
        (xs[j] + TAU * wraps as f64, ys[j] + y_period * wraps as f64)
    };
    let pts = [node(k - 1), node(k), node(k + 1), node(k + 2)];
    let mut out = 0.0;
    for (a, &(xa, ya)) in pts.iter().enumerate() {
        let mut w = 1.0;
        for (b, &(xb, _)) in pts.iter().enumerate() {
            if a != b {
                w *= (x - xb) / (xa - xb);
            }
        }
        out += w * ya;
    }
    out
}

impl DiskMap {
    /// `samples[i]` is the curve point with parameter `2 pi i / m`.
    pub fn from_boundary(samples: &[Complex64]) -> Result<Self> {
        let m = samples.len();
        if m < 8 || !m.is_power_of_two() {
            return domain("need a power-of-two number (>= 8) of curve samples");
        }
        if samples.iter().any(|w| !(w.norm() > 0.0) || !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::BadCurve("curve passes through or near the origin".into()));
        }
        let mut arg = Vec::with_capacity(m);
        arg.push(samples[0].arg());
        for i in 1..m {
            let d = (samples[i] / samples[i - 1]).arg();
            if !(d > 0.0) {
                return Err(Error::BadCurve(format!("argument does not increase at sample {i}")));
            }
            arg.push(arg[i - 1] + d);
        }
        let close = (samples[0] / samples[m - 1]).arg();
        if !(close > 0.0) || ((arg[m - 1] + close - arg[0]) - TAU).abs() > 1e-9 {
            return Err(Error::BadCurve("curve does not wind once around the origin".into()));
        }
        let log_r: Vec<f64> = samples.iter().map(|w| w.norm().ln()).collect();
        let param: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();

        let t = param.clone();
        let mut theta: Vec<f64> = t.iter().map(|x| x + arg[0]).collect();
        let plan = Plan1d::new(m);
        let mut iterations = 0;
        let mut log_rho = vec![0.0; m];
        loop {
            for j in 0..m {
                log_rho[j] = interp_periodic(&arg, &log_r, 0.0, theta[j]);
            }
            let conj = periodic_conjugate(&plan, &log_rho);
            let next: Vec<f64> = (0..m).map(|j| t[j] + arg[0] + conj[j] - conj[0]).collect();
            let change = next.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            theta = next;
            iterations += 1;
            if change < 1e-13 {
                break;
            }
            if iterations >= 1000 || !change.is_finite() {
                return Err(Error::BadCurve(format!(
                    "boundary correspondence did not converge (last change {change:.3e})"
                )));
            }
        }
        for j in 0..m {
            log_rho[j] = interp_periodic(&arg, &log_r, 0.0, theta[j]);
        }
        let boundary: Vec<Complex64> =
            (0..m).map(|j| Complex64::from_polar(log_rho[j].exp(), theta[j])).collect();
        let mut coeffs = boundary;
        plan.forward(&mut coeffs);
        coeffs.iter_mut().for_each(|c| *c /= m as f64);
        let negative_leakage = coeffs[m / 2 + 1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let taylor = coeffs[..m / 2].to_vec();
        Ok(Self {
            theta,
            log_rho,
            taylor,
            iterations,
            negative_leakage,
            curve_param: param,
            curve_arg: arg,
            curve_log_r: log_r,
        })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.taylor.iter().rev().fold(ZERO, |acc, c| acc * w + c)
    }

    fn eval_with_derivative(&self, w: Complex64) -> (Complex64, Complex64) {
        let mut f = ZERO;
        let mut d = ZERO;
        for c in self.taylor.iter().rev() {
            d = d * w + f;
            f = f * w + c;
        }
        (f, d)
    }

    /// `F^{-1}(p)` for `p` inside the curve, by damped Newton iteration
    /// started from the radial guess `(|p| / rho(arg p)) e^{i t(arg p)}`.
    pub fn invert(&self, p: Complex64) -> Result<Complex64> {
        if p == ZERO {
            return Ok(ZERO);
        }
        let m = self.theta.len();
        let arg = p.arg();
        let radius = (p.norm().ln() - self.curve_log_radius(arg)).exp().min(0.999);
        let mut w = Complex64::from_polar(radius, interp_periodic(&self.theta, &uniform(m), TAU, arg));
        let tol = 1e-13 * (1.0 + p.norm());
        for _ in 0..100 {
            let (f, d) = self.eval_with_derivative(w);
            if (f - p).norm() < tol {
                return Ok(w);
            }
            let step = (f - p) / d;
            let mut damp = 1.0;
            let mut next = w - step;
            while (next.norm() >= 1.0 || (self.eval(next) - p).norm() > (f - p).norm()) && damp > 1e-6 {
                damp *= 0.5;
                next = w - step * damp;
            }
            if (next - w).norm() < 1e-15 {
                return Ok(next);
            }
            w = next;
        }
        domain(format!("inverse Riemann map did not converge at {p}"))
    }

    /// Curve parameter `s` whose point is `F(e^{it})`.
    pub fn curve_parameter(&self, t: f64) -> f64 {
        let m = self.theta.len();
        let theta = interp_periodic(&uniform(m), &self.theta, TAU, t);
        interp_periodic(&self.curve_arg, &self.curve_param, TAU, theta)
    }

    /// Disk angle `t` with `F(e^{it})` the curve point of parameter `s`.
    pub fn disk_angle(&self, s: f64) -> f64 {
        let m = self.theta.len();
        let arg = interp_periodic(&self.curve_param, &self.curve_arg, TAU, s);
        interp_periodic(&self.theta, &uniform(m), TAU, arg)
    }

    /// `log |curve|` at the argument `theta`.
    pub fn curve_log_radius(&self, theta: f64) -> f64 {
        interp_periodic(&self.curve_arg, &self.curve_log_r, 0.0, theta)
    }
}

fn uniform(m: usize) -> Vec<f64> {
    (0..m).map(|j| TAU * j as f64 / m as f64).collect()
}

/// Boundary values of the harmonic conjugate of the trigonometric
/// interpolant of `u` (Nyquist term dropped).
fn periodic_conjugate(plan: &Plan1d, u: &[f64]) -> Vec<f64> {
    let m = u.len();
    let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plan.forward(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let sign = if k == 0 || k == m / 2 {
            0.0
        } else if k < m / 2 {
            -1.0
        } else {
            1.0
        };
        *c *= Complex64::new(0.0, sign);
    }
    plan.inverse(&mut buf);
    buf.iter().map(|c| c.re / m as f64).collect()
}

/// `H = F^{-1} o h`: a quasiconformal self-map of the disk with `H(0) = 0`
/// and `H(1) = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct DiskSelfMap {
    pub qc: PlanarQcMap,
    pub riemann: DiskMap,
}

pub const DEFAULT_BOUNDARY_SAMPLES: usize = 2048;

/// Samples `h` on the unit circle, keeps the Fourier modes `|k| <= bandwidth`
/// of the image curve (modes the lattice cannot resolve are quadrature
/// noise), and builds the Riemann map of the enclosed domain.
pub fn disk_normalize(qc: &PlanarQcMap, boundary_samples: usize, bandwidth: usize) -> Result<DiskSelfMap> {
    let m = boundary_samples;
    let mut curve: Vec<Complex64> = uniform(m).into_iter().map(|t| qc.eval(Complex64::from_polar(1.0, t))).collect();
    if bandwidth < m / 2 {
        let plan = Plan1d::new(m);
        plan.forward(&mut curve);
        for (k, c) in curve.iter_mut().enumerate() {
            if k > bandwidth && k < m - bandwidth {
                *c = ZERO;
            }
        }
        plan.inverse(&mut curve);
        curve.iter_mut().for_each(|c| *c /= m as f64);
        // Keep the normalisation point exactly.
        let s = curve[0];
        curve.iter_mut().for_each(|c| *c /= s);
    }
    Ok(DiskSelfMap { qc: qc.clone(), riemann: DiskMap::from_boundary(&curve)? })
}

/// Boundary modes resolved by the lattice: a quarter of the number of
/// lattice cells along the unit circle.
pub fn resolved_bandwidth(lattice: &Lattice) -> usize {
    ((TAU / lattice.step()) / 4.0).floor() as usize
}

impl DiskSelfMap {
    /// `H(z)` at a lattice node (or anywhere, through quadrature of `h`).
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let p = match self.qc.lattice.index_of(z) {
            Some(i) => self.qc.h[i],
            None => self.qc.eval(z),
        };
        self.riemann.invert(p)
    }

    /// Angle of `H(e^{i phi})`.
    pub fn boundary_angle(&self, phi: f64) -> f64 {
        self.riemann.disk_angle(phi)
    }

    /// Angle of `H^{-1}(e^{it})`.
    pub fn pullback_angle(&self, t: f64) -> f64 {
        self.riemann.curve_parameter(t)
    }

    /// Boundary correspondence `phi_j -> angle of H(e^{i phi_j})` on `m`
    /// uniform angles.
    pub fn correspondence(&self, m: usize) -> Vec<(f64, f64)> {
        uniform(m).into_iter().map(|p| (p, self.boundary_angle(p))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeltramiOptions {
    pub qc: QcOptions,
    pub rh: RhOptions,
    pub boundary_samples: usize,
    /// Fourier cutoff for the image of the unit circle; `None` uses
    /// [`resolved_bandwidth`].
    pub boundary_bandwidth: Option<usize>,
    pub audit_count: usize,
    pub audit_tolerance: f64,
    /// Nodes closer than this many cells to the unit circle or to the origin
    /// are left out of the interior residual.
    pub interior_margin: usize,
}

impl Default for BeltramiOptions {
    fn default() -> Self {
        Self {
            qc: QcOptions::default(),
            rh: RhOptions::default(),
            boundary_samples: DEFAULT_BOUNDARY_SAMPLES,
            boundary_bandwidth: None,
            audit_count: 64,
            audit_tolerance: 1e-2,
            interior_margin: 4,
        }
    }
}

/// Finite-difference check of `f_zbar = mu f_z` at interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeltramiResidual {
    pub nodes: usize,
    /// `||f_zbar - mu f_z|| / ||f_z||` in lattice `L^2`.
    pub relative: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularRhSolution {
    pub map: DiskSelfMap,
    pub analytic: RhSolution,
    /// `lambda o H^{-1}` and `phi o H^{-1}` on the uniform grid.
    pub lambda_transported: UnimodularBV,
    pub phi_transported: BoundaryFunction,
    /// Audit of the transported problem; `pulled_back[k]` is the original
    /// boundary angle of entry `k`.
    pub boundary: ResidualReport,
    pub pulled_back: Vec<f64>,
    pub beltrami: BeltramiResidual,
    /// `f` at the disk nodes used for the residual (node index, value).
    #[serde(skip)]
    pub values: Vec<(usize, Complex64)>,
}

impl RegularRhSolution {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.analytic.eval(self.map.eval(z)?))
    }
}

/// Linear interpolation of a unimodular table through its lifted argument.
fn lambda_at(lambda: &UnimodularBV, alpha: &[f64], winding: i64, x: f64) -> Complex64 {
    let m = lambda.len();
    let pos = x.rem_euclid(TAU) / TAU * m as f64;
    let j = (pos.floor() as usize).min(m - 1);
    let frac = pos - j as f64;
    let a0 = alpha[j];
    let a1 = if j + 1 < m { alpha[j + 1] } else { alpha[0] + TAU * winding as f64 };
    Complex64::from_polar(1.0, a0 + frac * (a1 - a0))
}

fn real_at(samples: &[f64], x: f64) -> f64 {
    let m = samples.len();
    let pos = x.rem_euclid(TAU) / TAU * m as f64;
    let j = (pos.floor() as usize).min(m - 1);
    let frac = pos - j as f64;
    samples[j] + frac * (samples[(j + 1) % m] - samples[j])
}

pub fn rh_beltrami(
    mu: &BeltramiCoefficient,
    lambda: &UnimodularBV,
    phi: &BoundaryFunction,
    opts: &BeltramiOptions,
) -> Result<RegularRhSolution> {
    let m = phi.len();
    if lambda.len() != m {
        return domain(format!("lambda has {} samples, phi has {m}", lambda.len()));
    }
    let qc = solve_qc(mu, &opts.qc)?;
    let bandwidth = opts.boundary_bandwidth.unwrap_or_else(|| resolved_bandwidth(&mu.lattice));
    let map = disk_normalize(&qc, opts.boundary_samples, bandwidth)?;

    let arg = crate::rh::bv_argument(lambda, opts.rh.jump_threshold)?;
    let pulled: Vec<f64> = uniform(m).into_iter().map(|t| map.pullback_angle(t)).collect();
    let lambda_t = UnimodularBV::new(pulled.iter().map(|&s| lambda_at(lambda, &arg.alpha, arg.winding, s)).collect())?;
    // Grid points keep their own samples where the correspondence fixes them.
    let phi_t = BoundaryFunction::new(
        pulled.iter().map(|&s| real_at(phi.samples(), s)).collect(),
        phi.class(),
    )?;
    let analytic = rh_solve(&lambda_t, &phi_t, &opts.rh)?;
    let boundary = audit_solution(
        &analytic,
        &lambda_t,
        &phi_t,
        opts.audit_count,
        opts.audit_tolerance,
        opts.rh.jump_threshold,
    )?;
    let pulled_back = boundary.entries.iter().map(|e| map.pullback_angle(e.theta)).collect();

    // f at the disk nodes whose image stays in the analytic solver's range.
    let lattice = mu.lattice;
    let r_max = analytic.max_radius();
    let mut f = vec![None; lattice.len()];
    let mut values = Vec::new();
    for (i, slot) in f.iter_mut().enumerate() {
        let z = lattice.point(i);
        if z.norm() < 1.0 {
            // Nodes at the rim may land a rounding error outside the image
            // curve; they are beyond the analytic solver's range anyway.
            let w = match map.riemann.invert(qc.h[i]) {
                Ok(w) => w,
                Err(_) if z.norm() > r_max => continue,
                Err(e) => return Err(e),
            };
            if w.norm() <= r_max {
                let v = analytic.eval(w);
                *slot = Some(v);
                values.push((i, v));
            }
        }
    }
    let beltrami = finite_difference_residual(&lattice, &mu.mu, &f, opts.interior_margin);
    Ok(RegularRhSolution {
        map,
        analytic,
        lambda_transported: lambda_t,
        phi_transported: phi_t,
        boundary,
        pulled_back,
        beltrami,
        values,
    })
}

/// Centred differences of `f` at nodes at least `margin` cells inside the
/// disk and away from the origin, with all four neighbours available.
pub fn finite_difference_residual(
    lattice: &Lattice,
    mu: &[Complex64],
    f: &[Option<Complex64>],
    margin: usize,
) -> BeltramiResidual {
    let n = lattice.n;
    let h = lattice.step();
    let gap = margin as f64 * h;
    let (mut num, mut den, mut max_abs, mut nodes) = (0.0, 0.0, 0.0f64, 0);
    for i in 0..lattice.len() {
        let z = lattice.point(i);
        let (row, col) = (i / n, i % n);
        if z.norm() > 1.0 - gap || z.norm() < gap || row == 0 || col == 0 || row + 1 == n || col + 1 == n {
            continue;
        }
        let (Some(e), Some(w), Some(nn), Some(s)) = (f[i + 1], f[i - 1], f[i + n], f[i - n]) else {
            continue;
        };
        let fx = (e - w) / (2.0 * h);
        let fy = (nn - s) / (2.0 * h);
        let fz = 0.5 * (fx - Complex64::i() * fy);
        let fzb = 0.5 * (fx + Complex64::i() * fy);
        let r = (fzb - mu[i] * fz).norm();
        num += r * r;
        den += fz.norm_sqr();
        max_abs = max_abs.max(r);
        nodes += 1;
    }
    BeltramiResidual { nodes, relative: if den > 0.0 { (num / den).sqrt() } else { 0.0 }, max_abs }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Disk nodes with `|h_z|^2 - |h_zbar|^2 > 0`, out of `jacobian_nodes`.
    pub jacobian_positive: usize,
    pub jacobian_nodes: usize,
    pub min_jacobian: f64,
    /// Local minima of `|F'|` on a polar grid below `1e-3 max |F'|`.
    pub derivative_near_zeros: usize,
    /// Image triangles of random lattice cells with positive orientation.
    pub triangles_positive: usize,
    pub triangles: usize,
}

pub fn regularity_audit(sol: &RegularRhSolution, seed: u64) -> Result<RegularityReport> {
    let qc = &sol.map.qc;
    let lattice = qc.lattice;
    let jac = qc.jacobian();
    let disk: Vec<usize> = (0..lattice.len()).filter(|&i| lattice.point(i).norm() < 1.0).collect();
    let jacobian_positive = disk.iter().filter(|&&i| jac[i] > 0.0).count();
    let min_jacobian = disk.iter().map(|&i| jac[i]).fold(f64::INFINITY, f64::min);

    // F' = A (i g' B + B') with A = exp(i g).
    let dg = sol.analytic.g.derivative()?;
    let db = sol.analytic.b.derivative()?;
    let (nr, nt) = (48, 96);
    let r_top = 0.9 * sol.analytic.max_radius();
    let mut grid = vec![0.0; nr * nt];
    for a in 0..nr {
        for b in 0..nt {
            let z = Complex64::from_polar(r_top * (a + 1) as f64 / nr as f64, TAU * b as f64 / nt as f64);
            let fp = sol.analytic.eval_a(z) * (Complex64::i() * dg.eval(z) * sol.analytic.b.eval(z) + db.eval(z));
            grid[a * nt + b] = fp.norm();
        }
    }
    let top = grid.iter().cloned().fold(0.0, f64::max);
    let mut derivative_near_zeros = 0;
    for a in 1..nr - 1 {
        for b in 0..nt {
            let v = grid[a * nt + b];
            let neighbours = [(a - 1, b), (a + 1, b), (a, (b + 1) % nt), (a, (b + nt - 1) % nt)];
            if v < 1e-3 * top && neighbours.iter().all(|&(x, y)| grid[x * nt + y] > v) {
                derivative_near_zeros += 1;
            }
        }
    }

    let n = lattice.n;
    let lookup: std::collections::HashMap<usize, Complex64> = sol.values.iter().cloned().collect();
    let cells: Vec<usize> = sol
        .values
        .iter()
        .map(|&(i, _)| i)
        .filter(|&i| lookup.contains_key(&(i + 1)) && lookup.contains_key(&(i + n)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triangles = cells.len().min(256);
    let mut triangles_positive = 0;
    for _ in 0..triangles {
        let i = cells[rng.gen_range(0..cells.len())];
        let (a, b, c) = (lookup[&i], lookup[&(i + 1)], lookup[&(i + n)]);
        if ((b - a).conj() * (c - a)).im > 0.0 {
            triangles_positive += 1;
        }
    }
    Ok(RegularityReport {
        jacobian_positive,
        jacobian_nodes: disk.len(),
        min_jacobian,
        derivative_near_zeros,
        triangles_positive,
        triangles,
    })
}

/// Relative lattice `L^2` error of `h` against a reference map, over the
/// nodes selected by `keep`.
pub fn relative_l2_error(
    qc: &PlanarQcMap,
    reference: impl Fn(Complex64) -> Complex64,
    keep: impl Fn(Complex64) -> bool,
) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..qc.lattice.len() {
        let z = qc.lattice.point(i);
        if keep(z) {
            let r = reference(z);
            num += (qc.h[i] - r).norm_sqr();
            den += r.norm_sqr();
        }
    }
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Lattice {
        Lattice::new(128, DEFAULT_EXTENT).unwrap()
    }

    #[test]
    fn distortion_examples() {
        let lat = small();
        let zero = BeltramiCoefficient::builtin(lat, MuBuiltin::Zero).unwrap();
        assert!(distortion_quotient(&zero).iter().all(|&k| k == 1.0));
        let third = BeltramiCoefficient::builtin(lat, MuBuiltin::Constant(1.0 / 3.0)).unwrap();
        let k = distortion_quotient(&third);
        let disk = (0..lat.len()).find(|&i| lat.point(i).norm() < 0.5).unwrap();
        assert!((k[disk] - 2.0).abs() < 1e-15);
        let half = BeltramiCoefficient::builtin(lat, MuBuiltin::Radial(0.5)).unwrap();
        let top = distortion_quotient(&half).into_iter().fold(0.0, f64::max);
        assert!((top - 3.0).abs() < 1e-12);
        assert!(BeltramiCoefficient::builtin(lat, MuBuiltin::Constant(1.0)).is_err());
        let outside = BeltramiCoefficient::from_fn(lat, |_| Complex64::new(0.1, 0.0)).unwrap();
        assert!(BeltramiCoefficient::new(lat, vec![Complex64::new(0.1, 0.0); lat.len()]).is_err());
        assert_eq!(outside.k_bound, 0.1);
    }

    #[test]
    fn cell_integral_matches_quadrature() {
        let h = 0.1;
        assert!(cell_cauchy(ZERO, h).norm() < 1e-16);
        for w in [Complex64::new(0.13, 0.02), Complex64::new(-0.05, 0.21), Complex64::new(0.07, -0.08)] {
            // Fine midpoint quadrature of the same cell.
            let k = 400;
            let mut sum = ZERO;
            for a in 0..k {
                for b in 0..k {
                    let p = w + Complex64::new(h * ((a as f64 + 0.5) / k as f64 - 0.5), h * ((b as f64 + 0.5) / k as f64 - 0.5));
                    sum += 1.0 / p;
                }
            }
            let quad = -sum * (h * h / (k * k) as f64) / PI;
            assert!((cell_cauchy(w, h) - quad).norm() < 1e-6 * quad.norm(), "{w}");
        }
        // Exact and midpoint branches agree across the switch.
        let w = Complex64::new(0.41, 0.0);
        assert!((cell_cauchy(w, h) - (-h * h / (PI * w))).norm() < 1e-4 * (h * h / (PI * 0.41)));
    }

    #[test]
    fn beurling_maps_zbar_derivative_to_z_derivative() {
        let lat = small();
        let b = Beurling::new(&lat);
        let gauss = |z: Complex64| (-4.0 * z.norm_sqr()).exp();
        let mut data: Vec<Complex64> = (0..lat.len()).map(|i| -4.0 * lat.point(i) * gauss(lat.point(i))).collect();
        b.apply(&mut data);
        for i in (0..lat.len()).step_by(97) {
            let z = lat.point(i);
            assert!((data[i] - (-4.0 * z.conj() * gauss(z))).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_coefficient_gives_identity() {
        let lat = small();
        let qc = solve_qc(&BeltramiCoefficient::builtin(lat, MuBuiltin::Zero).unwrap(), &QcOptions::default()).unwrap();
        for i in 0..lat.len() {
            assert!((qc.h[i] - lat.point(i)).norm() < 1e-10);
        }
        let map = disk_normalize(&qc, 256, 128).unwrap();
        for z in [Complex64::new(0.3, 0.2), Complex64::new(-0.5, 0.0)] {
            assert!((map.eval(z).unwrap() - z).norm() < 1e-10);
        }
    }

    #[test]
    fn riemann_map_of_scaled_circle_and_ellipse() {
        let m = 512;
        let circle: Vec<Complex64> = uniform(m).iter().map(|&t| Complex64::from_polar(2.0, t)).collect();
        let dm = DiskMap::from_boundary(&circle).unwrap();
        assert!((dm.eval(Complex64::new(0.3, 0.4)) - Complex64::new(0.6, 0.8)).norm() < 1e-12);
        assert!((dm.invert(Complex64::new(1.0, 0.0)).unwrap() - Complex64::new(0.5, 0.0)).norm() < 1e-12);

        // Ellipse as the image of z + 0.3/z on |z| = 1 is the Joukowski
        // image; the map of the disk onto its interior is not elementary, but
        // F must reproduce the curve and fix the normalisation.
        let ellipse: Vec<Complex64> = uniform(m).iter().map(|&t| Complex64::new(1.3 * t.cos(), 0.7 * t.sin())).collect();
        let dm = DiskMap::from_boundary(&ellipse).unwrap();
        assert!(dm.eval(ZERO).norm() < 1e-12);
        assert!((dm.eval(Complex64::new(1.0, 0.0)) - Complex64::new(1.3, 0.0)).norm() < 1e-8, "{}", dm.eval(Complex64::new(1.0, 0.0)));
        for t in [0.4, 2.0, 4.4] {
            let w = dm.eval(Complex64::from_polar(1.0, t));
            let on = (w.re / 1.3).powi(2) + (w.im / 0.7).powi(2);
            assert!((on - 1.0).abs() < 1e-8, "{t}: {on}");
        }
        assert!(dm.negative_leakage < 1e-8);
        let bad: Vec<Complex64> = uniform(m).iter().map(|&t| Complex64::from_polar(1.0, -t)).collect();
        assert!(matches!(DiskMap::from_boundary(&bad), Err(Error::BadCurve(_))));
    }

    #[test]
    fn constant_coefficient_solution() {
        let lat = Lattice::new(256, DEFAULT_EXTENT).unwrap();
        let mu = BeltramiCoefficient::builtin(lat, MuBuiltin::Constant(0.3)).unwrap();
        let qc = solve_qc(&mu, &QcOptions::default()).unwrap();
        let err = relative_l2_error(&qc, |z| MuBuiltin::Constant(0.3).exact_solution(z), |z| z.norm() < 2.0);
        assert!(err < 2e-2, "{err}");
        assert!(qc.contraction <= 0.3 + 0.05);
        assert!(qc.jacobian().iter().all(|&j| j > 0.0));
        // Conformal outside the support.
        let outside = (0..lat.len()).filter(|&i| lat.point(i).norm() > 1.0).all(|i| qc.h_zbar[i] == ZERO);
        assert!(outside);
    }
}
