//! The Riemann-Hilbert problem `Re(conj(lambda) f) = phi` on the unit circle
//! for analytic `f` in the disk, with `lambda` unimodular of bounded
//! variation.
//!
//! The solution is assembled as `f = A B` with `A = exp(i g)`, `g` the
//! Schwarz integral of a lifted argument `alpha` of `lambda`. On the circle
//! `conj(lambda) A = e^{-beta}` with `beta = Im g`, so `B` only needs a real
//! part with boundary values `phi e^{beta}`.

use crate::capacity::{capacity_via_potential, BoundedSet1D, CapacityEstimate};
use crate::error::{domain, Error, Result};
use crate::harmonic::{
    conjugate, gehring_solution, poisson_extend, probe_function, radial_limits, BoundaryFunction, DiskField,
    ProbeResult, Regularity, StolzProbe,
};
use crate::sequence::radical_inverse;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// Samples of `|lambda| = 1` at the angles `2 pi j / M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnimodularBV {
    samples: Vec<Complex64>,
    variation: f64,
}

pub const UNIMODULAR_TOLERANCE: f64 = 1e-10;

impl UnimodularBV {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() < 2 {
            return domain("need at least two samples");
        }
        if let Some(j) = samples.iter().position(|z| !((z.norm() - 1.0).abs() <= UNIMODULAR_TOLERANCE)) {
            return domain(format!("sample {j} has modulus {}", samples[j].norm()));
        }
        let variation = total_variation(&samples);
        Ok(Self { samples, variation })
    }

    /// `lambda(theta) = e^{i a(theta)}` on `m` grid angles.
    pub fn from_angle(m: usize, a: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..m).map(|j| Complex64::from_polar(1.0, a(TAU * j as f64 / m as f64))).collect())
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn variation(&self) -> f64 {
        self.variation
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn nearest(&self, theta: f64) -> Complex64 {
        let m = self.samples.len();
        self.samples[((theta.rem_euclid(TAU) / TAU * m as f64).round() as usize) % m]
    }

    pub fn rotated(&self, c: f64) -> Result<Self> {
        let r = Complex64::from_polar(1.0, c);
        Self::new(self.samples.iter().map(|z| z * r).collect())
    }
}

/// Built-in coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaBuiltin {
    /// `e^{ic}`.
    Constant(f64),
    /// `e^{i k theta}`.
    Winding(i32),
    /// `e^{i (pi/2) sign(theta - pi)}`, with the midpoint value `1` at both
    /// jumps so that no two consecutive samples are antipodal.
    Step,
}

impl LambdaBuiltin {
    pub fn sample(self, m: usize) -> Result<UnimodularBV> {
        match self {
            Self::Constant(c) => UnimodularBV::from_angle(m, |_| c),
            Self::Winding(k) => UnimodularBV::from_angle(m, |t| k as f64 * t),
            Self::Step => UnimodularBV::from_angle(m, |t| {
                if t == 0.0 || t == PI {
                    0.0
                } else {
                    0.5 * PI * (t - PI).signum()
                }
            }),
        }
    }
}

impl std::str::FromStr for LambdaBuiltin {
    type Err = Error;

    /// `const`, `const:<angle>`, `winding`, `winding:<k>` or `step`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
        let bad = || Error::Domain(format!("unknown coefficient '{s}'"));
        match (name, arg) {
            ("const", None) => Ok(Self::Constant(0.0)),
            ("const", Some(a)) => a.parse().map(Self::Constant).map_err(|_| bad()),
            ("winding", None) => Ok(Self::Winding(1)),
            ("winding", Some(k)) => k.parse().map(Self::Winding).map_err(|_| bad()),
            ("step", None) => Ok(Self::Step),
            _ => Err(bad()),
        }
    }
}

/// Cyclic chord sum `sum |lambda_{j+1} - lambda_j|`, wraparound included.
/// Refining the grid never decreases it, so it bounds the variation from
/// below.
pub fn total_variation(samples: &[Complex64]) -> f64 {
    let m = samples.len();
    if m < 2 {
        return 0.0;
    }
    (0..m).map(|j| (samples[(j + 1) % m] - samples[j]).norm()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jump {
    /// The jump sits between samples `index` and `index + 1` (mod `M`).
    pub index: usize,
    /// `|lambda_{j+1} - lambda_j|`.
    pub chord: f64,
    /// Increment of the argument across the jump, in `(-pi, pi)`.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArgumentFunction {
    pub alpha: Vec<f64>,
    pub jumps: Vec<Jump>,
    /// `alpha` with the accumulated jump increments removed.
    pub continuous_part: Vec<f64>,
    /// Non-cyclic variation of `alpha` on `[0, 2 pi)`.
    pub variation: f64,
    /// `(alpha(2 pi^-) + last increment - alpha(0)) / 2 pi`: the winding
    /// number of `lambda`, which appears as the periodic mismatch of `alpha`.
    pub winding: i64,
}

pub const DEFAULT_JUMP_THRESHOLD: f64 = 0.5;

/// Increment `d` in `(-pi, pi)` with `b = a e^{id}`, from the chord of `b`
/// relative to `a`: `d = -2 arctan(Re j / Im j)`, `j = b conj(a) - 1`.
fn increment(a: Complex64, b: Complex64, index: usize, next: usize) -> Result<f64> {
    let j = b * a.conj() - 1.0;
    if (j + 2.0).norm() < 1e-12 {
        return Err(Error::Antipodal { index, next, chord: j.norm() });
    }
    if j.im == 0.0 {
        return Ok(0.0);
    }
    Ok(-2.0 * (j.re / j.im).atan())
}

/// Lifts `lambda = e^{i alpha}` step by step, recording increments whose
/// chord exceeds `jump_threshold` as jumps. `alpha(0) = arg lambda_0` in
/// `(-pi, pi]`.
pub fn bv_argument(lambda: &UnimodularBV, jump_threshold: f64) -> Result<ArgumentFunction> {
    if !(jump_threshold > 0.0 && jump_threshold < 2.0) {
        return domain("jump threshold must lie in (0, 2)");
    }
    let s = &lambda.samples;
    let m = s.len();
    let mut alpha = Vec::with_capacity(m);
    let mut continuous_part = Vec::with_capacity(m);
    let mut jumps = Vec::new();
    let mut variation = 0.0;
    let mut jumped = 0.0;
    alpha.push(s[0].arg());
    continuous_part.push(s[0].arg());
    let mut wrap = 0.0;
    for j in 0..m {
        let next = (j + 1) % m;
        let chord = (s[next] - s[j]).norm();
        // Small steps track the branch directly; the chord formula loses
        // digits there because Re j is only O(d^2).
        let d = if chord > jump_threshold { increment(s[j], s[next], j, next)? } else { (s[next] * s[j].conj()).arg() };
        if chord > jump_threshold {
            jumps.push(Jump { index: j, chord, angle: d });
            if next != 0 {
                jumped += d;
            }
        }
        if next == 0 {
            wrap = d;
        } else {
            let a = alpha[j] + d;
            alpha.push(a);
            continuous_part.push(a - jumped);
            variation += d.abs();
        }
    }
    let winding = ((alpha[m - 1] + wrap - alpha[0]) / TAU).round() as i64;
    Ok(ArgumentFunction { alpha, jumps, continuous_part, variation, winding })
}

/// Analytic `g` with `Re g = Poisson[alpha]` and `Im g(0) = 0`.
pub fn schwarz_analytic(alpha: &[f64]) -> Result<DiskField> {
    poisson_extend(&BoundaryFunction::new(alpha.to_vec(), Regularity::Bv)?).analytic_completion()
}

/// Boundary values of the conjugate of `Poisson[alpha]` from radial probe
/// limits at the grid angles.
#[derive(Debug, Clone, Serialize)]
pub struct BetaTable {
    /// Probe limits; non-converged angles are filled from the nearest
    /// converged neighbour.
    pub beta: Vec<f64>,
    pub converged: Vec<bool>,
    /// Grid indices without a converged limit.
    pub flagged: Vec<usize>,
    /// Capacity of the union of the grid cells around flagged angles.
    pub flagged_capacity: Option<CapacityEstimate>,
}

pub fn conjugate_boundary_data(alpha: &[f64]) -> Result<BetaTable> {
    let u = poisson_extend(&BoundaryFunction::new(alpha.to_vec(), Regularity::Bv)?);
    beta_of(&conjugate(&u)?, alpha.len())
}

fn beta_of(v: &DiskField, m: usize) -> Result<BetaTable> {
    let lim = radial_limits(v, m)?;
    let converged = lim.converged;
    let flagged: Vec<usize> = (0..m).filter(|&j| !converged[j]).collect();
    let raw: Vec<f64> = lim.limits.iter().map(|z| z.re).collect();
    let beta = if flagged.len() == m {
        return domain("no probe converged; the grid is too coarse");
    } else if flagged.is_empty() {
        raw
    } else {
        (0..m)
            .map(|j| {
                (0..m)
                    .flat_map(|d| [(j + d) % m, (j + m - d) % m])
                    .find(|&k| converged[k])
                    .map(|k| raw[k])
                    .expect("some angle converged")
            })
            .collect()
    };
    let flagged_capacity = cells_capacity(&flagged, m)?;
    Ok(BetaTable { beta, converged, flagged, flagged_capacity })
}

/// Capacity of the union of the arcs `[theta_j - h, theta_j + h]`.
fn cells_capacity(indices: &[usize], m: usize) -> Result<Option<CapacityEstimate>> {
    if indices.is_empty() {
        return Ok(None);
    }
    let h = TAU / m as f64;
    let arcs: Vec<(f64, f64)> = indices.iter().map(|&j| (j as f64 * h - h, j as f64 * h + h)).collect();
    let set = BoundedSet1D::arcs(&arcs)?;
    capacity_via_potential(&set, 256).map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhOptions {
    pub jump_threshold: f64,
    /// `phi e^{beta}` is split at `+-clamp`; the bounded part is solved by
    /// the Schwarz integral, the excess by the capacity-a.e. antiderivative
    /// construction.
    pub clamp: f64,
    pub eps: f64,
    pub stages: usize,
}

impl Default for RhOptions {
    fn default() -> Self {
        Self { jump_threshold: DEFAULT_JUMP_THRESHOLD, clamp: f64::INFINITY, eps: 0.05, stages: 5 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RhSolution {
    pub argument: ArgumentFunction,
    /// Schwarz integral of `alpha`; `A = exp(i g)`.
    pub g: DiskField,
    pub b: DiskField,
    /// Boundary values of `Im g`.
    pub beta: BetaTable,
    /// Boundary data of `Re B`.
    pub b_boundary: Vec<f64>,
}

impl RhSolution {
    pub fn eval_a(&self, z: Complex64) -> Complex64 {
        (Complex64::i() * self.g.eval(z)).exp()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_a(z) * self.b.eval(z)
    }

    pub fn order(&self) -> usize {
        self.g.order().min(self.b.order())
    }

    pub fn max_radius(&self) -> f64 {
        self.g.max_radius().min(self.b.max_radius())
    }
}

pub fn rh_solve(lambda: &UnimodularBV, phi: &BoundaryFunction, opts: &RhOptions) -> Result<RhSolution> {
    let m = phi.len();
    if lambda.len() != m {
        return domain(format!("lambda has {} samples, phi has {m}", lambda.len()));
    }
    if !(opts.clamp > 0.0) {
        return domain("clamp must be positive");
    }
    let argument = bv_argument(lambda, opts.jump_threshold)?;
    let g = schwarz_analytic(&argument.alpha)?;
    let beta = beta_of(&conjugate(&poisson_extend(&BoundaryFunction::new(argument.alpha.clone(), Regularity::Bv)?))?, m)?;
    let target: Vec<f64> = phi.samples().iter().zip(&beta.beta).map(|(p, b)| p * b.exp()).collect();
    if target.iter().any(|v| !v.is_finite()) {
        return domain("phi e^beta overflows");
    }
    let bounded: Vec<f64> = target.iter().map(|v| v.clamp(-opts.clamp, opts.clamp)).collect();
    let excess: Vec<f64> = target.iter().zip(&bounded).map(|(t, c)| t - c).collect();
    let mut u = poisson_extend(&BoundaryFunction::new(bounded, Regularity::Measurable)?);
    if excess.iter().any(|&v| v != 0.0) {
        let ex = BoundaryFunction::new(excess, Regularity::Measurable)?;
        u = u.add(&gehring_solution(&ex, opts.eps, opts.stages)?.field)?;
    }
    let b = u.analytic_completion()?;
    Ok(RhSolution { argument, g, b, beta, b_boundary: target })
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub theta: f64,
    pub target: f64,
    pub limit: f64,
    pub error: f64,
    pub converged: bool,
    pub passed: bool,
    /// Successive differences of the extrapolated probe values.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub tolerance: f64,
    pub entries: Vec<AuditEntry>,
    pub passed: usize,
    /// `None` when nothing was audited.
    pub pass_fraction: Option<f64>,
    /// Arcs of one grid cell around each failed angle, merged.
    pub failed_hull: Vec<(f64, f64)>,
    pub failed_capacity: Option<CapacityEstimate>,
}

/// Probes `Re(conj(lambda(zeta)) f(z)) - phi(zeta)` along each probe. An
/// angle passes when the probe converged and the limit is within `tol`.
pub fn verify_boundary(
    f: impl Fn(Complex64) -> Complex64,
    r_max: f64,
    lambda: &UnimodularBV,
    phi: &BoundaryFunction,
    audit: &[StolzProbe],
    tol: f64,
) -> Result<ResidualReport> {
    let mut entries = Vec::with_capacity(audit.len());
    for probe in audit {
        let l = lambda.nearest(probe.zeta).conj();
        let target = phi.nearest(probe.zeta);
        let res: ProbeResult = probe_function(probe, r_max, |z| Complex64::new((l * f(z)).re, 0.0))?;
        let limit = res.limit.re;
        let error = (limit - target).abs();
        entries.push(AuditEntry {
            theta: probe.zeta,
            target,
            limit,
            error,
            converged: res.converged,
            passed: res.converged && error < tol,
            residuals: res.residuals,
        });
    }
    let passed = entries.iter().filter(|e| e.passed).count();
    let pass_fraction = (!entries.is_empty()).then(|| passed as f64 / entries.len() as f64);
    let h = TAU / phi.len() as f64;
    let failed: Vec<(f64, f64)> = entries.iter().filter(|e| !e.passed).map(|e| (e.theta - h, e.theta + h)).collect();
    let (failed_hull, failed_capacity) = if failed.is_empty() {
        (Vec::new(), None)
    } else {
        let set = BoundedSet1D::arcs(&failed)?;
        (set.pieces().to_vec(), Some(capacity_via_potential(&set, 256)?))
    };
    Ok(ResidualReport { tolerance: tol, entries, passed, pass_fraction, failed_hull, failed_capacity })
}

/// Audit angles: grid angles nearest to the base-3 Halton sequence, skipping
/// any within `margin` cells of a jump of `lambda`, a jump of `phi`
/// (a step larger than `jump_threshold`) or the seam of a winding argument.
pub fn audit_angles(
    argument: &ArgumentFunction,
    phi: &BoundaryFunction,
    count: usize,
    margin: usize,
    jump_threshold: f64,
) -> Vec<f64> {
    let m = phi.len();
    let p = phi.samples();
    let mut bad: Vec<usize> = argument.jumps.iter().map(|j| j.index).collect();
    bad.extend((0..m).filter(|&j| (p[(j + 1) % m] - p[j]).abs() > jump_threshold));
    if argument.winding != 0 {
        bad.push(m - 1);
    }
    // A jump between j and j+1 is at distance d from index k when k lies in
    // [j + 1 - d, j + d].
    let near = |k: usize| {
        bad.iter().any(|&j| {
            let lo = (k + m - (j + 1) % m) % m;
            let hi = ((j % m) + m - k) % m;
            lo < margin || hi < margin
        })
    };
    let mut out = Vec::with_capacity(count);
    let mut seen = vec![false; m];
    let mut i = 1u64;
    while out.len() < count && i < 64 * m as u64 {
        let k = ((radical_inverse(i, 3) * m as f64).round() as usize) % m;
        i += 1;
        if seen[k] || near(k) {
            continue;
        }
        seen[k] = true;
        out.push(TAU * k as f64 / m as f64);
    }
    out
}

/// `rh_solve` followed by a radial-probe audit at `count` angles.
pub fn audit_solution(
    sol: &RhSolution,
    lambda: &UnimodularBV,
    phi: &BoundaryFunction,
    count: usize,
    tol: f64,
    jump_threshold: f64,
) -> Result<ResidualReport> {
    let probes = audit_angles(&sol.argument, phi, count, 2, jump_threshold)
        .into_iter()
        .map(|t| StolzProbe::for_order(sol.order(), t, PI / 4.0, 0.0))
        .collect::<Result<Vec<_>>>()?;
    verify_boundary(|z| sol.eval(z), sol.max_radius(), lambda, phi, &probes, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn variation_examples() {
        let one = LambdaBuiltin::Constant(0.0).sample(64).unwrap();
        assert_eq!(one.variation(), 0.0);
        let mut prev = 0.0;
        for m in [8, 64, 512] {
            let w = LambdaBuiltin::Winding(1).sample(m).unwrap().variation();
            assert!(w < TAU && w > prev);
            prev = w;
        }
        assert!(TAU - prev < 1e-4);
        let mut s = vec![c(1.0, 0.0); 16];
        s[5..].iter_mut().for_each(|z| *z = c(0.0, 1.0));
        s[15] = c(1.0, 0.0);
        // Two jumps: in and back out.
        assert!((total_variation(&s) - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn argument_examples() {
        let one = bv_argument(&LambdaBuiltin::Constant(0.0).sample(32).unwrap(), 0.5).unwrap();
        assert!(one.alpha.iter().all(|&a| a == 0.0) && one.jumps.is_empty() && one.winding == 0);

        let w = bv_argument(&LambdaBuiltin::Winding(1).sample(256).unwrap(), 0.5).unwrap();
        for (j, a) in w.alpha.iter().enumerate() {
            assert!((a - TAU * j as f64 / 256.0).abs() < 1e-12);
        }
        assert_eq!(w.winding, 1);
        assert!(w.jumps.is_empty());

        let step = bv_argument(&LambdaBuiltin::Step.sample(64).unwrap(), 0.5).unwrap();
        assert_eq!(step.jumps.len(), 4);
        for j in &step.jumps {
            assert!((j.chord - 2f64.sqrt()).abs() < 1e-12);
            assert!((j.angle.abs() - PI / 2.0).abs() < 1e-12);
            assert!(j.chord <= j.angle.abs() && j.angle.abs() <= j.chord * PI / 2.0 + 1e-12);
        }
        assert_eq!(step.winding, 0);
    }

    #[test]
    fn antipodal_samples_are_rejected() {
        let lambda = UnimodularBV::new(vec![c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(matches!(bv_argument(&lambda, 0.5), Err(Error::Antipodal { index: 0, next: 1, .. })));
        assert!(UnimodularBV::new(vec![c(1.0, 0.0), c(0.5, 0.0)]).is_err());
    }

    #[test]
    fn schwarz_examples() {
        let m = 32;
        let grid = |f: fn(f64) -> f64| (0..m).map(|j| f(TAU * j as f64 / m as f64)).collect::<Vec<_>>();
        let z = c(0.3, 0.4);
        let g = schwarz_analytic(&vec![0.7; m]).unwrap();
        assert!((g.eval(z) - c(0.7, 0.0)).norm() < 1e-15);
        assert!((schwarz_analytic(&grid(f64::cos)).unwrap().eval(z) - z).norm() < 1e-14);
        assert!((schwarz_analytic(&grid(f64::sin)).unwrap().eval(z) - c(0.0, -1.0) * z).norm() < 1e-14);
    }

    #[test]
    fn beta_examples() {
        let m = 1024;
        let cos: Vec<f64> = (0..m).map(|j| (TAU * j as f64 / m as f64).cos()).collect();
        let b = conjugate_boundary_data(&cos).unwrap();
        assert!(b.flagged.is_empty());
        for j in (0..m).step_by(37) {
            assert!((b.beta[j] - (TAU * j as f64 / m as f64).sin()).abs() < 1e-4);
        }
        let zero = conjugate_boundary_data(&vec![0.0; m]).unwrap();
        assert!(zero.beta.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_coefficient_reductions() {
        let m = 256;
        let phi = BoundaryFunction::from_fn(m, Regularity::Continuous, f64::cos).unwrap();
        let one = LambdaBuiltin::Constant(0.0).sample(m).unwrap();
        let sol = rh_solve(&one, &phi, &RhOptions::default()).unwrap();
        let z = c(0.5, -0.2);
        assert!((sol.eval(z).re - z.re).abs() < 1e-12);

        let i = LambdaBuiltin::Constant(PI / 2.0).sample(m).unwrap();
        let ones = BoundaryFunction::from_fn(m, Regularity::Continuous, |_| 1.0).unwrap();
        let sol = rh_solve(&i, &ones, &RhOptions::default()).unwrap();
        assert!((sol.eval(z).im - 1.0).abs() < 1e-12);
    }

    #[test]
    fn audit_catches_injected_fault() {
        let m = 1024;
        let phi = BoundaryFunction::from_fn(m, Regularity::Continuous, f64::cos).unwrap();
        let lambda = LambdaBuiltin::Constant(0.3).sample(m).unwrap();
        let sol = rh_solve(&lambda, &phi, &RhOptions::default()).unwrap();
        let good = audit_solution(&sol, &lambda, &phi, 16, 1e-3, 0.5).unwrap();
        assert_eq!(good.pass_fraction, Some(1.0));
        let probes: Vec<StolzProbe> =
            [80, 333].iter().map(|&k| StolzProbe::for_order(sol.order(), phi.angle(k), PI / 4.0, 0.0).unwrap()).collect();
        let bad = verify_boundary(|z| sol.eval(z) + 1.0, sol.max_radius(), &lambda, &phi, &probes, 1e-3).unwrap();
        assert_eq!(bad.passed, 0);
        assert!((bad.entries[0].error - 0.3f64.cos()).abs() < 1e-3, "{:?}", bad.entries[0]);
        let empty = verify_boundary(|z| sol.eval(z), sol.max_radius(), &lambda, &phi, &[], 1e-3).unwrap();
        assert!(empty.entries.is_empty() && empty.pass_fraction.is_none());
    }
}
