//! Harmonic functions with null nontangential boundary limits built from
//! rescaled zero-capacity Cantor functions, and the solution families they
//! induce for the Riemann-Hilbert problem.
//!
//! Basis member `n` lives on `[a_{n-1}, a_n)` with `a_n = 2 pi (1 - 2^{-n})`:
//! `phi_n` is the Cantor function of `E(e^2, e^4, e^8, ...)` rescaled to
//! that interval and zero elsewhere, and `u_n` is the angular derivative of
//! its Poisson extension. The derivative of `phi_n` is a measure (the
//! Cantor measure minus a unit drop at `a_n`), so `u_n` is also available
//! exactly as the real part of a Herglotz sum over that measure's atoms;
//! boundary probes use the exact form, since the truncated spectral series
//! carries `O(e^{-sN}/dist)` tails that would swamp the zero limits.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::cantor::{cantor_stage, singular_value, CantorSpec};
use crate::error::{domain, Result};
use crate::harmonic::{
    angular_derivative, poisson_extend, probe_function, BoundaryFunction, DiskField, JumpMeasure, Regularity,
    StolzProbe,
};
use crate::rh::{audit_angles, rh_solve, verify_boundary, ResidualReport, RhOptions, RhSolution, UnimodularBV};
use crate::Complex64;

/// Largest basis index; later intervals fall below grid resolution.
pub const MAX_BASIS: usize = 16;
/// Cantor stage depth of the basis staircase.
pub const BASIS_DEPTH: usize = 12;

/// `a_n = 2 pi (1 - 2^{-n})`.
pub fn partition_point(n: usize) -> f64 {
    TAU * (1.0 - (-(n as f64)).exp2())
}

pub fn basis_interval(n: usize) -> (f64, f64) {
    (partition_point(n - 1), partition_point(n))
}

/// The zero-capacity Cantor spec used by the basis.
pub fn basis_spec() -> CantorSpec {
    CantorSpec::double_exponential(BASIS_DEPTH).expect("static spec is valid")
}

fn check_index(n: usize) -> Result<()> {
    if n == 0 || n > MAX_BASIS {
        return domain(format!("basis index must be in 1..={MAX_BASIS}, got {n}"));
    }
    Ok(())
}

/// Finite head of an `l^1` sequence plus a bound on the omitted tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSequence {
    pub gamma: Vec<f64>,
    pub tail_bound: f64,
}

impl GammaSequence {
    pub fn new(gamma: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if gamma.len() > MAX_BASIS {
            return domain(format!("at most {MAX_BASIS} coefficients"));
        }
        if gamma.iter().any(|g| !g.is_finite()) || !(tail_bound >= 0.0 && tail_bound.is_finite()) {
            return domain("gamma must be finite and the tail bound non-negative");
        }
        Ok(Self { gamma, tail_bound })
    }

    pub fn finite(gamma: Vec<f64>) -> Result<Self> {
        Self::new(gamma, 0.0)
    }

    /// `e_n` (1-based).
    pub fn unit(n: usize) -> Result<Self> {
        check_index(n)?;
        let mut g = vec![0.0; n];
        g[n - 1] = 1.0;
        Self::finite(g)
    }

    /// `gamma_n` (1-based); zero past the head.
    pub fn get(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.gamma.get(n - 1).copied().unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.gamma.iter().map(|g| g.abs()).sum::<f64>() + self.tail_bound
    }

    /// `sum_{n > m} |gamma_n|`, including the tail bound.
    pub fn tail(&self, m: usize) -> f64 {
        self.gamma.iter().skip(m).map(|g| g.abs()).sum::<f64>() + self.tail_bound
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.iter().all(|&g| g == 0.0) && self.tail_bound == 0.0
    }

    /// Head truncated to the first `m` terms, tail dropped.
    pub fn truncated(&self, m: usize) -> Self {
        Self { gamma: self.gamma.iter().take(m).copied().collect(), tail_bound: 0.0 }
    }
}

/// `phi_n` on the grid `2 pi j / m`.
pub fn basis_samples(n: usize, spec: &CantorSpec, m: usize) -> Result<Vec<f64>> {
    check_index(n)?;
    let (a, b) = basis_interval(n);
    let len = b - a;
    Ok((0..m)
        .map(|j| {
            let t = TAU * j as f64 / m as f64;
            if t < a || t >= b {
                0.0
            } else {
                singular_value(spec, (t - a) / len, (b - t) / len)
            }
        })
        .collect())
}

/// `u_n = d/dtheta Poisson[phi_n]` from `m` grid samples.
pub fn basis_member(n: usize, spec: &CantorSpec, m: usize) -> Result<DiskField> {
    let phi = BoundaryFunction::new(basis_samples(n, spec, m)?, Regularity::Bv)?;
    Ok(angular_derivative(&poisson_extend(&phi)))
}

/// Derivative measure of `phi_n`: the stage-`depth` Cantor measure rescaled to
/// the interval (atoms at interval midpoints, coincident atoms merged) and a
/// unit drop at `a_n`.
pub fn basis_measure(n: usize, spec: &CantorSpec) -> Result<JumpMeasure> {
    check_index(n)?;
    let (a, b) = basis_interval(n);
    let stage = cantor_stage(spec, spec.depth)?;
    let w = (-(spec.depth as f64)).exp2();
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for &(l, r) in &stage.intervals {
        let t = a + 0.5 * (l + r) * (b - a);
        match atoms.last_mut() {
            Some(last) if last.0 == t => last.1 += w,
            _ => atoms.push((t, w)),
        }
    }
    atoms.push((b, -1.0));
    Ok(JumpMeasure { atoms })
}

#[derive(Debug, Clone, Serialize)]
pub struct NullFamilyMember {
    /// Spectral `sum gamma_n u_n`.
    pub u: DiskField,
    pub gamma: GammaSequence,
    /// `[a_{n-1}, a_n)` for every head index.
    pub partition: Vec<(f64, f64)>,
    /// `sum gamma_n d(phi_n)`; `u` exactly is its Poisson integral.
    pub measure: JumpMeasure,
}

impl NullFamilyMember {
    /// Exact `u(z)`.
    pub fn eval_u(&self, z: Complex64) -> f64 {
        self.herglotz(z).re
    }

    /// Exact `C = u + i v` with `v(0) = 0`.
    pub fn herglotz(&self, z: Complex64) -> Complex64 {
        self.measure.herglotz(z)
    }

    /// Exact `U = Poisson[sum gamma_n phi_n]`.
    pub fn eval_staircase(&self, z: Complex64) -> f64 {
        self.measure.staircase_poisson(z)
    }
}

/// `sum gamma_n u_n`, summed in index order. Zero coefficients contribute
/// nothing, so the result is exactly linear coefficientwise.
pub fn family_member(gamma: &GammaSequence, spec: &CantorSpec, m: usize) -> Result<NullFamilyMember> {
    let order = m / 2;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * order + 1];
    let mut parts = Vec::new();
    let mut partition = Vec::with_capacity(gamma.gamma.len());
    for (i, &g) in gamma.gamma.iter().enumerate() {
        let n = i + 1;
        partition.push(basis_interval(n));
        if g == 0.0 {
            continue;
        }
        let u_n = basis_member(n, spec, m)?;
        for (c, d) in coeffs.iter_mut().zip(u_n.coeffs()) {
            *c += g * d;
        }
        parts.push(basis_measure(n, spec)?.scaled(g));
    }
    let u = DiskField::new(coeffs, crate::harmonic::FieldKind::Harmonic)?;
    Ok(NullFamilyMember { u, gamma: gamma.clone(), partition, measure: JumpMeasure::concat(parts) })
}

/// `2 r (1 + r) / (1 - r)^3`.
pub fn remainder_constant(r: f64) -> f64 {
    2.0 * r * (1.0 + r) / (1.0 - r).powi(3)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderRow {
    pub r: f64,
    pub measured: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderReport {
    pub m: usize,
    pub tail: f64,
    pub rows: Vec<RemainderRow>,
    pub holds: bool,
}

/// Angular samples per circle in [`remainder_bound_check`].
pub const REMAINDER_SAMPLES: usize = 4096;

/// Max over `|z| = r` of `|u - u*_m|` (exact evaluation on
/// [`REMAINDER_SAMPLES`] angles) against `2r(1+r)/(1-r)^3 * tail`.
pub fn remainder_bound_check(
    gamma: &GammaSequence,
    spec: &CantorSpec,
    m: usize,
    r_grid: &[f64],
) -> Result<RemainderReport> {
    if m > gamma.gamma.len() {
        return domain(format!("truncation {m} exceeds the head length {}", gamma.gamma.len()));
    }
    if r_grid.iter().any(|r| !(0.0..1.0).contains(r)) {
        return domain("radii must lie in [0, 1)");
    }
    let mut head = gamma.gamma.clone();
    head[..m].iter_mut().for_each(|g| *g = 0.0);
    let rest = GammaSequence::finite(head)?;
    let mut parts = Vec::new();
    for (i, &g) in rest.gamma.iter().enumerate() {
        if g != 0.0 {
            parts.push(basis_measure(i + 1, spec)?.scaled(g));
        }
    }
    let measure = JumpMeasure::concat(parts);
    let tail = gamma.tail(m);
    let rows: Vec<RemainderRow> = r_grid
        .iter()
        .map(|&r| {
            let measured = (0..REMAINDER_SAMPLES)
                .map(|j| {
                    let z = Complex64::from_polar(r, TAU * j as f64 / REMAINDER_SAMPLES as f64);
                    measure.herglotz(z).re.abs()
                })
                .fold(0.0, f64::max);
            let bound = remainder_constant(r) * tail;
            RemainderRow { r, measured, bound, holds: measured <= bound * (1.0 + 1e-6) }
        })
        .collect();
    let holds = rows.iter().all(|r| r.holds);
    Ok(RemainderReport { m, tail, rows, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub theta: f64,
    /// Exact staircase value at `theta`.
    pub expected: f64,
    pub limit: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub n: usize,
    pub gamma_n: f64,
    pub interval: (f64, f64),
    /// Converged witness with the limit closest to 0.
    pub low: Option<Witness>,
    /// Converged witness with the limit closest to `gamma_n`.
    pub high: Option<Witness>,
    /// `u` has a zero Stolz limit at every witness angle.
    pub null_limits: bool,
    pub certified: bool,
    pub vacuous: bool,
}

/// Deepest Cantor gap generation probed; gaps at generation 4 are already
/// below double precision relative to the interval.
pub const WITNESS_GENERATION: usize = 3;
/// Agreement required between a probe limit and the staircase value.
pub const WITNESS_TOLERANCE: f64 = 1e-6;

/// Gap midpoints of generations `1..=g` of a Cantor set on `[0, 1]`, with
/// the staircase value on each gap.
fn gap_midpoints(spec: &CantorSpec, g: usize) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    for k in 1..=g {
        let stage = cantor_stage(spec, k - 1)?;
        let s = spec.child_ratio(k);
        for (i, &(a, b)) in stage.intervals.iter().enumerate() {
            let len = b - a;
            let value = (2 * i + 1) as f64 / (1u64 << k) as f64;
            // (midpoint, gap width, staircase value)
            out.push((0.5 * (a + b), len * (1.0 - 2.0 * s), value));
        }
    }
    Ok(out)
}

/// Probes `U = Poisson[sum gamma phi]` at Cantor gap midpoints inside
/// `[a_{n-1}, a_n)`. The limits follow the staircase, so they come within
/// `|gamma_n| / 2^g` of both 0 and `gamma_n`; a non-constant `U` on the
/// interval is what forces `u = dU/dtheta` to be nonzero there. The same
/// probes check that `u` itself has zero limits.
pub fn independence_probe(member: &NullFamilyMember, spec: &CantorSpec, n: usize) -> Result<IndependenceReport> {
    check_index(n)?;
    let gamma_n = member.gamma.get(n);
    let (a, b) = basis_interval(n);
    if gamma_n == 0.0 {
        return Ok(IndependenceReport {
            n,
            gamma_n,
            interval: (a, b),
            low: None,
            high: None,
            null_limits: true,
            certified: true,
            vacuous: true,
        });
    }
    let len = b - a;
    let mut witnesses = Vec::new();
    let mut null_limits = true;
    for (x, width, value) in gap_midpoints(spec, WITNESS_GENERATION)? {
        let theta = a + x * len;
        let half = 0.5 * width * len;
        let depths: Vec<f64> = (0..24).map(|i| 0.25 * half * 0.7f64.powi(i)).collect();
        let probe = StolzProbe::new(theta, PI / 4.0, depths, 0.0)?;
        let res = probe_function(&probe, 1.0, |z| Complex64::new(member.eval_staircase(z), 0.0))?;
        let expected = gamma_n * value;
        let du = probe_function(&probe, 1.0, |z| Complex64::new(member.eval_u(z), 0.0))?;
        null_limits &= du.converged && du.limit.re.abs() < WITNESS_TOLERANCE * (1.0 + gamma_n.abs());
        witnesses.push(Witness { theta, expected, limit: res.limit.re, converged: res.converged });
    }
    let good: Vec<&Witness> = witnesses
        .iter()
        .filter(|w| w.converged && (w.limit - w.expected).abs() < WITNESS_TOLERANCE * (1.0 + gamma_n.abs()))
        .collect();
    let pick = |target: f64| {
        good.iter()
            .min_by(|p, q| (p.limit - target).abs().total_cmp(&(q.limit - target).abs()))
            .map(|w| (*w).clone())
    };
    let low = pick(0.0);
    let high = pick(gamma_n);
    let slack = gamma_n.abs() / (1u64 << WITNESS_GENERATION) as f64 + WITNESS_TOLERANCE;
    let certified = match (&low, &high) {
        (Some(l), Some(h)) => l.limit.abs() <= slack && (h.limit - gamma_n).abs() <= slack,
        _ => false,
    };
    Ok(IndependenceReport { n, gamma_n, interval: (a, b), low, high, null_limits, certified, vacuous: false })
}

/// `f = A (B + C)`: the base solution plus the null-family term.
#[derive(Debug, Clone, Serialize)]
pub struct RhFamilySolution {
    pub base: RhSolution,
    pub member: NullFamilyMember,
}

impl RhFamilySolution {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.member.measure.atoms.is_empty() {
            return self.base.eval(z);
        }
        self.base.eval_a(z) * (self.base.b.eval(z) + self.member.herglotz(z))
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    pub fn max_radius(&self) -> f64 {
        self.base.max_radius()
    }
}

pub fn rh_family(
    lambda: &UnimodularBV,
    phi: &BoundaryFunction,
    gamma: &GammaSequence,
    spec: &CantorSpec,
    opts: &RhOptions,
) -> Result<RhFamilySolution> {
    let base = rh_solve(lambda, phi, opts)?;
    let member = family_member(gamma, spec, phi.len())?;
    Ok(RhFamilySolution { base, member })
}

/// The `rh_solve` audit (same angles, probes and tolerance) applied to a
/// family solution.
pub fn audit_family(
    sol: &RhFamilySolution,
    lambda: &UnimodularBV,
    phi: &BoundaryFunction,
    count: usize,
    tol: f64,
    jump_threshold: f64,
) -> Result<ResidualReport> {
    let probes = audit_angles(&sol.base.argument, phi, count, 2, jump_threshold)
        .into_iter()
        .map(|t| StolzProbe::for_order(sol.order(), t, PI / 4.0, 0.0))
        .collect::<Result<Vec<_>>>()?;
    verify_boundary(|z| sol.eval(z), sol.max_radius(), lambda, phi, &probes, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::probe_limit;
    use crate::rh::{audit_solution, LambdaBuiltin};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn partition_tiles_the_circle() {
        assert_eq!(partition_point(0), 0.0);
        assert_eq!(basis_interval(1), (0.0, PI));
        assert_eq!(basis_interval(2), (PI, 1.5 * PI));
        for n in 1..=MAX_BASIS {
            let partial: f64 = (1..=n).map(|k| TAU * (-(k as f64)).exp2()).sum();
            assert!((partition_point(n) - partial).abs() < 1e-14);
            assert!(basis_interval(n).0 < basis_interval(n).1);
        }
    }

    #[test]
    fn basis_member_has_no_constant_term() {
        let spec = basis_spec();
        let u = basis_member(1, &spec, 1024).unwrap();
        assert_eq!(u.coeff(0), c(0.0, 0.0));
        assert_eq!(u.eval(c(0.0, 0.0)).re, 0.0);
        let s = basis_samples(2, &spec, 1024).unwrap();
        assert!(s[..512].iter().all(|&v| v == 0.0));
        assert!(s[768..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn measure_is_balanced_and_matches_spectral_field() {
        let spec = basis_spec();
        for n in [1, 3] {
            let mu = basis_measure(n, &spec).unwrap();
            assert!(mu.total().abs() < 1e-12);
            let (a, b) = basis_interval(n);
            assert!(mu.atoms.iter().all(|&(t, _)| t >= a && t <= b));
            let u = basis_member(n, &spec, 8192).unwrap();
            for k in 0..16 {
                let z = Complex64::from_polar(0.5, 0.4 * k as f64);
                let exact = mu.herglotz(z).re;
                assert!((u.eval(z).re - exact).abs() < 2e-3, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn staircase_poisson_differentiates_to_u() {
        let spec = basis_spec();
        let mu = basis_measure(2, &spec).unwrap();
        let h = 1e-5;
        for k in 0..12 {
            let (r, t) = (0.7, 0.5 * k as f64);
            let up = mu.staircase_poisson(Complex64::from_polar(r, t + h));
            let dn = mu.staircase_poisson(Complex64::from_polar(r, t - h));
            let exact = mu.herglotz(Complex64::from_polar(r, t)).re;
            assert!(((up - dn) / (2.0 * h) - exact).abs() < 1e-6 * (1.0 + exact.abs()));
        }
        // U at the origin is the mean of the staircase.
        let mean = basis_samples(2, &spec, 1 << 16).unwrap().iter().sum::<f64>() / (1 << 16) as f64;
        assert!((mu.staircase_poisson(c(0.0, 0.0)) - mean).abs() < 1e-4);
    }

    #[test]
    fn gap_midpoint_limit_is_zero() {
        let spec = basis_spec();
        let member = family_member(&GammaSequence::unit(1).unwrap(), &spec, 4096).unwrap();
        // Middle of the first-generation gap of phi_1.
        let probe = StolzProbe::for_order(2048, PI / 2.0, PI / 4.0, 0.0).unwrap();
        let res = probe_function(&probe, 1.0 - 2.0 / 2048.0, |z| c(member.eval_u(z), 0.0)).unwrap();
        assert!(res.converged && res.limit.re.abs() < 1e-6);
        // The spectral field agrees when the probe stops a few times short of
        // its truncation radius; at the radius itself the jump tails of the
        // truncated series are still O(1e-2).
        let fine = family_member(&GammaSequence::unit(1).unwrap(), &spec, 16384).unwrap();
        let probe = StolzProbe::for_order(2048, PI / 2.0, PI / 4.0, 0.0).unwrap();
        let spectral = probe_limit(&fine.u, &probe).unwrap();
        assert!(spectral.converged && spectral.limit.re.abs() < 1e-6, "{:?}", spectral.limit);
    }

    #[test]
    fn family_is_linear() {
        let spec = basis_spec();
        let zero = family_member(&GammaSequence::finite(vec![0.0; 3]).unwrap(), &spec, 512).unwrap();
        assert!(zero.u.coeffs().iter().all(|v| *v == c(0.0, 0.0)));
        assert!(zero.measure.atoms.is_empty());
        let e1 = family_member(&GammaSequence::unit(1).unwrap(), &spec, 512).unwrap();
        assert_eq!(e1.u, basis_member(1, &spec, 512).unwrap());
        let pair = family_member(&GammaSequence::finite(vec![1.0, -1.0]).unwrap(), &spec, 512).unwrap();
        let u2 = basis_member(2, &spec, 512).unwrap();
        for (k, v) in pair.u.coeffs().iter().enumerate() {
            assert_eq!(*v, e1.u.coeffs()[k] + (-1.0) * u2.coeffs()[k]);
        }
        assert_eq!(pair.partition, vec![(0.0, PI), (PI, 1.5 * PI)]);
    }

    #[test]
    fn remainder_bound_examples() {
        let spec = basis_spec();
        assert_eq!(remainder_constant(0.5), 12.0);
        let g = GammaSequence::finite(vec![0.0, 1.0]).unwrap();
        let rep = remainder_bound_check(&g, &spec, 1, &[0.5]).unwrap();
        assert_eq!(rep.rows[0].bound, 12.0);
        assert!(rep.holds && rep.rows[0].measured > 0.0);
        let rep = remainder_bound_check(&g, &spec, 2, &[0.3, 0.8]).unwrap();
        assert!(rep.rows.iter().all(|r| r.measured == 0.0 && r.bound == 0.0 && r.holds));
        // O(r) near the origin.
        let rep = remainder_bound_check(&g, &spec, 0, &[1e-3, 2e-3]).unwrap();
        let ratio = rep.rows[1].measured / rep.rows[0].measured;
        assert!((ratio - 2.0).abs() < 1e-2);
        assert!(remainder_bound_check(&g, &spec, 3, &[0.5]).is_err());
    }

    #[test]
    fn independence_examples() {
        let spec = basis_spec();
        let member = family_member(&GammaSequence::unit(1).unwrap(), &spec, 512).unwrap();
        let rep = independence_probe(&member, &spec, 1).unwrap();
        assert!(rep.certified && rep.null_limits && !rep.vacuous, "{rep:?}");
        assert_eq!(rep.low.as_ref().unwrap().expected, 0.125);
        assert_eq!(rep.high.as_ref().unwrap().expected, 0.875);

        let zero = family_member(&GammaSequence::finite(vec![0.0; 2]).unwrap(), &spec, 512).unwrap();
        assert!(independence_probe(&zero, &spec, 1).unwrap().vacuous);

        let g = GammaSequence::finite(vec![0.0, 0.0, 2.0]).unwrap();
        let member = family_member(&g, &spec, 512).unwrap();
        let rep = independence_probe(&member, &spec, 3).unwrap();
        assert!(rep.certified, "{rep:?}");
        assert!((rep.high.unwrap().limit - 1.75).abs() < 1e-6);
        assert!((rep.low.unwrap().limit - 0.25).abs() < 1e-6);
    }

    #[test]
    fn family_solutions_share_the_audit() {
        let spec = basis_spec();
        let m = 16384;
        let lambda = LambdaBuiltin::Winding(1).sample(m).unwrap();
        let phi = BoundaryFunction::from_fn(m, Regularity::Continuous, |t| t.cos()).unwrap();
        let opts = RhOptions::default();
        let base = rh_solve(&lambda, &phi, &opts).unwrap();
        let base_audit = audit_solution(&base, &lambda, &phi, 64, 1e-2, 0.5).unwrap();

        let zero = rh_family(&lambda, &phi, &GammaSequence::finite(vec![0.0]).unwrap(), &spec, &opts).unwrap();
        let z = c(0.3, -0.4);
        assert_eq!(zero.eval(z), base.eval(z));

        let one = rh_family(&lambda, &phi, &GammaSequence::unit(1).unwrap(), &spec, &opts).unwrap();
        let two = rh_family(&lambda, &phi, &GammaSequence::finite(vec![2.0]).unwrap(), &spec, &opts).unwrap();
        let half = c(0.5, 0.0);
        assert!((one.eval(half) - two.eval(half)).norm() > 1e-3);
        let pattern = |r: &ResidualReport| r.entries.iter().map(|e| e.passed).collect::<Vec<_>>();
        let a1 = audit_family(&one, &lambda, &phi, 64, 1e-2, 0.5).unwrap();
        let a2 = audit_family(&two, &lambda, &phi, 64, 1e-2, 0.5).unwrap();
        assert_eq!(pattern(&a1), pattern(&a2));
        // Away from the Cantor clusters the audit is unchanged; next to
        // them the added term converges too slowly for the probe depths.
        for (b, f) in base_audit.entries.iter().zip(&a1.entries) {
            let d = one.member.measure.atoms.iter().map(|a| (a.0 - b.theta).abs()).fold(f64::INFINITY, f64::min);
            if d > 0.05 {
                assert_eq!(b.passed, f.passed, "theta {}", b.theta);
            }
        }
    }
}
