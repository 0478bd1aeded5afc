use super::estimate::{wiener_of_value, CapacityEstimate};
use super::fekete::transfinite_diameter;
use super::set::{Ambient, BoundedSet1D};
use crate::error::{domain, Result};
use serde::Serialize;

/// Capacity of the part of a window missing from `E`, relative to the window.
#[derive(Debug, Clone, Serialize)]
pub struct DensityRatio {
    /// Ratio of Wiener-scale capacities, clamped to `[0, 1]`.
    pub ratio: f64,
    /// Ratio of `e^{-V}` capacities, clamped to `[0, 1]`.
    pub value_ratio: f64,
    pub complement: CapacityEstimate,
    pub window: CapacityEstimate,
}

/// `C([x0 - eps, x0 + eps] \ E) / C([x0 - eps, x0 + eps])` on the line.
///
/// Both capacities come from [`transfinite_diameter`] with the same `n_max`;
/// a complement with several pieces is treated as one set.
pub fn density_ratio(set: &BoundedSet1D, x0: f64, eps: f64, n_max: usize) -> Result<DensityRatio> {
    if !(eps > 0.0) {
        return domain("density_ratio needs eps > 0");
    }
    if set.ambient() != Ambient::Line && !set.is_empty() {
        return domain("density_ratio is defined for sets on the line");
    }
    let f = set.frame();
    if f.factor.im != 0.0 || f.shift.im != 0.0 || f.factor.re <= 0.0 {
        return domain("density_ratio needs a set on the real axis");
    }
    // Work in parameter coordinates: the window maps to [lo, hi].
    let lo = (x0 - eps - f.shift.re) / f.factor.re;
    let hi = (x0 + eps - f.shift.re) / f.factor.re;
    let window_set = BoundedSet1D::interval(lo, hi)?.with_frame(f);
    let complement_set = if set.is_empty() { window_set.clone() } else { set.complement_in(lo, hi) };
    let window = transfinite_diameter(&window_set, n_max)?;
    let complement = transfinite_diameter(&complement_set, n_max)?;
    let ratio = if complement.is_zero() { 0.0 } else { (complement.wiener / window.wiener).clamp(0.0, 1.0) };
    let value_ratio = if complement.is_zero() { 0.0 } else { (complement.value / window.value).clamp(0.0, 1.0) };
    Ok(DensityRatio { ratio, value_ratio, complement, window })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThinVerdict {
    Thin,
    NotThin,
    Inconclusive,
}

/// `C(E cap A(zeta0, delta)) log(1/delta)` along a sequence of `delta`.
///
/// The verdict only looks at the trend of finitely many terms, so it is a
/// heuristic: `heuristic` is always `true`.
#[derive(Debug, Clone, Serialize)]
pub struct ThinnessReport {
    pub deltas: Vec<f64>,
    /// Wiener-scale capacities of the intersections.
    pub capacities: Vec<f64>,
    /// `e^{-V}` capacities of the intersections.
    pub values: Vec<f64>,
    pub terms: Vec<f64>,
    pub verdict: ThinVerdict,
    pub heuristic: bool,
}

/// Logarithmic thinness of a set on the unit circle at `e^{i theta0}`,
/// measured on the arcs of length `2 delta` centred there.
pub fn is_log_thin(set: &BoundedSet1D, theta0: f64, deltas: &[f64], n_max: usize) -> Result<ThinnessReport> {
    if deltas.is_empty() {
        return domain("is_log_thin needs at least one delta");
    }
    if deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
        return domain("deltas must lie in (0, 1)");
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return domain("deltas must decrease");
    }
    if !set.is_empty() && set.ambient() != Ambient::Circle {
        return domain("is_log_thin needs a set on the unit circle");
    }
    let mut capacities = Vec::with_capacity(deltas.len());
    let mut values = Vec::with_capacity(deltas.len());
    let mut terms = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let part = if set.is_empty() {
            set.clone()
        } else {
            set.intersect_window(theta0 - delta, theta0 + delta)
        };
        let (value, wiener) = if part.pieces().iter().all(|(a, b)| b <= a) {
            (0.0, 0.0)
        } else {
            let est = transfinite_diameter(&part, n_max)?;
            (est.value, wiener_of_value(est.value))
        };
        capacities.push(wiener);
        values.push(value);
        terms.push(wiener * (1.0 / delta).ln());
    }
    Ok(ThinnessReport {
        deltas: deltas.to_vec(),
        verdict: verdict(&terms),
        capacities,
        values,
        terms,
        heuristic: true,
    })
}

fn verdict(terms: &[f64]) -> ThinVerdict {
    let peak = terms.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return ThinVerdict::Thin;
    }
    let last = *terms.last().expect("nonempty");
    let tail = &terms[terms.len() / 2..];
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    if last < 0.1 * peak && decreasing {
        ThinVerdict::Thin
    } else if last > 0.5 * peak {
        ThinVerdict::NotThin
    } else {
        ThinVerdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covered_window_has_zero_ratio() {
        let e = BoundedSet1D::interval(0.0, 1.0).unwrap();
        let r = density_ratio(&e, 0.5, 0.25, 8).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert_eq!(r.value_ratio, 0.0);
    }

    #[test]
    fn disjoint_window_has_unit_ratio() {
        let e = BoundedSet1D::interval(0.0, 1.0).unwrap();
        let r = density_ratio(&e, 5.0, 0.5, 8).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.value_ratio, 1.0);
    }

    #[test]
    fn empty_set_is_thin() {
        let r = is_log_thin(&BoundedSet1D::empty(Ambient::Circle), 0.0, &[0.1, 0.01], 8).unwrap();
        assert!(r.terms.iter().all(|&t| t == 0.0));
        assert_eq!(r.verdict, ThinVerdict::Thin);
        assert!(r.heuristic);
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict(&[1.0, 0.5, 0.05]), ThinVerdict::Thin);
        assert_eq!(verdict(&[0.8, 0.9, 0.95]), ThinVerdict::NotThin);
        assert_eq!(verdict(&[1.0, 0.3]), ThinVerdict::Inconclusive);
    }
}
