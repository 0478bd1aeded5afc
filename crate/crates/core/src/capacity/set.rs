use crate::error::{domain, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Where the parameters of a [`BoundedSet1D`] live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    /// Pieces are segments `[a, b]` of the real line.
    Line,
    /// Pieces are arcs `{e^{i t} : a <= t <= b}` of the unit circle.
    Circle,
}

/// Similarity `p -> shift + factor * p` placing the parameter curve in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub shift: Complex64,
    pub factor: Complex64,
}

impl Default for Frame {
    fn default() -> Self {
        Self {
            shift: Complex64::new(0.0, 0.0),
            factor: Complex64::new(1.0, 0.0),
        }
    }
}

/// Finite union of closed segments or closed circular arcs.
///
/// Pieces are stored in parameter space (abscissae or angles), sorted and
/// pairwise disjoint; the [`Frame`] maps them into the plane. Capacities only
/// depend on pairwise distances, so the frame contributes `log |factor|` and
/// nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedSet1D {
    pieces: Vec<(f64, f64)>,
    ambient: Ambient,
    frame: Frame,
}

impl BoundedSet1D {
    pub fn empty(ambient: Ambient) -> Self {
        Self { pieces: Vec::new(), ambient, frame: Frame::default() }
    }

    /// Union of real segments. Overlapping or touching segments are merged.
    pub fn intervals(pieces: &[(f64, f64)]) -> Result<Self> {
        for &(a, b) in pieces {
            if !a.is_finite() || !b.is_finite() || a > b {
                return domain(format!("invalid segment [{a}, {b}]"));
            }
        }
        Ok(Self {
            pieces: merge(pieces.to_vec()),
            ambient: Ambient::Line,
            frame: Frame::default(),
        })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::intervals(&[(a, b)])
    }

    /// Union of arcs given by start and end angle, traversed counterclockwise.
    /// An arc whose end precedes its start wraps through angle 0; an arc of
    /// length at least `2 pi` is the whole circle.
    pub fn arcs(pieces: &[(f64, f64)]) -> Result<Self> {
        let mut out = Vec::new();
        for &(t1, t2) in pieces {
            if !t1.is_finite() || !t2.is_finite() {
                return domain(format!("invalid arc [{t1}, {t2}]"));
            }
            let start = t1.rem_euclid(TAU);
            let mut len = t2 - t1;
            if len < 0.0 {
                len = len.rem_euclid(TAU);
            }
            if len >= TAU {
                return Ok(Self::full_circle());
            }
            let end = start + len;
            if end <= TAU {
                out.push((start, end));
            } else {
                out.push((start, TAU));
                out.push((0.0, end - TAU));
            }
        }
        let merged = merge(out);
        if merged.len() == 1 && merged[0].0 <= 0.0 && merged[0].1 >= TAU {
            return Ok(Self::full_circle());
        }
        // Pieces touching at 0 and 2 pi are one arc through angle 0.
        let merged = if merged.len() >= 2
            && merged[0].0 <= 0.0
            && merged[merged.len() - 1].1 >= TAU
        {
            let mut m = merged;
            let first = m.remove(0);
            let last = m.last_mut().expect("two pieces");
            last.1 = TAU + first.1;
            m
        } else {
            merged
        };
        Ok(Self { pieces: merged, ambient: Ambient::Circle, frame: Frame::default() })
    }

    pub fn full_circle() -> Self {
        Self { pieces: vec![(0.0, TAU)], ambient: Ambient::Circle, frame: Frame::default() }
    }

    /// Circle of radius `r` centred at the origin.
    pub fn circle(radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return domain(format!("invalid radius {radius}"));
        }
        Ok(Self::full_circle().scaled(radius))
    }

    /// The closed arc of length `2 delta` centred at `e^{i theta0}`.
    pub fn centered_arc(theta0: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return domain("arc half-length must be positive");
        }
        if delta >= PI {
            return Ok(Self::full_circle());
        }
        Self::arcs(&[(theta0 - delta, theta0 + delta)])
    }

    pub fn point(z: Complex64) -> Self {
        Self {
            pieces: vec![(0.0, 0.0)],
            ambient: Ambient::Line,
            frame: Frame { shift: z, factor: Complex64::new(1.0, 0.0) },
        }
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// True for the single piece covering the whole circle.
    pub fn is_full_circle(&self) -> bool {
        self.ambient == Ambient::Circle
            && self.pieces.len() == 1
            && self.pieces[0].1 - self.pieces[0].0 >= TAU
    }

    /// Euclidean position of a parameter value.
    pub fn point_at(&self, t: f64) -> Complex64 {
        let base = match self.ambient {
            Ambient::Line => Complex64::new(t, 0.0),
            Ambient::Circle => Complex64::from_polar(1.0, t),
        };
        self.frame.shift + self.frame.factor * base
    }

    /// `log |z(s) - z(t)|` computed in parameter space.
    pub fn log_distance(&self, s: f64, t: f64) -> f64 {
        self.frame.factor.norm().ln() + param_log_distance(self.ambient, s, t)
    }

    /// Sum of piece lengths measured in the plane.
    pub fn total_length(&self) -> f64 {
        self.frame.factor.norm() * self.pieces.iter().map(|(a, b)| b - a).sum::<f64>()
    }

    /// Largest distance between two points of the set.
    pub fn diameter(&self) -> f64 {
        let scale = self.frame.factor.norm();
        match self.ambient {
            Ambient::Line => match (self.pieces.first(), self.pieces.last()) {
                (Some(f), Some(l)) => scale * (l.1 - f.0),
                _ => 0.0,
            },
            Ambient::Circle => {
                if self.is_empty() {
                    return 0.0;
                }
                // Sample densely: exact diameters of arc unions are not needed.
                let pts: Vec<f64> = self
                    .pieces
                    .iter()
                    .flat_map(|&(a, b)| (0..=64).map(move |k| a + (b - a) * k as f64 / 64.0))
                    .collect();
                let mut best = 0.0f64;
                for &s in &pts {
                    for &t in &pts {
                        best = best.max(2.0 * ((s - t) / 2.0).sin().abs());
                    }
                }
                scale * best
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.frame.factor *= s;
        out.frame.shift *= s;
        out
    }

    pub fn translated(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.frame.shift += c;
        out
    }

    /// Rotation about the origin by angle `phi`.
    pub fn rotated(&self, phi: f64) -> Self {
        let rot = Complex64::from_polar(1.0, phi);
        let mut out = self.clone();
        out.frame.factor *= rot;
        out.frame.shift *= rot;
        out
    }

    /// Same pieces and ambient with a new frame.
    pub fn with_frame(&self, frame: Frame) -> Self {
        let mut out = self.clone();
        out.frame = frame;
        out
    }

    /// Intersection with the parameter window `[lo, hi]` (angles are compared
    /// modulo `2 pi` on the circle).
    pub fn intersect_window(&self, lo: f64, hi: f64) -> Self {
        let mut out = Vec::new();
        match self.ambient {
            Ambient::Line => {
                for &(a, b) in &self.pieces {
                    let (l, r) = (a.max(lo), b.min(hi));
                    if l <= r {
                        out.push((l, r));
                    }
                }
            }
            Ambient::Circle => {
                for shift in [-TAU, 0.0, TAU] {
                    for &(a, b) in &self.pieces {
                        let (l, r) = ((a + shift).max(lo), (b + shift).min(hi));
                        if l <= r {
                            out.push((l, r));
                        }
                    }
                }
            }
        }
        let mut set = match self.ambient {
            Ambient::Line => Self::intervals(&out).expect("valid pieces"),
            Ambient::Circle => {
                if out.is_empty() {
                    Self::empty(Ambient::Circle)
                } else {
                    Self::arcs(&out).expect("valid arcs")
                }
            }
        };
        set.frame = self.frame;
        set
    }

    /// The closed parameter window `[lo, hi]` with the open parts of the set
    /// removed; the result is the closure of `[lo, hi] \ E`.
    pub fn complement_in(&self, lo: f64, hi: f64) -> Self {
        assert_eq!(self.ambient, Ambient::Line, "complement_in is defined on the line");
        let mut out = Vec::new();
        let mut cursor = lo;
        for &(a, b) in &self.pieces {
            if b < lo || a > hi {
                continue;
            }
            if a > cursor {
                out.push((cursor, a.min(hi)));
            }
            cursor = cursor.max(b);
        }
        if cursor < hi {
            out.push((cursor, hi));
        }
        // Drop zero-length remnants left by pieces ending exactly at the window.
        out.retain(|(a, b)| b > a);
        let mut set = Self::intervals(&out).expect("valid pieces");
        set.frame = self.frame;
        set
    }

    /// Union with another set of the same ambient and frame.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.ambient != other.ambient || self.frame != other.frame {
            return domain("union needs sets with the same ambient and frame");
        }
        let mut all = self.pieces.clone();
        all.extend_from_slice(&other.pieces);
        let mut set = match self.ambient {
            Ambient::Line => Self::intervals(&all)?,
            Ambient::Circle => Self::arcs(&all)?,
        };
        set.frame = self.frame;
        Ok(set)
    }
}

pub(crate) fn param_log_distance(ambient: Ambient, s: f64, t: f64) -> f64 {
    match ambient {
        Ambient::Line => (s - t).abs().ln(),
        Ambient::Circle => (2.0 * ((s - t) / 2.0).sin().abs()).ln(),
    }
}

fn merge(mut pieces: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
    for (a, b) in pieces {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}
