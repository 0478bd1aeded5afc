use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Transfinite,
    Potential,
}

/// A capacity value together with the Robin constant it came from.
///
/// `robin_constant` and `wiener` may be `+inf`; JSON output writes
/// non-finite numbers as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimate {
    /// `C = e^{-V}`.
    pub value: f64,
    /// Wiener-scale capacity `1 / max(V, 0+)`.
    pub wiener: f64,
    /// `V = -log C`; `+inf` exactly when `value == 0`.
    pub robin_constant: f64,
    pub method: Method,
    pub error_bar: f64,
    /// Point counts of the Fekete sequence (transfinite method only).
    pub n_sequence: Vec<usize>,
    pub diameter_sequence: Vec<f64>,
}

impl CapacityEstimate {
    pub fn new(value: f64, error_bar: f64, method: Method) -> Self {
        let value = value.max(0.0);
        let robin_constant = if value > 0.0 { -value.ln() } else { f64::INFINITY };
        Self {
            value,
            wiener: wiener_of_robin(robin_constant),
            robin_constant,
            method,
            error_bar: error_bar.abs(),
            n_sequence: Vec::new(),
            diameter_sequence: Vec::new(),
        }
    }

    pub fn zero(method: Method) -> Self {
        Self::new(0.0, 0.0, method)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0.0
    }

    /// Half-width of the Wiener-scale interval induced by `error_bar`.
    pub fn wiener_error_bar(&self) -> f64 {
        if self.value == 0.0 {
            return 0.0;
        }
        let hi = wiener_of_value(self.value + self.error_bar);
        let lo = wiener_of_value((self.value - self.error_bar).max(0.0));
        if hi.is_infinite() {
            return f64::INFINITY;
        }
        (hi - lo).abs()
    }
}

/// `1 / max(V, 0+)`: `+inf` for `V <= 0`, `0` for `V = +inf`.
pub(crate) fn wiener_of_robin(v: f64) -> f64 {
    if v <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / v
    }
}

pub(crate) fn wiener_of_value(c: f64) -> f64 {
    if c <= 0.0 {
        0.0
    } else {
        wiener_of_robin(-c.ln())
    }
}
