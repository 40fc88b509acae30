use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::spaces::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Exact,
    Bracket,
    LowerBound,
}

/// The argument that attains (or certifies) a reported value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case")]
pub enum Witness {
    None,
    Signs(Vec<i8>),
    /// Phases in radians; `ζ_j = exp(i θ_j)`.
    Phases(Vec<f64>),
    Point(Vector),
    Tuple(Vec<Vector>),
    /// Coordinate `k` assigned to tuple entry `assignment[k]`.
    Assignment(Vec<usize>),
}

/// A certified numerical result.
///
/// `lower` is always attained by `witness` (up to `tol`); `upper` is a
/// proven bound or `+∞`. For `Exact` values the two coincide.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub kind: ValueKind,
    pub lower: f64,
    #[serde(serialize_with = "ser_upper", deserialize_with = "de_upper")]
    pub upper: f64,
    pub witness: Witness,
    pub method: String,
}

fn ser_upper<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

fn de_upper<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        N(f64),
        S(String),
    }
    match Raw::deserialize(d)? {
        Raw::N(x) => Ok(x),
        Raw::S(s) if s == "inf" => Ok(f64::INFINITY),
        Raw::S(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
    }
}

impl NormValue {
    pub fn exact(value: f64, witness: Witness, method: impl Into<String>) -> Self {
        NormValue { kind: ValueKind::Exact, lower: value, upper: value, witness, method: method.into() }
    }

    pub fn lower_bound(value: f64, witness: Witness, method: impl Into<String>) -> Self {
        NormValue {
            kind: ValueKind::LowerBound,
            lower: value,
            upper: f64::INFINITY,
            witness,
            method: method.into(),
        }
    }

    pub fn bracket(lower: f64, upper: f64, witness: Witness, method: impl Into<String>) -> Self {
        NormValue::lower_bound(lower, witness, method).with_upper(upper)
    }

    /// Best point estimate.
    pub fn value(&self) -> f64 {
        self.lower
    }

    pub fn is_exact(&self) -> bool {
        self.kind == ValueKind::Exact
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Attaches an upper bound, keeping the tighter of the two.
    pub fn with_upper(mut self, upper: f64) -> Self {
        if self.kind == ValueKind::Exact {
            return self;
        }
        if upper < self.upper {
            self.upper = upper;
        }
        if self.upper.is_finite() {
            self.kind = ValueKind::Bracket;
        }
        self
    }

    /// Promotes to `Exact` when the bracket has closed to within `tol`
    /// (relative to `max(1, upper)`).
    pub fn promote(mut self, tol: f64) -> Self {
        if self.kind != ValueKind::Exact && self.upper - self.lower <= tol * self.upper.max(1.0) {
            self.kind = ValueKind::Exact;
        }
        self
    }

    /// Downgrades to a lower bound (drops exactness, keeps any upper bound).
    pub fn demote(mut self) -> Self {
        if self.kind == ValueKind::Exact {
            self.kind = ValueKind::Bracket;
        }
        self
    }

    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = method.into();
        self
    }

    /// Whether `x` lies in the certified interval, with slack `tol`.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lower - tol && x <= self.upper + tol
    }
}
