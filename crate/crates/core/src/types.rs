//! Value types shared by every solver: channels, scenarios, covariances,
//! power splits and rate points.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, Matrix};

/// The two real downlink channel matrices of an instance.
///
/// `h1` is `n1 x nt`, `h2` is `n2 x nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    h1: Matrix,
    h2: Matrix,
}

impl ChannelPair {
    pub fn new(h1: Matrix, h2: Matrix) -> Result<Self> {
        if h1.nrows() == 0 || h2.nrows() == 0 || h1.ncols() == 0 {
            return Err(Error::Dimension("channel matrices must be non-empty".into()));
        }
        if h1.ncols() != h2.ncols() {
            return Err(Error::Dimension(format!(
                "transmit antenna counts differ: h1 has {} columns, h2 has {}",
                h1.ncols(),
                h2.ncols()
            )));
        }
        if h1.iter().chain(h2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("channel entries must be finite".into()));
        }
        Ok(Self { h1, h2 })
    }

    /// Builds a pair from row-major slices.
    pub fn from_rows(h1: &[&[f64]], h2: &[&[f64]]) -> Result<Self> {
        fn build(rows: &[&[f64]]) -> Result<Matrix> {
            let cols = rows.first().map_or(0, |r| r.len());
            if rows.iter().any(|r| r.len() != cols) {
                return Err(Error::Dimension("ragged channel rows".into()));
            }
            Ok(Matrix::from_row_iterator(
                rows.len(),
                cols,
                rows.iter().flat_map(|r| r.iter().copied()),
            ))
        }
        Self::new(build(h1)?, build(h2)?)
    }

    pub fn h1(&self) -> &Matrix {
        &self.h1
    }

    pub fn h2(&self) -> &Matrix {
        &self.h2
    }

    pub fn nt(&self) -> usize {
        self.h1.ncols()
    }

    pub fn n1(&self) -> usize {
        self.h1.nrows()
    }

    pub fn n2(&self) -> usize {
        self.h2.nrows()
    }

    /// The same instance with the user labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            h1: self.h2.clone(),
            h2: self.h1.clone(),
        }
    }
}

/// Security requirement of the two user messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Both user messages private.
    A,
    /// User 1 confidential, user 2 private.
    B,
    /// Both user messages confidential.
    C,
}

impl ScenarioKind {
    pub fn letter(self) -> char {
        match self {
            ScenarioKind::A => 'A',
            ScenarioKind::B => 'B',
            ScenarioKind::C => 'C',
        }
    }

    /// Encoding orders whose union forms the region.
    pub fn orders(self) -> &'static [EncodingOrder] {
        match self {
            ScenarioKind::A | ScenarioKind::C => &[EncodingOrder::OneTwo, EncodingOrder::TwoOne],
            ScenarioKind::B => &[EncodingOrder::OneTwo],
        }
    }

    pub fn user1_confidential(self) -> bool {
        !matches!(self, ScenarioKind::A)
    }

    pub fn user2_confidential(self) -> bool {
        matches!(self, ScenarioKind::C)
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(ScenarioKind::A),
            "B" | "b" => Ok(ScenarioKind::B),
            "C" | "c" => Ok(ScenarioKind::C),
            other => Err(Error::Usage(format!("unknown scenario '{other}', expected A, B or C"))),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A scenario together with whether a common (multicast) message is carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub common_enabled: bool,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, common_enabled: bool) -> Self {
        Self {
            kind,
            common_enabled,
        }
    }

    pub fn with_common(kind: ScenarioKind) -> Self {
        Self::new(kind, true)
    }

    pub fn without_common(kind: ScenarioKind) -> Self {
        Self::new(kind, false)
    }
}

/// Which user's message is encoded first (interference free).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingOrder {
    OneTwo,
    TwoOne,
    NotApplicable,
}

impl EncodingOrder {
    pub fn tag(self) -> &'static str {
        match self {
            EncodingOrder::OneTwo => "12",
            EncodingOrder::TwoOne => "21",
            EncodingOrder::NotApplicable => "na",
        }
    }
}

impl fmt::Display for EncodingOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Transmit covariances of the common message and the two user messages.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTriple {
    pub q0: Matrix,
    pub q1: Matrix,
    pub q2: Matrix,
    pub p_total: f64,
}

impl CovarianceTriple {
    const SYM_TOL: f64 = 1e-10;
    const PSD_TOL: f64 = 1e-9;
    const TRACE_REL_TOL: f64 = 1e-8;

    pub fn new(q0: Matrix, q1: Matrix, q2: Matrix, p_total: f64) -> Result<Self> {
        let nt = q0.nrows();
        for (name, q) in [("q0", &q0), ("q1", &q1), ("q2", &q2)] {
            if q.nrows() != nt || q.ncols() != nt {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {nt}x{nt}",
                    q.nrows(),
                    q.ncols()
                )));
            }
            for i in 0..nt {
                for j in (i + 1)..nt {
                    if (q[(i, j)] - q[(j, i)]).abs() > Self::SYM_TOL {
                        return Err(Error::InvalidInput(format!("{name} is not symmetric")));
                    }
                }
            }
            let lmin = min_eigenvalue(q);
            if lmin < -Self::PSD_TOL {
                return Err(Error::InvalidInput(format!(
                    "{name} is not PSD (smallest eigenvalue {lmin:e})"
                )));
            }
        }
        if !(p_total >= 0.0) || !p_total.is_finite() {
            return Err(Error::InvalidInput(format!("invalid power budget {p_total}")));
        }
        let used = q0.trace() + q1.trace() + q2.trace();
        if used > p_total * (1.0 + Self::TRACE_REL_TOL) + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "total trace {used} exceeds budget {p_total}"
            )));
        }
        Ok(Self { q0, q1, q2, p_total })
    }

    pub fn zeros(nt: usize, p_total: f64) -> Self {
        Self {
            q0: Matrix::zeros(nt, nt),
            q1: Matrix::zeros(nt, nt),
            q2: Matrix::zeros(nt, nt),
            p_total,
        }
    }

    pub fn nt(&self) -> usize {
        self.q0.nrows()
    }

    pub fn total_trace(&self) -> f64 {
        self.q0.trace() + self.q1.trace() + self.q2.trace()
    }
}

/// Fractions of the total power given to the common, user-1 and user-2 messages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    alpha0: f64,
    alpha1: f64,
    alpha2: f64,
}

impl PowerSplit {
    pub const SUM_TOL: f64 = 1e-12;

    pub fn new(alpha0: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        for a in [alpha0, alpha1, alpha2] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidInput(format!(
                    "power fraction {a} outside [0, 1]"
                )));
            }
        }
        let sum = alpha0 + alpha1 + alpha2;
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "power fractions sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            alpha0,
            alpha1,
            alpha2,
        })
    }

    /// Split with `alpha0 = 1 - alpha1 - alpha2`, absorbing round-off below the tolerance.
    pub fn from_user_fractions(alpha1: f64, alpha2: f64) -> Result<Self> {
        let mut alpha0 = 1.0 - alpha1 - alpha2;
        if alpha0 < 0.0 && alpha0 > -Self::SUM_TOL {
            alpha0 = 0.0;
        }
        Self::new(alpha0, alpha1, alpha2)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    /// The split seen from the other user's point of view.
    pub fn swapped(&self) -> Self {
        Self {
            alpha0: self.alpha0,
            alpha1: self.alpha2,
            alpha2: self.alpha1,
        }
    }
}

/// Rates in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTriple {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub order: EncodingOrder,
}

impl RateTriple {
    pub fn new(r0: f64, r1: f64, r2: f64, order: EncodingOrder) -> Self {
        Self { r0, r1, r2, order }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0, EncodingOrder::NotApplicable)
    }

    /// Negative rates (confidential messages facing a stronger eavesdropper) become zero.
    pub fn clamped(&self) -> Self {
        Self {
            r0: self.r0.max(0.0),
            r1: self.r1.max(0.0),
            r2: self.r2.max(0.0),
            order: self.order,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r0, self.r1, self.r2]
    }
}

/// One point of a region together with the split that produced it, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPoint {
    pub rates: RateTriple,
    pub split: Option<PowerSplit>,
}

impl RegionPoint {
    pub fn new(rates: RateTriple, split: Option<PowerSplit>) -> Self {
        Self { rates, split }
    }
}

impl From<RateTriple> for RegionPoint {
    fn from(rates: RateTriple) -> Self {
        Self { rates, split: None }
    }
}
