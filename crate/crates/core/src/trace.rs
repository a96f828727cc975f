//! State traces, search domains, and search points.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

/// A time-indexed sequence of system state vectors.
///
/// `states[k]` is the state at time step `k`, i.e. at `k * dt` seconds.
/// All vectors share the dimension of `variables`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub variables: Vec<String>,
    pub states: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceError {
    Empty,
    ZeroOrNegativeDt,
    RaggedStates { index: usize, expected: usize, found: usize },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::Empty => write!(f, "trace must contain at least one state"),
            TraceError::ZeroOrNegativeDt => write!(f, "trace dt must be positive"),
            TraceError::RaggedStates { index, expected, found } => write!(
                f,
                "state {index} has dimension {found}, expected {expected}"
            ),
        }
    }
}

impl core::error::Error for TraceError {}

impl Trace {
    pub fn new(dt: f64, variables: Vec<String>, states: Vec<Vec<f64>>) -> Result<Self, TraceError> {
        if states.is_empty() {
            return Err(TraceError::Empty);
        }
        if !(dt > 0.0) {
            return Err(TraceError::ZeroOrNegativeDt);
        }
        let dim = variables.len();
        for (index, s) in states.iter().enumerate() {
            if s.len() != dim {
                return Err(TraceError::RaggedStates { index, expected: dim, found: s.len() });
            }
        }
        Ok(Trace { dt, variables, states })
    }

    /// Number of time steps covered, i.e. `states.len() - 1`.
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }
}

/// Per-dimension closed interval bounds for the falsification search space.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainError {
    Empty,
    InvertedBound { dim: usize },
    DimensionMismatch { expected: usize, found: usize },
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainError::Empty => write!(f, "box domain must have at least one dimension"),
            DomainError::InvertedBound { dim } => {
                write!(f, "dimension {dim} has lower bound above upper bound")
            }
            DomainError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
        }
    }
}

impl core::error::Error for DomainError {}

impl BoxDomain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, DomainError> {
        if bounds.is_empty() {
            return Err(DomainError::Empty);
        }
        for (dim, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo <= hi) {
                return Err(DomainError::InvertedBound { dim });
            }
        }
        Ok(BoxDomain { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, p: &SearchPoint) -> bool {
        p.coords.len() == self.dim()
            && p.coords
                .iter()
                .zip(&self.bounds)
                .all(|(x, &(lo, hi))| *x >= lo && *x <= hi)
    }
}

/// A candidate initial state for the system under test.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchPoint {
    pub coords: Vec<f64>,
}

impl SearchPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        SearchPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Draw a point uniformly from the box.
pub fn sample_uniform<R: Rng + ?Sized>(box_: &BoxDomain, rng: &mut R) -> SearchPoint {
    let coords = box_
        .bounds
        .iter()
        .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
        .collect();
    SearchPoint::new(coords)
}

/// Coordinate-wise clamp of `p` into the box.
pub fn clip_to_box(p: &SearchPoint, box_: &BoxDomain) -> Result<SearchPoint, DomainError> {
    if p.dim() != box_.dim() {
        return Err(DomainError::DimensionMismatch { expected: box_.dim(), found: p.dim() });
    }
    let coords = p
        .coords
        .iter()
        .zip(box_.bounds())
        .map(|(&x, &(lo, hi))| x.clamp(lo, hi))
        .collect();
    Ok(SearchPoint::new(coords))
}
