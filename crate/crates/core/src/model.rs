//! Model definition: parameters, vector field, Jacobian and growth bounds.
//!
//! The nondimensional model tracks prey `x` and predator `y`:
//!
//! ```text
//! dx/dt = x(1 - x/gamma) - x y / D(x)
//! dy/dt = delta (x + xi (omega x^2 + 1)) y / D(x) - m y - epsilon y^2
//! D(x)  = (1 + alpha xi)(omega x^2 + 1) + x
//! ```
//!
//! The predator consumes prey through a type-IV response (saturating, then
//! declining under group defence `omega`) and additional food of quality
//! `alpha` and quantity `xi`; `epsilon` is intra-specific predator
//! competition. All operations here are pure functions over plain value
//! records and are safe to call from any thread.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Absolute tolerance for comparisons against zero.
pub const ZERO_TOL: f64 = 1e-12;

/// The seven nondimensional model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    /// Nondimensional carrying capacity, > 0.
    pub gamma: f64,
    /// Additional-food quality, >= 0.
    pub alpha: f64,
    /// Additional-food quantity, >= 0.
    pub xi: f64,
    /// Group-defence strength, >= 0.
    pub omega: f64,
    /// Intra-specific predator competition, >= 0.
    pub epsilon: f64,
    /// Maximum predator growth rate, > 0.
    pub delta: f64,
    /// Predator mortality, > 0.
    pub m: f64,
}

impl Parameters {
    /// Functional-response denominator `D(x) = (1 + alpha xi)(omega x^2 + 1) + x`.
    ///
    /// For admissible parameters and `x >= 0` this is at least 1, so the
    /// field has no division hazard on the closed positive orthant.
    pub fn response_denom(&self, x: f64) -> f64 {
        (1.0 + self.alpha * self.xi) * (self.omega * x * x + 1.0) + x
    }

    /// Effective handling factor `beta = 1 + alpha xi`.
    pub fn beta(&self) -> f64 {
        1.0 + self.alpha * self.xi
    }

    /// Combination `phi = delta xi - m (1 + alpha xi)`.
    ///
    /// `phi / beta` is the predator's per-capita growth rate at the origin,
    /// so the sign of `phi` decides whether predators can invade on
    /// additional food alone.
    pub fn phi(&self) -> f64 {
        self.delta * self.xi - self.m * self.beta()
    }
}

/// Dimensional rates and biomasses from which [`Parameters`] derive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct DimensionalParameters {
    /// Prey intrinsic growth rate (time^-1).
    pub r: f64,
    /// Prey carrying capacity (biomass).
    pub K: f64,
    /// Maximum predation rate (time^-1).
    pub c: f64,
    /// Half-saturation biomass of the response.
    pub a: f64,
    /// Group-defence coefficient (biomass^-2).
    pub b: f64,
    /// Additional-food biomass supplied.
    pub A: f64,
    /// Handling-time ratio of additional food to prey (dimensionless).
    pub eta: f64,
    /// Maximum predator growth rate (time^-1).
    pub delta1: f64,
    /// Predator mortality rate (time^-1).
    pub m1: f64,
    /// Predator intra-specific competition rate (biomass^-1 time^-1).
    pub d: f64,
}

/// A prey-predator biomass pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Self {
        State { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Jacobian of the vector field at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub j11: f64,
    pub j12: f64,
    pub j21: f64,
    pub j22: f64,
}

impl Jacobian2 {
    pub fn trace(&self) -> f64 {
        self.j11 + self.j22
    }

    pub fn det(&self) -> f64 {
        self.j11 * self.j22 - self.j12 * self.j21
    }

    /// Discriminant of the characteristic polynomial, `trace^2 - 4 det`.
    pub fn discriminant(&self) -> f64 {
        let t = self.trace();
        t * t - 4.0 * self.det()
    }

    /// Eigenvalues ordered by descending real part; a complex pair is
    /// returned with the positive imaginary part first.
    pub fn eigenvalues(&self) -> [Complex<f64>; 2] {
        let half_tr = 0.5 * self.trace();
        let disc = self.discriminant();
        if disc >= 0.0 {
            let s = 0.5 * disc.sqrt();
            [
                Complex::new(half_tr + s, 0.0),
                Complex::new(half_tr - s, 0.0),
            ]
        } else {
            let w = 0.5 * (-disc).sqrt();
            [Complex::new(half_tr, w), Complex::new(half_tr, -w)]
        }
    }
}

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

/// A single validation finding with a human-readable message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into() }
    }

    pub fn warning(message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Warning => write!(f, "warning: {}", self.message),
            Severity::Error => write!(f, "error: {}", self.message),
        }
    }
}

/// Which `epsilon`/`delta` scalings the dimensional reduction uses.
///
/// Two conventions are in circulation for this model family. The commonly
/// quoted one does not survive dimensional analysis, so results computed
/// with it carry a warning; the substitution-derived one is what actually
/// falls out of the change of variables `x = N/a`, `y = cP/(ar)`, `t' = rt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingConvention {
    /// `epsilon = c/(ad)`, `delta = delta1 a r / c` (commonly quoted; flagged).
    Conventional,
    /// `epsilon = a d / c`, `delta = delta1 / r` (dimensionally consistent).
    SubstitutionDerived,
}

/// Boundedness certificate for `W = x + y/delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    /// Constant `M` with `dW/dt + k W <= M` along trajectories.
    pub drift_bound: f64,
    /// Asymptotic bound `M/k` on `W`.
    pub ultimate_bound: f64,
    /// Set when `epsilon = 0`: the competition term is dropped and the
    /// constant only controls the prey contribution.
    pub degenerate: bool,
}

/// On-disk parameter record: the seven nondimensional constants flat,
/// plus an optional `dimensional` block they can be cross-derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterFile {
    #[serde(flatten)]
    pub parameters: Parameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensional: Option<DimensionalParameters>,
}

// Raw field evaluation without input checks, for integrator hot loops.
pub(crate) fn field_raw(p: &Parameters, x: f64, y: f64) -> (f64, f64) {
    let d = p.response_denom(x);
    let dx_dt = x * (1.0 - x / p.gamma) - x * y / d;
    let dy_dt = p.delta * (x + p.xi * (p.omega * x * x + 1.0)) * y / d
        - p.m * y
        - p.epsilon * y * y;
    (dx_dt, dy_dt)
}

/// Right-hand side of the model at state `s`.
pub fn vector_field(p: &Parameters, s: State) -> Result<(f64, f64)> {
    if !s.is_finite() {
        return Err(CoreError::InvalidInput(format!(
            "vector field evaluated at non-finite state {s}"
        )));
    }
    Ok(field_raw(p, s.x, s.y))
}

pub(crate) fn jacobian_raw(p: &Parameters, x: f64, y: f64) -> Jacobian2 {
    let beta = p.beta();
    let d = p.response_denom(x);
    let d2 = d * d;
    let group = 1.0 - p.omega * x * x;
    Jacobian2 {
        j11: 1.0 - 2.0 * x / p.gamma - y * beta * group / d2,
        j12: -x / d,
        j21: p.delta * y * group * (beta - p.xi) / d2,
        j22: p.delta * (x + p.xi * (p.omega * x * x + 1.0)) / d
            - 2.0 * p.epsilon * y
            - p.m,
    }
}

/// Analytic Jacobian of the vector field at state `s`.
pub fn jacobian(p: &Parameters, s: State) -> Result<Jacobian2> {
    if !s.is_finite() {
        return Err(CoreError::InvalidInput(format!(
            "jacobian evaluated at non-finite state {s}"
        )));
    }
    Ok(jacobian_raw(p, s.x, s.y))
}

fn check_dimensional(dp: &DimensionalParameters) -> Result<()> {
    for (name, v) in [("a", dp.a), ("r", dp.r), ("c", dp.c), ("d", dp.d)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(CoreError::InvalidInput(format!(
                "dimensional parameter {name} must be positive and finite, got {v}"
            )));
        }
    }
    for (name, v) in [("K", dp.K), ("delta1", dp.delta1), ("m1", dp.m1)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(CoreError::InvalidInput(format!(
                "dimensional parameter {name} must be positive and finite, got {v}"
            )));
        }
    }
    for (name, v) in [("b", dp.b), ("A", dp.A), ("eta", dp.eta)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(CoreError::InvalidInput(format!(
                "dimensional parameter {name} must be nonnegative and finite, got {v}"
            )));
        }
    }
    Ok(())
}

/// Reduce dimensional rates to the nondimensional constants.
///
/// Uses [`ScalingConvention::Conventional`] and therefore always attaches
/// a dimensional-consistency warning; see [`nondimensionalize_with`] for
/// the substitution-derived alternative.
pub fn nondimensionalize(
    dp: &DimensionalParameters,
) -> Result<(Parameters, Vec<Diagnostic>)> {
    nondimensionalize_with(dp, ScalingConvention::Conventional)
}

/// Reduce dimensional rates to nondimensional constants under an explicit
/// scaling convention.
pub fn nondimensionalize_with(
    dp: &DimensionalParameters,
    convention: ScalingConvention,
) -> Result<(Parameters, Vec<Diagnostic>)> {
    check_dimensional(dp)?;
    let (epsilon, delta, diagnostics) = match convention {
        ScalingConvention::Conventional => (
            dp.c / (dp.a * dp.d),
            dp.delta1 * dp.a * dp.r / dp.c,
            vec![Diagnostic::warning(
                "conventional scalings epsilon = c/(ad) and delta = delta1*a*r/c are not \
                 dimensionally consistent; pass ScalingConvention::SubstitutionDerived for \
                 epsilon = a*d/c, delta = delta1/r",
            )],
        ),
        ScalingConvention::SubstitutionDerived => {
            (dp.a * dp.d / dp.c, dp.delta1 / dp.r, Vec::new())
        }
    };
    let p = Parameters {
        gamma: dp.K / dp.a,
        alpha: dp.eta, // quality enters as the handling ratio itself
        xi: dp.eta * dp.A / dp.a,
        omega: dp.b * dp.a * dp.a,
        epsilon,
        delta,
        m: dp.m1 / dp.r,
    };
    Ok((p, diagnostics))
}

/// Boundedness constant for `W = x + y/delta` at comparison rate `k`.
pub fn bound_constant(p: &Parameters, k: f64) -> Result<GrowthBound> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(CoreError::InvalidInput(format!(
            "comparison rate k must be positive and finite, got {k}"
        )));
    }
    let prey_part = p.gamma * (1.0 + k) * (1.0 + k) / 4.0;
    let degenerate = p.epsilon <= ZERO_TOL;
    let drift_bound = if degenerate {
        prey_part
    } else {
        let s = p.xi / p.beta() + k / p.delta - p.m / p.delta;
        prey_part + p.delta / (4.0 * p.epsilon) * s * s
    };
    Ok(GrowthBound { drift_bound, ultimate_bound: drift_bound / k, degenerate })
}

/// Check the parameter invariants, returning findings rather than failing.
pub fn validate(p: &Parameters) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (name, v) in [
        ("gamma", p.gamma),
        ("alpha", p.alpha),
        ("xi", p.xi),
        ("omega", p.omega),
        ("epsilon", p.epsilon),
        ("delta", p.delta),
        ("m", p.m),
    ] {
        if !v.is_finite() {
            out.push(Diagnostic::error(format!("{name} must be finite, got {v}")));
        }
    }
    for (name, v) in [("gamma", p.gamma), ("delta", p.delta), ("m", p.m)] {
        if v.is_finite() && !(v > 0.0) {
            out.push(Diagnostic::error(format!("{name} must be positive, got {v}")));
        }
    }
    for (name, v) in [
        ("alpha", p.alpha),
        ("xi", p.xi),
        ("omega", p.omega),
        ("epsilon", p.epsilon),
    ] {
        if v.is_finite() && v < 0.0 {
            out.push(Diagnostic::error(format!("{name} must be nonnegative, got {v}")));
        }
    }
    if p.delta.is_finite() && p.m.is_finite() && p.delta <= p.m {
        out.push(Diagnostic::warning(format!(
            "delta <= m (delta = {}, m = {}): the predator cannot persist on prey alone",
            p.delta, p.m
        )));
    }
    out
}
