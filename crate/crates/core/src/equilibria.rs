//! Equilibrium location and stability classification.
//!
//! Boundary states sit at the origin, on the prey axis at carrying
//! capacity and, when predators persist on additional food alone, on the
//! predator axis. Interior states solve a quintic in the prey level
//! obtained by eliminating y between the two nontrivial nullclines; roots
//! are isolated through companion-matrix eigenvalues with Newton
//! polishing, backstopped by a sign-change bisection sweep.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::{jacobian_raw, Parameters, State, ZERO_TOL};

/// Trace/determinant magnitudes below this are not classified.
pub const STABILITY_TOL: f64 = 1e-9;

/// Equality tolerance when a nullcline-case predicate sits on its boundary.
const CASE_TIE_TOL: f64 = ZERO_TOL;

// Roots closer than this (relative) are merged into one with multiplicity.
const ROOT_CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    /// The origin: no prey, no predators.
    Trivial,
    /// Prey at carrying capacity, no predators.
    PredatorFree,
    /// Predators persisting on additional food alone, no prey.
    PreyFree,
    Interior,
}

/// Linearized character of an equilibrium.
///
/// The classifier refuses to guess within [`STABILITY_TOL`] of a trace or
/// determinant sign change and returns [`Stability::Degenerate`] there, so
/// exact centers also surface as `Degenerate`; the `Center` variant exists
/// for callers that classify by other means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Saddle,
    Center,
    Degenerate,
}

impl Stability {
    /// Whether the linearization attracts a neighbourhood.
    pub fn is_attracting(&self) -> bool {
        matches!(self, Stability::StableNode | Stability::StableFocus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub location: State,
    /// Eigenvalues of the Jacobian at `location`, descending real part.
    pub eigenvalues: [Complex<f64>; 2],
    pub stability: Stability,
}

/// Prey-nullcline shape class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreyCase {
    /// gamma > 1 + alpha xi: single hump crossing both intercepts.
    Case1,
    /// gamma < 1 + alpha xi and omega gamma^2 >= 3.
    Case2,
    /// gamma < 1 + alpha xi and omega gamma^2 < 3.
    Case3,
}

/// Predator-nullcline position class, decided by phi = delta xi - m (1 + alpha xi).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredatorCase {
    /// phi > 0: positive predator-axis intercept.
    CaseP,
    /// 0 > phi > -(delta - m)/(2 sqrt(omega)): no intercept, but the curve
    /// still reaches the positive quadrant.
    CaseQ,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullclineCase {
    pub prey_case: PreyCase,
    pub predator_case: PredatorCase,
    /// A classifying predicate sat exactly on its boundary; the reported
    /// case is the boundary-inclusive one.
    pub degenerate: bool,
    /// omega = 0 sent the CaseQ lower threshold to minus infinity.
    pub q_bound_unbounded: bool,
}

/// Coefficients of the interior-equilibrium polynomial, descending degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuinticCoefficients {
    pub c5: f64,
    pub c4: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuinticCoefficients {
    /// Coefficients as an array, highest degree first.
    pub fn as_array(&self) -> [f64; 6] {
        [self.c5, self.c4, self.c3, self.c2, self.c1, self.c0]
    }

    pub fn eval(&self, x: f64) -> f64 {
        poly_eval(&self.as_array(), x)
    }

    /// Largest coefficient magnitude, the scale of the residual gate.
    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }
}

/// A polynomial root with its clustered multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    pub multiplicity: usize,
}

/// Classify a planar linearization from its trace and determinant.
pub fn classify_stability(trace: f64, det: f64) -> Stability {
    if trace.abs() < STABILITY_TOL || det.abs() < STABILITY_TOL {
        return Stability::Degenerate;
    }
    if det < 0.0 {
        return Stability::Saddle;
    }
    let disc = trace * trace - 4.0 * det;
    match (trace < 0.0, disc >= 0.0) {
        (true, true) => Stability::StableNode,
        (true, false) => Stability::StableFocus,
        (false, true) => Stability::UnstableNode,
        (false, false) => Stability::UnstableFocus,
    }
}

fn make_equilibrium(p: &Parameters, kind: EquilibriumKind, x: f64, y: f64) -> Equilibrium {
    let j = jacobian_raw(p, x, y);
    Equilibrium {
        kind,
        location: State::new(x, y),
        eigenvalues: j.eigenvalues(),
        stability: classify_stability(j.trace(), j.det()),
    }
}

/// The equilibria on the coordinate axes.
///
/// Always returns the origin and the predator-free state; the prey-free
/// state appears only when phi > 0 and epsilon > 0, at
/// `y = phi / (epsilon (1 + alpha xi))`.
pub fn boundary_equilibria(p: &Parameters) -> Vec<Equilibrium> {
    let mut out = vec![
        make_equilibrium(p, EquilibriumKind::Trivial, 0.0, 0.0),
        make_equilibrium(p, EquilibriumKind::PredatorFree, p.gamma, 0.0),
    ];
    let phi = p.phi();
    if phi > 0.0 && p.epsilon > 0.0 {
        let y = phi / (p.epsilon * p.beta());
        out.push(make_equilibrium(p, EquilibriumKind::PreyFree, 0.0, y));
    }
    out
}

/// Coefficients of the prey-level polynomial for interior equilibria.
///
/// Eliminating y between the nullclines leaves
/// `delta (x + xi (omega x^2 + 1)) - m D - epsilon (1 - x/gamma) D^2 = 0`
/// with `D = (1 + alpha xi)(omega x^2 + 1) + x`; expanding gives the
/// quintic below. With epsilon = 0 the top three coefficients vanish and
/// the quadratic `omega phi x^2 + (delta - m) x + phi` remains.
pub fn quintic_coefficients(p: &Parameters) -> QuinticCoefficients {
    let (gamma, omega, epsilon) = (p.gamma, p.omega, p.epsilon);
    let beta = p.beta();
    let phi = p.phi();
    QuinticCoefficients {
        c5: epsilon * omega * omega * beta * beta / gamma,
        c4: epsilon * omega * beta * (2.0 - gamma * omega * beta) / gamma,
        c3: epsilon * (1.0 + 2.0 * omega * beta * beta - 2.0 * gamma * omega * beta) / gamma,
        c2: omega * phi + 2.0 * epsilon * beta / gamma
            - epsilon
            - 2.0 * epsilon * omega * beta * beta,
        c1: p.delta - p.m - 2.0 * epsilon * beta + epsilon * beta * beta / gamma,
        c0: phi - epsilon * beta * beta,
    }
}

// Horner evaluation; coefficients in descending degree.
fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}

fn poly_deriv_eval(coeffs: &[f64], x: f64) -> f64 {
    let n = coeffs.len();
    coeffs[..n - 1]
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, c)| acc * x + (n - 1 - i) as f64 * c)
}

fn newton_polish(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..60 {
        let f = poly_eval(coeffs, x);
        let df = poly_deriv_eval(coeffs, x);
        if df == 0.0 || !df.is_finite() {
            break;
        }
        let step = f / df;
        x -= step;
        if !x.is_finite() {
            return f64::NAN;
        }
        if step.abs() <= 1e-14 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

fn bisect(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = poly_eval(coeffs, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = poly_eval(coeffs, mid);
        if f_mid == 0.0 || (hi - lo) <= 1e-15 * mid.abs().max(1.0) {
            return mid;
        }
        if (f_lo < 0.0) != (f_mid < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// All real roots in `(0, x_max]`, polished below the residual gate
/// `1e-10 * max(1, largest coefficient)`, ascending, with multiplicity.
///
/// Isolation goes through the companion matrix of the leading-zero
/// deflated polynomial; a 4096-interval sign-change sweep with bisection
/// picks up anything the eigenvalue step missed or failed to polish.
pub fn real_positive_roots(q: &QuinticCoefficients, x_max: f64) -> Result<Vec<Root>> {
    if !(x_max > 0.0) || !x_max.is_finite() {
        return Err(CoreError::InvalidInput(format!(
            "root search needs x_max > 0, got {x_max}"
        )));
    }
    let all = q.as_array();
    let scale = q.max_abs();
    if scale == 0.0 {
        return Err(CoreError::InvalidInput(
            "all polynomial coefficients are zero".into(),
        ));
    }
    // Deflate leading coefficients that are zero at working precision.
    let mut start = 0;
    while start < all.len() - 1 && all[start].abs() <= 1e-14 * scale {
        start += 1;
    }
    let coeffs = &all[start..];
    let degree = coeffs.len() - 1;
    let gate = 1e-10 * scale.max(1.0);
    let upper = x_max * (1.0 + 1e-12) + 1e-12;

    let mut accepted: Vec<f64> = Vec::new();
    if degree == 1 {
        let x = -coeffs[1] / coeffs[0];
        if x > ZERO_TOL && x <= upper {
            accepted.push(x);
        }
    } else if degree >= 2 {
        let lead = coeffs[0];
        let n = degree;
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            // last column holds the negated monic low-order coefficients
            companion[(i, n - 1)] = -coeffs[n - i] / lead;
        }
        for lambda in companion.complex_eigenvalues().iter() {
            if lambda.im.abs() > 1e-6 * (1.0 + lambda.re.abs()) {
                continue;
            }
            let x = newton_polish(coeffs, lambda.re);
            if !x.is_finite() || x <= ZERO_TOL || x > upper {
                continue;
            }
            if poly_eval(&all, x).abs() < gate {
                accepted.push(x);
            }
        }
    }

    // Sign-change sweep over (0, x_max]; bisection covers any interval
    // whose crossing has no accepted root yet.
    if degree >= 1 {
        let cells = 4096usize;
        let h = x_max / cells as f64;
        let mut prev_x = h * 1e-6; // just inside the open lower end
        let mut prev_f = poly_eval(&all, prev_x);
        for i in 1..=cells {
            let x = h * i as f64;
            let f = poly_eval(&all, x);
            if (prev_f < 0.0) != (f < 0.0) {
                let covered = accepted
                    .iter()
                    .any(|r| (prev_x..=x).contains(r) || (r - x).abs() < h);
                if !covered {
                    let root = bisect(&all, prev_x, x);
                    if poly_eval(&all, root).abs() < gate
                        && root > ZERO_TOL
                        && root <= upper
                    {
                        accepted.push(root);
                    }
                }
            }
            prev_x = x;
            prev_f = f;
        }
    }

    accepted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut roots: Vec<Root> = Vec::new();
    for x in accepted {
        match roots.last_mut() {
            Some(last) if (x - last.x).abs() <= ROOT_CLUSTER_TOL * x.abs().max(1.0) => {
                // keep the better-polished representative
                if q.eval(x).abs() < q.eval(last.x).abs() {
                    last.x = x;
                }
                last.multiplicity += 1;
            }
            _ => roots.push(Root { x, multiplicity: 1 }),
        }
    }
    Ok(roots)
}

/// Predator level paired with an interior prey root.
///
/// For epsilon > 0 this is the predator-nullcline height
/// `((delta - m) x + phi (omega x^2 + 1)) / (epsilon D)`; for epsilon = 0
/// the predator equation no longer involves y and the prey-nullcline
/// height `(1 - x/gamma) D` applies.
pub fn interior_y(p: &Parameters, x: f64) -> f64 {
    let d = p.response_denom(x);
    if p.epsilon > 0.0 {
        ((p.delta - p.m) * x + p.phi() * (p.omega * x * x + 1.0)) / (p.epsilon * d)
    } else {
        (1.0 - x / p.gamma) * d
    }
}

fn nullcline_residuals(p: &Parameters, x: f64, y: f64) -> (f64, f64) {
    let d = p.response_denom(x);
    let prey = 1.0 - x / p.gamma - y / d;
    let predator =
        p.delta * (x + p.xi * (p.omega * x * x + 1.0)) / d - p.m - p.epsilon * y;
    (prey, predator)
}

/// Interior equilibria: admissible quintic roots with positive predator
/// level, each verified to zero both nullcline residuals within 1e-8.
///
/// Roots beyond gamma are discarded (the prey nullcline forces y <= 0
/// there). The empty list is a valid outcome; a parameter set that zeroes
/// the whole polynomial (a nullcline coincidence) also yields the empty
/// list rather than attempting to enumerate a continuum.
pub fn interior_equilibria(p: &Parameters) -> Vec<Equilibrium> {
    let q = quintic_coefficients(p);
    if q.max_abs() == 0.0 {
        return Vec::new();
    }
    let roots = match real_positive_roots(&q, p.gamma) {
        Ok(roots) => roots,
        Err(_) => return Vec::new(),
    };
    let mut out = Vec::new();
    for root in roots {
        let x = root.x;
        let y = interior_y(p, x);
        if !(y > 0.0) {
            continue;
        }
        let (r_prey, r_pred) = nullcline_residuals(p, x, y);
        if r_prey.abs() >= 1e-8 || r_pred.abs() >= 1e-8 {
            continue;
        }
        out.push(make_equilibrium(p, EquilibriumKind::Interior, x, y));
    }
    out
}

/// Classify the shapes of the two nontrivial nullclines.
pub fn nullcline_case(p: &Parameters) -> NullclineCase {
    let beta = p.beta();
    let mut degenerate = false;

    let prey_gap = p.gamma - beta;
    let hump = p.omega * p.gamma * p.gamma - 3.0;
    if prey_gap.abs() <= CASE_TIE_TOL || (prey_gap < 0.0 && hump.abs() <= CASE_TIE_TOL) {
        degenerate = true;
    }
    let prey_case = if prey_gap >= 0.0 {
        PreyCase::Case1
    } else if hump >= 0.0 {
        PreyCase::Case2
    } else {
        PreyCase::Case3
    };

    let phi = p.phi();
    let mut q_bound_unbounded = false;
    let predator_case = if phi >= 0.0 {
        if phi.abs() <= CASE_TIE_TOL {
            degenerate = true;
        }
        PredatorCase::CaseP
    } else {
        let q_bound = if p.omega > 0.0 {
            -(p.delta - p.m) / (2.0 * p.omega.sqrt())
        } else {
            q_bound_unbounded = true;
            f64::NEG_INFINITY
        };
        if (phi - q_bound).abs() <= CASE_TIE_TOL {
            degenerate = true;
        }
        if phi >= q_bound {
            PredatorCase::CaseQ
        } else {
            PredatorCase::Neither
        }
    };

    NullclineCase { prey_case, predator_case, degenerate, q_bound_unbounded }
}

/// The predator nullcline, which degenerates for epsilon = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PredatorNullcline {
    /// Heights over the sampling grid (epsilon > 0).
    Curve(Vec<f64>),
    /// epsilon = 0: the nullcline is vertical lines at these prey levels.
    VerticalLines(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullclineCurves {
    /// Prey-nullcline heights `(1 - x/gamma) D(x)` over the grid.
    pub prey_y: Vec<f64>,
    pub predator: PredatorNullcline,
}

/// Evaluate both nontrivial nullclines over a prey grid.
pub fn nullcline_curves(p: &Parameters, x_grid: &[f64]) -> NullclineCurves {
    let prey_y = x_grid
        .iter()
        .map(|&x| (1.0 - x / p.gamma) * p.response_denom(x))
        .collect();
    let predator = if p.epsilon > 0.0 {
        PredatorNullcline::Curve(x_grid.iter().map(|&x| interior_y(p, x)).collect())
    } else {
        let x_max = x_grid
            .iter()
            .fold(p.gamma, |acc, &x| acc.max(x));
        let lines = real_positive_roots(&quintic_coefficients(p), x_max)
            .map(|roots| roots.into_iter().map(|r| r.x).collect())
            .unwrap_or_default();
        PredatorNullcline::VerticalLines(lines)
    };
    NullclineCurves { prey_y, predator }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::vector_field;
    use crate::simulate::integrate;
    use crate::test_util::{random_parameters, set_a, set_b};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rayon::prelude::*;

    fn find(eqs: &[Equilibrium], kind: EquilibriumKind) -> Option<&Equilibrium> {
        eqs.iter().find(|e| e.kind == kind)
    }

    #[test]
    fn boundary_equilibria_set_a() {
        let eqs = boundary_equilibria(&set_a(2.0));
        assert_eq!(eqs.len(), 2);

        let e0 = find(&eqs, EquilibriumKind::Trivial).unwrap();
        assert_eq!(e0.location, State::new(0.0, 0.0));
        assert_eq!(e0.stability, Stability::Saddle);
        assert_relative_eq!(e0.eigenvalues[0].re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(e0.eigenvalues[1].re, -2.0 / 3.0, max_relative = 1e-12);

        let e1 = find(&eqs, EquilibriumKind::PredatorFree).unwrap();
        assert_eq!(e1.location, State::new(1.0, 0.0));
        assert_eq!(e1.stability, Stability::StableNode);
        assert_relative_eq!(e1.eigenvalues[0].re, -0.5, max_relative = 1e-12);
        assert_relative_eq!(e1.eigenvalues[1].re, -1.0, max_relative = 1e-14);
    }

    #[test]
    fn prey_free_state_appears_with_positive_phi() {
        let eqs = boundary_equilibria(&set_a(3.5));
        let e2 = find(&eqs, EquilibriumKind::PreyFree).expect("phi = 1 > 0");
        assert_relative_eq!(e2.location.y, 4.0 / 9.0, max_relative = 1e-12);
        assert_eq!(e2.stability, Stability::Saddle);
        // closed-form eigenvalues 1 - phi/(eps beta^2) and -phi/beta
        assert_relative_eq!(e2.eigenvalues[0].re, 1.0 - 1.0 / 10.125, max_relative = 1e-12);
        assert_relative_eq!(e2.eigenvalues[1].re, -1.0 / 4.5, max_relative = 1e-12);

        assert!(find(&boundary_equilibria(&set_a(0.0)), EquilibriumKind::PreyFree).is_none());
        let mut p = set_a(3.5);
        p.epsilon = 0.0;
        assert!(find(&boundary_equilibria(&p), EquilibriumKind::PreyFree).is_none());
    }

    #[test]
    fn prey_free_stable_node_when_phi_large() {
        // phi > epsilon beta^2 makes the prey-free state attracting.
        let p = Parameters {
            gamma: 1.0,
            alpha: 0.1,
            xi: 3.0,
            omega: 4.0,
            epsilon: 0.05,
            delta: 8.0,
            m: 6.0,
        };
        let phi = p.phi();
        assert!(phi > p.epsilon * p.beta() * p.beta());
        let eqs = boundary_equilibria(&p);
        let e2 = find(&eqs, EquilibriumKind::PreyFree).unwrap();
        assert_eq!(e2.stability, Stability::StableNode);
    }

    #[test]
    fn boundary_eigenvalues_match_closed_forms_randomly() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..300 {
            let p = random_parameters(&mut rng);
            let beta = p.beta();
            let phi = p.phi();
            let eqs = boundary_equilibria(&p);

            let e0 = find(&eqs, EquilibriumKind::Trivial).unwrap();
            let mut expect = [1.0, phi / beta];
            expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (ev, want) in e0.eigenvalues.iter().zip(expect) {
                assert_relative_eq!(ev.re, want, max_relative = 1e-10, epsilon = 1e-12);
                assert_eq!(ev.im, 0.0);
            }

            let e1 = find(&eqs, EquilibriumKind::PredatorFree).unwrap();
            let d = p.response_denom(p.gamma);
            let lambda2 = ((p.delta - p.m) * p.gamma
                + phi * (p.omega * p.gamma * p.gamma + 1.0))
                / d;
            let mut expect = [-1.0, lambda2];
            expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (ev, want) in e1.eigenvalues.iter().zip(expect) {
                assert_relative_eq!(ev.re, want, max_relative = 1e-9, epsilon = 1e-11);
            }

            if let Some(e2) = find(&eqs, EquilibriumKind::PreyFree) {
                let mut expect = [1.0 - phi / (p.epsilon * beta * beta), -phi / beta];
                expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
                for (ev, want) in e2.eigenvalues.iter().zip(expect) {
                    assert_relative_eq!(ev.re, want, max_relative = 1e-9, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn quintic_reduces_to_quadratic_without_competition() {
        let mut p = set_a(2.0);
        p.epsilon = 0.0;
        let q = quintic_coefficients(&p);
        assert_eq!((q.c5, q.c4, q.c3), (0.0, 0.0, 0.0));
        assert_relative_eq!(q.c2, -8.0, max_relative = 1e-14);
        assert_relative_eq!(q.c1, 2.0, max_relative = 1e-14);
        assert_relative_eq!(q.c0, -2.0, max_relative = 1e-14);
    }

    #[test]
    fn quintic_constant_term_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let p = random_parameters(&mut rng);
            let q = quintic_coefficients(&p);
            let beta = p.beta();
            assert_relative_eq!(
                q.c0,
                p.phi() - p.epsilon * beta * beta,
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn quintic_equals_denominator_times_nullcline_residual() {
        // Substituting the prey-nullcline height into the predator
        // equation and multiplying by D must reproduce the polynomial.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..500 {
            let p = random_parameters(&mut rng);
            let q = quintic_coefficients(&p);
            let x = rng.gen_range(0.01..p.gamma);
            let d = p.response_denom(x);
            let y_prey = (1.0 - x / p.gamma) * d;
            let residual =
                p.delta * (x + p.xi * (p.omega * x * x + 1.0)) / d - p.m - p.epsilon * y_prey;
            let lhs = q.eval(x);
            let rhs = d * residual;
            assert!(
                (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                "polynomial {lhs} vs D * residual {rhs} at x = {x} with {p:?}"
            );
        }
    }

    #[test]
    fn roots_of_constructed_factorizations() {
        // 3 (x - 0.3)(x - 0.7) = 3x^2 - 3x + 0.63
        let q = QuinticCoefficients { c5: 0.0, c4: 0.0, c3: 0.0, c2: 3.0, c1: -3.0, c0: 0.63 };
        let roots = real_positive_roots(&q, 1.0).unwrap();
        assert_eq!(roots.len(), 2);
        assert_relative_eq!(roots[0].x, 0.3, max_relative = 1e-10);
        assert_relative_eq!(roots[1].x, 0.7, max_relative = 1e-10);
        assert_eq!((roots[0].multiplicity, roots[1].multiplicity), (1, 1));

        // the no-competition set-A quadratic has no real roots
        let q = QuinticCoefficients { c5: 0.0, c4: 0.0, c3: 0.0, c2: -8.0, c1: 2.0, c0: -2.0 };
        assert!(real_positive_roots(&q, 1.0).unwrap().is_empty());

        // (x - 0.5)^2 reports once with multiplicity 2
        let q = QuinticCoefficients { c5: 0.0, c4: 0.0, c3: 0.0, c2: 1.0, c1: -1.0, c0: 0.25 };
        let roots = real_positive_roots(&q, 1.0).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0].x, 0.5, max_relative = 1e-6);
        assert_eq!(roots[0].multiplicity, 2);

        // full quintic with five known roots
        // (x-0.2)(x-0.4)(x-0.6)(x-0.8)(x-1.0)
        let q = QuinticCoefficients {
            c5: 1.0,
            c4: -3.0,
            c3: 3.4,
            c2: -1.8,
            c1: 0.4384,
            c0: -0.0384,
        };
        let roots = real_positive_roots(&q, 1.0).unwrap();
        assert_eq!(roots.len(), 5);
        for (root, want) in roots.iter().zip([0.2, 0.4, 0.6, 0.8, 1.0]) {
            assert_relative_eq!(root.x, want, max_relative = 1e-8);
        }

        // roots above x_max are excluded
        let roots = real_positive_roots(&q, 0.5).unwrap();
        assert_eq!(roots.len(), 2);

        let zero = QuinticCoefficients { c5: 0.0, c4: 0.0, c3: 0.0, c2: 0.0, c1: 0.0, c0: 0.0 };
        assert!(matches!(
            real_positive_roots(&zero, 1.0),
            Err(CoreError::InvalidInput(_))
        ));
    }

    #[test]
    fn roots_match_dense_bisection_oracle() {
        // Brute-force oracle: one million sign-change cells over (0, x_max],
        // each crossing refined by bisection.
        fn oracle(coeffs: &[f64; 6], x_max: f64) -> Vec<f64> {
            let cells = 1_000_000usize;
            let h = x_max / cells as f64;
            let mut out = Vec::new();
            let mut prev_x = h * 1e-3;
            let mut prev_f = poly_eval(coeffs, prev_x);
            for i in 1..=cells {
                let x = h * i as f64;
                let f = poly_eval(coeffs, x);
                if (prev_f < 0.0) != (f < 0.0) {
                    out.push(bisect(coeffs, prev_x, x));
                }
                prev_x = x;
                prev_f = f;
            }
            out
        }

        let seeds: Vec<u64> = (0..1000).collect();
        seeds.par_iter().for_each(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
            let q = QuinticCoefficients {
                c5: rng.gen_range(-5.0..5.0),
                c4: rng.gen_range(-5.0..5.0),
                c3: rng.gen_range(-5.0..5.0),
                c2: rng.gen_range(-5.0..5.0),
                c1: rng.gen_range(-5.0..5.0),
                c0: rng.gen_range(-5.0..5.0),
            };
            let x_max = rng.gen_range(0.5..4.0);
            let roots = real_positive_roots(&q, x_max).unwrap();
            let expected = oracle(&q.as_array(), x_max);
            // every odd-multiplicity crossing must be reported
            for e in &expected {
                assert!(
                    roots.iter().any(|r| (r.x - e).abs() < 1e-6 * e.max(1.0)),
                    "missed oracle root {e} of {q:?} on (0, {x_max}]"
                );
            }
            // every reported odd-multiplicity root must be a crossing
            for r in roots.iter().filter(|r| r.multiplicity % 2 == 1) {
                assert!(
                    expected.iter().any(|e| (r.x - e).abs() < 1e-6 * r.x.max(1.0)),
                    "spurious root {} of {q:?} on (0, {x_max}]",
                    r.x
                );
            }
        });
    }

    #[test]
    fn no_interior_without_competition_at_set_a() {
        let mut p = set_a(2.0);
        p.epsilon = 0.0;
        assert!(interior_equilibria(&p).is_empty());
        // existence condition phi4 < 0 explains the emptiness
        let phi4 = p.phi() + (p.delta - p.m) / (2.0 * p.omega.sqrt());
        assert_relative_eq!(phi4, -1.5, max_relative = 1e-14);
    }

    #[test]
    fn no_interior_at_set_a_with_competition() {
        assert!(interior_equilibria(&set_a(2.0)).is_empty());
    }

    #[test]
    fn interior_matches_simulation_attractor_when_stable() {
        // Three interior states coexist here: an unstable node, a saddle
        // and the attracting high-prey node the flow settles on.
        let p = set_b(0.03);
        let eqs = interior_equilibria(&p);
        assert_eq!(eqs.len(), 3);
        let stable: Vec<&Equilibrium> =
            eqs.iter().filter(|e| e.stability.is_attracting()).collect();
        assert_eq!(stable.len(), 1);
        let eq = stable[0];

        let s0 = State::new(eq.location.x * 1.05, eq.location.y * 1.05);
        let end = integrate(&p, s0, 4000.0, 0.01).unwrap().last_state().unwrap();
        assert!((end.x - eq.location.x).abs() < 1e-4);
        assert!((end.y - eq.location.y).abs() < 1e-4);
    }

    #[test]
    fn interior_unstable_below_hopf_threshold() {
        let eqs = interior_equilibria(&set_b(0.024));
        assert_eq!(eqs.len(), 1);
        assert!(matches!(
            eqs[0].stability,
            Stability::UnstableFocus | Stability::UnstableNode
        ));
    }

    #[test]
    fn interior_residuals_and_classification_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut seen_interior = 0usize;
        for _ in 0..1000 {
            let p = random_parameters(&mut rng);
            let eqs = interior_equilibria(&p);
            assert!(eqs.len() <= 5);
            if p.epsilon == 0.0 {
                assert!(eqs.len() <= 2);
            }
            for eq in &eqs {
                seen_interior += 1;
                let (dx, dy) = vector_field(&p, eq.location).unwrap();
                assert!(
                    dx.abs() < 1e-8 && dy.abs() < 1e-8,
                    "field residual ({dx}, {dy}) at {:?} for {p:?}",
                    eq.location
                );
                let j = crate::model::jacobian(&p, eq.location).unwrap();
                assert_eq!(eq.stability, classify_stability(j.trace(), j.det()));
            }
        }
        assert!(seen_interior > 50, "fixture produced only {seen_interior} interior states");
    }

    #[test]
    fn prey_free_existence_toggles_across_phi_zero() {
        // phi = 0 at xi = m/(delta - m alpha) = 3 for the set-A rates
        for (xi, expected) in [(3.0 - 1e-3, false), (3.0 + 1e-3, true)] {
            let present = find(
                &boundary_equilibria(&set_a(xi)),
                EquilibriumKind::PreyFree,
            )
            .is_some();
            assert_eq!(present, expected, "at xi = {xi}");
        }
    }

    #[test]
    fn nullcline_cases_from_examples() {
        let case = nullcline_case(&set_a(2.0));
        assert_eq!(case.prey_case, PreyCase::Case2);
        assert!(!case.degenerate);

        let case = nullcline_case(&set_b(0.03));
        assert_eq!(case.prey_case, PreyCase::Case1);
        assert_eq!(case.predator_case, PredatorCase::CaseQ);

        let case = nullcline_case(&set_a(3.5));
        assert_eq!(case.predator_case, PredatorCase::CaseP);

        // phi = -2 sits below the CaseQ bound -0.5 at set A
        let case = nullcline_case(&set_a(2.0));
        assert_eq!(case.predator_case, PredatorCase::Neither);
    }

    #[test]
    fn nullcline_case_ties_and_omega_zero() {
        // gamma exactly equal to 1 + alpha xi
        let p = Parameters {
            gamma: 3.0,
            alpha: 1.0,
            xi: 2.0,
            omega: 1.0,
            epsilon: 0.1,
            delta: 8.0,
            m: 6.0,
        };
        let case = nullcline_case(&p);
        assert_eq!(case.prey_case, PreyCase::Case1);
        assert!(case.degenerate);

        // omega = 0 with phi < 0 keeps CaseQ via the unbounded threshold
        let mut p = set_a(2.0);
        p.omega = 0.0;
        let case = nullcline_case(&p);
        assert_eq!(case.predator_case, PredatorCase::CaseQ);
        assert!(case.q_bound_unbounded);
    }

    #[test]
    fn nullcline_curve_intercepts_and_peak() {
        let p = set_a(3.5);
        let grid = [0.0, 0.5, 1.0];
        let curves = nullcline_curves(&p, &grid);
        // prey curve passes through (0, 1 + alpha xi) and (gamma, 0)
        assert_relative_eq!(curves.prey_y[0], 4.5, max_relative = 1e-14);
        assert!(curves.prey_y[2].abs() < 1e-14);

        let PredatorNullcline::Curve(pred) = &curves.predator else {
            panic!("epsilon > 0 must give a curve");
        };
        // predator-axis intercept phi/(eps beta)
        assert_relative_eq!(pred[0], 4.0 / 9.0, max_relative = 1e-12);
        // extremum at x = 1/sqrt(omega) with the closed-form height
        let x_hat = 0.5;
        let d_hat = p.response_denom(x_hat);
        let peak = ((p.delta - p.m) / p.omega.sqrt() + 2.0 * p.phi()) / (p.epsilon * d_hat);
        assert_relative_eq!(pred[1], peak, max_relative = 1e-12);
        let dense: Vec<f64> = (0..=2000).map(|i| i as f64 * 1.0 / 2000.0).collect();
        let dense_curves = nullcline_curves(&p, &dense);
        let PredatorNullcline::Curve(dense_pred) = &dense_curves.predator else {
            unreachable!();
        };
        let grid_max = dense_pred.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(grid_max <= peak + 1e-12);
        assert_relative_eq!(grid_max, peak, max_relative = 1e-5);
    }

    #[test]
    fn epsilon_zero_gives_vertical_line_descriptor() {
        let p = Parameters {
            gamma: 2.0,
            alpha: 1.0,
            xi: 0.5,
            omega: 0.5,
            epsilon: 0.0,
            delta: 8.0,
            m: 6.0,
        };
        // phi = 4 - 9 = -5; quadratic -2.5 x^2 + 2x - 5 < 0: no lines
        let curves = nullcline_curves(&p, &[0.0, 1.0, 2.0]);
        let PredatorNullcline::VerticalLines(lines) = &curves.predator else {
            panic!("epsilon = 0 must give vertical lines");
        };
        assert!(lines.is_empty());

        // delta x / ((omega x^2 + 1) + x) = m has solutions for omega small
        let p = Parameters {
            gamma: 10.0,
            alpha: 0.0,
            xi: 0.0,
            omega: 0.05,
            epsilon: 0.0,
            delta: 2.0,
            m: 0.5,
        };
        let curves = nullcline_curves(&p, &[0.0, 5.0, 10.0]);
        let PredatorNullcline::VerticalLines(lines) = &curves.predator else {
            panic!();
        };
        assert!(!lines.is_empty());
        for &x in lines {
            let d = p.response_denom(x);
            assert_relative_eq!(p.delta * x / d, p.m, max_relative = 1e-9);
        }
    }

    #[test]
    fn sampled_nullcline_intersections_match_interior_equilibria() {
        for p in [set_b(0.03), set_b(0.024), set_a(3.5)] {
            let n = 20_000usize;
            let grid: Vec<f64> = (1..n)
                .map(|i| p.gamma * i as f64 / n as f64)
                .collect();
            let curves = nullcline_curves(&p, &grid);
            let PredatorNullcline::Curve(pred) = &curves.predator else {
                unreachable!()
            };
            let mut crossings = Vec::new();
            for i in 1..grid.len() {
                let a = curves.prey_y[i - 1] - pred[i - 1];
                let b = curves.prey_y[i] - pred[i];
                if (a < 0.0) != (b < 0.0) {
                    crossings.push(0.5 * (grid[i - 1] + grid[i]));
                }
            }
            let eqs = interior_equilibria(&p);
            assert_eq!(
                crossings.len(),
                eqs.len(),
                "crossings {crossings:?} vs equilibria {eqs:?} for {p:?}"
            );
            let h = p.gamma / n as f64;
            for (c, eq) in crossings.iter().zip(&eqs) {
                assert!((c - eq.location.x).abs() <= h);
            }
        }
    }

    #[test]
    fn classifier_tolerance_band() {
        assert_eq!(classify_stability(0.0, 1.0), Stability::Degenerate);
        assert_eq!(classify_stability(1.0, 0.0), Stability::Degenerate);
        assert_eq!(classify_stability(-2.0, -1.0), Stability::Saddle);
        assert_eq!(classify_stability(-2.0, 0.5), Stability::StableNode);
        assert_eq!(classify_stability(-0.1, 0.5), Stability::StableFocus);
        assert_eq!(classify_stability(2.0, 0.5), Stability::UnstableNode);
        assert_eq!(classify_stability(0.1, 0.5), Stability::UnstableFocus);
    }
}
