//! Factorization of a separated second-order operator into a ladder pair
//! A = d/dx + f'/2f - R and A+ = d/dx + f'/2f + R. The superpotential R is
//! found by matching power-basis coefficients in the Riccati condition
//! R' - R^2 = epsilon + Gamma, and every derived identity (products,
//! commutators, intertwining) is verified by exact operator algebra.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::staeckel::{SeparatedEquation, StaeckelError};
use crate::symexpr::{Coefficient, DiffOperator, Poly, SymExprError, SymbolTable, SymbolicFunction};

#[derive(Debug, thiserror::Error)]
pub enum FactorizeError {
    #[error("no superpotential of the form a/x + b + c*x matches: {0}")]
    NotFactorizableInBasis(String),
    #[error("discriminant is not a perfect square in the coefficient ring: {0} (specialize the constants numerically and retry)")]
    NotPerfectSquare(String),
    #[error("normalization radicand lambda - epsilon is not positive (lambda = {lambda}, epsilon = {epsilon})")]
    NonPositiveRadicand { lambda: String, epsilon: String },
    #[error("not representable in the power basis: {0}")]
    NotRepresentable(String),
    #[error("no index shift turns the operator product into a shifted copy of the separated operator: {0}")]
    NoIntertwining(String),
    #[error(transparent)]
    Sym(#[from] SymExprError),
    #[error(transparent)]
    Staeckel(#[from] StaeckelError),
}

/// A particular solution of the Riccati condition, with its branch label
/// and the factorization constant epsilon = R' - R^2 - Gamma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Superpotential {
    pub r: SymbolicFunction,
    pub epsilon: Coefficient,
    pub branch: String,
}

/// The ladder pair built from one superpotential over one weight f.
#[derive(Debug, Clone)]
pub struct LadderPair {
    pub a: DiffOperator,
    pub a_plus: DiffOperator,
    pub superpotential: Superpotential,
    pub f: SymbolicFunction,
}

/// Which operator of the pair lowers the angular index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LadderRole {
    APlusLowers,
    APlusRaises,
}

/// Exact operator identities connecting the ladder pair to the separated
/// operator H and its index-shifted copy.
#[derive(Debug, Clone)]
pub struct IntertwiningRelation {
    /// The separated operator at the unshifted index.
    pub h: DiffOperator,
    /// H with the index symbol shifted so that compose(A+, A) = h_shifted + shift_down.
    pub h_shifted: DiffOperator,
    /// Constant in compose(A, A+) = H + shift_up (equals the superpotential's epsilon).
    pub shift_up: Coefficient,
    /// Constant in compose(A+, A) = h_shifted + shift_down.
    pub shift_down: Coefficient,
    /// Eigenvalue step per application of the lowering operator:
    /// h_shifted o A+ = A+ o H - delta * A+, delta = shift_down - shift_up.
    pub delta: Coefficient,
    pub role: LadderRole,
    /// [A+, A] as an order-zero operator.
    pub commutator: DiffOperator,
    /// [H, A] = A o (multiplication by this function); A stays on the left.
    pub h_commutator_multiplier: SymbolicFunction,
    pub relation: String,
    pub audit_flags: Vec<String>,
}

/// Inverse square root carried symbolically: c = 1 / sqrt(radicand).
#[derive(Debug, Clone)]
pub struct NormConstant {
    pub radicand: Coefficient,
}

impl NormConstant {
    /// Exact value when the radicand is a perfect square in the ring.
    pub fn exact(&self) -> Option<Coefficient> {
        self.radicand.sqrt().and_then(|s| s.inv().ok())
    }

    pub fn eval_f64(&self, bindings: &BTreeMap<String, f64>) -> Result<f64, FactorizeError> {
        let v = self.radicand.eval_f64(bindings)?;
        if !(v > 0.0) {
            return Err(FactorizeError::NonPositiveRadicand {
                lambda: format!("radicand {v}"),
                epsilon: self.radicand.to_string(),
            });
        }
        Ok(1.0 / v.sqrt())
    }
}

fn half(table: &Arc<SymbolTable>) -> Coefficient {
    Coefficient::from_rational(table, &BigRational::new(BigInt::one(), BigInt::from(2)))
}

/// Gamma = (1/4f^2)(f')^2 - (1/2f)f'' + sum_{n != m} k_n^2 Phi_mn - v,
/// written as coupling - (w' + w^2) with w = f'/2f.
pub fn gamma_of(eq: &SeparatedEquation) -> Result<SymbolicFunction, FactorizeError> {
    let w = eq
        .log_derivative()
        .map_err(|e| FactorizeError::NotRepresentable(e.to_string()))?
        .scale(&half(eq.table()));
    Ok(eq.coupling_term().sub(&w.differentiate().add(&w.mul(&w))))
}

/// All superpotentials R = a/x + b + c*x solving R' - R^2 = epsilon + Gamma,
/// by exact coefficient matching:
///   a^2 + a + g(-2) = 0,  -2ab = g(-1),  -2bc = g(1),  -c^2 = g(2),
///   epsilon = c - b^2 - 2ac - g(0).
pub fn solve_riccati_power_ansatz(
    gamma: &SymbolicFunction,
) -> Result<Vec<Superpotential>, FactorizeError> {
    if let Some(p) = gamma.powers().find(|&p| !(-2..=2).contains(&p)) {
        return Err(FactorizeError::NotFactorizableInBasis(format!(
            "Gamma carries the power x^{p}, outside {{-2..2}}: {gamma}"
        )));
    }
    let table = gamma.table().clone();
    let g = |p: i64| gamma.coefficient(p);
    let zero = Coefficient::zero(&table);
    let one = Coefficient::one(&table);

    // a from the quadratic a^2 + a + g(-2) = 0
    let disc = one.sub(&g(-2).mul_i64(4));
    let d = disc.sqrt().ok_or_else(|| {
        FactorizeError::NotPerfectSquare(format!("1 - 4*(x^-2 coefficient) = {disc}"))
    })?;
    let h = half(&table);
    let mut a_branches = vec![d.sub(&one).mul(&h)];
    let a_minus = d.neg().sub(&one).mul(&h);
    if !a_branches.contains(&a_minus) {
        a_branches.push(a_minus);
    }

    // c from -c^2 = g(2)
    let c_branches = if g(2).is_zero() {
        vec![zero.clone()]
    } else {
        let s = g(2).neg().sqrt().ok_or_else(|| {
            FactorizeError::NotPerfectSquare(format!("-(x^2 coefficient) = {}", g(2).neg()))
        })?;
        vec![s.clone(), s.neg()]
    };

    let mut out: Vec<Superpotential> = Vec::new();
    for a in &a_branches {
        for c in &c_branches {
            let b = if !a.is_zero() {
                g(-1).neg().div(&a.mul_i64(2))?
            } else if !c.is_zero() {
                g(1).neg().div(&c.mul_i64(2))?
            } else if g(-1).is_zero() && g(1).is_zero() {
                zero.clone()
            } else {
                continue;
            };
            // cross-check both linear-term equations
            if a.mul(&b).mul_i64(-2) != g(-1) || b.mul(c).mul_i64(-2) != g(1) {
                continue;
            }
            let epsilon = c
                .sub(&b.mul(&b))
                .sub(&a.mul(c).mul_i64(2))
                .sub(&g(0));
            let mut r = SymbolicFunction::zero(&table);
            r.set(-1, a.clone());
            r.set(0, b.clone());
            r.set(1, c.clone());
            let sp = Superpotential {
                branch: format!("a = {a}, b = {b}, c = {c}"),
                r,
                epsilon,
            };
            debug_assert!(verify_riccati_residual(&sp, gamma).is_zero());
            if !out.contains(&sp) {
                out.push(sp);
            }
        }
    }
    if out.is_empty() {
        return Err(FactorizeError::NotFactorizableInBasis(format!(
            "the linear-term equations admit no consistent b for Gamma = {gamma}"
        )));
    }
    Ok(out)
}

/// Fallback for symbolically non-square discriminants: specialize the
/// constants to explicit rationals first, then match.
pub fn solve_riccati_numeric(
    gamma: &SymbolicFunction,
    bindings: &BTreeMap<String, BigRational>,
) -> Result<Vec<Superpotential>, FactorizeError> {
    solve_riccati_power_ansatz(&gamma.substitute_numeric(bindings)?)
}

/// differentiate(R) - R^2 - Gamma - epsilon; identically zero iff the
/// superpotential solves the Riccati condition.
pub fn verify_riccati_residual(sp: &Superpotential, gamma: &SymbolicFunction) -> SymbolicFunction {
    sp.r
        .differentiate()
        .sub(&sp.r.mul(&sp.r))
        .sub(gamma)
        .sub(&SymbolicFunction::constant(sp.epsilon.clone()))
}

pub fn build_ladder_pair(
    f: &SymbolicFunction,
    sp: &Superpotential,
) -> Result<LadderPair, FactorizeError> {
    let w = f
        .differentiate()
        .div(f)
        .map_err(|_| FactorizeError::NotRepresentable(format!("f'/2f for f = {f}")))?
        .scale(&half(f.table()));
    Ok(LadderPair {
        a: DiffOperator::monic_first_order(w.sub(&sp.r)),
        a_plus: DiffOperator::monic_first_order(w.add(&sp.r)),
        superpotential: sp.clone(),
        f: f.clone(),
    })
}

/// Order-zero constant of an operator, if it is one.
fn as_constant(op: &DiffOperator) -> Option<Coefficient> {
    let m = op.as_multiplication()?;
    if m.is_constant() {
        Some(m.coefficient(0))
    } else {
        None
    }
}

fn index_shift(table: &Arc<SymbolTable>, symbol: &str, by: i64) -> Option<Poly> {
    let idx = table.index_of(symbol)?;
    Some(Poly::symbol(table.len(), idx).add(&Poly::from_int(table.len(), BigInt::from(by))))
}

/// Derive the product and intertwining identities of a ladder pair against
/// its separated equation. `index_symbol` names the constant that shifts
/// between adjacent sectors (the angular index).
pub fn derive_intertwining(
    pair: &LadderPair,
    eq: &SeparatedEquation,
    index_symbol: &str,
) -> Result<IntertwiningRelation, FactorizeError> {
    let h = eq.hamiltonian()?;
    let up = pair.a.compose(&pair.a_plus)?;
    let down = pair.a_plus.compose(&pair.a)?;

    let shift_up = as_constant(&up.sub(&h)).ok_or_else(|| {
        FactorizeError::NoIntertwining(format!(
            "compose(A, A+) - H is not constant: {}",
            up.sub(&h)
        ))
    })?;
    if shift_up != pair.superpotential.epsilon {
        return Err(FactorizeError::NoIntertwining(format!(
            "compose(A, A+) - H = {shift_up} disagrees with the stored epsilon {}",
            pair.superpotential.epsilon
        )));
    }

    // which index shift makes compose(A+, A) a copy of H?
    let mut matched = None;
    for (by, role) in [(-1, LadderRole::APlusLowers), (1, LadderRole::APlusRaises)] {
        let repl = index_shift(eq.table(), index_symbol, by).ok_or_else(|| {
            FactorizeError::NoIntertwining(format!("unknown index symbol '{index_symbol}'"))
        })?;
        let shifted = h.substitute_symbol(index_symbol, &repl);
        if let Some(c) = as_constant(&down.sub(&shifted)) {
            matched = Some((shifted, c, role));
            break;
        }
    }
    let (h_shifted, shift_down, role) = matched.ok_or_else(|| {
        FactorizeError::NoIntertwining(format!(
            "compose(A+, A) - H({index_symbol} -> {index_symbol} +- 1) is never constant"
        ))
    })?;

    let commutator = pair.a_plus.commutator(&pair.a)?;
    // consistency of the two code paths
    debug_assert!(down.sub(&up) == commutator);
    // [H, A] = A o [A+, A], exactly, since H = A A+ - shift_up
    let multiplier = pair.superpotential.r.differentiate().scale(
        &Coefficient::from_i64(eq.table(), -2),
    );
    debug_assert_eq!(commutator.as_multiplication(), Some(&multiplier));

    let lower = match role {
        LadderRole::APlusLowers => "A+",
        LadderRole::APlusRaises => "A",
    };
    let delta = shift_down.sub(&shift_up);
    let mut audit_flags = vec![format!(
        "[H, A] places A on the left of the multiplier {multiplier}; reference texts print the multiplier on the left"
    )];
    if !delta.is_zero() {
        audit_flags.push(format!(
            "adjacent sectors differ in eigenvalue by delta = {delta}; reference texts print equal eigenvalue labels across the step"
        ));
    }
    Ok(IntertwiningRelation {
        relation: format!(
            "H({index_symbol}{shift}) o {lower} = {lower} o H({index_symbol}) - ({delta}) * {lower}",
            shift = if role == LadderRole::APlusLowers { "-1" } else { "+1" },
        ),
        h,
        h_shifted,
        shift_up,
        shift_down,
        delta,
        role,
        commutator,
        h_commutator_multiplier: multiplier,
        audit_flags,
    })
}

/// c = 1/sqrt(lambda - epsilon); the radicand uses the engine-signed epsilon
/// from the compose identity.
pub fn normalization_constant(
    lambda: &Coefficient,
    sp: &Superpotential,
) -> Result<NormConstant, FactorizeError> {
    let radicand = lambda.sub(&sp.epsilon);
    let nonpositive = match radicand.as_rational() {
        Some(v) => v <= BigRational::zero(),
        None => false, // symbolic: sign decided at evaluation time
    };
    if nonpositive {
        return Err(FactorizeError::NonPositiveRadicand {
            lambda: lambda.to_string(),
            epsilon: sp.epsilon.to_string(),
        });
    }
    Ok(NormConstant { radicand })
}

/// Pick the branch whose annihilated top state is normalizable: nonnegative
/// power at the origin (a with positive lead) and decaying exponential
/// factor (c with negative lead, or c = 0 and b with negative lead).
pub fn select_physical_branch(branches: &[Superpotential]) -> Option<&Superpotential> {
    branches.iter().find(|sp| {
        let a = sp.r.coefficient(-1);
        let b = sp.r.coefficient(0);
        let c = sp.r.coefficient(1);
        let origin_ok = !a.is_zero() && !a.is_negative_lead();
        let tail_ok = if c.is_zero() {
            b.is_negative_lead()
        } else {
            c.is_negative_lead()
        };
        origin_ok && tail_ok
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchEntry {
    pub branch: String,
    pub r: String,
    pub epsilon_engine: String,
    pub epsilon_paper_form: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntertwiningSummary {
    pub shift: String,
    pub ordering: String,
    pub role: LadderRole,
    pub relation: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizationReport {
    pub branches: Vec<BranchEntry>,
    pub commutator: String,
    pub intertwining: IntertwiningSummary,
    pub audit_flags: Vec<String>,
}

/// End-to-end factorization of one separated equation: Gamma, all Riccati
/// branches, and the verified identities of the physical branch.
pub fn factorization_report(
    eq: &SeparatedEquation,
    index_symbol: &str,
) -> Result<FactorizationReport, FactorizeError> {
    let gamma = gamma_of(eq)?;
    let branches = solve_riccati_power_ansatz(&gamma)?;
    for sp in &branches {
        if !verify_riccati_residual(sp, &gamma).is_zero() {
            return Err(FactorizeError::NotFactorizableInBasis(format!(
                "branch {} fails its own residual check",
                sp.branch
            )));
        }
    }
    let chosen = select_physical_branch(&branches).unwrap_or(&branches[0]);
    let pair = build_ladder_pair(&eq.f, chosen)?;
    let rel = derive_intertwining(&pair, eq, index_symbol)?;
    Ok(FactorizationReport {
        branches: branches
            .iter()
            .map(|sp| BranchEntry {
                branch: sp.branch.clone(),
                r: sp.r.to_string(),
                epsilon_engine: sp.epsilon.to_string(),
                epsilon_paper_form: sp.epsilon.neg().to_string(),
            })
            .collect(),
        commutator: format!("[A+, A] = {}", rel.h_commutator_multiplier),
        intertwining: IntertwiningSummary {
            shift: rel.delta.to_string(),
            ordering: "A o multiplier".into(),
            role: rel.role,
            relation: rel.relation.clone(),
        },
        audit_flags: rel.audit_flags.clone(),
    })
}
