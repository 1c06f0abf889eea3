//! Exact ladder chains of radial eigenfunctions in the closed family
//! P(r) * r^alpha * exp(beta*r + gamma*r^2) with rational data. Applying a
//! monic first-order operator with superpotential support {-1, 0, 1} stays
//! inside the family, so whole chains are generated without floating point;
//! all numerical work (norms, residuals, oracles) lives in `numerics`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::factorize::{
    build_ladder_pair, derive_intertwining, gamma_of, select_physical_branch,
    solve_riccati_power_ansatz, FactorizeError, LadderPair, LadderRole,
};
use crate::staeckel::{assemble_separated_equation, find_system, SeparatedEquation, StaeckelError};
use crate::symexpr::{parse_expr, Coefficient, DiffOperator, SymExprError, SymbolTable, SymbolicFunction};

#[derive(Debug, thiserror::Error)]
pub enum StatesError {
    #[error("state is not normalizable: {0}")]
    NonNormalizable(String),
    #[error("unsupported superpotential: {0}")]
    UnsupportedSuperpotential(String),
    #[error("chain bookkeeping is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Factorize(#[from] FactorizeError),
    #[error(transparent)]
    Staeckel(#[from] StaeckelError),
    #[error(transparent)]
    Sym(#[from] SymExprError),
}

/// One radial state X = norm * P(r) * r^alpha * exp(beta*r + gamma*r^2).
/// `epsilon` is the separation constant with the sign convention
/// H X = -epsilon X for the separated operator H.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolyState {
    /// coefficients of P, `p[i]` multiplying r^i
    pub p: Vec<BigRational>,
    pub alpha: i64,
    pub beta: BigRational,
    pub gamma: BigRational,
    pub n: u32,
    pub l: u32,
    pub epsilon: BigRational,
    /// real normalization factor applied on evaluation (set by numerics)
    pub norm: f64,
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    p
}

impl ExpPolyState {
    pub fn is_zero(&self) -> bool {
        self.p.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> usize {
        self.p.len().saturating_sub(1)
    }

    pub fn eval_f64(&self, r: f64) -> f64 {
        let mut poly = 0.0;
        for c in self.p.iter().rev() {
            poly = poly * r + c.to_f64().unwrap();
        }
        let beta = self.beta.to_f64().unwrap();
        let gamma = self.gamma.to_f64().unwrap();
        self.norm * poly * r.powi(self.alpha as i32) * (beta * r + gamma * r * r).exp()
    }

    /// Exact derivative; stays in the family with alpha decreased by one.
    pub fn derivative(&self) -> ExpPolyState {
        let alpha = BigRational::from_integer(BigInt::from(self.alpha));
        let two_gamma = &self.gamma * BigRational::from_integer(2.into());
        let mut q = vec![BigRational::zero(); self.p.len() + 2];
        for (i, c) in self.p.iter().enumerate() {
            let fi = BigRational::from_integer(BigInt::from(i as i64));
            q[i] += (fi + &alpha) * c;
            q[i + 1] += &self.beta * c;
            q[i + 2] += &two_gamma * c;
        }
        ExpPolyState {
            p: trim(q),
            alpha: self.alpha - 1,
            ..self.clone()
        }
    }

    /// Number of zeros of the state in (0, infinity): positive roots of P.
    pub fn node_count(&self) -> usize {
        // roots at r = 0 are absorbed by the r^alpha prefactor
        let start = self.p.iter().position(|c| !c.is_zero());
        match start {
            None => 0,
            Some(k) => count_positive_roots(&self.p[k..]),
        }
    }
}

// ---------- exact root counting (Sturm sequence) ----------

fn poly_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r: Vec<BigRational> = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    while r.len() > db && r.len() > 1 {
        let dr = r.len() - 1;
        let q = &r[dr] / lead;
        for i in 0..=db {
            let v = &q * &b[i];
            r[dr - db + i] -= v;
        }
        r = trim(r);
        if r.is_empty() {
            break;
        }
        if r.len() - 1 < db {
            break;
        }
    }
    r
}

fn sign_variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn sign(x: &BigRational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Distinct roots of P in (0, infinity); requires P(0) != 0.
fn count_positive_roots(p: &[BigRational]) -> usize {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return 0;
    }
    let dp: Vec<BigRational> = (1..p.len())
        .map(|i| &p[i] * BigRational::from_integer(BigInt::from(i as i64)))
        .collect();
    let mut chain = vec![p, trim(dp)];
    while chain.last().map(|q| q.len() > 1).unwrap_or(false) {
        let k = chain.len();
        let rem = poly_rem(&chain[k - 2], &chain[k - 1]);
        if rem.is_empty() {
            break;
        }
        chain.push(rem.iter().map(|c| -c).collect());
    }
    let at_zero = sign_variations(chain.iter().map(|q| sign(&q[0])));
    let at_inf = sign_variations(chain.iter().map(|q| sign(q.last().unwrap())));
    at_zero - at_inf
}

// ---------- operators over rational data ----------

/// Coefficients (w_{-1}, w_0, w_1) of a monic first-order operator
/// d/dr + w_{-1}/r + w_0 + w_1 r, specialized to rationals.
fn numeric_w(
    op: &DiffOperator,
    bindings: &BTreeMap<String, BigRational>,
) -> Result<[BigRational; 3], StatesError> {
    if !op.a2.is_zero() || op.a1 != SymbolicFunction::constant(Coefficient::one(op.table())) {
        return Err(StatesError::UnsupportedSuperpotential(format!(
            "operator is not monic first order: {op}"
        )));
    }
    let mut w = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
    for (p, c) in op.a0.iter() {
        if !(-1..=1).contains(&p) {
            return Err(StatesError::UnsupportedSuperpotential(format!(
                "superpotential term x^{p} outside {{-1, 0, 1}} in {}",
                op.a0
            )));
        }
        w[(p + 1) as usize] = c.substitute_numeric(bindings)?;
    }
    Ok(w)
}

/// Exact application of a monic first-order operator:
/// P_new = r P' + (alpha + w_{-1}) P + (beta + w_0) r P + (2 gamma + w_1) r^2 P,
/// alpha decreases by one, the exponentials are untouched.
pub fn apply_ladder(
    op: &DiffOperator,
    bindings: &BTreeMap<String, BigRational>,
    state: &ExpPolyState,
) -> Result<ExpPolyState, StatesError> {
    let [wm1, w0, w1] = numeric_w(op, bindings)?;
    let k0 = BigRational::from_integer(BigInt::from(state.alpha)) + wm1;
    let k1 = &state.beta + w0;
    let k2 = &state.gamma * BigRational::from_integer(2.into()) + w1;
    let mut q = vec![BigRational::zero(); state.p.len() + 2];
    for (i, c) in state.p.iter().enumerate() {
        let fi = BigRational::from_integer(BigInt::from(i as i64));
        q[i] += (fi + &k0) * c;
        q[i + 1] += &k1 * c;
        q[i + 2] += &k2 * c;
    }
    Ok(ExpPolyState {
        p: trim(q),
        alpha: state.alpha - 1,
        l: state.l.saturating_sub(1),
        ..state.clone()
    })
}

/// The node-less state annihilated by the pair's raising operator A:
/// solving (d/dr + w_{-1}/r + w_0 + w_1 r) X = 0 gives
/// X = r^{-w_{-1}} exp(-w_0 r - w_1 r^2 / 2).
pub fn top_state(
    pair: &LadderPair,
    bindings: &BTreeMap<String, BigRational>,
    n: u32,
    l: u32,
) -> Result<ExpPolyState, StatesError> {
    let [wm1, w0, w1] = numeric_w(&pair.a, bindings)?;
    let alpha = -&wm1;
    if !alpha.is_integer() {
        return Err(StatesError::UnsupportedSuperpotential(format!(
            "origin exponent {alpha} is not an integer"
        )));
    }
    let alpha = alpha.to_integer().to_i64().ok_or_else(|| {
        StatesError::UnsupportedSuperpotential("origin exponent overflows i64".into())
    })?;
    let beta = -w0;
    let gamma = -w1 / BigRational::from_integer(2.into());
    if alpha < 0 {
        return Err(StatesError::NonNormalizable(format!(
            "singular at the origin: r^{alpha}"
        )));
    }
    if !(gamma.is_negative() || (gamma.is_zero() && beta.is_negative())) {
        return Err(StatesError::NonNormalizable(format!(
            "exponential factor exp({beta}*r + {gamma}*r^2) does not decay"
        )));
    }
    Ok(ExpPolyState {
        p: vec![BigRational::one()],
        alpha,
        beta,
        gamma,
        n,
        l,
        epsilon: BigRational::zero(),
        norm: 1.0,
    })
}

// ---------- chains ----------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    Coulomb,
    Oscillator,
}

/// The spherical radial equation for a builtin potential, over the shared
/// constant table (l, K, s).
pub fn radial_equation(
    kind: Potential,
) -> Result<(SeparatedEquation, Arc<SymbolTable>), StatesError> {
    let v = match kind {
        Potential::Coulomb => "0 - K/x",
        Potential::Oscillator => "s^2*x^2",
    };
    let table = SymbolTable::new(&["l", "K", "s"])?;
    radial_equation_with(v, &table).map(|eq| (eq, table))
}

/// The spherical radial equation for an arbitrary potential expression of x.
/// The table must match the catalog's constant set (l, K, s).
pub fn radial_equation_with(
    potential: &str,
    table: &Arc<SymbolTable>,
) -> Result<SeparatedEquation, StatesError> {
    let sys = find_system::<f64>(&[], "spherical")?;
    let v = parse_expr(potential, table)?;
    let k2 = parse_expr("0 - l*(l+1)", table)?.coefficient(0);
    Ok(assemble_separated_equation(
        &sys,
        0,
        v,
        [Coefficient::zero(table), k2, Coefficient::zero(table)],
    )?)
}

#[derive(Debug, Clone)]
pub struct ChainStep {
    pub n: u32,
    /// angular index of the state being lowered (the operator's index)
    pub from_l: u32,
    /// epsilon_state - epsilon_engine(l), the inverse square of the
    /// normalization constant
    pub radicand: BigRational,
    /// c = 1/sqrt(radicand): predicted norm of the lowered state when the
    /// input is normalized is 1/c
    pub c: f64,
    /// measured ||A X|| / ||X||, filled in by numerics
    pub measured_ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LadderChain {
    /// states ordered by (n ascending, l descending): each chain top first
    pub states: Vec<ExpPolyState>,
    pub steps: Vec<ChainStep>,
}

impl LadderChain {
    pub fn find(&self, n: u32, l: u32) -> Option<&ExpPolyState> {
        self.states.iter().find(|s| s.n == n && s.l == l)
    }
}

/// Build every chain with index n <= n_max: the top state (l = n - 1) is
/// annihilated by the raising operator at index n, then the lowering
/// operator walks l down to zero. Eigenvalue bookkeeping follows the
/// intertwining shift exactly (epsilon increases by delta per step).
pub fn generate_chain(
    eq: &SeparatedEquation,
    index_symbol: &str,
    n_max: u32,
    constants: &BTreeMap<String, BigRational>,
) -> Result<LadderChain, StatesError> {
    assert!(n_max >= 1);
    let gamma = gamma_of(eq)?;
    let branches = solve_riccati_power_ansatz(&gamma)?;
    let sp = select_physical_branch(&branches).ok_or_else(|| {
        StatesError::NonNormalizable("no Riccati branch yields a normalizable top state".into())
    })?;
    let pair = build_ladder_pair(&eq.f, sp)?;
    let rel = derive_intertwining(&pair, eq, index_symbol)?;
    if rel.role != LadderRole::APlusLowers {
        return Err(StatesError::Inconsistent(
            "expected A+ to lower the angular index for the physical branch".into(),
        ));
    }

    // constants absent from the caller's bindings (and from the potential)
    // default to one so that unrelated catalog symbols never block evaluation
    let table = eq.table().clone();
    let bind_at = move |l: i64| {
        let mut b = constants.clone();
        for name in table.names() {
            b.entry(name.clone()).or_insert_with(BigRational::one);
        }
        b.insert(index_symbol.to_string(), BigRational::from_integer(l.into()));
        b
    };

    let mut states = Vec::new();
    let mut steps = Vec::new();
    for n in 1..=n_max {
        let bind_top = bind_at(n as i64);
        let mut cur = top_state(&pair, &bind_top, n, n - 1)?;
        cur.epsilon = rel.shift_down.substitute_numeric(&bind_top)?;
        states.push(cur.clone());
        for l in (1..=n - 1).rev() {
            let bind = bind_at(l as i64);
            let eng_eps = pair.superpotential.epsilon.substitute_numeric(&bind)?;
            let radicand = &cur.epsilon - eng_eps;
            if !radicand.is_positive() {
                return Err(StatesError::Inconsistent(format!(
                    "nonpositive normalization radicand {radicand} at (n, l) = ({n}, {l})"
                )));
            }
            let delta = rel.delta.substitute_numeric(&bind)?;
            steps.push(ChainStep {
                n,
                from_l: l,
                c: 1.0 / radicand.to_f64().unwrap().sqrt(),
                radicand,
                measured_ratio: None,
            });
            let mut next = apply_ladder(&pair.a_plus, &bind, &cur)?;
            next.epsilon = &cur.epsilon + delta;
            next.n = n;
            next.l = l - 1;
            if next.is_zero() {
                return Err(StatesError::Inconsistent(format!(
                    "lowering annihilated the state at (n, l) = ({n}, {l})"
                )));
            }
            states.push(next.clone());
            cur = next;
        }
    }
    Ok(LadderChain { states, steps })
}
