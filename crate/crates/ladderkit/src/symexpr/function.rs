//! Finite sums of coefficient times integer powers of the independent
//! variable: f(x) = sum_p c_p x^p. Closed under addition, multiplication,
//! and differentiation, which is all the factorization algebra needs.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::coefficient::Coefficient;
use super::{SymExprError, SymbolTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicFunction {
    pub(crate) table: Arc<SymbolTable>,
    pub(crate) terms: BTreeMap<i64, Coefficient>,
}

impl SymbolicFunction {
    pub fn zero(table: &Arc<SymbolTable>) -> Self {
        SymbolicFunction {
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Coefficient) -> Self {
        let table = c.table.clone();
        let mut f = SymbolicFunction::zero(&table);
        f.set(0, c);
        f
    }

    pub fn term(power: i64, c: Coefficient) -> Self {
        let table = c.table.clone();
        let mut f = SymbolicFunction::zero(&table);
        f.set(power, c);
        f
    }

    /// The independent variable raised to `power`.
    pub fn xpow(table: &Arc<SymbolTable>, power: i64) -> Self {
        SymbolicFunction::term(power, Coefficient::one(table))
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn set(&mut self, power: i64, c: Coefficient) {
        if c.is_zero() {
            self.terms.remove(&power);
        } else {
            self.terms.insert(power, c);
        }
    }

    pub fn coefficient(&self, power: i64) -> Coefficient {
        self.terms
            .get(&power)
            .cloned()
            .unwrap_or_else(|| Coefficient::zero(&self.table))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the only stored power is zero (or the function is zero).
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&p| p == 0)
    }

    pub fn powers(&self) -> impl Iterator<Item = i64> + '_ {
        self.terms.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Coefficient)> {
        self.terms.iter().map(|(p, c)| (*p, c))
    }

    /// Single (power, coefficient) pair if the function is a monomial term.
    pub fn as_single_term(&self) -> Option<(i64, Coefficient)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(p, c)| (*p, c.clone()))
        } else {
            None
        }
    }

    pub fn add(&self, other: &SymbolicFunction) -> SymbolicFunction {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            let s = out.coefficient(*p).add(c);
            out.set(*p, s);
        }
        out
    }

    pub fn neg(&self) -> SymbolicFunction {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &SymbolicFunction) -> SymbolicFunction {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &SymbolicFunction) -> SymbolicFunction {
        let mut out = SymbolicFunction::zero(&self.table);
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                let p = pa + pb;
                let s = out.coefficient(p).add(&ca.mul(cb));
                out.set(p, s);
            }
        }
        out
    }

    pub fn scale(&self, k: &Coefficient) -> SymbolicFunction {
        let mut out = SymbolicFunction::zero(&self.table);
        for (p, c) in &self.terms {
            out.set(*p, c.mul(k));
        }
        out
    }

    /// Integer power; negative exponents require a single-term base.
    pub fn pow(&self, e: i32) -> Result<SymbolicFunction, SymExprError> {
        if e < 0 {
            let (p, c) = self
                .as_single_term()
                .ok_or(SymExprError::NotMonomialDivisor)?;
            let inv = SymbolicFunction::term(-p, c.inv()?);
            return inv.pow(-e);
        }
        let mut acc = SymbolicFunction::constant(Coefficient::one(&self.table));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// Term-wise derivative d/dx: p * c_p * x^(p-1).
    pub fn differentiate(&self) -> SymbolicFunction {
        let mut out = SymbolicFunction::zero(&self.table);
        for (p, c) in &self.terms {
            if *p != 0 {
                out.set(p - 1, c.mul_i64(*p));
            }
        }
        out
    }

    /// Division by a single-term function; errors otherwise because general
    /// rational functions of the variable are not representable.
    pub fn div(&self, other: &SymbolicFunction) -> Result<SymbolicFunction, SymExprError> {
        if other.is_zero() {
            return Err(SymExprError::DivisionByZero);
        }
        let (p, c) = other
            .as_single_term()
            .ok_or(SymExprError::NotMonomialDivisor)?;
        Ok(self.mul(&SymbolicFunction::term(-p, c.inv()?)))
    }

    pub fn substitute_symbol(
        &self,
        name: &str,
        replacement: &super::poly::Poly,
    ) -> SymbolicFunction {
        let mut out = SymbolicFunction::zero(&self.table);
        for (p, c) in &self.terms {
            out.set(*p, c.substitute_symbol(name, replacement));
        }
        out
    }

    /// Exact specialization of every constant; the result lives over the
    /// empty symbol table.
    pub fn substitute_numeric(
        &self,
        bindings: &BTreeMap<String, BigRational>,
    ) -> Result<SymbolicFunction, SymExprError> {
        let empty = SymbolTable::empty(self.table.variable());
        let mut out = SymbolicFunction::zero(&empty);
        for (p, c) in &self.terms {
            let v = c.substitute_numeric(bindings)?;
            out.set(*p, Coefficient::from_rational(&empty, &v));
        }
        Ok(out)
    }

    /// Exact rational evaluation at x and given constant bindings.
    pub fn eval_rational(
        &self,
        x: &BigRational,
        bindings: &BTreeMap<String, BigRational>,
    ) -> Result<BigRational, SymExprError> {
        let mut acc = BigRational::zero();
        for (p, c) in &self.terms {
            let cv = c.substitute_numeric(bindings)?;
            acc += cv * rational_pow(x, *p)?;
        }
        Ok(acc)
    }

    pub fn eval_f64(
        &self,
        x: f64,
        bindings: &BTreeMap<String, f64>,
    ) -> Result<f64, SymExprError> {
        let mut acc = 0.0;
        for (p, c) in &self.terms {
            acc += c.eval_f64(bindings)? * x.powi(*p as i32);
        }
        Ok(acc)
    }
}

fn rational_pow(x: &BigRational, p: i64) -> Result<BigRational, SymExprError> {
    if p < 0 && x.is_zero() {
        return Err(SymExprError::DenominatorVanishes("x^negative at x=0".into()));
    }
    let mut acc = BigRational::from_integer(1.into());
    let base = if p < 0 { x.recip() } else { x.clone() };
    for _ in 0..p.unsigned_abs() {
        acc *= &base;
    }
    Ok(acc)
}

impl fmt::Display for SymbolicFunction {
    /// Canonical printer: terms in increasing power order, coefficients as
    /// fully reduced ratios, e.g. `l*x^-1 - K/(2*l)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let var = self.table.variable();
        let mut first = true;
        for (p, c) in self.terms.iter() {
            let neg = c.is_negative_lead();
            let body = if neg { c.neg() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_one = body == Coefficient::one(&self.table);
            match (*p, is_one) {
                // a sign factored out of a multi-term body must not leak
                // into its trailing terms, so parenthesize in that case
                (0, _) => write!(f, "{}", body.render(neg))?,
                (1, true) => write!(f, "{}", var)?,
                (1, false) => write!(f, "{}*{}", body.render(true), var)?,
                (_, true) => write!(f, "{}^{}", var, p)?,
                (_, false) => write!(f, "{}*{}^{}", body.render(true), var, p)?,
            }
        }
        Ok(())
    }
}
