//! Differential operators of order at most two with symbolic-function
//! coefficients: a2·d²/dx² + a1·d/dx + a0. Composition is exact, including
//! the derivative-of-coefficient cross terms, and rejects any product whose
//! order would exceed two.

use std::fmt;
use std::sync::Arc;

use super::coefficient::Coefficient;
use super::function::SymbolicFunction;
use super::{SymExprError, SymbolTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOperator {
    pub a2: SymbolicFunction,
    pub a1: SymbolicFunction,
    pub a0: SymbolicFunction,
}

impl DiffOperator {
    pub fn new(a2: SymbolicFunction, a1: SymbolicFunction, a0: SymbolicFunction) -> Self {
        DiffOperator { a2, a1, a0 }
    }

    pub fn zero(table: &Arc<SymbolTable>) -> Self {
        let z = SymbolicFunction::zero(table);
        DiffOperator::new(z.clone(), z.clone(), z)
    }

    /// Purely multiplicative operator.
    pub fn multiplication(f: SymbolicFunction) -> Self {
        let z = SymbolicFunction::zero(&f.table);
        DiffOperator::new(z.clone(), z, f)
    }

    /// d/dx + w (monic first order).
    pub fn monic_first_order(w: SymbolicFunction) -> Self {
        let table = w.table.clone();
        DiffOperator::new(
            SymbolicFunction::zero(&table),
            SymbolicFunction::constant(Coefficient::one(&table)),
            w,
        )
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        self.a0.table()
    }

    pub fn order(&self) -> u8 {
        if !self.a2.is_zero() {
            2
        } else if !self.a1.is_zero() {
            1
        } else {
            0
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a2.is_zero() && self.a1.is_zero() && self.a0.is_zero()
    }

    pub fn add(&self, other: &DiffOperator) -> DiffOperator {
        DiffOperator::new(
            self.a2.add(&other.a2),
            self.a1.add(&other.a1),
            self.a0.add(&other.a0),
        )
    }

    pub fn sub(&self, other: &DiffOperator) -> DiffOperator {
        DiffOperator::new(
            self.a2.sub(&other.a2),
            self.a1.sub(&other.a1),
            self.a0.sub(&other.a0),
        )
    }

    /// Exact composition self ∘ other; errors if the order sum exceeds two.
    pub fn compose(&self, other: &DiffOperator) -> Result<DiffOperator, SymExprError> {
        let sum = self.order() + other.order();
        if sum > 2 {
            return Err(SymExprError::OrderOverflow {
                left: self.order(),
                right: other.order(),
            });
        }
        let (p2, p1, p0) = (&self.a2, &self.a1, &self.a0);
        let (q2, q1, q0) = (&other.a2, &other.a1, &other.a0);
        let q0p = q0.differentiate();
        let q1p = q1.differentiate();
        // Order-3+ contributions vanish under the order-sum guard.
        let r2 = p0
            .mul(q2)
            .add(&p1.mul(&q1.add(&q2.differentiate())))
            .add(&p2.mul(q0));
        let r1 = p0
            .mul(q1)
            .add(&p1.mul(&q0.add(&q1p)))
            .add(&p2.mul(&q0p).scale(&Coefficient::from_i64(self.table(), 2)));
        let r0 = p0
            .mul(q0)
            .add(&p1.mul(&q0p))
            .add(&p2.mul(&q0p.differentiate()));
        Ok(DiffOperator::new(r2, r1, r0))
    }

    /// self ∘ other − other ∘ self.
    pub fn commutator(&self, other: &DiffOperator) -> Result<DiffOperator, SymExprError> {
        Ok(self.compose(other)?.sub(&other.compose(self)?))
    }

    /// Multiplicative part, if the operator has order zero.
    pub fn as_multiplication(&self) -> Option<&SymbolicFunction> {
        if self.order() == 0 {
            Some(&self.a0)
        } else {
            None
        }
    }

    pub fn substitute_symbol(
        &self,
        name: &str,
        replacement: &super::poly::Poly,
    ) -> DiffOperator {
        DiffOperator::new(
            self.a2.substitute_symbol(name, replacement),
            self.a1.substitute_symbol(name, replacement),
            self.a0.substitute_symbol(name, replacement),
        )
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = self.a0.table().variable();
        let mut parts = Vec::new();
        if !self.a2.is_zero() {
            parts.push(format!("({})*d^2/d{v}^2", self.a2, v = var));
        }
        if !self.a1.is_zero() {
            parts.push(format!("({})*d/d{v}", self.a1, v = var));
        }
        if !self.a0.is_zero() {
            parts.push(format!("({})", self.a0));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}
