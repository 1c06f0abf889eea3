//! Rational-function coefficients over the symbol table: a ratio of two
//! integer multivariate polynomials kept in a canonical form (integer and
//! monomial content removed, denominator leading coefficient positive,
//! trivial num/den factors cancelled by exact division). Equality is decided
//! by cross multiplication, so the canonical form never has to find a full
//! polynomial gcd.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Monomial, Poly};
use super::{SymExprError, SymbolTable};

#[derive(Clone, Debug)]
pub struct Coefficient {
    pub(crate) table: Arc<SymbolTable>,
    pub(crate) num: Poly,
    pub(crate) den: Poly,
}

impl Coefficient {
    pub fn zero(table: &Arc<SymbolTable>) -> Self {
        Coefficient {
            table: table.clone(),
            num: Poly::zero(table.len()),
            den: Poly::one(table.len()),
        }
    }

    pub fn one(table: &Arc<SymbolTable>) -> Self {
        Coefficient::from_int(table, BigInt::one())
    }

    pub fn from_int(table: &Arc<SymbolTable>, v: BigInt) -> Self {
        Coefficient {
            table: table.clone(),
            num: Poly::from_int(table.len(), v),
            den: Poly::one(table.len()),
        }
    }

    pub fn from_i64(table: &Arc<SymbolTable>, v: i64) -> Self {
        Coefficient::from_int(table, BigInt::from(v))
    }

    pub fn from_rational(table: &Arc<SymbolTable>, v: &BigRational) -> Self {
        Coefficient::new(
            table.clone(),
            Poly::from_int(table.len(), v.numer().clone()),
            Poly::from_int(table.len(), v.denom().clone()),
        )
    }

    pub fn symbol(table: &Arc<SymbolTable>, name: &str) -> Result<Self, SymExprError> {
        let idx = table
            .index_of(name)
            .ok_or_else(|| SymExprError::UnknownIdentifier {
                name: name.to_string(),
                position: 0,
            })?;
        Ok(Coefficient {
            table: table.clone(),
            num: Poly::symbol(table.len(), idx),
            den: Poly::one(table.len()),
        })
    }

    pub(crate) fn new(table: Arc<SymbolTable>, num: Poly, den: Poly) -> Self {
        let mut c = Coefficient { table, num, den };
        c.normalize();
        c
    }

    fn normalize(&mut self) {
        assert!(!self.den.is_zero(), "coefficient denominator is zero");
        if self.num.is_zero() {
            self.den = Poly::one(self.table.len());
            return;
        }
        // common monomial factor
        let mn = self.num.monomial_content();
        let md = self.den.monomial_content();
        let common = Monomial(mn.0.iter().zip(&md.0).map(|(a, b)| *a.min(b)).collect());
        if !common.is_one() {
            self.num = self.num.div_monomial(&common);
            self.den = self.den.div_monomial(&common);
        }
        // integer content
        let g = self.num.content().gcd(&self.den.content());
        if !g.is_one() {
            self.num = self.num.div_int(&g);
            self.den = self.den.div_int(&g);
        }
        // trivial full cancellation
        if let Some(q) = self.num.exact_div(&self.den) {
            self.num = q;
            self.den = Poly::one(self.table.len());
        } else if let Some(q) = self.den.exact_div(&self.num) {
            self.num = Poly::one(self.table.len());
            self.den = q;
        }
        // denominator leading coefficient positive
        if self
            .den
            .leading()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
        {
            self.num = self.num.neg();
            self.den = self.den.neg();
        }
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// Rational value if the coefficient carries no symbol dependence.
    pub fn as_rational(&self) -> Option<BigRational> {
        Some(BigRational::new(self.num.as_int()?, self.den.as_int()?))
    }

    /// Sign marker used by the printer: true when the leading numerator
    /// coefficient is negative (denominator is canonically positive).
    pub fn is_negative_lead(&self) -> bool {
        self.num
            .leading()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
    }

    pub fn neg(&self) -> Coefficient {
        Coefficient {
            table: self.table.clone(),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Coefficient) -> Coefficient {
        Coefficient::new(
            self.table.clone(),
            self.num
                .mul(&other.den)
                .add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &Coefficient) -> Coefficient {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Coefficient) -> Coefficient {
        Coefficient::new(
            self.table.clone(),
            self.num.mul(&other.num),
            self.den.mul(&other.den),
        )
    }

    pub fn mul_i64(&self, k: i64) -> Coefficient {
        Coefficient::new(
            self.table.clone(),
            self.num.mul_int(&BigInt::from(k)),
            self.den.clone(),
        )
    }

    pub fn div(&self, other: &Coefficient) -> Result<Coefficient, SymExprError> {
        if other.is_zero() {
            return Err(SymExprError::DivisionByZero);
        }
        Ok(Coefficient::new(
            self.table.clone(),
            self.num.mul(&other.den),
            self.den.mul(&other.num),
        ))
    }

    pub fn inv(&self) -> Result<Coefficient, SymExprError> {
        Coefficient::one(&self.table).div(self)
    }

    pub fn pow(&self, e: i32) -> Result<Coefficient, SymExprError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        Ok(Coefficient {
            table: self.table.clone(),
            num: base.num.pow(e.unsigned_abs()),
            den: base.den.pow(e.unsigned_abs()),
        })
    }

    /// Exact square root in the coefficient ring, if one exists.
    pub fn sqrt(&self) -> Option<Coefficient> {
        let num = self.num.sqrt()?;
        let den = self.den.sqrt()?;
        Some(Coefficient::new(self.table.clone(), num, den))
    }

    /// Replace a named symbol by another coefficient's numerator polynomial
    /// (the replacement must be denominator-free, e.g. `l -> l - 1`).
    pub fn substitute_symbol(&self, name: &str, replacement: &Poly) -> Coefficient {
        let idx = match self.table.index_of(name) {
            Some(i) => i,
            None => return self.clone(),
        };
        Coefficient::new(
            self.table.clone(),
            self.num.substitute_symbol(idx, replacement),
            self.den.substitute_symbol(idx, replacement),
        )
    }

    /// Exact substitution of every symbol by a rational value.
    pub fn substitute_numeric(
        &self,
        bindings: &BTreeMap<String, BigRational>,
    ) -> Result<BigRational, SymExprError> {
        let mut values = Vec::with_capacity(self.table.len());
        for name in self.table.names() {
            let v = bindings
                .get(name)
                .ok_or_else(|| SymExprError::UnboundConstant(name.clone()))?;
            values.push(v.clone());
        }
        let den = self.den.eval_rational(&values);
        if den.is_zero() {
            return Err(SymExprError::DenominatorVanishes(self.to_string()));
        }
        Ok(self.num.eval_rational(&values) / den)
    }

    pub fn eval_f64(&self, bindings: &BTreeMap<String, f64>) -> Result<f64, SymExprError> {
        let mut values = Vec::with_capacity(self.table.len());
        for name in self.table.names() {
            let v = bindings
                .get(name)
                .ok_or_else(|| SymExprError::UnboundConstant(name.clone()))?;
            values.push(*v);
        }
        let den = self.den.eval_f64(&values);
        if den == 0.0 {
            return Err(SymExprError::DenominatorVanishes(self.to_string()));
        }
        Ok(self.num.eval_f64(&values) / den)
    }
}

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        // cross multiplication: a/b == c/d iff ad == cb
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for Coefficient {}

// ---------- printing ----------

fn fmt_monomial(table: &SymbolTable, m: &Monomial, c: &BigInt, out: &mut String) {
    let abs = c.abs();
    let mut parts: Vec<String> = Vec::new();
    if !abs.is_one() || m.is_one() {
        parts.push(abs.to_string());
    }
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if e == 1 {
            parts.push(table.names()[i].clone());
        } else {
            parts.push(format!("{}^{}", table.names()[i], e));
        }
    }
    out.push_str(&parts.join("*"));
}

pub(crate) fn fmt_poly(table: &SymbolTable, p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms.iter().rev().enumerate() {
        if i == 0 {
            if c.is_negative() {
                out.push('-');
            }
        } else if c.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        fmt_monomial(table, m, c, &mut out);
    }
    out
}

/// True when the polynomial prints as a single parser atom or a plain
/// product of atoms (single monomial with positive coefficient).
fn poly_is_simple_product(p: &Poly) -> bool {
    p.terms.len() == 1 && !p.leading().map(|(_, c)| c.is_negative()).unwrap_or(false)
}

impl Coefficient {
    /// Render with enough parentheses to re-parse in any factor position.
    /// `force_parens` wraps multi-term numerators (used when the coefficient
    /// multiplies a power of the variable).
    pub(crate) fn render(&self, force_parens: bool) -> String {
        let num_str = fmt_poly(&self.table, &self.num);
        if self.den.is_one() {
            if force_parens && !poly_is_simple_product(&self.num) {
                return format!("({})", num_str);
            }
            return num_str;
        }
        let num_part = if poly_is_simple_product(&self.num) {
            num_str
        } else {
            format!("({})", num_str)
        };
        let den_str = fmt_poly(&self.table, &self.den);
        let den_part = if self.den.terms.len() == 1
            && self.den.leading().map(|(m, c)| c.is_one() && m.degree() == 1).unwrap_or(false)
        {
            den_str
        } else {
            format!("({})", den_str)
        };
        format!("{}/{}", num_part, den_part)
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(false))
    }
}
