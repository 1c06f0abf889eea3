//! Exact term algebra over one variable.
//!
//! Values are immutable after construction and every operation is a pure
//! function, so everything here is safe to share across threads.

pub mod coefficient;
pub mod function;
pub mod operator;
pub mod parser;
pub mod poly;

use std::sync::Arc;

use thiserror::Error;

pub use coefficient::Coefficient;
pub use function::SymbolicFunction;
pub use operator::DiffOperator;
pub use parser::parse_expr;
pub use poly::Poly;

#[derive(Debug, Error, PartialEq)]
pub enum SymExprError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier '{name}' at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisor is not a single power-times-coefficient term")]
    NotMonomialDivisor,
    #[error("unbound constant '{0}'")]
    UnboundConstant(String),
    #[error("denominator vanishes under substitution in {0}")]
    DenominatorVanishes(String),
    #[error("operator order overflow: composing order {left} with order {right}")]
    OrderOverflow { left: u8, right: u8 },
    #[error("invalid symbol name '{0}'")]
    InvalidSymbolName(String),
    #[error("duplicate symbol '{0}'")]
    DuplicateSymbol(String),
}

/// Ordered list of constant names plus the reserved independent variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    variable: String,
}

fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SymbolTable {
    /// Table with the default variable name `x`.
    pub fn new<S: AsRef<str>>(constants: &[S]) -> Result<Arc<Self>, SymExprError> {
        Self::with_variable(constants, "x")
    }

    pub fn with_variable<S: AsRef<str>>(
        constants: &[S],
        variable: &str,
    ) -> Result<Arc<Self>, SymExprError> {
        if !valid_identifier(variable) {
            return Err(SymExprError::InvalidSymbolName(variable.to_string()));
        }
        let mut names = Vec::with_capacity(constants.len());
        for c in constants {
            let c = c.as_ref();
            if !valid_identifier(c) || c == variable {
                return Err(SymExprError::InvalidSymbolName(c.to_string()));
            }
            if names.iter().any(|n| n == c) {
                return Err(SymExprError::DuplicateSymbol(c.to_string()));
            }
            names.push(c.to_string());
        }
        Ok(Arc::new(SymbolTable {
            names,
            variable: variable.to_string(),
        }))
    }

    pub fn empty(variable: &str) -> Arc<Self> {
        Arc::new(SymbolTable {
            names: Vec::new(),
            variable: variable.to_string(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use std::collections::BTreeMap;

    fn table() -> Arc<SymbolTable> {
        SymbolTable::new(&["l", "K", "s"]).unwrap()
    }

    fn p(text: &str) -> SymbolicFunction {
        parse_expr(text, &table()).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rejects_bad_symbol_tables() {
        assert!(SymbolTable::new(&["x"]).is_err()); // variable is reserved
        assert!(SymbolTable::new(&["l", "l"]).is_err());
        assert!(SymbolTable::new(&["2bad"]).is_err());
        assert!(SymbolTable::new(&[""]).is_err());
    }

    #[test]
    fn parses_coulomb_superpotential() {
        // R = l/x - K/(2l) -> {-1: l, 0: -K/(2l)}
        let r = p("l/x - K/(2*l)");
        assert_eq!(r.powers().collect::<Vec<_>>(), vec![-1, 0]);
        assert_eq!(r.coefficient(-1), p("l").coefficient(0));
        let c0 = r.coefficient(0);
        let mut b = BTreeMap::new();
        b.insert("l".to_string(), rat(3, 1));
        b.insert("K".to_string(), rat(2, 1));
        b.insert("s".to_string(), rat(0, 1));
        assert_eq!(c0.substitute_numeric(&b).unwrap(), rat(-1, 3));
    }

    #[test]
    fn parses_zero() {
        assert!(p("0").is_zero());
    }

    #[test]
    fn squared_superpotential_expands() {
        // (l/x - K/(2l))^2 = l^2 x^-2 - K x^-1 + K^2/(4 l^2)
        let sq = p("(l/x - K/(2*l))^2");
        let expect = p("l^2/x^2 - K/x + K^2/(4*l^2)");
        assert_eq!(sq, expect);
    }

    #[test]
    fn differentiate_power_rule() {
        assert_eq!(p("l/x").differentiate(), p("0 - l/x^2"));
        assert!(p("K").differentiate().is_zero());
        // R = l/x - s*x -> R' = -l/x^2 - s
        assert_eq!(p("l/x - s*x").differentiate(), p("0 - l/x^2 - s"));
    }

    #[test]
    fn multiply_cases() {
        assert!(p("l/x - s*x").mul(&p("0")).is_zero());
        assert_eq!(
            p("l/x - s*x").mul(&p("l/x - s*x")),
            p("l^2/x^2 - 2*l*s + s^2*x^2")
        );
        assert_eq!(
            p("l/x - K/(2*l)").mul(&p("l/x + K/(2*l)")),
            p("l^2/x^2 - K^2/(4*l^2)")
        );
    }

    #[test]
    fn substitute_numeric_examples() {
        let r = p("l/x - K/(2*l)");
        let mut b = BTreeMap::new();
        b.insert("l".to_string(), rat(1, 1));
        b.insert("K".to_string(), rat(2, 1));
        b.insert("s".to_string(), rat(0, 1));
        let spec = r.substitute_numeric(&b).unwrap();
        let empty = SymbolTable::empty("x");
        let expect = parse_expr("1/x - 1", &empty).unwrap();
        assert_eq!(spec, expect);

        b.insert("l".to_string(), rat(0, 1));
        assert!(matches!(
            r.substitute_numeric(&b),
            Err(SymExprError::DenominatorVanishes(_))
        ));
    }

    #[test]
    fn gamma_coulomb_specialization() {
        // Gamma = -l(l+1)/x^2 + K/x at l=1, K=2 -> -2/x^2 + 2/x
        let g = p("0 - l*(l+1)/x^2 + K/x");
        let mut b = BTreeMap::new();
        b.insert("l".to_string(), rat(1, 1));
        b.insert("K".to_string(), rat(2, 1));
        b.insert("s".to_string(), rat(0, 1));
        let spec = g.substitute_numeric(&b).unwrap();
        let empty = SymbolTable::empty("x");
        assert_eq!(spec, parse_expr("2/x - 2/x^2", &empty).unwrap());
    }

    #[test]
    fn parser_errors() {
        let t = table();
        assert!(matches!(
            parse_expr("l +* 2", &t),
            Err(SymExprError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expr("q/x", &t),
            Err(SymExprError::UnknownIdentifier { ref name, .. }) if name == "q"
        ));
        // general rational functions of x are not representable
        assert!(parse_expr("1/(1 - x^2)", &t).is_err());
        assert!(parse_expr("K/(x + l)", &t).is_err());
        // but division by a coefficient-times-power is fine
        assert!(parse_expr("K/(2*(l + 1)^2*x)", &t).is_ok());
    }

    #[test]
    fn printer_round_trip_fixed_cases() {
        let t = table();
        for text in [
            "l/x - K/(2*l)",
            "l^2/x^2 - K/x + K^2/(4*l^2)",
            "0",
            "0 - s*x + l/x",
            "K/(2*(l + 1))",
            "(l + 1)*x^2 - 3",
        ] {
            let f = parse_expr(text, &t).unwrap();
            let printed = f.to_string();
            let back = parse_expr(&printed, &t).unwrap();
            assert_eq!(f, back, "round trip failed for {text} -> {printed}");
        }
    }

    #[test]
    fn printer_canonical_form() {
        assert_eq!(p("l/x - K/(2*l)").to_string(), "l*x^-1 - K/(2*l)");
    }

    #[test]
    fn compose_trivial_and_coulomb() {
        let t = table();
        let d = DiffOperator::monic_first_order(SymbolicFunction::zero(&t));
        let dd = d.compose(&d).unwrap();
        assert_eq!(dd.a2, p("1"));
        assert!(dd.a1.is_zero());
        assert!(dd.a0.is_zero());

        // Coulomb A, A+ with f'/2f = 1/x
        let a = DiffOperator::monic_first_order(p("1/x - l/x + K/(2*l)"));
        let aplus = DiffOperator::monic_first_order(p("1/x + l/x - K/(2*l)"));
        let prod = a.compose(&aplus).unwrap();
        assert_eq!(prod.a2, p("1"));
        assert_eq!(prod.a1, p("2/x"));
        assert_eq!(prod.a0, p("0 - l*(l+1)/x^2 + K/x - K^2/(4*l^2)"));

        let prod2 = aplus.compose(&a).unwrap();
        assert_eq!(prod2.a0, p("0 - l*(l-1)/x^2 + K/x - K^2/(4*l^2)"));
    }

    #[test]
    fn compose_rejects_order_overflow() {
        let t = table();
        let d = DiffOperator::monic_first_order(SymbolicFunction::zero(&t));
        let dd = d.compose(&d).unwrap();
        assert!(matches!(
            dd.compose(&d),
            Err(SymExprError::OrderOverflow { .. })
        ));
    }

    #[test]
    fn commutator_cases() {
        let t = table();
        let d = DiffOperator::monic_first_order(SymbolicFunction::zero(&t));
        assert!(d.commutator(&d).unwrap().is_zero());

        let a = DiffOperator::monic_first_order(p("1/x - l/x + K/(2*l)"));
        let aplus = DiffOperator::monic_first_order(p("1/x + l/x - K/(2*l)"));
        let comm = aplus.commutator(&a).unwrap();
        assert_eq!(comm.as_multiplication().unwrap(), &p("2*l/x^2"));

        // oscillator version: 2l/x^2 + 2s
        let a_o = DiffOperator::monic_first_order(p("1/x - l/x + s*x"));
        let ap_o = DiffOperator::monic_first_order(p("1/x + l/x - s*x"));
        let comm_o = ap_o.commutator(&a_o).unwrap();
        assert_eq!(comm_o.as_multiplication().unwrap(), &p("2*l/x^2 + 2*s"));
    }
}
