//! Multivariate polynomials with integer coefficients over the constants of
//! a [`SymbolTable`](super::SymbolTable). Monomials are kept in graded
//! lexicographic order, which fixes a deterministic leading term for
//! printing, exact division, and square roots.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exponent vector aligned with the owning symbol table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nsyms: usize) -> Self {
        Monomial(vec![0; nsyms])
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise division; `None` if any exponent would go negative.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    // Graded lexicographic: total degree first, then lex over the symbol
    // order (earlier symbols more significant).
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| {
                for (a, b) in self.0.iter().zip(&other.0) {
                    match a.cmp(b) {
                        Ordering::Equal => continue,
                        // larger exponent on an earlier symbol sorts higher
                        ord => return ord,
                    }
                }
                Ordering::Equal
            })
    }
}

/// Multivariate polynomial with `BigInt` coefficients. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub(crate) nsyms: usize,
    pub(crate) terms: BTreeMap<Monomial, BigInt>,
}

impl Poly {
    pub fn zero(nsyms: usize) -> Self {
        Poly {
            nsyms,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_int(nsyms: usize, value: BigInt) -> Self {
        let mut p = Poly::zero(nsyms);
        if !value.is_zero() {
            p.terms.insert(Monomial::one(nsyms), value);
        }
        p
    }

    pub fn one(nsyms: usize) -> Self {
        Poly::from_int(nsyms, BigInt::one())
    }

    /// The polynomial consisting of the single symbol at `index`.
    pub fn symbol(nsyms: usize, index: usize) -> Self {
        let mut exps = vec![0; nsyms];
        exps[index] = 1;
        let mut p = Poly::zero(nsyms);
        p.terms.insert(Monomial(exps), BigInt::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| m.is_one() && c.is_one())
                .unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// Constant value if the polynomial has no symbol dependence.
    pub fn as_int(&self) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    fn insert(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.nsyms, other.nsyms);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.nsyms, other.nsyms);
        let mut out = Poly::zero(self.nsyms);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_int(&self, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.nsyms);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= k;
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.nsyms);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Leading (graded-lex greatest) term.
    pub fn leading(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// GCD of the integer coefficients (positive; zero for the zero poly).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
        }
        g
    }

    /// Componentwise-minimum monomial over all terms; the largest monomial
    /// dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut iter = self.terms.keys();
        let first = match iter.next() {
            Some(m) => m.0.clone(),
            None => return Monomial::one(self.nsyms),
        };
        let mins = iter.fold(first, |acc, m| {
            acc.iter().zip(&m.0).map(|(a, b)| *a.min(b)).collect()
        });
        Monomial(mins)
    }

    /// Divide every term by `m`; caller guarantees divisibility.
    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        let mut out = Poly::zero(self.nsyms);
        for (mm, c) in &self.terms {
            out.terms
                .insert(mm.div(m).expect("monomial content divides"), c.clone());
        }
        out
    }

    /// Divide every coefficient by `k`; caller guarantees divisibility.
    pub fn div_int(&self, k: &BigInt) -> Poly {
        let mut out = Poly::zero(self.nsyms);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c / k);
        }
        out
    }

    /// Exact multivariate division: `Some(q)` iff `self == q * d`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut quo = Poly::zero(self.nsyms);
        let (dlm, dlc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        while !rem.is_zero() {
            let (rlm, rlc) = {
                let (m, c) = rem.leading().unwrap();
                (m.clone(), c.clone())
            };
            let m = rlm.div(&dlm)?;
            let (q, r) = rlc.div_rem(&dlc);
            if !r.is_zero() {
                return None;
            }
            let mut t = Poly::zero(self.nsyms);
            t.terms.insert(m, q);
            rem = rem.sub(&t.mul(d));
            quo = quo.add(&t);
        }
        Some(quo)
    }

    /// Exact polynomial square root, if one exists.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let (lm, lc) = self.leading().unwrap();
        if lc.is_negative() || lm.0.iter().any(|e| e % 2 != 0) {
            return None;
        }
        let root_c = lc.sqrt();
        if &(&root_c * &root_c) != lc {
            return None;
        }
        let half = Monomial(lm.0.iter().map(|e| e / 2).collect());
        let mut lead = Poly::zero(self.nsyms);
        lead.terms.insert(half, root_c);
        let mut q = lead.clone();
        let two_lead = lead.mul_int(&BigInt::from(2));
        // Peel off one term of the root per iteration; a genuine square
        // terminates well before the term-count bound.
        let max_iter = 4 * (self.terms.len() + 1);
        for _ in 0..max_iter {
            let rem = self.sub(&q.mul(&q));
            if rem.is_zero() {
                return Some(q);
            }
            let (rm, rc) = {
                let (m, c) = rem.leading().unwrap();
                (m.clone(), c.clone())
            };
            let (tlm, tlc) = two_lead.leading().unwrap();
            let m = rm.div(tlm)?;
            let (tq, tr) = rc.div_rem(tlc);
            if !tr.is_zero() {
                return None;
            }
            let mut t = Poly::zero(self.nsyms);
            t.terms.insert(m, tq);
            q = q.add(&t);
        }
        None
    }

    /// Replace symbol `index` by `replacement`.
    pub fn substitute_symbol(&self, index: usize, replacement: &Poly) -> Poly {
        let mut out = Poly::zero(self.nsyms);
        for (m, c) in &self.terms {
            let e = m.0[index];
            let mut rest = m.clone();
            rest.0[index] = 0;
            let mut term = Poly::zero(self.nsyms);
            term.terms.insert(rest, c.clone());
            if e > 0 {
                term = term.mul(&replacement.pow(e));
            }
            out = out.add(&term);
        }
        out
    }

    /// Evaluate at exact rational values, one per symbol.
    pub fn eval_rational(&self, values: &[BigRational]) -> BigRational {
        debug_assert_eq!(values.len(), self.nsyms);
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &values[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = bigint_to_f64(c);
            for (i, &e) in m.0.iter().enumerate() {
                t *= values[i].powi(e as i32);
            }
            acc += t;
        }
        acc
    }
}

pub(crate) fn bigint_to_f64(x: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(i: usize) -> Poly {
        Poly::symbol(2, i)
    }

    #[test]
    fn graded_lex_orders_by_degree_then_lex() {
        let a = Monomial(vec![1, 0]); // x
        let b = Monomial(vec![0, 2]); // y^2
        let c = Monomial(vec![1, 1]); // x*y
        assert!(b > a);
        assert!(c > b); // same degree, x more significant
    }

    #[test]
    fn exact_div_roundtrip() {
        let x = sym(0);
        let y = sym(1);
        let p = x.add(&y).mul(&x.sub(&y)); // x^2 - y^2
        let q = p.exact_div(&x.add(&y)).unwrap();
        assert_eq!(q, x.sub(&y));
        assert!(p.exact_div(&x).is_none());
    }

    #[test]
    fn sqrt_of_square() {
        let x = sym(0);
        let two = Poly::from_int(2, BigInt::from(2));
        let p = x.mul_int(&BigInt::from(2)).add(&two); // 2x + 2
        let sq = p.mul(&p);
        assert_eq!(sq.sqrt().unwrap(), p);
        assert!(x.add(&Poly::one(2)).sqrt().is_none());
        // (2l+1)^2 = 4l^2 + 4l + 1
        let q = x
            .mul(&x)
            .mul_int(&BigInt::from(4))
            .add(&x.mul_int(&BigInt::from(4)))
            .add(&Poly::one(2));
        assert_eq!(q.sqrt().unwrap(), x.mul_int(&BigInt::from(2)).add(&Poly::one(2)));
    }

    #[test]
    fn substitute_shifts_symbol() {
        let l = sym(0);
        let p = l.mul(&l.add(&Poly::one(2))); // l(l+1)
        let lm1 = l.sub(&Poly::one(2));
        let shifted = p.substitute_symbol(0, &lm1); // (l-1)l
        assert_eq!(shifted, l.mul(&lm1));
    }
}
