//! Multivariate polynomials with complex coefficients, stored sparsely by
//! exponent vector. Used both for the X-dependence of equivariant forms
//! and for multipliers of test functions.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

/// Serialized monomial: `{ exp = [..], coef = 1.0 }` or `coef = [re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MonomialSpec {
    pub exp: Vec<u32>,
    #[serde(default = "one_coef")]
    pub coef: CoefSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CoefSpec {
    Real(f64),
    Complex([f64; 2]),
}

fn one_coef() -> CoefSpec {
    CoefSpec::Real(1.0)
}

impl CoefSpec {
    pub fn value(&self) -> Complex64 {
        match *self {
            CoefSpec::Real(r) => Complex64::new(r, 0.0),
            CoefSpec::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Complex64::new(1.0, 0.0))
    }

    /// The coordinate function `X_a` (0-based `a`).
    pub fn coordinate(nvars: usize, a: usize) -> Self {
        assert!(a < nvars);
        let mut e = vec![0; nvars];
        e[a] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Complex64::new(1.0, 0.0));
        p
    }

    pub fn monomial(exp: Vec<u32>, c: Complex64) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    pub fn from_specs(nvars: usize, specs: &[MonomialSpec]) -> Result<Self, String> {
        let mut p = Self::zero(nvars);
        for m in specs {
            if m.exp.len() != nvars {
                return Err(format!("monomial exponent {:?} has length {}, expected {nvars}", m.exp, m.exp.len()));
            }
            p.add_term(m.exp.clone(), m.coef.value());
        }
        Ok(p)
    }

    pub fn to_specs(&self) -> Vec<MonomialSpec> {
        self.terms
            .iter()
            .map(|(e, c)| MonomialSpec { exp: e.clone(), coef: CoefSpec::Complex([c.re, c.im]) })
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: Complex64) {
        assert_eq!(exp.len(), self.nvars, "exponent length mismatch");
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(exp).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        self.terms.retain(|_, v| *v != Complex64::new(0.0, 0.0));
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = 1.0;
            for (xi, &p) in x.iter().zip(e) {
                m *= xi.powi(p as i32);
            }
            acc += c * m;
        }
        acc
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut p = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    /// Multiply by `X_a` (0-based).
    pub fn mul_coordinate(&self, a: usize) -> Self {
        assert!(a < self.nvars);
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[a] += 1;
            p.add_term(e, *c);
        }
        p
    }

    /// Multiply by the linear form `Σ_a l_a X_a`.
    pub fn mul_linear(&self, l: &[f64]) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, &la) in l.iter().enumerate() {
            if la != 0.0 {
                out = out.add(&self.mul_coordinate(a).scale(Complex64::new(la, 0.0)));
            }
        }
        out
    }

    /// Substitute `X = A·Y`, i.e. return `Q(Y) = P(A Y)`.
    pub fn linear_substitute(&self, a: &[Vec<f64>]) -> Self {
        let k = self.nvars;
        let mut out = Self::zero(k);
        for (e, c) in &self.terms {
            let mut term = Self::constant(k, *c);
            for (i, &p) in e.iter().enumerate() {
                let row = &a[i];
                let lin = Self::one(k).mul_linear(row);
                for _ in 0..p {
                    term = term.mul(&lin);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Partial derivative with respect to `X_a` (0-based).
    pub fn partial(&self, a: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[a] > 0 {
                let mut e2 = e.clone();
                e2[a] -= 1;
                p.add_term(e2, c * e[a] as f64);
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn evaluation_and_products() {
        let p = Polynomial::coordinate(2, 0).add(&Polynomial::constant(2, c(2.0)));
        let q = Polynomial::coordinate(2, 1).mul_coordinate(1);
        let r = p.mul(&q);
        assert_eq!(r.eval(&[3.0, 2.0]), c(5.0 * 4.0));
        assert_eq!(r.degree(), 3);
        assert_eq!(r.partial(1).eval(&[3.0, 2.0]), c(5.0 * 4.0));
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = Polynomial::coordinate(1, 0);
        let q = p.add(&p.scale(c(-1.0)));
        assert!(q.is_zero());
    }

    #[test]
    fn substitution_matches_direct_evaluation() {
        let p = Polynomial::monomial(vec![2, 1], c(1.5));
        let a = vec![vec![1.0, 2.0], vec![-0.5, 3.0]];
        let q = p.linear_substitute(&a);
        let y = [0.3, -0.7];
        let x = [a[0][0] * y[0] + a[0][1] * y[1], a[1][0] * y[0] + a[1][1] * y[1]];
        assert!((q.eval(&y) - p.eval(&x)).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn multiplication_is_pointwise(a in -3.0f64..3.0, b in -3.0f64..3.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let p = Polynomial::coordinate(2, 0).scale(c(a)).add(&Polynomial::constant(2, c(b)));
            let q = Polynomial::coordinate(2, 1).mul_coordinate(0);
            let lhs = p.mul(&q).eval(&[x, y]);
            let rhs = p.eval(&[x, y]) * q.eval(&[x, y]);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
