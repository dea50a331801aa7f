//! Truncated multivariate Taylor jets. A jet of order `N` in `k` variables
//! stores the Taylor coefficients `c_α` for `|α| ≤ N`; exact partial
//! derivatives are recovered as `∂^α f = α! c_α`.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::poly::Polynomial;

#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    order: u32,
    indices: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
    /// (i, j, k) with α_i + α_j = α_k
    mul_table: Vec<(usize, usize, usize)>,
}

impl JetSpace {
    pub fn new(nvars: usize, order: u32) -> Arc<Self> {
        let mut indices = Vec::new();
        let mut cur = vec![0u32; nvars];
        enumerate(&mut indices, &mut cur, 0, order);
        indices.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
        let lookup: HashMap<Vec<u32>, usize> =
            indices.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut mul_table = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                let s: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = lookup.get(&s) {
                    mul_table.push((i, j, k));
                }
            }
        }
        Arc::new(JetSpace { nvars, order, indices, lookup, mul_table })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

fn enumerate(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for p in 0..=left {
        cur[pos] = p;
        enumerate(out, cur, pos + 1, left - p);
    }
    cur[pos] = 0;
}

#[derive(Debug, Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    c: Vec<Complex64>,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, v: Complex64) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); space.len()];
        c[0] = v;
        Jet { space: space.clone(), c }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Self::constant(space, Complex64::new(0.0, 0.0))
    }

    /// The jet of the coordinate function `x_a` at the base value `x0`.
    pub fn variable(space: &Arc<JetSpace>, a: usize, x0: f64) -> Self {
        let mut j = Self::constant(space, Complex64::new(x0, 0.0));
        if space.order >= 1 {
            let mut e = vec![0; space.nvars];
            e[a] = 1;
            let idx = space.index_of(&e).expect("first-order index present");
            j.c[idx] = Complex64::new(1.0, 0.0);
        }
        j
    }

    /// Taylor expansion of a polynomial around `x0`.
    pub fn from_polynomial(space: &Arc<JetSpace>, p: &Polynomial, x0: &[f64]) -> Self {
        let vars: Vec<Jet> = (0..space.nvars).map(|a| Jet::variable(space, a, x0[a])).collect();
        let mut acc = Jet::zero(space);
        for (e, coef) in p.terms() {
            let mut m = Jet::constant(space, *coef);
            for (a, &pw) in e.iter().enumerate() {
                for _ in 0..pw {
                    m = m.mul(&vars[a]);
                }
            }
            acc = acc.add(&m);
        }
        acc
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeff(&self, alpha: &[u32]) -> Complex64 {
        match self.space.index_of(alpha) {
            Some(i) => self.c[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `∂^α f` at the base point.
    pub fn derivative(&self, alpha: &[u32]) -> Complex64 {
        let fact: f64 = alpha.iter().map(|&p| (1..=p).map(f64::from).product::<f64>()).product();
        self.coeff(alpha) * fact
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect();
        Jet { space: self.space.clone(), c }
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet { space: self.space.clone(), c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn add_scalar(&self, s: Complex64) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let mut c = vec![Complex64::new(0.0, 0.0); self.c.len()];
        for &(i, j, k) in &self.space.mul_table {
            c[k] += self.c[i] * o.c[j];
        }
        Jet { space: self.space.clone(), c }
    }

    /// The nilpotent part `f - f(x0)`.
    fn tail(&self) -> Jet {
        let mut j = self.clone();
        j.c[0] = Complex64::new(0.0, 0.0);
        j
    }

    /// Σ_m coeffs[m] δ^m for the nilpotent tail δ.
    fn series(&self, coeffs: &[Complex64]) -> Jet {
        let d = self.tail();
        let mut acc = Jet::constant(&self.space, coeffs[0]);
        let mut pw = Jet::constant(&self.space, Complex64::new(1.0, 0.0));
        for &cm in coeffs.iter().skip(1) {
            pw = pw.mul(&d);
            acc = acc.add(&pw.scale(cm));
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let a0 = self.c[0];
        let n = self.space.order as usize;
        let coeffs: Vec<Complex64> = (0..=n).map(|m| (-1.0f64).powi(m as i32) / a0.powi(m as i32 + 1)).collect();
        self.series(&coeffs)
    }

    pub fn exp(&self) -> Jet {
        let e0 = self.c[0].exp();
        let n = self.space.order as usize;
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut f = 1.0;
        for m in 0..=n {
            if m > 0 {
                f *= m as f64;
            }
            coeffs.push(e0 / f);
        }
        self.series(&coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn enumerates_all_multi_indices() {
        let s = JetSpace::new(2, 4);
        assert_eq!(s.len(), 15);
        let s = JetSpace::new(3, 2);
        assert_eq!(s.len(), 10);
    }

    #[test]
    fn exp_of_square_derivatives() {
        // f(x) = exp(x^2) at x0 = 0.3: f' = 2x f, f'' = (2 + 4x^2) f
        let s = JetSpace::new(1, 4);
        let x = Jet::variable(&s, 0, 0.3);
        let f = x.mul(&x).exp();
        let f0 = (0.09f64).exp();
        assert!((f.derivative(&[1]).re - 0.6 * f0).abs() < 1e-13);
        assert!((f.derivative(&[2]).re - (2.0 + 4.0 * 0.09) * f0).abs() < 1e-13);
        let d3 = (12.0 * 0.3 + 8.0 * 0.027) * f0;
        assert!((f.derivative(&[3]).re - d3).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_mixed_partial() {
        // f = 1/(1 + x y) at (0.5, 2): ∂x∂y f = (x y - 1)/(1 + x y)^3
        let s = JetSpace::new(2, 3);
        let x = Jet::variable(&s, 0, 0.5);
        let y = Jet::variable(&s, 1, 2.0);
        let f = x.mul(&y).add_scalar(c(1.0)).recip();
        let expected = (1.0 - 1.0) / 8.0;
        assert!((f.derivative(&[1, 1]).re - expected).abs() < 1e-14);
        // ∂x f = -y/(1+xy)^2
        assert!((f.derivative(&[1, 0]).re + 2.0 / 4.0).abs() < 1e-14);
    }
}
