//! Mixed-degree exterior algebra at a point of a chart.
//!
//! A [`Graded`] value on a `d`-dimensional chart stores one complex
//! coefficient per subset `I ⊆ {0..d}`, indexed by bitmask; the coefficient
//! of mask `I = {i_1 < … < i_p}` multiplies `dx_{i_1} ∧ … ∧ dx_{i_p}`.

use num_complex::Complex64;

pub const MAX_DIM: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Graded {
    dim: usize,
    c: Vec<Complex64>,
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Sign of moving the basis elements of `b` past those of `a` when merging
/// into increasing order: (−1)^{#{(i,j): i ∈ a, j ∈ b, i > j}}.
fn merge_sign(a: usize, b: usize) -> f64 {
    let mut count = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        bb &= bb - 1;
        count += (a >> (j + 1)).count_ones();
    }
    if count % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Graded {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "chart dimension {dim} exceeds {MAX_DIM}");
        Graded { dim, c: vec![ZERO; 1 << dim] }
    }

    pub fn scalar(dim: usize, v: Complex64) -> Self {
        let mut g = Self::zero(dim);
        g.c[0] = v;
        g
    }

    pub fn basis(dim: usize, mask: usize, v: Complex64) -> Self {
        let mut g = Self::zero(dim);
        g.c[mask] = v;
        g
    }

    /// The 1-form Σ v_i dx_i.
    pub fn one_form(v: &[f64]) -> Self {
        let mut g = Self::zero(v.len());
        for (i, &vi) in v.iter().enumerate() {
            g.c[1 << i] = Complex64::new(vi, 0.0);
        }
        g
    }

    /// The 2-form Σ_{i<j} m[i][j] dx_i ∧ dx_j from an antisymmetric matrix.
    pub fn two_form(m: &nalgebra::DMatrix<f64>) -> Self {
        let d = m.nrows();
        let mut g = Self::zero(d);
        for i in 0..d {
            for j in (i + 1)..d {
                g.c[(1 << i) | (1 << j)] = Complex64::new(m[(i, j)], 0.0);
            }
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, mask: usize) -> Complex64 {
        self.c[mask]
    }

    pub fn set(&mut self, mask: usize, v: Complex64) {
        self.c[mask] = v;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    pub fn top(&self) -> Complex64 {
        self.c[(1 << self.dim) - 1]
    }

    pub fn scalar_part(&self) -> Complex64 {
        self.c[0]
    }

    /// Homogeneous component of degree `p`.
    pub fn degree_part(&self, p: usize) -> Graded {
        let mut g = Graded::zero(self.dim);
        for (m, v) in self.c.iter().enumerate() {
            if m.count_ones() as usize == p {
                g.c[m] = *v;
            }
        }
        g
    }

    /// Degrees carrying a coefficient larger than `tol` in modulus.
    pub fn support_degrees(&self, tol: f64) -> Vec<usize> {
        let mut d = vec![false; self.dim + 1];
        for (m, v) in self.c.iter().enumerate() {
            if v.norm() > tol {
                d[m.count_ones() as usize] = true;
            }
        }
        d.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn add_assign(&mut self, o: &Graded) {
        debug_assert_eq!(self.dim, o.dim);
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += b;
        }
    }

    pub fn add_scaled(&mut self, o: &Graded, s: Complex64) {
        debug_assert_eq!(self.dim, o.dim);
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += b * s;
        }
    }

    pub fn add(&self, o: &Graded) -> Graded {
        let mut g = self.clone();
        g.add_assign(o);
        g
    }

    pub fn sub(&self, o: &Graded) -> Graded {
        let mut g = self.clone();
        g.add_scaled(o, Complex64::new(-1.0, 0.0));
        g
    }

    pub fn scale(&self, s: Complex64) -> Graded {
        Graded { dim: self.dim, c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn wedge(&self, o: &Graded) -> Graded {
        debug_assert_eq!(self.dim, o.dim);
        let mut g = Graded::zero(self.dim);
        for (a, va) in self.c.iter().enumerate() {
            if *va == ZERO {
                continue;
            }
            for (b, vb) in o.c.iter().enumerate() {
                if *vb == ZERO || a & b != 0 {
                    continue;
                }
                g.c[a | b] += va * vb * merge_sign(a, b);
            }
        }
        g
    }

    /// Interior product ι_v with a tangent vector.
    pub fn contract(&self, v: &[f64]) -> Graded {
        debug_assert_eq!(v.len(), self.dim);
        let mut g = Graded::zero(self.dim);
        for (m, val) in self.c.iter().enumerate() {
            if *val == ZERO || m == 0 {
                continue;
            }
            let mut bits = m;
            let mut pos = 0;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if v[i] != 0.0 {
                    let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                    g.c[m & !(1 << i)] += val * (sign * v[i]);
                }
                pos += 1;
            }
        }
        g
    }

    /// Exterior power series Σ_{p=0}^{dim/2} x^p/p! for a 2-form `x`
    /// (terminates by nilpotency).
    pub fn exp_even(&self) -> Graded {
        let mut acc = Graded::scalar(self.dim, Complex64::new(1.0, 0.0));
        let mut pw = acc.clone();
        for p in 1..=(self.dim / 2) {
            pw = pw.wedge(self).scale(Complex64::new(1.0 / p as f64, 0.0));
            acc.add_assign(&pw);
        }
        acc
    }
}
