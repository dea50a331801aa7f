//! Sequence extrapolation: Neville–Aitken polynomial extrapolation to a
//! limit point and Richardson steps with a known leading order.

use num_complex::Complex64;

/// Polynomial extrapolation of `(h_j, y_j)` to `h = x0` via Neville's
/// tableau. Returns the value and the size of the last correction, which
/// serves as the error estimate.
pub fn neville(h: &[f64], y: &[Complex64], x0: f64) -> (Complex64, f64) {
    assert_eq!(h.len(), y.len());
    assert!(!h.is_empty());
    let n = h.len();
    let value = neville_value(h, y, x0);
    if n == 1 {
        return (value, 0.0);
    }
    // compare with the extrapolant that drops the coarsest point
    let alt = neville_value(&h[1..], &y[1..], x0);
    (value, (value - alt).norm())
}

fn neville_value(h: &[f64], y: &[Complex64], x0: f64) -> Complex64 {
    let n = h.len();
    let mut p: Vec<Complex64> = y.to_vec();
    // p[i] after pass m holds the interpolant through points i..=i+m.
    for m in 1..n {
        for i in 0..(n - m) {
            let num = p[i + 1] * (x0 - h[i]) - p[i] * (x0 - h[i + m]);
            p[i] = num / (h[i + m] - h[i]);
        }
    }
    p[0]
}

/// One Richardson step eliminating an `O(h^order)` term between a coarse
/// value at `h` and a fine value at `h / ratio`.
pub fn richardson_step(coarse: Complex64, fine: Complex64, ratio: f64, order: f64) -> Complex64 {
    let r = ratio.powf(order);
    (fine * r - coarse) / (r - 1.0)
}

/// Repeated Richardson elimination on a geometric sequence `h_j = h_0 / ratio^j`
/// assuming the error expands in powers `order, order+1, ...`.
pub fn richardson_table(y: &[Complex64], ratio: f64, order: f64) -> (Complex64, f64) {
    assert!(!y.is_empty());
    let mut row: Vec<Complex64> = y.to_vec();
    let mut prev_best = row[row.len() - 1];
    let mut best = prev_best;
    let mut p = order;
    while row.len() > 1 {
        let next: Vec<Complex64> =
            row.windows(2).map(|w| richardson_step(w[0], w[1], ratio, p)).collect();
        prev_best = best;
        best = next[next.len() - 1];
        row = next;
        p += 1.0;
    }
    (best, (best - prev_best).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn neville_reproduces_polynomials() {
        let h = [0.4, 0.2, 0.1, 0.05, 0.025];
        let y: Vec<Complex64> = h.iter().map(|&x| c(3.0 - 2.0 * x + 0.5 * x * x * x)).collect();
        let (v, e) = neville(&h, &y, 0.0);
        assert!((v.re - 3.0).abs() < 1e-12);
        assert!(e < 1e-10);
    }

    #[test]
    fn neville_on_pole_function() {
        let t = 1.0;
        let f = |e: f64| Complex64::new(0.0, 2.0 * std::f64::consts::PI) / Complex64::new(e, -t);
        let h: Vec<f64> = (0..7).map(|j| 0.2 * 0.5f64.powi(j)).collect();
        let y: Vec<Complex64> = h.iter().map(|&e| f(e)).collect();
        let (v, err) = neville(&h, &y, 0.0);
        let exact = c(-2.0 * std::f64::consts::PI / t);
        assert!((v - exact).norm() < 1e-8);
        assert!(err < 1e-6);
    }

    #[test]
    fn richardson_removes_first_order_term() {
        let y: Vec<Complex64> = (0..5).map(|j| c(1.0 + 0.3 / 2f64.powi(j) + 0.1 / 4f64.powi(j))).collect();
        let (v, _) = richardson_table(&y, 2.0, 1.0);
        assert!((v.re - 1.0).abs() < 1e-12);
    }
}
