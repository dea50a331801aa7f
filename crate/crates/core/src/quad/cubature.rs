use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::rules::{gauss_legendre, GK15_WG, GK15_WK, GK15_X};
use super::{CSum, Estimate, Integrand};

/// Floor on reported errors: accumulated round-off relative to the
/// magnitude of the summed terms.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions { rel_tol: 1e-8, abs_tol: 1e-13, max_evals: 2_000_000 }
    }
}

struct Region {
    id: u64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: Complex64,
    error: f64,
    split_axis: usize,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            // older regions first among ties
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn rule_evals(dim: usize) -> usize {
    if dim == 1 {
        15
    } else {
        1 + 4 * dim + 2 * dim * (dim - 1) + (1usize << dim)
    }
}

fn apply_rule<F: Integrand + ?Sized>(f: &F, lo: &[f64], hi: &[f64]) -> (Complex64, f64, usize) {
    if lo.len() == 1 {
        let (v, e) = gauss_kronrod_15(f, lo[0], hi[0]);
        (v, e, 0)
    } else {
        genz_malik(f, lo, hi)
    }
}

fn gauss_kronrod_15<F: Integrand + ?Sized>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f.eval(&[c]);
    let mut k = fc * GK15_WK[7];
    let mut g = fc * GK15_WG[3];
    for j in 0..7 {
        let dx = h * GK15_X[j];
        let s = f.eval(&[c - dx]) + f.eval(&[c + dx]);
        k += s * GK15_WK[j];
        if j % 2 == 1 {
            g += s * GK15_WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).norm())
}

/// Genz–Malik degree-7 rule with embedded degree-5 error estimate.
/// Returns (value, error, axis to split).
fn genz_malik<F: Integrand + ?Sized>(f: &F, lo: &[f64], hi: &[f64]) -> (Complex64, f64, usize) {
    let n = lo.len();
    let nf = n as f64;
    let l2 = (9.0f64 / 70.0).sqrt();
    let l4 = (9.0f64 / 10.0).sqrt();
    let l5 = (9.0f64 / 19.0).sqrt();
    let w1 = (12824.0 - 9120.0 * nf + 400.0 * nf * nf) / 19683.0;
    let w2 = 980.0 / 6561.0;
    let w3 = (1820.0 - 400.0 * nf) / 19683.0;
    let w4 = 200.0 / 19683.0;
    let w5 = 6859.0 / 19683.0 / (1u64 << n) as f64;
    let v1 = (729.0 - 950.0 * nf + 50.0 * nf * nf) / 729.0;
    let v2 = 245.0 / 486.0;
    let v3 = (265.0 - 100.0 * nf) / 1458.0;
    let v4 = 25.0 / 729.0;

    let c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let h: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let vol: f64 = h.iter().map(|h| 2.0 * h).product();

    let mut x = c.clone();
    let f1 = f.eval(&x);
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut s3 = Complex64::new(0.0, 0.0);
    let mut best_axis = 0;
    let mut best_diff = -1.0;
    let ratio = (l2 / l4) * (l2 / l4);
    for i in 0..n {
        x[i] = c[i] - l2 * h[i];
        let a = f.eval(&x);
        x[i] = c[i] + l2 * h[i];
        let b = f.eval(&x);
        x[i] = c[i] - l4 * h[i];
        let cc = f.eval(&x);
        x[i] = c[i] + l4 * h[i];
        let d = f.eval(&x);
        x[i] = c[i];
        s2 += a + b;
        s3 += cc + d;
        let diff = ((a + b - f1 * 2.0) - (cc + d - f1 * 2.0) * ratio).norm();
        if diff > best_diff * (1.0 + 1e-12) || (diff >= best_diff && h[i] > h[best_axis]) {
            best_diff = diff;
            best_axis = i;
        }
    }
    let mut s4 = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            for (si, sj) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                x[i] = c[i] + si * l4 * h[i];
                x[j] = c[j] + sj * l4 * h[j];
                s4 += f.eval(&x);
            }
            x[i] = c[i];
            x[j] = c[j];
        }
    }
    let mut s5 = Complex64::new(0.0, 0.0);
    for mask in 0..(1usize << n) {
        for i in 0..n {
            let sign = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
            x[i] = c[i] + sign * l5 * h[i];
        }
        s5 += f.eval(&x);
    }
    let i7 = (f1 * w1 + s2 * w2 + s3 * w3 + s4 * w4 + s5 * w5) * vol;
    let i5 = (f1 * v1 + s2 * v2 + s3 * v3 + s4 * v4) * vol;
    (i7, (i7 - i5).norm(), best_axis)
}

/// Global adaptive cubature over the box `[lo, hi]`.
pub fn adaptive<F: Integrand + ?Sized>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    opts: &AdaptiveOptions,
) -> Estimate {
    let dim = lo.len();
    assert_eq!(dim, hi.len());
    if dim == 0 {
        return Estimate { value: f.eval(&[]), error: 0.0, evals: 1, converged: true };
    }
    if lo.iter().zip(hi).any(|(a, b)| a == b) {
        return Estimate::zero();
    }
    let per_rule = rule_evals(dim);
    let mut next_id = 0u64;
    let make = |lo: Vec<f64>, hi: Vec<f64>, id: u64| -> Region {
        let (value, error, axis) = apply_rule(f, &lo, &hi);
        let split_axis = if dim == 1 { 0 } else { axis };
        Region { id, lo, hi, value, error, split_axis }
    };
    let root = make(lo.to_vec(), hi.to_vec(), next_id);
    next_id += 1;
    let mut evals = per_rule;
    let mut total_err = root.error;
    let mut total_val = root.value;
    let mut heap = BinaryHeap::new();
    heap.push(root);
    let mut converged = false;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total_val.norm());
        if total_err <= tol {
            converged = true;
            break;
        }
        if evals + 2 * per_rule > opts.max_evals {
            break;
        }
        // Split a deterministic batch of the worst regions in parallel.
        let budget_regions = (opts.max_evals - evals) / (2 * per_rule);
        let batch = heap.len().clamp(1, 16).min(budget_regions.max(1));
        let mut work = Vec::with_capacity(2 * batch);
        for _ in 0..batch {
            let Some(r) = heap.pop() else { break };
            total_err -= r.error;
            total_val -= r.value;
            let ax = r.split_axis;
            let mid = 0.5 * (r.lo[ax] + r.hi[ax]);
            let mut hi_a = r.hi.clone();
            hi_a[ax] = mid;
            let mut lo_b = r.lo.clone();
            lo_b[ax] = mid;
            work.push((r.lo.clone(), hi_a, next_id));
            work.push((lo_b, r.hi.clone(), next_id + 1));
            next_id += 2;
        }
        let children: Vec<Region> = work.into_par_iter().map(|(l, h, id)| make(l, h, id)).collect();
        evals += children.len() * per_rule;
        for c in children {
            total_err += c.error;
            total_val += c.value;
            heap.push(c);
        }
    }
    // Exact re-summation in creation order.
    let mut regions: Vec<Region> = heap.into_vec();
    regions.sort_by_key(|r| r.id);
    let value = regions.iter().map(|r| r.value).collect::<CSum>().value();
    let mut err = super::KahanSum::new();
    let mut mag = 0.0;
    for r in &regions {
        err.add(r.error);
        mag += r.value.norm();
    }
    Estimate { value, error: err.value().max(ROUNDOFF * mag), evals, converged }
}

#[derive(Debug, Clone)]
pub struct TensorOptions {
    /// Panels per axis.
    pub panels: Vec<usize>,
    /// Gauss–Legendre order per panel for the reported value.
    pub order: usize,
    /// Lower order used for the error estimate.
    pub check_order: usize,
}

impl TensorOptions {
    pub fn uniform(dim: usize, panels: usize, order: usize) -> Self {
        TensorOptions { panels: vec![panels; dim], order, check_order: order.saturating_sub(4).max(2) }
    }
}

fn tensor_once<F: Integrand + ?Sized>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    panels: &[usize],
    order: usize,
) -> (Complex64, f64, usize) {
    let dim = lo.len();
    let (gx, gw) = gauss_legendre(order);
    let axes: Vec<Vec<(f64, f64)>> = (0..dim)
        .map(|a| {
            let p = panels[a].max(1);
            let h = (hi[a] - lo[a]) / p as f64;
            let mut nodes = Vec::with_capacity(p * order);
            for k in 0..p {
                let c = lo[a] + (k as f64 + 0.5) * h;
                for (x, w) in gx.iter().zip(&gw) {
                    nodes.push((c + 0.5 * h * x, 0.5 * h * w));
                }
            }
            nodes
        })
        .collect();
    let inner: usize = axes[1..].iter().map(|v| v.len()).product();
    let partials: Vec<(Complex64, f64)> = axes[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut acc = CSum::new();
            let mut mag = 0.0;
            let mut idx = vec![0usize; dim];
            let mut pt = vec![0.0; dim];
            pt[0] = x0;
            for _ in 0..inner.max(1) {
                let mut w = w0;
                for a in 1..dim {
                    let (x, wa) = axes[a][idx[a]];
                    pt[a] = x;
                    w *= wa;
                }
                let v = f.eval(&pt) * w;
                mag += v.norm();
                acc.add(v);
                for a in (1..dim).rev() {
                    idx[a] += 1;
                    if idx[a] < axes[a].len() {
                        break;
                    }
                    idx[a] = 0;
                }
            }
            (acc.value(), mag)
        })
        .collect();
    let evals = axes.iter().map(|v| v.len()).product();
    let mag: f64 = partials.iter().map(|p| p.1).sum();
    (partials.into_iter().map(|p| p.0).collect::<CSum>().value(), mag, evals)
}

/// Composite tensor Gauss–Legendre over `[lo, hi]`; the error estimate is
/// the difference against a lower-order rule on the same panels.
pub fn tensor<F: Integrand + ?Sized>(f: &F, lo: &[f64], hi: &[f64], opts: &TensorOptions) -> Estimate {
    let dim = lo.len();
    assert_eq!(dim, hi.len());
    assert_eq!(dim, opts.panels.len());
    if dim == 0 {
        return Estimate { value: f.eval(&[]), error: 0.0, evals: 1, converged: true };
    }
    let (v, mag, n1) = tensor_once(f, lo, hi, &opts.panels, opts.order);
    let (vc, _, n2) = tensor_once(f, lo, hi, &opts.panels, opts.check_order);
    let error = (v - vc).norm().max(ROUNDOFF * mag);
    Estimate { value: v, error, evals: n1 + n2, converged: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn genz_malik_is_exact_for_degree_seven() {
        for dim in 2..=5 {
            let lo = vec![-0.3; dim];
            let hi = vec![1.1; dim];
            let f = |x: &[f64]| c(x[0].powi(7) + x[1].powi(4) * x[0].powi(3) + 2.0);
            let (v, _, _) = genz_malik(&f, &lo, &hi);
            let a = -0.3f64;
            let b = 1.1f64;
            let w = b - a;
            let i7 = (b.powi(8) - a.powi(8)) / 8.0;
            let i4 = (b.powi(5) - a.powi(5)) / 5.0;
            let i3 = (b.powi(4) - a.powi(4)) / 4.0;
            let exact = i7 * w.powi(dim as i32 - 1)
                + i4 * i3 * w.powi(dim as i32 - 2)
                + 2.0 * w.powi(dim as i32);
            assert!((v.re - exact).abs() < 1e-11 * exact.abs(), "dim {dim}: {} vs {exact}", v.re);
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: &[f64]| c(1.0 / (1e-2 + (x[0] - 0.3).powi(2) + (x[1] - 0.6).powi(2)));
        let est = adaptive(&f, &[0.0, 0.0], &[1.0, 1.0], &AdaptiveOptions { rel_tol: 1e-8, ..Default::default() });
        let reference = tensor(&f, &[0.0, 0.0], &[1.0, 1.0], &TensorOptions::uniform(2, 200, 12));
        assert!(est.converged);
        assert!((est.value - reference.value).norm() < 1e-6 * reference.value.norm());
    }

    #[test]
    fn one_dimensional_oscillatory() {
        let t = 7.0;
        let f = |x: &[f64]| Complex64::new(0.0, -t * x[0]).exp();
        let est = adaptive(&f, &[-1.0], &[1.0], &AdaptiveOptions::default());
        let exact = 2.0 * t.sin() / t;
        assert!((est.value.re - exact).abs() < 1e-12);
        assert!(est.value.im.abs() < 1e-12);
    }

    #[test]
    fn adaptive_is_deterministic() {
        let f = |x: &[f64]| c((x[0] * 13.0).sin() * (x[1] * 7.0 + x[2]).cos());
        let o = AdaptiveOptions { rel_tol: 1e-9, ..Default::default() };
        let a = adaptive(&f, &[0.0; 3], &[1.0; 3], &o);
        let b = adaptive(&f, &[0.0; 3], &[1.0; 3], &o);
        assert_eq!(a.value, b.value);
        assert_eq!(a.evals, b.evals);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = |x: &[f64]| c(1.0 / (1e-6 + x[0] * x[0] + x[1] * x[1]).sqrt());
        let est = adaptive(&f, &[-1.0, -1.0], &[1.0, 1.0], &AdaptiveOptions { rel_tol: 1e-14, abs_tol: 0.0, max_evals: 5_000 });
        assert!(!est.converged);
        assert!(est.evals <= 5_000);
        assert!(est.value.re > 0.0);
    }
}
