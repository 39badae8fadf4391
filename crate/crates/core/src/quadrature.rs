//! Gauss–Legendre, collapsed triangle and tensor prism quadrature rules on
//! reference elements.

use alloc::vec::Vec;
use core::f64::consts::PI;


/// Gauss–Legendre rule with `n` points on `[0, 1]`; exact to degree `2n − 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        if d != 0.0 {
            dp = d;
        }
        x.push(0.5 * (1.0 - t));
        w.push(1.0 / ((1.0 - t * t) * dp * dp));
    }
    (x, w)
}

/// Legendre polynomial `P_n(t)` and its derivative.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Points and weights on the reference triangle `{ξ, η ≥ 0, ξ + η ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Collapsed (Duffy) Gauss rule with `n × n` points; exact to degree `2n − 2`.
pub fn triangle_rule(n: usize) -> TriangleRule {
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&u, &wu) in x.iter().zip(&w) {
        for (&v, &wv) in x.iter().zip(&w) {
            points.push([u, v * (1.0 - u)]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    TriangleRule { points, weights }
}

/// Rule on the reference prism `triangle × [0, 1]`; weights sum to 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

pub fn prism_rule(n_tri: usize, n_z: usize) -> QuadratureRule {
    let tri = triangle_rule(n_tri);
    let (z, wz) = gauss_legendre(n_z);
    let mut points = Vec::with_capacity(tri.points.len() * z.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (p, &w) in tri.points.iter().zip(&tri.weights) {
        for (&zz, &ww) in z.iter().zip(&wz) {
            points.push([p[0], p[1], zz]);
            weights.push(w * ww);
        }
    }
    QuadratureRule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..8 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) as i32 {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
                assert!((q - 1.0 / (p + 1) as f64).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn triangle_rule_exactness() {
        // ∫ ξ^a η^b over the reference triangle = a! b! / (a + b + 2)!
        for n in 1..6 {
            let r = triangle_rule(n);
            for a in 0..=(2 * n - 2) as u32 {
                for b in 0..=(2 * n - 2) as u32 - a {
                    let q: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((q - exact).abs() < 1e-14 * exact.max(1e-3), "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn prism_weights_sum_to_reference_volume() {
        let r = prism_rule(4, 4);
        assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }
}
