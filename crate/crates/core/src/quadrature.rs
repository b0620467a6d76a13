//! Gauss–Legendre rules.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[a, b]`, nodes ascending.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integration matrix `S[j][l] = ∫_a^{x_j} ℓ_l(s) ds` for the Lagrange basis on `nodes`.
///
/// Each entry is computed with a Gauss rule of the same size on `[a, x_j]`,
/// which integrates the degree `n-1` basis polynomials exactly.
pub fn integration_matrix(nodes: &[f64], a: f64) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let (ref_x, ref_w) = gauss_legendre(n, 0.0, 1.0);
    nodes
        .iter()
        .map(|&xj| {
            let len = xj - a;
            let mut row = vec![0.0; n];
            for (&u, &w) in ref_x.iter().zip(&ref_w) {
                let s = a + len * u;
                for (l, r) in row.iter_mut().enumerate() {
                    *r += len * w * lagrange(nodes, l, s);
                }
            }
            row
        })
        .collect()
}

fn lagrange(nodes: &[f64], l: usize, s: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != l)
        .fold(1.0, |acc, (_, &xm)| acc * (s - xm) / (nodes[l] - xm))
}
