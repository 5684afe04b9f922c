//! Gauss-Legendre quadrature: fixed composite rules for grid-bound
//! integrals and a panel-doubling adaptive driver for scalar integrals.

use crate::error::{Result, SphqError};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // The middle node of odd rules is exactly zero.
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
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

/// A fixed quadrature rule on `[a, b]`: paired nodes and weights.
#[derive(Debug, Clone)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    /// Composite Gauss-Legendre rule: `panels` equal panels on `[a, b]`,
    /// `per_panel` nodes each.
    pub fn composite_gl(a: f64, b: f64, panels: usize, per_panel: usize) -> Self {
        assert!(b > a && panels >= 1 && per_panel >= 1);
        let (gx, gw) = gauss_legendre(per_panel);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        Rule1D { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Integrates `f` on `[a, b]` by doubling the composite-GL panel count
/// until two successive results differ by less than `tol` (relative to the
/// running magnitude), starting from `panels0` panels of 16 nodes.
///
/// Errors with diagnostics if the cap of 14 doublings is hit.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    panels0: usize,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut panels = panels0.max(1);
    let mut prev = Rule1D::composite_gl(a, b, panels, 16).integrate(&f);
    let mut last_delta = f64::INFINITY;
    for _ in 0..14 {
        panels *= 2;
        let next = Rule1D::composite_gl(a, b, panels, 16).integrate(&f);
        last_delta = (next - prev).abs();
        let scale = next.abs().max(prev.abs()).max(1.0);
        if last_delta <= tol * scale {
            return Ok(next);
        }
        prev = next;
    }
    Err(SphqError::Quadrature {
        what: format!("panel doubling capped at {panels} panels on [{a}, {b}]"),
        last_delta,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gl_nodes_match_reference() {
        // 5-point rule against tabulated values.
        let (x, w) = gauss_legendre(5);
        assert_abs_diff_eq!(x[0], -0.906_179_845_938_664, epsilon = 1e-14);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], 0.568_888_888_888_888_9, epsilon = 1e-14);
        assert_abs_diff_eq!(w[0], 0.236_926_885_056_189_08, epsilon = 1e-14);
    }

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let rule = Rule1D::composite_gl(0.0, 2.0, 3, 6);
        let got = rule.integrate(|x| x.powi(9) - 3.0 * x.powi(4) + 1.0);
        let want = 2.0f64.powi(10) / 10.0 - 3.0 * 2.0f64.powi(5) / 5.0 + 2.0;
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let got = integrate_adaptive(|x| (40.0 * x).cos(), 0.0, 3.0, 1e-12, 4).unwrap();
        assert_abs_diff_eq!(got, (120.0f64).sin() / 40.0, epsilon = 1e-11);
    }

    #[test]
    fn adaptive_reports_cap() {
        // Integrand with a genuine 1/sqrt singularity converges too slowly
        // for a tight tolerance within the doubling cap.
        let err = integrate_adaptive(|x| x.abs().powf(-0.5), 1e-300, 1.0, 1e-14, 1);
        assert!(err.is_err());
    }
}
