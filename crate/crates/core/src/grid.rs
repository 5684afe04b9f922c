//! Sampling grids and sampled functions.
//!
//! Both grids carry composite Gauss-Legendre quadrature nodes plus an extra
//! node at the origin (weight zero), so sampled functions double as
//! integrands without interpolation: `integral = sum(w_i * f_i * ...)`.
//! Radial functions represent `K`-bi-invariant functions through the
//! geodesic radius `r`; spectral functions are Weyl-even, sampled on
//! `lambda >= 0` only.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Result, SphqError};
use crate::quad::Rule1D;

fn grid_fingerprint(max: f64, nodes: &[f64]) -> u64 {
    let mut h = Sha256::new();
    h.update(max.to_le_bytes());
    for x in nodes {
        h.update(x.to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

macro_rules! define_grid {
    ($name:ident, $max_field:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone)]
        pub struct $name {
            pub $max_field: f64,
            /// Strictly increasing nodes; `nodes[0] == 0`.
            pub nodes: Vec<f64>,
            /// Quadrature weights (zero at the origin node).
            pub weights: Vec<f64>,
            fingerprint: u64,
        }

        impl $name {
            /// Origin node plus a composite Gauss-Legendre rule on
            /// `[0, max]` with `panels` panels of `per_panel` nodes.
            pub fn composite_gl(max: f64, panels: usize, per_panel: usize) -> Arc<Self> {
                assert!(max > 0.0, "grid extent must be positive");
                let rule = Rule1D::composite_gl(0.0, max, panels, per_panel);
                let mut nodes = Vec::with_capacity(rule.nodes.len() + 1);
                let mut weights = Vec::with_capacity(rule.nodes.len() + 1);
                nodes.push(0.0);
                weights.push(0.0);
                nodes.extend(rule.nodes);
                weights.extend(rule.weights);
                let fingerprint = grid_fingerprint(max, &nodes);
                Arc::new(Self {
                    $max_field: max,
                    nodes,
                    weights,
                    fingerprint,
                })
            }

            /// Uniform nodes with trapezoid weights. Used where finite
            /// differences want equal spacing, not for transform quadrature.
            pub fn uniform(max: f64, n_points: usize) -> Arc<Self> {
                assert!(max > 0.0 && n_points >= 2);
                let h = max / (n_points - 1) as f64;
                let nodes: Vec<f64> = (0..n_points).map(|i| i as f64 * h).collect();
                let mut weights = vec![h; n_points];
                weights[0] = 0.5 * h;
                weights[n_points - 1] = 0.5 * h;
                let fingerprint = grid_fingerprint(max, &nodes);
                Arc::new(Self {
                    $max_field: max,
                    nodes,
                    weights,
                    fingerprint,
                })
            }

            pub fn n_points(&self) -> usize {
                self.nodes.len()
            }

            /// Content hash; equal grids share storage and tables.
            pub fn fingerprint(&self) -> u64 {
                self.fingerprint
            }

            pub fn same_grid(&self, other: &Self) -> bool {
                self.fingerprint == other.fingerprint
            }
        }
    };
}

define_grid!(
    RadialGrid,
    r_max,
    "Geodesic-radius grid on `[0, r_max]` (space units)."
);
define_grid!(
    SpectralGrid,
    lambda_max,
    "Frequency grid on `[0, lambda_max]` (inverse space units)."
);

/// A sampled radial (`K`-bi-invariant) function.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl RadialFunction {
    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        RadialFunction {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn zero(grid: &Arc<RadialGrid>) -> Self {
        RadialFunction {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.n_points()],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cubic Lagrange interpolation on the 4 nearest nodes; zero beyond
    /// `r_max`, even reflection below 0.
    pub fn eval(&self, r: f64) -> f64 {
        let x = r.abs();
        if x > self.grid.r_max {
            return 0.0;
        }
        interp_cubic(&self.grid.nodes, &self.values, x)
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(SphqError::domain("non-finite radial samples"))
        }
    }

    /// Resamples onto another grid by interpolation (zero beyond `r_max`).
    pub fn resample(&self, grid: &Arc<RadialGrid>) -> Self {
        if self.grid.same_grid(grid) {
            return self.clone();
        }
        RadialFunction::from_fn(grid, |r| self.eval(r))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "node,value")?;
        for (r, v) in self.grid.nodes.iter().zip(&self.values) {
            writeln!(out, "{r:.17e},{v:.17e}")?;
        }
        Ok(())
    }

    /// Reads `node,value` rows (header mandatory) and rebuilds the grid
    /// with the stated nodes, attaching `weights` from `template` when the
    /// nodes match it, else trapezoid weights.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let rows = read_rows(path.as_ref(), &["node", "value"])?;
        let nodes: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let values: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        let grid = grid_from_nodes(nodes)?;
        Ok(RadialFunction { grid, values })
    }
}

/// A sampled Weyl-even spectral function (complex values; the radial
/// pipelines keep the imaginary part at zero).
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    pub grid: Arc<SpectralGrid>,
    pub values: Vec<Complex64>,
}

impl SpectralFunction {
    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid
            .nodes
            .iter()
            .map(|&l| Complex64::new(f(l), 0.0))
            .collect();
        SpectralFunction {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn zero(grid: &Arc<SpectralGrid>) -> Self {
        SpectralFunction {
            grid: Arc::clone(grid),
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Pointwise multiplication by a real multiplier `m(lambda)`.
    pub fn multiplied(&self, m: impl Fn(f64) -> f64) -> Self {
        let values = self
            .grid
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&l, v)| v * m(l))
            .collect();
        SpectralFunction {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "node,value_re,value_im")?;
        for (l, v) in self.grid.nodes.iter().zip(&self.values) {
            writeln!(out, "{l:.17e},{:.17e},{:.17e}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let rows = read_rows(path.as_ref(), &["node", "value_re", "value_im"])?;
        let nodes: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let values: Vec<Complex64> = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
        let grid = sgrid_from_nodes(nodes)?;
        Ok(SpectralFunction { grid, values })
    }
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let head = lines
        .next()
        .ok_or_else(|| SphqError::usage(format!("{}: empty file", path.display())))??;
    let got: Vec<&str> = head.trim().split(',').map(|s| s.trim()).collect();
    if got != header {
        return Err(SphqError::usage(format!(
            "{}: expected header '{}', got '{}'",
            path.display(),
            header.join(","),
            head.trim()
        )));
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| SphqError::usage(format!("{}: {e}", path.display())))?;
        if row.len() != header.len() {
            return Err(SphqError::usage(format!(
                "{}: row with {} fields, expected {}",
                path.display(),
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(SphqError::usage(format!(
            "{}: need at least 2 samples",
            path.display()
        )));
    }
    Ok(rows)
}

fn validate_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.first().copied() != Some(0.0) {
        return Err(SphqError::usage("first grid node must be 0"));
    }
    if !nodes.windows(2).all(|w| w[1] > w[0]) {
        return Err(SphqError::usage("grid nodes must be strictly increasing"));
    }
    Ok(())
}

fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

fn grid_from_nodes(nodes: Vec<f64>) -> Result<Arc<RadialGrid>> {
    validate_nodes(&nodes)?;
    let weights = trapezoid_weights(&nodes);
    let r_max = *nodes.last().unwrap();
    let fingerprint = grid_fingerprint(r_max, &nodes);
    Ok(Arc::new(RadialGrid {
        r_max,
        nodes,
        weights,
        fingerprint,
    }))
}

fn sgrid_from_nodes(nodes: Vec<f64>) -> Result<Arc<SpectralGrid>> {
    validate_nodes(&nodes)?;
    let weights = trapezoid_weights(&nodes);
    let lambda_max = *nodes.last().unwrap();
    let fingerprint = grid_fingerprint(lambda_max, &nodes);
    Ok(Arc::new(SpectralGrid {
        lambda_max,
        nodes,
        weights,
        fingerprint,
    }))
}

/// Cubic Lagrange interpolation on sorted nodes (extrapolating from the
/// boundary windows outside the node range).
pub fn interp_cubic(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    debug_assert!(n >= 2 && n == values.len());
    if x <= nodes[0] {
        return values[0];
    }
    let j = nodes.partition_point(|&t| t <= x).min(n - 1);
    // Window of 4 nodes around the bracketing pair.
    let lo = j.saturating_sub(2).min(n.saturating_sub(4));
    let k = (n - lo).min(4);
    let xs = &nodes[lo..lo + k];
    let ys = &values[lo..lo + k];
    let mut acc = 0.0;
    for i in 0..k {
        let mut li = 1.0;
        for m in 0..k {
            if m != i {
                li *= (x - xs[m]) / (xs[i] - xs[m]);
            }
        }
        acc += li * ys[i];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn composite_grid_invariants() {
        let g = RadialGrid::composite_gl(20.0, 25, 8);
        assert_eq!(g.nodes[0], 0.0);
        assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
        assert_abs_diff_eq!(g.weights.iter().sum::<f64>(), 20.0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_on_grid_weights() {
        let g = SpectralGrid::composite_gl(5.0, 20, 10);
        let s: f64 = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(&x, &w)| w * x.exp())
            .sum();
        assert_abs_diff_eq!(s, 5f64.exp() - 1.0, epsilon = 1e-10);
    }

    #[test]
    fn interp_matches_smooth_function() {
        let g = RadialGrid::composite_gl(4.0, 40, 6);
        let f = RadialFunction::from_fn(&g, |r| (r * 1.3).sin());
        for &r in &[0.13, 1.77, 3.99] {
            assert_abs_diff_eq!(f.eval(r), (r * 1.3).sin(), epsilon = 1e-8);
        }
        assert_eq!(f.eval(4.6), 0.0);
    }

    #[test]
    fn csv_roundtrip_radial_and_spectral() {
        let dir = tempfile::tempdir().unwrap();
        let g = RadialGrid::composite_gl(3.0, 10, 4);
        let f = RadialFunction::from_fn(&g, |r| (-r * r).exp());
        let p = dir.path().join("f.csv");
        f.write_csv(&p).unwrap();
        let back = RadialFunction::read_csv(&p).unwrap();
        assert_eq!(back.values, f.values);
        assert_eq!(back.grid.nodes, f.grid.nodes);

        let sg = SpectralGrid::composite_gl(7.0, 6, 5);
        let big = SpectralFunction::from_fn(&sg, |l| 1.0 / (1.0 + l * l));
        let ps = dir.path().join("big.csv");
        big.write_csv(&ps).unwrap();
        let back = SpectralFunction::read_csv(&ps).unwrap();
        assert_eq!(back.values, big.values);
    }

    #[test]
    fn csv_header_is_mandatory() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "0.0,1.0\n1.0,2.0\n").unwrap();
        assert!(RadialFunction::read_csv(&p).is_err());
    }

    proptest! {
        #[test]
        fn interpolation_is_exact_on_cubics(a in -2.0..2.0f64, b in -2.0..2.0f64, x in 0.0..6.0f64) {
            let g = RadialGrid::composite_gl(6.0, 12, 4);
            let f = RadialFunction::from_fn(&g, |r| a * r * r * r + b * r - 1.0);
            let want = a * x * x * x + b * x - 1.0;
            prop_assert!((f.eval(x) - want).abs() < 1e-9 * (1.0 + want.abs()));
        }
    }
}
