//! Coercive Galerkin resolvent solves for `(q(sigma, D) + alpha) u = f`.
//!
//! The trial space is spanned by band-limited spectral elements: one
//! element per Gauss node of a composite rule on `[0, lambda_gal]`,
//! `e_j = sqrt(w_j omega_j) phi_{lambda_j}`, orthonormal in the discrete
//! Plancherel inner product. Constant-coefficient symbols diagonalize
//! exactly in this basis (the solve reproduces pointwise division by
//! `q1 + alpha`), so the assembled system isolates the spatial
//! perturbation `q2`, whose coupling matrix is an honest radial quadrature
//! over the support of the coefficients.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SphqError};
use crate::exponent::GangolliExponent;
use crate::grid::{RadialFunction, SpectralGrid};
use crate::par;
use crate::quad::Rule1D;
use crate::symbol::GangolliSymbol;
use crate::table::{self, PhiTable};
use crate::transform::SphericalTransform;

/// Largest supported basis dimension.
pub const MAX_BASIS: usize = 512;

/// Assembled Galerkin data for one `(symbol, alpha)` pair.
pub struct GalerkinSystem {
    /// Spectral grid carrying the basis nodes (`nodes[0] = 0` excluded
    /// from the basis).
    gal_sgrid: Arc<SpectralGrid>,
    /// Basis normalizers `sqrt(w_j omega_j)`.
    c_norm: Vec<f64>,
    /// Plancherel density at the basis nodes.
    omega: Vec<f64>,
    /// The bilinear form `B[i][j] = <(q(sigma,D)+alpha) e_j, e_i>`.
    pub b: DMatrix<f64>,
    /// Diagonal of the `H^{psi,1}` Gram matrix: `1 + psi(lambda_j)`.
    pub gram_psi1: Vec<f64>,
    pub alpha: f64,
    pub c0: f64,
    symbol: GangolliSymbol,
    /// `phi` at (gal-grid frequencies x transform radial nodes).
    table: Arc<PhiTable>,
}

impl GalerkinSystem {
    pub fn n_basis(&self) -> usize {
        self.c_norm.len()
    }

    pub fn basis_frequencies(&self) -> &[f64] {
        &self.gal_sgrid.nodes[1..]
    }
}

/// Smallest shift making `q1 + alpha >= c0 (1 + psi)` on the grid:
/// `alpha_0 = sup (c0 (1 + psi) - q1)`, floored at zero.
pub fn alpha0_compute(q: &GangolliSymbol, psi_ref: &GangolliExponent, c0: f64, sgrid: &SpectralGrid) -> f64 {
    let mut sup: f64 = 0.0;
    for &l in &sgrid.nodes {
        sup = sup.max(c0 * (1.0 + psi_ref.psi(l)) - q.q1(l));
    }
    sup
}

/// Assembles `B_alpha` and the Sobolev Gram diagonal over an `n_basis`
/// dimensional band-limited basis on `[0, lambda_gal]`.
///
/// `n_basis` must be a multiple of 8 and at most 512; `c0` comes from the
/// comparability audit and is carried for the coercivity check.
pub fn assemble_bilinear_form(
    t: &SphericalTransform,
    symbol: &GangolliSymbol,
    alpha: f64,
    c0: f64,
    n_basis: usize,
    lambda_gal: f64,
) -> Result<GalerkinSystem> {
    if n_basis == 0 || n_basis % 8 != 0 || n_basis > MAX_BASIS {
        return Err(SphqError::usage(format!(
            "n_basis must be a positive multiple of 8 up to {MAX_BASIS}, got {n_basis}"
        )));
    }
    let gal_sgrid = SpectralGrid::composite_gl(lambda_gal, n_basis / 8, 8);
    let table = table::get_or_build(t.space(), &gal_sgrid, t.rgrid(), t.exec_mode())?;
    let n = n_basis;
    let omega: Vec<f64> = (1..=n)
        .map(|j| t.space().plancherel_density(gal_sgrid.nodes[j]))
        .collect();
    let c_norm: Vec<f64> = (1..=n)
        .map(|j| (gal_sgrid.weights[j] * omega[j - 1]).sqrt())
        .collect();
    let q1_alpha: Vec<f64> = (1..=n)
        .map(|j| symbol.q1(gal_sgrid.nodes[j]) + alpha)
        .collect();
    let gram_psi1: Vec<f64> = (1..=n)
        .map(|j| 1.0 + symbol.psi.psi(gal_sgrid.nodes[j]))
        .collect();

    let mut b = DMatrix::zeros(n, n);
    for j in 0..n {
        b[(j, j)] = q1_alpha[j];
    }
    if !symbol.terms.is_empty() {
        // phi_{lambda_j} on a fine rule over the perturbation support.
        let r_u = symbol.base_radius();
        let rule = Rule1D::composite_gl(0.0, r_u, 40, 8);
        let plan = crate::space::OdeSweepPlan::new(t.space(), r_u + 0.1);
        let phi_rows: Vec<Vec<f64>> = par::map_indexed(t.exec_mode(), n, |j| {
            let lambda = gal_sgrid.nodes[j + 1];
            if t.space().dimension == 3 {
                rule.nodes
                    .iter()
                    .map(|&r| crate::space::phi_closed_d3(lambda, r))
                    .collect()
            } else {
                plan.sweep(lambda, &rule.nodes)
            }
        });
        for term in &symbol.terms {
            let uj: Vec<f64> = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&r, &w)| w * term.u.eval(r) * t.space().jacobian(r))
                .collect();
            let v_vals: Vec<f64> = (1..=n).map(|j| term.v.psi(gal_sgrid.nodes[j])).collect();
            let rows: Vec<Vec<f64>> = par::map_indexed(t.exec_mode(), n, |i| {
                let mut row = vec![0.0; n];
                for j in 0..n {
                    let mut g = 0.0;
                    for m in 0..rule.nodes.len() {
                        g += uj[m] * phi_rows[i][m] * phi_rows[j][m];
                    }
                    row[j] = v_vals[j] * c_norm[i] * c_norm[j] * g;
                }
                row
            });
            for (i, row) in rows.iter().enumerate() {
                for j in 0..n {
                    b[(i, j)] += row[j];
                }
            }
        }
    }
    Ok(GalerkinSystem {
        gal_sgrid,
        c_norm,
        omega,
        b,
        gram_psi1,
        alpha,
        c0,
        symbol: symbol.clone(),
        table,
    })
}

/// Rayleigh-quotient coercivity margin: the minimum over random probe
/// vectors of `x^T B_sym x / x^T Gram_{psi,1} x`, which the coercivity
/// bound requires to stay above `c0 / 2`.
pub fn coercivity_audit(sys: &GalerkinSystem, n_random: usize, seed: u64) -> f64 {
    let n = sys.n_basis();
    let b_sym = (&sys.b + sys.b.transpose()) * 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..n_random {
        // Standard normal entries by Box-Muller.
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.gen_range(1e-12..1.0);
                let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                (-2.0 * u.ln()).sqrt() * v.cos()
            })
            .collect();
        let xv = DVector::from_vec(x);
        let num = xv.dot(&(&b_sym * &xv));
        let den: f64 = xv
            .iter()
            .enumerate()
            .map(|(j, v)| sys.gram_psi1[j] * v * v)
            .sum();
        min_ratio = min_ratio.min(num / den);
    }
    min_ratio
}

/// Outcome of a resolvent solve.
pub struct SolveReport {
    pub u: RadialFunction,
    /// Spectral coefficients of the solution at the basis frequencies.
    pub coeffs_spectral: Vec<f64>,
    /// `||(q(sigma,D)+alpha) u - f||_2 / ||f||_2` on the radial grid.
    pub residual_rel: f64,
    pub cond_estimate: Option<f64>,
}

/// Galerkin solve of `(q(sigma, D) + alpha) u = f`.
pub fn solve_resolvent(
    t: &SphericalTransform,
    sys: &GalerkinSystem,
    f: &RadialFunction,
) -> Result<SolveReport> {
    let n = sys.n_basis();
    // fhat at the basis frequencies, by the transform-grade quadrature.
    let fhat: Vec<f64> = par::map_indexed(t.exec_mode(), n, |j| {
        let row = sys.table.row(j + 1);
        let mut acc = 0.0;
        for i in 0..row.len() {
            acc += t.rgrid().weights[i] * row[i] * f.values[i] * t.jacobian_at(i);
        }
        acc
    });
    let load = DVector::from_iterator(n, (0..n).map(|j| sys.c_norm[j] * fhat[j]));
    let lu = sys.b.clone().lu();
    let x = match lu.solve(&load) {
        Some(x) => x,
        None => {
            let svd = sys.b.clone().svd(false, false);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            return Err(SphqError::IllConditioned {
                cond: smax / smin.max(f64::MIN_POSITIVE),
                what: "Galerkin matrix is singular".into(),
            });
        }
    };
    // Basis elements carry spectral height 1/sqrt(w omega) = 1/c_norm,
    // so the solution's spectral values are x_j / c_norm_j.
    let coeffs_spectral: Vec<f64> = (0..n).map(|j| x[j] / sys.c_norm[j]).collect();

    // Honest reconstruction on the radial grid.
    let weights_spec: Vec<f64> = (0..n)
        .map(|j| sys.gal_sgrid.weights[j + 1] * sys.omega[j])
        .collect();
    let q1a: Vec<f64> = (0..n)
        .map(|j| sys.symbol.q1(sys.gal_sgrid.nodes[j + 1]) + sys.alpha)
        .collect();
    let v_term: Vec<Vec<f64>> = sys
        .symbol
        .terms
        .iter()
        .map(|term| {
            (0..n)
                .map(|j| term.v.psi(sys.gal_sgrid.nodes[j + 1]))
                .collect()
        })
        .collect();
    let n_r = t.rgrid().n_points();
    let rows: Vec<(f64, f64)> = par::map_indexed(t.exec_mode(), n_r, |i| {
        let mut u_val = 0.0;
        let mut a_val = 0.0;
        let mut v_parts = vec![0.0; sys.symbol.terms.len()];
        for j in 0..n {
            let base = weights_spec[j] * coeffs_spectral[j] * sys.table.value(j + 1, i);
            u_val += base;
            a_val += q1a[j] * base;
            for (k, vt) in v_term.iter().enumerate() {
                v_parts[k] += vt[j] * base;
            }
        }
        let r = t.rgrid().nodes[i];
        for (k, term) in sys.symbol.terms.iter().enumerate() {
            a_val += term.u.eval(r) * v_parts[k];
        }
        (u_val, a_val)
    });
    let u = RadialFunction {
        grid: Arc::clone(t.rgrid()),
        values: rows.iter().map(|r| r.0).collect(),
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n_r {
        let w = t.rgrid().weights[i] * t.jacobian_at(i);
        let d = rows[i].1 - f.values[i];
        num += w * d * d;
        den += w * f.values[i] * f.values[i];
    }
    let residual_rel = (num / den.max(f64::MIN_POSITIVE)).sqrt();
    Ok(SolveReport {
        u,
        coeffs_spectral,
        residual_rel,
        cond_estimate: None,
    })
}

/// Condition estimate of the assembled matrix (singular-value ratio).
pub fn condition_estimate(sys: &GalerkinSystem) -> f64 {
    let svd = sys.b.clone().svd(false, false);
    svd.singular_values.max() / svd.singular_values.min().max(f64::MIN_POSITIVE)
}
