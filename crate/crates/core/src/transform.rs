//! The spherical transform pair and its normalization calibration, plus the
//! Abel transform and the Euclidean Fourier transform that complete the
//! commuting triangle.
//!
//! Forward: `fhat(lambda) = int_0^R phi_lambda(r) f(r) J(r) dr` with
//! `J(r) = jacobian_scale sinh^{d-1}(r)`.
//! Inverse: `f(r) = int_0^L phi_lambda(r) F(lambda) omega(lambda) dlambda`
//! with `omega = plancherel_scale |c(lambda)|^{-2}`.
//!
//! All normalization freedom is concentrated in `plancherel_scale`, fixed
//! by a least-squares fit making `inverse . forward` the identity on a
//! family of three Gaussian bumps. Spectral integrals run over
//! `lambda >= 0` against the calibrated density, which by that calibration
//! carries the full Plancherel mass (even-extension factors are folded in).

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Result, SphqError};
use crate::grid::{RadialFunction, RadialGrid, SpectralFunction, SpectralGrid};
use crate::par::{self, ExecMode};
use crate::quad::integrate_adaptive;
use crate::space::SpaceModel;
use crate::table::{self, PhiTable};

/// Relative decay required at the truncation boundary.
pub const DECAY_GUARD: f64 = 1e-12;
/// Calibration residual requirement.
pub const CALIBRATION_TOL: f64 = 1e-6;

/// Whether transforms enforce the decay guard at the grid boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationPolicy {
    #[default]
    Strict,
    /// Caller accepts truncation error.
    Allow,
}

/// Outcome of the normalization fit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CalibrationReport {
    pub plancherel_scale: f64,
    /// Per-bump round-trip residuals after scaling.
    pub residuals: Vec<f64>,
    /// Largest relative spread of per-bump scale fits.
    pub consistency: f64,
}

/// Calibrated transform pair on a fixed pair of grids.
pub struct SphericalTransform {
    space: SpaceModel,
    rgrid: Arc<RadialGrid>,
    sgrid: Arc<SpectralGrid>,
    table: Arc<PhiTable>,
    jacobian: Vec<f64>,
    /// Plancherel density samples, *without* the calibrated scale.
    omega_shape: Vec<f64>,
    mode: ExecMode,
    calibration: CalibrationReport,
    triangle_kappa: OnceLock<(f64, f64)>,
}

impl SphericalTransform {
    /// Builds (or fetches from cache) the spherical-function table, then
    /// calibrates `plancherel_scale` by round-trip least squares.
    pub fn new(dimension: i64, rgrid: Arc<RadialGrid>, sgrid: Arc<SpectralGrid>) -> Result<Self> {
        Self::with_mode(dimension, rgrid, sgrid, ExecMode::default())
    }

    pub fn with_mode(
        dimension: i64,
        rgrid: Arc<RadialGrid>,
        sgrid: Arc<SpectralGrid>,
        mode: ExecMode,
    ) -> Result<Self> {
        let space = SpaceModel::new(dimension)?;
        let table = table::get_or_build(&space, &sgrid, &rgrid, mode)?;
        let jacobian = rgrid.nodes.iter().map(|&r| space.jacobian(r)).collect();
        let omega_shape = sgrid
            .nodes
            .iter()
            .map(|&l| {
                let mut s = space.clone();
                s.plancherel_scale = 1.0;
                s.plancherel_density(l)
            })
            .collect();
        let mut t = SphericalTransform {
            space,
            rgrid,
            sgrid,
            table,
            jacobian,
            omega_shape,
            mode,
            calibration: CalibrationReport {
                plancherel_scale: 1.0,
                residuals: Vec::new(),
                consistency: f64::NAN,
            },
            triangle_kappa: OnceLock::new(),
        };
        t.calibrate()?;
        Ok(t)
    }

    pub fn space(&self) -> &SpaceModel {
        &self.space
    }

    pub fn rgrid(&self) -> &Arc<RadialGrid> {
        &self.rgrid
    }

    pub fn sgrid(&self) -> &Arc<SpectralGrid> {
        &self.sgrid
    }

    pub fn table(&self) -> &Arc<PhiTable> {
        &self.table
    }

    pub fn exec_mode(&self) -> ExecMode {
        self.mode
    }

    pub fn calibration(&self) -> &CalibrationReport {
        &self.calibration
    }

    /// Calibrated Plancherel density at a spectral node.
    #[inline]
    pub fn omega(&self, j: usize) -> f64 {
        self.space.plancherel_scale * self.omega_shape[j]
    }

    #[inline]
    pub fn jacobian_at(&self, i: usize) -> f64 {
        self.jacobian[i]
    }

    /// Overrides the calibrated scale (fault injection in the suite).
    pub fn override_plancherel_scale(&mut self, scale: f64) {
        self.space.plancherel_scale = scale;
    }

    fn check_radial_grid(&self, f: &RadialFunction) -> Result<()> {
        if !f.grid.same_grid(&self.rgrid) {
            return Err(SphqError::usage(
                "radial function sampled on a different grid than the transform",
            ));
        }
        Ok(())
    }

    fn check_spectral_grid(&self, big_f: &SpectralFunction) -> Result<()> {
        if !big_f.grid.same_grid(&self.sgrid) {
            return Err(SphqError::usage(
                "spectral function sampled on a different grid than the transform",
            ));
        }
        Ok(())
    }

    /// Forward spherical transform.
    pub fn forward(&self, f: &RadialFunction, policy: TruncationPolicy) -> Result<SpectralFunction> {
        self.check_radial_grid(f)?;
        f.check_finite()?;
        if policy == TruncationPolicy::Strict {
            let sup = f.sup_norm();
            let boundary = f.values.last().unwrap().abs();
            if sup > 0.0 && boundary > DECAY_GUARD * sup {
                return Err(SphqError::TruncationRisk {
                    what: format!(
                        "|f(r_max)| = {boundary:.3e} > {DECAY_GUARD:.0e} * sup|f| = {:.3e}",
                        DECAY_GUARD * sup
                    ),
                });
            }
        }
        let w = &self.rgrid.weights;
        let jac = &self.jacobian;
        let fv = &f.values;
        let values = par::map_indexed(self.mode, self.sgrid.n_points(), |j| {
            let row = self.table.row(j);
            let mut acc = 0.0;
            for i in 0..row.len() {
                acc += w[i] * row[i] * fv[i] * jac[i];
            }
            Complex64::new(acc, 0.0)
        });
        Ok(SpectralFunction {
            grid: Arc::clone(&self.sgrid),
            values,
        })
    }

    /// Inverse spherical transform (real part of the spectral data; the
    /// radial calculus keeps spectra real).
    pub fn inverse(&self, big_f: &SpectralFunction, policy: TruncationPolicy) -> Result<RadialFunction> {
        self.check_spectral_grid(big_f)?;
        if policy == TruncationPolicy::Strict {
            let sup = big_f.sup_norm();
            let boundary = big_f.values.last().unwrap().norm();
            if sup > 0.0 && boundary > DECAY_GUARD * sup {
                return Err(SphqError::TruncationRisk {
                    what: format!(
                        "|F(lambda_max)| = {boundary:.3e} > {DECAY_GUARD:.0e} * sup|F|",
                    ),
                });
            }
        }
        Ok(self.inverse_unchecked(big_f))
    }

    fn inverse_unchecked(&self, big_f: &SpectralFunction) -> RadialFunction {
        let n_r = self.rgrid.n_points();
        let n_l = self.sgrid.n_points();
        let scale = self.space.plancherel_scale;
        // Premultiply the spectral weights once.
        let coeff: Vec<f64> = (0..n_l)
            .map(|j| self.sgrid.weights[j] * big_f.values[j].re * scale * self.omega_shape[j])
            .collect();
        let values = par::map_indexed(self.mode, n_r, |i| {
            let mut acc = 0.0;
            for (j, c) in coeff.iter().enumerate() {
                acc += c * self.table.value(j, i);
            }
            acc
        });
        RadialFunction {
            grid: Arc::clone(&self.rgrid),
            values,
        }
    }

    /// Applies a real spectral multiplier and inverts:
    /// `inverse(m(lambda) * forward(f))`.
    pub fn multiplier_apply(
        &self,
        f: &RadialFunction,
        m: impl Fn(f64) -> f64,
        policy: TruncationPolicy,
    ) -> Result<RadialFunction> {
        let fhat = self.forward(f, policy)?;
        let mhat = fhat.multiplied(m);
        self.inverse(&mhat, TruncationPolicy::Allow)
    }

    /// Radial `L^2` norm against the volume element.
    pub fn l2_radial(&self, f: &RadialFunction) -> f64 {
        let mut acc = 0.0;
        for i in 0..f.values.len() {
            acc += self.rgrid.weights[i] * f.values[i] * f.values[i] * self.jacobian[i];
        }
        acc.sqrt()
    }

    pub fn inner_radial(&self, f: &RadialFunction, g: &RadialFunction) -> f64 {
        let mut acc = 0.0;
        for i in 0..f.values.len() {
            acc += self.rgrid.weights[i] * f.values[i] * g.values[i] * self.jacobian[i];
        }
        acc
    }

    /// Spectral `L^2(omega)` norm.
    pub fn l2_spectral(&self, big_f: &SpectralFunction) -> f64 {
        let mut acc = 0.0;
        for j in 0..big_f.values.len() {
            acc += self.sgrid.weights[j] * big_f.values[j].norm_sqr() * self.omega(j);
        }
        acc.sqrt()
    }

    /// Relative `L^2` distance between two radial functions.
    pub fn rel_l2_distance(&self, a: &RadialFunction, b: &RadialFunction) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..a.values.len() {
            let d = a.values[i] - b.values[i];
            num += self.rgrid.weights[i] * d * d * self.jacobian[i];
            den += self.rgrid.weights[i] * b.values[i] * b.values[i] * self.jacobian[i];
        }
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }

    /// Plancherel pair: returns `(lhs, rhs) = (||f||^2_{L^2},
    /// ||fhat||^2_{L^2(omega)})`; the caller asserts closeness.
    pub fn plancherel_check(&self, f: &RadialFunction) -> Result<(f64, f64)> {
        let lhs = self.l2_radial(f).powi(2);
        let fhat = self.forward(f, TruncationPolicy::Strict)?;
        let rhs = self.l2_spectral(&fhat).powi(2);
        Ok((lhs, rhs))
    }

    /// Least-squares fit of the single scalar `plancherel_scale` making
    /// `inverse . forward` the identity on three Gaussian bumps.
    pub fn calibrate(&mut self) -> Result<CalibrationReport> {
        let widths = [0.6, 1.0, 1.5];
        let mut cross = 0.0;
        let mut auto = 0.0;
        let mut per_bump = Vec::new();
        let old_scale = self.space.plancherel_scale;
        self.space.plancherel_scale = 1.0;
        let mut pairs = Vec::new();
        for &w in &widths {
            let f = gaussian_bump(&self.rgrid, w);
            let fhat = self.forward(&f, TruncationPolicy::Strict)?;
            let g = self.inverse_unchecked(&fhat);
            let c = self.inner_radial(&g, &f);
            let a = self.inner_radial(&g, &g);
            cross += c;
            auto += a;
            per_bump.push(c / a);
            pairs.push((f, g));
        }
        let scale = cross / auto;
        if !(scale.is_finite() && scale > 0.0) {
            self.space.plancherel_scale = old_scale;
            return Err(SphqError::Calibration {
                residual: f64::NAN,
                required: CALIBRATION_TOL,
                detail: format!("degenerate scale fit {scale}"),
            });
        }
        self.space.plancherel_scale = scale;
        let mut residuals = Vec::new();
        for (f, g) in &pairs {
            let scaled = RadialFunction {
                grid: Arc::clone(&self.rgrid),
                values: g.values.iter().map(|v| v * scale).collect(),
            };
            residuals.push(self.rel_l2_distance(&scaled, f));
        }
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        if worst > CALIBRATION_TOL {
            return Err(SphqError::Calibration {
                residual: worst,
                required: CALIBRATION_TOL,
                detail: format!(
                    "grids r_max = {}, lambda_max = {}, {} x {} nodes",
                    self.rgrid.r_max,
                    self.sgrid.lambda_max,
                    self.rgrid.n_points(),
                    self.sgrid.n_points()
                ),
            });
        }
        let consistency = per_bump
            .iter()
            .map(|s| (s - scale).abs() / scale)
            .fold(0.0, f64::max);
        let report = CalibrationReport {
            plancherel_scale: scale,
            residuals,
            consistency,
        };
        self.calibration = report.clone();
        Ok(report)
    }

    /// Abel transform, radial horocyclic reduction on `H^d`:
    /// closed-form route for `d = 3`
    /// (`2 pi int_H^R f(r) sinh r dr`), regularized integral route for
    /// `d = 2`. Output is even in `H`; sampled on the radial grid.
    pub fn abel_transform(&self, f: &RadialFunction) -> Result<RadialFunction> {
        self.check_radial_grid(f)?;
        let r_max = self.rgrid.r_max;
        match self.space.dimension {
            3 => {
                let values = par::try_map_indexed(self.mode, self.rgrid.n_points(), |i| {
                    let h = self.rgrid.nodes[i];
                    let v = integrate_adaptive(|r| f.eval(r) * r.sinh(), h, r_max, 1e-12, 4)?;
                    Ok::<f64, SphqError>(2.0 * std::f64::consts::PI * v)
                })?;
                Ok(RadialFunction {
                    grid: Arc::clone(&self.rgrid),
                    values,
                })
            }
            2 => {
                let values = par::try_map_indexed(self.mode, self.rgrid.n_points(), |i| {
                    let h = self.rgrid.nodes[i];
                    let s_max = (r_max - h).max(0.0).sqrt();
                    let v = integrate_adaptive(
                        |s| {
                            let s2 = s * s;
                            let r = h + s2;
                            let den = ((h + 0.5 * s2).sinh() * sinhc_local(0.5 * s2)).sqrt();
                            f.eval(r) * r.sinh() / den
                        },
                        0.0,
                        s_max,
                        1e-12,
                        4,
                    )?;
                    Ok::<f64, SphqError>(2.0 * std::f64::consts::SQRT_2 * v)
                })?;
                Ok(RadialFunction {
                    grid: Arc::clone(&self.rgrid),
                    values,
                })
            }
            d => Err(SphqError::NotImplemented {
                what: format!("Abel transform for d = {d} (radial routes exist for d = 2, 3)"),
            }),
        }
    }

    /// Euclidean Fourier transform of an even sampled function on the
    /// half-line grid: `2 int_0^inf cos(lambda H) g(H) dH`.
    pub fn euclidean_fourier(&self, g: &RadialFunction) -> Result<SpectralFunction> {
        self.check_radial_grid(g)?;
        let w = &self.rgrid.weights;
        let nodes = &self.rgrid.nodes;
        let values = par::map_indexed(self.mode, self.sgrid.n_points(), |j| {
            let lambda = self.sgrid.nodes[j];
            let mut acc = 0.0;
            for i in 0..nodes.len() {
                acc += w[i] * (lambda * nodes[i]).cos() * g.values[i];
            }
            Complex64::new(2.0 * acc, 0.0)
        });
        Ok(SpectralFunction {
            grid: Arc::clone(&self.sgrid),
            values,
        })
    }

    /// Fits the commuting-triangle constant `kappa` with
    /// `euclidean_fourier(abel(f)) ~ kappa * forward(f)` and returns
    /// `(kappa, relative L^2 mismatch)`. Cached after the first call.
    pub fn triangle_constant(&self) -> Result<(f64, f64)> {
        if let Some(v) = self.triangle_kappa.get() {
            return Ok(*v);
        }
        let f = gaussian_bump(&self.rgrid, 1.0);
        let lhs = self.euclidean_fourier(&self.abel_transform(&f)?)?;
        let rhs = self.forward(&f, TruncationPolicy::Strict)?;
        let mut cross = 0.0;
        let mut auto = 0.0;
        for j in 0..self.sgrid.n_points() {
            let w = self.sgrid.weights[j] * self.omega(j);
            cross += w * lhs.values[j].re * rhs.values[j].re;
            auto += w * rhs.values[j].re * rhs.values[j].re;
        }
        let kappa = cross / auto;
        let mut num = 0.0;
        for j in 0..self.sgrid.n_points() {
            let w = self.sgrid.weights[j] * self.omega(j);
            let d = lhs.values[j].re - kappa * rhs.values[j].re;
            num += w * d * d;
        }
        let rel = (num / auto).sqrt();
        let _ = self.triangle_kappa.set((kappa, rel));
        Ok((kappa, rel))
    }

    /// `int <lambda>^{-m} omega(dlambda)` over the grid plus a closed-form
    /// tail bound beyond `lambda_max` (finite for `m > d`).
    pub fn weight_l1_norm(&self, m: f64) -> WeightNorm {
        let mut grid_part = 0.0;
        for j in 0..self.sgrid.n_points() {
            let l = self.sgrid.nodes[j];
            grid_part += self.sgrid.weights[j] * (1.0 + l * l).powf(-m / 2.0) * self.omega(j);
        }
        WeightNorm {
            grid_part,
            tail_bound: self.weight_tail_bound(m),
        }
    }

    /// `||<.>^{-s}||_{L^2(omega)}` with tail bound (finite for `2s > d`).
    pub fn weight_l2_norm(&self, s: f64) -> f64 {
        let mut grid_part = 0.0;
        for j in 0..self.sgrid.n_points() {
            let l = self.sgrid.nodes[j];
            grid_part += self.sgrid.weights[j] * (1.0 + l * l).powf(-s) * self.omega(j);
        }
        (grid_part + self.weight_tail_bound(2.0 * s)).sqrt()
    }

    /// Upper bound for `int_Lmax^inf <lambda>^{-m} omega(dlambda)`.
    fn weight_tail_bound(&self, m: f64) -> f64 {
        let d = self.space.dimension as f64;
        if m <= d {
            return f64::INFINITY;
        }
        let lmax = self.sgrid.lambda_max;
        // omega(lambda) <= scale * C * lambda^{d-1} for lambda >= lmax.
        let c_shape = self.space.plancherel_density(lmax) / lmax.powf(d - 1.0);
        let c_margin = if self.space.dimension % 2 == 1 {
            // products of (1 + k^2/lambda^2) decrease in lambda
            c_shape
        } else {
            // tanh factor still increasing toward 1
            c_shape / (std::f64::consts::PI * lmax).tanh()
        };
        c_margin * lmax.powf(d - m) / (m - d)
    }

    /// Closed-form weight integral over `[a, b]` (adaptive; used by the
    /// divergence-by-refinement diagnostics, no grid involved).
    pub fn weight_l1_on_interval(&self, m: f64, a: f64, b: f64) -> Result<f64> {
        let space = self.space.clone();
        integrate_adaptive(
            |l| (1.0 + l * l).powf(-m / 2.0) * space.plancherel_density(l),
            a,
            b,
            1e-10,
            8,
        )
    }
}

fn sinhc_local(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0 * (1.0 + x * x / 20.0)
    } else {
        x.sinh() / x
    }
}

/// `exp(-(r/width)^2)`; the stock smooth rapidly-decaying test bump.
pub fn gaussian_bump(grid: &Arc<RadialGrid>, width: f64) -> RadialFunction {
    RadialFunction::from_fn(grid, |r| (-(r / width) * (r / width)).exp())
}

/// Grid norm `int <.>^{-m} omega` split into resolved and tail parts.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct WeightNorm {
    pub grid_part: f64,
    pub tail_bound: f64,
}

impl WeightNorm {
    pub fn total(&self) -> f64 {
        self.grid_part + self.tail_bound
    }
}

/// Reference resolution used by the acceptance suite: `R = 20`,
/// `Lambda = 40`, 4000 quadrature nodes each way.
pub fn reference_grids() -> (Arc<RadialGrid>, Arc<SpectralGrid>) {
    (
        RadialGrid::composite_gl(20.0, 250, 16),
        SpectralGrid::composite_gl(40.0, 250, 16),
    )
}

/// Coarser grids for unit tests.
pub fn test_grids() -> (Arc<RadialGrid>, Arc<SpectralGrid>) {
    (
        RadialGrid::composite_gl(14.0, 120, 8),
        SpectralGrid::composite_gl(28.0, 140, 8),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn transform_d(d: i64) -> SphericalTransform {
        let (rg, sg) = test_grids();
        SphericalTransform::new(d, rg, sg).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        let t = transform_d(3);
        let z = RadialFunction::zero(t.rgrid());
        let zhat = t.forward(&z, TruncationPolicy::Strict).unwrap();
        assert!(zhat.values.iter().all(|v| v.norm() == 0.0));
        let back = t.inverse(&zhat, TruncationPolicy::Strict).unwrap();
        assert!(back.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn roundtrip_on_held_out_bump() {
        for d in [2, 3] {
            let t = transform_d(d);
            // Width not in the calibration family.
            let f = gaussian_bump(t.rgrid(), 0.8);
            let g = t
                .multiplier_apply(&f, |_| 1.0, TruncationPolicy::Strict)
                .unwrap();
            let rel = t.rel_l2_distance(&g, &f);
            assert!(rel < 1e-7, "d={d} roundtrip rel err {rel:.3e}");
        }
    }

    #[test]
    fn calibration_scale_matches_h3_closed_form() {
        // For d = 3 with J = 4 pi sinh^2 and density lambda^2 the exact
        // inversion constant is 1 / (2 pi^2).
        let t = transform_d(3);
        assert_relative_eq!(
            t.calibration().plancherel_scale,
            1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::PI),
            epsilon = 1e-8
        );
        assert!(t.calibration().consistency < 1e-8);
    }

    #[test]
    fn recalibration_is_idempotent() {
        let mut t = transform_d(2);
        let s0 = t.calibration().plancherel_scale;
        let rep = t.calibrate().unwrap();
        assert_relative_eq!(rep.plancherel_scale, s0, epsilon = 1e-10);
    }

    #[test]
    fn plancherel_identity_holds() {
        for d in [2, 3] {
            let t = transform_d(d);
            let f = gaussian_bump(t.rgrid(), 1.2);
            let (lhs, rhs) = t.plancherel_check(&f).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-7);
        }
    }

    #[test]
    fn truncation_guard_fires() {
        let t = transform_d(3);
        let slow = RadialFunction::from_fn(t.rgrid(), |r| 1.0 / (1.0 + r));
        assert!(matches!(
            t.forward(&slow, TruncationPolicy::Strict),
            Err(SphqError::TruncationRisk { .. })
        ));
        assert!(t.forward(&slow, TruncationPolicy::Allow).is_ok());
    }

    #[test]
    fn heat_multiplier_forward_example() {
        // forward(h_t) for d = 3 returns e^{-t(1 + lambda^2)}.
        let t = transform_d(3);
        let time = 0.3;
        let spec = SpectralFunction::from_fn(t.sgrid(), |l| (-time * (1.0 + l * l)).exp());
        let h = t.inverse(&spec, TruncationPolicy::Strict).unwrap();
        let back = t.forward(&h, TruncationPolicy::Allow).unwrap();
        for (j, &l) in t.sgrid().nodes.iter().enumerate().step_by(97) {
            assert_abs_diff_eq!(
                back.values[j].re,
                (-time * (1.0 + l * l)).exp(),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn abel_of_heat_kernel_is_gaussian_d3() {
        let t = transform_d(3);
        let time = 0.4;
        let spec = SpectralFunction::from_fn(t.sgrid(), |l| (-time * (1.0 + l * l)).exp());
        let h = t.inverse(&spec, TruncationPolicy::Strict).unwrap();
        let a = t.abel_transform(&h).unwrap();
        // Gaussian in H up to a constant: fit at H = 0.5 and compare shape.
        let model = |hh: f64| (-hh * hh / (4.0 * time)).exp();
        let i0 = t
            .rgrid()
            .nodes
            .iter()
            .position(|&x| x > 0.5)
            .unwrap();
        let c = a.values[i0] / model(t.rgrid().nodes[i0]);
        for (i, &hh) in t.rgrid().nodes.iter().enumerate() {
            if hh > 4.0 {
                break;
            }
            assert_abs_diff_eq!(a.values[i], c * model(hh), epsilon = 1e-6 * c.abs());
        }
    }

    #[test]
    fn euclidean_fourier_gaussian_closed_form() {
        let t = transform_d(2);
        let g = RadialFunction::from_fn(t.rgrid(), |h| (-h * h).exp());
        let ghat = t.euclidean_fourier(&g).unwrap();
        for (j, &l) in t.sgrid().nodes.iter().enumerate().step_by(131) {
            let want = std::f64::consts::PI.sqrt() * (-l * l / 4.0).exp();
            assert_abs_diff_eq!(ghat.values[j].re, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn commuting_triangle_both_dims() {
        for d in [2, 3] {
            let t = transform_d(d);
            let (kappa, rel) = t.triangle_constant().unwrap();
            assert!(rel < 1e-5, "d={d} triangle mismatch {rel:.2e}");
            if d == 3 {
                // With these conventions the triangle closes with kappa = 1.
                assert_relative_eq!(kappa, 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn weight_norm_converges_and_diverges() {
        let t = transform_d(2);
        let d = 2.0;
        // M > d: finite with small tail.
        let m = d + 2.0;
        let norm = t.weight_l1_norm(m);
        assert!(norm.total().is_finite() && norm.grid_part > 0.0);
        assert!(norm.tail_bound < 0.05 * norm.grid_part);
        // Monotone decrease in M.
        assert!(t.weight_l1_norm(m + 1.0).total() < norm.total());
        // M = d - 1: grows without bound under refinement.
        let a = t.weight_l1_on_interval(d - 1.0, 0.0, 28.0).unwrap();
        let b = t.weight_l1_on_interval(d - 1.0, 0.0, 56.0).unwrap();
        let c = t.weight_l1_on_interval(d - 1.0, 0.0, 112.0).unwrap();
        assert!(b > a + 0.9 * (b - a).abs() * 0.0 && c - b > 0.8 * (b - a));
    }
}
