//! Gangolli exponents: characteristic exponents `psi(lambda)` of radial
//! Levy convolution semigroups, given by the Levy-Khinchine form
//!
//! `psi(lambda) = c + a (rho^2 + lambda^2)
//!              + int (1 - phi_lambda(r)) nu(dr)`,
//!
//! together with the negative-definite toolkit: Schoenberg positive
//! semidefiniteness sampling, the square-root subadditivity and generalized
//! Peetre inequalities, and the growth-constant fits (`c_psi`, lower-bound
//! exponent `r` with constant `c`).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SphqError};
use crate::grid::{interp_cubic, RadialFunction, SpectralGrid};
use crate::space::{OdeSweepPlan, SpaceModel};

/// Radial Levy measure: nonnegative density w.r.t. the radial volume
/// element on `(0, r_max]`, plus an atom list `(radius, mass)`.
#[derive(Debug, Clone, Default)]
pub struct LevyMeasureRadial {
    pub density: Option<RadialFunction>,
    pub atoms: Vec<(f64, f64)>,
}

impl LevyMeasureRadial {
    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let m = LevyMeasureRadial {
            density: None,
            atoms,
        };
        m.validate(&SpaceModel::new(2)?)?;
        Ok(m)
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_none()
    }

    /// Checks nonnegativity, no mass at the origin, and a finite
    /// small-jump moment `int min(r^2, 1) nu(dr)` (for densities, by the
    /// near-origin growth of the integrand under refinement).
    pub fn validate(&self, space: &SpaceModel) -> Result<()> {
        for &(r, m) in &self.atoms {
            if r <= 0.0 {
                return Err(SphqError::InvalidMeasure {
                    what: format!("atom at radius {r}; nu({{0}}) must vanish"),
                });
            }
            if m < 0.0 {
                return Err(SphqError::InvalidMeasure {
                    what: format!("negative atom mass {m}"),
                });
            }
        }
        if let Some(density) = &self.density {
            if density.values.iter().any(|v| !v.is_finite() || *v < -1e-14) {
                return Err(SphqError::InvalidMeasure {
                    what: "density must be finite and nonnegative".into(),
                });
            }
            // Small-jump integrand min(r^2,1) nu(r) J(r); if its values on
            // the first nodes grow like r^{-1} or worse toward the origin,
            // refinement will not converge.
            let nodes = &density.grid.nodes;
            let mut slopes = Vec::new();
            for i in 1..nodes.len().min(8) {
                if i + 1 >= nodes.len() {
                    break;
                }
                let f = |k: usize| {
                    let r: f64 = nodes[k];
                    density.values[k] * space.jacobian(r) * r.min(1.0) * r.min(1.0)
                };
                let (a, b) = (f(i), f(i + 1));
                if a > 0.0 && b > 0.0 {
                    slopes.push((b / a).ln() / (nodes[i + 1] / nodes[i]).ln());
                }
            }
            if !slopes.is_empty() {
                let avg = slopes.iter().sum::<f64>() / slopes.len() as f64;
                if avg <= -0.99 {
                    return Err(SphqError::InvalidMeasure {
                        what: format!(
                            "small-jump moment diverges: integrand slope {avg:.2} <= -1 near 0"
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Total mass (finite-measure part), w.r.t. the radial volume element.
    pub fn total_mass(&self, space: &SpaceModel) -> f64 {
        let mut mass: f64 = self.atoms.iter().map(|&(_, m)| m).sum();
        if let Some(density) = &self.density {
            for i in 0..density.values.len() {
                mass += density.grid.weights[i]
                    * density.values[i]
                    * space.jacobian(density.grid.nodes[i]);
            }
        }
        mass
    }
}

/// Certified growth constants of an exponent.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GrowthFit {
    /// `|psi| <= c_psi (1 + lambda^2)` on the fitted range (5% margin).
    pub c_psi: f64,
    /// Lower-bound exponent: `psi(lambda) >= c_low |lambda|^{2 r_exp}` for
    /// `|lambda| >= 1` on the fitted range.
    pub r_exp: f64,
    pub c_low: f64,
    /// Set when no admissible lower bound exists (no growth).
    pub flagged: bool,
}

/// A Gangolli exponent with its characteristics.
#[derive(Debug, Clone)]
pub struct GangolliExponent {
    space: SpaceModel,
    /// Diffusion coefficient `a >= 0` (multiplies `rho^2 + lambda^2`).
    pub diffusion: f64,
    /// Kill rate `c >= 0`.
    pub kill_rate: f64,
    pub levy: Option<LevyMeasureRadial>,
    /// Set for subordinated stable forms `(rho^2 + lambda^2)^{alpha/2}`.
    pub stable_index: Option<f64>,
    /// Jump-part samples of the density component (atoms stay pointwise);
    /// node-aligned with `sample_grid`.
    density_jump: Option<(Vec<f64>, Vec<f64>)>,
}

impl GangolliExponent {
    /// Brownian-motion exponent `rho^2 + lambda^2`.
    pub fn brownian(space: &SpaceModel) -> Self {
        GangolliExponent {
            space: space.clone(),
            diffusion: 1.0,
            kill_rate: 0.0,
            levy: None,
            stable_index: None,
            density_jump: None,
        }
    }

    /// Subordinated stable exponent `(rho^2 + lambda^2)^{alpha/2}`,
    /// `0 < alpha <= 2`.
    pub fn stable(space: &SpaceModel, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(SphqError::domain(format!(
                "stable index alpha = {alpha} outside (0, 2]"
            )));
        }
        Ok(GangolliExponent {
            space: space.clone(),
            diffusion: if alpha == 2.0 { 1.0 } else { 0.0 },
            kill_rate: 0.0,
            levy: None,
            stable_index: if alpha == 2.0 { None } else { Some(alpha) },
            density_jump: None,
        })
    }

    /// Exponent from Levy characteristics `(a, c, nu)`.
    pub fn from_characteristics(
        space: &SpaceModel,
        diffusion: f64,
        kill_rate: f64,
        levy: Option<LevyMeasureRadial>,
    ) -> Result<Self> {
        if diffusion < 0.0 || kill_rate < 0.0 {
            return Err(SphqError::domain(
                "diffusion coefficient and kill rate must be nonnegative",
            ));
        }
        if let Some(levy) = &levy {
            levy.validate(space)?;
        }
        let density_jump = match levy.as_ref().and_then(|l| l.density.as_ref()) {
            Some(density) => {
                // phi_lambda on the density's own radial nodes, one ODE
                // sweep per sampled frequency; psi interpolates these.
                let lmax = 64.0f64;
                let n = 640;
                let lnodes: Vec<f64> = (0..=n).map(|k| lmax * k as f64 / n as f64).collect();
                let plan = OdeSweepPlan::new(space, density.grid.r_max.max(0.4));
                let vals: Vec<f64> = crate::par::map_indexed(
                    crate::par::ExecMode::default(),
                    lnodes.len(),
                    |j| {
                        let phis = plan.sweep(lnodes[j], &density.grid.nodes);
                        let mut acc = 0.0;
                        for i in 0..phis.len() {
                            acc += density.grid.weights[i]
                                * (1.0 - phis[i])
                                * density.values[i]
                                * space.jacobian(density.grid.nodes[i]);
                        }
                        acc
                    },
                );
                Some((lnodes, vals))
            }
            None => None,
        };
        Ok(GangolliExponent {
            space: space.clone(),
            diffusion,
            kill_rate,
            levy,
            stable_index: None,
            density_jump,
        })
    }

    pub fn space(&self) -> &SpaceModel {
        &self.space
    }

    /// Evaluates `psi(lambda)` (even in `lambda`).
    pub fn psi(&self, lambda: f64) -> f64 {
        let lambda = lambda.abs();
        let rho2 = self.space.rho * self.space.rho;
        if let Some(alpha) = self.stable_index {
            return (rho2 + lambda * lambda).powf(alpha / 2.0);
        }
        let mut v = self.kill_rate + self.diffusion * (rho2 + lambda * lambda);
        if let Some(levy) = &self.levy {
            for &(r, m) in &levy.atoms {
                let phi = self
                    .space
                    .spherical_function(lambda, r)
                    .expect("spherical function quadrature");
                v += m * (1.0 - phi);
            }
        }
        if let Some((lnodes, vals)) = &self.density_jump {
            if lambda <= *lnodes.last().unwrap() {
                v += interp_cubic(lnodes, vals, lambda);
            } else {
                // Beyond the sampled range the jump part has flattened to
                // its total-mass plateau.
                v += *vals.last().unwrap();
            }
        }
        v
    }

    /// Samples `psi` on a spectral grid.
    pub fn sample(&self, sgrid: &SpectralGrid) -> Vec<f64> {
        sgrid.nodes.iter().map(|&l| self.psi(l)).collect()
    }

    /// Fits the quadratic upper bound and the polynomial lower bound on
    /// the sampled range.
    pub fn fit_growth_constants(&self, sgrid: &SpectralGrid) -> GrowthFit {
        fit_growth_constants_fn(|l| self.psi(l), sgrid)
    }
}

/// Growth-constant fit for an arbitrary even function of `lambda`.
pub fn fit_growth_constants_fn(psi: impl Fn(f64) -> f64, sgrid: &SpectralGrid) -> GrowthFit {
    let lmax = sgrid.lambda_max;
    let mut c_psi: f64 = 0.0;
    for &l in &sgrid.nodes {
        c_psi = c_psi.max(psi(l).abs() / (1.0 + l * l));
    }
    c_psi *= 1.05;
    // Asymptotic slope on the last octave of the grid.
    let (pa, pb) = (psi(lmax / 2.0), psi(lmax));
    let slope = if pa > 0.0 && pb > 0.0 {
        (pb / pa).ln() / std::f64::consts::LN_2
    } else {
        0.0
    };
    let r_exp = (slope / 2.0).max(0.0);
    let flagged = r_exp < 0.01;
    let mut c_low = f64::INFINITY;
    if !flagged {
        for &l in &sgrid.nodes {
            if l >= 1.0 {
                c_low = c_low.min(psi(l) / l.powf(2.0 * r_exp));
            }
        }
    }
    if !c_low.is_finite() || c_low <= 0.0 {
        return GrowthFit {
            c_psi,
            r_exp: 0.0,
            c_low: 0.0,
            flagged: true,
        };
    }
    GrowthFit {
        c_psi,
        r_exp,
        c_low,
        flagged,
    }
}

/// Result of Schoenberg positive-semidefiniteness sampling.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SchoenbergReport {
    /// `(t, min eigenvalue of [e^{-t psi(lambda_i - lambda_j)}])` per time.
    pub per_t: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Samples the Schoenberg correspondence: for each `t`, the matrix
/// `[exp(-t psi(lambda_i - lambda_j))]` must be positive semidefinite
/// (minimum eigenvalue `>= -tol * n`). At most 12 sample frequencies.
pub fn schoenberg_check_fn(
    psi: impl Fn(f64) -> f64,
    t_list: &[f64],
    lambda_samples: &[f64],
    tol: f64,
) -> Result<SchoenbergReport> {
    let n = lambda_samples.len();
    if n == 0 || n > 12 {
        return Err(SphqError::usage(format!(
            "schoenberg check takes 1..=12 sample frequencies, got {n}"
        )));
    }
    let mut per_t = Vec::new();
    let mut pass = true;
    for &t in t_list {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = (-t * psi((lambda_samples[i] - lambda_samples[j]).abs())).exp();
                if !v.is_finite() {
                    per_t.push((t, f64::NEG_INFINITY));
                    pass = false;
                    continue;
                }
                m[(i, j)] = v;
            }
        }
        // Symmetrize away rounding before the eigensolve.
        let m = (&m + m.transpose()) * 0.5;
        let eig = m.symmetric_eigen();
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -tol * n as f64 {
            pass = false;
        }
        per_t.push((t, min_eig));
    }
    Ok(SchoenbergReport { per_t, pass })
}

pub fn schoenberg_check(
    exponent: &GangolliExponent,
    t_list: &[f64],
    lambda_samples: &[f64],
    tol: f64,
) -> Result<SchoenbergReport> {
    schoenberg_check_fn(|l| exponent.psi(l), t_list, lambda_samples, tol)
}

/// Result of the negative-definite inequality suite.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NegdefReport {
    pub n_pairs: usize,
    /// Worst slack of sqrt subadditivity
    /// `sqrt(psi(l-e)) - |sqrt(psi(l)) - sqrt(psi(e))|`.
    pub min_sqrt_slack: f64,
    /// Worst slack of the generalized Peetre inequality over the `s` list.
    pub min_peetre_slack: f64,
    pub pass: bool,
}

/// Random-pair verification of square-root subadditivity and the
/// generalized Peetre inequality
/// `((1+psi(l))/(1+psi(e)))^s <= 2^|s| (1+psi(l-e))^|s|`.
pub fn negdef_inequality_suite_fn(
    psi: impl Fn(f64) -> f64,
    n_random: usize,
    s_list: &[f64],
    lambda_range: f64,
    seed: u64,
    slack_tol: f64,
) -> NegdefReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_sqrt = f64::INFINITY;
    let mut min_peetre = f64::INFINITY;
    for _ in 0..n_random {
        // Signed frequencies; psi is even.
        let l = rng.gen_range(-lambda_range..lambda_range);
        let e = rng.gen_range(-lambda_range..lambda_range);
        let (pl, pe, pd) = (psi(l), psi(e), psi(l - e));
        let sqrt_slack = pd.abs().sqrt() - (pl.abs().sqrt() - pe.abs().sqrt()).abs();
        min_sqrt = min_sqrt.min(sqrt_slack);
        for &s in s_list {
            let lhs = ((1.0 + pl.abs()) / (1.0 + pe.abs())).powf(s);
            let rhs = 2f64.powf(s.abs()) * (1.0 + pd.abs()).powf(s.abs());
            min_peetre = min_peetre.min(rhs - lhs);
        }
    }
    NegdefReport {
        n_pairs: n_random,
        min_sqrt_slack: min_sqrt,
        min_peetre_slack: min_peetre,
        pass: min_sqrt >= -slack_tol && min_peetre >= -slack_tol,
    }
}

pub fn negdef_inequality_suite(
    exponent: &GangolliExponent,
    n_random: usize,
    s_list: &[f64],
    lambda_range: f64,
    seed: u64,
    slack_tol: f64,
) -> NegdefReport {
    negdef_inequality_suite_fn(
        |l| exponent.psi(l),
        n_random,
        s_list,
        lambda_range,
        seed,
        slack_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn brownian_values() {
        let s2 = SpaceModel::new(2).unwrap();
        let bm2 = GangolliExponent::brownian(&s2);
        assert_abs_diff_eq!(bm2.psi(0.0), 0.25);
        let s3 = SpaceModel::new(3).unwrap();
        let bm3 = GangolliExponent::brownian(&s3);
        assert_abs_diff_eq!(bm3.psi(1.0), 2.0);
        assert_eq!(bm3.psi(-4.2), bm3.psi(4.2));
    }

    #[test]
    fn characteristics_reduce_to_special_cases() {
        let s3 = SpaceModel::new(3).unwrap();
        let bm = GangolliExponent::from_characteristics(&s3, 1.0, 0.0, None).unwrap();
        let want = GangolliExponent::brownian(&s3);
        for l in [0.0, 0.7, 5.0] {
            assert_abs_diff_eq!(bm.psi(l), want.psi(l));
        }
        let kill = GangolliExponent::from_characteristics(&s3, 0.0, 0.3, None).unwrap();
        for l in [0.0, 2.0, 9.0] {
            assert_abs_diff_eq!(kill.psi(l), 0.3);
        }
    }

    #[test]
    fn unit_atom_jump_closed_form() {
        // nu = delta at r = 1, d = 3: psi = 1 - sin(lambda)/(lambda sinh 1)
        let s3 = SpaceModel::new(3).unwrap();
        let levy = LevyMeasureRadial::from_atoms(vec![(1.0, 1.0)]).unwrap();
        let e = GangolliExponent::from_characteristics(&s3, 0.0, 0.0, Some(levy)).unwrap();
        for l in [0.5f64, 1.0, 3.3, 10.0] {
            let want = 1.0 - l.sin() / (l * 1f64.sinh());
            assert_abs_diff_eq!(e.psi(l), want, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(e.psi(0.0), 1.0 - 1.0 / 1f64.sinh(), epsilon = 1e-14);
    }

    #[test]
    fn stable_examples() {
        let s2 = SpaceModel::new(2).unwrap();
        let st = GangolliExponent::stable(&s2, 1.0).unwrap();
        assert_abs_diff_eq!(st.psi(0.0), 0.5);
        let st2 = GangolliExponent::stable(&s2, 2.0).unwrap();
        let bm = GangolliExponent::brownian(&s2);
        for l in [0.0, 1.0, 7.7] {
            assert_abs_diff_eq!(st2.psi(l), bm.psi(l));
        }
        assert!(GangolliExponent::stable(&s2, 0.0).is_err());
        assert!(GangolliExponent::stable(&s2, 2.5).is_err());
    }

    #[test]
    fn schoenberg_pass_and_fail() {
        let s3 = SpaceModel::new(3).unwrap();
        let bm = GangolliExponent::brownian(&s3);
        let samples = [0.0, 0.5, 1.5, 3.0, 6.0, 10.0];
        let rep = schoenberg_check(&bm, &[0.1, 1.0, 10.0], &samples, 1e-10).unwrap();
        assert!(rep.pass, "{:?}", rep.per_t);

        // Invalid multiplier -lambda^2: e^{t lambda^2} blows up positivity.
        let bad = schoenberg_check_fn(|l| -l * l, &[0.5], &samples, 1e-10).unwrap();
        assert!(!bad.pass);

        // Single sample: trivially positive.
        let one = schoenberg_check(&bm, &[1.0], &[2.0], 1e-10).unwrap();
        assert!(one.pass);

        // Too many samples rejected.
        let many: Vec<f64> = (0..13).map(|k| k as f64).collect();
        assert!(schoenberg_check(&bm, &[1.0], &many, 1e-10).is_err());
    }

    #[test]
    fn negdef_suite_on_library() {
        let s2 = SpaceModel::new(2).unwrap();
        for e in [
            GangolliExponent::brownian(&s2),
            GangolliExponent::stable(&s2, 1.0).unwrap(),
        ] {
            let rep = negdef_inequality_suite(&e, 10_000, &[-2.0, -1.0, 1.0, 2.0], 20.0, 7, 1e-12);
            assert!(
                rep.pass,
                "sqrt slack {:.3e}, peetre slack {:.3e}",
                rep.min_sqrt_slack, rep.min_peetre_slack
            );
        }
    }

    #[test]
    fn peetre_direct_instance() {
        // s = 1, (lambda, eta) = (2, 1): (1+psi(2))/(1+psi(1)) <= 2 (1+psi(1)).
        let s2 = SpaceModel::new(2).unwrap();
        let bm = GangolliExponent::brownian(&s2);
        let lhs = (1.0 + bm.psi(2.0)) / (1.0 + bm.psi(1.0));
        let rhs = 2.0 * (1.0 + bm.psi(1.0));
        assert!(lhs <= rhs);
    }

    #[test]
    fn growth_fit_examples() {
        let sgrid = SpectralGrid::composite_gl(28.0, 60, 8);
        let s2 = SpaceModel::new(2).unwrap();
        let bm = GangolliExponent::brownian(&s2);
        let fit = bm.fit_growth_constants(&sgrid);
        assert!(!fit.flagged);
        assert_relative_eq!(fit.r_exp, 1.0, epsilon = 1e-3);
        // sup over the grid of (rho^2+lambda^2)/(1+lambda^2) -> 1, x1.05.
        assert!((fit.c_psi - 1.05).abs() < 5e-3, "c_psi = {}", fit.c_psi);
        assert!(fit.c_low > 0.9 && fit.c_low <= 1.3);

        let st = GangolliExponent::stable(&s2, 1.0).unwrap();
        let fit = st.fit_growth_constants(&sgrid);
        assert_relative_eq!(fit.r_exp, 0.5, epsilon = 1e-2);

        // Constant exponent: no growth, flagged.
        let fit = fit_growth_constants_fn(|_| 0.7, &sgrid);
        assert!(fit.flagged);
        assert_eq!(fit.r_exp, 0.0);
    }

    #[test]
    fn invalid_measures_rejected() {
        let s3 = SpaceModel::new(3).unwrap();
        assert!(LevyMeasureRadial::from_atoms(vec![(0.0, 1.0)]).is_err());
        assert!(LevyMeasureRadial::from_atoms(vec![(1.0, -0.5)]).is_err());

        // Density ~ r^{-6} near 0 on H^3: the small-jump integrand grows
        // like r^{-2}, so its slope triggers the divergence guard.
        let g = RadialGrid::composite_gl(2.0, 40, 4);
        let steep = RadialFunction::from_fn(&g, |r| if r > 0.0 { r.powi(-6) } else { 0.0 });
        let levy = LevyMeasureRadial {
            density: Some(steep),
            atoms: vec![],
        };
        assert!(matches!(
            GangolliExponent::from_characteristics(&s3, 0.0, 0.0, Some(levy)),
            Err(SphqError::InvalidMeasure { .. })
        ));
    }

    #[test]
    fn density_jump_matches_atom_limit() {
        // A narrow density spike approximates an atom.
        let s3 = SpaceModel::new(3).unwrap();
        let g = RadialGrid::composite_gl(3.0, 60, 6);
        let width = 0.02f64;
        let spike = RadialFunction::from_fn(&g, |r| {
            let x = (r - 1.0) / width;
            (-x * x).exp()
        });
        // Normalize to unit mass w.r.t. the volume element.
        let mass: f64 = (0..g.n_points())
            .map(|i| g.weights[i] * spike.values[i] * s3.jacobian(g.nodes[i]))
            .sum();
        let density = RadialFunction {
            grid: spike.grid.clone(),
            values: spike.values.iter().map(|v| v / mass).collect(),
        };
        let e = GangolliExponent::from_characteristics(
            &s3,
            0.0,
            0.0,
            Some(LevyMeasureRadial {
                density: Some(density),
                atoms: vec![],
            }),
        )
        .unwrap();
        let atom = GangolliExponent::from_characteristics(
            &s3,
            0.0,
            0.0,
            Some(LevyMeasureRadial::from_atoms(vec![(1.0, 1.0)]).unwrap()),
        )
        .unwrap();
        for l in [0.5, 2.0, 6.0] {
            assert_abs_diff_eq!(e.psi(l), atom.psi(l), epsilon = 2e-3);
        }
    }

    #[test]
    fn convex_cone_of_characteristics() {
        // Linearity of the Levy-Khinchine form: the exponent of
        // (s c + t c', s a + t a', s nu + t nu') is s psi + t psi'.
        let s3 = SpaceModel::new(3).unwrap();
        let nu1 = LevyMeasureRadial::from_atoms(vec![(0.8, 0.5)]).unwrap();
        let nu2 = LevyMeasureRadial::from_atoms(vec![(1.7, 1.1)]).unwrap();
        let e1 = GangolliExponent::from_characteristics(&s3, 1.0, 0.2, Some(nu1)).unwrap();
        let e2 = GangolliExponent::from_characteristics(&s3, 0.5, 0.0, Some(nu2)).unwrap();
        let (s, t) = (0.7, 2.3);
        let combined = GangolliExponent::from_characteristics(
            &s3,
            s * 1.0 + t * 0.5,
            s * 0.2,
            Some(
                LevyMeasureRadial::from_atoms(vec![(0.8, s * 0.5), (1.7, t * 1.1)]).unwrap(),
            ),
        )
        .unwrap();
        for l in [0.0, 0.9, 4.4, 11.0] {
            assert_abs_diff_eq!(
                combined.psi(l),
                s * e1.psi(l) + t * e2.psi(l),
                epsilon = 1e-12
            );
        }
    }
}
