//! Spectral pseudodifferential operators:
//! `(q(sigma, D) f)(r) = int fhat(lambda) phi_lambda(r) q(r, lambda)
//! omega(dlambda)`, fractional Laplacians by multiplier and by Bochner
//! subordination, and the shifted-symbol transform `Fhat_{lambda,eta}`.
//!
//! Everything acts through the spectral side; separable symbols
//! `q = q1 + sum u_k v_k` reduce to one multiplier inversion per term.

use std::sync::Arc;

use crate::error::{Result, SphqError};
use crate::grid::{RadialFunction, SpectralFunction};
use crate::par;
use crate::quad::Rule1D;
use crate::space::OdeSweepPlan;
use crate::symbol::GangolliSymbol;
use crate::transform::{SphericalTransform, TruncationPolicy};

/// Applies a separable Gangolli symbol:
/// `q(sigma, D) f = kappa psi(D) f + sum_k u_k . (v_k(D) f)`.
pub fn apply_psdo(
    t: &SphericalTransform,
    q: &GangolliSymbol,
    f: &RadialFunction,
    policy: TruncationPolicy,
) -> Result<RadialFunction> {
    let fhat = t.forward(f, policy)?;
    let mut out = t.inverse(&fhat.multiplied(|l| q.q1(l)), TruncationPolicy::Allow)?;
    for term in &q.terms {
        let vf = t.inverse(&fhat.multiplied(|l| term.v.psi(l)), TruncationPolicy::Allow)?;
        for (i, &r) in t.rgrid().nodes.iter().enumerate() {
            out.values[i] += term.u.eval(r) * vf.values[i];
        }
    }
    Ok(out)
}

/// Applies a general two-variable symbol `q(r, lambda)` by weighted
/// inversion per output node.
pub fn apply_psdo_general(
    t: &SphericalTransform,
    q: impl Fn(f64, f64) -> f64 + Sync,
    f: &RadialFunction,
    policy: TruncationPolicy,
) -> Result<RadialFunction> {
    let fhat = t.forward(f, policy)?;
    let sgrid = t.sgrid();
    let coeff: Vec<f64> = (0..sgrid.n_points())
        .map(|j| sgrid.weights[j] * fhat.values[j].re * t.omega(j))
        .collect();
    let values = par::map_indexed(t.exec_mode(), t.rgrid().n_points(), |i| {
        let r = t.rgrid().nodes[i];
        let mut acc = 0.0;
        for (j, c) in coeff.iter().enumerate() {
            acc += c * t.table().value(j, i) * q(r, sgrid.nodes[j]);
        }
        acc
    });
    Ok(RadialFunction {
        grid: Arc::clone(t.rgrid()),
        values,
    })
}

/// Fractional Laplacian `(-Delta)^{beta/2}` as the spectral multiplier
/// `(rho^2 + lambda^2)^{beta/2}`.
pub fn fractional_laplacian(
    t: &SphericalTransform,
    f: &RadialFunction,
    beta: f64,
    policy: TruncationPolicy,
) -> Result<RadialFunction> {
    if beta < 0.0 {
        return Err(SphqError::domain(format!("beta = {beta} must be >= 0")));
    }
    let rho2 = t.space().rho * t.space().rho;
    t.multiplier_apply(f, |l| (rho2 + l * l).powf(beta / 2.0), policy)
}

/// Tuning of the subordination quadrature.
#[derive(Debug, Clone, Copy)]
pub struct SubordinationOpts {
    /// Small-time cutoff; `[0, delta]` is handled by the first-order
    /// heat-flow correction `t^{-3/2}(1 - T_t) ~ t^{-1/2} (-Delta)`.
    pub delta: f64,
    /// Large-time cutoff; beyond it `T_t ~ 0` and the tail integrates in
    /// closed form.
    pub t_max: f64,
}

impl Default for SubordinationOpts {
    fn default() -> Self {
        SubordinationOpts {
            delta: 1e-6,
            t_max: 1e3,
        }
    }
}

/// Square root of `-Delta` through the Bochner subordination integral
/// `(1/(2 sqrt pi)) int_0^inf t^{-3/2} (1 - T_t) dt`, discretized on
/// log-spaced Gauss panels over `[delta, t_max]` with analytic small- and
/// large-time corrections. Panel doubling until the assembled multiplier
/// stabilizes; errors if it does not.
pub fn fractional_laplacian_subordinated(
    t: &SphericalTransform,
    f: &RadialFunction,
    opts: SubordinationOpts,
    policy: TruncationPolicy,
) -> Result<RadialFunction> {
    let multiplier = subordinated_multiplier_samples(t, opts)?;
    let fhat = t.forward(f, policy)?;
    let product = SpectralFunction {
        grid: Arc::clone(&fhat.grid),
        values: fhat
            .values
            .iter()
            .zip(&multiplier)
            .map(|(v, m)| v * m)
            .collect(),
    };
    t.inverse(&product, TruncationPolicy::Allow)
}

/// The subordinated multiplier sampled on the transform's spectral grid.
pub fn subordinated_multiplier_samples(
    t: &SphericalTransform,
    opts: SubordinationOpts,
) -> Result<Vec<f64>> {
    let rho2 = t.space().rho * t.space().rho;
    let s_of = |l: f64| rho2 + l * l;
    let assemble = |panels: usize| -> Vec<f64> {
        let rule = Rule1D::composite_gl(opts.delta.ln(), opts.t_max.ln(), panels, 8);
        t.sgrid()
            .nodes
            .iter()
            .map(|&l| {
                let s = s_of(l);
                let q: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&u, &w)| {
                        let tt = u.exp();
                        w * (-0.5 * u).exp() * (1.0 - (-tt * s).exp())
                    })
                    .sum();
                let small = 2.0 * opts.delta.sqrt() * s;
                let tail = 2.0 / opts.t_max.sqrt();
                (small + q + tail) / (2.0 * std::f64::consts::PI.sqrt())
            })
            .collect()
    };
    let mut panels = 16;
    let mut prev = assemble(panels);
    for _ in 0..8 {
        panels *= 2;
        let next = assemble(panels);
        let worst = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1e-30))
            .fold(0.0f64, f64::max);
        if worst < 1e-9 {
            return Ok(next);
        }
        prev = next;
    }
    Err(SphqError::Quadrature {
        what: "subordination time quadrature did not stabilize".into(),
        last_delta: f64::NAN,
        tol: 1e-9,
    })
}

/// `phi_lambda` sampled on the transform's radial grid for an arbitrary
/// frequency (one ODE sweep; closed form on `H^3`).
pub fn phi_row(t: &SphericalTransform, lambda: f64) -> Vec<f64> {
    if t.space().dimension == 3 {
        t.rgrid()
            .nodes
            .iter()
            .map(|&r| crate::space::phi_closed_d3(lambda, r))
            .collect()
    } else {
        let plan = OdeSweepPlan::new(t.space(), t.rgrid().r_max);
        plan.sweep(lambda.abs(), &t.rgrid().nodes)
    }
}

/// Spherical transform of the frequency-shifted symbol slice
/// `sigma -> phi_{-lambda}(sigma) q2(sigma, eta)`.
pub fn f_transform_hat(
    t: &SphericalTransform,
    q: &GangolliSymbol,
    lambda: f64,
    eta: f64,
) -> Result<SpectralFunction> {
    let phi = phi_row(t, lambda);
    let values: Vec<f64> = t
        .rgrid()
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &r)| phi[i] * q.q2(r, eta))
        .collect();
    let f = RadialFunction {
        grid: Arc::clone(t.rgrid()),
        values,
    };
    // Compactly supported in sigma, so the decay guard is safe.
    t.forward(&f, TruncationPolicy::Strict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::GangolliExponent;
    use crate::space::{radial_laplacian, SpaceModel};
    use crate::symbol::Bump;
    use crate::transform::{gaussian_bump, test_grids};
    use approx::assert_abs_diff_eq;

    fn fixture() -> (SphericalTransform, GangolliExponent) {
        let (rg, sg) = test_grids();
        let t = SphericalTransform::new(3, rg, sg).unwrap();
        let bm = GangolliExponent::brownian(&SpaceModel::new(3).unwrap());
        (t, bm)
    }

    #[test]
    fn unit_symbol_reproduces_input() {
        let (t, _) = fixture();
        let s3 = SpaceModel::new(3).unwrap();
        let one = GangolliExponent::from_characteristics(&s3, 0.0, 1.0, None).unwrap();
        let sym = GangolliSymbol::constant_coefficient(1.0, one, 6);
        let f = gaussian_bump(t.rgrid(), 0.9);
        let g = apply_psdo(&t, &sym, &f, TruncationPolicy::Strict).unwrap();
        let rel = t.rel_l2_distance(&g, &f);
        assert!(rel < 1e-8, "identity symbol rel err {rel:.3e}");
    }

    #[test]
    fn bm_symbol_matches_fd_laplacian() {
        let (t, bm) = fixture();
        let sym = GangolliSymbol::constant_coefficient(1.0, bm, 6);
        let f = gaussian_bump(t.rgrid(), 1.0);
        use crate::grid::RadialFunction;
        let spectral = apply_psdo(&t, &sym, &f, TruncationPolicy::Strict).unwrap();
        // Central differences want uniform spacing; sample the bump there
        // analytically (differencing interpolated data would amplify the
        // interpolation error by 1/h^2).
        let ug = crate::grid::RadialGrid::uniform(8.0, 8001);
        let f_u = RadialFunction::from_fn(&ug, |r| (-r * r).exp());
        let fd = radial_laplacian(t.space(), &f_u).unwrap();
        let spectral_u = spectral.resample(&ug);
        // q(sigma, D) f = -Delta f.
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 1..ug.n_points() - 1 {
            let d = spectral_u.values[i] + fd.values[i];
            num += d * d;
            den += spectral_u.values[i] * spectral_u.values[i];
        }
        let rel = (num / den).sqrt();
        assert!(rel < 1e-4, "FD mismatch {rel:.3e}");
    }

    #[test]
    fn separable_symbol_agrees_with_general_route() {
        let (t, bm) = fixture();
        let sym = GangolliSymbol::new(
            2.0,
            bm.clone(),
            vec![(Bump::new(0.7, 1.4).unwrap(), bm)],
            6,
            t.sgrid(),
        )
        .unwrap();
        let f = gaussian_bump(t.rgrid(), 1.1);
        let fast = apply_psdo(&t, &sym, &f, TruncationPolicy::Strict).unwrap();
        let slow =
            apply_psdo_general(&t, |r, l| sym.eval(r, l), &f, TruncationPolicy::Strict).unwrap();
        for i in 0..fast.values.len() {
            assert_abs_diff_eq!(fast.values[i], slow.values[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn fractional_laplacian_special_orders() {
        let (t, _) = fixture();
        let f = gaussian_bump(t.rgrid(), 1.0);
        // beta = 0: identity.
        let id = fractional_laplacian(&t, &f, 0.0, TruncationPolicy::Strict).unwrap();
        assert!(t.rel_l2_distance(&id, &f) < 1e-8);
        // beta = 2: matches -Delta to FD tolerance on a uniform grid
        // (bump sampled there analytically).
        let two = fractional_laplacian(&t, &f, 2.0, TruncationPolicy::Strict).unwrap();
        let ug = crate::grid::RadialGrid::uniform(6.0, 6001);
        let f_u = crate::grid::RadialFunction::from_fn(&ug, |r| (-r * r).exp());
        let fd = radial_laplacian(t.space(), &f_u).unwrap();
        let two_u = two.resample(&ug);
        let mut worst: f64 = 0.0;
        for i in 1..ug.n_points() - 1 {
            worst = worst.max((two_u.values[i] + fd.values[i]).abs());
        }
        assert!(worst / two.sup_norm() < 1e-4, "beta=2 worst {worst:.2e}");
        assert!(fractional_laplacian(&t, &f, -1.0, TruncationPolicy::Strict).is_err());
    }

    #[test]
    fn narrowband_eigenvalue_scaling() {
        let (t, _) = fixture();
        // Spectrum concentrated near lambda0: the fractional multiplier
        // acts like its value there.
        let lambda0 = 6.0;
        let spec = SpectralFunction::from_fn(t.sgrid(), |l| {
            (-((l - lambda0) / 0.25).powi(2)).exp()
        });
        let f = t.inverse(&spec, TruncationPolicy::Strict).unwrap();
        let beta = 1.0;
        let g = fractional_laplacian(&t, &f, beta, TruncationPolicy::Allow).unwrap();
        let expect = (1.0 + lambda0 * lambda0).powf(beta / 2.0);
        let ratio = t.inner_radial(&g, &f) / t.inner_radial(&f, &f);
        assert_abs_diff_eq!(ratio, expect, epsilon = 0.02 * expect);
    }

    #[test]
    fn subordination_matches_multiplier_route() {
        let (t, _) = fixture();
        let f = gaussian_bump(t.rgrid(), 1.0);
        let zero = RadialFunction::zero(t.rgrid());
        let z = fractional_laplacian_subordinated(
            &t,
            &zero,
            SubordinationOpts::default(),
            TruncationPolicy::Strict,
        )
        .unwrap();
        assert!(z.sup_norm() == 0.0);

        let sub = fractional_laplacian_subordinated(
            &t,
            &f,
            SubordinationOpts::default(),
            TruncationPolicy::Strict,
        )
        .unwrap();
        let mul = fractional_laplacian(&t, &f, 1.0, TruncationPolicy::Strict).unwrap();
        let rel = t.rel_l2_distance(&sub, &mul);
        assert!(rel < 1e-3, "subordination vs multiplier rel {rel:.3e}");

        // Richardson-style stability: halving delta / doubling t_max moves
        // the result by less than 1e-4 relative.
        let finer = fractional_laplacian_subordinated(
            &t,
            &f,
            SubordinationOpts {
                delta: 0.5e-6,
                t_max: 2e3,
            },
            TruncationPolicy::Strict,
        )
        .unwrap();
        let drift = t.rel_l2_distance(&finer, &sub);
        assert!(drift < 1e-4, "refinement drift {drift:.3e}");
    }

    #[test]
    fn f_hat_vanishes_without_perturbation() {
        let (t, bm) = fixture();
        let sym = GangolliSymbol::constant_coefficient(1.0, bm, 6);
        let fh = f_transform_hat(&t, &sym, 2.0, 3.0).unwrap();
        assert!(fh.sup_norm() == 0.0);
    }

    #[test]
    fn f_hat_identity_two_routes() {
        // (q2(sigma, D) w)^(lambda) = int Fhat_{lambda,eta}(eta) what(eta)
        // omega(deta).
        let (t, bm) = fixture();
        let sym = GangolliSymbol::new(
            1.0,
            bm.clone(),
            vec![(Bump::new(0.8, 1.3).unwrap(), bm)],
            6,
            t.sgrid(),
        )
        .unwrap();
        let w = gaussian_bump(t.rgrid(), 1.0);
        let what = t.forward(&w, TruncationPolicy::Strict).unwrap();
        // Route A: transform of u * v(D) w.
        let term = &sym.terms[0];
        let vw = t
            .multiplier_apply(&w, |l| term.v.psi(l), TruncationPolicy::Strict)
            .unwrap();
        let q2w = RadialFunction {
            grid: Arc::clone(t.rgrid()),
            values: t
                .rgrid()
                .nodes
                .iter()
                .zip(&vw.values)
                .map(|(&r, &v)| term.u.eval(r) * v)
                .collect(),
        };
        let route_a = t.forward(&q2w, TruncationPolicy::Strict).unwrap();
        // Route B through Fhat, at a handful of lambda nodes.
        for &j in &[40usize, 190, 400] {
            let lambda = t.sgrid().nodes[j];
            let phi = phi_row(&t, lambda);
            // Fhat_{lambda, eta}(eta) = v(eta) * forward(phi_lambda u)(eta)
            let phiu = RadialFunction {
                grid: Arc::clone(t.rgrid()),
                values: t
                    .rgrid()
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| phi[i] * term.u.eval(r))
                    .collect(),
            };
            let phiu_hat = t.forward(&phiu, TruncationPolicy::Strict).unwrap();
            let mut acc = 0.0;
            for (k, &eta) in t.sgrid().nodes.iter().enumerate() {
                acc += t.sgrid().weights[k]
                    * term.v.psi(eta)
                    * phiu_hat.values[k].re
                    * what.values[k].re
                    * t.omega(k);
            }
            let want = route_a.values[j].re;
            assert_abs_diff_eq!(acc, want, epsilon = 1e-5 * want.abs().max(1e-8));
        }
    }
}
