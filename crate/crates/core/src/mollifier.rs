//! The mollifier family `J_eps`: spectral multipliers `jhat(eps lambda)`
//! built from the standard Euclidean bump
//! `l(H) = C0 exp(1/(H^2-1)) 1_{|H|<1}` with `int l = 1`, through the
//! Euclidean Fourier transform. Each `J_eps` is a self-adjoint contraction
//! on `L^2` and on every Sobolev scale, with `J_eps -> identity`.

use std::sync::{Arc, OnceLock};

use crate::error::{Result, SphqError};
use crate::grid::{RadialFunction, SpectralFunction};
use crate::par;
use crate::quad::integrate_adaptive;
use crate::sobolev::{sobolev_norm_spectral, SobolevParams};
use crate::symbol::GangolliSymbol;
use crate::transform::{SphericalTransform, TruncationPolicy};

fn bump_normalizer() -> f64 {
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(|| {
        let integral = integrate_adaptive(
            |h| (1.0 / (h * h - 1.0)).exp(),
            0.0,
            1.0 - 1e-14,
            1e-14,
            4,
        )
        .expect("bump normalizer quadrature");
        1.0 / (2.0 * integral)
    })
}

/// `jhat(x) = 2 C0 int_0^1 cos(x H) exp(1/(H^2-1)) dH`; real, even,
/// `jhat(0) = 1`, `|jhat| <= 1`.
pub fn jhat(x: f64) -> f64 {
    let panels0 = (1.0 + x.abs() / 12.0).ceil() as usize;
    let c0 = bump_normalizer();
    2.0 * c0
        * integrate_adaptive(
            |h| (x * h).cos() * (1.0 / (h * h - 1.0)).exp(),
            0.0,
            1.0 - 1e-14,
            1e-13,
            panels0,
        )
        .expect("jhat quadrature")
}

/// One member of the mollifier family.
#[derive(Debug, Clone)]
pub struct Mollifier {
    pub epsilon: f64,
    /// `jhat(eps lambda)` on the transform's spectral nodes.
    pub jhat_eps: Vec<f64>,
    /// Radial kernel samples (informative; trustworthy while
    /// `jhat(eps lambda_max)` has decayed).
    pub j_radial: RadialFunction,
}

/// Builds `J_eps` on the transform's grids, `0 < eps <= 1`.
pub fn make_mollifier(t: &SphericalTransform, epsilon: f64) -> Result<Mollifier> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(SphqError::domain(format!(
            "mollifier parameter eps = {epsilon} outside (0, 1]"
        )));
    }
    let jhat_eps: Vec<f64> = par::map_indexed(t.exec_mode(), t.sgrid().n_points(), |j| {
        jhat(epsilon * t.sgrid().nodes[j])
    });
    for &v in &jhat_eps {
        if v.abs() > 1.0 + 1e-12 {
            return Err(SphqError::domain(format!(
                "mollifier multiplier out of range: |jhat| = {v}"
            )));
        }
    }
    if (jhat_eps[0] - 1.0).abs() > 1e-12 {
        return Err(SphqError::domain("jhat(0) != 1".to_string()));
    }
    let spec = SpectralFunction {
        grid: Arc::clone(t.sgrid()),
        values: jhat_eps
            .iter()
            .map(|&v| num_complex::Complex64::new(v, 0.0))
            .collect(),
    };
    let j_radial = t.inverse(&spec, TruncationPolicy::Allow)?;
    Ok(Mollifier {
        epsilon,
        jhat_eps,
        j_radial,
    })
}

/// `J_eps f`: spectral multiplication by `jhat(eps lambda)`.
pub fn apply_mollifier(
    t: &SphericalTransform,
    m: &Mollifier,
    f: &RadialFunction,
    policy: TruncationPolicy,
) -> Result<RadialFunction> {
    let fhat = t.forward(f, policy)?;
    let product = SpectralFunction {
        grid: Arc::clone(&fhat.grid),
        values: fhat
            .values
            .iter()
            .zip(&m.jhat_eps)
            .map(|(v, j)| v * j)
            .collect(),
    };
    t.inverse(&product, TruncationPolicy::Allow)
}

/// `||[J_eps, q(sigma, D)] u||_{psi,s} / ||u||_{psi,s+1}`.
///
/// The constant-coefficient part commutes exactly (both are spectral
/// multipliers), so only the perturbation contributes:
/// `com^(lambda) = jhat(eps lambda) (q2 u)^(lambda) - (q2 J_eps u)^(lambda)`.
pub fn commutator_probe(
    t: &SphericalTransform,
    q: &GangolliSymbol,
    m: &Mollifier,
    u: &RadialFunction,
    s: f64,
) -> Result<f64> {
    let params = SobolevParams::new(t, &q.psi, s);
    let uhat = t.forward(u, TruncationPolicy::Allow)?;
    let denom = sobolev_norm_spectral(t, &params.with_order(s + 1.0), &uhat);
    if denom == 0.0 {
        return Ok(0.0);
    }
    if q.is_constant_coefficient() {
        return Ok(0.0);
    }
    let q2_apply = |w: &RadialFunction| -> Result<RadialFunction> {
        let what = t.forward(w, TruncationPolicy::Allow)?;
        let mut out = RadialFunction::zero(t.rgrid());
        for term in &q.terms {
            let vw = t.inverse(&what.multiplied(|l| term.v.psi(l)), TruncationPolicy::Allow)?;
            for (i, &r) in t.rgrid().nodes.iter().enumerate() {
                out.values[i] += term.u.eval(r) * vw.values[i];
            }
        }
        Ok(out)
    };
    let a_hat = t.forward(&q2_apply(u)?, TruncationPolicy::Allow)?;
    let ju = apply_mollifier(t, m, u, TruncationPolicy::Allow)?;
    let b_hat = t.forward(&q2_apply(&ju)?, TruncationPolicy::Allow)?;
    let com = SpectralFunction {
        grid: Arc::clone(t.sgrid()),
        values: (0..t.sgrid().n_points())
            .map(|j| a_hat.values[j] * m.jhat_eps[j] - b_hat.values[j])
            .collect(),
    };
    Ok(sobolev_norm_spectral(t, &params, &com) / denom)
}
