//! Anisotropic Sobolev norms on the spectral side:
//! `||u||_{psi,s}^2 = int (1 + psi(lambda))^s |uhat(lambda)|^2
//! omega(dlambda)`, with `H^{psi,0} = L^2` by Plancherel.

use crate::error::Result;
use crate::exponent::GangolliExponent;
use crate::grid::{RadialFunction, SpectralFunction};
use crate::transform::{SphericalTransform, TruncationPolicy};

/// Weight data of one `H^{psi,s}` space, node-aligned with a transform's
/// spectral grid.
#[derive(Debug, Clone)]
pub struct SobolevParams {
    pub s: f64,
    /// `1 + psi(lambda_j)` (also `Psi^2`).
    pub weight: Vec<f64>,
}

impl SobolevParams {
    pub fn new(t: &SphericalTransform, psi: &GangolliExponent, s: f64) -> Self {
        let weight = t.sgrid().nodes.iter().map(|&l| 1.0 + psi.psi(l)).collect();
        SobolevParams { s, weight }
    }

    /// Same weights at a different order.
    pub fn with_order(&self, s: f64) -> Self {
        SobolevParams {
            s,
            weight: self.weight.clone(),
        }
    }

    /// `<lambda>^2`-weighted variant (`psi = rho^2 + lambda^2` gives the
    /// classical `H^s` scale; this one uses the bare `<.>` bracket).
    pub fn bracket(t: &SphericalTransform, s: f64) -> Self {
        let weight = t.sgrid().nodes.iter().map(|&l| 1.0 + l * l).collect();
        SobolevParams { s, weight }
    }
}

/// Sobolev norm of spectral data.
pub fn sobolev_norm_spectral(
    t: &SphericalTransform,
    params: &SobolevParams,
    big_f: &SpectralFunction,
) -> f64 {
    let mut acc = 0.0;
    for j in 0..big_f.values.len() {
        acc += t.sgrid().weights[j]
            * params.weight[j].powf(params.s)
            * big_f.values[j].norm_sqr()
            * t.omega(j);
    }
    acc.sqrt()
}

/// Sobolev norm of a radial function (through the forward transform; decay
/// at the truncation boundary is the caller's responsibility).
pub fn sobolev_norm(
    t: &SphericalTransform,
    params: &SobolevParams,
    f: &RadialFunction,
) -> Result<f64> {
    let fhat = t.forward(f, TruncationPolicy::Allow)?;
    Ok(sobolev_norm_spectral(t, params, &fhat))
}

/// Smallest grid constant `c(eps)` with
/// `||u||_{psi,s2} <= eps ||u||_{psi,s3} + c(eps) ||u||_{psi,s1}`
/// (`s1 < s2 < s3`), from the pointwise bound
/// `W^{s2} <= eps^2 W^{s3} + c^2 W^{s1}` on the weight grid.
pub fn interpolation_constant(params: &SobolevParams, s1: f64, s2: f64, s3: f64, eps: f64) -> f64 {
    assert!(s1 < s2 && s2 < s3 && eps > 0.0);
    let mut sup: f64 = 0.0;
    for &w in &params.weight {
        let v = (w.powf(s2) - eps * eps * w.powf(s3)) / w.powf(s1);
        sup = sup.max(v);
    }
    sup.max(0.0).sqrt()
}

/// Constant of the spectral-weight difference bound
/// `|Psi(l)^s - Psi(e)^s| <= C_{s,psi} <l-e>^{|s-1|+1} Psi(e)^{s-1}`:
/// `C = 2^{(|s-1|+2)/2} (1+c_psi)^{(|s-1|+1)/2} |s|`.
pub fn weight_difference_constant(s: f64, c_psi: f64) -> f64 {
    let a = (s - 1.0).abs();
    2f64.powf((a + 2.0) / 2.0) * (1.0 + c_psi).powf((a + 1.0) / 2.0) * s.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceModel;
    use crate::transform::{gaussian_bump, test_grids};
    use approx::assert_relative_eq;

    fn setup() -> (SphericalTransform, GangolliExponent) {
        let (rg, sg) = test_grids();
        let t = SphericalTransform::new(3, rg, sg).unwrap();
        let bm = GangolliExponent::brownian(&SpaceModel::new(3).unwrap());
        (t, bm)
    }

    #[test]
    fn order_zero_is_l2() {
        let (t, bm) = setup();
        let p = SobolevParams::new(&t, &bm, 0.0);
        let f = gaussian_bump(t.rgrid(), 0.9);
        let n0 = sobolev_norm(&t, &p, &f).unwrap();
        assert_relative_eq!(n0, t.l2_radial(&f), epsilon = 1e-7);
    }

    #[test]
    fn norms_increase_with_order() {
        let (t, bm) = setup();
        let f = gaussian_bump(t.rgrid(), 1.1);
        let p = SobolevParams::new(&t, &bm, 0.0);
        let n: Vec<f64> = [-1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|&s| sobolev_norm(&t, &p.with_order(s), &f).unwrap())
            .collect();
        assert!(n.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn interpolation_inequality_witnessed() {
        let (t, bm) = setup();
        let p = SobolevParams::new(&t, &bm, 0.0);
        let (s1, s2, s3) = (0.0, 1.0, 2.5);
        for eps in [0.5, 0.1, 0.02] {
            let c = interpolation_constant(&p, s1, s2, s3, eps);
            for width in [0.7, 1.0, 1.4] {
                let f = gaussian_bump(t.rgrid(), width);
                let n1 = sobolev_norm(&t, &p.with_order(s1), &f).unwrap();
                let n2 = sobolev_norm(&t, &p.with_order(s2), &f).unwrap();
                let n3 = sobolev_norm(&t, &p.with_order(s3), &f).unwrap();
                assert!(n2 <= eps * n3 + c * n1 + 1e-12);
            }
        }
    }
}
