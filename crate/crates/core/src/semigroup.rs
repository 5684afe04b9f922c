//! Sub-Feller semigroup machinery: spectral evolution `T_t = e^{-t psi(D)}`,
//! the direct Hunt-convolution oracle built on the hyperbolic law of
//! cosines, convolution of radial measures, positivity/contraction audits,
//! the positive-maximum-principle probe, and the direct (non-spectral)
//! application of Gangolli operators.

use std::sync::Arc;

use crate::error::{Result, SphqError};
use crate::exponent::{GangolliExponent, LevyMeasureRadial};
use crate::grid::{RadialFunction, SpectralFunction};
use crate::par;
use crate::psdo::apply_psdo_general;
use crate::quad::Rule1D;
use crate::space::{gamma_half_integer, radial_laplacian};
use crate::symbol::{Bump, GangolliSymbol};
use crate::transform::{SphericalTransform, TruncationPolicy};

/// A radial (sub-)probability measure: density w.r.t. the radial volume
/// element plus an optional atom at the origin.
#[derive(Debug, Clone)]
pub struct RadialMeasure {
    pub density: RadialFunction,
    pub atom_origin: f64,
    /// When set, `mass() <= 1 + tol` is part of the contract.
    pub sub_probability: bool,
}

impl RadialMeasure {
    pub fn mass(&self, t: &SphericalTransform) -> f64 {
        let mut m = self.atom_origin;
        for i in 0..self.density.values.len() {
            m += self.density.grid.weights[i] * self.density.values[i] * t.jacobian_at(i);
        }
        m
    }

    pub fn dirac_origin(t: &SphericalTransform) -> Self {
        RadialMeasure {
            density: RadialFunction::zero(t.rgrid()),
            atom_origin: 1.0,
            sub_probability: true,
        }
    }
}

/// Spectral evolution `T_t f = inverse(e^{-t psi} forward(f))`; `T_0` is
/// the identity.
pub fn evolve(
    t: &SphericalTransform,
    psi: &GangolliExponent,
    f: &RadialFunction,
    time: f64,
    policy: TruncationPolicy,
) -> Result<RadialFunction> {
    if time < 0.0 {
        return Err(SphqError::domain(format!("negative time {time}")));
    }
    if time == 0.0 {
        return Ok(f.clone());
    }
    t.multiplier_apply(f, |l| (-time * psi.psi(l)).exp(), policy)
}

/// Evolution by a raw spectral multiplier `e^{-t m(lambda)}`; used by
/// audits that must also handle invalid (non-negative-definite)
/// multipliers, so non-finite output is allowed to reach the caller.
pub fn evolve_multiplier(
    t: &SphericalTransform,
    m: impl Fn(f64) -> f64,
    f: &RadialFunction,
    time: f64,
) -> Result<RadialFunction> {
    let fhat = t.forward(f, TruncationPolicy::Allow)?;
    let evolved = fhat.multiplied(|l| {
        let v = (-time * m(l)).exp();
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    });
    t.inverse(&evolved, TruncationPolicy::Allow)
}

/// Heat kernel `h_t = inverse(e^{-t(rho^2 + lambda^2)})` as a radial
/// measure; validates near-nonnegativity and sub-unit mass.
pub fn heat_kernel(t: &SphericalTransform, time: f64) -> Result<RadialMeasure> {
    if time <= 0.0 {
        return Err(SphqError::domain(format!(
            "heat kernel needs positive time, got {time}"
        )));
    }
    let rho2 = t.space().rho * t.space().rho;
    let spec = SpectralFunction::from_fn(t.sgrid(), |l| (-time * (rho2 + l * l)).exp());
    let density = t.inverse(&spec, TruncationPolicy::Strict)?;
    let measure = RadialMeasure {
        density,
        atom_origin: 0.0,
        sub_probability: true,
    };
    let min = measure
        .density
        .values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        return Err(SphqError::Resolution {
            what: format!("heat kernel dips to {min:.3e}; refine the grids"),
        });
    }
    let mass = measure.mass(t);
    if mass > 1.0 + 1e-6 {
        return Err(SphqError::Resolution {
            what: format!("heat kernel mass {mass} exceeds 1 beyond tolerance"),
        });
    }
    Ok(measure)
}

/// Sphere-angle quadrature used by the convolution kernels; fixed
/// high-order rule (the integrands are smooth).
fn theta_rule() -> Rule1D {
    Rule1D::composite_gl(0.0, std::f64::consts::PI, 6, 10)
}

/// Direct Hunt convolution
/// `(f * mu)(r) = int K-avg_theta f(dist(r, s, theta)) mu(ds)`,
/// the geometric oracle for [`evolve`].
pub fn hunt_convolution(
    t: &SphericalTransform,
    f: &RadialFunction,
    mu: &RadialMeasure,
) -> Result<RadialFunction> {
    let d = t.space().dimension;
    let rule = theta_rule();
    let norm = std::f64::consts::PI.sqrt() * gamma_half_integer(d - 1) / gamma_half_integer(d);
    // Cache the sphere weights.
    let weights: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&th, &w)| w * th.sin().powi(d as i32 - 2) / norm)
        .collect();
    let cosines: Vec<f64> = rule.nodes.iter().map(|&th| th.cos()).collect();
    // Active support of the measure density.
    let supp: Vec<usize> = (0..mu.density.values.len())
        .filter(|&i| {
            mu.density.grid.weights[i] * mu.density.values[i].abs() * t.jacobian_at(i) > 1e-17
        })
        .collect();
    let values = par::map_indexed(t.exec_mode(), t.rgrid().n_points(), |i| {
        let r = t.rgrid().nodes[i];
        let (ch_r, sh_r) = (r.cosh(), r.sinh());
        let mut acc = mu.atom_origin * f.values[i];
        for &k in &supp {
            let s = mu.density.grid.nodes[k];
            let (ch_s, sh_s) = (s.cosh(), s.sinh());
            let mut kavg = 0.0;
            for (m, &w) in weights.iter().enumerate() {
                let x = ch_r * ch_s + sh_r * sh_s * cosines[m];
                kavg += w * f.eval(x.max(1.0).acosh());
            }
            acc += kavg
                * mu.density.grid.weights[k]
                * mu.density.values[k]
                * t.jacobian_at(k);
        }
        acc
    });
    Ok(RadialFunction {
        grid: Arc::clone(t.rgrid()),
        values,
    })
}

/// Spectral-route convolution of radial measures:
/// `inverse(muhat_1 muhat_2)`, with a nonnegativity clip bounded by 1e-9
/// of the total mass.
pub fn convolve_measures(
    t: &SphericalTransform,
    mu1: &RadialMeasure,
    mu2: &RadialMeasure,
) -> Result<RadialMeasure> {
    let hat = |mu: &RadialMeasure| -> Result<Vec<f64>> {
        let fhat = t.forward(&mu.density, TruncationPolicy::Allow)?;
        Ok(fhat
            .values
            .iter()
            .map(|v| v.re + mu.atom_origin)
            .collect())
    };
    let h1 = hat(mu1)?;
    let h2 = hat(mu2)?;
    let atom = mu1.atom_origin * mu2.atom_origin;
    // Density part of the product transform (total minus the pure atom).
    let spec = SpectralFunction {
        grid: Arc::clone(t.sgrid()),
        values: h1
            .iter()
            .zip(&h2)
            .map(|(a, b)| num_complex::Complex64::new(a * b - atom, 0.0))
            .collect(),
    };
    let mut density = t.inverse(&spec, TruncationPolicy::Allow)?;
    let mut clipped = 0.0;
    let mut total = atom;
    for i in 0..density.values.len() {
        let w = density.grid.weights[i] * t.jacobian_at(i);
        if density.values[i] < 0.0 {
            clipped += -density.values[i] * w;
            density.values[i] = 0.0;
        }
        total += density.values[i] * w;
    }
    if clipped > 1e-9 * total.max(1e-300) {
        return Err(SphqError::Resolution {
            what: format!("convolution clipped negative mass {clipped:.3e}"),
        });
    }
    Ok(RadialMeasure {
        density,
        atom_origin: atom,
        sub_probability: mu1.sub_probability && mu2.sub_probability,
    })
}

/// Multiplier source for semigroup audits.
pub enum EvolutionLaw<'a> {
    Exponent(&'a GangolliExponent),
    /// Raw multiplier (adversarial audits).
    Raw(&'a (dyn Fn(f64) -> f64 + Sync)),
}

/// Outcome of a sub-Feller audit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SubfellerReport {
    pub min_value: f64,
    pub max_value: f64,
    pub contraction_ok: bool,
    /// `sup |T_t f - f|` along the decreasing time grid.
    pub strong_continuity: Vec<f64>,
    pub pass: bool,
    pub detail: String,
}

/// Verifies on each `f in [0, 1]` of the family: range preservation
/// `T_t f in [-tol, 1 + tol]`, sup-norm contraction, and the strong
/// continuity proxy `sup |T_t f - f| -> 0` along `t` decreasing to 0.
pub fn subfeller_audit(
    t: &SphericalTransform,
    law: EvolutionLaw,
    family: &[RadialFunction],
    t_list: &[f64],
    tol: f64,
) -> Result<SubfellerReport> {
    let mut min_value = f64::INFINITY;
    let mut max_value = f64::NEG_INFINITY;
    let mut contraction_ok = true;
    let mut detail = String::new();
    let run = |f: &RadialFunction, time: f64| -> Result<RadialFunction> {
        match &law {
            EvolutionLaw::Exponent(psi) => evolve(t, psi, f, time, TruncationPolicy::Allow),
            EvolutionLaw::Raw(m) => evolve_multiplier(t, m, f, time),
        }
    };
    for f in family {
        let sup_f = f.sup_norm();
        for &time in t_list {
            let g = run(f, time)?;
            for &v in &g.values {
                if !v.is_finite() {
                    return Ok(SubfellerReport {
                        min_value: f64::NEG_INFINITY,
                        max_value: f64::INFINITY,
                        contraction_ok: false,
                        strong_continuity: vec![],
                        pass: false,
                        detail: format!("non-finite evolution at t = {time}"),
                    });
                }
                min_value = min_value.min(v);
                max_value = max_value.max(v);
            }
            if g.sup_norm() > sup_f + tol {
                contraction_ok = false;
                detail = format!(
                    "sup grew: {:.6} -> {:.6} at t = {time}",
                    sup_f,
                    g.sup_norm()
                );
            }
        }
    }
    // Strong continuity proxy on the first family member.
    let mut strong_continuity = Vec::new();
    if let Some(f) = family.first() {
        for &time in &[0.2, 0.1, 0.05, 0.025] {
            let g = run(f, time)?;
            let sup = f
                .values
                .iter()
                .zip(&g.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            strong_continuity.push(sup);
        }
    }
    let continuity_ok = strong_continuity
        .windows(2)
        .all(|w| w[1] <= w[0] * 1.05)
        && strong_continuity
            .last()
            .zip(strong_continuity.first())
            .map(|(l, f0)| *l <= 0.7 * f0 + tol)
            .unwrap_or(true);
    let range_ok = min_value >= -tol && max_value <= 1.0 + tol;
    if !range_ok && detail.is_empty() {
        detail = format!("range [{min_value:.3e}, {max_value:.6}]");
    }
    if !continuity_ok && detail.is_empty() {
        detail = format!("continuity proxy not decreasing: {strong_continuity:?}");
    }
    Ok(SubfellerReport {
        min_value,
        max_value,
        contraction_ok,
        strong_continuity,
        pass: range_ok && contraction_ok && continuity_ok,
        detail,
    })
}

/// Which sign of the operator the PMP probe tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorSign {
    /// The generator `A = -q(sigma, D)` (must satisfy the PMP).
    Generator,
    /// Sign-flipped `+q(sigma, D)` (must fail).
    Flipped,
}

/// Outcome of the positive-maximum-principle probe.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PmpReport {
    /// `(argmax radius, generator value there)` per test function.
    pub probes: Vec<(f64, f64)>,
    pub pass: bool,
}

/// At each grid argmax `r*` of `f` with `f(r*) >= 0`, checks
/// `A f(r*) <= 1e-6 * scale` with `scale = max(1, sup |A f|)`.
pub fn pmp_probe(
    t: &SphericalTransform,
    q: &GangolliSymbol,
    sign: GeneratorSign,
    family: &[RadialFunction],
) -> Result<PmpReport> {
    let mut probes = Vec::new();
    let mut pass = true;
    for f in family {
        let qf = crate::psdo::apply_psdo(t, q, f, TruncationPolicy::Allow)?;
        let af: Vec<f64> = match sign {
            GeneratorSign::Generator => qf.values.iter().map(|v| -v).collect(),
            GeneratorSign::Flipped => qf.values.clone(),
        };
        let scale = af.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let (mut argmax, mut fmax) = (0usize, f64::NEG_INFINITY);
        for (i, &v) in f.values.iter().enumerate() {
            if v > fmax {
                fmax = v;
                argmax = i;
            }
        }
        if fmax < 0.0 {
            continue;
        }
        let value = af[argmax];
        if value > 1e-6 * scale {
            pass = false;
        }
        probes.push((t.rgrid().nodes[argmax], value));
    }
    Ok(PmpReport { probes, pass })
}

/// Spatially varying Gangolli characteristics
/// `(c(r), a(r), nu(r, .) = modulation(r) x nu_base)`: constants plus
/// compactly supported bump modulations.
pub struct SpatialCharacteristics {
    pub kill_const: f64,
    pub kill_bump: Option<Bump>,
    pub diff_const: f64,
    pub diff_bump: Option<Bump>,
    pub levy_base: Option<LevyMeasureRadial>,
    /// `None` means constant modulation 1.
    pub levy_modulation: Option<Bump>,
}

impl SpatialCharacteristics {
    pub fn kill(&self, r: f64) -> f64 {
        self.kill_const + self.kill_bump.as_ref().map_or(0.0, |b| b.eval(r))
    }

    pub fn diffusion(&self, r: f64) -> f64 {
        self.diff_const + self.diff_bump.as_ref().map_or(0.0, |b| b.eval(r))
    }

    pub fn modulation(&self, r: f64) -> f64 {
        self.levy_modulation.as_ref().map_or(1.0, |b| b.eval(r))
    }

    /// The jump exponent of the base measure,
    /// `psi_J(lambda) = int (1 - phi_lambda) d nu_base`.
    pub fn jump_exponent(&self, space: &crate::space::SpaceModel) -> Result<GangolliExponent> {
        GangolliExponent::from_characteristics(space, 0.0, 0.0, self.levy_base.clone())
    }

    /// The Gangolli symbol of these characteristics:
    /// `q(r, lambda) = c(r) + a(r)(rho^2 + lambda^2)
    ///  + modulation(r) psi_J(lambda)`.
    pub fn symbol_fn(
        &self,
        space: &crate::space::SpaceModel,
    ) -> Result<impl Fn(f64, f64) -> f64 + Sync + '_> {
        let jump = self.jump_exponent(space)?;
        let rho2 = space.rho * space.rho;
        Ok(move |r: f64, l: f64| {
            self.kill(r) + self.diffusion(r) * (rho2 + l * l) + self.modulation(r) * jump.psi(l)
        })
    }
}

/// Direct application of the Gangolli operator
/// `A f = -c f + a Delta f + jump part`, with the jump integral realized
/// through the sphere-averaged law of cosines. The small-jump compensator
/// vanishes for radial Levy kernels, and base measures are restricted to
/// finite ones, so the integral needs no principal-value handling.
pub fn gangolli_apply_direct(
    t: &SphericalTransform,
    chars: &SpatialCharacteristics,
    f: &RadialFunction,
) -> Result<RadialFunction> {
    if let Some(levy) = &chars.levy_base {
        levy.validate(t.space())?;
    }
    // Diffusion part through uniform-grid central differences.
    let ug = crate::grid::RadialGrid::uniform(t.rgrid().r_max, 2501);
    let f_u = f.resample(&ug);
    let lap_u = radial_laplacian(t.space(), &f_u)?;
    let rule = theta_rule();
    let d = t.space().dimension;
    let norm = std::f64::consts::PI.sqrt() * gamma_half_integer(d - 1) / gamma_half_integer(d);
    let weights: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&th, &w)| w * th.sin().powi(d as i32 - 2) / norm)
        .collect();
    let cosines: Vec<f64> = rule.nodes.iter().map(|&th| th.cos()).collect();
    let kavg = |r: f64, s: f64| -> f64 {
        let (ch, sh) = (r.cosh(), r.sinh());
        let (cs, ss) = (s.cosh(), s.sinh());
        let mut acc = 0.0;
        for (m, &w) in weights.iter().enumerate() {
            let x = ch * cs + sh * ss * cosines[m];
            acc += w * f.eval(x.max(1.0).acosh());
        }
        acc
    };
    let values = par::map_indexed(t.exec_mode(), t.rgrid().n_points(), |i| {
        let r = t.rgrid().nodes[i];
        let mut acc = -chars.kill(r) * f.values[i] + chars.diffusion(r) * lap_u.eval(r);
        if let Some(levy) = &chars.levy_base {
            let mut jump = 0.0;
            for &(s, m) in &levy.atoms {
                jump += m * (kavg(r, s) - f.values[i]);
            }
            if let Some(density) = &levy.density {
                for k in 0..density.values.len() {
                    let w = density.grid.weights[k]
                        * density.values[k]
                        * t.space().jacobian(density.grid.nodes[k]);
                    if w.abs() > 1e-17 {
                        jump += w * (kavg(r, density.grid.nodes[k]) - f.values[i]);
                    }
                }
            }
            acc += chars.modulation(r) * jump;
        }
        acc
    });
    Ok(RadialFunction {
        grid: Arc::clone(t.rgrid()),
        values,
    })
}

/// Two-route comparison for characteristics: the direct Gangolli operator
/// against the negated pseudodifferential route. Returns the relative
/// `L^2` difference.
pub fn gangolli_route_mismatch(
    t: &SphericalTransform,
    chars: &SpatialCharacteristics,
    f: &RadialFunction,
) -> Result<f64> {
    let direct = gangolli_apply_direct(t, chars, f)?;
    let q = chars.symbol_fn(t.space())?;
    let psdo = apply_psdo_general(t, q, f, TruncationPolicy::Allow)?;
    let negated = RadialFunction {
        grid: psdo.grid.clone(),
        values: psdo.values.iter().map(|v| -v).collect(),
    };
    Ok(t.rel_l2_distance(&direct, &negated))
}
