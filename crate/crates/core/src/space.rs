//! Rank-one hyperbolic geometry: `H^d` with half-sum of roots
//! `rho = (d-1)/2`, radial volume element `jacobian_scale * sinh^{d-1}(r)`,
//! spherical functions `phi_lambda`, Plancherel density, the radial
//! Laplace-Beltrami operator and the hyperbolic law of cosines.
//!
//! Two independent evaluation routes exist for `phi_lambda` in every
//! dimension, and table construction cross-checks them before anything is
//! trusted:
//!
//! * pointwise quadrature routes: the Mehler-Dirichlet integral (`d = 2`),
//!   the closed form `sin(lambda r) / (lambda sinh r)` (`d = 3`), and the
//!   sphere-average representation (any `d`);
//! * a radial ODE sweep (series start, RK4 through the regular region,
//!   Numerov on the Liouville normal form further out) used to fill whole
//!   tables, one frequency per sweep.

use std::f64::consts::PI;

use crate::error::{Result, SphqError};
use crate::grid::RadialFunction;
use crate::quad::integrate_adaptive;

/// Real hyperbolic space `H^d` together with the two normalization
/// constants of the radial calculus.
///
/// `plancherel_scale` starts at 1 and is calibrated by the transform
/// round-trip (see `transform::SphericalTransform`); it is the single place
/// where the Haar-normalization freedom lives. `nilpotent_halfdim` is
/// `p = dim N / 2`, which controls the polynomial growth
/// `|c(lambda)|^{-2} ~ lambda^{2p}` of the Plancherel density.
#[derive(Debug, Clone)]
pub struct SpaceModel {
    pub dimension: u32,
    pub rho: f64,
    pub nilpotent_halfdim: f64,
    pub jacobian_scale: f64,
    pub plancherel_scale: f64,
}

impl SpaceModel {
    pub fn new(dimension: i64) -> Result<Self> {
        if dimension < 2 {
            return Err(SphqError::InvalidDimension { d: dimension });
        }
        let d = dimension as u32;
        let rho = (d as f64 - 1.0) / 2.0;
        Ok(SpaceModel {
            dimension: d,
            rho,
            nilpotent_halfdim: rho,
            jacobian_scale: sphere_area(d),
            plancherel_scale: 1.0,
        })
    }

    /// Density of the radial volume element at radius `r`.
    pub fn jacobian(&self, r: f64) -> f64 {
        self.jacobian_scale * r.sinh().powi(self.dimension as i32 - 1)
    }

    /// Plancherel density `plancherel_scale * |c(lambda)|^{-2}`, using the
    /// closed product form of the rank-one Gamma-function formula:
    /// `prod_{k<rho} (k^2 + lambda^2)` for odd `d`, and
    /// `lambda tanh(pi lambda) prod_{k<(d-2)/2} ((k+1/2)^2 + lambda^2)` for
    /// even `d`. Even in `lambda`.
    pub fn plancherel_density(&self, lambda: f64) -> f64 {
        self.plancherel_scale * plancherel_shape(self.dimension, lambda.abs())
    }

    /// Spherical function `phi_lambda(r)`, via the pointwise quadrature
    /// route for this dimension. `phi_lambda(0) = 1`,
    /// `|phi_lambda(r)| <= 1` for real `lambda`.
    pub fn spherical_function(&self, lambda: f64, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(SphqError::domain(format!("negative radius r = {r}")));
        }
        let lambda = lambda.abs();
        match self.dimension {
            2 => phi_mehler_d2(lambda, r),
            3 => Ok(phi_closed_d3(lambda, r)),
            d => phi_sphere_integral(d, lambda, r),
        }
    }

    /// Independent cross-route for `phi_lambda` (sphere average for
    /// `d != 3`, radial ODE for `d = 3`); table builds validate against it.
    pub fn spherical_function_cross(&self, lambda: f64, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(SphqError::domain(format!("negative radius r = {r}")));
        }
        let lambda = lambda.abs();
        match self.dimension {
            3 => {
                let plan = OdeSweepPlan::new(self, (r + 0.1).max(0.2));
                Ok(plan.sweep(lambda, &[r])[0])
            }
            d => phi_sphere_integral(d, lambda, r),
        }
    }
}

/// Area of the unit sphere `S^{d-1}`.
pub fn sphere_area(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half_integer(d)
}

/// `Gamma(k/2)` for positive integer `k`, by closed form.
pub fn gamma_half_integer(k: u32) -> f64 {
    assert!(k >= 1);
    if k % 2 == 0 {
        // Gamma(n) = (n-1)!
        let n = k / 2;
        (1..n).map(|j| j as f64).product()
    } else {
        // Gamma(n + 1/2) = (2n)! / (4^n n!) sqrt(pi)
        let n = (k - 1) / 2;
        let mut v = PI.sqrt();
        for j in 1..=n {
            v *= j as f64 - 0.5;
        }
        v
    }
}

fn plancherel_shape(d: u32, lambda: f64) -> f64 {
    if d % 2 == 1 {
        let m = (d - 1) / 2;
        (0..m)
            .map(|k| (k * k) as f64 + lambda * lambda)
            .product::<f64>()
    } else {
        let m = (d - 2) / 2;
        let base = lambda * (PI * lambda).tanh();
        base * (0..m)
            .map(|k| {
                let half = k as f64 + 0.5;
                half * half + lambda * lambda
            })
            .product::<f64>()
    }
}

/// `sinh(x)/x`, stable at the origin.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0 * (1.0 + x * x / 20.0)
    } else {
        x.sinh() / x
    }
}

/// Taylor expansion of `phi_lambda` around the origin, coefficients from
/// the Frobenius recurrence of the radial equation
/// `phi'' + (d-1) coth(r) phi' = -(lambda^2 + rho^2) phi`.
///
/// The nearest singularities of `coth` sit at `r = +- i pi`, so the series
/// converges on `|r| < pi`; with 64 terms it is machine-accurate for
/// `r <= 0.5` across the frequency range of interest.
fn phi_series(d: u32, c: f64, r: f64) -> (f64, f64) {
    // coth(x) = 1/x + sum_m C[m-1] x^{2m-1}
    const C: [f64; 6] = [
        1.0 / 3.0,
        -1.0 / 45.0,
        2.0 / 945.0,
        -1.0 / 4725.0,
        2.0 / 93555.0,
        -1382.0 / 638_512_875.0,
    ];
    const KMAX: usize = 64;
    let dm1 = d as f64 - 1.0;
    let mut a = [0.0f64; KMAX + 1];
    a[0] = 1.0;
    for k in 1..=KMAX {
        let kf = k as f64;
        let mut num = -c * a[k - 1];
        for (m, cm) in C.iter().enumerate() {
            let m = m + 1;
            if k >= m && k - m >= 1 {
                num -= 2.0 * dm1 * cm * (kf - m as f64) * a[k - m];
            }
        }
        a[k] = num / (2.0 * kf * (2.0 * kf + d as f64 - 2.0));
    }
    let r2 = r * r;
    let mut phi = 0.0;
    let mut pow = 1.0;
    for ak in &a {
        phi += ak * pow;
        pow *= r2;
    }
    let mut dphi = 0.0;
    let mut powm = r;
    for (k, ak) in a.iter().enumerate().skip(1) {
        dphi += 2.0 * k as f64 * ak * powm;
        powm *= r2;
    }
    (phi, dphi)
}

/// `phi_lambda` on `H^3`: `sin(lambda r) / (lambda sinh r)`, with the
/// `lambda -> 0` limit `r / sinh r`.
pub fn phi_closed_d3(lambda: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let x = lambda * r;
    if x.abs() < 1e-8 {
        r * (1.0 - x * x / 6.0) / r.sinh()
    } else {
        x.sin() / (lambda * r.sinh())
    }
}

/// `phi_lambda` on `H^2` (the conical Legendre value
/// `P_{-1/2 + i lambda}(cosh r)`) through the Mehler-Dirichlet integral,
/// regularized by the substitution `t = r - s^2`:
///
/// `phi = (2 sqrt(2)/pi) int_0^{sqrt(r)}
///        cos(lambda (r - s^2)) / sqrt(sinh(r - s^2/2) sinhc(s^2/2)) ds`.
pub fn phi_mehler_d2(lambda: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(1.0);
    }
    if r < 1e-6 {
        return Ok(phi_series(2, lambda * lambda + 0.25, r).0);
    }
    let s_max = r.sqrt();
    let panels0 = (1.0 + lambda * r / 10.0).ceil() as usize;
    let integral = integrate_adaptive(
        |s| {
            let s2 = s * s;
            let den = ((r - 0.5 * s2).sinh() * sinhc(0.5 * s2)).sqrt();
            (lambda * (r - s2)).cos() / den
        },
        0.0,
        s_max,
        1e-13,
        panels0,
    )?;
    Ok(2.0 * std::f64::consts::SQRT_2 / PI * integral)
}

/// `phi_lambda` on `H^d` as a sphere average: the real part of
/// `(1/N_d) int_0^pi (cosh r + sinh r cos(theta))^{i lambda - rho}
/// sin^{d-2}(theta) dtheta`. For `d = 2` this is the circle-integral
/// representation of the conical Legendre function.
pub fn phi_sphere_integral(d: u32, lambda: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(1.0);
    }
    let rho = (d as f64 - 1.0) / 2.0;
    if r < 1e-6 {
        return Ok(phi_series(d, lambda * lambda + rho * rho, r).0);
    }
    let norm = PI.sqrt() * gamma_half_integer(d - 1) / gamma_half_integer(d);
    let (ch, sh) = (r.cosh(), r.sinh());
    let panels0 = (1.0 + lambda * r / 5.0).ceil() as usize;
    let integral = integrate_adaptive(
        |theta| {
            let z = ch + sh * theta.cos();
            let w = theta.sin().powi(d as i32 - 2);
            w * z.powf(-rho) * (lambda * z.ln()).cos()
        },
        0.0,
        PI,
        1e-13,
        panels0,
    )?;
    Ok(integral / norm)
}

/// Precomputed mesh data for radial ODE sweeps up to a given radius.
///
/// The sweep integrates the regular region `[r0, r_switch]` with RK4 on
/// `phi` directly (series start at `r0`), then switches to the Liouville
/// normal form `u = sinh^rho(r) phi`, where
/// `u'' = (rho (rho - 1) csch^2 r - lambda^2) u`
/// has no first-order term, and marches it with Numerov steps. Potentials
/// are precomputed once and shared across all frequencies.
pub struct OdeSweepPlan {
    d: u32,
    rho: f64,
    c_base: f64,
    r0: f64,
    r_switch: f64,
    h_rk: f64,
    n_rk: usize,
    /// coth at the RK4 half-step mesh `r0 + j h_rk / 2`.
    coth_half: Vec<f64>,
    h_nv: f64,
    n_nv: usize,
    /// `rho (rho - 1) csch^2` at the Numerov mesh `r_switch + j h_nv`.
    nv_base: Vec<f64>,
}

impl OdeSweepPlan {
    pub fn new(space: &SpaceModel, r_max: f64) -> Self {
        let d = space.dimension;
        let rho = space.rho;
        let h_rk = 1e-4;
        // Series start well away from the coth pole at 0; the series is
        // machine-accurate there and RK4 sees only smooth coefficients.
        let r0 = 0.1f64.min(r_max * 0.25);
        let r_switch = 0.5f64.min(r_max * 0.5).max(r0 + 10.0 * h_rk);
        let n_rk = ((r_switch - r0) / h_rk).round() as usize;
        let h_rk = (r_switch - r0) / n_rk as f64;
        let coth_half = (0..=2 * n_rk)
            .map(|j| {
                let r = r0 + 0.5 * h_rk * j as f64;
                1.0 / r.tanh()
            })
            .collect();
        let h_nv = 2e-4;
        let n_nv = if r_max > r_switch {
            ((r_max - r_switch) / h_nv).ceil() as usize + 4
        } else {
            0
        };
        let nv_base = (0..=n_nv)
            .map(|j| {
                let r = r_switch + h_nv * j as f64;
                let s = r.sinh();
                rho * (rho - 1.0) / (s * s)
            })
            .collect();
        OdeSweepPlan {
            d,
            rho,
            c_base: rho * rho,
            r0,
            r_switch,
            h_rk,
            n_rk,
            coth_half,
            h_nv,
            n_nv,
            nv_base,
        }
    }

    /// `phi_lambda` at the sorted target radii (all within the plan range).
    pub fn sweep(&self, lambda: f64, targets: &[f64]) -> Vec<f64> {
        debug_assert!(targets.windows(2).all(|w| w[1] >= w[0]));
        let c = self.c_base + lambda * lambda;
        let mut out = Vec::with_capacity(targets.len());
        let mut it = targets.iter().peekable();

        // Targets inside the series region.
        while let Some(&&t) = it.peek() {
            if t <= self.r0 {
                out.push(if t == 0.0 { 1.0 } else { phi_series(self.d, c, t).0 });
                it.next();
            } else {
                break;
            }
        }

        // RK4 on phi over [r0, r_switch], emitting by Hermite interpolation.
        let dm1 = self.d as f64 - 1.0;
        let (mut phi, mut dphi) = phi_series(self.d, c, self.r0);
        let h = self.h_rk;
        let deriv = |coth: f64, y: f64, dy: f64| (dy, -c * y - dm1 * coth * dy);
        for j in 0..self.n_rk {
            let r_a = self.r0 + h * j as f64;
            let (phi_a, dphi_a) = (phi, dphi);
            let c0 = self.coth_half[2 * j];
            let c1 = self.coth_half[2 * j + 1];
            let c2 = self.coth_half[2 * j + 2];
            let (k1, l1) = deriv(c0, phi, dphi);
            let (k2, l2) = deriv(c1, phi + 0.5 * h * k1, dphi + 0.5 * h * l1);
            let (k3, l3) = deriv(c1, phi + 0.5 * h * k2, dphi + 0.5 * h * l2);
            let (k4, l4) = deriv(c2, phi + h * k3, dphi + h * l3);
            phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            dphi += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
            let r_b = r_a + h;
            while let Some(&&t) = it.peek() {
                if t <= r_b + 1e-15 {
                    let s = ((t - r_a) / h).clamp(0.0, 1.0);
                    let (s2, s3) = (s * s, s * s * s);
                    let v = (2.0 * s3 - 3.0 * s2 + 1.0) * phi_a
                        + (s3 - 2.0 * s2 + s) * h * dphi_a
                        + (-2.0 * s3 + 3.0 * s2) * phi
                        + (s3 - s2) * h * dphi;
                    out.push(v);
                    it.next();
                } else {
                    break;
                }
            }
            if it.peek().is_none() && j + 1 < self.n_rk {
                return out;
            }
        }
        if it.peek().is_none() {
            return out;
        }

        // Numerov on u = sinh^rho phi beyond r_switch.
        let hn = self.h_nv;
        let rs = self.r_switch;
        let sinh_rho = |r: f64| r.sinh().powf(self.rho);
        let u_start = sinh_rho(rs) * phi;
        // One RK4 step of size h_nv supplies the second starting value.
        {
            let cm = 1.0 / rs.tanh();
            let ch = 1.0 / (rs + 0.5 * hn).tanh();
            let cp = 1.0 / (rs + hn).tanh();
            let (k1, l1) = deriv(cm, phi, dphi);
            let (k2, l2) = deriv(ch, phi + 0.5 * hn * k1, dphi + 0.5 * hn * l1);
            let (k3, l3) = deriv(ch, phi + 0.5 * hn * k2, dphi + 0.5 * hn * l2);
            let (k4, _l4) = deriv(cp, phi + hn * k3, dphi + hn * l3);
            phi += hn / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let mut u_cur = sinh_rho(rs + hn) * phi;
        // Ring of the last four (r, u) samples for cubic emission.
        let mut ring: Vec<(f64, f64)> = vec![(rs, u_start), (rs + hn, u_cur)];
        let fpot = |j: usize| self.nv_base[j] - lambda * lambda;
        let h2 = hn * hn;
        // Summed form of the Numerov march: advancing the small increment
        // `delta` separately keeps per-step rounding out of the velocity,
        // which the oscillatory recurrence would amplify by 1/(lambda h).
        let mut w_cur = u_cur * (1.0 - h2 * fpot(1) / 12.0);
        let mut delta = w_cur - u_start * (1.0 - h2 * fpot(0) / 12.0);
        for j in 1..self.n_nv {
            delta += h2 * fpot(j) * u_cur;
            w_cur += delta;
            u_cur = w_cur / (1.0 - h2 * fpot(j + 1) / 12.0);
            let r_new = rs + hn * (j + 1) as f64;
            ring.push((r_new, u_cur));
            if ring.len() > 4 {
                ring.remove(0);
            }
            if ring.len() == 4 {
                // Emit targets bracketed by the middle pair.
                let emit_hi = ring[2].0;
                while let Some(&&t) = it.peek() {
                    if t <= emit_hi + 1e-15 {
                        let u_t = lagrange4(&ring, t);
                        out.push(u_t / sinh_rho(t));
                        it.next();
                    } else {
                        break;
                    }
                }
                if it.peek().is_none() {
                    return out;
                }
            }
        }
        // Trailing targets right at the end of the range.
        while let Some(&&t) = it.peek() {
            let u_t = lagrange4(&ring, t);
            out.push(u_t / sinh_rho(t));
            it.next();
        }
        out
    }
}

fn lagrange4(pts: &[(f64, f64)], x: f64) -> f64 {
    let k = pts.len();
    let mut acc = 0.0;
    for i in 0..k {
        let mut li = pts[i].1;
        for m in 0..k {
            if m != i {
                li *= (x - pts[m].0) / (pts[i].0 - pts[m].0);
            }
        }
        acc += li;
    }
    acc
}

/// Radial Laplace-Beltrami operator by second-order differences:
/// `f'' + (d-1) coth(r) f'` on interior nodes, the regular limit
/// `d f''(0)` at the origin (even extension), and a one-sided copy at the
/// outer boundary.
pub fn radial_laplacian(space: &SpaceModel, f: &RadialFunction) -> Result<RadialFunction> {
    let nodes = &f.grid.nodes;
    let n = nodes.len();
    if n < 5 {
        return Err(SphqError::Resolution {
            what: format!("radial grid has {n} nodes, need at least 5"),
        });
    }
    let dm1 = space.dimension as f64 - 1.0;
    let v = &f.values;
    let mut out = vec![0.0; n];
    out[0] = space.dimension as f64 * 2.0 * (v[1] - v[0]) / (nodes[1] * nodes[1]);
    for i in 1..n - 1 {
        let h1 = nodes[i] - nodes[i - 1];
        let h2 = nodes[i + 1] - nodes[i];
        let denom = h1 * h2 * (h1 + h2);
        let d2 = 2.0 * (h1 * v[i + 1] - (h1 + h2) * v[i] + h2 * v[i - 1]) / denom;
        let d1 = (h1 * h1 * v[i + 1] + (h2 * h2 - h1 * h1) * v[i] - h2 * h2 * v[i - 1]) / denom;
        out[i] = d2 + dm1 / nodes[i].tanh() * d1;
    }
    out[n - 1] = out[n - 2];
    Ok(RadialFunction {
        grid: f.grid.clone(),
        values: out,
    })
}

/// Hyperbolic law of cosines: the distance of the composition of radial
/// steps `r` and `s` at angle `theta`, with `theta = 0` aligned
/// (`r + s`) and `theta = pi` antipodal (`|r - s|`).
pub fn composite_distance(r: f64, s: f64, theta: f64) -> Result<f64> {
    if r < 0.0 || s < 0.0 {
        return Err(SphqError::domain("radii must be nonnegative"));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(SphqError::domain(format!(
            "angle theta = {theta} outside [0, pi]"
        )));
    }
    let x = r.cosh() * s.cosh() + r.sinh() * s.sinh() * theta.cos();
    Ok(x.max(1.0).acosh())
}

/// Average of `g(composite_distance(r, s, .))` over the sphere angle with
/// weight `sin^{d-2}(theta)`, normalized to a probability average.
pub fn k_average(
    space: &SpaceModel,
    g: impl Fn(f64) -> f64,
    r: f64,
    s: f64,
    tol: f64,
) -> Result<f64> {
    let d = space.dimension;
    let norm = PI.sqrt() * gamma_half_integer(d - 1) / gamma_half_integer(d);
    let integral = integrate_adaptive(
        |theta| {
            let dist = {
                let x = r.cosh() * s.cosh() + r.sinh() * s.sinh() * theta.cos();
                x.max(1.0).acosh()
            };
            g(dist) * theta.sin().powi(d as i32 - 2)
        },
        0.0,
        PI,
        tol,
        4,
    )?;
    Ok(integral / norm)
}
