//! Certification of the coercivity constant chain for separable symbols
//! `q = kappa psi + sum_k u_k v_k`:
//!
//! 1. two-sided comparability of `q1` against `1 + psi` (`c0`, `c1`);
//! 2. growth constants of `psi` (`c_psi`, lower-bound exponent);
//! 3. numeric envelopes `Phi_beta` dominating
//!    `|(-Delta)^{beta/2}(phi_{-lambda} u)| |v(eta)| <lambda>^{-M}
//!    (1+psi(eta))^{-1}` over a sampled frequency panel, with their
//!    `L^1` norms;
//! 4. `C_M` and `gamma_M`;
//! 5. the smallness condition `sum_beta ||Phi_beta||_1 <= gamma_M c0`;
//! 6. the coercivity shift `alpha_0` and a Galerkin coercivity /
//!    resolvent smoke test.
//!
//! Failures short-circuit: later stages are reported as skipped.

use serde::Serialize;

use crate::error::{Result, SphqError};
use crate::exponent::{GangolliExponent, GrowthFit};
use crate::galerkin::{alpha0_compute, assemble_bilinear_form, coercivity_audit, solve_resolvent};
use crate::grid::{RadialFunction, RadialGrid, SpectralFunction};
use crate::par;
use crate::symbol::{audit_a1, Bump, GangolliSymbol};
use crate::table;
use crate::transform::{SphericalTransform, TruncationPolicy};

/// Sampling panel for the envelope construction.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeConfig {
    /// Frequency panel extent for both `lambda` and `eta`.
    pub lambda_env: f64,
    pub n_lambda: usize,
    pub n_eta: usize,
    /// Envelope support beyond the coefficient support (the fractional
    /// Laplacian is nonlocal for odd orders).
    pub r_pad: f64,
    /// Grid-sup undercoverage margin.
    pub safety: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        EnvelopeConfig {
            lambda_env: 30.0,
            n_lambda: 60,
            n_eta: 60,
            r_pad: 6.0,
            safety: 1.1,
        }
    }
}

/// One envelope `Phi_beta` with its `L^1` norm.
#[derive(Debug, Clone)]
pub struct PhiBetaEnvelope {
    pub beta: usize,
    pub func: RadialFunction,
    pub norm_l1: f64,
}

/// Envelopes `Phi_beta`, `beta = 0..=M`, summed over the perturbation
/// terms of `symbol`, certified on the sampled `(lambda, eta)` panel.
pub fn phi_beta_envelopes(
    t: &SphericalTransform,
    symbol: &GangolliSymbol,
    cfg: &EnvelopeConfig,
) -> Result<Vec<PhiBetaEnvelope>> {
    let m = symbol.m_order;
    let r_env = (symbol.base_radius() + cfg.r_pad).max(1.0);
    let env_grid = RadialGrid::composite_gl(r_env, 40, 6);
    let mut envelopes: Vec<RadialFunction> = (0..=m)
        .map(|_| RadialFunction::zero(&env_grid))
        .collect();
    if symbol.terms.is_empty() {
        return Ok(envelopes
            .into_iter()
            .enumerate()
            .map(|(beta, func)| PhiBetaEnvelope {
                beta,
                func,
                norm_l1: 0.0,
            })
            .collect());
    }
    // phi at (transform spectral grid x envelope radii) for the fractional
    // powers evaluated spectrally.
    let env_table = table::get_or_build(t.space(), t.sgrid(), &env_grid, t.exec_mode())?;
    let rho2 = t.space().rho * t.space().rho;
    let n_s = t.sgrid().n_points();
    let n_env = env_grid.n_points();
    for term in &symbol.terms {
        // sup over the eta panel of |v| / (1 + psi).
        let mut v_sup: f64 = 0.0;
        for k in 0..=cfg.n_eta {
            let eta = cfg.lambda_env * k as f64 / cfg.n_eta as f64;
            v_sup = v_sup.max(term.v.psi(eta).abs() / (1.0 + symbol.psi.psi(eta)));
        }
        // Per sampled lambda: forward(phi_lambda u), then every fractional
        // power evaluated on the envelope radii.
        let per_lambda: Vec<Vec<Vec<f64>>> =
            par::try_map_indexed(t.exec_mode(), cfg.n_lambda + 1, |k| {
                let lambda = cfg.lambda_env * k as f64 / cfg.n_lambda as f64;
                let phi = crate::psdo::phi_row(t, lambda);
                let g = RadialFunction {
                    grid: std::sync::Arc::clone(t.rgrid()),
                    values: t
                        .rgrid()
                        .nodes
                        .iter()
                        .enumerate()
                        .map(|(i, &r)| phi[i] * term.u.eval(r))
                        .collect(),
                };
                let ghat = t.forward(&g, TruncationPolicy::Strict)?;
                let bracket = (1.0 + lambda * lambda).powf(-(m as f64) / 2.0);
                // Accumulate over beta with incremental sqrt powers.
                let coeff: Vec<f64> = (0..n_s)
                    .map(|j| t.sgrid().weights[j] * ghat.values[j].re * t.omega(j))
                    .collect();
                let sqrt_base: Vec<f64> = t
                    .sgrid()
                    .nodes
                    .iter()
                    .map(|&l| (rho2 + l * l).sqrt())
                    .collect();
                let mut pw = vec![1.0; n_s];
                let mut out = Vec::with_capacity(m + 1);
                for _beta in 0..=m {
                    let vals: Vec<f64> = (0..n_env)
                        .map(|i| {
                            let mut acc = 0.0;
                            for j in 0..n_s {
                                acc += coeff[j] * pw[j] * env_table.value(j, i);
                            }
                            acc.abs() * bracket
                        })
                        .collect();
                    out.push(vals);
                    for j in 0..n_s {
                        pw[j] *= sqrt_base[j];
                    }
                }
                Ok::<_, SphqError>(out)
            })?;
        for lam in &per_lambda {
            for (beta, vals) in lam.iter().enumerate() {
                for i in 0..n_env {
                    let candidate = cfg.safety * v_sup * vals[i];
                    if candidate > envelopes[beta].values[i] {
                        envelopes[beta].values[i] = candidate;
                    }
                }
            }
        }
    }
    Ok(envelopes
        .into_iter()
        .enumerate()
        .map(|(beta, func)| {
            let norm_l1 = (0..n_env)
                .map(|i| env_grid.weights[i] * func.values[i] * t.space().jacobian(env_grid.nodes[i]))
                .sum();
            PhiBetaEnvelope {
                beta,
                func,
                norm_l1,
            }
        })
        .collect())
}

/// The constants `C_M` and `gamma_M`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CmGm {
    pub c_m: f64,
    pub gamma_m: f64,
    /// `||<.>^{-(M-1)}||_{L^1(omega)}` (grid plus tail bound).
    pub weight_m1: f64,
    /// `||<.>^{-M}||_{L^1(omega)}`.
    pub weight_m: f64,
}

/// `C_M = 2^{M/2} sup <lambda>^M / sum_beta (rho^2+lambda^2)^{beta/2}`
/// (grid sup with a closed-form tail majorant) and
/// `gamma_M = (8 C_M (2 (1+c_psi))^{1/2} ||<.>^{-M+1}||_{L^1(omega)})^{-1}`.
pub fn constants_cm_gamma_m(t: &SphericalTransform, c_psi: f64, m: usize) -> Result<CmGm> {
    let d = t.space().dimension as f64;
    if (m as f64) <= d + 1.0 {
        return Err(SphqError::usage(format!(
            "need M > d + 1 for gamma_M (M = {m}, d = {d})"
        )));
    }
    let rho2 = t.space().rho * t.space().rho;
    let mut sup: f64 = 0.0;
    for &l in &t.sgrid().nodes {
        let mut denom = 0.0;
        let sqrt_base = (rho2 + l * l).sqrt();
        let mut pw = 1.0;
        for _ in 0..=m {
            denom += pw;
            pw *= sqrt_base;
        }
        sup = sup.max((1.0 + l * l).powf(m as f64 / 2.0) / denom);
    }
    // Beyond the grid the ratio is majorized by
    // ((1+lambda^2)/(rho^2+lambda^2))^{M/2}, decreasing for rho < 1 and
    // below 1 for rho >= 1.
    let lmax = t.sgrid().lambda_max;
    let tail = if t.space().rho < 1.0 {
        ((1.0 + lmax * lmax) / (rho2 + lmax * lmax)).powf(m as f64 / 2.0)
    } else {
        1.0
    };
    let c_m = 2f64.powf(m as f64 / 2.0) * sup.max(tail);
    let weight_m1 = t.weight_l1_norm(m as f64 - 1.0).total();
    let weight_m = t.weight_l1_norm(m as f64).total();
    let gamma_m = 1.0 / (8.0 * c_m * (2.0 * (1.0 + c_psi)).sqrt() * weight_m1);
    Ok(CmGm {
        c_m,
        gamma_m,
        weight_m1,
        weight_m,
    })
}

/// Bisection fit of the smallest `kappa` whose symbol
/// `kappa psi + u v` satisfies the smallness condition
/// `sum ||Phi_beta||_1 <= gamma_M c0(kappa)`; returns the guaranteed-pass
/// upper endpoint.
#[derive(Debug, Clone, Serialize)]
pub struct KappaReport {
    pub kappa_min: f64,
    pub sum_phi_norms: f64,
    pub gamma_m: f64,
    /// `c0` of the unit-kappa symbol; `c0(kappa) = kappa * c0_unit`.
    pub c0_unit: f64,
}

pub fn minimal_kappa(
    t: &SphericalTransform,
    psi: &GangolliExponent,
    u: &Bump,
    v: &GangolliExponent,
    m_order: usize,
    cfg: &EnvelopeConfig,
) -> Result<KappaReport> {
    let unit = GangolliSymbol::new(
        1.0,
        psi.clone(),
        vec![(u.clone(), v.clone())],
        m_order,
        t.sgrid(),
    )?;
    let envelopes = phi_beta_envelopes(t, &unit, cfg)?;
    let sum_phi_norms: f64 = envelopes.iter().map(|e| e.norm_l1).sum();
    let growth = psi.fit_growth_constants(t.sgrid());
    if growth.flagged {
        return Err(SphqError::domain(
            "reference exponent has no admissible polynomial lower bound",
        ));
    }
    let constants = constants_cm_gamma_m(t, growth.c_psi, m_order)?;
    let a1 = audit_a1(&unit, psi, t.sgrid());
    if !a1.pass {
        return Err(SphqError::domain(
            "unit-kappa symbol fails the comparability audit",
        ));
    }
    let c0_unit = a1.c0;
    let admissible = |kappa: f64| sum_phi_norms <= constants.gamma_m * kappa * c0_unit;
    if sum_phi_norms == 0.0 {
        return Ok(KappaReport {
            kappa_min: 0.0,
            sum_phi_norms,
            gamma_m: constants.gamma_m,
            c0_unit,
        });
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while !admissible(hi) {
        hi *= 2.0;
        guard += 1;
        if guard > 80 {
            return Err(SphqError::domain("kappa bracket exceeded 2^80"));
        }
    }
    let mut lo = 0.0;
    while (hi - lo) > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(KappaReport {
        kappa_min: hi,
        sum_phi_norms,
        gamma_m: constants.gamma_m,
        c0_unit,
    })
}

/// Verifies the transformed-symbol decay bound
/// `|Fhat_{lambda,eta}(mu)| <= C_M sum ||Phi_beta||_1 <lambda+mu>^{-M}
/// (1 + psi(eta))` on a sampled `(lambda, mu, eta)` panel. Returns the
/// worst ratio (must stay at or below 1).
pub fn fhat_decay_worst_ratio(
    t: &SphericalTransform,
    symbol: &GangolliSymbol,
    c_m: f64,
    sum_phi: f64,
    lambdas: &[f64],
    mus: &[f64],
    etas: &[f64],
) -> Result<f64> {
    let m = symbol.m_order as f64;
    let mut worst: f64 = 0.0;
    for &lambda in lambdas {
        for &eta in etas {
            let fhat = crate::psdo::f_transform_hat(t, symbol, lambda, eta)?;
            for &mu in mus {
                // Interpolate |Fhat| at mu from the spectral samples.
                let val = crate::grid::interp_cubic(
                    &t.sgrid().nodes,
                    &fhat.real_values(),
                    mu,
                )
                .abs();
                let sum = lambda + mu;
                let bound =
                    c_m * sum_phi * (1.0 + sum * sum).powf(-m / 2.0) * (1.0 + symbol.psi.psi(eta));
                worst = worst.max(val / bound);
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StageStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageResult {
    pub name: String,
    pub status: StageStatus,
    pub detail: String,
}

/// The certified constants and per-stage verdicts of one audit run.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub dimension: u32,
    pub kappa: f64,
    pub m_order: usize,
    pub c0: f64,
    pub c1: f64,
    pub c_psi: f64,
    pub r_exp: f64,
    pub c_low: f64,
    pub c_m: f64,
    pub gamma_m: f64,
    pub phi_norms: Vec<f64>,
    pub sum_phi_norms: f64,
    pub alpha0: f64,
    pub kappa_min: Option<f64>,
    pub coercivity_margin: Option<f64>,
    pub resolvent_residual: Option<f64>,
    pub stages: Vec<StageResult>,
    pub pass: bool,
}

/// Galerkin smoke-test configuration for the pipeline tail.
#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub envelope: EnvelopeConfig,
    pub n_basis: usize,
    pub lambda_gal: f64,
    pub coercivity_probes: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            envelope: EnvelopeConfig::default(),
            n_basis: 256,
            lambda_gal: 10.0,
            coercivity_probes: 1000,
            seed: 0x5048,
        }
    }
}

/// Runs the full certification chain, short-circuiting at the first
/// failing stage.
pub fn audit_pipeline(
    t: &SphericalTransform,
    symbol: &GangolliSymbol,
    cfg: &PipelineConfig,
) -> Result<AuditReport> {
    let mut stages: Vec<StageResult> = Vec::new();
    let mut report = AuditReport {
        dimension: t.space().dimension,
        kappa: symbol.kappa,
        m_order: symbol.m_order,
        c0: f64::NAN,
        c1: f64::NAN,
        c_psi: f64::NAN,
        r_exp: f64::NAN,
        c_low: f64::NAN,
        c_m: f64::NAN,
        gamma_m: f64::NAN,
        phi_norms: Vec::new(),
        sum_phi_norms: f64::NAN,
        alpha0: f64::NAN,
        kappa_min: None,
        coercivity_margin: None,
        resolvent_residual: None,
        stages: Vec::new(),
        pass: false,
    };
    let fail = |stages: &mut Vec<StageResult>, name: &str, detail: String| {
        stages.push(StageResult {
            name: name.into(),
            status: StageStatus::Fail,
            detail,
        });
    };
    let pass = |stages: &mut Vec<StageResult>, name: &str, detail: String| {
        stages.push(StageResult {
            name: name.into(),
            status: StageStatus::Pass,
            detail,
        });
    };
    let finish = |mut report: AuditReport, mut stages: Vec<StageResult>| {
        const ALL: [&str; 7] = [
            "A.1",
            "growth",
            "envelopes",
            "constants",
            "assumption3",
            "alpha0+coercivity",
            "resolvent",
        ];
        for name in ALL.iter().skip(stages.len()) {
            stages.push(StageResult {
                name: (*name).into(),
                status: StageStatus::Skipped,
                detail: "earlier stage failed".into(),
            });
        }
        report.pass = stages.iter().all(|s| s.status == StageStatus::Pass);
        report.stages = stages;
        report
    };

    // Stage 1: A.1 comparability.
    let a1 = audit_a1(symbol, &symbol.psi, t.sgrid());
    report.c0 = a1.c0;
    report.c1 = a1.c1;
    if !a1.pass {
        fail(&mut stages, "A.1", format!("c0 = {:.3e} not certified", a1.c0));
        return Ok(finish(report, stages));
    }
    pass(&mut stages, "A.1", format!("c0 = {:.4}, c1 = {:.4}", a1.c0, a1.c1));

    // Stage 2: growth constants of psi.
    let growth: GrowthFit = symbol.psi.fit_growth_constants(t.sgrid());
    report.c_psi = growth.c_psi;
    report.r_exp = growth.r_exp;
    report.c_low = growth.c_low;
    if growth.flagged {
        fail(&mut stages, "growth", "no polynomial lower bound".into());
        return Ok(finish(report, stages));
    }
    pass(
        &mut stages,
        "growth",
        format!(
            "c_psi = {:.4}, r = {:.3}, c_low = {:.4}",
            growth.c_psi, growth.r_exp, growth.c_low
        ),
    );

    // Stage 3: envelopes.
    let envelopes = phi_beta_envelopes(t, symbol, &cfg.envelope)?;
    report.phi_norms = envelopes.iter().map(|e| e.norm_l1).collect();
    report.sum_phi_norms = report.phi_norms.iter().sum();
    pass(
        &mut stages,
        "envelopes",
        format!("sum ||Phi_beta||_1 = {:.4e}", report.sum_phi_norms),
    );

    // Stage 4: C_M, gamma_M.
    let constants = match constants_cm_gamma_m(t, growth.c_psi, symbol.m_order) {
        Ok(c) => c,
        Err(e) => {
            fail(&mut stages, "constants", e.to_string());
            return Ok(finish(report, stages));
        }
    };
    report.c_m = constants.c_m;
    report.gamma_m = constants.gamma_m;
    pass(
        &mut stages,
        "constants",
        format!("C_M = {:.4}, gamma_M = {:.4e}", constants.c_m, constants.gamma_m),
    );

    // Stage 5: smallness of the perturbation.
    let budget = constants.gamma_m * report.c0;
    if symbol.terms.len() == 1 {
        let term = &symbol.terms[0];
        report.kappa_min = Some(
            minimal_kappa(t, &symbol.psi, &term.u, &term.v, symbol.m_order, &cfg.envelope)?
                .kappa_min,
        );
    }
    if report.sum_phi_norms > budget {
        fail(
            &mut stages,
            "assumption3",
            format!(
                "sum ||Phi_beta||_1 = {:.4e} > gamma_M c0 = {:.4e}",
                report.sum_phi_norms, budget
            ),
        );
        return Ok(finish(report, stages));
    }
    pass(
        &mut stages,
        "assumption3",
        format!("{:.4e} <= {:.4e}", report.sum_phi_norms, budget),
    );

    // Stage 6: alpha_0 and coercivity.
    let alpha0 = alpha0_compute(symbol, &symbol.psi, report.c0, t.sgrid());
    report.alpha0 = alpha0;
    let sys = assemble_bilinear_form(t, symbol, alpha0, report.c0, cfg.n_basis.min(128), cfg.lambda_gal)?;
    let margin = coercivity_audit(&sys, cfg.coercivity_probes, cfg.seed);
    report.coercivity_margin = Some(margin);
    if margin < report.c0 / 2.0 - 1e-6 {
        fail(
            &mut stages,
            "alpha0+coercivity",
            format!("Rayleigh margin {margin:.4e} < c0/2 = {:.4e}", report.c0 / 2.0),
        );
        return Ok(finish(report, stages));
    }
    pass(
        &mut stages,
        "alpha0+coercivity",
        format!("alpha0 = {:.4}, margin = {:.4}", alpha0, margin),
    );

    // Stage 7: resolvent smoke solve.
    let spec = SpectralFunction::from_fn(t.sgrid(), |l| (-(l / 1.2) * (l / 1.2)).exp());
    let f = t.inverse(&spec, TruncationPolicy::Strict)?;
    let sys = assemble_bilinear_form(
        t,
        symbol,
        alpha0 + 1.0,
        report.c0,
        cfg.n_basis,
        cfg.lambda_gal,
    )?;
    let solve = solve_resolvent(t, &sys, &f)?;
    report.resolvent_residual = Some(solve.residual_rel);
    if solve.residual_rel > 1e-4 {
        fail(
            &mut stages,
            "resolvent",
            format!("residual {:.3e} > 1e-4", solve.residual_rel),
        );
        return Ok(finish(report, stages));
    }
    pass(
        &mut stages,
        "resolvent",
        format!("residual {:.3e}", solve.residual_rel),
    );
    Ok(finish(report, stages))
}
