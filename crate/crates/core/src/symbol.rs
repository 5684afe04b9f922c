//! Two-variable Gangolli symbols
//! `q(sigma, lambda) = q1(lambda) + sum_k u_k(sigma) v_k(lambda)` with
//! `q1 = kappa psi`, nonnegative compactly supported coefficients `u_k`
//! and Gangolli exponents `v_k` bounded by `|v_k| <= c_v (1 + psi)`.
//!
//! The smooth bump used for coefficients is
//! `u(r) = amplitude * exp(1/((r/radius)^2 - 1))` on `[0, radius)`, whose
//! derivatives are generated exactly through the rational-function
//! recurrence `N_{k+1} = N_k' (x^2-1)^2 - (4k x (x^2-1) + 2x) N_k` for
//! `d^k/dx^k exp(1/(x^2-1)) = exp(1/(x^2-1)) N_k(x) / (x^2-1)^{2k}`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SphqError};
use crate::exponent::{GangolliExponent, LevyMeasureRadial};
use crate::grid::SpectralGrid;
use crate::space::SpaceModel;

/// Smooth compactly supported radial bump with exact derivatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub radius: f64,
}

const MAX_DERIVATIVE_ORDER: usize = 16;
/// Below this distance to the support edge everything underflows anyway.
const EDGE_GUARD: f64 = 1.0 / 150.0;

impl Bump {
    pub fn new(amplitude: f64, radius: f64) -> Result<Self> {
        if amplitude < 0.0 || radius <= 0.0 {
            return Err(SphqError::domain(
                "bump needs nonnegative amplitude and positive radius",
            ));
        }
        Ok(Bump { amplitude, radius })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let x = r.abs() / self.radius;
        let q = x * x - 1.0;
        if q >= -EDGE_GUARD {
            return 0.0;
        }
        self.amplitude * (1.0 / q).exp()
    }

    /// `d^k/dr^k` of the bump (even extension through the origin).
    pub fn deriv(&self, k: usize, r: f64) -> Result<f64> {
        if k > MAX_DERIVATIVE_ORDER {
            return Err(SphqError::Smoothness {
                what: format!("bump derivatives coded up to order {MAX_DERIVATIVE_ORDER}, requested {k}"),
            });
        }
        if k == 0 {
            return Ok(self.eval(r));
        }
        let x = r / self.radius;
        let q = x * x - 1.0;
        if q >= -EDGE_GUARD || x.abs() > 1.0 {
            return Ok(0.0);
        }
        let n_k = numerator_poly(k);
        let val = (1.0 / q).exp() * poly_eval(&n_k, x) / q.powi(2 * k as i32);
        Ok(self.amplitude * val / self.radius.powi(k as i32))
    }
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &ai) in a.iter().enumerate() {
        out[i] += ai;
    }
    for (i, &bi) in b.iter().enumerate() {
        out[i] += bi;
    }
    out
}

fn poly_derivative(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect()
}

/// `N_k` in `g^{(k)} = g N_k / (x^2-1)^{2k}` for `g = exp(1/(x^2-1))`.
fn numerator_poly(k: usize) -> Vec<f64> {
    let q2 = [1.0, 0.0, -2.0, 0.0, 1.0]; // (x^2-1)^2
    let mut n = vec![1.0];
    for m in 0..k {
        let dn = poly_derivative(&n);
        let term1 = poly_mul(&dn, &q2);
        // -(4 m x (x^2 - 1) + 2x) N_m
        let lin = [0.0, -(4.0 * m as f64) * -1.0 - 2.0, 0.0, -(4.0 * m as f64)];
        let term2 = poly_mul(&lin, &n);
        n = poly_add(&term1, &term2);
    }
    n
}

/// One spatial perturbation term `u(sigma) v(lambda)`.
#[derive(Debug, Clone)]
pub struct Q2Term {
    pub u: Bump,
    pub v: GangolliExponent,
    /// Fitted bound constant with `|v| <= c_v (1 + psi)` on the grid.
    pub c_v: f64,
}

/// Separable Gangolli symbol `kappa psi + sum u_k v_k`.
#[derive(Debug, Clone)]
pub struct GangolliSymbol {
    pub kappa: f64,
    pub psi: GangolliExponent,
    pub terms: Vec<Q2Term>,
    /// Even smoothness order for the perturbation audit.
    pub m_order: usize,
}

impl GangolliSymbol {
    /// Builds and validates a symbol: `kappa > 0`, even `m_order`, and the
    /// bound `|v_k| <= c_v (1 + psi)` verified on `sgrid` (fitting `c_v`
    /// with a 5% margin).
    pub fn new(
        kappa: f64,
        psi: GangolliExponent,
        terms: Vec<(Bump, GangolliExponent)>,
        m_order: usize,
        sgrid: &SpectralGrid,
    ) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(SphqError::domain("kappa must be positive"));
        }
        if m_order % 2 != 0 || m_order == 0 {
            return Err(SphqError::usage(format!(
                "smoothness order M must be even and positive, got {m_order}"
            )));
        }
        let mut built = Vec::new();
        for (u, v) in terms {
            let mut c_v: f64 = 0.0;
            for &l in &sgrid.nodes {
                let ratio = v.psi(l).abs() / (1.0 + psi.psi(l));
                if !ratio.is_finite() {
                    return Err(SphqError::domain(
                        "perturbation exponent unbounded against 1 + psi",
                    ));
                }
                c_v = c_v.max(ratio);
            }
            // Growth faster than psi shows up as a ratio still climbing at
            // the end of the grid; refuse to certify such terms.
            let tail_a = v.psi(sgrid.lambda_max * 0.9).abs()
                / (1.0 + psi.psi(sgrid.lambda_max * 0.9));
            let tail_b = v.psi(sgrid.lambda_max).abs() / (1.0 + psi.psi(sgrid.lambda_max));
            if tail_b > tail_a * 1.02 && tail_b > 0.5 * c_v {
                return Err(SphqError::domain(format!(
                    "perturbation exponent ratio |v|/(1+psi) still growing at lambda_max ({tail_a:.3e} -> {tail_b:.3e})"
                )));
            }
            built.push(Q2Term {
                u,
                v,
                c_v: c_v * 1.05,
            });
        }
        Ok(GangolliSymbol {
            kappa,
            psi,
            terms: built,
            m_order,
        })
    }

    /// Constant-coefficient symbol `kappa psi`.
    pub fn constant_coefficient(kappa: f64, psi: GangolliExponent, m_order: usize) -> Self {
        GangolliSymbol {
            kappa,
            psi,
            terms: Vec::new(),
            m_order,
        }
    }

    pub fn q1(&self, lambda: f64) -> f64 {
        self.kappa * self.psi.psi(lambda)
    }

    pub fn q2(&self, r: f64, lambda: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.u.eval(r) * term.v.psi(lambda))
            .sum()
    }

    pub fn eval(&self, r: f64, lambda: f64) -> f64 {
        self.q1(lambda) + self.q2(r, lambda)
    }

    /// A radius beyond every perturbation support (where `q(sigma0, .) =
    /// q1`).
    pub fn base_radius(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.u.radius)
            .fold(0.0, f64::max)
            * 1.05
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Verdict of the two-sided comparability bound
/// `c0 (1 + psi) <= q1 <= c1 (1 + psi)` on `|lambda| >= 1`.
#[derive(Debug, Clone, Serialize)]
pub struct A1Report {
    pub c0: f64,
    pub c1: f64,
    pub pass: bool,
    /// Grid certification detail: the lower ratio must not still be
    /// falling at the end of the grid.
    pub tail_ok: bool,
}

/// Fits `c0 = inf q1/(1+psi_ref)` and `c1 = sup` over the grid region
/// `lambda >= 1`; passes iff `c0 > 0` and the infimum is not running off
/// the end of the grid.
pub fn audit_a1(
    symbol: &GangolliSymbol,
    psi_ref: &GangolliExponent,
    sgrid: &SpectralGrid,
) -> A1Report {
    let mut c0 = f64::INFINITY;
    let mut c1: f64 = 0.0;
    let mut argmin = 0usize;
    let mut count = 0usize;
    for (j, &l) in sgrid.nodes.iter().enumerate() {
        if l < 1.0 {
            continue;
        }
        let ratio = symbol.q1(l) / (1.0 + psi_ref.psi(l));
        if ratio < c0 {
            c0 = ratio;
            argmin = j;
        }
        c1 = c1.max(ratio);
        count += 1;
    }
    // Tail check: an infimum attained at the last nodes with the ratio
    // still strictly decreasing cannot be certified.
    let last_stretch = argmin + sgrid.n_points() / 50 >= sgrid.n_points();
    let tail_decreasing = {
        let a = symbol.q1(sgrid.lambda_max * 0.98) / (1.0 + psi_ref.psi(sgrid.lambda_max * 0.98));
        let b = symbol.q1(sgrid.lambda_max) / (1.0 + psi_ref.psi(sgrid.lambda_max));
        b < a * (1.0 - 1e-6)
    };
    let tail_ok = !(last_stretch && tail_decreasing);
    A1Report {
        c0,
        c1,
        pass: count > 0 && c0 > 0.0 && tail_ok,
        tail_ok,
    }
}

// ---------------------------------------------------------------------------
// Structured symbol / exponent specification files.

/// Exponent description as stored in JSON specification files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentSpec {
    Bm,
    Stable {
        alpha: f64,
    },
    /// Levy triple; the file route carries atom measures.
    Characteristics {
        #[serde(default)]
        diffusion: f64,
        #[serde(default)]
        kill_rate: f64,
        #[serde(default)]
        levy_atoms: Vec<(f64, f64)>,
    },
}

impl ExponentSpec {
    pub fn build(&self, space: &SpaceModel) -> Result<GangolliExponent> {
        match self {
            ExponentSpec::Bm => Ok(GangolliExponent::brownian(space)),
            ExponentSpec::Stable { alpha } => GangolliExponent::stable(space, *alpha),
            ExponentSpec::Characteristics {
                diffusion,
                kill_rate,
                levy_atoms,
            } => {
                let levy = if levy_atoms.is_empty() {
                    None
                } else {
                    Some(LevyMeasureRadial::from_atoms(levy_atoms.clone())?)
                };
                GangolliExponent::from_characteristics(space, *diffusion, *kill_rate, levy)
            }
        }
    }
}

/// Grid block of specification files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_max: f64,
    pub lambda_max: f64,
    #[serde(default = "default_panels")]
    pub radial_panels: usize,
    #[serde(default = "default_panels")]
    pub spectral_panels: usize,
    #[serde(default = "default_per_panel")]
    pub nodes_per_panel: usize,
}

fn default_panels() -> usize {
    250
}
fn default_per_panel() -> usize {
    16
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            r_max: 20.0,
            lambda_max: 40.0,
            radial_panels: default_panels(),
            spectral_panels: default_panels(),
            nodes_per_panel: default_per_panel(),
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> (std::sync::Arc<crate::grid::RadialGrid>, std::sync::Arc<SpectralGrid>) {
        (
            crate::grid::RadialGrid::composite_gl(self.r_max, self.radial_panels, self.nodes_per_panel),
            SpectralGrid::composite_gl(self.lambda_max, self.spectral_panels, self.nodes_per_panel),
        )
    }
}

/// One perturbation term in a symbol file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Q2TermSpec {
    pub u: Bump,
    pub v: ExponentSpec,
}

/// Complete symbol specification file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub dimension: i64,
    pub kappa: f64,
    pub psi: ExponentSpec,
    #[serde(default)]
    pub q2_terms: Vec<Q2TermSpec>,
    #[serde(default = "default_m_order")]
    pub m_order: usize,
    #[serde(default)]
    pub grids: GridSpec,
}

fn default_m_order() -> usize {
    6
}

impl SymbolSpec {
    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn build_symbol(&self, space: &SpaceModel, sgrid: &SpectralGrid) -> Result<GangolliSymbol> {
        let psi = self.psi.build(space)?;
        let terms = self
            .q2_terms
            .iter()
            .map(|t| Ok((t.u.clone(), t.v.build(space)?)))
            .collect::<Result<Vec<_>>>()?;
        GangolliSymbol::new(self.kappa, psi, terms, self.m_order, sgrid)
    }
}

/// Bare exponent specification file (for `evolve --psi`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiSpec {
    pub dimension: i64,
    pub psi: ExponentSpec,
    #[serde(default)]
    pub grids: GridSpec,
}

impl PsiSpec {
    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let u = Bump::new(1.3, 1.5).unwrap();
        let h = 1e-5;
        for k in 1..=6usize {
            for &r in &[0.2, 0.7, 1.1, 1.4] {
                let fd = (u.deriv(k - 1, r + h).unwrap() - u.deriv(k - 1, r - h).unwrap())
                    / (2.0 * h);
                let exact = u.deriv(k, r).unwrap();
                let scale = exact.abs().max(1.0);
                assert_abs_diff_eq!(fd, exact, epsilon = 1e-5 * scale);
            }
        }
        // Smooth vanishing outside the support.
        assert_eq!(u.eval(1.5), 0.0);
        assert_eq!(u.deriv(3, 1.6).unwrap(), 0.0);
        assert!(u.deriv(99, 0.5).is_err());
    }

    #[test]
    fn bump_numerator_first_orders() {
        // N_1 = -2x, N_2 = 6x^4 + 4x^3 - 4x^2 - 4x + 2... check against a
        // hand derivative of g' = -2x g /(x^2-1)^2 at a point instead.
        let u = Bump::new(1.0, 1.0).unwrap();
        let x: f64 = 0.4;
        let q = x * x - 1.0;
        let g = (1.0 / q).exp();
        let want = -2.0 * x * g / (q * q);
        assert_relative_eq!(u.deriv(1, x).unwrap(), want, epsilon = 1e-13);
    }

    fn sgrid() -> std::sync::Arc<SpectralGrid> {
        SpectralGrid::composite_gl(28.0, 80, 8)
    }

    #[test]
    fn a1_on_section5_class() {
        let s2 = SpaceModel::new(2).unwrap();
        let bm = GangolliExponent::brownian(&s2);
        let g = sgrid();
        let kappa = 3.0;
        let sym = GangolliSymbol::new(
            kappa,
            bm.clone(),
            vec![(Bump::new(0.5, 1.5).unwrap(), bm.clone())],
            6,
            &g,
        )
        .unwrap();
        let rep = audit_a1(&sym, &bm, &g);
        assert!(rep.pass);
        let fit = bm.fit_growth_constants(&g);
        assert!(rep.c0 >= kappa / 2.0 * fit.c_low.min(1.0) - 1e-12);
        // Homogeneity: doubling kappa doubles c0.
        let sym2 = GangolliSymbol::constant_coefficient(2.0 * kappa, bm.clone(), 6);
        let rep2 = audit_a1(&sym2, &bm, &g);
        assert_relative_eq!(rep2.c0, 2.0 * rep.c0, epsilon = 1e-12);
    }

    #[test]
    fn a1_rejects_constant_q1() {
        let s2 = SpaceModel::new(2).unwrap();
        let bm = GangolliExponent::brownian(&s2);
        let kill = GangolliExponent::from_characteristics(&s2, 0.0, 0.7, None).unwrap();
        let sym = GangolliSymbol::constant_coefficient(1.0, kill, 6);
        let rep = audit_a1(&sym, &bm, &sgrid());
        assert!(!rep.pass);
        assert!(!rep.tail_ok);
    }

    #[test]
    fn symbol_validation() {
        let s2 = SpaceModel::new(2).unwrap();
        let bm = GangolliExponent::brownian(&s2);
        let g = sgrid();
        assert!(GangolliSymbol::new(1.0, bm.clone(), vec![], 5, &g).is_err());
        assert!(GangolliSymbol::new(-1.0, bm.clone(), vec![], 6, &g).is_err());
        // v growing faster than psi is refused.
        let st = GangolliExponent::stable(&s2, 1.0).unwrap();
        let grew = GangolliSymbol::new(
            1.0,
            st,
            vec![(Bump::new(1.0, 1.0).unwrap(), bm.clone())],
            6,
            &g,
        );
        assert!(grew.is_err());
        // Valid pair carries a fitted c_v close to sup |v|/(1+psi) = 1.
        let ok = GangolliSymbol::new(
            2.0,
            bm.clone(),
            vec![(Bump::new(1.0, 1.0).unwrap(), bm)],
            6,
            &g,
        )
        .unwrap();
        assert!(ok.terms[0].c_v > 0.9 && ok.terms[0].c_v < 1.1);
    }

    #[test]
    fn symbol_spec_roundtrip() {
        let spec = SymbolSpec {
            dimension: 2,
            kappa: 4.0,
            psi: ExponentSpec::Bm,
            q2_terms: vec![Q2TermSpec {
                u: Bump::new(1.0, 1.5).unwrap(),
                v: ExponentSpec::Characteristics {
                    diffusion: 0.0,
                    kill_rate: 0.0,
                    levy_atoms: vec![(1.0, 0.5)],
                },
            }],
            m_order: 6,
            grids: GridSpec::default(),
        };
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back: SymbolSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.q2_terms.len(), 1);
        let space = SpaceModel::new(back.dimension).unwrap();
        let sym = back.build_symbol(&space, &sgrid()).unwrap();
        assert_eq!(sym.m_order, 6);
        assert_abs_diff_eq!(sym.q1(0.0), 4.0 * 0.25);
    }
}
