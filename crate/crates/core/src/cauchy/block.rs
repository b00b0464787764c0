//! The building-block solver: `p = q + b e_γ`, `q = Σ_j c_j e_{η+j}`, with
//!
//! - C.1 `‖p‖_ρ < ε`,
//! - C.2 `m q ∗ b^{m-1} e_{(m-1)γ} = F_{w^{-1}}^{η+(m-1)γ} y`,
//! - C.3 `‖B_w^{η+(m-1)γ}(b^m e_{mγ})‖_r < ε₃`.
//!
//! `b` and `c_j` come from the closed formulas; candidate `(γ, η)` pairs are
//! scanned in ascending order, screened in log space and then verified directly.

use serde::{Deserialize, Serialize};

use crate::criteria::{self, Check};
use crate::error::{Error, Result};
use crate::seq::FiniteSeq;
use crate::spaces::{SpaceId, SpaceSpec};
use crate::weight::WeightSpec;
use crate::wide::{LogMag, WideComplex};

pub const DEFAULT_BLOCK_BUDGET: u64 = 50_000_000;

/// C.2 must hold to this relative residual.
pub const C2_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockRequest {
    pub m: u32,
    /// Seminorm index of C.1.
    pub rho: u32,
    pub eps: LogMag,
    /// Seminorm index of C.3.
    pub r: u32,
    pub eps_c3: LogMag,
    pub n_min: u64,
    /// First `γ` to try; candidates below it are skipped (used to resume a scan).
    pub gamma_start: u64,
    /// Maximum number of `(γ, η)` candidates.
    pub budget: u64,
}

impl BlockRequest {
    /// The single-index form `(r, ε, r, ε)`.
    pub fn uniform(m: u32, r: u32, n_min: u64, eps: f64) -> Self {
        let eps = LogMag::from_f64(eps);
        Self {
            m,
            rho: r,
            eps,
            r,
            eps_c3: eps,
            n_min,
            gamma_start: 0,
            budget: DEFAULT_BLOCK_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSolve {
    pub m: u32,
    pub eta: u64,
    pub gamma: u64,
    pub b: WideComplex,
    pub c: Vec<WideComplex>,
    pub p: FiniteSeq,
    /// `a = η + (m-1)γ`.
    pub a: u64,
    pub rho: u32,
    pub r: u32,
    #[serde(rename = "C1")]
    pub c1: Check,
    #[serde(rename = "C2_residual")]
    pub c2_residual: f64,
    #[serde(rename = "C3")]
    pub c3: Check,
    pub scanned: u64,
}

/// `mq ∗ b^{m-1} e_{(m-1)γ}` for a stored block.
pub fn c2_left(p: &FiniteSeq, m: u32, eta: u64, gamma: u64, s: u64, b: WideComplex) -> FiniteSeq {
    let q = FiniteSeq::from_pairs(p.iter().filter(|&(n, _)| n >= eta && n <= eta + s));
    let bm1 = if m == 1 {
        WideComplex::ONE
    } else {
        b.powi((m - 1) as u64)
    };
    q.cauchy_product(&FiniteSeq::monomial((m as u64 - 1) * gamma, bm1))
        .scale(WideComplex::real(m as f64))
}

/// Directly evaluated C.1–C.3 for `p = Σ c_j e_{η+j} + b e_γ`.
#[allow(clippy::too_many_arguments)]
pub fn verify_block(
    space: &SpaceSpec,
    w: &WeightSpec,
    y: &FiniteSeq,
    m: u32,
    eta: u64,
    gamma: u64,
    p: &FiniteSeq,
    b: WideComplex,
    (rho, eps): (u32, LogMag),
    (r, eps_c3): (u32, LogMag),
) -> (Check, f64, Check) {
    let s = y.max_index().unwrap_or(0);
    let a = eta + (m as u64 - 1) * gamma;
    let c1 = Check::strict(space.seminorm_upper(rho, p), eps);
    let residual = c2_left(p, m, eta, gamma, s, b).rel_residual(&y.forward_iterate(w, a));
    let top = if b.is_zero() || m == 1 {
        FiniteSeq::zero()
    } else {
        FiniteSeq::monomial(m as u64 * gamma, b.powi(m as u64))
    };
    let c3 = Check::strict(space.seminorm_upper(r, &top.backward_iterate(w, a)), eps_c3);
    (c1, residual, c3)
}

/// Checks the solver's prerequisites: a Cauchy algebra, Property B and a mixing weight.
/// `ω` needs none of them.
pub fn check_prerequisites(space: &SpaceSpec, w: &WeightSpec) -> Result<()> {
    if !space.is_cauchy() {
        return Err(Error::Prerequisite(format!(
            "{space} does not carry the Cauchy product"
        )));
    }
    if space.id() == SpaceId::OmegaCauchy {
        return Ok(());
    }
    criteria::property_b_supported(space).map_err(|e| Error::Prerequisite(e.to_string()))?;
    let mix = criteria::check_mixing(
        space,
        w,
        criteria::DEFAULT_N_MAX,
        criteria::DEFAULT_R_MAX,
        1e-3,
    );
    if !mix.pass {
        let (n, q) = mix.failure.unwrap_or((0, 0));
        return Err(Error::Prerequisite(format!(
            "the weight {w} is not mixing on {space} at this horizon: ‖v_n^-1 e_n‖_{q} ≥ 1e-3 at n = {n}"
        )));
    }
    Ok(())
}

/// Building-block entry point: prerequisites, then [`solve_block`] with indices `(r, ε, r, ε)`.
pub fn solve_building_block(
    space: &SpaceSpec,
    w: &WeightSpec,
    y: &FiniteSeq,
    m: u32,
    r: u32,
    n_min: u64,
    eps: f64,
) -> Result<BlockSolve> {
    check_prerequisites(space, w)?;
    solve_block(space, w, y, &BlockRequest::uniform(m, r, n_min, eps))
}

struct Ctx<'a> {
    space: &'a SpaceSpec,
    w: &'a WeightSpec,
    req: &'a BlockRequest,
    /// `(j, ln|v_j y_j|)` for nonzero `y_j`.
    vy: Vec<(u64, f64)>,
    s: u64,
}

impl Ctx<'_> {
    fn le(&self, q: u32, n: u64) -> f64 {
        self.space.basis_seminorm(q, n).ln_raw()
    }

    fn lnv(&self, n: u64) -> f64 {
        self.w.ln_abs_v(n)
    }

    /// `ln b` from the closed formula, with the C.1 index playing the role of `r`.
    fn ln_b(&self, eta: u64, gamma: u64) -> f64 {
        let m = self.req.m as u64;
        let q = self.req.rho;
        let mx = (0..=self.s)
            .map(|j| (self.le(q, eta + j) - self.lnv(eta + j + (m - 1) * gamma)) / (m - 1) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let first = -self.le(q, gamma);
        let second =
            (self.lnv(gamma - eta) - self.lnv(m * gamma) - self.le(q, gamma - eta)) / m as f64;
        0.5 * (mx + first.min(second))
    }

    /// Log-space C.1 and C.3 values for a candidate.
    fn screen(&self, eta: u64, gamma: u64, ln_b: f64) -> (LogMag, LogMag) {
        let m = self.req.m as u64;
        let lnm = (m as f64).ln();
        let terms = self
            .vy
            .iter()
            .map(|&(j, lvy)| {
                (
                    eta + j,
                    LogMag::from_ln(
                        lvy - lnm - (m - 1) as f64 * ln_b - self.lnv(eta + j + (m - 1) * gamma),
                    ),
                )
            })
            .chain(std::iter::once((gamma, LogMag::from_ln(ln_b))));
        let c1 = self.space.seminorm_of_terms(self.req.rho, terms);
        let a = eta + (m - 1) * gamma;
        let c3 = LogMag::from_ln(m as f64 * ln_b + self.lnv(m * gamma) - self.lnv(m * gamma - a))
            * self.space.basis_seminorm(self.req.r, m * gamma - a);
        (c1, c3)
    }
}

fn build(
    w: &WeightSpec,
    y: &FiniteSeq,
    m: u32,
    eta: u64,
    gamma: u64,
    b: WideComplex,
) -> (Vec<WideComplex>, FiniteSeq) {
    let s = y.max_index().unwrap_or(0);
    let a_shift = (m as u64 - 1) * gamma;
    let denom = if m == 1 {
        WideComplex::ONE
    } else {
        WideComplex::real(m as f64) * b.powi((m - 1) as u64)
    };
    let c: Vec<WideComplex> = (0..=s)
        .map(|j| w.v(j) * y.get(j) / (denom * w.v(eta + j + a_shift)))
        .collect();
    let mut p = FiniteSeq::from_pairs(c.iter().enumerate().map(|(j, &cj)| (eta + j as u64, cj)));
    if m > 1 {
        p.insert(gamma, b);
    }
    (c, p)
}

/// Scans `(γ, η)` and returns the first candidate whose C.1–C.3 verify directly.
pub fn solve_block(
    space: &SpaceSpec,
    w: &WeightSpec,
    y: &FiniteSeq,
    req: &BlockRequest,
) -> Result<BlockSolve> {
    if req.m == 0 || req.rho == 0 || req.r == 0 {
        return Err(Error::invalid("m, ρ and r must be at least 1"));
    }
    let s = y
        .max_index()
        .ok_or_else(|| Error::invalid("target must be nonzero"))?;
    let budget = crate::capped(req.budget);
    let finish = |eta: u64, gamma: u64, b: WideComplex, scanned: u64| -> Option<BlockSolve> {
        let (c, p) = build(w, y, req.m, eta, gamma, b);
        let (c1, c2_residual, c3) = verify_block(
            space,
            w,
            y,
            req.m,
            eta,
            gamma,
            &p,
            b,
            (req.rho, req.eps),
            (req.r, req.eps_c3),
        );
        (c1.pass && c3.pass && c2_residual <= C2_TOLERANCE).then(|| BlockSolve {
            m: req.m,
            eta,
            gamma,
            b,
            c,
            p,
            a: eta + (req.m as u64 - 1) * gamma,
            rho: req.rho,
            r: req.r,
            c1,
            c2_residual,
            c3,
            scanned,
        })
    };

    if space.id() == SpaceId::OmegaCauchy {
        // every seminorm index below η and γ - η is blind to the block
        let eta = req.n_min.max(req.rho as u64 + 1);
        let gamma = eta + (2 * s).max(req.r as u64) + 1;
        let b = if req.m == 1 {
            WideComplex::ZERO
        } else {
            WideComplex::ONE
        };
        return finish(eta, gamma, b, 1)
            .ok_or_else(|| Error::NoWitness("ω block failed its own checks".into()));
    }

    let ctx = Ctx {
        space,
        w,
        req,
        vy: y
            .iter()
            .map(|(j, c)| (j, w.ln_abs_v(j) + c.ln_abs()))
            .collect(),
        s,
    };
    let mut scanned = 0u64;
    let mut best: Option<(f64, u64, u64)> = None;
    let mut note = |ratio: f64, eta: u64, gamma: u64| {
        if best.is_none_or(|(r, _, _)| ratio < r) {
            best = Some((ratio, eta, gamma));
        }
    };

    if req.m == 1 {
        let mut eta = req.n_min.max(req.gamma_start.saturating_sub(2 * s + 1));
        while scanned < budget {
            scanned += 1;
            let c1 = ctx.space.seminorm_of_terms(
                req.rho,
                ctx.vy
                    .iter()
                    .map(|&(j, lvy)| (eta + j, LogMag::from_ln(lvy - ctx.lnv(eta + j)))),
            );
            note(c1.ratio(req.eps).to_f64(), eta, eta + 2 * s + 1);
            if c1 < req.eps {
                if let Some(sol) = finish(eta, eta + 2 * s + 1, WideComplex::ZERO, scanned) {
                    return Ok(sol);
                }
            }
            eta += 1;
        }
    } else {
        let mut gamma = (req.n_min + 2 * s + 1).max(req.gamma_start);
        'outer: loop {
            for eta in req.n_min..gamma - 2 * s {
                if scanned >= budget {
                    break 'outer;
                }
                scanned += 1;
                let ln_b = ctx.ln_b(eta, gamma);
                let (c1, c3) = ctx.screen(eta, gamma, ln_b);
                note(
                    c1.ratio(req.eps).max(c3.ratio(req.eps_c3)).to_f64(),
                    eta,
                    gamma,
                );
                if c1 < req.eps && c3 < req.eps_c3 {
                    let b = WideComplex::from_polar_ln(ln_b, 0.0);
                    if let Some(sol) = finish(eta, gamma, b, scanned) {
                        return Ok(sol);
                    }
                }
            }
            gamma += 1;
        }
    }
    let (ratio, eta, gamma) = best.unwrap_or((f64::INFINITY, 0, 0));
    Err(Error::SearchExhausted {
        scanned,
        detail: format!(
            "no building block for m = {} with ‖p‖_{} < {} and C.3 < {}; best candidate η = {eta}, γ = {gamma} reached ratio {ratio:.3e}",
            req.m, req.rho, req.eps, req.eps_c3
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m1_closed_form() {
        let s = SpaceSpec::parse("l1", None).unwrap();
        let w = WeightSpec::constant(WideComplex::real(2.0)).unwrap();
        let y = FiniteSeq::basis(0);
        let req = BlockRequest {
            n_min: 3,
            ..BlockRequest::uniform(1, 1, 0, 0.5)
        };
        let sol = solve_block(&s, &w, &y, &req).unwrap();
        assert_eq!(sol.eta, 3);
        assert_eq!(sol.p, FiniteSeq::monomial(3, WideComplex::real(0.125)));
        assert!((sol.c1.value.to_f64() - 0.125).abs() < 1e-15);
        assert_eq!(sol.c2_residual, 0.0);
        // without the lower bound the first admissible η is 2 (1/4 < 1/2)
        let sol = solve_building_block(&s, &w, &y, 1, 1, 0, 0.5).unwrap();
        assert_eq!(sol.eta, 2);
    }

    #[test]
    fn higher_m_blocks_verify() {
        let s = SpaceSpec::parse("entire_cauchy", None).unwrap();
        let w = WeightSpec::maclane();
        let y = FiniteSeq::from_reals(&[1.0, 1.0]);
        for m in 2..=3 {
            let sol = solve_building_block(&s, &w, &y, m, 1, 0, 0.5).unwrap();
            assert!(sol.gamma > sol.eta + 2);
            assert!(sol.c1.pass && sol.c3.pass && sol.c2_residual <= 1e-12);
            let (c1, res, c3) = verify_block(
                &s,
                &w,
                &y,
                m,
                sol.eta,
                sol.gamma,
                &sol.p,
                sol.b,
                (1, LogMag::from_f64(0.5)),
                (1, LogMag::from_f64(0.5)),
            );
            assert!(c1.pass && c3.pass && res <= 1e-12);
        }
    }

    #[test]
    fn prerequisites() {
        let w = WeightSpec::constant(WideComplex::real(2.0)).unwrap();
        let y = FiniteSeq::basis(0);
        let err = solve_building_block(
            &SpaceSpec::parse("l_p:2", None).unwrap(),
            &w,
            &y,
            2,
            1,
            0,
            0.5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Prerequisite(_)));
        let one = WeightSpec::constant(WideComplex::ONE).unwrap();
        let err = solve_building_block(
            &SpaceSpec::parse("l1", None).unwrap(),
            &one,
            &y,
            2,
            1,
            0,
            0.5,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Prerequisite(_)));
        let om = SpaceSpec::parse("omega_cauchy", None).unwrap();
        let sol =
            solve_building_block(&om, &one, &FiniteSeq::from_reals(&[1.0, 2.0]), 2, 3, 0, 0.5)
                .unwrap();
        assert_eq!(sol.c1.value, LogMag::ZERO);
        assert_eq!(sol.c3.value, LogMag::ZERO);
    }
}
