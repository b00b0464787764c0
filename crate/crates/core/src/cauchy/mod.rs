//! Cauchy-product constructions: a single generator whose algebra is hypercyclic,
//! and `K` generators `x^{(k)} = Σ_r λ_{k,ν_r} p_r` spanning a non-finitely generated one.

pub mod block;
pub mod lambda;
pub mod multi_index;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::criteria::Check;
use crate::error::{Error, Result};
use crate::schedule::{Pairing, Slot, TargetSchedule};
use crate::seq::FiniteSeq;
use crate::spaces::SpaceSpec;
use crate::weight::WeightSpec;
use crate::wide::{LogMag, WideComplex};

use self::block::{BlockRequest, BlockSolve};
use self::lambda::LambdaMatrix;

pub const DEFAULT_TIGHTEN_BUDGET: u32 = 200;

/// Which tail condition the rounds certify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Multinomially weighted sums over `I_{μ,r}` (single generator).
    D,
    /// Each `P^α` separately (`Λ`-scaled generators).
    F,
}

#[derive(Clone, Debug)]
pub struct CauchyConfig {
    pub space: SpaceSpec,
    pub weight: WeightSpec,
    pub targets: Vec<FiniteSeq>,
    pub rounds: u64,
    /// `None` for the single-generator construction, `Some(K)` for `Λ`-scaled generators.
    pub generators: Option<usize>,
    pub block_budget: u64,
    pub tighten_budget: u32,
}

impl CauchyConfig {
    pub fn new(space: SpaceSpec, weight: WeightSpec, targets: Vec<FiniteSeq>, rounds: u64) -> Self {
        Self {
            space,
            weight,
            targets,
            rounds,
            generators: None,
            block_budget: block::DEFAULT_BLOCK_BUDGET,
            tighten_budget: DEFAULT_TIGHTEN_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct D2Record {
    /// Largest index of any `P^α` that `T^{a_r}` must annihilate.
    pub max_index: u64,
    pub a: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub a: u64,
    pub m_gamma: u64,
    /// `η` of the following round, once it exists.
    pub next_eta: Option<u64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    /// Worst over all `(t, μ)` (family D) or `(t, μ, α)` (family F).
    pub worst: Check,
    /// `(t, μ)` of the worst instance.
    pub at: Option<(u64, u32)>,
    pub instances: u64,
    pub pass: bool,
}

/// Round certificates; `x1..x4` serialize as `D1..D4` or `F1..F4` by family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "CertsRepr", try_from = "CertsRepr")]
pub struct RoundCerts {
    pub family: Family,
    pub c1: Check,
    pub c2_residual: f64,
    pub c3: Check,
    pub x1: Check,
    pub x2: D2Record,
    pub x3: Check,
    pub x4: TailCheck,
    pub separation: Separation,
}

#[allow(non_snake_case)]
#[derive(Clone, Serialize, Deserialize)]
struct CertsRepr {
    family: Family,
    C1: Check,
    C2_residual: f64,
    C3: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    D1: Option<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    D2: Option<D2Record>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    D3: Option<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    D4: Option<TailCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    F1: Option<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    F2: Option<D2Record>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    F3: Option<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    F4: Option<TailCheck>,
    separation: Separation,
}

impl From<RoundCerts> for CertsRepr {
    fn from(c: RoundCerts) -> Self {
        let d = c.family == Family::D;
        CertsRepr {
            family: c.family,
            C1: c.c1,
            C2_residual: c.c2_residual,
            C3: c.c3,
            D1: d.then_some(c.x1),
            D2: d.then(|| c.x2.clone()),
            D3: d.then_some(c.x3),
            D4: d.then(|| c.x4.clone()),
            F1: (!d).then_some(c.x1),
            F2: (!d).then(|| c.x2.clone()),
            F3: (!d).then_some(c.x3),
            F4: (!d).then_some(c.x4),
            separation: c.separation,
        }
    }
}

impl TryFrom<CertsRepr> for RoundCerts {
    type Error = String;

    fn try_from(r: CertsRepr) -> std::result::Result<Self, String> {
        let missing = || format!("certificate block for family {:?} is incomplete", r.family);
        let (x1, x2, x3, x4) = match r.family {
            Family::D => (r.D1, r.D2.clone(), r.D3, r.D4.clone()),
            Family::F => (r.F1, r.F2.clone(), r.F3, r.F4.clone()),
        };
        Ok(RoundCerts {
            family: r.family,
            c1: r.C1,
            c2_residual: r.C2_residual,
            c3: r.C3,
            x1: x1.ok_or_else(missing)?,
            x2: x2.ok_or_else(missing)?,
            x3: x3.ok_or_else(missing)?,
            x4: x4.ok_or_else(missing)?,
            separation: r.separation,
        })
    }
}

impl RoundCerts {
    pub fn pass(&self) -> bool {
        self.c1.pass
            && self.c2_residual <= block::C2_TOLERANCE
            && self.c3.pass
            && self.x1.pass
            && self.x2.pass
            && self.x3.pass
            && self.x4.pass
            && self.separation.pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyRound {
    pub r: u64,
    pub m: u32,
    pub l: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<u64>,
    pub target: usize,
    pub eta: u64,
    pub gamma: u64,
    pub a: u64,
    pub b: WideComplex,
    pub c: Vec<WideComplex>,
    pub p: FiniteSeq,
    /// C.1 seminorm index and tolerance after tightening.
    pub rho: u32,
    pub eps: LogMag,
    pub tightenings: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_column: Option<Vec<WideComplex>>,
    pub checks: RoundCerts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyConstruction {
    pub space: SpaceSpec,
    pub weight: WeightSpec,
    pub pairing: Pairing,
    pub schedule: TargetSchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<usize>,
    pub rounds: Vec<CauchyRound>,
}

impl CauchyConstruction {
    pub fn family(&self) -> Family {
        if self.generators.is_some() {
            Family::F
        } else {
            Family::D
        }
    }

    /// `x_R = Σ p_r`, or `x^{(k)} = Σ λ_{k,ν_r} p_r` for every `k`.
    pub fn generator_truncations(&self) -> Vec<FiniteSeq> {
        match self.generators {
            None => vec![self
                .rounds
                .iter()
                .fold(FiniteSeq::zero(), |acc, r| acc.add(&r.p))],
            Some(k) => (0..k)
                .map(|i| {
                    self.rounds.iter().fold(FiniteSeq::zero(), |acc, r| {
                        let lam = r.lambda_column.as_ref().map_or(WideComplex::ONE, |c| c[i]);
                        acc.add(&r.p.scale(lam))
                    })
                })
                .collect(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rounds.iter().all(|r| r.checks.pass())
    }
}

fn max_idx(p: &FiniteSeq) -> u64 {
    p.max_index().unwrap_or(0)
}

/// D.2 / F.2 bookkeeping: the largest index over the listed `P^α`, by literal enumeration.
pub fn x2_record(ps_max: &[u64], m: u32, a: u64) -> D2Record {
    let r = ps_max.len() as u32;
    let mut worst = 0u64;
    let idx = |alpha: &[u32]| {
        alpha
            .iter()
            .zip(ps_max)
            .map(|(&e, &mx)| e as u64 * mx)
            .sum::<u64>()
    };
    for mu in 1..=m {
        let t_hi = if mu < m { r } else { r.saturating_sub(1) };
        for t in 1..=t_hi {
            for alpha in multi_index::enumerate(mu, t) {
                worst = worst.max(idx(&alpha));
            }
        }
    }
    for alpha in multi_index::enumerate(m, r) {
        if alpha[r as usize - 1] != m {
            worst = worst.max(idx(&alpha));
        }
    }
    D2Record {
        max_index: worst,
        a,
        pass: worst < a,
    }
}

/// Products of earlier blocks `p_1^{α_1} ∗ ··· ∗ p_{r-1}^{α_{r-1}}` grouped by total degree.
struct Prefix {
    by_degree: Vec<Vec<(Vec<u32>, FiniteSeq)>>,
}

impl Prefix {
    fn new(earlier: &[FiniteSeq], max_degree: u32) -> Self {
        let t = earlier.len();
        let mut by_degree = Vec::new();
        let mut cache: BTreeMap<(usize, u32), FiniteSeq> = BTreeMap::new();
        for d in 0..=max_degree {
            let mut v = Vec::new();
            for alpha in multi_index::compositions(d, t) {
                let mut acc = FiniteSeq::basis(0);
                for (i, &e) in alpha.iter().enumerate() {
                    if e > 0 {
                        let pw = cache
                            .entry((i, e))
                            .or_insert_with(|| earlier[i].cauchy_power(e))
                            .clone();
                        acc = acc.cauchy_product(&pw);
                    }
                }
                v.push((alpha, acc));
            }
            by_degree.push(v);
        }
        Self { by_degree }
    }
}

/// D.4 (`family = D`) or F.4 (`family = F`) for the newest block `p_r`.
fn tail_check(
    space: &SpaceSpec,
    w: &WeightSpec,
    family: Family,
    prefix: &Prefix,
    p_r: &FiniteSeq,
    earlier: &[(u64, u64, u32)],
    r: u64,
) -> Result<TailCheck> {
    let bound = LogMag::pow2_neg(r as i64);
    let q = r as u32;
    let mu_max = earlier.iter().map(|&(_, _, m)| m).max().unwrap_or(0);
    let mut powers = vec![FiniteSeq::basis(0)];
    for k in 1..=mu_max {
        powers.push(powers[k as usize - 1].cauchy_product(p_r));
    }
    let mut worst = Check::strict(LogMag::ZERO, bound);
    let mut at = None;
    let mut instances = 0u64;
    for &(t, a_t, m_t) in earlier {
        for mu in 1..=m_t {
            // every α ∈ I_{μ,r}: α_r = k ≥ 1, the rest of total degree μ - k
            let mut terms: Vec<(u128, FiniteSeq)> = Vec::new();
            for k in 1..=mu {
                for (alpha_p, prod) in &prefix.by_degree[(mu - k) as usize] {
                    let mut alpha = alpha_p.clone();
                    alpha.push(k);
                    let coef = match family {
                        Family::D => multi_index::multinomial(mu, &alpha)?,
                        Family::F => 1,
                    };
                    let p_alpha = prod.cauchy_product(&powers[k as usize]);
                    terms.push((coef, p_alpha.backward_iterate(w, a_t)));
                }
            }
            match family {
                Family::D => {
                    instances += 1;
                    let total =
                        LogMag::sum(terms.iter().map(|(c, x)| {
                            LogMag::from_f64(*c as f64) * space.seminorm_upper(q, x)
                        }));
                    let chk = Check::strict(total, bound);
                    if chk.ratio() >= worst.ratio() {
                        at = Some((t, mu));
                    }
                    worst = worst.worst(chk);
                }
                Family::F => {
                    for (_, x) in &terms {
                        instances += 1;
                        let chk = Check::strict(space.seminorm_upper(q, x), bound);
                        if chk.ratio() >= worst.ratio() {
                            at = Some((t, mu));
                        }
                        worst = worst.worst(chk);
                    }
                }
            }
        }
    }
    Ok(TailCheck {
        pass: worst.pass,
        worst,
        at,
        instances,
    })
}

/// Runs the inductive construction for `cfg.rounds` rounds.
pub fn build(cfg: &CauchyConfig) -> Result<CauchyConstruction> {
    block::check_prerequisites(&cfg.space, &cfg.weight)?;
    let schedule = TargetSchedule::new(cfg.targets.clone(), 1)?;
    let (pairing, family) = match cfg.generators {
        None => (Pairing::Cantor, Family::D),
        Some(0) => return Err(Error::invalid("K must be at least 1")),
        Some(_) => (Pairing::Triple, Family::F),
    };
    let mut lambda = cfg.generators.map(LambdaMatrix::new).transpose()?;
    let (space, w) = (&cfg.space, &cfg.weight);
    let mut rounds: Vec<CauchyRound> = Vec::new();

    for r in 1..=cfg.rounds {
        let Slot { m, l, nu } = pairing.slot(r);
        let y = schedule.target(l);
        let prev_a = rounds.last().map_or(1, |p| p.a);
        let prev_top = rounds.iter().map(|p| max_idx(&p.p)).max().unwrap_or(0);
        let prev_mg = rounds.last().map_or(0, |p| p.m as u64 * p.gamma);
        let n_min = prev_top.max(prev_a).max(prev_mg).max(prev_a + r) + 1;

        let earlier_ps: Vec<FiniteSeq> = rounds.iter().map(|p| p.p.clone()).collect();
        let earlier: Vec<(u64, u64, u32)> = rounds.iter().map(|p| (p.r, p.a, p.m)).collect();
        let mu_max = earlier.iter().map(|&(_, _, m)| m).max().unwrap_or(0);
        let prefix = Prefix::new(&earlier_ps, mu_max.saturating_sub(1));

        let mut req = BlockRequest {
            m,
            rho: r as u32,
            eps: LogMag::pow2_neg(r as i64),
            r: r as u32,
            eps_c3: LogMag::pow2_neg(r as i64),
            n_min,
            gamma_start: 0,
            budget: cfg.block_budget,
        };
        let mut tightenings = 0;
        let (sol, x4): (BlockSolve, TailCheck) = loop {
            let sol = block::solve_block(space, w, y, &req)?;
            let x4 = tail_check(space, w, family, &prefix, &sol.p, &earlier, r)?;
            if x4.pass {
                break (sol, x4);
            }
            tightenings += 1;
            if tightenings > cfg.tighten_budget {
                return Err(Error::SearchExhausted {
                    scanned: tightenings as u64,
                    detail: format!(
                        "round {r}: the tail condition still fails after {} tightenings (ratio {:.3e})",
                        cfg.tighten_budget,
                        x4.worst.ratio()
                    ),
                });
            }
            let ratio = x4.worst.ratio();
            let factor = if ratio.is_finite() {
                (0.5f64).min(1.0 / (2.0 * ratio))
            } else {
                0.5
            };
            req.eps = req.eps * LogMag::from_f64(factor);
            req.rho += 1;
            req.gamma_start = sol.gamma;
        };

        let bound = LogMag::pow2_neg(r as i64);
        let x1 = Check::strict(space.seminorm_upper(r as u32, &sol.p), bound);
        let mut ps_max: Vec<u64> = earlier_ps.iter().map(max_idx).collect();
        ps_max.push(max_idx(&sol.p));
        let x2 = x2_record(&ps_max, m, sol.a);
        let x3 = Check::strict(
            space.seminorm_upper(
                r as u32,
                &sol.p.cauchy_power(m).backward_iterate(w, sol.a).sub(y),
            ),
            bound,
        );
        let m_gamma = m as u64 * sol.gamma;
        if let Some(prev) = rounds.last_mut() {
            prev.checks.separation.next_eta = Some(sol.eta);
            prev.checks.separation.pass = prev.a <= prev.checks.separation.m_gamma
                && prev.checks.separation.m_gamma < sol.eta;
        }
        let lambda_column = match (&mut lambda, nu) {
            (Some(lm), Some(nu)) => Some(lm.column(nu)),
            _ => None,
        };
        let checks = RoundCerts {
            family,
            c1: sol.c1,
            c2_residual: sol.c2_residual,
            c3: sol.c3,
            x1,
            x2,
            x3,
            x4,
            separation: Separation {
                a: sol.a,
                m_gamma,
                next_eta: None,
                pass: sol.a <= m_gamma,
            },
        };
        rounds.push(CauchyRound {
            r,
            m,
            l,
            nu,
            target: schedule.target_index(l),
            eta: sol.eta,
            gamma: sol.gamma,
            a: sol.a,
            b: sol.b,
            c: sol.c,
            p: sol.p,
            rho: req.rho,
            eps: req.eps,
            tightenings,
            lambda_column,
            checks,
        });
    }
    Ok(CauchyConstruction {
        space: *space,
        weight: w.clone(),
        pairing,
        schedule,
        generators: cfg.generators,
        rounds,
    })
}

/// Recomputes every round certificate from the stored blocks alone.
pub fn recheck(c: &CauchyConstruction) -> Vec<(u64, Result<RoundCerts>)> {
    let (space, w) = (&c.space, &c.weight);
    let family = c.family();
    let mut out = Vec::new();
    for (i, rd) in c.rounds.iter().enumerate() {
        let res = (|| -> Result<RoundCerts> {
            let y = c
                .schedule
                .targets
                .get(rd.target)
                .ok_or_else(|| Error::invalid("target index out of range"))?;
            let slot = c.pairing.slot(rd.r);
            if slot.m != rd.m
                || slot.l != rd.l
                || slot.nu != rd.nu
                || c.schedule.target_index(rd.l) != rd.target
            {
                return Err(Error::invalid(format!(
                    "round {} does not match the pairing",
                    rd.r
                )));
            }
            let s = y.max_index().unwrap_or(0);
            if rd.a != rd.eta + (rd.m as u64 - 1) * rd.gamma || rd.gamma <= rd.eta + 2 * s {
                return Err(Error::invalid(format!(
                    "round {} has inconsistent (η, γ, a)",
                    rd.r
                )));
            }
            // the stored block must be exactly q + b e_γ built from c and b
            let mut rebuilt = FiniteSeq::from_pairs(
                rd.c.iter()
                    .enumerate()
                    .map(|(j, &cj)| (rd.eta + j as u64, cj)),
            );
            if rd.m > 1 {
                rebuilt.insert(rd.gamma, rd.b);
            }
            let consistency = rd.p.max_rel_diff(&rebuilt);
            let bound = LogMag::pow2_neg(rd.r as i64);
            let (c1, c2_residual, c3) = block::verify_block(
                space,
                w,
                y,
                rd.m,
                rd.eta,
                rd.gamma,
                &rd.p,
                rd.b,
                (rd.rho, rd.eps),
                (rd.r as u32, bound),
            );
            let c2_residual = c2_residual.max(consistency);
            let x1 = Check::strict(space.seminorm_upper(rd.r as u32, &rd.p), bound);
            let ps: Vec<FiniteSeq> = c.rounds[..i].iter().map(|p| p.p.clone()).collect();
            let mut ps_max: Vec<u64> = ps.iter().map(max_idx).collect();
            ps_max.push(max_idx(&rd.p));
            let x2 = x2_record(&ps_max, rd.m, rd.a);
            let x3 = Check::strict(
                space.seminorm_upper(
                    rd.r as u32,
                    &rd.p.cauchy_power(rd.m).backward_iterate(w, rd.a).sub(y),
                ),
                bound,
            );
            let earlier: Vec<(u64, u64, u32)> =
                c.rounds[..i].iter().map(|p| (p.r, p.a, p.m)).collect();
            let mu_max = earlier.iter().map(|&(_, _, m)| m).max().unwrap_or(0);
            let prefix = Prefix::new(&ps, mu_max.saturating_sub(1));
            let x4 = tail_check(space, w, family, &prefix, &rd.p, &earlier, rd.r)?;
            let m_gamma = rd.m as u64 * rd.gamma;
            let next_eta = c.rounds.get(i + 1).map(|n| n.eta);
            let separation = Separation {
                a: rd.a,
                m_gamma,
                next_eta,
                pass: rd.a <= m_gamma && next_eta.is_none_or(|e| m_gamma < e),
            };
            Ok(RoundCerts {
                family,
                c1,
                c2_residual,
                c3,
                x1,
                x2,
                x3,
                x4,
                separation,
            })
        })();
        out.push((rd.r, res));
    }
    out
}
