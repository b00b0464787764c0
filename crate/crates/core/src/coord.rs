//! Coordinatewise constructions: blocks `(S^{a_r} y^{(l)})^{1/m}` placed along
//! a subsequence of a hypercyclicity witness, and their split into `K` generators
//! with pairwise zero products.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::criteria::{self, Check, PkWitness};
use crate::element::AlgebraElement;
use crate::error::{Error, Result};
use crate::schedule::{Pairing, TargetSchedule};
use crate::seq::{root_power_block, FiniteSeq};
use crate::spaces::{Product, SpaceSpec};
use crate::weight::WeightSpec;
use crate::wide::{LogMag, WideComplex};

pub const DEFAULT_SCAN_BUDGET: u64 = 2_000_000;
pub const DEFAULT_PK_SCAN_LIMIT: u64 = 100_000;

#[derive(Clone, Debug)]
pub struct CoordConfig {
    pub space: SpaceSpec,
    pub weight: WeightSpec,
    pub targets: Vec<FiniteSeq>,
    pub rounds: u64,
    /// Number of generators `K`; 1 gives the single-generator construction.
    pub classes: u32,
    pub horizon_q: u32,
    /// Candidates examined per round before giving up.
    pub scan_budget: u64,
    pub pk_scan_limit: u64,
}

impl CoordConfig {
    pub fn new(space: SpaceSpec, weight: WeightSpec, targets: Vec<FiniteSeq>, rounds: u64) -> Self {
        Self {
            space,
            weight,
            targets,
            rounds,
            classes: 1,
            horizon_q: criteria::DEFAULT_R_MAX,
            scan_budget: DEFAULT_SCAN_BUDGET,
            pk_scan_limit: DEFAULT_PK_SCAN_LIMIT,
        }
    }
}

/// `a_r - a_{r-1} > s_{l̃}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapCheck {
    pub gap: u64,
    pub s: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordChecks {
    #[serde(rename = "A1")]
    pub a1: Check,
    /// Worst instance over `t < r`, `ν ≤ d_r`; absent for `r = 1`.
    #[serde(rename = "A2", default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<Check>,
    #[serde(rename = "A3", default, skip_serializing_if = "Option::is_none")]
    pub a3: Option<GapCheck>,
}

impl CoordChecks {
    pub fn pass(&self) -> bool {
        self.a1.pass && self.a2.is_none_or(|c| c.pass) && self.a3.is_none_or(|c| c.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordRound {
    pub r: u64,
    pub m: u32,
    pub l: u64,
    pub class: u32,
    pub target: usize,
    pub a_r: u64,
    pub block: FiniteSeq,
    pub checks: CoordChecks,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordConstruction {
    pub space: SpaceSpec,
    pub weight: WeightSpec,
    pub pairing: Pairing,
    pub schedule: TargetSchedule,
    pub pk: PkWitness,
    #[serde(rename = "partition_K")]
    pub partition_k: u32,
    pub rounds: Vec<CoordRound>,
}

fn a2_worst(
    space: &SpaceSpec,
    w: &WeightSpec,
    block: &FiniteSeq,
    prior_a: &[u64],
    d: u32,
    r: u64,
) -> Option<Check> {
    let bound = LogMag::pow2_neg(r as i64);
    let mut worst: Option<Check> = None;
    for nu in 1..=d {
        // largest shifts first: they are the ones that fail
        for &a_t in prior_a.iter().rev() {
            let terms = block
                .iter()
                .filter(|&(n, _)| n >= a_t)
                .map(|(n, c)| (n - a_t, (w.ratio(n, n - a_t) * c.powi(nu as u64)).abs()));
            let chk = Check::strict(space.seminorm_of_terms(r as u32, terms), bound);
            worst = Some(worst.map_or(chk, |c| c.worst(chk)));
            if !chk.pass {
                return worst;
            }
        }
    }
    worst
}

/// Searches `a_r` among the witness indices: A.3, then A.1, then A.2, first success.
pub fn select_ar(
    space: &SpaceSpec,
    w: &WeightSpec,
    pk: &mut PkWitness,
    schedule: &TargetSchedule,
    prior: &[CoordRound],
    r: u64,
    scan_budget: u64,
) -> Result<CoordRound> {
    let slot = Pairing::Cantor.slot(r);
    let (m, l) = (slot.m, slot.l);
    let y = schedule.target(l);
    let prev_a = prior.last().map_or(0, |p| p.a_r);
    let s_prev = prior.last().map_or(0, |p| schedule.s(p.l));
    let d = Pairing::Cantor.d(r);
    let prior_a: Vec<u64> = prior.iter().map(|p| p.a_r).collect();
    let bound = LogMag::pow2_neg(r as i64);
    // (condition, candidate, value), formatted only if the search fails
    let mut last_fail: Option<(&str, u64, LogMag)> = None;
    let mut cand = prev_a;
    for _ in 0..crate::capped(scan_budget) {
        cand = pk.next_after(space, w, cand)?;
        let a3 = (r > 1).then(|| {
            let gap = cand - prev_a;
            GapCheck {
                gap,
                s: s_prev,
                pass: gap > s_prev,
            }
        });
        if a3.is_some_and(|g| !g.pass) {
            continue;
        }
        let block = root_power_block(w, y, cand, 1, m)?;
        let a1 = Check::strict(space.seminorm_upper(r as u32, &block), bound);
        if !a1.pass {
            last_fail = Some(("A.1", cand, a1.value));
            continue;
        }
        let a2 = if r > 1 {
            a2_worst(space, w, &block, &prior_a, d, r)
        } else {
            None
        };
        if let Some(c) = a2.filter(|c| !c.pass) {
            last_fail = Some(("A.2", cand, c.value));
            continue;
        }
        return Ok(CoordRound {
            r,
            m,
            l,
            class: schedule.class(l),
            target: schedule.target_index(l),
            a_r: cand,
            block,
            checks: CoordChecks { a1, a2, a3 },
        });
    }
    Err(Error::SearchExhausted {
        scanned: crate::capped(scan_budget),
        detail: match last_fail {
            Some((cond, a, v)) => {
                format!("round {r} = ({m}, {l}): last failure {cond} at a = {a}: {v} ≥ {bound}")
            }
            None => format!("round {r} = ({m}, {l}): no candidate passed A.3"),
        },
    })
}

/// Runs rounds `1..=R`; with `classes = K > 1` the blocks are split among `K` generators.
pub fn build(cfg: &CoordConfig) -> Result<CoordConstruction> {
    if cfg.space.product() != Product::Coordinatewise {
        return Err(Error::Prerequisite(format!(
            "{} does not carry the coordinatewise product",
            cfg.space
        )));
    }
    let schedule = TargetSchedule::new(cfg.targets.clone(), cfg.classes)?;
    let horizon_n = cfg
        .targets
        .iter()
        .filter_map(FiniteSeq::max_index)
        .max()
        .unwrap_or(0);
    let mut pk = PkWitness::empty(
        horizon_n,
        cfg.horizon_q,
        true,
        crate::capped(cfg.pk_scan_limit),
    );
    let mut rounds: Vec<CoordRound> = Vec::new();
    for r in 1..=cfg.rounds {
        let round = select_ar(
            &cfg.space,
            &cfg.weight,
            &mut pk,
            &schedule,
            &rounds,
            r,
            cfg.scan_budget,
        )?;
        rounds.push(round);
    }
    // the selected indices are themselves a witness: moving an index to an
    // earlier position only loosens its tolerance and lowers its seminorm
    pk.p = rounds.iter().map(|r| r.a_r).collect();
    pk.tol = (1..=pk.p.len()).map(|k| 1.0 / k as f64).collect();
    Ok(CoordConstruction {
        space: cfg.space,
        weight: cfg.weight.clone(),
        pairing: Pairing::Cantor,
        schedule,
        pk,
        partition_k: cfg.classes,
        rounds,
    })
}

impl CoordConstruction {
    /// `x_R = Σ_r block_r` (all classes).
    pub fn generator(&self) -> FiniteSeq {
        self.rounds
            .iter()
            .fold(FiniteSeq::zero(), |acc, r| acc.add(&r.block))
    }

    /// `x^{(k)}_R`, `k = 1..=K`.
    pub fn generators(&self) -> Vec<FiniteSeq> {
        (1..=self.partition_k)
            .map(|k| {
                self.rounds
                    .iter()
                    .filter(|r| r.class == k)
                    .fold(FiniteSeq::zero(), |acc, r| acc.add(&r.block))
            })
            .collect()
    }

    pub fn all_pass(&self) -> bool {
        self.rounds.iter().all(|r| r.checks.pass())
    }

    /// Recomputes every round from the stored data: block against a fresh
    /// `root_power_block`, then A.1–A.3 and witness membership.
    pub fn recheck(&self) -> Vec<(u64, Result<CoordChecks>)> {
        let (space, w) = (&self.space, &self.weight);
        let pk_ok = criteria::check_pk_witness(space, w, &self.pk);
        let mut out = Vec::new();
        for (i, rd) in self.rounds.iter().enumerate() {
            let res = (|| -> Result<CoordChecks> {
                pk_ok
                    .as_ref()
                    .map_err(|e| Error::NoWitness(e.to_string()))?;
                let slot = Pairing::Cantor.slot(rd.r);
                if slot.m != rd.m
                    || slot.l != rd.l
                    || self.schedule.class(rd.l) != rd.class
                    || self.schedule.target_index(rd.l) != rd.target
                {
                    return Err(Error::invalid(format!(
                        "round {} does not match the pairing",
                        rd.r
                    )));
                }
                if self.pk.p.binary_search(&rd.a_r).is_err() {
                    return Err(Error::NoWitness(format!(
                        "a_{} = {} is not a witness index",
                        rd.r, rd.a_r
                    )));
                }
                let fresh = root_power_block(w, self.schedule.target(rd.l), rd.a_r, 1, rd.m)?;
                let drift = rd.block.max_rel_diff(&fresh);
                if drift > 1e-12 {
                    return Err(Error::NoWitness(format!(
                        "stored block of round {} differs from its recomputation (relative {drift:.3e})",
                        rd.r
                    )));
                }
                let bound = LogMag::pow2_neg(rd.r as i64);
                let a1 = Check::strict(space.seminorm_upper(rd.r as u32, &rd.block), bound);
                let prior_a: Vec<u64> = self.rounds[..i].iter().map(|p| p.a_r).collect();
                let a2 = if rd.r > 1 {
                    a2_worst(space, w, &rd.block, &prior_a, Pairing::Cantor.d(rd.r), rd.r)
                } else {
                    None
                };
                let a3 = (i > 0).then(|| {
                    let prev = &self.rounds[i - 1];
                    let gap = rd.a_r.saturating_sub(prev.a_r);
                    let s = self.schedule.s(prev.l);
                    GapCheck {
                        gap,
                        s,
                        pass: rd.a_r > prev.a_r && gap > s,
                    }
                });
                Ok(CoordChecks { a1, a2, a3 })
            })();
            out.push((rd.r, res));
        }
        out
    }
}

/// One `ν`-homogeneous part `Q_ν = Σ_k c_{ν,k} (x^{(k)})^ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousPart {
    pub degree: u32,
    /// `c_{ν,k}` for `k = 1..=K`.
    pub coeffs: Vec<WideComplex>,
    pub value: FiniteSeq,
}

/// Splits `z` into homogeneous parts. Mixed monomials are evaluated and must be
/// exactly zero (disjoint supports), after which they are dropped.
pub fn homogeneous_parts(
    z: &AlgebraElement,
    generators: &[FiniteSeq],
) -> Result<Vec<HomogeneousPart>> {
    let k = generators.len();
    if z.generators() > k {
        return Err(Error::invalid(format!(
            "element uses {} generators, only {k} given",
            z.generators()
        )));
    }
    let mut parts: BTreeMap<u32, Vec<WideComplex>> = BTreeMap::new();
    for (beta, c) in z.terms() {
        let active: Vec<usize> = beta
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
            .collect();
        let nu = AlgebraElement::degree_of(beta);
        if active.len() == 1 {
            let v = parts
                .entry(nu)
                .or_insert_with(|| vec![WideComplex::ZERO; k]);
            v[active[0]] = v[active[0]] + c;
            continue;
        }
        let mixed = active.iter().fold(None::<FiniteSeq>, |acc, &i| {
            let pw = generators[i].coordinatewise_power(beta[i]);
            Some(acc.map_or(pw.clone(), |a| a.coordinatewise_product(&pw)))
        });
        if let Some(n) = mixed.and_then(|x| x.min_index()) {
            return Err(Error::NoWitness(format!(
                "mixed monomial {beta:?} does not vanish: generators overlap at index {n}"
            )));
        }
    }
    Ok(parts
        .into_iter()
        .filter(|(_, cs)| cs.iter().any(|c| !c.is_zero()))
        .map(|(degree, coeffs)| {
            let value = coeffs
                .iter()
                .zip(generators)
                .fold(FiniteSeq::zero(), |acc, (&c, x)| {
                    if c.is_zero() {
                        acc
                    } else {
                        acc.add(&x.coordinatewise_power(degree).scale(c))
                    }
                });
            HomogeneousPart {
                degree,
                coeffs,
                value,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1_two() -> (SpaceSpec, WeightSpec) {
        (
            SpaceSpec::parse("l1", Some(Product::Coordinatewise)).unwrap(),
            WeightSpec::constant(WideComplex::real(2.0)).unwrap(),
        )
    }

    #[test]
    fn first_round_matches_scan_oracle() {
        let (s, w) = l1_two();
        let cfg = CoordConfig::new(s, w, vec![FiniteSeq::basis(0)], 1);
        let c = build(&cfg).unwrap();
        // smallest p with 2^{-p} < 1/2
        assert_eq!(c.rounds[0].a_r, 2);
        assert_eq!(
            c.generator(),
            FiniteSeq::monomial(2, WideComplex::real(0.25))
        );
    }

    #[test]
    fn gap_condition_forces_separation() {
        let (s, w) = l1_two();
        let targets = vec![FiniteSeq::from_reals(&[1.0, 1.0])];
        let c = build(&CoordConfig::new(s, w, targets, 6)).unwrap();
        for pair in c.rounds.windows(2) {
            assert!(pair[1].a_r > pair[0].a_r + 1);
        }
        assert!(c.all_pass());
        assert!(c.recheck().into_iter().all(|(_, r)| r.unwrap().pass()));
    }

    #[test]
    fn omega_any_large_index() {
        let s = SpaceSpec::parse("omega_coord", None).unwrap();
        let w = WeightSpec::constant(WideComplex::real(2.0)).unwrap();
        let c = build(&CoordConfig::new(s, w, vec![FiniteSeq::basis(0)], 3)).unwrap();
        for rd in &c.rounds {
            assert!(rd.a_r > rd.r);
            assert_eq!(rd.checks.a1.value, LogMag::ZERO);
        }
    }

    #[test]
    fn parts_of_elements() {
        let x1 = FiniteSeq::from_reals(&[1.0, 0.0, 2.0]);
        let x2 = FiniteSeq::monomial(1, WideComplex::real(3.0));
        let g = vec![x1.clone(), x2.clone()];
        let z = AlgebraElement::new(2, [(vec![1, 1], WideComplex::ONE)]).unwrap();
        assert!(homogeneous_parts(&z, &g).unwrap().is_empty());
        let z = AlgebraElement::new(
            2,
            [
                (vec![2, 0], WideComplex::ONE),
                (vec![1, 1], WideComplex::real(2.0)),
                (vec![0, 2], WideComplex::ONE),
            ],
        )
        .unwrap();
        let parts = homogeneous_parts(&z, &g).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(
            parts[0].value,
            x1.coordinatewise_power(2).add(&x2.coordinatewise_power(2))
        );
        let overlap = vec![x1.clone(), x1];
        assert!(homogeneous_parts(&z, &overlap).is_err());
    }
}
