//! Orbit reports against the explicit bounds of the constructions, an
//! independent expansion oracle, zero-product checks and certificate rechecks.
//!
//! Truncations: the omitted rounds `r > R` add at most `2^{-R}` to any power
//! distance, so a round whose bound is at most `2^{-R}` cannot be certified
//! from the truncation and is reported as skipped.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::cauchy::lambda::{self, LambdaMatrix};
use crate::cauchy::multi_index::tail_bound;
use crate::cauchy::{self, block, CauchyConstruction, RoundCerts};
use crate::coord::{homogeneous_parts, CoordChecks, CoordConstruction};
use crate::element::AlgebraElement;
use crate::error::{Error, Result};
use crate::schedule::Pairing;
use crate::seq::FiniteSeq;
use crate::spaces::SpaceSpec;
use crate::weight::WeightSpec;
use crate::wide::{LogMag, WideComplex};

pub const EXPANSION_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_DEGREE_CAP: u32 = 6;
pub const DEFAULT_FORM_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: u64,
    pub a: u64,
    /// Base target index; `None` when the round aims at zero.
    pub target: Option<usize>,
    /// Seminorm index.
    pub q: u32,
    pub distance: LogMag,
    pub bound: LogMag,
    pub ratio: f64,
    pub pass: bool,
    pub skipped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Whether the certificates also cover the rounds beyond the truncation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_certified: Option<bool>,
}

impl RoundReport {
    fn new(
        round: u64,
        a: u64,
        target: Option<usize>,
        q: u32,
        distance: LogMag,
        bound: LogMag,
    ) -> Self {
        let ratio = distance.ratio(bound).to_f64();
        Self {
            round,
            a,
            target,
            q,
            distance,
            bound,
            ratio: if ratio.is_finite() { ratio } else { f64::MAX },
            pass: distance < bound,
            skipped: false,
            note: None,
            tail_certified: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub applicable: usize,
    pub skipped: usize,
    pub passed: usize,
    pub max_ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub bundle_id: String,
    pub element: String,
    pub rounds: Vec<RoundReport>,
    pub summary: ReportSummary,
}

impl OrbitReport {
    fn assemble(bundle: &Bundle, element: String, rounds: Vec<RoundReport>) -> Self {
        let checked: Vec<&RoundReport> = rounds.iter().filter(|r| !r.skipped).collect();
        let summary = ReportSummary {
            applicable: checked.len(),
            skipped: rounds.len() - checked.len(),
            passed: checked.iter().filter(|r| r.pass).count(),
            max_ratio: checked.iter().map(|r| r.ratio).fold(0.0, f64::max),
            pass: checked.iter().all(|r| r.pass),
        };
        Self {
            bundle_id: bundle.id(),
            element,
            rounds,
            summary,
        }
    }

    pub fn pass(&self) -> bool {
        self.summary.pass
    }
}

fn truncation_tail(rounds: usize) -> LogMag {
    LogMag::pow2_neg(rounds as i64)
}

fn mark_truncation(rep: &mut RoundReport, tail: LogMag) {
    rep.tail_certified = Some(rep.distance + tail < rep.bound);
    if rep.bound <= tail {
        rep.skipped = true;
        rep.note = Some("bound not above the truncation tail 2^{-R}".into());
    }
}

fn distance(
    space: &SpaceSpec,
    w: &WeightSpec,
    value: &FiniteSeq,
    a: u64,
    target: &FiniteSeq,
    q: u32,
) -> LogMag {
    space.seminorm_upper(q, &value.backward_iterate(w, a).sub(target))
}

/// `‖T^{a_t} (x^{(k)})^j − y‖` over the rounds whose slot has `m = j`.
///
/// On `Λ`-scaled Cauchy bundles this is the element report of `x_k^j`.
pub fn orbit_power_report(bundle: &Bundle, j: u32, generator: usize) -> Result<OrbitReport> {
    if j == 0 {
        return Err(Error::invalid("power must be at least 1"));
    }
    let k_total = bundle.generator_count();
    if generator == 0 || generator > k_total {
        return Err(Error::invalid(format!(
            "generator x{generator} out of range 1..={k_total}"
        )));
    }
    let label = if j == 1 {
        format!("x{generator}")
    } else {
        format!("x{generator}^{j}")
    };
    match bundle {
        Bundle::Coordinatewise(c) => {
            let pw = c.generators()[generator - 1].coordinatewise_power(j);
            let tail = truncation_tail(c.rounds.len());
            let rounds = c
                .rounds
                .iter()
                .filter(|rd| rd.m == j && rd.class as usize == generator)
                .map(|rd| {
                    let q = rd.r as u32;
                    let d = distance(&c.space, &c.weight, &pw, rd.a_r, c.schedule.target(rd.l), q);
                    let mut rep = RoundReport::new(
                        rd.r,
                        rd.a_r,
                        Some(rd.target),
                        q,
                        d,
                        LogMag::pow2_neg(rd.r as i64),
                    );
                    mark_truncation(&mut rep, tail);
                    rep
                })
                .collect();
            Ok(OrbitReport::assemble(bundle, label, rounds))
        }
        Bundle::Cauchy(c) if c.generators.is_some() => {
            let mut beta = vec![0; k_total];
            beta[generator - 1] = j;
            orbit_element_report(
                bundle,
                &AlgebraElement::new(k_total, [(beta, WideComplex::ONE)])?,
            )
        }
        Bundle::Cauchy(c) => {
            let pw = c.generator_truncations()[0].cauchy_power(j);
            let tail = truncation_tail(c.rounds.len());
            let zero = FiniteSeq::zero();
            let rounds = c
                .rounds
                .iter()
                .filter(|rd| rd.m >= j)
                .map(|rd| {
                    let q = rd.r as u32;
                    let (target, y, bound) = if rd.m == j {
                        (
                            Some(rd.target),
                            &c.schedule.targets[rd.target],
                            LogMag::pow2_neg(rd.r as i64 - 1),
                        )
                    } else {
                        (None, &zero, LogMag::pow2_neg(rd.r as i64))
                    };
                    let d = distance(&c.space, &c.weight, &pw, rd.a, y, q);
                    let mut rep = RoundReport::new(rd.r, rd.a, target, q, d, bound);
                    mark_truncation(&mut rep, tail);
                    rep
                })
                .collect();
            Ok(OrbitReport::assemble(bundle, label, rounds))
        }
    }
}

/// [`orbit_element_report_with`] at the default leading-form threshold.
pub fn orbit_element_report(bundle: &Bundle, z: &AlgebraElement) -> Result<OrbitReport> {
    orbit_element_report_with(bundle, z, lambda::DEFAULT_FORM_THRESHOLD)
}

/// `‖T^{a} z − ρ y‖` against the bound of the matching construction.
pub fn orbit_element_report_with(
    bundle: &Bundle,
    z: &AlgebraElement,
    form_threshold: f64,
) -> Result<OrbitReport> {
    let k_total = bundle.generator_count();
    if z.generators() > k_total {
        return Err(Error::invalid(format!(
            "element uses x{} but the bundle has {k_total} generators",
            z.generators()
        )));
    }
    let rounds = match bundle {
        Bundle::Coordinatewise(c) => coord_element_rounds(c, z)?,
        Bundle::Cauchy(c) if c.generators.is_some() => lambda_element_rounds(c, z, form_threshold)?,
        Bundle::Cauchy(c) => cauchy_element_rounds(c, z)?,
    };
    Ok(OrbitReport::assemble(bundle, z.to_string(), rounds))
}

fn coord_element_rounds(c: &CoordConstruction, z: &AlgebraElement) -> Result<Vec<RoundReport>> {
    let gens = c.generators();
    let parts = homogeneous_parts(z, &gens)?;
    let lead = parts.first().ok_or_else(|| {
        Error::Degenerate(format!(
            "{z} vanishes on the generators: every monomial mixes disjointly supported generators"
        ))
    })?;
    let j = lead.degree;
    let kp = lead
        .coeffs
        .iter()
        .position(|c| !c.is_zero())
        .expect("parts are nonzero");
    let c0 = lead.coeffs[kp];
    let others: f64 = parts
        .iter()
        .flat_map(|p| {
            p.coeffs
                .iter()
                .enumerate()
                .map(move |(k, &c)| (p.degree, k, c))
        })
        .filter(|&(nu, k, _)| !(nu == j && k == kp))
        .map(|(_, _, c)| (c / c0).abs().to_f64())
        .sum();
    let nu_max = parts.last().expect("nonempty").degree;
    let value = z.evaluate(&c.space, &gens)?.scale(c0.recip());
    Ok(c.rounds
        .iter()
        .filter(|rd| rd.m == j && rd.class as usize == kp + 1)
        .map(|rd| {
            let q = rd.r as u32;
            let d = distance(
                &c.space,
                &c.weight,
                &value,
                rd.a_r,
                c.schedule.target(rd.l),
                q,
            );
            let bound = LogMag::from_f64(others + 2.0) * LogMag::pow2_neg(rd.r as i64);
            let mut rep = RoundReport::new(rd.r, rd.a_r, Some(rd.target), q, d, bound);
            rep.tail_certified = Some(nu_max <= Pairing::Cantor.d(rd.r + 1));
            if c0 != WideComplex::ONE {
                rep.note = Some(format!("normalized by c = {c0}"));
            }
            rep
        })
        .collect())
}

fn cauchy_element_rounds(c: &CauchyConstruction, z: &AlgebraElement) -> Result<Vec<RoundReport>> {
    if z.generators() != 1 {
        return Err(Error::invalid(
            "a single-generator bundle only admits polynomials in x1",
        ));
    }
    let m = z.max_degree();
    let cm = z.part(m).next().expect("top degree present").1;
    let others: f64 = (1..m)
        .flat_map(|mu| z.part(mu))
        .map(|(_, c)| (c / cm).abs().to_f64())
        .sum();
    let value = z
        .evaluate(&c.space, &c.generator_truncations())?
        .scale(cm.recip());
    Ok(c.rounds
        .iter()
        .filter(|rd| rd.m == m)
        .map(|rd| {
            let q = rd.r as u32;
            let d = distance(
                &c.space,
                &c.weight,
                &value,
                rd.a,
                &c.schedule.targets[rd.target],
                q,
            );
            let bound = LogMag::from_f64(others + 2.0) * LogMag::pow2_neg(rd.r as i64);
            let mut rep = RoundReport::new(rd.r, rd.a, Some(rd.target), q, d, bound);
            if cm != WideComplex::ONE {
                rep.note = Some(format!("normalized by c_{m} = {cm}"));
            }
            rep
        })
        .collect())
}

fn lambda_element_rounds(
    c: &CauchyConstruction,
    z: &AlgebraElement,
    threshold: f64,
) -> Result<Vec<RoundReport>> {
    let k = c.generators.expect("Λ-scaled bundle");
    let mut lam = LambdaMatrix::new(k)?;
    let lf = lambda::leading_form_column(z, &mut lam, threshold, DEFAULT_FORM_BUDGET)?;
    let m = z.max_degree();
    let value = z.evaluate(&c.space, &c.generator_truncations())?;
    let tails = z.tail_constants();
    let mut out = Vec::new();
    for rd in c.rounds.iter().filter(|rd| rd.m == m) {
        let Some(nu) = rd.nu else {
            return Err(Error::invalid(format!(
                "round {} of a Λ-scaled bundle has no column index",
                rd.r
            )));
        };
        if lambda::column_a_index(nu) != lf.a_index {
            continue;
        }
        if rd.lambda_column.as_ref() != Some(&lf.a) {
            return Err(Error::invalid(format!(
                "stored Λ column of round {} differs from column {nu} of Λ",
                rd.r
            )));
        }
        let q = rd.r as u32;
        let target = c.schedule.targets[rd.target].scale(lf.value);
        let d = distance(&c.space, &c.weight, &value, rd.a, &target, q);
        let bound = lf.value.abs() * LogMag::pow2_neg(rd.r as i64)
            + LogMag::from_f64(tail_bound(&tails, rd.r as u32));
        let mut rep = RoundReport::new(rd.r, rd.a, Some(rd.target), q, d, bound);
        rep.note = Some(format!("ρ = {}, column ν = {nu}", lf.value));
        out.push(rep);
    }
    Ok(out)
}

/// A polynomial in the blocks `p_1, …, p_R`, keyed by exponent vectors of length `R`.
pub type BlockPolynomial = BTreeMap<Vec<u32>, WideComplex>;

fn poly_mul(a: &BlockPolynomial, b: &BlockPolynomial) -> BlockPolynomial {
    let mut out = BlockPolynomial::new();
    for (ea, &ca) in a {
        for (eb, &cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let slot = out.entry(e).or_insert(WideComplex::ZERO);
            *slot = *slot + ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// `z(L_1, …, L_K)` with `L_k = Σ_r columns[r][k] p_r`, expanded symbolically.
/// Terms of total degree above `degree_cap` are dropped; the flag reports whether any were.
pub fn expand_in_blocks(
    z: &AlgebraElement,
    columns: &[Vec<WideComplex>],
    degree_cap: u32,
) -> (BlockPolynomial, bool) {
    let r_total = columns.len();
    let linear: Vec<BlockPolynomial> = (0..z.generators())
        .map(|k| {
            columns
                .iter()
                .enumerate()
                .filter(|(_, col)| !col[k].is_zero())
                .map(|(r, col)| {
                    let mut e = vec![0; r_total];
                    e[r] = 1;
                    (e, col[k])
                })
                .collect()
        })
        .collect();
    let one: BlockPolynomial = [(vec![0; r_total], WideComplex::ONE)].into_iter().collect();
    let mut powers: BTreeMap<(usize, u32), BlockPolynomial> = BTreeMap::new();
    let mut out = BlockPolynomial::new();
    let mut partial = false;
    for (beta, c) in z.terms() {
        if AlgebraElement::degree_of(beta) > degree_cap {
            partial = true;
            continue;
        }
        let mut acc = one.clone();
        for (k, &e) in beta.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pk = powers.entry((k, e)).or_insert_with(|| {
                let mut p = one.clone();
                for _ in 0..e {
                    p = poly_mul(&p, &linear[k]);
                }
                p
            });
            acc = poly_mul(&acc, pk);
        }
        for (alpha, d) in acc {
            let slot = out.entry(alpha).or_insert(WideComplex::ZERO);
            *slot = *slot + c * d;
        }
    }
    out.retain(|_, c| !c.is_zero());
    (out, partial)
}

/// `Σ_α d_α P^α` under the Cauchy product.
pub fn evaluate_in_blocks(poly: &BlockPolynomial, blocks: &[FiniteSeq]) -> FiniteSeq {
    let mut powers: BTreeMap<(usize, u32), FiniteSeq> = BTreeMap::new();
    let mut out = FiniteSeq::zero();
    for (alpha, &d) in poly {
        let mut acc: Option<FiniteSeq> = None;
        for (r, &e) in alpha.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pw = powers
                .entry((r, e))
                .or_insert_with(|| blocks[r].cauchy_power(e))
                .clone();
            acc = Some(match acc {
                None => pw,
                Some(a) => a.cauchy_product(&pw),
            });
        }
        if let Some(a) = acc {
            out = out.add(&a.scale(d));
        }
    }
    out
}

fn modulus(c: WideComplex) -> WideComplex {
    if c.is_zero() {
        c
    } else {
        WideComplex::from_polar_ln(c.ln_abs(), 0.0)
    }
}

fn abs_seq(x: &FiniteSeq) -> FiniteSeq {
    FiniteSeq::from_pairs(x.iter().map(|(n, c)| (n, modulus(c))))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingCheck {
    pub round: u64,
    /// Coefficient of `p_r^m` in the expansion.
    pub coefficient: WideComplex,
    /// `Σ_{|β|=m} c_β λ_{·,ν_r}^β`.
    pub form_value: WideComplex,
    pub rel_diff: f64,
    /// Whether the round's column is the one selected for the leading form.
    pub is_rho: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub bundle_id: String,
    pub element: String,
    pub degree_cap: u32,
    pub partial: bool,
    pub monomials: usize,
    /// Largest `|brute − expanded|` per coefficient, relative to the modulus majorant there.
    pub max_rel_diff: f64,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<WideComplex>,
    pub leading: Vec<LeadingCheck>,
    pub pass: bool,
}

/// Substitutes the truncated generators into `z` by repeated Cauchy products and
/// compares, coefficient by coefficient, with the expansion in the blocks `p_r`.
pub fn expansion_oracle(
    bundle: &Bundle,
    z: &AlgebraElement,
    degree_cap: u32,
) -> Result<ExpansionReport> {
    let Bundle::Cauchy(c) = bundle else {
        return Err(Error::invalid(
            "the expansion oracle applies to Cauchy bundles",
        ));
    };
    let k = c.generators.unwrap_or(1);
    if z.generators() > k {
        return Err(Error::invalid(format!(
            "element uses x{} but the bundle has {k} generators",
            z.generators()
        )));
    }
    let columns: Vec<Vec<WideComplex>> = c
        .rounds
        .iter()
        .map(|rd| {
            rd.lambda_column
                .clone()
                .unwrap_or_else(|| vec![WideComplex::ONE; k])
        })
        .collect();
    let blocks: Vec<FiniteSeq> = c.rounds.iter().map(|rd| rd.p.clone()).collect();
    let (poly, partial) = expand_in_blocks(z, &columns, degree_cap);

    let kept: Vec<(Vec<u32>, WideComplex)> = z
        .terms()
        .filter(|(b, _)| AlgebraElement::degree_of(b) <= degree_cap)
        .map(|(b, c)| (b.clone(), c))
        .collect();
    let (max_rel_diff, leading, rho) = if kept.is_empty() {
        (0.0, Vec::new(), None)
    } else {
        let zc = AlgebraElement::new(z.generators(), kept.iter().cloned())?;
        let gens = c.generator_truncations();
        let brute = zc.evaluate(&c.space, &gens)?;
        let expanded = evaluate_in_blocks(&poly, &blocks);
        // rounding in either evaluation is relative to the modulus majorant
        let z_abs = AlgebraElement::new(
            zc.generators(),
            kept.iter().map(|(b, c)| (b.clone(), modulus(*c))),
        )?;
        let abs_gens: Vec<FiniteSeq> = (0..k)
            .map(|i| {
                c.rounds
                    .iter()
                    .zip(&columns)
                    .fold(FiniteSeq::zero(), |acc, (rd, col)| {
                        acc.add(&abs_seq(&rd.p).scale(modulus(col[i])))
                    })
            })
            .collect();
        let majorant = z_abs.evaluate(&c.space, &abs_gens)?;
        let diff = brute.sub(&expanded);
        let worst = diff
            .iter()
            .map(|(n, d)| {
                let m = majorant.get(n);
                if m.is_zero() {
                    f64::INFINITY
                } else {
                    (d.ln_abs() - m.ln_abs()).exp()
                }
            })
            .fold(0.0, f64::max);

        let m = zc.max_degree();
        let rho_info = match c.generators {
            Some(kk) => {
                let mut lam = LambdaMatrix::new(kk)?;
                lambda::leading_form_column(
                    &zc,
                    &mut lam,
                    lambda::DEFAULT_FORM_THRESHOLD,
                    DEFAULT_FORM_BUDGET,
                )
                .ok()
                .map(|lf| (lf.a_index, lf.value))
            }
            None => Some((0, zc.part(m).next().expect("top degree").1)),
        };
        let leading = c
            .rounds
            .iter()
            .enumerate()
            .map(|(r, rd)| {
                let mut alpha = vec![0; blocks.len()];
                alpha[r] = m;
                let coefficient = poly.get(&alpha).copied().unwrap_or(WideComplex::ZERO);
                let form_value = zc.form_value(m, &columns[r]);
                let rel_diff = WideComplex::rel_diff(coefficient, form_value);
                let is_rho = match (c.generators, rd.nu, rho_info) {
                    (Some(_), Some(nu), Some((idx, _))) => lambda::column_a_index(nu) == idx,
                    (None, _, Some(_)) => true,
                    _ => false,
                };
                LeadingCheck {
                    round: rd.r,
                    coefficient,
                    form_value,
                    rel_diff,
                    is_rho,
                    pass: rel_diff <= EXPANSION_TOLERANCE,
                }
            })
            .collect();
        (worst, leading, rho_info.map(|(_, v)| v))
    };
    let pass = max_rel_diff <= EXPANSION_TOLERANCE && leading.iter().all(|l: &LeadingCheck| l.pass);
    Ok(ExpansionReport {
        bundle_id: bundle.id(),
        element: z.to_string(),
        degree_cap,
        partial,
        monomials: poly.len(),
        max_rel_diff,
        tol: EXPANSION_TOLERANCE,
        rho,
        leading,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    /// 1-based generator indices.
    pub pair: (usize, usize),
    /// Size of the support of the coordinatewise product.
    pub support: usize,
    /// Smallest index where both generators are nonzero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<u64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroProductReport {
    pub bundle_id: String,
    pub generators: usize,
    pub pairs: Vec<PairCheck>,
    pub pass: bool,
}

/// Pairwise coordinatewise products, each required to be exactly zero.
pub fn zero_product_pairs(generators: &[FiniteSeq]) -> Vec<PairCheck> {
    let mut out = Vec::new();
    for i in 0..generators.len() {
        for j in i + 1..generators.len() {
            let prod = generators[i].coordinatewise_product(&generators[j]);
            out.push(PairCheck {
                pair: (i + 1, j + 1),
                support: prod.len(),
                witness: prod.min_index(),
                pass: prod.is_zero(),
            });
        }
    }
    out
}

pub fn zero_product_report(bundle: &Bundle) -> Result<ZeroProductReport> {
    let Bundle::Coordinatewise(c) = bundle else {
        return Err(Error::invalid(
            "zero products are a property of coordinatewise bundles",
        ));
    };
    let gens = c.generators();
    let pairs = zero_product_pairs(&gens);
    Ok(ZeroProductReport {
        bundle_id: bundle.id(),
        generators: gens.len(),
        pass: pairs.iter().all(|p| p.pass),
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRound {
    pub round: u64,
    pub pass: bool,
    /// Names of the failing certificates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub bundle_id: String,
    pub rounds: Vec<CertificateRound>,
    pub pass: bool,
}

fn coord_failures(c: &CoordChecks) -> Vec<String> {
    let mut f = Vec::new();
    if !c.a1.pass {
        f.push("A1".into());
    }
    if c.a2.is_some_and(|x| !x.pass) {
        f.push("A2".into());
    }
    if c.a3.is_some_and(|x| !x.pass) {
        f.push("A3".into());
    }
    f
}

fn cauchy_failures(c: &RoundCerts) -> Vec<String> {
    let x = match c.family {
        cauchy::Family::D => "D",
        cauchy::Family::F => "F",
    };
    [
        ("C1".to_string(), c.c1.pass),
        ("C2".to_string(), c.c2_residual <= block::C2_TOLERANCE),
        ("C3".to_string(), c.c3.pass),
        (format!("{x}1"), c.x1.pass),
        (format!("{x}2"), c.x2.pass),
        (format!("{x}3"), c.x3.pass),
        (format!("{x}4"), c.x4.pass),
        ("separation".to_string(), c.separation.pass),
    ]
    .into_iter()
    .filter(|(_, ok)| !ok)
    .map(|(n, _)| n)
    .collect()
}

/// Recomputes every certificate from the stored rounds, ignoring the stored verdicts.
pub fn recheck_certificates(bundle: &Bundle) -> CertificateReport {
    let rounds: Vec<CertificateRound> = match bundle {
        Bundle::Coordinatewise(c) => c
            .recheck()
            .into_iter()
            .map(|(round, res)| match res {
                Ok(chk) => {
                    let failed = coord_failures(&chk);
                    CertificateRound {
                        round,
                        pass: failed.is_empty(),
                        failed,
                        error: None,
                    }
                }
                Err(e) => CertificateRound {
                    round,
                    pass: false,
                    failed: Vec::new(),
                    error: Some(e.to_string()),
                },
            })
            .collect(),
        Bundle::Cauchy(c) => cauchy::recheck(c)
            .into_iter()
            .map(|(round, res)| match res {
                Ok(chk) => {
                    let failed = cauchy_failures(&chk);
                    CertificateRound {
                        round,
                        pass: failed.is_empty(),
                        failed,
                        error: None,
                    }
                }
                Err(e) => CertificateRound {
                    round,
                    pass: false,
                    failed: Vec::new(),
                    error: Some(e.to_string()),
                },
            })
            .collect(),
    };
    CertificateReport {
        bundle_id: bundle.id(),
        pass: rounds.iter().all(|r| r.pass),
        rounds,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionRound {
    pub round: u64,
    pub m: u32,
    pub m_gamma: u64,
    /// `x^{(k)}_{mγ_r}` vanishes for every generator.
    pub generators_vanish: bool,
    /// `(p_r^m)_{mγ_r}`.
    pub power_coefficient: WideComplex,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub bundle_id: String,
    pub rounds: Vec<ObstructionRound>,
    pub pass: bool,
}

/// For every round with `m ≥ 2`: every generator vanishes at `mγ_r` while `p_r^m` does not.
pub fn non_finite_generation_witness(bundle: &Bundle) -> Result<ObstructionReport> {
    let Bundle::Cauchy(c) = bundle else {
        return Err(Error::invalid(
            "the obstruction is stated for Cauchy bundles",
        ));
    };
    let gens = c.generator_truncations();
    let rounds: Vec<ObstructionRound> = c
        .rounds
        .iter()
        .filter(|rd| rd.m >= 2)
        .map(|rd| {
            let n = rd.m as u64 * rd.gamma;
            let generators_vanish = gens.iter().all(|x| x.get(n).is_zero());
            let power_coefficient = rd.p.cauchy_power(rd.m).get(n);
            ObstructionRound {
                round: rd.r,
                m: rd.m,
                m_gamma: n,
                generators_vanish,
                power_coefficient,
                pass: generators_vanish && !power_coefficient.is_zero(),
            }
        })
        .collect();
    Ok(ObstructionReport {
        bundle_id: bundle.id(),
        pass: rounds.iter().all(|r| r.pass),
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::CauchyConfig;
    use crate::coord::CoordConfig;
    use crate::spaces::Product;

    fn targets() -> Vec<FiniteSeq> {
        vec![FiniteSeq::basis(0), FiniteSeq::from_reals(&[1.0, 1.0])]
    }

    fn coord(k: u32, rounds: u64) -> Bundle {
        let s = SpaceSpec::parse("l1", Some(Product::Coordinatewise)).unwrap();
        let w = WeightSpec::constant(WideComplex::real(2.0)).unwrap();
        let mut cfg = CoordConfig::new(s, w, targets(), rounds);
        cfg.classes = k;
        Bundle::Coordinatewise(crate::coord::build(&cfg).unwrap())
    }

    fn cauchy(k: Option<usize>, rounds: u64) -> Bundle {
        let s = SpaceSpec::parse("l1", Some(Product::Cauchy)).unwrap();
        let w = WeightSpec::constant(WideComplex::real(2.0)).unwrap();
        let mut cfg = CauchyConfig::new(s, w, targets(), rounds);
        cfg.generators = k;
        Bundle::Cauchy(cauchy::build(&cfg).unwrap())
    }

    #[test]
    fn coordinatewise_powers() {
        let b = coord(1, 6);
        let rep = orbit_power_report(&b, 1, 1).unwrap();
        assert!(rep.pass() && rep.summary.applicable > 0);
        assert!(orbit_power_report(&b, 9, 1).unwrap().rounds.is_empty());
        let z = AlgebraElement::generator(1, 1).unwrap();
        let el = orbit_element_report(&b, &z).unwrap();
        assert_eq!(
            el.rounds.iter().map(|r| r.distance).collect::<Vec<_>>(),
            rep.rounds.iter().map(|r| r.distance).collect::<Vec<_>>()
        );
    }

    #[test]
    fn cauchy_powers_and_obstruction() {
        let b = cauchy(None, 5);
        for j in 1..=3 {
            assert!(orbit_power_report(&b, j, 1).unwrap().pass(), "j = {j}");
        }
        assert!(non_finite_generation_witness(&b).unwrap().pass);
        let z =
            AlgebraElement::powers([(1, WideComplex::ONE), (2, WideComplex::real(0.5))]).unwrap();
        let ex = expansion_oracle(&b, &z, DEFAULT_DEGREE_CAP).unwrap();
        assert!(ex.pass && !ex.partial, "{ex:?}");
    }

    #[test]
    fn mixed_products_vanish() {
        let b = coord(2, 6);
        assert!(zero_product_report(&b).unwrap().pass);
        let z = AlgebraElement::new(2, [(vec![1, 1], WideComplex::ONE)]).unwrap();
        assert!(matches!(
            orbit_element_report(&b, &z),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn binomial_expansion() {
        let cols = vec![vec![WideComplex::ONE]; 2];
        let z = AlgebraElement::powers([(2, WideComplex::ONE)]).unwrap();
        let (poly, partial) = expand_in_blocks(&z, &cols, 4);
        assert!(!partial);
        let want: BlockPolynomial = [
            (vec![2, 0], WideComplex::ONE),
            (vec![1, 1], WideComplex::real(2.0)),
            (vec![0, 2], WideComplex::ONE),
        ]
        .into_iter()
        .collect();
        assert_eq!(poly, want);
        assert!(expand_in_blocks(&z, &cols, 1).1);
    }
}
