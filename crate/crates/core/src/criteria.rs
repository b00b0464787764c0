//! Finite-horizon witnesses for the hypotheses on the weight and on the basis.
//!
//! Limits are replaced by explicit thresholds checked on a horizon; the
//! witnesses are self-contained and can be re-validated by the `check_*`
//! functions without repeating the search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{SpaceId, SpaceSpec};
use crate::weight::WeightSpec;
use crate::wide::LogMag;

pub const DEFAULT_N_MAX: u64 = 500;
pub const DEFAULT_R_MAX: u32 = 5;
pub const DEFAULT_M_MAX: u32 = 4;
pub const DEFAULT_BIG_M_MAX: u32 = 16;

/// Relative slack for inequalities that hold with equality in exact arithmetic.
const SLACK: f64 = 1e-12;

fn le_with_slack(lhs_ln: f64, rhs_ln: f64) -> bool {
    if lhs_ln == f64::NEG_INFINITY {
        return true;
    }
    lhs_ln <= rhs_ln + SLACK * (1.0 + lhs_ln.abs().max(rhs_ln.abs()))
}

/// A strict inequality `value < bound` with both sides recorded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    #[serde(rename = "value_ln")]
    pub value: LogMag,
    #[serde(rename = "bound_ln")]
    pub bound: LogMag,
    pub pass: bool,
}

impl Check {
    pub fn strict(value: LogMag, bound: LogMag) -> Self {
        Self {
            value,
            bound,
            pass: value < bound,
        }
    }

    /// `value / bound` as a double (0 when the value vanishes, may be `inf`).
    pub fn ratio(&self) -> f64 {
        self.value.ratio(self.bound).to_f64()
    }

    /// The check with the larger ratio.
    pub fn worst(self, other: Self) -> Self {
        if other.value.ratio(other.bound) > self.value.ratio(self.bound) {
            other
        } else {
            self
        }
    }
}

/// `‖v_n^{-1} e_n‖_q` in log form.
pub fn inv_weighted_basis(space: &SpaceSpec, w: &WeightSpec, q: u32, n: u64) -> LogMag {
    let e = space.basis_seminorm(q, n);
    if e.is_zero() {
        return LogMag::ZERO;
    }
    LogMag::from_ln(e.ln_raw() - w.ln_abs_v(n))
}

// ---------------------------------------------------------------------------
// Hypercyclicity: increasing (p_k) with v_{p_k+n}^{-1} e_{p_k+n} → 0

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PkWitness {
    pub p: Vec<u64>,
    pub horizon_n: u64,
    pub horizon_q: u32,
    /// `tol[k-1] = 1/k`.
    pub tol: Vec<f64>,
    /// Also certify `|v_{p_k+n}|^{-1} < tol_k` (the growth hypothesis of the coordinatewise constructions).
    pub growth: bool,
    /// Candidates scanned past the previous index before giving up.
    pub scan_limit: u64,
}

impl PkWitness {
    pub fn empty(horizon_n: u64, horizon_q: u32, growth: bool, scan_limit: u64) -> Self {
        Self {
            p: Vec::new(),
            horizon_n,
            horizon_q,
            tol: Vec::new(),
            growth,
            scan_limit,
        }
    }

    /// Seminorm index `q_k = min(k, horizon_q)`.
    pub fn q_k(&self, k: usize) -> u32 {
        (k as u32).min(self.horizon_q).max(1)
    }

    fn qualifies(&self, space: &SpaceSpec, w: &WeightSpec, k: usize, p: u64) -> bool {
        let tol = LogMag::from_f64(1.0 / k as f64);
        let q = self.q_k(k);
        (0..=self.horizon_n).all(|n| {
            let idx = p + n;
            inv_weighted_basis(space, w, q, idx) < tol
                && (!self.growth || LogMag::from_ln(-w.ln_abs_v(idx)) < tol)
        })
    }

    /// Appends the next index, scanning upward from the last one.
    pub fn extend_one(&mut self, space: &SpaceSpec, w: &WeightSpec) -> Result<u64> {
        let k = self.p.len() + 1;
        let start = self.p.last().map_or(1, |&p| p + 1);
        for cand in start..start.saturating_add(self.scan_limit) {
            if self.qualifies(space, w, k, cand) {
                self.p.push(cand);
                self.tol.push(1.0 / k as f64);
                return Ok(cand);
            }
        }
        Err(Error::SearchExhausted {
            scanned: self.scan_limit,
            detail: format!(
                "no p_{k} in [{start}, {}) with ‖v_(p+n)^-1 e_(p+n)‖_{} < 1/{k}; the weight likely fails the criterion at this horizon",
                start.saturating_add(self.scan_limit),
                self.q_k(k)
            ),
        })
    }

    /// Smallest witness index strictly above `min`, extending the witness as needed.
    pub fn next_after(&mut self, space: &SpaceSpec, w: &WeightSpec, min: u64) -> Result<u64> {
        let i = self.p.partition_point(|&p| p <= min);
        if let Some(&p) = self.p.get(i) {
            return Ok(p);
        }
        loop {
            let p = self.extend_one(space, w)?;
            if p > min {
                return Ok(p);
            }
        }
    }
}

pub fn find_pk_witness(
    space: &SpaceSpec,
    w: &WeightSpec,
    count: usize,
    horizon_n: u64,
    horizon_q: u32,
    growth: bool,
    scan_limit: u64,
) -> Result<PkWitness> {
    let mut wit = PkWitness::empty(horizon_n, horizon_q, growth, crate::capped(scan_limit));
    for _ in 0..count {
        wit.extend_one(space, w)?;
    }
    Ok(wit)
}

/// Re-validates every stored inequality of a [`PkWitness`].
pub fn check_pk_witness(space: &SpaceSpec, w: &WeightSpec, wit: &PkWitness) -> Result<()> {
    if wit.p.len() != wit.tol.len() {
        return Err(Error::NoWitness(
            "tolerance schedule length differs from p".into(),
        ));
    }
    for (i, &p) in wit.p.iter().enumerate() {
        let k = i + 1;
        if i > 0 && p <= wit.p[i - 1] {
            return Err(Error::NoWitness(format!("p is not increasing at k = {k}")));
        }
        if i > 0 && wit.tol[i] >= wit.tol[i - 1] {
            return Err(Error::NoWitness(format!(
                "tolerances are not decreasing at k = {k}"
            )));
        }
        if !wit.qualifies(space, w, k, p) {
            return Err(Error::NoWitness(format!(
                "p_{k} = {p} violates its tolerance"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Mixing: v_n^{-1} e_n → 0

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingThreshold {
    pub q: u32,
    /// Smallest `N` with `‖v_n^{-1} e_n‖_q < tol` for all `N ≤ n ≤ horizon_n`.
    pub threshold: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub pass: bool,
    pub tol: f64,
    pub horizon_n: u64,
    pub thresholds: Vec<MixingThreshold>,
    /// `(n, q)` with `‖v_n^{-1} e_n‖_q ≥ tol` at the end of the horizon.
    pub failure: Option<(u64, u32)>,
}

pub fn check_mixing(
    space: &SpaceSpec,
    w: &WeightSpec,
    horizon_n: u64,
    horizon_q: u32,
    tol: f64,
) -> MixingReport {
    let tol_l = LogMag::from_f64(tol);
    let mut thresholds = Vec::new();
    let mut failure = None;
    for q in 1..=horizon_q {
        let mut threshold = None;
        for n in (0..=horizon_n).rev() {
            if inv_weighted_basis(space, w, q, n) < tol_l {
                threshold = Some(n);
            } else {
                break;
            }
        }
        if threshold.is_none() && failure.is_none() {
            failure = Some((horizon_n, q));
        }
        thresholds.push(MixingThreshold { q, threshold });
    }
    MixingReport {
        pass: failure.is_none(),
        tol,
        horizon_n,
        thresholds,
        failure,
    }
}

// ---------------------------------------------------------------------------
// Property A: ‖e_n‖_r^2 ≤ C ‖e_n‖_q

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyAEntry {
    pub r: u32,
    pub q: u32,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyAWitness {
    pub space: SpaceSpec,
    pub n_max: u64,
    pub entries: Vec<PropertyAEntry>,
}

/// Closed-form `(q, C)`: bounded bases take `q = r`, the entire-function
/// families `q = r²` (since `‖e_n‖_r² = ‖e_n‖_{r²}`), and `ω` takes `q = r`
/// because `‖e_n‖_r ∈ {0, 1}`.
pub fn property_a_rule(space: &SpaceSpec, r: u32) -> Result<(u32, f64)> {
    match space.id() {
        SpaceId::EntireHadamard | SpaceId::EntireCauchy => r
            .checked_mul(r)
            .map(|q| (q, 1.0))
            .ok_or_else(|| Error::invalid(format!("seminorm index {r}² overflows"))),
        _ => Ok((r, 1.0)),
    }
}

fn check_a_pair(space: &SpaceSpec, r: u32, power: f64, q: u32, c: f64, n_max: u64) -> Result<()> {
    for n in 0..=n_max {
        let lhs = space.basis_seminorm(r, n).powf(power).ln_raw();
        let rhs = c.ln() + space.basis_seminorm(q, n).ln_raw();
        if !le_with_slack(lhs, rhs) {
            return Err(Error::NoWitness(format!(
                "‖e_{n}‖_{r}^{power} ≤ {c}·‖e_{n}‖_{q} fails on {space}"
            )));
        }
    }
    Ok(())
}

pub fn property_a_witness(space: &SpaceSpec, r_max: u32, n_max: u64) -> Result<PropertyAWitness> {
    let mut entries = Vec::new();
    for r in 1..=r_max {
        let (q, c) = property_a_rule(space, r)?;
        entries.push(PropertyAEntry { r, q, c });
    }
    let wit = PropertyAWitness {
        space: *space,
        n_max,
        entries,
    };
    check_property_a(&wit)?;
    Ok(wit)
}

pub fn check_property_a(wit: &PropertyAWitness) -> Result<()> {
    for e in &wit.entries {
        check_a_pair(&wit.space, e.r, 2.0, e.q, e.c, wit.n_max)?;
    }
    Ok(())
}

/// `(q, C)` with `‖e_n‖_r^m ≤ C ‖e_n‖_q` for `n ≤ n_max`, by repeated squaring and,
/// for `2^N ≤ m < 2^{N+1}`, the bound `‖e_n‖_r^m ≤ max{‖e_n‖_r^{2^N}, ‖e_n‖_r^{2^{N+1}}}`.
pub fn property_a_power(space: &SpaceSpec, m: u32, r: u32, n_max: u64) -> Result<(u32, f64)> {
    if m == 0 {
        return Err(Error::invalid("property_a_power needs m ≥ 1"));
    }
    // chain[i] = (q_i, C_i) with ‖e_n‖_r^{2^i} ≤ C_i ‖e_n‖_{q_i}
    let mut chain = vec![(r, 1.0f64)];
    let n_top = 31 - m.leading_zeros();
    let steps = if m.is_power_of_two() {
        n_top
    } else {
        n_top + 1
    };
    for _ in 0..steps {
        let (q, c) = *chain.last().expect("nonempty");
        let (q2, c2) = property_a_rule(space, q)?;
        // ‖e‖_r^{2^{i+1}} ≤ (C_i ‖e‖_q)^2 ≤ C_i^2 C' ‖e‖_{q'}
        chain.push((q2, c * c * c2));
    }
    let result = if m.is_power_of_two() {
        chain[n_top as usize]
    } else {
        let lo = chain[n_top as usize];
        let hi = chain[n_top as usize + 1];
        (hi.0.max(lo.0), lo.1.max(hi.1))
    };
    check_a_pair(space, r, m as f64, result.0, result.1, n_max)?;
    Ok(result)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootDecayReport {
    pub pass: bool,
    pub m_max: u32,
    pub r_max: u32,
    pub tol: f64,
    /// `(m, r, k, n)` of the first violated inequality.
    pub failure: Option<(u32, u32, usize, u64)>,
    /// Largest `‖v_{p_K+n}^{-1/m} e_{p_K+n}‖_r` at the last witness index.
    pub final_max: LogMag,
}

/// Follows the chain `‖v^{-1/m} e‖_r = (|v|^{-1}‖e‖_r^m)^{1/m} ≤ (C ‖v^{-1} e‖_q)^{1/m}`
/// at every witness index and requires the value at the last index to be below `tol`.
pub fn root_decay_check(
    space: &SpaceSpec,
    w: &WeightSpec,
    pk: &PkWitness,
    m_max: u32,
    r_max: u32,
    tol: f64,
) -> Result<RootDecayReport> {
    let tol_l = LogMag::from_f64(tol);
    let n_max = pk.p.last().copied().unwrap_or(0) + pk.horizon_n;
    let mut failure = None;
    let mut final_max = LogMag::ZERO;
    'outer: for m in 1..=m_max {
        for r in 1..=r_max {
            let (q, c) = property_a_power(space, m, r, n_max)?;
            for (i, &p) in pk.p.iter().enumerate() {
                for n in 0..=pk.horizon_n {
                    let idx = p + n;
                    let e = space.basis_seminorm(r, idx);
                    let value = if e.is_zero() {
                        LogMag::ZERO
                    } else {
                        LogMag::from_ln(e.ln_raw() - w.ln_abs_v(idx) / m as f64)
                    };
                    let chain = (LogMag::from_f64(c) * inv_weighted_basis(space, w, q, idx))
                        .powf(1.0 / m as f64);
                    if !le_with_slack(value.ln_raw(), chain.ln_raw()) {
                        failure = Some((m, r, i + 1, n));
                        break 'outer;
                    }
                    if i + 1 == pk.p.len() {
                        final_max = final_max.max(value);
                        if value >= tol_l {
                            failure = Some((m, r, i + 1, n));
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    Ok(RootDecayReport {
        pass: failure.is_none() && !pk.p.is_empty(),
        m_max,
        r_max,
        tol,
        failure,
        final_max,
    })
}

// ---------------------------------------------------------------------------
// Property B

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondII {
    pub r: u32,
    pub q: u32,
    pub c1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondIIIt {
    pub t: u32,
    pub tau: u32,
    pub c2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondIII {
    pub m: u32,
    #[serde(rename = "M")]
    pub big_m: u32,
    pub r: u32,
    pub rho: u32,
    pub per_t: Vec<CondIIIt>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyBWitness {
    pub space: SpaceSpec,
    pub n_max: u64,
    pub cond_i: u32,
    pub cond_ii: Vec<CondII>,
    pub cond_iii: Vec<CondIII>,
}

#[derive(Clone, Copy, Debug)]
pub struct PropertyBRanges {
    pub m_max: u32,
    pub big_m_max: u32,
    pub r_max: u32,
    pub t_max: u32,
    pub n_max: u64,
}

impl Default for PropertyBRanges {
    fn default() -> Self {
        Self {
            m_max: DEFAULT_M_MAX,
            big_m_max: DEFAULT_BIG_M_MAX,
            r_max: DEFAULT_R_MAX,
            t_max: DEFAULT_R_MAX,
            n_max: DEFAULT_N_MAX,
        }
    }
}

/// Fails for spaces without Property B; `ω` fails condition (i).
pub fn property_b_supported(space: &SpaceSpec) -> Result<()> {
    match space.id() {
        SpaceId::L1 | SpaceId::EntireCauchy => Ok(()),
        SpaceId::OmegaCauchy | SpaceId::OmegaCoord => Err(Error::PropertyBCondition {
            space: space.to_string(),
        }),
        _ => Err(Error::invalid(format!(
            "Property B is defined here only for Cauchy algebras, not {space}"
        ))),
    }
}

/// Closed-form witness: `ℓ^1` takes every constant equal to 1; for `‖e_n‖_q = q^n`,
/// (ii) holds with `(q, C_1) = (r, 1)` and (iii) with `ρ = r`, `τ = t^m`, `C_2 = 1`
/// because `t^{mn} r^{n-k} ≤ t^{mn} r^{mn-k}`.
pub fn property_b_witness(space: &SpaceSpec, ranges: PropertyBRanges) -> Result<PropertyBWitness> {
    property_b_supported(space)?;
    let entire = space.id() == SpaceId::EntireCauchy;
    let cond_ii = (1..=ranges.r_max)
        .map(|r| CondII { r, q: r, c1: 1.0 })
        .collect();
    let mut cond_iii = Vec::new();
    for m in 2..=ranges.m_max {
        for big_m in 1..=ranges.big_m_max {
            for r in 1..=ranges.r_max {
                let per_t = (1..=ranges.t_max)
                    .map(|t| {
                        let tau = if entire { t.pow(m) } else { 1 };
                        CondIIIt { t, tau, c2: 1.0 }
                    })
                    .collect();
                cond_iii.push(CondIII {
                    m,
                    big_m,
                    r,
                    rho: if entire { r } else { 1 },
                    per_t,
                });
            }
        }
    }
    let wit = PropertyBWitness {
        space: *space,
        n_max: ranges.n_max,
        cond_i: 1,
        cond_ii,
        cond_iii,
    };
    check_property_b(&wit)?;
    Ok(wit)
}

/// Re-validates all three conditions on the witness horizon.
pub fn check_property_b(wit: &PropertyBWitness) -> Result<()> {
    let s = &wit.space;
    let e = |q: u32, n: u64| s.basis_seminorm(q, n).ln_raw();
    if let Some(n) = (0..=wit.n_max).find(|&n| s.basis_seminorm(wit.cond_i, n).is_zero()) {
        let _ = n;
        return Err(Error::PropertyBCondition {
            space: s.to_string(),
        });
    }
    for c in &wit.cond_ii {
        for n in 0..=wit.n_max {
            for k in 0..=wit.n_max {
                if !le_with_slack(e(c.r, n) + e(c.r, k), c.c1.ln() + e(c.q, n + k)) {
                    return Err(Error::NoWitness(format!(
                        "(ii) fails for r = {}, q = {}, C1 = {} at n = {n}, k = {k}",
                        c.r, c.q, c.c1
                    )));
                }
            }
        }
    }
    for c in &wit.cond_iii {
        for ct in &c.per_t {
            check_cond_iii(s, c.m, c.big_m, c.r, c.rho, ct, wit.n_max)?;
        }
    }
    Ok(())
}

/// `‖e_{mn}‖_t ‖e_{n-k}‖_r ≤ C_2 ‖e_{mn}‖_τ^{1/m} ‖e_{mn-k}‖_ρ` for `0 ≤ k ≤ M ≤ n ≤ n_max`.
pub fn check_cond_iii(
    s: &SpaceSpec,
    m: u32,
    big_m: u32,
    r: u32,
    rho: u32,
    ct: &CondIIIt,
    n_max: u64,
) -> Result<()> {
    let e = |q: u32, n: u64| s.basis_seminorm(q, n).ln_raw();
    let mm = m as u64;
    for n in big_m as u64..=n_max {
        for k in 0..=big_m as u64 {
            let lhs = e(ct.t, mm * n) + e(r, n - k);
            let rhs = ct.c2.ln() + e(ct.tau, mm * n) / m as f64 + e(rho, mm * n - k);
            if !le_with_slack(lhs, rhs) {
                return Err(Error::NoWitness(format!(
                    "(iii) fails for m = {m}, M = {big_m}, r = {r}, ρ = {rho}, t = {}, τ = {}, C2 = {} at n = {n}, k = {k}",
                    ct.t, ct.tau, ct.c2
                )));
            }
        }
    }
    Ok(())
}
