//! The sets `I_{μ,t} = {α ∈ ℕ₀^t : |α| = μ, α_t > 0}`, multinomials and the tail majorant.

use crate::error::{Error, Result};

/// `C(n, k)` exactly.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `card(I_{μ,t}) = C(μ+t-2, t-1)`.
pub fn card(mu: u32, t: u32) -> u128 {
    if mu == 0 || t == 0 {
        return 0;
    }
    binomial((mu + t - 2) as u64, (t - 1) as u64)
}

/// All `α ∈ I_{μ,t}` in descending lexicographic order, e.g. `I_{2,2} = [(1,1), (0,2)]`.
pub fn enumerate(mu: u32, t: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if mu == 0 || t == 0 {
        return out;
    }
    let mut cur = vec![0u32; t as usize];
    fill(&mut cur, 0, mu, &mut out);
    out
}

fn fill(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    let last = cur.len() - 1;
    if pos == last {
        if left > 0 {
            cur[pos] = left;
            out.push(cur.clone());
        }
        return;
    }
    // the last slot needs at least one unit
    for v in (0..left).rev() {
        cur[pos] = v;
        fill(cur, pos + 1, left - v, out);
    }
    cur[pos] = 0;
}

/// All `α ∈ ℕ₀^t` with `|α| = d` (no positivity constraint), descending lexicographic.
pub fn compositions(d: u32, t: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if t == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0u32; t];
    comp(&mut cur, 0, d, &mut out);
    out
}

fn comp(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if pos == cur.len() - 1 {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        comp(cur, pos + 1, left - v, out);
    }
    cur[pos] = 0;
}

/// `μ! / (α_1! ··· α_t!)` as a product of binomials.
pub fn multinomial(mu: u32, alpha: &[u32]) -> Result<u128> {
    let total: u32 = alpha.iter().sum();
    if total != mu {
        return Err(Error::invalid(format!(
            "|α| = {total} differs from μ = {mu}"
        )));
    }
    let mut acc: u128 = 1;
    let mut used = 0u64;
    for &a in alpha {
        used += a as u64;
        acc = acc
            .checked_mul(binomial(used, a as u64))
            .ok_or_else(|| Error::invalid("multinomial overflows u128"))?;
    }
    Ok(acc)
}

/// `Σ_{μ ≤ μ_max} Σ_{t > r} card(I_{μ,t}) C_μ t^μ 2^{-t}`, with `c_mu[μ-1] = C_μ`.
///
/// Each inner series is summed past its peak until a term drops below `1e-18`
/// relative to the running sum.
pub fn tail_bound(c_mu: &[f64], r: u32) -> f64 {
    let mut total = 0.0;
    for (i, &c) in c_mu.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mu = i as u32 + 1;
        let mut sum = 0.0;
        let mut t = r + 1;
        let mut prev = 0.0;
        loop {
            let term = card(mu, t) as f64 * c * (t as f64).powi(mu as i32) * 2f64.powi(-(t as i32));
            sum += term;
            if term < prev && term <= 1e-18 * sum.max(f64::MIN_POSITIVE) {
                break;
            }
            prev = term;
            t += 1;
            if t > 100_000 {
                break;
            }
        }
        total += sum;
    }
    total
}
