//! The countable set `A` of coefficient tuples and the matrix `Λ` built from it.
//!
//! Entries are Gaussian rationals of modulus at most 1, grouped into levels:
//! level 1 is `1, i, -1, -i, 0`, level `d ≥ 2` adds `(p + p'i)/d` whose reduced
//! real and imaginary denominators have least common multiple `d`. Tuples of
//! length `K` are ordered by their highest level, then lexicographically by the
//! global entry index. Column `ν` of `Λ` is `A[k]` where `ν - 1 = d(d+1)/2 + k`,
//! `0 ≤ k ≤ d`, so every element of `A` recurs infinitely often.

use serde::{Deserialize, Serialize};

use crate::element::AlgebraElement;
use crate::error::{Error, Result};
use crate::wide::WideComplex;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn reduced_den(p: i64, d: i64) -> i64 {
    d / gcd(p, d)
}

/// Level-`d` entries as `(p, p')` numerators over `d`.
fn level_entries(d: i64) -> Vec<(i64, i64)> {
    if d == 1 {
        return vec![(1, 0), (0, 1), (-1, 0), (0, -1), (0, 0)];
    }
    let mut out = Vec::new();
    for p in -d..=d {
        for q in -d..=d {
            if p * p + q * q > d * d {
                continue;
            }
            let (a, b) = (reduced_den(p, d), reduced_den(q, d));
            if a * b / gcd(a, b) == d {
                out.push((p, q));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SetA {
    k: usize,
    /// Global entry list with each entry's level.
    entries: Vec<(WideComplex, u32)>,
    /// `level_end[L-1]` = number of entries with level ≤ L.
    level_end: Vec<usize>,
}

impl SetA {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("tuples in A need length at least 1"));
        }
        let mut a = Self {
            k,
            entries: Vec::new(),
            level_end: Vec::new(),
        };
        a.grow_to_level(1);
        Ok(a)
    }

    pub fn len_k(&self) -> usize {
        self.k
    }

    fn grow_to_level(&mut self, level: u32) {
        while (self.level_end.len() as u32) < level {
            let d = self.level_end.len() as i64 + 1;
            for (p, q) in level_entries(d) {
                let z = WideComplex::new(p as f64 / d as f64, q as f64 / d as f64);
                self.entries.push((z, d as u32));
            }
            self.level_end.push(self.entries.len());
        }
    }

    /// Number of tuples whose highest level is exactly `level`.
    fn tuples_at(&mut self, level: u32) -> u128 {
        self.grow_to_level(level);
        let hi = self.level_end[level as usize - 1] as u128;
        let lo = if level == 1 {
            0
        } else {
            self.level_end[level as usize - 2] as u128
        };
        hi.pow(self.k as u32) - lo.pow(self.k as u32)
    }

    /// Entry indices of the `idx`-th tuple.
    pub fn indices(&mut self, idx: u64) -> Vec<usize> {
        let mut level = 1;
        let mut left = idx as u128;
        loop {
            let c = self.tuples_at(level);
            if left < c {
                break;
            }
            left -= c;
            level += 1;
        }
        let hi = self.level_end[level as usize - 1];
        let lo = if level == 1 {
            0
        } else {
            self.level_end[level as usize - 2]
        };
        // walk [0, hi)^K lexicographically, skipping tuples entirely below `lo`
        let mut cur = vec![0usize; self.k];
        loop {
            if cur.iter().any(|&e| e >= lo) {
                if left == 0 {
                    return cur;
                }
                left -= 1;
            }
            let mut pos = self.k;
            loop {
                pos -= 1;
                cur[pos] += 1;
                if cur[pos] < hi {
                    break;
                }
                cur[pos] = 0;
                assert!(pos > 0, "tuple index beyond its level");
            }
        }
    }

    /// The `idx`-th element of `A` (0-based).
    pub fn element(&mut self, idx: u64) -> Vec<WideComplex> {
        self.indices(idx)
            .into_iter()
            .map(|e| self.entries[e].0)
            .collect()
    }
}

/// Which element of `A` sits in column `ν ≥ 1`.
pub fn column_a_index(nu: u64) -> u64 {
    let z = nu - 1;
    let mut d = ((((8 * z) as f64 + 1.0).sqrt() - 1.0) / 2.0).floor() as u64;
    while d * (d + 1) / 2 > z {
        d -= 1;
    }
    while (d + 1) * (d + 2) / 2 <= z {
        d += 1;
    }
    z - d * (d + 1) / 2
}

/// Smallest column carrying `A[a_index]`.
pub fn first_column_of(a_index: u64) -> u64 {
    a_index * (a_index + 1) / 2 + a_index + 1
}

/// `Λ` restricted to `K` rows.
#[derive(Clone, Debug)]
pub struct LambdaMatrix {
    set: SetA,
}

impl LambdaMatrix {
    pub fn new(k: usize) -> Result<Self> {
        Ok(Self { set: SetA::new(k)? })
    }

    pub fn rows(&self) -> usize {
        self.set.len_k()
    }

    /// Column `ν` as `(λ_{1,ν}, …, λ_{K,ν})`.
    pub fn column(&mut self, nu: u64) -> Vec<WideComplex> {
        self.set.element(column_a_index(nu))
    }

    pub fn a_element(&mut self, idx: u64) -> Vec<WideComplex> {
        self.set.element(idx)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingForm {
    /// Smallest column whose entries make the top-degree form nonzero.
    pub nu: u64,
    pub a_index: u64,
    pub a: Vec<WideComplex>,
    /// The value of the top-degree form at `a` (the scalar multiplying the target).
    pub value: WideComplex,
}

pub const DEFAULT_FORM_THRESHOLD: f64 = 1e-6;

/// Scans `A` for the first element where the top-degree form of `z` exceeds `threshold` in modulus.
pub fn leading_form_column(
    z: &AlgebraElement,
    lambda: &mut LambdaMatrix,
    threshold: f64,
    budget: u64,
) -> Result<LeadingForm> {
    if z.generators() > lambda.rows() {
        return Err(Error::invalid(format!(
            "element uses {} generators, Λ has {} rows",
            z.generators(),
            lambda.rows()
        )));
    }
    let m = z.max_degree();
    let budget = crate::capped(budget);
    for idx in 0..budget {
        let a = lambda.a_element(idx);
        let value = z.form_value(m, &a);
        if value.abs().to_f64() > threshold {
            return Ok(LeadingForm {
                nu: first_column_of(idx),
                a_index: idx,
                a,
                value,
            });
        }
    }
    Err(Error::SearchExhausted {
        scanned: budget,
        detail: format!("the degree-{m} form of {z} stays below {threshold} on the first {budget} elements of A"),
    })
}
