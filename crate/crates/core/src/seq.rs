//! Finitely supported sequences and the operations the constructions are built from.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::weight::WeightSpec;
use crate::wide::{WideComplex, WideRepr};

/// A finitely supported complex sequence; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiniteSeq {
    coeffs: BTreeMap<u64, WideComplex>,
}

impl FiniteSeq {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The basis vector `e_n`.
    pub fn basis(n: u64) -> Self {
        Self::monomial(n, WideComplex::ONE)
    }

    pub fn monomial(n: u64, c: WideComplex) -> Self {
        let mut s = Self::zero();
        s.insert(n, c);
        s
    }

    /// Builds from `(index, coefficient)` pairs; repeated indices are summed.
    pub fn from_pairs<I: IntoIterator<Item = (u64, WideComplex)>>(pairs: I) -> Self {
        let mut s = Self::zero();
        for (n, c) in pairs {
            s.add_at(n, c);
        }
        s
    }

    /// Dense real coefficients `x_0, x_1, …`.
    pub fn from_reals(values: &[f64]) -> Self {
        Self::from_pairs(
            values
                .iter()
                .enumerate()
                .map(|(n, &x)| (n as u64, WideComplex::real(x))),
        )
    }

    /// Sets the coefficient at `n`, removing it when `c` is zero.
    pub fn insert(&mut self, n: u64, c: WideComplex) {
        if c.is_zero() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, c);
        }
    }

    pub fn add_at(&mut self, n: u64, c: WideComplex) {
        let cur = self.get(n);
        self.insert(n, cur + c);
    }

    pub fn get(&self, n: u64) -> WideComplex {
        self.coeffs.get(&n).copied().unwrap_or(WideComplex::ZERO)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, WideComplex)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    /// Number of stored nonzero coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn min_index(&self) -> Option<u64> {
        self.coeffs.keys().next().copied()
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn scale(&self, c: WideComplex) -> Self {
        Self::from_pairs(self.iter().map(|(n, x)| (n, x * c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, c) in other.iter() {
            out.add_at(n, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, c) in other.iter() {
            out.add_at(n, -c);
        }
        out
    }

    /// `(xy)_n = x_n y_n`.
    pub fn coordinatewise_product(&self, other: &Self) -> Self {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = Self::zero();
        for (n, c) in small.iter() {
            if let Some(&d) = large.coeffs.get(&n) {
                out.insert(n, c * d);
            }
        }
        out
    }

    /// Coordinatewise `k`-th power; `k = 0` is undefined for the non-unital algebras here.
    pub fn coordinatewise_power(&self, k: u32) -> Self {
        assert!(k >= 1, "coordinatewise power must be positive");
        Self::from_pairs(self.iter().map(|(n, c)| (n, c.powi(k as u64))))
    }

    /// Discrete convolution `z_n = Σ_{k ≤ n} x_k y_{n-k}`.
    pub fn cauchy_product(&self, other: &Self) -> Self {
        let mut acc: BTreeMap<u64, WideComplex> = BTreeMap::new();
        for (i, a) in self.iter() {
            for (j, b) in other.iter() {
                let e = acc.entry(i + j).or_insert(WideComplex::ZERO);
                *e = *e + a * b;
            }
        }
        Self::from_pairs(acc)
    }

    /// `x^m` under the Cauchy product, with `x^0 = e_0`.
    pub fn cauchy_power(&self, m: u32) -> Self {
        let mut acc = Self::basis(0);
        let mut base = self.clone();
        let mut k = m;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.cauchy_product(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.cauchy_product(&base);
            }
        }
        acc
    }

    /// `B_w^a x`: `(B_w^a x)_n = (v_{n+a}/v_n) x_{n+a}`.
    pub fn backward_iterate(&self, w: &WeightSpec, a: u64) -> Self {
        Self::from_pairs(
            self.coeffs
                .range(a..)
                .map(|(&n, &c)| (n - a, w.ratio(n, n - a) * c)),
        )
    }

    /// `F_{w^{-1}}^a x`: `(F^a x)_{n+a} = (v_n/v_{n+a}) x_n`, a right inverse of `B_w^a`.
    pub fn forward_iterate(&self, w: &WeightSpec, a: u64) -> Self {
        Self::from_pairs(self.iter().map(|(n, c)| (n + a, c / w.ratio(n + a, n))))
    }

    /// Largest `|x_n|` relative difference against `other`, zero when both vanish.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        let idx: std::collections::BTreeSet<u64> = self.support().chain(other.support()).collect();
        idx.into_iter()
            .map(|n| WideComplex::rel_diff(self.get(n), other.get(n)))
            .fold(0.0, f64::max)
    }

    /// `max_n |x_n - y_n| / max_n |y_n|`, the error of `self` measured against `reference`.
    pub fn rel_residual(&self, reference: &Self) -> f64 {
        let scale = reference
            .iter()
            .map(|(_, c)| c.ln_abs())
            .fold(f64::NEG_INFINITY, f64::max);
        let diff = self.sub(reference);
        let top = diff
            .iter()
            .map(|(_, c)| c.ln_abs())
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return 0.0;
        }
        if scale == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        (top - scale).exp()
    }
}

/// `(S^a y)^{j/m} = Σ_n (w_{n+1}^{1/m} ··· w_{n+a}^{1/m})^{-j} (y_n^{1/m})^j e_{n+a}`.
///
/// Roots are principal and the `j`-th power is always taken of the stored
/// `1/m`-th root, so `w^{2/4}` and `w^{1/2}` are different numbers in general.
pub fn root_power_block(
    w: &WeightSpec,
    y: &FiniteSeq,
    a: u64,
    j: u32,
    m: u32,
) -> Result<FiniteSeq> {
    if j == 0 || m == 0 {
        return Err(Error::invalid("root_power_block needs j ≥ 1 and m ≥ 1"));
    }
    Ok(FiniteSeq::from_pairs(y.iter().map(|(n, yn)| {
        let root = yn.principal_root(m) / w.root_product(m, n + 1, n + a);
        (n + a, root.powi(j as u64))
    })))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryRepr {
    Flat(u64, f64, f64),
    Nested(u64, WideRepr),
}

impl Serialize for FiniteSeq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            coeffs: Vec<EntryRepr>,
        }
        let coeffs = self
            .iter()
            .map(|(n, c)| match WideRepr::from(&c) {
                WideRepr::Plain(re, im) => EntryRepr::Flat(n, re, im),
                other => EntryRepr::Nested(n, other),
            })
            .collect();
        Out { coeffs }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct In {
            coeffs: Vec<EntryRepr>,
        }
        let raw = In::deserialize(d)?;
        let mut out = FiniteSeq::zero();
        for e in raw.coeffs {
            let (n, z) = match e {
                EntryRepr::Flat(n, re, im) => {
                    if !re.is_finite() || !im.is_finite() {
                        return Err(serde::de::Error::custom("non-finite coefficient"));
                    }
                    (n, WideComplex::new(re, im))
                }
                EntryRepr::Nested(n, r) => (n, WideComplex::from(r)),
            };
            if !out.get(n).is_zero() {
                return Err(serde::de::Error::custom(format!("duplicate index {n}")));
            }
            out.insert(n, z);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> WideComplex {
        WideComplex::real(re)
    }

    #[test]
    fn coordinatewise_examples() {
        let e3 = FiniteSeq::basis(3);
        assert_eq!(e3.coordinatewise_product(&e3), e3);
        assert!(FiniteSeq::basis(2).coordinatewise_product(&e3).is_zero());
        let x = FiniteSeq::from_reals(&[1.0, 2.0]);
        let y = FiniteSeq::from_reals(&[3.0, 0.0, 5.0]);
        assert_eq!(x.coordinatewise_product(&y), FiniteSeq::from_reals(&[3.0]));
    }

    #[test]
    fn cauchy_examples() {
        assert_eq!(
            FiniteSeq::basis(1).cauchy_product(&FiniteSeq::basis(1)),
            FiniteSeq::basis(2)
        );
        let s = FiniteSeq::from_reals(&[1.0, 1.0]);
        assert_eq!(
            s.cauchy_product(&s),
            FiniteSeq::from_reals(&[1.0, 2.0, 1.0])
        );
        let x = FiniteSeq::from_reals(&[1.0, 2.0]);
        let y = FiniteSeq::from_reals(&[3.0, 4.0]);
        assert_eq!(
            x.cauchy_product(&y),
            FiniteSeq::from_reals(&[3.0, 10.0, 8.0])
        );
        assert_eq!(
            s.cauchy_power(3),
            FiniteSeq::from_reals(&[1.0, 3.0, 3.0, 1.0])
        );
        assert_eq!(x.cauchy_power(1), x);
        assert_eq!(FiniteSeq::basis(2).cauchy_power(4), FiniteSeq::basis(8));
        assert_eq!(x.cauchy_power(0), FiniteSeq::basis(0));
    }

    #[test]
    fn shift_examples() {
        let mac = WeightSpec::maclane();
        assert_eq!(
            FiniteSeq::basis(3).backward_iterate(&mac, 1),
            FiniteSeq::monomial(2, c(3.0))
        );
        let two = WeightSpec::constant(c(2.0)).unwrap();
        assert_eq!(
            FiniteSeq::basis(5).backward_iterate(&two, 2),
            FiniteSeq::monomial(3, c(4.0))
        );
        assert!(FiniteSeq::basis(0).backward_iterate(&mac, 1).is_zero());
        assert_eq!(
            FiniteSeq::basis(0).forward_iterate(&two, 3),
            FiniteSeq::monomial(3, c(0.125))
        );
        let x = FiniteSeq::from_reals(&[1.0, -2.0, 0.5]);
        assert_eq!(x.forward_iterate(&two, 0), x);
    }

    #[test]
    fn root_power_block_examples() {
        let two = WeightSpec::constant(c(2.0)).unwrap();
        let b = root_power_block(&two, &FiniteSeq::basis(0), 3, 1, 1).unwrap();
        assert_eq!(b, FiniteSeq::monomial(3, c(0.125)));
        let four = WeightSpec::constant(c(4.0)).unwrap();
        let b = root_power_block(&four, &FiniteSeq::basis(0), 2, 1, 2).unwrap();
        assert!(b.max_rel_diff(&FiniteSeq::monomial(2, c(0.25))) < 1e-15);
        let y = FiniteSeq::from_pairs([(0, c(-1.0)), (2, WideComplex::new(0.3, 2.0))]);
        let b = root_power_block(&WeightSpec::maclane(), &y, 40, 3, 3).unwrap();
        assert!(
            b.backward_iterate(&WeightSpec::maclane(), 40)
                .max_rel_diff(&y)
                < 1e-12
        );
        assert!(root_power_block(&two, &y, 1, 0, 1).is_err());
    }

    #[test]
    fn json_forms() {
        let x = FiniteSeq::from_pairs([(0, c(1.0)), (4, WideComplex::new(0.0, -2.0))]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"coeffs":[[0,1.0,0.0],[4,0.0,-2.0]]}"#);
        assert_eq!(serde_json::from_str::<FiniteSeq>(&s).unwrap(), x);
        let huge = FiniteSeq::monomial(9, c(3.0).powi(4000));
        let s = serde_json::to_string(&huge).unwrap();
        assert!(s.contains("exp2"));
        assert_eq!(serde_json::from_str::<FiniteSeq>(&s).unwrap(), huge);
        let polar: FiniteSeq =
            serde_json::from_str(r#"{"coeffs":[[1,{"log_mag":-5000.0,"phase":1.0}]]}"#).unwrap();
        assert!((polar.get(1).ln_abs() + 5000.0).abs() < 1e-9);
        assert!(serde_json::from_str::<FiniteSeq>(r#"{"coeffs":[[1,1,0],[1,2,0]]}"#).is_err());
    }
}
