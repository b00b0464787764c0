//! Polynomials without constant term in generators `x1, …, xK`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::FiniteSeq;
use crate::spaces::SpaceSpec;
use crate::wide::WideComplex;

/// `z = Σ_β c_β x1^{β_1} ··· xK^{β_K}` with every `β ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    k: usize,
    terms: BTreeMap<Vec<u32>, WideComplex>,
}

impl AlgebraElement {
    /// Sums duplicate exponents; rejects constant terms and the zero polynomial.
    pub fn new<I: IntoIterator<Item = (Vec<u32>, WideComplex)>>(
        k: usize,
        terms: I,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("an element needs at least one generator"));
        }
        let mut map: BTreeMap<Vec<u32>, WideComplex> = BTreeMap::new();
        for (beta, c) in terms {
            if beta.len() != k {
                return Err(Error::invalid(format!(
                    "exponent vector {beta:?} does not have length {k}"
                )));
            }
            if beta.iter().all(|&b| b == 0) {
                return Err(Error::invalid("constant terms are not allowed"));
            }
            let e = map.entry(beta).or_insert(WideComplex::ZERO);
            *e = *e + c;
        }
        map.retain(|_, c| !c.is_zero());
        if map.is_empty() {
            return Err(Error::Degenerate(
                "the element is the zero polynomial".into(),
            ));
        }
        Ok(Self { k, terms: map })
    }

    /// `Σ_ν c_ν x^ν` in a single generator.
    pub fn powers<I: IntoIterator<Item = (u32, WideComplex)>>(coeffs: I) -> Result<Self> {
        Self::new(1, coeffs.into_iter().map(|(nu, c)| (vec![nu], c)))
    }

    /// The generator `x_k` (1-based) among `k_total`.
    pub fn generator(k: usize, k_total: usize) -> Result<Self> {
        if k == 0 || k > k_total {
            return Err(Error::invalid(format!(
                "generator x{k} out of range 1..={k_total}"
            )));
        }
        let mut beta = vec![0; k_total];
        beta[k - 1] = 1;
        Self::new(k_total, [(beta, WideComplex::ONE)])
    }

    /// Same polynomial over `k ≥ self.generators()` generators.
    pub fn widen(&self, k: usize) -> Result<Self> {
        if k < self.k {
            return Err(Error::invalid(format!(
                "cannot narrow an element on {} generators to {k}",
                self.k
            )));
        }
        let terms = self.terms.iter().map(|(b, &c)| {
            let mut b = b.clone();
            b.resize(k, 0);
            (b, c)
        });
        Self::new(k, terms)
    }

    pub fn generators(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, WideComplex)> + '_ {
        self.terms.iter().map(|(b, &c)| (b, c))
    }

    pub fn degree_of(beta: &[u32]) -> u32 {
        beta.iter().sum()
    }

    pub fn min_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|b| Self::degree_of(b))
            .min()
            .expect("nonempty")
    }

    pub fn max_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|b| Self::degree_of(b))
            .max()
            .expect("nonempty")
    }

    /// Terms of total degree `mu`.
    pub fn part(&self, mu: u32) -> impl Iterator<Item = (&Vec<u32>, WideComplex)> + '_ {
        self.terms().filter(move |(b, _)| Self::degree_of(b) == mu)
    }

    /// `Σ_{|β| = μ} c_β a^β`.
    pub fn form_value(&self, mu: u32, a: &[WideComplex]) -> WideComplex {
        self.part(mu).fold(WideComplex::ZERO, |acc, (b, c)| {
            let mono = b.iter().zip(a).fold(WideComplex::ONE, |m, (&e, &x)| {
                if e == 0 {
                    m
                } else {
                    m * x.powi(e as u64)
                }
            });
            acc + c * mono
        })
    }

    /// `C_μ = (1+μ)^K max_{|β|=μ} |c_β|` for `μ = 1..=max_degree`.
    pub fn tail_constants(&self) -> Vec<f64> {
        (1..=self.max_degree())
            .map(|mu| {
                let mx = self
                    .part(mu)
                    .map(|(_, c)| c.abs().to_f64())
                    .fold(0.0, f64::max);
                ((1 + mu) as f64).powi(self.k as i32) * mx
            })
            .collect()
    }

    /// Scales every coefficient.
    pub fn scale(&self, s: WideComplex) -> Result<Self> {
        Self::new(self.k, self.terms.iter().map(|(b, &c)| (b.clone(), c * s)))
    }

    /// Substitutes `generators[k-1]` for `x_k` using the product of `space`.
    pub fn evaluate(&self, space: &SpaceSpec, generators: &[FiniteSeq]) -> Result<FiniteSeq> {
        if generators.len() < self.k {
            return Err(Error::invalid(format!(
                "element uses x{} but only {} generators are available",
                self.k,
                generators.len()
            )));
        }
        let mut powers: BTreeMap<(usize, u32), FiniteSeq> = BTreeMap::new();
        let mut out = FiniteSeq::zero();
        for (beta, c) in self.terms() {
            let mut acc: Option<FiniteSeq> = None;
            for (i, &e) in beta.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = powers
                    .entry((i, e))
                    .or_insert_with(|| space.power(&generators[i], e))
                    .clone();
                acc = Some(match acc {
                    None => pw,
                    Some(a) => space.multiply(&a, &pw),
                });
            }
            out = out.add(&acc.expect("β ≠ 0").scale(c));
        }
        Ok(out)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // highest degree last reads naturally for the usual inputs
        let mut items: Vec<_> = self.terms().collect();
        items.sort_by_key(|(b, _)| (Self::degree_of(b), std::cmp::Reverse((*b).clone())));
        for (i, (beta, c)) in items.into_iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c != WideComplex::ONE {
                write!(f, "({c})*")?;
            }
            let factors: Vec<String> = beta
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| {
                    if e == 1 {
                        format!("x{}", k + 1)
                    } else {
                        format!("x{}^{e}", k + 1)
                    }
                })
                .collect();
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponents: Vec<u32>,
    coeff: WideComplex,
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    generators: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for AlgebraElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementRepr {
            generators: self.k,
            terms: self
                .terms()
                .map(|(b, c)| TermRepr {
                    exponents: b.clone(),
                    coeff: c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ElementRepr::deserialize(d)?;
        Self::new(
            r.generators,
            r.terms.into_iter().map(|t| (t.exponents, t.coeff)),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> WideComplex {
        WideComplex::real(x)
    }

    #[test]
    fn construction_rules() {
        assert!(AlgebraElement::new(1, [(vec![0], c(1.0))]).is_err());
        assert!(matches!(
            AlgebraElement::new(1, [(vec![1], c(1.0)), (vec![1], c(-1.0))]),
            Err(Error::Degenerate(_))
        ));
        let z = AlgebraElement::powers([(2, c(1.0)), (3, c(0.3))]).unwrap();
        assert_eq!((z.min_degree(), z.max_degree()), (2, 3));
        assert_eq!(z.to_string(), "x1^2 + (0.3)*x1^3");
    }

    #[test]
    fn evaluation_and_forms() {
        let s = SpaceSpec::parse("l1", None).unwrap();
        let x = FiniteSeq::from_reals(&[1.0, 1.0]);
        let z = AlgebraElement::powers([(2, c(1.0))]).unwrap();
        assert_eq!(
            z.evaluate(&s, &[x]).unwrap(),
            FiniteSeq::from_reals(&[1.0, 2.0, 1.0])
        );
        let z = AlgebraElement::new(2, [(vec![1, 1], c(1.0)), (vec![1, 0], c(1.0))]).unwrap();
        assert_eq!(z.form_value(2, &[c(1.0), c(1.0)]), c(1.0));
        assert_eq!(z.tail_constants(), vec![4.0, 9.0]);
    }

    #[test]
    fn serde_round_trip() {
        let z = AlgebraElement::new(
            2,
            [
                (vec![1, 1], WideComplex::new(0.5, -1.0)),
                (vec![0, 2], c(2.0)),
            ],
        )
        .unwrap();
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(serde_json::from_str::<AlgebraElement>(&s).unwrap(), z);
    }
}
