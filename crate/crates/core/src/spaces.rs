//! The concrete Fréchet sequence algebras and their seminorm families `(‖·‖_q)_{q≥1}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seq::FiniteSeq;
use crate::wide::{LogMag, WideComplex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Product {
    Coordinatewise,
    Cauchy,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceId {
    /// `ℓ^p`, `p ≥ 1`, coordinatewise.
    Lp(f64),
    C0,
    /// `ℓ^1` under the Cauchy product.
    L1,
    /// `H(ℂ)` with `‖x‖_q = Σ |x_n| q^n`, Hadamard (coordinatewise) product.
    EntireHadamard,
    /// `H(ℂ)` with `‖x‖_q = sup_{|z| ≤ q} |Σ x_n z^n|`, Cauchy product.
    EntireCauchy,
    /// `ω` with `‖x‖_q = sup_{n ≤ q} |x_n|`.
    OmegaCoord,
    /// `ω` with `‖x‖_q = Σ_{n ≤ q} |x_n|`.
    OmegaCauchy,
}

impl SpaceId {
    pub fn product(&self) -> Product {
        match self {
            SpaceId::L1 | SpaceId::EntireCauchy | SpaceId::OmegaCauchy => Product::Cauchy,
            _ => Product::Coordinatewise,
        }
    }

    /// Every built-in id, with `Lp` represented by `p = 2`.
    pub fn builtins() -> Vec<SpaceId> {
        vec![
            SpaceId::Lp(2.0),
            SpaceId::C0,
            SpaceId::L1,
            SpaceId::EntireHadamard,
            SpaceId::EntireCauchy,
            SpaceId::OmegaCoord,
            SpaceId::OmegaCauchy,
        ]
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceId::Lp(p) => write!(f, "l_p:{p}"),
            SpaceId::C0 => write!(f, "c0"),
            SpaceId::L1 => write!(f, "l1"),
            SpaceId::EntireHadamard => write!(f, "entire_hadamard"),
            SpaceId::EntireCauchy => write!(f, "entire_cauchy"),
            SpaceId::OmegaCoord => write!(f, "omega_coord"),
            SpaceId::OmegaCauchy => write!(f, "omega_cauchy"),
        }
    }
}

impl FromStr for SpaceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "c0" => SpaceId::C0,
            "l1" => SpaceId::L1,
            "entire_hadamard" => SpaceId::EntireHadamard,
            "entire_cauchy" => SpaceId::EntireCauchy,
            "omega_coord" => SpaceId::OmegaCoord,
            "omega_cauchy" => SpaceId::OmegaCauchy,
            other => {
                let p = other
                    .strip_prefix("l_p:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::invalid(format!("unknown space id {other:?}")))?;
                if !(p.is_finite() && p >= 1.0) {
                    return Err(Error::invalid(format!("l_p needs 1 ≤ p < ∞, got {p}")));
                }
                SpaceId::Lp(p)
            }
        })
    }
}

/// A space together with its product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceSpec {
    id: SpaceId,
}

/// Interval enclosure of a seminorm value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormValue {
    pub lower: LogMag,
    pub upper: LogMag,
}

const CIRCLE_SAMPLES: usize = 256;

impl SpaceSpec {
    pub fn new(id: SpaceId) -> Self {
        Self { id }
    }

    /// Resolves an id against a requested product.
    ///
    /// `l1` with the coordinatewise product is `ℓ^1` as a member of the `ℓ^p`
    /// family, and `l_p:1` with the Cauchy product is the Cauchy algebra `ℓ^1`.
    /// Every other mismatch is rejected.
    pub fn with_product(id: SpaceId, product: Option<Product>) -> Result<Self> {
        let Some(product) = product else {
            return Ok(Self::new(id));
        };
        let id = match (id, product) {
            (SpaceId::L1, Product::Coordinatewise) => SpaceId::Lp(1.0),
            (SpaceId::Lp(1.0), Product::Cauchy) => SpaceId::L1,
            (id, p) if id.product() == p => id,
            (id, p) => {
                return Err(Error::invalid(format!(
                    "space {id} carries the {:?} product, not {p:?}",
                    id.product()
                )))
            }
        };
        Ok(Self::new(id))
    }

    pub fn parse(id: &str, product: Option<Product>) -> Result<Self> {
        Self::with_product(id.parse()?, product)
    }

    pub fn id(&self) -> SpaceId {
        self.id
    }

    pub fn product(&self) -> Product {
        self.id.product()
    }

    pub fn is_cauchy(&self) -> bool {
        self.product() == Product::Cauchy
    }

    /// Product of two sequences in this algebra.
    pub fn multiply(&self, x: &FiniteSeq, y: &FiniteSeq) -> FiniteSeq {
        match self.product() {
            Product::Coordinatewise => x.coordinatewise_product(y),
            Product::Cauchy => x.cauchy_product(y),
        }
    }

    pub fn power(&self, x: &FiniteSeq, k: u32) -> FiniteSeq {
        match self.product() {
            Product::Coordinatewise => x.coordinatewise_power(k),
            Product::Cauchy => x.cauchy_power(k),
        }
    }

    /// `‖e_n‖_q` in closed form.
    pub fn basis_seminorm(&self, q: u32, n: u64) -> LogMag {
        match self.id {
            SpaceId::Lp(_) | SpaceId::C0 | SpaceId::L1 => LogMag::ONE,
            SpaceId::EntireHadamard | SpaceId::EntireCauchy => {
                LogMag::from_ln(n as f64 * (q as f64).ln())
            }
            SpaceId::OmegaCoord | SpaceId::OmegaCauchy => {
                if n <= q as u64 {
                    LogMag::ONE
                } else {
                    LogMag::ZERO
                }
            }
        }
    }

    /// Seminorm of `Σ_n t_n e_n` given `(n, |t_n|)`; for `EntireCauchy` this is the
    /// certified upper bound `Σ |t_n| q^n`.
    pub fn seminorm_of_terms<I: IntoIterator<Item = (u64, LogMag)>>(
        &self,
        q: u32,
        terms: I,
    ) -> LogMag {
        let weighted = terms
            .into_iter()
            .map(|(n, a)| (n, a * self.basis_seminorm(q, n)));
        match self.id {
            SpaceId::Lp(p) if p != 1.0 => {
                LogMag::sum(weighted.map(|(_, a)| a.powf(p))).powf(1.0 / p)
            }
            SpaceId::C0 | SpaceId::OmegaCoord => weighted.fold(LogMag::ZERO, |m, (_, a)| m.max(a)),
            _ => LogMag::sum(weighted.map(|(_, a)| a)),
        }
    }

    /// Certified upper bound for `‖x‖_q` (exact for every space except `EntireCauchy`).
    pub fn seminorm_upper(&self, q: u32, x: &FiniteSeq) -> LogMag {
        assert!(q >= 1, "seminorm index starts at 1");
        self.seminorm_of_terms(q, x.iter().map(|(n, c)| (n, c.abs())))
    }

    /// `‖x‖_q` as an enclosure; only `EntireCauchy` has `lower < upper`, its lower
    /// bound being the maximum modulus over 256 equispaced points of `|z| = q`.
    pub fn seminorm_eval(&self, q: u32, x: &FiniteSeq) -> SeminormValue {
        let upper = self.seminorm_upper(q, x);
        let lower = match self.id {
            SpaceId::EntireCauchy => circle_max(q, x).min(upper),
            _ => upper,
        };
        SeminormValue { lower, upper }
    }
}

fn circle_max(q: u32, x: &FiniteSeq) -> LogMag {
    if x.is_zero() {
        return LogMag::ZERO;
    }
    let lnq = (q as f64).ln();
    let scaled: Vec<(u64, WideComplex)> = x
        .iter()
        .map(|(n, c)| (n, c * WideComplex::from_polar_ln(n as f64 * lnq, 0.0)))
        .collect();
    (0..CIRCLE_SAMPLES)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / CIRCLE_SAMPLES as f64;
            scaled
                .iter()
                .fold(WideComplex::ZERO, |acc, &(n, c)| {
                    let phase = (theta * n as f64).rem_euclid(2.0 * PI);
                    acc + c * WideComplex::new(phase.cos(), phase.sin())
                })
                .abs()
        })
        .fold(LogMag::ZERO, LogMag::max)
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

impl Serialize for SpaceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            id: String,
            product: Product,
        }
        Out {
            id: self.id.to_string(),
            product: self.product(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpaceSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct In {
            id: String,
            product: Option<Product>,
        }
        let raw = In::deserialize(d)?;
        SpaceSpec::parse(&raw.id, raw.product).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(id: &str) -> SpaceSpec {
        SpaceSpec::parse(id, None).unwrap()
    }

    #[test]
    fn seminorm_examples() {
        let v = sp("entire_hadamard").seminorm_upper(2, &FiniteSeq::basis(3));
        assert!((v.to_f64() - 8.0).abs() < 1e-12);
        let v = sp("l1").seminorm_upper(1, &FiniteSeq::from_reals(&[1.0, -2.0]));
        assert!((v.to_f64() - 3.0).abs() < 1e-14);
        assert!(sp("omega_coord")
            .seminorm_upper(3, &FiniteSeq::basis(5))
            .is_zero());
        let v = sp("l_p:2").seminorm_upper(1, &FiniteSeq::from_reals(&[3.0, 4.0]));
        assert!((v.to_f64() - 5.0).abs() < 1e-14);
        let v = sp("c0").seminorm_upper(1, &FiniteSeq::from_reals(&[3.0, -4.0]));
        assert!((v.to_f64() - 4.0).abs() < 1e-14);
        let v = sp("omega_cauchy").seminorm_upper(1, &FiniteSeq::from_reals(&[3.0, -4.0, 7.0]));
        assert!((v.to_f64() - 7.0).abs() < 1e-14);
    }

    #[test]
    fn basis_seminorm_examples() {
        assert_eq!(sp("l_p:3").basis_seminorm(7, 100), LogMag::ONE);
        assert!((sp("entire_cauchy").basis_seminorm(3, 2).to_f64() - 9.0).abs() < 1e-13);
        assert!(sp("omega_cauchy").basis_seminorm(4, 7).is_zero());
    }

    #[test]
    fn entire_cauchy_enclosure() {
        let s = sp("entire_cauchy");
        let v = s.seminorm_eval(3, &FiniteSeq::basis(4));
        assert!((v.lower.to_f64() / 81.0 - 1.0).abs() < 1e-12);
        assert!((v.upper.to_f64() / 81.0 - 1.0).abs() < 1e-12);
        // 1 - z on |z| = 1 peaks at z = -1 with value 2, equal to the coefficient sum
        let v = s.seminorm_eval(1, &FiniteSeq::from_reals(&[1.0, -1.0]));
        assert!((v.lower.to_f64() - 2.0).abs() < 1e-12);
        // 1 + i z: sup is 2 at z = -i, which is a sample point
        let x = FiniteSeq::from_pairs([(0, WideComplex::ONE), (1, WideComplex::i())]);
        assert!((s.seminorm_eval(1, &x).lower.to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn product_consistency() {
        assert_eq!(
            SpaceSpec::parse("l1", Some(Product::Coordinatewise))
                .unwrap()
                .id(),
            SpaceId::Lp(1.0)
        );
        assert_eq!(
            SpaceSpec::parse("l_p:1", Some(Product::Cauchy))
                .unwrap()
                .id(),
            SpaceId::L1
        );
        assert!(SpaceSpec::parse("entire_cauchy", Some(Product::Coordinatewise)).is_err());
        assert!(SpaceSpec::parse("c0", Some(Product::Cauchy)).is_err());
        assert!(SpaceSpec::parse("l_p:0.5", None).is_err());
        assert!(SpaceSpec::parse("nope", None).is_err());
        let s = SpaceSpec::parse("omega_coord", None).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<SpaceSpec>(&j).unwrap(), s);
    }
}
