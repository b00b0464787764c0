//! Weight sequences `w = (w_n)` with `w_0 = 1` and their products `v_n = w_0···w_n`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::wide::WideComplex;

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    /// `w_n = λ` for `n ≥ 1`.
    Const(WideComplex),
    /// `w_n = n` for `n ≥ 1` (differentiation on Taylor coefficients).
    MacLane,
    /// `w_1, w_2, …` from a list; indices past the end repeat the last entry.
    Table(Vec<WideComplex>),
}

#[derive(Default, Debug)]
struct Cache {
    v: RwLock<Vec<WideComplex>>,
    roots: RwLock<HashMap<u32, Vec<WideComplex>>>,
}

/// A weight sequence with a lazily grown cache of `v_n`.
#[derive(Clone, Debug)]
pub struct WeightSpec {
    kind: WeightKind,
    cache: Arc<Cache>,
}

impl PartialEq for WeightSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl WeightSpec {
    pub fn constant(lambda: WideComplex) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::invalid("constant weight must be nonzero"));
        }
        Ok(Self::from_kind(WeightKind::Const(lambda)))
    }

    pub fn maclane() -> Self {
        Self::from_kind(WeightKind::MacLane)
    }

    pub fn table(values: Vec<WideComplex>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("weight table is empty"));
        }
        if let Some(i) = values.iter().position(|w| w.is_zero()) {
            return Err(Error::invalid(format!(
                "weight table entry w_{} is zero",
                i + 1
            )));
        }
        Ok(Self::from_kind(WeightKind::Table(values)))
    }

    fn from_kind(kind: WeightKind) -> Self {
        Self {
            kind,
            cache: Arc::new(Cache::default()),
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Parses `const:<complex>` (or `const:p/q`), `maclane` or `table:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "maclane" {
            return Ok(Self::maclane());
        }
        if let Some(rest) = spec.strip_prefix("const:") {
            // A real fraction `p/q` is accepted next to complex literals.
            if let Some((p, q)) = rest.split_once('/') {
                let bad = || Error::invalid(format!("invalid fraction {rest:?}"));
                let p: f64 = p.trim().parse().map_err(|_| bad())?;
                let q: f64 = q.trim().parse().map_err(|_| bad())?;
                if q == 0.0 || !(p / q).is_finite() {
                    return Err(bad());
                }
                return Self::constant(WideComplex::real(p / q));
            }
            return Self::constant(WideComplex::parse(rest)?);
        }
        if let Some(path) = spec.strip_prefix("table:") {
            return Self::load_table(Path::new(path));
        }
        Err(Error::invalid(format!(
            "unknown weight spec {spec:?}; expected const:<complex>, maclane or table:<path>"
        )))
    }

    /// Reads a JSON list of `[re, im]` pairs for `w_1, w_2, …`.
    pub fn load_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let values: Vec<WideComplex> = serde_json::from_str(&text)?;
        Self::table(values)
    }

    pub fn w(&self, n: u64) -> WideComplex {
        match &self.kind {
            _ if n == 0 => WideComplex::ONE,
            WeightKind::Const(l) => *l,
            WeightKind::MacLane => WideComplex::real(n as f64),
            WeightKind::Table(t) => t[(n as usize - 1).min(t.len() - 1)],
        }
    }

    /// `v_n = w_0 w_1 ··· w_n`.
    pub fn v(&self, n: u64) -> WideComplex {
        match &self.kind {
            WeightKind::Const(l) => l.powi(n),
            _ => self.cached_v(n),
        }
    }

    pub fn ln_abs_v(&self, n: u64) -> f64 {
        match &self.kind {
            WeightKind::Const(l) => n as f64 * l.ln_abs(),
            _ => self.cached_v(n).ln_abs(),
        }
    }

    /// `v_hi / v_lo = w_{lo+1} ··· w_hi` for `lo ≤ hi`.
    pub fn ratio(&self, hi: u64, lo: u64) -> WideComplex {
        debug_assert!(lo <= hi);
        match &self.kind {
            WeightKind::Const(l) => l.powi(hi - lo),
            _ => self.cached_v(hi) / self.cached_v(lo),
        }
    }

    /// `∏_{k=from}^{to} w_k^{1/m}` with the principal root of each `w_k`; empty products are 1.
    pub fn root_product(&self, m: u32, from: u64, to: u64) -> WideComplex {
        if from > to {
            return WideComplex::ONE;
        }
        match &self.kind {
            WeightKind::Const(l) => l.principal_root(m).powi(to - from + 1),
            // positive reals: the product of principal roots is the principal root of the product
            WeightKind::MacLane => self.ratio(to, from - 1).principal_root(m),
            WeightKind::Table(_) => {
                let prefix = self.root_prefix(m, to);
                prefix[to as usize] / prefix[from as usize - 1]
            }
        }
    }

    fn cached_v(&self, n: u64) -> WideComplex {
        let n = n as usize;
        {
            let v = self.cache.v.read().expect("weight cache poisoned");
            if n < v.len() {
                return v[n];
            }
        }
        let mut v = self.cache.v.write().expect("weight cache poisoned");
        if v.is_empty() {
            v.push(WideComplex::ONE);
        }
        while v.len() <= n {
            let k = v.len() as u64;
            let next = v[v.len() - 1] * self.w(k);
            v.push(next);
        }
        v[n]
    }

    fn root_prefix(&self, m: u32, to: u64) -> Vec<WideComplex> {
        let to = to as usize;
        {
            let roots = self.cache.roots.read().expect("weight cache poisoned");
            if let Some(p) = roots.get(&m) {
                if p.len() > to {
                    return p.clone();
                }
            }
        }
        let mut roots = self.cache.roots.write().expect("weight cache poisoned");
        let p = roots.entry(m).or_insert_with(|| vec![WideComplex::ONE]);
        while p.len() <= to {
            let k = p.len() as u64;
            let next = p[p.len() - 1] * self.w(k).principal_root(m);
            p.push(next);
        }
        p.clone()
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WeightKind::Const(l) => write!(f, "const:{l}"),
            WeightKind::MacLane => write!(f, "maclane"),
            WeightKind::Table(t) => write!(f, "table[{}]", t.len()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum WeightRepr {
    Const { lambda: WideComplex },
    Maclane,
    Table { values: Vec<WideComplex> },
}

impl Serialize for WeightSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match &self.kind {
            WeightKind::Const(l) => WeightRepr::Const { lambda: *l },
            WeightKind::MacLane => WeightRepr::Maclane,
            WeightKind::Table(t) => WeightRepr::Table { values: t.clone() },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = match WeightRepr::deserialize(d)? {
            WeightRepr::Const { lambda } => WeightSpec::constant(lambda),
            WeightRepr::Maclane => Ok(WeightSpec::maclane()),
            WeightRepr::Table { values } => WeightSpec::table(values),
        };
        w.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maclane_products_are_factorials() {
        let w = WeightSpec::maclane();
        let (re, _) = w.v(10).to_f64_parts();
        assert_eq!(re, 3_628_800.0);
        assert_eq!(w.w(0), WideComplex::ONE);
        let (r, _) = w.ratio(5, 3).to_f64_parts();
        assert_eq!(r, 20.0);
    }

    #[test]
    fn constant_ratio_and_roots() {
        let w = WeightSpec::constant(WideComplex::real(4.0)).unwrap();
        let (r, _) = w.root_product(2, 1, 2).to_f64_parts();
        assert!((r - 4.0).abs() < 1e-15);
        assert!((w.ln_abs_v(3) - 3.0 * 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn table_repeats_last_entry_and_rejects_zero() {
        let w = WeightSpec::table(vec![WideComplex::real(2.0), WideComplex::real(3.0)]).unwrap();
        assert_eq!(w.w(7), WideComplex::real(3.0));
        let (v, _) = w.v(3).to_f64_parts();
        assert_eq!(v, 18.0);
        let root = w.root_product(2, 1, 3);
        assert!(WideComplex::rel_diff(root.powi(2), WideComplex::real(18.0)) < 1e-14);
        assert!(WeightSpec::table(vec![WideComplex::ZERO]).is_err());
        assert!(WeightSpec::constant(WideComplex::ZERO).is_err());
    }

    #[test]
    fn parse_and_serde() {
        let w = WeightSpec::parse("const:2").unwrap();
        assert_eq!(w, WeightSpec::constant(WideComplex::real(2.0)).unwrap());
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"kind":"const","lambda":[2.0,0.0]}"#);
        let back: WeightSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert_eq!(WeightSpec::parse("maclane").unwrap(), WeightSpec::maclane());
        assert!(WeightSpec::parse("const:0").is_err());
        assert_eq!(
            WeightSpec::parse("const:1/2").unwrap(),
            WeightSpec::constant(WideComplex::real(0.5)).unwrap()
        );
        assert!(WeightSpec::parse("const:1/0").is_err());
        assert!(WeightSpec::parse("bogus").is_err());
    }
}
