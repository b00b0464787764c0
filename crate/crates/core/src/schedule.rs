//! Round orderings `r ↔ (m, l)` and `r ↔ (m, l, ν)`, and the cycling target schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::FiniteSeq;

/// The coordinates of one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub m: u32,
    pub l: u64,
    /// Column index, only for the triple ordering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Diagonals `m + l = d`, `m` ascending within a diagonal.
    Cantor,
    /// Layers `m + l + ν = S`, lexicographic within a layer.
    Triple,
}

fn tri(d: u64) -> u64 {
    d * (d + 1) / 2
}

fn tetra(s: u64) -> u64 {
    // C(s, 3)
    if s < 3 {
        0
    } else {
        s * (s - 1) * (s - 2) / 6
    }
}

impl Pairing {
    /// Round `r ≥ 1` to its slot.
    pub fn slot(self, r: u64) -> Slot {
        assert!(r >= 1, "rounds start at 1");
        match self {
            Pairing::Cantor => {
                // d - 1 is the smallest k with tri(k) ≥ r
                let mut k = ((((8 * r) as f64 + 1.0).sqrt() - 1.0) / 2.0).floor() as u64;
                while tri(k) < r {
                    k += 1;
                }
                while k > 0 && tri(k - 1) >= r {
                    k -= 1;
                }
                let d = k + 1;
                let m = r - tri(d - 2);
                Slot {
                    m: m as u32,
                    l: d - m,
                    nu: None,
                }
            }
            Pairing::Triple => {
                let mut s = ((6.0 * r as f64).cbrt()).floor() as u64;
                while tetra(s) < r {
                    s += 1;
                }
                while s > 3 && tetra(s - 1) >= r {
                    s -= 1;
                }
                let mut o = r - tetra(s - 1);
                let mut m = 1;
                while o > s - m - 1 {
                    o -= s - m - 1;
                    m += 1;
                }
                let l = o;
                Slot {
                    m: m as u32,
                    l,
                    nu: Some(s - m - l),
                }
            }
        }
    }

    /// Inverse of [`Pairing::slot`].
    pub fn round(self, slot: Slot) -> Result<u64> {
        let (m, l) = (slot.m as u64, slot.l);
        if m == 0 || l == 0 {
            return Err(Error::invalid("slot coordinates start at 1"));
        }
        match (self, slot.nu) {
            (Pairing::Cantor, None) => {
                let d = m + l;
                Ok(tri(d - 2) + m)
            }
            (Pairing::Triple, Some(nu)) if nu >= 1 => {
                let s = m + l + nu;
                let before_m: u64 = (1..m).map(|mm| s - mm - 1).sum();
                Ok(tetra(s - 1) + before_m + l)
            }
            _ => Err(Error::invalid("slot shape does not match the pairing")),
        }
    }

    /// `d_r`: the largest `m` among rounds before `r` (0 for `r = 1`).
    pub fn d(self, r: u64) -> u32 {
        match self {
            Pairing::Cantor => {
                let s = self.slot(r);
                let diag = s.m as u64 + s.l;
                ((diag - 2) as u32).max(s.m - 1)
            }
            Pairing::Triple => (1..r).map(|t| self.slot(t).m).max().unwrap_or(0),
        }
    }
}

/// `l ↦ y^{(l)}` by cycling a finite list of base targets; with `K` classes,
/// `l` belongs to class `((l-1) mod K) + 1` and each class cycles every target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSchedule {
    pub targets: Vec<FiniteSeq>,
    pub classes: u32,
}

impl TargetSchedule {
    pub fn new(targets: Vec<FiniteSeq>, classes: u32) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::invalid("target list is empty"));
        }
        if let Some(i) = targets.iter().position(FiniteSeq::is_zero) {
            return Err(Error::invalid(format!("target {i} is zero")));
        }
        if classes == 0 {
            return Err(Error::invalid("number of classes must be at least 1"));
        }
        Ok(Self { targets, classes })
    }

    /// Index into the base list for `l ≥ 1`.
    pub fn target_index(&self, l: u64) -> usize {
        (((l - 1) / self.classes as u64) % self.targets.len() as u64) as usize
    }

    pub fn target(&self, l: u64) -> &FiniteSeq {
        &self.targets[self.target_index(l)]
    }

    /// Class `k ∈ 1..=K` of `l`.
    pub fn class(&self, l: u64) -> u32 {
        ((l - 1) % self.classes as u64) as u32 + 1
    }

    /// `s_l`, the largest nonzero index of `y^{(l)}`.
    pub fn s(&self, l: u64) -> u64 {
        self.target(l).max_index().unwrap_or(0)
    }

    /// Reads a JSON list of sequences.
    pub fn load_targets(path: &std::path::Path) -> Result<Vec<FiniteSeq>> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_first_rounds() {
        let got: Vec<(u32, u64)> = (1..=12)
            .map(|r| Pairing::Cantor.slot(r))
            .map(|s| (s.m, s.l))
            .collect();
        assert_eq!(
            got,
            vec![
                (1, 1),
                (1, 2),
                (2, 1),
                (1, 3),
                (2, 2),
                (3, 1),
                (1, 4),
                (2, 3),
                (3, 2),
                (4, 1),
                (1, 5),
                (2, 4)
            ]
        );
        let ds: Vec<u32> = (1..=7).map(|r| Pairing::Cantor.d(r)).collect();
        assert_eq!(ds, vec![0, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn cantor_d_matches_definition() {
        for r in 1..300 {
            let brute = (1..r).map(|t| Pairing::Cantor.slot(t).m).max().unwrap_or(0);
            assert_eq!(Pairing::Cantor.d(r), brute, "r = {r}");
        }
    }

    #[test]
    fn triple_first_rounds() {
        let got: Vec<(u32, u64, u64)> = (1..=8)
            .map(|r| Pairing::Triple.slot(r))
            .map(|s| (s.m, s.l, s.nu.unwrap()))
            .collect();
        assert_eq!(
            got,
            vec![
                (1, 1, 1),
                (1, 1, 2),
                (1, 2, 1),
                (2, 1, 1),
                (1, 1, 3),
                (1, 2, 2),
                (1, 3, 1),
                (2, 1, 2)
            ]
        );
    }

    #[test]
    fn pairings_round_trip() {
        for r in (1..1_000_000u64).step_by(97).chain(1..2000) {
            for p in [Pairing::Cantor, Pairing::Triple] {
                assert_eq!(p.round(p.slot(r)).unwrap(), r);
            }
        }
        assert!(Pairing::Cantor
            .round(Slot {
                m: 1,
                l: 1,
                nu: Some(1)
            })
            .is_err());
    }

    #[test]
    fn schedule_cycles_each_class() {
        let t: Vec<FiniteSeq> = (0..4).map(FiniteSeq::basis).collect();
        let s = TargetSchedule::new(t, 3).unwrap();
        assert_eq!(s.class(1), 1);
        assert_eq!(s.class(5), 2);
        // class 2 is l = 2, 5, 8, 11, ...; it visits all four targets
        let seen: Vec<usize> = [2, 5, 8, 11].iter().map(|&l| s.target_index(l)).collect();
        assert_eq!(seen, vec![0, 1, 2, 3]);
        assert!(TargetSchedule::new(vec![FiniteSeq::zero()], 1).is_err());
    }
}
