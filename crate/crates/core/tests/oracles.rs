use std::sync::OnceLock;

use hyperforge::cauchy::{self, multi_index, CauchyConfig};
use hyperforge::seq::root_power_block;
use hyperforge::verify::{self, EXPANSION_TOLERANCE};
use hyperforge::{
    AlgebraElement, Bundle, FiniteSeq, LogMag, SpaceId, SpaceSpec, WeightSpec, WideComplex,
};
use proptest::prelude::*;

fn unit_disk() -> impl Strategy<Value = WideComplex> {
    (0.0f64..1.0, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(r, t)| WideComplex::new(r * t.cos(), r * t.sin()))
}

/// Support of at most 8 indices below 16, coefficients in the unit disk.
fn seq() -> impl Strategy<Value = FiniteSeq> {
    prop::collection::btree_map(0u64..16, unit_disk(), 0..=8).prop_map(FiniteSeq::from_pairs)
}

fn spaces() -> Vec<SpaceSpec> {
    [
        SpaceId::Lp(1.0),
        SpaceId::Lp(1.5),
        SpaceId::Lp(2.0),
        SpaceId::C0,
        SpaceId::L1,
        SpaceId::EntireHadamard,
        SpaceId::EntireCauchy,
        SpaceId::OmegaCoord,
        SpaceId::OmegaCauchy,
    ]
    .into_iter()
    .map(SpaceSpec::new)
    .collect()
}

fn le(a: LogMag, b: LogMag, rel: f64) -> bool {
    a.is_zero() || a.ln_raw() <= b.ln_raw() + rel.ln_1p()
}

/// Plain `f64` coefficients, indexed densely.
fn dense(x: &FiniteSeq) -> Vec<(f64, f64)> {
    let len = x.max_index().map_or(0, |n| n as usize + 1);
    let mut out = vec![(0.0, 0.0); len];
    for (n, c) in x.iter() {
        out[n as usize] = c.to_f64_parts();
    }
    out
}

fn naive_convolution(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &(ar, ai)) in a.iter().enumerate() {
        for (j, &(br, bi)) in b.iter().enumerate() {
            out[i + j].0 += ar * br - ai * bi;
            out[i + j].1 += ar * bi + ai * br;
        }
    }
    out
}

fn modulus(x: &[(f64, f64)]) -> Vec<(f64, f64)> {
    x.iter().map(|&(r, i)| (r.hypot(i), 0.0)).collect()
}

/// `max_n |x_n - want_n| / max_n majorant_n`; the majorant is a coefficientwise
/// bound on the exact result, so cancellation does not inflate the error.
fn err_vs_majorant(x: &FiniteSeq, want: &[(f64, f64)], majorant: &[(f64, f64)]) -> f64 {
    let scale = majorant.iter().map(|m| m.0).fold(0.0, f64::max);
    let got = dense(x);
    let len = got.len().max(want.len());
    let diff = (0..len)
        .map(|n| {
            let g = got.get(n).copied().unwrap_or_default();
            let w = want.get(n).copied().unwrap_or_default();
            (g.0 - w.0).hypot(g.1 - w.1)
        })
        .fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn abs_seq(x: &FiniteSeq) -> FiniteSeq {
    FiniteSeq::from_pairs(
        x.iter()
            .map(|(n, c)| (n, WideComplex::real(c.abs().to_f64()))),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn seminorms_submultiplicative_monotone_subadditive(x in seq(), y in seq(), q in 1u32..6) {
        for space in spaces() {
            let nx = space.seminorm_upper(q, &x);
            let ny = space.seminorm_upper(q, &y);
            let xy = space.multiply(&x, &y);
            prop_assert!(le(space.seminorm_upper(q, &xy), nx * ny, 1e-10), "{space} q={q}");
            prop_assert!(le(nx, space.seminorm_upper(q + 1, &x), 1e-12), "{space} monotone");
            prop_assert!(le(space.seminorm_upper(q, &x.add(&y)), nx + ny, 1e-12), "{space} triangle");
            let v = space.seminorm_eval(q, &x);
            prop_assert!(le(v.lower, v.upper, 1e-12));
        }
    }

    #[test]
    fn cauchy_ring_laws(x in seq(), y in seq(), z in seq()) {
        let (dx, dy, dz) = (dense(&x), dense(&y), dense(&z));
        let maj3 = naive_convolution(&naive_convolution(&modulus(&dx), &modulus(&dy)), &modulus(&dz));
        let xyz = naive_convolution(&naive_convolution(&dx, &dy), &dz);
        prop_assert!(err_vs_majorant(&x.cauchy_product(&y).cauchy_product(&z), &xyz, &maj3) <= 1e-10);
        prop_assert!(err_vs_majorant(&x.cauchy_product(&y.cauchy_product(&z)), &xyz, &maj3) <= 1e-10);
        let maj2 = naive_convolution(&modulus(&dx), &modulus(&dy));
        let xy = naive_convolution(&dx, &dy);
        prop_assert!(err_vs_majorant(&y.cauchy_product(&x), &xy, &maj2) <= 1e-10);
        // distributivity: x(y+z) against xy + xz
        let lhs = x.cauchy_product(&y.add(&z));
        let rhs = x.cauchy_product(&y).add(&x.cauchy_product(&z));
        let maj = naive_convolution(&modulus(&dx), &modulus(&dense(&abs_seq(&y).add(&abs_seq(&z)))));
        prop_assert!(err_vs_majorant(&lhs, &dense(&rhs), &maj) <= 1e-10);
    }

    #[test]
    fn cauchy_power_matches_repeated_convolution(x in seq(), m in 1u32..=6) {
        let dx = dense(&x);
        let (mut want, mut maj) = (dx.clone(), modulus(&dx));
        for _ in 1..m {
            want = naive_convolution(&want, &dx);
            maj = naive_convolution(&maj, &modulus(&dx));
        }
        prop_assert!(err_vs_majorant(&x.cauchy_power(m), &want, &maj) <= 1e-10);
    }

    #[test]
    fn disjoint_supports_multiply_to_exact_zero(x in seq(), y in seq()) {
        let y = FiniteSeq::from_pairs(y.iter().filter(|(n, _)| x.get(*n).is_zero()));
        prop_assert!(x.coordinatewise_product(&y).is_zero());
    }

    #[test]
    fn backward_undoes_forward(x in seq(), a in 0u64..60, lam in unit_disk(), maclane in any::<bool>()) {
        let w = if maclane {
            WeightSpec::maclane()
        } else {
            // |λ| in [1, 2]
            let l = lam + WideComplex::real(if lam.to_f64_parts().0 >= 0.0 { 1.0 } else { -1.0 });
            prop_assume!(!l.is_zero());
            WeightSpec::constant(l).unwrap()
        };
        let back = x.forward_iterate(&w, a).backward_iterate(&w, a);
        prop_assert!(back.max_rel_diff(&x) <= 1e-12);
    }

    #[test]
    fn root_block_reproduces_target(y in seq(), a in 1u64..40, m in 1u32..5) {
        let w = WeightSpec::constant(WideComplex::new(1.5, 1.0)).unwrap();
        let blk = root_power_block(&w, &y, a, m, m).unwrap();
        prop_assert!(blk.backward_iterate(&w, a).max_rel_diff(&y) <= 1e-12);
    }

    #[test]
    fn entire_cauchy_monomials_are_exact(n in 0u64..40, q in 1u32..6, c in unit_disk()) {
        prop_assume!(!c.is_zero());
        let v = SpaceSpec::new(SpaceId::EntireCauchy).seminorm_eval(q, &FiniteSeq::monomial(n, c));
        let want = c.abs().ln_raw() + n as f64 * (q as f64).ln();
        prop_assert!((v.lower.ln_raw() - want).abs() <= 1e-12 * want.abs().max(1.0));
        prop_assert!((v.upper.ln_raw() - want).abs() <= 1e-12 * want.abs().max(1.0));
    }
}

#[test]
fn multi_index_cardinalities() {
    for mu in 1..=8u32 {
        for t in 1..=8u32 {
            let set = multi_index::enumerate(mu, t);
            assert_eq!(set.len() as u128, multi_index::card(mu, t), "μ={mu} t={t}");
            assert!(
                multi_index::card(mu, t) <= multi_index::binomial((mu + t - 1) as u64, mu as u64)
            );
            // brute force over the box [0, μ]^t
            let brute = (0..(mu as u64 + 1).pow(t))
                .filter(|code| {
                    let digits: Vec<u64> = (0..t)
                        .map(|i| code / (mu as u64 + 1).pow(i) % (mu as u64 + 1))
                        .collect();
                    digits.iter().sum::<u64>() == mu as u64 && digits[t as usize - 1] > 0
                })
                .count();
            assert_eq!(set.len(), brute);
            assert!(set
                .iter()
                .all(|a| a.iter().sum::<u32>() == mu && a[t as usize - 1] > 0));
            assert!(set.windows(2).all(|w| w[0] > w[1]));
        }
    }
}

fn bundles() -> &'static [Bundle] {
    static CELL: OnceLock<Vec<Bundle>> = OnceLock::new();
    CELL.get_or_init(|| {
        let targets = vec![
            FiniteSeq::from_reals(&[1.0]),
            FiniteSeq::from_reals(&[1.0, 1.0]),
        ];
        let space = SpaceSpec::new(SpaceId::L1);
        let weight = WeightSpec::constant(WideComplex::real(2.0)).unwrap();
        [None, Some(2)]
            .into_iter()
            .map(|k| {
                let mut cfg = CauchyConfig::new(space, weight.clone(), targets.clone(), 6);
                cfg.generators = k;
                Bundle::Cauchy(cauchy::build(&cfg).unwrap())
            })
            .collect()
    })
}

fn element(k: usize) -> impl Strategy<Value = AlgebraElement> {
    let term = (prop::collection::vec(0u32..=2, k), unit_disk());
    prop::collection::vec(term, 1..=3).prop_filter_map("needs a nonconstant term", move |terms| {
        let terms: Vec<_> = terms
            .into_iter()
            .filter(|(b, c)| b.iter().sum::<u32>() > 0 && c.abs().to_f64() > 1e-3)
            .collect();
        AlgebraElement::new(k, terms).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expansion_agrees_single_generator(z in element(1)) {
        let rep = verify::expansion_oracle(&bundles()[0], &z, 4).unwrap();
        prop_assert!(rep.max_rel_diff <= EXPANSION_TOLERANCE, "{z}: {}", rep.max_rel_diff);
        prop_assert!(rep.pass);
    }

    #[test]
    fn expansion_agrees_two_generators(z in element(2)) {
        let rep = verify::expansion_oracle(&bundles()[1], &z, 4).unwrap();
        prop_assert!(rep.max_rel_diff <= EXPANSION_TOLERANCE, "{z}: {}", rep.max_rel_diff);
        prop_assert!(rep.pass);
    }
}
