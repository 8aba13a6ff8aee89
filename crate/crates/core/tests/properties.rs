use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use ruban::classify::{classify_rational, RationalKind};
use ruban::expansion::{
    eval_finite, eval_with_tail, expand_rational, mirror_ratio, padic_errors, Convergents, Tail,
};
use ruban::padic::{hensel_digits, padic_sqrt, pfloor, vp, Branch, Prime, SpElement, Valuation};
use ruban::transcendence::{materialize, period_scan, telescope_check, Block, Generator, QuasiPeriodicSpec};

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![2u64, 3, 5, 7]).prop_map(|p| Prime::new(p).unwrap())
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-1_000_000i64..=1_000_000, 1i64..=1_000_000).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn abs_p(x: &BigRational, p: Prime) -> BigRational {
    vp(x, p).abs_value(p)
}

/// `u / p^j` with `j ∈ 1..=3`, `p ∤ u`, `0 < u < p^(j+1)`.
fn strict(p: Prime) -> impl Strategy<Value = SpElement> {
    (1u32..=3, any::<u64>()).prop_map(move |(j, n)| {
        let top = p.pow(j as u64 + 1);
        let mut u = BigInt::from(n) % &top;
        if (&u % p.get()).is_zero() {
            u += 1;
        }
        SpElement::new(BigRational::new(u, p.pow(j as u64)), p).unwrap()
    })
}

/// Any element of `S_p`, zero included.
fn any_sp(p: Prime) -> impl Strategy<Value = SpElement> {
    (0u32..=2, any::<u64>()).prop_map(move |(j, n)| {
        let u = BigInt::from(n) % p.pow(j as u64 + 1);
        SpElement::new(BigRational::new(u, p.pow(j as u64)), p).unwrap()
    })
}

fn quotient_list(max_len: usize) -> impl Strategy<Value = (Prime, Vec<SpElement>)> {
    prime().prop_flat_map(move |p| {
        (any_sp(p), prop::collection::vec(strict(p), 0..max_len)).prop_map(move |(a0, rest)| {
            let mut v = vec![a0];
            v.extend(rest);
            (p, v)
        })
    })
}

#[test]
fn r_bound_needs_zero_leading_quotient() {
    // 1/2 = [3, 23/5, 24/5, …] in Q_5 has r_0 = 3 > |3|_5 = 1
    let p = Prime::new(5).unwrap();
    let e = expand_rational(&BigRational::new(1.into(), 2.into()), p, 100).unwrap();
    let c = e.convergents();
    assert_eq!(c.r(0), BigRational::from_integer(3.into()));
    assert!(c.r(0) > abs_p(&c.r(0), p));
    assert!(c.q(1) <= abs_p(&c.q(1), p));
}

fn product_abs(quotients: &[SpElement], p: Prime) -> BigRational {
    quotients.iter().map(|a| abs_p(a.value(), p)).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn floor_is_idempotent_and_leaves_a_small_remainder(x in rational(), p in prime()) {
        let f = pfloor(&x, p);
        prop_assert_eq!(pfloor(f.value(), p), f.clone());
        prop_assert!(!f.value().is_negative());
        prop_assert!(f.value() < &BigRational::from_integer(p.big()));
        let rest = &x - f.value();
        match vp(&rest, p) {
            Valuation::Infinite => {}
            Valuation::Finite(v) => prop_assert!(v >= 1),
        }
    }

    #[test]
    fn hensel_digits_recombine(x in rational(), p in prime(), lo in -4i64..=0, width in 1i64..12) {
        let hi = lo + width;
        let digits = hensel_digits(&x, p, lo, hi);
        prop_assert_eq!(digits.len() as i64, width + 1);
        prop_assert!(digits.iter().all(|&c| c < p.get()));
        let partial: BigRational = digits
            .iter()
            .enumerate()
            .map(|(i, &c)| BigRational::from_integer(c.into()) * p.pow_rational(lo + i as i64))
            .sum();
        // the truncation agrees with x up to p^hi whenever x has no digits below lo
        if matches!(vp(&x, p), Valuation::Finite(v) if v >= lo) {
            match vp(&(&x - &partial), p) {
                Valuation::Infinite => {}
                Valuation::Finite(v) => prop_assert!(v > hi),
            }
        }
    }

    #[test]
    fn square_roots_refine(d in -300i64..300, p in prime(), k in 1u32..20, extra in 1u32..10, b in any::<bool>()) {
        let d = BigInt::from(d);
        let branch = if b { Branch::A } else { Branch::B };
        let Ok(root) = padic_sqrt(&d, p, k, branch) else { return Ok(()); };
        let finer = padic_sqrt(&d, p, k + extra, branch).unwrap();
        let m = p.pow(k as u64);
        prop_assert_eq!(finer.residue().mod_floor(&m), root.residue().clone());
        prop_assert_eq!((root.residue() * root.residue() - &d).mod_floor(&m), BigInt::zero());
    }

    #[test]
    fn convergent_identities((p, qs) in quotient_list(40)) {
        let c = Convergents::from_quotients(p, &qs);
        for n in 0..qs.len() as i64 {
            // recurrence and determinant
            prop_assert_eq!(c.value(n), eval_finite(&qs[..=n as usize]).unwrap());
            let det = c.r(n - 1) * c.q(n) - c.r(n) * c.q(n - 1);
            let sign = if n % 2 == 0 { BigRational::one() } else { -BigRational::one() };
            prop_assert_eq!(det, sign);
            prop_assert!(c.q(n).is_positive());
            prop_assert!(!c.r(n).is_negative());
            // archimedean values never exceed p-adic ones; for r_n only when a_0 = 0
            prop_assert!(c.q(n) <= abs_p(&c.q(n), p));
            if qs[0].is_zero() {
                prop_assert!(c.r(n) <= abs_p(&c.r(n), p));
            }
            if n >= 1 {
                let i = n as usize;
                // norm of q_n
                prop_assert_eq!(abs_p(&c.q(n), p), product_abs(&qs[1..=i], p));
                // norm of r_n
                if !qs[0].is_zero() {
                    prop_assert_eq!(abs_p(&c.r(n), p), product_abs(&qs[..=i], p));
                } else if n == 1 {
                    prop_assert_eq!(abs_p(&c.r(1), p), BigRational::one());
                } else {
                    prop_assert_eq!(abs_p(&c.r(n), p), product_abs(&qs[2..=i], p));
                }
            }
        }
    }

    #[test]
    fn tail_evaluation_matches_convergents((p, qs) in quotient_list(20), lam in strict(Prime::new(5).unwrap())) {
        // tail evaluation with a rational λ of any sign
        let lam = lam.value() * BigRational::from_integer(p.big()) - BigRational::one();
        prop_assume!(!lam.is_zero());
        let c = Convergents::from_quotients(p, &qs);
        let n = qs.len() as i64 - 1;
        let den = &lam * c.q(n) + c.q(n - 1);
        prop_assume!(!den.is_zero());
        let expected = (&lam * c.r(n) + c.r(n - 1)) / den;
        prop_assert_eq!(eval_with_tail(&qs, &lam).unwrap(), expected);
    }

    #[test]
    fn shared_prefix_bounds_distance(
        (p, qs) in quotient_list(12),
        tail_a in prop::collection::vec(0usize..100, 1..5),
        tail_b in prop::collection::vec(0usize..100, 1..5),
    ) {
        // two Ruban expansions agreeing in a_0 … a_n
        let pick = |seed: &[usize]| -> Vec<SpElement> {
            seed.iter().map(|&s| {
                let j = 1 + (s % 2) as u64;
                let mut u = BigInt::from(s as u64 + 1) % p.pow(j + 1);
                if (&u % p.get()).is_zero() { u += 1; }
                SpElement::new(BigRational::new(u, p.pow(j)), p).unwrap()
            }).collect()
        };
        let a: Vec<_> = qs.iter().cloned().chain(pick(&tail_a)).collect();
        let b: Vec<_> = qs.iter().cloned().chain(pick(&tail_b)).collect();
        let c = Convergents::from_quotients(p, &qs);
        let n = qs.len() as i64 - 1;
        let diff = eval_finite(&a).unwrap() - eval_finite(&b).unwrap();
        let bound = abs_p(&c.q(n), p);
        prop_assert!(abs_p(&diff, p) * &bound * &bound <= BigRational::one());
    }

    #[test]
    fn rationals_classify_and_reconstruct(x in rational(), p in prime()) {
        let v = classify_rational(&x, p, 10_000).unwrap();
        prop_assert_eq!(v.reconstruct().unwrap(), x.clone());
        let e = expand_rational(&x, p, 10_000).unwrap();
        prop_assert!(matches!(e.tail(), Tail::Terminated | Tail::PeriodicAllPMinus));
        prop_assert_eq!(v.kind == RationalKind::Finite, *e.tail() == Tail::Terminated);
    }

    #[test]
    fn predicted_errors_are_exact(x in rational(), p in prime()) {
        // error identity with the all-(p - 1/p) tail continued where present
        let e = expand_rational(&x, p, 10_000).unwrap();
        let known = e.extended(60).len();
        prop_assume!(known >= 2);
        for check in padic_errors(&e, known - 1).unwrap() {
            prop_assert!(check.matches(), "n = {}: {:?}", check.n, check);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mirror_formula((p, qs) in quotient_list(101)) {
        let c = Convergents::from_quotients(p, &qs);
        for m in 1..qs.len() {
            let mirrored = eval_finite(&mirror_ratio(&qs, m).unwrap()).unwrap();
            prop_assert_eq!(mirrored, c.q(m as i64) / c.q(m as i64 - 1));
        }
    }

    #[test]
    fn tabulated_specs_materialise_and_telescope(
        p in prime(),
        raw in prop::collection::vec((1usize..4, 1usize..3, 0u8..3, any::<u16>()), 1..6),
    ) {
        let pm = SpElement::p_minus_inverse(p);
        let inv = SpElement::inverse_power(p, 1);
        let inv2 = SpElement::inverse_power(p, 2);
        let mut n = 1;
        let mut blocks = Vec::new();
        for (lambda, k, sym, gap) in raw {
            let contents: Vec<SpElement> = (0..k)
                .map(|s| match (sym as usize + s) % 3 { 0 => pm.clone(), 1 => inv.clone(), _ => inv2.clone() })
                .collect();
            let b = Block { n, lambda, contents };
            n = b.end() + (gap % 2) as usize;
            blocks.push(b);
        }
        let end = blocks.last().unwrap().end();
        let spec = QuasiPeriodicSpec::new(p, vec![SpElement::zero(p)], Some(inv.clone()), Generator::Tabulated { blocks: blocks.clone() }).unwrap();
        let seq = materialize(&spec, end).unwrap();
        for b in &blocks {
            for m in b.n..b.n + (b.lambda - 1) * b.k() {
                prop_assert_eq!(&seq[m + b.k()], &seq[m]);
            }
        }
        let report = telescope_check(&spec, blocks.len() - 1).unwrap();
        prop_assert!(report.all_exact());
    }

    #[test]
    fn period_scan_is_sound(
        prefix in prop::collection::vec(0u8..3, 0..20),
        body in prop::collection::vec(0u8..3, 1..6),
        reps in 1usize..30,
        noise in prop::collection::vec(0u8..3, 0..40),
    ) {
        let p = Prime::new(3).unwrap();
        let alphabet = [SpElement::p_minus_inverse(p), SpElement::inverse_power(p, 1), SpElement::inverse_power(p, 2)];
        let mut codes = prefix;
        for _ in 0..reps { codes.extend(&body); }
        codes.extend(noise);
        let seq: Vec<SpElement> = codes.iter().map(|&c| alphabet[c as usize].clone()).collect();
        if let Some((k, l)) = period_scan(&seq) {
            prop_assert!(l >= 1 && k <= seq.len() / 2);
            for n in k..seq.len() - l {
                prop_assert_eq!(&seq[n + l], &seq[n]);
            }
        }
    }
}
