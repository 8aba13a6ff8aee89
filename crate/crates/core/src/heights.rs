//! Values and heights of ultimately periodic Ruban continued fractions.
//!
//! The periodic value `η = [a_0, …, a_{h-1}, overline(a_h … a_{h+k-1})]`
//! satisfies `Aη² + Bη + C = 0` with `A`, `B`, `C` built from the convergents
//! at `h-2, h-1, h+k-2, h+k-1`. The value is recovered as an exact rational or
//! as a primitive integer quadratic with a p-adic root selector.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Result, RubanError};
use crate::expansion::{validate_quotients, Convergents};
use crate::padic::{self, padic_sqrt, vp, Branch, Prime, SpElement, Valuation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicSpec {
    p: Prime,
    preperiod: Vec<SpElement>,
    period: Vec<SpElement>,
}

impl PeriodicSpec {
    pub fn new(p: Prime, preperiod: Vec<SpElement>, period: Vec<SpElement>) -> Result<Self> {
        if preperiod.is_empty() || period.is_empty() {
            return Err(RubanError::InvalidInput(
                "preperiod and period must both be nonempty".into(),
            ));
        }
        let all: Vec<SpElement> = preperiod.iter().chain(period.iter()).cloned().collect();
        validate_quotients(p, &all)?;
        Ok(PeriodicSpec { p, preperiod, period })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Preperiod length `h` (including `a_0`).
    pub fn h(&self) -> usize {
        self.preperiod.len()
    }

    pub fn k(&self) -> usize {
        self.period.len()
    }

    pub fn preperiod(&self) -> &[SpElement] {
        &self.preperiod
    }

    pub fn period(&self) -> &[SpElement] {
        &self.period
    }

    pub fn quotient(&self, i: usize) -> &SpElement {
        if i < self.h() {
            &self.preperiod[i]
        } else {
            &self.period[(i - self.h()) % self.k()]
        }
    }

    /// The first `n` quotients of the infinite expansion.
    pub fn extended(&self, n: usize) -> Vec<SpElement> {
        (0..n).map(|i| self.quotient(i).clone()).collect()
    }

    pub fn period_is_all_p_minus(&self) -> bool {
        let t = SpElement::p_minus_inverse(self.p);
        self.period.iter().all(|a| a == &t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticCoeffs {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
}

impl QuadraticCoeffs {
    pub fn eval(&self, x: &BigRational) -> BigRational {
        &self.a * x * x + &self.b * x + &self.c
    }
}

pub fn quadratic_coeffs(spec: &PeriodicSpec) -> QuadraticCoeffs {
    let (h, k) = (spec.h() as i64, spec.k() as i64);
    let conv = Convergents::from_quotients(spec.p, &spec.extended((h + k) as usize));
    let (q, r) = (|n| conv.q(n), |n| conv.r(n));
    let (i0, i1, j0, j1) = (h - 2, h - 1, h + k - 2, h + k - 1);
    QuadraticCoeffs {
        a: q(i0) * q(j1) - q(i1) * q(j0),
        b: q(i1) * r(j0) + r(i1) * q(j0) - r(i0) * q(j1) - q(i0) * r(j1),
        c: r(i0) * r(j1) - r(i1) * r(j0),
    }
}

/// Primitive integer polynomial, leading coefficient first, leading coefficient positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPoly(Vec<BigInt>);

impl IntPoly {
    /// Clears denominators, divides out the content and fixes the sign.
    pub fn primitive_from(coeffs: &[BigRational]) -> Result<Self> {
        let start = coeffs
            .iter()
            .position(|c| !c.is_zero())
            .ok_or_else(|| RubanError::Degenerate("zero polynomial".into()))?;
        let coeffs = &coeffs[start..];
        let lcm = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut ints: Vec<BigInt> = coeffs.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
        let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if ints[0].is_negative() { -BigInt::one() } else { BigInt::one() };
        for c in ints.iter_mut() {
            *c = &*c / &content * &sign;
        }
        Ok(IntPoly(ints))
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn height(&self) -> BigInt {
        self.0.iter().map(|c| c.abs()).max().expect("nonempty")
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0
            .iter()
            .fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match d - i {
                0 => c.to_string(),
                1 => format!("{c}X"),
                e => format!("{c}X^{e}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraicValue {
    Rational(BigRational),
    /// The root `(-b + √Δ)/(2a)` of `aX² + bX + c`, where `√Δ` is the p-adic
    /// square root of the discriminant on `branch`.
    Quadratic { p: Prime, poly: IntPoly, branch: Branch },
}

impl AlgebraicValue {
    pub fn minimal_polynomial(&self) -> IntPoly {
        match self {
            AlgebraicValue::Rational(x) => {
                IntPoly(vec![x.denom().clone(), -x.numer().clone()])
            }
            AlgebraicValue::Quadratic { poly, .. } => poly.clone(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            AlgebraicValue::Rational(_) => 1,
            AlgebraicValue::Quadratic { .. } => 2,
        }
    }

    pub fn discriminant(&self) -> Option<BigInt> {
        match self {
            AlgebraicValue::Rational(_) => None,
            AlgebraicValue::Quadratic { poly, .. } => Some(discriminant(poly)),
        }
    }

    /// Rational approximation accurate to p-adic valuation at least `precision`.
    pub fn padic_approximation(&self, precision: i64) -> Result<BigRational> {
        match self {
            AlgebraicValue::Rational(x) => Ok(x.clone()),
            AlgebraicValue::Quadratic { p, poly, branch } => {
                let c = poly.coeffs();
                let two_a = BigInt::from(2) * &c[0];
                let va = padic::int_vp(&two_a, *p).finite().expect("a ≠ 0");
                let k = (precision + va).max(1) as u32;
                let root = padic_sqrt(&discriminant(poly), *p, k, *branch)?;
                Ok(BigRational::new(-&c[1] + root.residue(), two_a))
            }
        }
    }
}

fn discriminant(poly: &IntPoly) -> BigInt {
    let c = poly.coeffs();
    &c[1] * &c[1] - BigInt::from(4) * &c[0] * &c[2]
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Convergent index `N ≥ h + 3k` and the valuation of `η - r_N/q_N`, raised in
/// steps of `k` until that valuation exceeds `separation`.
fn proximity_convergent(spec: &PeriodicSpec, separation: i64) -> (BigRational, i64) {
    let mut n = spec.h() + 3 * spec.k();
    loop {
        let quotients = spec.extended(n + 2);
        let conv = Convergents::from_quotients(spec.p, &quotients[..=n]);
        let va = quotients[n + 1].valuation().finite().expect("strict quotient");
        let vq = conv.q_valuation(n as i64).finite().expect("q_n ≠ 0");
        let err = -va - 2 * vq;
        if err > separation {
            return (conv.value(n as i64), err);
        }
        n += spec.k();
    }
}

fn finite(v: Valuation) -> i64 {
    v.finite().unwrap_or(i64::MAX)
}

pub fn periodic_value(spec: &PeriodicSpec) -> Result<AlgebraicValue> {
    let p = spec.p;
    let co = quadratic_coeffs(spec);
    if co.a.is_zero() {
        if co.b.is_zero() {
            return Err(RubanError::Degenerate("A = B = 0".into()));
        }
        return Ok(AlgebraicValue::Rational(-&co.c / &co.b));
    }
    let poly = IntPoly::primitive_from(&[co.a, co.b, co.c])?;
    let c = poly.coeffs();
    let disc = discriminant(&poly);
    let two_a = BigInt::from(2) * &c[0];
    if let Some(s) = exact_sqrt(&disc) {
        let r1 = BigRational::new(-&c[1] + &s, two_a.clone());
        let r2 = BigRational::new(-&c[1] - &s, two_a);
        if r1 == r2 {
            return Ok(AlgebraicValue::Rational(r1));
        }
        let sep = finite(vp(&(&r1 - &r2), p));
        let (approx, err) = proximity_convergent(spec, sep);
        let pick = [r1, r2]
            .into_iter()
            .find(|r| finite(vp(&(r - &approx), p)) == err);
        return pick
            .map(AlgebraicValue::Rational)
            .ok_or_else(|| RubanError::Degenerate("no rational root matches the expansion".into()));
    }
    if !padic::is_padic_square(&disc, p) {
        return Err(RubanError::Degenerate(format!(
            "discriminant {disc} has no square root in Q_{p}"
        )));
    }
    // the conjugates differ by √Δ/a
    let sep = padic::int_vp(&disc, p).finite().unwrap() / 2 - finite(padic::int_vp(&c[0], p));
    let (approx, err) = proximity_convergent(spec, sep);
    for branch in [Branch::A, Branch::B] {
        let v = AlgebraicValue::Quadratic {
            p,
            poly: poly.clone(),
            branch,
        };
        let x = v.padic_approximation(err + 8)?;
        if finite(vp(&(x - &approx), p)) == err {
            return Ok(v);
        }
    }
    Err(RubanError::Degenerate("no conjugate matches the expansion".into()))
}

pub fn primitive_height(v: &AlgebraicValue) -> BigInt {
    v.minimal_polynomial().height()
}

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl HeightInterval {
    pub fn exact(x: BigRational) -> Self {
        HeightInterval { lo: x.clone(), hi: x }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn relative_width(&self) -> f64 {
        let w = (&self.hi - &self.lo) / &self.lo;
        ratio_to_f64(&w)
    }

    pub fn midpoint_f64(&self) -> f64 {
        ratio_to_f64(&((&self.lo + &self.hi) / BigRational::from_integer(2.into())))
    }
}

pub(crate) fn ratio_to_f64(x: &BigRational) -> f64 {
    // scale to keep the division in range for large numerators
    let (n, d) = (x.numer(), x.denom());
    let shift = (n.bits() as i64).max(d.bits() as i64) - 60;
    let (n, d) = if shift > 0 {
        (n >> shift as usize, d >> shift as usize)
    } else {
        (n.clone(), d.clone())
    };
    let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
    nf / df
}

/// Decimal string with `digits` fractional digits, rounded down (`up = false`) or up.
pub fn decimal_bound(x: &BigRational, digits: u32, up: bool) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits as usize);
    let scaled = x * BigRational::from_integer(scale.clone());
    let n = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let sign = if n.is_negative() { "-" } else { "" };
    let n = n.abs();
    let (int, frac) = n.div_rem(&scale);
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits as usize)
}

const RELATIVE_TARGET: f64 = 1e-12;

/// Absolute height under the place normalisation that squares complex places;
/// for degree ≤ 2 this is the Mahler measure `|a| ∏ max(1, |root|)`.
pub fn absolute_height(v: &AlgebraicValue) -> HeightInterval {
    match v {
        AlgebraicValue::Rational(x) => {
            HeightInterval::exact(BigRational::from_integer(x.numer().abs().max(x.denom().clone())))
        }
        AlgebraicValue::Quadratic { poly, .. } => {
            let c = poly.coeffs();
            let disc = discriminant(poly);
            if disc.is_negative() {
                // complex pair: |β|² = c/a, so the one place contributes max(a, c)
                HeightInterval::exact(BigRational::from_integer(c[0].clone().max(c[2].clone())))
            } else {
                real_quadratic_measure(&c[0], &c[1], &disc)
            }
        }
    }
}

fn abs_interval(lo: BigRational, hi: BigRational) -> (BigRational, BigRational) {
    if !lo.is_negative() {
        (lo, hi)
    } else if !hi.is_positive() {
        (-hi, -lo)
    } else {
        (BigRational::zero(), (-lo).max(hi))
    }
}

fn real_quadratic_measure(a: &BigInt, b: &BigInt, disc: &BigInt) -> HeightInterval {
    let one = BigRational::one();
    let a_r = BigRational::from_integer(a.clone());
    let two_a = BigRational::from_integer(BigInt::from(2) * a);
    let mb = BigRational::from_integer(-b.clone());
    let mut digits = 20usize;
    loop {
        let scale = num_traits::pow(BigInt::from(10), digits);
        let s = (disc * &scale * &scale).sqrt();
        let denom = BigRational::from_integer(scale);
        let s_lo = BigRational::from_integer(s.clone()) / &denom;
        let s_hi = BigRational::from_integer(s + 1) / &denom;
        let plus = abs_interval((&mb + &s_lo) / &two_a, (&mb + &s_hi) / &two_a);
        let minus = abs_interval((&mb - &s_hi) / &two_a, (&mb - &s_lo) / &two_a);
        let lo = &a_r * plus.0.max(one.clone()) * minus.0.max(one.clone());
        let hi = &a_r * plus.1.max(one.clone()) * minus.1.max(one.clone());
        let out = HeightInterval { lo, hi };
        if out.relative_width() < RELATIVE_TARGET {
            return out;
        }
        digits *= 2;
    }
}

/// Outcome of an inequality checked against an enclosing interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCheck {
    Holds,
    /// Undecided by the interval, which is narrower than the relative tolerance.
    HoldsWithinTolerance,
    Fails,
}

impl BoundCheck {
    pub fn holds(self) -> bool {
        !matches!(self, BoundCheck::Fails)
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundCheck::Holds => "holds",
            BoundCheck::HoldsWithinTolerance => "holds-within-tolerance",
            BoundCheck::Fails => "fails",
        }
    }
}

pub const RELATION_TOLERANCE: f64 = 1e-9;

/// `x ≤ bound` for `x` enclosed in `[lo, hi]`.
fn check_upper(lo: &BigRational, hi: &BigRational, bound: &BigRational) -> BoundCheck {
    if hi <= bound {
        BoundCheck::Holds
    } else if lo > bound {
        BoundCheck::Fails
    } else if ratio_to_f64(&((hi - lo) / bound)) <= RELATION_TOLERANCE {
        BoundCheck::HoldsWithinTolerance
    } else {
        BoundCheck::Fails
    }
}

/// The two relations between primitive and absolute height for degree `d`:
/// `H̄ ≤ (d+1)^(1/2) H` and `H ≤ 2^d H̄`.
pub fn height_relations(primitive: &BigInt, absolute: &HeightInterval, degree: usize) -> (BoundCheck, BoundCheck) {
    let h = BigRational::from_integer(primitive.clone());
    // squared form avoids the irrational square root
    let upper = check_upper(
        &(&absolute.lo * &absolute.lo),
        &(&absolute.hi * &absolute.hi),
        &(BigRational::from_integer(BigInt::from(degree + 1)) * &h * &h),
    );
    let scale = BigRational::from_integer(BigInt::from(1u64 << degree));
    // H ≤ 2^d H̄  ⟺  H/2^d ≤ H̄, i.e. -H̄ ≤ -H/2^d
    let lower = check_upper(&-&absolute.hi, &-&absolute.lo, &-(h / scale));
    (upper, lower)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaCase {
    RationalPreperiodOne,
    RationalLongPreperiod,
    Quadratic,
}

impl LemmaCase {
    pub fn name(self) -> &'static str {
        match self {
            LemmaCase::RationalPreperiodOne => "rational-h1",
            LemmaCase::RationalLongPreperiod => "rational-h2plus",
            LemmaCase::Quadratic => "quadratic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeightReport {
    pub value: AlgebraicValue,
    pub h: usize,
    pub k: usize,
    pub primitive: BigInt,
    pub absolute: HeightInterval,
    pub lemma_case: LemmaCase,
    /// Right-hand side of the primitive-height bound for this case.
    pub lemma_bound: BigInt,
    pub lemma_holds: bool,
    /// `H = p` in the `h = 1` rational case.
    pub h1_equality: Option<bool>,
    /// `|q_{h+k-1}|_p² · A`, `· B`, `· C` are integers.
    pub integrality: bool,
    /// `H = H̄` for rational values.
    pub rational_heights_agree: Option<bool>,
    pub relation_upper: BoundCheck,
    pub relation_lower: BoundCheck,
}

impl HeightReport {
    pub fn all_hold(&self) -> bool {
        self.lemma_holds
            && self.h1_equality.unwrap_or(true)
            && self.integrality
            && self.rational_heights_agree.unwrap_or(true)
            && self.relation_upper.holds()
            && self.relation_lower.holds()
    }
}

/// Value, heights and every height inequality for a spec with `a_0 = 0`.
pub fn bound_report(spec: &PeriodicSpec) -> Result<HeightReport> {
    if !spec.quotient(0).is_zero() {
        return Err(RubanError::HypothesisViolated(format!(
            "a_0 = {} but the height bounds need a_0 = 0",
            spec.quotient(0)
        )));
    }
    let p = spec.p;
    let (h, k) = (spec.h(), spec.k());
    let value = periodic_value(spec)?;
    let primitive = primitive_height(&value);
    let absolute = absolute_height(&value);
    let conv = Convergents::from_quotients(p, &spec.extended(h + k));
    let abs_q = |n: i64| -> BigInt {
        let v = conv.q_valuation(n).finite().expect("q_n ≠ 0");
        if v <= 0 {
            p.pow((-v) as u64)
        } else {
            BigInt::one()
        }
    };
    let (lemma_case, lemma_bound) = match (&value, h) {
        (AlgebraicValue::Rational(_), 1) => (LemmaCase::RationalPreperiodOne, p.big()),
        (AlgebraicValue::Rational(_), _) => {
            let a = abs_q(h as i64 - 1);
            (LemmaCase::RationalLongPreperiod, &a * &a)
        }
        (AlgebraicValue::Quadratic { .. }, _) => {
            let a = abs_q((h + k) as i64 - 1);
            (LemmaCase::Quadratic, BigInt::from(2) * num_traits::pow(a, 4))
        }
    };
    let lemma_holds = primitive <= lemma_bound;
    let h1_equality = (lemma_case == LemmaCase::RationalPreperiodOne).then(|| primitive == p.big());
    let co = quadratic_coeffs(spec);
    let scale = {
        let a = abs_q((h + k) as i64 - 1);
        BigRational::from_integer(&a * &a)
    };
    let integrality = [&co.a, &co.b, &co.c].iter().all(|x| (*x * &scale).is_integer());
    let rational_heights_agree = match &value {
        AlgebraicValue::Rational(_) => Some(absolute.is_exact() && absolute.lo == BigRational::from_integer(primitive.clone())),
        _ => None,
    };
    let (relation_upper, relation_lower) = height_relations(&primitive, &absolute, value.degree());
    Ok(HeightReport {
        value,
        h,
        k,
        primitive,
        absolute,
        lemma_case,
        lemma_bound,
        lemma_holds,
        h1_equality,
        integrality,
        rational_heights_agree,
        relation_upper,
        relation_lower,
    })
}

/// A random strict partial quotient `N/p^j` with `j ∈ {1, …, max_neg_valuation}`.
pub fn random_strict_quotient<R: Rng>(rng: &mut R, p: Prime, max_neg_valuation: u32) -> SpElement {
    let j = rng.gen_range(1..=max_neg_valuation);
    let pu = p.get();
    let upper = p.pow(j as u64 + 1);
    loop {
        // N ∈ [1, p^(j+1)) prime to p keeps N/p^j in (0, p) with valuation -j
        let n = BigInt::from(rng.gen::<u64>()) % &upper;
        if (&n % pu).is_zero() {
            continue;
        }
        return SpElement::new(BigRational::new_raw(n, p.pow(j as u64)), p).expect("strict quotient");
    }
}

/// A random spec with `a_0 = 0`, `h ≤ max_h`, `k ≤ max_k` and `|a_i|_p ≤ p²`.
/// Roughly a quarter of the specs get an all-`(p - 1/p)` period, whose value is rational.
pub fn random_periodic_spec<R: Rng>(rng: &mut R, p: Prime, max_h: usize, max_k: usize) -> PeriodicSpec {
    let h = rng.gen_range(1..=max_h);
    let k = rng.gen_range(1..=max_k);
    let mut pre = vec![SpElement::zero(p)];
    pre.extend((1..h).map(|_| random_strict_quotient(rng, p, 2)));
    let period = if rng.gen_bool(0.25) {
        vec![SpElement::p_minus_inverse(p); k]
    } else {
        (0..k).map(|_| random_strict_quotient(rng, p, 2)).collect()
    };
    PeriodicSpec::new(p, pre, period).expect("generated quotients are strict")
}
