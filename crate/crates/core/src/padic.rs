//! Exact p-adic primitives over the rationals.
//!
//! Everything here works on exact [`BigRational`] values: valuations, Hensel
//! digits, the p-adic floor `⌊x⌋_p` and Hensel-lifted square roots of integer
//! radicands. No floating point is involved anywhere.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Result, RubanError};

/// A prime, certified at construction by a deterministic Miller-Rabin test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(RubanError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// `p^k` as an integer.
    pub fn pow(self, k: u64) -> BigInt {
        num_traits::pow(self.big(), k as usize)
    }

    /// `p^e` as an exact rational, for any sign of `e`.
    pub fn pow_rational(self, e: i64) -> BigRational {
        if e >= 0 {
            BigRational::from_integer(self.pow(e as u64))
        } else {
            BigRational::new_raw(BigInt::one(), self.pow(e.unsigned_abs()))
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic for every `u64` with the first twelve prime bases.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Order of `p` in a rational; `Infinite` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// `|x|_p = p^(-v)`, and `0` for the infinite valuation.
    pub fn abs_value(self, p: Prime) -> BigRational {
        match self {
            Valuation::Finite(v) => p.pow_rational(-v),
            Valuation::Infinite => BigRational::zero(),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Strips every factor `p` from a nonzero integer, returning the count and the rest.
pub(crate) fn strip_p(n: &BigInt, p: Prime) -> (u64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = p.big();
    let mut rest = n.clone();
    let mut count = 0;
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            return (count, rest);
        }
        rest = q;
        count += 1;
    }
}

pub(crate) fn int_vp(n: &BigInt, p: Prime) -> Valuation {
    if n.is_zero() {
        Valuation::Infinite
    } else {
        Valuation::Finite(strip_p(n, p).0 as i64)
    }
}

/// Decomposes `x ≠ 0` as `p^v · num/den` with `num`, `den` prime to `p`.
pub(crate) fn split_unit(x: &BigRational, p: Prime) -> (i64, BigInt, BigInt) {
    let (vn, num) = strip_p(x.numer(), p);
    let (vd, den) = strip_p(x.denom(), p);
    (vn as i64 - vd as i64, num, den)
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one(), "not invertible");
    e.x.mod_floor(m)
}

pub fn vp(x: &BigRational, p: Prime) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    Valuation::Finite(split_unit(x, p).0)
}

/// `num/den mod p^k` in `[0, p^k)` for a unit `num/den`.
fn unit_residue(num: &BigInt, den: &BigInt, modulus: &BigInt) -> BigInt {
    (num * mod_inverse(den, modulus)).mod_floor(modulus)
}

fn digits_of(mut n: BigInt, p: Prime, count: usize) -> Vec<u64> {
    let pb = p.big();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (q, r) = n.div_mod_floor(&pb);
        out.push(r.to_u64().expect("digit below p"));
        n = q;
    }
    out
}

/// Hensel digits `(c_lo, …, c_hi)` of `x`; empty when `lo > hi`.
pub fn hensel_digits(x: &BigRational, p: Prime, lo: i64, hi: i64) -> Vec<u64> {
    if lo > hi {
        return Vec::new();
    }
    let width = (hi - lo + 1) as usize;
    if x.is_zero() {
        return vec![0; width];
    }
    let (v, num, den) = split_unit(x, p);
    if hi < v {
        return vec![0; width];
    }
    let start = lo.max(v);
    let mut out = vec![0; (start - lo) as usize];
    // digits of the unit part u at positions (start - v) ..= (hi - v)
    let modulus = p.pow((hi - v + 1) as u64);
    let u = unit_residue(&num, &den, &modulus);
    let all = digits_of(u, p, (hi - v + 1) as usize);
    out.extend_from_slice(&all[(start - v) as usize..]);
    out
}

/// An element of `S_p`: a rational `∑_{n=m}^{0} c_n p^n` with `0 ≤ value < p`.
///
/// Digits are stored from position `lowest` (≤ 0) up to position 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpElement {
    p: Prime,
    value: BigRational,
    lowest: i64,
    digits: Vec<u64>,
}

impl SpElement {
    pub fn zero(p: Prime) -> Self {
        SpElement {
            p,
            value: BigRational::zero(),
            lowest: 0,
            digits: vec![0],
        }
    }

    /// Accepts `value` only if it already lies in `S_p`.
    pub fn new(value: BigRational, p: Prime) -> Result<Self> {
        let floor = pfloor(&value, p);
        if floor.value == value {
            Ok(floor)
        } else {
            Err(RubanError::InvalidInput(format!(
                "{} is not a p-adic floor value for p = {p}",
                crate::fraction::format_fraction(&value)
            )))
        }
    }

    /// Builds `∑ digits[i] p^(lowest + i)`; `digits` must end at position 0.
    pub fn from_digits(p: Prime, lowest: i64, digits: &[u64]) -> Result<Self> {
        if lowest > 0 || digits.len() as i64 != 1 - lowest {
            return Err(RubanError::InvalidInput(
                "digit window must run from lowest ≤ 0 to position 0".into(),
            ));
        }
        if digits.iter().any(|&c| c >= p.get()) {
            return Err(RubanError::InvalidInput("digit out of range".into()));
        }
        let mut value = BigRational::zero();
        for (i, &c) in digits.iter().enumerate() {
            value += BigRational::from_integer(BigInt::from(c)) * p.pow_rational(lowest + i as i64);
        }
        Ok(pfloor(&value, p))
    }

    /// `p^(-j)` for `j ≥ 1`.
    pub fn inverse_power(p: Prime, j: u32) -> Self {
        pfloor(&p.pow_rational(-(j as i64)), p)
    }

    /// `(p-1) + (p-1)p^(-1) = p - p^(-1)`.
    pub fn p_minus_inverse(p: Prime) -> Self {
        let v = BigRational::from_integer(p.big()) - p.pow_rational(-1);
        pfloor(&v, p)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn into_value(self) -> BigRational {
        self.value
    }

    pub fn lowest(&self) -> i64 {
        self.lowest
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn valuation(&self) -> Valuation {
        vp(&self.value, self.p)
    }

    /// Membership in `S'_p`: nonzero with valuation at most `-1`.
    pub fn is_strict(&self) -> bool {
        matches!(self.valuation(), Valuation::Finite(v) if v <= -1)
    }

    /// Re-evaluates the digit list.
    pub fn digit_value(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (i, &c) in self.digits.iter().enumerate() {
            acc += BigRational::from_integer(BigInt::from(c))
                * self.p.pow_rational(self.lowest + i as i64);
        }
        acc
    }
}

impl fmt::Display for SpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::fraction::format_fraction(&self.value))
    }
}

/// The p-adic floor: the part of the Hensel expansion with exponents `≤ 0`.
pub fn pfloor(x: &BigRational, p: Prime) -> SpElement {
    if x.is_zero() {
        return SpElement::zero(p);
    }
    let (v, num, den) = split_unit(x, p);
    if v > 0 {
        return SpElement::zero(p);
    }
    let width = (1 - v) as u64;
    let modulus = p.pow(width);
    let u = unit_residue(&num, &den, &modulus);
    let digits = digits_of(u.clone(), p, width as usize);
    // u·p^v with u prime to p is already in lowest terms
    let value = if v == 0 {
        BigRational::from_integer(u)
    } else {
        BigRational::new_raw(u, modulus.clone() / p.big())
    };
    SpElement {
        p,
        value,
        lowest: v,
        digits,
    }
}

fn legendre_is_residue(a: u64, p: u64) -> bool {
    a % p != 0 && pow_mod(a, (p - 1) / 2, p) == 1
}

/// Whether `d ≠ 0` has a square root in `Q_p`.
pub fn is_padic_square(d: &BigInt, p: Prime) -> bool {
    if d.is_zero() {
        return false;
    }
    let (v, u) = strip_p(d, p);
    if v % 2 != 0 {
        return false;
    }
    if p.get() == 2 {
        u.mod_floor(&BigInt::from(8)) == BigInt::from(1)
    } else {
        let r = u.mod_floor(&p.big()).to_u64().unwrap();
        legendre_is_residue(r, p.get())
    }
}

/// Square root of a quadratic residue modulo an odd prime (Tonelli-Shanks).
fn sqrt_mod_prime(a: u64, p: u64) -> u64 {
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while legendre_is_residue(z, p) {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// Selects one of the two p-adic square roots.
///
/// `A` is the root whose unit part has the smaller leading digit (for odd `p`),
/// or is `≡ 1 mod 4` (for `p = 2`, where the leading digit is always 1).
/// `B` is its negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    A,
    B,
}

impl Branch {
    pub fn other(self) -> Branch {
        match self {
            Branch::A => Branch::B,
            Branch::B => Branch::A,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::A => "a",
            Branch::B => "b",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = RubanError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Branch::A),
            "b" | "B" => Ok(Branch::B),
            _ => Err(RubanError::InvalidInput(format!("unknown branch {s:?}"))),
        }
    }
}

/// `√d mod p^precision` for a fixed branch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HenselRoot {
    d: BigInt,
    p: Prime,
    residue: BigInt,
    precision: u32,
    branch: Branch,
}

impl HenselRoot {
    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Integer in `[0, p^precision)` congruent to the chosen root.
    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `p`-adic valuation of the root itself, `vp(d)/2`.
    pub fn root_valuation(&self) -> i64 {
        strip_p(&self.d, self.p).0 as i64 / 2
    }

    pub fn with_precision(&self, precision: u32) -> Result<HenselRoot> {
        padic_sqrt(&self.d, self.p, precision, self.branch)
    }
}

fn is_perfect_square(d: &BigInt) -> bool {
    if d.is_negative() {
        return false;
    }
    let r = d.sqrt();
    &(&r * &r) == d
}

/// The root `s` of the unit `u` modulo `p^k`, normalised to branch `A`.
fn unit_root_branch_a(u: &BigInt, p: Prime, k: u32) -> BigInt {
    if p.get() == 2 {
        // s² ≡ u mod 2^m fixes s mod 2^(m-1) up to sign
        let target = k.max(2) + 1;
        let mut s = BigInt::one();
        let mut m = 3;
        while m < target {
            let next = BigInt::one() << (m + 1);
            if !(&s * &s - u).mod_floor(&next).is_zero() {
                s += BigInt::one() << (m - 1);
            }
            m += 1;
        }
        let modulus = BigInt::one() << k.max(2);
        s = s.mod_floor(&modulus);
        if s.mod_floor(&BigInt::from(4)) != BigInt::one() {
            s = (&modulus - s).mod_floor(&modulus);
        }
        s.mod_floor(&(BigInt::one() << k))
    } else {
        let pu = p.get();
        let r0 = sqrt_mod_prime(u.mod_floor(&p.big()).to_u64().unwrap(), pu);
        let r0 = r0.min(pu - r0);
        let mut s = BigInt::from(r0);
        let mut prec = 1u32;
        while prec < k {
            prec = (prec * 2).min(k);
            let m = p.pow(prec as u64);
            let f = (&s * &s - u).mod_floor(&m);
            let inv = mod_inverse(&(BigInt::from(2) * &s), &m);
            s = (&s - f * inv).mod_floor(&m);
        }
        s.mod_floor(&p.pow(k as u64))
    }
}

/// Hensel-lifted `√d` modulo `p^precision` on the requested branch.
pub fn padic_sqrt(d: &BigInt, p: Prime, precision: u32, branch: Branch) -> Result<HenselRoot> {
    if is_perfect_square(d) {
        return Err(RubanError::PerfectSquare(d.to_string()));
    }
    if !is_padic_square(d, p) {
        return Err(RubanError::NotASquare {
            d: d.to_string(),
            p: p.get(),
        });
    }
    if precision == 0 {
        return Err(RubanError::InvalidPrecision);
    }
    let (v, u) = strip_p(d, p);
    let e = v / 2;
    let modulus = p.pow(precision as u64);
    let unit_root = unit_root_branch_a(&u, p, precision);
    let mut residue = (p.pow(e) * unit_root).mod_floor(&modulus);
    if branch == Branch::B {
        residue = (-residue).mod_floor(&modulus);
    }
    Ok(HenselRoot {
        d: d.clone(),
        p,
        residue,
        precision,
        branch,
    })
}
