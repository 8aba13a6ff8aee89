//! Quasi-periodic Ruban continued fractions and checkers for the hypotheses of
//! the transcendence criteria.
//!
//! A quasi-periodic sequence repeats the block `a_{n_i} … a_{n_i+k_i-1}` exactly
//! `λ_i` times starting at `n_i`. The checkers never produce a proof: they
//! verify each hypothesis either structurally (closed-form generators) or as
//! finite-depth evidence (tabulated blocks), and say which.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Result, RubanError};
use crate::expansion::validate_quotients;
use crate::heights::ratio_to_f64;
use crate::padic::{self, Prime, SpElement};

pub const DEFAULT_DEPTH: usize = 10_000;

/// `c · g^i` with rational `c` and integer `g ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometricSeq {
    pub c: BigRational,
    pub g: u64,
}

impl GeometricSeq {
    pub fn new(c: BigRational, g: u64) -> Self {
        GeometricSeq { c, g }
    }

    pub fn at(&self, i: usize) -> BigRational {
        &self.c * BigRational::from_integer(num_traits::pow(BigInt::from(self.g), i))
    }

    fn at_positive(&self, i: usize, what: &str) -> Result<BigInt> {
        let v = self.at(i);
        if !v.is_integer() || v <= BigRational::zero() {
            return Err(RubanError::SpecInconsistent(format!(
                "{what}_{i} = {} is not a positive integer",
                crate::fraction::format_fraction(&v)
            )));
        }
        Ok(v.to_integer())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub n: usize,
    pub lambda: usize,
    pub contents: Vec<SpElement>,
}

impl Block {
    pub fn k(&self) -> usize {
        self.contents.len()
    }

    /// One past the last position covered by the repetitions.
    pub fn end(&self) -> usize {
        self.n + self.lambda * self.k()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    /// `n_i = c_n g_n^i`, `λ_i = c_λ g_λ^i`, block `i` is `blocks[i mod len]`.
    Geometric {
        n: GeometricSeq,
        lambda: GeometricSeq,
        blocks: Vec<Vec<SpElement>>,
    },
    Tabulated { blocks: Vec<Block> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiPeriodicSpec {
    p: Prime,
    /// Explicit quotients from position 0; blocks must agree where they overlap.
    prefix: Vec<SpElement>,
    /// Used for positions covered by neither the prefix nor a block.
    filler: Option<SpElement>,
    generator: Generator,
}

/// Materialised block positions beyond this are never needed.
const POSITION_LIMIT: usize = 1 << 40;

impl QuasiPeriodicSpec {
    pub fn new(
        p: Prime,
        prefix: Vec<SpElement>,
        filler: Option<SpElement>,
        generator: Generator,
    ) -> Result<Self> {
        if prefix.is_empty() {
            return Err(RubanError::SpecInconsistent("prefix must contain a_0".into()));
        }
        validate_quotients(p, &prefix)?;
        if let Some(f) = &filler {
            if f.prime() != p || !f.is_strict() {
                return Err(RubanError::SpecInconsistent("filler must lie in S'_p".into()));
            }
        }
        let contents: Vec<&Vec<SpElement>> = match &generator {
            Generator::Geometric { blocks, n, lambda } => {
                if blocks.is_empty() {
                    return Err(RubanError::SpecInconsistent("no blocks".into()));
                }
                let k = blocks[0].len();
                if blocks.iter().any(|b| b.len() != k) {
                    return Err(RubanError::SpecInconsistent(
                        "geometric blocks must share one length k".into(),
                    ));
                }
                if n.g < 1 || lambda.g < 1 {
                    return Err(RubanError::SpecInconsistent("ratios must be ≥ 1".into()));
                }
                blocks.iter().collect()
            }
            Generator::Tabulated { blocks } => blocks.iter().map(|b| &b.contents).collect(),
        };
        for c in contents {
            if c.is_empty() {
                return Err(RubanError::SpecInconsistent("empty block".into()));
            }
            for a in c {
                if a.prime() != p || !a.is_strict() {
                    return Err(RubanError::SpecInconsistent(format!(
                        "block entry {a} is not in S'_p"
                    )));
                }
            }
        }
        Ok(QuasiPeriodicSpec {
            p,
            prefix,
            filler,
            generator,
        })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn prefix(&self) -> &[SpElement] {
        &self.prefix
    }

    pub fn filler(&self) -> Option<&SpElement> {
        self.filler.as_ref()
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn is_geometric(&self) -> bool {
        matches!(self.generator, Generator::Geometric { .. })
    }

    /// Block `i`, or `None` past the end of a table.
    pub fn block(&self, i: usize) -> Result<Option<Block>> {
        match &self.generator {
            Generator::Geometric { n, lambda, blocks } => {
                let ni = n.at_positive(i, "n")?;
                let li = lambda.at_positive(i, "lambda")?;
                let cap = BigInt::from(POSITION_LIMIT);
                if ni > cap || li > cap {
                    return Err(RubanError::SpecInconsistent(format!("block {i} out of range")));
                }
                Ok(Some(Block {
                    n: ni.to_usize().unwrap(),
                    lambda: li.to_usize().unwrap(),
                    contents: blocks[i % blocks.len()].clone(),
                }))
            }
            Generator::Tabulated { blocks } => Ok(blocks.get(i).cloned()),
        }
    }

    /// Blocks starting before `depth`, plus the first one at or beyond it if any.
    pub fn blocks_until(&self, depth: usize) -> Result<Vec<Block>> {
        let mut out = Vec::new();
        let mut i = 0;
        while let Some(b) = self.block(i)? {
            let stop = b.n >= depth;
            out.push(b);
            if stop {
                break;
            }
            i += 1;
        }
        Ok(out)
    }

    /// Smallest admissible `A`: `max(p, max |a_i|_p)` over every quotient the spec can produce.
    pub fn default_a(&self) -> BigRational {
        let p = BigRational::from_integer(self.p.big());
        self.alphabet().iter().map(abs_p).fold(p, |m, x| m.max(x))
    }

    /// Every distinct quotient the spec can produce.
    fn alphabet(&self) -> Vec<SpElement> {
        let mut out: Vec<SpElement> = self.prefix.clone();
        out.extend(self.filler.iter().cloned());
        match &self.generator {
            Generator::Geometric { blocks, .. } => out.extend(blocks.iter().flatten().cloned()),
            Generator::Tabulated { blocks } => out.extend(blocks.iter().flat_map(|b| b.contents.iter().cloned())),
        }
        out
    }
}

/// The first `count` quotients, validating `n_{i+1} ≥ n_i + λ_i k_i` and the
/// repetition law along the way.
pub fn materialize(spec: &QuasiPeriodicSpec, count: usize) -> Result<Vec<SpElement>> {
    let mut slots: Vec<Option<SpElement>> = vec![None; count];
    for (slot, a) in slots.iter_mut().zip(spec.prefix.iter()) {
        *slot = Some(a.clone());
    }
    let blocks = spec.blocks_until(count)?;
    for (i, b) in blocks.iter().enumerate() {
        if b.n == 0 {
            return Err(RubanError::SpecInconsistent("n_0 must be positive".into()));
        }
        if let Some(next) = blocks.get(i + 1) {
            if next.n < b.end() {
                return Err(RubanError::SpecInconsistent(format!(
                    "n_{} = {} < n_{i} + λ_{i} k_{i} = {}",
                    i + 1,
                    next.n,
                    b.end()
                )));
            }
        }
        for pos in b.n..b.end().min(count) {
            let a = &b.contents[(pos - b.n) % b.k()];
            match &slots[pos] {
                Some(existing) if existing != a => {
                    return Err(RubanError::SpecInconsistent(format!(
                        "position {pos}: explicit {existing} conflicts with block {i} entry {a}"
                    )));
                }
                _ => slots[pos] = Some(a.clone()),
            }
        }
    }
    let mut out = Vec::with_capacity(count);
    for (pos, s) in slots.into_iter().enumerate() {
        match s.or_else(|| spec.filler.clone()) {
            Some(a) => out.push(a),
            None => {
                return Err(RubanError::SpecInconsistent(format!(
                    "position {pos} is covered by no block and there is no filler"
                )))
            }
        }
    }
    validate_quotients(spec.p, &out)?;
    for b in &blocks {
        let last = (b.n + (b.lambda - 1) * b.k()).min(count.saturating_sub(b.k()));
        for m in b.n..last {
            if out[m + b.k()] != out[m] {
                return Err(RubanError::SpecInconsistent(format!(
                    "repetition law fails at m = {m}"
                )));
            }
        }
    }
    Ok(out)
}

fn geometric(p: Prime, n: (i64, u64), lambda: (i64, u64), blocks: Vec<Vec<SpElement>>) -> QuasiPeriodicSpec {
    QuasiPeriodicSpec::new(
        p,
        vec![SpElement::zero(p)],
        None,
        Generator::Geometric {
            n: GeometricSeq::new(BigRational::from_integer(n.0.into()), n.1),
            lambda: GeometricSeq::new(BigRational::from_integer(lambda.0.into()), lambda.1),
            blocks,
        },
    )
    .expect("well-formed example")
}

/// `[0, (p - 1/p)^{2·3^0}, (1/p)^{2·3^1}, (p - 1/p)^{2·3^2}, …]`:
/// `n_i = 3^i`, `λ_i = 2·3^i`, `k_i = 1`.
pub fn example1(p: Prime) -> QuasiPeriodicSpec {
    let pm = SpElement::p_minus_inverse(p);
    let inv = SpElement::inverse_power(p, 1);
    geometric(p, (1, 3), (2, 3), vec![vec![pm], vec![inv]])
}

/// `[0, (1/p, 1/p²)^{8·17^0}, (p - 1/p, p - 1/p)^{8·17^1}, …]`:
/// `n_i = 17^i`, `λ_i = 8·17^i`, `k_i = 2`.
pub fn example2(p: Prime) -> QuasiPeriodicSpec {
    let pm = SpElement::p_minus_inverse(p);
    let inv = SpElement::inverse_power(p, 1);
    let inv2 = SpElement::inverse_power(p, 2);
    geometric(p, (1, 17), (8, 17), vec![vec![inv, inv2], vec![pm.clone(), pm]])
}

/// Value of a bound such as `2 log A / log p - 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundValue {
    /// `A` is an integer power of `p`, so the log ratio is rational.
    Exact(BigRational),
    Approx(f64),
}

impl BoundValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            BoundValue::Exact(x) => ratio_to_f64(x),
            BoundValue::Approx(x) => *x,
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Exact(x) => f.write_str(&crate::fraction::format_fraction(x)),
            BoundValue::Approx(x) => write!(f, "{x}"),
        }
    }
}

fn check_a(a: &BigRational, p: Prime) -> Result<()> {
    if *a < BigRational::from_integer(p.big()) {
        return Err(RubanError::HypothesisViolated(format!(
            "A = {} is below p = {p}",
            crate::fraction::format_fraction(a)
        )));
    }
    Ok(())
}

/// `t` with `A = p^t` when `t` is a positive integer.
fn exact_log(a: &BigRational, p: Prime) -> Option<u64> {
    if !a.is_integer() {
        return None;
    }
    let (t, rest) = padic::strip_p(a.numer(), p);
    rest.is_one().then_some(t)
}

fn log_bound(a: &BigRational, p: Prime, factor: i64) -> Result<BoundValue> {
    check_a(a, p)?;
    Ok(match exact_log(a, p) {
        Some(t) => BoundValue::Exact(BigRational::from_integer(BigInt::from(factor * t as i64 - 1))),
        None => {
            let ratio = ratio_to_f64(a).ln() / (p.get() as f64).ln();
            BoundValue::Approx(factor as f64 * ratio - 1.0)
        }
    })
}

/// `B = 2 log A / log p - 1`.
pub fn bound_b(a: &BigRational, p: Prime) -> Result<BoundValue> {
    log_bound(a, p, 2)
}

/// `B' = 4 log A / log p - 1`.
pub fn bound_b_prime(a: &BigRational, p: Prime) -> Result<BoundValue> {
    log_bound(a, p, 4)
}

/// Limit of a ratio sequence given in closed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Limit {
    Finite(BigRational),
    Infinity,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(x) => f.write_str(&crate::fraction::format_fraction(x)),
            Limit::Infinity => f.write_str("inf"),
        }
    }
}

impl Limit {
    fn exceeds(&self, bound: &BoundValue) -> bool {
        match (self, bound) {
            (Limit::Infinity, _) => true,
            (Limit::Finite(x), BoundValue::Exact(b)) => x > b,
            (Limit::Finite(x), BoundValue::Approx(b)) => ratio_to_f64(x) > *b,
        }
    }
}

/// `λ_i / n_i` as `i → ∞` for geometric generators; liminf and limsup coincide.
fn geometric_ratio_limit(n: &GeometricSeq, lambda: &GeometricSeq) -> Limit {
    use std::cmp::Ordering::*;
    match lambda.g.cmp(&n.g) {
        Equal => Limit::Finite(&lambda.c / &n.c),
        Greater => Limit::Infinity,
        Less => Limit::Finite(BigRational::zero()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// `liminf λ_i/n_i > B`, with infinitely many all-`(p - 1/p)` blocks.
    Main,
    /// `limsup λ_i/n_i > B'` with bounded `k_i`.
    Limsup,
    /// Contiguous blocks with `liminf λ_i/λ_{i-1} > 4`.
    Growth,
}

impl Theorem {
    pub fn id(self) -> &'static str {
        match self {
            Theorem::Main => "1.1",
            Theorem::Limsup => "4.2",
            Theorem::Growth => "4.3",
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Theorem::Main),
            2 => Some(Theorem::Limsup),
            3 => Some(Theorem::Growth),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    /// Follows from the closed-form generator for every `i`, or from a concrete witness.
    Structural,
    /// Observed on the materialised prefix only.
    FiniteDepth,
}

impl Certainty {
    pub fn name(self) -> &'static str {
        match self {
            Certainty::Structural => "structural",
            Certainty::FiniteDepth => "finite-depth",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChecklistItem {
    pub name: &'static str,
    pub passed: bool,
    pub certainty: Certainty,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CriterionSatisfied,
    NotSatisfied,
    InsufficientEvidence,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::CriterionSatisfied => "criterion-satisfied",
            Verdict::NotSatisfied => "not-satisfied",
            Verdict::InsufficientEvidence => "insufficient-evidence",
        }
    }
}

/// How the ratio condition was evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioEvidence {
    /// Closed-form limit (liminf = limsup).
    Exact(Limit),
    /// Min and max over the later half of the tabulated blocks.
    Windowed { min: BigRational, max: BigRational, blocks: usize },
    Unavailable,
}

impl RatioEvidence {
    /// The value compared against the threshold: liminf uses the window minimum.
    pub fn headline(&self, use_max: bool) -> Option<Limit> {
        match self {
            RatioEvidence::Exact(l) => Some(l.clone()),
            RatioEvidence::Windowed { min, max, .. } => {
                Some(Limit::Finite(if use_max { max.clone() } else { min.clone() }))
            }
            RatioEvidence::Unavailable => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub theorem: Theorem,
    pub a: Option<BigRational>,
    pub bound: Option<BoundValue>,
    pub ratio: RatioEvidence,
    /// Ratio value compared against the threshold, if any.
    pub ratio_value: Option<Limit>,
    pub checklist: Vec<ChecklistItem>,
    pub depth: usize,
    pub verdict: Verdict,
}

impl CriterionReport {
    pub fn item(&self, name: &str) -> Option<&ChecklistItem> {
        self.checklist.iter().find(|c| c.name == name)
    }
}

fn verdict_from(items: &[ChecklistItem]) -> Verdict {
    if items.iter().any(|c| !c.passed && c.certainty == Certainty::Structural) {
        Verdict::NotSatisfied
    } else if items.iter().any(|c| !c.passed) {
        Verdict::InsufficientEvidence
    } else {
        Verdict::CriterionSatisfied
    }
}

/// Smallest `l` (then smallest start `k ≤ len/2`) with `a_{n+l} = a_n` for every
/// scanned `n ≥ k`; periods are searched up to `len/4`.
pub fn period_scan(seq: &[SpElement]) -> Option<(usize, usize)> {
    let mut ids: HashMap<&SpElement, u32> = HashMap::new();
    let coded: Vec<u32> = seq
        .iter()
        .map(|a| {
            let next = ids.len() as u32;
            *ids.entry(a).or_insert(next)
        })
        .collect();
    let len = coded.len();
    for l in 1..=len / 4 {
        // smallest k such that coded[n + l] == coded[n] for all n in [k, len - l)
        let mut k = len - l;
        while k > 0 && coded[k - 1 + l] == coded[k - 1] {
            k -= 1;
        }
        if k <= len / 2 {
            return Some((k, l));
        }
    }
    None
}

fn abs_p(a: &SpElement) -> BigRational {
    a.valuation().abs_value(a.prime())
}

fn boundedness_item(spec: &QuasiPeriodicSpec, seq: &[SpElement], a: Option<&BigRational>) -> ChecklistItem {
    let alphabet_max = spec.alphabet().iter().map(abs_p).max().unwrap_or_else(BigRational::zero);
    let seq_max = seq.iter().map(abs_p).max().unwrap_or_else(BigRational::zero);
    let fmt = crate::fraction::format_fraction;
    match a {
        Some(a) => {
            let witness = seq.iter().position(|x| abs_p(x) > *a);
            let symbolic_ok = spec.is_geometric() && alphabet_max <= *a;
            let passed = witness.is_none() && (spec.is_geometric() && symbolic_ok || !spec.is_geometric());
            let certainty = if !passed || spec.is_geometric() {
                Certainty::Structural
            } else {
                Certainty::FiniteDepth
            };
            let detail = match witness {
                Some(i) => format!("|a_{i}|_p = {} > A = {}", fmt(&abs_p(&seq[i])), fmt(a)),
                None => format!("max |a_i|_p = {} ≤ A = {}", fmt(&alphabet_max.max(seq_max)), fmt(a)),
            };
            ChecklistItem {
                name: "bounded-partial-quotients",
                passed,
                certainty,
                detail,
            }
        }
        None => ChecklistItem {
            name: "bounded-partial-quotients",
            passed: true,
            certainty: if spec.is_geometric() {
                Certainty::Structural
            } else {
                Certainty::FiniteDepth
            },
            detail: format!("finitely many distinct quotients; max |a_i|_p = {}", fmt(&alphabet_max.max(seq_max))),
        },
    }
}

/// `X^ω ≠ Y^ω` when both start at a block boundary.
fn periodic_words_differ(x: &[SpElement], y: &[SpElement]) -> bool {
    let len = num_integer::lcm(x.len(), y.len());
    (0..len).any(|i| x[i % x.len()] != y[i % y.len()])
}

fn contiguous_geometric(n: &GeometricSeq, lambda: &GeometricSeq, k: usize) -> bool {
    // c_n g^i = c_n g^(i-1) + k c_λ g^(i-1) for all i  ⟺  same g and c_n (g - 1) = k c_λ
    n.g == lambda.g
        && &n.c * BigRational::from_integer(BigInt::from(n.g) - 1)
            == BigRational::from_integer(BigInt::from(k)) * &lambda.c
}

fn aperiodicity_item(spec: &QuasiPeriodicSpec, seq: &[SpElement]) -> ChecklistItem {
    if let Generator::Geometric { n, lambda, blocks } = &spec.generator {
        let k = blocks[0].len();
        if spec.filler.is_none() && contiguous_geometric(n, lambda, k) && lambda.g >= 2 {
            let differ = (0..blocks.len()).any(|i| periodic_words_differ(&blocks[i], &blocks[(i + 1) % blocks.len()]));
            return ChecklistItem {
                name: "non-ultimately-periodic",
                passed: differ,
                certainty: Certainty::Structural,
                detail: if differ {
                    "runs of unbounded length alternate between blocks with different periodic extensions".into()
                } else {
                    "every run repeats the same periodic word, so the sequence is ultimately periodic".into()
                },
            };
        }
    }
    match period_scan(seq) {
        None => ChecklistItem {
            name: "non-ultimately-periodic",
            passed: true,
            certainty: Certainty::FiniteDepth,
            detail: format!("no period l ≤ {} from any start ≤ {} in {} quotients", seq.len() / 4, seq.len() / 2, seq.len()),
        },
        Some((k, l)) => ChecklistItem {
            name: "non-ultimately-periodic",
            passed: false,
            certainty: Certainty::FiniteDepth,
            detail: format!("prefix of {} quotients is periodic with period {l} from index {k}", seq.len()),
        },
    }
}

fn tabulated_blocks(spec: &QuasiPeriodicSpec, depth: usize) -> Result<Vec<Block>> {
    Ok(spec.blocks_until(depth)?.into_iter().filter(|b| b.n < depth).collect())
}

/// Ratios `f(i)` over the later half of the observed blocks.
fn windowed<F>(blocks: &[Block], start: usize, f: F) -> RatioEvidence
where
    F: Fn(&[Block], usize) -> BigRational,
{
    if blocks.len() < 3 || start >= blocks.len() {
        return RatioEvidence::Unavailable;
    }
    let from = (blocks.len() / 2).max(start);
    let vals: Vec<BigRational> = (from..blocks.len()).map(|i| f(blocks, i)).collect();
    RatioEvidence::Windowed {
        min: vals.iter().min().unwrap().clone(),
        max: vals.iter().max().unwrap().clone(),
        blocks: blocks.len(),
    }
}

fn ratio(a: usize, b: usize) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn ratio_item(name: &'static str, evidence: &RatioEvidence, use_max: bool, threshold: &BoundValue, label: &str) -> (ChecklistItem, Option<Limit>) {
    let value = evidence.headline(use_max);
    let item = match (&value, evidence) {
        (Some(v), _) => {
            let passed = v.exceeds(threshold);
            let certainty = match (evidence, threshold) {
                (RatioEvidence::Exact(_), _) => Certainty::Structural,
                _ => Certainty::FiniteDepth,
            };
            ChecklistItem {
                name,
                passed,
                certainty,
                detail: format!("{label} = {v} {} {threshold}", if passed { ">" } else { "≤" }),
            }
        }
        (None, _) => ChecklistItem {
            name,
            passed: false,
            certainty: Certainty::FiniteDepth,
            detail: "fewer than three blocks observed".into(),
        },
    };
    (item, value)
}

fn parse_depth(depth: usize) -> Result<usize> {
    if depth == 0 {
        return Err(RubanError::InvalidInput("depth must be positive".into()));
    }
    Ok(depth)
}

/// `a_{n_i} = … = a_{n_i+k_i-1} = p - 1/p` for infinitely many `i`.
fn special_block_item(spec: &QuasiPeriodicSpec, depth: usize) -> Result<ChecklistItem> {
    let pm = SpElement::p_minus_inverse(spec.p);
    let is_special = |c: &[SpElement]| c.iter().all(|a| *a == pm);
    Ok(match &spec.generator {
        Generator::Geometric { blocks, .. } => {
            let hit = blocks.iter().position(|b| is_special(b));
            ChecklistItem {
                name: "special-block",
                passed: hit.is_some(),
                certainty: Certainty::Structural,
                detail: match hit {
                    Some(j) => format!("every block i ≡ {j} mod {} is all p - 1/p", blocks.len()),
                    None => "no generator block is all p - 1/p".into(),
                },
            }
        }
        Generator::Tabulated { .. } => {
            let blocks = tabulated_blocks(spec, depth)?;
            let hits: Vec<usize> = blocks
                .iter()
                .enumerate()
                .filter(|(_, b)| is_special(&b.contents))
                .map(|(i, _)| i)
                .collect();
            let recurring = hits.iter().any(|&i| i >= blocks.len() / 2);
            ChecklistItem {
                name: "special-block",
                passed: recurring,
                certainty: Certainty::FiniteDepth,
                detail: format!("{} of {} observed blocks are all p - 1/p", hits.len(), blocks.len()),
            }
        }
    })
}

fn k_bounded_item(spec: &QuasiPeriodicSpec, depth: usize) -> Result<ChecklistItem> {
    Ok(match &spec.generator {
        Generator::Geometric { blocks, .. } => ChecklistItem {
            name: "bounded-block-length",
            passed: true,
            certainty: Certainty::Structural,
            detail: format!("k_i = {} for all i", blocks[0].len()),
        },
        Generator::Tabulated { .. } => {
            let kmax = tabulated_blocks(spec, depth)?.iter().map(Block::k).max().unwrap_or(0);
            ChecklistItem {
                name: "bounded-block-length",
                passed: true,
                certainty: Certainty::FiniteDepth,
                detail: format!("max observed k_i = {kmax}"),
            }
        }
    })
}

fn insufficient(spec: &QuasiPeriodicSpec, depth: usize) -> Result<bool> {
    Ok(!spec.is_geometric() && tabulated_blocks(spec, depth)?.len() < 3)
}

fn lambda_over_n(spec: &QuasiPeriodicSpec, depth: usize) -> Result<RatioEvidence> {
    Ok(match &spec.generator {
        Generator::Geometric { n, lambda, .. } => RatioEvidence::Exact(geometric_ratio_limit(n, lambda)),
        Generator::Tabulated { .. } => {
            let blocks = tabulated_blocks(spec, depth)?;
            windowed(&blocks, 0, |b, i| ratio(b[i].lambda, b[i].n))
        }
    })
}

fn finish(
    theorem: Theorem,
    a: Option<BigRational>,
    bound: Option<BoundValue>,
    ratio: RatioEvidence,
    ratio_value: Option<Limit>,
    checklist: Vec<ChecklistItem>,
    depth: usize,
    insufficient: bool,
) -> CriterionReport {
    let verdict = if insufficient {
        Verdict::InsufficientEvidence
    } else {
        verdict_from(&checklist)
    };
    CriterionReport {
        theorem,
        a,
        bound,
        ratio,
        ratio_value,
        checklist,
        depth,
        verdict,
    }
}

/// Hypotheses of the main criterion: bounded quotients, infinitely many
/// all-`(p - 1/p)` blocks, `liminf λ_i/n_i > B` and non-ultimate periodicity.
pub fn check_thm1(spec: &QuasiPeriodicSpec, a: &BigRational, depth: usize) -> Result<CriterionReport> {
    let depth = parse_depth(depth)?;
    let b = bound_b(a, spec.p)?;
    let seq = materialize(spec, depth)?;
    let ev = lambda_over_n(spec, depth)?;
    let (ratio_item, ratio_value) = ratio_item("ratio-exceeds-bound", &ev, false, &b, "liminf λ_i/n_i");
    let items = vec![
        boundedness_item(spec, &seq, Some(a)),
        special_block_item(spec, depth)?,
        ratio_item,
        aperiodicity_item(spec, &seq),
    ];
    Ok(finish(Theorem::Main, Some(a.clone()), Some(b), ev, ratio_value, items, depth, insufficient(spec, depth)?))
}

/// Hypotheses of the limsup criterion: bounded quotients and block lengths,
/// `limsup λ_i/n_i > B'` and non-ultimate periodicity.
pub fn check_thm2(spec: &QuasiPeriodicSpec, a: &BigRational, depth: usize) -> Result<CriterionReport> {
    let depth = parse_depth(depth)?;
    let b = bound_b_prime(a, spec.p)?;
    let seq = materialize(spec, depth)?;
    let ev = lambda_over_n(spec, depth)?;
    let (ratio_item, ratio_value) = ratio_item("ratio-exceeds-bound", &ev, true, &b, "limsup λ_i/n_i");
    let items = vec![
        boundedness_item(spec, &seq, Some(a)),
        k_bounded_item(spec, depth)?,
        ratio_item,
        aperiodicity_item(spec, &seq),
    ];
    Ok(finish(Theorem::Limsup, Some(a.clone()), Some(b), ev, ratio_value, items, depth, insufficient(spec, depth)?))
}

/// Hypotheses of the growth criterion: contiguous blocks, bounded quotients and
/// block lengths, `liminf λ_i/λ_{i-1} > 4` and non-ultimate periodicity.
pub fn check_thm3(spec: &QuasiPeriodicSpec, depth: usize) -> Result<CriterionReport> {
    let depth = parse_depth(depth)?;
    let seq = materialize(spec, depth)?;
    let four = BoundValue::Exact(BigRational::from_integer(4.into()));
    let (contiguity, ev) = match &spec.generator {
        Generator::Geometric { n, lambda, blocks } => {
            let k = blocks[0].len();
            let ok = contiguous_geometric(n, lambda, k) && n.at(0) == ratio(spec.prefix.len(), 1);
            (
                ChecklistItem {
                    name: "contiguous-blocks",
                    passed: ok,
                    certainty: Certainty::Structural,
                    detail: format!(
                        "n_i = n_(i-1) + λ_(i-1) k_(i-1) {} and n_0 {} the prefix length",
                        if contiguous_geometric(n, lambda, k) { "holds for all i" } else { "fails" },
                        if n.at(0) == ratio(spec.prefix.len(), 1) { "equals" } else { "differs from" }
                    ),
                },
                RatioEvidence::Exact(Limit::Finite(BigRational::from_integer(lambda.g.into()))),
            )
        }
        Generator::Tabulated { .. } => {
            let blocks = tabulated_blocks(spec, depth)?;
            let mut ok = blocks.first().map(|b| b.n == spec.prefix.len()).unwrap_or(false);
            let mut detail = String::from("contiguous over all observed blocks");
            for w in blocks.windows(2) {
                if w[1].n != w[0].end() {
                    ok = false;
                    detail = format!("n = {} but the previous run ends at {}", w[1].n, w[0].end());
                    break;
                }
            }
            let certainty = if ok { Certainty::FiniteDepth } else { Certainty::Structural };
            (
                ChecklistItem {
                    name: "contiguous-blocks",
                    passed: ok,
                    certainty,
                    detail,
                },
                windowed(&blocks, 1, |b, i| ratio(b[i].lambda, b[i - 1].lambda)),
            )
        }
    };
    let (ratio_item, ratio_value) = ratio_item("ratio-exceeds-bound", &ev, false, &four, "liminf λ_i/λ_(i-1)");
    let items = vec![
        contiguity,
        boundedness_item(spec, &seq, None),
        k_bounded_item(spec, depth)?,
        ratio_item,
        aperiodicity_item(spec, &seq),
    ];
    Ok(finish(Theorem::Growth, None, Some(four), ev, ratio_value, items, depth, insufficient(spec, depth)?))
}

pub fn check(theorem: Theorem, spec: &QuasiPeriodicSpec, a: &BigRational, depth: usize) -> Result<CriterionReport> {
    match theorem {
        Theorem::Main => check_thm1(spec, a, depth),
        Theorem::Limsup => check_thm2(spec, a, depth),
        Theorem::Growth => check_thm3(spec, depth),
    }
}

/// `(u, j)` with `a = u / p^j`.
fn split_quotient(a: &SpElement) -> (BigInt, u64) {
    let v = a.value();
    let j = if v.denom().is_one() {
        0
    } else {
        padic::strip_p(v.denom(), a.prime()).0
    };
    (v.numer().clone(), j)
}

/// Mirror values `[a_m, …, a_1]` for `m = 1 .. len` by folding the reversed
/// list, each left unreduced as `(N_m, D_m)`.
pub fn mirror_fold(quotients: &[SpElement]) -> Vec<(BigInt, BigInt)> {
    let mut out: Vec<(BigInt, BigInt)> = Vec::with_capacity(quotients.len().saturating_sub(1));
    for a in quotients.iter().skip(1) {
        let (u, j) = split_quotient(a);
        let pj = a.prime().pow(j);
        // a + D/N = (u N + p^j D) / (p^j N)
        let next = match out.last() {
            None => (u, pj),
            Some((n, d)) => (&u * n + &pj * d, pj * n),
        };
        out.push(next);
    }
    out
}

/// A product `p^e · ∏ num / ∏ den` kept as factor lists; equal factors across
/// the bar cancel, so long telescoping products never form huge integers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct FactoredRatio {
    num: Vec<BigInt>,
    den: Vec<BigInt>,
    p_exp: i64,
}

impl FactoredRatio {
    fn mul(&mut self, num: BigInt, den: BigInt, p_exp: i64) {
        self.p_exp += p_exp;
        match self.den.iter().position(|d| *d == num) {
            Some(i) => {
                self.den.swap_remove(i);
            }
            None => self.num.push(num),
        }
        match self.num.iter().position(|n| *n == den) {
            Some(i) => {
                self.num.swap_remove(i);
            }
            None => self.den.push(den),
        }
    }

    fn value(&self, p: Prime) -> BigRational {
        let n: BigInt = self.num.iter().product();
        let d: BigInt = self.den.iter().product();
        BigRational::new(n, d) * p.pow_rational(self.p_exp)
    }

    /// Exact equality: identical factor lists suffice, otherwise the products
    /// are formed (only reached when cancellation left something behind).
    fn equals(&self, other: &FactoredRatio, p: Prime) -> bool {
        let sorted = |v: &[BigInt]| {
            let mut v = v.to_vec();
            v.sort();
            v
        };
        if self.p_exp == other.p_exp && sorted(&self.num) == sorted(&other.num) && sorted(&self.den) == sorted(&other.den) {
            return true;
        }
        self.value(p) == other.value(p)
    }
}

/// Indices up to which each factor is also compared with `eval_finite` of the
/// reversed quotient list, a quadratic-cost check.
pub const MIRROR_EVAL_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TelescopeEntry {
    pub i: usize,
    pub n: usize,
    pub factors: usize,
    /// `q_{n_i + k_i λ_i - 1} = W^(i) q_{n_i - 1}` holds exactly.
    pub telescopes: bool,
    /// Every factor equals the mirror continued fraction `[a_m, …, a_1]`.
    pub mirror_agrees: bool,
    /// Factors also checked against `eval_finite(mirror_ratio(..))`.
    pub evaluated_factors: usize,
    /// `n_{i+1} = n_i + k_i λ_i`, so the product ends at `q_{n_{i+1} - 1}`.
    pub contiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TelescopeReport {
    pub entries: Vec<TelescopeEntry>,
}

impl TelescopeReport {
    pub fn all_exact(&self) -> bool {
        self.entries.iter().all(|e| e.telescopes && e.mirror_agrees)
    }
}

fn fractions_equal(a: (&BigInt, &BigInt), b: (&BigInt, &BigInt)) -> bool {
    (a.0 == b.0 && a.1 == b.1) || a.0 * b.1 == a.1 * b.0
}

/// Checks `q_{n_i + k_i λ_i - 1} = (∏_h q_{n_i+h-1}/q_{n_i+h-2}) · q_{n_i-1}`
/// exactly for blocks `0 ..= max_i`, and each factor against the mirror formula.
///
/// `q_n` does not depend on `a_0`, so it is streamed as `Q_n / p^{E_n}` with
/// `E_n = Σ_{1≤i≤n} j_i` where `a_i = u_i / p^{j_i}`; then every `Q_n` is a
/// p-adic unit and the factor `Q_m / (p^{j_m} Q_{m-1})` needs no gcd.
pub fn telescope_check(spec: &QuasiPeriodicSpec, max_i: usize) -> Result<TelescopeReport> {
    let mut blocks = Vec::new();
    for i in 0..=max_i {
        let b = spec
            .block(i)?
            .ok_or_else(|| RubanError::InvalidInput(format!("block {i} is not tabulated")))?;
        blocks.push(b);
    }
    let depth = blocks.iter().map(Block::end).max().unwrap_or(1);
    let seq = materialize(spec, depth)?;
    let p = spec.p;

    let mut entries: Vec<TelescopeEntry> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| -> Result<TelescopeEntry> {
            Ok(TelescopeEntry {
                i,
                n: b.n,
                factors: b.lambda * b.k(),
                telescopes: false,
                mirror_agrees: true,
                evaluated_factors: 0,
                contiguous: spec.block(i + 1)?.map(|next| next.n == b.end()).unwrap_or(true),
            })
        })
        .collect::<Result<_>>()?;

    // (Q_{m-1}, E_{m-1}) and (Q_m, E_m), starting at m = 0
    let mut prev = (BigInt::zero(), 0u64);
    let mut cur = (BigInt::one(), 0u64);
    let mut prev_j = 0u64;
    let mut mirror: Option<(BigInt, BigInt)> = None;
    let mut active: Option<(usize, FactoredRatio)> = None;
    let mut next_block = 0;

    for m in 1..depth {
        if active.is_none() && next_block < blocks.len() && blocks[next_block].n == m {
            // W · q_{n_i - 1}
            let mut w = FactoredRatio::default();
            w.mul(cur.0.clone(), BigInt::one(), -(cur.1 as i64));
            active = Some((next_block, w));
            next_block += 1;
        }
        let (u, j) = split_quotient(&seq[m]);
        let q_next = &u * &cur.0 + p.pow(j + prev_j) * &prev.0;
        let e_next = cur.1 + j;
        let pj = p.pow(j);
        let factor = (q_next.clone(), &pj * &cur.0);

        let mirror_next = match &mirror {
            None => (u.clone(), pj.clone()),
            Some((n, d)) => (&u * n + &pj * d, &pj * n),
        };

        if let Some((bi, w)) = active.as_mut() {
            let entry = &mut entries[*bi];
            entry.mirror_agrees &= fractions_equal((&factor.0, &factor.1), (&mirror_next.0, &mirror_next.1));
            if m <= MIRROR_EVAL_LIMIT {
                let reversed = crate::expansion::eval_finite(&crate::expansion::mirror_ratio(&seq[..=m], m)?)?;
                entry.mirror_agrees &= reversed == BigRational::new(factor.0.clone(), factor.1.clone());
                entry.evaluated_factors += 1;
            }
            w.mul(q_next.clone(), cur.0.clone(), -(j as i64));
            if m + 1 == blocks[*bi].end() {
                let mut lhs = FactoredRatio::default();
                lhs.mul(q_next.clone(), BigInt::one(), -(e_next as i64));
                entry.telescopes = w.equals(&lhs, p);
                active = None;
            }
        }

        mirror = Some(mirror_next);
        prev = std::mem::replace(&mut cur, (q_next, e_next));
        prev_j = j;
    }
    Ok(TelescopeReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::Convergents;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn int(n: i64) -> BigRational {
        q(n, 1)
    }

    #[test]
    fn bounds() {
        let five = p(5);
        assert_eq!(bound_b(&int(5), five).unwrap(), BoundValue::Exact(int(1)));
        assert_eq!(bound_b(&int(25), five).unwrap(), BoundValue::Exact(int(3)));
        assert_eq!(bound_b_prime(&int(25), five).unwrap(), BoundValue::Exact(int(7)));
        assert!(bound_b(&int(4), five).is_err());
        assert_eq!(example1(five).default_a(), int(5));
        assert_eq!(example2(five).default_a(), int(25));
        match bound_b(&int(10), five).unwrap() {
            BoundValue::Approx(x) => assert!((x - (2.0 * 10f64.ln() / 5f64.ln() - 1.0)).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn example1_prefix() {
        let five = p(5);
        let seq = materialize(&example1(five), 10).unwrap();
        let vals: Vec<String> = seq.iter().map(|a| a.to_string()).collect();
        assert_eq!(
            vals,
            ["0", "24/5", "24/5", "1/5", "1/5", "1/5", "1/5", "1/5", "1/5", "24/5"]
        );
        assert_eq!(materialize(&example1(five), 1).unwrap().len(), 1);
    }

    #[test]
    fn example2_prefix() {
        let seq = materialize(&example2(p(3)), 40).unwrap();
        let vals: Vec<String> = seq.iter().map(|a| a.to_string()).collect();
        assert_eq!(vals[0], "0");
        for m in (1..17).step_by(2) {
            assert_eq!((vals[m].as_str(), vals[m + 1].as_str()), ("1/3", "1/9"));
        }
        assert!(vals[17..40].iter().all(|v| v == "8/3"));
    }

    #[test]
    fn conflicting_prefix_is_rejected() {
        let five = p(5);
        let spec = example1(five);
        let Generator::Geometric { n, lambda, blocks } = spec.generator().clone() else { unreachable!() };
        let bad = QuasiPeriodicSpec::new(
            five,
            vec![SpElement::zero(five), SpElement::inverse_power(five, 1)],
            None,
            Generator::Geometric { n, lambda, blocks },
        )
        .unwrap();
        assert!(matches!(materialize(&bad, 5), Err(RubanError::SpecInconsistent(_))));
    }

    #[test]
    fn overlapping_blocks_are_rejected() {
        let five = p(5);
        let pm = SpElement::p_minus_inverse(five);
        let spec = QuasiPeriodicSpec::new(
            five,
            vec![SpElement::zero(five)],
            None,
            Generator::Tabulated {
                blocks: vec![
                    Block { n: 1, lambda: 3, contents: vec![pm.clone()] },
                    Block { n: 3, lambda: 1, contents: vec![pm] },
                ],
            },
        )
        .unwrap();
        assert!(matches!(materialize(&spec, 5), Err(RubanError::SpecInconsistent(_))));
    }

    #[test]
    fn gaps_need_a_filler() {
        let five = p(5);
        let pm = SpElement::p_minus_inverse(five);
        let blocks = vec![
            Block { n: 1, lambda: 1, contents: vec![pm.clone()] },
            Block { n: 3, lambda: 1, contents: vec![pm.clone()] },
        ];
        let no_fill = QuasiPeriodicSpec::new(five, vec![SpElement::zero(five)], None, Generator::Tabulated { blocks: blocks.clone() }).unwrap();
        assert!(materialize(&no_fill, 4).is_err());
        let fill = QuasiPeriodicSpec::new(
            five,
            vec![SpElement::zero(five)],
            Some(SpElement::inverse_power(five, 1)),
            Generator::Tabulated { blocks },
        )
        .unwrap();
        assert_eq!(materialize(&fill, 4).unwrap()[2], SpElement::inverse_power(five, 1));
    }

    #[test]
    fn theorem_checks_on_examples() {
        let five = p(5);
        let r = check_thm1(&example1(five), &int(5), 2000).unwrap();
        assert_eq!(r.bound, Some(BoundValue::Exact(int(1))));
        assert_eq!(r.ratio_value, Some(Limit::Finite(int(2))));
        assert_eq!(r.verdict, Verdict::CriterionSatisfied);

        let r = check_thm2(&example1(five), &int(5), 2000).unwrap();
        assert_eq!(r.bound, Some(BoundValue::Exact(int(3))));
        assert_eq!(r.verdict, Verdict::NotSatisfied);

        let r = check_thm3(&example1(five), 2000).unwrap();
        assert_eq!(r.ratio_value, Some(Limit::Finite(int(3))));
        assert!(r.item("contiguous-blocks").unwrap().passed);
        assert_eq!(r.verdict, Verdict::NotSatisfied);

        let r = check_thm3(&example2(five), 2000).unwrap();
        assert_eq!(r.ratio_value, Some(Limit::Finite(int(17))));
        assert_eq!(r.verdict, Verdict::CriterionSatisfied);
    }

    #[test]
    fn boundary_ratios_fail_strictly() {
        let five = p(5);
        let pm = SpElement::p_minus_inverse(five);
        let inv = SpElement::inverse_power(five, 1);
        // λ_i = n_i: ratio exactly 1 = B for A = p
        let spec = QuasiPeriodicSpec::new(
            five,
            vec![SpElement::zero(five)],
            None,
            Generator::Geometric {
                n: GeometricSeq::new(int(1), 2),
                lambda: GeometricSeq::new(int(1), 2),
                blocks: vec![vec![pm.clone()], vec![inv.clone()]],
            },
        )
        .unwrap();
        let r = check_thm1(&spec, &int(5), 500).unwrap();
        assert_eq!(r.ratio_value, Some(Limit::Finite(int(1))));
        assert_eq!(r.verdict, Verdict::NotSatisfied);

        // g = 4 with contiguity c_n (g - 1) = k c_λ: n_i = 4^i, λ_i = 3·4^i
        let spec = QuasiPeriodicSpec::new(
            five,
            vec![SpElement::zero(five)],
            None,
            Generator::Geometric {
                n: GeometricSeq::new(int(1), 4),
                lambda: GeometricSeq::new(int(3), 4),
                blocks: vec![vec![pm], vec![inv]],
            },
        )
        .unwrap();
        let r = check_thm3(&spec, 500).unwrap();
        assert!(r.item("contiguous-blocks").unwrap().passed);
        assert_eq!(r.verdict, Verdict::NotSatisfied);
    }

    #[test]
    fn shallow_table_is_insufficient() {
        let five = p(5);
        let pm = SpElement::p_minus_inverse(five);
        let spec = QuasiPeriodicSpec::new(
            five,
            vec![SpElement::zero(five)],
            None,
            Generator::Tabulated {
                blocks: vec![
                    Block { n: 1, lambda: 2, contents: vec![pm.clone()] },
                    Block { n: 3, lambda: 6, contents: vec![SpElement::inverse_power(five, 1)] },
                ],
            },
        )
        .unwrap();
        let r = check_thm2(&spec, &int(5), 9).unwrap();
        assert_eq!(r.verdict, Verdict::InsufficientEvidence);
    }

    #[test]
    fn single_block_geometric_is_periodic() {
        let five = p(5);
        let spec = QuasiPeriodicSpec::new(
            five,
            vec![SpElement::zero(five)],
            None,
            Generator::Geometric {
                n: GeometricSeq::new(int(1), 3),
                lambda: GeometricSeq::new(int(2), 3),
                blocks: vec![vec![SpElement::p_minus_inverse(five)]],
            },
        )
        .unwrap();
        let r = check_thm1(&spec, &int(5), 300).unwrap();
        assert!(!r.item("non-ultimately-periodic").unwrap().passed);
        assert_eq!(r.verdict, Verdict::NotSatisfied);
    }

    #[test]
    fn period_scan_reports_sound_periods() {
        let five = p(5);
        let a = SpElement::p_minus_inverse(five);
        let b = SpElement::inverse_power(five, 1);
        let c = SpElement::inverse_power(five, 2);
        let mut seq = vec![c.clone(), c.clone(), b.clone()];
        for _ in 0..20 {
            seq.push(a.clone());
            seq.push(b.clone());
        }
        let (k, l) = period_scan(&seq).unwrap();
        assert_eq!(l, 2);
        assert!(k <= 3);
        for n in k..seq.len() - l {
            assert_eq!(seq[n + l], seq[n]);
        }
        // 243 would end inside a run of 162 equal quotients and look periodic
        let aperiodic = materialize(&example1(five), 300).unwrap();
        assert_eq!(period_scan(&aperiodic), None);
    }

    #[test]
    fn telescoping_small() {
        let r = telescope_check(&example1(p(5)), 3).unwrap();
        assert_eq!(r.entries.len(), 4);
        assert!(r.all_exact());
        assert!(r.entries.iter().all(|e| e.contiguous));
    }

    #[test]
    fn mirror_values_match_convergents() {
        let seq = materialize(&example2(p(5)), 40).unwrap();
        let conv = Convergents::from_quotients(p(5), &seq);
        let m = mirror_fold(&seq);
        for i in 1..40i64 {
            let (n, d) = m[i as usize - 1].clone();
            assert_eq!(BigRational::new(n, d), conv.q(i) / conv.q(i - 1));
        }
    }

    #[test]
    fn telescoping_matches_direct_product() {
        let five = p(5);
        let spec = example1(five);
        let seq = materialize(&spec, 27).unwrap();
        let conv = Convergents::from_quotients(five, &seq);
        // block 2: n = 9, λ = 18, k = 1
        let mut w = BigRational::one();
        for h in 1..=18i64 {
            w *= conv.q(9 + h - 1) / conv.q(9 + h - 2);
        }
        assert_eq!(conv.q(26), w * conv.q(8));
        let r = telescope_check(&spec, 2).unwrap();
        assert!(r.entries[2].telescopes && r.entries[2].mirror_agrees);
        assert_eq!(r.entries[2].evaluated_factors, 18);
        let r = telescope_check(&example2(five), 1).unwrap();
        assert!(r.all_exact());
        assert_eq!(r.entries[1].evaluated_factors, MIRROR_EVAL_LIMIT - 16);
    }

    #[test]
    fn factored_ratio_cancels() {
        let five = p(5);
        let mut a = FactoredRatio::default();
        a.mul(BigInt::from(7), BigInt::from(3), 1);
        a.mul(BigInt::from(3), BigInt::from(11), -2);
        assert_eq!(a.num, vec![BigInt::from(7)]);
        assert_eq!(a.value(five), q(7, 55));
        let mut b = FactoredRatio::default();
        b.mul(BigInt::from(14), BigInt::from(110), 0);
        assert!(a.equals(&b, five));
        b.mul(BigInt::from(2), BigInt::one(), 0);
        assert!(!a.equals(&b, five));
    }
}
