//! Ruban continued-fraction expansion of rationals and quadratic surds.
//!
//! A complete quotient `α_n` is split as `α_n = ⌊α_n⌋_p + 1/α_{n+1}`. Rationals
//! are expanded exactly; `√D` is carried as the state `(R_n + √D)/Q_n` and the
//! floor is read off a Hensel root of sufficient precision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Result, RubanError};
use crate::padic::{self, padic_sqrt, pfloor, vp, Branch, HenselRoot, Prime, SpElement, Valuation};

pub const DEFAULT_RATIONAL_BUDGET: usize = 10_000;
pub const DEFAULT_SURD_BUDGET: usize = 1_000;

/// `(r_n, q_n)` at index `n ≥ -2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentPair {
    pub n: i64,
    pub r: BigRational,
    pub q: BigRational,
}

/// Convergent numerators and denominators of a quotient sequence.
///
/// Stored scaled: `r_n = r_scaled[n] / p^scale[n]`, where `scale[n]` is the sum
/// of the negated valuations of `a_0..a_n`. The recurrence then stays in the
/// integers and no gcd is ever taken.
#[derive(Debug, Clone)]
pub struct Convergents {
    p: Prime,
    // slot i holds index n = i - 2
    r: Vec<BigInt>,
    q: Vec<BigInt>,
    scale: Vec<u64>,
}

fn denominator_exponent(a: &SpElement) -> (BigInt, u64) {
    let v = a.value();
    let d = if v.denom().is_one() {
        0
    } else {
        padic::strip_p(v.denom(), a.prime()).0
    };
    (v.numer().clone(), d)
}

fn scaled_to_rational(x: &BigInt, scale: u64, p: Prime) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let pb = p.big();
    let mut x = x.clone();
    let mut e = scale;
    while e > 0 {
        let (qt, rm) = x.div_rem(&pb);
        if !rm.is_zero() {
            break;
        }
        x = qt;
        e -= 1;
    }
    BigRational::new_raw(x, p.pow(e))
}

impl Convergents {
    pub fn new(p: Prime) -> Self {
        Convergents {
            p,
            r: vec![BigInt::zero(), BigInt::one()],
            q: vec![BigInt::one(), BigInt::zero()],
            scale: vec![0, 0],
        }
    }

    pub fn from_quotients(p: Prime, quotients: &[SpElement]) -> Self {
        let mut c = Convergents::new(p);
        for a in quotients {
            c.push(a);
        }
        c
    }

    /// Appends the next partial quotient.
    pub fn push(&mut self, a: &SpElement) {
        let (alpha, d) = denominator_exponent(a);
        let k = self.r.len();
        let scale = self.scale[k - 1] + d;
        let shift = self.p.pow(scale - self.scale[k - 2]);
        let r = &alpha * &self.r[k - 1] + &shift * &self.r[k - 2];
        let q = &alpha * &self.q[k - 1] + &shift * &self.q[k - 2];
        self.r.push(r);
        self.q.push(q);
        self.scale.push(scale);
    }

    /// Number of convergents with index `n ≥ 0`.
    pub fn len(&self) -> usize {
        self.r.len() - 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slot(&self, n: i64) -> usize {
        assert!(n >= -2 && n < self.len() as i64, "convergent index {n} out of range");
        (n + 2) as usize
    }

    pub fn r(&self, n: i64) -> BigRational {
        let i = self.slot(n);
        scaled_to_rational(&self.r[i], self.scale[i], self.p)
    }

    pub fn q(&self, n: i64) -> BigRational {
        let i = self.slot(n);
        scaled_to_rational(&self.q[i], self.scale[i], self.p)
    }

    pub fn r_valuation(&self, n: i64) -> Valuation {
        let i = self.slot(n);
        match padic::int_vp(&self.r[i], self.p) {
            Valuation::Finite(v) => Valuation::Finite(v - self.scale[i] as i64),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    pub fn q_valuation(&self, n: i64) -> Valuation {
        let i = self.slot(n);
        match padic::int_vp(&self.q[i], self.p) {
            Valuation::Finite(v) => Valuation::Finite(v - self.scale[i] as i64),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    pub fn pair(&self, n: i64) -> ConvergentPair {
        ConvergentPair {
            n,
            r: self.r(n),
            q: self.q(n),
        }
    }

    /// Pairs for `n = 0 .. len`.
    pub fn pairs(&self) -> Vec<ConvergentPair> {
        (0..self.len() as i64).map(|n| self.pair(n)).collect()
    }

    /// `r_n / q_n`.
    pub fn value(&self, n: i64) -> BigRational {
        let i = self.slot(n);
        // the common scale cancels
        BigRational::new(self.r[i].clone(), self.q[i].clone())
    }
}

/// Convergent pairs `(r_n, q_n)` for every prefix of `quotients`.
pub fn convergents(p: Prime, quotients: &[SpElement]) -> Vec<ConvergentPair> {
    Convergents::from_quotients(p, quotients).pairs()
}

/// Value of the finite continued fraction `[a_0, …, a_n]`.
pub fn eval_finite(quotients: &[SpElement]) -> Result<BigRational> {
    let (last, rest) = quotients
        .split_last()
        .ok_or_else(|| RubanError::InvalidInput("empty quotient list".into()))?;
    fold_back(rest, last.value().clone())
}

/// Value of `[a_0, …, a_n, λ]` with final complete quotient `λ`.
pub fn eval_with_tail(quotients: &[SpElement], tail: &BigRational) -> Result<BigRational> {
    fold_back(quotients, tail.clone())
}

fn fold_back(quotients: &[SpElement], mut x: BigRational) -> Result<BigRational> {
    for a in quotients.iter().rev() {
        if x.is_zero() {
            return Err(RubanError::ZeroDenominator);
        }
        x = a.value() + x.recip();
    }
    Ok(x)
}

/// `[a_m, …, a_1]`, whose value is `q_m / q_{m-1}`.
pub fn mirror_ratio(quotients: &[SpElement], m: usize) -> Result<Vec<SpElement>> {
    if m == 0 || m >= quotients.len() {
        return Err(RubanError::InvalidInput(format!(
            "mirror index {m} outside 1..{}",
            quotients.len()
        )));
    }
    Ok(quotients[1..=m].iter().rev().cloned().collect())
}

/// `-1/p`, the value of the purely periodic tail `[p - 1/p, p - 1/p, …]`.
pub fn p_minus_tail(p: Prime) -> BigRational {
    -p.pow_rational(-1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tail {
    Terminated,
    /// Every quotient after the stored ones is `p - 1/p`.
    PeriodicAllPMinus,
    /// The stored quotients are the preperiod followed by one full period.
    PeriodicCycle { preperiod: usize, period: usize },
    Open,
}

/// What was expanded; used to check approximation errors against the source.
#[derive(Debug, Clone)]
pub enum Source {
    Rational(BigRational),
    Surd(HenselRoot),
    Unspecified,
}

#[derive(Debug, Clone)]
pub struct CFExpansion {
    p: Prime,
    quotients: Vec<SpElement>,
    tail: Tail,
    convergents: Convergents,
    source: Source,
}

impl CFExpansion {
    pub fn new(p: Prime, quotients: Vec<SpElement>, tail: Tail, source: Source) -> Result<Self> {
        validate_quotients(p, &quotients)?;
        if let Tail::PeriodicCycle { preperiod, period } = tail {
            if period == 0 || preperiod + period != quotients.len() {
                return Err(RubanError::InvalidInput(
                    "cycle must cover the stored quotients exactly".into(),
                ));
            }
        }
        let convergents = Convergents::from_quotients(p, &quotients);
        Ok(CFExpansion {
            p,
            quotients,
            tail,
            convergents,
            source,
        })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn quotients(&self) -> &[SpElement] {
        &self.quotients
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// Convergents of the stored quotients.
    pub fn convergents(&self) -> &Convergents {
        &self.convergents
    }

    /// The `i`-th partial quotient, continuing a periodic tail; `None` past a
    /// terminated or open expansion.
    pub fn quotient(&self, i: usize) -> Option<SpElement> {
        if let Some(a) = self.quotients.get(i) {
            return Some(a.clone());
        }
        match self.tail {
            Tail::PeriodicAllPMinus => Some(SpElement::p_minus_inverse(self.p)),
            Tail::PeriodicCycle { preperiod, period } => {
                Some(self.quotients[preperiod + (i - preperiod) % period].clone())
            }
            Tail::Terminated | Tail::Open => None,
        }
    }

    /// Up to `n` quotients, continuing a periodic tail.
    pub fn extended(&self, n: usize) -> Vec<SpElement> {
        (0..n).map_while(|i| self.quotient(i)).collect()
    }

    /// Exact value when the tail makes it computable.
    pub fn value(&self) -> Result<Option<BigRational>> {
        match self.tail {
            Tail::Terminated => eval_finite(&self.quotients).map(Some),
            Tail::PeriodicAllPMinus => eval_with_tail(&self.quotients, &p_minus_tail(self.p)).map(Some),
            _ => Ok(None),
        }
    }
}

pub(crate) fn validate_quotients(p: Prime, quotients: &[SpElement]) -> Result<()> {
    for (i, a) in quotients.iter().enumerate() {
        if a.prime() != p {
            return Err(RubanError::InvalidQuotient {
                index: i,
                value: a.to_string(),
                reason: "quotient built for a different prime",
            });
        }
        if i >= 1 && !a.is_strict() {
            return Err(RubanError::InvalidQuotient {
                index: i,
                value: a.to_string(),
                reason: "partial quotients after the first must have valuation ≤ -1",
            });
        }
    }
    Ok(())
}

/// One step `α = ⌊α⌋_p + 1/α'`; `None` when `α` is its own floor.
pub fn step_rational(alpha: &BigRational, p: Prime) -> (SpElement, Option<BigRational>) {
    let a = pfloor(alpha, p);
    if a.value() == alpha {
        (a, None)
    } else {
        let next = (alpha - a.value()).recip();
        (a, Some(next))
    }
}

/// Expansion of a rational together with its complete quotients `α_0, α_1, …`.
pub fn expand_rational_with_trace(
    alpha: &BigRational,
    p: Prime,
    budget: usize,
) -> Result<(CFExpansion, Vec<BigRational>)> {
    if budget == 0 {
        return Err(RubanError::InvalidInput("budget must be at least 1".into()));
    }
    let fixed_point = p_minus_tail(p);
    let mut quotients = Vec::new();
    let mut complete = vec![alpha.clone()];
    let mut current = alpha.clone();
    let tail = loop {
        if !quotients.is_empty() && current == fixed_point {
            break Tail::PeriodicAllPMinus;
        }
        if quotients.len() == budget {
            return Err(RubanError::BudgetExceeded { steps: budget });
        }
        let (a, next) = step_rational(&current, p);
        quotients.push(a);
        match next {
            None => break Tail::Terminated,
            Some(n) => {
                complete.push(n.clone());
                current = n;
            }
        }
    };
    let expansion = CFExpansion::new(p, quotients, tail, Source::Rational(alpha.clone()))?;
    Ok((expansion, complete))
}

/// Expands a rational until it terminates or reaches the `p - 1/p` fixed point.
pub fn expand_rational(alpha: &BigRational, p: Prime, budget: usize) -> Result<CFExpansion> {
    expand_rational_with_trace(alpha, p, budget).map(|(e, _)| e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurdConfig {
    /// Extra digits kept beyond the minimum needed for each floor.
    pub guard: u32,
    pub max_precision: u32,
}

impl Default for SurdConfig {
    fn default() -> Self {
        SurdConfig {
            guard: 8,
            max_precision: 1 << 16,
        }
    }
}

/// Complete quotient `α_n = (R_n + √D)/Q_n`.
#[derive(Debug, Clone)]
pub struct SurdState {
    r: BigRational,
    q: BigRational,
    n: usize,
    root: HenselRoot,
}

impl SurdState {
    pub fn initial(d: &BigInt, p: Prime, branch: Branch, config: &SurdConfig) -> Result<Self> {
        let root = padic_sqrt(d, p, config.guard + 1, branch)?;
        Ok(SurdState {
            r: BigRational::zero(),
            q: BigRational::one(),
            n: 0,
            root,
        })
    }

    /// Builds a state directly, checking the divisibility invariant.
    pub fn from_parts(r: BigRational, q: BigRational, n: usize, root: HenselRoot) -> Result<Self> {
        let s = SurdState { r, q, n, root };
        s.check_invariants()?;
        Ok(s)
    }

    pub fn r(&self) -> &BigRational {
        &self.r
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radicand(&self) -> &BigInt {
        self.root.radicand()
    }

    pub fn root(&self) -> &HenselRoot {
        &self.root
    }

    pub fn prime(&self) -> Prime {
        self.root.prime()
    }

    /// `(R_n + s)/Q_n` with `s` the current Hensel residue.
    pub fn approximate_value(&self) -> BigRational {
        (&self.r + BigRational::from_integer(self.root.residue().clone())) / &self.q
    }

    pub fn check_invariants(&self) -> Result<()> {
        let p = self.prime();
        let bad = |what: &str| Err(RubanError::Degenerate(format!("surd state {}: {what}", self.n)));
        if self.q.is_zero() {
            return bad("Q is zero");
        }
        if !is_p_power(self.r.denom(), p) || !is_p_power(self.q.denom(), p) {
            return bad("R or Q has a denominator prime to p");
        }
        let d = BigRational::from_integer(self.radicand().clone());
        let next = (d - &self.r * &self.r) / &self.q;
        if !is_p_power(next.denom(), p) {
            return bad("Q does not divide D - R²");
        }
        Ok(())
    }
}

fn is_p_power(n: &BigInt, p: Prime) -> bool {
    n.is_one() || padic::strip_p(n, p).1.is_one()
}

/// One surd step: the floor of `(R_n + √D)/Q_n` and the successor state.
pub fn step_surd(state: &SurdState, config: &SurdConfig) -> Result<(SpElement, SurdState)> {
    let p = state.prime();
    // √D - s ∈ p^K Z_p, so the floor is exact once K > vp(Q_n)
    let vq = vp(&state.q, p).finite().expect("Q is nonzero");
    let need = (vq + 1).max(1) as u64 + config.guard as u64;
    let mut root = state.root.clone();
    if (root.precision() as u64) < need {
        let mut k = root.precision() as u64;
        while k < need {
            k *= 2;
        }
        if k > config.max_precision as u64 {
            return Err(RubanError::PrecisionOverflow {
                precision: k.min(u32::MAX as u64) as u32,
                cap: config.max_precision,
            });
        }
        root = root.with_precision(k as u32)?;
    }
    let approx = (&state.r + BigRational::from_integer(root.residue().clone())) / &state.q;
    let a = pfloor(&approx, p);
    if state.n >= 1 && !a.is_strict() {
        return Err(RubanError::InvalidQuotient {
            index: state.n,
            value: a.to_string(),
            reason: "surd floor left S'_p",
        });
    }
    let r_next = a.value() * &state.q - &state.r;
    let d = BigRational::from_integer(root.radicand().clone());
    let q_next = (d - &r_next * &r_next) / &state.q;
    if q_next.is_zero() || !is_p_power(q_next.denom(), p) {
        return Err(RubanError::Degenerate(format!(
            "inexact surd recursion at step {}",
            state.n
        )));
    }
    let next = SurdState {
        r: r_next,
        q: q_next,
        n: state.n + 1,
        root,
    };
    Ok((a, next))
}

/// First `count` quotients of `√D` with all visited states `0..=count`.
#[derive(Debug, Clone)]
pub struct SurdExpansion {
    pub expansion: CFExpansion,
    pub states: Vec<SurdState>,
}

pub fn expand_surd(
    d: &BigInt,
    p: Prime,
    branch: Branch,
    count: usize,
    config: &SurdConfig,
) -> Result<SurdExpansion> {
    if count == 0 {
        return Err(RubanError::InvalidInput("need at least one quotient".into()));
    }
    let mut state = SurdState::initial(d, p, branch, config)?;
    let mut quotients = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count + 1);
    for _ in 0..count {
        let (a, next) = step_surd(&state, config)?;
        quotients.push(a);
        states.push(std::mem::replace(&mut state, next));
    }
    let root = state.root.clone();
    states.push(state);
    let expansion = CFExpansion::new(p, quotients, Tail::Open, Source::Surd(root))?;
    Ok(SurdExpansion { expansion, states })
}

/// Predicted and directly measured valuation of `α - r_n/q_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorCheck {
    pub n: usize,
    /// `vp` of `1/(|a_{n+1}|_p |q_n|_p²)`.
    pub predicted: i64,
    pub computed: Option<Valuation>,
}

impl ErrorCheck {
    pub fn matches(&self) -> bool {
        self.computed == Some(Valuation::Finite(self.predicted))
    }

    /// `|α - r_n/q_n|_p` as predicted from the quotients.
    pub fn predicted_abs(&self, p: Prime) -> BigRational {
        Valuation::Finite(self.predicted).abs_value(p)
    }
}

/// Approximation errors for `n = 0 .. count`, each checked against the source.
pub fn padic_errors(expansion: &CFExpansion, count: usize) -> Result<Vec<ErrorCheck>> {
    let p = expansion.prime();
    let quotients = expansion.extended(count + 1);
    if quotients.len() < count + 1 {
        return Err(RubanError::InvalidInput(format!(
            "a_{count} is not known for this expansion"
        )));
    }
    let conv = Convergents::from_quotients(p, &quotients[..count]);
    let mut root = match expansion.source() {
        Source::Surd(r) => Some(r.clone()),
        _ => None,
    };
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        let va = quotients[n + 1].valuation().finite().expect("strict quotient");
        let vq = conv.q_valuation(n as i64).finite().expect("q_n ≠ 0");
        let predicted = -va - 2 * vq;
        let approx = conv.value(n as i64);
        let computed = match expansion.source() {
            Source::Rational(alpha) => Some(vp(&(alpha - &approx), p)),
            Source::Surd(_) => {
                let r = root.as_mut().expect("surd root");
                Some(surd_distance(r, &approx, predicted)?)
            }
            Source::Unspecified => None,
        };
        out.push(ErrorCheck {
            n,
            predicted,
            computed,
        });
    }
    Ok(out)
}

/// Single-index form of [`padic_errors`].
pub fn padic_error(expansion: &CFExpansion, n: usize) -> Result<ErrorCheck> {
    Ok(padic_errors(expansion, n + 1)?.pop().expect("n + 1 checks"))
}

/// `vp(√D - x)`, raising the root precision until the answer is certain.
pub(crate) fn surd_distance(root: &mut HenselRoot, x: &BigRational, expected: i64) -> Result<Valuation> {
    let p = root.prime();
    let mut k = (expected.max(1) as u64 + 8).max(root.precision() as u64);
    loop {
        if root.precision() as u64 != k {
            *root = root.with_precision(k as u32)?;
        }
        let s = BigRational::from_integer(root.residue().clone());
        let v = vp(&(s - x), p);
        match v {
            Valuation::Finite(v) if v < k as i64 => return Ok(Valuation::Finite(v)),
            _ => {
                k *= 2;
                if k > 1 << 20 {
                    return Err(RubanError::PrecisionOverflow {
                        precision: k as u32,
                        cap: 1 << 20,
                    });
                }
            }
        }
    }
}
