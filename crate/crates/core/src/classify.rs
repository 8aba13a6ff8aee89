//! Finite / periodic / non-periodic verdicts for Ruban expansions.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Result, RubanError};
use crate::expansion::{
    eval_finite, eval_with_tail, expand_rational, p_minus_tail, step_surd, SurdConfig, SurdState, Tail,
};
use crate::padic::{Branch, Prime, SpElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RationalKind {
    Finite,
    UltimatelyPeriodicPMinus,
}

/// For `UltimatelyPeriodicPMinus`, `quotients` is the preperiod; every later
/// quotient is `p - 1/p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalVerdict {
    pub p: Prime,
    pub kind: RationalKind,
    pub quotients: Vec<SpElement>,
}

impl RationalVerdict {
    pub fn preperiod_len(&self) -> usize {
        self.quotients.len()
    }

    /// Value encoded by the verdict.
    pub fn reconstruct(&self) -> Result<BigRational> {
        match self.kind {
            RationalKind::Finite => eval_finite(&self.quotients),
            RationalKind::UltimatelyPeriodicPMinus => eval_with_tail(&self.quotients, &p_minus_tail(self.p)),
        }
    }
}

pub fn classify_rational(alpha: &BigRational, p: Prime, budget: usize) -> Result<RationalVerdict> {
    let e = expand_rational(alpha, p, budget)?;
    let kind = match e.tail() {
        Tail::Terminated => RationalKind::Finite,
        Tail::PeriodicAllPMinus => RationalKind::UltimatelyPeriodicPMinus,
        other => unreachable!("rational expansion ended with {other:?}"),
    };
    Ok(RationalVerdict {
        p,
        kind,
        quotients: e.quotients().to_vec(),
    })
}

/// Index `m` with `R_m Q_m ≤ 0` and `R_{m+1}² > D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonPeriodicityCertificate {
    pub d: BigInt,
    pub m: usize,
    pub r_m: BigRational,
    pub q_m: BigRational,
    pub r_next: BigRational,
}

impl NonPeriodicityCertificate {
    fn check(d: &BigInt, m: usize, cur: &SurdState, next: &SurdState) -> Option<Self> {
        let cert = NonPeriodicityCertificate {
            d: d.clone(),
            m,
            r_m: cur.r().clone(),
            q_m: cur.q().clone(),
            r_next: next.r().clone(),
        };
        cert.verify().then_some(cert)
    }

    /// Re-checks both inequalities exactly.
    pub fn verify(&self) -> bool {
        let d = BigRational::from_integer(self.d.clone());
        !(&self.r_m * &self.q_m).is_positive() && &self.r_next * &self.r_next > d
    }
}

#[derive(Debug, Clone)]
pub enum SurdVerdict {
    /// States `preperiod` and `preperiod + period` coincide exactly.
    Periodic {
        preperiod: usize,
        period: usize,
        /// `a_0 … a_{preperiod + period - 1}`.
        quotients: Vec<SpElement>,
        /// `(R_n, Q_n)` for the states of one cycle.
        cycle_states: Vec<(BigRational, BigRational)>,
    },
    CertifiedNonPeriodic {
        certificate: NonPeriodicityCertificate,
        steps: usize,
    },
    Inconclusive {
        steps: usize,
    },
}

/// First index pair `(i, j)`, `i < j`, with equal items.
pub fn find_repeat<K, I>(items: I) -> Option<(usize, usize)>
where
    K: Hash + Eq,
    I: IntoIterator<Item = K>,
{
    let mut seen = HashMap::new();
    for (j, k) in items.into_iter().enumerate() {
        if let Some(&i) = seen.get(&k) {
            return Some((i, j));
        }
        seen.insert(k, j);
    }
    None
}

/// Whether `|R_n|` strictly increases over `states[from..]`.
pub fn r_strictly_increasing(states: &[SurdState], from: usize) -> bool {
    states
        .get(from..)
        .unwrap_or(&[])
        .windows(2)
        .all(|w| w[1].r().abs() > w[0].r().abs())
}

/// Scans `m = 0 .. budget` for a non-periodicity certificate.
pub fn certificate_search(
    d: &BigInt,
    p: Prime,
    branch: Branch,
    budget: usize,
    config: &SurdConfig,
) -> Result<Option<NonPeriodicityCertificate>> {
    let mut cur = SurdState::initial(d, p, branch, config)?;
    for m in 0..budget {
        let (_, next) = step_surd(&cur, config)?;
        if let Some(c) = NonPeriodicityCertificate::check(d, m, &cur, &next) {
            return Ok(Some(c));
        }
        cur = next;
    }
    Ok(None)
}

/// Classifies `√D` by exact state repetition or a certificate, within `budget` steps.
pub fn detect_cycle_surd(
    d: &BigInt,
    p: Prime,
    branch: Branch,
    budget: usize,
    config: &SurdConfig,
) -> Result<SurdVerdict> {
    if budget == 0 {
        return Err(RubanError::InvalidInput("budget must be at least 1".into()));
    }
    if d.is_negative() {
        if let Some(certificate) = certificate_search(d, p, branch, 1, config)? {
            return Ok(SurdVerdict::CertifiedNonPeriodic { certificate, steps: 1 });
        }
    }
    let mut cur = SurdState::initial(d, p, branch, config)?;
    let mut seen: HashMap<(BigRational, BigRational), usize> = HashMap::new();
    let mut quotients = Vec::new();
    let mut keys = Vec::new();
    seen.insert((cur.r().clone(), cur.q().clone()), 0);
    keys.push((cur.r().clone(), cur.q().clone()));
    for m in 0..budget {
        let (a, next) = step_surd(&cur, config)?;
        quotients.push(a);
        if let Some(certificate) = NonPeriodicityCertificate::check(d, m, &cur, &next) {
            return Ok(SurdVerdict::CertifiedNonPeriodic {
                certificate,
                steps: m + 1,
            });
        }
        let key = (next.r().clone(), next.q().clone());
        let j = m + 1;
        if let Some(&i) = seen.get(&key) {
            return Ok(SurdVerdict::Periodic {
                preperiod: i,
                period: j - i,
                quotients,
                cycle_states: keys[i..j].to_vec(),
            });
        }
        seen.insert(key.clone(), j);
        keys.push(key);
        cur = next;
    }
    Ok(SurdVerdict::Inconclusive { steps: budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn rational_verdicts() {
        let v = classify_rational(&q(1, 2), p(5), 100).unwrap();
        assert_eq!(v.kind, RationalKind::UltimatelyPeriodicPMinus);
        let vals: Vec<_> = v.quotients.iter().map(|a| a.value().clone()).collect();
        assert_eq!(vals, vec![q(3, 1), q(23, 5)]);
        assert_eq!(v.reconstruct().unwrap(), q(1, 2));

        let v = classify_rational(&q(3, 1), p(5), 100).unwrap();
        assert_eq!(v.kind, RationalKind::Finite);
        assert_eq!(v.preperiod_len(), 1);

        let v = classify_rational(&q(-5, 1), p(5), 100).unwrap();
        assert_eq!(v.kind, RationalKind::UltimatelyPeriodicPMinus);
        assert_eq!(v.quotients.len(), 1);
        assert!(v.quotients[0].is_zero());
    }

    #[test]
    fn certificates_for_negative_radicands() {
        let cfg = SurdConfig::default();
        let c = certificate_search(&BigInt::from(-1), p(5), Branch::A, 10, &cfg)
            .unwrap()
            .unwrap();
        assert_eq!((c.m, c.r_m.clone(), c.q_m.clone(), c.r_next.clone()), (0, q(0, 1), q(1, 1), q(2, 1)));
        assert!(c.verify());
        let c = certificate_search(&BigInt::from(-7), p(11), Branch::A, 10, &cfg)
            .unwrap()
            .unwrap();
        assert_eq!(c.m, 0);
    }

    #[test]
    fn tampered_certificate_fails() {
        let c = NonPeriodicityCertificate {
            d: BigInt::from(10),
            m: 0,
            r_m: q(0, 1),
            q_m: q(1, 1),
            r_next: q(3, 1),
        };
        assert!(!c.verify());
        let c = NonPeriodicityCertificate { r_next: q(4, 1), ..c };
        assert!(c.verify());
        let c = NonPeriodicityCertificate { r_m: q(1, 1), ..c };
        assert!(!c.verify());
    }

    #[test]
    fn injected_repeat_is_found() {
        // preperiod 3, period 4
        let seq = [9, 8, 7, 1, 2, 3, 4, 1, 2, 3, 4, 1];
        assert_eq!(find_repeat(seq), Some((3, 7)));
        assert_eq!(find_repeat([1, 2, 3]), None);
        let states: Vec<(BigRational, BigRational)> = [0, 1, 2, 3, 1]
            .iter()
            .map(|&k| (q(k, 5), q(k + 1, 1)))
            .collect();
        assert_eq!(find_repeat(states), Some((1, 4)));
    }

    #[test]
    fn negative_radicand_is_certified() {
        let cfg = SurdConfig::default();
        match detect_cycle_surd(&BigInt::from(-1), p(5), Branch::A, 1000, &cfg).unwrap() {
            SurdVerdict::CertifiedNonPeriodic { certificate, .. } => assert_eq!(certificate.m, 0),
            other => panic!("unexpected verdict {other:?}"),
        }
    }
}
