//! Command-line surface: arguments, spec-file schemas and JSON documents.
//!
//! Every command prints one compact JSON document on success. Failures print
//! nothing on stdout; exit code 2 means a violated precondition and 3 an
//! exhausted budget.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_rational, detect_cycle_surd, find_repeat, RationalKind, SurdVerdict};
use crate::error::{Result, RubanError};
use crate::expansion::{
    expand_rational, expand_surd, CFExpansion, Source, SurdConfig, Tail, DEFAULT_RATIONAL_BUDGET,
    DEFAULT_SURD_BUDGET,
};
use crate::fraction::{format_fraction, parse_fraction};
use crate::heights::{
    bound_report, decimal_bound, random_periodic_spec, AlgebraicValue, HeightReport, PeriodicSpec,
};
use crate::padic::{Branch, Prime, SpElement};
use crate::transcendence::{
    self, example1, example2, Block, BoundValue, Generator, GeometricSeq, QuasiPeriodicSpec, RatioEvidence,
    Theorem,
};

pub const BUDGET_ENV: &str = "RUBAN_BUDGET";
pub const DEFAULT_SURD_DEPTH: usize = 10;

#[derive(Parser, Debug)]
#[command(name = "ruban", version, about = "Ruban p-adic continued fractions with exact arithmetic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Expand a rational or a quadratic surd.
    Expand(ExpandArgs),
    /// Decide finite, periodic or certified non-periodic.
    Classify(ClassifyArgs),
    /// Heights of a periodic expansion and the bounds relating them.
    Height(HeightArgs),
    /// Check the hypotheses of a transcendence criterion.
    Criterion(CriterionArgs),
    /// Exact telescoping and mirror-formula diagnostic on a quasi-periodic spec.
    Telescope(TelescopeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchArg {
    A,
    B,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::A => Branch::A,
            BranchArg::B => Branch::B,
        }
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["rational", "sqrt"])))]
pub struct InputArgs {
    #[arg(long)]
    pub prime: u64,
    /// Exact rational `N`, `N/M` or `N/b^j`.
    #[arg(long, allow_hyphen_values = true)]
    pub rational: Option<String>,
    /// Integer radicand `D` of `√D`.
    #[arg(long, allow_hyphen_values = true)]
    pub sqrt: Option<String>,
    #[arg(long, value_enum, default_value = "a")]
    pub branch: BranchArg,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Quotient budget for rationals, number of quotients for surds.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Include the convergents `(r_n, q_n)`.
    #[arg(long)]
    pub convergents: bool,
    /// Emit JSON (the only output format; accepted for scripts that pass it).
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["spec", "sweep"])))]
pub struct HeightArgs {
    #[arg(long)]
    pub prime: Option<u64>,
    /// CFDocument with tail `{"preperiod": h, "period": k}` or `"p-minus-periodic"`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Check this many pseudo-random specs instead.
    #[arg(long)]
    pub sweep: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["example", "spec"])))]
pub struct SpecSource {
    /// Built-in example 1 or 2.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub example: Option<u8>,
    #[arg(long)]
    pub prime: Option<u64>,
    /// Quasi-periodic spec file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CriterionArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub theorem: u8,
    #[command(flatten)]
    pub source: SpecSource,
    /// Bound on `|a_i|_p`; defaults to `max(p, max |a_i|_p)`.
    #[arg(long = "A", alias = "a", allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, default_value_t = transcendence::DEFAULT_DEPTH)]
    pub depth: usize,
}

#[derive(Args, Debug)]
pub struct TelescopeArgs {
    #[command(flatten)]
    pub source: SpecSource,
    #[arg(long, default_value_t = 3)]
    pub max_i: usize,
}

/// 2 for precondition failures, 3 for exhausted budgets.
pub fn exit_code(e: &RubanError) -> i32 {
    match e {
        RubanError::BudgetExceeded { .. } | RubanError::PrecisionOverflow { .. } => 3,
        _ => 2,
    }
}

/// `explicit`, else `RUBAN_BUDGET`, else `default`.
pub fn resolve_budget(explicit: Option<usize>, default: usize) -> Result<usize> {
    if let Some(b) = explicit {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| RubanError::InvalidInput(format!("{BUDGET_ENV}={s:?} is not a step count"))),
        Err(_) => Ok(default),
    }
}

fn parse_integer(s: &str) -> Result<BigInt> {
    let x = parse_fraction(s)?;
    if !x.is_integer() {
        return Err(RubanError::InvalidInput(format!("{s:?} is not an integer")));
    }
    Ok(x.to_integer())
}

fn parse_quotient(s: &str, p: Prime) -> Result<SpElement> {
    SpElement::new(parse_fraction(s)?, p)
}

fn strings(quotients: &[SpElement]) -> Vec<String> {
    quotients.iter().map(|a| a.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TailDoc {
    /// `"finite"`, `"p-minus-periodic"` or `"open"`.
    Word(String),
    Cycle { preperiod: usize, period: usize },
}

/// Serialised expansion: quotients as canonical fraction strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CFDocument {
    pub p: u64,
    pub quotients: Vec<String>,
    pub tail: TailDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergents: Option<Vec<[String; 2]>>,
}

impl CFDocument {
    pub fn from_expansion(e: &CFExpansion, with_convergents: bool) -> Self {
        let tail = match e.tail() {
            Tail::Terminated => TailDoc::Word("finite".into()),
            Tail::PeriodicAllPMinus => TailDoc::Word("p-minus-periodic".into()),
            Tail::PeriodicCycle { preperiod, period } => TailDoc::Cycle {
                preperiod: *preperiod,
                period: *period,
            },
            Tail::Open => TailDoc::Word("open".into()),
        };
        let convergents = with_convergents.then(|| {
            e.convergents()
                .pairs()
                .into_iter()
                .filter(|c| c.n >= 0)
                .map(|c| [format_fraction(&c.r), format_fraction(&c.q)])
                .collect()
        });
        CFDocument {
            p: e.prime().get(),
            quotients: strings(e.quotients()),
            tail,
            convergents,
        }
    }

    pub fn tail(&self) -> Result<Tail> {
        Ok(match &self.tail {
            TailDoc::Word(w) => match w.as_str() {
                "finite" => Tail::Terminated,
                "p-minus-periodic" => Tail::PeriodicAllPMinus,
                "open" => Tail::Open,
                other => return Err(RubanError::InvalidInput(format!("unknown tail {other:?}"))),
            },
            TailDoc::Cycle { preperiod, period } => Tail::PeriodicCycle {
                preperiod: *preperiod,
                period: *period,
            },
        })
    }

    pub fn to_expansion(&self) -> Result<CFExpansion> {
        let p = Prime::new(self.p)?;
        let quotients = self
            .quotients
            .iter()
            .map(|s| parse_quotient(s, p))
            .collect::<Result<Vec<_>>>()?;
        CFExpansion::new(p, quotients, self.tail()?, Source::Unspecified)
    }

    /// Periodic spec described by a cycle or all-`(p - 1/p)` tail.
    pub fn to_periodic_spec(&self) -> Result<PeriodicSpec> {
        let e = self.to_expansion()?;
        let p = e.prime();
        let q = e.quotients().to_vec();
        match e.tail() {
            Tail::PeriodicCycle { preperiod, .. } => {
                let (pre, per) = q.split_at(*preperiod);
                PeriodicSpec::new(p, pre.to_vec(), per.to_vec())
            }
            Tail::PeriodicAllPMinus => PeriodicSpec::new(p, q, vec![SpElement::p_minus_inverse(p)]),
            _ => Err(RubanError::InvalidInput("a periodic tail is required".into())),
        }
    }
}

fn input_source(input: &InputArgs) -> Result<(Prime, Option<BigRational>, Option<BigInt>)> {
    let p = Prime::new(input.prime)?;
    match (&input.rational, &input.sqrt) {
        (Some(r), None) => Ok((p, Some(parse_fraction(r)?), None)),
        (None, Some(d)) => Ok((p, None, Some(parse_integer(d)?))),
        _ => Err(RubanError::InvalidInput("give exactly one of --rational and --sqrt".into())),
    }
}

fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    serde_json::to_string(doc).map_err(|e| RubanError::InvalidInput(e.to_string()))
}

pub fn run_expand(args: &ExpandArgs) -> Result<String> {
    let (p, rational, sqrt) = input_source(&args.input)?;
    let expansion = match (rational, sqrt) {
        (Some(alpha), _) => {
            let budget = resolve_budget(args.depth, DEFAULT_RATIONAL_BUDGET)?;
            expand_rational(&alpha, p, budget)?
        }
        (_, Some(d)) => {
            let depth = args.depth.unwrap_or(DEFAULT_SURD_DEPTH);
            let cfg = SurdConfig::default();
            let s = expand_surd(&d, p, args.input.branch.into(), depth, &cfg)?;
            let keys = s.states.iter().map(|st| (st.r().clone(), st.q().clone()));
            match find_repeat(keys) {
                Some((i, j)) => CFExpansion::new(
                    p,
                    s.expansion.quotients()[..j].to_vec(),
                    Tail::PeriodicCycle { preperiod: i, period: j - i },
                    s.expansion.source().clone(),
                )?,
                None => s.expansion,
            }
        }
        _ => unreachable!(),
    };
    to_json(&CFDocument::from_expansion(&expansion, args.convergents))
}

#[derive(Debug, Serialize)]
pub struct CertificateDoc {
    pub m: usize,
    #[serde(rename = "R")]
    pub r: String,
    #[serde(rename = "Q")]
    pub q: String,
    #[serde(rename = "Rnext")]
    pub r_next: String,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassifyDoc {
    Finite { quotients: Vec<String> },
    PMinusPeriodic { preperiod: Vec<String> },
    Periodic { preperiod: Vec<String>, period: Vec<String> },
    CertifiedNonPeriodic { certificate: CertificateDoc },
}

pub fn run_classify(args: &ClassifyArgs) -> Result<String> {
    let (p, rational, sqrt) = input_source(&args.input)?;
    let doc = match (rational, sqrt) {
        (Some(alpha), _) => {
            let budget = resolve_budget(args.budget, DEFAULT_RATIONAL_BUDGET)?;
            let v = classify_rational(&alpha, p, budget)?;
            match v.kind {
                RationalKind::Finite => ClassifyDoc::Finite {
                    quotients: strings(&v.quotients),
                },
                RationalKind::UltimatelyPeriodicPMinus => ClassifyDoc::PMinusPeriodic {
                    preperiod: strings(&v.quotients),
                },
            }
        }
        (_, Some(d)) => {
            let budget = resolve_budget(args.budget, DEFAULT_SURD_BUDGET)?;
            let cfg = SurdConfig::default();
            match detect_cycle_surd(&d, p, args.input.branch.into(), budget, &cfg)? {
                SurdVerdict::Periodic {
                    preperiod, quotients, ..
                } => ClassifyDoc::Periodic {
                    preperiod: strings(&quotients[..preperiod]),
                    period: strings(&quotients[preperiod..]),
                },
                SurdVerdict::CertifiedNonPeriodic { certificate: c, .. } => ClassifyDoc::CertifiedNonPeriodic {
                    certificate: CertificateDoc {
                        m: c.m,
                        r: format_fraction(&c.r_m),
                        q: format_fraction(&c.q_m),
                        r_next: format_fraction(&c.r_next),
                    },
                },
                SurdVerdict::Inconclusive { steps } => return Err(RubanError::BudgetExceeded { steps }),
            }
        }
        _ => unreachable!(),
    };
    to_json(&doc)
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum ValueDoc {
    Rational(String),
    Quadratic { root_of: Vec<String>, branch: String },
}

#[derive(Debug, Serialize)]
pub struct IntervalDoc {
    pub lo: String,
    pub hi: String,
    pub exact: bool,
}

#[derive(Debug, Serialize)]
pub struct BoundsDoc {
    pub lemma_case: String,
    pub lemma_bound: String,
    pub lemma: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_equals_p: Option<bool>,
    pub integrality: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rational_heights_agree: Option<bool>,
    pub relation_upper: String,
    pub relation_lower: String,
}

#[derive(Debug, Serialize)]
pub struct HeightDoc {
    pub p: u64,
    pub h: usize,
    pub k: usize,
    pub value: ValueDoc,
    pub degree: usize,
    pub minimal_polynomial: Vec<String>,
    #[serde(rename = "H")]
    pub primitive_height: String,
    pub absolute_height: IntervalDoc,
    pub bounds: BoundsDoc,
    pub all_hold: bool,
}

const HEIGHT_DIGITS: u32 = 15;

impl HeightDoc {
    pub fn new(p: Prime, r: &HeightReport) -> Self {
        let poly = r.value.minimal_polynomial();
        let value = match &r.value {
            AlgebraicValue::Rational(x) => ValueDoc::Rational(format_fraction(x)),
            AlgebraicValue::Quadratic { branch, .. } => ValueDoc::Quadratic {
                root_of: poly.coeffs().iter().map(|c| c.to_string()).collect(),
                branch: branch.name().into(),
            },
        };
        let absolute_height = if r.absolute.is_exact() {
            IntervalDoc {
                lo: format_fraction(&r.absolute.lo),
                hi: format_fraction(&r.absolute.hi),
                exact: true,
            }
        } else {
            IntervalDoc {
                lo: decimal_bound(&r.absolute.lo, HEIGHT_DIGITS, false),
                hi: decimal_bound(&r.absolute.hi, HEIGHT_DIGITS, true),
                exact: false,
            }
        };
        HeightDoc {
            p: p.get(),
            h: r.h,
            k: r.k,
            value,
            degree: r.value.degree(),
            minimal_polynomial: poly.coeffs().iter().map(|c| c.to_string()).collect(),
            primitive_height: r.primitive.to_string(),
            absolute_height,
            bounds: BoundsDoc {
                lemma_case: r.lemma_case.name().into(),
                lemma_bound: r.lemma_bound.to_string(),
                lemma: r.lemma_holds,
                h_equals_p: r.h1_equality,
                integrality: r.integrality,
                rational_heights_agree: r.rational_heights_agree,
                relation_upper: r.relation_upper.name().into(),
                relation_lower: r.relation_lower.name().into(),
            },
            all_hold: r.all_hold(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SweepFailure {
    pub preperiod: Vec<String>,
    pub period: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct SweepDoc {
    pub p: u64,
    pub seed: u64,
    pub count: usize,
    pub cases: BTreeMap<String, usize>,
    pub failures: Vec<SweepFailure>,
    pub all_hold: bool,
}

/// Bounds on `count` random specs with `h ≤ 4`, `k ≤ 3`, `|a_i|_p ≤ p²`.
pub fn height_sweep(p: Prime, count: usize, seed: u64) -> SweepDoc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = BTreeMap::new();
    let mut failures = Vec::new();
    for _ in 0..count {
        let spec = random_periodic_spec(&mut rng, p, 4, 3);
        let failure = |reason: String| SweepFailure {
            preperiod: strings(spec.preperiod()),
            period: strings(spec.period()),
            reason,
        };
        match bound_report(&spec) {
            Ok(r) => {
                *cases.entry(r.lemma_case.name().to_string()).or_insert(0) += 1;
                if !r.all_hold() {
                    failures.push(failure("a bound fails".into()));
                }
            }
            Err(e) => failures.push(failure(e.to_string())),
        }
    }
    SweepDoc {
        p: p.get(),
        seed,
        count,
        all_hold: failures.is_empty(),
        cases,
        failures,
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| RubanError::InvalidInput(format!("{}: {e}", path.display())))
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| RubanError::InvalidInput(format!("{}: {e}", path.display())))
}

fn check_prime_flag(flag: Option<u64>, file_p: u64) -> Result<()> {
    match flag {
        Some(f) if f != file_p => Err(RubanError::InvalidInput(format!(
            "--prime {f} disagrees with p = {file_p} in the spec file"
        ))),
        _ => Ok(()),
    }
}

pub fn run_height(args: &HeightArgs) -> Result<String> {
    if let Some(count) = args.sweep {
        let p = args
            .prime
            .ok_or_else(|| RubanError::InvalidInput("--sweep needs --prime".into()))?;
        return to_json(&height_sweep(Prime::new(p)?, count, args.seed));
    }
    let path = args.spec.as_ref().expect("clap enforces a source");
    let text = read_file(path)?;
    let doc: CFDocument = parse_json(&text, path)?;
    check_prime_flag(args.prime, doc.p)?;
    let spec = doc.to_periodic_spec()?;
    let report = bound_report(&spec)?;
    to_json(&HeightDoc::new(spec.prime(), &report))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricDoc {
    pub c: String,
    pub g: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub n: usize,
    pub lambda: usize,
    pub contents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorDoc {
    Geometric {
        n: GeometricDoc,
        lambda: GeometricDoc,
        blocks: Vec<Vec<String>>,
    },
    Tabulated {
        blocks: Vec<BlockDoc>,
    },
}

/// Quasi-periodic spec file: explicit leading quotients plus a block generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiSpecDoc {
    pub p: u64,
    pub quotients: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filler: Option<String>,
    pub generator: GeneratorDoc,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
}

impl QuasiSpecDoc {
    pub fn to_spec(&self) -> Result<QuasiPeriodicSpec> {
        let p = Prime::new(self.p)?;
        let many = |v: &[String]| v.iter().map(|s| parse_quotient(s, p)).collect::<Result<Vec<_>>>();
        let geometric = |g: &GeometricDoc| -> Result<GeometricSeq> { Ok(GeometricSeq::new(parse_fraction(&g.c)?, g.g)) };
        let generator = match &self.generator {
            GeneratorDoc::Geometric { n, lambda, blocks } => Generator::Geometric {
                n: geometric(n)?,
                lambda: geometric(lambda)?,
                blocks: blocks.iter().map(|b| many(b)).collect::<Result<_>>()?,
            },
            GeneratorDoc::Tabulated { blocks } => Generator::Tabulated {
                blocks: blocks
                    .iter()
                    .map(|b| {
                        Ok(Block {
                            n: b.n,
                            lambda: b.lambda,
                            contents: many(&b.contents)?,
                        })
                    })
                    .collect::<Result<_>>()?,
            },
        };
        let filler = self.filler.as_deref().map(|s| parse_quotient(s, p)).transpose()?;
        QuasiPeriodicSpec::new(p, many(&self.quotients)?, filler, generator)
    }
}

fn load_spec(source: &SpecSource) -> Result<(QuasiPeriodicSpec, Option<BigRational>)> {
    match (source.example, &source.spec) {
        (Some(ex), _) => {
            let p = source
                .prime
                .ok_or_else(|| RubanError::InvalidInput("--example needs --prime".into()))?;
            let p = Prime::new(p)?;
            Ok((if ex == 1 { example1(p) } else { example2(p) }, None))
        }
        (None, Some(path)) => {
            let text = read_file(path)?;
            let doc: QuasiSpecDoc = parse_json(&text, path)?;
            check_prime_flag(source.prime, doc.p)?;
            let a = doc.a.as_deref().map(parse_fraction).transpose()?;
            Ok((doc.to_spec()?, a))
        }
        (None, None) => Err(RubanError::InvalidInput("give --example or --spec".into())),
    }
}

#[derive(Debug, Serialize)]
pub struct ChecklistDoc {
    pub name: String,
    pub passed: bool,
    pub certainty: String,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct WindowDoc {
    pub min: String,
    pub max: String,
    pub blocks: usize,
}

#[derive(Debug, Serialize)]
pub struct CriterionDoc {
    pub theorem: String,
    pub p: u64,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(rename = "Bprime", skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<String>,
    pub threshold: String,
    pub threshold_exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_window: Option<WindowDoc>,
    pub depth: usize,
    pub checklist: Vec<ChecklistDoc>,
    pub verdict: String,
}

pub fn run_criterion(args: &CriterionArgs) -> Result<String> {
    let theorem = Theorem::from_index(args.theorem)
        .ok_or_else(|| RubanError::InvalidInput(format!("unknown theorem {}", args.theorem)))?;
    let (spec, file_a) = load_spec(&args.source)?;
    let a = match &args.a {
        Some(s) => parse_fraction(s)?,
        None => file_a.unwrap_or_else(|| spec.default_a()),
    };
    let r = transcendence::check(theorem, &spec, &a, args.depth)?;
    let bound = r.bound.clone().expect("every theorem has a threshold");
    let bound_str = bound.to_string();
    let ratio_window = match &r.ratio {
        RatioEvidence::Windowed { min, max, blocks } => Some(WindowDoc {
            min: format_fraction(min),
            max: format_fraction(max),
            blocks: *blocks,
        }),
        _ => None,
    };
    let doc = CriterionDoc {
        theorem: theorem.id().into(),
        p: spec.prime().get(),
        a: r.a.as_ref().map(format_fraction),
        b: (theorem == Theorem::Main).then(|| bound_str.clone()),
        b_prime: (theorem == Theorem::Limsup).then(|| bound_str.clone()),
        threshold: bound_str,
        threshold_exact: matches!(bound, BoundValue::Exact(_)),
        ratio: r.ratio_value.as_ref().map(|v| v.to_string()),
        ratio_window,
        depth: r.depth,
        checklist: r
            .checklist
            .iter()
            .map(|c| ChecklistDoc {
                name: c.name.into(),
                passed: c.passed,
                certainty: c.certainty.name().into(),
                detail: c.detail.clone(),
            })
            .collect(),
        verdict: r.verdict.name().into(),
    };
    to_json(&doc)
}

#[derive(Debug, Serialize)]
pub struct TelescopeEntryDoc {
    pub i: usize,
    pub n: usize,
    pub factors: usize,
    pub telescopes: bool,
    pub mirror_agrees: bool,
    pub evaluated_factors: usize,
    pub contiguous: bool,
}

#[derive(Debug, Serialize)]
pub struct TelescopeDoc {
    pub p: u64,
    pub entries: Vec<TelescopeEntryDoc>,
    pub all_exact: bool,
}

pub fn run_telescope(args: &TelescopeArgs) -> Result<String> {
    let (spec, _) = load_spec(&args.source)?;
    let r = transcendence::telescope_check(&spec, args.max_i)?;
    to_json(&TelescopeDoc {
        p: spec.prime().get(),
        all_exact: r.all_exact(),
        entries: r
            .entries
            .iter()
            .map(|e| TelescopeEntryDoc {
                i: e.i,
                n: e.n,
                factors: e.factors,
                telescopes: e.telescopes,
                mirror_agrees: e.mirror_agrees,
                evaluated_factors: e.evaluated_factors,
                contiguous: e.contiguous,
            })
            .collect(),
    })
}

/// Runs one command and returns the JSON document to print.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Expand(a) => run_expand(a),
        Command::Classify(a) => run_classify(a),
        Command::Height(a) => run_height(a),
        Command::Criterion(a) => run_criterion(a),
        Command::Telescope(a) => run_telescope(a),
    }
}
