//! The staged decision procedure: cheap necessary and sufficient checks in a
//! fixed order, falling back to the exhaustive endomorphism-pair search.

use std::fmt::{self, Write as _};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::GroupError;
use crate::group::FiniteGroup;
use crate::hom::{
    check_product_law, enumerate_endomorphisms, extend, ExtensionConflict, ExtensionResult,
};
use crate::independence::{
    brute_force_with, check_almost_disjoint, check_commuting, check_normal_asymmetry,
    check_order_divisibility, check_order_divisibility_pair, check_side_conjugacy_merge,
    check_side_separated, verify_factoring, CheckOutcome, FactoringReport, Side, Verdict, Witness,
};
use crate::pair::SubgroupPair;
use crate::perm::{PermError, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub max_group_order: usize,
    pub endo_budget: usize,
    pub iso_budget: usize,
    pub run_diagnostics: bool,
    pub output_format: OutputFormat,
    /// Worker threads for the exhaustive search; `None` uses the global pool.
    pub parallelism: Option<usize>,
    /// Run the separation check whose normal closure comes from the smaller
    /// subgroup first.
    pub easier_first: bool,
    /// When `false`, `elapsed_ms` is reported as 0 so output is
    /// byte-reproducible.
    pub record_timing: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            max_group_order: 5040,
            endo_budget: 256,
            iso_budget: 512,
            run_diagnostics: false,
            output_format: OutputFormat::Json,
            parallelism: None,
            easier_first: false,
            record_timing: true,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let budgets = [
            ("max_group_order", self.max_group_order),
            ("endo_budget", self.endo_budget),
            ("iso_budget", self.iso_budget),
        ];
        for (name, v) in budgets {
            if v == 0 {
                return Err(PipelineError::InvalidConfig(format!(
                    "{name} must be at least 1"
                )));
            }
        }
        if self.parallelism == Some(0) {
            return Err(PipelineError::InvalidConfig(
                "worker count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("malformed pair specification: {0}")]
    Json(#[from] serde_json::Error),
    #[error("generator {index} of {side:?} ({text:?}): {source}")]
    Generator {
        side: Side,
        index: usize,
        text: String,
        source: PermError,
    },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Independent,
    Dependent,
    Inconclusive,
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::ProvesDependent => Status::Dependent,
            Verdict::ProvesIndependent => Status::Independent,
            Verdict::Inconclusive => Status::Inconclusive,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Independent => "independent",
            Status::Dependent => "dependent",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// Pipeline stages, in the order they run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// Nontrivial `A ∩ B`.
    Step1,
    /// All of `A` commutes with all of `B`.
    Step2i,
    /// Order divisibility on non-commuting pairs.
    Step2ii,
    /// Exactly one side normal in the join, or both.
    NormalAsym,
    /// `B ∩ ⟨Conj(A)⟩`.
    Step3i,
    /// `A ∩ ⟨Conj(B)⟩`.
    Step3ii,
    /// Conjugacy classes of `A` merging in the join.
    Step3iii,
    /// Conjugacy classes of `B` merging in the join.
    Step3iv,
    /// Exhaustive endomorphism pairs.
    Step4,
    BudgetExceeded,
}

impl Step {
    /// The checks that can decide a pair, in pipeline order.
    pub const CHECKS: [Step; 8] = [
        Step::Step1,
        Step::Step2i,
        Step::Step2ii,
        Step::NormalAsym,
        Step::Step3i,
        Step::Step3ii,
        Step::Step3iii,
        Step::Step3iv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Step::Step1 => "step1",
            Step::Step2i => "step2i",
            Step::Step2ii => "step2ii",
            Step::NormalAsym => "normal_asym",
            Step::Step3i => "step3i",
            Step::Step3ii => "step3ii",
            Step::Step3iii => "step3iii",
            Step::Step3iv => "step3iv",
            Step::Step4 => "step4",
            Step::BudgetExceeded => "budget_exceeded",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Step::Step1 => "step 1",
            Step::Step2i => "step 2(i)",
            Step::Step2ii => "step 2(ii)",
            Step::NormalAsym => "normality",
            Step::Step3i => "step 3(i)",
            Step::Step3ii => "step 3(ii)",
            Step::Step3iii => "step 3(iii)",
            Step::Step3iv => "step 3(iv)",
            Step::Step4 => "step 4",
            Step::BudgetExceeded => "budget exceeded",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub join_order: Option<usize>,
    pub ncl_a_order: Option<usize>,
    pub ncl_b_order: Option<usize>,
    pub endo_a: Option<usize>,
    pub endo_b: Option<usize>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProductLawReport {
    /// Compatible endomorphism pairs whose extension was sampled.
    pub pairs_tested: usize,
    pub samples_per_pair: usize,
    pub passed: bool,
}

/// Post-decision consistency checks. A failed check that should hold for the
/// verdict indicates a bug, not a property of the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub factoring: Option<FactoringReport>,
    pub product_law: Option<ProductLawReport>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub status: Status,
    pub step: Step,
    pub witness: Option<Witness>,
    pub stats: Stats,
    pub diagnostics: Option<Diagnostics>,
}

impl Decision {
    /// 0 when decided, 2 when a budget stopped the run.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Inconclusive => 2,
            _ => 0,
        }
    }

    pub fn recheck(&self, pair: &SubgroupPair) -> Result<bool, GroupError> {
        match &self.witness {
            Some(w) => w.recheck(pair),
            None => Ok(false),
        }
    }
}

/// Input for a single decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub degree: usize,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
}

impl PairSpec {
    pub fn into_pair(&self, max_group_order: usize) -> Result<SubgroupPair, PipelineError> {
        let build = |side: Side, gens: &[String]| -> Result<Arc<FiniteGroup>, PipelineError> {
            let perms = gens
                .iter()
                .enumerate()
                .map(|(index, text)| {
                    Permutation::parse(text, self.degree).map_err(|source| {
                        PipelineError::Generator {
                            side,
                            index,
                            text: text.clone(),
                            source,
                        }
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if self.degree == 0 {
                return Err(GroupError::from(PermError::ZeroDegree).into());
            }
            Ok(Arc::new(FiniteGroup::closure(
                &perms,
                self.degree,
                max_group_order,
            )?))
        };
        let a = build(Side::A, &self.a)?;
        let b = build(Side::B, &self.b)?;
        Ok(SubgroupPair::new(a, b, max_group_order)?)
    }
}

/// Parses `{"degree": n, "A": [...], "B": [...]}` and closes both generator
/// lists.
pub fn parse_pair_spec(input: &str, max_group_order: usize) -> Result<SubgroupPair, PipelineError> {
    let spec: PairSpec = serde_json::from_str(input)?;
    spec.into_pair(max_group_order)
}

/// Runs one check on its own. `Step4` is the exhaustive search with the
/// usual skip-list; `BudgetExceeded` is not a check and is inconclusive.
pub fn run_step(
    pair: &SubgroupPair,
    step: Step,
    config: &Config,
) -> Result<CheckOutcome, GroupError> {
    Ok(match step {
        Step::Step1 => check_almost_disjoint(pair),
        Step::Step2i => check_commuting(pair).outcome,
        Step::Step2ii => check_order_divisibility_pair(pair),
        Step::NormalAsym => check_normal_asymmetry(pair)?,
        Step::Step3i => check_side_separated(pair, Side::B)?,
        Step::Step3ii => check_side_separated(pair, Side::A)?,
        Step::Step3iii => check_side_conjugacy_merge(pair, Side::A)?,
        Step::Step3iv => check_side_conjugacy_merge(pair, Side::B)?,
        Step::Step4 => {
            let ea = enumerate_endomorphisms(pair.a(), config.endo_budget)?;
            let eb = enumerate_endomorphisms(pair.b(), config.endo_budget)?;
            brute_force_with(pair, &ea, &eb, true)?
        }
        Step::BudgetExceeded => CheckOutcome::inconclusive(),
    })
}

struct Outcome {
    step: Step,
    outcome: CheckOutcome,
    endo: Option<(usize, usize)>,
}

fn run_pipeline(pair: &SubgroupPair, config: &Config) -> Result<Outcome, GroupError> {
    let done = |step, outcome| Outcome {
        step,
        outcome,
        endo: None,
    };

    let o = check_almost_disjoint(pair);
    if o.is_decisive() {
        return Ok(done(Step::Step1, o));
    }
    let commuting = check_commuting(pair);
    if commuting.outcome.is_decisive() {
        return Ok(done(Step::Step2i, commuting.outcome));
    }
    // Only non-commuting pairs can violate divisibility, so the scan starts
    // at the first one found above.
    let a_elems = &pair.a().elements()[1..];
    let b_elems = &pair.b().elements()[1..];
    let o = check_order_divisibility(
        a_elems
            .iter()
            .flat_map(|x| b_elems.iter().map(move |y| (x, y)))
            .skip_while(|&(x, y)| {
                commuting
                    .first_noncommuting
                    .as_ref()
                    .is_some_and(|(fx, fy)| (x, y) != (fx, fy))
            })
            .filter(|(x, y)| !x.commutes_with(y)),
    );
    if o.is_decisive() {
        return Ok(done(Step::Step2ii, o));
    }

    pair.join()?;
    let o = check_normal_asymmetry(pair)?;
    if o.is_decisive() {
        return Ok(done(Step::NormalAsym, o));
    }

    let mut separation = [(Step::Step3i, Side::B), (Step::Step3ii, Side::A)];
    if config.easier_first && pair.b().order() < pair.a().order() {
        separation.swap(0, 1);
    }
    for (step, side) in separation {
        let o = check_side_separated(pair, side)?;
        if o.is_decisive() {
            return Ok(done(step, o));
        }
    }
    for (step, side) in [(Step::Step3iii, Side::A), (Step::Step3iv, Side::B)] {
        let o = check_side_conjugacy_merge(pair, side)?;
        if o.is_decisive() {
            return Ok(done(step, o));
        }
    }

    let ea = enumerate_endomorphisms(pair.a(), config.endo_budget)?;
    let eb = enumerate_endomorphisms(pair.b(), config.endo_budget)?;
    let o = brute_force_with(pair, &ea, &eb, true)?;
    Ok(Outcome {
        step: Step::Step4,
        outcome: o,
        endo: Some((ea.len(), eb.len())),
    })
}

/// Decides independence of `pair`. The first decisive check wins; a tripped
/// budget yields an inconclusive decision naming it.
pub fn decide(pair: &SubgroupPair, config: &Config) -> Result<Decision, GroupError> {
    match config.parallelism {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            pool.install(|| decide_inner(pair, config))
        }
        None => decide_inner(pair, config),
    }
}

fn decide_inner(pair: &SubgroupPair, config: &Config) -> Result<Decision, GroupError> {
    let start = Instant::now();
    let (step, outcome, endo) = match run_pipeline(pair, config) {
        Ok(o) => (o.step, o.outcome, o.endo),
        Err(GroupError::BudgetExceeded { budget, limit }) => (
            Step::BudgetExceeded,
            CheckOutcome {
                verdict: Verdict::Inconclusive,
                witness: Some(Witness::BudgetExceeded { budget, limit }),
            },
            None,
        ),
        Err(e) => return Err(e),
    };
    let diagnostics = config
        .run_diagnostics
        .then(|| diagnose(pair, outcome.verdict, config));
    // Fill in whatever the deciding step did not need; a budget trip here
    // just leaves the field empty.
    let _ = pair.ncl_a();
    let _ = pair.ncl_b();
    let (join_order, ncl_a_order, ncl_b_order) = pair.cached_orders();
    let elapsed_ms = if config.record_timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(Decision {
        status: outcome.verdict.into(),
        step,
        witness: outcome.witness,
        stats: Stats {
            join_order,
            ncl_a_order,
            ncl_b_order,
            endo_a: endo.map(|e| e.0),
            endo_b: endo.map(|e| e.1),
            elapsed_ms,
        },
        diagnostics,
    })
}

const LAW_PAIRS: usize = 16;
const LAW_SAMPLES: usize = 32;
const LAW_WORD_LEN: usize = 4;

fn diagnose(pair: &SubgroupPair, verdict: Verdict, config: &Config) -> Diagnostics {
    let mut notes = Vec::new();
    let factoring = match verify_factoring(pair, config.iso_budget) {
        Ok(r) => {
            if verdict == Verdict::ProvesIndependent && !r.holds() {
                notes.push("quotient isomorphisms fail for a pair decided independent".to_string());
            }
            Some(r)
        }
        Err(e) => {
            notes.push(format!("factoring skipped: {e}"));
            None
        }
    };
    let product_law = (|| -> Result<ProductLawReport, GroupError> {
        let ea = enumerate_endomorphisms(pair.a(), config.endo_budget)?;
        let eb = enumerate_endomorphisms(pair.b(), config.endo_budget)?;
        let mut tested = 0;
        let mut passed = true;
        for (i, (alpha, beta)) in ea
            .iter()
            .flat_map(|a| eb.iter().map(move |b| (a, b)))
            .enumerate()
        {
            if tested == LAW_PAIRS {
                break;
            }
            if let ExtensionResult::Exists(gamma) = extend(alpha, beta, pair)? {
                tested += 1;
                passed &=
                    check_product_law(&gamma, alpha, beta, LAW_SAMPLES, LAW_WORD_LEN, i as u64);
            }
        }
        Ok(ProductLawReport {
            pairs_tested: tested,
            samples_per_pair: LAW_SAMPLES,
            passed,
        })
    })();
    let product_law = match product_law {
        Ok(r) => {
            if !r.passed {
                notes.push("an extension violates the product law".to_string());
            }
            Some(r)
        }
        Err(e) => {
            notes.push(format!("product law skipped: {e}"));
            None
        }
    };
    Diagnostics {
        factoring,
        product_law,
        notes,
    }
}

/// Parses a pair specification and decides it.
pub fn decide_spec(
    input: &str,
    config: &Config,
) -> Result<(SubgroupPair, Decision), PipelineError> {
    let spec: PairSpec = serde_json::from_str(input)?;
    decide_pair_spec(&spec, config)
}

/// Closes the generators of `spec` and decides the pair.
pub fn decide_pair_spec(
    spec: &PairSpec,
    config: &Config,
) -> Result<(SubgroupPair, Decision), PipelineError> {
    config.validate()?;
    let pair = spec.into_pair(config.max_group_order)?;
    let d = decide(&pair, config)?;
    Ok((pair, d))
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::A => "A",
        Side::B => "B",
    }
}

fn describe_conflict(c: &ExtensionConflict) -> String {
    match c {
        ExtensionConflict::ForcedImages {
            element,
            first,
            second,
        } => {
            format!("the join element {element} would have to map to both {first} and {second}")
        }
        ExtensionConflict::Restriction {
            element,
            expected,
            found,
        } => format!("the extension sends {element} to {found} instead of {expected}"),
    }
}

/// A one-line human reading of a witness.
pub fn describe_witness(w: &Witness) -> String {
    match w {
        Witness::SharedElement { element } => format!("{element} lies in both A and B"),
        Witness::AllCommute { pairs_checked } => {
            format!("A ∩ B is trivial and all {pairs_checked} pairs (a, b) commute")
        }
        Witness::OrderViolation {
            a,
            b,
            product,
            order_a,
            order_b,
            order_product,
        } => format!("a = {a} (order {order_a}), b = {b} (order {order_b}), ab = {product} has order {order_product}"),
        Witness::BothNormal => "A and B are both normal in the join and A ∩ B is trivial".to_string(),
        Witness::OneSideNormal {
            normal_side,
            conjugator,
            element,
            conjugate,
        } => format!(
            "{} is normal in the join but {} is not: {conjugator} conjugates {element} to {conjugate}",
            side_name(*normal_side),
            side_name(normal_side.other())
        ),
        Witness::NotSeparated { side, element } => format!(
            "{element} lies in {} and in the normal closure of {}",
            side_name(*side),
            side_name(side.other())
        ),
        Witness::ConjugacyMerge {
            side,
            first,
            second,
            conjugator,
        } => format!(
            "{first} and {second} are not conjugate in {} but {conjugator} conjugates one to the other in the join",
            side_name(*side)
        ),
        Witness::IncompatiblePair { alpha, beta, conflict } => {
            let show = |m: &crate::hom::GroupMap| {
                m.domain()
                    .generators()
                    .iter()
                    .map(|g| format!("{g} -> {}", m.apply(g).expect("in domain")))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            format!(
                "alpha = {{{}}}, beta = {{{}}} have no common extension: {}",
                show(alpha),
                show(beta),
                describe_conflict(conflict)
            )
        }
        Witness::AllPairsCompatible {
            endo_a,
            endo_b,
            pairs_checked,
            pairs_skipped,
        } => format!(
            "all {} endomorphism pairs extend ({endo_a} x {endo_b}; {pairs_checked} checked, {pairs_skipped} known to extend)",
            endo_a * endo_b
        ),
        Witness::BudgetExceeded { budget, limit } => format!("{budget} limit {limit} exceeded"),
    }
}

/// Renders a decision as pretty JSON or as a short human-readable report.
pub fn format_decision(d: &Decision, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(d).expect("decision serializes");
            s.push('\n');
            s
        }
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} ({})",
                d.status.to_string().to_uppercase(),
                d.step.label()
            );
            if let Some(w) = &d.witness {
                let key = if d.status == Status::Inconclusive {
                    "reason"
                } else {
                    "witness"
                };
                let _ = writeln!(s, "{key}: {}", describe_witness(w));
            }
            let show = |o: Option<usize>| o.map_or_else(|| "-".to_string(), |v| v.to_string());
            let st = &d.stats;
            let _ = writeln!(
                s,
                "join order: {}, ncl(A): {}, ncl(B): {}",
                show(st.join_order),
                show(st.ncl_a_order),
                show(st.ncl_b_order)
            );
            if let (Some(ea), Some(eb)) = (st.endo_a, st.endo_b) {
                let _ = writeln!(s, "endomorphisms: |End(A)| = {ea}, |End(B)| = {eb}");
            }
            if let Some(diag) = &d.diagnostics {
                if let Some(f) = diag.factoring {
                    let _ = writeln!(s, "factoring: A side {}, B side {}", f.a_side, f.b_side);
                }
                if let Some(p) = diag.product_law {
                    let _ = writeln!(
                        s,
                        "product law: {} on {} extensions",
                        if p.passed { "holds" } else { "FAILS" },
                        p.pairs_tested
                    );
                }
                for n in &diag.notes {
                    let _ = writeln!(s, "note: {n}");
                }
            }
            s
        }
    }
}
