//! Exhaustive classification of subgroup pairs of a small symmetric group,
//! cross-checking every individual check and the staged pipeline against the
//! endomorphism-pair oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::GroupError;
use crate::group::{intersection, join, FiniteGroup};
use crate::hom::{enumerate_endomorphisms, GroupMap};
use crate::independence::{brute_force_with, Verdict};
use crate::iso::is_isomorphic;
use crate::pair::SubgroupPair;
use crate::perm::Permutation;
use crate::pipeline::{decide, run_step, Config, Status, Step};

/// Subgroups of `g` generated by at most `max_gens` elements, deduplicated
/// and sorted by order, then by element list. Each carries canonical
/// generators.
pub fn enumerate_subgroups(g: &FiniteGroup, max_gens: usize) -> Vec<Arc<FiniteGroup>> {
    grow_subgroups(g, Some(max_gens))
}

/// Every subgroup of `g`: joins of cyclic subgroups iterated to a fixpoint.
pub fn enumerate_all_subgroups(g: &FiniteGroup) -> Vec<Arc<FiniteGroup>> {
    grow_subgroups(g, None)
}

fn grow_subgroups(g: &FiniteGroup, max_gens: Option<usize>) -> Vec<Arc<FiniteGroup>> {
    let degree = g.degree();
    let close = |gens: &[Permutation]| {
        FiniteGroup::closure(gens, degree, g.order()).expect("subgroup of a finite group")
    };
    let mut seen: BTreeSet<Vec<Permutation>> = BTreeSet::new();
    seen.insert(vec![Permutation::identity(degree)]);
    let mut cyclic: Vec<Vec<Permutation>> = Vec::new();
    if max_gens != Some(0) {
        for x in g.elements() {
            let c = close(std::slice::from_ref(x)).elements().to_vec();
            if seen.insert(c.clone()) {
                cyclic.push(c);
            }
        }
    }
    let mut frontier = cyclic.clone();
    let mut rounds = 1;
    while !frontier.is_empty() && max_gens.is_none_or(|k| rounds < k) {
        let mut next = Vec::new();
        for h in &frontier {
            for c in &cyclic {
                let hg = FiniteGroup::from_sorted_elements(degree, h.clone());
                let cg = FiniteGroup::from_sorted_elements(degree, c.clone());
                let j = join(&hg, &cg, g.order())
                    .expect("inside g")
                    .elements()
                    .to_vec();
                if seen.insert(j.clone()) {
                    next.push(j);
                }
            }
        }
        frontier = next;
        rounds += 1;
    }
    let mut out: Vec<Vec<Permutation>> = seen.into_iter().collect();
    out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    out.into_iter()
        .map(|els| Arc::new(FiniteGroup::from_sorted_elements(degree, els)))
        .collect()
}

/// Outcome of one check in an atlas row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Dependent,
    Independent,
    Inconclusive,
    Budget,
}

impl Slot {
    fn from_result(r: Result<Verdict, GroupError>) -> Slot {
        match r {
            Ok(Verdict::ProvesDependent) => Slot::Dependent,
            Ok(Verdict::ProvesIndependent) => Slot::Independent,
            Ok(Verdict::Inconclusive) => Slot::Inconclusive,
            Err(_) => Slot::Budget,
        }
    }

    fn as_status(self) -> Option<Status> {
        match self {
            Slot::Dependent => Some(Status::Dependent),
            Slot::Independent => Some(Status::Independent),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Slot::Dependent => "dependent",
            Slot::Independent => "independent",
            Slot::Inconclusive => "inconclusive",
            Slot::Budget => "budget",
        }
    }
}

/// Each check of the pipeline run on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CheckSlots {
    pub step1: Slot,
    pub step2i: Slot,
    pub step2ii: Slot,
    pub normal_asym: Slot,
    pub step3i: Slot,
    pub step3ii: Slot,
    pub step3iii: Slot,
    pub step3iv: Slot,
}

impl CheckSlots {
    pub fn get(&self, step: Step) -> Option<Slot> {
        Some(match step {
            Step::Step1 => self.step1,
            Step::Step2i => self.step2i,
            Step::Step2ii => self.step2ii,
            Step::NormalAsym => self.normal_asym,
            Step::Step3i => self.step3i,
            Step::Step3ii => self.step3ii,
            Step::Step3iii => self.step3iii,
            Step::Step3iv => self.step3iv,
            _ => return None,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Step, Slot)> + '_ {
        Step::CHECKS
            .into_iter()
            .map(|s| (s, self.get(s).expect("check step")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtlasRow {
    pub pair_id: usize,
    pub a_gens: String,
    pub b_gens: String,
    pub a_order: usize,
    pub b_order: usize,
    pub join_order: Option<usize>,
    pub checks: CheckSlots,
    pub pipeline_status: Status,
    pub pipeline_step: Step,
    pub oracle: Status,
    /// `A ∩ ⟨Conj(B)⟩ = {e}` and `B ∩ ⟨Conj(A)⟩ = {e}`.
    pub separated_both: Option<bool>,
    /// `⟨Conj(A)⟩ ∩ ⟨Conj(B)⟩ = {e}`.
    pub ncl_intersection_trivial: Option<bool>,
    pub both_normal: Option<bool>,
    /// Separated both ways with intersecting normal closures, and the oracle
    /// reached a verdict.
    pub gap_region: bool,
    #[serde(skip)]
    a_index: usize,
    #[serde(skip)]
    b_index: usize,
}

impl AtlasRow {
    pub fn subgroup_indices(&self) -> (usize, usize) {
        (self.a_index, self.b_index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Quadruple {
    pub independent_pair: usize,
    pub dependent_pair: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub pipeline_by_status: BTreeMap<String, usize>,
    pub pipeline_by_step: BTreeMap<String, usize>,
    pub oracle_by_status: BTreeMap<String, usize>,
    /// Rows where the pipeline and the oracle both decide and disagree.
    pub oracle_disagreements: usize,
    /// Decisive standalone checks contradicting the oracle, per check.
    pub check_disagreements: BTreeMap<String, usize>,
    /// Rows whose oracle verdict differs from the swapped pair's.
    pub symmetry_violations: usize,
    pub budget_trips: usize,
    pub gap_rows: usize,
    pub gap_dependent: Vec<usize>,
    pub gap_independent: usize,
    /// Independent rows that are not separated both ways.
    pub separation_necessity_violations: usize,
    /// Rows with trivially intersecting normal closures that are not
    /// independent.
    pub ncl_sufficiency_violations: usize,
    /// Pairs of rows with isomorphic sides but different oracle verdicts;
    /// the first found is `isomorphism_witness`.
    pub isomorphism_non_invariant: usize,
    pub isomorphism_witness: Option<Quadruple>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtlasReport {
    pub degree: usize,
    pub max_gens: Option<usize>,
    pub subgroup_count: usize,
    pub rows: Vec<AtlasRow>,
    pub summary: Summary,
}

#[derive(Debug, Clone)]
pub struct AtlasConfig {
    /// `None` enumerates the full subgroup lattice.
    pub max_gens: Option<usize>,
    pub pipeline: Config,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for AtlasConfig {
    fn default() -> Self {
        Self {
            max_gens: Some(2),
            pipeline: Config {
                record_timing: false,
                ..Config::default()
            },
            jobs: None,
        }
    }
}

pub fn gens_string(g: &FiniteGroup) -> String {
    if g.generators().is_empty() {
        return "e".to_string();
    }
    g.generators()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

/// A subgroup's endomorphisms, or the budget error that stopped enumeration.
pub type Endos = Result<Vec<GroupMap>, GroupError>;

fn oracle_status(pair: &SubgroupPair, ea: &Endos, eb: &Endos) -> Status {
    match (ea, eb) {
        (Ok(ea), Ok(eb)) => match brute_force_with(pair, ea, eb, false) {
            Ok(o) => o.verdict.into(),
            Err(_) => Status::Inconclusive,
        },
        _ => Status::Inconclusive,
    }
}

/// Classifies one pair by every individual check, the pipeline and the
/// oracle. Endomorphism lists may be supplied to avoid recomputing them.
pub fn classify_pair(
    a: Arc<FiniteGroup>,
    b: Arc<FiniteGroup>,
    config: &Config,
    endos: Option<(&Endos, &Endos)>,
) -> Result<AtlasRow, GroupError> {
    let pair = SubgroupPair::new(a, b, config.max_group_order)?;
    let slot = |s: Step| Slot::from_result(run_step(&pair, s, config).map(|o| o.verdict));
    let checks = CheckSlots {
        step1: slot(Step::Step1),
        step2i: slot(Step::Step2i),
        step2ii: slot(Step::Step2ii),
        normal_asym: slot(Step::NormalAsym),
        step3i: slot(Step::Step3i),
        step3ii: slot(Step::Step3ii),
        step3iii: slot(Step::Step3iii),
        step3iv: slot(Step::Step3iv),
    };
    let decision = decide(&pair, config)?;
    let oracle = match endos {
        Some((ea, eb)) => oracle_status(&pair, ea, eb),
        None => oracle_status(
            &pair,
            &enumerate_endomorphisms(pair.a(), config.endo_budget),
            &enumerate_endomorphisms(pair.b(), config.endo_budget),
        ),
    };
    let separated_both = match (checks.step3i, checks.step3ii) {
        (Slot::Budget, _) | (_, Slot::Budget) => None,
        (x, y) => Some(x == Slot::Inconclusive && y == Slot::Inconclusive),
    };
    let ncl_intersection_trivial = match (pair.ncl_a(), pair.ncl_b()) {
        (Ok(x), Ok(y)) => Some(intersection(x, y).is_trivial()),
        _ => None,
    };
    let both_normal = pair
        .join()
        .ok()
        .map(|j| pair.a().is_normal_in(j) && pair.b().is_normal_in(j));
    let gap_region = separated_both == Some(true)
        && ncl_intersection_trivial == Some(false)
        && oracle != Status::Inconclusive;
    Ok(AtlasRow {
        pair_id: 0,
        a_gens: gens_string(pair.a()),
        b_gens: gens_string(pair.b()),
        a_order: pair.a().order(),
        b_order: pair.b().order(),
        join_order: pair.join().ok().map(|j| j.order()),
        checks,
        pipeline_status: decision.status,
        pipeline_step: decision.step,
        oracle,
        separated_both,
        ncl_intersection_trivial,
        both_normal,
        gap_region,
        a_index: 0,
        b_index: 0,
    })
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Classifies every ordered pair of subgroups of `S_n`.
pub fn classify_all_pairs(n: usize, config: &AtlasConfig) -> Result<AtlasReport, GroupError> {
    let g = FiniteGroup::symmetric(n, config.pipeline.max_group_order)?;
    let subgroups = match config.max_gens {
        Some(k) => enumerate_subgroups(&g, k),
        None => enumerate_all_subgroups(&g),
    };
    in_pool(config.jobs, || classify_subgroups(n, config, subgroups))
}

fn classify_subgroups(
    degree: usize,
    config: &AtlasConfig,
    subgroups: Vec<Arc<FiniteGroup>>,
) -> Result<AtlasReport, GroupError> {
    let pcfg = Config {
        parallelism: None,
        ..config.pipeline.clone()
    };
    let endos: Vec<Endos> = subgroups
        .par_iter()
        .map(|s| enumerate_endomorphisms(s, pcfg.endo_budget))
        .collect();
    let k = subgroups.len();
    let mut rows: Vec<AtlasRow> = (0..k * k)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / k, idx % k);
            let mut row = classify_pair(
                subgroups[i].clone(),
                subgroups[j].clone(),
                &pcfg,
                Some((&endos[i], &endos[j])),
            )?;
            row.a_index = i;
            row.b_index = j;
            Ok(row)
        })
        .collect::<Result<_, GroupError>>()?;
    rows.sort_by(|x, y| (&x.a_gens, &x.b_gens).cmp(&(&y.a_gens, &y.b_gens)));
    for (id, r) in rows.iter_mut().enumerate() {
        r.pair_id = id;
    }
    let iso_class = isomorphism_classes(&subgroups, pcfg.iso_budget);
    let summary = summarize(&rows, &iso_class);
    Ok(AtlasReport {
        degree,
        max_gens: config.max_gens,
        subgroup_count: k,
        rows,
        summary,
    })
}

/// Labels each subgroup with the index of the first isomorphic one. Groups
/// whose test exceeds the budget get their own label.
fn isomorphism_classes(subgroups: &[Arc<FiniteGroup>], iso_budget: usize) -> Vec<usize> {
    let mut label: Vec<usize> = Vec::with_capacity(subgroups.len());
    for (i, s) in subgroups.iter().enumerate() {
        let rep = (0..i)
            .filter(|&j| label[j] == j)
            .find(|&j| matches!(is_isomorphic(&subgroups[j], s, iso_budget), Ok(Some(_))));
        label.push(rep.unwrap_or(i));
    }
    label
}

fn summarize(rows: &[AtlasRow], iso_class: &[usize]) -> Summary {
    let mut s = Summary {
        rows: rows.len(),
        ..Summary::default()
    };
    let mut by_pair: BTreeMap<(usize, usize), Status> = BTreeMap::new();
    for r in rows {
        by_pair.insert(r.subgroup_indices(), r.oracle);
    }
    for r in rows {
        *s.pipeline_by_status
            .entry(r.pipeline_status.to_string())
            .or_default() += 1;
        *s.pipeline_by_step
            .entry(r.pipeline_step.to_string())
            .or_default() += 1;
        *s.oracle_by_status.entry(r.oracle.to_string()).or_default() += 1;
        if r.oracle != Status::Inconclusive
            && r.pipeline_status != Status::Inconclusive
            && r.oracle != r.pipeline_status
        {
            s.oracle_disagreements += 1;
        }
        for (step, slot) in r.checks.iter() {
            let bad = matches!((slot.as_status(), r.oracle), (Some(v), o) if o != Status::Inconclusive && v != o);
            let e = s.check_disagreements.entry(step.to_string()).or_default();
            *e += usize::from(bad);
        }
        let (i, j) = r.subgroup_indices();
        if by_pair.get(&(j, i)).is_some_and(|&o| o != r.oracle) {
            s.symmetry_violations += 1;
        }
        let tripped = r.oracle == Status::Inconclusive
            || r.pipeline_status == Status::Inconclusive
            || r.checks.iter().any(|(_, x)| x == Slot::Budget);
        s.budget_trips += usize::from(tripped);
        if r.gap_region {
            s.gap_rows += 1;
            match r.oracle {
                Status::Dependent => s.gap_dependent.push(r.pair_id),
                Status::Independent => s.gap_independent += 1,
                Status::Inconclusive => {}
            }
        }
        if r.oracle == Status::Independent && r.separated_both == Some(false) {
            s.separation_necessity_violations += 1;
        }
        if r.ncl_intersection_trivial == Some(true) && r.oracle == Status::Dependent {
            s.ncl_sufficiency_violations += 1;
        }
    }
    // Rows grouped by the isomorphism types of their two sides.
    let mut classes: BTreeMap<(usize, usize), (Option<usize>, Option<usize>)> = BTreeMap::new();
    for r in rows {
        let (i, j) = r.subgroup_indices();
        let e = classes.entry((iso_class[i], iso_class[j])).or_default();
        match r.oracle {
            Status::Independent => {
                e.0.get_or_insert(r.pair_id);
            }
            Status::Dependent => {
                e.1.get_or_insert(r.pair_id);
            }
            Status::Inconclusive => {}
        }
    }
    for (ind, dep) in classes.values() {
        if let (Some(ind), Some(dep)) = (ind, dep) {
            s.isomorphism_non_invariant += 1;
            let q = Quadruple {
                independent_pair: *ind,
                dependent_pair: *dep,
            };
            if s.isomorphism_witness.as_ref().is_none_or(|w| {
                (q.independent_pair, q.dependent_pair) < (w.independent_pair, w.dependent_pair)
            }) {
                s.isomorphism_witness = Some(q);
            }
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Columns of the CSV report, in order. Check columns hold
/// `dependent`, `independent`, `inconclusive` or `budget`; optional flags
/// are empty when a budget prevented computing them.
pub const CSV_COLUMNS: [&str; 21] = [
    "pair_id",
    "a_gens",
    "b_gens",
    "a_order",
    "b_order",
    "join_order",
    "step1",
    "step2i",
    "step2ii",
    "normal_asym",
    "step3i",
    "step3ii",
    "step3iii",
    "step3iv",
    "pipeline_status",
    "pipeline_step",
    "oracle",
    "separated_both",
    "ncl_intersection_trivial",
    "both_normal",
    "gap_region",
];

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Renders a report. CSV carries the rows only; JSON carries rows and
/// summary.
pub fn render_report(
    report: &AtlasReport,
    format: ReportFormat,
) -> Result<Vec<u8>, std::io::Error> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_COLUMNS)?;
            for r in &report.rows {
                let mut rec = vec![
                    r.pair_id.to_string(),
                    r.a_gens.clone(),
                    r.b_gens.clone(),
                    r.a_order.to_string(),
                    r.b_order.to_string(),
                    opt(r.join_order),
                ];
                rec.extend(r.checks.iter().map(|(_, x)| x.as_str().to_string()));
                rec.extend([
                    r.pipeline_status.to_string(),
                    r.pipeline_step.to_string(),
                    r.oracle.to_string(),
                    opt(r.separated_both),
                    opt(r.ncl_intersection_trivial),
                    opt(r.both_normal),
                    r.gap_region.to_string(),
                ]);
                w.write_record(&rec)?;
            }
            w.into_inner().map_err(|e| e.into_error())
        }
    }
}

pub fn emit_report(
    report: &AtlasReport,
    path: &Path,
    format: ReportFormat,
) -> Result<(), std::io::Error> {
    let bytes = render_report(report, format)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subsets_closure(g: &FiniteGroup) -> BTreeSet<Vec<Permutation>> {
        // every subgroup of a group of order <= 6 is generated by two elements,
        // so closing all pairs is exhaustive; checked here against all subsets
        let els = g.elements();
        let n = els.len();
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << n) {
            let set: Vec<Permutation> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| els[i].clone())
                .collect();
            if let Ok(h) = FiniteGroup::from_elements(g.degree(), set) {
                out.insert(h.elements().to_vec());
            }
        }
        out
    }

    #[test]
    fn s3_subgroups() {
        let s3 = FiniteGroup::symmetric(3, 100).unwrap();
        let subs = enumerate_subgroups(&s3, 2);
        assert_eq!(subs.len(), 6);
        let got: BTreeSet<Vec<Permutation>> = subs.iter().map(|h| h.elements().to_vec()).collect();
        assert_eq!(got, subsets_closure(&s3));
        let orders: Vec<usize> = subs.iter().map(|h| h.order()).collect();
        assert_eq!(orders, vec![1, 2, 2, 2, 3, 6]);
    }

    #[test]
    fn trivial_group_has_one_subgroup() {
        let t = FiniteGroup::trivial(3);
        let subs = enumerate_subgroups(&t, 2);
        assert_eq!(subs.len(), 1);
        assert!(subs[0].is_trivial());
        assert_eq!(gens_string(&subs[0]), "e");
        assert_eq!(enumerate_all_subgroups(&t).len(), 1);
    }

    #[test]
    fn s4_subgroups_match_pair_closures() {
        let s4 = FiniteGroup::symmetric(4, 100).unwrap();
        let mut brute: BTreeSet<Vec<Permutation>> = BTreeSet::new();
        for x in s4.elements() {
            for y in s4.elements() {
                let h = FiniteGroup::closure(&[x.clone(), y.clone()], 4, 100).unwrap();
                brute.insert(h.elements().to_vec());
            }
        }
        let subs = enumerate_subgroups(&s4, 2);
        assert_eq!(subs.len(), 30);
        let got: BTreeSet<Vec<Permutation>> = subs.iter().map(|h| h.elements().to_vec()).collect();
        assert_eq!(got, brute);
        assert_eq!(enumerate_all_subgroups(&s4).len(), 30);
        assert_eq!(enumerate_subgroups(&s4, 1).len(), 17);
    }

    #[test]
    fn s3_atlas() {
        let rep = classify_all_pairs(3, &AtlasConfig::default()).unwrap();
        assert_eq!(rep.rows.len(), 36);
        assert_eq!(rep.summary.oracle_disagreements, 0);
        assert_eq!(rep.summary.symmetry_violations, 0);
        let find = |a: &str, b: &str| {
            rep.rows
                .iter()
                .find(|r| r.a_gens == a && r.b_gens == b)
                .unwrap()
        };
        assert_eq!(find("(1 2)", "(1 3)").oracle, Status::Dependent);
        for r in rep.rows.iter().filter(|r| r.a_gens == "e") {
            assert_eq!(r.oracle, Status::Independent);
        }
        assert!(rep
            .rows
            .windows(2)
            .all(|w| (&w[0].a_gens, &w[0].b_gens) < (&w[1].a_gens, &w[1].b_gens)));
    }

    #[test]
    fn empty_report_is_header_only() {
        let rep = AtlasReport {
            degree: 0,
            max_gens: Some(2),
            subgroup_count: 0,
            rows: vec![],
            summary: Summary::default(),
        };
        let csv = String::from_utf8(render_report(&rep, ReportFormat::Csv).unwrap()).unwrap();
        assert_eq!(csv, CSV_COLUMNS.join(",") + "\n");
    }
}
