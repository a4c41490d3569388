//! Acceptance suite. Every criterion runs, prints one PASS/FAIL line, and
//! the test fails at the end if any criterion failed.
//!
//! All comparisons are exact; the only tolerances are wall-clock limits,
//! pinned per criterion below.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subindep::atlas::{
    classify_all_pairs, enumerate_subgroups, render_report, AtlasConfig, ReportFormat,
};
use subindep::hom::{enumerate_endomorphisms, is_compatible, ExtensionConflict, GroupMap};
use subindep::independence::{
    brute_force_independent, check_conjugacy_merge, check_union_independent_sets,
    is_independent_set, verify_factoring, OracleOptions, Side, Verdict, Witness,
};
use subindep::pipeline::{decide, Config, Status, Step};
use subindep::{intersection, is_isomorphic, FiniteGroup, Permutation, SubgroupPair};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

const BIG: usize = 5040;

fn p(s: &str, n: usize) -> Permutation {
    Permutation::parse(s, n).unwrap()
}

fn gen(strs: &[&str], n: usize) -> Arc<FiniteGroup> {
    let gens: Vec<Permutation> = strs.iter().map(|s| p(s, n)).collect();
    Arc::new(FiniteGroup::closure(&gens, n, BIG).unwrap())
}

fn pair(a: &[&str], b: &[&str], n: usize) -> SubgroupPair {
    SubgroupPair::new(gen(a, n), gen(b, n), BIG).unwrap()
}

fn set(strs: &[&str], n: usize) -> Vec<Permutation> {
    let mut v: Vec<Permutation> = strs.iter().map(|s| p(s, n)).collect();
    v.sort();
    v
}

fn cfg() -> Config {
    Config {
        record_timing: false,
        ..Config::default()
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Outcome {
    let t = start.elapsed();
    ensure!(t < limit, "{what} took {t:?}, limit {limit:?}");
    Ok(())
}

fn c1() -> Outcome {
    let start = Instant::now();
    let pr = pair(&["(12)"], &["(13)"], 3);
    let d = decide(&pr, &cfg()).unwrap();
    ensure!(d.status == Status::Dependent, "status {:?}", d.status);
    ensure!(d.recheck(&pr).unwrap(), "certificate does not recheck");
    ensure!(
        pr.join().unwrap().order() == 6,
        "join order {}",
        pr.join().unwrap().order()
    );
    let ncl_b = pr.ncl_b().unwrap();
    ensure!(
        ncl_b.order() == 6,
        "normal closure of B has order {}",
        ncl_b.order()
    );
    ensure!(
        ncl_b.contains(&p("(12)", 3)),
        "(1 2) not in normal closure of B"
    );
    within(start, Duration::from_secs(1), "decision")
}

fn c2() -> Outcome {
    let start = Instant::now();
    let pr = pair(&["(12)"], &["(13)(24)"], 4);
    let d = decide(&pr, &cfg()).unwrap();
    ensure!(d.status == Status::Independent, "status {:?}", d.status);
    ensure!(d.recheck(&pr).unwrap(), "certificate does not recheck");
    let join = pr.join().unwrap().elements().to_vec();
    let listed = set(
        &[
            "e", "(12)", "(34)", "(12)(34)", "(13)(24)", "(14)(23)", "(1324)", "(1423)",
        ],
        4,
    );
    ensure!(join == listed, "join {join:?}");
    let ncl_a = pr.ncl_a().unwrap().elements().to_vec();
    ensure!(
        ncl_a == set(&["e", "(12)", "(34)", "(12)(34)"], 4),
        "ncl(A) {ncl_a:?}"
    );
    let ncl_b = pr.ncl_b().unwrap().elements().to_vec();
    ensure!(
        ncl_b == set(&["e", "(13)(24)", "(12)(34)", "(14)(23)"], 4),
        "ncl(B) {ncl_b:?}"
    );
    let meet = intersection(pr.ncl_a().unwrap(), pr.ncl_b().unwrap());
    ensure!(
        meet.elements() == set(&["e", "(12)(34)"], 4).as_slice(),
        "intersection {:?}",
        meet.elements()
    );
    within(start, Duration::from_secs(1), "decision")
}

fn c3() -> Outcome {
    let start = Instant::now();
    let pr = pair(&["(12)", "(56)"], &["(13)(24)"], 6);
    let d = decide(&pr, &cfg()).unwrap();
    ensure!(
        (d.status, d.step) == (Status::Dependent, Step::Step4),
        "got {:?} at {:?}",
        d.status,
        d.step
    );
    let Some(Witness::IncompatiblePair {
        alpha,
        beta,
        conflict,
    }) = &d.witness
    else {
        return Err(format!("witness {:?}", d.witness));
    };
    let q = |s| p(s, 6);
    ensure!(beta.is_identity(), "beta is not the identity");
    let expect_alpha = [
        ("e", "e"),
        ("(12)", "(56)"),
        ("(56)", "(12)"),
        ("(12)(56)", "(12)(56)"),
    ];
    for (x, y) in expect_alpha {
        ensure!(
            alpha.apply(&q(x)) == Some(&q(y)),
            "alpha({x}) = {:?}",
            alpha.apply(&q(x))
        );
    }
    let want = ExtensionConflict::ForcedImages {
        element: q("(13)(24)(56)"),
        first: q("(1324)"),
        second: q("(1423)"),
    };
    ensure!(conflict == &want, "conflict {conflict:?}");
    ensure!(d.recheck(&pr).unwrap(), "certificate does not recheck");
    // both separation checks ran and passed before the exhaustive stage
    for s in [Step::Step3i, Step::Step3ii] {
        let o = subindep::pipeline::run_step(&pr, s, &cfg()).unwrap();
        ensure!(
            o.verdict == Verdict::Inconclusive,
            "{s} decided {:?}",
            o.verdict
        );
    }
    within(start, Duration::from_secs(5), "decision")
}

fn c4() -> Outcome {
    let pr = pair(&["(12)"], &["(123)"], 3);
    let d = decide(&pr, &cfg()).unwrap();
    ensure!(
        (d.status, d.step) == (Status::Dependent, Step::Step2ii),
        "got {:?} at {:?}",
        d.status,
        d.step
    );
    let Some(Witness::OrderViolation {
        order_b,
        order_product,
        ..
    }) = d.witness
    else {
        return Err(format!("witness {:?}", d.witness));
    };
    ensure!(
        (order_b, order_product) == (3, 2),
        "orders |b| = {order_b}, |ab| = {order_product}"
    );
    Ok(())
}

fn c5() -> Outcome {
    let pr = pair(&["(12)", "(34)"], &["(1234)"], 4);
    let mut problems = Vec::new();
    let merge = check_conjugacy_merge(&pr).unwrap();
    match &merge.witness {
        Some(Witness::ConjugacyMerge {
            side: Side::A,
            first,
            second,
            ..
        }) => {
            let got: BTreeSet<_> = [first.clone(), second.clone()].into();
            let want: BTreeSet<_> = [p("(12)", 4), p("(34)", 4)].into();
            if got != want {
                problems.push(format!("merge witness {got:?}"));
            }
            if !merge.witness.as_ref().unwrap().recheck(&pr).unwrap() {
                problems.push("merge witness does not recheck".into());
            }
        }
        w => problems.push(format!("merge check gave {w:?}")),
    }
    let d = decide(&pr, &cfg()).unwrap();
    if d.status != Status::Dependent {
        problems.push(format!("status {:?}", d.status));
    }
    if !matches!(d.step, Step::Step3iii | Step::Step3iv) {
        problems.push(format!(
            "pipeline decides at {} (witness {:?}), not at a conjugacy-merge step",
            d.step, d.witness
        ));
    }
    ensure!(problems.is_empty(), "{}", problems.join("; "));
    Ok(())
}

fn c6() -> Outcome {
    let (a, a2, b) = (gen(&["(12)"], 4), gen(&["(13)"], 4), gen(&["(34)"], 4));
    let first = SubgroupPair::new(a.clone(), b.clone(), BIG).unwrap();
    let second = SubgroupPair::new(a2.clone(), b.clone(), BIG).unwrap();
    let d = decide(&first, &cfg()).unwrap();
    ensure!(
        (d.status, d.step) == (Status::Independent, Step::Step2i),
        "first pair {:?} at {:?}",
        d.status,
        d.step
    );
    let d = decide(&second, &cfg()).unwrap();
    ensure!(
        (d.status, d.step) == (Status::Dependent, Step::Step2ii),
        "second pair {:?} at {:?}",
        d.status,
        d.step
    );
    ensure!(
        is_isomorphic(&a, &a2, 512).unwrap().is_some(),
        "A and A' not isomorphic"
    );
    ensure!(
        is_isomorphic(&b, &b, 512).unwrap().is_some(),
        "B and B' not isomorphic"
    );
    Ok(())
}

fn c7() -> Outcome {
    let start = Instant::now();
    for (n, rows) in [(3, 36), (4, 900)] {
        let rep = classify_all_pairs(n, &AtlasConfig::default()).unwrap();
        ensure!(rep.rows.len() == rows, "S{n}: {} rows", rep.rows.len());
        let s = &rep.summary;
        ensure!(
            s.oracle_disagreements == 0,
            "S{n}: {} oracle disagreements",
            s.oracle_disagreements
        );
        let bad: usize = s.check_disagreements.values().sum();
        ensure!(
            bad == 0,
            "S{n}: check disagreements {:?}",
            s.check_disagreements
        );
        ensure!(s.budget_trips == 0, "S{n}: {} budget trips", s.budget_trips);
        // the pipeline against the oracle as a standalone call, with its skip-list
        let g = FiniteGroup::symmetric(n, BIG).unwrap();
        let subs = enumerate_subgroups(&g, 2);
        for a in &subs {
            for b in &subs {
                let pr = SubgroupPair::new(a.clone(), b.clone(), BIG).unwrap();
                let d = decide(&pr, &cfg()).unwrap();
                let o = brute_force_independent(&pr, OracleOptions::default());
                ensure!(
                    Status::from(o.verdict) == d.status,
                    "S{n}: pipeline {:?} vs oracle {:?} on {:?} / {:?}",
                    d.status,
                    o.verdict,
                    a.generators(),
                    b.generators()
                );
            }
        }
    }
    within(start, Duration::from_secs(600), "sweep")
}

/// BFS representatives: for each join element, a word of `(a, b)` pairs
/// whose product is that element.
fn pair_words(pr: &SubgroupPair) -> HashMap<Permutation, Vec<(Permutation, Permutation)>> {
    let id = Permutation::identity(pr.degree());
    let mut words = HashMap::from([(id.clone(), Vec::new())]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for a in pr.a().elements() {
            for b in pr.b().elements() {
                let y = &(&x * a) * b;
                if !words.contains_key(&y) {
                    let mut w = words[&x].clone();
                    w.push((a.clone(), b.clone()));
                    words.insert(y.clone(), w);
                    queue.push_back(y);
                }
            }
        }
    }
    words
}

fn c8() -> Outcome {
    let g = FiniteGroup::symmetric(4, BIG).unwrap();
    let subs = enumerate_subgroups(&g, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut violations: Vec<String> = Vec::new();
    let mut note = |name: &str, a: &FiniteGroup, b: &FiniteGroup| {
        violations.push(format!(
            "{name} on {:?} / {:?}",
            a.generators(),
            b.generators()
        ));
    };
    for a in &subs {
        for b in &subs {
            let pr = SubgroupPair::new(a.clone(), b.clone(), BIG).unwrap();
            let opts = OracleOptions {
                endo_budget: BIG,
                use_shortcuts: false,
            };
            let indep = match brute_force_independent(&pr, opts).verdict {
                Verdict::ProvesIndependent => true,
                Verdict::ProvesDependent => false,
                Verdict::Inconclusive => return Err("oracle inconclusive".into()),
            };
            let join = pr.join().unwrap();
            let sep_a = intersection(a, pr.ncl_b().unwrap()).is_trivial();
            let sep_b = intersection(b, pr.ncl_a().unwrap()).is_trivial();
            let (na, nb) = (a.is_normal_in(join), b.is_normal_in(join));
            let disjoint = pr.intersection().is_trivial();

            if indep && !(sep_a && sep_b) {
                note("separation necessity", a, b);
            }
            let id_a = GroupMap::identity_map(a.clone());
            let triv_a = GroupMap::trivial_map(a.clone());
            let id_b = GroupMap::identity_map(b.clone());
            let triv_b = GroupMap::trivial_map(b.clone());
            if sep_a != is_compatible(&id_a, &triv_b, &pr).unwrap() {
                note("separation iff (id, triv) extends", a, b);
            }
            if sep_b != is_compatible(&triv_a, &id_b, &pr).unwrap() {
                note("separation iff (triv, id) extends", a, b);
            }
            if na && nb && disjoint && !indep {
                note("both normal and disjoint implies independent", a, b);
            }
            if na != nb && indep {
                note("exactly one normal implies dependent", a, b);
            }
            let f = verify_factoring(&pr, 512).unwrap();
            if indep && !f.holds() {
                note("independent implies quotient isomorphisms", a, b);
            }
            if f.a_side != sep_a || f.b_side != sep_b {
                note("quotient isomorphism iff separated", a, b);
            }
            if sep_a && sep_b {
                let words = pair_words(&pr);
                for _ in 0..16 {
                    // a random word followed by a word for its inverse multiplies to e
                    let len = rng.gen_range(1..=4);
                    let mut w: Vec<(Permutation, Permutation)> = (0..len)
                        .map(|_| {
                            (
                                a.elements().choose(&mut rng).unwrap().clone(),
                                b.elements().choose(&mut rng).unwrap().clone(),
                            )
                        })
                        .collect();
                    let prod = w
                        .iter()
                        .fold(Permutation::identity(4), |acc, (x, y)| &(&acc * x) * y);
                    w.extend(words[&prod.inverse()].iter().cloned());
                    let total = w
                        .iter()
                        .fold(Permutation::identity(4), |acc, (x, y)| &(&acc * x) * y);
                    assert!(total.is_identity());
                    let pa = w
                        .iter()
                        .fold(Permutation::identity(4), |acc, (x, _)| &acc * x);
                    let pb = w
                        .iter()
                        .fold(Permutation::identity(4), |acc, (_, y)| &acc * y);
                    if !pa.is_identity() || !pb.is_identity() {
                        note("identity words split into identity products", a, b);
                        break;
                    }
                }
            }
            if indep {
                for _ in 0..8 {
                    let pick = |g: &FiniteGroup, rng: &mut ChaCha8Rng| -> Vec<Permutation> {
                        let k = rng.gen_range(0..=g.order().min(3));
                        g.elements().choose_multiple(rng, k).cloned().collect()
                    };
                    let sa = pick(a, &mut rng);
                    let sb = pick(b, &mut rng);
                    if is_independent_set(&sa, a)
                        && is_independent_set(&sb, b)
                        && !check_union_independent_sets(&pr, &sa, &sb).unwrap()
                    {
                        note("union of independent sets", a, b);
                    }
                }
            }
        }
    }
    ensure!(
        violations.is_empty(),
        "{} violations: {:?}",
        violations.len(),
        &violations[..violations.len().min(5)]
    );
    Ok(())
}

/// All maps `G → G` respecting the multiplication table, found by assigning
/// images in element order and rejecting as soon as a product of assigned
/// elements lands on an assigned element with the wrong image.
fn brute_force_endomorphisms(g: &FiniteGroup) -> BTreeSet<Vec<usize>> {
    let n = g.order();
    let els = g.elements();
    let table: Vec<Vec<usize>> = els
        .iter()
        .map(|x| els.iter().map(|y| g.index_of(&(x * y)).unwrap()).collect())
        .collect();
    let mut out = BTreeSet::new();
    let mut img = vec![0usize; n];
    fn rec(
        k: usize,
        n: usize,
        table: &[Vec<usize>],
        img: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if k == n {
            out.insert(img.clone());
            return;
        }
        for v in 0..n {
            img[k] = v;
            let ok = (0..=k).all(|i| {
                (0..=k).all(|j| {
                    let ij = table[i][j];
                    ij > k || table[img[i]][img[j]] == img[ij]
                })
            });
            if ok {
                rec(k + 1, n, table, img, out);
            }
        }
    }
    rec(0, n, &table, &mut img, &mut out);
    out
}

fn c9() -> Outcome {
    let g = FiniteGroup::symmetric(4, BIG).unwrap();
    let mut checked = 0;
    for s in enumerate_subgroups(&g, 2)
        .into_iter()
        .filter(|s| s.order() <= 8)
    {
        let expected = brute_force_endomorphisms(&s);
        let got: BTreeSet<Vec<usize>> = enumerate_endomorphisms(&s, BIG)
            .unwrap()
            .iter()
            .map(|m| m.table().iter().map(|&i| i as usize).collect())
            .collect();
        ensure!(
            got == expected,
            "{:?}: {} endomorphisms, brute force {}",
            s.generators(),
            got.len(),
            expected.len()
        );
        checked += 1;
    }
    ensure!(checked == 28, "checked {checked} subgroups");
    Ok(())
}

fn c10() -> Outcome {
    let render = |jobs: usize| -> Vec<Vec<u8>> {
        let config = AtlasConfig {
            jobs: Some(jobs),
            ..AtlasConfig::default()
        };
        [3, 4]
            .into_iter()
            .flat_map(|n| {
                let rep = classify_all_pairs(n, &config).unwrap();
                [
                    render_report(&rep, ReportFormat::Json).unwrap(),
                    render_report(&rep, ReportFormat::Csv).unwrap(),
                ]
            })
            .collect()
    };
    let one = render(1);
    let four = render(4);
    ensure!(one == four, "reports differ between 1 and 4 workers");
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("transpositions (1 2), (1 3) in S3 are dependent", c1),
        (
            "(1 2) and (1 3)(2 4) in S4 are independent; join and closures exact",
            c2,
        ),
        (
            "(1 2),(5 6) against (1 3)(2 4) in S6 fails only at the exhaustive stage",
            c3,
        ),
        ("(1 2) against (1 2 3) fails order divisibility", c4),
        (
            "(1 2),(3 4) against (1 2 3 4) is caught by a conjugacy merge",
            c5,
        ),
        ("isomorphic sides, different verdicts", c6),
        ("S3 and S4 sweeps agree with the oracle", c7),
        ("structural properties over the S4 sweep", c8),
        (
            "endomorphism enumeration matches brute force for orders up to 8",
            c9,
        ),
        ("sweep reports are identical for 1 and 4 workers", c10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let t = start.elapsed();
        match r {
            Ok(()) => println!("criterion {:>2}: PASS  {name} ({t:.2?})", i + 1),
            Err(e) => {
                println!("criterion {:>2}: FAIL  {name} ({t:.2?}): {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
