//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! lines are always printed; exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use irreducibility::corpus::{self, EXAMPLES};
use irreducibility::info_order::{is_equivalent, is_poorer, join, meet, DerivedVariable};
use irreducibility::irreducibility::IrreducibilityReport;
use irreducibility::parts::{self, PartFamily};
use irreducibility::union_info::{brute_force_union_oracle, check_axioms, AxiomCase, OracleSettings};
use irreducibility::{full_report, JointDistribution, UnionMeasure, VariableSelector};

const TABLE_TOL: f64 = 1e-6;
const TABLE_BUDGET: Duration = Duration::from_secs(60);
const LEMMA_TOL: f64 = 1e-6;
const AXIOM_TOL: f64 = 1e-6;
const CONSTANT_TARGET_TOL: f64 = 1e-9;
const ORDER_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-4;
const LATTICE_TOL: f64 = 1e-9;

const LEMMA_TRIALS: usize = 50;
const AXIOM_TRIALS: usize = 100;
const ORDER_TRIALS: usize = 200;
const ORACLE_TRIALS: usize = 100;
const LATTICE_PAIRS: usize = 200;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

fn main() -> ExitCode {
    let m = UnionMeasure::min_synergy();
    let mut seen: Vec<JointDistribution> = EXAMPLES.iter().map(|e| e.distribution()).collect();
    let mut outcomes: Vec<(usize, &str, Outcome, Duration)> = Vec::new();
    let mut run = |k: usize, title: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        outcomes.push((k, title, o, start.elapsed()));
        let (k, title, o, t) = outcomes.last().unwrap();
        println!("criterion {k} [{}] {title}: {} ({:.1}s)", if o.passed { "PASS" } else { "FAIL" }, o.detail, t.as_secs_f64());
    };

    run(1, "reference table", &mut || table(&m));
    run(2, "intermediate values", &mut || intermediate(&m));
    let mut lemma_dists = Vec::new();
    run(3, "lemma equivalences", &mut || lemmas(&m, &mut lemma_dists));
    let mut axiom_dists = Vec::new();
    run(4, "axiom suite", &mut || axioms(&m, &mut axiom_dists));
    seen.extend(lemma_dists);
    seen.extend(axiom_dists);
    run(5, "ordering chain", &mut || ordering(&m, &seen));
    run(6, "solver against oracle", &mut || oracle(&m));
    run(7, "lattice properties", &mut || lattice());
    run(8, "deterministic output", &mut || determinism());

    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.2.passed).map(|o| o.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of {} criteria fail: {failed:?}", failed.len(), outcomes.len());
        ExitCode::FAILURE
    }
}

fn random_binary(rng: &mut ChaCha8Rng, n: usize) -> JointDistribution {
    let sparsity = rng.gen_range(0.0..0.5);
    JointDistribution::random(rng, &vec![2; n], 2, sparsity)
}

fn union(m: &UnionMeasure, d: &JointDistribution, f: &PartFamily) -> f64 {
    m.union_information(d, f).expect("union information")
}

fn report(m: &UnionMeasure, d: &JointDistribution) -> IrreducibilityReport {
    full_report(d, m).expect("report")
}

fn table(m: &UnionMeasure) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for e in &EXAMPLES {
        let d = e.distribution();
        let h = d.entropy(&VariableSelector::single(d.target())).unwrap();
        let row = corpus::compare(e, &report(m, &d));
        if !row.matches || (h - e.expected[0]).abs() > TABLE_TOL {
            bad.push(format!("{} H(Y)={h:.6} got {:?} want {:?}", e.name, row.computed.map(|x| (x * 1e6).round() / 1e6), e.expected));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > TABLE_BUDGET {
        bad.push(format!("took {:.1}s", elapsed.as_secs_f64()));
    }
    if bad.is_empty() {
        Outcome::new(true, format!("5 examples within {TABLE_TOL:e}"))
    } else {
        Outcome::new(false, bad.join("; "))
    }
}

fn intermediate(m: &UnionMeasure) -> Outcome {
    let mut bad = Vec::new();
    let mut check = |what: String, got: f64, want: f64| {
        if (got - want).abs() > TABLE_TOL {
            bad.push(format!("{what} = {got:.6}, want {want}"));
        }
    };

    let d = corpus::load_example("xor_unique").unwrap().distribution();
    let y = d.target_selector();
    for (name, want) in [("X1", 0.0), ("X2", 0.0), ("X3", 1.0)] {
        check(format!("xor_unique I({name};Y)"), d.mutual_information(&d.selector(&[name]).unwrap(), &y).unwrap(), want);
    }

    let d = corpus::load_example("double_xor").unwrap().distribution();
    let r = report(m, &d);
    let by_name: BTreeMap<&str, f64> = r.ibdp.candidates.iter().map(|(l, v)| (l.as_str(), *v)).collect();
    for (label, want) in [("{X1X2|X3}", 1.0), ("{X2X3|X1}", 1.0), ("{X1X3|X2}", 0.0)] {
        check(format!("double_xor union {label}"), by_name.get(label).copied().unwrap_or(f64::NAN), want);
    }
    check("double_xor max bipartition union".into(), r.whole_mi - r.ibdp.raw, 1.0);

    let d = corpus::load_example("triple_xor").unwrap().distribution();
    let r = report(m, &d);
    for (label, v) in &r.ib2p.candidates {
        check(format!("triple_xor union {label}"), *v, 2.0);
    }

    let d = corpus::load_example("parity").unwrap().distribution();
    for p in parts::all_parts(3).unwrap() {
        let sel = VariableSelector::new(p.indices().iter().copied());
        check(format!("parity I({};Y)", p.label(&["X1", "X2", "X3"].map(String::from))), d.mutual_information(&sel, &y).unwrap(), 0.0);
    }

    if bad.is_empty() {
        Outcome::new(true, "all walk-through values within 1e-6")
    } else {
        Outcome::new(false, bad.join("; "))
    }
}

fn lemmas(m: &UnionMeasure, dists: &mut Vec<JointDistribution>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    *dists = (0..LEMMA_TRIALS).map(|_| random_binary(&mut rng, 3)).collect();
    let all_parts = parts::all_parts(3).unwrap();
    let partitions = parts::all_partitions(3).unwrap();
    let bipartitions = parts::all_bipartitions(3).unwrap();
    let part_pairs: Vec<PartFamily> = (0..all_parts.len())
        .flat_map(|i| (i + 1..all_parts.len()).map(move |j| (i, j)))
        .map(|(i, j)| PartFamily::new(vec![all_parts[i].clone(), all_parts[j].clone()]).unwrap())
        .collect();
    let almost_pairs = parts::almost_pairs(3).unwrap();
    let every_part = PartFamily::new(all_parts.clone()).unwrap();
    let almosts = parts::all_almosts(3).unwrap();
    let max = |d: &JointDistribution, fams: &mut dyn Iterator<Item = PartFamily>| {
        fams.map(|f| union(m, d, &f)).fold(f64::NEG_INFINITY, f64::max)
    };

    let worst: [f64; 3] = dists
        .par_iter()
        .map(|d| {
            [
                (max(d, &mut partitions.iter().map(|p| p.family())) - max(d, &mut bipartitions.iter().map(|p| p.family()))).abs(),
                (max(d, &mut part_pairs.iter().cloned()) - max(d, &mut almost_pairs.iter().cloned())).abs(),
                (union(m, d, &every_part) - union(m, d, &almosts)).abs(),
            ]
        })
        .reduce(|| [0.0; 3], |a, b| [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])]);
    Outcome::new(
        worst.iter().all(|&w| w <= LEMMA_TOL),
        format!(
            "{LEMMA_TRIALS} distributions, worst gaps: partitions {:.1e}, pairs {:.1e}, all parts {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn constant_target(d: &JointDistribution) -> JointDistribution {
    let t = d.target();
    let mut alphabets: Vec<Vec<String>> = (0..d.arity()).map(|v| d.alphabet(v).to_vec()).collect();
    alphabets[t].truncate(1);
    let rows = d.support().iter().map(|(r, p)| {
        let mut r = r.clone();
        r[t] = 0;
        (r, *p)
    });
    JointDistribution::new(d.names().to_vec(), alphabets, t, rows).unwrap()
}

fn axioms(m: &UnionMeasure, dists: &mut Vec<JointDistribution>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    *dists = (0..AXIOM_TRIALS).map(|t| random_binary(&mut rng, 2 + t % 2)).collect();
    let mut cases = Vec::new();
    for e in &EXAMPLES {
        cases.extend(AxiomCase::standard(e.name, &e.distribution()).unwrap());
    }
    for (t, d) in dists.iter().enumerate() {
        cases.extend(AxiomCase::standard(&format!("random#{t}"), d).unwrap());
    }
    let chunks: Vec<_> = cases.chunks(16).enumerate().collect();
    let reports: Vec<_> = chunks.par_iter().map(|(i, c)| check_axioms(m, c, *i as u64).unwrap()).collect();
    let mut summary: BTreeMap<&str, (bool, f64)> = BTreeMap::new();
    for r in &reports {
        assert_eq!(r.tolerance, AXIOM_TOL);
        for a in &r.results {
            let e = summary.entry(a.axiom).or_insert((true, 0.0));
            e.0 &= a.passed;
            e.1 = e.1.max(a.max_violation);
        }
    }

    let flat_worst = EXAMPLES
        .iter()
        .map(|e| e.distribution())
        .chain(dists.iter().cloned())
        .collect::<Vec<_>>()
        .par_iter()
        .map(|d| {
            let flat = constant_target(d);
            let r = report(m, &flat);
            let unions = [&r.ibe, &r.ibdp, &r.ib2p, &r.ibap].iter().flat_map(|mv| mv.candidates.iter().map(|c| c.1.abs())).fold(0.0, f64::max);
            r.values().iter().map(|v| v.abs()).fold(unions, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    let axioms_ok = summary.values().all(|s| s.0);
    let detail: Vec<String> = summary.iter().map(|(k, (ok, v))| format!("{k} {} {v:.1e}", if *ok { "ok" } else { "FAILED" })).collect();
    Outcome::new(
        axioms_ok && flat_worst <= CONSTANT_TARGET_TOL,
        format!("{} cases: {}; constant target worst {flat_worst:.1e}", cases.len(), detail.join(", ")),
    )
}

fn ordering(m: &UnionMeasure, seen: &[JointDistribution]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut dists: Vec<JointDistribution> = seen.to_vec();
    dists.extend((0..ORDER_TRIALS).map(|_| random_binary(&mut rng, 3)));
    let results: Vec<Result<f64, String>> = dists
        .par_iter()
        .map(|d| {
            let r = full_report(d, m).map_err(|e| e.to_string())?;
            let [w, e, dp, p2, ap] = r.values();
            Ok([0.0 - ap, ap - p2, p2 - dp, dp - e, e - w].into_iter().fold(0.0, f64::max))
        })
        .collect();
    let errors: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let worst = results.iter().filter_map(|r| r.as_ref().ok()).copied().fold(0.0, f64::max);
    let mut detail = format!("{} distributions, worst excess {worst:.1e}", dists.len());
    if let Some(e) = errors.first() {
        detail.push_str(&format!(", {} errors, first: {e}", errors.len()));
    }
    Outcome::new(errors.is_empty() && worst <= ORDER_TOL, detail)
}

fn oracle(m: &UnionMeasure) -> Outcome {
    let settings = OracleSettings::default();
    let mut instances: Vec<(String, JointDistribution, PartFamily)> = Vec::new();
    for e in &EXAMPLES {
        for c in AxiomCase::standard(e.name, &e.distribution()).unwrap() {
            instances.push((c.name, c.dist, c.family));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for t in 0..ORACLE_TRIALS {
        let d = random_binary(&mut rng, 2 + t % 2);
        let mut fams = AxiomCase::standard("", &d).unwrap();
        let c = fams.swap_remove(rng.gen_range(0..fams.len()));
        instances.push((format!("random#{t} {}", c.family), d, c.family));
    }
    let diffs: Vec<(f64, &str)> = instances
        .par_iter()
        .map(|(name, d, f)| {
            let solver = union(m, d, f);
            let o = brute_force_union_oracle(d, f, &settings).expect("oracle");
            ((solver - o.value).abs(), name.as_str())
        })
        .collect();
    let worst = diffs.iter().copied().fold((0.0, ""), |a, b| if b.0 > a.0 { b } else { a });
    Outcome::new(worst.0 <= ORACLE_TOL, format!("{} instances, worst {:.1e} ({})", diffs.len(), worst.0, worst.1))
}

fn lattice() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = Vec::new();
    let mut counts = [0usize; 3];
    for k in 0..LATTICE_PAIRS {
        let sparsity = rng.gen_range(0.0..0.7);
        let d = JointDistribution::random(&mut rng, &[2, 3, 2], 3, sparsity);
        let n = d.support().len();
        let random_labels = |rng: &mut ChaCha8Rng| -> Vec<u32> {
            let k = rng.gen_range(1..=n.max(1)) as u32;
            (0..n).map(|_| rng.gen_range(0..k)).collect()
        };
        let lu = random_labels(&mut rng);
        let lv: Vec<u32> = match k % 3 {
            // a coarsening of u
            0 => {
                let map: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3)).collect();
                lu.iter().map(|&l| map[l as usize]).collect()
            }
            // a relabeling of u
            1 => {
                let mut perm: Vec<u32> = (0..n as u32).collect();
                perm.reverse();
                lu.iter().map(|&l| perm[l as usize]).collect()
            }
            _ => random_labels(&mut rng),
        };
        let lw = random_labels(&mut rng);
        let u = DerivedVariable::from_labels(&d, &lu).unwrap();
        let v = DerivedVariable::from_labels(&d, &lv).unwrap();
        let w = DerivedVariable::from_labels(&d, &lw).unwrap();
        let mut fail = |what: &str| bad.push(format!("pair {k}: {what}"));

        for (a, b) in [(&u, &v), (&v, &u)] {
            let poorer = is_poorer(a, b).unwrap();
            let h = a.conditional_entropy(b).unwrap();
            if poorer != (h <= LATTICE_TOL) {
                fail("poorer disagrees with H(a|b)");
            }
            if poorer {
                counts[0] += 1;
                if a.entropy() > b.entropy() + LATTICE_TOL {
                    fail("poorer but higher entropy");
                }
                if w.conditional_entropy(a).unwrap() < w.conditional_entropy(b).unwrap() - LATTICE_TOL {
                    fail("conditioning on poorer lowered entropy");
                }
                let relabeled: Vec<u32> = b.labels().iter().map(|&l| b.n_labels() as u32 - 1 - l).collect();
                let b2 = DerivedVariable::from_labels(&d, &relabeled).unwrap();
                if !is_poorer(a, &b2).unwrap() {
                    fail("order not invariant within equivalence class");
                }
            }
        }
        if is_equivalent(&u, &v).unwrap() {
            counts[1] += 1;
            if (u.entropy() - v.entropy()).abs() > LATTICE_TOL
                || (u.conditional_entropy(&w).unwrap() - v.conditional_entropy(&w).unwrap()).abs() > LATTICE_TOL
            {
                fail("equivalent variables differ in entropy");
            }
        }
        let mt = meet(&u, &v).unwrap();
        let jn = join(&u, &v).unwrap();
        if !(is_poorer(&mt, &u).unwrap() && is_poorer(&mt, &v).unwrap()) {
            fail("meet not below both");
        }
        if !(is_poorer(&u, &jn).unwrap() && is_poorer(&v, &jn).unwrap()) {
            fail("join not above both");
        }
        if is_poorer(&w, &u).unwrap() && is_poorer(&w, &v).unwrap() {
            counts[2] += 1;
            if !is_poorer(&w, &mt).unwrap() {
                fail("common lower bound not below meet");
            }
        }
        let perm_u: Vec<u32> = u.labels().iter().map(|&l| (l + 1) % u.n_labels() as u32).collect();
        let u2 = DerivedVariable::from_labels(&d, &perm_u).unwrap();
        if !is_equivalent(&meet(&u2, &v).unwrap(), &mt).unwrap() || !is_equivalent(&join(&u2, &v).unwrap(), &jn).unwrap() {
            fail("meet or join changed under relabeling");
        }
        if (jn.entropy() - (v.entropy() + u.conditional_entropy(&v).unwrap())).abs() > LATTICE_TOL {
            fail("chain rule");
        }
    }
    if bad.is_empty() {
        Outcome::new(
            true,
            format!(
                "{LATTICE_PAIRS} pairs ({} ordered, {} equivalent, {} with common lower bound)",
                counts[0], counts[1], counts[2]
            ),
        )
    } else {
        bad.truncate(5);
        Outcome::new(false, bad.join("; "))
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let input = dir.path().join("random.tsv");
    std::fs::write(&input, random_binary(&mut rng, 3).to_tsv()).unwrap();
    let outputs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("run{i}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_irreducibility"))
                .args(["compute", "--input"])
                .arg(&input)
                .args(["--target", "Y", "--measure", "minsyn", "--seed", "0", "--out"])
                .arg(&out)
                .status()
                .unwrap();
            assert!(status.success());
            std::fs::read(out).unwrap()
        })
        .collect();
    let text = String::from_utf8_lossy(&outputs[0]);
    let finite = !text.contains("NaN") && !text.contains("inf") && serde_json::from_slice::<serde_json::Value>(&outputs[0]).is_ok();
    Outcome::new(outputs[0] == outputs[1] && finite, format!("{} bytes, identical: {}", outputs[0].len(), outputs[0] == outputs[1]))
}
