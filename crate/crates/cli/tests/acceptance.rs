//! Acceptance suite: one line per criterion, then a nonzero exit if any
//! criterion failed in a way not already accounted for.
//!
//! Two criteria contain a clause that cannot hold (criterion 3 asks for
//! `l = -s` together with `(l, e) = 1`; criterion 5 asks for a transitive
//! affine action whose generators share the fixed point `(0, 2)`). Those
//! lines print FAIL with the observed values, and the run checks that the
//! observed values are the mathematically correct ones.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use kll_cli::{
    EnvelopeReport, OrbitsReport, QuotientReport, RootsReport, SearchReport, Sl2Report, TorsionReport, VerifyReport,
};
use kll_core::fibration::FibrationSearch;
use kll_core::kummer::KummerLattice;
use kll_core::linalg;
use kll_core::monodromy::{self, AffineAction, SL2_S, SL2_T};
use kll_core::scenario::{self, classify, ConstructionScenario, Fibered, Pi1Case, RationalEnvelopeInput};
use kll_core::torsion::{kummer_exceptional_model, FibrationPicardModel};
use kll_core::verify::{verify_certificate, RootOracle};
use kll_core::{make_standard, LatticeVector, StandardLattice};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Result of one criterion. `known_gap` marks a clause that cannot hold;
/// such a criterion reports FAIL but does not fail the run as long as every
/// other check in it passed.
struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
    known_gap: Option<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new(), known_gap: None }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn within(&mut self, elapsed: Duration, limit_secs: f64) {
        self.note(format!("{:.2}s", elapsed.as_secs_f64()));
        self.check(elapsed.as_secs_f64() < limit_secs, format!("took longer than {limit_secs}s"));
    }
}

// --- 1 ---------------------------------------------------------------------

/// E8 roots from the coordinate model `D8 ∪ (D8 + ½·1)`, written in the
/// simple-root basis `α1 = ½(1,-1,…,-1,1)`, `α2 = e1+e2`, `α_{k+2} = e_{k+1}-e_k`.
fn e8_oracle() -> (Vec<Vec<i64>>, BTreeSet<LatticeVector>) {
    let e = |i: usize| {
        let mut v = vec![0i64; 8];
        v[i] = 2;
        v
    };
    let mut simple = vec![vec![1, -1, -1, -1, -1, -1, -1, 1]];
    simple.push(e(0).iter().zip(e(1)).map(|(a, b)| a + b).collect());
    for i in 0..6 {
        simple.push(e(i + 1).iter().zip(e(i)).map(|(a, b)| a - b).collect());
    }
    let mut roots: Vec<Vec<i64>> = Vec::new();
    for i in 0..8 {
        for j in i + 1..8 {
            for (a, b) in [(2, 2), (2, -2), (-2, 2), (-2, -2)] {
                let mut v = vec![0; 8];
                v[i] = a;
                v[j] = b;
                roots.push(v);
            }
        }
    }
    for mask in 0u32..256 {
        if mask.count_ones() % 2 == 0 {
            roots.push((0..8).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect());
        }
    }
    let basis = linalg::to_big(&simple);
    let coords = roots
        .iter()
        .map(|r| {
            let t: Vec<BigInt> = r.iter().map(|&x| BigInt::from(x)).collect();
            let c = linalg::solve_left(&basis, &t).expect("root lies in the span");
            LatticeVector(
                c.iter()
                    .map(|x| {
                        assert!(x.denom().is_one(), "root has integral coordinates");
                        x.numer().to_i64().unwrap()
                    })
                    .collect(),
            )
        })
        .collect();
    let gram = (0..8)
        .map(|i| (0..8).map(|j| -simple[i].iter().zip(&simple[j]).map(|(a, b)| a * b).sum::<i64>() / 4).collect())
        .collect();
    (gram, coords)
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let e8 = make_standard(StandardLattice::E8Neg).unwrap();
    let (gram, oracle) = e8_oracle();
    o.check(e8.gram() == gram.as_slice(), "E8 Gram differs from the coordinate model");
    let start = Instant::now();
    let roots = e8.enumerate_norm_vectors(-2).unwrap();
    o.within(start.elapsed(), 2.0);
    o.check(roots.len() == 240, format!("E8 root count {}", roots.len()));
    o.check(roots.iter().cloned().collect::<BTreeSet<_>>() == oracle, "E8 roots differ from oracle");
    let id16 = make_standard(StandardLattice::MinusTwoId(16)).unwrap().enumerate_norm_vectors(-2).unwrap();
    o.check(id16.len() == 32, format!("MinusTwoId(16) root count {}", id16.len()));
    o.note(format!("E8neg {} roots, MinusTwoId(16) {}", roots.len(), id16.len()));
    o
}

// --- 2 ---------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let k = KummerLattice::build().unwrap();
    let g = k.lattice.gram();
    o.check((0..g.len()).all(|i| g[i][i] % 2 == 0), "odd diagonal");
    o.check(k.lattice.is_negative_definite(), "not negative definite");
    let factors = k.lattice.smith_quotient(&k.exceptional_sublattice()).unwrap();
    o.within(start.elapsed(), 10.0);
    // Index oracle: [Π : (-2)Id] = sqrt(2^16 / det Π), and 2Π ⊂ (-2)Id.
    let det = k.lattice.determinant().to_u64().unwrap();
    let index = ((1u64 << 16) / det) as f64;
    let oracle_count = index.sqrt().log2().round() as usize;
    o.check(factors.iter().all(|&d| d == 2), format!("invariant factors {factors:?}"));
    o.check(factors.len() == oracle_count, format!("{} factors, oracle {oracle_count}", factors.len()));
    o.note(format!("det {det}, factors {factors:?}, index oracle {oracle_count}"));
    o
}

// --- 3 ---------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let search = FibrationSearch::toy().unwrap();
    let cert = search.run_search(2).unwrap();
    let class = search.build_fibration_class(&cert.x).unwrap();
    let pic = &class.pic.lattice;
    o.check(cert.x == LatticeVector(vec![1, 0]), format!("x = {}", cert.x));
    o.check(cert.hs_square == 2, format!("hS² = {}", cert.hs_square));
    o.check(cert.e == LatticeVector(vec![1, -1, 0]), format!("e = {}", cert.e));
    o.check(pic.norm(&cert.e).unwrap() == 0, "e not isotropic");
    let nx = search.pi.orthogonal_complement(&cert.x).unwrap().canonical_basis();
    let expected = LatticeVector(vec![1, -2]);
    o.check(nx.len() == 1 && (nx[0] == expected || nx[0] == expected.neg()), format!("N_x = {nx:?}"));
    o.check(cert.root_check, "N_x has roots");
    o.check(pic.norm(&cert.l).unwrap() == -2, "(l,l) ≠ -2");
    o.check(pic.inner_product(&cert.l, &cert.e).unwrap() == 1, "(l,e) ≠ 1");
    o.within(start.elapsed(), 1.0);
    let s = LatticeVector(vec![0, 0, 1]);
    o.check(cert.l == s, format!("l = {}", cert.l));
    let minus_s_pairing = pic.inner_product(&s.neg(), &cert.e).unwrap();
    o.check(minus_s_pairing == -1, "(−s, e) should be −1");
    o.known_gap = Some(format!("l = s; the stated l = −s has (−s,e) = {minus_s_pairing}"));
    o
}

// --- 4 ---------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let k = KummerLattice::build().unwrap();
    let cert = FibrationSearch::kummer().unwrap().run_search(2).unwrap();
    let report = verify_certificate(k.lattice.gram(), &cert, RootOracle::HalfFrame { half_basis: &k.half_basis });
    o.within(start.elapsed(), 60.0);
    for c in &report.checks {
        o.check(c.passed, format!("verifier check {} failed", c.name));
    }
    o.check(report.valid, "certificate rejected");
    o.check(cert.code_class.iter().any(|&c| c != 0), "code class is zero");
    o.note(format!("hS² = {}, code class {:?}, {} checks", cert.hs_square, cert.code_class, report.checks.len()));
    o
}

// --- 5 ---------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for (p, order) in [(2, 6), (3, 24), (5, 120)] {
        let got = monodromy::subgroup_order(&[SL2_S, SL2_T], p).unwrap();
        o.check(got == order && got as i64 == monodromy::sl2_order(p), format!("|SL2(Z/{p})| = {got}"));
    }
    let linear: AffineAction = read_fixture("linear_mod3.json");
    o.check(linear.orbits().blocks[0] == vec![[0, 0]], "linear action moves 0");
    let affine: AffineAction = read_fixture("affine_mod3.json");
    let sizes = affine.orbits().sizes();
    o.within(start.elapsed(), 1.0);
    // Both generators fix (0, 2): (T v + (1,0)) and the lower unipotent.
    let fixed = [0, 2];
    o.check(affine.generators().iter().all(|g| affine.apply(g, &fixed) == fixed), "(0,2) not fixed");
    o.check(sizes == vec![8, 1], format!("affine orbit sizes {sizes:?}"));
    o.known_gap = Some(format!("affine mod-3 orbits {sizes:?}, not [9]: (0,2) is a common fixed point"));
    o
}

// --- 6 ---------------------------------------------------------------------

fn random_three_section_model(rng: &mut ChaCha8Rng) -> Option<FibrationPicardModel> {
    let ambient =
        make_standard(StandardLattice::H).unwrap().direct_sum(&make_standard(StandardLattice::MinusTwoId(3)).unwrap());
    let f = LatticeVector::unit(5, 0);
    let mut ms: Vec<LatticeVector> = (0..3)
        .map(|_| {
            let mut c: Vec<i64> = (0..5).map(|_| rng.gen_range(-3..=3)).collect();
            c[1] = rng.gen_range(1..=4);
            LatticeVector(c)
        })
        .collect();
    if rng.gen_bool(0.5) {
        ms[1] = ms[0].add_scaled(rng.gen_range(-3..=3), &f);
    }
    if rng.gen_bool(0.3) {
        ms[2] = ms[0].add_scaled(rng.gen_range(-3..=3), &f);
    }
    FibrationPicardModel::new(ambient, ms, f.clone(), vec![f]).ok()
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let model: FibrationPicardModel = read_fixture("kummer_torsion_model.json");
    o.check(model == kummer_exceptional_model(2).unwrap(), "fixture differs from the computed model");
    o.check(model.len() == 16, "not 16 multisections");
    o.check(model.eta_kernel_rank() == 1, "kernel rank ≠ 1");
    let g = model.torsion_graph();
    let min = g.min_degree().unwrap();
    o.check(min >= 14, format!("min degree {min}"));
    o.check(g.is_connected().unwrap(), "disconnected");
    o.check(g.diameter_at_most(2).unwrap(), "diameter > 2");
    o.note(format!("min degree {min}, diameter {:?}", g.diameter().unwrap()));

    let mut rng = ChaCha8Rng::seed_from_u64(20_261_015);
    let (mut models, mut planted) = (0, 0);
    while models < 100 {
        let Some(m) = random_three_section_model(&mut rng) else { continue };
        models += 1;
        let pairs = [(0, 1), (0, 2), (1, 2)].into_iter().filter(|&(i, j)| m.torsion_possible(i, j).unwrap()).count();
        o.check(pairs <= 1, format!("{pairs} torsion pairs in {m:?}"));
        planted += usize::from(pairs == 1);
    }
    o.within(start.elapsed(), 5.0);
    o.note(format!("100 random models, {planted} with one torsion pair"));
    o
}

// --- 7 ---------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let g1: ConstructionScenario = read_fixture("g1_iso_scenario.json");
    let v = classify(&g1).unwrap();
    o.check(v.fibered == Fibered::No && v.lagrangian_form_count == 1, "g1-iso scenario");
    o.check((v.pi1_kernel_rank, v.pi1_ab_rank) == (Some(5), Some(8)), "g1-iso π1 ranks");
    let connected: ConstructionScenario = read_fixture("connected_graph_scenario.json");
    o.check(classify(&connected).unwrap().fibered == Fibered::No, "connected-graph scenario");

    let base = ConstructionScenario { intersection_graph_connected: false, g1_is_iso: false, ..connected };
    for i in 0..=3u64 {
        o.check(scenario::pi1_extension_ranks(Pi1Case::Generic, i).unwrap() == (5, 8), "generic ranks");
        for g in 1..=4u64 {
            let expect = (1 + i + g * (2 * g - 1), 8 + 2 * g);
            let s = ConstructionScenario { h0_y12: g, genus_c: Some(g), picard_defect: i, ..base.clone() };
            let v = classify(&s).unwrap();
            o.check(
                (v.pi1_kernel_rank, v.pi1_ab_rank) == (Some(expect.0), Some(expect.1)),
                format!("curve g={g} i={i}"),
            );
        }
        let s = ConstructionScenario { h0_y12: 2, wedge_nondegenerate: true, picard_defect: i, ..base.clone() };
        let v = classify(&s).unwrap();
        o.check((v.pi1_kernel_rank, v.pi1_ab_rank) == (Some(4 + 2 * i), Some(12)), format!("three surfaces i={i}"));
    }
    for (h0, dim) in [(0u64, 1u64), (2, 2), (4, 7)] {
        o.check(scenario::dim_lx_degenerate_case(h0) == dim, format!("dim L^X for h0={h0}"));
        o.check(dim - 1 == (0..h0).flat_map(|a| (a + 1..h0).map(move |b| (a, b))).count() as u64, "pair count");
    }
    let clash: ConstructionScenario = read_fixture("three_surfaces_clash_scenario.json");
    o.check(matches!(classify(&clash), Err(kll_core::Error::InconsistentScenario(_))), "clash not rejected");
    o.within(start.elapsed(), 1.0);
    o
}

// --- 8 ---------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let input: RationalEnvelopeInput = read_fixture("sqrt2_envelope.json");
    let dim = scenario::rational_envelope_dim(&input).unwrap();
    let k = scenario::k_genericity(&input).unwrap();
    o.check(dim == 2 && k == 1, format!("dim {dim}, k {k}"));
    for k in 0..=2 {
        o.check(scenario::weakly_lagrangian_obstruction(k).unwrap(), format!("k={k} not obstructed"));
    }
    o.check(!scenario::weakly_lagrangian_obstruction(3).unwrap(), "k=3 obstructed");
    o.within(start.elapsed(), 1.0);
    o
}

// --- 9 ---------------------------------------------------------------------

type ReportCheck = fn(&[u8]) -> bool;
type Criterion = fn() -> Outcome;

fn run_cli(args: &[String], out: &Path, threads_env: Option<&str>) -> (i32, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kll"));
    cmd.args(args).arg("--output").arg(out).env_remove(kll_cli::THREADS_ENV);
    if let Some(t) = threads_env {
        cmd.env(kll_cli::THREADS_ENV, t);
    }
    let status = cmd.output().expect("binary runs").status.code().unwrap_or(-1);
    (status, std::fs::read(out).unwrap_or_default())
}

fn round_trips<T: Serialize + DeserializeOwned + PartialEq>(bytes: &[u8]) -> bool {
    let Ok(v) = serde_json::from_slice::<T>(bytes) else { return false };
    let again: T = serde_json::from_slice(&serde_json::to_vec(&v).unwrap()).unwrap();
    again == v
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let f = |n: &str| fixture(n).display().to_string();
    let search_out = dir.path().join("search.json");
    let cases: Vec<(Vec<String>, ReportCheck)> = vec![
        (vec!["lattice".into(), "roots".into(), "--name".into(), "E8neg".into()], round_trips::<RootsReport>),
        (vec!["lattice".into(), "roots".into(), "--input".into(), f("a2_toy.json")], round_trips::<RootsReport>),
        (vec!["lattice".into(), "quotient".into()], round_trips::<QuotientReport>),
        (
            vec!["lattice".into(), "quotient".into(), "--input".into(), f("a2_index6_quotient.json")],
            round_trips::<QuotientReport>,
        ),
        (vec!["fibration".into(), "search".into(), "--bound".into(), "2".into()], round_trips::<SearchReport>),
        (vec!["fibration".into(), "search".into(), "--lattice".into(), "toy".into()], round_trips::<SearchReport>),
        (
            vec!["fibration".into(), "verify".into(), "--input".into(), search_out.display().to_string()],
            round_trips::<VerifyReport>,
        ),
        (
            vec!["monodromy".into(), "orbits".into(), "--input".into(), f("affine_mod3.json")],
            round_trips::<OrbitsReport>,
        ),
        (
            vec!["monodromy".into(), "orbits".into(), "--input".into(), f("linear_mod3.json")],
            round_trips::<OrbitsReport>,
        ),
        (vec!["monodromy".into(), "sl2-order".into(), "--prime".into(), "5".into()], round_trips::<Sl2Report>),
        (
            vec![
                "monodromy".into(),
                "sl2-order".into(),
                "--prime".into(),
                "3".into(),
                "--gens".into(),
                f("sl2_unipotent_gens.json"),
            ],
            round_trips::<Sl2Report>,
        ),
        (vec!["torsion-graph".into(), "--input".into(), f("kummer_torsion_model.json")], round_trips::<TorsionReport>),
        (vec!["torsion-graph".into(), "--kummer".into()], round_trips::<TorsionReport>),
        (
            vec!["scenario".into(), "classify".into(), "--input".into(), f("g1_iso_scenario.json")],
            round_trips::<scenario::Verdict>,
        ),
        (
            vec!["envelope".into(), "dim".into(), "--input".into(), f("sqrt2_envelope.json")],
            round_trips::<EnvelopeReport>,
        ),
    ];
    // The verify case reads the search report, so produce it first.
    let (code, _) = run_cli(&cases[4].0, &search_out, None);
    o.check(code == 0, "initial search failed");

    for (k, (args, parse)) in cases.iter().enumerate() {
        let runs: Vec<(i32, Vec<u8>)> = [
            (vec![], None),
            (vec![], None),
            (vec!["--threads".to_string(), "4".to_string()], None),
            (vec![], Some("3")),
        ]
        .into_iter()
        .enumerate()
        .map(|(r, (extra, env))| {
            let mut a = args.clone();
            a.extend(extra);
            run_cli(&a, &dir.path().join(format!("out-{k}-{r}.json")), env)
        })
        .collect();
        let name = args[..2.min(args.len())].join(" ");
        o.check(runs.iter().all(|(c, _)| *c == 0), format!("{name}: nonzero exit"));
        o.check(runs.iter().all(|(_, b)| b == &runs[0].1 && !b.is_empty()), format!("{name}: reports differ"));
        o.check(parse(&runs[0].1), format!("{name}: report does not round-trip"));
    }
    let roots = std::fs::read(dir.path().join("out-0-0.json")).unwrap();
    let roots: RootsReport = serde_json::from_slice(&roots).unwrap();
    o.check(roots.count == 240, "CLI E8 count");
    let verdict: scenario::Verdict =
        serde_json::from_slice(&std::fs::read(dir.path().join("out-13-0.json")).unwrap()).unwrap();
    o.check(verdict.fibered == Fibered::No, "CLI g1-iso verdict");
    let torsion: TorsionReport =
        serde_json::from_slice(&std::fs::read(dir.path().join("out-11-0.json")).unwrap()).unwrap();
    o.check(torsion.connected && torsion.min_degree.unwrap() >= 14, "CLI torsion graph");

    let clash = vec!["scenario".into(), "classify".into(), "--input".into(), f("three_surfaces_clash_scenario.json")];
    o.check(run_cli(&clash, &dir.path().join("clash.json"), None).0 == 5, "inconsistent scenario exit code");
    o.check(run_cli(&["bogus".into()], &dir.path().join("bogus.json"), None).0 == 2, "usage exit code");
    let exhausted =
        vec!["fibration".into(), "search".into(), "--lattice".into(), "toy".into(), "--bound".into(), "0".into()];
    o.check(run_cli(&exhausted, &dir.path().join("ex.json"), None).0 == 4, "exhausted exit code");
    o.note(format!("{} subcommand invocations × 4 runs, {:.1}s", cases.len(), start.elapsed().as_secs_f64()));
    o
}

fn read_fixture<T: DeserializeOwned>(name: &str) -> T {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("root enumeration", criterion_1),
        ("Kummer lattice", criterion_2),
        ("toy fibration certificate", criterion_3),
        ("Kummer fibration certificate", criterion_4),
        ("monodromy", criterion_5),
        ("torsion graph", criterion_6),
        ("scenario engine", criterion_7),
        ("rational envelope", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut unexpected = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let (status, detail) = match (&o.known_gap, o.failures.is_empty()) {
            (None, true) => ("PASS", o.notes.join("; ")),
            (Some(gap), true) => ("FAIL", format!("{gap}; {}", o.notes.join("; "))),
            (_, false) => {
                unexpected += 1;
                ("FAIL", o.failures.join("; "))
            }
        };
        println!("criterion {}: {status} {name} ({detail})", i + 1);
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
