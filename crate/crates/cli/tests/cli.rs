use effcon::symbolic_ring::{parse_expr, Labels};
use effcon_cli::{main_with, Scenario};
use proptest::prelude::*;
use std::path::PathBuf;

fn path(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let full: Vec<&str> = std::iter::once("effcon").chain(args.iter().copied()).collect();
    let code = main_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn kv(text: &str) -> Vec<(String, String)> {
    text.lines().filter_map(|l| l.split_once('\t')).map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn bracket_of_canonical_pair() {
    let (code, out, _) = run(&["bracket", "{q,p}", "--format", "machine"]);
    assert_eq!(code, 0);
    assert!(out.contains("bracket.value\t1\n"), "{out}");
    let (_, out, _) = run(&["bracket", "{q1, p1}", "--scenario", &path("scenarios/two_component.scn")]);
    assert!(out.contains("value = 1\n"), "{out}");
}

#[test]
fn sharp_zero_is_inconsistent() {
    let (code, _, err) = run(&["check", &path("scenarios/free_particle.scn"), "--sharp", "0"]);
    assert_eq!(code, 1);
    assert!(err.lines().any(|l| l.starts_with("hard inconsistency: i*hbar/2 = 0")), "{err}");
}

#[test]
fn sharp_two_forces_momentum_spread_to_vanish() {
    let (code, out, _) = run(&["solve", &path("scenarios/free_particle.scn"), "--order", "2", "--mode", "sharp"]);
    assert_eq!(code, 1);
    assert!(out.contains("soft inconsistency: G[2,0;0,0] = 0"), "{out}");
}

#[test]
fn solve_reports_second_order_solutions() {
    let s = path("scenarios/free_particle.scn");
    let (code, out, err) = run(&["solve", &s, "--golden", &path("golden/free_particle.golden"), "--format", "machine"]);
    assert_eq!(code, 0, "{err}");
    let m = kv(&out);
    let get = |k: &str| m.iter().find(|(a, _)| a == k).map(|(_, b)| b.clone());
    assert_eq!(get("golden.matched").as_deref(), Some("5"));
    assert_eq!(get("golden.mismatched").as_deref(), Some("0"));
    for v in ["G[0,1;1,0]", "G[1,0;0,1]", "G[1,0;1,0]", "G[0,0;2,0]"] {
        assert!(get(&format!("solution.{v}")).is_some(), "{v}");
    }
}

#[test]
fn free_particle_golden_is_clean() {
    let (code, out, err) = run(&[
        "check",
        &path("scenarios/free_particle.scn"),
        "--golden",
        &path("golden/free_particle.golden"),
        "--format",
        "machine",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("golden.matched\t20\n"), "{out}");
}

#[test]
fn reference_dirac_matrix_differs_in_row_three() {
    let (code, out, err) = run(&[
        "check",
        &path("scenarios/two_component.scn"),
        "--golden",
        &path("golden/two_component.golden"),
        "--format",
        "machine",
    ]);
    assert_eq!(code, 1);
    assert!(out.contains("golden.mismatched\t4\n"), "{out}");
    let keys: Vec<&str> = err.lines().filter_map(|l| l.strip_prefix("golden mismatch ")).map(|l| l.split(':').next().unwrap()).collect();
    assert_eq!(keys, ["delta.3.4", "delta.3.6", "delta.4.3", "delta.6.3"]);
    for k in ["observable.A1", "observable.A2", "observable.A3"] {
        assert!(out.contains(&format!("{k}\t")), "{k}");
    }
}

#[test]
fn perturbed_golden_entry_is_reported() {
    let dir = tempdir();
    let g = dir.join("bad.golden");
    std::fs::write(&g, "solution.G[1,1] = -i*hbar/2\nsolution.q = 0\n").unwrap();
    let (code, _, err) = run(&["solve", &path("scenarios/linear_q.scn"), "--golden", g.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("golden mismatch solution.G[1,1]"), "{err}");
}

#[test]
fn every_subcommand_runs() {
    let tc = path("scenarios/two_component.scn");
    for cmd in ["generate", "close", "truncate", "solve", "flows", "observables", "dirac", "check"] {
        let (code, out, err) = run(&[cmd, &tc]);
        assert!(code == 0, "{cmd}: {err}");
        assert!(out.starts_with("effcon report\n"));
    }
    let (code, out, _) = run(&["close", &path("scenarios/linear_q.scn"), "--order", "3", "--format", "machine"]);
    assert_eq!(code, 0);
    assert!(out.contains("closure.closed\ttrue\n") && out.contains("first_class.failures\t0\n"), "{out}");
}

#[test]
fn flows_match_the_reference_tables() {
    let (code, out, _) = run(&[
        "flows",
        &path("scenarios/two_component.scn"),
        "--golden",
        &path("golden/two_component.golden"),
        "--format",
        "machine",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("golden.matched\t20\n"), "{out}");
    assert!(out.contains("flow_rank.independent\t4\n"), "{out}");
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(run(&["solve"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["solve", "/nonexistent.scn"]).0, 2);
    assert_eq!(run(&["bracket", "{q,p"]).0, 2);
    assert_eq!(run(&["solve", &path("scenarios/linear_q.scn"), "--mode", "fuzzy"]).0, 2);
    let dir = tempdir();
    let f = dir.join("x.scn");
    std::fs::write(&f, "[system]\npairs = q:p\nconstraint = qhat(0)\ncolour = red\n").unwrap();
    let (code, _, err) = run(&["solve", f.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown key \"colour\""), "{err}");
    let (code, _, err) = run(&["dirac", &path("scenarios/linear_q.scn")]);
    assert_eq!(code, 2);
    assert!(err.contains("[dirac]"), "{err}");
}

#[test]
fn reports_are_written_and_identical_across_runs() {
    let a = tempdir();
    let b = tempdir();
    let s = path("scenarios/two_component.scn");
    for d in [&a, &b] {
        assert_eq!(run(&["dirac", &s, "--out", d.to_str().unwrap()]).0, 0);
    }
    for f in ["report.txt", "report.kv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let hash = Scenario::load(std::path::Path::new(&s)).unwrap().hash;
    assert!(std::fs::read_to_string(a.join("report.kv")).unwrap().contains(&format!("hash\t{hash}\n")));
}

#[test]
fn expressions_in_reports_round_trip() {
    let s = path("scenarios/free_particle.scn");
    let l = Labels::new(&[("q", "p"), ("t", "p_t")]);
    for cmd in ["solve", "observables", "truncate"] {
        let (_, out, _) = run(&[cmd, &s, "--format", "machine"]);
        for (k, v) in kv(&out) {
            if !["solution", "basis", "observable", "algebra", "truncated"].iter().any(|p| k.starts_with(p)) {
                continue;
            }
            let e = parse_expr(&v, &l).unwrap_or_else(|err| panic!("{k}: {err}"));
            assert_eq!(e.to_text(&l), v, "{k}");
            assert!(parse_expr(&e.to_text(&l), &l).unwrap().equals(&e));
        }
    }
}

fn tempdir() -> PathBuf {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static N: AtomicUsize = AtomicUsize::new(0);
    let d = std::env::temp_dir().join(format!("effcon-cli-{}-{}", std::process::id(), N.fetch_add(1, Ordering::SeqCst)));
    std::fs::create_dir_all(&d).unwrap();
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn report_is_deterministic(order in 0u32..4, sharp in any::<bool>(), kmax in 0u32..2, cmd in 0usize..3) {
        let cmd = ["solve", "truncate", "generate"][cmd];
        let s = path("scenarios/linear_q.scn");
        let o = order.to_string();
        let k = kmax.to_string();
        let mode = if sharp { "sharp" } else { "graded" };
        let args = [cmd, s.as_str(), "--order", &o, "--mode", mode, "--kmax", &k, "--format", "machine"];
        let first = run(&args);
        let second = run(&args);
        prop_assert_eq!(first, second);
    }
}
