use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use urigid_cli::document::{self, Document};
use urigid_core::{complete_graph_stress, Configuration, Framework, Tolerances};

fn urigid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urigid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_doc(p: &Path) -> Document {
    document::parse(&fs::read_to_string(p).unwrap()).unwrap()
}

const TRIANGLE: &str = "dimension 2\n[vertices]\n1 0 0\n2 1 0\n3 0.2 0.9\n[edges]\n1 2\n1 3\n2 3\n";

#[test]
fn gen_writes_expected_edge_count_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    assert_eq!(
        code(&urigid(&[
            "gen",
            "--d",
            "2",
            "--v",
            "6",
            "--seed",
            "4",
            "-o",
            s(&a)
        ])),
        0
    );
    assert_eq!(
        code(&urigid(&[
            "gen",
            "--d",
            "2",
            "--v",
            "6",
            "--seed",
            "4",
            "-o",
            s(&b)
        ])),
        0
    );
    assert_eq!(read_doc(&a).framework.graph().edge_count(), 12);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn gen_rejects_invalid_sizes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.txt");
    assert_eq!(
        code(&urigid(&["gen", "--d", "2", "--v", "2", "-o", s(&out)])),
        2
    );
    assert_eq!(
        code(&urigid(&["gen", "--d", "0", "--v", "5", "-o", s(&out)])),
        2
    );
    assert_eq!(
        code(&urigid(&["gen", "--d", "-1", "--v", "5", "-o", s(&out)])),
        2
    );
}

#[test]
fn generated_3d_framework_certifies() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("g.txt");
    assert_eq!(
        code(&urigid(&[
            "gen",
            "--d",
            "3",
            "--v",
            "10",
            "--seed",
            "1",
            "-o",
            s(&p)
        ])),
        0
    );
    let out = urigid(&["certify", s(&p)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("verdict: certified"));
    assert!(stdout(&out).contains("nullity: 4"));
}

#[test]
fn certify_k4_and_its_negation() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("k4.txt");
    assert_eq!(
        code(&urigid(&[
            "gen",
            "--d",
            "2",
            "--v",
            "4",
            "--seed",
            "2",
            "-o",
            s(&p)
        ])),
        0
    );
    let doc = read_doc(&p);
    assert!(doc.framework.graph().is_complete());
    let recomputed = complete_graph_stress(&doc.framework, &Tolerances::default()).unwrap();
    let stored = doc.stress.clone().unwrap();
    let scale = recomputed.spectral_norm() / stored.spectral_norm();
    assert!((stored.omega() * scale - recomputed.omega()).amax() < 1e-10);
    assert_eq!(code(&urigid(&["certify", s(&p)])), 0);

    let negated = Document {
        stress: Some(stored.scaled(-1.0)),
        ..doc
    };
    let q = write(&dir, "neg.txt", &document::serialize(&negated));
    let out = urigid(&["certify", s(&q)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("not PSD"));
}

#[test]
fn certify_input_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "dimension 2\n[vertices]\n1 0 zero\n");
    let out = urigid(&["certify", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"));
    let no_stress = write(&dir, "tri.txt", TRIANGLE);
    assert_eq!(code(&urigid(&["certify", s(&no_stress)])), 2);
    assert_eq!(code(&urigid(&["certify", "/nonexistent/file.txt"])), 2);
    assert_eq!(code(&urigid(&["certify"])), 2);
    assert_eq!(
        code(&urigid(&["--tol-zero", "2", "certify", s(&no_stress)])),
        2
    );
}

#[test]
fn certify_too_small_framework_exits_one() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "tri.txt", &format!("{TRIANGLE}[stress]\n"));
    assert_eq!(code(&urigid(&["certify", s(&p)])), 1);
}

/// A five-vertex planar lateration framework and a K4 built on three of its
/// vertices that miss one edge among them.
fn reduction_fixture(dir: &TempDir) -> (PathBuf, PathBuf, [usize; 3]) {
    let a = dir.path().join("a.txt");
    assert_eq!(
        code(&urigid(&[
            "gen",
            "--d",
            "2",
            "--v",
            "5",
            "--seed",
            "9",
            "-o",
            s(&a)
        ])),
        0
    );
    let doc_a = read_doc(&a);
    let g = doc_a.framework.graph();
    let missing = (0..4).find(|&m| !g.has_edge(m, 4)).unwrap();
    let other = (0..4).find(|&m| m != missing).unwrap();
    let triple = [missing, other, 4];

    let cfg = doc_a.framework.config();
    let mut pts = cfg.select(&triple);
    let centroid = (cfg.point(missing) + cfg.point(other) + cfg.point(4)) / 3.0;
    pts.push_point(&(centroid + nalgebra::DVector::from_vec(vec![0.013, 0.021])))
        .unwrap();
    let fw_b = Framework::complete(pts);
    let sm_b = complete_graph_stress(&fw_b, &Tolerances::default()).unwrap();
    let b = write(
        dir,
        "b.txt",
        &document::serialize(&Document::new(fw_b).with_stress(sm_b)),
    );
    (a, b, triple)
}

#[test]
fn attach_with_reduction_certifies() {
    let dir = TempDir::new().unwrap();
    let (a, b, [m, o, n]) = reduction_fixture(&dir);
    let share = format!("{}:1,{}:2,{}:3", m + 1, o + 1, n + 1);
    let reduce = format!("{}-{}", m + 1, n + 1);
    let out_path = dir.path().join("ab.txt");
    let out = urigid(&[
        "attach",
        s(&a),
        s(&b),
        "--share",
        &share,
        "--reduce",
        &reduce,
        "-o",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("nullity: 3"));
    let doc = read_doc(&out_path);
    assert_eq!(doc.framework.vertex_count(), 6);
    assert!(!doc.framework.graph().has_edge(m, n));
    assert_eq!(doc.shared, vec![m, o, n]);
    assert_eq!(code(&urigid(&["certify", s(&out_path)])), 0);

    let svg = dir.path().join("ab.svg");
    assert_eq!(code(&urigid(&["plot", s(&out_path), "-o", s(&svg)])), 0);
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("class=\"vertex shared\"").count(), 3);
    assert_eq!(text.matches("<circle").count(), 6);
}

#[test]
fn attach_domain_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    let (a, b, [m, o, n]) = reduction_fixture(&dir);
    let out_path = dir.path().join("ab.txt");

    let two = format!("{}:1,{}:2", m + 1, o + 1);
    let out = urigid(&["attach", s(&a), s(&b), "--share", &two, "-o", s(&out_path)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("n >= d+1"), "{}", stderr(&out));

    let share = format!("{}:1,{}:2,{}:3", m + 1, o + 1, n + 1);
    let both = format!("{}-{}", o + 1, n + 1);
    let out = urigid(&[
        "attach",
        s(&a),
        s(&b),
        "--share",
        &share,
        "--reduce",
        &both,
        "-o",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("already present"), "{}", stderr(&out));
    assert!(!out_path.exists());

    let out = urigid(&["attach", s(&a), s(&b), "--share", "1-1", "-o", s(&out_path)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn counterexample_two_triangles() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", TRIANGLE);
    let b = write(
        &dir,
        "b.txt",
        "dimension 2\n[vertices]\n1 5 5\n2 6 5\n3 5.6 4.3\n[edges]\n1 2\n1 3\n2 3\n",
    );
    let out_path = dir.path().join("r.txt");
    let out = urigid(&[
        "counterexample",
        s(&a),
        s(&b),
        "--share",
        "1:1,2:2",
        "-o",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let line = stdout(&out)
        .lines()
        .find(|l| l.starts_with("max pairwise distance discrepancy"))
        .unwrap()
        .to_string();
    let gap: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(gap > 1e-8);
    let doc = read_doc(&out_path);
    assert_eq!(doc.framework.vertex_count(), 4);
    let c = doc.framework.config();
    assert!((c.point(3)[0] - 0.6).abs() < 1e-8 && (c.point(3)[1] - 0.7).abs() < 1e-8);

    let third = write(
        &dir,
        "c.txt",
        "dimension 2\n[vertices]\n1 0 0\n2 1 0\n3 0.2 0.9\n4 0.6 -0.7\n[edges]\n1 2\n1 3\n2 3\n1 4\n2 4\n",
    );
    let out = urigid(&[
        "counterexample",
        s(&a),
        s(&third),
        "--share",
        "1:1,2:2,3:3",
        "-o",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn counterexample_on_the_mirror_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", TRIANGLE);
    let b = write(
        &dir,
        "b.txt",
        "dimension 2\n[vertices]\n1 0 0\n2 1 0\n3 2 0\n[edges]\n1 2\n2 3\n",
    );
    let out = urigid(&[
        "counterexample",
        s(&a),
        s(&b),
        "--share",
        "1:1,2:2",
        "-o",
        s(&dir.path().join("r.txt")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("reflection"), "{}", stderr(&out));
}

#[test]
fn plot_counts_elements() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "tri.txt", TRIANGLE);
    let svg = dir.path().join("tri.svg");
    assert_eq!(code(&urigid(&["plot", s(&p), "-o", s(&svg)])), 0);
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.contains("version=\"1.1\""));
    assert_eq!(text.matches("<circle").count(), 3);
    assert_eq!(text.matches("<line").count(), 3);
    assert_eq!(text.matches("<text").count(), 3);
    assert!(!text.contains("shared\""));

    let p3 = write(
        &dir,
        "t3.txt",
        "dimension 3\n[vertices]\n1 0 0 0\n2 1 0 0\n3 0 1 0\n[edges]\n1 2\n",
    );
    assert_eq!(code(&urigid(&["plot", s(&p3), "-o", s(&svg)])), 1);
}

#[test]
fn flex_and_genpos() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "path.txt",
        "dimension 2\n[vertices]\n1 0 0\n2 1 0\n3 1 1\n[edges]\n1 2\n2 3\n",
    );
    let out = urigid(&["flex", s(&path)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("nontrivial flex dimension: 1"));
    let tri = write(&dir, "tri.txt", TRIANGLE);
    assert!(stdout(&urigid(&["flex", s(&tri)])).contains("nontrivial flex dimension: 0"));

    assert_eq!(code(&urigid(&["genpos", s(&tri)])), 0);
    let line = write(
        &dir,
        "line.txt",
        "dimension 2\n[vertices]\n1 0 0\n2 1 0\n3 2 0\n[edges]\n",
    );
    let out = urigid(&["genpos", s(&line)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("general position: no"));
}

#[test]
fn documents_round_trip_through_the_library() {
    let cfg =
        Configuration::from_points(2, &[[0.1, 0.2], [1.0 / 3.0, -7.25e-5], [3.0e10, 0.3]]).unwrap();
    let doc = Document::new(Framework::complete(cfg));
    let text = document::serialize(&doc);
    assert_eq!(document::parse(&text).unwrap(), doc);
}
