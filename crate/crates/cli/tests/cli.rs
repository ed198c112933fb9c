use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SCHEMA: &str = r#"{"node_types":[{"name":"author","attrs":{"h":"number"}},{"name":"paper","attrs":{"citations":"number"}}],
 "edge_types":[{"name":"writes","src":"author","dst":"paper"}]}"#;

const HEADER: &str = "dataset,hypothesis,sampler,proportion,seed,outcome,truth,estimate,abs_error,n_relevant,p_value,ci_low,ci_high,t_sample_s,t_extract_s,t_test_s";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_graphhypo"));
    c.env_remove("GRAPHHYPO_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_graph(dir: &Path, nodes: &str, edges: &str) {
    fs::write(dir.join("schema.json"), SCHEMA).unwrap();
    fs::write(dir.join("nodes.tsv"), nodes).unwrap();
    fs::write(dir.join("edges.tsv"), edges).unwrap();
}

fn tiny(dir: &Path) {
    write_graph(
        dir,
        "# id\ttype\tattrs\na1\tauthor\th=3\na2\tauthor\th=5\np1\tpaper\tcitations=10\n",
        "a1\tp1\twrites\t\na2\tp1\twrites\t\n",
    );
}

fn generated(dir: &Path) {
    let o = run(&[
        "gen",
        "--preset",
        "desk",
        "--scale",
        "0.05",
        "--seed",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn validate_clean_fixture() {
    let d = tempfile::tempdir().unwrap();
    tiny(d.path());
    let o = run(&["validate", "--graph", d.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("nodes=3 edges=2\n"), "{out}");
    assert!(out.contains("node_type author=2"));
    assert!(out.contains("node_type paper=1"));
    assert!(out.contains("edge_type writes=2"));
}

#[test]
fn validate_dangling_edge_exit_2_with_row() {
    let d = tempfile::tempdir().unwrap();
    write_graph(
        d.path(),
        "a1\tauthor\th=3\np1\tpaper\tcitations=1\n",
        "a1\tp1\twrites\t\nghost\tp1\twrites\t\n",
    );
    let o = run(&["validate", "--graph", d.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("edges.tsv") && err.contains('2') && err.contains("ghost"),
        "{err}"
    );
}

#[test]
fn isolated_nodes_need_flag() {
    let d = tempfile::tempdir().unwrap();
    write_graph(
        d.path(),
        "a1\tauthor\th=3\na2\tauthor\th=4\np1\tpaper\tcitations=1\n",
        "a1\tp1\twrites\t\n",
    );
    let g = d.path().to_str().unwrap();
    assert_eq!(run(&["validate", "--graph", g]).status.code(), Some(2));
    assert_eq!(
        run(&["validate", "--graph", g, "--allow-isolated"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn ground_truth_sampler_matches_truth() {
    let d = tempfile::tempdir().unwrap();
    generated(d.path());
    let g = d.path().to_str().unwrap();
    let h = "avg(paper.citations | paper[year>=2015]) > 38";
    let truth = run(&["truth", "--graph", g, "--allow-isolated", "--hypothesis", h]);
    let t: serde_json::Value = serde_json::from_slice(&truth.stdout).unwrap();
    let test = run(&[
        "test",
        "--graph",
        g,
        "--allow-isolated",
        "--hypothesis",
        h,
        "--sampler",
        "ground-truth",
    ]);
    let r: serde_json::Value = serde_json::from_slice(&test.stdout).unwrap();
    assert_eq!(t["outcome"], r["outcome"]);
    assert_eq!(t["theta"], r["estimate"]);
    assert_eq!(truth.status.code(), test.status.code());
    assert_eq!(r["sampler"], "ground-truth");
    for key in [
        "outcome",
        "p_value",
        "ci",
        "estimate",
        "n_relevant",
        "inconclusive",
        "sampler",
        "budget",
        "seed",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn same_seed_byte_identical_json() {
    let d = tempfile::tempdir().unwrap();
    generated(d.path());
    let g = d.path().to_str().unwrap();
    let args = [
        "test",
        "--graph",
        g,
        "--allow-isolated",
        "--hypothesis",
        "avg(step3.citations | author -writes-> paper -cites-> paper) > 35",
        "--sampler",
        "srw",
        "--budget",
        "300",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(matches!(a.status.code(), Some(0 | 1 | 3)), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let with_threads = bin()
        .args(args)
        .env("GRAPHHYPO_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, with_threads.stdout);
}

#[test]
fn phase_opt_defaults_and_small_budget_warning() {
    let d = tempfile::tempdir().unwrap();
    generated(d.path());
    let g = d.path().to_str().unwrap();
    let h = "avg(step2.citations | author -writes-> paper) > 30";
    let o = run(&[
        "test",
        "--graph",
        g,
        "--allow-isolated",
        "--hypothesis",
        h,
        "--sampler",
        "phase-opt",
        "--budget",
        "200",
    ]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    let explicit = run(&[
        "test",
        "--graph",
        g,
        "--allow-isolated",
        "--hypothesis",
        h,
        "--sampler",
        "phase-opt",
        "--budget",
        "200",
        "--param",
        "m=50",
        "--param",
        "n=30",
        "--param",
        "w_h=10",
        "--param",
        "w_l=0.1",
    ]);
    assert_eq!(o.stdout, explicit.stdout);
    let small = run(&[
        "test",
        "--graph",
        g,
        "--allow-isolated",
        "--hypothesis",
        h,
        "--sampler",
        "phase",
        "--budget",
        "50",
    ]);
    assert!(stderr(&small).contains("warning"), "{}", stderr(&small));
    assert_eq!(small.status.code(), Some(3));
}

#[test]
fn inconclusive_and_input_errors() {
    let d = tempfile::tempdir().unwrap();
    generated(d.path());
    let g = d.path().to_str().unwrap();
    let o = run(&[
        "test",
        "--graph",
        g,
        "--allow-isolated",
        "--hypothesis",
        "avg(paper.citations | paper[year>3000]) > 1",
        "--sampler",
        "rns",
        "--budget",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["inconclusive"], true);
    assert!(r["p_value"].is_null());
    let bad_param = run(&[
        "test",
        "--graph",
        g,
        "--allow-isolated",
        "--hypothesis",
        "avg(paper.citations | paper) > 1",
        "--sampler",
        "srw",
        "--budget",
        "10",
        "--param",
        "bogus=1",
    ]);
    assert_eq!(bad_param.status.code(), Some(2));
    let bad_syntax = run(&[
        "test",
        "--graph",
        g,
        "--allow-isolated",
        "--hypothesis",
        "avg(paper.citations |) > 1",
        "--sampler",
        "srw",
        "--budget",
        "10",
    ]);
    assert_eq!(bad_syntax.status.code(), Some(2));
    assert!(stderr(&bad_syntax).contains("empty pattern"));
}

#[test]
fn hypothesis_file_and_contributions() {
    let d = tempfile::tempdir().unwrap();
    tiny(d.path());
    let hf = d.path().join("h.txt");
    fs::write(&hf, "avg(author.h | author) > 3\n").unwrap();
    let dump = d.path().join("c.csv");
    let o = run(&[
        "test",
        "--graph",
        d.path().to_str().unwrap(),
        "--hypothesis-file",
        hf.to_str().unwrap(),
        "--sampler",
        "ground-truth",
        "--dump-contributions",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["estimate"], 4.0);
    let csv = fs::read_to_string(dump).unwrap();
    assert_eq!(csv, "nodes,edges,value,weight\na1,,3,1\na2,,5,1\n");
}

#[test]
fn bench_smoke_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("smoke.toml");
    fs::write(
        &cfg,
        r#"
k = 3
seed = 11
proportions = [0.1]
samplers = ["srw", { kind = "phase-opt", m = 20 }]

[dataset]
preset = "desk"
scale = 0.05
seed = 3

[[hypotheses]]
id = "N1"
text = "avg(paper.citations | paper[year>=2015]) > 38"
"#,
    )
    .unwrap();
    let out = d.path().join("rows.csv");
    let o = run(&[
        "bench",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--stabilize-threshold",
        "0.5",
        "--patience",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 7);
    assert!(d.path().join("rows.csv.summary.csv").exists());
    let err = stderr(&o);
    assert!(
        err.contains("accuracy") && err.contains("phase-opt") && err.contains("stable:"),
        "{err}"
    );

    let again = d.path().join("again.csv");
    let o = bin()
        .args([
            "bench",
            cfg.to_str().unwrap(),
            "--out",
            again.to_str().unwrap(),
        ])
        .env("GRAPHHYPO_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    let strip = |t: &str| -> Vec<String> {
        t.lines()
            .map(|l| l.split(',').take(13).collect::<Vec<_>>().join(","))
            .collect()
    };
    assert_eq!(strip(&text), strip(&fs::read_to_string(&again).unwrap()));
}

#[test]
fn gen_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generated(a.path());
    generated(b.path());
    for f in ["schema.json", "nodes.tsv", "edges.tsv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let o = run(&[
        "validate",
        "--graph",
        a.path().to_str().unwrap(),
        "--allow-isolated",
    ]);
    assert!(
        stdout(&o).starts_with("nodes=1000 edges=5000"),
        "{}",
        stdout(&o)
    );
}
