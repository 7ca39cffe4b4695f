use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use softrule_kge::config::RunConfig;
use softrule_kge::eval::{evaluate, TieMode};
use softrule_kge::pipeline::{self, load_checkpoint};
use softrule_kge::store::KnowledgeGraph;
use tempfile::TempDir;

const TRAIN: &str = "\
alice\tborn_in\tparis
paris\tcity_of\tfrance
bob\tborn_in\tlyon
lyon\tcity_of\tfrance
bob\tnationality\tfrance
carol\tborn_in\trome
rome\tcity_of\titaly
carol\tnationality\titaly
dave\tborn_in\tmilan
milan\tcity_of\titaly
";
const VALID: &str = "dave\tnationality\titaly\n";
const TEST: &str = "alice\tnationality\tfrance\n";
const RULES: &str = "\
# nationality follows birthplace
born_in(x,z) & city_of(z,y) => nationality(x,y)\t0.9
";

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in [("train.tsv", TRAIN), ("valid.tsv", VALID), ("test.tsv", TEST), ("rules.txt", RULES)] {
            fs::write(dir.path().join(name), body).unwrap();
        }
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn data_args(&self) -> Vec<String> {
        let mut args = Vec::new();
        for (flag, name) in [("--train", "train.tsv"), ("--valid", "valid.tsv"), ("--test", "test.tsv")] {
            args.push(flag.to_owned());
            args.push(self.path(name).display().to_string());
        }
        args
    }

    fn run(&self, sub: &str, extra: &[&str], with_rules: bool) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_softrule-kge"));
        cmd.arg(sub).args(self.data_args());
        if with_rules {
            cmd.arg("--rules").arg(self.path("rules.txt"));
        }
        cmd.args(["--checkpoint-dir"]).arg(self.path("run"));
        cmd.args(extra).output().unwrap()
    }

    fn train(&self) -> Output {
        self.run(
            "train",
            &["--dim", "4", "--neg-ratio", "2", "--max-epochs", "5", "--batches", "2", "--seed", "3", "--threads", "1"],
            true,
        )
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn assert_ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

/// Second line of the statistics table, as numbers.
fn stats_row(text: &str) -> Vec<usize> {
    let header = text.lines().position(|l| l.trim_start().starts_with("n_e")).unwrap();
    text.lines().nth(header + 1).unwrap().split_whitespace().map(|v| v.parse().unwrap()).collect()
}

#[test]
fn ground_reports_statistics_and_writes_files() {
    let f = Fixture::new();
    let out = f.path("ground");
    let o = f.run("ground", &["--out", out.to_str().unwrap()], true);
    assert_ok(&o);
    // entities relations labeled unlabeled groundings valid test rules
    // dave's groundings conclude the valid triple, which is not observed
    assert_eq!(stats_row(&stdout(&o)), vec![10, 3, 10, 2, 2, 1, 1, 1]);
    let unlabeled = fs::read_to_string(out.join(pipeline::UNLABELED_FILE)).unwrap();
    assert!(unlabeled.contains("alice\tnationality\tfrance"));
    let groundings = fs::read_to_string(out.join(pipeline::GROUNDINGS_FILE)).unwrap();
    assert_eq!(groundings.lines().count(), 2);
}

#[test]
fn train_eval_predict_round_trip() {
    let f = Fixture::new();
    let o = f.train();
    assert_ok(&o);
    let run = f.path("run");
    for name in [pipeline::CHECKPOINT_FILE, pipeline::LOG_FILE, pipeline::CONFIG_FILE] {
        assert!(run.join(name).is_file(), "{name} missing");
    }
    assert!(!run.join(".lock").exists());
    assert_eq!(fs::read_to_string(run.join(pipeline::LOG_FILE)).unwrap().lines().filter(|l| l.starts_with("epoch=")).count(), 5);
    let snapshot = RunConfig::load(run.join(pipeline::CONFIG_FILE)).unwrap();
    assert_eq!(snapshot.train.dim, 4);
    assert_eq!(snapshot.train.seed, 3);

    let dump = f.path("ranks.tsv");
    let o = f.run("eval", &["--format", "kv", "--rank-dump", dump.to_str().unwrap()], false);
    assert_ok(&o);
    let text = stdout(&o);
    for key in ["mrr=", "med=", "hits@1=", "hits@3=", "hits@5=", "hits@10=", "ranks=2"] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
    assert_eq!(fs::read_to_string(&dump).unwrap().lines().count(), 1);

    // same numbers as the library call
    let kg = KnowledgeGraph::load(f.path("train.tsv"), Some(&f.path("valid.tsv")), Some(&f.path("test.tsv"))).unwrap();
    let ck = load_checkpoint(&kg, &run.join(pipeline::CHECKPOINT_FILE)).unwrap();
    let report = evaluate(&ck.embeddings, kg.test(), &kg, TieMode::Mid).unwrap();
    assert!(text.contains(&format!("mrr={}\n", report.mrr)));
    assert!(text.contains(&format!("med={}\n", report.med)));

    let o = f.run("eval", &[], false);
    assert_ok(&o);
    assert!(stdout(&o).contains("HITS@10"));

    let pred = f.path("pred.tsv");
    let o = f.run("predict", &["--output", pred.to_str().unwrap()], true);
    assert_ok(&o);
    let lines: Vec<String> = fs::read_to_string(&pred).unwrap().lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 2);
    for l in &lines {
        let cols: Vec<&str> = l.split('\t').collect();
        assert_eq!(cols.len(), 5);
        let (truth, label): (f64, f64) = (cols[3].parse().unwrap(), cols[4].parse().unwrap());
        assert!(label >= truth && label <= 1.0);
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let f = Fixture::new();
    let cfg = f.path("run.toml");
    fs::write(
        &cfg,
        format!(
            "[paths]\ntrain = {:?}\ntest = {:?}\ncheckpoint_dir = {:?}\n[train]\ndim = 3\nmax_epochs = 2\nbatches = 1\n",
            f.path("train.tsv"),
            f.path("test.tsv"),
            f.path("from_file"),
        ),
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_softrule-kge"))
        .args(["train", "--config", cfg.to_str().unwrap(), "--dim", "5"])
        .output()
        .unwrap();
    assert_ok(&o);
    let snapshot = RunConfig::load(f.path("from_file").join(pipeline::CONFIG_FILE)).unwrap();
    assert_eq!(snapshot.train.dim, 5);
    assert_eq!(snapshot.train.max_epochs, 2);
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn vocabulary_mismatch_is_reported() {
    let f = Fixture::new();
    assert_ok(&f.train());
    let other = f.path("other_train.tsv");
    fs::write(&other, format!("{TRAIN}zoe\tborn_in\tparis\n")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_softrule-kge"))
        .args(["eval", "--train", other.to_str().unwrap(), "--test", f.path("test.tsv").to_str().unwrap()])
        .arg("--checkpoint")
        .arg(f.path("run").join(pipeline::CHECKPOINT_FILE))
        .output()
        .unwrap();
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("vocabulary"));
}

#[test]
fn missing_rule_file_fails_before_training() {
    let f = Fixture::new();
    let o = Command::new(env!("CARGO_BIN_EXE_softrule-kge"))
        .args(["train", "--train", f.path("train.tsv").to_str().unwrap(), "--rules", "/nonexistent/rules.txt"])
        .arg("--checkpoint-dir")
        .arg(f.path("run"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rules"));
    assert!(!f.path("run").join(pipeline::CHECKPOINT_FILE).exists());
}

#[test]
fn threshold_without_rules_is_rejected() {
    let f = Fixture::new();
    let o = f.run("ground", &["--min-confidence", "0.5"], false);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("min-confidence"));
}

#[test]
fn unknown_relation_in_rules_is_a_parse_failure() {
    let f = Fixture::new();
    fs::write(f.path("rules.txt"), "born_in(x,y) => citizen_of(x,y) 0.9\n").unwrap();
    let o = f.run("ground", &[], true);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("citizen_of"));
}

#[test]
fn held_lock_blocks_training() {
    let f = Fixture::new();
    let run = f.path("run");
    fs::create_dir_all(&run).unwrap();
    let lock = pipeline::DirLock::acquire(Path::new(&run)).unwrap();
    let o = f.train();
    assert_eq!(code(&o), 7);
    drop(lock);
    assert_ok(&f.train());
}
