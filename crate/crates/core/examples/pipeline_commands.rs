//! The command layer behind the binary, driven from a TOML run configuration:
//! ground, train, evaluate and predict into one run directory.
//!
//! cargo run --release --example pipeline_commands

use std::fs;

use softrule_kge::config::RunConfig;
use softrule_kge::pipeline::{cmd_eval, cmd_ground, cmd_predict, cmd_train};
use softrule_kge::synthetic::PlantedRuleSpec;

fn main() -> softrule_kge::Result<()> {
    let dir = std::env::temp_dir().join(format!("pipeline-commands-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("create run directory");

    let data = PlantedRuleSpec { entities: 100, premise_pairs: 300, background_pairs: 200, ..Default::default() }.generate();
    let v = data.kg.vocab();
    for (name, triples) in [("train.tsv", data.kg.train()), ("test.tsv", data.kg.test())] {
        let mut buf = Vec::new();
        v.write_triples(&mut buf, triples).expect("in-memory write");
        fs::write(dir.join(name), buf).expect("write split");
    }
    let rules: String = data.rules.iter().map(|r| format!("{}\n", r.display(v))).collect();
    fs::write(dir.join("rules.txt"), rules).expect("write rules");

    let toml = format!(
        r#"
threads = 2

[paths]
train = "{d}/train.tsv"
test = "{d}/test.tsv"
rules = "{d}/rules.txt"
checkpoint_dir = "{d}/run"

[train]
dim = 16
negatives = 5
learning_rate = 0.1
l2 = 1e-5
slack_c = 0.1
batches = 10
max_epochs = 30

[eval]
tie_mode = "mid"
"#,
        d = dir.display()
    );
    let config = RunConfig::from_toml(&toml)?;
    config.validate()?;

    println!("{}", cmd_ground(&config, &dir.join("ground"))?);
    let summary = cmd_train(&config)?;
    println!("trained {} epochs -> {}", summary.log.epochs.len(), summary.checkpoint.display());
    print!("{}", cmd_eval(&config, &summary.checkpoint)?.to_key_values());

    let mut out = Vec::new();
    let n = cmd_predict(&config, &summary.checkpoint, &mut out)?;
    let text = String::from_utf8(out).expect("utf-8");
    println!("{n} soft labels, first three:");
    for line in text.lines().take(3) {
        println!("  {line}");
    }
    Ok(())
}
