use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use entail_cli::CliError;
use entail_net::NetError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn entail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entail")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn prove_prints_the_relation_and_its_converse() {
    let a = "all Europeans like some Italians";
    let b = "not some Italians not like some Europeans";
    assert_eq!(stdout(&entail(&["prove", a, b])).trim(), "<");
    assert_eq!(stdout(&entail(&["prove", b, a])).trim(), ">");
    assert_eq!(stdout(&entail(&["prove", a, a])).trim(), "=");
}

#[test]
fn prove_explain_lists_axioms_and_all_four_checks() {
    let out = stdout(&entail(&["prove", "--explain", "some Romans love all children", "some Italians love all children"]));
    assert!(out.starts_with("<\n"), "{out}");
    assert!(out.contains("[Italians > Romans]"), "{out}");
    assert_eq!(out.matches("SAT(").count(), 4, "{out}");
    assert!(out.contains("refutation"), "{out}");
    assert!(out.contains("model:"), "{out}");
}

#[test]
fn exit_codes_distinguish_failure_kinds() {
    let parse = entail(&["prove", "some Romans eat all children", "all children fear some Romans"]);
    assert_eq!(parse.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("position 3"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("language.json");
    std::fs::write(&bad, "{ \"nouns\": [] }").unwrap();
    let config = entail(&["prove", "--language", p(&bad), "all Romans love all Romans", "all Romans love all Romans"]);
    assert_eq!(config.status.code(), Some(2));

    let infeasible = entail(&["generate", "--train", "10", "--test", "10", "--train-lengths", "12", "--out", p(&dir.path().join("x"))]);
    assert_eq!(infeasible.status.code(), Some(2));

    let undecided = entail(&[
        "generate", "--train", "20", "--test", "5", "--max-domain", "2", "--max-resolution-steps", "50",
        "--max-undecided-rate", "0.0", "--out", p(&dir.path().join("u")),
    ]);
    assert_eq!(undecided.status.code(), Some(4), "{}", String::from_utf8_lossy(&undecided.stderr));

    let numeric = CliError::from(NetError::NonFinite { tensor: "loss", index: 0, value: f64::NAN });
    assert_eq!(numeric.exit_code(), 5);
}

fn fake_vectors(path: &Path, words: &[&str]) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut s = String::new();
    for w in words {
        s.push_str(&w.to_lowercase());
        for _ in 0..50 {
            let _ = write!(s, " {:.5}", rng.random_range(-1.0..1.0));
        }
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn generate_train_eval_and_zeroshot_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let gen = entail(&["generate", "--train", "200", "--test", "60", "--seed", "4", "--out", p(&data)]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    for f in ["train.tsv", "test.tsv", "distribution.tsv", "generation.log", "run_config.json"] {
        assert!(data.join(f).exists(), "{f}");
    }
    let config: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(data.join("run_config.json")).unwrap()).unwrap();
    assert_eq!(config["command"], "generate");
    assert_eq!(config["args"]["seed"], 4);
    assert_eq!(std::fs::read_to_string(data.join("train.tsv")).unwrap().lines().count(), 200);

    let vectors = dir.path().join("vectors.txt");
    let words = [
        "all", "some", "not", "Romans", "Italians", "Germans", "Europeans", "children", "love", "like", "hate", "fear",
        "kids", "adore", "dread", "detest",
    ];
    fake_vectors(&vectors, &words);
    let runs = dir.path().join("runs");
    let train = entail(&[
        "train", "--data", p(&data), "--model", "gru", "--epochs", "2", "--runs", "2", "--embeddings", p(&vectors),
        "--out", p(&runs),
    ]);
    assert!(train.status.success(), "{}", String::from_utf8_lossy(&train.stderr));
    let summary = stdout(&train);
    assert!(summary.contains("gru\tmean±sd"), "{summary}");
    for seed in [1, 2] {
        let run = runs.join(format!("run-{seed}"));
        for f in ["metrics.tsv", "model.ckpt", "confusion_normalized.tsv", "confusion_errors.tsv", "run_config.json"] {
            assert!(run.join(f).exists(), "{f}");
        }
        assert_eq!(std::fs::read_to_string(run.join("metrics.tsv")).unwrap().lines().count(), 3);
    }

    let ckpt = runs.join("run-1").join("model.ckpt");
    let eval = entail(&["eval", "--checkpoint", p(&ckpt), "--data", p(&data.join("test.tsv")), "--out", p(&dir.path().join("eval"))]);
    assert!(eval.status.success());
    assert!(stdout(&eval).starts_with("accuracy\t"));

    let suite = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/substitutions/synonyms.json");
    let zs = entail(&[
        "zeroshot", "--checkpoint", p(&ckpt), "--data", p(&data.join("test.tsv")), "--sub", p(&suite), "--embeddings",
        p(&vectors), "--out", p(&dir.path().join("zs")),
    ]);
    assert!(zs.status.success(), "{}", String::from_utf8_lossy(&zs.stderr));
    let table = stdout(&zs);
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 5, "{table}");
    assert!(rows[1].starts_with("children-kids\tchildren->kids\t"), "{table}");

    // a model with trainable embeddings cannot take new words
    let plain = dir.path().join("plain");
    assert!(entail(&["train", "--data", p(&data), "--model", "sum", "--epochs", "1", "--out", p(&plain)]).status.success());
    let refused = entail(&[
        "zeroshot", "--checkpoint", p(&plain.join("run-1").join("model.ckpt")), "--data", p(&data.join("test.tsv")),
        "--sub", p(&suite), "--embeddings", p(&vectors), "--out", p(&dir.path().join("zs2")),
    ]);
    assert_eq!(refused.status.code(), Some(2));

    // replacement words absent from the vector file are listed
    let partial = dir.path().join("partial.txt");
    fake_vectors(&partial, &words[..12]);
    let missing = entail(&[
        "zeroshot", "--checkpoint", p(&ckpt), "--data", p(&data.join("test.tsv")), "--sub", p(&suite), "--embeddings",
        p(&partial), "--out", p(&dir.path().join("zs3")),
    ]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("kids"));
}
