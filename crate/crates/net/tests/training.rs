use entail_core::data::{generate_dataset, LabeledPair, SplitSpec};
use entail_core::prover::Limits;
use entail_core::Language;
use entail_net::checkpoint;
use entail_net::model::{ModelConfig, ModelKind, Vocab};
use entail_net::train::{encode_pairs, evaluate, Confusion, Example, TrainConfig, Trainer};

fn language_vocab(lang: &Language) -> Vocab {
    Vocab::new(lang.vocabulary.tokens())
}

fn small_data(train: usize, test: usize, seed: u64) -> (Vocab, Vec<Example>, Vec<Example>) {
    let lang = Language::default_language();
    let spec = SplitSpec { train_size: train, test_size: test, seed, ..SplitSpec::default() };
    let d = generate_dataset(&lang, &spec, &Limits::default()).unwrap();
    let vocab = language_vocab(&lang);
    let tr = encode_pairs(&vocab, &d.train).unwrap();
    let te = encode_pairs(&vocab, &d.test).unwrap();
    (vocab, tr, te)
}

fn mean_loss(t: &Trainer, data: &[Example]) -> f64 {
    let l: Vec<&[usize]> = data.iter().map(|e| e.left.as_slice()).collect();
    let r: Vec<&[usize]> = data.iter().map(|e| e.right.as_slice()).collect();
    let y: Vec<usize> = data.iter().map(|e| e.label).collect();
    t.model.loss_and_grad(&l, &r, &y).0
}

#[test]
fn recurrent_models_overfit_fifty_pairs() {
    let (vocab, train, _) = small_data(50, 10, 3);
    for kind in [ModelKind::Srn, ModelKind::Gru, ModelKind::Lstm] {
        let config = TrainConfig { epochs: 200, seed: 4, ..TrainConfig::default() };
        let mut t = Trainer::new(ModelConfig::new(kind), vocab.clone(), config);
        let before = mean_loss(&t, &train);
        t.run_epoch(&train, &[]).unwrap();
        let after_one = mean_loss(&t, &train);
        assert!(after_one < before, "{kind}: {before} -> {after_one}");
        t.fit(&train, &[], |_, _| Ok(())).unwrap();
        let acc = evaluate(&t.model, &train).accuracy();
        assert_eq!(acc, 1.0, "{kind} reached only {acc}");
    }
}

#[test]
fn training_is_deterministic() {
    let (vocab, train, test) = small_data(120, 30, 5);
    let run = || {
        let config = TrainConfig { epochs: 3, seed: 11, ..TrainConfig::default() };
        let mut t = Trainer::new(ModelConfig::new(ModelKind::Gru), vocab.clone(), config);
        let log = t.fit(&train, &test, |_, _| Ok(())).unwrap();
        (log, t.model)
    };
    let (a, ma) = run();
    let (b, mb) = run();
    assert_eq!(a, b);
    assert_eq!(ma, mb);
}

#[test]
fn different_seeds_shuffle_differently() {
    let (vocab, ..) = small_data(20, 5, 5);
    let t = |seed| Trainer::new(ModelConfig::new(ModelKind::Srn), vocab.clone(), TrainConfig { seed, ..TrainConfig::default() });
    assert_ne!(t(1).epoch_order(1, 100), t(2).epoch_order(1, 100));
    assert_ne!(t(1).epoch_order(1, 100), t(1).epoch_order(2, 100));
}

#[test]
fn checkpoint_round_trip_is_bit_identical_and_resumable() {
    let (vocab, train, test) = small_data(80, 20, 6);
    let config = TrainConfig { epochs: 4, seed: 2, ..TrainConfig::default() };
    let mut straight = Trainer::new(ModelConfig::new(ModelKind::Lstm), vocab.clone(), config.clone());
    let full = straight.fit(&train, &test, |_, _| Ok(())).unwrap();

    let mut first = Trainer::new(ModelConfig::new(ModelKind::Lstm), vocab, TrainConfig { epochs: 2, ..config });
    let mut log = first.fit(&train, &test, |_, _| Ok(())).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    checkpoint::save(&first, &path).unwrap();
    let mut resumed = checkpoint::load(&path).unwrap();
    assert_eq!(resumed, first);
    let l: Vec<&[usize]> = test.iter().map(|e| e.left.as_slice()).collect();
    let r: Vec<&[usize]> = test.iter().map(|e| e.right.as_slice()).collect();
    assert_eq!(first.model.predict(&l, &r), resumed.model.predict(&l, &r));

    resumed.config.epochs = 4;
    log.extend(resumed.fit(&train, &test, |_, _| Ok(())).unwrap());
    assert_eq!(log, full);
    assert_eq!(resumed.model, straight.model);
}

#[test]
fn corrupt_checkpoints_are_rejected() {
    let (vocab, ..) = small_data(10, 5, 7);
    let t = Trainer::new(ModelConfig::new(ModelKind::Sum), vocab, TrainConfig::default());
    let bytes = checkpoint::to_bytes(&t).unwrap();
    assert!(checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    assert!(checkpoint::from_bytes(b"not a checkpoint").is_err());
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(checkpoint::from_bytes(&extra).is_err());
    assert_eq!(checkpoint::from_bytes(&bytes).unwrap(), t);
}

#[test]
fn both_sides_read_the_same_tensors_after_an_update() {
    let (vocab, train, _) = small_data(40, 5, 8);
    let mut t = Trainer::new(ModelConfig::new(ModelKind::Gru), vocab, TrainConfig::default());
    let batch: Vec<&Example> = train.iter().take(32).collect();
    t.step(&batch).unwrap();
    // a sentence placed on either side is encoded identically
    let s = train[0].left.as_slice();
    let other = train[1].left.as_slice();
    let v_left = t.model.encode(&[s, other]);
    let v_right = t.model.encode(&[other, s]);
    assert_eq!(v_left.row(0), v_right.row(1));
    let p = t.model.predict(&[s], &[s]);
    let q = t.model.predict(&[s, other], &[s, s]);
    assert_eq!(p.row(0), q.row(0));
}

#[test]
fn confusion_matrix_conventions() {
    let perfect = Confusion::from_predictions([0, 1, 2, 3, 4, 5, 6, 0], [0, 1, 2, 3, 4, 5, 6, 0]);
    let n = perfect.row_normalized();
    for (i, row) in n.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert_eq!(*v, if i == j { 1.0 } else { 0.0 });
        }
    }
    let c = Confusion::from_predictions([0, 0, 1, 2, 2, 2], [0, 1, 1, 2, 0, 0]);
    let trace: usize = (0..7).map(|i| c.counts[i][i]).sum();
    assert_eq!(c.accuracy(), trace as f64 / c.total() as f64);
    assert_eq!(c.counts[2][0], 2);
    let errors = c.errors_tsv();
    let third: Vec<&str> = errors.lines().nth(3).unwrap().split('\t').collect();
    assert_eq!(third, [">", "2", "0", "0", "0", "0", "0", "0"]);
}

#[test]
fn unknown_words_are_listed() {
    let lang = Language::default_language();
    let vocab = language_vocab(&lang);
    let pair: LabeledPair = entail_core::data::parse_line("#\tsome kids love all Romans\tall Italians fear some rabbits").unwrap();
    let err = encode_pairs(&vocab, &[pair]).unwrap_err();
    assert!(err.to_string().contains("kids"), "{err}");
    assert!(vocab.get("not").is_some());
}
