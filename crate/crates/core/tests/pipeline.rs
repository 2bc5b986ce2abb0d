use proptest::prelude::*;
use rucb::dataset::{read_dataset, write_dataset, DatasetBody, DatasetFile};
use rucb::report::emit_selection_report;
use rucb::reward_model::ToyPixelClassifier;
use rucb::rng::stream;
use rucb::scheduler::{
    run_initial_phase, run_scripted, Learner, PhasePlan, Policy, SegmentationTrainer,
};
use rucb::testbed::{
    generate_held_out, generate_scripted_corpus, generate_segmentation_corpus, ScriptedCorpusSpec,
    SegmentationSpec, FEATURE_DIM,
};

fn plan(policy: Policy) -> PhasePlan {
    PhasePlan {
        initial_iters: 5000,
        num_boot_phases: 3,
        t_per_phase: 5000,
        policy,
        policy_config: Default::default(),
    }
}

#[test]
fn ucb_top_selected_are_mostly_corrupted() {
    let corpus = generate_scripted_corpus(&ScriptedCorpusSpec::new(500, 0.05), 2).unwrap();
    let run = run_scripted(&plan(Policy::Ucb), &corpus, 2).unwrap();
    let report = emit_selection_report(&run.trace.log, 500, Some(&corpus.corrupted)).unwrap();
    let hits = report
        .top
        .iter()
        .filter(|t| t.corrupted == Some(true))
        .count();
    assert!(hits > 10, "{hits} of 20");
    assert!(report.warnings.is_empty());
    let series = report.share_series.unwrap();
    assert_eq!(series.len(), 20);
}

#[test]
fn uniform_top_selected_match_corruption_rate() {
    let mut hits = 0;
    let mut slots = 0;
    for seed in 0..5 {
        let corpus = generate_scripted_corpus(&ScriptedCorpusSpec::new(500, 0.1), seed).unwrap();
        let run = run_scripted(&plan(Policy::Uniform), &corpus, seed).unwrap();
        let report = emit_selection_report(&run.trace.log, 500, Some(&corpus.corrupted)).unwrap();
        hits += report
            .top
            .iter()
            .filter(|t| t.corrupted == Some(true))
            .count();
        slots += report.top.len();
    }
    // binomial(100, 0.1): mean 10, sd 3
    assert_eq!(slots, 100);
    assert!(
        (1..=19).contains(&hits),
        "{hits} corrupted in {slots} top slots"
    );
}

#[test]
fn corrupted_slices_have_larger_reward_after_warm_up() {
    let spec = SegmentationSpec::new(200, 0.1);
    let slices = generate_segmentation_corpus(&spec, 4).unwrap();
    let model = ToyPixelClassifier::new(FEATURE_DIM, spec.num_classes, spec.learning_rate).unwrap();
    let mut trainer = SegmentationTrainer {
        model,
        slices: &slices,
    };
    run_initial_phase(
        &mut trainer,
        2000,
        &mut stream(4, "initial-phase"),
        &mut Vec::new(),
    )
    .unwrap();
    let (mut bad, mut good) = (Vec::new(), Vec::new());
    for (i, s) in slices.iter().enumerate() {
        let r = trainer.evaluate(i).unwrap();
        if s.corrupted {
            bad.push(r)
        } else {
            good.push(r)
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(
        mean(&bad) > 1.5 * mean(&good),
        "corrupted {} clean {}",
        mean(&bad),
        mean(&good)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn segmentation_dataset_round_trips(
        seed in any::<u64>(),
        size in 1usize..12,
        side in 4usize..12,
        classes in 2usize..7,
        rate in 0.0f64..=1.0,
    ) {
        let spec = SegmentationSpec {
            size,
            height: side,
            width: side + 1,
            num_classes: classes,
            corruption_rate: rate,
            held_out: 3,
            learning_rate: 1.0,
        };
        let file = DatasetFile::segmentation(
            seed,
            generate_segmentation_corpus(&spec, seed).unwrap(),
            generate_held_out(&spec, seed).unwrap(),
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        write_dataset(&path, &file).unwrap();
        let back = read_dataset(&path).unwrap();
        prop_assert_eq!(&back, &file);
        if let DatasetBody::Segmentation { slices, .. } = &back.body {
            prop_assert_eq!(slices.len(), size);
        }
    }
}
