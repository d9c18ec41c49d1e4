use coursemap::chaptermatch::FeatureMode;
use coursemap::indexmap::ViewFilter;
use coursemap::synthlab::{generate_synthetic_course, SynthParams};
use coursemap::{AnalysisBundle, Config};

fn params() -> SynthParams {
    SynthParams {
        n_chapters: 5,
        lecture_length_tokens: 2000,
        shared_vocab_fraction: 0.0,
        lecture_focus: 1.0,
        seed: 9,
        ..SynthParams::default()
    }
}

#[test]
fn written_course_loads_back_identically() {
    let course = generate_synthetic_course(&params()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    course.write(dir.path()).unwrap();

    let config = Config::default();
    let loaded = AnalysisBundle::load(dir.path(), &config).unwrap();
    let direct = AnalysisBundle::build(course.corpus, &config, Some(course.truth)).unwrap();
    assert_eq!(loaded.table().lecture_ids(), direct.table().lecture_ids());
    assert_eq!(loaded.table().n_phrases(), direct.table().n_phrases());
    assert_eq!(loaded.truth(), direct.truth());

    let f = ViewFilter { zoom: 2, focus: 1, contrast: 1 };
    assert_eq!(loaded.index_map(f).unwrap(), direct.index_map(f).unwrap());
}

#[test]
fn clean_course_matches_every_lecture() {
    let course = generate_synthetic_course(&params()).unwrap();
    let bundle = AnalysisBundle::build(course.corpus, &Config::default(), Some(course.truth)).unwrap();
    for mode in FeatureMode::ALL {
        let m = bundle.chapter_match(mode, 5).unwrap();
        assert_eq!(m.accuracy, Some(1.0), "{mode}");
    }
}

#[test]
fn similarity_over_common_phrases() {
    let course = generate_synthetic_course(&params()).unwrap();
    let bundle = AnalysisBundle::build(course.corpus, &Config::default(), None).unwrap();
    let ids: Vec<usize> = (0..bundle.table().n_phrases()).filter(|&p| bundle.table().doc_freq(p) > 0).take(12).collect();
    let graph = bundle.similarity(&ids).unwrap();
    assert_eq!(graph.graph.nodes.len(), 5);
    assert!(graph.graph.stress.is_finite());
    assert!(bundle.chapter_match(FeatureMode::Phrases, 5).unwrap().accuracy.is_none());
}
