//! Checks on the shipped tag-map files: sizes, coverage and composition.

use std::path::PathBuf;

use bipos::corpus::{merge_tag, TagMap};

fn map(name: &str) -> TagMap {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/tagmaps").join(name);
    TagMap::from_path(path).expect("shipped map loads")
}

#[test]
fn image_sizes_match_set_names() {
    for (file, size) in
        [("lob-135.tsv", 135), ("lob-88.tsv", 88), ("lob-42.tsv", 42), ("lob-24.tsv", 24)]
    {
        let m = map(file);
        assert_eq!(m.image_tagset().len(), size, "{file}");
    }
}

#[test]
fn stepwise_composition_equals_direct_merge() {
    let lob88 = map("lob-88.tsv");
    let m88_42 = map("t88-42.tsv");
    let lob42 = map("lob-42.tsv");
    for raw in lob88.raw_tags() {
        let via_88 = merge_tag(merge_tag(raw, &lob88).unwrap(), &m88_42).unwrap();
        assert_eq!(via_88, merge_tag(raw, &lob42).unwrap(), "raw tag {raw}");
    }

    let composed = lob88.compose(&m88_42, "lob-42-composed").unwrap();
    for raw in lob88.raw_tags() {
        assert_eq!(composed.get(raw), lob42.get(raw));
    }

    let lob135 = map("lob-135.tsv");
    let m135_88 = map("t135-88.tsv");
    for raw in lob135.raw_tags() {
        let via_135 = merge_tag(merge_tag(raw, &lob135).unwrap(), &m135_88).unwrap();
        assert_eq!(via_135, merge_tag(raw, &lob88).unwrap(), "raw tag {raw}");
    }
}

#[test]
fn reference_rows() {
    assert_eq!(map("lob-42.tsv").get("NPT"), Some("NP"));
    assert_eq!(map("lob-24.tsv").get("VBZ"), Some("V"));
    assert_eq!(map("lob-42.tsv").get("NN$"), Some("N"));
    assert_eq!(map("lob-88.tsv").get("PP1AS"), Some("PP1"));
}

#[test]
fn sample_text_parses_under_every_map() {
    // The sample uses escape markers, punctuation tags and genitive tags;
    // all four maps must cover it.
    let sample = "A01 2 ^ *'_*' stop_VB electing_VBG life_NN peers_NNS **'_**'\n\
                  A01 4 ^ a_AT move_NN to_TO stop_VB \\0Mr_NPT Gaitskell_NP from_IN\n\
                  A01 13 ^ \\0Mr_NPT Foot's_NP$ line_NN will_MD be_BE that_CS as_CS labour_NN";
    for file in ["lob-135.tsv", "lob-88.tsv", "lob-42.tsv", "lob-24.tsv"] {
        let m = map(file);
        let out = bipos::corpus::read_lob(std::io::Cursor::new(sample), &m).unwrap();
        assert_eq!(out.corpus.n(), 21, "{file}");
        assert_eq!(out.skipped_items, 0);
        assert_eq!(out.corpus.tokens[5].surface, "**'");
    }
}
