//! Shared test helpers: seeded random micro-corpora and models.

use bipos::corpus::{build_vocabulary, TagMap, TaggedCorpus, Tagset, Token, Vocabulary};
use bipos::models::{train_bipos, BiposModel};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub const TAG_POOL: [&str; 6] = ["N", "V", "AT", "JJ", "IN", "R"];

pub struct MicroWorld {
    pub corpus: TaggedCorpus,
    pub tagset: Tagset,
    pub vocab: Vocabulary,
}

/// A random tagged corpus over 2..=6 tags and 5..=50 words. Every tag occurs
/// and carries at least one repeated word (so the per-tag Turing estimates
/// stay below 1), and the vocabulary may contain a few never-seen ghosts.
pub fn random_micro_world(seed: u64) -> MicroWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tags = rng.gen_range(2..=6usize);
    let tags: Vec<&str> = TAG_POOL[..n_tags].to_vec();
    let n_words = rng.gen_range(5..=50usize);

    let mut words: Vec<String> = (0..n_words).map(|i| format!("w{i}")).collect();
    // Sprinkle in the trigger words of the built-in variables.
    for trigger in ["this", "a", "an", "during"] {
        if rng.gen_bool(0.5) {
            words.push(trigger.to_string());
        }
    }
    // Word -> allowed tags (1..=2 of them).
    let allowed: Vec<Vec<usize>> = words
        .iter()
        .map(|_| {
            let first = rng.gen_range(0..n_tags);
            if rng.gen_bool(0.3) {
                let second = rng.gen_range(0..n_tags);
                if second != first {
                    return vec![first, second];
                }
            }
            vec![first]
        })
        .collect();
    let mut per_tag: Vec<Vec<usize>> = vec![Vec::new(); n_tags];
    for (w, tags_of_w) in allowed.iter().enumerate() {
        for &t in tags_of_w {
            per_tag[t].push(w);
        }
    }
    for (t, list) in per_tag.iter_mut().enumerate() {
        if list.is_empty() {
            list.push(t % words.len());
        }
    }

    let mut tokens: Vec<Token> = Vec::new();
    let mut sentence_starts: Vec<usize> = Vec::new();
    let push = |tokens: &mut Vec<Token>, word: &str, tag: &str| {
        tokens.push(Token {
            surface: word.to_string(),
            tag: tag.to_string(),
            raw_tag: tag.to_string(),
        });
    };
    // Anchors: each tag emits one word twice, keeping d_g < 1.
    for (t, list) in per_tag.iter().enumerate() {
        let anchor = list[0];
        push(&mut tokens, &words[anchor], tags[t]);
        push(&mut tokens, &words[anchor], tags[t]);
    }
    let length = rng.gen_range(60..=200usize);
    while tokens.len() < length {
        let t = rng.gen_range(0..n_tags);
        let w = per_tag[t][rng.gen_range(0..per_tag[t].len())];
        push(&mut tokens, &words[w], tags[t]);
    }
    let mut i = 0;
    while i < tokens.len() {
        sentence_starts.push(i);
        i += rng.gen_range(4..=9);
    }
    let corpus = TaggedCorpus { tokens, sentence_starts };

    let map = TagMap::identity("micro", &tags);
    let tagset = map.image_tagset();
    let mut vocab = build_vocabulary(&corpus);
    if rng.gen_bool(0.5) {
        // Ghost words: in the vocabulary but never in training.
        let mut all = vocab.words().to_vec();
        for k in 0..rng.gen_range(1..=4usize) {
            all.push(format!("ghost{k}"));
        }
        vocab = Vocabulary::new(all, "training text plus ghosts", vocab.source_tokens, vocab.source_distinct);
    }
    MicroWorld { corpus, tagset, vocab }
}

pub fn random_micro_model(seed: u64) -> (MicroWorld, BiposModel<f64>) {
    let world = random_micro_world(seed);
    let model = train_bipos(&world.corpus, &world.vocab, &world.tagset, 1e-4, 1e-6)
        .expect("random micro world is trainable");
    (world, model)
}

/// Brute-force bigram estimate over surfaces, with a begin context at
/// sentence starts. Test-side oracle, independent of the model code.
pub struct BigramOracle {
    counts: std::collections::BTreeMap<(String, String), u64>,
    totals: std::collections::BTreeMap<String, u64>,
}

pub const BEGIN_WORD: &str = "<begin>";

impl BigramOracle {
    pub fn train(corpus: &TaggedCorpus) -> Self {
        let mut counts = std::collections::BTreeMap::new();
        let mut totals = std::collections::BTreeMap::new();
        let mut prev = BEGIN_WORD.to_string();
        for (i, tok) in corpus.tokens.iter().enumerate() {
            if corpus.is_sentence_start(i) {
                prev = BEGIN_WORD.to_string();
            }
            *counts.entry((prev.clone(), tok.surface.clone())).or_insert(0) += 1;
            *totals.entry(prev.clone()).or_insert(0) += 1;
            prev = tok.surface.clone();
        }
        BigramOracle { counts, totals }
    }

    pub fn prob(&self, prev: &str, word: &str) -> f64 {
        let c = self.counts.get(&(prev.to_string(), word.to_string())).copied().unwrap_or(0);
        let t = self.totals.get(prev).copied().unwrap_or(0);
        if t == 0 {
            return 0.0;
        }
        c as f64 / t as f64
    }
}
