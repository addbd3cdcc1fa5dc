//! Labeled tweet corpus loading and bag-of-words featurization.
//!
//! Source corpora label each tweet +1 (positive impact) or −1
//! (negative); everything downstream works in {0,1}, so −1 maps to 0 at
//! vectorization time. Featurization is a document-frequency-filtered
//! bag of words — binary presence for the Bernoulli model, raw term counts
//! for everything else.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

use crate::preprocess::FeatureMatrix;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("no usable records in corpus")]
    EmptyCorpus,
    #[error("no token survives df >= {min_df}")]
    EmptyVocabulary { min_df: u32 },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One labeled tweet. `label` is kept in the source domain {−1, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub id: String,
    pub text: String,
    pub label: i8,
}

/// How many rows the loader dropped, and why.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SkipReport {
    pub empty_text: usize,
    pub bad_label: usize,
}

impl SkipReport {
    pub fn total(&self) -> usize {
        self.empty_text + self.bad_label
    }
}

/// Load a labeled corpus from CSV. Column names are caller-supplied since
/// public tweet datasets do not agree on a schema. Rows with blank text or
/// a label outside {−1, +1} are skipped and counted, not errors.
pub fn load_tweets_csv(
    path: &Path,
    text_col: &str,
    label_col: &str,
) -> Result<(Vec<TweetRecord>, SkipReport), TextError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let text_idx = headers
        .iter()
        .position(|h| h == text_col)
        .ok_or_else(|| TextError::MissingColumn(text_col.to_string()))?;
    let label_idx = headers
        .iter()
        .position(|h| h == label_col)
        .ok_or_else(|| TextError::MissingColumn(label_col.to_string()))?;

    let mut records = Vec::new();
    let mut skipped = SkipReport::default();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let text = record.get(text_idx).unwrap_or("").trim();
        if text.is_empty() {
            skipped.empty_text += 1;
            continue;
        }
        let label_cell = record.get(label_idx).unwrap_or("").trim();
        let label = match label_cell.parse::<f64>() {
            Ok(v) if v == 1.0 => 1,
            Ok(v) if v == -1.0 => -1,
            _ => {
                skipped.bad_label += 1;
                continue;
            }
        };
        records.push(TweetRecord { id: (row + 1).to_string(), text: text.to_string(), label });
    }
    if records.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    Ok((records, skipped))
}

/// Lowercase and split a tweet into tokens.
///
/// Rules, in order: URLs (`http://`, `https://`, `www.`) and `@mentions`
/// are dropped whole; a leading `$` or `#` is stripped so tickers and
/// hashtags survive as plain words; what remains splits on every
/// non-alphanumeric character; tokens shorter than two characters drop.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for raw in text.split_whitespace() {
        let lower = raw.to_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") {
            continue;
        }
        if lower.starts_with('@') {
            continue;
        }
        let stripped = lower.trim_start_matches(['$', '#']);
        for piece in stripped.split(|c: char| !c.is_alphanumeric()) {
            if piece.chars().count() >= 2 {
                tokens.push(piece.to_string());
            }
        }
    }
    tokens
}

/// Token-to-column mapping frozen from a training corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    /// Tokens in column order: descending document frequency, ties
    /// alphabetical.
    pub tokens: Vec<String>,
    /// Aligned with `tokens`.
    pub document_frequency: Vec<u32>,
    index: HashMap<String, usize>,
    pub min_df: u32,
    pub max_size: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn column_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }
}

pub const DEFAULT_MIN_DF: u32 = 2;
pub const DEFAULT_MAX_VOCAB: usize = 5000;

/// Count document frequencies over the corpus and keep tokens with
/// `df >= min_df`, ordered by descending df (ties alphabetical), truncated
/// to `max_size`.
pub fn build_vocabulary(
    corpus: &[TweetRecord],
    min_df: u32,
    max_size: usize,
) -> Result<Vocabulary, TextError> {
    assert!(!corpus.is_empty(), "vocabulary needs a non-empty corpus");
    let mut df: HashMap<String, u32> = HashMap::new();
    for record in corpus {
        let unique: HashSet<String> = tokenize(&record.text).into_iter().collect();
        for token in unique {
            *df.entry(token).or_insert(0) += 1;
        }
    }
    let mut survivors: Vec<(String, u32)> = df.into_iter().filter(|(_, n)| *n >= min_df).collect();
    survivors.sort_by(|(ta, na), (tb, nb)| nb.cmp(na).then(ta.cmp(tb)));
    survivors.truncate(max_size);
    if survivors.is_empty() {
        return Err(TextError::EmptyVocabulary { min_df });
    }
    let tokens: Vec<String> = survivors.iter().map(|(t, _)| t.clone()).collect();
    let document_frequency: Vec<u32> = survivors.iter().map(|(_, n)| *n).collect();
    let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Ok(Vocabulary { tokens, document_frequency, index, min_df, max_size })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BowMode {
    /// Presence indicators in {0,1}.
    Binary,
    /// Raw in-tweet term counts.
    Tf,
}

/// Sparse bag-of-words matrix over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct BowMatrix {
    pub mode: BowMode,
    pub vocab_size: usize,
    /// Per tweet: (column, value) pairs sorted by column.
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Source labels mapped −1→0, +1→1.
    pub labels: Vec<u8>,
    pub ids: Vec<String>,
}

impl BowMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Expand to a dense [`FeatureMatrix`] with one column per vocabulary
    /// token and the {0,1} label as target.
    pub fn to_feature_matrix(&self, vocab: &Vocabulary) -> FeatureMatrix {
        assert_eq!(vocab.len(), self.vocab_size, "vocabulary does not match matrix width");
        let rows = self
            .rows
            .iter()
            .map(|sparse| {
                let mut dense = vec![0.0; self.vocab_size];
                for &(col, value) in sparse {
                    dense[col] = value;
                }
                dense
            })
            .collect();
        FeatureMatrix {
            column_names: vocab.tokens.clone(),
            rows,
            target: self.labels.iter().map(|&l| l as f64).collect(),
            index: self.ids.clone(),
        }
    }
}

/// Vectorize every record against a frozen vocabulary. Out-of-vocabulary
/// tokens are ignored; a tweet with nothing in-vocabulary keeps its
/// all-zero row (no silent drops after loading).
pub fn vectorize(corpus: &[TweetRecord], vocab: &Vocabulary, mode: BowMode) -> BowMatrix {
    let mut rows = Vec::with_capacity(corpus.len());
    let mut labels = Vec::with_capacity(corpus.len());
    let mut ids = Vec::with_capacity(corpus.len());
    for record in corpus {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for token in tokenize(&record.text) {
            if let Some(col) = vocab.column_of(&token) {
                *counts.entry(col).or_insert(0.0) += 1.0;
            }
        }
        let mut row: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(col, n)| (col, if mode == BowMode::Binary { 1.0 } else { n }))
            .collect();
        row.sort_by_key(|&(col, _)| col);
        rows.push(row);
        labels.push(if record.label == 1 { 1 } else { 0 });
        ids.push(record.id.clone());
    }
    BowMatrix { mode, vocab_size: vocab.len(), rows, labels, ids }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn record(id: &str, text: &str, label: i8) -> TweetRecord {
        TweetRecord { id: id.to_string(), text: text.to_string(), label }
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_valid_rows() {
        let f = write_csv("text,sentiment\ngreat quarter,1\nawful guidance,-1\nto the moon,1\n");
        let (records, skipped) = load_tweets_csv(f.path(), "text", "sentiment").unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(skipped.total(), 0);
        assert_eq!(records[0].label, 1);
        assert_eq!(records[1].label, -1);
        assert_eq!(records[2].id, "3");
    }

    #[test]
    fn skips_zero_labels_and_blank_text() {
        let f = write_csv("text,sentiment\nok,0\n  ,1\nfine,1\nweird,2\n");
        let (records, skipped) = load_tweets_csv(f.path(), "text", "sentiment").unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].text, "fine");
        assert_eq!(skipped.bad_label, 2);
        assert_eq!(skipped.empty_text, 1);
    }

    #[test]
    fn missing_label_column_is_an_error() {
        let f = write_csv("text,mood\nhello there,1\n");
        match load_tweets_csv(f.path(), "text", "sentiment") {
            Err(TextError::MissingColumn(col)) => assert_eq!(col, "sentiment"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn all_rows_skipped_is_empty_corpus() {
        let f = write_csv("text,sentiment\nmeh,0\n,1\n");
        assert!(matches!(
            load_tweets_csv(f.path(), "text", "sentiment"),
            Err(TextError::EmptyCorpus)
        ));
    }

    #[test]
    fn custom_column_names() {
        let f = write_csv("body,label,extra\nbuy now,1,x\n");
        let (records, _) = load_tweets_csv(f.path(), "body", "label").unwrap();
        assert_eq!(records[0].text, "buy now");
    }

    #[test]
    fn tokenize_strips_urls_and_mentions() {
        assert_eq!(tokenize("AAPL up!! https://t.co/x @bob"), vec!["aapl", "up"]);
    }

    #[test]
    fn tokenize_keeps_tickers_and_hashtags_as_words() {
        assert_eq!(tokenize("$AAPL beats #earnings"), vec!["aapl", "beats", "earnings"]);
    }

    #[test]
    fn tokenize_drops_short_tokens() {
        assert!(tokenize("a I 😊").is_empty());
    }

    #[test]
    fn tokenize_splits_on_punctuation() {
        assert_eq!(tokenize("don't miss-out,now"), vec!["don", "miss", "out", "now"]);
        assert_eq!(tokenize("WWW.example.com http://x.y"), Vec::<String>::new());
    }

    #[test]
    fn vocabulary_applies_min_df() {
        let corpus = vec![
            record("1", "apple rally today", 1),
            record("2", "apple slump today", -1),
            record("3", "tesla rally", 1),
        ];
        let vocab = build_vocabulary(&corpus, 2, 100).unwrap();
        // df: apple 2, rally 2, today 2; slump/tesla 1 → excluded
        assert_eq!(vocab.tokens, vec!["apple", "rally", "today"]);
        assert_eq!(vocab.document_frequency, vec![2, 2, 2]);
        assert_eq!(vocab.column_of("slump"), None);
    }

    #[test]
    fn vocabulary_breaks_df_ties_alphabetically_and_truncates() {
        let corpus = vec![
            record("1", "bb aa cc", 1),
            record("2", "cc aa bb", -1),
            record("3", "dd dd dd", 1), // df(dd) = 1 despite tf 3
        ];
        let vocab = build_vocabulary(&corpus, 1, 2).unwrap();
        assert_eq!(vocab.tokens, vec!["aa", "bb"]);
    }

    #[test]
    fn vocabulary_repeated_token_counts_once_per_tweet() {
        let corpus =
            vec![record("1", "spam spam spam", 1), record("2", "other words", -1)];
        let vocab = build_vocabulary(&corpus, 2, 100);
        assert!(matches!(vocab, Err(TextError::EmptyVocabulary { min_df: 2 })));
    }

    /// Exhaustive df oracle on a 10-tweet fixture.
    #[test]
    fn vocabulary_matches_brute_force_count() {
        let texts = [
            "market up big", "market down", "big gains market", "no change",
            "gains again", "down day", "market flat", "big day", "up up up", "quiet day",
        ];
        let corpus: Vec<TweetRecord> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| record(&i.to_string(), t, if i % 2 == 0 { 1 } else { -1 }))
            .collect();
        let vocab = build_vocabulary(&corpus, 2, 100).unwrap();

        let mut oracle: HashMap<&str, u32> = HashMap::new();
        for t in &texts {
            let mut seen = HashSet::new();
            for w in t.split(' ') {
                if w.len() >= 2 && seen.insert(w) {
                    *oracle.entry(w).or_insert(0) += 1;
                }
            }
        }
        let mut expected: Vec<(&str, u32)> =
            oracle.into_iter().filter(|(_, n)| *n >= 2).collect();
        expected.sort_by(|(ta, na), (tb, nb)| nb.cmp(na).then(ta.cmp(tb)));
        let expected_tokens: Vec<String> = expected.iter().map(|(t, _)| t.to_string()).collect();
        assert_eq!(vocab.tokens, expected_tokens);
        for (token, df) in expected {
            let col = vocab.column_of(token).unwrap();
            assert_eq!(vocab.document_frequency[col], df);
        }
    }

    #[test]
    fn vectorize_counts_and_binary_modes() {
        let corpus = vec![record("1", "buy buy buy stock", 1), record("2", "stock sale", -1)];
        let vocab = build_vocabulary(&corpus, 1, 100).unwrap();
        let tf = vectorize(&corpus, &vocab, BowMode::Tf);
        let binary = vectorize(&corpus, &vocab, BowMode::Binary);

        let buy = vocab.column_of("buy").unwrap();
        let row0: HashMap<usize, f64> = tf.rows[0].iter().cloned().collect();
        assert_eq!(row0[&buy], 3.0);
        let brow0: HashMap<usize, f64> = binary.rows[0].iter().cloned().collect();
        assert_eq!(brow0[&buy], 1.0);

        assert_eq!(tf.labels, vec![1, 0]);
        assert_eq!(tf.ids, vec!["1", "2"]);
    }

    #[test]
    fn vectorize_keeps_all_oov_rows() {
        let train = vec![record("1", "alpha beta", 1), record("2", "alpha gamma", -1)];
        let vocab = build_vocabulary(&train, 2, 100).unwrap(); // only "alpha"
        let other = vec![record("9", "unrelated words entirely", 1)];
        let bow = vectorize(&other, &vocab, BowMode::Tf);
        assert_eq!(bow.n_rows(), 1);
        assert!(bow.rows[0].is_empty());
    }

    #[test]
    fn dense_expansion_matches_sparse() {
        let corpus = vec![record("1", "xx yy xx", 1), record("2", "yy zz", -1)];
        let vocab = build_vocabulary(&corpus, 1, 100).unwrap();
        let bow = vectorize(&corpus, &vocab, BowMode::Tf);
        let dense = bow.to_feature_matrix(&vocab);
        assert_eq!(dense.column_names, vocab.tokens);
        assert_eq!(dense.target, vec![1.0, 0.0]);
        let xx = vocab.column_of("xx").unwrap();
        assert_eq!(dense.rows[0][xx], 2.0);
        assert_eq!(dense.rows[1][xx], 0.0);
        dense.validate().unwrap();
    }

    proptest::proptest! {
        // binary mode equals tf clamped to {0,1}
        #[test]
        fn prop_binary_is_clamped_tf(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let words = ["up", "down", "hold", "sell", "buy", "moon", "crash"];
            let corpus: Vec<TweetRecord> = (0..20)
                .map(|i| {
                    let n = rng.gen_range(1..8);
                    let text: Vec<&str> =
                        (0..n).map(|_| words[rng.gen_range(0..words.len())]).collect();
                    record(&i.to_string(), &text.join(" "), if rng.gen_bool(0.5) { 1 } else { -1 })
                })
                .collect();
            let vocab = build_vocabulary(&corpus, 1, 100).unwrap();
            let tf = vectorize(&corpus, &vocab, BowMode::Tf);
            let binary = vectorize(&corpus, &vocab, BowMode::Binary);
            proptest::prop_assert_eq!(tf.n_rows(), corpus.len());
            for (trow, brow) in tf.rows.iter().zip(&binary.rows) {
                proptest::prop_assert_eq!(trow.len(), brow.len());
                for (&(tc, tv), &(bc, bv)) in trow.iter().zip(brow) {
                    proptest::prop_assert_eq!(tc, bc);
                    proptest::prop_assert_eq!(bv, tv.min(1.0));
                    proptest::prop_assert!(tv >= 1.0);
                }
            }
        }
    }
}
