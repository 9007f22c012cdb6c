//! K-nearest-neighbor recognition over chain-code feature vectors.
//!
//! Distance is the plain Euclidean metric over the 120 counts. Ties are
//! resolved deterministically: majority vote among the k nearest, then
//! smaller mean distance among tied labels, then alphabet order, so a model
//! classifies identically regardless of sample insertion order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::features::{FeatureVector, FEATURE_COUNT};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClassifierError {
    #[error("feature vectors have different lengths ({left} vs {right})")]
    DimensionError { left: usize, right: usize },
    #[error("model has no samples")]
    ModelEmpty,
    #[error("k = {k} exceeds the sample count {samples}")]
    InvalidK { k: usize, samples: usize },
    #[error("split ratio {0} is outside (0, 1)")]
    InvalidRatio(f64),
    #[error("class {label} has fewer than 2 samples; cannot stratify")]
    StratifyError { label: String },
    #[error("label {0:?} is not in the model alphabet")]
    UnknownLabel(String),
    #[error("label {0:?} contains whitespace")]
    BadLabel(String),
    #[error("malformed model file at byte {offset}: {message}")]
    FormatError { offset: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// A feature vector with its class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub label: String,
}

impl LabeledSample {
    pub fn new(features: FeatureVector, label: impl Into<String>) -> Self {
        LabeledSample {
            features,
            label: label.into(),
        }
    }
}

/// Euclidean distance of equation form `sqrt(sum (x_k - y_k)^2)`.
pub fn euclidean_distance(x: &[u32], y: &[u32]) -> Result<f64, ClassifierError> {
    if x.len() != y.len() {
        return Err(ClassifierError::DimensionError {
            left: x.len(),
            right: y.len(),
        });
    }
    let sum: u64 = x
        .iter()
        .zip(y.iter())
        .map(|(&a, &b)| {
            let d = a as i64 - b as i64;
            (d * d) as u64
        })
        .sum();
    Ok((sum as f64).sqrt())
}

fn normalized_distance(x: &[u32], y: &[u32]) -> f64 {
    let sx: f64 = x.iter().map(|&v| v as f64).sum::<f64>().max(1.0);
    let sy: f64 = y.iter().map(|&v| v as f64).sum::<f64>().max(1.0);
    x.iter()
        .zip(y.iter())
        .map(|(&a, &b)| {
            let d = a as f64 / sx - b as f64 / sy;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Immutable KNN model: stored samples, ordered alphabet, neighbor count.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    samples: Vec<LabeledSample>,
    alphabet: Vec<String>,
    k: usize,
    /// When set, distances are taken between per-glyph normalized vectors.
    normalize: bool,
}

impl KnnModel {
    /// Build with an explicit alphabet; every sample label must be in it.
    pub fn new(
        samples: Vec<LabeledSample>,
        alphabet: Vec<String>,
        k: usize,
    ) -> Result<Self, ClassifierError> {
        assert!(k >= 1, "k must be >= 1");
        for label in &alphabet {
            if label.is_empty() || label.chars().any(|c| c.is_whitespace()) {
                return Err(ClassifierError::BadLabel(label.clone()));
            }
        }
        for s in &samples {
            if !alphabet.contains(&s.label) {
                return Err(ClassifierError::UnknownLabel(s.label.clone()));
            }
        }
        Ok(KnnModel {
            samples,
            alphabet,
            k,
            normalize: false,
        })
    }

    /// Build with the alphabet derived from the samples (sorted, unique).
    pub fn from_samples(samples: Vec<LabeledSample>, k: usize) -> Result<Self, ClassifierError> {
        let mut alphabet: Vec<String> = samples.iter().map(|s| s.label.clone()).collect();
        alphabet.sort();
        alphabet.dedup();
        KnnModel::new(samples, alphabet, k)
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn label_index(&self, label: &str) -> usize {
        self.alphabet
            .iter()
            .position(|l| l == label)
            .expect("sample labels are validated against the alphabet")
    }

    fn distance(&self, a: &FeatureVector, b: &FeatureVector) -> f64 {
        if self.normalize {
            normalized_distance(a.counts(), b.counts())
        } else {
            euclidean_distance(a.counts(), b.counts()).expect("feature vectors share a fixed length")
        }
    }

    /// Majority label among the k nearest samples, with the deterministic tie
    /// rules described at module level. The confidence is
    /// `(k - runner-up votes) / k`.
    pub fn classify(&self, query: &FeatureVector) -> Result<(String, f64), ClassifierError> {
        if self.samples.is_empty() {
            return Err(ClassifierError::ModelEmpty);
        }
        if self.k > self.samples.len() {
            return Err(ClassifierError::InvalidK {
                k: self.k,
                samples: self.samples.len(),
            });
        }

        let mut scored: Vec<(f64, usize)> = self
            .samples
            .iter()
            .map(|s| (self.distance(&s.features, query), self.label_index(&s.label)))
            .collect();
        // order by distance, then alphabet index so equal-distance neighbors
        // never depend on insertion order
        scored.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        scored.truncate(self.k);

        let mut votes: BTreeMap<usize, (usize, f64)> = BTreeMap::new(); // label -> (count, dist sum)
        for &(d, li) in &scored {
            let e = votes.entry(li).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += d;
        }

        let mut best: Option<(usize, usize, f64)> = None; // (label, count, mean dist)
        let mut runner_up = 0usize;
        for (&li, &(count, dist_sum)) in &votes {
            let mean = dist_sum / count as f64;
            match best {
                None => best = Some((li, count, mean)),
                Some((bli, bcount, bmean)) => {
                    let better = count > bcount
                        || (count == bcount && (mean < bmean || (mean == bmean && li < bli)));
                    if better {
                        runner_up = runner_up.max(bcount);
                        best = Some((li, count, mean));
                    } else {
                        runner_up = runner_up.max(count);
                    }
                }
            }
        }
        let (label_idx, win_votes, _) = best.expect("votes is non-empty");
        let _ = win_votes;
        let confidence = (self.k - runner_up) as f64 / self.k as f64;
        Ok((self.alphabet[label_idx].clone(), confidence))
    }
}

/// Per-class stratified split: `ratio` of each class (rounded down, at least
/// one) goes to training, the rest to test. Deterministic for a given seed.
pub fn split_train_test(
    corpus: &[LabeledSample],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>), ClassifierError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(ClassifierError::InvalidRatio(ratio));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in corpus.iter().enumerate() {
        by_class.entry(s.label.as_str()).or_default().push(i);
    }
    for (label, members) in &by_class {
        if members.len() < 2 {
            return Err(ClassifierError::StratifyError {
                label: (*label).to_string(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut members) in by_class {
        members.shuffle(&mut rng);
        let n_train = ((ratio * members.len() as f64).floor() as usize).max(1);
        for (j, idx) in members.into_iter().enumerate() {
            if j < n_train {
                train.push(corpus[idx].clone());
            } else {
                test.push(corpus[idx].clone());
            }
        }
    }
    Ok((train, test))
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassStats {
    pub label: String,
    pub total: usize,
    pub correct: usize,
}

/// Recognition accuracy report: per-class rows, confusion matrix, overall.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub alphabet: Vec<String>,
    pub per_class: Vec<ClassStats>,
    /// `confusion[actual][predicted]`, indexed by alphabet position.
    pub confusion: Vec<Vec<usize>>,
    pub total: usize,
    pub correct: usize,
}

impl EvalReport {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    /// Text table: label, total, correct, percent, plus an overall row.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str("label    total  correct  percent\n");
        for row in &self.per_class {
            let pct = if row.total == 0 {
                0.0
            } else {
                100.0 * row.correct as f64 / row.total as f64
            };
            out.push_str(&format!(
                "{:<8} {:>5}  {:>7}  {:>6.2}%\n",
                row.label, row.total, row.correct, pct
            ));
        }
        out.push_str(&format!(
            "overall  {:>5}  {:>7}  {:>6.2}%\n",
            self.total,
            self.correct,
            100.0 * self.accuracy()
        ));
        out
    }
}

/// Classify every test sample and tally per-class accuracy plus the
/// confusion matrix.
pub fn evaluate(model: &KnnModel, test: &[LabeledSample]) -> Result<EvalReport, ClassifierError> {
    let alphabet = model.alphabet().to_vec();
    let idx_of = |label: &str| alphabet.iter().position(|l| l == label);
    let mut per_class: Vec<ClassStats> = alphabet
        .iter()
        .map(|l| ClassStats {
            label: l.clone(),
            total: 0,
            correct: 0,
        })
        .collect();
    let mut confusion = vec![vec![0usize; alphabet.len()]; alphabet.len()];
    let mut total = 0;
    let mut correct = 0;

    for sample in test {
        let (predicted, _) = model.classify(&sample.features)?;
        total += 1;
        let actual_idx = idx_of(&sample.label).ok_or_else(|| {
            ClassifierError::UnknownLabel(sample.label.clone())
        })?;
        let pred_idx = idx_of(&predicted).expect("prediction comes from the alphabet");
        confusion[actual_idx][pred_idx] += 1;
        per_class[actual_idx].total += 1;
        if predicted == sample.label {
            correct += 1;
            per_class[actual_idx].correct += 1;
        }
    }
    Ok(EvalReport {
        alphabet,
        per_class,
        confusion,
        total,
        correct,
    })
}

const MODEL_MAGIC: &str = "PLATEKIT-KNN";
const MODEL_VERSION: u32 = 1;

/// Canonical text serialization: magic/version, k, normalize flag, alphabet,
/// sample count, then one `label counts...` line per sample. LF, UTF-8;
/// `encode(decode(bytes)) == bytes`.
pub fn encode_model(model: &KnnModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("{MODEL_MAGIC} {MODEL_VERSION}\n"));
    out.push_str(&format!("k {}\n", model.k));
    out.push_str(&format!(
        "normalize {}\n",
        if model.normalize { "per-glyph" } else { "off" }
    ));
    out.push_str(&format!("alphabet {}\n", model.alphabet.join(" ")));
    out.push_str(&format!("samples {}\n", model.samples.len()));
    for s in &model.samples {
        out.push_str(&s.label);
        out.push(' ');
        out.push_str(&s.features.to_dump_line());
        out.push('\n');
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<KnnModel, ClassifierError> {
    let mut offset = 0usize;

    let next_line = |offset: &mut usize| -> Result<&str, ClassifierError> {
        if *offset >= bytes.len() {
            return Err(ClassifierError::FormatError {
                offset: *offset,
                message: "unexpected end of file".into(),
            });
        }
        let rest = &bytes[*offset..];
        let end = rest.iter().position(|&b| b == b'\n').ok_or(ClassifierError::FormatError {
            offset: bytes.len(),
            message: "missing trailing newline".into(),
        })?;
        let line = std::str::from_utf8(&rest[..end]).map_err(|_| ClassifierError::FormatError {
            offset: *offset,
            message: "invalid utf-8".into(),
        })?;
        *offset += end + 1;
        Ok(line)
    };

    let header = next_line(&mut offset)?;
    let expected = format!("{MODEL_MAGIC} {MODEL_VERSION}");
    if header != expected {
        return Err(ClassifierError::FormatError {
            offset: 0,
            message: format!("bad header {header:?}, expected {expected:?}"),
        });
    }

    let line_start = offset;
    let k_line = next_line(&mut offset)?;
    let k: usize = k_line
        .strip_prefix("k ")
        .and_then(|v| v.parse().ok())
        .filter(|&k| k >= 1)
        .ok_or(ClassifierError::FormatError {
            offset: line_start,
            message: "expected `k <count>`".into(),
        })?;

    let line_start = offset;
    let norm_line = next_line(&mut offset)?;
    let normalize = match norm_line.strip_prefix("normalize ") {
        Some("off") => false,
        Some("per-glyph") => true,
        _ => {
            return Err(ClassifierError::FormatError {
                offset: line_start,
                message: "expected `normalize off|per-glyph`".into(),
            })
        }
    };

    let line_start = offset;
    let alpha_line = next_line(&mut offset)?;
    let alphabet: Vec<String> = alpha_line
        .strip_prefix("alphabet ")
        .ok_or(ClassifierError::FormatError {
            offset: line_start,
            message: "expected `alphabet <labels>`".into(),
        })?
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();

    let line_start = offset;
    let count_line = next_line(&mut offset)?;
    let count: usize = count_line
        .strip_prefix("samples ")
        .and_then(|v| v.parse().ok())
        .ok_or(ClassifierError::FormatError {
            offset: line_start,
            message: "expected `samples <count>`".into(),
        })?;

    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let line_start = offset;
        let line = next_line(&mut offset)?;
        let (label, rest) = line.split_once(' ').ok_or(ClassifierError::FormatError {
            offset: line_start,
            message: "expected `<label> <120 counts>`".into(),
        })?;
        let features = FeatureVector::parse_dump_line(rest).ok_or(ClassifierError::FormatError {
            offset: line_start,
            message: format!("expected {FEATURE_COUNT} integer counts"),
        })?;
        samples.push(LabeledSample::new(features, label));
    }
    if offset != bytes.len() {
        return Err(ClassifierError::FormatError {
            offset,
            message: "trailing data after last sample".into(),
        });
    }

    Ok(KnnModel::new(samples, alphabet, k)?.with_normalize(normalize))
}

pub fn save_model(model: &KnnModel, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
    fs::write(path, encode_model(model)).map_err(|e| ClassifierError::Io(e.to_string()))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<KnnModel, ClassifierError> {
    let bytes = fs::read(path).map_err(|e| ClassifierError::Io(e.to_string()))?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fv(mut fill: impl FnMut(usize) -> u32) -> FeatureVector {
        let mut counts = [0u32; FEATURE_COUNT];
        for (i, c) in counts.iter_mut().enumerate() {
            *c = fill(i);
        }
        FeatureVector::from_counts(counts)
    }

    fn random_fv(rng: &mut ChaCha8Rng, max: u32) -> FeatureVector {
        fv(|_| rng.gen_range(0..max))
    }

    #[test]
    fn distance_zero_for_identical() {
        let x = fv(|i| (i % 13) as u32);
        assert_eq!(euclidean_distance(x.counts(), x.counts()).unwrap(), 0.0);
    }

    #[test]
    fn distance_three_four_five() {
        let x = fv(|i| match i {
            0 => 3,
            1 => 4,
            _ => 0,
        });
        let y = fv(|_| 0);
        assert_eq!(euclidean_distance(x.counts(), y.counts()).unwrap(), 5.0);
    }

    #[test]
    fn distance_mismatched_lengths_error() {
        assert!(matches!(
            euclidean_distance(&[1, 2, 3], &[1, 2]),
            Err(ClassifierError::DimensionError { left: 3, right: 2 })
        ));
    }

    #[test]
    fn distance_matches_independent_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..1000 {
            let x = random_fv(&mut rng, 60);
            let y = random_fv(&mut rng, 60);
            let got = euclidean_distance(x.counts(), y.counts()).unwrap();
            // Oracle: accumulate squared differences in i128 then sqrt.
            let mut acc: i128 = 0;
            for k in 0..FEATURE_COUNT {
                let d = x.counts()[k] as i128 - y.counts()[k] as i128;
                acc += d * d;
            }
            let expect = (acc as f64).sqrt();
            let rel = if expect == 0.0 {
                got
            } else {
                (got - expect).abs() / expect
            };
            assert!(rel <= 1e-9, "relative error {rel}");
        }
    }

    #[test]
    fn distance_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..300 {
            let x = random_fv(&mut rng, 40);
            let y = random_fv(&mut rng, 40);
            let z = random_fv(&mut rng, 40);
            let dxy = euclidean_distance(x.counts(), y.counts()).unwrap();
            let dyx = euclidean_distance(y.counts(), x.counts()).unwrap();
            assert_eq!(dxy, dyx, "symmetry must be exact");
            if dxy == 0.0 {
                assert_eq!(x, y, "identity of indiscernibles on integer vectors");
            }
            let dxz = euclidean_distance(x.counts(), z.counts()).unwrap();
            let dzy = euclidean_distance(z.counts(), y.counts()).unwrap();
            assert!(dxy <= dxz + dzy + 1e-9, "triangle inequality violated");
        }
    }

    fn small_model(k: usize) -> KnnModel {
        let a = LabeledSample::new(fv(|_| 0), "A");
        let b = LabeledSample::new(fv(|_| 10), "B");
        KnnModel::from_samples(vec![a, b], k).unwrap()
    }

    #[test]
    fn classify_nearest_by_inspection() {
        let model = small_model(1);
        let q = fv(|i| if i == 0 { 1 } else { 0 });
        let (label, conf) = model.classify(&q).unwrap();
        assert_eq!(label, "A");
        assert_eq!(conf, 1.0);
    }

    #[test]
    fn classify_tie_breaks_by_alphabet() {
        // q exactly between one A and one B, k = 2
        let a = LabeledSample::new(fv(|i| if i == 0 { 0 } else { 5 }), "A");
        let b = LabeledSample::new(fv(|i| if i == 0 { 10 } else { 5 }), "B");
        let model = KnnModel::from_samples(vec![b, a], 2).unwrap();
        let q = fv(|i| if i == 0 { 5 } else { 5 });
        let (label, conf) = model.classify(&q).unwrap();
        assert_eq!(label, "A");
        assert_eq!(conf, 0.5, "(k - runner-up) / k with 1 vote each at k = 2");
    }

    #[test]
    fn classify_empty_model_errors() {
        let model = KnnModel::new(Vec::new(), vec!["A".into()], 1).unwrap();
        assert!(matches!(
            model.classify(&fv(|_| 0)),
            Err(ClassifierError::ModelEmpty)
        ));
    }

    #[test]
    fn classify_k_larger_than_samples_errors() {
        let model = small_model(3);
        assert!(matches!(
            model.classify(&fv(|_| 0)),
            Err(ClassifierError::InvalidK { k: 3, samples: 2 })
        ));
    }

    /// Exhaustive-scan oracle with the same tie rules, coded independently.
    fn oracle_classify(samples: &[LabeledSample], alphabet: &[String], k: usize, q: &FeatureVector) -> String {
        let mut rows: Vec<(f64, usize)> = samples
            .iter()
            .map(|s| {
                let mut acc = 0f64;
                for i in 0..FEATURE_COUNT {
                    let d = s.features.counts()[i] as f64 - q.counts()[i] as f64;
                    acc += d * d;
                }
                (
                    acc.sqrt(),
                    alphabet.iter().position(|l| l == &s.label).unwrap(),
                )
            })
            .collect();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let top = &rows[..k];
        let mut best: Option<(usize, usize, f64)> = None;
        for li in 0..alphabet.len() {
            let votes: Vec<&(f64, usize)> = top.iter().filter(|r| r.1 == li).collect();
            if votes.is_empty() {
                continue;
            }
            let mean = votes.iter().map(|r| r.0).sum::<f64>() / votes.len() as f64;
            let this = (li, votes.len(), mean);
            best = Some(match best {
                None => this,
                Some(cur) => {
                    if this.1 > cur.1 || (this.1 == cur.1 && this.2 < cur.2) {
                        this
                    } else {
                        cur
                    }
                }
            });
        }
        alphabet[best.unwrap().0].clone()
    }

    #[test]
    fn classify_matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let labels = ["A", "B", "C", "D"];
        let samples: Vec<LabeledSample> = (0..80)
            .map(|i| LabeledSample::new(random_fv(&mut rng, 25), labels[i % 4]))
            .collect();
        for k in [1usize, 3, 5] {
            let model = KnnModel::from_samples(samples.clone(), k).unwrap();
            for _ in 0..200 {
                let q = random_fv(&mut rng, 25);
                let (got, _) = model.classify(&q).unwrap();
                let expect = oracle_classify(model.samples(), model.alphabet(), k, &q);
                assert_eq!(got, expect, "k={k}");
            }
        }
    }

    #[test]
    fn classify_invariant_under_sample_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let labels = ["A", "B", "C"];
        let samples: Vec<LabeledSample> = (0..30)
            .map(|i| LabeledSample::new(random_fv(&mut rng, 8), labels[i % 3]))
            .collect();
        let queries: Vec<FeatureVector> = (0..50).map(|_| random_fv(&mut rng, 8)).collect();
        let base = KnnModel::from_samples(samples.clone(), 3).unwrap();
        let base_out: Vec<String> = queries
            .iter()
            .map(|q| base.classify(q).unwrap().0)
            .collect();
        for seed in 0..5u64 {
            let mut shuffled = samples.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let model = KnnModel::from_samples(shuffled, 3).unwrap();
            let out: Vec<String> = queries
                .iter()
                .map(|q| model.classify(q).unwrap().0)
                .collect();
            assert_eq!(out, base_out);
        }
    }

    #[test]
    fn adding_exact_duplicate_forces_label_at_k1() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let mut samples: Vec<LabeledSample> = (0..20)
            .map(|i| LabeledSample::new(random_fv(&mut rng, 30), if i % 2 == 0 { "A" } else { "B" }))
            .collect();
        let q = fv(|_| 1000); // far from every random sample
        samples.push(LabeledSample::new(q.clone(), "C"));
        let model = KnnModel::from_samples(samples, 1).unwrap();
        assert_eq!(model.classify(&q).unwrap().0, "C");
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let mut corpus = Vec::new();
        for label in ["A", "B", "C"] {
            for _ in 0..10 {
                corpus.push(LabeledSample::new(random_fv(&mut rng, 10), label));
            }
        }
        let (train, test) = split_train_test(&corpus, 0.7, 42).unwrap();
        for label in ["A", "B", "C"] {
            assert_eq!(train.iter().filter(|s| s.label == label).count(), 7);
            assert_eq!(test.iter().filter(|s| s.label == label).count(), 3);
        }
        let (train2, test2) = split_train_test(&corpus, 0.7, 42).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
        let (train3, _) = split_train_test(&corpus, 0.7, 43).unwrap();
        assert_ne!(train, train3, "different seed should shuffle differently");
    }

    #[test]
    fn split_rejects_bad_ratio_and_single_sample_class() {
        let x = LabeledSample::new(fv(|_| 0), "A");
        let y = LabeledSample::new(fv(|_| 1), "A");
        assert!(matches!(
            split_train_test(&[x.clone(), y.clone()], 1.0, 0),
            Err(ClassifierError::InvalidRatio(_))
        ));
        let z = LabeledSample::new(fv(|_| 2), "B");
        assert!(matches!(
            split_train_test(&[x, y, z], 0.7, 0),
            Err(ClassifierError::StratifyError { .. })
        ));
    }

    #[test]
    fn self_evaluation_is_perfect_at_k1() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let mut samples = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for i in 0..40 {
            let f = random_fv(&mut rng, 50);
            if seen.insert(f.counts().to_vec()) {
                samples.push(LabeledSample::new(f, ["A", "B", "C", "D"][i % 4]));
            }
        }
        let model = KnnModel::from_samples(samples.clone(), 1).unwrap();
        let report = evaluate(&model, &samples).unwrap();
        assert_eq!(report.correct, report.total);
        assert_eq!(report.accuracy(), 1.0);
    }

    #[test]
    fn evaluation_counts_match_recount_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let train: Vec<LabeledSample> = (0..30)
            .map(|i| LabeledSample::new(random_fv(&mut rng, 10), ["A", "B"][i % 2]))
            .collect();
        // adversarial test set: labels permuted
        let test: Vec<LabeledSample> = (0..40)
            .map(|i| LabeledSample::new(random_fv(&mut rng, 10), ["B", "A"][i % 2]))
            .collect();
        let model = KnnModel::from_samples(train, 3).unwrap();
        let report = evaluate(&model, &test).unwrap();

        let mut correct = 0;
        for s in &test {
            if model.classify(&s.features).unwrap().0 == s.label {
                correct += 1;
            }
        }
        assert_eq!(report.correct, correct);
        assert_eq!(report.total, test.len());
        let diag: usize = (0..report.alphabet.len()).map(|i| report.confusion[i][i]).sum();
        assert_eq!(diag, correct);
        let cells: usize = report.confusion.iter().flatten().sum();
        assert_eq!(cells, test.len());
    }

    #[test]
    fn model_round_trip_preserves_classification() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let samples: Vec<LabeledSample> = (0..60)
            .map(|i| LabeledSample::new(random_fv(&mut rng, 40), ["A", "B", "C"][i % 3]))
            .collect();
        let model = KnnModel::from_samples(samples, 3).unwrap();
        let bytes = encode_model(&model);
        let back = decode_model(bytes.as_bytes()).unwrap();
        assert_eq!(encode_model(&back), bytes, "round trip must be byte-exact");
        for _ in 0..100 {
            let q = random_fv(&mut rng, 40);
            assert_eq!(model.classify(&q).unwrap(), back.classify(&q).unwrap());
        }
    }

    #[test]
    fn truncated_model_file_errors() {
        let model = small_model(1);
        let bytes = encode_model(&model);
        let cut = &bytes.as_bytes()[..bytes.len() - 40];
        assert!(matches!(
            decode_model(cut),
            Err(ClassifierError::FormatError { .. })
        ));
    }

    #[test]
    fn empty_model_round_trips_then_reports_empty() {
        let model = KnnModel::new(Vec::new(), vec!["A".into(), "B".into()], 1).unwrap();
        let bytes = encode_model(&model);
        let back = decode_model(bytes.as_bytes()).unwrap();
        assert_eq!(back.alphabet(), model.alphabet());
        assert!(matches!(
            back.classify(&fv(|_| 0)),
            Err(ClassifierError::ModelEmpty)
        ));
    }
}
