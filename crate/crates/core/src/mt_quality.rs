//! Translation quality: corpus BLEU and mean cosine similarity of
//! externally computed sentence embeddings.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("hypothesis corpus is empty")]
    EmptyCorpus,
    #[error("{hyp} hypothesis lines but {refs} reference lines")]
    LengthMismatch { hyp: usize, refs: usize },
    #[error("line {line}: dimension {found} differs from {expected}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse `{value}` as a number")]
    BadFloat { line: usize, value: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

const DETACHED: &[char] = &['.', ',', '!', '?', ';', ':', '"', '(', ')'];

/// Lowercases, puts `.,!?;:"()` into their own tokens and splits on
/// whitespace.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(sentence.len() + 8);
    for c in sentence.to_lowercase().chars() {
        if DETACHED.contains(&c) {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        } else {
            spaced.push(c);
        }
    }
    spaced.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub hypothesis: Vec<String>,
    pub reference: Vec<String>,
}

impl SentencePair {
    /// Tokenizes both sides with [`tokenize`].
    pub fn from_text(hypothesis: &str, reference: &str) -> Self {
        Self {
            hypothesis: tokenize(hypothesis),
            reference: tokenize(reference),
        }
    }
}

/// Pairs line `i` of the hypothesis text with line `i` of the reference.
pub fn pair_lines(hyp: &str, refs: &str) -> Result<Vec<SentencePair>, QualityError> {
    let h: Vec<&str> = hyp.lines().collect();
    let r: Vec<&str> = refs.lines().collect();
    if h.len() != r.len() {
        return Err(QualityError::LengthMismatch {
            hyp: h.len(),
            refs: r.len(),
        });
    }
    Ok(h.into_iter()
        .zip(r)
        .map(|(a, b)| SentencePair::from_text(a, b))
        .collect())
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_default() += 1;
        }
    }
    m
}

/// Corpus-level statistics behind a BLEU score.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuStats {
    /// Clipped matches per order, then total hypothesis n-grams per order.
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn collect(pairs: &[SentencePair], max_n: usize) -> Self {
        let mut matches = vec![0; max_n];
        let mut totals = vec![0; max_n];
        let (mut hyp_len, mut ref_len) = (0, 0);
        for p in pairs {
            hyp_len += p.hypothesis.len();
            ref_len += p.reference.len();
            for n in 1..=max_n {
                let h = ngram_counts(&p.hypothesis, n);
                let r = ngram_counts(&p.reference, n);
                for (gram, c) in &h {
                    matches[n - 1] += (*c).min(r.get(gram).copied().unwrap_or(0));
                    totals[n - 1] += c;
                }
            }
        }
        Self {
            matches,
            totals,
            hyp_len,
            ref_len,
        }
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.hyp_len > self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        }
    }

    /// Geometric mean of the defined precisions times the brevity
    /// penalty. Orders with no hypothesis n-grams anywhere in the corpus
    /// are left out; any other zero precision gives 0.
    pub fn score(&self) -> f64 {
        let orders: Vec<(usize, usize)> = self
            .matches
            .iter()
            .zip(&self.totals)
            .filter(|(_, t)| **t > 0)
            .map(|(m, t)| (*m, *t))
            .collect();
        if orders.is_empty() || orders.iter().any(|(m, _)| *m == 0) {
            return 0.0;
        }
        let w = 1.0 / orders.len() as f64;
        let log_sum: f64 = orders
            .iter()
            .map(|(m, t)| w * (*m as f64 / *t as f64).ln())
            .sum();
        self.brevity_penalty() * log_sum.exp()
    }
}

/// Corpus BLEU without smoothing, single reference per hypothesis.
pub fn corpus_bleu(pairs: &[SentencePair], max_n: usize) -> Result<f64, QualityError> {
    let stats = BleuStats::collect(pairs, max_n);
    if pairs.is_empty() || stats.hyp_len == 0 {
        return Err(QualityError::EmptyCorpus);
    }
    Ok(stats.score())
}

/// One vector per corpus line.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbeddings {
    pub vectors: Vec<Vec<f64>>,
}

impl SentenceEmbeddings {
    pub fn parse(text: &str) -> Result<Self, QualityError> {
        let mut vectors: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let v = line
                .split_whitespace()
                .map(|x| {
                    x.parse::<f64>().map_err(|_| QualityError::BadFloat {
                        line: i + 1,
                        value: x.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(first) = vectors.first() {
                if first.len() != v.len() {
                    return Err(QualityError::DimensionMismatch {
                        line: i + 1,
                        expected: first.len(),
                        found: v.len(),
                    });
                }
            }
            vectors.push(v);
        }
        Ok(Self { vectors })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, QualityError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| QualityError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineReport {
    pub mean: f64,
    /// Population standard deviation.
    pub stdev: f64,
    pub count: usize,
}

/// Mean and population standard deviation of line-wise cosine
/// similarities. Zero vectors have similarity 0.
pub fn embedding_cosine_report(
    hyp: &SentenceEmbeddings,
    refs: &SentenceEmbeddings,
) -> Result<CosineReport, QualityError> {
    if hyp.len() != refs.len() {
        return Err(QualityError::LengthMismatch {
            hyp: hyp.len(),
            refs: refs.len(),
        });
    }
    if hyp.is_empty() {
        return Err(QualityError::EmptyCorpus);
    }
    if hyp.dimension() != refs.dimension() {
        return Err(QualityError::DimensionMismatch {
            line: 1,
            expected: hyp.dimension(),
            found: refs.dimension(),
        });
    }
    let cosines: Vec<f64> = hyp
        .vectors
        .iter()
        .zip(&refs.vectors)
        .map(|(a, b)| crate::s2match::cosine(a, b))
        .collect();
    let n = cosines.len() as f64;
    let mean = cosines.iter().sum::<f64>() / n;
    let var = cosines.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
    Ok(CosineReport {
        mean,
        stdev: var.sqrt(),
        count: cosines.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer() {
        assert_eq!(
            tokenize("Hello, World! (\"x\")"),
            ["hello", ",", "world", "!", "(", "\"", "x", "\"", ")"]
        );
    }

    #[test]
    fn identity_is_one() {
        let pairs = vec![
            SentencePair::from_text("the cat sat on the mat", "the cat sat on the mat"),
            SentencePair::from_text("a b", "a b"),
        ];
        assert_eq!(corpus_bleu(&pairs, 4).unwrap(), 1.0);
    }

    #[test]
    fn clipping_gives_zero() {
        let pairs = vec![SentencePair::from_text("the the the the", "the cat")];
        let stats = BleuStats::collect(&pairs, 4);
        assert_eq!(stats.matches[0], 1);
        assert_eq!(stats.totals[0], 4);
        assert_eq!(corpus_bleu(&pairs, 4).unwrap(), 0.0);
    }

    #[test]
    fn short_hypothesis_truncates_orders() {
        let pairs = vec![SentencePair::from_text("the cat sat", "the cat sat down")];
        let b = corpus_bleu(&pairs, 4).unwrap();
        let expected = (1.0f64 - 4.0 / 3.0).exp();
        assert!((b - expected).abs() < 1e-15);
    }

    #[test]
    fn empty_corpus() {
        assert!(matches!(corpus_bleu(&[], 4), Err(QualityError::EmptyCorpus)));
        let pairs = vec![SentencePair::from_text("", "a")];
        assert!(matches!(corpus_bleu(&pairs, 4), Err(QualityError::EmptyCorpus)));
    }

    #[test]
    fn cosine_reports() {
        let a = SentenceEmbeddings::parse("1 0\n0 1\n").unwrap();
        let r = embedding_cosine_report(&a, &a).unwrap();
        assert_eq!((r.mean, r.stdev), (1.0, 0.0));
        let b = SentenceEmbeddings::parse("0 1\n1 0\n").unwrap();
        assert_eq!(embedding_cosine_report(&a, &b).unwrap().mean, 0.0);
        let c = SentenceEmbeddings::parse("1 0\n1.7320508075688772 1\n").unwrap();
        let r = embedding_cosine_report(&a, &c).unwrap();
        assert!((r.mean - 0.75).abs() < 1e-12);
        assert!((r.stdev - 0.25).abs() < 1e-12);
    }

    #[test]
    fn cosine_errors() {
        let a = SentenceEmbeddings::parse("1 0\n").unwrap();
        let b = SentenceEmbeddings::parse("1 0\n1 0\n").unwrap();
        assert!(matches!(
            embedding_cosine_report(&a, &b),
            Err(QualityError::LengthMismatch { .. })
        ));
        let c = SentenceEmbeddings::parse("1 0 0\n").unwrap();
        assert!(matches!(
            embedding_cosine_report(&a, &c),
            Err(QualityError::DimensionMismatch { .. })
        ));
        assert!(SentenceEmbeddings::parse("1 0\n1\n").is_err());
        assert!(SentenceEmbeddings::parse("1 x\n").is_err());
    }
}
