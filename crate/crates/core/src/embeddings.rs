//! Pretrained word-embedding model in the plain-text vector format:
//! a `<vocabSize> <dim>` header, then one `<token> <c1> ... <cdim>` line per token.
//! File order is frequency rank; multi-word tokens are glued with underscores.

use std::collections::HashMap;
use std::path::Path;

/// Number of most frequent tokens treated as too generic to map onto topics.
pub const DEFAULT_EXCLUDED_TOP: usize = 3000;

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("cannot read model: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: duplicate token '{token}'")]
    DuplicateToken { line: usize, token: String },
    #[error("query has dimension {got}, model has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("query vector is all zeros")]
    ZeroVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    // row-major, one row of `dim` per token
    vectors: Vec<f64>,
    norms: Vec<f64>,
    excluded_top: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub token: String,
    pub similarity: f64,
}

impl EmbeddingModel {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, EmbeddingError> {
        let format = |line: usize, message: String| EmbeddingError::Format { line, message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

        let (_, header) = lines.next().ok_or_else(|| format(1, "missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [vocab, dim] = fields[..] else {
            return Err(format(1, format!("header must be '<vocabSize> <dim>', got '{header}'")));
        };
        let vocab: usize = vocab
            .parse()
            .map_err(|_| format(1, format!("bad vocabulary size '{vocab}'")))?;
        let dim: usize = dim.parse().map_err(|_| format(1, format!("bad dimension '{dim}'")))?;
        if dim == 0 {
            return Err(format(1, "dimension must be positive".into()));
        }

        let mut rows = Vec::with_capacity(vocab);
        for (i, line) in lines {
            let lineno = i + 1;
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-blank line").to_string();
            let mut row = Vec::with_capacity(dim);
            for c in parts {
                let v: f64 = c
                    .parse()
                    .map_err(|_| format(lineno, format!("component '{c}' is not a number")))?;
                if !v.is_finite() {
                    return Err(format(lineno, format!("component '{c}' is not finite")));
                }
                row.push(v);
            }
            if row.len() != dim {
                return Err(format(lineno, format!("expected {dim} components, found {}", row.len())));
            }
            rows.push((lineno, token, row));
        }
        if rows.len() != vocab {
            return Err(format(1, format!("header declares {vocab} tokens, file has {}", rows.len())));
        }

        let mut model = EmbeddingModel {
            dim,
            tokens: Vec::with_capacity(vocab),
            index: HashMap::with_capacity(vocab),
            vectors: Vec::with_capacity(vocab * dim),
            norms: Vec::with_capacity(vocab),
            excluded_top: DEFAULT_EXCLUDED_TOP,
        };
        for (lineno, token, row) in rows {
            if model.index.contains_key(&token) {
                return Err(EmbeddingError::DuplicateToken { line: lineno, token });
            }
            model.push(token, row);
        }
        Ok(model)
    }

    /// Build a model in rank order from in-memory rows.
    pub fn from_rows(dim: usize, rows: impl IntoIterator<Item = (String, Vec<f64>)>) -> Result<Self, EmbeddingError> {
        let mut model = EmbeddingModel {
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
            excluded_top: DEFAULT_EXCLUDED_TOP,
        };
        for (i, (token, row)) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(EmbeddingError::Format {
                    line: i + 2,
                    message: format!("expected {dim} components, found {}", row.len()),
                });
            }
            if model.index.contains_key(&token) {
                return Err(EmbeddingError::DuplicateToken { line: i + 2, token });
            }
            model.push(token, row);
        }
        Ok(model)
    }

    fn push(&mut self, token: String, row: Vec<f64>) {
        self.norms.push(row.iter().map(|x| x * x).sum::<f64>().sqrt());
        self.vectors.extend_from_slice(&row);
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
    }

    /// Change how many top-ranked tokens are excluded (the default is 3,000).
    pub fn with_excluded_top(mut self, n: usize) -> Self {
        self.excluded_top = n;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens in rank order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn rank(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.rank(token).map(|i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn excluded_count(&self) -> usize {
        self.excluded_top.min(self.tokens.len())
    }

    pub fn excluded(&self) -> &[String] {
        &self.tokens[..self.excluded_count()]
    }

    pub fn is_excluded(&self, token: &str) -> bool {
        self.rank(token).is_some_and(|r| r < self.excluded_count())
    }

    /// Vector for an n-gram: the glued `a_b_c` token when known, else the mean of
    /// the known individual tokens.
    pub fn vector_of<S: AsRef<str>>(&self, tokens: &[S]) -> Option<Vec<f64>> {
        if tokens.is_empty() {
            return None;
        }
        let glued = tokens.iter().map(AsRef::as_ref).collect::<Vec<_>>().join("_");
        if let Some(v) = self.vector(&glued) {
            return Some(v.to_vec());
        }
        let mut sum = vec![0.0; self.dim];
        let mut found = 0usize;
        for t in tokens {
            if let Some(v) = self.vector(t.as_ref()) {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                found += 1;
            }
        }
        (found > 0).then(|| sum.into_iter().map(|s| s / found as f64).collect())
    }

    /// Exhaustive cosine scan: the `k` best tokens with similarity ≥ `min_sim`,
    /// by descending similarity then ascending token.
    pub fn most_similar(&self, query: &[f64], k: usize, min_sim: f64) -> Result<Vec<Neighbor>, EmbeddingError> {
        if query.len() != self.dim {
            return Err(EmbeddingError::Dimension { expected: self.dim, got: query.len() });
        }
        let qnorm = query.iter().map(|x| x * x).sum::<f64>().sqrt();
        if qnorm == 0.0 {
            return Err(EmbeddingError::ZeroVector);
        }
        let mut hits: Vec<(f64, usize)> = (0..self.tokens.len())
            .filter(|&i| self.norms[i] > 0.0)
            .map(|i| (cosine_with_norms(query, qnorm, self.row(i), self.norms[i]), i))
            .filter(|(sim, _)| *sim >= min_sim)
            .collect();
        hits.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| self.tokens[a.1].cmp(&self.tokens[b.1])));
        hits.truncate(k);
        Ok(hits
            .into_iter()
            .map(|(similarity, i)| Neighbor { token: self.tokens[i].clone(), similarity })
            .collect())
    }

    /// Serialize back to the plain-text vector format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.tokens.len(), self.dim);
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(t);
            for c in self.row(i) {
                out.push(' ');
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn cosine_with_norms(a: &[f64], anorm: f64, b: &[f64], bnorm: f64) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot / (anorm * bnorm)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    cosine_with_norms(a, na, b, nb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> EmbeddingModel {
        EmbeddingModel::parse("4 2\na 1 0\nb 0 1\nsemantic_web 0.6 0.8\nz 0 0\n").unwrap()
    }

    #[test]
    fn small_model_excludes_everything() {
        let m = EmbeddingModel::parse("3 2\nx 1 0\ny 0 1\nw 1 1\n").unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.len(), 3);
        assert_eq!(m.excluded(), &["x", "y", "w"]);
        assert!(m.is_excluded("w"));
    }

    #[test]
    fn short_line_names_line_number() {
        let err = EmbeddingModel::parse("2 2\nx 1 0\ny 1\n").unwrap_err();
        assert!(matches!(err, EmbeddingError::Format { line: 3, .. }), "{err}");
    }

    #[test]
    fn format_errors() {
        assert!(matches!(EmbeddingModel::parse("2\nx 1\n"), Err(EmbeddingError::Format { line: 1, .. })));
        assert!(matches!(EmbeddingModel::parse("1 1\nx abc\n"), Err(EmbeddingError::Format { line: 2, .. })));
        assert!(matches!(EmbeddingModel::parse("2 1\nx 1\n"), Err(EmbeddingError::Format { .. })));
        assert!(matches!(EmbeddingModel::parse("1 1\nx NaN\n"), Err(EmbeddingError::Format { .. })));
    }

    #[test]
    fn duplicate_token() {
        let err = EmbeddingModel::parse("2 1\nx 1\nx 2\n").unwrap_err();
        assert!(matches!(err, EmbeddingError::DuplicateToken { line: 3, ref token } if token == "x"));
    }

    #[test]
    fn exclusion_is_rank_prefix() {
        let mut text = String::from("4000 2\n");
        for i in 0..4000 {
            text.push_str(&format!("tok{i} {} 1\n", i as f64));
        }
        let m = EmbeddingModel::parse(&text).unwrap();
        assert_eq!(m.excluded_count(), 3000);
        let expected: Vec<String> = (0..3000).map(|i| format!("tok{i}")).collect();
        assert_eq!(m.excluded(), expected.as_slice());
        assert!(m.is_excluded("tok2999"));
        assert!(!m.is_excluded("tok3000"));
    }

    #[test]
    fn glued_token_wins() {
        let m = toy();
        assert_eq!(m.vector_of(&["semantic", "web"]), Some(vec![0.6, 0.8]));
    }

    #[test]
    fn unknown_token_is_absent() {
        assert_eq!(toy().vector_of(&["x"]), None);
    }

    #[test]
    fn falls_back_to_token_mean() {
        // (1,0) and (0,1) -> (0.5, 0.5); unknown "q" ignored
        assert_eq!(toy().vector_of(&["a", "b", "q"]), Some(vec![0.5, 0.5]));
    }

    #[test]
    fn self_similarity_and_zero_rows() {
        let m = toy();
        let hits = m.most_similar(&[0.6, 0.8], 1, 0.0).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].token, "semantic_web");
        assert!((hits[0].similarity - 1.0).abs() < 1e-12);
        let all = m.most_similar(&[1.0, 1.0], 10, -1.0).unwrap();
        assert!(all.iter().all(|n| n.token != "z"));
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn min_sim_filters_orthogonal() {
        let m = EmbeddingModel::parse("2 2\nx 1 0\ny 0 1\n").unwrap();
        assert!(m.most_similar(&[1.0, 1.0], 5, 0.99).unwrap().is_empty());
    }

    #[test]
    fn query_errors() {
        let m = toy();
        assert!(matches!(m.most_similar(&[1.0], 1, 0.0), Err(EmbeddingError::Dimension { .. })));
        assert!(matches!(m.most_similar(&[0.0, 0.0], 1, 0.0), Err(EmbeddingError::ZeroVector)));
    }

    #[test]
    fn ties_break_by_token() {
        let m = EmbeddingModel::parse("3 2\nc 1 0\na 2 0\nb 0 1\n").unwrap();
        let hits = m.most_similar(&[1.0, 0.0], 2, 0.0).unwrap();
        assert_eq!(hits.iter().map(|n| n.token.as_str()).collect::<Vec<_>>(), vec!["a", "c"]);
    }

    #[test]
    fn text_round_trip() {
        let m = toy();
        assert_eq!(EmbeddingModel::parse(&m.to_text()).unwrap(), m);
    }

    proptest! {
        #[test]
        fn self_cosine_is_one(v in proptest::collection::vec(-100.0f64..100.0, 1..16)) {
            prop_assume!(v.iter().any(|x| x.abs() > 1e-6));
            prop_assert!((cosine(&v, &v) - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn results_sorted_and_bounded(
            rows in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), 1..30),
            q in proptest::collection::vec(-1.0f64..1.0, 3),
            k in 1usize..10,
            min_sim in -1.0f64..1.0,
        ) {
            prop_assume!(q.iter().any(|x| x.abs() > 1e-6));
            let m = EmbeddingModel::from_rows(3, rows.into_iter().enumerate().map(|(i, r)| (format!("t{i}"), r))).unwrap();
            let hits = m.most_similar(&q, k, min_sim).unwrap();
            prop_assert!(hits.len() <= k);
            prop_assert!(hits.iter().all(|h| h.similarity >= min_sim));
            prop_assert!(hits.windows(2).all(|w| w[0].similarity >= w[1].similarity));
        }
    }
}
