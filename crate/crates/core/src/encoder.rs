//! Frozen token encoders.
//!
//! The controller model only ever reads encodings; nothing here is mutable
//! after construction.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

#[derive(Debug, thiserror::Error)]
pub enum EncoderError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("empty embedding file")]
    Empty,
    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("cannot represent an empty sentence")]
    EmptySentence,
}

/// Maps a token sequence to one row per token.
pub trait Encoder: Send + Sync {
    fn dim(&self) -> usize;

    /// Row `k` encodes `tokens[k]`.
    fn encode(&self, tokens: &[String]) -> Array2<f64>;
}

/// Static word vectors with a shared zero vector for unknown tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    index: HashMap<String, usize>,
    vectors: Array2<f64>,
    oov: Array1<f64>,
}

impl EmbeddingTable {
    /// Builds a table from `(token, vector)` pairs; later duplicates win.
    pub fn from_pairs<I>(dim: usize, pairs: I) -> Result<Self, EncoderError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut index = HashMap::new();
        let mut flat = Vec::new();
        for (line, (token, v)) in pairs.into_iter().enumerate() {
            if v.len() != dim {
                return Err(EncoderError::DimensionMismatch {
                    line: line + 1,
                    expected: dim,
                    found: v.len(),
                });
            }
            match index.get(&token) {
                Some(&row) => flat[row * dim..(row + 1) * dim].copy_from_slice(&v),
                None => {
                    index.insert(token, flat.len() / dim);
                    flat.extend_from_slice(&v);
                }
            }
        }
        let rows = index.len();
        let vectors = Array2::from_shape_vec((rows, dim), flat).expect("rows * dim values");
        Ok(Self { index, vectors, oov: Array1::zeros(dim) })
    }

    /// Parses the plain text vector format: a token followed by its
    /// whitespace-separated components, one token per line. The dimension
    /// is taken from the first line.
    pub fn parse(content: &str) -> Result<Self, EncoderError> {
        let mut dim = None;
        let mut pairs = Vec::new();
        for (i, line) in content.lines().enumerate() {
            let line_no = i + 1;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let values = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|e| EncoderError::Malformed {
                        line: line_no,
                        message: format!("{f:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let d = *dim.get_or_insert(values.len());
            if d == 0 {
                return Err(EncoderError::Malformed { line: line_no, message: "no vector values".into() });
            }
            if values.len() != d {
                return Err(EncoderError::DimensionMismatch { line: line_no, expected: d, found: values.len() });
            }
            pairs.push((token.to_string(), values));
        }
        let dim = dim.ok_or(EncoderError::Empty)?;
        Self::from_pairs(dim, pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EncoderError> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|source| EncoderError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&content)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// The vector for `token`, or the zero vector if it is unknown.
    pub fn lookup(&self, token: &str) -> ArrayView1<'_, f64> {
        match self.index.get(token) {
            Some(&row) => self.vectors.row(row),
            None => self.oov.view(),
        }
    }

    /// Same table with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            index: self.index.clone(),
            vectors: &self.vectors * factor,
            oov: &self.oov * factor,
        }
    }

    /// Tokens in row order, for serialization.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<(&String, &usize)> = self.index.iter().collect();
        rows.sort_by_key(|&(_, &r)| r);
        let mut out = String::new();
        for (token, &r) in rows {
            out.push_str(token);
            for v in self.vectors.row(r) {
                out.push(' ');
                out.push_str(&format!("{v:?}"));
            }
            out.push('\n');
        }
        out
    }
}

impl Encoder for EmbeddingTable {
    fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    fn encode(&self, tokens: &[String]) -> Array2<f64> {
        let mut out = Array2::zeros((tokens.len(), self.dim()));
        for (mut row, tok) in out.rows_mut().into_iter().zip(tokens) {
            row.assign(&self.lookup(tok));
        }
        out
    }
}

/// Mean of a sentence's token encodings.
pub fn sentence_repr(rows: ArrayView2<'_, f64>) -> Result<Array1<f64>, EncoderError> {
    rows.mean_axis(Axis(0)).ok_or(EncoderError::EmptySentence)
}

/// Cosine similarity, defined as 0 when either vector is zero.
pub fn cosine(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(&b) / (na * nb)).clamp(-1.0, 1.0)
}
