//! Plain-text model container.
//!
//! ```text
//! acesum-mil
//! version 1
//! pooling mip
//! dim <d>
//! aspects <M>
//! heads <h>
//! tensor token.weight <M> <d>
//! <one line per row, values separated by single spaces>
//! tensor token.bias <M>
//! tensor sentence.<i>.weight <d> <d>     (i = 0..h)
//! tensor sentence.<i>.bias <d>
//! tensor sentence.<i>.query <d>
//! tensor document.<i>.weight <d> <d>
//! ...
//! end
//! ```
//!
//! Matrices are row-major; `token.weight[a][j]` multiplies component `j` of
//! a token encoding for aspect `a`, `<level>.<i>.weight[r][c]` produces key
//! component `r` from input component `c`. Values are printed as the
//! shortest decimal that parses back to the same `f64`, so writing and
//! reading are exact inverses.

use std::fmt::Write as _;

use super::{MilModel, Pooling};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "acesum-mil";

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("model file line {line}: {message}")]
pub struct ModelFormatError {
    pub line: usize,
    pub message: String,
}

fn tensor_names(heads: usize) -> Vec<String> {
    let mut names = vec!["token.weight".to_string(), "token.bias".to_string()];
    for level in ["sentence", "document"] {
        for h in 0..heads {
            for part in ["weight", "bias", "query"] {
                names.push(format!("{level}.{h}.{part}"));
            }
        }
    }
    names
}

fn shape_of(name: &str, dim: usize, aspects: usize) -> Vec<usize> {
    match name {
        "token.weight" => vec![aspects, dim],
        "token.bias" => vec![aspects],
        n if n.ends_with(".weight") => vec![dim, dim],
        _ => vec![dim],
    }
}

pub fn write_model(model: &MilModel) -> String {
    let (dim, aspects, heads) = (model.dim(), model.aspect_count(), model.head_count());
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "version {MODEL_FORMAT_VERSION}");
    let _ = writeln!(out, "pooling {}", model.pooling);
    let _ = writeln!(out, "dim {dim}");
    let _ = writeln!(out, "aspects {aspects}");
    let _ = writeln!(out, "heads {heads}");
    for (name, values) in tensor_names(heads).iter().zip(model.tensors()) {
        let shape = shape_of(name, dim, aspects);
        let dims: Vec<String> = shape.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "tensor {name} {}", dims.join(" "));
        let row_len = *shape.last().expect("non-empty shape");
        for row in values.chunks(row_len.max(1)) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, ModelFormatError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, message: impl Into<String>) -> ModelFormatError {
        ModelFormatError { line: self.line, message: message.into() }
    }

    fn field(&mut self, key: &str) -> Result<&'a str, ModelFormatError> {
        let l = self.next()?;
        l.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected `{key} ...`, found {l:?}")))
    }

    fn number(&mut self, key: &str) -> Result<usize, ModelFormatError> {
        let v = self.field(key)?;
        v.parse().map_err(|_| self.err(format!("bad {key} {v:?}")))
    }
}

pub fn read_model(text: &str) -> Result<MilModel, ModelFormatError> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    if lines.next()? != MAGIC {
        return Err(lines.err("not an acesum-mil model file"));
    }
    let version = lines.number("version")?;
    if version != MODEL_FORMAT_VERSION as usize {
        return Err(lines.err(format!("unsupported version {version}")));
    }
    let pooling: Pooling = lines.field("pooling")?.parse().map_err(|e: String| lines.err(e))?;
    let dim = lines.number("dim")?;
    let aspects = lines.number("aspects")?;
    let heads = lines.number("heads")?;
    if dim == 0 || aspects == 0 || heads == 0 {
        return Err(lines.err("dim, aspects and heads must be positive"));
    }
    if pooling == Pooling::Attention && heads != 1 {
        return Err(lines.err("attention pooling has exactly one head"));
    }
    let mut model = MilModel::zeros(dim, aspects, heads, pooling);
    let names = tensor_names(heads);
    for (name, values) in names.iter().zip(model.tensors_mut()) {
        let shape = shape_of(name, dim, aspects);
        let header = lines.field("tensor")?;
        let expected: Vec<String> =
            std::iter::once(name.clone()).chain(shape.iter().map(ToString::to_string)).collect();
        if header != expected.join(" ") {
            return Err(lines.err(format!("expected tensor header {:?}, found {header:?}", expected.join(" "))));
        }
        let row_len = *shape.last().expect("non-empty shape");
        for row in values.chunks_mut(row_len) {
            let l = lines.next()?;
            let parsed: Vec<f64> = l
                .split(' ')
                .map(|v| v.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| lines.err(format!("{name}: {e}")))?;
            if parsed.len() != row_len {
                return Err(lines.err(format!("{name}: expected {row_len} values, found {}", parsed.len())));
            }
            if parsed.iter().any(|v| !v.is_finite()) {
                return Err(lines.err(format!("{name}: non-finite value")));
            }
            row.copy_from_slice(&parsed);
        }
    }
    if lines.next()? != "end" {
        return Err(lines.err("expected `end`"));
    }
    Ok(model)
}
