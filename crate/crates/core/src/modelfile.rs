//! Versioned flat text container for trained models.
//!
//! ```text
//! hedonic-model<TAB>1
//! kind<TAB>logistic
//! meta<TAB>l2_lambda<TAB>0.001
//! vocab<TAB>3
//! cancer
//! survivor
//! ...
//! block<TAB>weights<TAB>3
//! 0.25 -1.5 0
//! end
//! ```
//!
//! Block shapes are `x`-separated dimensions; each data line holds one run of
//! the last dimension. Floats are written in shortest round-trip form, so a
//! save/load cycle restores every parameter bit for bit.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAGIC: &str = "hedonic-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Block {
    pub fn new(name: &str, shape: Vec<usize>, data: Vec<f64>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "block {name} shape does not match its data"
        );
        Block {
            name: name.to_string(),
            shape,
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelFile {
    pub kind: String,
    pub meta: Vec<(String, String)>,
    pub vocab: Vec<String>,
    pub blocks: Vec<Block>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

impl ModelFile {
    pub fn new(kind: &str) -> Self {
        ModelFile {
            kind: kind.to_string(),
            ..Default::default()
        }
    }

    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Result<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| bad(format!("missing meta key {key:?}")))
    }

    pub fn meta_parse<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.meta(key)?;
        raw.parse()
            .map_err(|_| bad(format!("meta key {key:?} has unparseable value {raw:?}")))
    }

    pub fn block(&self, name: &str) -> Result<&Block> {
        self.blocks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| bad(format!("missing block {name:?}")))
    }

    /// The named block, checked against the expected shape.
    pub fn block_data(&self, name: &str, shape: &[usize]) -> Result<Vec<f64>> {
        let b = self.block(name)?;
        if b.shape != shape {
            return Err(bad(format!(
                "block {name:?} has shape {:?}, expected {shape:?}",
                b.shape
            )));
        }
        Ok(b.data.clone())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{MAGIC}\t{FORMAT_VERSION}\n"));
        out.push_str(&format!("kind\t{}\n", self.kind));
        for (k, v) in &self.meta {
            out.push_str(&format!("meta\t{k}\t{v}\n"));
        }
        out.push_str(&format!("vocab\t{}\n", self.vocab.len()));
        for w in &self.vocab {
            out.push_str(w);
            out.push('\n');
        }
        for b in &self.blocks {
            let dims: Vec<String> = b.shape.iter().map(|d| d.to_string()).collect();
            out.push_str(&format!("block\t{}\t{}\n", b.name, dims.join("x")));
            let run = b.shape.last().copied().unwrap_or(1).max(1);
            for chunk in b.data.chunks(run) {
                let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<ModelFile> {
        let mut lines = text.lines();
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(format!("truncated before {what}")));

        let header = next("header")?;
        let version = header
            .strip_prefix(MAGIC)
            .and_then(|rest| rest.strip_prefix('\t'))
            .ok_or_else(|| bad("not a hedonic model file"))?;
        if version != FORMAT_VERSION.to_string() {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let kind = next("kind")?
            .strip_prefix("kind\t")
            .ok_or_else(|| bad("expected kind line"))?
            .to_string();
        let mut model = ModelFile::new(&kind);

        let mut line = next("vocab")?;
        while let Some(rest) = line.strip_prefix("meta\t") {
            let (k, v) = rest
                .split_once('\t')
                .ok_or_else(|| bad(format!("bad meta line {line:?}")))?;
            model.push_meta(k, v);
            line = next("vocab")?;
        }
        let n_vocab: usize = line
            .strip_prefix("vocab\t")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| bad(format!("expected vocab line, found {line:?}")))?;
        for _ in 0..n_vocab {
            model.vocab.push(next("vocabulary entry")?.to_string());
        }

        loop {
            let line = next("end")?;
            if line == "end" {
                break;
            }
            let rest = line
                .strip_prefix("block\t")
                .ok_or_else(|| bad(format!("expected block, found {line:?}")))?;
            let (name, dims) = rest
                .split_once('\t')
                .ok_or_else(|| bad(format!("bad block header {line:?}")))?;
            let shape: Vec<usize> = dims
                .split('x')
                .map(|d| d.parse().map_err(|_| bad(format!("bad dimension {d:?}"))))
                .collect::<Result<_>>()?;
            let len: usize = shape.iter().product();
            let run = shape.last().copied().unwrap_or(1).max(1);
            let mut data = Vec::with_capacity(len);
            while data.len() < len {
                let row = next("block data")?;
                let before = data.len();
                for tok in row.split(' ').filter(|t| !t.is_empty()) {
                    let v: f64 = tok.parse().map_err(|_| bad(format!("bad number {tok:?}")))?;
                    data.push(v);
                }
                if data.len() - before != run {
                    return Err(bad(format!("block {name:?} row has wrong length")));
                }
            }
            model.blocks.push(Block::new(name, shape, data));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelFile> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ModelFile::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_foreign_files() {
        assert!(ModelFile::parse("hello\n").is_err());
        assert!(ModelFile::parse("hedonic-model\t9\nkind\tx\nvocab\t0\nend\n").is_err());
        assert!(ModelFile::parse("hedonic-model\t1\nkind\tx\nvocab\t2\na\n").is_err());
    }

    #[test]
    fn shape_mismatch_detected() {
        let mut m = ModelFile::new("x");
        m.blocks.push(Block::new("w", vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]));
        let back = ModelFile::parse(&m.render()).unwrap();
        assert!(back.block_data("w", &[4]).is_err());
        assert_eq!(back.block_data("w", &[2, 2]).unwrap(), [1.0, 2.0, 3.0, 4.0]);
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            values in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..40),
            words in proptest::collection::vec("[a-z#']{1,6}", 0..5),
        ) {
            let mut m = ModelFile::new("logistic");
            m.push_meta("seed", 42);
            m.push_meta("note", "a b c");
            m.vocab = words;
            let n = values.len();
            m.blocks.push(Block::new("v", vec![n], values.clone()));
            m.blocks.push(Block::new("m", vec![n, 1], values));
            let back = ModelFile::parse(&m.render()).unwrap();
            for (a, b) in back.blocks[0].data.iter().zip(&m.blocks[0].data) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back, m);
        }
    }
}
