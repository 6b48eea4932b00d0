use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

pub const MIN_SCORE: f64 = 1.0;
pub const MAX_SCORE: f64 = 9.0;

/// Which columns of a lexicon file hold the word and its score (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexiconFormat {
    pub word_col: usize,
    pub score_col: usize,
}

impl LexiconFormat {
    /// Two-column `word<TAB>score` files.
    pub const PAIRS: LexiconFormat = LexiconFormat {
        word_col: 0,
        score_col: 1,
    };
    /// The LabMT release layout: word, rank, average happiness, ...
    pub const LABMT: LexiconFormat = LexiconFormat {
        word_col: 0,
        score_col: 2,
    };
}

impl Default for LexiconFormat {
    fn default() -> Self {
        LexiconFormat::PAIRS
    }
}

/// Word → happiness score on the 1–9 scale.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    name: String,
    entries: HashMap<String, f64>,
}

impl Lexicon {
    pub fn from_entries<I, S>(name: impl Into<String>, entries: I) -> Result<Lexicon>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut lexicon = Lexicon {
            name: name.into(),
            entries: HashMap::new(),
        };
        for (idx, (word, score)) in entries.into_iter().enumerate() {
            lexicon.insert(word.into(), score, idx + 1)?;
        }
        Ok(lexicon)
    }

    fn insert(&mut self, word: String, score: f64, line: usize) -> Result<()> {
        if !(MIN_SCORE..=MAX_SCORE).contains(&score) {
            return Err(Error::ScoreOutOfRange { line, word, score });
        }
        match self.entries.entry(word) {
            Entry::Occupied(e) => Err(Error::DuplicateWord {
                line,
                word: e.key().clone(),
            }),
            Entry::Vacant(e) => {
                e.insert(score);
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.entries.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(w, s)| (w.as_str(), *s))
    }
}

/// Parses a tab-separated lexicon. A first line whose score column is not
/// numeric is taken as a header. Lines without a tab are split on
/// whitespace instead.
pub fn parse_lexicon<R: BufRead>(
    reader: R,
    name: impl Into<String>,
    format: LexiconFormat,
) -> Result<Lexicon> {
    let mut lexicon = Lexicon {
        name: name.into(),
        entries: HashMap::new(),
    };
    let needed = format.word_col.max(format.score_col) + 1;
    let mut seen_first = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        let first = !seen_first;
        seen_first = true;
        if cols.len() < needed {
            return Err(Error::MalformedRow {
                line: line_no,
                reason: format!("expected at least {needed} columns, found {}", cols.len()),
            });
        }
        let word = cols[format.word_col];
        let raw_score = cols[format.score_col];
        let score = match raw_score.parse::<f64>() {
            Ok(s) if s.is_finite() => s,
            _ if first => continue, // header
            _ => {
                return Err(Error::MalformedRow {
                    line: line_no,
                    reason: format!("score {raw_score:?} is not a number"),
                })
            }
        };
        if word.is_empty() {
            return Err(Error::MalformedRow {
                line: line_no,
                reason: "empty word".into(),
            });
        }
        lexicon.insert(word.to_string(), score, line_no)?;
    }
    Ok(lexicon)
}

pub fn load_lexicon(path: impl AsRef<Path>, format: LexiconFormat) -> Result<Lexicon> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_lexicon(BufReader::new(file), name, format)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Lexicon> {
        parse_lexicon(s.as_bytes(), "test", LexiconFormat::PAIRS)
    }

    #[test]
    fn reads_tab_separated_rows() {
        let lex = parse("laughter\t8.50\nlove\t8.42\n").unwrap();
        assert_eq!(lex.get("laughter"), Some(8.50));
        assert_eq!(lex.get("love"), Some(8.42));
        assert_eq!(lex.len(), 2);
    }

    #[test]
    fn empty_file_is_valid() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn header_is_detected() {
        let lex = parse("word\thappiness\nlove\t8.42\n").unwrap();
        assert_eq!(lex.len(), 1);
    }

    #[test]
    fn non_numeric_score_after_first_line() {
        assert!(matches!(
            parse("love\t8.42\nhate\tbad\n"),
            Err(Error::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_word() {
        assert!(matches!(
            parse("love 8.42\nlove 8.42\n"),
            Err(Error::DuplicateWord { line: 2, .. })
        ));
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            parse("love\t9.5\n"),
            Err(Error::ScoreOutOfRange { line: 1, .. })
        ));
        assert!(matches!(
            parse("x\t0.99\n"),
            Err(Error::ScoreOutOfRange { .. })
        ));
    }

    #[test]
    fn short_row() {
        assert!(matches!(parse("lonely\n"), Err(Error::MalformedRow { line: 1, .. })));
    }

    #[test]
    fn labmt_layout() {
        let text = "word\thappiness_rank\thappiness_average\thappiness_standard_deviation\n\
                    laughter\t1\t8.5000\t0.9313\n\
                    hate\t9975\t2.3400\t1.4007\n";
        let lex = parse_lexicon(text.as_bytes(), "labmt", LexiconFormat::LABMT).unwrap();
        assert_eq!(lex.get("laughter"), Some(8.5));
        assert_eq!(lex.get("hate"), Some(2.34));
    }
}
