use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::token::{contains_url, is_hashtag, tokenize};
use crate::error::{Error, Result};

pub const DEFAULT_LANG: &str = "und";

/// One social-media message.
///
/// Text-derived fields (`tokens`, `hashtags`, `has_url`) are computed once at
/// construction and cannot drift from `text`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub id: String,
    pub user_id: String,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: u64,
    pub lang: String,
    pub is_retweet: bool,
    text: String,
    tokens: Vec<String>,
    hashtags: Vec<String>,
    has_url: bool,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    user_id: &'a str,
    timestamp: u64,
    text: &'a str,
    lang: &'a str,
    is_retweet: bool,
}

impl Post {
    /// # Panics
    ///
    /// If `id` or `user_id` is empty.
    pub fn new(
        id: impl Into<String>,
        user_id: impl Into<String>,
        timestamp: u64,
        text: impl Into<String>,
    ) -> Self {
        let id = id.into();
        let user_id = user_id.into();
        assert!(!id.is_empty(), "post id must be nonempty");
        assert!(!user_id.is_empty(), "post user_id must be nonempty");
        let text = text.into();
        let tokens = tokenize(&text);
        let hashtags = tokens.iter().filter(|t| is_hashtag(t)).cloned().collect();
        Post {
            id,
            user_id,
            timestamp,
            lang: DEFAULT_LANG.to_string(),
            is_retweet: false,
            has_url: contains_url(&text),
            text,
            tokens,
            hashtags,
        }
    }

    pub fn with_lang(mut self, lang: &str) -> Self {
        self.lang = lang.to_lowercase();
        self
    }

    pub fn retweet(mut self, is_retweet: bool) -> Self {
        self.is_retweet = is_retweet;
        self
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn hashtags(&self) -> &[String] {
        &self.hashtags
    }

    pub fn has_url(&self) -> bool {
        self.has_url
    }

    pub fn has_token(&self, term: &str) -> bool {
        self.tokens.iter().any(|t| t == term)
    }

    /// Serializes to a single line (no trailing newline) in the post input
    /// schema. Derived fields are not written; they are recomputed on read.
    pub fn to_record_line(&self) -> String {
        serde_json::to_string(&RecordOut {
            id: &self.id,
            user_id: &self.user_id,
            timestamp: self.timestamp,
            text: &self.text,
            lang: &self.lang,
            is_retweet: self.is_retweet,
        })
        .expect("post record serialization cannot fail")
    }

    /// Parses one record line. `line` is the 1-based line number used in
    /// error reports.
    pub fn from_record_line(record: &str, line: usize) -> Result<Post> {
        let malformed = |reason: String| Error::MalformedRecord { line, reason };
        let value: Value = serde_json::from_str(record).map_err(|e| malformed(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(malformed("record is not a key/value object".into()));
        };

        let id = identifier(&map, "id", line)?;
        let user_id = identifier(&map, "user_id", line)?;
        let timestamp = match map.get("timestamp") {
            None | Some(Value::Null) => {
                return Err(Error::MissingField {
                    line,
                    field: "timestamp",
                })
            }
            Some(v) => v
                .as_u64()
                .ok_or_else(|| malformed(format!("timestamp {v} is not a nonnegative integer")))?,
        };
        let text = match map.get("text") {
            None | Some(Value::Null) => return Err(Error::MissingField { line, field: "text" }),
            Some(Value::String(s)) => s.clone(),
            Some(v) => return Err(malformed(format!("text {v} is not a string"))),
        };
        let lang = match map.get("lang") {
            None | Some(Value::Null) => DEFAULT_LANG.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => return Err(malformed(format!("lang {v} is not a string"))),
        };
        let is_retweet = match map.get("is_retweet") {
            None | Some(Value::Null) => false,
            Some(Value::Bool(b)) => *b,
            Some(v) => return Err(malformed(format!("is_retweet {v} is not a boolean"))),
        };

        Ok(Post::new(id, user_id, timestamp, text)
            .with_lang(&lang)
            .retweet(is_retweet))
    }
}

fn identifier(map: &Map<String, Value>, field: &'static str, line: usize) -> Result<String> {
    let s = match map.get(field) {
        None | Some(Value::Null) => return Err(Error::MissingField { line, field }),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) if n.is_u64() => n.to_string(),
        Some(v) => {
            return Err(Error::MalformedRecord {
                line,
                reason: format!("{field} {v} is not a string or unsigned integer"),
            })
        }
    };
    if s.is_empty() {
        return Err(Error::MalformedRecord {
            line,
            reason: format!("{field} is empty"),
        });
    }
    Ok(s)
}

/// Reads line-delimited post records. Blank lines are skipped but still
/// counted for error line numbers.
pub fn read_posts<R: BufRead>(reader: R) -> Result<Vec<Post>> {
    let mut posts = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        posts.push(Post::from_record_line(&line, idx + 1)?);
    }
    Ok(posts)
}

pub fn ingest(path: impl AsRef<Path>) -> Result<Vec<Post>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_posts(BufReader::new(file))
}

pub fn write_posts<'a, W, I>(mut writer: W, posts: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Post>,
{
    for post in posts {
        writeln!(writer, "{}", post.to_record_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<Vec<Post>> {
        read_posts(s.as_bytes())
    }

    #[test]
    fn derives_url_flag() {
        let posts =
            parse(r#"{"id":"1","user_id":"u","timestamp":10,"text":"visit http://x.co"}"#).unwrap();
        assert!(posts[0].has_url());
        assert_eq!(posts[0].lang, "und");
        assert!(!posts[0].is_retweet);
    }

    #[test]
    fn derives_hashtags() {
        let posts =
            parse(r##"{"id":"1","user_id":"u","timestamp":10,"text":"#Pink run"}"##).unwrap();
        assert_eq!(posts[0].hashtags(), ["#pink"]);
    }

    #[test]
    fn missing_text_reports_line() {
        let input = concat!(
            r#"{"id":"1","user_id":"u","timestamp":10,"text":"ok"}"#,
            "\n\n",
            r#"{"id":"2","user_id":"u","timestamp":10}"#,
            "\n"
        );
        match parse(input) {
            Err(Error::MissingField { line: 3, field: "text" }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse("not json"), Err(Error::MalformedRecord { line: 1, .. })));
        assert!(matches!(parse("[1,2]"), Err(Error::MalformedRecord { line: 1, .. })));
        assert!(matches!(
            parse(r#"{"id":"1","user_id":"u","timestamp":-5,"text":"x"}"#),
            Err(Error::MalformedRecord { .. })
        ));
        assert!(matches!(
            parse(r#"{"id":"","user_id":"u","timestamp":5,"text":"x"}"#),
            Err(Error::MalformedRecord { .. })
        ));
        assert!(matches!(
            parse(r#"{"user_id":"u","timestamp":5,"text":"x"}"#),
            Err(Error::MissingField { field: "id", .. })
        ));
    }

    #[test]
    fn numeric_ids_and_optional_fields() {
        let posts = parse(
            r#"{"id":123,"user_id":456,"timestamp":1,"text":"hi","lang":"EN","is_retweet":true}"#,
        )
        .unwrap();
        assert_eq!(posts[0].id, "123");
        assert_eq!(posts[0].user_id, "456");
        assert_eq!(posts[0].lang, "en");
        assert!(posts[0].is_retweet);
    }

    fn arb_post() -> impl Strategy<Value = Post> {
        (
            "[a-z0-9]{1,8}",
            "[a-z0-9]{1,8}",
            0u64..4_000_000_000,
            "\\PC{0,40}",
            "[a-z]{2,3}",
            any::<bool>(),
        )
            .prop_map(|(id, user, ts, text, lang, rt)| {
                Post::new(id, user, ts, text).with_lang(&lang).retweet(rt)
            })
    }

    proptest! {
        #[test]
        fn record_round_trip(posts in proptest::collection::vec(arb_post(), 0..8)) {
            let mut buf = Vec::new();
            write_posts(&mut buf, &posts).unwrap();
            let back = read_posts(buf.as_slice()).unwrap();
            prop_assert_eq!(back, posts);
        }
    }
}
