//! Post records, lexicons, tokenization and word counts.

mod lexicon;
mod post;
mod token;

use std::collections::BTreeMap;

pub use lexicon::{load_lexicon, parse_lexicon, Lexicon, LexiconFormat, MAX_SCORE, MIN_SCORE};
pub use post::{ingest, read_posts, write_posts, Post, DEFAULT_LANG};
pub use token::{contains_url, hashtags, is_hashtag, tokenize};

/// Word → occurrence count. Stored keys always have a count of at least one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreqDist {
    counts: BTreeMap<String, u64>,
}

impl FreqDist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut dist = FreqDist::new();
        for t in tokens {
            dist.add(t.as_ref(), 1);
        }
        dist
    }

    pub fn add(&mut self, word: &str, count: u64) {
        if count == 0 {
            return;
        }
        match self.counts.get_mut(word) {
            Some(c) => *c += count,
            None => {
                self.counts.insert(word.to_string(), count);
            }
        }
    }

    pub fn merge(&mut self, other: &FreqDist) {
        for (w, &c) in &other.counts {
            self.add(w, c);
        }
    }

    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    /// Entries in ascending word order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for FreqDist {
    fn from_iter<T: IntoIterator<Item = (S, u64)>>(iter: T) -> Self {
        let mut dist = FreqDist::new();
        for (w, c) in iter {
            dist.add(w.as_ref(), c);
        }
        dist
    }
}

/// Token counts summed over every post.
pub fn freq_dist<'a, I>(posts: I) -> FreqDist
where
    I: IntoIterator<Item = &'a Post>,
{
    let mut dist = FreqDist::new();
    for post in posts {
        for t in post.tokens() {
            dist.add(t, 1);
        }
    }
    dist
}
