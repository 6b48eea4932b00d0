//! Lexicon-weighted average happiness, with a neutral-word lens, over word
//! counts, time bins and hashtag groups.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, Utc};

use crate::corpus::{is_hashtag, FreqDist, Lexicon, Post};
use crate::error::{Error, Result};

/// The band of neutral scores excluded before averaging, inclusive at both
/// ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lens {
    pub center: f64,
    pub delta: f64,
}

impl Default for Lens {
    fn default() -> Self {
        Lens {
            center: 5.0,
            delta: 1.0,
        }
    }
}

impl Lens {
    /// A lens that excludes nothing.
    pub const NONE: Lens = Lens {
        center: 5.0,
        delta: -1.0,
    };

    pub fn new(center: f64, delta: f64) -> Self {
        Lens { center, delta }
    }

    pub fn excludes(&self, score: f64) -> bool {
        self.center - self.delta <= score && score <= self.center + self.delta
    }

    /// Lexicon score of `word` if it is scored and survives the lens.
    pub fn admit(&self, lexicon: &Lexicon, word: &str) -> Option<f64> {
        lexicon.get(word).filter(|&h| !self.excludes(h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HappinessScore {
    pub value: f64,
    /// Total count of words that were scored.
    pub matched_tokens: u64,
    pub distinct_words: usize,
}

/// Frequency-weighted mean lexicon score of the words in `dist` that are in
/// the lexicon and outside the lens band.
pub fn score(dist: &FreqDist, lexicon: &Lexicon, lens: Lens) -> Result<HappinessScore> {
    let mut weighted = 0.0;
    let mut matched = 0u64;
    let mut distinct = 0usize;
    for (word, count) in dist.iter() {
        if let Some(h) = lens.admit(lexicon, word) {
            weighted += count as f64 * h;
            matched += count;
            distinct += 1;
        }
    }
    if matched == 0 {
        return Err(Error::NoCoverage);
    }
    Ok(HappinessScore {
        value: weighted / matched as f64,
        matched_tokens: matched,
        distinct_words: distinct,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bin {
    Day,
    Month,
}

impl Bin {
    /// Start of the UTC calendar day or month containing `timestamp`.
    pub fn start_of(self, timestamp: u64) -> u64 {
        match self {
            Bin::Day => timestamp - timestamp % 86_400,
            Bin::Month => {
                let date = utc_date(timestamp);
                let first = NaiveDate::from_ymd_opt(date.year(), date.month(), 1)
                    .expect("first of month is valid");
                first
                    .and_hms_opt(0, 0, 0)
                    .expect("midnight is valid")
                    .and_utc()
                    .timestamp() as u64
            }
        }
    }

    /// Calendar label of the bin starting at `start`.
    pub fn label(self, start: u64) -> String {
        let date = utc_date(start);
        match self {
            Bin::Day => date.format("%Y-%m-%d").to_string(),
            Bin::Month => date.format("%Y-%m").to_string(),
        }
    }
}

fn utc_date(timestamp: u64) -> NaiveDate {
    DateTime::<Utc>::from_timestamp(timestamp as i64, 0)
        .map(|dt| dt.date_naive())
        .unwrap_or(NaiveDate::MAX)
}

impl FromStr for Bin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "day" => Ok(Bin::Day),
            "month" => Ok(Bin::Month),
            other => Err(format!("unknown bin {other:?}, expected day or month")),
        }
    }
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bin::Day => "day",
            Bin::Month => "month",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimePoint {
    pub bin_start: u64,
    pub posts: usize,
    /// Absent when no word in the bin survives the lexicon and lens.
    pub score: Option<HappinessScore>,
}

/// Happiness per calendar bin, ascending. Only bins holding at least one
/// post appear.
pub fn timeseries(posts: &[Post], lexicon: &Lexicon, lens: Lens, bin: Bin) -> Vec<TimePoint> {
    let mut bins: BTreeMap<u64, (usize, FreqDist)> = BTreeMap::new();
    for post in posts {
        let (n, dist) = bins.entry(bin.start_of(post.timestamp)).or_default();
        *n += 1;
        for t in post.tokens() {
            dist.add(t, 1);
        }
    }
    bins.into_iter()
        .map(|(bin_start, (posts, dist))| TimePoint {
            bin_start,
            posts,
            score: score(&dist, lexicon, lens).ok(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashtagSort {
    Frequency,
    Happiness,
}

impl FromStr for HashtagSort {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frequency" => Ok(HashtagSort::Frequency),
            "happiness" => Ok(HashtagSort::Happiness),
            other => Err(format!(
                "unknown sort {other:?}, expected frequency or happiness"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HashtagRow {
    pub tag: String,
    pub tweets: usize,
    pub users: usize,
    pub ambient: Option<HappinessScore>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HashtagTable {
    pub rows: Vec<HashtagRow>,
    /// Distinct posts and users across every listed tag, scored together.
    pub total: HashtagRow,
}

fn ambient_dist<'a>(posts: impl IntoIterator<Item = &'a Post>) -> FreqDist {
    let mut dist = FreqDist::new();
    for post in posts {
        for t in post.tokens().iter().filter(|t| !is_hashtag(t)) {
            dist.add(t, 1);
        }
    }
    dist
}

fn summarize(
    tag: String,
    posts: &[&Post],
    lexicon: &Lexicon,
    lens: Lens,
) -> HashtagRow {
    let users: BTreeSet<&str> = posts.iter().map(|p| p.user_id.as_str()).collect();
    HashtagRow {
        tag,
        tweets: posts.len(),
        users: users.len(),
        ambient: score(&ambient_dist(posts.iter().copied()), lexicon, lens).ok(),
    }
}

/// The `top_k` most tweeted hashtags with the ambient happiness of the
/// words they co-occur with (hashtag tokens excluded). With
/// [`HashtagSort::Happiness`] the same rows are ordered by ambient score,
/// highest first.
///
/// # Panics
///
/// If `top_k` is zero.
pub fn hashtag_table(
    posts: &[Post],
    lexicon: &Lexicon,
    lens: Lens,
    top_k: usize,
    sort: HashtagSort,
) -> HashtagTable {
    assert!(top_k >= 1, "top_k must be at least 1");
    let mut groups: HashMap<&str, Vec<&Post>> = HashMap::new();
    for post in posts {
        let tags: BTreeSet<&str> = post.hashtags().iter().map(String::as_str).collect();
        for tag in tags {
            groups.entry(tag).or_default().push(post);
        }
    }

    let mut ranked: Vec<(&str, Vec<&Post>)> = groups.into_iter().collect();
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
    ranked.truncate(top_k);

    let mut rows: Vec<HashtagRow> = ranked
        .iter()
        .map(|(tag, group)| summarize(tag.to_string(), group, lexicon, lens))
        .collect();
    if sort == HashtagSort::Happiness {
        // absent scores sort last
        rows.sort_by(|a, b| {
            let ka = a.ambient.map(|s| s.value).unwrap_or(f64::NEG_INFINITY);
            let kb = b.ambient.map(|s| s.value).unwrap_or(f64::NEG_INFINITY);
            kb.total_cmp(&ka).then_with(|| a.tag.cmp(&b.tag))
        });
    }

    let mut seen = BTreeSet::new();
    let mut listed: Vec<&Post> = Vec::new();
    for (_, group) in &ranked {
        for &p in group {
            if seen.insert(p as *const Post) {
                listed.push(p);
            }
        }
    }
    let total = summarize("Total".to_string(), &listed, lexicon, lens);
    HashtagTable { rows, total }
}
