//! Pre-classification filters, keyword queries and per-user activity.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::corpus::Post;

/// Astrology terms whose presence marks a post as horoscope content.
pub const HOROSCOPE_TERMS: [&str; 12] = [
    "astrology",
    "zodiac",
    "astronomy",
    "horoscope",
    "aquarius",
    "pisces",
    "aries",
    "taurus",
    "leo",
    "virgo",
    "libra",
    "scorpio",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    pub drop_urls: bool,
    pub drop_retweets: bool,
    /// Removed when any appears as a token.
    pub horoscope_terms: Vec<String>,
    /// Empty means any language is accepted.
    pub allowed_langs: BTreeSet<String>,
    /// Every term must appear as a token for a post to be kept.
    pub keyword_query: Vec<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            drop_urls: true,
            drop_retweets: true,
            horoscope_terms: HOROSCOPE_TERMS.iter().map(|s| s.to_string()).collect(),
            allowed_langs: BTreeSet::from(["en".to_string()]),
            keyword_query: Vec::new(),
        }
    }
}

/// Why a post was dropped. Variants are in rule evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Removal {
    Url,
    Retweet,
    Horoscope,
    Lang,
    Query,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub input_count: usize,
    pub kept_count: usize,
    pub removed_by_url: usize,
    pub removed_by_retweet: usize,
    pub removed_by_horoscope: usize,
    pub removed_by_lang: usize,
    pub removed_by_query: usize,
}

impl FilterReport {
    pub fn removed(&self) -> usize {
        self.removed_by_url
            + self.removed_by_retweet
            + self.removed_by_horoscope
            + self.removed_by_lang
            + self.removed_by_query
    }

    fn record(&mut self, removal: Removal) {
        match removal {
            Removal::Url => self.removed_by_url += 1,
            Removal::Retweet => self.removed_by_retweet += 1,
            Removal::Horoscope => self.removed_by_horoscope += 1,
            Removal::Lang => self.removed_by_lang += 1,
            Removal::Query => self.removed_by_query += 1,
        }
    }

    /// Sum of two reports over disjoint inputs.
    pub fn merge(&self, other: &FilterReport) -> FilterReport {
        FilterReport {
            input_count: self.input_count + other.input_count,
            kept_count: self.kept_count + other.kept_count,
            removed_by_url: self.removed_by_url + other.removed_by_url,
            removed_by_retweet: self.removed_by_retweet + other.removed_by_retweet,
            removed_by_horoscope: self.removed_by_horoscope + other.removed_by_horoscope,
            removed_by_lang: self.removed_by_lang + other.removed_by_lang,
            removed_by_query: self.removed_by_query + other.removed_by_query,
        }
    }
}

/// The first rule that rejects `post`, or `None` if it passes them all.
pub fn first_violation(post: &Post, config: &FilterConfig) -> Option<Removal> {
    if config.drop_urls && post.has_url() {
        return Some(Removal::Url);
    }
    if config.drop_retweets && post.is_retweet {
        return Some(Removal::Retweet);
    }
    if config
        .horoscope_terms
        .iter()
        .any(|term| post.has_token(term))
    {
        return Some(Removal::Horoscope);
    }
    if !config.allowed_langs.is_empty() && !config.allowed_langs.contains(&post.lang) {
        return Some(Removal::Lang);
    }
    if !match_keywords(post, &config.keyword_query) {
        return Some(Removal::Query);
    }
    None
}

pub fn apply_filters(posts: &[Post], config: &FilterConfig) -> (Vec<Post>, FilterReport) {
    let mut report = FilterReport {
        input_count: posts.len(),
        ..FilterReport::default()
    };
    let mut kept = Vec::new();
    for post in posts {
        match first_violation(post, config) {
            Some(removal) => report.record(removal),
            None => kept.push(post.clone()),
        }
    }
    report.kept_count = kept.len();
    (kept, report)
}

/// True when every term is a token of the post. An empty query matches.
pub fn match_keywords<S: AsRef<str>>(post: &Post, terms: &[S]) -> bool {
    terms.iter().all(|t| post.has_token(t.as_ref()))
}

/// Posts-per-user distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct UserActivity {
    /// posts-per-user → number of users with that many posts
    pub histogram: BTreeMap<usize, usize>,
    pub posts: usize,
    pub users: usize,
    /// Absent for an empty corpus.
    pub mean: Option<f64>,
    pub max: Option<usize>,
    pub threshold: usize,
    /// Fraction of users with fewer than `threshold` posts.
    pub user_share_below: Option<f64>,
    /// Fraction of posts written by those users.
    pub post_share_below: Option<f64>,
}

pub fn user_activity(posts: &[Post], threshold: usize) -> UserActivity {
    let mut per_user: HashMap<&str, usize> = HashMap::new();
    for p in posts {
        *per_user.entry(p.user_id.as_str()).or_default() += 1;
    }
    let mut histogram = BTreeMap::new();
    for &n in per_user.values() {
        *histogram.entry(n).or_default() += 1;
    }
    let users = per_user.len();
    let (users_below, posts_below) = histogram
        .range(..threshold)
        .fold((0, 0), |(u, p), (&n, &count)| (u + count, p + n * count));
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    UserActivity {
        posts: posts.len(),
        users,
        mean: ratio(posts.len(), users),
        max: histogram.keys().next_back().copied(),
        threshold,
        user_share_below: ratio(users_below, users),
        post_share_below: ratio(posts_below, posts.len()),
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(text: &str) -> Post {
        Post::new("1", "u", 0, text).with_lang("en")
    }

    #[test]
    fn default_terms() {
        let cfg = FilterConfig::default();
        assert_eq!(cfg.horoscope_terms.len(), 12);
        assert_eq!(cfg.allowed_langs.iter().collect::<Vec<_>>(), ["en"]);
    }

    #[test]
    fn url_removed() {
        let (kept, report) = apply_filters(&[post("see https://t.co/x")], &FilterConfig::default());
        assert!(kept.is_empty());
        assert_eq!(report.removed_by_url, 1);
    }

    #[test]
    fn horoscope_token_removed() {
        let (_, report) = apply_filters(&[post("aquarius season")], &FilterConfig::default());
        assert_eq!(report.removed_by_horoscope, 1);
        // substrings do not count
        let (kept, _) = apply_filters(&[post("leopard print")], &FilterConfig::default());
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn plain_post_kept() {
        let cfg = FilterConfig {
            keyword_query: vec!["breast".into(), "cancer".into()],
            ..FilterConfig::default()
        };
        let (kept, report) = apply_filters(&[post("my breast cancer surgery went well")], &cfg);
        assert_eq!(kept.len(), 1);
        assert_eq!(report.kept_count, 1);
        assert_eq!(report.removed(), 0);
    }

    #[test]
    fn first_rule_wins() {
        let p = Post::new("1", "u", 0, "RT aries http://x").with_lang("fr").retweet(true);
        assert_eq!(first_violation(&p, &FilterConfig::default()), Some(Removal::Url));
        let cfg = FilterConfig {
            drop_urls: false,
            ..FilterConfig::default()
        };
        assert_eq!(first_violation(&p, &cfg), Some(Removal::Retweet));
    }

    #[test]
    fn language_and_any_language() {
        let p = Post::new("1", "u", 0, "hola");
        assert_eq!(first_violation(&p, &FilterConfig::default()), Some(Removal::Lang));
        let cfg = FilterConfig {
            allowed_langs: BTreeSet::new(),
            ..FilterConfig::default()
        };
        assert_eq!(first_violation(&p, &cfg), None);
    }

    #[test]
    fn keyword_matching() {
        assert!(match_keywords(&post("Breast cancer awareness"), &["breast", "cancer"]));
        assert!(match_keywords(&post("anything"), &[] as &[&str]));
        assert!(!match_keywords(&post("breastfeeding tips"), &["breast"]));
    }

    #[test]
    fn activity_counts() {
        let posts: Vec<Post> = ["a", "a", "a", "b"]
            .iter()
            .map(|u| Post::new("x", *u, 0, ""))
            .collect();
        let act = user_activity(&posts, 2);
        assert_eq!(act.histogram, BTreeMap::from([(1, 1), (3, 1)]));
        assert_eq!(act.mean, Some(2.0));
        assert_eq!(act.max, Some(3));
        assert_eq!(act.user_share_below, Some(0.5));
        assert_eq!(act.post_share_below, Some(0.25));
    }

    #[test]
    fn activity_empty() {
        let act = user_activity(&[], 10);
        assert!(act.histogram.is_empty());
        assert_eq!(act.mean, None);
        assert_eq!(act.max, None);
    }
}
