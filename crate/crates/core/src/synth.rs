//! Seeded synthetic corpora with known ground truth. Used by the test
//! suites, the benches, and the CLI `demo` fixtures.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::corpus::{FreqDist, Lexicon, Post};
use crate::relevance::{Label, LabeledExample};
use crate::sift::HOROSCOPE_TERMS;

/// Everyday words that are neither relevance terms, diagnostic markers,
/// nor horoscope terms.
pub const FILLER: &[&str] = &[
    "today", "morning", "coffee", "walk", "park", "friends", "family", "dinner", "work", "office",
    "weekend", "music", "movie", "book", "rain", "sunny", "tired", "happy", "sad", "love", "hate",
    "game", "team", "win", "lose", "city", "train", "bus", "car", "road", "school", "class",
    "teacher", "phone", "call", "text", "night", "sleep", "dream", "garden", "flowers", "dog",
    "cat", "pizza", "lunch", "tea", "beach", "ocean", "mountain", "snow", "holiday", "party",
    "birthday", "gift", "shopping", "store", "price", "money", "news", "story", "song", "dance",
    "run", "gym", "yoga", "bike", "kitchen", "cake", "bread", "market", "street", "window",
    "house", "home", "brother", "sister", "mom", "dad", "baby", "laugh", "smile", "cry",
];

/// Tokens that make a post topically relevant.
pub const RELEVANCE_TERMS: &[&str] = &[
    "cancer", "chemo", "tumor", "oncology", "mammogram", "biopsy", "radiation", "oncologist",
];

/// Off-topic tokens; every unrelated text carries one.
pub const OFF_TOPIC_TERMS: &[&str] = &["football", "recipe", "concert", "election", "traffic", "fashion"];

/// Phrases that mark a relevant post as a self-report.
pub const DIAGNOSTIC_PHRASES: &[&str] = &[
    "i was diagnosed",
    "my diagnosis came",
    "diagnosed me yesterday",
    "since my diagnosis",
];

fn filler_words(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Vec<String> {
    let n = rng.random_range(lo..=hi);
    (0..n)
        .map(|_| FILLER.choose(rng).expect("nonempty").to_string())
        .collect()
}

fn insert_at_random(words: &mut Vec<String>, phrase: &str, rng: &mut ChaCha8Rng) {
    let at = rng.random_range(0..=words.len());
    words.insert(at, phrase.to_string());
}

/// A lexicon of `n` pseudo-words (`w0`, `w1`, ...) with uniform scores in
/// `[1, 9]`, some landing inside the default lens.
pub fn random_lexicon(n: usize, rng: &mut ChaCha8Rng) -> Lexicon {
    Lexicon::from_entries("random", (0..n).map(|i| (format!("w{i}"), rng.random_range(1.0..=9.0))))
        .expect("generated scores are in range")
}

/// Counts for up to `max_words` words, drawn from `w0..w{vocab}`; words past
/// the lexicon size are out-of-vocabulary.
pub fn random_freq_dist(vocab: usize, max_words: usize, rng: &mut ChaCha8Rng) -> FreqDist {
    let n = rng.random_range(1..=max_words);
    (0..n)
        .map(|_| (format!("w{}", rng.random_range(0..vocab)), rng.random_range(1..=20u64)))
        .collect()
}

/// Scores for every generator word: filler and relevance terms get seeded
/// scores, diagnostic phrase words sit inside the default lens.
pub fn filler_lexicon(seed: u64) -> Lexicon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries: BTreeMap<String, f64> = BTreeMap::new();
    for w in FILLER.iter().chain(RELEVANCE_TERMS) {
        let s: f64 = rng.random_range(1.0..=9.0);
        entries.insert(w.to_string(), (s * 100.0).round() / 100.0);
    }
    for w in DIAGNOSTIC_PHRASES.iter().flat_map(|p| p.split(' ')) {
        entries.entry(w.to_string()).or_insert(5.0);
    }
    Lexicon::from_entries("filler", entries).expect("scores are in range")
}

/// Posts mixing every sift trigger: URLs in assorted spellings, retweet
/// flags, horoscope terms in assorted cases, foreign and missing languages,
/// hashtags, curly apostrophes and non-ASCII text.
pub fn fuzz_posts(n: usize, seed: u64) -> Vec<Post> {
    const URLS: &[&str] = &[
        "http://t.co/abc",
        "HTTPS://Example.org/x?y=1",
        "see:https://a.b",
        "www.site.com",
        "Www.Upper.NET/path",
        "(http://paren.io)",
    ];
    const NEAR_MISSES: &[&str] = &["http", "www", "https:/", "wwwx", "leos", "#leo", "@aries", "virgos"];
    const LANGS: &[&str] = &["en", "en", "en", "EN", "es", "fr", "und", "pt"];
    const ODD: &[&str] = &["café", "naïve", "don’t", "ÉTÉ", "😀", "日本", "it's", "#Pink", "@nurse"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut words = filler_words(&mut rng, 0, 12);
            if rng.random_bool(0.15) {
                insert_at_random(&mut words, URLS.choose(&mut rng).unwrap(), &mut rng);
            }
            if rng.random_bool(0.15) {
                let term = HOROSCOPE_TERMS.choose(&mut rng).unwrap();
                let term = match rng.random_range(0..3) {
                    0 => term.to_string(),
                    1 => term.to_uppercase(),
                    _ => format!("{term}!"),
                };
                insert_at_random(&mut words, &term, &mut rng);
            }
            if rng.random_bool(0.2) {
                insert_at_random(&mut words, NEAR_MISSES.choose(&mut rng).unwrap(), &mut rng);
            }
            if rng.random_bool(0.3) {
                insert_at_random(&mut words, ODD.choose(&mut rng).unwrap(), &mut rng);
            }
            if rng.random_bool(0.2) {
                insert_at_random(&mut words, RELEVANCE_TERMS.choose(&mut rng).unwrap(), &mut rng);
            }
            let user = format!("u{}", rng.random_range(0..(n / 4).max(1)));
            Post::new(format!("f{i}"), user, 1_400_000_000 + i as u64, words.join(" "))
                .with_lang(LANGS.choose(&mut rng).unwrap())
                .retweet(rng.random_bool(0.2))
        })
        .collect()
}

/// Relevant examples contain at least one relevance term; unrelated ones
/// carry an off-topic term instead. Classes alternate, so the set is
/// balanced and linearly separable.
pub fn separable_corpus(n: usize, seed: u64) -> Vec<LabeledExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                LabeledExample::new(relevant_text(&mut rng), Label::Relevant)
            } else {
                LabeledExample::new(unrelated_text(&mut rng), Label::Unrelated)
            }
        })
        .collect()
}

fn unrelated_text(rng: &mut ChaCha8Rng) -> String {
    let mut words = filler_words(rng, 3, 12);
    insert_at_random(&mut words, OFF_TOPIC_TERMS.choose(rng).unwrap(), rng);
    words.join(" ")
}

fn relevant_text(rng: &mut ChaCha8Rng) -> String {
    let mut words = filler_words(rng, 3, 12);
    for _ in 0..rng.random_range(1..=2) {
        insert_at_random(&mut words, RELEVANCE_TERMS.choose(rng).unwrap(), rng);
    }
    words.join(" ")
}

fn diagnostic_text(rng: &mut ChaCha8Rng) -> String {
    let mut words: Vec<String> = relevant_text(rng).split(' ').map(str::to_string).collect();
    insert_at_random(&mut words, DIAGNOSTIC_PHRASES.choose(rng).unwrap(), rng);
    words.join(" ")
}

/// Relevant texts labeled by presence of a diagnostic phrase
/// (`Relevant` = diagnostic). Classes alternate.
pub fn marker_corpus(n: usize, seed: u64) -> Vec<LabeledExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                LabeledExample::new(diagnostic_text(&mut rng), Label::Relevant)
            } else {
                LabeledExample::new(relevant_text(&mut rng), Label::Unrelated)
            }
        })
        .collect()
}

/// Posts with Poisson(`rate`) arrivals per one-second window, starting at
/// `start`, until `total` posts exist.
pub fn poisson_feed(total: usize, rate: f64, start: u64, seed: u64) -> Vec<Post> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poisson = Poisson::new(rate).expect("positive rate");
    let mut posts = Vec::with_capacity(total);
    let mut ts = start;
    while posts.len() < total {
        let k = (poisson.sample(&mut rng) as usize).min(total - posts.len());
        for _ in 0..k {
            let i = posts.len();
            let text = if rng.random_bool(0.5) {
                relevant_text(&mut rng)
            } else {
                filler_words(&mut rng, 1, 8).join(" ")
            };
            posts.push(Post::new(format!("s{i}"), format!("u{}", i % 97), ts, text).with_lang("en"));
        }
        ts += 1;
    }
    posts
}

/// Posts per one-second window, in window order.
pub fn window_counts(posts: &[Post]) -> Vec<u64> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for p in posts {
        *counts.entry(p.timestamp).or_default() += 1;
    }
    counts.into_values().collect()
}

/// Fraction of posts a cap lets through: `Σ min(n_w, cap) / Σ n_w`.
pub fn delivered_fraction(counts: &[u64], cap: u64) -> f64 {
    let total: u64 = counts.iter().sum();
    let kept: u64 = counts.iter().map(|&n| n.min(cap)).sum();
    kept as f64 / total as f64
}

/// The cap whose delivered fraction is closest to `target`.
pub fn cap_for_fraction(counts: &[u64], target: f64) -> u64 {
    let max = counts.iter().copied().max().unwrap_or(1).max(1);
    (1..=max)
        .min_by(|&a, &b| {
            let da = (delivered_fraction(counts, a) - target).abs();
            let db = (delivered_fraction(counts, b) - target).abs();
            da.total_cmp(&db)
        })
        .unwrap_or(1)
}

/// `days` consecutive days of filler posts starting at `start` (a UTC
/// midnight). Day 3 holds only out-of-lexicon words and day 5 is empty.
pub fn daily_corpus(days: u64, per_day: usize, start: u64, seed: u64) -> Vec<Post> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut posts = Vec::new();
    for day in 0..days {
        if day == 5 {
            continue;
        }
        for j in 0..per_day {
            let text = if day == 3 {
                "zzyzx qwxv".to_string()
            } else {
                filler_words(&mut rng, 1, 10).join(" ")
            };
            let ts = start + day * 86_400 + rng.random_range(0..86_400);
            posts.push(
                Post::new(format!("d{day}-{j}"), format!("u{}", rng.random_range(0..40)), ts, text)
                    .with_lang("en"),
            );
        }
    }
    posts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantKind {
    /// Removed by the default sift rules.
    Noise,
    Unrelated,
    Relevant,
    Diagnostic,
}

/// A corpus with a known funnel: every post's kind is recorded.
#[derive(Debug, Clone)]
pub struct CohortPlant {
    pub posts: Vec<Post>,
    pub kinds: Vec<PlantKind>,
}

impl CohortPlant {
    pub fn count(&self, kind: PlantKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }

    /// Posts surviving the default sift rules.
    pub fn sifted(&self) -> usize {
        self.kinds.len() - self.count(PlantKind::Noise)
    }

    /// Posts a perfect relevance classifier keeps after sifting.
    pub fn relevant(&self) -> usize {
        self.count(PlantKind::Relevant) + self.count(PlantKind::Diagnostic)
    }

    pub fn diagnostic(&self) -> usize {
        self.count(PlantKind::Diagnostic)
    }

    /// Authors of diagnostic posts with their diagnostic post counts.
    pub fn cohort(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for (p, k) in self.posts.iter().zip(&self.kinds) {
            if *k == PlantKind::Diagnostic {
                *out.entry(p.user_id.clone()).or_default() += 1;
            }
        }
        out
    }

    pub fn users(&self) -> BTreeSet<&str> {
        self.posts.iter().map(|p| p.user_id.as_str()).collect()
    }
}

/// `n` posts from `users` authors. Noise posts carry relevant or
/// diagnostic text but break a sift rule.
pub fn cohort_corpus(n: usize, users: usize, seed: u64) -> CohortPlant {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut posts = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    for i in 0..n {
        let kind = match rng.random_range(0..10) {
            0..=1 => PlantKind::Noise,
            2..=4 => PlantKind::Unrelated,
            5..=7 => PlantKind::Relevant,
            _ => PlantKind::Diagnostic,
        };
        let user = format!("u{}", rng.random_range(0..users.max(1)));
        let ts = 1_420_070_400 + i as u64 * 61;
        let id = format!("c{i}");
        let post = match kind {
            PlantKind::Unrelated => Post::new(id, user, ts, unrelated_text(&mut rng)),
            PlantKind::Relevant => Post::new(id, user, ts, relevant_text(&mut rng)),
            PlantKind::Diagnostic => Post::new(id, user, ts, diagnostic_text(&mut rng)),
            PlantKind::Noise => {
                let text = diagnostic_text(&mut rng);
                match rng.random_range(0..4) {
                    0 => Post::new(id, user, ts, format!("{text} https://t.co/x{i}")),
                    1 => Post::new(id, user, ts, text).retweet(true),
                    2 => Post::new(id, user, ts, format!("{text} {}", HOROSCOPE_TERMS.choose(&mut rng).unwrap())),
                    _ => Post::new(id, user, ts, text).with_lang("es"),
                }
            }
        };
        let post = if post.lang == "und" { post.with_lang("en") } else { post };
        posts.push(post);
        kinds.push(kind);
    }
    CohortPlant { posts, kinds }
}
