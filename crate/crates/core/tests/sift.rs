use std::collections::BTreeMap;

use hedonic_core::corpus::{read_posts, write_posts, Post};
use hedonic_core::sift::{apply_filters, user_activity, FilterConfig, HOROSCOPE_TERMS};
use hedonic_core::synth::fuzz_posts;
use proptest::prelude::*;

/// Runs of alphanumerics and apostrophes not directly preceded by `#` or
/// `@` (those form hashtag and mention tokens instead).
fn bare_words(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let word_char = |c: char| c.is_alphanumeric() || c == '\'';
        if !word_char(chars[i].1) {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && word_char(chars[i].1) {
            i += 1;
        }
        let marked = start > 0 && matches!(chars[start - 1].1, '#' | '@');
        if !marked {
            let end = chars.get(i).map_or(text.len(), |c| c.0);
            out.push(&text[chars[start].0..end]);
        }
    }
    out
}

/// Rule violations found without the library tokenizer, in rule order.
fn violations(p: &Post) -> Vec<&'static str> {
    let lower = p.text().to_lowercase().replace('\u{2019}', "'");
    let mut out = Vec::new();
    if ["http://", "https://", "www."].iter().any(|m| lower.contains(m)) {
        out.push("url");
    }
    if p.is_retweet {
        out.push("retweet");
    }
    if bare_words(&lower).iter().any(|w| HOROSCOPE_TERMS.contains(w)) {
        out.push("horoscope");
    }
    if p.lang != "en" {
        out.push("lang");
    }
    out
}

#[test]
fn fuzzed_corpus_rescan_is_clean() {
    let posts = fuzz_posts(10_000, 42);
    let (kept, report) = apply_filters(&posts, &FilterConfig::default());
    assert_eq!(report.input_count, 10_000);
    assert_eq!(report.kept_count + report.removed(), report.input_count);
    assert_eq!(report.kept_count, kept.len());
    for p in &kept {
        assert!(violations(p).is_empty(), "{:?} in {:?}", violations(p), p.text());
    }
    // every rule fired at least once on this corpus
    assert!(report.removed_by_url > 0 && report.removed_by_retweet > 0);
    assert!(report.removed_by_horoscope > 0 && report.removed_by_lang > 0);
}

#[test]
fn tallies_match_first_rule_by_hand() {
    let posts = fuzz_posts(2_000, 7);
    let (_, report) = apply_filters(&posts, &FilterConfig::default());
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &posts {
        if let Some(first) = violations(p).first() {
            *counts.entry(first).or_default() += 1;
        }
    }
    assert_eq!(counts.get("url").copied().unwrap_or(0), report.removed_by_url);
    assert_eq!(counts.get("retweet").copied().unwrap_or(0), report.removed_by_retweet);
    assert_eq!(counts.get("horoscope").copied().unwrap_or(0), report.removed_by_horoscope);
    assert_eq!(counts.get("lang").copied().unwrap_or(0), report.removed_by_lang);
}

#[test]
fn record_lines_survive_a_file_round_trip() {
    let posts = fuzz_posts(500, 1);
    let mut buf = Vec::new();
    write_posts(&mut buf, &posts).unwrap();
    assert_eq!(read_posts(buf.as_slice()).unwrap(), posts);
}

#[test]
fn activity_matches_generator_tally() {
    let posts = fuzz_posts(3_000, 9);
    let mut per_user: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &posts {
        *per_user.entry(&p.user_id).or_default() += 1;
    }
    let a = user_activity(&posts, 5);
    assert_eq!(a.users, per_user.len());
    assert_eq!(a.posts, 3_000);
    assert_eq!(a.max, per_user.values().max().copied());
    let below: Vec<usize> = per_user.values().copied().filter(|&n| n < 5).collect();
    assert_eq!(a.user_share_below, Some(below.len() as f64 / per_user.len() as f64));
    assert_eq!(a.post_share_below, Some(below.iter().sum::<usize>() as f64 / 3_000.0));
    assert_eq!(a.histogram.values().sum::<usize>(), a.users);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn filtering_is_idempotent(seed in 0u64..10_000, n in 0usize..300) {
        let cfg = FilterConfig::default();
        let (once, _) = apply_filters(&fuzz_posts(n, seed), &cfg);
        let (twice, report) = apply_filters(&once, &cfg);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(report.removed(), 0);
    }

    #[test]
    fn reports_add_over_disjoint_halves(seed in 0u64..10_000, n in 0usize..300, cut in 0usize..300) {
        let cfg = FilterConfig::default();
        let posts = fuzz_posts(n, seed);
        let cut = cut.min(n);
        let (_, whole) = apply_filters(&posts, &cfg);
        let (_, a) = apply_filters(&posts[..cut], &cfg);
        let (_, b) = apply_filters(&posts[cut..], &cfg);
        prop_assert_eq!(a.merge(&b), whole);
    }
}
