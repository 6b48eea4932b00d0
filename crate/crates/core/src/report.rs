//! Tab-separated renderings. Every table opens with one `#` line naming the
//! tool version and the columns; absent values print as `NA`.

use crate::cohort::CohortReport;
use crate::hedonometer::{Bin, HappinessScore, HashtagRow, HashtagTable, TimePoint};
use crate::sift::FilterReport;
use crate::VERSION;

pub const NA: &str = "NA";

pub fn header(columns: &[&str]) -> String {
    format!("# hedonic {VERSION}: {}\n", columns.join("\t"))
}

fn fmt_score(score: Option<HappinessScore>) -> (String, String) {
    match score {
        Some(s) => (s.matched_tokens.to_string(), format!("{:.6}", s.value)),
        None => ("0".to_string(), NA.to_string()),
    }
}

pub fn timeseries_tsv(points: &[TimePoint], bin: Bin) -> String {
    let mut out = header(&["bin", "posts", "matched_tokens", "happiness"]);
    for p in points {
        let (matched, value) = fmt_score(p.score);
        out.push_str(&format!("{}\t{}\t{matched}\t{value}\n", bin.label(p.bin_start), p.posts));
    }
    out
}

fn hashtag_line(row: &HashtagRow) -> String {
    let (_, value) = fmt_score(row.ambient);
    format!("{}\t{}\t{}\t{value}\n", row.tag, row.tweets, row.users)
}

/// One row per tag followed by the `Total` row.
pub fn hashtag_tsv(table: &HashtagTable) -> String {
    let mut out = header(&["hashtag", "tweets", "users", "happiness"]);
    for row in &table.rows {
        out.push_str(&hashtag_line(row));
    }
    out.push_str(&hashtag_line(&table.total));
    out
}

pub fn filter_report_tsv(r: &FilterReport) -> String {
    let mut out = header(&["count", "value"]);
    for (k, v) in [
        ("input", r.input_count),
        ("kept", r.kept_count),
        ("removed_by_url", r.removed_by_url),
        ("removed_by_retweet", r.removed_by_retweet),
        ("removed_by_horoscope", r.removed_by_horoscope),
        ("removed_by_lang", r.removed_by_lang),
        ("removed_by_query", r.removed_by_query),
    ] {
        out.push_str(&format!("{k}\t{v}\n"));
    }
    out
}

pub fn cohort_funnel_tsv(r: &CohortReport) -> String {
    let mut out = header(&["stage", "count"]);
    for (k, v) in [
        ("input", r.input()),
        ("sifted", r.sifted()),
        ("relevant", r.relevant),
        ("diagnostic", r.diagnostic),
        ("profiles", r.users.len()),
    ] {
        out.push_str(&format!("{k}\t{v}\n"));
    }
    out
}

pub fn cohort_users_tsv(r: &CohortReport) -> String {
    let mut out = header(&["user_id", "diagnostic_posts"]);
    for (user, n) in &r.users {
        out.push_str(&format!("{user}\t{n}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn na_for_missing_scores() {
        let pts = [
            TimePoint {
                bin_start: 0,
                posts: 2,
                score: None,
            },
            TimePoint {
                bin_start: 86_400,
                posts: 1,
                score: Some(HappinessScore {
                    value: 6.5,
                    matched_tokens: 3,
                    distinct_words: 2,
                }),
            },
        ];
        let tsv = timeseries_tsv(&pts, Bin::Day);
        let lines: Vec<&str> = tsv.lines().collect();
        assert!(lines[0].starts_with("# hedonic "));
        assert_eq!(lines[1], "1970-01-01\t2\t0\tNA");
        assert_eq!(lines[2], "1970-01-02\t1\t3\t6.500000");
    }
}
