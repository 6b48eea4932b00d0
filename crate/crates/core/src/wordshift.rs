//! Per-word decomposition of the happiness difference between two word
//! distributions, with text and SVG renderings.
//!
//! For every word `w` surviving the lexicon and lens in either distribution,
//! the contribution is
//!
//! ```text
//! δ_w = (h_w − h_ref) · (p_comp(w) − p_ref(w))
//! ```
//!
//! where `p(w)` is the word's share of scored tokens. The contributions sum
//! exactly to `h_comp − h_ref`.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::corpus::{FreqDist, Lexicon};
use crate::error::Result;
use crate::hedonometer::{score, Lens};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqDirection {
    /// Relatively more frequent in the comparison text (ties count as up).
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valence {
    /// At or above the reference average.
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftEntry {
    pub word: String,
    pub contribution: f64,
    /// `100 · δ / |Δh|`; absent when `Δh` is zero.
    pub percent: Option<f64>,
    pub freq_direction: FreqDirection,
    pub valence: Valence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordShift {
    pub ref_happiness: f64,
    pub comp_happiness: f64,
    /// Sorted by |contribution| descending, ties by word.
    pub entries: Vec<ShiftEntry>,
}

impl WordShift {
    pub fn delta(&self) -> f64 {
        self.comp_happiness - self.ref_happiness
    }

    pub fn contribution_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.contribution).sum()
    }
}

fn shares<'a>(dist: &'a FreqDist, lexicon: &Lexicon, lens: Lens, total: u64) -> BTreeMap<&'a str, f64> {
    dist.iter()
        .filter(|(w, _)| lens.admit(lexicon, w).is_some())
        .map(|(w, c)| (w, c as f64 / total as f64))
        .collect()
}

pub fn shift(ref_dist: &FreqDist, comp: &FreqDist, lexicon: &Lexicon, lens: Lens) -> Result<WordShift> {
    let ref_score = score(ref_dist, lexicon, lens)?;
    let comp_score = score(comp, lexicon, lens)?;
    let h_ref = ref_score.value;
    let delta_h = comp_score.value - h_ref;

    let p_ref = shares(ref_dist, lexicon, lens, ref_score.matched_tokens);
    let p_comp = shares(comp, lexicon, lens, comp_score.matched_tokens);

    let mut words: Vec<&str> = p_ref.keys().chain(p_comp.keys()).copied().collect();
    words.sort_unstable();
    words.dedup();

    let mut entries: Vec<ShiftEntry> = words
        .into_iter()
        .map(|w| {
            let h = lexicon.get(w).expect("survivor words are in the lexicon");
            let dp = p_comp.get(w).copied().unwrap_or(0.0) - p_ref.get(w).copied().unwrap_or(0.0);
            let contribution = (h - h_ref) * dp;
            ShiftEntry {
                word: w.to_string(),
                contribution,
                percent: (delta_h != 0.0).then(|| 100.0 * contribution / delta_h.abs()),
                freq_direction: if dp >= 0.0 {
                    FreqDirection::Up
                } else {
                    FreqDirection::Down
                },
                valence: if h >= h_ref {
                    Valence::Positive
                } else {
                    Valence::Negative
                },
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.contribution
            .abs()
            .total_cmp(&a.contribution.abs())
            .then_with(|| a.word.cmp(&b.word))
    });

    Ok(WordShift {
        ref_happiness: h_ref,
        comp_happiness: comp_score.value,
        entries,
    })
}

fn valence_symbol(v: Valence) -> char {
    match v {
        Valence::Positive => '+',
        Valence::Negative => '\u{2212}',
    }
}

fn arrow(d: FreqDirection) -> char {
    match d {
        FreqDirection::Up => '\u{2191}',
        FreqDirection::Down => '\u{2193}',
    }
}

fn percent_text(p: Option<f64>) -> String {
    match p {
        Some(p) => format!("{p:.1}%"),
        None => "\u{2014}".to_string(),
    }
}

/// Plain-text table of the `top_n` largest contributions.
///
/// Each row reads `rank  word ±↑ percent`, where `+`/`−` says whether the
/// word is happier than the reference average and `↑`/`↓` whether it became
/// relatively more or less frequent.
pub fn render_text(ws: &WordShift, top_n: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "h_ref = {:.4}  h_comp = {:.4}  delta = {:+.4}",
        ws.ref_happiness,
        ws.comp_happiness,
        ws.delta()
    );
    let _ = writeln!(out, "percent of |h_comp - h_ref| per word");
    let width = ws
        .entries
        .iter()
        .take(top_n)
        .map(|e| e.word.chars().count())
        .max()
        .unwrap_or(0);
    for (rank, e) in ws.entries.iter().take(top_n).enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {} {}{} {}",
            rank + 1,
            e.word,
            valence_symbol(e.valence),
            arrow(e.freq_direction),
            pad_left(&percent_text(e.percent), 7 + width - e.word.chars().count()),
        );
    }
    out
}

fn pad_left(s: &str, width: usize) -> String {
    let len = s.chars().count();
    if len >= width {
        s.to_string()
    } else {
        format!("{}{s}", " ".repeat(width - len))
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

const SVG_WIDTH: f64 = 640.0;
const ROW_HEIGHT: f64 = 18.0;
const TOP: f64 = 48.0;
const HALF_SPAN: f64 = 220.0;

/// Horizontal bar chart of the `top_n` largest contributions, centred on a
/// vertical zero axis. Output depends only on the inputs.
pub fn render_svg(ws: &WordShift, top_n: usize) -> String {
    let rows: Vec<&ShiftEntry> = ws.entries.iter().take(top_n).collect();
    let height = TOP + ROW_HEIGHT * rows.len().max(1) as f64 + 24.0;
    let axis_x = SVG_WIDTH / 2.0;
    let max_abs = rows
        .iter()
        .map(|e| e.contribution.abs())
        .fold(0.0_f64, f64::max);
    let scale = if max_abs > 0.0 { HALF_SPAN / max_abs } else { 0.0 };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{height}" viewBox="0 0 {SVG_WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"  <text x="{axis_x}" y="16" text-anchor="middle" font-size="13">h_ref = {:.4}, h_comp = {:.4}</text>"#,
        ws.ref_happiness, ws.comp_happiness
    );
    let _ = writeln!(
        svg,
        r#"  <text x="{axis_x}" y="32" text-anchor="middle">per-word contribution (% of |h_comp - h_ref|)</text>"#
    );
    let axis_bottom = height - 16.0;
    let _ = writeln!(
        svg,
        r#"  <line x1="{axis_x}" y1="{}" x2="{axis_x}" y2="{axis_bottom}" stroke="black"/>"#,
        TOP - 6.0
    );
    let _ = writeln!(
        svg,
        r#"  <line x1="{}" y1="{axis_bottom}" x2="{}" y2="{axis_bottom}" stroke="black"/>"#,
        axis_x - HALF_SPAN,
        axis_x + HALF_SPAN
    );

    for (i, e) in rows.iter().enumerate() {
        let y = TOP + ROW_HEIGHT * i as f64;
        let len = e.contribution.abs() * scale;
        let x = if e.contribution >= 0.0 { axis_x } else { axis_x - len };
        let fill = match e.valence {
            Valence::Positive => "#f4a340",
            Valence::Negative => "#4a7fc1",
        };
        let label = format!(
            "{} {}{} {}",
            xml_escape(&e.word),
            valence_symbol(e.valence),
            arrow(e.freq_direction),
            percent_text(e.percent)
        );
        let _ = writeln!(
            svg,
            r#"  <rect x="{x:.2}" y="{y:.2}" width="{len:.2}" height="{:.2}" fill="{fill}"/>"#,
            ROW_HEIGHT - 4.0
        );
        let (tx, anchor) = if e.contribution >= 0.0 {
            (axis_x + len + 4.0, "start")
        } else {
            (axis_x - len - 4.0, "end")
        };
        let _ = writeln!(
            svg,
            r#"  <text x="{tx:.2}" y="{:.2}" text-anchor="{anchor}">{label}</text>"#,
            y + ROW_HEIGHT - 7.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
