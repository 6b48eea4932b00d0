/// Splits raw post text into lowercase word tokens.
///
/// Letters, digits and apostrophes form words; every other character is a
/// separator. `#` and `@` may only lead a token, so `foo#bar` yields `foo`
/// and `#bar`, and a bare `#` is dropped. The typographic apostrophe
/// (U+2019) is folded to `'`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars().flat_map(char::to_lowercase) {
        let ch = if ch == '\u{2019}' { '\'' } else { ch };
        if ch.is_alphanumeric() || ch == '\'' {
            current.push(ch);
        } else if is_marker(ch) {
            flush(&mut current, &mut tokens);
            current.push(ch);
        } else {
            flush(&mut current, &mut tokens);
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// Hashtag tokens of `text`, in order of appearance, duplicates kept.
pub fn hashtags(text: &str) -> Vec<String> {
    tokenize(text).into_iter().filter(|t| is_hashtag(t)).collect()
}

pub fn is_hashtag(token: &str) -> bool {
    token.starts_with('#')
}

/// Case-insensitive scan for `http://`, `https://` or `www.`.
pub fn contains_url(text: &str) -> bool {
    const NEEDLES: [&[u8]; 3] = [b"http://", b"https://", b"www."];
    let bytes = text.as_bytes();
    NEEDLES.iter().any(|needle| {
        bytes
            .windows(needle.len())
            .any(|w| w.eq_ignore_ascii_case(needle))
    })
}

fn is_marker(ch: char) -> bool {
    ch == '#' || ch == '@'
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() && !current.chars().all(is_marker) {
        tokens.push(std::mem::take(current));
    } else {
        current.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text)
    }

    #[test]
    fn lowercases_and_strips_punctuation() {
        assert_eq!(toks("Breast Cancer!"), ["breast", "cancer"]);
    }

    #[test]
    fn empty_input() {
        assert!(toks("").is_empty());
        assert!(toks("  ?!... ").is_empty());
    }

    #[test]
    fn keeps_hashtags_and_contractions() {
        assert_eq!(toks("#BCSM rocks, y'all"), ["#bcsm", "rocks", "y'all"]);
        assert_eq!(toks("don\u{2019}t"), ["don't"]);
    }

    #[test]
    fn markers_only_lead() {
        assert_eq!(toks("foo#bar"), ["foo", "#bar"]);
        assert_eq!(toks("##pink"), ["#pink"]);
        assert_eq!(toks("# @ #!"), Vec::<String>::new());
        assert_eq!(toks("@Nurse_Amy"), ["@nurse", "amy"]);
    }

    #[test]
    fn non_ascii_letters_survive() {
        assert_eq!(toks("Ça VA très-bien"), ["ça", "va", "très", "bien"]);
    }

    #[test]
    fn url_detection() {
        assert!(contains_url("visit http://x.co"));
        assert!(contains_url("see HTTPS://t.co/x"));
        assert!(contains_url("WWW.example.org"));
        assert!(!contains_url("http: not a link"));
        assert!(!contains_url("www"));
    }

    #[test]
    fn hashtag_extraction() {
        assert_eq!(hashtags("#Pink run #pink"), ["#pink", "#pink"]);
    }

    proptest! {
        #[test]
        fn idempotent_on_joined_output(text in "\\PC{0,60}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(&once, &twice);
            for t in &once {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().skip(1).any(is_marker));
            }
        }
    }
}
