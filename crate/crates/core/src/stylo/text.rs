//! Text primitives for feature extraction: NFC normalization, whitespace
//! tokens, word cores, and character classes. "Letters" means ASCII a-z;
//! other alphabetic characters count as special.

use unicode_normalization::UnicodeNormalization;

pub const PUNCTUATION_MARKS: [char; 11] = ['.', ',', '!', '?', ';', ':', '\'', '"', '(', ')', '-'];

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

/// Whitespace-delimited tokens, punctuation still attached.
pub fn tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Token with leading/trailing punctuation stripped, lowercased. Empty when
/// the token was all punctuation.
pub fn word_core(token: &str) -> String {
    token
        .trim_matches(|c: char| c.is_ascii_punctuation())
        .to_lowercase()
}

pub fn is_alphabetic_word(core: &str) -> bool {
    !core.is_empty() && core.chars().all(|c| c.is_ascii_alphabetic())
}

pub fn is_number_token(token: &str) -> bool {
    let core = token.trim_matches(|c: char| c.is_ascii_punctuation() && !matches!(c, '.' | ','));
    !core.is_empty()
        && core.chars().any(|c| c.is_ascii_digit())
        && core.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ','))
}

/// Maximal runs of ASCII letters, lowercased, for letter n-grams.
pub fn letter_runs(text: &str) -> Vec<String> {
    let mut runs = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_ascii_alphabetic() {
            current.push(c.to_ascii_lowercase());
        } else if !current.is_empty() {
            runs.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// Character n-grams within one run.
pub fn char_ngrams(run: &str, n: usize) -> Vec<String> {
    let chars: Vec<char> = run.chars().collect();
    if chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Joined word n-grams over a token-core sequence.
pub fn word_ngrams(cores: &[String], n: usize) -> Vec<String> {
    if cores.len() < n {
        return Vec::new();
    }
    cores.windows(n).map(|w| w.join(" ")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cores_and_words() {
        assert_eq!(word_core("app!"), "app");
        assert_eq!(word_core("\"Great,\""), "great");
        assert_eq!(word_core("!!!"), "");
        assert!(is_alphabetic_word("app"));
        assert!(!is_alphabetic_word("app2"));
        assert!(is_number_token("42"));
        assert!(is_number_token("3.5,"));
        assert!(!is_number_token("v2"));
    }

    #[test]
    fn letter_runs_split_on_non_letters() {
        assert_eq!(letter_runs("Great app!"), vec!["great", "app"]);
        assert_eq!(letter_runs("don't"), vec!["don", "t"]);
    }

    #[test]
    fn ngram_windows() {
        assert_eq!(char_ngrams("great", 2), vec!["gr", "re", "ea", "at"]);
        assert!(char_ngrams("a", 2).is_empty());
        let cores = vec!["great".to_string(), "app".to_string(), "fun".to_string()];
        assert_eq!(word_ngrams(&cores, 2), vec!["great app", "app fun"]);
    }
}
