//! Bundled English wordlist backing misspelling detection. A token counts
//! as misspelled when it is alphabetic and its lowercase form is absent.

use std::collections::BTreeSet;
use std::sync::OnceLock;

static WORDLIST: &str = include_str!("wordlist.txt");
static DICTIONARY: OnceLock<BTreeSet<&'static str>> = OnceLock::new();

pub fn dictionary() -> &'static BTreeSet<&'static str> {
    DICTIONARY.get_or_init(|| WORDLIST.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

/// Words as an indexable slice, for samplers that need stable ordering.
pub fn word_slice() -> Vec<&'static str> {
    dictionary().iter().copied().collect()
}

pub fn is_known(word_lower: &str) -> bool {
    dictionary().contains(word_lower)
}
