//! Rule- and suffix-based part-of-speech tagger over a small closed-class
//! lexicon. Coarse by design: stylometry needs stable, characteristic tag
//! distributions, not treebank accuracy, and the feature interface allows
//! swapping in a heavier tagger.

use std::collections::BTreeMap;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PosTag {
    Det,
    Pron,
    Prep,
    Conj,
    Aux,
    Verb,
    Noun,
    Propn,
    Adj,
    Adv,
    Num,
    Punct,
    Intj,
    Part,
    Other,
}

impl PosTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Det => "DET",
            PosTag::Pron => "PRON",
            PosTag::Prep => "PREP",
            PosTag::Conj => "CONJ",
            PosTag::Aux => "AUX",
            PosTag::Verb => "VERB",
            PosTag::Noun => "NOUN",
            PosTag::Propn => "PROPN",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Num => "NUM",
            PosTag::Punct => "PUNCT",
            PosTag::Intj => "INTJ",
            PosTag::Part => "PART",
            PosTag::Other => "OTHER",
        }
    }
}

fn lexicon() -> &'static BTreeMap<&'static str, PosTag> {
    static LEXICON: OnceLock<BTreeMap<&'static str, PosTag>> = OnceLock::new();
    LEXICON.get_or_init(|| {
        let mut map = BTreeMap::new();
        let mut insert = |words: &[&'static str], tag: PosTag| {
            for w in words {
                map.insert(*w, tag);
            }
        };
        insert(
            &["the", "a", "an", "this", "that", "these", "those", "every", "each", "some", "any", "no", "another"],
            PosTag::Det,
        );
        insert(
            &[
                "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them",
                "my", "your", "his", "its", "our", "their", "mine", "yours", "myself", "yourself",
                "who", "what", "which", "someone", "something", "anyone", "anything", "everyone",
                "everything", "nothing",
            ],
            PosTag::Pron,
        );
        insert(
            &[
                "of", "in", "on", "at", "by", "for", "with", "from", "about", "into", "over",
                "under", "after", "before", "between", "through", "during", "without", "within",
                "across", "behind", "beyond", "near", "against", "upon",
            ],
            PosTag::Prep,
        );
        insert(
            &["and", "or", "but", "nor", "so", "yet", "because", "although", "while", "if", "when", "since", "unless", "whether", "than"],
            PosTag::Conj,
        );
        insert(
            &[
                "is", "am", "are", "was", "were", "be", "been", "being", "have", "has", "had",
                "do", "does", "did", "can", "could", "will", "would", "shall", "should", "may",
                "might", "must",
            ],
            PosTag::Aux,
        );
        insert(&["to", "not"], PosTag::Part);
        insert(&["oh", "wow", "hey", "yay", "ugh", "hmm", "ah", "ha", "please", "thanks", "ok", "okay"], PosTag::Intj);
        map
    })
}

const NOUN_SUFFIXES: [&str; 8] = ["tion", "sion", "ness", "ment", "ity", "ence", "ance", "ship"];
const ADJ_SUFFIXES: [&str; 8] = ["ful", "ous", "ive", "able", "ible", "less", "ish", "est"];
const VERB_SUFFIXES: [&str; 2] = ["ing", "ed"];

pub fn is_punctuation_char(c: char) -> bool {
    c.is_ascii_punctuation()
}

fn tag_core(core: &str, sentence_initial: bool) -> PosTag {
    let lower = core.to_lowercase();
    if let Some(&tag) = lexicon().get(lower.as_str()) {
        return tag;
    }
    if core.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',')
        && core.chars().any(|c| c.is_ascii_digit())
    {
        return PosTag::Num;
    }
    let mut chars = core.chars();
    let first_upper = chars.next().is_some_and(|c| c.is_uppercase());
    if first_upper && !sentence_initial {
        return PosTag::Propn;
    }
    if lower.ends_with("ly") {
        return PosTag::Adv;
    }
    for suffix in NOUN_SUFFIXES {
        if lower.ends_with(suffix) {
            return PosTag::Noun;
        }
    }
    for suffix in ADJ_SUFFIXES {
        if lower.ends_with(suffix) {
            return PosTag::Adj;
        }
    }
    for suffix in VERB_SUFFIXES {
        if lower.ends_with(suffix) && lower.len() > suffix.len() + 1 {
            return PosTag::Verb;
        }
    }
    PosTag::Noun
}

/// Tags one review. Leading/trailing punctuation of each whitespace token
/// becomes PUNCT tags around the core's tag; sentence starts reset after
/// terminal marks.
pub fn tag_text(text: &str) -> Vec<PosTag> {
    let mut tags = Vec::new();
    let mut sentence_initial = true;
    for token in text.split_whitespace() {
        let core = token.trim_matches(|c: char| c.is_ascii_punctuation());
        let core_start = token.find(core).unwrap_or(0);
        for c in token[..core_start].chars() {
            if is_punctuation_char(c) {
                tags.push(PosTag::Punct);
            }
        }
        if !core.is_empty() {
            tags.push(tag_core(core, sentence_initial));
            sentence_initial = false;
        }
        let mut terminal = false;
        for c in token[core_start + core.len()..].chars() {
            if is_punctuation_char(c) {
                tags.push(PosTag::Punct);
                if matches!(c, '.' | '!' | '?') {
                    terminal = true;
                }
            }
        }
        if terminal {
            sentence_initial = true;
        }
    }
    tags
}
