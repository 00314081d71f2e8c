//! Sentence splitting and word-level tokenization with code-point offsets.
//!
//! Sentences end after `.`, `!`, `?` or `;` when followed by whitespace, and
//! always at a line break. Tokens are maximal alphanumeric runs or single
//! punctuation characters.

use crate::brat::Language;
use crate::text::is_line_break;

/// Model-side sequence limit, `[CLS]` and `[SEP]` included.
pub const MODEL_MAX_SEQUENCE: usize = 256;
/// Word tokens per window once the two framing specials are reserved.
pub const DEFAULT_MAX_TOKENS: usize = MODEL_MAX_SEQUENCE - 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    /// `None` for an empty token list.
    pub fn new(tokens: Vec<Token>) -> Option<Self> {
        if tokens.is_empty() {
            None
        } else {
            Some(Sentence { tokens })
        }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn span_start(&self) -> usize {
        self.tokens[0].start
    }

    pub fn span_end(&self) -> usize {
        self.tokens[self.tokens.len() - 1].end
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.tokens
    }
}

const ABBREV_ES: &[&str] = &[
    "dr", "dra", "sr", "sra", "srta", "ud", "uds", "aprox", "pág", "núm", "fig", "tab", "vol", "cap", "art", "dcha",
    "izq", "izqda", "ej", "lat", "ant", "post",
];
const ABBREV_EN: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "approx", "e.g", "i.e", "vs", "fig", "no", "vol", "pt", "pts", "st", "resp",
];
const ABBREV_IT: &[&str] = &[
    "dr", "dott", "dott.ssa", "sig", "sig.ra", "prof", "ca", "pag", "fig", "vol", "es", "cfr",
];

fn abbreviations(language: Language) -> &'static [&'static str] {
    match language {
        Language::Es => ABBREV_ES,
        Language::En => ABBREV_EN,
        Language::It => ABBREV_IT,
    }
}

fn is_word_char(c: char) -> bool {
    // Combining diacritics keep decomposed accents inside their word.
    c.is_alphanumeric() || ('\u{0300}'..='\u{036F}').contains(&c)
}

/// True when the word ending just before `chars[dot]` is a guarded abbreviation.
fn ends_abbreviation(chars: &[char], dot: usize, language: Language) -> bool {
    let mut begin = dot;
    while begin > 0 && (is_word_char(chars[begin - 1]) || chars[begin - 1] == '.') {
        begin -= 1;
    }
    if begin == dot {
        return false;
    }
    let word: String = chars[begin..dot].iter().collect::<String>().to_lowercase();
    abbreviations(language).contains(&word.as_str())
}

/// Sentence ranges `[start, end)` in code points. Ranges are ordered, disjoint,
/// trimmed of surrounding whitespace, and together cover every non-whitespace
/// character.
pub fn split_sentences(text: &str, language: Language) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut ranges = Vec::new();
    let mut start: Option<usize> = None;
    let mut last_content = 0;

    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            if is_line_break(c) {
                if let Some(s) = start.take() {
                    ranges.push((s, last_content));
                }
            }
            continue;
        }
        if start.is_none() {
            start = Some(i);
        }
        last_content = i + 1;

        let next_is_space = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
        let terminal = matches!(c, '.' | '!' | '?' | ';');
        if terminal && next_is_space && !(c == '.' && ends_abbreviation(&chars, i, language)) {
            if let Some(s) = start.take() {
                ranges.push((s, i + 1));
            }
        }
    }
    if let Some(s) = start {
        ranges.push((s, last_content));
    }
    ranges
}

/// Word-level tokens of `text[range.0..range.1]` with absolute offsets.
/// Out-of-range bounds are clamped to the text.
pub fn tokenize(text: &str, range: (usize, usize)) -> Vec<Token> {
    let (from, to) = range;
    let mut tokens = Vec::new();
    let mut word: Option<(usize, String)> = None;

    let flush = |word: &mut Option<(usize, String)>, end: usize, tokens: &mut Vec<Token>| {
        if let Some((start, surface)) = word.take() {
            tokens.push(Token { surface, start, end });
        }
    };

    let mut pos = from;
    for c in text.chars().skip(from).take(to.saturating_sub(from)) {
        if is_word_char(c) {
            word.get_or_insert_with(|| (pos, String::new())).1.push(c);
        } else {
            flush(&mut word, pos, &mut tokens);
            if !c.is_whitespace() {
                tokens.push(Token {
                    surface: c.to_string(),
                    start: pos,
                    end: pos + 1,
                });
            }
        }
        pos += 1;
    }
    flush(&mut word, pos, &mut tokens);
    tokens
}

fn is_soft_break(token: &Token) -> bool {
    token.surface == "," || token.surface == ";"
}

/// Splits an over-long sentence into consecutive chunks of at most
/// `max_tokens`, breaking after the last `,`/`;` inside each window when one
/// exists. Flattening the result gives back the input tokens.
///
/// # Panics
///
/// If `max_tokens < 2`.
pub fn enforce_window(sentence: Sentence, max_tokens: usize) -> Vec<Sentence> {
    assert!(max_tokens >= 2, "window budget must be at least 2 tokens");
    if sentence.len() <= max_tokens {
        return vec![sentence];
    }
    let mut rest = sentence.into_tokens();
    let mut chunks = Vec::new();
    while rest.len() > max_tokens {
        let cut = rest[..max_tokens]
            .iter()
            .rposition(is_soft_break)
            .map_or(max_tokens, |i| i + 1);
        let tail = rest.split_off(cut);
        chunks.push(Sentence { tokens: rest });
        rest = tail;
    }
    chunks.push(Sentence { tokens: rest });
    chunks
}

/// Full segmentation of a document: sentences, tokens, then windows.
pub fn segment_text(text: &str, language: Language, max_tokens: usize) -> Vec<Sentence> {
    split_sentences(text, language)
        .into_iter()
        .filter_map(|range| Sentence::new(tokenize(text, range)))
        .flat_map(|s| enforce_window(s, max_tokens))
        .collect()
}
