use crate::segment::Sentence;

const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Character-class shape with repeats collapsed: `Aspirina` → `Xx`, `3,5` → `dpd`.
pub fn word_shape(surface: &str) -> String {
    let mut shape = String::new();
    for c in surface.chars() {
        let class = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            'p'
        };
        if !shape.ends_with(class) {
            shape.push(class);
        }
    }
    shape
}

fn flag(name: &str, on: bool) -> String {
    format!("{name}={}", u8::from(on))
}

/// Features of token `index`, always in the same order.
///
/// # Panics
///
/// If `index` is out of bounds.
pub fn extract_features(sentence: &Sentence, index: usize) -> Vec<String> {
    let tokens = sentence.tokens();
    let surface = tokens[index].surface.as_str();
    let lower = surface.to_lowercase();
    let lower_chars: Vec<char> = lower.chars().collect();

    let neighbor = |offset: isize| -> String {
        let j = index as isize + offset;
        if j < 0 {
            BOS.to_string()
        } else if j as usize >= tokens.len() {
            EOS.to_string()
        } else {
            tokens[j as usize].surface.to_lowercase()
        }
    };

    let mut feats = Vec::with_capacity(24);
    feats.push(format!("lower={lower}"));
    feats.push(format!("shape={}", word_shape(surface)));
    for n in 1..=3.min(lower_chars.len()) {
        let prefix: String = lower_chars[..n].iter().collect();
        let suffix: String = lower_chars[lower_chars.len() - n..].iter().collect();
        feats.push(format!("pre{n}={prefix}"));
        feats.push(format!("suf{n}={suffix}"));
    }

    let has_letters = surface.chars().any(char::is_alphabetic);
    feats.push(flag("isdigit", surface.chars().all(char::is_numeric)));
    feats.push(flag("ispunct", !surface.chars().any(char::is_alphanumeric)));
    feats.push(flag("cap", surface.chars().next().is_some_and(char::is_uppercase)));
    feats.push(flag(
        "allcaps",
        has_letters && surface.chars().filter(|c| c.is_alphabetic()).all(char::is_uppercase),
    ));

    for offset in [-2isize, -1, 1, 2] {
        feats.push(format!("w{offset:+}={}", neighbor(offset)));
    }
    feats.push(format!("bigram={}|{lower}", neighbor(-1)));
    feats
}
