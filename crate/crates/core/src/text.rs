//! Code-point indexing over UTF-8 strings.
//!
//! All offsets in this crate count Unicode scalar values, which is what BRAT
//! tooling writes into `.ann` files. Rust strings index by byte, so anything
//! that slices by offset goes through [`CharIndex`].

/// Byte positions of every code point boundary in a string.
#[derive(Debug, Clone)]
pub struct CharIndex<'a> {
    text: &'a str,
    // boundaries[i] is the byte offset of code point i; the final entry is text.len().
    boundaries: Vec<usize>,
}

impl<'a> CharIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut boundaries: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        boundaries.push(text.len());
        CharIndex { text, boundaries }
    }

    /// Number of code points.
    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn text(&self) -> &'a str {
        self.text
    }

    /// Code-point slice `[start, end)`, or `None` when out of range or inverted.
    pub fn slice(&self, start: usize, end: usize) -> Option<&'a str> {
        if start > end || end > self.len() {
            return None;
        }
        Some(&self.text[self.boundaries[start]..self.boundaries[end]])
    }

    pub fn byte_offset(&self, char_offset: usize) -> Option<usize> {
        self.boundaries.get(char_offset).copied()
    }
}

/// Code-point length of a string.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Hard line breaks. Sentences never cross one, and BRAT surfaces cannot hold one.
pub fn is_line_break(c: char) -> bool {
    matches!(
        c,
        '\n' | '\r' | '\u{0B}' | '\u{0C}' | '\u{85}' | '\u{2028}' | '\u{2029}'
    )
}
