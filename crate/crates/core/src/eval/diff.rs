//! Colour-coded HTML comparison of gold and predicted mentions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::brat::{EntityMention, TextDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiffCategory {
    Correct,
    PartialPrediction,
    PartialGold,
    Spurious,
    Missed,
}

impl DiffCategory {
    /// Highest first. Where spans overlap, the higher category paints the
    /// characters.
    pub const PRIORITY: [DiffCategory; 5] = [
        DiffCategory::Correct,
        DiffCategory::PartialPrediction,
        DiffCategory::PartialGold,
        DiffCategory::Spurious,
        DiffCategory::Missed,
    ];

    pub fn class(self) -> &'static str {
        match self {
            DiffCategory::Correct => "correct",
            DiffCategory::PartialPrediction => "partial-pred",
            DiffCategory::PartialGold => "partial-gold",
            DiffCategory::Spurious => "spurious",
            DiffCategory::Missed => "missed",
        }
    }

    fn title(self) -> &'static str {
        match self {
            DiffCategory::Correct => "Correct",
            DiffCategory::PartialPrediction => "Partial prediction",
            DiffCategory::PartialGold => "Gold extent of partial",
            DiffCategory::Spurious => "Spurious",
            DiffCategory::Missed => "Missed",
        }
    }

    fn style(self) -> &'static str {
        match self {
            DiffCategory::Correct => "background:#8fd18f",
            DiffCategory::PartialPrediction => "background:#f5e663",
            DiffCategory::PartialGold => "background:#f5b253",
            DiffCategory::Spurious => "background:#f08080",
            DiffCategory::Missed => "color:#666;text-decoration:underline",
        }
    }
}

/// A mention with its category. `gold` tells which side it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategorizedMention {
    pub category: DiffCategory,
    pub label: String,
    pub start: usize,
    pub end: usize,
    pub gold: bool,
}

fn overlaps(a: &EntityMention, b: &EntityMention) -> bool {
    a.label == b.label && a.start < b.end && b.start < a.end
}

fn same(a: &EntityMention, b: &EntityMention) -> bool {
    a.label == b.label && a.start == b.start && a.end == b.end
}

/// Assigns each distinct gold and predicted mention one category.
///
/// Predictions: exact match is Correct, same-label overlap is
/// PartialPrediction, otherwise Spurious. Gold: exact match is Correct, a
/// gold mention overlapped by a partial prediction is PartialGold, one with
/// no prediction overlapping it is Missed.
pub fn categorize(gold: &[EntityMention], pred: &[EntityMention]) -> Vec<CategorizedMention> {
    let dedup = |list: &[EntityMention]| -> Vec<EntityMention> {
        let mut v: Vec<EntityMention> = Vec::new();
        for m in list {
            if !v.iter().any(|x| same(x, m)) {
                v.push(m.clone());
            }
        }
        v.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        v
    };
    let gold = dedup(gold);
    let pred = dedup(pred);

    let mut out = Vec::new();
    for g in &gold {
        let category = if pred.iter().any(|p| same(p, g)) {
            DiffCategory::Correct
        } else if pred.iter().any(|p| overlaps(p, g)) {
            DiffCategory::PartialGold
        } else {
            DiffCategory::Missed
        };
        out.push(CategorizedMention {
            category,
            label: g.label.clone(),
            start: g.start,
            end: g.end,
            gold: true,
        });
    }
    for p in &pred {
        let category = if gold.iter().any(|g| same(p, g)) {
            // Already emitted from the gold side.
            continue;
        } else if gold.iter().any(|g| overlaps(p, g)) {
            DiffCategory::PartialPrediction
        } else {
            DiffCategory::Spurious
        };
        out.push(CategorizedMention {
            category,
            label: p.label.clone(),
            start: p.start,
            end: p.end,
            gold: false,
        });
    }
    out
}

/// Mentions per category.
pub fn category_counts(items: &[CategorizedMention]) -> BTreeMap<DiffCategory, usize> {
    let mut counts: BTreeMap<DiffCategory, usize> = DiffCategory::PRIORITY.iter().map(|c| (*c, 0)).collect();
    for item in items {
        *counts.entry(item.category).or_default() += 1;
    }
    counts
}

/// A maximal run of characters painted by one mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Highlight {
    pub start: usize,
    pub end: usize,
    pub category: DiffCategory,
    pub label: String,
}

/// Non-overlapping highlighted regions, in text order. Each character takes
/// the highest-priority category among the mentions covering it; ties go to
/// the mention listed first by [`categorize`].
pub fn highlights(text_len: usize, items: &[CategorizedMention]) -> Vec<Highlight> {
    let rank = |c: DiffCategory| {
        DiffCategory::PRIORITY
            .iter()
            .position(|x| *x == c)
            .unwrap_or(usize::MAX)
    };
    let mut owner: Vec<Option<usize>> = vec![None; text_len];
    for (i, item) in items.iter().enumerate() {
        for slot in owner.iter_mut().take(item.end.min(text_len)).skip(item.start) {
            let better = match slot {
                None => true,
                Some(j) => rank(item.category) < rank(items[*j].category),
            };
            if better {
                *slot = Some(i);
            }
        }
    }

    let mut out: Vec<Highlight> = Vec::new();
    let mut pos = 0;
    while pos < text_len {
        let Some(i) = owner[pos] else {
            pos += 1;
            continue;
        };
        let start = pos;
        while pos < text_len && owner[pos] == Some(i) {
            pos += 1;
        }
        out.push(Highlight {
            start,
            end: pos,
            category: items[i].category,
            label: items[i].label.clone(),
        });
    }
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Standalone HTML page showing `doc` with gold and predicted mentions
/// highlighted by category, plus a legend and per-category counts.
pub fn render_diff(doc: &TextDocument, gold: &[EntityMention], pred: &[EntityMention]) -> String {
    let chars: Vec<char> = doc.text().chars().collect();
    let items = categorize(gold, pred);
    let counts = category_counts(&items);
    let regions = highlights(chars.len(), &items);

    let mut html = String::new();
    let title = escape(doc.doc_id());
    let _ = writeln!(html, "<!DOCTYPE html>");
    let _ = writeln!(html, "<html lang=\"{}\">", doc.language());
    let _ = writeln!(html, "<head>\n<meta charset=\"utf-8\">\n<title>{title}</title>");
    let _ = writeln!(html, "<style>");
    let _ = writeln!(html, "body{{font-family:sans-serif;max-width:60em;margin:2em auto}}");
    let _ = writeln!(html, ".text{{white-space:pre-wrap;line-height:1.6}}");
    for c in DiffCategory::PRIORITY {
        let _ = writeln!(html, ".{}{{{}}}", c.class(), c.style());
    }
    let _ = writeln!(html, "</style>\n</head>\n<body>");
    let _ = writeln!(html, "<h1>{title}</h1>");

    let _ = writeln!(html, "<ul class=\"legend\">");
    for c in DiffCategory::PRIORITY {
        let _ = writeln!(
            html,
            "<li><span class=\"{}\">{}</span>: <span class=\"count\" data-category=\"{}\">{}</span></li>",
            c.class(),
            c.title(),
            c.class(),
            counts[&c]
        );
    }
    let _ = writeln!(html, "</ul>");

    html.push_str("<div class=\"text\">");
    let mut pos = 0;
    for r in &regions {
        html.push_str(&escape(&chars[pos..r.start].iter().collect::<String>()));
        let _ = write!(
            html,
            "<span class=\"{}\" data-start=\"{}\" data-end=\"{}\" title=\"{}\">{}</span>",
            r.category.class(),
            r.start,
            r.end,
            escape(&r.label),
            escape(&chars[r.start..r.end].iter().collect::<String>())
        );
        pos = r.end;
    }
    html.push_str(&escape(&chars[pos..].iter().collect::<String>()));
    html.push_str("</div>\n</body>\n</html>\n");
    html
}
