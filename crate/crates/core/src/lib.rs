//! Clinical named-entity recognition over BRAT stand-off corpora.
//!
//! The pipeline runs segment → encode → tag → repair → decode → serialize:
//!
//! * [`brat`] reads and writes `.txt`/`.ann` pairs with code-point offsets.
//! * [`segment`] splits documents into sentences and offset-preserving tokens.
//! * [`bio`] converts mention spans to BIO label sequences and back.
//! * [`taggers`] holds the gazetteer, averaged-perceptron and external-process taggers.
//! * [`eval`] scores exact-match micro P/R/F1 and renders HTML diffs.
//! * [`pipeline`] ties these together over a `<root>/<split>/<doc>` corpus layout.

pub mod bio;
pub mod brat;
pub mod eval;
pub mod pipeline;
pub mod segment;
pub mod taggers;
pub mod text;
