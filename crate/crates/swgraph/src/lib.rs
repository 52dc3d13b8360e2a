//! Batch-incremental minimum spanning forests and the sliding-window graph
//! structures that fall out of them.
//!
//! The core is a rake-compress tree over a bounded-degree forest
//! ([`rc::RcForest`]) supporting batch link, batch cut, and heaviest-edge
//! path queries. On top of it sit compressed path tree extraction
//! ([`cpt`]), the batch-incremental minimum spanning forest ([`msf`]), and
//! seven batch sliding-window structures ([`window`]): connectivity (lazy
//! and eager), bipartiteness, approximate MSF weight, k-certificates,
//! cycle-freeness, and cut sparsifiers. Every structure is validated
//! against the brute-force references in [`oracle`].
//!
//! Start with the runnable examples (`cargo run --example connectivity`,
//! `--example msf_stream`, ...) or the stream-driver binary (`swgraph`).

pub mod cli;
pub mod cpt;
pub mod graph;
mod mix;
pub mod msf;
pub mod oracle;
pub mod rc;
pub mod window;
