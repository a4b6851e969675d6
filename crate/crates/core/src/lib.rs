//! Audit pipeline for deleted DOIs.
//!
//! Two registry snapshots are normalized and diffed on disk; identifiers that
//! disappeared are checked against the registration-agency lookup, the DOI
//! redirect chain, and the metadata API, then sorted into deletion classes.
//! The analytics module reproduces the document-type, alias-group, prefix,
//! and suffix-change statistics over the classified set, and [`report`]
//! writes them as CSV, JSON, or markdown tables.
//!
//! The guide under `book/` walks through each stage; its code samples are
//! compiled and run as doctests of this crate.

pub mod analytics;
pub mod classifier;
pub mod doi;
mod fsutil;
pub mod pipeline;
pub mod report;
pub mod resolvers;
pub mod snapshot;
pub mod synth;

pub use doi::{normalize_doi, split_doi, MalformedDoi, NormalizedDoi, RawDoi};
pub use fsutil::write_atomic;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/snapshots.md")]
    mod snapshots {}
    #[doc = include_str!("../../../book/src/evidence.md")]
    mod evidence {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
    #[doc = include_str!("../../../book/src/similarity.md")]
    mod similarity {}
    #[doc = include_str!("../../../book/src/edit-scripts.md")]
    mod edit_scripts {}
    #[doc = include_str!("../../../book/src/prefixes.md")]
    mod prefixes {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
