//! Microblog user-portrait pipeline.
//!
//! Raw profiles and posts are validated ([`corpus`]), cleaned ([`cleaner`]),
//! segmented ([`segmenter`]) and counted against a psycholinguistic lexicon
//! ([`lexicon`]). A linear model maps the resulting category frequencies to
//! Big Five scores ([`model`]), and [`stats`] relates scores to profile
//! attributes. [`report`] runs the whole chain and writes a result bundle.

pub mod cleaner;
pub mod config;
pub mod corpus;
pub mod lexicon;
pub mod model;
pub mod report;
pub mod segmenter;
pub mod stats;
pub mod synth;
pub mod table;
