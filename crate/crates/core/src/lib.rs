//! Agent-based visualization of streaming text.
//!
//! Every significant word in a text stream becomes an agent: a labelled
//! circle whose radius follows the word's document frequency. Agents move
//! so that their displayed pairwise distances approach an ideal distance
//! matrix derived from frequency and co-occurrence, which makes related
//! words cluster and overlap.
//!
//! The crate is organised bottom-up:
//!
//! - [`layout`]: the distance-matrix velocity law, behaviors, stability.
//! - [`euler`]: radii and ideal distances approximating area-proportional
//!   circle overlaps.
//! - [`analyzer`]: sliding article window, document frequency, co-occurrence.
//! - [`scraper`]: feed parsing, markup stripping, word filtering, the
//!   article wire format and replay.
//! - [`session`]: the orchestrating state machine that turns articles into
//!   frames.
//! - [`svg`]: static snapshot rendering.

pub mod analyzer;
pub mod error;
pub mod euler;
pub mod geometry;
pub mod layout;
pub mod scraper;
pub mod session;
pub mod settings;
pub mod svg;
pub mod synthetic;

pub use error::{Error, Result};
pub use geometry::{Rect, Vec2};
