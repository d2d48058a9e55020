//! Acceptance checks for `gauge-ring` live in `tests/acceptance.rs`; this
//! package has no library code of its own.
