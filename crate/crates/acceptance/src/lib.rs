//! Intentionally empty; the criteria live in `tests/acceptance.rs`.
