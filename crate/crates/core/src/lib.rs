//! Ultimate Tic-Tac-Toe with randomized five-digit openings.
//!
//! [`rules`] is the game engine, [`opening`] turns five random digits into the
//! first four moves, and [`census`] classifies every possible digit sequence.

pub mod census;
pub mod digits;
pub mod opening;
pub mod rules;

pub use census::{census, enumerate_all, expected_rejection_fraction, CensusReport, Fraction};
pub use digits::{DigitSource, UniformDigits};
pub use opening::{
    apply_opening, classify, decode, matches_forced_win_pattern, roll, DigitSequence, Opening,
    OpeningClass, OpeningConflict, Placement, RetriesExhausted, RollPolicy, RolledOpening,
};
pub use rules::{
    line_winner, BoardState, Digit, FieldStatus, GameStatus, IllegalMove, IllegalReason, Mark,
    SpotRef,
};
