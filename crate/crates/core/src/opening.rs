//! Randomized openings.
//!
//! Five digits `d1..d5` place the first four marks mechanically:
//! X at `(d1, d2)`, O at `(d2, d3)`, X at `(d3, d4)`, O at `(d4, d5)`.
//! Each spot doubles as the next placement's field, so the send rule is
//! satisfied by construction and the first player-controlled move (X's
//! fifth) is sent to field `d5`.

use std::fmt;
use std::num::NonZeroU32;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digits::DigitSource;
use crate::rules::{BoardState, Digit, IllegalReason, Mark, SpotRef};

/// Number of distinct digit sequences, 9^5.
pub const SEQUENCE_COUNT: u32 = 59_049;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DigitSequence([Digit; 5]);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseSequenceError {
    #[error("expected exactly 5 digits, got {0} characters")]
    Length(usize),
    #[error("invalid character {0:?}: digits must be 0-8")]
    Char(char),
}

impl DigitSequence {
    pub fn new(digits: [Digit; 5]) -> Self {
        DigitSequence(digits)
    }

    pub fn digits(&self) -> [Digit; 5] {
        self.0
    }

    /// Sequence number `n` in lexicographic order, for `n < 59049`.
    pub fn from_rank(mut n: u32) -> Option<Self> {
        if n >= SEQUENCE_COUNT {
            return None;
        }
        let mut d = [Digit::CENTER; 5];
        for slot in d.iter_mut().rev() {
            *slot = Digit::new((n % 9) as u8).ok()?;
            n /= 9;
        }
        Some(DigitSequence(d))
    }

    pub fn rank(&self) -> u32 {
        self.0.iter().fold(0, |acc, d| acc * 9 + d.value() as u32)
    }

    /// Every sequence, lexicographically.
    pub fn all() -> impl Iterator<Item = DigitSequence> {
        (0..SEQUENCE_COUNT).filter_map(DigitSequence::from_rank)
    }

    pub fn draw(source: &mut impl DigitSource) -> Self {
        DigitSequence(std::array::from_fn(|_| source.next_digit()))
    }
}

impl FromStr for DigitSequence {
    type Err = ParseSequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 5 {
            return Err(ParseSequenceError::Length(chars.len()));
        }
        let mut d = [Digit::CENTER; 5];
        for (slot, &ch) in d.iter_mut().zip(&chars) {
            *slot = match ch {
                '0'..='8' => Digit::new(ch as u8 - b'0').expect("checked range"),
                _ => return Err(ParseSequenceError::Char(ch)),
            };
        }
        Ok(DigitSequence(d))
    }
}

impl TryFrom<String> for DigitSequence {
    type Error = ParseSequenceError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DigitSequence> for String {
    fn from(seq: DigitSequence) -> String {
        seq.to_string()
    }
}

impl fmt::Display for DigitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Placement {
    pub mark: Mark,
    pub field: Digit,
    pub spot: Digit,
}

impl Placement {
    pub fn at(&self) -> SpotRef {
        SpotRef::new(self.field, self.spot)
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ({}, {})", self.mark, self.field, self.spot)
    }
}

/// The four mechanically placed marks plus the field X's first own move goes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Opening {
    pub placements: [Placement; 4],
    pub x5_field: Digit,
}

pub fn decode(seq: DigitSequence) -> Opening {
    let d = seq.0;
    let placements = std::array::from_fn(|k| Placement {
        mark: if k % 2 == 0 { Mark::X } else { Mark::O },
        field: d[k],
        spot: d[k + 1],
    });
    Opening {
        placements,
        x5_field: d[4],
    }
}

/// `4 4 a 4 b` with `a ≠ 4` and `b ≠ 4`. Syntactic only; ignores legality.
pub fn matches_forced_win_pattern(seq: DigitSequence) -> bool {
    let [d1, d2, d3, d4, d5] = seq.0;
    let four = Digit::CENTER;
    d1 == four && d2 == four && d3 != four && d4 == four && d5 != four
}

/// A decoded placement that lands on an occupied cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Error)]
#[error("placement {move_index} targets occupied cell {at}")]
pub struct OpeningConflict {
    /// 1-based index of the offending placement, in `2..=4`.
    pub move_index: u8,
    pub at: SpotRef,
}

/// Plays the decoded placements on an empty board, stopping at the first collision.
pub fn apply_opening(seq: DigitSequence) -> Result<BoardState, OpeningConflict> {
    let opening = decode(seq);
    let mut board = BoardState::new();
    for (k, p) in opening.placements.iter().enumerate() {
        if let Err(e) = board.apply_move(p.at()) {
            // The chain property rules out every other rejection.
            debug_assert_eq!(e.reason, IllegalReason::CellOccupied);
            return Err(OpeningConflict {
                move_index: k as u8 + 1,
                at: p.at(),
            });
        }
    }
    Ok(board)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum OpeningClass {
    Playable,
    ForcedWinPattern,
    Illegal { conflict_index: u8 },
}

impl fmt::Display for OpeningClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpeningClass::Playable => f.write_str("Playable"),
            OpeningClass::ForcedWinPattern => f.write_str("ForcedWinPattern"),
            OpeningClass::Illegal { conflict_index } => write!(f, "Illegal({conflict_index})"),
        }
    }
}

/// Legality first, then the forced-win digit pattern.
pub fn classify(seq: DigitSequence) -> OpeningClass {
    match apply_opening(seq) {
        Err(c) => OpeningClass::Illegal {
            conflict_index: c.move_index,
        },
        Ok(_) if matches_forced_win_pattern(seq) => OpeningClass::ForcedWinPattern,
        Ok(_) => OpeningClass::Playable,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollPolicy {
    pub max_retries: NonZeroU32,
    pub reject_forced_win_pattern: bool,
}

impl Default for RollPolicy {
    fn default() -> Self {
        RollPolicy {
            max_retries: NonZeroU32::new(1000).unwrap(),
            reject_forced_win_pattern: true,
        }
    }
}

impl RollPolicy {
    pub fn allowing_forced_win() -> Self {
        RollPolicy {
            reject_forced_win_pattern: false,
            ..Default::default()
        }
    }

    pub fn accepts(&self, class: OpeningClass) -> bool {
        match class {
            OpeningClass::Playable => true,
            OpeningClass::ForcedWinPattern => !self.reject_forced_win_pattern,
            OpeningClass::Illegal { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no acceptable opening after {0} draws")]
pub struct RetriesExhausted(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RolledOpening {
    pub seq: DigitSequence,
    pub opening: Opening,
    pub class: OpeningClass,
    pub board: BoardState,
    /// Draws discarded before this one was accepted.
    pub rejected_draws: u32,
}

/// Draws five digits at a time until the policy accepts the sequence.
pub fn roll(
    source: &mut impl DigitSource,
    policy: &RollPolicy,
) -> Result<RolledOpening, RetriesExhausted> {
    let limit = policy.max_retries.get();
    for rejected_draws in 0..limit {
        let seq = DigitSequence::draw(source);
        let class = classify(seq);
        if !policy.accepts(class) {
            continue;
        }
        let board = apply_opening(seq).expect("accepted sequences are legal");
        return Ok(RolledOpening {
            seq,
            opening: decode(seq),
            class,
            board,
            rejected_draws,
        });
    }
    Err(RetriesExhausted(limit))
}
