//! Request and response documents.

use serde::{Deserialize, Serialize};

use uttt_core::{
    decode, BoardState, Digit, DigitSequence, FieldStatus, GameStatus, Mark, Opening, OpeningClass,
    OpeningConflict, Placement,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireStatus {
    InProgress,
    XWins,
    OWins,
    Draw,
}

impl From<GameStatus> for WireStatus {
    fn from(s: GameStatus) -> Self {
        match s {
            GameStatus::InProgress => WireStatus::InProgress,
            GameStatus::WonBy(Mark::X) => WireStatus::XWins,
            GameStatus::WonBy(Mark::O) => WireStatus::OWins,
            GameStatus::Draw => WireStatus::Draw,
        }
    }
}

/// Everything a client needs to render and play a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSnapshot {
    pub id: String,
    pub seq: DigitSequence,
    /// 81 cells, `.`/`X`/`O`, field-major then spot.
    pub board: String,
    pub to_move: Mark,
    /// `null` when the side to move may play in any open field.
    pub forced_field: Option<Digit>,
    pub status: WireStatus,
    pub field_status: Vec<FieldStatus>,
    /// `[field, spot]` pairs.
    pub legal_moves: Vec<[u8; 2]>,
    pub version: u64,
    pub created_at: u64,
    pub opening: Opening,
}

impl GameSnapshot {
    pub fn new(id: &str, seq: DigitSequence, state: &BoardState, created_at: u64) -> Self {
        GameSnapshot {
            id: id.to_string(),
            seq,
            board: state.cells_text(),
            to_move: state.to_move(),
            forced_field: state.forced_field(),
            status: state.status().into(),
            field_status: state.fields().iter().map(|f| f.status()).collect(),
            legal_moves: state
                .legal_moves()
                .into_iter()
                .map(|m| [m.field.value(), m.spot.value()])
                .collect(),
            version: state.move_count() as u64,
            created_at,
            opening: decode(seq),
        }
    }
}

/// A decoded opening with its verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpeningView {
    pub seq: DigitSequence,
    pub classification: OpeningClass,
    pub placements: [Placement; 4],
    pub x5_field: Digit,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conflict: Option<OpeningConflict>,
    /// Canonical 83-character board after the opening, when legal.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub board: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rejected_draws: Option<u32>,
}

impl OpeningView {
    pub fn of(seq: DigitSequence) -> Self {
        let opening = decode(seq);
        let applied = uttt_core::apply_opening(seq);
        OpeningView {
            seq,
            classification: uttt_core::classify(seq),
            placements: opening.placements,
            x5_field: opening.x5_field,
            conflict: applied.as_ref().err().copied(),
            board: applied.ok().map(|b| b.to_text()),
            rejected_draws: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateGameRequest {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub digits: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveRequest {
    pub field: u8,
    pub spot: u8,
    #[serde(default)]
    pub expected_version: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RollRequest {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub allow_forced_win: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyRequest {
    pub digits: String,
}
