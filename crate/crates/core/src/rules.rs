//! Board model and move semantics.
//!
//! Fields and spots are both numbered 0..=8 in row-major order, so index 4 is
//! the centre. A board cell is addressed as `(field, spot)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The eight three-in-a-row lines of a 3×3 grid: rows, columns, diagonals.
pub const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

/// A value in `0..=8`, naming a field or a spot within a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Digit(u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("digit out of range: {0} (expected 0..=8)")]
pub struct DigitOutOfRange(pub i64);

impl Digit {
    pub const CENTER: Digit = Digit(4);

    pub fn new(value: u8) -> Result<Self, DigitOutOfRange> {
        if value <= 8 {
            Ok(Digit(value))
        } else {
            Err(DigitOutOfRange(value as i64))
        }
    }

    /// All nine digits in ascending order.
    pub fn all() -> impl Iterator<Item = Digit> {
        (0..9).map(Digit)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl TryFrom<u8> for Digit {
    type Error = DigitOutOfRange;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Digit::new(value)
    }
}

impl TryFrom<i64> for Digit {
    type Error = DigitOutOfRange;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        u8::try_from(value)
            .ok()
            .and_then(|v| Digit::new(v).ok())
            .ok_or(DigitOutOfRange(value))
    }
}

impl From<Digit> for u8 {
    fn from(d: Digit) -> u8 {
        d.0
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One of the 81 board cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpotRef {
    pub field: Digit,
    pub spot: Digit,
}

impl SpotRef {
    pub fn new(field: Digit, spot: Digit) -> Self {
        SpotRef { field, spot }
    }

    /// Builds a reference from raw indices, rejecting anything outside `0..=8`.
    pub fn try_from_indices(field: u8, spot: u8) -> Result<Self, DigitOutOfRange> {
        Ok(SpotRef::new(Digit::new(field)?, Digit::new(spot)?))
    }

    /// Position in the canonical field-major, spot-minor order.
    pub fn linear_index(self) -> usize {
        self.field.index() * 9 + self.spot.index()
    }

    pub fn all() -> impl Iterator<Item = SpotRef> {
        Digit::all().flat_map(|f| Digit::all().map(move |s| SpotRef::new(f, s)))
    }
}

impl fmt::Display for SpotRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.field, self.spot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mark {
    X,
    O,
}

impl Mark {
    pub fn opponent(self) -> Mark {
        match self {
            Mark::X => Mark::O,
            Mark::O => Mark::X,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Mark::X => 'X',
            Mark::O => 'O',
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

pub type Cell = Option<Mark>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldStatus {
    Open,
    WonByX,
    WonByO,
    Drawn,
}

impl FieldStatus {
    pub fn is_open(self) -> bool {
        self == FieldStatus::Open
    }

    pub fn winner(self) -> Option<Mark> {
        match self {
            FieldStatus::WonByX => Some(Mark::X),
            FieldStatus::WonByO => Some(Mark::O),
            _ => None,
        }
    }

    fn won_by(mark: Mark) -> Self {
        match mark {
            Mark::X => FieldStatus::WonByX,
            Mark::O => FieldStatus::WonByO,
        }
    }
}

/// Returns the mark occupying any complete line, checking rows, then columns,
/// then diagonals.
pub fn line_winner(cells: &[Cell; 9]) -> Option<Mark> {
    LINES.iter().find_map(|&[a, b, c]| match cells[a] {
        Some(m) if cells[b] == Some(m) && cells[c] == Some(m) => Some(m),
        _ => None,
    })
}

/// One of the nine miniature boards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldState {
    cells: [Cell; 9],
    status: FieldStatus,
}

impl Default for FieldState {
    fn default() -> Self {
        FieldState {
            cells: [None; 9],
            status: FieldStatus::Open,
        }
    }
}

impl FieldState {
    pub fn cells(&self) -> &[Cell; 9] {
        &self.cells
    }

    pub fn status(&self) -> FieldStatus {
        self.status
    }

    fn place(&mut self, spot: Digit, mark: Mark) {
        debug_assert!(self.status.is_open() && self.cells[spot.index()].is_none());
        self.cells[spot.index()] = Some(mark);
        self.status = Self::status_of(&self.cells);
    }

    fn status_of(cells: &[Cell; 9]) -> FieldStatus {
        match line_winner(cells) {
            Some(m) => FieldStatus::won_by(m),
            None if cells.iter().all(Option::is_some) => FieldStatus::Drawn,
            None => FieldStatus::Open,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "winner", rename_all = "snake_case")]
pub enum GameStatus {
    InProgress,
    WonBy(Mark),
    Draw,
}

impl GameStatus {
    pub fn is_over(self) -> bool {
        self != GameStatus::InProgress
    }
}

impl fmt::Display for GameStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameStatus::InProgress => f.write_str("in progress"),
            GameStatus::WonBy(m) => write!(f, "{m} wins"),
            GameStatus::Draw => f.write_str("draw"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IllegalReason {
    GameOver,
    WrongField,
    FieldClosed,
    CellOccupied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("illegal move at {at}: {reason:?}")]
pub struct IllegalMove {
    pub at: SpotRef,
    pub reason: IllegalReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseBoardError {
    #[error("expected 83 characters, got {0}")]
    Length(usize),
    #[error("unexpected character {ch:?} at position {pos}")]
    Char { pos: usize, ch: char },
    #[error("mark counts violate alternation (X={x}, O={o})")]
    Parity { x: usize, o: usize },
    #[error("side to move does not match mark counts")]
    TurnMismatch,
    #[error("forced field {0} is not open")]
    ForcedFieldClosed(Digit),
    #[error("a closed field contains marks placed after it closed")]
    OverfilledField(Digit),
}

/// Complete game position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoardState {
    fields: [FieldState; 9],
    to_move: Mark,
    forced_field: Option<Digit>,
    history: Vec<(Mark, SpotRef)>,
}

impl Default for BoardState {
    fn default() -> Self {
        Self::new()
    }
}

impl BoardState {
    pub fn new() -> Self {
        BoardState {
            fields: [FieldState::default(); 9],
            to_move: Mark::X,
            forced_field: None,
            history: Vec::new(),
        }
    }

    pub fn fields(&self) -> &[FieldState; 9] {
        &self.fields
    }

    pub fn field(&self, field: Digit) -> &FieldState {
        &self.fields[field.index()]
    }

    pub fn cell(&self, at: SpotRef) -> Cell {
        self.fields[at.field.index()].cells[at.spot.index()]
    }

    pub fn to_move(&self) -> Mark {
        self.to_move
    }

    /// `None` means the side to move may play in any open field.
    pub fn forced_field(&self) -> Option<Digit> {
        self.forced_field
    }

    pub fn move_count(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[(Mark, SpotRef)] {
        &self.history
    }

    pub fn count_marks(&self, mark: Mark) -> usize {
        self.fields
            .iter()
            .flat_map(|f| f.cells.iter())
            .filter(|&&c| c == Some(mark))
            .count()
    }

    pub fn status(&self) -> GameStatus {
        let macro_cells: [Cell; 9] = std::array::from_fn(|i| self.fields[i].status.winner());
        if let Some(m) = line_winner(&macro_cells) {
            GameStatus::WonBy(m)
        } else if self.fields.iter().all(|f| !f.status.is_open()) {
            GameStatus::Draw
        } else {
            GameStatus::InProgress
        }
    }

    /// Legal moves in canonical order. Empty once the game is over.
    pub fn legal_moves(&self) -> Vec<SpotRef> {
        if self.status().is_over() {
            return Vec::new();
        }
        let fields: Vec<Digit> = match self.forced_field {
            Some(f) => vec![f],
            None => Digit::all()
                .filter(|f| self.fields[f.index()].status.is_open())
                .collect(),
        };
        fields
            .into_iter()
            .flat_map(|f| {
                Digit::all()
                    .map(move |s| SpotRef::new(f, s))
                    .filter(|&at| self.cell(at).is_none())
            })
            .collect()
    }

    /// Why `at` would be rejected, if it would be.
    pub fn check_move(&self, at: SpotRef) -> Result<(), IllegalMove> {
        let reason = if self.status().is_over() {
            Some(IllegalReason::GameOver)
        } else if self.forced_field.is_some_and(|f| f != at.field) {
            Some(IllegalReason::WrongField)
        } else if !self.fields[at.field.index()].status.is_open() {
            Some(IllegalReason::FieldClosed)
        } else if self.cell(at).is_some() {
            Some(IllegalReason::CellOccupied)
        } else {
            None
        };
        match reason {
            Some(reason) => Err(IllegalMove { at, reason }),
            None => Ok(()),
        }
    }

    /// Places the side to move's mark at `at`. On error the state is untouched.
    pub fn apply_move(&mut self, at: SpotRef) -> Result<(), IllegalMove> {
        self.check_move(at)?;
        let mark = self.to_move;
        self.fields[at.field.index()].place(at.spot, mark);
        self.history.push((mark, at));
        self.to_move = mark.opponent();
        self.forced_field = self.fields[at.spot.index()]
            .status
            .is_open()
            .then_some(at.spot);
        Ok(())
    }

    /// Non-mutating form of [`apply_move`](Self::apply_move).
    pub fn with_move(&self, at: SpotRef) -> Result<BoardState, IllegalMove> {
        let mut next = self.clone();
        next.apply_move(at)?;
        Ok(next)
    }

    /// Replays `moves` from an empty board.
    pub fn replay<I>(moves: I) -> Result<BoardState, IllegalMove>
    where
        I: IntoIterator<Item = SpotRef>,
    {
        let mut board = BoardState::new();
        for at in moves {
            board.apply_move(at)?;
        }
        Ok(board)
    }

    /// The 81 cells as `.`/`X`/`O`, field-major.
    pub fn cells_text(&self) -> String {
        self.fields
            .iter()
            .flat_map(|f| f.cells.iter())
            .map(|c| c.map_or('.', Mark::as_char))
            .collect()
    }

    /// Canonical 83-character form: 81 cells, side to move, forced field (`-` for any).
    pub fn to_text(&self) -> String {
        let mut s = self.cells_text();
        s.push(self.to_move.as_char());
        s.push(match self.forced_field {
            Some(d) => char::from(b'0' + d.value()),
            None => '-',
        });
        s
    }

    /// Parses the canonical text form.
    ///
    /// Move order can't be recovered from the text, so the rebuilt history
    /// lists X and O marks alternately, each in field-major order.
    pub fn from_text(text: &str) -> Result<BoardState, ParseBoardError> {
        let chars: Vec<char> = text.chars().collect();
        if chars.len() != 83 {
            return Err(ParseBoardError::Length(chars.len()));
        }
        let mut board = BoardState::new();
        let mut xs = Vec::new();
        let mut os = Vec::new();
        for (pos, &ch) in chars[..81].iter().enumerate() {
            let at = SpotRef::new(Digit((pos / 9) as u8), Digit((pos % 9) as u8));
            let cell = match ch {
                '.' => None,
                'X' => Some(Mark::X),
                'O' => Some(Mark::O),
                _ => return Err(ParseBoardError::Char { pos, ch }),
            };
            board.fields[at.field.index()].cells[at.spot.index()] = cell;
            match cell {
                Some(Mark::X) => xs.push(at),
                Some(Mark::O) => os.push(at),
                None => {}
            }
        }
        for (i, field) in board.fields.iter_mut().enumerate() {
            field.status = FieldState::status_of(&field.cells);
            if !field.status.is_open() && !Self::closes_exactly_once(&field.cells) {
                return Err(ParseBoardError::OverfilledField(Digit(i as u8)));
            }
        }
        let (x, o) = (xs.len(), os.len());
        if !(x == o || x == o + 1) {
            return Err(ParseBoardError::Parity { x, o });
        }
        board.to_move = match chars[81] {
            'X' => Mark::X,
            'O' => Mark::O,
            ch => return Err(ParseBoardError::Char { pos: 81, ch }),
        };
        if (board.to_move == Mark::X) != (x == o) {
            return Err(ParseBoardError::TurnMismatch);
        }
        board.forced_field = match chars[82] {
            '-' => None,
            ch @ '0'..='8' => {
                let d = Digit(ch as u8 - b'0');
                if !board.fields[d.index()].status.is_open() {
                    return Err(ParseBoardError::ForcedFieldClosed(d));
                }
                Some(d)
            }
            ch => return Err(ParseBoardError::Char { pos: 82, ch }),
        };
        let mut os = os.into_iter();
        for at in xs {
            board.history.push((Mark::X, at));
            if let Some(at) = os.next() {
                board.history.push((Mark::O, at));
            }
        }
        Ok(board)
    }

    // A closed field must have been closed by its final mark: some cell,
    // when removed, leaves the field open.
    fn closes_exactly_once(cells: &[Cell; 9]) -> bool {
        (0..9).filter(|&i| cells[i].is_some()).any(|i| {
            let mut before = *cells;
            before[i] = None;
            FieldState::status_of(&before).is_open()
        })
    }
}

impl fmt::Display for BoardState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for BoardState {
    type Err = ParseBoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoardState::from_text(s)
    }
}

/// 11×11 sketch of the board with `|` and `-` separating fields.
pub fn render_sketch(board: &BoardState) -> String {
    let mut out = String::new();
    for row in 0..9 {
        if row > 0 && row % 3 == 0 {
            out.push_str("---+---+---\n");
        }
        for col in 0..9 {
            if col > 0 && col % 3 == 0 {
                out.push('|');
            }
            let field = (row / 3) * 3 + col / 3;
            let spot = (row % 3) * 3 + col % 3;
            let at = SpotRef::new(Digit(field as u8), Digit(spot as u8));
            out.push(board.cell(at).map_or('.', Mark::as_char));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(field: u8, spot: u8) -> SpotRef {
        SpotRef::try_from_indices(field, spot).unwrap()
    }

    fn cells(x: &[usize], o: &[usize]) -> [Cell; 9] {
        let mut c = [None; 9];
        for &i in x {
            c[i] = Some(Mark::X);
        }
        for &i in o {
            c[i] = Some(Mark::O);
        }
        c
    }

    #[test]
    fn digit_rejects_out_of_range() {
        assert!(Digit::new(8).is_ok());
        assert_eq!(Digit::new(9), Err(DigitOutOfRange(9)));
        assert!(Digit::try_from(-1i64).is_err());
        assert!(serde_json::from_str::<Digit>("9").is_err());
        assert_eq!(serde_json::from_str::<Digit>("3").unwrap().value(), 3);
    }

    #[test]
    fn new_board_is_empty_and_unconstrained() {
        let b = BoardState::new();
        assert_eq!(b.cells_text(), ".".repeat(81));
        assert_eq!(b.to_move(), Mark::X);
        assert_eq!(b.forced_field(), None);
        assert_eq!(b.move_count(), 0);
        assert_eq!(b.status(), GameStatus::InProgress);
        assert_eq!(b.legal_moves().len(), 81);
    }

    #[test]
    fn line_winner_examples() {
        assert_eq!(line_winner(&cells(&[0, 1, 2], &[])), Some(Mark::X));
        assert_eq!(line_winner(&[None; 9]), None);
        assert_eq!(line_winner(&cells(&[1, 2, 3], &[0, 4, 8])), Some(Mark::O));
    }

    #[test]
    fn first_move_sends_to_spot_field() {
        let mut b = BoardState::new();
        b.apply_move(at(6, 1)).unwrap();
        assert_eq!(b.cell(at(6, 1)), Some(Mark::X));
        assert_eq!(b.forced_field(), Some(Digit(1)));
        assert_eq!(b.to_move(), Mark::O);
        let legal = b.legal_moves();
        assert_eq!(legal.len(), 9);
        assert!(legal.iter().all(|s| s.field == Digit(1)));
    }

    #[test]
    fn rejections_leave_state_unchanged() {
        let mut b = BoardState::new();
        b.apply_move(at(4, 4)).unwrap();
        let before = b.clone();
        assert_eq!(
            b.apply_move(at(4, 4)).unwrap_err().reason,
            IllegalReason::CellOccupied
        );
        assert_eq!(
            b.apply_move(at(0, 0)).unwrap_err().reason,
            IllegalReason::WrongField
        );
        assert_eq!(b, before);
    }

    #[test]
    fn send_to_closed_field_frees_next_move() {
        // O keeps sending X back to field 0 until X completes its top row,
        // and X's winning spot 0 sends O into the now-closed field 0.
        let moves = [(0, 1), (1, 0), (0, 2), (2, 0)];
        let mut b = BoardState::replay(moves.iter().map(|&(f, s)| at(f, s))).unwrap();
        assert_eq!(b.forced_field(), Some(Digit(0)));
        b.apply_move(at(0, 0)).unwrap();
        assert_eq!(b.field(Digit(0)).status(), FieldStatus::WonByX);
        assert_eq!(b.forced_field(), None);
        assert_eq!(b.to_move(), Mark::O);
        let legal = b.legal_moves();
        assert!(legal.iter().all(|s| s.field != Digit(0)));
        assert_eq!(legal.len(), 72 - 2);
        let before = b.clone();
        assert_eq!(
            b.apply_move(at(0, 6)).unwrap_err().reason,
            IllegalReason::FieldClosed
        );
        assert_eq!(b, before);
    }

    #[test]
    fn macro_status() {
        let mut b = BoardState::new();
        for i in 0..3 {
            b.fields[i].status = FieldStatus::WonByX;
        }
        assert_eq!(b.status(), GameStatus::WonBy(Mark::X));
        assert!(b.legal_moves().is_empty());
        assert_eq!(
            b.check_move(at(5, 5)).unwrap_err().reason,
            IllegalReason::GameOver
        );

        let mut d = BoardState::new();
        for f in d.fields.iter_mut() {
            f.status = FieldStatus::Drawn;
        }
        assert_eq!(d.status(), GameStatus::Draw);
    }

    #[test]
    fn text_form_round_trips_and_validates() {
        let b = BoardState::replay([at(6, 1), at(1, 2), at(2, 4), at(4, 5)]).unwrap();
        let text = b.to_text();
        assert_eq!(text.len(), 83);
        assert!(text.ends_with("X5"));
        let parsed: BoardState = text.parse().unwrap();
        assert_eq!(parsed.to_text(), text);
        assert_eq!(parsed.move_count(), 4);

        assert_eq!(BoardState::from_text("X"), Err(ParseBoardError::Length(1)));
        let mut bad = text.clone();
        bad.replace_range(81..82, "O");
        assert_eq!(
            BoardState::from_text(&bad),
            Err(ParseBoardError::TurnMismatch)
        );
        let mut bad = text.clone();
        bad.replace_range(0..1, "?");
        assert!(matches!(
            BoardState::from_text(&bad),
            Err(ParseBoardError::Char { pos: 0, ch: '?' })
        ));
    }

    #[test]
    fn overfilled_closed_field_is_rejected() {
        // Field 0 holds two complete X rows: unreachable.
        let mut text = String::from("XXXXXXOOO");
        text.push_str(&".".repeat(72));
        // 6 X vs 3 O also breaks parity, so pad O elsewhere.
        text.replace_range(9..12, "OOO");
        text.push_str("X-");
        assert!(matches!(
            BoardState::from_text(&text),
            Err(ParseBoardError::OverfilledField(_))
        ));
    }

    #[test]
    fn sketch_is_eleven_by_eleven() {
        let b = BoardState::replay([at(0, 0), at(0, 8)]).unwrap();
        let sketch = render_sketch(&b);
        let lines: Vec<&str> = sketch.lines().collect();
        assert_eq!(lines.len(), 11);
        assert!(lines.iter().all(|l| l.chars().count() == 11));
        assert!(lines[0].starts_with('X'));
        assert_eq!(lines[2].chars().nth(2), Some('O'));
    }
}
