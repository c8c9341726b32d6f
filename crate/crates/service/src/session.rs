//! Session store.
//!
//! Sessions live in memory behind one mutex each, so moves on a session are
//! serialized while different sessions never contend. With persistence
//! enabled, every mutation appends the session's full record (seq, creation
//! time, moves after the opening) as one JSON line; on load the last record
//! per id wins and the board is rebuilt by replay.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use uttt_core::{
    apply_opening, census, classify, roll, BoardState, CensusReport, DigitSequence, OpeningClass,
    RollPolicy, SpotRef, UniformDigits,
};

use crate::error::ServiceError;
use crate::wire::{
    ClassifyRequest, CreateGameRequest, GameSnapshot, MoveRequest, OpeningView, RollRequest,
};

#[derive(Debug, Clone)]
pub struct GameSession {
    pub id: String,
    pub seq: DigitSequence,
    pub state: BoardState,
    pub created_at: u64,
}

impl GameSession {
    pub fn version(&self) -> u64 {
        self.state.move_count() as u64
    }

    pub fn snapshot(&self) -> GameSnapshot {
        GameSnapshot::new(&self.id, self.seq, &self.state, self.created_at)
    }

    /// Moves played after the four opening placements.
    fn player_moves(&self) -> &[(uttt_core::Mark, SpotRef)] {
        &self.state.history()[4..]
    }

    /// Replays the opening and the recorded moves and checks the result
    /// matches the live board.
    pub fn audit(&self) -> bool {
        let Ok(mut board) = apply_opening(self.seq) else {
            return false;
        };
        if board.history() != &self.state.history()[..4] {
            return false;
        }
        for &(_, at) in self.player_moves() {
            if board.apply_move(at).is_err() {
                return false;
            }
        }
        board == self.state
    }

    fn record(&self) -> SessionRecord {
        SessionRecord {
            id: self.id.clone(),
            seq: self.seq,
            created_at: self.created_at,
            moves: self
                .player_moves()
                .iter()
                .map(|(_, at)| [at.field.value(), at.spot.value()])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SessionRecord {
    id: String,
    seq: DigitSequence,
    created_at: u64,
    moves: Vec<[u8; 2]>,
}

impl SessionRecord {
    fn replay(&self) -> Result<GameSession, String> {
        let mut state = apply_opening(self.seq).map_err(|e| e.to_string())?;
        for &[f, s] in &self.moves {
            let at = SpotRef::try_from_indices(f, s).map_err(|e| e.to_string())?;
            state.apply_move(at).map_err(|e| e.to_string())?;
        }
        Ok(GameSession {
            id: self.id.clone(),
            seq: self.seq,
            state,
            created_at: self.created_at,
        })
    }
}

struct SessionLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl SessionLog {
    fn append(&self, record: &SessionRecord) -> io::Result<()> {
        let mut line = serde_json::to_string(record).map_err(io::Error::other)?;
        line.push('\n');
        let mut file = self.file.lock().unwrap();
        file.write_all(line.as_bytes())
    }
}

type SharedSession = Arc<Mutex<GameSession>>;

pub struct GameService {
    sessions: RwLock<HashMap<String, SharedSession>>,
    log: Option<SessionLog>,
}

impl Default for GameService {
    fn default() -> Self {
        Self::in_memory()
    }
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn new_session_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

impl GameService {
    pub fn in_memory() -> Self {
        GameService {
            sessions: RwLock::new(HashMap::new()),
            log: None,
        }
    }

    /// Loads any sessions recorded at `path`, rewrites the file with one
    /// line per session, then appends from there on.
    pub fn with_persistence(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref().to_path_buf();
        let mut sessions: HashMap<String, GameSession> = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed = serde_json::from_str::<SessionRecord>(&line)
                    .map_err(|e| e.to_string())
                    .and_then(|r| r.replay());
                match parsed {
                    Ok(s) => {
                        sessions.insert(s.id.clone(), s);
                    }
                    Err(e) => tracing::warn!("{}:{}: skipping record: {e}", path.display(), n + 1),
                }
            }
        }

        let tmp = path.with_extension("compact");
        {
            let mut out = File::create(&tmp)?;
            let mut ids: Vec<&String> = sessions.keys().collect();
            ids.sort();
            for id in ids {
                let line =
                    serde_json::to_string(&sessions[id].record()).map_err(io::Error::other)?;
                writeln!(out, "{line}")?;
            }
            out.sync_all()?;
        }
        fs::rename(&tmp, &path)?;

        let file = OpenOptions::new().append(true).open(&path)?;
        Ok(GameService {
            sessions: RwLock::new(
                sessions
                    .into_iter()
                    .map(|(id, s)| (id, Arc::new(Mutex::new(s))))
                    .collect(),
            ),
            log: Some(SessionLog {
                path,
                file: Mutex::new(file),
            }),
        })
    }

    pub fn persistence_path(&self) -> Option<&Path> {
        self.log.as_ref().map(|l| l.path.as_path())
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    fn persist(&self, session: &GameSession) -> Result<(), ServiceError> {
        if let Some(log) = &self.log {
            log.append(&session.record())?;
        }
        Ok(())
    }

    fn lookup(&self, id: &str) -> Result<SharedSession, ServiceError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    pub fn create_game(&self, req: CreateGameRequest) -> Result<GameSnapshot, ServiceError> {
        let (seq, state) = match (req.seed, req.digits) {
            (Some(_), Some(_)) => {
                return Err(ServiceError::InvalidRequest(
                    "supply at most one of seed and digits".into(),
                ))
            }
            (None, Some(digits)) => {
                let seq: DigitSequence = digits.parse()?;
                match classify(seq) {
                    OpeningClass::Playable => {}
                    class => return Err(ServiceError::UnplayableDigits(class)),
                }
                (
                    seq,
                    apply_opening(seq).expect("playable sequences are legal"),
                )
            }
            (seed, None) => {
                let policy = RollPolicy::default();
                let rolled = match seed {
                    Some(s) => roll(&mut UniformDigits::seeded(s), &policy)?,
                    None => roll(&mut UniformDigits::from_os(), &policy)?,
                };
                (rolled.seq, rolled.board)
            }
        };

        let session = GameSession {
            id: new_session_id(),
            seq,
            state,
            created_at: now_secs(),
        };
        let snapshot = session.snapshot();
        self.persist(&session)?;
        self.sessions
            .write()
            .unwrap()
            .insert(session.id.clone(), Arc::new(Mutex::new(session)));
        Ok(snapshot)
    }

    pub fn get_game(&self, id: &str) -> Result<GameSnapshot, ServiceError> {
        let session = self.lookup(id)?;
        let snapshot = session.lock().unwrap().snapshot();
        Ok(snapshot)
    }

    pub fn submit_move(&self, id: &str, req: MoveRequest) -> Result<GameSnapshot, ServiceError> {
        let at = SpotRef::try_from_indices(req.field, req.spot)
            .map_err(|e| ServiceError::InvalidRequest(e.to_string()))?;
        let shared = self.lookup(id)?;
        let mut session = shared.lock().unwrap();
        if let Some(expected) = req.expected_version {
            let current = session.version();
            if expected != current {
                return Err(ServiceError::VersionConflict { expected, current });
            }
        }
        let next = session.state.with_move(at)?;
        let previous = std::mem::replace(&mut session.state, next);
        if let Err(e) = self.persist(&session) {
            session.state = previous;
            return Err(e);
        }
        Ok(session.snapshot())
    }

    /// Runs `f` against a session under its lock.
    pub fn inspect<T>(
        &self,
        id: &str,
        f: impl FnOnce(&GameSession) -> T,
    ) -> Result<T, ServiceError> {
        let shared = self.lookup(id)?;
        let session = shared.lock().unwrap();
        Ok(f(&session))
    }

    pub fn roll_opening(&self, req: RollRequest) -> Result<OpeningView, ServiceError> {
        let policy = if req.allow_forced_win {
            RollPolicy::allowing_forced_win()
        } else {
            RollPolicy::default()
        };
        let rolled = match req.seed {
            Some(s) => roll(&mut UniformDigits::seeded(s), &policy)?,
            None => roll(&mut UniformDigits::from_os(), &policy)?,
        };
        let mut view = OpeningView::of(rolled.seq);
        view.rejected_draws = Some(rolled.rejected_draws);
        Ok(view)
    }

    pub fn classify_opening(&self, req: ClassifyRequest) -> Result<OpeningView, ServiceError> {
        let seq: DigitSequence = req.digits.parse()?;
        Ok(OpeningView::of(seq))
    }

    pub fn census(&self) -> &'static CensusReport {
        census()
    }

    /// Pushes buffered records to disk.
    pub fn flush(&self) -> io::Result<()> {
        if let Some(log) = &self.log {
            let mut file = log.file.lock().unwrap();
            file.flush()?;
            file.sync_all()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use uttt_core::{Digit, IllegalReason, Mark};

    fn digits(s: &str) -> CreateGameRequest {
        CreateGameRequest {
            seed: None,
            digits: Some(s.into()),
        }
    }

    fn mv(field: u8, spot: u8, expected_version: Option<u64>) -> MoveRequest {
        MoveRequest {
            field,
            spot,
            expected_version,
        }
    }

    #[test]
    fn create_from_explicit_digits() {
        let svc = GameService::in_memory();
        let snap = svc.create_game(digits("61245")).unwrap();
        assert_eq!(snap.seq.to_string(), "61245");
        assert_eq!(snap.forced_field, Some(Digit::new(5).unwrap()));
        assert_eq!(snap.to_move, Mark::X);
        assert_eq!(snap.version, 4);
        let b = snap.board.as_bytes();
        assert_eq!(b[6 * 9 + 1], b'X');
        assert_eq!(b[2 * 9 + 4], b'X');
        assert_eq!(b[9 + 2], b'O');
        assert_eq!(b[4 * 9 + 5], b'O');
        assert_eq!(snap.legal_moves.len(), 9);
    }

    #[test]
    fn explicit_digits_must_be_playable() {
        let svc = GameService::in_memory();
        assert!(matches!(
            svc.create_game(digits("44148")),
            Err(ServiceError::UnplayableDigits(
                OpeningClass::ForcedWinPattern
            ))
        ));
        assert!(matches!(
            svc.create_game(digits("44444")),
            Err(ServiceError::UnplayableDigits(OpeningClass::Illegal {
                conflict_index: 2
            }))
        ));
        assert!(matches!(
            svc.create_game(digits("6124")),
            Err(ServiceError::InvalidDigits(_))
        ));
        assert!(matches!(
            svc.create_game(CreateGameRequest {
                seed: Some(1),
                digits: Some("61245".into())
            }),
            Err(ServiceError::InvalidRequest(_))
        ));
        assert_eq!(svc.session_count(), 0);
    }

    #[test]
    fn seeded_games_share_a_sequence() {
        let svc = GameService::in_memory();
        let seeded = || CreateGameRequest {
            seed: Some(7),
            digits: None,
        };
        let a = svc.create_game(seeded()).unwrap();
        let b = svc.create_game(seeded()).unwrap();
        assert_eq!(a.seq, b.seq);
        assert_ne!(a.id, b.id);
        assert_eq!(a.id.len(), 32);
    }

    #[test]
    fn moves_and_errors() {
        let svc = GameService::in_memory();
        let id = svc.create_game(digits("61245")).unwrap().id;
        assert!(matches!(
            svc.get_game("nope"),
            Err(ServiceError::NotFound(_))
        ));

        let err = svc.submit_move(&id, mv(0, 0, None)).unwrap_err();
        assert!(
            matches!(err, ServiceError::IllegalMove(e) if e.reason == IllegalReason::WrongField)
        );
        assert_eq!(svc.get_game(&id).unwrap().version, 4);

        let snap = svc.submit_move(&id, mv(5, 3, Some(4))).unwrap();
        assert_eq!(snap.version, 5);
        assert_eq!(snap.board.as_bytes()[5 * 9 + 3], b'X');
        assert_eq!(snap.forced_field, Some(Digit::new(3).unwrap()));

        let err = svc.submit_move(&id, mv(3, 0, Some(4))).unwrap_err();
        assert!(matches!(
            err,
            ServiceError::VersionConflict {
                expected: 4,
                current: 5
            }
        ));
        assert!(matches!(
            svc.submit_move(&id, mv(9, 0, None)),
            Err(ServiceError::InvalidRequest(_))
        ));
        assert!(svc.inspect(&id, GameSession::audit).unwrap());
    }

    #[test]
    fn concurrent_conflicting_moves_one_wins() {
        let svc = Arc::new(GameService::in_memory());
        for round in 0..50 {
            let id = svc.create_game(digits("61245")).unwrap().id;
            let handles: Vec<_> = [(5u8, 0u8), (5, 1)]
                .into_iter()
                .map(|(f, s)| {
                    let svc = Arc::clone(&svc);
                    let id = id.clone();
                    std::thread::spawn(move || svc.submit_move(&id, mv(f, s, Some(4))))
                })
                .collect();
            let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
            let ok = results.iter().filter(|r| r.is_ok()).count();
            assert_eq!(ok, 1, "round {round}");
            assert!(results
                .iter()
                .any(|r| matches!(r, Err(ServiceError::VersionConflict { .. }))));
            assert_eq!(svc.get_game(&id).unwrap().version, 5);
        }
    }

    #[test]
    fn persistence_survives_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sessions.jsonl");
        let (id, board) = {
            let svc = GameService::with_persistence(&path).unwrap();
            let id = svc.create_game(digits("61245")).unwrap().id;
            svc.submit_move(&id, mv(5, 3, None)).unwrap();
            let snap = svc.submit_move(&id, mv(3, 3, None)).unwrap();
            svc.create_game(digits("01234")).unwrap();
            svc.flush().unwrap();
            (id, snap.board)
        };
        // append log has one line per mutation
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 4);

        let svc = GameService::with_persistence(&path).unwrap();
        assert_eq!(svc.session_count(), 2);
        let snap = svc.get_game(&id).unwrap();
        assert_eq!(snap.board, board);
        assert_eq!(snap.version, 6);
        assert!(svc.inspect(&id, GameSession::audit).unwrap());
        // compacted on load
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 2);
    }

    #[test]
    fn corrupt_records_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sessions.jsonl");
        fs::write(
            &path,
            concat!(
                "{\"id\":\"a\",\"seq\":\"61245\",\"created_at\":1,\"moves\":[[5,3]]}\n",
                "not json\n",
                "{\"id\":\"b\",\"seq\":\"61245\",\"created_at\":1,\"moves\":[[0,0]]}\n",
            ),
        )
        .unwrap();
        let svc = GameService::with_persistence(&path).unwrap();
        assert_eq!(svc.session_count(), 1);
        assert_eq!(svc.get_game("a").unwrap().version, 5);
    }

    #[test]
    fn classify_and_roll_views() {
        let svc = GameService::in_memory();
        let v = svc
            .classify_opening(ClassifyRequest {
                digits: "84441".into(),
            })
            .unwrap();
        assert_eq!(
            v.classification,
            OpeningClass::Illegal { conflict_index: 3 }
        );
        assert_eq!(
            v.conflict.unwrap().at,
            SpotRef::try_from_indices(4, 4).unwrap()
        );
        assert!(v.board.is_none());

        let a = svc
            .roll_opening(RollRequest {
                seed: Some(3),
                allow_forced_win: false,
            })
            .unwrap();
        let b = svc
            .roll_opening(RollRequest {
                seed: Some(3),
                allow_forced_win: false,
            })
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.classification, OpeningClass::Playable);
    }
}
