//! Game-session service: sessions start from a rolled (or supplied) opening
//! and are played to completion through a small JSON API.

pub mod error;
pub mod http;
pub mod session;
pub mod wire;

pub use error::ServiceError;
pub use http::router;
pub use session::{GameService, GameSession};
pub use wire::{
    ClassifyRequest, CreateGameRequest, GameSnapshot, MoveRequest, OpeningView, RollRequest,
    WireStatus,
};
