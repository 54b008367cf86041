//! Instance files, fixtures, exports and batch runs around `rpptu-core`.

pub mod bench;
pub mod clock;
pub mod export;
pub mod fixtures;
pub mod gantt;
pub mod io;
pub mod verify;
