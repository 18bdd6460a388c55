//! Operator-facing side of navvi: the WebSocket session server, its wire
//! protocol and the `navvi` command line.

pub mod cli;
pub mod protocol;
pub mod scenes;
pub mod server;
pub mod session;
