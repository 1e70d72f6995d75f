pub mod credentials;
pub mod error;
pub mod group;
pub mod hash;
pub mod lky;
pub mod net;
pub mod oracle;
pub mod proposed;
mod serde_dec;
pub mod wire;
pub mod session;
pub mod store;
pub mod attacks;
pub mod harness;
