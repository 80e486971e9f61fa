//! Link-level machinery for both RATs.

pub mod nr;
pub mod wifi;
