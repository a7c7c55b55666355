//! Instance files, reports and plotting around the solver core; the
//! `sugartax` binary is a thin command dispatcher over this.

pub mod config;
pub mod instance;
pub mod plot;
pub mod report;
