//! JSON formats, parallel scans, and the `ychannel` command line on top of
//! [`ychannel_core`].

pub mod format;
pub mod scan;

pub use ychannel_core as core;
