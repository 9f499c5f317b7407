//! HTTP service and command-line front end for the planning library.

pub mod api;
pub mod cli;
pub mod history;
pub mod service;
