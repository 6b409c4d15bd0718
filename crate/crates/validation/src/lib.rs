//! Acceptance checks for the workspace. The checks are the `acceptance`
//! integration test; this crate has no library code.
