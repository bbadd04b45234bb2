//! Placeholder bench; filled in once the harness exists.
fn main() {}
