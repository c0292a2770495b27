//! Benchmark-only crate; see benches/construct.rs.
