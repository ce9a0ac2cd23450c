//! Benchmarks for the product and reconstruction routines live under `benches/`.
