//! Criterion benchmarks for the planner live under `benches/`.
