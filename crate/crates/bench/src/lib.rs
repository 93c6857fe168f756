//! Benchmarks live in `benches/`: solver and verifier, series towers, and the Monte Carlo step.
