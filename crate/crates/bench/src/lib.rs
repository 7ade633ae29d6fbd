//! Benchmark-only package; the measurements live in `benches/kernels.rs`.
//! Run them with `cargo bench -p younglat-bench`.
