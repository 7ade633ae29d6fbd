//! Count one constraint class, draw a uniform member, and recover the
//! matching macroscopic profile. Mirrors the walkthrough in the README.

use younglat::ensemble::{count, sample_exact, CanonicalSpec};
use younglat::inversion::invert;
use younglat::MacroState;

fn main() -> younglat::Result<()> {
    // How many configurations on {-40, ..., 40} have K = 32 and M = 100,
    // and what does a uniform one look like?
    let spec = CanonicalSpec::new(40, 32, 100)?;
    println!("class size = {}", count(&spec)?);
    let sample = &sample_exact(&spec, 1, 2024)?[0];
    assert_eq!(sample.particle_number(), 32);
    assert_eq!(sample.weighted_sum(), 100);

    // The matching macroscopic profile.
    let n = spec.n() as f64;
    let state = MacroState::new(32.0 / n, 100.0 / (n * n))?;
    let params = invert(&state, 1e-12)?.params;
    println!("a = {}, b = {}", params.a(), params.b());
    Ok(())
}
