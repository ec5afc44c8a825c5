//! Umbilics of random zero surfaces in S³, found on the round sphere and in
//! the stereographic chart (the two counts agree by conformal invariance),
//! plus the degenerate round slice x₀ = 1/2.

use richsing::ensembles::{sample, EnsembleSpec};
use richsing::field::Polynomial;
use richsing::umbilics::{find_umbilics, MultiplicityPattern, UmbilicChart};

fn main() -> richsing::Result<()> {
    let w = MultiplicityPattern::umbilic();
    println!("pattern {w}: codimension {}", w.codim());
    for d in [3, 4] {
        for i in 0..3 {
            let p = sample(&EnsembleSpec::harmonic(3, d, 2024), i)?;
            let s = find_umbilics(&p, &w, UmbilicChart::Sphere)?;
            let t = find_umbilics(&p, &w, UmbilicChart::Stereo)?;
            println!("d={d} #{i}: sphere {} umbilics, stereo chart {}", s.count, t.count);
        }
    }
    let slice = Polynomial::coordinate(4, 0).add(Polynomial::constant(4, -0.5));
    match find_umbilics(&slice, &w, UmbilicChart::Sphere) {
        Err(e) => println!("round slice: {e}"),
        Ok(r) => println!("round slice unexpectedly gave {} points", r.count),
    }
    Ok(())
}
