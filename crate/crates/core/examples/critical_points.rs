//! Critical points of a random spherical polynomial and the Morse count
//! max - saddle + min = χ(S²).

use richsing::ensembles::{sample, EnsembleSpec};
use richsing::topology::critical_points;

fn main() -> richsing::Result<()> {
    for d in [4, 8, 16] {
        let p = sample(&EnsembleSpec::harmonic(2, d, 5), 0)?;
        let r = critical_points(&p)?;
        println!(
            "d={d}: {} critical points ({} min, {} saddle, {} max), Morse sum {}, converged {}",
            r.count, r.minima, r.saddles, r.maxima, r.morse_sum, r.fully_converged
        );
    }
    Ok(())
}
