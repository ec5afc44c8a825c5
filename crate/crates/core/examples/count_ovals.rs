//! Nodal domains and ovals of a random degree-20 curve. The mesh is refined
//! until two levels agree, with thin saddle necks widened when they do not.

use richsing::ensembles::{sample, EnsembleSpec};
use richsing::topology::{harnack_bound, nodal_level, resolve_nodal_topology};

fn main() -> richsing::Result<()> {
    let d = 20;
    for spec in [EnsembleSpec::harmonic(2, d, 1), EnsembleSpec::kostlan(2, d, 1)] {
        for i in 0..3 {
            let p = sample(&spec, i)?;
            let start = nodal_level(d);
            match resolve_nodal_topology(&p, start, start + 2) {
                Ok(r) => println!(
                    "{} #{i}: {} domains, b0 = {} on S², {} projective ovals (Harnack bound {}), level {}",
                    spec.kind,
                    r.domains,
                    r.b0,
                    r.projective_components.unwrap_or(r.b0),
                    harnack_bound(d),
                    r.level
                ),
                Err(e) => println!("{} #{i}: {e}", spec.kind),
            }
        }
    }
    Ok(())
}
