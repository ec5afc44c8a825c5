//! Probability of local events for the rescaled field at a fixed point.

use richsing::ensembles::EnsembleSpec;
use richsing::montecarlo::{local_event_probability, LocalEvent};

fn main() -> richsing::Result<()> {
    let spec = EnsembleSpec::harmonic(2, 30, 9);
    for (name, event, samples) in [
        ("f(0) > 0", LocalEvent::PositiveAtCentre, 2000),
        ("oval in the unit disk", LocalEvent::Oval, 400_000),
        ("f > 1e6 everywhere", LocalEvent::Exceeds(1e6), 2000),
    ] {
        for e in local_event_probability(&spec, event, &[30, 60], samples)? {
            match e.probability {
                Some(p) => println!("{name}, d={}: {p:.3e} ± {:.1e} ({} hits)", e.degree, e.std_error, e.hits),
                None => println!("{name}, d={}: below resolution {:.1e}", e.degree, e.resolution),
            }
        }
    }
    Ok(())
}
