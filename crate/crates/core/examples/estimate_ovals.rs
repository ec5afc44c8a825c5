//! Expected number of ovals per d² for the harmonic and Kostlan ensembles.
//! Pass a degree and a sample count to change the defaults (20, 40).

use richsing::ensembles::EnsembleSpec;
use richsing::montecarlo::{estimate, EstimatorConfig, Task};

fn main() -> richsing::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let d = args.first().copied().unwrap_or(20);
    let samples = args.get(1).copied().unwrap_or(40);
    for spec in [EnsembleSpec::harmonic(2, d, 7), EnsembleSpec::kostlan(2, d, 7)] {
        let rep = estimate(&EstimatorConfig::new(spec, Task::Ovals, samples))?;
        println!(
            "{} d={d} N={samples}: mean ovals {:.3} ± {:.3}, per d² {:.5} ± {:.5}, excluded {} {:?}",
            spec.kind, rep.mean, rep.std_error, rep.normalized_mean, rep.normalized_std_error, rep.excluded, rep.exclusion_reasons
        );
    }
    Ok(())
}
