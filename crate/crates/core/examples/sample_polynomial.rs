//! Draw one harmonic and one Kostlan polynomial, evaluate them and round-trip
//! a sample through JSON.

use richsing::ensembles::{sample, EnsembleSpec, PolynomialSample};
use richsing::field::AmbientField;

fn main() -> richsing::Result<()> {
    let x = [0.6, 0.0, 0.8];
    for spec in [EnsembleSpec::harmonic(2, 6, 42), EnsembleSpec::kostlan(2, 6, 42)] {
        let p = sample(&spec, 0)?;
        println!(
            "{} n={} d={}: {} coefficients, |ξ| = {:.4}, p(x) = {:.6}",
            spec.kind,
            spec.n,
            spec.d,
            p.coefficients()[0].len(),
            p.coefficient_norm(),
            p.value(&x)
        );
    }
    let p = sample(&EnsembleSpec::harmonic(3, 4, 7), 11)?;
    let json = p.to_json()?;
    let back = PolynomialSample::from_json(&json)?;
    let y = [0.5, 0.5, 0.5, 0.5];
    println!("JSON round trip ({} bytes): p(y) = {} -> {}", json.len(), p.value(&y), back.value(&y));
    Ok(())
}
