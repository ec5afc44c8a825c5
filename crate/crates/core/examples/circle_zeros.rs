//! Zeros on the circle: cos(dθ) attains the maximum 2d, while a Kostlan
//! polynomial has about 2√d.

use richsing::ensembles::{sample, EnsembleSpec, PolynomialSample};
use richsing::topology::circle_zeros;

fn main() -> richsing::Result<()> {
    for d in [1, 5, 12, 25] {
        // the top harmonic j = 0 of degree d on S¹ is a multiple of cos(dθ)
        let p = PolynomialSample::single_harmonic(1, d, d, 0, 0)?;
        println!("cos({d}θ): {} zeros", circle_zeros(&p)?.count);
    }
    let spec = EnsembleSpec::kostlan(1, 100, 3);
    let n = 400;
    let total: usize = (0..n)
        .map(|i| circle_zeros(&sample(&spec, i).unwrap()).unwrap().count)
        .sum();
    println!("Kostlan d=100: mean {:.2} zeros over {n} draws (2√d = 20)", total as f64 / n as f64);
    Ok(())
}
