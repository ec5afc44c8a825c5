//! The rescaled field near a point in the exponential and stereographic
//! charts, and its variance against the kernel.

use richsing::charts::{rescaled_field, tau_map, ChartKind, ChartPoint};
use richsing::ensembles::{ensemble_kernel, sample, EnsembleSpec};

fn main() -> richsing::Result<()> {
    let d = 30;
    let spec = EnsembleSpec::harmonic(2, d, 4);
    let z = ChartPoint::new(&[0.0, 0.0, 1.0])?;
    let p = sample(&spec, 0)?;
    for v in [[0.0, 0.0], [0.5, 0.0], [0.0, 1.0]] {
        println!(
            "v = {v:?}: exp {:+.6}, stereo (based at -z) {:+.6}",
            rescaled_field(&p, &z, d, &v, ChartKind::Exp)?,
            rescaled_field(&p, &z.antipodal(), d, &v, ChartKind::Stereo)?
        );
    }
    let n = 4000;
    let var = (0..n)
        .map(|i| rescaled_field(&sample(&spec, i).unwrap(), &z, d, &[0.0, 0.0], ChartKind::Exp).unwrap().powi(2))
        .sum::<f64>()
        / n as f64;
    println!("Var f(0) = {var:.5}, kernel K(1) d^-2 = {:.5}", ensemble_kernel(&spec, 1.0)? / (d * d) as f64);
    println!("tau(0.3, 0.4) = {:?}", tau_map(&z, &[0.3, 0.4])?.as_slice());
    Ok(())
}
