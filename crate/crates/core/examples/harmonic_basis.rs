//! Dimensions of the spaces of harmonics and a quadrature check that the
//! ensemble basis is orthonormal in L²(Sⁿ).

use richsing::harmonics::{basis_dimension, harmonic_dim, orthonormality_check, QuadratureGrid};

fn main() -> richsing::Result<()> {
    for n in 1..=3 {
        let dims: Vec<usize> = (0..6).map(|l| harmonic_dim(n, l)).collect();
        println!("n={n}: dim H_l for l=0..5 = {dims:?}");
    }
    for (n, d) in [(1, 30), (2, 20), (3, 8)] {
        let grid = QuadratureGrid::for_degree(n, d)?;
        let err = orthonormality_check(n, d, &grid)?;
        println!("n={n} d={d}: {} basis functions, max |G - I| = {err:.2e}", basis_dimension(n, d)?);
    }
    Ok(())
}
