//! The four umbilics of the ellipsoid x²/9 + y²/4 + z² = 1.

use richsing::field::Polynomial;
use richsing::umbilics::{find_umbilics_euclidean, EuclideanBox, MultiplicityPattern};

fn main() -> richsing::Result<()> {
    let (a, b, c) = (3.0f64, 2.0f64, 1.0f64);
    let f = Polynomial::new(
        3,
        vec![
            (vec![2, 0, 0], 1.0 / (a * a)),
            (vec![0, 2, 0], 1.0 / (b * b)),
            (vec![0, 0, 2], 1.0 / (c * c)),
            (vec![0, 0, 0], -1.0),
        ],
    );
    let grid = EuclideanBox { lo: [-3.3, -2.3, -1.2], hi: [3.3, 2.3, 1.2], cells: [40, 40, 40] };
    let rep = find_umbilics_euclidean(&f, &MultiplicityPattern::umbilic(), &grid, &Default::default())?;
    let ux = a * ((a * a - b * b) / (a * a - c * c)).sqrt();
    let uz = c * ((b * b - c * c) / (a * a - c * c)).sqrt();
    println!("{} umbilics; closed form (±{ux:.9}, 0, ±{uz:.9})", rep.count);
    for p in &rep.points {
        println!("  ({:+.9}, {:+.9}, {:+.9})  k = {:.6}", p.x[0], p.x[1], p.x[2], p.curvatures[0]);
    }
    Ok(())
}
