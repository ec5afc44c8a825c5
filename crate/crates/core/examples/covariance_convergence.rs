//! Rescaled covariance of the harmonic ensemble against its large-degree
//! limit, sup over r ≤ 4.

use richsing::kernels::{convergence_report, limit_correlation, radius_grid};

fn main() -> richsing::Result<()> {
    let radii = radius_grid(4.0, 401);
    for n in 1..=3 {
        let rep = convergence_report(n, &[10, 20, 40, 60, 80], &radii)?;
        let sups: Vec<String> = rep
            .degrees
            .iter()
            .zip(&rep.sup_distance)
            .map(|(d, s)| format!("d={d}: {s:.4}"))
            .collect();
        println!("n={n}  {}  monotone={}", sups.join("  "), rep.monotone);
    }
    println!("limit correlation at r=2: n=1 {:.5}, n=2 {:.5}, n=3 {:.5}",
        limit_correlation(1, 2.0)?, limit_correlation(2, 2.0)?, limit_correlation(3, 2.0)?);
    Ok(())
}
