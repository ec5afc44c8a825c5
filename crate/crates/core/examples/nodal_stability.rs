//! How often the nodal count agrees between two consecutive icosphere levels.
//! Pass a degree and a sample count (default 20, 50).

use richsing::ensembles::{sample, EnsembleSpec};
use richsing::mesh::SphereMesh;
use richsing::topology::{nodal_level, nodal_report_at};

fn main() -> richsing::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let d = args.first().copied().unwrap_or(20);
    let n = args.get(1).copied().unwrap_or(50) as u64;
    let spec = EnsembleSpec::harmonic(2, d, 7);
    let l = nodal_level(d);
    let (m0, m1) = (SphereMesh::shared(l)?, SphereMesh::shared(l + 1)?);
    let mut same = 0;
    let mut diffs = Vec::new();
    for i in 0..n {
        let p = sample(&spec, i)?;
        let (a, b) = (nodal_report_at(&p, &m0), nodal_report_at(&p, &m1));
        if a.domains == b.domains {
            same += 1;
        } else {
            diffs.push(a.domains as i64 - b.domains as i64);
        }
    }
    println!("d={d}, levels {l} and {}: {same}/{n} agree; differences {diffs:?}", l + 1);
    Ok(())
}
