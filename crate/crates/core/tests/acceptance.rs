//! Acceptance criteria 1–8, one PASS/FAIL line each. Runs as a plain binary
//! (no libtest harness) and exits non-zero if any criterion fails.

use std::time::Instant;

use nalgebra::DVector;
use richsing::charts::covariant_jet;
use richsing::ensembles::{sample, EnsembleSpec, PolynomialSample};
use richsing::field::{ambient_jet, AmbientField, Polynomial};
use richsing::harmonics::{orthonormality_check, QuadratureGrid};
use richsing::kernels::{convergence_report, radius_grid};
use richsing::mesh::SphereMesh;
use richsing::montecarlo::{estimate, joint_z, local_event_probability, reverse_markov_bound, EstimateReport, EstimatorConfig, LocalEvent, Task};
use richsing::topology::{circle_zeros, critical_points, harnack_bound, nodal_domains, nodal_level};
use richsing::umbilics::{find_umbilics, find_umbilics_euclidean, EuclideanBox, MultiplicityPattern, UmbilicChart};
use richsing::Error;

/// Samples per degree for the local oval event.
const EVENT_SAMPLES: usize = 1_000_000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn ovals(spec: EnsembleSpec, samples: usize) -> EstimateReport {
    estimate(&EstimatorConfig::new(spec, Task::Ovals, samples)).expect("oval estimate")
}

fn describe(r: &EstimateReport) -> String {
    format!(
        "d={} mean/d²={:.5}±{:.5} (excluded {}{})",
        r.config.spec.d,
        r.normalized_mean,
        r.normalized_std_error,
        r.excluded,
        if r.unreliable { ", UNRELIABLE" } else { "" }
    )
}

fn harnack_ok(r: &EstimateReport) -> bool {
    let h = harnack_bound(r.config.spec.d) as f64;
    r.outcomes.iter().filter_map(|o| o.value).all(|v| v <= h)
}

fn criterion_1() -> Verdict {
    let r40 = ovals(EnsembleSpec::harmonic(2, 40, 7), 200);
    let r30 = ovals(EnsembleSpec::harmonic(2, 30, 7), 200);
    let in_band = (0.015..=0.024).contains(&r40.normalized_mean);
    let z = joint_z(r40.normalized_mean, r40.normalized_std_error, r30.normalized_mean, r30.normalized_std_error);
    let pass = in_band && z < 3.0 && !r40.unreliable && !r30.unreliable && harnack_ok(&r40) && harnack_ok(&r30);
    verdict(pass, format!("harmonic {}; {}; d=30 vs d=40 differ by {z:.2} joint SE", describe(&r40), describe(&r30)))
}

fn criterion_2() -> Verdict {
    let r40 = ovals(EnsembleSpec::kostlan(2, 40, 7), 200);
    let r20 = ovals(EnsembleSpec::kostlan(2, 20, 7), 200);
    let joint = r40.normalized_std_error.hypot(r20.normalized_std_error);
    let gap = r20.normalized_mean - r40.normalized_mean;
    let pass = r40.normalized_mean < 0.005 && gap > joint && !r40.unreliable && !r20.unreliable;
    verdict(pass, format!("kostlan {}; {}; drop {:.2} joint SE", describe(&r40), describe(&r20), gap / joint))
}

fn criterion_3() -> Verdict {
    let mut bad = Vec::new();
    for d in 1..=25 {
        let p = PolynomialSample::single_harmonic(1, d, d, 0, 0).unwrap();
        let c = circle_zeros(&p).unwrap().count;
        if c != 2 * d {
            bad.push((d, c));
        }
    }
    let r = estimate(&EstimatorConfig::new(EnsembleSpec::kostlan(1, 100, 7), Task::Zeros, 2000)).unwrap();
    let ok_mean = (r.mean - 20.0).abs() <= 0.05 * 20.0;
    verdict(
        bad.is_empty() && ok_mean && !r.unreliable,
        format!("cos(dθ) mismatches {bad:?}; Kostlan d=100 mean zeros {:.3}±{:.3} (target 20 ± 5%)", r.mean, r.std_error),
    )
}

fn criterion_4() -> Verdict {
    let radii = radius_grid(4.0, 801);
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [1, 2] {
        let r = convergence_report(n, &[10, 20, 40, 80], &radii).unwrap();
        pass &= r.monotone;
        detail.push(format!("n={n} sup {:?}", r.sup_distance.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>()));
    }
    let s60 = convergence_report(2, &[60], &radii).unwrap().sup_distance[0];
    pass &= s60 < 0.05;
    detail.push(format!("n=2 d=60 sup {s60:.4}"));
    verdict(pass, detail.join("; "))
}

fn criterion_5() -> Verdict {
    let spec = EnsembleSpec::harmonic(2, 30, 7);
    let est = local_event_probability(&spec, LocalEvent::Oval, &[30, 60], EVENT_SAMPLES).unwrap();
    let (a, b) = (&est[0], &est[1]);
    let both = a.hits > 0 && b.hits > 0;
    let (pa, pb) = (a.probability.unwrap_or(0.0), b.probability.unwrap_or(0.0));
    let z = joint_z(pa, a.std_error, pb, b.std_error);
    verdict(
        both && z < 3.0,
        format!(
            "N={EVENT_SAMPLES}: d=30 {pa:.2e}±{:.1e} ({} hits), d=60 {pb:.2e}±{:.1e} ({} hits), {z:.2} joint SE",
            a.std_error, a.hits, b.std_error, b.hits
        ),
    )
}

fn ellipsoid(a: f64, b: f64, c: f64) -> Polynomial {
    Polynomial::new(
        3,
        vec![
            (vec![2, 0, 0], 1.0 / (a * a)),
            (vec![0, 2, 0], 1.0 / (b * b)),
            (vec![0, 0, 2], 1.0 / (c * c)),
            (vec![0, 0, 0], -1.0),
        ],
    )
}

fn criterion_6() -> Verdict {
    let w = MultiplicityPattern::umbilic();
    let (a, b, c) = (3.0f64, 2.0f64, 1.0f64);
    let grid = EuclideanBox { lo: [-3.3, -2.3, -1.2], hi: [3.3, 2.3, 1.2], cells: [40, 40, 40] };
    let rep = find_umbilics_euclidean(&ellipsoid(a, b, c), &w, &grid, &Default::default()).unwrap();
    let ux = a * ((a * a - b * b) / (a * a - c * c)).sqrt();
    let uz = c * ((b * b - c * c) / (a * a - c * c)).sqrt();
    let ellipsoid_ok = rep.count == 4
        && rep
            .points
            .iter()
            .all(|p| (p.x[0].abs() - ux).abs() < 1e-6 && p.x[1].abs() < 1e-6 && (p.x[2].abs() - uz).abs() < 1e-6);
    let slice = Polynomial::coordinate(4, 0).add(Polynomial::constant(4, -0.5));
    let slice_ok = matches!(find_umbilics(&slice, &w, UmbilicChart::Sphere), Err(Error::DegenerateStratum { .. }));
    let mut mismatches = Vec::new();
    let mut errors = Vec::new();
    for d in 3..=6 {
        for i in 0..20 {
            let p = sample(&EnsembleSpec::harmonic(3, d, 2024), i).unwrap();
            match (find_umbilics(&p, &w, UmbilicChart::Sphere), find_umbilics(&p, &w, UmbilicChart::Stereo)) {
                (Ok(s), Ok(t)) if s.count == t.count => {}
                (Ok(s), Ok(t)) => mismatches.push((d, i, s.count, t.count)),
                (s, t) => errors.push((d, i, s.err().map(|e| e.to_string()), t.err().map(|e| e.to_string()))),
            }
        }
    }
    verdict(
        ellipsoid_ok && slice_ok && mismatches.is_empty() && errors.is_empty(),
        format!(
            "ellipsoid {} umbilics ok={ellipsoid_ok}; round slice degenerate={slice_ok}; 80 draws: mismatches {mismatches:?}, errors {errors:?}",
            rep.count
        ),
    )
}

fn unit_tangent(x: &DVector<f64>, seed: usize) -> DVector<f64> {
    let mut e = DVector::from_fn(x.len(), |i, _| ((i * 7 + seed * 3) % 5) as f64 - 1.7);
    e -= x * x.dot(&e);
    e.normalize()
}

fn criterion_7() -> Verdict {
    let mut fails = Vec::new();

    // Euler identity ⟨x, ∇p⟩ = d p and finite-difference jets along geodesics
    for (n, d) in [(1, 9), (2, 12), (3, 6)] {
        for i in 0..10 {
            let p = sample(&EnsembleSpec::harmonic(n, d, 3), i).unwrap();
            let x = DVector::from_fn(n + 1, |k, _| ((k + 1) as f64 * (i as f64 + 0.7)).sin());
            let x = &x / x.norm();
            let j = ambient_jet(&p, x.as_slice());
            let scale = j.gradient.norm() + d as f64 * j.value.abs();
            if (j.gradient.dot(&x) - d as f64 * j.value).abs() > 1e-12 * scale {
                fails.push(format!("Euler n={n} #{i}"));
            }
            let cj = covariant_jet(&p, x.as_slice()).unwrap();
            let e = unit_tangent(&x, i as usize);
            let h = 1e-4;
            let f = |t: f64| p.value((&x * t.cos() + &e * t.sin()).as_slice());
            let d1 = (f(h) - f(-h)) / (2.0 * h);
            let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            let s = cj.q.norm() + cj.u.norm() + cj.a.abs();
            if (d1 - cj.u.dot(&e)).abs() > 1e-6 * s || (d2 - e.dot(&(&cj.q * &e))).abs() > 1e-5 * s {
                fails.push(format!("jet n={n} #{i}"));
            }
        }
    }

    // Gram matrices
    for (n, d) in [(1, 40), (2, 20), (3, 10)] {
        let err = orthonormality_check(n, d, &QuadratureGrid::for_degree(n, 2 * d).unwrap()).unwrap();
        if err >= 1e-10 {
            fails.push(format!("Gram n={n} d={d} err {err:e}"));
        }
    }

    // nodal counts and Harnack on 100 draws
    let d = 12;
    let mesh = SphereMesh::shared(nodal_level(d)).unwrap();
    for i in 0..100 {
        let p = sample(&EnsembleSpec::harmonic(2, d, 5), i).unwrap();
        match nodal_domains(&p, &mesh) {
            Ok(r) => {
                if r.b0 + 1 != r.domains || r.ambiguous_cells != 0 {
                    fails.push(format!("nodal #{i}: b0 {} domains {}", r.b0, r.domains));
                }
                if r.projective_components.unwrap_or(r.b0) > harnack_bound(d) {
                    fails.push(format!("Harnack #{i}"));
                }
            }
            Err(e) => fails.push(format!("nodal #{i}: {e}")),
        }
    }

    // Morse sum on converged critical-point runs
    let mut converged = 0;
    for i in 0..20 {
        let p = sample(&EnsembleSpec::harmonic(2, 10, 6), i).unwrap();
        let r = critical_points(&p).unwrap();
        if r.fully_converged {
            converged += 1;
            if r.morse_sum != 2 {
                fails.push(format!("Morse #{i}: {}", r.morse_sum));
            }
        }
    }

    // codimension spot values
    for (w, c) in [(vec![3, 0, 0], 0), (vec![0, 1], 2), (vec![1, 1, 0], 2), (vec![0, 0, 1], 5), (vec![0, 2, 0, 0], 4)] {
        let got = MultiplicityPattern::new(w.clone()).unwrap().codim();
        if got != c {
            fails.push(format!("codim {w:?} = {got}"));
        }
    }
    verdict(fails.is_empty(), format!("{converged}/20 critical runs converged; failures {fails:?}"))
}

fn criterion_8() -> Verdict {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c1: f64 = rng.random_range(0.0..10.0);
        let c2 = rng.random_range(0.0..=c1);
        let c = rng.random_range(0.0..c1);
        let direct = ((c2 - c) / (c1 - c)).clamp(0.0, 1.0);
        worst = worst.max((reverse_markov_bound(c1, c2, c).unwrap() - direct).abs());
    }
    let edges = reverse_markov_bound(2.0, 1.0, 0.0).unwrap() == 0.5
        && reverse_markov_bound(1.5, 1.5, 0.7).unwrap() == 1.0
        && reverse_markov_bound(1.0, 0.0, 0.0).unwrap() == 0.0
        && reverse_markov_bound(4.0, 1.0, 3.0).unwrap() == 0.0
        && reverse_markov_bound(1.0, 0.5, 1.0).is_err();
    verdict(worst <= 1e-15 && edges, format!("max deviation {worst:e} over 1000 triples; boundary cases ok={edges}"))
}

fn main() {
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect())
        .unwrap_or_default();
    let criteria: [(usize, fn() -> Verdict); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = 0;
    for (k, f) in criteria {
        if !only.is_empty() && !only.contains(&k) {
            continue;
        }
        let t = Instant::now();
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {k}: {} ({:.0}s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
