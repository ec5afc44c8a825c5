//! Special functions: log-gamma on half-integers, Gauss quadrature nodes,
//! Bessel functions of integer order and zonal polynomials.

use std::f64::consts::PI;

/// `ln Γ(m / 2)` for a positive integer `m`, exact up to rounding of the
/// logarithm sum.
pub fn ln_gamma_half(m: usize) -> f64 {
    assert!(m > 0, "ln_gamma_half requires a positive argument");
    // Γ(1) = 1, Γ(1/2) = √π, Γ(x + 1) = x Γ(x)
    let (mut acc, mut twice_x) = if m % 2 == 0 {
        (0.0, 2)
    } else {
        (0.5 * PI.ln(), 1)
    };
    while twice_x < m {
        acc += (twice_x as f64 / 2.0).ln();
        twice_x += 2;
    }
    acc
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, exact for polynomials of
/// degree `2m - 1`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Chebyshev nodes of the second kind: exact for `∫ f(t) √(1-t²) dt`
/// with `f` of degree `2m - 1`.
pub fn gauss_chebyshev_second(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mf = (m + 1) as f64;
    (1..=m)
        .map(|k| {
            let a = k as f64 * PI / mf;
            (a.cos(), PI / mf * a.sin().powi(2))
        })
        .unzip()
}

/// Bessel function of the first kind of integer order, via Bessel's
/// integral `J_n(x) = (1/π) ∫₀^π cos(nτ - x sin τ) dτ`. The integrand is
/// even and 2π-periodic, so the trapezoid rule converges geometrically.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    let m = 48 + (x.abs() as usize) * 2 + order as usize;
    let h = PI / m as f64;
    let nf = order as f64;
    let f = |t: f64| (nf * t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for i in 1..m {
        s += f(i as f64 * h);
    }
    s * h / PI
}

/// Zonal function of degree `ell` on `S^n`, normalized to 1 at `t = 1`.
///
/// n = 1: Chebyshev `T_ℓ`; n = 2: Legendre `P_ℓ`; n = 3: `U_ℓ / (ℓ + 1)`.
pub fn zonal(n: usize, ell: usize, t: f64) -> f64 {
    zonal_all(n, ell, t)[ell]
}

/// All zonal functions of degrees `0..=lmax` at `t`.
pub fn zonal_all(n: usize, lmax: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax + 1);
    match n {
        1 => {
            let (mut a, mut b) = (1.0, t);
            out.push(a);
            for _ in 1..=lmax {
                out.push(b);
                let c = 2.0 * t * b - a;
                a = b;
                b = c;
            }
        }
        2 => {
            let (mut a, mut b) = (1.0, t);
            out.push(a);
            for k in 1..=lmax {
                out.push(b);
                let kf = (k + 1) as f64;
                let c = ((2.0 * kf - 1.0) * t * b - (kf - 1.0) * a) / kf;
                a = b;
                b = c;
            }
        }
        3 => {
            let (mut a, mut b) = (1.0, 2.0 * t);
            out.push(a);
            for k in 1..=lmax {
                out.push(b / (k + 1) as f64);
                let c = 2.0 * t * b - a;
                a = b;
                b = c;
            }
        }
        _ => panic!("zonal functions are implemented for n = 1, 2, 3"),
    }
    out.truncate(lmax + 1);
    out
}

/// Volume of the unit sphere `S^n`.
pub fn sphere_volume(n: usize) -> f64 {
    // 2 π^{(n+1)/2} / Γ((n+1)/2)
    2.0 * PI.powf((n as f64 + 1.0) / 2.0) / ln_gamma_half(n + 1).exp()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
