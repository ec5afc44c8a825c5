//! Scalar fields on the ambient space R^{n+1}.

use nalgebra::{DMatrix, DVector};

use crate::jet::{powi, Jet, Scalar};

/// A real function on the ambient space, evaluable on any [`Scalar`].
///
/// Restricting to the unit sphere gives the field under study; evaluating
/// on jets gives ambient derivatives of the chosen extension.
pub trait AmbientField: Sync {
    fn ambient_dim(&self) -> usize;

    fn eval<T: Scalar>(&self, x: &[T]) -> T;

    /// Degree (or oscillation scale) used to pick mesh resolutions.
    fn degree_hint(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }

    /// `Some(e)` if `f(-x) = (-1)^e f(x)` holds exactly.
    fn parity(&self) -> Option<usize> {
        None
    }
}

impl<F: AmbientField> AmbientField for &F {
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> T {
        (**self).eval(x)
    }
    fn degree_hint(&self) -> usize {
        (**self).degree_hint()
    }
    fn parity(&self) -> Option<usize> {
        (**self).parity()
    }
}

/// Value, gradient and Hessian of an ambient field at a point.
#[derive(Clone, Debug)]
pub struct AmbientJet {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl<const N: usize> From<Jet<N>> for AmbientJet {
    fn from(j: Jet<N>) -> Self {
        AmbientJet {
            value: j.v,
            gradient: DVector::from_column_slice(&j.g),
            hessian: DMatrix::from_fn(N, N, |r, c| j.h[r][c]),
        }
    }
}

pub fn ambient_jet<F: AmbientField>(f: &F, x: &[f64]) -> AmbientJet {
    fn run<const N: usize, F: AmbientField>(f: &F, x: &[f64]) -> AmbientJet {
        let mut xa = [0.0; N];
        xa.copy_from_slice(x);
        f.eval(&Jet::<N>::seed(&xa)).into()
    }
    match x.len() {
        1 => run::<1, F>(f, x),
        2 => run::<2, F>(f, x),
        3 => run::<3, F>(f, x),
        4 => run::<4, F>(f, x),
        d => panic!("ambient jets are implemented up to dimension 4, got {d}"),
    }
}

/// Explicit polynomial in `dim` variables, not necessarily homogeneous.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(Vec<u32>, f64)>) -> Self {
        for (e, _) in &terms {
            assert_eq!(e.len(), dim, "exponent vector length must equal dim");
        }
        Polynomial { dim, terms }
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Polynomial::new(dim, vec![(e, 1.0)])
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Polynomial::new(dim, vec![(vec![0; dim], c)])
    }

    /// Quadratic form `xᵀ A x` for a symmetric matrix given row-major.
    pub fn quadratic_form(a: &[Vec<f64>]) -> Self {
        let dim = a.len();
        let mut terms = Vec::new();
        for i in 0..dim {
            for j in i..dim {
                let c = if i == j { a[i][i] } else { a[i][j] + a[j][i] };
                if c != 0.0 {
                    let mut e = vec![0; dim];
                    e[i] += 1;
                    e[j] += 1;
                    terms.push((e, c));
                }
            }
        }
        Polynomial::new(dim, terms)
    }

    pub fn add(mut self, other: Polynomial) -> Self {
        assert_eq!(self.dim, other.dim);
        self.terms.extend(other.terms);
        self
    }

    pub fn scale(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= c;
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }
}

impl AmbientField for Polynomial {
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let mut acc = T::constant(0.0);
        for (e, c) in &self.terms {
            let mut term = T::constant(*c);
            for (xi, &ei) in x.iter().zip(e) {
                if ei > 0 {
                    term = term * powi(*xi, ei);
                }
            }
            acc += term;
        }
        acc
    }

    fn degree_hint(&self) -> usize {
        self.degree().max(1)
    }

    fn parity(&self) -> Option<usize> {
        let mut it = self.terms.iter().map(|(e, _)| e.iter().sum::<u32>() as usize % 2);
        let first = it.next().unwrap_or(0);
        it.all(|e| e == first).then_some(first)
    }
}

/// `-f`.
#[derive(Clone, Copy, Debug)]
pub struct Negated<F>(pub F);

impl<F: AmbientField> AmbientField for Negated<F> {
    fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> T {
        -self.0.eval(x)
    }
    fn degree_hint(&self) -> usize {
        self.0.degree_hint()
    }
    fn parity(&self) -> Option<usize> {
        self.0.parity()
    }
}

/// `x ↦ f(Rᵀ x)` for an orthogonal matrix `R`, i.e. `f` moved by `R`.
#[derive(Clone, Debug)]
pub struct Rotated<F> {
    pub field: F,
    pub rotation: DMatrix<f64>,
}

impl<F: AmbientField> AmbientField for Rotated<F> {
    fn ambient_dim(&self) -> usize {
        self.field.ambient_dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let n = x.len();
        let y: Vec<T> = (0..n)
            .map(|i| {
                let mut acc = T::constant(0.0);
                for (j, xj) in x.iter().enumerate() {
                    // (Rᵀ x)_i = Σ_j R_{j i} x_j
                    acc += *xj * self.rotation[(j, i)];
                }
                acc
            })
            .collect();
        self.field.eval(&y)
    }
    fn degree_hint(&self) -> usize {
        self.field.degree_hint()
    }
    fn parity(&self) -> Option<usize> {
        self.field.parity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_form_jet() {
        let a = vec![vec![1.0, 0.5, 0.0], vec![0.5, 2.0, 0.0], vec![0.0, 0.0, -1.0]];
        let q = Polynomial::quadratic_form(&a);
        let j = ambient_jet(&q, &[0.3, -0.2, 0.9]);
        let x = DVector::from_vec(vec![0.3, -0.2, 0.9]);
        let am = DMatrix::from_fn(3, 3, |r, c| a[r][c]);
        assert!((j.value - (x.transpose() * &am * &x)[(0, 0)]).abs() < 1e-15);
        assert!((&j.gradient - 2.0 * &am * &x).norm() < 1e-14);
        assert!((&j.hessian - 2.0 * &am).norm() < 1e-14);
    }

    #[test]
    fn rotated_field_moves_with_rotation() {
        let p = Polynomial::coordinate(3, 0);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let r = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let moved = Rotated { field: p.clone(), rotation: r.clone() };
        let x = DVector::from_vec(vec![0.6, 0.0, 0.8]);
        let rx = &r * &x;
        assert!((moved.value(rx.as_slice()) - p.value(x.as_slice())).abs() < 1e-15);
    }
}
