//! Polynomials in `(x1, x2, x3)` used for load data.

use alloc::vec::Vec;

/// Sum of monomials `coef · x1^a x2^b x3^c`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(f64, [u32; 3])>,
}

fn powi(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, _| acc * x)
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            Self::zero()
        } else {
            Self { terms: alloc::vec![(c, [0, 0, 0])] }
        }
    }

    pub fn monomial(coef: f64, powers: [u32; 3]) -> Self {
        Self { terms: alloc::vec![(coef, powers)] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| *c == 0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().filter(|(c, _)| *c != 0.0).map(|(_, p)| p[0] + p[1] + p[2]).max().unwrap_or(0)
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(c, p)| c * powi(x[0], p[0]) * powi(x[1], p[1]) * powi(x[2], p[2]))
            .sum()
    }

    /// `∫_{-1}^{1} x3^k p(x1, x2, x3) dx3`, exact.
    pub fn thickness_moment(&self, k: u32, x1: f64, x2: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, p)| {
                let e = p[2] + k;
                let m = if e % 2 == 1 { 0.0 } else { 2.0 / (e as f64 + 1.0) };
                c * powi(x1, p[0]) * powi(x2, p[1]) * m
            })
            .sum()
    }

    /// `∫_{-1}^{1} x3^k p dx3` as a polynomial in `(x1, x2)`.
    pub fn thickness_integral(&self, k: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter_map(|(c, p)| {
                    let e = p[2] + k;
                    (e % 2 == 0).then(|| (c * 2.0 / (e as f64 + 1.0), [p[0], p[1], 0]))
                })
                .collect(),
        }
    }

    /// Restriction to the plane `x3 = z`.
    pub fn at_x3(&self, z: f64) -> Self {
        Self { terms: self.terms.iter().map(|(c, p)| (c * powi(z, p[2]), [p[0], p[1], 0])).collect() }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { terms: self.terms.iter().map(|(c, p)| (c * t, *p)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self { terms }
    }
}
