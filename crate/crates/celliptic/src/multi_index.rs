//! Multi-indices in graded lexicographic order plus small combinatorics.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;

/// Exponent vector of a monomial `x^alpha` in `n` variables.
///
/// Ordered graded-lexicographically (total order first; within an order
/// block, earlier variables rank higher), which fixes the layout of every
/// serialized coefficient list in the crate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit index `e_axis`.
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut e = vec![0; n];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total order `|alpha|`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    /// Componentwise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference, `None` if any component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if self.0.iter().zip(&other.0).all(|(a, b)| a >= b) {
            Some(MultiIndex(
                self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
            ))
        } else {
            None
        }
    }

    /// `alpha! = prod alpha_i!`.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    /// Monomial value `prod x_i^{alpha_i}`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }

    /// Monomial value for a complex argument.
    pub fn monomial_c(&self, x: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powu(a as u32))
            .product()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(a: usize) -> f64 {
    (1..=a).map(|i| i as f64).product()
}

/// Binomial coefficient as exact f64 (arguments stay small here).
pub fn binomial(a: usize, b: usize) -> f64 {
    if b > a {
        return 0.0;
    }
    let b = b.min(a - b);
    let mut out = 1.0;
    for i in 0..b {
        out = out * (a - i) as f64 / (i + 1) as f64;
    }
    out.round()
}

/// `prod beta_i! / (beta_i - alpha_i)!`, the coefficient picked up when
/// `d^alpha` hits the monomial `x^beta`. Requires `alpha <= beta`.
pub fn falling_factorial(beta: &MultiIndex, alpha: &MultiIndex) -> f64 {
    beta.0
        .iter()
        .zip(&alpha.0)
        .map(|(&b, &a)| {
            debug_assert!(a <= b);
            ((b - a + 1)..=b).map(|i| i as f64).product::<f64>()
        })
        .product()
}

/// All multi-indices of exact order `d`, emitted in graded-lex order.
pub fn indices_of_order(n: usize, d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fill(&mut out, &mut cur, 0, d);
    out
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<usize>, axis: usize, remaining: usize) {
    if axis + 1 == cur.len() {
        cur[axis] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in (0..=remaining).rev() {
        cur[axis] = a;
        fill(out, cur, axis + 1, remaining - a);
    }
    cur[axis] = 0;
}

/// All multi-indices of order `<= d`, in graded-lex order.
pub fn indices_up_to(n: usize, d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for dd in 0..=d {
        out.extend(indices_of_order(n, dd));
    }
    out
}

/// Number of multi-indices of order `<= d` in `n` variables: C(n+d, n).
pub fn count_up_to(n: usize, d: usize) -> usize {
    binomial(n + d, n) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let idx = indices_up_to(2, 2);
        let expect: Vec<Vec<usize>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(idx.iter().map(|m| m.0.clone()).collect::<Vec<_>>(), expect);
        // Ord agrees with generation order.
        let mut sorted = idx.clone();
        sorted.sort();
        assert_eq!(sorted, idx);
    }

    #[test]
    fn counts() {
        assert_eq!(count_up_to(2, 3), 10);
        assert_eq!(count_up_to(3, 2), 10);
        assert_eq!(indices_of_order(3, 2).len(), 6);
    }

    #[test]
    fn falling_factorial_values() {
        // d^(1,1) on x^2 y^3 -> 2*3 x y^2
        let beta = MultiIndex(vec![2, 3]);
        let alpha = MultiIndex(vec![1, 1]);
        assert_eq!(falling_factorial(&beta, &alpha), 6.0);
        // d^(2,0) on x^2 y^3 -> 2! y^3
        assert_eq!(falling_factorial(&beta, &MultiIndex(vec![2, 0])), 2.0);
    }

    #[test]
    fn monomials() {
        let m = MultiIndex(vec![2, 1]);
        assert_eq!(m.monomial(&[2.0, 3.0]), 12.0);
        assert_eq!(m.order(), 3);
        assert_eq!(binomial(5, 2), 10.0);
    }
}
