//! Multi-degrees in N^k and shift vectors in Z^k.

use std::fmt;
use std::ops::{Add, Index};

/// An element of N^k, ordered componentwise for `le` and lexicographically for `Ord`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Degree(Vec<u32>);

impl Degree {
    pub fn new(coords: Vec<u32>) -> Self {
        Degree(coords)
    }

    pub fn zero(k: usize) -> Self {
        Degree(vec![0; k])
    }

    pub fn ones(k: usize) -> Self {
        Degree(vec![1; k])
    }

    /// The unit vector in color `i` (0-based).
    pub fn unit(k: usize, i: usize) -> Self {
        let mut d = vec![0; k];
        d[i] = 1;
        Degree(d)
    }

    pub fn splat(k: usize, value: u32) -> Self {
        Degree(vec![value; k])
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Every coordinate is at least one.
    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&c| c > 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Degree) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn join(&self, other: &Degree) -> Degree {
        Degree(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn meet(&self, other: &Degree) -> Degree {
        Degree(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    /// Partial subtraction; `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &Degree) -> Option<Degree> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Degree)
    }

    pub fn scale(&self, t: u32) -> Degree {
        Degree(self.0.iter().map(|c| c * t).collect())
    }

    pub fn with(&self, i: usize, value: u32) -> Degree {
        let mut d = self.0.clone();
        d[i] = value;
        Degree(d)
    }

    /// `self - other` as a shift vector.
    pub fn diff(&self, other: &Degree) -> Shift {
        Shift(self.0.iter().zip(&other.0).map(|(a, b)| *a as i64 - *b as i64).collect())
    }

    /// All degrees `d` with `0 <= d <= self`, ordered by total then lexicographically.
    pub fn below(&self) -> Vec<Degree> {
        let mut out = vec![Vec::new()];
        for &bound in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=bound).map(move |c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                })
                .collect();
        }
        let mut degrees: Vec<Degree> = out.into_iter().map(Degree).collect();
        degrees.sort_by(|a, b| a.total().cmp(&b.total()).then_with(|| a.cmp(b)));
        degrees
    }
}

impl Add for &Degree {
    type Output = Degree;
    fn add(self, rhs: &Degree) -> Degree {
        Degree(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Add for Degree {
    type Output = Degree;
    fn add(self, rhs: Degree) -> Degree {
        &self + &rhs
    }
}

impl Index<usize> for Degree {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// An element of Z^k: the `n` of a groupoid element `(x, n, y)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shift(Vec<i64>);

impl Shift {
    pub fn new(coords: Vec<i64>) -> Self {
        Shift(coords)
    }

    pub fn zero(k: usize) -> Self {
        Shift(vec![0; k])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> Shift {
        Shift(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Shift) -> Shift {
        Shift(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Positive part `n+`.
    pub fn pos(&self) -> Degree {
        Degree(self.0.iter().map(|&c| c.max(0) as u32).collect())
    }

    /// Negative part `n-`, so that `n = n+ - n-`.
    pub fn neg_part(&self) -> Degree {
        Degree(self.0.iter().map(|&c| (-c).max(0) as u32).collect())
    }

    pub fn max_abs(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }
}

impl fmt::Debug for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_and_meet_are_componentwise() {
        let a = Degree::new(vec![1, 4]);
        let b = Degree::new(vec![3, 2]);
        assert_eq!(a.join(&b), Degree::new(vec![3, 4]));
        assert_eq!(a.meet(&b), Degree::new(vec![1, 2]));
        assert!(a.meet(&b).le(&a) && a.le(&a.join(&b)));
    }

    #[test]
    fn partial_subtraction() {
        let a = Degree::new(vec![1, 4]);
        assert_eq!(a.checked_sub(&Degree::new(vec![1, 1])), Some(Degree::new(vec![0, 3])));
        assert_eq!(a.checked_sub(&Degree::new(vec![2, 0])), None);
    }

    #[test]
    fn shift_parts() {
        let n = Shift::new(vec![2, -1, 0]);
        assert_eq!(n.pos(), Degree::new(vec![2, 0, 0]));
        assert_eq!(n.neg_part(), Degree::new(vec![0, 1, 0]));
        assert_eq!(n.pos().diff(&n.neg_part()), n);
    }

    #[test]
    fn below_enumerates_box() {
        let b = Degree::new(vec![1, 2]).below();
        assert_eq!(b.len(), 6);
        assert_eq!(b[0], Degree::zero(2));
        assert_eq!(b.last().unwrap(), &Degree::new(vec![1, 2]));
    }
}
