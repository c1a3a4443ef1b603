use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense table over the joint assignments of `scope`.
///
/// `scope` holds variable ids in strictly increasing order and `card` their
/// cardinalities. Values are row-major: the last variable varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    scope: Vec<usize>,
    card: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn new(scope: Vec<usize>, card: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if scope.len() != card.len() {
            return Err(Error::ScopeMismatch);
        }
        if scope.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "factor scope must be strictly increasing".into(),
            ));
        }
        if card.contains(&0) {
            return Err(Error::InvalidArgument("zero cardinality".into()));
        }
        let size = card.iter().product::<usize>();
        if values.len() != size {
            return Err(Error::InvalidArgument(format!(
                "expected {size} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            scope,
            card,
            values,
        })
    }

    pub fn zeros(scope: Vec<usize>, card: Vec<usize>) -> Result<Self> {
        let size = card.iter().product();
        Self::new(scope, card, vec![0.0; size])
    }

    pub fn uniform(scope: Vec<usize>, card: Vec<usize>) -> Result<Self> {
        let size: usize = card.iter().product();
        Self::new(scope, card, vec![1.0 / size as f64; size])
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn card(&self) -> &[usize] {
        &self.card
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Scales to unit mass. A zero factor is left untouched.
    pub fn normalize(&mut self) {
        let s = self.sum();
        if s > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= s);
        }
    }

    pub fn same_shape(&self, other: &Factor) -> bool {
        self.scope == other.scope && self.card == other.card
    }

    /// Flat index of the assignment given per scope position.
    pub fn index(&self, local: &[usize]) -> usize {
        local
            .iter()
            .zip(&self.card)
            .fold(0, |acc, (&x, &c)| acc * c + x)
    }

    /// Flat index of a full assignment indexed by variable id.
    pub fn index_full(&self, full: &[usize]) -> usize {
        self.scope
            .iter()
            .zip(&self.card)
            .fold(0, |acc, (&v, &c)| acc * c + full[v])
    }

    pub fn get_full(&self, full: &[usize]) -> f64 {
        self.values[self.index_full(full)]
    }

    /// Per-scope-position assignment of a flat index.
    pub fn assignment(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.card.len()];
        for (slot, &c) in out.iter_mut().zip(&self.card).rev() {
            *slot = idx % c;
            idx /= c;
        }
        out
    }

    /// Sums out every variable not in `keep`. Variables of `keep` outside the
    /// scope are ignored.
    pub fn marginal(&self, keep: &[usize]) -> Factor {
        let pos: Vec<usize> = (0..self.scope.len())
            .filter(|&i| keep.contains(&self.scope[i]))
            .collect();
        let scope: Vec<usize> = pos.iter().map(|&i| self.scope[i]).collect();
        let card: Vec<usize> = pos.iter().map(|&i| self.card[i]).collect();
        let mut out = Factor::zeros(scope, card).expect("sub-scope of a valid factor");
        let mut local = vec![0; self.card.len()];
        for &v in &self.values {
            let idx = pos.iter().fold(0, |acc, &i| acc * self.card[i] + local[i]);
            out.values[idx] += v;
            increment(&mut local, &self.card);
        }
        out
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Factor) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::ScopeMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn l1(&self, other: &Factor) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::ScopeMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }
}

/// Advances a mixed-radix counter (last digit fastest). Returns false after
/// wrapping around to all zeros.
pub(crate) fn increment(digits: &mut [usize], radix: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Kullback-Leibler divergence in nats, with 0 ln 0 = 0 and x ln(x/0) = +inf.
pub fn kl(p: &Factor, q: &Factor) -> Result<f64> {
    if !p.same_shape(q) {
        return Err(Error::ScopeMismatch);
    }
    Ok(kl_slices(&p.values, &q.values))
}

pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc += a * (a / b).ln();
        }
    }
    acc.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(p: f64) -> Factor {
        Factor::new(vec![0], vec![2], vec![p, 1.0 - p]).unwrap()
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl(&bern(0.3), &bern(0.3)).unwrap(), 0.0);
        let d = kl(&bern(1.0), &bern(0.5)).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-12);
        let d = kl(&bern(0.75), &bern(0.25)).unwrap();
        assert!((d - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!(kl(&bern(0.5), &bern(1.0)).unwrap().is_infinite());
        assert_eq!(kl(&bern(1.0), &bern(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn kl_scope_mismatch() {
        let q = Factor::new(vec![1], vec![2], vec![0.5, 0.5]).unwrap();
        assert!(matches!(kl(&bern(0.5), &q), Err(Error::ScopeMismatch)));
    }

    #[test]
    fn marginal_and_indexing() {
        // scope (0, 2), cards (2, 3)
        let f = Factor::new(vec![0, 2], vec![2, 3], vec![0.1, 0.2, 0.1, 0.3, 0.2, 0.1]).unwrap();
        assert_eq!(f.assignment(4), vec![1, 1]);
        assert_eq!(f.index(&[1, 1]), 4);
        assert_eq!(f.index_full(&[1, 9, 1]), 4);
        let m = f.marginal(&[0]);
        assert!((m.values()[0] - 0.4).abs() < 1e-12);
        let m = f.marginal(&[2]);
        assert!((m.values()[2] - 0.2).abs() < 1e-12);
        assert_eq!(f.marginal(&[]).values(), &[f.sum()]);
    }

    #[test]
    fn rejects_unsorted_scope() {
        assert!(Factor::new(vec![2, 1], vec![2, 2], vec![0.25; 4]).is_err());
    }
}
