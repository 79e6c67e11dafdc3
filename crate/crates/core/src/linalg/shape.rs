use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered, labeled tensor factors of a Hilbert space, e.g. `R ⊗ Q ⊗ E`.
///
/// Flat indices are row-major over the factors: the last label varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemShape {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SystemShape {
    pub fn new<S: Into<String>>(dims: Vec<usize>, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if dims.len() != labels.len() {
            return Err(Error::InvalidShape(format!(
                "{} dims but {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if dims.is_empty() {
            return Err(Error::InvalidShape("no subsystems".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidShape(format!(
                "subsystem `{}` has dimension 0",
                labels[pos]
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { dims, labels })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new(vec![dim], vec![label.into()])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.index_of(label)?])
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    /// Positions of `labels`, sorted into this shape's order.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let i = self.index_of(l.as_ref())?;
            if out.contains(&i) {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            out.push(i);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Concatenation `self ⊗ other`; labels must be disjoint.
    pub fn concat(&self, other: &SystemShape) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Self::new(dims, labels)
    }

    /// Sub-shape made of the factors at `positions`, in the given order.
    pub fn select(&self, positions: &[usize]) -> Self {
        Self {
            dims: positions.iter().map(|&i| self.dims[i]).collect(),
            labels: positions.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }

    /// Positions not in `positions`, in order.
    pub fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|i| !positions.contains(i)).collect()
    }

    pub fn with_dim(&self, position: usize, dim: usize) -> Self {
        let mut s = self.clone();
        s.dims[position] = dim;
        s
    }

    pub fn with_label(&self, position: usize, label: impl Into<String>) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels[position] = label.into();
        Self::new(self.dims.clone(), labels)
    }

    /// Resolve a label order into a permutation of positions.
    pub fn order<S: AsRef<str>>(&self, order: &[S]) -> Result<Vec<usize>> {
        if order.len() != self.len() {
            return Err(Error::InvalidShape(format!(
                "permutation names {} labels, shape has {}",
                order.len(),
                self.len()
            )));
        }
        let mut perm = Vec::with_capacity(order.len());
        for l in order {
            let i = self.index_of(l.as_ref())?;
            if perm.contains(&i) {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            perm.push(i);
        }
        Ok(perm)
    }

    /// For a permutation of positions, the map from new flat index to old flat index.
    pub(crate) fn permutation_map(&self, perm: &[usize]) -> Vec<usize> {
        let n = self.len();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let total = self.total_dim();
        let mut map = Vec::with_capacity(total);
        let mut digits = vec![0usize; n];
        for _ in 0..total {
            let old: usize = digits.iter().zip(perm).map(|(&d, &p)| d * strides[p]).sum();
            map.push(old);
            for k in (0..n).rev() {
                digits[k] += 1;
                if digits[k] < new_dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        map
    }
}

impl std::fmt::Display for SystemShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .labels
            .iter()
            .zip(&self.dims)
            .map(|(l, d)| format!("{l}:{d}"))
            .collect();
        write!(f, "[{}]", parts.join(" ⊗ "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_mismatch() {
        assert!(matches!(
            SystemShape::new(vec![2, 2], vec!["A", "A"]),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(SystemShape::new(vec![2], vec!["A", "B"]).is_err());
        assert!(SystemShape::new(vec![0], vec!["A"]).is_err());
    }

    #[test]
    fn permutation_map_swaps_factors() {
        let s = SystemShape::new(vec![2, 3], vec!["A", "B"]).unwrap();
        let map = s.permutation_map(&[1, 0]);
        // new index (b, a) = b*2 + a maps to old a*3 + b
        for b in 0..3 {
            for a in 0..2 {
                assert_eq!(map[b * 2 + a], a * 3 + b);
            }
        }
    }
}
