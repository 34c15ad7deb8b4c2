//! Transition records and their grouping into chains and episodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a transition leads: another state, or episode termination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Successor {
    State(Vec<f64>),
    Terminal,
}

impl Successor {
    pub fn state(&self) -> Option<&[f64]> {
        match self {
            Successor::State(s) => Some(s),
            Successor::Terminal => None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Successor::Terminal)
    }
}

/// One observed transition `(i, s, s')` of chain `i` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub chain: usize,
    pub state: Vec<f64>,
    pub successor: Successor,
}

impl TransitionRecord {
    pub fn new(chain: usize, state: Vec<f64>, successor: Vec<f64>) -> Self {
        Self {
            chain,
            state,
            successor: Successor::State(successor),
        }
    }

    pub fn terminal(chain: usize, state: Vec<f64>) -> Self {
        Self {
            chain,
            state,
            successor: Successor::Terminal,
        }
    }
}

/// An ordered run of consecutive records belonging to one chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    pub chain: usize,
    /// Indices into [`TransitionDataset::records`], in time order.
    pub records: Vec<usize>,
}

impl Episode {
    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// A validated collection of transitions from `k` chains over `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionDataset {
    records: Vec<TransitionRecord>,
    k: usize,
    dim: usize,
    episodes: Vec<Episode>,
}

impl TransitionDataset {
    /// Builds a dataset with explicit dimensionality and chain count.
    ///
    /// Chains without records are allowed here; file ingestion additionally
    /// calls [`TransitionDataset::require_contiguous`].
    pub fn new(dim: usize, k: usize, records: Vec<TransitionRecord>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("state dimensionality must be >= 1".into()));
        }
        for (index, r) in records.iter().enumerate() {
            if r.chain == 0 || r.chain > k {
                return Err(Error::ChainOutOfRange { chain: r.chain, k });
            }
            if r.state.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.state.len(),
                });
            }
            if r.state.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidRecord {
                    index,
                    reason: "state has a non-finite coordinate".into(),
                });
            }
            if let Successor::State(sp) = &r.successor {
                if sp.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: sp.len(),
                    });
                }
                if sp.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidRecord {
                        index,
                        reason: "successor has a non-finite coordinate".into(),
                    });
                }
            }
        }
        let episodes = build_episodes(k, &records);
        Ok(Self {
            records,
            k,
            dim,
            episodes,
        })
    }

    /// Infers `dim` from the first record and `k` from the largest chain index.
    pub fn from_records(records: Vec<TransitionRecord>) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptyDataset)?;
        let dim = first.state.len();
        let k = records.iter().map(|r| r.chain).max().unwrap_or(0);
        Self::new(dim, k, records)
    }

    /// Fails unless every chain `1..=k` owns at least one record.
    pub fn require_contiguous(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(missing) = self.chain_counts().iter().position(|&n| n == 0) {
            return Err(Error::InvalidRecord {
                index: 0,
                reason: format!("chain {} has no records; chain indices must be contiguous", missing + 1),
            });
        }
        Ok(())
    }

    pub fn records(&self) -> &[TransitionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn has_terminal(&self) -> bool {
        self.records.iter().any(|r| r.successor.is_terminal())
    }

    /// Record count per chain, indexed from 0 (chain 1).
    pub fn chain_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for r in &self.records {
            counts[r.chain - 1] += 1;
        }
        counts
    }

    /// Per-dimension `(min, max)` over all observed states and successors.
    pub fn bounding_box(&self) -> Option<Vec<(f64, f64)>> {
        if self.records.is_empty() {
            return None;
        }
        let mut bbox = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for point in self.points() {
            for (b, &v) in bbox.iter_mut().zip(point) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        Some(bbox)
    }

    /// Every observed point: all states followed by every non-terminal successor.
    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.records
            .iter()
            .map(|r| r.state.as_slice())
            .chain(self.records.iter().filter_map(|r| r.successor.state()))
    }
}

fn build_episodes(k: usize, records: &[TransitionRecord]) -> Vec<Episode> {
    let mut by_chain: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, r) in records.iter().enumerate() {
        by_chain[r.chain - 1].push(i);
    }
    let mut episodes = Vec::new();
    for (c, idx) in by_chain.into_iter().enumerate() {
        let mut current: Vec<usize> = Vec::new();
        for i in idx {
            if let Some(&prev) = current.last() {
                let continues = match &records[prev].successor {
                    Successor::State(sp) => sp == &records[i].state,
                    Successor::Terminal => false,
                };
                if !continues {
                    episodes.push(Episode {
                        chain: c + 1,
                        records: std::mem::take(&mut current),
                    });
                }
            }
            current.push(i);
        }
        if !current.is_empty() {
            episodes.push(Episode {
                chain: c + 1,
                records: current,
            });
        }
    }
    episodes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn episodes_break_on_discontinuity_and_terminal() {
        let records = vec![
            TransitionRecord::new(1, vec![0.0], vec![1.0]),
            TransitionRecord::new(1, vec![1.0], vec![2.0]),
            TransitionRecord::terminal(1, vec![2.0]),
            TransitionRecord::new(1, vec![2.0], vec![3.0]),
            TransitionRecord::new(2, vec![5.0], vec![6.0]),
            TransitionRecord::new(2, vec![7.0], vec![8.0]),
        ];
        let ds = TransitionDataset::from_records(records).unwrap();
        let eps: Vec<_> = ds.episodes().iter().map(|e| (e.chain, e.records.clone())).collect();
        assert_eq!(
            eps,
            vec![(1, vec![0, 1, 2]), (1, vec![3]), (2, vec![4]), (2, vec![5])]
        );
    }

    #[test]
    fn interleaved_chains_group_in_file_order() {
        let records = vec![
            TransitionRecord::new(2, vec![0.0], vec![1.0]),
            TransitionRecord::new(1, vec![9.0], vec![8.0]),
            TransitionRecord::new(2, vec![1.0], vec![2.0]),
        ];
        let ds = TransitionDataset::from_records(records).unwrap();
        assert_eq!(ds.episodes().len(), 2);
        assert_eq!(ds.episodes()[1].records, vec![0, 2]);
        assert_eq!(ds.chain_counts(), vec![1, 2]);
    }

    #[test]
    fn rejects_bad_records() {
        let bad_dim = vec![
            TransitionRecord::new(1, vec![0.0, 1.0], vec![1.0, 1.0]),
            TransitionRecord::new(1, vec![0.0], vec![1.0]),
        ];
        assert!(matches!(
            TransitionDataset::from_records(bad_dim),
            Err(Error::DimensionMismatch { .. })
        ));
        let zero_chain = vec![TransitionRecord::new(0, vec![0.0], vec![1.0])];
        assert!(matches!(
            TransitionDataset::from_records(zero_chain),
            Err(Error::ChainOutOfRange { .. })
        ));
        let nan = vec![TransitionRecord::new(1, vec![f64::NAN], vec![1.0])];
        assert!(TransitionDataset::from_records(nan).is_err());
        assert_eq!(TransitionDataset::from_records(vec![]), Err(Error::EmptyDataset));
        let out_of_range = vec![TransitionRecord::new(3, vec![0.0], vec![1.0])];
        assert!(TransitionDataset::new(1, 2, out_of_range).is_err());
    }

    #[test]
    fn contiguity_check() {
        let ds = TransitionDataset::new(1, 3, vec![TransitionRecord::new(1, vec![0.0], vec![1.0])]).unwrap();
        assert!(ds.require_contiguous().is_err());
    }
}
