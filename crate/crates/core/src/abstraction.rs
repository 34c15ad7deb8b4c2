//! Hyperrectangular state abstractions and the binary split tree behind them.

use serde::{Deserialize, Serialize};

use crate::dataset::Successor;
use crate::error::{Error, Result};

/// Axis-aligned box with half-open intervals `[lower, upper)` on every dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperrectangle {
    pub bounds: Vec<(f64, f64)>,
}

impl Hyperrectangle {
    /// The whole of `R^dim`.
    pub fn unbounded(dim: usize) -> Self {
        Self {
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.bounds
            .iter()
            .zip(point)
            .all(|(&(lo, hi), &v)| lo <= v && v < hi)
    }

    /// True when `c` lies strictly inside the interval on `dim`.
    pub fn is_interior(&self, dim: usize, c: f64) -> bool {
        let (lo, hi) = self.bounds[dim];
        lo < c && c < hi
    }

    /// Splits into `[lower, c)` and `[c, upper)` along `dim`.
    pub fn split(&self, dim: usize, c: f64) -> (Hyperrectangle, Hyperrectangle) {
        let mut lower = self.clone();
        let mut upper = self.clone();
        lower.bounds[dim].1 = c;
        upper.bounds[dim].0 = c;
        (lower, upper)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        state: usize,
    },
    Split {
        dim: usize,
        threshold: f64,
        lower: usize,
        upper: usize,
    },
}

/// Split lineage of a state abstraction. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitTree {
    pub nodes: Vec<TreeNode>,
}

impl SplitTree {
    fn root() -> Self {
        Self {
            nodes: vec![TreeNode::Leaf { state: 0 }],
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    fn leaf_node_of(&self, state: usize) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| matches!(n, TreeNode::Leaf { state: s } if *s == state))
    }
}

/// A partition of `R^D` into `m` hyperrectangles, optionally followed by the
/// absorbing terminal pseudo-state at index `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateAbstraction {
    dim: usize,
    states: Vec<Hyperrectangle>,
    tree: SplitTree,
    terminal: bool,
}

impl StateAbstraction {
    /// One abstract state covering all of `R^dim`.
    pub fn root(dim: usize, terminal: bool) -> Self {
        Self {
            dim,
            states: vec![Hyperrectangle::unbounded(dim)],
            tree: SplitTree::root(),
            terminal,
        }
    }

    /// Rebuilds an abstraction by replaying the splits recorded in `tree`.
    pub fn from_tree(dim: usize, terminal: bool, tree: SplitTree) -> Result<Self> {
        if tree.nodes.is_empty() {
            return Err(Error::InvalidTree("tree has no nodes".into()));
        }
        let m = tree.leaf_count();
        let mut states: Vec<Option<Hyperrectangle>> = vec![None; m];
        let mut visited = vec![false; tree.nodes.len()];
        let mut stack = vec![(0usize, Hyperrectangle::unbounded(dim))];
        while let Some((node, rect)) = stack.pop() {
            if node >= tree.nodes.len() || visited[node] {
                return Err(Error::InvalidTree(format!("node {node} is missing or shared")));
            }
            visited[node] = true;
            match &tree.nodes[node] {
                TreeNode::Leaf { state } => {
                    let slot = states
                        .get_mut(*state)
                        .ok_or_else(|| Error::InvalidTree(format!("leaf state {state} out of range")))?;
                    if slot.is_some() {
                        return Err(Error::InvalidTree(format!("state {state} appears twice")));
                    }
                    *slot = Some(rect);
                }
                TreeNode::Split {
                    dim: d,
                    threshold,
                    lower,
                    upper,
                } => {
                    if *d >= dim || !rect.is_interior(*d, *threshold) {
                        return Err(Error::InvalidTree(format!(
                            "split at node {node} is not interior to its region"
                        )));
                    }
                    let (lo, hi) = rect.split(*d, *threshold);
                    stack.push((*upper, hi));
                    stack.push((*lower, lo));
                }
            }
        }
        if visited.iter().any(|v| !v) {
            return Err(Error::InvalidTree("unreachable nodes".into()));
        }
        let states = states
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidTree("missing leaf state".into()))?;
        Ok(Self {
            dim,
            states,
            tree,
            terminal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of hyperrectangular states, excluding the terminal pseudo-state.
    pub fn m(&self) -> usize {
        self.states.len()
    }

    /// Tensor side length: `m`, plus one when the terminal pseudo-state is present.
    pub fn size(&self) -> usize {
        self.states.len() + usize::from(self.terminal)
    }

    pub fn has_terminal(&self) -> bool {
        self.terminal
    }

    pub fn terminal_index(&self) -> Option<usize> {
        self.terminal.then_some(self.states.len())
    }

    pub fn states(&self) -> &[Hyperrectangle] {
        &self.states
    }

    pub fn tree(&self) -> &SplitTree {
        &self.tree
    }

    /// Index of the state containing `point`.
    pub fn assign(&self, point: &[f64]) -> usize {
        let mut node = 0;
        loop {
            match &self.tree.nodes[node] {
                TreeNode::Leaf { state } => return *state,
                TreeNode::Split {
                    dim,
                    threshold,
                    lower,
                    upper,
                } => {
                    node = if point[*dim] < *threshold { *lower } else { *upper };
                }
            }
        }
    }

    /// Like [`assign`](Self::assign), mapping termination to the terminal index.
    ///
    /// Panics if the successor is terminal but the abstraction has no terminal state.
    pub fn assign_successor(&self, successor: &Successor) -> usize {
        match successor {
            Successor::State(s) => self.assign(s),
            Successor::Terminal => self
                .terminal_index()
                .expect("terminal successor requires a terminal pseudo-state"),
        }
    }

    /// Replaces state `x` with its lower half (kept at index `x`) and appends
    /// its upper half as state `m`. The terminal index shifts to `m + 1`.
    pub fn split(&self, x: usize, dim: usize, threshold: f64) -> Result<Self> {
        if x >= self.states.len() {
            return Err(Error::UnknownState {
                state: x,
                size: self.states.len(),
            });
        }
        if dim >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim + 1,
            });
        }
        if !self.states[x].is_interior(dim, threshold) {
            return Err(Error::InvalidThreshold {
                state: x,
                dim,
                threshold,
            });
        }
        let (lower, upper) = self.states[x].split(dim, threshold);
        let mut states = self.states.clone();
        let new_state = states.len();
        states[x] = lower;
        states.push(upper);

        let mut tree = self.tree.clone();
        let leaf = tree
            .leaf_node_of(x)
            .ok_or_else(|| Error::InvalidTree(format!("no leaf for state {x}")))?;
        let lower_node = tree.nodes.len();
        tree.nodes.push(TreeNode::Leaf { state: x });
        tree.nodes.push(TreeNode::Leaf { state: new_state });
        tree.nodes[leaf] = TreeNode::Split {
            dim,
            threshold,
            lower: lower_node,
            upper: lower_node + 1,
        };
        Ok(Self {
            dim: self.dim,
            states,
            tree,
            terminal: self.terminal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_open_membership() {
        let root = StateAbstraction::root(1, false);
        let split = root.split(0, 0, 0.0).unwrap();
        assert_eq!(split.assign(&[-1e-300]), 0);
        assert_eq!(split.assign(&[0.0]), 1);
        assert!(split.states()[1].contains(&[0.0]));
        assert!(!split.states()[0].contains(&[0.0]));
    }

    #[test]
    fn split_rejects_boundary_thresholds() {
        let a = StateAbstraction::root(2, false).split(0, 1, 0.5).unwrap();
        assert!(matches!(a.split(0, 1, 0.5), Err(Error::InvalidThreshold { .. })));
        assert!(matches!(a.split(1, 1, 0.25), Err(Error::InvalidThreshold { .. })));
        assert!(a.split(0, 1, 0.25).is_ok());
        assert!(a.split(5, 0, 0.0).is_err());
    }

    #[test]
    fn terminal_index_follows_states() {
        let a = StateAbstraction::root(1, true);
        assert_eq!(a.terminal_index(), Some(1));
        let b = a.split(0, 0, 1.0).unwrap();
        assert_eq!(b.terminal_index(), Some(2));
        assert_eq!(b.size(), 3);
        assert_eq!(b.assign_successor(&Successor::Terminal), 2);
    }

    fn random_abstraction(splits: &[(usize, usize, f64)]) -> StateAbstraction {
        let mut a = StateAbstraction::root(2, false);
        for &(x, d, c) in splits {
            let x = x % a.m();
            if a.states()[x].is_interior(d, c) {
                a = a.split(x, d, c).unwrap();
            }
        }
        a
    }

    proptest! {
        #[test]
        fn partition_and_tree_replay(
            splits in prop::collection::vec((0usize..16, 0usize..2, -1.0f64..1.0), 0..15),
            points in prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5), 200),
        ) {
            let a = random_abstraction(&splits);
            prop_assert_eq!(a.tree().leaf_count(), a.m());
            for (x, y) in points {
                let p = [x, y];
                let hits = a.states().iter().filter(|r| r.contains(&p)).count();
                prop_assert_eq!(hits, 1);
                prop_assert!(a.states()[a.assign(&p)].contains(&p));
            }
            let replayed = StateAbstraction::from_tree(2, false, a.tree().clone()).unwrap();
            prop_assert_eq!(replayed, a);
        }
    }
}
