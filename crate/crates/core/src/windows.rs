//! Contiguous temporal windows over chain indices `1..=k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered, disjoint, exhaustive windows; window `w` covers chains `l <= i < u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalAbstraction {
    windows: Vec<(usize, usize)>,
}

impl TemporalAbstraction {
    pub fn new(windows: Vec<(usize, usize)>, k: usize) -> Result<Self> {
        let first = windows
            .first()
            .ok_or_else(|| Error::InvalidWindows("no windows".into()))?;
        if first.0 != 1 {
            return Err(Error::InvalidWindows(format!("first window starts at {}", first.0)));
        }
        if windows.last().map(|w| w.1) != Some(k + 1) {
            return Err(Error::InvalidWindows(format!("last window must end at {}", k + 1)));
        }
        for (w, &(l, u)) in windows.iter().enumerate() {
            if l >= u {
                return Err(Error::InvalidWindows(format!("window {w} is empty ({l}, {u})")));
            }
            if let Some(&(next_l, _)) = windows.get(w + 1) {
                if next_l != u {
                    return Err(Error::InvalidWindows(format!(
                        "window {w} ends at {u} but the next starts at {next_l}"
                    )));
                }
            }
        }
        Ok(Self { windows })
    }

    /// One window per chain.
    pub fn null(k: usize) -> Self {
        Self {
            windows: (1..=k).map(|i| (i, i + 1)).collect(),
        }
    }

    /// A single window covering every chain.
    pub fn single(k: usize) -> Self {
        Self {
            windows: vec![(1, k + 1)],
        }
    }

    /// Consecutive windows of `width` chains; the last may be narrower.
    pub fn uniform(k: usize, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidWindows("window width must be >= 1".into()));
        }
        let windows = (1..=k)
            .step_by(width)
            .map(|l| (l, (l + width).min(k + 1)))
            .collect();
        Self::new(windows, k)
    }

    pub fn windows(&self) -> &[(usize, usize)] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Number of chains covered.
    pub fn k(&self) -> usize {
        self.windows.last().map_or(0, |w| w.1 - 1)
    }

    /// Index of the window containing chain `i` (1-based chain).
    pub fn window_of(&self, chain: usize) -> Option<usize> {
        self.windows
            .iter()
            .position(|&(l, u)| l <= chain && chain < u)
    }

    /// Window slot of every chain, indexed from 0 (chain 1).
    pub fn chain_to_window(&self) -> Vec<usize> {
        let mut map = Vec::with_capacity(self.k());
        for (w, &(l, u)) in self.windows.iter().enumerate() {
            map.extend(std::iter::repeat_n(w, u - l));
        }
        map
    }

    /// Replaces window `w` with `(l_w, cut)` and `(cut, u_w)`.
    pub fn split(&self, w: usize, cut: usize) -> Result<Self> {
        let &(l, u) = self.windows.get(w).ok_or(Error::UnknownWindow {
            window: w,
            n: self.windows.len(),
        })?;
        if !(l < cut && cut < u) {
            return Err(Error::InvalidCut {
                window: w,
                cut,
                epsilon: 1,
            });
        }
        let mut windows = self.windows.clone();
        windows[w] = (l, cut);
        windows.insert(w + 1, (cut, u));
        Ok(Self { windows })
    }
}
