use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::{Configuration, Torus};
use crate::{Error, Result};

/// Site-count limit for truncated hierarchies (configurations are `u64` masks).
pub const MAX_HIERARCHY_SITES: usize = 64;

/// Upper limit on the number of stored configurations in one [`StateSpace`].
pub const MAX_STATES: usize = 4_000_000;

/// All configurations with at most `n_max` points on a torus, enumerated layer
/// by layer in lexicographic order of their sorted site lists.
///
/// Flat index `offset(n) + rank` addresses layer `n`; this is the layout of
/// every value vector in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    torus: Torus,
    sites: usize,
    n_max: usize,
    binom: Vec<u64>,
    masks: Vec<u64>,
    offsets: Vec<usize>,
}

impl StateSpace {
    pub fn new(torus: Torus, n_max: usize) -> Result<Self> {
        let sites = torus.site_count();
        if sites > MAX_HIERARCHY_SITES {
            return Err(Error::InvalidParameter {
                name: "sites",
                reason: "truncated hierarchies support at most 64 sites",
            });
        }
        let n_max = n_max.min(sites);
        let w = sites + 1;
        let mut binom = vec![0u64; w * w];
        for a in 0..w {
            binom[a * w] = 1;
            for b in 1..=a {
                binom[a * w + b] = binom[(a - 1) * w + b - 1] + binom[(a - 1) * w + b];
            }
        }
        let mut offsets = Vec::with_capacity(n_max + 2);
        let mut total = 0usize;
        for n in 0..=n_max {
            offsets.push(total);
            total = total.saturating_add(binom[sites * w + n] as usize);
            if total > MAX_STATES {
                return Err(Error::DimensionCap { dim: total, cap: MAX_STATES });
            }
        }
        offsets.push(total);

        let mut masks = Vec::with_capacity(total);
        let mut comb: Vec<usize> = Vec::with_capacity(n_max);
        for n in 0..=n_max {
            comb.clear();
            comb.extend(0..n);
            loop {
                masks.push(comb.iter().fold(0u64, |m, &s| m | (1u64 << s)));
                // advance to the next n-combination in lexicographic order
                let mut i = n;
                let mut advanced = false;
                while i > 0 {
                    i -= 1;
                    if comb[i] < sites - n + i {
                        comb[i] += 1;
                        for j in i + 1..n {
                            comb[j] = comb[j - 1] + 1;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
        debug_assert_eq!(masks.len(), total);
        Ok(StateSpace { torus, sites, n_max, binom, masks, offsets })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Truncation order (capped at the site count).
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `D = Σ_{n ≤ N_max} C(S, n)`.
    pub fn dim(&self) -> usize {
        self.masks.len()
    }

    #[inline]
    pub fn binomial(&self, a: usize, b: usize) -> u64 {
        if b > a || a > self.sites {
            0
        } else {
            self.binom[a * (self.sites + 1) + b]
        }
    }

    pub fn layer(&self, n: usize) -> Range<usize> {
        if n > self.n_max {
            let end = self.dim();
            return end..end;
        }
        self.offsets[n]..self.offsets[n + 1]
    }

    pub fn offset(&self, n: usize) -> usize {
        self.offsets[n.min(self.n_max + 1)]
    }

    #[inline]
    pub fn mask(&self, index: usize) -> u64 {
        self.masks[index]
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn configuration(&self, index: usize) -> Configuration {
        Configuration::from_mask(self.masks[index])
    }

    /// Flat index of the configuration with bit mask `mask`; `None` above `N_max`.
    #[inline]
    pub fn index_of(&self, mask: u64) -> Option<usize> {
        let n = mask.count_ones() as usize;
        if n > self.n_max || (self.sites < 64 && mask >> self.sites != 0) {
            return None;
        }
        // lexicographic rank via the hockey-stick identity
        let mut rank: u64 = 0;
        let mut prev_next = 0usize;
        let mut m = mask;
        let mut i = 0;
        while m != 0 {
            let c = m.trailing_zeros() as usize;
            m &= m - 1;
            rank += self.binomial(self.sites - prev_next, n - i) - self.binomial(self.sites - c, n - i);
            prev_next = c + 1;
            i += 1;
        }
        Some(self.offsets[n] + rank as usize)
    }

    pub fn index_of_config(&self, cfg: &Configuration) -> Option<usize> {
        self.index_of(cfg.mask()?)
    }

    /// Mask with every site of the torus set.
    pub fn full_mask(&self) -> u64 {
        if self.sites == 64 {
            u64::MAX
        } else {
            (1u64 << self.sites) - 1
        }
    }
}

/// A bounded function on finite configurations with bounded support: zero on
/// configurations of more than `max_order` points or leaving the window `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportedFunction {
    values: Vec<f64>,
    max_order: usize,
    window: u64,
}

impl SupportedFunction {
    pub fn zeros(space: &StateSpace, max_order: usize, window: u64) -> Self {
        SupportedFunction {
            values: vec![0.0; space.dim()],
            max_order: max_order.min(space.n_max()),
            window: window & space.full_mask(),
        }
    }

    /// Tabulates `f` on the support; values outside it are zero.
    pub fn from_fn<F>(space: &StateSpace, max_order: usize, window: u64, mut f: F) -> Self
    where
        F: FnMut(&Configuration) -> f64,
    {
        let mut g = SupportedFunction::zeros(space, max_order, window);
        for idx in 0..space.layer(g.max_order).end {
            let mask = space.mask(idx);
            if mask & !g.window == 0 {
                g.values[idx] = f(&Configuration::from_mask(mask));
            }
        }
        g
    }

    /// Wraps full-space values; entries outside the support must be zero.
    pub fn from_values(
        space: &StateSpace,
        max_order: usize,
        window: u64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != space.dim() {
            return Err(Error::ShapeMismatch {
                expected: space.dim(),
                found: values.len(),
                what: "supported function length",
            });
        }
        let g = SupportedFunction {
            values,
            max_order: max_order.min(space.n_max()),
            window: window & space.full_mask(),
        };
        for (idx, v) in g.values.iter().enumerate() {
            if *v != 0.0 && !g.in_support(space.mask(idx)) {
                return Err(Error::InvalidParameter {
                    name: "supported function",
                    reason: "nonzero value outside the declared support",
                });
            }
        }
        Ok(g)
    }

    /// Indicator of the empty configuration.
    pub fn empty_indicator(space: &StateSpace) -> Self {
        let mut g = SupportedFunction::zeros(space, 0, 0);
        g.values[0] = 1.0;
        g
    }

    #[inline]
    pub fn in_support(&self, mask: u64) -> bool {
        mask.count_ones() as usize <= self.max_order && mask & !self.window == 0
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// `G(η)`, zero off the support or above the stored order.
    pub fn value(&self, space: &StateSpace, cfg: &Configuration) -> f64 {
        match cfg.mask() {
            Some(mask) => self.value_by_mask(space, mask),
            None => 0.0,
        }
    }

    #[inline]
    pub fn value_by_mask(&self, space: &StateSpace, mask: u64) -> f64 {
        if !self.in_support(mask) {
            return 0.0;
        }
        space.index_of(mask).map_or(0.0, |i| self.values[i])
    }

    pub fn set(&mut self, space: &StateSpace, cfg: &Configuration, value: f64) -> Result<()> {
        let mask = cfg.mask().filter(|&m| self.in_support(m)).ok_or(Error::InvalidParameter {
            name: "configuration",
            reason: "outside the support of the function",
        })?;
        let idx = space.index_of(mask).ok_or(Error::InvalidParameter {
            name: "configuration",
            reason: "above the truncation order",
        })?;
        self.values[idx] = value;
        Ok(())
    }

    /// `a·G1 + b·G2` on the union of supports.
    pub fn linear_combination(a: f64, g1: &Self, b: f64, g2: &Self) -> Self {
        SupportedFunction {
            values: g1.values.iter().zip(&g2.values).map(|(x, y)| a * x + b * y).collect(),
            max_order: g1.max_order.max(g2.max_order),
            window: g1.window | g2.window,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layers_have_binomial_sizes_and_lexicographic_order() {
        let t = Torus::new(1, 5, 1.0).unwrap();
        let sp = StateSpace::new(t, 3).unwrap();
        assert_eq!(sp.dim(), 1 + 5 + 10 + 10);
        let layer2: Vec<_> = sp.layer(2).map(|i| sp.configuration(i)).collect();
        assert_eq!(layer2[0].sites(), &[0, 1]);
        assert_eq!(layer2[4].sites(), &[1, 2]);
        assert_eq!(layer2[9].sites(), &[3, 4]);
        for w in layer2.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn rank_inverts_enumeration() {
        let t = Torus::new(2, 3, 1.0).unwrap();
        let sp = StateSpace::new(t, 4).unwrap();
        for i in 0..sp.dim() {
            assert_eq!(sp.index_of(sp.mask(i)), Some(i));
        }
        assert_eq!(sp.index_of(0b11111), None);
        assert_eq!(sp.index_of(1 << 9), None);
    }

    #[test]
    fn n_max_is_capped_and_large_tori_rejected() {
        let t = Torus::new(1, 3, 1.0).unwrap();
        let sp = StateSpace::new(t, 10).unwrap();
        assert_eq!(sp.n_max(), 3);
        assert_eq!(sp.dim(), 8);
        assert!(StateSpace::new(Torus::new(1, 65, 1.0).unwrap(), 1).is_err());
    }

    #[test]
    fn supported_function_enforces_support() {
        let t = Torus::new(1, 4, 1.0).unwrap();
        let sp = StateSpace::new(t, 3).unwrap();
        let g = SupportedFunction::from_fn(&sp, 2, 0b0011, |c| 1.0 + c.len() as f64);
        let inside = Configuration::new(alloc::vec![0, 1]).unwrap();
        let outside = Configuration::new(alloc::vec![0, 2]).unwrap();
        assert_eq!(g.value(&sp, &inside), 3.0);
        assert_eq!(g.value(&sp, &outside), 0.0);
        let mut h = g.clone();
        assert!(h.set(&sp, &outside, 1.0).is_err());
        let mut bad = alloc::vec![0.0; sp.dim()];
        bad[sp.dim() - 1] = 1.0;
        assert!(SupportedFunction::from_values(&sp, 2, 0b1111, bad).is_err());
    }
}
