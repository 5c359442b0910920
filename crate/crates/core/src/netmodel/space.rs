//! Enumerated truncated Hilbert space.
//!
//! A configuration stores one occupation number per mode: first the system
//! spins (0 or 1), then the bath sites (0..=n_max). The basis keeps every
//! configuration whose total excitation number is at most the global cap.
//!
//! Ordering is fixed and documented for bit-exact regression output: states
//! are sorted by total excitation number first, then lexicographically over
//! the occupation tuple (system spins before bath sites). The vacuum is
//! always ordinal 0.

use crate::{Error, Result};
use std::collections::HashMap;

/// Default hard limit on the basis dimension.
pub const DEFAULT_DIMENSION_LIMIT: usize = 2_000_000;

/// One occupation configuration.
pub type Config = Box<[u8]>;

/// Enumerated basis for a network with `n_sys` spins and `n_bath` sites.
#[derive(Debug, Clone)]
pub struct SpaceDescriptor {
    n_sys: usize,
    n_bath: usize,
    site_cap: u8,
    excitation_cap: u32,
    configs: Vec<Config>,
    index: HashMap<Config, u32>,
}

impl SpaceDescriptor {
    /// Enumerate all configurations with per-bath-site occupation at most
    /// `site_cap` and total occupation at most `excitation_cap`.
    pub fn enumerate(
        n_sys: usize,
        n_bath: usize,
        site_cap: u8,
        excitation_cap: u32,
        dimension_limit: Option<usize>,
    ) -> Result<Self> {
        let limit = dimension_limit.unwrap_or(DEFAULT_DIMENSION_LIMIT);
        let n_modes = n_sys + n_bath;
        let mut configs: Vec<Config> = Vec::new();
        let mut stack = vec![0u8; n_modes];

        // Depth-first enumeration in lexicographic order for each total.
        fn recurse(
            pos: usize,
            remaining: u32,
            stack: &mut Vec<u8>,
            n_sys: usize,
            site_cap: u8,
            out: &mut Vec<Config>,
            limit: usize,
        ) -> Result<()> {
            if pos == stack.len() {
                if remaining == 0 {
                    if out.len() >= limit {
                        return Err(Error::DimensionOverflow {
                            dim: out.len() + 1,
                            limit,
                        });
                    }
                    out.push(stack.clone().into_boxed_slice());
                }
                return Ok(());
            }
            let cap = if pos < n_sys { 1 } else { site_cap };
            let top = remaining.min(cap as u32) as u8;
            for occ in 0..=top {
                stack[pos] = occ;
                recurse(pos + 1, remaining - occ as u32, stack, n_sys, site_cap, out, limit)?;
            }
            stack[pos] = 0;
            Ok(())
        }

        for total in 0..=excitation_cap {
            recurse(0, total, &mut stack, n_sys, site_cap, &mut configs, limit)?;
        }

        let index = configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as u32))
            .collect();
        Ok(Self {
            n_sys,
            n_bath,
            site_cap,
            excitation_cap,
            configs,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn n_sys(&self) -> usize {
        self.n_sys
    }

    pub fn n_bath(&self) -> usize {
        self.n_bath
    }

    pub fn site_cap(&self) -> u8 {
        self.site_cap
    }

    pub fn excitation_cap(&self) -> u32 {
        self.excitation_cap
    }

    /// Configuration for a given ordinal.
    pub fn config(&self, ordinal: usize) -> &[u8] {
        &self.configs[ordinal]
    }

    /// Ordinal for a configuration, if inside the truncated space.
    pub fn ordinal(&self, config: &[u8]) -> Option<u32> {
        self.index.get(config).copied()
    }

    /// Ordinal of the vacuum configuration.
    pub fn vacuum(&self) -> usize {
        0
    }

    /// Occupation of system spin `alpha` in configuration `ordinal`.
    pub fn sys_occ(&self, ordinal: usize, alpha: usize) -> u8 {
        self.configs[ordinal][alpha]
    }

    /// Occupation of bath site `site` (1-based) in configuration `ordinal`.
    pub fn bath_occ(&self, ordinal: usize, site: usize) -> u8 {
        self.configs[ordinal][self.n_sys + site - 1]
    }

    /// Mode index of bath site `site` (1-based) within a configuration.
    pub fn bath_mode(&self, site: usize) -> usize {
        debug_assert!((1..=self.n_bath).contains(&site));
        self.n_sys + site - 1
    }

    /// Total excitation number of a configuration.
    pub fn total_occ(&self, ordinal: usize) -> u32 {
        self.configs[ordinal].iter().map(|&o| o as u32).sum()
    }

    /// Ordinal of the state with a single excitation in the given mode.
    pub fn single_excitation(&self, mode: usize) -> Option<u32> {
        let mut cfg = vec![0u8; self.n_sys + self.n_bath];
        cfg[mode] = 1;
        self.ordinal(&cfg)
    }
}
