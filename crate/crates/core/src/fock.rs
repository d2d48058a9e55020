//! Single-species bosonic Fock bases on an `L`-site ring.
//!
//! States are enumerated in strict lexicographic descending order of their
//! occupation vectors, e.g. for three sites and two particles:
//! `(2,0,0), (1,1,0), (1,0,1), (0,2,0), (0,1,1), (0,0,2)`.
//! Site indices are zero-based in this API and wrap around the ring.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Smallest ring for which the bonds `j -> j+1` are all distinct.
pub const MIN_SITES: usize = 3;
pub const MAX_SITES: usize = 8;
pub const MAX_PARTICLES: usize = 12;

fn check_domain(sites: usize, particles: usize) -> Result<()> {
    if sites < MIN_SITES {
        return Err(Error::Domain(format!(
            "ring needs at least {MIN_SITES} sites (got L = {sites}); \
             smaller rings double-count the wrap-around bond"
        )));
    }
    if sites > MAX_SITES {
        return Err(Error::Domain(format!(
            "at most {MAX_SITES} sites are supported (got L = {sites})"
        )));
    }
    if particles < 1 {
        return Err(Error::Domain("need at least one particle (got N = 0)".into()));
    }
    if particles > MAX_PARTICLES {
        return Err(Error::Domain(format!(
            "at most {MAX_PARTICLES} particles per species are supported (got N = {particles})"
        )));
    }
    Ok(())
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of ways to place `particles` bosons on `sites` sites,
/// `binom(N + L - 1, N)`.
pub fn dimension(sites: usize, particles: usize) -> Result<usize> {
    check_domain(sites, particles)?;
    Ok(binomial(particles + sites - 1, particles))
}

/// Occupation vector `(n_1, ..., n_L)` of one species.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occupations: Vec<u8>,
}

impl FockState {
    pub fn new(occupations: Vec<u8>) -> Self {
        FockState { occupations }
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occupations
    }

    pub fn sites(&self) -> usize {
        self.occupations.len()
    }

    pub fn particles(&self) -> usize {
        self.occupations.iter().map(|&n| n as usize).sum()
    }

    /// Applies `d_to^† d_from`. Returns the resulting state together with the
    /// bosonic amplitude `sqrt(n_from) * sqrt(n_to + 1)`, or `None` when the
    /// source site is empty. Indices are taken modulo the ring size.
    ///
    /// Panics if `from` and `to` refer to the same site.
    pub fn hop(&self, from: usize, to: usize) -> Option<(FockState, f64)> {
        let sites = self.sites();
        let (from, to) = (from % sites, to % sites);
        assert_ne!(from, to, "hop requires two distinct sites");
        let n_from = self.occupations[from];
        if n_from == 0 {
            return None;
        }
        let n_to = self.occupations[to];
        let amplitude = (n_from as f64).sqrt() * ((n_to as f64) + 1.0).sqrt();
        let mut occupations = self.occupations.clone();
        occupations[from] -= 1;
        occupations[to] += 1;
        Some((FockState { occupations }, amplitude))
    }
}

impl std::fmt::Display for FockState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Ordered, indexable enumeration of all Fock states for `(L, N)`.
#[derive(Clone, Debug)]
pub struct Basis {
    sites: usize,
    particles: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl Basis {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        let dim = dimension(sites, particles)?;
        let mut states = Vec::with_capacity(dim);
        let mut scratch = vec![0u8; sites];
        fill_descending(&mut scratch, 0, particles, &mut states);
        debug_assert_eq!(states.len(), dim);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Basis {
            sites,
            particles,
            states,
            index,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &FockState {
        &self.states[i]
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &FockState)> {
        self.states.iter().enumerate()
    }
}

fn fill_descending(scratch: &mut [u8], site: usize, remaining: usize, out: &mut Vec<FockState>) {
    if site + 1 == scratch.len() {
        scratch[site] = remaining as u8;
        out.push(FockState::new(scratch.to_vec()));
        return;
    }
    for n in (0..=remaining).rev() {
        scratch[site] = n as u8;
        fill_descending(scratch, site + 1, remaining - n, out);
    }
    scratch[site] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(v: &[u8]) -> FockState {
        FockState::new(v.to_vec())
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(3, 2).unwrap(), 6);
        assert_eq!(dimension(3, 1).unwrap(), 3);
        assert_eq!(dimension(5, 4).unwrap(), 70);
    }

    #[test]
    fn dimension_rejects_small_rings_and_empty_species() {
        assert!(matches!(dimension(2, 2), Err(Error::Domain(_))));
        assert!(matches!(dimension(3, 0), Err(Error::Domain(_))));
        assert!(matches!(dimension(9, 1), Err(Error::Domain(_))));
        assert!(matches!(dimension(3, 13), Err(Error::Domain(_))));
        assert!(Basis::new(2, 1).is_err());
    }

    #[test]
    fn enumeration_order() {
        let basis = Basis::new(3, 2).unwrap();
        let expected: Vec<FockState> = [
            [2, 0, 0],
            [1, 1, 0],
            [1, 0, 1],
            [0, 2, 0],
            [0, 1, 1],
            [0, 0, 2],
        ]
        .iter()
        .map(|v| st(v))
        .collect();
        assert_eq!(basis.states(), expected.as_slice());

        let single = Basis::new(3, 1).unwrap();
        assert_eq!(single.states(), &[st(&[1, 0, 0]), st(&[0, 1, 0]), st(&[0, 0, 1])]);
        assert_eq!(Basis::new(4, 1).unwrap().dim(), 4);
    }

    #[test]
    fn hop_examples() {
        // sites are zero-based here: site 1 -> index 0
        let (s, a) = st(&[2, 0, 0]).hop(0, 1).unwrap();
        assert_eq!(s, st(&[1, 1, 0]));
        assert!((a - 2f64.sqrt()).abs() < 1e-15);

        assert!(st(&[0, 1, 1]).hop(0, 1).is_none());

        let (s, a) = st(&[1, 1, 0]).hop(1, 0).unwrap();
        assert_eq!(s, st(&[2, 0, 0]));
        assert!((a - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hop_wraps_around_the_ring() {
        let (s, a) = st(&[0, 0, 3]).hop(2, 3).unwrap();
        assert_eq!(s, st(&[1, 0, 2]));
        assert!((a - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    #[should_panic]
    fn hop_to_same_site_panics() {
        st(&[1, 0, 0]).hop(0, 3);
    }

    #[test]
    fn index_map_is_bijective() {
        for sites in 3..=6 {
            for particles in 1..=4 {
                let basis = Basis::new(sites, particles).unwrap();
                assert_eq!(basis.dim(), dimension(sites, particles).unwrap());
                for (i, s) in basis.iter() {
                    assert_eq!(basis.index_of(s), Some(i));
                    assert_eq!(s.particles(), particles);
                }
                assert!(basis.states().windows(2).all(|w| w[0] > w[1]));
            }
        }
    }
}
