//! Interaction maps: the most entangled eigenstate over a `(U, V)` grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::current_expectation;
use crate::model::{build_hamiltonian, ModelParams};
use crate::spectra::highest_entanglement_eigenstate;

/// Record for one `(U, V)` cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub intra: f64,
    pub inter: f64,
    pub level: usize,
    pub energy: f64,
    pub schmidt_raw: f64,
    pub schmidt: f64,
    pub current: f64,
    pub renormalized_current: f64,
    /// Degeneracy cluster size of the selected eigenstate (1 if isolated).
    pub cluster_size: usize,
}

impl SweepCell {
    pub fn degenerate(&self) -> bool {
        self.cluster_size > 1
    }
}

/// Grid-shaped sweep result; `cells` is row-major in `(U index, V index)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub template: ModelParams,
    pub u_axis: Vec<f64>,
    pub v_axis: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, iu: usize, iv: usize) -> &SweepCell {
        &self.cells[iu * self.v_axis.len() + iv]
    }

    /// Cells with `U = V` exactly.
    pub fn diagonal(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.intra == c.inter)
    }

    /// Rank correlation between `K` and the renormalized current over all cells.
    pub fn schmidt_current_correlation(&self) -> f64 {
        let k: Vec<f64> = self.cells.iter().map(|c| c.schmidt).collect();
        let j: Vec<f64> = self.cells.iter().map(|c| c.renormalized_current).collect();
        spearman(&k, &j)
    }

    /// Mean `K` against `V/U` for cells with `V < U`, in bins of `width`.
    /// Empty bins are skipped; each entry is `(bin centre, mean K)`.
    pub fn ratio_profile(&self, width: f64) -> Vec<(f64, f64)> {
        let bins = (1.0 / width).ceil() as usize;
        let mut sum = vec![0.0; bins];
        let mut count = vec![0usize; bins];
        for c in &self.cells {
            let r = c.inter / c.intra;
            if r < 1.0 {
                let b = ((r / width) as usize).min(bins - 1);
                sum[b] += c.schmidt;
                count[b] += 1;
            }
        }
        (0..bins)
            .filter(|&b| count[b] > 0)
            .map(|b| ((b as f64 + 0.5) * width, sum[b] / count[b] as f64))
            .collect()
    }

    /// Interior local maxima of [`ratio_profile`](Self::ratio_profile),
    /// strongest first.
    pub fn ridges(&self, width: f64) -> Vec<(f64, f64)> {
        let mut peaks = local_maxima(&self.ratio_profile(width));
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
        peaks
    }
}

fn local_maxima(profile: &[(f64, f64)]) -> Vec<(f64, f64)> {
    profile
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1)
        .map(|w| w[1])
        .collect()
}

/// Evaluates every cell in parallel; the template supplies `L`, `N`, `C`
/// and the phases.
pub fn uv_sweep(template: &ModelParams, u_axis: &[f64], v_axis: &[f64]) -> Result<SweepResult> {
    if u_axis.is_empty() || v_axis.is_empty() {
        return Err(Error::Domain("sweep axes must not be empty".into()));
    }
    let d = template.species_dim();
    let nv = v_axis.len();
    let cells = (0..u_axis.len() * nv)
        .into_par_iter()
        .map(|idx| {
            let (u, v) = (u_axis[idx / nv], v_axis[idx % nv]);
            let params = template.with_interactions(u, v)?;
            let state = highest_entanglement_eigenstate(&build_hamiltonian(&params), d)?;
            let current = current_expectation(&state.vector, &params)?;
            Ok(SweepCell {
                intra: u,
                inter: v,
                level: state.level,
                energy: state.energy,
                schmidt_raw: state.schmidt.raw,
                schmidt: state.schmidt.normalized,
                current: current.current,
                renormalized_current: current.renormalized,
                cluster_size: state.cluster_size,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        template: *template,
        u_axis: u_axis.to_vec(),
        v_axis: v_axis.to_vec(),
        cells,
    })
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &o in &order[i..=j] {
            r[o] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of tie-averaged ranks).
/// Returns NaN when either input is constant or lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() || x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}
