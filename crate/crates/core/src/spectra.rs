//! Dense eigendecomposition, phase scans with band tracking, avoided-crossing
//! analysis and selection of the most entangled eigenstate.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{schmidt_number, SchmidtNumber};
use crate::model::{momentum_sector_basis, HamiltonianParts, HermitianOperator, ModelParams, DENSE_LIMIT};

/// nalgebra treats 0 as "no iteration limit".
const MAX_SWEEPS: usize = 0;
const SOLVER_EPS: f64 = 1e-15;

/// Eigenvalues clustered below this relative spacing are treated as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-8;
/// Band tracking subdivides a grid step when the worst matched overlap is lower.
pub const MIN_TRACKING_OVERLAP: f64 = 0.9;
const MAX_TRACKING_DEPTH: usize = 8;

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, level: usize) -> DVector<Complex64> {
        self.vectors.column(level).into_owned()
    }

    /// `max_k ||H v_k - lambda_k v_k||`.
    pub fn max_residual(&self, op: &HermitianOperator) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (k, &lambda) in self.values.iter().enumerate() {
            let v = self.vector(k);
            let r = op.apply(&v)? - &v * Complex64::from(lambda);
            worst = worst.max(r.norm());
        }
        Ok(worst)
    }

    /// `max |V^† V - 1|` entrywise.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let gram = self.vectors.adjoint() * &self.vectors;
        (gram - DMatrix::<Complex64>::identity(n, n)).camax()
    }

    /// Index ranges of eigenvalues whose consecutive spacing is below
    /// `rel_tol * max(|lambda|)`.
    pub fn clusters(&self, rel_tol: f64) -> Vec<Range<usize>> {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = if scale > 0.0 { rel_tol * scale } else { rel_tol };
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.values.len() {
            if k == self.values.len() || self.values[k] - self.values[k - 1] > tol {
                out.push(start..k);
                start = k;
            }
        }
        out
    }

    /// Replaces the eigenvectors of every degenerate cluster by a basis that
    /// depends only on the cluster's subspace: canonical axes are projected
    /// onto the subspace in index order and orthonormalized.
    pub fn canonicalize_degenerate(&mut self, rel_tol: f64) {
        for cluster in self.clusters(rel_tol) {
            if cluster.len() < 2 {
                continue;
            }
            let sub = self.vectors.columns(cluster.start, cluster.len()).into_owned();
            let basis = canonical_subspace_basis(&sub);
            for (i, col) in basis.into_iter().enumerate() {
                self.vectors.set_column(cluster.start + i, &col);
            }
        }
    }
}

fn canonical_subspace_basis(sub: &DMatrix<Complex64>) -> Vec<DVector<Complex64>> {
    let (n, k) = sub.shape();
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(k);
    for axis in 0..n {
        if out.len() == k {
            break;
        }
        // P e_axis = V (V^† e_axis) = V conj(row axis of V)
        let coeffs: DVector<Complex64> = sub.row(axis).adjoint();
        let mut w = sub * coeffs;
        for _ in 0..2 {
            for u in &out {
                let proj = u.dotc(&w);
                w -= u * proj;
            }
        }
        let norm = w.norm();
        if norm > 1e-6 {
            out.push(w / Complex64::from(norm));
        }
    }
    // the subspace is spanned by the axes, so this only triggers on a
    // numerically broken cluster; keep the solver's vectors in that case
    if out.len() < k {
        return (0..k).map(|i| sub.column(i).into_owned()).collect();
    }
    out
}

/// Full dense eigendecomposition of a Hermitian operator.
pub fn eigendecompose(op: &HermitianOperator) -> Result<Eigensystem> {
    let dim = op.dim();
    if dim > DENSE_LIMIT {
        return Err(Error::TooLarge {
            dim,
            limit: DENSE_LIMIT,
        });
    }
    eigendecompose_matrix(op.to_dense(), &op.label().to_string())
}

pub(crate) fn eigendecompose_matrix(matrix: DMatrix<Complex64>, label: &str) -> Result<Eigensystem> {
    let dim = matrix.nrows();
    let eig = SymmetricEigen::try_new(matrix, SOLVER_EPS, MAX_SWEEPS).ok_or_else(|| Error::NonConvergence {
        label: label.to_string(),
        dim,
    })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok(Eigensystem { values, vectors })
}

/// Energies over a phase grid, optionally connected into bands.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumScan {
    pub phi_grid: Vec<f64>,
    /// `energies[k]` is the ascending spectrum at `phi_grid[k]`.
    pub energies: Vec<Vec<f64>>,
    /// `tracked_bands[b][k]` is the level index of band `b` at grid point `k`;
    /// band `b` starts at level `b`.
    pub tracked_bands: Option<Vec<Vec<usize>>>,
    /// Energy unit used for thresholds (the tunneling `C` for model scans).
    pub energy_unit: f64,
}

impl SpectrumScan {
    pub fn levels(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    /// Level index of `band` at grid point `k`. Without tracking, bands are
    /// the sorted levels.
    pub fn level_of(&self, band: usize, k: usize) -> usize {
        match &self.tracked_bands {
            Some(t) => t[band][k],
            None => band,
        }
    }

    pub fn band_energy(&self, band: usize, k: usize) -> f64 {
        self.energies[k][self.level_of(band, k)]
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("phase grid is empty".into()));
    }
    if grid.iter().any(|p| !p.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("phase grid must be finite and strictly ascending".into()));
    }
    Ok(())
}

/// Scans any one-parameter Hermitian family. Grid points are decomposed in
/// parallel and assembled by index.
pub fn scan_family<F>(family: F, grid: &[f64], track: bool, energy_unit: f64) -> Result<SpectrumScan>
where
    F: Fn(f64) -> Result<HermitianOperator> + Sync,
{
    check_grid(grid)?;
    let systems: Vec<Eigensystem> = grid
        .par_iter()
        .map(|&phi| family(phi).and_then(|h| eigendecompose(&h)))
        .collect::<Result<_>>()?;
    let energies = systems.iter().map(|s| s.values.clone()).collect();
    let tracked_bands = if track {
        Some(track_bands(&family, grid, &systems)?)
    } else {
        None
    };
    Ok(SpectrumScan {
        phi_grid: grid.to_vec(),
        energies,
        tracked_bands,
        energy_unit,
    })
}

/// Spectrum of `H(phi_A = phi_B = phi)` over the grid, other parameters
/// taken from `template`.
pub fn scan_spectrum(template: &ModelParams, grid: &[f64], track: bool) -> Result<SpectrumScan> {
    scan_parts(&HamiltonianParts::new(template)?, grid, track)
}

/// [`scan_spectrum`] restricted to the momentum sector `T psi = e^{2 pi i k / L} psi`.
///
/// Levels from different sectors cross exactly, so avoided crossings of a
/// band are only meaningful among levels of its own sector.
pub fn scan_sector(template: &ModelParams, k: usize, grid: &[f64], track: bool) -> Result<SpectrumScan> {
    scan_parts(&sector_parts(template, k)?, grid, track)
}

fn sector_parts(template: &ModelParams, k: usize) -> Result<HamiltonianParts> {
    if k >= template.sites() {
        return Err(Error::Domain(format!("momentum sector {k} out of range for L = {}", template.sites())));
    }
    let parts = HamiltonianParts::new(template)?;
    Ok(parts.projected(&momentum_sector_basis(parts.basis(), k)))
}

fn scan_parts(parts: &HamiltonianParts, grid: &[f64], track: bool) -> Result<SpectrumScan> {
    let c = parts.params().tunneling();
    let unit = if c > 0.0 { c } else { 1.0 };
    scan_family(|phi| Ok(parts.at(phi, phi)), grid, track, unit)
}

/// Lowest eigenstate of `H(phi, phi)` inside momentum sector `k`, embedded
/// back into the joint space.
pub fn sector_ground_state(template: &ModelParams, k: usize, phi: f64) -> Result<(f64, DVector<Complex64>)> {
    if k >= template.sites() {
        return Err(Error::Domain(format!("momentum sector {k} out of range for L = {}", template.sites())));
    }
    let parts = HamiltonianParts::new(template)?;
    let q = momentum_sector_basis(parts.basis(), k);
    let sys = eigendecompose_matrix(parts.projected(&q).matrix_at(phi, phi), "sector")?;
    Ok((sys.values[0], &q * sys.vector(0)))
}

/// Greedy assignment maximizing `|<v_i|w_j>|`; returns the map
/// `level at left -> level at right` and the worst matched overlap.
fn greedy_match(left: &DMatrix<Complex64>, right: &DMatrix<Complex64>) -> (Vec<usize>, f64) {
    let n = left.ncols();
    let overlaps = left.adjoint() * right;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            pairs.push((overlaps[(i, j)].norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut map = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut assigned = 0;
    let mut worst = f64::INFINITY;
    for (o, i, j) in pairs {
        if map[i] == usize::MAX && !taken[j] {
            map[i] = j;
            taken[j] = true;
            worst = worst.min(o);
            assigned += 1;
            if assigned == n {
                break;
            }
        }
    }
    (map, worst)
}

fn step_map<F>(family: &F, left: (f64, &Eigensystem), right: (f64, &Eigensystem), depth: usize) -> Result<Vec<usize>>
where
    F: Fn(f64) -> Result<HermitianOperator> + Sync,
{
    let (map, worst) = greedy_match(&left.1.vectors, &right.1.vectors);
    if worst >= MIN_TRACKING_OVERLAP || depth >= MAX_TRACKING_DEPTH {
        return Ok(map);
    }
    let mid_phi = 0.5 * (left.0 + right.0);
    let mid = eigendecompose(&family(mid_phi)?)?;
    let first = step_map(family, left, (mid_phi, &mid), depth + 1)?;
    let second = step_map(family, (mid_phi, &mid), right, depth + 1)?;
    Ok(first.into_iter().map(|i| second[i]).collect())
}

fn track_bands<F>(family: &F, grid: &[f64], systems: &[Eigensystem]) -> Result<Vec<Vec<usize>>>
where
    F: Fn(f64) -> Result<HermitianOperator> + Sync,
{
    let n = systems[0].dim();
    let maps: Vec<Vec<usize>> = (0..grid.len().saturating_sub(1))
        .into_par_iter()
        .map(|k| step_map(family, (grid[k], &systems[k]), (grid[k + 1], &systems[k + 1]), 0))
        .collect::<Result<_>>()?;
    let mut bands: Vec<Vec<usize>> = (0..n).map(|b| vec![b]).collect();
    for map in &maps {
        for band in bands.iter_mut() {
            let last = *band.last().unwrap();
            band.push(map[last]);
        }
    }
    Ok(bands)
}

/// Minimal splitting between two bands and the diabatic sweep slope there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingReport {
    pub phi_c: f64,
    pub gap: f64,
    pub diabatic_slope: f64,
    pub band_pair: (usize, usize),
    /// Sorted level indices of the two bands at the grid point nearest `phi_c`.
    pub levels: (usize, usize),
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
fn golden_section<G: FnMut(f64) -> Result<f64>>(mut f: G, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Locates the avoided crossing between two bands of a scan.
///
/// `levels_at(phi)` must return the ascending spectrum of the same family at
/// arbitrary `phi`. The crossing position is refined by golden-section search
/// on the splitting of the two levels adjacent at the coarse minimum. The
/// diabatic slope comes from the hyperbolic form `S^2 = gap^2 + k^2 (phi -
/// phi_c)^2`, evaluated five crossing widths (`gap / k`) away on both sides
/// and averaged.
pub fn locate_crossing<F>(scan: &SpectrumScan, band_pair: (usize, usize), levels_at: F) -> Result<CrossingReport>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let (b1, b2) = band_pair;
    let n = scan.phi_grid.len();
    let splitting: Vec<f64> = (0..n)
        .map(|k| (scan.band_energy(b2, k) - scan.band_energy(b1, k)).abs())
        .collect();
    let (k_min, &min_split) = splitting
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Domain("empty scan".into()))?;
    let threshold = 0.5 * scan.energy_unit;
    if min_split > threshold {
        return Err(Error::NoCrossing {
            min_splitting: min_split,
            threshold,
        });
    }
    let (l1, l2) = {
        let (a, b) = (scan.level_of(b1, k_min), scan.level_of(b2, k_min));
        (a.min(b), a.max(b))
    };
    let split_at = |phi: f64| -> Result<f64> {
        let e = levels_at(phi)?;
        Ok((e[l2] - e[l1]).abs())
    };
    let lo = scan.phi_grid[k_min.saturating_sub(1)];
    let hi = scan.phi_grid[(k_min + 1).min(n - 1)];
    let phi_c = if hi > lo {
        golden_section(|p| split_at(p).map(|s| s * s), lo, hi, 1e-10)?
    } else {
        lo
    };
    let gap = split_at(phi_c)?;

    let (first, last) = (scan.phi_grid[0], scan.phi_grid[n - 1]);
    let span = last - first;
    let hyperbolic_slope = |w: f64| -> Result<Option<f64>> {
        let mut acc = 0.0;
        let mut count = 0;
        for side in [-1.0, 1.0] {
            let phi = phi_c + side * w;
            if phi < first || phi > last {
                continue;
            }
            let s = split_at(phi)?;
            acc += (s * s - gap * gap).max(0.0).sqrt() / w;
            count += 1;
        }
        Ok((count > 0).then(|| acc / count as f64))
    };
    // rough slope from a wide window, then re-evaluate at five crossing widths
    let wide = (0.25 * span).max(1e-6);
    let rough = hyperbolic_slope(wide)?.unwrap_or(0.0);
    let diabatic_slope = if rough > 0.0 {
        let width = (5.0 * gap / rough).clamp(1e-4, 0.25 * span.max(4e-4));
        hyperbolic_slope(width)?.unwrap_or(rough)
    } else {
        0.0
    };
    Ok(CrossingReport {
        phi_c,
        gap,
        diabatic_slope,
        band_pair,
        levels: (l1, l2),
    })
}

/// [`locate_crossing`] for a scan produced by [`scan_spectrum`].
pub fn locate_model_crossing(template: &ModelParams, scan: &SpectrumScan, band_pair: (usize, usize)) -> Result<CrossingReport> {
    locate_parts_crossing(&HamiltonianParts::new(template)?, scan, band_pair)
}

/// [`locate_crossing`] for a scan produced by [`scan_sector`].
pub fn locate_sector_crossing(
    template: &ModelParams,
    k: usize,
    scan: &SpectrumScan,
    band_pair: (usize, usize),
) -> Result<CrossingReport> {
    locate_parts_crossing(&sector_parts(template, k)?, scan, band_pair)
}

fn locate_parts_crossing(parts: &HamiltonianParts, scan: &SpectrumScan, band_pair: (usize, usize)) -> Result<CrossingReport> {
    locate_crossing(scan, band_pair, |phi| {
        let m = parts.matrix_at(phi, phi);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    })
}

/// The eigenstate with the largest normalized Schmidt number.
#[derive(Clone, Debug)]
pub struct EntangledEigenstate {
    pub level: usize,
    pub energy: f64,
    pub vector: DVector<Complex64>,
    pub schmidt: SchmidtNumber,
    /// Size of the degeneracy cluster the state belongs to (1 if isolated).
    pub cluster_size: usize,
}

/// Degenerate clusters are canonicalized first (see
/// [`Eigensystem::canonicalize_degenerate`]); ties go to the lowest level.
pub fn highest_entanglement_eigenstate(op: &HermitianOperator, species_dim: usize) -> Result<EntangledEigenstate> {
    let mut sys = eigendecompose(op)?;
    sys.canonicalize_degenerate(DEGENERACY_REL_TOL);
    let clusters = sys.clusters(DEGENERACY_REL_TOL);
    let mut best: Option<(usize, SchmidtNumber)> = None;
    for level in 0..sys.dim() {
        let k = schmidt_number(&sys.vector(level), species_dim)?;
        match best {
            Some((_, b)) if k.normalized <= b.normalized + 1e-12 => {}
            _ => best = Some((level, k)),
        }
    }
    let (level, schmidt) = best.ok_or_else(|| Error::Domain("empty operator".into()))?;
    let cluster_size = clusters
        .iter()
        .find(|c| c.contains(&level))
        .map_or(1, |c| c.len());
    Ok(EntangledEigenstate {
        level,
        energy: sys.values[level],
        vector: sys.vector(level),
        schmidt,
        cluster_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OperatorLabel;

    #[test]
    fn diagonal_input_sorted() {
        let diag = [3.0, -1.0, 2.0, 0.5];
        let m = DMatrix::from_fn(4, 4, |r, c| if r == c { Complex64::from(diag[r]) } else { Complex64::from(0.0) });
        let sys = eigendecompose(&HermitianOperator::from_dense(m, OperatorLabel::Generic)).unwrap();
        assert_eq!(sys.values, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn clusters_and_canonical_basis() {
        // two-fold degenerate block rotated away from the axes
        let c = Complex64::from;
        let (s, co) = (0.3f64.sin(), 0.3f64.cos());
        let u = DMatrix::from_row_slice(3, 3, &[c(co), c(-s), c(0.0), c(s), c(co), c(0.0), c(0.0), c(0.0), c(1.0)]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(1.0), c(2.0)]));
        let h = &u * d * u.adjoint();
        let mut sys = eigendecompose(&HermitianOperator::from_dense(h, OperatorLabel::Generic)).unwrap();
        assert_eq!(sys.clusters(1e-8), vec![0..2, 2..3]);
        sys.canonicalize_degenerate(1e-8);
        // the canonical basis of span{e0, e1} is e0, e1 themselves
        assert!((sys.vector(0)[0].norm() - 1.0).abs() < 1e-12);
        assert!((sys.vector(1)[1].norm() - 1.0).abs() < 1e-12);
        assert!(sys.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn golden_section_finds_quadratic_minimum() {
        let x = golden_section(|x| Ok((x - 0.3) * (x - 0.3)), 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn constant_zero_family() {
        let grid: Vec<f64> = (0..5).map(|i| i as f64 * 0.1).collect();
        let scan = scan_family(|_| Ok(HermitianOperator::zeros(4, OperatorLabel::Generic)), &grid, true, 1.0).unwrap();
        assert!(scan.energies.iter().flatten().all(|&e| e == 0.0));
        assert_eq!(scan.tracked_bands.as_ref().unwrap().len(), 4);
    }

    #[test]
    fn grid_validation() {
        let f = |_| Ok(HermitianOperator::zeros(2, OperatorLabel::Generic));
        assert!(scan_family(f, &[], false, 1.0).is_err());
        assert!(scan_family(f, &[0.2, 0.1], false, 1.0).is_err());
    }

    #[test]
    fn sector_spectra_make_up_the_full_spectrum() {
        let p = ModelParams::new(3, 2, 1.0, 0.5, 0.5).unwrap();
        let grid = [0.2, 0.9];
        let full = scan_spectrum(&p, &grid, false).unwrap();
        let mut joined: Vec<f64> = (0..3)
            .flat_map(|k| scan_sector(&p, k, &grid, false).unwrap().energies[1].clone())
            .collect();
        joined.sort_by(|a, b| a.total_cmp(b));
        assert_eq!(joined.len(), full.energies[1].len());
        for (a, b) in joined.iter().zip(&full.energies[1]) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(scan_sector(&p, 3, &grid, false).is_err());
        let (e0, v) = sector_ground_state(&p, 0, 0.9).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let h = HamiltonianParts::new(&p).unwrap().matrix_at(0.9, 0.9);
        assert!((&h * &v - &v * Complex64::from(e0)).norm() < 1e-10);
    }
}
