//! Joint-space Hamiltonian and current operators for two species on a ring.
//!
//! Joint basis states are pairs `(q_A, q_B)` of single-species Fock states,
//! stored at index `q_A * d + q_B` (see [`joint_index`]). Units: `hbar = 1`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{dimension, Basis, FockState};

/// Operators up to this dimension are stored densely.
pub const DENSE_LIMIT: usize = 4096;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Position of the pair `(index_a, index_b)` in the joint basis of
/// dimension `d * d`. Lifting and partial traces both go through here.
#[inline]
pub fn joint_index(index_a: usize, index_b: usize, d: usize) -> usize {
    index_a * d + index_b
}

/// Inverse of [`joint_index`].
#[inline]
pub fn split_index(joint: usize, d: usize) -> (usize, usize) {
    (joint / d, joint % d)
}

/// Reduces an angle to `[0, 2pi)`.
pub fn reduce_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Physical parameters `(L, N, C, U, V, phi_A, phi_B)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    sites: usize,
    particles: usize,
    tunneling: f64,
    intra: f64,
    inter: f64,
    phase_a: f64,
    phase_b: f64,
}

#[derive(Deserialize)]
struct RawParams {
    sites: usize,
    particles: usize,
    tunneling: f64,
    intra: f64,
    inter: f64,
    #[serde(default)]
    phase_a: f64,
    #[serde(default)]
    phase_b: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.sites, raw.particles, raw.tunneling, raw.intra, raw.inter)
            .map(|p| p.with_phases(raw.phase_a, raw.phase_b))
    }
}

impl ModelParams {
    /// Both phases start at zero. `tunneling` may be zero (the static limit)
    /// but not negative.
    pub fn new(sites: usize, particles: usize, tunneling: f64, intra: f64, inter: f64) -> Result<Self> {
        dimension(sites, particles)?;
        for (name, value) in [("tunneling C", tunneling), ("intra U", intra), ("inter V", inter)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {value}")));
            }
        }
        Ok(ModelParams {
            sites,
            particles,
            tunneling,
            intra,
            inter,
            phase_a: 0.0,
            phase_b: 0.0,
        })
    }

    pub fn with_phase(self, phase: f64) -> Self {
        self.with_phases(phase, phase)
    }

    pub fn with_phases(mut self, phase_a: f64, phase_b: f64) -> Self {
        self.phase_a = reduce_phase(phase_a);
        self.phase_b = reduce_phase(phase_b);
        self
    }

    pub fn with_tunneling(mut self, tunneling: f64) -> Result<Self> {
        self.tunneling = tunneling;
        ModelParams::new(self.sites, self.particles, tunneling, self.intra, self.inter)?;
        Ok(self)
    }

    pub fn with_interactions(mut self, intra: f64, inter: f64) -> Result<Self> {
        ModelParams::new(self.sites, self.particles, self.tunneling, intra, inter)?;
        self.intra = intra;
        self.inter = inter;
        Ok(self)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }
    pub fn particles(&self) -> usize {
        self.particles
    }
    pub fn tunneling(&self) -> f64 {
        self.tunneling
    }
    pub fn intra(&self) -> f64 {
        self.intra
    }
    pub fn inter(&self) -> f64 {
        self.inter
    }
    pub fn phase_a(&self) -> f64 {
        self.phase_a
    }
    pub fn phase_b(&self) -> f64 {
        self.phase_b
    }

    pub fn basis(&self) -> Basis {
        Basis::new(self.sites, self.particles).expect("validated at construction")
    }

    /// Single-species dimension `d`.
    pub fn species_dim(&self) -> usize {
        dimension(self.sites, self.particles).expect("validated at construction")
    }

    pub fn joint_dim(&self) -> usize {
        let d = self.species_dim();
        d * d
    }
}

/// Compressed sparse row storage used above [`DENSE_LIMIT`].
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl CsrMatrix {
    /// Duplicated coordinates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn mul_vec(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_fn(self.dim, |r, _| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(|k| self.vals[k] * x[self.cols[k]])
                .sum()
        })
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    Dense(DMatrix<Complex64>),
    Sparse(CsrMatrix),
}

/// Where an operator came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorLabel {
    /// Single-species kinetic term.
    Kinetic,
    /// Joint kinetic term `K_A + K_B`.
    KineticJoint,
    Interaction,
    /// Single-species current.
    Current,
    /// Joint current `J_A + J_B`.
    CurrentJoint,
    Total,
    /// Anything else (sums of unrelated parts, test matrices).
    Generic,
}

impl std::fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OperatorLabel::Kinetic => "kinetic",
            OperatorLabel::KineticJoint => "kinetic-joint",
            OperatorLabel::Interaction => "interaction",
            OperatorLabel::Current => "current",
            OperatorLabel::CurrentJoint => "current-joint",
            OperatorLabel::Total => "total",
            OperatorLabel::Generic => "generic",
        };
        f.write_str(s)
    }
}

/// Hermitian matrix with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    storage: Storage,
    label: OperatorLabel,
}

impl HermitianOperator {
    /// Wraps a dense matrix. Hermiticity is not enforced here; see
    /// [`HermitianOperator::hermiticity_defect`].
    pub fn from_dense(matrix: DMatrix<Complex64>, label: OperatorLabel) -> Self {
        assert!(matrix.is_square(), "operator must be square");
        HermitianOperator {
            storage: Storage::Dense(matrix),
            label,
        }
    }

    /// Picks dense or sparse storage from the dimension.
    pub fn from_triplets(dim: usize, triplets: Vec<(usize, usize, Complex64)>, label: OperatorLabel) -> Self {
        let storage = if dim <= DENSE_LIMIT {
            let mut m = DMatrix::zeros(dim, dim);
            for (r, c, v) in triplets {
                m[(r, c)] += v;
            }
            Storage::Dense(m)
        } else {
            Storage::Sparse(CsrMatrix::from_triplets(dim, triplets))
        };
        HermitianOperator { storage, label }
    }

    pub fn zeros(dim: usize, label: OperatorLabel) -> Self {
        Self::from_triplets(dim, Vec::new(), label)
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Sparse(s) => s.dim(),
        }
    }

    pub fn label(&self) -> OperatorLabel {
        self.label
    }

    pub fn with_label(mut self, label: OperatorLabel) -> Self {
        self.label = label;
        self
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(m) => m[(row, col)],
            Storage::Sparse(s) => s.get(row, col),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => s.to_dense(),
        }
    }

    /// Borrowed dense view; `None` for sparse storage.
    pub fn as_dense(&self) -> Option<&DMatrix<Complex64>> {
        match &self.storage {
            Storage::Dense(m) => Some(m),
            Storage::Sparse(_) => None,
        }
    }

    pub fn apply(&self, x: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(match &self.storage {
            Storage::Dense(m) => m * x,
            Storage::Sparse(s) => s.mul_vec(x),
        })
    }

    /// `<x|M|x>`, real part only (the imaginary part vanishes for Hermitian `M`).
    pub fn expectation(&self, x: &DVector<Complex64>) -> Result<f64> {
        let mx = self.apply(x)?;
        Ok(x.dotc(&mx).re)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Storage::Sparse(s) => s.iter().map(|(_, _, z)| z.norm()).fold(0.0, f64::max),
        }
    }

    /// `max |M - M^†| / max |M|` entrywise (zero for the zero matrix).
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let defect = match &self.storage {
            Storage::Dense(m) => {
                let n = m.nrows();
                let mut worst: f64 = 0.0;
                for r in 0..n {
                    for c in r..n {
                        worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
                    }
                }
                worst
            }
            Storage::Sparse(s) => s
                .iter()
                .map(|(r, c, v)| (v - s.get(c, r).conj()).norm())
                .fold(0.0, f64::max),
        };
        defect / scale
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol
    }

    /// `self + other`, keeping dense storage if either side is dense.
    pub fn add(&self, other: &HermitianOperator, label: OperatorLabel) -> Result<HermitianOperator> {
        self.linear_combination(1.0, other, 1.0, label)
    }

    pub fn linear_combination(
        &self,
        a: f64,
        other: &HermitianOperator,
        b: f64,
        label: OperatorLabel,
    ) -> Result<HermitianOperator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(x), Storage::Sparse(y)) => {
                let triplets = x
                    .iter()
                    .map(|(r, c, v)| (r, c, v * a))
                    .chain(y.iter().map(|(r, c, v)| (r, c, v * b)))
                    .collect();
                Storage::Sparse(CsrMatrix::from_triplets(self.dim(), triplets))
            }
            _ => Storage::Dense(self.to_dense() * Complex64::from(a) + other.to_dense() * Complex64::from(b)),
        };
        Ok(HermitianOperator { storage, label })
    }
}

/// Coefficients for `sum_j (forward d_j^† d_{j+1} + backward d_{j+1}^† d_j)`.
fn ring_hopping(basis: &Basis, forward: Complex64, backward: Complex64, label: OperatorLabel) -> HermitianOperator {
    let sites = basis.sites();
    let mut triplets = Vec::new();
    for (col, state) in basis.iter() {
        for j in 0..sites {
            let next = (j + 1) % sites;
            if let Some((target, amp)) = state.hop(next, j) {
                let row = basis.index_of(&target).expect("hop preserves particle number");
                triplets.push((row, col, forward * amp));
            }
            if let Some((target, amp)) = state.hop(j, next) {
                let row = basis.index_of(&target).expect("hop preserves particle number");
                triplets.push((row, col, backward * amp));
            }
        }
    }
    HermitianOperator::from_triplets(basis.dim(), triplets, label)
}

/// Single-species kinetic term
/// `-C sum_j (e^{i phi} d_j^† d_{j+1} + e^{-i phi} d_{j+1}^† d_j)` with `d_{L+1} = d_1`.
pub fn build_kinetic_single(basis: &Basis, tunneling: f64, phase: f64) -> HermitianOperator {
    let fwd = Complex64::from_polar(tunneling, phase) * -1.0;
    ring_hopping(basis, fwd, fwd.conj(), OperatorLabel::Kinetic)
}

/// Single-species current
/// `-(i C / L) sum_j (e^{i phi} d_j^† d_{j+1} - e^{-i phi} d_{j+1}^† d_j)`.
///
/// Equals `(1/L) dK/dphi`.
pub fn build_current(basis: &Basis, tunneling: f64, phase: f64) -> HermitianOperator {
    let scale = tunneling / basis.sites() as f64;
    let fwd = Complex64::new(0.0, -1.0) * Complex64::from_polar(scale, phase);
    ring_hopping(basis, fwd, fwd.conj(), OperatorLabel::Current)
}

/// `op_a ⊗ 1 + 1 ⊗ op_b` on the joint space.
pub fn lift_to_joint(op_a: &HermitianOperator, op_b: &HermitianOperator) -> Result<HermitianOperator> {
    let d = op_a.dim();
    if op_b.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op_b.dim(),
        });
    }
    let label = match (op_a.label(), op_b.label()) {
        (OperatorLabel::Kinetic, OperatorLabel::Kinetic) => OperatorLabel::KineticJoint,
        (OperatorLabel::Current, OperatorLabel::Current) => OperatorLabel::CurrentJoint,
        _ => OperatorLabel::Generic,
    };
    let entries = |op: &HermitianOperator| -> Vec<(usize, usize, Complex64)> {
        match op.storage() {
            Storage::Dense(m) => {
                let mut out = Vec::new();
                for c in 0..d {
                    for r in 0..d {
                        let v = m[(r, c)];
                        if v != ZERO {
                            out.push((r, c, v));
                        }
                    }
                }
                out
            }
            Storage::Sparse(s) => s.iter().collect(),
        }
    };
    let mut triplets = Vec::new();
    for (r, c, v) in entries(op_a) {
        for q in 0..d {
            triplets.push((joint_index(r, q, d), joint_index(c, q, d), v));
        }
    }
    for (r, c, v) in entries(op_b) {
        for p in 0..d {
            triplets.push((joint_index(p, r, d), joint_index(p, c, d), v));
        }
    }
    Ok(HermitianOperator::from_triplets(d * d, triplets, label))
}

/// Diagonal of the on-site interaction
/// `(U/2) sum_j (n_Aj^2 + n_Bj^2) - V sum_j n_Aj n_Bj` in the joint Fock basis.
pub fn interaction_diagonal(basis: &Basis, intra: f64, inter: f64) -> Vec<f64> {
    let d = basis.dim();
    let mut diag = vec![0.0; d * d];
    for (a, sa) in basis.iter() {
        for (b, sb) in basis.iter() {
            let mut same = 0.0;
            let mut cross = 0.0;
            for (&na, &nb) in sa.occupations().iter().zip(sb.occupations()) {
                let (na, nb) = (na as f64, nb as f64);
                same += na * na + nb * nb;
                cross += na * nb;
            }
            diag[joint_index(a, b, d)] = 0.5 * intra * same - inter * cross;
        }
    }
    diag
}

pub fn build_interaction(basis: &Basis, intra: f64, inter: f64) -> HermitianOperator {
    let triplets = interaction_diagonal(basis, intra, inter)
        .into_iter()
        .enumerate()
        .filter(|&(_, v)| v != 0.0)
        .map(|(i, v)| (i, i, Complex64::from(v)))
        .collect();
    let d = basis.dim();
    HermitianOperator::from_triplets(d * d, triplets, OperatorLabel::Interaction)
}

/// `K_A(phi_A) + K_B(phi_B)` on the joint space.
pub fn build_kinetic_joint(params: &ModelParams) -> HermitianOperator {
    let basis = params.basis();
    let ka = build_kinetic_single(&basis, params.tunneling(), params.phase_a());
    let kb = build_kinetic_single(&basis, params.tunneling(), params.phase_b());
    lift_to_joint(&ka, &kb).expect("same basis")
}

/// Full Hamiltonian `K_A + K_B + H_int`.
pub fn build_hamiltonian(params: &ModelParams) -> HermitianOperator {
    let basis = params.basis();
    let kinetic = build_kinetic_joint(params);
    let interaction = build_interaction(&basis, params.intra(), params.inter());
    kinetic
        .add(&interaction, OperatorLabel::Total)
        .expect("same joint dimension")
}

/// Joint current `J_A ⊗ 1 + 1 ⊗ J_B` with each species' own phase.
pub fn build_current_joint(params: &ModelParams) -> HermitianOperator {
    let basis = params.basis();
    let ja = build_current(&basis, params.tunneling(), params.phase_a());
    let jb = build_current(&basis, params.tunneling(), params.phase_b());
    lift_to_joint(&ja, &jb).expect("same basis")
}

/// Phase-independent pieces of the Hamiltonian, so that
/// `H(phi_A, phi_B) = H_int + sum_D (cos phi_D K_D^c + sin phi_D K_D^s)`
/// can be re-evaluated cheaply along a phase ramp.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    params: ModelParams,
    basis: Basis,
    interaction: DMatrix<Complex64>,
    cos_a: DMatrix<Complex64>,
    sin_a: DMatrix<Complex64>,
    cos_b: DMatrix<Complex64>,
    sin_b: DMatrix<Complex64>,
}

impl HamiltonianParts {
    /// Dense only; fails above [`DENSE_LIMIT`].
    pub fn new(params: &ModelParams) -> Result<Self> {
        let joint = params.joint_dim();
        if joint > DENSE_LIMIT {
            return Err(Error::TooLarge {
                dim: joint,
                limit: DENSE_LIMIT,
            });
        }
        let basis = params.basis();
        let c = params.tunneling();
        let cos_single = ring_hopping(&basis, Complex64::from(-c), Complex64::from(-c), OperatorLabel::Kinetic);
        let sin_single = ring_hopping(
            &basis,
            Complex64::new(0.0, -c),
            Complex64::new(0.0, c),
            OperatorLabel::Kinetic,
        );
        let zero = HermitianOperator::zeros(basis.dim(), OperatorLabel::Kinetic);
        let lift_a = |op: &HermitianOperator| lift_to_joint(op, &zero).expect("same basis").to_dense();
        let lift_b = |op: &HermitianOperator| lift_to_joint(&zero, op).expect("same basis").to_dense();
        Ok(HamiltonianParts {
            params: *params,
            interaction: build_interaction(&basis, params.intra(), params.inter()).to_dense(),
            cos_a: lift_a(&cos_single),
            sin_a: lift_a(&sin_single),
            cos_b: lift_b(&cos_single),
            sin_b: lift_b(&sin_single),
            basis,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Matrix dimension (the joint dimension unless projected).
    pub fn dim(&self) -> usize {
        self.interaction.nrows()
    }

    pub fn matrix_at(&self, phase_a: f64, phase_b: f64) -> DMatrix<Complex64> {
        let (sa, ca) = phase_a.sin_cos();
        let (sb, cb) = phase_b.sin_cos();
        let mut h = self.interaction.clone();
        h += &self.cos_a * Complex64::from(ca);
        h += &self.sin_a * Complex64::from(sa);
        h += &self.cos_b * Complex64::from(cb);
        h += &self.sin_b * Complex64::from(sb);
        h
    }

    /// Parts compressed to the subspace spanned by the orthonormal columns of
    /// `embedding` (`Q^† X Q` for every piece). Only meaningful for invariant
    /// subspaces such as momentum sectors.
    pub fn projected(&self, embedding: &DMatrix<Complex64>) -> HamiltonianParts {
        let squeeze = |m: &DMatrix<Complex64>| embedding.adjoint() * m * embedding;
        HamiltonianParts {
            params: self.params,
            basis: self.basis.clone(),
            interaction: squeeze(&self.interaction),
            cos_a: squeeze(&self.cos_a),
            sin_a: squeeze(&self.sin_a),
            cos_b: squeeze(&self.cos_b),
            sin_b: squeeze(&self.sin_b),
        }
    }

    pub fn at(&self, phase_a: f64, phase_b: f64) -> HermitianOperator {
        HermitianOperator::from_dense(self.matrix_at(phase_a, phase_b), OperatorLabel::Total)
    }

    /// Joint current `(1/L) dH/dphi_A ⊗ ... ` evaluated at the given phases.
    pub fn current_at(&self, phase_a: f64, phase_b: f64) -> DMatrix<Complex64> {
        let (sa, ca) = phase_a.sin_cos();
        let (sb, cb) = phase_b.sin_cos();
        let inv_l = 1.0 / self.params.sites() as f64;
        (&self.sin_a * Complex64::from(ca) - &self.cos_a * Complex64::from(sa)
            + &self.sin_b * Complex64::from(cb)
            - &self.cos_b * Complex64::from(sb))
            * Complex64::from(inv_l)
    }
}

/// Joint-index permutation of the cyclic translation `n_j -> n_{j+1}`
/// applied to both species at once. Translation commutes with the
/// Hamiltonian and the current for any phases and interactions.
pub fn translation_permutation(basis: &Basis) -> Vec<usize> {
    let d = basis.dim();
    let shift: Vec<usize> = basis
        .states()
        .iter()
        .map(|s| {
            let mut occ = s.occupations().to_vec();
            occ.rotate_right(1);
            basis
                .index_of(&FockState::new(occ))
                .expect("rotation preserves particle number")
        })
        .collect();
    let mut perm = vec![0; d * d];
    for a in 0..d {
        for b in 0..d {
            perm[joint_index(a, b, d)] = joint_index(shift[a], shift[b], d);
        }
    }
    perm
}

/// `T |psi>` for the joint translation.
pub fn translate(basis: &Basis, state: &DVector<Complex64>) -> DVector<Complex64> {
    let perm = translation_permutation(basis);
    let mut out = DVector::zeros(state.len());
    for (i, &j) in perm.iter().enumerate() {
        out[j] = state[i];
    }
    out
}

/// Orthonormal basis (as columns) of the momentum sector `T psi = e^{2 pi i k / L} psi`,
/// built from translation orbits of joint Fock states in index order.
pub fn momentum_sector_basis(basis: &Basis, k: usize) -> DMatrix<Complex64> {
    let perm = translation_permutation(basis);
    let n = perm.len();
    let l = basis.sites();
    let mut seen = vec![false; n];
    let mut columns: Vec<DVector<Complex64>> = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut v = DVector::zeros(n);
        let mut idx = start;
        for s in 0..l {
            seen[idx] = true;
            // T^s e_start picks up e^{-2 pi i k s / L}
            v[idx] += Complex64::from_polar(1.0, -2.0 * PI * (k * s) as f64 / l as f64);
            idx = perm[idx];
        }
        let norm = v.norm();
        if norm > 1e-9 {
            columns.push(v / Complex64::from(norm));
        }
    }
    if columns.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&columns)
}

/// Momentum label `k` of a joint state, from `<psi|T|psi> = e^{2 pi i k / L}`;
/// `None` unless the state is a translation eigenstate to within `1e-9`.
pub fn momentum_of(basis: &Basis, state: &DVector<Complex64>) -> Option<usize> {
    let norm_sqr = state.norm_squared();
    if norm_sqr == 0.0 {
        return None;
    }
    let overlap = state.dotc(&translate(basis, state)) / Complex64::from(norm_sqr);
    if (overlap.norm() - 1.0).abs() > 1e-9 {
        return None;
    }
    let l = basis.sites() as f64;
    let k = (overlap.arg() * l / (2.0 * PI)).round().rem_euclid(l);
    Some(k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kinetic_matrix_element() {
        let basis = Basis::new(3, 2).unwrap();
        let phi = 0.37;
        let k = build_kinetic_single(&basis, 1.5, phi);
        let from = basis.index_of(&FockState::new(vec![2, 0, 0])).unwrap();
        let to = basis.index_of(&FockState::new(vec![1, 1, 0])).unwrap();
        let expected = Complex64::from_polar(-1.5 * 2f64.sqrt(), -phi);
        assert!((k.get(to, from) - expected).norm() < 1e-14);
        assert!(k.is_hermitian(1e-12));
    }

    #[test]
    fn zero_phase_kinetic_is_real() {
        let basis = Basis::new(4, 3).unwrap();
        let k = build_kinetic_single(&basis, 1.0, 0.0);
        assert!(k.to_dense().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn interaction_entries() {
        let basis = Basis::new(3, 2).unwrap();
        let d = basis.dim();
        let h = build_interaction(&basis, 1.0, 1.0);
        let i200 = basis.index_of(&FockState::new(vec![2, 0, 0])).unwrap();
        let i020 = basis.index_of(&FockState::new(vec![0, 2, 0])).unwrap();
        assert_eq!(h.get(joint_index(i200, i200, d), joint_index(i200, i200, d)), c(0.0, 0.0));
        assert_eq!(h.get(joint_index(i200, i020, d), joint_index(i200, i020, d)), c(4.0, 0.0));
        assert_eq!(build_interaction(&basis, 0.0, 0.0).max_abs(), 0.0);
    }

    #[test]
    fn lift_of_zeros_and_trace() {
        let basis = Basis::new(3, 2).unwrap();
        let d = basis.dim();
        let z = HermitianOperator::zeros(d, OperatorLabel::Kinetic);
        let lifted = lift_to_joint(&z, &z).unwrap();
        assert_eq!(lifted.dim(), d * d);
        assert_eq!(lifted.max_abs(), 0.0);

        let x = HermitianOperator::from_dense(
            DMatrix::from_fn(d, d, |r, c| if r == c { c_(r as f64) } else { c_(0.0) }),
            OperatorLabel::Generic,
        );
        let y = build_kinetic_single(&basis, 1.0, 0.3);
        let l = lift_to_joint(&x, &y).unwrap();
        let expected = (x.trace() + y.trace()) * d as f64;
        assert!((l.trace() - expected).norm() < 1e-12);

        fn c_(v: f64) -> Complex64 {
            Complex64::from(v)
        }
    }

    #[test]
    fn lift_rejects_mismatched_dims() {
        let a = HermitianOperator::zeros(3, OperatorLabel::Kinetic);
        let b = HermitianOperator::zeros(6, OperatorLabel::Kinetic);
        assert!(matches!(lift_to_joint(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn vanishing_tunneling_and_balanced_interaction_on_paired_states() {
        let params = ModelParams::new(3, 2, 0.0, 1.0, 1.0).unwrap();
        let h = build_hamiltonian(&params);
        let basis = params.basis();
        let d = basis.dim();
        for q in 0..d {
            let i = joint_index(q, q, d);
            assert_eq!(h.get(i, i), c(0.0, 0.0));
        }
    }

    #[test]
    fn parts_reproduce_direct_assembly() {
        let params = ModelParams::new(3, 2, 1.3, 0.4, 0.9).unwrap();
        let parts = HamiltonianParts::new(&params).unwrap();
        for &(pa, pb) in &[(0.0, 0.0), (0.3, 1.9), (PI / 2.0, PI / 6.0), (5.5, 2.2)] {
            let direct = build_hamiltonian(&params.with_phases(pa, pb)).to_dense();
            let fast = parts.matrix_at(pa, pb);
            assert!((direct - fast).camax() < 1e-13);
            let jd = build_current_joint(&params.with_phases(pa, pb)).to_dense();
            assert!((jd - parts.current_at(pa, pb)).camax() < 1e-13);
        }
    }

    #[test]
    fn sparse_storage_above_dense_limit() {
        // L=5, N=4: d = 70, joint dim 4900
        let params = ModelParams::new(5, 4, 1.0, 1.0, 1.0).unwrap().with_phase(0.4);
        let h = build_hamiltonian(&params);
        assert_eq!(h.dim(), 4900);
        assert!(!h.is_dense());
        assert!(h.is_hermitian(1e-12));
        assert!(HamiltonianParts::new(&params).is_err());
    }

    #[test]
    fn params_validation_and_phase_reduction() {
        assert!(ModelParams::new(3, 2, -1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(3, 2, 1.0, f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(2, 2, 1.0, 1.0, 1.0).is_err());
        let p = ModelParams::new(3, 2, 1.0, 1.0, 1.0).unwrap().with_phases(-PI / 6.0, 7.0);
        assert!((p.phase_a() - 11.0 * PI / 6.0).abs() < 1e-14);
        assert!((p.phase_b() - (7.0 - TAU)).abs() < 1e-14);
    }

    #[test]
    fn params_deserialize_validates() {
        let ok: ModelParams = serde_json::from_str(
            r#"{"sites":3,"particles":2,"tunneling":1.0,"intra":0.5,"inter":0.5,"phase_a":-1.0}"#,
        )
        .unwrap();
        assert!((ok.phase_a() - (TAU - 1.0)).abs() < 1e-14);
        let bad = serde_json::from_str::<ModelParams>(
            r#"{"sites":2,"particles":2,"tunneling":1.0,"intra":0.5,"inter":0.5}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn translation_commutes_with_hamiltonian() {
        let params = ModelParams::new(3, 2, 1.0, 0.7, 0.2).unwrap().with_phases(0.4, 1.1);
        let basis = params.basis();
        let h = build_hamiltonian(&params);
        let psi = DVector::from_fn(36, |i, _| Complex64::new((i as f64).sin(), (0.3 * i as f64).cos()));
        let lhs = h.apply(&translate(&basis, &psi)).unwrap();
        let rhs = translate(&basis, &h.apply(&psi).unwrap());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn momentum_sectors_partition_the_joint_space() {
        let basis = Basis::new(3, 2).unwrap();
        let mut total = 0;
        for k in 0..3 {
            let q = momentum_sector_basis(&basis, k);
            total += q.ncols();
            let gram = q.adjoint() * &q;
            assert!((gram - DMatrix::<Complex64>::identity(q.ncols(), q.ncols())).camax() < 1e-12);
            for c in 0..q.ncols() {
                assert_eq!(momentum_of(&basis, &q.column(c).into_owned()), Some(k));
            }
        }
        assert_eq!(total, 36);
        assert_eq!(momentum_sector_basis(&basis, 0).ncols(), 12);
    }
}
