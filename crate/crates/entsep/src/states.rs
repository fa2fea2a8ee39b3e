//! Factories for the named state and operator families, plus random
//! state/unitary sampling for Monte Carlo runs and stochastic maximization.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    identity, symmetrize, C64, CMatrix, CVector, DensityMatrix,
};
use crate::rng::RngStream;
use crate::tol;

/// Named parametric state family, resolvable to a [`DensityMatrix`].
///
/// Serialization follows the CLI state-spec format, e.g.
/// `{"family":"stormer","alpha":3.5}` or `{"family":"werner","d":3,"beta":-0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateFamily {
    /// ψ₋ = (|01⟩ - |10⟩)/√2 as a projector.
    Singlet,
    /// P₊ = |ψ₊⟩⟨ψ₊| with ψ₊ = (1/√d) Σ |ii⟩.
    MaxEntangled { d: usize },
    /// Werner state of a d⊗d system. Exactly one of `beta`, `p` must be
    /// given: the flip form (I + βV)/(d² + βd) with -1 ≤ β ≤ 1, or the
    /// noisy-antisymmetric form p·P_A/N_A + (1-p)·I/d² which for d = 2 is
    /// p|ψ₋⟩⟨ψ₋| + (1-p)I/4.
    Werner {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
    },
    /// Isotropic state of a d⊗d system: p P₊ + (1-p) I/d², parametrized by
    /// p or by the singlet fraction F (0 ≤ F ≤ 1, p = (d²F-1)/(d²-1)).
    Isotropic {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
    },
    /// p|ψ₋⟩⟨ψ₋| + (1-p)|00⟩⟨00| with 0 ≤ p ≤ 1.
    TwoQubitExample { p: f64 },
    /// σ_α = (2/7)P₊ + (α/7)σ₊ + ((5-α)/7)σ₋ on 3⊗3, 2 ≤ α ≤ 5.
    Stormer { alpha: f64 },
    /// The 2⊗4 PPT entangled state ρ_b, 0 < b < 1.
    Rho2x4 { b: f64 },
    /// The five-vector tiles product basis on 3⊗3. Not itself a state;
    /// `make` rejects it (use [`tiles_upb`] / the `upb` CLI command).
    TilesUpb,
    /// Uniform state on the orthogonal complement of the tiles UPB.
    TilesBoundEntangled,
    /// (1-ε)·base + ε·I/N.
    MixedWithNoise {
        base: Box<StateFamily>,
        epsilon: f64,
    },
    /// Hilbert-Schmidt random state G G†/Tr(G G†) from the given seed.
    Random { dim_a: usize, dim_b: usize, seed: u64 },
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Computational basis ket |i⟩ in dimension `dim`.
pub fn basis_ket(dim: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[i] = c(1.0);
    v
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(1.), c(0.)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[c(0.), C64::new(0., -1.), C64::new(0., 1.), c(0.)],
    )
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.), c(0.), c(0.), c(-1.)])
}

/// ψ₊^d = (1/√d) Σ_i |i⟩⊗|i⟩.
pub fn max_entangled_vector(d: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    let amp = c(1.0 / (d as f64).sqrt());
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}

/// Projector P₊ onto ψ₊^d.
pub fn max_entangled_projector(d: usize) -> CMatrix {
    let v = max_entangled_vector(d);
    &v * v.adjoint()
}

/// ψ₋ = (|01⟩ - |10⟩)/√2.
pub fn singlet_vector() -> CVector {
    let s = 1.0 / 2.0f64.sqrt();
    let mut v = CVector::zeros(4);
    v[1] = c(s);
    v[2] = c(-s);
    v
}

/// Unitary flip operator V on d⊗d: V ψ⊗φ = φ⊗ψ. Satisfies V² = I,
/// V = P_S - P_A and Tr(V·A⊗B) = Tr(AB).
pub fn flip_operator(d: usize) -> CMatrix {
    let mut v = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            v[(i * d + j, j * d + i)] = c(1.0);
        }
    }
    v
}

/// σ₊ = (1/3)(|01⟩⟨01| + |12⟩⟨12| + |20⟩⟨20|) on 3⊗3.
pub fn sigma_plus() -> CMatrix {
    cyclic_diag(&[(0, 1), (1, 2), (2, 0)])
}

/// σ₋ = (1/3)(|10⟩⟨10| + |21⟩⟨21| + |02⟩⟨02|) on 3⊗3.
pub fn sigma_minus() -> CMatrix {
    cyclic_diag(&[(1, 0), (2, 1), (0, 2)])
}

fn cyclic_diag(pairs: &[(usize, usize)]) -> CMatrix {
    let mut m = CMatrix::zeros(9, 9);
    for &(i, j) in pairs {
        m[(i * 3 + j, i * 3 + j)] = c(1.0 / 3.0);
    }
    m
}

/// Resolve a family spec to a density matrix with its (dimA, dimB) labels.
pub fn make(spec: &StateFamily) -> Result<DensityMatrix> {
    match spec {
        StateFamily::Singlet => DensityMatrix::from_pure(&singlet_vector(), 2, 2),
        StateFamily::MaxEntangled { d } => {
            require(*d >= 2, "max_entangled requires d >= 2")?;
            DensityMatrix::new(max_entangled_projector(*d), *d, *d)
        }
        StateFamily::Werner { d, beta, p } => make_werner(*d, *beta, *p),
        StateFamily::Isotropic { d, f, p } => make_isotropic(*d, *f, *p),
        StateFamily::TwoQubitExample { p } => {
            require((0.0..=1.0).contains(p), "two_qubit_example requires 0 <= p <= 1")?;
            let psi = singlet_vector();
            let m = (&psi * psi.adjoint()).scale(*p)
                + (basis_ket(4, 0) * basis_ket(4, 0).adjoint()).scale(1.0 - p);
            DensityMatrix::new(m, 2, 2)
        }
        StateFamily::Stormer { alpha } => make_stormer(*alpha),
        StateFamily::Rho2x4 { b } => make_rho2x4(*b),
        StateFamily::TilesUpb => Err(Error::ParameterOutOfRange(
            "tiles_upb is a product basis, not a state; use tiles_bound_entangled or the upb command"
                .into(),
        )),
        StateFamily::TilesBoundEntangled => upb_complement_state(&tiles_upb()),
        StateFamily::MixedWithNoise { base, epsilon } => {
            require(
                (0.0..=1.0).contains(epsilon),
                "mixed_with_noise requires 0 <= epsilon <= 1",
            )?;
            let rho = make(base)?;
            let n = rho.dim();
            let m = rho.matrix().scale(1.0 - epsilon)
                + identity(n).scale(epsilon / n as f64);
            DensityMatrix::new(m, rho.dim_a(), rho.dim_b())
        }
        StateFamily::Random { dim_a, dim_b, seed } => {
            require(*dim_a >= 2 && *dim_b >= 2, "random requires dimA, dimB >= 2")?;
            let mut rng = RngStream::from_seed(*seed);
            Ok(random_density_matrix(*dim_a, *dim_b, &mut rng))
        }
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(msg.into()))
    }
}

fn make_werner(d: usize, beta: Option<f64>, p: Option<f64>) -> Result<DensityMatrix> {
    require(d >= 2, "werner requires d >= 2")?;
    let beta = match (beta, p) {
        (Some(beta), None) => {
            require((-1.0..=1.0).contains(&beta), "werner requires -1 <= beta <= 1")?;
            beta
        }
        (None, Some(p)) => {
            let lo = -((d as f64 - 1.0) / (d as f64 + 1.0));
            require(
                (lo..=1.0).contains(&p),
                "werner requires -(d-1)/(d+1) <= p <= 1",
            )?;
            // p·P_A/N_A + (1-p)·I/d² rewritten in the flip form: solve
            // the two trace moments for β.
            let df = d as f64;
            let tr_v = -p + (1.0 - p) / df; // Tr(V ρ)
            (tr_v * df - 1.0) / (df - tr_v)
        }
        _ => {
            return Err(Error::ParameterOutOfRange(
                "werner requires exactly one of beta, p".into(),
            ))
        }
    };
    let df = d as f64;
    let m = (identity(d * d) + flip_operator(d).scale(beta)).scale(1.0 / (df * df + beta * df));
    DensityMatrix::new(m, d, d)
}

fn make_isotropic(d: usize, f: Option<f64>, p: Option<f64>) -> Result<DensityMatrix> {
    require(d >= 2, "isotropic requires d >= 2")?;
    let d2 = (d * d) as f64;
    let p = match (f, p) {
        (Some(f), None) => {
            require((0.0..=1.0).contains(&f), "isotropic requires 0 <= F <= 1")?;
            (d2 * f - 1.0) / (d2 - 1.0)
        }
        (None, Some(p)) => {
            require(
                (-1.0 / (d2 - 1.0)..=1.0).contains(&p),
                "isotropic requires -1/(d²-1) <= p <= 1",
            )?;
            p
        }
        _ => {
            return Err(Error::ParameterOutOfRange(
                "isotropic requires exactly one of f, p".into(),
            ))
        }
    };
    let m = max_entangled_projector(d).scale(p) + identity(d * d).scale((1.0 - p) / d2);
    DensityMatrix::new(m, d, d)
}

fn make_stormer(alpha: f64) -> Result<DensityMatrix> {
    require((2.0..=5.0).contains(&alpha), "stormer requires 2 <= alpha <= 5")?;
    let m = max_entangled_projector(3).scale(2.0 / 7.0)
        + sigma_plus().scale(alpha / 7.0)
        + sigma_minus().scale((5.0 - alpha) / 7.0);
    DensityMatrix::new(m, 3, 3)
}

fn make_rho2x4(b: f64) -> Result<DensityMatrix> {
    require(0.0 < b && b < 1.0, "rho2x4 requires 0 < b < 1")?;
    let s = (1.0 - b * b).sqrt() / 2.0;
    let h = (1.0 + b) / 2.0;
    #[rustfmt::skip]
    let rows: [[f64; 8]; 8] = [
        [b,  0., 0., 0., 0., b,  0., 0.],
        [0., b,  0., 0., 0., 0., b,  0.],
        [0., 0., b,  0., 0., 0., 0., b ],
        [0., 0., 0., b,  0., 0., 0., 0.],
        [0., 0., 0., 0., h,  0., 0., s ],
        [b,  0., 0., 0., 0., b,  0., 0.],
        [0., b,  0., 0., 0., 0., b,  0.],
        [0., 0., b,  0., s,  0., 0., h ],
    ];
    let mut m = CMatrix::zeros(8, 8);
    for (i, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            m[(i, j)] = c(x);
        }
    }
    DensityMatrix::new(m.scale(1.0 / (7.0 * b + 1.0)), 2, 4)
}

/// Orthogonal product vectors, fewer than dimA·dimB of them, with bipartite
/// structure. Construction enforces normalized parts and the count bound;
/// orthogonality and unextendibility are checked by `criteria::validate_upb`.
#[derive(Debug, Clone)]
pub struct Upb {
    dim_a: usize,
    dim_b: usize,
    vectors: Vec<(CVector, CVector)>,
}

impl Upb {
    pub fn new(dim_a: usize, dim_b: usize, vectors: Vec<(CVector, CVector)>) -> Result<Self> {
        if vectors.len() >= dim_a * dim_b {
            return Err(Error::InvalidUpb(format!(
                "{} vectors do not leave a complement in dimension {}",
                vectors.len(),
                dim_a * dim_b
            )));
        }
        for (k, (a, b)) in vectors.iter().enumerate() {
            if a.len() != dim_a || b.len() != dim_b {
                return Err(Error::InvalidUpb(format!("vector {k} has wrong part dimensions")));
            }
            if (a.norm() - 1.0).abs() > tol::TAU_NORM || (b.norm() - 1.0).abs() > tol::TAU_NORM {
                return Err(Error::InvalidUpb(format!("vector {k} parts are not normalized")));
            }
        }
        Ok(Upb { dim_a, dim_b, vectors })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn part_a(&self, k: usize) -> &CVector {
        &self.vectors[k].0
    }

    pub fn part_b(&self, k: usize) -> &CVector {
        &self.vectors[k].1
    }

    /// Full product vector w_k = a_k ⊗ b_k.
    pub fn product_vector(&self, k: usize) -> CVector {
        let (a, b) = &self.vectors[k];
        let mut v = CVector::zeros(self.dim_a * self.dim_b);
        for i in 0..self.dim_a {
            for j in 0..self.dim_b {
                v[i * self.dim_b + j] = a[i] * b[j];
            }
        }
        v
    }

    /// Drop one member (used to demonstrate extendibility).
    pub fn without(&self, k: usize) -> Result<Upb> {
        let mut vectors = self.vectors.clone();
        vectors.remove(k);
        Upb::new(self.dim_a, self.dim_b, vectors)
    }
}

/// The five tiles vectors on 3⊗3:
/// |v₀⟩ = (1/√2)|0⟩|0-1⟩, |v₁⟩ = (1/√2)|0-1⟩|2⟩, |v₂⟩ = (1/√2)|2⟩|1-2⟩,
/// |v₃⟩ = (1/√2)|1-2⟩|0⟩, |v₄⟩ = (1/3)|0+1+2⟩|0+1+2⟩.
pub fn tiles_upb() -> Upb {
    let s = 1.0 / 2.0f64.sqrt();
    let minus = |i: usize, j: usize| {
        let mut v = CVector::zeros(3);
        v[i] = c(s);
        v[j] = c(-s);
        v
    };
    let uniform = || {
        let t = 1.0 / 3.0f64.sqrt();
        CVector::from_iterator(3, (0..3).map(|_| c(t)))
    };
    let vectors = vec![
        (basis_ket(3, 0), minus(0, 1)),
        (minus(0, 1), basis_ket(3, 2)),
        (basis_ket(3, 2), minus(1, 2)),
        (minus(1, 2), basis_ket(3, 0)),
        (uniform(), uniform()),
    ];
    Upb::new(3, 3, vectors).expect("tiles vectors are well formed")
}

/// Uniform state on the orthogonal complement of the UPB span:
/// ρ = (I - P)/(dAdB - k). Validates the basis first; the result is PPT
/// but entangled.
pub fn upb_complement_state(upb: &Upb) -> Result<DensityMatrix> {
    let report = crate::criteria::validate_upb(upb);
    if !report.orthogonal {
        return Err(Error::InvalidUpb("members are not pairwise orthogonal".into()));
    }
    if !report.unextendible {
        return Err(Error::InvalidUpb("a product vector orthogonal to all members exists".into()));
    }
    let n = upb.dim_a * upb.dim_b;
    let mut p = CMatrix::zeros(n, n);
    for k in 0..upb.len() {
        let w = upb.product_vector(k);
        p += &w * w.adjoint();
    }
    let m = (identity(n) - p).scale(1.0 / (n - upb.len()) as f64);
    DensityMatrix::new(m, upb.dim_a, upb.dim_b)
}

/// Square matrix of i.i.d. standard complex Gaussians.
pub fn random_ginibre(n: usize, rng: &mut RngStream) -> CMatrix {
    DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Hilbert-Schmidt random state G G†/Tr(G G†); full rank almost surely.
pub fn random_density_matrix(dim_a: usize, dim_b: usize, rng: &mut RngStream) -> DensityMatrix {
    let n = dim_a * dim_b;
    let g = random_ginibre(n, rng);
    let gg = &g * g.adjoint();
    let m = symmetrize(&gg).scale(1.0 / gg.trace().re);
    DensityMatrix::new(m, dim_a, dim_b).expect("Ginibre construction yields a valid state")
}

/// Hilbert-Schmidt random states conditioned on PPT by rejection, one
/// independent substream per output state. The PPT fraction decays fast
/// with dimension (about 8e-5 at 3⊗3), so the rejection loop tests the
/// partial transpose on the raw Ginibre state and validates only the
/// accepted ones.
pub fn sample_ppt_states(
    dim_a: usize,
    dim_b: usize,
    count: usize,
    seed: u64,
) -> Vec<DensityMatrix> {
    use rayon::prelude::*;
    (0..count as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = RngStream::substream(seed, idx);
            let n = dim_a * dim_b;
            loop {
                let g = random_ginibre(n, &mut rng);
                let gg = &g * g.adjoint();
                let m = symmetrize(&gg).scale(1.0 / gg.trace().re);
                let pt = crate::matcore::partial_transpose_raw(
                    &m,
                    dim_a,
                    dim_b,
                    crate::matcore::Subsystem::B,
                );
                let min = crate::matcore::min_eigenvalue(&pt).expect("PT is Hermitian");
                if min >= -tol::TAU_POS {
                    return DensityMatrix::new(m, dim_a, dim_b).expect("Ginibre state");
                }
            }
        })
        .collect()
}

/// Haar-random unitary via QR of a Ginibre matrix with the R-diagonal
/// phase correction.
pub fn random_unitary(d: usize, rng: &mut RngStream) -> CMatrix {
    let g = random_ginibre(d, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 {
            rkk / c(rkk.norm())
        } else {
            c(1.0)
        };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Haar-random real orthogonal matrix (QR of a real Gaussian matrix).
pub fn random_real_orthogonal(d: usize, rng: &mut RngStream) -> CMatrix {
    let g = nalgebra::DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            for i in 0..d {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    CMatrix::from_fn(d, d, |i, j| c(q[(i, j)]))
}

/// Haar-random pure state vector.
pub fn random_pure_state(dim: usize, rng: &mut RngStream) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        if n > 1e-12 {
            return v.scale(1.0 / n);
        }
    }
}

/// Random mixture of at most `max_terms` random product states; separable
/// by construction.
pub fn random_separable_state(
    dim_a: usize,
    dim_b: usize,
    max_terms: usize,
    rng: &mut RngStream,
) -> DensityMatrix {
    let k = rng.random_range(1..=max_terms);
    let mut weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-6).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let n = dim_a * dim_b;
    let mut m = CMatrix::zeros(n, n);
    for &w in &weights {
        let a = random_pure_state(dim_a, rng);
        let b = random_pure_state(dim_b, rng);
        let mut prod = CVector::zeros(n);
        for i in 0..dim_a {
            for j in 0..dim_b {
                prod[i * dim_b + j] = a[i] * b[j];
            }
        }
        m += (&prod * prod.adjoint()).scale(w);
    }
    DensityMatrix::new(symmetrize(&m), dim_a, dim_b).expect("mixture of product states is a state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{
        fidelity_with, max_norm, min_pt_eigenvalue, partial_trace, tensor, Subsystem,
    };
    use rand::RngCore;

    #[test]
    fn werner_flip_form_identity() {
        for d in 2..=4usize {
            for &beta in &[-1.0, -0.6, -1.0 / d as f64, 0.0, 0.3, 1.0] {
                let rho = make(&StateFamily::Werner { d, beta: Some(beta), p: None }).unwrap();
                let df = d as f64;
                let expect = (identity(d * d) + flip_operator(d).scale(beta))
                    .scale(1.0 / (df * df + beta * df));
                assert!(max_norm(&(rho.matrix() - expect)) < 1e-12);
            }
        }
    }

    #[test]
    fn werner_p_one_is_singlet_projector() {
        let rho = make(&StateFamily::Werner { d: 2, beta: None, p: Some(1.0) }).unwrap();
        let psi = singlet_vector();
        let proj = &psi * psi.adjoint();
        assert!(max_norm(&(rho.matrix() - proj)) < 1e-12);
    }

    #[test]
    fn werner_p_form_matches_direct_mixture() {
        // p·P_A/N_A + (1-p)·I/d² must agree with the β-form construction.
        for d in 2..=3usize {
            let df = d as f64;
            let n_a = (df * df - df) / 2.0;
            for &p in &[-0.2, 0.0, 0.25, 0.7, 1.0] {
                let rho = make(&StateFamily::Werner { d, beta: None, p: Some(p) }).unwrap();
                let p_a = (identity(d * d) - flip_operator(d)).scale(0.5);
                let expect = p_a.scale(p / n_a) + identity(d * d).scale((1.0 - p) / (df * df));
                assert!(max_norm(&(rho.matrix() - expect)) < 1e-12, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn isotropic_reparametrization_consistent() {
        for d in 2..=4usize {
            let d2 = (d * d) as f64;
            for &f in &[0.0, 1.0 / d2, 0.4, 0.9, 1.0] {
                let p = (d2 * f - 1.0) / (d2 - 1.0);
                let via_f = make(&StateFamily::Isotropic { d, f: Some(f), p: None }).unwrap();
                let via_p = make(&StateFamily::Isotropic { d, f: None, p: Some(p) }).unwrap();
                assert!(max_norm(&(via_f.matrix() - via_p.matrix())) < 1e-14);
            }
        }
    }

    #[test]
    fn isotropic_zero_admixture_is_maximally_mixed() {
        let d = 3usize;
        let f = 1.0 / (d * d) as f64;
        let rho = make(&StateFamily::Isotropic { d, f: Some(f), p: None }).unwrap();
        let expect = identity(d * d).scale(1.0 / (d * d) as f64);
        assert!(max_norm(&(rho.matrix() - expect)) < 1e-14);
    }

    #[test]
    fn isotropic_singlet_fraction_is_parameter() {
        for d in 2..=3usize {
            for &f in &[0.2, 0.5, 0.77] {
                let rho = make(&StateFamily::Isotropic { d, f: Some(f), p: None }).unwrap();
                let got = fidelity_with(&rho, &max_entangled_vector(d)).unwrap();
                assert!((got - f).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stormer_is_the_stated_convex_mixture() {
        for &alpha in &[2.0, 3.0, 3.7, 4.0, 5.0] {
            let rho = make(&StateFamily::Stormer { alpha }).unwrap();
            let expect = max_entangled_projector(3).scale(2.0 / 7.0)
                + sigma_plus().scale(alpha / 7.0)
                + sigma_minus().scale((5.0 - alpha) / 7.0);
            assert!(max_norm(&(rho.matrix() - expect)) < 1e-15);
        }
    }

    #[test]
    fn rho2x4_matches_printed_matrix() {
        for &b in &[0.1, 0.5, 0.9] {
            let rho = make(&StateFamily::Rho2x4 { b }).unwrap();
            let norm = 1.0 / (7.0 * b + 1.0);
            let m = rho.matrix();
            assert!((m[(0, 0)].re - b * norm).abs() < 1e-15);
            assert!((m[(0, 5)].re - b * norm).abs() < 1e-15);
            assert!((m[(4, 4)].re - (1.0 + b) / 2.0 * norm).abs() < 1e-15);
            assert!((m[(4, 7)].re - (1.0 - b * b).sqrt() / 2.0 * norm).abs() < 1e-15);
            assert!((m[(7, 7)].re - (1.0 + b) / 2.0 * norm).abs() < 1e-15);
            assert!((m[(3, 3)].re - b * norm).abs() < 1e-15);
            assert_eq!(rho.dim_a(), 2);
            assert_eq!(rho.dim_b(), 4);
        }
    }

    #[test]
    fn flip_operator_properties() {
        for d in 2..=3usize {
            let v = flip_operator(d);
            assert!(max_norm(&(&v * &v - identity(d * d))) < 1e-15);
            // V|01⟩ = |10⟩ at d=2
            if d == 2 {
                let out = &v * basis_ket(4, 1);
                assert!((out - basis_ket(4, 2)).norm() < 1e-15);
            }
            // Tr(V·σx⊗σx) = Tr(σx²) = 2
            if d == 2 {
                let t = (&v * tensor(&pauli_x(), &pauli_x())).trace();
                assert!((t.re - 2.0).abs() < 1e-14);
            }
            // symmetric subspace dimension (d²+d)/2 = multiplicity of +1
            let eigs = crate::matcore::hermitian_eigenvalues(&v).unwrap();
            let plus = eigs.iter().filter(|&&x| x > 0.0).count();
            assert_eq!(plus, (d * d + d) / 2);
        }
    }

    #[test]
    fn max_entangled_vector_examples() {
        let v = max_entangled_vector(2);
        let s = 1.0 / 2.0f64.sqrt();
        assert!((v[0].re - s).abs() < 1e-15 && (v[3].re - s).abs() < 1e-15);
        assert!(v[1].norm() < 1e-15 && v[2].norm() < 1e-15);

        for d in 2..=4usize {
            let v = max_entangled_vector(d);
            let rho = DensityMatrix::from_pure(&v, d, d).unwrap();
            let ra = partial_trace(&rho, Subsystem::B);
            assert!(max_norm(&(ra.matrix() - identity(d).scale(1.0 / d as f64))) < 1e-14);
            // ⟨ψ₊|V|ψ₊⟩ = 1: ψ₊ lies in the symmetric subspace
            let val = crate::matcore::expectation(&flip_operator(d), &v);
            assert!((val.re - 1.0).abs() < 1e-13 && val.im.abs() < 1e-14);
        }
    }

    #[test]
    fn tiles_vectors_are_normalized_and_orthogonal() {
        let upb = tiles_upb();
        assert_eq!(upb.len(), 5);
        for k in 0..5 {
            assert!((upb.product_vector(k).norm() - 1.0).abs() < 1e-14);
        }
        for i in 0..5 {
            for j in 0..5 {
                let g = upb.product_vector(i).adjoint() * upb.product_vector(j);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[(0, 0)].re - want).abs() < 1e-14);
                assert!(g[(0, 0)].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn any_three_tiles_parts_span_c3() {
        let upb = tiles_upb();
        // every 3-subset of A parts (and of B parts) has rank 3
        for i in 0..5 {
            for j in (i + 1)..5 {
                for k in (j + 1)..5 {
                    for side in 0..2 {
                        let cols: Vec<CVector> = [i, j, k]
                            .iter()
                            .map(|&q| {
                                if side == 0 {
                                    upb.part_a(q).clone()
                                } else {
                                    upb.part_b(q).clone()
                                }
                            })
                            .collect();
                        let m = CMatrix::from_columns(&cols);
                        let rank = m.svd(false, false).rank(1e-10);
                        assert_eq!(rank, 3, "subset ({i},{j},{k}) side {side}");
                    }
                }
            }
        }
    }

    #[test]
    fn full_product_basis_is_rejected() {
        let vecs = vec![
            (basis_ket(2, 0), basis_ket(2, 0)),
            (basis_ket(2, 0), basis_ket(2, 1)),
            (basis_ket(2, 1), basis_ket(2, 0)),
            (basis_ket(2, 1), basis_ket(2, 1)),
        ];
        assert!(matches!(Upb::new(2, 2, vecs), Err(Error::InvalidUpb(_))));
    }

    #[test]
    fn tiles_complement_state_properties() {
        let upb = tiles_upb();
        let rho = upb_complement_state(&upb).unwrap();
        assert_eq!(rho.dim(), 9);
        // rank 4 = 9 - 5
        let eigs = crate::matcore::hermitian_eigenvalues(rho.matrix()).unwrap();
        let rank = eigs.iter().filter(|&&x| x > 1e-8).count();
        assert_eq!(rank, 4);
        // PPT
        assert!(min_pt_eigenvalue(&rho).unwrap() > -tol::TAU_POS);
        // orthogonal to every member
        for k in 0..5 {
            let w = upb.product_vector(k);
            let overlap = crate::matcore::expectation(rho.matrix(), &w);
            assert!(overlap.norm() < 1e-12);
        }
    }

    #[test]
    fn random_density_matrix_is_reproducible_and_valid() {
        let mut r1 = RngStream::from_seed(42);
        let mut r2 = RngStream::from_seed(42);
        let a = random_density_matrix(2, 2, &mut r1);
        let b = random_density_matrix(2, 2, &mut r2);
        assert_eq!(a.matrix(), b.matrix());
        let mut r3 = RngStream::from_seed(43);
        let c_mat = random_density_matrix(2, 2, &mut r3);
        assert!(max_norm(&(a.matrix() - c_mat.matrix())) > 1e-3);
    }

    #[test]
    fn random_density_matrix_purity_bounds() {
        let mut rng = RngStream::from_seed(1);
        let n = 2000;
        let mut purity_sum = 0.0;
        for _ in 0..n {
            let rho = random_density_matrix(2, 2, &mut rng);
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            purity_sum += rho.purity();
        }
        let mean = purity_sum / n as f64;
        assert!(mean > 0.25 && mean < 1.0, "mean purity {mean}");
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = RngStream::from_seed(3);
        for _ in 0..100 {
            let u = random_unitary(3, &mut rng);
            let dev = max_norm(&(u.adjoint() * &u - identity(3)));
            assert!(dev < 1e-10);
        }
    }

    #[test]
    fn random_unitary_d1_is_phase() {
        let mut rng = RngStream::from_seed(4);
        let u = random_unitary(1, &mut rng);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_first_moment() {
        // mean |U₀₀|² over Haar is 1/d; |U₀₀|² ~ Beta(1, d-1)
        let d = 3usize;
        let n = 10_000;
        let mut rng = RngStream::from_seed(8);
        let mut sum = 0.0;
        for _ in 0..n {
            let u = random_unitary(d, &mut rng);
            sum += u[(0, 0)].norm_sqr();
        }
        let mean = sum / n as f64;
        let df = d as f64;
        let var = (df - 1.0) / (df * df * (df + 1.0));
        let sigma = (var / n as f64).sqrt();
        assert!(
            (mean - 1.0 / df).abs() < 5.0 * sigma,
            "mean {mean} vs {} ± {sigma}",
            1.0 / df
        );
    }

    #[test]
    fn make_rejects_out_of_range() {
        assert!(make(&StateFamily::Stormer { alpha: 5.5 }).is_err());
        assert!(make(&StateFamily::Rho2x4 { b: 0.0 }).is_err());
        assert!(make(&StateFamily::Werner { d: 2, beta: Some(1.5), p: None }).is_err());
        assert!(make(&StateFamily::Werner { d: 2, beta: Some(0.1), p: Some(0.1) }).is_err());
        assert!(make(&StateFamily::TilesUpb).is_err());
    }

    #[test]
    fn every_factory_output_is_a_valid_state() {
        let specs = vec![
            StateFamily::Singlet,
            StateFamily::MaxEntangled { d: 3 },
            StateFamily::Werner { d: 3, beta: Some(-0.8), p: None },
            StateFamily::Isotropic { d: 3, f: Some(0.7), p: None },
            StateFamily::TwoQubitExample { p: 0.5 },
            StateFamily::Stormer { alpha: 3.5 },
            StateFamily::Rho2x4 { b: 0.5 },
            StateFamily::TilesBoundEntangled,
            StateFamily::MixedWithNoise {
                base: Box::new(StateFamily::Singlet),
                epsilon: 0.4,
            },
            StateFamily::Random { dim_a: 2, dim_b: 3, seed: 5 },
        ];
        for spec in specs {
            // DensityMatrix::new re-validates all invariants on the way out
            let rho = make(&spec).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < tol::TAU_TRACE);
        }
    }

    #[test]
    fn family_spec_json_round_trip() {
        let spec = StateFamily::Stormer { alpha: 3.5 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"family":"stormer","alpha":3.5}"#);
        let back: StateFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);

        // unknown fields rejected by the strict parser
        let bad: serde_json::Value =
            serde_json::from_str(r#"{"family":"stormer","alpha":3.5,"extra":1}"#).unwrap();
        assert!(crate::report::parse_family_strict(&bad).is_err());
        let good: serde_json::Value =
            serde_json::from_str(r#"{"family":"stormer","alpha":3.5}"#).unwrap();
        assert_eq!(crate::report::parse_family_strict(&good).unwrap(), spec);
    }

    #[test]
    fn split_streams_diverge_from_parent() {
        let mut parent = RngStream::from_seed(10);
        let mut child = parent.split();
        assert_ne!(parent.next_u64(), child.next_u64());
    }
}
