//! Positive (non-CP) maps, entanglement witnesses and the Jamiołkowski
//! correspondence (1/d)A = (I⊗Λ)P₊ between them; Choi-map detection of
//! PPT entanglement.
//!
//! A map Λ: A_A → A_B is stored canonically through its Choi operator
//! C = Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|) = d·(I⊗Λ)P₊, which *is* the corresponding
//! witness, so the two directions of the isomorphism are exact by
//! construction. Built-in maps additionally carry a closure form used as an
//! accelerator.

use crate::error::{Error, Result};
use crate::matcore::{
    expectation, hermitian_eig, identity, min_eigenvalue, CMatrix, CVector, DensityMatrix, C64,
};
use crate::rng::RngStream;
use crate::states;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MapKind {
    Identity,
    Transposition,
    Reduction,
    Choi,
}

/// Linear map between operator spaces in Choi representation.
#[derive(Debug, Clone)]
pub struct LinearMap {
    dim_in: usize,
    dim_out: usize,
    choi: CMatrix,
    kind: Option<MapKind>,
}

impl LinearMap {
    fn from_closure<F>(dim_in: usize, dim_out: usize, f: F, kind: Option<MapKind>) -> Self
    where
        F: Fn(&CMatrix) -> CMatrix,
    {
        let mut choi = CMatrix::zeros(dim_in * dim_out, dim_in * dim_out);
        for i in 0..dim_in {
            for j in 0..dim_in {
                let mut e = CMatrix::zeros(dim_in, dim_in);
                e[(i, j)] = C64::new(1.0, 0.0);
                let img = f(&e);
                for k in 0..dim_out {
                    for l in 0..dim_out {
                        choi[(i * dim_out + k, j * dim_out + l)] = img[(k, l)];
                    }
                }
            }
        }
        LinearMap {
            dim_in,
            dim_out,
            choi,
            kind,
        }
    }

    pub fn identity_map(d: usize) -> Self {
        Self::from_closure(d, d, |x| x.clone(), Some(MapKind::Identity))
    }

    /// Transposition, the canonical positive non-CP map.
    pub fn transposition(d: usize) -> Self {
        Self::from_closure(d, d, |x| x.transpose(), Some(MapKind::Transposition))
    }

    /// Reduction map Λ(A) = (Tr A)·I - A; eigenvalues λ_i = Tr A - a_i.
    pub fn reduction(d: usize) -> Self {
        Self::from_closure(
            d,
            d,
            |x| identity(x.nrows()) * x.trace() - x,
            Some(MapKind::Reduction),
        )
    }

    /// The Choi map on 3×3 matrices: sign-flipped off-diagonal plus the
    /// cyclically shifted diagonal. Positive but non-decomposable.
    pub fn choi3() -> Self {
        Self::from_closure(3, 3, choi_action, Some(MapKind::Choi))
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Apply the map to a matrix, via the closure form when available and
    /// the Choi contraction Λ(X) = Tr_in[(Xᵀ⊗I)·C] otherwise.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim_in || x.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "map expects {0}x{0} input, got {1}x{2}",
                self.dim_in,
                x.nrows(),
                x.ncols()
            )));
        }
        match self.kind {
            Some(MapKind::Identity) => Ok(x.clone()),
            Some(MapKind::Transposition) => Ok(x.transpose()),
            Some(MapKind::Reduction) => Ok(identity(self.dim_in) * x.trace() - x),
            Some(MapKind::Choi) => Ok(choi_action(x)),
            None => {
                let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
                for k in 0..self.dim_out {
                    for l in 0..self.dim_out {
                        let mut s = C64::new(0.0, 0.0);
                        for i in 0..self.dim_in {
                            for j in 0..self.dim_in {
                                s += x[(i, j)] * self.choi[(i * self.dim_out + k, j * self.dim_out + l)];
                            }
                        }
                        out[(k, l)] = s;
                    }
                }
                Ok(out)
            }
        }
    }
}

fn choi_action(a: &CMatrix) -> CMatrix {
    let mut out = -a.clone();
    for i in 0..3 {
        out[(i, i)] = a[(i, i)];
    }
    out[(0, 0)] += a[(2, 2)];
    out[(1, 1)] += a[(0, 0)];
    out[(2, 2)] += a[(1, 1)];
    out
}

/// Hermitian operator nonnegative on all product states (candidate
/// entanglement witness).
#[derive(Debug, Clone)]
pub struct Witness {
    pub op: CMatrix,
    pub dim_a: usize,
    pub dim_b: usize,
}

/// (1/d)A = (I⊗Λ)P₊, i.e. the witness is the Choi operator itself.
pub fn witness_from_map(map: &LinearMap) -> Witness {
    Witness {
        op: map.choi.clone(),
        dim_a: map.dim_in,
        dim_b: map.dim_out,
    }
}

/// Inverse direction of the isomorphism: ⟨k|Λ(|i⟩⟨j|)|l⟩ = ⟨ik|A|jl⟩.
pub fn map_from_witness(w: &Witness) -> LinearMap {
    LinearMap {
        dim_in: w.dim_a,
        dim_out: w.dim_b,
        choi: w.op.clone(),
        kind: None,
    }
}

/// Import a Hermitian witness operator from the JSON matrix format.
pub fn witness_from_matrix_file(file: &crate::report::MatrixFile) -> Result<Witness> {
    let n = file.dim_a * file.dim_b;
    if file.entries.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "expected {} entries for a {n}x{n} witness, got {}",
            n * n,
            file.entries.len()
        )));
    }
    let op = CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = file.entries[i * n + j];
        C64::new(re, im)
    });
    let dev = crate::matcore::hermitian_deviation(&op);
    if dev > crate::tol::TAU_HERM {
        return Err(Error::NotHermitian {
            deviation: dev,
            tolerance: crate::tol::TAU_HERM,
        });
    }
    Ok(Witness {
        op: crate::matcore::symmetrize(&op),
        dim_a: file.dim_a,
        dim_b: file.dim_b,
    })
}

/// Tr(Wρ); a negative value certifies entanglement.
pub fn witness_value(w: &Witness, rho: &DensityMatrix) -> Result<f64> {
    if w.dim_a != rho.dim_a() || w.dim_b != rho.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "witness on {}⊗{} vs state on {}⊗{}",
            w.dim_a,
            w.dim_b,
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    Ok((&w.op * rho.matrix()).trace().re)
}

/// (I⊗Λ)ρ computed blockwise on the A-major block layout; Hermitian
/// whenever Λ is Hermiticity-preserving.
pub fn apply_to_b(map: &LinearMap, rho: &DensityMatrix) -> Result<CMatrix> {
    if map.dim_in != rho.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "map input dimension {} vs dimB {}",
            map.dim_in,
            rho.dim_b()
        )));
    }
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let dout = map.dim_out;
    let m = rho.matrix();
    let mut out = CMatrix::zeros(da * dout, da * dout);
    for i in 0..da {
        for j in 0..da {
            let mut block = CMatrix::zeros(db, db);
            for mu in 0..db {
                for nu in 0..db {
                    block[(mu, nu)] = m[(i * db + mu, j * db + nu)];
                }
            }
            let img = map.apply(&block)?;
            for k in 0..dout {
                for l in 0..dout {
                    out[(i * dout + k, j * dout + l)] = img[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Result of running the Choi map over a 3⊗3 state.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ChoiDetection {
    pub detected: bool,
    pub min_eigenvalue: f64,
}

/// Detection of PPT entanglement via the non-decomposable Choi map:
/// detected ⇔ min eig of (I⊗Λ_Choi)ρ < -τ_pos. On the Størmer family the
/// minimum eigenvalue is (3-α)/21, i.e. the literature value (3-α)/2 in
/// the unnormalized convention rescaled by 2/21 for the trace-one σ_α.
pub fn choi_detect(rho: &DensityMatrix) -> Result<ChoiDetection> {
    if rho.dim_a() != 3 || rho.dim_b() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "Choi detection needs a 3⊗3 state, got {}⊗{}",
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    let out = apply_to_b(&LinearMap::choi3(), rho)?;
    let min_eig = min_eigenvalue(&out)?;
    Ok(ChoiDetection {
        detected: min_eig < -tol::TAU_POS,
        min_eigenvalue: min_eig,
    })
}

/// Stochastic certificate that a witness is nonnegative on product states.
#[derive(Debug, Clone)]
pub struct ProductPositivityCert {
    /// Minimum of ⟨a⊗b|W|a⊗b⟩ found over all probes and refinements.
    pub min_value: f64,
    pub probes: usize,
    pub passed: bool,
}

/// Certify Tr(W·P⊗Q) ≥ -τ_pos over Haar product probes, then refine the
/// worst probes by alternating eigen-minimization (for a fixed b the
/// optimum over a is the bottom eigenvector of the compressed operator,
/// and vice versa).
pub fn certify_witness_on_products(
    w: &Witness,
    probes: usize,
    rng: &mut RngStream,
) -> ProductPositivityCert {
    let mut min_value = f64::INFINITY;
    let mut worst: Option<(CVector, CVector)> = None;
    for _ in 0..probes.max(1) {
        let a = states::random_pure_state(w.dim_a, rng);
        let b = states::random_pure_state(w.dim_b, rng);
        let v = product_value(w, &a, &b);
        if v < min_value {
            min_value = v;
            worst = Some((a, b));
        }
    }
    if let Some((_, mut b)) = worst {
        for _ in 0..24 {
            let before = min_value;
            let a = best_a_for_b(w, &b);
            b = best_a_for_b(&flip_witness(w), &a);
            min_value = min_value.min(product_value(w, &a, &b));
            if before - min_value < 1e-12 {
                break;
            }
        }
    }
    ProductPositivityCert {
        min_value,
        probes,
        passed: min_value >= -tol::TAU_POS,
    }
}

fn product_value(w: &Witness, a: &CVector, b: &CVector) -> f64 {
    let mut prod = CVector::zeros(w.dim_a * w.dim_b);
    for i in 0..w.dim_a {
        for j in 0..w.dim_b {
            prod[i * w.dim_b + j] = a[i] * b[j];
        }
    }
    expectation(&w.op, &prod).re
}

/// Bottom eigenvector of M_b with (M_b)_{ij} = ⟨i⊗b|W|j⊗b⟩.
fn best_a_for_b(w: &Witness, b: &CVector) -> CVector {
    let mut m = CMatrix::zeros(w.dim_a, w.dim_a);
    for i in 0..w.dim_a {
        for j in 0..w.dim_a {
            let mut s = C64::new(0.0, 0.0);
            for mu in 0..w.dim_b {
                for nu in 0..w.dim_b {
                    s += b[mu].conj() * w.op[(i * w.dim_b + mu, j * w.dim_b + nu)] * b[nu];
                }
            }
            m[(i, j)] = s;
        }
    }
    let spec = hermitian_eig(&crate::matcore::symmetrize(&m)).expect("compressed witness");
    spec.eigenvectors.column(w.dim_a - 1).into_owned()
}

/// Same witness with the roles of A and B swapped (for the alternating
/// minimization).
fn flip_witness(w: &Witness) -> Witness {
    let mut op = CMatrix::zeros(w.op.nrows(), w.op.ncols());
    for i in 0..w.dim_a {
        for mu in 0..w.dim_b {
            for j in 0..w.dim_a {
                for nu in 0..w.dim_b {
                    op[(mu * w.dim_a + i, nu * w.dim_a + j)] = w.op[(i * w.dim_b + mu, j * w.dim_b + nu)];
                }
            }
        }
    }
    Witness {
        op,
        dim_a: w.dim_b,
        dim_b: w.dim_a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{max_norm, partial_transpose, symmetrize, Subsystem};
    use crate::states::{make, StateFamily};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_map_leaves_state() {
        let rho = make(&StateFamily::TwoQubitExample { p: 0.4 }).unwrap();
        let out = apply_to_b(&LinearMap::identity_map(2), &rho).unwrap();
        assert!(max_norm(&(out - rho.matrix())) < 1e-14);
    }

    #[test]
    fn transposition_on_b_equals_partial_transpose() {
        let rho = make(&StateFamily::Rho2x4 { b: 0.3 }).unwrap();
        let out = apply_to_b(&LinearMap::transposition(4), &rho).unwrap();
        let pt = partial_transpose(&rho, Subsystem::B);
        assert!(max_norm(&(out - pt)) < 1e-14);
    }

    #[test]
    fn transposition_of_sigma_y_is_minus_sigma_y() {
        let sy = states::pauli_y();
        let out = LinearMap::transposition(2).apply(&sy).unwrap();
        assert!(max_norm(&(out + sy)) < 1e-15);
    }

    #[test]
    fn reduction_map_eigenvalue_identity() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(1., 0.), c(0., 0.), c(0., 0.),
                c(0., 0.), c(2., 0.), c(0., 0.),
                c(0., 0.), c(0., 0.), c(3., 0.),
            ],
        );
        let out = LinearMap::reduction(3).apply(&a).unwrap();
        let mut eigs: Vec<f64> = (0..3).map(|i| out[(i, i)].re).collect();
        eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert_eq!(eigs.iter().map(|x| x.round() as i64).collect::<Vec<_>>(), vec![5, 4, 3]);
    }

    #[test]
    fn reduction_on_isotropic_detects() {
        let rho = make(&StateFamily::Isotropic { d: 3, f: Some(0.9), p: None }).unwrap();
        let out = apply_to_b(&LinearMap::reduction(3), &rho).unwrap();
        assert!(min_eigenvalue(&out).unwrap() < 0.0);
    }

    #[test]
    fn choi_map_on_e11() {
        let mut e = CMatrix::zeros(3, 3);
        e[(0, 0)] = c(1., 0.);
        let out = LinearMap::choi3().apply(&e).unwrap();
        let mut expect = CMatrix::zeros(3, 3);
        expect[(0, 0)] = c(1., 0.);
        expect[(1, 1)] = c(1., 0.);
        assert!(max_norm(&(out - expect)) < 1e-15);
    }

    #[test]
    fn transposition_witness_is_flip() {
        for d in 2..=3usize {
            let w = witness_from_map(&LinearMap::transposition(d));
            assert!(max_norm(&(&w.op - states::flip_operator(d))) < 1e-14);
        }
    }

    #[test]
    fn flip_witness_maps_back_to_transposition() {
        let d = 3usize;
        let w = Witness {
            op: states::flip_operator(d),
            dim_a: d,
            dim_b: d,
        };
        let map = map_from_witness(&w);
        let mut rng = RngStream::from_seed(21);
        for _ in 0..10 {
            let x = crate::states::random_ginibre(d, &mut rng);
            let got = map.apply(&x).unwrap();
            assert!(max_norm(&(got - x.transpose())) < 1e-12);
        }
    }

    #[test]
    fn reduction_witness_is_identity_over_d_minus_p_plus() {
        let d = 3usize;
        let w = witness_from_map(&LinearMap::reduction(d));
        // A = d(I⊗Λ_red)P₊ = I - d·P₊
        let expect = identity(d * d) - states::max_entangled_projector(d).scale(d as f64);
        assert!(max_norm(&(&w.op - expect)) < 1e-13);
    }

    #[test]
    fn jamiolkowski_round_trip_on_probe_basis() {
        for map in [
            LinearMap::transposition(3),
            LinearMap::reduction(3),
            LinearMap::choi3(),
        ] {
            let back = map_from_witness(&witness_from_map(&map));
            for i in 0..3 {
                for j in 0..3 {
                    let mut e = CMatrix::zeros(3, 3);
                    e[(i, j)] = c(1., 0.);
                    let want = map.apply(&e).unwrap();
                    let got = back.apply(&e).unwrap();
                    assert!(max_norm(&(got - want)) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn map_linearity_on_random_probes() {
        let map = map_from_witness(&witness_from_map(&LinearMap::choi3()));
        let mut rng = RngStream::from_seed(22);
        for _ in 0..20 {
            let x = crate::states::random_ginibre(3, &mut rng);
            let y = crate::states::random_ginibre(3, &mut rng);
            let a = c(0.7, -0.2);
            let b = c(-1.3, 0.4);
            let lhs = map.apply(&(&x * a + &y * b)).unwrap();
            let rhs = map.apply(&x).unwrap() * a + map.apply(&y).unwrap() * b;
            assert!(max_norm(&(lhs - rhs)) < 1e-10);
        }
    }

    #[test]
    fn flip_witness_values() {
        // Tr(Vρ_W) < 0 iff β < -1/d
        for d in 2..=3usize {
            let w = Witness {
                op: states::flip_operator(d),
                dim_a: d,
                dim_b: d,
            };
            let thr = -1.0 / d as f64;
            for &(beta, negative) in &[(thr - 0.05, true), (thr + 0.05, false)] {
                let rho = make(&StateFamily::Werner { d, beta: Some(beta), p: None }).unwrap();
                let v = witness_value(&w, &rho).unwrap();
                assert_eq!(v < 0.0, negative, "d={d} beta={beta}");
            }
        }
        // product states give Tr(V A⊗B) = Tr(AB) ≥ 0
        let mut rng = RngStream::from_seed(23);
        let w2 = Witness {
            op: states::flip_operator(2),
            dim_a: 2,
            dim_b: 2,
        };
        for _ in 0..50 {
            let rho = states::random_separable_state(2, 2, 1, &mut rng);
            assert!(witness_value(&w2, &rho).unwrap() >= -1e-12);
        }
        // ψ₋ is antisymmetric: Vψ₋ = -ψ₋
        let singlet = make(&StateFamily::Singlet).unwrap();
        assert!((witness_value(&w2, &singlet).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn positive_maps_positive_on_separable_states() {
        let mut rng = RngStream::from_seed(24);
        let maps = [
            LinearMap::transposition(3),
            LinearMap::reduction(3),
            LinearMap::choi3(),
        ];
        for _ in 0..500 {
            let rho = states::random_separable_state(3, 3, 16, &mut rng);
            for map in &maps {
                let out = apply_to_b(map, &rho).unwrap();
                let min = min_eigenvalue(&symmetrize(&out)).unwrap();
                assert!(min >= -tol::TAU_POS, "min {min:.3e}");
            }
        }
    }

    #[test]
    fn decomposable_maps_never_detect_ppt_states() {
        let transp = LinearMap::transposition(3);
        let red = LinearMap::reduction(3);
        for rho in states::sample_ppt_states(3, 3, 500, 25) {
            for map in [&transp, &red] {
                let out = apply_to_b(map, &rho).unwrap();
                assert!(min_eigenvalue(&out).unwrap() >= -tol::TAU_POS);
            }
        }
    }

    #[test]
    fn choi_detects_stormer_band() {
        // min eig of (I⊗Λ)σ_α = (3-α)/21: the literature's (3-α)/2 scaled
        // by 2/21 once σ_α carries its 1/7 normalization
        for &alpha in &[2.0, 2.5, 3.2, 3.6, 4.0, 5.0] {
            let rho = make(&StateFamily::Stormer { alpha }).unwrap();
            let det = choi_detect(&rho).unwrap();
            assert_eq!(det.detected, alpha > 3.0, "alpha={alpha}");
            assert!(
                (det.min_eigenvalue - (3.0 - alpha) / 21.0).abs() < 1e-10,
                "alpha={alpha}: min eig {} vs {}",
                det.min_eigenvalue,
                (3.0 - alpha) / 21.0
            );
        }
        let rho = make(&StateFamily::Stormer { alpha: 2.5 }).unwrap();
        assert!(!choi_detect(&rho).unwrap().detected);
        let rho = make(&StateFamily::Stormer { alpha: 4.0 }).unwrap();
        assert!(choi_detect(&rho).unwrap().detected); // PPT entangled at α=4
    }

    #[test]
    fn witness_product_positivity_certificates() {
        let mut rng = RngStream::from_seed(26);
        let flip = Witness {
            op: states::flip_operator(2),
            dim_a: 2,
            dim_b: 2,
        };
        let cert = certify_witness_on_products(&flip, 500, &mut rng);
        assert!(cert.passed, "flip witness min {:.3e}", cert.min_value);

        let red = witness_from_map(&LinearMap::reduction(3));
        let cert = certify_witness_on_products(&red, 500, &mut rng);
        assert!(cert.passed, "reduction witness min {:.3e}", cert.min_value);

        // -V is negative on product states (Tr(-V·A⊗B) = -Tr(AB) < 0)
        let not_witness = Witness {
            op: states::flip_operator(2).scale(-1.0),
            dim_a: 2,
            dim_b: 2,
        };
        let cert = certify_witness_on_products(&not_witness, 500, &mut rng);
        assert!(!cert.passed);
    }
}
