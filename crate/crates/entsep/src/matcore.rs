//! Dense complex linear algebra for bipartite systems: tensor products,
//! partial trace, partial transpose, Hermitian eigendecomposition and
//! positivity testing with explicit tolerances.
//!
//! A state of an `m ⊗ n` system is stored with the composite index
//! convention `row = i·dimB + μ` (A-major), so the matrix decomposes into an
//! `m×m` grid of `n×n` blocks acting on the B space. Partial transposition
//! over B is then the transposition of every block.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Which side of the bipartition an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Tri-state positivity verdict at reporting level. `Marginal` means the
/// minimum eigenvalue lies within ±tol of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Positivity {
    Positive,
    Marginal,
    Negative,
}

pub fn positivity_of(min_eigenvalue: f64, tol: f64) -> Positivity {
    if min_eigenvalue > tol {
        Positivity::Positive
    } else if min_eigenvalue < -tol {
        Positivity::Negative
    } else {
        Positivity::Marginal
    }
}

/// Trace-one positive operator with bipartite dimension labels.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMatrix,
    dim_a: usize,
    dim_b: usize,
}

/// Full spectrum of a Hermitian operator, eigenvalues sorted descending,
/// eigenvector `i` in column `i`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (repairing drift ≤ τ_herm via (M+M†)/2),
    /// unit trace and positivity before accepting the matrix.
    pub fn new(mat: CMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        let n = mat.nrows();
        if mat.ncols() != n {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if dim_a * dim_b != n {
            return Err(Error::DimensionMismatch(format!(
                "dimA x dimB = {}x{} does not match matrix size {}",
                dim_a, dim_b, n
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        let dev = hermitian_deviation(&mat);
        if dev > tol::TAU_HERM {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: tol::TAU_HERM,
            });
        }
        let mat = symmetrize(&mat);
        let tr = mat.trace().re;
        let tr_dev = (tr - 1.0).abs();
        if tr_dev > tol::TAU_TRACE {
            return Err(Error::InvalidState(format!(
                "trace deviation {:.3e} > {:.3e}",
                tr_dev,
                tol::TAU_TRACE
            )));
        }
        let min_eig = min_eigenvalue(&mat)?;
        if min_eig < -tol::TAU_POS {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {:.3e} < -{:.3e}",
                min_eig,
                tol::TAU_POS
            )));
        }
        Ok(DensityMatrix { mat, dim_a, dim_b })
    }

    /// Projector |ψ⟩⟨ψ| onto a (normalized) pure state.
    pub fn from_pure(psi: &CVector, dim_a: usize, dim_b: usize) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > tol::TAU_NORM {
            return Err(Error::InvalidState(format!(
                "pure state norm deviation {:.3e} > {:.3e}",
                (norm - 1.0).abs(),
                tol::TAU_NORM
            )));
        }
        let mat = psi * psi.adjoint();
        Self::new(mat, dim_a, dim_b)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Reduced state ρ_A = Tr_B ρ.
    pub fn reduce_to_a(&self) -> DensityMatrix {
        partial_trace(self, Subsystem::B)
    }

    /// Reduced state ρ_B = Tr_A ρ.
    pub fn reduce_to_b(&self) -> DensityMatrix {
        partial_trace(self, Subsystem::A)
    }

    /// Purity Tr ρ².
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Kronecker product a ⊗ b with the (i,μ) row-major composite index,
/// first factor major.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// max |M - M†| over all entries.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// (M + M†)/2.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry magnitude, used as the scale reference for relative
/// tolerances.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let dev = hermitian_deviation(m);
    if dev > tol::TAU_HERM {
        return Err(Error::NotHermitian {
            deviation: dev,
            tolerance: tol::TAU_HERM,
        });
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eig(m: &CMatrix) -> Result<Spectrum> {
    check_hermitian(m)?;
    let sym = symmetrize(m);
    let n = sym.nrows();
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only (descending), avoiding the eigenvector accumulation.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let sym = symmetrize(m);
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok(vals)
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    let vals = hermitian_eigenvalues(m)?;
    vals.last()
        .copied()
        .ok_or_else(|| Error::Numerical("empty matrix".into()))
}

/// True iff the minimum eigenvalue is ≥ -tol.
pub fn is_positive(m: &CMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(m)? >= -tol)
}

/// Tr_B ρ or Tr_A ρ; `which` names the subsystem traced *out*.
pub fn partial_trace(rho: &DensityMatrix, which: Subsystem) -> DensityMatrix {
    let (da, db) = (rho.dim_a, rho.dim_b);
    let m = &rho.mat;
    match which {
        Subsystem::B => {
            let mut out = CMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    let mut s = C64::new(0.0, 0.0);
                    for mu in 0..db {
                        s += m[(i * db + mu, j * db + mu)];
                    }
                    out[(i, j)] = s;
                }
            }
            DensityMatrix {
                mat: symmetrize(&out),
                dim_a: da,
                dim_b: 1,
            }
        }
        Subsystem::A => {
            let mut out = CMatrix::zeros(db, db);
            for mu in 0..db {
                for nu in 0..db {
                    let mut s = C64::new(0.0, 0.0);
                    for i in 0..da {
                        s += m[(i * db + mu, i * db + nu)];
                    }
                    out[(mu, nu)] = s;
                }
            }
            DensityMatrix {
                mat: symmetrize(&out),
                dim_a: db,
                dim_b: 1,
            }
        }
    }
}

/// Partial transposition of a raw operator over one subsystem.
///
/// ρ^{T_B}_{mμ,nν} = ρ_{mν,nμ}: transposition of every B block of the
/// A-major block layout. Hermiticity and trace are preserved; positivity
/// generally is not.
pub fn partial_transpose_raw(m: &CMatrix, dim_a: usize, dim_b: usize, which: Subsystem) -> CMatrix {
    assert_eq!(m.nrows(), dim_a * dim_b, "operator size mismatch");
    assert_eq!(m.ncols(), dim_a * dim_b, "operator size mismatch");
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..dim_a {
        for j in 0..dim_a {
            for mu in 0..dim_b {
                for nu in 0..dim_b {
                    let (r, c) = (i * dim_b + mu, j * dim_b + nu);
                    let (sr, sc) = match which {
                        Subsystem::B => (i * dim_b + nu, j * dim_b + mu),
                        Subsystem::A => (j * dim_b + mu, i * dim_b + nu),
                    };
                    out[(r, c)] = m[(sr, sc)];
                }
            }
        }
    }
    out
}

/// Partial transposition of a state; the result is Hermitian and trace one
/// but possibly non-positive.
pub fn partial_transpose(rho: &DensityMatrix, which: Subsystem) -> CMatrix {
    partial_transpose_raw(&rho.mat, rho.dim_a, rho.dim_b, which)
}

/// Minimum eigenvalue of ρ^{T_B}, the quantity behind the PPT criterion.
pub fn min_pt_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    min_eigenvalue(&partial_transpose(rho, Subsystem::B))
}

/// Overlap ⟨ψ|ρ|ψ⟩ with a pure state, clamped to [0,1] for reporting.
pub fn fidelity_with(rho: &DensityMatrix, psi: &CVector) -> Result<f64> {
    if psi.len() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs vector length {}",
            rho.dim(),
            psi.len()
        )));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > tol::TAU_NORM {
        return Err(Error::InvalidState(format!(
            "vector norm deviation {:.3e} > {:.3e}",
            (norm - 1.0).abs(),
            tol::TAU_NORM
        )));
    }
    let val = (psi.adjoint() * &rho.mat * psi)[(0, 0)].re;
    Ok(val.clamp(0.0, 1.0))
}

/// Raw expectation ⟨ψ|M|ψ⟩ without normalization or clamping.
pub fn expectation(m: &CMatrix, psi: &CVector) -> C64 {
    (psi.adjoint() * m * psi)[(0, 0)]
}
