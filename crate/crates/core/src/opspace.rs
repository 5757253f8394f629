//! Concrete finite-dimensional operator spaces.
//!
//! A space `V` is the span of linearly independent matrices `B_1..B_d` in
//! `M_N`. An element of `M_m(V)` is stored through its coefficient matrices
//! `C_1..C_d` (each `m×m`), and is realized as `Σ_k C_k ⊗ B_k ∈ M_{mN}`. The
//! operator norm of that realization defines every matrix-level norm, so
//! Ruan's axioms hold by construction.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::matcore::{complex_gaussian, ComplexMatrix, RngSeed};
use crate::optim::{ascend, AscentConfig, Budget};
use crate::scalar::{is_finite, Real};

/// Singular-value threshold for the linear-independence check on a basis.
pub const INDEPENDENCE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Scalar,
    Matrix(usize),
    Row(usize),
    Column(usize),
    MinLinf(usize),
    Custom,
}

#[derive(Clone, Debug)]
pub struct ConcreteOperatorSpace<T> {
    kind: SpaceKind,
    ambient: usize,
    basis: Vec<ComplexMatrix<T>>,
    gram_inverse: ComplexMatrix<T>,
}

pub type SpaceRef<T> = Arc<ConcreteOperatorSpace<T>>;

impl<T: Real> PartialEq for ConcreteOperatorSpace<T> {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.ambient == other.ambient && self.basis == other.basis
    }
}

fn matrix_unit<T: Real>(n: usize, i: usize, j: usize) -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = Complex::new(T::one(), T::zero());
    m
}

/// `C` as a one-dimensional space spanned by `[1]` in `M_1`.
pub fn space_scalar<T: Real>() -> SpaceRef<T> {
    ConcreteOperatorSpace::from_trusted(SpaceKind::Scalar, 1, vec![ComplexMatrix::identity(1)])
}

/// The full matrix algebra `M_k`, basis `E_ij` in row-major order.
pub fn space_matrix<T: Real>(k: usize) -> SpaceRef<T> {
    assert!(k >= 1, "M_k needs k >= 1");
    let basis = (0..k * k).map(|t| matrix_unit(k, t / k, t % k)).collect();
    ConcreteOperatorSpace::from_trusted(SpaceKind::Matrix(k), k, basis)
}

/// Row Hilbert space `R_n`: span of `E_1j` in `M_n`.
pub fn space_row<T: Real>(n: usize) -> SpaceRef<T> {
    assert!(n >= 1, "R_n needs n >= 1");
    let basis = (0..n).map(|j| matrix_unit(n, 0, j)).collect();
    ConcreteOperatorSpace::from_trusted(SpaceKind::Row(n), n, basis)
}

/// Column Hilbert space `C_n`: span of `E_i1` in `M_n`.
pub fn space_column<T: Real>(n: usize) -> SpaceRef<T> {
    assert!(n >= 1, "C_n needs n >= 1");
    let basis = (0..n).map(|i| matrix_unit(n, i, 0)).collect();
    ConcreteOperatorSpace::from_trusted(SpaceKind::Column(n), n, basis)
}

/// `MIN(ℓ∞^d)`: diagonal matrices in `M_d`.
pub fn space_min_linf<T: Real>(d: usize) -> SpaceRef<T> {
    assert!(d >= 1, "MIN(l_inf^d) needs d >= 1");
    let basis = (0..d).map(|i| matrix_unit(d, i, i)).collect();
    ConcreteOperatorSpace::from_trusted(SpaceKind::MinLinf(d), d, basis)
}

impl<T: Real> ConcreteOperatorSpace<T> {
    fn from_trusted(kind: SpaceKind, ambient: usize, basis: Vec<ComplexMatrix<T>>) -> SpaceRef<T> {
        let gram = gram_matrix(&basis);
        let gram_inverse = gram.psd_function(|s| T::one() / s);
        Arc::new(Self { kind, ambient, basis, gram_inverse })
    }

    /// Space spanned by user-supplied `N×N` matrices; rejects dependent bases.
    pub fn custom(ambient: usize, basis: Vec<ComplexMatrix<T>>) -> Result<SpaceRef<T>> {
        if basis.is_empty() {
            return invalid("basis must contain at least one matrix");
        }
        if ambient == 0 {
            return invalid("ambient dimension must be positive");
        }
        for (k, b) in basis.iter().enumerate() {
            if b.shape() != (ambient, ambient) {
                return invalid(format!("basis[{k}] is {}x{}, expected {ambient}x{ambient}", b.rows(), b.cols()));
            }
            if !b.is_finite() {
                return invalid(format!("basis[{k}] has non-finite entries"));
            }
        }
        let coords = ComplexMatrix::from_fn(basis.len(), ambient * ambient, |k, e| basis[k].as_slice()[e]);
        let sv = coords.singular_values();
        let largest = sv.first().copied().unwrap_or_else(T::zero);
        let smallest = if basis.len() > ambient * ambient { T::zero() } else { sv[basis.len() - 1] };
        if smallest <= T::lit(INDEPENDENCE_TOL) * largest.max(T::one()) {
            return invalid(format!(
                "basis is not linearly independent (smallest singular value {smallest})"
            ));
        }
        Ok(Self::from_trusted(SpaceKind::Custom, ambient, basis))
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[ComplexMatrix<T>] {
        &self.basis
    }

    /// True when the space is `C` realized isometrically in `M_1`.
    pub fn is_scalar_like(&self) -> bool {
        self.ambient == 1 && self.basis.len() == 1 && (self.basis[0][(0, 0)].norm() - T::one()).abs() <= T::lit(1e-12)
    }

    /// `Σ_k x_k B_k`.
    pub fn realize_element(&self, x: &[Complex<T>]) -> ComplexMatrix<T> {
        assert_eq!(x.len(), self.dim());
        let mut out = ComplexMatrix::zeros(self.ambient, self.ambient);
        for (xk, b) in x.iter().zip(&self.basis) {
            if !xk.is_zero() {
                out.add_assign(&b.scale(*xk));
            }
        }
        out
    }

    /// Coordinates of the Frobenius-orthogonal projection of `y ∈ M_N` onto V.
    pub fn coordinates_of(&self, y: &ComplexMatrix<T>) -> Vec<Complex<T>> {
        let rhs: Vec<Complex<T>> = self.basis.iter().map(|b| b.frobenius_inner(y)).collect();
        self.gram_inverse.matvec(&rhs)
    }

    /// Matrix `W ∈ V` with `tr(W* realize(x)) = Σ φ_k x_k` for every `x`.
    pub fn riesz_representer(&self, phi: &[Complex<T>]) -> ComplexMatrix<T> {
        let conj: Vec<Complex<T>> = phi.iter().map(|z| z.conj()).collect();
        let w = self.gram_inverse.matvec(&conj);
        self.realize_element(&w)
    }
}

fn gram_matrix<T: Real>(basis: &[ComplexMatrix<T>]) -> ComplexMatrix<T> {
    let d = basis.len();
    ComplexMatrix::from_fn(d, d, |i, j| basis[i].frobenius_inner(&basis[j]))
}

pub fn same_space<T: Real>(a: &SpaceRef<T>, b: &SpaceRef<T>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// An element `x = Σ x_k B_k` of V, stored by its coordinates.
#[derive(Clone, Debug)]
pub struct OpSpaceElement<T: Real> {
    space: SpaceRef<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> OpSpaceElement<T> {
    pub fn new(space: SpaceRef<T>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return invalid(format!("expected {} coefficients, got {}", space.dim(), coeffs.len()));
        }
        if !coeffs.iter().all(is_finite) {
            return invalid("non-finite coefficient");
        }
        Ok(Self { space, coeffs })
    }

    pub fn space(&self) -> &SpaceRef<T> {
        &self.space
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn norm(&self) -> T {
        self.space.realize_element(&self.coeffs).operator_norm_unchecked()
    }

    pub fn to_matrix(&self) -> OpSpaceMatrix<T> {
        let coeffs = self.coeffs.iter().map(|&z| ComplexMatrix::scalar(z)).collect();
        OpSpaceMatrix { space: self.space.clone(), level: 1, coeffs }
    }
}

/// An element `(x_ij)` of `M_m(V)`.
#[derive(Clone, Debug)]
pub struct OpSpaceMatrix<T: Real> {
    space: SpaceRef<T>,
    level: usize,
    coeffs: Vec<ComplexMatrix<T>>,
}

impl<T: Real> PartialEq for OpSpaceMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level && same_space(&self.space, &other.space) && self.coeffs == other.coeffs
    }
}

impl<T: Real> OpSpaceMatrix<T> {
    /// From the coefficient matrices `C_1..C_d`, all `m×m`.
    pub fn new(space: SpaceRef<T>, coeffs: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return invalid(format!("expected {} coefficient matrices, got {}", space.dim(), coeffs.len()));
        }
        let (m, n) = coeffs[0].shape();
        if m != n {
            return invalid(format!("coefficient matrices must be square, got {m}x{n}"));
        }
        for (k, c) in coeffs.iter().enumerate() {
            if c.shape() != (m, m) {
                return invalid(format!("coefficient matrix {k} has shape {:?}, expected {m}x{m}", c.shape()));
            }
            if !c.is_finite() {
                return invalid(format!("coefficient matrix {k} has non-finite entries"));
            }
        }
        Ok(Self { space, level: m, coeffs })
    }

    /// From entries: `entries[i][j]` is the coordinate vector of `x_ij`.
    pub fn from_entries(space: SpaceRef<T>, entries: &[Vec<Vec<Complex<T>>>]) -> Result<Self> {
        let m = entries.len();
        if m == 0 {
            return invalid("matrix level must be positive");
        }
        let d = space.dim();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != m {
                return invalid(format!("row {i} has {} entries, expected {m}", row.len()));
            }
            for (j, e) in row.iter().enumerate() {
                if e.len() != d {
                    return invalid(format!("entry ({i},{j}) has {} coordinates, expected {d}", e.len()));
                }
            }
        }
        let coeffs = (0..d).map(|k| ComplexMatrix::from_fn(m, m, |i, j| entries[i][j][k])).collect();
        Self::new(space, coeffs)
    }

    pub fn zeros(space: SpaceRef<T>, level: usize) -> Self {
        let coeffs = (0..space.dim()).map(|_| ComplexMatrix::zeros(level, level)).collect();
        Self { space, level, coeffs }
    }

    /// A scalar matrix viewed as an element of `M_m(C)`.
    pub fn from_scalar_matrix(x: ComplexMatrix<T>) -> Result<Self> {
        Self::new(space_scalar(), vec![x])
    }

    pub fn space(&self) -> &SpaceRef<T> {
        &self.space
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[ComplexMatrix<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &ComplexMatrix<T> {
        &self.coeffs[k]
    }

    /// Coordinate vector of the entry `x_ij`.
    pub fn entry(&self, i: usize, j: usize) -> Vec<Complex<T>> {
        self.coeffs.iter().map(|c| c[(i, j)]).collect()
    }

    pub fn entries(&self) -> Vec<Vec<Vec<Complex<T>>>> {
        (0..self.level).map(|i| (0..self.level).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// The `mN×mN` block matrix whose `(i,j)` block is `Σ_k x_ij^k B_k`.
    pub fn realize(&self) -> ComplexMatrix<T> {
        let n = self.space.ambient();
        let mut out = ComplexMatrix::zeros(self.level * n, self.level * n);
        for (c, b) in self.coeffs.iter().zip(self.space.basis()) {
            for i in 0..self.level {
                for j in 0..self.level {
                    let z = c[(i, j)];
                    if z.is_zero() {
                        continue;
                    }
                    for a in 0..n {
                        for bb in 0..n {
                            out[(i * n + a, j * n + bb)] += z * b[(a, bb)];
                        }
                    }
                }
            }
        }
        out
    }

    /// `‖(x_ij)‖_{M_m(V)}`.
    pub fn matrix_norm(&self) -> T {
        self.realize().operator_norm_unchecked()
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if !same_space(&self.space, &other.space) {
            return invalid("direct sum of matrices over different spaces");
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.direct_sum(b)).collect();
        Ok(Self { space: self.space.clone(), level: self.level + other.level, coeffs })
    }

    /// `x ⊕ 0` with one extra zero row and column.
    pub fn lift(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.direct_sum(&ComplexMatrix::zeros(1, 1))).collect();
        Self { space: self.space.clone(), level: self.level + 1, coeffs }
    }

    /// `α x β` for scalar matrices `α` (`n×m`) and `β` (`m×n`).
    pub fn compress(&self, alpha: &ComplexMatrix<T>, beta: &ComplexMatrix<T>) -> Result<Self> {
        if alpha.cols() != self.level || beta.rows() != self.level || alpha.rows() != beta.cols() {
            return invalid(format!(
                "cannot form alpha*x*beta with alpha {:?}, x level {}, beta {:?}",
                alpha.shape(),
                self.level,
                beta.shape()
            ));
        }
        let coeffs = self.coeffs.iter().map(|c| alpha.matmul(c).matmul(beta)).collect();
        Ok(Self { space: self.space.clone(), level: alpha.rows(), coeffs })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !same_space(&self.space, &other.space) || self.level != other.level {
            return invalid("sum of matrices over different spaces or levels");
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect();
        Ok(Self { space: self.space.clone(), level: self.level, coeffs })
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { space: self.space.clone(), level: self.level, coeffs: self.coeffs.iter().map(|m| m.scale(c)).collect() }
    }

    pub fn scale_real(&self, t: T) -> Self {
        self.scale(Complex::new(t, T::zero()))
    }

    /// Maps `x` into the closed ball of radius `r`: singular values of the
    /// realization are clipped, the result is projected back onto `M_m(V)`,
    /// and a final radial rescale absorbs any overshoot.
    pub fn project_ball(&self, r: T) -> Self {
        let norm = self.matrix_norm();
        if norm <= r {
            return self.clone();
        }
        let projected = if self.space.is_scalar_like() {
            let b = self.space.basis()[0][(0, 0)];
            let y = self.coeffs[0].scale(b).project_ball(r).scale(b.conj());
            Self { space: self.space.clone(), level: self.level, coeffs: vec![y] }
        } else {
            let y = self.realize().project_ball(r);
            self.read_back(&y)
        };
        let pn = projected.matrix_norm();
        if pn > r {
            projected.scale_real(r / pn)
        } else {
            projected
        }
    }

    fn read_back(&self, y: &ComplexMatrix<T>) -> Self {
        let n = self.space.ambient();
        let m = self.level;
        let d = self.space.dim();
        let mut coeffs = vec![ComplexMatrix::zeros(m, m); d];
        for i in 0..m {
            for j in 0..m {
                let coords = self.space.coordinates_of(&y.block(i * n, j * n, n, n));
                for (k, z) in coords.into_iter().enumerate() {
                    coeffs[k][(i, j)] = z;
                }
            }
        }
        Self { space: self.space.clone(), level: m, coeffs }
    }

    /// Real parametrization: re/im parts of every coefficient entry.
    pub(crate) fn to_params(&self) -> Vec<T> {
        let mut p = Vec::with_capacity(2 * self.level * self.level * self.dim());
        for c in &self.coeffs {
            for z in c.as_slice() {
                p.push(z.re);
                p.push(z.im);
            }
        }
        p
    }

    pub(crate) fn from_params(space: &SpaceRef<T>, level: usize, p: &[T]) -> Self {
        let per = level * level;
        let coeffs = (0..space.dim())
            .map(|k| {
                let mut c = ComplexMatrix::zeros(level, level);
                for (e, z) in c.as_mut_slice().iter_mut().enumerate() {
                    let base = 2 * (k * per + e);
                    *z = Complex::new(p[base], p[base + 1]);
                }
                c
            })
            .collect();
        Self { space: space.clone(), level, coeffs }
    }

    /// Lexicographic order on the serialized coefficients.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.level.cmp(&other.level).then_with(|| {
            for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
                let o = a.lex_cmp(b);
                if o != std::cmp::Ordering::Equal {
                    return o;
                }
            }
            std::cmp::Ordering::Equal
        })
    }
}

/// Random element of `M_m(V)` of norm exactly `radius`.
pub fn sample_space_ball<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    space: &SpaceRef<T>,
    level: usize,
    radius: T,
) -> Result<OpSpaceMatrix<T>> {
    if !(radius > T::zero() && radius < T::one()) {
        return invalid(format!("sample radius must lie in (0,1), got {radius}"));
    }
    loop {
        let coeffs = (0..space.dim())
            .map(|_| ComplexMatrix::from_fn(level, level, |_, _| complex_gaussian(rng)))
            .collect();
        let x = OpSpaceMatrix { space: space.clone(), level, coeffs };
        let n = x.matrix_norm();
        if n > T::zero() {
            return Ok(x.scale_real(radius / n));
        }
    }
}

/// `p×p` matrix `(f_kl)` of linear functionals on V, i.e. an element of
/// `M_p(V')`, stored as `d` coefficient matrices: `f_kl(x) = Σ_t F_t[k,l] x_t`.
#[derive(Clone, Debug)]
pub struct FunctionalGrid<T: Real> {
    space: SpaceRef<T>,
    size: usize,
    coeffs: Vec<ComplexMatrix<T>>,
}

impl<T: Real> FunctionalGrid<T> {
    pub fn new(space: SpaceRef<T>, coeffs: Vec<ComplexMatrix<T>>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return invalid(format!("expected {} coefficient matrices, got {}", space.dim(), coeffs.len()));
        }
        let size = coeffs[0].rows();
        if coeffs.iter().any(|c| c.shape() != (size, size) || !c.is_finite()) {
            return invalid("functional grid coefficients must be finite and square of equal size");
        }
        Ok(Self { space, size, coeffs })
    }

    /// Single scalar functional `x ↦ Σ φ_k x_k`.
    pub fn scalar(space: SpaceRef<T>, phi: &[Complex<T>]) -> Result<Self> {
        Self::new(space, phi.iter().map(|&z| ComplexMatrix::scalar(z)).collect())
    }

    /// The map `x ↦ A* realize(x) B` for `A, B ∈ M_{N,p}`; its cb-norm is at
    /// most `‖A‖‖B‖` since the realization is a complete isometry.
    pub fn compression(space: SpaceRef<T>, a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<Self> {
        let n = space.ambient();
        if a.rows() != n || b.rows() != n || a.cols() != b.cols() {
            return invalid("compression factors must be N×p with matching p");
        }
        let ah = a.adjoint();
        let coeffs = space.basis().iter().map(|bk| ah.matmul(bk).matmul(b)).collect();
        Ok(Self { space, size: a.cols(), coeffs })
    }

    pub fn space(&self) -> &SpaceRef<T> {
        &self.space
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coeffs(&self) -> &[ComplexMatrix<T>] {
        &self.coeffs
    }

    /// `(f_kl(x))` for a single element.
    pub fn evaluate(&self, x: &[Complex<T>]) -> ComplexMatrix<T> {
        let mut out = ComplexMatrix::zeros(self.size, self.size);
        for (c, xk) in self.coeffs.iter().zip(x) {
            out.add_assign(&c.scale(*xk));
        }
        out
    }

    /// Amplification `(f(x_ij))_{ij}` with `p×p` blocks: `Σ_t X_t ⊗ F_t`.
    pub fn amplify(&self, x: &OpSpaceMatrix<T>) -> Result<ComplexMatrix<T>> {
        if !same_space(&self.space, x.space()) {
            return invalid("functional grid and matrix live over different spaces");
        }
        let dim = x.level() * self.size;
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (xc, fc) in x.coeffs().iter().zip(&self.coeffs) {
            out.add_assign(&xc.kron(fc));
        }
        Ok(out)
    }

    /// Matrix pairing `(f_ij(x_kl))` with rows `(i,k)` and columns `(j,l)`:
    /// `Σ_t F_t ⊗ X_t`.
    pub fn pair(&self, x: &OpSpaceMatrix<T>) -> Result<ComplexMatrix<T>> {
        if !same_space(&self.space, x.space()) {
            return Err(Error::InvalidInput("functional grid and matrix live over different spaces".into()));
        }
        let dim = x.level() * self.size;
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (xc, fc) in x.coeffs().iter().zip(&self.coeffs) {
            out.add_assign(&fc.kron(xc));
        }
        Ok(out)
    }

    pub fn scale_real(&self, t: T) -> Self {
        Self { space: self.space.clone(), size: self.size, coeffs: self.coeffs.iter().map(|c| c.scale_real(t)).collect() }
    }

    pub(crate) fn to_params(&self) -> Vec<T> {
        self.coeffs.iter().flat_map(|c| c.as_slice().iter().flat_map(|z| [z.re, z.im])).collect()
    }

    pub(crate) fn from_params(space: &SpaceRef<T>, size: usize, p: &[T]) -> Self {
        let per = size * size;
        let coeffs = (0..space.dim())
            .map(|k| {
                let mut c = ComplexMatrix::zeros(size, size);
                for (e, z) in c.as_mut_slice().iter_mut().enumerate() {
                    let base = 2 * (k * per + e);
                    *z = Complex::new(p[base], p[base + 1]);
                }
                c
            })
            .collect();
        Self { space: space.clone(), size, coeffs }
    }
}

/// `realize(x)` for the level-`m` element, i.e. the free function form of
/// [`OpSpaceMatrix::realize`].
pub fn realize<T: Real>(x: &OpSpaceMatrix<T>) -> ComplexMatrix<T> {
    x.realize()
}

pub fn matrix_norm<T: Real>(x: &OpSpaceMatrix<T>) -> T {
    x.matrix_norm()
}

/// Exact dual norm `‖φ‖_{V'}` where a closed form is known.
pub fn dual_norm_closed_form<T: Real>(space: &ConcreteOperatorSpace<T>, phi: &[Complex<T>]) -> Option<T> {
    if phi.len() != space.dim() {
        return None;
    }
    match space.kind() {
        SpaceKind::Scalar => Some(phi[0].norm()),
        SpaceKind::MinLinf(_) => Some(phi.iter().map(|z| z.norm()).sum()),
        SpaceKind::Row(_) | SpaceKind::Column(_) => Some(phi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()),
        SpaceKind::Matrix(k) => {
            let m = ComplexMatrix::from_fn(k, k, |i, j| phi[i * k + j]);
            Some(m.singular_values().into_iter().sum())
        }
        SpaceKind::Custom => None,
    }
}

fn functional_value<T: Real>(phi: &[Complex<T>], x: &[Complex<T>]) -> Complex<T> {
    phi.iter().zip(x).fold(Complex::zero(), |acc, (a, b)| acc + a * b)
}

/// Starting points in coordinate space that tend to norm `φ`.
pub(crate) fn norming_candidates<T: Real>(space: &ConcreteOperatorSpace<T>, phi: &[Complex<T>]) -> Vec<Vec<Complex<T>>> {
    let d = space.dim();
    let mut out = Vec::new();
    out.push(phi.iter().map(|z| z.conj()).collect());
    out.push(
        phi.iter()
            .map(|z| if z.norm() > T::zero() { z.conj() / z.norm() } else { Complex::zero() })
            .collect(),
    );
    let w = space.riesz_representer(phi);
    if w.frobenius_norm() > T::zero() {
        let svd = w.svd().expect("finite representer");
        let ones: Vec<T> = svd.singular_values.iter().map(|&s| if s > T::zero() { T::one() } else { T::zero() }).collect();
        let polar = svd.reconstruct_with(&ones);
        out.push(space.coordinates_of(&polar));
    }
    for k in 0..d {
        let mut e = vec![Complex::zero(); d];
        e[k] = Complex::new(T::one(), T::zero());
        out.push(e);
    }
    out
}

/// Lower bound on `‖φ‖_{V'} = sup{|Σ φ_k x_k| : ‖x‖_V ≤ 1}` from structured
/// starting points, random draws and local ascent. Never exceeds the true
/// dual norm (up to rounding), since every value is attained by a feasible x.
pub fn dual_functional_norm<T: Real>(
    space: &SpaceRef<T>,
    phi: &[Complex<T>],
    budget: usize,
    seed: RngSeed,
) -> Result<T> {
    if phi.len() != space.dim() {
        return invalid(format!("functional has {} coordinates, space has dimension {}", phi.len(), space.dim()));
    }
    if budget == 0 {
        return invalid("budget must be at least 1");
    }
    let d = space.dim();
    let ratio = |x: &[Complex<T>]| -> Option<T> {
        let n = space.realize_element(x).operator_norm_unchecked();
        if n > T::zero() {
            Some(functional_value(phi, x).norm() / n)
        } else {
            None
        }
    };
    let mut budget = Budget::new(budget);
    let mut best = T::zero();
    let mut starts: Vec<(T, Vec<Complex<T>>)> = Vec::new();

    for cand in norming_candidates(space, phi) {
        if !budget.try_spend() {
            return Ok(best);
        }
        if let Some(v) = ratio(&cand) {
            best = best.max(v);
            starts.push((v, cand));
        }
    }
    let mut rng = seed.rng();
    let random_draws = budget.remaining() / 4;
    for _ in 0..random_draws {
        if !budget.try_spend() {
            break;
        }
        let cand: Vec<Complex<T>> = (0..d).map(|_| complex_gaussian(&mut rng)).collect();
        if let Some(v) = ratio(&cand) {
            best = best.max(v);
            starts.push((v, cand));
        }
    }
    starts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let to_params = |x: &[Complex<T>]| -> Vec<T> { x.iter().flat_map(|z| [z.re, z.im]).collect() };
    let from_params = |p: &[T]| -> Vec<Complex<T>> { p.chunks(2).map(|c| Complex::new(c[0], c[1])).collect() };
    let normalize = |p: &mut [T]| {
        let x = from_params(p);
        let n = space.realize_element(&x).operator_norm_unchecked();
        if n > T::zero() {
            p.iter_mut().for_each(|v| *v /= n);
        }
    };
    let cfg = AscentConfig::default();
    for (_, start) in starts.into_iter().take(4) {
        if budget.remaining() == 0 {
            break;
        }
        let mut obj = |p: &[T]| ratio(&from_params(p));
        if let Some((_, v)) = ascend(to_params(&start), &mut obj, &normalize, &mut budget, &cfg) {
            best = best.max(v);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::gaussian_matrix;
    use crate::scalar::c;

    type M = ComplexMatrix<f64>;

    fn random_matrix(space: &SpaceRef<f64>, level: usize, seed: u64) -> OpSpaceMatrix<f64> {
        let mut rng = RngSeed(seed).rng();
        let coeffs = (0..space.dim()).map(|_| gaussian_matrix(&mut rng, level, level)).collect();
        OpSpaceMatrix::new(space.clone(), coeffs).unwrap()
    }

    #[test]
    fn builders_have_expected_shapes() {
        let s = space_scalar::<f64>();
        assert_eq!((s.dim(), s.ambient()), (1, 1));
        assert!(s.is_scalar_like());
        let m = space_matrix::<f64>(3);
        assert_eq!((m.dim(), m.ambient()), (9, 3));
        assert_eq!(space_row::<f64>(4).dim(), 4);
        assert_eq!(space_column::<f64>(4).ambient(), 4);
        assert_eq!(space_min_linf::<f64>(5).dim(), 5);
    }

    #[test]
    fn scalar_space_realizes_plain_matrix() {
        let x = M::from_real(2, 2, &[0.1, 0.2, -0.3, 0.4]);
        let xm = OpSpaceMatrix::from_scalar_matrix(x.clone()).unwrap();
        assert_eq!(xm.realize(), x);
        assert!((xm.matrix_norm() - x.operator_norm().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn level_one_realization_is_linear_combination() {
        let v = space_matrix::<f64>(2);
        let coords = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.5), c(3.0, 0.0)];
        let x = OpSpaceElement::new(v.clone(), coords.clone()).unwrap().to_matrix();
        let expected = M::new(2, 2, coords).unwrap();
        assert_eq!(x.realize(), expected);
    }

    #[test]
    fn level_two_matrix_space_hand_indexed() {
        // x ∈ M_2(M_2): entry x_ij has coordinates (a,b,c,d) meaning [[a,b],[c,d]].
        let v = space_matrix::<f64>(2);
        let x = random_matrix(&v, 2, 21);
        let r = x.realize();
        for i in 0..2 {
            for j in 0..2 {
                let e = x.entry(i, j);
                for a in 0..2 {
                    for b in 0..2 {
                        assert_eq!(r[(2 * i + a, 2 * j + b)], e[2 * a + b]);
                    }
                }
            }
        }
    }

    #[test]
    fn row_and_min_norms() {
        let r = space_row::<f64>(2);
        let x = OpSpaceElement::new(r, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((x.norm() - 2f64.sqrt()).abs() < 1e-14);

        let r = space_row::<f64>(2);
        let x = OpSpaceElement::new(r, vec![c(0.3, 0.4), c(1.2, 0.0)]).unwrap();
        assert!((x.norm() - (0.25f64 + 1.44).sqrt()).abs() < 1e-14);

        let mn = space_min_linf::<f64>(2);
        let x = OpSpaceElement::new(mn, vec![c(0.3, 0.4), c(-0.2, 0.1)]).unwrap();
        assert!((x.norm() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn direct_sum_norm_is_max() {
        let v = space_column::<f64>(3);
        let x = random_matrix(&v, 2, 1);
        let y = random_matrix(&v, 3, 2);
        let s = x.direct_sum(&y).unwrap();
        assert!((s.matrix_norm() - x.matrix_norm().max(y.matrix_norm())).abs() < 1e-12);
        assert!(x.direct_sum(&random_matrix(&space_row(3), 1, 3)).is_err());
    }

    #[test]
    fn matrix_space_norm_matches_reshuffle() {
        // M_m(M_k) ≅ M_{mk}: build the mk×mk matrix directly.
        let k = 3;
        let v = space_matrix::<f64>(k);
        let x = random_matrix(&v, 2, 5);
        let direct = M::from_fn(2 * k, 2 * k, |r, cidx| x.entry(r / k, cidx / k)[(r % k) * k + cidx % k]);
        assert!((x.matrix_norm() - direct.operator_norm().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn dependent_basis_rejected() {
        let b1 = M::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let b2 = b1.scale_real(2.0);
        assert!(ConcreteOperatorSpace::custom(2, vec![b1.clone(), b2]).is_err());
        let b3 = M::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = ConcreteOperatorSpace::custom(2, vec![b1, b3]).unwrap();
        assert_eq!(s.kind(), SpaceKind::Custom);
        assert!(ConcreteOperatorSpace::<f64>::custom(2, vec![]).is_err());
    }

    #[test]
    fn projection_reads_back_coordinates() {
        let b1 = M::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let b2 = M::from_real(2, 2, &[0.0, 0.0, 2.0, 1.0]);
        let s = ConcreteOperatorSpace::custom(2, vec![b1, b2]).unwrap();
        let coords = vec![c(0.7, -0.1), c(-1.3, 0.4)];
        let y = s.realize_element(&coords);
        let back = s.coordinates_of(&y);
        for (a, b) in back.iter().zip(&coords) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn project_ball_lands_inside_for_every_kind() {
        let spaces: Vec<SpaceRef<f64>> =
            vec![space_scalar(), space_matrix(2), space_row(3), space_column(2), space_min_linf(3)];
        for (s_idx, s) in spaces.iter().enumerate() {
            for level in 1..4 {
                let x = random_matrix(s, level, 100 + s_idx as u64 * 10 + level as u64).scale_real(3.0);
                let p = x.project_ball(0.9);
                assert!(p.matrix_norm() <= 0.9 + 1e-12);
                let inside = x.scale_real(0.5 / x.matrix_norm());
                assert_eq!(inside.project_ball(0.9), inside);
            }
        }
    }

    #[test]
    fn closed_form_dual_norms() {
        let phi = vec![c(0.3, 0.4), c(1.0, 0.0)];
        assert!((dual_norm_closed_form(&space_min_linf::<f64>(2), &phi).unwrap() - 1.5).abs() < 1e-15);
        assert!((dual_norm_closed_form(&space_row::<f64>(2), &phi).unwrap() - 1.25f64.sqrt()).abs() < 1e-15);
        let id = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!((dual_norm_closed_form(&space_matrix::<f64>(2), &id).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dual_functional_norm_examples() {
        let s = space_scalar::<f64>();
        let v = dual_functional_norm(&s, &[c(0.6, -0.8)], 100, RngSeed(1)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let mn = space_min_linf::<f64>(2);
        let v = dual_functional_norm(&mn, &[c(1.0, 0.0), c(1.0, 0.0)], 2000, RngSeed(2)).unwrap();
        assert!((v - 2.0).abs() < 1e-3, "{v}");
        assert!(v <= 2.0 + 1e-12);
    }

    #[test]
    fn dual_norm_estimate_never_exceeds_closed_form() {
        let spaces: Vec<SpaceRef<f64>> = vec![space_matrix(2), space_row(3), space_column(3), space_min_linf(3)];
        let mut rng = RngSeed(77).rng();
        for s in &spaces {
            for trial in 0..3 {
                let phi: Vec<Complex<f64>> = (0..s.dim()).map(|_| complex_gaussian(&mut rng)).collect();
                let est = dual_functional_norm(s, &phi, 3000, RngSeed(trial)).unwrap();
                let exact = dual_norm_closed_form(s, &phi).unwrap();
                assert!(est <= exact * (1.0 + 1e-12));
                assert!(est >= exact * (1.0 - 1e-3), "{est} vs {exact}");
            }
        }
    }

    #[test]
    fn compression_grid_cb_bound_and_pairing_orders() {
        let v = space_matrix::<f64>(2);
        let mut rng = RngSeed(5).rng();
        let a: M = gaussian_matrix(&mut rng, 2, 2);
        let b: M = gaussian_matrix(&mut rng, 2, 2);
        let f = FunctionalGrid::compression(v.clone(), &a, &b).unwrap();
        let x = random_matrix(&v, 3, 6);
        let amp = f.amplify(&x).unwrap();
        // block (i,j) of the amplification equals A* x_ij B
        for i in 0..3 {
            for j in 0..3 {
                let xij = v.realize_element(&x.entry(i, j));
                let blk = a.adjoint().matmul(&xij).matmul(&b);
                assert!(amp.block(2 * i, 2 * j, 2, 2).max_abs_diff(&blk) < 1e-12);
            }
        }
        let bound = a.operator_norm().unwrap() * b.operator_norm().unwrap();
        assert!(amp.operator_norm().unwrap() <= bound * x.matrix_norm() + 1e-10);
        // the two orderings are permutation-equivalent
        let paired = f.pair(&x).unwrap();
        assert!((paired.operator_norm().unwrap() - amp.operator_norm().unwrap()).abs() < 1e-10);
    }
}
