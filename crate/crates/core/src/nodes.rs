//! Finite-dimensional unitary nodes, the Arov–Grossman extension of an
//! isometry, and the Redheffer and Potapov–Ginzburg transforms.
//!
//! Subspaces are given by orthonormal basis columns. Coordinates on
//! `H ⊕ E` put the state space first.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jalg::C64;

pub type CMatrix = DMatrix<C64>;

/// Tolerance on `U*U = I` and on isometry checks.
pub const UNITARY_TOL: f64 = 1e-12;
/// Largest accepted condition number of `I − sℰ` and of `s₁`.
pub const MAX_CONDITION: f64 = 1e12;

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

fn condition_number(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let lo = sv.min();
    if lo == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / lo
    }
}

/// `‖M*M − I‖`.
pub fn isometry_defect(m: &CMatrix) -> f64 {
    spectral_norm(&(m.adjoint() * m - CMatrix::identity(m.ncols(), m.ncols())))
}

fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    if a.is_empty() {
        return Some(CMatrix::zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

/// A unitary `U : H ⊕ E₁ → H ⊕ E₂` with `dim E₁ = dim E₂ = n_e`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryNode {
    pub u: CMatrix,
    pub n_h: usize,
    pub n_e: usize,
}

impl UnitaryNode {
    pub fn new(u: CMatrix, n_h: usize) -> Result<Self> {
        if !u.is_square() || u.nrows() <= n_h {
            return Err(Error::InvalidArgument(format!("{}×{} matrix cannot carry a {n_h}-dimensional state and nonzero coefficients", u.nrows(), u.ncols())));
        }
        if u.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let defect = isometry_defect(&u);
        if defect > UNITARY_TOL {
            return Err(Error::InvalidArgument(format!("node is not unitary: ‖U*U − I‖ = {defect:e}")));
        }
        let n_e = u.nrows() - n_h;
        Ok(Self { u, n_h, n_e })
    }

    pub fn dim(&self) -> usize {
        self.n_h + self.n_e
    }

    /// `U` with the state rows and columns removed.
    pub fn feedthrough(&self) -> CMatrix {
        self.u.view((self.n_h, self.n_h), (self.n_e, self.n_e)).into_owned()
    }
}

fn check_disk(zeta: C64) -> Result<()> {
    if !(zeta.norm() < 1.0) {
        return Err(Error::InvalidArgument(format!("ζ = {zeta} is outside the open unit disk")));
    }
    Ok(())
}

/// `w(ζ) = P_{E₂}(I − ζUP_H)⁻¹U|_{E₁}`.
pub fn char_function(n: &UnitaryNode, zeta: C64) -> Result<CMatrix> {
    check_disk(zeta)?;
    let dim = n.dim();
    let mut m = CMatrix::identity(dim, dim);
    for j in 0..n.n_h {
        for i in 0..dim {
            m[(i, j)] -= zeta * n.u[(i, j)];
        }
    }
    let rhs = n.u.columns(n.n_h, n.n_e).into_owned();
    let x = solve(&m, &rhs).ok_or(Error::SingularResolvent)?;
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::SingularResolvent);
    }
    Ok(x.rows(n.n_h, n.n_e).into_owned())
}

/// An isometry `V : d_V → Δ_V` with `d_V ⊂ K ⊕ E₁`, `Δ_V ⊂ K ⊕ E₂`.
///
/// `domain` holds an orthonormal basis of `d_V` as columns; `v` is a
/// `(n_k + n_e2) × (n_k + n_e1)` matrix whose action off `d_V` is ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct IsometrySpec {
    pub v: CMatrix,
    pub domain: CMatrix,
    pub n_k: usize,
    pub n_e1: usize,
    pub n_e2: usize,
    /// `dim N₁ = dim(K ⊕ E₁) − dim d_V`.
    pub n1: usize,
    /// `dim N₂ = dim(K ⊕ E₂) − dim Δ_V`.
    pub n2: usize,
}

impl IsometrySpec {
    /// Builds the isometry with defect dimensions inferred from `domain`.
    pub fn new(v: CMatrix, domain: CMatrix, n_k: usize, n_e1: usize, n_e2: usize) -> Result<Self> {
        let d = domain.ncols();
        let (n1, n2) = ((n_k + n_e1).checked_sub(d), (n_k + n_e2).checked_sub(d));
        let (Some(n1), Some(n2)) = (n1, n2) else {
            return Err(Error::DefectMismatch(format!("domain of dimension {d} exceeds the ambient spaces")));
        };
        let s = Self { v, domain, n_k, n_e1, n_e2, n1, n2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (r1, r2) = (self.n_k + self.n_e1, self.n_k + self.n_e2);
        if self.v.shape() != (r2, r1) || self.domain.nrows() != r1 {
            return Err(Error::DefectMismatch(format!(
                "V is {:?} and the domain basis has {} rows for K ⊕ E₁ of dimension {r1}, K ⊕ E₂ of dimension {r2}",
                self.v.shape(),
                self.domain.nrows()
            )));
        }
        let d = self.domain.ncols();
        if r1 != d + self.n1 || r2 != d + self.n2 {
            return Err(Error::DefectMismatch(format!("dim d_V = {d} with n1 = {}, n2 = {} does not fill {r1} and {r2}", self.n1, self.n2)));
        }
        let basis = isometry_defect(&self.domain);
        if basis > UNITARY_TOL {
            return Err(Error::InvalidArgument(format!("domain basis is not orthonormal: defect {basis:e}")));
        }
        let iso = isometry_defect(&self.range_basis());
        if iso > UNITARY_TOL {
            return Err(Error::InvalidArgument(format!("V is not isometric on d_V: defect {iso:e}")));
        }
        Ok(())
    }

    /// `V` applied to the domain basis, an orthonormal basis of `Δ_V`.
    pub fn range_basis(&self) -> CMatrix {
        &self.v * &self.domain
    }

    pub fn dims(&self) -> BlockDims {
        BlockDims { n_e1: self.n_e1, n_e2: self.n_e2, n1: self.n1, n2: self.n2 }
    }
}

/// Coefficient splitting `E₁ ⊕ N₂ → N₁ ⊕ E₂` of an Arov–Grossman node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDims {
    pub n_e1: usize,
    pub n_e2: usize,
    pub n1: usize,
    pub n2: usize,
}

impl BlockDims {
    fn input(&self) -> usize {
        self.n_e1 + self.n2
    }
}

/// Orthonormal completion of the columns of `basis` to a basis of
/// `C^{rows}`, returning only the new columns. Deterministic in `seed`.
pub fn orthonormal_complement(basis: &CMatrix, seed: u64) -> CMatrix {
    let (m, d) = basis.shape();
    if d >= m {
        return CMatrix::zeros(m, 0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<nalgebra::DVector<C64>> = basis.column_iter().map(|c| c.into_owned()).collect();
    let mut out = Vec::with_capacity(m - d);
    while out.len() < m - d {
        let mut v = nalgebra::DVector::from_fn(m, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        // two Gram–Schmidt passes keep the result orthogonal to rounding
        for _ in 0..2 {
            for c in &cols {
                let p = c.dotc(&v);
                v -= c * p;
            }
        }
        let n = v.norm();
        if n < 1e-8 {
            continue;
        }
        v /= C64::new(n, 0.0);
        cols.push(v.clone());
        out.push(v);
    }
    CMatrix::from_columns(&out)
}

/// The Arov–Grossman node `A : K ⊕ E₁ ⊕ N₂ → K ⊕ N₁ ⊕ E₂` with its block
/// splitting.
#[derive(Clone, Debug, PartialEq)]
pub struct AgExtension {
    pub node: UnitaryNode,
    pub dims: BlockDims,
    /// Orthonormal basis of `N_{d_V}` used as coordinates on `N₁`.
    pub n1_basis: CMatrix,
    /// Orthonormal basis of `N_{Δ_V}` used as coordinates on `N₂`.
    pub n2_basis: CMatrix,
}

/// `A|_{d_V} = V`, `A|_{N_{d_V}} = id → N₁`, `A|_{N₂} = id → N_{Δ_V}`.
/// Defect bases come from [`orthonormal_complement`] with `seed`.
pub fn ag_extension(v: &IsometrySpec, seed: u64) -> Result<AgExtension> {
    v.validate()?;
    let (nk, e1, e2, n1, n2) = (v.n_k, v.n_e1, v.n_e2, v.n1, v.n2);
    let p = orthonormal_complement(&v.domain, seed);
    let range = v.range_basis();
    let q = orthonormal_complement(&range, seed.wrapping_add(1));
    if p.ncols() != n1 || q.ncols() != n2 {
        return Err(Error::DefectMismatch(format!("completion produced {} and {} defect vectors, expected {n1} and {n2}", p.ncols(), q.ncols())));
    }
    let dim = nk + e1 + n2;
    debug_assert_eq!(dim, nk + n1 + e2);
    // on K ⊕ E₁ the map is x ↦ (V·P_{d_V} x) ⊕ P_{N_{d_V}}* x
    let to_k_e2 = &range * v.domain.adjoint();
    let to_n1 = p.adjoint();
    let mut a = CMatrix::zeros(dim, dim);
    // output rows: K (0..nk), N₁ (nk..nk+n1), E₂ (nk+n1..)
    // input columns: K ⊕ E₁ (0..nk+e1), N₂ (nk+e1..)
    let out_row = |r: usize| if r < nk { r } else { r + n1 };
    for r in 0..nk + e2 {
        for c in 0..nk + e1 {
            a[(out_row(r), c)] = to_k_e2[(r, c)];
        }
        for c in 0..n2 {
            a[(out_row(r), nk + e1 + c)] = q[(r, c)];
        }
    }
    for r in 0..n1 {
        for c in 0..nk + e1 {
            a[(nk + r, c)] = to_n1[(r, c)];
        }
    }
    let defect = isometry_defect(&a);
    if defect > UNITARY_TOL {
        return Err(Error::DefectMismatch(format!("extension is not unitary: ‖A*A − I‖ = {defect:e}")));
    }
    let node = UnitaryNode { u: a, n_h: nk, n_e: e1 + n2 };
    Ok(AgExtension { node, dims: v.dims(), n1_basis: p, n2_basis: q })
}

impl AgExtension {
    pub fn blocks(&self, zeta: C64) -> Result<AgBlocks> {
        ag_blocks(&self.node, self.dims, zeta)
    }

    /// `‖A|_{d_V} − V|_{d_V}‖` in the `K ⊕ E₁ → K ⊕ E₂` coordinates.
    pub fn restriction_defect(&self, v: &IsometrySpec) -> f64 {
        let (nk, n1) = (v.n_k, v.n1);
        let mut img = CMatrix::zeros(v.n_k + v.n_e2, v.domain.ncols());
        let a = &self.node.u;
        for r in 0..img.nrows() {
            let src = if r < nk { r } else { r + n1 };
            for c in 0..img.ncols() {
                img[(r, c)] = (0..nk + v.n_e1).map(|k| a[(src, k)] * v.domain[(k, c)]).sum();
            }
        }
        // components landing in N₁ must vanish as well
        let leak = &self.n1_basis.adjoint() * &v.domain;
        spectral_norm(&(img - v.range_basis())).max(spectral_norm(&leak))
    }
}

/// `S(ζ) = [[s₁, s], [s₀, s₂]] : E₁ ⊕ N₂ → N₁ ⊕ E₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct AgBlocks {
    pub zeta: C64,
    pub s1: CMatrix,
    pub s: CMatrix,
    pub s0: CMatrix,
    pub s2: CMatrix,
}

impl AgBlocks {
    pub fn full(&self) -> CMatrix {
        let (n1, e1) = self.s1.shape();
        let (e2, n2) = self.s2.shape();
        let mut m = CMatrix::zeros(n1 + e2, e1 + n2);
        m.view_mut((0, 0), (n1, e1)).copy_from(&self.s1);
        m.view_mut((0, e1), (n1, n2)).copy_from(&self.s);
        m.view_mut((n1, 0), (e2, e1)).copy_from(&self.s0);
        m.view_mut((n1, e1), (e2, n2)).copy_from(&self.s2);
        m
    }
}

/// Splits the characteristic function of `a` at `ζ` into Arov–Grossman
/// blocks.
pub fn ag_blocks(a: &UnitaryNode, dims: BlockDims, zeta: C64) -> Result<AgBlocks> {
    if dims.input() != a.n_e || dims.n1 + dims.n_e2 != a.n_e {
        return Err(Error::DefectMismatch(format!("block dimensions {dims:?} do not match a node with {} coefficients", a.n_e)));
    }
    let s_full = char_function(a, zeta)?;
    let (e1, n1) = (dims.n_e1, dims.n1);
    Ok(AgBlocks {
        zeta,
        s1: s_full.view((0, 0), (n1, e1)).into_owned(),
        s: s_full.view((0, e1), (n1, dims.n2)).into_owned(),
        s0: s_full.view((n1, 0), (dims.n_e2, e1)).into_owned(),
        s2: s_full.view((n1, e1), (dims.n_e2, dims.n2)).into_owned(),
    })
}

fn check_param(s: &AgBlocks, e: &CMatrix) -> Result<()> {
    if e.shape() != (s.s.ncols(), s.s.nrows()) {
        return Err(Error::InvalidArgument(format!("parameter must map N₁ → N₂, i.e. be {}×{}", s.s.ncols(), s.s.nrows())));
    }
    Ok(())
}

/// `w = s₀ + s₂ℰ(I − sℰ)⁻¹s₁` for a constant parameter `ℰ : N₁ → N₂`.
pub fn redheffer(s: &AgBlocks, e: &CMatrix) -> Result<CMatrix> {
    check_param(s, e)?;
    let n1 = s.s.nrows();
    let resolvent = CMatrix::identity(n1, n1) - &s.s * e;
    let cond = condition_number(&resolvent);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let x = solve(&resolvent, &s.s1).ok_or(Error::IllConditioned(f64::INFINITY))?;
    Ok(&s.s0 + &s.s2 * e * x)
}

/// `W = [[I, −s₀], [0, −s₁]]⁻¹ [[s₂, 0], [s, −I]]`, in closed form
/// `[[s₂ − s₀s₁⁻¹s, s₀s₁⁻¹], [−s₁⁻¹s, s₁⁻¹]]`.
pub fn potapov_ginzburg(s: &AgBlocks) -> Result<CMatrix> {
    if !s.s1.is_square() || condition_number(&s.s1) > MAX_CONDITION {
        return Err(Error::SingularS1);
    }
    let n1 = s.s1.nrows();
    let s1_inv = s.s1.clone().try_inverse().ok_or(Error::SingularS1)?;
    let (e2, n2) = s.s2.shape();
    let mut w = CMatrix::zeros(e2 + n1, n2 + n1);
    w.view_mut((0, 0), (e2, n2)).copy_from(&(&s.s2 - &s.s0 * &s1_inv * &s.s));
    w.view_mut((0, n2), (e2, n1)).copy_from(&(&s.s0 * &s1_inv));
    w.view_mut((e2, 0), (n1, n2)).copy_from(&(-(&s1_inv * &s.s)));
    w.view_mut((e2, n2), (n1, n1)).copy_from(&s1_inv);
    Ok(w)
}

/// `(W₁₁ℰ + W₁₂)(W₂₁ℰ + W₂₂)⁻¹`.
pub fn pg_apply(w: &CMatrix, e: &CMatrix) -> Result<CMatrix> {
    let (n2, n1) = e.shape();
    if w.shape() != (w.nrows(), n2 + n1) || w.nrows() < n1 {
        return Err(Error::InvalidArgument("parameter does not fit the Potapov–Ginzburg matrix".into()));
    }
    let e2 = w.nrows() - n1;
    let num = w.view((0, 0), (e2, n2)) * e + w.view((0, n2), (e2, n1));
    let den = w.view((e2, 0), (n1, n2)) * e + w.view((e2, n2), (n1, n1));
    let den_inv = den.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    Ok(num * den_inv)
}

/// `‖redheffer(s, ℰ) − (W₁₁ℰ + W₁₂)(W₂₁ℰ + W₂₂)⁻¹‖`.
pub fn pg_consistency(s: &AgBlocks, e: &CMatrix) -> Result<f64> {
    let direct = redheffer(s, e)?;
    let via_pg = pg_apply(&potapov_ginzburg(s)?, e)?;
    Ok(spectral_norm(&(direct - via_pg)))
}

/// Outcome of the test `w₀ ∈ {s₀(0) + s₂(0)ℰs₁(0) : ‖ℰ‖ ≤ 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallMembership {
    /// `‖s₀ + s₂ℰ̂s₁ − w₀‖` for the least-squares parameter `ℰ̂`.
    pub residual: f64,
    pub parameter_norm: f64,
    pub member: bool,
}

/// Matrix-ball membership at `ζ = 0`, where `s(0) = 0` makes the Redheffer
/// image affine in `ℰ`.
pub fn ball_membership(s0: &AgBlocks, w0: &CMatrix, tol: f64) -> Result<BallMembership> {
    if s0.zeta.norm() != 0.0 {
        return Err(Error::InvalidArgument("membership is tested at ζ = 0".into()));
    }
    if w0.shape() != s0.s0.shape() {
        return Err(Error::InvalidArgument("w₀ has the wrong shape".into()));
    }
    let pinv = |m: &CMatrix| -> Result<CMatrix> {
        if m.is_empty() {
            return Ok(CMatrix::zeros(m.ncols(), m.nrows()));
        }
        m.clone().pseudo_inverse(1e-12).map_err(|e| Error::InvalidArgument(e.to_string()))
    };
    let e = pinv(&s0.s2)? * (w0 - &s0.s0) * pinv(&s0.s1)?;
    let residual = spectral_norm(&(&s0.s0 + &s0.s2 * &e * &s0.s1 - w0));
    let parameter_norm = spectral_norm(&e);
    Ok(BallMembership { residual, parameter_norm, member: residual <= tol && parameter_norm <= 1.0 + tol })
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// A random `n × n` unitary from the QR factor of a random matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    random_matrix(n, n, rng).qr().q()
}

/// A random contraction with singular values drawn from `[0, 1)`.
pub fn random_contraction(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    let k = rows.min(cols);
    let u = random_unitary(rows, rng).columns(0, k).into_owned();
    let v = random_unitary(cols, rng).columns(0, k).into_owned();
    let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(k, |_, _| C64::new(rng.gen_range(0.0..1.0), 0.0)));
    u * sigma * v.adjoint()
}

/// A random isometry on a `d`-dimensional subspace of `K ⊕ E₁`.
pub fn random_isometry(n_k: usize, n_e1: usize, n_e2: usize, d: usize, rng: &mut impl Rng) -> Result<IsometrySpec> {
    if d > (n_k + n_e1).min(n_k + n_e2) {
        return Err(Error::DefectMismatch(format!("no {d}-dimensional isometry between spaces of dimension {} and {}", n_k + n_e1, n_k + n_e2)));
    }
    let domain = random_unitary(n_k + n_e1, rng).columns(0, d).into_owned();
    let range = random_unitary(n_k + n_e2, rng).columns(0, d).into_owned();
    IsometrySpec::new(&range * domain.adjoint(), domain, n_k, n_e1, n_e2)
}

/// Completes `V` to a unitary node on `H = K` by a random unitary pairing
/// `N_{d_V} → N_{Δ_V}`. Needs `dim E₁ = dim E₂`. Returns the node and the
/// pairing.
pub fn random_unitary_extension(v: &IsometrySpec, ext: &AgExtension, rng: &mut impl Rng) -> Result<(UnitaryNode, CMatrix)> {
    if v.n_e1 != v.n_e2 {
        return Err(Error::DefectMismatch("a unitary extension on H = K needs dim E₁ = dim E₂".into()));
    }
    let g = random_unitary(v.n1, rng);
    let u = &v.range_basis() * v.domain.adjoint() + &ext.n2_basis * &g * ext.n1_basis.adjoint();
    Ok((UnitaryNode::new(u, v.n_k)?, g))
}

/// Dense matrix in a serializable layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for DenseMatrix {
    fn from(m: &CMatrix) -> Self {
        let part = |f: fn(&C64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        Self { rows: m.nrows(), cols: m.ncols(), re: part(|z| z.re), im: part(|z| z.im) }
    }
}

impl DenseMatrix {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let shape_ok = self.re.len() == self.rows
            && self.im.len() == self.rows
            && self.re.iter().chain(&self.im).all(|r| r.len() == self.cols);
        if !shape_ok {
            return Err(Error::Parse(format!("matrix data does not match {}×{}", self.rows, self.cols)));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }
}

/// JSON description of a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDescription {
    pub n_h: usize,
    pub n_e: usize,
    pub u: DenseMatrix,
}

impl From<&UnitaryNode> for NodeDescription {
    fn from(n: &UnitaryNode) -> Self {
        Self { n_h: n.n_h, n_e: n.n_e, u: (&n.u).into() }
    }
}

impl TryFrom<&NodeDescription> for UnitaryNode {
    type Error = Error;
    fn try_from(d: &NodeDescription) -> Result<Self> {
        let n = UnitaryNode::new(d.u.to_matrix()?, d.n_h)?;
        if n.n_e != d.n_e {
            return Err(Error::Parse(format!("n_e = {} but the matrix leaves {}", d.n_e, n.n_e)));
        }
        Ok(n)
    }
}

/// Evaluation points of the pipeline.
pub fn pipeline_points() -> [C64; 3] {
    [C64::new(0.0, 0.0), C64::new(0.3, 0.0), C64::new(0.0, 0.7)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharSample {
    pub zeta: C64,
    pub value: DenseMatrix,
}

/// Residuals of the full extension → blocks → transform pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub n_k: usize,
    pub n_e: usize,
    pub isometry: NodeDescription,
    pub extension: NodeDescription,
    /// `‖A*A − I‖`.
    pub unitarity_defect: f64,
    /// `‖A|_{d_V} − V‖`.
    pub restriction_defect: f64,
    /// `‖s(0)‖`.
    pub s_at_zero: f64,
    /// `‖W₂₁(0)‖`.
    pub w21_at_zero: f64,
    /// Largest `‖S(ζ)‖` over the sample points.
    pub max_block_norm: f64,
    /// Largest Redheffer output norm over parameters and points.
    pub max_redheffer_norm: f64,
    /// Largest `pg_consistency` residual.
    pub max_pg_residual: f64,
    /// `S(ζ)` at each of [`pipeline_points`].
    pub char_samples: Vec<CharSample>,
    /// Characteristic function of the random unitary extension at `ζ = 0`.
    pub extension_w0: DenseMatrix,
    pub membership: BallMembership,
}

impl PipelineReport {
    /// Worst structural residual; norms count by their excess over 1.
    pub fn worst(&self) -> f64 {
        [
            self.unitarity_defect,
            self.restriction_defect,
            self.s_at_zero,
            self.w21_at_zero,
            self.max_block_norm - 1.0,
            self.max_redheffer_norm - 1.0,
            self.max_pg_residual,
            self.membership.residual,
            self.membership.parameter_norm - 1.0,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Random isometry on `K = C^{n_k}` with `E₁ = E₂ = C^{n_e}` and
/// `dim d_V = n_k`, so that `s₁` is square; its Arov–Grossman extension is
/// checked at [`pipeline_points`] against `n_params` random contractions.
pub fn pipeline(n_k: usize, n_e: usize, n_params: usize, seed: u64) -> Result<PipelineReport> {
    if n_e == 0 {
        return Err(Error::InvalidArgument("coefficient dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_isometry(n_k, n_e, n_e, n_k, &mut rng)?;
    let ext = ag_extension(&v, seed)?;
    let params: Vec<CMatrix> = (0..n_params).map(|_| random_contraction(v.n2, v.n1, &mut rng)).collect();
    let (mut max_block_norm, mut max_redheffer_norm, mut max_pg_residual) = (0.0f64, 0.0f64, 0.0f64);
    let mut at_zero = None;
    let mut char_samples = Vec::new();
    for zeta in pipeline_points() {
        let s = ext.blocks(zeta)?;
        char_samples.push(CharSample { zeta, value: (&s.full()).into() });
        max_block_norm = max_block_norm.max(spectral_norm(&s.full()));
        for e in &params {
            max_redheffer_norm = max_redheffer_norm.max(spectral_norm(&redheffer(&s, e)?));
            max_pg_residual = max_pg_residual.max(pg_consistency(&s, e)?);
        }
        if zeta.norm() == 0.0 {
            at_zero = Some(s);
        }
    }
    let s0 = at_zero.expect("pipeline points include 0");
    let w = potapov_ginzburg(&s0)?;
    let w21 = w.view((s0.s2.nrows(), 0), (s0.s1.nrows(), s0.s.ncols())).into_owned();
    let (u, _) = random_unitary_extension(&v, &ext, &mut rng)?;
    let w0 = char_function(&u, C64::new(0.0, 0.0))?;
    let membership = ball_membership(&s0, &w0, 1e-10)?;
    let isometry = NodeDescription { n_h: n_k, n_e, u: (&v.v).into() };
    Ok(PipelineReport {
        seed,
        n_k,
        n_e,
        isometry,
        extension: (&ext.node).into(),
        unitarity_defect: isometry_defect(&ext.node.u),
        restriction_defect: ext.restriction_defect(&v),
        s_at_zero: spectral_norm(&s0.s),
        w21_at_zero: spectral_norm(&w21),
        max_block_norm,
        max_redheffer_norm,
        max_pg_residual,
        char_samples,
        extension_w0: (&w0).into(),
        membership,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn stateless_node_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = UnitaryNode::new(random_unitary(2, &mut rng), 0).unwrap();
        for z in [c(0.0), C64::new(0.4, -0.5)] {
            assert!(spectral_norm(&(char_function(&n, z).unwrap() - &n.u)) < 1e-15);
        }
    }

    #[test]
    fn rotation_at_zero() {
        let a: f64 = 0.7;
        let u = CMatrix::from_row_slice(2, 2, &[c(a.cos()), c(-a.sin()), c(a.sin()), c(a.cos())]);
        let n = UnitaryNode::new(u, 1).unwrap();
        assert_eq!(char_function(&n, c(0.0)).unwrap()[(0, 0)], c(a.cos()));
        // w(ζ) = cos α + ζ·(−sin α)·sin α / (1 − ζ cos α)
        let z = c(0.5);
        let want = c(a.cos()) - z * a.sin() * a.sin() / (c(1.0) - z * a.cos());
        assert!((char_function(&n, z).unwrap()[(0, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn rejects_boundary_points() {
        let n = UnitaryNode::new(CMatrix::identity(2, 2), 1).unwrap();
        assert!(char_function(&n, c(1.0)).is_err());
    }

    #[test]
    fn unitary_v_extends_to_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random_isometry(1, 1, 1, 2, &mut rng).unwrap();
        assert_eq!((v.n1, v.n2), (0, 0));
        let ext = ag_extension(&v, 0).unwrap();
        assert!(spectral_norm(&(&ext.node.u - &v.v)) < 1e-14);
    }

    #[test]
    fn empty_domain_pairs_defects() {
        // K = C, E₁ = E₂ = C, d_V = {0}
        let v = IsometrySpec::new(CMatrix::zeros(2, 2), CMatrix::zeros(2, 0), 1, 1, 1).unwrap();
        assert_eq!((v.n1, v.n2), (2, 2));
        let ext = ag_extension(&v, 9).unwrap();
        assert!(isometry_defect(&ext.node.u) < 1e-14);
        let s = ext.blocks(c(0.0)).unwrap();
        assert!(spectral_norm(&s.s) < 1e-15);
    }

    #[test]
    fn inconsistent_dimensions() {
        let v = IsometrySpec { v: CMatrix::zeros(2, 2), domain: CMatrix::zeros(2, 0), n_k: 1, n_e1: 1, n_e2: 1, n1: 1, n2: 2 };
        assert!(matches!(ag_extension(&v, 0), Err(Error::DefectMismatch(_))));
        assert!(matches!(IsometrySpec::new(CMatrix::zeros(2, 2), CMatrix::zeros(2, 3), 1, 1, 1), Err(Error::DefectMismatch(_))));
    }

    #[test]
    fn scalar_redheffer_cases() {
        let blocks = AgBlocks { zeta: c(0.0), s1: CMatrix::from_element(1, 1, c(0.5)), s: CMatrix::zeros(1, 1), s0: CMatrix::from_element(1, 1, c(0.2)), s2: CMatrix::from_element(1, 1, c(0.4)) };
        let e = CMatrix::from_element(1, 1, c(-0.3));
        assert!((redheffer(&blocks, &e).unwrap()[(0, 0)] - c(0.2 - 0.4 * 0.3 * 0.5)).norm() < 1e-16);
        assert_eq!(redheffer(&blocks, &CMatrix::zeros(1, 1)).unwrap(), blocks.s0);
    }

    #[test]
    fn pg_hand_example() {
        // s₀ = 0, s₁ = s₂ = 1, s = 0 gives W = [[1, 0], [0, 1]]
        let blocks = AgBlocks { zeta: c(0.0), s1: CMatrix::identity(1, 1), s: CMatrix::zeros(1, 1), s0: CMatrix::zeros(1, 1), s2: CMatrix::identity(1, 1) };
        let w = potapov_ginzburg(&blocks).unwrap();
        assert_eq!(w, CMatrix::identity(2, 2));
        let blocks = AgBlocks { s: CMatrix::from_element(1, 1, c(0.5)), s0: CMatrix::from_element(1, 1, c(0.25)), s1: CMatrix::from_element(1, 1, c(2.0)), ..blocks };
        // [[s₂ − s₀s/s₁, s₀/s₁], [−s/s₁, 1/s₁]]
        let want = CMatrix::from_row_slice(2, 2, &[c(1.0 - 0.25 * 0.5 / 2.0), c(0.125), c(-0.25), c(0.5)]);
        assert!(spectral_norm(&(w_of(&blocks) - want)) < 1e-16);
    }

    fn w_of(b: &AgBlocks) -> CMatrix {
        potapov_ginzburg(b).unwrap()
    }

    #[test]
    fn singular_s1() {
        let blocks = AgBlocks { zeta: c(0.0), s1: CMatrix::zeros(1, 1), s: CMatrix::zeros(1, 1), s0: CMatrix::zeros(1, 1), s2: CMatrix::identity(1, 1) };
        assert!(matches!(potapov_ginzburg(&blocks), Err(Error::SingularS1)));
    }

    #[test]
    fn pipeline_small_dims() {
        for (nk, ne) in [(2, 1), (0, 1), (3, 2)] {
            let r = pipeline(nk, ne, 5, 17).unwrap();
            assert!(r.worst() <= 1e-10, "{nk},{ne}: {r:?}");
            assert!(r.membership.member);
        }
    }

    #[test]
    fn node_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = UnitaryNode::new(random_unitary(3, &mut rng), 1).unwrap();
        let d = NodeDescription::from(&n);
        let back: NodeDescription = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(UnitaryNode::try_from(&back).unwrap(), n);
    }
}
