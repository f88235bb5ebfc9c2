//! Dense complex matrix kernel: storage, products, Kronecker products,
//! partial traces over site-structured spaces, monomial (generalized
//! permutation) operators, and a cyclic-Jacobi Hermitian eigensolver.
//!
//! Dimensions here are desk-scale (the simulator refuses anything past its
//! budget), so everything is straightforward row-major `Vec<Complex64>`
//! arithmetic with no blocking or parallelism.

use num_complex::Complex64;
use stabtel_core::PauliOperator;
use std::f64::consts::PI;

pub type C64 = Complex64;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CMatrix({}x{})", self.rows, self.cols)
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self.set(i, j, x);
        }
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let row_out = &mut out.data[i * other.cols..(i + 1) * other.cols];
                let row_rhs = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in row_out.iter_mut().zip(row_rhs) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(&a, &b)| a * b).sum()
            })
            .collect()
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.at(i, i)).sum()
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.at(i, j);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for p in 0..other.rows {
                    for q in 0..other.cols {
                        out.set(i * other.rows + p, j * other.cols + q, a * other.at(p, q));
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Eigenvalues and eigenvectors of a Hermitian matrix by cyclic Jacobi
    /// rotations. Returns eigenvalues ascending, eigenvectors as the
    /// corresponding columns of the returned matrix.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, CMatrix) {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let n = self.rows;
        let mut a = self.clone();
        let mut v = CMatrix::identity(n);
        let scale = self.max_abs().max(1e-300);
        const MAX_SWEEPS: usize = 100;
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    off += a.at(p, q).norm_sqr();
                }
            }
            if off.sqrt() <= 1e-14 * scale * n as f64 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.at(p, q);
                    let r = apq.norm();
                    if r <= 1e-300 {
                        continue;
                    }
                    let phi = apq.arg();
                    let app = a.at(p, p).re;
                    let aqq = a.at(q, q).re;
                    let tau = (aqq - app) / (2.0 * r);
                    // stable root of t² − 2τt − 1 = 0 (this rotation's
                    // zeroing condition for the stripped real 2×2 block)
                    let t = if tau >= 0.0 {
                        -1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // rotation J: [[c, -s],[s e^{-iφ}, c e^{-iφ}]] on (p, q)
                    let e_m = C64::from_polar(1.0, -phi);
                    let e_p = C64::from_polar(1.0, phi);
                    // A <- J† A J: columns first, then rows
                    for i in 0..n {
                        let aip = a.at(i, p);
                        let aiq = a.at(i, q);
                        a.set(i, p, aip * c + aiq * (s * e_m));
                        a.set(i, q, aip * (-s) + aiq * (c * e_m));
                    }
                    for j in 0..n {
                        let apj = a.at(p, j);
                        let aqj = a.at(q, j);
                        a.set(p, j, apj * c + aqj * (s * e_p));
                        a.set(q, j, apj * (-s) + aqj * (c * e_p));
                    }
                    for i in 0..n {
                        let vip = v.at(i, p);
                        let viq = v.at(i, q);
                        v.set(i, p, vip * c + viq * (s * e_m));
                        v.set(i, q, vip * (-s) + viq * (c * e_m));
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let eigs: Vec<f64> = (0..n).map(|i| a.at(i, i).re).collect();
        order.sort_by(|&i, &j| eigs[i].partial_cmp(&eigs[j]).unwrap());
        let sorted_eigs: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            for i in 0..n {
                vectors.set(i, new, v.at(i, old));
            }
        }
        (sorted_eigs, vectors)
    }

    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        self.hermitian_eigen().0
    }
}

/// Partial trace of a matrix over a site-structured space.
///
/// `dims` are the per-site dimensions (big-endian index order: site 0 is
/// the most significant digit); `keep` lists the sites to keep, ascending.
pub fn partial_trace(mat: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    assert_eq!(mat.rows(), total);
    assert_eq!(mat.cols(), total);
    debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
    let kept_dim: usize = keep.iter().map(|&s| dims[s]).product();
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
    let traced_dim: usize = traced.iter().map(|&s| dims[s]).product();
    // global index of (kept part, traced part)
    let compose = |k: usize, t: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut kk = k;
        for &s in keep.iter().rev() {
            digits[s] = kk % dims[s];
            kk /= dims[s];
        }
        let mut tt = t;
        for &s in traced.iter().rev() {
            digits[s] = tt % dims[s];
            tt /= dims[s];
        }
        let mut idx = 0usize;
        for (s, &d) in dims.iter().enumerate() {
            idx = idx * d + digits[s];
        }
        idx
    };
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for k1 in 0..kept_dim {
        for k2 in 0..kept_dim {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_dim {
                acc += mat.at(compose(k1, t), compose(k2, t));
            }
            out.set(k1, k2, acc);
        }
    }
    out
}

/// Partial trace of `|v><v|` without forming the outer product.
pub fn partial_trace_outer(v: &[C64], dims: &[usize], keep: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    assert_eq!(v.len(), total);
    let kept_dim: usize = keep.iter().map(|&s| dims[s]).product();
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
    let traced_dim: usize = traced.iter().map(|&s| dims[s]).product();
    // bucket the amplitudes by traced index
    let mut slices = vec![vec![C64::new(0.0, 0.0); kept_dim]; traced_dim];
    for (idx, &amp) in v.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let mut digits = vec![0usize; dims.len()];
        let mut rest = idx;
        for s in (0..dims.len()).rev() {
            digits[s] = rest % dims[s];
            rest /= dims[s];
        }
        let mut k = 0usize;
        for &s in keep {
            k = k * dims[s] + digits[s];
        }
        let mut t = 0usize;
        for &s in &traced {
            t = t * dims[s] + digits[s];
        }
        slices[t][k] = amp;
    }
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for slice in &slices {
        for i in 0..kept_dim {
            let si = slice[i];
            if si.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..kept_dim {
                let add = si * slice[j].conj();
                let cur = out.at(i, j);
                out.set(i, j, cur + add);
            }
        }
    }
    out
}

/// A generalized permutation matrix: exactly one nonzero (root of unity)
/// entry per column. Pauli operators embed as these, which keeps their
/// application to vectors and matrices linear in the data size.
#[derive(Clone, Debug)]
pub struct MonomialOp {
    dim: usize,
    /// Column j maps to row `perm[j]`.
    perm: Vec<usize>,
    /// Scale of column j.
    phase: Vec<C64>,
}

impl MonomialOp {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            perm: (0..dim).collect(),
            phase: vec![C64::new(1.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Embed a Pauli operator into a register of `n_sites` qudits of
    /// dimension `d`, acting on the listed (ascending) site positions.
    ///
    /// Index convention is big-endian: site 0 is the most significant
    /// digit of the basis index.
    pub fn from_pauli_on_sites(op: &PauliOperator, n_sites: usize, sites: &[usize]) -> Self {
        let d = op.dim() as usize;
        assert_eq!(op.qudits(), sites.len());
        let total = d
            .checked_pow(n_sites as u32)
            .expect("register dimension overflows usize");
        let two_d = 2 * op.dim();
        // per-site strides
        let mut stride = vec![1usize; n_sites];
        for s in (0..n_sites.saturating_sub(1)).rev() {
            stride[s] = stride[s + 1] * d;
        }
        let roots: Vec<C64> = (0..two_d)
            .map(|k| C64::from_polar(1.0, PI * k as f64 / op.dim() as f64))
            .collect();
        let mut perm = vec![0usize; total];
        let mut phase = vec![C64::new(0.0, 0.0); total];
        for col in 0..total {
            let mut row = col;
            let mut gamma_exp = op.phase();
            for (local, &site) in sites.iter().enumerate() {
                let digit = (col / stride[site]) % d;
                let a = op.x_exp()[local] as usize;
                let b = op.z_exp()[local];
                // X^a Z^b |j> = ω^{b·j} |j + a>
                gamma_exp = (gamma_exp + 2 * b * digit as u64) % two_d;
                let new_digit = (digit + a) % d;
                row = row - digit * stride[site] + new_digit * stride[site];
            }
            perm[col] = row;
            phase[col] = roots[gamma_exp as usize];
        }
        Self {
            dim: total,
            perm,
            phase,
        }
    }

    /// Whole-register embedding (the operator acts on every site).
    pub fn from_pauli(op: &PauliOperator) -> Self {
        let sites: Vec<usize> = (0..op.qudits()).collect();
        Self::from_pauli_on_sites(op, op.qudits(), &sites)
    }

    /// `w = M v`.
    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (col, (&row, &ph)) in self.perm.iter().zip(&self.phase).enumerate() {
            out[row] = ph * v[col];
        }
        out
    }

    /// `w += c · M v`, fused.
    pub fn accumulate_vec(&self, v: &[C64], c: C64, out: &mut [C64]) {
        for (col, (&row, &ph)) in self.perm.iter().zip(&self.phase).enumerate() {
            out[row] += c * ph * v[col];
        }
    }

    /// `M · A` for dense `A` (permutes and scales rows).
    pub fn apply_left(&self, a: &CMatrix) -> CMatrix {
        assert_eq!(a.rows(), self.dim);
        let mut out = CMatrix::zeros(a.rows(), a.cols());
        for col in 0..self.dim {
            let row = self.perm[col];
            let ph = self.phase[col];
            for j in 0..a.cols() {
                out.set(row, j, ph * a.at(col, j));
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for col in 0..self.dim {
            out.set(self.perm[col], col, self.phase[col]);
        }
        out
    }

    /// Compose with another monomial (`self · other`).
    pub fn compose(&self, other: &MonomialOp) -> MonomialOp {
        assert_eq!(self.dim, other.dim);
        let mut perm = vec![0usize; self.dim];
        let mut phase = vec![C64::new(0.0, 0.0); self.dim];
        for col in 0..self.dim {
            let mid = other.perm[col];
            perm[col] = self.perm[mid];
            phase[col] = self.phase[mid] * other.phase[col];
        }
        MonomialOp {
            dim: self.dim,
            perm,
            phase,
        }
    }
}

/// Apply a dense operator acting on a subset of sites to a state vector.
///
/// `sites` must be ascending; `op` has dimension `Π dims[sites]` with the
/// same big-endian ordering restricted to those sites.
pub fn apply_on_sites(v: &[C64], dims: &[usize], sites: &[usize], op: &CMatrix) -> Vec<C64> {
    let total: usize = dims.iter().product();
    assert_eq!(v.len(), total);
    let q: usize = sites.iter().map(|&s| dims[s]).product();
    assert_eq!(op.rows(), q);
    assert_eq!(op.cols(), q);
    let rest: Vec<usize> = (0..dims.len()).filter(|s| !sites.contains(s)).collect();
    let rest_dim: usize = rest.iter().map(|&s| dims[s]).product();
    // table: global index for (rest block, sub index)
    let mut global_of = vec![0usize; rest_dim * q];
    for (idx, slot) in global_of.iter_mut().enumerate() {
        let r = idx / q;
        let sub = idx % q;
        let mut digits = vec![0usize; dims.len()];
        let mut rr = r;
        for &s in rest.iter().rev() {
            digits[s] = rr % dims[s];
            rr /= dims[s];
        }
        let mut ss = sub;
        for &s in sites.iter().rev() {
            digits[s] = ss % dims[s];
            ss /= dims[s];
        }
        let mut g = 0usize;
        for (s, &d) in dims.iter().enumerate() {
            g = g * d + digits[s];
        }
        *slot = g;
    }
    let mut out = vec![C64::new(0.0, 0.0); total];
    let mut gather = vec![C64::new(0.0, 0.0); q];
    for r in 0..rest_dim {
        let table = &global_of[r * q..(r + 1) * q];
        for (a, &g) in gather.iter_mut().zip(table) {
            *a = v[g];
        }
        let res = op.matvec(&gather);
        for (&g, &val) in table.iter().zip(&res) {
            out[g] = val;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matrix_product_and_kron() {
        let a = CMatrix::from_fn(2, 2, |i, j| c((i * 2 + j) as f64, 0.0));
        let id = CMatrix::identity(2);
        assert_eq!(a.mul(&id).data(), a.data());
        let k = id.kron(&a);
        assert_eq!(k.rows(), 4);
        assert_eq!(k.at(0, 1), c(1.0, 0.0));
        assert_eq!(k.at(2, 3), c(1.0, 0.0));
        assert_eq!(k.at(0, 3), c(0.0, 0.0));
    }

    #[test]
    fn jacobi_diagonalizes_known_hermitian() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3
        let mut m = CMatrix::zeros(2, 2);
        m.set(0, 0, c(2.0, 0.0));
        m.set(0, 1, c(0.0, 1.0));
        m.set(1, 0, c(0.0, -1.0));
        m.set(1, 1, c(2.0, 0.0));
        let (eigs, vecs) = m.hermitian_eigen();
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
        // reconstruction
        let mut lambda = CMatrix::zeros(2, 2);
        lambda.set(0, 0, c(eigs[0], 0.0));
        lambda.set(1, 1, c(eigs[1], 0.0));
        let rebuilt = vecs.mul(&lambda).mul(&vecs.adjoint());
        assert!(rebuilt.max_abs_diff(&m) < 1e-12);
        // orthonormality
        assert!(vecs.adjoint().mul(&vecs).max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn jacobi_random_reconstruction() {
        let mut state = 0x853c49e6748fea9bu64;
        let mut rnd = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (1u64 << 31) as f64 - 1.0
        };
        for n in [3usize, 5, 8] {
            let g = CMatrix::from_fn(n, n, |_, _| c(rnd(), rnd()));
            let h = g.add(&g.adjoint()).scale(c(0.5, 0.0));
            let (eigs, vecs) = h.hermitian_eigen();
            let mut lambda = CMatrix::zeros(n, n);
            for (i, &e) in eigs.iter().enumerate() {
                lambda.set(i, i, c(e, 0.0));
            }
            let rebuilt = vecs.mul(&lambda).mul(&vecs.adjoint());
            assert!(rebuilt.max_abs_diff(&h) < 1e-11, "n={n}");
            assert!(eigs.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn monomial_matches_dense_application() {
        let op = PauliOperator::parse(3, "X Z^2").unwrap();
        let m = MonomialOp::from_pauli(&op);
        let dense = m.to_dense();
        let v: Vec<C64> = (0..9).map(|i| c(i as f64, -(i as f64))).collect();
        assert_eq!(m.apply_vec(&v), dense.matvec(&v));
        // composition agrees with matrix product
        let op2 = PauliOperator::parse(3, "Z X").unwrap();
        let m2 = MonomialOp::from_pauli(&op2);
        let composed = m.compose(&m2).to_dense();
        let product = dense.mul(&m2.to_dense());
        assert!(composed.max_abs_diff(&product) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_state() {
        // ρ = σ ⊗ τ: tracing out the second factor returns σ·tr(τ)
        let sigma = CMatrix::from_fn(2, 2, |i, j| c((1 + i + 2 * j) as f64, 0.0));
        let tau = CMatrix::from_fn(3, 3, |i, j| c(0.0, (i * 3 + j) as f64 + 1.0));
        let rho = sigma.kron(&tau);
        let reduced = partial_trace(&rho, &[2, 3], &[0]);
        let expected = sigma.scale(tau.trace());
        assert!(reduced.max_abs_diff(&expected) < 1e-12);
        // tracing out nothing returns the input
        let same = partial_trace(&rho, &[2, 3], &[0, 1]);
        assert!(same.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn partial_trace_outer_matches_dense_route() {
        let v: Vec<C64> = (0..12).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        let outer = CMatrix::from_fn(12, 12, |i, j| v[i] * v[j].conj());
        let dims = [2usize, 3, 2];
        for keep in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]] {
            let a = partial_trace(&outer, &dims, &keep);
            let b = partial_trace_outer(&v, &dims, &keep);
            assert!(a.max_abs_diff(&b) < 1e-12, "{keep:?}");
        }
    }

    #[test]
    fn apply_on_sites_matches_kron() {
        let u = CMatrix::from_fn(2, 2, |i, j| c((i + j) as f64, (i as f64) - (j as f64)));
        let dims = [2usize, 2, 2];
        let v: Vec<C64> = (0..8).map(|i| c(i as f64 + 1.0, 0.0)).collect();
        // act on middle site: I ⊗ u ⊗ I
        let full = CMatrix::identity(2).kron(&u).kron(&CMatrix::identity(2));
        let want = full.matvec(&v);
        let got = apply_on_sites(&v, &dims, &[1], &u);
        for (a, b) in want.iter().zip(&got) {
            assert!((a - b).norm() < 1e-13);
        }
        // act on sites 0 and 2 jointly with u ⊗ u
        let uu = u.kron(&u);
        let got2 = apply_on_sites(&v, &dims, &[0, 2], &uu);
        // oracle by permuting to (0,2,1) order: build full operator entrywise
        let mut full2 = CMatrix::zeros(8, 8);
        for r in 0..8 {
            for cidx in 0..8 {
                let (r0, r1, r2) = (r / 4, (r / 2) % 2, r % 2);
                let (c0, c1, c2) = (cidx / 4, (cidx / 2) % 2, cidx % 2);
                if r1 == c1 {
                    full2.set(r, cidx, uu.at(r0 * 2 + r2, c0 * 2 + c2));
                }
            }
        }
        let want2 = full2.matvec(&v);
        for (a, b) in want2.iter().zip(&got2) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
