//! Exact linear algebra over `Z_m` for arbitrary (including composite) moduli.
//!
//! Residues are stored as least nonnegative representatives and every
//! operation reduces eagerly. Solving and kernel extraction go through an
//! integer Smith-style diagonalization so that zero divisors are handled
//! correctly; canonical row forms use the Howell construction, which is the
//! right notion over `Z_m`: two matrices have equal row span iff their
//! Howell forms are identical.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Error type for the modular linear algebra layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZmodError {
    /// Two operands carry different moduli.
    ModulusMismatch { left: u64, right: u64 },
    /// A vector or row has the wrong length.
    LengthMismatch { expected: usize, got: usize },
    /// The modulus must be positive.
    ZeroModulus,
}

impl fmt::Display for ZmodError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZmodError::ModulusMismatch { left, right } => {
                write!(f, "modulus mismatch: {left} vs {right}")
            }
            ZmodError::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            ZmodError::ZeroModulus => write!(f, "modulus must be positive"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ZmodError {}

/// Reduce a signed integer to its least nonnegative residue.
pub fn reduce(value: i64, modulus: u64) -> u64 {
    debug_assert!(modulus > 0);
    value.rem_euclid(modulus as i64) as u64
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: `(g, x, y)` with `x*a + y*b = g`, `g >= 0`.
fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = xgcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Modular inverse of `a` mod `m`, when `gcd(a, m) = 1`.
fn modinv(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = xgcd(a as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

/// A unit `u` mod `m` with `u*a ≡ gcd(a, m) (mod m)`. Requires `a % m != 0`.
fn unit_to_gcd(a: u64, m: u64) -> u64 {
    let a = a % m;
    debug_assert!(a != 0);
    let g = gcd_u64(a, m);
    let m1 = m / g;
    // gcd(a/g, m/g) = 1, otherwise gcd(a, m) would exceed g
    let u0 = modinv((a / g) % m1, m1).expect("coprime by construction");
    let mut u = u0 % m;
    let mut steps = 0u64;
    while u == 0 || gcd_u64(u, m) != 1 {
        u = (u + m1) % m;
        steps += 1;
        debug_assert!(steps <= m, "unit search must terminate");
    }
    u
}

/// Vector of residues modulo a shared modulus.
///
/// Invariants: every entry lies in `[0, modulus)`; the length is fixed at
/// construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ResidueVector {
    modulus: u64,
    entries: Vec<u64>,
}

impl fmt::Debug for ResidueVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (mod {})", self.entries, self.modulus)
    }
}

impl ResidueVector {
    /// Build from signed integers, reducing each entry.
    pub fn new(modulus: u64, entries: &[i64]) -> Result<Self, ZmodError> {
        if modulus == 0 {
            return Err(ZmodError::ZeroModulus);
        }
        Ok(Self {
            modulus,
            entries: entries.iter().map(|&v| reduce(v, modulus)).collect(),
        })
    }

    /// Build from already-reduced unsigned entries (reduces defensively).
    pub fn from_unsigned(modulus: u64, entries: &[u64]) -> Result<Self, ZmodError> {
        if modulus == 0 {
            return Err(ZmodError::ZeroModulus);
        }
        Ok(Self {
            modulus,
            entries: entries.iter().map(|&v| v % modulus).collect(),
        })
    }

    pub fn zeros(modulus: u64, len: usize) -> Self {
        Self {
            modulus,
            entries: vec![0; len],
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, i: usize) -> u64 {
        self.entries[i]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), ZmodError> {
        if self.modulus != other.modulus {
            return Err(ZmodError::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        if self.len() != other.len() {
            return Err(ZmodError::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, ZmodError> {
        self.check_compatible(other)?;
        Ok(Self {
            modulus: self.modulus,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| (a + b) % self.modulus)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ZmodError> {
        self.check_compatible(other)?;
        Ok(Self {
            modulus: self.modulus,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| (a + self.modulus - b) % self.modulus)
                .collect(),
        })
    }

    pub fn scale(&self, c: u64) -> Self {
        let c = c % self.modulus;
        Self {
            modulus: self.modulus,
            entries: self
                .entries
                .iter()
                .map(|&a| ((a as u128 * c as u128) % self.modulus as u128) as u64)
                .collect(),
        }
    }

    /// Dot product mod the shared modulus.
    pub fn dot(&self, other: &Self) -> Result<u64, ZmodError> {
        self.check_compatible(other)?;
        let m = self.modulus as u128;
        let mut acc: u128 = 0;
        for (&a, &b) in self.entries.iter().zip(&other.entries) {
            acc = (acc + a as u128 * b as u128) % m;
        }
        Ok(acc as u64)
    }
}

/// Matrix over `Z_m`, stored as rows of equal length.
#[derive(Clone, PartialEq, Eq)]
pub struct ResidueMatrix {
    modulus: u64,
    width: usize,
    rows: Vec<ResidueVector>,
}

impl fmt::Debug for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ResidueMatrix (mod {}) [", self.modulus)?;
        for r in &self.rows {
            writeln!(f, "  {:?}", r.entries)?;
        }
        write!(f, "]")
    }
}

impl ResidueMatrix {
    pub fn new(modulus: u64, width: usize, rows: Vec<ResidueVector>) -> Result<Self, ZmodError> {
        if modulus == 0 {
            return Err(ZmodError::ZeroModulus);
        }
        for r in &rows {
            if r.modulus() != modulus {
                return Err(ZmodError::ModulusMismatch {
                    left: modulus,
                    right: r.modulus(),
                });
            }
            if r.len() != width {
                return Err(ZmodError::LengthMismatch {
                    expected: width,
                    got: r.len(),
                });
            }
        }
        Ok(Self {
            modulus,
            width,
            rows,
        })
    }

    pub fn from_rows_i64(modulus: u64, width: usize, rows: &[&[i64]]) -> Result<Self, ZmodError> {
        let rows = rows
            .iter()
            .map(|r| ResidueVector::new(modulus, r))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(modulus, width, rows)
    }

    pub fn identity(modulus: u64, n: usize) -> Result<Self, ZmodError> {
        if modulus == 0 {
            return Err(ZmodError::ZeroModulus);
        }
        let rows = (0..n)
            .map(|i| {
                let mut e = vec![0u64; n];
                e[i] = 1 % modulus;
                ResidueVector {
                    modulus,
                    entries: e,
                }
            })
            .collect();
        Self::new(modulus, n, rows)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &ResidueVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[ResidueVector] {
        &self.rows
    }

    pub fn transpose(&self) -> Self {
        let rows = (0..self.width)
            .map(|j| ResidueVector {
                modulus: self.modulus,
                entries: self.rows.iter().map(|r| r.entries[j]).collect(),
            })
            .collect();
        Self {
            modulus: self.modulus,
            width: self.rows.len(),
            rows,
        }
    }

    /// `A · x` with rows as linear forms.
    pub fn mul_vec(&self, x: &ResidueVector) -> Result<ResidueVector, ZmodError> {
        if x.modulus() != self.modulus {
            return Err(ZmodError::ModulusMismatch {
                left: self.modulus,
                right: x.modulus(),
            });
        }
        if x.len() != self.width {
            return Err(ZmodError::LengthMismatch {
                expected: self.width,
                got: x.len(),
            });
        }
        let entries = self
            .rows
            .iter()
            .map(|r| r.dot(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ResidueVector {
            modulus: self.modulus,
            entries,
        })
    }

    /// `Σ_i coeffs_i · row_i`.
    pub fn combine_rows(&self, coeffs: &ResidueVector) -> Result<ResidueVector, ZmodError> {
        if coeffs.len() != self.rows.len() {
            return Err(ZmodError::LengthMismatch {
                expected: self.rows.len(),
                got: coeffs.len(),
            });
        }
        let mut acc = ResidueVector::zeros(self.modulus, self.width);
        for (c, row) in coeffs.entries().iter().zip(&self.rows) {
            acc = acc.add(&row.scale(*c))?;
        }
        Ok(acc)
    }

    /// Solve `A·x ≡ b (mod m)` with rows read as equations.
    ///
    /// Returns `Ok(None)` when no solution exists. Correct for composite
    /// moduli: the system is lifted to the integers as `[A | m·I]` and
    /// diagonalized.
    pub fn solve(&self, b: &ResidueVector) -> Result<Option<ResidueVector>, ZmodError> {
        if b.modulus() != self.modulus {
            return Err(ZmodError::ModulusMismatch {
                left: self.modulus,
                right: b.modulus(),
            });
        }
        if b.len() != self.rows.len() {
            return Err(ZmodError::LengthMismatch {
                expected: self.rows.len(),
                got: b.len(),
            });
        }
        Ok(self.solve_reduced(b))
    }

    /// Coefficients `x` with `Σ_i x_i · row_i ≡ b (mod m)`.
    ///
    /// This is the transposed convention: the rows of `self` are treated as
    /// generators and the solution expresses `b` in terms of them, which is
    /// what group-membership tests need.
    pub fn solve_combination(
        &self,
        b: &ResidueVector,
    ) -> Result<Option<ResidueVector>, ZmodError> {
        if b.len() != self.width {
            return Err(ZmodError::LengthMismatch {
                expected: self.width,
                got: b.len(),
            });
        }
        self.transpose().solve(b)
    }

    fn solve_reduced(&self, b: &ResidueVector) -> Option<ResidueVector> {
        let m = self.modulus as i128;
        let rows = self.rows.len();
        let cols = self.width;
        let a: Vec<Vec<i128>> = self
            .rows
            .iter()
            .map(|r| r.entries.iter().map(|&v| v as i128).collect())
            .collect();
        let (u, s, v) = diagonalize(a, rows, cols);
        // c = U·b over the integers, then reduce mod m
        let c: Vec<i128> = (0..rows)
            .map(|i| {
                let mut acc: i128 = 0;
                for (j, bj) in b.entries.iter().enumerate() {
                    acc += u[i][j] * *bj as i128;
                }
                acc.rem_euclid(m)
            })
            .collect();
        let rank_bound = rows.min(cols);
        let mut y = vec![0i128; cols];
        for i in 0..rows {
            let si = if i < rank_bound {
                s[i][i].rem_euclid(m)
            } else {
                0
            };
            let ci = c[i];
            let g = gcd_u64(si as u64, m as u64) as i128;
            // s_i y ≡ c_i (mod m): solvable iff gcd(s_i, m) | c_i
            if ci % g != 0 {
                return None;
            }
            if i < rank_bound && si != 0 {
                let m1 = (m / g) as u64;
                let inv = modinv(((si / g) as u64) % m1.max(1), m1.max(1)).unwrap_or(0);
                y[i] = (((ci / g) as u64 % m1.max(1)) as i128 * inv as i128).rem_euclid(m1 as i128);
            }
        }
        // x = V·y mod m
        let entries: Vec<u64> = (0..cols)
            .map(|i| {
                let mut acc: i128 = 0;
                for (j, yj) in y.iter().enumerate() {
                    acc += v[i][j] * *yj;
                }
                acc.rem_euclid(m) as u64
            })
            .collect();
        let x = ResidueVector {
            modulus: self.modulus,
            entries,
        };
        debug_assert_eq!(self.mul_vec(&x).unwrap(), *b);
        Some(x)
    }

    /// Generating set for `{x : A·x ≡ 0 (mod m)}`, one generator per row.
    pub fn kernel_basis(&self) -> ResidueMatrix {
        let m = self.modulus as i128;
        let rows = self.rows.len();
        let cols = self.width;
        let a: Vec<Vec<i128>> = self
            .rows
            .iter()
            .map(|r| r.entries.iter().map(|&v| v as i128).collect())
            .collect();
        let (_, s, v) = diagonalize(a, rows, cols);
        let rank_bound = rows.min(cols);
        let mut gens: Vec<ResidueVector> = Vec::new();
        for i in 0..cols {
            let si = if i < rank_bound {
                s[i][i].rem_euclid(m) as u64
            } else {
                0
            };
            // s_i y_i ≡ 0 (mod m) ⟺ y_i multiple of m / gcd(s_i, m)
            let step = self.modulus / gcd_u64(si, self.modulus);
            if step == self.modulus && si != 0 {
                continue; // only the trivial multiple
            }
            let entries: Vec<u64> = (0..cols)
                .map(|r| ((v[r][i].rem_euclid(m) as u128 * step as u128) % m as u128) as u64)
                .collect();
            let vec = ResidueVector {
                modulus: self.modulus,
                entries,
            };
            if !vec.is_zero() {
                debug_assert!(self.mul_vec(&vec).unwrap().is_zero());
                gens.push(vec);
            }
        }
        ResidueMatrix {
            modulus: self.modulus,
            width: cols,
            rows: gens,
        }
    }

    /// Generating set for the coefficient vectors `c` with
    /// `Σ_i c_i · row_i ≡ 0 (mod m)`.
    pub fn combination_kernel_basis(&self) -> ResidueMatrix {
        self.transpose().kernel_basis()
    }

    /// Howell canonical row form together with the pivot column profile.
    ///
    /// The form is canonical for the row span: two matrices over the same
    /// `Z_m` have equal row span iff their forms are equal. Pivot entries
    /// divide `m`, entries above a pivot are reduced below it, and the span
    /// is closed under leading-coefficient annihilation.
    pub fn row_span_rank_profile(&self) -> (ResidueMatrix, Vec<usize>) {
        let m = self.modulus;
        if m == 1 {
            return (
                ResidueMatrix {
                    modulus: m,
                    width: self.width,
                    rows: Vec::new(),
                },
                Vec::new(),
            );
        }
        let mut work: Vec<Vec<u64>> = self
            .rows
            .iter()
            .filter(|r| !r.is_zero())
            .map(|r| r.entries.clone())
            .collect();
        let mut out: Vec<Vec<u64>> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        for col in 0..self.width {
            let mut pivot: Option<Vec<u64>> = None;
            let mut rest: Vec<Vec<u64>> = Vec::new();
            for row in work.drain(..) {
                if row[col] == 0 {
                    rest.push(row);
                    continue;
                }
                pivot = Some(match pivot {
                    None => row,
                    Some(p) => {
                        let (np, nr) = combine_rows_xgcd(&p, &row, col, m);
                        if nr.iter().any(|&v| v != 0) {
                            rest.push(nr);
                        }
                        np
                    }
                });
            }
            work = rest;
            if let Some(mut p) = pivot {
                // normalize the pivot entry to gcd(entry, m)
                let u = unit_to_gcd(p[col], m);
                for e in p.iter_mut() {
                    *e = ((*e as u128 * u as u128) % m as u128) as u64;
                }
                let g = p[col];
                debug_assert_eq!(m % g, 0);
                // Howell closure: the annihilator multiple stays in the span
                let ann = m / g;
                if ann > 1 {
                    let w: Vec<u64> = p
                        .iter()
                        .map(|&e| ((e as u128 * ann as u128) % m as u128) as u64)
                        .collect();
                    if w.iter().any(|&v| v != 0) {
                        work.push(w);
                    }
                }
                pivots.push(col);
                out.push(p);
            }
        }
        // reduce entries above each pivot below the pivot value
        for i in 0..out.len() {
            let j = pivots[i];
            let p = out[i][j];
            for k in 0..i {
                let q = out[k][j] / p;
                if q != 0 {
                    for c in 0..self.width {
                        let sub = ((out[i][c] as u128 * q as u128) % m as u128) as u64;
                        out[k][c] = (out[k][c] + m - sub) % m;
                    }
                }
            }
        }
        let rows = out
            .into_iter()
            .map(|entries| ResidueVector {
                modulus: m,
                entries,
            })
            .collect();
        (
            ResidueMatrix {
                modulus: m,
                width: self.width,
                rows,
            },
            pivots,
        )
    }

    /// Howell canonical form (without the pivot profile).
    pub fn howell_form(&self) -> ResidueMatrix {
        self.row_span_rank_profile().0
    }

    /// Row-span equality test via canonical forms.
    pub fn spans_same(&self, other: &ResidueMatrix) -> bool {
        self.modulus == other.modulus
            && self.width == other.width
            && self.howell_form() == other.howell_form()
    }

    /// Is `v` in the row span? (`v` must share modulus and width.)
    pub fn contains_in_row_span(&self, v: &ResidueVector) -> Result<bool, ZmodError> {
        if v.modulus() != self.modulus {
            return Err(ZmodError::ModulusMismatch {
                left: self.modulus,
                right: v.modulus(),
            });
        }
        if v.len() != self.width {
            return Err(ZmodError::LengthMismatch {
                expected: self.width,
                got: v.len(),
            });
        }
        Ok(self.solve_combination(v)?.is_some())
    }
}

/// One xgcd-driven unimodular row combination. Returns the new pivot row
/// (gcd at `col`) and the cleared row (zero at `col`).
fn combine_rows_xgcd(p: &[u64], r: &[u64], col: usize, m: u64) -> (Vec<u64>, Vec<u64>) {
    let a = p[col] as i128;
    let b = r[col] as i128;
    let (g, x, y) = xgcd(a, b);
    let mm = m as i128;
    let np: Vec<u64> = p
        .iter()
        .zip(r)
        .map(|(&pe, &re)| (x * pe as i128 + y * re as i128).rem_euclid(mm) as u64)
        .collect();
    let nr: Vec<u64> = p
        .iter()
        .zip(r)
        .map(|(&pe, &re)| ((b / g) * pe as i128 - (a / g) * re as i128).rem_euclid(mm) as u64)
        .collect();
    debug_assert_eq!(nr[col], 0);
    (np, nr)
}

/// Integer diagonalization `U·A·V = S` with `U`, `V` unimodular and `S`
/// diagonal (divisibility chain not enforced; not needed for solving).
fn diagonalize(
    mut a: Vec<Vec<i128>>,
    rows: usize,
    cols: usize,
) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let mut u: Vec<Vec<i128>> = (0..rows)
        .map(|i| (0..rows).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut v: Vec<Vec<i128>> = (0..cols)
        .map(|i| (0..cols).map(|j| i128::from(i == j)).collect())
        .collect();

    for k in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry in the remaining block
            let mut best: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if a[i][j] != 0
                        && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (u, a, v);
            };
            if pi != k {
                a.swap(pi, k);
                u.swap(pi, k);
            }
            if pj != k {
                for row in a.iter_mut() {
                    row.swap(pj, k);
                }
                // v tracks column ops: V columns swap — stored as v[col][k]
                for row in v.iter_mut() {
                    row.swap(pj, k);
                }
            }
            let pivot = a[k][k];
            let mut clean = true;
            for i in k + 1..rows {
                let q = a[i][k].div_euclid(pivot);
                if q != 0 {
                    for j in 0..cols {
                        a[i][j] -= q * a[k][j];
                    }
                    for j in 0..rows {
                        u[i][j] -= q * u[k][j];
                    }
                }
                if a[i][k] != 0 {
                    clean = false;
                }
            }
            for j in k + 1..cols {
                let q = a[k][j].div_euclid(pivot);
                if q != 0 {
                    for i in 0..rows {
                        a[i][j] -= q * a[i][k];
                    }
                    for i in 0..cols {
                        v[i][j] -= q * v[i][k];
                    }
                }
                if a[k][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
    }
    (u, a, v)
}
