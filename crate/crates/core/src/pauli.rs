//! Phase-tracked arithmetic in the generalized Pauli group on `n` qudits.
//!
//! A single qudit of dimension `d` carries the shift `X` and clock `Z`
//! defined by `X|j> = |j+1 mod d>` and `Z|j> = ω^j |j>`, `ω = exp(2πi/d)`.
//! The group is generated by these together with the phase `γ = sqrt(ω)`,
//! a primitive `2d`-th root of unity. Every element has the normal form
//!
//! ```text
//!     γ^c · X^{a_1} Z^{b_1} ⊗ ... ⊗ X^{a_n} Z^{b_n}
//! ```
//!
//! with `c ∈ Z_{2d}` and `a_i, b_i ∈ Z_d` ("X-power then Z-power" per
//! site). Everything here is exact integer arithmetic on those exponents;
//! the phase convention is pinned by `Z X = ω X Z` and is verified against
//! dense matrices in the simulator's tests.

use crate::zmod::ResidueVector;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Largest accepted qudit dimension; keeps every phase computation in
/// `Z_{2d}` comfortably inside 64-bit arithmetic.
pub const MAX_DIMENSION: u64 = 1 << 31;

/// Error type for Pauli-operator construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PauliError {
    /// Qudit dimension must be at least 2 (and at most [`MAX_DIMENSION`]).
    BadDimension { dim: u64 },
    /// Operands act on different dimensions or qudit counts.
    Mismatch {
        left_dim: u64,
        left_qudits: usize,
        right_dim: u64,
        right_qudits: usize,
    },
    /// A site-subset argument was empty, out of range, or repeated a site.
    BadSiteSet { reason: &'static str },
    /// Parse failure with a token position.
    Parse { position: usize, message: String },
}

impl fmt::Display for PauliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PauliError::BadDimension { dim } => write!(f, "qudit dimension {dim} < 2"),
            PauliError::Mismatch {
                left_dim,
                left_qudits,
                right_dim,
                right_qudits,
            } => write!(
                f,
                "operator mismatch: d={left_dim}, n={left_qudits} vs d={right_dim}, n={right_qudits}"
            ),
            PauliError::BadSiteSet { reason } => write!(f, "bad site set: {reason}"),
            PauliError::Parse { position, message } => {
                write!(f, "parse error at token {position}: {message}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PauliError {}

/// Eigenvalue structure of a Pauli operator.
///
/// The spectrum of any group element is `γ^shift · {ω^{j·step} : j}` for a
/// divisor `step` of `d` and a shift exponent in `[0, 2·step)`. The two
/// shapes singled out by the formalism are `shift == 0` (the operator can
/// serve as a stabilizer generator; eigenvalues `1, ω^step, ...`) and
/// `shift == 1` (the half-step ladder `ω^{1/2}, ω^{step + 1/2}, ...` that
/// appears for even `d`). Other shifts occur only once explicit `γ` phases
/// are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectrumClass {
    /// Divisor of `d`: consecutive eigenvalues differ by `ω^step`.
    pub step: u64,
    /// γ-exponent offset of the whole spectrum, reduced mod `2·step`.
    pub shift: u64,
}

/// The two spectrum shapes named by the formalism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Spectrum `{ω^{j·step}}`, contains 1.
    Plain,
    /// Spectrum displaced by a γ power; does not contain 1.
    Shifted,
}

impl SpectrumClass {
    pub fn kind(&self) -> SpectrumKind {
        if self.shift == 0 {
            SpectrumKind::Plain
        } else {
            SpectrumKind::Shifted
        }
    }
}

/// One element of the generalized Pauli group in normal form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    dim: u64,
    /// Exponent of γ in `[0, 2d)`.
    phase: u64,
    /// X exponents per site, in `[0, d)`.
    x_exp: Vec<u64>,
    /// Z exponents per site, in `[0, d)`.
    z_exp: Vec<u64>,
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli(d={}, {self})", self.dim)
    }
}

impl PauliOperator {
    /// Normal-form constructor; exponents are reduced eagerly.
    pub fn new(dim: u64, phase: i64, x_exp: &[i64], z_exp: &[i64]) -> Result<Self, PauliError> {
        if dim < 2 || dim > MAX_DIMENSION {
            return Err(PauliError::BadDimension { dim });
        }
        if x_exp.len() != z_exp.len() {
            return Err(PauliError::BadSiteSet {
                reason: "x and z exponent vectors differ in length",
            });
        }
        let d = dim as i64;
        Ok(Self {
            dim,
            phase: phase.rem_euclid(2 * d) as u64,
            x_exp: x_exp.iter().map(|&v| v.rem_euclid(d) as u64).collect(),
            z_exp: z_exp.iter().map(|&v| v.rem_euclid(d) as u64).collect(),
        })
    }

    pub fn identity(dim: u64, qudits: usize) -> Self {
        debug_assert!(dim >= 2);
        Self {
            dim,
            phase: 0,
            x_exp: vec![0; qudits],
            z_exp: vec![0; qudits],
        }
    }

    /// `X^x Z^z` on one site of an `n`-qudit register (no phase).
    pub fn single(dim: u64, qudits: usize, site: usize, x: i64, z: i64) -> Result<Self, PauliError> {
        if site >= qudits {
            return Err(PauliError::BadSiteSet {
                reason: "site index out of range",
            });
        }
        let mut xs = vec![0i64; qudits];
        let mut zs = vec![0i64; qudits];
        xs[site] = x;
        zs[site] = z;
        Self::new(dim, 0, &xs, &zs)
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn qudits(&self) -> usize {
        self.x_exp.len()
    }

    /// γ exponent in `[0, 2d)`.
    pub fn phase(&self) -> u64 {
        self.phase
    }

    pub fn x_exp(&self) -> &[u64] {
        &self.x_exp
    }

    pub fn z_exp(&self) -> &[u64] {
        &self.z_exp
    }

    /// Same operator with `extra` added to the γ exponent.
    pub fn with_phase_shift(&self, extra: i64) -> Self {
        let m = 2 * self.dim as i64;
        let mut out = self.clone();
        out.phase = (self.phase as i64 + extra).rem_euclid(m) as u64;
        out
    }

    /// Phase-free copy (γ exponent zeroed).
    pub fn without_phase(&self) -> Self {
        let mut out = self.clone();
        out.phase = 0;
        out
    }

    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.has_trivial_action()
    }

    /// True when the operator is `γ^c · I` for some `c` (possibly zero).
    pub fn has_trivial_action(&self) -> bool {
        self.x_exp.iter().all(|&v| v == 0) && self.z_exp.iter().all(|&v| v == 0)
    }

    /// Sites where the operator acts nontrivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.qudits())
            .filter(|&i| self.x_exp[i] != 0 || self.z_exp[i] != 0)
            .collect()
    }

    /// The symplectic exponent row `(a_1..a_n, b_1..b_n)` over `Z_d`.
    pub fn exponent_row(&self) -> ResidueVector {
        let entries: Vec<u64> = self
            .x_exp
            .iter()
            .chain(self.z_exp.iter())
            .copied()
            .collect();
        ResidueVector::from_unsigned(self.dim, &entries).expect("dim >= 2")
    }

    fn check_match(&self, other: &Self) -> Result<(), PauliError> {
        if self.dim != other.dim || self.qudits() != other.qudits() {
            return Err(PauliError::Mismatch {
                left_dim: self.dim,
                left_qudits: self.qudits(),
                right_dim: other.dim,
                right_qudits: other.qudits(),
            });
        }
        Ok(())
    }

    /// Exact group product in normal form.
    ///
    /// Per site, `(X^a Z^b)(X^{a'} Z^{b'}) = ω^{b·a'} X^{a+a'} Z^{b+b'}`
    /// (moving `Z^b` past `X^{a'}` with `Z X = ω X Z`), so the γ exponent
    /// picks up `2·Σ_i b_i·a'_i`.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_match(other)?;
        let d = self.dim;
        let two_d = 2 * d;
        let mut phase = (self.phase + other.phase) % two_d;
        let mut x_exp = Vec::with_capacity(self.qudits());
        let mut z_exp = Vec::with_capacity(self.qudits());
        for i in 0..self.qudits() {
            let cross = (self.z_exp[i] as u128 * other.x_exp[i] as u128 * 2) % two_d as u128;
            phase = ((phase as u128 + cross) % two_d as u128) as u64;
            x_exp.push((self.x_exp[i] + other.x_exp[i]) % d);
            z_exp.push((self.z_exp[i] + other.z_exp[i]) % d);
        }
        Ok(Self {
            dim: d,
            phase,
            x_exp,
            z_exp,
        })
    }

    /// Group inverse (exact, including phase).
    pub fn inverse(&self) -> Self {
        let d = self.dim;
        let two_d = 2 * d;
        let x_exp: Vec<u64> = self.x_exp.iter().map(|&a| (d - a) % d).collect();
        let z_exp: Vec<u64> = self.z_exp.iter().map(|&b| (d - b) % d).collect();
        // phase chosen so that self · inverse = identity
        let mut cross: u128 = 0;
        for i in 0..self.qudits() {
            cross = (cross + self.z_exp[i] as u128 * x_exp[i] as u128 * 2) % two_d as u128;
        }
        let phase = (two_d as u128 * 2 - self.phase as u128 - cross) % two_d as u128;
        Self {
            dim: d,
            phase: phase as u64,
            x_exp,
            z_exp,
        }
    }

    /// `Σ_i (b_i a'_i − a_i b'_i) mod d`: the exponent `e` in
    /// `g·h = ω^e · h·g`. Zero iff the operators commute exactly.
    pub fn commutation_exponent(&self, other: &Self) -> Result<u64, PauliError> {
        self.check_match(other)?;
        let d = self.dim as i128;
        let mut acc: i128 = 0;
        for i in 0..self.qudits() {
            acc += self.z_exp[i] as i128 * other.x_exp[i] as i128
                - self.x_exp[i] as i128 * other.z_exp[i] as i128;
            acc = acc.rem_euclid(d);
        }
        Ok(acc as u64)
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool, PauliError> {
        Ok(self.commutation_exponent(other)? == 0)
    }

    /// Nonnegative power by square-and-multiply (exact phases).
    pub fn power(&self, exponent: u64) -> Self {
        let mut result = Self::identity(self.dim, self.qudits());
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.multiply(&base).expect("same shape");
            }
            base = base.multiply(&base).expect("same shape");
            e >>= 1;
        }
        result
    }

    /// Restriction to a site subset: keeps the per-site `X^a Z^b` factors of
    /// `sites` in ascending order and drops the γ phase, as the formalism's
    /// restriction map does.
    pub fn restrict(&self, sites: &[usize]) -> Result<Self, PauliError> {
        if sites.is_empty() {
            return Err(PauliError::BadSiteSet {
                reason: "restriction to the empty set",
            });
        }
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(PauliError::BadSiteSet {
                reason: "repeated site",
            });
        }
        if *sorted.last().unwrap() >= self.qudits() {
            return Err(PauliError::BadSiteSet {
                reason: "site index out of range",
            });
        }
        Ok(Self {
            dim: self.dim,
            phase: 0,
            x_exp: sorted.iter().map(|&i| self.x_exp[i]).collect(),
            z_exp: sorted.iter().map(|&i| self.z_exp[i]).collect(),
        })
    }

    /// Smallest `r ≥ 1` with all exponent vectors of `self^r` zero, i.e.
    /// `self^r` is proportional to the identity.
    pub fn order_up_to_phase(&self) -> u64 {
        let mut g = self.dim;
        for &e in self.x_exp.iter().chain(self.z_exp.iter()) {
            let (mut a, mut b) = (g, e);
            while b != 0 {
                let t = a % b;
                a = b;
                b = t;
            }
            g = a;
        }
        self.dim / g
    }

    /// Smallest `r ≥ 1` with `self^r` exactly the identity.
    pub fn order(&self) -> u64 {
        let r = self.order_up_to_phase();
        let e = self.power(r).phase;
        let two_d = 2 * self.dim;
        let mut g = two_d;
        let (mut a, mut b) = (g, e);
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        g = a;
        r * (two_d / g)
    }

    /// Eigenvalue structure. `self^r = γ^e · I` at the minimal `r` forces
    /// the spectrum to be `γ^{e/r} · {ω^{j·d/r}}`; `e` is always divisible
    /// by `r` because the spectrum of a Pauli operator is a full coset of
    /// the cyclic group it generates.
    pub fn spectrum_class(&self) -> SpectrumClass {
        let r = self.order_up_to_phase();
        let e = self.power(r).phase;
        debug_assert_eq!(e % r, 0, "Pauli spectrum must be a γ-power coset");
        let step = self.dim / r;
        SpectrumClass {
            step,
            shift: (e / r) % (2 * step),
        }
    }

    /// Membership in the subset eligible for stabilizer generators: the
    /// spectrum must contain 1 with the plain ladder structure, which is
    /// equivalent to `self^r = I` exactly at the minimal `r`.
    pub fn in_g_prime(&self) -> bool {
        self.spectrum_class().shift == 0
    }

    /// γ exponent that makes the spectrum plain when added to this
    /// operator's phase: `with_phase_shift(calibration)` has spectrum
    /// `{ω^{j·step}}`, eigenvalue 1 included.
    pub fn plain_calibration(&self) -> i64 {
        let class = self.spectrum_class();
        ((2 * class.step - class.shift) % (2 * class.step)) as i64
    }

    /// Parse the whitespace-separated token form.
    ///
    /// Tokens: optional leading `w^k` (ω power) or `g^c` (γ power), then one
    /// per site of `I`, `X`, `Z`, `Y` (d = 2 only; `Y = γ·XZ`), `X^a`,
    /// `Z^b`, or `X^aZ^b`. Exponents may be negative.
    pub fn parse(dim: u64, text: &str) -> Result<Self, PauliError> {
        if dim < 2 || dim > MAX_DIMENSION {
            return Err(PauliError::BadDimension { dim });
        }
        let mut phase: i64 = 0;
        let mut xs: Vec<i64> = Vec::new();
        let mut zs: Vec<i64> = Vec::new();
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(PauliError::Parse {
                position: 0,
                message: String::from("empty operator"),
            });
        }
        for (pos, tok) in tokens.iter().enumerate() {
            if pos == 0 && (tok.starts_with("w^") || tok.starts_with("g^")) {
                let exp: i64 = tok[2..].parse().map_err(|_| PauliError::Parse {
                    position: pos,
                    message: format!("bad phase exponent in '{tok}'"),
                })?;
                phase = if tok.starts_with('w') { 2 * exp } else { exp };
                continue;
            }
            let (x, z) = parse_site_token(tok, dim, pos, &mut phase)?;
            xs.push(x);
            zs.push(z);
        }
        if xs.is_empty() {
            return Err(PauliError::Parse {
                position: 0,
                message: String::from("phase token without site tokens"),
            });
        }
        Self::new(dim, phase, &xs, &zs)
    }
}

fn parse_site_token(
    tok: &str,
    dim: u64,
    pos: usize,
    phase: &mut i64,
) -> Result<(i64, i64), PauliError> {
    let err = |message: String| PauliError::Parse {
        position: pos,
        message,
    };
    match tok {
        "I" => return Ok((0, 0)),
        "X" => return Ok((1, 0)),
        "Z" => return Ok((0, 1)),
        "Y" => {
            if dim != 2 {
                return Err(err(String::from("'Y' is only defined for d = 2")));
            }
            *phase += 1; // Y = γ·XZ = i·XZ on qubits
            return Ok((1, 1));
        }
        _ => {}
    }
    // general X^aZ^b shapes
    let bytes = tok.as_bytes();
    let mut i = 0;
    let mut x: Option<i64> = None;
    let mut z: Option<i64> = None;
    while i < bytes.len() {
        let letter = bytes[i] as char;
        if letter != 'X' && letter != 'Z' {
            return Err(err(format!("unexpected character '{letter}' in '{tok}'")));
        }
        i += 1;
        let mut exp: i64 = 1;
        if i < bytes.len() && bytes[i] == b'^' {
            i += 1;
            let start = i;
            if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
                i += 1;
            }
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            exp = tok[start..i]
                .parse()
                .map_err(|_| err(format!("bad exponent in '{tok}'")))?;
        }
        if letter == 'Z' && x.is_none() && tok.contains('X') {
            return Err(err(format!("'{tok}' is not in X-then-Z order")));
        }
        let slot = if letter == 'X' { &mut x } else { &mut z };
        if slot.is_some() {
            return Err(err(format!("repeated '{letter}' in '{tok}'")));
        }
        *slot = Some(exp);
    }
    Ok((x.unwrap_or(0), z.unwrap_or(0)))
}

impl fmt::Display for PauliOperator {
    /// Canonical token form: optional `w^k`/`g^c` phase prefix, then one
    /// token per site. Round-trips through [`PauliOperator::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase != 0 && self.phase % 2 == 0 {
            write!(f, "w^{} ", self.phase / 2)?;
        } else if self.phase != 0 {
            write!(f, "g^{} ", self.phase)?;
        }
        for i in 0..self.qudits() {
            if i > 0 {
                write!(f, " ")?;
            }
            let (a, b) = (self.x_exp[i], self.z_exp[i]);
            match (a, b) {
                (0, 0) => write!(f, "I")?,
                (1, 0) => write!(f, "X")?,
                (0, 1) => write!(f, "Z")?,
                (a, 0) => write!(f, "X^{a}")?,
                (0, b) => write!(f, "Z^{b}")?,
                (1, 1) => write!(f, "XZ")?,
                (a, 1) => write!(f, "X^{a}Z")?,
                (1, b) => write!(f, "XZ^{b}")?,
                (a, b) => write!(f, "X^{a}Z^{b}")?,
            }
        }
        Ok(())
    }
}
