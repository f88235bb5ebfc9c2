//! Partitions, canonical patterns, and the conjugate-pair decomposition
//! search that decides achievable teleportation capacities.
//!
//! The search is a symplectic Gram–Schmidt over the commutation form of
//! generator restrictions to the receiver's sites. Per sender, candidate
//! generators are those acting trivially on every *other* sender's part;
//! pairs with a unit commutation exponent are extracted greedily in
//! generator-list order and swept out of the sender's pool. Whatever is
//! left forms the receiver-side subgroup, whose restrictions are organized
//! into their own conjugate pairs plus a commuting tail.
//!
//! The search is complete for prime `d` in the bipartite case (unit-pivot
//! extraction over a field is full symplectic Gram–Schmidt); for composite
//! `d` it is best effort, and for several senders it is a deterministic
//! greedy heuristic. A failed or small result never proves a capacity
//! unachievable — whether the underlying conditions are necessary is open.
//! Every returned decomposition is re-verified from scratch, so whatever
//! comes back is a sound certificate.

use crate::group::{GroupError, RestrictedGroup, StabilizerGroup};
use crate::pauli::{PauliError, PauliOperator};
use crate::zmod::{ResidueMatrix, ResidueVector, ZmodError};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Error/failure type for partition handling and the decomposition search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompositionError {
    Group(GroupError),
    Pauli(PauliError),
    Zmod(ZmodError),
    /// The partition is not a partition of the qudit set.
    BadPartition { reason: String },
    /// A canonical pattern violates `u <= s`.
    BadPattern { reason: String },
    /// Leftover receiver-side restrictions fail to commute and no unit
    /// pivot can pair them (composite moduli only).
    NoncommutingTail {
        first: usize,
        second: usize,
        exponent: u64,
    },
    /// The composite-modulus tail could not be expressed through base
    /// operators with canonical relations (best-effort limitation).
    CompositeTailUnsupported { detail: String },
    /// A user-supplied decomposition does not satisfy the conditions.
    CertificationFailed { detail: String },
    /// Internal re-verification of a search result failed (a bug, not a
    /// property of the input).
    VerificationFailed { detail: String },
}

impl fmt::Display for DecompositionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionError::Group(e) => write!(f, "{e}"),
            DecompositionError::Pauli(e) => write!(f, "{e}"),
            DecompositionError::Zmod(e) => write!(f, "{e}"),
            DecompositionError::BadPartition { reason } => write!(f, "bad partition: {reason}"),
            DecompositionError::BadPattern { reason } => write!(f, "bad pattern: {reason}"),
            DecompositionError::NoncommutingTail {
                first,
                second,
                exponent,
            } => write!(
                f,
                "no decomposition found at the tail stage: leftover restrictions {first} and {second} \
                 have non-unit commutation exponent {exponent}"
            ),
            DecompositionError::CompositeTailUnsupported { detail } => {
                write!(f, "no decomposition found (composite-modulus tail): {detail}")
            }
            DecompositionError::CertificationFailed { detail } => {
                write!(f, "supplied decomposition failed certification: {detail}")
            }
            DecompositionError::VerificationFailed { detail } => {
                write!(f, "internal verification failed: {detail}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DecompositionError {}

impl From<GroupError> for DecompositionError {
    fn from(e: GroupError) -> Self {
        DecompositionError::Group(e)
    }
}

impl From<PauliError> for DecompositionError {
    fn from(e: PauliError) -> Self {
        DecompositionError::Pauli(e)
    }
}

impl From<ZmodError> for DecompositionError {
    fn from(e: ZmodError) -> Self {
        DecompositionError::Zmod(e)
    }
}

/// An ordered partition `T_1 | ... | T_m | T_{m+1}` of the sites
/// `0..n`, with the last part the receiver's.
#[derive(Clone, PartialEq, Eq)]
pub struct Partition {
    qudits: usize,
    parts: Vec<Vec<usize>>,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition(n={}, {:?})", self.qudits, self.parts)
    }
}

impl Partition {
    /// Validate: at least two nonempty parts, disjoint, covering `0..n`.
    /// Each part is sorted; part order is preserved.
    pub fn new(qudits: usize, parts: Vec<Vec<usize>>) -> Result<Self, DecompositionError> {
        if parts.len() < 2 {
            return Err(DecompositionError::BadPartition {
                reason: String::from("need at least one sender and a receiver"),
            });
        }
        let mut seen = vec![false; qudits];
        let mut sorted_parts = Vec::with_capacity(parts.len());
        for part in &parts {
            if part.is_empty() {
                return Err(DecompositionError::BadPartition {
                    reason: String::from("empty part"),
                });
            }
            let mut p = part.clone();
            p.sort_unstable();
            for &site in &p {
                if site >= qudits {
                    return Err(DecompositionError::BadPartition {
                        reason: format!("site {site} out of range for n={qudits}"),
                    });
                }
                if seen[site] {
                    return Err(DecompositionError::BadPartition {
                        reason: format!("site {site} appears in two parts"),
                    });
                }
                seen[site] = true;
            }
            sorted_parts.push(p);
        }
        if seen.iter().any(|&s| !s) {
            return Err(DecompositionError::BadPartition {
                reason: String::from("parts do not cover every site"),
            });
        }
        Ok(Self {
            qudits,
            parts: sorted_parts,
        })
    }

    /// Build with an explicit receiver part (0-based index into `parts`),
    /// moving it to the end while keeping the senders' relative order.
    pub fn with_receiver(
        qudits: usize,
        mut parts: Vec<Vec<usize>>,
        receiver: usize,
    ) -> Result<Self, DecompositionError> {
        if receiver >= parts.len() {
            return Err(DecompositionError::BadPartition {
                reason: format!("receiver index {receiver} out of range"),
            });
        }
        let rec = parts.remove(receiver);
        parts.push(rec);
        Self::new(qudits, parts)
    }

    pub fn qudits(&self) -> usize {
        self.qudits
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn sender_count(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn sender(&self, i: usize) -> &[usize] {
        &self.parts[i]
    }

    pub fn receiver(&self) -> &[usize] {
        self.parts.last().expect("at least two parts")
    }
}

/// Shape of a restricted subgroup: `pairs` full conjugate pairs, a Z-type
/// tail with exponents `z_tail` (the first `x_tail.len()` of them paired
/// with X-type partners of exponents `x_tail`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalPattern {
    pub pairs: usize,
    pub z_tail: Vec<u64>,
    pub x_tail: Vec<u64>,
}

impl CanonicalPattern {
    pub fn new(pairs: usize, z_tail: Vec<u64>, x_tail: Vec<u64>) -> Result<Self, DecompositionError> {
        if x_tail.len() > z_tail.len() {
            return Err(DecompositionError::BadPattern {
                reason: String::from("pattern requires u <= s"),
            });
        }
        Ok(Self {
            pairs,
            z_tail,
            x_tail,
        })
    }

    pub fn trivial() -> Self {
        Self {
            pairs: 0,
            z_tail: Vec::new(),
            x_tail: Vec::new(),
        }
    }
}

impl fmt::Display for CanonicalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={}, s={} {:?}, u={} {:?}",
            self.pairs,
            self.z_tail.len(),
            self.z_tail,
            self.x_tail.len(),
            self.x_tail
        )
    }
}

/// Base operators realizing a canonical pattern: `z_ops[i]` and `x_ops[j]`
/// have commutation exponent `δ_ij`, z's commute among themselves, x's
/// commute among themselves. Pattern entries are powers of these bases.
#[derive(Debug, Clone)]
pub struct PatternWitness {
    pub z_ops: Vec<PauliOperator>,
    pub x_ops: Vec<PauliOperator>,
}

impl PatternWitness {
    /// Check the canonical base commutation relations.
    pub fn verify_relations(&self) -> Result<(), DecompositionError> {
        for (i, z) in self.z_ops.iter().enumerate() {
            for (j, z2) in self.z_ops.iter().enumerate().skip(i + 1) {
                if z.commutation_exponent(z2)? != 0 {
                    return Err(DecompositionError::VerificationFailed {
                        detail: format!("z-witnesses {i} and {j} do not commute"),
                    });
                }
            }
            for (j, x) in self.x_ops.iter().enumerate() {
                let want = u64::from(i == j);
                let got = z.commutation_exponent(x)?;
                if got != want {
                    return Err(DecompositionError::VerificationFailed {
                        detail: format!("commutation of z-witness {i} with x-witness {j} is {got}, want {want}"),
                    });
                }
            }
        }
        for (i, x) in self.x_ops.iter().enumerate() {
            for (j, x2) in self.x_ops.iter().enumerate().skip(i + 1) {
                if x.commutation_exponent(x2)? != 0 {
                    return Err(DecompositionError::VerificationFailed {
                        detail: format!("x-witnesses {i} and {j} do not commute"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// One Z-type tail entry of a decomposition: the full group element, the
/// base operator on the receiver sites, and the exponent with
/// `base^exponent = element restriction`.
#[derive(Debug, Clone)]
pub struct TailEntry {
    pub element: PauliOperator,
    pub base: PauliOperator,
    pub exponent: u64,
}

/// A certified arrangement of the group's generators realizing the
/// capacity conditions for a partition.
#[derive(Debug, Clone)]
pub struct Decomposition {
    dim: u64,
    partition: Partition,
    /// Per sender: conjugate pairs (z-like, x-like) of full group elements,
    /// each trivial on every other sender's part.
    sender_pairs: Vec<Vec<(PauliOperator, PauliOperator)>>,
    /// Receiver-side conjugate pairs (full elements, no locality claim).
    tail_pairs: Vec<(PauliOperator, PauliOperator)>,
    /// Receiver-side commuting tail.
    tail_z: Vec<TailEntry>,
    /// Elements with identity restriction on the receiver part.
    silent: Vec<PauliOperator>,
}

impl Decomposition {
    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Per-sender capacities `(a_1, ..., a_m)`.
    pub fn capacities(&self) -> Vec<usize> {
        self.sender_pairs.iter().map(|p| p.len()).collect()
    }

    pub fn total_capacity(&self) -> usize {
        self.sender_pairs.iter().map(|p| p.len()).sum()
    }

    pub fn sender_pairs(&self) -> &[Vec<(PauliOperator, PauliOperator)>] {
        &self.sender_pairs
    }

    pub fn tail_pairs(&self) -> &[(PauliOperator, PauliOperator)] {
        &self.tail_pairs
    }

    pub fn tail_z(&self) -> &[TailEntry] {
        &self.tail_z
    }

    pub fn silent(&self) -> &[PauliOperator] {
        &self.silent
    }

    /// Canonical pattern of the receiver-side subgroup's restriction
    /// (pairs there are reported as paired tail entries, not capacity).
    pub fn receiver_pattern(&self) -> CanonicalPattern {
        let u = self.tail_pairs.len();
        let mut z_tail: Vec<u64> = vec![1; u];
        z_tail.extend(self.tail_z.iter().map(|t| t.exponent));
        CanonicalPattern {
            pairs: 0,
            z_tail,
            x_tail: vec![1; u],
        }
    }

    /// Pattern of the whole receiver restriction: capacity pairs count as
    /// full conjugate pairs, the receiver-side subgroup supplies the tail.
    pub fn full_pattern(&self) -> CanonicalPattern {
        let mut p = self.receiver_pattern();
        p.pairs = self.total_capacity();
        p
    }

    /// All arranged generators: sender pairs in sender order, then receiver
    /// pairs, tail, and silent elements. Together they generate the group.
    pub fn arranged_elements(&self) -> Vec<PauliOperator> {
        let mut out = Vec::new();
        for pairs in &self.sender_pairs {
            for (z, x) in pairs {
                out.push(z.clone());
                out.push(x.clone());
            }
        }
        for (z, x) in &self.tail_pairs {
            out.push(z.clone());
            out.push(x.clone());
        }
        for t in &self.tail_z {
            out.push(t.element.clone());
        }
        out.extend(self.silent.iter().cloned());
        out
    }

    /// The full receiver-restriction witness for unitary synthesis:
    /// z-bases for the `b` capacity pairs, the paired tail, and the
    /// unpaired tail; x-bases for capacity pairs and paired tail.
    ///
    /// Each pair witness carries its parent element's γ exponent on top of
    /// the (phase-free) restriction, so that downstream calibration can
    /// keep the sender-side factors as phase-light as possible.
    pub fn receiver_witness(&self) -> Result<PatternWitness, DecompositionError> {
        let rec = self.partition.receiver();
        let attach = |el: &PauliOperator| -> Result<PauliOperator, PauliError> {
            Ok(el.restrict(rec)?.with_phase_shift(el.phase() as i64))
        };
        let mut z_ops = Vec::new();
        let mut x_ops = Vec::new();
        for pairs in &self.sender_pairs {
            for (z, x) in pairs {
                z_ops.push(attach(z)?);
                x_ops.push(attach(x)?);
            }
        }
        for (z, x) in &self.tail_pairs {
            z_ops.push(attach(z)?);
            x_ops.push(attach(x)?);
        }
        for t in &self.tail_z {
            z_ops.push(t.base.clone());
        }
        Ok(PatternWitness { z_ops, x_ops })
    }

    /// Re-verify the decomposition from scratch against the group it
    /// claims to arrange: membership, generation, sender locality, and the
    /// canonical commutation structure of the receiver restrictions.
    pub fn verify(&self, group: &StabilizerGroup) -> Result<(), DecompositionError> {
        let fail = |detail: String| Err(DecompositionError::VerificationFailed { detail });
        let arranged = self.arranged_elements();
        if arranged.len() != group.generator_count() {
            return fail(format!(
                "arranged {} elements for a rank-{} group",
                arranged.len(),
                group.generator_count()
            ));
        }
        for (i, el) in arranged.iter().enumerate() {
            if group.is_member(el)?.is_none() {
                return fail(format!("arranged element {i} is not in the group"));
            }
        }
        // the arranged set must itself be a valid generating set: same
        // count plus trivial exact kernel ⟹ it generates the whole group
        StabilizerGroup::new(group.dim(), group.qudits(), arranged.clone())
            .map_err(|e| DecompositionError::VerificationFailed {
                detail: format!("arranged elements are not independent: {e}"),
            })?;
        // sender locality
        let m = self.partition.sender_count();
        for (i, pairs) in self.sender_pairs.iter().enumerate() {
            for (z, x) in pairs {
                for j in 0..m {
                    if j == i {
                        continue;
                    }
                    let other = self.partition.sender(j);
                    for el in [z, x] {
                        if !el.restrict(other)?.has_trivial_action() {
                            return fail(format!(
                                "sender {i} pair element acts on sender {j}'s part"
                            ));
                        }
                    }
                }
            }
        }
        // silent elements must restrict to the identity on the receiver
        let rec = self.partition.receiver();
        for (i, el) in self.silent.iter().enumerate() {
            if !el.restrict(rec)?.has_trivial_action() {
                return fail(format!("silent element {i} acts on the receiver part"));
            }
        }
        // tail bases realize the tail restrictions
        for (i, t) in self.tail_z.iter().enumerate() {
            let restr = t.element.restrict(rec)?;
            if t.base.power(t.exponent).without_phase() != restr {
                return fail(format!("tail base {i} does not reproduce its restriction"));
            }
            if restr.has_trivial_action() {
                return fail(format!("tail entry {i} restricts to the identity"));
            }
        }
        // canonical commutation structure of the full witness
        self.receiver_witness()?.verify_relations()?;
        Ok(())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn modinv(a: u64, m: u64) -> Option<u64> {
    let mut t: (i128, i128) = (0, 1);
    let mut r: (i128, i128) = (m as i128, (a % m) as i128);
    while r.1 != 0 {
        let q = r.0 / r.1;
        t = (t.1, t.0 - q * t.1);
        r = (r.1, r.0 - q * r.1);
    }
    if r.0 != 1 {
        return None;
    }
    Some(t.0.rem_euclid(m as i128) as u64)
}

/// Commutation exponent of the restrictions of two full elements.
fn comm_on(a: &PauliOperator, b: &PauliOperator, sites: &[usize]) -> Result<u64, PauliError> {
    a.restrict(sites)?.commutation_exponent(&b.restrict(sites)?)
}

/// Greedy unit-pivot pair extraction from `pool` (indices into `items`),
/// sweeping the rest of the pool so its restrictions commute with the
/// extracted pair. Items are full group elements, mutated in place.
fn extract_pairs_from_pool(
    items: &mut [PauliOperator],
    used: &mut [bool],
    pool: &[usize],
    sites: &[usize],
    dim: u64,
) -> Result<Vec<(PauliOperator, PauliOperator)>, DecompositionError> {
    let mut pairs = Vec::new();
    loop {
        let active: Vec<usize> = pool.iter().copied().filter(|&i| !used[i]).collect();
        let mut found: Option<(usize, usize, u64)> = None;
        'outer: for (ai, &p) in active.iter().enumerate() {
            for &q in active.iter().skip(ai + 1) {
                let c = comm_on(&items[p], &items[q], sites)?;
                if c != 0 && gcd(c, dim) == 1 {
                    found = Some((p, q, c));
                    break 'outer;
                }
            }
        }
        let Some((p, q, c)) = found else {
            return Ok(pairs);
        };
        let z = items[p].clone();
        // normalize the partner so that comm(z, x) = 1 on the restriction
        let inv = modinv(c, dim).expect("unit pivot");
        let x = items[q].power(inv);
        used[p] = true;
        used[q] = true;
        for &r in &active {
            if r == p || r == q {
                continue;
            }
            sweep(items, r, &z, &x, sites, dim)?;
        }
        pairs.push((z, x));
    }
}

/// Multiply `items[r]` by powers of the pair so its restriction commutes
/// with both pair restrictions.
fn sweep(
    items: &mut [PauliOperator],
    r: usize,
    z: &PauliOperator,
    x: &PauliOperator,
    sites: &[usize],
    dim: u64,
) -> Result<(), DecompositionError> {
    let a = comm_on(&items[r], x, sites)?;
    let b = comm_on(&items[r], z, sites)?;
    if a != 0 {
        items[r] = items[r].multiply(&z.power(dim - a))?;
    }
    if b != 0 {
        items[r] = items[r].multiply(&x.power(b))?;
    }
    debug_assert_eq!(comm_on(&items[r], z, sites)?, 0);
    debug_assert_eq!(comm_on(&items[r], x, sites)?, 0);
    Ok(())
}

/// Organize leftover (already swept) elements into an independent
/// commuting Z-tail plus elements with identity restriction.
fn organize_tail(
    leftover: Vec<PauliOperator>,
    sites: &[usize],
    dim: u64,
) -> Result<(Vec<TailEntry>, Vec<PauliOperator>), DecompositionError> {
    let mut tail: Vec<TailEntry> = Vec::new();
    let mut silent: Vec<PauliOperator> = Vec::new();
    // leftover restrictions must commute pairwise at this stage
    for i in 0..leftover.len() {
        for j in i + 1..leftover.len() {
            let e = comm_on(&leftover[i], &leftover[j], sites)?;
            if e != 0 {
                return Err(DecompositionError::NoncommutingTail {
                    first: i,
                    second: j,
                    exponent: e,
                });
            }
        }
    }
    for mut el in leftover {
        // reduce against the current tail to keep restrictions independent
        loop {
            let restr = el.restrict(sites)?;
            if restr.has_trivial_action() {
                silent.push(el);
                break;
            }
            if tail.is_empty() {
                tail.push(make_tail_entry(el, restr, dim)?);
                break;
            }
            let rows: Vec<ResidueVector> = tail
                .iter()
                .map(|t| t.element.restrict(sites).map(|r| r.exponent_row()))
                .collect::<Result<Vec<_>, _>>()?;
            let width = 2 * sites.len();
            let tableau = ResidueMatrix::new(dim, width, rows)?;
            match tableau.solve_combination(&restr.exponent_row())? {
                Some(coeffs) => {
                    // cancel the restriction exactly; the element moves to
                    // the silent bucket on the next iteration
                    for (t, &c) in tail.iter().zip(coeffs.entries()) {
                        if c != 0 {
                            el = el.multiply(&t.element.power(dim - c))?;
                        }
                    }
                }
                None => {
                    tail.push(make_tail_entry(el, restr, dim)?);
                    break;
                }
            }
        }
    }
    // the tail restrictions must be independent in the exact (module)
    // sense, or the downstream eigenbasis construction degenerates; over a
    // composite modulus "outside the span" does not guarantee this
    if !tail.is_empty() {
        let rows: Vec<ResidueVector> = tail
            .iter()
            .map(|t| t.element.restrict(sites).map(|r| r.exponent_row()))
            .collect::<Result<Vec<_>, _>>()?;
        let tableau = ResidueMatrix::new(dim, 2 * sites.len(), rows)?;
        if tableau.combination_kernel_basis().row_count() > 0 {
            return Err(DecompositionError::CompositeTailUnsupported {
                detail: String::from("tail restrictions carry a nontrivial relation"),
            });
        }
    }
    Ok((tail, silent))
}

/// Express one commuting tail restriction as `base^exponent` with a base
/// of full order. Trivial for prime `d` (exponent 1); best-effort for
/// composite `d`.
fn make_tail_entry(
    element: PauliOperator,
    restriction: PauliOperator,
    dim: u64,
) -> Result<TailEntry, DecompositionError> {
    let order = restriction.order_up_to_phase();
    if order == dim {
        return Ok(TailEntry {
            exponent: 1,
            base: restriction,
            element,
        });
    }
    // restriction = base^(d/order): divide every exponent by d/order
    let a = dim / order;
    let xs: Vec<i64> = restriction.x_exp().iter().map(|&v| (v / a) as i64).collect();
    let zs: Vec<i64> = restriction.z_exp().iter().map(|&v| (v / a) as i64).collect();
    if restriction
        .x_exp()
        .iter()
        .chain(restriction.z_exp())
        .any(|&v| v % a != 0)
    {
        return Err(DecompositionError::CompositeTailUnsupported {
            detail: format!("restriction {restriction} is not an {a}-th power"),
        });
    }
    let base = PauliOperator::new(dim, 0, &xs, &zs)?;
    if base.order_up_to_phase() != dim {
        return Err(DecompositionError::CompositeTailUnsupported {
            detail: format!("no full-order base found for {restriction}"),
        });
    }
    Ok(TailEntry {
        exponent: a,
        base,
        element,
    })
}

/// Search for a decomposition of `group` with respect to `partition`
/// (receiver part last). Capacities are the per-sender conjugate pair
/// counts; zero capacity is a valid result, not a failure.
pub fn find_multipartite_decomposition(
    group: &StabilizerGroup,
    partition: &Partition,
) -> Result<Decomposition, DecompositionError> {
    if partition.qudits() != group.qudits() {
        return Err(DecompositionError::BadPartition {
            reason: format!(
                "partition covers {} sites, group has {}",
                partition.qudits(),
                group.qudits()
            ),
        });
    }
    let dim = group.dim();
    let rec = partition.receiver();
    let m = partition.sender_count();
    let mut items: Vec<PauliOperator> = group.generators().to_vec();
    let mut used = vec![false; items.len()];
    let mut sender_pairs = Vec::with_capacity(m);
    for i in 0..m {
        // candidates: trivial on every other sender's part
        let mut pool = Vec::new();
        'cand: for (j, item) in items.iter().enumerate() {
            if used[j] {
                continue;
            }
            for l in 0..m {
                if l != i && !item.restrict(partition.sender(l))?.has_trivial_action() {
                    continue 'cand;
                }
            }
            pool.push(j);
        }
        let pairs = extract_pairs_from_pool(&mut items, &mut used, &pool, rec, dim)?;
        sender_pairs.push(pairs);
    }
    // everything unused forms the receiver-side subgroup; sweep it clean
    // against every extracted pair, then organize internally
    let mut leftover: Vec<usize> = (0..items.len()).filter(|&j| !used[j]).collect();
    for &r in &leftover {
        for pairs in &sender_pairs {
            for (z, x) in pairs.clone() {
                sweep(&mut items, r, &z, &x, rec, dim)?;
            }
        }
    }
    let tail_pairs = extract_pairs_from_pool(&mut items, &mut used, &leftover, rec, dim)?;
    leftover.retain(|&j| !used[j]);
    let leftover_items: Vec<PauliOperator> = leftover.iter().map(|&j| items[j].clone()).collect();
    let (tail_z, silent) = organize_tail(leftover_items, rec, dim)?;
    let decomposition = Decomposition {
        dim,
        partition: partition.clone(),
        sender_pairs,
        tail_pairs,
        tail_z,
        silent,
    };
    decomposition.verify(group)?;
    Ok(decomposition)
}

/// Bipartite special case: one sender holding the complement of the
/// receiver sites. Identical to the general search with `m = 1`.
pub fn find_bipartite_decomposition(
    group: &StabilizerGroup,
    receiver_sites: &[usize],
) -> Result<Decomposition, DecompositionError> {
    let mut rec = receiver_sites.to_vec();
    rec.sort_unstable();
    let sender: Vec<usize> = (0..group.qudits()).filter(|s| !rec.contains(s)).collect();
    let partition = Partition::new(group.qudits(), vec![sender, rec])?;
    find_multipartite_decomposition(group, &partition)
}

/// Certify a user-supplied grouping of generator indices as a
/// decomposition: `groups[i]` lists the (0-based) generators of the
/// sender-`i` subgroup, the last entry those of the receiver-side
/// subgroup. Pair extraction runs inside each group; receiver-side
/// elements are swept against the sender pairs before organization.
pub fn certify_decomposition(
    group: &StabilizerGroup,
    partition: &Partition,
    groups: &[Vec<usize>],
) -> Result<Decomposition, DecompositionError> {
    let m = partition.sender_count();
    if groups.len() != m + 1 {
        return Err(DecompositionError::CertificationFailed {
            detail: format!("{} index groups for {} parts", groups.len(), m + 1),
        });
    }
    let k = group.generator_count();
    let mut seen = vec![false; k];
    for g in groups {
        for &idx in g {
            if idx >= k {
                return Err(DecompositionError::CertificationFailed {
                    detail: format!("generator index {idx} out of range"),
                });
            }
            if seen[idx] {
                return Err(DecompositionError::CertificationFailed {
                    detail: format!("generator index {idx} used twice"),
                });
            }
            seen[idx] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(DecompositionError::CertificationFailed {
            detail: String::from("index groups must cover every generator"),
        });
    }
    let dim = group.dim();
    let rec = partition.receiver();
    let mut items: Vec<PauliOperator> = group.generators().to_vec();
    let mut used = vec![false; k];
    let mut sender_pairs = Vec::with_capacity(m);
    for (i, idxs) in groups.iter().take(m).enumerate() {
        for &idx in idxs {
            for l in 0..m {
                if l != i && !items[idx].restrict(partition.sender(l))?.has_trivial_action() {
                    return Err(DecompositionError::CertificationFailed {
                        detail: format!(
                            "generator {idx} of sender {i}'s subgroup acts on sender {l}'s part"
                        ),
                    });
                }
            }
        }
        let pairs = extract_pairs_from_pool(&mut items, &mut used, idxs, rec, dim)?;
        // whatever remains unpaired in a sender group must be silent on the
        // receiver, otherwise the restriction cannot be a full Pauli group
        for &idx in idxs {
            if !used[idx] && !items[idx].restrict(rec)?.has_trivial_action() {
                return Err(DecompositionError::CertificationFailed {
                    detail: format!(
                        "generator {idx} of sender {i}'s subgroup is unpaired but acts on the receiver"
                    ),
                });
            }
        }
        sender_pairs.push(pairs);
    }
    let mut leftover: Vec<usize> = (0..k).filter(|&j| !used[j]).collect();
    for &r in &leftover {
        for pairs in &sender_pairs {
            for (z, x) in pairs.clone() {
                sweep(&mut items, r, &z, &x, rec, dim)?;
            }
        }
    }
    let tail_pairs = extract_pairs_from_pool(&mut items, &mut used, &leftover, rec, dim)?;
    leftover.retain(|&j| !used[j]);
    let leftover_items: Vec<PauliOperator> = leftover.iter().map(|&j| items[j].clone()).collect();
    let (tail_z, silent) = organize_tail(leftover_items, rec, dim)?;
    let decomposition = Decomposition {
        dim,
        partition: partition.clone(),
        sender_pairs,
        tail_pairs,
        tail_z,
        silent,
    };
    decomposition
        .verify(group)
        .map_err(|e| DecompositionError::CertificationFailed {
            detail: format!("{e}"),
        })?;
    Ok(decomposition)
}

/// Certify that a restricted group realizes a requested canonical pattern,
/// returning base-operator witnesses arranged pattern-first (capacity
/// pairs, then paired tail, then unpaired tail).
pub fn certify_pattern(
    restricted: &RestrictedGroup,
    pattern: &CanonicalPattern,
) -> Result<Option<PatternWitness>, DecompositionError> {
    let dim = restricted.dim();
    let sites: Vec<usize> = (0..restricted.qudits()).collect();
    let mut items: Vec<PauliOperator> = restricted.generators().to_vec();
    let mut used = vec![false; items.len()];
    let pool: Vec<usize> = (0..items.len()).collect();
    let pairs = extract_pairs_from_pool(&mut items, &mut used, &pool, &sites, dim)?;
    let leftover: Vec<PauliOperator> = (0..items.len())
        .filter(|&j| !used[j])
        .map(|j| items[j].clone())
        .collect();
    let (tail, _) = match organize_tail(leftover, &sites, dim) {
        Ok(t) => t,
        Err(DecompositionError::NoncommutingTail { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    // match the derived organization against the requested pattern
    let u = pattern.x_tail.len();
    let s = pattern.z_tail.len();
    if u > s {
        return Err(DecompositionError::BadPattern {
            reason: String::from("pattern requires u <= s"),
        });
    }
    if pattern.pairs + u != pairs.len() || s - u != tail.len() {
        return Ok(None);
    }
    // paired tail slots must be unit-exponent conjugate pairs
    if pattern.z_tail[..u].iter().any(|&a| a != 1) || pattern.x_tail.iter().any(|&b| b != 1) {
        return Ok(None);
    }
    let mut want_unpaired: Vec<u64> = pattern.z_tail[u..].to_vec();
    let mut have_unpaired: Vec<u64> = tail.iter().map(|t| t.exponent).collect();
    want_unpaired.sort_unstable();
    have_unpaired.sort_unstable();
    if want_unpaired != have_unpaired {
        return Ok(None);
    }
    let mut z_ops: Vec<PauliOperator> = pairs.iter().map(|(z, _)| z.clone()).collect();
    let mut x_ops: Vec<PauliOperator> = pairs.iter().map(|(_, x)| x.clone()).collect();
    z_ops.extend(tail.iter().map(|t| t.base.clone()));
    x_ops.truncate(pattern.pairs + u);
    let witness = PatternWitness { z_ops, x_ops };
    witness.verify_relations()?;
    Ok(Some(witness))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example2_group() -> StabilizerGroup {
        StabilizerGroup::parse(
            3,
            5,
            &[
                "X X^2 X Z Z",
                "Z^2 Z I X I",
                "Z Z Z I X",
                "X X Z X Z^2",
                "I I Z^2 X^2 I",
            ],
        )
        .unwrap()
    }

    fn example3_group() -> StabilizerGroup {
        StabilizerGroup::parse(
            2,
            8,
            &[
                "X Y I I I Z Y I",
                "X Z I I I X Y I",
                "I I Z Y Z I Y X",
                "I I Z I X I Y Z",
                "I I Z Z X Y X Y",
                "I I X X Z Y Z Y",
                "Z X I Z X I I I",
            ],
        )
        .unwrap()
    }

    #[test]
    fn bell_state_has_unit_capacity() {
        for d in [2u64, 3, 5] {
            let s = StabilizerGroup::parse(d, 2, &["Z^-1 Z", "X X"]).unwrap();
            let dec = find_bipartite_decomposition(&s, &[1]).unwrap();
            assert_eq!(dec.capacities(), vec![1]);
            assert!(dec.tail_z().is_empty());
            assert!(dec.tail_pairs().is_empty());
            assert_eq!(dec.full_pattern().pairs, 1);
        }
    }

    #[test]
    fn example2_capacity_two_with_z_tail() {
        let s = example2_group();
        let dec = find_bipartite_decomposition(&s, &[2, 3, 4]).unwrap();
        assert_eq!(dec.capacities(), vec![2]);
        let pattern = dec.full_pattern();
        assert_eq!(pattern.pairs, 2);
        assert_eq!(pattern.z_tail, vec![1]);
        assert!(pattern.x_tail.is_empty());
        // expected split: pairs from g1..g4, the tail from g5
        let g = s.generators();
        assert_eq!(dec.sender_pairs()[0][0].0, g[0]);
        assert_eq!(dec.sender_pairs()[0][0].1, g[1]);
        assert_eq!(dec.sender_pairs()[0][1].0, g[2]);
        assert_eq!(dec.sender_pairs()[0][1].1, g[3]);
        assert_eq!(dec.tail_z().len(), 1);
    }

    #[test]
    fn product_state_has_zero_capacity() {
        let s = StabilizerGroup::parse(3, 2, &["Z I", "I Z"]).unwrap();
        let dec = find_bipartite_decomposition(&s, &[1]).unwrap();
        assert_eq!(dec.capacities(), vec![0]);
        assert_eq!(dec.tail_z().len(), 1);
        assert_eq!(dec.silent().len(), 1);
    }

    #[test]
    fn example3_first_partition_reaches_one_two() {
        let s = example3_group();
        let partition = Partition::new(8, vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7]]).unwrap();
        let dec = find_multipartite_decomposition(&s, &partition).unwrap();
        assert_eq!(dec.capacities(), vec![1, 2]);
        // receiver-side subgroup is generated by the (swept) g7 alone and
        // its restriction to {5,6,7} is the identity
        assert_eq!(dec.tail_pairs().len(), 0);
        assert_eq!(dec.tail_z().len(), 0);
        assert_eq!(dec.silent().len(), 1);
    }

    #[test]
    fn example3_second_partition_reaches_one_one() {
        let s = example3_group();
        let partition =
            Partition::new(8, vec![vec![0, 5], vec![2, 7], vec![1, 3, 4, 6]]).unwrap();
        let dec = find_multipartite_decomposition(&s, &partition).unwrap();
        assert_eq!(dec.capacities(), vec![1, 1]);
        // the receiver-side subgroup realizes <γ, Z_1, X_1, Z_2>
        let pattern = dec.receiver_pattern();
        assert_eq!(pattern.z_tail, vec![1, 1]);
        assert_eq!(pattern.x_tail, vec![1]);
    }

    #[test]
    fn degenerate_multipartite_matches_bipartite() {
        let s = example2_group();
        let partition = Partition::new(5, vec![vec![0, 1], vec![2, 3, 4]]).unwrap();
        let multi = find_multipartite_decomposition(&s, &partition).unwrap();
        let bi = find_bipartite_decomposition(&s, &[2, 3, 4]).unwrap();
        assert_eq!(multi.capacities(), bi.capacities());
        assert_eq!(
            multi.receiver_pattern(),
            bi.receiver_pattern()
        );
    }

    #[test]
    fn certify_pattern_on_example2_restriction() {
        let s = example2_group();
        let r = s.restrict(&[2, 3, 4]).unwrap();
        let pattern = CanonicalPattern::new(2, vec![1], vec![]).unwrap();
        let witness = certify_pattern(&r, &pattern).unwrap().expect("certifiable");
        assert_eq!(witness.z_ops.len(), 3);
        assert_eq!(witness.x_ops.len(), 2);
        // expected witness: restrictions of g1..g5 in order
        let gens = r.generators();
        assert_eq!(witness.z_ops[0], gens[0]);
        assert_eq!(witness.x_ops[0], gens[1]);
        assert_eq!(witness.z_ops[1], gens[2]);
        assert_eq!(witness.x_ops[1], gens[3]);
        assert_eq!(witness.z_ops[2], gens[4]);
        // a wrong pattern is rejected, not an error
        let wrong = CanonicalPattern::new(1, vec![1], vec![]).unwrap();
        assert!(certify_pattern(&r, &wrong).unwrap().is_none());
    }

    #[test]
    fn certify_pattern_trivial_group() {
        let s = StabilizerGroup::new(4, 2, alloc::vec::Vec::new()).unwrap();
        let r = s.restrict(&[0]).unwrap();
        let witness = certify_pattern(&r, &CanonicalPattern::trivial())
            .unwrap()
            .expect("trivial pattern");
        assert!(witness.z_ops.is_empty());
        assert!(witness.x_ops.is_empty());
    }

    #[test]
    fn certify_pattern_example3_receiver_part() {
        // transformed generators g'_5, g'_6, g'_7 restricted to the second
        // partition's receiver part realize <γ, Z_1, X_1, Z_2>
        let s = example3_group();
        let g = s.generators();
        let g5p = g[0]
            .multiply(&g[1])
            .unwrap()
            .multiply(&g[2])
            .unwrap()
            .multiply(&g[3])
            .unwrap()
            .multiply(&g[4])
            .unwrap();
        let g6p = g[0].multiply(&g[1]).unwrap().multiply(&g[5]).unwrap();
        let g7p = g[0].multiply(&g[1]).unwrap().multiply(&g[6]).unwrap();
        let rec = [1usize, 3, 4, 6];
        let p3 = StabilizerGroup::new(2, 8, alloc::vec![g5p, g6p, g7p]).unwrap();
        let r = p3.restrict(&rec).unwrap();
        let pattern = CanonicalPattern::new(0, vec![1, 1], vec![1]).unwrap();
        let witness = certify_pattern(&r, &pattern).unwrap().expect("certifiable");
        assert_eq!(witness.z_ops.len(), 2);
        assert_eq!(witness.x_ops.len(), 1);
        witness.verify_relations().unwrap();
    }

    #[test]
    fn receiver_parts_certify_against_reported_patterns() {
        // the restricted receiver-side subgroup of every fixture search
        // result must certify against the pattern the search reported,
        // through the independent certify_pattern code path
        let cases: [(StabilizerGroup, Vec<Vec<usize>>); 3] = [
            (example2_group(), vec![vec![0, 1], vec![2, 3, 4]]),
            (
                example3_group(),
                vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7]],
            ),
            (
                example3_group(),
                vec![vec![0, 5], vec![2, 7], vec![1, 3, 4, 6]],
            ),
        ];
        for (group, parts) in cases {
            let partition = Partition::new(group.qudits(), parts).unwrap();
            let dec = find_multipartite_decomposition(&group, &partition).unwrap();
            // receiver-side subgroup: tail pairs, tail entries, silents
            let mut gens: Vec<PauliOperator> = Vec::new();
            for (z, x) in dec.tail_pairs() {
                gens.push(z.clone());
                gens.push(x.clone());
            }
            gens.extend(dec.tail_z().iter().map(|t| t.element.clone()));
            gens.extend(dec.silent().iter().cloned());
            let part_group =
                StabilizerGroup::new(group.dim(), group.qudits(), gens).unwrap();
            let restricted = part_group.restrict(partition.receiver()).unwrap();
            let witness = certify_pattern(&restricted, &dec.receiver_pattern())
                .unwrap()
                .expect("search result must certify");
            witness.verify_relations().unwrap();
        }
    }

    #[test]
    fn user_supplied_decomposition_certifies() {
        let s = example3_group();
        let partition = Partition::new(8, vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7]]).unwrap();
        let groups = vec![vec![0, 1], vec![2, 3, 4, 5], vec![6]];
        let dec = certify_decomposition(&s, &partition, &groups).unwrap();
        assert_eq!(dec.capacities(), vec![1, 2]);
        // overlapping groups are rejected
        let bad = vec![vec![0, 1], vec![1, 2, 3, 4, 5], vec![6]];
        assert!(matches!(
            certify_decomposition(&s, &partition, &bad),
            Err(DecompositionError::CertificationFailed { .. })
        ));
        // a sender group that acts on another sender's part fails
        let misplaced = vec![vec![2, 3], vec![0, 1, 4, 5], vec![6]];
        assert!(matches!(
            certify_decomposition(&s, &partition, &misplaced),
            Err(DecompositionError::CertificationFailed { .. })
        ));
    }

    #[test]
    fn verify_rejects_tampered_decomposition() {
        let s = example2_group();
        let mut dec = find_bipartite_decomposition(&s, &[2, 3, 4]).unwrap();
        // drop one pair: the arranged set no longer generates the group
        dec.sender_pairs[0].pop();
        assert!(dec.verify(&s).is_err());
    }

    #[test]
    fn composite_modulus_non_unit_pivot_is_reported() {
        // d = 4: the two restrictions to site 2 are Z and X²Z, whose
        // commutation exponent 2 is a zero divisor; unit-pivot extraction
        // cannot pair them and the tail stage reports it
        let s = StabilizerGroup::parse(4, 2, &["X Z", "Z^2 X^2Z"]).unwrap();
        let err = find_bipartite_decomposition(&s, &[1]).unwrap_err();
        assert!(matches!(
            err,
            DecompositionError::NoncommutingTail { exponent: 2, .. }
        ));
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, vec![vec![0], vec![1, 2]]).is_ok());
        assert!(matches!(
            Partition::new(3, vec![vec![0, 1, 2]]),
            Err(DecompositionError::BadPartition { .. })
        ));
        assert!(matches!(
            Partition::new(3, vec![vec![0], vec![1]]),
            Err(DecompositionError::BadPartition { .. })
        ));
        assert!(matches!(
            Partition::new(3, vec![vec![0, 1], vec![1, 2]]),
            Err(DecompositionError::BadPartition { .. })
        ));
        let p = Partition::with_receiver(4, vec![vec![0], vec![1, 3], vec![2]], 1).unwrap();
        assert_eq!(p.receiver(), &[1, 3]);
        assert_eq!(p.sender(0), &[0]);
        assert_eq!(p.sender(1), &[2]);
    }
}
