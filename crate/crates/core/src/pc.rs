//! Polycyclic presentations of finite p-groups and collection from the left.
//!
//! Generators are indexed 0..n internally and displayed 1-based as g1..gn.
//! Every presentation fixes one odd prime p; relations are g_i^p = (word in
//! later generators) and [g_j, g_i] = (word in generators past j) for j > i,
//! with [x, y] = x^-1 y^-1 x y. Omitted commutator relations are trivial.
//! Normal forms are words g1^e1 ... gn^en with 0 <= e < p. A presentation
//! whose overlap tests all pass presents a group of order exactly p^n.

use crate::fp_linalg::is_odd_prime;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PcError {
    #[error("prime {0} must be an odd prime below 2^16")]
    BadPrime(u32),
    #[error("generator count {0} too large for exact arithmetic")]
    TooManyGenerators(usize),
    #[error("generator index {index} out of range for {n} generators")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("exponent {exp} invalid where {context}")]
    BadExponent { exp: u32, context: String },
    #[error("relation {which} must be a normal word in strictly later generators")]
    RelationNotNormal { which: String },
    #[error("commutator key ({j},{i}) requires j > i within range")]
    BadCommutatorKey { j: usize, i: usize },
    #[error("inconsistent presentation: overlap {test} collects to {lhs} and {rhs}")]
    Inconsistent { test: String, lhs: String, rhs: String },
    #[error("group order {order} exceeds table cap {cap}")]
    CapExceeded { order: u128, cap: u128 },
    #[error("multiplication table for order {order} would exceed the memory bound")]
    TableTooLarge { order: u128 },
    #[error("subgroup is not normal: conjugate of member {member} by {by} falls outside")]
    NotNormal { member: u32, by: u32 },
    #[error("internal table verification failed: {0}")]
    Internal(String),
}

/// Word in the generators: ordered product of terms g_index^exp, exp >= 1.
/// The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    terms: Vec<(usize, u32)>,
}

impl Word {
    pub fn identity() -> Self {
        Word { terms: Vec::new() }
    }

    pub fn from_terms(terms: Vec<(usize, u32)>) -> Self {
        Word { terms }
    }

    pub fn single(gen: usize, exp: u32) -> Self {
        Word { terms: vec![(gen, exp)] }
    }

    pub fn terms(&self) -> &[(usize, u32)] {
        &self.terms
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn validate(&self, n: usize) -> Result<(), PcError> {
        for &(g, e) in &self.terms {
            if g >= n {
                return Err(PcError::IndexOutOfRange { index: g, n });
            }
            if e == 0 {
                return Err(PcError::BadExponent { exp: 0, context: "words require exponents >= 1".into() });
            }
        }
        Ok(())
    }

    /// Normal relation right-hand side: strictly increasing indices, all past
    /// `above`, exponents in 1..p.
    fn validate_normal_above(&self, above: usize, n: usize, p: u32) -> bool {
        let mut last: Option<usize> = None;
        for &(g, e) in &self.terms {
            if g <= above || g >= n || e == 0 || e >= p {
                return false;
            }
            if let Some(l) = last {
                if g <= l {
                    return false;
                }
            }
            last = Some(g);
        }
        true
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(g, e) in &self.terms {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if e == 1 {
                write!(f, "g{}", g + 1)?;
            } else {
                write!(f, "g{}^{}", g + 1, e)?;
            }
        }
        Ok(())
    }
}

/// Group element in collected normal form: exponent vector, entries in 0..p.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    exps: Vec<u32>,
}

impl Element {
    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn to_word(&self) -> Word {
        Word {
            terms: self
                .exps
                .iter()
                .enumerate()
                .filter(|&(_, &e)| e != 0)
                .map(|(g, &e)| (g, e))
                .collect(),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_word().fmt(f)
    }
}

/// One failed overlap test, with both collected sides.
#[derive(Debug, Clone)]
pub struct ConsistencyViolation {
    pub test: String,
    pub lhs: Element,
    pub rhs: Element,
}

/// Finite p-group given by a consistent polycyclic presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcPresentation {
    p: u32,
    n: usize,
    powers: Vec<Word>,
    comms: BTreeMap<(usize, usize), Word>,
}

impl PcPresentation {
    pub fn new(
        p: u32,
        n: usize,
        powers: Vec<Word>,
        comms: BTreeMap<(usize, usize), Word>,
    ) -> Result<Self, PcError> {
        if !is_odd_prime(p) {
            return Err(PcError::BadPrime(p));
        }
        // keep p^n inside u128 so order arithmetic stays exact
        if n > 0 && (p as f64).log2() * n as f64 > 126.0 {
            return Err(PcError::TooManyGenerators(n));
        }
        if powers.len() != n {
            return Err(PcError::RelationNotNormal {
                which: format!("{} power relations for {} generators", powers.len(), n),
            });
        }
        for (i, w) in powers.iter().enumerate() {
            if !w.validate_normal_above(i, n, p) {
                return Err(PcError::RelationNotNormal { which: format!("g{}^{}", i + 1, p) });
            }
        }
        for (&(j, i), w) in &comms {
            if j <= i || j >= n {
                return Err(PcError::BadCommutatorKey { j, i });
            }
            if !w.validate_normal_above(j, n, p) {
                return Err(PcError::RelationNotNormal {
                    which: format!("[g{},g{}]", j + 1, i + 1),
                });
            }
        }
        // drop explicitly trivial commutators so presentations compare equal
        let comms = comms.into_iter().filter(|(_, w)| !w.is_identity()).collect();
        Ok(PcPresentation { p, n, powers, comms })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ngens(&self) -> usize {
        self.n
    }

    pub fn power_word(&self, i: usize) -> &Word {
        &self.powers[i]
    }

    pub fn comm_word(&self, j: usize, i: usize) -> Option<&Word> {
        self.comms.get(&(j, i))
    }

    pub fn comms(&self) -> &BTreeMap<(usize, usize), Word> {
        &self.comms
    }

    pub fn group_order(&self) -> u128 {
        (self.p as u128).pow(self.n as u32)
    }

    pub fn identity_element(&self) -> Element {
        Element { exps: vec![0; self.n] }
    }

    pub fn generator_element(&self, i: usize) -> Element {
        assert!(i < self.n);
        let mut exps = vec![0; self.n];
        exps[i] = 1;
        Element { exps }
    }

    pub fn element_from_exps(&self, exps: Vec<u32>) -> Result<Element, PcError> {
        if exps.len() != self.n {
            return Err(PcError::IndexOutOfRange { index: exps.len(), n: self.n });
        }
        if let Some(&e) = exps.iter().find(|&&e| e >= self.p) {
            return Err(PcError::BadExponent {
                exp: e,
                context: "normal form exponents lie in 0..p".into(),
            });
        }
        Ok(Element { exps })
    }

    /// Mixed-radix element index: g1 is the least significant digit, the
    /// identity is index 0.
    pub fn element_from_index(&self, mut m: usize) -> Element {
        let mut exps = vec![0u32; self.n];
        for e in exps.iter_mut() {
            *e = (m % self.p as usize) as u32;
            m /= self.p as usize;
        }
        debug_assert_eq!(m, 0);
        Element { exps }
    }

    pub fn index_of_element(&self, a: &Element) -> usize {
        let mut idx = 0usize;
        for &e in a.exps.iter().rev() {
            idx = idx * self.p as usize + e as usize;
        }
        idx
    }

    fn push_word_reversed(stack: &mut Vec<(usize, u32)>, w: &Word) {
        for &(g, e) in w.terms.iter().rev() {
            stack.push((g, e));
        }
    }

    /// Collection from the left. The invariant is that the current element
    /// equals (collected normal part c) * (stack read from top to bottom);
    /// each step absorbs the topmost pending letter into c.
    fn run_collection(&self, c: &mut [u32], stack: &mut Vec<(usize, u32)>) {
        while let Some((g, e)) = stack.pop() {
            if e > 1 {
                stack.push((g, e - 1));
            }
            // absorb a single copy of g
            match (g + 1..self.n).rev().find(|&k| c[k] != 0) {
                None => {
                    c[g] += 1;
                    if c[g] == self.p {
                        c[g] = 0;
                        Self::push_word_reversed(stack, &self.powers[g]);
                    }
                }
                Some(k) => {
                    // peel one g_k: c' g_k g = c' g g_k [g_k, g]
                    c[k] -= 1;
                    if let Some(w) = self.comms.get(&(k, g)) {
                        Self::push_word_reversed(stack, w);
                    }
                    stack.push((k, 1));
                    stack.push((g, 1));
                }
            }
        }
    }

    pub fn collect_word(&self, start: &Element, w: &Word) -> Element {
        debug_assert!(w.validate(self.n).is_ok());
        let mut c = start.exps.clone();
        let mut stack = Vec::with_capacity(w.terms.len() + 8);
        Self::push_word_reversed(&mut stack, w);
        self.run_collection(&mut c, &mut stack);
        Element { exps: c }
    }

    pub fn element_of_word(&self, w: &Word) -> Element {
        self.collect_word(&self.identity_element(), w)
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        self.collect_word(a, &b.to_word())
    }

    pub fn element_pow(&self, a: &Element, mut e: u128) -> Element {
        let mut acc = self.identity_element();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.multiply(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.multiply(&base, &base);
            }
        }
        acc
    }

    /// Inverse as a^(p^n - 1); meaningful once the presentation is consistent.
    pub fn element_inverse(&self, a: &Element) -> Element {
        self.element_pow(a, self.group_order() - 1)
    }

    /// All overlap tests whose two collections disagree. Empty means the
    /// presentation is consistent and the group has order exactly p^n.
    pub fn consistency_violations(&self) -> Vec<ConsistencyViolation> {
        let mut out = Vec::new();
        let gen = |i: usize| self.generator_element(i);
        let mut push = |test: String, lhs: Element, rhs: Element| {
            if lhs != rhs {
                out.push(ConsistencyViolation { test, lhs, rhs });
            }
        };
        let p = self.p as u128;
        for k in 0..self.n {
            for j in 0..k {
                for i in 0..j {
                    // g_k (g_j g_i) vs (g_k g_j) g_i
                    let lhs = self.multiply(&gen(k), &self.multiply(&gen(j), &gen(i)));
                    let rhs = self.multiply(&self.multiply(&gen(k), &gen(j)), &gen(i));
                    push(format!("g{} (g{} g{}) | (g{} g{}) g{}", k + 1, j + 1, i + 1, k + 1, j + 1, i + 1), lhs, rhs);
                }
            }
        }
        for j in 0..self.n {
            for i in 0..j {
                // g_j^p g_i vs g_j^(p-1) (g_j g_i)
                let lhs = self.multiply(&self.element_pow(&gen(j), p), &gen(i));
                let rhs = self.multiply(
                    &self.element_pow(&gen(j), p - 1),
                    &self.multiply(&gen(j), &gen(i)),
                );
                push(format!("g{j1}^p g{i1} | g{j1}^(p-1) (g{j1} g{i1})", j1 = j + 1, i1 = i + 1), lhs, rhs);
                // g_j g_i^p vs (g_j g_i) g_i^(p-1)
                let lhs = self.multiply(&gen(j), &self.element_pow(&gen(i), p));
                let rhs = self.multiply(
                    &self.multiply(&gen(j), &gen(i)),
                    &self.element_pow(&gen(i), p - 1),
                );
                push(format!("g{j1} g{i1}^p | (g{j1} g{i1}) g{i1}^(p-1)", j1 = j + 1, i1 = i + 1), lhs, rhs);
            }
        }
        for i in 0..self.n {
            // g_i^p g_i vs g_i g_i^p
            let pw = self.element_pow(&gen(i), p);
            let lhs = self.multiply(&pw, &gen(i));
            let rhs = self.multiply(&gen(i), &pw);
            push(format!("g{i1}^p g{i1} | g{i1} g{i1}^p", i1 = i + 1), lhs, rhs);
        }
        out
    }

    pub fn consistency_check(&self) -> Result<(), PcError> {
        match self.consistency_violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(PcError::Inconsistent {
                test: v.test,
                lhs: v.lhs.to_string(),
                rhs: v.rhs.to_string(),
            }),
        }
    }

    /// Full multiplication table. Fails on inconsistent presentations, on
    /// orders past `cap`, and on table sizes past the memory bound. The
    /// finished table is re-verified (identity, Latin square, two-sided
    /// inverses, associativity) before being returned.
    pub fn build_table(&self, cap: u128) -> Result<GroupTable, PcError> {
        self.consistency_check()?;
        let order128 = self.group_order();
        if order128 > cap {
            return Err(PcError::CapExceeded { order: order128, cap });
        }
        // mult alone is order^2 u32 cells; keep it under 2 GiB
        if order128 * order128 * 4 > (1u128 << 31) {
            return Err(PcError::TableTooLarge { order: order128 });
        }
        let order = order128 as usize;
        let n = self.n;
        let labels: Vec<Element> = (0..order).map(|m| self.element_from_index(m)).collect();

        // right multiplication by each generator, by direct collection
        let mut gen_mult = vec![0u32; order * n.max(1)];
        for (a, label) in labels.iter().enumerate() {
            for i in 0..n {
                let prod = self.multiply(label, &self.generator_element(i));
                gen_mult[a * n + i] = self.index_of_element(&prod) as u32;
            }
        }

        // column-by-column fill: b = g_j * rest with j the lowest nonzero
        // digit of b, so a*b = (a*g_j)*rest and column rest is already done
        let mut radix = vec![1usize; n.max(1)];
        for i in 1..n {
            radix[i] = radix[i - 1] * self.p as usize;
        }
        let mut mult = vec![0u32; order * order];
        for b in 0..order {
            if b == 0 {
                for a in 0..order {
                    mult[a * order] = a as u32;
                }
                continue;
            }
            let mut j = 0;
            while b / radix[j] % self.p as usize == 0 {
                j += 1;
            }
            let rest = b - radix[j];
            for a in 0..order {
                let ag = gen_mult[a * n + j] as usize;
                mult[a * order + b] = mult[ag * order + rest];
            }
        }

        // identity checks
        for x in 0..order {
            if mult[x] != x as u32 || mult[x * order] != x as u32 {
                return Err(PcError::Internal(format!("identity fails at {x}")));
            }
        }
        // Latin square rows/columns, and harvest inverses
        let mut inv = vec![u32::MAX; order];
        let mut seen = vec![false; order];
        for a in 0..order {
            seen.iter_mut().for_each(|s| *s = false);
            for b in 0..order {
                let ab = mult[a * order + b] as usize;
                if seen[ab] {
                    return Err(PcError::Internal(format!("row {a} repeats {ab}")));
                }
                seen[ab] = true;
                if ab == 0 {
                    inv[a] = b as u32;
                }
            }
        }
        for b in 0..order {
            seen.iter_mut().for_each(|s| *s = false);
            for a in 0..order {
                let ab = mult[a * order + b] as usize;
                if seen[ab] {
                    return Err(PcError::Internal(format!("column {b} repeats {ab}")));
                }
                seen[ab] = true;
            }
        }
        for a in 0..order {
            let i = inv[a] as usize;
            if mult[i * order + a] != 0 {
                return Err(PcError::Internal(format!("inverse of {a} is one-sided")));
            }
        }
        // associativity: exhaustive when feasible, otherwise a fixed sample
        let assoc = |x: usize, y: usize, z: usize| {
            mult[mult[x * order + y] as usize * order + z]
                == mult[x * order + mult[y * order + z] as usize]
        };
        if order <= 256 {
            for x in 0..order {
                for y in 0..order {
                    for z in 0..order {
                        if !assoc(x, y, z) {
                            return Err(PcError::Internal(format!(
                                "associativity fails at ({x},{y},{z})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut state = 0x243F_6A88_85A3_08D3u64;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as usize
            };
            for _ in 0..100_000 {
                let (x, y, z) = (next() % order, next() % order, next() % order);
                if !assoc(x, y, z) {
                    return Err(PcError::Internal(format!(
                        "associativity fails at ({x},{y},{z})"
                    )));
                }
            }
        }

        Ok(GroupTable { p: self.p, order, mult, inv, labels, n_radix: Some(n) })
    }
}

/// Fully materialized finite group: multiplication table plus labels that
/// point back at normal forms of the originating presentation.
#[derive(Debug, Clone)]
pub struct GroupTable {
    p: u32,
    order: usize,
    mult: Vec<u32>,
    inv: Vec<u32>,
    labels: Vec<Element>,
    // Some(n): indices are mixed-radix exponent vectors over n generators
    n_radix: Option<usize>,
}

/// Subgroup as a sorted list of element indices of the ambient table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    elems: Vec<u32>,
}

impl Subgroup {
    pub fn elems(&self) -> &[u32] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.elems.binary_search(&x).is_ok()
    }
}

/// Quotient table together with the projection from the ambient group.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub table: GroupTable,
    /// ambient index -> coset index
    pub projection: Vec<u32>,
    /// coset index -> ambient index of its chosen representative
    pub reps: Vec<u32>,
}

impl GroupTable {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mult[a as usize * self.order + b as usize]
    }

    #[inline]
    pub fn inv_of(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    pub fn label(&self, a: u32) -> &Element {
        &self.labels[a as usize]
    }

    pub fn labels(&self) -> &[Element] {
        &self.labels
    }

    /// Index of an exponent vector; only for tables in generator radix form.
    pub fn index_of_exps(&self, exps: &[u32]) -> Option<u32> {
        let n = self.n_radix?;
        if exps.len() != n {
            return None;
        }
        let mut idx = 0usize;
        for &e in exps.iter().rev() {
            if e >= self.p {
                return None;
            }
            idx = idx * self.p as usize + e as usize;
        }
        Some(idx as u32)
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut acc = 0u32;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }

    pub fn element_order(&self, a: u32) -> u64 {
        let mut x = a;
        let mut k = 1u64;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// x^-1 y^-1 x y
    pub fn commutator(&self, x: u32, y: u32) -> u32 {
        self.mul(self.mul(self.inv_of(x), self.inv_of(y)), self.mul(x, y))
    }

    /// by^-1 * a * by
    pub fn conjugate(&self, a: u32, by: u32) -> u32 {
        self.mul(self.mul(self.inv_of(by), a), by)
    }

    pub fn is_abelian(&self) -> bool {
        for a in 0..self.order as u32 {
            for b in 0..a {
                if self.mul(a, b) != self.mul(b, a) {
                    return false;
                }
            }
        }
        true
    }

    /// Subgroup generated by the given elements: orbit of the identity under
    /// right multiplication, which closes under inverses in a finite group.
    pub fn subgroup_closure(&self, gens: &[u32]) -> Subgroup {
        let mut in_set = vec![false; self.order];
        in_set[0] = true;
        let mut list = vec![0u32];
        let mut i = 0;
        while i < list.len() {
            let x = list[i];
            i += 1;
            for &g in gens {
                let y = self.mul(x, g);
                if !in_set[y as usize] {
                    in_set[y as usize] = true;
                    list.push(y);
                }
            }
        }
        list.sort_unstable();
        Subgroup { elems: list }
    }

    pub fn normal_closure(&self, gens: &[u32]) -> Subgroup {
        let mut gen_set: Vec<u32> = gens.to_vec();
        loop {
            let sub = self.subgroup_closure(&gen_set);
            let mut grew = false;
            for &s in &sub.elems {
                for g in 0..self.order as u32 {
                    let c = self.conjugate(s, g);
                    if !sub.contains(c) {
                        gen_set.push(c);
                        grew = true;
                    }
                }
            }
            if !grew {
                return sub;
            }
        }
    }

    /// Local multiplication table of a subgroup plus the local -> ambient map.
    pub fn subgroup_table(&self, s: &Subgroup) -> (GroupTable, Vec<u32>) {
        let m = s.elems.len();
        let local = |x: u32| s.elems.binary_search(&x).expect("closure violated") as u32;
        let mut mult = vec![0u32; m * m];
        for (a, &pa) in s.elems.iter().enumerate() {
            for (b, &pb) in s.elems.iter().enumerate() {
                mult[a * m + b] = local(self.mul(pa, pb));
            }
        }
        let inv = s.elems.iter().map(|&x| local(self.inv_of(x))).collect();
        let labels = s.elems.iter().map(|&x| self.labels[x as usize].clone()).collect();
        (
            GroupTable { p: self.p, order: m, mult, inv, labels, n_radix: None },
            s.elems.clone(),
        )
    }

    pub fn quotient(&self, nsub: &Subgroup) -> Result<Quotient, PcError> {
        for &s in &nsub.elems {
            for g in 0..self.order as u32 {
                if !nsub.contains(self.conjugate(s, g)) {
                    return Err(PcError::NotNormal { member: s, by: g });
                }
            }
        }
        let mut projection = vec![u32::MAX; self.order];
        let mut reps: Vec<u32> = Vec::new();
        for x in 0..self.order as u32 {
            if projection[x as usize] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(x);
            for &s in &nsub.elems {
                projection[self.mul(x, s) as usize] = id;
            }
        }
        let m = reps.len();
        let mut mult = vec![0u32; m * m];
        for a in 0..m {
            for b in 0..m {
                mult[a * m + b] = projection[self.mul(reps[a], reps[b]) as usize];
            }
        }
        let inv = reps.iter().map(|&r| projection[self.inv_of(r) as usize]).collect();
        let labels = reps.iter().map(|&r| self.labels[r as usize].clone()).collect();
        Ok(Quotient {
            table: GroupTable { p: self.p, order: m, mult, inv, labels, n_radix: None },
            projection,
            reps,
        })
    }
}
