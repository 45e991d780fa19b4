//! Verification suites: batch property checks over generated corpora.
//!
//! Each suite runs one property against many instances and returns a
//! `SuiteOutcome` with a per-instance record and a full witness for every
//! violation (presentation text, involution images, computed values), so a
//! failure is reproducible from the report alone. A violation is a finding,
//! not an error; suites only return `Err` when a computation itself breaks.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cohomology::{
    h2_compute, h2_eigensplit, h2_qpzp_dims, kunneth_h2_split, tate_h0_h1, CohomologyError, Dims,
    TateModule,
};
use crate::corpus::{generate, CorpusEntry, CorpusError, CorpusSpec, Family, InvolutionPolicy};
use crate::involution::InvolutionError;
use crate::pc::{PcError, PcPresentation, Word};
use crate::structure::{frattini, frattini_via_generators, structure_report, StructureError};
use crate::verdicts::rank_inequalities;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("corpus generation failed: {0}")]
    Corpus(#[from] CorpusError),
    #[error("presentation error: {0}")]
    Pc(#[from] PcError),
    #[error("involution error: {0}")]
    Involution(#[from] InvolutionError),
    #[error("structure computation failed: {0}")]
    Structure(#[from] StructureError),
    #[error("cohomology computation failed: {0}")]
    Cohomology(#[from] CohomologyError),
    #[error("{0}")]
    BadRequest(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceRecord {
    pub id: String,
    pub ok: bool,
    pub summary: String,
}

/// Full witness for one failed instance. `presentation` re-parses as a
/// presentation file; `sigma` lists the generator images.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub id: String,
    pub detail: String,
    pub presentation: String,
    pub sigma: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub description: String,
    pub passed: bool,
    pub instances_checked: usize,
    pub instances: Vec<InstanceRecord>,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl SuiteOutcome {
    fn new(suite: &str, description: &str) -> Self {
        SuiteOutcome {
            suite: suite.to_string(),
            description: description.to_string(),
            passed: true,
            instances_checked: 0,
            instances: Vec::new(),
            violations: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn seal(mut self) -> Self {
        self.instances_checked = self.instances.len();
        self.passed = self.passed && self.violations.is_empty();
        self
    }
}

/// Canonical text form of a presentation; one relation per line. The verify
/// report embeds this for every violation and the CLI echoes it back for
/// classified inputs, so the same renderer keeps round-trips byte-stable.
pub fn presentation_text(pres: &PcPresentation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "prime: {}", pres.p());
    let _ = writeln!(out, "ngens: {}", pres.ngens());
    for i in 0..pres.ngens() {
        let _ = writeln!(out, "power {}: {}", i + 1, pres.power_word(i));
    }
    for (&(j, i), w) in pres.comms() {
        let _ = writeln!(out, "comm {} {}: {}", j + 1, i + 1, w);
    }
    out
}

pub fn sigma_text(images: &[Word]) -> String {
    images.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", ")
}

fn violation_for(entry: &CorpusEntry, detail: String) -> Violation {
    Violation {
        id: entry.tag.clone(),
        detail,
        presentation: presentation_text(&entry.pres),
        sigma: sigma_text(&entry.action.images),
    }
}

/// Half-open ranges of consecutive entries sharing a presentation, so the
/// multiplication table (and any H^2 computation) is built once per group.
fn consecutive_blocks(entries: &[CorpusEntry]) -> Vec<(usize, usize)> {
    let mut blocks = Vec::new();
    let mut start = 0usize;
    for i in 1..=entries.len() {
        if i == entries.len() || entries[i].pres != entries[start].pres {
            blocks.push((start, i));
            start = i;
        }
    }
    blocks
}

struct BlockResult {
    instances: Vec<InstanceRecord>,
    violations: Vec<Violation>,
    witness: bool,
    skipped: usize,
}

fn merge_blocks(out: &mut SuiteOutcome, results: Vec<BlockResult>) -> (bool, usize) {
    let mut witness = false;
    let mut skipped = 0usize;
    for r in results {
        out.instances.extend(r.instances);
        out.violations.extend(r.violations);
        witness |= r.witness;
        skipped += r.skipped;
    }
    (witness, skipped)
}

/// Compare the brute-force signed H^2 dimensions against the closed-form
/// count from the signed generator ranks, over every elementary abelian
/// group of rank <= max_rank and every diagonal sign split.
pub fn run_kunneth(p: u32, max_rank: usize, brute_cap: usize) -> Result<SuiteOutcome, SuiteError> {
    let spec = CorpusSpec {
        p,
        max_order_exponent: max_rank,
        families: BTreeSet::from([Family::ElementaryAbelian]),
        involution_policy: InvolutionPolicy::AllDiagonal,
        seed: 0,
        random_attempts: 0,
    };
    let run = generate(&spec)?;
    let mut out = SuiteOutcome::new(
        "kunneth",
        "signed H^2 dimensions of elementary abelian groups match the closed-form count \
         d+ + C(d+,2) + C(d-,2) / d- + d+ d- for every diagonal involution",
    );
    let blocks = consecutive_blocks(&run.entries);
    let results: Result<Vec<BlockResult>, SuiteError> = blocks
        .par_iter()
        .map(|&(a, b)| {
            let pres = &run.entries[a].pres;
            let t = pres.build_table(pres.group_order())?;
            let comp = h2_compute(&t, brute_cap)?;
            let mut res = BlockResult {
                instances: Vec::new(),
                violations: Vec::new(),
                witness: false,
                skipped: 0,
            };
            for entry in &run.entries[a..b] {
                let act = &entry.action;
                let got = h2_eigensplit(&t, act, &comp)?;
                let want = kunneth_h2_split(act.d_plus, act.d_minus);
                let ok = got == want;
                res.instances.push(InstanceRecord {
                    id: entry.tag.clone(),
                    ok,
                    summary: format!(
                        "d = ({}, {}), brute h2 = ({}, {}), formula = ({}, {})",
                        act.d_plus, act.d_minus, got.plus, got.minus, want.plus, want.minus
                    ),
                });
                if !ok {
                    res.violations.push(violation_for(
                        entry,
                        format!(
                            "brute-force split ({}, {}) differs from formula ({}, {}) at d = ({}, {})",
                            got.plus, got.minus, want.plus, want.minus, act.d_plus, act.d_minus
                        ),
                    ));
                }
            }
            Ok(res)
        })
        .collect();
    merge_blocks(&mut out, results?);
    Ok(out.seal())
}

/// Every powerful corpus group whose involution has d+ = 0 must be abelian.
/// The corpus must also exhibit the hypothesis as non-vacuous: some
/// non-powerful, non-abelian member with d+ = 0.
pub fn run_prop21(spec: &CorpusSpec) -> Result<SuiteOutcome, SuiteError> {
    let run = generate(spec)?;
    let mut out = SuiteOutcome::new(
        "prop21",
        "powerful groups with involution acting trivially on no generator line \
         (d+ = 0) are abelian",
    );
    let blocks = consecutive_blocks(&run.entries);
    let results: Result<Vec<BlockResult>, SuiteError> = blocks
        .par_iter()
        .map(|&(a, b)| {
            let pres = &run.entries[a].pres;
            let t = pres.build_table(pres.group_order())?;
            let rep = structure_report(&t)?;
            let mut res = BlockResult {
                instances: Vec::new(),
                violations: Vec::new(),
                witness: false,
                skipped: 0,
            };
            for entry in &run.entries[a..b] {
                let d_plus = entry.action.d_plus;
                if !rep.powerful && !rep.abelian && d_plus == 0 {
                    res.witness = true;
                }
                let applicable = rep.powerful && d_plus == 0;
                let ok = !applicable || rep.abelian;
                res.instances.push(InstanceRecord {
                    id: entry.tag.clone(),
                    ok,
                    summary: format!(
                        "order {}, powerful {}, abelian {}, d+ = {}{}",
                        rep.order,
                        rep.powerful,
                        rep.abelian,
                        d_plus,
                        if applicable { "" } else { " (hypothesis not triggered)" }
                    ),
                });
                if !ok {
                    res.violations.push(violation_for(
                        entry,
                        format!(
                            "powerful group of order {} with d+ = 0 is not abelian",
                            rep.order
                        ),
                    ));
                }
            }
            Ok(res)
        })
        .collect();
    let (witness, _) = merge_blocks(&mut out, results?);
    out.notes.push(format!(
        "corpus: {} entries, {} involution candidates rejected, {} random rejections",
        run.entries.len(),
        run.involutions_rejected,
        run.random_rejected_inconsistent
    ));
    if witness {
        out.notes.push(
            "hypothesis witness present: a non-powerful, non-abelian member with d+ = 0".into(),
        );
    } else {
        out.notes.push(
            "hypothesis witness MISSING: no non-powerful, non-abelian member with d+ = 0".into(),
        );
        out.passed = false;
    }
    Ok(out.seal())
}

fn qpzp_of(
    t: &crate::pc::GroupTable,
    entry: &CorpusEntry,
    comp: &crate::cohomology::H2Computation,
) -> Result<(Dims, Dims, Dims), SuiteError> {
    let d = Dims::new(entry.action.d_plus, entry.action.d_minus);
    let h2 = h2_eigensplit(t, &entry.action, comp)?;
    let qp = h2_qpzp_dims(h2, d)?;
    Ok((d, h2, qp))
}

/// Both signed rank inequalities, checked on every powerful corpus member
/// with the divisible-coefficient H^2 dimensions standing in for the
/// cohomology of the ambient analytic group.
pub fn run_prop22(spec: &CorpusSpec, brute_cap: usize) -> Result<SuiteOutcome, SuiteError> {
    let run = generate(spec)?;
    let mut out = SuiteOutcome::new(
        "prop22",
        "for powerful groups with involution, d+ d- <= d- + h2qp- and \
         C(d+,2) + C(d-,2) <= d+ + h2qp+",
    );
    let blocks = consecutive_blocks(&run.entries);
    let results: Result<Vec<BlockResult>, SuiteError> = blocks
        .par_iter()
        .map(|&(a, b)| {
            let pres = &run.entries[a].pres;
            let t = pres.build_table(pres.group_order())?;
            let rep = structure_report(&t)?;
            let mut res = BlockResult {
                instances: Vec::new(),
                violations: Vec::new(),
                witness: false,
                skipped: 0,
            };
            if !rep.powerful {
                res.skipped = b - a;
                return Ok(res);
            }
            let comp = h2_compute(&t, brute_cap)?;
            for entry in &run.entries[a..b] {
                let (d, h2, qp) = qpzp_of(&t, entry, &comp)?;
                let (first, second) = rank_inequalities(d.plus, d.minus, qp.plus, qp.minus);
                let ok = first && second;
                res.instances.push(InstanceRecord {
                    id: entry.tag.clone(),
                    ok,
                    summary: format!(
                        "d = ({}, {}), h2 = ({}, {}), h2qp = ({}, {}), inequalities ({}, {})",
                        d.plus, d.minus, h2.plus, h2.minus, qp.plus, qp.minus, first, second
                    ),
                });
                if !ok {
                    res.violations.push(violation_for(
                        entry,
                        format!(
                            "rank inequality violated: d = ({}, {}), h2qp = ({}, {}), \
                             first holds: {}, second holds: {}",
                            d.plus, d.minus, qp.plus, qp.minus, first, second
                        ),
                    ));
                }
            }
            Ok(res)
        })
        .collect();
    let (_, skipped) = merge_blocks(&mut out, results?);
    out.notes.push(format!("{} non-powerful entries skipped", skipped));
    Ok(out.seal())
}

/// Cross-check the cached multiplication table against collection from the
/// left on all pairs, and the generator-based Frattini shortcut against the
/// elementwise Frattini subgroup, for every distinct corpus group.
pub fn run_oracle(spec: &CorpusSpec) -> Result<SuiteOutcome, SuiteError> {
    let run = generate(spec)?;
    let mut out = SuiteOutcome::new(
        "oracle",
        "table products agree with collection on all pairs; generator-based \
         Frattini subgroup agrees with the elementwise one",
    );
    let blocks = consecutive_blocks(&run.entries);
    let results: Result<Vec<BlockResult>, SuiteError> = blocks
        .par_iter()
        .map(|&(a, _)| {
            let entry = &run.entries[a];
            let pres = &entry.pres;
            let t = pres.build_table(pres.group_order())?;
            let order = t.order() as u32;
            let mut res = BlockResult {
                instances: Vec::new(),
                violations: Vec::new(),
                witness: false,
                skipped: 0,
            };
            let mut mismatch: Option<String> = None;
            'pairs: for x in 0..order {
                for y in 0..order {
                    let collected = pres.multiply(t.label(x), t.label(y));
                    let via_collection = t.index_of_exps(collected.exps());
                    if via_collection != Some(t.mul(x, y)) {
                        mismatch = Some(format!(
                            "product of {} and {}: table gives {}, collection gives {}",
                            t.label(x),
                            t.label(y),
                            t.label(t.mul(x, y)),
                            collected
                        ));
                        break 'pairs;
                    }
                }
            }
            let gens: Vec<u32> = (0..pres.ngens())
                .map(|i| {
                    t.index_of_exps(pres.generator_element(i).exps())
                        .expect("generator is in its own table")
                })
                .collect();
            let elementwise = frattini(&t);
            let shortcut = frattini_via_generators(&t, &gens);
            let frattini_ok = elementwise.elems() == shortcut.elems();
            let ok = mismatch.is_none() && frattini_ok;
            res.instances.push(InstanceRecord {
                id: entry.tag.clone(),
                ok,
                summary: format!(
                    "order {}, {} pairs checked, frattini orders {} / {}",
                    order,
                    (order as u64) * (order as u64),
                    elementwise.len(),
                    shortcut.len()
                ),
            });
            if let Some(detail) = mismatch {
                res.violations.push(violation_for(entry, detail));
            }
            if !frattini_ok {
                res.violations.push(violation_for(
                    entry,
                    format!(
                        "frattini mismatch: elementwise has {} elements, generator shortcut {}",
                        elementwise.len(),
                        shortcut.len()
                    ),
                ));
            }
            Ok(res)
        })
        .collect();
    merge_blocks(&mut out, results?);
    out.notes.push(format!(
        "{} distinct groups from {} corpus entries",
        blocks.len(),
        run.entries.len()
    ));
    Ok(out.seal())
}

fn units_with_square_one(m: u64) -> Vec<u64> {
    (1..m.max(2)).filter(|&u| u * u % m == 1).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    loop {
        let u = rng.gen_range(1..m);
        if gcd(u, m) == 1 {
            return u;
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn inv_mod_u64(a: u64, m: u64) -> u64 {
    // extended euclid; a must be a unit mod m
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (s0.rem_euclid(m as i128)) as u64
}

const ORDER_POOL: [u64; 10] = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27];
const MODULE_SIZE_CAP: u64 = 4096;

/// One random module with a verified cyclic action, built so validation is
/// guaranteed to succeed: signed involutive permutations, diagonal units of
/// order dividing n, or a block rotation twisted by a square root of unity.
fn random_tate_module(rng: &mut ChaCha8Rng) -> Result<TateModule, CohomologyError> {
    let shape = rng.gen_range(0u32..10);
    if shape < 6 {
        // signed involutive permutation, n = 2
        let mut orders: Vec<u64> = Vec::new();
        let mut product = 1u64;
        let target = rng.gen_range(1..=3usize);
        while orders.len() < target {
            let m = ORDER_POOL[rng.gen_range(0..ORDER_POOL.len())];
            if product * m > MODULE_SIZE_CAP {
                break;
            }
            product *= m;
            orders.push(m);
        }
        if orders.is_empty() {
            orders.push(ORDER_POOL[rng.gen_range(0..4)]);
        }
        let k = orders.len();
        let mut action = vec![vec![0u64; k]; k];
        let mut i = 0usize;
        while i < k {
            if i + 1 < k && orders[i] == orders[i + 1] && rng.gen_bool(0.5) {
                let u = random_unit(rng, orders[i]);
                action[i + 1][i] = u;
                action[i][i + 1] = inv_mod_u64(u, orders[i]);
                i += 2;
            } else {
                let roots = units_with_square_one(orders[i]);
                action[i][i] = if roots.is_empty() {
                    1 % orders[i]
                } else {
                    roots[rng.gen_range(0..roots.len())]
                };
                i += 1;
            }
        }
        TateModule::new(orders, action, 2)
    } else if shape < 8 {
        // diagonal units of multiplicative order dividing n
        let n = [3u32, 4, 6][rng.gen_range(0..3)];
        let k = rng.gen_range(1..=3usize);
        let mut orders = Vec::with_capacity(k);
        let mut product = 1u64;
        for _ in 0..k {
            let m = ORDER_POOL[rng.gen_range(0..ORDER_POOL.len())];
            if product * m > MODULE_SIZE_CAP {
                break;
            }
            product *= m;
            orders.push(m);
        }
        if orders.is_empty() {
            orders.push(3);
        }
        let k = orders.len();
        let mut action = vec![vec![0u64; k]; k];
        for (i, &m) in orders.iter().enumerate() {
            let roots: Vec<u64> =
                (1..m.max(2)).filter(|&u| pow_mod_u64(u, n as u64, m) == 1).collect();
            action[i][i] =
                if roots.is_empty() { 1 % m } else { roots[rng.gen_range(0..roots.len())] };
        }
        TateModule::new(orders, action, n)
    } else {
        // rotation of equal blocks, last edge twisted by a square root of 1
        let len = rng.gen_range(2..=3usize);
        let m = ORDER_POOL[rng.gen_range(0..ORDER_POOL.len())]
            .min((MODULE_SIZE_CAP as f64).powf(1.0 / len as f64) as u64)
            .max(2);
        let orders = vec![m; len];
        let roots = units_with_square_one(m);
        let u = roots[rng.gen_range(0..roots.len())];
        let mut action = vec![vec![0u64; len]; len];
        for i in 0..len - 1 {
            action[i + 1][i] = 1;
        }
        action[0][len - 1] = u;
        let n = if u == 1 { len as u32 } else { 2 * len as u32 };
        TateModule::new(orders, action, n)
    }
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Herbrand-quotient check: |H^0| = |H^-1| on seeded random modules with a
/// verified cyclic action, plus the Z/p fixture whose H^0 must be Z/p.
pub fn run_herbrand(samples: usize, seed: u64, p: u32) -> Result<SuiteOutcome, SuiteError> {
    let mut out = SuiteOutcome::new(
        "herbrand",
        "the two Tate groups of a finite module with cyclic action have equal orders",
    );
    let fixture = TateModule::new(vec![p as u64], vec![vec![1]], p)?;
    let frep = tate_h0_h1(&fixture, p)?;
    let fixture_ok =
        frep.p_rank_h0 == 1 && frep.h0.invariant_factors == vec![p as u64] && frep.h0_order == p as u64;
    out.instances.push(InstanceRecord {
        id: format!("fixture_z{}_trivial", p),
        ok: fixture_ok,
        summary: format!(
            "H^0 invariant factors {:?}, p-rank {}",
            frep.h0.invariant_factors, frep.p_rank_h0
        ),
    });
    if !fixture_ok {
        out.violations.push(Violation {
            id: format!("fixture_z{}_trivial", p),
            detail: format!(
                "trivial Z/{} module under a cyclic group of order {} must have H^0 = Z/{}",
                p, p, p
            ),
            presentation: format!("orders: [{}]; cyclic action order: {}", p, p),
            sigma: "action: [[1]]".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..samples {
        let module = random_tate_module(&mut rng)?;
        let rep = tate_h0_h1(&module, p)?;
        let ok = rep.h0_order == rep.h_minus1_order;
        let id = format!("module_{:04}", k);
        out.instances.push(InstanceRecord {
            id: id.clone(),
            ok,
            summary: format!("|H^0| = {}, |H^-1| = {}", rep.h0_order, rep.h_minus1_order),
        });
        if !ok {
            out.violations.push(Violation {
                id,
                detail: format!(
                    "Tate group orders differ: |H^0| = {}, |H^-1| = {}",
                    rep.h0_order, rep.h_minus1_order
                ),
                presentation: format!("{:?}", module),
                sigma: String::new(),
            });
        }
    }
    out.notes.push(format!("seed {}, {} random modules", seed, samples));
    Ok(out.seal())
}
