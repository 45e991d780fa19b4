//! Deterministic families of finite p-groups with validated involutions:
//! elementary abelian and homocyclic groups with diagonal sign actions,
//! the extraspecial group of order p^3 and exponent p, a metacyclic powerful
//! group of order p^4, and consistency-filtered random pc presentations.
//! Every emitted pair has passed the consistency check and full involution
//! validation; rejected candidates are counted, never emitted.

use crate::involution::{diagonal_images, identity_images, validate_involution, InvolutionAction, InvolutionError};
use crate::pc::{PcError, PcPresentation, Word};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("bad corpus spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Pc(#[from] PcError),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ElementaryAbelian,
    Homocyclic,
    Extraspecial,
    MetacyclicPowerful,
    RandomPc,
}

impl Family {
    pub fn all() -> BTreeSet<Family> {
        BTreeSet::from([
            Family::ElementaryAbelian,
            Family::Homocyclic,
            Family::Extraspecial,
            Family::MetacyclicPowerful,
            Family::RandomPc,
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvolutionPolicy {
    /// canonical diagonal sign patterns, plus the small mixed catalog on the
    /// non-abelian families
    AllDiagonal,
    /// generator-wise inversion only (extended consistently on the
    /// non-abelian families), dropped where invalid
    Inversion,
    /// actions come from elsewhere; every group is emitted with the identity
    Supplied,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub p: u32,
    pub max_order_exponent: usize,
    pub families: BTreeSet<Family>,
    pub involution_policy: InvolutionPolicy,
    pub seed: u64,
    pub random_attempts: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            p: 3,
            max_order_exponent: 4,
            families: Family::all(),
            involution_policy: InvolutionPolicy::AllDiagonal,
            seed: 0x5eed_0001,
            random_attempts: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub pres: PcPresentation,
    pub action: InvolutionAction,
    pub tag: String,
    pub family: Family,
}

#[derive(Debug, Clone)]
pub struct CorpusRun {
    pub entries: Vec<CorpusEntry>,
    pub random_attempted: usize,
    pub random_rejected_inconsistent: usize,
    pub involutions_rejected: usize,
}

pub mod builders {
    use super::*;

    pub fn elementary_abelian(p: u32, rank: usize) -> Result<PcPresentation, PcError> {
        PcPresentation::new(p, rank, vec![Word::identity(); rank], BTreeMap::new())
    }

    /// (Z/p^level)^d with generators in level-major order: generator
    /// lvl*d + j is the p^lvl-th power of generator j.
    pub fn homocyclic(p: u32, level: usize, d: usize) -> Result<PcPresentation, PcError> {
        let n = level * d;
        let mut powers = vec![Word::identity(); n];
        if level > 0 {
            for lvl in 0..level - 1 {
                for j in 0..d {
                    powers[lvl * d + j] = Word::single((lvl + 1) * d + j, 1);
                }
            }
        }
        PcPresentation::new(p, n, powers, BTreeMap::new())
    }

    /// Order p^3, exponent p: [g2, g1] = g3 central.
    pub fn extraspecial_exponent_p(p: u32) -> Result<PcPresentation, PcError> {
        PcPresentation::new(
            p,
            3,
            vec![Word::identity(); 3],
            BTreeMap::from([((1usize, 0usize), Word::single(2, 1))]),
        )
    }

    /// Order p^4: a, b of order p^2 with [a, b] = a^p, in pc form with
    /// g3 = a^p and g4 = b^p. Powerful for odd p.
    pub fn metacyclic_powerful(p: u32) -> Result<PcPresentation, PcError> {
        PcPresentation::new(
            p,
            4,
            vec![Word::single(2, 1), Word::single(3, 1), Word::identity(), Word::identity()],
            BTreeMap::from([((1usize, 0usize), Word::single(2, p - 1))]),
        )
    }
}

fn split_signs(plus: usize, total: usize) -> Vec<bool> {
    (0..total).map(|i| i < plus).collect()
}

fn sign_tag(signs: &[bool]) -> String {
    signs.iter().map(|&s| if s { '+' } else { '-' }).collect()
}

struct Emitter {
    policy: InvolutionPolicy,
    entries: Vec<CorpusEntry>,
    involutions_rejected: usize,
}

impl Emitter {
    /// Validate each candidate sign/image set against the presentation and
    /// keep the survivors. Table construction is shared across candidates.
    fn try_candidates(
        &mut self,
        pres: &PcPresentation,
        family: Family,
        base_tag: &str,
        candidates: Vec<(String, Vec<Word>)>,
    ) -> Result<(), CorpusError> {
        let order = pres.group_order();
        let table = pres.build_table(order)?;
        for (suffix, images) in candidates {
            match validate_involution(pres, &images, &table) {
                Ok(action) => self.entries.push(CorpusEntry {
                    pres: pres.clone(),
                    action,
                    tag: format!("{base_tag}_{suffix}"),
                    family,
                }),
                Err(_) => self.involutions_rejected += 1,
            }
        }
        Ok(())
    }

    /// Diagonal candidates for an abelian presentation whose generator signs
    /// are determined by a base block of size d replicated across levels.
    fn abelian_candidates(
        &self,
        pres: &PcPresentation,
        d: usize,
        levels: usize,
    ) -> Vec<(String, Vec<Word>)> {
        let replicate = |base: &[bool]| -> Vec<bool> {
            let mut signs = Vec::with_capacity(d * levels);
            for _ in 0..levels {
                signs.extend_from_slice(base);
            }
            signs
        };
        match self.policy {
            InvolutionPolicy::AllDiagonal => (0..=d)
                .rev()
                .map(|a| {
                    let base = split_signs(a, d);
                    let signs = replicate(&base);
                    (format!("split({a},{})", d - a), diagonal_images(pres, &signs))
                })
                .collect(),
            InvolutionPolicy::Inversion => {
                let signs = replicate(&split_signs(0, d));
                vec![(format!("split(0,{d})"), diagonal_images(pres, &signs))]
            }
            InvolutionPolicy::Supplied => {
                vec![("identity".to_string(), identity_images(pres))]
            }
        }
    }

    /// Catalog for a non-abelian presentation: identity, full inversion,
    /// single-sign flips, and any extra family-specific patterns.
    fn catalog_candidates(
        &self,
        pres: &PcPresentation,
        extra: &[Vec<bool>],
    ) -> Vec<(String, Vec<Word>)> {
        let n = pres.ngens();
        let mut patterns: Vec<Vec<bool>> = Vec::new();
        match self.policy {
            InvolutionPolicy::AllDiagonal => {
                patterns.push(vec![true; n]);
                patterns.push(vec![false; n]);
                for i in 0..n {
                    let mut s = vec![true; n];
                    s[i] = false;
                    patterns.push(s);
                }
                patterns.extend_from_slice(extra);
            }
            InvolutionPolicy::Inversion => {
                patterns.push(vec![false; n]);
                patterns.extend_from_slice(extra);
            }
            InvolutionPolicy::Supplied => patterns.push(vec![true; n]),
        }
        patterns.sort();
        patterns.dedup();
        patterns
            .into_iter()
            .map(|s| (format!("sigma({})", sign_tag(&s)), diagonal_images(pres, &s)))
            .collect()
    }
}

/// Generate the corpus for a spec. Deterministic: the same spec (seed
/// included) yields the same entries in the same order, with entries for the
/// same group emitted consecutively.
pub fn generate(spec: &CorpusSpec) -> Result<CorpusRun, CorpusError> {
    if !crate::fp_linalg::is_odd_prime(spec.p) {
        return Err(CorpusError::BadSpec(format!("p = {} is not an odd prime", spec.p)));
    }
    if spec.max_order_exponent > 7 {
        return Err(CorpusError::BadSpec(format!(
            "max_order_exponent {} exceeds the supported bound 7",
            spec.max_order_exponent
        )));
    }
    let p = spec.p;
    let maxe = spec.max_order_exponent;
    let mut em = Emitter {
        policy: spec.involution_policy,
        entries: Vec::new(),
        involutions_rejected: 0,
    };
    let mut random_attempted = 0;
    let mut random_rejected = 0;

    if spec.families.contains(&Family::ElementaryAbelian) {
        for rank in 0..=maxe {
            let pres = builders::elementary_abelian(p, rank)?;
            let cands = em.abelian_candidates(&pres, rank, 1);
            em.try_candidates(&pres, Family::ElementaryAbelian, &format!("elab_p{p}_r{rank}"), cands)?;
        }
    }

    if spec.families.contains(&Family::Homocyclic) {
        for level in 2..=maxe {
            for d in 1..=maxe / level {
                let pres = builders::homocyclic(p, level, d)?;
                let cands = em.abelian_candidates(&pres, d, level);
                em.try_candidates(
                    &pres,
                    Family::Homocyclic,
                    &format!("homocyclic_p{p}_l{level}_d{d}"),
                    cands,
                )?;
            }
        }
    }

    if spec.families.contains(&Family::Extraspecial) && maxe >= 3 {
        let pres = builders::extraspecial_exponent_p(p)?;
        // inverting both minimal generators fixes the center: the extra
        // mixed entry the single-flip catalog cannot reach
        let extra = vec![vec![false, false, true]];
        let cands = em.catalog_candidates(&pres, &extra);
        em.try_candidates(&pres, Family::Extraspecial, &format!("extraspecial_p{p}"), cands)?;
    }

    if spec.families.contains(&Family::MetacyclicPowerful) && maxe >= 4 {
        let pres = builders::metacyclic_powerful(p)?;
        // inverting a and a^p while fixing b and b^p is the valid
        // inversion-style action
        let extra = vec![vec![false, true, false, true]];
        let cands = em.catalog_candidates(&pres, &extra);
        em.try_candidates(&pres, Family::MetacyclicPowerful, &format!("metacyclic_p{p}"), cands)?;
    }

    if spec.families.contains(&Family::RandomPc) && maxe >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for attempt in 0..spec.random_attempts {
            random_attempted += 1;
            let n = rng.gen_range(2..=maxe.min(4));
            let mut powers = Vec::with_capacity(n);
            for i in 0..n {
                if i + 1 < n && rng.gen_bool(0.5) {
                    let j = rng.gen_range(i + 1..n);
                    powers.push(Word::single(j, rng.gen_range(1..p)));
                } else {
                    powers.push(Word::identity());
                }
            }
            let mut comms = BTreeMap::new();
            for j in 1..n {
                for i in 0..j {
                    if j + 1 < n && rng.gen_bool(0.3) {
                        let k = rng.gen_range(j + 1..n);
                        comms.insert((j, i), Word::single(k, rng.gen_range(1..p)));
                    }
                }
            }
            let pres = PcPresentation::new(p, n, powers, comms)?;
            if pres.consistency_check().is_err() {
                random_rejected += 1;
                continue;
            }
            let cands = em.catalog_candidates(&pres, &[]);
            em.try_candidates(
                &pres,
                Family::RandomPc,
                &format!("random_p{p}_n{n}_a{attempt}"),
                cands,
            )?;
        }
    }

    Ok(CorpusRun {
        entries: em.entries,
        random_attempted,
        random_rejected_inconsistent: random_rejected,
        involutions_rejected: em.involutions_rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{is_powerful, p_central_series, structure_report};

    #[test]
    fn default_run_is_deterministic() {
        let spec = CorpusSpec::default();
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.entries.len(), b.entries.len());
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.tag, y.tag);
            assert_eq!(x.pres, y.pres);
            assert_eq!(x.action.images, y.action.images);
        }
        assert_eq!(a.random_attempted, b.random_attempted);
        assert_eq!(a.random_rejected_inconsistent, b.random_rejected_inconsistent);
        assert_eq!(a.involutions_rejected, b.involutions_rejected);
    }

    #[test]
    fn default_run_coverage_floor() {
        let run = generate(&CorpusSpec::default()).unwrap();
        let mut saw_powerful_nonabelian = false;
        let mut saw_nonpowerful = false;
        let mut splits = BTreeSet::new();
        for e in &run.entries {
            let t = e.pres.build_table(e.pres.group_order()).unwrap();
            let report = structure_report(&t).unwrap();
            if report.powerful && !report.abelian {
                saw_powerful_nonabelian = true;
            }
            if !report.powerful {
                saw_nonpowerful = true;
            }
            if e.family == Family::ElementaryAbelian {
                splits.insert((e.action.d_plus, e.action.d_minus));
            }
        }
        assert!(saw_powerful_nonabelian);
        assert!(saw_nonpowerful);
        for dp in 0..=3usize {
            for dm in 0..=(3 - dp) {
                assert!(splits.contains(&(dp, dm)), "missing split ({dp},{dm})");
            }
        }
    }

    #[test]
    fn every_entry_revalidates() {
        let run = generate(&CorpusSpec::default()).unwrap();
        assert!(!run.entries.is_empty());
        for e in &run.entries {
            e.pres.consistency_check().unwrap();
            let t = e.pres.build_table(e.pres.group_order()).unwrap();
            let act = validate_involution(&e.pres, &e.action.images, &t).unwrap();
            assert_eq!(act.d_plus, e.action.d_plus, "{}", e.tag);
            assert_eq!(act.d_minus, e.action.d_minus, "{}", e.tag);
        }
    }

    #[test]
    fn elementary_abelian_split_enumeration() {
        let spec = CorpusSpec {
            max_order_exponent: 3,
            families: BTreeSet::from([Family::ElementaryAbelian]),
            ..CorpusSpec::default()
        };
        let run = generate(&spec).unwrap();
        // ranks 0..=3, each with rank+1 canonical splits
        assert_eq!(run.entries.len(), 1 + 2 + 3 + 4);
        let last = run.entries.last().unwrap();
        assert_eq!((last.action.d_plus, last.action.d_minus), (0, 3));
    }

    #[test]
    fn extraspecial_catalog_and_rejections() {
        let spec = CorpusSpec {
            families: BTreeSet::from([Family::Extraspecial]),
            ..CorpusSpec::default()
        };
        let run = generate(&spec).unwrap();
        // identity, (+,-,-) single-flip variants, full inversion and the
        // mixed extra: survivors are exactly the consistent sign patterns
        assert!(!run.entries.is_empty());
        assert!(run.involutions_rejected > 0, "full inversion must be rejected");
        for e in &run.entries {
            let t = e.pres.build_table(27).unwrap();
            assert!(!is_powerful(&t).powerful);
        }
        // the pure-minus action on the two minimal generators survives with
        // the center fixed: d split (0, 2)
        assert!(run
            .entries
            .iter()
            .any(|e| e.action.d_plus == 0 && e.action.d_minus == 2));
    }

    #[test]
    fn metacyclic_inversion_policy() {
        let spec = CorpusSpec {
            families: BTreeSet::from([Family::MetacyclicPowerful]),
            involution_policy: InvolutionPolicy::Inversion,
            ..CorpusSpec::default()
        };
        let run = generate(&spec).unwrap();
        // full inversion is invalid on a non-abelian group; the
        // inversion-style pattern fixing b survives
        assert_eq!(run.entries.len(), 1);
        let e = &run.entries[0];
        assert_eq!((e.action.d_plus, e.action.d_minus), (1, 1));
        assert_eq!(run.involutions_rejected, 1);
        let t = e.pres.build_table(81).unwrap();
        assert!(is_powerful(&t).powerful);
    }

    #[test]
    fn homocyclic_levels_replicate_signs() {
        let spec = CorpusSpec {
            families: BTreeSet::from([Family::Homocyclic]),
            ..CorpusSpec::default()
        };
        let run = generate(&spec).unwrap();
        // orders p^2, p^4 (two shapes), p^3: (2,1), (2,2), (3,1), (4,1)
        let shapes: BTreeSet<&str> = run
            .entries
            .iter()
            .map(|e| e.tag.split("_split").next().unwrap())
            .collect();
        assert_eq!(shapes.len(), 4);
        for e in &run.entries {
            let t = e.pres.build_table(e.pres.group_order()).unwrap();
            let series = p_central_series(&t).unwrap();
            // homocyclic: every layer has the base rank
            let d = e.action.d_plus + e.action.d_minus;
            assert!(series.layer_ranks.iter().all(|&r| r == d), "{}", e.tag);
        }
    }

    #[test]
    fn supplied_policy_emits_identity_actions() {
        let spec = CorpusSpec {
            involution_policy: InvolutionPolicy::Supplied,
            families: BTreeSet::from([Family::ElementaryAbelian, Family::Extraspecial]),
            ..CorpusSpec::default()
        };
        let run = generate(&spec).unwrap();
        for e in &run.entries {
            assert_eq!(e.action.d_minus, 0, "{}", e.tag);
            assert_eq!(e.action.images, identity_images(&e.pres));
        }
    }

    #[test]
    fn random_family_reports_stats() {
        let spec = CorpusSpec {
            families: BTreeSet::from([Family::RandomPc]),
            random_attempts: 30,
            ..CorpusSpec::default()
        };
        let run = generate(&spec).unwrap();
        assert_eq!(run.random_attempted, 30);
        assert!(!run.entries.is_empty());
        let groups: BTreeSet<&str> = run
            .entries
            .iter()
            .map(|e| e.tag.split("_sigma").next().unwrap())
            .collect();
        // the identity pattern always validates, so every consistent
        // attempt yields at least one entry
        assert_eq!(groups.len() + run.random_rejected_inconsistent, 30);
    }

    #[test]
    fn families_emit_in_canonical_order() {
        let run = generate(&CorpusSpec::default()).unwrap();
        let fams: Vec<Family> = run.entries.iter().map(|e| e.family).collect();
        let mut sorted = fams.clone();
        sorted.sort();
        assert_eq!(fams, sorted);
        // entries sharing a group tag sit in one consecutive block
        let blocks: Vec<&str> = run
            .entries
            .iter()
            .filter_map(|e| e.tag.rsplit_once('_').map(|(head, _)| head))
            .collect();
        let mut dedup = blocks.clone();
        dedup.dedup();
        let unique: BTreeSet<&&str> = dedup.iter().collect();
        assert_eq!(unique.len(), dedup.len(), "a group block reappears non-consecutively");
    }

    #[test]
    fn bad_specs_are_rejected() {
        let mut spec = CorpusSpec { p: 2, ..CorpusSpec::default() };
        assert!(matches!(generate(&spec), Err(CorpusError::BadSpec(_))));
        spec = CorpusSpec { max_order_exponent: 9, ..CorpusSpec::default() };
        assert!(matches!(generate(&spec), Err(CorpusError::BadSpec(_))));
    }
}
