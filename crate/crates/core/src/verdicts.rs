//! Decision calculus over declared arithmetic invariants of a number field
//! k: signed p-class ranks (d_plus, d_minus), whether mu_p lies in k, and
//! ramification of the first cyclotomic layer. The rules combine the signed
//! rank inequalities with the admissible duality rank pairs to decide what a
//! powerful or uniform pro-p tower group would have to look like. All
//! number-theoretic premises are inputs, never computed; the module checks
//! the logic, not the arithmetic.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::ops::RangeInclusive;

/// Outcome of the full rule chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    FiniteIfPowerful,
    AbelianHenceFiniteIfPowerful,
    NotUniformIfInfinite,
    FiniteIfPowerfulAtHighLayers,
    Inconclusive,
}

/// Outcome of the standalone zero-plus-rank criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AbelianOutcome {
    AbelianHenceFinite,
    Abelian,
    NotApplicable,
}

/// Declared arithmetic inputs. The optional premises are tri-state:
/// Some(true) / Some(false) are declarations, None means undeclared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FmInput {
    pub d_plus: usize,
    pub d_minus: usize,
    pub mu_p_in_k: bool,
    pub first_layer_unramified: bool,
    pub mu_invariant_zero: Option<bool>,
    pub n_at_least_n0: Option<bool>,
    pub s_variant: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Premise {
    pub description: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleEval {
    pub rule: String,
    pub statement: String,
    pub premises: Vec<Premise>,
    pub fired: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FmVerdict {
    pub conclusion: Conclusion,
    pub s_variant: bool,
    pub reasoning_chain: Vec<RuleEval>,
}

/// delta = 1 exactly when mu_p lies in k.
pub fn delta(mu_p_in_k: bool) -> usize {
    usize::from(mu_p_in_k)
}

/// Zero plus-rank forces a powerful group to be abelian; with a finite
/// abelianization it is then finite outright.
pub fn abelian_criterion(d_plus: usize, is_powerful: bool, ab_finite: bool) -> AbelianOutcome {
    if d_plus != 0 || !is_powerful {
        return AbelianOutcome::NotApplicable;
    }
    if ab_finite {
        AbelianOutcome::AbelianHenceFinite
    } else {
        AbelianOutcome::Abelian
    }
}

/// The two signed rank inequalities for a finite powerful group with
/// involution, evaluated literally:
/// (i)  d_plus * d_minus <= d_minus + h2qp_minus
/// (ii) C(d_plus, 2) + C(d_minus, 2) <= d_plus + h2qp_plus
pub fn rank_inequalities(
    d_plus: usize,
    d_minus: usize,
    h2qp_plus: usize,
    h2qp_minus: usize,
) -> (bool, bool) {
    let choose2 = |d: usize| d * d.saturating_sub(1) / 2;
    let i = d_plus * d_minus <= d_minus + h2qp_minus;
    let ii = choose2(d_plus) + choose2(d_minus) <= d_plus + h2qp_plus;
    (i, ii)
}

/// Signed rank pairs admissible for a 3-dimensional Poincare duality group
/// with finite abelianization.
pub fn duality3_rank_pairs() -> BTreeSet<(usize, usize)> {
    BTreeSet::from([(1, 2), (3, 0)])
}

/// All (d_plus, d_minus) in the given ranges with d_plus >= 2, d_minus >= 1
/// satisfying d_plus * d_minus <= d_minus + delta. These are the rank pairs
/// an infinite powerful tower group could still have after the inequalities.
pub fn surviving_rank_pairs(
    d_plus_range: RangeInclusive<usize>,
    d_minus_range: RangeInclusive<usize>,
    delta: usize,
) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for dp in d_plus_range {
        for dm in d_minus_range.clone() {
            if dp >= 2 && dm >= 1 && dp * dm <= dm + delta {
                out.insert((dp, dm));
            }
        }
    }
    out
}

fn premise(description: &str, holds: bool) -> Premise {
    Premise { description: description.to_string(), holds }
}

fn eval_rank_rule(input: &FmInput) -> RuleEval {
    let p1 = premise("d_plus != 1", input.d_plus != 1);
    let p2 = premise(
        "mu_p in k, or d_minus >= 1",
        input.mu_p_in_k || input.d_minus >= 1,
    );
    let fired = p1.holds && p2.holds;
    let mut notes = Vec::new();
    if fired {
        let del = delta(input.mu_p_in_k);
        let surviving = surviving_rank_pairs(0..=10, 0..=10, del);
        notes.push(format!(
            "rank solver over d_plus 0..=10, d_minus 0..=10 with delta = {del} leaves {surviving:?}"
        ));
        let admissible = duality3_rank_pairs();
        if surviving.is_disjoint(&admissible) {
            notes.push(format!(
                "surviving pairs are disjoint from the admissible duality pairs {admissible:?}, closing the infinite case"
            ));
        } else {
            notes.push(format!(
                "WARNING: surviving pairs meet the admissible duality pairs {admissible:?}"
            ));
        }
        if input.d_plus == 0 {
            notes.push(
                "d_plus = 0 strengthens the conclusion: a powerful group with no plus-rank is abelian, hence finite when its abelianization is"
                    .to_string(),
            );
        }
        if input.mu_p_in_k && input.d_minus == 0 && input.d_plus >= 2 {
            notes.push(
                "reflection bound: with mu_p in k and d_plus >= 2 a reflection inequality forces d_minus >= 1, but d_minus = 0 was declared"
                    .to_string(),
            );
        }
    }
    RuleEval {
        rule: "rank_constraints_force_finiteness".to_string(),
        statement: "if d_plus != 1 and (mu_p in k or d_minus >= 1), then the pro-p tower group is finite whenever it is powerful".to_string(),
        premises: vec![p1, p2],
        fired,
        notes,
    }
}

fn eval_first_layer_rule(input: &FmInput) -> RuleEval {
    let p1 = premise("mu_p in k", input.mu_p_in_k);
    let p2 = premise(
        "the first layer k1|k is not unramified whenever d_plus = 1",
        input.d_plus != 1 || !input.first_layer_unramified,
    );
    let fired = p1.holds && p2.holds;
    let mut notes = Vec::new();
    if fired && input.d_plus == 1 {
        notes.push(
            "d_plus = 1 with a ramified first layer rules out the unramified escape".to_string(),
        );
    }
    RuleEval {
        rule: "cyclotomic_first_layer_obstruction".to_string(),
        statement: "if mu_p in k, and the first layer k1|k is not unramified whenever d_plus = 1, then the pro-p tower group is not uniform if it is infinite".to_string(),
        premises: vec![p1, p2],
        fired,
        notes,
    }
}

fn eval_stabilized_tower_rule(input: &FmInput) -> RuleEval {
    let p1 = premise("mu_p in k", input.mu_p_in_k);
    let p2 = premise(
        "mu-invariant declared zero",
        input.mu_invariant_zero == Some(true),
    );
    let p3 = premise(
        "layer index declared at least n0",
        input.n_at_least_n0 == Some(true),
    );
    let fired = p1.holds && p2.holds && p3.holds;
    let mut notes = Vec::new();
    if fired {
        notes.push(
            "the mu-invariant and layer-index premises are declared inputs, not computed".to_string(),
        );
    }
    RuleEval {
        rule: "stabilized_tower_finiteness".to_string(),
        statement: "if mu_p in k, the mu-invariant of the cyclotomic tower vanishes, and the layer index is at least n0, then the layer group is finite whenever it is powerful".to_string(),
        premises: vec![p1, p2, p3],
        fired,
        notes,
    }
}

/// Apply the rules in order and stop at the first that fires. The chain
/// records every rule evaluated, so a non-fired entry always exhibits at
/// least one failed premise.
pub fn fm_verdict(input: &FmInput) -> FmVerdict {
    let mut chain = Vec::new();

    let rank_rule = eval_rank_rule(input);
    let rank_fired = rank_rule.fired;
    let rank_refined = rank_fired && input.d_plus == 0;
    chain.push(rank_rule);
    if rank_fired {
        let conclusion = if rank_refined {
            Conclusion::AbelianHenceFiniteIfPowerful
        } else {
            Conclusion::FiniteIfPowerful
        };
        return FmVerdict { conclusion, s_variant: input.s_variant, reasoning_chain: chain };
    }

    let layer_rule = eval_first_layer_rule(input);
    let layer_fired = layer_rule.fired;
    chain.push(layer_rule);
    if layer_fired {
        return FmVerdict {
            conclusion: Conclusion::NotUniformIfInfinite,
            s_variant: input.s_variant,
            reasoning_chain: chain,
        };
    }

    let tower_rule = eval_stabilized_tower_rule(input);
    let tower_fired = tower_rule.fired;
    chain.push(tower_rule);
    if tower_fired {
        return FmVerdict {
            conclusion: Conclusion::FiniteIfPowerfulAtHighLayers,
            s_variant: input.s_variant,
            reasoning_chain: chain,
        };
    }

    FmVerdict {
        conclusion: Conclusion::Inconclusive,
        s_variant: input.s_variant,
        reasoning_chain: chain,
    }
}
