//! Involutions of a finite p-group: validation that generator images define
//! an automorphism of order at most 2, and the induced plus/minus eigenspace
//! ranks on the elementary abelian layers of the descending p-central series.
//!
//! With p odd, 2 is invertible mod p, so every layer splits as the direct sum
//! of the +1 and -1 eigenspaces of the induced action.

use crate::fp_linalg::{EigenDecomposition, FpError, MatFp};
use crate::pc::{Element, GroupTable, PcError, PcPresentation, Word};
use crate::structure::{layer_chart, p_central_series, CentralSeries, StructureError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvolutionError {
    #[error("{got} generator images supplied for {want} generators")]
    ImageCount { got: usize, want: usize },
    #[error("relation {relation} not preserved: images give {lhs} vs {rhs}")]
    RelationMismatch { relation: String, lhs: String, rhs: String },
    #[error("generator images do not define a bijection")]
    NotBijective,
    #[error("map squares to a nontrivial automorphism (first moved: {witness})")]
    OrderExceedsTwo { witness: String },
    #[error(transparent)]
    Pc(#[from] PcError),
    #[error(transparent)]
    Fp(#[from] FpError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Plus/minus eigenspace ranks of the action on one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EigenSplit {
    pub d_plus: usize,
    pub d_minus: usize,
}

/// Validated involution: the permutation it induces on the element table and
/// its matrices on every p-central layer. The eigensplit of layer 0 (the
/// Frattini quotient) gives the signed generator ranks d^+ and d^-.
#[derive(Debug, Clone)]
pub struct InvolutionAction {
    pub images: Vec<Word>,
    pub perm: Vec<u32>,
    pub layer_matrices: Vec<MatFp>,
    pub d_plus: usize,
    pub d_minus: usize,
}

/// sigma applied to a word: product of the generator images in order.
pub fn apply_word_under(pres: &PcPresentation, images: &[Element], w: &Word) -> Element {
    let mut acc = pres.identity_element();
    for &(g, e) in w.terms() {
        let img_pow = pres.element_pow(&images[g], e as u128);
        acc = pres.multiply(&acc, &img_pow);
    }
    acc
}

/// Table-free proof that the images define an automorphism of order <= 2:
/// preserving every defining relation makes the extension an endomorphism,
/// and squaring to the identity on generators then forces bijectivity. The
/// presentation must be consistent for the inverse arithmetic to hold.
pub fn check_involution_relations(
    pres: &PcPresentation,
    images: &[Word],
) -> Result<(), InvolutionError> {
    let n = pres.ngens();
    if images.len() != n {
        return Err(InvolutionError::ImageCount { got: images.len(), want: n });
    }
    for w in images {
        w.validate(n)?;
    }
    let img: Vec<Element> = images.iter().map(|w| pres.element_of_word(w)).collect();
    let p = pres.p() as u128;
    // power relations: sigma(g_i)^p = sigma(rhs)
    for i in 0..n {
        let lhs = pres.element_pow(&img[i], p);
        let rhs = apply_word_under(pres, &img, pres.power_word(i));
        if lhs != rhs {
            return Err(InvolutionError::RelationMismatch {
                relation: format!("g{}^{}", i + 1, pres.p()),
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            });
        }
    }
    // commutator relations, including the omitted trivial ones
    for j in 0..n {
        for i in 0..j {
            let xj_inv = pres.element_inverse(&img[j]);
            let xi_inv = pres.element_inverse(&img[i]);
            let lhs = pres.multiply(
                &pres.multiply(&pres.multiply(&xj_inv, &xi_inv), &img[j]),
                &img[i],
            );
            let rhs = match pres.comm_word(j, i) {
                Some(w) => apply_word_under(pres, &img, w),
                None => pres.identity_element(),
            };
            if lhs != rhs {
                return Err(InvolutionError::RelationMismatch {
                    relation: format!("[g{},g{}]", j + 1, i + 1),
                    lhs: lhs.to_string(),
                    rhs: rhs.to_string(),
                });
            }
        }
    }
    // sigma^2 fixes every generator
    for i in 0..n {
        let twice = apply_word_under(pres, &img, &img[i].to_word());
        if twice != pres.generator_element(i) {
            return Err(InvolutionError::OrderExceedsTwo { witness: format!("g{}", i + 1) });
        }
    }
    Ok(())
}

/// Full validation against a materialized table, staged so failures surface
/// as: relation mismatch, then non-bijectivity, then order above 2. Returns
/// the induced permutation and the layer matrices with their eigensplits.
pub fn validate_involution(
    pres: &PcPresentation,
    images: &[Word],
    t: &GroupTable,
) -> Result<InvolutionAction, InvolutionError> {
    let n = pres.ngens();
    if images.len() != n {
        return Err(InvolutionError::ImageCount { got: images.len(), want: n });
    }
    for w in images {
        w.validate(n)?;
    }
    let img: Vec<Element> = images.iter().map(|w| pres.element_of_word(w)).collect();

    // stage 1: relations only (endomorphism property)
    let p = pres.p() as u128;
    for i in 0..n {
        let lhs = pres.element_pow(&img[i], p);
        let rhs = apply_word_under(pres, &img, pres.power_word(i));
        if lhs != rhs {
            return Err(InvolutionError::RelationMismatch {
                relation: format!("g{}^{}", i + 1, pres.p()),
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            });
        }
    }
    for j in 0..n {
        for i in 0..j {
            let xj_inv = pres.element_inverse(&img[j]);
            let xi_inv = pres.element_inverse(&img[i]);
            let lhs = pres.multiply(
                &pres.multiply(&pres.multiply(&xj_inv, &xi_inv), &img[j]),
                &img[i],
            );
            let rhs = match pres.comm_word(j, i) {
                Some(w) => apply_word_under(pres, &img, w),
                None => pres.identity_element(),
            };
            if lhs != rhs {
                return Err(InvolutionError::RelationMismatch {
                    relation: format!("[g{},g{}]", j + 1, i + 1),
                    lhs: lhs.to_string(),
                    rhs: rhs.to_string(),
                });
            }
        }
    }

    // stage 2: the induced map on elements must be a bijection
    let order = t.order();
    let mut perm = vec![0u32; order];
    let mut seen = vec![false; order];
    for x in 0..order {
        let image = apply_word_under(pres, &img, &t.label(x as u32).to_word());
        let xi = pres.index_of_element(&image);
        perm[x] = xi as u32;
        if seen[xi] {
            return Err(InvolutionError::NotBijective);
        }
        seen[xi] = true;
    }

    // stage 3: order at most 2, elementwise
    for x in 0..order {
        if perm[perm[x] as usize] as usize != x {
            return Err(InvolutionError::OrderExceedsTwo {
                witness: t.label(x as u32).to_string(),
            });
        }
    }

    // induced matrices on the p-central layers
    let series = p_central_series(t)?;
    let layer_matrices = layer_matrices_of_perm(t, &series, &perm)?;
    let (d_plus, d_minus) = match layer_matrices.first() {
        Some(m) => {
            let d = m.eigensplit_involution()?;
            (d.dim_plus, d.dim_minus)
        }
        None => (0, 0),
    };
    Ok(InvolutionAction { images: images.to_vec(), perm, layer_matrices, d_plus, d_minus })
}

fn layer_matrices_of_perm(
    t: &GroupTable,
    series: &CentralSeries,
    perm: &[u32],
) -> Result<Vec<MatFp>, InvolutionError> {
    let p = t.p();
    let mut out = Vec::new();
    for layer in 0..series.layer_ranks.len() {
        // the series is characteristic, so the permutation must fix each term
        for &x in series.terms[layer].elems() {
            if !series.terms[layer].contains(perm[x as usize]) {
                return Err(InvolutionError::Internal(format!(
                    "automorphism moves series term {layer}"
                )));
            }
        }
        let chart = layer_chart(t, series, layer)?;
        let mut rows = vec![vec![0u32; chart.rank]; chart.rank];
        for (j, &b) in chart.basis_global.iter().enumerate() {
            let cb = chart
                .coords_of(perm[b as usize])
                .ok_or_else(|| InvolutionError::Internal("image left the layer".into()))?;
            for i in 0..chart.rank {
                rows[i][j] = cb[i];
            }
        }
        let m = MatFp::from_rows(p, &rows)?;
        // exhaustive check that the matrix reproduces the action on cosets
        for &x in series.terms[layer].elems() {
            let cx = chart
                .coords_of(x)
                .ok_or_else(|| InvolutionError::Internal("chart gap".into()))?;
            let want = chart
                .coords_of(perm[x as usize])
                .ok_or_else(|| InvolutionError::Internal("image left the layer".into()))?;
            for i in 0..chart.rank {
                let acc: u64 = (0..chart.rank).map(|j| m.at(i, j) as u64 * cx[j] as u64).sum();
                if acc % p as u64 != want[i] as u64 {
                    return Err(InvolutionError::Internal(format!(
                        "induced action on layer {layer} is not the computed matrix"
                    )));
                }
            }
        }
        out.push(m);
    }
    Ok(out)
}

impl InvolutionAction {
    /// Eigensplit on a deeper layer of the p-central series.
    pub fn eigen_ranks(&self, layer: usize) -> Result<EigenSplit, InvolutionError> {
        let m = self
            .layer_matrices
            .get(layer)
            .ok_or_else(|| InvolutionError::Internal(format!("no layer {layer}")))?;
        let d: EigenDecomposition = m.eigensplit_involution()?;
        Ok(EigenSplit { d_plus: d.dim_plus, d_minus: d.dim_minus })
    }

    pub fn split(&self) -> EigenSplit {
        EigenSplit { d_plus: self.d_plus, d_minus: self.d_minus }
    }
}

/// Identity involution, valid on every group.
pub fn identity_images(pres: &PcPresentation) -> Vec<Word> {
    (0..pres.ngens()).map(|i| Word::single(i, 1)).collect()
}

/// Diagonal involution sending generator i to itself or its inverse.
/// Whether the result satisfies the relations depends on the group.
pub fn diagonal_images(pres: &PcPresentation, signs: &[bool]) -> Vec<Word> {
    assert_eq!(signs.len(), pres.ngens());
    (0..pres.ngens())
        .map(|i| {
            if signs[i] {
                Word::single(i, 1)
            } else {
                pres.element_inverse(&pres.generator_element(i)).to_word()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pc::test_groups::{extraspecial, metacyclic};
    use std::collections::BTreeMap;

    fn elab(p: u32, rank: usize) -> PcPresentation {
        PcPresentation::new(p, rank, vec![Word::identity(); rank], BTreeMap::new()).unwrap()
    }

    #[test]
    fn identity_split_on_elementary_abelian() {
        let g = elab(3, 2);
        let t = g.build_table(1000).unwrap();
        let act = validate_involution(&g, &identity_images(&g), &t).unwrap();
        assert_eq!((act.d_plus, act.d_minus), (2, 0));
    }

    #[test]
    fn single_inversion_split() {
        let g = elab(3, 2);
        let t = g.build_table(1000).unwrap();
        let act =
            validate_involution(&g, &diagonal_images(&g, &[false, true]), &t).unwrap();
        assert_eq!((act.d_plus, act.d_minus), (1, 1));
    }

    #[test]
    fn full_inversion_split() {
        let g = elab(3, 3);
        let t = g.build_table(1000).unwrap();
        let act =
            validate_involution(&g, &diagonal_images(&g, &[false, false, false]), &t).unwrap();
        assert_eq!((act.d_plus, act.d_minus), (0, 3));
    }

    #[test]
    fn extraspecial_mixed_signs() {
        // sigma: g1 -> g1, g2 -> g2^-1 forces g3 -> g3^-1 through [g2,g1]=g3
        let g = extraspecial(3);
        let t = g.build_table(1000).unwrap();
        let images = vec![Word::single(0, 1), Word::single(1, 2), Word::single(2, 2)];
        let act = validate_involution(&g, &images, &t).unwrap();
        assert_eq!((act.d_plus, act.d_minus), (1, 1));
        // center layer carries the product of the signs
        assert_eq!(act.eigen_ranks(1).unwrap(), EigenSplit { d_plus: 0, d_minus: 1 });
    }

    #[test]
    fn extraspecial_wrong_center_image_is_rejected() {
        let g = extraspecial(3);
        let t = g.build_table(1000).unwrap();
        // fixing g3 contradicts [g2^-1, g1] = g3^-1
        let images = vec![Word::single(0, 1), Word::single(1, 2), Word::single(2, 1)];
        let err = validate_involution(&g, &images, &t).unwrap_err();
        assert!(matches!(err, InvolutionError::RelationMismatch { .. }));
        assert!(check_involution_relations(&g, &images).is_err());
    }

    #[test]
    fn extraspecial_full_inversion_split() {
        // g1 -> g1^-1, g2 -> g2^-1 fixes the center: [g2^-1,g1^-1] = g3
        let g = extraspecial(3);
        let t = g.build_table(1000).unwrap();
        let images = vec![Word::single(0, 2), Word::single(1, 2), Word::single(2, 1)];
        let act = validate_involution(&g, &images, &t).unwrap();
        assert_eq!((act.d_plus, act.d_minus), (0, 2));
        assert_eq!(act.eigen_ranks(1).unwrap(), EigenSplit { d_plus: 1, d_minus: 0 });
    }

    #[test]
    fn metacyclic_valid_and_invalid_inversions() {
        let g = metacyclic(3);
        let t = g.build_table(1000).unwrap();
        // inverting g1 works once g3 = g1^3 follows along
        let inv_g1 = g.element_inverse(&g.generator_element(0)).to_word();
        let inv_g3 = g.element_inverse(&g.generator_element(2)).to_word();
        let valid = vec![inv_g1, Word::single(1, 1), inv_g3, Word::single(3, 1)];
        let act = validate_involution(&g, &valid, &t).unwrap();
        assert_eq!((act.d_plus, act.d_minus), (1, 1));
        assert_eq!(act.eigen_ranks(1).unwrap(), EigenSplit { d_plus: 1, d_minus: 1 });

        // inverting g2 instead breaks [g2,g1] = g3^2
        let inv_g2 = g.element_inverse(&g.generator_element(1)).to_word();
        let inv_g4 = g.element_inverse(&g.generator_element(3)).to_word();
        let invalid = vec![Word::single(0, 1), inv_g2, Word::single(2, 1), inv_g4];
        assert!(matches!(
            validate_involution(&g, &invalid, &t),
            Err(InvolutionError::RelationMismatch { .. })
        ));

        // and inverting everything breaks it too: this group has no
        // inversion involution
        let all = diagonal_images(&g, &[false, false, false, false]);
        assert!(matches!(
            validate_involution(&g, &all, &t),
            Err(InvolutionError::RelationMismatch { .. })
        ));
    }

    #[test]
    fn collapsing_map_is_reported_as_non_bijective() {
        // g1 -> g1, g2 -> g1 preserves all relations of (Z/3)^2 but is not
        // injective; the staged table check must say NotBijective
        let g = elab(3, 2);
        let t = g.build_table(1000).unwrap();
        let images = vec![Word::single(0, 1), Word::single(0, 1)];
        assert!(matches!(
            validate_involution(&g, &images, &t),
            Err(InvolutionError::NotBijective)
        ));
        // the table-free check sees the same map fail at sigma^2 instead
        assert!(matches!(
            check_involution_relations(&g, &images),
            Err(InvolutionError::OrderExceedsTwo { .. })
        ));
    }

    #[test]
    fn order_four_map_is_rejected() {
        // on (Z/5)^2 the map g1 -> g2, g2 -> g1^-1 has order 4
        let g = elab(5, 2);
        let t = g.build_table(1000).unwrap();
        let images = vec![Word::single(1, 1), Word::single(0, 4)];
        assert!(matches!(
            validate_involution(&g, &images, &t),
            Err(InvolutionError::OrderExceedsTwo { .. })
        ));
    }

    #[test]
    fn swap_involution_has_balanced_split() {
        // g1 <-> g2 on (Z/3)^2: eigenvectors g1 g2 (+) and g1 g2^-1 (-)
        let g = elab(3, 2);
        let t = g.build_table(1000).unwrap();
        let images = vec![Word::single(1, 1), Word::single(0, 1)];
        let act = validate_involution(&g, &images, &t).unwrap();
        assert_eq!((act.d_plus, act.d_minus), (1, 1));
    }

    #[test]
    fn image_count_is_checked() {
        let g = elab(3, 2);
        let t = g.build_table(1000).unwrap();
        assert!(matches!(
            validate_involution(&g, &[Word::single(0, 1)], &t),
            Err(InvolutionError::ImageCount { got: 1, want: 2 })
        ));
    }

    #[test]
    fn trivial_group_identity_involution() {
        let g = PcPresentation::new(3, 0, vec![], BTreeMap::new()).unwrap();
        let t = g.build_table(10).unwrap();
        let act = validate_involution(&g, &[], &t).unwrap();
        assert_eq!((act.d_plus, act.d_minus), (0, 0));
        assert!(act.layer_matrices.is_empty());
    }

    #[test]
    fn permutation_is_an_automorphism_of_the_table() {
        let g = extraspecial(3);
        let t = g.build_table(1000).unwrap();
        let images = vec![Word::single(0, 2), Word::single(1, 2), Word::single(2, 1)];
        let act = validate_involution(&g, &images, &t).unwrap();
        for a in 0..27u32 {
            for b in 0..27u32 {
                assert_eq!(
                    act.perm[t.mul(a, b) as usize],
                    t.mul(act.perm[a as usize], act.perm[b as usize])
                );
            }
        }
    }
}
