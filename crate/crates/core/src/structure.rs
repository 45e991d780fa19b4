//! Structural invariants of a finite p-group given by its multiplication
//! table: descending p-central series, Frattini subgroup, minimal generator
//! rank, powerful-ness, and coordinate charts on the elementary abelian
//! layers of the series.

use crate::fp_linalg::MatFp;
use crate::pc::{GroupTable, PcError, Subgroup};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("group is not powerful")]
    NotPowerful,
    #[error("p-power map fails to be linear on layer {layer}")]
    PowerMapNotLinear { layer: usize },
    #[error(transparent)]
    Pc(#[from] PcError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Descending p-central series G = G_1 >= G_2 >= ... >= 1 with
/// G_{i+1} = G_i^p [G_i, G]. The last term is always the trivial subgroup,
/// and layer i (0-based) is the elementary abelian quotient
/// terms[i] / terms[i+1] of rank layer_ranks[i].
#[derive(Debug, Clone)]
pub struct CentralSeries {
    pub terms: Vec<Subgroup>,
    pub layer_ranks: Vec<usize>,
}

fn log_p_exact(p: u32, mut m: usize) -> Option<usize> {
    let mut k = 0;
    while m > 1 {
        if m % p as usize != 0 {
            return None;
        }
        m /= p as usize;
        k += 1;
    }
    Some(k)
}

pub fn p_central_series(t: &GroupTable) -> Result<CentralSeries, StructureError> {
    let p = t.p() as u64;
    let order = t.order() as u32;
    let mut terms: Vec<Subgroup> = Vec::new();
    let mut cur = t.subgroup_closure(&(0..order).collect::<Vec<_>>());
    loop {
        let cur_len = cur.len();
        terms.push(cur.clone());
        if cur_len == 1 {
            break;
        }
        let mut gens: Vec<u32> = Vec::new();
        for &x in cur.elems() {
            gens.push(t.pow(x, p));
            for g in 0..order {
                gens.push(t.commutator(x, g));
            }
        }
        gens.sort_unstable();
        gens.dedup();
        let next = t.subgroup_closure(&gens);
        if next.len() >= cur_len {
            return Err(StructureError::Internal("series failed to descend".into()));
        }
        cur = next;
    }
    let mut layer_ranks = Vec::with_capacity(terms.len().saturating_sub(1));
    for w in terms.windows(2) {
        let quot = w[0].len() / w[1].len();
        let rank = log_p_exact(t.p(), quot)
            .ok_or_else(|| StructureError::Internal("layer size not a p-power".into()))?;
        layer_ranks.push(rank);
    }
    Ok(CentralSeries { terms, layer_ranks })
}

/// Subgroup generated by all commutators.
pub fn derived_subgroup(t: &GroupTable) -> Subgroup {
    let order = t.order() as u32;
    let mut gens: Vec<u32> = Vec::new();
    for x in 0..order {
        for y in 0..x {
            gens.push(t.commutator(x, y));
        }
    }
    gens.sort_unstable();
    gens.dedup();
    t.subgroup_closure(&gens)
}

/// The set of p-th powers, without closing under multiplication.
pub fn power_image_set(t: &GroupTable) -> Vec<u32> {
    let p = t.p() as u64;
    let mut v: Vec<u32> = (0..t.order() as u32).map(|x| t.pow(x, p)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// G^p, the subgroup generated by all p-th powers.
pub fn power_subgroup(t: &GroupTable) -> Subgroup {
    t.subgroup_closure(&power_image_set(t))
}

/// Frattini subgroup G^p [G, G], computed elementwise.
pub fn frattini(t: &GroupTable) -> Subgroup {
    let mut gens = power_image_set(t);
    gens.extend(derived_subgroup(t).elems());
    gens.sort_unstable();
    gens.dedup();
    t.subgroup_closure(&gens)
}

/// Frattini subgroup from a known generating set: normal closure of the
/// generator p-th powers and pairwise commutators.
pub fn frattini_via_generators(t: &GroupTable, gens: &[u32]) -> Subgroup {
    let p = t.p() as u64;
    let mut seed: Vec<u32> = gens.iter().map(|&g| t.pow(g, p)).collect();
    for &a in gens {
        for &b in gens {
            seed.push(t.commutator(a, b));
        }
    }
    seed.sort_unstable();
    seed.dedup();
    t.normal_closure(&seed)
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerfulReport {
    pub powerful: bool,
    /// pair whose commutator escapes G^p, as element labels
    pub witness: Option<[String; 2]>,
}

/// A p-group (p odd) is powerful when [G, G] <= G^p.
pub fn is_powerful(t: &GroupTable) -> PowerfulReport {
    let gp = power_subgroup(t);
    let order = t.order() as u32;
    for x in 0..order {
        for y in 0..x {
            let c = t.commutator(x, y);
            if !gp.contains(c) {
                return PowerfulReport {
                    powerful: false,
                    witness: Some([t.label(x).to_string(), t.label(y).to_string()]),
                };
            }
        }
    }
    PowerfulReport { powerful: true, witness: None }
}

/// Minimal number of generators d(G) = dim G / Phi(G).
pub fn generator_rank(series: &CentralSeries) -> usize {
    series.layer_ranks.first().copied().unwrap_or(0)
}

/// Greedy minimal generating set; its size always equals d(G).
pub fn minimal_generating_set(t: &GroupTable) -> Vec<u32> {
    let phi = frattini(t);
    let mut chosen: Vec<u32> = Vec::new();
    let mut seed: Vec<u32> = phi.elems().to_vec();
    let mut cur = t.subgroup_closure(&seed);
    for x in 0..t.order() as u32 {
        if cur.len() == t.order() {
            break;
        }
        if !cur.contains(x) {
            chosen.push(x);
            seed.push(x);
            cur = t.subgroup_closure(&seed);
        }
    }
    chosen
}

/// Coordinates on one elementary abelian layer terms[i] / terms[i+1].
#[derive(Debug, Clone)]
pub struct LayerChart {
    pub rank: usize,
    /// ambient indices of the chosen basis coset representatives
    pub basis_global: Vec<u32>,
    to_parent: Vec<u32>,
    q_projection: Vec<u32>,
    coords: Vec<Vec<u32>>,
}

impl LayerChart {
    /// F_p coordinates of the coset of an ambient element, or None when the
    /// element lies outside the layer's subgroup.
    pub fn coords_of(&self, ambient: u32) -> Option<&[u32]> {
        let local = self.to_parent.binary_search(&ambient).ok()?;
        Some(&self.coords[self.q_projection[local] as usize])
    }
}

pub fn layer_chart(
    t: &GroupTable,
    series: &CentralSeries,
    layer: usize,
) -> Result<LayerChart, StructureError> {
    let top = &series.terms[layer];
    let bottom = &series.terms[layer + 1];
    let (sub_t, to_parent) = t.subgroup_table(top);
    let local_bottom: Vec<u32> = bottom
        .elems()
        .iter()
        .map(|&x| {
            to_parent
                .binary_search(&x)
                .map(|i| i as u32)
                .map_err(|_| StructureError::Internal("series terms not nested".into()))
        })
        .collect::<Result<_, _>>()?;
    let q = sub_t.quotient(&sub_t.subgroup_closure(&local_bottom))?;
    let qt = &q.table;
    // greedy basis of the elementary abelian quotient
    let mut basis_q: Vec<u32> = Vec::new();
    let mut cur = qt.subgroup_closure(&[]);
    for x in 0..qt.order() as u32 {
        if cur.len() == qt.order() {
            break;
        }
        if !cur.contains(x) {
            basis_q.push(x);
            cur = qt.subgroup_closure(&basis_q);
        }
    }
    let rank = basis_q.len();
    if qt.order() != (t.p() as usize).pow(rank as u32) {
        return Err(StructureError::Internal("layer is not elementary abelian".into()));
    }
    // enumerate all coordinate tuples; each quotient element is hit once
    let mut coords = vec![Vec::new(); qt.order()];
    let p = t.p();
    for m in 0..qt.order() {
        let mut tuple = vec![0u32; rank];
        let mut rem = m;
        for c in tuple.iter_mut() {
            *c = (rem % p as usize) as u32;
            rem /= p as usize;
        }
        let mut prod = 0u32;
        for (j, &b) in basis_q.iter().enumerate() {
            prod = qt.mul(prod, qt.pow(b, tuple[j] as u64));
        }
        if !coords[prod as usize].is_empty() && m != 0 {
            return Err(StructureError::Internal("layer coordinates collide".into()));
        }
        coords[prod as usize] = tuple;
    }
    let basis_global = basis_q.iter().map(|&b| to_parent[q.reps[b as usize] as usize]).collect();
    Ok(LayerChart { rank, basis_global, to_parent, q_projection: q.projection, coords })
}

/// Matrix of the p-power map layer i -> layer i+1 in chart coordinates,
/// verified to be linear by checking every element of the layer.
pub fn p_power_layer_matrix(
    t: &GroupTable,
    series: &CentralSeries,
    layer: usize,
) -> Result<MatFp, StructureError> {
    let from = layer_chart(t, series, layer)?;
    let to = layer_chart(t, series, layer + 1)?;
    let p = t.p();
    let mut cols: Vec<Vec<u32>> = Vec::with_capacity(from.rank);
    for &b in &from.basis_global {
        let img = t.pow(b, p as u64);
        let c = to
            .coords_of(img)
            .ok_or_else(|| StructureError::Internal("p-th power escaped next term".into()))?;
        cols.push(c.to_vec());
    }
    let mut rows = vec![vec![0u32; from.rank]; to.rank];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            rows[i][j] = v;
        }
    }
    let m = MatFp::from_rows(p, &rows).map_err(|e| StructureError::Internal(e.to_string()))?;
    // exhaustive linearity check over the layer
    for &x in series.terms[layer].elems() {
        let xc = from.coords_of(x).ok_or_else(|| StructureError::Internal("chart gap".into()))?;
        let img = t.pow(x, p as u64);
        let want = to
            .coords_of(img)
            .ok_or_else(|| StructureError::Internal("p-th power escaped next term".into()))?;
        for i in 0..to.rank {
            let acc: u64 = (0..from.rank).map(|j| m.at(i, j) as u64 * xc[j] as u64).sum();
            if acc % p as u64 != want[i] as u64 {
                return Err(StructureError::PowerMapNotLinear { layer });
            }
        }
    }
    Ok(m)
}

/// Number of leading layers on which the p-power maps are bijective, starting
/// the count at 1 for the top layer itself. Only meaningful for powerful
/// groups, where each map is surjective and ranks never increase.
pub fn layer_regular_depth(t: &GroupTable, series: &CentralSeries) -> Result<usize, StructureError> {
    if !is_powerful(t).powerful {
        return Err(StructureError::NotPowerful);
    }
    let layers = series.layer_ranks.len();
    let mut depth = 1usize.min(layers.max(1));
    if layers == 0 {
        return Ok(0);
    }
    while depth < layers {
        let m = p_power_layer_matrix(t, series, depth - 1)?;
        if m.rows() == m.cols() && m.rank() == m.rows() {
            depth += 1;
        } else {
            break;
        }
    }
    Ok(depth)
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub p: u32,
    pub order: u64,
    pub abelian: bool,
    pub generator_rank: usize,
    pub layer_ranks: Vec<usize>,
    pub exponent: u64,
    pub frattini_order: u64,
    pub powerful: bool,
    pub powerful_witness: Option<[String; 2]>,
    pub layer_regular_depth: Option<usize>,
}

pub fn structure_report(t: &GroupTable) -> Result<StructureReport, StructureError> {
    let series = p_central_series(t)?;
    let pr = is_powerful(t);
    let exponent = (0..t.order() as u32).map(|x| t.element_order(x)).max().unwrap_or(1);
    let depth = if pr.powerful { Some(layer_regular_depth(t, &series)?) } else { None };
    Ok(StructureReport {
        p: t.p(),
        order: t.order() as u64,
        abelian: t.is_abelian(),
        generator_rank: generator_rank(&series),
        layer_ranks: series.layer_ranks.clone(),
        exponent,
        frattini_order: frattini(t).len() as u64,
        powerful: pr.powerful,
        powerful_witness: pr.witness,
        layer_regular_depth: depth,
    })
}
