//! Confidence polytopes: one Bloch-space half-space per POVM element
//! (or per grouping of elements), assembled so the intersection with
//! the state body contains the unknown state with probability ≥ 1 − ε.
//!
//! Each half-space reads a·r ≤ b with a = (d−1)η_i and
//! b = m_i(n_i/n + δ(n_i, ε_i)) − 1.

use serde::{Deserialize, Serialize};

use crate::clopper::solve_delta;
use crate::error::{Error, Result};
use crate::quantum::{
    bloch_of_element, embed_state, is_psd_within, unembed_coords, CountVector, DensityMatrix,
    HermitianBasis, Povm, TOL_PSD,
};

/// Membership slack applied to every facet inequality.
pub const FACET_SLACK: f64 = 1e-12;

/// Where a facet came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FacetProvenance {
    /// Direct facet of POVM element `index`.
    Element { index: usize },
    /// Facet of the grouped element Σ_{i∈members} E_i.
    Group { members: Vec<usize> },
}

/// Half-space a·r ≤ b in Bloch coordinates, with its ε share.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub eps_i: f64,
    /// True when the count solve had no positive root; the half-space
    /// then contains the whole state body and carries no information.
    pub clamped: bool,
    pub provenance: FacetProvenance,
}

impl Facet {
    /// Signed slack b − a·r; non-negative means satisfied.
    pub fn slack(&self, coords: &[f64]) -> f64 {
        let dot: f64 = self.normal.iter().zip(coords).map(|(a, r)| a * r).sum();
        self.offset - dot
    }

    pub fn satisfied(&self, coords: &[f64]) -> bool {
        self.slack(coords) >= -FACET_SLACK
    }
}

/// How the total ε budget is divided over facets.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsilonSplit {
    Uniform,
    /// Proportional to the given positive weights; the weight list
    /// length must match the number of facets being budgeted.
    Weighted(Vec<f64>),
}

/// Source measurement behind (part of) a polytope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceMeta {
    /// Total shot count of the measurement.
    pub n: u64,
    /// Fingerprint of the POVM that produced the facets.
    pub povm_sha256: String,
}

/// Intersection of facet half-spaces with the state body, together
/// with the ε budget that backs its confidence level 1 − ε.
#[derive(Debug, Clone)]
pub struct ConfidencePolytope {
    dim: usize,
    basis: HermitianBasis,
    facets: Vec<Facet>,
    epsilon_total: f64,
    sources: Vec<SourceMeta>,
}

impl ConfidencePolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn epsilon_total(&self) -> f64 {
        self.epsilon_total
    }

    pub fn sources(&self) -> &[SourceMeta] {
        &self.sources
    }

    /// Facet check only, against raw Bloch coordinates; ignores the
    /// state body.
    pub fn satisfies_facets(&self, coords: &[f64]) -> bool {
        self.facets.iter().all(|f| f.satisfied(coords))
    }

    /// Append extra facets (typically from `group_facets`), growing the
    /// ε budget by their shares.
    pub fn extended_with(&self, facets: Vec<Facet>) -> ConfidencePolytope {
        let extra: f64 = facets.iter().map(|f| f.eps_i).sum();
        let mut out = self.clone();
        out.facets.extend(facets);
        out.epsilon_total += extra;
        out
    }

    /// Membership of a Bloch point: every facet within slack and the
    /// unembedded matrix PSD.
    pub fn contains_point(&self, coords: &[f64]) -> bool {
        if coords.len() != self.dim * self.dim - 1 {
            return false;
        }
        self.satisfies_facets(coords)
            && is_psd_within(&unembed_coords(coords, &self.basis), TOL_PSD)
    }
}

/// Divide ε into k positive shares summing to ε.
pub fn split_epsilon(eps: f64, k: usize, split: &EpsilonSplit) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DomainError(format!("eps = {eps} outside (0,1)")));
    }
    if k == 0 {
        return Err(Error::InvalidSplit("k must be >= 1".into()));
    }
    match split {
        EpsilonSplit::Uniform => Ok(vec![eps / k as f64; k]),
        EpsilonSplit::Weighted(weights) => {
            if weights.len() != k {
                return Err(Error::InvalidSplit(format!(
                    "{} weights for {} shares",
                    weights.len(),
                    k
                )));
            }
            if weights.iter().any(|w| *w <= 0.0 || !w.is_finite()) {
                return Err(Error::InvalidSplit("weights must be positive".into()));
            }
            let total: f64 = weights.iter().sum();
            Ok(weights.iter().map(|w| eps * w / total).collect())
        }
    }
}

fn facet_from_element(
    m: f64,
    eta: &[f64],
    d: usize,
    n_i: u64,
    n: u64,
    eps_i: f64,
    provenance: FacetProvenance,
) -> Result<Facet> {
    let sol = solve_delta(n_i, n, eps_i)?;
    let normal = eta.iter().map(|v| (d as f64 - 1.0) * v).collect();
    Ok(Facet {
        normal,
        offset: m * sol.bound - 1.0,
        eps_i,
        clamped: sol.clamped,
        provenance,
    })
}

/// One facet per POVM element.
pub fn build_polytope(
    povm: &Povm,
    counts: &CountVector,
    eps: f64,
    split: &EpsilonSplit,
) -> Result<ConfidencePolytope> {
    if counts.len() != povm.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for {} POVM elements",
            counts.len(),
            povm.len()
        )));
    }
    let shares = split_epsilon(eps, povm.len(), split)?;
    let n = counts.total();
    let d = povm.dim();
    let facets = povm
        .bloch_params()
        .iter()
        .zip(counts.counts())
        .zip(shares.iter())
        .enumerate()
        .map(|(i, (((m, eta), &n_i), &eps_i))| {
            facet_from_element(*m, eta, d, n_i, n, eps_i, FacetProvenance::Element { index: i })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConfidencePolytope {
        dim: d,
        basis: povm.basis().clone(),
        facets,
        epsilon_total: eps,
        sources: vec![SourceMeta {
            n,
            povm_sha256: povm.fingerprint(),
        }],
    })
}

/// Additional facets from groupings of POVM elements: each group G
/// behaves as the single element E_G = Σ_{i∈G} E_i observed n_G times.
///
/// Groups must be non-empty proper subsets of the element index range,
/// pairwise distinct as sets; a group and its complement are distinct
/// and both allowed.
pub fn group_facets(
    povm: &Povm,
    counts: &CountVector,
    groups: &[Vec<usize>],
    eps_budget: &[f64],
) -> Result<Vec<Facet>> {
    if counts.len() != povm.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for {} POVM elements",
            counts.len(),
            povm.len()
        )));
    }
    if groups.len() != eps_budget.len() {
        return Err(Error::InvalidGroup(format!(
            "{} groups but {} budget entries",
            groups.len(),
            eps_budget.len()
        )));
    }
    let k = povm.len();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let d = povm.dim();
    let n = counts.total();
    let mut facets = Vec::with_capacity(groups.len());
    for (g, (members, &eps_i)) in groups.iter().zip(eps_budget).enumerate() {
        let mut sorted = members.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != members.len() {
            return Err(Error::InvalidGroup(format!("group {g} repeats an index")));
        }
        if sorted.is_empty() {
            return Err(Error::InvalidGroup(format!("group {g} is empty")));
        }
        if sorted.len() >= k {
            return Err(Error::InvalidGroup(format!(
                "group {g} must be a proper subset of the {k} elements"
            )));
        }
        if sorted.iter().any(|&i| i >= k) {
            return Err(Error::InvalidGroup(format!("group {g} index out of range")));
        }
        if seen.contains(&sorted) {
            return Err(Error::InvalidGroup(format!("group {g} duplicates another")));
        }
        seen.push(sorted.clone());

        let mut e_g = povm.element(sorted[0]).clone();
        let mut n_g = counts.counts()[sorted[0]];
        for &i in &sorted[1..] {
            e_g += povm.element(i);
            n_g += counts.counts()[i];
        }
        let (m, eta) = bloch_of_element(&e_g, povm.basis())?;
        facets.push(facet_from_element(
            m,
            &eta,
            d,
            n_g,
            n,
            eps_i,
            FacetProvenance::Group { members: sorted },
        )?);
    }
    Ok(facets)
}

/// Build a polytope whose ε budget is split over base facets plus the
/// given groupings.
pub fn build_polytope_with_groups(
    povm: &Povm,
    counts: &CountVector,
    eps: f64,
    split: &EpsilonSplit,
    groups: &[Vec<usize>],
) -> Result<ConfidencePolytope> {
    if groups.is_empty() {
        return build_polytope(povm, counts, eps, split);
    }
    let total = povm.len() + groups.len();
    let shares = split_epsilon(eps, total, split)?;
    let base_eps: f64 = shares[..povm.len()].iter().sum();
    // Re-split the base share across elements proportionally.
    let base_split = EpsilonSplit::Weighted(shares[..povm.len()].to_vec());
    let mut poly = build_polytope(povm, counts, base_eps, &base_split)?;
    let grouped = group_facets(povm, counts, groups, &shares[povm.len()..])?;
    poly.facets.extend(grouped);
    poly.epsilon_total = eps;
    Ok(poly)
}

/// Intersection of polytopes from separate measurements on the same
/// system; confidence budgets add.
pub fn combine_polytopes(polys: &[ConfidencePolytope]) -> Result<ConfidencePolytope> {
    let first = polys
        .first()
        .ok_or_else(|| Error::DomainError("no polytopes to combine".into()))?;
    for p in &polys[1..] {
        if p.dim != first.dim || !p.basis.approx_eq(&first.basis, 1e-12) {
            return Err(Error::BasisMismatch(format!(
                "cannot combine d={} with d={}",
                first.dim, p.dim
            )));
        }
    }
    Ok(ConfidencePolytope {
        dim: first.dim,
        basis: first.basis.clone(),
        facets: polys.iter().flat_map(|p| p.facets.iter().cloned()).collect(),
        epsilon_total: polys.iter().map(|p| p.epsilon_total).sum(),
        sources: polys.iter().flat_map(|p| p.sources.iter().cloned()).collect(),
    })
}

/// Membership test for a validated state.
pub fn contains(poly: &ConfidencePolytope, rho: &DensityMatrix) -> Result<bool> {
    if rho.dim() != poly.dim {
        return Err(Error::DimensionMismatch(format!(
            "state d={} vs polytope d={}",
            rho.dim(),
            poly.dim
        )));
    }
    let r = embed_state(rho, &poly.basis)?;
    Ok(poly.satisfies_facets(r.coords()))
}

/// Swap the facet list of an existing polytope; only tests build
/// synthetic facet systems this way.
#[cfg(test)]
pub(crate) fn replace_facets_for_tests(
    poly: &ConfidencePolytope,
    facets: Vec<Facet>,
) -> ConfidencePolytope {
    let mut out = poly.clone();
    out.facets = facets;
    out
}

/// An empty polytope over the state body: no facets, confidence budget
/// `eps`. Useful as a combination identity and in tests.
pub fn trivial_polytope(basis: &HermitianBasis, eps: f64) -> ConfidencePolytope {
    ConfidencePolytope {
        dim: basis.dim(),
        basis: basis.clone(),
        facets: Vec::new(),
        epsilon_total: eps,
        sources: Vec::new(),
    }
}
