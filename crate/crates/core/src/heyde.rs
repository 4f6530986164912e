//! Conditional symmetry of `L2 = xi1 + delta xi2` given `L1 = xi1 + xi2` for
//! independent `xi_j` on a finite Abelian group, the equivalent
//! characteristic-function equation, and the decomposition of solutions.
//!
//! Symmetry is decided exactly on the joint law:
//! `P(L1 = a, L2 = b) = P(L1 = a, L2 = -b)` for all `a, b`. The functional
//! equation
//!
//! ```text
//! mu1^(u + v) mu2^(u + eps v) = mu1^(u - v) mu2^(u - eps v),   eps = adjoint(delta)
//! ```
//!
//! is evaluated in floating point over the full dual grid.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::distribution::RationalDistribution;
use crate::error::{Error, Result};
use crate::group::{
    automorphisms, check_heyde_condition, invariant_subgroups, p_component, Bounds,
    FiniteAbelianGroup, GroupElement, GroupMap, HeydeCondition, Subgroup,
};
use crate::linalg::{self, Matrix};
use crate::rational::{self, Rational};

/// Default residual tolerance for the functional equation.
pub const FEQ_TOLERANCE: f64 = 1e-9;

/// Upper limit on candidate active sets examined by the vertex enumeration.
pub const MAX_VERTEX_CANDIDATES: u128 = 500_000;

/// Exact law of `(L1, L2)`; index `a * N + b`.
#[derive(Clone, PartialEq, Eq)]
pub struct JointDistribution {
    group: FiniteAbelianGroup,
    masses: Vec<Rational>,
}

impl JointDistribution {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn mass(&self, a: &GroupElement, b: &GroupElement) -> &Rational {
        let n = self.group.order();
        &self.masses[self.group.index_of(a) * n + self.group.index_of(b)]
    }

    fn mass_idx(&self, a: usize, b: usize) -> &Rational {
        &self.masses[a * self.group.order() + b]
    }

    pub fn total(&self) -> Rational {
        self.masses.iter().sum()
    }

    /// Law of `L1`.
    pub fn first_marginal(&self) -> RationalDistribution {
        let n = self.group.order();
        let masses = (0..n)
            .map(|a| (0..n).map(|b| self.mass_idx(a, b)).sum())
            .collect();
        RationalDistribution::new(&self.group, masses).expect("marginal of a probability law")
    }

    /// Law of `L2`.
    pub fn second_marginal(&self) -> RationalDistribution {
        let n = self.group.order();
        let masses = (0..n)
            .map(|b| (0..n).map(|a| self.mass_idx(a, b)).sum())
            .collect();
        RationalDistribution::new(&self.group, masses).expect("marginal of a probability law")
    }
}

impl fmt::Debug for JointDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.group.order();
        let mut m = f.debug_map();
        for a in 0..n {
            for b in 0..n {
                let p = self.mass_idx(a, b);
                if !p.is_zero() {
                    m.entry(
                        &format!("{},{}", self.group.element_at(a), self.group.element_at(b)),
                        &p.to_string(),
                    );
                }
            }
        }
        m.finish()
    }
}

fn common_group<'a>(
    mu1: &'a RationalDistribution,
    mu2: &RationalDistribution,
    delta: &GroupMap,
) -> Result<&'a FiniteAbelianGroup> {
    let g = mu1.group();
    g.same_as(mu2.group())?;
    g.same_as(delta.source())?;
    g.same_as(delta.target())?;
    if !delta.is_automorphism() {
        let witness = delta
            .kernel()
            .iter()
            .find(|x| *x != g.zero())
            .map(|x| x.to_string())
            .unwrap_or_default();
        return Err(Error::NotAnAutomorphism(witness));
    }
    Ok(g)
}

/// `P(L1 = a, L2 = b) = sum over x1 + x2 = a, x1 + delta x2 = b of mu1(x1) mu2(x2)`.
pub fn joint(
    mu1: &RationalDistribution,
    mu2: &RationalDistribution,
    delta: &GroupMap,
) -> Result<JointDistribution> {
    let g = common_group(mu1, mu2, delta)?;
    let n = g.order();
    let delta_idx = delta.index_table();
    let mut masses = vec![rational::zero(); n * n];
    let right = mu2.support_indices();
    for x1 in mu1.support_indices() {
        for &x2 in &right {
            let a = g.add_idx(x1, x2);
            let b = g.add_idx(x1, delta_idx[x2]);
            masses[a * n + b] += &mu1.masses()[x1] * &mu2.masses()[x2];
        }
    }
    Ok(JointDistribution {
        group: g.clone(),
        masses,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymmetryCheck {
    Symmetric,
    /// `P(L1 = a, L2 = b) > P(L1 = a, L2 = -b)`.
    Violated { a: GroupElement, b: GroupElement },
}

impl SymmetryCheck {
    pub fn is_symmetric(&self) -> bool {
        matches!(self, SymmetryCheck::Symmetric)
    }
}

/// Exact test of conditional symmetry of `L2` given `L1`.
pub fn is_conditionally_symmetric(
    mu1: &RationalDistribution,
    mu2: &RationalDistribution,
    delta: &GroupMap,
) -> Result<SymmetryCheck> {
    let j = joint(mu1, mu2, delta)?;
    let g = &j.group;
    let n = g.order();
    for a in 0..n {
        for b in 0..n {
            if j.mass_idx(a, b) > j.mass_idx(a, g.neg_idx(b)) {
                return Ok(SymmetryCheck::Violated {
                    a: g.element_at(a),
                    b: g.element_at(b),
                });
            }
        }
    }
    Ok(SymmetryCheck::Symmetric)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeqCheck {
    pub holds: bool,
    pub max_residual: f64,
    /// The `(u, v)` attaining the maximal residual.
    pub worst: (GroupElement, GroupElement),
}

/// Evaluates the characteristic-function equation on all of `Y x Y`.
pub fn satisfies_feq(
    mu1: &RationalDistribution,
    mu2: &RationalDistribution,
    delta: &GroupMap,
    tol: f64,
) -> Result<FeqCheck> {
    let g = common_group(mu1, mu2, delta)?;
    let eps = delta.adjoint().index_table();
    let t1 = mu1.char_table();
    let t2 = mu2.char_table();
    let n = g.order();
    let mut max_residual = 0.0f64;
    let mut worst = (0, 0);
    for u in 0..n {
        for v in 0..n {
            let lhs = t1[g.add_idx(u, v)] * t2[g.add_idx(u, eps[v])];
            let rhs = t1[g.sub_idx(u, v)] * t2[g.sub_idx(u, eps[v])];
            let r = (lhs - rhs).norm();
            if r > max_residual {
                max_residual = r;
                worst = (u, v);
            }
        }
    }
    Ok(FeqCheck {
        holds: max_residual <= tol,
        max_residual,
        worst: (g.element_at(worst.0), g.element_at(worst.1)),
    })
}

/// True when the exact symmetry test and the functional equation agree.
pub fn symmetry_criteria_agree(
    mu1: &RationalDistribution,
    mu2: &RationalDistribution,
    delta: &GroupMap,
) -> Result<bool> {
    let exact = is_conditionally_symmetric(mu1, mu2, delta)?.is_symmetric();
    let feq = satisfies_feq(mu1, mu2, delta, FEQ_TOLERANCE)?.holds;
    Ok(exact == feq)
}

/// All partners `mu1` of a fixed `mu2`: the affine solution set of the
/// symmetry equations intersected with the probability simplex.
#[derive(Debug, Clone)]
pub struct PartnerSolution {
    group: FiniteAbelianGroup,
    /// A feasible member, when the set is nonempty.
    pub particular: Option<RationalDistribution>,
    /// Directions spanning the homogeneous solutions.
    pub basis: Vec<Vec<Rational>>,
    /// Vertices of the solution polytope, in canonical order.
    pub vertices: Vec<RationalDistribution>,
}

impl PartnerSolution {
    pub fn is_empty(&self) -> bool {
        self.particular.is_none()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.particular.as_ref().map(|_| self.basis.len())
    }

    /// Exact membership test in the affine hull of the solution set.
    pub fn contains(&self, mu1: &RationalDistribution) -> bool {
        let Some(p) = &self.particular else {
            return false;
        };
        if mu1.group() != &self.group {
            return false;
        }
        let diff: Vec<Rational> = mu1
            .masses()
            .iter()
            .zip(p.masses())
            .map(|(a, b)| a - b)
            .collect();
        if self.basis.is_empty() {
            return diff.iter().all(Zero::is_zero);
        }
        let n = diff.len();
        let a: Matrix = (0..n)
            .map(|i| self.basis.iter().map(|v| v[i].clone()).collect())
            .collect();
        linalg::solve_affine(&a, &diff, self.basis.len()).is_some()
    }
}

fn symmetry_system(mu2: &RationalDistribution, delta: &GroupMap) -> (Matrix, Vec<Rational>) {
    let g = mu2.group();
    let n = g.order();
    let delta_idx = delta.index_table();
    // row (a, b) holds the coefficients of P(a, b) - P(a, -b) in mu1
    let mut rows: Vec<Vec<Rational>> = vec![vec![rational::zero(); n]; n * n];
    for a in 0..n {
        for x1 in 0..n {
            let x2 = g.sub_idx(a, x1);
            let w = &mu2.masses()[x2];
            if w.is_zero() {
                continue;
            }
            let b = g.add_idx(x1, delta_idx[x2]);
            let nb = g.neg_idx(b);
            if b == nb {
                continue;
            }
            rows[a * n + b][x1] += w;
            rows[a * n + nb][x1] -= w;
        }
    }
    let mut a: Matrix = rows
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut b = vec![rational::zero(); a.len()];
    a.push(vec![rational::one(); n]);
    b.push(rational::one());
    (a, b)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// Lexicographic `k`-subsets of `0..n`.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn polytope_vertices(
    particular: &[Rational],
    basis: &[Vec<Rational>],
) -> Result<Vec<Vec<Rational>>> {
    let n = particular.len();
    let d = basis.len();
    let moving: Vec<usize> = (0..n)
        .filter(|&i| basis.iter().any(|v| !v[i].is_zero()))
        .collect();
    if (0..n)
        .filter(|i| !moving.contains(i))
        .any(|i| particular[i].is_negative())
    {
        return Ok(Vec::new());
    }
    if d == 0 {
        return Ok(if particular.iter().all(rational::is_nonnegative) {
            vec![particular.to_vec()]
        } else {
            Vec::new()
        });
    }
    let candidates = binomial(moving.len(), d);
    if candidates > MAX_VERTEX_CANDIDATES {
        return Err(Error::SizeLimit {
            what: "partner polytope vertex search",
            size: candidates.min(usize::MAX as u128) as usize,
            bound: MAX_VERTEX_CANDIDATES as usize,
        });
    }
    let mut vertices: Vec<Vec<Rational>> = Vec::new();
    for_each_subset(moving.len(), d, |subset| {
        let rows: Matrix = subset
            .iter()
            .map(|&s| basis.iter().map(|v| v[moving[s]].clone()).collect())
            .collect();
        let rhs: Vec<Rational> = subset.iter().map(|&s| -particular[moving[s]].clone()).collect();
        let Some(c) = linalg::solve_square(&rows, &rhs) else {
            return;
        };
        let point: Vec<Rational> = (0..n)
            .map(|i| {
                basis
                    .iter()
                    .zip(&c)
                    .fold(particular[i].clone(), |acc, (v, ci)| acc + &v[i] * ci)
            })
            .collect();
        if point.iter().all(rational::is_nonnegative) && !vertices.contains(&point) {
            vertices.push(point);
        }
    });
    vertices.sort();
    Ok(vertices)
}

/// Solves the (linear in `mu1`) symmetry condition for a fixed `mu2`.
pub fn solve_partner(mu2: &RationalDistribution, delta: &GroupMap) -> Result<PartnerSolution> {
    let g = common_group(mu2, mu2, delta)?.clone();
    let (a, b) = symmetry_system(mu2, delta);
    let empty = PartnerSolution {
        group: g.clone(),
        particular: None,
        basis: Vec::new(),
        vertices: Vec::new(),
    };
    let Some(affine) = linalg::solve_affine(&a, &b, g.order()) else {
        return Ok(empty);
    };
    let vertices = polytope_vertices(&affine.particular, &affine.basis)?;
    let vertices: Vec<RationalDistribution> = vertices
        .into_iter()
        .map(|v| RationalDistribution::new(&g, v))
        .collect::<Result<_>>()?;
    if vertices.is_empty() {
        return Ok(empty);
    }
    Ok(PartnerSolution {
        group: g,
        particular: Some(vertices[0].clone()),
        basis: affine.basis,
        vertices,
    })
}

/// `mu_j = rho_j * m_F * E_{g_j}` with `sigma(rho_j)` in the 2-component and
/// `F` free of elements of order 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub rho: [RationalDistribution; 2],
    pub f: Subgroup,
    pub shifts: [GroupElement; 2],
}

impl Decomposition {
    pub fn reconstruct(&self, j: usize) -> Result<RationalDistribution> {
        Ok(self.rho[j]
            .convolve(&RationalDistribution::haar(&self.f))?
            .shift(&self.shifts[j]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompositionDefect {
    GroupMismatch(String),
    FContainsOrderTwo(GroupElement),
    FNotInvariant,
    RhoOutsideTwoComponent { j: usize, element: GroupElement },
    ReconstructionMismatch { j: usize },
}

impl fmt::Display for DecompositionDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GroupMismatch(e) => write!(f, "group mismatch: {e}"),
            Self::FContainsOrderTwo(x) => write!(f, "F contains order-2 element {x}"),
            Self::FNotInvariant => write!(f, "delta(F) != F"),
            Self::RhoOutsideTwoComponent { j, element } => {
                write!(f, "rho{} charges {element} outside the 2-component", j + 1)
            }
            Self::ReconstructionMismatch { j } => {
                write!(f, "rho{0} * m_F * E_g{0} does not reproduce mu{0}", j + 1)
            }
        }
    }
}

/// Checks every decomposition invariant and the exact reconstruction.
pub fn verify_decomposition(
    mu1: &RationalDistribution,
    mu2: &RationalDistribution,
    delta: &GroupMap,
    dec: &Decomposition,
) -> std::result::Result<(), DecompositionDefect> {
    let g = mu1.group();
    let mismatch = |e: Error| DecompositionDefect::GroupMismatch(e.to_string());
    g.same_as(mu2.group()).map_err(mismatch)?;
    g.same_as(delta.source()).map_err(mismatch)?;
    g.same_as(dec.f.parent()).map_err(mismatch)?;
    for r in &dec.rho {
        g.same_as(r.group()).map_err(mismatch)?;
    }
    if let Some(x) = dec.f.iter().find(|x| g.element_order(x) == 2) {
        return Err(DecompositionDefect::FContainsOrderTwo(x));
    }
    if !dec.f.is_invariant_under(delta) {
        return Err(DecompositionDefect::FNotInvariant);
    }
    let two = p_component(g, 2);
    for (j, r) in dec.rho.iter().enumerate() {
        if let Some(&i) = r.support_indices().iter().find(|&&i| !two.contains_idx(i)) {
            return Err(DecompositionDefect::RhoOutsideTwoComponent {
                j,
                element: g.element_at(i),
            });
        }
    }
    for (j, mu) in [mu1, mu2].into_iter().enumerate() {
        if !g.contains(&dec.shifts[j]) {
            return Err(DecompositionDefect::GroupMismatch(format!(
                "shift {} is not an element of {g}",
                dec.shifts[j]
            )));
        }
        match dec.reconstruct(j) {
            Ok(r) if &r == mu => {}
            _ => return Err(DecompositionDefect::ReconstructionMismatch { j }),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractError {
    /// The pair is not conditionally symmetric.
    NotSymmetric(SymmetryCheck),
    /// No admissible `F` works for both distributions.
    NoDecomposition,
    Bound(Error),
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotSymmetric(SymmetryCheck::Violated { a, b }) => {
                write!(f, "not conditionally symmetric at a={a}, b={b}")
            }
            Self::NotSymmetric(SymmetryCheck::Symmetric) => write!(f, "not conditionally symmetric"),
            Self::NoDecomposition => write!(f, "no decomposition found (counterexample candidate)"),
            Self::Bound(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for ExtractError {
    fn from(e: Error) -> Self {
        ExtractError::Bound(e)
    }
}

/// `rho` with `rho * m_F = nu` and `sigma(rho)` inside `two`, if one exists.
fn deconvolve_haar(
    nu: &RationalDistribution,
    f: &Subgroup,
    two: &Subgroup,
) -> Option<RationalDistribution> {
    let g = nu.group();
    let mut rho = vec![rational::zero(); g.order()];
    let mut covered = vec![false; g.order()];
    for &d in two.indices() {
        for &k in f.indices() {
            covered[g.add_idx(d, k)] = true;
        }
    }
    for i in nu.support_indices() {
        if !covered[i] {
            return None;
        }
        if f.indices().iter().any(|&k| nu.masses()[g.add_idx(i, k)] != nu.masses()[i]) {
            return None;
        }
    }
    for &d in two.indices() {
        rho[d] = f
            .indices()
            .iter()
            .map(|&k| &nu.masses()[g.add_idx(d, k)])
            .sum();
    }
    RationalDistribution::new(g, rho).ok()
}

fn factor_one(
    mu: &RationalDistribution,
    f: &Subgroup,
    two: &Subgroup,
) -> Option<(RationalDistribution, GroupElement)> {
    let g = mu.group();
    let mut shifts = vec![g.zero()];
    shifts.extend(mu.support().into_iter().filter(|x| *x != g.zero()));
    for shift in shifts {
        let nu = mu.shift(&g.neg(&shift));
        if let Some(rho) = deconvolve_haar(&nu, f, two) {
            return Some((rho, shift));
        }
    }
    None
}

/// Searches `delta`-invariant odd-order subgroups `F`, largest first, for a
/// factorization `mu_j = rho_j * m_F * E_{g_j}`.
pub fn extract_decomposition(
    mu1: &RationalDistribution,
    mu2: &RationalDistribution,
    delta: &GroupMap,
    bounds: &Bounds,
) -> std::result::Result<Decomposition, ExtractError> {
    let check = is_conditionally_symmetric(mu1, mu2, delta)?;
    if !check.is_symmetric() {
        return Err(ExtractError::NotSymmetric(check));
    }
    let g = mu1.group();
    let two = p_component(g, 2);
    let mut candidates: Vec<Subgroup> = invariant_subgroups(g, delta, bounds)?
        .into_iter()
        .filter(|s| s.order() % 2 == 1)
        .collect();
    candidates.sort_by(|a, b| b.order().cmp(&a.order()).then_with(|| a.cmp(b)));
    for f in candidates {
        let Some((rho1, g1)) = factor_one(mu1, &f, &two) else {
            continue;
        };
        let Some((rho2, g2)) = factor_one(mu2, &f, &two) else {
            continue;
        };
        let dec = Decomposition {
            rho: [rho1, rho2],
            f,
            shifts: [g1, g2],
        };
        if verify_decomposition(mu1, mu2, delta, &dec).is_ok() {
            return Ok(dec);
        }
    }
    Err(ExtractError::NoDecomposition)
}

/// Exhaustive scan of `Aut(X)` for the condition `Ker(I + delta) = {0}`.
#[derive(Debug, Clone)]
pub struct AutomorphismScan {
    pub valid: Vec<GroupMap>,
    /// Every rejected automorphism with a nonzero element of `Ker(I + delta)`.
    pub rejected: Vec<(GroupMap, GroupElement)>,
}

pub fn enumerate_valid_automorphisms(
    group: &FiniteAbelianGroup,
    bounds: &Bounds,
) -> Result<AutomorphismScan> {
    let mut scan = AutomorphismScan {
        valid: Vec::new(),
        rejected: Vec::new(),
    };
    for delta in automorphisms(group, bounds)? {
        match check_heyde_condition(&delta)? {
            HeydeCondition::Holds => scan.valid.push(delta),
            HeydeCondition::Fails { witness } => scan.rejected.push((delta, witness)),
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn z(orders: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(orders).unwrap()
    }

    fn point(g: &FiniteAbelianGroup, c: &[i64]) -> RationalDistribution {
        RationalDistribution::point_mass(g, &g.element(c).unwrap()).unwrap()
    }

    fn uniform(g: &FiniteAbelianGroup) -> RationalDistribution {
        RationalDistribution::haar(&Subgroup::whole(g))
    }

    #[test]
    fn joint_examples() {
        let z5 = z(&[5]);
        let two = GroupMap::scalar(&z5, 2);
        let u = uniform(&z5);
        let j = joint(&u, &u, &two).unwrap();
        for a in z5.elements() {
            for b in z5.elements() {
                assert_eq!(j.mass(&a, &b), &ratio(1, 25));
            }
        }
        let j = joint(&point(&z5, &[3]), &point(&z5, &[4]), &two).unwrap();
        assert_eq!(
            j.mass(&z5.element(&[2]).unwrap(), &z5.element(&[1]).unwrap()),
            &ratio(1, 1)
        );
        let mu1 = RationalDistribution::new(
            &z5,
            vec![ratio(1, 2), ratio(1, 4), ratio(1, 4), ratio(0, 1), ratio(0, 1)],
        )
        .unwrap();
        let mu2 = point(&z5, &[1]);
        let j = joint(&mu1, &mu2, &two).unwrap();
        assert_eq!(j.first_marginal(), mu1.convolve(&mu2).unwrap());
        assert_eq!(j.total(), ratio(1, 1));
    }

    #[test]
    fn symmetry_examples() {
        let z5 = z(&[5]);
        let two = GroupMap::scalar(&z5, 2);
        let u = uniform(&z5);
        assert!(is_conditionally_symmetric(&u, &u, &two).unwrap().is_symmetric());
        assert!(is_conditionally_symmetric(&point(&z5, &[3]), &point(&z5, &[1]), &two)
            .unwrap()
            .is_symmetric());
        let e1 = point(&z5, &[1]);
        assert_eq!(
            is_conditionally_symmetric(&e1, &e1, &two).unwrap(),
            SymmetryCheck::Violated {
                a: z5.element(&[2]).unwrap(),
                b: z5.element(&[3]).unwrap()
            }
        );
    }

    #[test]
    fn feq_examples() {
        let z5 = z(&[5]);
        let two = GroupMap::scalar(&z5, 2);
        let u = uniform(&z5);
        assert!(satisfies_feq(&u, &u, &two, FEQ_TOLERANCE).unwrap().holds);
        assert!(
            satisfies_feq(&point(&z5, &[3]), &point(&z5, &[1]), &two, FEQ_TOLERANCE)
                .unwrap()
                .holds
        );
        let bad = satisfies_feq(&u, &point(&z5, &[1]), &two, FEQ_TOLERANCE).unwrap();
        assert!(!bad.holds);
        assert!(bad.max_residual > 0.1);
        for (a, b) in [(&u, &u), (&u, &point(&z5, &[1]))] {
            assert!(symmetry_criteria_agree(a, b, &two).unwrap());
        }
    }

    #[test]
    fn non_automorphism_is_rejected() {
        let z6 = z(&[6]);
        let u = uniform(&z6);
        assert!(matches!(
            joint(&u, &u, &GroupMap::scalar(&z6, 2)),
            Err(Error::NotAnAutomorphism(_))
        ));
    }

    #[test]
    fn solve_partner_examples() {
        let z5 = z(&[5]);
        let two = GroupMap::scalar(&z5, 2);
        let sol = solve_partner(&uniform(&z5), &two).unwrap();
        assert_eq!(sol.vertices, vec![uniform(&z5)]);
        assert_eq!(sol.dimension(), Some(0));

        let sol = solve_partner(&point(&z5, &[1]), &two).unwrap();
        assert_eq!(sol.vertices, vec![point(&z5, &[3])]);

        let klein = z(&[2, 2]);
        let delta = GroupMap::endomorphism(&[vec![0, 1], vec![1, 1]], &klein).unwrap();
        let sol = solve_partner(&point(&klein, &[0, 0]), &delta).unwrap();
        assert_eq!(sol.dimension(), Some(3));
        assert_eq!(sol.vertices.len(), 4);
        let mu = RationalDistribution::new(
            &klein,
            vec![ratio(1, 8), ratio(3, 8), ratio(1, 4), ratio(1, 4)],
        )
        .unwrap();
        assert!(sol.contains(&mu));
    }

    #[test]
    fn empty_partner_set() {
        // mu2 = E_0 on Z5 with delta = 2 forces mu1 = E_0; a shifted mu2 moves it
        let z5 = z(&[5]);
        let two = GroupMap::scalar(&z5, 2);
        let sol = solve_partner(&point(&z5, &[0]), &two).unwrap();
        assert_eq!(sol.vertices, vec![point(&z5, &[0])]);
        assert!(!sol.contains(&point(&z5, &[1])));
    }

    #[test]
    fn verify_decomposition_examples() {
        let z5 = z(&[5]);
        let two = GroupMap::scalar(&z5, 2);
        let u = uniform(&z5);
        let e0 = point(&z5, &[0]);
        let dec = Decomposition {
            rho: [e0.clone(), e0.clone()],
            f: Subgroup::whole(&z5),
            shifts: [z5.zero(), z5.zero()],
        };
        assert_eq!(verify_decomposition(&u, &u, &two, &dec), Ok(()));

        let dec = Decomposition {
            rho: [e0.clone(), e0.clone()],
            f: Subgroup::trivial(&z5),
            shifts: [z5.element(&[3]).unwrap(), z5.element(&[1]).unwrap()],
        };
        assert_eq!(
            verify_decomposition(&point(&z5, &[3]), &point(&z5, &[1]), &two, &dec),
            Ok(())
        );

        let z6 = z(&[6]);
        let five = GroupMap::scalar(&z6, 5);
        let e0 = point(&z6, &[0]);
        let f = Subgroup::generated(&z6, &[z6.element(&[3]).unwrap()]).unwrap();
        let m = RationalDistribution::haar(&f);
        let dec = Decomposition {
            rho: [e0.clone(), e0],
            f,
            shifts: [z6.zero(), z6.zero()],
        };
        let err = verify_decomposition(&m, &m, &five, &dec).unwrap_err();
        assert!(matches!(err, DecompositionDefect::FContainsOrderTwo(_)));
        assert!(err.to_string().contains("F contains order-2 element"));
    }

    #[test]
    fn extract_examples() {
        let b = Bounds::default();
        let z5 = z(&[5]);
        let two = GroupMap::scalar(&z5, 2);
        let u = uniform(&z5);
        let dec = extract_decomposition(&u, &u, &two, &b).unwrap();
        assert!(dec.f.is_whole());
        assert_eq!(dec.rho[0], point(&z5, &[0]));
        assert_eq!(dec.shifts, [z5.zero(), z5.zero()]);

        // the shear fixes span{(1,0)} pointwise, so L2 = L1 and m_F is not a solution
        let z33 = z(&[3, 3]);
        let shear = GroupMap::endomorphism(&[vec![1, 1], vec![0, 1]], &z33).unwrap();
        let line = Subgroup::generated(&z33, &[z33.element(&[1, 0]).unwrap()]).unwrap();
        let m = RationalDistribution::haar(&line);
        assert!(!is_conditionally_symmetric(&m, &m, &shear).unwrap().is_symmetric());

        let z55 = z(&[5, 5]);
        let diag = GroupMap::endomorphism(&[vec![2, 0], vec![0, 1]], &z55).unwrap();
        let line = Subgroup::generated(&z55, &[z55.element(&[1, 0]).unwrap()]).unwrap();
        let m = RationalDistribution::haar(&line);
        assert!(is_conditionally_symmetric(&m, &m, &diag).unwrap().is_symmetric());
        let dec = extract_decomposition(&m, &m, &diag, &b).unwrap();
        assert_eq!(dec.f, line);
        assert_eq!(dec.shifts, [z55.zero(), z55.zero()]);
        assert_eq!(dec.rho[0], point(&z55, &[0, 0]));

        let klein = z(&[2, 2]);
        let delta = GroupMap::endomorphism(&[vec![0, 1], vec![1, 1]], &klein).unwrap();
        let mu1 = RationalDistribution::new(
            &klein,
            vec![ratio(1, 8), ratio(3, 8), ratio(1, 4), ratio(1, 4)],
        )
        .unwrap();
        let mu2 = point(&klein, &[0, 0]);
        let dec = extract_decomposition(&mu1, &mu2, &delta, &b).unwrap();
        assert!(dec.f.is_trivial());
        assert_eq!(dec.rho, [mu1, mu2]);
    }

    #[test]
    fn extract_rejects_asymmetric_pair() {
        let z5 = z(&[5]);
        let two = GroupMap::scalar(&z5, 2);
        let e1 = point(&z5, &[1]);
        assert!(matches!(
            extract_decomposition(&e1, &e1, &two, &Bounds::default()),
            Err(ExtractError::NotSymmetric(_))
        ));
    }

    #[test]
    fn valid_automorphism_examples() {
        let b = Bounds::default();
        let scan = enumerate_valid_automorphisms(&z(&[6]), &b).unwrap();
        assert!(scan.valid.is_empty());
        assert_eq!(scan.rejected.len(), 2);

        let z5 = z(&[5]);
        let scan = enumerate_valid_automorphisms(&z5, &b).unwrap();
        let valid: Vec<_> = scan.valid.iter().map(|f| f.matrix()[0][0]).collect();
        assert_eq!(valid, vec![1, 2, 3]);

        let klein = z(&[2, 2]);
        let scan = enumerate_valid_automorphisms(&klein, &b).unwrap();
        let expected = [
            GroupMap::endomorphism(&[vec![0, 1], vec![1, 1]], &klein).unwrap(),
            GroupMap::endomorphism(&[vec![1, 1], vec![1, 0]], &klein).unwrap(),
        ];
        assert_eq!(scan.valid.len(), 2);
        for e in &expected {
            assert!(scan.valid.contains(e));
        }
    }

    #[test]
    fn subset_enumeration() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_subset(3, 0, |_| count += 1);
        assert_eq!(count, 1);
        assert_eq!(binomial(27, 13), 20_058_300);
    }
}
