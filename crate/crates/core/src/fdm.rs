//! Finite differences on a finite Abelian group.
//!
//! For the residual
//! `R(u, v) = phi1(u+v) + phi2(u+eps v) - phi1(u-v) - phi2(u-eps v)`
//! the three substitutions `(u, v) -> (u + eps k1, v + k1)`,
//! `(u + k2, v + k2)` and `(u - eps k3, v + k3)`, each followed by
//! subtracting the unshifted equation, collapse to the exact identity
//!
//! ```text
//! D_{l31} D_{l21} D_{l11} phi1(u + v) = sum over S of (-1)^(3-|S|) R(u + a_S, v + b_S)
//! ```
//!
//! where `S` ranges over subsets of the three steps and `(a_S, b_S)` is the
//! sum of the chosen offsets. The identity holds for arbitrary `phi1, phi2`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement, GroupMap, Subgroup};
use crate::linalg::{self, Matrix};
use crate::rational::{self, Rational};

/// An exact rational-valued function on a finite group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupFunction {
    group: FiniteAbelianGroup,
    values: Vec<Rational>,
}

impl GroupFunction {
    pub fn new(group: &FiniteAbelianGroup, values: Vec<Rational>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::DimensionMismatch {
                expected: group.order(),
                found: values.len(),
            });
        }
        Ok(Self {
            group: group.clone(),
            values,
        })
    }

    pub fn constant(group: &FiniteAbelianGroup, c: Rational) -> Self {
        Self {
            group: group.clone(),
            values: vec![c; group.order()],
        }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn at(&self, y: &GroupElement) -> &Rational {
        &self.values[self.group.index_of(y)]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// `D_h f(y) = f(y + h) - f(y)`.
    pub fn finite_difference(&self, h: &GroupElement) -> Self {
        let hi = self.group.index_of(h);
        let values = (0..self.values.len())
            .map(|y| &self.values[self.group.add_idx(y, hi)] - &self.values[y])
            .collect();
        Self {
            group: self.group.clone(),
            values,
        }
    }

    /// `D_{h_k} ... D_{h_1} f`.
    pub fn iterated_difference(&self, shifts: &[GroupElement]) -> Self {
        shifts
            .iter()
            .fold(self.clone(), |f, h| f.finite_difference(h))
    }

    /// `D_h^{n+1} f = 0` for every `h`.
    pub fn is_polynomial(&self, n: usize) -> bool {
        self.group.elements().all(|h| {
            let mut f = self.clone();
            for _ in 0..=n {
                f = f.finite_difference(&h);
                if f.is_zero() {
                    return true;
                }
            }
            f.is_zero()
        })
    }

    /// Instance check of "a polynomial on a finite group is constant":
    /// true unless `f` is polynomial of some degree `n <= |Y|` yet not constant.
    ///
    /// Degree-`n` polynomials are also degree-`m` polynomials for `m >= n`,
    /// so testing `n = |Y|` covers every smaller degree.
    pub fn polynomial_implies_constant(&self) -> bool {
        !self.is_polynomial(self.group.order()) || self.is_constant()
    }
}

/// Shift elements produced by the three substitution steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeShifts {
    /// `(I + eps) k1`
    pub l11: GroupElement,
    /// `2 eps k1`
    pub l12: GroupElement,
    /// `(eps - I) k1`
    pub l13: GroupElement,
    /// `2 k2`
    pub l21: GroupElement,
    /// `(I + eps) k2`
    pub l22: GroupElement,
    /// `(I - eps) k3`
    pub l31: GroupElement,
}

pub fn cascade_shifts(
    eps: &GroupMap,
    k1: &GroupElement,
    k2: &GroupElement,
    k3: &GroupElement,
) -> CascadeShifts {
    let g = eps.source();
    let ek1 = eps.apply(k1);
    let ek2 = eps.apply(k2);
    let ek3 = eps.apply(k3);
    CascadeShifts {
        l11: g.add(k1, &ek1),
        l12: g.scale(2, &ek1),
        l13: g.sub(&ek1, k1),
        l21: g.scale(2, k2),
        l22: g.add(k2, &ek2),
        l31: g.sub(k3, &ek3),
    }
}

/// `phi1(u+v) + phi2(u+eps v) - phi1(u-v) - phi2(u-eps v)`.
pub fn residual(
    phi1: &GroupFunction,
    phi2: &GroupFunction,
    eps: &GroupMap,
    u: &GroupElement,
    v: &GroupElement,
) -> Rational {
    let g = &phi1.group;
    let ev = eps.apply(v);
    phi1.at(&g.add(u, v)) + phi2.at(&g.add(u, &ev)) - phi1.at(&g.sub(u, v)) - phi2.at(&g.sub(u, &ev))
}

/// The eight signed offsets `(sign, du, dv)` of the expanded cascade.
pub fn cascade_terms(
    eps: &GroupMap,
    k1: &GroupElement,
    k2: &GroupElement,
    k3: &GroupElement,
) -> Vec<(i64, GroupElement, GroupElement)> {
    let g = eps.source();
    let steps = [
        (eps.apply(k1), k1.clone()),
        (k2.clone(), k2.clone()),
        (g.neg(&eps.apply(k3)), k3.clone()),
    ];
    let mut terms = vec![(1i64, g.zero(), g.zero())];
    for (du, dv) in &steps {
        terms = terms
            .into_iter()
            .flat_map(|(s, a, b)| {
                [
                    (s, g.add(&a, du), g.add(&b, dv)),
                    (-s, a, b),
                ]
            })
            .collect();
    }
    terms
}

/// Checks `D_{l31} D_{l21} D_{l11} phi1(u+v)` against the signed sum of the
/// eight shifted residuals.
#[allow(clippy::too_many_arguments)]
pub fn cascade_identity_check(
    phi1: &GroupFunction,
    phi2: &GroupFunction,
    eps: &GroupMap,
    k1: &GroupElement,
    k2: &GroupElement,
    k3: &GroupElement,
    u: &GroupElement,
    v: &GroupElement,
) -> bool {
    let g = &phi1.group;
    let shifts = cascade_shifts(eps, k1, k2, k3);
    let lhs = phi1
        .iterated_difference(&[shifts.l11, shifts.l21, shifts.l31])
        .at(&g.add(u, v))
        .clone();
    let rhs: Rational = cascade_terms(eps, k1, k2, k3)
        .into_iter()
        .map(|(s, du, dv)| rational::int(s) * residual(phi1, phi2, eps, &g.add(u, &du), &g.add(v, &dv)))
        .sum();
    lhs == rhs
}

/// `B = (I + eps) W ∩ (I - eps) W ∩ 2W`.
pub fn cascade_subgroup(eps: &GroupMap, w: &Subgroup) -> Result<Subgroup> {
    let g = eps.source();
    let id = GroupMap::identity(g);
    let plus = id.plus(eps)?.map_subgroup(w);
    let minus = id.minus(eps)?.map_subgroup(w);
    let doubled = GroupMap::scalar(g, 2).map_subgroup(w);
    plus.intersection(&minus)?.intersection(&doubled)
}

/// A basis of all pairs `(phi1, phi2)` with `R(u, v) = 0` on `Y x Y`.
pub fn residual_kernel(eps: &GroupMap) -> Vec<(GroupFunction, GroupFunction)> {
    let g = eps.source();
    let n = g.order();
    let eps_idx = eps.index_table();
    let mut rows: Matrix = Vec::with_capacity(n * n);
    for u in 0..n {
        for v in 0..n {
            let mut row = vec![rational::zero(); 2 * n];
            row[g.add_idx(u, v)] += rational::one();
            row[n + g.add_idx(u, eps_idx[v])] += rational::one();
            row[g.sub_idx(u, v)] -= rational::one();
            row[n + g.sub_idx(u, eps_idx[v])] -= rational::one();
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    let rhs = vec![rational::zero(); rows.len()];
    let sol = linalg::solve_affine(&rows, &rhs, 2 * n).expect("homogeneous systems are consistent");
    sol.basis
        .into_iter()
        .map(|v| {
            (
                GroupFunction {
                    group: g.clone(),
                    values: v[..n].to_vec(),
                },
                GroupFunction {
                    group: g.clone(),
                    values: v[n..].to_vec(),
                },
            )
        })
        .collect()
}
