//! Exact probability distributions on a finite Abelian group and their
//! characteristic functions.
//!
//! Masses are dense `BigRational` vectors over the canonical element order.
//! Characteristic function values are `Complex64`; values known exactly to be
//! 0 or 1 carry an [`ExactChar`] tag computed from the masses alone.

use std::fmt;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::group::{annihilator, FiniteAbelianGroup, GroupElement, GroupMap, Subgroup};
use crate::rational::{self, Rational};

#[derive(Clone, PartialEq, Eq)]
pub struct RationalDistribution {
    group: FiniteAbelianGroup,
    masses: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactChar {
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicValue {
    pub value: Complex64,
    pub exact: Option<ExactChar>,
}

impl RationalDistribution {
    pub fn new(group: &FiniteAbelianGroup, masses: Vec<Rational>) -> Result<Self> {
        if masses.len() != group.order() {
            return Err(Error::DimensionMismatch {
                expected: group.order(),
                found: masses.len(),
            });
        }
        if let Some(pos) = masses.iter().position(|m| !rational::is_nonnegative(m)) {
            return Err(Error::InvalidDistribution(format!(
                "negative mass {} at {}",
                masses[pos],
                group.element_at(pos)
            )));
        }
        let total: Rational = masses.iter().sum();
        if total != rational::one() {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, not 1"
            )));
        }
        Ok(Self {
            group: group.clone(),
            masses,
        })
    }

    /// The degenerate distribution `E_x`.
    pub fn point_mass(group: &FiniteAbelianGroup, x: &GroupElement) -> Result<Self> {
        if !group.contains(x) {
            return Err(Error::DimensionMismatch {
                expected: group.rank(),
                found: x.coords().len(),
            });
        }
        let mut masses = vec![rational::zero(); group.order()];
        masses[group.index_of(x)] = rational::one();
        Ok(Self {
            group: group.clone(),
            masses,
        })
    }

    /// The Haar distribution `m_K` of a subgroup.
    pub fn haar(k: &Subgroup) -> Self {
        let group = k.parent().clone();
        let weight = rational::ratio(1, k.order() as i64);
        let mut masses = vec![rational::zero(); group.order()];
        for &i in k.indices() {
            masses[i] = weight.clone();
        }
        Self { group, masses }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn mass(&self, x: &GroupElement) -> &Rational {
        &self.masses[self.group.index_of(x)]
    }

    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.masses.len())
            .filter(|&i| !self.masses[i].is_zero())
            .collect()
    }

    /// `sigma(mu)`: elements of strictly positive mass.
    pub fn support(&self) -> Vec<GroupElement> {
        self.support_indices()
            .into_iter()
            .map(|i| self.group.element_at(i))
            .collect()
    }

    pub fn is_supported_on(&self, sub: &Subgroup) -> bool {
        self.support_indices().iter().all(|&i| sub.contains_idx(i))
    }

    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.group.same_as(&other.group)?;
        let mut masses = vec![rational::zero(); self.group.order()];
        let right = other.support_indices();
        for a in self.support_indices() {
            for &b in &right {
                masses[self.group.add_idx(a, b)] += &self.masses[a] * &other.masses[b];
            }
        }
        Ok(Self {
            group: self.group.clone(),
            masses,
        })
    }

    /// `mu * E_x`.
    pub fn shift(&self, x: &GroupElement) -> Self {
        let xi = self.group.index_of(x);
        let mut masses = vec![rational::zero(); self.group.order()];
        for i in self.support_indices() {
            masses[self.group.add_idx(i, xi)] = self.masses[i].clone();
        }
        Self {
            group: self.group.clone(),
            masses,
        }
    }

    /// `mu_bar(B) = mu(-B)`.
    pub fn reflect(&self) -> Self {
        let masses = (0..self.masses.len())
            .map(|i| self.masses[self.group.neg_idx(i)].clone())
            .collect();
        Self {
            group: self.group.clone(),
            masses,
        }
    }

    /// `nu = mu * mu_bar`.
    pub fn symmetrize(&self) -> Self {
        self.convolve(&self.reflect())
            .expect("a distribution and its reflection share a group")
    }

    /// Image distribution under a homomorphism.
    pub fn pushforward(&self, f: &GroupMap) -> Result<Self> {
        f.source().same_as(&self.group)?;
        let table = f.index_table();
        let mut masses = vec![rational::zero(); f.target().order()];
        for i in self.support_indices() {
            masses[table[i]] += &self.masses[i];
        }
        Ok(Self {
            group: f.target().clone(),
            masses,
        })
    }

    /// Translations `z` with `mu(x + z) = mu(x)` for every `x`.
    pub fn period_subgroup(&self) -> Subgroup {
        let g = &self.group;
        let periods: Vec<GroupElement> = (0..g.order())
            .filter(|&z| (0..g.order()).all(|x| self.masses[g.add_idx(x, z)] == self.masses[x]))
            .map(|z| g.element_at(z))
            .collect();
        Subgroup::from_elements(g, &periods).expect("periods of a function form a subgroup")
    }

    /// `mu^(y) = sum_x mu(x) (x, y)`, with the exactness tag.
    ///
    /// The value is exactly 1 when every support point pairs trivially with
    /// `y`, and exactly 0 when `mu` is invariant under some `z` with
    /// `(z, y) != 1`.
    pub fn char_fn(&self, y: &GroupElement) -> Result<CharacteristicValue> {
        if !self.group.contains(y) {
            return Err(Error::DimensionMismatch {
                expected: self.group.rank(),
                found: y.coords().len(),
            });
        }
        let support = self.support_indices();
        let mut value = Complex64::zero();
        let mut all_trivial = true;
        for &i in &support {
            let turn = self.group.pairing(&self.group.element_at(i), y);
            all_trivial &= turn.is_identity();
            value += turn.to_complex() * rational::to_f64(&self.masses[i]);
        }
        let exact = if all_trivial {
            Some(ExactChar::One)
        } else if self
            .period_subgroup()
            .iter()
            .any(|z| !self.group.pairing(&z, y).is_identity())
        {
            Some(ExactChar::Zero)
        } else {
            None
        };
        Ok(CharacteristicValue { value, exact })
    }

    /// Floating characteristic function over every dual element, by index.
    pub fn char_table(&self) -> Vec<Complex64> {
        let g = &self.group;
        let support: Vec<(GroupElement, f64)> = self
            .support_indices()
            .into_iter()
            .map(|i| (g.element_at(i), rational::to_f64(&self.masses[i])))
            .collect();
        g.elements()
            .map(|y| {
                support
                    .iter()
                    .map(|(x, m)| g.pairing(x, &y).to_complex() * *m)
                    .sum()
            })
            .collect()
    }

    /// `E = { y : mu^(y) = 1 }`, computed from the support.
    pub fn unit_set(&self) -> Subgroup {
        let support = Subgroup::generated(&self.group, &self.support())
            .expect("support points belong to the group");
        annihilator(&self.group, &support).expect("dual shares the orders list")
    }
}

impl fmt::Display for RationalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, m) in self.masses.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", rational::render(m))?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for RationalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalDistribution({} on {})", self, self.group)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn z(orders: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(orders).unwrap()
    }

    fn dist(g: &FiniteAbelianGroup, masses: &[(i64, i64)]) -> RationalDistribution {
        RationalDistribution::new(g, masses.iter().map(|&(n, d)| ratio(n, d)).collect()).unwrap()
    }

    #[test]
    fn rejects_invalid_masses() {
        let g = z(&[2]);
        assert!(RationalDistribution::new(&g, vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(RationalDistribution::new(&g, vec![ratio(3, 2), ratio(-1, 2)]).is_err());
        assert!(RationalDistribution::new(&g, vec![ratio(1, 1)]).is_err());
    }

    #[test]
    fn point_mass_examples() {
        let z5 = z(&[5]);
        let e0 = RationalDistribution::point_mass(&z5, &z5.zero()).unwrap();
        assert_eq!(e0, dist(&z5, &[(1, 1), (0, 1), (0, 1), (0, 1), (0, 1)]));
        let z3 = z(&[3]);
        let e2 = RationalDistribution::point_mass(&z3, &z3.element(&[2]).unwrap()).unwrap();
        assert_eq!(e2, dist(&z3, &[(0, 1), (0, 1), (1, 1)]));
        let z4 = z(&[4]);
        let e1 = RationalDistribution::point_mass(&z4, &z4.element(&[1]).unwrap()).unwrap();
        let e3 = RationalDistribution::point_mass(&z4, &z4.element(&[3]).unwrap()).unwrap();
        assert_eq!(
            e1.convolve(&e3).unwrap(),
            RationalDistribution::point_mass(&z4, &z4.zero()).unwrap()
        );
    }

    #[test]
    fn haar_examples() {
        let z6 = z(&[6]);
        let k = Subgroup::generated(&z6, &[z6.element(&[3]).unwrap()]).unwrap();
        let m = RationalDistribution::haar(&k);
        assert_eq!(m, dist(&z6, &[(1, 2), (0, 1), (0, 1), (1, 2), (0, 1), (0, 1)]));
        assert_eq!(m.convolve(&m).unwrap(), m);
        assert_eq!(
            RationalDistribution::haar(&Subgroup::trivial(&z6)),
            RationalDistribution::point_mass(&z6, &z6.zero()).unwrap()
        );
        let z5 = z(&[5]);
        assert_eq!(RationalDistribution::haar(&Subgroup::whole(&z5)).masses()[3], ratio(1, 5));
    }

    #[test]
    fn convolution_example() {
        let z4 = z(&[4]);
        let a = dist(&z4, &[(1, 2), (1, 2), (0, 1), (0, 1)]);
        let b = dist(&z4, &[(1, 2), (0, 1), (1, 2), (0, 1)]);
        assert_eq!(a.convolve(&b).unwrap(), dist(&z4, &[(1, 4); 4]));
        let e0 = RationalDistribution::point_mass(&z4, &z4.zero()).unwrap();
        assert_eq!(a.convolve(&e0).unwrap(), a);
        let z5 = z(&[5]);
        assert!(a.convolve(&RationalDistribution::haar(&Subgroup::whole(&z5))).is_err());
    }

    #[test]
    fn reflect_and_symmetrize() {
        let z5 = z(&[5]);
        let e1 = RationalDistribution::point_mass(&z5, &z5.element(&[1]).unwrap()).unwrap();
        let e4 = RationalDistribution::point_mass(&z5, &z5.element(&[4]).unwrap()).unwrap();
        assert_eq!(e1.reflect(), e4);
        assert_eq!(
            e1.symmetrize(),
            RationalDistribution::point_mass(&z5, &z5.zero()).unwrap()
        );
        let z3 = z(&[3]);
        let mu = dist(&z3, &[(1, 2), (1, 2), (0, 1)]);
        assert_eq!(mu.symmetrize(), dist(&z3, &[(1, 2), (1, 4), (1, 4)]));
        for (a, b) in mu.char_table().iter().zip(mu.reflect().char_table()) {
            assert!((a.conj() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pushforward_examples() {
        let z5 = z(&[5]);
        let uniform = RationalDistribution::haar(&Subgroup::whole(&z5));
        let two = GroupMap::scalar(&z5, 2);
        assert_eq!(uniform.pushforward(&two).unwrap(), uniform);
        let x = z5.element(&[3]).unwrap();
        let ex = RationalDistribution::point_mass(&z5, &x).unwrap();
        assert_eq!(
            ex.pushforward(&two).unwrap(),
            RationalDistribution::point_mass(&z5, &two.apply(&x)).unwrap()
        );
        assert_eq!(ex.pushforward(&GroupMap::identity(&z5)).unwrap(), ex);
    }

    #[test]
    fn char_fn_examples() {
        let z6 = z(&[6]);
        let k = Subgroup::generated(&z6, &[z6.element(&[3]).unwrap()]).unwrap();
        let m = RationalDistribution::haar(&k);
        for y in z6.elements() {
            let v = m.char_fn(&y).unwrap();
            if y.coords()[0] % 2 == 0 {
                assert_eq!(v.exact, Some(ExactChar::One));
                assert!((v.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            } else {
                assert_eq!(v.exact, Some(ExactChar::Zero));
                assert!(v.value.norm() < 1e-12);
            }
        }
        let z5 = z(&[5]);
        let e1 = RationalDistribution::point_mass(&z5, &z5.element(&[1]).unwrap()).unwrap();
        let v = e1.char_fn(&z5.element(&[2]).unwrap()).unwrap();
        let angle = std::f64::consts::TAU * 2.0 / 5.0;
        assert!((v.value - Complex64::new(angle.cos(), angle.sin())).norm() < 1e-12);
        assert_eq!(v.exact, None);
        assert_eq!(e1.char_fn(&z5.zero()).unwrap().exact, Some(ExactChar::One));
    }

    #[test]
    fn unit_set_examples() {
        let z6 = z(&[6]);
        let e0 = RationalDistribution::point_mass(&z6, &z6.zero()).unwrap();
        assert!(e0.unit_set().is_whole());
        let k = Subgroup::generated(&z6, &[z6.element(&[2]).unwrap()]).unwrap();
        let m = RationalDistribution::haar(&k);
        assert_eq!(m.unit_set(), annihilator(&z6, &k).unwrap());
        let z5 = z(&[5]);
        assert!(RationalDistribution::haar(&Subgroup::whole(&z5)).unit_set().is_trivial());
    }

    #[test]
    fn support_examples() {
        let z6 = z(&[6]);
        let x = z6.element(&[4]).unwrap();
        assert_eq!(RationalDistribution::point_mass(&z6, &x).unwrap().support(), vec![x]);
        let k = Subgroup::generated(&z6, &[z6.element(&[2]).unwrap()]).unwrap();
        let m = RationalDistribution::haar(&k);
        assert_eq!(m.support(), k.iter().collect::<Vec<_>>());
        let e = m.unit_set();
        let a = annihilator(&z6, &e).unwrap();
        assert!(m.is_supported_on(&a));
    }
}
