//! Finite Abelian groups `Z_{d1} x ... x Z_{dk}` in a fixed cyclic-factor
//! presentation, their characters, endomorphisms and subgroups.
//!
//! The dual of a group is identified with a group carrying the same orders
//! list; the pairing of `x` and `y` is `exp(2 pi i sum_j x_j y_j / d_j)`.
//! Elements are addressed by their position in the canonical (lexicographic)
//! enumeration, which is what most of the crate uses internally.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// Enumeration limits used by the exhaustive algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Largest group order for element scans.
    pub element_scan: usize,
    /// Largest group order for full subgroup-lattice enumeration.
    pub subgroup_lattice: usize,
    /// Largest group order for automorphism enumeration.
    pub automorphisms: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            element_scan: 10_000,
            subgroup_lattice: 256,
            automorphisms: 64,
        }
    }
}

/// Hard cap on the number of automorphisms materialized by [`automorphisms`].
pub const MAX_AUTOMORPHISMS: usize = 200_000;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    orders: Vec<u64>,
    strides: Vec<usize>,
    order: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FiniteAbelianGroup {
    /// Builds `Z_{d1} x ... x Z_{dk}` with the default element-scan bound.
    pub fn new(orders: &[i64]) -> Result<Self> {
        Self::with_bound(orders, Bounds::default().element_scan)
    }

    pub fn with_bound(orders: &[i64], bound: usize) -> Result<Self> {
        let mut checked = Vec::with_capacity(orders.len());
        let mut total: usize = 1;
        for &d in orders {
            if d < 1 {
                return Err(Error::InvalidOrder(d));
            }
            checked.push(d as u64);
            total = total.saturating_mul(d as usize);
        }
        if total > bound {
            return Err(Error::SizeLimit {
                what: "group",
                size: total,
                bound,
            });
        }
        let mut strides = vec![1usize; checked.len()];
        for i in (0..checked.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * checked[i + 1] as usize;
        }
        Ok(Self {
            orders: checked,
            strides,
            order: total,
        })
    }

    pub fn cyclic(n: i64) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Least common multiple of the cyclic orders.
    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1u64, |acc, &d| acc.lcm(&d))
    }

    pub fn same_as(&self, other: &Self) -> Result<()> {
        if self.orders == other.orders {
            Ok(())
        } else {
            Err(Error::GroupMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.rank()],
        }
    }

    /// Reduces integer coordinates into canonical form.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: coords.len(),
            });
        }
        Ok(GroupElement {
            coords: coords
                .iter()
                .zip(&self.orders)
                .map(|(&c, &d)| c.rem_euclid(d as i64) as u64)
                .collect(),
        })
    }

    /// The `i`-th generator `e_i`.
    pub fn generator(&self, i: usize) -> GroupElement {
        let mut coords = vec![0; self.rank()];
        coords[i] = 1 % self.orders[i];
        GroupElement { coords }
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.coords.len() == self.rank() && x.coords.iter().zip(&self.orders).all(|(c, d)| c < d)
    }

    pub fn index_of(&self, x: &GroupElement) -> usize {
        x.coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum()
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut coords = vec![0; self.rank()];
        for (i, &s) in self.strides.iter().enumerate() {
            coords[i] = (index / s) as u64;
            index %= s;
        }
        GroupElement { coords }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |i| self.element_at(i))
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        GroupElement {
            coords: x
                .coords
                .iter()
                .zip(&y.coords)
                .zip(&self.orders)
                .map(|((a, b), d)| (a + b) % d)
                .collect(),
        }
    }

    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        GroupElement {
            coords: x
                .coords
                .iter()
                .zip(&self.orders)
                .map(|(a, d)| (d - a) % d)
                .collect(),
        }
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, n: i64, x: &GroupElement) -> GroupElement {
        GroupElement {
            coords: x
                .coords
                .iter()
                .zip(&self.orders)
                .map(|(&a, &d)| (n.rem_euclid(d as i64) as u64 * a) % d)
                .collect(),
        }
    }

    /// Index of `x + y` computed digit-wise without allocating.
    pub fn add_idx(&self, x: usize, y: usize) -> usize {
        let mut out = 0;
        for (&s, &d) in self.strides.iter().zip(&self.orders) {
            let d = d as usize;
            let a = (x / s) % d;
            let b = (y / s) % d;
            out += ((a + b) % d) * s;
        }
        out
    }

    pub fn neg_idx(&self, x: usize) -> usize {
        let mut out = 0;
        for (&s, &d) in self.strides.iter().zip(&self.orders) {
            let d = d as usize;
            let a = (x / s) % d;
            out += ((d - a) % d) * s;
        }
        out
    }

    pub fn sub_idx(&self, x: usize, y: usize) -> usize {
        self.add_idx(x, self.neg_idx(y))
    }

    pub fn element_order(&self, x: &GroupElement) -> u64 {
        x.coords
            .iter()
            .zip(&self.orders)
            .map(|(&a, &d)| d / a.gcd(&d))
            .fold(1, |acc, o| acc.lcm(&o))
    }

    /// The character value `(x, y)` as an exact fraction of a full turn.
    pub fn pairing(&self, x: &GroupElement, y: &GroupElement) -> Turn {
        let l = self.exponent();
        let num = x
            .coords
            .iter()
            .zip(&y.coords)
            .zip(&self.orders)
            .fold(0u64, |acc, ((&a, &b), &d)| {
                (acc + (a * b % d) * (l / d)) % l
            });
        Turn::new(num, l)
    }
}

/// Checked pairing of `x` in `x_group` with `y` in `y_group`.
pub fn pairing(
    x_group: &FiniteAbelianGroup,
    x: &GroupElement,
    y_group: &FiniteAbelianGroup,
    y: &GroupElement,
) -> Result<Turn> {
    x_group.same_as(y_group)?;
    if !x_group.contains(x) || !y_group.contains(y) {
        return Err(Error::DimensionMismatch {
            expected: x_group.rank(),
            found: if x_group.contains(x) {
                y.coords.len()
            } else {
                x.coords.len()
            },
        });
    }
    Ok(x_group.pairing(x, y))
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orders.is_empty() {
            return write!(f, "Z1");
        }
        for (i, d) in self.orders.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "Z{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteAbelianGroup({self})")
    }
}

/// A root of unity `exp(2 pi i num/den)` stored as a reduced fraction of a turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Turn {
    num: u64,
    den: u64,
}

impl Turn {
    pub fn new(num: u64, den: u64) -> Self {
        let num = num % den;
        let g = num.gcd(&den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    /// True when the character value is exactly 1.
    pub fn is_identity(&self) -> bool {
        self.num == 0
    }

    pub fn add(self, other: Self) -> Self {
        let den = self.den.lcm(&other.den);
        Self::new(
            self.num * (den / self.den) + other.num * (den / other.den),
            den,
        )
    }

    pub fn to_complex(self) -> Complex64 {
        let angle = std::f64::consts::TAU * self.num as f64 / self.den as f64;
        Complex64::new(angle.cos(), angle.sin())
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A homomorphism `x -> Mx` between presented groups. Row `r` of the matrix
/// is reduced modulo the `r`-th order of the target.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupMap {
    source: FiniteAbelianGroup,
    target: FiniteAbelianGroup,
    matrix: Vec<Vec<u64>>,
}

impl GroupMap {
    /// Validates the order condition `d_i * M e_i = 0` for every source generator.
    pub fn new(
        matrix: &[Vec<i64>],
        source: &FiniteAbelianGroup,
        target: &FiniteAbelianGroup,
    ) -> Result<Self> {
        if matrix.len() != target.rank() {
            return Err(Error::DimensionMismatch {
                expected: target.rank(),
                found: matrix.len(),
            });
        }
        for row in matrix {
            if row.len() != source.rank() {
                return Err(Error::DimensionMismatch {
                    expected: source.rank(),
                    found: row.len(),
                });
            }
        }
        let reduced: Vec<Vec<u64>> = matrix
            .iter()
            .zip(target.orders())
            .map(|(row, &t)| row.iter().map(|&m| m.rem_euclid(t as i64) as u64).collect())
            .collect();
        for (i, &d) in source.orders().iter().enumerate() {
            let bad = reduced
                .iter()
                .zip(target.orders())
                .any(|(row, &t)| (d % t) * row[i] % t != 0);
            if bad {
                let image = GroupElement {
                    coords: reduced.iter().map(|row| row[i]).collect(),
                };
                return Err(Error::NotAHomomorphism {
                    generator: i,
                    order: d,
                    image: image.to_string(),
                });
            }
        }
        Ok(Self {
            source: source.clone(),
            target: target.clone(),
            matrix: reduced,
        })
    }

    pub fn endomorphism(matrix: &[Vec<i64>], group: &FiniteAbelianGroup) -> Result<Self> {
        Self::new(matrix, group, group)
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        Self::scalar(group, 1)
    }

    /// Multiplication by `n`, the map `f_n`.
    pub fn scalar(group: &FiniteAbelianGroup, n: i64) -> Self {
        let k = group.rank();
        let matrix = (0..k)
            .map(|r| {
                (0..k)
                    .map(|c| {
                        if r == c {
                            n.rem_euclid(group.orders()[r] as i64) as u64
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            source: group.clone(),
            target: group.clone(),
            matrix,
        }
    }

    pub fn source(&self) -> &FiniteAbelianGroup {
        &self.source
    }

    pub fn target(&self) -> &FiniteAbelianGroup {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.matrix
    }

    pub fn matrix_i64(&self) -> Vec<Vec<i64>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|&m| m as i64).collect())
            .collect()
    }

    pub fn is_endomorphism(&self) -> bool {
        self.source == self.target
    }

    pub fn apply(&self, x: &GroupElement) -> GroupElement {
        GroupElement {
            coords: self
                .matrix
                .iter()
                .zip(self.target.orders())
                .map(|(row, &t)| {
                    row.iter()
                        .zip(&x.coords)
                        .fold(0u64, |acc, (&m, &c)| (acc + m * c % t) % t)
                })
                .collect(),
        }
    }

    /// Images of every source element, by canonical index.
    pub fn index_table(&self) -> Vec<usize> {
        self.source
            .elements()
            .map(|x| self.target.index_of(&self.apply(&x)))
            .collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GroupMap) -> Result<GroupMap> {
        other.target.same_as(&self.source)?;
        let rows = self.target.rank();
        let cols = other.source.rank();
        let inner = self.source.rank();
        let mut matrix = vec![vec![0i64; cols]; rows];
        for (r, out_row) in matrix.iter_mut().enumerate() {
            let t = self.target.orders()[r] as i128;
            for (c, out) in out_row.iter_mut().enumerate() {
                let mut acc: i128 = 0;
                for m in 0..inner {
                    acc += self.matrix[r][m] as i128 * other.matrix[m][c] as i128;
                }
                *out = acc.rem_euclid(t) as i64;
            }
        }
        GroupMap::new(&matrix, &other.source, &self.target)
    }

    fn combine(&self, other: &GroupMap, sign: i64) -> Result<GroupMap> {
        self.source.same_as(&other.source)?;
        self.target.same_as(&other.target)?;
        let matrix: Vec<Vec<i64>> = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(&x, &y)| x as i64 + sign * y as i64)
                    .collect()
            })
            .collect();
        GroupMap::new(&matrix, &self.source, &self.target)
    }

    pub fn plus(&self, other: &GroupMap) -> Result<GroupMap> {
        self.combine(other, 1)
    }

    pub fn minus(&self, other: &GroupMap) -> Result<GroupMap> {
        self.combine(other, -1)
    }

    pub fn kernel(&self) -> Subgroup {
        let zero = self.target.zero();
        let elements = self
            .source
            .elements()
            .enumerate()
            .filter(|(_, x)| self.apply(x) == zero)
            .map(|(i, _)| i)
            .collect();
        Subgroup::from_sorted_unchecked(&self.source, elements)
    }

    pub fn image(&self) -> Subgroup {
        let mut hit = vec![false; self.target.order()];
        for i in self.index_table() {
            hit[i] = true;
        }
        let elements = (0..hit.len()).filter(|&i| hit[i]).collect();
        Subgroup::from_sorted_unchecked(&self.target, elements)
    }

    /// Bijective endomorphism test.
    pub fn is_automorphism(&self) -> bool {
        if !self.is_endomorphism() {
            return false;
        }
        let mut hit = vec![false; self.target.order()];
        for i in self.index_table() {
            if hit[i] {
                return false;
            }
            hit[i] = true;
        }
        true
    }

    /// The adjoint endomorphism `f~` with `(f x, y) = (x, f~ y)`.
    ///
    /// With `x -> Mx` and the pairing `sum x_j y_j / d_j`, the adjoint has
    /// entries `d_i M[r][i] / d_r`, integral by the order condition.
    pub fn adjoint(&self) -> GroupMap {
        let src = self.source.orders();
        let tgt = self.target.orders();
        let matrix: Vec<Vec<i64>> = (0..src.len())
            .map(|i| {
                (0..tgt.len())
                    .map(|r| (src[i] * self.matrix[r][i] / tgt[r]) as i64)
                    .collect()
            })
            .collect();
        GroupMap::new(&matrix, &self.target, &self.source)
            .expect("adjoint of a well-defined map is well-defined")
    }

    /// `F -> f(F)` for a subgroup of the source.
    pub fn map_subgroup(&self, sub: &Subgroup) -> Subgroup {
        let mut elements: Vec<usize> = sub
            .iter()
            .map(|x| self.target.index_of(&self.apply(&x)))
            .collect();
        elements.sort_unstable();
        elements.dedup();
        Subgroup::from_sorted_unchecked(&self.target, elements)
    }
}

impl fmt::Display for GroupMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (r, row) in self.matrix.iter().enumerate() {
            if r > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (c, m) in row.iter().enumerate() {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{m}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for GroupMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupMap({} -> {}, {self})", self.source, self.target)
    }
}

/// Outcome of the `Ker(I + delta) = {0}` test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeydeCondition {
    Holds,
    Fails { witness: GroupElement },
}

impl HeydeCondition {
    pub fn holds(&self) -> bool {
        matches!(self, HeydeCondition::Holds)
    }
}

/// Checks `Ker(I + delta) = {0}` for an automorphism `delta`.
pub fn check_heyde_condition(delta: &GroupMap) -> Result<HeydeCondition> {
    if !delta.is_automorphism() {
        let witness = delta
            .kernel()
            .iter()
            .find(|x| *x != delta.source.zero())
            .map(|x| x.to_string())
            .unwrap_or_else(|| "non-injective".to_string());
        return Err(Error::NotAnAutomorphism(witness));
    }
    let sum = GroupMap::identity(&delta.source).plus(delta)?;
    let zero = delta.source.zero();
    Ok(match sum.kernel().iter().find(|x| *x != zero) {
        Some(witness) => HeydeCondition::Fails { witness },
        None => HeydeCondition::Holds,
    })
}

/// A subgroup stored canonically as the sorted list of member indices.
#[derive(Clone)]
pub struct Subgroup {
    parent: FiniteAbelianGroup,
    elements: Vec<usize>,
    generators: Vec<GroupElement>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent && self.elements == other.elements
    }
}

impl Eq for Subgroup {}

impl std::hash::Hash for Subgroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.parent.hash(state);
        self.elements.hash(state);
    }
}

impl PartialOrd for Subgroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subgroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.parent
            .orders
            .cmp(&other.parent.orders)
            .then_with(|| self.elements.cmp(&other.elements))
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter().map(|x| x.to_string())).finish()
    }
}

impl Subgroup {
    fn from_sorted_unchecked(parent: &FiniteAbelianGroup, elements: Vec<usize>) -> Self {
        let mut sub = Self {
            parent: parent.clone(),
            elements,
            generators: Vec::new(),
        };
        sub.generators = sub.minimal_generators();
        sub
    }

    pub fn trivial(parent: &FiniteAbelianGroup) -> Self {
        Self {
            parent: parent.clone(),
            elements: vec![0],
            generators: Vec::new(),
        }
    }

    pub fn whole(parent: &FiniteAbelianGroup) -> Self {
        Self {
            parent: parent.clone(),
            elements: (0..parent.order()).collect(),
            generators: (0..parent.rank()).map(|i| parent.generator(i)).collect(),
        }
    }

    /// The subgroup generated by `generators`.
    pub fn generated(parent: &FiniteAbelianGroup, generators: &[GroupElement]) -> Result<Self> {
        for g in generators {
            if !parent.contains(g) {
                return Err(Error::NotASubgroup(format!("{g} is not an element of {parent}")));
            }
        }
        let mut member = vec![false; parent.order()];
        member[0] = true;
        let mut current = vec![0usize];
        for g in generators {
            let gi = parent.index_of(g);
            current = join_cyclic(parent, &mut member, &current, gi);
        }
        current.sort_unstable();
        Ok(Self {
            parent: parent.clone(),
            elements: current,
            generators: generators.to_vec(),
        })
    }

    /// Validates closure of an explicit element list.
    pub fn from_elements(parent: &FiniteAbelianGroup, elements: &[GroupElement]) -> Result<Self> {
        let mut idx: Vec<usize> = Vec::with_capacity(elements.len());
        for x in elements {
            if !parent.contains(x) {
                return Err(Error::NotASubgroup(format!("{x} is not an element of {parent}")));
            }
            idx.push(parent.index_of(x));
        }
        idx.sort_unstable();
        idx.dedup();
        if idx.first() != Some(&0) {
            return Err(Error::NotASubgroup("missing identity".into()));
        }
        let mut member = vec![false; parent.order()];
        for &i in &idx {
            member[i] = true;
        }
        for &a in &idx {
            if !member[parent.neg_idx(a)] {
                return Err(Error::NotASubgroup(format!(
                    "not closed under negation at {}",
                    parent.element_at(a)
                )));
            }
            for &b in &idx {
                if !member[parent.add_idx(a, b)] {
                    return Err(Error::NotASubgroup(format!(
                        "not closed under addition at {} + {}",
                        parent.element_at(a),
                        parent.element_at(b)
                    )));
                }
            }
        }
        Ok(Self::from_sorted_unchecked(parent, idx))
    }

    pub fn parent(&self) -> &FiniteAbelianGroup {
        &self.parent
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.elements
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn iter(&self) -> impl Iterator<Item = GroupElement> + '_ {
        self.elements.iter().map(move |&i| self.parent.element_at(i))
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.parent.contains(x) && self.contains_idx(self.parent.index_of(x))
    }

    pub fn contains_idx(&self, i: usize) -> bool {
        self.elements.binary_search(&i).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn is_whole(&self) -> bool {
        self.elements.len() == self.parent.order()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.parent == other.parent && self.elements.iter().all(|&i| other.contains_idx(i))
    }

    pub fn intersection(&self, other: &Subgroup) -> Result<Subgroup> {
        self.parent.same_as(&other.parent)?;
        let elements = self
            .elements
            .iter()
            .copied()
            .filter(|&i| other.contains_idx(i))
            .collect();
        Ok(Subgroup::from_sorted_unchecked(&self.parent, elements))
    }

    /// The subgroup `self + other`.
    pub fn join(&self, other: &Subgroup) -> Result<Subgroup> {
        self.parent.same_as(&other.parent)?;
        let mut member = vec![false; self.parent.order()];
        let mut out = Vec::new();
        for &a in &self.elements {
            for &b in &other.elements {
                let s = self.parent.add_idx(a, b);
                if !member[s] {
                    member[s] = true;
                    out.push(s);
                }
            }
        }
        out.sort_unstable();
        Ok(Subgroup::from_sorted_unchecked(&self.parent, out))
    }

    /// `delta(F) = F`.
    pub fn is_invariant_under(&self, map: &GroupMap) -> bool {
        map.source() == &self.parent
            && map.target() == &self.parent
            && map.map_subgroup(self) == *self
    }

    pub fn has_element_of_order_two(&self) -> bool {
        self.iter().any(|x| self.parent.element_order(&x) == 2)
    }

    /// A small generating set found greedily in canonical order.
    fn minimal_generators(&self) -> Vec<GroupElement> {
        let mut member = vec![false; self.parent.order()];
        member[0] = true;
        let mut current = vec![0usize];
        let mut gens = Vec::new();
        for &i in &self.elements {
            if current.len() == self.elements.len() {
                break;
            }
            if !member[i] {
                current = join_cyclic(&self.parent, &mut member, &current, i);
                gens.push(self.parent.element_at(i));
            }
        }
        gens
    }
}

/// Extends the member set `current` by the cyclic group of `g`.
fn join_cyclic(
    parent: &FiniteAbelianGroup,
    member: &mut [bool],
    current: &[usize],
    g: usize,
) -> Vec<usize> {
    let mut out = current.to_vec();
    let mut shift = g;
    while !member[shift] {
        let coset: Vec<usize> = current.iter().map(|&s| parent.add_idx(s, shift)).collect();
        for &c in &coset {
            member[c] = true;
        }
        out.extend(coset);
        shift = parent.add_idx(shift, g);
    }
    out
}

/// `A(X, K) = { x : (x, y) = 1 for all y in K }`, for `K` a subgroup of the dual.
pub fn annihilator(x_group: &FiniteAbelianGroup, k: &Subgroup) -> Result<Subgroup> {
    x_group.same_as(&k.parent)?;
    let gens: Vec<GroupElement> = if k.generators.is_empty() && !k.is_trivial() {
        k.iter().collect()
    } else {
        k.generators.clone()
    };
    let elements = x_group
        .elements()
        .enumerate()
        .filter(|(_, x)| gens.iter().all(|y| x_group.pairing(x, y).is_identity()))
        .map(|(i, _)| i)
        .collect();
    Ok(Subgroup::from_sorted_unchecked(x_group, elements))
}

fn is_power_of(mut n: u64, p: u64) -> bool {
    while n % p == 0 {
        n /= p;
    }
    n == 1
}

/// Elements whose order is a power of the prime `p`.
pub fn p_component(group: &FiniteAbelianGroup, p: u64) -> Subgroup {
    let elements = group
        .elements()
        .enumerate()
        .filter(|(_, x)| is_power_of(group.element_order(x), p))
        .map(|(i, _)| i)
        .collect();
    Subgroup::from_sorted_unchecked(group, elements)
}

/// The subgroup generated by all elements of odd order.
pub fn odd_part(group: &FiniteAbelianGroup) -> Subgroup {
    let elements = group
        .elements()
        .enumerate()
        .filter(|(_, x)| group.element_order(x) % 2 == 1)
        .map(|(i, _)| i)
        .collect();
    Subgroup::from_sorted_unchecked(group, elements)
}

/// `D = D_2 + L` with `D_2` the 2-component and `L` the odd part.
pub fn split_2_odd(group: &FiniteAbelianGroup) -> (Subgroup, Subgroup) {
    (p_component(group, 2), odd_part(group))
}

/// The complete subgroup lattice, sorted canonically (by size, then elements).
pub fn subgroups(group: &FiniteAbelianGroup, bounds: &Bounds) -> Result<Vec<Subgroup>> {
    if group.order() > bounds.subgroup_lattice {
        return Err(Error::SizeLimit {
            what: "subgroup lattice",
            size: group.order(),
            bound: bounds.subgroup_lattice,
        });
    }
    let mut cyclic: Vec<Subgroup> = Vec::new();
    let mut seen_cyclic = HashSet::new();
    for x in group.elements() {
        let c = Subgroup::generated(group, std::slice::from_ref(&x))?;
        if seen_cyclic.insert(c.elements.clone()) {
            cyclic.push(c);
        }
    }
    let trivial = Subgroup::trivial(group);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(trivial.elements.clone());
    let mut all = vec![trivial.clone()];
    let mut queue = VecDeque::from([trivial]);
    while let Some(s) = queue.pop_front() {
        for c in &cyclic {
            if c.is_subset_of(&s) {
                continue;
            }
            let j = s.join(c)?;
            if seen.insert(j.elements.clone()) {
                all.push(j.clone());
                queue.push_back(j);
            }
        }
    }
    all.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.cmp(b)));
    Ok(all)
}

/// Subgroups `F` with `delta(F) = F`.
pub fn invariant_subgroups(
    group: &FiniteAbelianGroup,
    delta: &GroupMap,
    bounds: &Bounds,
) -> Result<Vec<Subgroup>> {
    delta.source().same_as(group)?;
    delta.target().same_as(group)?;
    Ok(subgroups(group, bounds)?
        .into_iter()
        .filter(|s| s.is_invariant_under(delta))
        .collect())
}

/// Every automorphism of `group`, found by choosing generator images that
/// stay independent.
pub fn automorphisms(group: &FiniteAbelianGroup, bounds: &Bounds) -> Result<Vec<GroupMap>> {
    if group.order() > bounds.automorphisms {
        return Err(Error::SizeLimit {
            what: "automorphism enumeration",
            size: group.order(),
            bound: bounds.automorphisms,
        });
    }
    let k = group.rank();
    let candidates: Vec<Vec<usize>> = group
        .orders()
        .iter()
        .map(|&d| {
            group
                .elements()
                .enumerate()
                .filter(|(_, x)| d % group.element_order(x) == 0)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut found = Vec::new();
    let mut images = Vec::with_capacity(k);
    let mut member = vec![false; group.order()];
    member[0] = true;
    search_automorphisms(group, &candidates, &mut images, &mut member, &[0], &mut found)?;
    Ok(found)
}

fn search_automorphisms(
    group: &FiniteAbelianGroup,
    candidates: &[Vec<usize>],
    images: &mut Vec<usize>,
    member: &mut Vec<bool>,
    span: &[usize],
    found: &mut Vec<GroupMap>,
) -> Result<()> {
    let depth = images.len();
    if depth == group.rank() {
        let cols: Vec<GroupElement> = images.iter().map(|&i| group.element_at(i)).collect();
        let matrix: Vec<Vec<i64>> = (0..group.rank())
            .map(|r| cols.iter().map(|c| c.coords[r] as i64).collect())
            .collect();
        found.push(GroupMap::endomorphism(&matrix, group)?);
        if found.len() > MAX_AUTOMORPHISMS {
            return Err(Error::SizeLimit {
                what: "automorphism count",
                size: found.len(),
                bound: MAX_AUTOMORPHISMS,
            });
        }
        return Ok(());
    }
    let d = group.orders()[depth] as usize;
    for &g in &candidates[depth] {
        // smallest m > 0 with m g in span must be exactly d
        let mut m = 1;
        let mut shift = g;
        while !member[shift] {
            m += 1;
            shift = group.add_idx(shift, g);
        }
        if m != d {
            continue;
        }
        let mut next = member.clone();
        let extended = join_cyclic(group, &mut next, span, g);
        images.push(g);
        search_automorphisms(group, candidates, images, &mut next, &extended, found)?;
        images.pop();
    }
    Ok(())
}
