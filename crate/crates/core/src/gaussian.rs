//! The `R^n` factor, handled through Gaussian parameters.
//!
//! A Gaussian law `gamma` on `R^n` is kept as its characteristic function
//! `exp(-<A s, s> + i <t, s>)` with rational `A` (symmetric, positive
//! semidefinite) and `t`. Convolution adds parameters. Product laws on
//! `R^n x D` are `gamma * rho * E_g` with `rho` an exact law on `D`.
//!
//! Substituting the Gaussian form into the characteristic-function equation
//! on `R^n` and comparing the parts odd in `v` gives
//! `<(A1 + A2 eps) u, v> = 0` and `<t1 + eps^T t2, v> = 0` for all `u, v`;
//! with `A1`, `A2` symmetric this is `A1 + eps^T A2 = 0`, `t1 + eps^T t2 = 0`.

use std::fmt;

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::Rng;

use crate::distribution::RationalDistribution;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupMap};
use crate::heyde::{verify_decomposition, Decomposition, DecompositionDefect};
use crate::linalg::{self, Matrix};
use crate::rational::{self, Rational};
use crate::sampling;

/// Largest dimension accepted by the exact principal-minor test.
pub const MAX_DIM: usize = 4;

/// Sampled dual coordinates have numerators in `[-8, 8]` and denominators in
/// `[1, 8]`, and each `(u, v)` pair is then scaled by `2^-k`, `0 <= k <= 8`.
/// Small scales keep the Gaussian factor near 1 so that a broken equation shows.
pub const SAMPLE_MAX_NUM: i64 = 8;
pub const SAMPLE_MAX_DEN: i64 = 8;
pub const SAMPLE_MAX_HALVINGS: u32 = 8;

fn sample_pair<R: Rng>(rng: &mut R, n: usize) -> (Vec<Rational>, Vec<Rational>) {
    let scale = rational::ratio(1, 1 << rng.gen_range(0..=SAMPLE_MAX_HALVINGS));
    let draw = |rng: &mut R| -> Vec<Rational> {
        sampling::rational_vector(rng, n, SAMPLE_MAX_NUM, SAMPLE_MAX_DEN)
            .into_iter()
            .map(|x| x * &scale)
            .collect()
    };
    let u = draw(rng);
    let v = draw(rng);
    (u, v)
}

#[derive(Clone, PartialEq, Eq)]
pub struct GaussianParams {
    a: Matrix,
    t: Vec<Rational>,
}

pub fn transpose(m: &Matrix) -> Matrix {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|c| (0..rows).map(|r| m[r][c].clone()).collect())
        .collect()
}

pub fn mat_vec(m: &Matrix, v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let bt = transpose(b);
    a.iter()
        .map(|row| {
            bt.iter()
                .map(|col| row.iter().zip(col).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: &[Rational], b: &[Rational], sign: i64) -> Vec<Rational> {
    let s = rational::int(sign);
    a.iter().zip(b).map(|(x, y)| x + &s * y).collect()
}

fn check_square(m: &Matrix, n: usize) -> Result<()> {
    if m.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.len(),
        });
    }
    for row in m {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
    }
    Ok(())
}

/// All principal minors nonnegative.
pub fn is_psd(a: &Matrix) -> bool {
    let n = a.len();
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let minor: Matrix = idx
            .iter()
            .map(|&r| idx.iter().map(|&c| a[r][c].clone()).collect())
            .collect();
        !linalg::determinant(&minor).is_negative()
    })
}

impl GaussianParams {
    /// Requires a symmetric `n x n` matrix with `n <= 4`; positive
    /// semidefiniteness is reported by [`GaussianParams::is_psd`].
    pub fn new(a: Matrix, t: Vec<Rational>) -> Result<Self> {
        let n = t.len();
        if n > MAX_DIM {
            return Err(Error::InvalidGaussian(format!(
                "dimension {n} exceeds {MAX_DIM}"
            )));
        }
        check_square(&a, n)?;
        if transpose(&a) != a {
            return Err(Error::InvalidGaussian("A is not symmetric".into()));
        }
        Ok(Self { a, t })
    }

    pub fn degenerate(n: usize) -> Self {
        Self {
            a: vec![vec![rational::zero(); n]; n],
            t: vec![rational::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    pub fn covariance(&self) -> &Matrix {
        &self.a
    }

    pub fn mean(&self) -> &[Rational] {
        &self.t
    }

    /// Membership in the Gaussian family.
    pub fn is_psd(&self) -> bool {
        is_psd(&self.a)
    }

    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let a = self
            .a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| axpy(x, y, 1))
            .collect();
        Ok(Self {
            a,
            t: axpy(&self.t, &other.t, 1),
        })
    }

    /// `exp(-<A s, s> + i <t, s>)`.
    pub fn char_at(&self, s: &[Rational]) -> Result<Complex64> {
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: s.len(),
            });
        }
        let quad = dot(&mat_vec(&self.a, s), s);
        let lin = dot(&self.t, s);
        Ok(Complex64::from_polar(
            (-rational::to_f64(&quad)).exp(),
            rational::to_f64(&lin),
        ))
    }
}

impl fmt::Debug for GaussianParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gaussian(A={}, t={})", render_matrix(&self.a), render_vector(&self.t))
    }
}

pub fn render_matrix(m: &Matrix) -> String {
    let rows: Vec<String> = m.iter().map(|r| render_vector(r)).collect();
    format!("[{}]", rows.join(","))
}

pub fn render_vector(v: &[Rational]) -> String {
    let items: Vec<String> = v.iter().map(rational::render).collect();
    format!("[{}]", items.join(","))
}

/// `A1 + eps^T A2 = 0` and `t1 + eps^T t2 = 0`, tested exactly.
pub fn gaussian_pair_condition(
    g1: &GaussianParams,
    g2: &GaussianParams,
    eps_r: &Matrix,
) -> Result<bool> {
    let n = g1.dim();
    if g2.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g2.dim(),
        });
    }
    check_square(eps_r, n)?;
    let et = transpose(eps_r);
    let a_sum = mat_mul(&et, &g2.a);
    let a_ok = g1
        .a
        .iter()
        .zip(&a_sum)
        .all(|(x, y)| axpy(x, y, 1).iter().all(Zero::is_zero));
    let t_ok = axpy(&g1.t, &mat_vec(&et, &g2.t), 1)
        .iter()
        .all(Zero::is_zero);
    Ok(a_ok && t_ok)
}

/// `|phi1(u+v) phi2(u+eps v) - phi1(u-v) phi2(u-eps v)|` on `R^n`.
pub fn real_feq_residual(
    g1: &GaussianParams,
    g2: &GaussianParams,
    eps_r: &Matrix,
    u: &[Rational],
    v: &[Rational],
) -> Result<f64> {
    check_square(eps_r, g1.dim())?;
    let ev = mat_vec(eps_r, v);
    let lhs = g1.char_at(&axpy(u, v, 1))? * g2.char_at(&axpy(u, &ev, 1))?;
    let rhs = g1.char_at(&axpy(u, v, -1))? * g2.char_at(&axpy(u, &ev, -1))?;
    Ok((lhs - rhs).norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledResidual {
    pub max_residual: f64,
    pub at: (Vec<Rational>, Vec<Rational>),
    pub samples: usize,
}

/// Largest residual of the `R^n` equation over seeded random rational `(u, v)`.
///
/// Stops early once the residual exceeds `stop_above`.
pub fn sample_real_feq<R: Rng>(
    g1: &GaussianParams,
    g2: &GaussianParams,
    eps_r: &Matrix,
    rng: &mut R,
    count: usize,
    stop_above: f64,
) -> Result<SampledResidual> {
    let n = g1.dim();
    let mut best = SampledResidual {
        max_residual: 0.0,
        at: (vec![rational::zero(); n], vec![rational::zero(); n]),
        samples: 0,
    };
    for _ in 0..count {
        let (u, v) = sample_pair(rng, n);
        let r = real_feq_residual(g1, g2, eps_r, &u, &v)?;
        best.samples += 1;
        if r > best.max_residual {
            best.max_residual = r;
            best.at = (u, v);
        }
        if best.max_residual > stop_above {
            break;
        }
    }
    Ok(best)
}

/// Action of `eps = adjoint(delta)` on `Y = R^n x H`, block by block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealAutomorphismBlock {
    eps_r: Matrix,
    eps_d: GroupMap,
}

impl RealAutomorphismBlock {
    /// `eps_r` and `I + eps_r` must be invertible, `eps_d` an automorphism.
    pub fn new(eps_r: Matrix, eps_d: GroupMap) -> Result<Self> {
        let n = eps_r.len();
        check_square(&eps_r, n)?;
        if linalg::determinant(&eps_r).is_zero() {
            return Err(Error::InvalidGaussian("eps_R is singular".into()));
        }
        let shifted: Matrix = eps_r
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, x)| if i == j { x + rational::one() } else { x.clone() })
                    .collect()
            })
            .collect();
        if linalg::determinant(&shifted).is_zero() {
            return Err(Error::InvalidGaussian("I + eps_R is singular".into()));
        }
        if !eps_d.is_automorphism() {
            return Err(Error::NotAnAutomorphism(format!("eps_D = {eps_d}")));
        }
        Ok(Self { eps_r, eps_d })
    }

    pub fn eps_r(&self) -> &Matrix {
        &self.eps_r
    }

    pub fn eps_d(&self) -> &GroupMap {
        &self.eps_d
    }

    /// The automorphism `delta` of the finite factor.
    pub fn delta_d(&self) -> GroupMap {
        self.eps_d.adjoint()
    }
}

/// `gamma * rho * E_g` on `R^n x D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductDistribution {
    gaussian: GaussianParams,
    rho: RationalDistribution,
    shift: GroupElement,
}

impl ProductDistribution {
    pub fn new(gaussian: GaussianParams, rho: RationalDistribution, shift: GroupElement) -> Result<Self> {
        if !gaussian.is_psd() {
            return Err(Error::InvalidGaussian("A is not positive semidefinite".into()));
        }
        if !rho.group().contains(&shift) {
            return Err(Error::DimensionMismatch {
                expected: rho.group().rank(),
                found: shift.coords().len(),
            });
        }
        Ok(Self {
            gaussian,
            rho,
            shift,
        })
    }

    pub fn gaussian(&self) -> &GaussianParams {
        &self.gaussian
    }

    pub fn rho(&self) -> &RationalDistribution {
        &self.rho
    }

    pub fn shift(&self) -> &GroupElement {
        &self.shift
    }

    /// The law of the `D` coordinate, `rho * E_g`.
    pub fn discrete(&self) -> RationalDistribution {
        self.rho.shift(&self.shift)
    }
}

/// `gamma^(s) * (rho * E_g)^(h)`.
pub fn product_char(mu: &ProductDistribution, s: &[Rational], h: &GroupElement) -> Result<Complex64> {
    Ok(mu.gaussian.char_at(s)? * mu.discrete().char_fn(h)?.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductFeqCheck {
    pub holds: bool,
    pub max_residual: f64,
    /// Number of `(s, s')` pairs evaluated, the origin included.
    pub samples: usize,
}

/// The equation on `Y = R^n x H` at `(0, 0)` plus `sample_count` seeded random
/// `(s, s')` pairs, each crossed with every `(h, h')` in `H x H`.
pub fn check_product_feq(
    mu1: &ProductDistribution,
    mu2: &ProductDistribution,
    block: &RealAutomorphismBlock,
    sample_count: usize,
    tol: f64,
    seed: u64,
) -> Result<ProductFeqCheck> {
    let n = mu1.gaussian.dim();
    if mu2.gaussian.dim() != n || block.eps_r.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mu2.gaussian.dim(),
        });
    }
    let group = mu1.rho.group();
    group.same_as(mu2.rho.group())?;
    group.same_as(block.eps_d.source())?;
    let psi1 = mu1.discrete().char_table();
    let psi2 = mu2.discrete().char_table();
    let eps_d = block.eps_d.index_table();
    let mut rng = sampling::rng(seed);
    let mut max_residual = 0.0f64;
    let origin = (vec![rational::zero(); n], vec![rational::zero(); n]);
    let pairs = std::iter::once(origin).chain((0..sample_count).map(|_| sample_pair(&mut rng, n)));
    let mut samples = 0;
    for (s, sp) in pairs {
        samples += 1;
        let esp = mat_vec(&block.eps_r, &sp);
        let l1 = mu1.gaussian.char_at(&axpy(&s, &sp, 1))?;
        let l2 = mu2.gaussian.char_at(&axpy(&s, &esp, 1))?;
        let r1 = mu1.gaussian.char_at(&axpy(&s, &sp, -1))?;
        let r2 = mu2.gaussian.char_at(&axpy(&s, &esp, -1))?;
        for h in 0..group.order() {
            for hp in 0..group.order() {
                let lhs = l1 * psi1[group.add_idx(h, hp)] * l2 * psi2[group.add_idx(h, eps_d[hp])];
                let rhs = r1 * psi1[group.sub_idx(h, hp)] * r2 * psi2[group.sub_idx(h, eps_d[hp])];
                max_residual = max_residual.max((lhs - rhs).norm());
            }
        }
    }
    Ok(ProductFeqCheck {
        holds: max_residual <= tol,
        max_residual,
        samples,
    })
}

/// `mu_j = gamma_j * rho_j * m_F * E_{g_j}` on `R^n x D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullDecomposition {
    pub gaussians: [GaussianParams; 2],
    pub discrete: Decomposition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FullDefect {
    GaussianMismatch { j: usize },
    NotPsd { j: usize },
    PairCondition,
    Discrete(DecompositionDefect),
}

impl fmt::Display for FullDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GaussianMismatch { j } => write!(f, "gamma{} differs from the Gaussian factor of mu{}", j + 1, j + 1),
            Self::NotPsd { j } => write!(f, "A{} is not positive semidefinite", j + 1),
            Self::PairCondition => write!(f, "Gaussian pair condition A1 + eps^T A2 = 0, t1 + eps^T t2 = 0 fails"),
            Self::Discrete(d) => write!(f, "{d}"),
        }
    }
}

/// Checks the Gaussian factors and delegates the finite factor.
pub fn verify_full_decomposition(
    mu1: &ProductDistribution,
    mu2: &ProductDistribution,
    block: &RealAutomorphismBlock,
    dec: &FullDecomposition,
) -> std::result::Result<(), FullDefect> {
    for (j, gamma) in dec.gaussians.iter().enumerate() {
        if !gamma.is_psd() {
            return Err(FullDefect::NotPsd { j });
        }
    }
    for (j, mu) in [mu1, mu2].into_iter().enumerate() {
        if mu.gaussian != dec.gaussians[j] {
            return Err(FullDefect::GaussianMismatch { j });
        }
    }
    match gaussian_pair_condition(&dec.gaussians[0], &dec.gaussians[1], &block.eps_r) {
        Ok(true) => {}
        _ => return Err(FullDefect::PairCondition),
    }
    verify_decomposition(&mu1.discrete(), &mu2.discrete(), &block.delta_d(), &dec.discrete)
        .map_err(FullDefect::Discrete)
}
