//! Functions of positive real part, represented by finite Herglotz measures.
//!
//! A [`CaratheodoryFunction`] is
//!
//! ```text
//! p(z) = u + sum_j w_j (1 + zeta_j z^m) / (1 - zeta_j z^m),   u + sum_j w_j = 1,
//! ```
//!
//! with `u, w_j >= 0` and `|zeta_j| = 1`. The optional uniform part `u`
//! contributes only to `p(0)`. Every such `p` has `p(0) = 1` and `Re p > 0`
//! on the unit disk, and its expansion is `1 + p_m z^m + p_{2m} z^{2m} + ...`
//! with `p_{km} = 2 sum_j w_j zeta_j^k`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Complex64, ComplexRational, Scalar};
use crate::series::TruncatedSeries;

/// Tolerance for float checks of the Lemma-1 inequalities and invariants.
pub const FLOAT_TOL: f64 = 1e-12;

/// Scalars that can carry unimodular points and simplex weights.
pub trait CircleScalar: Scalar {
    fn random_unimodular<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// `n` nonnegative weights summing to one, uniform on the simplex
    /// (approximately so on the exact backend).
    fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Self>;

    /// Real part, as a real-valued scalar.
    fn re_part(&self) -> Self;

    /// Imaginary part, as a real-valued scalar.
    fn im_part(&self) -> Self;
}

impl CircleScalar for Complex64 {
    fn random_unimodular<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let theta: f64 = rng.random::<f64>() * 2.0 * PI;
        Complex64::from_polar(1.0, theta)
    }

    fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Self> {
        // normalized unit exponentials are Dirichlet(1, ..., 1)
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| Complex64::new(x / total, 0.0)).collect()
    }

    fn re_part(&self) -> Self {
        Complex64::new(self.re, 0.0)
    }

    fn im_part(&self) -> Self {
        Complex64::new(self.im, 0.0)
    }
}

/// Denominator used when rounding `tan(theta/2)` to a rational.
const CIRCLE_GRID: i64 = 256;

impl CircleScalar for ComplexRational {
    fn random_unimodular<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rational_unimodular(rng.random::<f64>() * 2.0 * PI)
    }

    fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Self> {
        let raw: Vec<i64> = (0..n).map(|_| rng.random_range(1..=1000)).collect();
        let total: i64 = raw.iter().sum();
        raw.into_iter()
            .map(|x| ComplexRational::new(BigRational::new(BigInt::from(x), BigInt::from(total)), BigRational::zero()))
            .collect()
    }

    fn re_part(&self) -> Self {
        ComplexRational::new(self.re.clone(), BigRational::zero())
    }

    fn im_part(&self) -> Self {
        ComplexRational::new(self.im.clone(), BigRational::zero())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom<S> {
    pub weight: S,
    pub point: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaratheodoryFunction<S> {
    atoms: Vec<Atom<S>>,
    uniform: S,
    m: usize,
}

impl<S: CircleScalar> CaratheodoryFunction<S> {
    /// Validates weights (real, nonnegative, summing to one with the uniform
    /// part) and points (unimodular).
    pub fn new(atoms: Vec<Atom<S>>, uniform: S, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::OutOfRange("fold order m must be at least 1".into()));
        }
        if !uniform.is_nonneg_real(FLOAT_TOL) {
            return Err(Error::InvalidCaratheodory("uniform weight must be a nonnegative real".into()));
        }
        let mut total = uniform.clone();
        for (j, atom) in atoms.iter().enumerate() {
            if !atom.weight.is_nonneg_real(FLOAT_TOL) {
                return Err(Error::InvalidCaratheodory(format!("atom {j}: weight must be a nonnegative real")));
            }
            let modulus = atom.point.clone() * atom.point.conj() - S::one();
            if !modulus.is_negligible(FLOAT_TOL) {
                return Err(Error::InvalidCaratheodory(format!("atom {j}: point is not unimodular")));
            }
            total = total + atom.weight.clone();
        }
        if !(total - S::one()).is_negligible(FLOAT_TOL) {
            return Err(Error::InvalidCaratheodory("weights must sum to 1".into()));
        }
        Ok(Self { atoms, uniform, m })
    }

    pub fn from_atoms(atoms: Vec<(S, S)>, m: usize) -> Result<Self> {
        let atoms = atoms.into_iter().map(|(weight, point)| Atom { weight, point }).collect();
        Self::new(atoms, S::zero(), m)
    }

    /// `p == 1`: the uniform measure alone.
    pub fn constant_one(m: usize) -> Result<Self> {
        Self::new(Vec::new(), S::one(), m)
    }

    /// `(1 + zeta z^m)/(1 - zeta z^m)`.
    pub fn single(point: S, m: usize) -> Result<Self> {
        Self::from_atoms(vec![(S::one(), point)], m)
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    pub fn uniform_weight(&self) -> &S {
        &self.uniform
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `zeta -> -zeta` for every atom; negates every odd-k coefficient `p_{km}`.
    pub fn reflect(&self) -> Self {
        let atoms = self.atoms.iter().map(|a| Atom { weight: a.weight.clone(), point: -a.point.clone() }).collect();
        Self { atoms, uniform: self.uniform.clone(), m: self.m }
    }

    /// `t p + (1-t) other`, for `t` real in `[0, 1]`.
    pub fn mix(&self, other: &Self, t: &S) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::OutOfRange("cannot mix functions of different fold order".into()));
        }
        let s = S::one() - t.clone();
        let mut atoms: Vec<Atom<S>> =
            self.atoms.iter().map(|a| Atom { weight: a.weight.clone() * t.clone(), point: a.point.clone() }).collect();
        atoms.extend(other.atoms.iter().map(|a| Atom { weight: a.weight.clone() * s.clone(), point: a.point.clone() }));
        let uniform = self.uniform.clone() * t.clone() + other.uniform.clone() * s;
        Self::new(atoms, uniform, self.m)
    }

    /// `p_{km} = 2 sum_j w_j zeta_j^k` for `k >= 1`.
    pub fn coefficient(&self, k: usize) -> S {
        let two = S::from_int(2);
        let mut acc = S::zero();
        for atom in &self.atoms {
            let mut power = S::one();
            for _ in 0..k {
                power = power * atom.point.clone();
            }
            acc = acc + atom.weight.clone() * power;
        }
        two * acc
    }

    /// `(p_m, p_{2m})`.
    pub fn leading(&self) -> (S, S) {
        (self.coefficient(1), self.coefficient(2))
    }

    /// Expansion through `order`: constant 1, `p_{km}` at `z^{km}`, zeros elsewhere.
    pub fn expand(&self, order: usize) -> TruncatedSeries<S> {
        let mut c = vec![S::zero(); order + 1];
        c[0] = S::one();
        let two = S::from_int(2);
        let mut powers: Vec<S> = self.atoms.iter().map(|a| a.point.clone()).collect();
        let mut k = 1;
        while k * self.m <= order {
            let mut acc = S::zero();
            for (atom, power) in self.atoms.iter().zip(powers.iter()) {
                acc = acc + atom.weight.clone() * power.clone();
            }
            c[k * self.m] = two.clone() * acc;
            for (atom, power) in self.atoms.iter().zip(powers.iter_mut()) {
                *power = power.clone() * atom.point.clone();
            }
            k += 1;
        }
        TruncatedSeries::new(c)
    }

    /// Closed-form value at `z` in the unit disk.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zm = z.powu(self.m as u32);
        let one = Complex64::new(1.0, 0.0);
        let mut acc = self.uniform.to_complex64();
        for atom in &self.atoms {
            let kernel = atom.point.to_complex64() * zm;
            acc += atom.weight.to_complex64() * (one + kernel) / (one - kernel);
        }
        acc
    }

    pub fn to_complex64(&self) -> CaratheodoryFunction<Complex64> {
        CaratheodoryFunction {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { weight: a.weight.to_complex64(), point: a.point.to_complex64() })
                .collect(),
            uniform: self.uniform.to_complex64(),
            m: self.m,
        }
    }

    /// Coefficient and Lemma-1 report through `p_{depth*m}`.
    pub fn check_lemma1(&self, depth: usize) -> Result<Lemma1Report> {
        if depth < 2 {
            return Err(Error::TooShort(depth));
        }
        let coeffs: Vec<S> = (1..=depth).map(|k| self.coefficient(k)).collect();
        let magnitudes: Vec<f64> = coeffs.iter().map(Scalar::magnitude).collect();
        let (p1, p2) = (&coeffs[0], &coeffs[1]);
        let half = S::from_rational(&BigRational::new(BigInt::one(), BigInt::from(2)));
        let second_lhs = (p2.clone() - p1.clone() * p1.clone() * half).magnitude();
        let second_rhs = 2.0 - magnitudes[0] * magnitudes[0] / 2.0;
        let coefficient_violations = magnitudes.iter().filter(|&&x| x > 2.0 + FLOAT_TOL).count();
        let second_violated = second_lhs > second_rhs + FLOAT_TOL;
        Ok(Lemma1Report {
            m: self.m,
            magnitudes,
            second_lhs,
            second_rhs,
            coefficient_violations,
            second_violated,
        })
    }

    /// Draws a function with `atom_count` atoms; deterministic in `seed`.
    pub fn sample(seed: u64, atom_count: usize, m: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::sample_with(&mut rng, atom_count, m)
    }

    pub fn sample_with<R: Rng + ?Sized>(rng: &mut R, atom_count: usize, m: usize) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::OutOfRange("atom count must be at least 1".into()));
        }
        let weights = S::random_simplex(rng, atom_count);
        let atoms = weights.into_iter().map(|weight| Atom { weight, point: S::random_unimodular(rng) }).collect();
        Self::new(atoms, S::zero(), m)
    }
}

/// Magnitudes `|p_{km}|` with the bound 2, and the second inequality
/// `|p_{2m} - p_m^2/2| <= 2 - |p_m|^2/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub m: usize,
    pub magnitudes: Vec<f64>,
    pub second_lhs: f64,
    pub second_rhs: f64,
    pub coefficient_violations: usize,
    pub second_violated: bool,
}

impl Lemma1Report {
    pub fn passed(&self) -> bool {
        self.coefficient_violations == 0 && !self.second_violated
    }
}

/// How `q` is built from `p` so that `q_m = -p_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairStrategy {
    /// `q = p` with every point reflected.
    Reflect,
    /// `q` drawn freely, then rescaled and completed by two corrective atoms
    /// that cancel `p_m + q_m`; falls back to reflection after bounded retries.
    Corrective,
}

pub const CORRECTIVE_RETRIES: usize = 64;

/// A seeded pair `(p, q)` with `p_m + q_m = 0` (exactly on the exact backend).
pub fn constrained_pair<S: CircleScalar>(
    seed: u64,
    m: usize,
    strategy: PairStrategy,
) -> Result<(CaratheodoryFunction<S>, CaratheodoryFunction<S>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(1..=4);
    let p = CaratheodoryFunction::<S>::sample_with(&mut rng, count, m)?;
    let q = match strategy {
        PairStrategy::Reflect => p.reflect(),
        PairStrategy::Corrective => corrective_partner(&p, &mut rng)?.unwrap_or_else(|| p.reflect()),
    };
    Ok((p, q))
}

/// Finds `q = s q_free + w_1 [zeta_a] + w_2 [zeta_b]` with `q_m = -p_m`.
///
/// In first moments `c_1 = p_m / 2` the requirement is that `-c_1(p)` be the
/// convex combination `s c_1(q_free) + w_1 zeta_a + w_2 zeta_b`; the weights
/// solve a 3x3 real linear system and the draw is rejected if any is negative.
fn corrective_partner<S: CircleScalar, R: Rng + ?Sized>(
    p: &CaratheodoryFunction<S>,
    rng: &mut R,
) -> Result<Option<CaratheodoryFunction<S>>> {
    let half = S::from_rational(&BigRational::new(BigInt::one(), BigInt::from(2)));
    let target = -(p.coefficient(1) * half.clone());
    for _ in 0..CORRECTIVE_RETRIES {
        let count = rng.random_range(1..=3);
        let free = CaratheodoryFunction::<S>::sample_with(rng, count, p.m)?;
        let moment = free.coefficient(1) * half.clone();
        let za = S::random_unimodular(rng);
        let zb = S::random_unimodular(rng);
        let Some([s, w1, w2]) = solve_convex3(&moment, &za, &zb, &target) else {
            continue;
        };
        let mut atoms: Vec<Atom<S>> = free
            .atoms
            .iter()
            .map(|a| Atom { weight: a.weight.clone() * s.clone(), point: a.point.clone() })
            .collect();
        atoms.push(Atom { weight: w1, point: za });
        atoms.push(Atom { weight: w2, point: zb });
        atoms.retain(|a| !a.weight.is_zero());
        return CaratheodoryFunction::new(atoms, S::zero(), p.m).map(Some);
    }
    Ok(None)
}

/// Barycentric coordinates of `target` in the triangle `(a, b, c)`, if they
/// are all nonnegative.
fn solve_convex3<S: CircleScalar>(a: &S, b: &S, c: &S, target: &S) -> Option<[S; 3]> {
    let (ax, ay) = (a.re_part(), a.im_part());
    let (bx, by) = (b.re_part(), b.im_part());
    let (cx, cy) = (c.re_part(), c.im_part());
    let (tx, ty) = (target.re_part(), target.im_part());
    // rows: x-coords, y-coords, ones
    let det3 = |c0: [&S; 3], c1: [&S; 3], c2: [&S; 3]| -> S {
        c0[0].clone() * (c1[1].clone() * c2[2].clone() - c1[2].clone() * c2[1].clone())
            - c1[0].clone() * (c0[1].clone() * c2[2].clone() - c0[2].clone() * c2[1].clone())
            + c2[0].clone() * (c0[1].clone() * c1[2].clone() - c0[2].clone() * c1[1].clone())
    };
    let one = S::one();
    let det = det3([&ax, &ay, &one], [&bx, &by, &one], [&cx, &cy, &one]);
    if det.is_negligible(1e-14) {
        return None;
    }
    let d0 = det3([&tx, &ty, &one], [&bx, &by, &one], [&cx, &cy, &one]);
    let d1 = det3([&ax, &ay, &one], [&tx, &ty, &one], [&cx, &cy, &one]);
    let d2 = det3([&ax, &ay, &one], [&bx, &by, &one], [&tx, &ty, &one]);
    let weights = [d0 / det.clone(), d1 / det.clone(), d2 / det];
    if weights.iter().all(|w| w.is_nonneg_real(0.0)) {
        Some(weights)
    } else {
        None
    }
}

/// Builds a finite-atom function with prescribed `(p_m, p_{2m})`, or `None`
/// when no function of positive real part has these coefficients.
///
/// Uses the first two Schur parameters: `gamma_0 = p_m/2` and
/// `gamma_1 = (p_{2m} - p_m^2/2) / (2 - |p_m|^2/2)`; feasibility is
/// `|gamma_1| <= 1`, the second inequality of the coefficient lemma. The
/// interior parameter `gamma_1` is split along a chord of the unit circle at
/// angle `chord_angle` into two unimodular endpoints, each of which
/// terminates the Schur recursion in a two-atom measure.
pub fn from_leading_coefficients(
    p_m: Complex64,
    p_2m: Complex64,
    m: usize,
    chord_angle: f64,
) -> Option<CaratheodoryFunction<Complex64>> {
    let gamma0 = p_m / 2.0;
    let modulus = gamma0.norm();
    if modulus > 1.0 + FLOAT_TOL {
        return None;
    }
    let rest = 1.0 - modulus * modulus;
    if rest <= FLOAT_TOL {
        if (p_2m - p_m * p_m / 2.0).norm() > 1e-9 {
            return None;
        }
        let point = gamma0 / modulus;
        return CaratheodoryFunction::single(point, m).ok();
    }
    let mut gamma1 = (p_2m - p_m * p_m / 2.0) / (2.0 * rest);
    let g1 = gamma1.norm();
    if g1 > 1.0 + FLOAT_TOL {
        return None;
    }
    if g1 > 1.0 {
        gamma1 /= g1;
    }
    let dir = Complex64::from_polar(1.0, chord_angle);
    // |gamma1 + s dir| = 1
    let proj = (gamma1.conj() * dir).re;
    let disc = (proj * proj + 1.0 - gamma1.norm_sqr()).max(0.0).sqrt();
    let (s1, s2) = (-proj + disc, -proj - disc);
    let (u1, u2) = (gamma1 + dir * s1, gamma1 + dir * s2);
    let t = if (s1 - s2).abs() < 1e-15 { 1.0 } else { -s2 / (s1 - s2) };

    let mut atoms = Vec::with_capacity(4);
    for (u, share) in [(u1, t), (u2, 1.0 - t)] {
        if share <= 0.0 {
            continue;
        }
        for (w, z) in two_atom_measure(gamma0, u / u.norm())? {
            if w * share > 0.0 {
                atoms.push(Atom { weight: Complex64::new(w * share, 0.0), point: z });
            }
        }
    }
    let total: f64 = atoms.iter().map(|a| a.weight.re).sum();
    for a in &mut atoms {
        a.weight /= total;
    }
    CaratheodoryFunction::new(atoms, Complex64::new(0.0, 0.0), m).ok()
}

/// Measure of `(1+w)/(1-w)` with `w(z) = z (gamma0 + u z)/(1 + conj(gamma0) u z)`,
/// `|gamma0| < 1`, `|u| = 1`: atoms at the reciprocals of the two roots of
/// `u z^2 + (gamma0 - conj(gamma0) u) z - 1 = 0`.
fn two_atom_measure(gamma0: Complex64, u: Complex64) -> Option<[(f64, Complex64); 2]> {
    let b = gamma0 - gamma0.conj() * u;
    let disc = (b * b + 4.0 * u).sqrt();
    let r1 = (-b + disc) / (2.0 * u);
    let r2 = (-b - disc) / (2.0 * u);
    let z1 = r1.inv();
    let z2 = r2.inv();
    let (z1, z2) = (z1 / z1.norm(), z2 / z2.norm());
    let gap = z1 - z2;
    if gap.norm() < 1e-12 {
        return None;
    }
    let w1 = ((gamma0 - z2) / gap).re.clamp(0.0, 1.0);
    Some([(w1, z1), (1.0 - w1, z2)])
}

/// Exactly unimodular rational point `((1-t^2) + 2ti)/(1+t^2)` near angle
/// `theta`, with `t` the rounding of `tan(theta/2)` (or of the half-turned
/// angle) to denominator 256.
pub fn rational_unimodular(theta: f64) -> ComplexRational {
    let wrapped = (theta + PI).rem_euclid(2.0 * PI) - PI;
    let (half_turn, t_angle) = if wrapped.abs() > PI / 2.0 {
        (true, if wrapped > 0.0 { wrapped - PI } else { wrapped + PI })
    } else {
        (false, wrapped)
    };
    let t_num = ((t_angle / 2.0).tan() * CIRCLE_GRID as f64).round() as i64;
    let t = BigRational::new(BigInt::from(t_num), BigInt::from(CIRCLE_GRID));
    let one = BigRational::one();
    let t2 = &t * &t;
    let den = &one + &t2;
    let z = ComplexRational::new((&one - &t2) / &den, BigRational::from_integer(BigInt::from(2)) * &t / &den);
    if half_turn {
        -z
    } else {
        z
    }
}

/// Whether all weights of an exact function are strictly positive rationals.
pub fn has_positive_weights(p: &CaratheodoryFunction<ComplexRational>) -> bool {
    p.atoms().iter().all(|a| a.weight.im.is_zero() && a.weight.re.is_positive())
}
