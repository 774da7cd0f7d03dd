//! Configurations, functions, and discrete derivatives on the Boolean cube {0,1}^n.
//!
//! Coordinates are indexed `1..=n`; coordinate 1 is the least significant bit of
//! the table index. Every value is an exact rational.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest dimension for which a full [`CubeFunction`] table is built.
pub const MAX_CUBE_DIM: usize = 14;
/// Largest dimension for which a full [`BiFunction`] table is built.
pub const MAX_BI_DIM: usize = 10;

pub type Q = BigRational;

pub(crate) fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn qr(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        Err(Error::IndexOutOfRange { index: i, n })
    } else {
        Ok(())
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::DimensionCap { n, cap })
    } else {
        Ok(())
    }
}

/// A point of {0,1}^n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitConfig {
    n: usize,
    bits: u64,
}

impl BitConfig {
    pub fn new(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!("cube dimension {n} not in 1..=64")));
        }
        if n < 64 && bits >> n != 0 {
            return Err(Error::InvalidParameter(format!("bits {bits:#b} exceed dimension {n}")));
        }
        Ok(BitConfig { n, bits })
    }

    /// Parses a string such as `"101"`, most significant coordinate first.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                _ => return Err(Error::InvalidParameter(format!("bad bit character {c:?}"))),
            }
        }
        BitConfig::new(s.len(), bits)
    }

    pub(crate) fn from_index(n: usize, bits: usize) -> Self {
        BitConfig { n, bits: bits as u64 }
    }

    pub fn zero(n: usize) -> Result<Self> {
        BitConfig::new(n, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    fn mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn get(&self, i: usize) -> Result<bool> {
        check_index(i, self.n)?;
        Ok(self.bits >> (i - 1) & 1 == 1)
    }

    /// x^i: coordinate i set to 1.
    pub fn raised(&self, i: usize) -> Result<Self> {
        check_index(i, self.n)?;
        Ok(BitConfig { n: self.n, bits: self.bits | 1 << (i - 1) })
    }

    /// x_i: coordinate i set to 0.
    pub fn lowered(&self, i: usize) -> Result<Self> {
        check_index(i, self.n)?;
        Ok(BitConfig { n: self.n, bits: self.bits & !(1 << (i - 1)) })
    }

    pub fn flipped(&self, i: usize) -> Result<Self> {
        check_index(i, self.n)?;
        Ok(BitConfig { n: self.n, bits: self.bits ^ 1 << (i - 1) })
    }

    /// x̄: every coordinate complemented.
    pub fn complement(&self) -> Self {
        BitConfig { n: self.n, bits: !self.bits & self.mask() }
    }

    pub fn hamming(&self, other: &BitConfig) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    pub fn all(n: usize) -> impl Iterator<Item = BitConfig> {
        (0..1usize << n).map(move |b| BitConfig::from_index(n, b))
    }
}

impl std::fmt::Display for BitConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in (0..self.n).rev() {
            write!(f, "{}", self.bits >> i & 1)?;
        }
        Ok(())
    }
}

/// Returns `(x^i, x_i, x̄)`.
pub fn bit_flips(x: BitConfig, i: usize) -> Result<(BitConfig, BitConfig, BitConfig)> {
    Ok((x.raised(i)?, x.lowered(i)?, x.complement()))
}

/// A total map {0,1}^n → Q.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeFunction {
    n: usize,
    values: Vec<Q>,
}

impl CubeFunction {
    pub fn new(n: usize, values: Vec<Q>) -> Result<Self> {
        check_cap(n, MAX_CUBE_DIM)?;
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: values.len() });
        }
        Ok(CubeFunction { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(BitConfig) -> Q) -> Result<Self> {
        check_cap(n, MAX_CUBE_DIM)?;
        let values = BitConfig::all(n).map(&mut f).collect();
        Ok(CubeFunction { n, values })
    }

    pub fn constant(n: usize, c: Q) -> Result<Self> {
        CubeFunction::from_fn(n, |_| c.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn value(&self, x: BitConfig) -> &Q {
        &self.values[x.index()]
    }

    pub(crate) fn at(&self, idx: usize) -> &Q {
        &self.values[idx]
    }

    /// The table of ∇_i f.
    pub fn grad_function(&self, i: usize) -> Result<CubeFunction> {
        check_index(i, self.n)?;
        let m = 1usize << (i - 1);
        let values = (0..self.values.len())
            .map(|x| &self.values[x | m] - &self.values[x & !m])
            .collect();
        Ok(CubeFunction { n: self.n, values })
    }

    pub fn mul(&self, other: &CubeFunction) -> Result<CubeFunction> {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &CubeFunction) -> Result<CubeFunction> {
        self.zip(other, |a, b| a + b)
    }

    pub fn scale(&self, c: &Q) -> CubeFunction {
        CubeFunction { n: self.n, values: self.values.iter().map(|v| v * c).collect() }
    }

    fn zip(&self, other: &CubeFunction, op: impl Fn(&Q, &Q) -> Q) -> Result<CubeFunction> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(a, b)).collect();
        Ok(CubeFunction { n: self.n, values })
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    pub fn is_increasing(&self) -> bool {
        is_increasing(self)
    }

    pub fn is_decreasing(&self) -> bool {
        let neg = self.scale(&q(-1));
        is_increasing(&neg)
    }
}

/// ∇_i f(x) = f(x^i) − f(x_i).
pub fn grad(f: &CubeFunction, i: usize, x: BitConfig) -> Result<Q> {
    if x.n() != f.n {
        return Err(Error::DimensionMismatch { expected: f.n, got: x.n() });
    }
    Ok(f.value(x.raised(i)?) - f.value(x.lowered(i)?))
}

/// Edge criterion: f(x_i) ≤ f(x^i) for all x and i.
pub fn is_increasing(f: &CubeFunction) -> bool {
    (0..f.n).all(|j| {
        let m = 1usize << j;
        (0..f.values.len()).filter(|x| x & m == 0).all(|x| f.values[x] <= f.values[x | m])
    })
}

/// E[f] under the uniform measure.
pub fn expectation(f: &CubeFunction) -> Q {
    let sum: Q = f.values.iter().fold(Q::zero(), |acc, v| acc + v);
    sum / q(1i64 << f.n)
}

/// A 0/1-valued function on {0,1}^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CubeEvent {
    n: usize,
    members: Vec<bool>,
}

impl CubeEvent {
    pub fn from_fn(n: usize, mut f: impl FnMut(BitConfig) -> bool) -> Result<Self> {
        check_cap(n, MAX_CUBE_DIM)?;
        Ok(CubeEvent { n, members: BitConfig::all(n).map(&mut f).collect() })
    }

    pub fn from_members(n: usize, members: Vec<bool>) -> Result<Self> {
        check_cap(n, MAX_CUBE_DIM)?;
        if members.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: members.len() });
        }
        Ok(CubeEvent { n, members })
    }

    pub fn empty(n: usize) -> Result<Self> {
        CubeEvent::from_fn(n, |_| false)
    }

    pub fn full(n: usize) -> Result<Self> {
        CubeEvent::from_fn(n, |_| true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: BitConfig) -> bool {
        self.members[x.index()]
    }

    pub(crate) fn contains_index(&self, idx: usize) -> bool {
        self.members[idx]
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn probability(&self) -> Q {
        qr(self.count() as i64, 1i64 << self.n)
    }

    pub fn to_function(&self) -> CubeFunction {
        let values = self.members.iter().map(|&b| if b { Q::one() } else { Q::zero() }).collect();
        CubeFunction { n: self.n, values }
    }

    /// {x̄ : x ∈ A}.
    pub fn complement_image(&self) -> CubeEvent {
        let mask = (1usize << self.n) - 1;
        let members = (0..self.members.len()).map(|x| self.members[!x & mask]).collect();
        CubeEvent { n: self.n, members }
    }

    /// {x : x ∉ A}.
    pub fn negation(&self) -> CubeEvent {
        CubeEvent { n: self.n, members: self.members.iter().map(|b| !b).collect() }
    }

    pub fn intersection(&self, other: &CubeEvent) -> Result<CubeEvent> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let members = self.members.iter().zip(&other.members).map(|(a, b)| *a && *b).collect();
        Ok(CubeEvent { n: self.n, members })
    }

    pub fn is_increasing(&self) -> bool {
        (0..self.n).all(|j| {
            let m = 1usize << j;
            (0..self.members.len()).all(|x| !self.members[x & !m] || self.members[x | m])
        })
    }

    pub fn is_decreasing(&self) -> bool {
        self.negation().is_increasing()
    }
}

/// Random increasing event: the up-set generated by a random antichain.
pub fn random_monotone(n: usize, seed: u64) -> Result<CubeEvent> {
    check_cap(n, MAX_CUBE_DIM)?;
    if n == 0 {
        return Err(Error::InvalidParameter("cube dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density: f64 = rng.gen_range(0.15..0.9);
    let count = rng.gen_range(0..=n + 2);
    let mut points: Vec<usize> = (0..count)
        .map(|_| (0..n).filter(|_| rng.gen_bool(density)).fold(0usize, |acc, j| acc | 1 << j))
        .collect();
    points.sort_unstable();
    points.dedup();
    let antichain: Vec<usize> = points
        .iter()
        .copied()
        .filter(|&p| !points.iter().any(|&r| r != p && r & !p == 0))
        .collect();
    CubeEvent::from_fn(n, |x| {
        let x = x.index();
        antichain.iter().any(|&g| g & !x == 0)
    })
}

/// Random event with each configuration included independently.
pub fn random_event(n: usize, seed: u64) -> Result<CubeEvent> {
    check_cap(n, MAX_CUBE_DIM)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density: f64 = rng.gen_range(0.1..0.9);
    CubeEvent::from_fn(n, |_| rng.gen_bool(density))
}

/// Random function with small integer-over-small-denominator values in `[lo, hi]`.
pub fn random_function(n: usize, lo: i64, hi: i64, seed: u64) -> Result<CubeFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CubeFunction::from_fn(n, |_| qr(rng.gen_range(lo * 4..=hi * 4), 4))
}

#[derive(Clone, Debug, PartialEq)]
enum BiRepr {
    Table(Vec<Q>),
    Product(CubeFunction, CubeFunction),
}

/// A total map {0,1}^n × {0,1}^n → Q.
///
/// Table index of `(x, y)` is `x | y << n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiFunction {
    n: usize,
    repr: BiRepr,
}

impl BiFunction {
    pub fn from_fn(n: usize, mut f: impl FnMut(BitConfig, BitConfig) -> Q) -> Result<Self> {
        check_cap(n, MAX_BI_DIM)?;
        let size = 1usize << n;
        let mut values = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                values.push(f(BitConfig::from_index(n, x), BitConfig::from_index(n, y)));
            }
        }
        Ok(BiFunction { n, repr: BiRepr::Table(values) })
    }

    pub fn from_table(n: usize, values: Vec<Q>) -> Result<Self> {
        check_cap(n, MAX_BI_DIM)?;
        if values.len() != 1 << (2 * n) {
            return Err(Error::DimensionMismatch { expected: 1 << (2 * n), got: values.len() });
        }
        Ok(BiFunction { n, repr: BiRepr::Table(values) })
    }

    /// F(x, y) = f(x) g(y).
    pub fn product(f: &CubeFunction, g: &CubeFunction) -> Result<Self> {
        if f.n != g.n {
            return Err(Error::DimensionMismatch { expected: f.n, got: g.n });
        }
        check_cap(f.n, MAX_BI_DIM)?;
        Ok(BiFunction { n: f.n, repr: BiRepr::Product(f.clone(), g.clone()) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn as_product(&self) -> Option<(&CubeFunction, &CubeFunction)> {
        match &self.repr {
            BiRepr::Product(f, g) => Some((f, g)),
            BiRepr::Table(_) => None,
        }
    }

    pub(crate) fn at(&self, x: usize, y: usize) -> Q {
        match &self.repr {
            BiRepr::Table(v) => v[x | y << self.n].clone(),
            BiRepr::Product(f, g) => f.at(x) * g.at(y),
        }
    }

    pub fn value(&self, x: BitConfig, y: BitConfig) -> Result<Q> {
        if x.n() != self.n || y.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.n().max(y.n()) });
        }
        Ok(self.at(x.index(), y.index()))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        check_index(i, self.n)
    }

    /// Materialised table, row-major in `y`.
    pub fn table(&self) -> Vec<Q> {
        match &self.repr {
            BiRepr::Table(v) => v.clone(),
            BiRepr::Product(..) => {
                let size = 1usize << self.n;
                let mut out = Vec::with_capacity(size * size);
                for y in 0..size {
                    for x in 0..size {
                        out.push(self.at(x, y));
                    }
                }
                out
            }
        }
    }

    pub fn map(&self, f: impl Fn(usize, usize) -> Q) -> BiFunction {
        let size = 1usize << self.n;
        let mut values = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                values.push(f(x, y));
            }
        }
        BiFunction { n: self.n, repr: BiRepr::Table(values) }
    }

    pub fn mul(&self, other: &BiFunction) -> Result<BiFunction> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(self.map(|x, y| self.at(x, y) * other.at(x, y)))
    }

    /// (x, y) ↦ F(y, x).
    pub fn swapped(&self) -> BiFunction {
        self.map(|x, y| self.at(y, x))
    }

    /// (x, y) ↦ F(x, ȳ).
    pub fn complement_second(&self) -> BiFunction {
        let mask = (1usize << self.n) - 1;
        self.map(|x, y| self.at(x, !y & mask))
    }

    /// The table of ∇_ii F. Stays in product form when F is a product.
    pub fn grad2_function(&self, i: usize) -> Result<BiFunction> {
        self.check_index(i)?;
        if let BiRepr::Product(f, g) = &self.repr {
            return BiFunction::product(&f.grad_function(i)?, &g.grad_function(i)?);
        }
        let m = 1usize << (i - 1);
        Ok(self.map(|x, y| {
            let (xu, xd, yu, yd) = (x | m, x & !m, y | m, y & !m);
            self.at(xu, yu) + self.at(xd, yd) - self.at(xu, yd) - self.at(xd, yu)
        }))
    }

    /// The table of D_i F.
    pub fn d_op_function(&self, i: usize) -> Result<BiFunction> {
        self.check_index(i)?;
        let m = 1usize << (i - 1);
        Ok(self.map(|x, y| d_op_at(self, m, x, y)))
    }

    /// Increasing in all 2n coordinates.
    pub fn is_increasing(&self) -> bool {
        let size = 1usize << self.n;
        (0..self.n).all(|j| {
            let m = 1usize << j;
            (0..size).all(|x| {
                (0..size).all(|y| {
                    let base = self.at(x & !m, y);
                    let ok_x = base <= self.at(x | m, y);
                    let base_y = self.at(x, y & !m);
                    ok_x && base_y <= self.at(x, y | m)
                })
            })
        })
    }

    pub fn is_decreasing(&self) -> bool {
        self.map(|x, y| -self.at(x, y)).is_increasing()
    }

    pub fn is_nonnegative(&self) -> bool {
        let size = 1usize << self.n;
        (0..size).all(|x| (0..size).all(|y| !self.at(x, y).is_negative()))
    }
}

pub(crate) fn d_op_at(f: &BiFunction, m: usize, x: usize, y: usize) -> Q {
    let (xu, xd, yu, yd) = (x | m, x & !m, y | m, y & !m);
    let base = f.at(xd, yd);
    (f.at(xu, yd) - &base) * (f.at(xd, yu) - base)
}

/// ∇_ii F(x, y) = F(x^i, y^i) + F(x_i, y_i) − F(x^i, y_i) − F(x_i, y^i).
pub fn grad2(f: &BiFunction, i: usize, x: BitConfig, y: BitConfig) -> Result<Q> {
    f.check_index(i)?;
    let (xu, xd) = (x.raised(i)?, x.lowered(i)?);
    let (yu, yd) = (y.raised(i)?, y.lowered(i)?);
    Ok(f.value(xu, yu)? + f.value(xd, yd)? - f.value(xu, yd)? - f.value(xd, yu)?)
}

/// D_i F(x, y) = [F(x^i, y_i) − F(x_i, y_i)] · [F(x_i, y^i) − F(x_i, y_i)].
pub fn d_op(f: &BiFunction, i: usize, x: BitConfig, y: BitConfig) -> Result<Q> {
    f.check_index(i)?;
    if x.n() != f.n || y.n() != f.n {
        return Err(Error::DimensionMismatch { expected: f.n, got: x.n().max(y.n()) });
    }
    Ok(d_op_at(f, 1 << (i - 1), x.index(), y.index()))
}
