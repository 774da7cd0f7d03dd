//! Witnesses, generalised disjoint occurrence, and the Reimer family of checks.

use num_traits::{One, Signed, Zero};

use crate::cube::{q, qr, BiFunction, BitConfig, CubeEvent, MAX_BI_DIM, Q};
use crate::error::{Error, Result};
use crate::noise::{joint_bernstein, ratio_ln, Bernstein};
use crate::quad;

/// Largest dimension accepted by the disjoint-occurrence search.
pub const MAX_WITNESS_DIM: usize = 12;

fn support_mask(n: usize, support: &[usize]) -> Result<usize> {
    support.iter().try_fold(0usize, |acc, &i| {
        if i == 0 || i > n {
            Err(Error::IndexOutOfRange { index: i, n })
        } else {
            Ok(acc | 1 << (i - 1))
        }
    })
}

fn is_witness_mask(x: usize, support: usize, n: usize, a: &CubeEvent) -> bool {
    let free = !support & ((1usize << n) - 1);
    let fixed = x & support;
    // Enumerate all subsets of the free coordinates.
    let mut sub = free;
    loop {
        if !a.contains_index(fixed | sub) {
            return false;
        }
        if sub == 0 {
            return true;
        }
        sub = (sub - 1) & free;
    }
}

/// Every y agreeing with x on `support` lies in A.
pub fn is_witness(x: BitConfig, support: &[usize], a: &CubeEvent) -> Result<bool> {
    if x.n() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: x.n() });
    }
    let mask = support_mask(a.n(), support)?;
    Ok(is_witness_mask(x.index(), mask, a.n(), a))
}

fn check_pair(a: &CubeEvent, b: &CubeEvent) -> Result<usize> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: b.n() });
    }
    if a.n() > MAX_WITNESS_DIM {
        return Err(Error::DimensionCap { n: a.n(), cap: MAX_WITNESS_DIM });
    }
    Ok(a.n())
}

/// (A, B) occurs disjointly on (x, y): some I makes (x, I) a witness for A and
/// (y, [n]∖I) a witness for B.
pub fn occurs_disjointly(a: &CubeEvent, b: &CubeEvent, x: BitConfig, y: BitConfig) -> Result<bool> {
    let n = check_pair(a, b)?;
    if x.n() != n || y.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.n().max(y.n()) });
    }
    let full = (1usize << n) - 1;
    Ok((0..=full).any(|i| is_witness_mask(x.index(), i, n, a) && is_witness_mask(y.index(), full & !i, n, b)))
}

/// Bit-parallel table of W(I, x) = "(x, I) is a witness", one bitset over x per support I.
pub struct WitnessTable {
    words: usize,
    rows: Vec<Vec<u64>>,
}

const LOW_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

impl WitnessTable {
    pub fn new(a: &CubeEvent) -> Result<Self> {
        let n = a.n();
        if n > MAX_WITNESS_DIM {
            return Err(Error::DimensionCap { n, cap: MAX_WITNESS_DIM });
        }
        let size = 1usize << n;
        let words = size.div_ceil(64);
        let full = size - 1;
        let mut rows = vec![vec![0u64; words]; size];
        for x in 0..size {
            if a.contains_index(x) {
                rows[full][x / 64] |= 1 << (x % 64);
            }
        }
        for support in (0..full).rev() {
            let j = (!support).trailing_zeros() as usize;
            let parent = &rows[support | 1 << j];
            let flipped = flip_bitset(parent, j, size);
            rows[support] = parent.iter().zip(&flipped).map(|(p, f)| p & f).collect();
        }
        Ok(WitnessTable { words, rows })
    }

    pub fn get(&self, x: usize, support: usize) -> bool {
        self.rows[support][x / 64] >> (x % 64) & 1 == 1
    }

    fn row(&self, support: usize) -> &[u64] {
        &self.rows[support]
    }
}

/// Bitset over x ↦ bitset over x ⊕ e_j.
fn flip_bitset(src: &[u64], j: usize, size: usize) -> Vec<u64> {
    if j < 6 {
        let s = 1u32 << j;
        let m = LOW_MASKS[j];
        let valid = if size < 64 { (1u64 << size) - 1 } else { u64::MAX };
        src.iter().map(|&w| (((w >> s) & m) | ((w & m) << s)) & valid).collect()
    } else {
        let stride = 1usize << (j - 6);
        (0..src.len()).map(|k| src[k ^ stride]).collect()
    }
}

/// A∘B as an event.
pub fn box_event(a: &CubeEvent, b: &CubeEvent) -> Result<CubeEvent> {
    let n = check_pair(a, b)?;
    let (wa, wb) = (WitnessTable::new(a)?, WitnessTable::new(b)?);
    let full = (1usize << n) - 1;
    let mut acc = vec![0u64; wa.words];
    for i in 0..=full {
        for (k, w) in acc.iter_mut().enumerate() {
            *w |= wa.row(i)[k] & wb.row(full & !i)[k];
        }
    }
    CubeEvent::from_fn(n, |x| acc[x.index() / 64] >> (x.index() % 64) & 1 == 1)
}

/// Row bitsets of the disjoint-occurrence indicator: bit y of row x is F(x, y).
fn indicator_rows(a: &CubeEvent, b: &CubeEvent) -> Result<(usize, Vec<Vec<u64>>)> {
    let n = check_pair(a, b)?;
    let (wa, wb) = (WitnessTable::new(a)?, WitnessTable::new(b)?);
    let size = 1usize << n;
    let full = size - 1;
    let mut rows = vec![vec![0u64; wa.words]; size];
    for i in 0..=full {
        let yb = wb.row(full & !i);
        if yb.iter().all(|w| *w == 0) {
            continue;
        }
        for (x, row) in rows.iter_mut().enumerate() {
            if wa.get(x, i) {
                for (r, y) in row.iter_mut().zip(yb) {
                    *r |= y;
                }
            }
        }
    }
    Ok((n, rows))
}

/// F(x, y) = 1{(A, B) occurs disjointly on (x, y)}.
pub fn disjoint_occurrence_indicator(a: &CubeEvent, b: &CubeEvent) -> Result<BiFunction> {
    if a.n() > MAX_BI_DIM {
        return Err(Error::DimensionCap { n: a.n(), cap: MAX_BI_DIM });
    }
    let (n, rows) = indicator_rows(a, b)?;
    BiFunction::from_fn(n, |x, y| {
        let bit = rows[x.index()][y.index() / 64] >> (y.index() % 64) & 1;
        q(bit as i64)
    })
}

fn require_increasing(a: &CubeEvent, b: &CubeEvent) -> Result<()> {
    if !a.is_increasing() {
        return Err(Error::Precondition("A is not increasing".into()));
    }
    if !b.is_increasing() {
        return Err(Error::Precondition("B is not increasing".into()));
    }
    Ok(())
}

/// A ∩ B̄ where B̄ = {x̄ : x ∈ B}.
pub fn and_dual(a: &CubeEvent, b: &CubeEvent) -> Result<CubeEvent> {
    a.intersection(&b.complement_image())
}

/// (A, B) occurs disjointly on (x, x̄) ⟺ x ∈ A ∩ B̄, for increasing A, B.
pub fn check_lemma2(a: &CubeEvent, b: &CubeEvent) -> Result<bool> {
    check_pair(a, b)?;
    require_increasing(a, b)?;
    let n = a.n();
    let (wa, wb) = (WitnessTable::new(a)?, WitnessTable::new(b)?);
    let full = (1usize << n) - 1;
    let target = and_dual(a, b)?;
    Ok((0..=full).all(|x| {
        let xbar = full & !x;
        let occurs = (0..=full).any(|i| wa.get(x, i) && wb.get(xbar, full & !i));
        occurs == target.contains_index(x)
    }))
}

/// P[A∘B] ≤ P[A ∩ B̄], for arbitrary events.
pub fn check_reimer(a: &CubeEvent, b: &CubeEvent) -> Result<bool> {
    Ok(box_event(a, b)?.probability() <= and_dual(a, b)?.probability())
}

/// Outcome of the quantitative Reimer check.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop2Report {
    /// −∇_ii F = D_i F at every (i, x, y).
    pub pointwise_identity: bool,
    /// ψ(0) = P[A∘B].
    pub endpoint_zero: bool,
    /// ψ(1) = P[A ∩ B̄].
    pub endpoint_one: bool,
    /// ψ′ = ½ Σ_i E[D_i F(ω, ω_t)] coefficientwise.
    pub ode: bool,
    /// D_i F ≥ 0 everywhere, ψ(0) ≤ ψ(1), and the quadrature of J is non-negative.
    pub j_nonnegative: bool,
    pub p_box: Q,
    pub p_and_dual: Q,
    /// log(P[A ∩ B̄] / P[A∘B]).
    pub j_exact: f64,
    pub j_integral: f64,
    pub quad_error: f64,
    pub tol: f64,
}

impl Prop2Report {
    pub fn exact_ok(&self) -> bool {
        self.pointwise_identity && self.endpoint_zero && self.endpoint_one && self.ode && self.j_nonnegative
    }

    pub fn quad_ok(&self) -> bool {
        self.quad_error <= self.tol
    }

    pub fn passed(&self) -> bool {
        self.exact_ok() && self.quad_ok()
    }
}

/// Quantitative Reimer: P[A∘B] = P[A ∩ B̄] e^{−J}.
pub fn check_prop2(a: &CubeEvent, b: &CubeEvent, quad_points: usize, tol: f64) -> Result<Prop2Report> {
    check_prop2_with(a, b, quad_points, tol, false)
}

/// `flip_d_sign` negates D_i F throughout; used to confirm the checks can fail.
pub(crate) fn check_prop2_with(
    a: &CubeEvent,
    b: &CubeEvent,
    quad_points: usize,
    tol: f64,
    flip_d_sign: bool,
) -> Result<Prop2Report> {
    check_pair(a, b)?;
    require_increasing(a, b)?;
    let f = disjoint_occurrence_indicator(a, b)?;
    let n = f.n();
    let p_box = box_event(a, b)?.probability();
    if !p_box.is_positive() {
        return Err(Error::Precondition("P[A∘B] must be positive".into()));
    }
    let p_and_dual = and_dual(a, b)?.probability();

    let mut pointwise_identity = true;
    let mut d_nonneg = true;
    let mut d_sum: Option<Bernstein> = None;
    for i in 1..=n {
        let g2 = f.grad2_function(i)?;
        let d = f.d_op_function(i)?;
        let d = if flip_d_sign { d.map(|x, y| -d.at(x, y)) } else { d };
        let size = 1usize << n;
        for x in 0..size {
            for y in 0..size {
                let dv = d.at(x, y);
                if -g2.at(x, y) != dv {
                    pointwise_identity = false;
                }
                if dv.is_negative() {
                    d_nonneg = false;
                }
            }
        }
        let bd = joint_bernstein(&d)?;
        d_sum = Some(match d_sum {
            Some(acc) => acc.add(&bd),
            None => bd,
        });
    }
    let half_d = d_sum.expect("n ≥ 1").scale(&qr(1, 2));

    let psi_b = joint_bernstein(&f)?;
    let psi = psi_b.to_poly();
    let endpoint_zero = psi.eval(&Q::zero()) == p_box;
    let endpoint_one = psi.eval(&Q::one()) == p_and_dual;
    let ode = psi.derivative() == half_d.to_poly();

    let num = half_d.to_f64();
    let den = psi_b.to_f64();
    for k in 0..=128 {
        if den.eval(k as f64 / 128.0) <= 0.0 {
            return Err(Error::SingularIntegrand("ψ vanishes on [0, 1]".into()));
        }
    }
    let res = quad::integrate(|t| num.eval(t) / den.eval(t), 0.0, 1.0, quad_points, tol)?;
    let j_exact = ratio_ln(&p_and_dual, &p_box);
    let j_nonnegative = d_nonneg && p_box <= p_and_dual && res.value >= -tol;
    Ok(Prop2Report {
        pointwise_identity,
        endpoint_zero,
        endpoint_one,
        ode,
        j_nonnegative,
        p_box,
        p_and_dual,
        j_exact,
        j_integral: res.value,
        quad_error: (res.value - j_exact).abs(),
        tol,
    })
}

fn psi_at_half(a: &CubeEvent, b: &CubeEvent) -> Result<Q> {
    let f = disjoint_occurrence_indicator(a, b)?;
    Ok(joint_bernstein(&f)?.to_poly().eval(&qr(1, 2)))
}

/// ψ(0) ≤ ψ(1/2) ≤ P[A]P[B] for increasing A, B.
pub fn check_strong_bk(a: &CubeEvent, b: &CubeEvent) -> Result<bool> {
    check_pair(a, b)?;
    require_increasing(a, b)?;
    let half = psi_at_half(a, b)?;
    let p_box = box_event(a, b)?.probability();
    Ok(p_box <= half && half <= a.probability() * b.probability())
}

/// ψ(1/2) ≤ P[A ∩ B̄] for arbitrary events.
pub fn check_dual_reimer(a: &CubeEvent, b: &CubeEvent) -> Result<bool> {
    check_pair(a, b)?;
    Ok(psi_at_half(a, b)? <= and_dual(a, b)?.probability())
}
