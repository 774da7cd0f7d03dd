use armgap::cube::BitConfig;
use armgap::experiments::{MultiCounts, Outcome};
use armgap::lattice::{Lattice, Rect, Region};
use armgap::noise::joint_poly;
use armgap::perco::{apply_noise, sample, ArmSpec, Colour, Direction, Monotonicity, PercoConfig, RngStream, Workspace};
use armgap::stats::{ols, wilson};
use armgap::{BiFunction, Q};
use num_bigint::BigInt;
use proptest::prelude::*;
use std::sync::OnceLock;

fn lattice() -> &'static Lattice {
    static L: OnceLock<Lattice> = OnceLock::new();
    L.get_or_init(|| Lattice::with_unit_pitch(6).unwrap())
}

fn specs() -> Vec<ArmSpec> {
    let rect = Rect::ints(-3, 4, -2, 2).unwrap();
    vec![
        ArmSpec::OneArm { colour: Colour::Black, n: 5 },
        ArmSpec::OneArm { colour: Colour::White, n: 3 },
        ArmSpec::TwoArmPoly { n: 4 },
        ArmSpec::FourArm { k: 0, n: 4 },
        ArmSpec::FourArm { k: 1, n: 6 },
        ArmSpec::Crossing { rect: rect.clone(), dir: Direction::LeftRight, colour: Colour::Black },
        ArmSpec::Crossing { rect, dir: Direction::BottomTop, colour: Colour::White },
        ArmSpec::Circuit { annulus: Region::annulus(1, 4).unwrap(), colour: Colour::Black },
        ArmSpec::DisjointTwoBlack { n: 4 },
    ]
}

fn config(seed: u64, stream: u64) -> PercoConfig {
    sample(lattice(), &mut RngStream::new(seed, stream).rng())
}

fn counts(outcomes: &[(u8, bool, u8)]) -> MultiCounts {
    let mut m = MultiCounts::new(&["a", "b", "c"], 0);
    for &(bits, unknown, value) in outcomes {
        m.push(Outcome { bits: (bits & 7) as u64, unknown, value: value as u64 });
    }
    m
}

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), stream in any::<u64>()) {
        prop_assert_eq!(config(seed, stream), config(seed, stream));
    }

    #[test]
    fn colour_swap_matches_complement(seed in 0u64..1000, stream in 0u64..1000) {
        let c = config(seed, stream);
        let cc = c.complement();
        let mut ws = Workspace::new();
        for spec in specs() {
            if let Some(sw) = spec.colour_swapped() {
                let a = spec.compile(lattice()).unwrap().eval(&c, &mut ws);
                let b = sw.compile(lattice()).unwrap().eval(&cc, &mut ws);
                prop_assert_eq!(a, b, "{:?}", spec);
            }
        }
    }

    #[test]
    fn monotone_events_respect_flips(seed in 0u64..1000, stream in 0u64..1000, pick in any::<prop::sample::Index>()) {
        let c = config(seed, stream);
        let h = pick.index(lattice().len()) as u32;
        let (lo, hi) = (c.with(h, false), c.with(h, true));
        let mut ws = Workspace::new();
        for spec in specs() {
            let det = spec.compile(lattice()).unwrap();
            let (a, b) = (det.eval(&lo, &mut ws), det.eval(&hi, &mut ws));
            match spec.monotonicity() {
                Monotonicity::Increasing => prop_assert!(!a || b, "{:?}", spec),
                Monotonicity::Decreasing => prop_assert!(a || !b, "{:?}", spec),
                Monotonicity::Neither => {}
            }
        }
    }

    #[test]
    fn events_ignore_faces_outside_support(seed in 0u64..1000, stream in 0u64..1000, pick in any::<prop::sample::Index>()) {
        let c = config(seed, stream);
        let h = pick.index(lattice().len()) as u32;
        let mut ws = Workspace::new();
        for spec in specs() {
            let det = spec.compile(lattice()).unwrap();
            if !det.support().contains(h) {
                let mut d = c.clone();
                d.flip(h);
                prop_assert_eq!(det.eval(&c, &mut ws), det.eval(&d, &mut ws), "{:?}", spec);
            }
        }
    }

    #[test]
    fn zero_noise_is_identity_and_full_noise_is_fresh(seed in any::<u64>()) {
        let c = config(seed, 0);
        let mut rng = RngStream::new(seed, 1).rng();
        prop_assert_eq!(apply_noise(&c, 0.0, &mut rng).unwrap(), c.clone());
        prop_assert!(apply_noise(&c, 1.5, &mut rng).is_err());
    }

    #[test]
    fn merge_is_associative_and_commutative(
        a in prop::collection::vec((any::<u8>(), any::<bool>(), any::<u8>()), 0..40),
        b in prop::collection::vec((any::<u8>(), any::<bool>(), any::<u8>()), 0..40),
        c in prop::collection::vec((any::<u8>(), any::<bool>(), any::<u8>()), 0..40),
    ) {
        let (ma, mb, mc) = (counts(&a), counts(&b), counts(&c));
        let mut left = ma.clone();
        left.merge(&mb);
        left.merge(&mc);
        let mut bc = mb.clone();
        bc.merge(&mc);
        let mut right = ma.clone();
        right.merge(&bc);
        prop_assert_eq!(&left, &right);
        let mut swapped = mb.clone();
        swapped.merge(&ma);
        let mut ab = ma.clone();
        ab.merge(&mb);
        prop_assert_eq!(&ab, &swapped);
        let all: Vec<_> = a.iter().chain(&b).chain(&c).copied().collect();
        prop_assert_eq!(&left, &counts(&all));
    }

    #[test]
    fn joint_poly_is_symmetric_in_its_arguments(n in 1usize..4, table in prop::collection::vec(-5i64..6, 64)) {
        let size = 1usize << n;
        let f = BiFunction::from_fn(n, |x, y| q(table[(x.index() * size + y.index()) % 64])).unwrap();
        let g = BiFunction::from_fn(n, |x, y| f.value(y, x).unwrap()).unwrap();
        prop_assert_eq!(joint_poly(&f).unwrap(), joint_poly(&g).unwrap());
        // t = 0 reads the diagonal, t = 1 the antidiagonal, t = 1/2 decouples.
        let p = joint_poly(&f).unwrap();
        let diag: Q = BitConfig::all(n).map(|x| f.value(x, x).unwrap()).sum::<Q>() / q(size as i64);
        prop_assert_eq!(p.eval(&q(0)), diag);
        let total: Q = BitConfig::all(n).flat_map(|x| BitConfig::all(n).map(move |y| (x, y))).map(|(x, y)| f.value(x, y).unwrap()).sum::<Q>();
        prop_assert_eq!(p.eval(&(q(1) / q(2))), total / q((size * size) as i64));
        let anti: Q = BitConfig::all(n).map(|x| f.value(x, x.complement()).unwrap()).sum::<Q>() / q(size as i64);
        prop_assert_eq!(p.eval(&q(1)), anti);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(samples in 1u64..100_000, frac in 0.0f64..=1.0) {
        let s = (samples as f64 * frac) as u64;
        let (lo, hi) = wilson(s, samples);
        let p = s as f64 / samples as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn ols_recovers_exact_lines(slope in -3.0f64..3.0, intercept in -5.0f64..5.0, m in 3usize..10) {
        let pts: Vec<(f64, f64)> = (0..m).map(|i| (i as f64, intercept + slope * i as f64)).collect();
        let fit = ols(&pts, None).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9 && (fit.intercept - intercept).abs() < 1e-9);
    }

    #[test]
    fn point_reflection_preserves_hex_counts(x0 in -5i64..0, w in 1i64..5, y0 in -5i64..0, h in 1i64..5) {
        let r = Rect::ints(x0, (x0 + w).min(6), y0, (y0 + h).min(6)).unwrap();
        let a = lattice().hexes_meeting(&Region::Rect(r.clone())).unwrap().count();
        let b = lattice().hexes_meeting(&Region::Rect(r.negate())).unwrap().count();
        prop_assert_eq!(a, b);
    }
}
