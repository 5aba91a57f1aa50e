//! Event-engine completion times for the variant catalog, engine-vs-formula
//! cross-validation, and schedule-structure checks.

use qrelay_core::optimize::{objective, OptFamily};
use qrelay_core::rational::{parse_rat, rat, Rat};
use qrelay_core::timeline::{critical_path, EventKind, LineTopology};
use qrelay_core::variants::{
    build_schedule, build_schedule_with, relay_unitary_schedule, schedule_formula_p32, CostParams,
    ProtocolVariant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn time_of(spec: &str) -> Rat {
    let v = ProtocolVariant::parse(spec).unwrap();
    let (s, _) = build_schedule(&v).unwrap();
    s.completion
}

#[test]
fn catalog_times_match_the_analysis() {
    let cases = [
        ("P1", "3"),
        ("P1.1", "3/2"),
        ("P1.2(1/5,3/5)", "7/5"),
        ("P1.3(1/6,1/2,5/6)", "7/6"),
        ("P2", "3"),
        ("P2.1(1/2)", "5/2"),
        ("P2.2(1/7,3/7)", "15/7"),
        ("P3", "3"),
        ("P3.1(1/2)", "3/2"),
        ("P3.2(1/3,2/3)", "5/3"),
        ("P3.2(1/5,3/5)", "7/5"),
        ("P3.3(1/6,1/2,5/6)", "7/6"),
        ("P4", "3"),
        ("P4.1(1/2)", "5/2"),
        ("P4.2(1/7,3/7)", "15/7"),
        ("P5", "3"),
        ("P5.1", "3/2"),
        ("P5.2(1/3,2/3)", "4/3"),
        ("P5.3", "7/6"),
        ("P6.2(1/3,2/3)", "4/3"),
        ("P7", "3"),
        ("P7.2(1/3,2/3)", "4/3"),
        ("P8", "3"),
        ("P8.1(1/2)", "3/2"),
        ("P8.2(1/5,3/5)", "7/5"),
        ("P8.3(1/6,1/2,5/6)", "7/6"),
        ("P9", "2"),
        ("P9(1/2)", "1"),
    ];
    for (spec, want) in cases {
        assert_eq!(time_of(spec), parse_rat(want).unwrap(), "{spec}");
    }
}

#[test]
fn p32_engine_equals_formula_on_random_positions() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..1000 {
        let d: i64 = rng.gen_range(7..300);
        let a: i64 = rng.gen_range(1..d - 1);
        let b: i64 = rng.gen_range(a + 1..d);
        let (x1, x2) = (rat(a, d), rat(b, d));
        let v = ProtocolVariant::parse(&format!("P3.2({a}/{d},{b}/{d})")).unwrap();
        let (s, _) = build_schedule(&v).unwrap();
        assert_eq!(
            s.completion,
            schedule_formula_p32(x1, x2).unwrap(),
            "positions {a}/{d}, {b}/{d}"
        );
    }
}

/// The three case regions of the two-repeater controlled-unitary analysis.
#[test]
fn p22_piecewise_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut counts = [0usize; 3];
    while counts.iter().any(|&c| c < 100) {
        let d: i64 = rng.gen_range(7..400);
        let a: i64 = rng.gen_range(1..d - 1);
        let b: i64 = rng.gen_range(a + 1..d);
        let (x1, x2) = (rat(a, d), rat(b, d));
        let three = rat(3, 1);
        let engine = {
            let v = ProtocolVariant::parse(&format!("P2.2({a}/{d},{b}/{d})")).unwrap();
            build_schedule(&v).unwrap().0.completion
        };
        let one = rat(1, 1);
        let two = rat(2, 1);
        if x2 <= three * x1 && x1 + two * x2 >= one {
            assert_eq!(engine, two + x1, "region 1 at {x1},{x2}");
            counts[0] += 1;
        } else if x2 <= three * x1 {
            assert_eq!(engine, three - two * x2, "region 2 at {x1},{x2}");
            counts[1] += 1;
        } else {
            // x2 > 3 x1: two sub-cases.
            let want = if two * (x2 - x1) < one - x2 {
                three - two * x2
            } else {
                two + x2 - two * x1
            };
            assert_eq!(engine, want, "region 3 at {x1},{x2}");
            counts[2] += 1;
        }
    }
}

/// The optimizer's hand-derived piece lists agree with the engine.
#[test]
fn optimizer_pieces_match_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let fams: [(OptFamily, &str); 4] = [
        (OptFamily::P3_2, "P3.2"),
        (OptFamily::P1_2, "P1.2"),
        (OptFamily::P2_2, "P2.2"),
        (OptFamily::P5_2, "P5.2"),
    ];
    for _ in 0..200 {
        let d: i64 = rng.gen_range(7..200);
        let a: i64 = rng.gen_range(1..d - 1);
        let b: i64 = rng.gen_range(a + 1..d);
        for (fam, name) in fams {
            let v = ProtocolVariant::parse(&format!("{name}({a}/{d},{b}/{d})")).unwrap();
            let engine = build_schedule(&v).unwrap().0.completion;
            let pieces = objective(fam, &[rat(a, d), rat(b, d)]);
            assert_eq!(engine, pieces, "{name} at {a}/{d},{b}/{d}");
        }
    }
    // Three-parameter relay family.
    for _ in 0..100 {
        let d: i64 = rng.gen_range(9..200);
        let mut picks: Vec<i64> = (1..d).collect();
        // choose three distinct ordered positions
        for i in (1..picks.len()).rev() {
            let j = rng.gen_range(0..=i);
            picks.swap(i, j);
        }
        let mut xs: Vec<i64> = picks[..3].to_vec();
        xs.sort_unstable();
        let v = ProtocolVariant::parse(&format!("P1.3({}/{d},{}/{d},{}/{d})", xs[0], xs[1], xs[2]))
            .unwrap();
        let engine = build_schedule(&v).unwrap().0.completion;
        let pieces = objective(
            OptFamily::P1_3Style,
            &[rat(xs[0], d), rat(xs[1], d), rat(xs[2], d)],
        );
        assert_eq!(engine, pieces, "P1.3 at {xs:?}/{d}");
    }
}

#[test]
fn critical_paths() {
    // P1: photon leg, merged confirm + forward teleport, teleport back.
    let (s, _) = build_schedule(&ProtocolVariant::parse("P1").unwrap()).unwrap();
    let path = critical_path(&s);
    assert_eq!(path.len(), 3);
    let kinds: Vec<EventKind> = path.iter().map(|&id| s.events[id].event.kind).collect();
    assert_eq!(kinds[0], EventKind::PhotonTransit);
    assert_eq!(kinds[1], EventKind::ClassicalMessage);
    assert_eq!(kinds[2], EventKind::ClassicalMessage);

    // P1.1: three legs of 1/2 each.
    let (s, _) = build_schedule(&ProtocolVariant::parse("P1.1").unwrap()).unwrap();
    let path = critical_path(&s);
    assert_eq!(path.len(), 3);
    for &id in &path {
        assert_eq!(s.events[id].event.duration, rat(1, 2));
    }
}

/// Shrinking any inter-node gap never increases the completion time; checked
/// through the scale homogeneity of the engine.
#[test]
fn gap_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let specs = ["P1.2", "P3.2", "P2.2", "P5.2", "P7.2", "P8.2"];
    for _ in 0..60 {
        let d: i64 = rng.gen_range(10..60);
        let a: i64 = rng.gen_range(1..d - 1);
        let b: i64 = rng.gen_range(a + 1..d);
        // Gaps of the 3-link chain in units of 1/d.
        let gaps = [a, b - a, d - b];
        for spec in specs {
            let t_abs = |gaps: [i64; 3]| -> Rat {
                let total: i64 = gaps.iter().sum();
                let x1 = rat(gaps[0], total);
                let x2 = rat(gaps[0] + gaps[1], total);
                let v = ProtocolVariant::new(
                    qrelay_core::variants::Family::parse(spec).unwrap(),
                    vec![x1, x2],
                )
                .unwrap();
                let (s, _) = build_schedule(&v).unwrap();
                s.completion * rat(total, 1)
            };
            let base = t_abs(gaps);
            for i in 0..3 {
                let mut shrunk = gaps;
                shrunk[i] = (shrunk[i] + 1) / 2;
                assert!(
                    t_abs(shrunk) <= base,
                    "{spec}: shrinking gap {i} of {gaps:?} increased time"
                );
            }
        }
    }
}

#[test]
fn cost_report_catalog() {
    // P1 at d_a = 2: 2 ebits, 4 c-bits.
    let v = ProtocolVariant::parse("P1").unwrap();
    let (_, cost) = build_schedule(&v).unwrap();
    assert!((cost.ebits - 2.0).abs() < 1e-12);
    assert!((cost.cbits - 4.0).abs() < 1e-12);

    // P2 with N = 2: one ebit, two c-bits.
    let v = ProtocolVariant::parse("P2").unwrap();
    let (_, cost) = build_schedule(&v).unwrap();
    assert!((cost.ebits - 1.0).abs() < 1e-12);
    assert!((cost.cbits - 2.0).abs() < 1e-12);

    // P3 over the full 16-element pairing versus P4 on the same unitary.
    let params = CostParams::default();
    let v3 = ProtocolVariant::parse("P3").unwrap();
    let (_, c3) = build_schedule_with(&v3, &params).unwrap();
    assert!((c3.ebits - 4.0).abs() < 1e-12);
    let v4 = ProtocolVariant::parse("P4").unwrap();
    let (_, c4) = build_schedule_with(&v4, &params).unwrap();
    assert!((c4.ebits - 2.0).abs() < 1e-12);
    assert!((c4.cbits - 2.0 * c4.ebits).abs() < 1e-12);

    // P8: one ebit, two c-bits (not the doubled identity).
    let v = ProtocolVariant::parse("P8").unwrap();
    let (_, cost) = build_schedule(&v).unwrap();
    assert!((cost.ebits - 1.0).abs() < 1e-12);
    assert!((cost.cbits - 2.0).abs() < 1e-12);
}

#[test]
fn no_event_precedes_zero_and_speed_of_light_holds() {
    // validate_against runs inside build_schedule; spot-check a few variants
    // with random positions again here.
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    for _ in 0..50 {
        let d: i64 = rng.gen_range(7..100);
        let a: i64 = rng.gen_range(1..d - 1);
        let b: i64 = rng.gen_range(a + 1..d);
        for spec in ["P1.2", "P3.2", "P5.2", "P7.2", "P8.2", "P2.2"] {
            let v = ProtocolVariant::parse(&format!("{spec}({a}/{d},{b}/{d})")).unwrap();
            let (s, _) = build_schedule(&v).unwrap();
            let topo = v.topology().unwrap();
            s.validate_against(&topo).unwrap();
        }
    }
}

#[test]
fn relay_engine_handles_arbitrary_chains() {
    // An asymmetric 3-repeater chain with the unitary at node 2: the A-side
    // chain arrives at 3/5, the B-side (via the relay at 4/5) at 4/5, and the
    // longer return leg spans 3/5.
    let topo = LineTopology::with_repeaters(&[rat(1, 10), rat(2, 5), rat(4, 5)]).unwrap();
    let s = relay_unitary_schedule(&topo, 2);
    assert_eq!(s.completion, rat(7, 5));
}
