//! Closed-form time bounds, the optimal unambiguous-transmission schemes, and
//! the many-node placement constructions, each cross-checked against the
//! event engine.

use crate::error::{Error, Result};
use crate::rational::{rat, Rat};
use crate::timeline::LineTopology;
use crate::variants::{relay_unitary_schedule, transmission_schedule, Family, ProtocolVariant};

/// Which quantity a bound record concerns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundQuantity {
    /// Minimum total time to send information unambiguously one way.
    Transmission,
    /// Minimum total time for unambiguous implementation of a bipartite unitary.
    Implementation,
}

#[derive(Clone, Debug)]
pub struct BoundRecord {
    pub quantity: BoundQuantity,
    pub k: usize,
    pub lower: Rat,
    pub upper: Rat,
    pub achieving_variant: Option<ProtocolVariant>,
    /// False for values extended beyond the proven range.
    pub proved: bool,
}

/// Minimum one-way unambiguous transmission time with `n` intermediate nodes:
/// `2^{n+1} / (2^{n+1} - 1)`. Proved for n <= 3; pass `conjectured` to extend.
pub fn ts_bound(n: usize, conjectured: bool) -> Result<Rat> {
    if n > 3 && !conjectured {
        return Err(Error::Unsupported(format!(
            "transmission bound is proved only for n <= 3; n = {n} needs the conjectured flag"
        )));
    }
    if n >= 62 {
        return Err(Error::InvalidDimension("n too large for exact arithmetic".into()));
    }
    let p = 1i64 << (n + 1);
    Ok(rat(p, p - 1))
}

/// Optimal relay positions for unambiguous transmission at n <= 3.
pub fn ts_scheme_positions(n: usize) -> Result<Vec<Rat>> {
    Ok(match n {
        0 => vec![],
        1 => vec![rat(1, 3)],
        2 => vec![rat(1, 7), rat(3, 7)],
        3 => vec![rat(1, 15), rat(1, 5), rat(7, 15)],
        _ => {
            return Err(Error::Unsupported(format!(
                "transmission scheme is stated only for n <= 3, got {n}"
            )))
        }
    })
}

/// The transmission scheme: positions plus the engine-confirmed time, which
/// must equal `ts_bound(n)` exactly.
pub fn ts_scheme(n: usize) -> Result<(Vec<Rat>, Rat)> {
    let positions = ts_scheme_positions(n)?;
    let topo = LineTopology::with_repeaters(&positions)?;
    let schedule = transmission_schedule(&topo);
    let want = ts_bound(n, false)?;
    if schedule.completion != want {
        return Err(Error::ConventionFailure {
            stage: "ts_scheme".into(),
            detail: format!(
                "engine time {} differs from bound {}",
                crate::rational::fmt_rat(schedule.completion),
                crate::rational::fmt_rat(want)
            ),
        });
    }
    Ok((positions, schedule.completion))
}

/// Bounds on the total time for unambiguous implementation of an arbitrary
/// bipartite unitary with K repeater nodes; upper bounds are engine-confirmed.
pub fn theorem_bounds(k: usize) -> Result<BoundRecord> {
    let (lower, upper, variant) = match k {
        0 => (rat(2, 1), rat(3, 1), ProtocolVariant::new(Family::P1, vec![])?),
        1 => (
            rat(3, 2),
            rat(3, 2),
            ProtocolVariant::new(Family::P1_1, vec![rat(1, 2)])?,
        ),
        2 => (
            rat(5, 4),
            rat(7, 5),
            ProtocolVariant::new(Family::P1_2, vec![rat(1, 5), rat(3, 5)])?,
        ),
        3 => (
            rat(7, 6),
            rat(7, 6),
            ProtocolVariant::new(Family::P1_3, vec![rat(1, 6), rat(1, 2), rat(5, 6)])?,
        ),
        _ => {
            return Err(Error::Unsupported(format!(
                "implementation bounds are stated only for K <= 3, got {k}"
            )))
        }
    };
    let (schedule, _) = crate::variants::build_schedule(&variant)?;
    if schedule.completion != upper {
        return Err(Error::ConventionFailure {
            stage: "theorem_bounds".into(),
            detail: format!(
                "achieving variant {} runs in {}, expected {}",
                variant.id(),
                crate::rational::fmt_rat(schedule.completion),
                crate::rational::fmt_rat(upper)
            ),
        });
    }
    Ok(BoundRecord {
        quantity: BoundQuantity::Implementation,
        k,
        lower,
        upper,
        achieving_variant: Some(variant),
        proved: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Geometric repeater placement for `2k+1` (odd) or `2k` (even) nodes, with
/// the closed-form total time.
pub fn many_nodes(k: usize, parity: Parity) -> Result<(Vec<Rat>, Rat)> {
    if k >= 58 {
        return Err(Error::InvalidDimension("k too large for exact arithmetic".into()));
    }
    match parity {
        Parity::Odd => {
            // 2k+1 nodes: gaps x, 2x, ..., 2^k x to the middle, mirrored.
            let x = rat(1, 2 * ((1i64 << (k + 1)) - 1));
            let mut pos = Vec::new();
            for i in 0..=k {
                pos.push(rat((1i64 << (i + 1)) - 1, 1) * x);
            }
            for i in (0..k).rev() {
                pos.push(rat(1, 1) - rat((1i64 << (i + 1)) - 1, 1) * x);
            }
            let time = rat(1, 1) + x;
            Ok((pos, time))
        }
        Parity::Even => {
            if k == 0 {
                return Ok((vec![], rat(3, 1)));
            }
            // 2k nodes: gaps x, 2x, ..., 2^k x from A; y, 2y, ..., 2^{k-1} y
            // from B with y = 2x and x = 1/(2^{k+2} - 3).
            let x = rat(1, (1i64 << (k + 2)) - 3);
            let mut pos = Vec::new();
            for i in 0..=k {
                pos.push(rat((1i64 << (i + 1)) - 1, 1) * x);
            }
            for j in 1..k {
                pos.push(rat(1, 1) - rat(((1i64 << j) - 1) * 2, 1) * x);
            }
            pos.sort();
            let time = rat((1i64 << (k + 2)) - 1, 1) * x;
            Ok((pos, time))
        }
    }
}

/// Builds the relay schedule for a many-node placement and returns the engine
/// completion time.
pub fn many_nodes_engine_time(k: usize, parity: Parity) -> Result<Rat> {
    let (pos, _) = many_nodes(k, parity)?;
    let topo = LineTopology::with_repeaters(&pos)?;
    let middle = match parity {
        Parity::Odd => k + 1,
        Parity::Even => {
            if k == 0 {
                topo.b()
            } else {
                k + 1
            }
        }
    };
    Ok(relay_unitary_schedule(&topo, middle).completion)
}

/// Outcome of the timing-gap analysis for position verification.
#[derive(Clone, Debug)]
pub enum DeltaTBound {
    /// Exact implementation restricted to the relay protocol families:
    /// the gap is at least `2 delta / L` in units of L/c.
    ExactLower(Rat),
    /// Approximate implementation: the gap approaches zero with more nodes;
    /// carries a witnessing node count for a requested excess when asked.
    ApproachesZero {
        requested_excess: Option<Rat>,
        witness_nodes: Option<usize>,
        witness_excess: Option<Rat>,
    },
}

/// Excess over L/c of the best many-node placement with `nodes` repeaters.
fn excess_for_nodes(nodes: usize) -> Result<Rat> {
    if nodes % 2 == 1 {
        let k = (nodes - 1) / 2;
        Ok(rat(1, 2 * ((1i64 << (k + 1)) - 1)))
    } else {
        let k = nodes / 2;
        Ok(rat(2, (1i64 << (k + 2)) - 3))
    }
}

/// Lower bound on `Delta t = t_min - L/c` in units of L/c. `delta` and `l`
/// share one length unit. The zero-limit clause requires `L > 6 delta`.
pub fn delta_t_bound(
    l: Rat,
    delta: Rat,
    exact_mode: bool,
    requested_excess: Option<Rat>,
) -> Result<DeltaTBound> {
    if l <= rat(0, 1) || delta < rat(0, 1) {
        return Err(Error::Geometry("need L > 0 and delta >= 0".into()));
    }
    if exact_mode {
        return Ok(DeltaTBound::ExactLower(rat(2, 1) * delta / l));
    }
    if l <= rat(6, 1) * delta {
        return Err(Error::Hypothesis(format!(
            "the zero-limit clause needs L > 6 delta, got L = {}, delta = {}",
            crate::rational::fmt_rat(l),
            crate::rational::fmt_rat(delta)
        )));
    }
    let (witness_nodes, witness_excess) = match requested_excess {
        None => (None, None),
        Some(eps) => {
            if eps <= rat(0, 1) {
                return Err(Error::Geometry("requested excess must be positive".into()));
            }
            let mut found = None;
            for nodes in 1..=100usize {
                let ex = excess_for_nodes(nodes)?;
                if ex < eps {
                    found = Some((nodes, ex));
                    break;
                }
            }
            match found {
                Some((n, e)) => (Some(n), Some(e)),
                None => {
                    return Err(Error::Unsupported(
                        "requested excess unreachable within 100 nodes".into(),
                    ))
                }
            }
        }
    };
    Ok(DeltaTBound::ApproachesZero {
        requested_excess,
        witness_nodes,
        witness_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::fmt_rat;

    #[test]
    fn ts_bound_values() {
        assert_eq!(ts_bound(0, false).unwrap(), rat(2, 1));
        assert_eq!(ts_bound(1, false).unwrap(), rat(4, 3));
        assert_eq!(ts_bound(2, false).unwrap(), rat(8, 7));
        assert_eq!(ts_bound(3, false).unwrap(), rat(16, 15));
        assert!(ts_bound(4, false).is_err());
        assert_eq!(ts_bound(4, true).unwrap(), rat(32, 31));
    }

    #[test]
    fn ts_scheme_engine_confirmed() {
        for n in 0..=3 {
            let (pos, t) = ts_scheme(n).unwrap();
            assert_eq!(pos.len(), n);
            assert_eq!(t, ts_bound(n, false).unwrap(), "n = {n}");
        }
        let (pos, t) = ts_scheme(2).unwrap();
        assert_eq!(pos, vec![rat(1, 7), rat(3, 7)]);
        assert_eq!(t, rat(8, 7));
        let (pos, t) = ts_scheme(3).unwrap();
        assert_eq!(pos, vec![rat(1, 15), rat(1, 5), rat(7, 15)]);
        assert_eq!(t, rat(16, 15));
    }

    #[test]
    fn theorem_bound_records() {
        let b0 = theorem_bounds(0).unwrap();
        assert_eq!((b0.lower, b0.upper), (rat(2, 1), rat(3, 1)));
        let b1 = theorem_bounds(1).unwrap();
        assert_eq!((b1.lower, b1.upper), (rat(3, 2), rat(3, 2)));
        let b2 = theorem_bounds(2).unwrap();
        assert_eq!((b2.lower, b2.upper), (rat(5, 4), rat(7, 5)));
        let b3 = theorem_bounds(3).unwrap();
        assert_eq!((b3.lower, b3.upper), (rat(7, 6), rat(7, 6)));
        assert!(theorem_bounds(4).is_err());
    }

    #[test]
    fn many_nodes_examples() {
        let (pos, t) = many_nodes(1, Parity::Odd).unwrap();
        assert_eq!(t, rat(7, 6));
        assert_eq!(pos, vec![rat(1, 6), rat(1, 2), rat(5, 6)]);
        let (pos, t) = many_nodes(1, Parity::Even).unwrap();
        assert_eq!(t, rat(7, 5));
        assert_eq!(pos, vec![rat(1, 5), rat(3, 5)]);
        let (pos, t) = many_nodes(2, Parity::Odd).unwrap();
        assert_eq!(t, rat(15, 14));
        assert_eq!(
            pos,
            vec![rat(1, 14), rat(3, 14), rat(1, 2), rat(11, 14), rat(13, 14)]
        );
    }

    #[test]
    fn many_nodes_engine_agreement() {
        for k in 0..=4 {
            for parity in [Parity::Odd, Parity::Even] {
                let (_, t) = many_nodes(k, parity).unwrap();
                let engine = many_nodes_engine_time(k, parity).unwrap();
                assert_eq!(engine, t, "k={k} {parity:?}");
            }
        }
    }

    #[test]
    fn many_nodes_decreasing_and_parity_ordered() {
        let mut prev_odd = None;
        let mut prev_even = None;
        for k in 0..=10 {
            let (_, odd) = many_nodes(k, Parity::Odd).unwrap();
            let (_, even) = many_nodes(k, Parity::Even).unwrap();
            assert!(odd > rat(1, 1), "odd k={k} stays above 1");
            assert!(even > rat(1, 1), "even k={k} stays above 1");
            assert!(odd < even, "odd beats even at k={k}");
            if let Some(p) = prev_odd {
                assert!(odd < p, "odd strictly decreasing at k={k}");
            }
            if let Some(p) = prev_even {
                assert!(even < p, "even strictly decreasing at k={k}");
            }
            prev_odd = Some(odd);
            prev_even = Some(even);
        }
    }

    #[test]
    fn delta_t_cases() {
        match delta_t_bound(rat(1, 1), rat(1, 10), true, None).unwrap() {
            DeltaTBound::ExactLower(b) => assert_eq!(b, rat(1, 5)),
            _ => panic!("expected exact bound"),
        }
        match delta_t_bound(rat(1, 1), rat(0, 1), true, None).unwrap() {
            DeltaTBound::ExactLower(b) => assert!(b == rat(0, 1)),
            _ => panic!(),
        }
        // Witness node count for excess < 1/100.
        match delta_t_bound(rat(1, 1), rat(1, 10), false, Some(rat(1, 100))).unwrap() {
            DeltaTBound::ApproachesZero {
                witness_nodes,
                witness_excess,
                ..
            } => {
                assert_eq!(witness_nodes, Some(11));
                let e = witness_excess.unwrap();
                assert!(e < rat(1, 100), "excess {}", fmt_rat(e));
            }
            _ => panic!(),
        }
        assert!(delta_t_bound(rat(1, 2), rat(1, 10), false, None).is_err());
    }
}
