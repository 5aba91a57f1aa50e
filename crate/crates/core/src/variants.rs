//! The protocol-variant catalog: schedule builders and resource catalogs for
//! every analyzed repeater layout.
//!
//! Each builder hard-codes its own entanglement/message overlaps; the
//! overlaps are variant-specific choices, not a general inference rule.

use crate::error::{Error, Result};
use crate::rational::{rat, rat_max, Rat};
use crate::timeline::{CostReport, LineTopology, Schedule, ScheduleBuilder};
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    P1,
    P1_1,
    P1_2,
    P1_3,
    P2,
    P2_1,
    P2_2,
    P3,
    P3_1,
    P3_2,
    P3_3,
    P4,
    P4_1,
    P4_2,
    P5,
    P5_1,
    P5_2,
    P5_3,
    P6_2,
    P7,
    P7_2,
    P8,
    P8_1,
    P8_2,
    P8_3,
    P9,
}

impl Family {
    pub fn parse(name: &str) -> Result<Family> {
        let n = name.trim().trim_start_matches(['P', 'p']);
        Ok(match n {
            "1" => Family::P1,
            "1.1" => Family::P1_1,
            "1.2" => Family::P1_2,
            "1.3" => Family::P1_3,
            "2" => Family::P2,
            "2.1" => Family::P2_1,
            "2.2" => Family::P2_2,
            "3" => Family::P3,
            "3.1" => Family::P3_1,
            "3.2" => Family::P3_2,
            "3.3" => Family::P3_3,
            "4" => Family::P4,
            "4.1" => Family::P4_1,
            "4.2" => Family::P4_2,
            "5" => Family::P5,
            "5.1" => Family::P5_1,
            "5.2" => Family::P5_2,
            "5.3" => Family::P5_3,
            "6.2" => Family::P6_2,
            "7" => Family::P7,
            "7.2" => Family::P7_2,
            "8" => Family::P8,
            "8.1" => Family::P8_1,
            "8.2" => Family::P8_2,
            "8.3" => Family::P8_3,
            "9" => Family::P9,
            _ => return Err(Error::UnknownVariant(name.to_string())),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::P1 => "P1",
            Family::P1_1 => "P1.1",
            Family::P1_2 => "P1.2",
            Family::P1_3 => "P1.3",
            Family::P2 => "P2",
            Family::P2_1 => "P2.1",
            Family::P2_2 => "P2.2",
            Family::P3 => "P3",
            Family::P3_1 => "P3.1",
            Family::P3_2 => "P3.2",
            Family::P3_3 => "P3.3",
            Family::P4 => "P4",
            Family::P4_1 => "P4.1",
            Family::P4_2 => "P4.2",
            Family::P5 => "P5",
            Family::P5_1 => "P5.1",
            Family::P5_2 => "P5.2",
            Family::P5_3 => "P5.3",
            Family::P6_2 => "P6.2",
            Family::P7 => "P7",
            Family::P7_2 => "P7.2",
            Family::P8 => "P8",
            Family::P8_1 => "P8.1",
            Family::P8_2 => "P8.2",
            Family::P8_3 => "P8.3",
            Family::P9 => "P9",
        }
    }

    /// Number of repeater positions the variant takes.
    pub fn arity(self) -> usize {
        match self {
            Family::P1 | Family::P2 | Family::P3 | Family::P4 | Family::P5 | Family::P7
            | Family::P8 => 0,
            Family::P9 => 1, // 0 or 1; see `ProtocolVariant::new`
            Family::P1_1 | Family::P2_1 | Family::P3_1 | Family::P4_1 | Family::P5_1
            | Family::P8_1 => 1,
            Family::P1_2 | Family::P2_2 | Family::P3_2 | Family::P4_2 | Family::P5_2
            | Family::P6_2 | Family::P7_2 | Family::P8_2 => 2,
            Family::P1_3 | Family::P3_3 | Family::P5_3 | Family::P8_3 => 3,
        }
    }

    fn default_positions(self) -> Option<Vec<Rat>> {
        match self {
            Family::P1_1 | Family::P5_1 => Some(vec![rat(1, 2)]),
            Family::P5_3 => Some(vec![rat(1, 6), rat(1, 2), rat(5, 6)]),
            Family::P9 => Some(vec![]),
            _ => None,
        }
    }
}

/// A named protocol plus its repeater positions; fully determines a schedule.
#[derive(Clone, Debug)]
pub struct ProtocolVariant {
    pub family: Family,
    pub positions: Vec<Rat>,
}

impl ProtocolVariant {
    pub fn new(family: Family, positions: Vec<Rat>) -> Result<Self> {
        let positions = if positions.is_empty() {
            family.default_positions().unwrap_or_default()
        } else {
            positions
        };
        let ok = match family {
            Family::P9 => positions.len() <= 1,
            f => positions.len() == f.arity(),
        };
        if !ok {
            return Err(Error::ArityMismatch {
                variant: family.name().into(),
                expected: family.arity(),
                got: positions.len(),
            });
        }
        // Topology construction validates ordering and range.
        if !positions.is_empty() {
            LineTopology::with_repeaters(&positions)?;
        }
        Ok(ProtocolVariant { family, positions })
    }

    /// Parses `"P3.2(1/5,3/5)"`, `"3.2(1/5,3/5)"` or a bare family name.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(open) = s.find('(') {
            if !s.ends_with(')') {
                return Err(Error::UnknownVariant(s.into()));
            }
            let family = Family::parse(&s[..open])?;
            let inner = &s[open + 1..s.len() - 1];
            let positions = inner
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(crate::rational::parse_rat)
                .collect::<Result<Vec<_>>>()?;
            ProtocolVariant::new(family, positions)
        } else {
            ProtocolVariant::new(Family::parse(s)?, vec![])
        }
    }

    pub fn id(&self) -> String {
        if self.positions.is_empty() {
            self.family.name().to_string()
        } else {
            format!(
                "{}({})",
                self.family.name(),
                self.positions
                    .iter()
                    .map(|&p| crate::rational::fmt_rat(p))
                    .collect::<Vec<_>>()
                    .join(",")
            )
        }
    }

    pub fn topology(&self) -> Result<LineTopology> {
        LineTopology::with_repeaters(&self.positions)
    }
}

/// Resource parameters for the cost catalog.
#[derive(Clone, Copy, Debug)]
pub struct CostParams {
    pub d_a: usize,
    pub d_b: usize,
    /// Term count N of the controlled form (Protocol 2 family).
    pub n_terms: usize,
    /// Group order |G| (Protocol 3/5/6 families; Protocol 4 uses d_a^2).
    pub group_order: usize,
    /// Number of rotation-ladder resource states (Protocol 8 variants).
    pub theta_steps: usize,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            d_a: 2,
            d_b: 2,
            n_terms: 2,
            group_order: 16,
            theta_steps: 1,
        }
    }
}

/// One unambiguous teleport hop `u -> v`: photons fly `v -> u` from time zero
/// so the data sender knows its entangled qubits, then the teleport message
/// (carrying the confirmation for the far side) goes `u -> v`.
fn relay_hop(b: &mut ScheduleBuilder, u: usize, v: usize, deps: &[usize], what: &str) -> usize {
    let p = b.photon(v, u, &format!("entanglement photons for {what}"));
    let mut d = deps.to_vec();
    d.push(p);
    b.message(u, v, &d, what)
}

/// Teleport relay along `path`, returning the final message id; `None` when
/// the path has no hop (data is already in place).
fn relay_chain_opt(b: &mut ScheduleBuilder, path: &[usize], what: &str) -> Option<usize> {
    let mut last: Option<usize> = None;
    for w in path.windows(2) {
        let deps: Vec<usize> = last.into_iter().collect();
        last = Some(relay_hop(
            b,
            w[0],
            w[1],
            &deps,
            &format!("{what} {}->{}", w[0], w[1]),
        ));
    }
    last
}

fn relay_chain(b: &mut ScheduleBuilder, path: &[usize], what: &str) -> usize {
    relay_chain_opt(b, path, what).expect("path needs at least one hop")
}

/// Relay both inputs to `middle`, perform the unitary there, relay back.
/// This is the Protocol 1 family's step structure for any node count.
pub fn relay_unitary_schedule(topo: &LineTopology, middle: usize) -> Schedule {
    let mut b = ScheduleBuilder::new(topo);
    let last = topo.b();
    let path_a: Vec<usize> = (0..=middle).collect();
    let path_b: Vec<usize> = (middle..=last).rev().collect();
    let ma = relay_chain_opt(&mut b, &path_a, "teleport A-side input");
    let mb = relay_chain_opt(&mut b, &path_b, "teleport B-side input");
    let deps: Vec<usize> = ma.into_iter().chain(mb).collect();
    let u = b.local(middle, &deps, "target unitary");
    let back_a: Vec<usize> = (0..=middle).rev().collect();
    let back_b: Vec<usize> = (middle..=last).collect();
    let mut last_a = u;
    for w in back_a.windows(2) {
        last_a = relay_hop(&mut b, w[0], w[1], &[last_a], "teleport A-side output back");
    }
    let mut last_b = u;
    for w in back_b.windows(2) {
        last_b = relay_hop(&mut b, w[0], w[1], &[last_b], "teleport B-side output back");
    }
    b.finalize()
}

/// One-way unambiguous transmission from A to B along the whole chain.
pub fn transmission_schedule(topo: &LineTopology) -> Schedule {
    let mut b = ScheduleBuilder::new(topo);
    let path: Vec<usize> = (0..topo.node_count()).collect();
    relay_chain(&mut b, &path, "unambiguous transmission");
    b.finalize()
}

fn middle_node_for(topo: &LineTopology) -> usize {
    // The node performing the unitary: the repeater whose position is closest
    // to balancing the two relay chains. For the analyzed layouts this is the
    // second repeater (P1.2) or the central one (P1.1, P1.3).
    match topo.repeater_count() {
        0 => topo.b(),
        1 => 1,
        2 => 2,
        n => n / 2 + 1,
    }
}

/// Builds the event graph of a protocol variant; see the per-family builders
/// for the overlap choices.
pub fn build_schedule(variant: &ProtocolVariant) -> Result<(Schedule, CostReport)> {
    build_schedule_with(variant, &CostParams::default())
}

pub fn build_schedule_with(
    variant: &ProtocolVariant,
    params: &CostParams,
) -> Result<(Schedule, CostReport)> {
    let topo = if variant.positions.is_empty() {
        LineTopology::with_repeaters(&[])?
    } else {
        variant.topology()?
    };
    let schedule = match variant.family {
        Family::P1 | Family::P1_1 | Family::P1_2 | Family::P1_3 => {
            relay_unitary_schedule(&topo, middle_node_for(&topo))
        }
        Family::P2 | Family::P4 => base_two_round(&topo, variant.family),
        Family::P2_1 | Family::P4_1 => p21_schedule(&topo, variant.family),
        Family::P2_2 | Family::P4_2 => p22_schedule(&topo, variant.family),
        Family::P3 => base_two_round(&topo, Family::P3),
        Family::P3_1 | Family::P5_1 => p31_schedule(&topo),
        Family::P3_2 => p32_schedule(&topo),
        Family::P3_3 | Family::P5_3 => p33_schedule(&topo),
        Family::P5 | Family::P7 => base_fast(&topo),
        Family::P5_2 | Family::P6_2 => p52_schedule(&topo),
        Family::P7_2 => p72_schedule(&topo),
        Family::P8 => p8_schedule(&topo),
        Family::P8_1 => p81_schedule(&topo),
        Family::P8_2 => p82_schedule(&topo),
        Family::P8_3 => p83_schedule(&topo),
        Family::P9 => p9_schedule(&topo),
    };
    schedule.validate_against(&topo)?;
    let cost = cost_report_for(variant, params, schedule.completion)?;
    Ok((schedule, cost))
}

/// Protocols 2/3/4 without repeaters: photons one way, then the two classical
/// stages; the entanglement confirmation rides the first stage.
fn base_two_round(topo: &LineTopology, family: Family) -> Schedule {
    let (a, bb) = (topo.a(), topo.b());
    // Protocol 4 mirrors Protocol 2 with the classical stages reversed.
    let flip = matches!(family, Family::P4 | Family::P4_1 | Family::P4_2);
    let (first_src, first_dst) = if flip { (bb, a) } else { (a, bb) };
    let mut b = ScheduleBuilder::new(topo);
    let p = b.photon(first_dst, first_src, "entanglement photons");
    let m1 = b.message(first_src, first_dst, &[p], "first classical stage + confirm");
    let l = b.local(first_dst, &[m1], "local gates and measurement");
    b.message(first_dst, first_src, &[l], "second classical stage");
    b.finalize()
}

/// Protocols 5/7 without repeaters: full two-phase entanglement preparation,
/// then one simultaneous round in both directions.
fn base_fast(topo: &LineTopology) -> Schedule {
    let (a, bb) = (topo.a(), topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let p = b.photon(bb, a, "entanglement photons");
    let c = b.confirm(a, bb, &[p], "entanglement confirmation");
    b.message(a, bb, &[c], "simultaneous round A->B");
    b.message(bb, a, &[c], "simultaneous round B->A");
    b.finalize()
}

/// Protocol 2.1(x): both ancillae at the repeater. The B-side link's
/// confirmation cannot ride an earlier message, so it stands alone.
fn p21_schedule(topo: &LineTopology, family: Family) -> Schedule {
    let (a, c, bb) = (topo.a(), 1, topo.b());
    let flip = matches!(family, Family::P4_1);
    let mut b = ScheduleBuilder::new(topo);
    let p1 = b.photon(c, a, "entanglement photons for the control-side gate");
    let m1 = b.message(a, c, &[p1], "control-side gate stage 1 + confirm");
    let m1b = b.message(c, a, &[m1], "control-side gate stage 2");
    let pb = b.photon(c, bb, "entanglement photons for the target-side gate");
    let cb = b.confirm(bb, c, &[pb], "target-side entanglement confirmation");
    let la = b.local(c, &[m1], "measure control ancilla");
    let m2 = b.message(c, bb, &[la, cb], "target-side gate stage 1");
    let m3 = b.message(bb, c, &[m2], "target-side gate stage 2");
    let lb = b.local(c, &[m3], "measure target ancilla");
    b.message(c, a, &[lb], "final outcome to A");
    let _ = (m1b, flip);
    b.finalize()
}

/// Protocol 2.2(x1,x2): ancillae at the two repeaters; every confirmation
/// rides a protocol message.
fn p22_schedule(topo: &LineTopology, family: Family) -> Schedule {
    let (a, c1, c2, bb) = (topo.a(), 1, 2, topo.b());
    let flip = matches!(family, Family::P4_2);
    let mut b = ScheduleBuilder::new(topo);
    let p1 = b.photon(c1, a, "entanglement photons on A-C1");
    let m1 = b.message(a, c1, &[p1], "control-side gate stage 1 + confirm");
    let m1b = b.message(c1, a, &[m1], "control-side gate stage 2");
    let p_ab = b.photon(c2, c1, "entanglement photons on C1-C2");
    let la = b.local(c1, &[m1, p_ab], "measure control ancilla");
    let mk = b.message(c1, c2, &[la], "ancilla outcome + C1-C2 confirm");
    let p_b = b.photon(bb, c2, "entanglement photons on C2-B");
    let m2 = b.message(c2, bb, &[mk, p_b], "target-side gate stage 1 + confirm");
    let m3 = b.message(bb, c2, &[m2], "target-side gate stage 2");
    let lb = b.local(c2, &[m3], "measure target ancilla");
    b.message(c2, a, &[lb], "final outcome to A");
    let _ = (m1b, flip);
    b.finalize()
}

/// Protocol 3.1(x): both group ancillae at the repeater.
fn p31_schedule(topo: &LineTopology) -> Schedule {
    let (a, c, bb) = (topo.a(), 1, topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let pa = b.photon(c, a, "entanglement photons toward A");
    let pb = b.photon(c, bb, "entanglement photons toward B");
    let ma = b.message(a, c, &[pa], "A-side controlled-gate stage 1 + confirm");
    let mb = b.message(bb, c, &[pb], "B-side controlled-gate stage 1 + confirm");
    let l = b.local(c, &[ma, mb], "ancilla measurements and circulant");
    b.message(c, a, &[l], "outcomes to A");
    b.message(c, bb, &[l], "outcomes to B");
    b.finalize()
}

/// Protocol 3.2(x1,x2): ancillae split over the two repeaters.
fn p32_schedule(topo: &LineTopology) -> Schedule {
    let (a, c1, c2, bb) = (topo.a(), 1, 2, topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let pa = b.photon(c1, a, "entanglement photons on A-C1");
    let ma = b.message(a, c1, &[pa], "A-side controlled-gate stage 1 + confirm");
    let ma2 = b.message(c1, a, &[ma], "A-side controlled-gate stage 2");
    let p_ab = b.photon(c2, c1, "entanglement photons on C1-C2");
    let la = b.local(c1, &[ma, p_ab], "measure a");
    let mk = b.message(c1, c2, &[la], "a outcome + C1-C2 confirm");
    let pb = b.photon(c2, bb, "entanglement photons on C2-B");
    let mb = b.message(bb, c2, &[pb], "B-side controlled-gate stage 1 + confirm");
    let lb = b.local(c2, &[mk, mb], "phase fix, circulant, measure b");
    b.message(c2, a, &[lb], "outcomes to A");
    b.message(c2, bb, &[lb], "outcomes to B");
    let _ = ma2;
    b.finalize()
}

/// Protocol 3.3(x1,x2,x3): relays at the outer repeaters, ancillae at the
/// central one.
fn p33_schedule(topo: &LineTopology) -> Schedule {
    let (a, c1, c2, c3, bb) = (topo.a(), 1, 2, 3, topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let pa = b.photon(c1, a, "entanglement photons on A-C1");
    let pb = b.photon(c3, bb, "entanglement photons on C3-B");
    let p12 = b.photon(c2, c1, "entanglement photons on C1-C2");
    let p23 = b.photon(c2, c3, "entanglement photons on C2-C3");
    let ma = b.message(a, c1, &[pa], "A-side stage 1 + confirm");
    let mb = b.message(bb, c3, &[pb], "B-side stage 1 + confirm");
    let me = b.message(c1, c2, &[ma, p12], "teleport e to C2 + confirm");
    let mf = b.message(c3, c2, &[mb, p23], "teleport f to C2 + confirm");
    let l = b.local(c2, &[me, mf], "controlled gates, circulant, measurements");
    b.message(c2, a, &[l], "outcomes to A");
    b.message(c2, bb, &[l], "outcomes to B");
    b.finalize()
}

/// Protocol 5.2(x1,x2) (and 6.2): simultaneous measurements at both repeaters
/// then classical broadcast in both directions.
fn p52_schedule(topo: &LineTopology) -> Schedule {
    let (a, c1, c2, bb) = (topo.a(), 1, 2, topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let pa = b.photon(c1, a, "entanglement photons on A-C1");
    let pb = b.photon(c2, bb, "entanglement photons on C2-B");
    let pab = b.photon(c2, c1, "entanglement photons on C1-C2");
    let ma = b.message(a, c1, &[pa], "A-side stage 1 + confirm");
    let mb = b.message(bb, c2, &[pb], "B-side stage 1 + confirm");
    let cab = b.confirm(c1, c2, &[pab], "C1-C2 entanglement confirmation");
    let l1 = b.local(c1, &[ma, mb, cab], "simultaneous measurement at C1");
    let l2 = b.local(c2, &[ma, mb, cab], "simultaneous measurement at C2");
    b.message(c1, a, &[l1], "broadcast to A from C1");
    b.message(c1, bb, &[l1], "broadcast to B from C1");
    b.message(c2, a, &[l2], "broadcast to A from C2");
    b.message(c2, bb, &[l2], "broadcast to B from C2");
    b.finalize()
}

/// Protocol 7.2(x1,x2): teleport inputs to the repeaters, run the fast
/// protocol across C1-C2, teleport outputs back.
fn p72_schedule(topo: &LineTopology) -> Schedule {
    let (a, c1, c2, bb) = (topo.a(), 1, 2, topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let pa = b.photon(c1, a, "entanglement photons on A-C1");
    let pb = b.photon(c2, bb, "entanglement photons on C2-B");
    let pcc = b.photon(c2, c1, "entanglement photons on C1-C2");
    let ma = b.message(a, c1, &[pa], "teleport A input + confirm");
    let mb = b.message(bb, c2, &[pb], "teleport B input + confirm");
    let ccc = b.confirm(c1, c2, &[pcc], "C1-C2 entanglement confirmation");
    let f1 = b.message(c1, c2, &[ma, mb, ccc], "fast round C1->C2");
    let f2 = b.message(c2, c1, &[ma, mb, ccc], "fast round C2->C1");
    let l1 = b.local(c1, &[f2], "corrections at C1");
    let l2 = b.local(c2, &[f1], "corrections at C2");
    relay_hop(&mut b, c1, a, &[l1], "teleport output back to A");
    relay_hop(&mut b, c2, bb, &[l2], "teleport output back to B");
    b.finalize()
}

/// Protocol 8: remote rotation without repeaters.
fn p8_schedule(topo: &LineTopology) -> Schedule {
    let (a, bb) = (topo.a(), topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let p = b.photon(a, bb, "ebit photons A->B");
    let m = b.message(bb, a, &[p], "B measurement outcome + confirm");
    let l = b.local(a, &[m], "correction and rotation");
    b.message(a, bb, &[l], "A outcome to B");
    b.finalize()
}

/// Protocol 8.1(x): rotation ladder at the repeater; the step structure and
/// final broadcast mirror the Protocol 3 family.
fn p81_schedule(topo: &LineTopology) -> Schedule {
    let (a, c, bb) = (topo.a(), 1, topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let pa = b.photon(c, a, "entanglement photons toward A");
    let pb = b.photon(c, bb, "entanglement photons toward B");
    let ma = b.message(a, c, &[pa], "teleport rotation states + confirm");
    let mb = b.message(bb, c, &[pb], "B measurement outcome + confirm");
    let l = b.local(c, &[ma, mb], "rotation ladder");
    b.message(c, a, &[l], "outcomes to A");
    b.message(c, bb, &[l], "outcomes to B");
    b.finalize()
}

/// Protocol 8.2(x1,x2): rotation states relayed via C1 to C2.
fn p82_schedule(topo: &LineTopology) -> Schedule {
    let (a, c1, c2, bb) = (topo.a(), 1, 2, topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let ma = relay_chain(&mut b, &[a, c1, c2], "relay rotation states");
    let pb = b.photon(c2, bb, "entanglement photons on C2-B");
    let mb = b.message(bb, c2, &[pb], "B measurement outcome + confirm");
    let l = b.local(c2, &[ma, mb], "rotation ladder");
    b.message(c2, a, &[l], "outcomes to A");
    b.message(c2, bb, &[l], "outcomes to B");
    b.finalize()
}

/// Protocol 8.3(x1,x2,x3): rotation states via C1, B-side information via C3.
fn p83_schedule(topo: &LineTopology) -> Schedule {
    let (a, c1, c2, c3, bb) = (topo.a(), 1, 2, 3, topo.b());
    let mut b = ScheduleBuilder::new(topo);
    let ma = relay_chain(&mut b, &[a, c1, c2], "relay rotation states");
    let mb = relay_chain(&mut b, &[bb, c3, c2], "relay B-side information");
    let l = b.local(c2, &[ma, mb], "rotation ladder");
    b.message(c2, a, &[l], "outcomes to A");
    b.message(c2, bb, &[l], "outcomes to B");
    b.finalize()
}

/// Protocol 9 timing stub: direct encoded transmission, no entanglement.
fn p9_schedule(topo: &LineTopology) -> Schedule {
    let (a, bb) = (topo.a(), topo.b());
    let mut b = ScheduleBuilder::new(topo);
    if topo.repeater_count() == 0 {
        let t1 = b.photon(a, bb, "encoded state A->B");
        let l = b.local(bb, &[t1], "decode, unitary, encode");
        b.photon_after(bb, a, &[l], "encoded state B->A");
    } else {
        let c = 1;
        let t1 = b.photon(a, c, "encoded state A->C");
        let t2 = b.photon(bb, c, "encoded state B->C");
        let l = b.local(c, &[t1, t2], "decode, unitary, encode");
        b.photon_after(c, a, &[l], "encoded state C->A");
        b.photon_after(c, bb, &[l], "encoded state C->B");
    }
    b.finalize()
}

/// Catalog cost report; c-bits are twice the ebits for the Protocol 1-7
/// families per the two-message-per-teleport accounting.
pub fn cost_report(variant: &ProtocolVariant, params: &CostParams) -> Result<CostReport> {
    let (_, report) = build_schedule_with(variant, params)?;
    Ok(report)
}

fn cost_report_for(
    variant: &ProtocolVariant,
    params: &CostParams,
    total_time: Rat,
) -> Result<CostReport> {
    let topo = if variant.positions.is_empty() {
        LineTopology::with_repeaters(&[])?
    } else {
        variant.topology()?
    };
    let log2 = |x: usize| (x as f64).log2();
    let d_a = log2(params.d_a);
    let d_b = log2(params.d_b);
    let n_t = log2(params.n_terms);
    let g = log2(params.group_order);
    let g4 = log2(params.d_a * params.d_a);
    let last = topo.b();
    let mut links: Vec<((usize, usize), f64)> = Vec::new();
    let push_chain = |links: &mut Vec<((usize, usize), f64)>, lo: usize, hi: usize, e: f64| {
        for u in lo..hi {
            links.push(((u, u + 1), e));
        }
    };
    match variant.family {
        Family::P1 | Family::P1_1 | Family::P1_2 | Family::P1_3 => {
            let m = middle_node_for(&topo);
            // Forward and return hops for each side's system.
            push_chain(&mut links, 0, m, d_a);
            push_chain(&mut links, 0, m, d_a);
            push_chain(&mut links, m.min(last), last, d_b);
            push_chain(&mut links, m.min(last), last, d_b);
        }
        Family::P2 => links.push(((0, last), n_t)),
        Family::P2_1 => {
            links.push(((0, 1), n_t));
            links.push(((1, last), n_t));
        }
        Family::P2_2 => push_chain(&mut links, 0, last, n_t),
        Family::P4 => links.push(((0, last), g4)),
        Family::P4_1 => {
            links.push(((0, 1), g4));
            links.push(((1, last), g4));
        }
        Family::P4_2 => push_chain(&mut links, 0, last, g4),
        Family::P3 | Family::P5 => links.push(((0, last), g)),
        Family::P3_1 | Family::P5_1 => {
            links.push(((0, 1), g));
            links.push(((1, last), g));
        }
        Family::P3_2 | Family::P5_2 | Family::P6_2 => push_chain(&mut links, 0, last, g),
        Family::P3_3 | Family::P5_3 => push_chain(&mut links, 0, last, g),
        Family::P7 => links.push(((0, last), d_a + d_b)),
        Family::P7_2 => {
            links.push(((0, 1), 2.0 * d_a));
            links.push(((1, 2), d_a + d_b));
            links.push(((2, last), 2.0 * d_b));
        }
        Family::P8 => links.push(((0, last), 1.0)),
        Family::P8_1 => {
            links.push(((0, 1), params.theta_steps as f64));
            links.push(((1, last), 1.0));
        }
        Family::P8_2 => {
            links.push(((0, 1), params.theta_steps as f64));
            links.push(((1, 2), params.theta_steps as f64));
            links.push(((2, last), 1.0));
        }
        Family::P8_3 => {
            links.push(((0, 1), params.theta_steps as f64));
            links.push(((1, 2), params.theta_steps as f64));
            links.push(((2, 3), 1.0));
            links.push(((3, last), 1.0));
        }
        Family::P9 => {}
    }
    let ebits: f64 = links.iter().map(|l| l.1).sum();
    let cbits = match variant.family {
        Family::P8 | Family::P8_1 | Family::P8_2 | Family::P8_3 => {
            // Two protocol c-bits plus two per relayed rotation state hop.
            let relay_hops = match variant.family {
                Family::P8_1 => 1,
                Family::P8_2 | Family::P8_3 => 2,
                _ => 0,
            };
            2.0 + 2.0 * (params.theta_steps * relay_hops) as f64
        }
        Family::P9 => 0.0,
        _ => 2.0 * ebits,
    };
    Ok(CostReport {
        total_time,
        ebits,
        cbits,
        entanglement_links: links,
    })
}

/// Closed-form completion time of Protocol 3.2(x1,x2), cross-validating the
/// event engine.
pub fn schedule_formula_p32(x1: Rat, x2: Rat) -> Result<Rat> {
    if !(Rat::zero() < x1 && x1 < x2 && x2 < rat(1, 1)) {
        return Err(Error::Topology("need 0 < x1 < x2 < 1".into()));
    }
    let one = rat(1, 1);
    let two = rat(2, 1);
    let inner = rat_max(two * x1, x2 - x1) + (x2 - x1);
    let first = rat_max(two * (one - x2), inner);
    Ok(first + rat_max(x2, one - x2))
}
