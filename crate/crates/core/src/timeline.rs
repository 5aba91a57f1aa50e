//! Event-graph scheduler over a 1-D node array with exact rational times.
//!
//! Distances are fractions of the end-to-end separation L and all times are
//! in units of L/c. Transit and message events last exactly the inter-node
//! distance; local operations take no time.

use crate::error::{Error, Result};
use crate::rational::{rat, rat_abs, Rat};
use num_traits::Zero;

/// Node positions on [0,1]; node 0 is A at 0, the last node is B at 1.
#[derive(Clone, Debug)]
pub struct LineTopology {
    positions: Vec<Rat>,
}

impl LineTopology {
    /// Builds A at 0, the given interior repeater positions, and B at 1.
    pub fn with_repeaters(interior: &[Rat]) -> Result<Self> {
        let mut positions = vec![rat(0, 1)];
        positions.extend_from_slice(interior);
        positions.push(rat(1, 1));
        let topo = LineTopology { positions };
        topo.validate()?;
        Ok(topo)
    }

    pub fn from_positions(positions: Vec<Rat>) -> Result<Self> {
        let topo = LineTopology { positions };
        topo.validate()?;
        Ok(topo)
    }

    fn validate(&self) -> Result<()> {
        if self.positions.len() < 2 {
            return Err(Error::Topology("need at least the two end nodes".into()));
        }
        if self.positions[0] != rat(0, 1) {
            return Err(Error::Topology("A must sit at position 0".into()));
        }
        if *self.positions.last().unwrap() != rat(1, 1) {
            return Err(Error::Topology("B must sit at position 1".into()));
        }
        for w in self.positions.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Topology(format!(
                    "positions must be strictly increasing, got {} then {}",
                    crate::rational::fmt_rat(w[0]),
                    crate::rational::fmt_rat(w[1])
                )));
            }
        }
        Ok(())
    }

    pub fn repeater_count(&self) -> usize {
        self.positions.len() - 2
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn a(&self) -> usize {
        0
    }

    pub fn b(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn pos(&self, node: usize) -> Rat {
        self.positions[node]
    }

    pub fn dist(&self, u: usize, v: usize) -> Rat {
        rat_abs(self.positions[u] - self.positions[v])
    }

    pub fn positions(&self) -> &[Rat] {
        &self.positions
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    PhotonTransit,
    ClassicalMessage,
    EntanglementConfirm,
    LocalOp,
    Wait,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::PhotonTransit => "photon",
            EventKind::ClassicalMessage => "classical",
            EventKind::EntanglementConfirm => "confirm",
            EventKind::LocalOp => "local",
            EventKind::Wait => "wait",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Event {
    pub id: usize,
    pub kind: EventKind,
    pub from: usize,
    pub to: usize,
    pub release: Rat,
    pub duration: Rat,
    pub depends_on: Vec<usize>,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct ScheduledEvent {
    pub event: Event,
    pub start: Rat,
    pub end: Rat,
}

#[derive(Clone, Debug)]
pub struct Schedule {
    pub events: Vec<ScheduledEvent>,
    pub completion: Rat,
}

/// An unscheduled event template, as returned by `ent_gen` so builders can
/// merge the confirmation leg with other same-direction messages.
#[derive(Clone, Debug)]
pub struct EventSpec {
    pub kind: EventKind,
    pub from: usize,
    pub to: usize,
    pub duration: Rat,
}

/// The two-phase entanglement-generation primitive between nodes at the given
/// positions: a photon leg from the source, then a confirmation message back
/// from the receiving node. The confirm is returned unscheduled.
pub fn ent_gen(
    node_a: usize,
    node_b: usize,
    pos_a: Rat,
    pos_b: Rat,
    photon_source_is_a: bool,
) -> Result<(EventSpec, EventSpec)> {
    if node_a == node_b {
        return Err(Error::Topology("entanglement generation needs two distinct nodes".into()));
    }
    let d = rat_abs(pos_a - pos_b);
    let (src, dst) = if photon_source_is_a {
        (node_a, node_b)
    } else {
        (node_b, node_a)
    };
    Ok((
        EventSpec {
            kind: EventKind::PhotonTransit,
            from: src,
            to: dst,
            duration: d,
        },
        EventSpec {
            kind: EventKind::EntanglementConfirm,
            from: dst,
            to: src,
            duration: d,
        },
    ))
}

/// Accumulates events and resolves start times: every event starts at
/// `max(release, latest dependency end)`.
pub struct ScheduleBuilder {
    topo: LineTopology,
    events: Vec<Event>,
    ends: Vec<Rat>,
}

impl ScheduleBuilder {
    pub fn new(topo: &LineTopology) -> Self {
        ScheduleBuilder {
            topo: topo.clone(),
            events: Vec::new(),
            ends: Vec::new(),
        }
    }

    pub fn topology(&self) -> &LineTopology {
        &self.topo
    }

    fn push(&mut self, kind: EventKind, from: usize, to: usize, deps: &[usize], label: &str) -> usize {
        let duration = match kind {
            EventKind::LocalOp | EventKind::Wait => Rat::zero(),
            _ => self.topo.dist(from, to),
        };
        self.push_with_duration(kind, from, to, duration, deps, label)
    }

    fn push_with_duration(
        &mut self,
        kind: EventKind,
        from: usize,
        to: usize,
        duration: Rat,
        deps: &[usize],
        label: &str,
    ) -> usize {
        let id = self.events.len();
        let mut start = Rat::zero();
        for &d in deps {
            assert!(d < id, "dependencies must precede the event");
            if self.ends[d] > start {
                start = self.ends[d];
            }
        }
        self.events.push(Event {
            id,
            kind,
            from,
            to,
            release: Rat::zero(),
            duration,
            depends_on: deps.to_vec(),
            label: label.to_string(),
        });
        self.ends.push(start + duration);
        id
    }

    /// Photon leg of entanglement generation, released at time zero.
    pub fn photon(&mut self, from: usize, to: usize, label: &str) -> usize {
        self.push(EventKind::PhotonTransit, from, to, &[], label)
    }

    /// Photon transit gated on earlier events (direct quantum transmission).
    pub fn photon_after(&mut self, from: usize, to: usize, deps: &[usize], label: &str) -> usize {
        self.push(EventKind::PhotonTransit, from, to, deps, label)
    }

    /// Classical message; merged entanglement confirms ride along implicitly.
    pub fn message(&mut self, from: usize, to: usize, deps: &[usize], label: &str) -> usize {
        self.push(EventKind::ClassicalMessage, from, to, deps, label)
    }

    /// Standalone entanglement-confirmation message.
    pub fn confirm(&mut self, from: usize, to: usize, deps: &[usize], label: &str) -> usize {
        self.push(EventKind::EntanglementConfirm, from, to, deps, label)
    }

    pub fn local(&mut self, node: usize, deps: &[usize], label: &str) -> usize {
        self.push(EventKind::LocalOp, node, node, deps, label)
    }

    pub fn end_of(&self, id: usize) -> Rat {
        self.ends[id]
    }

    pub fn finalize(self) -> Schedule {
        let mut scheduled = Vec::with_capacity(self.events.len());
        let mut completion = Rat::zero();
        for (e, &end) in self.events.into_iter().zip(&self.ends) {
            let start = end - e.duration;
            if end > completion {
                completion = end;
            }
            scheduled.push(ScheduledEvent {
                event: e,
                start,
                end,
            });
        }
        Schedule {
            events: scheduled,
            completion,
        }
    }
}

impl Schedule {
    /// Sanity checks over the finished schedule: no event starts before zero
    /// and transit/message durations match the geometric distance.
    pub fn validate_against(&self, topo: &LineTopology) -> Result<()> {
        for se in &self.events {
            if se.start < Rat::zero() {
                return Err(Error::Topology(format!(
                    "event {} starts before time zero",
                    se.event.id
                )));
            }
            match se.event.kind {
                EventKind::LocalOp | EventKind::Wait => {
                    if !se.event.duration.is_zero() {
                        return Err(Error::Topology("local operations take no time".into()));
                    }
                }
                _ => {
                    if se.event.duration != topo.dist(se.event.from, se.event.to) {
                        return Err(Error::Topology(format!(
                            "event {} violates the speed-of-light contract",
                            se.event.id
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A longest dependency-weighted path realizing the completion time, as event
/// ids in execution order. Empty when the completion time is zero.
pub fn critical_path(schedule: &Schedule) -> Vec<usize> {
    if schedule.completion.is_zero() {
        return Vec::new();
    }
    let last = schedule
        .events
        .iter()
        .filter(|se| se.end == schedule.completion)
        .map(|se| se.event.id)
        .min()
        .expect("nonzero completion implies an event");
    let mut path = vec![last];
    let mut cur = last;
    loop {
        let se = &schedule.events[cur];
        // A binding predecessor ends exactly at this event's start.
        let binding = se
            .event
            .depends_on
            .iter()
            .copied()
            .filter(|&d| schedule.events[d].end == se.start)
            .min();
        match binding {
            Some(d) if !se.start.is_zero() => {
                path.push(d);
                cur = d;
            }
            _ => break,
        }
    }
    path.reverse();
    // The path realizes the completion as a sum of leg durations; local
    // zero-duration events are dropped.
    path.retain(|&id| !schedule.events[id].event.duration.is_zero());
    path
}

/// Per-link entanglement plus totals; c-bits follow the catalog identity
/// `cbits = 2 * ebits` for the Protocol 1-7 families.
#[derive(Clone, Debug)]
pub struct CostReport {
    pub total_time: Rat,
    pub ebits: f64,
    pub cbits: f64,
    pub entanglement_links: Vec<((usize, usize), f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_validation() {
        assert!(LineTopology::with_repeaters(&[rat(1, 3)]).is_ok());
        assert!(LineTopology::with_repeaters(&[rat(3, 5), rat(1, 5)]).is_err());
        assert!(LineTopology::with_repeaters(&[rat(0, 1)]).is_err());
        assert!(LineTopology::with_repeaters(&[rat(1, 1)]).is_err());
        assert!(LineTopology::from_positions(vec![rat(0, 1), rat(1, 2)]).is_err());
    }

    #[test]
    fn ent_gen_pair() {
        let (photon, confirm) = ent_gen(0, 1, rat(0, 1), rat(1, 2), false).unwrap();
        assert_eq!(photon.kind, EventKind::PhotonTransit);
        assert_eq!(photon.duration, rat(1, 2));
        assert_eq!(confirm.duration, rat(1, 2));
        assert_eq!(photon.from, 1);
        assert_eq!(confirm.from, 0);
        // Standalone composition totals 2 * distance = 1.
        let topo = LineTopology::with_repeaters(&[rat(1, 2)]).unwrap();
        let mut b = ScheduleBuilder::new(&topo);
        let p = b.photon(photon.from, photon.to, "photons");
        b.confirm(confirm.from, confirm.to, &[p], "confirm");
        let s = b.finalize();
        assert_eq!(s.completion, rat(1, 1));
        // Degenerate zero-distance pair.
        let (photon, confirm) = ent_gen(3, 4, rat(1, 2), rat(1, 2), true).unwrap();
        assert!(photon.duration.is_zero() && confirm.duration.is_zero());
        assert!(ent_gen(2, 2, rat(0, 1), rat(1, 2), true).is_err());
    }

    #[test]
    fn schedule_chaining() {
        let topo = LineTopology::with_repeaters(&[]).unwrap();
        let mut b = ScheduleBuilder::new(&topo);
        let p = b.photon(1, 0, "photons B->A");
        let m1 = b.message(0, 1, &[p], "confirm + forward");
        let m2 = b.message(1, 0, &[m1], "return");
        let s = b.finalize();
        assert_eq!(s.completion, rat(3, 1));
        s.validate_against(&topo).unwrap();
        assert_eq!(critical_path(&s), vec![p, m1, m2]);
    }

    #[test]
    fn critical_path_empty_for_local_only() {
        let topo = LineTopology::with_repeaters(&[]).unwrap();
        let mut b = ScheduleBuilder::new(&topo);
        b.local(0, &[], "nothing");
        let s = b.finalize();
        assert!(s.completion.is_zero());
        assert!(critical_path(&s).is_empty());
    }
}
