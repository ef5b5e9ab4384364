//! Egalitarian simultaneous reservation scheme.
//!
//! Picture one tower per distinct indifference class, each with a ceiling
//! that starts at height zero. Every agent climbs the tower of their current
//! class at unit rate; an agent who reaches an unfrozen ceiling pushes it
//! upward at unit rate (extra pushers do not add speed). A ceiling whose
//! lower bound can rise no further — "the set is tight" — freezes, and its
//! pushers drop to the floor of their next class's tower. Throughout, the
//! ceilings are lower bounds on the probability the final lottery must give
//! each class, and the invariant is that a lottery meeting all bounds still
//! exists. When every tower is frozen the bounds are final and a lottery
//! satisfying them is returned.
//!
//! The continuous story is realized as an exact event-driven simulation: the
//! next event is the earliest of (a) a climber reaching a non-rising ceiling
//! and (b) the rising set's freeze time, found by maximizing the uniform
//! headroom `delta` with the LP kernel. Times, heights, and ceilings are all
//! rationals, so the simulation is deterministic and exact.

use std::collections::BTreeMap;
use std::fmt;

use num::Zero;

use crate::lp::{LinearProgram, Relation, VarId};
use crate::prefs::{AgentId, AltSet, Lottery, Profile};
use crate::{rat, Rational};

/// One indifference class's reservation level.
#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    pub class: AltSet,
    pub ceiling: Rational,
    pub frozen: bool,
}

/// Where one agent is in their climb.
#[derive(Debug, Clone, PartialEq)]
pub struct ClimberState {
    pub agent: AgentId,
    /// Position in the agent's class sequence (0 = most preferred).
    pub class_index: usize,
    /// Distance climbed within the current tower.
    pub height: Rational,
    /// Currently pushing the current tower's ceiling.
    pub pushing: bool,
    /// Bounced off the last tower; contributes nothing further.
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EsrEventKind {
    /// `agent` reached the ceiling of `tower`.
    CeilingHit { agent: AgentId, tower: AltSet },
    /// `tower` became tight at `ceiling` and will never rise again.
    Freeze { tower: AltSet, ceiling: Rational },
    /// `agent` dropped to the floor of the next class's tower.
    TowerSwitch { agent: AgentId, from: AltSet, to: AltSet },
    /// All towers frozen; the bounds are final.
    Terminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsrEvent {
    pub time: Rational,
    pub kind: EsrEventKind,
}

/// The full event log of one run, in time order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EsrTrace {
    pub events: Vec<EsrEvent>,
}

impl EsrTrace {
    pub fn render(&self, profile: &Profile) -> String {
        let mut out = String::new();
        for event in &self.events {
            let line = match &event.kind {
                EsrEventKind::CeilingHit { agent, tower } => {
                    format!("agent {agent} hits {}", profile.render_set(*tower))
                }
                EsrEventKind::Freeze { tower, ceiling } => {
                    format!("{} freezes at {ceiling}", profile.render_set(*tower))
                }
                EsrEventKind::TowerSwitch { agent, from, to } => format!(
                    "agent {agent} moves from {} to {}",
                    profile.render_set(*from),
                    profile.render_set(*to)
                ),
                EsrEventKind::Terminate => "all towers frozen".to_string(),
            };
            fmt::Write::write_fmt(&mut out, format_args!("t={}: {line}\n", event.time))
                .expect("writing to string");
        }
        out
    }
}

/// Run the scheme: the selected lottery plus the event trace.
pub fn esr(profile: &Profile) -> (Lottery, EsrTrace) {
    let mut sim = Sim::new(profile);
    sim.run();
    let lottery = sim.select_lottery();
    (lottery, EsrTrace { events: sim.trace })
}

struct Sim<'a> {
    profile: &'a Profile,
    towers: Vec<Tower>,
    tower_of_class: BTreeMap<AltSet, usize>,
    climbers: Vec<ClimberState>,
    /// `classes[i]` is climber i's class sequence.
    classes: Vec<Vec<AltSet>>,
    time: Rational,
    trace: Vec<EsrEvent>,
}

impl<'a> Sim<'a> {
    fn new(profile: &'a Profile) -> Self {
        let mut tower_of_class = BTreeMap::new();
        let mut towers = Vec::new();
        let mut climbers = Vec::new();
        let mut classes = Vec::new();
        for (agent, order) in profile.orders() {
            for &class in order.classes() {
                tower_of_class.entry(class).or_insert_with(|| {
                    towers.push(Tower { class, ceiling: Rational::zero(), frozen: false });
                    towers.len() - 1
                });
            }
            climbers.push(ClimberState {
                agent,
                class_index: 0,
                height: Rational::zero(),
                pushing: false,
                done: false,
            });
            classes.push(order.classes().to_vec());
        }
        Sim { profile, towers, tower_of_class, climbers, classes, time: Rational::zero(), trace: Vec::new() }
    }

    fn emit(&mut self, kind: EsrEventKind) {
        debug_assert!(self.trace.last().is_none_or(|e| e.time <= self.time));
        self.trace.push(EsrEvent { time: self.time.clone(), kind });
    }

    fn tower_index(&self, climber: usize) -> usize {
        self.tower_of_class[&self.classes[climber][self.climbers[climber].class_index]]
    }

    /// Advance the climber to the next class (false when there is none).
    fn bounce_next(&mut self, i: usize) -> bool {
        let idx = self.climbers[i].class_index;
        if idx + 1 == self.classes[i].len() {
            self.climbers[i].done = true;
            return false;
        }
        let from = self.classes[i][idx];
        let to = self.classes[i][idx + 1];
        self.climbers[i].class_index = idx + 1;
        self.climbers[i].height = Rational::zero();
        let agent = self.climbers[i].agent;
        self.emit(EsrEventKind::TowerSwitch { agent, from, to });
        true
    }

    /// Process a climber who may be exactly at their tower's ceiling: become
    /// a pusher on an unfrozen tower, bounce past frozen ones (repeatedly —
    /// a fresh floor can coincide with a frozen zero ceiling).
    fn settle(&mut self, i: usize) {
        loop {
            if self.climbers[i].done {
                return;
            }
            let ti = self.tower_index(i);
            if self.climbers[i].height < self.towers[ti].ceiling {
                return; // strictly below: keeps climbing
            }
            debug_assert_eq!(self.climbers[i].height, self.towers[ti].ceiling);
            let agent = self.climbers[i].agent;
            self.emit(EsrEventKind::CeilingHit { agent, tower: self.towers[ti].class });
            if !self.towers[ti].frozen {
                self.climbers[i].pushing = true;
                return;
            }
            if !self.bounce_next(i) {
                return;
            }
        }
    }

    /// Indices of towers currently being pushed.
    fn rising(&self) -> Vec<usize> {
        let mut rising: Vec<usize> = self
            .climbers
            .iter()
            .enumerate()
            .filter(|(_, c)| c.pushing && !c.done)
            .map(|(i, _)| self.tower_index(i))
            .collect();
        rising.sort_unstable();
        rising.dedup();
        rising
    }

    /// Largest uniform rise `delta` of the given towers that keeps the bound
    /// system `{p >= 0, sum p = 1, p(E) >= ceiling(E) (+ delta on rising)}`
    /// feasible.
    fn max_delta(&self, rising: &[usize]) -> Rational {
        assert!(!rising.is_empty());
        let m = self.profile.num_alts();
        let mut lp = LinearProgram::new();
        let p: Vec<VarId> = (0..m).map(|_| lp.add_var(true)).collect();
        let delta = lp.add_var(true);
        let ones: Vec<(VarId, Rational)> = p.iter().map(|&v| (v, rat(1, 1))).collect();
        lp.add_constraint(&ones, Relation::Eq, rat(1, 1));
        for (ti, tower) in self.towers.iter().enumerate() {
            let mut terms: Vec<(VarId, Rational)> =
                tower.class.iter().map(|a| (p[a], rat(1, 1))).collect();
            if rising.contains(&ti) {
                terms.push((delta, rat(-1, 1)));
            }
            lp.add_constraint(&terms, Relation::Ge, tower.ceiling.clone());
        }
        lp.set_objective(&[(delta, rat(1, 1))]);
        let (_, value) = self
            .lp_solve_expect(lp)
            .expect("bound system stays feasible, and delta <= 1 bounds the objective");
        value
    }

    fn lp_solve_expect(&self, lp: LinearProgram) -> Option<(Vec<Rational>, Rational)> {
        lp.solve().optimal()
    }

    /// The current bound system without any rise, as a feasibility probe.
    fn bounds_feasible(&self) -> bool {
        let m = self.profile.num_alts();
        let mut lp = LinearProgram::new();
        let p: Vec<VarId> = (0..m).map(|_| lp.add_var(true)).collect();
        let ones: Vec<(VarId, Rational)> = p.iter().map(|&v| (v, rat(1, 1))).collect();
        lp.add_constraint(&ones, Relation::Eq, rat(1, 1));
        for tower in &self.towers {
            let terms: Vec<(VarId, Rational)> =
                tower.class.iter().map(|a| (p[a], rat(1, 1))).collect();
            lp.add_constraint(&terms, Relation::Ge, tower.ceiling.clone());
        }
        lp.feasible().is_some()
    }

    fn run(&mut self) {
        // Everyone starts on the floor of their favorite class's tower, which
        // is also its ceiling (height zero), so the opening hits happen now.
        for i in 0..self.climbers.len() {
            self.settle(i);
        }
        debug_assert!(self.bounds_feasible());

        // Each stage either freezes a tower or graduates a climber to pusher
        // (or bounces one forward), so the stage count is bounded.
        let total_classes: usize = self.classes.iter().map(|c| c.len()).sum();
        let stage_limit = 4 * (total_classes + self.towers.len()) + 8;

        for _stage in 0.. {
            if self.towers.iter().all(|t| t.frozen) {
                self.emit(EsrEventKind::Terminate);
                return;
            }
            assert!(_stage < stage_limit, "event loop exceeded its stage bound");

            let rising = self.rising();

            // Earliest climber arrival at a non-rising ceiling. Climbers under
            // a rising ceiling chase a constant gap and never arrive.
            let mut dt_climb: Option<Rational> = None;
            for i in 0..self.climbers.len() {
                let c = &self.climbers[i];
                if c.done || c.pushing {
                    continue;
                }
                let ti = self.tower_index(i);
                if rising.contains(&ti) {
                    continue;
                }
                let gap = &self.towers[ti].ceiling - &c.height;
                debug_assert!(gap > Rational::zero(), "at-ceiling climbers were settled");
                if dt_climb.as_ref().is_none_or(|d| gap < *d) {
                    dt_climb = Some(gap);
                }
            }

            let delta_star = if rising.is_empty() { None } else { Some(self.max_delta(&rising)) };

            let dt = match (&dt_climb, &delta_star) {
                (Some(a), Some(b)) => a.min(b).clone(),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(
                    "no rising towers and no climb targets while towers remain unfrozen"
                ),
            };

            // Advance time: climbers and pushed ceilings all move at rate 1.
            self.time += &dt;
            for &ti in &rising {
                self.towers[ti].ceiling += &dt;
            }
            for c in self.climbers.iter_mut().filter(|c| !c.done) {
                c.height += &dt;
            }

            // Freezes: at the stage optimum, a rising tower freezes iff its
            // bound individually cannot rise any further.
            if delta_star.as_ref() == Some(&dt) {
                let stuck: Vec<usize> = rising
                    .iter()
                    .copied()
                    .filter(|&ti| self.max_delta(&[ti]).is_zero())
                    .collect();
                assert!(
                    !stuck.is_empty(),
                    "at the freeze optimum at least one tower must be tight"
                );
                for &ti in &stuck {
                    self.towers[ti].frozen = true;
                    let (class, ceiling) =
                        (self.towers[ti].class, self.towers[ti].ceiling.clone());
                    self.emit(EsrEventKind::Freeze { tower: class, ceiling });
                }
                for i in 0..self.climbers.len() {
                    if self.climbers[i].done || !self.climbers[i].pushing {
                        continue;
                    }
                    let ti = self.tower_index(i);
                    if stuck.contains(&ti) {
                        self.climbers[i].pushing = false;
                        if self.bounce_next(i) {
                            self.settle(i);
                        }
                    }
                }
            }

            // Climbers that just reached a static ceiling.
            for i in 0..self.climbers.len() {
                if !self.climbers[i].done && !self.climbers[i].pushing {
                    self.settle(i);
                }
            }

            debug_assert!(self.bounds_feasible(), "bound system lost feasibility");
        }
        unreachable!()
    }

    /// Deterministic selection from the final feasible set: minimize each
    /// alternative's probability in turn (alphabetical order), fixing as we
    /// go. This is a reporting convention — any feasible point would satisfy
    /// the reservation bounds.
    fn select_lottery(&self) -> Lottery {
        assert!(self.towers.iter().all(|t| t.frozen));
        let m = self.profile.num_alts();
        let mut fixed: Vec<Rational> = Vec::with_capacity(m);
        for a in 0..m {
            let mut lp = LinearProgram::new();
            let p: Vec<VarId> = (0..m).map(|_| lp.add_var(true)).collect();
            let ones: Vec<(VarId, Rational)> = p.iter().map(|&v| (v, rat(1, 1))).collect();
            lp.add_constraint(&ones, Relation::Eq, rat(1, 1));
            for tower in &self.towers {
                let terms: Vec<(VarId, Rational)> =
                    tower.class.iter().map(|x| (p[x], rat(1, 1))).collect();
                lp.add_constraint(&terms, Relation::Ge, tower.ceiling.clone());
            }
            for (b, value) in fixed.iter().enumerate() {
                lp.add_constraint(&[(p[b], rat(1, 1))], Relation::Eq, value.clone());
            }
            lp.set_objective(&[(p[a], rat(-1, 1))]);
            let (_, value) = lp.solve().optimal().expect("final bound system is feasible");
            fixed.push(-value);
        }
        let lottery = Lottery::new(fixed).expect("selection solves the simplex constraint");
        for tower in &self.towers {
            let mass = lottery.mass(tower.class).expect("tower class within domain");
            assert!(
                mass >= tower.ceiling,
                "selected lottery violates a reservation bound: {} < {}",
                mass,
                tower.ceiling
            );
        }
        lottery
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn profile(text: &str) -> Profile {
        Profile::parse(text).unwrap()
    }

    fn run(text: &str) -> (Lottery, EsrTrace, Profile) {
        let p = profile(text);
        let (lottery, trace) = esr(&p);
        (lottery, trace, p)
    }

    #[test]
    fn single_agent_locks_the_top() {
        let (lottery, trace, p) = run("1: a, b\n");
        assert_eq!(lottery, Lottery::point(0, 2));
        // Tower {a} freezes at 1; {b} then freezes at 0.
        let freezes: Vec<(String, Rational)> = trace
            .events
            .iter()
            .filter_map(|e| match &e.kind {
                EsrEventKind::Freeze { tower, ceiling } => {
                    Some((p.render_set(*tower), ceiling.clone()))
                }
                _ => None,
            })
            .collect();
        assert_eq!(
            freezes,
            vec![("{a}".to_string(), rat(1, 1)), ("{b}".to_string(), rat(0, 1))]
        );
        assert!(matches!(trace.events.last().unwrap().kind, EsrEventKind::Terminate));
    }

    #[test]
    fn opposite_pairs_split_evenly() {
        let (lottery, _, _) = run("1: a, b\n2: a, b\n3: b, a\n4: b, a\n");
        assert_eq!(lottery.probs(), &[rat(1, 2), rat(1, 2)]);
        // Same without the fourth agent.
        let (lottery, _, _) = run("1: a, b\n2: a, b\n3: b, a\n");
        assert_eq!(lottery.probs(), &[rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn two_opposite_agents_split_evenly() {
        let (lottery, trace, _) = run("1: a, b\n2: b, a\n");
        assert_eq!(lottery.probs(), &[rat(1, 2), rat(1, 2)]);
        // Both towers freeze simultaneously at 1/2.
        let freeze_times: Vec<Rational> = trace
            .events
            .iter()
            .filter_map(|e| match &e.kind {
                EsrEventKind::Freeze { .. } => Some(e.time.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(freeze_times, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn indifferent_agent_reserves_the_whole_class() {
        // Tower {a,b} freezes only at 1; the lottery just needs the simplex.
        let (lottery, _, _) = run("1: {a,b}\n");
        // Selection minimizes a first: all mass ends on b.
        assert_eq!(lottery.probs(), &[rat(0, 1), rat(1, 1)]);
    }

    #[test]
    fn shared_tower_rises_at_unit_rate() {
        // Two agents push {a} together: it still freezes at 1 at time 1,
        // not faster.
        let (lottery, trace, _) = run("1: a, b\n2: a, b\n");
        assert_eq!(lottery, Lottery::point(0, 2));
        let freeze_a = trace
            .events
            .iter()
            .find_map(|e| match &e.kind {
                EsrEventKind::Freeze { ceiling, .. } if !ceiling.is_zero() => {
                    Some(e.time.clone())
                }
                _ => None,
            })
            .expect("a freeze at positive height");
        assert_eq!(freeze_a, rat(1, 1));
    }

    #[test]
    fn trace_times_are_nondecreasing_and_terminate_is_last() {
        let (_, trace, _) = run("1: {a,b}, c\n2: c, b, a\n3: c, b, a\n");
        let times: Vec<Rational> = trace.events.iter().map(|e| e.time.clone()).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
        let terminate_count = trace
            .events
            .iter()
            .filter(|e| matches!(e.kind, EsrEventKind::Terminate))
            .count();
        assert_eq!(terminate_count, 1);
        assert!(matches!(trace.events.last().unwrap().kind, EsrEventKind::Terminate));
    }

    #[test]
    fn frozen_short_tower_is_climbed_then_bounced() {
        // Agent 2's favorite freezes while agent 2 still benefits: check a
        // climber bounces across a frozen tower and pushes the next one.
        let (lottery, trace, p) = run("1: a, {b,c}\n2: b, {a,c}\n");
        // Both {a} and {b} freeze at 1/2; then the second-class towers freeze
        // at zero; final lottery is 1/2 a + 1/2 b.
        assert_eq!(lottery.probs(), &[rat(1, 2), rat(1, 2), rat(0, 1)]);
        let text = trace.render(&p);
        assert!(text.contains("agent 1 moves from {a} to {b,c}"), "{text}");
        assert!(text.ends_with("all towers frozen\n"), "{text}");
    }

    #[test]
    fn rendered_trace_uses_exact_times() {
        let (_, trace, p) = run("1: a, b\n2: b, a\n");
        let text = trace.render(&p);
        assert!(text.contains("t=1/2: {a} freezes at 1/2"), "{text}");
        assert!(text.contains("t=0: agent 1 hits {a}"), "{text}");
    }
}
