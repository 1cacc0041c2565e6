//! Draft mechanisms: in every round the agents, in that round's priority
//! order, each take their favourite remaining object.
//!
//! Pooled instances run `K` rounds over the whole object pool. Periodic
//! instances run one round per period, drawing only from that period.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{AgentId, Allocation, Instance, ObjectId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    /// The base order in every round.
    SerialDictatorship,
    /// Base order in odd rounds, reversed in even rounds.
    AlternatingSd,
    /// Each round moves the previous round's first agent to the back.
    Fifo,
    /// Serial dictatorship over a base order shuffled from the seed.
    Random { seed: u64 },
    /// Caller-supplied order for every round.
    Explicit,
}

impl ScheduleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKind::SerialDictatorship => "sd",
            ScheduleKind::AlternatingSd => "alternating",
            ScheduleKind::Fifo => "fifo",
            ScheduleKind::Random { .. } => "random",
            ScheduleKind::Explicit => "explicit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DraftError {
    #[error("order {0:?} is not a permutation of the agents")]
    InvalidPermutation(Vec<AgentId>),
    #[error("schedule has {found} rounds, instance needs {expected}")]
    ScheduleLengthMismatch { found: usize, expected: usize },
    #[error("schedule orders {found} agents, instance has {expected}")]
    AgentCountMismatch { found: usize, expected: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrioritySchedule {
    kind: ScheduleKind,
    base_order: Vec<AgentId>,
    rounds: Vec<Vec<AgentId>>,
}

fn check_permutation(order: &[AgentId]) -> Result<(), DraftError> {
    let mut seen = vec![false; order.len()];
    for &a in order {
        match seen.get_mut(a) {
            Some(s) if !*s => *s = true,
            _ => return Err(DraftError::InvalidPermutation(order.to_vec())),
        }
    }
    Ok(())
}

/// Materializes the per-round orders for `rounds` rounds.
pub fn make_schedule(
    kind: ScheduleKind,
    base_order: Vec<AgentId>,
    rounds: usize,
) -> Result<PrioritySchedule, DraftError> {
    check_permutation(&base_order)?;
    let mut base = base_order;
    if let ScheduleKind::Random { seed } = kind {
        base.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut orders = Vec::with_capacity(rounds);
    let mut current = base.clone();
    for r in 0..rounds {
        let order = match kind {
            ScheduleKind::SerialDictatorship | ScheduleKind::Random { .. } | ScheduleKind::Explicit => {
                base.clone()
            }
            ScheduleKind::AlternatingSd if r % 2 == 1 => base.iter().rev().copied().collect(),
            ScheduleKind::AlternatingSd => base.clone(),
            ScheduleKind::Fifo => {
                if r > 0 && !current.is_empty() {
                    current.rotate_left(1);
                }
                current.clone()
            }
        };
        orders.push(order);
    }
    Ok(PrioritySchedule { kind, base_order: base, rounds: orders })
}

impl PrioritySchedule {
    /// A schedule given round by round.
    pub fn explicit(rounds: Vec<Vec<AgentId>>) -> Result<PrioritySchedule, DraftError> {
        for order in &rounds {
            check_permutation(order)?;
            if order.len() != rounds[0].len() {
                return Err(DraftError::InvalidPermutation(order.clone()));
            }
        }
        Ok(PrioritySchedule {
            kind: ScheduleKind::Explicit,
            base_order: rounds.first().cloned().unwrap_or_default(),
            rounds,
        })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// The order used in round one (after shuffling, for random schedules).
    pub fn base_order(&self) -> &[AgentId] {
        &self.base_order
    }

    pub fn rounds(&self) -> &[Vec<AgentId>] {
        &self.rounds
    }

    pub fn seed(&self) -> Option<u64> {
        match self.kind {
            ScheduleKind::Random { seed } => Some(seed),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pick {
    pub round: usize,
    pub position: usize,
    pub agent: AgentId,
    pub object: ObjectId,
    /// Objects still available in the round's pool before this pick.
    pub remaining: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PickTrace {
    pub schedule: ScheduleKind,
    pub seed: Option<u64>,
    pub picks: Vec<Pick>,
}

/// Runs the draft. Each pick is the agent's highest-utility remaining object,
/// lowest id on ties.
pub fn run_draft(
    instance: &Instance,
    schedule: &PrioritySchedule,
) -> Result<(Allocation, PickTrace), DraftError> {
    let n = instance.agent_count();
    let expected = instance.bundle_size();
    if schedule.rounds.len() != expected {
        return Err(DraftError::ScheduleLengthMismatch { found: schedule.rounds.len(), expected });
    }
    if let Some(order) = schedule.rounds.iter().find(|o| o.len() != n) {
        return Err(DraftError::AgentCountMismatch { found: order.len(), expected: n });
    }

    let mut taken = vec![false; instance.object_count()];
    let mut owners = vec![0; instance.object_count()];
    let mut picks = Vec::with_capacity(instance.object_count());
    let mut pool_left = if instance.is_periodic() { n } else { instance.object_count() };
    for (round, order) in schedule.rounds.iter().enumerate() {
        let period = instance.periods().map(|_| round);
        if period.is_some() {
            pool_left = n;
        }
        for (position, &agent) in order.iter().enumerate() {
            let object = *instance
                .profile()
                .ranking(agent)
                .iter()
                .find(|o| !taken[o.0] && period.is_none_or(|t| instance.period_of(**o) == Some(t)))
                .expect("a round never runs out of objects");
            taken[object.0] = true;
            owners[object.0] = agent;
            picks.push(Pick { round, position, agent, object, remaining: pool_left });
            pool_left -= 1;
        }
    }
    let alloc = Allocation::from_owners(instance, &owners);
    let trace = PickTrace { schedule: schedule.kind, seed: schedule.seed(), picks };
    Ok((alloc, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{check_ef1, check_swap_ef};
    use crate::model::ids;

    #[test]
    fn alternating_reverses_even_rounds() {
        let s = make_schedule(ScheduleKind::AlternatingSd, vec![0, 1, 2], 3).unwrap();
        assert_eq!(s.rounds(), &[vec![0, 1, 2], vec![2, 1, 0], vec![0, 1, 2]]);
    }

    #[test]
    fn fifo_rotates() {
        let s = make_schedule(ScheduleKind::Fifo, vec![0, 1, 2], 3).unwrap();
        assert_eq!(s.rounds(), &[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]);
    }

    #[test]
    fn single_agent_schedule_is_constant() {
        let s = make_schedule(ScheduleKind::SerialDictatorship, vec![0], 4).unwrap();
        assert!(s.rounds().iter().all(|o| o == &[0]));
    }

    #[test]
    fn random_is_seeded() {
        let a = make_schedule(ScheduleKind::Random { seed: 11 }, vec![0, 1, 2, 3, 4], 2).unwrap();
        let b = make_schedule(ScheduleKind::Random { seed: 11 }, vec![0, 1, 2, 3, 4], 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rounds()[0], a.rounds()[1]);
        assert_eq!(a.seed(), Some(11));
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(matches!(
            make_schedule(ScheduleKind::Fifo, vec![0, 0, 2], 1),
            Err(DraftError::InvalidPermutation(_))
        ));
        assert!(PrioritySchedule::explicit(vec![vec![0, 1], vec![1, 3]]).is_err());
    }

    #[test]
    fn sd_inefficiency_example() {
        let inst = Instance::pooled(vec![vec![10, 9, 5, 4, 1, 0], vec![20, 4, 3, 2, 1, 0]]).unwrap();
        let s = make_schedule(ScheduleKind::SerialDictatorship, vec![0, 1], 3).unwrap();
        let (alloc, trace) = run_draft(&inst, &s).unwrap();
        assert_eq!(alloc.bundle(0), &ids(&[0, 2, 4])[..]);
        assert_eq!(alloc.bundle(1), &ids(&[1, 3, 5])[..]);
        let v = alloc.values(&inst);
        assert_eq!((v[0].to_integer(), v[1].to_integer()), (16.into(), 6.into()));
        assert_eq!(trace.picks.len(), 6);
        assert_eq!(trace.picks[0].remaining, 6);
        assert_eq!(trace.picks[5].remaining, 1);
    }

    #[test]
    fn schedule_length_must_match() {
        let inst = Instance::pooled(vec![vec![1, 2], vec![2, 1]]).unwrap();
        let s = make_schedule(ScheduleKind::SerialDictatorship, vec![0, 1], 2).unwrap();
        assert_eq!(
            run_draft(&inst, &s).unwrap_err(),
            DraftError::ScheduleLengthMismatch { found: 2, expected: 1 }
        );
    }

    #[test]
    fn two_period_alternating_is_ef1_and_swap_ef() {
        let inst = Instance::periodic(vec![
            vec![vec![9, 1, 0], vec![8, 2, 1]],
            vec![vec![9, 5, 4], vec![1, 7, 3]],
            vec![vec![3, 3, 3], vec![6, 6, 0]],
        ])
        .unwrap();
        let s = make_schedule(ScheduleKind::AlternatingSd, vec![0, 1, 2], 2).unwrap();
        let (alloc, trace) = run_draft(&inst, &s).unwrap();
        assert!(trace.picks.iter().all(|p| inst.period_of(p.object) == Some(p.round)));
        for i in 0..3 {
            for j in 0..3 {
                assert!(check_ef1(&inst, &alloc, i, j).holds());
                assert!(check_swap_ef(&inst, &alloc, i, j).holds());
            }
        }
    }
}
