//! TTC+SD for periodic instances.
//!
//! Period one is allocated by serial dictatorship. Before every later period
//! the bundles held so far are traded with Top Trading Cycles; the agents
//! cleared in the last TTC step pick first from the new period, those cleared
//! in the step before pick next, and so on.

use crate::model::{AgentId, Allocation, Instance, ObjectId};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TtcError {
    #[error("TTC+SD needs a periodic instance")]
    NotPeriodic,
    #[error("no bundles to trade")]
    EmptyBundleSet,
    #[error("{found} bundles for {expected} agents")]
    BundleCount { found: usize, expected: usize },
    #[error("order {0:?} is not a permutation of the agents")]
    InvalidPermutation(Vec<AgentId>),
}

/// One TTC step: where every remaining agent pointed and who got cleared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TtcStep {
    /// `(agent, owner of the bundle it points to)` for every remaining agent.
    pub pointers: Vec<(AgentId, AgentId)>,
    /// Agents on cycles, ascending.
    pub cleared: Vec<AgentId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TtcRoundResult {
    /// Bundle held by each agent after trading.
    pub bundles: Vec<Vec<ObjectId>>,
    /// `batches[0]` was cleared first. Each batch is ascending.
    pub batches: Vec<Vec<AgentId>>,
    pub steps: Vec<TtcStep>,
}

impl TtcRoundResult {
    /// Serial-dictatorship order for the next period: last batch first,
    /// ascending within a batch.
    pub fn pick_order(&self) -> Vec<AgentId> {
        self.batches.iter().rev().flatten().copied().collect()
    }
}

/// Runs TTC over the bundles `bundles[agent]`.
///
/// Every remaining agent points to the owner of its most valuable remaining
/// bundle, preferring its own bundle and then the lowest owner on ties. All
/// cycles of a step are cleared together and form one batch.
pub fn run_ttc_round(
    instance: &Instance,
    bundles: &[Vec<ObjectId>],
) -> Result<TtcRoundResult, TtcError> {
    let n = instance.agent_count();
    if bundles.is_empty() || bundles.iter().all(Vec::is_empty) {
        return Err(TtcError::EmptyBundleSet);
    }
    if bundles.len() != n {
        return Err(TtcError::BundleCount { found: bundles.len(), expected: n });
    }
    let mut remaining: Vec<AgentId> = (0..n).collect();
    let mut result = vec![Vec::new(); n];
    let mut batches = Vec::new();
    let mut steps = Vec::new();
    while !remaining.is_empty() {
        let mut target = vec![usize::MAX; n];
        for &a in &remaining {
            let mut best = a;
            let mut best_value = instance.scaled_value(a, &bundles[a]);
            for &owner in &remaining {
                let v = instance.scaled_value(a, &bundles[owner]);
                if v > best_value {
                    best = owner;
                    best_value = v;
                }
            }
            target[a] = best;
        }
        let cleared = agents_on_cycles(&remaining, &target);
        debug_assert!(!cleared.is_empty(), "a finite functional graph always has a cycle");
        for &a in &cleared {
            result[a] = bundles[target[a]].clone();
        }
        steps.push(TtcStep {
            pointers: remaining.iter().map(|&a| (a, target[a])).collect(),
            cleared: cleared.clone(),
        });
        remaining.retain(|a| !cleared.contains(a));
        batches.push(cleared);
    }
    Ok(TtcRoundResult { bundles: result, batches, steps })
}

fn agents_on_cycles(remaining: &[AgentId], target: &[AgentId]) -> Vec<AgentId> {
    // 0 = unvisited, 1 = on the current walk, 2 = done
    let mut state = vec![0u8; target.len()];
    let mut on_cycle = Vec::new();
    for &start in remaining {
        let mut walk = Vec::new();
        let mut a = start;
        while state[a] == 0 {
            state[a] = 1;
            walk.push(a);
            a = target[a];
        }
        if state[a] == 1 {
            let from = walk.iter().position(|&w| w == a).expect("a is on the walk");
            on_cycle.extend_from_slice(&walk[from..]);
        }
        for w in walk {
            state[w] = 2;
        }
    }
    on_cycle.sort_unstable();
    on_cycle
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TtcSdRound {
    pub period: usize,
    /// Absent in period one.
    pub ttc: Option<TtcRoundResult>,
    pub order: Vec<AgentId>,
    /// `(agent, object)` in pick order.
    pub picks: Vec<(AgentId, ObjectId)>,
    /// Bundles over periods `0..=period` after the round.
    pub bundles: Vec<Vec<ObjectId>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TtcSdTrace {
    pub rounds: Vec<TtcSdRound>,
}

/// Runs TTC+SD; period one uses serial dictatorship in `initial_order`.
pub fn run_ttc_sd(
    instance: &Instance,
    initial_order: &[AgentId],
) -> Result<(Allocation, TtcSdTrace), TtcError> {
    let periods = instance.periods().ok_or(TtcError::NotPeriodic)?;
    let n = instance.agent_count();
    let mut seen = vec![false; n];
    if initial_order.len() != n || !initial_order.iter().all(|&a| a < n && !std::mem::replace(&mut seen[a], true)) {
        return Err(TtcError::InvalidPermutation(initial_order.to_vec()));
    }

    let mut bundles: Vec<Vec<ObjectId>> = vec![Vec::new(); n];
    let mut rounds = Vec::with_capacity(periods);
    for t in 0..periods {
        let (ttc, order) = if t == 0 {
            (None, initial_order.to_vec())
        } else {
            let round = run_ttc_round(instance, &bundles)?;
            bundles = round.bundles.clone();
            let order = round.pick_order();
            (Some(round), order)
        };
        let mut taken = vec![false; n];
        let mut picks = Vec::with_capacity(n);
        for &agent in &order {
            let object = *instance
                .profile()
                .ranking(agent)
                .iter()
                .find(|o| instance.period_of(**o) == Some(t) && !taken[o.0 - t * n])
                .expect("each period has one object per agent");
            taken[object.0 - t * n] = true;
            bundles[agent].push(object);
            picks.push((agent, object));
        }
        rounds.push(TtcSdRound { period: t, ttc, order, picks, bundles: bundles.clone() });
    }
    let alloc = crate::model::validate_allocation(instance, bundles)
        .expect("TTC+SD yields one object per agent per period");
    Ok((alloc, TtcSdTrace { rounds }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ids;

    fn identical(values: &[i64], periods: usize, n: usize) -> Instance {
        Instance::periodic(vec![vec![values.to_vec(); periods]; n]).unwrap()
    }

    #[test]
    fn own_bundle_wins_ties() {
        // Bundle values 101, 4, 101 for every agent.
        let inst = identical(&[100, 2, 1], 2, 3);
        let bundles = vec![ids(&[0, 5]), ids(&[1, 4]), ids(&[2, 3])];
        let r = run_ttc_round(&inst, &bundles).unwrap();
        assert_eq!(r.batches, vec![vec![0, 2], vec![1]]);
        assert_eq!(r.bundles, bundles);
        assert_eq!(r.steps[0].pointers, vec![(0, 0), (1, 0), (2, 2)]);
        assert_eq!(r.pick_order(), vec![1, 0, 2]);
    }

    #[test]
    fn favourites_already_held_is_one_batch() {
        let inst = Instance::periodic(vec![
            vec![vec![5, 1], vec![0, 0]],
            vec![vec![1, 5], vec![0, 0]],
        ])
        .unwrap();
        let r = run_ttc_round(&inst, &[ids(&[0]), ids(&[1])]).unwrap();
        assert_eq!(r.batches, vec![vec![0, 1]]);
        assert_eq!(r.bundles, vec![ids(&[0]), ids(&[1])]);
    }

    #[test]
    fn two_cycle_swaps() {
        let inst = Instance::periodic(vec![
            vec![vec![1, 5], vec![0, 0]],
            vec![vec![5, 1], vec![0, 0]],
        ])
        .unwrap();
        let r = run_ttc_round(&inst, &[ids(&[0]), ids(&[1])]).unwrap();
        assert_eq!(r.batches, vec![vec![0, 1]]);
        assert_eq!(r.bundles, vec![ids(&[1]), ids(&[0])]);
    }

    #[test]
    fn empty_bundles_are_rejected() {
        let inst = identical(&[1, 2], 1, 2);
        assert_eq!(run_ttc_round(&inst, &[vec![], vec![]]), Err(TtcError::EmptyBundleSet));
        assert_eq!(run_ttc_round(&inst, &[]), Err(TtcError::EmptyBundleSet));
    }

    #[test]
    fn identical_three_by_three() {
        let inst = identical(&[100, 2, 1], 3, 3);
        let (alloc, trace) = run_ttc_sd(&inst, &[0, 1, 2]).unwrap();
        let values: Vec<i64> = inst.agents().map(|a| inst.scaled_value(a, alloc.bundle(a))).collect();
        assert_eq!(values, vec![103, 104, 102]);
        assert_eq!(trace.rounds[1].order, vec![2, 1, 0]);
        assert_eq!(trace.rounds[2].order, vec![1, 0, 2]);
    }

    #[test]
    fn single_period_is_serial_dictatorship() {
        let inst = Instance::periodic(vec![vec![vec![3, 9, 1]], vec![vec![5, 8, 0]], vec![vec![1, 1, 7]]])
            .unwrap();
        let (alloc, trace) = run_ttc_sd(&inst, &[1, 0, 2]).unwrap();
        assert!(trace.rounds[0].ttc.is_none());
        assert_eq!(alloc.bundles(), &[ids(&[0]), ids(&[1]), ids(&[2])]);
    }

    #[test]
    fn refuses_pooled() {
        let inst = Instance::pooled(vec![vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!(run_ttc_sd(&inst, &[0, 1]).unwrap_err(), TtcError::NotPeriodic);
    }
}
