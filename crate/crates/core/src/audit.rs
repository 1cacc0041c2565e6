//! Envy-freeness, EF1, swapEF and swapBE checks with witnesses.
//!
//! All comparisons are weak: equality eliminates envy. Witnesses are the
//! first found in canonical order (ascending period, then ascending object
//! id) and are re-checked through [`bundle_value`] before [`audit`] emits
//! them.

use crate::model::{
    bundle_value, AgentId, Allocation, HypotheticalBundle, Instance, ModelError, ObjectId,
};

/// Outcome of a bounded-envy check for one ordered pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<W> {
    /// The envier does not envy; the property holds vacuously.
    NoEnvy,
    /// Envy exists and the witness bounds it.
    Bounded(W),
    /// Envy exists and no witness bounds it.
    Unbounded,
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::Unbounded)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Bounded(w) => Some(w),
            _ => None,
        }
    }
}

/// What to drop from the envied bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropWitness {
    /// Pooled: remove this object.
    Object(ObjectId),
    /// Periodic: replace this period's object by the null object.
    Period(usize),
}

/// `gained` moves from the envied bundle to the envier, `given` the other way.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwapWitness {
    pub gained: ObjectId,
    pub given: ObjectId,
}

/// Reference bundle (one real object per period) and the swap period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceWitness {
    pub reference: Vec<ObjectId>,
    pub period: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error("swap bounded envy is only defined for periodic instances")]
    NotPeriodic,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("internal error: witness for {property} on pair ({envier}, {envied}) does not re-verify")]
    UnsoundWitness { property: &'static str, envier: AgentId, envied: AgentId },
}

fn own_and_other(instance: &Instance, alloc: &Allocation, i: AgentId, j: AgentId) -> (i64, i64) {
    (instance.scaled_value(i, alloc.bundle(i)), instance.scaled_value(i, alloc.bundle(j)))
}

/// True iff `i` strictly prefers `j`'s bundle to its own.
pub fn check_envy(instance: &Instance, alloc: &Allocation, i: AgentId, j: AgentId) -> bool {
    let (own, other) = own_and_other(instance, alloc, i, j);
    other > own
}

pub fn check_ef1(
    instance: &Instance,
    alloc: &Allocation,
    i: AgentId,
    j: AgentId,
) -> Verdict<DropWitness> {
    let (own, other) = own_and_other(instance, alloc, i, j);
    if other <= own {
        return Verdict::NoEnvy;
    }
    let row = instance.profile().scaled_row(i);
    let periodic = instance.is_periodic();
    for (pos, &o) in alloc.bundle(j).iter().enumerate() {
        if own >= other - row[o.0] {
            return Verdict::Bounded(if periodic {
                DropWitness::Period(pos)
            } else {
                DropWitness::Object(o)
            });
        }
    }
    Verdict::Unbounded
}

pub fn check_swap_ef(
    instance: &Instance,
    alloc: &Allocation,
    i: AgentId,
    j: AgentId,
) -> Verdict<SwapWitness> {
    let (own, other) = own_and_other(instance, alloc, i, j);
    if other <= own {
        return Verdict::NoEnvy;
    }
    let row = instance.profile().scaled_row(i);
    let improves = |gained: ObjectId, given: ObjectId| {
        let delta = row[gained.0] - row[given.0];
        own + delta >= other - delta
    };
    if instance.is_periodic() {
        for (&gained, &given) in alloc.bundle(j).iter().zip(alloc.bundle(i)) {
            if improves(gained, given) {
                return Verdict::Bounded(SwapWitness { gained, given });
            }
        }
    } else {
        for &gained in alloc.bundle(j) {
            for &given in alloc.bundle(i) {
                if improves(gained, given) {
                    return Verdict::Bounded(SwapWitness { gained, given });
                }
            }
        }
    }
    Verdict::Unbounded
}

/// Searches reference bundles in `Π_t O_t` (no null objects) for every
/// period in ascending order, skipping partial references already worth more
/// than `i`'s own bundle.
pub fn check_swap_be(
    instance: &Instance,
    alloc: &Allocation,
    i: AgentId,
    j: AgentId,
) -> Result<Verdict<ReferenceWitness>, AuditError> {
    let periods = instance.periods().ok_or(AuditError::NotPeriodic)?;
    let (own, other) = own_and_other(instance, alloc, i, j);
    if other <= own {
        return Ok(Verdict::NoEnvy);
    }
    let search = ReferenceSearch {
        row: instance.profile().scaled_row(i),
        n: instance.agent_count(),
        periods,
        own,
        other,
        envied: alloc.bundle(j),
    };
    let mut reference = Vec::with_capacity(periods);
    for t in 0..periods {
        if search.descend(t, 0, 0, &mut reference) {
            return Ok(Verdict::Bounded(ReferenceWitness { reference, period: t }));
        }
        reference.clear();
    }
    Ok(Verdict::Unbounded)
}

struct ReferenceSearch<'a> {
    row: &'a [i64],
    n: usize,
    periods: usize,
    own: i64,
    other: i64,
    envied: &'a [ObjectId],
}

impl ReferenceSearch<'_> {
    fn descend(&self, t: usize, s: usize, running: i64, reference: &mut Vec<ObjectId>) -> bool {
        if s == self.periods {
            let r_t = self.row[reference[t].0];
            let j_t = self.row[self.envied[t].0];
            // (μ_t(j), o_-t) ≽ (o_t, μ_-t(j))
            return j_t + running - r_t >= r_t + self.other - j_t;
        }
        for k in 0..self.n {
            let o = ObjectId(s * self.n + k);
            let next = running + self.row[o.0];
            if next > self.own {
                continue;
            }
            reference.push(o);
            if self.descend(t, s + 1, next, reference) {
                return true;
            }
            reference.pop();
        }
        false
    }
}

fn exact(instance: &Instance, agent: AgentId, bundle: HypotheticalBundle) -> crate::model::Rational {
    bundle_value(instance, agent, &bundle).expect("witness bundles are well formed")
}

fn pooled_without(bundle: &[ObjectId], drop: ObjectId) -> Vec<ObjectId> {
    bundle.iter().copied().filter(|&o| o != drop).collect()
}

/// Re-checks an EF1 witness with exact rational arithmetic.
pub fn verify_ef1(
    instance: &Instance,
    alloc: &Allocation,
    i: AgentId,
    j: AgentId,
    witness: &DropWitness,
) -> bool {
    let own = exact(instance, i, alloc.hypothetical(instance, i));
    let dropped = match *witness {
        DropWitness::Object(o) => {
            if instance.is_periodic() || !alloc.bundle(j).contains(&o) {
                return false;
            }
            HypotheticalBundle::Set(pooled_without(alloc.bundle(j), o))
        }
        DropWitness::Period(t) => {
            if !instance.is_periodic() || t >= alloc.bundle(j).len() {
                return false;
            }
            let mut tuple: Vec<_> = alloc.bundle(j).iter().copied().map(Some).collect();
            tuple[t] = None;
            HypotheticalBundle::Tuple(tuple)
        }
    };
    own >= exact(instance, i, dropped)
}

/// Re-checks a swapEF witness with exact rational arithmetic.
pub fn verify_swap_ef(
    instance: &Instance,
    alloc: &Allocation,
    i: AgentId,
    j: AgentId,
    w: &SwapWitness,
) -> bool {
    let (mine, theirs) = (alloc.bundle(i), alloc.bundle(j));
    if !theirs.contains(&w.gained) || !mine.contains(&w.given) {
        return false;
    }
    let (left, right) = if instance.is_periodic() {
        let Some(t) = mine.iter().position(|&o| o == w.given) else { return false };
        if theirs[t] != w.gained {
            return false;
        }
        let mut left: Vec<_> = mine.iter().copied().map(Some).collect();
        let mut right: Vec<_> = theirs.iter().copied().map(Some).collect();
        left[t] = Some(w.gained);
        right[t] = Some(w.given);
        (HypotheticalBundle::Tuple(left), HypotheticalBundle::Tuple(right))
    } else {
        let mut left = pooled_without(mine, w.given);
        left.push(w.gained);
        let mut right = pooled_without(theirs, w.gained);
        right.push(w.given);
        (HypotheticalBundle::Set(left), HypotheticalBundle::Set(right))
    };
    exact(instance, i, left) >= exact(instance, i, right)
}

/// Re-checks a swapBE witness with exact rational arithmetic.
pub fn verify_swap_be(
    instance: &Instance,
    alloc: &Allocation,
    i: AgentId,
    j: AgentId,
    w: &ReferenceWitness,
) -> bool {
    let Some(periods) = instance.periods() else { return false };
    if w.reference.len() != periods || w.period >= periods {
        return false;
    }
    if w.reference.iter().enumerate().any(|(t, &o)| instance.period_of(o) != Some(t)) {
        return false;
    }
    let own = exact(instance, i, alloc.hypothetical(instance, i));
    let reference: Vec<_> = w.reference.iter().copied().map(Some).collect();
    if exact(instance, i, HypotheticalBundle::Tuple(reference.clone())) > own {
        return false;
    }
    let t = w.period;
    let mut left = reference;
    left[t] = Some(alloc.bundle(j)[t]);
    let mut right: Vec<_> = alloc.bundle(j).iter().copied().map(Some).collect();
    right[t] = Some(w.reference[t]);
    exact(instance, i, HypotheticalBundle::Tuple(left))
        >= exact(instance, i, HypotheticalBundle::Tuple(right))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairReport {
    pub envier: AgentId,
    pub envied: AgentId,
    pub envy: bool,
    pub ef1: Verdict<DropWitness>,
    pub swap_ef: Verdict<SwapWitness>,
    /// Present only for periodic instances.
    pub swap_be: Option<Verdict<ReferenceWitness>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FairnessReport {
    /// Every ordered pair `(i, j)` with `i != j`, in lexicographic order.
    pub pairs: Vec<PairReport>,
    pub envy_free: bool,
    pub ef1: bool,
    pub swap_ef: bool,
    pub swap_be: Option<bool>,
}

impl FairnessReport {
    pub fn pair(&self, envier: AgentId, envied: AgentId) -> Option<&PairReport> {
        self.pairs.iter().find(|p| p.envier == envier && p.envied == envied)
    }
}

pub fn audit_pair(
    instance: &Instance,
    alloc: &Allocation,
    i: AgentId,
    j: AgentId,
) -> Result<PairReport, AuditError> {
    let unsound = |property| AuditError::UnsoundWitness { property, envier: i, envied: j };
    let ef1 = check_ef1(instance, alloc, i, j);
    if let Some(w) = ef1.witness() {
        if !verify_ef1(instance, alloc, i, j, w) {
            return Err(unsound("EF1"));
        }
    }
    let swap_ef = check_swap_ef(instance, alloc, i, j);
    if let Some(w) = swap_ef.witness() {
        if !verify_swap_ef(instance, alloc, i, j, w) {
            return Err(unsound("swapEF"));
        }
    }
    let swap_be = if instance.is_periodic() {
        let v = check_swap_be(instance, alloc, i, j)?;
        if let Some(w) = v.witness() {
            if !verify_swap_be(instance, alloc, i, j, w) {
                return Err(unsound("swapBE"));
            }
        }
        Some(v)
    } else {
        None
    };
    Ok(PairReport { envier: i, envied: j, envy: check_envy(instance, alloc, i, j), ef1, swap_ef, swap_be })
}

/// Runs every pairwise check and aggregates per property.
pub fn audit(instance: &Instance, alloc: &Allocation) -> Result<FairnessReport, AuditError> {
    if alloc.agent_count() != instance.agent_count() {
        return Err(ModelError::BundleCount {
            found: alloc.agent_count(),
            expected: instance.agent_count(),
        }
        .into());
    }
    let mut pairs = Vec::new();
    for i in instance.agents() {
        for j in instance.agents().filter(|&j| j != i) {
            pairs.push(audit_pair(instance, alloc, i, j)?);
        }
    }
    let envy_free = pairs.iter().all(|p| !p.envy);
    let ef1 = pairs.iter().all(|p| p.ef1.holds());
    let swap_ef = pairs.iter().all(|p| p.swap_ef.holds());
    let swap_be = instance
        .is_periodic()
        .then(|| pairs.iter().all(|p| p.swap_be.as_ref().is_some_and(Verdict::holds)));
    Ok(FairnessReport { pairs, envy_free, ef1, swap_ef, swap_be })
}
