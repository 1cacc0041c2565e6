//! Instances, utility profiles, allocations and bundle valuation.
//!
//! Two structures are supported. A *pooled* instance has `m = n·K` objects
//! and every agent ends up with `K` of them. A *periodic* instance has `T`
//! periods with exactly `n` objects each; every agent consumes one object per
//! period, and each period carries an implicit null object worth zero.
//!
//! Object ids are global. In a periodic instance the objects of period `t`
//! occupy ids `t·n .. (t+1)·n`.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact nonnegative utility / welfare value.
pub type Rational = BigRational;

/// Index of an agent, `0..n`.
pub type AgentId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(pub usize);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// `object_count = n · per_agent`.
    Pooled { object_count: usize, per_agent: usize },
    /// `periods` periods with `n` objects each.
    Periodic { periods: usize },
}

/// Unvalidated instance description, as read from a file or built in code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawInstance {
    pub agents: Vec<String>,
    pub structure: RawStructure,
    /// One row per agent over all objects, in global object order.
    pub utilities: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawStructure {
    Pooled { objects: Vec<String> },
    /// Object labels per period.
    Periodic { periods: Vec<Vec<String>> },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InstanceIssue {
    #[error("instance has no agents")]
    NoAgents,
    #[error("periodic instance has no periods")]
    NoPeriods,
    #[error("{objects} objects cannot be split evenly among {agents} agents")]
    NonEqualNumber { objects: usize, agents: usize },
    #[error("agent `{agent}` has negative utility for object `{object}`")]
    NegativeUtility { agent: String, object: String },
    #[error("period {period} has {found} objects, expected {expected}")]
    PeriodSizeMismatch { period: usize, found: usize, expected: usize },
    #[error("duplicate object id `{label}`")]
    DuplicateObjectId { label: String },
    #[error("duplicate agent id `{label}`")]
    DuplicateAgentId { label: String },
    #[error("utility row {row} has {found} entries, expected {expected}")]
    UtilityShape { row: usize, found: usize, expected: usize },
    #[error("{found} utility rows for {expected} agents")]
    UtilityRows { found: usize, expected: usize },
    #[error("utilities of agent `{agent}` exceed the exact integer range")]
    UtilityOverflow { agent: String },
}

/// Every problem found while validating an instance.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid instance: {}", join_issues(.issues))]
pub struct InstanceError {
    pub issues: Vec<InstanceIssue>,
}

fn join_issues(issues: &[InstanceIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

impl InstanceError {
    pub fn contains(&self, pred: impl Fn(&InstanceIssue) -> bool) -> bool {
        self.issues.iter().any(pred)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("bundle does not match the instance structure: {0}")]
    PeriodMismatch(String),
    #[error("object {0} is allocated more than once")]
    ObjectReused(ObjectId),
    #[error("object {0} is not allocated")]
    ObjectUnallocated(ObjectId),
    #[error("agent {agent} holds {found} objects, expected {expected}")]
    CardinalityViolation { agent: AgentId, found: usize, expected: usize },
    #[error("{found} bundles for {expected} agents")]
    BundleCount { found: usize, expected: usize },
}

/// Per-agent additive utilities.
///
/// Alongside the exact rationals the profile keeps every utility scaled by the
/// common denominator as an `i64`, so hot loops compare integers while staying
/// exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtilityProfile {
    utilities: Vec<Vec<Rational>>,
    scale: i64,
    scaled: Vec<Vec<i64>>,
    rankings: Vec<Vec<ObjectId>>,
}

impl UtilityProfile {
    pub fn utility(&self, agent: AgentId, object: ObjectId) -> &Rational {
        &self.utilities[agent][object.0]
    }

    pub fn row(&self, agent: AgentId) -> &[Rational] {
        &self.utilities[agent]
    }

    /// Objects in descending utility for `agent`, ties by ascending id.
    pub fn ranking(&self, agent: AgentId) -> &[ObjectId] {
        &self.rankings[agent]
    }

    /// Common denominator of all utilities.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// `utility · scale`, always an integer.
    pub fn scaled(&self, agent: AgentId, object: ObjectId) -> i64 {
        self.scaled[agent][object.0]
    }

    pub fn scaled_row(&self, agent: AgentId) -> &[i64] {
        &self.scaled[agent]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<String>,
    structure: Structure,
    objects: Vec<String>,
    profile: UtilityProfile,
}

/// Validates a raw description into an [`Instance`], collecting every issue.
pub fn validate_instance(raw: RawInstance) -> Result<Instance, InstanceError> {
    let mut issues = Vec::new();
    let n = raw.agents.len();
    if n == 0 {
        issues.push(InstanceIssue::NoAgents);
    }
    let mut seen = HashSet::new();
    for a in &raw.agents {
        if !seen.insert(a.as_str()) {
            issues.push(InstanceIssue::DuplicateAgentId { label: a.clone() });
        }
    }

    let (structure, objects) = match raw.structure {
        RawStructure::Pooled { objects } => {
            let m = objects.len();
            let mut seen = HashSet::new();
            for o in &objects {
                if !seen.insert(o.as_str()) {
                    issues.push(InstanceIssue::DuplicateObjectId { label: o.clone() });
                }
            }
            if n > 0 && (m == 0 || m % n != 0) {
                issues.push(InstanceIssue::NonEqualNumber { objects: m, agents: n });
            }
            let per_agent = m.checked_div(n).unwrap_or(0);
            (Structure::Pooled { object_count: m, per_agent }, objects)
        }
        RawStructure::Periodic { periods } => {
            if periods.is_empty() {
                issues.push(InstanceIssue::NoPeriods);
            }
            let mut flat = Vec::new();
            for (t, labels) in periods.iter().enumerate() {
                if labels.len() != n {
                    issues.push(InstanceIssue::PeriodSizeMismatch {
                        period: t,
                        found: labels.len(),
                        expected: n,
                    });
                }
                let mut seen = HashSet::new();
                for o in labels {
                    if !seen.insert(o.as_str()) {
                        issues.push(InstanceIssue::DuplicateObjectId { label: o.clone() });
                    }
                }
                flat.extend(labels.iter().cloned());
            }
            (Structure::Periodic { periods: periods.len() }, flat)
        }
    };

    if raw.utilities.len() != n {
        issues.push(InstanceIssue::UtilityRows { found: raw.utilities.len(), expected: n });
    }
    for (row, us) in raw.utilities.iter().enumerate() {
        if us.len() != objects.len() {
            issues.push(InstanceIssue::UtilityShape {
                row,
                found: us.len(),
                expected: objects.len(),
            });
            continue;
        }
        for (o, u) in us.iter().enumerate() {
            if u.is_negative() {
                issues.push(InstanceIssue::NegativeUtility {
                    agent: raw.agents.get(row).cloned().unwrap_or_else(|| row.to_string()),
                    object: objects[o].clone(),
                });
            }
        }
    }
    if !issues.is_empty() {
        return Err(InstanceError { issues });
    }

    match build_profile(raw.utilities, &raw.agents) {
        Ok(profile) => Ok(Instance { agents: raw.agents, structure, objects, profile }),
        Err(issue) => Err(InstanceError { issues: vec![issue] }),
    }
}

// Per-agent totals stay below this so that swap comparisons (at most two
// bundle totals added together) cannot overflow.
const SCALED_TOTAL_LIMIT: i64 = i64::MAX / 4;

fn build_profile(
    utilities: Vec<Vec<Rational>>,
    agents: &[String],
) -> Result<UtilityProfile, InstanceIssue> {
    let mut denom = BigInt::from(1);
    for u in utilities.iter().flatten() {
        denom = denom.lcm(u.denom());
    }
    let overflow = |agent: usize| InstanceIssue::UtilityOverflow { agent: agents[agent].clone() };
    let scale = denom.to_i64().ok_or_else(|| overflow(0))?;
    let mut scaled = Vec::with_capacity(utilities.len());
    for (agent, row) in utilities.iter().enumerate() {
        let mut total: i64 = 0;
        let mut out = Vec::with_capacity(row.len());
        for u in row {
            let v = (u * &denom).to_integer().to_i64().ok_or_else(|| overflow(agent))?;
            total = total.checked_add(v).ok_or_else(|| overflow(agent))?;
            out.push(v);
        }
        if total > SCALED_TOTAL_LIMIT {
            return Err(overflow(agent));
        }
        scaled.push(out);
    }
    let rankings = scaled
        .iter()
        .map(|row: &Vec<i64>| {
            let mut order: Vec<ObjectId> = (0..row.len()).map(ObjectId).collect();
            order.sort_by(|a, b| row[b.0].cmp(&row[a.0]).then(a.0.cmp(&b.0)));
            order
        })
        .collect();
    Ok(UtilityProfile { utilities, scale, scaled, rankings })
}

impl Instance {
    /// Pooled instance with integer utilities and default labels `o1..om`.
    pub fn pooled(utilities: Vec<Vec<i64>>) -> Result<Instance, InstanceError> {
        let n = utilities.len();
        let m = utilities.first().map_or(0, Vec::len);
        validate_instance(RawInstance {
            agents: default_agent_labels(n),
            structure: RawStructure::Pooled { objects: (1..=m).map(|k| format!("o{k}")).collect() },
            utilities: utilities.into_iter().map(int_row).collect(),
        })
    }

    /// Periodic instance with integer utilities indexed `[agent][period][object]`
    /// and default labels `t1.o1`, ...
    pub fn periodic(utilities: Vec<Vec<Vec<i64>>>) -> Result<Instance, InstanceError> {
        let n = utilities.len();
        let periods: Vec<Vec<String>> = utilities
            .first()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(t, objs)| {
                        (1..=objs.len()).map(|k| format!("t{}.o{k}", t + 1)).collect()
                    })
                    .collect()
            })
            .unwrap_or_default();
        validate_instance(RawInstance {
            agents: default_agent_labels(n),
            structure: RawStructure::Periodic { periods },
            utilities: utilities
                .into_iter()
                .map(|rows| int_row(rows.into_iter().flatten().collect()))
                .collect(),
        })
    }

    /// Replaces agent labels, keeping everything else.
    pub fn with_agent_labels(mut self, labels: &[&str]) -> Self {
        assert_eq!(labels.len(), self.agents.len(), "one label per agent");
        self.agents = labels.iter().map(|s| s.to_string()).collect();
        self
    }

    /// Replaces object labels (global order), keeping everything else.
    pub fn with_object_labels(mut self, labels: &[&str]) -> Self {
        assert_eq!(labels.len(), self.objects.len(), "one label per object");
        self.objects = labels.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> Range<AgentId> {
        0..self.agents.len()
    }

    pub fn agent_label(&self, agent: AgentId) -> &str {
        &self.agents[agent]
    }

    pub fn agent_labels(&self) -> &[String] {
        &self.agents
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.structure, Structure::Periodic { .. })
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.objects.len()).map(ObjectId)
    }

    pub fn object_label(&self, object: ObjectId) -> &str {
        &self.objects[object.0]
    }

    /// `K` for pooled instances, `T` for periodic ones: the number of objects
    /// each agent ends up holding.
    pub fn bundle_size(&self) -> usize {
        match self.structure {
            Structure::Pooled { per_agent, .. } => per_agent,
            Structure::Periodic { periods } => periods,
        }
    }

    /// Number of periods; `None` for pooled instances.
    pub fn periods(&self) -> Option<usize> {
        match self.structure {
            Structure::Periodic { periods } => Some(periods),
            Structure::Pooled { .. } => None,
        }
    }

    /// Objects of period `t`. Panics on pooled instances.
    pub fn period_objects(&self, t: usize) -> impl Iterator<Item = ObjectId> {
        let n = self.agent_count();
        assert!(self.is_periodic(), "pooled instances have no periods");
        (t * n..(t + 1) * n).map(ObjectId)
    }

    pub fn period_of(&self, object: ObjectId) -> Option<usize> {
        self.periods().map(|_| object.0 / self.agent_count())
    }

    pub fn profile(&self) -> &UtilityProfile {
        &self.profile
    }

    pub fn utility(&self, agent: AgentId, object: ObjectId) -> &Rational {
        self.profile.utility(agent, object)
    }

    pub fn find_agent(&self, label: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a == label)
    }

    /// Looks an object label up, restricted to one period when given.
    pub fn find_object(&self, label: &str, period: Option<usize>) -> Option<ObjectId> {
        match (period, self.is_periodic()) {
            (Some(t), true) => self.period_objects(t).find(|o| self.objects[o.0] == label),
            _ => self.objects.iter().position(|o| o == label).map(ObjectId),
        }
    }

    /// True when every agent has the same utility row.
    pub fn has_identical_preferences(&self) -> bool {
        let rows = &self.profile.utilities;
        rows.iter().all(|r| r == &rows[0])
    }

    /// Converts a scaled integer value back to an exact rational.
    pub fn unscale(&self, scaled: i64) -> Rational {
        Rational::new(BigInt::from(scaled), BigInt::from(self.profile.scale))
    }

    /// Scaled sum of `objects` for `agent`.
    pub fn scaled_value(&self, agent: AgentId, objects: &[ObjectId]) -> i64 {
        let row = self.profile.scaled_row(agent);
        objects.iter().map(|o| row[o.0]).sum()
    }

    /// The instance restricted to its first `periods` periods.
    pub fn truncate_periods(&self, periods: usize) -> Instance {
        let total = self.periods().expect("truncate_periods on a pooled instance");
        assert!(periods >= 1 && periods <= total);
        let keep = periods * self.agent_count();
        let mut raw = self.to_raw();
        if let RawStructure::Periodic { periods: labels } = &mut raw.structure {
            labels.truncate(periods);
        }
        for row in &mut raw.utilities {
            row.truncate(keep);
        }
        validate_instance(raw).expect("truncation keeps a valid instance")
    }

    pub fn to_raw(&self) -> RawInstance {
        let structure = match self.structure {
            Structure::Pooled { .. } => RawStructure::Pooled { objects: self.objects.clone() },
            Structure::Periodic { periods } => {
                let n = self.agent_count();
                RawStructure::Periodic {
                    periods: (0..periods).map(|t| self.objects[t * n..(t + 1) * n].to_vec()).collect(),
                }
            }
        };
        RawInstance {
            agents: self.agents.clone(),
            structure,
            utilities: self.profile.utilities.clone(),
        }
    }
}

fn default_agent_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("a{i}")).collect()
}

fn int_row(row: Vec<i64>) -> Vec<Rational> {
    row.into_iter().map(|v| Rational::from_integer(BigInt::from(v))).collect()
}

/// A bundle that may not be part of any feasible allocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HypotheticalBundle {
    /// Pooled instances: any set of objects.
    Set(Vec<ObjectId>),
    /// Periodic instances: one entry per period, `None` is the null object.
    Tuple(Vec<Option<ObjectId>>),
}

/// Exact additive value of `bundle` to `agent`; null entries contribute zero.
pub fn bundle_value(
    instance: &Instance,
    agent: AgentId,
    bundle: &HypotheticalBundle,
) -> Result<Rational, ModelError> {
    if agent >= instance.agent_count() {
        return Err(ModelError::UnknownAgent(agent));
    }
    let check = |o: ObjectId| {
        if o.0 < instance.object_count() {
            Ok(o)
        } else {
            Err(ModelError::UnknownObject(o))
        }
    };
    let mut total = Rational::zero();
    match (bundle, instance.structure) {
        (HypotheticalBundle::Set(objects), Structure::Pooled { .. }) => {
            let mut seen = HashSet::new();
            for &o in objects {
                check(o)?;
                if !seen.insert(o) {
                    return Err(ModelError::ObjectReused(o));
                }
                total += instance.utility(agent, o);
            }
        }
        (HypotheticalBundle::Tuple(entries), Structure::Periodic { periods }) => {
            if entries.len() != periods {
                return Err(ModelError::PeriodMismatch(format!(
                    "tuple has {} entries for {periods} periods",
                    entries.len()
                )));
            }
            for (t, entry) in entries.iter().enumerate() {
                if let Some(o) = *entry {
                    check(o)?;
                    if instance.period_of(o) != Some(t) {
                        return Err(ModelError::PeriodMismatch(format!(
                            "object {o} is not in period {t}"
                        )));
                    }
                    total += instance.utility(agent, o);
                }
            }
        }
        (HypotheticalBundle::Set(_), _) => {
            return Err(ModelError::PeriodMismatch("periodic instances take tuples".into()))
        }
        (HypotheticalBundle::Tuple(_), _) => {
            return Err(ModelError::PeriodMismatch("pooled instances take sets".into()))
        }
    }
    Ok(total)
}

/// A validated allocation.
///
/// Pooled bundles are sorted by object id. Periodic bundles hold exactly one
/// object per period, indexed by period.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    bundles: Vec<Vec<ObjectId>>,
}

impl Allocation {
    pub fn bundle(&self, agent: AgentId) -> &[ObjectId] {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[Vec<ObjectId>] {
        &self.bundles
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn into_bundles(self) -> Vec<Vec<ObjectId>> {
        self.bundles
    }

    /// Owner of every object, in object order.
    pub fn owners(&self, object_count: usize) -> Vec<AgentId> {
        let mut owners = vec![usize::MAX; object_count];
        for (agent, bundle) in self.bundles.iter().enumerate() {
            for o in bundle {
                owners[o.0] = agent;
            }
        }
        owners
    }

    /// Rebuilds an allocation from an owner vector produced by a search over
    /// feasible allocations.
    pub fn from_owners(instance: &Instance, owners: &[AgentId]) -> Allocation {
        let mut bundles = vec![Vec::new(); instance.agent_count()];
        for (o, &a) in owners.iter().enumerate() {
            bundles[a].push(ObjectId(o));
        }
        Allocation { bundles }
    }

    /// Wraps bundles as they are; for callers that build feasible
    /// allocations themselves.
    pub fn from_bundles_unchecked(bundles: Vec<Vec<ObjectId>>) -> Allocation {
        Allocation { bundles }
    }

    /// The bundle of `agent` as a hypothetical bundle of the matching shape.
    pub fn hypothetical(&self, instance: &Instance, agent: AgentId) -> HypotheticalBundle {
        if instance.is_periodic() {
            HypotheticalBundle::Tuple(self.bundles[agent].iter().copied().map(Some).collect())
        } else {
            HypotheticalBundle::Set(self.bundles[agent].clone())
        }
    }

    /// Exact bundle value of every agent for their own bundle.
    pub fn values(&self, instance: &Instance) -> Vec<Rational> {
        instance
            .agents()
            .map(|a| instance.unscale(instance.scaled_value(a, &self.bundles[a])))
            .collect()
    }

    /// The allocation of a periodic instance restricted to its first periods.
    pub fn truncate_periods(&self, periods: usize) -> Allocation {
        Allocation {
            bundles: self.bundles.iter().map(|b| b[..periods].to_vec()).collect(),
        }
    }
}

/// Validates a raw per-agent assignment: disjoint, covering, `K` objects per
/// agent (pooled) or one object per period (periodic).
pub fn validate_allocation(
    instance: &Instance,
    raw: Vec<Vec<ObjectId>>,
) -> Result<Allocation, ModelError> {
    check_partition(instance, raw, true)
}

/// Like [`validate_allocation`] but lets pooled bundles have any size.
pub fn validate_allocation_unconstrained(
    instance: &Instance,
    raw: Vec<Vec<ObjectId>>,
) -> Result<Allocation, ModelError> {
    check_partition(instance, raw, false)
}

fn check_partition(
    instance: &Instance,
    mut raw: Vec<Vec<ObjectId>>,
    equal_cardinality: bool,
) -> Result<Allocation, ModelError> {
    let n = instance.agent_count();
    if raw.len() != n {
        return Err(ModelError::BundleCount { found: raw.len(), expected: n });
    }
    let mut owner = vec![None; instance.object_count()];
    for (agent, bundle) in raw.iter().enumerate() {
        for &o in bundle {
            let slot = owner.get_mut(o.0).ok_or(ModelError::UnknownObject(o))?;
            if slot.replace(agent).is_some() {
                return Err(ModelError::ObjectReused(o));
            }
        }
    }
    if let Some(o) = owner.iter().position(Option::is_none) {
        return Err(ModelError::ObjectUnallocated(ObjectId(o)));
    }
    for bundle in &mut raw {
        bundle.sort();
    }
    match instance.structure() {
        Structure::Pooled { per_agent, .. } if equal_cardinality => {
            for (agent, bundle) in raw.iter().enumerate() {
                if bundle.len() != per_agent {
                    return Err(ModelError::CardinalityViolation {
                        agent,
                        found: bundle.len(),
                        expected: per_agent,
                    });
                }
            }
        }
        Structure::Pooled { .. } => {}
        Structure::Periodic { periods } => {
            for (agent, bundle) in raw.iter().enumerate() {
                // Sorted ids are period-major, so a bijection per period shows
                // up as exactly one id per period in order.
                let ok = bundle.len() == periods
                    && bundle.iter().enumerate().all(|(t, &o)| instance.period_of(o) == Some(t));
                if !ok {
                    return Err(ModelError::CardinalityViolation {
                        agent,
                        found: bundle.len(),
                        expected: periods,
                    });
                }
            }
        }
    }
    Ok(Allocation { bundles: raw })
}

/// Shorthand for building allocations in code.
pub fn ids(indices: &[usize]) -> Vec<ObjectId> {
    indices.iter().copied().map(ObjectId).collect()
}
