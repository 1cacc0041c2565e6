//! Brute-force ground truth.
//!
//! Everything here is plain enumeration over [`bundle_value`] with exact
//! rationals. Nothing is shared with the auditors or the welfare search, so
//! agreement between the two is evidence rather than tautology.

use std::cmp::Ordering;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::{DropWitness, ReferenceWitness, SwapWitness};
use crate::draft::{make_schedule, run_draft, ScheduleKind};
use crate::io::generate::{generate_instance, GenerateError, Shape, UtilityKind};
use crate::model::{
    bundle_value, AgentId, Allocation, HypotheticalBundle, Instance, ObjectId, Rational, Structure,
};
use crate::ttc::run_ttc_sd;
use crate::welfare::{
    check_decreasing_differences, check_increasing_on_range, maximize_nash_equal, maximize_submodular,
    SearchOptions, SubmodularWelfareSpec,
};

pub const DEFAULT_ORACLE_CAP: u128 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{count} allocations exceed the oracle cap of {cap}")]
    SearchSpaceTooLarge { count: u128, cap: u128 },
    #[error("swap bounded envy is only defined for periodic instances")]
    NotPeriodic,
    #[error("this feasible set needs a pooled instance")]
    NotPooled,
    #[error("agent {0} is out of range")]
    UnknownAgent(AgentId),
    #[error("cursor {cursor} is past the end of {count} allocations")]
    CursorOutOfRange { cursor: u128, count: u128 },
    #[error("sampler violates the hypothesis of {proposition}: {reason}")]
    HypothesisViolated { proposition: &'static str, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeasibleSet {
    EqualCardinality { agents: usize, per_agent: usize },
    PeriodicBijections { agents: usize, periods: usize },
    /// Any assignment of the pooled objects.
    Unrestricted { agents: usize, objects: usize },
}

impl FeasibleSet {
    /// The natural feasible set of an instance.
    pub fn of(instance: &Instance) -> FeasibleSet {
        let agents = instance.agent_count();
        match instance.structure() {
            Structure::Pooled { per_agent, .. } => FeasibleSet::EqualCardinality { agents, per_agent },
            Structure::Periodic { periods } => FeasibleSet::PeriodicBijections { agents, periods },
        }
    }

    pub fn unrestricted(instance: &Instance) -> Result<FeasibleSet, OracleError> {
        if instance.is_periodic() {
            return Err(OracleError::NotPooled);
        }
        Ok(FeasibleSet::Unrestricted { agents: instance.agent_count(), objects: instance.object_count() })
    }

    /// Closed-form size; saturates at `u128::MAX`.
    pub fn count(&self) -> u128 {
        match *self {
            FeasibleSet::EqualCardinality { agents, per_agent } => {
                // m!/(K!)^n as a product of binomials, which stays small
                let mut count = 1u128;
                let mut left = agents * per_agent;
                for _ in 0..agents {
                    count = count.saturating_mul(choose(left, per_agent));
                    left -= per_agent;
                }
                count
            }
            FeasibleSet::PeriodicBijections { agents, periods } => {
                let f = (1..=agents as u128).fold(1u128, |a, x| a.saturating_mul(x));
                (0..periods).fold(1u128, |a, _| a.saturating_mul(f))
            }
            FeasibleSet::Unrestricted { agents, objects } => {
                (0..objects).fold(1u128, |a, _| a.saturating_mul(agents as u128))
            }
        }
    }

    fn len(&self) -> usize {
        match *self {
            FeasibleSet::EqualCardinality { agents, per_agent } => agents * per_agent,
            FeasibleSet::PeriodicBijections { agents, periods } => agents * periods,
            FeasibleSet::Unrestricted { objects, .. } => objects,
        }
    }

    fn agents(&self) -> usize {
        match *self {
            FeasibleSet::EqualCardinality { agents, .. }
            | FeasibleSet::PeriodicBijections { agents, .. }
            | FeasibleSet::Unrestricted { agents, .. } => agents,
        }
    }
}

fn choose(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1u128, |acc, i| acc.saturating_mul(n as u128 - i) / (i + 1))
}

/// A bounded enumeration of one feasible set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationPlan {
    pub set: FeasibleSet,
    pub count: u128,
}

impl EnumerationPlan {
    pub fn new(set: FeasibleSet, cap: u128) -> Result<EnumerationPlan, OracleError> {
        let count = set.count();
        if count > cap {
            return Err(OracleError::SearchSpaceTooLarge { count, cap });
        }
        Ok(EnumerationPlan { set, count })
    }

    pub fn for_instance(instance: &Instance, cap: u128) -> Result<EnumerationPlan, OracleError> {
        EnumerationPlan::new(FeasibleSet::of(instance), cap)
    }

    /// Stream starting at the allocation with index `cursor`.
    pub fn stream_from(&self, cursor: u128) -> Result<AllocationStream, OracleError> {
        if cursor > self.count {
            return Err(OracleError::CursorOutOfRange { cursor, count: self.count });
        }
        let current = (cursor < self.count).then(|| unrank(self.set, cursor));
        Ok(AllocationStream { set: self.set, count: self.count, index: cursor, current })
    }

    pub fn stream(&self) -> AllocationStream {
        self.stream_from(0).expect("cursor zero is always valid")
    }
}

/// Every feasible allocation once, as owner vectors (`owners[object] =
/// agent`) in lexicographic order.
#[derive(Clone, Debug)]
pub struct AllocationStream {
    set: FeasibleSet,
    count: u128,
    index: u128,
    current: Option<Vec<AgentId>>,
}

impl AllocationStream {
    /// Index of the next allocation the stream yields.
    pub fn cursor(&self) -> u128 {
        self.index
    }

    pub fn remaining(&self) -> u128 {
        self.count - self.index
    }
}

impl Iterator for AllocationStream {
    type Item = Vec<AgentId>;

    fn next(&mut self) -> Option<Vec<AgentId>> {
        let out = self.current.take()?;
        self.index += 1;
        if self.index < self.count {
            let mut next = out.clone();
            advance(self.set, &mut next);
            self.current = Some(next);
        }
        Some(out)
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        v.reverse();
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("a larger element exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn advance(set: FeasibleSet, owners: &mut [AgentId]) {
    match set {
        FeasibleSet::EqualCardinality { .. } => {
            next_permutation(owners);
        }
        FeasibleSet::PeriodicBijections { agents, .. } => {
            for block in owners.chunks_mut(agents).rev() {
                if next_permutation(block) {
                    return;
                }
            }
        }
        FeasibleSet::Unrestricted { agents, .. } => {
            for slot in owners.iter_mut().rev() {
                *slot += 1;
                if *slot < agents {
                    return;
                }
                *slot = 0;
            }
        }
    }
}

fn multinomial(counts: &[usize]) -> u128 {
    let mut total = 0;
    let mut acc = 1u128;
    for &c in counts {
        total += c;
        acc = acc.saturating_mul(choose(total, c));
    }
    acc
}

fn unrank(set: FeasibleSet, mut rank: u128) -> Vec<AgentId> {
    let n = set.agents();
    let mut owners = Vec::with_capacity(set.len());
    match set {
        FeasibleSet::EqualCardinality { per_agent, .. } => {
            let mut left = vec![per_agent; n];
            for _ in 0..set.len() {
                for a in 0..n {
                    if left[a] == 0 {
                        continue;
                    }
                    left[a] -= 1;
                    let block = multinomial(&left);
                    if rank < block {
                        owners.push(a);
                        break;
                    }
                    rank -= block;
                    left[a] += 1;
                }
            }
        }
        FeasibleSet::PeriodicBijections { periods, .. } => {
            let per = (1..=n as u128).product::<u128>();
            let mut digits = vec![0u128; periods];
            for d in digits.iter_mut().rev() {
                *d = rank % per;
                rank /= per;
            }
            for mut d in digits {
                let mut pool: Vec<AgentId> = (0..n).collect();
                for k in (0..n).rev() {
                    let f = (1..=k as u128).product::<u128>();
                    owners.push(pool.remove((d / f) as usize));
                    d %= f;
                }
            }
        }
        FeasibleSet::Unrestricted { objects, .. } => {
            let mut digits = vec![0; objects];
            for d in digits.iter_mut().rev() {
                *d = (rank % n as u128) as usize;
                rank /= n as u128;
            }
            owners = digits;
        }
    }
    owners
}

/// Builds bundles from an owner vector; periodic bundles come out indexed by
/// period because objects are visited in id order.
pub fn allocation_from_owners(owners: &[AgentId], agents: usize) -> Allocation {
    let mut bundles = vec![Vec::new(); agents];
    for (o, &a) in owners.iter().enumerate() {
        bundles[a].push(ObjectId(o));
    }
    Allocation::from_bundles_unchecked(bundles)
}

/// Every feasible allocation of `instance`, in canonical order.
pub fn enumerate_allocations(
    instance: &Instance,
    cap: u128,
) -> Result<impl Iterator<Item = Allocation>, OracleError> {
    let n = instance.agent_count();
    Ok(EnumerationPlan::for_instance(instance, cap)?.stream().map(move |o| allocation_from_owners(&o, n)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Ef1,
    SwapEf,
    SwapBe,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Ef1 => "EF1",
            Property::SwapEf => "swapEF",
            Property::SwapBe => "swapBE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessSet {
    Drop(Vec<DropWitness>),
    Swap(Vec<SwapWitness>),
    Reference(Vec<ReferenceWitness>),
}

impl WitnessSet {
    pub fn len(&self) -> usize {
        match self {
            WitnessSet::Drop(w) => w.len(),
            WitnessSet::Swap(w) => w.len(),
            WitnessSet::Reference(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub property: Property,
    pub envier: AgentId,
    pub envied: AgentId,
    pub envious: bool,
    /// Empty when the pair is not envious (the vacuous case).
    pub witnesses: WitnessSet,
}

impl OracleVerdict {
    pub fn vacuous(&self) -> bool {
        !self.envious
    }

    pub fn holds(&self) -> bool {
        !self.envious || !self.witnesses.is_empty()
    }
}

fn value(instance: &Instance, agent: AgentId, bundle: HypotheticalBundle) -> Rational {
    bundle_value(instance, agent, &bundle).expect("oracle bundles are well formed")
}

fn as_bundle(instance: &Instance, objects: &[ObjectId]) -> HypotheticalBundle {
    if instance.is_periodic() {
        HypotheticalBundle::Tuple(objects.iter().copied().map(Some).collect())
    } else {
        HypotheticalBundle::Set(objects.to_vec())
    }
}

/// All witnesses of `property` for envier `i` against `j`, found without
/// pruning.
pub fn oracle_check(
    instance: &Instance,
    alloc: &Allocation,
    property: Property,
    (i, j): (AgentId, AgentId),
) -> Result<OracleVerdict, OracleError> {
    for a in [i, j] {
        if a >= instance.agent_count() {
            return Err(OracleError::UnknownAgent(a));
        }
    }
    if property == Property::SwapBe && !instance.is_periodic() {
        return Err(OracleError::NotPeriodic);
    }
    let (mine, theirs) = (alloc.bundle(i), alloc.bundle(j));
    let own = value(instance, i, as_bundle(instance, mine));
    let envious = value(instance, i, as_bundle(instance, theirs)) > own;
    let empty = match property {
        Property::Ef1 => WitnessSet::Drop(Vec::new()),
        Property::SwapEf => WitnessSet::Swap(Vec::new()),
        Property::SwapBe => WitnessSet::Reference(Vec::new()),
    };
    let verdict = |witnesses| OracleVerdict { property, envier: i, envied: j, envious, witnesses };
    if !envious {
        return Ok(verdict(empty));
    }
    let periodic = instance.is_periodic();
    let witnesses = match property {
        Property::Ef1 => {
            let mut found = Vec::new();
            for (t, &o) in theirs.iter().enumerate() {
                let (w, rest) = if periodic {
                    let mut tuple: Vec<_> = theirs.iter().copied().map(Some).collect();
                    tuple[t] = None;
                    (DropWitness::Period(t), HypotheticalBundle::Tuple(tuple))
                } else {
                    let rest = theirs.iter().copied().filter(|&x| x != o).collect();
                    (DropWitness::Object(o), HypotheticalBundle::Set(rest))
                };
                if own >= value(instance, i, rest) {
                    found.push(w);
                }
            }
            WitnessSet::Drop(found)
        }
        Property::SwapEf => {
            let mut found = Vec::new();
            for (s, &gained) in theirs.iter().enumerate() {
                for (r, &given) in mine.iter().enumerate() {
                    if periodic && r != s {
                        continue;
                    }
                    let mut left = mine.to_vec();
                    left[r] = gained;
                    let mut right = theirs.to_vec();
                    right[s] = given;
                    if value(instance, i, as_bundle(instance, &left))
                        >= value(instance, i, as_bundle(instance, &right))
                    {
                        found.push(SwapWitness { gained, given });
                    }
                }
            }
            found.sort_by_key(|w| (w.gained, w.given));
            WitnessSet::Swap(found)
        }
        Property::SwapBe => {
            let periods = instance.periods().expect("checked above");
            let n = instance.agent_count();
            let total = (0..periods).fold(1usize, |acc, _| acc * n);
            let mut found = Vec::new();
            for code in 0..total {
                let mut reference = vec![ObjectId(0); periods];
                let mut rest = code;
                for t in (0..periods).rev() {
                    reference[t] = ObjectId(t * n + rest % n);
                    rest /= n;
                }
                if value(instance, i, as_bundle(instance, &reference)) > own {
                    continue;
                }
                for t in 0..periods {
                    let mut left = reference.clone();
                    left[t] = theirs[t];
                    let mut right = theirs.to_vec();
                    right[t] = reference[t];
                    if value(instance, i, as_bundle(instance, &left))
                        >= value(instance, i, as_bundle(instance, &right))
                    {
                        found.push(ReferenceWitness { reference: reference.clone(), period: t });
                    }
                }
            }
            WitnessSet::Reference(found)
        }
    };
    Ok(verdict(witnesses))
}

/// Whether `property` holds for every ordered pair.
pub fn oracle_holds_everywhere(
    instance: &Instance,
    alloc: &Allocation,
    property: Property,
) -> Result<bool, OracleError> {
    for i in instance.agents() {
        for j in instance.agents() {
            if i != j && !oracle_check(instance, alloc, property, (i, j))?.holds() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact per-agent values of an owner vector.
pub fn owner_values(instance: &Instance, owners: &[AgentId]) -> Vec<Rational> {
    let alloc = allocation_from_owners(owners, instance.agent_count());
    instance.agents().map(|a| value(instance, a, as_bundle(instance, alloc.bundle(a)))).collect()
}

/// Maximum of `key` over a feasible set, with every maximizer in canonical
/// order.
pub fn scan_maximum<K: Ord>(
    instance: &Instance,
    set: FeasibleSet,
    cap: u128,
    mut key: impl FnMut(&[AgentId], &[Rational]) -> K,
) -> Result<(K, Vec<Allocation>), OracleError> {
    let mut best: Option<K> = None;
    let mut optima = Vec::new();
    for owners in EnumerationPlan::new(set, cap)?.stream() {
        let values = owner_values(instance, &owners);
        let k = key(&owners, &values);
        match best.as_ref().map(|b| k.cmp(b)) {
            Some(Ordering::Less) => {}
            Some(Ordering::Equal) => optima.push(allocation_from_owners(&owners, instance.agent_count())),
            _ => {
                best = Some(k);
                optima = vec![allocation_from_owners(&owners, instance.agent_count())];
            }
        }
    }
    Ok((best.expect("feasible sets are never empty"), optima))
}

/// Nash key as `(minus the number of zero values, product of positive values)`.
pub fn scan_nash_key(values: &[Rational]) -> (i64, Rational) {
    let zeros = values.iter().filter(|v| **v == Rational::from_integer(0.into())).count();
    let product = values
        .iter()
        .filter(|v| **v != Rational::from_integer(0.into()))
        .fold(Rational::from_integer(1.into()), |acc, v| acc * v);
    (-(zeros as i64), product)
}

/// Every allocation in `set` that Pareto-dominates `alloc`.
pub fn scan_dominators(
    instance: &Instance,
    alloc: &Allocation,
    set: FeasibleSet,
    cap: u128,
) -> Result<Vec<Allocation>, OracleError> {
    let current: Vec<Rational> =
        instance.agents().map(|a| value(instance, a, as_bundle(instance, alloc.bundle(a)))).collect();
    let mut out = Vec::new();
    for owners in EnumerationPlan::new(set, cap)?.stream() {
        let values = owner_values(instance, &owners);
        if values.iter().zip(&current).all(|(v, c)| v >= c) && values.iter().zip(&current).any(|(v, c)| v > c)
        {
            out.push(allocation_from_owners(&owners, instance.agent_count()));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Proposition {
    /// Draft mechanisms on pooled instances are EF1 and swapEF.
    P1,
    /// Alternating SD with two periods is EF1 and swapEF.
    L1a,
    /// Alternating SD with at most four periods is swapEF.
    L1b,
    /// TTC+SD is EF1 and swapBE, round by round.
    P2,
    /// With 0-1 utilities every Nash optimum is EF1, swapEF and efficient.
    P3,
    /// With identical preferences every submodular optimum is EF1, swapEF
    /// and efficient.
    P4,
}

impl Proposition {
    pub fn name(self) -> &'static str {
        match self {
            Proposition::P1 => "P1",
            Proposition::L1a => "L1a",
            Proposition::L1b => "L1b",
            Proposition::P2 => "P2",
            Proposition::P3 => "P3",
            Proposition::P4 => "P4",
        }
    }

    pub fn parse(s: &str) -> Option<Proposition> {
        [Proposition::P1, Proposition::L1a, Proposition::L1b, Proposition::P2, Proposition::P3, Proposition::P4]
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
    }
}

/// Random instance family: agent count and `K` (pooled) or `T` (periodic)
/// are drawn uniformly from the inclusive ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sampler {
    pub periodic: bool,
    pub agents: (usize, usize),
    pub size: (usize, usize),
    pub utilities: UtilityKind,
}

impl Sampler {
    /// The family the acceptance suites use for each proposition.
    pub fn default_for(proposition: Proposition) -> Sampler {
        let uniform = UtilityKind::UniformInt { lo: 0, hi: 20 };
        match proposition {
            Proposition::P1 => Sampler { periodic: false, agents: (1, 4), size: (1, 3), utilities: uniform },
            Proposition::L1a => Sampler { periodic: true, agents: (1, 4), size: (2, 2), utilities: uniform },
            Proposition::L1b => Sampler { periodic: true, agents: (1, 4), size: (3, 4), utilities: uniform },
            Proposition::P2 => Sampler { periodic: true, agents: (1, 4), size: (1, 4), utilities: uniform },
            Proposition::P3 => Sampler {
                periodic: false,
                agents: (2, 3),
                size: (1, 3),
                utilities: UtilityKind::ZeroOne { p: Rational::new(1.into(), 2.into()) },
            },
            // Values up to 2 keep the default parameters increasing for
            // three periods, and two agents give strict pairs in every period.
            Proposition::P4 => Sampler {
                periodic: true,
                agents: (2, 3),
                size: (2, 3),
                utilities: UtilityKind::IdenticalPrefs { lo: 0, hi: 2 },
            },
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Instance, GenerateError> {
        let agents = rng.random_range(self.agents.0..=self.agents.1);
        let size = rng.random_range(self.size.0..=self.size.1);
        let shape = if self.periodic {
            Shape::Periodic { agents, periods: size }
        } else {
            Shape::Pooled { agents, per_agent: size }
        };
        generate_instance(&self.utilities, shape, rng.next_u64())
    }
}

/// A proposition paired with a sampler that satisfies its hypotheses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificationPlan {
    proposition: Proposition,
    sampler: Sampler,
}

impl CertificationPlan {
    pub fn new(proposition: Proposition, sampler: Sampler) -> Result<CertificationPlan, OracleError> {
        let reject = |reason: &str| {
            Err(OracleError::HypothesisViolated { proposition: proposition.name(), reason: reason.into() })
        };
        if sampler.agents.0 == 0 || sampler.agents.0 > sampler.agents.1 {
            return reject("agent range must be non-empty and positive");
        }
        if sampler.size.0 == 0 || sampler.size.0 > sampler.size.1 {
            return reject("size range must be non-empty and positive");
        }
        let needs_periodic = !matches!(proposition, Proposition::P1 | Proposition::P3);
        if sampler.periodic != needs_periodic {
            return reject(if needs_periodic { "needs periodic instances" } else { "needs pooled instances" });
        }
        match proposition {
            Proposition::L1a if sampler.size != (2, 2) => return reject("needs exactly two periods"),
            Proposition::L1b if sampler.size.1 > 4 => return reject("holds only for at most four periods"),
            Proposition::P3 if !matches!(sampler.utilities, UtilityKind::ZeroOne { .. }) => {
                return reject("needs 0-1 utilities")
            }
            Proposition::P4 if !matches!(sampler.utilities, UtilityKind::IdenticalPrefs { .. }) => {
                return reject("needs identical preferences")
            }
            _ => {}
        }
        Ok(CertificationPlan { proposition, sampler })
    }

    pub fn proposition(&self) -> Proposition {
        self.proposition
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub sample: usize,
    pub instance: Instance,
    pub allocation: Allocation,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificationReport {
    pub proposition: Proposition,
    pub samples: usize,
    pub passed: usize,
    pub failed: usize,
    /// Samples redrawn because they fell outside the hypothesis.
    pub redrawn: usize,
    /// Individual allocation audits performed.
    pub audits: usize,
    pub first_counterexample: Option<Counterexample>,
}

/// Seed of sample `index`; independent of how samples are split over workers.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

struct SampleOutcome {
    redrawn: usize,
    audits: usize,
    failure: Option<Counterexample>,
}

const MAX_REDRAWS: usize = 1000;

fn certify_sample(plan: &CertificationPlan, index: usize, seed: u64) -> SampleOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, index));
    let mut redrawn = 0;
    loop {
        let instance = plan.sampler.draw(&mut rng).expect("validated sampler parameters");
        match certify_instance(plan.proposition, &instance, &mut rng) {
            Some((audits, failure)) => {
                let failure = failure.map(|(allocation, detail)| Counterexample {
                    sample: index,
                    instance: instance.clone(),
                    allocation,
                    detail,
                });
                return SampleOutcome { redrawn, audits, failure };
            }
            None if redrawn < MAX_REDRAWS => redrawn += 1,
            None => {
                return SampleOutcome {
                    redrawn,
                    audits: 0,
                    failure: Some(Counterexample {
                        sample: index,
                        allocation: allocation_from_owners(&[], 0),
                        instance,
                        detail: "sampler never met the hypothesis".into(),
                    }),
                }
            }
        }
    }
}

type Finding = Option<(Allocation, String)>;

fn require(instance: &Instance, alloc: &Allocation, properties: &[Property], what: &str) -> Finding {
    for &p in properties {
        if !oracle_holds_everywhere(instance, alloc, p).expect("small sampled instances") {
            return Some((alloc.clone(), format!("{what} fails {}", p.name())));
        }
    }
    None
}

/// `None` when the instance is outside the hypothesis and must be redrawn.
fn certify_instance(
    proposition: Proposition,
    instance: &Instance,
    rng: &mut ChaCha8Rng,
) -> Option<(usize, Finding)> {
    let n = instance.agent_count();
    let base: Vec<AgentId> = (0..n).collect();
    let rounds = instance.bundle_size();
    let mut audits = 0;
    let mut check = |alloc: &Allocation, props: &[Property], what: &str| {
        audits += 1;
        require(instance, alloc, props, what)
    };
    let finding = match proposition {
        Proposition::P1 => {
            let kinds = [
                ScheduleKind::SerialDictatorship,
                ScheduleKind::AlternatingSd,
                ScheduleKind::Fifo,
                ScheduleKind::Random { seed: rng.next_u64() },
            ];
            kinds.into_iter().find_map(|kind| {
                let name = kind.name();
                let schedule = make_schedule(kind, base.clone(), rounds).expect("identity order");
                let (alloc, _) = run_draft(instance, &schedule).expect("schedule fits");
                check(&alloc, &[Property::Ef1, Property::SwapEf], &format!("{name} draft"))
            })
        }
        Proposition::L1a | Proposition::L1b => {
            let schedule = make_schedule(ScheduleKind::AlternatingSd, base, rounds).expect("identity order");
            let (alloc, _) = run_draft(instance, &schedule).expect("schedule fits");
            let props: &[Property] =
                if proposition == Proposition::L1a { &[Property::Ef1, Property::SwapEf] } else { &[Property::SwapEf] };
            check(&alloc, props, "alternating draft")
        }
        Proposition::P2 => {
            let (alloc, trace) = run_ttc_sd(instance, &base).expect("periodic instance");
            let mut finding = None;
            for round in &trace.rounds {
                let t = round.period + 1;
                let partial = allocation_from_owners_periodic(&round.bundles);
                let truncated = instance.truncate_periods(t);
                audits += 1;
                if let Some((a, d)) = require(&truncated, &partial, &[Property::Ef1, Property::SwapBe], "TTC+SD")
                {
                    finding = Some((a, format!("{d} after round {t}")));
                    break;
                }
            }
            if finding.is_none() && alloc.bundles() != trace.rounds.last().map(|r| &r.bundles[..]).unwrap_or(&[]) {
                finding = Some((alloc, "final allocation differs from the last round".into()));
            }
            finding
        }
        Proposition::P3 => {
            let result = maximize_nash_equal(instance, SearchOptions::default()).expect("small instance");
            let crate::welfare::WelfareValue::Nash(key) = &result.value else { unreachable!() };
            if key.zero_count > 0 {
                return None;
            }
            let set = FeasibleSet::of(instance);
            result.optima.iter().find_map(|alloc| {
                check(alloc, &[Property::Ef1, Property::SwapEf], "Nash optimum").or_else(|| {
                    let dominated = !scan_dominators(instance, alloc, set, DEFAULT_ORACLE_CAP)
                        .expect("small instance")
                        .is_empty();
                    dominated.then(|| (alloc.clone(), "Nash optimum is Pareto dominated".into()))
                })
            })
        }
        Proposition::P4 => {
            let spec = SubmodularWelfareSpec::default_for(instance.periods().expect("periodic"));
            if check_increasing_on_range(&spec, instance).is_err() {
                return None;
            }
            if let Err(v) = check_decreasing_differences(&spec, instance, 1000, rng.next_u64()) {
                let alloc = allocation_from_owners(&[], 0);
                return Some((0, Some((alloc, format!("decreasing differences fail: {v:?}")))));
            }
            let result = maximize_submodular(instance, &spec, SearchOptions::default()).expect("small instance");
            let set = FeasibleSet::of(instance);
            result.optima.iter().find_map(|alloc| {
                check(alloc, &[Property::Ef1, Property::SwapEf], "submodular optimum").or_else(|| {
                    let dominated = !scan_dominators(instance, alloc, set, DEFAULT_ORACLE_CAP)
                        .expect("small instance")
                        .is_empty();
                    dominated.then(|| (alloc.clone(), "submodular optimum is Pareto dominated".into()))
                })
            })
        }
    };
    Some((audits, finding))
}

fn allocation_from_owners_periodic(bundles: &[Vec<ObjectId>]) -> Allocation {
    Allocation::from_bundles_unchecked(bundles.to_vec())
}

/// Runs the proposition's mechanism or optimizer on `samples` random
/// instances and audits every output with [`oracle_check`].
pub fn certify_proposition(
    plan: &CertificationPlan,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CertificationReport {
    let workers = workers.clamp(1, samples.max(1));
    let mut outcomes: Vec<(usize, SampleOutcome)> = if workers == 1 {
        (0..samples).map(|k| (k, certify_sample(plan, k, seed))).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    scope.spawn(move || {
                        (w..samples).step_by(workers).map(|k| (k, certify_sample(plan, k, seed))).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
        })
    };
    outcomes.sort_by_key(|(k, _)| *k);
    let mut report = CertificationReport {
        proposition: plan.proposition,
        samples,
        passed: 0,
        failed: 0,
        redrawn: 0,
        audits: 0,
        first_counterexample: None,
    };
    for (_, o) in outcomes {
        report.redrawn += o.redrawn;
        report.audits += o.audits;
        match o.failure {
            None => report.passed += 1,
            Some(c) => {
                report.failed += 1;
                report.first_counterexample.get_or_insert(c);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ids, validate_allocation};

    fn count(set: FeasibleSet) -> usize {
        EnumerationPlan::new(set, u128::MAX).unwrap().stream().count()
    }

    #[test]
    fn closed_form_counts() {
        assert_eq!(FeasibleSet::EqualCardinality { agents: 2, per_agent: 1 }.count(), 2);
        assert_eq!(FeasibleSet::EqualCardinality { agents: 3, per_agent: 2 }.count(), 90);
        assert_eq!(FeasibleSet::PeriodicBijections { agents: 5, periods: 3 }.count(), 1_728_000);
        assert_eq!(FeasibleSet::Unrestricted { agents: 3, objects: 4 }.count(), 81);
    }

    #[test]
    fn streams_match_counts() {
        for set in [
            FeasibleSet::EqualCardinality { agents: 2, per_agent: 1 },
            FeasibleSet::EqualCardinality { agents: 3, per_agent: 2 },
            FeasibleSet::EqualCardinality { agents: 2, per_agent: 3 },
            FeasibleSet::PeriodicBijections { agents: 3, periods: 2 },
            FeasibleSet::PeriodicBijections { agents: 1, periods: 4 },
            FeasibleSet::Unrestricted { agents: 2, objects: 3 },
        ] {
            assert_eq!(count(set) as u128, set.count(), "{set:?}");
        }
    }

    #[test]
    fn stream_is_sorted_and_distinct() {
        for set in [
            FeasibleSet::EqualCardinality { agents: 3, per_agent: 2 },
            FeasibleSet::PeriodicBijections { agents: 3, periods: 2 },
        ] {
            let all: Vec<_> = EnumerationPlan::new(set, u128::MAX).unwrap().stream().collect();
            assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn cursor_restarts_mid_stream() {
        for set in [
            FeasibleSet::EqualCardinality { agents: 3, per_agent: 2 },
            FeasibleSet::PeriodicBijections { agents: 3, periods: 3 },
            FeasibleSet::Unrestricted { agents: 3, objects: 3 },
        ] {
            let plan = EnumerationPlan::new(set, u128::MAX).unwrap();
            let all: Vec<_> = plan.stream().collect();
            for cursor in [0, 1, 17, all.len() as u128 - 1, all.len() as u128] {
                let mut s = plan.stream_from(cursor).unwrap();
                assert_eq!(s.cursor(), cursor);
                let tail: Vec<_> = s.by_ref().collect();
                assert_eq!(tail, all[cursor as usize..]);
            }
            assert!(plan.stream_from(all.len() as u128 + 1).is_err());
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            EnumerationPlan::new(FeasibleSet::PeriodicBijections { agents: 5, periods: 3 }, 1000),
            Err(OracleError::SearchSpaceTooLarge { count: 1_728_000, cap: 1000 })
        );
    }

    // Objects H C B h c b; agent 0 holds the small ones.
    fn house_car_boat() -> (Instance, Allocation) {
        let row = vec![4, 2, 2, 1, 1, 1];
        let inst = Instance::pooled(vec![row.clone(), row]).unwrap();
        let alloc = validate_allocation(&inst, vec![ids(&[3, 4, 5]), ids(&[0, 1, 2])]).unwrap();
        (inst, alloc)
    }

    #[test]
    fn swap_witnesses_include_the_house_swap() {
        let (inst, alloc) = house_car_boat();
        let v = oracle_check(&inst, &alloc, Property::SwapEf, (0, 1)).unwrap();
        assert!(v.envious && v.holds());
        let WitnessSet::Swap(w) = &v.witnesses else { panic!() };
        assert!(w.contains(&SwapWitness { gained: ObjectId(0), given: ObjectId(3) }));
        assert!(!oracle_check(&inst, &alloc, Property::Ef1, (0, 1)).unwrap().holds());
    }

    #[test]
    fn non_envious_pairs_are_vacuous() {
        let (inst, alloc) = house_car_boat();
        let v = oracle_check(&inst, &alloc, Property::Ef1, (1, 0)).unwrap();
        assert!(v.vacuous() && v.holds() && v.witnesses.is_empty());
    }

    #[test]
    fn swap_be_needs_periods() {
        let (inst, alloc) = house_car_boat();
        assert_eq!(oracle_check(&inst, &alloc, Property::SwapBe, (0, 1)), Err(OracleError::NotPeriodic));
        assert_eq!(oracle_check(&inst, &alloc, Property::Ef1, (0, 7)), Err(OracleError::UnknownAgent(7)));
    }

    #[test]
    fn scan_finds_nash_optimum() {
        let inst = Instance::pooled(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let (key, optima) =
            scan_maximum(&inst, FeasibleSet::of(&inst), u128::MAX, |_, v| scan_nash_key(v)).unwrap();
        assert_eq!(key, (0, Rational::from_integer(1.into())));
        assert_eq!(optima, vec![validate_allocation(&inst, vec![ids(&[0]), ids(&[1])]).unwrap()]);
    }

    #[test]
    fn plans_reject_violated_hypotheses() {
        let mut five = Sampler::default_for(Proposition::L1b);
        five.size = (5, 5);
        assert!(matches!(
            CertificationPlan::new(Proposition::L1b, five),
            Err(OracleError::HypothesisViolated { proposition: "L1b", .. })
        ));
        let mut three = Sampler::default_for(Proposition::L1a);
        three.size = (2, 3);
        assert!(CertificationPlan::new(Proposition::L1a, three).is_err());
        assert!(CertificationPlan::new(Proposition::P3, Sampler::default_for(Proposition::P1)).is_err());
        assert!(CertificationPlan::new(Proposition::P2, Sampler::default_for(Proposition::P1)).is_err());
    }

    #[test]
    fn certification_is_split_invariant() {
        let plan = CertificationPlan::new(Proposition::P2, Sampler::default_for(Proposition::P2)).unwrap();
        let one = certify_proposition(&plan, 12, 3, 1);
        let three = certify_proposition(&plan, 12, 3, 3);
        assert_eq!(one, three);
        assert_eq!(one.passed, 12);
    }

    #[test]
    fn sample_seeds_differ() {
        assert_ne!(sample_seed(7, 0), sample_seed(7, 1));
        assert_eq!(sample_seed(7, 5), sample_seed(7, 5));
    }
}
