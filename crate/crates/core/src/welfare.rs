//! Exact welfare maximization by exhaustive search.
//!
//! The search walks objects in id order and tries owners in ascending order,
//! so optima come out sorted by owner vector. All optima are retained.
//! Nash welfare is compared lexicographically: fewer agents at zero utility
//! first, then the product of the positive utilities.

use std::cmp::{Ordering, Reverse};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{AgentId, Allocation, Instance, ModelError, ObjectId, Rational, Structure};

/// Default bound on the number of candidate allocations a search may visit.
pub const DEFAULT_CAP: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub cap: u128,
    /// Worker threads; the candidate space is split on the first object's owner.
    pub workers: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { cap: DEFAULT_CAP, workers: 1 }
    }
}

/// Set of allocations a search ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    /// Pooled: every agent holds exactly `K` objects.
    EqualCardinality,
    /// Periodic: one object per agent per period.
    PeriodicBijections,
    /// Pooled: any partition of the objects.
    Unrestricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Nash,
    Utilitarian,
    Submodular,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WelfareError {
    #[error("search space of {count} allocations exceeds the cap of {cap}")]
    SearchSpaceTooLarge { count: u128, cap: u128 },
    #[error("this search needs a pooled instance")]
    NotPooled,
    #[error("this search needs a periodic instance")]
    NotPeriodic,
    #[error("agents do not share one utility profile")]
    HeterogeneousPreferences,
    #[error("welfare function is not strictly increasing in period {period} over the instance's utilities")]
    NotIncreasingOnRange { period: usize },
    #[error("parameter {0} must be strictly positive")]
    NonPositiveParameter(&'static str),
    #[error("expected {expected} per-period entries, got {found}")]
    PeriodCount { found: usize, expected: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Lexicographic Nash welfare: fewer zero-utility agents is better, then a
/// larger product of the positive utilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NashKey {
    pub zero_count: usize,
    /// Product of the positive agent utilities; one when every agent is at zero.
    pub product: Rational,
}

impl Ord for NashKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other.zero_count.cmp(&self.zero_count).then_with(|| self.product.cmp(&other.product))
    }
}

impl PartialOrd for NashKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WelfareValue {
    Nash(NashKey),
    Total(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WelfareResult {
    pub objective: Objective,
    pub value: WelfareValue,
    /// Every optimum, in canonical (owner-vector) order.
    pub optima: Vec<Allocation>,
    /// Candidates visited.
    pub candidates: u128,
}

/// Nash welfare key of an allocation, in exact arithmetic.
pub fn nash_welfare(instance: &Instance, alloc: &Allocation) -> NashKey {
    let mut zero_count = 0;
    let mut product = Rational::one();
    for v in alloc.values(instance) {
        if v.is_zero() {
            zero_count += 1;
        } else {
            product *= v;
        }
    }
    NashKey { zero_count, product }
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).fold(1u128, |acc, x| acc.saturating_mul(x))
}

fn candidate_count(instance: &Instance, feasibility: Feasibility) -> Result<u128, WelfareError> {
    let n = instance.agent_count();
    match (feasibility, instance.structure()) {
        (Feasibility::EqualCardinality, Structure::Pooled { object_count, per_agent }) => {
            // Multinomial m! / (K!)^n, built one agent at a time to stay small.
            let mut count: u128 = 1;
            let mut left = object_count;
            for _ in 0..n {
                count = count.saturating_mul(binomial(left, per_agent));
                left -= per_agent;
            }
            Ok(count)
        }
        (Feasibility::Unrestricted, Structure::Pooled { object_count, .. }) => {
            Ok((0..object_count).fold(1u128, |acc, _| acc.saturating_mul(n as u128)))
        }
        (Feasibility::PeriodicBijections, Structure::Periodic { periods }) => {
            Ok((0..periods).fold(1u128, |acc, _| acc.saturating_mul(factorial(n))))
        }
        (Feasibility::PeriodicBijections, _) => Err(WelfareError::NotPeriodic),
        _ => Err(WelfareError::NotPooled),
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.saturating_mul(n as u128 - i) / (i + 1);
    }
    acc
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Retain {
    All,
    First,
}

struct Best<K> {
    key: Option<K>,
    owners: Vec<Vec<AgentId>>,
    visited: u128,
}

impl<K: Ord> Best<K> {
    fn new() -> Self {
        Best { key: None, owners: Vec::new(), visited: 0 }
    }

    fn offer(&mut self, key: K, owners: &[AgentId], retain: Retain) {
        self.visited += 1;
        match self.key.as_ref().map(|b| key.cmp(b)) {
            None | Some(Ordering::Greater) => {
                self.key = Some(key);
                self.owners.clear();
                self.owners.push(owners.to_vec());
            }
            Some(Ordering::Equal) if retain == Retain::All => self.owners.push(owners.to_vec()),
            _ => {}
        }
    }

    /// Appends `later`, which covers candidates after all of `self`'s.
    fn merge(&mut self, later: Best<K>, retain: Retain) {
        self.visited += later.visited;
        let Some(key) = later.key else { return };
        match self.key.as_ref().map(|b| key.cmp(b)) {
            None | Some(Ordering::Greater) => {
                self.key = Some(key);
                self.owners = later.owners;
            }
            Some(Ordering::Equal) if retain == Retain::All => self.owners.extend(later.owners),
            _ => {}
        }
    }
}

struct Walker<'a, F> {
    instance: &'a Instance,
    feasibility: Feasibility,
    per_agent: usize,
    n: usize,
    score: &'a F,
    retain: Retain,
}

struct WalkState {
    owners: Vec<AgentId>,
    values: Vec<i64>,
    counts: Vec<usize>,
}

impl<F, K> Walker<'_, F>
where
    F: Fn(&[AgentId], &[i64]) -> K,
    K: Ord,
{
    fn allowed(&self, state: &WalkState, object: usize, agent: AgentId) -> bool {
        match self.feasibility {
            Feasibility::EqualCardinality => state.counts[agent] < self.per_agent,
            // Objects of a period are consecutive: the agent may take one
            // while it holds fewer than `period + 1` objects.
            Feasibility::PeriodicBijections => state.counts[agent] == object / self.n,
            Feasibility::Unrestricted => true,
        }
    }

    fn walk(&self, state: &mut WalkState, object: usize, best: &mut Best<K>) {
        if object == state.owners.len() {
            best.offer((self.score)(&state.owners, &state.values), &state.owners, self.retain);
            return;
        }
        for agent in 0..self.n {
            if !self.allowed(state, object, agent) {
                continue;
            }
            self.assign(state, object, agent);
            self.walk(state, object + 1, best);
            self.unassign(state, object, agent);
        }
    }

    fn assign(&self, state: &mut WalkState, object: usize, agent: AgentId) {
        state.owners[object] = agent;
        state.counts[agent] += 1;
        state.values[agent] += self.instance.profile().scaled(agent, ObjectId(object));
    }

    fn unassign(&self, state: &mut WalkState, object: usize, agent: AgentId) {
        state.counts[agent] -= 1;
        state.values[agent] -= self.instance.profile().scaled(agent, ObjectId(object));
    }

    /// Candidates whose first object goes to `first`.
    fn subtree(&self, first: AgentId) -> Best<K> {
        let m = self.instance.object_count();
        let mut state = WalkState {
            owners: vec![0; m],
            values: vec![0; self.n],
            counts: vec![0; self.n],
        };
        let mut best = Best::new();
        if m == 0 {
            return best;
        }
        if self.allowed(&state, 0, first) {
            self.assign(&mut state, 0, first);
            self.walk(&mut state, 1, &mut best);
        }
        best
    }
}

/// Exhaustive maximization of `score(owners, scaled own values)`.
fn search<F, K>(
    instance: &Instance,
    feasibility: Feasibility,
    options: SearchOptions,
    retain: Retain,
    score: F,
) -> Result<Best<K>, WelfareError>
where
    F: Fn(&[AgentId], &[i64]) -> K + Sync,
    K: Ord + Send,
{
    let count = candidate_count(instance, feasibility)?;
    if count > options.cap {
        return Err(WelfareError::SearchSpaceTooLarge { count, cap: options.cap });
    }
    let n = instance.agent_count();
    let walker = Walker {
        instance,
        feasibility,
        per_agent: instance.bundle_size(),
        n,
        score: &score,
        retain,
    };
    let mut parts: Vec<Best<K>> = if options.workers <= 1 {
        (0..n).map(|first| walker.subtree(first)).collect()
    } else {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Best<K>>>> = (0..n).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..options.workers.min(n) {
                scope.spawn(|| loop {
                    let first = next.fetch_add(1, AtomicOrdering::Relaxed);
                    if first >= n {
                        break;
                    }
                    let part = walker.subtree(first);
                    *slots[first].lock().expect("worker panicked") = Some(part);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().expect("worker panicked").expect("every subtree is searched"))
            .collect()
    };
    let mut best = Best::new();
    for part in parts.drain(..) {
        best.merge(part, retain);
    }
    Ok(best)
}

fn scale_power(instance: &Instance, exponent: usize) -> BigInt {
    num_traits::pow(BigInt::from(instance.profile().scale()), exponent)
}

fn nash_score(values: &[i64]) -> (Reverse<usize>, BigUint) {
    let mut zeros = 0;
    let mut product = BigUint::one();
    for &v in values {
        if v == 0 {
            zeros += 1;
        } else {
            product *= v as u64;
        }
    }
    (Reverse(zeros), product)
}

fn nash_result(
    instance: &Instance,
    feasibility: Feasibility,
    options: SearchOptions,
) -> Result<WelfareResult, WelfareError> {
    let best = search(instance, feasibility, options, Retain::All, |_, values| nash_score(values))?;
    let (Reverse(zero_count), scaled) = best.key.expect("feasible set is never empty");
    let positives = instance.agent_count() - zero_count;
    let product = Rational::new(BigInt::from(scaled), scale_power(instance, positives));
    Ok(WelfareResult {
        objective: Objective::Nash,
        value: WelfareValue::Nash(NashKey { zero_count, product }),
        optima: best.owners.iter().map(|o| Allocation::from_owners(instance, o)).collect(),
        candidates: best.visited,
    })
}

/// All Nash-welfare maximizers among equal-cardinality allocations.
pub fn maximize_nash_equal(
    instance: &Instance,
    options: SearchOptions,
) -> Result<WelfareResult, WelfareError> {
    if instance.is_periodic() {
        return Err(WelfareError::NotPooled);
    }
    nash_result(instance, Feasibility::EqualCardinality, options)
}

/// All Nash-welfare maximizers among per-period bijections.
pub fn maximize_nash_periodic(
    instance: &Instance,
    options: SearchOptions,
) -> Result<WelfareResult, WelfareError> {
    if !instance.is_periodic() {
        return Err(WelfareError::NotPeriodic);
    }
    nash_result(instance, Feasibility::PeriodicBijections, options)
}

fn natural_feasibility(instance: &Instance) -> Feasibility {
    if instance.is_periodic() {
        Feasibility::PeriodicBijections
    } else {
        Feasibility::EqualCardinality
    }
}

/// All maximizers of the sum of utilities.
pub fn maximize_utilitarian(
    instance: &Instance,
    options: SearchOptions,
) -> Result<WelfareResult, WelfareError> {
    let best = search(instance, natural_feasibility(instance), options, Retain::All, |_, values| {
        values.iter().sum::<i64>()
    })?;
    let total = best.key.expect("feasible set is never empty");
    Ok(WelfareResult {
        objective: Objective::Utilitarian,
        value: WelfareValue::Total(instance.unscale(total)),
        optima: best.owners.iter().map(|o| Allocation::from_owners(instance, o)).collect(),
        candidates: best.visited,
    })
}

/// Parameters of `f(u) = A Σ b_t u_t − B Σ_t α_t u_t Σ_{τ≠t} β_τ u_τ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmodularWelfareSpec {
    pub a: Rational,
    pub b: Rational,
    pub weights: Vec<Rational>,
    pub alpha: Vec<Rational>,
    pub beta: Vec<Rational>,
}

impl SubmodularWelfareSpec {
    /// `A = 10`, `B = 1`, all per-period parameters one.
    pub fn default_for(periods: usize) -> Self {
        let one = vec![Rational::one(); periods];
        SubmodularWelfareSpec {
            a: Rational::from_integer(10.into()),
            b: Rational::one(),
            weights: one.clone(),
            alpha: one.clone(),
            beta: one,
        }
    }

    pub fn periods(&self) -> usize {
        self.weights.len()
    }

    fn validate(&self) -> Result<(), WelfareError> {
        let t = self.weights.len();
        for (len, _) in [(self.alpha.len(), "alpha"), (self.beta.len(), "beta")] {
            if len != t {
                return Err(WelfareError::PeriodCount { found: len, expected: t });
            }
        }
        if !self.a.is_positive() {
            return Err(WelfareError::NonPositiveParameter("A"));
        }
        if !self.b.is_positive() {
            return Err(WelfareError::NonPositiveParameter("B"));
        }
        for (name, v) in [("b_t", &self.weights), ("alpha_t", &self.alpha), ("beta_t", &self.beta)] {
            if v.iter().any(|x| !x.is_positive()) {
                return Err(WelfareError::NonPositiveParameter(name));
            }
        }
        Ok(())
    }

    /// `∂f/∂u_t = A b_t − B Σ_{τ≠t} (α_t β_τ + α_τ β_t) u_τ`.
    pub fn derivative(&self, t: usize, utilities: &[Rational]) -> Rational {
        let mut cross = Rational::zero();
        for (tau, u) in utilities.iter().enumerate().filter(|(tau, _)| *tau != t) {
            cross += (&self.alpha[t] * &self.beta[tau] + &self.alpha[tau] * &self.beta[t]) * u;
        }
        &self.a * &self.weights[t] - &self.b * cross
    }
}

pub fn submodular_value(
    spec: &SubmodularWelfareSpec,
    utilities: &[Rational],
) -> Result<Rational, WelfareError> {
    spec.validate()?;
    if utilities.len() != spec.periods() {
        return Err(WelfareError::PeriodCount { found: utilities.len(), expected: spec.periods() });
    }
    Ok(submodular_unchecked(spec, utilities))
}

fn submodular_unchecked(spec: &SubmodularWelfareSpec, u: &[Rational]) -> Rational {
    let mut linear = Rational::zero();
    let mut weighted_total = Rational::zero();
    for (t, ut) in u.iter().enumerate() {
        linear += &spec.weights[t] * ut;
        weighted_total += &spec.beta[t] * ut;
    }
    let mut quadratic = Rational::zero();
    for (t, ut) in u.iter().enumerate() {
        let others = &weighted_total - &spec.beta[t] * ut;
        quadratic += &spec.alpha[t] * ut * others;
    }
    &spec.a * linear - &spec.b * quadratic
}

/// Largest utility of each period under the shared profile.
fn period_maxima(instance: &Instance) -> Vec<Rational> {
    let periods = instance.periods().unwrap_or(0);
    (0..periods)
        .map(|t| {
            instance
                .period_objects(t)
                .map(|o| instance.utility(0, o).clone())
                .max()
                .unwrap_or_else(Rational::zero)
        })
        .collect()
}

/// Checks that `f` strictly increases in every coordinate over the
/// instance's utilities. The derivative is decreasing in every other
/// coordinate, so it suffices to check it at the per-period maxima.
pub fn check_increasing_on_range(
    spec: &SubmodularWelfareSpec,
    instance: &Instance,
) -> Result<(), WelfareError> {
    spec.validate()?;
    let periods = instance.periods().ok_or(WelfareError::NotPeriodic)?;
    if spec.periods() != periods {
        return Err(WelfareError::PeriodCount { found: spec.periods(), expected: periods });
    }
    let maxima = period_maxima(instance);
    for t in 0..periods {
        if !spec.derivative(t, &maxima).is_positive() {
            return Err(WelfareError::NotIncreasingOnRange { period: t });
        }
    }
    Ok(())
}

/// A sampled quadruple violating decreasing differences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferencesViolation {
    pub period: usize,
    pub low: Vec<Rational>,
    pub high: Vec<Rational>,
}

/// Samples quadruples `o'_t ≻ o_t`, `o'_{-t} ≻ o_{-t}` from the instance's
/// objects and checks
/// `f(o'_t, o'_{-t}) − f(o_t, o'_{-t}) < f(o'_t, o_{-t}) − f(o_t, o_{-t})`.
///
/// Only strictly ordered quadruples count. Returns how many were checked;
/// fewer than `samples` means the instance lacks enough strict pairs.
pub fn check_decreasing_differences(
    spec: &SubmodularWelfareSpec,
    instance: &Instance,
    samples: usize,
    seed: u64,
) -> Result<usize, DifferencesViolation> {
    let Some(periods) = instance.periods() else { return Ok(0) };
    if periods < 2 || spec.validate().is_err() || spec.periods() != periods {
        return Ok(0);
    }
    let n = instance.agent_count();
    let u = |t: usize, k: usize| instance.utility(0, ObjectId(t * n + k)).clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let max_attempts = samples.saturating_mul(200).max(1000);
    for _ in 0..max_attempts {
        if checked == samples {
            break;
        }
        let t = rng.random_range(0..periods);
        let (x, y) = (u(t, rng.random_range(0..n)), u(t, rng.random_range(0..n)));
        let (low_t, high_t) = match x.cmp(&y) {
            Ordering::Less => (x, y),
            Ordering::Greater => (y, x),
            Ordering::Equal => continue,
        };
        let mut low: Vec<Rational> = (0..periods).map(|s| u(s, rng.random_range(0..n))).collect();
        let mut high: Vec<Rational> = (0..periods).map(|s| u(s, rng.random_range(0..n))).collect();
        let rest = |v: &[Rational]| -> Rational {
            v.iter().enumerate().filter(|(s, _)| *s != t).map(|(_, x)| x.clone()).sum()
        };
        match rest(&low).cmp(&rest(&high)) {
            Ordering::Less => {}
            Ordering::Greater => std::mem::swap(&mut low, &mut high),
            Ordering::Equal => continue,
        }
        let f = |own: &Rational, others: &[Rational]| {
            let mut v = others.to_vec();
            v[t] = own.clone();
            submodular_unchecked(spec, &v)
        };
        let gain_when_high = f(&high_t, &high) - f(&low_t, &high);
        let gain_when_low = f(&high_t, &low) - f(&low_t, &low);
        if gain_when_high >= gain_when_low {
            low[t] = low_t;
            high[t] = high_t;
            return Err(DifferencesViolation { period: t, low, high });
        }
        checked += 1;
    }
    Ok(checked)
}

/// All maximizers of `Σ_i f(u(μ_1(i)), …, u(μ_T(i)))` on a periodic instance
/// where every agent has the same utilities.
pub fn maximize_submodular(
    instance: &Instance,
    spec: &SubmodularWelfareSpec,
    options: SearchOptions,
) -> Result<WelfareResult, WelfareError> {
    let periods = instance.periods().ok_or(WelfareError::NotPeriodic)?;
    if !instance.has_identical_preferences() {
        return Err(WelfareError::HeterogeneousPreferences);
    }
    check_increasing_on_range(spec, instance)?;
    let n = instance.agent_count();
    let best = search(instance, Feasibility::PeriodicBijections, options, Retain::All, |owners, _| {
        let mut per_agent = vec![Vec::with_capacity(periods); n];
        for (o, &a) in owners.iter().enumerate() {
            per_agent[a].push(instance.utility(0, ObjectId(o)).clone());
        }
        per_agent.iter().map(|u| submodular_unchecked(spec, u)).sum::<Rational>()
    })?;
    Ok(WelfareResult {
        objective: Objective::Submodular,
        value: WelfareValue::Total(best.key.expect("feasible set is never empty")),
        optima: best.owners.iter().map(|o| Allocation::from_owners(instance, o)).collect(),
        candidates: best.visited,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParetoVerdict {
    pub efficient: bool,
    /// The dominating allocation with the largest utility sum (first in
    /// canonical order on ties). It is itself efficient within the set.
    pub dominator: Option<Allocation>,
    pub candidates: u128,
}

/// Exhaustive dominance check within `feasibility`.
pub fn is_pareto_efficient(
    instance: &Instance,
    alloc: &Allocation,
    feasibility: Feasibility,
    options: SearchOptions,
) -> Result<ParetoVerdict, WelfareError> {
    if alloc.agent_count() != instance.agent_count() {
        return Err(ModelError::BundleCount {
            found: alloc.agent_count(),
            expected: instance.agent_count(),
        }
        .into());
    }
    let current: Vec<i64> =
        instance.agents().map(|a| instance.scaled_value(a, alloc.bundle(a))).collect();
    let best = search(instance, feasibility, options, Retain::First, |_, values| {
        let weakly = values.iter().zip(&current).all(|(v, c)| v >= c);
        let strictly = values.iter().zip(&current).any(|(v, c)| v > c);
        (weakly && strictly).then(|| values.iter().sum::<i64>())
    })?;
    let dominator = match best.key {
        Some(Some(_)) => Some(Allocation::from_owners(instance, &best.owners[0])),
        _ => None,
    };
    Ok(ParetoVerdict { efficient: dominator.is_none(), dominator, candidates: best.visited })
}
