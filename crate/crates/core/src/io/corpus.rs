//! The built-in example corpus.
//!
//! Each entry bundles an instance file, named reference allocations and the
//! claims that hold for them. [`Evaluator`] checks claims against the main
//! implementations, running each expensive search at most once.
//!
//! Setting `FAIRDIV_CORPUS` to a directory makes [`Corpus::load`] prefer
//! `<dir>/<name>.toml` and `<dir>/<name>.<allocation>.toml` over the embedded
//! texts.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::audit::{audit, FairnessReport, Verdict};
use crate::draft::{make_schedule, run_draft, PrioritySchedule, ScheduleKind};
use crate::io::format::{parse_allocation, parse_instance, FormatError};
use crate::model::{AgentId, Allocation, Instance, ObjectId, Rational};
use crate::oracle::{allocation_from_owners, oracle_check, EnumerationPlan, FeasibleSet, Property, WitnessSet};
use crate::ttc::run_ttc_sd;
use crate::welfare::{
    is_pareto_efficient, maximize_nash_equal, maximize_nash_periodic, maximize_submodular, maximize_utilitarian,
    Feasibility, SearchOptions, SubmodularWelfareSpec, WelfareResult, WelfareValue,
};

pub const CORPUS_ENV: &str = "FAIRDIV_CORPUS";

/// Where a claim comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    /// Stated in the published example.
    Published,
    /// Computed from the published data by exhaustive search or simulation.
    Derived,
    /// The published statement does not survive exact computation; the
    /// claim records what does.
    Corrected { published: &'static str },
}

/// Allocations a claim talks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subject {
    /// A reference allocation shipped with the entry.
    Named(&'static str),
    /// A draft with the identity base order.
    Draft(ScheduleKind),
    /// A draft with the identity order in every round.
    RepeatedOrderDraft,
    /// TTC+SD with the identity initial order.
    TtcSd,
    NashOptima,
    UtilitarianOptima,
    /// Optima under the default submodular welfare parameters.
    SubmodularOptima,
    /// Every Pareto-efficient allocation of a pooled instance when bundle
    /// sizes are free.
    EfficientUnrestricted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    /// Per-agent values of every allocation in the subject.
    Values(&'static [i64]),
    /// `property` for one ordered pair, or every pair when `pair` is `None`.
    Holds { property: Property, pair: Option<(AgentId, AgentId)>, holds: bool },
    /// Envy-freeness of every allocation.
    EnvyFree(bool),
    /// Pareto efficiency within the natural feasible set, with the values of
    /// the reported dominator when there is one.
    Efficient { efficient: bool, dominator: Option<&'static [i64]> },
    /// Optimal Nash key: no zero-utility agent and this product.
    NashProduct(i64),
    /// Optimal welfare total.
    Total(i64),
    /// Number of allocations in the subject.
    Count(usize),
    /// Whether the subject contains a named allocation.
    Contains { name: &'static str, contained: bool },
    /// The brute-force swapBE witness set for the pair contains this
    /// reference bundle (object labels by period) with this 1-based period.
    SwapBeWitness { pair: (AgentId, AgentId), reference: &'static [&'static str], period: usize },
    /// Number of periods each agent holds the object with this label.
    Holding { object: &'static str, periods: &'static [usize] },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Claim {
    pub subject: Subject,
    pub expectation: Expectation,
    pub origin: Origin,
    pub text: &'static str,
}

const fn claim(subject: Subject, expectation: Expectation, origin: Origin, text: &'static str) -> Claim {
    Claim { subject, expectation, origin, text }
}

#[derive(Clone, Copy, Debug)]
pub struct EmbeddedEntry {
    pub name: &'static str,
    pub title: &'static str,
    pub instance: &'static str,
    pub allocations: &'static [(&'static str, &'static str)],
    pub claims: &'static [Claim],
}

use Expectation as E;
use Origin::{Corrected, Derived, Published};
use Property::{Ef1, SwapBe, SwapEf};
use Subject as S;

const fn holds(property: Property, pair: Option<(AgentId, AgentId)>, holds: bool) -> Expectation {
    Expectation::Holds { property, pair, holds }
}

pub const EMBEDDED: &[EmbeddedEntry] = &[
    EmbeddedEntry {
        name: "house-car-boat-10-9",
        title: "House, car and boat; large objects worth 10, small 9",
        instance: include_str!("../../corpus/house-car-boat-10-9.toml"),
        allocations: &[("small-vs-large", include_str!("../../corpus/house-car-boat.small-vs-large.toml"))],
        claims: &[
            claim(S::Named("small-vs-large"), E::Values(&[27, 30]), Published, "i gets 27, j gets 30 by i's utility"),
            claim(S::Named("small-vs-large"), E::EnvyFree(false), Published, "i envies j"),
            claim(S::Named("small-vs-large"), holds(Ef1, None, true), Published, "EF1"),
            claim(S::Named("small-vs-large"), holds(SwapEf, Some((0, 1)), false), Published, "not swapEF for (i, j)"),
        ],
    },
    EmbeddedEntry {
        name: "house-car-boat-4-2-1",
        title: "House, car and boat; large house 4, large car and boat 2, small objects 1",
        instance: include_str!("../../corpus/house-car-boat-4-2-1.toml"),
        allocations: &[("small-vs-large", include_str!("../../corpus/house-car-boat.small-vs-large.toml"))],
        claims: &[
            claim(S::Named("small-vs-large"), holds(Ef1, Some((0, 1)), false), Published, "not EF1 for (i, j)"),
            claim(S::Named("small-vs-large"), holds(SwapEf, None, true), Published, "swapEF: swapping houses gives 6 >= 5"),
        ],
    },
    EmbeddedEntry {
        name: "sd-inefficiency",
        title: "Serial dictatorship is not Pareto efficient",
        instance: include_str!("../../corpus/sd-inefficiency.toml"),
        allocations: &[],
        claims: &[
            claim(S::Draft(ScheduleKind::SerialDictatorship), E::Values(&[16, 6]), Published, "SD gives (16, 6)"),
            claim(
                S::Draft(ScheduleKind::SerialDictatorship),
                E::Efficient { efficient: false, dominator: Some(&[18, 21]) },
                Published,
                "SD output is dominated by an allocation worth (18, 21)",
            ),
            claim(S::Draft(ScheduleKind::SerialDictatorship), holds(Ef1, None, true), Derived, "SD output is EF1"),
            claim(S::Draft(ScheduleKind::SerialDictatorship), holds(SwapEf, None, true), Derived, "SD output is swapEF"),
        ],
    },
    EmbeddedEntry {
        name: "ex2",
        title: "Alternating SD over three periods is not EF1",
        instance: include_str!("../../corpus/ex2.toml"),
        allocations: &[],
        claims: &[
            claim(S::Draft(ScheduleKind::AlternatingSd), E::Values(&[201, 6, 102]), Published, "alternating SD gives (201, 6, 102)"),
            claim(S::Draft(ScheduleKind::AlternatingSd), holds(Ef1, Some((1, 0)), false), Published, "not EF1 for (j, i)"),
            claim(S::Draft(ScheduleKind::AlternatingSd), holds(SwapEf, None, true), Derived, "swapEF with three periods"),
            claim(
                S::TtcSd,
                E::Values(&[103, 104, 102]),
                Corrected { published: "TTC+SD gives (102, 104, 103)" },
                "TTC+SD gives (103, 104, 102) with ascending order inside each batch",
            ),
            claim(S::TtcSd, holds(Ef1, None, true), Derived, "TTC+SD output is EF1"),
            claim(S::TtcSd, holds(SwapBe, None, true), Derived, "TTC+SD output is swapBE"),
        ],
    },
    EmbeddedEntry {
        name: "ex3",
        title: "Same priority in every active period; swapEF and swapBE fail",
        instance: include_str!("../../corpus/ex3.toml"),
        allocations: &[],
        claims: &[
            claim(
                S::RepeatedOrderDraft,
                E::Values(&[300, 6, 3]),
                Corrected { published: "values (300, 6, 102)" },
                "i takes o, j takes o', k takes o'' in every period",
            ),
            claim(S::RepeatedOrderDraft, holds(SwapEf, Some((1, 0)), false), Published, "not swapEF for (j, i)"),
            claim(S::RepeatedOrderDraft, holds(SwapBe, Some((1, 0)), false), Published, "not swapBE for (j, i)"),
            claim(S::TtcSd, holds(Ef1, None, true), Derived, "TTC+SD output is EF1"),
            claim(S::TtcSd, holds(SwapBe, None, true), Derived, "TTC+SD output is swapBE"),
        ],
    },
    EmbeddedEntry {
        name: "ex3-five-periods",
        title: "Alternating SD over five periods is not swapEF",
        instance: include_str!("../../corpus/ex3-five-periods.toml"),
        allocations: &[],
        claims: &[
            claim(S::Draft(ScheduleKind::AlternatingSd), E::Values(&[300, 6, 3]), Derived, "alternating SD gives (300, 6, 3)"),
            claim(S::Draft(ScheduleKind::AlternatingSd), holds(SwapEf, Some((1, 0)), false), Published, "not swapEF for (j, i)"),
            claim(S::Draft(ScheduleKind::AlternatingSd), holds(SwapBe, Some((1, 0)), false), Published, "not swapBE for (j, i)"),
        ],
    },
    EmbeddedEntry {
        name: "remark-swapbe",
        title: "Improving the envier's bundle keeps swapBE but can break swapEF",
        instance: include_str!("../../corpus/remark-swapbe.toml"),
        allocations: &[
            ("before", include_str!("../../corpus/remark-swapbe.before.toml")),
            ("after", include_str!("../../corpus/remark-swapbe.after.toml")),
        ],
        claims: &[
            claim(S::Named("before"), E::Values(&[199, 285, 200]), Derived, "i values its bundle at 199"),
            claim(S::Named("before"), holds(SwapEf, Some((0, 1)), true), Published, "before: swapEF for (i, j)"),
            claim(S::Named("after"), holds(SwapEf, Some((0, 1)), false), Published, "after: not swapEF for (i, j)"),
            claim(S::Named("after"), holds(SwapBe, Some((0, 1)), true), Published, "after: swapBE for (i, j)"),
            claim(S::Named("before"), holds(SwapBe, Some((0, 1)), true), Derived, "before: swapBE for (i, j)"),
            claim(S::Named("after"), holds(Ef1, Some((0, 1)), false), Derived, "after: still not EF1 for (i, j), as before"),
            claim(
                S::Named("after"),
                E::SwapBeWitness { pair: (0, 1), reference: &["a", "a", "a", "a"], period: 4 },
                Derived,
                "the old bundle is a swapBE reference with the swap in period 4",
            ),
        ],
    },
    EmbeddedEntry {
        name: "two-houses",
        title: "EF1 does not imply swapBE",
        instance: include_str!("../../corpus/two-houses.toml"),
        allocations: &[("split", include_str!("../../corpus/two-houses.split.toml"))],
        claims: &[
            claim(S::Named("split"), holds(Ef1, None, true), Published, "EF1"),
            claim(S::Named("split"), holds(SwapBe, Some((0, 1)), false), Published, "not swapBE for (1, 2)"),
        ],
    },
    EmbeddedEntry {
        name: "ex4",
        title: "Efficiency with free bundle sizes forces unequal bundles",
        instance: include_str!("../../corpus/ex4.toml"),
        allocations: &[
            ("efficient-i", include_str!("../../corpus/ex4.efficient-i.toml")),
            ("efficient-j", include_str!("../../corpus/ex4.efficient-j.toml")),
            ("nash-equal", include_str!("../../corpus/ex4.nash-equal.toml")),
        ],
        claims: &[
            claim(S::EfficientUnrestricted, E::Count(2), Published, "exactly two efficient allocations"),
            claim(S::EfficientUnrestricted, E::Contains { name: "efficient-i", contained: true }, Published, "o3 to i is efficient"),
            claim(S::EfficientUnrestricted, E::Contains { name: "efficient-j", contained: true }, Published, "o3 to j is efficient"),
            claim(
                S::EfficientUnrestricted,
                E::EnvyFree(true),
                Corrected { published: "every efficient allocation fails swapEF" },
                "both efficient allocations are envy-free, hence swapEF",
            ),
            claim(S::NashOptima, E::NashProduct(4), Derived, "within equal bundles the Nash optimum is 4"),
            claim(S::NashOptima, E::Contains { name: "nash-equal", contained: true }, Derived, "i{o1,o3} j{o2,o5} k{o4,o6} is optimal"),
            claim(S::NashOptima, holds(Ef1, None, true), Published, "Nash optima are EF1"),
            claim(S::NashOptima, holds(SwapEf, None, true), Published, "Nash optima are swapEF"),
            claim(S::NashOptima, E::Efficient { efficient: true, dominator: None }, Published, "Nash optima are efficient among equal bundles"),
        ],
    },
    EmbeddedEntry {
        name: "nash-3000",
        title: "Six periods; o'' is worth 30 to agent 1 and 3000 to agents 2 and 3",
        instance: include_str!("../../corpus/nash-3000.toml"),
        allocations: &[("three-each", include_str!("../../corpus/nash-3000.three-each.toml"))],
        claims: &[
            claim(S::Named("three-each"), holds(SwapBe, Some((0, 1)), false), Published, "three-each: not swapBE for (1, 2)"),
            claim(S::Named("three-each"), holds(SwapBe, Some((0, 2)), false), Published, "three-each: not swapBE for (1, 3)"),
            claim(
                S::NashOptima,
                E::Contains { name: "three-each", contained: false },
                Corrected { published: "a Nash optimum gives o'' to agents 2 and 3 for three periods each" },
                "three-each is not a Nash optimum",
            ),
            claim(S::NashOptima, E::NashProduct(2_452_081_700), Derived, "optimal Nash product 2452081700"),
            claim(S::NashOptima, E::Count(180), Derived, "180 Nash optima"),
            claim(
                S::NashOptima,
                E::Holding { object: "o''", periods: &[2, 2, 2] },
                Corrected { published: "agents 2 and 3 hold o'' for three periods each" },
                "every Nash optimum gives o'' to each agent for two periods",
            ),
            claim(
                S::NashOptima,
                holds(SwapBe, None, true),
                Corrected { published: "the Nash optimum is not swapBE" },
                "every Nash optimum is swapBE",
            ),
        ],
    },
    EmbeddedEntry {
        name: "ex5",
        title: "Five agents with equal utility magnitudes over three periods",
        instance: include_str!("../../corpus/ex5.toml"),
        allocations: &[("underlined", include_str!("../../corpus/ex5.underlined.toml"))],
        claims: &[
            claim(S::Named("underlined"), E::Values(&[12, 6, 8, 8, 8]), Published, "values (12, 6, 8, 8, 8)"),
            claim(S::Named("underlined"), holds(SwapEf, None, false), Published, "not swapEF"),
            claim(S::NashOptima, E::Contains { name: "underlined", contained: true }, Published, "the underlined allocation is a Nash optimum"),
            claim(S::NashOptima, E::NashProduct(36_864), Derived, "optimal Nash product 36864"),
            claim(S::NashOptima, E::Count(2), Derived, "two Nash optima"),
            claim(S::NashOptima, holds(SwapEf, None, false), Published, "Nash optima are not swapEF"),
            claim(S::UtilitarianOptima, E::Total(42), Published, "utilitarian optimum 42"),
            claim(S::UtilitarianOptima, holds(SwapEf, None, false), Published, "utilitarian optima are not swapEF"),
        ],
    },
    EmbeddedEntry {
        name: "submodular-2x2",
        title: "Two agents, two periods, identical utilities 1 and 2",
        instance: include_str!("../../corpus/submodular-2x2.toml"),
        allocations: &[],
        claims: &[
            claim(S::SubmodularOptima, E::Total(52), Derived, "balanced allocations reach 26 + 26"),
            claim(S::SubmodularOptima, E::Values(&[3, 3]), Derived, "every optimum is balanced"),
            claim(S::SubmodularOptima, holds(Ef1, None, true), Published, "optima are EF1"),
            claim(S::SubmodularOptima, holds(SwapEf, None, true), Published, "optima are swapEF"),
            claim(S::SubmodularOptima, E::Efficient { efficient: true, dominator: None }, Published, "optima are efficient"),
        ],
    },
];

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("no corpus entry named `{0}`")]
    UnknownEntry(String),
    #[error("entry `{entry}` has no allocation named `{name}`")]
    UnknownAllocation { entry: String, name: String },
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("corpus entry `{entry}`: {source}")]
    Format { entry: String, source: FormatError },
}

/// An entry with its texts resolved (embedded or overridden).
#[derive(Clone, Debug)]
pub struct Entry {
    pub meta: &'static EmbeddedEntry,
    pub instance_text: String,
    pub allocation_texts: Vec<(&'static str, String)>,
}

impl Entry {
    pub fn name(&self) -> &'static str {
        self.meta.name
    }

    pub fn instance(&self) -> Result<Instance, CorpusError> {
        parse_instance(&self.instance_text)
            .map_err(|source| CorpusError::Format { entry: self.name().into(), source })
    }

    pub fn allocation(&self, instance: &Instance, name: &str) -> Result<Allocation, CorpusError> {
        let (_, text) = self.allocation_texts.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            CorpusError::UnknownAllocation { entry: self.name().into(), name: name.into() }
        })?;
        parse_allocation(instance, text).map_err(|source| CorpusError::Format { entry: self.name().into(), source })
    }
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub entries: Vec<Entry>,
}

fn read_override(dir: Option<&Path>, file: &str, fallback: &str) -> Result<String, CorpusError> {
    let Some(path) = dir.map(|d| d.join(file)).filter(|p| p.exists()) else {
        return Ok(fallback.to_string());
    };
    std::fs::read_to_string(&path).map_err(|source| CorpusError::Read { path, source })
}

impl Corpus {
    /// The embedded corpus, with files from `FAIRDIV_CORPUS` taking priority.
    pub fn load() -> Result<Corpus, CorpusError> {
        let dir = std::env::var_os(CORPUS_ENV).map(PathBuf::from);
        Corpus::load_from(dir.as_deref())
    }

    pub fn embedded() -> Corpus {
        Corpus::load_from(None).expect("embedded texts need no I/O")
    }

    pub fn load_from(dir: Option<&Path>) -> Result<Corpus, CorpusError> {
        let mut entries = Vec::with_capacity(EMBEDDED.len());
        for meta in EMBEDDED {
            let instance_text = read_override(dir, &format!("{}.toml", meta.name), meta.instance)?;
            let mut allocation_texts = Vec::new();
            for (name, text) in meta.allocations {
                allocation_texts.push((*name, read_override(dir, &format!("{}.{name}.toml", meta.name), text)?));
            }
            entries.push(Entry { meta, instance_text, allocation_texts });
        }
        Ok(Corpus { entries })
    }

    pub fn get(&self, name: &str) -> Result<&Entry, CorpusError> {
        self.entries.iter().find(|e| e.name() == name).ok_or_else(|| CorpusError::UnknownEntry(name.into()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimOutcome {
    pub claim: Claim,
    pub passed: bool,
    /// What was observed, for failure messages.
    pub observed: String,
}

/// Evaluates claims of one entry, memoizing subjects.
pub struct Evaluator<'a> {
    entry: &'a Entry,
    instance: Instance,
    options: SearchOptions,
    subjects: HashMap<Subject, Vec<Allocation>>,
    welfare: HashMap<Subject, WelfareResult>,
}

fn identity(n: usize) -> Vec<AgentId> {
    (0..n).collect()
}

fn scaled_values(instance: &Instance, alloc: &Allocation) -> Vec<i64> {
    let values = alloc.values(instance);
    values.iter().map(|v| if v.is_integer() { v.to_integer().try_into().unwrap_or(i64::MIN) } else { i64::MIN }).collect()
}

impl<'a> Evaluator<'a> {
    pub fn new(entry: &'a Entry, options: SearchOptions) -> Result<Evaluator<'a>, CorpusError> {
        Ok(Evaluator { instance: entry.instance()?, entry, options, subjects: HashMap::new(), welfare: HashMap::new() })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    fn optimize(&mut self, subject: Subject) -> Result<&WelfareResult, String> {
        if !self.welfare.contains_key(&subject) {
            let inst = &self.instance;
            let result = match subject {
                S::NashOptima if inst.is_periodic() => maximize_nash_periodic(inst, self.options),
                S::NashOptima => maximize_nash_equal(inst, self.options),
                S::UtilitarianOptima => maximize_utilitarian(inst, self.options),
                S::SubmodularOptima => {
                    let periods = inst.periods().ok_or("submodular welfare needs periods")?;
                    maximize_submodular(inst, &SubmodularWelfareSpec::default_for(periods), self.options)
                }
                _ => unreachable!("not an optimization subject"),
            }
            .map_err(|e| e.to_string())?;
            self.welfare.insert(subject, result);
        }
        Ok(&self.welfare[&subject])
    }

    /// The allocations a subject denotes.
    pub fn subject(&mut self, subject: Subject) -> Result<Vec<Allocation>, String> {
        if let Some(found) = self.subjects.get(&subject) {
            return Ok(found.clone());
        }
        let n = self.instance.agent_count();
        let rounds = self.instance.bundle_size();
        let allocations = match subject {
            S::Named(name) => vec![self.entry.allocation(&self.instance, name).map_err(|e| e.to_string())?],
            S::Draft(kind) => {
                let schedule = make_schedule(kind, identity(n), rounds).map_err(|e| e.to_string())?;
                vec![run_draft(&self.instance, &schedule).map_err(|e| e.to_string())?.0]
            }
            S::RepeatedOrderDraft => {
                let schedule = PrioritySchedule::explicit(vec![identity(n); rounds]).map_err(|e| e.to_string())?;
                vec![run_draft(&self.instance, &schedule).map_err(|e| e.to_string())?.0]
            }
            S::TtcSd => vec![run_ttc_sd(&self.instance, &identity(n)).map_err(|e| e.to_string())?.0],
            S::NashOptima | S::UtilitarianOptima | S::SubmodularOptima => self.optimize(subject)?.optima.clone(),
            S::EfficientUnrestricted => {
                let set = FeasibleSet::unrestricted(&self.instance).map_err(|e| e.to_string())?;
                let plan = EnumerationPlan::new(set, self.options.cap).map_err(|e| e.to_string())?;
                let mut out = Vec::new();
                for owners in plan.stream() {
                    let alloc = allocation_from_owners(&owners, n);
                    let verdict = is_pareto_efficient(&self.instance, &alloc, Feasibility::Unrestricted, self.options)
                        .map_err(|e| e.to_string())?;
                    if verdict.efficient {
                        out.push(alloc);
                    }
                }
                out
            }
        };
        self.subjects.insert(subject, allocations.clone());
        Ok(allocations)
    }

    fn natural_feasibility(&self, alloc: &Allocation) -> Feasibility {
        if self.instance.is_periodic() {
            Feasibility::PeriodicBijections
        } else if alloc.bundles().iter().any(|b| b.len() != self.instance.bundle_size()) {
            Feasibility::Unrestricted
        } else {
            Feasibility::EqualCardinality
        }
    }

    fn check_each(
        &self,
        allocs: &[Allocation],
        mut f: impl FnMut(&Allocation) -> Result<(bool, String), String>,
    ) -> Result<(bool, String), String> {
        for (k, a) in allocs.iter().enumerate() {
            let (ok, seen) = f(a)?;
            if !ok {
                let which = if allocs.len() > 1 { format!("allocation #{}: ", k + 1) } else { String::new() };
                return Ok((false, format!("{which}{seen}")));
            }
        }
        Ok((true, format!("{} allocation(s) checked", allocs.len())))
    }

    fn property(report: &FairnessReport, p: Property, pair: Option<(AgentId, AgentId)>) -> bool {
        let of = |r: &crate::audit::PairReport| match p {
            Ef1 => r.ef1.holds(),
            SwapEf => r.swap_ef.holds(),
            SwapBe => r.swap_be.as_ref().is_some_and(Verdict::holds),
        };
        match pair {
            Some((i, j)) => report.pair(i, j).is_some_and(of),
            None => report.pairs.iter().all(of),
        }
    }

    fn evaluate_inner(&mut self, claim: &Claim) -> Result<(bool, String), String> {
        let allocs = self.subject(claim.subject)?;
        let inst = &self.instance;
        match claim.expectation {
            E::Values(expected) => self.check_each(&allocs, |a| {
                let v = scaled_values(inst, a);
                Ok((v == expected, format!("values {v:?}")))
            }),
            E::Holds { property, pair, holds } => self.check_each(&allocs, |a| {
                let report = audit(inst, a).map_err(|e| e.to_string())?;
                let got = Self::property(&report, property, pair);
                Ok((got == holds, format!("{} is {got}", property.name())))
            }),
            E::EnvyFree(expected) => self.check_each(&allocs, |a| {
                let report = audit(inst, a).map_err(|e| e.to_string())?;
                Ok((report.envy_free == expected, format!("envy-free is {}", report.envy_free)))
            }),
            E::Efficient { efficient, dominator } => self.check_each(&allocs, |a| {
                let v = is_pareto_efficient(inst, a, self.natural_feasibility(a), self.options)
                    .map_err(|e| e.to_string())?;
                let dom = v.dominator.as_ref().map(|d| scaled_values(inst, d));
                let ok = v.efficient == efficient && dominator.is_none_or(|d| dom.as_deref() == Some(d));
                Ok((ok, format!("efficient is {}, dominator values {dom:?}", v.efficient)))
            }),
            E::NashProduct(p) => {
                let result = self.optimize(claim.subject)?;
                let WelfareValue::Nash(key) = &result.value else { return Err("not a Nash subject".into()) };
                let ok = key.zero_count == 0 && key.product == Rational::from_integer(p.into());
                Ok((ok, format!("zero count {}, product {}", key.zero_count, key.product)))
            }
            E::Total(t) => {
                let result = self.optimize(claim.subject)?;
                let WelfareValue::Total(v) = &result.value else { return Err("not a total-welfare subject".into()) };
                Ok((*v == Rational::from_integer(t.into()), format!("total {v}")))
            }
            E::Count(c) => Ok((allocs.len() == c, format!("{} allocation(s)", allocs.len()))),
            E::Contains { name, contained } => {
                let named = self.entry.allocation(inst, name).map_err(|e| e.to_string())?;
                let found = allocs.contains(&named);
                Ok((found == contained, format!("contained is {found}")))
            }
            E::SwapBeWitness { pair, reference, period } => self.check_each(&allocs, |a| {
                let objects: Option<Vec<ObjectId>> =
                    reference.iter().enumerate().map(|(t, l)| inst.find_object(l, Some(t))).collect();
                let objects = objects.ok_or("unknown reference object")?;
                let v = oracle_check(inst, a, SwapBe, pair).map_err(|e| e.to_string())?;
                let WitnessSet::Reference(ws) = &v.witnesses else { unreachable!() };
                let found = ws.iter().any(|w| w.reference == objects && w.period + 1 == period);
                Ok((found, format!("{} witnesses, target present: {found}", ws.len())))
            }),
            E::Holding { object, periods } => self.check_each(&allocs, |a| {
                let counts: Vec<usize> = inst
                    .agents()
                    .map(|i| a.bundle(i).iter().filter(|&&o| inst.object_label(o) == object).count())
                    .collect();
                Ok((counts == periods, format!("periods holding {object}: {counts:?}")))
            }),
        }
    }

    pub fn evaluate(&mut self, claim: &Claim) -> ClaimOutcome {
        let (passed, observed) = self.evaluate_inner(claim).unwrap_or_else(|e| (false, format!("error: {e}")));
        ClaimOutcome { claim: *claim, passed, observed }
    }

    pub fn evaluate_all(&mut self) -> Vec<ClaimOutcome> {
        let claims = self.entry.meta.claims;
        claims.iter().map(|c| self.evaluate(c)).collect()
    }
}
