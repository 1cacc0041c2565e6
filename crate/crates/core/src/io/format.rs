//! TOML text formats for instances, allocations and outputs.
//!
//! Utilities are exact: integers, or strings holding `"p/q"` or `"n"`.
//! Floating-point literals are rejected. Periods and rounds are 1-based in
//! text and 0-based in memory.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use toml::{Table, Value};

use crate::audit::{DropWitness, FairnessReport, ReferenceWitness, SwapWitness, Verdict};
use crate::draft::PickTrace;
use crate::model::{
    validate_allocation, validate_allocation_unconstrained, validate_instance, AgentId, Allocation,
    Instance, InstanceError, ModelError, ObjectId, RawInstance, RawStructure, Rational,
};
use crate::oracle::{CertificationReport, OracleVerdict, WitnessSet};
use crate::ttc::TtcSdTrace;
use crate::welfare::{SubmodularWelfareSpec, WelfareResult, WelfareValue};

pub const INSTANCE_FORMAT: &str = "fairdiv-instance/1";
pub const ALLOCATION_FORMAT: &str = "fairdiv-allocation/1";
pub const SPEC_FORMAT: &str = "fairdiv-submodular/1";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Allocation(#[from] ModelError),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Schema { path: path.into(), message: message.into() }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_table(text: &str) -> Result<Table, FormatError> {
    if text.trim().is_empty() {
        return Err(FormatError::Syntax { line: 1, column: 1, message: "empty document".into() });
    }
    text.parse::<Table>().map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        FormatError::Syntax { line, column, message: e.message().trim().to_string() }
    })
}

fn check_format(table: &Table, expected: &str) -> Result<(), FormatError> {
    match table.get("format") {
        Some(Value::String(s)) if s == expected => Ok(()),
        Some(Value::String(s)) => Err(schema("format", format!("expected \"{expected}\", found \"{s}\""))),
        Some(_) => Err(schema("format", "must be a string")),
        None => Err(schema("format", format!("missing; expected \"{expected}\""))),
    }
}

fn get<'a>(table: &'a Table, key: &str) -> Result<&'a Value, FormatError> {
    table.get(key).ok_or_else(|| schema(key, "missing"))
}

fn array<'a>(value: &'a Value, path: &str) -> Result<&'a [Value], FormatError> {
    value.as_array().map(Vec::as_slice).ok_or_else(|| schema(path, "must be an array"))
}

fn strings(value: &Value, path: &str) -> Result<Vec<String>, FormatError> {
    array(value, path)?
        .iter()
        .enumerate()
        .map(|(k, v)| {
            v.as_str().map(str::to_string).ok_or_else(|| schema(format!("{path}[{k}]"), "must be a string"))
        })
        .collect()
}

/// Parses `"p/q"` or `"n"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).ok()?;
    let den = BigInt::from_str(den).ok()?;
    (den != BigInt::from(0)).then(|| Rational::new(num, den))
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rational(value: &Value, path: &str) -> Result<Rational, FormatError> {
    match value {
        Value::Integer(i) => Ok(Rational::from_integer((*i).into())),
        Value::String(s) => {
            parse_rational(s).ok_or_else(|| schema(path, format!("`{s}` is not an exact rational")))
        }
        Value::Float(_) => Err(schema(path, "floating-point utilities are not allowed; write \"p/q\"")),
        _ => Err(schema(path, "must be an integer or a \"p/q\" string")),
    }
}

fn rational_row(value: &Value, path: &str) -> Result<Vec<Rational>, FormatError> {
    array(value, path)?.iter().enumerate().map(|(k, v)| rational(v, &format!("{path}[{k}]"))).collect()
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let table = parse_table(text)?;
    check_format(&table, INSTANCE_FORMAT)?;
    let agents = strings(get(&table, "agents")?, "agents")?;
    let structure = get(&table, "structure")?.as_str().ok_or_else(|| schema("structure", "must be a string"))?;
    let rows = array(get(&table, "utilities")?, "utilities")?;
    let (structure, utilities) = match structure {
        "pooled" => {
            let objects = strings(get(&table, "objects")?, "objects")?;
            let utilities = rows
                .iter()
                .enumerate()
                .map(|(a, row)| rational_row(row, &format!("utilities[{a}]")))
                .collect::<Result<_, _>>()?;
            (RawStructure::Pooled { objects }, utilities)
        }
        "periodic" => {
            let periods = array(get(&table, "periods")?, "periods")?
                .iter()
                .enumerate()
                .map(|(t, p)| strings(p, &format!("periods[{t}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let mut utilities = Vec::with_capacity(rows.len());
            for (a, row) in rows.iter().enumerate() {
                let per_period = array(row, &format!("utilities[{a}]"))?;
                if per_period.len() != periods.len() {
                    return Err(schema(
                        format!("utilities[{a}]"),
                        format!("{} periods listed, expected {}", per_period.len(), periods.len()),
                    ));
                }
                let mut flat = Vec::new();
                for (t, p) in per_period.iter().enumerate() {
                    flat.extend(rational_row(p, &format!("utilities[{a}][{t}]"))?);
                }
                utilities.push(flat);
            }
            (RawStructure::Periodic { periods }, utilities)
        }
        other => return Err(schema("structure", format!("expected \"pooled\" or \"periodic\", found \"{other}\""))),
    };
    Ok(validate_instance(RawInstance { agents, structure, utilities })?)
}

fn quote(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

fn quoted_list<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    let parts: Vec<String> = items.into_iter().map(quote).collect();
    format!("[{}]", parts.join(", "))
}

fn utility_literal(r: &Rational) -> String {
    if r.is_integer() && r.numer().bits() < 63 {
        r.numer().to_string()
    } else {
        quote(&format_rational(r))
    }
}

fn utility_list(row: &[Rational]) -> String {
    format!("[{}]", row.iter().map(utility_literal).collect::<Vec<_>>().join(", "))
}

/// Canonical text of an instance; `parse_instance` inverts it.
pub fn serialize_instance(instance: &Instance) -> String {
    let raw = instance.to_raw();
    let mut out = String::new();
    writeln!(out, "format = {}", quote(INSTANCE_FORMAT)).unwrap();
    writeln!(out, "agents = {}", quoted_list(raw.agents.iter().map(String::as_str))).unwrap();
    match &raw.structure {
        RawStructure::Pooled { objects } => {
            writeln!(out, "structure = \"pooled\"").unwrap();
            writeln!(out, "objects = {}", quoted_list(objects.iter().map(String::as_str))).unwrap();
            writeln!(out, "utilities = [").unwrap();
            for row in &raw.utilities {
                writeln!(out, "  {},", utility_list(row)).unwrap();
            }
        }
        RawStructure::Periodic { periods } => {
            writeln!(out, "structure = \"periodic\"").unwrap();
            writeln!(out, "periods = [").unwrap();
            for p in periods {
                writeln!(out, "  {},", quoted_list(p.iter().map(String::as_str))).unwrap();
            }
            writeln!(out, "]").unwrap();
            let n = raw.agents.len();
            writeln!(out, "utilities = [").unwrap();
            for row in &raw.utilities {
                let blocks: Vec<String> = row.chunks(n).map(utility_list).collect();
                writeln!(out, "  [{}],", blocks.join(", ")).unwrap();
            }
        }
    }
    writeln!(out, "]").unwrap();
    out
}

/// Parses an allocation file against `instance`. Bundles are keyed by agent
/// label; periodic bundles list one object label per period.
pub fn parse_allocation(instance: &Instance, text: &str) -> Result<Allocation, FormatError> {
    let table = parse_table(text)?;
    check_format(&table, ALLOCATION_FORMAT)?;
    let bundles = get(&table, "bundles")?.as_table().ok_or_else(|| schema("bundles", "must be a table"))?;
    let equal = match table.get("equal_cardinality") {
        None => true,
        Some(Value::Boolean(b)) => *b,
        Some(_) => return Err(schema("equal_cardinality", "must be a boolean")),
    };
    if !equal && instance.is_periodic() {
        return Err(schema("equal_cardinality", "only pooled instances may relax bundle sizes"));
    }
    let mut raw = vec![Vec::new(); instance.agent_count()];
    let mut seen = vec![false; instance.agent_count()];
    for (label, value) in bundles {
        let path = format!("bundles.{label}");
        let agent = instance.find_agent(label).ok_or_else(|| schema(&path, "unknown agent"))?;
        seen[agent] = true;
        for (k, object) in strings(value, &path)?.iter().enumerate() {
            let period = instance.is_periodic().then_some(k);
            let id = instance
                .find_object(object, period)
                .ok_or_else(|| schema(format!("{path}[{k}]"), format!("unknown object `{object}`")))?;
            raw[agent].push(id);
        }
    }
    if let Some(a) = seen.iter().position(|s| !s) {
        return Err(schema("bundles", format!("no bundle for agent `{}`", instance.agent_label(a))));
    }
    Ok(if equal { validate_allocation(instance, raw)? } else { validate_allocation_unconstrained(instance, raw)? })
}

fn object_list(instance: &Instance, objects: &[ObjectId]) -> String {
    quoted_list(objects.iter().map(|&o| instance.object_label(o)))
}

fn write_bundles(out: &mut String, header: &str, instance: &Instance, alloc: &Allocation) {
    writeln!(out, "\n[{header}]").unwrap();
    for a in instance.agents() {
        writeln!(out, "{} = {}", quote(instance.agent_label(a)), object_list(instance, alloc.bundle(a))).unwrap();
    }
}

fn write_values(out: &mut String, header: &str, instance: &Instance, alloc: &Allocation) {
    writeln!(out, "\n[{header}]").unwrap();
    for (a, v) in alloc.values(instance).iter().enumerate() {
        writeln!(out, "{} = {}", quote(instance.agent_label(a)), quote(&format_rational(v))).unwrap();
    }
}

fn relaxed(instance: &Instance, alloc: &Allocation) -> bool {
    !instance.is_periodic() && alloc.bundles().iter().any(|b| b.len() != instance.bundle_size())
}

/// Allocation file text, with each agent's value as an extra table.
pub fn serialize_allocation(instance: &Instance, alloc: &Allocation) -> String {
    let mut out = String::new();
    writeln!(out, "format = {}", quote(ALLOCATION_FORMAT)).unwrap();
    if relaxed(instance, alloc) {
        writeln!(out, "equal_cardinality = false").unwrap();
    }
    write_bundles(&mut out, "bundles", instance, alloc);
    write_values(&mut out, "values", instance, alloc);
    out
}

/// Parses a submodular welfare parameter file for `periods` periods.
pub fn parse_submodular_spec(text: &str, periods: usize) -> Result<SubmodularWelfareSpec, FormatError> {
    let table = parse_table(text)?;
    check_format(&table, SPEC_FORMAT)?;
    let default = SubmodularWelfareSpec::default_for(periods);
    let scalar = |key: &str, fallback: Rational| table.get(key).map_or(Ok(fallback), |v| rational(v, key));
    let vector = |key: &str, fallback: Vec<Rational>| table.get(key).map_or(Ok(fallback), |v| rational_row(v, key));
    Ok(SubmodularWelfareSpec {
        a: scalar("A", default.a)?,
        b: scalar("B", default.b)?,
        weights: vector("b", default.weights)?,
        alpha: vector("alpha", default.alpha)?,
        beta: vector("beta", default.beta)?,
    })
}

fn agent(instance: &Instance, a: AgentId) -> String {
    quote(instance.agent_label(a))
}

fn verdict_name<W>(v: &Verdict<W>) -> &'static str {
    match v {
        Verdict::NoEnvy => "no-envy",
        Verdict::Bounded(_) => "bounded",
        Verdict::Unbounded => "unbounded",
    }
}

fn drop_witness(instance: &Instance, w: &DropWitness) -> String {
    match *w {
        DropWitness::Object(o) => format!("{{ drop = {} }}", quote(instance.object_label(o))),
        DropWitness::Period(t) => format!("{{ drop_period = {} }}", t + 1),
    }
}

fn swap_witness(instance: &Instance, w: &SwapWitness) -> String {
    let period = instance.period_of(w.gained).map(|t| format!(", period = {}", t + 1)).unwrap_or_default();
    format!(
        "{{ gained = {}, given = {}{period} }}",
        quote(instance.object_label(w.gained)),
        quote(instance.object_label(w.given))
    )
}

fn reference_witness(instance: &Instance, w: &ReferenceWitness) -> String {
    format!("{{ reference = {}, period = {} }}", object_list(instance, &w.reference), w.period + 1)
}

/// Fairness report text.
pub fn render_report(instance: &Instance, alloc: &Allocation, report: &FairnessReport) -> String {
    let mut out = String::new();
    writeln!(out, "format = \"fairdiv-report/1\"").unwrap();
    writeln!(out, "envy_free = {}", report.envy_free).unwrap();
    writeln!(out, "ef1 = {}", report.ef1).unwrap();
    writeln!(out, "swap_ef = {}", report.swap_ef).unwrap();
    if let Some(be) = report.swap_be {
        writeln!(out, "swap_be = {be}").unwrap();
    }
    write_values(&mut out, "values", instance, alloc);
    for p in &report.pairs {
        writeln!(out, "\n[[pairs]]").unwrap();
        writeln!(out, "envier = {}", agent(instance, p.envier)).unwrap();
        writeln!(out, "envied = {}", agent(instance, p.envied)).unwrap();
        writeln!(out, "envy = {}", p.envy).unwrap();
        writeln!(out, "ef1 = \"{}\"", verdict_name(&p.ef1)).unwrap();
        if let Some(w) = p.ef1.witness() {
            writeln!(out, "ef1_witness = {}", drop_witness(instance, w)).unwrap();
        }
        writeln!(out, "swap_ef = \"{}\"", verdict_name(&p.swap_ef)).unwrap();
        if let Some(w) = p.swap_ef.witness() {
            writeln!(out, "swap_ef_witness = {}", swap_witness(instance, w)).unwrap();
        }
        if let Some(be) = &p.swap_be {
            writeln!(out, "swap_be = \"{}\"", verdict_name(be)).unwrap();
            if let Some(w) = be.witness() {
                writeln!(out, "swap_be_witness = {}", reference_witness(instance, w)).unwrap();
            }
        }
    }
    out
}

/// Draft output: the allocation file followed by the pick trace.
pub fn render_draft(instance: &Instance, alloc: &Allocation, trace: &PickTrace) -> String {
    let mut out = serialize_allocation(instance, alloc);
    writeln!(out, "\n[trace]\nmechanism = \"draft\"\nschedule = {}", quote(trace.schedule.name())).unwrap();
    if let Some(seed) = trace.seed {
        writeln!(out, "seed = {seed}").unwrap();
    }
    for p in &trace.picks {
        writeln!(out, "\n[[trace.picks]]").unwrap();
        writeln!(out, "round = {}", p.round + 1).unwrap();
        writeln!(out, "position = {}", p.position + 1).unwrap();
        writeln!(out, "agent = {}", agent(instance, p.agent)).unwrap();
        writeln!(out, "object = {}", quote(instance.object_label(p.object))).unwrap();
        writeln!(out, "remaining = {}", p.remaining).unwrap();
    }
    out
}

fn agent_list(instance: &Instance, agents: &[AgentId]) -> String {
    quoted_list(agents.iter().map(|&a| instance.agent_label(a)))
}

/// TTC+SD output: the allocation file followed by the per-period trace.
pub fn render_ttc_sd(instance: &Instance, alloc: &Allocation, trace: &TtcSdTrace) -> String {
    let mut out = serialize_allocation(instance, alloc);
    writeln!(out, "\n[trace]\nmechanism = \"ttc-sd\"").unwrap();
    for r in &trace.rounds {
        writeln!(out, "\n[[trace.rounds]]").unwrap();
        writeln!(out, "period = {}", r.period + 1).unwrap();
        if let Some(ttc) = &r.ttc {
            let batches: Vec<String> = ttc.batches.iter().map(|b| agent_list(instance, b)).collect();
            writeln!(out, "batches = [{}]", batches.join(", ")).unwrap();
        }
        writeln!(out, "order = {}", agent_list(instance, &r.order)).unwrap();
        let picks: Vec<String> = r
            .picks
            .iter()
            .map(|&(a, o)| format!("[{}, {}]", agent(instance, a), quote(instance.object_label(o))))
            .collect();
        writeln!(out, "picks = [{}]", picks.join(", ")).unwrap();
    }
    out
}

/// Optimizer output: value, candidate count and every optimum.
pub fn render_welfare(instance: &Instance, result: &WelfareResult) -> String {
    let mut out = String::new();
    writeln!(out, "format = \"fairdiv-welfare/1\"").unwrap();
    writeln!(out, "objective = \"{}\"", format!("{:?}", result.objective).to_lowercase()).unwrap();
    match &result.value {
        WelfareValue::Nash(key) => {
            writeln!(out, "zero_count = {}", key.zero_count).unwrap();
            writeln!(out, "product = {}", quote(&format_rational(&key.product))).unwrap();
        }
        WelfareValue::Total(v) => writeln!(out, "value = {}", quote(&format_rational(v))).unwrap(),
    }
    writeln!(out, "candidates = {}", result.candidates).unwrap();
    writeln!(out, "optima_count = {}", result.optima.len()).unwrap();
    for alloc in &result.optima {
        writeln!(out, "\n[[optima]]").unwrap();
        for a in instance.agents() {
            writeln!(out, "{} = {}", agent(instance, a), object_list(instance, alloc.bundle(a))).unwrap();
        }
    }
    out
}

/// Oracle verdict with its full witness set.
pub fn render_oracle_verdict(instance: &Instance, v: &OracleVerdict) -> String {
    let mut out = String::new();
    writeln!(out, "format = \"fairdiv-oracle/1\"").unwrap();
    writeln!(out, "property = {}", quote(v.property.name())).unwrap();
    writeln!(out, "envier = {}", agent(instance, v.envier)).unwrap();
    writeln!(out, "envied = {}", agent(instance, v.envied)).unwrap();
    writeln!(out, "envious = {}", v.envious).unwrap();
    writeln!(out, "vacuous = {}", v.vacuous()).unwrap();
    writeln!(out, "holds = {}", v.holds()).unwrap();
    writeln!(out, "witness_count = {}", v.witnesses.len()).unwrap();
    let items: Vec<String> = match &v.witnesses {
        WitnessSet::Drop(ws) => ws.iter().map(|w| drop_witness(instance, w)).collect(),
        WitnessSet::Swap(ws) => ws.iter().map(|w| swap_witness(instance, w)).collect(),
        WitnessSet::Reference(ws) => ws.iter().map(|w| reference_witness(instance, w)).collect(),
    };
    if items.is_empty() {
        writeln!(out, "witnesses = []").unwrap();
    } else {
        writeln!(out, "witnesses = [\n  {},\n]", items.join(",\n  ")).unwrap();
    }
    out
}

/// Certification summary, with the first counterexample if any.
pub fn render_certification(report: &CertificationReport) -> String {
    let mut out = String::new();
    writeln!(out, "format = \"fairdiv-certify/1\"").unwrap();
    writeln!(out, "proposition = {}", quote(report.proposition.name())).unwrap();
    writeln!(out, "samples = {}", report.samples).unwrap();
    writeln!(out, "passed = {}", report.passed).unwrap();
    writeln!(out, "failed = {}", report.failed).unwrap();
    writeln!(out, "redrawn = {}", report.redrawn).unwrap();
    writeln!(out, "audits = {}", report.audits).unwrap();
    if let Some(c) = &report.first_counterexample {
        writeln!(out, "\n[counterexample]\nsample = {}\ndetail = {}", c.sample, quote(&c.detail)).unwrap();
        writeln!(out, "instance = {}", quote(&serialize_instance(&c.instance))).unwrap();
        if c.allocation.agent_count() == c.instance.agent_count() {
            writeln!(out, "allocation = {}", quote(&serialize_allocation(&c.instance, &c.allocation))).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ids;

    const POOLED: &str = r#"
format = "fairdiv-instance/1"
agents = ["i", "j"]
structure = "pooled"
objects = ["H", "C", "B", "h", "c", "b"]
utilities = [
  [10, 10, 10, 9, 9, 9],
  [10, 10, 10, "9", "18/2", 9],
]
"#;

    #[test]
    fn parses_pooled() {
        let inst = parse_instance(POOLED).unwrap();
        assert_eq!(inst.agent_count(), 2);
        assert_eq!(inst.bundle_size(), 3);
        assert_eq!(inst.find_object("h", None), Some(ObjectId(3)));
    }

    #[test]
    fn round_trips() {
        let inst = parse_instance(POOLED).unwrap();
        let text = serialize_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
        assert_eq!(serialize_instance(&parse_instance(&text).unwrap()), text);

        let periodic = Instance::periodic(vec![vec![vec![1, 2], vec![3, 4]], vec![vec![5, 6], vec![7, 8]]])
            .unwrap()
            .with_object_labels(&["x", "y", "x", "y"]);
        let text = serialize_instance(&periodic);
        assert_eq!(parse_instance(&text).unwrap(), periodic);
    }

    #[test]
    fn rationals_survive() {
        let text = POOLED.replace("[10, 10, 10, 9, 9, 9]", "[\"1/3\", 10, 10, 9, 9, 9]");
        let inst = parse_instance(&text).unwrap();
        assert_eq!(inst.utility(0, ObjectId(0)), &Rational::new(1.into(), 3.into()));
        assert!(serialize_instance(&inst).contains("\"1/3\""));
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn floats_are_schema_errors() {
        let text = POOLED.replace("[10, 10, 10, 9, 9, 9]", "[0.5, 10, 10, 9, 9, 9]");
        assert!(matches!(parse_instance(&text), Err(FormatError::Schema { ref path, .. }) if path == "utilities[0][0]"));
    }

    #[test]
    fn empty_and_broken_files_are_syntax_errors() {
        assert!(matches!(parse_instance(""), Err(FormatError::Syntax { line: 1, column: 1, .. })));
        let broken = "format = \"fairdiv-instance/1\"\nagents = [\"i\",\n";
        assert!(matches!(parse_instance(broken), Err(FormatError::Syntax { line: 2.., .. })));
    }

    #[test]
    fn validation_errors_pass_through() {
        let text = POOLED.replace("[10, 10, 10, 9, 9, 9]", "[-1, 10, 10, 9, 9, 9]");
        assert!(matches!(parse_instance(&text), Err(FormatError::Instance(_))));
        let text = POOLED.replace("fairdiv-instance/1", "fairdiv-instance/9");
        assert!(matches!(parse_instance(&text), Err(FormatError::Schema { .. })));
    }

    #[test]
    fn allocations_round_trip() {
        let inst = parse_instance(POOLED).unwrap();
        let text = r#"
format = "fairdiv-allocation/1"
note = "ignored"
[bundles]
i = ["h", "c", "b"]
j = ["H", "C", "B"]
"#;
        let alloc = parse_allocation(&inst, text).unwrap();
        assert_eq!(alloc.bundle(0), &ids(&[3, 4, 5])[..]);
        assert_eq!(parse_allocation(&inst, &serialize_allocation(&inst, &alloc)).unwrap(), alloc);
        let short = "format = \"fairdiv-allocation/1\"\n[bundles]\ni = [\"h\"]\nj = [\"H\", \"C\", \"B\", \"c\", \"b\"]\n";
        assert!(matches!(
            parse_allocation(&inst, short),
            Err(FormatError::Allocation(ModelError::CardinalityViolation { .. }))
        ));
        let relaxed = short.replace("[bundles]", "equal_cardinality = false\n[bundles]");
        let alloc = parse_allocation(&inst, &relaxed).unwrap();
        assert!(serialize_allocation(&inst, &alloc).contains("equal_cardinality = false"));
    }

    #[test]
    fn spec_defaults_and_overrides() {
        let spec = parse_submodular_spec("format = \"fairdiv-submodular/1\"\nA = 20\nalpha = [1, \"1/2\"]\n", 2).unwrap();
        assert_eq!(spec.a, Rational::from_integer(20.into()));
        assert_eq!(spec.alpha[1], Rational::new(1.into(), 2.into()));
        assert_eq!(spec.b, Rational::from_integer(1.into()));
    }

    #[test]
    fn rendered_outputs_are_valid_toml() {
        let inst = parse_instance(POOLED).unwrap();
        let alloc = validate_allocation(&inst, vec![ids(&[3, 4, 5]), ids(&[0, 1, 2])]).unwrap();
        let report = crate::audit::audit(&inst, &alloc).unwrap();
        let text = render_report(&inst, &alloc, &report);
        let table: Table = text.parse().unwrap();
        assert_eq!(table["ef1"].as_bool(), Some(true));
        assert_eq!(table["swap_ef"].as_bool(), Some(false));
    }
}
