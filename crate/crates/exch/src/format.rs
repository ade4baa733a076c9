//! JSON file formats and state strings.
//!
//! A state string lists cell symbols separated by `,`. Array rows are
//! separated by `;` and blocks of a blocked space by `|`, so a 2×2 array
//! reads `"0,1;0,0"` and a two-block state `"0,1|1"`.

use std::collections::BTreeMap;

use exch_core::exch::MixingMeasure;
use exch_core::group::OrbitTable;
use exch_core::rational::{self, Rational};
use exch_core::stats::{SampleSet, Tail, TestReport};
use exch_core::{ActionKind, Alphabet, Block, Error, FiniteDistribution, GroupAction, State, StateSpace};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockJson {
    pub length: usize,
    pub alphabet: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceJson {
    Sequence { length: usize, alphabet: Vec<i64> },
    Array { rows: usize, cols: usize, alphabet: Vec<i64> },
    Blocked { blocks: Vec<BlockJson> },
}

impl SpaceJson {
    pub fn from_space(space: &StateSpace) -> Self {
        match space {
            StateSpace::Sequence { length, alphabet } => {
                SpaceJson::Sequence { length: *length, alphabet: alphabet.symbols().to_vec() }
            }
            StateSpace::Array { rows, cols, alphabet } => {
                SpaceJson::Array { rows: *rows, cols: *cols, alphabet: alphabet.symbols().to_vec() }
            }
            StateSpace::Blocked { blocks } => SpaceJson::Blocked {
                blocks: blocks.iter().map(|b| BlockJson { length: b.length, alphabet: b.alphabet.symbols().to_vec() }).collect(),
            },
        }
    }

    pub fn to_space(&self) -> Result<StateSpace, Error> {
        Ok(match self {
            SpaceJson::Sequence { length, alphabet } => StateSpace::sequence(*length, Alphabet::new(alphabet.clone())?),
            SpaceJson::Array { rows, cols, alphabet } => StateSpace::array(*rows, *cols, Alphabet::new(alphabet.clone())?),
            SpaceJson::Blocked { blocks } => StateSpace::blocked(
                blocks
                    .iter()
                    .map(|b| Ok(Block { length: b.length, alphabet: Alphabet::new(b.alphabet.clone())? }))
                    .collect::<Result<_, Error>>()?,
            ),
        })
    }
}

fn join(symbols: &[i64]) -> String {
    symbols.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

pub fn state_string(space: &StateSpace, state: &[u32]) -> String {
    let symbols = space.symbols_of(state);
    match space {
        StateSpace::Sequence { .. } => join(&symbols),
        StateSpace::Array { cols, .. } => {
            symbols.chunks(*cols.max(&1)).map(join).collect::<Vec<_>>().join(";")
        }
        StateSpace::Blocked { blocks } => {
            let mut parts = Vec::with_capacity(blocks.len());
            let mut offset = 0;
            for b in blocks {
                parts.push(join(&symbols[offset..offset + b.length]));
                offset += b.length;
            }
            parts.join("|")
        }
    }
}

fn parse_symbols(text: &str, expected: usize) -> Result<Vec<i64>, Error> {
    let text = text.trim();
    if text.is_empty() {
        return if expected == 0 { Ok(Vec::new()) } else { Err(Error::DimensionMismatch { expected, found: 0 }) };
    }
    let symbols = text
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::InvalidState(format!("bad symbol {t:?} in {text:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if symbols.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: symbols.len() });
    }
    Ok(symbols)
}

fn split_exact<'a>(text: &'a str, sep: char, parts: usize, what: &str) -> Result<Vec<&'a str>, Error> {
    let pieces: Vec<&str> = if parts == 0 && text.trim().is_empty() { Vec::new() } else { text.split(sep).collect() };
    if pieces.len() != parts {
        return Err(Error::InvalidState(format!("{text:?} has {} {what}, expected {parts}", pieces.len())));
    }
    Ok(pieces)
}

pub fn parse_state(space: &StateSpace, text: &str) -> Result<State, Error> {
    let symbols = match space {
        StateSpace::Sequence { length, .. } => parse_symbols(text, *length)?,
        StateSpace::Array { rows, cols, .. } => {
            let mut out = Vec::with_capacity(rows * cols);
            for row in split_exact(text, ';', *rows, "rows")? {
                out.extend(parse_symbols(row, *cols)?);
            }
            out
        }
        StateSpace::Blocked { blocks } => {
            let mut out = Vec::new();
            for (part, b) in split_exact(text, '|', blocks.len(), "blocks")?.into_iter().zip(blocks) {
                out.extend(parse_symbols(part, b.length)?);
            }
            out
        }
    };
    space.state_from_symbols(&symbols)
}

/// Mass map written in state-index order.
struct MassJson<'a>(&'a FiniteDistribution);

impl Serialize for MassJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let p = self.0;
        let mut map = serializer.serialize_map(Some(p.support_len()))?;
        for (state, m) in p.iter_states() {
            map.serialize_entry(&state_string(p.space(), &state), &rational::format(m))?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct DistributionOut<'a> {
    space: SpaceJson,
    mass: MassJson<'a>,
}

pub fn distribution_json(p: &FiniteDistribution) -> Value {
    serde_json::to_value(DistributionOut { space: SpaceJson::from_space(p.space()), mass: MassJson(p) })
        .expect("distribution serializes")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionIn {
    space: SpaceJson,
    mass: BTreeMap<String, Value>,
}

fn rational_value(v: &Value) -> Result<Rational, Error> {
    match v {
        Value::String(s) => rational::parse(s),
        Value::Number(n) if n.is_i64() => Ok(rational::int(n.as_i64().unwrap())),
        other => Err(Error::InvalidArgument(format!("masses must be \"p/q\" strings or integers, got {other}"))),
    }
}

/// Accepts a distribution object or any object with a `"distribution"` key.
pub fn parse_distribution(value: &Value) -> Result<FiniteDistribution, Error> {
    let inner = match value.get("distribution") {
        Some(d) if value.get("mass").is_none() => d,
        _ => value,
    };
    let raw: DistributionIn = serde_json::from_value(inner.clone())
        .map_err(|e| Error::InvalidArgument(format!("distribution file: {e}")))?;
    let space = raw.space.to_space()?;
    let mut entries = Vec::with_capacity(raw.mass.len());
    for (k, v) in &raw.mass {
        entries.push((parse_state(&space, k)?, rational_value(v)?));
    }
    FiniteDistribution::from_states(space, entries)
}

/// Group-action descriptor, e.g. `{"kind":"joint_row_col","m":3,"alphabet":[0,1]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupJson {
    Sequence { m: usize, alphabet: Vec<i64> },
    JointRowCol { m: usize, alphabet: Vec<i64> },
    SeparateRowCol { m: usize, n: usize, alphabet: Vec<i64> },
    BlockedSequences { blocks: Vec<BlockJson> },
}

impl GroupJson {
    pub fn to_action(&self) -> Result<GroupAction, Error> {
        Ok(match self {
            GroupJson::Sequence { m, alphabet } => GroupAction::sequence(*m, Alphabet::new(alphabet.clone())?),
            GroupJson::JointRowCol { m, alphabet } => GroupAction::joint_row_col(*m, Alphabet::new(alphabet.clone())?),
            GroupJson::SeparateRowCol { m, n, alphabet } => {
                GroupAction::separate_row_col(*m, *n, Alphabet::new(alphabet.clone())?)
            }
            GroupJson::BlockedSequences { blocks } => match (SpaceJson::Blocked { blocks: blocks.clone() }).to_space()? {
                StateSpace::Blocked { blocks } => GroupAction::blocked(blocks),
                _ => unreachable!(),
            },
        })
    }

    pub fn from_action(action: &GroupAction) -> Self {
        let space = action.space();
        let alphabet = space.alphabet_of(0).symbols().to_vec();
        match action.kind() {
            ActionKind::Sequence { m } => GroupJson::Sequence { m: *m, alphabet },
            ActionKind::JointRowCol { m } => GroupJson::JointRowCol { m: *m, alphabet },
            ActionKind::SeparateRowCol { m, n } => GroupJson::SeparateRowCol { m: *m, n: *n, alphabet },
            ActionKind::BlockedSequences { .. } => match SpaceJson::from_space(space) {
                SpaceJson::Blocked { blocks } => GroupJson::BlockedSequences { blocks },
                _ => unreachable!(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitJson {
    pub representative: String,
    pub size: usize,
    pub members: Vec<String>,
}

pub fn orbits_json(table: &OrbitTable) -> Result<Vec<OrbitJson>, Error> {
    let space = table.space();
    let name = |i: u64| space.state_at(i).map(|s| state_string(space, &s));
    (0..table.len())
        .map(|o| {
            Ok(OrbitJson {
                representative: name(table.representative(o))?,
                size: table.size(o),
                members: table.members(o).iter().map(|&i| name(i)).collect::<Result<_, Error>>()?,
            })
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SamplesIn {
    List(Vec<String>),
    WithSpace { space: SpaceJson, samples: Vec<String> },
}

/// Raw sample file: a JSON list of state strings, optionally wrapped as
/// `{"space": ..., "samples": [...]}`.
pub struct SampleFile {
    pub space: Option<StateSpace>,
    pub states: Vec<String>,
}

pub fn parse_sample_file(value: &Value) -> Result<SampleFile, Error> {
    let raw: SamplesIn =
        serde_json::from_value(value.clone()).map_err(|e| Error::InvalidArgument(format!("sample file: {e}")))?;
    Ok(match raw {
        SamplesIn::List(states) => SampleFile { space: None, states },
        SamplesIn::WithSpace { space, samples } => SampleFile { space: Some(space.to_space()?), states: samples },
    })
}

/// Distinct integer symbols appearing anywhere in the sample strings.
pub fn observed_symbols(states: &[String]) -> Result<Vec<i64>, Error> {
    let mut symbols = Vec::new();
    for s in states {
        for t in s.split([',', ';', '|']).map(str::trim).filter(|t| !t.is_empty()) {
            symbols.push(t.parse::<i64>().map_err(|_| Error::InvalidState(format!("bad symbol {t:?} in {s:?}")))?);
        }
    }
    symbols.sort_unstable();
    symbols.dedup();
    Ok(symbols)
}

pub fn samples_on(space: &StateSpace, states: &[String]) -> Result<SampleSet, Error> {
    let parsed = states.iter().map(|s| parse_state(space, s)).collect::<Result<Vec<_>, _>>()?;
    SampleSet::new(space.clone(), parsed)
}

pub fn ratio_json(value: &Rational) -> Value {
    Value::String(rational::format(value))
}

pub fn mixing_json(mu: &MixingMeasure) -> Value {
    Value::Array(
        mu.atoms
            .iter()
            .map(|a| {
                serde_json::json!({
                    "weight": rational::format(&a.weight),
                    "components": a.components.iter()
                        .map(|c| c.iter().map(rational::format).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

pub fn test_report_json(r: &TestReport) -> Value {
    serde_json::json!({
        "statistic": rational::format(&r.statistic),
        "statistic_decimal": rational::to_f64(&r.statistic),
        "replicates": r.replicates,
        "seed": r.seed,
        "tail": match r.tail { Tail::Upper => "upper", Tail::Lower => "lower" },
        "extreme": r.extreme,
        "p_value": rational::format(&r.p_value),
        "p_value_decimal": r.p_value_f64(),
        "decisions": r.decisions.iter()
            .map(|(level, reject)| serde_json::json!({ "level": level, "reject": reject }))
            .collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_strings_round_trip() {
        let spaces = [
            StateSpace::sequence(3, Alphabet::new(vec![-1, 4]).unwrap()),
            StateSpace::array(2, 3, Alphabet::binary()),
            StateSpace::blocked(vec![
                Block { length: 2, alphabet: Alphabet::binary() },
                Block { length: 1, alphabet: Alphabet::range(3) },
            ]),
            StateSpace::sequence(0, Alphabet::binary()),
        ];
        for space in spaces {
            for x in space.states(1 << 10).unwrap() {
                let s = state_string(&space, &x);
                assert_eq!(parse_state(&space, &s).unwrap(), x, "{s}");
            }
        }
    }

    #[test]
    fn separators() {
        let a = StateSpace::array(2, 2, Alphabet::binary());
        assert_eq!(state_string(&a, &[0, 1, 0, 0]), "0,1;0,0");
        assert!(parse_state(&a, "0,1,0,0").is_err());
        let b = StateSpace::blocked(vec![
            Block { length: 2, alphabet: Alphabet::binary() },
            Block { length: 1, alphabet: Alphabet::binary() },
        ]);
        assert_eq!(parse_state(&b, " 0, 1 | 1").unwrap(), vec![0, 1, 1]);
        assert!(parse_state(&b, "0,1,1").is_err());
    }

    #[test]
    fn distribution_loader_accepts_wrapped_objects() {
        let bare = serde_json::json!({
            "space": {"kind": "sequence", "length": 2, "alphabet": [0, 1]},
            "mass": {"0,1": "1/2", "1,0": "1/2"},
        });
        let p = parse_distribution(&bare).unwrap();
        assert_eq!(parse_distribution(&serde_json::json!({ "distribution": bare, "note": 1 })).unwrap(), p);
        assert_eq!(parse_distribution(&distribution_json(&p)).unwrap(), p);
        let bad = serde_json::json!({
            "space": {"kind": "sequence", "length": 2, "alphabet": [0, 1]},
            "mass": {"0,1": "1/2"},
        });
        assert!(matches!(parse_distribution(&bad), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn group_descriptor_round_trips() {
        let g: GroupJson = serde_json::from_str(r#"{"kind":"joint_row_col","m":3,"alphabet":[0,1]}"#).unwrap();
        let action = g.to_action().unwrap();
        assert_eq!(GroupJson::from_action(&action), g);
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"kind":"joint_row_col","m":3,"alphabet":[0,1]}"#);
    }
}
