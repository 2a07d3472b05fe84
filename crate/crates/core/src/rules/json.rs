//! JSON rule and distribution files.
//!
//! Rule file: `{ "q": 3, "rules": [ { "name": "f", "neighborhood": [[-1],[0]], "table": [...] } ] }`.
//! Distribution file: `{ "d": 1, "domain": "halfline", "kind": { "type": "rays1d", ... } }`.
//! Unknown fields are rejected everywhere.

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::{DistributionSpec, LocalRule, RuleDistribution, RuleError, RuleSet};
use crate::lattice::{Cell, State};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    q: State,
    rules: Vec<RuleEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    name: String,
    neighborhood: Vec<Cell>,
    table: Vec<State>,
}

fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, RuleError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| RuleError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| RuleError::Schema {
        path: ".".into(),
        message: e.to_string(),
    })?;
    Ok(value)
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("plain data serializes");
    out.push(b'\n');
    out
}

pub fn load_rules(bytes: &[u8]) -> Result<RuleSet, RuleError> {
    let file: RuleFile = parse(bytes)?;
    let mut rules = Vec::with_capacity(file.rules.len());
    for (i, entry) in file.rules.into_iter().enumerate() {
        let field = match LocalRule::new(entry.name, file.q, entry.neighborhood, entry.table) {
            Ok(rule) => {
                rules.push(rule);
                continue;
            }
            Err(
                e @ (RuleError::TableLength { .. }
                | RuleError::OutputOutOfRange { .. }
                | RuleError::TableTooLarge { .. }),
            ) => ("table", e),
            Err(e @ (RuleError::DuplicateOffset { .. } | RuleError::OffsetDimension { .. })) => {
                ("neighborhood", e)
            }
            Err(e) => ("", e),
        };
        let path = if field.0.is_empty() {
            format!("rules[{i}]")
        } else {
            format!("rules[{i}].{}", field.0)
        };
        return Err(RuleError::Schema {
            path,
            message: field.1.to_string(),
        });
    }
    RuleSet::new(file.q, rules).map_err(|e| RuleError::Schema {
        path: "rules".into(),
        message: e.to_string(),
    })
}

pub fn save_rules(rules: &RuleSet) -> Vec<u8> {
    pretty(&RuleFile {
        q: rules.q(),
        rules: rules
            .rules()
            .iter()
            .map(|r| RuleEntry {
                name: r.name().to_string(),
                neighborhood: r.neighborhood().to_vec(),
                table: r.table().to_vec(),
            })
            .collect(),
    })
}

pub fn load_distribution_spec(bytes: &[u8]) -> Result<DistributionSpec, RuleError> {
    parse(bytes)
}

/// Parse a distribution file and resolve it against `rules`.
pub fn load_distribution(bytes: &[u8], rules: &RuleSet) -> Result<RuleDistribution, RuleError> {
    RuleDistribution::new(load_distribution_spec(bytes)?, rules.clone())
}

pub fn save_distribution(dist: &RuleDistribution) -> Vec<u8> {
    pretty(dist.spec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odometer::build_three_state_odometer;

    #[test]
    fn odometer_round_trips() {
        let dist = build_three_state_odometer();
        let rules = load_rules(&save_rules(dist.rules())).unwrap();
        assert_eq!(&rules, dist.rules());
        let back = load_distribution(&save_distribution(&dist), &rules).unwrap();
        assert_eq!(back, dist);
    }

    #[test]
    fn wrong_table_length_names_expected_size() {
        let bad =
            br#"{"q": 3, "rules": [{"name": "f", "neighborhood": [[-1],[0]], "table": [0,1,2]}]}"#;
        let err = load_rules(bad).unwrap_err();
        let RuleError::Schema { path, message } = &err else {
            panic!("{err:?}")
        };
        assert_eq!(path, "rules[0].table");
        assert!(message.contains("expected 9"), "{message}");
        assert!(message.contains("3^2"), "{message}");
    }

    #[test]
    fn unknown_kind_rejected() {
        let bad = br#"{"d": 1, "domain": "full", "kind": {"type": "fractal", "rule": "f"}}"#;
        let err = load_distribution_spec(bad).unwrap_err();
        assert!(matches!(err, RuleError::Schema { .. }), "{err:?}");
        assert!(err.to_string().contains("fractal"));
    }

    #[test]
    fn unknown_fields_rejected_with_path() {
        let bad = br#"{"q": 3, "rules": [{"name": "g", "neighborhood": [[0]], "table": [1,2,0], "extra": 1}]}"#;
        let err = load_rules(bad).unwrap_err();
        let RuleError::Schema { path, .. } = &err else {
            panic!("{err:?}")
        };
        assert_eq!(path, "rules[0].extra");

        let bad =
            br#"{"d": 1, "domain": "full", "kind": {"type": "uniform", "rule": "g", "x": 0}}"#;
        assert!(load_distribution_spec(bad).is_err());
        let bad =
            br#"{"d": 1, "domain": "full", "kind": {"type": "uniform", "rule": "g"}, "x": 0}"#;
        assert!(load_distribution_spec(bad).is_err());
    }

    #[test]
    fn bad_coordinates_and_domain_reported() {
        let bad = br#"{"q": 3, "rules": [{"name": "g", "neighborhood": [[]], "table": [1,2,0]}]}"#;
        let err = load_rules(bad).unwrap_err();
        assert!(
            err.to_string().starts_with("rules[0].neighborhood[0]"),
            "{err}"
        );
        let bad = br#"{"d": 1, "domain": "ring", "kind": {"type": "uniform", "rule": "g"}}"#;
        let err = load_distribution_spec(bad).unwrap_err();
        assert!(err.to_string().starts_with("domain"), "{err}");
    }

    #[test]
    fn unknown_rule_name_in_distribution() {
        let dist = build_three_state_odometer();
        let bad = br#"{"d": 1, "domain": "halfline", "kind": {"type": "uniform", "rule": "zzz"}}"#;
        assert_eq!(
            load_distribution(bad, dist.rules()),
            Err(RuleError::UnknownRule("zzz".into()))
        );
    }
}
