//! Minimal JSON-schema validator covering the subset the published
//! scenario and report schemas use: type, required, properties,
//! additionalProperties (boolean), items, enum, const, oneOf, array and
//! string length bounds, and `#/definitions/*` references.

use serde_json::Value;

/// The published scenario schema.
pub const SCENARIO_SCHEMA: &str = include_str!("../schemas/scenario.schema.json");

/// The published report schema.
pub const REPORT_SCHEMA_JSON: &str = include_str!("../schemas/report.schema.json");

/// Validate `instance` against `schema`; errors carry the instance path.
pub fn validate(schema: &Value, instance: &Value) -> Result<(), Vec<String>> {
    let mut errors = Vec::new();
    check(schema, schema, instance, "$", &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn check(root: &Value, schema: &Value, instance: &Value, path: &str, errors: &mut Vec<String>) {
    let schema = match schema.get("$ref") {
        Some(Value::String(reference)) => match resolve(root, reference) {
            Some(target) => target,
            None => {
                errors.push(format!("{path}: unresolved schema reference {reference}"));
                return;
            }
        },
        _ => schema,
    };

    if let Some(expected) = schema.get("const") {
        if instance != expected {
            errors.push(format!("{path}: expected constant {expected}"));
            return;
        }
    }

    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(instance) {
            errors.push(format!("{path}: value not in the allowed set"));
            return;
        }
    }

    if let Some(Value::String(kind)) = schema.get("type") {
        if !type_matches(kind, instance) {
            errors.push(format!("{path}: expected type {kind}"));
            return;
        }
    }

    if let Some(Value::Array(branches)) = schema.get("oneOf") {
        let mut matched = 0;
        for branch in branches {
            let mut branch_errors = Vec::new();
            check(root, branch, instance, path, &mut branch_errors);
            if branch_errors.is_empty() {
                matched += 1;
            }
        }
        if matched != 1 {
            errors.push(format!(
                "{path}: matched {matched} of {} alternatives, expected exactly 1",
                branches.len()
            ));
            return;
        }
    }

    match instance {
        Value::Object(map) => {
            if let Some(Value::Array(required)) = schema.get("required") {
                for name in required.iter().filter_map(Value::as_str) {
                    if !map.contains_key(name) {
                        errors.push(format!("{path}: missing required field `{name}`"));
                    }
                }
            }
            let properties = schema.get("properties").and_then(Value::as_object);
            if let Some(props) = properties {
                for (name, sub) in props {
                    if let Some(value) = map.get(name) {
                        check(root, sub, value, &format!("{path}.{name}"), errors);
                    }
                }
            }
            if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                for name in map.keys() {
                    let declared = properties.is_some_and(|p| p.contains_key(name));
                    if !declared {
                        errors.push(format!("{path}: unexpected field `{name}`"));
                    }
                }
            }
        }
        Value::Array(items) => {
            if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
                if (items.len() as u64) < min {
                    errors.push(format!("{path}: fewer than {min} items"));
                }
            }
            if let Some(max) = schema.get("maxItems").and_then(Value::as_u64) {
                if (items.len() as u64) > max {
                    errors.push(format!("{path}: more than {max} items"));
                }
            }
            if let Some(item_schema) = schema.get("items") {
                for (i, item) in items.iter().enumerate() {
                    check(root, item_schema, item, &format!("{path}[{i}]"), errors);
                }
            }
        }
        Value::String(text) => {
            if let Some(min) = schema.get("minLength").and_then(Value::as_u64) {
                if (text.chars().count() as u64) < min {
                    errors.push(format!("{path}: shorter than {min} characters"));
                }
            }
            if let Some(max) = schema.get("maxLength").and_then(Value::as_u64) {
                if (text.chars().count() as u64) > max {
                    errors.push(format!("{path}: longer than {max} characters"));
                }
            }
        }
        _ => {}
    }
}

fn type_matches(kind: &str, instance: &Value) -> bool {
    match kind {
        "object" => instance.is_object(),
        "array" => instance.is_array(),
        "string" => instance.is_string(),
        "boolean" => instance.is_boolean(),
        "null" => instance.is_null(),
        "number" => instance.is_number(),
        "integer" => instance.as_i64().is_some() || instance.as_u64().is_some(),
        _ => false,
    }
}

fn resolve<'a>(root: &'a Value, reference: &str) -> Option<&'a Value> {
    let name = reference.strip_prefix("#/definitions/")?;
    root.get("definitions")?.get(name)
}
