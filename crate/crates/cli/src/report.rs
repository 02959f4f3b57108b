//! The JSON envelope shared by every subcommand: sorted keys, exact numbers.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

pub const SCHEMA: u64 = 1;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub expected: String,
    pub actual: String,
}

impl Check {
    pub fn new(name: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        Check { name: name.into(), pass: expected == actual, expected, actual }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.into(), inputs: Map::new(), outputs: Map::new(), checks: Vec::new() }
    }

    pub fn input(&mut self, key: &str, v: Value) -> &mut Self {
        self.inputs.insert(key.into(), v);
        self
    }

    pub fn output(&mut self, key: &str, v: Value) -> &mut Self {
        self.outputs.insert(key.into(), v);
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass, "expected": c.expected, "actual": c.actual}))
            .collect();
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "checks": checks,
        })
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("values are serializable")
    }
}

/// Integers that fit `u64` stay numbers; wider ones become decimal strings.
pub fn int(n: u128) -> Value {
    match u64::try_from(n) {
        Ok(v) => json!(v),
        Err(_) => json!(n.to_string()),
    }
}

pub fn big(n: &BigInt) -> Value {
    match i64::try_from(n) {
        Ok(v) => json!(v),
        Err(_) => json!(n.to_string()),
    }
}

/// `"num/den"`, denominator always present.
pub fn rat(q: &BigRational) -> Value {
    json!(format!("{}/{}", q.numer(), q.denom()))
}

pub fn primes(ps: &[u64]) -> Value {
    json!(ps)
}
