//! Variable bindings for concrete evaluation.

use alloc::collections::BTreeMap;
use alloc::string::String;

/// Map from variable name to unsigned value. Deterministic iteration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    bindings: BTreeMap<String, u64>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, value: u64) -> &mut Self {
        self.bindings.insert(name.into(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        self.bindings.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn clear(&mut self) {
        self.bindings.clear();
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for Env {
    fn from_iter<T: IntoIterator<Item = (S, u64)>>(iter: T) -> Self {
        let mut env = Env::new();
        for (k, v) in iter {
            env.bind(k, v);
        }
        env
    }
}
