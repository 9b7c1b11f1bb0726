//! Instance files, random generators and the experiment drivers.

pub mod experiments;
pub mod format;
pub mod gen;
pub mod mystery;

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::catalog::{post_all, ConstraintSpec};
use crate::engine::{Model, ModelError};
use crate::store::{IntVar, Store};

pub use format::{emit_instance, parse_instance, ParseError};

/// A store with the constraints to post on it and an optional branching order.
#[derive(Clone, Debug)]
pub struct Instance {
    pub store: Store,
    pub specs: Vec<ConstraintSpec>,
    pub order: Vec<IntVar>,
}

impl Instance {
    pub fn new(store: Store) -> Self {
        Self {
            store,
            specs: Vec::new(),
            order: Vec::new(),
        }
    }

    /// Posts every constraint on a copy of the store.
    pub fn model(&self) -> Result<Model, ModelError> {
        let mut model = Model::new(self.store.clone());
        post_all(&mut model, &self.specs)?;
        model.decision_vars = self.order.clone();
        Ok(model)
    }

    pub fn to_text(&self) -> String {
        emit_instance(self)
    }
}

/// A tab-separated table with `# key: value` metadata lines above the header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Set when a budget ran out before every instance was processed.
    pub partial: bool,
}

impl Report {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// The cells of column `name`, parsed.
    pub fn values<T: std::str::FromStr>(&self, name: &str) -> Vec<T> {
        let Some(c) = self.column(name) else {
            return Vec::new();
        };
        self.rows.iter().filter_map(|r| r[c].parse().ok()).collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {v}");
        }
        if self.partial {
            let _ = writeln!(out, "# partial: true");
        }
        let _ = writeln!(out, "{}", self.header.join("\t"));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join("\t"));
        }
        out
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_tsv())
    }
}

/// Derives independent per-instance seeds from a base seed and coordinates.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = base;
    for &p in parts {
        h = splitmix(h ^ splitmix(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_layout() {
        let mut r = Report::new(&["seed", "x"]);
        r.meta("experiment", "demo");
        r.push(vec!["1".into(), "0.5".into()]);
        r.partial = true;
        assert_eq!(r.to_tsv(), "# experiment: demo\n# partial: true\nseed\tx\n1\t0.5\n");
        assert_eq!(r.values::<f64>("x"), vec![0.5]);
    }

    #[test]
    fn seeds_differ_by_coordinate() {
        assert_ne!(mix_seed(1, &[2, 3]), mix_seed(1, &[3, 2]));
        assert_eq!(mix_seed(5, &[1]), mix_seed(5, &[1]));
    }
}
