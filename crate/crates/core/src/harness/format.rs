//! Line-oriented instance files.
//!
//! ```text
//! # comment
//! universe 1 10
//! int X1 in {1,2,4}
//! int X2 in 1..5
//! set S lb {2} ub {1,2,3}
//! order [X2,X1]
//! con roots [X1,X2] S T
//! con among [X1,X2] {2,5} N
//! con card T = 3
//! ```
//!
//! Wherever a count variable is expected an integer literal may be given
//! instead; it becomes a fixed variable named `_<value>`.

use std::fmt::Write as _;

use thiserror::Error;

use super::Instance;
use crate::arith::Rel;
use crate::catalog::ConstraintSpec;
use crate::domain::{Value, ValueSet};
use crate::store::{IntVar, SetVar, Store};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone)]
enum Tok {
    Word(String),
    Group(char, Vec<String>),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let col = i + 1;
        if c == '[' || c == '{' {
            let close = if c == '[' { ']' } else { '}' };
            let Some(end) = chars[i + 1..].iter().position(|&d| d == close) else {
                return Err(ParseError {
                    line: lineno,
                    col,
                    msg: format!("unclosed `{c}`"),
                });
            };
            let inner: String = chars[i + 1..i + 1 + end].iter().collect();
            let items = inner
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            out.push(Token {
                tok: Tok::Group(c, items),
                col,
            });
            i += end + 2;
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '[' && chars[i] != '{' {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Word(chars[start..i].iter().collect()),
                col,
            });
        }
    }
    Ok(out)
}

struct Line<'a> {
    no: usize,
    toks: Vec<Token>,
    pos: usize,
    end_col: usize,
    inst: &'a mut Instance,
}

impl Line<'_> {
    fn err<T>(&self, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: self.no,
            col,
            msg: msg.into(),
        })
    }

    fn next(&mut self, what: &str) -> Result<Token, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.err(self.end_col, format!("expected {what}")),
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let t = self.next(what)?;
        match t.tok {
            Tok::Word(w) => Ok((w, t.col)),
            Tok::Group(..) => self.err(t.col, format!("expected {what}")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let (w, col) = self.word(&format!("`{kw}`"))?;
        if w != kw {
            return self.err(col, format!("expected `{kw}`, found `{w}`"));
        }
        Ok(())
    }

    fn group(&mut self, open: char, what: &str) -> Result<(Vec<String>, usize), ParseError> {
        let t = self.next(what)?;
        match t.tok {
            Tok::Group(c, items) if c == open => Ok((items, t.col)),
            _ => self.err(t.col, format!("expected {what}")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => self.err(t.col, "unexpected trailing argument"),
            None => Ok(()),
        }
    }

    fn value(&self, s: &str, col: usize) -> Result<Value, ParseError> {
        s.parse::<Value>()
            .or_else(|_| self.err(col, format!("`{s}` is not an integer")))
    }

    fn int(&mut self) -> Result<Value, ParseError> {
        let (w, col) = self.word("an integer")?;
        self.value(&w, col)
    }

    fn values_from(&self, items: &[String], col: usize) -> Result<ValueSet, ParseError> {
        let mut set = ValueSet::new();
        for it in items {
            if let Some((a, b)) = it.split_once("..") {
                let (a, b) = (self.value(a.trim(), col)?, self.value(b.trim(), col)?);
                for v in a..=b {
                    set.insert(v);
                }
            } else {
                set.insert(self.value(it, col)?);
            }
        }
        Ok(set)
    }

    fn value_set(&mut self) -> Result<ValueSet, ParseError> {
        let (items, col) = self.group('{', "a value set `{..}`")?;
        self.values_from(&items, col)
    }

    fn value_list(&mut self) -> Result<Vec<Value>, ParseError> {
        let (items, col) = self.group('[', "a value list `[..]`")?;
        items.iter().map(|s| self.value(s, col)).collect()
    }

    /// A domain: `{..}` or `lo..hi`.
    fn domain(&mut self) -> Result<ValueSet, ParseError> {
        let t = self.next("a domain")?;
        match t.tok {
            Tok::Group('{', items) => self.values_from(&items, t.col),
            Tok::Word(w) if w.contains("..") => self.values_from(&[w], t.col),
            _ => self.err(t.col, "expected a domain `{..}` or `lo..hi`"),
        }
    }

    fn int_ref(&mut self, name: &str, col: usize) -> Result<IntVar, ParseError> {
        if let Ok(v) = name.parse::<Value>() {
            let cname = format!("_{v}");
            return Ok(match self.inst.store.find_int(&cname) {
                Some(x) => x,
                None => self.inst.store.new_int(cname, ValueSet::interval(v, v)),
            });
        }
        match self.inst.store.find_int(name) {
            Some(x) => Ok(x),
            None => self.err(col, format!("unknown integer variable `{name}`")),
        }
    }

    fn int_var(&mut self) -> Result<IntVar, ParseError> {
        let (w, col) = self.word("an integer variable")?;
        self.int_ref(&w, col)
    }

    fn int_vars(&mut self) -> Result<Vec<IntVar>, ParseError> {
        let (items, col) = self.group('[', "a variable list `[..]`")?;
        items.iter().map(|s| self.int_ref(s, col)).collect()
    }

    fn set_ref(&self, name: &str, col: usize) -> Result<SetVar, ParseError> {
        match self.inst.store.find_set(name) {
            Some(s) => Ok(s),
            None => self.err(col, format!("unknown set variable `{name}`")),
        }
    }

    fn set_var(&mut self) -> Result<SetVar, ParseError> {
        let (w, col) = self.word("a set variable")?;
        self.set_ref(&w, col)
    }

    fn set_vars(&mut self) -> Result<Vec<SetVar>, ParseError> {
        let (items, col) = self.group('[', "a set variable list `[..]`")?;
        items.iter().map(|s| self.set_ref(s, col)).collect()
    }

    fn rel(&mut self) -> Result<Rel, ParseError> {
        let (w, col) = self.word("a relation")?;
        w.parse::<Rel>().or_else(|e| self.err(col, e))
    }

    fn pairs(&mut self) -> Result<Vec<(Value, Value)>, ParseError> {
        let (items, col) = self.group('[', "a pair list `[a:b,..]`")?;
        items
            .iter()
            .map(|it| match it.split_once(':') {
                Some((a, b)) => Ok((self.value(a.trim(), col)?, self.value(b.trim(), col)?)),
                None => self.err(col, format!("`{it}` is not a pair `a:b`")),
            })
            .collect()
    }

    fn fresh_name(&self, name: &str, col: usize) -> Result<(), ParseError> {
        if self.inst.store.find_int(name).is_some() || self.inst.store.find_set(name).is_some() {
            return self.err(col, format!("`{name}` is declared twice"));
        }
        Ok(())
    }

    fn constraint(&mut self) -> Result<ConstraintSpec, ParseError> {
        use ConstraintSpec::*;
        let (tag, col) = self.word("a constraint tag")?;
        let spec = match tag.as_str() {
            "alldifferent" => AllDifferent { xs: self.int_vars()? },
            "alldifferent-binary" => AllDifferentBinary { xs: self.int_vars()? },
            "permutation" => Permutation {
                xs: self.int_vars()?,
                values: self.value_set()?,
            },
            "nvalue" => NValue {
                xs: self.int_vars()?,
                n: self.int_var()?,
            },
            "among" | "among-sum" => {
                let (xs, values, n) = (self.int_vars()?, self.value_set()?, self.int_var()?);
                if tag == "among" {
                    Among { xs, values, n }
                } else {
                    AmongSum { xs, values, n }
                }
            }
            "atmost" | "atleast" => {
                let (xs, value, n) = (self.int_vars()?, self.int()?, self.int_var()?);
                if tag == "atmost" {
                    AtMost { xs, value, n }
                } else {
                    AtLeast { xs, value, n }
                }
            }
            "gcc" | "gcc-sum" => {
                let (xs, values, counts) = (self.int_vars()?, self.value_list()?, self.int_vars()?);
                if tag == "gcc" {
                    Gcc { xs, values, counts }
                } else {
                    GccSum { xs, values, counts }
                }
            }
            "disjoint-vars" | "uses-range" | "uses-roots" | "uses-primitive" => {
                let (xs, ys) = (self.int_vars()?, self.int_vars()?);
                match tag.as_str() {
                    "disjoint-vars" => DisjointVars { xs, ys },
                    "uses-range" => UsesViaRange { xs, ys },
                    "uses-roots" => UsesViaRoots { xs, ys },
                    _ => UsesPrimitive { xs, ys },
                }
            }
            "common" => Common {
                n: self.int_var()?,
                m: self.int_var()?,
                xs: self.int_vars()?,
                ys: self.int_vars()?,
            },
            "assign-nvalues" => AssignNValues {
                xs: self.int_vars()?,
                ys: self.int_vars()?,
                n: self.int_var()?,
            },
            "symalldiff" => SymAllDiff { xs: self.int_vars()? },
            "element" => Element {
                index: self.int_var()?,
                xs: self.int_vars()?,
                value: self.int_var()?,
            },
            "contiguity" => Contiguity { xs: self.int_vars()? },
            "open-gcc" => OpenGcc {
                xs: self.int_vars()?,
                s: self.set_var()?,
                values: self.value_list()?,
                counts: self.int_vars()?,
            },
            "open-alldifferent" => OpenAllDifferent {
                xs: self.int_vars()?,
                s: self.set_var()?,
            },
            "range" | "roots" => {
                let (xs, s, t) = (self.int_vars()?, self.set_var()?, self.set_var()?);
                if tag == "range" {
                    Range { xs, s, t }
                } else {
                    Roots { xs, s, t }
                }
            }
            "occurs" => Occurs {
                xs: self.int_vars()?,
                t: self.set_var()?,
            },
            "card" => Card {
                s: self.set_var()?,
                rel: self.rel()?,
                n: self.int_var()?,
            },
            "subset" => Subset {
                s: self.set_var()?,
                t: self.set_var()?,
            },
            "disjoint" => Disjoint {
                s: self.set_var()?,
                t: self.set_var()?,
            },
            "union" => Union {
                s: self.set_var()?,
                parts: self.set_vars()?,
            },
            "member" => Member {
                x: self.int_var()?,
                s: self.set_var()?,
            },
            "linear" => {
                let xs = self.int_vars()?;
                let coefs = self.value_list()?;
                if coefs.len() != xs.len() {
                    return self.err(col, "linear needs one coefficient per variable");
                }
                Linear {
                    terms: coefs.into_iter().zip(xs).collect(),
                    rel: self.rel()?,
                    rhs: self.int()?,
                }
            }
            "neq" => NotEqual {
                x: self.int_var()?,
                y: self.int_var()?,
            },
            "forbidden" => Forbidden {
                x: self.int_var()?,
                y: self.int_var()?,
                pairs: self.pairs()?,
            },
            other => return self.err(col, format!("unknown constraint tag `{other}`")),
        };
        Ok(spec)
    }
}

/// Parses an instance from text.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut inst = Instance::new(Store::new());
    for (k, raw) in text.lines().enumerate() {
        let no = k + 1;
        let toks = tokenize(raw, no)?;
        if toks.is_empty() {
            continue;
        }
        let mut line = Line {
            no,
            toks,
            pos: 0,
            end_col: raw.chars().count() + 1,
            inst: &mut inst,
        };
        let (head, col) = line.word("a directive")?;
        match head.as_str() {
            "universe" => {
                let (lo, hi) = (line.int()?, line.int()?);
                line.inst.store.set_universe(lo, hi);
            }
            "int" => {
                let (name, ncol) = line.word("a variable name")?;
                line.fresh_name(&name, ncol)?;
                line.keyword("in")?;
                let dom = line.domain()?;
                if dom.is_empty() {
                    return line.err(ncol, format!("`{name}` has an empty domain"));
                }
                line.inst.store.new_int(name, dom);
            }
            "set" => {
                let (name, ncol) = line.word("a variable name")?;
                line.fresh_name(&name, ncol)?;
                line.keyword("lb")?;
                let lb = line.value_set()?;
                line.keyword("ub")?;
                let ub = line.value_set()?;
                if !lb.is_subset(&ub) {
                    return line.err(ncol, format!("`{name}` has lb ⊄ ub"));
                }
                line.inst.store.new_set(name, lb, ub);
            }
            "order" => {
                let vars = line.int_vars()?;
                line.inst.order = vars;
            }
            "con" => {
                let spec = line.constraint()?;
                line.inst.specs.push(spec);
            }
            other => return line.err(col, format!("unknown directive `{other}`")),
        }
        line.finish()?;
    }
    Ok(inst)
}

fn names(st: &Store, xs: &[IntVar]) -> String {
    let v: Vec<&str> = xs.iter().map(|&x| st.int_name(x)).collect();
    format!("[{}]", v.join(","))
}

fn set_names(st: &Store, ss: &[SetVar]) -> String {
    let v: Vec<&str> = ss.iter().map(|&s| st.set_name(s)).collect();
    format!("[{}]", v.join(","))
}

fn list(vals: &[Value]) -> String {
    let v: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
    format!("[{}]", v.join(","))
}

fn spec_args(st: &Store, spec: &ConstraintSpec) -> String {
    use ConstraintSpec::*;
    let i = |x: &IntVar| st.int_name(*x).to_string();
    let s = |x: &SetVar| st.set_name(*x).to_string();
    match spec {
        AllDifferent { xs } | AllDifferentBinary { xs } | SymAllDiff { xs } | Contiguity { xs } => names(st, xs),
        Permutation { xs, values } => format!("{} {values}", names(st, xs)),
        NValue { xs, n } => format!("{} {}", names(st, xs), i(n)),
        Among { xs, values, n } | AmongSum { xs, values, n } => format!("{} {values} {}", names(st, xs), i(n)),
        AtMost { xs, value, n } | AtLeast { xs, value, n } => format!("{} {value} {}", names(st, xs), i(n)),
        Gcc { xs, values, counts } | GccSum { xs, values, counts } => {
            format!("{} {} {}", names(st, xs), list(values), names(st, counts))
        }
        DisjointVars { xs, ys } | UsesViaRange { xs, ys } | UsesViaRoots { xs, ys } | UsesPrimitive { xs, ys } => {
            format!("{} {}", names(st, xs), names(st, ys))
        }
        Common { n, m, xs, ys } => format!("{} {} {} {}", i(n), i(m), names(st, xs), names(st, ys)),
        AssignNValues { xs, ys, n } => format!("{} {} {}", names(st, xs), names(st, ys), i(n)),
        Element { index, xs, value } => format!("{} {} {}", i(index), names(st, xs), i(value)),
        OpenGcc { xs, s: sv, values, counts } => {
            format!("{} {} {} {}", names(st, xs), s(sv), list(values), names(st, counts))
        }
        OpenAllDifferent { xs, s: sv } => format!("{} {}", names(st, xs), s(sv)),
        Range { xs, s: sv, t } | Roots { xs, s: sv, t } => format!("{} {} {}", names(st, xs), s(sv), s(t)),
        Occurs { xs, t } => format!("{} {}", names(st, xs), s(t)),
        Card { s: sv, rel, n } => format!("{} {rel} {}", s(sv), i(n)),
        Subset { s: a, t: b } | Disjoint { s: a, t: b } => format!("{} {}", s(a), s(b)),
        Union { s: sv, parts } => format!("{} {}", s(sv), set_names(st, parts)),
        Member { x, s: sv } => format!("{} {}", i(x), s(sv)),
        Linear { terms, rel, rhs } => {
            let xs: Vec<IntVar> = terms.iter().map(|t| t.1).collect();
            let cs: Vec<Value> = terms.iter().map(|t| t.0).collect();
            format!("{} {} {rel} {rhs}", names(st, &xs), list(&cs))
        }
        NotEqual { x, y } => format!("{} {}", i(x), i(y)),
        Forbidden { x, y, pairs } => {
            let p: Vec<String> = pairs.iter().map(|(a, b)| format!("{a}:{b}")).collect();
            format!("{} {} [{}]", i(x), i(y), p.join(","))
        }
    }
}

/// Writes an instance in the format read by [`parse_instance`].
pub fn emit_instance(inst: &Instance) -> String {
    let st = &inst.store;
    let mut out = String::new();
    if let Some((lo, hi)) = st.declared_universe() {
        let _ = writeln!(out, "universe {lo} {hi}");
    }
    for x in st.int_vars() {
        let _ = writeln!(out, "int {} in {}", st.int_name(x), st.dom(x).values());
    }
    for s in st.set_vars() {
        let _ = writeln!(out, "set {} lb {} ub {}", st.set_name(s), st.lb(s), st.ub(s));
    }
    if !inst.order.is_empty() {
        let _ = writeln!(out, "order {}", names(st, &inst.order));
    }
    for spec in &inst.specs {
        let _ = writeln!(out, "con {} {}", spec.tag(), spec_args(st, spec));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_directive() {
        let text = "universe 1 5\nint X1 in {1,2}\nint X2 in 1..3 # trailing\nset S lb {} ub {1,2}\nset T lb {2} ub {1..4}\norder [X2,X1]\ncon range [X1,X2] S T\ncon card T <= 2\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.store.num_ints(), 3);
        assert_eq!(inst.specs.len(), 2);
        assert_eq!(inst.order.len(), 2);
        assert_eq!(inst.store.find_int("_2").map(|x| inst.store.dom(x).value()), Some(Some(2)));
    }

    #[test]
    fn unknown_tag_is_named() {
        let err = parse_instance("int X in {1}\ncon frobnicate [X]\n").unwrap_err();
        assert_eq!((err.line, err.col), (2, 5));
        assert!(err.msg.contains("frobnicate"));
    }

    #[test]
    fn unknown_variable_has_position() {
        let err = parse_instance("int X in {1}\ncon nvalue [X] N\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.msg.contains("`N`"));
    }
}
