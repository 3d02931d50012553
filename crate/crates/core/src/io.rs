//! Text formats: lattice and poset files, DOT diagrams and trace files.
//!
//! A lattice (or poset) file is line oriented:
//!
//! ```text
//! # comment
//! n=4
//! names=0 a b 1
//! 0 1
//! 0 2
//! 1 3
//! 2 3
//! ```
//!
//! Each body line `x y` states `x < y`; listing exactly the covers, sorted,
//! is the canonical form that [`emit_lattice`] writes. The `names=` line is
//! optional. Element `0` need not be the bottom.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::ExtensionTrace;
use crate::lattice::FiniteLattice;
use crate::lowering::{lower_direct, LoweringResult};
use crate::poset::{Poset, Subset};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetFile {
    pub poset: Poset,
    pub names: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct LatticeFile {
    pub lattice: FiniteLattice,
    pub names: Option<Vec<String>>,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

pub fn parse_poset_file(text: &str) -> Result<PosetFile> {
    let mut n: Option<usize> = None;
    let mut names = None;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("n=") {
            if n.is_some() {
                return Err(parse_err(lineno, "duplicate size line"));
            }
            n = Some(
                rest.trim()
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad element count `{}`", rest.trim())))?,
            );
            continue;
        }
        let Some(size) = n else {
            return Err(parse_err(lineno, "expected `n=<count>` before anything else"));
        };
        if let Some(rest) = line.strip_prefix("names=") {
            let list: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
            if list.len() != size {
                return Err(parse_err(
                    lineno,
                    format!("{} names for {size} elements", list.len()),
                ));
            }
            names = Some(list);
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(lineno, format!("expected `x y`, got `{line}`")));
        }
        let mut ends = [0usize; 2];
        for (slot, field) in ends.iter_mut().zip(&fields) {
            *slot = field
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad element `{field}`")))?;
            if *slot >= size {
                return Err(parse_err(
                    lineno,
                    format!("element {slot} out of range for n={size}"),
                ));
            }
        }
        if ends[0] == ends[1] {
            return Err(parse_err(lineno, format!("self-loop on {}", ends[0])));
        }
        pairs.push((ends[0], ends[1]));
    }
    let n = n.ok_or_else(|| parse_err(0, "missing `n=<count>` line"))?;
    Ok(PosetFile {
        poset: Poset::from_covers(n, &pairs)?,
        names,
    })
}

pub fn parse_poset(text: &str) -> Result<Poset> {
    Ok(parse_poset_file(text)?.poset)
}

pub fn parse_lattice_file(text: &str) -> Result<LatticeFile> {
    let PosetFile { poset, names } = parse_poset_file(text)?;
    Ok(LatticeFile {
        lattice: FiniteLattice::from_poset(poset)?,
        names,
    })
}

pub fn parse_lattice(text: &str) -> Result<FiniteLattice> {
    Ok(parse_lattice_file(text)?.lattice)
}

pub fn emit_poset_named(p: &Poset, names: Option<&[String]>) -> String {
    let mut out = format!("n={}\n", p.len());
    if let Some(names) = names {
        out.push_str("names=");
        out.push_str(&names.join(" "));
        out.push('\n');
    }
    for &(x, y) in p.covers() {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

pub fn emit_poset(p: &Poset) -> String {
    emit_poset_named(p, None)
}

pub fn emit_lattice(l: &FiniteLattice) -> String {
    emit_poset(l.order())
}

pub fn emit_lattice_named(l: &FiniteLattice, names: Option<&[String]>) -> String {
    emit_poset_named(l.order(), names)
}

/// A named set of elements drawn in its own style.
#[derive(Clone, Debug)]
pub struct Highlight {
    pub label: String,
    pub members: Subset,
}

const STYLES: [&str; 4] = [
    "style=filled, fillcolor=\"#9ecae1\"",
    "style=filled, fillcolor=\"#fdae6b\"",
    "penwidth=2.5, color=\"#31a354\"",
    "style=dashed",
];

/// Hasse diagram as a DOT digraph, bottom to top. A node in several
/// highlight sets gets the style of the first one.
pub fn emit_dot(l: &FiniteLattice, names: Option<&[String]>, highlight: &[Highlight]) -> String {
    let mut out = String::from("digraph lattice {\n  rankdir=BT;\n  node [shape=circle];\n");
    for (i, h) in highlight.iter().enumerate() {
        let members: Vec<String> = h.members.ones().map(|x| x.to_string()).collect();
        let _ = writeln!(
            out,
            "  // {}: {} [{}]",
            h.label,
            STYLES[i % STYLES.len()],
            members.join(" ")
        );
    }
    for x in 0..l.len() {
        let label = names.map_or_else(|| x.to_string(), |n| n[x].clone());
        let style = highlight
            .iter()
            .position(|h| h.members.contains(x))
            .map(|i| format!(", {}", STYLES[i % STYLES.len()]))
            .unwrap_or_default();
        let _ = writeln!(out, "  {x} [label=\"{label}\"{style}];");
    }
    for rank in 0..=l.length() {
        let level: Vec<String> = (0..l.len())
            .filter(|&x| l.height(x) == rank)
            .map(|x| x.to_string())
            .collect();
        let _ = writeln!(out, "  {{ rank=same; {}; }}", level.join("; "));
    }
    for &(x, y) in l.order().covers() {
        let _ = writeln!(out, "  {x} -> {y};");
    }
    out.push_str("}\n");
    out
}

/// Highlights for one lowering step: `D`, `N`, and `Jir K`.
pub fn lowering_highlights(res: &LoweringResult) -> Vec<Highlight> {
    let k = res.k.len();
    let set = |xs: &[usize]| crate::poset::subset_of(k, xs.iter().copied());
    vec![
        Highlight {
            label: "D".into(),
            members: set(&res.d),
        },
        Highlight {
            label: "N".into(),
            members: set(&res.n),
        },
        Highlight {
            label: "Jir".into(),
            members: set(&res.k.join_irreducibles().elements),
        },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepChecks {
    pub semimodular: bool,
    pub length_preserved: bool,
    pub embedding: bool,
    pub jir_exchange: bool,
    pub lcov: bool,
}

impl StepChecks {
    pub fn of(res: &LoweringResult) -> StepChecks {
        let l = &res.base;
        let k = &res.k;
        let jl = l.join_irreducibles();
        let jk = k.join_irreducibles();
        let lost: Vec<usize> = jl.elements.iter().copied().filter(|&x| !jk.contains(res.embed[x])).collect();
        let gained: Vec<usize> = jk
            .elements
            .iter()
            .copied()
            .filter(|&y| !jl.elements.iter().any(|&x| res.embed[x] == y))
            .collect();
        StepChecks {
            semimodular: k.is_semimodular(),
            length_preserved: k.length() == l.length(),
            embedding: l.verify_length_preserving_embedding(k, &res.embed),
            jir_exchange: lost == [res.e] && gained == [res.e_prime],
            lcov: jk.lcov_of(res.e_prime) == Some(res.embed[res.h]),
        }
    }

    pub fn all(&self) -> bool {
        self.semimodular && self.length_preserved && self.embedding && self.jir_exchange && self.lcov
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TraceRecord {
    Initial {
        lattice: String,
    },
    Step {
        index: usize,
        e: usize,
        h: usize,
        d_size: usize,
        size: usize,
        checks: StepChecks,
    },
    Final {
        steps: usize,
        lattice: String,
    },
}

/// A replayable record of a sequence of lowerings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceFile {
    pub records: Vec<TraceRecord>,
}

impl TraceFile {
    pub fn from_steps(initial: &FiniteLattice, steps: &[LoweringResult]) -> TraceFile {
        let mut records = vec![TraceRecord::Initial {
            lattice: emit_lattice(initial),
        }];
        for (index, s) in steps.iter().enumerate() {
            records.push(TraceRecord::Step {
                index,
                e: s.e,
                h: s.h,
                d_size: s.d.len(),
                size: s.k.len(),
                checks: StepChecks::of(s),
            });
        }
        let last = steps.last().map_or(initial, |s| &*s.k);
        records.push(TraceRecord::Final {
            steps: steps.len(),
            lattice: emit_lattice(last),
        });
        TraceFile { records }
    }

    pub fn from_trace(t: &ExtensionTrace) -> TraceFile {
        TraceFile::from_steps(&t.initial, &t.steps)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn parse_jsonl(text: &str) -> Result<TraceFile> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r: TraceRecord =
                serde_json::from_str(line).map_err(|e| parse_err(i + 1, e.to_string()))?;
            records.push(r);
        }
        Ok(TraceFile { records })
    }

    /// Re-runs every recorded step from the recorded initial lattice and
    /// checks sizes, verification flags and the final lattice.
    pub fn replay(&self) -> Result<FiniteLattice> {
        let fail = |msg: String| Err(Error::Verification(msg));
        let Some(TraceRecord::Initial { lattice }) = self.records.first() else {
            return fail("trace does not start with an initial record".into());
        };
        let mut cur = parse_lattice(lattice)?;
        let mut done = 0;
        for r in &self.records[1..] {
            match r {
                TraceRecord::Initial { .. } => return fail("second initial record".into()),
                TraceRecord::Step {
                    index,
                    e,
                    h,
                    d_size,
                    size,
                    checks,
                } => {
                    if *index != done {
                        return fail(format!("step {index} out of order"));
                    }
                    if !checks.all() {
                        return fail(format!("step {index} recorded a failed check: {checks:?}"));
                    }
                    let res = lower_direct(&cur, *e, *h)?;
                    if res.d.len() != *d_size || res.k.len() != *size {
                        return fail(format!(
                            "step {index}: replay gives |D| = {}, |K| = {}",
                            res.d.len(),
                            res.k.len()
                        ));
                    }
                    let now = StepChecks::of(&res);
                    if now != *checks {
                        return fail(format!("step {index}: checks now {now:?}"));
                    }
                    cur = (*res.k).clone();
                    done += 1;
                }
                TraceRecord::Final { steps, lattice } => {
                    if *steps != done {
                        return fail(format!("final record claims {steps} steps, found {done}"));
                    }
                    if emit_lattice(&cur) != parse_lattice(lattice).map(|l| emit_lattice(&l))? {
                        return fail("replayed final lattice differs from the recorded one".into());
                    }
                    return Ok(cur);
                }
            }
        }
        fail("trace has no final record".into())
    }
}
