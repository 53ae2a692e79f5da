use std::collections::BTreeMap;
use std::fmt;

use sv_entail::Delta;
use sv_frontend::{HeapAtom, SepDisjunct, SepFormula, Span, SymHeap};
use sv_pure::{Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Safe,
    MayIOC,
    MustIOC,
}

/// Where an error state came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub span: Span,
    pub op: String,
    pub condition: String,
    /// The same call also had a non-overflowing continuation.
    pub may: bool,
}

#[derive(Debug, Clone)]
pub struct SymState {
    pub heap: Vec<HeapAtom>,
    pub pure: Vec<Formula>,
    /// Program variable to the logical symbol holding its current value.
    pub latest: BTreeMap<String, String>,
    pub status: Status,
    pub origin: Option<Origin>,
    pub ret: Option<Term>,
    pub returned: bool,
}

impl SymState {
    pub fn new(heap: Vec<HeapAtom>, pure: Formula) -> Self {
        SymState {
            heap,
            pure: vec![pure],
            latest: BTreeMap::new(),
            status: Status::Safe,
            origin: None,
            ret: None,
            returned: false,
        }
    }

    pub fn pure_formula(&self) -> Formula {
        Formula::and(self.pure.clone())
    }

    pub fn delta(&self) -> Delta {
        Delta { heap: SymHeap(self.heap.clone()), pure: self.pure_formula() }
    }

    pub fn assume(&mut self, f: Formula) {
        if f != Formula::True {
            self.pure.push(f);
        }
    }

    /// Symbol currently bound to `v`; unknown variables denote themselves.
    pub fn sym(&self, v: &str) -> String {
        self.latest.get(v).cloned().unwrap_or_else(|| v.to_string())
    }
}

impl fmt::Display for SymState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} & {}", SymHeap(self.heap.clone()), self.pure_formula())?;
        if self.status != Status::Safe {
            write!(f, " [{:?}]", self.status)?;
        }
        Ok(())
    }
}

/// Simultaneous renaming of free variables in a separation formula.
pub fn rename_sep(f: &SepFormula, map: &BTreeMap<String, String>) -> SepFormula {
    SepFormula { disjuncts: f.disjuncts.iter().map(|d| rename_disjunct(d, map)).collect(), span: f.span }
}

pub fn rename_disjunct(d: &SepDisjunct, map: &BTreeMap<String, String>) -> SepDisjunct {
    let mut d = d.clone();
    let keys: Vec<&String> = map.keys().collect();
    for (i, k) in keys.iter().enumerate() {
        d = d.rename(k, &format!("@@{i}"));
    }
    for (i, k) in keys.iter().enumerate() {
        d = d.rename(&format!("@@{i}"), &map[*k]);
    }
    d
}

pub fn rename_formula(f: &Formula, map: &BTreeMap<String, String>) -> Formula {
    let mut f = f.clone();
    let keys: Vec<&String> = map.keys().collect();
    for (i, k) in keys.iter().enumerate() {
        f = f.rename(k, &format!("@@{i}"));
    }
    for (i, k) in keys.iter().enumerate() {
        f = f.rename(&format!("@@{i}"), &map[*k]);
    }
    f
}
