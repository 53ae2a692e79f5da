use sv_frontend::{HeapAtom, SepDisjunct};
use sv_pure::{Formula, NameSupply};

use crate::{is_null, EntailError, PredTable};

/// One branch of an unfolding: the rewritten heap and the body's pure part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unfolded {
    pub heap: Vec<HeapAtom>,
    pub pure: Formula,
}

/// Simultaneous substitution of `args` for `params` in a disjunct.
pub fn instantiate(d: &SepDisjunct, params: &[String], args: &[String]) -> SepDisjunct {
    let mut d = d.clone();
    for (i, p) in params.iter().enumerate() {
        d = d.rename(p, &format!("@{i}"));
    }
    for (i, a) in args.iter().enumerate() {
        d = d.rename(&format!("@{i}"), a);
    }
    d
}

fn instantiate_pure(f: &Formula, params: &[String], args: &[String]) -> Formula {
    let mut f = f.clone();
    for (i, p) in params.iter().enumerate() {
        f = f.rename(p, &format!("@{i}"));
    }
    for (i, a) in args.iter().enumerate() {
        f = f.rename(&format!("@{i}"), a);
    }
    f
}

/// Replace the predicate instance at `idx` by each disjunct of its body,
/// with existentials renamed apart.
pub fn unfold(
    table: &PredTable,
    heap: &[HeapAtom],
    idx: usize,
    names: &mut NameSupply,
) -> Result<Vec<Unfolded>, EntailError> {
    let HeapAtom::Pred { name, args } = &heap[idx] else {
        return Ok(vec![Unfolded { heap: heap.to_vec(), pure: Formula::True }]);
    };
    let def = table.get(name)?;
    let mut out = Vec::new();
    for d in &def.body.disjuncts {
        let mut d = instantiate(d, &def.params, args);
        for e in std::mem::take(&mut d.exists) {
            let f = names.fresh(&e);
            d = d.rename(&e, &f);
        }
        let mut h: Vec<HeapAtom> = heap[..idx].to_vec();
        h.extend(d.heap.0.iter().cloned());
        h.extend(heap[idx + 1..].iter().cloned());
        out.push(Unfolded { heap: h, pure: d.pure });
    }
    Ok(out)
}

/// Sound pure abstraction of `heap * consumed`.
pub fn xpure(table: &PredTable, heap: &[HeapAtom], consumed: &[HeapAtom]) -> Formula {
    let all: Vec<&HeapAtom> = heap.iter().chain(consumed).collect();
    let mut parts = Vec::new();
    for (i, a) in all.iter().enumerate() {
        match a {
            HeapAtom::PointsTo { root, data, .. } => {
                parts.push(Formula::not(is_null(root)));
                for b in &all[..i] {
                    if let HeapAtom::PointsTo { root: r2, data: d2, .. } = b {
                        if d2 == data {
                            parts.push(Formula::not(Formula::cmp(
                                sv_pure::Term::v(root),
                                sv_pure::Rel::Eq,
                                sv_pure::Term::v(r2),
                            )));
                        }
                    }
                }
            }
            HeapAtom::Pred { name, args } => {
                if let Some(inv) = table.preds.get(name).and_then(|d| d.inv.as_ref().map(|i| (d, i))) {
                    parts.push(instantiate_pure(inv.1, &inv.0.params, args));
                }
            }
        }
    }
    Formula::and(parts)
}
