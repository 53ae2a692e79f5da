use std::path::{Path, PathBuf};

use sv_frontend::{parse_program, print_program, resolve};

fn sources(dir: &Path, out: &mut Vec<PathBuf>) {
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            sources(&p, out);
        } else if p.extension().is_some_and(|x| x == "sv") {
            out.push(p);
        }
    }
}

fn corpus() -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out = Vec::new();
    sources(&root, &mut out);
    out.sort();
    out
}

#[test]
fn corpus_is_not_empty() {
    assert!(corpus().len() >= 25);
}

#[test]
fn printing_is_a_fixpoint_over_the_corpus() {
    for path in corpus() {
        let src = std::fs::read_to_string(&path).unwrap();
        let p = parse_program(&src).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let once = print_program(&p);
        let q = parse_program(&once).unwrap_or_else(|e| panic!("{}: reparse: {e}\n{once}", path.display()));
        assert_eq!(print_program(&q), once, "{}", path.display());
        assert_eq!(q.methods.len(), p.methods.len());
        assert_eq!(q.pred_defs.len(), p.pred_defs.len());
    }
}

#[test]
fn corpus_resolves() {
    for path in corpus() {
        let src = std::fs::read_to_string(&path).unwrap();
        resolve(&parse_program(&src).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
