use std::collections::BTreeSet;

/// Source of fresh variable names.
///
/// Generated names contain `#`, which the surface lexer never produces,
/// so they cannot clash with program identifiers.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    next: u64,
}

impl NameSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let n = self.next;
        self.next += 1;
        format!("{base}#{n}")
    }

    /// Fresh name guaranteed not to occur in `avoid`.
    pub fn fresh_avoiding(&mut self, base: &str, avoid: &BTreeSet<String>) -> String {
        loop {
            let name = self.fresh(base);
            if !avoid.contains(&name) {
                return name;
            }
        }
    }
}
