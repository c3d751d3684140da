use std::fmt;

use crate::grammar::{Binding, Category, Element, FeatureStructure, Terms, Value, VarId};

pub type EdgeId = usize;

/// An entry of an antecedent list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Antecedent {
    Ref { strong: bool, fs: FeatureStructure },
    Opener,
}

impl Antecedent {
    pub fn fs(&self) -> Option<&FeatureStructure> {
        match self {
            Antecedent::Ref { fs, .. } => Some(fs),
            Antecedent::Opener => None,
        }
    }
}

impl Terms for Antecedent {
    fn map_values(&self, f: &mut dyn FnMut(Value) -> Value) -> Self {
        match self {
            Antecedent::Ref { strong, fs } => Antecedent::Ref { strong: *strong, fs: fs.map_values(f) },
            Antecedent::Opener => Antecedent::Opener,
        }
    }
    fn visit_values(&self, f: &mut dyn FnMut(Value)) {
        if let Antecedent::Ref { fs, .. } = self {
            fs.visit_values(f)
        }
    }
    fn update_values(&mut self, f: &mut dyn FnMut(&mut Value)) {
        if let Antecedent::Ref { fs, .. } = self {
            fs.update_values(f)
        }
    }
}

impl fmt::Display for Antecedent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Antecedent::Ref { strong: false, fs } => write!(f, ">{fs}"),
            Antecedent::Ref { strong: true, fs } => write!(f, ">>{fs}"),
            Antecedent::Opener => f.write_str("//"),
        }
    }
}

/// Where an edge's body comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Rule(usize),
    Lexical(usize),
    Terminal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Normal,
    ScopeClosing,
}

/// The prediction an edge descends from. Completion hands a passive edge
/// only to the active edges that made exactly this prediction, so bindings
/// and antecedents seen while recognizing it are those of its real context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Seed {
    /// Descends from chart initialization.
    Root,
    /// A fresh prediction, its own seed.
    Own,
    Edge(EdgeId),
    /// Scanned edges complete into any active edge expecting them.
    Scanned,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: Source,
    pub kind: EdgeKind,
    pub head: Category,
    pub body: Vec<Element>,
    pub dot: usize,
    pub start: usize,
    pub end: usize,
    pub external: Vec<Antecedent>,
    pub internal: Vec<Antecedent>,
    pub seed: Seed,
    pub var_count: u32,
}

impl Edge {
    pub fn is_passive(&self) -> bool {
        self.dot == self.body.len()
    }

    pub fn next(&self) -> Option<&Element> {
        self.body.get(self.dot)
    }

    pub fn next_category(&self) -> Option<&Category> {
        self.next().and_then(Element::as_category)
    }

    pub fn is_scanned(&self) -> bool {
        self.seed == Seed::Scanned
    }

    /// The seed this edge's successors inherit.
    pub fn seed_for_successor(&self, id: EdgeId) -> Seed {
        match self.seed {
            Seed::Own => Seed::Edge(id),
            other => other,
        }
    }

    /// External followed by internal antecedents.
    pub fn antecedents(&self) -> impl Iterator<Item = &Antecedent> {
        self.external.iter().chain(&self.internal)
    }

    /// Applies `binding` and renumbers variables by first occurrence over
    /// head, body, external and internal lists. Two edges are equivalent iff
    /// their canonical forms are equal.
    pub fn canonical(mut self, binding: &Binding) -> Edge {
        let mut order: Vec<Option<u32>> = Vec::new();
        let mut next = 0u32;
        let mut rename = |v: &mut Value| match binding.resolve(*v) {
            Value::Var(VarId(i)) => {
                let i = i as usize;
                if order.len() <= i {
                    order.resize(i + 1, None);
                }
                let id = *order[i].get_or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                *v = Value::Var(VarId(id));
            }
            c => *v = c,
        };
        self.head.update_values(&mut rename);
        self.body.iter_mut().for_each(|e| e.update_values(&mut rename));
        self.external.iter_mut().for_each(|a| a.update_values(&mut rename));
        self.internal.iter_mut().for_each(|a| a.update_values(&mut rename));
        self.var_count = next;
        self
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{} {} ", self.start, self.end, self.head)?;
        for a in &self.external {
            write!(f, "{a} ")?;
        }
        f.write_str(match self.kind {
            EdgeKind::Normal => ":",
            EdgeKind::ScopeClosing => "~",
        })?;
        for a in &self.internal {
            write!(f, " {a}")?;
        }
        f.write_str(" ->")?;
        for (i, e) in self.body.iter().enumerate() {
            if i == self.dot {
                f.write_str(" .")?;
            }
            write!(f, " {e}")?;
        }
        if self.is_passive() {
            f.write_str(" .")?;
        }
        Ok(())
    }
}

/// How an edge came to be; an edge keeps one entry per distinct derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Derivation {
    Init,
    Scan,
    Predict {
        from: EdgeId,
    },
    Complete {
        active: EdgeId,
        passive: EdgeId,
    },
    /// `choice` is the index of the positive structure used by a complex
    /// backward reference, zero for every other special element.
    Resolve {
        from: EdgeId,
        choice: usize,
    },
}
