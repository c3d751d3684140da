use super::{FeatureStructure, Terms, Value, VarId};

/// A substitution from variables to values. Chains are followed on lookup and
/// never form cycles, since only unbound roots are ever bound.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Binding {
    slots: Vec<Option<Value>>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(vars: u32) -> Self {
        Binding { slots: vec![None; vars as usize] }
    }

    fn slot(&self, var: VarId) -> Option<Value> {
        self.slots.get(var.0 as usize).copied().flatten()
    }

    /// Follows bindings until reaching a constant or an unbound variable.
    pub fn resolve(&self, mut value: Value) -> Value {
        while let Value::Var(var) = value {
            match self.slot(var) {
                Some(next) => value = next,
                None => break,
            }
        }
        value
    }

    pub fn is_bound(&self, var: VarId) -> bool {
        self.slot(var).is_some()
    }

    fn bind(&mut self, var: VarId, value: Value) {
        let i = var.0 as usize;
        if self.slots.len() <= i {
            self.slots.resize(i + 1, None);
        }
        debug_assert!(self.slots[i].is_none());
        self.slots[i] = Some(value);
    }

    pub fn unify_values(&mut self, a: Value, b: Value) -> bool {
        match (self.resolve(a), self.resolve(b)) {
            (Value::Const(x), Value::Const(y)) => x == y,
            (Value::Var(x), Value::Var(y)) if x == y => true,
            (Value::Var(x), Value::Var(y)) => {
                // Bind the younger variable to the older one.
                if x > y {
                    self.bind(x, Value::Var(y))
                } else {
                    self.bind(y, Value::Var(x))
                }
                true
            }
            (Value::Var(x), c @ Value::Const(_)) | (c @ Value::Const(_), Value::Var(x)) => {
                self.bind(x, c);
                true
            }
        }
    }

    /// Unifies two flat structures feature by feature. Features present in
    /// only one of them impose no constraint. On failure the binding may be
    /// partially extended; callers that need to back out work on a clone.
    pub fn unify_fs(&mut self, a: &FeatureStructure, b: &FeatureStructure) -> bool {
        let (mut i, mut j) = (0, 0);
        let (pa, pb) = (&a.pairs, &b.pairs);
        while i < pa.len() && j < pb.len() {
            match pa[i].0.cmp(&pb[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if !self.unify_values(pa[i].1, pb[j].1) {
                        return false;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        true
    }

    /// True if `a` and `b` unify under this binding; the binding is untouched.
    pub fn unifiable(&self, a: &FeatureStructure, b: &FeatureStructure) -> bool {
        self.clone().unify_fs(a, b)
    }

    pub fn apply<T: Terms>(&self, term: &T) -> T {
        term.map_values(&mut |v| self.resolve(v))
    }

    /// The union of two structures that have already been unified under this
    /// binding, with all bindings applied.
    pub fn merge(&self, a: &FeatureStructure, b: &FeatureStructure) -> FeatureStructure {
        let mut out = self.apply(a);
        for (name, value) in b.iter() {
            if out.get(name).is_none() {
                out.set(name, self.resolve(value));
            }
        }
        out
    }

    /// Rewrites every slot to its final value, making `apply` idempotent in a
    /// single step.
    pub fn compress(&mut self) {
        for i in 0..self.slots.len() {
            if let Some(v) = self.slots[i] {
                self.slots[i] = Some(self.resolve(v));
            }
        }
    }

    /// Bound variables with their fully resolved values.
    pub fn bindings(&self) -> impl Iterator<Item = (VarId, Value)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|_| (VarId(i as u32), self.resolve(Value::Var(VarId(i as u32))))))
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }
}

/// Functional flat unification: `Some(extended binding)` on success.
pub fn unify(a: &FeatureStructure, b: &FeatureStructure, binding: &Binding) -> Option<Binding> {
    let mut out = binding.clone();
    out.unify_fs(a, b).then(|| {
        out.compress();
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Sym;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn fs(pairs: &[(&str, Value)]) -> FeatureStructure {
        FeatureStructure::from_pairs(pairs.iter().map(|(n, v)| (Sym::new(n), *v))).unwrap()
    }

    fn var(i: u32) -> Value {
        Value::Var(VarId(i))
    }

    fn c(s: &str) -> Value {
        Value::constant(s)
    }

    #[test]
    fn empty_structures_unify() {
        let b = unify(&FeatureStructure::new(), &FeatureStructure::new(), &Binding::new()).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn variable_takes_constant() {
        let a = fs(&[("type", c("noun")), ("noun", var(0))]);
        let b = fs(&[("type", c("noun")), ("noun", c("country"))]);
        let out = unify(&a, &b, &Binding::new()).unwrap();
        assert_eq!(out.resolve(var(0)), c("country"));
    }

    #[test]
    fn constant_clash_fails() {
        assert!(unify(&fs(&[("type", c("noun"))]), &fs(&[("type", c("prop"))]), &Binding::new()).is_none());
        let he = fs(&[("human", c("+")), ("gender", c("masc"))]);
        assert!(unify(&he, &fs(&[("human", c("-"))]), &Binding::new()).is_none());
    }

    #[test]
    fn disjoint_features_impose_nothing() {
        let out = unify(&fs(&[("a", c("x"))]), &fs(&[("b", c("y"))]), &Binding::new()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn shared_variables_propagate() {
        // (a:X, b:X) with (a:p, b:q) must fail through the shared variable.
        let left = fs(&[("a", var(0)), ("b", var(0))]);
        assert!(unify(&left, &fs(&[("a", c("p")), ("b", c("q"))]), &Binding::new()).is_none());
        assert!(unify(&left, &fs(&[("a", c("p")), ("b", c("p"))]), &Binding::new()).is_some());
    }

    #[test]
    fn merge_is_union() {
        let a = fs(&[("type", c("noun")), ("noun", var(0))]);
        let b = fs(&[("noun", c("man")), ("human", c("+"))]);
        let mut binding = Binding::new();
        assert!(binding.unify_fs(&a, &b));
        let merged = binding.merge(&a, &b);
        assert_eq!(merged, fs(&[("type", c("noun")), ("noun", c("man")), ("human", c("+"))]));
    }

    fn arb_value() -> impl Strategy<Value = Value> {
        prop_oneof![prop::sample::select(vec!["p", "q", "+", "-"]).prop_map(c), (0u32..4).prop_map(var),]
    }

    fn arb_fs() -> impl Strategy<Value = FeatureStructure> {
        prop::collection::btree_map(prop::sample::select(vec!["f", "g", "h", "k"]), arb_value(), 0..4)
            .prop_map(|m| FeatureStructure::from_pairs(m.into_iter().map(|(n, v)| (Sym::new(n), v))).unwrap())
    }

    /// Renames variables by first occurrence over the resolved structure.
    fn canonical(b: &Binding, items: &[&FeatureStructure]) -> Vec<FeatureStructure> {
        let mut order = HashMap::new();
        items
            .iter()
            .map(|fs| {
                fs.map_values(&mut |v| match b.resolve(v) {
                    Value::Var(id) => {
                        let n = order.len() as u32;
                        Value::Var(VarId(*order.entry(id).or_insert(n)))
                    }
                    k => k,
                })
            })
            .collect()
    }

    proptest! {
        #[test]
        fn unification_is_commutative(a in arb_fs(), b in arb_fs()) {
            let ab = unify(&a, &b, &Binding::new());
            let ba = unify(&b, &a, &Binding::new());
            prop_assert_eq!(ab.is_some(), ba.is_some());
            if let (Some(x), Some(y)) = (ab, ba) {
                prop_assert_eq!(canonical(&x, &[&a, &b]), canonical(&y, &[&a, &b]));
            }
        }

        #[test]
        fn unification_is_associative(a in arb_fs(), b in arb_fs(), c in arb_fs()) {
            let left = unify(&a, &b, &Binding::new()).and_then(|x| unify(&b, &c, &x));
            let right = unify(&b, &c, &Binding::new()).and_then(|x| unify(&a, &b, &x));
            prop_assert_eq!(left.is_some(), right.is_some());
            if let (Some(x), Some(y)) = (left, right) {
                prop_assert_eq!(canonical(&x, &[&a, &b, &c]), canonical(&y, &[&a, &b, &c]));
            }
        }

        #[test]
        fn empty_structure_changes_nothing(a in arb_fs()) {
            let out = unify(&a, &FeatureStructure::new(), &Binding::new()).unwrap();
            prop_assert!(out.is_empty());
        }

        #[test]
        fn compressed_binding_is_idempotent(a in arb_fs(), b in arb_fs()) {
            if let Some(x) = unify(&a, &b, &Binding::new()) {
                let once = x.apply(&a);
                prop_assert_eq!(x.apply(&once), once);
            }
        }
    }
}
