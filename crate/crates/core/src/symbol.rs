//! Process-wide string interner for category names, feature names and constants.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use rustc_hash::FxHashMap;

#[derive(Default)]
struct Interner {
    ids: FxHashMap<&'static str, u32>,
    names: Vec<&'static str>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(Default::default)
}

thread_local! {
    /// Per-thread copy of the name table, so reading a name takes no lock.
    static NAMES: RefCell<Vec<&'static str>> = const { RefCell::new(Vec::new()) };
}

/// An interned string. Equality and hashing are by id, ordering is by text so
/// that anything sorted by symbol is reproducible across processes.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sym(u32);

impl Sym {
    pub fn new(text: &str) -> Sym {
        if let Some(&id) = interner().read().unwrap().ids.get(text) {
            return Sym(id);
        }
        let mut table = interner().write().unwrap();
        if let Some(&id) = table.ids.get(text) {
            return Sym(id);
        }
        let leaked: &'static str = Box::leak(text.to_owned().into_boxed_str());
        let id = table.names.len() as u32;
        table.names.push(leaked);
        table.ids.insert(leaked, id);
        Sym(id)
    }

    pub fn as_str(self) -> &'static str {
        NAMES.with(|names| {
            if let Some(&name) = names.borrow().get(self.0 as usize) {
                return name;
            }
            let table = interner().read().unwrap();
            let mut names = names.borrow_mut();
            let known = names.len();
            names.extend_from_slice(&table.names[known..]);
            names[self.0 as usize]
        })
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<&str> for Sym {
    fn from(text: &str) -> Self {
        Sym::new(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable() {
        let a = Sym::new("noun");
        let b = Sym::new("noun");
        assert_eq!(a, b);
        assert_eq!(a.as_str(), "noun");
        assert_ne!(a, Sym::new("Noun"));
    }

    #[test]
    fn ordering_follows_text() {
        let z = Sym::new("zz-order");
        let a = Sym::new("aa-order");
        assert!(a < z);
    }
}
