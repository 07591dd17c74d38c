//! Maps over a known integer key range, dense when the range is small.

use rustc_hash::FxHashMap;

/// Key ranges up to this size get a flat array.
pub(crate) const DENSE_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub(crate) enum Table<V> {
    Dense { slots: Vec<Option<V>>, len: usize },
    Sparse(FxHashMap<u64, V>),
}

impl<V> Default for Table<V> {
    fn default() -> Self {
        Table::Sparse(FxHashMap::default())
    }
}

impl<V> Table<V> {
    /// A table for keys in `0..range`.
    pub(crate) fn for_range(range: u64) -> Self {
        if range <= DENSE_LIMIT {
            let mut slots = Vec::new();
            slots.resize_with(range as usize, || None);
            Table::Dense { slots, len: 0 }
        } else {
            Table::Sparse(FxHashMap::default())
        }
    }

    #[inline]
    pub(crate) fn get(&self, key: u64) -> Option<&V> {
        match self {
            Table::Dense { slots, .. } => slots.get(key as usize).and_then(Option::as_ref),
            Table::Sparse(map) => map.get(&key),
        }
    }

    pub(crate) fn contains(&self, key: u64) -> bool {
        self.get(key).is_some()
    }

    pub(crate) fn len(&self) -> usize {
        match self {
            Table::Dense { len, .. } => *len,
            Table::Sparse(map) => map.len(),
        }
    }

    /// The entry for `key`, created by `make` if absent; the flag is true when created.
    #[inline]
    pub(crate) fn get_or_insert_with(
        &mut self,
        key: u64,
        make: impl FnOnce() -> V,
    ) -> (&mut V, bool) {
        match self {
            Table::Dense { slots, len } => {
                let slot = &mut slots[key as usize];
                let fresh = slot.is_none();
                if fresh {
                    *len += 1;
                }
                (slot.get_or_insert_with(make), fresh)
            }
            Table::Sparse(map) => {
                let mut fresh = false;
                let v = map.entry(key).or_insert_with(|| {
                    fresh = true;
                    make()
                });
                (v, fresh)
            }
        }
    }

    pub(crate) fn insert(&mut self, key: u64, value: V) {
        match self {
            Table::Dense { slots, len } => {
                let slot = &mut slots[key as usize];
                if slot.is_none() {
                    *len += 1;
                }
                *slot = Some(value);
            }
            Table::Sparse(map) => {
                map.insert(key, value);
            }
        }
    }

    pub(crate) fn remove(&mut self, key: u64) -> Option<V> {
        match self {
            Table::Dense { slots, len } => {
                let old = slots.get_mut(key as usize).and_then(Option::take);
                if old.is_some() {
                    *len -= 1;
                }
                old
            }
            Table::Sparse(map) => map.remove(&key),
        }
    }

    /// Entries in unspecified order.
    pub(crate) fn iter(&self) -> Box<dyn Iterator<Item = (u64, &V)> + '_> {
        match self {
            Table::Dense { slots, .. } => Box::new(
                slots
                    .iter()
                    .enumerate()
                    .filter_map(|(k, v)| v.as_ref().map(|v| (k as u64, v))),
            ),
            Table::Sparse(map) => Box::new(map.iter().map(|(&k, v)| (k, v))),
        }
    }
}
