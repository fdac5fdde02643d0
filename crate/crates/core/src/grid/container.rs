//! Data containers that survive grid adaptation.

use std::collections::BTreeMap;

use super::entity::{Entity, GlobalId};
use super::hierarchical::HierarchicalGrid;

/// Entity data keyed by persistent id, so values outlive refinement and
/// coarsening of the grid that produced them. One container holds data for
/// one codimension.
pub struct PersistentContainer<T> {
    codim: usize,
    data: BTreeMap<GlobalId, T>,
}

impl<T> PersistentContainer<T> {
    pub fn new(codim: usize) -> Self {
        PersistentContainer { codim, data: BTreeMap::new() }
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn key(&self, e: &Entity) -> GlobalId {
        assert_eq!(e.codim(), self.codim, "entity codimension does not match the container");
        e.id()
    }

    pub fn insert(&mut self, e: &Entity, value: T) -> Option<T> {
        let k = self.key(e);
        self.data.insert(k, value)
    }

    pub fn get(&self, e: &Entity) -> Option<&T> {
        self.data.get(&self.key(e))
    }

    pub fn get_mut(&mut self, e: &Entity) -> Option<&mut T> {
        let k = self.key(e);
        self.data.get_mut(&k)
    }

    pub fn get_by_id(&self, id: &GlobalId) -> Option<&T> {
        self.data.get(id)
    }

    pub fn remove(&mut self, e: &Entity) -> Option<T> {
        let k = self.key(e);
        self.data.remove(&k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GlobalId, &T)> {
        self.data.iter()
    }

    /// Drops all entries whose entity no longer exists anywhere in the
    /// hierarchy.
    pub fn compact(&mut self, grid: &HierarchicalGrid) {
        let live = grid.collect_ids(self.codim);
        self.data.retain(|id, _| live.contains(id));
    }
}
