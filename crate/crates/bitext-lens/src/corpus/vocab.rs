use std::collections::HashMap;

/// Bidirectional type↔id map with per-type occurrence counts for one side
/// of the corpus.
///
/// Ids are assigned in first-occurrence order, so building a vocabulary
/// from the same pair sequence always yields the same ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    surfaces: Vec<String>,
    index: HashMap<String, u32>,
    counts: Vec<u64>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one occurrence of `surface`, interning it if unseen.
    pub(crate) fn observe(&mut self, surface: &str) -> u32 {
        match self.index.get(surface) {
            Some(&id) => {
                self.counts[id as usize] += 1;
                id
            }
            None => {
                let id = self.surfaces.len() as u32;
                self.surfaces.push(surface.to_owned());
                self.index.insert(surface.to_owned(), id);
                self.counts.push(1);
                id
            }
        }
    }

    pub fn id(&self, surface: &str) -> Option<u32> {
        self.index.get(surface).copied()
    }

    pub fn surface(&self, id: u32) -> &str {
        &self.surfaces[id as usize]
    }

    pub fn count_by_id(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    /// Occurrence count for a surface, zero if never seen.
    pub fn count(&self, surface: &str) -> u64 {
        self.id(surface).map_or(0, |id| self.counts[id as usize])
    }

    /// Number of distinct types.
    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    /// Total occurrences across all types.
    pub fn token_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Iterate `(surface, count)` in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.surfaces
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_follow_first_occurrence() {
        let mut v = Vocabulary::new();
        assert_eq!(v.observe("whale"), 0);
        assert_eq!(v.observe("sea"), 1);
        assert_eq!(v.observe("whale"), 0);
        assert_eq!(v.count("whale"), 2);
        assert_eq!(v.count("sea"), 1);
        assert_eq!(v.count("ahab"), 0);
        assert_eq!(v.len(), 2);
        assert_eq!(v.token_count(), 3);
        assert_eq!(v.surface(1), "sea");
    }
}
