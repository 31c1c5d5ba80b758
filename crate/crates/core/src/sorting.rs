//! Depth ordering per tile or per group under one shared total order.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SortEntry {
    pub id: u32,
    pub depth: f32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ListOwner {
    Tile(u32),
    Group(u32),
}

/// Entries are strictly increasing under [`depth_order`]. `masks`, when
/// present, runs parallel to `entries` and holds no zero word.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedList {
    pub owner: ListOwner,
    pub entries: Vec<SortEntry>,
    pub masks: Option<Vec<u16>>,
}

impl SortedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.id)
    }
}

pub trait DepthSource: Sync {
    fn depth_of(&self, id: u32) -> Option<f32>;
}

impl DepthSource for HashMap<u32, f32> {
    fn depth_of(&self, id: u32) -> Option<f32> {
        self.get(&id).copied()
    }
}

/// Ascending depth, ties by ascending id. NaN depths sort last.
pub fn depth_order(a: &SortEntry, b: &SortEntry) -> Ordering {
    a.depth.total_cmp(&b.depth).then(a.id.cmp(&b.id))
}

fn entry(id: u32, depths: &dyn DepthSource) -> Result<SortEntry> {
    let depth = depths
        .depth_of(id)
        .ok_or_else(|| Error::usage(format!("no depth for gaussian {id}")))?;
    Ok(SortEntry { id, depth })
}

fn check_strict(entries: &[SortEntry], owner: ListOwner) -> Result<()> {
    if let Some(w) = entries.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::usage(format!(
            "gaussian {} listed twice for {owner:?}",
            w[0].id
        )));
    }
    Ok(())
}

fn sort_one(ids: &[u32], owner: ListOwner, depths: &dyn DepthSource) -> Result<SortedList> {
    let mut entries = ids
        .iter()
        .map(|&id| entry(id, depths))
        .collect::<Result<Vec<_>>>()?;
    entries.sort_unstable_by(depth_order);
    check_strict(&entries, owner)?;
    Ok(SortedList {
        owner,
        entries,
        masks: None,
    })
}

/// One list per non-empty tile, in tile order.
pub fn sort_per_tile<D: DepthSource>(assignments: &[Vec<u32>], depths: &D) -> Result<Vec<SortedList>> {
    assignments
        .par_iter()
        .enumerate()
        .filter(|(_, ids)| !ids.is_empty())
        .map(|(t, ids)| sort_one(ids, ListOwner::Tile(t as u32), depths))
        .collect()
}

/// One list per non-empty group, in group order; masks move with their entries.
pub fn sort_per_group<D: DepthSource>(
    assignments: &[Vec<(u32, u16)>],
    depths: &D,
) -> Result<Vec<SortedList>> {
    assignments
        .par_iter()
        .enumerate()
        .filter(|(_, items)| !items.is_empty())
        .map(|(g, items)| {
            let owner = ListOwner::Group(g as u32);
            let mut paired = items
                .iter()
                .map(|&(id, mask)| {
                    if mask == 0 {
                        return Err(Error::usage(format!("zero mask for gaussian {id} in group {g}")));
                    }
                    Ok((entry(id, depths)?, mask))
                })
                .collect::<Result<Vec<_>>>()?;
            paired.sort_unstable_by(|a, b| depth_order(&a.0, &b.0));
            let (entries, masks): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
            check_strict(&entries, owner)?;
            Ok(SortedList {
                owner,
                entries,
                masks: Some(masks),
            })
        })
        .collect()
}

/// Comparison-sort work for one list of `n` entries.
pub fn sort_cost(n: u64) -> f64 {
    let n = n as f64;
    n * n.max(2.0).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn depths(pairs: &[(u32, f32)]) -> HashMap<u32, f32> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn orders_by_depth() {
        let d = depths(&[(0, 3.0), (1, 1.0), (2, 2.0)]);
        let lists = sort_per_tile(&[vec![0, 1, 2]], &d).unwrap();
        assert_eq!(lists[0].ids().collect::<Vec<_>>(), [1, 2, 0]);
    }

    #[test]
    fn equal_depth_breaks_by_id() {
        let d = depths(&[(7, 1.5), (3, 1.5)]);
        let lists = sort_per_tile(&[vec![7, 3]], &d).unwrap();
        assert_eq!(lists[0].ids().collect::<Vec<_>>(), [3, 7]);
    }

    #[test]
    fn empty_tiles_produce_no_list() {
        let d = depths(&[(0, 1.0)]);
        let lists = sort_per_tile(&[vec![], vec![0], vec![]], &d).unwrap();
        assert_eq!(lists.len(), 1);
        assert_eq!(lists[0].owner, ListOwner::Tile(1));
    }

    #[test]
    fn missing_depth_and_zero_mask_are_errors() {
        let d = depths(&[(0, 1.0)]);
        assert!(sort_per_tile(&[vec![1]], &d).is_err());
        assert!(sort_per_group(&[vec![(0, 0)]], &d).is_err());
        assert!(sort_per_tile(&[vec![0, 0]], &d).is_err());
    }

    #[test]
    fn single_group_degenerates_to_tile_sort() {
        let d = depths(&[(0, 0.5), (1, 2.0), (2, 0.1), (3, 0.5)]);
        let tiles = sort_per_tile(&[vec![0, 1, 2, 3]], &d).unwrap();
        let groups = sort_per_group(&[vec![(0, 1), (1, 1), (2, 1), (3, 1)]], &d).unwrap();
        assert_eq!(tiles[0].entries, groups[0].entries);
        assert_eq!(groups[0].masks.as_deref(), Some(&[1u16; 4][..]));
    }

    #[test]
    fn masks_follow_their_entries() {
        let d = depths(&[(0, 3.0), (1, 1.0), (2, 2.0)]);
        let g = sort_per_group(&[vec![(0, 0b001), (1, 0b010), (2, 0b100)]], &d).unwrap();
        assert_eq!(g[0].ids().collect::<Vec<_>>(), [1, 2, 0]);
        assert_eq!(g[0].masks.as_deref(), Some(&[0b010, 0b100, 0b001][..]));
    }

    #[test]
    fn sort_cost_floor_at_two() {
        assert_eq!(sort_cost(0), 0.0);
        assert_eq!(sort_cost(1), 1.0);
        assert_eq!(sort_cost(8), 24.0);
    }

    proptest! {
        #[test]
        fn output_is_sorted_permutation(raw in prop::collection::vec((0u8..20, 0u32..1000), 1..100)) {
            let mut d = HashMap::new();
            for (i, (depth, _)) in raw.iter().enumerate() {
                d.insert(i as u32, *depth as f32 * 0.25);
            }
            let ids: Vec<u32> = (0..raw.len() as u32).rev().collect();
            let list = &sort_per_tile(&[ids.clone()], &d).unwrap()[0];
            let mut got: Vec<u32> = list.ids().collect();
            for w in list.entries.windows(2) {
                prop_assert!(w[0].depth < w[1].depth || (w[0].depth == w[1].depth && w[0].id < w[1].id));
            }
            got.sort_unstable();
            let mut want = ids;
            want.sort_unstable();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn restriction_matches_independent_sort(
            raw in prop::collection::vec((0u8..10, 1u16..=u16::MAX), 1..80),
            bit in 0u32..16,
        ) {
            let d: HashMap<u32, f32> = raw.iter().enumerate().map(|(i, r)| (i as u32, r.0 as f32)).collect();
            let items: Vec<(u32, u16)> = raw.iter().enumerate().map(|(i, r)| (i as u32, r.1)).collect();
            let group = &sort_per_group(&[items.clone()], &d).unwrap()[0];
            let loc = 1u16 << bit;
            let filtered: Vec<u32> = group
                .ids()
                .zip(group.masks.as_ref().unwrap())
                .filter(|(_, m)| *m & loc != 0)
                .map(|(id, _)| id)
                .collect();
            let subset: Vec<u32> = items.iter().filter(|(_, m)| m & loc != 0).map(|(id, _)| *id).collect();
            let direct: Vec<u32> = if subset.is_empty() {
                vec![]
            } else {
                sort_per_tile(&[subset], &d).unwrap()[0].ids().collect()
            };
            prop_assert_eq!(filtered, direct);
        }
    }
}
