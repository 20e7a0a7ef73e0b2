//! Counting over strictly increasing posting lists.

use std::cmp::Ordering;

pub fn is_strictly_sorted<T: Ord>(list: &[T]) -> bool {
    list.windows(2).all(|w| w[0] < w[1])
}

/// Size of the intersection of all `lists`. Zero for no lists.
pub fn intersect_count(lists: &[&[u32]]) -> usize {
    let Some(shortest) = lists.iter().min_by_key(|l| l.len()) else {
        return 0;
    };
    let mut cursors = vec![0usize; lists.len()];
    let mut count = 0;
    'outer: for &id in *shortest {
        for (list, cursor) in lists.iter().zip(cursors.iter_mut()) {
            while *cursor < list.len() && list[*cursor] < id {
                *cursor += 1;
            }
            if *cursor == list.len() {
                break 'outer;
            }
            if list[*cursor] != id {
                continue 'outer;
            }
        }
        count += 1;
    }
    count
}

/// Size of the union of all `lists`.
pub fn union_count(lists: &[&[u32]]) -> usize {
    let mut cursors = vec![0usize; lists.len()];
    let mut count = 0;
    loop {
        let next = lists
            .iter()
            .zip(&cursors)
            .filter_map(|(list, &c)| list.get(c).copied())
            .min();
        let Some(id) = next else { return count };
        count += 1;
        for (list, cursor) in lists.iter().zip(cursors.iter_mut()) {
            if list.get(*cursor) == Some(&id) {
                *cursor += 1;
            }
        }
    }
}

/// Intersection size of two sorted lists.
pub fn pair_intersect_count(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}
