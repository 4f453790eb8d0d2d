//! The partition of ℕ into consecutive intervals `I_j` of length `2^j`, and
//! the round-robin assignment of the functions `φ_i` to those intervals.

/// `(min I_j, max I_j) = (2^j − 1, 2^{j+1} − 2)`, or `None` once `max I_j`
/// no longer fits in a `u64`.
pub fn interval_bounds(j: u32) -> Option<(u64, u64)> {
    if j >= 63 {
        return None;
    }
    Some(((1u64 << j) - 1, (1u64 << (j + 1)) - 2))
}

pub fn interval_len(j: u32) -> u64 {
    1u64 << j
}

/// Index of the interval containing position `x`.
pub fn interval_of(x: u64) -> u32 {
    63 - (x + 1).leading_zeros()
}

/// The `i` such that `φ_i` is assigned to `I_j`: the number of trailing zero
/// bits of `j + 1`.
pub fn assigned_phi(j: u32) -> u32 {
    (j + 1).trailing_zeros()
}

/// Distance between consecutive intervals carrying the same `φ_i`.
pub fn phi_period(i: u32) -> u32 {
    1 << (i + 1)
}

/// Intervals assigned to `φ_i` in increasing order: `j = 2^i − 1 + k·2^{i+1}`.
pub fn phi_intervals(i: u32) -> impl Iterator<Item = u32> {
    let first = (1u32 << i) - 1;
    (0u32..).map(move |k| first + k * phi_period(i))
}

/// `max I_j + 1`, the length of `A↾max I_j+1`.
pub fn end_of(j: u32) -> u64 {
    (1u64 << (j + 1)) - 1
}

/// Intervals `j` (in increasing order) that intersect positions `[lo, hi)`.
pub fn intervals_overlapping(lo: u64, hi: u64) -> impl Iterator<Item = u32> {
    if lo < hi {
        interval_of(lo)..interval_of(hi - 1) + 1
    } else {
        0..0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_examples() {
        assert_eq!(interval_bounds(0), Some((0, 0)));
        assert_eq!(interval_bounds(1), Some((1, 2)));
        assert_eq!(interval_bounds(3), Some((7, 14)));
    }

    #[test]
    fn bounds_are_consecutive_prefix_sums() {
        let mut next_min = 0u64;
        for j in 0..40 {
            let (lo, hi) = interval_bounds(j).unwrap();
            assert_eq!(lo, next_min);
            assert_eq!(hi - lo + 1, interval_len(j));
            next_min = hi + 1;
            for x in [lo, hi] {
                assert_eq!(interval_of(x), j);
            }
        }
    }

    #[test]
    fn assignment_examples() {
        assert_eq!(assigned_phi(0), 0);
        assert_eq!(assigned_phi(1), 1);
        assert_eq!(assigned_phi(3), 2);
        assert_eq!(assigned_phi(7), 3);
        for j in 0..200 {
            let i = assigned_phi(j);
            assert_eq!(assigned_phi(j + phi_period(i)), i);
            for k in j + 1..j + phi_period(i) {
                assert_ne!(assigned_phi(k), i);
            }
        }
    }

    #[test]
    fn phi_interval_listing() {
        let firsts: Vec<u32> = phi_intervals(1).take(3).collect();
        assert_eq!(firsts, vec![1, 5, 9]);
        assert!(phi_intervals(2).take(50).all(|j| assigned_phi(j) == 2));
    }

    #[test]
    fn overlap_listing() {
        assert_eq!(intervals_overlapping(5, 5).count(), 0);
        let v: Vec<u32> = intervals_overlapping(2, 8).collect();
        assert_eq!(v, vec![1, 2, 3]);
    }
}
