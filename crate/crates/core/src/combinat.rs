//! Enumeration helpers shared by the quality and gain drivers.

/// Nonempty subsets of `0..s`, ordered by size and then lexicographically.
pub fn subsets_by_size(s: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..=s).flat_map(move |size| Combinations::new(s, size))
}

/// `size`-element subsets of `0..n` in lexicographic order.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, size: usize) -> Self {
        let current = (size <= n).then(|| (0..size).collect());
        Combinations { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let size = out.len();
        let mut next = out.clone();
        let mut i = size;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - size + i {
                next[i] += 1;
                for t in i + 1..size {
                    next[t] = next[t - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Calls `f` on every `k` with `len` parts in `0..=cap` and `|k| <= total`,
/// in lexicographic order.
pub fn for_each_bounded(len: usize, cap: u32, total: u32, mut f: impl FnMut(&[u32])) {
    fn rec(k: &mut Vec<u32>, len: usize, cap: u32, left: u32, f: &mut impl FnMut(&[u32])) {
        if k.len() == len {
            f(k);
            return;
        }
        for v in 0..=cap.min(left) {
            k.push(v);
            rec(k, len, cap, left - v, f);
            k.pop();
        }
    }
    let mut k = Vec::with_capacity(len);
    rec(&mut k, len, cap, total, &mut f);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_ordering() {
        let all: Vec<Vec<usize>> = subsets_by_size(3).collect();
        assert_eq!(
            all,
            vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]]
        );
        assert_eq!(subsets_by_size(5).count(), 31);
    }

    #[test]
    fn bounded_count() {
        let mut bounded = 0;
        for_each_bounded(2, 3, 3, |_| bounded += 1);
        assert_eq!(bounded, 10);
    }
}
