//! Small combinatorial helpers.

use crate::Natural;

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// `C(n, k)`, zero when `k > n` or `n < 0`.
pub fn binomial(n: i128, k: i128) -> Natural {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: Natural = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by i + 1 after the multiplication.
        acc = acc * (n - i) as Natural / (i + 1) as Natural;
    }
    acc
}

/// Number of `r`-subsets of `{1..X}` without two consecutive elements:
/// `C(X - r + 1, r)`.
pub fn no_close_pair_count(x: usize, r: usize) -> Natural {
    binomial(x as i128 - r as i128 + 1, r as i128)
}

/// Calls `visit` on every weak composition of `total` into `parts` parts.
pub fn for_each_composition(total: usize, parts: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(rest: usize, parts: usize, buf: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if buf.len() + 1 == parts {
            buf.push(rest);
            visit(buf);
            buf.pop();
            return;
        }
        for v in 0..=rest {
            buf.push(v);
            go(rest - v, parts, buf, visit);
            buf.pop();
        }
    }
    if parts == 0 {
        if total == 0 {
            visit(&[]);
        }
        return;
    }
    go(total, parts, &mut Vec::with_capacity(parts), visit);
}

/// Calls `visit` on every nondecreasing sequence of length `size` over
/// `items` (multisets of size `size`).
pub fn for_each_multiset<T: Copy>(items: &[T], size: usize, visit: &mut impl FnMut(&[T])) {
    fn go<T: Copy>(items: &[T], start: usize, size: usize, buf: &mut Vec<T>, visit: &mut impl FnMut(&[T])) {
        if buf.len() == size {
            visit(buf);
            return;
        }
        for i in start..items.len() {
            buf.push(items[i]);
            go(items, i, size, buf, visit);
            buf.pop();
        }
    }
    go(items, 0, size, &mut Vec::with_capacity(size), visit);
}

/// Calls `visit` on every strictly increasing sequence of length `size`
/// over `items` (subsets of size `size`).
pub fn for_each_subset<T: Copy>(items: &[T], size: usize, visit: &mut impl FnMut(&[T])) {
    fn go<T: Copy>(items: &[T], start: usize, size: usize, buf: &mut Vec<T>, visit: &mut impl FnMut(&[T])) {
        if buf.len() == size {
            visit(buf);
            return;
        }
        let need = size - buf.len();
        for i in start..items.len() {
            if items.len() - i < need {
                break;
            }
            buf.push(items[i]);
            go(items, i + 1, size, buf, visit);
            buf.pop();
        }
    }
    go(items, 0, size, &mut Vec::with_capacity(size), visit);
}

/// Calls `visit` on every permutation of `0..n` in lexicographic order.
pub fn for_each_permutation(n: usize, visit: &mut impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        visit(&p);
        // Next permutation in lexicographic order.
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { return };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// All words of length exactly `len` over `nletters` letters, in
/// lexicographic order.
pub fn words_of_length(nletters: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (nletters as u64).checked_pow(len as u32).expect("too many words");
    let total = if nletters == 0 && len > 0 { 0 } else { total };
    (0..total).map(move |mut code| {
        let mut w = vec![0; len];
        for slot in w.iter_mut().rev() {
            *slot = (code % nletters as u64) as usize;
            code /= nletters as u64;
        }
        w
    })
}

/// All words of length at most `max_len`, shortest first.
pub fn words_up_to(nletters: usize, max_len: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..=max_len).flat_map(move |len| words_of_length(nletters, len))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(-1, 0), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn compositions_and_multisets() {
        let mut n = 0;
        for_each_composition(3, 3, &mut |c| {
            assert_eq!(c.iter().sum::<usize>(), 3);
            n += 1;
        });
        assert_eq!(n, 10);
        let mut m = 0;
        for_each_multiset(&[1, 2, 3, 4], 2, &mut |_| m += 1);
        assert_eq!(m, 10);
        let mut s = 0;
        for_each_subset(&[1, 2, 3, 4], 2, &mut |_| s += 1);
        assert_eq!(s, 6);
        let mut perms = Vec::new();
        for_each_permutation(3, &mut |p| perms.push(p.to_vec()));
        assert_eq!(perms.len(), 6);
        assert_eq!(perms[1], vec![0, 2, 1]);
    }

    #[test]
    fn word_enumeration() {
        assert_eq!(words_up_to(2, 3).count(), 15);
        assert_eq!(words_of_length(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(words_of_length(2, 2).nth(2), Some(vec![1, 0]));
    }
}
