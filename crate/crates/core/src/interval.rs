//! Half-open frequency intervals and sorted interval lists.

use alloc::vec::Vec;

/// A half-open interval `[lo, hi)` in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (hi > lo).then_some(Interval { lo, hi })
    }
}

/// Whether `x` lies in any interval of the list.
pub fn contains_any(list: &[Interval], x: f64) -> bool {
    list.iter().any(|iv| iv.contains(x))
}

/// Sorts, merges intervals whose gap is at most `tol`, and drops slivers no
/// wider than `tol`.
pub fn normalize(mut list: Vec<Interval>, tol: f64) -> Vec<Interval> {
    list.retain(|iv| iv.hi > iv.lo);
    list.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(list.len());
    for iv in list {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi + tol => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out.retain(|iv| iv.width() > tol);
    out
}

/// Intersection of two sorted, disjoint interval lists.
pub fn intersect_lists(a: &[Interval], b: &[Interval], tol: f64) -> Vec<Interval> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if let Some(iv) = a[i].intersect(&b[j]) {
            out.push(iv);
        }
        if a[i].hi < b[j].hi {
            i += 1;
        } else {
            j += 1;
        }
    }
    normalize(out, tol)
}
