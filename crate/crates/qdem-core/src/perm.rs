//! Finite permutations, Coxeter length, and the permutation height function.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// A permutation of `{1, …, n}`, stored as its sequence of images:
/// `images[i-1] = sigma(i)`. One-indexed values throughout.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<u32>,
}

/// Why a slice of values failed to be a permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PermError {
    Empty,
    /// A value outside `1..=n` or repeated.
    NotBijective { value: u32 },
}

impl fmt::Display for PermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PermError::Empty => write!(f, "permutation must have n >= 1"),
            PermError::NotBijective { value } => {
                write!(f, "images are not a bijection of 1..=n (offending value {value})")
            }
        }
    }
}

impl Permutation {
    /// The identity of `S_n`.
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n as u32).collect(),
        }
    }

    /// The longest element `w0` (the order-reversing permutation).
    pub fn longest(n: usize) -> Self {
        Permutation {
            images: (1..=n as u32).rev().collect(),
        }
    }

    /// Validates that `images` is a bijection of `1..=n`.
    pub fn from_images(images: Vec<u32>) -> Result<Self, PermError> {
        if images.is_empty() {
            return Err(PermError::Empty);
        }
        let n = images.len() as u32;
        let mut seen = alloc::vec![false; images.len()];
        for &v in &images {
            if v < 1 || v > n || seen[(v - 1) as usize] {
                return Err(PermError::NotBijective { value: v });
            }
            seen[(v - 1) as usize] = true;
        }
        Ok(Permutation { images })
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    /// `sigma(i)` for one-indexed `i`. Panics if `i` is out of range.
    pub fn image(&self, i: usize) -> u32 {
        assert!(1 <= i && i <= self.n(), "argument {i} outside 1..={}", self.n());
        self.images[i - 1]
    }

    /// Coxeter length: the number of inversions.
    pub fn length(&self) -> u64 {
        let mut inv = 0u64;
        for i in 0..self.images.len() {
            for j in i + 1..self.images.len() {
                if self.images[i] > self.images[j] {
                    inv += 1;
                }
            }
        }
        inv
    }

    /// Left multiplication by an adjacent transposition: `s_k ∘ sigma`,
    /// which swaps the values `k` and `k+1` wherever they occur.
    /// Panics unless `1 <= k <= n-1`.
    pub fn left_multiply_simple(&self, k: usize) -> Permutation {
        assert!(1 <= k && k < self.n(), "simple reflection index {k} outside 1..={}", self.n() - 1);
        let (a, b) = (k as u32, k as u32 + 1);
        let mut images = self.images.clone();
        for v in images.iter_mut() {
            if *v == a {
                *v = b;
            } else if *v == b {
                *v = a;
            }
        }
        Permutation { images }
    }

    /// Right multiplication by an adjacent transposition: `sigma ∘ s_k`,
    /// which swaps the entries in positions `k` and `k+1`.
    /// Panics unless `1 <= k <= n-1`.
    pub fn right_multiply_simple(&self, k: usize) -> Permutation {
        assert!(1 <= k && k < self.n(), "simple reflection index {k} outside 1..={}", self.n() - 1);
        let mut images = self.images.clone();
        images.swap(k - 1, k);
        Permutation { images }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = alloc::vec![0u32; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            images[(v - 1) as usize] = i as u32 + 1;
        }
        Permutation { images }
    }

    /// `#{i <= m : sigma(i) > j}` — the integer core of the height function.
    pub fn prefix_exceed(&self, m: usize, j: u32) -> usize {
        let m = m.min(self.n());
        self.images[..m].iter().filter(|&&v| v > j).count()
    }

    /// Height function `H_sigma(x, y) = (1/n) #{i <= ⌊nx⌋ : sigma(i) > ⌊ny⌋}`
    /// for `x, y` in `[0, 1]`. Floors are taken exactly as written; callers
    /// needing lattice-exact counts should use [`Permutation::prefix_exceed`].
    pub fn height(&self, x: f64, y: f64) -> f64 {
        assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y), "height arguments outside the unit square");
        let n = self.n() as f64;
        let m = (n * x) as usize;
        let j = (n * y) as u32;
        self.prefix_exceed(m, j) as f64 / n
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

/// Text format: the images `sigma(1) sigma(2) … sigma(n)` space-separated.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut images = Vec::new();
        for tok in s.split_whitespace() {
            let v: u32 = tok
                .parse()
                .map_err(|_| alloc::format!("invalid permutation entry {tok:?}"))?;
            images.push(v);
        }
        Permutation::from_images(images).map_err(|e| alloc::format!("{e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_of_reference_elements() {
        assert_eq!(Permutation::identity(5).length(), 0);
        assert_eq!(Permutation::longest(4).length(), 6);
        assert_eq!(Permutation::identity(3).left_multiply_simple(1).length(), 1);
    }

    #[test]
    fn left_multiply_swaps_values() {
        let s1 = Permutation::identity(2).left_multiply_simple(1);
        assert_eq!(s1.images(), &[2, 1]);
        assert_eq!(s1.left_multiply_simple(1), Permutation::identity(2));

        let sigma = Permutation::from_images(alloc::vec![2, 1, 3]).unwrap();
        let out = sigma.left_multiply_simple(2);
        assert_eq!(out.images(), &[3, 1, 2]);
        assert_eq!(out.length(), 2);
    }

    // Independent oracle: s_k ∘ sigma as literal function composition.
    #[test]
    fn left_multiply_matches_composition_on_s3() {
        fn compose(k: usize, sigma: &Permutation) -> Vec<u32> {
            let n = sigma.n() as u32;
            (1..=n)
                .map(|i| {
                    let v = sigma.image(i as usize);
                    if v == k as u32 {
                        k as u32 + 1
                    } else if v == k as u32 + 1 {
                        k as u32
                    } else {
                        v
                    }
                })
                .collect()
        }
        for images in permutations_of(3) {
            let sigma = Permutation::from_images(images).unwrap();
            for k in 1..3 {
                assert_eq!(sigma.left_multiply_simple(k).images(), compose(k, &sigma));
            }
        }
    }

    #[test]
    fn simple_multiplication_changes_length_by_one() {
        for n in 2..=6 {
            for images in permutations_of(n) {
                let sigma = Permutation::from_images(images).unwrap();
                let l = sigma.length() as i64;
                for k in 1..n {
                    let dl = sigma.left_multiply_simple(k).length() as i64 - l;
                    assert!(dl == 1 || dl == -1);
                    let dr = sigma.right_multiply_simple(k).length() as i64 - l;
                    assert!(dr == 1 || dr == -1);
                    // Ascent tests match the length change.
                    assert_eq!(dr == 1, sigma.image(k) < sigma.image(k + 1));
                    let inv = sigma.inverse();
                    assert_eq!(dl == 1, inv.image(k) < inv.image(k + 1));
                }
            }
        }
    }

    #[test]
    fn height_reference_values() {
        let id = Permutation::identity(10);
        assert_eq!(id.height(0.5, 0.2), 0.3);
        assert_eq!(id.height(0.0, 0.7), 0.0);
        assert_eq!(Permutation::longest(10).height(0.5, 0.5), 0.5);
    }

    #[test]
    fn height_boundaries_and_monotonicity() {
        for images in permutations_of(5) {
            let sigma = Permutation::from_images(images).unwrap();
            assert_eq!(sigma.height(1.0, 0.0), 1.0);
            assert_eq!(sigma.height(0.0, 0.3), 0.0);
            assert_eq!(sigma.height(0.7, 1.0), 0.0);
            let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
            for w in grid.windows(2) {
                for &t in &grid {
                    // Non-decreasing in x, non-increasing in y.
                    assert!(sigma.height(w[1], t) >= sigma.height(w[0], t));
                    assert!(sigma.height(t, w[1]) <= sigma.height(t, w[0]));
                }
            }
        }
    }

    #[test]
    fn from_images_rejects_non_bijections() {
        assert!(Permutation::from_images(alloc::vec![]).is_err());
        assert!(Permutation::from_images(alloc::vec![1, 1, 3]).is_err());
        assert!(Permutation::from_images(alloc::vec![0, 1, 2]).is_err());
        assert!(Permutation::from_images(alloc::vec![1, 2, 4]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let sigma = Permutation::from_images(alloc::vec![3, 1, 2]).unwrap();
        let s = alloc::format!("{sigma}");
        assert_eq!(s, "3 1 2");
        assert_eq!(s.parse::<Permutation>().unwrap(), sigma);
        assert!("1 2 2".parse::<Permutation>().is_err());
        assert!("1 a".parse::<Permutation>().is_err());
    }

    /// All permutations of {1..n} (Heap's algorithm, iterative).
    pub(crate) fn permutations_of(n: usize) -> Vec<Vec<u32>> {
        let mut cur: Vec<u32> = (1..=n as u32).collect();
        let mut out = alloc::vec![cur.clone()];
        let mut c = alloc::vec![0usize; n];
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    cur.swap(0, i);
                } else {
                    cur.swap(c[i], i);
                }
                out.push(cur.clone());
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        out
    }

    proptest::proptest! {
        #[test]
        fn inverse_is_involutive(perm in proptest::sample::select(permutations_of(6))) {
            let sigma = Permutation::from_images(perm).unwrap();
            proptest::prop_assert_eq!(sigma.inverse().inverse(), sigma.clone());
            proptest::prop_assert_eq!(sigma.inverse().length(), sigma.length());
        }
    }
}
