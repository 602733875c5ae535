//! Colored triangular lattice sampler, coin-coupled to the word sampler.
//!
//! The triangle has rows `S = 2..=n`, row `S` holding boxes `Y = 1..=S-1`
//! scanned left to right; rows are scanned bottom index first. Box `(S, Y)`
//! consumes the coins of staircase-word letter position `box_index(S, Y)`
//! and acts the letter `box_to_letter(S, Y, n)`, so the permutation read off
//! the top boundary is bit-identical to [`crate::demazure::sample_sigma_word`]
//! at the same `(n, p, q, seed)`.
//!
//! Row `S` dynamics: the new color `n + 1 - S` enters at the left and walks
//! right as a carry. At box `(S, Y)` it meets the standing color of column
//! `Y`. If the letter acts (kept, and either the carry is the smaller color
//! or the q-coin fires), the two paths pass through each other: the standing
//! color exits upward, the carry walks on. Otherwise they bounce: the carry
//! exits upward and the standing color becomes the new carry. After the last
//! box the carry settles in column `S`. Level `S` therefore holds the colors
//! `{n-S+1, …, n}` in some order, and level `n` is `sigma` in one-line form.

use alloc::vec;
use alloc::vec::Vec;

use crate::coins::{CoinStream, Purpose};
use crate::demazure::check_params;
use crate::perm::Permutation;

/// Sequential scan index (0-based) of box `(S, Y)`.
pub fn box_index(s: usize, y: usize) -> usize {
    debug_assert!(2 <= s && 1 <= y && y < s);
    (s - 1) * (s - 2) / 2 + (y - 1)
}

/// The staircase-word letter acted by box `(S, Y)` of the size-`n` triangle.
pub fn box_to_letter(s: usize, y: usize, n: usize) -> usize {
    debug_assert!(2 <= s && s <= n && 1 <= y && y < s);
    n + y - s
}

/// Retained lattice data: per-box pass/bounce decisions in scan order and
/// the color arrangement crossing each level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleConfig {
    pub n: usize,
    /// `moves[box_index(S, Y)]` — whether the carry passed through.
    pub moves: Vec<bool>,
    /// `levels[S-1]` — colors at columns `1..=S` just above row `S`.
    /// `levels[0]` is the single entering color `n`.
    pub levels: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleSample {
    pub sigma: Permutation,
    /// Present when sampling was asked to retain the configuration.
    pub config: Option<TriangleConfig>,
}

/// Runs the triangle sampler. With `retain` set, the full configuration is
/// kept (`O(n^2)` memory); otherwise only the boundary permutation.
pub fn sample_colored_triangle(
    n: usize,
    p: f64,
    q: f64,
    coins: &CoinStream,
    retain: bool,
) -> TriangleSample {
    check_params(n, p, q);
    let mut state: Vec<u32> = vec![n as u32];
    let mut moves: Vec<bool> = Vec::new();
    let mut levels: Vec<Vec<u32>> = Vec::new();
    if retain {
        moves.reserve(n * (n - 1) / 2);
        levels.push(state.clone());
    }
    let mut t: u64 = 0;
    for s in 2..=n {
        let mut carry = (n + 1 - s) as u32;
        for y in 1..s {
            let standing = state[y - 1];
            let kept = coins.letter(t, Purpose::Keep) < p;
            let passes = kept && (carry < standing || coins.letter(t, Purpose::QFlip) < q);
            if !passes {
                core::mem::swap(&mut state[y - 1], &mut carry);
            }
            if retain {
                moves.push(passes);
            }
            t += 1;
        }
        state.push(carry);
        if retain {
            levels.push(state.clone());
        }
    }
    let sigma = Permutation::from_images(state).expect("triangle state is a permutation");
    TriangleSample {
        sigma,
        config: retain.then_some(TriangleConfig { n, moves, levels }),
    }
}

impl TriangleConfig {
    /// Re-derives the boundary permutation from the recorded decisions by
    /// folding the staircase word over `S_n` directly — an independent
    /// route used to cross-check the in-place carry dynamics.
    pub fn replay_sigma(&self) -> Permutation {
        let word = crate::demazure::staircase_word(self.n);
        assert_eq!(word.letters.len(), self.moves.len());
        let mut sigma = Permutation::identity(self.n);
        for (&k, &moved) in word.letters.iter().zip(&self.moves) {
            if moved {
                sigma = sigma.right_multiply_simple(k);
            }
        }
        sigma
    }

    /// Outgoing `(top, right)` colors of every box in scan order, rebuilt
    /// from the recorded decisions: the standing color exits upward on a
    /// pass, the carry on a bounce; the other one walks right.
    pub fn box_outputs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.moves.len());
        for s in 2..=self.n {
            let mut state = self.levels[s - 2].clone();
            let mut carry = (self.n + 1 - s) as u32;
            for y in 1..s {
                if !self.moves[box_index(s, y)] {
                    core::mem::swap(&mut state[y - 1], &mut carry);
                }
                out.push((state[y - 1], carry));
            }
            debug_assert_eq!(carry, self.levels[s - 1][s - 1]);
        }
        out
    }

    /// Colored height at `(level, column)`: the number of colors `<= c`
    /// crossing level `level` at columns `>= y`. Requires
    /// `1 <= y <= level <= n` and a retained configuration.
    pub fn colored_height(&self, level: usize, c: u32, y: usize) -> usize {
        assert!(1 <= level && level <= self.n && 1 <= y && y <= level);
        self.levels[level - 1][y - 1..]
            .iter()
            .filter(|&&color| color <= c)
            .count()
    }

    /// Color-blind projection at threshold `c`: colors `<= c` become
    /// particles, larger colors become empty sites.
    pub fn forget_colors(&self, c: u32) -> UncoloredConfig {
        UncoloredConfig {
            levels: self
                .levels
                .iter()
                .map(|row| row.iter().map(|&color| color <= c).collect())
                .collect(),
        }
    }
}

/// Occupation data of the color-blind triangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UncoloredConfig {
    /// `levels[S-1][Y-1]` — whether column `Y` of level `S` is occupied.
    pub levels: Vec<Vec<bool>>,
}

impl UncoloredConfig {
    /// Particles at columns `>= y` of `level`.
    pub fn height(&self, level: usize, y: usize) -> usize {
        assert!(1 <= level && level <= self.levels.len() && 1 <= y && y <= level);
        self.levels[level - 1][y - 1..]
            .iter()
            .filter(|&&occ| occ)
            .count()
    }
}
