//! Ruge–Stüben C/F splitting.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::strength::{transpose_pattern, StrengthGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CfPoint {
    C,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    U,
    C,
    F,
}

/// RS splitting. The first pass picks C points by descending measure
/// `|Sᵀ_i|` with a seeded random tiebreak. Points with no strong
/// connections at all become C. The optional second pass makes every strong
/// F–F pair share a strong C neighbor. Every F point ends with at least one
/// strong C neighbor.
pub fn rs_coarsen(s: &StrengthGraph, second_pass: bool, seed: u64) -> Vec<CfPoint> {
    let n = s.nrows;
    let (tp, ti) = transpose_pattern(s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tiebreak: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
    let mut lambda: Vec<usize> = (0..n).map(|i| tp[i + 1] - tp[i]).collect();
    let mut state = vec![State::U; n];
    let mut queue: BTreeSet<(usize, u64, usize)> = BTreeSet::new();
    for i in 0..n {
        let depends = s.row_ptr[i + 1] > s.row_ptr[i];
        if lambda[i] == 0 {
            state[i] = if depends { State::F } else { State::C };
        } else {
            queue.insert((lambda[i], tiebreak[i], i));
        }
    }
    while let Some(&(_, _, i)) = queue.iter().next_back() {
        queue.remove(&(lambda[i], tiebreak[i], i));
        state[i] = State::C;
        for &j in &ti[tp[i]..tp[i + 1]] {
            if state[j] != State::U {
                continue;
            }
            queue.remove(&(lambda[j], tiebreak[j], j));
            state[j] = State::F;
            for &k in s.row(j).0 {
                if state[k] == State::U {
                    queue.remove(&(lambda[k], tiebreak[k], k));
                    lambda[k] += 1;
                    queue.insert((lambda[k], tiebreak[k], k));
                }
            }
        }
        for &j in s.row(i).0 {
            if state[j] == State::U && lambda[j] > 0 {
                queue.remove(&(lambda[j], tiebreak[j], j));
                lambda[j] -= 1;
                queue.insert((lambda[j], tiebreak[j], j));
            }
        }
    }
    let is_c = |state: &[State], j: usize| state[j] == State::C;
    for i in 0..n {
        if state[i] == State::F && !s.row(i).0.iter().any(|&j| is_c(&state, j)) {
            state[i] = State::C;
        }
    }
    if second_pass {
        for i in 0..n {
            if state[i] != State::F {
                continue;
            }
            let mut c_i: Vec<usize> = s.row(i).0.iter().copied().filter(|&j| is_c(&state, j)).collect();
            let strong: Vec<usize> = s.row(i).0.to_vec();
            for j in strong {
                if state[j] != State::F {
                    continue;
                }
                let shared = s.row(j).0.iter().any(|k| c_i.contains(k));
                if !shared {
                    state[j] = State::C;
                    c_i.push(j);
                }
            }
        }
    }
    state
        .into_iter()
        .map(|st| if st == State::C { CfPoint::C } else { CfPoint::F })
        .collect()
}

/// Coarse index of every C point.
pub fn coarse_indices(split: &[CfPoint]) -> (Vec<Option<usize>>, usize) {
    let mut next = 0;
    let idx = split
        .iter()
        .map(|p| {
            if *p == CfPoint::C {
                next += 1;
                Some(next - 1)
            } else {
                None
            }
        })
        .collect();
    (idx, next)
}
