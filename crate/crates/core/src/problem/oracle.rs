//! Exhaustive oracles for small instances.
//!
//! Both searches walk configurations in lexicographic order and keep an
//! incremental (fast, slightly inexact) objective. Any configuration whose fast
//! value lands within a small band of the incumbent is re-evaluated with the
//! exact fixed-order objective, so the returned value is always the exact
//! objective of the returned configuration and ties resolve to the
//! lexicographically smallest configuration.

use std::f64::consts::TAU;

use super::{evaluate_qco, evaluate_qubo, CouplingMatrix, PhaseVector, ProblemError, SpinVector};

/// Largest `n` accepted by [`brute_force_qubo`].
pub const BRUTE_FORCE_MAX_N: usize = 24;

/// Largest number of grid configurations `k^(n-1)` accepted by [`grid_search_qco`].
pub const GRID_SEARCH_BUDGET: u64 = 1 << 28;

fn band(q: &CouplingMatrix) -> f64 {
    1e-9 * (1.0 + q.offdiag_l1() + q.diag().iter().map(|d| d.abs()).sum::<f64>())
}

/// Exact QUBO maximizer by enumeration of all `2^n` spin vectors.
///
/// Ties go to the lexicographically smallest vector with `-1 < +1`.
pub fn brute_force_qubo(q: &CouplingMatrix) -> Result<(SpinVector, f64), ProblemError> {
    let n = q.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(ProblemError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let adj = q.adjacency();
    let band = band(q);

    // Counter bit b drives spin n-1-b, so counting upward is lexicographic.
    let mut s = vec![-1_i8; n];
    let mut field: Vec<f64> = adj
        .iter()
        .map(|row| row.iter().map(|&(j, v)| v * f64::from(s[j])).sum())
        .collect();
    let exact = |s: &[i8]| evaluate_qubo(q, &SpinVector(s.to_vec())).expect("length checked");

    let mut pair_sum = 0.5 * (0..n).map(|i| f64::from(s[i]) * field[i]).sum::<f64>();
    let mut best_fast = pair_sum;
    let mut best_exact = exact(&s);
    let mut best = s.clone();

    let total: u64 = 1 << n;
    for c in 1..total {
        // Incrementing flips the trailing ones of c-1 plus the next bit.
        let flips = (c - 1).trailing_ones() as usize + 1;
        for b in 0..flips {
            let k = n - 1 - b;
            let old = f64::from(s[k]);
            pair_sum -= 2.0 * old * field[k];
            s[k] = -s[k];
            for &(j, v) in &adj[k] {
                field[j] -= 2.0 * v * old;
            }
        }
        if pair_sum > best_fast + band {
            best_fast = pair_sum;
            best_exact = exact(&s);
            best.copy_from_slice(&s);
        } else if pair_sum >= best_fast - band {
            let value = exact(&s);
            if value > best_exact {
                best_fast = pair_sum;
                best_exact = value;
                best.copy_from_slice(&s);
            }
        }
    }
    Ok((SpinVector(best), best_exact))
}

/// Best QCO objective over phases restricted to multiples of `2π/k`.
///
/// The first phase is pinned to zero (global rotation) and the second is
/// restricted to `[0, π]` (global reflection), neither of which changes the
/// optimum or the lexicographically smallest optimizer.
pub fn grid_search_qco(q: &CouplingMatrix, k: usize) -> Result<(PhaseVector, f64), ProblemError> {
    let n = q.n();
    if k == 0 {
        return Err(ProblemError::InvalidGrid(k));
    }
    let configs = (k as u64).checked_pow(n.saturating_sub(1) as u32);
    match configs {
        Some(c) if c <= GRID_SEARCH_BUDGET => {}
        _ => {
            return Err(ProblemError::BudgetExceeded {
                n,
                k,
                budget: GRID_SEARCH_BUDGET,
            })
        }
    }
    let to_phases =
        |a: &[usize]| PhaseVector(a.iter().map(|&x| x as f64 * TAU / k as f64).collect());
    if n <= 1 {
        let theta = PhaseVector::zeros(n);
        let value = evaluate_qco(q, &theta)?;
        return Ok((theta, value));
    }

    // cos(2π d / k) for d in (-k, k), indexed by d + k.
    let table: Vec<f64> = (0..2 * k)
        .map(|d| libm::cos(TAU * (d as f64 - k as f64) / k as f64))
        .collect();
    let last = n - 1;
    let range = |i: usize| match i {
        0 => 1,
        1 => k / 2 + 1,
        _ => k,
    };
    let inner: Vec<(usize, f64)> = q.adjacency()[last].clone();
    let outer: Vec<_> = q
        .entries()
        .iter()
        .filter(|e| e.j != last)
        .copied()
        .collect();
    let band = band(q);

    let mut a = vec![0_usize; n];
    let mut best = a.clone();
    let mut best_fast = f64::NEG_INFINITY;
    let mut best_exact = f64::NEG_INFINITY;
    loop {
        let base: f64 = outer
            .iter()
            .map(|e| e.value * table[a[e.i] + k - a[e.j]])
            .sum();
        for c in 0..range(last) {
            let fast = base
                + inner
                    .iter()
                    .map(|&(j, v)| v * table[c + k - a[j]])
                    .sum::<f64>();
            if fast < best_fast - band {
                continue;
            }
            a[last] = c;
            let value = evaluate_qco(q, &to_phases(&a))?;
            if fast > best_fast + band || value > best_exact {
                best_fast = fast;
                best_exact = value;
                best.copy_from_slice(&a);
            }
        }
        a[last] = 0;
        // Odometer over the outer coordinates 1..last, highest index fastest.
        let mut p = last;
        let advanced = loop {
            if p == 1 {
                break false;
            }
            p -= 1;
            if a[p] + 1 < range(p) {
                a[p] += 1;
                break true;
            }
            a[p] = 0;
        };
        if !advanced {
            return Ok((to_phases(&best), best_exact));
        }
    }
}
