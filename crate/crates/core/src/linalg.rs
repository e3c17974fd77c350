//! Exact reachability probabilities in Markov chains by direct linear solve.

use nalgebra::{DMatrix, DVector};

/// Probability of eventually reaching `target` from every state of the chain
/// given by sparse `rows`.
///
/// States that cannot reach `target` along positive edges are fixed to 0, so
/// the remaining system `(I - Q) x = b` is non-singular.
pub fn reach_probabilities(rows: &[Vec<(usize, f64)>], target: &[bool]) -> Vec<f64> {
    let n = rows.len();
    let can_reach = backward_closure(rows, target);
    let unknown: Vec<usize> = (0..n).filter(|&s| can_reach[s] && !target[s]).collect();
    let mut value: Vec<f64> = (0..n).map(|s| if target[s] { 1.0 } else { 0.0 }).collect();
    if unknown.is_empty() {
        return value;
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        pos[s] = i;
    }
    let k = unknown.len();
    let mut a = DMatrix::<f64>::identity(k, k);
    let mut b = DVector::<f64>::zeros(k);
    for (i, &s) in unknown.iter().enumerate() {
        for &(t, p) in &rows[s] {
            if target[t] {
                b[i] += p;
            } else if pos[t] != usize::MAX {
                a[(i, pos[t])] -= p;
            }
        }
    }
    let x = a.lu().solve(&b).expect("reachability system is non-singular once value-0 states are removed");
    for (i, &s) in unknown.iter().enumerate() {
        value[s] = x[i].clamp(0.0, 1.0);
    }
    value
}

/// States with a positive-probability path into `target`.
pub fn backward_closure(rows: &[Vec<(usize, f64)>], target: &[bool]) -> Vec<bool> {
    let n = rows.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, row) in rows.iter().enumerate() {
        for &(t, p) in row {
            if p > 0.0 {
                pred[t].push(s);
            }
        }
    }
    let mut seen = target.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&s| target[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &pred[t] {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}
