//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use platoon_core::scheduler::CompatibilityGraph;

/// Smallest achievable maximum lateness of jobs `(processing, due)` run back
/// to back from time 0, by trying every order.
pub fn brute_force_max_lateness(jobs: &[(f64, f64)]) -> f64 {
    fn go(jobs: &[(f64, f64)], used: &mut Vec<bool>, t: f64, worst: f64, best: &mut f64) {
        if worst >= *best {
            return;
        }
        if used.iter().all(|&u| u) {
            *best = worst;
            return;
        }
        for i in 0..jobs.len() {
            if !used[i] {
                used[i] = true;
                let c = t + jobs[i].0;
                go(jobs, used, c, worst.max(c - jobs[i].1), best);
                used[i] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(jobs, &mut vec![false; jobs.len()], 0.0, f64::NEG_INFINITY, &mut best);
    best
}

/// Maximal cliques by checking every vertex subset.
pub fn brute_force_maximal_cliques(g: &CompatibilityGraph) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        if !g.is_clique(&members) {
            continue;
        }
        let extendable = (0..n).any(|v| mask & (1 << v) == 0 && members.iter().all(|&m| g.adjacent(m, v)));
        if !extendable {
            out.push(members);
        }
    }
    out.sort();
    out
}

/// Minimum of the discretised cost ½∫u² for a double integrator moved from
/// `(0, v0)` to `(distance, vf)` in `duration`, with `nodes` grid points and
/// trapezoidal collocation. The constraints are linear in the node controls,
/// so the optimum is the minimum-norm solution of a 2-row system.
pub fn collocation_cost(v0: f64, vf: f64, distance: f64, duration: f64, nodes: usize) -> f64 {
    let n = nodes;
    let h = duration / (n - 1) as f64;
    // v_k = v0 + h Σ_{j<k} (u_j + u_{j+1}) / 2, p_N = h Σ_k (v_k + v_{k+1}) / 2.
    let mut a_v = vec![0.0; n];
    let mut a_p = vec![0.0; n];
    let mut dv = vec![0.0; n]; // d v_k / d u_j for the current k
    for k in 0..n - 1 {
        let mut next = dv.clone();
        next[k] += h / 2.0;
        next[k + 1] += h / 2.0;
        for j in 0..n {
            a_p[j] += h / 2.0 * (dv[j] + next[j]);
        }
        dv = next;
    }
    a_v.copy_from_slice(&dv);
    let b_v = vf - v0;
    let b_p = distance - v0 * duration;
    let w: Vec<f64> = (0..n).map(|k| if k == 0 || k == n - 1 { h / 2.0 } else { h }).collect();
    // u = W⁻¹ Aᵀ λ with (A W⁻¹ Aᵀ) λ = b.
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).zip(&w).map(|((a, b), w)| a * b / w).sum::<f64>();
    let (m11, m12, m22) = (dot(&a_v, &a_v), dot(&a_v, &a_p), dot(&a_p, &a_p));
    let det = m11 * m22 - m12 * m12;
    let l1 = (b_v * m22 - b_p * m12) / det;
    let l2 = (m11 * b_p - m12 * b_v) / det;
    let u: Vec<f64> = (0..n).map(|k| (a_v[k] * l1 + a_p[k] * l2) / w[k]).collect();
    0.5 * u.iter().zip(&w).map(|(u, w)| w * u * u).sum::<f64>()
}
