//! Harmonic cross-sections: occupation-number modes and ladder-operator
//! matrix elements of the generalized angular momenta.

use super::modes::{ModeLabels, ModeSet, DEG_TOL};
use crate::{Error, Result, C64};
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Sparse state in the occupation-number basis.
pub type FockState = BTreeMap<Vec<usize>, C64>;

fn lower(state: &FockState, mu: usize) -> FockState {
    let mut out = FockState::new();
    for (n, c) in state {
        if n[mu] > 0 {
            let mut m = n.clone();
            m[mu] -= 1;
            *out.entry(m).or_insert(C64::new(0.0, 0.0)) += c * (n[mu] as f64).sqrt();
        }
    }
    out
}

fn raise(state: &FockState, mu: usize) -> FockState {
    let mut out = FockState::new();
    for (n, c) in state {
        let mut m = n.clone();
        m[mu] += 1;
        *out.entry(m).or_insert(C64::new(0.0, 0.0)) += c * ((n[mu] + 1) as f64).sqrt();
    }
    out
}

fn add_scaled(acc: &mut FockState, other: &FockState, w: C64) {
    for (n, c) in other {
        *acc.entry(n.clone()).or_insert(C64::new(0.0, 0.0)) += c * w;
    }
}

/// Applies `Lambda_{mu nu}` using
/// `i hbar / (4 sqrt(w_mu w_nu)) [(w_mu - w_nu)(a_mu a_nu - a_mu^+ a_nu^+) + (w_mu + w_nu)(a_nu^+ a_mu - a_mu^+ a_nu)]`.
pub fn apply_lambda(state: &FockState, omega: &[f64], mu: usize, nu: usize, hbar: f64) -> FockState {
    let mut out = FockState::new();
    if mu == nu {
        return out;
    }
    let (wm, wn) = (omega[mu], omega[nu]);
    let pre = C64::new(0.0, hbar / (4.0 * (wm * wn).sqrt()));
    let diff = pre * (wm - wn);
    let sum = pre * (wm + wn);
    if wm != wn {
        add_scaled(&mut out, &lower(&lower(state, nu), mu), diff);
        add_scaled(&mut out, &raise(&raise(state, nu), mu), -diff);
    }
    add_scaled(&mut out, &raise(&lower(state, mu), nu), sum);
    add_scaled(&mut out, &raise(&lower(state, nu), mu), -sum);
    out.retain(|_, c| c.norm() != 0.0);
    out
}

fn basis_state(n: &[usize]) -> FockState {
    let mut s = FockState::new();
    s.insert(n.to_vec(), C64::new(1.0, 0.0));
    s
}

pub fn harmonic_energy(omega: &[f64], n: &[usize], hbar: f64) -> f64 {
    omega.iter().zip(n).map(|(w, &k)| hbar * w * (k as f64 + 0.5)).sum()
}

/// Ladder-operator `Lambda` and `Lambda2` matrices over the given occupations.
pub fn harmonic_lambda_matrices(
    omega: &[f64],
    occupations: &[Vec<usize>],
    hbar: f64,
) -> (Vec<DMatrix<C64>>, Vec<DMatrix<C64>>) {
    let d = omega.len();
    let k = occupations.len();
    let index: BTreeMap<&Vec<usize>, usize> = occupations.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let project =
        |s: &FockState| -> Vec<(usize, C64)> { s.iter().filter_map(|(n, c)| index.get(n).map(|&i| (i, *c))).collect() };
    let mut lambda = vec![DMatrix::<C64>::zeros(k, k); d * d];
    let mut once = vec![vec![FockState::new(); d * d]; k];
    for (j, n) in occupations.iter().enumerate() {
        let s = basis_state(n);
        for mu in 0..d {
            for nu in 0..d {
                let ls = apply_lambda(&s, omega, mu, nu, hbar);
                for (i, c) in project(&ls) {
                    lambda[mu * d + nu][(i, j)] = c;
                }
                once[j][mu * d + nu] = ls;
            }
        }
    }
    let mut lambda2 = vec![DMatrix::<C64>::zeros(k, k); d * d * d * d];
    for j in 0..k {
        for mu in 0..d {
            for nu in 0..d {
                for s in 0..d {
                    for t in 0..d {
                        let st = &once[j][s * d + t];
                        if st.is_empty() || mu == nu {
                            continue;
                        }
                        let full = apply_lambda(st, omega, mu, nu, hbar);
                        for (i, c) in project(&full) {
                            lambda2[((mu * d + nu) * d + s) * d + t][(i, j)] = c;
                        }
                    }
                }
            }
        }
    }
    (lambda, lambda2)
}

/// Harmonic modes labelled by occupation numbers; the occupations must share
/// one energy within the degeneracy tolerance.
pub fn harmonic_modes(omega: &[f64], occupations: &[Vec<usize>], hbar: f64) -> Result<ModeSet> {
    if occupations.is_empty() {
        return Err(Error::InvalidInput("no occupations requested".into()));
    }
    if omega.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidInput(format!("harmonic frequencies must be positive: {omega:?}")));
    }
    if let Some(n) = occupations.iter().find(|n| n.len() != omega.len()) {
        return Err(Error::ShapeMismatch(format!("occupation {n:?} for {} frequencies", omega.len())));
    }
    let energies: Vec<f64> = occupations.iter().map(|n| harmonic_energy(omega, n, hbar)).collect();
    let e0 = energies[0];
    if energies.iter().any(|e| (e - e0).abs() > DEG_TOL * e0.abs()) {
        return Err(Error::NotDegenerate { energies });
    }
    let (lambda, lambda2) = harmonic_lambda_matrices(omega, occupations, hbar);
    Ok(ModeSet {
        d: omega.len(),
        hbar,
        energies,
        labels: ModeLabels::Occupations(occupations.to_vec()),
        lambda,
        lambda2,
        phase_convention: "real Hermite functions".into(),
    })
}

/// Closed form of the diagonal element `<n| Lambda_{mu nu} Lambda_{s t} |n>`:
/// `-(hbar^2/8) [2 (n_mu + 1/2)(n_nu + 1/2)(w_mu^2 + w_nu^2)/(w_mu w_nu) - 1] (d_{mu t} d_{nu s} - d_{mu s} d_{nu t})`.
pub fn lambda2_closed_form(omega: &[f64], n: &[usize], mu: usize, nu: usize, s: usize, t: usize, hbar: f64) -> f64 {
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let pattern = delta(mu, t) * delta(nu, s) - delta(mu, s) * delta(nu, t);
    if pattern == 0.0 {
        return 0.0;
    }
    let (wm, wn) = (omega[mu], omega[nu]);
    let bracket = 2.0 * (n[mu] as f64 + 0.5) * (n[nu] as f64 + 0.5) * (wm * wm + wn * wn) / (wm * wn) - 1.0;
    -(hbar * hbar / 8.0) * bracket * pattern
}

/// Max interior residual of
/// `[Omega_{mu nu}, Omega_{s t}] = (1/2)(d_{mu s} Omega_{t nu} + d_{nu t} Omega_{s mu} + d_{mu t} Omega_{nu s} + d_{nu s} Omega_{mu t})`
/// on the truncated basis `0 <= n_mu <= n_max`; rows and columns with any
/// `n_mu = n_max` are excluded.
pub fn omega_commutator_check(omega: &[f64], n_max: usize, hbar: f64) -> f64 {
    let d = omega.len();
    let mut basis: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..d {
        basis = basis
            .into_iter()
            .flat_map(|b| {
                (0..=n_max).map(move |k| {
                    let mut c = b.clone();
                    c.push(k);
                    c
                })
            })
            .collect();
    }
    let (lambda, _) = harmonic_lambda_matrices(omega, &basis, hbar);
    let om: Vec<DMatrix<C64>> = lambda.iter().map(|l| l * C64::new(0.0, 1.0 / hbar)).collect();
    let interior: Vec<usize> =
        basis.iter().enumerate().filter(|(_, n)| n.iter().all(|&k| k < n_max)).map(|(i, _)| i).collect();
    let o = |a: usize, b: usize| &om[a * d + b];
    let delta = |a: usize, b: usize| if a == b { 0.5 } else { 0.0 };
    let mut worst = 0.0f64;
    for mu in 0..d {
        for nu in 0..d {
            for s in 0..d {
                for t in 0..d {
                    let comm = o(mu, nu) * o(s, t) - o(s, t) * o(mu, nu);
                    let rhs = o(t, nu) * C64::from(delta(mu, s))
                        + o(s, mu) * C64::from(delta(nu, t))
                        + o(nu, s) * C64::from(delta(mu, t))
                        + o(mu, t) * C64::from(delta(nu, s));
                    let diff = comm - rhs;
                    for &i in &interior {
                        for &j in &interior {
                            worst = worst.max(diff[(i, j)].norm());
                        }
                    }
                }
            }
        }
    }
    worst
}
