//! Norm functionals: weighted Lebesgue, one- and two-weight Morrey, BMO and
//! weighted BMO, weak Lebesgue, weighted means, and the Kolmogorov restricted
//! functional N_{l,r}.

use crate::error::{Error, Result};
use crate::lattice::{ball_cell_ranges, Ball, BallFamily, GridFunction};
use crate::weights::Weight;
use serde::Serialize;

/// Morrey exponents; the weights u, v are passed alongside so reports stay
/// plain data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorreyParams {
    pub p: f64,
    pub kappa: f64,
}

impl MorreyParams {
    pub fn new(p: f64, kappa: f64) -> Result<MorreyParams> {
        if !(p >= 1.0) {
            return Err(Error::Parameter(format!("Morrey p must be >= 1, got {p}")));
        }
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::Parameter(format!("Morrey kappa must lie in [0, 1), got {kappa}")));
        }
        Ok(MorreyParams { p, kappa })
    }
}

/// A sup-type norm value with the ball attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub witness: Option<Ball>,
    pub family: String,
}

/// (integral of |f|^p w over the whole domain)^{1/p}.
pub fn weighted_lebesgue_norm(f: &GridFunction, p: f64, w: &Weight) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("Lebesgue p must be >= 1, got {p}")));
    }
    let mut sum = 0.0;
    for (v, wv) in f.values().iter().zip(w.values()) {
        sum += v.abs().powf(p) * wv;
    }
    Ok((sum * f.grid().cell_volume()).powf(1.0 / p))
}

/// Two-weight Morrey norm: sup over the family of
/// (v(B)^{-kappa} * integral over B of |f|^p u)^{1/p}; u = v recovers the
/// one-weight space, kappa = 0 recovers weighted Lebesgue localized to balls.
pub fn morrey_norm(
    f: &GridFunction,
    params: &MorreyParams,
    u: &Weight,
    v: &Weight,
    fam: &BallFamily,
) -> Result<NormReport> {
    if f.grid() != fam.grid() || u.grid() != fam.grid() || v.grid() != fam.grid() {
        return Err(Error::Parameter("grid mismatch in morrey_norm".into()));
    }
    let vol = fam.grid().cell_volume();
    let fp: Vec<f64> = f
        .values()
        .iter()
        .zip(u.values())
        .map(|(&a, &b)| a.abs().powf(params.p) * b)
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    for i in 0..fam.balls().len() {
        if fam.cell_count(i) == 0 {
            continue;
        }
        let inner = fam.sum_over(i, &fp) * vol;
        let vb = fam.sum_over(i, v.values()) * vol;
        let val = (inner / vb.powf(params.kappa)).powf(1.0 / params.p);
        if val > best {
            best = val;
            witness = Some(fam.balls()[i]);
        }
    }
    if witness.is_none() {
        return Err(Error::EmptyRegion("ball family has no non-empty ball".into()));
    }
    Ok(NormReport { value: best, witness, family: fam.descriptor() })
}

/// Weighted ball average b_{B,w} = (1/w(B)) * integral over B of b w;
/// `None` weight gives the plain average b_B.
pub fn weighted_mean(b: &GridFunction, w: Option<&Weight>, ball: &Ball) -> Result<f64> {
    let grid = b.grid();
    let ranges = ball_cell_ranges(&grid, ball);
    if ranges.iter().all(|r| r.is_empty()) {
        return Err(Error::EmptyRegion("ball contains no cell centers".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for r in &ranges {
        for i in r.clone() {
            let wv = w.map_or(1.0, |w| w.values()[i]);
            num += b.value(i) * wv;
            den += wv;
        }
    }
    Ok(num / den)
}

/// Weighted (or classical, with `None`) BMO norm:
/// sup over the family of (1/w(B)) * integral over B of |b - b_{B,w}| w.
pub fn bmo_norm(b: &GridFunction, w: Option<&Weight>, fam: &BallFamily) -> Result<NormReport> {
    if b.grid() != fam.grid() {
        return Err(Error::Parameter("grid mismatch in bmo_norm".into()));
    }
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    for i in 0..fam.balls().len() {
        if fam.cell_count(i) == 0 {
            continue;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for r in fam.cell_ranges(i) {
            for j in r.clone() {
                let wv = w.map_or(1.0, |w| w.values()[j]);
                num += b.value(j) * wv;
                den += wv;
            }
        }
        let mean = num / den;
        let mut osc = 0.0;
        for r in fam.cell_ranges(i) {
            for j in r.clone() {
                let wv = w.map_or(1.0, |w| w.values()[j]);
                osc += (b.value(j) - mean).abs() * wv;
            }
        }
        let val = osc / den;
        if val > best {
            best = val;
            witness = Some(fam.balls()[i]);
        }
    }
    Ok(NormReport { value: best, witness, family: fam.descriptor() })
}

/// (||b||_{*,w} / ||b||_*, ||b||_* / ||b||_{*,w}); both finite for
/// non-constant b and A_infty weights.
pub fn bmo_equivalence_ratio(
    b: &GridFunction,
    w: &Weight,
    fam: &BallFamily,
) -> Result<(f64, f64)> {
    let weighted = bmo_norm(b, Some(w), fam)?.value;
    let plain = bmo_norm(b, None, fam)?.value;
    if weighted <= 0.0 || plain <= 0.0 {
        return Err(Error::Degenerate(
            "BMO equivalence ratio undefined for (near-)constant b".into(),
        ));
    }
    Ok((weighted / plain, plain / weighted))
}

/// Weak-L^l quasinorm sup_{t>0} t |{|f| > t}|^{1/l}, computed exactly by a
/// sorted threshold scan (the discrete sup is attained just below a sample
/// magnitude).
pub fn weak_norm(f: &GridFunction, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::Parameter(format!("weak_norm requires l > 0, got {l}")));
    }
    let vol = f.grid().cell_volume();
    let mut mags: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let mut best = 0.0f64;
    for (k, &a) in mags.iter().enumerate() {
        // Taking t just below the k-th largest magnitude gives measure
        // >= (k+1) * vol; ties are covered by the last index of each group.
        best = best.max(a * (((k + 1) as f64) * vol).powf(1.0 / l));
    }
    Ok(best)
}

/// Kolmogorov's restricted functional N_{l,r}(f) = sup_E ||f chi_E||_r /
/// ||chi_E||_h with 1/h = 1/r - 1/l, the E-sup running over the ball family
/// together with the level sets of |f| (the level sets realize the extremal E
/// of the left Kolmogorov inequality exactly on the lattice).
pub fn restricted_strong_functional(
    f: &GridFunction,
    l: f64,
    r: f64,
    fam: &BallFamily,
) -> Result<f64> {
    if !(0.0 < r && r < l) {
        return Err(Error::Parameter(format!(
            "restricted_strong_functional requires 0 < r < l, got r = {r}, l = {l}"
        )));
    }
    let inv_h = 1.0 / r - 1.0 / l;
    let vol = f.grid().cell_volume();
    let mut best = 0.0f64;

    // Level sets: E_k = cells carrying the k largest magnitudes.
    let mut mags: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let mut cum = 0.0;
    for (k, &a) in mags.iter().enumerate() {
        cum += a.powf(r);
        let num = (cum * vol).powf(1.0 / r);
        let den = (((k + 1) as f64) * vol).powf(inv_h);
        best = best.max(num / den);
    }

    // Family balls, over per-cell |f|^r computed once.
    let ar: Vec<f64> = f.values().iter().map(|v| v.abs().powf(r)).collect();
    for i in 0..fam.balls().len() {
        let count = fam.cell_count(i);
        if count == 0 {
            continue;
        }
        let s = fam.sum_over(i, &ar);
        let num = (s * vol).powf(1.0 / r);
        let den = ((count as f64) * vol).powf(inv_h);
        best = best.max(num / den);
    }
    Ok(best)
}
