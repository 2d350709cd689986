use super::special::normal_sf;
use super::{midranks, Method, OrdinalSample, StatTestResult, TestKind};
use crate::{Error, Result};

/// Largest pooled size tested by full enumeration.
pub const EXACT_THRESHOLD: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MwuOptions {
    /// Use the normal approximation even for small samples.
    pub force_approximation: bool,
    pub exact_threshold: usize,
}

impl Default for MwuOptions {
    fn default() -> Self {
        MwuOptions { force_approximation: false, exact_threshold: EXACT_THRESHOLD }
    }
}

/// Two-sided Mann-Whitney U test on midranks.
pub fn mann_whitney_u(a: &OrdinalSample, b: &OrdinalSample, opts: MwuOptions) -> Result<StatTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Contract(format!(
            "Mann-Whitney U needs two non-empty samples ({}: {}, {}: {})",
            a.label,
            a.len(),
            b.label,
            b.len()
        )));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.values.iter().chain(&b.values).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;
    let mu = (na * nb) as f64 / 2.0;

    let nf = n as f64;
    let var = (na * nb) as f64 / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
    let sigma = var.max(0.0).sqrt();
    let z = if sigma > 0.0 { (u - mu) / sigma } else { 0.0 };

    let (p_value, method) = if !opts.force_approximation && n <= opts.exact_threshold {
        (exact_p(&ranks, na, u, mu), Method::ExactEnumeration)
    } else if sigma == 0.0 {
        (1.0, Method::TieCorrectedNormal)
    } else {
        let zc = ((u - mu).abs() - 0.5) / sigma;
        ((2.0 * normal_sf(zc)).min(1.0), Method::TieCorrectedNormal)
    };
    Ok(StatTestResult {
        test: TestKind::MannWhitneyU,
        statistic: u,
        p_value,
        n_per_group: vec![na, nb],
        method,
        z: Some(z),
    })
}

/// Share of all ways to pick `na` of the pooled ranks whose U lies at least
/// as far from the mean as the observed one.
fn exact_p(ranks: &[f64], na: usize, u_obs: f64, mu: f64) -> f64 {
    let observed = (u_obs - mu).abs() - 1e-9;
    let offset = (na * (na + 1)) as f64 / 2.0;
    let (mut extreme, mut total) = (0u64, 0u64);
    let mut chosen = Vec::with_capacity(na);
    fn walk(ranks: &[f64], start: usize, left: usize, sum: f64, chosen: &mut Vec<usize>, visit: &mut dyn FnMut(f64)) {
        if left == 0 {
            visit(sum);
            return;
        }
        for i in start..=ranks.len() - left {
            chosen.push(i);
            walk(ranks, i + 1, left - 1, sum + ranks[i], chosen, visit);
            chosen.pop();
        }
    }
    walk(ranks, 0, na, 0.0, &mut chosen, &mut |sum| {
        total += 1;
        if (sum - offset - mu).abs() >= observed {
            extreme += 1;
        }
    });
    extreme as f64 / total as f64
}
