use super::special::chi2_sf;
use super::{midranks, Method, OrdinalSample, StatTestResult, TestKind};
use crate::{Error, Result};

/// Kruskal-Wallis H with tie correction; chi-square tail with k − 1 df.
pub fn kruskal_wallis(groups: &[OrdinalSample]) -> Result<StatTestResult> {
    if groups.len() < 2 {
        return Err(Error::Contract(format!("Kruskal-Wallis needs at least 2 groups, got {}", groups.len())));
    }
    if let Some(g) = groups.iter().find(|g| g.is_empty()) {
        return Err(Error::Contract(format!("group {:?} is empty", g.label)));
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.values.iter().copied()).collect();
    let n = pooled.len() as f64;
    let (ranks, ties) = midranks(&pooled);
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let correction = 1.0 - ties / (n * n * n - n);
    let (h, p) = if correction <= 0.0 {
        (0.0, 1.0)
    } else {
        let h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction;
        let h = h.max(0.0);
        (h, chi2_sf(h, (groups.len() - 1) as f64))
    };
    Ok(StatTestResult {
        test: TestKind::KruskalWallisH,
        statistic: h,
        p_value: p,
        n_per_group: groups.iter().map(OrdinalSample::len).collect(),
        method: Method::TieCorrectedChiSquare,
        z: None,
    })
}
