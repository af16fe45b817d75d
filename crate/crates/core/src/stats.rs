//! Small numeric summaries shared by the selection and MCMC code.

/// Linear-interpolation quantile of sorted data (R's default, type 7).
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with `n − 1` denominator.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}


/// Split-chain potential scale reduction. Each chain is halved and the
/// halves are compared; constant input gives 1.
pub fn split_rhat(chains: &[&[f64]]) -> f64 {
    let halves = split_halves(chains);
    let n = halves[0].len() as f64;
    if halves.len() < 2 || n < 2.0 {
        return f64::NAN;
    }
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = mean(&halves.iter().map(|h| variance(h)).collect::<Vec<_>>());
    let b = n * variance(&means);
    let var_plus = (n - 1.0) / n * w + b / n;
    if w <= 0.0 {
        return if var_plus <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    (var_plus / w).sqrt()
}

/// Multi-chain effective sample size on split chains with Geyer's initial
/// monotone sequence truncation.
pub fn effective_size(chains: &[&[f64]]) -> f64 {
    let halves = split_halves(chains);
    let m = halves.len();
    let n = halves[0].len();
    let total = (m * n) as f64;
    if m < 2 || n < 4 {
        return f64::NAN;
    }
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let vars: Vec<f64> = halves.iter().map(|h| variance(h)).collect();
    let w = mean(&vars);
    let nf = n as f64;
    let var_plus = (nf - 1.0) / nf * w + variance(&means);
    if var_plus <= 0.0 {
        return total;
    }
    let rho = |t: usize| {
        let acov: f64 = halves
            .iter()
            .zip(&means)
            .map(|(h, mu)| (0..n - t).map(|i| (h[i] - mu) * (h[i + t] - mu)).sum::<f64>() / nf)
            .sum::<f64>()
            / m as f64;
        1.0 - (w - acov) / var_plus
    };
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let pair = if t == 0 { 1.0 + rho(1) } else { rho(t) + rho(t + 1) };
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        t += 2;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / total.log10().max(1.0));
    total / tau
}

fn split_halves<'a>(chains: &[&'a [f64]]) -> Vec<&'a [f64]> {
    let n = chains.iter().map(|c| c.len()).min().unwrap_or(0) / 2;
    chains.iter().flat_map(|c| [&c[..n], &c[n..2 * n]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert!((quantile_sorted(&v, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile_sorted(&v, 0.25) - 1.75).abs() < 1e-15);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn moments() {
        let v = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&v), 5.0);
        assert!((variance(&v) - 32.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn rhat_flags_disagreeing_chains() {
        let a: Vec<f64> = (0..200).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 5.0).collect();
        assert!(split_rhat(&[&a, &a]) < 1.05);
        assert!(split_rhat(&[&a, &b]) > 2.0);
        assert_eq!(split_rhat(&[&[3.0; 10], &[3.0; 10]]), 1.0);
    }

    #[test]
    fn ess_of_independent_draws_near_n() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let chains: Vec<Vec<f64>> = (0..4).map(|_| (0..1000).map(|_| rng.random::<f64>()).collect()).collect();
        let refs: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        let ess = effective_size(&refs);
        assert!(ess > 3000.0 && ess < 5500.0, "{ess}");
        let sticky: Vec<Vec<f64>> = chains.iter().map(|c| c.iter().map(|v| (v * 4.0).floor()).flat_map(|v| [v; 10]).collect()).collect();
        let refs: Vec<&[f64]> = sticky.iter().map(|c| c.as_slice()).collect();
        let ess = effective_size(&refs);
        assert!(ess > 2000.0 && ess < 8000.0, "{ess}");
    }
}
