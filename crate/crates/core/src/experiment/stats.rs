use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided Mann-Whitney U test, normal approximation with tie-corrected
/// variance and continuity correction. Identical pooled values give 1.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "rank-sum test needs two non-empty samples");
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let mut pooled: Vec<(f64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let n = pooled.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        let rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_a += rank * pooled[i..=j].iter().filter(|p| p.1).count() as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let nt = n as f64;
    let u1 = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((nt + 1.0) - tie_term / (nt * (nt - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u1 - mean).abs() - 0.5) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * normal.sf(z)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectSize {
    Negligible,
    Small,
    Medium,
    Large,
}

/// Bounds on `|A12 - 0.5|` separating negligible, small and medium effects.
pub const EFFECT_THRESHOLDS: [f64; 3] = [0.06, 0.14, 0.21];

impl EffectSize {
    pub fn name(self) -> &'static str {
        match self {
            EffectSize::Negligible => "negligible",
            EffectSize::Small => "small",
            EffectSize::Medium => "medium",
            EffectSize::Large => "large",
        }
    }

    pub fn of(a12: f64) -> EffectSize {
        let d = (a12 - 0.5).abs();
        match EFFECT_THRESHOLDS.iter().position(|&t| d < t) {
            Some(0) => EffectSize::Negligible,
            Some(1) => EffectSize::Small,
            Some(_) => EffectSize::Medium,
            None => EffectSize::Large,
        }
    }
}

/// Probability that a draw from `a` exceeds one from `b`, ties counting half.
pub fn vargha_delaney_a12(a: &[f64], b: &[f64]) -> (f64, EffectSize) {
    let mut wins = 0.0;
    for x in a {
        for y in b {
            if x > y {
                wins += 1.0;
            } else if x == y {
                wins += 0.5;
            }
        }
    }
    let v = wins / (a.len() * b.len()) as f64;
    (v, EffectSize::of(v))
}

/// Median of a sample, averaging the middle pair.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
