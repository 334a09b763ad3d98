use crate::error::{Error, Result};

/// Gap assumptions, confidence budget and degree bound shared by every
/// discovery routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscoveryConfig {
    /// Smallest ancestral effect on a marginal.
    pub epsilon: f64,
    /// Smallest do-see gap produced by a confounder.
    pub gamma: f64,
    /// Support floor for non-zero interventional probabilities.
    pub eta: f64,
    /// Overall failure probability.
    pub delta: f64,
    /// Upper bound on the number of directed neighbours of any vertex.
    pub d_max: usize,
    /// Domain size used in the budget formulas.
    pub k: u32,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            epsilon: 0.1,
            gamma: 0.1,
            eta: 0.2,
            delta: 0.2,
            d_max: 2,
            k: 2,
        }
    }
}

impl DiscoveryConfig {
    /// Settings of the published experiments. Budgets grow by two orders
    /// of magnitude over the defaults.
    pub fn paper_scale() -> Self {
        DiscoveryConfig {
            epsilon: 0.01,
            gamma: 0.01,
            eta: 0.05,
            delta: 0.99,
            ..DiscoveryConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        let mut problems = Vec::new();
        for (name, value) in [
            ("epsilon", self.epsilon),
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("delta", self.delta),
        ] {
            if !open_unit(value) {
                problems.push(format!("{name} must lie in (0, 1), got {value}"));
            }
        }
        if self.d_max < 1 {
            problems.push("d_max must be at least 1".to_string());
        }
        if self.k < 2 {
            problems.push(format!("k must be at least 2, got {}", self.k));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}

/// Which guarantee the confidence split is tuned for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetMode {
    /// One transitive closure under a fixed background.
    ClosureOnly,
    /// Directed edges only.
    Observable,
    /// Directed edges plus every confounder.
    FullGraph,
    /// Directed edges inside the reward's ancestors plus the confounder
    /// tests needed for the POMIS family; `n` is then `|An(Y)|`.
    Pomis,
}

/// Derived sample counts and confidence split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBudget {
    /// Samples per value of each single-variable intervention.
    pub a: u64,
    /// Samples of each background intervention.
    pub b: u64,
    /// Samples of a background intervention used by a latent test.
    pub c: u64,
    /// Random background rounds of observable-graph learning.
    pub rounds: u64,
    pub alpha: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: f64,
}

fn ceil_count(x: f64) -> u64 {
    (x.ceil() as u64).max(1)
}

/// `⌈max(8/ε², 8/γ²) · ln(2nK²/δ1)⌉`
pub fn budget_a(epsilon: f64, gamma: f64, n: usize, k: u32, delta1: f64) -> u64 {
    let scale = (8.0 / (epsilon * epsilon)).max(8.0 / (gamma * gamma));
    let k2 = (k as f64).powi(2);
    ceil_count(scale * (2.0 * n as f64 * k2 / delta1).ln())
}

/// `⌈(8/ε²) · ln(2nK²/δ2)⌉`
pub fn budget_b(epsilon: f64, n: usize, k: u32, delta2: f64) -> u64 {
    let k2 = (k as f64).powi(2);
    ceil_count(8.0 / (epsilon * epsilon) * (2.0 * n as f64 * k2 / delta2).ln())
}

/// `⌈16/(ηγ²) · ln(2n²K²/δ3) + 1/(2η²) · ln(2n²K²/δ4)⌉`
pub fn budget_c(eta: f64, gamma: f64, n: usize, k: u32, delta3: f64, delta4: f64) -> u64 {
    let m = 2.0 * (n as f64).powi(2) * (k as f64).powi(2);
    let first = 16.0 / (eta * gamma * gamma) * (m / delta3).ln();
    let second = 1.0 / (2.0 * eta * eta) * (m / delta4).ln();
    ceil_count(first + second)
}

/// `⌈8 · α · d_max · ln n⌉`
pub fn rounds(alpha: f64, d_max: usize, n: usize) -> u64 {
    ceil_count(8.0 * alpha * d_max as f64 * (n as f64).ln())
}

/// Budgets for a scope of `n` vertices. Modes that divide by `ln n` treat
/// `n` as at least 2.
pub fn compute_budgets(cfg: &DiscoveryConfig, mode: BudgetMode, n: usize) -> SampleBudget {
    let delta = cfg.delta;
    let d = cfg.d_max as f64;
    let (alpha, d1, d2, d3) = match mode {
        BudgetMode::ClosureOnly => {
            let n = n.max(1) as f64;
            (1.0, delta / (2.0 * n), delta / 2.0, delta / 2.0)
        }
        BudgetMode::Observable => {
            let nf = n.max(2) as f64;
            let ln = nf.ln();
            let alpha = 2.0 * d * (2.0 / delta + 2.0).ln() / ln;
            let d2 = delta / (32.0 * alpha * d * ln);
            (alpha, d2 / nf, d2, d2)
        }
        BudgetMode::FullGraph | BudgetMode::Pomis => {
            let nf = n.max(2) as f64;
            let ln = nf.ln();
            let alpha = 2.0 * d * (4.0 / delta + 2.0).ln() / ln;
            let d2 = delta / (64.0 * alpha * d * ln);
            (alpha, d2 / nf, d2, d2)
        }
    };
    let n_eff = match mode {
        BudgetMode::ClosureOnly => n.max(1),
        _ => n.max(2),
    };
    SampleBudget {
        a: budget_a(cfg.epsilon, cfg.gamma, n_eff, cfg.k, d1),
        b: budget_b(cfg.epsilon, n_eff, cfg.k, d2),
        c: budget_c(cfg.eta, cfg.gamma, n_eff, cfg.k, d3, d3),
        rounds: rounds(alpha, cfg.d_max, n_eff),
        alpha,
        delta1: d1,
        delta2: d2,
        delta3: d3,
        delta4: d3,
    }
}

impl SampleBudget {
    /// `key=value` lines.
    pub fn report(&self) -> String {
        format!(
            "a={}\nb={}\nc={}\nrounds={}\nalpha={}\ndelta1={}\ndelta2={}\ndelta3={}\ndelta4={}\n",
            self.a,
            self.b,
            self.c,
            self.rounds,
            self.alpha,
            self.delta1,
            self.delta2,
            self.delta3,
            self.delta4
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_budgets() {
        assert_eq!(budget_a(0.5, 0.5, 2, 2, 0.1), 163);
        assert_eq!(budget_b(0.5, 2, 2, 0.1), 163);
        assert_eq!(budget_c(0.5, 0.5, 2, 2, 0.1, 0.1), 750);
    }

    #[test]
    fn observable_round_count() {
        assert_eq!(rounds(2.0, 2, 4), 45);
    }

    #[test]
    fn closure_split() {
        let cfg = DiscoveryConfig::default();
        let b = compute_budgets(&cfg, BudgetMode::ClosureOnly, 3);
        assert!((b.delta1 - 0.2 / 6.0).abs() < 1e-15);
        assert!((b.delta2 - 0.1).abs() < 1e-15);
        assert_eq!(b.a, budget_a(0.1, 0.1, 3, 2, 0.2 / 6.0));
    }

    #[test]
    fn full_graph_split_matches_closed_form() {
        let cfg = DiscoveryConfig::default();
        let b = compute_budgets(&cfg, BudgetMode::FullGraph, 5);
        let alpha = 2.0 * 2.0 * 22f64.ln() / 5f64.ln();
        assert!((b.alpha - alpha).abs() < 1e-12);
        let d2 = 0.2 / (64.0 * alpha * 2.0 * 5f64.ln());
        assert!((b.delta2 - d2).abs() < 1e-15);
        assert!((b.delta1 - d2 / 5.0).abs() < 1e-15);
        assert_eq!(b.delta3, b.delta4);
        assert_eq!(b.rounds, (8.0 * alpha * 2.0 * 5f64.ln()).ceil() as u64);
        assert_eq!(compute_budgets(&cfg, BudgetMode::Pomis, 5), b);
    }

    #[test]
    fn pomis_scope_is_clamped() {
        let cfg = DiscoveryConfig::default();
        let one = compute_budgets(&cfg, BudgetMode::Pomis, 1);
        assert!(one.alpha.is_finite());
        assert_eq!(one, compute_budgets(&cfg, BudgetMode::Pomis, 2));
    }

    #[test]
    fn validation() {
        assert!(DiscoveryConfig::default().validate().is_ok());
        assert!(DiscoveryConfig::paper_scale().validate().is_ok());
        let bad = DiscoveryConfig {
            delta: 1.0,
            k: 1,
            ..Default::default()
        };
        let Err(Error::Config(msg)) = bad.validate() else {
            panic!("expected config error");
        };
        assert!(msg.contains("delta") && msg.contains("k must"));
    }
}
