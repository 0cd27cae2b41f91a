/// Exit distribution over the arcs `I_1..I_N`. Entry `k − 1` holds arc `k`.
///
/// Exact measures carry no trial count; Monte Carlo estimates carry the
/// number of trials and per-arc standard errors `sqrt(p(1 − p)/trials)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcMeasure {
    probabilities: Vec<f64>,
    trials: Option<u64>,
    std_errors: Option<Vec<f64>>,
}

impl ArcMeasure {
    pub fn exact(probabilities: Vec<f64>) -> Self {
        ArcMeasure {
            probabilities,
            trials: None,
            std_errors: None,
        }
    }

    pub fn from_counts(counts: &[u64], trials: u64) -> Self {
        let t = trials as f64;
        let probabilities: Vec<f64> = counts.iter().map(|&c| c as f64 / t).collect();
        let std_errors = probabilities.iter().map(|p| (p * (1.0 - p) / t).sqrt()).collect();
        ArcMeasure {
            probabilities,
            trials: Some(trials),
            std_errors: Some(std_errors),
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Measure of arc `k` (1-based).
    pub fn arc(&self, k: usize) -> f64 {
        self.probabilities[k - 1]
    }

    pub fn arc_count(&self) -> usize {
        self.probabilities.len()
    }

    pub fn trials(&self) -> Option<u64> {
        self.trials
    }

    pub fn std_errors(&self) -> Option<&[f64]> {
        self.std_errors.as_deref()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn total_variation(&self, other: &ArcMeasure) -> f64 {
        assert_eq!(self.arc_count(), other.arc_count(), "different arc counts");
        0.5 * self
            .probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}
