//! Quadrature rules: composite Simpson on uniform nodes and composite
//! Gauss-Legendre panels (nodes from the `gauss-quad` crate).

use gauss_quad::legendre::GaussLegendre;

/// Composite Simpson weights for `n` (odd, >= 3) equispaced nodes on `[a, b]`.
pub fn simpson_weights(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd node count >= 3");
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// Nodes and weights of a 1-D rule, with the largest node gap recorded for
/// resolution checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub max_gap: f64,
}

impl Rule {
    /// Gauss-Legendre panels of `order` nodes covering `[a, b]` with panel
    /// width at most `panel`. An empty interval gives an empty rule.
    pub fn gauss_panels(a: f64, b: f64, panel: f64, order: usize) -> Rule {
        if !(b > a) {
            return Rule { nodes: vec![], weights: vec![], max_gap: 0.0 };
        }
        let m = ((b - a) / panel).ceil().max(1.0) as usize;
        let width = (b - a) / m as f64;
        let gl = GaussLegendre::new(order).expect("order >= 2");
        let mut ref_pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        ref_pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut nodes = Vec::with_capacity(m * order);
        let mut weights = Vec::with_capacity(m * order);
        for p in 0..m {
            let lo = a + p as f64 * width;
            for &(x, w) in &ref_pairs {
                nodes.push(lo + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * w);
            }
        }
        let max_gap =
            nodes.windows(2).map(|w| w[1] - w[0]).fold(nodes[0] - a, f64::max).max(b - nodes[nodes.len() - 1]);
        Rule { nodes, weights, max_gap }
    }

    /// Gauss-Legendre panels on explicit breakpoints.
    pub fn gauss_on_breaks(breaks: &[f64], order: usize) -> Rule {
        let gl = GaussLegendre::new(order).expect("order >= 2");
        let mut ref_pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        ref_pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut max_gap = 0.0f64;
        for seg in breaks.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            max_gap = max_gap.max((hi - lo) / order as f64);
            for &(x, w) in &ref_pairs {
                nodes.push(lo + 0.5 * (hi - lo) * (x + 1.0));
                weights.push(0.5 * (hi - lo) * w);
            }
        }
        Rule { nodes, weights, max_gap }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let w = simpson_weights(1.0, 4.0, 7);
        let h = 0.5;
        let s: f64 = w
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let x = 1.0 + h * i as f64;
                w * x * x * x
            })
            .sum();
        assert!((s - (256.0 - 1.0) / 4.0).abs() < 1e-12);
        assert!((w.iter().sum::<f64>() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_panels_integrate_oscillation() {
        let r = Rule::gauss_panels(0.0, 50.0, 0.8, 12);
        let got = r.integrate(|x| (3.0 * x).cos());
        assert!((got - (150.0f64).sin() / 3.0).abs() < 1e-12);
        assert!(r.max_gap < 0.8);
    }

    #[test]
    fn empty_interval_gives_empty_rule() {
        assert!(Rule::gauss_panels(2.0, 2.0, 1.0, 8).is_empty());
    }
}
