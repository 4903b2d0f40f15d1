use crate::{Error, Result};

/// Deterministic reduction of one planning step: a complete directed graph
/// with the start depot at index 0 and the end depot at index `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostGraph {
    prize: Vec<f64>,
    service: Vec<f64>,
    edge: Vec<f64>,
    budget: f64,
    labels: Vec<usize>,
}

impl CostGraph {
    /// `edge` is row-major `n * n`. Labels default to the indices.
    pub fn new(prize: Vec<f64>, service: Vec<f64>, edge: Vec<f64>, budget: f64) -> Result<Self> {
        let labels = (0..prize.len()).collect();
        Self::with_labels(prize, service, edge, budget, labels)
    }

    /// Like [`CostGraph::new`] but attaches an external label (for example an
    /// instance node id) to every index.
    pub fn with_labels(
        prize: Vec<f64>,
        service: Vec<f64>,
        edge: Vec<f64>,
        budget: f64,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let n = prize.len();
        if n < 2 {
            return Err(Error::InvalidArgument("cost graph needs both depots".into()));
        }
        if service.len() != n || labels.len() != n || edge.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "cost graph dimensions disagree: {n} prizes, {} service costs, {} labels, {} edges",
                service.len(),
                labels.len(),
                edge.len()
            )));
        }
        for (what, v) in [("prize", &prize), ("service cost", &service)] {
            if v[0] != 0.0 || v[n - 1] != 0.0 {
                return Err(Error::InvalidArgument(format!("depot {what} must be zero")));
            }
            if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "{what} {bad} is not a nonnegative number"
                )));
            }
        }
        if let Some(bad) = edge.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "edge cost {bad} is not a nonnegative number"
            )));
        }
        if budget.is_nan() {
            return Err(Error::InvalidArgument("budget is NaN".into()));
        }
        Ok(CostGraph {
            prize,
            service,
            edge,
            budget,
            labels,
        })
    }

    /// Number of vertices including both depots.
    pub fn len(&self) -> usize {
        self.prize.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> usize {
        0
    }

    pub fn end(&self) -> usize {
        self.prize.len() - 1
    }

    pub fn interior(&self) -> std::ops::Range<usize> {
        1..self.prize.len() - 1
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn prize(&self, v: usize) -> f64 {
        self.prize[v]
    }

    pub fn service(&self, v: usize) -> f64 {
        self.service[v]
    }

    #[inline]
    pub fn cost(&self, from: usize, to: usize) -> f64 {
        self.edge[from * self.prize.len() + to]
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[f64] {
        &self.edge
    }

    /// Multiplies every edge cost by `factor`, leaving service costs alone.
    pub fn scale_edges(&mut self, factor: f64) {
        for e in &mut self.edge {
            *e *= factor;
        }
    }

    /// Edge costs along `seq` plus service costs of its interior.
    pub fn sequence_cost(&self, seq: &[usize]) -> f64 {
        let edges: f64 = seq.windows(2).map(|w| self.cost(w[0], w[1])).sum();
        let service: f64 = interior_of(seq).iter().map(|&v| self.service[v]).sum();
        edges + service
    }

    /// Prize of the interior of `seq`, summed in index order so that equal
    /// node sets always give bit-identical totals.
    pub fn sequence_prize(&self, seq: &[usize]) -> f64 {
        let mut nodes = interior_of(seq).to_vec();
        nodes.sort_unstable();
        nodes.iter().map(|&v| self.prize[v]).sum()
    }
}

fn interior_of(seq: &[usize]) -> &[usize] {
    if seq.len() <= 2 {
        &[]
    } else {
        &seq[1..seq.len() - 1]
    }
}

/// A depot-to-depot path with its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSolution {
    /// Graph indices, starting at 0 and ending at `n - 1`.
    pub sequence: Vec<usize>,
    pub total_prize: f64,
    pub total_cost: f64,
    pub feasible: bool,
}

impl PathSolution {
    pub fn evaluate(graph: &CostGraph, sequence: Vec<usize>) -> Self {
        let total_cost = graph.sequence_cost(&sequence);
        PathSolution {
            total_prize: graph.sequence_prize(&sequence),
            feasible: total_cost <= graph.budget(),
            total_cost,
            sequence,
        }
    }

    pub fn direct(graph: &CostGraph) -> Self {
        Self::evaluate(graph, vec![graph.start(), graph.end()])
    }

    pub fn interior(&self) -> &[usize] {
        interior_of(&self.sequence)
    }

    pub(crate) fn refresh(&mut self, graph: &CostGraph) {
        self.total_cost = graph.sequence_cost(&self.sequence);
        self.total_prize = graph.sequence_prize(&self.sequence);
        self.feasible = self.total_cost <= graph.budget();
    }

    /// Sequence expressed in graph labels.
    pub fn labelled(&self, graph: &CostGraph) -> Vec<usize> {
        self.sequence.iter().map(|&v| graph.label(v)).collect()
    }

    /// True if `self` is strictly better: more prize, or equal prize for less
    /// cost.
    pub fn better_than(&self, other: &PathSolution) -> bool {
        self.total_prize > other.total_prize
            || (self.total_prize == other.total_prize && self.total_cost < other.total_cost)
    }
}

/// Checks the structural constraints of `sol` against `graph` and that its
/// bookkeeping matches a recomputation within `1e-9`.
pub fn validate_path(graph: &CostGraph, sol: &PathSolution) -> Result<()> {
    let seq = &sol.sequence;
    if seq.len() < 2 || seq[0] != graph.start() || seq[seq.len() - 1] != graph.end() {
        return Err(Error::Audit(format!("path {seq:?} does not run depot to depot")));
    }
    let mut seen = vec![false; graph.len()];
    for &v in sol.interior() {
        if !graph.interior().contains(&v) {
            return Err(Error::Audit(format!("path visits invalid interior vertex {v}")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::Audit(format!("path repeats vertex {v}")));
        }
    }
    let cost = graph.sequence_cost(seq);
    let prize = graph.sequence_prize(seq);
    if (cost - sol.total_cost).abs() > 1e-9 || (prize - sol.total_prize).abs() > 1e-9 {
        return Err(Error::Audit(format!(
            "bookkeeping drift: stored prize/cost {}/{} vs recomputed {prize}/{cost}",
            sol.total_prize, sol.total_cost
        )));
    }
    if sol.feasible != (cost <= graph.budget()) {
        return Err(Error::Audit("feasibility flag disagrees with budget".into()));
    }
    Ok(())
}
