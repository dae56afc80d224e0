use serde::{Deserialize, Serialize};

use super::gain::{bound, gain_at};
use super::{AttributeSpec, TreeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    NotRecommend,
    Recommend,
}

impl Class {
    pub fn from_label(recommended: bool) -> Self {
        if recommended {
            Class::Recommend
        } else {
            Class::NotRecommend
        }
    }

    pub fn is_positive(self) -> bool {
        self == Class::Recommend
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub class: Class,
    /// Probability of [`Class::Recommend`].
    pub probability: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Split confidence δ.
    pub delta: f64,
    /// Tie threshold τ.
    pub tau: f64,
    /// Records a leaf must see between split evaluations.
    pub grace: u64,
    /// Range R of the split criterion (1 bit for two classes).
    pub range: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            delta: 1e-7,
            tau: 0.05,
            grace: 200,
            range: 1.0,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), TreeError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(TreeError::InvalidParam(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(TreeError::InvalidParam(format!("tau must be >= 0, got {}", self.tau)));
        }
        if self.grace == 0 {
            return Err(TreeError::InvalidParam("grace period must be >= 1".into()));
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(TreeError::InvalidParam(format!("range must be > 0, got {}", self.range)));
        }
        Ok(())
    }
}

/// Sufficient statistics of one leaf. Class vectors are indexed
/// `[not_recommend, recommend]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafStats {
    pub class_counts: [u64; 2],
    /// `contingency[attribute][branch][class]`
    pub contingency: Vec<Vec<[u64; 2]>>,
    pub n_seen: u64,
    pub n_at_last_check: u64,
}

impl LeafStats {
    pub fn new(branches_per_attribute: &[usize]) -> Self {
        LeafStats {
            class_counts: [0; 2],
            contingency: branches_per_attribute.iter().map(|&b| vec![[0; 2]; b]).collect(),
            n_seen: 0,
            n_at_last_check: 0,
        }
    }

    pub(crate) fn observe(&mut self, branches: &[usize], positive: bool) {
        let c = usize::from(positive);
        self.class_counts[c] += 1;
        for (table, &b) in self.contingency.iter_mut().zip(branches) {
            table[b][c] += 1;
        }
        self.n_seen += 1;
    }

    /// Laplace-smoothed probability of the positive class.
    pub fn positive_probability(&self) -> f64 {
        (self.class_counts[1] as f64 + 1.0) / (self.n_seen as f64 + 2.0)
    }
}

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf(LeafStats),
    Split {
        attribute: usize,
        children: Vec<NodeId>,
    },
}

/// One executed split, with the quantities that licensed it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub node: NodeId,
    pub attribute: String,
    pub g_best: f64,
    pub g_second: f64,
    pub epsilon: f64,
    pub n: u64,
}

impl SplitRecord {
    /// Whether the recorded values satisfy the split rule under `params`.
    pub fn satisfies(&self, params: &TreeParams) -> bool {
        self.g_best > 0.0 && (self.g_best - self.g_second > self.epsilon || self.epsilon < params.tau)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    /// Leaf whose statistics absorbed the record.
    pub leaf: NodeId,
    pub split: Option<SplitRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoeffdingTree {
    pub(crate) params: TreeParams,
    pub(crate) attributes: Vec<AttributeSpec>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) n_trained: u64,
    pub(crate) splits: Vec<SplitRecord>,
}

const ROOT: NodeId = 0;

impl HoeffdingTree {
    pub fn new(attributes: Vec<AttributeSpec>, params: TreeParams) -> Result<Self, TreeError> {
        params.validate()?;
        if attributes.is_empty() {
            return Err(TreeError::InvalidAttribute("no attributes".into()));
        }
        for (i, a) in attributes.iter().enumerate() {
            a.validate()?;
            if attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(TreeError::InvalidAttribute(format!("duplicate attribute `{}`", a.name)));
            }
        }
        let root = Node::Leaf(LeafStats::new(&branch_counts(&attributes)));
        Ok(HoeffdingTree {
            params,
            attributes,
            nodes: vec![root],
            n_trained: 0,
            splits: Vec::new(),
        })
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn n_trained(&self) -> u64 {
        self.n_trained
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn leaf_stats(&self, id: NodeId) -> Option<&LeafStats> {
        match self.nodes.get(id)? {
            Node::Leaf(s) => Some(s),
            Node::Split { .. } => None,
        }
    }

    /// Split audit log, in the order splits happened.
    pub fn splits(&self) -> &[SplitRecord] {
        &self.splits
    }

    /// Attribute the root splits on, if it has split.
    pub fn root_attribute(&self) -> Option<&str> {
        match &self.nodes[ROOT] {
            Node::Split { attribute, .. } => Some(&self.attributes[*attribute].name),
            Node::Leaf(_) => None,
        }
    }

    /// Maps raw feature values (aligned with `attributes`) to branch indices.
    pub fn encode(&self, values: &[Option<f64>]) -> Result<Vec<usize>, TreeError> {
        if values.len() != self.attributes.len() {
            return Err(TreeError::Arity {
                expected: self.attributes.len(),
                got: values.len(),
            });
        }
        self.attributes
            .iter()
            .zip(values)
            .map(|(a, v)| a.branch(*v))
            .collect()
    }

    fn route(&self, branches: &[usize]) -> NodeId {
        let mut id = ROOT;
        while let Node::Split { attribute, children } = &self.nodes[id] {
            id = children[branches[*attribute]];
        }
        id
    }

    /// Leaf a record with these values would reach.
    pub fn leaf_for(&self, values: &[Option<f64>]) -> Result<NodeId, TreeError> {
        Ok(self.route(&self.encode(values)?))
    }

    /// Updates the tree with one labeled record.
    pub fn train_one(&mut self, values: &[Option<f64>], label: Option<bool>) -> Result<TrainOutcome, TreeError> {
        let label = label.ok_or(TreeError::LabelAbsent)?;
        let branches = self.encode(values)?;
        let leaf = self.route(&branches);
        let Node::Leaf(stats) = &mut self.nodes[leaf] else {
            unreachable!("route ends at a leaf");
        };
        stats.observe(&branches, label);
        self.n_trained += 1;
        let due = stats.n_seen - stats.n_at_last_check >= self.params.grace;
        let split = if due { self.attempt_split(leaf) } else { None };
        Ok(TrainOutcome { leaf, split })
    }

    fn attempt_split(&mut self, leaf: NodeId) -> Option<SplitRecord> {
        let Node::Leaf(stats) = &mut self.nodes[leaf] else {
            return None;
        };
        stats.n_at_last_check = stats.n_seen;
        let stats = &*stats;
        if stats.class_counts.contains(&0) {
            // pure leaf: every gain is zero
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        // merit of not splitting is 0, so the runner-up is never below it
        let mut second = 0.0f64;
        for a in 0..self.attributes.len() {
            let g = gain_at(stats, a);
            match best {
                Some((_, gb)) if g <= gb => second = second.max(g),
                Some((_, gb)) => {
                    second = second.max(gb);
                    best = Some((a, g));
                }
                None => best = Some((a, g)),
            }
        }
        let (attribute, g_best) = best?;
        let n = stats.n_seen;
        let epsilon = bound(self.params.range, self.params.delta, n);
        let distinct = stats.contingency[attribute]
            .iter()
            .filter(|b| b[0] + b[1] > 0)
            .count();
        let record = SplitRecord {
            node: leaf,
            attribute: self.attributes[attribute].name.clone(),
            g_best,
            g_second: second,
            epsilon,
            n,
        };
        if distinct < 2 || !record.satisfies(&self.params) {
            return None;
        }
        let branch_counts = branch_counts(&self.attributes);
        let first_child = self.nodes.len();
        let n_children = self.attributes[attribute].n_branches();
        self.nodes
            .extend((0..n_children).map(|_| Node::Leaf(LeafStats::new(&branch_counts))));
        self.nodes[leaf] = Node::Split {
            attribute,
            children: (first_child..first_child + n_children).collect(),
        };
        log::debug!(
            "split node {leaf} on {} (G1={g_best:.4}, G2={second:.4}, eps={epsilon:.4}, n={n})",
            record.attribute
        );
        self.splits.push(record.clone());
        Some(record)
    }

    pub fn predict(&self, values: &[Option<f64>]) -> Result<Prediction, TreeError> {
        let leaf = self.leaf_for(values)?;
        let Node::Leaf(stats) = &self.nodes[leaf] else {
            unreachable!("route ends at a leaf");
        };
        let probability = stats.positive_probability();
        Ok(Prediction {
            class: Class::from_label(probability > 0.5),
            probability,
        })
    }

    /// Checks the structural invariants: every split node has one child per
    /// branch, every non-root node has exactly one parent, and leaf tables
    /// match the attribute specs.
    pub fn validate(&self) -> Result<(), String> {
        let mut parents = vec![0usize; self.nodes.len()];
        let expected = branch_counts(&self.attributes);
        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split { attribute, children } => {
                    let spec = self
                        .attributes
                        .get(*attribute)
                        .ok_or_else(|| format!("node {id}: attribute {attribute} out of range"))?;
                    if children.len() != spec.n_branches() {
                        return Err(format!(
                            "node {id}: {} children for {} branches",
                            children.len(),
                            spec.n_branches()
                        ));
                    }
                    for &c in children {
                        if c == ROOT || c >= self.nodes.len() {
                            return Err(format!("node {id}: bad child {c}"));
                        }
                        parents[c] += 1;
                    }
                }
                Node::Leaf(s) => {
                    let shape: Vec<usize> = s.contingency.iter().map(Vec::len).collect();
                    if shape != expected {
                        return Err(format!("leaf {id}: contingency shape {shape:?}, expected {expected:?}"));
                    }
                    if s.class_counts[0] + s.class_counts[1] != s.n_seen || s.n_at_last_check > s.n_seen {
                        return Err(format!("leaf {id}: inconsistent counts"));
                    }
                }
            }
        }
        if let Some(id) = (1..self.nodes.len()).find(|&i| parents[i] != 1) {
            return Err(format!("node {id} has {} parents", parents[id]));
        }
        Ok(())
    }
}

fn branch_counts(attributes: &[AttributeSpec]) -> Vec<usize> {
    attributes.iter().map(AttributeSpec::n_branches).collect()
}
