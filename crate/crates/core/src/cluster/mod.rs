//! Suffix Tree Clustering of review texts.
//!
//! Base clusters are phrases shared by at least two documents, scored by
//! document count times a phrase-length weight. Base clusters whose document
//! sets overlap by more than a threshold in both directions are linked;
//! connected components become the final, phrase-labeled clusters.

mod preprocess;
mod suffix_tree;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use preprocess::{is_stopword, preprocess, stem, Document, Sentence};
pub use suffix_tree::{PhraseNode, SuffixTree};

use crate::review::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StcParams {
    pub max_phrase_len: usize,
    /// Base clusters kept before merging.
    pub top_k: usize,
    pub overlap_threshold: f64,
    /// Weight of single-word phrases; lengths 2..=`max_phrase_len` rise linearly to 1.
    pub single_word_weight: f64,
}

impl Default for StcParams {
    fn default() -> Self {
        StcParams {
            max_phrase_len: 6,
            top_k: 500,
            overlap_threshold: 0.5,
            single_word_weight: 0.5,
        }
    }
}

impl StcParams {
    pub fn length_weight(&self, len: usize) -> f64 {
        let w1 = self.single_word_weight;
        if len <= 1 || self.max_phrase_len <= 1 {
            return w1;
        }
        let span = (self.max_phrase_len - 1) as f64;
        (w1 + (1.0 - w1) * (len - 1) as f64 / span).min(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phrase(pub Vec<String>);

impl Phrase {
    pub fn label(&self) -> String {
        self.0.join(" ")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseCluster {
    pub phrase: Phrase,
    /// Ascending document ids.
    pub docs: Vec<usize>,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub label: Phrase,
    pub docs: Vec<usize>,
    pub score: f64,
    /// Phrases of the merged base clusters, best first.
    pub members: Vec<Phrase>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub polarity: Polarity,
    pub clusters: Vec<Cluster>,
}

fn by_score_then_phrase(a: &BaseCluster, b: &BaseCluster) -> std::cmp::Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.phrase.cmp(&b.phrase))
}

/// Base clusters of a corpus, best `params.top_k` by score (ties by phrase).
pub fn base_clusters(docs: &[Document], params: &StcParams) -> Vec<BaseCluster> {
    if docs.len() < 2 || params.top_k == 0 {
        return Vec::new();
    }
    let tree = SuffixTree::build(docs, params.max_phrase_len);
    let mut bases: Vec<BaseCluster> = tree
        .shared_phrases(2)
        .into_iter()
        .map(|n| BaseCluster {
            score: n.docs.len() as f64 * params.length_weight(n.phrase.len()),
            phrase: Phrase(n.phrase),
            docs: n.docs,
        })
        .collect();
    bases.sort_by(by_score_then_phrase);
    bases.truncate(params.top_k);
    bases
}

fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Whether two base clusters are linked in the merge graph.
pub fn similar(a: &BaseCluster, b: &BaseCluster, threshold: f64) -> bool {
    if a.docs.is_empty() || b.docs.is_empty() {
        return false;
    }
    let common = intersection_len(&a.docs, &b.docs) as f64;
    common / a.docs.len() as f64 > threshold && common / b.docs.len() as f64 > threshold
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the overlap graph, best summed score first.
pub fn merge(bases: &[BaseCluster], threshold: f64) -> Vec<Cluster> {
    let n = bases.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if similar(&bases[i], &bases[j], threshold) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_values()
        .map(|mut members| {
            members.sort_by(|&a, &b| by_score_then_phrase(&bases[a], &bases[b]));
            let mut docs: Vec<usize> = members.iter().flat_map(|&m| bases[m].docs.iter().copied()).collect();
            docs.sort_unstable();
            docs.dedup();
            // summed in canonical member order so the total is input-order independent
            let score = members.iter().map(|&m| bases[m].score).sum();
            Cluster {
                label: bases[members[0]].phrase.clone(),
                docs,
                score,
                members: members.iter().map(|&m| bases[m].phrase.clone()).collect(),
            }
        })
        .collect();
    clusters.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.label.cmp(&b.label)));
    clusters
}

/// Full STC over already-preprocessed documents; doc ids are positions in `docs`.
pub fn cluster_documents(docs: &[Document], params: &StcParams) -> Vec<Cluster> {
    merge(&base_clusters(docs, params), params.overlap_threshold)
}

/// Clusters the texts of recommending and non-recommending reviews separately,
/// keeping the top `k` clusters of each. Doc ids are record indices in `d`.
pub fn topics_by_polarity(d: &Dataset, k: usize, params: &StcParams) -> (ClusterSet, ClusterSet) {
    let run = |want: bool, polarity: Polarity| {
        let (ids, docs): (Vec<usize>, Vec<Document>) = d
            .records()
            .iter()
            .enumerate()
            .filter(|(_, r)| r.recommended == Some(want))
            .map(|(i, r)| (i, preprocess(&r.text)))
            .unzip();
        let mut clusters = if k == 0 { Vec::new() } else { cluster_documents(&docs, params) };
        clusters.truncate(k);
        for c in &mut clusters {
            for doc in &mut c.docs {
                *doc = ids[*doc];
            }
        }
        ClusterSet { polarity, clusters }
    };
    (run(true, Polarity::Positive), run(false, Polarity::Negative))
}

#[derive(Serialize)]
struct TopicEntry<'a> {
    label: String,
    size: usize,
    score: f64,
    sample_doc_ids: &'a [usize],
}

#[derive(Serialize)]
struct TopicReport<'a> {
    polarity: Polarity,
    clusters: Vec<TopicEntry<'a>>,
}

impl ClusterSet {
    /// `{polarity, clusters: [{label, size, score, sample_doc_ids}]}`
    pub fn to_report_json(&self, samples: usize) -> serde_json::Value {
        let report = TopicReport {
            polarity: self.polarity,
            clusters: self
                .clusters
                .iter()
                .map(|c| TopicEntry {
                    label: c.label.label(),
                    size: c.docs.len(),
                    score: c.score,
                    sample_doc_ids: &c.docs[..c.docs.len().min(samples)],
                })
                .collect(),
        };
        serde_json::to_value(report).expect("topic report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let title = match self.polarity {
            Polarity::Positive => "positive (recommended)",
            Polarity::Negative => "negative (not recommended)",
        };
        let _ = writeln!(out, "{title}");
        let _ = writeln!(out, "{:>4}  {:<40} {:>6} {:>9}", "rank", "topic", "docs", "score");
        for (i, c) in self.clusters.iter().enumerate() {
            let _ = writeln!(out, "{:>4}  {:<40} {:>6} {:>9.2}", i + 1, c.label.label(), c.docs.len(), c.score);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::review::{Category, ReviewRecord};

    fn base(phrase: &str, docs: &[usize], score: f64) -> BaseCluster {
        BaseCluster {
            phrase: Phrase(phrase.split(' ').map(String::from).collect()),
            docs: docs.to_vec(),
            score,
        }
    }

    #[test]
    fn length_weights() {
        let p = StcParams::default();
        assert_eq!(p.length_weight(1), 0.5);
        assert!((p.length_weight(2) - 0.6).abs() < 1e-15);
        assert_eq!(p.length_weight(6), 1.0);
        assert_eq!(p.length_weight(9), 1.0);
    }

    #[test]
    fn shared_boarding_time() {
        let docs: Vec<Document> = ["Boarding time was a mess.", "Terrible boarding time at the gate"]
            .iter()
            .map(|t| preprocess(t))
            .collect();
        let bases = base_clusters(&docs, &StcParams::default());
        let bt = bases
            .iter()
            .find(|b| b.phrase.0 == ["board", "time"])
            .expect("board time base cluster");
        assert_eq!(bt.docs, vec![0, 1]);
        assert!((bt.score - 2.0 * 0.6).abs() < 1e-15);
        // the two-word phrase outranks its single words
        assert_eq!(bases[0].phrase.0, ["board", "time"]);
    }

    #[test]
    fn nothing_shared_or_single_doc() {
        let docs: Vec<Document> = ["lounge food", "seat recline"].iter().map(|t| preprocess(t)).collect();
        assert!(base_clusters(&docs, &StcParams::default()).is_empty());
        assert!(base_clusters(&docs[..1], &StcParams::default()).is_empty());
    }

    #[test]
    fn identical_sets_merge() {
        let c = merge(&[base("a", &[1, 2, 3], 1.5), base("b", &[1, 2, 3], 1.5)], 0.5);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].label.label(), "a");
        assert_eq!(c[0].score, 3.0);
    }

    #[test]
    fn disjoint_never_merge() {
        let c = merge(&[base("a", &[1, 2], 1.0), base("b", &[3, 4], 2.0)], 0.0);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].label.label(), "b");
    }

    #[test]
    fn chain_is_one_component() {
        // A~B (2/3 both ways), B~C (2/3 both ways), A and C share one of three
        let a = base("a", &[1, 2, 3], 1.5);
        let b = base("b", &[2, 3, 4], 1.5);
        let c = base("c", &[3, 4, 5], 1.5);
        assert!(similar(&a, &b, 0.5) && similar(&b, &c, 0.5) && !similar(&a, &c, 0.5));
        let merged = merge(&[a.clone(), b.clone(), c.clone()], 0.5);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].docs, vec![1, 2, 3, 4, 5]);
        assert_eq!(merged[0].members.len(), 3);
        // input order does not matter
        assert_eq!(merge(&[c, a, b], 0.5), merged);
    }

    #[test]
    fn overlap_must_hold_both_ways() {
        let big = base("big", &[1, 2, 3, 4, 5, 6], 3.0);
        let small = base("small", &[1, 2], 1.0);
        assert!(!similar(&big, &small, 0.5));
        assert_eq!(merge(&[big, small], 0.5).len(), 2);
    }

    fn labeled(text: &str, rec: bool) -> ReviewRecord {
        labeled_in(Category::Airline, text, rec)
    }

    fn labeled_in(category: Category, text: &str, rec: bool) -> ReviewRecord {
        ReviewRecord {
            text: text.into(),
            recommended: Some(rec),
            ..ReviewRecord::blank(category)
        }
    }

    #[test]
    fn negative_topic_boarding_time() {
        let d = Dataset::new(
            Category::Airline,
            vec![
                labeled("Smooth immigration and friendly crew.", true),
                labeled("Boarding time was chaotic. Seats fine.", false),
                labeled("Quick immigration, friendly crew!", true),
                labeled("Awful boarding time and rude staff.", false),
                labeled("Boarding time delayed again.", false),
                labeled("Nice food.", true),
            ],
        )
        .unwrap();
        let (pos, neg) = topics_by_polarity(&d, 5, &StcParams::default());
        assert_eq!(neg.polarity, Polarity::Negative);
        assert_eq!(neg.clusters[0].label.label(), "board time");
        assert_eq!(neg.clusters[0].docs, vec![1, 3, 4]);
        assert!(pos.clusters.iter().any(|c| c.members.iter().any(|m| m.label() == "friend crew")));
        let json = neg.to_report_json(2);
        assert_eq!(json["polarity"], "negative");
        assert_eq!(json["clusters"][0]["label"], "board time");
        assert_eq!(json["clusters"][0]["size"], 3);
        assert_eq!(json["clusters"][0]["sample_doc_ids"], serde_json::json!([1, 3]));
        assert!(neg.to_table().contains("board time"));
    }

    #[test]
    fn all_positive_and_k_zero() {
        let d = Dataset::new(
            Category::Seat,
            vec![
                labeled_in(Category::Seat, "great legroom", true),
                labeled_in(Category::Seat, "great legroom indeed", true),
            ],
        )
        .unwrap();
        let (pos, neg) = topics_by_polarity(&d, 3, &StcParams::default());
        assert!(neg.clusters.is_empty());
        assert!(!pos.clusters.is_empty());
        let (pos0, neg0) = topics_by_polarity(&d, 0, &StcParams::default());
        assert!(pos0.clusters.is_empty() && neg0.clusters.is_empty());
    }
}
