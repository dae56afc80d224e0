//! Word-level generalized suffix tree over the sentences of a corpus.
//!
//! Every suffix of every sentence is inserted, truncated at `max_depth`
//! words, so each node stands for one phrase of at most `max_depth` words
//! and records the documents in which that phrase occurs. Sentences are
//! inserted separately, which acts as a unique end-of-sentence terminator:
//! no phrase spans a sentence boundary. Construction is O(total words ×
//! max_depth).

use std::collections::HashMap;

use super::preprocess::Document;

type TokenId = u32;

#[derive(Debug)]
struct TreeNode {
    parent: u32,
    token: TokenId,
    depth: u8,
    children: HashMap<TokenId, u32>,
    docs: Vec<u32>,
}

#[derive(Debug)]
pub struct SuffixTree {
    vocab: Vec<String>,
    nodes: Vec<TreeNode>,
}

/// A phrase node: its words and the (ascending) documents containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseNode {
    pub phrase: Vec<String>,
    pub docs: Vec<usize>,
}

const ROOT: u32 = 0;

impl SuffixTree {
    pub fn build(docs: &[Document], max_depth: usize) -> Self {
        let max_depth = max_depth.min(u8::MAX as usize);
        let mut ids: HashMap<&str, TokenId> = HashMap::new();
        let mut vocab = Vec::new();
        let mut nodes = vec![TreeNode {
            parent: ROOT,
            token: 0,
            depth: 0,
            children: HashMap::new(),
            docs: Vec::new(),
        }];
        for (d, doc) in docs.iter().enumerate() {
            let d = d as u32;
            for sentence in doc {
                let toks: Vec<TokenId> = sentence
                    .iter()
                    .map(|w| {
                        *ids.entry(w.as_str()).or_insert_with(|| {
                            vocab.push(w.clone());
                            (vocab.len() - 1) as TokenId
                        })
                    })
                    .collect();
                for start in 0..toks.len() {
                    let end = (start + max_depth).min(toks.len());
                    let mut cur = ROOT;
                    for &t in &toks[start..end] {
                        let next = match nodes[cur as usize].children.get(&t) {
                            Some(&n) => n,
                            None => {
                                let n = nodes.len() as u32;
                                let depth = nodes[cur as usize].depth + 1;
                                nodes.push(TreeNode {
                                    parent: cur,
                                    token: t,
                                    depth,
                                    children: HashMap::new(),
                                    docs: Vec::new(),
                                });
                                nodes[cur as usize].children.insert(t, n);
                                n
                            }
                        };
                        // documents arrive in increasing order, so a last-element
                        // check deduplicates
                        let node = &mut nodes[next as usize];
                        if node.docs.last() != Some(&d) {
                            node.docs.push(d);
                        }
                        cur = next;
                    }
                }
            }
        }
        SuffixTree { vocab, nodes }
    }

    /// Number of phrase nodes (excluding the root).
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn phrase_of(&self, mut id: u32) -> Vec<String> {
        let mut words = Vec::with_capacity(self.nodes[id as usize].depth as usize);
        while id != ROOT {
            let n = &self.nodes[id as usize];
            words.push(self.vocab[n.token as usize].clone());
            id = n.parent;
        }
        words.reverse();
        words
    }

    /// All phrases occurring in at least `min_docs` documents.
    pub fn shared_phrases(&self, min_docs: usize) -> Vec<PhraseNode> {
        self.nodes
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, n)| n.docs.len() >= min_docs)
            .map(|(i, n)| PhraseNode {
                phrase: self.phrase_of(i as u32),
                docs: n.docs.iter().map(|&d| d as usize).collect(),
            })
            .collect()
    }

    /// Documents containing `phrase`, if it is a node of the tree.
    pub fn lookup(&self, phrase: &[&str]) -> Option<Vec<usize>> {
        let mut cur = ROOT;
        for w in phrase {
            let t = self.vocab.iter().position(|v| v == w)? as TokenId;
            cur = *self.nodes[cur as usize].children.get(&t)?;
        }
        (cur != ROOT).then(|| self.nodes[cur as usize].docs.iter().map(|&d| d as usize).collect())
    }
}
