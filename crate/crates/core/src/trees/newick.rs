use std::collections::HashMap;
use std::sync::Arc;

use super::tree::RawNode;
use super::{Clade, TaxonSet, Tree};
use crate::{Error, Result};

/// Parses one Newick statement into a topology.
///
/// Branch lengths, internal node labels and `[...]` comments are accepted
/// and discarded. With `taxa = None` the taxon set is derived from the leaf
/// labels in lexicographic order.
pub fn parse_newick(text: &str, taxa: Option<&Arc<TaxonSet>>) -> Result<Tree> {
    parse_newick_translated(text, taxa, None)
}

/// Like [`parse_newick`], but leaf labels are first mapped through
/// `translate` (a Nexus TRANSLATE table) when present.
pub fn parse_newick_translated(
    text: &str,
    taxa: Option<&Arc<TaxonSet>>,
    translate: Option<&HashMap<String, String>>,
) -> Result<Tree> {
    let raw = Parser::new(text).parse()?;
    let mut labels: Vec<(usize, String)> = Vec::new();
    for (i, node) in raw.nodes.iter().enumerate() {
        match node.children.len() {
            0 => {
                let label = node
                    .label
                    .clone()
                    .ok_or_else(|| Error::Taxon("leaf without a label".into()))?;
                let label = match translate.and_then(|t| t.get(&label)) {
                    Some(l) => l.clone(),
                    None => label,
                };
                labels.push((i, label));
            }
            2 => {}
            1 => return Err(Error::MalformedTree("vertex with a single child".into())),
            k => return Err(Error::MalformedTree(format!("vertex with {k} children; only binary trees are supported"))),
        }
    }
    let taxa = match taxa {
        Some(t) => t.clone(),
        None => TaxonSet::sorted(labels.iter().map(|(_, l)| l.clone()))?,
    };
    let n = taxa.len();
    let mut clades: Vec<Option<Clade>> = vec![None; raw.nodes.len()];
    for (i, label) in &labels {
        let idx = taxa
            .index_of(label)
            .ok_or_else(|| Error::Taxon(format!("unknown taxon '{label}'")))?;
        clades[*i] = Some(Clade::singleton(n, idx));
    }
    // children always have larger indices than their parent
    for i in (0..raw.nodes.len()).rev() {
        if let [a, b] = raw.nodes[i].children[..] {
            let (ca, cb) = (clades[a].as_ref().unwrap(), clades[b].as_ref().unwrap());
            if !ca.is_disjoint(cb) {
                return Err(Error::Taxon("duplicate taxon label".into()));
            }
            clades[i] = Some(ca.union(cb));
        }
    }
    if labels.len() != n {
        return Err(Error::Taxon(format!("tree has {} leaves but the taxon set has {n} taxa", labels.len())));
    }
    let arena = raw
        .nodes
        .iter()
        .zip(clades)
        .map(|(node, clade)| RawNode {
            clade: clade.unwrap(),
            children: match node.children[..] {
                [a, b] => Some([a, b]),
                _ => None,
            },
        })
        .collect();
    Tree::from_raw(taxa, arena, 0)
}

struct ParsedNode {
    label: Option<String>,
    children: Vec<usize>,
}

struct ParsedTree {
    nodes: Vec<ParsedNode>,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, bytes: text.as_bytes(), pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { position: self.pos, message: message.into() }
    }

    fn skip_trivia(&mut self) -> Result<()> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    let start = self.pos;
                    let mut depth = 0usize;
                    loop {
                        match self.bytes.get(self.pos) {
                            Some(b'[') => depth += 1,
                            Some(b']') => {
                                depth -= 1;
                                if depth == 0 {
                                    self.pos += 1;
                                    break;
                                }
                            }
                            Some(_) => {}
                            None => {
                                self.pos = start;
                                return Err(self.error("unterminated comment"));
                            }
                        }
                        self.pos += 1;
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn peek(&mut self) -> Result<Option<u8>> {
        self.skip_trivia()?;
        Ok(self.bytes.get(self.pos).copied())
    }

    fn parse(mut self) -> Result<ParsedTree> {
        let mut nodes = vec![ParsedNode { label: None, children: Vec::new() }];
        // stack of open internal nodes
        let mut open: Vec<usize> = Vec::new();
        let mut current = 0usize;
        let mut expecting_node = true;
        loop {
            let Some(b) = self.peek()? else {
                return Err(self.error("missing ';' at end of tree"));
            };
            match b {
                b'(' if expecting_node => {
                    self.pos += 1;
                    open.push(current);
                    let child = nodes.len();
                    nodes.push(ParsedNode { label: None, children: Vec::new() });
                    nodes[current].children.push(child);
                    current = child;
                }
                b',' if !expecting_node => {
                    self.pos += 1;
                    let Some(&parent) = open.last() else {
                        return Err(self.error("',' outside parentheses"));
                    };
                    let child = nodes.len();
                    nodes.push(ParsedNode { label: None, children: Vec::new() });
                    nodes[parent].children.push(child);
                    current = child;
                    expecting_node = true;
                }
                b')' if !expecting_node => {
                    self.pos += 1;
                    current = open.pop().ok_or_else(|| self.error("unbalanced ')'"))?;
                    self.annotations(&mut nodes[current])?;
                }
                b';' if !expecting_node => {
                    if !open.is_empty() {
                        return Err(self.error("unbalanced '('"));
                    }
                    self.pos += 1;
                    if self.peek()?.is_some() {
                        return Err(self.error("trailing characters after ';'"));
                    }
                    return Ok(ParsedTree { nodes });
                }
                _ if expecting_node => {
                    self.annotations(&mut nodes[current])?;
                    if nodes[current].label.is_none() {
                        return Err(self.error(format!("unexpected '{}'", b as char)));
                    }
                    expecting_node = false;
                }
                _ => return Err(self.error(format!("unexpected '{}'", b as char))),
            }
            if b == b')' {
                expecting_node = false;
            }
        }
    }

    /// Optional label followed by an optional `:length`.
    fn annotations(&mut self, node: &mut ParsedNode) -> Result<()> {
        if let Some(label) = self.label()? {
            node.label = Some(label);
        }
        if self.peek()? == Some(b':') {
            self.pos += 1;
            self.skip_trivia()?;
            let start = self.pos;
            while let Some(&b) = self.bytes.get(self.pos) {
                if b.is_ascii_digit() || b"+-.eE".contains(&b) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            let num = &self.text[start..self.pos];
            if num.parse::<f64>().is_err() {
                self.pos = start;
                return Err(self.error("invalid branch length"));
            }
        }
        Ok(())
    }

    fn label(&mut self) -> Result<Option<String>> {
        match self.peek()? {
            Some(b'\'') => {
                let start = self.pos;
                self.pos += 1;
                let mut out = String::new();
                loop {
                    match self.bytes.get(self.pos) {
                        Some(b'\'') if self.bytes.get(self.pos + 1) == Some(&b'\'') => {
                            out.push('\'');
                            self.pos += 2;
                        }
                        Some(b'\'') => {
                            self.pos += 1;
                            return Ok(Some(out));
                        }
                        Some(_) => {
                            let ch = self.text[self.pos..].chars().next().unwrap();
                            out.push(ch);
                            self.pos += ch.len_utf8();
                        }
                        None => {
                            self.pos = start;
                            return Err(self.error("unterminated quoted label"));
                        }
                    }
                }
            }
            Some(_) => {
                let start = self.pos;
                while let Some(&b) = self.bytes.get(self.pos) {
                    if b.is_ascii_whitespace() || b"()[]',:;".contains(&b) {
                        break;
                    }
                    self.pos += 1;
                }
                if self.pos == start {
                    Ok(None)
                } else {
                    Ok(Some(self.text[start..self.pos].to_string()))
                }
            }
            None => Ok(None),
        }
    }
}
