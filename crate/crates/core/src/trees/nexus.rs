use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use super::{parse_newick_translated, TaxonSet, TreeSample};
use crate::{Error, Result};

/// Reads a tree sample from a plain Newick file (one tree per statement) or
/// a Nexus file with a TREES block, discarding the first
/// `floor(burnin * total)` trees.
pub fn parse_trees_file(path: impl AsRef<Path>, burnin: f64) -> Result<TreeSample> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trees_str(&text, burnin)
}

/// Like [`parse_trees_file`], but every tree must be over `taxa`.
pub fn parse_trees_file_with_taxa(path: impl AsRef<Path>, burnin: f64, taxa: &Arc<TaxonSet>) -> Result<TreeSample> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trees_with_taxa(&text, burnin, Some(taxa))
}

/// Same as [`parse_trees_file`] on in-memory text.
pub fn parse_trees_str(text: &str, burnin: f64) -> Result<TreeSample> {
    parse_trees_with_taxa(text, burnin, None)
}

pub(crate) fn parse_trees_with_taxa(text: &str, burnin: f64, taxa: Option<&Arc<TaxonSet>>) -> Result<TreeSample> {
    if !(0.0..1.0).contains(&burnin) {
        return Err(Error::InvalidArgument(format!("burn-in fraction {burnin} not in [0, 1)")));
    }
    let (statements, translate) = if is_nexus(text) {
        nexus_trees(text)?
    } else {
        let trees = split_statements(text)?
            .into_iter()
            .filter(|(_, s)| !s.trim().is_empty())
            .map(|(offset, s)| (offset, format!("{s};")))
            .collect();
        (trees, None)
    };
    let total = statements.len();
    let skip = (burnin * total as f64).floor() as usize;
    let mut taxa = taxa.cloned();
    let mut trees = Vec::with_capacity(total - skip);
    for (offset, statement) in statements.into_iter().skip(skip) {
        let tree = parse_newick_translated(&statement, taxa.as_ref(), translate.as_ref()).map_err(|e| match e {
            Error::Parse { position, message } => Error::Parse { position: position + offset, message },
            other => other,
        })?;
        if taxa.is_none() {
            taxa = Some(tree.taxa().clone());
        }
        trees.push(tree);
    }
    if trees.is_empty() {
        return Err(Error::EmptyInput(format!("no trees left after discarding {skip} of {total} as burn-in")));
    }
    TreeSample::from_trees(trees)
}

fn is_nexus(text: &str) -> bool {
    text.trim_start().get(..6).is_some_and(|s| s.eq_ignore_ascii_case("#nexus"))
}

/// Splits on ';' outside of comments and quoted labels. Each item carries the
/// byte offset at which it starts.
fn split_statements(text: &str) -> Result<Vec<(usize, &str)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut depth = 0usize;
    let mut quoted = false;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'\'' if depth == 0 => quoted = !quoted,
            b'[' if !quoted => depth += 1,
            b']' if !quoted && depth > 0 => depth -= 1,
            b';' if !quoted && depth == 0 => {
                out.push((start, &text[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    if quoted || depth > 0 {
        return Err(Error::Parse { position: start, message: "unterminated quote or comment".into() });
    }
    let rest = &text[start..];
    if !strip_comments(rest).trim().is_empty() {
        return Err(Error::Parse { position: text.len(), message: "missing ';' after last statement".into() });
    }
    Ok(out)
}

fn strip_comments(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut depth = 0usize;
    for ch in s.chars() {
        match ch {
            '[' => depth += 1,
            ']' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(ch),
            _ => {}
        }
    }
    out
}

type NexusTrees = (Vec<(usize, String)>, Option<HashMap<String, String>>);

/// Minimal Nexus support: the TREES block with its optional TRANSLATE
/// table and `tree name = newick;` statements. Other blocks are skipped.
fn nexus_trees(text: &str) -> Result<NexusTrees> {
    let mut in_trees = false;
    let mut translate: Option<HashMap<String, String>> = None;
    let mut trees = Vec::new();
    let header_end = text.len() - text.trim_start().len() + "#NEXUS".len();
    for (offset, raw) in split_statements(&text[header_end..])? {
        let offset = offset + header_end;
        let stmt = strip_comments(raw);
        let stmt = stmt.trim();
        let (keyword, rest) = match stmt.find(char::is_whitespace) {
            Some(i) => (&stmt[..i], stmt[i..].trim()),
            None => (stmt, ""),
        };
        let keyword = keyword.to_ascii_lowercase();
        match keyword.as_str() {
            "begin" => in_trees = rest.eq_ignore_ascii_case("trees"),
            "end" | "endblock" => in_trees = false,
            "translate" if in_trees => translate = Some(parse_translate(rest, offset)?),
            "tree" | "utree" if in_trees => {
                // keep comments so offsets stay meaningful for the Newick parser
                let eq = raw.find('=').ok_or_else(|| Error::Parse {
                    position: offset,
                    message: "tree statement without '='".into(),
                })?;
                trees.push((offset + eq + 1, format!("{};", &raw[eq + 1..])));
            }
            _ => {}
        }
    }
    Ok((trees, translate))
}

fn parse_translate(body: &str, offset: usize) -> Result<HashMap<String, String>> {
    let mut table = HashMap::new();
    for entry in body.split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let mut parts = entry.splitn(2, char::is_whitespace);
        let key = parts.next().unwrap_or_default();
        let label = parts.next().map(str::trim).unwrap_or_default();
        if label.is_empty() {
            return Err(Error::Parse { position: offset, message: format!("bad TRANSLATE entry '{entry}'") });
        }
        let label = unquote(label);
        if table.insert(key.to_string(), label).is_some() {
            return Err(Error::Parse { position: offset, message: format!("duplicate TRANSLATE key '{key}'") });
        }
    }
    Ok(table)
}

fn unquote(s: &str) -> String {
    if s.len() >= 2 && s.starts_with('\'') && s.ends_with('\'') {
        s[1..s.len() - 1].replace("''", "'")
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::parse_newick;

    #[test]
    fn burnin_floor() {
        let text: String = (0..10).map(|_| "((A,B),C);\n").collect();
        let s = parse_trees_str(&text, 0.1).unwrap();
        assert_eq!(s.len(), 9);
        let s = parse_trees_str(&text, 0.25).unwrap();
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn nexus_with_translate() {
        let text = "#NEXUS\n\nBegin taxa;\n  Dimensions ntax=3;\n  Taxlabels A B C;\nEnd;\n\
                    Begin trees;\n  Translate\n    1 A,\n    2 B,\n    3 'C'\n  ;\n\
                    tree STATE_0 = [&R] ((1:0.1,2:0.2)[&x=1]:0.3,3:0.5);\n\
                    tree STATE_1 = ((1,3),2);\nEnd;\n";
        let s = parse_trees_str(text, 0.0).unwrap();
        assert_eq!(s.len(), 2);
        let expected = parse_newick("((A,B),C);", None).unwrap();
        assert_eq!(s.tree(0), &expected);
        assert_eq!(s.taxa().labels(), &["A", "B", "C"]);
    }

    #[test]
    fn mixed_taxon_sets() {
        let text = "((A,B),C);\n((A,B),D);\n";
        assert!(matches!(parse_trees_str(text, 0.0), Err(Error::Taxon(_))));
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(parse_trees_str("", 0.0), Err(Error::EmptyInput(_))));
        assert!(matches!(parse_trees_str("((A,B),C);", 0.5), Ok(_)));
        assert!(matches!(parse_trees_str("((A,B),C);\n((A,B),C);", 0.5), Ok(_)));
        assert!(matches!(parse_trees_str("#NEXUS\nbegin trees;\nend;\n", 0.0), Err(Error::EmptyInput(_))));
        assert!(matches!(parse_trees_str("((A,B),C);", 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn parse_error_offsets_are_file_relative() {
        match parse_trees_str("((A,B),C);\n((A,B),,C);\n", 0.0) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 18),
            other => panic!("{other:?}"),
        }
    }
}
