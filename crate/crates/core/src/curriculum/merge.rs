use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::corpus::Document;

pub const PAGE_SEPARATOR: &str = "\n\n";

#[derive(Debug, Error, PartialEq)]
pub enum MergeError {
    #[error("duplicate_page: group {group:?} has page {page} more than once")]
    DuplicatePage { group: String, page: u32 },
}

/// Joins the pages of each `doc_group_id` in ascending `page_no` order.
///
/// The merged document takes the group id as its id, sits where the group's
/// first page appeared, and keeps the other fields of its lowest page. A
/// group with a single page and ungrouped documents pass through unchanged.
/// Grouped records without a page number sort after numbered pages in input
/// order.
pub fn merge_pages(docs: Vec<Document>) -> Result<Vec<Document>, MergeError> {
    // group -> (page key, input index)
    let mut groups: HashMap<String, BTreeMap<(u32, usize), usize>> = HashMap::new();
    for (i, d) in docs.iter().enumerate() {
        let Some(g) = &d.doc_group_id else { continue };
        let pages = groups.entry(g.clone()).or_default();
        if let Some(p) = d.page_no {
            if pages.keys().any(|&(q, _)| q == p) {
                return Err(MergeError::DuplicatePage { group: g.clone(), page: p });
            }
        }
        pages.insert((d.page_no.unwrap_or(u32::MAX), i), i);
    }

    let mut slots: Vec<Option<Document>> = docs.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(slots.len());
    for i in 0..slots.len() {
        let Some(doc) = slots[i].take() else { continue };
        let Some(pages) = doc.doc_group_id.as_ref().and_then(|g| groups.get(g)) else {
            out.push(doc);
            continue;
        };
        if pages.len() == 1 {
            out.push(doc);
            continue;
        }
        slots[i] = Some(doc);
        let mut parts: Vec<Document> = pages.values().map(|&j| slots[j].take().expect("page taken twice")).collect();
        let text = parts.iter().map(|p| p.text.as_str()).collect::<Vec<_>>().join(PAGE_SEPARATOR);
        let mut merged = parts.swap_remove(0);
        merged.id = merged.doc_group_id.clone().expect("grouped");
        merged.text = text;
        merged.page_no = None;
        out.push(merged);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn page(id: &str, g: &str, n: u32, text: &str) -> Document {
        Document::new(id, text).with_page(g, n)
    }

    #[test]
    fn restores_page_order() {
        let out = merge_pages(vec![page("p2", "g", 2, "b"), page("p1", "g", 1, "a")]).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, "g");
        assert_eq!(out[0].text, "a\n\nb");
        assert_eq!(out[0].page_no, None);
    }

    #[test]
    fn ungrouped_and_single_pages_pass_through() {
        let a = Document::new("a", "solo").with_url("http://x");
        let b = page("b", "h", 7, "only page");
        let out = merge_pages(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(out, vec![a, b]);
    }

    #[test]
    fn duplicate_page_is_an_error() {
        let err = merge_pages(vec![page("x", "g", 1, "a"), page("y", "g", 1, "b")]).unwrap_err();
        assert_eq!(err, MergeError::DuplicatePage { group: "g".into(), page: 1 });
    }

    #[test]
    fn gaps_are_allowed() {
        let out = merge_pages(vec![page("c", "g", 9, "c"), page("a", "g", 1, "a"), page("b", "g", 4, "b")]).unwrap();
        assert_eq!(out[0].text, "a\n\nb\n\nc");
    }

    #[test]
    fn shuffled_groups_match_sorted_join() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut docs = Vec::new();
        for g in 0..5 {
            for p in 1..=3 {
                docs.push(page(&format!("g{g}p{p}"), &format!("g{g}"), p, &format!("group {g} page {p}")));
            }
        }
        docs.push(Document::new("loose", "no group"));
        docs.shuffle(&mut rng);
        let out = merge_pages(docs.clone()).unwrap();
        assert_eq!(out.len(), 6);
        for g in 0..5 {
            let gid = format!("g{g}");
            let mut pages: Vec<&Document> = docs.iter().filter(|d| d.doc_group_id.as_deref() == Some(&gid)).collect();
            pages.sort_by_key(|d| d.page_no);
            let oracle = pages.iter().map(|d| d.text.clone()).collect::<Vec<_>>().join("\n\n");
            let merged = out.iter().find(|d| d.id == gid).unwrap();
            assert_eq!(merged.text, oracle);
        }
        // merged docs sit at their group's first appearance
        let firsts: Vec<String> = {
            let mut seen = Vec::new();
            for d in &docs {
                let key = d.doc_group_id.clone().unwrap_or(d.id.clone());
                if !seen.contains(&key) {
                    seen.push(key);
                }
            }
            seen
        };
        assert_eq!(out.iter().map(|d| d.id.clone()).collect::<Vec<_>>(), firsts);
    }
}
