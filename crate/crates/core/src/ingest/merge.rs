use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{Source, VulnerabilityRecord};

/// How many input variants of each source were folded into one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceTally {
    pub osv: usize,
    pub nvd: usize,
    /// Ids of every variant that was folded in, survivor included, sorted.
    pub merged_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedDataset {
    /// Sorted by id.
    pub records: Vec<VulnerabilityRecord>,
    /// Parallel to `records`.
    pub provenance: Vec<SourceTally>,
}

impl MergedDataset {
    pub fn from_osv(&self) -> usize {
        self.records.iter().filter(|r| r.source == Source::Osv).count()
    }

    pub fn from_nvd(&self) -> usize {
        self.records.iter().filter(|r| r.source == Source::Nvd).count()
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Unifies records that share any identifier (id or alias), transitively.
///
/// Within each connected component the OSV variant survives (ties broken by
/// smallest id). Aliases, references and ecosystems are set-unioned; severity
/// and timestamps missing on the survivor are filled from the other variants.
pub fn merge_dedup(osv: Vec<VulnerabilityRecord>, nvd: Vec<VulnerabilityRecord>) -> MergedDataset {
    let all: Vec<VulnerabilityRecord> = osv.into_iter().chain(nvd).collect();
    let mut sets = DisjointSet::new(all.len());
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (idx, record) in all.iter().enumerate() {
        for ident in record.identifiers() {
            match owner.get(ident) {
                Some(&other) => sets.union(idx, other),
                None => {
                    owner.insert(ident, idx);
                }
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for idx in 0..all.len() {
        let root = sets.find(idx);
        components.entry(root).or_default().push(idx);
    }

    let mut merged: Vec<(VulnerabilityRecord, SourceTally)> = components
        .into_values()
        .map(|mut members| {
            members.sort_by(|&a, &b| (all[a].source, &all[a].id).cmp(&(all[b].source, &all[b].id)));
            fold_component(members.iter().map(|&i| &all[i]))
        })
        .collect();
    merged.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    let (records, provenance) = merged.into_iter().unzip();
    MergedDataset { records, provenance }
}

fn fold_component<'a>(
    mut members: impl Iterator<Item = &'a VulnerabilityRecord>,
) -> (VulnerabilityRecord, SourceTally) {
    let first = members.next().expect("components are non-empty");
    let mut kept = first.clone();
    let mut tally = SourceTally { osv: 0, nvd: 0, merged_ids: vec![first.id.clone()] };
    let bump = |tally: &mut SourceTally, source| match source {
        Source::Osv => tally.osv += 1,
        Source::Nvd => tally.nvd += 1,
    };
    bump(&mut tally, first.source);

    for other in members {
        bump(&mut tally, other.source);
        tally.merged_ids.push(other.id.clone());
        let idents: Vec<String> = other.identifiers().map(str::to_string).collect();
        kept.add_aliases(idents.iter().map(String::as_str));
        for r in &other.references {
            if !kept.references.contains(r) {
                kept.references.push(r.clone());
            }
        }
        for e in &other.ecosystems {
            if !kept.ecosystems.contains(e) {
                kept.ecosystems.push(e.clone());
            }
        }
        if kept.severity.is_none() {
            kept.severity = other.severity.clone();
        }
        if kept.published.is_none() {
            kept.published = other.published;
        }
        if kept.modified.is_none() {
            kept.modified = other.modified;
        }
    }
    tally.merged_ids.sort();
    (kept, tally)
}
