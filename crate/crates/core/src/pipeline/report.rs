use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::{DateTime, Timelike, Utc};
use serde::Serialize;

use super::baseline::Baseline;
use super::classify::ClassifiedMessage;
use crate::acquire::Forge;
use crate::level::{legend_capabilities, InformativenessLevel};
use crate::stats::{
    group_and_filter, kruskal_wallis, mann_whitney_u, GroupSummary, MwuOptions, OrdinalSample, StatTestResult,
};

/// Baseline table holding the reference timeline columns; its first row is
/// the comparison target.
pub const TIMELINE_TABLE: &str = "timeline";
pub const ECOSYSTEM_TABLE: &str = "ecosystem";
pub const CCS_TABLE: &str = "ccs";

pub struct AnalysisOptions<'a> {
    pub cutoffs: &'a [DateTime<Utc>],
    pub min_group_size: usize,
    pub baseline: &'a Baseline,
}

/// A distribution column; `None` marks an empty split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub label: String,
    pub summary: Option<GroupSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub label: String,
    pub result: Option<StatTestResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineAnalysis {
    pub baseline: Option<GroupSummary>,
    /// Forge × "author_date < cutoff" columns; nested, so they overlap.
    pub cumulative: Vec<Column>,
    pub tests: Vec<TestOutcome>,
    /// Forge × time window; every message lands in exactly one.
    pub partitions: Vec<Column>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcosystemAnalysis {
    pub min_group_size: usize,
    pub ranked: Vec<GroupSummary>,
    pub excluded: Vec<(String, usize)>,
    pub without_ecosystem: usize,
    pub test: TestOutcome,
    /// Published columns, ranked by mean score.
    pub published: Vec<GroupSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcsAnalysis {
    pub compliant: Column,
    pub non_compliant: Column,
    pub test: TestOutcome,
    pub published: Vec<GroupSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub messages: usize,
    pub dictionary_versions: Vec<String>,
    pub pattern_versions: Vec<String>,
    pub baseline_version: String,
    pub timeline: TimelineAnalysis,
    pub ecosystems: EcosystemAnalysis,
    pub ccs: CcsAnalysis,
}

pub fn forge_label(forge: Forge) -> &'static str {
    match forge {
        Forge::GitHub => "GitHub",
        Forge::Other => "other platforms",
    }
}

fn day(t: &DateTime<Utc>) -> String {
    if t.num_seconds_from_midnight() == 0 {
        t.format("%Y-%m-%d").to_string()
    } else {
        t.to_rfc3339()
    }
}

fn column<'a>(label: String, msgs: impl IntoIterator<Item = &'a ClassifiedMessage>) -> Column {
    Column { summary: GroupSummary::from_levels(label.clone(), msgs.into_iter().map(|m| m.level)), label }
}

fn sample(s: &GroupSummary) -> OrdinalSample {
    OrdinalSample::from_counts(s.label.clone(), &s.counts)
}

fn mwu(label: String, a: Option<&GroupSummary>, b: Option<&GroupSummary>) -> TestOutcome {
    match (a, b) {
        (Some(a), Some(b)) => TestOutcome {
            label,
            result: mann_whitney_u(&sample(a), &sample(b), MwuOptions::default()).ok(),
            skipped: None,
        },
        _ => TestOutcome { label, result: None, skipped: Some("a side of the split is empty".into()) },
    }
}

fn by_mean(mut groups: Vec<GroupSummary>) -> Vec<GroupSummary> {
    groups.sort_by(|a, b| b.mean_score.total_cmp(&a.mean_score).then_with(|| a.label.cmp(&b.label)));
    groups
}

type Bound = Option<DateTime<Utc>>;

pub fn analyze(messages: &[ClassifiedMessage], opts: &AnalysisOptions) -> Analysis {
    let versions = |f: fn(&ClassifiedMessage) -> &str| {
        messages.iter().map(f).map(str::to_string).collect::<BTreeSet<_>>().into_iter().collect()
    };
    Analysis {
        messages: messages.len(),
        dictionary_versions: versions(|m| &m.dictionary_version),
        pattern_versions: versions(|m| &m.pattern_version),
        baseline_version: opts.baseline.version.clone(),
        timeline: timeline(messages, opts),
        ecosystems: ecosystems(messages, opts),
        ccs: ccs(messages, opts),
    }
}

fn timeline(messages: &[ClassifiedMessage], opts: &AnalysisOptions) -> TimelineAnalysis {
    let baseline = opts.baseline.table(TIMELINE_TABLE).next().cloned();
    let mut cumulative = Vec::new();
    let mut tests = Vec::new();
    for forge in [Forge::GitHub, Forge::Other] {
        for cutoff in opts.cutoffs {
            let col = column(
                format!("{} until {}", forge_label(forge), day(cutoff)),
                messages.iter().filter(|m| m.forge == forge && m.author_date < *cutoff),
            );
            if let Some(b) = &baseline {
                tests.push(mwu(format!("{} vs {}", col.label, b.label), col.summary.as_ref(), Some(b)));
            }
            cumulative.push(col);
        }
    }
    let n = opts.cutoffs.len();
    for (i, cutoff) in opts.cutoffs.iter().enumerate() {
        let (gh, other) = (&cumulative[i], &cumulative[n + i]);
        tests.push(mwu(
            format!("GitHub vs other platforms until {}", day(cutoff)),
            gh.summary.as_ref(),
            other.summary.as_ref(),
        ));
    }

    // (label, inclusive lower bound, exclusive upper bound)
    let mut windows: Vec<(String, Bound, Bound)> = Vec::new();
    let mut lower = None;
    for c in opts.cutoffs {
        let label = match lower {
            None => format!("before {}", day(c)),
            Some(l) => format!("{} to {}", day(&l), day(c)),
        };
        windows.push((label, lower, Some(*c)));
        lower = Some(*c);
    }
    if let Some(l) = lower {
        windows.push((format!("from {}", day(&l)), Some(l), None));
    }
    let mut partitions = Vec::new();
    for forge in [Forge::GitHub, Forge::Other] {
        for (label, lo, hi) in &windows {
            partitions.push(column(
                format!("{} {}", forge_label(forge), label),
                messages.iter().filter(|m| {
                    m.forge == forge
                        && lo.is_none_or(|lo| m.author_date >= lo)
                        && hi.is_none_or(|hi| m.author_date < hi)
                }),
            ));
        }
    }
    TimelineAnalysis { baseline, cumulative, tests, partitions }
}

fn ecosystems(messages: &[ClassifiedMessage], opts: &AnalysisOptions) -> EcosystemAnalysis {
    let pairs = messages.iter().flat_map(|m| m.ecosystems.iter().map(move |e| (e.clone(), m.level)));
    let grouped = group_and_filter(pairs, opts.min_group_size);
    let test = if grouped.kept.len() < 2 {
        TestOutcome {
            label: "ecosystems".into(),
            result: None,
            skipped: Some(format!("{} ecosystem(s) left after filtering, need 2", grouped.kept.len())),
        }
    } else {
        let samples: Vec<_> = grouped.kept.iter().map(sample).collect();
        TestOutcome { label: "ecosystems".into(), result: kruskal_wallis(&samples).ok(), skipped: None }
    };
    EcosystemAnalysis {
        min_group_size: opts.min_group_size,
        ranked: grouped.kept,
        excluded: grouped.excluded,
        without_ecosystem: messages.iter().filter(|m| m.ecosystems.is_empty()).count(),
        test,
        published: by_mean(opts.baseline.table(ECOSYSTEM_TABLE).cloned().collect()),
    }
}

fn ccs(messages: &[ClassifiedMessage], opts: &AnalysisOptions) -> CcsAnalysis {
    let compliant = column("CCS".into(), messages.iter().filter(|m| m.ccs_compliant));
    let non_compliant = column("non-CCS".into(), messages.iter().filter(|m| !m.ccs_compliant));
    let test = mwu("CCS vs non-CCS".into(), compliant.summary.as_ref(), non_compliant.summary.as_ref());
    CcsAnalysis { compliant, non_compliant, test, published: opts.baseline.table(CCS_TABLE).cloned().collect() }
}

// ---- rendering ----

const NA: &str = "n/a";

fn pct_cell(s: Option<&GroupSummary>, level: Option<InformativenessLevel>) -> String {
    match (s, level) {
        (None, _) => NA.into(),
        (Some(s), Some(l)) => format!("{} ({:.2}%)", s.count(l), s.percentage(l)),
        (Some(s), None) => format!("{} (100.00%)", s.total),
    }
}

fn delta_cell(a: Option<&GroupSummary>, b: Option<&GroupSummary>, level: Option<InformativenessLevel>) -> String {
    match (a, b, level) {
        (Some(a), Some(b), Some(l)) => format!("{:+.2}", a.percentage(l) - b.percentage(l)),
        (Some(_), Some(_), None) => String::new(),
        _ => NA.into(),
    }
}

fn row_levels() -> Vec<Option<InformativenessLevel>> {
    InformativenessLevel::DESCENDING.into_iter().map(Some).chain([None]).collect()
}

fn row_name(level: Option<InformativenessLevel>) -> &'static str {
    level.map_or("Total", InformativenessLevel::name)
}

/// First column left-aligned, the rest right-aligned.
fn render_table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let cols = header.len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).chain([header[c].chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (c, cell) in cells.iter().enumerate() {
            let pad = widths[c] - cell.chars().count();
            if c == 0 {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            }
        }
        s.trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
}

/// Distribution table with optional delta columns (column minus reference).
fn distribution(out: &mut String, cols: &[(&str, Option<&GroupSummary>)], deltas: &[(String, usize, usize)]) {
    let mut header = vec!["Level".to_string()];
    header.extend(cols.iter().map(|(l, _)| l.to_string()));
    header.extend(deltas.iter().map(|(l, _, _)| l.clone()));
    let rows: Vec<Vec<String>> = row_levels()
        .into_iter()
        .map(|level| {
            let mut r = vec![row_name(level).to_string()];
            r.extend(cols.iter().map(|(_, s)| pct_cell(*s, level)));
            r.extend(deltas.iter().map(|(_, a, b)| delta_cell(cols[*a].1, cols[*b].1, level)));
            r
        })
        .collect();
    render_table(out, &header, &rows);
}

pub fn format_p(p: f64) -> String {
    if p == 0.0 {
        "0".into()
    } else if p < 1e-4 {
        format!("{p:.3e}")
    } else {
        format!("{p:.4}")
    }
}

fn test_line(out: &mut String, kind: &str, t: &TestOutcome) {
    match (&t.result, &t.skipped) {
        (Some(r), _) => {
            let stat = match r.test {
                crate::stats::TestKind::MannWhitneyU => format!("U = {:.1}", r.statistic),
                crate::stats::TestKind::KruskalWallisH => format!("H = {:.4}", r.statistic),
            };
            let n: Vec<String> = r.n_per_group.iter().map(|n| n.to_string()).collect();
            let verdict = if r.p_value < 0.05 { "significant" } else { "not significant" };
            let _ = writeln!(
                out,
                "{kind}, {}: {stat}, p = {} ({verdict} at 0.05), {}, n = {}",
                t.label,
                format_p(r.p_value),
                r.method.as_str(),
                n.join("/")
            );
        }
        (None, Some(reason)) => {
            let _ = writeln!(out, "{kind}, {}: {NA} ({reason})", t.label);
        }
        (None, None) => {
            let _ = writeln!(out, "{kind}, {}: {NA}", t.label);
        }
    }
}

fn header(out: &mut String, title: &str, a: &Analysis) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "dictionary {}; patterns {}; baseline {}; {} classified messages",
        joined(&a.dictionary_versions),
        joined(&a.pattern_versions),
        a.baseline_version,
        a.messages
    );
    out.push('\n');
}

fn joined(v: &[String]) -> String {
    if v.is_empty() {
        NA.into()
    } else {
        v.join(",")
    }
}

fn legend(out: &mut String) {
    let _ = writeln!(out, "Levels (first matching rule, best first) and tasks enabled:");
    for level in InformativenessLevel::DESCENDING {
        let line = format!(
            "  {:<10} score {}  {:<52} {}",
            level.name(),
            level.score(),
            level.rule(),
            legend_capabilities(level).letters()
        );
        let _ = writeln!(out, "{}", line.trim_end());
    }
    let _ = writeln!(out, "  D = detection, A = assessment, P = prioritization.");
    let _ = writeln!(
        out,
        "  Per-message D/A/P follow the categories present (D: VULNID, ACTION, FLAW, SECWORD; A: CWEID; P: SEVERITY)."
    );
    let _ = writeln!(out, "  Poor lists D, A and P, but a Poor message never enables all three at once.");
    out.push('\n');
}

pub fn render_rq1_rq2(a: &Analysis) -> String {
    let t = &a.timeline;
    let mut out = String::new();
    header(&mut out, "Informativeness by forge and time window", a);
    legend(&mut out);

    let _ = writeln!(out, "Cumulative windows (author_date before cutoff):");
    let mut cols: Vec<(&str, Option<&GroupSummary>)> = Vec::new();
    if let Some(b) = &t.baseline {
        cols.push((b.label.as_str(), Some(b)));
    }
    cols.extend(t.cumulative.iter().map(|c| (c.label.as_str(), c.summary.as_ref())));
    let deltas: Vec<(String, usize, usize)> =
        if t.baseline.is_some() { (1..cols.len()).map(|i| (format!("Δ{i}"), i, 0)).collect() } else { Vec::new() };
    distribution(&mut out, &cols, &deltas);
    for (name, i, _) in &deltas {
        let _ = writeln!(out, "{name} = {} minus {} (percentage points)", cols[*i].0, cols[0].0);
    }
    out.push('\n');
    for test in &t.tests {
        test_line(&mut out, "Mann-Whitney U", test);
    }
    out.push('\n');

    let _ = writeln!(out, "Disjoint windows:");
    let cols: Vec<(&str, Option<&GroupSummary>)> =
        t.partitions.iter().map(|c| (c.label.as_str(), c.summary.as_ref())).collect();
    distribution(&mut out, &cols, &[]);
    out
}

pub fn render_rq3(a: &Analysis) -> String {
    let e = &a.ecosystems;
    let mut out = String::new();
    header(&mut out, "Informativeness by ecosystem", a);
    let _ = writeln!(out, "Ecosystems with at least {} messages, ranked by mean score:", e.min_group_size);
    if e.ranked.is_empty() {
        let _ = writeln!(out, "{NA} (no ecosystem reaches the size floor)");
    } else {
        let cols: Vec<(&str, Option<&GroupSummary>)> = e.ranked.iter().map(|s| (s.label.as_str(), Some(s))).collect();
        distribution(&mut out, &cols, &[]);
        let means: Vec<String> = e.ranked.iter().map(|s| format!("{} {:.3}", s.label, s.mean_score)).collect();
        let _ = writeln!(out, "Mean score: {}", means.join(", "));
    }
    out.push('\n');
    test_line(&mut out, "Kruskal-Wallis H", &e.test);
    let excluded: Vec<String> = e.excluded.iter().map(|(l, n)| format!("{l} ({n})")).collect();
    let _ = writeln!(
        out,
        "Excluded below {}: {}",
        e.min_group_size,
        if excluded.is_empty() { "none".into() } else { excluded.join(", ") }
    );
    let _ = writeln!(out, "Messages without an ecosystem: {}", e.without_ecosystem);
    if !e.published.is_empty() {
        let ranks: Vec<String> = e.published.iter().map(|s| format!("{} {:.3}", s.label, s.mean_score)).collect();
        let _ = writeln!(out, "Published ranking for reference: {}", ranks.join(", "));
    }
    out
}

pub fn render_rq4(a: &Analysis) -> String {
    let c = &a.ccs;
    let mut out = String::new();
    header(&mut out, "Informativeness of Conventional Commits compliant messages", a);
    let mut cols: Vec<(&str, Option<&GroupSummary>)> = vec![
        (c.compliant.label.as_str(), c.compliant.summary.as_ref()),
        (c.non_compliant.label.as_str(), c.non_compliant.summary.as_ref()),
    ];
    let mut deltas = vec![("Δ CCS - non-CCS".to_string(), 0, 1)];
    for (i, p) in c.published.iter().enumerate() {
        cols.push((p.label.as_str(), Some(p)));
        if i < 2 {
            deltas.push((format!("Δ {} - {}", cols[i].0, p.label), i, cols.len() - 1));
        }
    }
    distribution(&mut out, &cols, &deltas);
    let total = a.messages.max(1) as f64;
    let n_ccs = c.compliant.summary.as_ref().map_or(0, |s| s.total);
    let _ = writeln!(
        out,
        "Compliant: {} ({:.2}%), non-compliant: {} ({:.2}%)",
        n_ccs,
        100.0 * n_ccs as f64 / total,
        a.messages - n_ccs,
        100.0 * (a.messages - n_ccs) as f64 / total
    );
    out.push('\n');
    test_line(&mut out, "Mann-Whitney U", &c.test);
    out
}

// ---- CSV ----

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct Csv(String);

impl Csv {
    fn new() -> Self {
        Csv("section,column,row,count,percentage,value\n".into())
    }

    fn row(&mut self, fields: [&str; 6]) {
        let line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
        self.0.push_str(&line.join(","));
        self.0.push('\n');
    }

    fn column(&mut self, section: &str, c: &Column) {
        match &c.summary {
            None => self.row([section, &c.label, "Total", "0", "", NA]),
            Some(s) => self.summary(section, s),
        }
    }

    fn summary(&mut self, section: &str, s: &GroupSummary) {
        for level in InformativenessLevel::DESCENDING {
            self.row([
                section,
                &s.label,
                level.name(),
                &s.count(level).to_string(),
                &format!("{:.4}", s.percentage(level)),
                "",
            ]);
        }
        self.row([section, &s.label, "Total", &s.total.to_string(), "100.0000", ""]);
        self.row([section, &s.label, "Mean score", "", "", &format!("{:.6}", s.mean_score)]);
    }

    fn test(&mut self, t: &TestOutcome) {
        match &t.result {
            Some(r) => {
                let n: Vec<String> = r.n_per_group.iter().map(|n| n.to_string()).collect();
                self.row(["test", &t.label, "statistic", "", "", &format!("{:.6}", r.statistic)]);
                self.row(["test", &t.label, "p", "", "", &format!("{:.6e}", r.p_value)]);
                self.row(["test", &t.label, "method", "", "", r.method.as_str()]);
                self.row(["test", &t.label, "n", "", "", &n.join("/")]);
            }
            None => self.row(["test", &t.label, "skipped", "", "", t.skipped.as_deref().unwrap_or(NA)]),
        }
    }
}

pub fn csv_rq1_rq2(a: &Analysis) -> String {
    let mut csv = Csv::new();
    if let Some(b) = &a.timeline.baseline {
        csv.summary("baseline", b);
    }
    for c in &a.timeline.cumulative {
        csv.column("cumulative", c);
    }
    for t in &a.timeline.tests {
        csv.test(t);
    }
    for c in &a.timeline.partitions {
        csv.column("disjoint", c);
    }
    csv.0
}

pub fn csv_rq3(a: &Analysis) -> String {
    let mut csv = Csv::new();
    for s in &a.ecosystems.ranked {
        csv.summary("ecosystem", s);
    }
    for (label, n) in &a.ecosystems.excluded {
        csv.row(["excluded", label, "Total", &n.to_string(), "", ""]);
    }
    csv.test(&a.ecosystems.test);
    for s in &a.ecosystems.published {
        csv.summary("published", s);
    }
    csv.0
}

pub fn csv_rq4(a: &Analysis) -> String {
    let mut csv = Csv::new();
    csv.column("ccs", &a.ccs.compliant);
    csv.column("ccs", &a.ccs.non_compliant);
    csv.test(&a.ccs.test);
    for s in &a.ccs.published {
        csv.summary("published", s);
    }
    csv.0
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;

    use super::*;
    use crate::level::InformativenessLevel::*;

    fn msg(forge: Forge, year: i32, level: InformativenessLevel, ccs: bool, eco: &[&str]) -> ClassifiedMessage {
        ClassifiedMessage {
            hash: String::new(),
            origin: String::new(),
            forge,
            author_date: Utc.with_ymd_and_hms(year, 1, 1, 0, 0, 0).unwrap(),
            vuln_ids: vec![],
            ecosystems: eco.iter().map(|e| e.to_string()).collect(),
            present: Default::default(),
            entities: vec![],
            level,
            score: level.score(),
            detection: false,
            assessment: false,
            prioritization: false,
            ccs_compliant: ccs,
            ccs_type: None,
            ccs_reason: None,
            dictionary_version: "d".into(),
            pattern_version: "p".into(),
            message: String::new(),
        }
    }

    fn cutoffs() -> Vec<DateTime<Utc>> {
        vec![Utc.with_ymd_and_hms(2022, 8, 12, 0, 0, 0).unwrap(), Utc.with_ymd_and_hms(2025, 10, 7, 0, 0, 0).unwrap()]
    }

    #[test]
    fn github_only_has_na_other_columns() {
        let msgs = vec![msg(Forge::GitHub, 2020, Good, false, &[]), msg(Forge::GitHub, 2023, Poor, true, &[])];
        let b = Baseline::bundled();
        let c = cutoffs();
        let a = analyze(&msgs, &AnalysisOptions { cutoffs: &c, min_group_size: 1, baseline: &b });
        assert!(a.timeline.cumulative[2].summary.is_none() && a.timeline.cumulative[3].summary.is_none());
        assert_eq!(a.timeline.cumulative[0].summary.as_ref().unwrap().total, 1);
        assert_eq!(a.timeline.cumulative[1].summary.as_ref().unwrap().total, 2);
        let text = render_rq1_rq2(&a);
        assert!(text.contains("GitHub vs other platforms until 2022-08-12: n/a"));
        assert!(text.contains("  +88.56  +38.56  n/a  n/a"), "{text}");
    }

    #[test]
    fn partitions_cover_each_message_once() {
        let msgs: Vec<_> = [2000, 2022, 2023, 2025, 2026, 2030]
            .iter()
            .flat_map(|&y| [msg(Forge::GitHub, y, Medium, false, &[]), msg(Forge::Other, y, Poor, false, &[])])
            .collect();
        let b = Baseline::bundled();
        let c = cutoffs();
        let a = analyze(&msgs, &AnalysisOptions { cutoffs: &c, min_group_size: 1, baseline: &b });
        let covered: usize = a.timeline.partitions.iter().filter_map(|c| c.summary.as_ref()).map(|s| s.total).sum();
        assert_eq!(covered, msgs.len());
        assert_eq!(a.timeline.partitions.len(), 6);
    }

    #[test]
    fn ecosystem_and_ccs_sections() {
        let mut msgs = Vec::new();
        for _ in 0..5 {
            msgs.push(msg(Forge::GitHub, 2020, Good, false, &["Linux"]));
            msgs.push(msg(Forge::GitHub, 2020, Poor, true, &["npm"]));
        }
        msgs.push(msg(Forge::GitHub, 2020, Poor, true, &["Go"]));
        let b = Baseline::bundled();
        let c = cutoffs();
        let a = analyze(&msgs, &AnalysisOptions { cutoffs: &c, min_group_size: 5, baseline: &b });
        let labels: Vec<_> = a.ecosystems.ranked.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["Linux", "npm"]);
        assert_eq!(a.ecosystems.excluded, [("Go".to_string(), 1)]);
        assert!(a.ecosystems.test.result.as_ref().unwrap().p_value < 0.05);
        assert_eq!(a.ccs.compliant.summary.as_ref().unwrap().total, 6);
        let text = render_rq4(&a);
        assert!(text.contains("Compliant: 6 (54.55%)"), "{text}");
        let csv = csv_rq4(&a);
        assert!(csv.starts_with("section,column,row,count,percentage,value\nccs,CCS,Excellent,0,0.0000,\n"));
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.47481), "0.4748");
        assert_eq!(format_p(3.56e-7), "3.560e-7");
        assert_eq!(format_p(0.0), "0");
    }
}
