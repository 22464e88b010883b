//! Text and JSON formats for graphs, labels, and reports.
//!
//! Edge lists are plain ASCII: a header line `n m`, then one `i j` pair per
//! line, 0-based with `i < j`. Degree files carry one degree per line.
//! Labels are CSV `node,label` with 1-based labels. Structured reports are
//! JSON; infinite criterion values are encoded as the string `"inf"`.

use std::io::{BufRead, Write};

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::estimate::EstimateResult;
use crate::lg::LgResult;
use crate::mixed::{SplitResult, SplitVerdict};
use crate::model::{Graph, LabelVector};
use crate::select::SelectionReport;

/// Formats a float for CSV: `inf` for infinities, shortest round-trip form
/// otherwise.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", g.n(), g.edge_count())?;
    for &(i, j) in g.edges() {
        writeln!(w, "{i} {j}")?;
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing header line".into(),
        })??;
    let mut it = header.split_whitespace();
    let parse = |tok: Option<&str>, line: usize| -> Result<u64> {
        tok.ok_or_else(|| Error::Parse {
            line,
            msg: "expected two fields".into(),
        })?
        .parse()
        .map_err(|e| Error::Parse {
            line,
            msg: format!("{e}"),
        })
    };
    let n = parse(it.next(), 1)? as usize;
    let m = parse(it.next(), 1)? as usize;
    if it.next().is_some() {
        return Err(Error::Parse {
            line: 1,
            msg: "expected exactly two fields".into(),
        });
    }
    let mut edges = Vec::with_capacity(m);
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let i = parse(it.next(), line_no)?;
        let j = parse(it.next(), line_no)?;
        if it.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "expected exactly two fields".into(),
            });
        }
        if i >= u32::MAX as u64 || j >= u32::MAX as u64 {
            return Err(Error::Parse {
                line: line_no,
                msg: "endpoint too large".into(),
            });
        }
        edges.push((i as u32, j as u32));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: edges.len() + 2,
            msg: format!("header announced {m} edges, found {}", edges.len()),
        });
    }
    Graph::new(n, edges)
}

/// One degree per line; the node count is the line count.
pub fn read_degree_file<R: BufRead>(r: R) -> Result<Vec<u32>> {
    let mut degrees = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let d: u32 = t.parse().map_err(|e| Error::Parse {
            line: k + 1,
            msg: format!("{e}"),
        })?;
        degrees.push(d);
    }
    Ok(degrees)
}

/// CSV `node,label`, labels 1-based.
pub fn write_labels_csv<W: Write>(labels: &LabelVector, mut w: W) -> Result<()> {
    writeln!(w, "node,label")?;
    for (i, &l) in labels.as_slice().iter().enumerate() {
        writeln!(w, "{},{}", i, l + 1)?;
    }
    Ok(())
}

pub fn read_labels_csv<R: BufRead>(r: R, q: usize) -> Result<LabelVector> {
    let mut labels = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if k == 0 {
            if line.trim() != "node,label" {
                return Err(Error::Parse {
                    line: 1,
                    msg: "expected header 'node,label'".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let node: usize = it
            .next()
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|e| Error::Parse {
                line: k + 1,
                msg: format!("{e}"),
            })?;
        let label: usize = it
            .next()
            .ok_or_else(|| Error::Parse {
                line: k + 1,
                msg: "missing label field".into(),
            })?
            .trim()
            .parse()
            .map_err(|e| Error::Parse {
                line: k + 1,
                msg: format!("{e}"),
            })?;
        if node != labels.len() {
            return Err(Error::Parse {
                line: k + 1,
                msg: format!("expected node {} in order, got {node}", labels.len()),
            });
        }
        if label == 0 {
            return Err(Error::Parse {
                line: k + 1,
                msg: "labels are 1-based".into(),
            });
        }
        labels.push((label - 1) as u32);
    }
    LabelVector::new(labels, q)
}

/// Serializes `f64` with infinities as the string `"inf"`.
struct InfOr(f64);

impl Serialize for InfOr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str(if self.0 > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(self.0)
        }
    }
}

struct InfOrSeq<'a>(&'a [f64]);

impl Serialize for InfOrSeq<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for &v in self.0 {
            seq.serialize_element(&InfOr(v))?;
        }
        seq.end()
    }
}

/// Classification summary: cut positions, the selected gaps, class means and
/// mean gaps. 1-based class numbering to match the labels CSV.
pub fn lg_summary_json(r: &LgResult) -> String {
    #[derive(Serialize)]
    struct Summary<'a> {
        q: usize,
        boundaries: &'a [usize],
        top_gaps: &'a [f64],
        class_means: &'a [f64],
        mean_gaps: &'a [f64],
        degenerate: bool,
    }
    serde_json::to_string_pretty(&Summary {
        q: r.q,
        boundaries: &r.boundaries,
        top_gaps: &r.gaps_desc[..r.q - 1],
        class_means: &r.class_means,
        mean_gaps: &r.mean_gaps_desc,
        degenerate: r.degenerate,
    })
    .expect("summary serialize")
}

/// Estimates as JSON; entries without data are `null`.
pub fn estimate_json(e: &EstimateResult) -> String {
    #[derive(Serialize)]
    struct Out {
        alpha: Vec<f64>,
        pi: Vec<Vec<Option<f64>>>,
        pair_counts: Vec<Vec<u64>>,
        edge_counts: Vec<Vec<u64>>,
    }
    let q = e.q;
    let out = Out {
        alpha: e.alpha_hat.clone(),
        pi: (0..q)
            .map(|a| (0..q).map(|b| e.pi_hat_at(a, b)).collect())
            .collect(),
        pair_counts: (0..q)
            .map(|a| (0..q).map(|b| e.pair_counts[a * q + b]).collect())
            .collect(),
        edge_counts: (0..q)
            .map(|a| (0..q).map(|b| e.edge_counts[a * q + b]).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("estimate serialize")
}

pub fn selection_json(r: &SelectionReport) -> String {
    #[derive(Serialize)]
    struct Cand {
        q: usize,
        sum_hg: f64,
        penalty: InfOr,
        f: InfOr,
    }
    #[derive(Serialize)]
    struct Out {
        beta: f64,
        q_hat: usize,
        candidates: Vec<Cand>,
    }
    let out = Out {
        beta: r.beta,
        q_hat: r.q_hat,
        candidates: r
            .candidates
            .iter()
            .map(|c| Cand {
                q: c.q,
                sum_hg: c.sum_hg,
                penalty: InfOr(c.penalty),
                f: InfOr(c.f),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("selection serialize")
}

/// Selection table as CSV `Q,sum_HG,penalty,f` with `inf` for infinities.
pub fn selection_csv<W: Write>(r: &SelectionReport, mut w: W) -> Result<()> {
    writeln!(w, "Q,sum_HG,penalty,f")?;
    for c in &r.candidates {
        writeln!(
            w,
            "{},{},{},{}",
            c.q,
            fmt_f64(c.sum_hg),
            fmt_f64(c.penalty),
            fmt_f64(c.f)
        )?;
    }
    Ok(())
}

pub fn split_json(r: &SplitResult) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        verdict: &'static str,
        involved: &'a [u32],
        components: &'a [Vec<u32>],
        densities: InfOrSeq<'a>,
        subgroups: Option<(&'a [u32], &'a [u32])>,
        selected_pair_count: usize,
    }
    let verdict = match r.verdict {
        SplitVerdict::OneClique => "one_clique",
        SplitVerdict::TwoCliques => "two_cliques",
        SplitVerdict::Ambiguous => "ambiguous",
    };
    serde_json::to_string_pretty(&Out {
        verdict,
        involved: &r.involved,
        components: &r.components,
        densities: InfOrSeq(&r.densities),
        subgroups: r
            .subgroups
            .as_ref()
            .map(|(a, b)| (a.as_slice(), b.as_slice())),
        selected_pair_count: r.selected_pairs.len(),
    })
    .expect("split serialize")
}

/// Subgroup membership as CSV `node,subgroup` (1 or 2), only for members.
pub fn split_subgroups_csv<W: Write>(r: &SplitResult, mut w: W) -> Result<()> {
    writeln!(w, "node,subgroup")?;
    if let Some((a, b)) = &r.subgroups {
        let mut rows: Vec<(u32, u8)> = a.iter().map(|&x| (x, 1u8)).collect();
        rows.extend(b.iter().map(|&x| (x, 2u8)));
        rows.sort_unstable();
        for (x, s) in rows {
            writeln!(w, "{x},{s}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrees::DegreeProfile;
    use crate::lg::lg_partition;
    use crate::select::select_q;

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::new(5, vec![(0, 1), (2, 4), (1, 3)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("5 3\n"));
        let g2 = read_edge_list(&buf[..]).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "3 2\n0 1\na b c\n";
        match read_edge_list(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn edge_count_mismatch_detected() {
        let text = "3 5\n0 1\n";
        assert!(matches!(
            read_edge_list(text.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn degree_file_round_trip() {
        let d = read_degree_file("1\n2\n1\n".as_bytes()).unwrap();
        assert_eq!(d, vec![1, 2, 1]);
        assert!(matches!(
            read_degree_file("1\nx\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn labels_csv_round_trip() {
        let z = LabelVector::new(vec![0, 2, 1], 3).unwrap();
        let mut buf = Vec::new();
        write_labels_csv(&z, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "node,label\n0,1\n1,3\n2,2\n"
        );
        let z2 = read_labels_csv(&buf[..], 3).unwrap();
        assert_eq!(z, z2);
    }

    #[test]
    fn selection_serializes_infinity_as_string() {
        let p = DegreeProfile::from_normalized(vec![0.2, 0.2, 0.8, 0.8]).unwrap();
        let r = select_q(&p, 4, 0.5).unwrap();
        let json = selection_json(&r);
        assert!(json.contains("\"inf\""), "{json}");
        let mut csv = Vec::new();
        selection_csv(&r, &mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert!(csv.lines().any(|l| l.ends_with(",inf")), "{csv}");
    }

    #[test]
    fn lg_summary_is_valid_json() {
        let p = DegreeProfile::from_normalized(vec![0.1, 0.12, 0.7, 0.72]).unwrap();
        let r = lg_partition(&p, 2).unwrap();
        let json = lg_summary_json(&r);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["q"], 2);
        assert_eq!(v["boundaries"][0], 1);
    }
}
