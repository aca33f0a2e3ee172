//! JSON and CSV formats read and written by the command line tool.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bohr::{ArcSet, GapCover, Generator};
use crate::builder::{Certificates, SequenceBuild, StageArtifacts};
use crate::error::{Error, Result};
use crate::harness::{MemberDecl, Rows, StageSummary, VerificationReport};
use crate::rational::Rational;
use crate::torus::{make_point, PointDescriptor, TorusPoint};

/// Rationals travel as strings such as `"3/1024"`.
pub mod rational_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{parse_rational, Rational};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    Ok(text)
}

/// A list of points, given bare or under a `generators` or `alphas` key.
#[derive(Deserialize)]
#[serde(untagged)]
enum PointList {
    Bare(Vec<PointDescriptor>),
    Generators { generators: Vec<PointDescriptor> },
    Alphas { alphas: Vec<PointDescriptor> },
}

impl PointList {
    fn into_inner(self) -> Vec<PointDescriptor> {
        match self {
            PointList::Bare(v) | PointList::Generators { generators: v } | PointList::Alphas { alphas: v } => v,
        }
    }
}

pub fn parse_points(text: &str) -> Result<(Vec<PointDescriptor>, Vec<TorusPoint>)> {
    let descs = serde_json::from_str::<PointList>(text)
        .map_err(|e| Error::invalid(format!("expected a list of point descriptors: {e}")))?
        .into_inner();
    if descs.is_empty() {
        return Err(Error::invalid("the point list is empty"));
    }
    let points = descs.iter().map(make_point).collect::<Result<Vec<_>>>()?;
    Ok((descs, points))
}

/// Reads `alphas` or `group` files.
pub fn read_points(path: &Path) -> Result<(Vec<PointDescriptor>, Vec<TorusPoint>)> {
    parse_points(&read_text(path)?)
}

/// `beta.json`: a point, or a combination of the group generators with an
/// optional point to check it against.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum BetaFile {
    Combination {
        combination: Vec<i64>,
        #[serde(default)]
        point: Option<PointDescriptor>,
    },
    Point(PointDescriptor),
}

impl BetaFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("unreadable beta: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    /// The point itself; a combination is evaluated on `generators`.
    pub fn point(&self, generators: &[TorusPoint]) -> Result<TorusPoint> {
        match self {
            BetaFile::Point(d) => make_point(d),
            BetaFile::Combination { .. } => Ok(self.member(generators)?.point),
        }
    }

    pub fn member(&self, generators: &[TorusPoint]) -> Result<MemberDecl> {
        match self {
            BetaFile::Point(_) => Err(Error::invalid("member mode needs a combination of the generators")),
            BetaFile::Combination { combination, point } => {
                let point = point.as_ref().map(make_point).transpose()?;
                MemberDecl::new(generators, combination.clone(), point)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub generators: Vec<Generator>,
    #[serde(with = "rational_text")]
    pub achieved_a: Rational,
    #[serde(with = "rational_text")]
    pub achieved_b: Rational,
    #[serde(rename = "R")]
    pub rank: usize,
    pub c1: u64,
    pub containment_verified: bool,
}

impl From<&GapCover> for CoverReport {
    fn from(c: &GapCover) -> Self {
        CoverReport {
            generators: c.generators.clone(),
            achieved_a: c.achieved_a.clone(),
            achieved_b: c.achieved_b.clone(),
            rank: c.rank(),
            c1: c.c1(),
            containment_verified: c.containment_verified,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcReport {
    #[serde(with = "rational_text")]
    pub lo: Rational,
    #[serde(with = "rational_text")]
    pub hi: Rational,
}

/// Arcs of a set; a wrapping arc has `lo > hi`.
pub fn arc_report(set: &ArcSet) -> Vec<ArcReport> {
    set.arcs()
        .into_iter()
        .map(|a| ArcReport { lo: a.start, hi: a.end })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub t: usize,
    #[serde(with = "rational_text")]
    pub eps_t: Rational,
    #[serde(rename = "N_t")]
    pub n_t: u64,
    #[serde(rename = "M_t")]
    pub m_t: u64,
    #[serde(with = "rational_text")]
    pub delta_t: Rational,
    pub c1: u64,
    pub c2: u64,
    #[serde(with = "rational_text")]
    pub term_t: Rational,
    #[serde(rename = "S_t_size")]
    pub s_size: usize,
    #[serde(rename = "H_size")]
    pub h_size: usize,
    pub anchor_m: u64,
    pub c1_estimate: u64,
    pub rebuilt: bool,
    pub lookahead: bool,
    pub cover: CoverReport,
    #[serde(with = "rational_text")]
    pub bound_ii: Rational,
    #[serde(with = "rational_text")]
    pub sum_ii: Rational,
    pub certificates: Certificates,
}

impl From<&StageArtifacts> for StageReport {
    fn from(s: &StageArtifacts) -> Self {
        StageReport {
            t: s.t(),
            eps_t: s.plan.eps.clone(),
            n_t: s.plan.n,
            m_t: s.plan.m,
            delta_t: s.plan.delta.clone(),
            c1: s.c1,
            c2: s.c2,
            term_t: s.term.clone(),
            s_size: s.members().len(),
            h_size: s.bohr.len(),
            anchor_m: s.thin.m,
            c1_estimate: s.c1_estimate,
            rebuilt: s.rebuilt,
            lookahead: s.lookahead,
            cover: CoverReport::from(&s.cover),
            bound_ii: s.thin.bound_ii.clone(),
            sum_ii: s.thin.sum_ii.clone(),
            certificates: s.certificates.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub generators: Vec<PointDescriptor>,
    pub requested_stages: usize,
    pub complete: bool,
    pub error: Option<String>,
    pub stages: Vec<StageReport>,
}

impl BuildReport {
    pub fn new(generators: Vec<PointDescriptor>, requested: usize, build: &SequenceBuild) -> Self {
        BuildReport {
            generators,
            requested_stages: requested,
            complete: build.error.is_none() && build.stages.len() == requested,
            error: build.error.as_ref().map(ToString::to_string),
            stages: build.stages.iter().map(StageReport::from).collect(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_text(path)?).map_err(|e| Error::invalid(format!("unreadable report: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }

    pub fn generator_points(&self) -> Result<Vec<TorusPoint>> {
        self.generators.iter().map(make_point).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct SeqRow {
    stage: usize,
    t_index: usize,
    n: u64,
}

/// `seq.csv`: one row per element of `A`, with its 0-based index in `S_t`.
pub fn write_seq(path: &Path, stages: &[StageArtifacts]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in stages {
        for (i, &n) in s.members().iter().enumerate() {
            w.serialize(SeqRow {
                stage: s.t(),
                t_index: i,
                n,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Members of each stage, by stage number.
pub fn read_seq(path: &Path) -> Result<BTreeMap<usize, Vec<u64>>> {
    let mut out: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for row in csv::Reader::from_path(path)?.deserialize() {
        let row: SeqRow = row?;
        out.entry(row.stage).or_default().push((row.t_index, row.n));
    }
    Ok(out
        .into_iter()
        .map(|(t, mut v)| {
            v.sort_unstable();
            (t, v.into_iter().map(|(_, n)| n).collect())
        })
        .collect())
}

/// Joins `seq.csv` with the per-stage terms of `report.json`.
pub fn stage_summaries(seq: &BTreeMap<usize, Vec<u64>>, report: &BuildReport) -> Result<Vec<StageSummary>> {
    report
        .stages
        .iter()
        .map(|s| {
            let members = seq.get(&s.t).cloned().unwrap_or_default();
            if members.len() != s.s_size {
                return Err(Error::invalid(format!(
                    "stage {} has {} rows in the sequence file but the report says {}",
                    s.t,
                    members.len(),
                    s.s_size
                )));
            }
            Ok(StageSummary {
                t: s.t,
                members,
                term: s.term_t.clone(),
            })
        })
        .collect()
}

/// `verify.csv` in the column layout of the report's mode.
pub fn write_verify(path: &Path, report: &VerificationReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    match &report.rows {
        Rows::Member { rows, .. } => {
            w.write_record(["stage", "n", "norm_hi", "partial_sum_hi"])?;
            for r in rows {
                w.write_record([
                    r.t.to_string(),
                    r.n.to_string(),
                    r.norm_hi.to_string(),
                    r.partial_sum_hi.to_string(),
                ])?;
            }
        }
        Rows::Nonmember { stages, .. } => {
            w.write_record(["stage", "witness_n", "witness_norm_lo"])?;
            for s in stages {
                w.write_record([
                    s.t.to_string(),
                    s.witness_n.map(|n| n.to_string()).unwrap_or_default(),
                    s.witness_norm_lo.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::stream_sequence;
    use crate::config::Config;
    use crate::rational::rat;

    #[test]
    fn point_lists() {
        let (_, a) = parse_points(r#"[{"kind":"rational","num":1,"den":3}]"#).unwrap();
        let (_, b) = parse_points(r#"{"alphas":[{"kind":"rational","num":1,"den":3}]}"#).unwrap();
        let (_, c) = parse_points(r#"{"generators":[{"kind":"rational","num":-2,"den":3}]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(parse_points("[]").is_err());
        assert!(parse_points(r#"{"x":1}"#).is_err());
    }

    #[test]
    fn beta_files() {
        let gens = vec![TorusPoint::rational(rat(1, 2)), TorusPoint::rational(rat(1, 3))];
        let b = BetaFile::parse(r#"{"combination":[-1,2],"point":{"kind":"rational","num":1,"den":6}}"#).unwrap();
        assert_eq!(b.point(&gens).unwrap(), TorusPoint::rational(rat(1, 6)));
        let p = BetaFile::parse(r#"{"kind":"sqrt","radicand":3}"#).unwrap();
        assert!(matches!(p, BetaFile::Point(_)));
        assert!(p.member(&gens).is_err());
        let bad = BetaFile::parse(r#"{"combination":[1],"point":{"kind":"rational","num":1,"den":6}}"#).unwrap();
        assert!(bad.member(&gens).is_err());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (descs, gens) = parse_points(r#"[{"kind":"rational","num":1,"den":2}]"#).unwrap();
        let build = stream_sequence(gens, 2, &Config::default()).unwrap();
        let report = BuildReport::new(descs, 2, &build);
        assert!(report.complete);
        let rp = dir.path().join("report.json");
        let sp = dir.path().join("seq.csv");
        report.write(&rp).unwrap();
        write_seq(&sp, &build.stages).unwrap();
        let back = BuildReport::read(&rp).unwrap();
        assert_eq!(back, report);
        let seq = read_seq(&sp).unwrap();
        let sums = stage_summaries(&seq, &back).unwrap();
        assert_eq!(sums, crate::harness::summaries(&build));
        let text = std::fs::read_to_string(&sp).unwrap();
        assert!(text.starts_with("stage,t_index,n\n1,0,"));
    }
}
