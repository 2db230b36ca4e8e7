use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ast::{MethodId, MiniProgram};
use super::cfg::{edge_id, Cfg, EdgeId};
use crate::mutation::Mutant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Branch,
    Line,
    Method,
    #[serde(rename = "weakmut")]
    WeakMutant,
}

impl TargetKind {
    pub const ALL: [TargetKind; 4] = [TargetKind::Branch, TargetKind::Line, TargetKind::Method, TargetKind::WeakMutant];

    pub fn name(self) -> &'static str {
        match self {
            TargetKind::Branch => "branch",
            TargetKind::Line => "line",
            TargetKind::Method => "method",
            TargetKind::WeakMutant => "weakmut",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "branch" => Ok(TargetKind::Branch),
            "line" => Ok(TargetKind::Line),
            "method" => Ok(TargetKind::Method),
            "weakmut" | "weak-mutation" | "weakmutation" => Ok(TargetKind::WeakMutant),
            other => Err(format!("unknown criterion `{other}`")),
        }
    }
}

/// Parses `branch,line,...` into a sorted, deduplicated criteria list.
pub fn parse_criteria(s: &str) -> Result<Vec<TargetKind>, String> {
    let mut out: Vec<TargetKind> = s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err("no criteria given".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetLoc {
    Edge(EdgeId),
    /// Dense line slot, see [`Cfg::lines`].
    Line(usize),
    Method,
    /// Index into the subject's mutant list.
    Mutant(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageTarget {
    pub kind: TargetKind,
    pub id: String,
    /// Global method index.
    pub method: usize,
    /// Local block index within the method.
    pub block: usize,
    pub loc: TargetLoc,
}

/// Coverage targets of the CUT for the chosen criteria, in stable order:
/// by method name, block index, then label.
pub fn enumerate_targets(
    program: &MiniProgram,
    cfg: &Cfg,
    mutants: &[Mutant],
    criteria: &[TargetKind],
) -> Vec<CoverageTarget> {
    let wants = |k| criteria.contains(&k);
    let cut = program.cut;
    let mut keyed: Vec<((String, usize, u8, u64), CoverageTarget)> = Vec::new();

    for index in 0..program.classes[cut].methods.len() {
        let mid = MethodId { class: cut, index };
        let gm = cfg.method_index(mid);
        let qname = program.qualified_name(mid);
        if wants(TargetKind::Method) {
            keyed.push((
                (qname.clone(), 0, 0, 0),
                CoverageTarget {
                    kind: TargetKind::Method,
                    id: format!("method:{qname}"),
                    method: gm,
                    block: 0,
                    loc: TargetLoc::Method,
                },
            ));
        }
        if wants(TargetKind::Branch) {
            for (b, info) in cfg.branches.iter().enumerate().filter(|(_, i)| i.method == gm) {
                for (outcome, label) in [(true, "T"), (false, "F")] {
                    keyed.push((
                        (qname.clone(), info.block, 1, u64::from(!outcome)),
                        CoverageTarget {
                            kind: TargetKind::Branch,
                            id: format!("branch:{qname}:b{}:{label}", info.block),
                            method: gm,
                            block: info.block,
                            loc: TargetLoc::Edge(edge_id(b, outcome)),
                        },
                    ));
                }
            }
        }
        if wants(TargetKind::Line) {
            for (slot, info) in cfg.lines.iter().enumerate().filter(|(_, i)| i.method == gm) {
                keyed.push((
                    (qname.clone(), info.block, 2, u64::from(info.line)),
                    CoverageTarget {
                        kind: TargetKind::Line,
                        id: format!("line:{qname}:{}", info.line),
                        method: gm,
                        block: info.block,
                        loc: TargetLoc::Line(slot),
                    },
                ));
            }
        }
    }
    if wants(TargetKind::WeakMutant) {
        for (mi, m) in mutants.iter().enumerate() {
            let Some((gm, block)) = cfg.expr_site.get(m.site as usize).copied().flatten() else { continue };
            let mid = cfg.methods[gm].method;
            if mid.class != cut {
                continue;
            }
            let qname = program.qualified_name(mid);
            keyed.push((
                (qname, block, 3, mi as u64),
                CoverageTarget {
                    kind: TargetKind::WeakMutant,
                    id: format!("weakmut:{}", m.id),
                    method: gm,
                    block,
                    loc: TargetLoc::Mutant(mi),
                },
            ));
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, t)| t).collect()
}

/// Line-oriented manifest, one `kind<TAB>id` per target.
pub fn target_manifest(targets: &[CoverageTarget]) -> String {
    targets.iter().map(|t| format!("{}\t{}\n", t.kind, t.id)).collect()
}
