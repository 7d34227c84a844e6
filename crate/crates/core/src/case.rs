//! Steady-state network model and the tabular case file format.
//!
//! Cases are stored in the common MATLAB-style text layout: a `function
//! mpc = <name>` header, a `baseMVA` scalar, and `bus` / `gen` / `branch`
//! matrices wrapped in `[` ... `];`. `%` starts a comment anywhere on a
//! line. Unknown sections (`gencost`, `bus_name`, ...) are skipped; extra
//! trailing columns on known tables are preserved verbatim so a parsed
//! case serializes back to an equivalent file.
//!
//! Bus ids are arbitrary integers — files in the wild number buses by
//! substation and leave gaps — so lookups go through a dense index map
//! built when the case is constructed (see [`NetworkCase::bus_index`]).
//!
//! Parsing validates the structural invariants the rest of the toolkit
//! relies on: every branch endpoint resolves to a bus, in-service branches
//! have nonzero reactance, voltage bands are ordered, and each electrical
//! island carries exactly one slack bus.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

/// Error raised for malformed or structurally invalid case files.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{message}", .line.map(|n| format!("line {n}: ")).unwrap_or_default())]
pub struct CaseFormatError {
    /// 1-based line in the source text, when the problem is tied to one.
    pub line: Option<usize>,
    pub message: String,
}

impl CaseFormatError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        CaseFormatError { line: Some(line), message: message.into() }
    }

    fn whole_file(message: impl Into<String>) -> Self {
        CaseFormatError { line: None, message: message.into() }
    }
}

/// Role of a bus in the power-flow formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusKind {
    /// Load bus: P and Q injections fixed.
    Pq,
    /// Generator bus: P injection and voltage magnitude fixed.
    Pv,
    /// Reference bus: voltage magnitude and angle fixed.
    Slack,
}

impl BusKind {
    pub fn code(self) -> u8 {
        match self {
            BusKind::Pq => 1,
            BusKind::Pv => 2,
            BusKind::Slack => 3,
        }
    }

    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            1 => Some(BusKind::Pq),
            2 => Some(BusKind::Pv),
            3 => Some(BusKind::Slack),
            _ => None,
        }
    }
}

/// One row of the bus table.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: i64,
    pub kind: BusKind,
    /// Real / reactive demand, MW and MVAr.
    pub pd: f64,
    pub qd: f64,
    /// Shunt conductance / susceptance, MW and MVAr injected at V = 1 p.u.
    pub gs: f64,
    pub bs: f64,
    pub area: f64,
    /// Voltage magnitude (p.u.) and angle (degrees); doubles as the
    /// power-flow start point for solved cases.
    pub vm: f64,
    pub va: f64,
    pub base_kv: f64,
    pub zone: f64,
    /// Operating voltage band, p.u. Zero in the file means "unspecified"
    /// and defaults to 1.05 / 0.95.
    pub v_max: f64,
    pub v_min: f64,
    /// Columns past the standard thirteen, kept for round-tripping.
    pub extra: Vec<f64>,
}

/// One row of the generator table.
#[derive(Debug, Clone, PartialEq)]
pub struct Gen {
    /// Id of the bus this unit connects to.
    pub bus: i64,
    /// Scheduled real / reactive output, MW and MVAr.
    pub pg: f64,
    pub qg: f64,
    /// Reactive capability, MVAr.
    pub q_max: f64,
    pub q_min: f64,
    /// Voltage setpoint, p.u.
    pub vg: f64,
    pub m_base: f64,
    pub status: bool,
    /// Real-power capability, MW.
    pub p_max: f64,
    pub p_min: f64,
    pub extra: Vec<f64>,
}

/// One row of the branch table (line or transformer).
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: i64,
    pub to: i64,
    /// Series impedance and total charging susceptance, p.u.
    pub r: f64,
    pub x: f64,
    pub b: f64,
    /// Long-term MVA rating; 0 means unlimited.
    pub rate_a: f64,
    pub rate_b: f64,
    pub rate_c: f64,
    /// Off-nominal turns ratio; 0 in the file means 1.0.
    pub tap: f64,
    /// Phase-shift angle, degrees.
    pub shift: f64,
    pub status: bool,
    pub ang_min: f64,
    pub ang_max: f64,
    pub extra: Vec<f64>,
}

impl Branch {
    /// Effective turns ratio (the file's 0 placeholder reads as 1.0).
    pub fn tap_ratio(&self) -> f64 {
        if self.tap == 0.0 {
            1.0
        } else {
            self.tap
        }
    }
}

/// A parsed, validated network case.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCase {
    pub name: String,
    /// System MVA base for the per-unit scaling of impedances.
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub gens: Vec<Gen>,
    pub branches: Vec<Branch>,
}

impl NetworkCase {
    /// Builds a case from parts, checking the structural invariants.
    pub fn new(
        name: impl Into<String>,
        base_mva: f64,
        buses: Vec<Bus>,
        gens: Vec<Gen>,
        branches: Vec<Branch>,
    ) -> Result<Self, CaseFormatError> {
        let case = NetworkCase { name: name.into(), base_mva, buses, gens, branches };
        case.validate(None, None)?;
        Ok(case)
    }

    /// Dense bus-id -> position map (ids are arbitrary and non-contiguous).
    pub fn bus_index(&self) -> HashMap<i64, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    /// Positions of the in-service branches.
    pub fn live_branches(&self) -> Vec<usize> {
        self.branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.status)
            .map(|(i, _)| i)
            .collect()
    }

    /// Connected components of the in-service network, as sets of bus
    /// positions. Ordered by smallest contained bus position.
    pub fn islands(&self) -> Vec<Vec<usize>> {
        let index = self.bus_index();
        let n = self.buses.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for br in self.branches.iter().filter(|b| b.status) {
            let (f, t) = (index[&br.from], index[&br.to]);
            adj[f].push(t);
            adj[t].push(f);
        }
        let mut seen = vec![false; n];
        let mut islands = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            islands.push(comp);
        }
        islands
    }

    /// Structural validation shared by the parser and by programmatic
    /// construction. Line maps let the parser attribute failures to the
    /// source row that introduced them.
    fn validate(
        &self,
        branch_lines: Option<&[usize]>,
        gen_lines: Option<&[usize]>,
    ) -> Result<(), CaseFormatError> {
        if !(self.base_mva > 0.0) {
            return Err(CaseFormatError::whole_file(format!(
                "baseMVA must be positive, got {}",
                self.base_mva
            )));
        }
        let mut index: HashMap<i64, usize> = HashMap::new();
        for (i, bus) in self.buses.iter().enumerate() {
            if index.insert(bus.id, i).is_some() {
                return Err(CaseFormatError::whole_file(format!("duplicate bus id {}", bus.id)));
            }
            if !(bus.v_min < bus.v_max) {
                return Err(CaseFormatError::whole_file(format!(
                    "bus {}: voltage band [{}, {}] is not ordered",
                    bus.id, bus.v_min, bus.v_max
                )));
            }
        }
        for (g, gen) in self.gens.iter().enumerate() {
            if !index.contains_key(&gen.bus) {
                let line = gen_lines.and_then(|l| l.get(g).copied());
                return Err(CaseFormatError {
                    line,
                    message: format!("generator {} references unknown bus {}", g, gen.bus),
                });
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            let line = branch_lines.and_then(|l| l.get(k).copied());
            for end in [br.from, br.to] {
                if !index.contains_key(&end) {
                    return Err(CaseFormatError {
                        line,
                        message: format!("branch {} references unknown bus {}", k, end),
                    });
                }
            }
            if br.status && br.x == 0.0 {
                return Err(CaseFormatError {
                    line,
                    message: format!(
                        "in-service branch {} ({}-{}) has zero reactance",
                        k, br.from, br.to
                    ),
                });
            }
            if br.tap < 0.0 {
                return Err(CaseFormatError {
                    line,
                    message: format!("branch {} has negative tap ratio {}", k, br.tap),
                });
            }
        }
        // One slack per electrical island.
        for island in self.islands() {
            let slacks: Vec<i64> = island
                .iter()
                .map(|&i| &self.buses[i])
                .filter(|b| b.kind == BusKind::Slack)
                .map(|b| b.id)
                .collect();
            if slacks.len() != 1 {
                let member = self.buses[island[0]].id;
                return Err(CaseFormatError::whole_file(format!(
                    "island containing bus {} has {} slack buses (want exactly 1)",
                    member,
                    slacks.len()
                )));
            }
        }
        Ok(())
    }
}

const DEFAULT_V_MAX: f64 = 1.05;
const DEFAULT_V_MIN: f64 = 0.95;

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Bus,
    Gen,
    Branch,
    Skip,
}

/// Parses a case file. See the module docs for the accepted layout.
pub fn parse_case(text: &str) -> Result<NetworkCase, CaseFormatError> {
    let mut name = String::from("case");
    let mut base_mva: Option<f64> = None;
    let mut bus_rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut gen_rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut branch_rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut section: Option<Section> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        // Strip comments; '%' is not meaningful inside these files' data.
        let line = raw.split('%').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }

        if let Some(active) = section {
            let (data, closes) = match line.find("];").or_else(|| line.find("};")) {
                Some(pos) => (&line[..pos], true),
                None => (line, false),
            };
            let data = data.trim();
            if !data.is_empty() && active != Section::Skip {
                let row = parse_row(data, lineno)?;
                match active {
                    Section::Bus => bus_rows.push((lineno, row)),
                    Section::Gen => gen_rows.push((lineno, row)),
                    Section::Branch => branch_rows.push((lineno, row)),
                    Section::Skip => unreachable!(),
                }
            }
            if closes {
                section = None;
            }
            continue;
        }

        if line.starts_with("function") {
            if let Some(n) = line.rsplit(|c: char| c.is_whitespace() || c == '=').find(|s| !s.is_empty())
            {
                name = n.trim_end_matches(';').to_string();
            }
            continue;
        }

        if let Some(eq) = line.find('=') {
            let ident = line[..eq].trim().trim_start_matches("mpc.").trim();
            let rhs = line[eq + 1..].trim();
            match ident {
                "baseMVA" => {
                    let v = rhs.trim_end_matches(';').trim();
                    let parsed = v.parse::<f64>().map_err(|_| {
                        CaseFormatError::at(lineno, format!("bad baseMVA value {v:?}"))
                    })?;
                    base_mva = Some(parsed);
                }
                "version" => {}
                _ => {
                    if rhs.starts_with('[') || rhs.starts_with('{') {
                        let body = rhs[1..].trim();
                        let sec = match ident {
                            "bus" => Section::Bus,
                            "gen" => Section::Gen,
                            "branch" => Section::Branch,
                            _ => Section::Skip,
                        };
                        // Tables may open and close on one line.
                        if let Some(pos) = body.find("];").or_else(|| body.find("};")) {
                            let data = body[..pos].trim();
                            if !data.is_empty() && sec != Section::Skip {
                                let row = parse_row(data, lineno)?;
                                match sec {
                                    Section::Bus => bus_rows.push((lineno, row)),
                                    Section::Gen => gen_rows.push((lineno, row)),
                                    Section::Branch => branch_rows.push((lineno, row)),
                                    Section::Skip => unreachable!(),
                                }
                            }
                        } else {
                            if !body.is_empty() && sec != Section::Skip {
                                let row = parse_row(body, lineno)?;
                                match sec {
                                    Section::Bus => bus_rows.push((lineno, row)),
                                    Section::Gen => gen_rows.push((lineno, row)),
                                    Section::Branch => branch_rows.push((lineno, row)),
                                    Section::Skip => unreachable!(),
                                }
                            }
                            section = Some(sec);
                        }
                    }
                    // Scalar assignments to unknown fields are ignored.
                }
            }
            continue;
        }
        // Anything else outside a section is noise (e.g. stray "end").
    }

    let base_mva =
        base_mva.ok_or_else(|| CaseFormatError::whole_file("missing baseMVA section"))?;
    if bus_rows.is_empty() {
        return Err(CaseFormatError::whole_file("missing or empty bus section"));
    }

    let mut buses = Vec::with_capacity(bus_rows.len());
    for (lineno, row) in &bus_rows {
        buses.push(bus_from_row(row, *lineno)?);
    }
    let mut gens = Vec::with_capacity(gen_rows.len());
    let mut gen_lines = Vec::with_capacity(gen_rows.len());
    for (lineno, row) in &gen_rows {
        gens.push(gen_from_row(row, *lineno)?);
        gen_lines.push(*lineno);
    }
    let mut branches = Vec::with_capacity(branch_rows.len());
    let mut branch_lines = Vec::with_capacity(branch_rows.len());
    for (lineno, row) in &branch_rows {
        branches.push(branch_from_row(row, *lineno)?);
        branch_lines.push(*lineno);
    }

    let case = NetworkCase { name, base_mva, buses, gens, branches };
    case.validate(Some(&branch_lines), Some(&gen_lines))?;
    Ok(case)
}

fn parse_row(data: &str, lineno: usize) -> Result<Vec<f64>, CaseFormatError> {
    data.split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CaseFormatError::at(lineno, format!("bad number {t:?}")))
        })
        .collect()
}

fn need(row: &[f64], want: usize, table: &str, lineno: usize) -> Result<(), CaseFormatError> {
    if row.len() < want {
        return Err(CaseFormatError::at(
            lineno,
            format!("{table} row has {} columns, expected at least {want}", row.len()),
        ));
    }
    Ok(())
}

fn as_int(v: f64, what: &str, lineno: usize) -> Result<i64, CaseFormatError> {
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(CaseFormatError::at(lineno, format!("{what} must be an integer, got {v}")));
    }
    Ok(v as i64)
}

fn bus_from_row(row: &[f64], lineno: usize) -> Result<Bus, CaseFormatError> {
    need(row, 13, "bus", lineno)?;
    let id = as_int(row[0], "bus id", lineno)?;
    let kind_code = as_int(row[1], "bus type", lineno)?;
    let kind = BusKind::from_code(kind_code).ok_or_else(|| {
        CaseFormatError::at(lineno, format!("bus {id}: unsupported bus type {kind_code}"))
    })?;
    let (mut v_max, mut v_min) = (row[11], row[12]);
    if v_max == 0.0 {
        v_max = DEFAULT_V_MAX;
    }
    if v_min == 0.0 {
        v_min = DEFAULT_V_MIN;
    }
    Ok(Bus {
        id,
        kind,
        pd: row[2],
        qd: row[3],
        gs: row[4],
        bs: row[5],
        area: row[6],
        vm: row[7],
        va: row[8],
        base_kv: row[9],
        zone: row[10],
        v_max,
        v_min,
        extra: row[13..].to_vec(),
    })
}

fn gen_from_row(row: &[f64], lineno: usize) -> Result<Gen, CaseFormatError> {
    need(row, 10, "gen", lineno)?;
    Ok(Gen {
        bus: as_int(row[0], "gen bus", lineno)?,
        pg: row[1],
        qg: row[2],
        q_max: row[3],
        q_min: row[4],
        vg: row[5],
        m_base: row[6],
        status: row[7] != 0.0,
        p_max: row[8],
        p_min: row[9],
        extra: row[10..].to_vec(),
    })
}

fn branch_from_row(row: &[f64], lineno: usize) -> Result<Branch, CaseFormatError> {
    need(row, 11, "branch", lineno)?;
    Ok(Branch {
        from: as_int(row[0], "branch from-bus", lineno)?,
        to: as_int(row[1], "branch to-bus", lineno)?,
        r: row[2],
        x: row[3],
        b: row[4],
        rate_a: row[5],
        rate_b: row[6],
        rate_c: row[7],
        tap: row[8],
        shift: row[9],
        status: row[10] != 0.0,
        ang_min: row.get(11).copied().unwrap_or(-360.0),
        ang_max: row.get(12).copied().unwrap_or(360.0),
        extra: if row.len() > 13 { row[13..].to_vec() } else { Vec::new() },
    })
}

/// Serializes a case back to the text format. `parse_case` of the output
/// reproduces the input case exactly.
pub fn serialize_case(case: &NetworkCase) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "function mpc = {}", case.name);
    out.push_str("mpc.version = '2';\n");
    let _ = writeln!(out, "mpc.baseMVA = {};", case.base_mva);

    out.push_str("\n%% bus data\n");
    out.push_str("%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n");
    out.push_str("mpc.bus = [\n");
    for b in &case.buses {
        let _ = write!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            b.id,
            b.kind.code(),
            b.pd,
            b.qd,
            b.gs,
            b.bs,
            b.area,
            b.vm,
            b.va,
            b.base_kv,
            b.zone,
            b.v_max,
            b.v_min
        );
        for v in &b.extra {
            let _ = write!(out, "\t{v}");
        }
        out.push_str(";\n");
    }
    out.push_str("];\n");

    out.push_str("\n%% generator data\n");
    out.push_str("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n");
    out.push_str("mpc.gen = [\n");
    for g in &case.gens {
        let _ = write!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            g.bus,
            g.pg,
            g.qg,
            g.q_max,
            g.q_min,
            g.vg,
            g.m_base,
            g.status as u8,
            g.p_max,
            g.p_min
        );
        for v in &g.extra {
            let _ = write!(out, "\t{v}");
        }
        out.push_str(";\n");
    }
    out.push_str("];\n");

    out.push_str("\n%% branch data\n");
    out.push_str("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n");
    out.push_str("mpc.branch = [\n");
    for br in &case.branches {
        let _ = write!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            br.from,
            br.to,
            br.r,
            br.x,
            br.b,
            br.rate_a,
            br.rate_b,
            br.rate_c,
            br.tap,
            br.shift,
            br.status as u8,
            br.ang_min,
            br.ang_max
        );
        for v in &br.extra {
            let _ = write!(out, "\t{v}");
        }
        out.push_str(";\n");
    }
    out.push_str("];\n");
    out
}
