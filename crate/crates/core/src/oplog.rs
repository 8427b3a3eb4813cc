//! Per-execution log of modular operations.
//!
//! Every modular add, subtract, and multiply performed by the instrumented
//! arithmetic appends one event. The `reduced` flag records whether the
//! conditional modular reduction fired; for multiplications the reduction is
//! unconditional and the flag is always false.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
}

impl OpKind {
    /// Short operations are the adds and subtracts; multiplies (and squares)
    /// are the long ones.
    pub fn is_short(self) -> bool {
        !matches!(self, OpKind::Mul)
    }

    pub fn letter(self) -> char {
        match self {
            OpKind::Add => 'A',
            OpKind::Sub => 'S',
            OpKind::Mul => 'M',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'A' => Some(OpKind::Add),
            'S' => Some(OpKind::Sub),
            'M' => Some(OpKind::Mul),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    InitialDouble,
    LadderIter(u32),
    Final,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpEvent {
    /// 0-based position in the execution log; contiguous.
    pub index: u32,
    pub kind: OpKind,
    /// Whether the conditional reduction fired (carry on add, borrow on sub).
    pub reduced: bool,
    pub phase: Phase,
    /// Order-sensitive hash of the operand limbs, for collision inspection.
    pub operand_digest: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadderVariant {
    Baseline,
    AlwaysReduce,
    SharedSubtraction,
    ReRandomize,
}

impl LadderVariant {
    pub const ALL: [LadderVariant; 4] = [
        LadderVariant::Baseline,
        LadderVariant::AlwaysReduce,
        LadderVariant::SharedSubtraction,
        LadderVariant::ReRandomize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LadderVariant::Baseline => "baseline",
            LadderVariant::AlwaysReduce => "always-reduce",
            LadderVariant::SharedSubtraction => "shared-subtraction",
            LadderVariant::ReRandomize => "rerandomize",
        }
    }
}

impl fmt::Display for LadderVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LadderVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "baseline" => Ok(LadderVariant::Baseline),
            "always-reduce" | "alwaysreduce" => Ok(LadderVariant::AlwaysReduce),
            "shared-subtraction" | "sharedsubtraction" => Ok(LadderVariant::SharedSubtraction),
            "rerandomize" | "re-randomize" => Ok(LadderVariant::ReRandomize),
            other => Err(format!("unknown ladder variant: {other}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OpLog {
    pub curve: String,
    pub variant: LadderVariant,
    /// Bit length of the scalar the log belongs to (0 for free-standing logs).
    pub scalar_bits: u32,
    events: Vec<OpEvent>,
    phase: Phase,
}

impl OpLog {
    pub fn new(curve: impl Into<String>, variant: LadderVariant) -> Self {
        OpLog {
            curve: curve.into(),
            variant,
            scalar_bits: 0,
            events: Vec::new(),
            phase: Phase::InitialDouble,
        }
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub(crate) fn push(&mut self, kind: OpKind, reduced: bool, operand_digest: u64) {
        debug_assert!(!(kind == OpKind::Mul && reduced));
        self.events.push(OpEvent {
            index: self.events.len() as u32,
            kind,
            reduced,
            phase: self.phase,
            operand_digest,
        });
    }

    pub fn events(&self) -> &[OpEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn kinds(&self) -> Vec<OpKind> {
        self.events.iter().map(|e| e.kind).collect()
    }

    /// Kind sequence as a compact string, e.g. "SMMMAS...".
    pub fn kind_string(&self) -> String {
        self.events.iter().map(|e| e.kind.letter()).collect()
    }
}

/// A maximal run of adjacent short operations (adds and subtracts).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoRun {
    /// Log index of the first operation in the run.
    pub start: usize,
    /// Number of operations in the run.
    pub len: usize,
}

impl SoRun {
    pub fn contains(&self, op_index: usize) -> bool {
        op_index >= self.start && op_index < self.start + self.len
    }
}

/// Maximal runs of short operations in a kind sequence.
pub fn so_runs(kinds: &[OpKind]) -> Vec<SoRun> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < kinds.len() {
        if kinds[i].is_short() {
            let start = i;
            while i < kinds.len() && kinds[i].is_short() {
                i += 1;
            }
            runs.push(SoRun {
                start,
                len: i - start,
            });
        } else {
            i += 1;
        }
    }
    runs
}
