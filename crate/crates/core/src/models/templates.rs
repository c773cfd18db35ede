// SPDX-License-Identifier: Apache-2.0

//! Library of neuron and plasticity programs addressable by name.

use crate::fixed::QFormat;
use crate::isa::{nhsp, nhvm, uptis, Instruction, ParamReg, WorkReg};
use crate::neuron::{InputTarget, Program};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    Neuron,
    Learning,
}

/// Register a schema entry initializes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    /// Per-core parameter memory.
    Param(ParamReg),
    /// Per-neuron initial state.
    State(WorkReg),
    /// Per-synapse initial trace (LS index).
    Trace(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemaEntry {
    pub key: &'static str,
    pub slot: Slot,
    pub role: &'static str,
    pub default: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelTemplate {
    pub name: &'static str,
    pub kind: TemplateKind,
    pub source: &'static str,
    pub format: QFormat,
    pub input_target: InputTarget,
    /// Label of the entry point, if not the first instruction.
    pub entry: Option<&'static str>,
    pub schema: Vec<SchemaEntry>,
}

impl ModelTemplate {
    pub fn program(&self) -> Program {
        Program::from_text(self.source).expect("library templates assemble")
    }

    pub fn instruction_count(&self) -> usize {
        self.program().len()
    }

    pub fn entry_point(&self) -> usize {
        match self.entry {
            None => 0,
            Some(l) => crate::isa::assemble(self.source).unwrap().label(l).expect("entry label exists"),
        }
    }

    pub fn get(&self, key: &str) -> Option<&SchemaEntry> {
        self.schema.iter().find(|e| e.key == key)
    }
}

fn p(key: &'static str, reg: ParamReg, role: &'static str, default: f64) -> SchemaEntry {
    SchemaEntry { key, slot: Slot::Param(reg), role, default }
}

fn st(key: &'static str, reg: WorkReg, role: &'static str, default: f64) -> SchemaEntry {
    SchemaEntry { key, slot: Slot::State(reg), role, default }
}

fn tr(key: &'static str, ls: u8, role: &'static str, default: f64) -> SchemaEntry {
    SchemaEntry { key, slot: Slot::Trace(ls), role, default }
}

fn spike_state() -> Vec<SchemaEntry> {
    vec![
        st("v_th", WorkReg::s(5), "firing threshold", 1.0),
        st("v0", WorkReg::V0, "reset potential", 0.0),
        st("v", WorkReg::s(0), "initial membrane potential", 0.0),
        p("p8", ParamReg::ip(8), "input register decay per tick", 0.0),
    ]
}

fn neuron(name: &'static str, source: &'static str, mut schema: Vec<SchemaEntry>) -> ModelTemplate {
    schema.extend(spike_state());
    ModelTemplate {
        name,
        kind: TemplateKind::Neuron,
        source,
        format: QFormat::Q8_8,
        input_target: InputTarget::I,
        entry: None,
        schema,
    }
}

fn learning(name: &'static str, source: &'static str, schema: Vec<SchemaEntry>) -> ModelTemplate {
    ModelTemplate {
        name,
        kind: TemplateKind::Learning,
        source,
        format: QFormat::Q8_8,
        input_target: InputTarget::I,
        entry: None,
        schema,
    }
}

pub const LIF: &str = "UPTVM 0xD\nGSPRS 0xD\n";

pub const QIF: &str = "\
UPTTS k=0 l=3 m=0 n=1 ; TR0 = a*v + b
MOV P0, RT0
UPTVM 0xD
GSPRS 0xD
";

pub const EXPIF: &str = "\
UPTTS k=0 l=3 m=0 n=1 ; TR0 = (v - theta) / delta
EXP RT1, RT0
UPTTS k=1 l=4 m=7 n=2 ; TR1 = delta * exp(..) + e
MOV C0, RT1
UPTVM 0xD
GSPRS 0xD
";

/// State scaled by 1/10 with a 0.5 ms step:
/// V' = (0.2V + 3.5)V + 7 - 0.5U' + 0.5J, U' = (1 - a/2)U + (ab/2)V.
pub const IZHIKEVICH: &str = "\
UPTTS k=0 l=5 m=0 n=1 ; TR0 = 0.2*V + 3.5
MOV P0, RT0
UPTIS 0x070           ; U = p3*U + p4*V
UPTVM 0xF
GSPRS 0xF
";

pub const ADLIF: &str = "UPTIS 0x071\nUPTVM 0xF\nGSPRS 0xF\n";

pub const COBA_LIF: &str = "UPTIS 0x18E\nUPTVM 0xD\nGSPRS 0xD\n";

pub const CUBA: &str = "UPTVM 0xC\nGSPRS 0xD\n";

pub const STDP: &str = "\
UPTLS k=0 l=3 m=0 n=0 ; x0
UPTLS k=3 l=4 m=3 n=1 ; y0
UPTWT 0x108           ; + P0*x0*y2
UPTWT 0x260           ; + P1*x2*y0
";

pub const TRIPLET_STDP: &str = "\
UPTLS k=0 l=3 m=0 n=0 ; x0
UPTLS k=3 l=4 m=3 n=1 ; y0
UPTLS k=4 l=5 m=4 n=2 ; y1
UPTWT 0x10C           ; P0*x0*y2*r0
UPTWT 0x264           ; P1*x2*y0*r0
UPTWT 0x454           ; P2*x2*y1*r0
";

pub const RSTDP: &str = "\
UPTLS k=0 l=3 m=0 n=0 ; x0
UPTLS k=3 l=4 m=3 n=1 ; y0
UPTLS k=6 l=6 m=6 n=3 ; r0
UPTWT 0x10C
UPTWT 0x264
";

/// Calcium in LS4 (driven by post spikes); update on pre spikes when the
/// calcium sits in the learning window, direction set by v.
pub const SDSP: &str = "\
UPTLS k=4 l=4 m=4 n=1
CMP RT0, LS2
JMP Keep       ; no pre spike
CMP RT1, LS4
JMP Keep       ; calcium below window
CMP LS4, RT3
JMP Keep       ; calcium above window
CMP S0, RT2
JMP Up
SUB W, RT4
NOP
Up: ADD W, RT4
Keep: NOP
";

pub const STP: &str = "\
LayerH:
UPTTS k=0 l=2 m=6 n=2 ; TR0 = p2*w + c2
MOV LP0, RT0
UPTWT 0x048           ; w += LP0*x2*y2
NOP
LayerO:
UPTWT 0x241           ; w += LP1*x2*r2
";

fn plasticity_schema() -> Vec<SchemaEntry> {
    vec![
        p("P0", ParamReg::lp(0), "pre-post potentiation gain", 0.0625),
        p("P1", ParamReg::lp(1), "post-pre depression gain", -0.0625),
        p("P2", ParamReg::lp(2), "triplet depression gain", -0.03125),
        p("P3", ParamReg::lp(3), "x0 decay", 0.75),
        p("P4", ParamReg::lp(4), "y0 decay", 0.75),
        p("P5", ParamReg::lp(5), "y1 decay", 0.875),
        p("P6", ParamReg::lp(6), "r0 decay", 0.875),
        p("C0", ParamReg::lc(0), "x0 increment on pre spike", 1.0),
        p("C1", ParamReg::lc(1), "y0 increment on post spike", 1.0),
        p("C2", ParamReg::lc(2), "y1 increment on post spike", 1.0),
        p("C3", ParamReg::lc(3), "r0 increment on reward", 1.0),
    ]
}

fn keep(schema: Vec<SchemaEntry>, keys: &[&str]) -> Vec<SchemaEntry> {
    schema.into_iter().filter(|e| keys.contains(&e.key)).collect()
}

/// Look up a template by name.
pub fn template(name: &str) -> Option<ModelTemplate> {
    let t = match name {
        "lif" => neuron(
            "lif",
            LIF,
            vec![
                p("p0", ParamReg::ip(0), "leak factor", 0.9),
                p("p1", ParamReg::ip(1), "input gain", 1.0),
                p("c0", ParamReg::ic(0), "bias", 0.0),
            ],
        ),
        "cuba" => neuron(
            "cuba",
            CUBA,
            vec![p("p0", ParamReg::ip(0), "leak factor", 0.9), p("p1", ParamReg::ip(1), "input gain", 1.0)],
        ),
        "adlif" => neuron(
            "adlif",
            ADLIF,
            vec![
                p("p0", ParamReg::ip(0), "leak factor", 0.9),
                p("p1", ParamReg::ip(1), "input gain", 1.0),
                p("p2", ParamReg::ip(2), "adaptation coupling", -0.5),
                p("p3", ParamReg::ip(3), "adaptation decay", 0.9),
                p("p4", ParamReg::ip(4), "subthreshold adaptation", 0.0),
                p("c0", ParamReg::ic(0), "bias", 0.0),
                p("c1", ParamReg::ic(1), "adaptation bias", 0.0),
                p("c2", ParamReg::ic(2), "spike-triggered adaptation", 0.25),
            ],
        ),
        "coba" => {
            let mut t = neuron(
                "coba",
                COBA_LIF,
                vec![
                    p("p0", ParamReg::ip(0), "leak factor", 0.9),
                    p("p1", ParamReg::ip(1), "current gain", 1.0),
                    p("p5", ParamReg::ip(5), "conductance decay", 0.5),
                    p("p6", ParamReg::ip(6), "conductance from h", 0.5),
                    p("p7", ParamReg::ip(7), "reversal term", 1.0),
                    p("c0", ParamReg::ic(0), "bias", 0.0),
                ],
            );
            t.input_target = InputTarget::H;
            t.schema.iter_mut().find(|e| e.key == "p8").unwrap().default = 0.5;
            t
        }
        "qif" => neuron(
            "qif",
            QIF,
            vec![
                p("a", ParamReg::ip(3), "quadratic coefficient", 0.125),
                p("b", ParamReg::ic(1), "linear coefficient", 0.75),
                p("p1", ParamReg::ip(1), "input gain", 1.0),
                p("c0", ParamReg::ic(0), "bias", 0.0),
            ],
        ),
        "expif" => neuron(
            "expif",
            EXPIF,
            vec![
                p("inv_delta", ParamReg::ip(3), "1/slope factor", 2.0),
                p("neg_theta", ParamReg::ic(1), "-theta/delta", -2.0),
                p("delta", ParamReg::ip(4), "slope factor", 0.5),
                p("e", ParamReg::ic(2), "rest offset", 0.0),
                p("p0", ParamReg::ip(0), "leak factor", 0.9),
                p("p1", ParamReg::ip(1), "input gain", 1.0),
            ],
        ),
        "izhikevich" => {
            let mut t = neuron(
                "izhikevich",
                IZHIKEVICH,
                vec![
                    p("quad", ParamReg::ip(5), "quadratic coefficient", 0.2),
                    p("lin", ParamReg::ic(1), "linear coefficient", 3.5),
                    p("p1", ParamReg::ip(1), "input gain", 0.5),
                    p("p2", ParamReg::ip(2), "recovery coupling", -0.5),
                    p("c0", ParamReg::ic(0), "constant drive", 7.0),
                    p("p3", ParamReg::ip(3), "recovery decay 1-a/2", 0.99),
                    p("p4", ParamReg::ip(4), "recovery sensitivity ab/2", 0.002),
                    p("c2", ParamReg::ic(2), "recovery jump d/10", 0.8),
                    st("u", WorkReg::s(4), "initial recovery", -1.3),
                ],
            );
            t.format = QFormat::new(10).unwrap();
            for e in &mut t.schema {
                match e.key {
                    "v_th" => e.default = 3.0,
                    "v0" | "v" => e.default = -6.5,
                    _ => {}
                }
            }
            t
        }
        "stdp" => learning("stdp", STDP, keep(plasticity_schema(), &["P0", "P1", "P3", "P4", "C0", "C1"])),
        "triplet_stdp" => {
            let mut s = keep(plasticity_schema(), &["P0", "P1", "P2", "P3", "P4", "P5", "C0", "C1", "C2"]);
            s.push(tr("r0", 6, "constant reward trace", 1.0));
            learning("triplet_stdp", TRIPLET_STDP, s)
        }
        "rstdp" => learning(
            "rstdp",
            RSTDP,
            keep(plasticity_schema(), &["P0", "P1", "P3", "P4", "P6", "C0", "C1", "C3"]),
        ),
        "sdsp" => learning(
            "sdsp",
            SDSP,
            vec![
                p("calcium_decay", ParamReg::lp(4), "calcium decay", 0.875),
                p("calcium_jump", ParamReg::lc(1), "calcium increment per post spike", 1.0),
                st("RT0", WorkReg::tr(0), "pre-spike test level", 0.5),
                st("RT1", WorkReg::tr(1), "calcium window low", 0.25),
                st("RT2", WorkReg::tr(2), "membrane threshold for up/down", 0.5),
                st("RT3", WorkReg::tr(3), "calcium window high", 3.0),
                st("RT4", WorkReg::tr(4), "weight step", 0.0625),
            ],
        ),
        "stp" => {
            let mut t = learning(
                "stp",
                STP,
                vec![
                    p("p2", ParamReg::ip(2), "gain from weight", 0.0),
                    p("c2", ParamReg::ic(2), "base facilitation", 0.0625),
                    p("P1", ParamReg::lp(1), "output-layer reward gain", 0.0625),
                ],
            );
            t.entry = Some("LayerH");
            t
        }
        _ => return None,
    };
    Some(t)
}

/// Names resolvable by [`template`].
pub const NAMES: [&str; 12] =
    ["lif", "cuba", "adlif", "coba", "qif", "expif", "izhikevich", "stdp", "triplet_stdp", "rstdp", "sdsp", "stp"];

/// S-TP program for the output layer.
pub fn stp_output() -> ModelTemplate {
    let mut t = template("stp").unwrap();
    t.entry = Some("LayerO");
    t
}

/// Registers a program reads before writing them: parameter slots always,
/// TR registers only when read before any write in listing order.
pub fn registers_read(program: &Program) -> BTreeSet<Slot> {
    let mut out = BTreeSet::new();
    let mut written_tr = [false; 8];
    let mut written_param = BTreeSet::new();
    let param = |out: &mut BTreeSet<Slot>, written: &BTreeSet<ParamReg>, r: ParamReg| {
        if !written.contains(&r) {
            out.insert(Slot::Param(r));
        }
    };
    let read_work = |out: &mut BTreeSet<Slot>, written_tr: &[bool; 8], r: WorkReg| {
        if r.id() < 8 && !written_tr[r.id() as usize] {
            out.insert(Slot::State(r));
        }
    };
    for ins in program.instructions() {
        match *ins {
            Instruction::Uptvm { nhvm: f } => {
                for (bit, reg) in [(nhvm::V, ParamReg::ip(0)), (nhvm::I, ParamReg::ip(1)), (nhvm::V_ADP, ParamReg::ip(2)), (nhvm::C0, ParamReg::ic(0))] {
                    if f & bit != 0 {
                        param(&mut out, &written_param, reg);
                    }
                }
            }
            Instruction::Uptis { ohis, nhip } => {
                let terms = [
                    (uptis::TARGET_V_ADP, uptis::P3, ParamReg::ip(3)),
                    (uptis::TARGET_V_ADP, uptis::P4, ParamReg::ip(4)),
                    (uptis::TARGET_V_ADP, uptis::C1, ParamReg::ic(1)),
                    (uptis::TARGET_G, uptis::P5, ParamReg::ip(5)),
                    (uptis::TARGET_G, uptis::P6, ParamReg::ip(6)),
                    (uptis::TARGET_I, uptis::P7, ParamReg::ip(7)),
                ];
                for (target, bit, reg) in terms {
                    if ohis & target != 0 && nhip & bit != 0 {
                        param(&mut out, &written_param, reg);
                    }
                }
            }
            Instruction::Uptls { k: _, l, m: _, n } => {
                param(&mut out, &written_param, ParamReg::lp(l));
                param(&mut out, &written_param, ParamReg::lc(n));
            }
            Instruction::Uptwt { m, .. } => {
                param(&mut out, &written_param, ParamReg::lp(m));
            }
            Instruction::Uptts { k, l, m, n } => {
                param(&mut out, &written_param, ParamReg::ip(l));
                if n < 3 {
                    param(&mut out, &written_param, ParamReg::ic(n));
                }
                if m == 7 {
                    read_work(&mut out, &written_tr, WorkReg::tr(k));
                }
                written_tr[k as usize] = true;
            }
            Instruction::Gsprs { nhsp: f } => {
                if f & nhsp::ADAPTIVE != 0 {
                    param(&mut out, &written_param, ParamReg::ic(2));
                }
            }
            Instruction::Mov { dst, src } => {
                read_work(&mut out, &written_tr, src);
                match dst {
                    crate::isa::MovDst::Param(r) => {
                        written_param.insert(r);
                    }
                    crate::isa::MovDst::Reg(r) if r.id() < 8 => written_tr[r.id() as usize] = true,
                    _ => {}
                }
            }
            Instruction::Add { dst, src }
            | Instruction::Sub { dst, src }
            | Instruction::Mul { dst, src }
            | Instruction::Div { dst, src } => {
                read_work(&mut out, &written_tr, dst);
                read_work(&mut out, &written_tr, src);
            }
            Instruction::Exp { dst, src } => {
                read_work(&mut out, &written_tr, src);
                if dst.id() < 8 {
                    written_tr[dst.id() as usize] = true;
                }
            }
            Instruction::Cmp { a, b } => {
                read_work(&mut out, &written_tr, a);
                read_work(&mut out, &written_tr, b);
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_lengths() {
        let expect = [
            ("lif", 2),
            ("qif", 4),
            ("expif", 6),
            ("izhikevich", 5),
            ("stdp", 4),
            ("triplet_stdp", 6),
            ("rstdp", 5),
            ("sdsp", 13),
            ("stp", 5),
        ];
        for (name, n) in expect {
            assert_eq!(template(name).unwrap().instruction_count(), n, "{name}");
        }
    }

    #[test]
    fn schema_covers_reads() {
        for name in NAMES {
            let t = template(name).unwrap();
            let covered: BTreeSet<Slot> = t.schema.iter().map(|e| e.slot).collect();
            for r in registers_read(&t.program()) {
                assert!(covered.contains(&r), "{name} reads {r:?} without a schema entry");
            }
        }
    }

    #[test]
    fn stp_entries() {
        assert_eq!(template("stp").unwrap().entry_point(), 0);
        assert_eq!(stp_output().entry_point(), 4);
    }

    #[test]
    fn unknown_name() {
        assert!(template("hodgkin_huxley").is_none());
    }
}
