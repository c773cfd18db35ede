// SPDX-License-Identifier: Apache-2.0

//! Program interpreter for one neuron (or one synapse context).

use super::cost::instruction_cycles;
use super::state::{ExpLut, NeuronRecord, ParameterBank, G, H, I, V, V_ADP, V_TH};
use crate::fixed::{Alu, Fixed, QFormat};
use crate::isa::{self, decode, hot_indices, nhsp, nhvm, uptis, Illegal, Instruction, InstructionWord, LogicOp, MovDst};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BUDGET: u32 = 256;
const STACK_DEPTH: usize = 64;
pub const SCRATCH_WORDS: usize = 64;

/// A decoded program plus its source words.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Program {
    pub words: Vec<InstructionWord>,
    #[serde(skip)]
    decoded: Vec<Instruction>,
}

impl Program {
    pub fn new(words: Vec<InstructionWord>) -> Result<Program, Illegal> {
        let decoded = words.iter().map(|&w| decode(w)).collect::<Result<Vec<_>, _>>()?;
        Ok(Program { words, decoded })
    }

    pub fn from_text(text: &str) -> Result<Program, isa::AsmError> {
        let p = isa::assemble(text)?;
        // assemble only emits words that decode, except `.word` escapes
        Program::new(p.words).map_err(|e| isa::AsmError::MalformedOperand { line: 0, message: e.to_string() })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.decoded
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Re-derive the decoded form after deserialization.
    pub fn rebuild(&mut self) -> Result<(), Illegal> {
        self.decoded = self.words.iter().map(|&w| decode(w)).collect::<Result<Vec<_>, _>>()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ExecFault {
    #[error("instruction budget of {budget} exceeded")]
    Runaway { budget: u32 },
    #[error("jump to {target} outside program at pc {pc}")]
    JumpOutOfRange { pc: usize, target: i64 },
    #[error("stack overflow at pc {pc}")]
    StackOverflow { pc: usize },
    #[error("stack underflow at pc {pc}")]
    StackUnderflow { pc: usize },
    #[error("synapse access at pc {pc} without synapse memory or out of range (address {addr})")]
    Synapse { pc: usize, addr: i64 },
    #[error("entry point {entry} outside program")]
    Entry { entry: usize },
}

/// Weight and trace storage addressable through `SA`/`TS`/`WMOV`.
pub trait SynapseMemory {
    fn synapse_count(&self) -> usize;
    fn weight(&self, addr: usize) -> Fixed;
    fn set_weight(&mut self, addr: usize, w: Fixed);
    fn traces(&self, addr: usize) -> [Fixed; 9];
    fn set_traces(&mut self, addr: usize, traces: [Fixed; 9]);
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub fired: bool,
    pub instructions: u32,
    pub cycles: u64,
}

/// Execution environment shared by all runs on one core during a tick.
pub struct Exec<'a> {
    pub alu: &'a mut Alu,
    pub memory: &'a ParameterBank,
    pub lut: &'a ExpLut,
    pub scratch: &'a mut [Fixed; SCRATCH_WORDS],
    pub synapses: Option<&'a mut dyn SynapseMemory>,
    pub budget: u32,
}

const fn recip_seeds() -> [u64; 64] {
    let mut t = [0u64; 64];
    let mut k = 0;
    while k < 64 {
        t[k] = (1u64 << 31) / ((1 << 15) + ((k as u64) << 9) + (1 << 8));
        k += 1;
    }
    t
}

const RECIP: [u64; 64] = recip_seeds();

/// `a / b` by normalization, reciprocal table, one Newton step and a multiply.
pub fn fixed_div(alu: &mut Alu, a: Fixed, b: Fixed) -> Fixed {
    if b.0 == 0 {
        if a.0 == 0 {
            return Fixed::ZERO;
        }
        alu.saturations += 1;
        return if a.0 > 0 { Fixed::MAX } else { Fixed::MIN };
    }
    let neg = (a.0 < 0) != (b.0 < 0);
    let ua = (a.0 as i64).unsigned_abs() as u128;
    let ub = (b.0 as i64).unsigned_abs();
    let lz = ub.leading_zeros() - 48;
    let m = (ub << lz) as u128;
    let r0 = RECIP[((m >> 9) & 63) as usize] as u128;
    let e = m * r0;
    let r1 = (r0 * ((1u128 << 32) - e)) >> 31;
    let q = ((ua << alu.format.frac_bits) * r1 << lz) >> 31;
    let q = q.min(1 << 20) as i64;
    alu.clamp_wide(if neg { -q } else { q })
}

#[inline]
fn bit(field: u8, mask: u8) -> bool {
    field & mask != 0
}

impl Exec<'_> {
    fn format(&self) -> QFormat {
        self.alu.format
    }

    /// Run `program` from `entry` over `record`. Registers are loaded from the
    /// record before the first instruction and written back at the end; the
    /// working parameter bank starts as a copy of parameter memory.
    pub fn run(&mut self, program: &Program, entry: usize, record: &mut NeuronRecord) -> Result<RunStats, ExecFault> {
        let code = program.instructions();
        if entry > code.len() {
            return Err(ExecFault::Entry { entry });
        }
        let mut mem = *record;
        let mut r = *record;
        let mut bank = *self.memory;
        let mut stack = [Fixed::ZERO; STACK_DEPTH];
        let mut sp = 0usize;
        let mut syn_addr: i64 = 0;
        let mut stats = RunStats::default();
        let mut pc = entry;
        let q = self.format();
        while pc < code.len() {
            if stats.instructions >= self.budget {
                return Err(ExecFault::Runaway { budget: self.budget });
            }
            let instr = code[pc];
            stats.instructions += 1;
            stats.cycles += instruction_cycles(&instr) as u64;
            let mut next = pc + 1;
            match instr {
                Instruction::Lsis { store, nhis } => {
                    for i in hot_indices(nhis as u16, 6) {
                        if store {
                            mem.s[i] = r.s[i];
                        } else {
                            r.s[i] = mem.s[i];
                        }
                    }
                }
                Instruction::Lsls { store, nhls } => {
                    for i in hot_indices(nhls, 10).filter(|&i| i < 9) {
                        if store {
                            mem.ls[i] = r.ls[i];
                        } else {
                            r.ls[i] = mem.ls[i];
                        }
                    }
                }
                Instruction::Ldip { nhip, nhic } => {
                    for i in hot_indices(nhip as u16, 8) {
                        bank.ip[i] = self.memory.ip[i];
                    }
                    for i in hot_indices(nhic as u16, 3) {
                        bank.ic[i] = self.memory.ic[i];
                    }
                }
                Instruction::Ldlp { nhlp, nhlc } => {
                    for i in hot_indices(nhlp as u16, 7) {
                        bank.lp[i] = self.memory.lp[i];
                    }
                    for i in hot_indices(nhlc as u16, 4) {
                        bank.lc[i] = self.memory.lc[i];
                    }
                }
                Instruction::Uptis { ohis, nhip } => self.uptis(&mut r, &bank, ohis, nhip),
                Instruction::Uptvm { nhvm: f } => {
                    let mut acc = 0i64;
                    if bit(f, nhvm::V) {
                        acc += self.alu.mul(bank.ip[0], r.s[V]).0 as i64;
                    }
                    if bit(f, nhvm::I) {
                        acc += self.alu.mul(bank.ip[1], r.s[I]).0 as i64;
                    }
                    if bit(f, nhvm::V_ADP) {
                        acc += self.alu.mul(bank.ip[2], r.s[V_ADP]).0 as i64;
                    }
                    if bit(f, nhvm::C0) {
                        acc += bank.ic[0].0 as i64;
                    }
                    r.s[V] = self.alu.clamp_wide(acc);
                }
                Instruction::Uptls { k, l, m, n } => {
                    let gate = match k {
                        0..=2 => r.ls[2],
                        3..=5 => r.ls[5],
                        _ => r.ls[8],
                    };
                    let decay = self.alu.mul(bank.lp[l as usize], r.ls[m as usize]);
                    let kick = if gate.0 != 0 { bank.lc[n as usize] } else { Fixed::ZERO };
                    r.ls[k as usize] = self.alu.add(decay, kick);
                }
                Instruction::Uptwt { m, n } => {
                    let mut acc = bank.lp[m as usize];
                    for i in hot_indices(n, 9) {
                        acc = self.alu.mul(acc, r.ls[i]);
                    }
                    r.w = self.alu.add(r.w, acc);
                }
                Instruction::Uptts { k, l, m, n } => {
                    let src = match m {
                        0..=5 => r.s[m as usize],
                        6 => r.w,
                        _ => r.tr[k as usize],
                    };
                    let prod = self.alu.mul(bank.ip[l as usize], src);
                    let c = if n < 3 { bank.ic[n as usize] } else { Fixed::ZERO };
                    r.tr[k as usize] = self.alu.add(prod, c);
                }
                Instruction::Gsprs { nhsp: f } => {
                    let cond = !bit(f, nhsp::COMPARE) || r.s[V] > r.s[V_TH];
                    if cond && bit(f, nhsp::FIRE) {
                        stats.fired = true;
                    }
                    if cond && bit(f, nhsp::RESET) {
                        r.s[V] = r.v0;
                    }
                    if cond && bit(f, nhsp::ADAPTIVE) {
                        r.s[V_ADP] = self.alu.add(r.s[V_ADP], bank.ic[2]);
                    }
                }
                Instruction::Add { dst, src } => {
                    let v = self.alu.add(r.read(dst, q), r.read(src, q));
                    r.write(dst, v);
                }
                Instruction::Sub { dst, src } => {
                    let v = self.alu.sub(r.read(dst, q), r.read(src, q));
                    r.write(dst, v);
                }
                Instruction::Mul { dst, src } => {
                    let v = self.alu.mul(r.read(dst, q), r.read(src, q));
                    r.write(dst, v);
                }
                Instruction::Div { dst, src } => {
                    let v = fixed_div(self.alu, r.read(dst, q), r.read(src, q));
                    r.write(dst, v);
                }
                Instruction::Exp { dst, src } => {
                    let (v, clamped) = self.lut.lookup(r.read(src, q));
                    self.alu.saturations += clamped as u64;
                    r.write(dst, v);
                }
                Instruction::Addi { dst, imm } => {
                    let v = self.alu.add_wide(r.read(dst, q), imm as i64);
                    r.write(dst, v);
                }
                Instruction::Shift { dst, amount } => {
                    let v = self.alu.shift(r.read(dst, q), amount as i32);
                    r.write(dst, v);
                }
                Instruction::Logic { op, dst, src } => {
                    let (a, b) = (r.read(dst, q).0, r.read(src, q).0);
                    let v = match op {
                        LogicOp::And => a & b,
                        LogicOp::Or => a | b,
                        LogicOp::Xor => a ^ b,
                        LogicOp::Not => !b,
                    };
                    r.write(dst, Fixed(v));
                }
                Instruction::Mov { dst, src } => {
                    let v = r.read(src, q);
                    match dst {
                        MovDst::Reg(d) => r.write(d, v),
                        MovDst::Param(p) => bank.set(p, v),
                    }
                }
                Instruction::Wmov { reg, store } => {
                    let syn = self.synapse(pc, syn_addr)?;
                    let addr = syn_addr as usize;
                    if store {
                        let v = r.read(reg, q);
                        syn.set_weight(addr, v);
                    } else {
                        let v = syn.weight(addr);
                        r.write(reg, v);
                    }
                }
                Instruction::Cmp { a, b } => {
                    r.flag = r.read(a, q).0.cmp(&r.read(b, q).0) as i8;
                }
                Instruction::Jmp { offset } => {
                    if r.flag > 0 {
                        let target = pc as i64 + offset as i64;
                        if target < 0 || target > code.len() as i64 {
                            return Err(ExecFault::JumpOutOfRange { pc, target });
                        }
                        next = target as usize;
                    }
                }
                Instruction::Sa { src } => {
                    syn_addr = (r.read(src, q).0 >> q.frac_bits) as i64;
                }
                Instruction::Ts { store } => {
                    let syn = self.synapse(pc, syn_addr)?;
                    let addr = syn_addr as usize;
                    if store {
                        syn.set_traces(addr, r.ls);
                    } else {
                        r.ls = syn.traces(addr);
                    }
                }
                Instruction::Load { dst, addr } => r.write(dst, self.scratch[addr as usize]),
                Instruction::Store { src, addr } => self.scratch[addr as usize] = r.read(src, q),
                Instruction::Push { src } => {
                    if sp >= STACK_DEPTH {
                        return Err(ExecFault::StackOverflow { pc });
                    }
                    stack[sp] = r.read(src, q);
                    sp += 1;
                }
                Instruction::Pop { dst } => {
                    if sp == 0 {
                        return Err(ExecFault::StackUnderflow { pc });
                    }
                    sp -= 1;
                    r.write(dst, stack[sp]);
                }
                Instruction::Sp { value } => sp = value as usize,
                Instruction::Nop => break,
            }
            pc = next;
        }
        *record = r;
        Ok(stats)
    }

    fn synapse(&mut self, pc: usize, addr: i64) -> Result<&mut dyn SynapseMemory, ExecFault> {
        match self.synapses.as_deref_mut() {
            Some(s) if addr >= 0 && (addr as usize) < s.synapse_count() => Ok(s),
            _ => Err(ExecFault::Synapse { pc, addr }),
        }
    }

    fn uptis(&mut self, r: &mut NeuronRecord, bank: &ParameterBank, ohis: u8, nhip: u8) {
        if bit(ohis, uptis::TARGET_V_ADP) {
            let mut acc = 0i64;
            if bit(nhip, uptis::P3) {
                acc += self.alu.mul(bank.ip[3], r.s[V_ADP]).0 as i64;
            }
            if bit(nhip, uptis::P4) {
                acc += self.alu.mul(bank.ip[4], r.s[V]).0 as i64;
            }
            if bit(nhip, uptis::C1) {
                acc += bank.ic[1].0 as i64;
            }
            r.s[V_ADP] = self.alu.clamp_wide(acc);
        }
        if bit(ohis, uptis::TARGET_G) {
            let mut acc = 0i64;
            if bit(nhip, uptis::P5) {
                acc += self.alu.mul(bank.ip[5], r.s[G]).0 as i64;
            }
            if bit(nhip, uptis::P6) {
                acc += self.alu.mul(bank.ip[6], r.s[H]).0 as i64;
            }
            r.s[G] = self.alu.clamp_wide(acc);
        }
        if bit(ohis, uptis::TARGET_I) {
            let mut acc = self.alu.mul(r.s[G], r.s[V]).0 as i64;
            if bit(nhip, uptis::P7) {
                acc += self.alu.mul(bank.ip[7], r.s[G]).0 as i64;
            }
            r.s[I] = self.alu.clamp_wide(acc);
        }
    }
}
