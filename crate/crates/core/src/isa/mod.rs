// SPDX-License-Identifier: Apache-2.0

//! Instruction set: opcodes, 16-bit instruction words, register names,
//! the canonical encoder/decoder, and the text assembler.
//!
//! Word layout is `[opcode:5][operand:11]`, opcode in the top bits. Multi-field
//! operands pack MSB-first in the order the fields are listed for each
//! instruction, and every hot-code indexes its register set MSB-first (the
//! first register of the set sits at the field's most significant bit).

mod asm;
pub mod binary;
mod regs;

pub use asm::{assemble, disassemble, AsmError, AssemblyProgram, Statement};
pub use regs::{Bank, ParamReg, RegisterName, WorkReg};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// 5-bit operation code. Neuromorphic instructions occupy 0..=9, extended
/// instructions follow contiguously from 10 with `NOP` last; 30 and 31 are
/// unassigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Opcode {
    Lsis = 0,
    Ldip = 1,
    Lsls = 2,
    Ldlp = 3,
    Uptis = 4,
    Uptvm = 5,
    Uptls = 6,
    Uptwt = 7,
    Uptts = 8,
    Gsprs = 9,
    Add = 10,
    Sub = 11,
    Mul = 12,
    Addi = 13,
    Shift = 14,
    Logic = 15,
    Mov = 16,
    Wmov = 17,
    Cmp = 18,
    Jmp = 19,
    Sa = 20,
    Ts = 21,
    Load = 22,
    Store = 23,
    Push = 24,
    Pop = 25,
    Sp = 26,
    Div = 27,
    Exp = 28,
    Nop = 29,
}

impl Opcode {
    pub const ALL: [Opcode; 30] = [
        Opcode::Lsis,
        Opcode::Ldip,
        Opcode::Lsls,
        Opcode::Ldlp,
        Opcode::Uptis,
        Opcode::Uptvm,
        Opcode::Uptls,
        Opcode::Uptwt,
        Opcode::Uptts,
        Opcode::Gsprs,
        Opcode::Add,
        Opcode::Sub,
        Opcode::Mul,
        Opcode::Addi,
        Opcode::Shift,
        Opcode::Logic,
        Opcode::Mov,
        Opcode::Wmov,
        Opcode::Cmp,
        Opcode::Jmp,
        Opcode::Sa,
        Opcode::Ts,
        Opcode::Load,
        Opcode::Store,
        Opcode::Push,
        Opcode::Pop,
        Opcode::Sp,
        Opcode::Div,
        Opcode::Exp,
        Opcode::Nop,
    ];

    pub fn from_u8(value: u8) -> Option<Opcode> {
        Opcode::ALL.get(value as usize).copied()
    }

    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Lsis => "LSIS",
            Opcode::Ldip => "LDIP",
            Opcode::Lsls => "LSLS",
            Opcode::Ldlp => "LDLP",
            Opcode::Uptis => "UPTIS",
            Opcode::Uptvm => "UPTVM",
            Opcode::Uptls => "UPTLS",
            Opcode::Uptwt => "UPTWT",
            Opcode::Uptts => "UPTTS",
            Opcode::Gsprs => "GSPRS",
            Opcode::Add => "ADD",
            Opcode::Sub => "SUB",
            Opcode::Mul => "MUL",
            Opcode::Addi => "ADDI",
            Opcode::Shift => "SHIFT",
            Opcode::Logic => "LOGIC",
            Opcode::Mov => "MOV",
            Opcode::Wmov => "WMOV",
            Opcode::Cmp => "CMP",
            Opcode::Jmp => "JMP",
            Opcode::Sa => "SA",
            Opcode::Ts => "TS",
            Opcode::Load => "LOAD",
            Opcode::Store => "STORE",
            Opcode::Push => "PUSH",
            Opcode::Pop => "POP",
            Opcode::Sp => "SP",
            Opcode::Div => "DIV",
            Opcode::Exp => "EXP",
            Opcode::Nop => "NOP",
        }
    }

    pub fn from_mnemonic(text: &str) -> Option<Opcode> {
        Opcode::ALL
            .iter()
            .copied()
            .find(|op| op.mnemonic().eq_ignore_ascii_case(text))
    }

    /// True for the ten neuromorphic-specific instructions.
    pub fn is_neuromorphic(self) -> bool {
        (self as u8) < 10
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// Encoded 16-bit instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InstructionWord(pub u16);

impl InstructionWord {
    pub fn new(opcode: u8, operand: u16) -> InstructionWord {
        InstructionWord(((opcode as u16 & 0x1F) << 11) | (operand & 0x7FF))
    }

    pub fn opcode_bits(self) -> u8 {
        (self.0 >> 11) as u8
    }

    pub fn operand(self) -> u16 {
        self.0 & 0x7FF
    }
}

impl fmt::Display for InstructionWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:04X}", self.0)
    }
}

/// LOGIC sub-operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicOp {
    And = 0,
    Or = 1,
    Xor = 2,
    Not = 3,
}

impl LogicOp {
    pub fn from_bits(bits: u16) -> Option<LogicOp> {
        match bits {
            0 => Some(LogicOp::And),
            1 => Some(LogicOp::Or),
            2 => Some(LogicOp::Xor),
            3 => Some(LogicOp::Not),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogicOp::And => "AND",
            LogicOp::Or => "OR",
            LogicOp::Xor => "XOR",
            LogicOp::Not => "NOT",
        }
    }
}

/// Destination of a MOV: a working register or a parameter-bank slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MovDst {
    Reg(WorkReg),
    Param(ParamReg),
}

/// A decoded instruction with its named sub-fields.
///
/// Hot-code fields keep their raw bit patterns; use the accessor helpers
/// (e.g. [`hot_indices`]) to obtain the selected register indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Instruction {
    /// Load (`store == false`) or store the S0..S5 selected by the 6-hot `nhis`.
    Lsis { store: bool, nhis: u8 },
    /// Load IP0..IP7 selected by the 8-hot `nhip` and IC0..IC2 by the 3-hot `nhic`.
    Ldip { nhip: u8, nhic: u8 },
    /// Load or store LS0..LS9 selected by the 10-hot `nhls`.
    Lsls { store: bool, nhls: u16 },
    /// Load LP0..LP6 (7-hot) and LC0..LC3 (4-hot).
    Ldlp { nhlp: u8, nhlc: u8 },
    /// Update I / g / v_adp (one-hot `ohis`, MSB = I) gated by p3..p7,c1 (6-hot).
    Uptis { ohis: u8, nhip: u8 },
    /// Update v from {v, I, v_adp, c0} (4-hot).
    Uptvm { nhvm: u8 },
    /// LS_k <- LP_l * LS_m + LC_n * gate.
    Uptls { k: u8, l: u8, m: u8, n: u8 },
    /// W <- W + LP_m * prod(LS selected by the 9-hot `n`).
    Uptwt { m: u8, n: u16 },
    /// TR_k <- IP_l * S_m + IC_n.
    Uptts { k: u8, l: u8, m: u8, n: u8 },
    /// Spike generation flags {fire, compare, adaptive, reset}, MSB = fire.
    Gsprs { nhsp: u8 },
    Add { dst: WorkReg, src: WorkReg },
    Sub { dst: WorkReg, src: WorkReg },
    Mul { dst: WorkReg, src: WorkReg },
    /// dst <- dst + imm (raw LSBs).
    Addi { dst: WorkReg, imm: i8 },
    /// Arithmetic shift; positive amounts shift left.
    Shift { dst: WorkReg, amount: i8 },
    Logic { op: LogicOp, dst: WorkReg, src: WorkReg },
    Mov { dst: MovDst, src: WorkReg },
    /// Move between a register and the weight of the addressed synapse.
    /// `store == true` writes the register into synapse memory.
    Wmov { reg: WorkReg, store: bool },
    /// Sets FLAG to the sign of `a - b`.
    Cmp { a: WorkReg, b: WorkReg },
    /// Relative jump taken when FLAG is GT.
    Jmp { offset: i16 },
    /// Select the synapse addressed by the integer part of `src`.
    Sa { src: WorkReg },
    /// Load (`store == false`) or store the trace registers of the addressed synapse.
    Ts { store: bool },
    Load { dst: WorkReg, addr: u8 },
    Store { src: WorkReg, addr: u8 },
    Push { src: WorkReg },
    Pop { dst: WorkReg },
    Sp { value: u8 },
    Div { dst: WorkReg, src: WorkReg },
    /// dst <- exp(src) via the core's lookup table.
    Exp { dst: WorkReg, src: WorkReg },
    /// Ends the running program.
    Nop,
}

impl Instruction {
    pub fn opcode(&self) -> Opcode {
        match self {
            Instruction::Lsis { .. } => Opcode::Lsis,
            Instruction::Ldip { .. } => Opcode::Ldip,
            Instruction::Lsls { .. } => Opcode::Lsls,
            Instruction::Ldlp { .. } => Opcode::Ldlp,
            Instruction::Uptis { .. } => Opcode::Uptis,
            Instruction::Uptvm { .. } => Opcode::Uptvm,
            Instruction::Uptls { .. } => Opcode::Uptls,
            Instruction::Uptwt { .. } => Opcode::Uptwt,
            Instruction::Uptts { .. } => Opcode::Uptts,
            Instruction::Gsprs { .. } => Opcode::Gsprs,
            Instruction::Add { .. } => Opcode::Add,
            Instruction::Sub { .. } => Opcode::Sub,
            Instruction::Mul { .. } => Opcode::Mul,
            Instruction::Addi { .. } => Opcode::Addi,
            Instruction::Shift { .. } => Opcode::Shift,
            Instruction::Logic { .. } => Opcode::Logic,
            Instruction::Mov { .. } => Opcode::Mov,
            Instruction::Wmov { .. } => Opcode::Wmov,
            Instruction::Cmp { .. } => Opcode::Cmp,
            Instruction::Jmp { .. } => Opcode::Jmp,
            Instruction::Sa { .. } => Opcode::Sa,
            Instruction::Ts { .. } => Opcode::Ts,
            Instruction::Load { .. } => Opcode::Load,
            Instruction::Store { .. } => Opcode::Store,
            Instruction::Push { .. } => Opcode::Push,
            Instruction::Pop { .. } => Opcode::Pop,
            Instruction::Sp { .. } => Opcode::Sp,
            Instruction::Div { .. } => Opcode::Div,
            Instruction::Exp { .. } => Opcode::Exp,
            Instruction::Nop => Opcode::Nop,
        }
    }
}

/// Field overflow while encoding.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{opcode}: field `{field}` value {value} does not fit in {bits} bits")]
pub struct EncodeError {
    pub opcode: Opcode,
    pub field: &'static str,
    pub value: i64,
    pub bits: u32,
}

/// A 16-bit word that does not decode to a canonical instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Illegal {
    #[error("illegal opcode {0}")]
    Opcode(u8),
    #[error("non-canonical {opcode} word 0x{word:04X}")]
    NonCanonical { opcode: Opcode, word: u16 },
}

struct Packer {
    opcode: Opcode,
    acc: u16,
    used: u32,
}

impl Packer {
    fn new(opcode: Opcode) -> Packer {
        Packer { opcode, acc: 0, used: 0 }
    }

    fn field(mut self, name: &'static str, value: u16, bits: u32) -> Result<Packer, EncodeError> {
        if (value as u32) >> bits != 0 {
            return Err(EncodeError { opcode: self.opcode, field: name, value: value as i64, bits });
        }
        self.acc = (self.acc << bits) | value;
        self.used += bits;
        Ok(self)
    }

    fn signed(self, name: &'static str, value: i64, bits: u32) -> Result<Packer, EncodeError> {
        let lo = -(1i64 << (bits - 1));
        let hi = (1i64 << (bits - 1)) - 1;
        if value < lo || value > hi {
            return Err(EncodeError { opcode: self.opcode, field: name, value, bits });
        }
        let mask = (1u16 << bits) - 1;
        self.field(name, (value as u16) & mask, bits)
    }

    fn reserved(self, bits: u32) -> Result<Packer, EncodeError> {
        self.field("reserved", 0, bits)
    }

    fn finish(self) -> InstructionWord {
        debug_assert_eq!(self.used, 11);
        InstructionWord::new(self.opcode.value(), self.acc)
    }
}

fn rr(op: Opcode, dst: u8, src: u8, variant: bool) -> Result<InstructionWord, EncodeError> {
    Ok(Packer::new(op)
        .field("dst", (dst & 0xF) as u16, 4)?
        .field("src", (src & 0xF) as u16, 4)?
        .field("dst_bank", (dst >> 4) as u16, 1)?
        .field("src_bank", (src >> 4) as u16, 1)?
        .field("variant", variant as u16, 1)?
        .finish())
}

fn ri(op: Opcode, reg: u8, imm: u16) -> Result<InstructionWord, EncodeError> {
    Ok(Packer::new(op).field("reg", reg as u16, 5)?.field("imm", imm, 6)?.finish())
}

fn ri_signed(op: Opcode, reg: u8, imm: i64) -> Result<InstructionWord, EncodeError> {
    Ok(Packer::new(op).field("reg", reg as u16, 5)?.signed("imm", imm, 6)?.finish())
}

/// Encode a decoded instruction into its canonical 16-bit word.
pub fn encode(instr: &Instruction) -> Result<InstructionWord, EncodeError> {
    use Instruction as I;
    let op = instr.opcode();
    let p = Packer::new(op);
    let word = match *instr {
        I::Lsis { store, nhis } => p.field("ls", store as u16, 1)?.reserved(4)?.field("nhis", nhis as u16, 6)?.finish(),
        I::Ldip { nhip, nhic } => p.field("nhip", nhip as u16, 8)?.field("nhic", nhic as u16, 3)?.finish(),
        I::Lsls { store, nhls } => p.field("ls", store as u16, 1)?.field("nhls", nhls, 10)?.finish(),
        I::Ldlp { nhlp, nhlc } => p.field("nhlp", nhlp as u16, 7)?.field("nhlc", nhlc as u16, 4)?.finish(),
        I::Uptis { ohis, nhip } => p.reserved(2)?.field("ohis", ohis as u16, 3)?.field("nhip", nhip as u16, 6)?.finish(),
        I::Uptvm { nhvm } => p.reserved(7)?.field("nhvm", nhvm as u16, 4)?.finish(),
        I::Uptls { k, l, m, n } | I::Uptts { k, l, m, n } => p
            .field("k", k as u16, 3)?
            .field("l", l as u16, 3)?
            .field("m", m as u16, 3)?
            .field("n", n as u16, 2)?
            .finish(),
        I::Uptwt { m, n } => p.field("m", m as u16, 2)?.field("n", n, 9)?.finish(),
        I::Gsprs { nhsp } => p.reserved(7)?.field("nhsp", nhsp as u16, 4)?.finish(),
        I::Add { dst, src } | I::Sub { dst, src } | I::Mul { dst, src } | I::Div { dst, src } | I::Exp { dst, src } => {
            rr(op, dst.id(), src.id(), false)?
        }
        I::Cmp { a, b } => rr(op, a.id(), b.id(), false)?,
        I::Mov { dst, src } => match dst {
            MovDst::Reg(r) => rr(op, r.id(), src.id(), false)?,
            MovDst::Param(pr) => rr(op, pr.id(), src.id(), true)?,
        },
        I::Wmov { reg, store } => rr(op, reg.id(), 0, store)?,
        I::Logic { op: lop, dst, src } => {
            if dst.id() > 15 {
                return Err(EncodeError { opcode: op, field: "dst", value: dst.id() as i64, bits: 4 });
            }
            if src.id() > 15 {
                return Err(EncodeError { opcode: op, field: "src", value: src.id() as i64, bits: 4 });
            }
            p.field("dst", dst.id() as u16, 4)?
                .field("src", src.id() as u16, 4)?
                .field("mode", lop as u16, 3)?
                .finish()
        }
        I::Addi { dst, imm } => ri_signed(op, dst.id(), imm as i64)?,
        I::Shift { dst, amount } => ri_signed(op, dst.id(), amount as i64)?,
        I::Load { dst, addr } => ri(op, dst.id(), addr as u16)?,
        I::Store { src, addr } => ri(op, src.id(), addr as u16)?,
        I::Push { src } => ri(op, src.id(), 0)?,
        I::Pop { dst } => ri(op, dst.id(), 0)?,
        I::Sa { src } => ri(op, src.id(), 0)?,
        I::Sp { value } => ri(op, 0, value as u16)?,
        I::Ts { store } => p.reserved(10)?.field("store", store as u16, 1)?.finish(),
        I::Jmp { offset } => p.signed("offset", offset as i64, 11)?.finish(),
        I::Nop => p.reserved(11)?.finish(),
    };
    Ok(word)
}

fn bits(v: u16, hi: u32, width: u32) -> u16 {
    (v >> (hi + 1 - width)) & ((1 << width) - 1)
}

fn sign_extend(v: u16, width: u32) -> i16 {
    let shift = 16 - width;
    ((v << shift) as i16) >> shift
}

/// Decode a 16-bit word. Total: every word yields either an instruction or
/// an [`Illegal`] value.
pub fn decode(word: InstructionWord) -> Result<Instruction, Illegal> {
    use Instruction as I;
    let opv = word.opcode_bits();
    let op = Opcode::from_u8(opv).ok_or(Illegal::Opcode(opv))?;
    let x = word.operand();
    let bad = Illegal::NonCanonical { opcode: op, word: word.0 };
    let work = |id: u16| WorkReg::from_id(id as u8).ok_or(bad);
    let rr_parts = || {
        let dst = bits(x, 10, 4) | (bits(x, 2, 1) << 4);
        let src = bits(x, 6, 4) | (bits(x, 1, 1) << 4);
        (dst, src, bits(x, 0, 1) == 1)
    };
    let instr = match op {
        Opcode::Lsis => {
            if bits(x, 9, 4) != 0 {
                return Err(bad);
            }
            I::Lsis { store: bits(x, 10, 1) == 1, nhis: bits(x, 5, 6) as u8 }
        }
        Opcode::Ldip => I::Ldip { nhip: bits(x, 10, 8) as u8, nhic: bits(x, 2, 3) as u8 },
        Opcode::Lsls => I::Lsls { store: bits(x, 10, 1) == 1, nhls: bits(x, 9, 10) },
        Opcode::Ldlp => I::Ldlp { nhlp: bits(x, 10, 7) as u8, nhlc: bits(x, 3, 4) as u8 },
        Opcode::Uptis => {
            if bits(x, 10, 2) != 0 {
                return Err(bad);
            }
            I::Uptis { ohis: bits(x, 8, 3) as u8, nhip: bits(x, 5, 6) as u8 }
        }
        Opcode::Uptvm => {
            if bits(x, 10, 7) != 0 {
                return Err(bad);
            }
            I::Uptvm { nhvm: bits(x, 3, 4) as u8 }
        }
        Opcode::Uptls | Opcode::Uptts => {
            let (k, l, m, n) = (bits(x, 10, 3) as u8, bits(x, 7, 3) as u8, bits(x, 4, 3) as u8, bits(x, 1, 2) as u8);
            if op == Opcode::Uptls {
                I::Uptls { k, l, m, n }
            } else {
                I::Uptts { k, l, m, n }
            }
        }
        Opcode::Uptwt => I::Uptwt { m: bits(x, 10, 2) as u8, n: bits(x, 8, 9) },
        Opcode::Gsprs => {
            if bits(x, 10, 7) != 0 {
                return Err(bad);
            }
            I::Gsprs { nhsp: bits(x, 3, 4) as u8 }
        }
        Opcode::Add | Opcode::Sub | Opcode::Mul | Opcode::Div | Opcode::Exp | Opcode::Cmp => {
            let (d, s, v) = rr_parts();
            if v {
                return Err(bad);
            }
            let (d, s) = (work(d)?, work(s)?);
            match op {
                Opcode::Add => I::Add { dst: d, src: s },
                Opcode::Sub => I::Sub { dst: d, src: s },
                Opcode::Mul => I::Mul { dst: d, src: s },
                Opcode::Div => I::Div { dst: d, src: s },
                Opcode::Exp => I::Exp { dst: d, src: s },
                _ => I::Cmp { a: d, b: s },
            }
        }
        Opcode::Mov => {
            let (d, s, v) = rr_parts();
            let dst = if v {
                MovDst::Param(ParamReg::from_id(d as u8).ok_or(bad)?)
            } else {
                MovDst::Reg(work(d)?)
            };
            I::Mov { dst, src: work(s)? }
        }
        Opcode::Wmov => {
            let (d, s, v) = rr_parts();
            if s != 0 {
                return Err(bad);
            }
            I::Wmov { reg: work(d)?, store: v }
        }
        Opcode::Logic => {
            let lop = LogicOp::from_bits(bits(x, 2, 3)).ok_or(bad)?;
            I::Logic { op: lop, dst: work(bits(x, 10, 4))?, src: work(bits(x, 6, 4))? }
        }
        Opcode::Addi | Opcode::Shift => {
            let reg = work(bits(x, 10, 5))?;
            let imm = sign_extend(bits(x, 5, 6), 6) as i8;
            if op == Opcode::Addi {
                I::Addi { dst: reg, imm }
            } else {
                I::Shift { dst: reg, amount: imm }
            }
        }
        Opcode::Load | Opcode::Store => {
            let reg = work(bits(x, 10, 5))?;
            let addr = bits(x, 5, 6) as u8;
            if op == Opcode::Load {
                I::Load { dst: reg, addr }
            } else {
                I::Store { src: reg, addr }
            }
        }
        Opcode::Push | Opcode::Pop | Opcode::Sa => {
            if bits(x, 5, 6) != 0 {
                return Err(bad);
            }
            let reg = work(bits(x, 10, 5))?;
            match op {
                Opcode::Push => I::Push { src: reg },
                Opcode::Pop => I::Pop { dst: reg },
                _ => I::Sa { src: reg },
            }
        }
        Opcode::Sp => {
            if bits(x, 10, 5) != 0 {
                return Err(bad);
            }
            I::Sp { value: bits(x, 5, 6) as u8 }
        }
        Opcode::Ts => {
            if bits(x, 10, 10) != 0 {
                return Err(bad);
            }
            I::Ts { store: bits(x, 0, 1) == 1 }
        }
        Opcode::Jmp => I::Jmp { offset: sign_extend(x, 11) },
        Opcode::Nop => {
            if x != 0 {
                return Err(bad);
            }
            I::Nop
        }
    };
    Ok(instr)
}

/// Indices selected by a hot-code of `width` bits, MSB-first (index 0 is the MSB).
pub fn hot_indices(field: u16, width: u32) -> impl Iterator<Item = usize> {
    (0..width as usize).filter(move |&i| (field >> (width as usize - 1 - i)) & 1 == 1)
}

/// Build a hot-code of `width` bits from MSB-first indices.
pub fn hot_code(indices: &[usize], width: u32) -> u16 {
    indices
        .iter()
        .fold(0u16, |acc, &i| acc | (1 << (width as usize - 1 - i)))
}

/// GSPRS flag bits (MSB-first: fire, compare, adaptive, reset).
pub mod nhsp {
    pub const FIRE: u8 = 0b1000;
    pub const COMPARE: u8 = 0b0100;
    pub const ADAPTIVE: u8 = 0b0010;
    pub const RESET: u8 = 0b0001;
}

/// UPTVM term bits (MSB-first: v, I, v_adp, c0).
pub mod nhvm {
    pub const V: u8 = 0b1000;
    pub const I: u8 = 0b0100;
    pub const V_ADP: u8 = 0b0010;
    pub const C0: u8 = 0b0001;
}

/// UPTIS target (one-hot, MSB-first: I, g, v_adp) and term bits
/// (MSB-first: p3, p4, p5, p6, p7, c1).
pub mod uptis {
    pub const TARGET_I: u8 = 0b100;
    pub const TARGET_G: u8 = 0b010;
    pub const TARGET_V_ADP: u8 = 0b001;
    pub const P3: u8 = 0b100000;
    pub const P4: u8 = 0b010000;
    pub const P5: u8 = 0b001000;
    pub const P6: u8 = 0b000100;
    pub const P7: u8 = 0b000010;
    pub const C1: u8 = 0b000001;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uptwt_triplet_operands() {
        // x0 * y2 * r0 with LP0
        let w = encode(&Instruction::Uptwt { m: 0, n: hot_code(&[0, 5, 6], 9) }).unwrap();
        assert_eq!(w.operand(), 0x10C);
        // x2 * y0 * r0 with LP1
        let w = encode(&Instruction::Uptwt { m: 1, n: hot_code(&[2, 3, 6], 9) }).unwrap();
        assert_eq!(w.operand(), 0x264);
        let w = encode(&Instruction::Uptwt { m: 2, n: hot_code(&[2, 4, 6], 9) }).unwrap();
        assert_eq!(w.operand(), 0x454);
    }

    #[test]
    fn uptvm_lif_operand() {
        let w = encode(&Instruction::Uptvm { nhvm: nhvm::V | nhvm::I | nhvm::C0 }).unwrap();
        assert_eq!(w.operand(), 0x00D);
        assert_eq!(w.opcode_bits(), 5);
    }

    #[test]
    fn gsprs_0xa_flags() {
        let word = InstructionWord::new(Opcode::Gsprs.value(), 0xA);
        let Instruction::Gsprs { nhsp: flags } = decode(word).unwrap() else { panic!() };
        assert_ne!(flags & nhsp::FIRE, 0);
        assert_eq!(flags & nhsp::COMPARE, 0);
        assert_ne!(flags & nhsp::ADAPTIVE, 0);
        assert_eq!(flags & nhsp::RESET, 0);
    }

    #[test]
    fn nop_is_zero_operand() {
        let w = encode(&Instruction::Nop).unwrap();
        assert_eq!(w.operand(), 0);
        assert_eq!(w.opcode_bits(), Opcode::Nop.value());
    }

    #[test]
    fn unassigned_opcodes_are_illegal() {
        assert_eq!(decode(InstructionWord(31 << 11)), Err(Illegal::Opcode(31)));
        assert_eq!(decode(InstructionWord(30 << 11 | 5)), Err(Illegal::Opcode(30)));
    }

    #[test]
    fn field_overflow_names_field() {
        let err = encode(&Instruction::Uptls { k: 8, l: 0, m: 0, n: 0 }).unwrap_err();
        assert_eq!(err.field, "k");
        let err = encode(&Instruction::Uptls { k: 0, l: 0, m: 0, n: 4 }).unwrap_err();
        assert_eq!(err.field, "n");
        let err = encode(&Instruction::Jmp { offset: 1024 }).unwrap_err();
        assert_eq!(err.field, "offset");
    }

    #[test]
    fn reserved_bits_make_words_illegal() {
        let w = InstructionWord::new(Opcode::Uptvm.value(), 0x10D);
        assert!(matches!(decode(w), Err(Illegal::NonCanonical { .. })));
    }

    #[test]
    fn hot_code_roundtrip() {
        let code = hot_code(&[0, 1, 3], 4);
        assert_eq!(code, 0b1101);
        assert_eq!(hot_indices(code, 4).collect::<Vec<_>>(), vec![0, 1, 3]);
    }

    #[test]
    fn exhaustive_roundtrip() {
        let mut legal = 0;
        for w in 0..=u16::MAX {
            if let Ok(i) = decode(InstructionWord(w)) {
                legal += 1;
                assert_eq!(encode(&i).unwrap().0, w, "{i:?}");
            }
        }
        assert!(legal > 20_000);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn legal_words_reencode(bits: u16) {
            if let Ok(i) = decode(InstructionWord(bits)) {
                prop_assert_eq!(encode(&i).unwrap(), InstructionWord(bits));
            }
        }

        #[test]
        fn hot_code_inverts_indices(field in 0u16..512) {
            let idx: Vec<usize> = hot_indices(field, 9).collect();
            prop_assert_eq!(hot_code(&idx, 9), field);
        }
    }
}
