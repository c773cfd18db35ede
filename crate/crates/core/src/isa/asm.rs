// SPDX-License-Identifier: Apache-2.0

//! Text assembler and disassembler.
//!
//! One instruction per line, `;` starts a comment, `label:` may prefix an
//! instruction or stand alone. Neuromorphic instructions take either a raw
//! operand (`UPTVM 0xD`) or named fields (`UPTLS k=3 l=4 m=3 n=1`).

use super::{
    decode, encode, EncodeError, Illegal, Instruction, InstructionWord, LogicOp, MovDst, Opcode,
    RegisterName, WorkReg,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsmError {
    #[error("line {line}: unknown mnemonic `{mnemonic}`")]
    UnknownMnemonic { line: usize, mnemonic: String },
    #[error("line {line}: malformed operand: {message}")]
    MalformedOperand { line: usize, message: String },
    #[error("line {line}: unresolved label `{label}`")]
    UnresolvedLabel { line: usize, label: String },
    #[error("line {line}: duplicate label `{label}`")]
    DuplicateLabel { line: usize, label: String },
}

impl AsmError {
    pub fn line(&self) -> usize {
        match self {
            AsmError::UnknownMnemonic { line, .. }
            | AsmError::MalformedOperand { line, .. }
            | AsmError::UnresolvedLabel { line, .. }
            | AsmError::DuplicateLabel { line, .. } => *line,
        }
    }
}

/// One source statement after label stripping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub line: usize,
    pub labels: Vec<String>,
    pub mnemonic: String,
    pub operands: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssemblyProgram {
    pub statements: Vec<Statement>,
    /// Upper-cased label -> instruction index.
    pub labels: BTreeMap<String, usize>,
    pub words: Vec<InstructionWord>,
}

impl AssemblyProgram {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn label(&self, name: &str) -> Option<usize> {
        self.labels.get(&name.to_ascii_uppercase()).copied()
    }

    pub fn to_text(&self) -> String {
        disassemble(&self.words)
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_int(text: &str) -> Option<i64> {
    let t = text.trim();
    let (neg, body) = match t.as_bytes().first() {
        Some(b'-') => (true, &t[1..]),
        Some(b'+') => (false, &t[1..]),
        _ => (false, t),
    };
    let lower = body.to_ascii_lowercase();
    let v = if let Some(h) = lower.strip_prefix("0x") {
        i64::from_str_radix(h, 16).ok()?
    } else if let Some(b) = lower.strip_prefix("0b") {
        i64::from_str_radix(b, 2).ok()?
    } else {
        lower.parse::<i64>().ok()?
    };
    Some(if neg { -v } else { v })
}

fn split_statement(raw: &str) -> Option<(Vec<String>, Option<(String, Vec<String>)>)> {
    let text = raw.split(';').next().unwrap_or("").trim();
    if text.is_empty() {
        return None;
    }
    let mut rest = text;
    let mut labels = Vec::new();
    while let Some(pos) = rest.find(':') {
        let head = rest[..pos].trim();
        if !is_ident(head) {
            break;
        }
        labels.push(head.to_string());
        rest = rest[pos + 1..].trim();
    }
    if rest.is_empty() {
        return Some((labels, None));
    }
    let mut toks = rest
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_string);
    let mnemonic = toks.next().unwrap_or_default();
    Some((labels, Some((mnemonic, toks.collect()))))
}

/// Assemble source text into resolved instruction words.
pub fn assemble(text: &str) -> Result<AssemblyProgram, AsmError> {
    let mut program = AssemblyProgram::default();
    let mut pending: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some((labels, body)) = split_statement(raw) else { continue };
        for label in labels {
            let key = label.to_ascii_uppercase();
            if program.labels.contains_key(&key) {
                return Err(AsmError::DuplicateLabel { line, label });
            }
            program.labels.insert(key, program.statements.len());
            pending.push(label);
        }
        if let Some((mnemonic, operands)) = body {
            program.statements.push(Statement { line, labels: std::mem::take(&mut pending), mnemonic, operands });
        }
    }
    let mut words = Vec::with_capacity(program.statements.len());
    for (pc, st) in program.statements.iter().enumerate() {
        words.push(assemble_statement(st, pc, &program.labels, program.statements.len())?);
    }
    program.words = words;
    Ok(program)
}

fn malformed(line: usize, message: impl Into<String>) -> AsmError {
    AsmError::MalformedOperand { line, message: message.into() }
}

fn from_encode(line: usize, e: EncodeError) -> AsmError {
    malformed(line, e.to_string())
}

fn work_reg(line: usize, tok: &str) -> Result<WorkReg, AsmError> {
    RegisterName::parse(tok)
        .and_then(RegisterName::work)
        .ok_or_else(|| malformed(line, format!("`{tok}` is not a working register")))
}

fn int_in(line: usize, tok: &str, lo: i64, hi: i64) -> Result<i64, AsmError> {
    let v = parse_int(tok).ok_or_else(|| malformed(line, format!("`{tok}` is not a number")))?;
    if v < lo || v > hi {
        return Err(malformed(line, format!("{v} outside {lo}..={hi}")));
    }
    Ok(v)
}

fn expect_count(st: &Statement, n: usize) -> Result<(), AsmError> {
    if st.operands.len() != n {
        return Err(malformed(
            st.line,
            format!("{} expects {} operand(s), got {}", st.mnemonic, n, st.operands.len()),
        ));
    }
    Ok(())
}

fn neuromorphic_fields(op: Opcode) -> &'static [(&'static str, u32)] {
    match op {
        Opcode::Lsis => &[("ls", 1), ("nhis", 6)],
        Opcode::Ldip => &[("nhip", 8), ("nhic", 3)],
        Opcode::Lsls => &[("ls", 1), ("nhls", 10)],
        Opcode::Ldlp => &[("nhlp", 7), ("nhlc", 4)],
        Opcode::Uptis => &[("ohis", 3), ("nhip", 6)],
        Opcode::Uptvm => &[("nhvm", 4)],
        Opcode::Uptls | Opcode::Uptts => &[("k", 3), ("l", 3), ("m", 3), ("n", 2)],
        Opcode::Uptwt => &[("m", 2), ("n", 9)],
        Opcode::Gsprs => &[("nhsp", 4)],
        _ => &[],
    }
}

fn assemble_neuromorphic(st: &Statement, op: Opcode) -> Result<InstructionWord, AsmError> {
    let line = st.line;
    if st.operands.len() == 1 && !st.operands[0].contains('=') {
        let v = int_in(line, &st.operands[0], 0, 0x7FF)?;
        let w = InstructionWord::new(op.value(), v as u16);
        return match decode(w) {
            Ok(_) => Ok(w),
            Err(_) => Err(malformed(line, format!("{op} operand 0x{v:X} sets reserved bits"))),
        };
    }
    let spec = neuromorphic_fields(op);
    let mut vals = vec![0u16; spec.len()];
    for tok in &st.operands {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| malformed(line, format!("expected field=value, got `{tok}`")))?;
        let idx = spec
            .iter()
            .position(|(name, _)| name.eq_ignore_ascii_case(k.trim()))
            .ok_or_else(|| malformed(line, format!("{op} has no field `{k}`")))?;
        let (name, bits) = spec[idx];
        let v = parse_int(v).ok_or_else(|| malformed(line, format!("bad value for `{name}`")))?;
        if v < 0 || v >> bits != 0 {
            return Err(malformed(line, format!("field `{name}` value {v} does not fit in {bits} bits")));
        }
        vals[idx] = v as u16;
    }
    let i = match op {
        Opcode::Lsis => Instruction::Lsis { store: vals[0] == 1, nhis: vals[1] as u8 },
        Opcode::Ldip => Instruction::Ldip { nhip: vals[0] as u8, nhic: vals[1] as u8 },
        Opcode::Lsls => Instruction::Lsls { store: vals[0] == 1, nhls: vals[1] },
        Opcode::Ldlp => Instruction::Ldlp { nhlp: vals[0] as u8, nhlc: vals[1] as u8 },
        Opcode::Uptis => Instruction::Uptis { ohis: vals[0] as u8, nhip: vals[1] as u8 },
        Opcode::Uptvm => Instruction::Uptvm { nhvm: vals[0] as u8 },
        Opcode::Uptls => Instruction::Uptls { k: vals[0] as u8, l: vals[1] as u8, m: vals[2] as u8, n: vals[3] as u8 },
        Opcode::Uptts => Instruction::Uptts { k: vals[0] as u8, l: vals[1] as u8, m: vals[2] as u8, n: vals[3] as u8 },
        Opcode::Uptwt => Instruction::Uptwt { m: vals[0] as u8, n: vals[1] },
        _ => Instruction::Gsprs { nhsp: vals[0] as u8 },
    };
    encode(&i).map_err(|e| from_encode(line, e))
}

fn assemble_statement(
    st: &Statement,
    pc: usize,
    labels: &BTreeMap<String, usize>,
    len: usize,
) -> Result<InstructionWord, AsmError> {
    let line = st.line;
    if st.mnemonic.eq_ignore_ascii_case(".word") {
        expect_count(st, 1)?;
        return Ok(InstructionWord(int_in(line, &st.operands[0], 0, 0xFFFF)? as u16));
    }
    let op = Opcode::from_mnemonic(&st.mnemonic)
        .ok_or_else(|| AsmError::UnknownMnemonic { line, mnemonic: st.mnemonic.clone() })?;
    if op.is_neuromorphic() {
        return assemble_neuromorphic(st, op);
    }
    let ops = &st.operands;
    let two = |st: &Statement| -> Result<(WorkReg, WorkReg), AsmError> {
        expect_count(st, 2)?;
        Ok((work_reg(line, &st.operands[0])?, work_reg(line, &st.operands[1])?))
    };
    let instr = match op {
        Opcode::Add | Opcode::Sub | Opcode::Mul | Opcode::Div | Opcode::Exp | Opcode::Cmp => {
            let (a, b) = two(st)?;
            match op {
                Opcode::Add => Instruction::Add { dst: a, src: b },
                Opcode::Sub => Instruction::Sub { dst: a, src: b },
                Opcode::Mul => Instruction::Mul { dst: a, src: b },
                Opcode::Div => Instruction::Div { dst: a, src: b },
                Opcode::Exp => Instruction::Exp { dst: a, src: b },
                _ => Instruction::Cmp { a, b },
            }
        }
        Opcode::Mov => {
            expect_count(st, 2)?;
            let name = RegisterName::parse(&ops[0])
                .ok_or_else(|| malformed(line, format!("`{}` is not a register", ops[0])))?;
            let dst = match (name.work(), name.param()) {
                (Some(w), _) => MovDst::Reg(w),
                (None, Some(p)) => MovDst::Param(p),
                _ => return Err(malformed(line, format!("`{}` is not writable", ops[0]))),
            };
            Instruction::Mov { dst, src: work_reg(line, &ops[1])? }
        }
        Opcode::Wmov => {
            if ops.len() == 3 {
                let (a, b) = (work_reg(line, &ops[0])?, work_reg(line, &ops[1])?);
                let store = match ops[2].to_ascii_uppercase().as_str() {
                    "STORE" => true,
                    "LOAD" => false,
                    other => return Err(malformed(line, format!("expected LOAD or STORE, got `{other}`"))),
                };
                if a != WorkReg::W && b != WorkReg::W {
                    return Err(malformed(line, "WMOV needs W on one side"));
                }
                Instruction::Wmov { reg: if store { b } else { a }, store }
            } else {
                let (a, b) = two(st)?;
                if a == WorkReg::W {
                    Instruction::Wmov { reg: b, store: true }
                } else if b == WorkReg::W {
                    Instruction::Wmov { reg: a, store: false }
                } else {
                    return Err(malformed(line, "WMOV needs W on one side"));
                }
            }
        }
        Opcode::Logic => {
            expect_count(st, 3)?;
            let mode = match ops[0].to_ascii_uppercase().as_str() {
                "AND" => LogicOp::And,
                "OR" => LogicOp::Or,
                "XOR" => LogicOp::Xor,
                "NOT" => LogicOp::Not,
                other => parse_int(other)
                    .and_then(|v| u16::try_from(v).ok())
                    .and_then(LogicOp::from_bits)
                    .ok_or_else(|| malformed(line, format!("unknown LOGIC mode `{other}`")))?,
            };
            let i = Instruction::Logic { op: mode, dst: work_reg(line, &ops[1])?, src: work_reg(line, &ops[2])? };
            return encode(&i).map_err(|e| from_encode(line, e));
        }
        Opcode::Addi | Opcode::Shift => {
            expect_count(st, 2)?;
            let r = work_reg(line, &ops[0])?;
            let v = int_in(line, &ops[1], -32, 31)? as i8;
            if op == Opcode::Addi {
                Instruction::Addi { dst: r, imm: v }
            } else {
                Instruction::Shift { dst: r, amount: v }
            }
        }
        Opcode::Load | Opcode::Store => {
            expect_count(st, 2)?;
            let r = work_reg(line, &ops[0])?;
            let addr = int_in(line, &ops[1], 0, 63)? as u8;
            if op == Opcode::Load {
                Instruction::Load { dst: r, addr }
            } else {
                Instruction::Store { src: r, addr }
            }
        }
        Opcode::Push | Opcode::Pop | Opcode::Sa => {
            expect_count(st, 1)?;
            let r = work_reg(line, &ops[0])?;
            match op {
                Opcode::Push => Instruction::Push { src: r },
                Opcode::Pop => Instruction::Pop { dst: r },
                _ => Instruction::Sa { src: r },
            }
        }
        Opcode::Sp => {
            expect_count(st, 1)?;
            Instruction::Sp { value: int_in(line, &ops[0], 0, 63)? as u8 }
        }
        Opcode::Ts => {
            expect_count(st, 1)?;
            let store = match ops[0].to_ascii_uppercase().as_str() {
                "STORE" | "1" => true,
                "LOAD" | "0" => false,
                other => return Err(malformed(line, format!("expected LOAD or STORE, got `{other}`"))),
            };
            Instruction::Ts { store }
        }
        Opcode::Jmp => {
            expect_count(st, 1)?;
            let offset = match parse_int(&ops[0]) {
                Some(v) => v,
                None => {
                    let key = ops[0].to_ascii_uppercase();
                    let target = labels
                        .get(&key)
                        .copied()
                        .filter(|&t| t < len)
                        .ok_or_else(|| AsmError::UnresolvedLabel { line, label: ops[0].clone() })?;
                    target as i64 - pc as i64
                }
            };
            if !(-1024..=1023).contains(&offset) {
                return Err(malformed(line, format!("jump offset {offset} out of range")));
            }
            Instruction::Jmp { offset: offset as i16 }
        }
        Opcode::Nop => {
            expect_count(st, 0)?;
            Instruction::Nop
        }
        _ => unreachable!("neuromorphic opcodes handled above"),
    };
    encode(&instr).map_err(|e| from_encode(line, e))
}

/// Render one word as assembly text.
pub fn disassemble_word(w: InstructionWord) -> String {
    let instr = match decode(w) {
        Ok(i) => i,
        Err(Illegal::Opcode(_)) | Err(Illegal::NonCanonical { .. }) => return format!(".word 0x{:04X}", w.0),
    };
    let op = instr.opcode();
    if op.is_neuromorphic() {
        return format!("{} 0x{:X}", op, w.operand());
    }
    use Instruction as I;
    match instr {
        I::Add { dst, src } | I::Sub { dst, src } | I::Mul { dst, src } | I::Div { dst, src } | I::Exp { dst, src } => {
            format!("{op} {dst}, {src}")
        }
        I::Cmp { a, b } => format!("CMP {a}, {b}"),
        I::Mov { dst: MovDst::Reg(d), src } => format!("MOV {d}, {src}"),
        I::Mov { dst: MovDst::Param(p), src } => format!("MOV {p}, {src}"),
        I::Wmov { reg, store } if reg == WorkReg::W => {
            format!("WMOV W, W, {}", if store { "STORE" } else { "LOAD" })
        }
        I::Wmov { reg, store: true } => format!("WMOV W, {reg}"),
        I::Wmov { reg, store: false } => format!("WMOV {reg}, W"),
        I::Logic { op: lop, dst, src } => format!("LOGIC {}, {dst}, {src}", lop.name()),
        I::Addi { dst, imm } => format!("ADDI {dst}, {imm}"),
        I::Shift { dst, amount } => format!("SHIFT {dst}, {amount}"),
        I::Load { dst, addr } => format!("LOAD {dst}, {addr}"),
        I::Store { src, addr } => format!("STORE {src}, {addr}"),
        I::Push { src } => format!("PUSH {src}"),
        I::Pop { dst } => format!("POP {dst}"),
        I::Sa { src } => format!("SA {src}"),
        I::Sp { value } => format!("SP {value}"),
        I::Ts { store } => format!("TS {}", if store { "STORE" } else { "LOAD" }),
        I::Jmp { offset } => format!("JMP {offset}"),
        I::Nop => "NOP".to_string(),
        _ => unreachable!(),
    }
}

/// Render a word sequence as assembly text, one line per word.
pub fn disassemble(words: &[InstructionWord]) -> String {
    let mut out = String::new();
    for &w in words {
        let _ = writeln!(out, "{}", disassemble_word(w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lif_program() {
        let p = assemble("UPTVM 0xD\nGSPRS 0xA").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(disassemble(&p.words), "UPTVM 0xD\nGSPRS 0xA\n");
    }

    #[test]
    fn empty_source() {
        let p = assemble("").unwrap();
        assert!(p.is_empty());
        assert_eq!(disassemble(&p.words), "");
    }

    #[test]
    fn labels_on_instruction_lines() {
        let src = "CMP RT0 S0\nJMP Keep\nJMP UP\nSUB W RT4\nNOP\nUp: ADD W RT4\nKeep: NOP\n";
        let p = assemble(src).unwrap();
        assert_eq!(p.len(), 7);
        assert_eq!(p.label("keep"), Some(6));
        assert_eq!(decode(p.words[1]).unwrap(), Instruction::Jmp { offset: 5 });
        assert_eq!(decode(p.words[2]).unwrap(), Instruction::Jmp { offset: 3 });
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = assemble("UPTVM 0xD\nFROB 1").unwrap_err();
        assert_eq!(e, AsmError::UnknownMnemonic { line: 2, mnemonic: "FROB".into() });
        let e = assemble("; c\nJMP nowhere").unwrap_err();
        assert_eq!(e.line(), 2);
        let e = assemble("UPTLS k=9").unwrap_err();
        assert!(e.to_string().contains("`k`"), "{e}");
        let e = assemble("UPTVM 0x1FF").unwrap_err();
        assert_eq!(e.line(), 1);
    }

    #[test]
    fn named_fields_match_raw() {
        let a = assemble("UPTWT m=0 n=0b100001100").unwrap();
        assert_eq!(a.words[0].operand(), 0x10C);
        let b = assemble("uptwt 0x10c").unwrap();
        assert_eq!(a.words, b.words);
    }

    #[test]
    fn illegal_words_escape() {
        let text = disassemble(&[InstructionWord(0xFFFF)]);
        assert_eq!(text, ".word 0xFFFF\n");
        assert_eq!(assemble(&text).unwrap().words, vec![InstructionWord(0xFFFF)]);
    }

    proptest! {
        #[test]
        fn text_roundtrip(words in proptest::collection::vec(any::<u16>(), 0..64)) {
            let words: Vec<_> = words.into_iter().map(InstructionWord).collect();
            let text = disassemble(&words);
            let back = assemble(&text).unwrap();
            prop_assert_eq!(back.words, words);
        }
    }
}
