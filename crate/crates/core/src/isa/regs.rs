// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use std::fmt;

/// Register banks visible to programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bank {
    S,
    Ls,
    Ip,
    Ic,
    Lp,
    Lc,
    Tr,
    W,
    Vth,
    V0,
    Flag,
}

impl Bank {
    /// Number of registers in the bank.
    pub fn len(self) -> u8 {
        match self {
            Bank::S => 6,
            Bank::Ls => 9,
            Bank::Ip => 9,
            Bank::Ic => 3,
            Bank::Lp | Bank::Lc | Bank::Tr => 8,
            Bank::W | Bank::Vth | Bank::V0 | Bank::Flag => 1,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Bank::S => "S",
            Bank::Ls => "LS",
            Bank::Ip => "IP",
            Bank::Ic => "IC",
            Bank::Lp => "LP",
            Bank::Lc => "LC",
            Bank::Tr => "TR",
            Bank::W => "W",
            Bank::Vth => "VTH",
            Bank::V0 => "V0",
            Bank::Flag => "FLAG",
        }
    }
}

/// A named register. `S0..S5` alias v, g, I, h, v_adp, v_th.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegisterName {
    pub bank: Bank,
    pub index: u8,
}

pub const S_V: u8 = 0;
pub const S_G: u8 = 1;
pub const S_I: u8 = 2;
pub const S_H: u8 = 3;
pub const S_VADP: u8 = 4;
pub const S_VTH: u8 = 5;

impl RegisterName {
    pub fn new(bank: Bank, index: u8) -> Option<RegisterName> {
        (index < bank.len()).then_some(RegisterName { bank, index })
    }

    /// Parse a register name, accepting the usual aliases
    /// (`RT`/`TR`, `P`/`IP`, `C`/`IC`, `V`, `VM`, `G`, `I`, `H`, `VADP`, `VTH`,
    /// trace names `X0..R2`).
    pub fn parse(text: &str) -> Option<RegisterName> {
        let up = text.trim().to_ascii_uppercase();
        let fixed = match up.as_str() {
            "V" | "VM" => Some((Bank::S, S_V)),
            "G" => Some((Bank::S, S_G)),
            "I" => Some((Bank::S, S_I)),
            "H" => Some((Bank::S, S_H)),
            "VADP" | "V_ADP" => Some((Bank::S, S_VADP)),
            "VTH" | "V_TH" => Some((Bank::Vth, 0)),
            "W" => Some((Bank::W, 0)),
            "V0" => Some((Bank::V0, 0)),
            "FLAG" => Some((Bank::Flag, 0)),
            _ => None,
        };
        if let Some((bank, index)) = fixed {
            return Some(RegisterName { bank, index });
        }
        let traces = ["X0", "X1", "X2", "Y0", "Y1", "Y2", "R0", "R1", "R2"];
        if let Some(i) = traces.iter().position(|t| *t == up) {
            return Some(RegisterName { bank: Bank::Ls, index: i as u8 });
        }
        let split = up.find(|c: char| c.is_ascii_digit())?;
        let (prefix, digits) = up.split_at(split);
        let index: u8 = digits.parse().ok()?;
        let bank = match prefix {
            "S" => Bank::S,
            "LS" => Bank::Ls,
            "IP" | "P" => Bank::Ip,
            "IC" | "C" => Bank::Ic,
            "LP" => Bank::Lp,
            "LC" => Bank::Lc,
            "TR" | "RT" => Bank::Tr,
            _ => return None,
        };
        RegisterName::new(bank, index)
    }

    /// Working-register form, if the register is directly addressable by
    /// extended instructions.
    pub fn work(self) -> Option<WorkReg> {
        let id = match self.bank {
            Bank::Tr => self.index,
            Bank::S => 8 + self.index,
            Bank::Vth => 8 + S_VTH,
            Bank::Ls => 14 + self.index,
            Bank::W => 23,
            Bank::V0 => 24,
            Bank::Flag => 25,
            _ => return None,
        };
        Some(WorkReg(id))
    }

    pub fn param(self) -> Option<ParamReg> {
        let id = match self.bank {
            Bank::Ip => self.index,
            Bank::Ic => 9 + self.index,
            Bank::Lp => 12 + self.index,
            Bank::Lc => 20 + self.index,
            _ => return None,
        };
        Some(ParamReg(id))
    }
}

impl fmt::Display for RegisterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bank.len() == 1 {
            f.write_str(self.bank.prefix())
        } else {
            write!(f, "{}{}", self.bank.prefix(), self.index)
        }
    }
}

/// Register addressable by extended instructions (5-bit id).
///
/// Ids: 0..=7 TR0..TR7, 8..=13 S0..S5, 14..=22 LS0..LS8, 23 W, 24 V0, 25 FLAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WorkReg(u8);

impl WorkReg {
    pub const W: WorkReg = WorkReg(23);
    pub const V0: WorkReg = WorkReg(24);
    pub const FLAG: WorkReg = WorkReg(25);
    pub const COUNT: u8 = 26;

    pub fn from_id(id: u8) -> Option<WorkReg> {
        (id < Self::COUNT).then_some(WorkReg(id))
    }

    pub fn tr(i: u8) -> WorkReg {
        assert!(i < 8);
        WorkReg(i)
    }

    pub fn s(i: u8) -> WorkReg {
        assert!(i < 6);
        WorkReg(8 + i)
    }

    pub fn ls(i: u8) -> WorkReg {
        assert!(i < 9);
        WorkReg(14 + i)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn name(self) -> RegisterName {
        let (bank, index) = match self.0 {
            0..=7 => (Bank::Tr, self.0),
            8..=13 => (Bank::S, self.0 - 8),
            14..=22 => (Bank::Ls, self.0 - 14),
            23 => (Bank::W, 0),
            24 => (Bank::V0, 0),
            _ => (Bank::Flag, 0),
        };
        RegisterName { bank, index }
    }
}

impl fmt::Display for WorkReg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.name().fmt(f)
    }
}

/// Parameter-bank slot (5-bit id), writable by `MOV`.
///
/// Ids: 0..=8 IP0..IP8, 9..=11 IC0..IC2, 12..=19 LP0..LP7, 20..=27 LC0..LC7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamReg(u8);

impl ParamReg {
    pub const COUNT: u8 = 28;

    pub fn from_id(id: u8) -> Option<ParamReg> {
        (id < Self::COUNT).then_some(ParamReg(id))
    }

    pub fn ip(i: u8) -> ParamReg {
        assert!(i < 9);
        ParamReg(i)
    }

    pub fn ic(i: u8) -> ParamReg {
        assert!(i < 3);
        ParamReg(9 + i)
    }

    pub fn lp(i: u8) -> ParamReg {
        assert!(i < 8);
        ParamReg(12 + i)
    }

    pub fn lc(i: u8) -> ParamReg {
        assert!(i < 8);
        ParamReg(20 + i)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    pub fn name(self) -> RegisterName {
        let (bank, index) = match self.0 {
            0..=8 => (Bank::Ip, self.0),
            9..=11 => (Bank::Ic, self.0 - 9),
            12..=19 => (Bank::Lp, self.0 - 12),
            _ => (Bank::Lc, self.0 - 20),
        };
        RegisterName { bank, index }
    }
}

impl fmt::Display for ParamReg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.name().fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliases() {
        assert_eq!(RegisterName::parse("RT0").unwrap().work(), Some(WorkReg::tr(0)));
        assert_eq!(RegisterName::parse("p0").unwrap().param(), Some(ParamReg::ip(0)));
        assert_eq!(RegisterName::parse("C2").unwrap().param(), Some(ParamReg::ic(2)));
        assert_eq!(RegisterName::parse("VTH").unwrap().work(), Some(WorkReg::s(5)));
        assert_eq!(RegisterName::parse("y2").unwrap().work(), Some(WorkReg::ls(5)));
        assert_eq!(RegisterName::parse("IP9"), None);
        assert_eq!(RegisterName::parse("LS9"), None);
    }

    #[test]
    fn ids_roundtrip_through_names() {
        for id in 0..WorkReg::COUNT {
            let r = WorkReg::from_id(id).unwrap();
            assert_eq!(RegisterName::parse(&r.to_string()).unwrap().work(), Some(r));
        }
        for id in 0..ParamReg::COUNT {
            let p = ParamReg::from_id(id).unwrap();
            assert_eq!(RegisterName::parse(&p.to_string()).unwrap().param(), Some(p));
        }
    }
}
