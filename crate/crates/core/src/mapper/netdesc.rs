// SPDX-License-Identifier: Apache-2.0

//! Network description: populations, projections and their text form.
//!
//! ```text
//! [population exc]
//! size = 100
//! model = lif
//! p0 = 0.9
//! v_th = 1.0
//!
//! [projection exc_to_exc]
//! source = exc
//! target = exc
//! pattern = all_to_all
//! weight = 0.25
//! ```
//!
//! See the repository README for the full key list.

use ini::Ini;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DescError {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("[{section}] {message}")]
    Section { section: String, message: String },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

fn sec_err(section: &str, message: impl Into<String>) -> DescError {
    DescError::Section { section: section.to_string(), message: message.into() }
}

/// External input: each neuron independently receives `weight` (state
/// units) with probability `rate` per tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonInput {
    pub rate: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub name: String,
    pub size: u32,
    pub model: String,
    /// Learning program applied to plastic synapses targeting this population.
    pub learning: Option<String>,
    /// Schema values overriding template defaults.
    pub params: BTreeMap<String, f64>,
    pub weight_shift: u8,
    pub input: Option<PoissonInput>,
    /// Visit only synapses with an event each tick.
    pub sparse_learning: bool,
    /// Use the output-layer entry of a layered learning program.
    pub output_layer: bool,
}

impl Population {
    pub fn new(name: &str, size: u32, model: &str) -> Population {
        Population {
            name: name.to_string(),
            size,
            model: model.to_string(),
            learning: None,
            params: BTreeMap::new(),
            weight_shift: 0,
            input: None,
            sparse_learning: false,
            output_layer: false,
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Population {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// Convolution geometry. Neuron index of `(x, y, c)` is `(y * w + x) * c_total + c`
/// for both input and output populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_w: u32,
    pub in_h: u32,
    pub in_c: u32,
    pub kernel: u32,
    pub stride: u32,
    pub out_c: u32,
}

impl ConvSpec {
    pub fn out_w(&self) -> u32 {
        (self.in_w - self.kernel) / self.stride + 1
    }

    pub fn out_h(&self) -> u32 {
        (self.in_h - self.kernel) / self.stride + 1
    }

    pub fn in_size(&self) -> u32 {
        self.in_w * self.in_h * self.in_c
    }

    pub fn out_size(&self) -> u32 {
        self.out_w() * self.out_h() * self.out_c
    }

    pub fn kernel_len(&self) -> usize {
        (self.out_c * self.in_c * self.kernel * self.kernel) as usize
    }

    /// Index into the `[co][ci][ky][kx]` weight list.
    pub fn weight_index(&self, co: u32, ci: u32, ky: u32, kx: u32) -> usize {
        (((co * self.in_c + ci) * self.kernel + ky) * self.kernel + kx) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    AllToAll { allow_self: bool },
    OneToOne,
    OneToAll { source_neuron: u32 },
    /// `(source, target, raw weight override)`.
    Explicit(Vec<(u32, u32, Option<i32>)>),
    Conv2d(ConvSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// One value in target state units.
    Uniform(f64),
    /// Stored integers in pattern order.
    Raw(Vec<i32>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub name: String,
    pub source: String,
    pub target: String,
    pub pattern: Pattern,
    pub weights: WeightSpec,
    pub bits: Option<u8>,
    pub plastic: bool,
}

impl Projection {
    pub fn new(name: &str, source: &str, target: &str, pattern: Pattern, weights: WeightSpec) -> Projection {
        Projection {
            name: name.to_string(),
            source: source.to_string(),
            target: target.to_string(),
            pattern,
            weights,
            bits: None,
            plastic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkDescription {
    pub populations: Vec<Population>,
    pub projections: Vec<Projection>,
}

fn parse_num<T: std::str::FromStr>(section: &str, key: &str, v: &str) -> Result<T, DescError> {
    v.trim().parse().map_err(|_| sec_err(section, format!("{key}: cannot parse {v:?}")))
}

fn parse_bool(section: &str, key: &str, v: &str) -> Result<bool, DescError> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(sec_err(section, format!("{key}: expected true or false, got {v:?}"))),
    }
}

fn parse_list(section: &str, key: &str, v: &str) -> Result<Vec<i32>, DescError> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(section, key, s))
        .collect()
}

/// `src>dst` or `src>dst:raw`, comma separated.
fn parse_pairs(section: &str, v: &str) -> Result<Vec<(u32, u32, Option<i32>)>, DescError> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (edge, w) = match item.split_once(':') {
            Some((e, w)) => (e, Some(parse_num(section, "pairs", w)?)),
            None => (item, None),
        };
        let (s, t) = edge.split_once('>').ok_or_else(|| sec_err(section, format!("pairs: bad item {item:?}")))?;
        out.push((parse_num(section, "pairs", s)?, parse_num(section, "pairs", t)?, w));
    }
    Ok(out)
}

/// `WxHxC`.
fn parse_shape(section: &str, v: &str) -> Result<(u32, u32, u32), DescError> {
    let parts: Vec<u32> = v.split('x').map(|p| parse_num(section, "in_shape", p)).collect::<Result<_, _>>()?;
    match parts[..] {
        [w, h, c] => Ok((w, h, c)),
        [w, h] => Ok((w, h, 1)),
        _ => Err(sec_err(section, format!("in_shape: expected WxHxC, got {v:?}"))),
    }
}

fn read_blob(base: Option<&Path>, section: &str, file: &str) -> Result<Vec<i32>, DescError> {
    let path = match base {
        Some(b) => b.join(file),
        None => Path::new(file).to_path_buf(),
    };
    let bytes = std::fs::read(&path)
        .map_err(|e| DescError::Io { path: path.display().to_string(), message: e.to_string() })?;
    if bytes.len() % 4 != 0 {
        return Err(sec_err(section, format!("weights_file {file}: length {} is not a multiple of 4", bytes.len())));
    }
    Ok(bytes.chunks_exact(4).map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

impl NetworkDescription {
    pub fn population(&self, name: &str) -> Option<(usize, &Population)> {
        self.populations.iter().enumerate().find(|(_, p)| p.name == name)
    }

    pub fn neuron_count(&self) -> u64 {
        self.populations.iter().map(|p| p.size as u64).sum()
    }

    pub fn parse(text: &str) -> Result<NetworkDescription, DescError> {
        Self::parse_with_base(text, None)
    }

    pub fn load(path: &Path) -> Result<NetworkDescription, DescError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DescError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse_with_base(&text, path.parent())
    }

    /// Parse; `weights_file` paths resolve against `base`.
    pub fn parse_with_base(text: &str, base: Option<&Path>) -> Result<NetworkDescription, DescError> {
        let ini = Ini::load_from_str(text).map_err(|e| DescError::Syntax(e.to_string()))?;
        let mut net = NetworkDescription::default();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if props.iter().next().is_some() {
                    return Err(DescError::Syntax("key outside any section".into()));
                }
                continue;
            };
            let (kind, id) = name.split_once(' ').map(|(k, i)| (k, i.trim())).unwrap_or((name, ""));
            if id.is_empty() {
                return Err(sec_err(name, "section needs a name, e.g. [population exc]"));
            }
            let kv: Vec<(&str, &str)> = props.iter().collect();
            match kind {
                "population" => net.populations.push(Self::population_section(id, &kv)?),
                "projection" => net.projections.push(Self::projection_section(id, &kv, base)?),
                _ => return Err(sec_err(name, format!("unknown section kind {kind:?}"))),
            }
        }
        net.validate()?;
        Ok(net)
    }

    fn population_section(id: &str, kv: &[(&str, &str)]) -> Result<Population, DescError> {
        let mut p = Population::new(id, 0, "");
        let mut size = None;
        let (mut rate, mut weight) = (None, None);
        for &(k, v) in kv {
            match k {
                "size" => size = Some(parse_num(id, k, v)?),
                "model" => p.model = v.trim().to_string(),
                "learning" => p.learning = Some(v.trim().to_string()),
                "weight_shift" => p.weight_shift = parse_num(id, k, v)?,
                "input_rate" => rate = Some(parse_num(id, k, v)?),
                "input_weight" => weight = Some(parse_num(id, k, v)?),
                "sparse_learning" => p.sparse_learning = parse_bool(id, k, v)?,
                "layer" => {
                    p.output_layer = match v.trim() {
                        "hidden" => false,
                        "output" => true,
                        other => return Err(sec_err(id, format!("layer: expected hidden or output, got {other:?}"))),
                    }
                }
                _ => {
                    let x: f64 = parse_num(id, k, v)?;
                    p.params.insert(k.to_string(), x);
                }
            }
        }
        p.size = size.ok_or_else(|| sec_err(id, "missing size"))?;
        if p.model.is_empty() {
            return Err(sec_err(id, "missing model"));
        }
        p.input = match (rate, weight) {
            (None, None) => None,
            (Some(rate), Some(weight)) => Some(PoissonInput { rate, weight }),
            _ => return Err(sec_err(id, "input_rate and input_weight go together")),
        };
        Ok(p)
    }

    fn projection_section(id: &str, kv: &[(&str, &str)], base: Option<&Path>) -> Result<Projection, DescError> {
        let get = |key: &str| kv.iter().rev().find(|(k, _)| *k == key).map(|(_, v)| v.trim());
        let known = [
            "source", "target", "pattern", "weight", "weights", "weights_file", "bits", "plastic", "allow_self",
            "source_neuron", "pairs", "in_shape", "kernel", "stride", "out_channels",
        ];
        if let Some((k, _)) = kv.iter().find(|(k, _)| !known.contains(k)) {
            return Err(sec_err(id, format!("unknown key {k:?}")));
        }
        let source = get("source").ok_or_else(|| sec_err(id, "missing source"))?;
        let target = get("target").ok_or_else(|| sec_err(id, "missing target"))?;
        let pattern = match get("pattern").ok_or_else(|| sec_err(id, "missing pattern"))? {
            "all_to_all" => Pattern::AllToAll {
                allow_self: get("allow_self").map(|v| parse_bool(id, "allow_self", v)).transpose()?.unwrap_or(true),
            },
            "one_to_one" => Pattern::OneToOne,
            "one_to_all" => Pattern::OneToAll {
                source_neuron: get("source_neuron").map(|v| parse_num(id, "source_neuron", v)).transpose()?.unwrap_or(0),
            },
            "explicit" => Pattern::Explicit(parse_pairs(id, get("pairs").ok_or_else(|| sec_err(id, "missing pairs"))?)?),
            "conv2d" => {
                let (in_w, in_h, in_c) = parse_shape(id, get("in_shape").ok_or_else(|| sec_err(id, "missing in_shape"))?)?;
                let num = |k: &str, d: Option<u32>| -> Result<u32, DescError> {
                    match get(k) {
                        Some(v) => parse_num(id, k, v),
                        None => d.ok_or_else(|| sec_err(id, format!("missing {k}"))),
                    }
                };
                Pattern::Conv2d(ConvSpec {
                    in_w,
                    in_h,
                    in_c,
                    kernel: num("kernel", None)?,
                    stride: num("stride", Some(1))?,
                    out_c: num("out_channels", Some(1))?,
                })
            }
            other => return Err(sec_err(id, format!("unknown pattern {other:?}"))),
        };
        let weights = match (get("weight"), get("weights"), get("weights_file")) {
            (Some(w), None, None) => WeightSpec::Uniform(parse_num(id, "weight", w)?),
            (None, Some(list), None) => WeightSpec::Raw(parse_list(id, "weights", list)?),
            (None, None, Some(file)) => WeightSpec::Raw(read_blob(base, id, file)?),
            (None, None, None) if matches!(pattern, Pattern::Explicit(ref p) if p.iter().all(|e| e.2.is_some())) => {
                WeightSpec::Raw(Vec::new())
            }
            _ => return Err(sec_err(id, "exactly one of weight, weights, weights_file is required")),
        };
        Ok(Projection {
            name: id.to_string(),
            source: source.to_string(),
            target: target.to_string(),
            pattern,
            weights,
            bits: get("bits").map(|v| parse_num(id, "bits", v)).transpose()?,
            plastic: get("plastic").map(|v| parse_bool(id, "plastic", v)).transpose()?.unwrap_or(false),
        })
    }

    /// Reference resolution and shape checks.
    pub fn validate(&self) -> Result<(), DescError> {
        let mut names = std::collections::BTreeSet::new();
        for p in &self.populations {
            if !names.insert(p.name.as_str()) {
                return Err(sec_err(&p.name, "duplicate population name"));
            }
            if let Some(i) = p.input {
                if !(0.0..=1.0).contains(&i.rate) || !i.weight.is_finite() {
                    return Err(sec_err(&p.name, "input_rate must lie in [0, 1]"));
                }
            }
        }
        for j in &self.projections {
            let (_, s) = self.population(&j.source).ok_or_else(|| sec_err(&j.name, format!("unknown source {:?}", j.source)))?;
            let (_, t) = self.population(&j.target).ok_or_else(|| sec_err(&j.name, format!("unknown target {:?}", j.target)))?;
            if j.plastic && t.learning.is_none() {
                return Err(sec_err(&j.name, format!("plastic projection into {:?}, which has no learning program", t.name)));
            }
            let expect_raw = match &j.pattern {
                Pattern::AllToAll { .. } => (s.size as usize) * (t.size as usize),
                Pattern::OneToOne => {
                    if s.size != t.size {
                        return Err(sec_err(&j.name, format!("one_to_one needs equal sizes, got {} and {}", s.size, t.size)));
                    }
                    s.size as usize
                }
                Pattern::OneToAll { source_neuron } => {
                    if *source_neuron >= s.size {
                        return Err(sec_err(&j.name, format!("source_neuron {source_neuron} out of range")));
                    }
                    t.size as usize
                }
                Pattern::Explicit(pairs) => {
                    if let Some(&(a, b, _)) = pairs.iter().find(|(a, b, _)| *a >= s.size || *b >= t.size) {
                        return Err(sec_err(&j.name, format!("pair {a}>{b} out of range")));
                    }
                    let mut seen = std::collections::BTreeSet::new();
                    if let Some(&(a, b, _)) = pairs.iter().find(|(a, b, _)| !seen.insert((*a, *b))) {
                        return Err(sec_err(&j.name, format!("duplicate pair {a}>{b}")));
                    }
                    if let WeightSpec::Raw(w) = &j.weights {
                        if pairs.iter().any(|p| p.2.is_none()) && w.len() != pairs.len() {
                            return Err(sec_err(&j.name, format!("expected {} weights, got {}", pairs.len(), w.len())));
                        }
                    }
                    continue;
                }
                Pattern::Conv2d(c) => {
                    if c.kernel == 0 || c.stride == 0 || c.kernel > c.in_w || c.kernel > c.in_h || c.in_c == 0 || c.out_c == 0 {
                        return Err(sec_err(&j.name, "inconsistent conv2d geometry"));
                    }
                    if c.in_size() != s.size || c.out_size() != t.size {
                        return Err(sec_err(
                            &j.name,
                            format!(
                                "conv2d expects source size {} and target size {} ({}x{}x{}), got {} and {}",
                                c.in_size(),
                                c.out_size(),
                                c.out_w(),
                                c.out_h(),
                                c.out_c,
                                s.size,
                                t.size
                            ),
                        ));
                    }
                    c.kernel_len()
                }
            };
            if let WeightSpec::Raw(w) = &j.weights {
                if w.len() != expect_raw {
                    return Err(sec_err(&j.name, format!("expected {expect_raw} weights, got {}", w.len())));
                }
            }
            if let Some(b) = j.bits {
                if !crate::connectivity::WIDTHS.contains(&b) {
                    return Err(sec_err(&j.name, format!("bits must be one of {:?}", crate::connectivity::WIDTHS)));
                }
            }
        }
        Ok(())
    }

    /// Text form accepted by [`NetworkDescription::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.populations {
            let _ = writeln!(s, "[population {}]\nsize = {}\nmodel = {}", p.name, p.size, p.model);
            if let Some(l) = &p.learning {
                let _ = writeln!(s, "learning = {l}");
            }
            if p.weight_shift != 0 {
                let _ = writeln!(s, "weight_shift = {}", p.weight_shift);
            }
            if let Some(i) = p.input {
                let _ = writeln!(s, "input_rate = {:?}\ninput_weight = {:?}", i.rate, i.weight);
            }
            if p.sparse_learning {
                let _ = writeln!(s, "sparse_learning = true");
            }
            if p.output_layer {
                let _ = writeln!(s, "layer = output");
            }
            for (k, v) in &p.params {
                let _ = writeln!(s, "{k} = {v:?}");
            }
            s.push('\n');
        }
        for j in &self.projections {
            let _ = writeln!(s, "[projection {}]\nsource = {}\ntarget = {}", j.name, j.source, j.target);
            match &j.pattern {
                Pattern::AllToAll { allow_self } => {
                    let _ = writeln!(s, "pattern = all_to_all\nallow_self = {allow_self}");
                }
                Pattern::OneToOne => s.push_str("pattern = one_to_one\n"),
                Pattern::OneToAll { source_neuron } => {
                    let _ = writeln!(s, "pattern = one_to_all\nsource_neuron = {source_neuron}");
                }
                Pattern::Explicit(pairs) => {
                    let items: Vec<String> = pairs
                        .iter()
                        .map(|(a, b, w)| match w {
                            Some(w) => format!("{a}>{b}:{w}"),
                            None => format!("{a}>{b}"),
                        })
                        .collect();
                    let _ = writeln!(s, "pattern = explicit\npairs = {}", items.join(", "));
                }
                Pattern::Conv2d(c) => {
                    let _ = writeln!(
                        s,
                        "pattern = conv2d\nin_shape = {}x{}x{}\nkernel = {}\nstride = {}\nout_channels = {}",
                        c.in_w, c.in_h, c.in_c, c.kernel, c.stride, c.out_c
                    );
                }
            }
            match &j.weights {
                WeightSpec::Uniform(w) => {
                    let _ = writeln!(s, "weight = {w:?}");
                }
                WeightSpec::Raw(w) if w.is_empty() => {}
                WeightSpec::Raw(w) => {
                    let items: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(s, "weights = {}", items.join(", "));
                }
            }
            if let Some(b) = j.bits {
                let _ = writeln!(s, "bits = {b}");
            }
            if j.plastic {
                s.push_str("plastic = true\n");
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = "
# two layers
[population in]
size = 4
model = lif
c0 = 1.5
input_rate = 0.5
input_weight = 0.25

[population out]
size = 2
model = lif
learning = stdp
P0 = 0.125

[projection ff]
source = in
target = out
pattern = all_to_all
weights = 1, 2, 3, 4, 5, 6, 7, 8
bits = 8
plastic = true

[projection pick]
source = in
target = out
pattern = explicit
pairs = 0>1:5, 3>0:-2
";

    #[test]
    fn parse_demo() {
        let n = NetworkDescription::parse(DEMO).unwrap();
        assert_eq!(n.populations.len(), 2);
        assert_eq!(n.populations[0].params["c0"], 1.5);
        assert_eq!(n.populations[0].input, Some(PoissonInput { rate: 0.5, weight: 0.25 }));
        assert_eq!(n.populations[1].learning.as_deref(), Some("stdp"));
        assert_eq!(n.projections[0].weights, WeightSpec::Raw((1..=8).collect()));
        assert!(n.projections[0].plastic);
        assert_eq!(n.projections[1].pattern, Pattern::Explicit(vec![(0, 1, Some(5)), (3, 0, Some(-2))]));
    }

    #[test]
    fn text_roundtrip() {
        let n = NetworkDescription::parse(DEMO).unwrap();
        assert_eq!(NetworkDescription::parse(&n.to_text()).unwrap(), n);
    }

    #[test]
    fn unresolved_reference() {
        let e = NetworkDescription::parse("[population a]\nsize=1\nmodel=lif\n[projection p]\nsource=a\ntarget=b\npattern=one_to_one\nweight=1")
            .unwrap_err();
        assert!(e.to_string().contains("unknown target"), "{e}");
    }

    #[test]
    fn conv_shape_checked() {
        let text = "[population a]\nsize=64\nmodel=lif\n[population b]\nsize=144\nmodel=lif\n\
                    [projection c]\nsource=a\ntarget=b\npattern=conv2d\nin_shape=8x8x1\nkernel=3\nout_channels=4\nweight=0.5";
        NetworkDescription::parse(text).unwrap();
        let bad = text.replace("size=144", "size=100");
        assert!(NetworkDescription::parse(&bad).unwrap_err().to_string().contains("target size 144"));
    }

    #[test]
    fn conv_output_size() {
        let c = ConvSpec { in_w: 9, in_h: 7, in_c: 2, kernel: 3, stride: 2, out_c: 5 };
        assert_eq!((c.out_w(), c.out_h()), (4, 3));
        assert_eq!(c.out_size(), 60);
    }
}
