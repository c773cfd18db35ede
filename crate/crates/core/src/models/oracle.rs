// SPDX-License-Identifier: Apache-2.0

//! Floating-point reference dynamics, plus a same-rounding fixed-point
//! evaluation of the plasticity rule.

use crate::fixed::{Alu, Fixed};
use crate::neuron::{R0, X0, X2, Y0, Y1, Y2};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdlifParams {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_th: f64,
    pub v0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdlifState {
    pub v: f64,
    pub v_adp: f64,
}

/// Adaptive LIF step with `i_in` as I(t+1). Returns the new state and
/// whether the neuron fired.
pub fn ref_adlif_step(s: AdlifState, p: &AdlifParams, i_in: f64) -> (AdlifState, bool) {
    let mut v_adp = p.p3 * s.v_adp + p.p4 * s.v + p.c1;
    let mut v = p.p0 * s.v + p.p1 * i_in + p.p2 * v_adp + p.c0;
    let fired = v > p.v_th;
    if fired {
        v = p.v0;
        v_adp += p.c2;
    }
    (AdlifState { v, v_adp }, fired)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CobaParams {
    pub p5: f64,
    pub p6: f64,
    pub p7: f64,
    pub p8: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CobaState {
    pub h: f64,
    pub g: f64,
    pub i: f64,
}

/// Conductance step. `input` is the summed weight of spikes arriving this
/// step; `v` is the membrane potential before this step's update.
pub fn ref_coba_step(s: CobaState, p: &CobaParams, v: f64, input: f64) -> CobaState {
    let h = p.p8 * s.h + input;
    let g = p.p5 * s.g + p.p6 * h;
    let i = g * v + p.p7 * g;
    CobaState { h, g, i }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Traces {
    pub x0: f64,
    pub y0: f64,
    pub y1: f64,
    pub r0: f64,
}

/// Coefficients `P0*..P6*` and constants `C0*..C3*`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlasticityParams {
    pub p: [f64; 7],
    pub c: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EventFlags {
    pub pre: bool,
    pub post: bool,
    pub reward: bool,
}

/// Reward-modulated triplet rule. Traces update first; the weight change
/// uses the updated traces and the current event flags.
pub fn ref_triplet_rstdp_step(t: Traces, p: &PlasticityParams, f: EventFlags) -> (Traces, f64) {
    let ev = |b: bool| if b { 1.0 } else { 0.0 };
    let (x2, y2, r2) = (ev(f.pre), ev(f.post), ev(f.reward));
    let n = Traces {
        x0: p.p[3] * t.x0 + p.c[0] * x2,
        y0: p.p[4] * t.y0 + p.c[1] * y2,
        y1: p.p[5] * t.y1 + p.c[2] * y2,
        r0: p.p[6] * t.r0 + p.c[3] * r2,
    };
    let dw = p.p[0] * n.r0 * n.x0 * y2 + p.p[1] * n.r0 * n.y0 * x2 + p.p[2] * n.r0 * n.y1 * x2;
    (n, dw)
}

/// Fixed-point coefficients of the plasticity rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FixedPlasticity {
    pub p: [Fixed; 7],
    pub c: [Fixed; 4],
}

/// Same rule in fixed point: each product is rounded at every step in the
/// order `((P * first) * second) * third`, sums saturate.
pub fn ref_triplet_rstdp_step_fixed(
    alu: &mut Alu,
    ls: [Fixed; 9],
    p: &FixedPlasticity,
    f: EventFlags,
    w: Fixed,
    update_r0: bool,
) -> ([Fixed; 9], Fixed) {
    let one = alu.format.one();
    let ev = |b: bool| if b { one } else { Fixed::ZERO };
    let (x2, y2, r2) = (ev(f.pre), ev(f.post), ev(f.reward));
    let mut n = ls;
    n[X2] = x2;
    n[Y2] = y2;
    n[8] = r2;
    let trace = |alu: &mut Alu, decay: Fixed, old: Fixed, flag: Fixed, c: Fixed| {
        let d = alu.mul(decay, old);
        alu.add(d, if flag.0 != 0 { c } else { Fixed::ZERO })
    };
    n[X0] = trace(alu, p.p[3], ls[X0], x2, p.c[0]);
    n[Y0] = trace(alu, p.p[4], ls[Y0], y2, p.c[1]);
    n[Y1] = trace(alu, p.p[5], ls[Y1], y2, p.c[2]);
    if update_r0 {
        n[R0] = trace(alu, p.p[6], ls[R0], r2, p.c[3]);
    }
    let mut w = w;
    let terms = [(p.p[0], n[X0], y2), (p.p[1], x2, n[Y0]), (p.p[2], x2, n[Y1])];
    for (coef, a, b) in terms {
        // selected registers multiply in ascending register order
        let t = alu.mul(coef, a);
        let t = alu.mul(t, b);
        let t = alu.mul(t, n[R0]);
        w = alu.add(w, t);
    }
    (n, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IzhikevichParams {
    pub quad: f64,
    pub lin: f64,
    pub p1: f64,
    pub p2: f64,
    pub c0: f64,
    pub p3: f64,
    pub p4: f64,
    pub c2: f64,
    pub v_th: f64,
    pub v0: f64,
}

impl IzhikevichParams {
    /// Regular-spiking cell in units of 10 mV with a 0.5 ms step.
    pub fn regular_spiking() -> IzhikevichParams {
        let (a, b, c, d) = (0.02, 0.2, -65.0, 8.0);
        IzhikevichParams {
            quad: 0.2,
            lin: 3.5,
            p1: 0.5,
            p2: -0.5,
            c0: 7.0,
            p3: 1.0 - a / 2.0,
            p4: a * b / 2.0,
            c2: d / 10.0,
            v_th: 3.0,
            v0: c / 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IzhikevichState {
    pub v: f64,
    pub u: f64,
}

/// Scaled two-variable recurrence: the membrane coefficient is itself a
/// function of v, computed first as a temporary.
pub fn ref_izhikevich_step(s: IzhikevichState, p: &IzhikevichParams, i_in: f64) -> (IzhikevichState, bool) {
    let coef = p.quad * s.v + p.lin;
    let mut u = p.p3 * s.u + p.p4 * s.v;
    let mut v = coef * s.v + p.p1 * i_in + p.p2 * u + p.c0;
    let fired = v > p.v_th;
    if fired {
        v = p.v0;
        u += p.c2;
    }
    (IzhikevichState { v, u }, fired)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed::QFormat;

    #[test]
    fn adlif_identity_and_reset() {
        let p = AdlifParams { p0: 1.0, v_th: 10.0, ..Default::default() };
        let (s, f) = ref_adlif_step(AdlifState { v: 0.7, v_adp: 0.0 }, &p, 3.0);
        assert_eq!(s.v, 0.7);
        assert!(!f);
        let p = AdlifParams { p0: 1.0, p1: 1.0, c2: 0.5, v_th: 1.0, v0: -0.25, ..Default::default() };
        let (s, f) = ref_adlif_step(AdlifState { v: 0.9, v_adp: 0.1 }, &p, 0.5);
        assert!(f);
        assert_eq!(s, AdlifState { v: -0.25, v_adp: 0.5 });
    }

    #[test]
    fn coba_decay_and_impulse() {
        let p = CobaParams { p8: 0.5, ..Default::default() };
        assert_eq!(ref_coba_step(CobaState { h: 1.0, ..Default::default() }, &p, 0.0, 0.0).h, 0.5);
        assert_eq!(ref_coba_step(CobaState::default(), &p, 0.0, 2.0).h, 2.0);
    }

    #[test]
    fn plasticity_decay_and_potentiation() {
        let p = PlasticityParams { p: [0.5, -0.5, -0.25, 0.5, 0.5, 0.5, 0.5], c: [1.0; 4] };
        let t = Traces { x0: 1.0, y0: 1.0, y1: 1.0, r0: 1.0 };
        let (n, dw) = ref_triplet_rstdp_step(t, &p, EventFlags::default());
        assert_eq!(dw, 0.0);
        assert_eq!(n, Traces { x0: 0.5, y0: 0.5, y1: 0.5, r0: 0.5 });
        let (_, dw) = ref_triplet_rstdp_step(t, &p, EventFlags { post: true, ..Default::default() });
        assert!(dw > 0.0);
    }

    #[test]
    fn fixed_rule_tracks_float() {
        let q = QFormat::Q8_8;
        let mut alu = Alu::new(q);
        let fp = PlasticityParams { p: [0.5, -0.25, -0.125, 0.75, 0.75, 0.5, 1.0], c: [1.0; 4] };
        let xp = FixedPlasticity {
            p: fp.p.map(|v| q.from_f64(v).unwrap()),
            c: fp.c.map(|v| q.from_f64(v).unwrap()),
        };
        let mut ls = [Fixed::ZERO; 9];
        ls[R0] = q.one();
        let (ls2, w) = ref_triplet_rstdp_step_fixed(&mut alu, ls, &xp, EventFlags { pre: true, ..Default::default() }, Fixed::ZERO, false);
        assert_eq!(ls2[X0], q.one());
        assert_eq!(w, Fixed::ZERO);
        let (_, w) = ref_triplet_rstdp_step_fixed(&mut alu, ls2, &xp, EventFlags { post: true, ..Default::default() }, w, false);
        let t = Traces { x0: 1.0, y0: 0.0, y1: 0.0, r0: 1.0 };
        let (_, dw) = ref_triplet_rstdp_step(t, &fp, EventFlags { post: true, ..Default::default() });
        assert_eq!(q.to_f64(w), dw);
    }

    #[test]
    fn izhikevich_subthreshold_bounded() {
        let p = IzhikevichParams::regular_spiking();
        let mut s = IzhikevichState { v: -6.5, u: -1.3 };
        for _ in 0..200 {
            s = ref_izhikevich_step(s, &p, 0.0).0;
            assert!(s.v.abs() < 32.0 && s.u.abs() < 32.0);
        }
        let (_, fired) = ref_izhikevich_step(IzhikevichState { v: 2.9, u: 0.0 }, &p, 4.0);
        assert!(fired);
    }
}
