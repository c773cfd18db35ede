// SPDX-License-Identifier: Apache-2.0

//! Naive three-address lowering of model update equations, used as the
//! instruction-count baseline for the template library.
//!
//! Costs: one LOAD per leaf (no reuse), one instruction per operator, one
//! STORE per assignment, CMP + branch per condition, one jump to skip an
//! else arm, one SPIKE per emit.

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(&'static str),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Assign(&'static str, Expr),
    /// `if a > b { then } else { otherwise }`
    If { a: Expr, b: Expr, then: Vec<Stmt>, otherwise: Vec<Stmt> },
    Spike,
}

pub fn var(n: &'static str) -> Expr {
    Expr::Var(n)
}

pub fn add(a: Expr, b: Expr) -> Expr {
    Expr::Add(Box::new(a), Box::new(b))
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    Expr::Sub(Box::new(a), Box::new(b))
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    Expr::Mul(Box::new(a), Box::new(b))
}

pub fn exp(a: Expr) -> Expr {
    Expr::Exp(Box::new(a))
}

/// Sum of products `c_i * x_i`.
fn lin(terms: &[(&'static str, &'static str)]) -> Expr {
    let mut it = terms.iter().map(|&(c, x)| mul(var(c), var(x)));
    let first = it.next().expect("nonempty");
    it.fold(first, add)
}

fn prod(names: &[&'static str]) -> Expr {
    let mut it = names.iter().map(|&n| var(n));
    let first = it.next().expect("nonempty");
    it.fold(first, mul)
}

pub fn expr_cost(e: &Expr) -> usize {
    match e {
        Expr::Var(_) => 1,
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => expr_cost(a) + expr_cost(b) + 1,
        Expr::Exp(a) => expr_cost(a) + 1,
    }
}

pub fn lowered_count(body: &[Stmt]) -> usize {
    body.iter()
        .map(|s| match s {
            Stmt::Assign(_, e) => expr_cost(e) + 1,
            Stmt::Spike => 1,
            Stmt::If { a, b, then, otherwise } => {
                let skip = usize::from(!otherwise.is_empty());
                expr_cost(a) + expr_cost(b) + 2 + lowered_count(then) + skip + lowered_count(otherwise)
            }
        })
        .sum()
}

fn fire_and_reset(adaptive: bool) -> Stmt {
    let mut then = vec![Stmt::Assign("v", var("v0"))];
    if adaptive {
        then.push(Stmt::Assign("v_adp", add(var("v_adp"), var("c2"))));
    }
    then.push(Stmt::Spike);
    Stmt::If { a: var("v"), b: var("v_th"), then, otherwise: vec![] }
}

fn weight_step(body: Expr) -> Stmt {
    Stmt::Assign("w", add(var("w"), body))
}

/// Update equations of each library model, written directly.
pub fn model_equations(name: &str) -> Option<Vec<Stmt>> {
    let eq = match name {
        "lif" => vec![Stmt::Assign("v", add(lin(&[("p0", "v"), ("p1", "I")]), var("c0"))), fire_and_reset(false)],
        "qif" => vec![
            Stmt::Assign("v", add(add(mul(add(mul(var("a"), var("v")), var("b")), var("v")), mul(var("p1"), var("I"))), var("c0"))),
            fire_and_reset(false),
        ],
        "expif" => vec![
            Stmt::Assign(
                "v",
                add(
                    add(lin(&[("p0", "v"), ("p1", "I")]), mul(var("delta"), exp(add(mul(var("inv_delta"), var("v")), var("neg_theta"))))),
                    var("e"),
                ),
            ),
            fire_and_reset(false),
        ],
        "izhikevich" => vec![
            Stmt::Assign("v_adp", lin(&[("p3", "v_adp"), ("p4", "v")])),
            Stmt::Assign(
                "v",
                add(
                    add(mul(add(mul(var("quad"), var("v")), var("lin")), var("v")), lin(&[("p1", "I"), ("p2", "v_adp")])),
                    var("c0"),
                ),
            ),
            fire_and_reset(true),
        ],
        "stdp" => vec![
            Stmt::Assign("x0", lin(&[("P3", "x0"), ("C0", "x2")])),
            Stmt::Assign("y0", lin(&[("P4", "y0"), ("C1", "y2")])),
            weight_step(add(prod(&["P0", "x0", "y2"]), prod(&["P1", "x2", "y0"]))),
        ],
        "triplet_stdp" => vec![
            Stmt::Assign("x0", lin(&[("P3", "x0"), ("C0", "x2")])),
            Stmt::Assign("y0", lin(&[("P4", "y0"), ("C1", "y2")])),
            Stmt::Assign("y1", lin(&[("P5", "y1"), ("C2", "y2")])),
            weight_step(add(
                add(prod(&["P0", "r0", "x0", "y2"]), prod(&["P1", "r0", "y0", "x2"])),
                prod(&["P2", "r0", "y1", "x2"]),
            )),
        ],
        "rstdp" => vec![
            Stmt::Assign("x0", lin(&[("P3", "x0"), ("C0", "x2")])),
            Stmt::Assign("y0", lin(&[("P4", "y0"), ("C1", "y2")])),
            Stmt::Assign("r0", lin(&[("P6", "r0"), ("C3", "r2")])),
            weight_step(add(prod(&["P0", "r0", "x0", "y2"]), prod(&["P1", "r0", "y0", "x2"]))),
        ],
        "sdsp" => vec![
            Stmt::Assign("ca", lin(&[("Pc", "ca"), ("Cc", "y2")])),
            Stmt::If {
                a: var("x2"),
                b: var("zero"),
                then: vec![Stmt::If {
                    a: var("ca"),
                    b: var("theta_lo"),
                    then: vec![Stmt::If {
                        a: var("theta_hi"),
                        b: var("ca"),
                        then: vec![Stmt::If {
                            a: var("v"),
                            b: var("theta_v"),
                            then: vec![weight_step(var("a"))],
                            otherwise: vec![Stmt::Assign("w", sub(var("w"), var("a")))],
                        }],
                        otherwise: vec![],
                    }],
                    otherwise: vec![],
                }],
                otherwise: vec![],
            },
        ],
        "stp" => vec![
            Stmt::Assign("u", add(mul(var("p2"), var("w")), var("c2"))),
            weight_step(prod(&["u", "x2", "y2"])),
            weight_step(prod(&["P1", "x2", "r2"])),
        ],
        _ => return None,
    };
    Some(eq)
}

/// The models compared by the density harness.
pub const TABLE_MODELS: [&str; 9] = ["lif", "qif", "expif", "izhikevich", "stdp", "triplet_stdp", "rstdp", "sdsp", "stp"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lif_lowering_count() {
        // v: 5 loads + 4 ops + store; if: 2 loads + cmp + br + (load, store) + spike
        assert_eq!(lowered_count(&model_equations("lif").unwrap()), 10 + 7);
    }

    #[test]
    fn else_arm_costs_a_jump() {
        let s = vec![Stmt::If { a: var("a"), b: var("b"), then: vec![Stmt::Spike], otherwise: vec![Stmt::Spike] }];
        assert_eq!(lowered_count(&s), 2 + 2 + 1 + 1 + 1);
    }

    #[test]
    fn every_model_has_equations() {
        for m in TABLE_MODELS {
            assert!(model_equations(m).is_some(), "{m}");
        }
    }
}
