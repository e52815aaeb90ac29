use std::collections::{BTreeMap, HashMap};

use super::SimError;
use crate::biopepa::{gen_parameters, gen_rate};
use crate::diagnostic::{Code, Diagnostic};
use crate::expr::{threshold, BinOp, EvalError, Node, ResolvedExpr, Symbol, TextRange};
use crate::model::{ArcType, Document, NodeRef};

/// Leaf of a compiled propensity: an index into the state or the parameter
/// table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Species(usize),
    Param(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub name: String,
    pub process: String,
    /// Net change per species, zero entries dropped.
    pub changes: Vec<(usize, f64)>,
    pub propensity: Node<Slot>,
    /// Species the propensity reads.
    pub reads: Vec<usize>,
    program: Program,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Instr {
    Num(f64),
    Species(usize),
    Param(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div(TextRange),
    Threshold,
}

/// Postfix form of a propensity, evaluated on a fixed-size stack.
#[derive(Debug, Clone, PartialEq)]
struct Program {
    code: Vec<Instr>,
    depth: usize,
}

const STACK: usize = 32;

impl Program {
    fn compile(node: &Node<Slot>) -> Self {
        fn emit(n: &Node<Slot>, code: &mut Vec<Instr>, sp: usize, max: &mut usize) {
            *max = (*max).max(sp + 1);
            match n {
                Node::Num(v) => code.push(Instr::Num(*v)),
                Node::Leaf(Slot::Species(i)) => code.push(Instr::Species(*i)),
                Node::Leaf(Slot::Param(j)) => code.push(Instr::Param(*j)),
                Node::Neg(x) => {
                    emit(x, code, sp, max);
                    code.push(Instr::Neg);
                }
                Node::Binary {
                    op,
                    lhs,
                    rhs,
                    range,
                } => {
                    emit(lhs, code, sp, max);
                    emit(rhs, code, sp + 1, max);
                    code.push(match op {
                        BinOp::Add => Instr::Add,
                        BinOp::Sub => Instr::Sub,
                        BinOp::Mul => Instr::Mul,
                        BinOp::Div => Instr::Div(*range),
                    });
                }
                Node::Threshold(a, b) => {
                    emit(a, code, sp, max);
                    emit(b, code, sp + 1, max);
                    code.push(Instr::Threshold);
                }
            }
        }
        let mut code = Vec::new();
        let mut depth = 0;
        emit(node, &mut code, 0, &mut depth);
        Program { code, depth }
    }

    fn eval(&self, state: &[f64], params: &[(String, f64)]) -> Result<f64, EvalError> {
        let mut st = [0.0f64; STACK];
        let mut sp = 0;
        for ins in &self.code {
            match *ins {
                Instr::Num(v) => {
                    st[sp] = v;
                    sp += 1;
                }
                Instr::Species(i) => {
                    st[sp] = state[i];
                    sp += 1;
                }
                Instr::Param(j) => {
                    st[sp] = params[j].1;
                    sp += 1;
                }
                Instr::Neg => st[sp - 1] = -st[sp - 1],
                _ => {
                    sp -= 1;
                    let (a, b) = (st[sp - 1], st[sp]);
                    st[sp - 1] = match *ins {
                        Instr::Add => a + b,
                        Instr::Sub => a - b,
                        Instr::Mul => a * b,
                        Instr::Div(range) => {
                            if b == 0.0 {
                                return Err(EvalError::DivideByZero(range));
                            }
                            a / b
                        }
                        _ => threshold(a, b),
                    };
                }
            }
        }
        Ok(st[0])
    }
}

/// Simulation form of a document: species are the bounded entity pools in
/// id order, reactions follow Bio-PEPA naming (`pid`, `pid_F`, `pid_B`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    pub species: Vec<String>,
    pub initial: Vec<f64>,
    pub params: Vec<(String, f64)>,
    pub reactions: Vec<Reaction>,
    /// `dependents[r]`: reactions whose propensity reads a species changed
    /// by `r`.
    pub dependents: Vec<Vec<usize>>,
    pub warnings: Vec<Diagnostic>,
    index: HashMap<String, usize>,
}

impl ReactionNetwork {
    /// Compile a validated document.
    pub fn compile(doc: &Document) -> Result<Self, SimError> {
        let species: Vec<String> = doc
            .entities
            .values()
            .filter(|e| !e.epn_type.is_unbounded())
            .map(|e| e.id.clone())
            .collect();
        let initial = species
            .iter()
            .map(|id| doc.entities[id].initial_molecule_count.unwrap_or(0.0))
            .collect();
        let index: HashMap<String, usize> = species
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let params = gen_parameters(doc)?;
        let param_index: HashMap<&str, usize> = params
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.as_str(), i))
            .collect();

        let mut reactions = Vec::new();
        let mut warnings = Vec::new();
        for p in doc.processes.values() {
            let arcs = doc.arcs_of_process(&p.id)?;
            for (dir, rate) in gen_rate(doc, p)?.into_iter().enumerate() {
                let backward = dir == 1;
                let mut delta: BTreeMap<usize, f64> = BTreeMap::new();
                let mut touches_unbounded = false;
                for a in &arcs {
                    let k = a.stoichiometry as f64;
                    let sign = match (a.arc_type, backward) {
                        (ArcType::Consumption, _) => -1.0,
                        (ArcType::Production, _) => 1.0,
                        (ArcType::LeftHandSide, false) | (ArcType::RightHandSide, true) => -1.0,
                        (ArcType::LeftHandSide, true) | (ArcType::RightHandSide, false) => 1.0,
                        _ => continue,
                    };
                    match index.get(&a.entity) {
                        Some(&i) => *delta.entry(i).or_default() += sign * k,
                        None => touches_unbounded = true,
                    }
                }
                let changes: Vec<(usize, f64)> =
                    delta.into_iter().filter(|&(_, d)| d != 0.0).collect();
                if changes.is_empty() && !touches_unbounded {
                    warnings.push(
                        Diagnostic::warning(
                            Code::NoOpReaction,
                            doc.span_of(&NodeRef::Process(p.id.clone())),
                            format!("reaction `{}` changes no species", rate.reaction),
                        )
                        .with_subject(&rate.reaction),
                    );
                }
                let propensity = compile_expr(&rate.expr, &index, &param_index)?;
                let mut reads: Vec<usize> =
                    rate.expr.entities().iter().map(|e| index[*e]).collect();
                reads.sort_unstable();
                reads.dedup();
                let program = Program::compile(&propensity);
                reactions.push(Reaction {
                    program,
                    name: rate.reaction,
                    process: p.id.clone(),
                    changes,
                    propensity,
                    reads,
                });
            }
        }

        let dependents = reactions
            .iter()
            .map(|r| {
                (0..reactions.len())
                    .filter(|&s| {
                        reactions[s]
                            .reads
                            .iter()
                            .any(|x| r.changes.iter().any(|(c, _)| c == x))
                    })
                    .collect()
            })
            .collect();

        Ok(ReactionNetwork {
            species,
            initial,
            params,
            reactions,
            dependents,
            warnings,
            index,
        })
    }

    pub fn species_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn set_initial(&mut self, id: &str, value: f64) -> Result<(), SimError> {
        let i = self
            .species_index(id)
            .ok_or_else(|| SimError::UnknownSpecies(id.into()))?;
        self.initial[i] = value;
        Ok(())
    }

    /// Propensity of reaction `r` in `state`.
    pub fn propensity(&self, r: usize, state: &[f64]) -> Result<f64, EvalError> {
        let reaction = &self.reactions[r];
        if reaction.program.depth <= STACK {
            return reaction.program.eval(state, &self.params);
        }
        reaction.propensity.eval_with(&mut |slot| {
            Ok(match *slot {
                Slot::Species(i) => state[i],
                Slot::Param(j) => self.params[j].1,
            })
        })
    }

    /// Species linked to `species` through reactant/product conversions, and
    /// the sum of their initial counts: the conserved pool the species
    /// belongs to.
    pub fn pool_total(&self, species: usize) -> f64 {
        let n = self.species.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for r in &self.reactions {
            let mut linked = r.changes.iter().map(|&(i, _)| i);
            if let Some(first) = linked.next() {
                for other in linked {
                    let (a, b) = (find(&mut parent, first), find(&mut parent, other));
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, species);
        (0..n)
            .filter(|&i| find(&mut parent, i) == root)
            .map(|i| self.initial[i])
            .sum()
    }

    /// Derivative of the mean-field ODE at `state`, written into `out`.
    pub fn derivative(&self, state: &[f64], out: &mut [f64]) -> Result<(), SimError> {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (r, reaction) in self.reactions.iter().enumerate() {
            let a = self
                .propensity(r, state)
                .map_err(|e| SimError::eval(&reaction.name, e))?;
            for &(i, d) in &reaction.changes {
                out[i] += d * a;
            }
        }
        if let Some(i) = out.iter().position(|x| !x.is_finite()) {
            return Err(SimError::Numerical(format!(
                "non-finite derivative for `{}`",
                self.species[i]
            )));
        }
        Ok(())
    }
}

fn compile_expr(
    expr: &ResolvedExpr,
    species: &HashMap<String, usize>,
    params: &HashMap<&str, usize>,
) -> Result<Node<Slot>, SimError> {
    expr.try_map(&mut |sym| {
        Ok(Node::Leaf(match sym {
            Symbol::Entity(id) => Slot::Species(
                *species
                    .get(id)
                    .ok_or_else(|| SimError::UnknownSpecies(id.clone()))?,
            ),
            Symbol::Param(name) => Slot::Param(
                *params
                    .get(name.as_str())
                    .ok_or_else(|| SimError::Numerical(format!("unbound parameter `{name}`")))?,
            ),
        }))
    })
}
