//! Subspace-equivalence checks for routing unitaries and bundled circuits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::registry::{DecompositionRegistry, RegistryOp};
use crate::gates::unitary::{
    max_abs_diff, phase_insensitive_diff, router_matrix, routing_unitary, swap, unitarity_deviation,
    CMatrix, GateUnitary, RoutingKind,
};
use crate::model::Connectivity;

pub const PASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    UpwardConstraints,
    DownwardConstraints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub subject: String,
    pub predicates: Vec<Predicate>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.predicates.iter().all(|p| p.passed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.predicates.iter().map(|p| p.max_deviation).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.predicates
            .iter()
            .filter(|p| !p.passed)
            .map(|p| p.name.as_str())
            .collect()
    }

    fn push(&mut self, name: &str, max_deviation: f64) {
        self.predicates.push(Predicate {
            name: name.to_string(),
            passed: max_deviation <= PASS_TOL,
            max_deviation,
        });
    }
}

impl std::fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}: {}", self.subject, if self.passed() { "PASS" } else { "FAIL" })?;
        for p in &self.predicates {
            writeln!(
                f,
                "  [{}] {} (max deviation {:.3e})",
                if p.passed { "ok" } else { "FAIL" },
                p.name,
                p.max_deviation
            )?;
        }
        Ok(())
    }
}

fn column_deviation(m: &CMatrix, col: usize, expected_row: usize) -> f64 {
    (0..m.nrows())
        .map(|r| {
            let want = if r == expected_row { 1.0 } else { 0.0 };
            (m[(r, col)] - Complex64::new(want, 0.0)).norm()
        })
        .fold(0.0, f64::max)
}

fn columns_match(m: &CMatrix, reference: &CMatrix, cols: &[usize]) -> f64 {
    cols.iter()
        .flat_map(|&c| (0..m.nrows()).map(move |r| (r, c)))
        .map(|(r, c)| (m[(r, c)] - reference[(r, c)]).norm())
        .fold(0.0, f64::max)
}

fn check_shape(candidate: &GateUnitary, dim: usize) -> Result<()> {
    if candidate.dimension() != dim {
        return Err(Error::WrongDimension {
            expected: dim,
            got: candidate.dimension(),
        });
    }
    let dev = unitarity_deviation(&candidate.matrix);
    if dev > 1e-12 {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

/// Checks an 8x8 candidate over `|control, target1, target2>` against the
/// upward or downward routing constraints.
pub fn verify_routing_equivalence(
    candidate: &GateUnitary,
    scenario: Scenario,
) -> Result<VerificationReport> {
    check_shape(candidate, 8)?;
    let m = &candidate.matrix;
    let mut report = VerificationReport {
        subject: format!("{} {:?}", candidate.name, scenario),
        predicates: Vec::new(),
    };
    match scenario {
        Scenario::UpwardConstraints => {
            let idle = (0..4).map(|c| column_deviation(m, c, c)).fold(0.0, f64::max);
            report.push("control |0> leaves targets unchanged", idle);
            report.push("|100> fixed", column_deviation(m, 4, 4));
            report.push("|110> -> |101>", column_deviation(m, 6, 5));
            // |101> and |111> must map unitarily onto the complement of the
            // images of the six constrained inputs.
            let constrained: Vec<usize> = vec![0, 1, 2, 3, 4, 6];
            let mut leak: f64 = 0.0;
            for free in [5usize, 7] {
                for &c in &constrained {
                    let overlap: Complex64 = (0..8).map(|r| m[(r, c)].conj() * m[(r, free)]).sum();
                    leak = leak.max(overlap.norm());
                }
            }
            let mut block = CMatrix::zeros(8, 2);
            block.set_column(0, &m.column(5));
            block.set_column(1, &m.column(7));
            let gram = block.adjoint() * &block;
            leak = leak.max(max_abs_diff(&gram, &CMatrix::identity(2, 2)));
            report.push("span{|101>,|111>} maps unitarily onto the free block", leak);
        }
        Scenario::DownwardConstraints => {
            let cswap = routing_unitary(RoutingKind::Cswap).matrix;
            for col in [0usize, 2, 4, 6] {
                report.push(
                    &format!("agrees with CSWAP on |{col:03b}>"),
                    columns_match(m, &cswap, &[col]),
                );
            }
        }
    }
    Ok(report)
}

/// Composes a bundled decomposition and checks it against the operation it
/// implements, plus the declared connectivity.
pub fn verify_reference_circuit(
    registry: &DecompositionRegistry,
    op: RegistryOp,
    case: Connectivity,
) -> Result<VerificationReport> {
    let entry = registry.get(op, case)?;
    let circuit = entry
        .reference
        .as_ref()
        .ok_or_else(|| Error::MissingReferenceCircuit(format!("{op}/{case}")))?;
    if circuit.operands != case.operand_count() {
        return Err(Error::WrongDimension {
            expected: case.operand_count(),
            got: circuit.operands,
        });
    }
    for (a, b) in circuit.cz_pairs() {
        if !case.is_edge(a, b) {
            return Err(Error::ConnectivityViolation(format!("q{a}"), format!("q{b}")));
        }
    }
    let u = circuit.unitary();
    let subject = format!("{op}/{case} reference circuit");
    match (op, case.operand_count()) {
        (RegistryOp::Swap, 2) => {
            let mut report = VerificationReport {
                subject,
                predicates: Vec::new(),
            };
            report.push("equals SWAP up to global phase", phase_insensitive_diff(&u, &swap()));
            Ok(report)
        }
        (RegistryOp::RoutingUp | RegistryOp::RoutingDown | RegistryOp::Cswap, 3) => {
            let scenario = if op == RegistryOp::RoutingDown {
                Scenario::DownwardConstraints
            } else {
                Scenario::UpwardConstraints
            };
            let gate = GateUnitary {
                name: subject,
                matrix: u,
            };
            verify_routing_equivalence(&gate, scenario)
        }
        (RegistryOp::RoutingUp | RegistryOp::RoutingDown, 4) => {
            let w = router_matrix();
            let mut report = VerificationReport {
                subject,
                predicates: Vec::new(),
            };
            // basis |c, in, l, r>
            let down: Vec<usize> = (0..16).filter(|s| s & 0b0011 == 0).collect();
            let up: Vec<usize> = (0..16)
                .filter(|s| {
                    let c = s >> 3 & 1;
                    let input = s >> 2 & 1;
                    let unselected = if c == 1 { s >> 1 & 1 } else { s & 1 };
                    input == 0 && unselected == 0
                })
                .collect();
            report.push("downward routing subspace", columns_match(&u, &w, &down));
            report.push("upward routing subspace", columns_match(&u, &w, &up));
            Ok(report)
        }
        _ => Err(Error::WrongDimension {
            expected: 3,
            got: circuit.operands,
        }),
    }
}
