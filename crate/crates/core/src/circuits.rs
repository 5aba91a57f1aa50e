//! Executable, measurement-branching implementations of the nonlocal-gate
//! protocols, with an exactness oracle over all branches.

use crate::error::{Error, Result};
use crate::forms::{
    build_circulant, fast_structure, is_clifford, ControlledForm, DoubleGroupExpansion,
    FastStructure, SingleGroupExpansion,
};
use crate::matrix::{ComplexMatrix, UNITARY_TOL};
use crate::qops::{bell_basis, fourier, gen_pauli, gen_pauli_x, gen_pauli_z};
use crate::rep::ProjectiveRep;
use crate::state::{Basis, QuditState};
use num_complex::Complex64;

/// Direction of a classical message between the two parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    AToB,
    BToA,
}

#[derive(Clone, Debug)]
pub struct Message {
    pub direction: Direction,
    pub bits: f64,
    /// Messages sharing a round index are sent simultaneously.
    pub round: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ResourceLog {
    pub ebits: f64,
    pub messages: Vec<Message>,
}

impl ResourceLog {
    pub fn cbits(&self) -> f64 {
        self.messages.iter().map(|m| m.bits).sum()
    }

    pub fn parallel_rounds(&self) -> usize {
        self.messages.iter().map(|m| m.round + 1).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub outcome: Vec<usize>,
    pub probability: f64,
    pub state: QuditState,
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub protocol_id: String,
    pub branches: Vec<Branch>,
    pub resources: ResourceLog,
}

#[derive(Clone, Debug)]
pub struct ExactnessReport {
    pub overlaps: Vec<f64>,
    pub min_overlap: f64,
    pub prob_sum: f64,
    pub worst_branch: usize,
    pub pass: bool,
}

/// Per-branch overlap of the run's outputs with `U |input>`.
pub fn verify_exactness(
    run: &ProtocolRun,
    u: &ComplexMatrix,
    input: &QuditState,
) -> Result<ExactnessReport> {
    let targets: Vec<usize> = (0..input.dims().len()).collect();
    let want = input.apply_on(u, &targets)?;
    let mut overlaps = Vec::with_capacity(run.branches.len());
    let mut prob_sum = 0.0;
    for b in &run.branches {
        overlaps.push(b.state.inner(&want)?.norm());
        prob_sum += b.probability;
    }
    let (worst_branch, min_overlap) = overlaps
        .iter()
        .cloned()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap_or((0, 1.0));
    let pass = min_overlap >= 1.0 - 1e-9 && (prob_sum - 1.0).abs() <= 1e-9;
    Ok(ExactnessReport {
        overlaps,
        min_overlap,
        prob_sum,
        worst_branch,
        pass,
    })
}

struct Work {
    labels: Vec<usize>,
    prob: f64,
    state: QuditState,
}

fn branch_measure(
    work: Vec<Work>,
    targets: &[usize],
    basis: Basis,
) -> Result<Vec<Work>> {
    let mut out = Vec::new();
    for w in work {
        let basis_ref = match &basis {
            Basis::Computational => Basis::Computational,
            Basis::Matrix(m) => Basis::Matrix(m),
        };
        for br in w.state.measure(targets, basis_ref)? {
            let mut labels = w.labels.clone();
            labels.push(br.outcome);
            out.push(Work {
                labels,
                prob: w.prob * br.probability,
                state: br.post_state,
            });
        }
    }
    Ok(out)
}

/// Teleports subsystem `sub` through a fresh maximally entangled pair,
/// applying the Pauli correction; the subsystem stays at its position.
fn teleport_subsystem(state: &QuditState, sub: usize) -> Result<Vec<(usize, f64, QuditState)>> {
    let d = state.dims()[sub];
    let len = state.dims().len();
    let joined = state.kron(&QuditState::max_entangled(d)?)?;
    let basis = bell_basis(d)?;
    let mut out = Vec::new();
    for br in joined.measure(&[sub, len], Basis::Matrix(&basis))? {
        let p = br.outcome / d;
        let q = br.outcome % d;
        // After removal the teleported qudit sits last; correct and move back.
        let last = br.post_state.dims().len() - 1;
        let corrected = br.post_state.apply_on(&gen_pauli(d, p, q)?, &[last])?;
        let mut perm: Vec<usize> = Vec::with_capacity(last + 1);
        for k in 0..=last {
            if k < sub {
                perm.push(k);
            } else if k == sub {
                perm.push(last);
            } else {
                perm.push(k - 1);
            }
        }
        out.push((br.outcome, br.probability, corrected.permute(&perm)?));
    }
    Ok(out)
}

/// Protocol 1: two-way teleportation. `2 log2(d_a)` ebits, twice that in
/// c-bits over two sequential rounds.
pub fn run_protocol1(
    u: &ComplexMatrix,
    input: &QuditState,
    d_a: usize,
    d_b: usize,
) -> Result<ProtocolRun> {
    if input.dims() != [d_a, d_b] {
        return Err(Error::DimensionMismatch("protocol 1 input dims".into()));
    }
    if u.rows() != d_a * d_b {
        return Err(Error::DimensionMismatch("protocol 1 unitary size".into()));
    }
    u.check_unitary(UNITARY_TOL, "protocol 1 unitary")?;
    let mut work = vec![Work {
        labels: vec![],
        prob: 1.0,
        state: input.clone(),
    }];
    // Teleport A over, apply U at B's site, teleport back.
    for stage in 0..2 {
        let mut next = Vec::new();
        for w in work {
            for (o, p, s) in teleport_subsystem(&w.state, 0)? {
                let s = if stage == 0 { s.apply_on(u, &[0, 1])? } else { s };
                let mut labels = w.labels.clone();
                labels.push(o);
                next.push(Work {
                    labels,
                    prob: w.prob * p,
                    state: s,
                });
            }
        }
        work = next;
    }
    let ebits = 2.0 * (d_a as f64).log2();
    Ok(ProtocolRun {
        protocol_id: "P1".into(),
        branches: work
            .into_iter()
            .map(|w| Branch {
                outcome: w.labels,
                probability: w.prob,
                state: w.state,
            })
            .collect(),
        resources: ResourceLog {
            ebits,
            messages: vec![
                Message {
                    direction: Direction::AToB,
                    bits: ebits,
                    round: 0,
                },
                Message {
                    direction: Direction::BToA,
                    bits: ebits,
                    round: 1,
                },
            ],
        },
    })
}

/// Protocol 2: the basic controlled-unitary protocol over a Schmidt-rank-N
/// resource pair.
pub fn run_protocol2(form: &ControlledForm, input: &QuditState) -> Result<ProtocolRun> {
    if input.dims() != [form.d_a, form.d_b] {
        return Err(Error::DimensionMismatch("protocol 2 input dims".into()));
    }
    let n = form.term_count();
    let xn = gen_pauli_x(n.max(2))?; // X on the N-dim ancilla; N=1 degenerates below
    let joint = input.kron(&QuditState::max_entangled(n)?)?;
    // Registers: A=0, B=1, a=2, b=3.
    let shift_ops: Vec<ComplexMatrix> = (0..form.d_a)
        .map(|alpha| {
            if n == 1 {
                ComplexMatrix::identity(1)
            } else {
                xn.pow(form.block_of(alpha))
            }
        })
        .collect();
    let st = joint.apply_controlled(0, &[2], &shift_ops)?;
    let mut work = branch_measure(
        vec![Work {
            labels: vec![],
            prob: 1.0,
            state: st,
        }],
        &[2],
        Basis::Computational,
    )?;
    // b correction X^k, controlled V_j from b, Fourier measurement of b.
    let fn_basis = fourier(n)?;
    for w in &mut work {
        let k = *w.labels.last().unwrap();
        let corr = if n == 1 {
            ComplexMatrix::identity(1)
        } else {
            xn.pow(k)
        };
        w.state = w.state.apply_on(&corr, &[2])?;
        w.state = w.state.apply_controlled(2, &[1], &form.targets)?;
    }
    let mut work = branch_measure(work, &[2], Basis::Matrix(&fn_basis))?;
    // Phase correction on A: block j picks up e^{-2 pi i j l / N}.
    for w in &mut work {
        let l = *w.labels.last().unwrap();
        let phases: Vec<Complex64> = (0..form.d_a)
            .map(|alpha| {
                let j = form.block_of(alpha);
                Complex64::from_polar(
                    1.0,
                    -std::f64::consts::TAU * (j * l) as f64 / n as f64,
                )
            })
            .collect();
        w.state = w.state.apply_diag(0, &phases)?;
    }
    let ebits = (n as f64).log2();
    Ok(ProtocolRun {
        protocol_id: "P2".into(),
        branches: work
            .into_iter()
            .map(|w| Branch {
                outcome: w.labels,
                probability: w.prob,
                state: w.state,
            })
            .collect(),
        resources: ResourceLog {
            ebits,
            messages: vec![
                Message {
                    direction: Direction::AToB,
                    bits: ebits,
                    round: 0,
                },
                Message {
                    direction: Direction::BToA,
                    bits: ebits,
                    round: 1,
                },
            ],
        },
    })
}

/// Protocol 3: the double-group protocol with the circulant gate on the
/// B-side ancilla.
pub fn run_protocol3(exp: &DoubleGroupExpansion, input: &QuditState) -> Result<ProtocolRun> {
    let (d_a, d_b) = (exp.pair.d_a(), exp.pair.d_b());
    if input.dims() != [d_a, d_b] {
        return Err(Error::DimensionMismatch("protocol 3 input dims".into()));
    }
    let n = exp.pair.order();
    let circulant = build_circulant(exp)?;
    let joint = input.kron(&QuditState::max_entangled(n)?)?;
    // Registers: A=0, B=1, a=2, b=3.
    let st = joint.apply_controlled(2, &[0], &exp.pair.mats_a)?;
    let fn_basis = fourier(n)?;
    let mut work = branch_measure(
        vec![Work {
            labels: vec![],
            prob: 1.0,
            state: st,
        }],
        &[2],
        Basis::Matrix(&fn_basis),
    )?;
    for w in &mut work {
        let h = *w.labels.last().unwrap();
        // Undo the Fourier phases picked up on b, then controlled-T and the
        // circulant, then measure b.
        let phases: Vec<Complex64> = (0..n)
            .map(|f| {
                Complex64::from_polar(1.0, -std::f64::consts::TAU * (f * h) as f64 / n as f64)
            })
            .collect();
        w.state = w.state.apply_diag(2, &phases)?;
        w.state = w.state.apply_controlled(2, &[1], &exp.pair.mats_b)?;
        w.state = w.state.apply_on(&circulant, &[2])?;
    }
    let mut work = branch_measure(work, &[2], Basis::Computational)?;
    for w in &mut work {
        let g = *w.labels.last().unwrap();
        w.state = w.state.apply_on(&exp.pair.mats_a[g].dagger(), &[0])?;
        w.state = w.state.apply_on(&exp.pair.mats_b[g].dagger(), &[1])?;
    }
    let ebits = (n as f64).log2();
    Ok(ProtocolRun {
        protocol_id: "P3".into(),
        branches: work
            .into_iter()
            .map(|w| Branch {
                outcome: w.labels,
                probability: w.prob,
                state: w.state,
            })
            .collect(),
        resources: ResourceLog {
            ebits,
            messages: vec![
                Message {
                    direction: Direction::AToB,
                    bits: ebits,
                    round: 0,
                },
                Message {
                    direction: Direction::BToA,
                    bits: ebits,
                    round: 1,
                },
            ],
        },
    })
}

/// The two-register gate of Protocol 4: block `M[g,f] = beta_g(gf) W(gf)` so
/// that applying it to `sum_f |f> V_A(f)|psi>` leaves `(V_A(g)† (x) I) U`.
fn protocol4_gate(exp: &SingleGroupExpansion) -> Result<ComplexMatrix> {
    let n = exp.rep_a.order();
    let d_b = exp.d_b;
    let d_a = exp.d_a as f64;
    let mut m = ComplexMatrix::zeros(n * d_b, n * d_b);
    for g in 0..n {
        let vg_dag = exp.rep_a.matrix(g).dagger();
        for f in 0..n {
            let gf = exp.rep_a.mul_elem(g, f);
            // beta with V(g)† V(gf) = beta * V(f).
            let prod = vg_dag.mul(exp.rep_a.matrix(gf));
            let beta = exp.rep_a.matrix(f).hs_inner(&prod) / d_a;
            let beta = beta / beta.norm();
            let w = &exp.w_ops[gf];
            // Composite index: ancilla level fastest.
            for r in 0..d_b {
                for c in 0..d_b {
                    m.set(g + n * r, f + n * c, beta * w.at(r, c));
                }
            }
        }
    }
    let dev = m.unitarity_deviation();
    if dev > UNITARY_TOL {
        return Err(Error::ConventionFailure {
            stage: "protocol4 gate".into(),
            detail: format!("composite gate unitarity deviation {dev:.3e}"),
        });
    }
    Ok(m)
}

/// Protocol 4: the single-group protocol; `log2(d_a^2)` ebits.
pub fn run_protocol4(exp: &SingleGroupExpansion, input: &QuditState) -> Result<ProtocolRun> {
    if input.dims() != [exp.d_a, exp.d_b] {
        return Err(Error::DimensionMismatch("protocol 4 input dims".into()));
    }
    let n = exp.rep_a.order();
    let gate = protocol4_gate(exp)?;
    let joint = input.kron(&QuditState::max_entangled(n)?)?;
    // Registers: A=0, B=1, a=2, b=3.
    let mats_a: Vec<ComplexMatrix> = exp.rep_a.matrices().to_vec();
    let st = joint.apply_controlled(2, &[0], &mats_a)?;
    let fn_basis = fourier(n)?;
    let mut work = branch_measure(
        vec![Work {
            labels: vec![],
            prob: 1.0,
            state: st,
        }],
        &[2],
        Basis::Matrix(&fn_basis),
    )?;
    for w in &mut work {
        let h = *w.labels.last().unwrap();
        let phases: Vec<Complex64> = (0..n)
            .map(|f| {
                Complex64::from_polar(1.0, -std::f64::consts::TAU * (f * h) as f64 / n as f64)
            })
            .collect();
        w.state = w.state.apply_diag(2, &phases)?;
        // b is the fast index of the composite gate, B the slow one.
        w.state = w.state.apply_on(&gate, &[2, 1])?;
    }
    let mut work = branch_measure(work, &[2], Basis::Computational)?;
    for w in &mut work {
        let g = *w.labels.last().unwrap();
        w.state = w.state.apply_on(exp.rep_a.matrix(g), &[0])?;
    }
    let ebits = (n as f64).log2();
    Ok(ProtocolRun {
        protocol_id: "P4".into(),
        branches: work
            .into_iter()
            .map(|w| Branch {
                outcome: w.labels,
                probability: w.prob,
                state: w.state,
            })
            .collect(),
        resources: ResourceLog {
            ebits,
            messages: vec![
                Message {
                    direction: Direction::AToB,
                    bits: ebits,
                    round: 0,
                },
                Message {
                    direction: Direction::BToA,
                    bits: ebits,
                    round: 1,
                },
            ],
        },
    })
}

/// Protocol 5: the fast double-group protocol. Both parties measure
/// simultaneously and exchange one message each in opposite directions.
pub fn run_protocol5(exp: &DoubleGroupExpansion, input: &QuditState) -> Result<ProtocolRun> {
    let (d_a, d_b) = (exp.pair.d_a(), exp.pair.d_b());
    if input.dims() != [d_a, d_b] {
        return Err(Error::DimensionMismatch("protocol 5 input dims".into()));
    }
    let n = exp.pair.order();
    let fast = fast_structure(exp)?;
    let ab = exp.pair.group.abelian.as_ref().expect("fast form is abelian");
    let scale = 1.0 / (n as f64).sqrt();
    // A measures in the character basis; B's basis depends on the structure.
    let char_basis = ComplexMatrix::from_fn(n, n, |f, h| ab.character(h, f).conj() * scale);
    let joint = input.kron(&QuditState::max_entangled(n)?)?;
    // Registers: A=0, B=1, a=2, b=3. Both controlled gates commute.
    let st = joint
        .apply_controlled(2, &[0], &exp.pair.mats_a)?
        .apply_controlled(3, &[1], &exp.pair.mats_b)?;
    let work = branch_measure(
        vec![Work {
            labels: vec![],
            prob: 1.0,
            state: st,
        }],
        &[2],
        Basis::Matrix(&char_basis),
    )?;
    let mut work = match &fast {
        FastStructure::TwistedBasis { u_of_w, .. } => {
            let coeff_basis = ComplexMatrix::from_fn(n, n, |f, g| {
                exp.coeffs[f].conj() * ab.character(g, f)
            });
            let mut work = branch_measure(work, &[2], Basis::Matrix(&coeff_basis))?;
            for w in &mut work {
                let g = w.labels[w.labels.len() - 1];
                let h = w.labels[w.labels.len() - 2];
                let u = u_of_w[ab.dual_sub(h, g)];
                w.state = w.state.apply_on(&exp.pair.mats_a[u].dagger(), &[0])?;
                w.state = w.state.apply_on(&exp.pair.mats_b[u].dagger(), &[1])?;
            }
            work
        }
        FastStructure::Concentrated { f0 } => {
            let mut work = branch_measure(work, &[2], Basis::Computational)?;
            for w in &mut work {
                let g = w.labels[w.labels.len() - 1];
                // Correction M(f0) M(g)† factors into local pieces.
                let ca = exp.pair.mats_a[*f0].mul(&exp.pair.mats_a[g].dagger());
                let cb = exp.pair.mats_b[*f0].mul(&exp.pair.mats_b[g].dagger());
                w.state = w.state.apply_on(&ca, &[0])?;
                w.state = w.state.apply_on(&cb, &[1])?;
            }
            work
        }
    };
    let ebits = (n as f64).log2();
    Ok(ProtocolRun {
        protocol_id: "P5".into(),
        branches: work
            .into_iter()
            .map(|w| Branch {
                outcome: w.labels,
                probability: w.prob,
                state: w.state,
            })
            .collect(),
        resources: ResourceLog {
            ebits,
            messages: vec![
                Message {
                    direction: Direction::AToB,
                    bits: ebits,
                    round: 0,
                },
                Message {
                    direction: Direction::BToA,
                    bits: ebits,
                    round: 0,
                },
            ],
        },
    })
}

/// Protocol 6: the fast controlled-group protocol. The control side shifts the
/// ancilla by the group element of its block; one parallel round.
pub fn run_protocol6(
    form: &ControlledForm,
    rep: &ProjectiveRep,
    input: &QuditState,
) -> Result<ProtocolRun> {
    if input.dims() != [form.d_a, form.d_b] {
        return Err(Error::DimensionMismatch("protocol 6 input dims".into()));
    }
    if rep.dim() != form.d_b {
        return Err(Error::DimensionMismatch(
            "representation acts on the wrong target dimension".into(),
        ));
    }
    let ab = rep
        .abelian()
        .ok_or_else(|| Error::Unsupported("protocol 6 needs an abelian group".into()))?
        .clone();
    let n = rep.order();
    // Match each target to a representation element (up to phase).
    let mut assignment = Vec::with_capacity(form.targets.len());
    for (j, v) in form.targets.iter().enumerate() {
        let (g, phase) = rep.find_element(v, 1e-8).ok_or_else(|| {
            Error::InvalidForm(format!("target {j} is not in the supplied representation"))
        })?;
        assignment.push((g, phase));
    }
    let joint = input.kron(&QuditState::max_entangled(n)?)?;
    // Registers: A=0, B=1, a=2, b=3.
    // Controlled left-translation of a by g_j, with A as the control.
    let shift_ops: Vec<ComplexMatrix> = (0..form.d_a)
        .map(|alpha| {
            let g = assignment[form.block_of(alpha)].0;
            ComplexMatrix::from_fn(n, n, |r, c| {
                if r == rep.mul_elem(g, c) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    // B applies V(f^{-1}) controlled on b; commutes with A's operations.
    let binv_ops: Vec<ComplexMatrix> = (0..n).map(|f| rep.matrix(rep.inv_elem(f)).clone()).collect();
    let scale = 1.0 / (n as f64).sqrt();
    let char_basis = ComplexMatrix::from_fn(n, n, |f, w| ab.character(w, f).conj() * scale);
    let st = joint
        .apply_controlled(0, &[2], &shift_ops)?
        .apply_controlled(3, &[1], &binv_ops)?;
    let work = branch_measure(
        vec![Work {
            labels: vec![],
            prob: 1.0,
            state: st,
        }],
        &[2],
        Basis::Computational,
    )?;
    let mut work = branch_measure(work, &[2], Basis::Matrix(&char_basis))?;
    for wk in &mut work {
        let m = wk.labels[wk.labels.len() - 2];
        let w = wk.labels[wk.labels.len() - 1];
        let minv = rep.inv_elem(m);
        wk.state = wk.state.apply_on(&rep.matrix(minv).dagger(), &[1])?;
        // Block-diagonal phase fix on A from the protocol data.
        let phases: Vec<Complex64> = (0..form.d_a)
            .map(|alpha| {
                let (g, phi) = assignment[form.block_of(alpha)];
                phi * ab.character(w, g) * rep.phase(minv, g)
            })
            .collect();
        wk.state = wk.state.apply_diag(0, &phases)?;
    }
    let ebits = (n as f64).log2();
    Ok(ProtocolRun {
        protocol_id: "P6".into(),
        branches: work
            .into_iter()
            .map(|w| Branch {
                outcome: w.labels,
                probability: w.prob,
                state: w.state,
            })
            .collect(),
        resources: ResourceLog {
            ebits,
            messages: vec![
                Message {
                    direction: Direction::AToB,
                    bits: ebits,
                    round: 0,
                },
                Message {
                    direction: Direction::BToA,
                    bits: ebits,
                    round: 0,
                },
            ],
        },
    })
}

/// Protocol 7 for bipartite Clifford unitaries on `m + n` qudits of prime
/// dimension `d`: generalized Bell measurements against the U-twisted
/// resource, one simultaneous exchange, Pauli corrections conjugated through U.
pub fn run_protocol7_clifford(
    u: &ComplexMatrix,
    input: &QuditState,
    m: usize,
    n: usize,
    d: usize,
) -> Result<ProtocolRun> {
    if !is_clifford(u, m, n, d)? {
        return Err(Error::InvalidForm(
            "protocol 7 requires a generalized Clifford unitary; the conjugation \
             test found a non-Pauli image"
                .into(),
        ));
    }
    let sites = m + n;
    if input.dims() != vec![d; sites] {
        return Err(Error::DimensionMismatch(format!(
            "protocol 7 input must be {sites} qudits of dimension {d}"
        )));
    }
    // Resource: pairs (a_i, A'_i) and (B'_j, b_j), then U on A' + B'.
    let mut resource = QuditState::max_entangled(d)?;
    for _ in 1..sites {
        resource = resource.kron(&QuditState::max_entangled(d)?)?;
    }
    // Current order: [x_0, y_0, x_1, y_1, ...] where each pair is (ref, data).
    // Move to [refs..., data...]: perm[new] = old.
    let mut perm = Vec::with_capacity(2 * sites);
    for i in 0..sites {
        perm.push(2 * i);
    }
    for i in 0..sites {
        perm.push(2 * i + 1);
    }
    let resource = resource.permute(&perm)?;
    let data_sites: Vec<usize> = (sites..2 * sites).collect();
    let resource = resource.apply_on(u, &data_sites)?;
    // Full register: [input sites (0..sites), refs (sites..2sites), data ...].
    let joint = input.kron(&resource)?;
    // Per-site Bell measurements (input_i, ref_i); indices shift as pairs are
    // consumed: after k measurements, input_i sits at i - k and ref_i at
    // sites + i - 2k.
    let basis = bell_basis(d)?;
    let mut work = vec![Work {
        labels: vec![],
        prob: 1.0,
        state: joint,
    }];
    // After i pairs are consumed, input_i sits at position 0 and ref_i at
    // sites - i.
    for i in 0..sites {
        work = branch_measure(work, &[0, sites - i], Basis::Matrix(&basis))?;
    }
    // Precompute U (site Pauli) U† per site and outcome.
    let eye = ComplexMatrix::identity(d);
    let mut conj_table: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(sites);
    for site in 0..sites {
        let mut per_outcome = Vec::with_capacity(d * d);
        for o in 0..d * d {
            let pauli = gen_pauli(d, o / d, o % d)?;
            let ops: Vec<&ComplexMatrix> = (0..sites)
                .map(|s| if s == site { &pauli } else { &eye })
                .collect();
            let full = ComplexMatrix::kron_le(&ops);
            per_outcome.push(u.mul(&full).mul(&u.dagger()));
        }
        conj_table.push(per_outcome);
    }
    let all_sites: Vec<usize> = (0..sites).collect();
    let mut branches = Vec::with_capacity(work.len());
    for w in work {
        let mut corr = conj_table[0][w.labels[0]].clone();
        for site in 1..sites {
            corr = corr.mul(&conj_table[site][w.labels[site]]);
        }
        let state = w.state.apply_on(&corr, &all_sites)?;
        branches.push(Branch {
            outcome: w.labels,
            probability: w.prob,
            state,
        });
    }
    let ebits = (sites as f64) * (d as f64).log2();
    Ok(ProtocolRun {
        protocol_id: "P7".into(),
        branches,
        resources: ResourceLog {
            ebits,
            messages: vec![
                Message {
                    direction: Direction::AToB,
                    bits: 2.0 * (m as f64) * (d as f64).log2(),
                    round: 0,
                },
                Message {
                    direction: Direction::BToA,
                    bits: 2.0 * (n as f64) * (d as f64).log2(),
                    round: 0,
                },
            ],
        },
    })
}

fn rotation(theta: f64) -> ComplexMatrix {
    ComplexMatrix::diag(&[
        Complex64::from_polar(1.0, theta),
        Complex64::from_polar(1.0, -theta),
    ])
}

/// Protocol 8: remote rotation `diag(e^{i theta}, e^{-i theta})` on B's qubit
/// with the angle held by A. One ebit, two c-bits in opposite directions.
pub fn run_protocol8(theta: f64, input: &QuditState) -> Result<ProtocolRun> {
    if input.dims() != [2] {
        return Err(Error::DimensionMismatch("protocol 8 input must be one qubit".into()));
    }
    // Registers: B_data=0, a=1 (at A), b=2 (at B).
    let joint = input.kron(&QuditState::max_entangled(2)?)?;
    let x = gen_pauli_x(2)?;
    let cnot_ops = vec![ComplexMatrix::identity(2), x.clone()];
    let st = joint.apply_controlled(0, &[2], &cnot_ops)?;
    let work = branch_measure(
        vec![Work {
            labels: vec![],
            prob: 1.0,
            state: st,
        }],
        &[2],
        Basis::Computational,
    )?;
    let h2 = fourier(2)?;
    let rot = rotation(theta);
    let mut staged = Vec::new();
    for mut w in work {
        let m = *w.labels.last().unwrap();
        if m == 1 {
            w.state = w.state.apply_on(&x, &[1])?;
        }
        w.state = w.state.apply_on(&rot, &[1])?;
        staged.push(w);
    }
    let mut work = branch_measure(staged, &[1], Basis::Matrix(&h2))?;
    let z = gen_pauli_z(2)?;
    for w in &mut work {
        let t = *w.labels.last().unwrap();
        if t == 1 {
            w.state = w.state.apply_on(&z, &[0])?;
        }
    }
    Ok(ProtocolRun {
        protocol_id: "P8".into(),
        branches: work
            .into_iter()
            .map(|w| Branch {
                outcome: w.labels,
                probability: w.prob,
                state: w.state,
            })
            .collect(),
        resources: ResourceLog {
            ebits: 1.0,
            messages: vec![
                Message {
                    direction: Direction::BToA,
                    bits: 1.0,
                    round: 0,
                },
                Message {
                    direction: Direction::AToB,
                    bits: 1.0,
                    round: 1,
                },
            ],
        },
    })
}

/// Expected number of ladder steps: `sum_{k<=N} k 2^{-k} + N 2^{-N}`.
pub fn ladder_expected_steps(n: usize) -> crate::rational::Rat {
    use crate::rational::rat;
    let mut acc = rat(0, 1);
    for k in 1..=n as i64 {
        acc += rat(k, 1) / rat(2, 1).pow(k as i32);
    }
    acc + rat(n as i64, 1) / rat(2, 1).pow(n as i32)
}

/// Protocol 8.1 rotation ladder for `theta = q pi / 2^N`: each step applies
/// `V_k` or `V_k†` with probability 1/2; `V_k` closes the ladder, and step N
/// closes it regardless because `V_N† = -V_N`.
pub fn run_protocol8_ladder(q: i64, n: usize, input: &QuditState) -> Result<ProtocolRun> {
    if q % 2 == 0 {
        return Err(Error::InvalidForm("ladder parameter q must be odd".into()));
    }
    if n == 0 {
        return Err(Error::InvalidForm("ladder needs N >= 1".into()));
    }
    if input.dims() != [2] {
        return Err(Error::DimensionMismatch("ladder input must be one qubit".into()));
    }
    let theta = q as f64 * std::f64::consts::PI / (1u64 << n) as f64;
    // Front end identical to Protocol 8 up to the rotation step.
    let joint = input.kron(&QuditState::max_entangled(2)?)?;
    let x = gen_pauli_x(2)?;
    let z = gen_pauli_z(2)?;
    let cnot_ops = vec![ComplexMatrix::identity(2), x.clone()];
    let st = joint.apply_controlled(0, &[2], &cnot_ops)?;
    let work = branch_measure(
        vec![Work {
            labels: vec![],
            prob: 1.0,
            state: st,
        }],
        &[2],
        Basis::Computational,
    )?;
    let mut ladder: Vec<Work> = Vec::new();
    for mut w in work {
        let m = *w.labels.last().unwrap();
        if m == 1 {
            w.state = w.state.apply_on(&x, &[1])?;
        }
        ladder.push(w);
    }
    // Ladder teleports on the carrier (register 1) against twisted pairs.
    let bell = bell_basis(2)?;
    let mut closed: Vec<Work> = Vec::new();
    for k in 1..=n {
        let phi = (1u64 << (k - 1)) as f64 * theta;
        let pair = {
            let amp = 1.0 / 2f64.sqrt();
            QuditState::from_amplitudes(
                vec![2, 2],
                vec![
                    Complex64::from_polar(amp, phi),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::from_polar(amp, -phi),
                ],
            )?
        };
        let mut next = Vec::new();
        for w in ladder {
            // Registers: B_data=0, carrier=1, r1=2, r2=3.
            let joined = w.state.kron(&pair)?;
            for br in joined.measure(&[1, 2], Basis::Matrix(&bell))? {
                let p = br.outcome / 2;
                let qq = br.outcome % 2;
                // Usual teleport corrections; r2 is now register 1.
                let mut s = br.post_state.apply_on(&gen_pauli(2, p, qq)?, &[1])?;
                let mut labels = w.labels.clone();
                labels.push(br.outcome);
                // p = 0 leaves V_k (terminate); p = 1 leaves V_k† (continue).
                let terminate = p == 0 || k == n;
                if terminate {
                    // Nothing further on the carrier in this step.
                } else {
                    s = s.clone();
                }
                let out = Work {
                    labels,
                    prob: w.prob * br.probability,
                    state: s,
                };
                if terminate {
                    closed.push(out);
                } else {
                    next.push(out);
                }
            }
        }
        ladder = next;
    }
    debug_assert!(ladder.is_empty());
    // Fourier measurement of the carrier, Z correction on the data qubit.
    let h2 = fourier(2)?;
    let mut work = branch_measure(closed, &[1], Basis::Matrix(&h2))?;
    for w in &mut work {
        let t = *w.labels.last().unwrap();
        if t == 1 {
            w.state = w.state.apply_on(&z, &[0])?;
        }
    }
    Ok(ProtocolRun {
        protocol_id: format!("P8.1-ladder(q={q},N={n})"),
        branches: work
            .into_iter()
            .map(|w| Branch {
                outcome: w.labels,
                probability: w.prob,
                state: w.state,
            })
            .collect(),
        resources: ResourceLog {
            ebits: 1.0,
            messages: vec![
                Message {
                    direction: Direction::BToA,
                    bits: 1.0,
                    round: 0,
                },
                Message {
                    direction: Direction::AToB,
                    bits: 1.0,
                    round: 1,
                },
            ],
        },
    })
}

/// Target rotation implemented by the ladder, for oracle checks.
pub fn ladder_target(q: i64, n: usize) -> ComplexMatrix {
    rotation(q as f64 * std::f64::consts::PI / (1u64 << n) as f64)
}

/// The rotation gate of Protocol 8.
pub fn rotation_gate(theta: f64) -> ComplexMatrix {
    rotation(theta)
}
