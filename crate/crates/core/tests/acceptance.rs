//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line with
//! the measured quantity and its tolerance before asserting.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinet::collapse::{collapse_network, quotient_deviation, verify_perfect_transport};
use spinet::conditions::{
    appendix_unitary, check_invariance, check_perfect_transport_dense, fidelity_hs, fidelity_hs_dense,
    hamiltonian_support_check, solve_lambda_combination, swap_transport_check, transport_sign, FORM_COUNT,
};
use spinet::fermion::FermionTransport;
use spinet::hilbert::{dense, pauli_decompose, propagator, random_unitary, DenseTransport};
use spinet::network::{hamiltonian, library, pst_chain, Ends, HamiltonianKind, SpinNetwork};
use spinet::pauli::{flip_flop, Letter, OperatorExpr, PauliString, Sign};
use spinet::walk::{moments, table1_check, walk_operators};

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!("[{}] criterion {id:02} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn grid(t_max: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |k| t_max * k as f64 / (points - 1) as f64)
}

/// Random connected graph: a random spanning tree plus extra edges.
fn random_connected(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> SpinNetwork {
    let mut edges = Vec::new();
    for v in 2..=n {
        edges.push((rng.gen_range(1..v), v, rng.gen_range(lo..hi)));
    }
    for i in 1..=n {
        for j in i + 1..=n {
            if rng.gen_bool(0.3) && !edges.iter().any(|&(a, b, _)| (a, b) == (i, j)) {
                edges.push((i, j, rng.gen_range(lo..hi)));
            }
        }
    }
    let s = rng.gen_range(1..=n);
    let t = loop {
        let t = rng.gen_range(1..=n);
        if t != s {
            break t;
        }
    };
    SpinNetwork::new(n, Ends::new(s, t), edges, None).unwrap()
}

#[test]
fn criterion_01_lambda_exactness() {
    let net = library::lambda3();
    let mut worst: f64 = 0.0;
    for kind in [HamiltonianKind::Xy, HamiltonianKind::Mxy, HamiltonianKind::Dq] {
        let f = DenseTransport::new(&net, kind).unwrap().fidelity(PI);
        worst = worst.max((f - 1.0).abs());
    }
    let xy = DenseTransport::new(&net, HamiltonianKind::Xy).unwrap();
    let mxy = DenseTransport::new(&net, HamiltonianKind::Mxy).unwrap();
    let gap = grid(2.0 * PI, 200)
        .map(|t| (xy.fidelity(t) - mxy.fidelity(t)).abs())
        .fold(0.0, f64::max);
    report(
        1,
        "lambda network exactness",
        worst < 1e-9 && gap < 1e-12,
        format!("max |F(pi) - 1| over xy/mxy/dq = {worst:.2e} (tol 1e-9); max |F_xy - F_mxy| = {gap:.2e}"),
    );
}

#[test]
fn criterion_02_fig3() {
    let net = library::fig3();
    let xy_peak = DenseTransport::new(&net, HamiltonianKind::Xy)
        .unwrap()
        .trace(4.0 * PI, 4001)
        .unwrap()
        .peak
        .fidelity;
    let dense = DenseTransport::new(&net, HamiltonianKind::Mxy).unwrap();
    let at = (dense.fidelity(PI / 6f64.sqrt()) - 1.0).abs();
    let fermion = FermionTransport::new(&net);
    let gap = grid(4.0 * PI, 1000)
        .map(|t| (dense.fidelity(t) - fermion.fidelity(t)).abs())
        .fold(0.0, f64::max);
    report(
        2,
        "three-path network",
        xy_peak < 0.99 && at < 1e-9 && gap < 1e-9,
        format!("xy max F = {xy_peak:.6} (< 0.99); |F_mxy(pi/sqrt6) - 1| = {at:.2e}; dense/fermion gap = {gap:.2e}"),
    );
}

#[test]
fn criterion_03_walk_table() {
    let net = library::fig5();
    let mut lines = Vec::new();
    let mut ok = true;
    for kind in [HamiltonianKind::Xy, HamiltonianKind::Mxy] {
        for row in table1_check(&net, kind).unwrap() {
            ok &= row.matches();
            lines.push(format!("{kind}{}:{}", row.order, row.scale.map_or("-".into(), |s| s.to_string())));
        }
    }
    report(3, "walk operator table", ok, format!("order:scale {}", lines.join(" ")));
}

#[test]
fn criterion_04_appendix_families() {
    let mut worst_u: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for form in 1..=FORM_COUNT {
        let sign = transport_sign(form).unwrap();
        for k in 0..20u64 {
            let w = random_unitary(2, 1000 * form as u64 + 2 * k);
            let wp = random_unitary(2, 1000 * form as u64 + 2 * k + 1);
            let u = appendix_unitary(form, &w, &wp, sign).unwrap();
            worst_u = worst_u.max(u.unitarity_residual());
            worst_f = worst_f.max((fidelity_hs_dense(&u, Ends::outer(4)).unwrap() - 1.0).abs());
        }
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let lam = solve_lambda_combination([c(0.5f64.sqrt()), c(0.5), c(0.5)], Sign::Plus).unwrap();
    report(
        4,
        "explicit propagator families",
        worst_u < 1e-10 && worst_f < 1e-9 && lam.constraints_hold && lam.perfect,
        format!(
            "8 forms x 20 bulks: unitarity {worst_u:.2e}, |F - 1| {worst_f:.2e}; lambda (1/sqrt2,1/2,1/2) F = {:.12}",
            lam.fidelity
        ),
    );
}

#[test]
fn criterion_05_hs_direct_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=5);
        let net = random_connected(&mut rng, n, 0.2, 2.0);
        let t = rng.gen_range(0.0..10.0);
        let h = dense(&hamiltonian(&net, HamiltonianKind::Xy).unwrap()).unwrap();
        let u = pauli_decompose(&propagator(&h, t).unwrap()).unwrap();
        let hs = fidelity_hs(&u, net.ends()).unwrap();
        let direct = DenseTransport::new(&net, HamiltonianKind::Xy).unwrap().fidelity(t);
        worst = worst.max((hs - direct).abs());
    }
    report(5, "HS and direct fidelity agree", worst < 1e-10, format!("max gap over 50 networks = {worst:.2e} (tol 1e-10)"));
}

#[test]
fn criterion_06_checker_soundness() {
    let mut ok = true;
    let mut worst_norm: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    for n in 3..=6 {
        let net = pst_chain(n, 1.0).unwrap();
        let tr = DenseTransport::new(&net, HamiltonianKind::Xy).unwrap();
        let peak = PI / 2.0;
        let at = check_perfect_transport_dense(&tr.propagator(peak), net.ends()).unwrap();
        worst_norm = worst_norm.max((at.norm_g - 0.5).abs()).max((at.norm_gt - 0.5).abs());
        worst_eig = worst_eig.max(at.eig_residual_g).max(at.eig_residual_gt);
        let half = check_perfect_transport_dense(&tr.propagator(peak / 2.0), net.ends()).unwrap();
        ok &= at.verdict && !half.verdict;
    }
    ok &= worst_norm < 1e-8 && worst_eig < 1e-8;
    report(
        6,
        "perfect-transport checker",
        ok,
        format!("n = 3..6 at t* = pi/2: |norm - 1/2| {worst_norm:.2e}, eigen residual {worst_eig:.2e}; half time rejected"),
    );
}

#[test]
fn criterion_07_invariance() {
    let net = SpinNetwork::new(5, Ends::outer(5), (1..5).map(|i| (i, i + 1, 1.0)), None).unwrap();
    let v = dense(&OperatorExpr::parse_string(5, "X2 X4").unwrap()).unwrap();
    let xy = DenseTransport::new(&net, HamiltonianKind::Xy).unwrap();
    let dq = DenseTransport::new(&net, HamiltonianKind::Dq).unwrap();
    let inv = check_invariance(&v, &xy.propagator(1.3), net.ends()).unwrap();
    let gap = grid(4.0 * PI, 500)
        .map(|t| (xy.fidelity(t) - dq.fidelity(t)).abs())
        .fold(0.0, f64::max);
    report(
        7,
        "invariance under even-site flips",
        inv.residual < 1e-12 && gap < 1e-9,
        format!("commutation residual {:.2e} (tol 1e-12); max |F_xy - F_dq| {gap:.2e} (tol 1e-9)", inv.residual),
    );
}

#[test]
fn criterion_08_pure_flip_support() {
    let two = flip_flop(2, 1, 2, Sign::Plus).unwrap();
    let x2 = PauliString::from_letters(3, &[(2, Letter::X)]).unwrap();
    let three = flip_flop(3, 1, 3, Sign::Plus).unwrap().left_mul_string(&x2).unwrap();
    let mut ok = true;
    let mut firsts = Vec::new();
    for h in [&two, &three] {
        let r = hamiltonian_support_check(h, Ends::outer(h.n_sites())).unwrap();
        ok &= r.holds() && r.square_residual.unwrap() < 1e-12;
        let d = DenseTransport::from_hamiltonian(&dense(h).unwrap(), Ends::outer(h.n_sites())).unwrap();
        let tr = d.trace(PI, 2001).unwrap();
        firsts.push(tr.peak.time);
        ok &= (tr.peak.fidelity - 1.0).abs() < 1e-9 && (tr.peak.time - PI / 2.0).abs() < 1e-6;
        // at a quarter period the transfer is only half complete
        ok &= (d.fidelity(PI / 4.0) - 0.5).abs() < 1e-12;
    }
    report(
        8,
        "pure flip-flop support conditions",
        ok,
        format!(
            "H^2 = (Id - Z1ZN)/2 holds; first transfer at t = {:.9}, {:.9} (pi/2 = {:.9}); F(pi/4) = 1/2, a quarter period moves only half",
            firsts[0],
            firsts[1],
            PI / 2.0
        ),
    );
}

#[test]
fn criterion_09_moment_series() {
    let mut worst: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for net in [library::lambda3(), library::fig5()] {
        let h = hamiltonian(&net, HamiltonianKind::Mxy).unwrap();
        let m = moments(&h, net.ends(), 12).unwrap();
        let tr = DenseTransport::new(&net, HamiltonianKind::Mxy).unwrap();
        for t in grid(0.5, 51) {
            worst = worst.max((m.evaluate(t).re - tr.fidelity(t)).abs());
        }
        let walk = walk_operators(&h, net.ends().source, 5).unwrap();
        for n in 1..=6 {
            let mut alt = OperatorExpr::zero(net.n());
            let mut binom = 1.0;
            for k in 0..n {
                if k > 0 {
                    binom = binom * (n - k) as f64 / k as f64;
                }
                let term = walk[n - 1 - k].expr.product(&m.multipliers[k]).unwrap();
                alt = &alt + &(&term * binom);
            }
            recon = recon.max(alt.max_abs_diff(&m.multipliers[n]).unwrap());
        }
    }
    report(
        9,
        "moment series",
        worst < 1e-6 && recon < 1e-12,
        format!("series vs dense for t <= 0.5: {worst:.2e} (tol 1e-6); binomial reconstruction n <= 6: {recon:.2e}"),
    );
}

#[test]
fn criterion_10_engineering_pipeline() {
    let b = verify_perfect_transport(&library::fig7b(0.8, 0.5).unwrap(), None, 4001).unwrap();
    let xy = b.xy.unwrap().fidelity;
    let mut ok = (b.mxy.fidelity - 1.0).abs() < 1e-9 && xy < 1.0;
    let mut sweep: f64 = 0.0;
    for g in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let r = verify_perfect_transport(&library::fig7a(g).unwrap(), None, 4001).unwrap();
        sweep = sweep.max((r.mxy.fidelity - 1.0).abs());
    }
    ok &= sweep < 1e-9;
    let fig5 = library::fig5();
    let chain = collapse_network(&fig5, fig5.partition().unwrap()).unwrap();
    let r2 = 2f64.sqrt();
    let chain_err = chain
        .couplings
        .iter()
        .zip([r2, 1.0, r2])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let quotient = quotient_deviation(&fig5, &chain, 4.0 * PI, 1000).unwrap();
    ok &= chain_err < 1e-12 && quotient < 1e-9;
    let big = library::fig8([0.3, 0.5, 0.8]).unwrap();
    let f8 = verify_perfect_transport(&big.network, None, 4001).unwrap().mxy.fidelity;
    ok &= big.network.n() >= 12 && (f8 - 1.0).abs() < 1e-9;
    report(
        10,
        "engineering pipeline",
        ok,
        format!(
            "branched 7-node: mxy {:.12}, xy {xy:.6}; two-path sweep max |F-1| {sweep:.2e}; \
             two-path collapse err {chain_err:.2e}, quotient gap {quotient:.2e}; {}-node: mxy {f8:.12}",
            b.mxy.fidelity,
            big.network.n()
        ),
    );
}

#[test]
fn criterion_11_backend_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..=8);
        let net = random_connected(&mut rng, n, 0.2, 2.0);
        let d = DenseTransport::new(&net, HamiltonianKind::Mxy).unwrap();
        let f = FermionTransport::new(&net);
        for t in grid(10.0, 60) {
            worst = worst.max((d.fidelity(t) - f.fidelity(t)).abs());
        }
    }
    report(11, "dense and fermion backends agree", worst < 1e-9, format!("max pointwise gap over 50 graphs = {worst:.2e} (tol 1e-9)"));
}

#[test]
fn criterion_12_swap_transport() {
    let s = OperatorExpr::parse_string;
    let id = OperatorExpr::identity(4).unwrap();
    let swap = &(&(&id + &s(4, "X1 X4").unwrap()) + &(&s(4, "Y1 Y4").unwrap() + &s(4, "Z1 Z4").unwrap())) * 0.5;
    let r = swap_transport_check(&dense(&swap).unwrap(), Ends::outer(4)).unwrap();
    let worst = [r.z, r.x, r.y].iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    report(
        12,
        "simultaneous transport by swap",
        worst < 1e-12 && r.swap,
        format!("F_z = {:.15}, F_x = {:.15}, F_y = {:.15}", r.z, r.x, r.y),
    );
}
