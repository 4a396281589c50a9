//! Acceptance suite. Runs without the libtest harness so that each criterion
//! reports exactly one PASS/FAIL line; the process exits non-zero if any fail.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::*;
use hamburger::cayley::{self, PhiSpec, SchurParameter};
use hamburger::l2space::{self, DiscreteMatrixMeasure};
use hamburger::linalg::CMat;
use hamburger::moments::{self, MomentSequence};
use hamburger::{nevanlinna, reconstruct, Error, MomentModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn evaluator<'a>(model: &'a MomentModel, p: &SchurParameter) -> impl Fn(hamburger::Complex64) -> hamburger::Result<CMat> + Sync + 'a {
    let p = p.clone();
    move |z| nevanlinna::evaluate_matrix(model, &p, z).map(|v| v.r)
}

fn point_mass_grid() -> Vec<hamburger::Complex64> {
    let ys = [0.1, 0.5, 1.3, 2.5, 5.0];
    (0..10)
        .flat_map(|k| {
            let x = -4.0 + 8.0 * k as f64 / 9.0;
            ys.iter().map(move |&y| c(x, y))
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let zs = point_mass_grid();
    let mut worst = 0.0_f64;
    for t0 in [0.0, 2.0, -3.0] {
        let mu = DiscreteMatrixMeasure::scalar(&[t0], &[1.0]).unwrap();
        let m = moments::generate_from_measure(&mu, 6).unwrap();
        let model = model_of(&m);
        let p = PhiSpec::Zero.resolve(&model.cayley).unwrap();
        for v in nevanlinna::evaluate_grid(&model, &p, &zs).unwrap() {
            let exact = c(1.0, 0.0) / (c(t0, 0.0) - v.z);
            worst = worst.max((v.r[(0, 0)] - exact).norm());
        }
    }
    outcome(worst <= 1e-10, format!("max |R - 1/(t0-z)| = {worst:.3e} over 3 x {} points", zs.len()))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let model = if k % 10 == 0 { gaussian_model() } else { random_indeterminate_model(&mut rng) };
        let p = match k % 3 {
            0 => random_strict_contraction(&mut rng, &model),
            1 => random_unitary_parameter(&mut rng, &model),
            _ => SchurParameter::zero(model.defect_dims().1, model.defect_dims().0),
        };
        let z = random_z(&mut rng);
        let b = nevanlinna::blocks(&model.cayley, &p, z).unwrap();
        let fast = nevanlinna::frobenius_topleft(&b).unwrap();
        let dense = nevanlinna::dense_topleft(&model.cayley, &p, z).unwrap();
        worst = worst.max(rel_err(&fast, &dense));
    }
    outcome(worst <= 1e-10, format!("max relative gap = {worst:.3e} over 50 triples"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    let mut checks = 0;
    for k in 0..20 {
        let model = if k < 3 { gaussian_model() } else { random_indeterminate_model(&mut rng) };
        let p = random_unitary_parameter(&mut rng, &model);
        let zs: Vec<_> = (0..20).map(|_| random_z(&mut rng)).collect();
        for z in zs {
            match cayley::resolvent_link_check(&model.cayley, &p, z) {
                Ok(r) => {
                    worst = worst.max(r);
                    checks += 1;
                }
                Err(e) => return outcome(false, format!("parameter {k}, z = {z}: {e}")),
            }
        }
    }
    outcome(worst <= 1e-8, format!("max residual = {worst:.3e} over {checks} (parameter, z) pairs"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut models: Vec<MomentModel> = (0..9).map(|_| random_indeterminate_model(&mut rng)).collect();
    models.push(gaussian_model());
    let mut form_gap = 0.0_f64;
    let mut strict = 0;
    let mut ext_gap = 0.0_f64;
    let mut ext_checks = 0;
    let mut ext_skipped = 0;
    for k in 0..100 {
        let model = &models[k % models.len()];
        let (p, unitary) = match k % 4 {
            0 | 1 => {
                strict += 1;
                (random_strict_contraction(&mut rng, model), false)
            }
            2 => (random_unitary_parameter(&mut rng, model), true),
            _ => {
                let (dp, _) = model.defect_dims();
                (SchurParameter::unitary_phase(dp, rng.gen_range(0.0..2.0 * PI)), true)
            }
        };
        let z = random_z(&mut rng);
        let h = random_vector(&mut rng, model.dim());
        let a = nevanlinna::evaluate_form(model, &p, z, &h).unwrap();
        let b = nevanlinna::direct_oracle(model, &p, z, &h).unwrap();
        form_gap = form_gap.max((a - b).norm() / b.norm().max(1.0));
        if unitary {
            match nevanlinna::extension_oracle(model, &p, z) {
                Ok(oracle) => {
                    let r = nevanlinna::evaluate_matrix(model, &p, z).unwrap().r;
                    ext_gap = ext_gap.max(rel_err(&r, &oracle));
                    ext_checks += 1;
                }
                Err(Error::Conditioning { .. }) => ext_skipped += 1,
                Err(e) => return outcome(false, format!("extension oracle failed: {e}")),
            }
        }
    }
    // The Gaussian model at the three reference angles, where U - 1 is invertible.
    let g = gaussian_model();
    for theta in [0.0, PI / 2.0, PI] {
        let p = SchurParameter::unitary_phase(1, theta);
        for z in [c(0.0, 2.0), c(1.5, 0.3), c(-2.0, 1.0)] {
            match nevanlinna::extension_oracle(&g, &p, z) {
                Ok(oracle) => {
                    let r = nevanlinna::evaluate_matrix(&g, &p, z).unwrap().r;
                    ext_gap = ext_gap.max(rel_err(&r, &oracle));
                    ext_checks += 1;
                }
                Err(Error::Conditioning { .. }) => ext_skipped += 1,
                Err(e) => return outcome(false, format!("extension oracle failed: {e}")),
            }
        }
    }
    let pass = form_gap <= 1e-10 && ext_gap <= 1e-9 && ext_checks >= 40;
    outcome(
        pass,
        format!(
            "form vs direct {form_gap:.3e} (100 samples, {strict} strict contractions); \
             vs extension {ext_gap:.3e} ({ext_checks} unitary checks, {ext_skipped} skipped: U - 1 singular)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases: Vec<(MomentModel, SchurParameter)> = Vec::new();
    for theta in [0.0, PI / 2.0, PI] {
        cases.push((gaussian_model(), SchurParameter::unitary_phase(1, theta)));
    }
    cases.push((gaussian_model(), SchurParameter::zero(1, 1)));
    for k in 0..12 {
        let model = random_indeterminate_model(&mut rng);
        let p = match k % 3 {
            0 => random_strict_contraction(&mut rng, &model),
            1 => random_unitary_parameter(&mut rng, &model),
            _ => SchurParameter::zero(model.defect_dims().1, model.defect_dims().0),
        };
        cases.push((model, p));
    }
    for t0 in [0.0, 2.0, -3.0] {
        let mu = DiscreteMatrixMeasure::scalar(&[t0], &[1.0]).unwrap();
        let model = model_of(&moments::generate_from_measure(&mu, 4).unwrap());
        cases.push((model, SchurParameter::zero(0, 0)));
    }
    let mut grid = point_mass_grid();
    grid.extend(cli_grid());
    grid.extend((0..30).map(|_| random_z(&mut rng)));

    let mut min_im = f64::INFINITY;
    let mut norm_gap = 0.0_f64;
    for (model, p) in &cases {
        let vals = nevanlinna::evaluate_grid(model, p, &grid).unwrap();
        let report = reconstruct::herglotz_check(&vals);
        min_im = min_im.min(report.min_eigenvalue);
        let y = 1e4;
        let r = nevanlinna::evaluate_matrix(model, p, c(0.0, y)).unwrap().r;
        let lhs = r * c(0.0, -y);
        norm_gap = norm_gap.max(hamburger::linalg::spectral_norm(&(lhs - model.moments().moment(0))));
    }
    outcome(
        min_im >= -1e-8 && norm_gap <= 1e-3,
        format!(
            "min eig Im R = {min_im:.3e} over {} cases x {} points; max |-iyR(iy) - S_0| at y=1e4 = {norm_gap:.3e}",
            cases.len(),
            grid.len()
        ),
    )
}

fn cli_grid() -> Vec<hamburger::Complex64> {
    hamburger::cli::default_herglotz_grid()
}

fn criterion_6() -> Outcome {
    let g = gaussian_model();
    let mut fit_gap = 0.0_f64;
    for theta in [0.0, PI / 2.0, PI] {
        let p = SchurParameter::unitary_phase(1, theta);
        let fit = match reconstruct::asymptotic_moments(evaluator(&g, &p), 2, &reconstruct::default_y_grid()) {
            Ok(f) => f,
            Err(e) => return outcome(false, format!("theta = {theta}: {e}")),
        };
        for k in 0..=2 {
            fit_gap = fit_gap.max(max_abs(&(&fit.moments[k] - g.moments().moment(k))));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut inputs: Vec<MomentSequence> = vec![
        MomentSequence::scalar(&[1.0, 0.0, 1.0, 0.0, 1.0]).unwrap(),
        MomentSequence::scalar(&[1.0, 2.0, 4.0]).unwrap(),
    ];
    for k in 0..6 {
        let d = 1 + k % 2;
        let j = 2 + k % 2;
        let mu = random_measure(&mut rng, d, j);
        inputs.push(moments::generate_from_measure(&mu, 2 * j).unwrap());
    }
    // Rank-one weights: fewer Gram dimensions than d times the node count.
    let rank_one = DiscreteMatrixMeasure::new(
        vec![-1.0, 0.5],
        vec![random_weight(&mut rng, 2, 1, 0.0), random_weight(&mut rng, 2, 1, 0.0)],
    )
    .unwrap();
    inputs.push(moments::generate_from_measure(&rank_one, 4).unwrap());

    let mut discrete_gap = 0.0_f64;
    for m in &inputs {
        let model = model_of(m);
        let mu = match reconstruct::recover_discrete(&model) {
            Ok(mu) => mu,
            Err(e) => return outcome(false, format!("recover_discrete: {e}")),
        };
        let again = moments::generate_from_measure(&mu, m.order()).unwrap();
        for (a, b) in again.moments().iter().zip(m.moments()) {
            discrete_gap = discrete_gap.max(max_abs(&(a - b)));
        }
    }
    outcome(
        fit_gap <= 1e-3 && discrete_gap <= 1e-8,
        format!(
            "asymptotic S_0..S_2 gap {fit_gap:.3e} (theta in 0, pi/2, pi); discrete reproduction gap {discrete_gap:.3e} over {} inputs",
            inputs.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let g = gaussian_model();
    let z = c(0.0, 2.0);
    let r0 = nevanlinna::evaluate_matrix(&g, &SchurParameter::unitary_phase(1, 0.0), z).unwrap().r;
    let rpi = nevanlinna::evaluate_matrix(&g, &SchurParameter::unitary_phase(1, PI), z).unwrap().r;
    let gap = (r0[(0, 0)] - rpi[(0, 0)]).norm();
    outcome(gap > 1e-3, format!("|R_0(2i) - R_pi(2i)| = {gap:.3e}"))
}

fn arctan_mass(t0: f64, a: f64, b: f64, eps: f64) -> f64 {
    (((b - t0) / eps).atan() - ((a - t0) / eps).atan()) / PI
}

fn criterion_8() -> Outcome {
    let t0 = 0.3;
    let mu = DiscreteMatrixMeasure::scalar(&[t0], &[1.0]).unwrap();
    let model = model_of(&moments::generate_from_measure(&mu, 4).unwrap());
    let p = SchurParameter::zero(0, 0);
    let intervals = [(-1.0, 1.0, 1.0), (0.5, 2.0, 0.0), (-0.2, 0.55, 1.0), (-2.0, 0.1, 0.0)];
    let mut before = 0.0_f64;
    let mut after = 0.0_f64;
    for (a, b, mass) in intervals {
        let inc = match reconstruct::stieltjes_perron(
            evaluator(&model, &p),
            a,
            b,
            &reconstruct::DEFAULT_EPS,
            reconstruct::DEFAULT_N_QUAD,
        ) {
            Ok(inc) => inc,
            Err(e) => return outcome(false, format!("[{a}, {b}]: {e}")),
        };
        for (eps, m) in inc.per_eps_matrices() {
            before = before.max((m[(0, 0)].re - arctan_mass(t0, a, b, eps)).abs());
        }
        after = after.max((inc.increment_matrix()[(0, 0)].re - mass).abs());
    }
    outcome(
        before <= 1e-2 && after <= 1e-3,
        format!("per-eps gap to arctan form {before:.3e}; extrapolated gap to true mass {after:.3e}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let hermite = DiscreteMatrixMeasure::scalar(&[-3f64.sqrt(), 0.0, 3f64.sqrt()], &[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]).unwrap();
    let matrix = random_measure(&mut rng, 2, 3);
    // Two nodes seen through order 4: the Hankel matrix is singular.
    let degenerate = DiscreteMatrixMeasure::scalar(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
    let pairs = [(hermite, 4), (matrix, 4), (degenerate, 4)];
    let mut worst = 0.0_f64;
    for (mu, order) in &pairs {
        let m = moments::generate_from_measure(mu, *order).unwrap();
        match l2space::w0_isometry_check(&m, mu, 30, &mut rng) {
            Ok(r) => worst = worst.max(r.max_residual),
            Err(e) => return outcome(false, format!("{e}")),
        }
    }
    outcome(worst <= 1e-10, format!("max isometry residual = {worst:.3e} over 3 pairs"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("point-mass exactness", criterion_1),
        ("Frobenius equivalence", criterion_2),
        ("resolvent/Cayley link", criterion_3),
        ("oracle equivalence", criterion_4),
        ("Herglotz and normalization", criterion_5),
        ("moment reproduction", criterion_6),
        ("distinctness", criterion_7),
        ("Stieltjes-Perron", criterion_8),
        ("isometry bridge", criterion_9),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            outcome(false, format!("panicked: {msg}"))
        });
        if !res.pass {
            failures += 1;
        }
        println!(
            "criterion {} {} {name}: {} ({:.2}s)",
            k + 1,
            if res.pass { "PASS" } else { "FAIL" },
            res.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
