//! Monte Carlo checks of the sampler's building blocks against closed-form
//! moments.

use ndarray::{array, Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use targetfact::linalg::Cholesky;
use targetfact::sampler::{
    gaussian_wishart_posterior, init_model, sample_mode_hyperparams, sample_mvn, sample_wishart,
    Hyperprior,
};
use targetfact::tensor::Mode;

const DRAWS: usize = 20_000;

fn wishart_mean_within(scale: Array2<f64>, nu: f64, z: f64, seed: u64) {
    let d = scale.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = Array2::<f64>::zeros((d, d));
    for _ in 0..DRAWS {
        sum += &sample_wishart(&scale, nu, &mut rng).unwrap();
    }
    let mean = sum / DRAWS as f64;
    for r in 0..d {
        for c in 0..d {
            let expect = nu * scale[[r, c]];
            let var = nu * (scale[[r, c]].powi(2) + scale[[r, r]] * scale[[c, c]]);
            let se = (var / DRAWS as f64).sqrt();
            assert!(
                (mean[[r, c]] - expect).abs() <= z * se,
                "D={d} entry ({r},{c}): {} vs {expect} (se {se})",
                mean[[r, c]]
            );
        }
    }
}

#[test]
fn wishart_means() {
    wishart_mean_within(array![[2.0]], 3.0, 4.0, 1);
    wishart_mean_within(array![[1.0, 0.3], [0.3, 0.5]], 4.0, 4.0, 2);
    let mut w = Array2::<f64>::eye(4) * 0.5;
    w[[0, 3]] = 0.1;
    w[[3, 0]] = 0.1;
    wishart_mean_within(w, 6.0, 4.0, 3);
}

#[test]
fn scalar_wishart_is_scaled_chi_square() {
    // W(2, 3) on 1×1 is 2·χ²₃: mean 6, variance 24
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xs: Vec<f64> = (0..DRAWS)
        .map(|_| sample_wishart(&array![[2.0]], 3.0, &mut rng).unwrap()[[0, 0]])
        .collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 6.0).abs() < 4.0 * (24.0 / n).sqrt(), "{mean}");
    // var of the sample variance for χ²-type tails; 5% is well outside noise
    assert!((var - 24.0).abs() < 0.05 * 24.0, "{var}");
}

#[test]
fn mvn_covariance_is_inverse_precision() {
    let precision = array![[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]];
    let cov = Cholesky::new(&precision).unwrap().inverse();
    let mean = array![0.5, -1.0, 2.0];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws: Vec<Array1<f64>> = (0..DRAWS)
        .map(|_| sample_mvn(&mean, &precision, &mut rng).unwrap())
        .collect();
    let n = DRAWS as f64;
    let m: Array1<f64> = draws.iter().fold(Array1::zeros(3), |acc, x| acc + x) / n;
    for r in 0..3 {
        assert!((m[r] - mean[r]).abs() < 4.0 * (cov[[r, r]] / n).sqrt());
        for c in 0..3 {
            let s: f64 = draws
                .iter()
                .map(|x| (x[r] - m[r]) * (x[c] - m[c]))
                .sum::<f64>()
                / (n - 1.0);
            let se = ((cov[[r, r]] * cov[[c, c]] + cov[[r, c]].powi(2)) / n).sqrt();
            assert!(
                (s - cov[[r, c]]).abs() < 4.0 * se,
                "({r},{c}) {s} vs {}",
                cov[[r, c]]
            );
        }
    }
}

#[test]
fn hyperparameter_posterior_concentrates_on_truth() {
    // rows from N(μ, Λ⁻¹); with 10⁴ rows the posterior sits on (μ, Λ)
    let mu = array![1.0, -0.5];
    let lambda = array![[2.0, 0.5], [0.5, 1.0]];
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut rows = Array2::<f64>::zeros((n, 2));
    for mut row in rows.rows_mut() {
        row.assign(&sample_mvn(&mu, &lambda, &mut rng).unwrap());
    }
    let prior = Hyperprior::<f64>::standard(2).unwrap();
    let post = gaussian_wishart_posterior(rows.view(), &prior).unwrap();
    assert_eq!(post.nu, 2.0 + n as f64);
    for _ in 0..20 {
        let p = sample_mode_hyperparams(rows.view(), &prior, &mut rng).unwrap();
        for d in 0..2 {
            assert!((p.mu[d] - mu[d]).abs() < 0.1 * mu[d].abs(), "{:?}", p.mu);
        }
        for (a, b) in p.lambda.iter().zip(lambda.iter()) {
            assert!((a - b).abs() < 0.1 * b.abs(), "{:?}", p.lambda);
        }
    }
}

#[test]
fn init_latents_are_standard_normal() {
    let prior = Hyperprior::<f64>::standard(4).unwrap();
    let state = init_model([2_000, 3, 2], 4, &prior, 5.0, 8).unwrap();
    let u = state.latents(Mode::Target);
    for col in u.columns() {
        let mean = col.mean().unwrap();
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
        assert!(mean.abs() < 4.0 / (2_000f64).sqrt(), "{mean}");
        assert!((var - 1.0).abs() < 0.1, "{var}");
    }
}
