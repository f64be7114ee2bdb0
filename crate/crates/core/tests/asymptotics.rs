use approx::assert_relative_eq;
use evidence_duality::asymptotics::{
    bc_convergence_report, bc_prediction, expected_log_ratio, redundancy, BcConfig, Expectation,
};
use evidence_duality::composite::{MixtureAlternative, PriorSpec};
use evidence_duality::models::{Family, Model};
use std::f64::consts::{E, PI};

fn normal_mix() -> MixtureAlternative {
    let family = Family::GaussianKnownVar { variance: 1.0, dim: 1 };
    MixtureAlternative::new(family, PriorSpec::gaussian(vec![0.0], 1.0)).unwrap()
}

fn uniform_bernoulli() -> MixtureAlternative {
    MixtureAlternative::new(Family::Bernoulli, PriorSpec::beta(1.0, 1.0)).unwrap()
}

/// `R(n) = ½·ln(1 + n)` for `σ² = τ² = 1`, prior mean 0, `θ = 1`.
fn normal_redundancy_oracle(n: usize) -> f64 {
    0.5 * (1.0 + n as f64).ln()
}

#[test]
fn normal_redundancy_matches_closed_form() {
    let theta = Model::gaussian(vec![1.0], 1.0).unwrap();
    for n in [1, 10, 100, 1000, 10_000] {
        let r = redundancy(&theta, &normal_mix(), n, &Expectation::SufficientStatistic).unwrap();
        assert!(r.exact);
        assert_relative_eq!(r.value, normal_redundancy_oracle(n), max_relative = 1e-9);
    }
}

#[test]
fn normal_redundancy_minus_half_log_n_stays_in_band() {
    let theta = Model::gaussian(vec![1.0], 1.0).unwrap();
    for n in [10, 100, 1000, 10_000] {
        let r = redundancy(&theta, &normal_mix(), n, &Expectation::SufficientStatistic).unwrap();
        let excess = r.value - 0.5 * (n as f64).ln();
        assert!((0.0..=0.05).contains(&excess), "n={n}: {excess}");
    }
}

#[test]
fn normal_gap_tends_to_missing_normalising_constant() {
    let theta1 = Model::gaussian(vec![1.0], 1.0).unwrap();
    let theta0 = Model::gaussian(vec![0.0], 1.0).unwrap();
    let limit = -0.5 * (2.0 * PI * E).ln();
    for n in [10, 100, 1000, 10_000] {
        let est = expected_log_ratio(&theta1, &theta0, &normal_mix(), n, &Expectation::SufficientStatistic).unwrap();
        let pred = bc_prediction(&theta1, &theta0, &normal_mix(), n).unwrap();
        let expected_gap = 0.5 * (1.0 / n as f64).ln_1p() + limit;
        assert_relative_eq!(est.value - pred.total, expected_gap, epsilon = 1e-8);
    }
}

#[test]
fn bernoulli_expectations_match_oracle() {
    let theta1 = Model::bernoulli(0.7).unwrap();
    let theta0 = Model::bernoulli(0.5).unwrap();
    let mix = uniform_bernoulli();
    let enumerated = expected_log_ratio(&theta1, &theta0, &mix, 10, &Expectation::enumerate()).unwrap();
    assert_relative_eq!(enumerated.value, -0.2040122963422109, epsilon = 1e-12);
    let reduced = expected_log_ratio(&theta1, &theta0, &mix, 10, &Expectation::SufficientStatistic).unwrap();
    assert_relative_eq!(reduced.value, enumerated.value, epsilon = 1e-12);
    let r = redundancy(&theta1, &mix, 10, &Expectation::enumerate()).unwrap();
    assert_relative_eq!(r.value, 0.6188164887083074, epsilon = 1e-12);

    let mc = expected_log_ratio(
        &theta1,
        &theta0,
        &mix,
        10,
        &Expectation::MonteCarlo { reps: 50_000, seed: 12 },
    )
    .unwrap();
    assert!((mc.value - enumerated.value).abs() <= 4.0 * mc.std_error);
}

#[test]
fn redundancy_is_nonnegative_up_to_noise() {
    let cases: Vec<(Model, MixtureAlternative, usize)> = vec![
        (Model::bernoulli(0.7).unwrap(), uniform_bernoulli(), 25),
        (Model::gaussian(vec![0.3, -2.0], 2.0).unwrap(), {
            let family = Family::GaussianKnownVar { variance: 2.0, dim: 2 };
            MixtureAlternative::new(family, PriorSpec::gaussian(vec![0.0, 0.0], 4.0)).unwrap()
        }, 40),
        (Model::exponential(1.5).unwrap(), MixtureAlternative::new(
            Family::Exponential,
            PriorSpec::grid(vec![vec![0.5], vec![1.5], vec![3.0]], vec![0.3, 0.4, 0.3]),
        )
        .unwrap(), 30),
    ];
    for (seed, (theta, mix, n)) in cases.iter().enumerate() {
        let r = redundancy(theta, mix, *n, &Expectation::MonteCarlo { reps: 5_000, seed: seed as u64 }).unwrap();
        assert!(r.value >= -4.0 * r.std_error, "{theta}: {} ± {}", r.value, r.std_error);
    }
}

#[test]
fn prediction_terms_add_up_and_prior_moves_only_the_constant() {
    let theta1 = Model::bernoulli(0.7).unwrap();
    let theta0 = Model::bernoulli(0.5).unwrap();
    let a = bc_prediction(&theta1, &theta0, &uniform_bernoulli(), 50).unwrap();
    let other = MixtureAlternative::new(Family::Bernoulli, PriorSpec::beta(3.0, 2.0)).unwrap();
    let b = bc_prediction(&theta1, &theta0, &other, 50).unwrap();
    for p in [a, b] {
        assert_eq!(p.total, p.kl_term + p.log_n_term + p.constant_term);
    }
    assert_eq!(a.kl_term, b.kl_term);
    assert_eq!(a.log_n_term, b.log_n_term);
    assert_ne!(a.constant_term, b.constant_term);
}

#[test]
fn bernoulli_report_over_enumerable_grid() {
    let config = BcConfig {
        theta1: Model::bernoulli(0.7).unwrap(),
        theta0: Model::bernoulli(0.5).unwrap(),
        mix: uniform_bernoulli(),
    };
    let report = bc_convergence_report(&config, &[8, 12, 16], &Expectation::enumerate()).unwrap();
    assert_eq!(report.rows.len(), 3);
    for row in &report.rows {
        assert_eq!(row.se, 0.0);
        assert_eq!(row.gap, row.empirical - row.predicted);
        let reduced = expected_log_ratio(
            &config.theta1,
            &config.theta0,
            &config.mix,
            row.n,
            &Expectation::SufficientStatistic,
        )
        .unwrap();
        assert_relative_eq!(reduced.value, row.empirical, epsilon = 1e-10);
    }
}

#[test]
fn monte_carlo_report_is_deterministic() {
    let config = BcConfig {
        theta1: Model::gaussian(vec![1.0], 1.0).unwrap(),
        theta0: Model::gaussian(vec![0.0], 1.0).unwrap(),
        mix: normal_mix(),
    };
    let method = Expectation::MonteCarlo { reps: 500, seed: 4 };
    let a = bc_convergence_report(&config, &[10, 100], &method).unwrap();
    let b = bc_convergence_report(&config, &[10, 100], &method).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
