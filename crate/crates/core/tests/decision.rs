use evidence_duality::decision::{
    bayes_risk, error_rates, optimal_threshold, threshold_sweep, AtomTable, RiskSpec, ThresholdRule, TiePolicy,
};
use evidence_duality::evidence::{markov_bound_check, Direction, EvidenceSpec, Method};
use evidence_duality::models::Model;
use evidence_duality::Alternative;

fn pair() -> (Model, Alternative) {
    (Model::bernoulli(0.5).unwrap(), Model::bernoulli(0.7).unwrap().into())
}

fn spec_grid() -> Vec<RiskSpec> {
    let mut out = Vec::new();
    for pi0 in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for (c1, c2) in [(1.0, 1.0), (1.0, 4.0), (5.0, 1.0), (0.2, 3.0)] {
            out.push(RiskSpec::new(pi0, 1.0 - pi0, c1, c2).unwrap());
        }
    }
    out
}

#[test]
fn optimal_threshold_minimises_risk_over_every_sweep_point() {
    for (null, alt, n) in [
        (Model::bernoulli(0.5).unwrap(), Model::bernoulli(0.7).unwrap(), 10),
        (Model::bernoulli(0.2).unwrap(), Model::bernoulli(0.4).unwrap(), 13),
    ] {
        let alt: Alternative = alt.into();
        let table = AtomTable::build(&null, &alt, n, &Method::enumerate()).unwrap();
        for spec in spec_grid() {
            let t_star = optimal_threshold(&spec);
            let rates = table.error_rates(&t_star);
            let at_star = bayes_risk(&spec, rates.alpha, rates.beta);
            let curve = evidence_duality::decision::sweep_table(&table, &spec);
            for point in &curve.points {
                assert!(at_star <= point.risk + 1e-12, "t*={} vs t={}", t_star.t(), point.t);
            }
            assert!(curve.is_optimal(t_star.t()));
            assert!(curve.argmin_interval_containing(t_star.t()).is_some());
        }
    }
}

#[test]
fn sweep_is_monotone() {
    let (null, alt) = pair();
    let spec = RiskSpec::new(0.5, 0.5, 1.0, 1.0).unwrap();
    let curve = threshold_sweep(&null, &alt, &spec, 10, &Method::enumerate()).unwrap();
    for w in curve.points.windows(2) {
        assert!(w[0].t < w[1].t);
        assert!(w[1].alpha <= w[0].alpha);
        assert!(w[1].beta >= w[0].beta);
    }
    let first = curve.points.first().unwrap();
    let last = curve.points.last().unwrap();
    let tol = evidence_duality::numeric::ACCUMULATION_TOLERANCE;
    assert!((first.alpha - 1.0).abs() <= tol && first.beta == 0.0);
    assert!(last.alpha == 0.0 && (last.beta - 1.0).abs() <= tol);
}

#[test]
fn alpha_at_markov_threshold_respects_level() {
    let (null, alt) = pair();
    for alpha0 in [0.01, 0.05, 0.1, 0.25, 0.5] {
        let rule = ThresholdRule::new(1.0 / alpha0, TiePolicy::RejectOnTie).unwrap();
        let rates = error_rates(&null, &alt, &rule, 10, &Method::enumerate()).unwrap();
        assert!(rates.alpha <= alpha0);
        let spec = EvidenceSpec::new(null.clone(), alt.clone(), Direction::ForNull, 10).unwrap();
        let bound = markov_bound_check(&spec, alpha0, &Method::enumerate()).unwrap();
        assert!((bound.exceed_prob - rates.alpha).abs() <= 1e-15);
    }
}

#[test]
fn monte_carlo_rates_agree_with_enumeration() {
    let (null, alt) = pair();
    let rule = ThresholdRule::new(1.0, TiePolicy::RejectOnTie).unwrap();
    let exact = error_rates(&null, &alt, &rule, 10, &Method::enumerate()).unwrap();
    let mc = error_rates(&null, &alt, &rule, 10, &Method::monte_carlo(50_000, 3)).unwrap();
    assert!((mc.alpha - exact.alpha).abs() <= 4.0 * mc.alpha_se.unwrap());
    assert!((mc.beta - exact.beta).abs() <= 4.0 * mc.beta_se.unwrap());
}

#[test]
fn malformed_risk_spec_names_the_type() {
    let err = RiskSpec::new(0.6, 0.6, 1.0, 1.0).unwrap_err();
    assert!(err.to_string().contains("RiskSpec"));
    assert!(serde_json::from_str::<RiskSpec>(r#"{"pi0":0.5,"pi1":0.4,"c1":1,"c2":1}"#).is_err());
}
