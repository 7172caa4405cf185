use merton2d::analytic::put_on_min_value;
use merton2d::harness::{price, Problem};
use merton2d::{ParameterSet, PayoffKind, SchemeConfig, SchemeKind, SetId};

#[test]
fn fine_grid_price_matches_semi_closed_value() {
    let ps = ParameterSet::preset(SetId::Set1);
    let exact = put_on_min_value(&ps.params, &ps.option(PayoffKind::PutOnMin), 100.0, 100.0).unwrap();
    let problem = Problem::new(SetId::Set1, PayoffKind::PutOnMin, 200).unwrap();
    let v = price(&problem, SchemeConfig::new(SchemeKind::Mcs2), 67, 100.0, 100.0).unwrap();
    assert!((v - exact).abs() < 5e-2, "{v} vs {exact}");
}

#[test]
fn corner_keeps_discounted_strike() {
    for set in SetId::ALL {
        let ps = ParameterSet::preset(set);
        for payoff in PayoffKind::ALL {
            let o = ps.option(payoff);
            let problem = Problem::new(set, payoff, 20).unwrap();
            let v = price(&problem, SchemeConfig::new(SchemeKind::Mcs2), 20, 0.0, 0.0).unwrap();
            let want = o.strike * (-ps.params.r * o.maturity).exp();
            assert!((v - want).abs() <= 2e-3 * o.strike, "{set} {payoff}: {v} vs {want}");
        }
    }
}
