//! Case 1 tank against values frozen from the independent Python model in
//! `tests/oracle/adm1_oracle.py`.

use std::collections::HashMap;

use chad_core::presets;
use chad_core::reactor::{stride_for, AlgebraicMode};
use chad_core::{Component, IntegratorConfig, N_STATES};

fn oracle() -> HashMap<String, f64> {
    include_str!("data/case1_oracle.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (k, v) = l.split_once(' ').unwrap();
            (k.to_string(), v.trim().parse().unwrap())
        })
        .collect()
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= abs + rel * b.abs()
}

#[test]
fn initial_projection_and_derivative_match_oracle() {
    let o = oracle();
    let r = presets::case1_reactor(AlgebraicMode::Dae).unwrap();
    let y = r.consistent(&presets::bsm2_initial_state()).unwrap();
    assert!(close(y.s_h(), o["init.S_H"], 1e-12, 0.0), "S_H {} vs {}", y.s_h(), o["init.S_H"]);
    assert!(close(y[Component::SH2], o["init.S_h2"], 1e-11, 0.0));
    let d = r.rhs(&y);
    assert!(close(d.q_gas, o["init.q_gas"], 1e-12, 0.0));
    let mut checked = 0;
    for (key, want) in &o {
        let Some(name) = key.strip_prefix("init.d.") else {
            continue;
        };
        let c: Component = name.parse().unwrap();
        let got = d.d[c.index()];
        assert!(close(got, *want, 1e-9, 1e-13), "d{name}/dt: {got:e} vs {want:e}");
        checked += 1;
    }
    assert_eq!(checked, N_STATES - 7);
}

#[test]
fn long_run_settles_on_oracle_steady_state() {
    let o = oracle();
    let r = presets::case1_reactor(AlgebraicMode::Dae).unwrap();
    let integ = IntegratorConfig {
        dt_inner: 10.0,
        ..Default::default()
    };
    let days = 400.0;
    let (t, _) = r
        .simulate(
            &presets::bsm2_initial_state(),
            days,
            &integ,
            stride_for(days, integ.dt_days()),
        )
        .unwrap();
    let y = *t.last().unwrap();
    for c in Component::ALL {
        let want = o[&format!("steady.{}", c.name())];
        assert!(close(y[c], want, 1e-7, 1e-14), "{}: {:e} vs {want:e}", c.name(), y[c]);
    }
    assert!(close(y.s_h(), o["steady.S_H"], 1e-7, 0.0));

    // Stationary: every differential derivative is tiny relative to its state.
    let d = r.rhs(&y);
    for c in Component::ALL {
        if c == Component::SH2 || Component::IONS.contains(&c) {
            continue;
        }
        let scale = y[c].abs().max(1e-6);
        assert!(d.d[c.index()].abs() <= 1e-8 * scale, "{}: {:e}", c.name(), d.d[c.index()]);
    }

    // Restarting from the steady state moves nothing beyond truncation error.
    let (again, _) = r.simulate(&y, 10.0, &integ, stride_for(10.0, integ.dt_days())).unwrap();
    let z = again.last().unwrap();
    for c in Component::ALL {
        assert!(close(z[c], y[c], 1e-8, 1e-15), "{}", c.name());
    }
}
