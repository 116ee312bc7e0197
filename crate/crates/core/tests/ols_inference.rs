#[path = "support/oracle.rs"]
mod oracle;

use oracle::{ols_normal_equations, rel_close, t_tail_two_sided};
use peanut::ols::{fit_ols, render_ols_table, OlsFit};
use peanut::tdist::{t_quantile, t_sf2};
use proptest::prelude::*;

fn problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..=3)
        .prop_flat_map(|k| (Just(k), (k + 3)..=50usize))
        .prop_flat_map(|(k, n)| {
            (
                prop::collection::vec(prop::collection::vec(-5.0f64..5.0, k), n),
                prop::collection::vec(-1.0f64..1.0, n),
                prop::collection::vec(0.5f64..3.0, k + 1),
            )
        })
        .prop_map(|(x, noise, beta)| {
            let y = x
                .iter()
                .zip(&noise)
                .map(|(r, e)| beta[0] + r.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>() + e)
                .collect();
            (x, y)
        })
}

#[test]
fn series_oracle_agrees_with_closed_forms() {
    for t in [0.2, 1.0, 4.0] {
        let cauchy = 1.0 - 2.0 * f64::atan(t) / std::f64::consts::PI;
        assert!((t_tail_two_sided(t, 1) - cauchy).abs() < 1e-13);
        let df2 = 1.0 - t / (2.0 + t * t).sqrt();
        assert!((t_tail_two_sided(t, 2) - df2).abs() < 1e-13);
    }
}

#[test]
fn t_tail_matches_series_oracle() {
    for df in [1u64, 2, 3, 5, 10, 29, 30, 100, 1000] {
        for t in [0.01, 0.5, 1.0, 2.228, 3.5, 8.0, 25.0] {
            let got = t_sf2(t, df).unwrap();
            let want = t_tail_two_sided(t, df);
            assert!((got - want).abs() <= 1e-10, "df {df} t {t}: {got} vs {want}");
        }
    }
    assert!((t_tail_two_sided(2.228, 10) - 0.05).abs() < 5e-4);
}

#[test]
fn quantile_round_trip() {
    for df in [1u64, 2, 5, 10, 30, 100] {
        for i in 0..=100 {
            let p = 0.6 + 0.399 * i as f64 / 100.0;
            let t = t_quantile(p, df).unwrap();
            let back = 1.0 - t_sf2(t, df).unwrap() / 2.0;
            assert!((back - p).abs() <= 1e-8, "df {df} p {p}: {back}");
        }
    }
}

fn shifted(fit: &OlsFit) -> impl Fn(usize) -> f64 + '_ {
    move |i| fit.coef[i]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_normal_equations((x, y) in problem()) {
        let fit = fit_ols(&x, &y).unwrap();
        let oracle = ols_normal_equations(&x, &y);
        for i in 0..fit.coef.len() {
            prop_assert!(rel_close(fit.coef[i], oracle.coef[i], 1e-8), "coef {i}");
            prop_assert!(rel_close(fit.se[i], oracle.se[i], 1e-8), "se {i}");
            prop_assert!(rel_close(fit.t[i], oracle.t[i], 1e-8), "t {i}");
            prop_assert!(rel_close(fit.p[i], oracle.p[i], 1e-8) || (fit.p[i] - oracle.p[i]).abs() < 1e-15, "p {i}: {} vs {} (t {} df {})", fit.p[i], oracle.p[i], fit.t[i], fit.df);
        }
    }

    #[test]
    fn residuals_are_orthogonal((x, y) in problem()) {
        let fit = fit_ols(&x, &y).unwrap();
        let resid: Vec<f64> = x.iter().zip(&y).map(|(r, v)| v - fit.fitted(r)).collect();
        let scale: f64 = y.iter().map(|v| v.abs()).sum::<f64>() * 10.0;
        prop_assert!(resid.iter().sum::<f64>().abs() <= 1e-8 * scale);
        for j in 0..x[0].len() {
            let dot: f64 = x.iter().zip(&resid).map(|(r, e)| r[j] * e).sum();
            prop_assert!(dot.abs() <= 1e-8 * scale, "column {j}: {dot}");
        }
    }

    #[test]
    fn shift_and_scale_invariance((x, y) in problem(), c in -10.0f64..10.0, s in 0.1f64..10.0) {
        let base = fit_ols(&x, &y).unwrap();
        let y_shift: Vec<f64> = y.iter().map(|v| v + c).collect();
        let shifted_fit = fit_ols(&x, &y_shift).unwrap();
        let b = shifted(&base);
        prop_assert!((shifted_fit.coef[0] - (b(0) + c)).abs() <= 1e-9 * (1.0 + b(0).abs() + c.abs()));
        for i in 1..base.coef.len() {
            prop_assert!(rel_close(shifted_fit.coef[i], base.coef[i], 1e-9));
        }

        let x_scaled: Vec<Vec<f64>> = x.iter().map(|r| {
            let mut r = r.clone();
            r[0] *= s;
            r
        }).collect();
        let scaled = fit_ols(&x_scaled, &y).unwrap();
        prop_assert!(rel_close(scaled.coef[1], base.coef[1] / s, 1e-10));
        prop_assert!(rel_close(scaled.se[1], base.se[1] / s, 1e-10));
        prop_assert!(rel_close(scaled.t[1], base.t[1], 1e-10));
        prop_assert!(rel_close(scaled.p[1], base.p[1], 1e-9) || (scaled.p[1] - base.p[1]).abs() < 1e-15);
    }
}

#[test]
fn rendered_row_layout() {
    // Reference complete-case coefficients, used only to check formatting.
    let fit = OlsFit {
        coef: vec![0.0582, 1.6710],
        se: vec![0.017275, 0.198220],
        t: vec![3.369, 8.430],
        p: vec![0.001, 0.0000001],
        ci_low: vec![0.024, 1.278],
        ci_high: vec![0.092, 2.064],
        n: 109,
        df: 107,
        r2: None,
        sigma2: 0.0,
        rss: 0.0,
    };
    let table = render_ols_table(&fit, &["const", "merchants_all"], "Model 1").unwrap();
    let row: Vec<&str> = table.lines().find(|l| l.starts_with("merchants_all")).unwrap().split_whitespace().collect();
    assert_eq!(row, ["merchants_all", "1.6710***", "0.198", "8.430", "0.000", "1.278", "2.064"]);
    let header = table.lines().next().unwrap();
    for col in ["coef", "std err", "t", "P>|t|", "[0.025", "0.975]"] {
        assert!(header.contains(col));
    }
}
