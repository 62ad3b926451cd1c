//! One function per subcommand, each producing a [`Table`].

use bisphere::fit::{loglog_slope, logspace};
use bisphere::{
    blowup_study, capacitance_asymptotic_rescaled, capacitance_exact, eigen, modal_coefficients,
    rescale, resonance_asymptotic, resonant_frequencies, sigma_terms, CartesianPoint, Error,
    IncidentWave, Mode, PotentialSeries, SeriesOptions,
};
use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{col, Cell, Table};
use crate::CliError;

fn series_options(config: &RunConfig) -> SeriesOptions {
    SeriesOptions::with_tol(config.tolerances.series)
}

/// Keeps the value of a route that may legitimately fail, logging why not.
fn optional<T>(what: &str, r: bisphere::Result<T>) -> Option<T> {
    r.map_err(|e| warn!("{what} unavailable: {e}")).ok()
}

pub fn capacitance(config: &RunConfig) -> Result<Table, CliError> {
    let pair = config.pair_for(None)?;
    let frame = pair.frame();
    let c = capacitance_exact(&frame, &series_options(config))?;
    let ct = rescale(&c, &pair);
    let sigma = sigma_terms(&frame)?;
    let asym = optional(
        "close-gap asymptotics",
        capacitance_asymptotic_rescaled(&frame),
    );

    let mut t = Table::new(
        "capacitance",
        vec![
            col("r1", "length"),
            col("r2", "length"),
            col("epsilon", "length"),
            col("ln_epsilon", "1"),
            col("c11", "length"),
            col("c12", "length"),
            col("c21", "length"),
            col("c22", "length"),
            col("ct11", "1/length^2"),
            col("ct12", "1/length^2"),
            col("ct21", "1/length^2"),
            col("ct22", "1/length^2"),
            col("sigma1", "1/length^2"),
            col("sigma2", "1/length^2"),
            col("asym_ct11", "1/length^2"),
            col("asym_ct12", "1/length^2"),
            col("asym_ct21", "1/length^2"),
            col("asym_ct22", "1/length^2"),
            col("relerr11", "1"),
            col("relerr12", "1"),
            col("relerr21", "1"),
            col("relerr22", "1"),
            col("n_terms", "count"),
        ],
    );
    let exact = ct.matrix();
    let entry = |k: usize| asym.map(|a| a.matrix()[k / 2][k % 2]);
    let relerr =
        |k: usize| entry(k).map(|a| (a - exact[k / 2][k % 2]).abs() / exact[k / 2][k % 2].abs());
    let mut row: Vec<Cell> = vec![
        pair.r1().into(),
        pair.r2().into(),
        pair.epsilon().into(),
        pair.ln_epsilon().into(),
        c.c11.into(),
        c.c12.into(),
        c.c21.into(),
        c.c22.into(),
        ct.ct11.into(),
        ct.ct12.into(),
        ct.ct21.into(),
        ct.ct22.into(),
        sigma.sigma1.into(),
        sigma.sigma2.into(),
    ];
    row.extend((0..4).map(|k| Cell::from(entry(k))));
    row.extend((0..4).map(|k| Cell::from(relerr(k))));
    row.push(c.n_terms.into());
    t.push(row);
    Ok(t)
}

fn resonance_columns() -> Vec<crate::output::Column> {
    vec![
        col("delta", "1"),
        col("r1", "length"),
        col("r2", "length"),
        col("epsilon", "length"),
        col("ln_epsilon", "1"),
        col("lambda1", "1/length^2"),
        col("lambda2", "1/length^2"),
        col("omega1", "frequency"),
        col("omega2", "frequency"),
        col("asym_lambda1", "1/length^2"),
        col("asym_lambda2", "1/length^2"),
        col("asym_omega1", "frequency"),
        col("asym_omega2", "frequency"),
        col("asym_omega2_refined", "frequency"),
        col("ratio_omega1", "1"),
        col("ratio_omega2", "1"),
        col("omega2_over_omega1", "1"),
    ]
}

/// Exact-eigenvalue and asymptotic resonances at contrast `delta` (or the
/// configured one). In the regime the gap can be far below what the exact
/// series resolves; that route is then left empty.
fn resonance_row(config: &RunConfig, delta: Option<f64>) -> Result<Vec<Cell>, CliError> {
    let pair = config.pair_for(delta)?;
    let m = config.material_for(delta)?;
    let exact = (|| {
        let ct = rescale(
            &capacitance_exact(&pair.frame(), &series_options(config))?,
            &pair,
        );
        let sp = eigen(&ct)?;
        Ok::<_, Error>((sp, resonant_frequencies(&sp, &m)?))
    })();
    let exact = if config.in_regime() {
        optional("exact route", exact)
    } else {
        Some(exact?)
    };
    let asym = optional("asymptotic route", resonance_asymptotic(&pair, &m));

    let ratio = |a: Option<f64>, b: Option<f64>| Some(a? / b?);
    let w1 = exact.map(|e| e.1.omega1);
    let w2 = exact.map(|e| e.1.omega2);
    let split =
        ratio(w2, w1).or_else(|| ratio(asym.map(|a| a.omega2_refined), asym.map(|a| a.omega1)));
    Ok(vec![
        m.delta().into(),
        pair.r1().into(),
        pair.r2().into(),
        pair.epsilon().into(),
        pair.ln_epsilon().into(),
        exact.map(|e| e.0.lambda1).into(),
        exact.map(|e| e.0.lambda2).into(),
        w1.into(),
        w2.into(),
        asym.map(|a| a.lambda1).into(),
        asym.map(|a| a.lambda2).into(),
        asym.map(|a| a.omega1).into(),
        asym.map(|a| a.omega2).into(),
        asym.map(|a| a.omega2_refined).into(),
        ratio(asym.map(|a| a.omega1), w1).into(),
        ratio(asym.map(|a| a.omega2_refined), w2).into(),
        split.into(),
    ])
}

pub fn resonances(config: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new("resonances", resonance_columns());
    t.push(resonance_row(config, None)?);
    Ok(t)
}

/// Resonances over an epsilon grid, or over a contrast grid in the regime.
/// Cells run concurrently; rows keep grid order.
pub fn sweep(config: &RunConfig) -> Result<Table, CliError> {
    let s = &config.sweep;
    let mut t = Table::new("sweep", resonance_columns());
    let rows: Vec<Vec<Cell>> = if config.in_regime() {
        let grid = logspace(s.delta_max, s.delta_min, s.count);
        grid.par_iter()
            .map(|&d| resonance_row(config, Some(d)))
            .collect::<Result<_, _>>()?
    } else {
        let grid = logspace(s.eps_max, s.eps_min, s.count);
        grid.par_iter()
            .map(|&eps| {
                let mut cell = config.clone();
                cell.geometry.epsilon = Some(eps);
                resonance_row(&cell, None)
            })
            .collect::<Result<_, _>>()?
    };
    t.rows = rows;

    let column = |name: &str| -> Option<Vec<f64>> {
        let k = t.columns.iter().position(|c| c.name == name)?;
        t.rows
            .iter()
            .map(|r| {
                if let Cell::Num(v) = r[k] {
                    Some(v)
                } else {
                    None
                }
            })
            .collect()
    };
    let x = if config.in_regime() {
        column("delta")
    } else {
        column("epsilon")
    };
    let mut fits = Vec::new();
    if let Some(x) = x {
        for (name, source) in [
            ("omega1_exponent", "omega1"),
            ("omega2_exponent", "omega2"),
            ("asym_omega1_exponent", "asym_omega1"),
            ("asym_omega2_exponent", "asym_omega2"),
        ] {
            if let Some(y) = column(source) {
                fits.push((name, loglog_slope(&x, &y)));
            }
        }
    }
    t.fits = fits;
    Ok(t)
}

pub fn blowup(config: &RunConfig) -> Result<Table, CliError> {
    let s = &config.sweep;
    let g = &config.geometry;
    let grid = logspace(s.eps_max, s.eps_min, s.count);
    let study = blowup_study(g.r1, g.r2, &grid, &series_options(config), s.samples)?;
    let mut t = Table::new(
        "blowup",
        vec![
            col("epsilon", "length"),
            col("max_grad_u1", "1/length"),
            col("max_grad_u2", "1/length"),
            col("u1_xi", "1"),
            col("u1_theta", "rad"),
            col("u2_xi", "1"),
            col("u2_theta", "rad"),
            col("gap_max_u1", "1/length"),
            col("gap_max_u2", "1/length"),
            col("u1_eps_log_eps", "1"),
            col("u2_eps", "1"),
        ],
    );
    let (u1c, u2c) = (study.u1_eps_log(), study.u2_eps());
    for (k, r) in study.rows.iter().enumerate() {
        t.push(vec![
            r.epsilon.into(),
            r.max_grad_u1.into(),
            r.max_grad_u2.into(),
            r.location_u1.xi.into(),
            r.location_u1.theta.into(),
            r.location_u2.xi.into(),
            r.location_u2.theta.into(),
            r.gap_max_u1.into(),
            r.gap_max_u2.into(),
            u1c[k].into(),
            u2c[k].into(),
        ]);
    }
    t.fits = vec![
        ("slope_u1", study.slope_u1),
        ("slope_u2", study.slope_u2),
        ("spread_u1", study.spread_u1),
        ("spread_u1_eps_log_eps", study.spread_u1_eps_log),
        ("spread_u2_eps", study.spread_u2_eps),
    ];
    Ok(t)
}

pub fn field(config: &RunConfig) -> Result<Table, CliError> {
    let points = &config.sweep.points;
    if points.is_empty() {
        return Err(CliError::Config(
            "field needs at least one --point x1,x2,x3".into(),
        ));
    }
    let pair = config.pair_for(None)?;
    let opts = series_options(config);
    let ps = PotentialSeries::new(&pair.frame(), &opts)?;
    let sp = eigen(&rescale(&capacitance_exact(&pair.frame(), &opts)?, &pair))?;
    let mut t = Table::new(
        "field",
        vec![
            col("x1", "length"),
            col("x2", "length"),
            col("x3", "length"),
            col("v1", "1"),
            col("v2", "1"),
            col("u1", "1"),
            col("u2", "1"),
            col("grad_u1_x1", "1/length"),
            col("grad_u1_x2", "1/length"),
            col("grad_u1_x3", "1/length"),
            col("grad_u2_x1", "1/length"),
            col("grad_u2_x2", "1/length"),
            col("grad_u2_x3", "1/length"),
        ],
    );
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|&[x1, x2, x3]| {
            let x = CartesianPoint::new(x1, x2, x3);
            let located = ps
                .locate(&x)
                .map_err(|e| CliError::Config(format!("point ({x1}, {x2}, {x3}): {e}")))?;
            let [v1, v2] = ps.eval_potentials(&located)?;
            let mut row: Vec<Cell> = vec![x1.into(), x2.into(), x3.into(), v1.into(), v2.into()];
            row.push(ps.eval(Mode::Eigen(1), &sp, &located)?.into());
            row.push(ps.eval(Mode::Eigen(2), &sp, &located)?.into());
            for n in 1..=2 {
                row.extend(ps.eval_grad(Mode::Eigen(n), &sp, &located)?.map(Cell::from));
            }
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    t.rows = rows;
    Ok(t)
}

pub fn scattering(config: &RunConfig) -> Result<Table, CliError> {
    let s = &config.sweep;
    let pair = config.pair_for(None)?;
    let m = config.material_for(None)?;
    let c = capacitance_exact(&pair.frame(), &series_options(config))?;
    let res = resonant_frequencies(&eigen(&rescale(&c, &pair))?, &m)?;
    let len = s.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(len > 0.0 && len.is_finite()) {
        return Err(CliError::Config(
            "direction must be a non-zero vector".into(),
        ));
    }
    let direction = s.direction.map(|v| v / len);
    let lo = s.omega_min.unwrap_or(0.3 * res.omega1);
    let hi = s.omega_max.unwrap_or(3.0 * res.omega2);
    if !(lo < hi) {
        return Err(CliError::Config(format!(
            "empty frequency range [{lo}, {hi}]"
        )));
    }

    let mut t = Table::new(
        "scattering",
        vec![
            col("omega", "frequency"),
            col("re_a", "1"),
            col("im_a", "1"),
            col("abs_a", "1"),
            col("re_b", "1"),
            col("im_b", "1"),
            col("abs_b", "1"),
        ],
    );
    let (mut peak_a, mut peak_b) = ((0.0, f64::NAN), (0.0, f64::NAN));
    for omega in logspace(lo, hi, s.omega_count) {
        let w = IncidentWave::new(omega, direction, Complex64::new(1.0, 0.0), &m)?;
        let mc = match modal_coefficients(&c, &pair, &m, &w, config.tolerances.pole_guard) {
            Ok(mc) => mc,
            Err(Error::PoleProximity { .. }) => {
                warn!("omega = {omega:e} skipped: inside the pole guard");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let (aa, ab) = (mc.a.norm(), mc.b.norm());
        if aa > peak_a.0 {
            peak_a = (aa, omega);
        }
        if ab > peak_b.0 {
            peak_b = (ab, omega);
        }
        t.push(vec![
            omega.into(),
            mc.a.re.into(),
            mc.a.im.into(),
            aa.into(),
            mc.b.re.into(),
            mc.b.im.into(),
            ab.into(),
        ]);
    }
    t.fits = vec![
        ("omega1", res.omega1),
        ("omega2", res.omega2),
        ("peak_abs_a_omega", peak_a.1),
    ];
    if !pair.is_symmetric() {
        t.fits.push(("peak_abs_b_omega", peak_b.1));
    }
    Ok(t)
}
