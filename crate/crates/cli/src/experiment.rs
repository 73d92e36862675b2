use clap::Subcommand;
use rayon::prelude::*;

use twistmoments::arith::{enumerate_odd_fundamental, Sign};
use twistmoments::hecke::EigenvalueTable;
use twistmoments::lmoments::{
    afe_central_value, afe_cutoff, afe_table, density_check, mollified_second_diagonal, petersson_grid,
    planted_alternation_trial, PeterssonConfig,
};
use twistmoments::mollifier::MollifierScheme;
use twistmoments::randmodel::{monte_carlo_prime_moments, sample_realization_indexed};
use twistmoments::special::oscillatory::bessel_average_check;
use twistmoments::special::{OscillatoryTransforms, WeightFunction};

use crate::manifest::{CheckRecord, Csv};
use crate::{CliError, Run};

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Petersson formula residuals on an (m, n) grid.
    Petersson {
        #[arg(long)]
        weight2k: Option<u32>,
        #[arg(long)]
        cmax: Option<u64>,
        #[arg(long)]
        size: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Central values L(1/2, Delta x chi_d) for positive odd fundamental d.
    Lvalues {
        #[arg(long)]
        dmin: Option<u64>,
        #[arg(long)]
        dmax: Option<u64>,
        #[arg(long)]
        v_tol: Option<f64>,
        #[arg(long)]
        nonneg_tol: Option<f64>,
    },
    /// Character sums over discriminants against the fitted main term.
    Density {
        /// Comma-separated list of X values.
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        u: Option<u64>,
        #[arg(long)]
        stability_tol: Option<f64>,
        #[arg(long)]
        error_ratio_tol: Option<f64>,
    },
    /// Mollified second-moment diagonal for a built scheme.
    Moment2 {
        #[arg(long = "log-K")]
        log_k: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long)]
        eta1: Option<f64>,
        #[arg(long)]
        eta2: Option<f64>,
    },
    /// Averaged Bessel identity residuals.
    BesselAverage {
        /// Comma-separated list of K values.
        #[arg(long = "K")]
        big_k: Option<String>,
        /// Comma-separated list of t values.
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
    },
    /// Sign-change detection on planted random-model sequences.
    Signchange {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        windows: Option<usize>,
        #[arg(long)]
        h: Option<usize>,
    },
    /// Sato-Tate angles for one realization, plus prime-moment estimates.
    Sample {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realization: Option<u64>,
        #[arg(long)]
        pmax: Option<u64>,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        z_tol: Option<f64>,
    },
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Runs the experiment and returns the manifest file stem.
pub fn run(exp: Experiment, run: &mut Run) -> Result<String, CliError> {
    match exp {
        Experiment::Petersson { weight2k, cmax, size, tol } => {
            let cfg = PeterssonConfig {
                weight2k: run.settings.get("weight2k", weight2k, 12)?,
                c_max: run.settings.get("cmax", cmax, 64)?,
                tol: run.settings.get("tol", tol, 1e-8)?,
            };
            let size = run.settings.get("size", size, 10)?;
            let r = petersson_grid(&cfg, size)?;
            let mut csv = Csv::new("m,n,lhs,rhs,residual,tail_bound");
            for c in &r.cells {
                csv.row(&[
                    c.m.to_string(),
                    c.n.to_string(),
                    num(c.lhs),
                    num(c.rhs),
                    num(c.residual),
                    num(c.tail_bound),
                ]);
            }
            let path = csv.save(&run.out, "petersson.csv")?;
            run.output(path);
            run.check(CheckRecord::bounded(
                "Petersson max residual",
                r.max_residual,
                cfg.tol,
                format!("omega = {}, weight {}, c_max {}, {size}x{size} grid", r.omega, cfg.weight2k, cfg.c_max),
            ));
            Ok("petersson".into())
        }
        Experiment::Lvalues {
            dmin,
            dmax,
            v_tol,
            nonneg_tol,
        } => {
            let dmin = run.settings.get("dmin", dmin, 1)?;
            let dmax = run.settings.get("dmax", dmax, 2000)?;
            let v_tol = run.settings.get("v-tol", v_tol, twistmoments::lmoments::AFE_V_TOL)?;
            let nonneg_tol = run.settings.get("nonneg-tol", nonneg_tol, 1e-6)?;
            let v = afe_table(6)?;
            let ds = enumerate_odd_fundamental(dmin, dmax, Sign::Positive);
            if ds.is_empty() {
                return Err(CliError::Usage(format!("no positive odd fundamental d in [{dmin}, {dmax}]")));
            }
            let need = (afe_cutoff(&v, v_tol) * dmax as f64).ceil() as usize;
            let table = EigenvalueTable::ramanujan(need)?;
            let values: Vec<_> = ds
                .par_iter()
                .map(|d| afe_central_value(&table, d, &v, v_tol))
                .collect::<Result<_, _>>()?;
            let mut csv = Csv::new("d,L,trunc_err,terms");
            for c in &values {
                csv.row(&[
                    c.d.to_string(),
                    num(c.value),
                    num(c.truncation_error),
                    c.terms_used.to_string(),
                ]);
            }
            let path = csv.save(&run.out, "lvalues.csv")?;
            run.output(path);
            let min = values.iter().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();
            run.check(CheckRecord::bounded(
                "central values nonnegative",
                (-min.value).max(0.0),
                nonneg_tol,
                format!("{} discriminants, minimum {} at d = {}", values.len(), min.value, min.d),
            ));
            Ok("lvalues".into())
        }
        Experiment::Density {
            x,
            n,
            u,
            stability_tol,
            error_ratio_tol,
        } => {
            let xs: Vec<f64> = run.settings.list("x", x, "100000,200000")?;
            let n = run.settings.get("n", n, 1)?;
            let u = run.settings.get("u", u, 1)?;
            let stability_tol = run.settings.get("stability-tol", stability_tol, 0.02)?;
            let error_ratio_tol = run.settings.get("error-ratio-tol", error_ratio_tol, 1.0)?;
            let v = afe_table(6)?;
            let phi = WeightFunction::bump(1.0, 2.0)?;
            let mut csv = Csv::new("X,n,u,lhs,fitC,dev_pi2_9,dev_4_pi2");
            let mut reports = Vec::new();
            for &xv in &xs {
                let r = density_check(n, u, xv, &v, &phi)?;
                csv.row(&[
                    num(xv),
                    n.to_string(),
                    u.to_string(),
                    num(r.lhs),
                    opt(r.fitted_constant),
                    opt(r.dev_pi2_9),
                    opt(r.dev_4_pi2),
                ]);
                reports.push(r);
            }
            let path = csv.save(&run.out, "density.csv")?;
            run.output(path);
            if reports[0].is_square {
                let fits: Vec<f64> = reports.iter().filter_map(|r| r.fitted_constant).collect();
                let last = *fits.last().unwrap();
                let drift = fits.iter().map(|c| (c / last - 1.0).abs()).fold(0.0, f64::max);
                run.check(CheckRecord::bounded(
                    "fitted constant stable in X",
                    drift,
                    stability_tol,
                    format!(
                        "C = {last:.6}; pi^2/9 = {:.6} (dev {:.4}), 4/pi^2 = {:.6} (dev {:.2e})",
                        std::f64::consts::PI.powi(2) / 9.0,
                        reports.last().unwrap().dev_pi2_9.unwrap(),
                        4.0 / std::f64::consts::PI.powi(2),
                        reports.last().unwrap().dev_4_pi2.unwrap()
                    ),
                ));
            } else {
                let worst = reports.iter().filter_map(|r| r.error_ratio).fold(0.0, f64::max);
                run.check(CheckRecord::bounded(
                    "non-square sum within X^(3/4)",
                    worst,
                    error_ratio_tol,
                    "max |lhs| / X^(3/4)",
                ));
            }
            Ok("density".into())
        }
        Experiment::Moment2 { log_k, x, c0, eta1, eta2 } => {
            let log_k = run.settings.get("log-K", log_k, 2e6)?;
            let x = run.settings.get("x", x, 1e3)?;
            let c0 = run.settings.get("c0", c0, 10.0)?;
            let eta1 = run.settings.get("eta1", eta1, 1.0)?;
            let theta0 = 1.0 / log_k.ln().powi(5);
            let eta2 = run.settings.get("eta2", eta2, 2.0 * theta0)?;
            let scheme = MollifierScheme::build(log_k, c0, eta1, eta2)?;
            let phi = WeightFunction::default();
            let r = mollified_second_diagonal(&scheme, x, &phi, &phi)?;
            let mut csv = Csv::new("j,primes,value,truncated_sum");
            for f in &r.factors {
                csv.row(&[f.j.to_string(), f.primes.to_string(), num(f.value), f.truncated_sum.to_string()]);
            }
            let path = csv.save(&run.out, "moment2.csv")?;
            run.output(path);
            let scheme_path = run.out.join("moment2-scheme.json");
            let text = serde_json::to_string_pretty(&scheme.to_json()).map_err(|e| CliError::Failure(e.to_string()))?;
            crate::manifest::write_file(&scheme_path, &(text + "\n"))?;
            run.output(scheme_path);
            run.check(CheckRecord::flag(
                "diagonal product above lower bound",
                r.within,
                format!("product {:.6e}, lower bound {:.6e}, ln main term {:.4}", r.product, r.lower_bound, r.ln_main),
            ));
            Ok("moment2".into())
        }
        Experiment::BesselAverage { big_k, t, n, m } => {
            let ks: Vec<u32> = run.settings.list("K", big_k, "40,80")?;
            let ts: Vec<f64> = run.settings.list("t", t, "1,5,10")?;
            let n = run.settings.get("n", n, 1)?;
            let m = run.settings.get("m", m, 1)?;
            let tr = OscillatoryTransforms::default();
            let mut csv = Csv::new("K,t,lhs,rhs,residual,budget,within");
            for &tv in &ts {
                let mut prev: Option<f64> = None;
                for &k in &ks {
                    let c = bessel_average_check(&tr, k, n, m, tv)?;
                    csv.row(&[
                        k.to_string(),
                        num(tv),
                        num(c.lhs),
                        num(c.rhs),
                        num(c.residual),
                        num(c.budget),
                        c.within.to_string(),
                    ]);
                    run.check(CheckRecord::bounded(format!("Bessel average K = {k}, t = {tv}"), c.residual, c.budget, ""));
                    if let Some(p) = prev {
                        run.check(CheckRecord::flag(
                            format!("residual decreases to K = {k}, t = {tv}"),
                            c.residual < p,
                            format!("{p:.3e} -> {:.3e}", c.residual),
                        ));
                    }
                    prev = Some(c.residual);
                }
            }
            let path = csv.save(&run.out, "bessel-average.csv")?;
            run.output(path);
            Ok("bessel-average".into())
        }
        Experiment::Signchange { seed, windows, h } => {
            let seed = run.settings.get("seed", seed, 1)?;
            run.seed = Some(seed);
            let windows = run.settings.get("windows", windows, 200)?;
            let h = run.settings.get("h", h, 8)?;
            let r = planted_alternation_trial(seed, windows, h)?;
            let mut csv = Csv::new("seed,windows,h,planted,detected_planted,false_positives");
            csv.row(&[
                seed.to_string(),
                windows.to_string(),
                h.to_string(),
                r.planted.to_string(),
                r.detected_planted.to_string(),
                r.false_positives.to_string(),
            ]);
            let path = csv.save(&run.out, "signchange.csv")?;
            run.output(path);
            run.check(CheckRecord::flag(
                "all planted alternations detected",
                r.detected_planted == r.planted && r.false_positives == 0,
                format!("{}/{} planted, {} false positives", r.detected_planted, r.planted, r.false_positives),
            ));
            Ok("signchange".into())
        }
        Experiment::Sample {
            seed,
            realization,
            pmax,
            prime,
            samples,
            z_tol,
        } => {
            let seed = run.settings.get("seed", seed, 1)?;
            run.seed = Some(seed);
            let realization = run.settings.get("realization", realization, 0)?;
            let pmax = run.settings.get("pmax", pmax, 1000)?;
            let prime = run.settings.get("prime", prime, 3)?;
            let samples = run.settings.get("samples", samples, 100_000)?;
            let z_tol = run.settings.get("z-tol", z_tol, 5.0)?;
            let r = sample_realization_indexed(seed, realization, pmax)?;
            let mut csv = Csv::new("p,theta,x");
            for (&p, &th) in r.primes.iter().zip(&r.thetas) {
                csv.row(&[p.to_string(), num(th), num(2.0 * th.cos())]);
            }
            let path = csv.save(&run.out, "sample.csv")?;
            run.output(path);
            let est = monte_carlo_prime_moments(seed, prime, samples, 8)?;
            let mut csv = Csv::new("power,mean,std_error,expected,z_score");
            for e in &est {
                csv.row(&[
                    e.power.to_string(),
                    num(e.mean),
                    num(e.std_error),
                    num(e.expected),
                    num(e.z_score),
                ]);
            }
            let path = csv.save(&run.out, "sample-moments.csv")?;
            run.output(path);
            let worst = est.iter().map(|e| e.z_score).fold(0.0, f64::max);
            run.check(CheckRecord::bounded(
                "prime moments match Catalan numbers",
                worst,
                z_tol,
                format!("p = {prime}, {samples} samples, largest z-score"),
            ));
            Ok("sample".into())
        }
    }
}
