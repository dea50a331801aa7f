use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::config::ExperimentConfig;
use super::Record;
use crate::distrib::{
    alpha_exp_distribution, basis_independence_check, check_lemma_2_11, commuting_diagram_check, fourier_pair,
    paradan_pointwise_check, skewed_basis, TestFunctionOnGStar,
};
use crate::eqforms::{check_equivariantly_closed, check_invariant, form_one, twisted_differential, EquivariantForm};
use crate::error::{Error, Result};
use crate::geometry::{validate_hamiltonian, Manifold};
use crate::integrate::{
    damped_improper_integral, default_eps_grid, dh_bin_mass_exact, dh_pushforward, pair_distributional,
    HistogramGrid,
};
use crate::liealg::{is_strongly_regular, AlgebraVector, TestForm};
use crate::localize::{
    calibrate_euler_convention, default_s_grid, direct_value, localization_sum, regularized_value, EulerConvention,
};
use crate::ominimal::{d_box, growth_levelset, growth_volume, no_zeroes_check, GrowthReport, LevelIntegrand};
use crate::report::VerificationReport;

pub(super) struct Context<'a> {
    cfg: &'a ExperimentConfig,
    m: Arc<Manifold>,
    forms: Vec<(String, EquivariantForm)>,
    xs: Vec<AlgebraVector>,
    test_forms: Vec<TestForm>,
    test_functions: Vec<TestFunctionOnGStar>,
    convention: OnceLock<std::result::Result<EulerConvention, Error>>,
}

fn fmt_x(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(";"))
}

/// Common polynomial degree of every monomial of α, if there is one.
fn homogeneous_degree(alpha: &EquivariantForm) -> Option<u32> {
    let mut degs = alpha
        .terms()
        .iter()
        .flat_map(|(p, _)| p.terms().filter(|(_, c)| c.norm() != 0.0).map(|(e, _)| e.iter().sum::<u32>()).collect::<Vec<_>>());
    let d = degs.next()?;
    degs.all(|e| e == d).then_some(d)
}

fn from_report(experiment: &str, param: &str, value: &str, tol_name: &str, rep: &VerificationReport) -> Vec<Record> {
    rep.checks
        .iter()
        .map(|c| {
            let mut r = Record::new(experiment, param, value).real(c.value, 0.0).check(tol_name, c.tolerance, c.passed);
            r.note = Some(match &c.witness {
                Some(w) => format!("{}: {w}", c.name),
                None => c.name.clone(),
            });
            r
        })
        .collect()
}

impl<'a> Context<'a> {
    pub(super) fn new(cfg: &'a ExperimentConfig, m: Manifold) -> Result<Self> {
        let m = Arc::new(m);
        let cfgerr = |what: &str, e: Error| Error::Config(format!("{what}: {e}"));
        let forms = cfg
            .forms
            .iter()
            .map(|f| Ok((f.label.clone(), f.spec.build(&m).map_err(|e| cfgerr(&f.label, e))?)))
            .collect::<Result<Vec<_>>>()?;
        let test_forms =
            cfg.test_forms.iter().map(|t| TestForm::from_spec(t).map_err(|e| cfgerr("test form", e))).collect::<Result<_>>()?;
        let test_functions = cfg
            .test_functions
            .iter()
            .map(|t| TestFunctionOnGStar::from_spec(t).map_err(|e| cfgerr("test function", e)))
            .collect::<Result<_>>()?;
        Ok(Context {
            cfg,
            xs: cfg.grids.x.iter().cloned().map(AlgebraVector::new).collect(),
            m,
            forms,
            test_forms,
            test_functions,
            convention: OnceLock::new(),
        })
    }

    pub(super) fn manifold_name(&self) -> String {
        self.m.name.clone()
    }

    pub(super) fn run_suite(&self, name: &str) -> Vec<Record> {
        match name {
            "validate" => self.validate(),
            "direct" => self.direct(),
            "localize" => self.localize(),
            "compare" => self.compare(),
            "dh" => self.dh(),
            "distrib" => self.distrib(),
            "growth" => self.growth(),
            "nozeroes" => self.nozeroes(),
            _ => unreachable!("suite names are validated"),
        }
    }

    fn tol(&self, name: &str) -> f64 {
        self.cfg.tolerance(name)
    }

    fn convention(&self) -> Result<EulerConvention> {
        self.convention
            .get_or_init(|| calibrate_euler_convention(&self.cfg.calibration.reference.build()?))
            .clone()
    }

    /// Direct value of `∫ α(X)e^{iω̃(X)}`: plain quadrature on compact
    /// manifolds, damped and extrapolated in `ε` otherwise.
    fn direct_at(&self, alpha: &EquivariantForm, x: &AlgebraVector) -> Result<(Complex64, f64, bool)> {
        let spec = &self.cfg.quadrature;
        if self.m.compact {
            let e = direct_value(&self.m, alpha, x, spec)?;
            return Ok((e.value, e.error, e.converged));
        }
        let x0 = self.cfg.grids.x0.as_ref().ok_or_else(|| {
            Error::Precondition("grids.x0 is required for damped integrals on non-compact manifolds".into())
        })?;
        let eps = self.cfg.grids.eps.clone().unwrap_or_else(default_eps_grid);
        let l = damped_improper_integral(&self.m, alpha, x, &AlgebraVector::new(x0.clone()), &eps, spec)?;
        Ok((l.value, l.error_estimate, l.converged))
    }

    fn validate(&self) -> Vec<Record> {
        let mut out = Vec::new();
        let tol = self.tol("hamiltonian");
        match validate_hamiltonian(&self.m, self.cfg.validate.samples, tol) {
            Ok(rep) => out.extend(from_report("hamiltonian", "samples", &self.cfg.validate.samples.to_string(), "hamiltonian", &rep)),
            Err(e) => out.push(Record::failed("hamiltonian", "samples", "", &e)),
        }
        for x in &self.xs {
            let px = fmt_x(&x.coords);
            match is_strongly_regular(&self.m, x) {
                Ok(v) => {
                    let mut r = Record::new("strong_regularity", "X", &px).real(v.min_pairing, 0.0).check(
                        "tau_reg",
                        crate::liealg::TAU_REG,
                        v.regular,
                    );
                    r.note = v.offending;
                    out.push(r);
                }
                Err(e) => out.push(Record::failed("strong_regularity", "X", &px, &e)),
            }
        }
        let tol = self.tol("dg_squared");
        for (label, alpha) in &self.forms {
            let res = (|| -> Result<Option<VerificationReport>> {
                if !check_invariant(&self.m, alpha, 20, 1e-8)? {
                    return Ok(None);
                }
                let d = twisted_differential(&self.m, alpha)?;
                Ok(Some(check_equivariantly_closed(&self.m, &d, self.cfg.validate.dg_samples, tol)?))
            })();
            match res {
                Ok(Some(rep)) => out.extend(from_report("dg_squared", "form", label, "dg_squared", &rep)),
                Ok(None) => out.push(
                    Record::new("dg_squared", "form", label)
                        .check("dg_squared", tol, true)
                        .note("form is not T-invariant; (d_g)² = L_X does not vanish on it"),
                ),
                Err(e) => out.push(Record::failed("dg_squared", "form", label, &e)),
            }
        }
        out
    }

    fn direct(&self) -> Vec<Record> {
        let mut out = Vec::new();
        let tol = self.tol("direct_rel");
        for (label, alpha) in &self.forms {
            for x in &self.xs {
                let exp = format!("direct/{label}");
                let px = fmt_x(&x.coords);
                out.push(match self.direct_at(alpha, x) {
                    Ok((v, err, conv)) => {
                        let rec = Record::new(exp, "X", px).value(v, err).check("direct_rel", tol, err <= tol * v.norm().max(1.0));
                        if conv {
                            rec
                        } else {
                            rec.note("relative tolerance not reached; error estimate is absolute")
                        }
                    }
                    Err(e) => Record::failed(exp, "X", &px, &e),
                });
            }
            let policy = self.cfg.grids.r_policy.clone().unwrap_or_default();
            for (i, phi) in self.test_forms.iter().enumerate() {
                let exp = format!("pairing/{label}");
                let p = format!("phi{}", i + 1);
                out.push(match pair_distributional(&self.m, alpha, 1.0, phi, &policy, &self.cfg.quadrature) {
                    Ok(l) => Record::new(exp, "test_form", p).value(l.value, l.error_estimate).check(
                        "direct_rel",
                        tol,
                        l.error_estimate <= tol * l.value.norm().max(1.0),
                    ),
                    Err(e) => Record::failed(exp, "test_form", &p, &e),
                });
            }
        }
        out
    }

    fn localize(&self) -> Vec<Record> {
        let mut out = Vec::new();
        let conv = match self.convention() {
            Ok(c) => c,
            Err(e) => return vec![Record::failed("calibration", "reference", "", &e)],
        };
        let ctol = self.tol("calibration");
        let mut r = Record::new("calibration", "c_chi", &conv.label)
            .value(conv.c_chi, 0.0)
            .check("calibration", ctol, conv.residual <= ctol);
        r.rel_err = Some(conv.residual);
        r.note = Some(format!("reference {}", conv.reference));
        out.push(r);
        let n = self.m.n as i32;
        let s_grid = self.cfg.grids.s.clone().unwrap_or_else(default_s_grid);
        for (label, alpha) in &self.forms {
            for x in &self.xs {
                let px = fmt_x(&x.coords);
                // homogeneity: sum(X, s) = s^{n−d}·sum(sX, 1) for α of degree d in X
                let exp = format!("localization/{label}");
                let res = (|| -> Result<Record> {
                    let a = localization_sum(&self.m, alpha, x, 2.0, &conv)?;
                    let tol = self.tol("compare_rel");
                    let Some(d) = homogeneous_degree(alpha) else {
                        let mut rec = Record::new(exp.clone(), "X", px.clone()).value(a.value, 0.0).check("compare_rel", tol, true);
                        rec.note = Some("not homogeneous in X: homogeneity not tested".into());
                        rec.details = serde_json::to_value(&a.contributions).ok();
                        return Ok(rec);
                    };
                    let b = localization_sum(&self.m, alpha, &x.scaled(2.0), 1.0, &conv)?;
                    let scale = 2f64.powi(n - d as i32);
                    let rec = Record::new(exp.clone(), "X", px.clone()).value(a.value, 0.0).oracle(b.value * scale);
                    let pass = rec.abs_err.unwrap() <= tol * (b.value.norm() * scale).max(1e-14);
                    let mut rec = rec.check("compare_rel", tol, pass).note("s = 2 against 2^(n−d)·sum(2X, s = 1)");
                    rec.details = serde_json::to_value(&a.contributions).ok();
                    Ok(rec)
                })();
                out.push(res.unwrap_or_else(|e| Record::failed(exp, "X", &px, &e)));
                let exp = format!("regularized/{label}");
                out.push(match regularized_value(&self.m, alpha, x, &conv, &s_grid) {
                    Ok(r) => {
                        let tol = self.tol("regularized_abs");
                        let rec = Record::new(exp, "X", px.clone()).value(r.limit.value, r.limit.error_estimate).oracle(r.closed_form);
                        let pass = rec.abs_err.unwrap() <= tol * r.closed_form.norm().max(1.0);
                        rec.check("regularized_abs", tol, pass)
                    }
                    Err(e) => Record::failed(exp, "X", &px, &e),
                });
            }
        }
        out
    }

    fn compare(&self) -> Vec<Record> {
        let conv = match self.convention() {
            Ok(c) => c,
            Err(e) => return vec![Record::failed("calibration", "reference", "", &e)],
        };
        let tol = self.tol("compare_rel");
        let mut out = Vec::new();
        for (label, alpha) in &self.forms {
            for x in &self.xs {
                let exp = format!("direct_vs_localized/{label}");
                let px = fmt_x(&x.coords);
                let res = (|| -> Result<Record> {
                    let (v, err, _) = self.direct_at(alpha, x)?;
                    let l = localization_sum(&self.m, alpha, x, 1.0, &conv)?;
                    let rec = Record::new(exp.clone(), "X", px.clone()).value(v, err).oracle(l.value);
                    let scale = l.value.norm().max(1.0);
                    let pass = rec.abs_err.unwrap() <= tol * scale;
                    Ok(rec.check("compare_rel", tol, pass))
                })();
                out.push(res.unwrap_or_else(|e| Record::failed(exp, "X", &px, &e)));
            }
        }
        out
    }

    fn dh(&self) -> Vec<Record> {
        let Some(dh) = &self.cfg.dh else {
            return vec![Record::new("dh", "", "").check("dh_se_multiple", 0.0, true).note("no [dh] table: skipped")];
        };
        let mult = self.tol("dh_se_multiple");
        let grid = HistogramGrid::uniform_1d(dh.lo, dh.hi, dh.bins);
        let hist = match dh_pushforward(&self.m, dh.r_cutoff, &grid, dh.samples, self.cfg.seed) {
            Ok(h) => h,
            Err(e) => return vec![Record::failed("dh_histogram", "", "", &e)],
        };
        let mut out = Vec::new();
        let bw = grid.bin_volume();
        for b in 0..grid.n_bins() {
            let lo = grid.bin_lo(b)[0];
            let pv = format!("{lo}");
            out.push(match dh_bin_mass_exact(&self.m, lo, lo + bw) {
                Ok(mass) => {
                    let se = hist.sampling_error[b] / bw;
                    let rec = Record::new("dh_density", "bin_lo", pv).real(hist.density(b), se).oracle(Complex64::new(mass / bw, 0.0));
                    let pass = rec.abs_err.unwrap() <= mult * se;
                    rec.check("dh_se_multiple", mult, pass)
                }
                Err(e) => Record::failed("dh_density", "bin_lo", &pv, &e),
            });
        }
        let n = self.m.n as i32;
        for (i, psi) in self.test_functions.iter().enumerate() {
            let p = format!("psi{}", i + 1);
            let res = (|| -> Result<Record> {
                let d = alpha_exp_distribution(&self.m, &form_one(&self.m), 1.0)?;
                let f = fourier_pair(&d, psi, dh.r_cutoff)?;
                let (mc, se) = hist.pair_function(&|xi| psi.eval(xi));
                let v = f.value / Complex64::new(0.0, 1.0).powi(n);
                let rec = Record::new("dh_fourier", "test_function", p.clone()).value(v, f.error).oracle(mc);
                let pass = rec.abs_err.unwrap() <= mult * se + f.error;
                Ok(rec.check("dh_se_multiple", mult, pass).note(format!("sampling SE {se:e}")))
            })();
            out.push(res.unwrap_or_else(|e| Record::failed("dh_fourier", "test_function", &p, &e)));
        }
        out
    }

    fn distrib(&self) -> Vec<Record> {
        let mut out = Vec::new();
        let dc = &self.cfg.distrib;
        let seed = self.cfg.seed;
        for (label, alpha) in &self.forms {
            for (i, psi) in self.test_functions.iter().enumerate() {
                let p = format!("psi{}", i + 1);
                let lemma = check_lemma_2_11(&self.m, alpha, psi, dc.samples, self.tol("lemma"));
                let paradan = paradan_pointwise_check(&self.m, alpha, psi, dc.points, seed);
                let chain = commuting_diagram_check(&self.m, alpha, psi, dc.points, seed);
                for (exp, tol_name, res) in [("lemma", "lemma", lemma), ("paradan", "paradan_ratio", paradan), ("chain_map", "paradan_ratio", chain)] {
                    let exp = format!("{exp}/{label}");
                    match res {
                        Ok(rep) => out.extend(from_report(&exp, "test_function", &p, tol_name, &rep)),
                        Err(e) => out.push(Record::failed(exp, "test_function", &p, &e)),
                    }
                }
            }
            if let (Some(phi), Some(psi)) = (self.test_forms.first(), self.test_functions.first()) {
                let exp = format!("basis_independence/{label}");
                let basis = skewed_basis(self.m.k());
                match basis_independence_check(&self.m, alpha, phi, psi, &basis, dc.points.min(10), self.tol("basis")) {
                    Ok(rep) => out.extend(from_report(&exp, "pair", "phi1,psi1", "basis", &rep)),
                    Err(e) => out.push(Record::failed(exp, "pair", "phi1,psi1", &e)),
                }
            }
        }
        out
    }

    fn growth_records(&self, exp: &str, rep: Result<GrowthReport>, expected: Option<f64>) -> Vec<Record> {
        let rep = match rep {
            Ok(r) => r,
            Err(e) => return vec![Record::failed(exp, "", "", &e)],
        };
        let qtol = self.tol("growth_quad_rel");
        let mut out: Vec<Record> = rep
            .r_grid
            .iter()
            .zip(rep.values.iter().zip(&rep.errors))
            .map(|(r, (v, e))| {
                Record::new(format!("{exp}/f"), "R", r.to_string()).real(*v, *e).check("growth_quad_rel", qtol, *e <= qtol * v.abs().max(1e-300) || *e == 0.0)
            })
            .collect();
        let etol = self.tol("exponent");
        let mut rec = Record::new(format!("{exp}/exponent"), "window", "tail half").real(rep.exponent, rep.residual_rms);
        let mut pass = rep.verdict && !rep.partial;
        if let Some(e) = expected {
            rec = rec.oracle(Complex64::new(e, 0.0));
            pass &= rec.abs_err.unwrap() <= etol;
        }
        let mut rec = rec.check("exponent", etol, pass);
        rec.note = Some(format!("curvature {:.3e}; {}", rep.curvature, rep.notes.join("; ")));
        out.push(rec);
        out
    }

    fn growth(&self) -> Vec<Record> {
        let Some(g) = &self.cfg.growth else {
            return vec![Record::new("growth", "", "").check("exponent", 0.0, true).note("no [growth] table: skipped")];
        };
        let spec = &self.cfg.quadrature;
        let mut out = self.growth_records("volume", growth_volume(&self.m, &g.r, spec), g.volume_exponent);
        if let Some(x0) = &self.cfg.grids.x0 {
            let rep = growth_levelset(&self.m, &LevelIntegrand::InducedVolume, x0, &g.r, spec);
            out.extend(self.growth_records("levelset", rep, g.levelset_exponent));
        }
        out
    }

    fn nozeroes(&self) -> Vec<Record> {
        let Some(nz) = &self.cfg.nozeroes else {
            return vec![Record::new("nozeroes", "", "").check("c_d_floor", 0.0, true).note("no [nozeroes] table: skipped")];
        };
        let d = d_box(&nz.d_lo, &nz.d_hi, nz.per_axis);
        match no_zeroes_check(&self.m, &d, nz.u_radius, nz.samples, self.cfg.seed) {
            Ok(rep) => {
                let mut out = Vec::new();
                let floor = self.tol("c_d_floor");
                let c_d = if rep.vacuous { f64::INFINITY } else { rep.c_d };
                let mut rec = Record::new("c_d", "u_radius", nz.u_radius.to_string()).real(c_d, 0.0);
                let mut pass = rep.verdict && (rep.vacuous || rep.c_d >= floor);
                if let Some(e) = nz.expected_c_d {
                    rec = rec.oracle(Complex64::new(e, 0.0));
                    pass &= rep.vacuous || rec.abs_err.unwrap() <= self.tol("c_d_abs");
                }
                let mut rec = rec.check("c_d_floor", floor, pass);
                let w = rep.norm_witness.as_ref().map(|w| format!("witness X={:?} m={:?}", w.x, w.point));
                rec.note = Some(format!(
                    "{} samples outside U; min (VF,VF) {:e}; min ratio {:e}{}",
                    rep.n_region_samples,
                    rep.min_norm,
                    rep.min_ratio,
                    w.map(|w| format!("; {w}")).unwrap_or_default()
                ));
                out.push(rec);
                out.extend(
                    from_report("nozeroes_checks", "u_radius", &nz.u_radius.to_string(), "c_d_floor", &rep.report)
                        .into_iter()
                        .filter(|r| !r.pass),
                );
                out
            }
            Err(e) => vec![Record::failed("c_d", "u_radius", &nz.u_radius.to_string(), &e)],
        }
    }
}
