use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use qframes::analysis::{negativity, nogo_sweep, sampled_classicality_check};
use qframes::catalog::props::{run_pair_props, run_props, Prop};
use qframes::catalog::{build, find_fiducial, Family, RepSpec, Representation, SicSearch};
use qframes::finitefield::FieldElement;
use qframes::io::{self, DistributionDoc, FiducialDoc, KrausDoc, Num, OperatorDoc, OperatorKind, PairDoc};
use qframes::repr::{born, born_deformed, channel_matrix, rep_effect, rep_operator, rep_state, ChannelForm, QuasiDistribution, RepKind, Side, StarAlgebra};
use qframes::{frames, DualPair64, Tolerance, VERSION};

use crate::{Cli, Command, FamilyArgs, Format, SideArg};

/// Runs one command; `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let tol = Tolerance::new(cli.tol, cli.tol).context("--tol")?;
    if cli.format == Format::Csv && !matches!(cli.command, Command::Rep(_)) {
        bail!("--format csv is only available for `rep`");
    }
    let ctx = Ctx { cli, tol };
    match &cli.command {
        Command::Build(a) => ctx.build(a),
        Command::Rep(a) => ctx.rep(a),
        Command::Born(a) => ctx.born(a),
        Command::Channel(a) => ctx.channel(a),
        Command::Star(a) => ctx.star(a),
        Command::Verify(a) => ctx.verify(a),
        Command::SicFind(a) => ctx.sic_find(a),
        Command::Sweep(a) => ctx.sweep(a),
        Command::Negativity(a) => ctx.negativity(a),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    tol: Tolerance,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_file<D: serde::de::DeserializeOwned>(path: &Path) -> Result<D> {
    Ok(io::parse(&read(path)?, &path.display().to_string())?)
}

impl Ctx<'_> {
    /// Report header shared by every JSON report.
    fn header(&self, command: &str) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), json!(command));
        m.insert("version".into(), json!(VERSION));
        m.insert("seed".into(), json!(self.cli.seed));
        m.insert("tolerance".into(), json!({ "abs": Num(self.tol.abs_tol), "rel": Num(self.tol.rel_tol) }));
        m
    }

    /// Writes the main output to `--out` or stdout. Returns whether it went to a file.
    fn emit(&self, text: &str) -> Result<bool> {
        match &self.cli.out {
            Some(p) => {
                fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
                Ok(true)
            }
            None => {
                print!("{text}");
                Ok(false)
            }
        }
    }

    /// Status lines go to stdout when the artifact went to a file, stderr otherwise.
    fn status(&self, to_file: bool, line: &str) {
        if to_file {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }

    fn spec(&self, a: &FamilyArgs) -> Result<RepSpec> {
        let family: Family = match &a.family {
            Some(f) => f.parse()?,
            None if a.p.is_some() => Family::Ghw,
            None => bail!("--family is required"),
        };
        let dim = match (a.dim, a.p, a.n) {
            (Some(d), None, None) => d,
            (None, Some(p), n) => (p as usize).checked_pow(n.unwrap_or(1) as u32).context("field order overflows")?,
            (Some(d), Some(p), n) => {
                let q = (p as usize).pow(n.unwrap_or(1) as u32);
                if q != d {
                    bail!("--dim {d} disagrees with --p {p} --n {}", n.unwrap_or(1));
                }
                d
            }
            (Some(_), None, Some(_)) => bail!("--n needs --p"),
            (None, None, _) => bail!("--dim (or --p/--n for ghw) is required"),
        };
        let mut spec = RepSpec::new(family, dim);
        spec.modulus = a.modulus.clone();
        spec.f_multiplier = a.f_multiplier.as_deref().map(str::parse::<FieldElement>).transpose()?;
        if let Some(path) = &a.fiducial_file {
            let doc: FiducialDoc = parse_file(path)?;
            if doc.dim != dim {
                bail!("fiducial file has dim {}, expected {dim}", doc.dim);
            }
            spec.fiducial = Some(doc.amplitudes()?);
        }
        if let Some(path) = &a.constellation_file {
            let pts: Vec<[f64; 3]> = parse_file(path)?;
            spec.constellation = Some(pts);
        }
        spec.signs = a.signs.clone();
        spec.seed = self.cli.seed;
        spec.restarts = a.restarts;
        Ok(spec)
    }

    fn build_rep(&self, a: &FamilyArgs) -> Result<(RepSpec, Representation<f64>)> {
        let spec = self.spec(a)?;
        let rep = build::<f64>(&spec, &self.tol)?;
        Ok((spec, rep))
    }

    fn load_pair(&self, path: &Path) -> Result<(PairDoc, DualPair64)> {
        let doc: PairDoc = parse_file(path)?;
        let pair = doc.to_pair::<f64>(&self.tol).with_context(|| format!("loading frame file {}", path.display()))?;
        Ok((doc, pair))
    }

    fn build(&self, a: &FamilyArgs) -> Result<bool> {
        let (spec, rep) = self.build_rep(a)?;
        let text = io::to_json(&PairDoc::from_pair(&rep.pair, Some(spec.clone())))?;
        let to_file = self.emit(&text)?;
        let (tight, constant) = rep.pair.frame.is_tight(&self.tol);
        self.status(to_file, &format!("family {} d={}: {} elements, coordinate rank {}", spec.family, spec.dim, rep.pair.len(), rep.pair.frame.coordinate_rank()));
        let (lo, hi) = rep.pair.frame.frame_bounds();
        if tight {
            self.status(to_file, &format!("frame operator: tight, a = {constant}"));
        } else {
            self.status(to_file, &format!("frame operator: not tight, bounds [{lo}, {hi}]"));
        }
        if let Some(f) = &rep.fiducial {
            self.status(to_file, &format!("fiducial: {:?}, residual {:e}, restarts {}", f.provenance, f.residual, f.restarts_used));
        }
        Ok(true)
    }

    fn rep(&self, a: &crate::RepArgs) -> Result<bool> {
        let (_, pair) = self.load_pair(&a.frame)?;
        let dist = if let Some(s) = &a.state {
            let op = parse_file::<OperatorDoc>(s)?.to_operator::<f64>(OperatorKind::Density, &self.tol)?;
            rep_state(&pair, &op)?
        } else {
            let path = a.effect.as_ref().context("--state or --effect is required")?;
            let op = parse_file::<OperatorDoc>(path)?.to_operator::<f64>(OperatorKind::Effect, &self.tol)?;
            let side = if a.side == SideArg::Frame { Side::Frame } else { Side::Dual };
            rep_effect(&pair, &op, side, &self.tol)?
        };
        if let Some(w) = &dist.warning {
            eprintln!("warning: {w}");
        }
        if let Some(p) = &a.csv {
            fs::write(p, io::grid_csv(&dist)?).with_context(|| format!("writing {}", p.display()))?;
        }
        let text = match self.cli.format {
            Format::Json => io::to_json(&DistributionDoc::from_distribution(&dist))?,
            Format::Csv => io::grid_csv(&dist)?,
        };
        self.emit(&text)?;
        Ok(true)
    }

    fn born(&self, a: &crate::BornArgs) -> Result<bool> {
        let (_, pair) = self.load_pair(&a.frame)?;
        let rho = parse_file::<OperatorDoc>(&a.state)?.to_operator::<f64>(OperatorKind::Density, &self.tol)?;
        let e = parse_file::<OperatorDoc>(&a.effect)?.to_operator::<f64>(OperatorKind::Effect, &self.tol)?;
        let mu = rep_state(&pair, &rho)?;
        let plain = born(&mu, &rep_effect(&pair, &e, Side::Dual, &self.tol)?)?;
        let deformed = born_deformed(&mu, &rep_effect(&pair, &e, Side::Frame, &self.tol)?, &frames::dual_gram(&pair))?;
        let exact = qframes::linalg::trace_product(rho.matrix(), e.matrix()).re;
        let mut m = self.header("born");
        m.insert("born".into(), json!(Num(plain)));
        m.insert("born_deformed".into(), json!(Num(deformed)));
        m.insert("trace".into(), json!(Num(exact)));
        m.insert("error".into(), json!(Num((plain - exact).abs().max((deformed - exact).abs()))));
        self.emit(&io::to_json(&Value::Object(m))?)?;
        Ok(true)
    }

    fn channel(&self, a: &crate::ChannelArgs) -> Result<bool> {
        let (_, pair) = self.load_pair(&a.frame)?;
        let ch = parse_file::<KrausDoc>(&a.kraus)?.to_channel::<f64>(&self.tol)?;
        let form: ChannelForm = a.form.parse()?;
        let m = channel_matrix(&pair, &ch, form)?;
        let mut report = self.header("channel");
        report.insert("form".into(), json!(form.to_string()));
        report.insert("labels".into(), json!(pair.space().labels().iter().map(ToString::to_string).collect::<Vec<_>>()));
        let rows: Vec<Vec<Num>> = m.entries.row_iter().map(|r| r.iter().map(|v| Num(*v)).collect()).collect();
        report.insert("entries".into(), json!(rows));
        if let Some(perm) = m.as_permutation(self.tol.abs_tol) {
            report.insert("permutation".into(), json!(perm));
        }
        if let Some(s) = &a.state {
            let rho = parse_file::<OperatorDoc>(s)?.to_operator::<f64>(OperatorKind::Density, &self.tol)?;
            let out = m.apply(&rep_state(&pair, &rho)?)?;
            report.insert("output".into(), serde_json::to_value(DistributionDoc::from_distribution(&out))?);
        }
        self.emit(&io::to_json(&Value::Object(report))?)?;
        Ok(true)
    }

    /// Frame-side coefficients from either a distribution file or an operator file.
    fn coefficients(&self, pair: &DualPair64, path: &Path) -> Result<nalgebra::DVector<qframes::C<f64>>> {
        let text = read(path)?;
        if let Ok(doc) = io::parse::<DistributionDoc>(&text, "distribution") {
            let q: QuasiDistribution<f64> = doc.to_distribution(pair.space(), &self.tol)?;
            if q.kind() == RepKind::DualEffect {
                bail!("{}: star products take frame-side distributions", path.display());
            }
            return Ok(q.values().map(|v| qframes::C::new(v, 0.0)));
        }
        let op = io::parse::<OperatorDoc>(&text, &path.display().to_string())?.to_operator::<f64>(OperatorKind::Hermitian, &self.tol)?;
        if op.dim() != pair.dim() {
            bail!("{}: operator has dim {}, frame has dim {}", path.display(), op.dim(), pair.dim());
        }
        Ok(rep_operator(pair, op.matrix()))
    }

    fn star(&self, a: &crate::StarArgs) -> Result<bool> {
        let (_, pair) = self.load_pair(&a.frame)?;
        let alg = StarAlgebra::new(&pair);
        let x = self.coefficients(&pair, &a.a)?;
        let y = self.coefficients(&pair, &a.b)?;
        let prod = alg.star_coeffs(&x, &y)?;
        let mut report = self.header("star");
        report.insert("labels".into(), json!(pair.space().labels().iter().map(ToString::to_string).collect::<Vec<_>>()));
        report.insert("re".into(), json!(prod.iter().map(|z| Num(z.re)).collect::<Vec<_>>()));
        report.insert("im".into(), json!(prod.iter().map(|z| Num(z.im)).collect::<Vec<_>>()));
        report.insert("dense".into(), json!(alg.is_dense()));
        self.emit(&io::to_json(&Value::Object(report))?)?;
        Ok(true)
    }

    fn verify(&self, a: &crate::VerifyArgs) -> Result<bool> {
        let props = a.props.iter().map(|s| s.parse::<Prop>()).collect::<qframes::Result<Vec<_>>>()?;
        let (target, checks) = match &a.frame {
            Some(path) => {
                let (doc, pair) = self.load_pair(path)?;
                match doc.spec {
                    Some(spec) => {
                        let rep = build::<f64>(&spec, &self.tol)?;
                        let drift = pair.dual.ops().iter().zip(rep.pair.dual.ops()).map(|(x, y)| qframes::linalg::max_abs_diff(x.matrix(), y.matrix())).fold(0.0, f64::max);
                        let mut checks = run_props(&rep, &props, self.cli.seed, &self.tol)?;
                        checks.insert(
                            0,
                            qframes::catalog::props::PropCheck { name: "file:matches-recipe".into(), passed: drift <= self.tol.abs_tol, measured: drift, limit: self.tol.abs_tol, note: None },
                        );
                        (json!({ "frame": path.display().to_string(), "spec": spec }), checks)
                    }
                    None => (json!({ "frame": path.display().to_string() }), run_pair_props(&pair, &props, self.cli.seed, &self.tol)?),
                }
            }
            None => {
                let (spec, rep) = self.build_rep(&a.family)?;
                (json!({ "spec": spec }), run_props(&rep, &props, self.cli.seed, &self.tol)?)
            }
        };
        let passed = checks.iter().all(|c| c.passed);
        let mut report = self.header("verify");
        report.insert("target".into(), target);
        report.insert("props".into(), json!(a.props));
        report.insert(
            "checks".into(),
            json!(checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "measured": Num(c.measured), "limit": Num(c.limit), "note": c.note })).collect::<Vec<_>>()),
        );
        report.insert("passed".into(), json!(passed));
        let to_file = self.emit(&io::to_json(&Value::Object(report))?)?;
        for c in &checks {
            self.status(to_file, &format!("{} {:<28} {:.3e} (limit {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.limit));
        }
        Ok(passed)
    }

    fn sic_find(&self, a: &crate::SicFindArgs) -> Result<bool> {
        if a.dim < 2 {
            bail!("--dim must be at least 2");
        }
        let f = find_fiducial::<f64>(a.dim, &SicSearch { restarts: a.restarts, seed: self.cli.seed, ..SicSearch::default() });
        let to_file = self.emit(&io::to_json(&FiducialDoc::from_fiducial(&f))?)?;
        self.status(to_file, &format!("d={}: residual {:e} after {} restarts ({})", a.dim, f.residual, f.restarts_used, if f.converged { "converged" } else { "not converged" }));
        Ok(f.converged)
    }

    fn sweep(&self, a: &crate::SweepArgs) -> Result<bool> {
        let d = a.dim;
        let trials = a.trials.unwrap_or(match d {
            2 => 1000,
            3 => 200,
            _ => 100,
        });
        let sizes = a.sizes.clone().unwrap_or_else(|| if d == 2 { vec![4, 6, 8] } else { vec![d * d] });
        let result = nogo_sweep::<f64>(d, trials, &sizes, self.cli.seed, &self.tol)?;
        let mut report = self.header("sweep");
        report.insert("result".into(), serde_json::to_value(&result)?);
        let to_file = self.emit(&io::to_json(&Value::Object(report))?)?;
        self.status(
            to_file,
            &format!("d={d}: {} trials, {} with nonnegative dual, closest minimum eigenvalue {:e}", result.trials, result.nonnegative_duals, result.closest),
        );
        Ok(result.passed())
    }

    fn negativity(&self, a: &crate::NegativityArgs) -> Result<bool> {
        let mut report = self.header("negativity");
        if let Some(path) = &a.dist {
            let doc: DistributionDoc = parse_file(path)?;
            let space = qframes::OnticSpace::new(doc.labels.iter().map(|s| s.parse().unwrap_or_else(|e| match e {})).collect())?;
            let q: QuasiDistribution<f64> = doc.to_distribution(&space, &self.tol)?;
            report.insert("negativity".into(), json!(Num(negativity(&q))));
            report.insert("min".into(), json!(Num(q.min())));
        } else {
            let pair = match &a.frame {
                Some(p) => self.load_pair(p)?.1,
                None => self.build_rep(&a.family)?.1.pair,
            };
            let r = sampled_classicality_check(&pair, a.samples, self.cli.seed, &self.tol)?;
            report.insert("failed_conditions".into(), json!(r.failed_conditions()));
            report.insert("report".into(), serde_json::to_value(&r)?);
        }
        self.emit(&io::to_json(&Value::Object(report))?)?;
        Ok(true)
    }
}
