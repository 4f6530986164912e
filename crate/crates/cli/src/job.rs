//! Semantic validation of a [`JobConfig`] and command dispatch.

use heyde_core::fdm::{cascade_identity_check, cascade_subgroup, residual_kernel, GroupFunction};
use heyde_core::gaussian::{
    check_product_feq, gaussian_pair_condition, render_matrix, render_vector, sample_real_feq,
    verify_full_decomposition, FullDecomposition, GaussianParams, ProductDistribution,
    RealAutomorphismBlock,
};
use heyde_core::group::{check_heyde_condition, HeydeCondition};
use heyde_core::heyde::{
    enumerate_valid_automorphisms, extract_decomposition, is_conditionally_symmetric, joint,
    satisfies_feq, solve_partner, Decomposition, ExtractError, SymmetryCheck,
};
use heyde_core::rational::{self, Rational};
use heyde_core::{
    sampling, Bounds, Error, FiniteAbelianGroup, GroupElement, GroupMap, RationalDistribution,
    Subgroup,
};
use rand::Rng;

use crate::config::{
    parse_syntax, Command, ConfigError, DistSpec, ErrorKind, JobConfig, KeyLines,
};
use crate::report::{residual, Report, Verdict};

pub const DEFAULT_TOL: (i64, i64) = (1, 1_000_000_000);
pub const DEFAULT_FDM_SAMPLES: usize = 20;
pub const DEFAULT_GAUSSIAN_SAMPLES: usize = 200;

#[derive(Debug, Clone)]
pub enum Law {
    Discrete(RationalDistribution),
    Product(ProductDistribution),
}

/// A validated job, ready to run.
#[derive(Debug, Clone)]
pub struct Job {
    pub command: Command,
    pub group: FiniteAbelianGroup,
    pub delta: Option<GroupMap>,
    pub block: Option<RealAutomorphismBlock>,
    pub mu1: Option<Law>,
    pub mu2: Option<Law>,
    pub tol: Rational,
    pub seed: Option<u64>,
    pub bounds: Bounds,
    pub samples: usize,
}

fn core_error(line: usize, what: &str, e: Error) -> ConfigError {
    let kind = match e {
        Error::SizeLimit { .. } => ErrorKind::Bound,
        _ => ErrorKind::Semantic,
    };
    ConfigError::new(kind, line, format!("{what}: {e}"))
}

fn element(g: &FiniteAbelianGroup, coords: &[i64], line: usize, what: &str) -> Result<GroupElement, ConfigError> {
    let in_range = coords.len() == g.rank()
        && coords.iter().zip(g.orders()).all(|(&c, &d)| c >= 0 && (c as u64) < d);
    if !in_range {
        let shown: Vec<String> = coords.iter().map(i64::to_string).collect();
        return Err(ConfigError::new(
            ErrorKind::Semantic,
            line,
            format!("{what}: ({}) is not a reduced element of {g}", shown.join(",")),
        ));
    }
    g.element(coords).map_err(|e| core_error(line, what, e))
}

fn discrete(g: &FiniteAbelianGroup, spec: &DistSpec, line: usize, what: &str) -> Result<RationalDistribution, ConfigError> {
    let wrap = |e| core_error(line, what, e);
    match spec {
        DistSpec::Literal(m) => RationalDistribution::new(g, m.clone()).map_err(wrap),
        DistSpec::HaarFull => Ok(RationalDistribution::haar(&Subgroup::whole(g))),
        DistSpec::HaarGen(gens) => {
            let gens = gens
                .iter()
                .map(|x| element(g, x, line, what))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RationalDistribution::haar(&Subgroup::generated(g, &gens).map_err(wrap)?))
        }
        DistSpec::Point(x) => RationalDistribution::point_mass(g, &element(g, x, line, what)?).map_err(wrap),
        DistSpec::Product { .. } => Err(ConfigError::new(
            ErrorKind::Semantic,
            line,
            format!("{what}: product laws are only accepted by gaussian-check"),
        )),
    }
}

fn product(g: &FiniteAbelianGroup, spec: &DistSpec, line: usize, what: &str) -> Result<ProductDistribution, ConfigError> {
    let DistSpec::Product { a, t, shift, rho } = spec else {
        return Err(ConfigError::new(
            ErrorKind::Semantic,
            line,
            format!("{what}: gaussian-check needs a `product` law"),
        ));
    };
    let wrap = |e| core_error(line, what, e);
    let gaussian = GaussianParams::new(a.clone(), t.clone()).map_err(wrap)?;
    if !gaussian.is_psd() {
        return Err(ConfigError::new(ErrorKind::Semantic, line, format!("{what}: A is not positive semidefinite")));
    }
    let rho = discrete(g, rho, line, what)?;
    let shift = element(g, shift, line, what)?;
    ProductDistribution::new(gaussian, rho, shift).map_err(wrap)
}

impl Job {
    /// Checks every semantic requirement of `config`; `lines` maps keys to
    /// source lines for diagnostics.
    pub fn build(config: &JobConfig, lines: &KeyLines) -> Result<Job, ConfigError> {
        let cmd_line = lines.get("cmd").copied().unwrap_or(0);
        let line = |k: &str| lines.get(k).copied().unwrap_or(cmd_line);
        let cmd = config.command;
        let missing = |k: &str| {
            ConfigError::new(ErrorKind::Semantic, cmd_line, format!("`{k}` is required by {}", cmd.name()))
        };
        let bounds = Bounds {
            element_scan: config.bound.unwrap_or(Bounds::default().element_scan),
            ..Bounds::default()
        };
        let orders = config.group.as_ref().ok_or_else(|| missing("group"))?;
        let group = FiniteAbelianGroup::with_bound(orders, bounds.element_scan)
            .map_err(|e| core_error(line("group"), "group", e))?;

        let tol = config.tol.clone().unwrap_or_else(|| rational::ratio(DEFAULT_TOL.0, DEFAULT_TOL.1));
        if tol <= rational::zero() {
            return Err(ConfigError::new(ErrorKind::Semantic, line("tol"), "tol must be positive"));
        }
        if cmd.is_randomized() && config.seed.is_none() {
            return Err(missing("seed"));
        }

        let delta = if cmd == Command::EnumerateAuts {
            None
        } else {
            let m = config.delta.as_ref().ok_or_else(|| missing("delta"))?;
            let n = line("delta");
            let d = GroupMap::endomorphism(m, &group).map_err(|e| core_error(n, "delta", e))?;
            if !d.is_automorphism() {
                let k = d.kernel().iter().find(|x| *x != group.zero()).unwrap_or_else(|| group.zero());
                return Err(ConfigError::new(ErrorKind::Semantic, n, "delta is not an automorphism")
                    .with_witness("witness.kernel", k.to_string()));
            }
            match check_heyde_condition(&d).map_err(|e| core_error(n, "delta", e))? {
                HeydeCondition::Holds => {}
                HeydeCondition::Fails { witness } => {
                    return Err(ConfigError::new(
                        ErrorKind::Semantic,
                        n,
                        "delta violates Ker(I + delta) = {0}",
                    )
                    .with_witness("witness.kernel", witness.to_string()));
                }
            }
            Some(d)
        };

        let mut job = Job {
            command: cmd,
            group: group.clone(),
            delta,
            block: None,
            mu1: None,
            mu2: None,
            tol,
            seed: config.seed,
            bounds,
            samples: config.samples.unwrap_or(match cmd {
                Command::GaussianCheck => DEFAULT_GAUSSIAN_SAMPLES,
                _ => DEFAULT_FDM_SAMPLES,
            }),
        };
        let law = |key: &str, spec: &Option<DistSpec>, product_law: bool| -> Result<Law, ConfigError> {
            let spec = spec.as_ref().ok_or_else(|| missing(key))?;
            if product_law {
                product(&group, spec, line(key), key).map(Law::Product)
            } else {
                discrete(&group, spec, line(key), key).map(Law::Discrete)
            }
        };
        match cmd {
            Command::Check | Command::Feq | Command::Decompose => {
                job.mu1 = Some(law("mu1", &config.mu1, false)?);
                job.mu2 = Some(law("mu2", &config.mu2, false)?);
            }
            Command::SolvePartner => job.mu2 = Some(law("mu2", &config.mu2, false)?),
            Command::GaussianCheck => {
                let mu1 = law("mu1", &config.mu1, true)?;
                let mu2 = law("mu2", &config.mu2, true)?;
                let (Law::Product(p1), Law::Product(p2)) = (&mu1, &mu2) else {
                    unreachable!("product laws requested")
                };
                let n = p1.gaussian().dim();
                if p2.gaussian().dim() != n {
                    return Err(ConfigError::new(
                        ErrorKind::Semantic,
                        line("mu2"),
                        format!("mu2: Gaussian dimension {} differs from mu1's {n}", p2.gaussian().dim()),
                    ));
                }
                let eps = config.eps_r.as_ref().ok_or_else(|| missing("eps_r"))?;
                if eps.len() != n || eps.iter().any(|r| r.len() != n) {
                    return Err(ConfigError::new(
                        ErrorKind::Semantic,
                        line("eps_r"),
                        format!("eps_r must be {n} x {n}"),
                    ));
                }
                let delta = job.delta.as_ref().expect("delta is required here");
                job.block = Some(
                    RealAutomorphismBlock::new(eps.clone(), delta.adjoint())
                        .map_err(|e| core_error(line("eps_r"), "eps_r", e))?,
                );
                job.mu1 = Some(mu1);
                job.mu2 = Some(mu2);
            }
            Command::EnumerateAuts | Command::FdmDemo => {}
        }
        Ok(job)
    }

    fn discrete_pair(&self) -> (&RationalDistribution, &RationalDistribution) {
        match (&self.mu1, &self.mu2) {
            (Some(Law::Discrete(a)), Some(Law::Discrete(b))) => (a, b),
            _ => unreachable!("validated by build"),
        }
    }

    fn delta(&self) -> &GroupMap {
        self.delta.as_ref().expect("validated by build")
    }

    pub fn run(&self) -> Report {
        let result = match self.command {
            Command::Check => self.check(),
            Command::Feq => self.feq(),
            Command::SolvePartner => self.solve_partner(),
            Command::Decompose => self.decompose(),
            Command::EnumerateAuts => self.enumerate_auts(),
            Command::FdmDemo => self.fdm_demo(),
            Command::GaussianCheck => self.gaussian_check(),
        };
        result.unwrap_or_else(|e| Report::from_error(self.command.name(), &e))
    }

    fn report(&self, verdict: Verdict) -> Report {
        let mut r = Report::new(self.command.name(), verdict);
        r.push("group", self.group.to_string());
        if let Some(d) = &self.delta {
            r.push("delta", d.to_string());
        }
        r
    }

    fn violation(&self, r: &mut Report, mu1: &RationalDistribution, mu2: &RationalDistribution, a: &GroupElement, b: &GroupElement) -> Result<(), ConfigError> {
        let j = joint(mu1, mu2, self.delta()).map_err(|e| core_error(0, "joint", e))?;
        r.push("witness.a", a.to_string());
        r.push("witness.b", b.to_string());
        r.push("witness.p_ab", rational::render(j.mass(a, b)));
        r.push("witness.p_a_minus_b", rational::render(j.mass(a, &self.group.neg(b))));
        Ok(())
    }

    fn check(&self) -> Result<Report, ConfigError> {
        let (mu1, mu2) = self.discrete_pair();
        let wrap = |e| core_error(0, "check", e);
        let exact = is_conditionally_symmetric(mu1, mu2, self.delta()).map_err(wrap)?;
        let feq = satisfies_feq(mu1, mu2, self.delta(), rational::to_f64(&self.tol)).map_err(wrap)?;
        if exact.is_symmetric() != feq.holds {
            let mut e = ConfigError::new(ErrorKind::Internal, 0, "exact symmetry test and characteristic-function equation disagree");
            e.witness.push(("witness.u".into(), feq.worst.0.to_string()));
            e.witness.push(("witness.v".into(), feq.worst.1.to_string()));
            return Err(e);
        }
        let mut r = self.report(if exact.is_symmetric() { Verdict::Pass } else { Verdict::Fail });
        r.push("symmetric", exact.is_symmetric().to_string());
        r.push("feq.holds", feq.holds.to_string());
        r.push("feq.max_residual", residual(feq.max_residual));
        if let SymmetryCheck::Violated { a, b } = &exact {
            self.violation(&mut r, mu1, mu2, a, b)?;
            r.push("witness.u", feq.worst.0.to_string());
            r.push("witness.v", feq.worst.1.to_string());
        }
        Ok(r)
    }

    fn feq(&self) -> Result<Report, ConfigError> {
        let (mu1, mu2) = self.discrete_pair();
        let feq = satisfies_feq(mu1, mu2, self.delta(), rational::to_f64(&self.tol))
            .map_err(|e| core_error(0, "feq", e))?;
        let mut r = self.report(if feq.holds { Verdict::Pass } else { Verdict::Fail });
        r.push("eps", self.delta().adjoint().to_string());
        r.push("tol", rational::render(&self.tol));
        r.push("feq.max_residual", residual(feq.max_residual));
        if !feq.holds {
            r.push("witness.u", feq.worst.0.to_string());
            r.push("witness.v", feq.worst.1.to_string());
        }
        Ok(r)
    }

    fn push_decomposition(&self, r: &mut Report, prefix: &str, d: &Decomposition) {
        r.push(&format!("{prefix}f"), render_subgroup(&d.f));
        r.push(&format!("{prefix}f.order"), d.f.order().to_string());
        for j in 0..2 {
            r.push(&format!("{prefix}rho{}", j + 1), d.rho[j].to_string());
            r.push(&format!("{prefix}g{}", j + 1), d.shifts[j].to_string());
        }
    }

    fn solve_partner(&self) -> Result<Report, ConfigError> {
        let Some(Law::Discrete(mu2)) = &self.mu2 else {
            unreachable!("validated by build")
        };
        let sol = solve_partner(mu2, self.delta()).map_err(|e| core_error(0, "solve-partner", e))?;
        let mut r = self.report(Verdict::Pass);
        r.push("mu2", mu2.to_string());
        r.push("partners.empty", sol.is_empty().to_string());
        if let Some(dim) = sol.dimension() {
            r.push("partners.dimension", dim.to_string());
        }
        r.push("partners.vertices", sol.vertices.len().to_string());
        for (i, v) in sol.vertices.iter().enumerate() {
            let key = format!("vertex.{}", i + 1);
            r.push(&key, v.to_string());
            match extract_decomposition(v, mu2, self.delta(), &self.bounds) {
                Ok(d) => self.push_decomposition(&mut r, &format!("{key}."), &d),
                Err(ExtractError::Bound(e)) => return Err(core_error(0, "solve-partner", e)),
                Err(e) => {
                    r.verdict = Verdict::Fail;
                    r.push("witness.mu1", v.to_string());
                    r.push("witness.reason", e.to_string());
                    break;
                }
            }
        }
        Ok(r)
    }

    fn decompose(&self) -> Result<Report, ConfigError> {
        let (mu1, mu2) = self.discrete_pair();
        match extract_decomposition(mu1, mu2, self.delta(), &self.bounds) {
            Ok(d) => {
                let mut r = self.report(Verdict::Pass);
                self.push_decomposition(&mut r, "", &d);
                Ok(r)
            }
            Err(ExtractError::NotSymmetric(SymmetryCheck::Violated { a, b })) => {
                let mut r = self.report(Verdict::Fail);
                r.push("symmetric", "false");
                self.violation(&mut r, mu1, mu2, &a, &b)?;
                Ok(r)
            }
            Err(ExtractError::Bound(e)) => Err(core_error(0, "decompose", e)),
            Err(e) => {
                let mut r = self.report(Verdict::Fail);
                r.push("note", e.to_string());
                r.push("witness.mu1", mu1.to_string());
                r.push("witness.mu2", mu2.to_string());
                Ok(r)
            }
        }
    }

    fn enumerate_auts(&self) -> Result<Report, ConfigError> {
        let scan = enumerate_valid_automorphisms(&self.group, &self.bounds)
            .map_err(|e| core_error(0, "enumerate-auts", e))?;
        let mut r = self.report(Verdict::Pass);
        r.push("automorphisms", (scan.valid.len() + scan.rejected.len()).to_string());
        r.push("valid", scan.valid.len().to_string());
        for (i, d) in scan.valid.iter().enumerate() {
            r.push(&format!("valid.{}", i + 1), d.to_string());
        }
        r.push("rejected", scan.rejected.len().to_string());
        for (i, (d, x)) in scan.rejected.iter().enumerate() {
            r.push(&format!("rejected.{}", i + 1), d.to_string());
            r.push(&format!("rejected.{}.kernel", i + 1), x.to_string());
        }
        if scan.valid.is_empty() {
            r.push("note", "no valid δ");
        }
        Ok(r)
    }

    fn fdm_demo(&self) -> Result<Report, ConfigError> {
        let g = &self.group;
        let eps = self.delta().adjoint();
        let mut rng = sampling::rng(self.seed.expect("validated by build"));
        let random_fn = |rng: &mut _| {
            GroupFunction::new(g, sampling::rational_vector(rng, g.order(), 5, 4)).expect("sized to the group")
        };
        let mut r = self.report(Verdict::Pass);
        r.push("eps", eps.to_string());
        let mut checks = 0usize;
        'outer: for _ in 0..self.samples {
            let phi1 = random_fn(&mut rng);
            let phi2 = random_fn(&mut rng);
            let [k1, k2, k3] = std::array::from_fn(|_| g.element_at(rng.gen_range(0..g.order())));
            for u in g.elements() {
                for v in g.elements() {
                    checks += 1;
                    if !cascade_identity_check(&phi1, &phi2, &eps, &k1, &k2, &k3, &u, &v) {
                        r.verdict = Verdict::Fail;
                        for (k, x) in [("k1", &k1), ("k2", &k2), ("k3", &k3), ("u", &u), ("v", &v)] {
                            r.push(&format!("witness.{k}"), x.to_string());
                        }
                        r.push("witness.phi1", render_vector(phi1.values()));
                        break 'outer;
                    }
                }
            }
            if !phi1.polynomial_implies_constant() {
                r.verdict = Verdict::Fail;
                r.push("witness.polynomial", render_vector(phi1.values()));
                break;
            }
        }
        r.push("cascade.samples", self.samples.to_string());
        r.push("cascade.checks", checks.to_string());
        let b = cascade_subgroup(&eps, &Subgroup::whole(g)).map_err(|e| core_error(0, "fdm-demo", e))?;
        r.push("b", render_subgroup(&b));
        r.push("b.order", b.order().to_string());
        let kernel = residual_kernel(&eps);
        r.push("kernel.dimension", kernel.len().to_string());
        let constant_on_cosets = |f: &GroupFunction| {
            g.elements().all(|y| b.iter().all(|x| f.at(&g.add(&y, &x)) == f.at(&y)))
        };
        let bad = kernel
            .iter()
            .position(|(p1, p2)| !constant_on_cosets(p1) || !constant_on_cosets(p2));
        r.push("kernel.constant_on_b_cosets", bad.is_none().to_string());
        if let Some(i) = bad {
            r.verdict = Verdict::Fail;
            r.push("witness.kernel.phi1", render_vector(kernel[i].0.values()));
            r.push("witness.kernel.phi2", render_vector(kernel[i].1.values()));
        }
        Ok(r)
    }

    fn gaussian_check(&self) -> Result<Report, ConfigError> {
        let (Some(Law::Product(mu1)), Some(Law::Product(mu2))) = (&self.mu1, &self.mu2) else {
            unreachable!("validated by build")
        };
        let block = self.block.as_ref().expect("validated by build");
        let seed = self.seed.expect("validated by build");
        let wrap = |e| core_error(0, "gaussian-check", e);
        let tol = rational::to_f64(&self.tol);
        let (g1, g2) = (mu1.gaussian(), mu2.gaussian());
        let pair = gaussian_pair_condition(g1, g2, block.eps_r()).map_err(wrap)?;
        let mut rng = sampling::rng(seed);
        let real = sample_real_feq(g1, g2, block.eps_r(), &mut rng, self.samples, f64::INFINITY).map_err(wrap)?;
        let (d1, d2) = (mu1.discrete(), mu2.discrete());
        let sym = is_conditionally_symmetric(&d1, &d2, self.delta()).map_err(wrap)?;
        let product = check_product_feq(mu1, mu2, block, self.samples, tol, seed).map_err(wrap)?;

        let mut r = self.report(Verdict::Pass);
        r.push("eps_r", render_matrix(block.eps_r()));
        r.push("pair_condition", pair.to_string());
        r.push("real.max_residual", residual(real.max_residual));
        r.push("discrete.symmetric", sym.is_symmetric().to_string());
        r.push("product.samples", product.samples.to_string());
        r.push("product.max_residual", residual(product.max_residual));
        let predicted = pair && sym.is_symmetric();
        if predicted != product.holds {
            let mut e = ConfigError::new(ErrorKind::Internal, 0, "pair condition and sampled equation disagree");
            e.witness.push(("witness.u".into(), render_vector(&real.at.0)));
            e.witness.push(("witness.v".into(), render_vector(&real.at.1)));
            return Err(e);
        }
        if !pair {
            r.verdict = Verdict::Fail;
            r.push("witness.u", render_vector(&real.at.0));
            r.push("witness.v", render_vector(&real.at.1));
        }
        if let SymmetryCheck::Violated { a, b } = &sym {
            r.verdict = Verdict::Fail;
            self.violation(&mut r, &d1, &d2, a, b)?;
        }
        if r.verdict == Verdict::Pass {
            match extract_decomposition(&d1, &d2, self.delta(), &self.bounds) {
                Ok(d) => {
                    let full = FullDecomposition {
                        gaussians: [g1.clone(), g2.clone()],
                        discrete: d,
                    };
                    if let Err(defect) = verify_full_decomposition(mu1, mu2, block, &full) {
                        r.verdict = Verdict::Fail;
                        r.push("witness.defect", defect.to_string());
                    } else {
                        self.push_decomposition(&mut r, "decomposition.", &full.discrete);
                    }
                }
                Err(ExtractError::Bound(e)) => return Err(wrap(e)),
                Err(e) => {
                    r.verdict = Verdict::Fail;
                    r.push("witness.mu1", d1.to_string());
                    r.push("witness.reason", e.to_string());
                }
            }
        }
        Ok(r)
    }
}

/// A canonical generating set: greedily add the first element (in canonical
/// order) that is not yet generated.
fn canonical_generators(s: &Subgroup) -> Vec<GroupElement> {
    let g = s.parent();
    let mut gens: Vec<GroupElement> = Vec::new();
    let mut span = Subgroup::trivial(g);
    for x in s.iter() {
        if !span.contains(&x) {
            gens.push(x);
            span = Subgroup::generated(g, &gens).expect("elements of the parent");
        }
    }
    gens
}

/// `gen (a,b) (c,d)`, or `gen` for the trivial subgroup.
pub fn render_subgroup(s: &Subgroup) -> String {
    let mut out = String::from("gen");
    for x in canonical_generators(s) {
        out.push(' ');
        out.push_str(&x.to_string());
    }
    out
}

/// Settings supplied on the command line; they override the file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub tol: Option<Rational>,
    pub bound: Option<usize>,
}

/// Parses, validates and runs a job; every failure becomes an ERROR report.
pub fn run_text(text: &str, overrides: &Overrides) -> Report {
    let (mut config, lines) = match parse_syntax(text) {
        Ok(x) => x,
        Err(e) => {
            let cmd = crate::config::lex(text)
                .ok()
                .and_then(|ls| ls.into_iter().find(|l| l.key == "cmd").map(|l| l.value))
                .unwrap_or_else(|| "unknown".to_string());
            return Report::from_error(&cmd, &e);
        }
    };
    if let Some(t) = &overrides.tol {
        config.tol = Some(t.clone());
    }
    if let Some(b) = overrides.bound {
        config.bound = Some(b);
    }
    match Job::build(&config, &lines) {
        Ok(job) => job.run(),
        Err(e) => Report::from_error(config.command.name(), &e),
    }
}

/// Runs an already parsed config.
pub fn run(config: &JobConfig) -> Report {
    match Job::build(config, &KeyLines::new()) {
        Ok(job) => job.run(),
        Err(e) => Report::from_error(config.command.name(), &e),
    }
}
