//! One function per subcommand; each returns its report after writing artifacts.

use crate::config::RunConfig;
use crate::report::{fnv1a, sci, Report};
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;
use su2seq::angular_ops::catalog_listing;
use su2seq::basis::{enumerate_states, BasisIndex, Sector, Truncation};
use su2seq::checks;
use su2seq::hamiltonian::{assemble, degree_of_coupling, spectrum, summand_matrices, AssembledHamiltonian};
use su2seq::oracle::Oracle;
use su2seq::resources::{
    count_terms, electric_term_count, magnetic_term_count, measure_alpha_tilde, qsp_gate_envelope, trotter_steps,
    CostQuery,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Build,
    CheckFrames,
    CheckOracle,
    CheckCounts,
    ExportBasis,
    ExportMatrix,
    ExportCatalog,
    Spectrum,
    Resources,
}

pub struct Options {
    pub out: PathBuf,
    pub debug_provenance: bool,
}

/// Metadata sidecar of an exported matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub matrix: MatrixInfo,
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixInfo {
    pub file: String,
    pub dim: usize,
    pub nnz: usize,
    pub angular_dim: usize,
    pub n_links: usize,
    pub n_omega: usize,
    pub layout: String,
    pub radial_boundary: String,
    /// FNV-1a of the basis listing, hex.
    pub basis_hash: String,
    /// Asymmetry before symmetrization.
    pub asymmetry_absolute: f64,
    pub asymmetry_relative: f64,
}

const LAYOUT: &str = "global = angular * n_omega^n_links + radial; radial = sum_r j_r n_omega^(r-1) over rod roles r, rod 1 fastest";

pub fn run(cmd: Command, cfg: &RunConfig, opts: &Options) -> Result<Report> {
    let report = match cmd {
        Command::Build => build(cfg, opts)?,
        Command::ExportMatrix => export_matrix(cfg, opts)?.0,
        Command::ExportBasis => export_basis(cfg, opts)?,
        Command::ExportCatalog => export_catalog(cfg, opts)?,
        Command::CheckFrames => check_frames(cfg)?,
        Command::CheckOracle => check_oracle(cfg)?,
        Command::CheckCounts => check_counts(cfg)?,
        Command::Spectrum => spectrum_table(cfg, opts)?,
        Command::Resources => resources(cfg)?,
    };
    report.write(&opts.out)?;
    Ok(report)
}

fn assemble_config(cfg: &RunConfig, opts: &Options) -> Result<AssembledHamiltonian> {
    let tree = cfg.tree()?;
    let params = su2seq::hamiltonian::HamiltonianParams { provenance: opts.debug_provenance, ..cfg.params() };
    Ok(assemble(&tree, &params)?)
}

pub fn basis_listing(b: &BasisIndex) -> String {
    let mut s = String::new();
    for (i, st) in b.states().iter().enumerate() {
        s.push_str(&format!("{i}\t{st}\n"));
    }
    s
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    std::fs::write(dir.join(name), bytes).with_context(|| format!("cannot write {name}"))
}

fn export_matrix(cfg: &RunConfig, opts: &Options) -> Result<(Report, AssembledHamiltonian)> {
    let h = assemble_config(cfg, opts)?;
    let mut mtx = Vec::new();
    h.matrix.write_matrix_market(&mut mtx)?;
    write(&opts.out, "hamiltonian.mtx", &mtx)?;
    let meta = MatrixMeta {
        matrix: MatrixInfo {
            file: "hamiltonian.mtx".into(),
            dim: h.dim(),
            nnz: h.matrix.nnz(),
            angular_dim: h.basis.dim(),
            n_links: h.n_links,
            n_omega: h.grid.n(),
            layout: LAYOUT.into(),
            radial_boundary: "dirichlet at omega = 0 and 2 pi".into(),
            basis_hash: format!("{:016x}", fnv1a(basis_listing(&h.basis).as_bytes())),
            asymmetry_absolute: h.asymmetry.absolute,
            asymmetry_relative: h.asymmetry.relative,
        },
        config: cfg.clone(),
    };
    write(&opts.out, "hamiltonian.meta.toml", toml::to_string(&meta)?.as_bytes())?;
    if let Some(prov) = &h.provenance {
        let mut s = String::new();
        for ((r, c), terms) in prov {
            s.push_str(&format!("{} {}: {}\n", r + 1, c + 1, terms.join("; ")));
        }
        write(&opts.out, "provenance.txt", s.as_bytes())?;
    }
    let mut r = Report::new("export-matrix");
    r.line(format!("dimension {} ({} angular states x {}^{} radial)", h.dim(), h.basis.dim(), h.grid.n(), h.n_links));
    r.line(format!("nonzeros {}", h.matrix.nnz()));
    r.line(format!("basis hash {}", meta.matrix.basis_hash));
    r.line(format!(
        "asymmetry before symmetrization: absolute {} relative {}",
        sci(h.asymmetry.absolute),
        sci(h.asymmetry.relative)
    ));
    r.data = serde_json::to_value(&meta.matrix)?;
    Ok((r, h))
}

fn build(cfg: &RunConfig, opts: &Options) -> Result<Report> {
    let (mut r, h) = export_matrix(cfg, opts)?;
    r.name = "build".into();
    let tree = cfg.tree()?;
    let doc = degree_of_coupling(&h);
    r.line(format!(
        "coupling: at most {} rods per nonzero, {} rods acted on by one term, {} radial coordinates moved",
        doc.max_rods, h.rods_acted_on, doc.max_radial
    ));
    r.line("maximal tree (link: from -> to, * = tree):");
    r.lines.extend(tree.edge_list_text().lines().map(|l| format!("  {l}")));
    if let serde_json::Value::Object(m) = &mut r.data {
        m.insert("coupling".into(), serde_json::to_value(doc)?);
        m.insert("rods_acted_on".into(), json!(h.rods_acted_on));
        m.insert("tree".into(), json!(tree.edge_list_text()));
    }
    Ok(r)
}

fn export_basis(cfg: &RunConfig, opts: &Options) -> Result<Report> {
    let n_links = cfg.tree()?.n_physical();
    let p = cfg.params();
    let b = su2seq::hamiltonian::sector_basis(n_links, &p.truncation)?;
    let listing = basis_listing(&b);
    write(&opts.out, "basis.txt", listing.as_bytes())?;
    let mut r = Report::new("export-basis");
    let hash = format!("{:016x}", fnv1a(listing.as_bytes()));
    r.line(format!("{} angular states over {n_links} rods, hash {hash}", b.dim()));
    r.data = json!({ "dim": b.dim(), "n_rods": n_links, "basis_hash": hash, "file": "basis.txt" });
    Ok(r)
}

fn export_catalog(cfg: &RunConfig, opts: &Options) -> Result<Report> {
    let n_rods = cfg.tree()?.n_physical().max(2);
    let entries = catalog_listing(n_rods)?;
    let mut s = String::from("# operator\tkind\tquantum-number classes\tdelta sigma\trods\n");
    for e in &entries {
        let kind = if e.multiplicative { "multiplicative" } else { "differential" };
        s.push_str(&format!("{}\t{kind}\t{}\t{:?}\t{:?}\n", e.op, e.n_classes, e.dsigma, e.rods));
    }
    write(&opts.out, "catalog.txt", s.as_bytes())?;
    let mut r = Report::new("export-catalog");
    r.line(format!("{} operators for {n_rods} rods", entries.len()));
    r.data = serde_json::to_value(&entries)?;
    Ok(r)
}

fn check_frames(cfg: &RunConfig) -> Result<Report> {
    let c = &cfg.checks;
    let start = Instant::now();
    let mut r = Report::new("check-frames");
    let closed = checks::frame_identity_deviation(c.frame_trials, c.seed)?;
    r.require(
        &format!("closed forms over {} configurations", c.frame_trials),
        closed,
        cfg.tolerances.frames,
        &format!("seed {}", c.seed),
    );
    let (chain, at) = checks::chain_rule_deviation(c.chain_configs, c.seed.wrapping_add(1))?;
    r.require(&format!("chain rules over {} configurations", c.chain_configs), chain, cfg.tolerances.chain_rule, &at);
    let secs = start.elapsed().as_secs_f64();
    r.line(format!("runtime {secs:.2} s"));
    r.data = json!({ "closed_forms": closed, "chain_rules": chain, "worst_chain_rule": at, "runtime_s": secs });
    Ok(r)
}

fn check_oracle(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let oracle = Oracle::new(cfg.quadrature());
    let mut r = Report::new("check-oracle");
    let mut rows = Vec::new();
    let t = Truncation {
        l_max: cfg.truncation.l_max,
        n_max: cfg.truncation.n_max,
        sector: Sector::Sweep { l_max: cfg.truncation.l_max },
    };
    for &n_rods in &cfg.checks.oracle_rods {
        let states = enumerate_states(n_rods, &t)?;
        let devs = checks::catalog_deviations(&oracle, states.states(), n_rods, cfg.checks.seed)?;
        for d in &devs {
            let tol = if d.op.is_multiplicative() { cfg.tolerances.multiplicative } else { cfg.tolerances.differential };
            r.require(&format!("{n_rods} rods {} ({} elements)", d.op, d.pairs), d.max, tol, &d.at);
            rows.push(json!({ "n_rods": n_rods, "op": d.op.to_string(), "max": d.max, "pairs": d.pairs, "tolerance": tol }));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(format!("runtime {secs:.2} s"));
    r.data = json!({ "operators": rows, "runtime_s": secs });
    Ok(r)
}

fn check_counts(cfg: &RunConfig) -> Result<Report> {
    let tree = cfg.tree()?;
    let n = cfg.checks.count_links.unwrap_or(tree.n_physical());
    let counts = count_terms(n, None)?;
    let mut r = Report::new("check-counts");
    r.line(format!("{n} rods"));
    for c in &counts.classes {
        let ok = c.enumerated == c.closed_form;
        r.line(format!(
            "{}: enumerated {} closed form {} {}",
            c.class,
            c.enumerated,
            c.closed_form,
            if ok { "ok" } else { "FAILED" }
        ));
        if !ok {
            r.pass = false;
            r.failure.get_or_insert(format!("{}: enumerated {} != closed form {}", c.class, c.enumerated, c.closed_form));
        }
    }
    r.line(format!("electric terms with every rod pair present: {}", counts.n_e));
    r.line(format!("predicted rods per term at most {}", counts.doc));
    let roles = cfg.params().roles(tree.n_physical())?;
    let (ne, nb) = (electric_term_count(&tree, &roles)?, magnetic_term_count(&tree));
    r.line(format!("this lattice: {ne} electric terms, {nb} magnetic words"));
    r.data = json!({ "counts": counts, "lattice_electric": ne, "lattice_magnetic": nb });
    Ok(r)
}

fn spectrum_table(cfg: &RunConfig, opts: &Options) -> Result<Report> {
    let h = assemble_config(cfg, opts)?;
    let ev = spectrum(&h, cfg.spectrum.k)?;
    let mut s = String::from("# k\teigenvalue\n");
    for (k, e) in ev.iter().enumerate() {
        s.push_str(&format!("{k}\t{}\n", sci(*e)));
    }
    write(&opts.out, "spectrum.tsv", s.as_bytes())?;
    let mut r = Report::new("spectrum");
    r.line(format!("lowest {} of {} levels", ev.len(), h.dim()));
    r.lines.extend(ev.iter().enumerate().map(|(k, e)| format!("  {k}: {}", sci(*e))));
    r.data = json!({ "dim": h.dim(), "eigenvalues": ev });
    Ok(r)
}

fn resources(cfg: &RunConfig) -> Result<Report> {
    let tree = cfg.tree()?;
    let n = tree.n_physical();
    let rs = &cfg.resources;
    let mut r = Report::new("resources");
    let alpha = if rs.measure_alpha {
        Some(measure_alpha_tilde(&summand_matrices(&tree, &cfg.params())?, rs.p)?)
    } else {
        None
    };
    let alpha_value = alpha.map_or(0.0, |a| a.measured.unwrap_or(a.bound));
    let q = CostQuery { n_links: n, p: rs.p, t: rs.t, epsilon: rs.epsilon, alpha_tilde: alpha_value };
    let steps = trotter_steps(&q)?;
    let gates = qsp_gate_envelope(&q)?;
    let roles = cfg.params().roles(n)?;
    let (ne, nb) = (electric_term_count(&tree, &roles)?, magnetic_term_count(&tree));
    r.line(format!("{n} physical links, {ne} electric terms, {nb} magnetic words"));
    r.line("all asymptotic costs are envelopes with unit constants");
    match alpha {
        Some(a) => r.line(format!(
            "commutator sum: measured {}, triangle bound {}",
            a.measured.map_or("not computed".into(), sci),
            sci(a.bound)
        )),
        None => r.line("commutator sum: not requested, taken as 0"),
    }
    r.line(format!("product formula order {} at t = {}, epsilon = {}: Trotter steps envelope {steps}", rs.p, rs.t, rs.epsilon));
    r.line(format!("signal processing gate envelope {}", sci(gates)));
    r.data = json!({
        "n_links": n,
        "electric_terms": ne,
        "magnetic_words": nb,
        "alpha_tilde": alpha,
        "query": q,
        "trotter_steps_envelope": steps,
        "qsp_gates_envelope": gates,
    });
    Ok(r)
}
