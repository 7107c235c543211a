//! The pipelines behind each subcommand.

use embezzle_core::certify::{certify_levels, hotel_morphisms};
use embezzle_core::probes::{basis_battery, random_product_battery};
use embezzle_core::protocols::{
    build_hotel_catalyst, check_noinput_relation, check_standard_relation, hotel_noinput_bundle,
    hotel_standard_bundle, hotel_step, noinput_to_standard, round_trip_deviation, standard_to_noinput,
    vdh_embezzle_fidelity, ProtocolBundle,
};
use embezzle_core::universal::{
    build_composite_catalyst, check_simultaneous_containment, deviation_csv, DEFAULT_AMPLITUDE_BUDGET,
};
use embezzle_core::{
    schmidt_spectrum, tensor_states, verify_isometry, Error, Party, Role, SiteId, StructuredIsometry,
};
use serde_json::json;

use crate::config::{Direction, RunConfig};
use crate::report::{Checks, Report};
use crate::CliError;

pub const ROUND_TRIP_PROBES: usize = 10;
pub const ISOMETRY_PROBES: usize = 20;

pub struct Output {
    pub report: Report,
    pub csv: Option<String>,
}

fn output(checks: Checks, cfg: &RunConfig, data: serde_json::Value) -> Output {
    Output { report: checks.into_report(cfg, data), csv: None }
}

pub fn demo_hotel(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = cfg.target_state()?;
    let f = build_hotel_catalyst(&g, cfg.copies)?;
    let (out, (oa, ob)) = hotel_step(&f, &g)?;
    let expected = tensor_states(&f, &g.pair_state(oa, ob)?)?;
    let fidelity = expected.inner_product(&out)?.norm_sqr();
    let (_, residual) = out.split_product(&[oa.key(), ob.key()])?;
    let before = schmidt_spectrum(&f);
    let after = schmidt_spectrum(&residual);
    let mut checks = Checks::new(cfg.tolerance);
    checks.push("output fidelity", (1.0 - fidelity).abs());
    checks.push("catalyst spectrum", after.max_deviation(&before));
    let data = json!({
        "fidelity": fidelity,
        "outputs": [oa, ob],
        "spectrum_before": before.coefficients,
        "spectrum_after": after.coefficients,
        "explicit_copies": cfg.copies,
    });
    Ok(output(checks, cfg, data))
}

pub fn convert(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = cfg.target_state()?;
    let mut checks = Checks::new(cfg.tolerance);
    let mut data = serde_json::Map::new();
    if matches!(cfg.direction, Direction::ToNoinput | Direction::Both) {
        let q = standard_to_noinput(&hotel_standard_bundle(&g, cfg.copies)?)?;
        let r = check_noinput_relation(&q, cfg.seed)?;
        checks.push("no-input relation", r.embezzle_dev);
        checks.push("no-input commutation", r.commute_dev);
        data.insert("to_noinput".into(), json!(r));
    }
    if matches!(cfg.direction, Direction::ToStandard | Direction::Both) {
        let back = noinput_to_standard(&hotel_noinput_bundle(&g, cfg.copies)?, cfg.seed)?;
        let r = check_standard_relation(&back, cfg.seed)?;
        checks.push("standard relation", r.embezzle_dev);
        checks.push("standard commutation", r.commute_dev);
        data.insert("to_standard".into(), json!(r));
    }
    if cfg.direction == Direction::Both {
        let dev = round_trip_deviation(&hotel_standard_bundle(&g, cfg.copies)?, ROUND_TRIP_PROBES, cfg.seed)?;
        checks.push("round trip", dev);
        data.insert("round_trip".into(), json!(dev));
    }
    Ok(output(checks, cfg, data.into()))
}

pub fn certify(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = cfg.target_state()?;
    let f = build_hotel_catalyst(&g, cfg.copies)?;
    let (pa, pb) = hotel_morphisms(0, g.local_dim())?;
    let rep = certify_levels(format!("hotel {g}"), &f, &pa, &pb, &g, cfg.depth, cfg.tolerance)?;
    let mut checks = Checks::new(cfg.tolerance);
    for (k, (c, e)) in rep.commutator_by_level.iter().zip(&rep.expectation_dev_by_level).enumerate() {
        checks.push(format!("level {} commutator", k + 1), *c);
        checks.push(format!("level {} expectation", k + 1), *e);
    }
    Ok(output(checks, cfg, json!(rep)))
}

pub fn vdh_sweep(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = cfg.target_state()?;
    let ms = cfg.m_values()?;
    if ms[0] < g.local_dim() {
        return Err(CliError::Usage(format!("m must be at least the target dimension {}", g.local_dim())));
    }
    let n = g.local_dim() as f64;
    let points = ms
        .iter()
        .map(|&m| Ok((m, vdh_embezzle_fidelity(m, &g)?, 1.0 - n.log2() / (m as f64).log2())))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut checks = Checks::new(cfg.tolerance);
    checks.flag("strictly increasing", points.windows(2).all(|w| w[1].1 > w[0].1));
    checks.push("lower bound", points.iter().map(|p| (p.2 - p.1).max(0.0)).fold(0.0, f64::max));
    checks.flag("below one", points.iter().all(|p| p.1 < 1.0));
    let mut csv = String::from("m,fidelity,bound\n");
    for (m, fid, bound) in &points {
        csv.push_str(&format!("{m},{fid:.17e},{bound:.17e}\n"));
    }
    let data = json!({
        "points": points
            .iter()
            .map(|(m, fid, bound)| json!({"m": m, "fidelity": fid, "bound": bound}))
            .collect::<Vec<_>>(),
    });
    Ok(Output { report: checks.into_report(cfg, data), csv: Some(csv) })
}

pub fn universal(cfg: &RunConfig) -> Result<Output, CliError> {
    let fam = cfg.family_members()?;
    let c = build_composite_catalyst(&fam, cfg.copies, DEFAULT_AMPLITUDE_BUDGET).map_err(|e| match e {
        Error::SizeBudgetExceeded { .. } => CliError::Usage(e.to_string()),
        e => CliError::Core(e),
    })?;
    if cfg.depth > cfg.copies {
        return Err(CliError::Usage(format!("depth {} exceeds copies {}", cfg.depth, cfg.copies)));
    }
    let reports = check_simultaneous_containment(&c, cfg.depth, cfg.tolerance)?;
    let mut checks = Checks::new(cfg.tolerance);
    for r in &reports {
        checks.push(format!("{} commutator", r.label), r.max_commutator);
        checks.push(format!("{} expectation", r.label), r.max_expectation_dev);
    }
    let data = json!({
        "members": fam.targets(),
        "amplitudes": c.state.nnz(),
        "reports": reports,
    });
    Ok(Output { report: checks.into_report(cfg, data), csv: Some(deviation_csv(&reports)) })
}

fn bundle_probes(p: &ProtocolBundle, seed: u64) -> Result<Vec<embezzle_core::LazyProductState>, Error> {
    let probes = random_product_battery(&p.probe_sites()?, ISOMETRY_PROBES, seed)?;
    match p.catalyst.reservoir() {
        Some(res) => probes.into_iter().map(|x| x.with_reservoir(res.clone())).collect(),
        None => Ok(probes),
    }
}

pub fn verify_isometries(cfg: &RunConfig) -> Result<Output, CliError> {
    let g = cfg.target_state()?;
    let n = g.local_dim();
    let pool = Role::Ancilla(0);
    let regs = [SiteId::output(Party::A, 0, n), SiteId::output(Party::A, 1, n)];
    let pool_sites: Vec<SiteId> = (0..3).map(|i| SiteId::ancilla(Party::A, 0, i, n)).collect();
    let pull = StructuredIsometry::pull_out(Party::A, pool, regs[0].key())?;
    let push = StructuredIsometry::push_in(Party::A, regs[0].key(), pool)?;
    let swap = StructuredIsometry::swap(regs[0], regs[1], false)?;
    let mut checks = Checks::new(cfg.tolerance);
    let seed = cfg.seed;
    checks.push("pull-out", verify_isometry(&pull, &random_product_battery(&pool_sites, ISOMETRY_PROBES, seed)?)?);
    let push_sites = [regs[0], pool_sites[0], pool_sites[1]];
    checks.push("push-in", verify_isometry(&push, &random_product_battery(&push_sites, ISOMETRY_PROBES, seed)?)?);
    checks.push("swap", verify_isometry(&swap, &random_product_battery(&regs, ISOMETRY_PROBES, seed)?)?);

    let noin = standard_to_noinput(&hotel_standard_bundle(&g, cfg.copies)?)?;
    let std = noinput_to_standard(&hotel_noinput_bundle(&g, cfg.copies)?, seed)?;
    for (name, p) in [("standard to no-input", &noin), ("no-input to standard", &std)] {
        let probes = bundle_probes(p, seed)?;
        checks.push(format!("{name}, alice"), verify_isometry(&p.alice, &probes)?);
        checks.push(format!("{name}, bob"), verify_isometry(&p.bob, &probes)?);
    }

    let round = StructuredIsometry::compose(&push, &pull)?;
    let mut worst: f64 = 0.0;
    let basis = basis_battery(&pool_sites)?;
    for b in &basis {
        worst = worst.max(round.apply(b)?.distance(b)?);
    }
    checks.push("push-in after pull-out on basis", worst);
    let data = json!({ "probes": ISOMETRY_PROBES, "basis_size": basis.len() });
    Ok(output(checks, cfg, data))
}
