//! Sweep orchestration: maps each command onto the core modules, one row per
//! grid point, in grid order.
//!
//! A failed grid point becomes a failed row (inputs kept, outputs `Null`,
//! error text in `note`) rather than aborting the sweep.  All randomness is
//! seeded from the config, so reruns are byte-identical.

use std::path::Path;

use selftest_core::bell::{
    certificate_annihilation, classical_bound, gram_sos_solve, ideal_realization,
    paper_sos_certificate, printed_certificate_residual, quantum_bound, schmidt_angle_for_alpha,
    seesaw_max_violation,
};
use selftest_core::extraction::{extraction_report, perturb_realization, PerturbMode};
use selftest_core::highdim::{
    correlation_table, highdim_ideal_realization, highdim_report, verify_block_structure,
    AngleLists, CorrelationTable,
};
use selftest_core::ncpoly::{gap_poly, poly_residual, sos_expand};
use selftest_core::qalg::inflate_with_junk;

use crate::config::{Command, SweepConfig};
use crate::errata::compute_errata;
use crate::output::{Cell, ResultSet, SeriesPoint};
use crate::CliError;

/// See-saw must land this close to the closed-form quantum bound.
const SEESAW_TOL: f64 = 1e-6;
/// Symbolic residual allowed for a solved certificate.
const GRAM_RESIDUAL_TOL: f64 = 1e-8;
/// Worst `‖P_λψ‖` allowed on the ideal maximizer.
const ANNIHILATION_TOL: f64 = 1e-6;
/// Exactness threshold for ideal-input extraction quantities.
const EXACTNESS_TOL: f64 = 1e-8;
/// Operator-identity threshold for the high-dimensional pipeline.
const HIGHDIM_IDENTITY_TOL: f64 = 1e-10;
/// Table-pattern threshold for freshly generated ideal tables.
const PATTERN_TOL: f64 = 1e-12;
/// Pattern threshold when validating an imported table.
const IMPORT_PATTERN_TOL: f64 = 1e-8;
/// Junk dimensions per party used by the `selftest` invariance check.
const SELFTEST_JUNK: (usize, usize) = (2, 2);

/// Runs one command over its grids and assembles the result set.
pub fn run_command(cfg: &SweepConfig) -> Result<ResultSet, CliError> {
    match cfg.command {
        Command::Bound => run_bound(cfg),
        Command::SosVerify => run_sos_verify(cfg),
        Command::Selftest => run_selftest(cfg),
        Command::RobustnessSweep => run_robustness(cfg),
        Command::Highdim => run_highdim(cfg),
        Command::Tables => run_tables(cfg),
    }
}

fn run_bound(cfg: &SweepConfig) -> Result<ResultSet, CliError> {
    let mut rs = ResultSet::new(
        "bound",
        &["alpha", "quantum_bound", "classical_bound", "seesaw_value", "seesaw_gap", "pass", "note"],
    );
    let restarts = cfg.seeds.len();
    let seed = cfg.seeds[0];
    for &alpha in &cfg.alpha_grid {
        let row = (|| -> Result<(Vec<Cell>, bool), selftest_core::Error> {
            let quantum = quantum_bound(alpha)?;
            let classical = classical_bound(alpha)?;
            let (value, _) = seesaw_max_violation(alpha, (2, 2), restarts, seed)?;
            let gap = quantum - value;
            let pass = gap.abs() <= SEESAW_TOL && classical == 2.0 + alpha && classical < quantum;
            Ok((
                vec![
                    alpha.into(),
                    quantum.into(),
                    classical.into(),
                    value.into(),
                    gap.into(),
                    pass.into(),
                    "".into(),
                ],
                pass,
            ))
        })();
        push_or_fail(&mut rs, row, vec![alpha.into()], 4);
    }
    Ok(rs)
}

fn run_sos_verify(cfg: &SweepConfig) -> Result<ResultSet, CliError> {
    let mut rs = ResultSet::new(
        "sos-verify",
        &["alpha", "gram_residual", "annihilation", "printed_residual", "printed_note", "pass", "note"],
    );
    for &alpha in &cfg.alpha_grid {
        let row = (|| -> Result<(Vec<Cell>, bool), selftest_core::Error> {
            let cert = gram_sos_solve(alpha)?;
            let residual = poly_residual(&sos_expand(&cert), &gap_poly(alpha)?);
            let ideal = ideal_realization(alpha)?;
            let annihilation = certificate_annihilation(&cert, &ideal)?;
            // The printed closed form is recorded, not asserted: its failures
            // are errata, carried by `printed_note`.
            let (printed_residual, printed_note) = match paper_sos_certificate(alpha)
                .and_then(|_| printed_certificate_residual(schmidt_angle_for_alpha(alpha)?.theta))
            {
                Ok(r) => (Cell::Float(r), String::new()),
                Err(e) => (Cell::Null, e.to_string()),
            };
            let pass = residual <= GRAM_RESIDUAL_TOL && annihilation <= ANNIHILATION_TOL;
            Ok((
                vec![
                    alpha.into(),
                    residual.into(),
                    annihilation.into(),
                    printed_residual,
                    printed_note.into(),
                    pass.into(),
                    "".into(),
                ],
                pass,
            ))
        })();
        push_or_fail(&mut rs, row, vec![alpha.into()], 4);
    }
    rs.errata = compute_errata()?;
    Ok(rs)
}

fn run_selftest(cfg: &SweepConfig) -> Result<ResultSet, CliError> {
    let mut rs = ResultSet::new(
        "selftest",
        &[
            "alpha",
            "distance",
            "fidelity",
            "schmidt_error",
            "junk_prenorm",
            "inflated_distance",
            "inflation_drift",
            "pass",
            "note",
        ],
    );
    let seed = cfg.seeds[0];
    for &alpha in &cfg.alpha_grid {
        let row = (|| -> Result<(Vec<Cell>, bool), selftest_core::Error> {
            let ideal = ideal_realization(alpha)?;
            let report = extraction_report(&ideal, alpha)?;
            let theta = schmidt_angle_for_alpha(alpha)?.theta;
            let schmidt_error = (report.ancilla_schmidt[0] - theta.cos())
                .abs()
                .max((report.ancilla_schmidt[1] - theta.sin()).abs());
            let inflated = inflate_with_junk(&ideal, SELFTEST_JUNK, seed)?;
            let inflated_report = extraction_report(&inflated, alpha)?;
            let drift = (inflated_report.distance - report.distance).abs();
            let pass = report.distance < EXACTNESS_TOL
                && schmidt_error < EXACTNESS_TOL
                && drift < EXACTNESS_TOL;
            Ok((
                vec![
                    alpha.into(),
                    report.distance.into(),
                    report.fidelity.into(),
                    schmidt_error.into(),
                    report.junk_prenorm.into(),
                    inflated_report.distance.into(),
                    drift.into(),
                    pass.into(),
                    "".into(),
                ],
                pass,
            ))
        })();
        push_or_fail(&mut rs, row, vec![alpha.into()], 6);
    }
    Ok(rs)
}

/// Stable row order for perturbation modes.
const MODES: [PerturbMode; 3] = [PerturbMode::RotateB1, PerturbMode::RotateA1, PerturbMode::MixState];

fn mode_name(mode: PerturbMode) -> &'static str {
    match mode {
        PerturbMode::RotateB1 => "rotate_b1",
        PerturbMode::RotateA1 => "rotate_a1",
        PerturbMode::MixState => "mix_state",
    }
}

fn run_robustness(cfg: &SweepConfig) -> Result<ResultSet, CliError> {
    let mut rs = ResultSet::new(
        "robustness-sweep",
        &["alpha", "delta", "epsilon", "distance", "analytic_bound", "pass", "mode", "seed", "note"],
    );
    let mut series = Vec::new();
    for &alpha in &cfg.alpha_grid {
        for mode in MODES {
            for &delta in &cfg.epsilon_or_delta_grid {
                for &seed in &cfg.seeds {
                    let row = (|| -> Result<(Vec<Cell>, bool), selftest_core::Error> {
                        let ideal = ideal_realization(alpha)?;
                        let perturbed = perturb_realization(&ideal, mode, delta, seed)?;
                        let report = extraction_report(&perturbed, alpha)?;
                        let pass = report.bound_satisfied;
                        series.push(SeriesPoint {
                            x: delta,
                            y: report.distance,
                            bound: report.chain.distance_bound,
                        });
                        Ok((
                            vec![
                                alpha.into(),
                                delta.into(),
                                report.chain.epsilon.into(),
                                report.distance.into(),
                                report.chain.distance_bound.into(),
                                pass.into(),
                                mode_name(mode).into(),
                                (seed as i64).into(),
                                "".into(),
                            ],
                            pass,
                        ))
                    })();
                    match row {
                        Ok((cells, pass)) => rs.push_row(cells, pass),
                        Err(e) => {
                            let cells = vec![
                                alpha.into(),
                                delta.into(),
                                Cell::Null,
                                Cell::Null,
                                Cell::Null,
                                false.into(),
                                mode_name(mode).into(),
                                (seed as i64).into(),
                                e.to_string().into(),
                            ];
                            rs.push_row(cells, false);
                        }
                    }
                }
            }
        }
    }
    rs.series = Some(series);
    Ok(rs)
}

fn run_highdim(cfg: &SweepConfig) -> Result<ResultSet, CliError> {
    let mut rs = ResultSet::new(
        "highdim",
        &[
            "d",
            "diag_residual",
            "pattern_residual",
            "worst_identity",
            "ladder_transfer",
            "distance",
            "fidelity",
            "pass",
            "note",
        ],
    );
    for &d in &cfg.dims {
        let row = (|| -> Result<(Vec<Cell>, bool), selftest_core::Error> {
            let angles = AngleLists::defaults(d)?;
            let r = highdim_ideal_realization(d, &angles)?;
            let report = highdim_report(&r, &angles)?;
            let ids = report.identities;
            let worst_identity = ids
                .projector_transfer
                .max(ids.block_z_norm)
                .max(ids.block_x_norm)
                .max(ids.block_orthogonality)
                .max(ids.block_anticommutator)
                .max(ids.block_z_transfer);
            let s = &report.structure;
            let pass = report.distance < EXACTNESS_TOL
                && worst_identity < HIGHDIM_IDENTITY_TOL
                && report.ladder_transfer < HIGHDIM_IDENTITY_TOL
                && s.pattern_residual < PATTERN_TOL
                && s.diag_residual < PATTERN_TOL
                && s.same_handed_pair
                && s.same_handed_shift;
            Ok((
                vec![
                    d.into(),
                    s.diag_residual.into(),
                    s.pattern_residual.into(),
                    worst_identity.into(),
                    report.ladder_transfer.into(),
                    report.distance.into(),
                    report.fidelity.into(),
                    pass.into(),
                    "".into(),
                ],
                pass,
            ))
        })();
        push_or_fail(&mut rs, row, vec![d.into()], 6);
    }
    Ok(rs)
}

fn run_tables(cfg: &SweepConfig) -> Result<ResultSet, CliError> {
    match &cfg.input_path {
        Some(path) => validate_table_file(Path::new(path)),
        None => export_tables(cfg),
    }
}

fn export_tables(cfg: &SweepConfig) -> Result<ResultSet, CliError> {
    let mut rs = ResultSet::new("tables", &["d", "x", "y", "a", "b", "p"]);
    for &d in &cfg.dims {
        let angles = AngleLists::defaults(d)?;
        let r = highdim_ideal_realization(d, &angles)?;
        let table = correlation_table(&r)?;
        // A freshly generated table must survive its own verifier.
        let report = verify_block_structure(&table)?;
        let ok = report.pattern_residual < PATTERN_TOL && report.diag_residual < PATTERN_TOL;
        for (x, y, a, b, p) in table.rows() {
            rs.push_row(
                vec![d.into(), x.into(), y.into(), a.into(), b.into(), p.into()],
                ok,
            );
        }
    }
    Ok(rs)
}

/// Loads a correlation table from JSON tensor form (`{"d": …,
/// "probabilities": […]}`) or CSV with header `x,y,a,b,p` (a leading `d`
/// column, as written by the export, is accepted when constant).
fn load_table(path: &Path) -> Result<CorrelationTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        let table: CorrelationTable = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return Ok(table);
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        .clone();
    let offset = match headers.iter().collect::<Vec<_>>().as_slice() {
        ["x", "y", "a", "b", "p"] => 0,
        ["d", "x", "y", "a", "b", "p"] => 1,
        other => {
            return Err(CliError::Config(format!(
                "{}: unexpected table header {other:?}",
                path.display()
            )))
        }
    };
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> Result<&str, CliError> {
            record.get(offset + i).ok_or_else(|| {
                CliError::Config(format!("{}: short row {record:?}", path.display()))
            })
        };
        let parse_idx = |s: &str| -> Result<usize, CliError> {
            s.parse().map_err(|_| CliError::Config(format!("bad index {s:?}")))
        };
        let x = parse_idx(field(0)?)?;
        let y = parse_idx(field(1)?)?;
        let a = parse_idx(field(2)?)?;
        let b = parse_idx(field(3)?)?;
        let p: f64 = field(4)?
            .parse()
            .map_err(|_| CliError::Config(format!("bad probability {:?}", field(4).unwrap())))?;
        entries.push((x, y, a, b, p));
    }
    let d = entries.iter().map(|&(_, _, a, b, _)| a.max(b) + 1).max().unwrap_or(0);
    let expected = 9 * d * d;
    if d == 0 || entries.len() != expected {
        return Err(CliError::Config(format!(
            "{}: expected {expected} rows for d = {d}, found {}",
            path.display(),
            entries.len()
        )));
    }
    let mut probabilities = vec![f64::NAN; expected];
    for (x, y, a, b, p) in entries {
        if x >= 3 || y >= 3 || a >= d || b >= d {
            return Err(CliError::Config(format!(
                "table index (x={x}, y={y}, a={a}, b={b}) out of range for d = {d}"
            )));
        }
        probabilities[((x * 3 + y) * d + a) * d + b] = p;
    }
    if probabilities.iter().any(|p| p.is_nan()) {
        return Err(CliError::Config("table has duplicate or missing entries".into()));
    }
    Ok(CorrelationTable { d, probabilities })
}

fn validate_table_file(path: &Path) -> Result<ResultSet, CliError> {
    let mut rs = ResultSet::new(
        "tables",
        &[
            "d",
            "diag_residual",
            "pair_support_residual",
            "shift_support_residual",
            "pattern_residual",
            "same_handed_pair",
            "same_handed_shift",
            "pass",
            "note",
        ],
    );
    let table = load_table(path)?;
    let row = (|| -> Result<(Vec<Cell>, bool), selftest_core::Error> {
        let report = verify_block_structure(&table)?;
        let pass = report.diag_residual < IMPORT_PATTERN_TOL
            && report.pair_support_residual < IMPORT_PATTERN_TOL
            && report.shift_support_residual < IMPORT_PATTERN_TOL
            && report.pattern_residual < IMPORT_PATTERN_TOL;
        Ok((
            vec![
                report.d.into(),
                report.diag_residual.into(),
                report.pair_support_residual.into(),
                report.shift_support_residual.into(),
                report.pattern_residual.into(),
                report.same_handed_pair.into(),
                report.same_handed_shift.into(),
                pass.into(),
                "".into(),
            ],
            pass,
        ))
    })();
    push_or_fail(&mut rs, row, vec![table.d.into()], 6);
    Ok(rs)
}

/// Appends either the computed row or a failure row carrying the inputs, a
/// `Null` for each of the `outputs` columns, `pass = false`, and the error.
fn push_or_fail(
    rs: &mut ResultSet,
    row: Result<(Vec<Cell>, bool), selftest_core::Error>,
    inputs: Vec<Cell>,
    outputs: usize,
) {
    match row {
        Ok((cells, pass)) => rs.push_row(cells, pass),
        Err(e) => {
            let mut cells = inputs;
            cells.extend(std::iter::repeat(Cell::Null).take(outputs));
            cells.push(false.into());
            cells.push(e.to_string().into());
            rs.push_row(cells, false);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepConfig;

    fn config(command: Command) -> SweepConfig {
        let mut cfg = SweepConfig::with_defaults(command);
        cfg.alpha_grid = vec![0.0, 1.0];
        cfg.epsilon_or_delta_grid = vec![1e-3];
        cfg.dims = vec![2, 4];
        cfg.seeds = vec![1, 2, 3, 4, 5];
        cfg
    }

    #[test]
    fn bound_rows_match_closed_forms() {
        let rs = run_command(&config(Command::Bound)).unwrap();
        assert!(rs.all_pass, "rows: {:?}", rs.rows);
        assert_eq!(rs.rows.len(), 2);
        // α = 0 → 2√2; α = 1 → √10; classical 2 and 3.
        assert_eq!(rs.rows[0][1], Cell::Float(8.0f64.sqrt()));
        assert_eq!(rs.rows[0][2], Cell::Float(2.0));
        assert_eq!(rs.rows[1][1], Cell::Float(10.0f64.sqrt()));
        assert_eq!(rs.rows[1][2], Cell::Float(3.0));
    }

    #[test]
    fn sos_rows_verify_and_carry_errata() {
        let rs = run_command(&config(Command::SosVerify)).unwrap();
        assert!(rs.all_pass, "rows: {:?}", rs.rows);
        assert_eq!(rs.errata.len(), 3);
        // The printed certificate is unusable at α = 0 (θ = π/4); the row
        // still passes on the solved certificate.
        let printed_note = &rs.rows[0][4];
        assert!(matches!(printed_note, Cell::Text(t) if !t.is_empty()));
    }

    #[test]
    fn selftest_rows_are_exact() {
        let rs = run_command(&config(Command::Selftest)).unwrap();
        assert!(rs.all_pass, "rows: {:?}", rs.rows);
        for row in &rs.rows {
            let Cell::Float(distance) = row[1] else { panic!("missing distance") };
            assert!(distance < 1e-10);
        }
    }

    #[test]
    fn robustness_rows_stay_below_bound() {
        let mut cfg = config(Command::RobustnessSweep);
        cfg.alpha_grid = vec![0.5];
        cfg.seeds = vec![1, 2];
        let rs = run_command(&cfg).unwrap();
        assert!(rs.all_pass, "rows: {:?}", rs.rows);
        // 1 α × 3 modes × 1 delta × 2 seeds.
        assert_eq!(rs.rows.len(), 6);
        let series = rs.series.as_ref().unwrap();
        assert_eq!(series.len(), 6);
        for p in series {
            assert!(p.y <= p.bound);
        }
    }

    #[test]
    fn highdim_rows_pass_defaults() {
        let rs = run_command(&config(Command::Highdim)).unwrap();
        assert!(rs.all_pass, "rows: {:?}", rs.rows);
        assert_eq!(rs.rows.len(), 2);
    }

    #[test]
    fn tables_round_trip_csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(Command::Tables);
        cfg.dims = vec![4];
        let rs = run_command(&cfg).unwrap();
        assert!(rs.all_pass);
        assert_eq!(rs.rows.len(), 9 * 16);

        // Write the export as CSV and validate it back in.
        let csv_path = dir.path().join("table.csv");
        std::fs::write(&csv_path, crate::output::render_csv(&rs).unwrap()).unwrap();
        let mut validate_cfg = cfg.clone();
        validate_cfg.input_path = Some(csv_path.display().to_string());
        let verdict = run_command(&validate_cfg).unwrap();
        assert!(verdict.all_pass, "rows: {:?}", verdict.rows);
        assert_eq!(verdict.rows[0][0], Cell::Int(4));

        // JSON tensor form round-trips through the same loader.
        let angles = AngleLists::defaults(4).unwrap();
        let table = correlation_table(&highdim_ideal_realization(4, &angles).unwrap()).unwrap();
        let json_path = dir.path().join("table.json");
        std::fs::write(&json_path, serde_json::to_string(&table).unwrap()).unwrap();
        let loaded = load_table(&json_path).unwrap();
        assert_eq!(loaded, table);
    }

    #[test]
    fn corrupted_table_fails_validation() {
        let dir = tempfile::tempdir().unwrap();
        let angles = AngleLists::defaults(4).unwrap();
        let mut table =
            correlation_table(&highdim_ideal_realization(4, &angles).unwrap()).unwrap();
        // Move mass within one setting pair so normalization still holds but
        // the block pattern breaks.
        table.probabilities[1] += 0.05;
        table.probabilities[0] -= 0.05;
        let json_path = dir.path().join("broken.json");
        std::fs::write(&json_path, serde_json::to_string(&table).unwrap()).unwrap();
        let mut cfg = config(Command::Tables);
        cfg.input_path = Some(json_path.display().to_string());
        let rs = run_command(&cfg).unwrap();
        assert!(!rs.all_pass);
    }

    #[test]
    fn failed_grid_point_becomes_failed_row() {
        // θ = π/4 at α = 0 makes the printed certificate fail, but that is
        // recorded, not fatal; to see a genuinely failed row, feed the
        // see-saw an impossible restart budget via a poisoned seed list is
        // not possible through validation, so exercise push_or_fail directly.
        let mut rs = ResultSet::new("bound", &["alpha", "out1", "out2", "pass", "note"]);
        push_or_fail(
            &mut rs,
            Err(selftest_core::Error::InvalidAlpha { alpha: 3.0 }),
            vec![3.0.into()],
            2,
        );
        assert!(!rs.all_pass);
        assert_eq!(rs.rows[0].len(), 5);
        assert_eq!(rs.rows[0][1], Cell::Null);
        assert!(matches!(&rs.rows[0][4], Cell::Text(t) if t.contains("alpha")));
    }
}
