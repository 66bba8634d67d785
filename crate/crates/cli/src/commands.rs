use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context as _, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use lensgrid::algebra::{build_complex, homology as compute_homology, Ring, Window};
use lensgrid::corpus::{exhaustive_upto, random_diagrams, scan_log, scan_torsion as run_scan};
use lensgrid::gradings::{fmt_rational, parse_rational, Grader};
use lensgrid::moves::{
    apply_script, build_combined, commutation_path, parse_script, solve_restrictable_signs,
    stabilization_split, stabilize, stabilize_with_data, verify_commutation, verify_grading_laws,
    verify_shift_invariance, verify_stabilization, Check, Move, StabKind,
};
use lensgrid::signs::{build_constraints, solve_sign_assignment, verify_axioms, SignAssignment};
use lensgrid::{Generator, GridDiagram};

use crate::{Flavor, RingArg, Suite};

pub struct Context {
    pub sign_cache: Option<PathBuf>,
}

/// JSON payload and overall verdict of one command.
pub struct Report {
    pub json: Value,
    pub passed: bool,
}

fn read_diagram(path: &Path) -> Result<GridDiagram> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    GridDiagram::parse(&text).with_context(|| format!("in {}", path.display()))
}

/// SHA-256 of the canonical diagram text.
fn digest(d: &GridDiagram) -> String {
    Sha256::digest(d.to_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn report(
    command: &str,
    d: Option<&GridDiagram>,
    started: Instant,
    result: Value,
    checks: &[Check],
) -> Report {
    let passed = checks.iter().all(|c| c.passed);
    let verdicts: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
        .collect();
    Report {
        json: json!({
            "schema": 1,
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "digest": d.map(digest),
            "seconds": started.elapsed().as_secs_f64(),
            "result": result,
            "verdicts": verdicts,
            "passed": passed,
        }),
        passed,
    }
}

fn check(name: &str, ok: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed: ok,
        detail: if ok { String::new() } else { detail.into() },
    }
}

/// Solved signs, read from and written to the cache when one is configured.
fn signs_for(ctx: &Context, d: &GridDiagram) -> Result<SignAssignment> {
    let path = ctx
        .sign_cache
        .as_ref()
        .map(|dir| dir.join(format!("{}.signs", digest(d))));
    if let Some(p) = path.as_ref().filter(|p| p.exists()) {
        let text = fs::read_to_string(p)?;
        if let Ok(s) = SignAssignment::import(d, &text) {
            return Ok(s);
        }
    }
    let s = solve_sign_assignment(d)?;
    if let Some(p) = path {
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&p, s.export()?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(s)
}

fn ring_of(r: RingArg) -> Ring {
    match r {
        RingArg::F2 => Ring::F2,
        RingArg::Z => Ring::Z,
    }
}

pub fn validate(file: &Path) -> Result<Report> {
    let started = Instant::now();
    let d = read_diagram(file)?;
    let checks = [check("valid diagram", true, "")];
    Ok(report(
        "validate",
        Some(&d),
        started,
        json!({ "canonical": d.to_text() }),
        &checks,
    ))
}

pub fn info(file: &Path) -> Result<Report> {
    let started = Instant::now();
    let d = read_diagram(file)?;
    let components = d.link_components();
    let result = json!({
        "p": d.p(),
        "q": d.q(),
        "n": d.n(),
        "markings": 2 * d.n(),
        "generators": d.generator_count().to_string(),
        "components": components.len(),
        "component_rows": components,
    });
    Ok(report("info", Some(&d), started, result, &[]))
}

pub fn grading(file: &Path, generator: &str, shift: Option<Vec<i64>>) -> Result<Report> {
    let started = Instant::now();
    let d = read_diagram(file)?;
    let x = Generator::parse(generator)?;
    if x.n() != d.n() || !x.is_valid(d.p()) {
        bail!("generator {generator} does not belong to this diagram");
    }
    let (d, x) = match shift.as_deref() {
        Some(&[dx, dy]) => (d.shifted(dx, dy), x.shifted(&d, dx, dy)),
        _ => (d, x),
    };
    let t = Grader::new(&d).triple(&x);
    let result = json!({
        "generator": x.to_string(),
        "S": t.s,
        "M": fmt_rational(&t.m),
        "A": fmt_rational(&t.a),
    });
    Ok(report("grading", Some(&d), started, result, &[]))
}

pub fn homology(
    ctx: &Context,
    file: &Path,
    flavor: Flavor,
    ring: RingArg,
    window_min: Option<String>,
    window_max: Option<String>,
) -> Result<Report> {
    let started = Instant::now();
    let d = read_diagram(file)?;
    let ring = ring_of(ring);
    let signs = if ring == Ring::Z {
        Some(signs_for(ctx, &d)?)
    } else {
        None
    };
    let c = build_complex(&d, ring, signs.as_ref())?;
    let rational = |s: &str| parse_rational(s).with_context(|| format!("bad grading {s:?}"));
    let window = match (flavor, window_min) {
        (Flavor::Tilde, None) => Window::AllFinite,
        (_, Some(min)) => Window::Alexander {
            min: rational(&min)?,
            max: window_max.as_deref().map(rational).transpose()?,
        },
        (Flavor::Minus, None) => bail!("the minus flavor needs --window-min"),
    };
    let complex = match flavor {
        Flavor::Tilde => c.tilde(),
        Flavor::Minus => c,
    };
    let table = compute_homology(&complex, &window)?;
    let meta =
        json!({ "flavor": format!("{flavor:?}").to_lowercase(), "ring": format!("{ring:?}") });
    let result = table.to_json(meta);
    Ok(report("homology", Some(&d), started, result, &[]))
}

pub fn verify(
    ctx: &Context,
    file: &Path,
    suite: Suite,
    script: Option<PathBuf>,
    kind: &str,
    row: usize,
    signs: Option<PathBuf>,
) -> Result<Report> {
    let started = Instant::now();
    let d = read_diagram(file)?;
    let checks = match suite {
        Suite::D2 => suite_d2(ctx, &d)?,
        Suite::Gradings => suite_gradings(&d)?,
        Suite::Signs => suite_signs(&d, signs)?,
        Suite::Move => {
            let script = script.context("the move suite needs --script")?;
            let text = fs::read_to_string(&script)
                .with_context(|| format!("reading {}", script.display()))?;
            suite_moves(ctx, &d, &parse_script(&text)?)?
        }
        Suite::Stab => {
            let kind: StabKind = kind.parse().map_err(anyhow::Error::msg)?;
            suite_stab(&d, kind, row)?
        }
    };
    let name = format!("verify {}", format!("{suite:?}").to_lowercase());
    Ok(report(
        &name,
        Some(&d),
        started,
        json!({ "checks": checks.len() }),
        &checks,
    ))
}

fn suite_d2(ctx: &Context, d: &GridDiagram) -> Result<Vec<Check>> {
    let f2 = build_complex(d, Ring::F2, None)?;
    let signs = signs_for(ctx, d)?;
    let z = build_complex(d, Ring::Z, Some(&signs))?;
    let as_check = |name: &str, r: std::result::Result<(), _>| match r {
        Ok(()) => check(name, true, ""),
        Err(w) => check(name, false, format!("{w:?}")),
    };
    Ok(vec![
        as_check("d^2 = 0 over F2", f2.verify_d_squared()),
        as_check("d^2 = 0 over Z", z.verify_d_squared()),
        as_check("differential is homogeneous", f2.check_homogeneous()),
    ])
}

fn suite_gradings(d: &GridDiagram) -> Result<Vec<Check>> {
    let mut checks = verify_grading_laws(d)?;
    for dx in 0..d.np() as i64 {
        for dy in 0..d.n() as i64 {
            if (dx, dy) != (0, 0) {
                checks.extend(verify_shift_invariance(d, dx, dy)?);
            }
        }
    }
    Ok(checks)
}

fn suite_signs(d: &GridDiagram, file: Option<PathBuf>) -> Result<Vec<Check>> {
    let sys = build_constraints(d)?;
    let s = match file {
        Some(p) => SignAssignment::import(d, &fs::read_to_string(&p)?)?,
        None => solve_sign_assignment(d)?,
    };
    let violations = verify_axioms(&sys, &s);
    let detail = violations
        .first()
        .map(|v| format!("{} violations, first {v:?}", violations.len()))
        .unwrap_or_default();
    Ok(vec![check(
        "sign axioms S1-S3",
        violations.is_empty(),
        detail,
    )])
}

/// Tilde ranks over F2 double under any stabilization.
fn stab_rank_check(before: &GridDiagram, after: &GridDiagram) -> Result<Check> {
    let rank = |d: &GridDiagram| -> Result<usize> {
        let c = build_complex(d, Ring::F2, None)?.tilde();
        Ok(compute_homology(&c, &Window::AllFinite)?.total_rank())
    };
    let (a, b) = (rank(before)?, rank(after)?);
    Ok(check(
        "tilde rank doubles",
        b == 2 * a,
        format!("{a} then {b}"),
    ))
}

fn suite_stab(d: &GridDiagram, kind: StabKind, row: usize) -> Result<Vec<Check>> {
    let after = stabilize(d, kind, row)?;
    let mut checks = vec![stab_rank_check(d, &after)?];
    match stabilization_split(&stabilize_with_data(d, kind, row)?) {
        Ok(split) => {
            let signs = solve_restrictable_signs(&split.stab)?;
            for (tag, ring, s) in [("F2", Ring::F2, None), ("Z", Ring::Z, Some(&signs))] {
                for c in verify_stabilization(&split, ring, s)? {
                    checks.push(Check {
                        name: format!("{tag}: {}", c.name),
                        ..c
                    });
                }
            }
        }
        Err(_) => {
            // other types are related to X:SW by commutations and switches
            let base = stabilize(d, "X:SW".parse().map_err(anyhow::Error::msg)?, row)?;
            let path = commutation_path(&base, &after, 4);
            let detail = "no path of at most 4 commutations/switches from X:SW";
            let mut c = check(
                "reachable from X:SW by commutations",
                path.is_some(),
                detail,
            );
            if let Some(p) = path {
                c.detail = p.iter().map(Move::to_string).collect::<Vec<_>>().join("; ");
            }
            checks.push(c);
        }
    }
    Ok(checks)
}

fn suite_moves(ctx: &Context, d: &GridDiagram, script: &[Move]) -> Result<Vec<Check>> {
    let states = apply_script(d, script)?;
    let mut checks = Vec::new();
    for (k, mv) in script.iter().enumerate() {
        let before = &states[k];
        let prefix = |c: Check| Check {
            name: format!("step {} ({mv}): {}", k + 1, c.name),
            ..c
        };
        match *mv {
            Move::CommuteColumns(j) | Move::SwitchColumns(j) => {
                let c = build_combined(before, j)?;
                let signs = signs_for(ctx, before)?;
                checks.extend(
                    verify_commutation(&c, Ring::F2, None)?
                        .into_iter()
                        .map(prefix),
                );
                checks.extend(
                    verify_commutation(&c, Ring::Z, Some(&signs))?
                        .into_iter()
                        .map(prefix),
                );
            }
            Move::CommuteRows(_) | Move::SwitchRows(_) => {
                let rank = |d: &GridDiagram| -> Result<_> {
                    compute_homology(
                        &build_complex(d, Ring::F2, None)?.tilde(),
                        &Window::AllFinite,
                    )
                    .map_err(Into::into)
                };
                let same = rank(before)? == rank(&states[k + 1])?;
                checks.push(prefix(check(
                    "tilde homology unchanged",
                    same,
                    "tables differ",
                )));
            }
            Move::Stabilize(kind, row) => {
                checks.extend(suite_stab(before, kind, row)?.into_iter().map(prefix));
            }
            Move::Destabilize(_) => {
                checks.push(prefix(stab_rank_check(&states[k + 1], before)?));
            }
        }
    }
    Ok(checks)
}

pub fn signs_export(ctx: &Context, file: &Path, out: Option<PathBuf>) -> Result<Report> {
    let started = Instant::now();
    let d = read_diagram(file)?;
    let s = signs_for(ctx, &d)?;
    let text = s.export()?;
    let result = match &out {
        Some(p) => {
            fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
            json!({ "written": p.display().to_string(), "defined": s.defined_count() })
        }
        None => json!({ "signs": text, "defined": s.defined_count() }),
    };
    Ok(report("signs export", Some(&d), started, result, &[]))
}

pub fn signs_import(file: &Path, signs: &Path) -> Result<Report> {
    let started = Instant::now();
    let d = read_diagram(file)?;
    let checks = suite_signs(&d, Some(signs.to_path_buf()))?;
    Ok(report(
        "signs import",
        Some(&d),
        started,
        json!({}),
        &checks,
    ))
}

pub fn moves(file: &Path, script: &Path) -> Result<Report> {
    let started = Instant::now();
    let d = read_diagram(file)?;
    let text =
        fs::read_to_string(script).with_context(|| format!("reading {}", script.display()))?;
    let states = apply_script(&d, &parse_script(&text)?)?;
    let result = json!({
        "diagrams": states.iter().map(|s| s.to_text()).collect::<Vec<_>>(),
        "final_digest": digest(states.last().expect("script output includes the input")),
    });
    Ok(report("moves", Some(&d), started, result, &[]))
}

pub fn scan_torsion(
    p_max: i64,
    exhaustive_n: usize,
    random_n: usize,
    random_count: usize,
    seed: u64,
    log: Option<PathBuf>,
) -> Result<Report> {
    let started = Instant::now();
    let mut corpus: Vec<GridDiagram> = (1..=exhaustive_n)
        .flat_map(|n| exhaustive_upto(n, p_max))
        .collect();
    corpus.extend(random_diagrams(random_n, p_max, random_count, seed));
    let records = run_scan(&corpus)?;
    let text = scan_log(&records);
    let with_torsion = records.iter().filter(|r| !r.torsion.is_empty()).count();
    let mut result = json!({
        "corpus": {
            "p_max": p_max,
            "exhaustive_n": exhaustive_n,
            "random_n": random_n,
            "random_count": random_count,
            "seed": seed,
        },
        "diagrams": records.len(),
        "with_torsion": with_torsion,
    });
    match &log {
        Some(p) => {
            fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
            result["log"] = json!(p.display().to_string());
        }
        None => result["log_lines"] = json!(text.lines().collect::<Vec<_>>()),
    }
    Ok(report("scan-torsion", None, started, result, &[]))
}
