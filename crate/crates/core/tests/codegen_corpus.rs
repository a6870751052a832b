use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gavis::algebra::Signature;
use gavis::codegen::{bind, compile, default_values, emit_code, interpret, run, BladeProgram};
use gavis::script::{parse_source, Script};
use gavis::symbolic::EmissionStyle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BINDINGS: usize = 100;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn corpus() -> Vec<(String, Script, BladeProgram)> {
    let mut entries: Vec<PathBuf> = fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "gas"))
        .collect();
    entries.sort();
    entries
        .into_iter()
        .map(|path| {
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            let source = fs::read_to_string(&path).unwrap();
            let script = parse_source(&source).unwrap_or_else(|d| panic!("{name}: {d:?}"));
            let program =
                compile(&script, Signature::cga3d()).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, script, program)
        })
        .collect()
}

fn perturbed(defaults: &BTreeMap<String, f64>, rng: &mut ChaCha8Rng) -> BTreeMap<String, f64> {
    defaults
        .iter()
        .map(|(k, v)| {
            (
                k.clone(),
                v + 0.1 * (v.abs() + 0.1) * rng.random_range(-1.0..=1.0),
            )
        })
        .collect()
}

#[test]
fn corpus_has_at_least_twenty_scripts() {
    assert!(corpus().len() >= 20);
}

#[test]
fn compiled_programs_agree_with_interpretation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, script, program) in corpus() {
        let defaults = default_values(&script);
        let mut compared = 0;
        // Bindings where both sides fail (an imaginary pair, say) are redrawn.
        for _ in 0..BINDINGS * 10 {
            if compared == BINDINGS {
                break;
            }
            let values = perturbed(&defaults, &mut rng);
            let (assignment, _) = bind(&program, &values).unwrap();
            let compiled = run(&program, &assignment);
            let direct = interpret(&script, Signature::cga3d(), &values);
            match (compiled, direct) {
                (Ok(c), Ok(d)) => {
                    assert_eq!(
                        c.keys().collect::<Vec<_>>(),
                        d.keys().collect::<Vec<_>>(),
                        "{name}"
                    );
                    for (k, mv) in &c {
                        let diff = mv.max_abs_diff(&d[k]);
                        assert!(diff <= 1e-10, "{name}.{k}: {diff:e} at {values:?}");
                    }
                    compared += 1;
                }
                (Err(_), Err(_)) => {}
                (c, d) => panic!("{name}: compiled {c:?} but interpreted {d:?} at {values:?}"),
            }
        }
        assert_eq!(compared, BINDINGS, "{name}: too few bindings evaluate");
    }
}

#[test]
fn eliminated_blades_are_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, script, program) in corpus() {
        let defaults = default_values(&script);
        for _ in 0..20 {
            let values = perturbed(&defaults, &mut rng);
            let Ok(direct) = interpret(&script, Signature::cga3d(), &values) else {
                continue;
            };
            for output in &program.outputs {
                for (blade, c) in direct[&output.name].terms() {
                    if !output.blades.contains(&blade) {
                        assert!(
                            c.abs() <= 1e-12,
                            "{name}.{}: dropped {blade} = {c:e}",
                            output.name
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn emitted_code_matches_golden_files() {
    let golden_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    if update {
        fs::create_dir_all(&golden_dir).unwrap();
    }
    for (name, _, program) in corpus() {
        let code = emit_code(
            &program,
            &program.default_assignment(),
            EmissionStyle::Python,
        );
        let path = golden_dir.join(format!("{name}.py.golden"));
        if update {
            fs::write(&path, &code).unwrap();
            continue;
        }
        let expected = fs::read_to_string(&path)
            .unwrap_or_else(|_| panic!("missing {}; run with UPDATE_GOLDEN=1", path.display()));
        assert!(
            code == expected,
            "{name}: emitted code differs from {}",
            path.display()
        );
    }
}

#[test]
fn emission_is_deterministic() {
    for (name, script, program) in corpus() {
        let again = compile(&script, Signature::cga3d()).unwrap();
        for style in [EmissionStyle::Python, EmissionStyle::JsonIr] {
            let a = emit_code(&program, &program.default_assignment(), style);
            let b = emit_code(&again, &again.default_assignment(), style);
            assert_eq!(a, b, "{name}");
        }
    }
}

/// Executes each emitted program with the system Python, when present.
#[test]
fn emitted_python_reproduces_run() {
    use std::process::Command;
    if Command::new("python3").arg("--version").output().is_err() {
        eprintln!("python3 not found; skipping");
        return;
    }
    for (name, _, program) in corpus() {
        let assignment = program.default_assignment();
        let code = emit_code(&program, &assignment, EmissionStyle::Python);
        let harness = format!("{code}\nimport json\nprint(json.dumps(outputs))\n");
        let out = Command::new("python3")
            .arg("-c")
            .arg(&harness)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let printed: BTreeMap<String, BTreeMap<String, f64>> =
            serde_json::from_slice(&out.stdout).unwrap();
        let expected = run(&program, &assignment).unwrap();
        for (variable, mv) in &expected {
            let got = &printed[variable];
            for (blade, c) in mv.terms() {
                let py = got.get(&blade.to_string()).copied().unwrap_or(0.0);
                assert!(
                    (py - c).abs() <= 1e-12,
                    "{name}.{variable}.{blade}: {py} vs {c}"
                );
            }
        }
    }
}
