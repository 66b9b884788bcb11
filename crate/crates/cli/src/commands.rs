use std::path::Path;

use serde_json::{json, Value};
use vvcode::codec::{self, fixed_length_for, huffman_for, measure_rate, tunstall_build, PhraseCodebook};
use vvcode::dictionary::{Alphabet, Budget};
use vvcode::measures::{self, check_conservation_with, check_extension_identities, check_truncation_identity};
use vvcode::simulation::{phrase_histogram_with, simulate_with, SimOptions};
use vvcode::{Dictionary, Error, Result, SourceModel, Symbol};

use crate::output::{self, Outcome, Status, StoredConfig};
use crate::{Command, Format, Identity};

pub fn execute(command: Command, format: Format, dest: Option<&Path>) -> Result<Status> {
    if let Command::Replay { stored, check } = &command {
        return replay(stored, *check, dest);
    }
    let outcome = run(&command)?;
    let report = output::report(format, &command, outcome.result.clone());
    output::emit(&output::render(format, &report, &outcome)?, dest)?;
    Ok(outcome.status)
}

fn replay(stored: &Path, check: bool, dest: Option<&Path>) -> Result<Status> {
    let text = std::fs::read_to_string(stored)?;
    let old: Value = serde_json::from_str(&text)?;
    let config = old
        .get("config")
        .cloned()
        .ok_or_else(|| Error::Input(format!("{} has no config block", stored.display())))?;
    let StoredConfig { format, command } = serde_json::from_value(config)?;
    if matches!(command, Command::Replay { .. }) {
        return Err(Error::Input("a replay report cannot be replayed".into()));
    }
    let outcome = run(&command)?;
    let report = output::report(format, &command, outcome.result.clone());
    let rendered = output::render(Format::Json, &report, &outcome)?;
    output::emit(&rendered, dest)?;
    if check && rendered.trim_end() != text.trim_end() {
        eprintln!("replayed report differs from {}", stored.display());
        return Ok(Status::Fail);
    }
    Ok(outcome.status)
}

fn load_dict(p: &Path) -> Result<Dictionary> {
    Dictionary::from_json_str(&read(p)?)
}

fn load_source(p: &Path) -> Result<SourceModel> {
    SourceModel::from_json_str(&read(p)?)
}

fn load_codebook(p: &Path) -> Result<PhraseCodebook> {
    PhraseCodebook::from_json_str(&read(p)?)
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))
}

fn budget(width: u32) -> Budget {
    Budget::with_width(width)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("--{name} must be positive")))
    }
}

fn at_least_one(name: &str, n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::Input(format!("--{name} must be at least 1")))
    }
}

fn label(p: &Path) -> String {
    p.display().to_string()
}

fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Check { dict, source, depth, tol, width } => {
            at_least_one("depth", *depth)?;
            positive("tol", *tol)?;
            let d = load_dict(dict)?;
            let proper = d.is_proper(*depth, budget(*width))?;
            let complete = match d.alphabet() {
                Alphabet::Finite(k) if d.is_finite() => Some(d.is_complete(k)?),
                _ => None,
            };
            let asc = source.as_ref().map(|s| d.is_asc(&load_source(s)?, *depth, *tol)).transpose()?;
            let status = match (&asc, complete) {
                (Some(v), _) if !v.is_certified() => Status::Inconclusive,
                _ => Status::pass_if(proper),
            };
            let result = json!({
                "proper": proper,
                "finite": d.is_finite(),
                "max_word_len": d.max_word_len(),
                "complete": complete,
                "asc": asc,
            });
            Ok(Outcome { result, rows: Vec::new(), status })
        }
        Command::Truncate { dict, n, width, out } => {
            at_least_one("n", *n)?;
            let f = load_dict(dict)?.truncate(*n, budget(*width))?;
            if let Some(out) = out {
                std::fs::write(out, f.d_n.to_json_string())?;
            }
            let rows: Vec<Value> = f
                .t_n
                .iter()
                .map(|w| json!({"set": "t_n", "word": w.to_string()}))
                .chain(f.d_n_perp.iter().map(|w| json!({"set": "d_n_perp", "word": w.to_string()})))
                .collect();
            let mut o = Outcome::new(&f.report(), Status::Ok);
            o.rows = rows;
            Ok(o)
        }
        Command::Extend { dict, alpha, out } => {
            let d = load_dict(dict)?.extend(alpha)?;
            if let Some(out) = out {
                std::fs::write(out, d.to_json_string())?;
            }
            Ok(Outcome::new(&json!({ "alpha": alpha, "dictionary": d.to_file() }), Status::Ok))
        }
        Command::Cone { dict, beta, depth, width, source } => {
            let d = load_dict(dict)?;
            let cone = d.cone(beta, *depth, budget(*width))?;
            let mass = source.as_ref().map(|s| d.cone_mass(&load_source(s)?, beta, *depth)).transpose()?;
            let rows: Vec<Value> = cone.words.iter().map(|w| json!({"word": w.to_string()})).collect();
            let mut o = Outcome::new(&json!({ "cone": cone, "mass": mass }), Status::Ok);
            o.rows = rows;
            Ok(o)
        }
        Command::Measure { dict, source, depth } => {
            at_least_one("depth", *depth)?;
            let s = load_source(source)?;
            let ev = measures::evaluate(&load_dict(dict)?, &s, *depth)?;
            let row = json!({
                "dictionary": label(dict),
                "source": label(source),
                "depth_used": ev.depth_used,
                "h_p": s.entropy(),
                "h_d_low": ev.h_d.low,
                "h_d_high": ev.h_d.high,
                "lbar_low": ev.lbar.low,
                "lbar_high": ev.lbar.high,
                "frontier_mass": ev.frontier_mass,
                "exact": ev.exact,
            });
            let result = json!({ "h_p": s.entropy(), "evaluation": ev });
            Ok(Outcome { result, rows: vec![row], status: Status::Ok })
        }
        Command::Verify { dict, source, identity, depth, tol, m_max, alpha, ceiling, width } => {
            at_least_one("depth", *depth)?;
            positive("tol", *tol)?;
            let d = load_dict(dict)?;
            let s = load_source(source)?;
            match identity {
                Identity::Conservation => {
                    let r = check_conservation_with(&d, &s, *depth, *tol, *ceiling)?;
                    let row = r.csv_row(&label(dict), &label(source));
                    Ok(Outcome::new(&r, Status::from_verdict(r.verdict)).with_rows(&[row]))
                }
                Identity::Truncation => {
                    at_least_one("m-max", *m_max)?;
                    let rows = check_truncation_identity(&d, &s, *m_max, *tol, budget(*width))?;
                    let ok = rows.iter().all(|r| r.pass);
                    Ok(Outcome::new(&json!({ "pass": ok, "rows": rows }), Status::pass_if(ok)).with_rows(&rows))
                }
                Identity::Extension => {
                    let alpha = alpha
                        .as_ref()
                        .ok_or_else(|| Error::Input("--identity extension needs --alpha".into()))?;
                    let r = check_extension_identities(&d, alpha, &s, *tol, *depth)?;
                    Ok(Outcome::new(&r, Status::pass_if(r.pass())))
                }
            }
        }
        Command::Scan { dict, source, m_max, width } => {
            at_least_one("m-max", *m_max)?;
            let r = measures::convergence_scan(&load_dict(dict)?, &load_source(source)?, *m_max, budget(*width))?;
            let ok = r.h_monotone && r.lbar_monotone;
            Ok(Outcome::new(&r, Status::pass_if(ok)).with_rows(&r.rows))
        }
        Command::Tunstall { source, size, out } => {
            let d = tunstall_build(&load_source(source)?, *size)?;
            if let Some(out) = out {
                std::fs::write(out, d.to_json_string())?;
            }
            Ok(Outcome::new(&json!({ "size": d.words().map_or(0, |w| w.len()), "dictionary": d.to_file() }), Status::Ok))
        }
        Command::Codebook { dict, source, fixed, out } => {
            let d = load_dict(dict)?;
            let cb = if *fixed {
                fixed_length_for(&d)?
            } else {
                let s = source
                    .as_ref()
                    .ok_or_else(|| Error::Input("a Huffman codebook needs --source (or use --fixed)".into()))?;
                huffman_for(&d, &load_source(s)?)?
            };
            if let Some(out) = out {
                std::fs::write(out, cb.to_json_string())?;
            }
            let rows: Vec<Value> = cb
                .phrases()
                .iter()
                .zip(cb.codewords())
                .map(|(p, c)| json!({"phrase": p.to_string(), "codeword": c}))
                .collect();
            let result = json!({ "kraft_sum": cb.kraft_sum(), "frame": cb.frame(), "codebook": cb.to_file() });
            Ok(Outcome { result, rows, status: Status::Ok })
        }
        Command::Encode { dict, codebook, input, out, bits } => {
            let d = load_dict(dict)?;
            let cb = load_codebook(codebook)?;
            let stream = read_stream(input, *bits)?;
            let enc = codec::encode(&d, &cb, &stream)?;
            std::fs::write(out, &enc.bytes)?;
            let result = json!({
                "symbols": stream.len(),
                "phrases": enc.phrases,
                "payload_bits": enc.payload_bits,
                "bits": enc.bit_len,
                "bytes": enc.bytes.len(),
            });
            Ok(Outcome { result, rows: Vec::new(), status: Status::Ok })
        }
        Command::Decode { dict, codebook, input, out, bits } => {
            let d = load_dict(dict)?;
            let cb = load_codebook(codebook)?;
            let bytes = std::fs::read(input).map_err(|e| Error::Input(format!("{}: {e}", input.display())))?;
            let stream = codec::decode(&d, &cb, &bytes)?;
            write_stream(out, &stream, *bits)?;
            Ok(Outcome::new(&json!({ "symbols": stream.len(), "bytes": bytes.len() }), Status::Ok))
        }
        Command::Rate { dict, codebook, source, symbols, seed } => {
            let r = measure_rate(&load_dict(dict)?, &load_codebook(codebook)?, &load_source(source)?, *symbols, *seed)?;
            let status = Status::pass_if(r.lossless);
            Ok(Outcome::new(&r, status))
        }
        Command::Simulate { dict, source, phrases, seed, histogram, step_cap, depth } => {
            let d = load_dict(dict)?;
            let s = load_source(source)?;
            let opts = SimOptions { step_cap: *step_cap, theory_depth: *depth };
            if *histogram {
                let h = phrase_histogram_with(&d, &s, *phrases, *seed, opts)?;
                Ok(Outcome::new(&h, Status::Ok).with_rows(&h.csv_rows()))
            } else {
                let r = simulate_with(&d, &s, *phrases, *seed, opts)?;
                Ok(Outcome::new(&r, Status::Ok).with_rows(&[r.csv_row()]))
            }
        }
        Command::Replay { .. } => unreachable!("handled by execute"),
    }
}

/// Whitespace-separated symbol indices, or packed bits MSB first.
fn read_stream(p: &Path, bits: bool) -> Result<Vec<Symbol>> {
    if bits {
        let bytes = std::fs::read(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
        return Ok(bytes.iter().flat_map(|b| (0..8).rev().map(move |i| (b >> i & 1) as Symbol)).collect());
    }
    read(p)?
        .split_whitespace()
        .enumerate()
        .map(|(i, t)| {
            t.parse::<Symbol>()
                .map_err(|_| Error::Input(format!("{}: token {i} (`{t}`) is not a symbol index", p.display())))
        })
        .collect()
}

fn write_stream(p: &Path, stream: &[Symbol], bits: bool) -> Result<()> {
    if bits {
        if let Some(&s) = stream.iter().find(|&&s| s > 1) {
            return Err(Error::Input(format!("symbol {s} cannot be written as a bit")));
        }
        let mut w = codec::BitWriter::new();
        for &s in stream {
            w.push_bit(s == 1);
        }
        std::fs::write(p, w.finish())?;
        return Ok(());
    }
    let mut text = stream.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
    text.push('\n');
    std::fs::write(p, text)?;
    Ok(())
}
