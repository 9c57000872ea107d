use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use seqgram_core::{
    evaluate_set_parallel, rank, synthesize, Automaton, Model, RuleId, RuleKind, Score, Symbol,
    SynthConfig, Trainer,
};

use crate::{input, Failure, InputArgs, Outcome};

/// Longest expansion `inspect` prints in full.
const SHOW_TOKENS: usize = 32;

pub struct ScoreOptions {
    pub top_i: usize,
    pub top_d: usize,
    pub machine: bool,
    pub threads: usize,
    pub timing: bool,
}

fn rate(entries: u64, started: Instant) -> String {
    let secs = started.elapsed().as_secs_f64();
    format!(
        "{entries} entries in {secs:.3}s ({:.0} ent/s)",
        entries as f64 / secs.max(1e-9)
    )
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    let file = File::open(path).map_err(|e| {
        Failure::data(
            anyhow::Error::new(e).context(format!("cannot open model {}", path.display())),
        )
    })?;
    Model::load(BufReader::new(file)).map_err(|e| Failure::from_core(e, path.display()))
}

fn write_out(text: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Outcome {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    text(&mut out)
        .and_then(|()| out.flush())
        .map_err(Failure::data)
}

pub fn train(model_path: &Path, args: &InputArgs, timing: bool) -> Outcome {
    let set = input::read_all(args)?;
    if set.is_empty() {
        return Err(Failure::data(anyhow::anyhow!("no sequences in input")));
    }
    let started = Instant::now();
    let mut trainer = Trainer::new();
    for seq in &set.sequences {
        trainer
            .push(&seq.tokens)
            .map_err(|e| Failure::from_core(e, &seq.label))?;
    }
    let singletons = trainer.singleton_sequences().len();
    if singletons > 0 {
        eprintln!(
            "warning: {singletons} single-entry sequence(s) carry no structure and were dropped"
        );
    }
    let entries = trainer.entries();
    let model = trainer
        .finish()
        .map_err(|e| Failure::from_core(e, "training"))?;
    if timing {
        eprintln!("train: {}", rate(entries, started));
    }

    let file = File::create(model_path).map_err(|e| {
        Failure::data(
            anyhow::Error::new(e).context(format!("cannot create {}", model_path.display())),
        )
    })?;
    model
        .save(BufWriter::new(file))
        .map_err(|e| Failure::from_core(e, model_path.display()))?;

    let meta = model.meta();
    write_out(|out| {
        writeln!(
            out,
            "{} entries into {} symbols",
            meta.total_entries, meta.info_old
        )?;
        writeln!(
            out,
            "{} sequences, {} retained, {} rules",
            meta.training_sequences,
            meta.retained_sequences,
            model.grammar().rule_count()
        )
    })
}

pub fn score(model_path: &Path, args: &InputArgs, opts: ScoreOptions) -> Outcome {
    let model = load_model(model_path)?;
    let set = input::read_all(args)?;
    let started = Instant::now();
    let lists = set.token_lists();
    let mut scores = Vec::with_capacity(lists.len());
    for (result, seq) in evaluate_set_parallel(&lists, &model, opts.threads)
        .into_iter()
        .zip(&set.sequences)
    {
        scores.push(result.map_err(|e| Failure::from_core(e, &seq.label))?);
    }
    if opts.timing {
        eprintln!("score: {}", rate(set.entries() as u64, started));
    }
    let report = rank(&scores, opts.top_i, opts.top_d);
    let label = |s: &Score| set.sequences[s.index].label.as_str();

    write_out(|out| {
        if opts.machine {
            for s in &scores {
                let flag = if s.fully_explained() {
                    "explained"
                } else {
                    "-"
                };
                writeln!(
                    out,
                    "{}\t{}\t{}\t{:.6}\t{flag}",
                    label(s),
                    s.length,
                    s.info,
                    s.density()
                )?;
            }
            for (rank, s) in report.top_by_info.iter().enumerate() {
                writeln!(out, "top-i\t{}\t{}\t{}", rank + 1, label(s), s.info)?;
            }
            for (rank, s) in report.top_by_density.iter().enumerate() {
                writeln!(out, "top-d\t{}\t{}\t{:.6}", rank + 1, label(s), s.density())?;
            }
            return Ok(());
        }
        let width = scores
            .iter()
            .map(|s| label(s).len())
            .max()
            .unwrap_or(0)
            .max(5);
        writeln!(
            out,
            "{:width$}  {:>8}  {:>8}  {:>10}",
            "label", "length", "I", "D"
        )?;
        for s in &scores {
            let note = if s.fully_explained() {
                "  (fully explained)"
            } else {
                ""
            };
            writeln!(
                out,
                "{:width$}  {:>8}  {:>8}  {:>10.6}{note}",
                label(s),
                s.length,
                s.info,
                s.density()
            )?;
        }
        writeln!(out)?;
        writeln!(out, "top {} by I:", report.top_by_info.len())?;
        for (rank, s) in report.top_by_info.iter().enumerate() {
            writeln!(
                out,
                "  {:>3}. {:width$}  I = {}",
                rank + 1,
                label(s),
                s.info
            )?;
        }
        writeln!(out, "top {} by D:", report.top_by_density.len())?;
        for (rank, s) in report.top_by_density.iter().enumerate() {
            writeln!(
                out,
                "  {:>3}. {:width$}  D = {:.6}",
                rank + 1,
                label(s),
                s.density()
            )?;
        }
        Ok(())
    })
}

pub fn synth(
    out_dir: &Path,
    automaton: Option<&Path>,
    states: usize,
    alphabet: usize,
    count: usize,
    anomalies: usize,
    seed: u64,
) -> Outcome {
    let automaton = match automaton {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::data(
                    anyhow::Error::new(e).context(format!("cannot read {}", path.display())),
                )
            })?;
            Automaton::parse(&text).map_err(|e| Failure::from_core(e, path.display()))?
        }
        None => Automaton::random(states, alphabet, seed)
            .map_err(|e| Failure::from_core(e, "random automaton"))?,
    };
    let corpus = synthesize(
        &automaton,
        &SynthConfig {
            count,
            anomalies,
            seed,
        },
    );
    corpus.write_to(out_dir).map_err(|e| {
        Failure::data(
            anyhow::Error::new(e).context(format!("cannot write to {}", out_dir.display())),
        )
    })?;
    write_out(|out| {
        writeln!(
            out,
            "wrote {} normal and {} questionable sequences ({} anomalies) to {}",
            corpus.normal.len(),
            corpus.questionable.len(),
            anomalies,
            out_dir.display()
        )
    })
}

pub fn inspect(model_path: &Path) -> Outcome {
    let model = load_model(model_path)?;
    let g = model.grammar();
    let meta = model.meta();

    // depth-first from the start rule, each rule listed once
    let mut order: Vec<RuleId> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![g.start()];
    while let Some(r) = stack.pop() {
        if !seen.insert(r) {
            continue;
        }
        order.push(r);
        let rhs = g.rhs(r).unwrap_or_default();
        stack.extend(
            rhs.iter()
                .rev()
                .filter_map(|s| s.rule())
                .filter(|c| !seen.contains(c)),
        );
    }

    let show = |sym: Symbol| match sym {
        Symbol::Terminal(_) => model.token(sym),
        Symbol::Rule(r) => r.to_string(),
    };
    write_out(|out| {
        writeln!(
            out,
            "{} rules, {} terminals, {} symbols, {} of {} sequences retained",
            g.rule_count(),
            model.interner().len(),
            meta.info_old,
            meta.retained_sequences,
            meta.training_sequences
        )?;
        for r in order {
            let kind = g.kind(r).expect("listed rule exists");
            let body: Vec<String> = g.rhs(r).unwrap_or_default().into_iter().map(show).collect();
            if kind == RuleKind::Start {
                writeln!(out, "{r} start -> {}", body.join(" "))?;
                continue;
            }
            let kind = match kind {
                RuleKind::Sequence => "sequence",
                _ => "internal",
            };
            let expansion = model.expand_tokens(Symbol::Rule(r)).unwrap_or_default();
            let mut shown = expansion
                .iter()
                .take(SHOW_TOKENS)
                .copied()
                .collect::<Vec<_>>()
                .join(" ");
            if expansion.len() > SHOW_TOKENS {
                shown.push_str(&format!(" ... ({} entries)", expansion.len()));
            }
            writeln!(
                out,
                "{r} {kind} used {} -> {}  = {shown}",
                g.usage(r).unwrap_or(0),
                body.join(" ")
            )?;
        }
        Ok(())
    })
}
