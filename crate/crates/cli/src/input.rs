use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use seqgram_core::ingest::{parse_blankline, parse_marker_delimited, parse_pid_traces};
use seqgram_core::{InputFormat, LineFilter, SequenceSet};

use crate::{Failure, InputArgs};

/// Reads every input file. With more than one file, labels are prefixed by
/// the file path.
pub fn read_all(args: &InputArgs) -> Result<SequenceSet, Failure> {
    let markers = match (args.format, &args.start, &args.end) {
        (InputFormat::Marker, Some(s), Some(e)) => Some((s.as_str(), e.as_str())),
        (InputFormat::Marker, _, _) => {
            return Err(Failure::usage(
                "--format marker needs both --start and --end",
            ))
        }
        (_, None, None) => None,
        (format, _, _) => {
            return Err(Failure::usage(format!(
                "--start/--end only apply to --format marker, not {format}"
            )))
        }
    };
    let filter = LineFilter::new(args.exclude.clone());
    let mut all = SequenceSet::default();
    for path in &args.files {
        let set = read_one(path, args.format, markers, &filter)?;
        for s in set.sequences.iter().filter(|s| s.truncated) {
            eprintln!(
                "warning: {}: span {} is not closed before end of input",
                path.display(),
                s.label
            );
        }
        if args.files.len() > 1 {
            all.extend(set.scoped(&path.display().to_string()));
        } else {
            all.extend(set);
        }
    }
    Ok(all)
}

fn read_one(
    path: &Path,
    format: InputFormat,
    markers: Option<(&str, &str)>,
    filter: &LineFilter,
) -> Result<SequenceSet, Failure> {
    let file = File::open(path).map_err(|e| {
        Failure::data(anyhow::Error::new(e).context(format!("cannot open {}", path.display())))
    })?;
    let reader = BufReader::new(file);
    let parsed = match (format, markers) {
        (InputFormat::BlankLine, _) => parse_blankline(reader, filter),
        (InputFormat::Pid, _) => parse_pid_traces(reader, filter),
        (InputFormat::Marker, Some((start, end))) => {
            parse_marker_delimited(reader, start, end, filter)
        }
        (InputFormat::Marker, None) => unreachable!("marker patterns checked by caller"),
    };
    parsed.map_err(|e| Failure::data(anyhow::Error::new(e).context(path.display().to_string())))
}
