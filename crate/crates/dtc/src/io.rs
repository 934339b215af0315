//! Stream file formats and dataset ingestion.
//!
//! Two readers with different contracts:
//!
//! * [`parse_edge_list`] ingests raw edge-list datasets: whitespace-separated
//!   node pairs, `#`/`%` comment lines, self-loops and duplicate undirected
//!   pairs dropped (first occurrence kept, drops reported).
//! * [`read_stream`] reads canonical stream files strictly: `u v` per line
//!   for insertion-only streams, `+ u v` / `- u v` for dynamic ones, and any
//!   validity violation is an error.
//!
//! Both readers are gzip-transparent (sniffed by magic bytes, not file name).

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use thiserror::Error;

use dtc_core::stream::StreamError;
use dtc_core::{CanonicalStream, Edge, Sign, SignedEdge};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: expected an integer, found {token:?}")]
    BadToken { line: usize, token: String },
    #[error("line {line}: expected `u v` or `SIGN u v`, found {content:?}")]
    BadLine { line: usize, content: String },
    #[error("line {line}: self-loop {node} {node} not allowed in a canonical stream")]
    SelfLoop { line: usize, node: u64 },
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Ingestion cleaning summary. Comment and blank lines are skipped, not
/// dropped: only data lines removed by cleaning (self-loops, duplicate
/// undirected pairs) count as drops.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropReport {
    pub comments: u64,
    pub blanks: u64,
    pub self_loops: u64,
    pub duplicates: u64,
}

impl DropReport {
    /// Data lines dropped by cleaning.
    pub fn total(&self) -> u64 {
        self.self_loops + self.duplicates
    }
}

impl std::fmt::Display for DropReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "dropped {} edge lines ({} self-loops, {} duplicates); skipped {} comment and {} blank lines",
            self.total(),
            self.self_loops,
            self.duplicates,
            self.comments,
            self.blanks
        )
    }
}

fn parse_node(line: usize, token: &str) -> Result<u64, ParseError> {
    token.parse::<u64>().map_err(|_| ParseError::BadToken { line, token: token.into() })
}

/// Ingests a raw edge list into a canonical insertion-only stream. Arrival
/// order is the file order of first occurrences.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<(CanonicalStream, DropReport), ParseError> {
    let mut report = DropReport::default();
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            report.blanks += 1;
            continue;
        }
        if trimmed.starts_with('#') || trimmed.starts_with('%') {
            report.comments += 1;
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(ParseError::BadLine { line: line_no, content: trimmed.into() });
        };
        let a = parse_node(line_no, a)?;
        let b = parse_node(line_no, b)?;
        match Edge::new(a, b) {
            None => report.self_loops += 1,
            Some(edge) => {
                if seen.insert(edge) {
                    edges.push(edge);
                } else {
                    report.duplicates += 1;
                }
            }
        }
    }
    Ok((CanonicalStream::from_edges(edges)?, report))
}

/// Reads a canonical stream file strictly, validating stream invariants.
pub fn read_stream<R: BufRead>(reader: R) -> Result<CanonicalStream, ParseError> {
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let (sign, a, b) = match tokens.as_slice() {
            [a, b] => (Sign::Insert, *a, *b),
            ["+", a, b] => (Sign::Insert, *a, *b),
            ["-", a, b] => (Sign::Delete, *a, *b),
            _ => return Err(ParseError::BadLine { line: line_no, content: trimmed.into() }),
        };
        let a = parse_node(line_no, a)?;
        let b = parse_node(line_no, b)?;
        let edge = Edge::new(a, b).ok_or(ParseError::SelfLoop { line: line_no, node: a })?;
        events.push(SignedEdge { edge, sign });
    }
    Ok(CanonicalStream::new(events)?)
}

/// Writes a stream: bare `u v` lines for insertion-only streams, signed
/// `+ u v` / `- u v` lines otherwise.
pub fn write_stream<W: Write>(mut writer: W, stream: &CanonicalStream) -> io::Result<()> {
    let signed = !stream.is_insertion_only();
    for ev in stream.events() {
        if signed {
            writeln!(writer, "{} {} {}", ev.sign.symbol(), ev.edge.u(), ev.edge.v())?;
        } else {
            writeln!(writer, "{} {}", ev.edge.u(), ev.edge.v())?;
        }
    }
    Ok(())
}

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Opens a text file for reading, decompressing transparently when the gzip
/// magic is present.
pub fn open_text(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic)?;
    file.seek(SeekFrom::Start(0))?;
    if n == 2 && magic == GZIP_MAGIC {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(BufReader::new(file)))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

pub fn parse_edge_list_path(path: &Path) -> Result<(CanonicalStream, DropReport), ParseError> {
    parse_edge_list(open_text(path)?)
}

pub fn read_stream_path(path: &Path) -> Result<CanonicalStream, ParseError> {
    read_stream(open_text(path)?)
}

pub fn write_stream_path(path: &Path, stream: &CanonicalStream) -> io::Result<()> {
    let mut out = io::BufWriter::new(File::create(path)?);
    write_stream(&mut out, stream)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn ingest_drops_and_keeps_first_occurrence() {
        let input = "3 5\n5 3\n7 7\n3 5\n";
        let (stream, report) = parse_edge_list(Cursor::new(input)).unwrap();
        assert_eq!(stream.len(), 1);
        assert_eq!(stream.events()[0].edge, Edge::new(3, 5).unwrap());
        assert_eq!(report.total(), 3);
        assert_eq!(report.duplicates, 2);
        assert_eq!(report.self_loops, 1);
    }

    #[test]
    fn ingest_empty_and_comments() {
        let (stream, report) = parse_edge_list(Cursor::new("")).unwrap();
        assert!(stream.is_empty());
        assert_eq!(report.total(), 0);

        // comment-only input: empty stream, zero drops
        let (stream, report) = parse_edge_list(Cursor::new("# a\n% b\n")).unwrap();
        assert!(stream.is_empty());
        assert_eq!(report.total(), 0);
        assert_eq!(report.comments, 2);
    }

    #[test]
    fn ingest_reports_bad_tokens_with_line_numbers() {
        let err = parse_edge_list(Cursor::new("1 2\nx 4\n")).unwrap_err();
        match err {
            ParseError::BadToken { line: 2, token } => assert_eq!(token, "x"),
            other => panic!("{other:?}"),
        }
        let err = parse_edge_list(Cursor::new("1 2 3\n")).unwrap_err();
        assert!(matches!(err, ParseError::BadLine { line: 1, .. }));
    }

    #[test]
    fn read_signed_stream() {
        let stream = read_stream(Cursor::new("+ 1 2\n+ 1 3\n+ 2 3\n- 1 2\n")).unwrap();
        assert_eq!(stream.len(), 4);
        assert_eq!(stream.deletion_count(), 1);
        assert_eq!(stream.surviving_edges().len(), 2);
    }

    #[test]
    fn read_rejects_delete_without_insert() {
        let err = read_stream(Cursor::new("- 1 2\n")).unwrap_err();
        assert!(matches!(
            err,
            ParseError::Stream(StreamError::DeleteAbsent { index: 0, .. })
        ));
    }

    #[test]
    fn read_rejects_malformed_sign() {
        let err = read_stream(Cursor::new("* 1 2\n")).unwrap_err();
        assert!(matches!(err, ParseError::BadLine { line: 1, .. }));
    }

    #[test]
    fn round_trip_dynamic_stream() {
        let edges: Vec<Edge> = (0..40).map(|i| Edge::new(i, i + 100).unwrap()).collect();
        let stream = CanonicalStream::from_edges(edges).unwrap();
        let dynamic = dtc_core::stream::synthesize_fully_dynamic(&stream, 0.4, 5).unwrap();
        let mut buf = Vec::new();
        write_stream(&mut buf, &dynamic).unwrap();
        let back = read_stream(Cursor::new(buf)).unwrap();
        assert_eq!(back, dynamic);
    }

    #[test]
    fn round_trip_insertion_only_uses_bare_format() {
        let stream =
            CanonicalStream::from_edges(vec![Edge::new(1, 2).unwrap(), Edge::new(2, 3).unwrap()])
                .unwrap();
        let mut buf = Vec::new();
        write_stream(&mut buf, &stream).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "1 2\n2 3\n");
        assert_eq!(read_stream(Cursor::new(buf)).unwrap(), stream);
    }

    #[test]
    fn gzip_transparent_read() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.txt.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), Compression::default());
        enc.write_all(b"1 2\n2 3\n1 3\n").unwrap();
        enc.finish().unwrap();
        let (stream, _) = parse_edge_list_path(&path).unwrap();
        assert_eq!(stream.len(), 3);
    }
}
