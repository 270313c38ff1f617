//! On-disk bit stream formats.
//!
//! Two encodings are supported:
//!
//! * **packed** — 8 bits per byte, LSB-first within each byte, final
//!   partial byte zero-padded. Lengths and layout travel in a text
//!   sidecar (`<file>.meta`, `key = value` lines).
//! * **ascii** — '0'/'1' characters, whitespace ignored; the interop
//!   format for externally produced dumps and for exporting streams to
//!   third-party test suites.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::bitstream::{BitStream, BitStreamBuilder, StreamLayout};
use crate::error::{Error, Result};

/// File encoding of a bit stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitFileFormat {
    Packed,
    Ascii,
}

impl std::str::FromStr for BitFileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "packed" => Ok(Self::Packed),
            "ascii" => Ok(Self::Ascii),
            other => Err(Error::Config(format!(
                "unknown bit file format '{other}' (expected 'packed' or 'ascii')"
            ))),
        }
    }
}

/// Sidecar metadata describing a bit file.
#[derive(Debug, Clone, PartialEq)]
pub struct BitFileMeta {
    pub total_bits: u64,
    pub layout: Option<StreamLayout>,
    pub generator: Option<String>,
    pub seed: Option<u64>,
}

impl BitFileMeta {
    pub fn for_stream(stream: &BitStream) -> Self {
        Self {
            total_bits: stream.len() as u64,
            layout: stream.layout().copied(),
            generator: None,
            seed: None,
        }
    }

    fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("total_bits = {}\n", self.total_bits));
        if let Some(l) = &self.layout {
            out.push_str(&format!("num_qubits = {}\n", l.num_qubits));
            out.push_str(&format!(
                "shots_per_experiment = {}\n",
                l.shots_per_experiment
            ));
            out.push_str(&format!("num_experiments = {}\n", l.num_experiments));
        }
        if let Some(g) = &self.generator {
            out.push_str(&format!("generator = {g}\n"));
        }
        if let Some(s) = self.seed {
            out.push_str(&format!("seed = {s}\n"));
        }
        out
    }

    fn parse(text: &str) -> Result<Self> {
        let mut total_bits = None;
        let mut num_qubits = None;
        let mut shots = None;
        let mut experiments = None;
        let mut generator = None;
        let mut seed = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("sidecar line '{line}' is not 'key = value'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let parse_u64 = |v: &str| -> Result<u64> {
                v.parse().map_err(|_| {
                    Error::Config(format!("sidecar key '{key}' has non-integer value '{v}'"))
                })
            };
            match key {
                "total_bits" => total_bits = Some(parse_u64(value)?),
                "num_qubits" => num_qubits = Some(parse_u64(value)? as usize),
                "shots_per_experiment" => shots = Some(parse_u64(value)? as usize),
                "num_experiments" => experiments = Some(parse_u64(value)? as usize),
                "generator" => generator = Some(value.to_string()),
                "seed" => seed = Some(parse_u64(value)?),
                _ => {} // unknown keys are tolerated
            }
        }
        let total_bits = total_bits
            .ok_or_else(|| Error::Config("sidecar is missing required key 'total_bits'".into()))?;
        let layout = match (num_qubits, shots, experiments) {
            (Some(n), Some(s), Some(r)) => Some(StreamLayout::new(n, s, r)?),
            (None, None, None) => None,
            _ => {
                return Err(Error::Config(
                    "sidecar declares a partial layout; need all of num_qubits, \
                     shots_per_experiment, num_experiments"
                        .into(),
                ))
            }
        };
        Ok(Self {
            total_bits,
            layout,
            generator,
            seed,
        })
    }
}

/// Sidecar path associated with a bit file: `<file>.meta`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".meta");
    PathBuf::from(name)
}

/// Read a sidecar if one exists next to the bit file.
pub fn read_sidecar(path: &Path) -> Result<Option<BitFileMeta>> {
    let meta_path = sidecar_path(path);
    if !meta_path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&meta_path)?;
    BitFileMeta::parse(&text).map(Some)
}

fn write_sidecar(path: &Path, meta: &BitFileMeta) -> Result<()> {
    std::fs::write(sidecar_path(path), meta.render())?;
    Ok(())
}

/// Write a stream to disk in the given format, with sidecar metadata.
pub fn write_bitfile(stream: &BitStream, path: &Path, format: BitFileFormat) -> Result<()> {
    write_bitfile_with_meta(stream, path, format, BitFileMeta::for_stream(stream))
}

/// Write a stream with explicit metadata (generator description, seed).
pub fn write_bitfile_with_meta(
    stream: &BitStream,
    path: &Path,
    format: BitFileFormat,
    meta: BitFileMeta,
) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    match format {
        BitFileFormat::Packed => {
            writer.write_all(stream.as_bytes())?;
        }
        BitFileFormat::Ascii => {
            // 80-column lines keep the file friendly to external tools.
            let mut line = [0u8; 81];
            let mut col = 0;
            stream.for_each_bit(|b| {
                line[col] = if b { b'1' } else { b'0' };
                col += 1;
                if col == 80 {
                    line[80] = b'\n';
                    writer.write_all(&line).expect("ascii write");
                    col = 0;
                }
            });
            if col > 0 {
                line[col] = b'\n';
                writer.write_all(&line[..=col])?;
            }
        }
    }
    writer.flush()?;
    write_sidecar(path, &meta)?;
    Ok(())
}

/// Parse a bit file. For packed files the sidecar supplies the length;
/// use [`parse_bitfile_with_layout`] when no sidecar exists.
pub fn parse_bitfile(path: &Path, format: BitFileFormat) -> Result<BitStream> {
    let meta = read_sidecar(path)?;
    let declared = match (&meta, format) {
        (Some(m), _) => Some(m.total_bits),
        (None, BitFileFormat::Packed) => {
            return Err(Error::Config(format!(
                "packed file '{}' has no sidecar; supply the layout explicitly",
                path.display()
            )))
        }
        (None, BitFileFormat::Ascii) => None,
    };
    let layout = meta.and_then(|m| m.layout);
    parse_impl(path, format, declared, layout)
}

/// Parse a bit file with an explicitly supplied layout (overrides and
/// replaces any sidecar).
pub fn parse_bitfile_with_layout(
    path: &Path,
    format: BitFileFormat,
    layout: StreamLayout,
) -> Result<BitStream> {
    parse_impl(path, format, Some(layout.total_bits()), Some(layout))
}

fn parse_impl(
    path: &Path,
    format: BitFileFormat,
    declared_bits: Option<u64>,
    layout: Option<StreamLayout>,
) -> Result<BitStream> {
    let mut reader = BitChunkReader::open(path, format, declared_bits)?;
    let mut builder = BitStreamBuilder::with_capacity(declared_bits.unwrap_or(0) as usize);
    while let Some((bytes, nbits)) = reader.next_chunk()? {
        builder.push_packed(bytes, nbits);
    }
    let stream = builder.finish(None)?;
    if let Some(declared) = declared_bits {
        if stream.len() as u64 != declared {
            return Err(Error::Length(format!(
                "file '{}' holds {} bits but {} were declared",
                path.display(),
                stream.len(),
                declared
            )));
        }
    }
    match layout {
        Some(l) => stream.with_layout(l),
        None => Ok(stream),
    }
}

const CHUNK_BYTES: usize = 1 << 16;

enum ChunkSource {
    Packed {
        reader: BufReader<File>,
        remaining_bits: u64,
        total_bytes: u64,
    },
    Ascii {
        reader: BufReader<File>,
        offset: u64,
        done: bool,
    },
}

/// Streams a bit file in bounded-memory chunks of LSB-first packed bytes.
///
/// The analysis subcommands feed these chunks straight into the
/// statistics accumulators, so a 300-Mbit job file never has to fit in
/// memory at once.
pub struct BitChunkReader {
    source: ChunkSource,
    buf: Vec<u8>,
}

impl BitChunkReader {
    pub fn open(path: &Path, format: BitFileFormat, declared_bits: Option<u64>) -> Result<Self> {
        let file = File::open(path)?;
        let source = match format {
            BitFileFormat::Packed => {
                let declared = declared_bits.ok_or_else(|| {
                    Error::Config("packed streaming requires a declared bit count".into())
                })?;
                let actual_bytes = file.metadata()?.len();
                let needed_bytes = declared.div_ceil(8);
                if actual_bytes != needed_bytes {
                    return Err(Error::Length(format!(
                        "packed file '{}' is {} bytes; {} bits need {} bytes",
                        path.display(),
                        actual_bytes,
                        declared,
                        needed_bytes
                    )));
                }
                ChunkSource::Packed {
                    reader: BufReader::new(file),
                    remaining_bits: declared,
                    total_bytes: needed_bytes,
                }
            }
            BitFileFormat::Ascii => ChunkSource::Ascii {
                reader: BufReader::new(file),
                offset: 0,
                done: false,
            },
        };
        Ok(Self {
            source,
            buf: vec![0u8; CHUNK_BYTES],
        })
    }

    /// Next chunk as `(packed bytes, number of valid bits)`; `None` at EOF.
    pub fn next_chunk(&mut self) -> Result<Option<(&[u8], usize)>> {
        match &mut self.source {
            ChunkSource::Packed {
                reader,
                remaining_bits,
                total_bytes,
            } => {
                if *remaining_bits == 0 {
                    return Ok(None);
                }
                let want_bits = (*remaining_bits).min((CHUNK_BYTES * 8) as u64) as usize;
                let want_bytes = want_bits.div_ceil(8);
                reader.read_exact(&mut self.buf[..want_bytes])?;
                *remaining_bits -= want_bits as u64;
                if *remaining_bits == 0 && !want_bits.is_multiple_of(8) {
                    let mask = (1u16 << (want_bits % 8)) as u8 - 1;
                    if self.buf[want_bytes - 1] & !mask != 0 {
                        return Err(Error::Parse {
                            offset: *total_bytes - 1,
                            message: "nonzero padding bits in final byte".into(),
                        });
                    }
                }
                Ok(Some((&self.buf[..want_bytes], want_bits)))
            }
            ChunkSource::Ascii {
                reader,
                offset,
                done,
            } => {
                if *done {
                    return Ok(None);
                }
                let mut raw = [0u8; CHUNK_BYTES];
                self.buf.iter_mut().for_each(|b| *b = 0);
                let mut nbits = 0usize;
                // Each raw read adds at most CHUNK_BYTES bits; stop while
                // the packed buffer can still absorb a full read.
                while nbits + CHUNK_BYTES <= CHUNK_BYTES * 8 {
                    let read = reader.read(&mut raw)?;
                    if read == 0 {
                        *done = true;
                        break;
                    }
                    for (i, &ch) in raw[..read].iter().enumerate() {
                        match ch {
                            b'0' => nbits += 1,
                            b'1' => {
                                self.buf[nbits >> 3] |= 1 << (nbits & 7);
                                nbits += 1;
                            }
                            b' ' | b'\t' | b'\r' | b'\n' => {}
                            other => {
                                return Err(Error::Parse {
                                    offset: *offset + i as u64,
                                    message: format!(
                                        "invalid character 0x{other:02x} (expected '0', '1', or whitespace)"
                                    ),
                                });
                            }
                        }
                    }
                    *offset += read as u64;
                }
                if nbits == 0 {
                    Ok(None)
                } else {
                    Ok(Some((&self.buf[..nbits.div_ceil(8)], nbits)))
                }
            }
        }
    }
}
