//! On-disk formats.
//!
//! * Bitmap: `QBMP`, representation tag (0 uncompressed, 1 run-length),
//!   bit length as u64 LE, word count as u64 LE, then the words in LE.
//! * Dataset: `QDS1`, name, universe size, set count, then per set a label
//!   and a run-length bitmap record. Strings are a u32 LE length and UTF-8.
//! * Set list text: one set per line, comma-separated ascending integers.
//! * Program: `QBP`, version byte, then LEB128 arity, slot count, result slot
//!   and instruction count; each instruction is a 1-byte opcode followed by
//!   LEB128 operands.

use std::io::{BufRead, Read, Write};

use quorum_core::bitmap::word_count;
use quorum_core::circuit::{BitProgram, Instr};
use quorum_core::{BinaryOp, Bitmap, RleBitmap, UncompressedBitmap};

use crate::data::Dataset;
use crate::{Error, Repr, Result};

const BITMAP_MAGIC: &[u8; 4] = b"QBMP";
const DATASET_MAGIC: &[u8; 4] = b"QDS1";
const PROGRAM_MAGIC: &[u8; 3] = b"QBP";
pub const PROGRAM_VERSION: u8 = 1;

/// A bitmap type with a stable serialized form.
pub trait Stored: Bitmap {
    const REPR: Repr;

    fn stored_words(&self) -> &[u64];
    fn from_stored(words: &[u64], len: u32) -> Result<Self>;
}

impl Stored for UncompressedBitmap {
    const REPR: Repr = Repr::Uncompressed;

    fn stored_words(&self) -> &[u64] {
        self.words()
    }

    fn from_stored(words: &[u64], len: u32) -> Result<Self> {
        if words.len() > word_count(len) {
            return Err(Error::Format(format!("{} words for a {len}-bit bitmap", words.len())));
        }
        let b = UncompressedBitmap::from_words(words, len);
        if b.cardinality() != count_ones(words) {
            return Err(Error::Format("bits set past the bitmap length".into()));
        }
        Ok(b)
    }
}

impl Stored for RleBitmap {
    const REPR: Repr = Repr::Rle;

    fn stored_words(&self) -> &[u64] {
        self.words()
    }

    fn from_stored(words: &[u64], len: u32) -> Result<Self> {
        Ok(RleBitmap::from_raw_parts(words, len)?)
    }
}

fn count_ones(words: &[u64]) -> u64 {
    words.iter().map(|w| w.count_ones() as u64).sum()
}

fn repr_tag(r: Repr) -> u8 {
    match r {
        Repr::Uncompressed => 0,
        Repr::Rle => 1,
    }
}

fn read_array<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn expect_magic(r: &mut impl Read, magic: &[u8]) -> Result<()> {
    let mut got = vec![0u8; magic.len()];
    r.read_exact(&mut got)?;
    if got != magic {
        return Err(Error::Format(format!("expected magic {:?}", String::from_utf8_lossy(magic))));
    }
    Ok(())
}

pub fn write_bitmap<B: Stored>(w: &mut impl Write, b: &B) -> Result<()> {
    let words = b.stored_words();
    w.write_all(BITMAP_MAGIC)?;
    w.write_all(&[repr_tag(B::REPR)])?;
    w.write_all(&(b.bit_len() as u64).to_le_bytes())?;
    w.write_all(&(words.len() as u64).to_le_bytes())?;
    for x in words {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a bitmap written by [`write_bitmap`]; the stored representation must be `B`'s.
pub fn read_bitmap<B: Stored>(r: &mut impl Read) -> Result<B> {
    expect_magic(r, BITMAP_MAGIC)?;
    let [tag] = read_array(r)?;
    if tag != repr_tag(B::REPR) {
        return Err(Error::Format(format!("representation tag {tag}, expected {}", repr_tag(B::REPR))));
    }
    let len = read_u64(r)?;
    let len = u32::try_from(len).map_err(|_| Error::Format(format!("bit length {len} too large")))?;
    let count = read_u64(r)?;
    // An RLE stream can be at most one marker per word plus the words.
    if count > 2 * word_count(len) as u64 + 1 {
        return Err(Error::Format(format!("{count} words for a {len}-bit bitmap")));
    }
    let words = (0..count).map(|_| read_u64(r)).collect::<Result<Vec<_>>>()?;
    B::from_stored(&words, len)
}

fn write_str(w: &mut impl Write, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str(r: &mut impl Read) -> Result<String> {
    let n = read_u32(r)? as usize;
    let mut buf = Vec::new();
    r.take(n as u64).read_to_end(&mut buf)?;
    if buf.len() != n {
        return Err(Error::Format("truncated string".into()));
    }
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_dataset(w: &mut impl Write, d: &Dataset) -> Result<()> {
    w.write_all(DATASET_MAGIC)?;
    write_str(w, &d.name)?;
    w.write_all(&(d.r as u64).to_le_bytes())?;
    w.write_all(&(d.sets.len() as u64).to_le_bytes())?;
    for (i, s) in d.sets.iter().enumerate() {
        write_str(w, d.labels.get(i).map_or("", String::as_str))?;
        write_bitmap(w, &RleBitmap::from_positions(s, d.r)?)?;
    }
    Ok(())
}

pub fn read_dataset(r: &mut impl Read) -> Result<Dataset> {
    expect_magic(r, DATASET_MAGIC)?;
    let name = read_str(r)?;
    let universe = read_u64(r)?;
    let universe = u32::try_from(universe).map_err(|_| Error::Format(format!("universe {universe} too large")))?;
    let count = read_u64(r)?;
    let mut sets = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..count {
        labels.push(read_str(r)?);
        let b: RleBitmap = read_bitmap(r)?;
        if b.bit_len() != universe {
            return Err(Error::Format(format!("set of {} bits in a {universe}-bit dataset", b.bit_len())));
        }
        sets.push(b.to_positions());
    }
    if labels.iter().all(String::is_empty) {
        labels.clear();
    }
    Ok(Dataset { name, r: universe, sets, labels })
}

pub fn write_sets(w: &mut impl Write, sets: &[Vec<u32>]) -> Result<()> {
    for s in sets {
        let line: Vec<String> = s.iter().map(u32::to_string).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Parses a set list. Blank lines are empty sets.
pub fn read_sets(r: impl BufRead) -> Result<Vec<Vec<u32>>> {
    let mut sets = Vec::new();
    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let mut set = Vec::new();
        if !line.is_empty() {
            for tok in line.split(',') {
                let v: u32 = tok.trim().parse().map_err(|e| Error::Format(format!("line {}: `{tok}`: {e}", no + 1)))?;
                if set.last().is_some_and(|&p| p >= v) {
                    return Err(Error::Format(format!("line {}: positions not ascending", no + 1)));
                }
                set.push(v);
            }
        }
        sets.push(set);
    }
    Ok(sets)
}

const OP_AND: u8 = 0;
const OP_OR: u8 = 1;
const OP_XOR: u8 = 2;
const OP_ANDNOT: u8 = 3;
const OP_NOT: u8 = 4;
const OP_CONST0: u8 = 5;
const OP_CONST1: u8 = 6;
const OP_RECLAIM: u8 = 7;

fn put(w: &mut impl Write, v: u32) -> Result<()> {
    leb128::write::unsigned(w, v as u64)?;
    Ok(())
}

fn get(r: &mut impl Read) -> Result<u32> {
    let v = leb128::read::unsigned(r).map_err(|e| match e {
        leb128::read::Error::IoError(e) => Error::Io(e),
        leb128::read::Error::Overflow => Error::Format("varint overflow".into()),
    })?;
    u32::try_from(v).map_err(|_| Error::Format(format!("operand {v} too large")))
}

pub fn write_program(w: &mut impl Write, p: &BitProgram) -> Result<()> {
    w.write_all(PROGRAM_MAGIC)?;
    w.write_all(&[PROGRAM_VERSION])?;
    put(w, p.arity() as u32)?;
    put(w, p.slots() as u32)?;
    put(w, p.result())?;
    put(w, p.instrs().len() as u32)?;
    for ins in p.instrs() {
        match *ins {
            Instr::Binary { op, a, b, dst } => {
                let code = match op {
                    BinaryOp::And => OP_AND,
                    BinaryOp::Or => OP_OR,
                    BinaryOp::Xor => OP_XOR,
                    BinaryOp::AndNot => OP_ANDNOT,
                };
                w.write_all(&[code])?;
                put(w, a)?;
                put(w, b)?;
                put(w, dst)?;
            }
            Instr::Not { a, dst } => {
                w.write_all(&[OP_NOT])?;
                put(w, a)?;
                put(w, dst)?;
            }
            Instr::Const { value, dst } => {
                w.write_all(&[if value { OP_CONST1 } else { OP_CONST0 }])?;
                put(w, dst)?;
            }
            Instr::Reclaim { slot } => {
                w.write_all(&[OP_RECLAIM])?;
                put(w, slot)?;
            }
        }
    }
    Ok(())
}

/// Reads and validates a program written by [`write_program`].
pub fn read_program(r: &mut impl Read) -> Result<BitProgram> {
    expect_magic(r, PROGRAM_MAGIC)?;
    let [version] = read_array(r)?;
    if version != PROGRAM_VERSION {
        return Err(Error::Format(format!("program version {version}, expected {PROGRAM_VERSION}")));
    }
    let arity = get(r)?;
    let slots = get(r)?;
    let result = get(r)?;
    let count = get(r)?;
    let mut instrs = Vec::with_capacity(count.min(1 << 20) as usize);
    for _ in 0..count {
        let [code] = read_array(r)?;
        let op = match code {
            OP_AND => Some(BinaryOp::And),
            OP_OR => Some(BinaryOp::Or),
            OP_XOR => Some(BinaryOp::Xor),
            OP_ANDNOT => Some(BinaryOp::AndNot),
            _ => None,
        };
        let ins = match (op, code) {
            (Some(op), _) => Instr::Binary { op, a: get(r)?, b: get(r)?, dst: get(r)? },
            (None, OP_NOT) => Instr::Not { a: get(r)?, dst: get(r)? },
            (None, OP_CONST0 | OP_CONST1) => Instr::Const { value: code == OP_CONST1, dst: get(r)? },
            (None, OP_RECLAIM) => Instr::Reclaim { slot: get(r)? },
            _ => return Err(Error::Format(format!("unknown opcode {code}"))),
        };
        instrs.push(ins);
    }
    Ok(BitProgram::new(arity, slots, result, instrs)?)
}
