//! Digit-sliced shift-add multiplication.
//!
//! A two's-complement word of w = blocks * bits_per_block bits is split into
//! LSB-first blocks. Writing bit j of block k as a[k][j], the word's value
//! is
//!
//!   sum over (k, j) of a[k][j] * 2^(k*p + j)
//!
//! except the final bit (k = blocks-1, j = p-1) which carries weight
//! -2^(w-1), the two's-complement sign position. A product a * b then needs
//! no multiplier at all: each set bit of a contributes b shifted left by its
//! position, added into an accumulator, with the sign bit subtracting
//! instead. The adder count equals the population count of a's bit pattern.

use crate::instrument;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SliceError {
    #[error("slice layout {blocks}x{bits_per_block} invalid: need both >= 1 and product <= 64")]
    BadLayout { blocks: u32, bits_per_block: u32 },
    #[error("value {value} does not fit in {word_bits} signed bits")]
    ValueOutOfRange { value: i64, word_bits: u32 },
    #[error("operand widths {a_bits}+{b_bits} exceed 64; product could overflow")]
    WidthOverflow { a_bits: u32, b_bits: u32 },
    #[error("fault position block {block} bit {bit} outside {blocks}x{bits_per_block} layout")]
    FaultOutOfRange {
        block: u32,
        bit: u32,
        blocks: u32,
        bits_per_block: u32,
    },
}

/// How a word is cut: `blocks` slices of `bits_per_block` bits each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceConfig {
    blocks: u32,
    bits_per_block: u32,
}

impl SliceConfig {
    pub fn new(blocks: u32, bits_per_block: u32) -> Result<Self, SliceError> {
        let bad = blocks == 0 || bits_per_block == 0 || blocks * bits_per_block > 64;
        if bad {
            return Err(SliceError::BadLayout {
                blocks,
                bits_per_block,
            });
        }
        Ok(Self {
            blocks,
            bits_per_block,
        })
    }

    pub fn blocks(&self) -> u32 {
        self.blocks
    }

    pub fn bits_per_block(&self) -> u32 {
        self.bits_per_block
    }

    /// Total word width the layout covers.
    pub fn word_bits(&self) -> u32 {
        self.blocks * self.bits_per_block
    }

    fn min_value(&self) -> i64 {
        if self.word_bits() == 64 {
            i64::MIN
        } else {
            -(1i64 << (self.word_bits() - 1))
        }
    }

    fn max_value(&self) -> i64 {
        if self.word_bits() == 64 {
            i64::MAX
        } else {
            (1i64 << (self.word_bits() - 1)) - 1
        }
    }
}

/// A word in sliced form: unsigned block values, least significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicedWord {
    config: SliceConfig,
    blocks: Vec<u64>,
}

impl SlicedWord {
    pub fn config(&self) -> SliceConfig {
        self.config
    }

    /// Block values, LSB-first. Each is < 2^bits_per_block.
    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    /// Set bits across all blocks; the adder count of a multiply by this
    /// word.
    pub fn popcount(&self) -> u32 {
        self.blocks.iter().map(|b| b.count_ones()).sum()
    }

    /// Flip one stored bit. Models a stuck or flipped adder input line.
    pub fn inject_fault(&mut self, fault: FaultSpec) -> Result<(), SliceError> {
        if fault.block >= self.config.blocks || fault.bit >= self.config.bits_per_block {
            return Err(SliceError::FaultOutOfRange {
                block: fault.block,
                bit: fault.bit,
                blocks: self.config.blocks,
                bits_per_block: self.config.bits_per_block,
            });
        }
        self.blocks[fault.block as usize] ^= 1 << fault.bit;
        Ok(())
    }
}

/// A single-bit corruption site in a sliced word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultSpec {
    pub block: u32,
    pub bit: u32,
}

/// Cut `value` into blocks. Fails if the value needs more than the layout's
/// word width.
pub fn slice(value: i64, config: SliceConfig) -> Result<SlicedWord, SliceError> {
    if value < config.min_value() || value > config.max_value() {
        return Err(SliceError::ValueOutOfRange {
            value,
            word_bits: config.word_bits(),
        });
    }
    let p = config.bits_per_block;
    let mask = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
    let pattern = value as u64;
    let blocks = (0..config.blocks)
        .map(|k| (pattern >> (k * p)) & mask)
        .collect();
    Ok(SlicedWord {
        config,
        blocks,
    })
}

/// Reassemble the signed value a sliced word denotes. Inverse of [`slice`]
/// for in-range values; after a fault injection it reports what the
/// corrupted word now encodes.
pub fn reconstruct(word: &SlicedWord) -> i64 {
    let p = word.config.bits_per_block;
    let w = word.config.word_bits();
    let mut acc: i64 = 0;
    for (k, &block) in word.blocks.iter().enumerate() {
        for j in 0..p {
            if block >> j & 1 == 0 {
                continue;
            }
            let pos = k as u32 * p + j;
            let weight = 1i64.wrapping_shl(pos);
            if pos == w - 1 {
                acc = acc.wrapping_sub(weight);
            } else {
                acc = acc.wrapping_add(weight);
            }
        }
    }
    acc
}

/// Multiply a sliced word by a plain signed multiplicand using only shifts
/// and conditional adds. Exact for all in-range operands.
pub fn multiply_sliced(word: &SlicedWord, b: i64, b_bits: u32) -> Result<i64, SliceError> {
    let a_bits = word.config.word_bits();
    if a_bits + b_bits > 64 {
        return Err(SliceError::WidthOverflow { a_bits, b_bits });
    }
    if b_bits < 64 {
        let lo = -(1i64 << (b_bits - 1));
        let hi = (1i64 << (b_bits - 1)) - 1;
        if b < lo || b > hi {
            return Err(SliceError::ValueOutOfRange {
                value: b,
                word_bits: b_bits,
            });
        }
    }
    instrument::record_multiply();
    let p = word.config.bits_per_block;
    let mut acc: i64 = 0;
    let mut adds: u64 = 0;
    for (k, &block) in word.blocks.iter().enumerate() {
        for j in 0..p {
            if block >> j & 1 == 0 {
                continue;
            }
            adds += 1;
            let pos = k as u32 * p + j;
            let term = b << pos;
            if pos == a_bits - 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
    }
    instrument::record_slice_adds(adds);
    Ok(acc)
}

/// Slice `a` and multiply by `b`: the full shift-add path in one call.
pub fn shift_add_multiply(
    a: i64,
    a_config: SliceConfig,
    b: i64,
    b_bits: u32,
) -> Result<i64, SliceError> {
    let word = slice(a, a_config)?;
    multiply_sliced(&word, b, b_bits)
}

/// Same path with one sliced bit flipped before the adds, for demonstrating
/// fault sensitivity. `fault: None` is identical to [`shift_add_multiply`].
pub fn shift_add_multiply_faulty(
    a: i64,
    a_config: SliceConfig,
    b: i64,
    b_bits: u32,
    fault: Option<FaultSpec>,
) -> Result<i64, SliceError> {
    let mut word = slice(a, a_config)?;
    if let Some(f) = fault {
        word.inject_fault(f)?;
    }
    multiply_sliced(&word, b, b_bits)
}
