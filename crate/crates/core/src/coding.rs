//! Concrete codes behind the slotted scheme: random-binning wiretap
//! codebooks, deterministic MAC codebooks, XOR keying, and an exhaustive
//! maximum-likelihood joint decoder.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_index, ChannelSpec};
use crate::error::{Error, Result};

/// A fixed-width bit string, most significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    value: u64,
    width: u32,
}

impl Message {
    pub fn new(value: u64, width: u32) -> Result<Self> {
        if !(1..=63).contains(&width) {
            return Err(Error::InvalidConfig(format!(
                "message width {width} outside 1..=63"
            )));
        }
        if value >> width != 0 {
            return Err(Error::IndexOutOfRange {
                context: "message value",
                index: value as usize,
                size: 1usize << width,
            });
        }
        Ok(Self { value, width })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// XOR with the first `self.width` bits of `key` (msb-aligned); the
    /// width is preserved.
    pub fn xor_key(&self, key: &Message) -> Result<Message> {
        if key.width < self.width {
            return Err(Error::KeyTooShort {
                key: key.width,
                needed: self.width,
            });
        }
        let prefix = key.value >> (key.width - self.width);
        Ok(Message {
            value: self.value ^ prefix,
            width: self.width,
        })
    }

    /// Bits of `self` followed by bits of `other`.
    pub fn concat(&self, other: &Message) -> Result<Message> {
        let width = self.width + other.width;
        if width > 63 {
            return Err(Error::SizeOverflow {
                context: "message concat",
                size: width as u128,
            });
        }
        Ok(Message {
            value: (self.value << other.width) | other.value,
            width,
        })
    }
}

/// What to do about duplicate codewords in a random book.
///
/// `Allow` is the plain random-coding draw.  `Resample` redraws duplicates
/// until all words are distinct whenever the symbol space permits, which a
/// joint ML decoder needs for error-free decoding on noiseless channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionPolicy {
    Allow,
    Resample,
}

/// Binned codebook for the stochastic wiretap encoder.  `words` is flat:
/// bin b, index j starts at (b·bin_size + j)·n1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WiretapCodebook {
    pub user: u8,
    pub n1: usize,
    pub msg_bits: u32,
    pub rand_bits: u32,
    alphabet: usize,
    words: Vec<usize>,
    collisions: usize,
}

impl WiretapCodebook {
    pub fn num_bins(&self) -> usize {
        1usize << self.msg_bits
    }

    pub fn bin_size(&self) -> usize {
        1usize << self.rand_bits
    }

    /// Duplicate codewords across the whole table (0 after a successful
    /// resample).
    pub fn collisions(&self) -> usize {
        self.collisions
    }

    pub fn word(&self, bin: usize, index: usize) -> &[usize] {
        let start = (bin * self.bin_size() + index) * self.n1;
        &self.words[start..start + self.n1]
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }
}

/// Unbinned codebook for the deterministic keyed-part encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacCodebook {
    pub user: u8,
    pub n2: usize,
    pub msg_bits: u32,
    alphabet: usize,
    words: Vec<usize>,
    collisions: usize,
}

impl MacCodebook {
    pub fn num_messages(&self) -> usize {
        1usize << self.msg_bits
    }

    pub fn collisions(&self) -> usize {
        self.collisions
    }

    pub fn word(&self, msg: usize) -> &[usize] {
        let start = msg * self.n2;
        &self.words[start..start + self.n2]
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }
}

fn check_pmf(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::EmptyAlphabet("codeword symbol"));
    }
    for (index, &value) in p.iter().enumerate() {
        if value < 0.0 {
            return Err(Error::NegativeProbability { index, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > crate::channel::STOCHASTIC_TOL {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

/// Draws `count` words of `len` symbols i.i.d. from `p`; under `Resample`,
/// duplicates are redrawn (bounded passes) when the symbol space is large
/// enough to hold `count` distinct words.
fn draw_words<R: Rng + ?Sized>(
    rng: &mut R,
    p: &[f64],
    count: usize,
    len: usize,
    policy: CollisionPolicy,
) -> (Vec<usize>, usize) {
    let mut words: Vec<usize> = Vec::with_capacity(count * len);
    for _ in 0..count * len {
        words.push(sample_index(p, rng));
    }

    let positive = p.iter().filter(|&&x| x > 0.0).count();
    let space = (positive as u128).checked_pow(len as u32);
    let feasible = match space {
        Some(s) => s >= count as u128,
        None => true,
    };
    if policy == CollisionPolicy::Resample && feasible {
        for _pass in 0..1024 {
            let mut seen: HashMap<&[usize], usize> = HashMap::with_capacity(count);
            let mut dup_indices = Vec::new();
            for w in 0..count {
                let slice = &words[w * len..(w + 1) * len];
                if seen.contains_key(slice) {
                    dup_indices.push(w);
                } else {
                    seen.insert(slice, w);
                }
            }
            if dup_indices.is_empty() {
                break;
            }
            for w in dup_indices {
                for t in 0..len {
                    words[w * len + t] = sample_index(p, rng);
                }
            }
        }
    }

    let mut seen: HashMap<&[usize], usize> = HashMap::with_capacity(count);
    for w in 0..count {
        *seen.entry(&words[w * len..(w + 1) * len]).or_insert(0) += 1;
    }
    let collisions = count - seen.len();
    (words, collisions)
}

/// Random-binning wiretap codebook: 2^msg_bits bins of 2^rand_bits words
/// each.  A zero-bit book degenerates to a single known word, which the
/// protocol uses for a user with nothing to send in some part.
#[allow(clippy::too_many_arguments)]
pub fn build_wiretap_with<R: Rng + ?Sized>(
    rng: &mut R,
    user: u8,
    p: &[f64],
    n1: usize,
    msg_bits: u32,
    rand_bits: u32,
    budget: u64,
    policy: CollisionPolicy,
) -> Result<WiretapCodebook> {
    check_pmf(p)?;
    if n1 < 1 {
        return Err(Error::InvalidConfig("n1 must be at least 1".into()));
    }
    if msg_bits + rand_bits > 32 {
        return Err(Error::SizeOverflow {
            context: "wiretap codebook bits",
            size: (msg_bits + rand_bits) as u128,
        });
    }
    let count = 1usize << (msg_bits + rand_bits);
    let cells = count as u128 * n1 as u128;
    if cells > budget as u128 {
        return Err(Error::SizeOverflow {
            context: "wiretap codebook",
            size: cells,
        });
    }
    let (words, collisions) = draw_words(rng, p, count, n1, policy);
    Ok(WiretapCodebook {
        user,
        n1,
        msg_bits,
        rand_bits,
        alphabet: p.len(),
        words,
        collisions,
    })
}

pub fn build_wiretap<R: Rng + ?Sized>(
    rng: &mut R,
    user: u8,
    p: &[f64],
    n1: usize,
    msg_bits: u32,
    rand_bits: u32,
    budget: u64,
) -> Result<WiretapCodebook> {
    build_wiretap_with(rng, user, p, n1, msg_bits, rand_bits, budget, CollisionPolicy::Allow)
}

pub fn build_mac_with<R: Rng + ?Sized>(
    rng: &mut R,
    user: u8,
    p: &[f64],
    n2: usize,
    msg_bits: u32,
    budget: u64,
    policy: CollisionPolicy,
) -> Result<MacCodebook> {
    check_pmf(p)?;
    if n2 < 1 {
        return Err(Error::InvalidConfig("n2 must be at least 1".into()));
    }
    if msg_bits > 32 {
        return Err(Error::SizeOverflow {
            context: "mac codebook bits",
            size: msg_bits as u128,
        });
    }
    let count = 1usize << msg_bits;
    let cells = count as u128 * n2 as u128;
    if cells > budget as u128 {
        return Err(Error::SizeOverflow {
            context: "mac codebook",
            size: cells,
        });
    }
    let (words, collisions) = draw_words(rng, p, count, n2, policy);
    Ok(MacCodebook {
        user,
        n2,
        msg_bits,
        alphabet: p.len(),
        words,
        collisions,
    })
}

pub fn build_mac<R: Rng + ?Sized>(
    rng: &mut R,
    user: u8,
    p: &[f64],
    n2: usize,
    msg_bits: u32,
    budget: u64,
) -> Result<MacCodebook> {
    build_mac_with(rng, user, p, n2, msg_bits, budget, CollisionPolicy::Allow)
}

/// Stochastic wiretap encoder: a uniformly random member of bin `msg`.
pub fn encode_wiretap<'b, R: Rng + ?Sized>(
    book: &'b WiretapCodebook,
    msg: &Message,
    rng: &mut R,
) -> Result<&'b [usize]> {
    if msg.width() != book.msg_bits {
        return Err(Error::WidthMismatch {
            msg: msg.width(),
            book: book.msg_bits,
        });
    }
    let index = rng.random_range(0..book.bin_size());
    Ok(book.word(msg.value() as usize, index))
}

/// Deterministic keyed-part encoder: plain table lookup.
pub fn encode_mac<'b>(book: &'b MacCodebook, msg: &Message) -> Result<&'b [usize]> {
    if msg.width() != book.msg_bits {
        return Err(Error::WidthMismatch {
            msg: msg.width(),
            book: book.msg_bits,
        });
    }
    Ok(book.word(msg.value() as usize))
}

/// Anything decode_ml can search over.
pub trait Codebook {
    fn num_messages(&self) -> usize;
    fn words_per_message(&self) -> usize;
    fn block_len(&self) -> usize;
    fn candidate(&self, msg: usize, index: usize) -> &[usize];
}

impl Codebook for WiretapCodebook {
    fn num_messages(&self) -> usize {
        self.num_bins()
    }
    fn words_per_message(&self) -> usize {
        self.bin_size()
    }
    fn block_len(&self) -> usize {
        self.n1
    }
    fn candidate(&self, msg: usize, index: usize) -> &[usize] {
        self.word(msg, index)
    }
}

impl Codebook for MacCodebook {
    fn num_messages(&self) -> usize {
        MacCodebook::num_messages(self)
    }
    fn words_per_message(&self) -> usize {
        1
    }
    fn block_len(&self) -> usize {
        self.n2
    }
    fn candidate(&self, msg: usize, _index: usize) -> &[usize] {
        self.word(msg)
    }
}

/// Exhaustive joint ML decoding of a Bob block: maximizes the product of
/// p_Y(y_t | x1_t, x2_t) over all candidate pairs.  Likelihoods are direct
/// probability products (no logs), so exact ties stay exact and resolve to
/// the lowest (msg1, msg2) in lexicographic order.
pub fn decode_ml<A: Codebook, B: Codebook>(
    spec: &ChannelSpec,
    y: &[usize],
    book1: &A,
    book2: &B,
    budget: u64,
) -> Result<(u64, u64)> {
    let n = book1.block_len();
    if book2.block_len() != n || y.len() != n {
        return Err(Error::DimensionMismatch {
            context: "decode block",
            expected: n,
            got: y.len(),
        });
    }
    let candidates = book1.num_messages() as u128
        * book1.words_per_message() as u128
        * book2.num_messages() as u128
        * book2.words_per_message() as u128;
    if candidates > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: candidates,
            budget,
        });
    }

    let [s1, s2, sy, _] = spec.sizes();
    let mut py = vec![0.0; s1 * s2 * sy];
    for x1 in 0..s1 {
        for x2 in 0..s2 {
            for yy in 0..sy {
                py[(x1 * s2 + x2) * sy + yy] = spec.bob_marginal(x1, x2, yy)?;
            }
        }
    }
    for &yy in y {
        if yy >= sy {
            return Err(Error::IndexOutOfRange {
                context: "y",
                index: yy,
                size: sy,
            });
        }
    }

    let mut best = (0u64, 0u64);
    let mut best_score = -1.0f64;
    for m1 in 0..book1.num_messages() {
        for m2 in 0..book2.num_messages() {
            for j1 in 0..book1.words_per_message() {
                let c1 = book1.candidate(m1, j1);
                for j2 in 0..book2.words_per_message() {
                    let c2 = book2.candidate(m2, j2);
                    let mut score = 1.0;
                    for t in 0..n {
                        score *= py[(c1[t] * s2 + c2[t]) * sy + y[t]];
                        if score == 0.0 {
                            break;
                        }
                    }
                    if score > best_score {
                        best_score = score;
                        best = (m1 as u64, m2 as u64);
                    }
                }
            }
        }
    }
    Ok(best)
}
