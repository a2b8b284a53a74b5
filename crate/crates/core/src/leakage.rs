//! Secrecy measurement: exact brute-force leakage mutual informations at
//! tiny scale, and a Monte Carlo plug-in estimator when enumeration does
//! not fit the budget.  Bob's outputs never enter these quantities and are
//! marginalized away from the start.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use rand::Rng;
use serde::Serialize;

use crate::channel::{sample_index, ChannelSpec, InputPair};
use crate::coding::{MacCodebook, WiretapCodebook};
use crate::error::{Error, Result};
use crate::info::JointPmf;
use crate::protocol::{domain, slot_books, stream_rng, SlotConfig, PURPOSE_MC};

const LN_2: f64 = std::f64::consts::LN_2;

/// A stochastic encoder flattened to enumerable form: for each message,
/// the list of possible codewords with their conditional probabilities.
#[derive(Debug, Clone)]
pub struct EncoderTable {
    pub msg_bits: u32,
    pub n: usize,
    alphabet: usize,
    entries: Vec<Vec<(Vec<usize>, f64)>>,
}

impl EncoderTable {
    /// Wiretap encoder: each bin member with probability 1/bin_size.
    pub fn from_wiretap(book: &WiretapCodebook) -> Self {
        let p = 1.0 / book.bin_size() as f64;
        let entries = (0..book.num_bins())
            .map(|b| {
                (0..book.bin_size())
                    .map(|j| (book.word(b, j).to_vec(), p))
                    .collect()
            })
            .collect();
        Self {
            msg_bits: book.msg_bits,
            n: book.n1,
            alphabet: book.alphabet(),
            entries,
        }
    }

    /// Deterministic MAC encoder: one word per message.
    pub fn from_mac(book: &MacCodebook) -> Self {
        let entries = (0..book.num_messages())
            .map(|m| vec![(book.word(m).to_vec(), 1.0)])
            .collect();
        Self {
            msg_bits: book.msg_bits,
            n: book.n2,
            alphabet: book.alphabet(),
            entries,
        }
    }

    /// Keyed MAC encoder with a fresh uniform key of the message width:
    /// message w maps to word(w xor key) for every equally likely key.
    pub fn from_mac_with_fresh_key(book: &MacCodebook) -> Self {
        let count = book.num_messages();
        let p = 1.0 / count as f64;
        let entries = (0..count)
            .map(|m| (0..count).map(|key| (book.word(m ^ key).to_vec(), p)).collect())
            .collect();
        Self {
            msg_bits: book.msg_bits,
            n: book.n2,
            alphabet: book.alphabet(),
            entries,
        }
    }

    pub fn num_messages(&self) -> usize {
        1usize << self.msg_bits
    }

    pub fn entries(&self, msg: usize) -> &[(Vec<usize>, f64)] {
        &self.entries[msg]
    }

    fn total_entries(&self) -> usize {
        self.entries.iter().map(|e| e.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMethod {
    Exact,
    MonteCarlo,
}

impl std::fmt::Display for LeakageMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LeakageMethod::Exact => write!(f, "exact"),
            LeakageMethod::MonteCarlo => write!(f, "monte_carlo"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LeakageReport {
    pub label: String,
    pub bits: f64,
    pub method: LeakageMethod,
    /// Enumeration size for exact results, sample count for Monte Carlo.
    pub states: u64,
    pub fingerprint: String,
    /// H(W) for the measured message set: the hard upper bound.
    pub message_entropy: f64,
    /// bits / (2·n1): the per-use slack normalization.
    pub epsilon_hat: f64,
    /// Uncorrected plug-in estimate (Monte Carlo only).
    pub raw_bits: Option<f64>,
    /// Delete-1 jackknife spread (Monte Carlo only).
    pub spread: Option<f64>,
}

/// p(z | x1, x2) with fast row access.
struct EveTable {
    s2: usize,
    nz: usize,
    probs: Vec<f64>,
}

impl EveTable {
    fn new(spec: &ChannelSpec) -> Result<Self> {
        let [s1, s2, _, nz] = spec.sizes();
        let mut probs = vec![0.0; s1 * s2 * nz];
        for x1 in 0..s1 {
            for x2 in 0..s2 {
                for z in 0..nz {
                    probs[(x1 * s2 + x2) * nz + z] = spec.eve_marginal(x1, x2, z)?;
                }
            }
        }
        Ok(Self { s2, nz, probs })
    }

    #[inline]
    fn row(&self, x1: usize, x2: usize) -> &[f64] {
        let base = (x1 * self.s2 + x2) * self.nz;
        &self.probs[base..base + self.nz]
    }
}

/// Expands Π_t p(z_t | pair_t) into a dense distribution over flattened
/// z-sequences (first use most significant).
fn z_sequence_dist(eve: &EveTable, pairs: &[(usize, usize)]) -> Vec<f64> {
    let mut dist = vec![1.0];
    for &(x1, x2) in pairs {
        let row = eve.row(x1, x2);
        let mut next = vec![0.0; dist.len() * eve.nz];
        for (i, &d) in dist.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let base = i * eve.nz;
            for (z, &pz) in row.iter().enumerate() {
                next[base + z] = d * pz;
            }
        }
        dist = next;
    }
    dist
}

fn checked_pow(base: usize, exp: usize, context: &'static str) -> Result<u128> {
    (base as u128)
        .checked_pow(exp as u32)
        .ok_or(Error::SizeOverflow {
            context,
            size: u128::MAX,
        })
}

/// Exact I(W1, W2; Z^n) for one coded block.
pub fn exact_slot_leakage(
    spec: &ChannelSpec,
    enc1: &EncoderTable,
    enc2: &EncoderTable,
    budget: u64,
) -> Result<LeakageReport> {
    let n = enc1.n;
    if enc2.n != n {
        return Err(Error::DimensionMismatch {
            context: "encoder block length",
            expected: n,
            got: enc2.n,
        });
    }
    let nz = spec.sizes()[3];
    let zs_big = checked_pow(nz, n, "z sequence space")?;
    let pairs = enc1.total_entries() as u128 * enc2.total_entries() as u128;
    let states = pairs * zs_big;
    let w_size = (enc1.num_messages() * enc2.num_messages()) as u128;
    let tensor = w_size * zs_big;
    for needed in [states, tensor] {
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded { needed, budget });
        }
    }
    let zs = zs_big as usize;
    let w2 = enc2.num_messages();
    let eve = EveTable::new(spec)?;

    let mut mass = vec![0.0; w_size as usize * zs];
    let msg_weight = 1.0 / w_size as f64;
    for m1 in 0..enc1.num_messages() {
        for (c1, p1) in enc1.entries(m1) {
            for m2 in 0..w2 {
                for (c2, p2) in enc2.entries(m2) {
                    let weight = msg_weight * p1 * p2;
                    let pairs_t: Vec<(usize, usize)> =
                        c1.iter().zip(c2.iter()).map(|(&a, &b)| (a, b)).collect();
                    let dist = z_sequence_dist(&eve, &pairs_t);
                    let base = (m1 * w2 + m2) * zs;
                    for (zf, &p) in dist.iter().enumerate() {
                        mass[base + zf] += weight * p;
                    }
                }
            }
        }
    }
    let pmf = JointPmf::new(vec![("w", w_size as usize), ("z", zs)], mass)?;
    let bits = pmf.mutual_information(&["w"], &["z"])?;
    let h_w = (enc1.msg_bits + enc2.msg_bits) as f64;
    Ok(LeakageReport {
        label: "I(W1,W2;Z^n)".into(),
        bits,
        method: LeakageMethod::Exact,
        states: states as u64,
        fingerprint: format!(
            "slot:ch={};n={n};bits={}+{};entries={}x{}",
            spec.name().unwrap_or("anon"),
            enc1.msg_bits,
            enc2.msg_bits,
            enc1.total_entries(),
            enc2.total_entries()
        ),
        message_entropy: h_w,
        epsilon_hat: bits / (2.0 * n as f64),
        raw_bits: None,
        spread: None,
    })
}

/// Exact I(W_i; Z^n | X_ī^n): the conditioning axis is the other user's
/// transmitted codeword, flattened to one value per sequence.
pub fn exact_conditional_leakage(
    spec: &ChannelSpec,
    enc1: &EncoderTable,
    enc2: &EncoderTable,
    user: u8,
    budget: u64,
) -> Result<LeakageReport> {
    if user != 1 && user != 2 {
        return Err(Error::InvalidConfig(format!("user must be 1 or 2, got {user}")));
    }
    let n = enc1.n;
    if enc2.n != n {
        return Err(Error::DimensionMismatch {
            context: "encoder block length",
            expected: n,
            got: enc2.n,
        });
    }
    let (enc_w, enc_x) = if user == 1 { (enc1, enc2) } else { (enc2, enc1) };
    let nz = spec.sizes()[3];
    let zs_big = checked_pow(nz, n, "z sequence space")?;
    let xs_big = checked_pow(enc_x.alphabet, n, "conditioning sequence space")?;
    let pairs = enc1.total_entries() as u128 * enc2.total_entries() as u128;
    let states = pairs * zs_big;
    let tensor = enc_w.num_messages() as u128 * xs_big * zs_big;
    for needed in [states, tensor] {
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded { needed, budget });
        }
    }
    let zs = zs_big as usize;
    let xs = xs_big as usize;
    let eve = EveTable::new(spec)?;

    let w_count = enc_w.num_messages();
    let msg_weight = 1.0 / (w_count * enc_x.num_messages()) as f64;
    let mut mass = vec![0.0; w_count * xs * zs];
    for mw in 0..w_count {
        for (cw, pw) in enc_w.entries(mw) {
            for mx in 0..enc_x.num_messages() {
                for (cx, px) in enc_x.entries(mx) {
                    let weight = msg_weight * pw * px;
                    let xflat = cx.iter().fold(0usize, |acc, &s| acc * enc_x.alphabet + s);
                    // Channel order is (x1, x2) regardless of which user
                    // carries the measured message.
                    let pairs_t: Vec<(usize, usize)> = if user == 1 {
                        cw.iter().zip(cx.iter()).map(|(&a, &b)| (a, b)).collect()
                    } else {
                        cx.iter().zip(cw.iter()).map(|(&a, &b)| (a, b)).collect()
                    };
                    let dist = z_sequence_dist(&eve, &pairs_t);
                    let base = (mw * xs + xflat) * zs;
                    for (zf, &p) in dist.iter().enumerate() {
                        mass[base + zf] += weight * p;
                    }
                }
            }
        }
    }
    let pmf = JointPmf::new(vec![("w", w_count), ("x", xs), ("z", zs)], mass)?;
    let bits = pmf.conditional_mutual_information(&["w"], &["z"], &["x"])?;
    let h_w = enc_w.msg_bits as f64;
    let label = if user == 1 {
        "I(W1;Z^n|X2^n)"
    } else {
        "I(W2;Z^n|X1^n)"
    };
    Ok(LeakageReport {
        label: label.into(),
        bits,
        method: LeakageMethod::Exact,
        states: states as u64,
        fingerprint: format!(
            "cond:ch={};n={n};user={user};bits={}",
            spec.name().unwrap_or("anon"),
            enc_w.msg_bits
        ),
        message_entropy: h_w,
        epsilon_hat: bits / (2.0 * n as f64),
        raw_bits: None,
        spread: None,
    })
}

/// Per-slot, per-user enumerable encoders for the multislot walk.
struct SlotTables {
    part1: [EncoderTable; 2],
    part2: [Option<EncoderTable>; 2],
    mac: [Option<MacCodebook>; 2],
    widths: [[u32; 2]; 2],
}

fn multislot_tables(
    spec: &ChannelSpec,
    inputs: &InputPair,
    config: &SlotConfig,
    k: u32,
) -> Result<Vec<SlotTables>> {
    let mut out = Vec::with_capacity(k as usize);
    for slot in 1..=k {
        let books = slot_books(spec, inputs, config, slot)?;
        let plan = &config.slots[(slot - 1) as usize];
        let part1 = [
            EncoderTable::from_wiretap(&books.wiretap[0]),
            EncoderTable::from_wiretap(&books.wiretap[1]),
        ];
        let part2 = [
            books.mac[0].as_ref().map(EncoderTable::from_mac),
            books.mac[1].as_ref().map(EncoderTable::from_mac),
        ];
        out.push(SlotTables {
            part1,
            part2,
            mac: books.mac,
            widths: [plan.wiretap_bits, plan.keyed_bits],
        });
    }
    Ok(out)
}

/// Exact I(W̄_l; Z_1..Z_k): enumerates every message and randomization
/// choice in slots 1..k, chaining XOR keys exactly as the protocol does,
/// and marginalizes everything but slot l's messages and Eve's outputs.
pub fn exact_multislot_leakage(
    spec: &ChannelSpec,
    inputs: &InputPair,
    config: &SlotConfig,
    l_target: u32,
    k: u32,
) -> Result<LeakageReport> {
    config.validate()?;
    if k < 1 || k > config.num_slots {
        return Err(Error::InvalidSlot(k as usize));
    }
    if l_target < 1 || l_target > k {
        return Err(Error::InvalidSlot(l_target as usize));
    }
    let budget = config.budget;
    let tables = multislot_tables(spec, inputs, config, k)?;

    // Enumeration dimensions, slot-major; part-1 dims enumerate (message,
    // bin index) jointly through the entry list.
    let mut dims: Vec<usize> = Vec::new();
    for t in &tables {
        for user in 0..2 {
            dims.push(t.part1[user].total_entries().max(1));
        }
        for user in 0..2 {
            if let Some(p2) = &t.part2[user] {
                dims.push(p2.num_messages());
            }
        }
    }
    let assignments: u128 = dims.iter().map(|&d| d as u128).product();

    let n_total =
        config.n1 + (k.saturating_sub(1) as usize) * (config.n1 + config.n2);
    let nz = spec.sizes()[3];
    let zs_big = checked_pow(nz, n_total, "multislot z space")?;
    let wl_bits: u32 = {
        let w = &tables[(l_target - 1) as usize].widths;
        w[0][0] + w[0][1] + w[1][0] + w[1][1]
    };
    let wl_size = 1u128 << wl_bits;
    let states = assignments * zs_big;
    let tensor = wl_size * zs_big;
    for needed in [states, tensor] {
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded { needed, budget });
        }
    }
    let zs = zs_big as usize;
    let eve = EveTable::new(spec)?;
    let weight = 1.0 / assignments as f64;

    let mut mass = vec![0.0; wl_size as usize * zs];
    let mut digits = vec![0usize; dims.len()];
    let mut counter: u128 = 0;
    while counter < assignments {
        // Decode the assignment into per-slot choices.
        {
            let mut rem = counter;
            for (i, &d) in dims.iter().enumerate().rev() {
                digits[i] = (rem % d as u128) as usize;
                rem /= d as u128;
            }
        }
        let mut digit_idx = 0;
        let mut pairs_t: Vec<(usize, usize)> = Vec::with_capacity(n_total);
        let mut prev_total: [u64; 2] = [0, 0];
        let mut prev_width: [u32; 2] = [0, 0];
        let mut wl_value: u64 = 0;
        let mut entry_weight = 1.0;

        for (slot_idx, t) in tables.iter().enumerate() {
            let mut words1: [&[usize]; 2] = [&[], &[]];
            let mut msgs1: [u64; 2] = [0, 0];
            for user in 0..2 {
                let table = &t.part1[user];
                let flat = digits[digit_idx];
                digit_idx += 1;
                // flat walks (message, entry) pairs in order.
                let per = table.entries(0).len().max(1);
                let (m, e) = (flat / per, flat % per);
                let (word, p) = &table.entries(m)[e];
                words1[user] = word;
                msgs1[user] = m as u64;
                entry_weight *= p * per as f64; // uniform entries: cancels to 1
            }
            let mut words2: [Option<&[usize]>; 2] = [None, None];
            let mut msgs2: [u64; 2] = [0, 0];
            let has_part2 = t.part2[0].is_some();
            if has_part2 {
                for user in 0..2 {
                    let w2 = t.widths[1][user];
                    let mac = t.mac[user].as_ref().expect("mac book");
                    let m2 = if w2 > 0 {
                        let m = digits[digit_idx];
                        digit_idx += 1;
                        m as u64
                    } else {
                        digit_idx += 1;
                        0
                    };
                    msgs2[user] = m2;
                    let xored = if w2 > 0 {
                        let prefix = prev_total[user] >> (prev_width[user] - w2);
                        m2 ^ prefix
                    } else {
                        0
                    };
                    words2[user] = Some(mac.word(xored as usize));
                }
            }

            for (&a, &b) in words1[0].iter().zip(words1[1]) {
                pairs_t.push((a, b));
            }
            if let (Some(a), Some(b)) = (words2[0], words2[1]) {
                for (&a, &b) in a.iter().zip(b) {
                    pairs_t.push((a, b));
                }
            }

            let w = &t.widths;
            for user in 0..2 {
                prev_total[user] = (msgs1[user] << w[1][user]) | msgs2[user];
                prev_width[user] = w[0][user] + w[1][user];
            }
            if slot_idx as u32 == l_target - 1 {
                let u0 = (msgs1[0] << w[1][0]) | msgs2[0];
                let u1 = (msgs1[1] << w[1][1]) | msgs2[1];
                wl_value = (u0 << (w[0][1] + w[1][1])) | u1;
            }
        }

        let dist = z_sequence_dist(&eve, &pairs_t);
        let base = wl_value as usize * zs;
        let wgt = weight * entry_weight;
        for (zf, &p) in dist.iter().enumerate() {
            mass[base + zf] += wgt * p;
        }
        counter += 1;
    }

    let pmf = JointPmf::new(vec![("w", wl_size as usize), ("z", zs)], mass)?;
    let bits = pmf.mutual_information(&["w"], &["z"])?;
    Ok(LeakageReport {
        label: format!("I(W_{l_target};Z_1..Z_{k})"),
        bits,
        method: LeakageMethod::Exact,
        states: states as u64,
        fingerprint: format!(
            "ms:ch={};seed={};l={l_target};k={k};n1={};n2={}",
            spec.name().unwrap_or("anon"),
            config.seed,
            config.n1,
            config.n2
        ),
        message_entropy: wl_bits as f64,
        epsilon_hat: bits / (2.0 * config.n1 as f64),
        raw_bits: None,
        spread: None,
    })
}

/// Sparse-histogram mutual information with Miller-Madow correction and a
/// delete-1 jackknife spread (grouped by occupied cell).
fn histogram_mi<A, B>(counts: &HashMap<(A, B), u64>) -> (f64, f64, f64)
where
    A: Eq + Hash + Copy + Ord,
    B: Eq + Hash + Copy + Ord,
{
    // Fixed summation order keeps repeated runs bit-identical.
    let mut cells: Vec<((A, B), u64)> = counts.iter().map(|(&k, &c)| (k, c)).collect();
    cells.sort_unstable_by_key(|&(k, _)| k);
    let total: u64 = cells.iter().map(|&(_, c)| c).sum();
    let n = total as f64;
    let mut ca: BTreeMap<A, u64> = BTreeMap::new();
    let mut cb: BTreeMap<B, u64> = BTreeMap::new();
    for &((a, b), c) in &cells {
        *ca.entry(a).or_insert(0) += c;
        *cb.entry(b).or_insert(0) += c;
    }
    fn xlog2(c: u64) -> f64 {
        if c == 0 {
            0.0
        } else {
            let c = c as f64;
            c * c.log2()
        }
    }
    let s_ab: f64 = cells.iter().map(|&(_, c)| xlog2(c)).sum();
    let s_a: f64 = ca.values().map(|&c| xlog2(c)).sum();
    let s_b: f64 = cb.values().map(|&c| xlog2(c)).sum();
    let h = |s: f64| n.log2() - s / n;
    let plugin = (h(s_a) + h(s_b) - h(s_ab)).max(0.0);

    let (ma, mb, mab) = (ca.len() as f64, cb.len() as f64, cells.len() as f64);
    let corrected = plugin + (ma + mb - mab - 1.0) / (2.0 * n * LN_2);

    // Delete-1 estimates only depend on which cell the deleted sample
    // occupied; update the three log-sums analytically per cell.
    let mut spread = 0.0;
    if total >= 2 {
        let n1 = n - 1.0;
        let mut thetas: Vec<(f64, f64)> = Vec::with_capacity(cells.len());
        for &((a, b), c) in &cells {
            let sa = s_a - xlog2(ca[&a]) + xlog2(ca[&a] - 1);
            let sb = s_b - xlog2(cb[&b]) + xlog2(cb[&b] - 1);
            let sab = s_ab - xlog2(c) + xlog2(c - 1);
            let hh = |s: f64| n1.log2() - s / n1;
            let theta = hh(sa) + hh(sb) - hh(sab);
            thetas.push((c as f64, theta));
        }
        let mean: f64 = thetas.iter().map(|&(c, t)| c * t).sum::<f64>() / n;
        let var: f64 = thetas
            .iter()
            .map(|&(c, t)| c * (t - mean) * (t - mean))
            .sum::<f64>()
            * (n1 / n);
        spread = var.max(0.0).sqrt();
    }
    (plugin, corrected, spread)
}

/// Monte Carlo counterpart of [`exact_slot_leakage`]: plug-in estimate of
/// I(W1, W2; Z^n) from sampled protocol blocks.
pub fn mc_leakage(
    spec: &ChannelSpec,
    enc1: &EncoderTable,
    enc2: &EncoderTable,
    samples: u64,
    seed: u64,
) -> Result<LeakageReport> {
    if samples < 1000 {
        return Err(Error::InvalidConfig(format!(
            "samples = {samples} below the 10^3 floor"
        )));
    }
    let n = enc1.n;
    if enc2.n != n {
        return Err(Error::DimensionMismatch {
            context: "encoder block length",
            expected: n,
            got: enc2.n,
        });
    }
    let nz = spec.sizes()[3];
    if checked_pow(nz, n, "z sequence space")? > u64::MAX as u128 {
        return Err(Error::SizeOverflow {
            context: "z sequence space",
            size: u128::MAX,
        });
    }
    let eve = EveTable::new(spec)?;
    let mut rng = stream_rng(seed, domain(0, 0, 0, PURPOSE_MC));
    let mut counts: HashMap<(u64, u64), u64> = HashMap::new();
    let w2 = enc2.num_messages() as u64;
    for _ in 0..samples {
        let m1 = rng.random_range(0..enc1.num_messages() as u64);
        let m2 = rng.random_range(0..w2);
        let pick = |table: &EncoderTable, m: u64, rng: &mut rand_chacha::ChaCha12Rng| {
            let entries = table.entries(m as usize);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (word, p) in entries {
                acc += p;
                if u < acc {
                    return word.clone();
                }
            }
            entries.last().expect("nonempty entries").0.clone()
        };
        let c1 = pick(enc1, m1, &mut rng);
        let c2 = pick(enc2, m2, &mut rng);
        let mut zflat = 0u64;
        for t in 0..n {
            let z = sample_index(eve.row(c1[t], c2[t]), &mut rng);
            zflat = zflat * nz as u64 + z as u64;
        }
        *counts.entry((m1 * w2 + m2, zflat)).or_insert(0) += 1;
    }
    let (plugin, corrected, spread) = histogram_mi(&counts);
    let h_w = (enc1.msg_bits + enc2.msg_bits) as f64;
    let bits = corrected.max(0.0);
    Ok(LeakageReport {
        label: "I(W1,W2;Z^n)".into(),
        bits,
        method: LeakageMethod::MonteCarlo,
        states: samples,
        fingerprint: format!(
            "mc-slot:ch={};n={n};seed={seed};samples={samples}",
            spec.name().unwrap_or("anon")
        ),
        message_entropy: h_w,
        epsilon_hat: bits / (2.0 * n as f64),
        raw_bits: Some(plugin),
        spread: Some(spread),
    })
}

/// Monte Carlo estimate of I(W̄_l; Z_1..Z_k) by forward-simulating the
/// protocol's sender side (no decoding).
pub fn mc_multislot_leakage(
    spec: &ChannelSpec,
    inputs: &InputPair,
    config: &SlotConfig,
    l_target: u32,
    k: u32,
    samples: u64,
) -> Result<LeakageReport> {
    config.validate()?;
    if samples < 1000 {
        return Err(Error::InvalidConfig(format!(
            "samples = {samples} below the 10^3 floor"
        )));
    }
    if k < 1 || k > config.num_slots {
        return Err(Error::InvalidSlot(k as usize));
    }
    if l_target < 1 || l_target > k {
        return Err(Error::InvalidSlot(l_target as usize));
    }
    let tables = multislot_tables(spec, inputs, config, k)?;
    let nz = spec.sizes()[3] as u128;
    let eve = EveTable::new(spec)?;
    let mut rng = stream_rng(config.seed, domain(k, l_target, 0, PURPOSE_MC));
    let mut counts: HashMap<(u64, u128), u64> = HashMap::new();

    for _ in 0..samples {
        let mut prev_total: [u64; 2] = [0, 0];
        let mut prev_width: [u32; 2] = [0, 0];
        let mut wl_value = 0u64;
        let mut zflat: u128 = 0;
        for (slot_idx, t) in tables.iter().enumerate() {
            let mut words1: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
            let mut msgs1 = [0u64; 2];
            for user in 0..2 {
                let table = &t.part1[user];
                let m = rng.random_range(0..table.num_messages() as u64);
                let entries = table.entries(m as usize);
                let j = rng.random_range(0..entries.len());
                msgs1[user] = m;
                words1[user] = entries[j].0.clone();
            }
            let mut words2: [Option<Vec<usize>>; 2] = [None, None];
            let mut msgs2 = [0u64; 2];
            if t.part2[0].is_some() {
                for user in 0..2 {
                    let w2 = t.widths[1][user];
                    let mac = t.mac[user].as_ref().expect("mac book");
                    let m2 = if w2 > 0 {
                        rng.random_range(0..(1u64 << w2))
                    } else {
                        0
                    };
                    msgs2[user] = m2;
                    let xored = if w2 > 0 {
                        m2 ^ (prev_total[user] >> (prev_width[user] - w2))
                    } else {
                        0
                    };
                    words2[user] = Some(mac.word(xored as usize).to_vec());
                }
            }
            for (&a, &b) in words1[0].iter().zip(words1[1].iter()) {
                let z = sample_index(eve.row(a, b), &mut rng);
                zflat = zflat * nz + z as u128;
            }
            if let (Some(a), Some(b)) = (&words2[0], &words2[1]) {
                for (&a, &b) in a.iter().zip(b.iter()) {
                    let z = sample_index(eve.row(a, b), &mut rng);
                    zflat = zflat * nz + z as u128;
                }
            }
            let w = &t.widths;
            for user in 0..2 {
                prev_total[user] = (msgs1[user] << w[1][user]) | msgs2[user];
                prev_width[user] = w[0][user] + w[1][user];
            }
            if slot_idx as u32 == l_target - 1 {
                let u0 = (msgs1[0] << w[1][0]) | msgs2[0];
                let u1 = (msgs1[1] << w[1][1]) | msgs2[1];
                wl_value = (u0 << (w[0][1] + w[1][1])) | u1;
            }
        }
        *counts.entry((wl_value, zflat)).or_insert(0) += 1;
    }

    let (plugin, corrected, spread) = histogram_mi(&counts);
    let wl_bits = {
        let w = &tables[(l_target - 1) as usize].widths;
        (w[0][0] + w[0][1] + w[1][0] + w[1][1]) as f64
    };
    let bits = corrected.max(0.0);
    Ok(LeakageReport {
        label: format!("I(W_{l_target};Z_1..Z_{k})"),
        bits,
        method: LeakageMethod::MonteCarlo,
        states: samples,
        fingerprint: format!(
            "mc-ms:ch={};seed={};l={l_target};k={k};samples={samples}",
            spec.name().unwrap_or("anon"),
            config.seed
        ),
        message_entropy: wl_bits,
        epsilon_hat: bits / (2.0 * config.n1 as f64),
        raw_bits: Some(plugin),
        spread: Some(spread),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub l: u32,
    pub k: u32,
    pub report: LeakageReport,
}

/// I(W̄_l; Z_1..Z_k) for every l ≤ k ≤ num_slots: exact when the state
/// space fits the config budget, Monte Carlo otherwise.
pub fn audit(
    spec: &ChannelSpec,
    inputs: &InputPair,
    config: &SlotConfig,
    mc_samples: u64,
) -> Result<Vec<AuditEntry>> {
    let mut out = Vec::new();
    for k in 1..=config.num_slots {
        for l in 1..=k {
            let report = match exact_multislot_leakage(spec, inputs, config, l, k) {
                Ok(r) => r,
                Err(Error::BudgetExceeded { .. }) | Err(Error::SizeOverflow { .. }) => {
                    mc_multislot_leakage(spec, inputs, config, l, k, mc_samples)?
                }
                Err(e) => return Err(e),
            };
            out.push(AuditEntry { l, k, report });
        }
    }
    Ok(out)
}
