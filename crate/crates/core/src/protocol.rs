//! The slotted key-recycling protocol: slot 1 is pure wiretap coding over
//! n1 uses; every later slot adds an n2-use keyed part whose message is
//! XORed with the previous slot's full message before MAC encoding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSpec, InputPair};
use crate::coding::{
    build_mac_with, build_wiretap_with, decode_ml, encode_mac, encode_wiretap, CollisionPolicy,
    MacCodebook, Message, WiretapCodebook,
};
use crate::error::{Error, Result};
use crate::regions::{ceil_snapped, floor_snapped, mutual_rates, slot_schedule};

/// Default cap on any exhaustive enumeration (decoder candidates, codebook
/// cells, leakage states).
pub const DEFAULT_BUDGET: u64 = 1 << 24;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent deterministic generator for one (root seed, domain) pair.
pub fn stream_rng(root: u64, domain: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(splitmix64(root ^ splitmix64(domain.wrapping_mul(0xD134_2543_DE82_EF95))))
}

pub(crate) const PURPOSE_BOOK: u64 = 0;
pub(crate) const PURPOSE_MSG: u64 = 1;
pub(crate) const PURPOSE_ENCODE: u64 = 2;
pub(crate) const PURPOSE_CHANNEL: u64 = 3;
pub(crate) const PURPOSE_MC: u64 = 4;

/// Packs (slot, user, part, purpose) into a stream domain.
pub(crate) fn domain(slot: u32, user: u32, part: u32, purpose: u64) -> u64 {
    ((slot as u64) << 16) | ((user as u64) << 8) | ((part as u64) << 4) | purpose
}

/// Integer-bit widths for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotPlan {
    pub wiretap_bits: [u32; 2],
    pub keyed_bits: [u32; 2],
    /// True when integer truncation of the schedule wanted a wider keyed
    /// part than the previous slot's key could cover.
    pub key_deficit: [bool; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotConfig {
    pub n1: usize,
    pub n2: usize,
    pub l: u64,
    pub num_slots: u32,
    /// Within-bin randomization bits per user for every wiretap part.
    pub rand_bits: [u32; 2],
    pub seed: u64,
    pub budget: u64,
    /// slots[k-1] describes slot k.
    pub slots: Vec<SlotPlan>,
}

impl SlotConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n1 < 1 {
            return Err(Error::InvalidConfig("n1 must be at least 1".into()));
        }
        if self.l < 1 {
            return Err(Error::InvalidConfig("l must be at least 1".into()));
        }
        let n2 = (self.l as usize)
            .checked_mul(self.n1)
            .ok_or(Error::SizeOverflow {
                context: "n2 = l*n1",
                size: self.l as u128 * self.n1 as u128,
            })?;
        if self.n2 != n2 {
            return Err(Error::InvalidConfig(format!(
                "n2 = {} but l*n1 = {n2}",
                self.n2
            )));
        }
        if self.num_slots as usize != self.slots.len() || self.slots.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "{} slot plans for num_slots = {}",
                self.slots.len(),
                self.num_slots
            )));
        }
        if self.slots[0].keyed_bits != [0, 0] {
            return Err(Error::InvalidConfig(
                "slot 1 must not have a keyed part".into(),
            ));
        }
        if self.budget < 1 {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        for (idx, plan) in self.slots.iter().enumerate() {
            for user in 0..2 {
                let total = plan.wiretap_bits[user] + plan.keyed_bits[user];
                if total > 48 || plan.wiretap_bits[user] + self.rand_bits[user] > 32 {
                    return Err(Error::SizeOverflow {
                        context: "slot message bits",
                        size: total as u128,
                    });
                }
                if idx > 0 {
                    let prev = &self.slots[idx - 1];
                    let key_bits = prev.wiretap_bits[user] + prev.keyed_bits[user];
                    if plan.keyed_bits[user] > key_bits {
                        return Err(Error::InvalidConfig(format!(
                            "slot {}: user {} keyed width {} exceeds key bits {key_bits}",
                            idx + 1,
                            user + 1,
                            plan.keyed_bits[user]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Everything that must match for traces to be poolable: the whole
    /// config except the seed.
    pub fn shape(&self) -> SlotConfig {
        SlotConfig {
            seed: 0,
            ..self.clone()
        }
    }
}

/// Integer-bit realization of the rate schedule.
///
/// Wiretap widths are ⌊n1·cap⌋; keyed widths are ⌊n2·rate_k⌋ clipped to
/// the bits the previous slot actually delivered (the clip is flagged as
/// a key deficit, not an error).  Randomization defaults to ⌈n1·I(Xi;Z)⌉
/// bits per user.
pub fn plan(
    spec: &ChannelSpec,
    inputs: &InputPair,
    n1: usize,
    l: u64,
    num_slots: u32,
    seed: u64,
    budget: u64,
) -> Result<SlotConfig> {
    if l < 1 {
        return Err(Error::InvalidConfig("l must be at least 1".into()));
    }
    if n1 < 1 {
        return Err(Error::InvalidConfig("n1 must be at least 1".into()));
    }
    if num_slots < 1 {
        return Err(Error::InvalidConfig("num_slots must be at least 1".into()));
    }
    let schedule = slot_schedule(spec, inputs, num_slots, l)?;
    let rates = mutual_rates(spec, inputs)?;
    let n2 = (l as usize).checked_mul(n1).ok_or(Error::SizeOverflow {
        context: "n2 = l*n1",
        size: l as u128 * n1 as u128,
    })?;

    let wiretap_bits = [
        floor_snapped(n1 as f64 * schedule.secrecy.cap1) as u32,
        floor_snapped(n1 as f64 * schedule.secrecy.cap2) as u32,
    ];
    if wiretap_bits[0] == 0 || wiretap_bits[1] == 0 {
        return Err(Error::InvalidConfig(format!(
            "n1 = {n1} gives a zero-width wiretap part (caps {:.4}, {:.4}); increase n1",
            schedule.secrecy.cap1, schedule.secrecy.cap2
        )));
    }
    let rand_bits = [
        ceil_snapped(n1 as f64 * rates.leak1) as u32,
        ceil_snapped(n1 as f64 * rates.leak2) as u32,
    ];

    let mut slots: Vec<SlotPlan> = Vec::with_capacity(num_slots as usize);
    for k in 1..=num_slots {
        let mut keyed_bits = [0u32; 2];
        let mut key_deficit = [false; 2];
        if k >= 2 {
            let row = &schedule.per_slot[(k - 1) as usize];
            let prev = &slots[(k - 2) as usize];
            for (user, rate) in [(0usize, row.keyed1), (1usize, row.keyed2)] {
                let target = floor_snapped(n2 as f64 * rate) as u32;
                let available = prev.wiretap_bits[user] + prev.keyed_bits[user];
                if target > available {
                    keyed_bits[user] = available;
                    key_deficit[user] = true;
                } else {
                    keyed_bits[user] = target;
                }
            }
        }
        slots.push(SlotPlan {
            wiretap_bits,
            keyed_bits,
            key_deficit,
        });
    }

    let config = SlotConfig {
        n1,
        n2,
        l,
        num_slots,
        rand_bits,
        seed,
        budget,
        slots,
    };
    config.validate()?;

    // Enumeration budgets for codebooks and decoding, checked up front.
    for plan in &config.slots {
        let book1 = (1u128 << (plan.wiretap_bits[0] + rand_bits[0])) * n1 as u128;
        let book2 = (1u128 << (plan.wiretap_bits[1] + rand_bits[1])) * n1 as u128;
        let decode1 = 1u128 << (plan.wiretap_bits[0] + rand_bits[0] + plan.wiretap_bits[1] + rand_bits[1]);
        let mac1 = (1u128 << plan.keyed_bits[0]) * n2 as u128;
        let mac2 = (1u128 << plan.keyed_bits[1]) * n2 as u128;
        let decode2 = 1u128 << (plan.keyed_bits[0] + plan.keyed_bits[1]);
        for needed in [book1, book2, decode1, mac1, mac2, decode2] {
            if needed > budget as u128 {
                return Err(Error::BudgetExceeded { needed, budget });
            }
        }
    }
    Ok(config)
}

pub struct SlotBooks {
    pub wiretap: [WiretapCodebook; 2],
    /// None in slot 1; slots with a zero keyed width still get a one-word
    /// dummy book so both senders drive the channel.
    pub mac: [Option<MacCodebook>; 2],
}

/// Codebooks for one slot, freshly derived from (seed, slot, user, part).
pub fn slot_books(
    spec: &ChannelSpec,
    inputs: &InputPair,
    config: &SlotConfig,
    slot: u32,
) -> Result<SlotBooks> {
    inputs.check_sizes(spec)?;
    let plan = &config.slots[(slot - 1) as usize];
    let mut wiretap = Vec::with_capacity(2);
    let mut mac = Vec::with_capacity(2);
    for user in 0..2usize {
        let p = inputs.user(user);
        let mut rng = stream_rng(config.seed, domain(slot, user as u32, 1, PURPOSE_BOOK));
        wiretap.push(build_wiretap_with(
            &mut rng,
            user as u8 + 1,
            p,
            config.n1,
            plan.wiretap_bits[user],
            config.rand_bits[user],
            config.budget,
            CollisionPolicy::Resample,
        )?);
        if slot >= 2 {
            let mut rng = stream_rng(config.seed, domain(slot, user as u32, 2, PURPOSE_BOOK));
            mac.push(Some(build_mac_with(
                &mut rng,
                user as u8 + 1,
                p,
                config.n2,
                plan.keyed_bits[user],
                config.budget,
                CollisionPolicy::Resample,
            )?));
        } else {
            mac.push(None);
        }
    }
    let [w1, w2] = <[WiretapCodebook; 2]>::try_from(wiretap).expect("two users");
    let [m1, m2] = <[Option<MacCodebook>; 2]>::try_from(mac).expect("two users");
    Ok(SlotBooks {
        wiretap: [w1, w2],
        mac: [m1, m2],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSlotTrace {
    pub part1: Option<Message>,
    pub part2: Option<Message>,
    /// Sender-side key: the full message sent in the previous slot.
    pub key: Option<Message>,
    /// part2 after XOR with the key prefix (what the MAC encoder saw).
    pub xored: Option<Message>,
    pub codeword1: Vec<usize>,
    pub codeword2: Vec<usize>,
    pub decoded1: Option<Message>,
    /// Bob's keyed-part decode before un-XOR.
    pub decoded_raw2: Option<Message>,
    /// After un-XOR with Bob's own decoded previous message.
    pub decoded2: Option<Message>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotTrace {
    pub slot: u32,
    pub users: [UserSlotTrace; 2],
    pub y1: Vec<usize>,
    pub z1: Vec<usize>,
    pub y2: Vec<usize>,
    pub z2: Vec<usize>,
    pub error: bool,
    pub realized_rate: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub config: SlotConfig,
    pub slots: Vec<SlotTrace>,
}

fn uniform_message<R: Rng + ?Sized>(rng: &mut R, width: u32) -> Option<Message> {
    if width == 0 {
        return None;
    }
    let value = rng.random_range(0..(1u64 << width));
    Some(Message::new(value, width).expect("width-checked draw"))
}

fn concat_parts(part1: Option<Message>, part2: Option<Message>) -> Option<Message> {
    match (part1, part2) {
        (Some(a), Some(b)) => Some(a.concat(&b).expect("plan keeps widths under 48")),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => None,
    }
}

/// Executes the whole slotted protocol once.  Deterministic in
/// (config.seed, config, spec, inputs).
pub fn run(spec: &ChannelSpec, inputs: &InputPair, config: &SlotConfig) -> Result<ProtocolTrace> {
    config.validate()?;
    inputs.check_sizes(spec)?;

    let mut prev_sent: [Option<Message>; 2] = [None, None];
    let mut prev_decoded: [Option<Message>; 2] = [None, None];
    let mut slots = Vec::with_capacity(config.num_slots as usize);

    for slot in 1..=config.num_slots {
        let plan = &config.slots[(slot - 1) as usize];
        let books = slot_books(spec, inputs, config, slot)?;

        // Senders: draw messages, apply keys, encode.
        let mut part1 = [None, None];
        let mut part2 = [None, None];
        let mut keys = [None, None];
        let mut xored = [None, None];
        let mut cw1: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        let mut cw2: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for user in 0..2usize {
            let u32u = user as u32;
            let mut msg_rng = stream_rng(config.seed, domain(slot, u32u, 1, PURPOSE_MSG));
            let mut enc_rng = stream_rng(config.seed, domain(slot, u32u, 1, PURPOSE_ENCODE));
            part1[user] = uniform_message(&mut msg_rng, plan.wiretap_bits[user]);
            let book = &books.wiretap[user];
            cw1[user] = match &part1[user] {
                Some(msg) => encode_wiretap(book, msg, &mut enc_rng)?.to_vec(),
                None => {
                    let j = enc_rng.random_range(0..book.bin_size());
                    book.word(0, j).to_vec()
                }
            };

            if slot >= 2 {
                let mut msg_rng = stream_rng(config.seed, domain(slot, u32u, 2, PURPOSE_MSG));
                part2[user] = uniform_message(&mut msg_rng, plan.keyed_bits[user]);
                keys[user] = prev_sent[user];
                let mac = books.mac[user].as_ref().expect("mac book for slot >= 2");
                cw2[user] = match &part2[user] {
                    Some(msg) => {
                        let key = keys[user].as_ref().expect("validated key availability");
                        let x = msg.xor_key(key)?;
                        xored[user] = Some(x);
                        encode_mac(mac, &x)?.to_vec()
                    }
                    None => mac.word(0).to_vec(),
                };
            }
        }

        // Channel.
        let mut chan1 = stream_rng(config.seed, domain(slot, 0, 1, PURPOSE_CHANNEL));
        let mut y1 = Vec::with_capacity(config.n1);
        let mut z1 = Vec::with_capacity(config.n1);
        for (&a, &b) in cw1[0].iter().zip(cw1[1].iter()) {
            let (y, z) = spec.sample(a, b, &mut chan1)?;
            y1.push(y);
            z1.push(z);
        }
        let (mut y2, mut z2) = (Vec::new(), Vec::new());
        if slot >= 2 {
            let mut chan2 = stream_rng(config.seed, domain(slot, 0, 2, PURPOSE_CHANNEL));
            for (&a, &b) in cw2[0].iter().zip(cw2[1].iter()) {
                let (y, z) = spec.sample(a, b, &mut chan2)?;
                y2.push(y);
                z2.push(z);
            }
        }

        // Bob.
        let (d1, d2) = decode_ml(
            spec,
            &y1,
            &books.wiretap[0],
            &books.wiretap[1],
            config.budget,
        )?;
        let decoded1 = [
            (plan.wiretap_bits[0] > 0).then(|| Message::new(d1, plan.wiretap_bits[0]).expect("decoder range")),
            (plan.wiretap_bits[1] > 0).then(|| Message::new(d2, plan.wiretap_bits[1]).expect("decoder range")),
        ];
        let mut decoded_raw2 = [None, None];
        let mut decoded2 = [None, None];
        if slot >= 2 {
            let mac0 = books.mac[0].as_ref().expect("mac book");
            let mac1 = books.mac[1].as_ref().expect("mac book");
            let (r1, r2) = decode_ml(spec, &y2, mac0, mac1, config.budget)?;
            for (user, raw) in [(0usize, r1), (1usize, r2)] {
                if plan.keyed_bits[user] > 0 {
                    let raw_msg = Message::new(raw, plan.keyed_bits[user]).expect("decoder range");
                    decoded_raw2[user] = Some(raw_msg);
                    let bob_key = prev_decoded[user]
                        .as_ref()
                        .expect("validated key availability");
                    decoded2[user] = Some(raw_msg.xor_key(bob_key)?);
                }
            }
        }

        let error = (0..2).any(|u| part1[u] != decoded1[u] || part2[u] != decoded2[u]);
        let uses = config.n1 + if slot >= 2 { config.n2 } else { 0 };
        let realized_rate = [
            (plan.wiretap_bits[0] + plan.keyed_bits[0]) as f64 / uses as f64,
            (plan.wiretap_bits[1] + plan.keyed_bits[1]) as f64 / uses as f64,
        ];

        for user in 0..2usize {
            prev_sent[user] = concat_parts(part1[user], part2[user]);
            prev_decoded[user] = concat_parts(decoded1[user], decoded2[user]);
        }

        slots.push(SlotTrace {
            slot,
            users: [
                UserSlotTrace {
                    part1: part1[0],
                    part2: part2[0],
                    key: keys[0],
                    xored: xored[0],
                    codeword1: cw1[0].clone(),
                    codeword2: cw2[0].clone(),
                    decoded1: decoded1[0],
                    decoded_raw2: decoded_raw2[0],
                    decoded2: decoded2[0],
                },
                UserSlotTrace {
                    part1: part1[1],
                    part2: part2[1],
                    key: keys[1],
                    xored: xored[1],
                    codeword1: cw1[1].clone(),
                    codeword2: cw2[1].clone(),
                    decoded1: decoded1[1],
                    decoded_raw2: decoded_raw2[1],
                    decoded2: decoded2[1],
                },
            ],
            y1,
            z1,
            y2,
            z2,
            error,
            realized_rate,
        });
    }

    Ok(ProtocolTrace {
        config: config.clone(),
        slots,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeEstimate {
    pub slot: u32,
    pub errors: usize,
    pub trials: usize,
    pub pe: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((center - half) / denom).max(0.0),
        ((center + half) / denom).min(1.0),
    )
}

/// Per-slot error rate across traces of the same config shape.
pub fn error_rate(traces: &[ProtocolTrace]) -> Result<Vec<PeEstimate>> {
    let first = traces.first().ok_or(Error::EmptyInput("traces"))?;
    let shape = first.config.shape();
    for t in traces {
        if t.config.shape() != shape {
            return Err(Error::InvalidConfig(
                "traces come from different configs".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(first.slots.len());
    for (idx, slot) in first.slots.iter().enumerate() {
        let errors = traces.iter().filter(|t| t.slots[idx].error).count();
        let trials = traces.len();
        let (lo, hi) = wilson_interval(errors, trials);
        out.push(PeEstimate {
            slot: slot.slot,
            errors,
            trials,
            pe: errors as f64 / trials as f64,
            wilson_lo: lo,
            wilson_hi: hi,
        });
    }
    Ok(out)
}
