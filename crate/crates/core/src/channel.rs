//! Two-sender discrete memoryless wiretap channels p(y, z | x1, x2).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::JointPmf;

/// Slack accepted when checking that probability rows sum to one.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// A finite two-user wiretap channel.  `transitions` is row-major over
/// (x1, x2, y, z); each (x1, x2) row is a pmf over (y, z).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    sizes: [usize; 4],
    transitions: Vec<f64>,
    name: Option<String>,
}

impl ChannelSpec {
    pub fn new(sizes: [usize; 4], transitions: Vec<f64>, name: Option<String>) -> Result<Self> {
        let spec = Self {
            sizes,
            transitions,
            name,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks alphabet sizes, tensor shape, nonnegativity and row sums.
    pub fn validate(&self) -> Result<()> {
        const AXES: [&str; 4] = ["x1", "x2", "y", "z"];
        for (i, &size) in self.sizes.iter().enumerate() {
            if size == 0 {
                return Err(Error::EmptyAlphabet(AXES[i]));
            }
        }
        let expected: usize = self.sizes.iter().product();
        if self.transitions.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "channel transitions",
                expected,
                got: self.transitions.len(),
            });
        }
        for (index, &value) in self.transitions.iter().enumerate() {
            if value < 0.0 {
                return Err(Error::NegativeProbability { index, value });
            }
        }
        let row = self.sizes[2] * self.sizes[3];
        for x1 in 0..self.sizes[0] {
            for x2 in 0..self.sizes[1] {
                let base = (x1 * self.sizes[1] + x2) * row;
                let sum: f64 = self.transitions[base..base + row].iter().sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::NonStochastic { x1, x2, sum });
                }
            }
        }
        Ok(())
    }

    /// Sizes as (|X1|, |X2|, |Y|, |Z|).
    pub fn sizes(&self) -> [usize; 4] {
        self.sizes
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    #[inline]
    fn check_input(&self, x1: usize, x2: usize) -> Result<()> {
        if x1 >= self.sizes[0] {
            return Err(Error::IndexOutOfRange {
                context: "x1",
                index: x1,
                size: self.sizes[0],
            });
        }
        if x2 >= self.sizes[1] {
            return Err(Error::IndexOutOfRange {
                context: "x2",
                index: x2,
                size: self.sizes[1],
            });
        }
        Ok(())
    }

    /// p(y, z | x1, x2).  Indices are range-checked.
    pub fn prob(&self, x1: usize, x2: usize, y: usize, z: usize) -> Result<f64> {
        self.check_input(x1, x2)?;
        if y >= self.sizes[2] {
            return Err(Error::IndexOutOfRange {
                context: "y",
                index: y,
                size: self.sizes[2],
            });
        }
        if z >= self.sizes[3] {
            return Err(Error::IndexOutOfRange {
                context: "z",
                index: z,
                size: self.sizes[3],
            });
        }
        Ok(self.transitions[((x1 * self.sizes[1] + x2) * self.sizes[2] + y) * self.sizes[3] + z])
    }

    /// p(y | x1, x2) with Eve's output summed out, ascending in z.
    pub fn bob_marginal(&self, x1: usize, x2: usize, y: usize) -> Result<f64> {
        self.check_input(x1, x2)?;
        if y >= self.sizes[2] {
            return Err(Error::IndexOutOfRange {
                context: "y",
                index: y,
                size: self.sizes[2],
            });
        }
        let base = ((x1 * self.sizes[1] + x2) * self.sizes[2] + y) * self.sizes[3];
        Ok(self.transitions[base..base + self.sizes[3]].iter().sum())
    }

    /// p(z | x1, x2) with Bob's output summed out, ascending in y.
    pub fn eve_marginal(&self, x1: usize, x2: usize, z: usize) -> Result<f64> {
        self.check_input(x1, x2)?;
        if z >= self.sizes[3] {
            return Err(Error::IndexOutOfRange {
                context: "z",
                index: z,
                size: self.sizes[3],
            });
        }
        let row = self.sizes[2] * self.sizes[3];
        let base = (x1 * self.sizes[1] + x2) * row;
        Ok((0..self.sizes[2])
            .map(|y| self.transitions[base + y * self.sizes[3] + z])
            .sum())
    }

    /// Draws one (y, z) pair by inverse-cdf over the (x1, x2) row.
    pub fn sample<R: Rng + ?Sized>(&self, x1: usize, x2: usize, rng: &mut R) -> Result<(usize, usize)> {
        self.check_input(x1, x2)?;
        let row = self.sizes[2] * self.sizes[3];
        let base = (x1 * self.sizes[1] + x2) * row;
        let slice = &self.transitions[base..base + row];
        let flat = sample_index(slice, rng);
        Ok((flat / self.sizes[3], flat % self.sizes[3]))
    }

    /// Joint pmf of (X1, X2, Y, Z) under independent inputs.
    pub fn joint_law(&self, inputs: &InputPair) -> Result<JointPmf> {
        inputs.check_sizes(self)?;
        let row = self.sizes[2] * self.sizes[3];
        let mut mass = Vec::with_capacity(self.transitions.len());
        for x1 in 0..self.sizes[0] {
            for x2 in 0..self.sizes[1] {
                let w = inputs.p1[x1] * inputs.p2[x2];
                let base = (x1 * self.sizes[1] + x2) * row;
                mass.extend(self.transitions[base..base + row].iter().map(|&p| w * p));
            }
        }
        JointPmf::new(
            vec![
                ("x1", self.sizes[0]),
                ("x2", self.sizes[1]),
                ("y", self.sizes[2]),
                ("z", self.sizes[3]),
            ],
            mass,
        )
    }

    /// Same Bob channel, but Eve instead observes Z ~ `q` independent of
    /// everything on the wire.
    pub fn with_independent_z(&self, q: &[f64]) -> Result<ChannelSpec> {
        if q.is_empty() {
            return Err(Error::EmptyAlphabet("z"));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotNormalized(sum));
        }
        let mut transitions = Vec::with_capacity(self.sizes[0] * self.sizes[1] * self.sizes[2] * q.len());
        for x1 in 0..self.sizes[0] {
            for x2 in 0..self.sizes[1] {
                for y in 0..self.sizes[2] {
                    let py = self.bob_marginal(x1, x2, y)?;
                    transitions.extend(q.iter().map(|&qz| py * qz));
                }
            }
        }
        ChannelSpec::new(
            [self.sizes[0], self.sizes[1], self.sizes[2], q.len()],
            transitions,
            self.name.as_ref().map(|n| format!("{n}+indep-z")),
        )
    }

    /// A random channel with the given sizes; every row is drawn from a
    /// flat Dirichlet and renormalized.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, sizes: [usize; 4]) -> Result<ChannelSpec> {
        let rows = sizes[0] * sizes[1];
        let row = sizes[2] * sizes[3];
        let mut transitions = Vec::with_capacity(rows * row);
        for _ in 0..rows {
            let mut draws: Vec<f64> = (0..row)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let total: f64 = draws.iter().sum();
            for d in &mut draws {
                *d /= total;
            }
            transitions.extend(draws);
        }
        ChannelSpec::new(sizes, transitions, None)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ChannelSpec> {
        let file = File::open(path)?;
        let parsed: ChannelFile = serde_json::from_reader(BufReader::new(file))?;
        parsed.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut writer, &ChannelFile::from(self))?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ChannelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<ChannelSpec> {
        let parsed: ChannelFile = serde_json::from_str(text)?;
        parsed.try_into()
    }
}

/// On-disk shape: transitions nested as \[x1\]\[x2\]\[y\]\[z\].
#[derive(Serialize, Deserialize)]
struct ChannelFile {
    alphabets: [usize; 4],
    transitions: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl From<&ChannelSpec> for ChannelFile {
    fn from(spec: &ChannelSpec) -> Self {
        let [n1, n2, ny, nz] = spec.sizes;
        let nested = (0..n1)
            .map(|x1| {
                (0..n2)
                    .map(|x2| {
                        (0..ny)
                            .map(|y| {
                                (0..nz)
                                    .map(|z| {
                                        spec.transitions
                                            [((x1 * n2 + x2) * ny + y) * nz + z]
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ChannelFile {
            alphabets: spec.sizes,
            transitions: nested,
            name: spec.name.clone(),
        }
    }
}

impl TryFrom<ChannelFile> for ChannelSpec {
    type Error = Error;

    fn try_from(file: ChannelFile) -> Result<ChannelSpec> {
        let [n1, n2, ny, nz] = file.alphabets;
        let mut flat = Vec::with_capacity(n1 * n2 * ny * nz);
        if file.transitions.len() != n1 {
            return Err(Error::DimensionMismatch {
                context: "transitions (x1)",
                expected: n1,
                got: file.transitions.len(),
            });
        }
        for layer1 in &file.transitions {
            if layer1.len() != n2 {
                return Err(Error::DimensionMismatch {
                    context: "transitions (x2)",
                    expected: n2,
                    got: layer1.len(),
                });
            }
            for layer2 in layer1 {
                if layer2.len() != ny {
                    return Err(Error::DimensionMismatch {
                        context: "transitions (y)",
                        expected: ny,
                        got: layer2.len(),
                    });
                }
                for row in layer2 {
                    if row.len() != nz {
                        return Err(Error::DimensionMismatch {
                            context: "transitions (z)",
                            expected: nz,
                            got: row.len(),
                        });
                    }
                    flat.extend_from_slice(row);
                }
            }
        }
        ChannelSpec::new(file.alphabets, flat, file.name)
    }
}

/// Independent per-user input distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct InputPair {
    p1: Vec<f64>,
    p2: Vec<f64>,
}

impl InputPair {
    pub fn new(p1: Vec<f64>, p2: Vec<f64>) -> Result<Self> {
        for (label, p) in [("p1", &p1), ("p2", &p2)] {
            if p.is_empty() {
                return Err(Error::EmptyAlphabet(if label == "p1" { "x1" } else { "x2" }));
            }
            for (index, &value) in p.iter().enumerate() {
                if value < 0.0 {
                    return Err(Error::NegativeProbability { index, value });
                }
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotNormalized(sum));
            }
        }
        Ok(Self { p1, p2 })
    }

    pub fn uniform(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 {
            return Err(Error::EmptyAlphabet("x1"));
        }
        if n2 == 0 {
            return Err(Error::EmptyAlphabet("x2"));
        }
        Ok(Self {
            p1: vec![1.0 / n1 as f64; n1],
            p2: vec![1.0 / n2 as f64; n2],
        })
    }

    /// Uniform inputs matching a channel's alphabets.
    pub fn uniform_for(spec: &ChannelSpec) -> Self {
        Self::uniform(spec.sizes[0], spec.sizes[1]).expect("channel alphabets are nonempty")
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn p2(&self) -> &[f64] {
        &self.p2
    }

    pub fn user(&self, user: usize) -> &[f64] {
        match user {
            0 => &self.p1,
            1 => &self.p2,
            _ => panic!("user index must be 0 or 1"),
        }
    }

    pub(crate) fn check_sizes(&self, spec: &ChannelSpec) -> Result<()> {
        if self.p1.len() != spec.sizes[0] {
            return Err(Error::DimensionMismatch {
                context: "input p1",
                expected: spec.sizes[0],
                got: self.p1.len(),
            });
        }
        if self.p2.len() != spec.sizes[1] {
            return Err(Error::DimensionMismatch {
                context: "input p2",
                expected: spec.sizes[1],
                got: self.p2.len(),
            });
        }
        Ok(())
    }

    pub fn sample_x1<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.p1, rng)
    }

    pub fn sample_x2<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.p2, rng)
    }
}

/// Inverse-cdf draw from a pmf slice; ties on floating-point fallthrough
/// resolve to the last positive entry.
pub(crate) fn sample_index<R: Rng + ?Sized>(pmf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in pmf.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Built-in reference channels.  All use binary inputs and flatten Bob's
/// noiseless pair observation as y = 2*x1 + x2.
pub mod fixtures {
    use super::ChannelSpec;

    pub const NAMES: [&str; 4] = ["CH-ID", "CH-XOR-EVE", "CH-COPY-EVE", "CH-BSC-EVE"];

    /// Bob sees the pair exactly; Eve sees a constant.
    pub fn ch_id() -> ChannelSpec {
        deterministic([2, 2, 4, 1], |x1, x2| (2 * x1 + x2, 0), "CH-ID")
    }

    /// Bob sees the pair; Eve sees only the parity x1 xor x2.
    pub fn ch_xor_eve() -> ChannelSpec {
        deterministic([2, 2, 4, 2], |x1, x2| (2 * x1 + x2, x1 ^ x2), "CH-XOR-EVE")
    }

    /// Eve sees exactly what Bob sees.
    pub fn ch_copy_eve() -> ChannelSpec {
        deterministic([2, 2, 4, 4], |x1, x2| (2 * x1 + x2, 2 * x1 + x2), "CH-COPY-EVE")
    }

    /// Bob is noiseless; Eve sees both bits through independent BSC(1/4).
    pub fn ch_bsc_eve() -> ChannelSpec {
        let sizes = [2usize, 2, 4, 4];
        let mut transitions = vec![0.0; 64];
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                let y = 2 * x1 + x2;
                for e1 in 0..2usize {
                    for e2 in 0..2usize {
                        let z = 2 * (x1 ^ e1) + (x2 ^ e2);
                        let p = flip(e1) * flip(e2);
                        transitions[((x1 * 2 + x2) * 4 + y) * 4 + z] += p;
                    }
                }
            }
        }
        ChannelSpec::new(sizes, transitions, Some("CH-BSC-EVE".into()))
            .expect("fixture is stochastic")
    }

    fn flip(e: usize) -> f64 {
        if e == 0 {
            0.75
        } else {
            0.25
        }
    }

    fn deterministic(
        sizes: [usize; 4],
        map: impl Fn(usize, usize) -> (usize, usize),
        name: &str,
    ) -> ChannelSpec {
        let mut transitions = vec![0.0; sizes.iter().product()];
        for x1 in 0..sizes[0] {
            for x2 in 0..sizes[1] {
                let (y, z) = map(x1, x2);
                transitions[((x1 * sizes[1] + x2) * sizes[2] + y) * sizes[3] + z] = 1.0;
            }
        }
        ChannelSpec::new(sizes, transitions, Some(name.into())).expect("fixture is stochastic")
    }

    pub fn by_name(name: &str) -> Option<ChannelSpec> {
        match name {
            "CH-ID" => Some(ch_id()),
            "CH-XOR-EVE" => Some(ch_xor_eve()),
            "CH-COPY-EVE" => Some(ch_copy_eve()),
            "CH-BSC-EVE" => Some(ch_bsc_eve()),
            _ => None,
        }
    }

    pub fn all() -> Vec<ChannelSpec> {
        NAMES.iter().map(|n| by_name(n).unwrap()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn fixtures_validate() {
        for spec in fixtures::all() {
            spec.validate().unwrap();
        }
    }

    #[test]
    fn bsc_eve_row_is_the_product_of_two_flips() {
        let spec = fixtures::ch_bsc_eve();
        // Row (x1=0, x2=0): y is pinned to 0, z weights are the four
        // products of {0.75, 0.25}.
        assert_eq!(spec.prob(0, 0, 0, 0).unwrap(), 0.5625);
        assert_eq!(spec.prob(0, 0, 0, 1).unwrap(), 0.1875);
        assert_eq!(spec.prob(0, 0, 0, 2).unwrap(), 0.1875);
        assert_eq!(spec.prob(0, 0, 0, 3).unwrap(), 0.0625);
        assert_eq!(spec.prob(0, 0, 1, 0).unwrap(), 0.0);
        assert_eq!(spec.bob_marginal(0, 0, 0).unwrap(), 1.0);
        assert_eq!(spec.eve_marginal(1, 0, 2).unwrap(), 0.5625);
    }

    #[test]
    fn joint_law_of_identity_channel_is_uniform_on_the_diagonal() {
        let spec = fixtures::ch_id();
        let inputs = InputPair::uniform_for(&spec);
        let law = spec.joint_law(&inputs).unwrap();
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y in 0..4 {
                    let flat = (x1 * 2 + x2) * 4 + y;
                    let expected = if y == 2 * x1 + x2 { 0.25 } else { 0.0 };
                    assert_eq!(law.mass()[flat], expected);
                }
            }
        }
    }

    #[test]
    fn non_stochastic_rows_are_rejected() {
        let err = ChannelSpec::new([1, 1, 2, 1], vec![0.6, 0.6], None).unwrap_err();
        assert!(matches!(err, Error::NonStochastic { sum, .. } if (sum - 1.2).abs() < 1e-12));
    }

    #[test]
    fn negative_entries_are_rejected() {
        let err = ChannelSpec::new([1, 1, 2, 1], vec![1.5, -0.5], None).unwrap_err();
        assert!(matches!(err, Error::NegativeProbability { .. }));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let err = ChannelSpec::new([1, 1, 2, 1], vec![1.0], None).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn empty_alphabet_is_rejected() {
        let err = ChannelSpec::new([1, 0, 2, 1], vec![], None).unwrap_err();
        assert!(matches!(err, Error::EmptyAlphabet("x2")));
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        let spec = fixtures::ch_id();
        assert!(matches!(
            spec.prob(2, 0, 0, 0),
            Err(Error::IndexOutOfRange { context: "x1", .. })
        ));
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(spec.sample(0, 5, &mut rng).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let spec = fixtures::ch_bsc_eve();
        let text = spec.to_json().unwrap();
        let back = ChannelSpec::from_json(&text).unwrap();
        assert_eq!(spec, back);

        let path = std::env::temp_dir().join(format!(
            "macwt-roundtrip-{}.json",
            std::process::id()
        ));
        spec.save(&path).unwrap();
        let loaded = ChannelSpec::load(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(spec, loaded);
    }

    #[test]
    fn loader_rejects_ragged_nesting() {
        let text = r#"{
            "alphabets": [1, 1, 2, 1],
            "transitions": [[[[0.5], [0.5], [0.0]]]]
        }"#;
        let err = ChannelSpec::from_json(text).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn sampler_matches_the_row_histogram() {
        let spec = fixtures::ch_bsc_eve();
        let mut rng = ChaCha12Rng::seed_from_u64(0xB5C);
        let trials = 100_000usize;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            let (y, z) = spec.sample(0, 1, &mut rng).unwrap();
            assert_eq!(y, 1);
            counts[z] += 1;
        }
        for (z, &count) in counts.iter().enumerate() {
            let p = spec.eve_marginal(0, 1, z).unwrap();
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            let observed = count as f64 / trials as f64;
            assert!(
                (observed - p).abs() < 5.0 * sigma,
                "z={z}: observed {observed}, expected {p}"
            );
        }
    }

    #[test]
    fn random_channels_validate() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..20 {
            let sizes = [
                rng.random_range(1..=3),
                rng.random_range(1..=3),
                rng.random_range(1..=4),
                rng.random_range(1..=4),
            ];
            let spec = ChannelSpec::random(&mut rng, sizes).unwrap();
            spec.validate().unwrap();
        }
    }

    #[test]
    fn independent_z_preserves_bob_and_detaches_eve() {
        let spec = fixtures::ch_bsc_eve().with_independent_z(&[0.5, 0.5]).unwrap();
        assert_eq!(spec.sizes(), [2, 2, 4, 2]);
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y in 0..4 {
                    assert_abs_diff_eq!(
                        spec.bob_marginal(x1, x2, y).unwrap(),
                        fixtures::ch_bsc_eve().bob_marginal(x1, x2, y).unwrap(),
                        epsilon = 1e-15
                    );
                }
                assert_abs_diff_eq!(spec.eve_marginal(x1, x2, 0).unwrap(), 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn input_pair_validation() {
        assert!(InputPair::new(vec![0.5, 0.5], vec![1.0]).is_ok());
        assert!(matches!(
            InputPair::new(vec![0.5, 0.4], vec![1.0]),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            InputPair::new(vec![1.5, -0.5], vec![1.0]),
            Err(Error::NegativeProbability { .. })
        ));
        assert!(matches!(
            InputPair::new(vec![], vec![1.0]),
            Err(Error::EmptyAlphabet("x1"))
        ));
    }
}
