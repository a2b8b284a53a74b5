//! Exact information measures over small joint pmfs.
//!
//! A [`JointPmf`] is a dense tensor with named axes.  All reductions walk
//! flat indices in ascending order, so repeated runs accumulate floating
//! point in the same order and produce bit-identical results.

use crate::error::{Error, Result};

/// Entropies and mutual informations are clamped into their valid range
/// only when they miss it by at most this much.
pub const CLAMP_TOL: f64 = 1e-9;

/// Normalization slack accepted at construction.
pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct JointPmf {
    names: Vec<String>,
    sizes: Vec<usize>,
    /// Row-major over the axes in declaration order.
    mass: Vec<f64>,
}

impl JointPmf {
    /// `axes` pairs a unique name with a nonempty size; `mass` is row-major
    /// with the last axis fastest.
    pub fn new<S: Into<String>>(axes: Vec<(S, usize)>, mass: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::EmptyAxes);
        }
        let mut names = Vec::with_capacity(axes.len());
        let mut sizes = Vec::with_capacity(axes.len());
        for (name, size) in axes {
            let name = name.into();
            if size == 0 {
                return Err(Error::EmptyAlphabet("pmf axis"));
            }
            if names.contains(&name) {
                return Err(Error::OverlappingAxes(name));
            }
            names.push(name);
            sizes.push(size);
        }
        let expected: usize = sizes.iter().product();
        if mass.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "joint pmf",
                expected,
                got: mass.len(),
            });
        }
        let mut total = 0.0;
        for (index, &value) in mass.iter().enumerate() {
            if value < 0.0 {
                return Err(Error::NegativeProbability { index, value });
            }
            total += value;
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { names, sizes, mass })
    }

    pub fn axis_names(&self) -> &[String] {
        &self.names
    }

    pub fn axis_size(&self, name: &str) -> Result<usize> {
        Ok(self.sizes[self.axis_index(name)?])
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    fn axis_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    /// Resolves `names` to axis positions, rejecting unknowns and duplicates
    /// across everything resolved so far in `seen`.
    fn resolve(&self, names: &[&str], seen: &mut Vec<usize>) -> Result<Vec<usize>> {
        if names.is_empty() {
            return Err(Error::EmptyAxes);
        }
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let idx = self.axis_index(name)?;
            if seen.contains(&idx) {
                return Err(Error::OverlappingAxes(name.to_string()));
            }
            seen.push(idx);
            out.push(idx);
        }
        Ok(out)
    }

    /// Positions of the kept axes for a flat index, in declaration order.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.sizes.len()];
        for i in (0..self.sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.sizes[i + 1];
        }
        strides
    }

    /// Sums out every axis not listed.  Kept axes stay in their original
    /// declaration order regardless of the order given here.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointPmf> {
        let mut seen = Vec::new();
        let mut kept = self.resolve(keep, &mut seen)?;
        kept.sort_unstable();

        let strides = self.strides();
        let mut out_sizes = Vec::with_capacity(kept.len());
        let mut out_names = Vec::with_capacity(kept.len());
        for &axis in &kept {
            out_sizes.push(self.sizes[axis]);
            out_names.push(self.names[axis].clone());
        }
        let out_len: usize = out_sizes.iter().product();
        let mut out_strides = vec![1usize; kept.len()];
        for i in (0..kept.len().saturating_sub(1)).rev() {
            out_strides[i] = out_strides[i + 1] * out_sizes[i + 1];
        }

        let mut mass = vec![0.0; out_len];
        for (flat, &value) in self.mass.iter().enumerate() {
            let mut target = 0;
            for (k, &axis) in kept.iter().enumerate() {
                let coord = flat / strides[axis] % self.sizes[axis];
                target += coord * out_strides[k];
            }
            mass[target] += value;
        }
        Ok(JointPmf {
            names: out_names,
            sizes: out_sizes,
            mass,
        })
    }

    /// Joint entropy of the listed axes in bits.
    pub fn entropy(&self, axes: &[&str]) -> Result<f64> {
        let marginal = self.marginal(axes)?;
        let mut h = 0.0;
        for &p in &marginal.mass {
            if p > 0.0 {
                h -= p * p.log2();
            }
        }
        Ok(clamp_low(h, 0.0, CLAMP_TOL))
    }

    /// I(A;B) in bits, computed as H(A) + H(B) - H(A,B) and clamped into
    /// [0, min(H(A), H(B))] when within [`CLAMP_TOL`] of a boundary.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        let mut seen = Vec::new();
        self.resolve(a, &mut seen)?;
        self.resolve(b, &mut seen)?;

        let ha = self.entropy(a)?;
        let hb = self.entropy(b)?;
        let joint: Vec<&str> = a.iter().chain(b.iter()).copied().collect();
        let hab = self.entropy(&joint)?;
        let raw = ha + hb - hab;
        let hi = ha.min(hb);
        Ok(clamp_low(clamp_high(raw, hi, CLAMP_TOL), 0.0, CLAMP_TOL))
    }

    /// I(A;B|C) in bits via H(A,C) + H(B,C) - H(A,B,C) - H(C), clamped to
    /// be nonnegative when within [`CLAMP_TOL`] of zero.
    pub fn conditional_mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        c: &[&str],
    ) -> Result<f64> {
        let mut seen = Vec::new();
        self.resolve(a, &mut seen)?;
        self.resolve(b, &mut seen)?;
        self.resolve(c, &mut seen)?;

        let ac: Vec<&str> = a.iter().chain(c.iter()).copied().collect();
        let bc: Vec<&str> = b.iter().chain(c.iter()).copied().collect();
        let abc: Vec<&str> = a.iter().chain(b.iter()).chain(c.iter()).copied().collect();
        let raw = self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(c)?;
        Ok(clamp_low(raw, 0.0, CLAMP_TOL))
    }
}

fn clamp_low(value: f64, lo: f64, tol: f64) -> f64 {
    if value < lo && value >= lo - tol {
        lo
    } else {
        value
    }
}

fn clamp_high(value: f64, hi: f64, tol: f64) -> f64 {
    if value > hi && value <= hi + tol {
        hi
    } else {
        value
    }
}

/// Binary entropy h(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coin_pair() -> JointPmf {
        // X uniform bit, Y = X through a BSC(0.25).
        let mass = vec![0.375, 0.125, 0.125, 0.375];
        JointPmf::new(vec![("x", 2), ("y", 2)], mass).unwrap()
    }

    #[test]
    fn entropy_of_uniform_bit_is_one() {
        let p = coin_pair();
        assert_abs_diff_eq!(p.entropy(&["x"]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.entropy(&["y"]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bsc_mutual_information_matches_closed_form() {
        let p = coin_pair();
        let expected = 1.0 - binary_entropy(0.25);
        assert_abs_diff_eq!(
            p.mutual_information(&["x"], &["y"]).unwrap(),
            expected,
            epsilon = 1e-12
        );
        // Frozen reference: 1 - h(0.25).
        assert_abs_diff_eq!(expected, 0.188_721_875_540_867_2, epsilon = 1e-15);
    }

    #[test]
    fn independent_axes_have_zero_mutual_information() {
        let mass = vec![0.25; 4];
        let p = JointPmf::new(vec![("a", 2), ("b", 2)], mass).unwrap();
        assert_eq!(p.mutual_information(&["a"], &["b"]).unwrap(), 0.0);
    }

    #[test]
    fn copy_channel_mutual_information_is_full_entropy() {
        let mass = vec![0.5, 0.0, 0.0, 0.5];
        let p = JointPmf::new(vec![("a", 2), ("b", 2)], mass).unwrap();
        assert_abs_diff_eq!(
            p.mutual_information(&["a"], &["b"]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn marginal_order_follows_declaration_not_request() {
        let p = coin_pair();
        let m = p.marginal(&["y", "x"]).unwrap();
        assert_eq!(m.axis_names(), &["x".to_string(), "y".to_string()]);
        assert_eq!(m.mass(), coin_pair().mass());
    }

    #[test]
    fn cmi_reduces_to_mi_given_constant_axis() {
        // Z = X xor Y with uniform independent X, Y: I(X;Y) = 0 but
        // I(X;Y|Z) = 1 bit.
        let mut mass = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                let z = x ^ y;
                mass[(x * 2 + y) * 2 + z] = 0.25;
            }
        }
        let p = JointPmf::new(vec![("x", 2), ("y", 2), ("z", 2)], mass).unwrap();
        assert_eq!(p.mutual_information(&["x"], &["y"]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            p.conditional_mutual_information(&["x"], &["y"], &["z"])
                .unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn overlapping_groups_are_rejected() {
        let p = coin_pair();
        let err = p.mutual_information(&["x"], &["x"]).unwrap_err();
        assert!(matches!(err, Error::OverlappingAxes(_)));
    }

    #[test]
    fn unknown_axis_is_rejected() {
        let p = coin_pair();
        let err = p.entropy(&["w"]).unwrap_err();
        assert!(matches!(err, Error::UnknownAxis(_)));
    }

    #[test]
    fn unnormalized_mass_is_rejected() {
        let err = JointPmf::new(vec![("x", 2)], vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized(_)));
    }

    #[test]
    fn negative_mass_is_rejected() {
        let err = JointPmf::new(vec![("x", 2)], vec![1.1, -0.1]).unwrap_err();
        assert!(matches!(err, Error::NegativeProbability { .. }));
    }
}
