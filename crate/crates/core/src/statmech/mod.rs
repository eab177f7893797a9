//! Replica spin model of the averaged random circuit: closed-form weights and
//! couplings, and a Monte Carlo for the random-bond Ising model it reduces to.
//!
//! The closed forms take `q` as a real number; they only need `q ≥ 2`, not
//! primality.

mod mc;

pub use mc::{
    exact_distribution, rbim_binder_crossing, run_rbim_mc, IsingLattice, Moments, RbimConfig, RbimResult, Update,
};

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};

/// Relative permutation between two replica spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermSpin {
    Identity,
    Swap,
}

impl PermSpin {
    /// `σ⁻¹τ` for two Ising-valued spins.
    pub fn relative(s: i8, t: i8) -> Self {
        if s == t {
            PermSpin::Identity
        } else {
            PermSpin::Swap
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q >= 2.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("q must be at least 2, got {q}")))
    }
}

/// Two-replica Weingarten function of a `q²`-dimensional gate.
pub fn weingarten2(rel: PermSpin, q: f64) -> Result<f64> {
    check_q(q)?;
    let d = q.powi(4) - 1.0;
    Ok(match rel {
        PermSpin::Identity => 1.0 / d,
        PermSpin::Swap => -1.0 / (q * q * d),
    })
}

/// `q^{χ(σ⁻¹τ)}`, the weight of a diagonal edge.
pub fn edge_weight(rel: PermSpin, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(match rel {
        PermSpin::Identity => q * q,
        PermSpin::Swap => q,
    })
}

/// `½ ln((q²+1)/(2q))`.
pub fn coupling_jvert(q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(0.5 * ((q * q + 1.0) / (2.0 * q)).ln())
}

/// `½ ln((1+2q+4q²+2q³+q⁴)/(2q(1+q+q²)))`.
pub fn coupling_jhoriz(q: f64) -> Result<f64> {
    check_q(q)?;
    let num = 1.0 + 2.0 * q + 4.0 * q * q + 2.0 * q.powi(3) + q.powi(4);
    Ok(0.5 * (num / (2.0 * q * (1.0 + q + q * q))).ln())
}

/// Coefficients `(A, B, C)` of the plaquette weight
/// `1 + A s1s2s3s4 + B (s1s2+s2s3+s3s4+s4s1) + C (s1s3+s2s4)`.
pub fn plaquette_terms(q: f64) -> Result<(f64, f64, f64)> {
    check_q(q)?;
    let u = q * q;
    let r = u * u + 6.0 * u + 1.0;
    Ok((
        (u + 1.0).powi(4) / ((u - 1.0).powi(2) * r),
        (u + 1.0).powi(3) / ((u - 1.0) * r),
        (u + 1.0).powi(2) / r,
    ))
}

/// The four classes of plaquette configurations under the lattice symmetries
/// and global flip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlaquetteOrbit {
    /// All four equal.
    Aligned,
    /// Exactly one spin differs.
    OneFlipped,
    /// Two neighbours differ from the other two.
    PairFlipped,
    /// Alternating around the plaquette.
    Staggered,
}

impl PlaquetteOrbit {
    pub const ALL: [PlaquetteOrbit; 4] =
        [PlaquetteOrbit::Aligned, PlaquetteOrbit::OneFlipped, PlaquetteOrbit::PairFlipped, PlaquetteOrbit::Staggered];

    /// Spins listed around the plaquette.
    pub fn of(s: [i8; 4]) -> Self {
        let p = s.iter().map(|&v| v as i32).product::<i32>();
        let nn: i32 = (0..4).map(|i| s[i] as i32 * s[(i + 1) % 4] as i32).sum();
        match (p, nn) {
            (-1, _) => PlaquetteOrbit::OneFlipped,
            (_, 4) => PlaquetteOrbit::Aligned,
            (_, 0) => PlaquetteOrbit::PairFlipped,
            _ => PlaquetteOrbit::Staggered,
        }
    }

    /// A representative configuration.
    pub fn representative(self) -> [i8; 4] {
        match self {
            PlaquetteOrbit::Aligned => [1, 1, 1, 1],
            PlaquetteOrbit::OneFlipped => [1, 1, 1, -1],
            PlaquetteOrbit::PairFlipped => [1, 1, -1, -1],
            PlaquetteOrbit::Staggered => [1, -1, 1, -1],
        }
    }

    /// `(s1s2s3s4, Σ nearest pairs, Σ diagonal pairs)` of the orbit.
    pub fn invariants(self) -> (f64, f64, f64) {
        let s = self.representative().map(|v| v as f64);
        (
            s[0] * s[1] * s[2] * s[3],
            s[0] * s[1] + s[1] * s[2] + s[2] * s[3] + s[3] * s[0],
            s[0] * s[2] + s[1] * s[3],
        )
    }

    /// Natural log of the orbit's weight magnitude and its sign, from the
    /// factored form so that the near-cancelling orbits keep full precision
    /// at large `q`.
    fn log_abs_weight(self, q: f64) -> (f64, f64) {
        let u = q * q;
        let ln_d = 2.0 * (u - 1.0).ln() + (u * u + 6.0 * u + 1.0).ln();
        let (mag, sign) = match self {
            PlaquetteOrbit::Aligned => ((8.0f64).ln() + 2.0 * u.ln() + (u * u + 2.0 * u - 1.0).ln(), 1.0),
            PlaquetteOrbit::OneFlipped => ((16.0f64).ln() + 2.0 * u.ln(), -1.0),
            PlaquetteOrbit::PairFlipped => ((8.0f64).ln() + u.ln() + (u * u + 1.0).ln(), 1.0),
            PlaquetteOrbit::Staggered => {
                let f = u * u - 2.0 * u - 1.0;
                ((8.0f64).ln() + f.abs().ln(), -f.signum())
            }
        };
        (mag - ln_d, sign)
    }
}

/// Plaquette weight with the spin-independent prefactor dropped. Spins are
/// listed around the plaquette and must be ±1.
pub fn plaquette_weight(s: [i8; 4], q: f64) -> Result<f64> {
    check_q(q)?;
    if s.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::Config(format!("spins must be ±1, got {s:?}")));
    }
    let (l, sign) = PlaquetteOrbit::of(s).log_abs_weight(q);
    Ok(sign * l.exp())
}

/// Plaquette couplings matched to `exp(K + J1234 s1s2s3s4 + J12 Σnn + J13 Σdiag)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveCouplings {
    pub j12: f64,
    pub j13: f64,
    pub j1234: f64,
    /// The constant `K`.
    pub log_norm: f64,
    /// Largest `|W_fit − W|` over orbits, relative to the aligned weight.
    pub residual: f64,
    /// Orbits whose exact weight is not positive; the ansatz matches only
    /// their magnitude.
    pub nonpositive: Vec<PlaquetteOrbit>,
}

/// Solves the four orbit equations `ln|W| = K + J·invariants` exactly.
pub fn effective_couplings(q: f64) -> Result<EffectiveCouplings> {
    check_q(q)?;
    let mut m = Matrix4::zeros();
    let mut rhs = Vector4::zeros();
    let mut nonpositive = Vec::new();
    for (r, o) in PlaquetteOrbit::ALL.iter().enumerate() {
        let (e, nn, dg) = o.invariants();
        m.set_row(r, &nalgebra::RowVector4::new(1.0, e, nn, dg));
        let (l, sign) = o.log_abs_weight(q);
        rhs[r] = l;
        if sign <= 0.0 {
            nonpositive.push(*o);
        }
    }
    let sol = m.lu().solve(&rhs).ok_or_else(|| Error::Fit("orbit system is singular".into()))?;
    let (log_norm, j1234, j12, j13) = (sol[0], sol[1], sol[2], sol[3]);
    let aligned = PlaquetteOrbit::Aligned.log_abs_weight(q).0;
    let residual = PlaquetteOrbit::ALL
        .iter()
        .map(|o| {
            let (e, nn, dg) = o.invariants();
            let (l, sign) = o.log_abs_weight(q);
            let fit = (log_norm + j1234 * e + j12 * nn + j13 * dg - aligned).exp();
            (fit - sign * (l - aligned).exp()).abs()
        })
        .fold(0.0, f64::max);
    Ok(EffectiveCouplings { j12, j13, j1234, log_norm, residual, nonpositive })
}

/// All couplings of the spin model at one `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Couplings {
    pub q: f64,
    pub j_vert: f64,
    pub j_horiz: f64,
    pub j12: f64,
    pub j13: f64,
    pub j1234: f64,
}

impl Couplings {
    pub fn new(q: f64) -> Result<Self> {
        let e = effective_couplings(q)?;
        Ok(Couplings { q, j_vert: coupling_jvert(q)?, j_horiz: coupling_jhoriz(q)?, j12: e.j12, j13: e.j13, j1234: e.j1234 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_values() {
        assert_relative_eq!(weingarten2(PermSpin::Identity, 2.0).unwrap(), 1.0 / 15.0, max_relative = 1e-15);
        assert_relative_eq!(weingarten2(PermSpin::Swap, 2.0).unwrap(), -1.0 / 60.0, max_relative = 1e-15);
        assert_relative_eq!(coupling_jvert(2.0).unwrap(), 0.5 * (1.25f64).ln(), max_relative = 1e-14);
        assert_relative_eq!(coupling_jhoriz(2.0).unwrap(), 0.5 * (53.0f64 / 28.0).ln(), max_relative = 1e-14);
        assert_eq!(edge_weight(PermSpin::Identity, 3.0).unwrap(), 9.0);
        assert_eq!(edge_weight(PermSpin::Swap, 3.0).unwrap(), 3.0);
        let big = 1e5;
        assert_relative_eq!(weingarten2(PermSpin::Identity, big).unwrap() * big.powi(4), 1.0, max_relative = 1e-12);
        assert!(coupling_jvert(1.5).is_err());
        assert!(coupling_jhoriz(f64::NAN).is_err());
    }

    #[test]
    fn orbit_classification() {
        for bits in 0u8..16 {
            let s: [i8; 4] = std::array::from_fn(|i| if bits >> i & 1 == 1 { -1 } else { 1 });
            let o = PlaquetteOrbit::of(s);
            assert_eq!(PlaquetteOrbit::of(s.map(|v| -v)), o);
            assert_eq!(PlaquetteOrbit::of([s[1], s[2], s[3], s[0]]), o);
            let (e, nn, dg) = o.invariants();
            let f = s.map(|v| v as f64);
            assert_eq!(e, f.iter().product());
            assert_eq!(nn, f[0] * f[1] + f[1] * f[2] + f[2] * f[3] + f[3] * f[0]);
            assert_eq!(dg, f[0] * f[2] + f[1] * f[3]);
        }
    }

    #[test]
    fn factored_forms_match_the_expansion() {
        for q in [2.0, 3.0, 5.0, 7.0, 11.0, 31.0] {
            let (a, b, c) = plaquette_terms(q).unwrap();
            for o in PlaquetteOrbit::ALL {
                let (e, nn, dg) = o.invariants();
                let direct = 1.0 + a * e + b * nn + c * dg;
                let w = plaquette_weight(o.representative(), q).unwrap();
                assert_relative_eq!(w, direct, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
        assert!(plaquette_weight([1, 0, 1, 1], 3.0).is_err());
    }

    #[test]
    fn effective_couplings_reproduce_magnitudes() {
        for q in [3.0, 10.0, 1e3, 1e6] {
            let e = effective_couplings(q).unwrap();
            for o in PlaquetteOrbit::ALL {
                let (x, nn, dg) = o.invariants();
                let fit = e.log_norm + e.j1234 * x + e.j12 * nn + e.j13 * dg;
                assert_relative_eq!(fit, o.log_abs_weight(q).0, epsilon = 1e-9);
            }
            assert_eq!(e.nonpositive, vec![PlaquetteOrbit::OneFlipped, PlaquetteOrbit::Staggered]);
        }
    }
}
