use num_complex::Complex64;

use crate::params::SystemParams;

/// Exchange symmetry of the initial level-2 excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetrySector {
    /// `(|2>_A|1>_B + |1>_A|2>_B) / sqrt 2`
    Symmetric,
    /// `(|2>_A|1>_B - |1>_A|2>_B) / sqrt 2`
    Antisymmetric,
}

impl SymmetrySector {
    pub fn sign(self) -> f64 {
        match self {
            SymmetrySector::Symmetric => 1.0,
            SymmetrySector::Antisymmetric => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SymmetrySector::Symmetric => "sym",
            SymmetrySector::Antisymmetric => "antisym",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SymmetrySector::Symmetric => SymmetrySector::Antisymmetric,
            SymmetrySector::Antisymmetric => SymmetrySector::Symmetric,
        }
    }
}

impl std::str::FromStr for SymmetrySector {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "sym" | "symmetric" | "+" => Ok(SymmetrySector::Symmetric),
            "antisym" | "antisymmetric" | "-" => Ok(SymmetrySector::Antisymmetric),
            other => Err(crate::Error::InvalidParams(format!("unknown sector '{other}'"))),
        }
    }
}

/// Feedback factor `+- e^{i phi2} e^{-s d/v}` for one sector.
#[inline]
pub(crate) fn feedback(s: Complex64, params: &SystemParams, sector: SymmetrySector) -> Complex64 {
    let arg = Complex64::new(0.0, params.phase2()) - s * params.delay();
    arg.exp() * sector.sign()
}

/// Level-2 numerator `s - i omega23 + (gamma33/2)(1 +- e^{i phi2} e^{-s d/v})`.
#[inline]
pub(crate) fn level2_numerator(s: Complex64, params: &SystemParams, sector: SymmetrySector) -> Complex64 {
    let one_e = feedback(s, params, sector) + 1.0;
    s - Complex64::new(0.0, params.omega23) + one_e * (params.gamma33 / 2.0)
}

/// `[G(s)]^{-1}` for the given sector: the characteristic function whose
/// zeros are the complex eigenfrequencies.
pub fn inverse_propagator(s: Complex64, params: &SystemParams, sector: SymmetrySector) -> Complex64 {
    eval_with_deriv(s, params, sector).0
}

/// Analytic `d/ds [G(s)]^{-1}`.
pub fn inverse_propagator_deriv(s: Complex64, params: &SystemParams, sector: SymmetrySector) -> Complex64 {
    eval_with_deriv(s, params, sector).1
}

/// Function value and derivative in one pass.
///
/// Expanded in `k = 1 +- e^{i phi2 - s d/v}`:
/// `s (s - i w23) + k [g33 s + g22 (s - i w23)] / 2 + k^2 (g22 g33 - g23 g32) / 4`.
/// The `k^2` coefficient is formed from the rates directly, so the
/// exponentially large terms far in the left half-plane never cancel.
#[inline]
pub(crate) fn eval_with_deriv(s: Complex64, params: &SystemParams, sector: SymmetrySector) -> (Complex64, Complex64) {
    let e = feedback(s, params, sector);
    let dk = -e * params.delay();
    let k = e + 1.0;
    let iw = Complex64::new(0.0, params.omega23);
    let excess = (params.gamma22 * params.gamma33 - params.gamma23 * params.gamma32) / 4.0;
    let lin = (s * params.gamma33 + (s - iw) * params.gamma22) / 2.0;
    let dlin = (params.gamma22 + params.gamma33) / 2.0;
    let f = s * (s - iw) + k * lin + k * k * excess;
    let df = s * 2.0 - iw + dk * lin + k * dlin + k * dk * (2.0 * excess);
    (f, df)
}

/// Both zeros of the zero-separation characteristic polynomial, ordered by
/// imaginary part.
pub fn coincident_poles(params: &SystemParams, sector: SymmetrySector) -> [Complex64; 2] {
    let k = 1.0 + sector.sign() * Complex64::new(0.0, params.phase2()).exp();
    // (s - i w + g33 k/2)(s + g22 k/2) - g23 g32 k^2/4 = s^2 + b s + c
    let iw = Complex64::new(0.0, params.omega23);
    let p = k * (params.gamma33 / 2.0) - iw;
    let q = k * (params.gamma22 / 2.0);
    let b = p + q;
    let c = p * q - k * k * (params.gamma23 * params.gamma32 / 4.0);
    let disc = (b * b - c * 4.0).sqrt();
    // avoid cancellation in the smaller root
    let big = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
    let small = if big.norm() > 0.0 { c / big } else { Complex64::new(0.0, 0.0) };
    let mut roots = [big, small];
    roots.sort_by(|x, y| x.im.total_cmp(&y.im));
    roots
}
