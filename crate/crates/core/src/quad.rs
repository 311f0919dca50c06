//! Small fixed-order Gauss-Legendre rules used by the quadrature-based
//! oracles and the harmonic-measure integrals. Panels keep integrands smooth;
//! the rules themselves are spectrally accurate per panel.

/// 16-point Gauss-Legendre nodes and weights on [-1, 1].
pub(crate) const GL16: [(f64, f64); 16] = [
    (-9.89400934991649939e-01, 2.71524594117540374e-02),
    (-9.44575023073232600e-01, 6.22535239386477063e-02),
    (-8.65631202387831755e-01, 9.51585116824925914e-02),
    (-7.55404408355002999e-01, 1.24628971255534030e-01),
    (-6.17876244402643771e-01, 1.49595988816576764e-01),
    (-4.58016777657227370e-01, 1.69156519395002619e-01),
    (-2.81603550779258915e-01, 1.82603415044923612e-01),
    (-9.50125098376374544e-02, 1.89450610455068585e-01),
    (9.50125098376374544e-02, 1.89450610455068585e-01),
    (2.81603550779258915e-01, 1.82603415044923612e-01),
    (4.58016777657227370e-01, 1.69156519395002619e-01),
    (6.17876244402643771e-01, 1.49595988816576764e-01),
    (7.55404408355002999e-01, 1.24628971255534030e-01),
    (8.65631202387831755e-01, 9.51585116824925914e-02),
    (9.44575023073232600e-01, 6.22535239386477063e-02),
    (9.89400934991649939e-01, 2.71524594117540374e-02),
];

/// Integrate `f` over [a, b] with a single 16-point rule.
pub(crate) fn gl16<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in &GL16 {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrate `f` over [a, b] split into `panels` equal panels.
pub(crate) fn gl16_panels<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let n = panels.max(1);
    let step = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let lo = a + step * i as f64;
        acc += gl16(lo, lo + step, &mut f);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_on_polynomials() {
        // degree 31 is the exactness limit of a 16-point rule
        let val = gl16(0.0, 1.0, |x| x.powi(31));
        assert_relative_eq!(val, 1.0 / 32.0, epsilon = 1e-14);
    }

    #[test]
    fn panels_agree_with_single_rule_on_smooth_integrand() {
        let a = gl16(0.0, 2.0, |x| (3.0 * x).sin());
        let b = gl16_panels(0.0, 2.0, 4, |x| (3.0 * x).sin());
        let exact = (1.0 - 6.0f64.cos()) / 3.0;
        assert_relative_eq!(a, exact, epsilon = 1e-12);
        assert_relative_eq!(b, exact, epsilon = 1e-14);
    }
}
