//! Linear time-invariant state-space mixing, applied independently to each
//! embedding column.
//!
//! A continuous system `(A, B, C, D, dt)` is discretized with the bilinear
//! transform and then evaluated two ways that must agree:
//!
//! * recurrently, stepping `s <- Ab s + Bb u[t]`, `y[t] = C s + D u[t]`;
//! * convolutionally, as `y = Kb (*) u + D u` with the impulse response
//!   `Kb[l] = C Ab^l Bb`.
//!
//! The state vector holds coefficients of an orthogonal polynomial
//! expansion of the input history, so the history can be approximately
//! reconstructed from the final state alone.

use crate::fft::linear_convolve;
use crate::mat::{solve, RealMat};
use crate::mixers::{Mixer, ParamKind, Taxonomy};
use crate::seq::Seq;
use crate::{Error, Result};

/// A continuous LTI system plus its discretization step.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmSystem {
    a: RealMat,
    b: RealMat,
    c: RealMat,
    d_term: f64,
    dt: f64,
}

/// The `(A, B)` pair projecting an input history onto scaled Legendre
/// polynomials: `A[n][k] = -sqrt(2n+1) sqrt(2k+1)` below the diagonal,
/// `-(n+1)` on it, zero above; `B[n] = sqrt(2n+1)` (0-indexed).
pub fn hippo_legs_matrices(order: usize) -> (RealMat, RealMat) {
    let mut a = RealMat::zeros(order, order);
    let mut b = RealMat::zeros(order, 1);
    for n in 0..order {
        let sn = (2.0 * n as f64 + 1.0).sqrt();
        b.set(n, 0, sn);
        for k in 0..=n {
            if k == n {
                a.set(n, n, -(n as f64 + 1.0));
            } else {
                let sk = (2.0 * k as f64 + 1.0).sqrt();
                a.set(n, k, -sn * sk);
            }
        }
    }
    (a, b)
}

impl SsmSystem {
    pub fn new(a: RealMat, b: RealMat, c: RealMat, d_term: f64, dt: f64) -> Result<Self> {
        let n = a.rows();
        if n == 0 || a.cols() != n {
            return Err(Error::Shape(format!("state matrix is {}x{}, need square and nonempty", a.rows(), a.cols())));
        }
        if b.rows() != n || b.cols() != 1 {
            return Err(Error::Shape(format!("input matrix is {}x{}, expected {n}x1", b.rows(), b.cols())));
        }
        if c.rows() != 1 || c.cols() != n {
            return Err(Error::Shape(format!("output matrix is {}x{}, expected 1x{n}", c.rows(), c.cols())));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Parameter(format!("step size must be positive, got {dt}")));
        }
        Ok(Self { a, b, c, d_term, dt })
    }

    /// The polynomial-projection system with an all-ones readout row and no
    /// feedthrough.
    pub fn hippo_legs(order: usize, dt: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::Parameter("state order must be at least 1".into()));
        }
        let (a, b) = hippo_legs_matrices(order);
        let c = RealMat::from_vec(1, order, vec![1.0; order])?;
        Self::new(a, b, c, 0.0, dt)
    }

    /// State order `N`.
    pub fn order(&self) -> usize {
        self.a.rows()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn d_term(&self) -> f64 {
        self.d_term
    }

    pub fn c(&self) -> &RealMat {
        &self.c
    }

    /// Bilinear discretization: `Ab = (I - dt/2 A)^-1 (I + dt/2 A)` and
    /// `Bb = (I - dt/2 A)^-1 dt B`, solved with partial pivoting.
    pub fn discretize(&self) -> Result<(RealMat, RealMat)> {
        let n = self.order();
        let half = 0.5 * self.dt;
        let mut minus = RealMat::identity(n);
        let mut plus = RealMat::identity(n);
        for i in 0..n {
            for j in 0..n {
                let v = half * self.a.get(i, j);
                minus.set(i, j, minus.get(i, j) - v);
                plus.set(i, j, plus.get(i, j) + v);
            }
        }
        // One elimination for both right-hand sides: [I + dt/2 A | dt B].
        let mut rhs = RealMat::zeros(n, n + 1);
        rhs.paste(0, 0, &plus);
        rhs.paste(0, n, &self.b.scale(self.dt));
        let solved = solve(&minus, &rhs)?;
        Ok((solved.col_block(0, n), solved.col_block(n, n + 1)))
    }
}

/// Final internal state after scanning a sequence: one coefficient column
/// per embedding dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmState {
    coeffs: RealMat,
    step: usize,
}

impl SsmState {
    /// `N x D` coefficient matrix.
    pub fn coeffs(&self) -> &RealMat {
        &self.coeffs
    }

    /// Coefficient column for one embedding dimension.
    pub fn column(&self, d: usize) -> Vec<f64> {
        self.coeffs.column(d)
    }

    /// How many tokens have been consumed.
    pub fn step(&self) -> usize {
        self.step
    }
}

/// Runs the state recursion over every column and returns the output
/// sequence together with the final state.
pub fn ssm_scan(x: &Seq, sys: &SsmSystem) -> Result<(Seq, SsmState)> {
    let (a_bar, b_bar) = sys.discretize()?;
    let n = sys.order();
    let mut out = RealMat::zeros(x.len(), x.dim());
    let mut final_state = RealMat::zeros(n, x.dim());
    let mut state = vec![0.0; n];
    let mut next = vec![0.0; n];
    for d in 0..x.dim() {
        state.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..x.len() {
            let u = x.values().get(t, d);
            for (i, slot) in next.iter_mut().enumerate() {
                let mut acc = b_bar.get(i, 0) * u;
                for (j, &s) in state.iter().enumerate() {
                    acc += a_bar.get(i, j) * s;
                }
                *slot = acc;
            }
            std::mem::swap(&mut state, &mut next);
            let mut y = sys.d_term * u;
            for (j, &s) in state.iter().enumerate() {
                y += sys.c.get(0, j) * s;
            }
            out.set(t, d, y);
        }
        final_state.set_column(d, &state);
    }
    Ok((Seq::new(out)?, SsmState { coeffs: final_state, step: x.len() }))
}

/// Recurrent evaluation; the output half of [`ssm_scan`].
pub fn ssm_mix_recurrent(x: &Seq, sys: &SsmSystem) -> Result<Seq> {
    ssm_scan(x, sys).map(|(seq, _)| seq)
}

/// Discrete impulse response `Kb[l] = C Ab^l Bb` for `l = 0..len`, computed
/// by propagating the state vector rather than forming matrix powers.
pub fn ssm_kernel(sys: &SsmSystem, len: usize) -> Result<Vec<f64>> {
    let (a_bar, b_bar) = sys.discretize()?;
    let n = sys.order();
    let mut state: Vec<f64> = (0..n).map(|i| b_bar.get(i, 0)).collect();
    let mut next = vec![0.0; n];
    let mut kernel = Vec::with_capacity(len);
    for _ in 0..len {
        let mut y = 0.0;
        for (j, &s) in state.iter().enumerate() {
            y += sys.c.get(0, j) * s;
        }
        kernel.push(y);
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &s) in state.iter().enumerate() {
                acc += a_bar.get(i, j) * s;
            }
            *slot = acc;
        }
        std::mem::swap(&mut state, &mut next);
    }
    Ok(kernel)
}

/// Convolutional evaluation: per column, causal FFT convolution with the
/// impulse response plus the feedthrough term. Zero initial state, so no
/// homogeneous term appears.
pub fn ssm_mix_convolutional(x: &Seq, sys: &SsmSystem) -> Result<Seq> {
    let kernel = ssm_kernel(sys, x.len())?;
    let mut out = RealMat::zeros(x.len(), x.dim());
    for d in 0..x.dim() {
        let col = x.values().column(d);
        let full = linear_convolve(&kernel, &col);
        let mut y = full[..x.len()].to_vec();
        if sys.d_term != 0.0 {
            for (o, &u) in y.iter_mut().zip(&col) {
                *o += sys.d_term * u;
            }
        }
        out.set_column(d, &y);
    }
    Seq::new(out)
}

/// Normalized Legendre values `sqrt(2n+1) P_n(s)` for `n = 0..order`.
fn legendre_basis(order: usize, s: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(order);
    let mut p_prev = 1.0; // P_0
    let mut p = s; // P_1
    for n in 0..order {
        let pn = if n == 0 {
            p_prev
        } else if n == 1 {
            p
        } else {
            // (n)P_n = (2n-1) s P_{n-1} - (n-1) P_{n-2}
            let next = ((2 * n - 1) as f64 * s * p - (n - 1) as f64 * p_prev) / n as f64;
            p_prev = p;
            p = next;
            next
        };
        values.push((2.0 * n as f64 + 1.0).sqrt() * pn);
    }
    values
}

/// Evaluates the polynomial expansion held in one state column over the
/// most recent `window` of the `t` elapsed steps, newest last, at cell
/// centers.
///
/// A sample at lag `l` steps enters the basis at coordinate
/// `2 exp(-l dt) - 1`: the fixed-step recursion is the log-time-warped form
/// of the growing-window projection, so recent history occupies most of the
/// basis interval and the far past is compressed toward its left edge.
pub fn hippo_reconstruct(coeffs: &[f64], dt: f64, t: usize, window: usize) -> Vec<f64> {
    assert!(window >= 1 && t >= window, "window must satisfy 1 <= window <= t");
    assert!(dt > 0.0, "step size must be positive");
    let order = coeffs.len();
    let mut out = Vec::with_capacity(window);
    for j in 0..window {
        let lag = (window - j) as f64 - 0.5;
        let s = 2.0 * (-lag * dt).exp() - 1.0;
        let basis = legendre_basis(order, s);
        out.push(coeffs.iter().zip(&basis).map(|(c, b)| c * b).sum());
    }
    out
}

/// Which evaluation route the mixer interface uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsmPath {
    Recurrent,
    Convolutional,
}

/// State-space mixing behind the common interface.
#[derive(Debug, Clone)]
pub struct SsmMixer {
    pub system: SsmSystem,
    pub path: SsmPath,
}

impl Mixer for SsmMixer {
    fn name(&self) -> &'static str {
        "ssm"
    }

    fn taxonomy(&self) -> Taxonomy {
        // Fixed structured matrices, but the mixing weights reach the output
        // through the input-driven state.
        Taxonomy::new(ParamKind::Fixed, true)
    }

    fn mix(&self, x: &Seq) -> Result<Seq> {
        match self.path {
            SsmPath::Recurrent => ssm_mix_recurrent(x, &self.system),
            SsmPath::Convolutional => ssm_mix_convolutional(x, &self.system),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrator() -> SsmSystem {
        SsmSystem::new(
            RealMat::zeros(1, 1),
            RealMat::from_vec(1, 1, vec![1.0]).unwrap(),
            RealMat::from_vec(1, 1, vec![1.0]).unwrap(),
            0.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn legs_matrices_at_small_orders() {
        let (a, b) = hippo_legs_matrices(1);
        assert_eq!(a.data(), &[-1.0]);
        assert_eq!(b.data(), &[1.0]);
        let (a, b) = hippo_legs_matrices(2);
        let s3 = 3.0f64.sqrt();
        assert_eq!(a.data(), &[-1.0, 0.0, -s3, -2.0]);
        assert_eq!(b.data(), &[1.0, s3]);
    }

    #[test]
    fn legs_matrix_is_lower_triangular() {
        let (a, _) = hippo_legs_matrices(16);
        for n in 0..16 {
            for k in 0..16 {
                if k > n {
                    assert_eq!(a.get(n, k), 0.0);
                } else {
                    assert!(a.get(n, k) < 0.0);
                }
            }
        }
    }

    #[test]
    fn discretized_legs_is_stable() {
        // Lower-triangular A keeps Ab lower triangular, so the spectral
        // radius is the largest diagonal magnitude.
        let sys = SsmSystem::hippo_legs(24, 0.01).unwrap();
        let (a_bar, _) = sys.discretize().unwrap();
        let radius = (0..24).fold(0.0f64, |m, i| m.max(a_bar.get(i, i).abs()));
        assert!(radius <= 1.0 + 1e-6, "spectral radius {radius}");
    }

    #[test]
    fn zero_dynamics_discretize_to_the_pure_integrator() {
        let sys = SsmSystem::new(
            RealMat::zeros(1, 1),
            RealMat::from_vec(1, 1, vec![1.0]).unwrap(),
            RealMat::from_vec(1, 1, vec![1.0]).unwrap(),
            0.0,
            0.1,
        )
        .unwrap();
        let (a_bar, b_bar) = sys.discretize().unwrap();
        assert!((a_bar.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((b_bar.get(0, 0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn singular_step_matrix_reports_a_condition_estimate() {
        // A = 2/dt makes (I - dt/2 A) exactly zero.
        let sys = SsmSystem::new(
            RealMat::from_vec(1, 1, vec![20.0]).unwrap(),
            RealMat::from_vec(1, 1, vec![1.0]).unwrap(),
            RealMat::from_vec(1, 1, vec![1.0]).unwrap(),
            0.0,
            0.1,
        )
        .unwrap();
        let err = sys.discretize().unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
        assert!(err.to_string().contains("condition estimate"));
    }

    #[test]
    fn small_step_matches_first_order_expansion() {
        let dt = 1e-4;
        let sys = SsmSystem::new(
            RealMat::from_vec(1, 1, vec![-1.0]).unwrap(),
            RealMat::from_vec(1, 1, vec![1.0]).unwrap(),
            RealMat::from_vec(1, 1, vec![1.0]).unwrap(),
            0.0,
            dt,
        )
        .unwrap();
        let (a_bar, _) = sys.discretize().unwrap();
        assert!((a_bar.get(0, 0) - (1.0 - dt)).abs() <= 1e-8);
    }

    #[test]
    fn integrator_accumulates_prefix_sums() {
        let x = Seq::new(RealMat::from_vec(4, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap()).unwrap();
        let y = ssm_mix_recurrent(&x, &integrator()).unwrap();
        assert_eq!(y.values().data(), &[1.0, 3.0, 6.0, 10.0]);
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let x = Seq::new(RealMat::zeros(16, 3)).unwrap();
        let sys = SsmSystem::hippo_legs(8, 0.05).unwrap();
        let y = ssm_mix_recurrent(&x, &sys).unwrap();
        assert_eq!(y.values().max_abs(), 0.0);
    }

    #[test]
    fn integrator_kernel_is_constant() {
        let kernel = ssm_kernel(&integrator(), 8).unwrap();
        for v in kernel {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_kernel_is_geometric() {
        // Choose A so the discrete pole and gain are easy to predict.
        let sys = SsmSystem::new(
            RealMat::from_vec(1, 1, vec![-0.5]).unwrap(),
            RealMat::from_vec(1, 1, vec![2.0]).unwrap(),
            RealMat::from_vec(1, 1, vec![3.0]).unwrap(),
            0.0,
            0.2,
        )
        .unwrap();
        let (a_bar, b_bar) = sys.discretize().unwrap();
        let (a, b, c) = (a_bar.get(0, 0), b_bar.get(0, 0), 3.0);
        let kernel = ssm_kernel(&sys, 16).unwrap();
        for (l, v) in kernel.iter().enumerate() {
            assert!((v - c * a.powi(l as i32) * b).abs() < 1e-12, "lag {l}");
        }
    }

    #[test]
    fn impulse_response_is_the_kernel() {
        let sys = SsmSystem::hippo_legs(6, 0.1).unwrap();
        let mut data = vec![0.0; 32];
        data[0] = 1.0;
        let x = Seq::new(RealMat::from_vec(32, 1, data).unwrap()).unwrap();
        let y = ssm_mix_convolutional(&x, &sys).unwrap();
        let kernel = ssm_kernel(&sys, 32).unwrap();
        for (t, k) in kernel.iter().enumerate() {
            assert!((y.values().get(t, 0) - k).abs() < 1e-10);
        }
    }

    #[test]
    fn doubling_the_input_doubles_the_output_exactly() {
        // Scaling by a power of two is exact in floating point, so LTI
        // homogeneity holds bitwise on both routes.
        let x = Seq::standard_normal(64, 2, 50).unwrap();
        let x2 = Seq::new(x.values().scale(2.0)).unwrap();
        let sys = SsmSystem::hippo_legs(8, 0.05).unwrap();
        for mix in [ssm_mix_recurrent, ssm_mix_convolutional] {
            let y = mix(&x, &sys).unwrap();
            let y2 = mix(&x2, &sys).unwrap();
            assert_eq!(y.values().scale(2.0), *y2.values());
        }
    }

    #[test]
    fn recurrent_output_is_causal_bitwise() {
        let x = Seq::standard_normal(32, 1, 51).unwrap();
        let sys = SsmSystem::hippo_legs(8, 0.05).unwrap();
        let y = ssm_mix_recurrent(&x, &sys).unwrap();
        let mut perturbed = x.values().clone();
        perturbed.set(20, 0, 99.0);
        let yp = ssm_mix_recurrent(&Seq::new(perturbed).unwrap(), &sys).unwrap();
        for t in 0..20 {
            assert_eq!(y.values().get(t, 0), yp.values().get(t, 0));
        }
        assert_ne!(y.values().get(20, 0), yp.values().get(20, 0));
    }

    #[test]
    fn columns_mix_independently() {
        let x = Seq::standard_normal(24, 3, 52).unwrap();
        let sys = SsmSystem::hippo_legs(6, 0.1).unwrap();
        let joint = ssm_mix_recurrent(&x, &sys).unwrap();
        for d in 0..3 {
            let col = RealMat::from_vec(24, 1, x.values().column(d)).unwrap();
            let single = ssm_mix_recurrent(&Seq::new(col).unwrap(), &sys).unwrap();
            for t in 0..24 {
                assert_eq!(joint.values().get(t, d), single.values().get(t, 0));
            }
        }
    }

    #[test]
    fn single_basis_reconstruction_is_constant() {
        let values = hippo_reconstruct(&[2.0], 0.05, 10, 10);
        for v in values {
            assert!((v - 2.0).abs() < 1e-15); // sqrt(1) * P_0 = 1
        }
    }
}
