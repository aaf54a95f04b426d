use nalgebra::DMatrix;

const CHUNK_BITS: usize = 11;

/// `H(s) = (A/2)·(-Σ_v σx_v) + (B/2)·H_f` on `2^nq` basis states.
///
/// Stored matrix-free: the diagonal `(B/2)·H_f` plus the driver weight `A/2`.
/// Basis index bit `v` set means `σ_v = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseIsingOperator {
    nq: usize,
    diagonal: Vec<f64>,
    driver: f64,
}

impl TransverseIsingOperator {
    /// `problem` holds the H_f energy of each basis state.
    pub fn new(problem: &[f64], a: f64, b: f64) -> Self {
        let nq = problem.len().trailing_zeros() as usize;
        assert_eq!(1usize << nq, problem.len(), "basis size must be a power of two");
        Self { nq, diagonal: problem.iter().map(|e| 0.5 * b * e).collect(), driver: 0.5 * a }
    }

    pub fn num_spins(&self) -> usize {
        self.nq
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Weight `A/2` multiplying `-Σ σx`.
    pub fn driver(&self) -> f64 {
        self.driver
    }

    /// `y = H x`.
    ///
    /// Works through cache-sized chunks: flips of the low qubits stay inside a
    /// chunk, flips of the high qubits read one partner chunk each.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let t = self.driver;
        let low = self.nq.min(CHUNK_BITS);
        let chunk = 1usize << low;
        for (c, (yc, (xc, dc))) in
            y.chunks_exact_mut(chunk).zip(x.chunks_exact(chunk).zip(self.diagonal.chunks_exact(chunk))).enumerate()
        {
            for ((yi, xi), di) in yc.iter_mut().zip(xc).zip(dc) {
                *yi = di * xi;
            }
            if t == 0.0 {
                continue;
            }
            let mut first = 0;
            if low >= 3 {
                for (yb, xb) in yc.chunks_exact_mut(8).zip(xc.chunks_exact(8)) {
                    for j in 0..8 {
                        yb[j] -= t * (xb[j ^ 1] + xb[j ^ 2] + xb[j ^ 4]);
                    }
                }
                first = 3;
            }
            for v in first..low {
                let stride = 1usize << v;
                for (xb, yb) in xc.chunks_exact(2 * stride).zip(yc.chunks_exact_mut(2 * stride)) {
                    let (xlo, xhi) = xb.split_at(stride);
                    let (ylo, yhi) = yb.split_at_mut(stride);
                    for i in 0..stride {
                        ylo[i] -= t * xhi[i];
                        yhi[i] -= t * xlo[i];
                    }
                }
            }
            for v in low..self.nq {
                let partner = (c ^ (1 << (v - low))) * chunk;
                for (yi, xi) in yc.iter_mut().zip(&x[partner..partner + chunk]) {
                    *yi -= t * xi;
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal));
        for b in 0..d {
            for v in 0..self.nq {
                m[(b, b ^ (1 << v))] -= self.driver;
            }
        }
        m
    }

    /// Gershgorin-style bound on the spectrum radius.
    pub fn norm_bound(&self) -> f64 {
        self.driver * self.nq as f64 + self.diagonal.iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }
}
