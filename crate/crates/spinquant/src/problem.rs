//! Problem instances for binary quadratic minimization.
//!
//! The functional is
//!
//! ```text
//! E(S) = -1/2 * S^T A S - B^T S,    s_i = +/-1,
//! ```
//!
//! with a symmetric zero-diagonal coupling matrix `A` and an external field
//! `B`. The local field `H_i = B_i + sum_{j != i} A_ij s_j` is the negative
//! gradient of `E` with respect to `s_i`, so aligning a spin with its local
//! field never increases the energy.

use std::fmt::Write as _;
use std::path::Path;

use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Off-diagonal symmetry is validated to this tolerance when reading
/// matrices from CSV; tighter mismatches are symmetrized exactly.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Spin configuration with entries +/-1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpinState(Vec<i8>);

impl SpinState {
    /// Validates that every entry is +1 or -1.
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(pos) = spins.iter().position(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidArgument(format!(
                "spin {} at index {pos} is not +/-1",
                spins[pos]
            )));
        }
        Ok(SpinState(spins))
    }

    /// Uniformly random +/-1 configuration.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        SpinState(
            (0..n)
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Sum of all spins; fits i64 for any practical size.
    pub fn total(&self) -> i64 {
        self.0.iter().map(|&s| s as i64).sum()
    }

    /// Number of disagreeing sites. Both states must have the same length.
    pub fn hamming(&self, other: &SpinState) -> usize {
        assert_eq!(self.0.len(), other.0.len(), "hamming on unequal lengths");
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Compact text form, one `+` or `-` per spin.
    pub fn to_compact(&self) -> String {
        self.0
            .iter()
            .map(|&s| if s > 0 { '+' } else { '-' })
            .collect()
    }

    pub fn negated(&self) -> SpinState {
        SpinState(self.0.iter().map(|s| -s).collect())
    }
}

/// Distribution of the centered off-diagonal couplings.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CouplingDist {
    /// Uniform on [-1, 1]; standard deviation 1/sqrt(3).
    Uniform,
    /// Standard normal.
    Gaussian,
}

impl CouplingDist {
    /// Ensemble standard deviation of a single centered coupling.
    pub fn sigma(self) -> f64 {
        match self {
            CouplingDist::Uniform => 1.0 / 3.0_f64.sqrt(),
            CouplingDist::Gaussian => 1.0,
        }
    }
}

/// External-field specification for generated instances.
#[derive(Clone, Debug)]
pub enum FieldSpec {
    /// Constant field `B_i = beta * sqrt(N) * sigma_A`, scaled so that a
    /// unit beta is comparable to the local-field deviation.
    Beta(f64),
    /// Explicit per-site values; length must equal N.
    Explicit(Vec<f64>),
}

/// Instance of the quadratic functional: couplings, field and the ensemble
/// parameters they were drawn with.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    n: usize,
    couplings: Vec<f64>, // row-major n*n, symmetric, zero diagonal
    field: Vec<f64>,
    coupling_mean: f64,
    coupling_dev: f64,
}

impl ProblemInstance {
    /// Builds an instance from raw parts, validating shape, symmetry and the
    /// zero diagonal.
    pub fn new(
        n: usize,
        couplings: Vec<f64>,
        field: Vec<f64>,
        coupling_mean: f64,
        coupling_dev: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("N must be >= 2, got {n}")));
        }
        if couplings.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: couplings.len(),
            });
        }
        if field.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: field.len(),
            });
        }
        if let Some(bad) = couplings.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite coupling at ({}, {})",
                bad / n,
                bad % n
            )));
        }
        for i in 0..n {
            if couplings[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry ({i}, {i}) must be zero"
                )));
            }
            for j in (i + 1)..n {
                let (u, l) = (couplings[i * n + j], couplings[j * n + i]);
                if u != l {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        left: u,
                        right: l,
                    });
                }
            }
        }
        Ok(ProblemInstance {
            n,
            couplings,
            field,
            coupling_mean,
            coupling_dev,
        })
    }

    /// Draws a random instance: off-diagonal couplings `A_ij = A0 + A'_ij`
    /// with `A'_ij` i.i.d. from `dist` (mirrored across the diagonal), and
    /// the field per `spec`. Deterministic in the seed.
    pub fn generate(
        n: usize,
        dist: CouplingDist,
        coupling_mean: f64,
        spec: FieldSpec,
        seed: u64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("N must be >= 2, got {n}")));
        }
        let sigma = dist.sigma();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unif = Uniform::new_inclusive(-1.0, 1.0);
        let mut couplings = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let centered: f64 = match dist {
                    CouplingDist::Uniform => rng.sample(unif),
                    CouplingDist::Gaussian => rng.sample(StandardNormal),
                };
                let v = coupling_mean + centered;
                couplings[i * n + j] = v;
                couplings[j * n + i] = v;
            }
        }
        let field = match spec {
            FieldSpec::Beta(beta) => vec![beta * (n as f64).sqrt() * sigma; n],
            FieldSpec::Explicit(b) => {
                if b.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: b.len(),
                    });
                }
                b
            }
        };
        Ok(ProblemInstance {
            n,
            couplings,
            field,
            coupling_mean,
            coupling_dev: sigma,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major couplings, length `n*n`.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    /// Ensemble mean of the off-diagonal couplings.
    pub fn coupling_mean(&self) -> f64 {
        self.coupling_mean
    }

    /// Ensemble standard deviation of the centered couplings.
    pub fn coupling_dev(&self) -> f64 {
        self.coupling_dev
    }

    /// E(S) = -1/2 S^T A S - B^T S, accumulated row-major in f64.
    pub fn energy(&self, state: &SpinState) -> f64 {
        assert_eq!(state.len(), self.n, "state length mismatch");
        let s = state.spins();
        let mut quad = 0.0;
        for i in 0..self.n {
            let row = &self.couplings[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += row[j] * s[j] as f64;
            }
            quad += s[i] as f64 * acc;
        }
        let mut lin = 0.0;
        for (b, &sp) in self.field.iter().zip(s) {
            lin += b * sp as f64;
        }
        -0.5 * quad - lin
    }

    /// Local field `H_i = B_i + sum_{j != i} A_ij s_j`, the negative
    /// gradient of the energy. The zero diagonal lets the sum run over the
    /// whole row.
    pub fn local_field(&self, state: &SpinState, i: usize) -> f64 {
        assert_eq!(state.len(), self.n, "state length mismatch");
        assert!(i < self.n, "site index out of range");
        let s = state.spins();
        let row = &self.couplings[i * self.n..(i + 1) * self.n];
        let mut acc = 0.0;
        for j in 0..self.n {
            acc += row[j] * s[j] as f64;
        }
        self.field[i] + acc
    }

    /// Reads an instance from a CSV coupling matrix and an optional one-column
    /// field file (missing field means B = 0). Ensemble parameters are
    /// estimated from the off-diagonal sample moments.
    pub fn from_csv(matrix_path: &Path, field_path: Option<&Path>) -> Result<Self> {
        let (n, couplings) = read_matrix_csv(matrix_path)?;
        let field = match field_path {
            Some(p) => {
                let v = read_vector_csv(p)?;
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: v.len(),
                    });
                }
                v
            }
            None => vec![0.0; n],
        };
        let mut mean = 0.0;
        let mut count = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                mean += couplings[i * n + j];
                count += 1.0;
            }
        }
        mean /= count;
        let mut var = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = couplings[i * n + j] - mean;
                var += d * d;
            }
        }
        var /= count;
        ProblemInstance::new(n, couplings, field, mean, var.sqrt())
    }

    /// Writes the coupling matrix (and the field when `field_path` is given)
    /// in the same CSV layout `from_csv` accepts.
    pub fn to_csv(&self, matrix_path: &Path, field_path: Option<&Path>) -> Result<()> {
        write_matrix_csv(matrix_path, self.n, &self.couplings)?;
        if let Some(p) = field_path {
            write_vector_csv(p, &self.field)?;
        }
        Ok(())
    }
}

/// Reads a square CSV of reals. Validates symmetry to `SYMMETRY_TOL`
/// (reporting the first violating cell), then mirrors the upper triangle and
/// zeroes the diagonal so the result is exactly symmetric.
pub fn read_matrix_csv(path: &Path) -> Result<(usize, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ri, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (ci, cell) in line.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: ri,
                col: ci,
                msg: format!("not a number: {:?}", cell.trim()),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    let n = rows.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "matrix must be at least 2x2, got {n} rows"
        )));
    }
    for (ri, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parse {
                row: ri,
                col: row.len(),
                msg: format!("expected {n} columns, got {}", row.len()),
            });
        }
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = rows[i][j];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (u, l) = (a[i * n + j], a[j * n + i]);
            if (u - l).abs() > SYMMETRY_TOL {
                return Err(Error::Asymmetric {
                    row: i,
                    col: j,
                    left: u,
                    right: l,
                });
            }
            a[j * n + i] = u;
        }
        a[i * n + i] = 0.0;
    }
    Ok((n, a))
}

/// Writes a row-major square matrix as CSV with shortest round-trip floats.
pub fn write_matrix_csv(path: &Path, n: usize, a: &[f64]) -> Result<()> {
    assert_eq!(a.len(), n * n);
    let mut out = String::new();
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", a[i * n + j]);
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a one-column CSV of reals.
pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut v = Vec::new();
    for (ri, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        v.push(t.parse().map_err(|_| Error::Parse {
            row: ri,
            col: 0,
            msg: format!("not a number: {t:?}"),
        })?);
    }
    Ok(v)
}

/// Writes a one-column CSV of reals.
pub fn write_vector_csv(path: &Path, v: &[f64]) -> Result<()> {
    let mut out = String::new();
    for x in v {
        let _ = writeln!(out, "{x}");
    }
    std::fs::write(path, out)?;
    Ok(())
}
