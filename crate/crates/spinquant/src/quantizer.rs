//! Integer quantization of coupling matrices.
//!
//! A quantizer maps a centered coupling `A'` to one of `2m+1` integer levels
//! `k in {-m, .., +m}`; the level carries the value `k*C` for a common step
//! `C`. Bins are left-open and right-closed; values beyond the outermost
//! edges clamp to `+/-m`, so unbounded inputs are handled. The central bin
//! maps to zero, and its length `l0` is the free design parameter of the
//! scheme.
//!
//! `QuantizedProblem` is the integer image of a `ProblemInstance`: levels
//! `K_ij`, step `C`, a scalar offset `a0` standing in for the coupling mean,
//! and a rescaled field `b`. Its binary file layout (little-endian):
//!
//! ```text
//! magic "SQZ1"  | n: u64 | m: u8 | step: f64 | offset: f64
//! levels: n*n bytes (i8, row-major) | field: n * f64
//! ```

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;

const MAGIC: &[u8; 4] = b"SQZ1";

/// Symmetric scalar quantizer with `2m+1` levels.
#[derive(Clone, Debug)]
pub struct Quantizer {
    m: u8,
    step: f64,
    /// 2m ascending thresholds, antisymmetric around zero.
    edges: Vec<f64>,
}

impl Quantizer {
    /// Equal-bin quantizer for couplings on [-1, 1]: step `C = 2/(2m+1)`,
    /// thresholds at odd multiples of `C/2`, every bin of width `C`.
    pub fn uniform(m: u8) -> Result<Quantizer> {
        let step = 2.0 / (2.0 * m as f64 + 1.0);
        Quantizer::with_central_width(m, step, step)
    }

    /// Quantizer whose bins all have width `l0` (the outermost pair extends
    /// to infinity), with the given step.
    pub fn with_central_width(m: u8, l0: f64, step: f64) -> Result<Quantizer> {
        validate_m(m)?;
        if l0 < 0.0 || !l0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bin width must be >= 0, got {l0}"
            )));
        }
        if step <= 0.0 || !step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "step must be > 0, got {step}"
            )));
        }
        let mut edges = Vec::with_capacity(2 * m as usize);
        for t in (0..m as usize).rev() {
            edges.push(-((2 * t + 1) as f64 * l0 / 2.0));
        }
        for t in 0..m as usize {
            edges.push((2 * t + 1) as f64 * l0 / 2.0);
        }
        Ok(Quantizer { m, step, edges })
    }

    /// Two-level sign quantizer (`m = 1` with an empty central bin); the
    /// step should be the typical magnitude of a coupling, e.g. the
    /// conditional mean of the positive side.
    pub fn binarized(step: f64) -> Result<Quantizer> {
        Quantizer::with_central_width(1, 0.0, step)
    }

    /// Sign quantizer with the step estimated from the instance's centered
    /// couplings (mean of the strictly positive side).
    pub fn binarized_from_sample(inst: &ProblemInstance) -> Result<Quantizer> {
        let n = inst.n();
        let a0 = inst.coupling_mean();
        let mut acc = 0.0;
        let mut cnt = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                let x = inst.coupling(i, j) - a0;
                if x > 0.0 {
                    acc += x;
                    cnt += 1;
                }
            }
        }
        if cnt == 0 {
            return Err(Error::DegenerateQuantizer(
                "no positive centered couplings to scale a sign quantizer".into(),
            ));
        }
        Quantizer::binarized(acc / cnt as f64)
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    /// Value carried by level 1; level `k` carries `k * step`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Length of the central (zero-level) bin.
    pub fn l0(&self) -> f64 {
        self.edges[self.m as usize] - self.edges[self.m as usize - 1]
    }

    /// Integer level of a centered coupling. Bins are `(lo, hi]`; inputs
    /// beyond the outermost edges clamp to `+/-m`.
    pub fn level(&self, x: f64) -> i8 {
        debug_assert!(x.is_finite());
        let t = self.edges.partition_point(|&e| e < x);
        (t as i16 - self.m as i16) as i8
    }

    /// Quantized value `level(x) * step`.
    pub fn value(&self, x: f64) -> f64 {
        self.level(x) as f64 * self.step
    }
}

fn validate_m(m: u8) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    if m > 127 {
        return Err(Error::InvalidArgument(format!(
            "m must be <= 127 so levels fit a signed byte, got {m}"
        )));
    }
    Ok(())
}

/// Sample second moments of a quantizer applied to an instance's centered
/// couplings, over unordered pairs.
#[derive(Clone, Copy, Debug)]
pub struct QuantMoments {
    /// Second moment of the quantized values `a = k*C` (their mean is zero
    /// for a symmetric quantizer on centered data).
    pub sigma_a2: f64,
    /// Cross moment `<a * A'>`.
    pub cross: f64,
    /// Correlation floor `cross / (sqrt(sigma_a2) * sigma_A)`; zero when
    /// degenerate.
    pub rho_min: f64,
    /// Set when every coupling landed in the zero bin (or the instance has
    /// no coupling spread), which makes the correlation undefined.
    pub degenerate: bool,
}

/// Computes `QuantMoments` for `q` on the centered couplings of `inst`,
/// using the ensemble `sigma_A` from the instance metadata.
pub fn sample_moments(inst: &ProblemInstance, q: &Quantizer) -> QuantMoments {
    let n = inst.n();
    let a0 = inst.coupling_mean();
    let mut sum_a2 = 0.0;
    let mut sum_cross = 0.0;
    let mut cnt = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = inst.coupling(i, j) - a0;
            let a = q.value(x);
            sum_a2 += a * a;
            sum_cross += a * x;
            cnt += 1.0;
        }
    }
    let sigma_a2 = sum_a2 / cnt;
    let cross = sum_cross / cnt;
    let sigma = inst.coupling_dev();
    if sigma_a2 <= 0.0 || sigma <= 0.0 {
        return QuantMoments {
            sigma_a2,
            cross,
            rho_min: 0.0,
            degenerate: true,
        };
    }
    QuantMoments {
        sigma_a2,
        cross,
        rho_min: cross / (sigma_a2.sqrt() * sigma),
        degenerate: false,
    }
}

/// Offsets that maximize the field correlation: both the coupling mean and
/// the external field are rescaled by `sigma_a^2 / <a A'>`. Fails when the
/// cross moment is not positive (nothing to correlate against).
pub fn optimal_offsets(
    coupling_mean: f64,
    field: &[f64],
    moments: &QuantMoments,
) -> Result<(f64, Vec<f64>)> {
    if moments.degenerate || moments.cross <= 0.0 {
        return Err(Error::DegenerateQuantizer(format!(
            "cross moment {} admits no offset scaling",
            moments.cross
        )));
    }
    let factor = moments.sigma_a2 / moments.cross;
    let offset = coupling_mean * factor;
    let b = field.iter().map(|x| x * factor).collect();
    Ok((offset, b))
}

/// Searches the bin width `l0` maximizing the sample correlation floor for
/// the all-bins-equal family, by golden-section over `(0, 4*max|A'|/(2m+1)]`
/// to a relative tolerance of 1e-4. Returns the best quantizer and its
/// correlation.
pub fn optimize_l0(inst: &ProblemInstance, m: u8) -> Result<(Quantizer, f64)> {
    validate_m(m)?;
    let n = inst.n();
    let a0 = inst.coupling_mean();
    let mut max_abs = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_abs = max_abs.max((inst.coupling(i, j) - a0).abs());
        }
    }
    if max_abs == 0.0 {
        return Err(Error::DegenerateQuantizer(
            "all centered couplings are zero".into(),
        ));
    }
    let hi = 4.0 * max_abs / (2.0 * m as f64 + 1.0);
    let objective = |l0: f64| -> f64 {
        match candidate(inst, m, l0) {
            Some((_, rho)) => rho,
            None => -1.0,
        }
    };
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    while b - a > 1e-4 * hi {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        }
    }
    let best = 0.5 * (a + b);
    candidate(inst, m, best)
        .or_else(|| candidate(inst, m, if f1 > f2 { x1 } else { x2 }))
        .ok_or_else(|| Error::DegenerateQuantizer("no usable bin width found".into()))
}

/// Builds the width-`l0` quantizer with its step taken from the sample mean
/// of the first positive bin; `None` when that bin is empty or the result
/// degenerate.
fn candidate(inst: &ProblemInstance, m: u8, l0: f64) -> Option<(Quantizer, f64)> {
    let probe = Quantizer::with_central_width(m, l0, 1.0).ok()?;
    let n = inst.n();
    let a0 = inst.coupling_mean();
    let mut acc = 0.0;
    let mut cnt = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = inst.coupling(i, j) - a0;
            if probe.level(x) == 1 {
                acc += x;
                cnt += 1;
            }
        }
    }
    if cnt == 0 {
        return None;
    }
    let q = Quantizer::with_central_width(m, l0, acc / cnt as f64).ok()?;
    let moments = sample_moments(inst, &q);
    if moments.degenerate {
        return None;
    }
    Some((q, moments.rho_min))
}

/// Integer image of a problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedProblem {
    n: usize,
    levels: Vec<i8>, // row-major n*n, |k| <= m, zero diagonal
    m: u8,
    step: f64,
    offset: f64,
    field: Vec<f64>,
}

impl QuantizedProblem {
    /// Quantizes the centered couplings of `inst` with `q` and installs the
    /// correlation-optimal offsets computed from the sample moments.
    pub fn quantize(inst: &ProblemInstance, q: &Quantizer) -> Result<QuantizedProblem> {
        let moments = sample_moments(inst, q);
        let (offset, field) = optimal_offsets(inst.coupling_mean(), inst.field(), &moments)?;
        QuantizedProblem::quantize_with_offsets(inst, q, offset, field)
    }

    /// Same quantization with caller-chosen offsets.
    pub fn quantize_with_offsets(
        inst: &ProblemInstance,
        q: &Quantizer,
        offset: f64,
        field: Vec<f64>,
    ) -> Result<QuantizedProblem> {
        let n = inst.n();
        if field.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: field.len(),
            });
        }
        check_accumulator(n, q.m())?;
        let a0 = inst.coupling_mean();
        let mut levels = vec![0i8; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let k = q.level(inst.coupling(i, j) - a0);
                levels[i * n + j] = k;
                levels[j * n + i] = k;
            }
        }
        Ok(QuantizedProblem {
            n,
            levels,
            m: q.m(),
            step: q.step(),
            offset,
            field,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    pub fn levels(&self) -> &[i8] {
        &self.levels
    }

    pub fn level(&self, i: usize, j: usize) -> i8 {
        self.levels[i * self.n + j]
    }

    /// Integer row sum `sum_j K_ij s_j`; exact.
    pub fn level_sum(&self, spins: &[i8], i: usize) -> i64 {
        let row = &self.levels[i * self.n..(i + 1) * self.n];
        let mut acc = 0i64;
        for j in 0..self.n {
            acc += row[j] as i64 * spins[j] as i64;
        }
        acc
    }

    /// Quantized local field
    /// `h_i = b_i + a0 * (sum_{j != i} s_j) + C * sum_j K_ij s_j`,
    /// assembled from exact integer sums.
    pub fn local_field(&self, state: &crate::problem::SpinState, i: usize) -> f64 {
        assert_eq!(state.len(), self.n);
        let spins = state.spins();
        let spin_sum = state.total() - spins[i] as i64;
        self.field[i] + self.offset * spin_sum as f64 + self.step * self.level_sum(spins, i) as f64
    }

    /// Energy of the quantized functional
    /// `eps(S) = -1/2 S^T (a0 + C K) S - b^T S` (off-diagonal couplings);
    /// the quadratic part is carried by exact integer sums.
    pub fn epsilon_energy(&self, state: &crate::problem::SpinState) -> f64 {
        assert_eq!(state.len(), self.n);
        let spins = state.spins();
        let total = state.total();
        let mut quad = 0i64;
        for i in 0..self.n {
            quad += spins[i] as i64 * self.level_sum(spins, i);
        }
        let mean_part = self.offset * (total * total - self.n as i64) as f64;
        let mut lin = 0.0;
        for (b, &sp) in self.field.iter().zip(spins) {
            lin += b * sp as f64;
        }
        -0.5 * (mean_part + self.step * quad as f64) - lin
    }

    /// Deviation of the quantized couplings, `sqrt(C^2 <K^2>)` over
    /// unordered pairs; the quantized analogue of the instance's coupling
    /// deviation.
    pub fn coupling_dev(&self) -> f64 {
        let mut acc = 0i64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let k = self.levels[i * self.n + j] as i64;
                acc += k * k;
            }
        }
        let pairs = (self.n * (self.n - 1) / 2) as f64;
        self.step * (acc as f64 / pairs).sqrt()
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(MAGIC)?;
        f.write_all(&(self.n as u64).to_le_bytes())?;
        f.write_all(&[self.m])?;
        f.write_all(&self.step.to_le_bytes())?;
        f.write_all(&self.offset.to_le_bytes())?;
        let bytes: Vec<u8> = self.levels.iter().map(|&k| k as u8).collect();
        f.write_all(&bytes)?;
        for b in &self.field {
            f.write_all(&b.to_le_bytes())?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<QuantizedProblem> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        f.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut u8buf = [0u8; 8];
        f.read_exact(&mut u8buf)?;
        let n = u64::from_le_bytes(u8buf) as usize;
        let mut mb = [0u8; 1];
        f.read_exact(&mut mb)?;
        let m = mb[0];
        validate_m(m)?;
        check_accumulator(n, m)?;
        f.read_exact(&mut u8buf)?;
        let step = f64::from_le_bytes(u8buf);
        f.read_exact(&mut u8buf)?;
        let offset = f64::from_le_bytes(u8buf);
        let mut raw = vec![0u8; n * n];
        f.read_exact(&mut raw)?;
        let levels: Vec<i8> = raw.into_iter().map(|b| b as i8).collect();
        if let Some(bad) = levels.iter().position(|&k| k.unsigned_abs() > m) {
            return Err(Error::Format(format!(
                "level {} at ({}, {}) exceeds m={m}",
                levels[bad],
                bad / n,
                bad % n
            )));
        }
        let mut field = vec![0.0; n];
        for b in field.iter_mut() {
            f.read_exact(&mut u8buf)?;
            *b = f64::from_le_bytes(u8buf);
        }
        Ok(QuantizedProblem {
            n,
            levels,
            m,
            step,
            offset,
            field,
        })
    }

    /// Human-readable dump of the integer levels, one CSV row per matrix row.
    pub fn write_levels_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.levels[i * self.n + j]);
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Integer field sums are bounded by `n * m`; rejects sizes whose energy
/// accumulator `n^2 * m` could leave i64.
fn check_accumulator(n: usize, m: u8) -> Result<()> {
    let bound = (n as u128) * (n as u128) * (m as u128);
    if bound > i64::MAX as u128 {
        return Err(Error::InvalidArgument(format!(
            "instance too large for the integer accumulator: n={n}, m={m}"
        )));
    }
    Ok(())
}
