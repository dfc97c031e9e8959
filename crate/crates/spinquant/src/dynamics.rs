//! Asynchronous single-spin descent.
//!
//! One site is updated at a time: `s_i <- sign(H_i)`, with a zero field
//! keeping the current spin. Each sweep visits every site once in a fresh
//! random order drawn from the run's seeded generator; the descent stops at
//! the first sweep with no accepted flip, which certifies one-flip
//! stability. Every accepted flip strictly lowers the functional the
//! descent runs on, so termination is guaranteed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{ProblemInstance, SpinState};
use crate::quantizer::QuantizedProblem;

/// Sweep cap used by the command-line tools.
pub const DEFAULT_MAX_SWEEPS: usize = 1000;

/// Converged (or partial, on non-convergence) descent outcome.
#[derive(Clone, Debug)]
pub struct MinimumRecord {
    pub state: SpinState,
    /// Final value of the functional the descent ran on, recomputed from
    /// scratch at the final state.
    pub energy: f64,
    /// Accepted flips over the whole run.
    pub flips: usize,
    /// Completed sweeps, including the terminal zero-flip sweep.
    pub sweeps: usize,
    /// Normalized depth `r = -2 E / (sigma * N^(3/2))`, with `sigma` the
    /// coupling deviation of the functional descended; zero when that scale
    /// is degenerate.
    pub depth: f64,
}

/// Per-sweep descent statistics for optional tracing.
#[derive(Clone, Copy, Debug)]
pub struct SweepTrace {
    pub sweep: usize,
    pub flips: usize,
    pub energy: f64,
}

/// Outcome of quantized descent followed by exact refinement.
#[derive(Clone, Debug)]
pub struct HybridResult {
    /// Minimum of the quantized functional (its `energy` is the quantized
    /// one).
    pub quantized: MinimumRecord,
    /// Exact-descent refinement started from the quantized minimum.
    pub refined: MinimumRecord,
    /// Relative exact-energy excess of the quantized minimum,
    /// `(E(S*) - E(S0)) / |E(S0)|`.
    pub energy_gap: f64,
    /// Hamming distance between the two minima.
    pub distance: usize,
}

fn depth_of(energy: f64, sigma: f64, n: usize) -> f64 {
    if sigma > 0.0 {
        -2.0 * energy / (sigma * (n as f64).powf(1.5))
    } else {
        0.0
    }
}

/// Descends the exact functional from `start`. The seed drives only the
/// visit order; the result is deterministic in `(instance, start, seed)`.
pub fn descend_exact(
    inst: &ProblemInstance,
    start: &SpinState,
    seed: u64,
    max_sweeps: usize,
) -> Result<MinimumRecord> {
    descend_exact_traced(inst, start, seed, max_sweeps, None)
}

/// `descend_exact` with an optional per-sweep trace sink.
pub fn descend_exact_traced(
    inst: &ProblemInstance,
    start: &SpinState,
    seed: u64,
    max_sweeps: usize,
    mut trace: Option<&mut Vec<SweepTrace>>,
) -> Result<MinimumRecord> {
    let n = inst.n();
    if start.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: start.len(),
        });
    }
    if max_sweeps == 0 {
        return Err(Error::InvalidArgument("max_sweeps must be >= 1".into()));
    }
    let mut state = start.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut total_flips = 0usize;
    for sweep in 1..=max_sweeps {
        order.shuffle(&mut rng);
        let mut flips = 0usize;
        for &i in &order {
            let h = inst.local_field(&state, i);
            let s = state.get(i);
            if (h > 0.0 && s < 0) || (h < 0.0 && s > 0) {
                state.flip(i);
                flips += 1;
            }
        }
        total_flips += flips;
        if let Some(t) = trace.as_deref_mut() {
            t.push(SweepTrace {
                sweep,
                flips,
                energy: inst.energy(&state),
            });
        }
        if flips == 0 {
            let energy = inst.energy(&state);
            return Ok(MinimumRecord {
                depth: depth_of(energy, inst.coupling_dev(), n),
                state,
                energy,
                flips: total_flips,
                sweeps: sweep,
            });
        }
    }
    let energy = inst.energy(&state);
    Err(Error::NonConvergence {
        max_sweeps,
        record: Box::new(MinimumRecord {
            depth: depth_of(energy, inst.coupling_dev(), n),
            state,
            energy,
            flips: total_flips,
            sweeps: max_sweeps,
        }),
    })
}

/// Descends the quantized functional. Row sums of the integer levels and
/// the total spin are maintained incrementally and exactly; the field is
/// assembled as `h_i = b_i + a0 (sum s_j - s_i) + C * ksum_i` per visit, so
/// the trajectory is bit-reproducible.
pub fn descend_quantized(
    qp: &QuantizedProblem,
    start: &SpinState,
    seed: u64,
    max_sweeps: usize,
) -> Result<MinimumRecord> {
    descend_quantized_traced(qp, start, seed, max_sweeps, None)
}

/// `descend_quantized` with an optional per-sweep trace sink.
pub fn descend_quantized_traced(
    qp: &QuantizedProblem,
    start: &SpinState,
    seed: u64,
    max_sweeps: usize,
    mut trace: Option<&mut Vec<SweepTrace>>,
) -> Result<MinimumRecord> {
    let n = qp.n();
    if start.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: start.len(),
        });
    }
    if max_sweeps == 0 {
        return Err(Error::InvalidArgument("max_sweeps must be >= 1".into()));
    }
    let mut state = start.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut total: i64 = state.total();
    let mut ksums: Vec<i64> = (0..n).map(|i| qp.level_sum(state.spins(), i)).collect();
    let levels = qp.levels();
    let (b, a0, c) = (qp.field(), qp.offset(), qp.step());
    let mut total_flips = 0usize;
    for sweep in 1..=max_sweeps {
        order.shuffle(&mut rng);
        let mut flips = 0usize;
        for &i in &order {
            let s = state.get(i);
            let h = b[i] + a0 * (total - s as i64) as f64 + c * ksums[i] as f64;
            if (h > 0.0 && s < 0) || (h < 0.0 && s > 0) {
                state.flip(i);
                let new = state.get(i) as i64;
                total += 2 * new;
                let row = &levels[i * n..(i + 1) * n];
                for (j, ks) in ksums.iter_mut().enumerate() {
                    *ks += 2 * row[j] as i64 * new;
                }
                flips += 1;
            }
        }
        total_flips += flips;
        if let Some(t) = trace.as_deref_mut() {
            t.push(SweepTrace {
                sweep,
                flips,
                energy: qp.epsilon_energy(&state),
            });
        }
        if flips == 0 {
            debug_assert!((0..n).all(|i| ksums[i] == qp.level_sum(state.spins(), i)));
            let energy = qp.epsilon_energy(&state);
            return Ok(MinimumRecord {
                depth: depth_of(energy, qp.coupling_dev(), n),
                state,
                energy,
                flips: total_flips,
                sweeps: sweep,
            });
        }
    }
    let energy = qp.epsilon_energy(&state);
    Err(Error::NonConvergence {
        max_sweeps,
        record: Box::new(MinimumRecord {
            depth: depth_of(energy, qp.coupling_dev(), n),
            state,
            energy,
            flips: total_flips,
            sweeps: max_sweeps,
        }),
    })
}

/// Quantized descent to a minimum `S*`, then exact descent from `S*` to a
/// nearby exact minimum `S0`. The reported gap and distance quantify what
/// quantization cost: `delta E = (E(S*) - E(S0)) / |E(S0)|` and
/// `d = hamming(S*, S0)`.
pub fn descend_hybrid(
    inst: &ProblemInstance,
    qp: &QuantizedProblem,
    start: &SpinState,
    seed: u64,
    max_sweeps: usize,
) -> Result<HybridResult> {
    if inst.n() != qp.n() {
        return Err(Error::DimensionMismatch {
            expected: inst.n(),
            got: qp.n(),
        });
    }
    let quantized = descend_quantized(qp, start, seed, max_sweeps)?;
    // a distinct visit-order stream for the refinement phase
    let refined = descend_exact(
        inst,
        &quantized.state,
        seed ^ 0x9e37_79b9_7f4a_7c15,
        max_sweeps,
    )?;
    let e_star = inst.energy(&quantized.state);
    let e_min = refined.energy;
    let energy_gap = if e_star == e_min {
        0.0
    } else {
        (e_star - e_min) / e_min.abs()
    };
    let distance = quantized.state.hamming(&refined.state);
    Ok(HybridResult {
        quantized,
        refined,
        energy_gap,
        distance,
    })
}

/// Fraction of sites where the exact and quantized local fields disagree in
/// sign at `state` (strict sign opposition; a zero product counts as
/// agreement).
pub fn measure_mismatch_at_state(
    inst: &ProblemInstance,
    qp: &QuantizedProblem,
    state: &SpinState,
) -> Result<f64> {
    let n = inst.n();
    if qp.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: qp.n(),
        });
    }
    if state.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: state.len(),
        });
    }
    let mismatches = (0..n)
        .filter(|&i| inst.local_field(state, i) * qp.local_field(state, i) < 0.0)
        .count();
    Ok(mismatches as f64 / n as f64)
}

/// Writes a per-sweep trace as CSV with header `sweep,flips,energy`.
pub fn write_trace_csv(path: &std::path::Path, trace: &[SweepTrace]) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = String::from("sweep,flips,energy\n");
    for t in trace {
        let _ = writeln!(out, "{},{},{}", t.sweep, t.flips, t.energy);
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{CouplingDist, FieldSpec};
    use crate::quantizer::{QuantizedProblem, Quantizer};
    use rand::Rng;

    fn random_state(n: usize, seed: u64) -> SpinState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpinState::random(n, &mut rng)
    }

    #[test]
    fn two_site_ferromagnet_aligns() {
        let mut a = vec![0.0; 4];
        a[1] = 1.0;
        a[2] = 1.0;
        let inst = ProblemInstance::new(2, a, vec![0.0; 2], 0.0, 1.0).unwrap();
        let start = SpinState::new(vec![1, -1]).unwrap();
        let rec = descend_exact(&inst, &start, 7, 100).unwrap();
        assert_eq!(rec.state.get(0), rec.state.get(1));
        assert_eq!(rec.energy, -1.0);
    }

    #[test]
    fn converged_state_is_one_flip_stable() {
        for seed in 0..6u64 {
            let inst = ProblemInstance::generate(
                12,
                CouplingDist::Gaussian,
                0.2,
                FieldSpec::Beta(0.5),
                seed,
            )
            .unwrap();
            let rec = descend_exact(&inst, &random_state(12, seed + 50), seed, 500).unwrap();
            let e = rec.energy;
            for i in 0..12 {
                assert!(inst.local_field(&rec.state, i) * rec.state.get(i) as f64 >= 0.0);
                let mut neighbor = rec.state.clone();
                neighbor.flip(i);
                assert!(inst.energy(&neighbor) >= e - 1e-9, "site {i}");
            }
        }
    }

    #[test]
    fn descent_is_deterministic_in_seed() {
        let inst =
            ProblemInstance::generate(40, CouplingDist::Uniform, 0.0, FieldSpec::Beta(0.0), 3)
                .unwrap();
        let start = random_state(40, 99);
        let a = descend_exact(&inst, &start, 11, 500).unwrap();
        let b = descend_exact(&inst, &start, 11, 500).unwrap();
        assert_eq!(a.state, b.state);
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.sweeps, b.sweeps);
    }

    #[test]
    fn traced_energies_never_increase() {
        let inst =
            ProblemInstance::generate(60, CouplingDist::Uniform, 0.3, FieldSpec::Beta(1.0), 8)
                .unwrap();
        let mut trace = Vec::new();
        let rec =
            descend_exact_traced(&inst, &random_state(60, 1), 21, 500, Some(&mut trace)).unwrap();
        assert!(!trace.is_empty());
        for w in trace.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-9);
        }
        assert_eq!(trace.last().unwrap().flips, 0);
        assert_eq!(rec.sweeps, trace.len());
    }

    #[test]
    fn sweep_cap_reports_partial_record() {
        let inst =
            ProblemInstance::generate(80, CouplingDist::Uniform, 0.0, FieldSpec::Beta(0.0), 5)
                .unwrap();
        match descend_exact(&inst, &random_state(80, 2), 13, 1) {
            Err(Error::NonConvergence { max_sweeps, record }) => {
                assert_eq!(max_sweeps, 1);
                assert_eq!(record.sweeps, 1);
                assert!(record.flips > 0);
            }
            other => panic!(
                "expected non-convergence, got {:?}",
                other.map(|r| r.sweeps)
            ),
        }
        assert!(descend_exact(&inst, &random_state(80, 2), 13, 0).is_err());
    }

    #[test]
    fn zero_fields_keep_spins() {
        let inst = ProblemInstance::new(3, vec![0.0; 9], vec![0.0; 3], 0.0, 0.0).unwrap();
        let start = SpinState::new(vec![1, -1, 1]).unwrap();
        let rec = descend_exact(&inst, &start, 1, 10).unwrap();
        assert_eq!(rec.state, start);
        assert_eq!(rec.flips, 0);
        assert_eq!(rec.sweeps, 1);
        assert_eq!(rec.depth, 0.0);
    }

    /// Matrix whose centered couplings are odd multiples of the step: the
    /// quantized image is exact and integer fields can never be zero (odd
    /// sum of odd terms), so both descents must walk the same trajectory.
    fn odd_level_pair(n: usize, seed: u64) -> (ProblemInstance, QuantizedProblem) {
        assert!(n.is_multiple_of(2));
        let m = 3u8;
        let step = 2.0 / (2.0 * m as f64 + 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let k = *[-3i8, -1, 1, 3].get(rng.gen_range(0..4)).unwrap();
                let v = k as f64 * step;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let inst = ProblemInstance::new(n, a, vec![0.0; n], 0.0, 1.0).unwrap();
        let q = Quantizer::uniform(m).unwrap();
        let qp = QuantizedProblem::quantize_with_offsets(&inst, &q, 0.0, vec![0.0; n]).unwrap();
        (inst, qp)
    }

    #[test]
    fn exact_quantized_image_walks_identical_trajectory() {
        let (inst, qp) = odd_level_pair(8, 77);
        let start = random_state(8, 5);
        let mut t_exact = Vec::new();
        let mut t_quant = Vec::new();
        let re = descend_exact_traced(&inst, &start, 42, 500, Some(&mut t_exact)).unwrap();
        let rq = descend_quantized_traced(&qp, &start, 42, 500, Some(&mut t_quant)).unwrap();
        assert_eq!(re.state, rq.state);
        assert_eq!(re.sweeps, rq.sweeps);
        let fe: Vec<usize> = t_exact.iter().map(|t| t.flips).collect();
        let fq: Vec<usize> = t_quant.iter().map(|t| t.flips).collect();
        assert_eq!(fe, fq);
        assert!((re.energy - rq.energy).abs() < 1e-9);
    }

    #[test]
    fn quantized_minimum_is_stable_under_fresh_fields() {
        let inst =
            ProblemInstance::generate(50, CouplingDist::Uniform, 0.0, FieldSpec::Beta(0.0), 31)
                .unwrap();
        let q = Quantizer::uniform(1).unwrap();
        let qp = QuantizedProblem::quantize(&inst, &q).unwrap();
        let rec = descend_quantized(&qp, &random_state(50, 6), 9, 500).unwrap();
        for i in 0..50 {
            assert!(qp.local_field(&rec.state, i) * rec.state.get(i) as f64 >= 0.0);
        }
        let eps = qp.epsilon_energy(&rec.state);
        assert!((eps - rec.energy).abs() < 1e-9);
    }

    #[test]
    fn hybrid_on_exact_image_is_lossless() {
        let (inst, qp) = odd_level_pair(10, 123);
        let res = descend_hybrid(&inst, &qp, &random_state(10, 8), 17, 500).unwrap();
        assert_eq!(res.distance, 0);
        assert_eq!(res.energy_gap, 0.0);
        assert_eq!(res.refined.flips, 0);
    }

    #[test]
    fn hybrid_reports_quantization_cost() {
        let inst =
            ProblemInstance::generate(120, CouplingDist::Uniform, 0.0, FieldSpec::Beta(0.0), 404)
                .unwrap();
        let q = Quantizer::uniform(1).unwrap();
        let qp = QuantizedProblem::quantize(&inst, &q).unwrap();
        let res = descend_hybrid(&inst, &qp, &random_state(120, 9), 23, 500).unwrap();
        assert!(res.energy_gap >= 0.0, "gap {}", res.energy_gap);
        assert!(res.energy_gap < 0.3);
        assert!(res.distance < 120 * 35 / 100);
        // refinement can only deepen the exact energy
        let e_star = inst.energy(&res.quantized.state);
        assert!(res.refined.energy <= e_star + 1e-12);
        assert!(res.refined.depth >= 1.0, "depth {}", res.refined.depth);
    }

    #[test]
    fn mismatch_fraction_matches_quantization_quality() {
        let (inst, qp) = odd_level_pair(20, 15);
        let s = random_state(20, 3);
        assert_eq!(measure_mismatch_at_state(&inst, &qp, &s).unwrap(), 0.0);

        let noisy =
            ProblemInstance::generate(300, CouplingDist::Uniform, 0.0, FieldSpec::Beta(0.0), 77)
                .unwrap();
        let q = Quantizer::uniform(1).unwrap();
        let nq = QuantizedProblem::quantize(&noisy, &q).unwrap();
        let frac = measure_mismatch_at_state(&noisy, &nq, &random_state(300, 4)).unwrap();
        assert!((frac - 0.108).abs() < 0.06, "fraction {frac}");
    }

    #[test]
    fn trace_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let trace = vec![
            SweepTrace {
                sweep: 1,
                flips: 12,
                energy: -3.5,
            },
            SweepTrace {
                sweep: 2,
                flips: 0,
                energy: -3.5,
            },
        ];
        write_trace_csv(&path, &trace).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "sweep,flips,energy\n1,12,-3.5\n2,0,-3.5\n");
    }
}
