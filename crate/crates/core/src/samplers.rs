//! Baseline design-space samplers: random, Latin hypercube, GreedyFP and
//! Best Candidate.
//!
//! GreedyFP and Best Candidate share one max-min-distance loop and differ
//! only in how many uniform candidates are drawn per iteration. Distances are
//! measured in bounds-normalized `[0, 1]^d` coordinates.

use std::fmt::Write as _;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::numcore::rng::{permutation, unit, StreamRng};
use crate::numcore::{BoundsBox, Seed};
use crate::{Error, Real, Result};

/// GreedyFP candidates per iteration.
pub const GFP_CANDIDATES: usize = 100;
/// Best Candidate draws `BC_BASE * i` candidates at iteration `i`.
pub const BC_BASE: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<T: Real> {
    pub points: Array2<T>,
}

impl<T: Real> SampleBatch<T> {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    /// CSV text: a header of dimension names, then one row per point.
    pub fn to_csv(&self, names: &[String]) -> Result<String> {
        if names.len() != self.points.ncols() {
            return Err(Error::Dimension {
                context: "csv header",
                expected: self.points.ncols(),
                got: names.len(),
            });
        }
        let mut out = names.join(",");
        out.push('\n');
        for row in self.points.rows() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v}").expect("writing to String");
            }
            out.push('\n');
        }
        Ok(out)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    Ok(())
}

fn uniform_unit<T: Real>(rng: &mut StreamRng, d: usize) -> Vec<T> {
    (0..d).map(|_| unit(rng)).collect()
}

fn batch_from_unit<T: Real>(b: &BoundsBox<T>, rows: &[Vec<T>]) -> SampleBatch<T> {
    let mut points = Array2::zeros((rows.len(), b.dim()));
    for (i, u) in rows.iter().enumerate() {
        for (j, v) in b.from_unit(u).into_iter().enumerate() {
            points[[i, j]] = v;
        }
    }
    SampleBatch { points }
}

/// Independent uniform draws in every dimension.
pub fn random_sample<T: Real>(b: &BoundsBox<T>, n: usize, seed: Seed) -> Result<SampleBatch<T>> {
    check_n(n)?;
    let mut rng = seed.rng();
    let rows: Vec<Vec<T>> = (0..n).map(|_| uniform_unit(&mut rng, b.dim())).collect();
    Ok(batch_from_unit(b, &rows))
}

/// Latin hypercube: each axis is cut into `n` equal strata, each stratum
/// holds exactly one point, and strata are permuted independently per axis.
pub fn lhs_sample<T: Real>(b: &BoundsBox<T>, n: usize, seed: Seed) -> Result<SampleBatch<T>> {
    check_n(n)?;
    let mut rng = seed.rng();
    let d = b.dim();
    let nn = T::from_usize_lossy(n);
    let mut rows = vec![vec![T::zero(); d]; n];
    for j in 0..d {
        let perm = permutation(&mut rng, n);
        for (i, row) in rows.iter_mut().enumerate() {
            let u: T = unit(&mut rng);
            let stratum = T::from_usize_lossy(perm[i]);
            // keep the draw strictly inside its stratum after rounding
            let lo = stratum / nn;
            let hi = (stratum + T::one()) / nn;
            row[j] = (lo + u / nn).max(lo).min(hi);
        }
    }
    Ok(batch_from_unit(b, &rows))
}

/// Candidate pool size per iteration of the farthest-point loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSchedule {
    Constant(usize),
    Growing { base: usize },
}

impl CandidateSchedule {
    /// Candidates for iteration `i >= 1` (the point with index `i`).
    pub fn count(&self, iteration: usize) -> usize {
        match *self {
            Self::Constant(c) => c.max(1),
            Self::Growing { base } => (base * iteration).max(1),
        }
    }
}

/// Index of the candidate whose nearest selected point is farthest away
/// (first one on ties). Both sets are in problem units.
pub fn select_farthest<T: Real>(
    b: &BoundsBox<T>,
    selected: &[Vec<T>],
    candidates: &[Vec<T>],
) -> Option<usize> {
    let sel: Vec<Vec<T>> = selected.iter().map(|s| b.to_unit(s)).collect();
    let mut best: Option<(T, usize)> = None;
    for (k, c) in candidates.iter().enumerate() {
        let c = b.to_unit(c);
        let nearest = sel
            .iter()
            .map(|s| {
                s.iter()
                    .zip(&c)
                    .map(|(&a, &v)| (a - v) * (a - v))
                    .sum::<T>()
            })
            .fold(T::infinity(), T::min);
        if best.is_none_or(|(d, _)| nearest > d) {
            best = Some((nearest, k));
        }
    }
    best.map(|(_, k)| k)
}

/// Max-min-distance sampling with an injectable candidate source.
///
/// `draw(iteration, count)` must return `count` points in problem units.
/// Iteration 0 asks for a single point, which becomes the first sample.
pub fn farthest_point_sample_with<T, F>(
    b: &BoundsBox<T>,
    n: usize,
    schedule: CandidateSchedule,
    mut draw: F,
) -> Result<SampleBatch<T>>
where
    T: Real,
    F: FnMut(usize, usize) -> Vec<Vec<T>>,
{
    check_n(n)?;
    let mut selected: Vec<Vec<T>> = Vec::with_capacity(n);
    let first = draw(0, 1);
    let Some(first) = first.into_iter().next() else {
        return Err(Error::Config("candidate source returned no points".into()));
    };
    selected.push(first);
    for it in 1..n {
        let candidates = draw(it, schedule.count(it));
        let k = select_farthest(b, &selected, &candidates).ok_or_else(|| {
            Error::Config(format!(
                "candidate source returned no points at iteration {it}"
            ))
        })?;
        selected.push(candidates[k].clone());
    }
    let mut points = Array2::zeros((n, b.dim()));
    for (i, p) in selected.iter().enumerate() {
        if p.len() != b.dim() {
            return Err(Error::Dimension {
                context: "candidate point",
                expected: b.dim(),
                got: p.len(),
            });
        }
        points
            .row_mut(i)
            .iter_mut()
            .zip(p)
            .for_each(|(o, &v)| *o = v);
    }
    Ok(SampleBatch { points })
}

fn farthest_point_sample<T: Real>(
    b: &BoundsBox<T>,
    n: usize,
    seed: Seed,
    schedule: CandidateSchedule,
) -> Result<SampleBatch<T>> {
    let mut rng = seed.rng();
    farthest_point_sample_with(b, n, schedule, |_, count| {
        (0..count)
            .map(|_| b.from_unit(&uniform_unit(&mut rng, b.dim())))
            .collect()
    })
}

/// GreedyFP: a constant number of uniform candidates per iteration.
pub fn greedyfp_sample<T: Real>(
    b: &BoundsBox<T>,
    n: usize,
    seed: Seed,
    candidates_per_iter: usize,
) -> Result<SampleBatch<T>> {
    farthest_point_sample(b, n, seed, CandidateSchedule::Constant(candidates_per_iter))
}

/// Best Candidate: `base · i` uniform candidates at iteration `i`.
pub fn bestcandidate_sample<T: Real>(
    b: &BoundsBox<T>,
    n: usize,
    seed: Seed,
    base: usize,
) -> Result<SampleBatch<T>> {
    farthest_point_sample(b, n, seed, CandidateSchedule::Growing { base })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Random,
    Lhs,
    Gfp,
    Bc,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [Self::Random, Self::Lhs, Self::Gfp, Self::Bc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Lhs => "lhs",
            Self::Gfp => "gfp",
            Self::Bc => "bc",
        }
    }

    pub fn sample<T: Real>(self, b: &BoundsBox<T>, n: usize, seed: Seed) -> Result<SampleBatch<T>> {
        match self {
            Self::Random => random_sample(b, n, seed),
            Self::Lhs => lhs_sample(b, n, seed),
            Self::Gfp => greedyfp_sample(b, n, seed, GFP_CANDIDATES),
            Self::Bc => bestcandidate_sample(b, n, seed, BC_BASE),
        }
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" | "r" => Ok(Self::Random),
            "lhs" => Ok(Self::Lhs),
            "gfp" | "greedyfp" => Ok(Self::Gfp),
            "bc" | "bestcandidate" => Ok(Self::Bc),
            _ => Err(Error::Unknown {
                kind: "sampler",
                name: s.to_owned(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(d: usize) -> BoundsBox<f64> {
        BoundsBox::uniform(d, 0.0, 1.0).unwrap()
    }

    fn min_pairwise(p: &Array2<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..p.nrows() {
            for j in i + 1..p.nrows() {
                let d = (&p.row(i) - &p.row(j)).mapv(|v| v * v).sum().sqrt();
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn random_mean_near_center() {
        let s = random_sample(&unit_box(2), 1000, Seed(11)).unwrap();
        for j in 0..2 {
            let m = s.points.column(j).mean().unwrap();
            assert!((m - 0.5).abs() < 0.05, "column {j} mean {m}");
        }
    }

    #[test]
    fn degenerate_bounds() {
        let b = BoundsBox::new(vec![2.0, -1.0], vec![2.0, -1.0]).unwrap();
        for kind in SamplerKind::ALL {
            let s = kind.sample(&b, 5, Seed(1)).unwrap();
            assert!(s
                .points
                .rows()
                .into_iter()
                .all(|r| r.to_vec() == vec![2.0, -1.0]));
        }
    }

    #[test]
    fn all_samplers_deterministic_and_in_bounds() {
        let b = BoundsBox::new(vec![0.0, 4e6, -3.0], vec![30.0, 6e6, 7.0]).unwrap();
        for kind in SamplerKind::ALL {
            let a = kind.sample(&b, 17, Seed(3)).unwrap();
            let c = kind.sample(&b, 17, Seed(3)).unwrap();
            assert_eq!(a, c, "{kind:?}");
            assert_eq!(a.len(), 17);
            assert!(a.points.rows().into_iter().all(|r| b.contains(&r.to_vec())));
        }
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(random_sample(&unit_box(1), 0, Seed(0)).is_err());
    }

    #[test]
    fn lhs_four_strata() {
        let s = lhs_sample(&unit_box(1), 4, Seed(8)).unwrap();
        let mut strata: Vec<usize> = s
            .points
            .column(0)
            .iter()
            .map(|&v| ((v * 4.0) as usize).min(3))
            .collect();
        strata.sort_unstable();
        assert_eq!(strata, vec![0, 1, 2, 3]);
    }

    #[test]
    fn farthest_picks_far_candidate() {
        let b = unit_box(1);
        let k = select_farthest(&b, &[vec![0.0]], &[vec![0.2], vec![0.9], vec![0.5]]);
        assert_eq!(k, Some(1));
    }

    #[test]
    fn bc_schedule_grows() {
        let mut counts = Vec::new();
        farthest_point_sample_with(
            &unit_box(2),
            5,
            CandidateSchedule::Growing { base: 10 },
            |it, c| {
                counts.push((it, c));
                (0..c).map(|k| vec![k as f64 / c as f64, 0.5]).collect()
            },
        )
        .unwrap();
        assert_eq!(counts, vec![(0, 1), (1, 10), (2, 20), (3, 30), (4, 40)]);
    }

    #[test]
    fn gfp_beats_random_spacing() {
        let b = unit_box(2);
        let wins = (0..20u64)
            .filter(|&s| {
                let seed = Seed(1000 + s);
                let g = greedyfp_sample(&b, 50, seed, GFP_CANDIDATES).unwrap();
                let r = random_sample(&b, 50, seed).unwrap();
                min_pairwise(&g.points) >= min_pairwise(&r.points)
            })
            .count();
        assert!(wins >= 18, "gfp won {wins}/20");
    }

    #[test]
    fn csv_export() {
        let s = SampleBatch {
            points: ndarray::array![[1.0, 0.5], [2.0, 0.25]],
        };
        let csv = s.to_csv(&["a".into(), "b".into()]).unwrap();
        assert_eq!(csv, "a,b\n1,0.5\n2,0.25\n");
        assert!(s.to_csv(&["a".into()]).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("LHS".parse::<SamplerKind>().unwrap(), SamplerKind::Lhs);
        assert_eq!(
            "random".parse::<SamplerKind>().unwrap(),
            SamplerKind::Random
        );
        assert!("sobol".parse::<SamplerKind>().is_err());
    }
}
