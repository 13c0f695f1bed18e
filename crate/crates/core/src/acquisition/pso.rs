use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numcore::rng::uniform;
use crate::numcore::{BoundsBox, Seed};
use crate::{Error, Real, Result};

/// Global-best particle swarm settings. Defaults: 10 particles, inertia
/// 0.72, cognitive and social weights 1.49, 100 objective evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub max_evals: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 10,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            max_evals: 100,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::Config("PSO swarm needs at least 2 particles".into()));
        }
        if self.max_evals < self.swarm_size {
            return Err(Error::Config(format!(
                "PSO budget {} is smaller than the swarm ({})",
                self.max_evals, self.swarm_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome<T: Real> {
    pub position: Vec<T>,
    pub value: T,
    pub evaluations: usize,
}

/// Maximizes `objective` over `bounds` using exactly `cfg.max_evals` calls.
///
/// Positions are clamped to the box and velocities to half of each
/// dimension's width. Particles are updated one at a time and the global
/// best is refreshed after every evaluation.
pub fn pso_maximize<T, F>(
    mut objective: F,
    bounds: &BoundsBox<T>,
    cfg: &PsoConfig,
    seed: Seed,
) -> Result<PsoOutcome<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T>,
{
    cfg.validate()?;
    let d = bounds.dim();
    let mut rng = seed.rng();
    let vmax: Vec<T> = (0..d).map(|j| bounds.width(j) * T::lit(0.5)).collect();
    let (w, c1, c2) = (
        T::lit(cfg.inertia),
        T::lit(cfg.cognitive),
        T::lit(cfg.social),
    );

    let mut evals = 0usize;
    let mut eval = |x: &[T], evals: &mut usize| -> Result<T> {
        *evals += 1;
        let v = objective(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("objective value {v} at {x:?}")));
        }
        Ok(v)
    };

    let mut pos: Vec<Vec<T>> = (0..cfg.swarm_size)
        .map(|_| {
            (0..d)
                .map(|j| uniform(&mut rng, bounds.lower()[j], bounds.upper()[j]))
                .collect()
        })
        .collect();
    let mut vel: Vec<Vec<T>> = (0..cfg.swarm_size)
        .map(|_| {
            (0..d)
                .map(|j| uniform(&mut rng, -vmax[j], vmax[j]))
                .collect()
        })
        .collect();
    for p in &mut pos {
        bounds.clamp(p);
    }
    let mut best_pos = pos.clone();
    let mut best_val = Vec::with_capacity(cfg.swarm_size);
    for p in &pos {
        best_val.push(eval(p, &mut evals)?);
    }
    let mut g = argmax(&best_val);

    'outer: loop {
        for i in 0..cfg.swarm_size {
            if evals >= cfg.max_evals {
                break 'outer;
            }
            for j in 0..d {
                let r1: T = T::lit(rng.random::<f64>());
                let r2: T = T::lit(rng.random::<f64>());
                let v = w * vel[i][j]
                    + c1 * r1 * (best_pos[i][j] - pos[i][j])
                    + c2 * r2 * (best_pos[g][j] - pos[i][j]);
                vel[i][j] = v.max(-vmax[j]).min(vmax[j]);
                pos[i][j] = pos[i][j] + vel[i][j];
            }
            bounds.clamp(&mut pos[i]);
            let v = eval(&pos[i], &mut evals)?;
            if v > best_val[i] {
                best_val[i] = v;
                best_pos[i] = pos[i].clone();
                if v > best_val[g] {
                    g = i;
                }
            }
        }
    }
    Ok(PsoOutcome {
        position: best_pos[g].clone(),
        value: best_val[g],
        evaluations: evals,
    })
}

fn argmax<T: Real>(v: &[T]) -> usize {
    let mut k = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[k] {
            k = i;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_unimodal_peak() {
        let b = BoundsBox::uniform(1, 0.0, 1.0).unwrap();
        let hits = (0..20u64)
            .filter(|&s| {
                let r = pso_maximize(
                    |x: &[f64]| Ok(-(x[0] - 0.3).powi(2)),
                    &b,
                    &PsoConfig::default(),
                    Seed(s),
                )
                .unwrap();
                (r.position[0] - 0.3).abs() < 0.05
            })
            .count();
        assert!(hits >= 19, "{hits}/20");
    }

    #[test]
    fn exact_budget() {
        let b = BoundsBox::uniform(3, -1.0, 1.0).unwrap();
        for max_evals in [10, 37, 100] {
            let mut calls = 0;
            let cfg = PsoConfig {
                max_evals,
                ..Default::default()
            };
            let r = pso_maximize(
                |x: &[f64]| {
                    calls += 1;
                    Ok(x.iter().sum())
                },
                &b,
                &cfg,
                Seed(1),
            )
            .unwrap();
            assert_eq!(calls, max_evals);
            assert_eq!(r.evaluations, max_evals);
        }
    }

    #[test]
    fn constant_objective_stays_in_bounds() {
        let b = BoundsBox::new(vec![0.0, 10.0], vec![1.0, 20.0]).unwrap();
        let r = pso_maximize(|_: &[f64]| Ok(0.0), &b, &PsoConfig::default(), Seed(2)).unwrap();
        assert!(b.contains(&r.position));
    }

    #[test]
    fn degenerate_box() {
        let b = BoundsBox::new(vec![0.5, 2.0], vec![0.5, 2.0]).unwrap();
        let r = pso_maximize(|x: &[f64]| Ok(x[0]), &b, &PsoConfig::default(), Seed(3)).unwrap();
        assert_eq!(r.position, vec![0.5, 2.0]);
        assert_eq!(r.evaluations, 100);
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let b = BoundsBox::uniform(1, 0.0, 1.0).unwrap();
        let err =
            pso_maximize(|_: &[f64]| Ok(f64::NAN), &b, &PsoConfig::default(), Seed(0)).unwrap_err();
        assert!(matches!(err, Error::NonFinite(msg) if msg.contains('[')));
    }

    #[test]
    fn invalid_config() {
        let b = BoundsBox::uniform(1, 0.0, 1.0).unwrap();
        let cfg = PsoConfig {
            swarm_size: 10,
            max_evals: 5,
            ..Default::default()
        };
        assert!(pso_maximize(|_: &[f64]| Ok(0.0), &b, &cfg, Seed(0)).is_err());
    }
}
