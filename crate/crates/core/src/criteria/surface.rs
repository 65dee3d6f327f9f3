use std::f64::consts::PI;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::WeightedSetup;
use crate::entropy::State;
use crate::error::{Error, Result};
use crate::numerics::bisect;

/// Axis-aligned search region for surface sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SearchBox {
    /// Centred on the midpoint of `u_l, u_r`, with half-width
    /// `factor · max(|Δu_k|, mean |u_k|)` per component, floored at a quarter
    /// of the largest such size so that constant components still get room.
    pub fn around(setup: &WeightedSetup, factor: f64) -> Self {
        let n = setup.u_l.len();
        let size = |k: usize| (setup.u_l[k] - setup.u_r[k]).abs().max(0.5 * (setup.u_l[k].abs() + setup.u_r[k].abs()));
        let floor = (0..n).map(size).fold(1e-3, f64::max) * 0.25;
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for k in 0..n {
            let (l, r) = (setup.u_l[k], setup.u_r[k]);
            let w = factor * size(k).max(floor);
            let c = 0.5 * (l + r);
            lo.push(c - w);
            hi.push(c + w);
        }
        Self { lo, hi }
    }

    pub fn contains(&self, u: &State) -> bool {
        u.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| *x >= *l && *x <= *h)
    }

    pub fn half_widths(&self) -> DVector<f64> {
        DVector::from_iterator(self.lo.len(), self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (h - l)))
    }

    /// Largest `t ≥ 0` with `p + t d` inside the box.
    fn exit_time(&self, p: &State, d: &DVector<f64>) -> f64 {
        let mut t = f64::INFINITY;
        for k in 0..p.len() {
            if d[k] > 0.0 {
                t = t.min((self.hi[k] - p[k]) / d[k]);
            } else if d[k] < 0.0 {
                t = t.min((self.lo[k] - p[k]) / d[k]);
            }
        }
        t.max(0.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceOptions {
    pub n_rays: usize,
    pub seed: u64,
    /// Box half-width factor used when no box is given.
    pub box_factor: f64,
    /// Grid points marched along each ray before bisection.
    pub march_steps: usize,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        Self { n_rays: 200, seed: 0, box_factor: 4.0, march_steps: 200 }
    }
}

/// First crossing of `Σ_a` along the ray `seed + t·direction`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayHit {
    pub direction: DVector<f64>,
    pub t: f64,
    pub state: State,
}

#[derive(Debug, Clone)]
pub struct SigmaSurface {
    pub setup: WeightedSetup,
    pub seed: State,
    pub search_box: SearchBox,
    pub hits: Vec<RayHit>,
    pub n_rays: usize,
    /// Seed of the ray directions.
    pub ray_seed: u64,
    pub box_exits: usize,
    pub domain_exits: usize,
}

impl SigmaSurface {
    pub fn samples(&self) -> Vec<State> {
        self.hits.iter().map(|h| h.state.clone()).collect()
    }

    /// Re-projects onto `Σ_a` along the ray of `direction`, looking for the
    /// crossing closest to `t_guess`.
    pub fn project(&self, direction: &DVector<f64>, t_guess: f64) -> Option<RayHit> {
        project_ray(&self.setup, &self.seed, direction, t_guess, self.search_box.exit_time(&self.seed, direction))
    }
}

/// Unit directions (in box-scaled coordinates) spread over the sphere.
pub fn ray_directions(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    match n {
        1 => vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        2 => (0..count)
            .map(|k| {
                let th = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                DVector::from_vec(vec![th.cos(), th.sin()])
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    DVector::from_vec(vec![r * th.cos(), r * th.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let v = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut rng)));
                    v.normalize()
                })
                .collect()
        }
    }
}

enum RayOutcome {
    Hit(RayHit),
    BoxExit,
    DomainExit,
}

fn refine(setup: &WeightedSetup, seed: &State, d: &DVector<f64>, lo: f64, hi: f64) -> RayHit {
    let at = |t: f64| seed + d * t;
    let g = |t: f64| setup.phi(&at(t));
    let (t, _, _) = bisect(&g, lo, hi, &|v: f64| v == 0.0);
    let u = at(t);
    RayHit { direction: d.clone(), t, state: u }
}

fn shoot(setup: &WeightedSetup, seed: &State, d: &DVector<f64>, t_exit: f64, steps: usize) -> RayOutcome {
    let model = setup.model();
    let s0 = setup.phi(seed).signum();
    let mut prev = 0.0;
    for k in 1..=steps {
        // quadratic spacing resolves surfaces hugging the seed
        let f = k as f64 / steps as f64;
        let t = t_exit * f * f;
        let u = seed + d * t;
        if !model.in_extended_domain(&u) || !model.in_domain(&u) {
            return RayOutcome::DomainExit;
        }
        if setup.phi(&u).signum() != s0 {
            return RayOutcome::Hit(refine(setup, seed, d, prev, t));
        }
        prev = t;
    }
    RayOutcome::BoxExit
}

fn project_ray(setup: &WeightedSetup, seed: &State, d: &DVector<f64>, t_guess: f64, t_exit: f64) -> Option<RayHit> {
    let model = setup.model();
    let s0 = setup.phi(seed).signum();
    let crossed = |t: f64| {
        let u = seed + d * t;
        model.in_domain(&u) && setup.phi(&u).signum() != s0
    };
    let valid = |t: f64| model.in_domain(&(seed + d * t));
    // expand a bracket around the guess
    let mut lo = t_guess;
    let mut hi = t_guess;
    for _ in 0..60 {
        if lo > 0.0 && (!valid(lo) || crossed(lo)) {
            lo *= 0.8;
            continue;
        }
        if !valid(hi) {
            return None;
        }
        if crossed(hi) {
            let h = refine(setup, seed, d, lo, hi);
            return (h.t <= t_exit && model.in_domain(&h.state)).then_some(h);
        }
        hi *= 1.25;
        if hi > t_exit {
            return None;
        }
    }
    None
}

/// Samples `Σ_a` by shooting rays from the state it encloses (`u_l` for
/// `a ≤ 1`, `u_r` for `a > 1`) and bisecting the first sign change of `φ`.
pub fn sample_sigma_surface(setup: &WeightedSetup, opts: &SurfaceOptions, search_box: Option<SearchBox>) -> Result<SigmaSurface> {
    let phi_l = setup.phi(&setup.u_l);
    let phi_r = setup.phi(&setup.u_r);
    if !(phi_l < 0.0 && phi_r > 0.0) {
        return Err(Error::Precondition(format!("sign configuration φ(u_l)={phi_l:e}, φ(u_r)={phi_r:e}")));
    }
    let bx = search_box.unwrap_or_else(|| SearchBox::around(setup, opts.box_factor));
    let seed = setup.interior_seed().clone();
    let n = seed.len();
    let scale = bx.half_widths();
    let dirs: Vec<DVector<f64>> = ray_directions(n, opts.n_rays, opts.seed)
        .into_iter()
        .map(|d| d.component_mul(&scale))
        .collect();
    let outcomes: Vec<RayOutcome> = dirs
        .par_iter()
        .map(|d| shoot(setup, &seed, d, bx.exit_time(&seed, d), opts.march_steps))
        .collect();
    let mut hits = Vec::new();
    let (mut box_exits, mut domain_exits) = (0, 0);
    for o in outcomes {
        match o {
            RayOutcome::Hit(h) => hits.push(h),
            RayOutcome::BoxExit => box_exits += 1,
            RayOutcome::DomainExit => domain_exits += 1,
        }
    }
    if hits.is_empty() {
        return Err(Error::SurfaceEmpty);
    }
    Ok(SigmaSurface { setup: setup.clone(), seed, search_box: bx, hits, n_rays: dirs.len(), ray_seed: opts.seed, box_exits, domain_exits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::state;
    use crate::models::Burgers;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn burgers(a: f64) -> WeightedSetup {
        WeightedSetup::new(Arc::new(Burgers), state(&[1.0]), state(&[0.0]), 0.5, a, Some(1)).unwrap()
    }

    #[test]
    fn burgers_midpoint() {
        let s = sample_sigma_surface(&burgers(1.0), &SurfaceOptions::default(), None).unwrap();
        assert_eq!(s.hits.len(), 1);
        assert_abs_diff_eq!(s.hits[0].state[0], 0.5, epsilon = 1e-12);
        assert_eq!(s.box_exits, 1);
    }

    #[test]
    fn burgers_two_roots() {
        for a in [0.25, 4.0] {
            let s = sample_sigma_surface(&burgers(a), &SurfaceOptions::default(), None).unwrap();
            let mut xs: Vec<f64> = s.hits.iter().map(|h| h.state[0]).collect();
            xs.sort_by(f64::total_cmp);
            let r = a.sqrt();
            let mut want = vec![1.0 / (1.0 + r), 1.0 / (1.0 - r)];
            want.sort_by(f64::total_cmp);
            assert_eq!(xs.len(), 2, "a={a}");
            for (x, w) in xs.iter().zip(&want) {
                assert_abs_diff_eq!(*x, *w, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_jump_has_no_sign_change() {
        let mut t = burgers(1.0);
        t.u_r = t.u_l.clone();
        assert!(matches!(sample_sigma_surface(&t, &SurfaceOptions::default(), None), Err(Error::Precondition(_))));
    }
}
