use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::vi_core::{DrawPath, RngStream};
use crate::Vector;

/// A maximization problem `max f(z) − ψ(z)` over a ball, given by the value of
/// the full objective, the gradient of the smooth part and the proximal map
/// `prox(u, τ) = argmin_{v in ball} ½‖v − u‖² + τψ(v)`.
pub(crate) struct Objective<'a> {
    pub value: &'a (dyn Fn(&Vector) -> f64 + Sync),
    pub grad: &'a (dyn Fn(&Vector) -> Vector + Sync),
    pub prox: &'a (dyn Fn(&Vector, f64) -> Vector + Sync),
}

/// Start points, prefix-stable in `n`: the center, the projection of `x_o`,
/// then seeded boundary points.
pub(crate) fn starts(
    obj: &Objective<'_>,
    center: &Vector,
    radius: f64,
    x_o: &Vector,
    n: usize,
    seed: u64,
) -> Vec<Vector> {
    let root = RngStream::root(seed);
    (0..n)
        .map(|i| match i {
            0 => (obj.prox)(center, 0.0),
            1 => (obj.prox)(x_o, 0.0),
            _ => {
                let mut rng = root.at(DrawPath::new(0, 0, i, 0)).rng();
                let dir = linalg::unit_direction(&mut rng, center.len());
                (obj.prox)(&(center + dir * radius), 0.0)
            }
        })
        .collect()
}

fn ascend(obj: &Objective<'_>, start: Vector, step: f64, iterations: usize) -> (f64, Vector) {
    let mut z = start;
    let mut best = ((obj.value)(&z), z.clone());
    for _ in 0..iterations {
        let g = (obj.grad)(&z);
        z = (obj.prox)(&(&z + g * step), step);
        let v = (obj.value)(&z);
        if v > best.0 {
            best = (v, z.clone());
        }
    }
    best
}

/// Projected (proximal) gradient ascent from every start; the best value wins,
/// ties going to the lowest start index.
pub(crate) fn multistart(obj: &Objective<'_>, starts: Vec<Vector>, step: f64, iterations: usize) -> (f64, Vector) {
    let results: Vec<(f64, Vector)> = starts
        .into_par_iter()
        .map(|s| ascend(obj, s, step, iterations))
        .collect();
    let mut best: Option<(f64, Vector)> = None;
    for r in results {
        match &best {
            Some((v, _)) if !(r.0 > *v) => {}
            _ => best = Some(r),
        }
    }
    best.expect("at least one start")
}

/// Accelerated proximal ascent with adaptive restart, for concave objectives
/// with `step ≤ 1/L_smooth`. Stops when an iterate moves less than `tol`.
pub(crate) fn fista(obj: &Objective<'_>, start: Vector, step: f64, max_iter: usize, tol: f64) -> (f64, Vector) {
    let mut z = start;
    let mut y = z.clone();
    let mut t = 1.0f64;
    let mut current = (obj.value)(&z);
    let mut best = (current, z.clone());
    let mut quiet = 0;
    for _ in 0..max_iter {
        let g = (obj.grad)(&y);
        let next = (obj.prox)(&(&y + g * step), step);
        let value = (obj.value)(&next);
        let moved = (&next - &z).norm();
        if value < current {
            if t == 1.0 {
                // a plain step from z no longer ascends
                break;
            }
            t = 1.0;
            y = z.clone();
            quiet = 0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &next + (&next - &z) * ((t - 1.0) / t_next);
        t = t_next;
        z = next;
        current = value;
        if value > best.0 || (value == best.0 && moved > 0.0) {
            best = (value, z.clone());
        }
        if moved <= tol {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    best
}

/// Dense grid over the ball in dimension one or two (polar in 2-d).
pub(crate) fn grid(
    value: &(dyn Fn(&Vector) -> f64 + Sync),
    center: &Vector,
    radius: f64,
    n: usize,
) -> Result<(f64, Vector)> {
    let n = n.max(2);
    let points: Vec<Vector> = match center.len() {
        1 => (0..=2 * n)
            .map(|i| center + Vector::from_element(1, radius * (i as f64 / n as f64 - 1.0)))
            .collect(),
        2 => {
            let mut pts = Vec::with_capacity(n * n);
            for i in 0..n {
                let r = radius * i as f64 / (n - 1) as f64;
                for j in 0..n {
                    let th = std::f64::consts::TAU * j as f64 / n as f64;
                    pts.push(center + Vector::from_column_slice(&[r * th.cos(), r * th.sin()]));
                    if i == 0 {
                        break;
                    }
                }
            }
            pts
        }
        d => return Err(Error::Unsupported(format!("grid gap needs d ≤ 2, got {d}"))),
    };
    let values: Vec<f64> = points.par_iter().map(value).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    Ok((values[best], points[best].clone()))
}
