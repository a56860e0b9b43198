//! Direct three-dimensional quadrature of the wedge and triangle integrands
//! over the full weight domain, with no analytic reduction. Slow, but
//! independent of every change of variables used elsewhere.

use std::cell::RefCell;

use super::oracle_spec;
use crate::error::{invalid, Error, Result};
use crate::heavytail::TailIndex;
use crate::specfun::{integrate_interval, QuadratureSpec};

fn edge(t: f64) -> f64 {
    -(-t).exp_m1()
}

fn pieces(breaks: &[f64]) -> Vec<f64> {
    let mut edges = vec![0.0];
    edges.extend(breaks.iter().copied().filter(|b| *b > 0.0 && *b < 1.0));
    edges.push(1.0);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
}

fn integrate_pieces<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
    failure: &RefCell<Option<Error>>,
) -> f64 {
    let mut total = 0.0;
    for w in pieces(breaks).windows(2) {
        match integrate_interval(&mut f, w[0], w[1], spec) {
            Ok(r) => total += r.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                return f64::NAN;
            }
        }
    }
    total
}

/// `E[g(x, y, z)]` for three independent weights, by nested quadrature in the
/// uniform coordinates `u = x^-alpha` (and likewise `v`, `w`). Each level is
/// split where one of the pair products `eps * x * y` crosses 1.
fn triple<G: Fn(f64, f64, f64) -> f64>(g: G, epsilon: f64, alpha: TailIndex) -> Result<f64> {
    let a = alpha.get();
    let kink = epsilon.powf(a);
    let outer = QuadratureSpec {
        rel_tol: 1e-8,
        ..oracle_spec()
    };
    let middle = QuadratureSpec {
        rel_tol: 1e-9,
        ..outer
    };
    let inner = QuadratureSpec {
        rel_tol: 1e-10,
        ..outer
    };
    let failure = RefCell::new(None);
    let value = {
        let mut f_u = |u: f64| {
            let x = u.powf(-1.0 / a);
            let f_v = |v: f64| {
                let y = v.powf(-1.0 / a);
                let f_w = |w: f64| g(x, y, w.powf(-1.0 / a));
                integrate_pieces(f_w, &[kink / u, kink / v], &inner, &failure)
            };
            integrate_pieces(f_v, &[kink / u, kink], &middle, &failure)
        };
        let edges = pieces(&[kink]);
        let mut total = 0.0;
        for w in edges.windows(2) {
            let r = integrate_interval(&mut f_u, w[0], w[1], &outer);
            if failure.borrow().is_some() {
                break;
            }
            total += r?.value;
        }
        total
    };
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

fn check(n: usize, epsilon: f64) -> Result<()> {
    if n < 3 {
        return Err(invalid(format!("need n >= 3, got {n}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    Ok(())
}

/// `(n-1)(n-2)/2 * E[p_xy p_xz]`: expected unordered wedges at a node.
pub fn brute_force_wedges(n: usize, epsilon: f64, alpha: TailIndex) -> Result<f64> {
    check(n, epsilon)?;
    let e = triple(
        |x, y, z| edge(epsilon * x * y) * edge(epsilon * x * z),
        epsilon,
        alpha,
    )?;
    Ok((n - 1) as f64 * (n - 2) as f64 / 2.0 * e)
}

/// `(n-1)(n-2)/6 * E[p_xy p_xz p_yz]`: expected triangles per node.
pub fn brute_force_triangles(n: usize, epsilon: f64, alpha: TailIndex) -> Result<f64> {
    check(n, epsilon)?;
    let e = triple(
        |x, y, z| edge(epsilon * x * y) * edge(epsilon * x * z) * edge(epsilon * y * z),
        epsilon,
        alpha,
    )?;
    Ok((n - 1) as f64 * (n - 2) as f64 / 6.0 * e)
}
