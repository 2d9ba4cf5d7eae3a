//! Centered finite-difference construction of metric jets from pointwise
//! component evaluations. Derivatives up to third order are taken with
//! tensor-product stencils on a 7-point axis per coordinate, so every mixed
//! partial inherits the axis order (2 or 4).

use ndarray::{Array2, Array3, Array4, Array5};

use super::RawJet;

/// Finite-difference order for jet construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOrder {
    Two,
    Four,
}

const STENCIL: usize = 7;
const OFF: isize = 3;

/// Per-axis weights for d/dx^p, p = 0..3, on offsets -3..3, already divided by h^p.
fn axis_weights(order: FdOrder, h: f64) -> [[f64; STENCIL]; 4] {
    let mut w = [[0.0; STENCIL]; 4];
    w[0][3] = 1.0;
    match order {
        FdOrder::Two => {
            w[1] = [0.0, 0.0, -0.5, 0.0, 0.5, 0.0, 0.0];
            w[2] = [0.0, 0.0, 1.0, -2.0, 1.0, 0.0, 0.0];
            w[3] = [0.0, -0.5, 1.0, 0.0, -1.0, 0.5, 0.0];
        }
        FdOrder::Four => {
            w[1] = [0.0, 1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0, 0.0];
            w[2] = [
                0.0,
                -1.0 / 12.0,
                16.0 / 12.0,
                -30.0 / 12.0,
                16.0 / 12.0,
                -1.0 / 12.0,
                0.0,
            ];
            w[3] = [
                1.0 / 8.0,
                -1.0,
                13.0 / 8.0,
                0.0,
                -13.0 / 8.0,
                1.0,
                -1.0 / 8.0,
            ];
        }
    }
    for p in 1..4 {
        let hp = h.powi(p as i32);
        for c in w[p].iter_mut() {
            *c /= hp;
        }
    }
    w
}

/// Build spatial derivatives (up to third order) plus a centered time
/// derivative of the metric components, all from `eval`.
pub fn fd_jet(
    eval: &dyn Fn(&[f64], f64) -> Array2<f64>,
    coords: &[f64],
    time: f64,
    order: FdOrder,
    h_rel: f64,
) -> RawJet {
    let n = coords.len();
    let h: Vec<f64> = coords.iter().map(|x| h_rel * x.abs().max(1.0)).collect();

    // Tensor cube of metric evaluations around the point.
    let cube_len = STENCIL.pow(n as u32);
    let mut cube: Vec<Array2<f64>> = Vec::with_capacity(cube_len);
    let mut idx = vec![0usize; n];
    for flat in 0..cube_len {
        let mut rem = flat;
        for a in 0..n {
            idx[a] = rem % STENCIL;
            rem /= STENCIL;
        }
        let mut x = coords.to_vec();
        for a in 0..n {
            x[a] += (idx[a] as isize - OFF) as f64 * h[a];
        }
        cube.push(eval(&x, time));
    }

    let weights: Vec<[[f64; STENCIL]; 4]> = h.iter().map(|&ha| axis_weights(order, ha)).collect();

    // Contract the cube with per-axis weights for the derivative multi-order `po`.
    let deriv = |po: &[usize]| -> Array2<f64> {
        let mut out = Array2::<f64>::zeros((n, n));
        let mut idx = vec![0usize; n];
        for (flat, gm) in cube.iter().enumerate() {
            let mut rem = flat;
            let mut w = 1.0;
            for a in 0..n {
                idx[a] = rem % STENCIL;
                rem /= STENCIL;
                w *= weights[a][po[a]][idx[a]];
            }
            if w != 0.0 {
                out.scaled_add(w, gm);
            }
        }
        out
    };

    // All-center flat index: every base-7 digit equals 3, i.e. (7^n - 1) / 2.
    let g = cube[cube_len / 2].clone();

    let mut dg = Array3::<f64>::zeros((n, n, n));
    let mut d2g = Array4::<f64>::zeros((n, n, n, n));
    let mut d3g = Array5::<f64>::zeros((n, n, n, n, n));
    let mut po = vec![0usize; n];

    for c in 0..n {
        po.iter_mut().for_each(|p| *p = 0);
        po[c] = 1;
        let m = deriv(&po);
        for a in 0..n {
            for b in 0..n {
                dg[[c, a, b]] = m[[a, b]];
            }
        }
    }
    for d in 0..n {
        for c in 0..n {
            po.iter_mut().for_each(|p| *p = 0);
            po[c] += 1;
            po[d] += 1;
            let m = deriv(&po);
            for a in 0..n {
                for b in 0..n {
                    d2g[[d, c, a, b]] = m[[a, b]];
                }
            }
        }
    }
    for e in 0..n {
        for d in 0..n {
            for c in 0..n {
                po.iter_mut().for_each(|p| *p = 0);
                po[c] += 1;
                po[d] += 1;
                po[e] += 1;
                let m = deriv(&po);
                for a in 0..n {
                    for b in 0..n {
                        d3g[[e, d, c, a, b]] = m[[a, b]];
                    }
                }
            }
        }
    }

    // Centered time derivative on the same stencil order.
    let ht = h_rel * time.abs().max(1.0);
    let wt = axis_weights(order, ht);
    let mut dtg = Array2::<f64>::zeros((n, n));
    for (k, &w) in wt[1].iter().enumerate() {
        if w != 0.0 {
            let gm = eval(coords, time + (k as isize - OFF) as f64 * ht);
            dtg.scaled_add(w, &gm);
        }
    }

    RawJet {
        g,
        dg,
        d2g,
        d3g,
        dtg,
    }
}
