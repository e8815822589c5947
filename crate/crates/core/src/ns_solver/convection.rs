//! Momentum transport by a face mass flux `F = ρ_f w + J`.

use crate::grid::{Grid, VectorField};

#[inline]
fn wrap(k: isize, n: usize) -> usize {
    k.rem_euclid(n as isize) as usize
}

/// u at (i, j) with the no-slip reflection across horizontal walls.
#[inline]
fn u_at(g: &Grid, u: &[f64], i: usize, j: isize) -> f64 {
    let nux = g.nux();
    if g.periodic() {
        u[wrap(j, g.ny) * nux + i]
    } else if j < 0 {
        -u[i]
    } else if j >= g.ny as isize {
        -u[(g.ny - 1) * nux + i]
    } else {
        u[j as usize * nux + i]
    }
}

#[inline]
fn v_at(g: &Grid, v: &[f64], i: isize, j: usize) -> f64 {
    let nx = g.nx;
    if g.periodic() {
        v[j * nx + wrap(i, nx)]
    } else if i < 0 {
        -v[j * nx]
    } else if i >= nx as isize {
        -v[j * nx + nx - 1]
    } else {
        v[j * nx + i as usize]
    }
}

/// Flux y-component averaged to x-face (i, j).
#[inline]
fn fy_at_u(g: &Grid, fv: &[f64], i: usize, j: usize) -> f64 {
    let nx = g.nx;
    let (il, ir) = if g.periodic() { (wrap(i as isize - 1, nx), i % nx) } else { (i - 1, i) };
    let jt = if g.periodic() { (j + 1) % g.ny } else { j + 1 };
    0.25 * (fv[j * nx + il] + fv[j * nx + ir] + fv[jt * nx + il] + fv[jt * nx + ir])
}

#[inline]
fn fx_at_v(g: &Grid, fu: &[f64], i: usize, j: usize) -> f64 {
    let nux = g.nux();
    let (jb, jt) = if g.periodic() { (wrap(j as isize - 1, g.ny), j % g.ny) } else { (j - 1, j) };
    let ir = if g.periodic() { (i + 1) % g.nx } else { i + 1 };
    0.25 * (fu[jb * nux + i] + fu[jb * nux + ir] + fu[jt * nux + i] + fu[jt * nux + ir])
}

/// Central advective form `(F·∇) v` on active faces.
pub fn advective(v: &VectorField, flux: &VectorField) -> VectorField {
    let g = *v.grid();
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let (u, vv) = (v.u(), v.v());
    let (fu, fv) = (flux.u(), flux.v());
    let mut out = VectorField::zeros(&g);
    let (ou, ov) = out.parts_mut();
    for j in 0..ny {
        for i in 0..nux {
            if !g.xface_active(i) {
                continue;
            }
            let k = j * nux + i;
            let (il, ir) = if g.periodic() { (wrap(i as isize - 1, nx), (i + 1) % nx) } else { (i - 1, i + 1) };
            let dudx = (u[j * nux + ir] - u[j * nux + il]) / (2.0 * g.dx);
            let dudy = (u_at(&g, u, i, j as isize + 1) - u_at(&g, u, i, j as isize - 1)) / (2.0 * g.dy);
            ou[k] = fu[k] * dudx + fy_at_u(&g, fv, i, j) * dudy;
        }
    }
    for j in 0..g.nvy() {
        if !g.yface_active(j) {
            continue;
        }
        let (jb, jt) = if g.periodic() { (wrap(j as isize - 1, ny), (j + 1) % ny) } else { (j - 1, j + 1) };
        for i in 0..nx {
            let k = j * nx + i;
            let dvdx = (v_at(&g, vv, i as isize + 1, j) - v_at(&g, vv, i as isize - 1, j)) / (2.0 * g.dx);
            let dvdy = (vv[jt * nx + i] - vv[jb * nx + i]) / (2.0 * g.dy);
            ov[k] = fx_at_v(&g, fu, i, j) * dvdx + fv[k] * dvdy;
        }
    }
    out
}

/// Divergence form `div(F ⊗ v) − v div F`, equal to the advective form in
/// the continuum.
pub fn conservative(v: &VectorField, flux: &VectorField) -> VectorField {
    let g = *v.grid();
    let (nx, ny, nux) = (g.nx, g.ny, g.nux());
    let (u, vv) = (v.u(), v.v());
    let (fu, fv) = (flux.u(), flux.v());
    let mut out = VectorField::zeros(&g);
    let (ou, ov) = out.parts_mut();
    // x-momentum: fluxes through cell centres (x) and nodes (y)
    for j in 0..ny {
        for i in 0..nux {
            if !g.xface_active(i) {
                continue;
            }
            let k = j * nux + i;
            let (il, ir) = if g.periodic() { (wrap(i as isize - 1, nx), (i + 1) % nx) } else { (i - 1, i + 1) };
            let fxc_r = 0.5 * (fu[k] + fu[j * nux + ir]);
            let fxc_l = 0.5 * (fu[k] + fu[j * nux + il]);
            let uc_r = 0.5 * (u[k] + u[j * nux + ir]);
            let uc_l = 0.5 * (u[k] + u[j * nux + il]);
            let ju = j as isize;
            let fyn_t = node_fy(&g, fv, i, j + 1);
            let fyn_b = node_fy(&g, fv, i, j);
            let un_t = 0.5 * (u[k] + u_at(&g, u, i, ju + 1));
            let un_b = 0.5 * (u[k] + u_at(&g, u, i, ju - 1));
            let div_f = (fxc_r - fxc_l) / g.dx + (fyn_t - fyn_b) / g.dy;
            ou[k] = (fxc_r * uc_r - fxc_l * uc_l) / g.dx + (fyn_t * un_t - fyn_b * un_b) / g.dy - u[k] * div_f;
        }
    }
    for j in 0..g.nvy() {
        if !g.yface_active(j) {
            continue;
        }
        let (jb, jt) = if g.periodic() { (wrap(j as isize - 1, ny), (j + 1) % ny) } else { (j - 1, j + 1) };
        for i in 0..nx {
            let k = j * nx + i;
            let fyc_t = 0.5 * (fv[k] + fv[jt * nx + i]);
            let fyc_b = 0.5 * (fv[k] + fv[jb * nx + i]);
            let vc_t = 0.5 * (vv[k] + vv[jt * nx + i]);
            let vc_b = 0.5 * (vv[k] + vv[jb * nx + i]);
            let fxn_r = node_fx(&g, fu, i + 1, j);
            let fxn_l = node_fx(&g, fu, i, j);
            let vn_r = 0.5 * (vv[k] + v_at(&g, vv, i as isize + 1, j));
            let vn_l = 0.5 * (vv[k] + v_at(&g, vv, i as isize - 1, j));
            let div_f = (fyc_t - fyc_b) / g.dy + (fxn_r - fxn_l) / g.dx;
            ov[k] = (fyc_t * vc_t - fyc_b * vc_b) / g.dy + (fxn_r * vn_r - fxn_l * vn_l) / g.dx - vv[k] * div_f;
        }
    }
    out
}

/// Flux y-component at node (i, j): mean of the y-faces left and right.
fn node_fy(g: &Grid, fv: &[f64], i: usize, j: usize) -> f64 {
    let nx = g.nx;
    let j = if g.periodic() { j % g.ny } else { j };
    if g.periodic() {
        0.5 * (fv[j * nx + wrap(i as isize - 1, nx)] + fv[j * nx + i % nx])
    } else {
        let l = if i > 0 { fv[j * nx + i - 1] } else { 0.0 };
        let r = if i < nx { fv[j * nx + i] } else { 0.0 };
        0.5 * (l + r)
    }
}

fn node_fx(g: &Grid, fu: &[f64], i: usize, j: usize) -> f64 {
    let nux = g.nux();
    let i = if g.periodic() { i % g.nx } else { i };
    if g.periodic() {
        0.5 * (fu[wrap(j as isize - 1, g.ny) * nux + i] + fu[(j % g.ny) * nux + i])
    } else {
        let b = if j > 0 { fu[(j - 1) * nux + i] } else { 0.0 };
        let t = if j < g.ny { fu[j * nux + i] } else { 0.0 };
        0.5 * (b + t)
    }
}
