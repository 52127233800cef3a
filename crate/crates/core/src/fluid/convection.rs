use super::velocity::VelocityField;

/// Skew-symmetric convection `1/2 [div(u ⊗ u) + (u · ∇) u]` on the MAC grid.
///
/// Each momentum control volume gets the divergence-form flux sum
/// `sum_f F_f ū_f` with mass fluxes `F_f` and face averages `ū_f`, minus half
/// its net outflow times the local velocity. The result satisfies
/// `<conv(u), u> = 0` up to rounding for every `u`, divergence-free or not;
/// for discretely divergence-free `u` it coincides with the divergence form.
pub fn convective_term(a: &VelocityField) -> VelocityField {
    let m = a.mesh;
    let (nx, ny) = (m.nx, m.ny);
    let (hx, hy) = (m.hx, m.hy);
    let inv_vol = 1.0 / m.cell_volume();
    let mut out = VelocityField::zeros(m);

    let u = |i: usize, j: usize| a.u[a.iu(i, j)];
    let v = |i: usize, j: usize| a.v[a.iv(i, j)];

    // x-momentum on interior vertical faces
    for j in 0..ny {
        for i in 1..nx {
            let uc = u(i, j);
            let fe = 0.5 * (uc + u(i + 1, j)) * hy;
            let fw = 0.5 * (u(i - 1, j) + uc) * hy;
            let fnorth = 0.5 * (v(i - 1, j + 1) + v(i, j + 1)) * hx;
            let fs = 0.5 * (v(i - 1, j) + v(i, j)) * hx;
            let ue = 0.5 * (uc + u(i + 1, j));
            let uw = 0.5 * (u(i - 1, j) + uc);
            // wall faces carry zero flux, so the ghost value never matters
            let un = if j + 1 < ny { 0.5 * (uc + u(i, j + 1)) } else { 0.0 };
            let us = if j > 0 { 0.5 * (u(i, j - 1) + uc) } else { 0.0 };
            let div_form = fe * ue - fw * uw + fnorth * un - fs * us;
            let net = fe - fw + fnorth - fs;
            let k = out.iu(i, j);
            out.u[k] = (div_form - 0.5 * net * uc) * inv_vol;
        }
    }
    // y-momentum on interior horizontal faces
    for j in 1..ny {
        for i in 0..nx {
            let vc = v(i, j);
            let fnorth = 0.5 * (vc + v(i, j + 1)) * hx;
            let fs = 0.5 * (v(i, j - 1) + vc) * hx;
            let fe = 0.5 * (u(i + 1, j - 1) + u(i + 1, j)) * hy;
            let fw = 0.5 * (u(i, j - 1) + u(i, j)) * hy;
            let vn = 0.5 * (vc + v(i, j + 1));
            let vs = 0.5 * (v(i, j - 1) + vc);
            let ve = if i + 1 < nx { 0.5 * (vc + v(i + 1, j)) } else { 0.0 };
            let vw = if i > 0 { 0.5 * (v(i - 1, j) + vc) } else { 0.0 };
            let div_form = fnorth * vn - fs * vs + fe * ve - fw * vw;
            let net = fnorth - fs + fe - fw;
            let k = out.iv(i, j);
            out.v[k] = (div_form - 0.5 * net * vc) * inv_vol;
        }
    }
    out
}
