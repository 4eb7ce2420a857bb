//! File export: OBJ meshes for immersions, CSV for null curves and their
//! plane projections, JSON for flux vectors.

use std::io::Write;
use std::path::Path;

use super::ops::{FluxHom, Immersion, NullCurve};

/// Write the sampled immersion as a triangulated OBJ. Vertices are emitted
/// y-up ((u1, u3, u2)) with face winding flipped to keep the orientation
/// right-handed; only cells fully inside the domain are meshed.
pub fn write_obj(im: &Immersion, path: &Path) -> std::io::Result<()> {
    let grid = &im.domain.grid;
    let mut out = String::new();
    out.push_str("# minsurf immersion mesh\n");
    for u in &im.u {
        out.push_str(&format!("v {} {} {}\n", u[0], u[2], u[1]));
    }
    let inside: Vec<bool> =
        (0..grid.len()).map(|i| im.domain.contains(grid.node_z(i), 1e-12)).collect();
    let wrap_t = grid.periodic_t();
    let t_cells = if wrap_t { grid.n_t } else { grid.n_t - 1 };
    for i_s in 0..grid.n_s - 1 {
        for j in 0..t_cells {
            let jn = (j + 1) % grid.n_t;
            let q = [
                grid.idx(i_s, j),
                grid.idx(i_s, jn),
                grid.idx(i_s + 1, jn),
                grid.idx(i_s + 1, j),
            ];
            if q.iter().any(|&i| !inside[i]) {
                continue;
            }
            // 1-based OBJ indices; winding flipped to compensate the axis swap
            out.push_str(&format!("f {} {} {}\n", q[0] + 1, q[2] + 1, q[1] + 1));
            out.push_str(&format!("f {} {} {}\n", q[0] + 1, q[3] + 1, q[2] + 1));
        }
    }
    std::fs::write(path, out.as_bytes())
}

/// CSV of a null curve: node index, z, and the three complex components.
pub fn write_null_curve_csv(curve: &NullCurve, path: &Path) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "node,re_z,im_z,re_f1,im_f1,re_f2,im_f2,re_f3,im_f3")?;
    for (i, v) in curve.big_f.iter().enumerate() {
        let z = curve.domain.grid.node_z(i);
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{}",
            i, z.re, z.im, v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im
        )?;
    }
    Ok(())
}

/// CSV of the proper plane projection (Re F1, Re F2) of a null curve.
pub fn write_plane_projection_csv(curve: &NullCurve, path: &Path) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "node,re_z,im_z,p1,p2")?;
    for (i, v) in curve.big_f.iter().enumerate() {
        let z = curve.domain.grid.node_z(i);
        writeln!(f, "{},{},{},{},{}", i, z.re, z.im, v[0].re, v[1].re)?;
    }
    Ok(())
}

pub fn write_flux_json(flux: &FluxHom, path: &Path) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(flux).expect("flux serializes");
    std::fs::write(path, json)
}

/// Residual table: node, z, conformality, harmonicity.
pub fn write_residual_csv(
    im: &Immersion,
    conf: &[f64],
    harm: &[f64],
    path: &Path,
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "node,re_z,im_z,conformality,harmonicity")?;
    for i in 0..im.u.len() {
        let z = im.domain.grid.node_z(i);
        writeln!(f, "{},{},{},{},{}", i, z.re, z.im, conf[i], harm[i])?;
    }
    Ok(())
}

/// Chart CSV for Beltrami solves: node, z, phi, phi_z, phi_zbar.
pub fn write_chart_csv(map: &crate::riemann::QcMap, path: &Path) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "node,re_z,im_z,re_phi,im_phi,re_phiz,im_phiz,re_phizb,im_phizb")?;
    for i in 0..map.values.len() {
        let z = map.domain.grid.node_z(i);
        let (v, a, b) = (map.values[i], map.dz[i], map.dzbar[i]);
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{}",
            i, z.re, z.im, v.re, v.im, a.re, a.im, b.re, b.im
        )?;
    }
    Ok(())
}

/// Beltrami field CSV: node index, re mu, im mu.
pub fn write_beltrami_csv(
    field: &crate::riemann::BeltramiField,
    path: &Path,
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "node,re_mu,im_mu")?;
    for (i, m) in field.samples.iter().enumerate() {
        writeln!(f, "{},{},{}", i, m.re, m.im)?;
    }
    Ok(())
}

/// Read a Beltrami CSV written by `write_beltrami_csv` onto a domain grid.
pub fn read_beltrami_csv(
    domain: std::sync::Arc<crate::riemann::ModelDomain>,
    path: &Path,
) -> std::io::Result<crate::riemann::BeltramiField> {
    let text = std::fs::read_to_string(path)?;
    let mut samples = vec![crate::numerics::C64::new(0.0, 0.0); domain.grid.len()];
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            continue;
        }
        let idx: usize = cols[0].trim().parse().map_err(bad_data)?;
        let re: f64 = cols[1].trim().parse().map_err(bad_data)?;
        let im: f64 = cols[2].trim().parse().map_err(bad_data)?;
        if idx < samples.len() {
            samples[idx] = crate::numerics::C64::new(re, im);
        }
    }
    crate::riemann::BeltramiField::from_samples(domain, samples)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
}

fn bad_data<E: std::fmt::Display>(e: E) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
}
