//! CSV output. Every file starts with `#` comment lines carrying the
//! resolved parameters, followed by one header row. Floats use a fixed
//! `{:.16e}` format so identical inputs give byte-identical files.

use std::io::Write;

use crate::dynamics::AmplitudeTrace;
use crate::error::Result;
use crate::field::IntensityTrace;
use crate::params::{derive_scales, SystemParams};
use crate::spectral::ModeExpansion;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `# key = value` lines for the parameter set plus caller metadata.
pub fn write_header<W: Write>(w: &mut W, params: &SystemParams, extra: &[(&str, String)]) -> Result<()> {
    let s = derive_scales(params);
    let fields: [(&str, f64); 12] = [
        ("gamma22", params.gamma22),
        ("gamma33", params.gamma33),
        ("gamma23", params.gamma23),
        ("gamma32", params.gamma32),
        ("omega23", params.omega23),
        ("omega21", params.omega21),
        ("velocity", params.velocity),
        ("distance", params.distance),
        ("delay", params.delay()),
        ("phase2", params.phase2()),
        ("phase3", params.phase3()),
        ("lambda_beat", s.lambda_beat),
    ];
    for (k, v) in fields {
        writeln!(w, "# {k} = {}", num(v))?;
    }
    for (k, v) in extra {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

/// One row per pole: index, pole, and the four expansion coefficients.
pub fn write_poles<W: Write>(w: &mut W, expansion: &ModeExpansion, extra: &[(&str, String)]) -> Result<()> {
    let mut meta = vec![
        ("sector", expansion.sector.label().to_string()),
        ("window_re_max", num(expansion.window.re_max)),
        ("window_im_max", num(expansion.window.im_max)),
        ("winding", expansion.winding.to_string()),
    ];
    meta.extend(extra.iter().cloned());
    write_header(w, &expansion.params, &meta)?;
    writeln!(w, "n,re_s,im_s,re_alpha,im_alpha,re_beta,im_beta,re_alpha_bar,im_alpha_bar,re_beta_bar,im_beta_bar")?;
    for (n, m) in expansion.modes.iter().enumerate() {
        let r = m.residue.unwrap_or(crate::spectral::Residue {
            alpha: f64::NAN.into(),
            beta: f64::NAN.into(),
            alpha_bar: f64::NAN.into(),
            beta_bar: f64::NAN.into(),
        });
        let cols = [m.s, r.alpha, r.beta, r.alpha_bar, r.beta_bar]
            .iter()
            .flat_map(|c| [num(c.re), num(c.im)])
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{n},{cols}")?;
    }
    Ok(())
}

/// Amplitude rows; `deviation` adds a per-sample column when two backends ran.
pub fn write_amplitudes<W: Write>(
    w: &mut W,
    params: &SystemParams,
    trace: &AmplitudeTrace,
    deviation: Option<&[f64]>,
    extra: &[(&str, String)],
) -> Result<()> {
    let mut meta: Vec<(&str, String)> = extra.to_vec();
    if let Some(d) = trace.residue_sum_defect {
        meta.push(("residue_sum_defect", num(d)));
    }
    if let Some(d) = trace.transit_defect {
        meta.push(("transit_defect", num(d)));
    }
    write_header(w, params, &meta)?;
    write!(w, "t,re_cA2,im_cA2,re_cA3,im_cA3,re_cB2,im_cB2,re_cB3,im_cB3,pop2A,pop3A,pop2B,pop3B,provenance")?;
    if deviation.is_some() {
        write!(w, ",deviation")?;
    }
    writeln!(w)?;
    for i in 0..trace.len() {
        let c = trace.state(i);
        let mut row = vec![num(trace.times[i])];
        row.extend(c.iter().flat_map(|z| [num(z.re), num(z.im)]));
        row.extend(c.iter().map(|z| num(z.norm_sqr())));
        row.push(trace.provenance.label().to_string());
        if let Some(d) = deviation {
            row.push(num(d[i]));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Long-form intensity rows for one or more traces.
pub fn write_intensity<W: Write>(
    w: &mut W,
    params: &SystemParams,
    traces: &[&IntensityTrace],
    extra: &[(&str, String)],
) -> Result<()> {
    let mut meta: Vec<(&str, String)> = extra.to_vec();
    if let Some(t) = traces.first() {
        meta.push(("unit", t.unit.note().to_string()));
    }
    write_header(w, params, &meta)?;
    writeln!(w, "t,x,intensity_normalized,provenance")?;
    for tr in traces {
        for (t, v) in tr.times.iter().zip(&tr.values) {
            writeln!(w, "{},{},{},{}", num(*t), num(tr.x), num(*v), tr.provenance.label())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{closed_form_coincident, time_grid};
    use crate::params::canonical_paper_params;
    use crate::spectral::{solve_sector, SearchWindow, SymmetrySector};

    #[test]
    fn amplitude_csv_layout() {
        let p = canonical_paper_params();
        let times = time_grid(&p, 0.01, 5e-3).unwrap();
        let tr = closed_form_coincident(&p, SymmetrySector::Symmetric, &times);
        let mut buf = Vec::new();
        write_amplitudes(&mut buf, &p, &tr, None, &[("sector", "sym".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert!(rows[0].starts_with("t,re_cA2"));
        assert_eq!(rows.len(), times.len() + 1);
        assert_eq!(rows[1].split(',').count(), 14);
        assert!(text.contains("# omega23 = 5.0000000000000000e1"));
    }

    #[test]
    fn pole_csv_is_deterministic() {
        let p = canonical_paper_params().with_distance(0.2);
        let exp = solve_sector(&p, SymmetrySector::Antisymmetric, &SearchWindow::new(5.0, 200.0, &p)).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_poles(&mut a, &exp, &[]).unwrap();
        write_poles(&mut b, &exp, &[]).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let rows = text.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(rows, exp.modes.len() + 1);
    }
}
