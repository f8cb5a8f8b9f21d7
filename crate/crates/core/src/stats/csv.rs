//! Minimal CSV output helpers shared by the command-line front end.

use std::io::{self, Write};

use super::histogram::{ChiSquareTest, Histogram, Marginal};
use super::UncertaintyReport;

/// Formats like C's `%.12g`.
pub fn fmt_g(x: f64) -> String {
    const PREC: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PREC).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PREC - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes one CSV row of already formatted fields.
pub fn write_row<W: Write, S: AsRef<str>>(out: &mut W, fields: &[S]) -> io::Result<()> {
    let line: Vec<&str> = fields.iter().map(AsRef::as_ref).collect();
    writeln!(out, "{}", line.join(","))
}

/// `lo,hi,center,count,density` rows, with an optional test footer.
pub fn write_histogram<W: Write>(
    out: &mut W,
    hist: &Histogram,
    test: Option<&ChiSquareTest>,
) -> io::Result<()> {
    write_row(out, &["lo", "hi", "center", "count", "density"])?;
    let density = hist.density();
    for (k, d) in density.iter().enumerate() {
        let (a, b) = hist.edges(k);
        write_row(
            out,
            &[
                fmt_g(a),
                fmt_g(b),
                fmt_g(hist.center(k)),
                hist.counts()[k].to_string(),
                fmt_g(*d),
            ],
        )?;
    }
    if let Some(t) = test {
        writeln!(
            out,
            "# chi_square={},dof={},p_value={},underflow={},overflow={}",
            fmt_g(t.statistic),
            t.dof,
            fmt_g(t.p_value),
            hist.underflow(),
            hist.overflow()
        )?;
    }
    Ok(())
}

/// `center,density` of the bin-averaged analytic marginal.
pub fn write_marginal<W: Write>(out: &mut W, hist: &Histogram, marginal: &dyn Marginal) -> io::Result<()> {
    write_row(out, &["center", "density"])?;
    for (k, d) in hist.expected_density(marginal).iter().enumerate() {
        write_row(out, &[fmt_g(hist.center(k)), fmt_g(*d)])?;
    }
    Ok(())
}

pub const UNCERTAINTY_HEADER: [&str; 11] = [
    "beta_bar",
    "samples",
    "std_x",
    "std_x_se",
    "std_halfdiff_p",
    "std_halfdiff_p_se",
    "product",
    "product_se",
    "analytic_product",
    "occupation",
    "z_score",
];

pub fn uncertainty_row(r: &UncertaintyReport) -> Vec<String> {
    vec![
        fmt_g(r.beta_bar),
        r.samples.to_string(),
        fmt_g(r.std_x.value),
        fmt_g(r.std_x.se),
        fmt_g(r.std_halfdiff_p.value),
        fmt_g(r.std_halfdiff_p.se),
        fmt_g(r.product.value),
        fmt_g(r.product.se),
        fmt_g(r.analytic_product),
        fmt_g(r.occupation),
        fmt_g(r.product.z_score(r.analytic_product)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (1.0, "1"),
            (0.5, "0.5"),
            (1.0819767068693265, "1.08197670687"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5e-300, "-2.5e-300"),
            (0.0, "0"),
            (100.0, "100"),
            (9.99999999999999, "10"),
            (f64::INFINITY, "inf"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g(x), want, "{x}");
        }
    }
}
