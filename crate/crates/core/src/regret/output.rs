//! Result files. Floats carry 17 significant digits.

use std::io::{self, Write};

use crate::estimator::ConsistencyReport;
use crate::format::float;
use crate::regret::equilibrium::EquilibriumStudy;
use crate::regret::fit::FitResult;
use crate::regret::monte_carlo::MonteCarloResult;
use crate::regret::sweep::SweepRow;

pub fn write_regret_mean<W: Write>(mut out: W, r: &MonteCarloResult) -> io::Result<()> {
    writeln!(out, "time,mean,ci_low,ci_high")?;
    for i in 0..r.times.len() {
        writeln!(
            out,
            "{},{},{},{}",
            float(r.times[i]),
            float(r.mean_regret[i]),
            float(r.ci_low[i]),
            float(r.ci_high[i])
        )?;
    }
    Ok(())
}

pub fn write_error_mean<W: Write>(mut out: W, times: &[f64], mean_error: &[f64]) -> io::Result<()> {
    writeln!(out, "time,mean_abs_error")?;
    for (t, e) in times.iter().zip(mean_error) {
        writeln!(out, "{},{}", float(*t), float(*e))?;
    }
    Ok(())
}

pub fn write_fit_json<W: Write>(mut out: W, fit: &FitResult) -> io::Result<()> {
    writeln!(out, "{{")?;
    writeln!(out, "  \"points\": {},", fit.points)?;
    writeln!(out, "  \"tss\": {},", float(fit.tss))?;
    writeln!(out, "  \"models\": {{")?;
    for (i, f) in fit.fits.iter().enumerate() {
        let coefs: Vec<String> = f.coefficients.iter().map(|c| float(*c)).collect();
        let sep = if i + 1 < fit.fits.len() { "," } else { "" };
        writeln!(
            out,
            "    \"{}\": {{ \"coefficients\": [{}], \"rss\": {} }}{sep}",
            f.model.tag(),
            coefs.join(", "),
            float(f.rss)
        )?;
    }
    writeln!(out, "  }},")?;
    writeln!(out, "  \"preferred\": \"{}\"", fit.preferred.tag())?;
    writeln!(out, "}}")
}

pub fn write_tv<W: Write>(mut out: W, s: &EquilibriumStudy) -> io::Result<()> {
    writeln!(out, "time,tv")?;
    for (t, v) in s.times.iter().zip(&s.tv) {
        writeln!(out, "{},{}", float(*t), float(*v))?;
    }
    Ok(())
}

pub fn write_sweep<W: Write>(mut out: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "param1,param2,c1")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{}",
            float(r.param1),
            float(r.param2),
            float(r.c1)
        )?;
    }
    Ok(())
}

pub fn write_consistency<W: Write>(mut out: W, r: &ConsistencyReport) -> io::Result<()> {
    writeln!(out, "n,q90_abs_error")?;
    for (n, q) in &r.quantiles {
        writeln!(out, "{n},{}", float(*q))?;
    }
    Ok(())
}
