use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use coinft::dataio::Scenario;
use coinft::flight::SimConfig;
use coinft::sensor::{
    effective_modulus, pillar_stiffness, SensorModel, SensorParams, CHANNEL_NAMES,
};
use coinft::types::{Wrench, AXES};

use crate::error::CliResult;
use crate::output::load_sensor;

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Template {
    Sensor,
    SmallRange,
    LargeRange,
    TrackSine,
    DeployPackage,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[arg(long)]
    pub sensor: Option<PathBuf>,
    /// Print a default configuration file instead of derived quantities.
    #[arg(long, value_enum)]
    pub template: Option<Template>,
}

/// Test loads for the sign table: 1 N forces, 10 mN·m moments.
fn unit_loads() -> [Wrench; 6] {
    let mut out = [Wrench::ZERO; 6];
    for (k, w) in out.iter_mut().enumerate() {
        let mut a = [0.0; 6];
        a[k] = if k < 3 { 1.0 } else { 10.0 };
        *w = Wrench::from_array(a);
    }
    out
}

/// `+`, `-` or `0` per channel; deviations under 1 % of the largest one
/// in the row count as flat.
pub fn sign_row(dev: &[f64]) -> Vec<char> {
    let peak = dev.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    dev.iter()
        .map(|d| {
            if d.abs() <= 0.01 * peak {
                '0'
            } else if *d > 0.0 {
                '+'
            } else {
                '-'
            }
        })
        .collect()
}

pub fn derived_report(params: &SensorParams) -> CliResult<String> {
    let model = SensorModel::new(params.clone())?;
    let p = &params.pillars;
    let e_eff = effective_modulus(p.youngs_modulus, p.aspect_ratio())?;
    let k = pillar_stiffness(p, 0.0)?;
    let base = model.capacitances(&Wrench::ZERO)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "pillars: {} (r = {} m, h = {} m, η = {:.3})",
        p.count(),
        p.radius,
        p.height,
        p.aspect_ratio()
    );
    let _ = writeln!(
        s,
        "Young's modulus {:.4e} Pa, effective modulus {:.4e} Pa",
        p.youngs_modulus, e_eff
    );
    let _ = writeln!(
        s,
        "stiffness at rest: k_z {:.4e} N/m, k_xy {:.4e} N/m, k_θz {:.4e} N·m/rad, k_θxy {:.4e} N·m/rad",
        k.k_z, k.k_xy, k.k_theta_z, k.k_theta_xy
    );
    let _ = writeln!(s, "\nbaseline capacitance [pF]");
    for (name, c) in CHANNEL_NAMES.iter().zip(base) {
        let _ = writeln!(s, "  {name:<3} {:.5}", c * 1e12);
    }
    let _ = writeln!(s, "\nsign of channel change (1 N, 10 mN·m)");
    let _ = writeln!(
        s,
        "     {}",
        CHANNEL_NAMES.map(|n| format!("{n:>3}")).join("")
    );
    for (axis, w) in AXES.iter().zip(unit_loads()) {
        let c = model.capacitances(&w)?;
        let dev: Vec<f64> = c.iter().zip(&base).map(|(a, b)| a - b).collect();
        let row: String = sign_row(&dev).iter().map(|ch| format!("{ch:>3}")).collect();
        let _ = writeln!(s, "  {axis:<3}{row}");
    }
    Ok(s)
}

pub fn run(args: &ParamsArgs) -> CliResult<()> {
    let text = match args.template {
        Some(Template::Sensor) => SensorParams::default().to_toml(),
        Some(Template::SmallRange) => Scenario::small_range().to_toml(),
        Some(Template::LargeRange) => Scenario::large_range().to_toml(),
        Some(Template::TrackSine) => SimConfig::track_sine().to_toml(),
        Some(Template::DeployPackage) => SimConfig::deploy_package().to_toml(),
        None => derived_report(&load_sensor(args.sensor.as_deref())?)?,
    };
    print!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_threshold() {
        assert_eq!(sign_row(&[1.0, -0.5, 0.005, 0.0]), vec!['+', '-', '0', '0']);
        assert_eq!(sign_row(&[0.0, 0.0]), vec!['0', '0']);
    }

    #[test]
    fn templates_parse_back() {
        let s = SensorParams::default().to_toml();
        assert_eq!(
            SensorParams::from_toml(&s).unwrap(),
            SensorParams::default()
        );
        let c = SimConfig::deploy_package().to_toml();
        assert_eq!(
            SimConfig::from_toml(&c).unwrap(),
            SimConfig::deploy_package()
        );
    }
}
