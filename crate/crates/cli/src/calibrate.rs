use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use coinft::calibration::{
    evaluate, fit, model_file, optimality_ratio, CalibrationModel, FeatureSet, FitOptions,
    LabeledFrame, Metrics, Ridge, TempCompensator,
};
use coinft::dataio::{load_log, split, training_set, SplitProtocol, Trial};
use coinft::types::AXES;

use crate::error::{CliError, CliResult};
use crate::output::{opt_float, read_text, Outputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Full,
    Shear,
    Both,
}

impl Mode {
    fn sets(self) -> Vec<FeatureSet> {
        match self {
            Mode::Full => vec![FeatureSet::Full],
            Mode::Shear => vec![FeatureSet::ShearOnly],
            Mode::Both => vec![FeatureSet::Full, FeatureSet::ShearOnly],
        }
    }
}

fn parse_lambda(s: &str) -> Result<Ridge, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Ridge::Auto);
    }
    match s.parse::<f64>() {
        Ok(l) if l >= 0.0 && l.is_finite() => Ok(Ridge::Fixed(l)),
        _ => Err(format!(
            "expected `auto` or a non-negative number, got {s:?}"
        )),
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Directory of generated trials; the last one is held out for testing.
    #[arg(long, conflicts_with_all = ["train", "test"])]
    pub dir: Option<PathBuf>,
    /// Training logs.
    #[arg(long, num_args = 1..)]
    pub train: Vec<PathBuf>,
    /// Test log; without it the report covers the training set.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: Mode,
    /// Ridge term: `auto` or a fixed λ ≥ 0.
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    pub lambda: Ridge,
    /// Temperature compensator JSON applied before tare.
    #[arg(long)]
    pub temp_comp: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
}

pub fn model_file_name(set: FeatureSet) -> &'static str {
    match set {
        FeatureSet::Full => "model_full.json",
        FeatureSet::ShearOnly => "model_shear.json",
    }
}

fn unit(axis: usize) -> &'static str {
    if axis < 3 {
        "N"
    } else {
        "mN·m"
    }
}

fn load_trials(paths: &[PathBuf]) -> CliResult<Vec<Trial>> {
    paths
        .iter()
        .map(|p| load_log(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))))
        .collect()
}

fn trial_paths(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries =
        fs::read_dir(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("trial_") && n.ends_with(".csv"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn load_compensator(path: &Path) -> CliResult<TempCompensator> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))
}

/// Table rows: one RMSE and one R² line per model.
fn report(rows: &[(FeatureSet, &str, Metrics)]) -> (String, String) {
    let mut csv = String::from("model,set,metric,Fx,Fy,Fz,Mx,My,Mz\n");
    let mut table = format!("{:<14}{:<7}", "Model", "Metric");
    for (k, a) in AXES.iter().enumerate() {
        table += &format!("{:>12}", format!("{a} [{}]", unit(k)));
    }
    table.push('\n');
    for (set, which, m) in rows {
        let rmse: Vec<String> = m.rmse.iter().map(|v| v.to_string()).collect();
        let r2: Vec<String> = m.r2.iter().map(|v| opt_float(*v)).collect();
        let _ = writeln!(csv, "{},{which},RMSE,{}", set.label(), rmse.join(","));
        let _ = writeln!(csv, "{},{which},R2,{}", set.label(), r2.join(","));
        table += &format!("{:<14}{:<7}", set.label(), "RMSE");
        for v in m.rmse {
            table += &format!("{v:>12.4}");
        }
        table.push('\n');
        table += &format!("{:<14}{:<7}", "", "R²");
        for v in m.r2 {
            match v {
                Some(r) => table += &format!("{r:>12.4}"),
                None => table += &format!("{:>12}", "-"),
            }
        }
        table.push('\n');
    }
    (csv, table)
}

pub fn run_calibrate(args: &CalibrateArgs, out: &Path) -> CliResult<()> {
    // every input is read and checked before anything is written
    let (train, test): (Vec<Trial>, Option<Trial>) = match &args.dir {
        Some(dir) => {
            let paths = trial_paths(dir)?;
            let (train, test) = split(load_trials(&paths)?, SplitProtocol::LastTrial)?;
            (train, Some(test))
        }
        None => {
            if args.train.is_empty() {
                return Err(CliError::Usage("give --dir or --train".into()));
            }
            let train = load_trials(&args.train)?;
            let test = match &args.test {
                Some(p) => Some(load_trials(std::slice::from_ref(p))?.remove(0)),
                None => None,
            };
            (train, test)
        }
    };
    let compensator = args
        .temp_comp
        .as_deref()
        .map(load_compensator)
        .transpose()?;
    let (samples, baseline) = training_set(&train)?;
    let (eval_set, which): (&[LabeledFrame], &str) = match &test {
        Some(t) => (&t.samples, "test"),
        None => (&samples, "train"),
    };

    let opts = FitOptions {
        ridge: args.lambda,
        compensator,
    };
    let mut files = Outputs::default();
    let mut rows = Vec::new();
    for set in args.mode.sets() {
        let model = fit(&samples, &baseline, set, &opts)?;
        let metrics = evaluate(&model, eval_set)?;
        println!(
            "{}: {} training samples, λ = {:.3e}, optimality ratio {:.2e}",
            set.label(),
            model.n_train,
            model.ridge,
            optimality_ratio(&model, &samples)
        );
        files.add(model_file_name(set).into(), model_file::to_json(&model));
        rows.push((set, which, metrics));
    }
    let (csv, table) = report(&rows);
    files.add("report.csv".into(), csv);
    files.commit(out)?;
    print!("{table}");
    Ok(())
}

pub fn load_model(path: &Path) -> CliResult<CalibrationModel> {
    model_file::from_json(&read_text(path)?)
        .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))
}

pub fn run_evaluate(args: &EvaluateArgs, out: &Path) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let test = load_trials(std::slice::from_ref(&args.test))?.remove(0);
    let metrics = evaluate(&model, &test.samples)?;

    let mut mcsv = String::from("axis,unit,rmse,r2\n");
    for (k, a) in AXES.iter().enumerate() {
        let _ = writeln!(
            mcsv,
            "{a},{},{},{}",
            unit(k),
            metrics.rmse[k],
            opt_float(metrics.r2[k])
        );
    }
    let mut pcsv = String::from(
        "t,temperature,ref_fx,ref_fy,ref_fz,ref_mx,ref_my,ref_mz,pred_fx,pred_fy,pred_fz,pred_mx,pred_my,pred_mz\n",
    );
    for s in &test.samples {
        let r = s.wrench.to_array().map(|v| v.to_string()).join(",");
        let p = model
            .predict(&s.frame)
            .to_array()
            .map(|v| v.to_string())
            .join(",");
        let _ = writeln!(
            pcsv,
            "{},{},{r},{p}",
            s.frame.timestamp, s.frame.temperature
        );
    }
    let mut files = Outputs::default();
    files.add("metrics.csv".into(), mcsv);
    files.add("predictions.csv".into(), pcsv);
    files.commit(out)?;
    let (_, table) = report(&[(model.feature_set, "test", metrics)]);
    print!("{table}");
    Ok(())
}
