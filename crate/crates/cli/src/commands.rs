use std::path::{Path, PathBuf};

use entcert::channel::KrausChannel;
use entcert::correct::{
    approx_report, certify as certify_instance, petz_recovery, re_output, synthesize_recovery,
    verify_recovery, CertifyOptions,
};
use entcert::families;
use entcert::linalg::{
    mutual_information, partial_trace, vn_entropy, CMatrix, CVector, DensityMatrix, PureState,
    SystemShape,
};
use entcert::measures::eof_mixed;
use entcert::optimize::OptimizerConfig;
use entcert::tomo::{correlation_test, exact_statistics, ic_product_set, reconstruct};
use num_complex::Complex64;

use crate::files::{read_json, write_json, ChannelSpecFile, LoadedState, StateSpecFile};
use crate::report::{
    Inputs, Measures, OptimizedValue, RecoverySummary, Report, SweepRow, TomoSummary,
};
use crate::CliError;

pub struct StateSource {
    pub path: Option<PathBuf>,
    pub example: Option<String>,
}

pub struct InputSource {
    pub channel: Option<PathBuf>,
    pub example: Option<String>,
    pub state: StateSource,
}

pub struct Settings {
    pub tol: f64,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub skip_eof: bool,
}

impl Settings {
    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iter: self.max_iter,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }

    fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            tol: self.tol,
            optimizer: self.optimizer(),
            compute_eof: !self.skip_eof,
        }
    }

    fn inputs(&self, channel: Option<String>, state: Option<String>) -> Inputs {
        Inputs {
            channel,
            state,
            seed: self.seed,
            restarts: self.restarts,
            max_iter: self.max_iter,
            tol: self.tol,
            skip_eof: self.skip_eof,
        }
    }
}

pub type Outcome = Result<(Report, u8), CliError>;

fn report(command: &str, inputs: Inputs) -> Report {
    Report {
        tool: "entcert".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        inputs,
        measures: None,
        certificate: None,
        recovery: None,
        approx: None,
        tomography: None,
        sweep: None,
        timing_ms: None,
    }
}

fn example_channel(spec: &str) -> Result<KrausChannel, CliError> {
    families::parse_channel_spec(spec).map_err(|e| CliError::Parse(e.to_string()))
}

/// The channel, a description for the report, and the built-in family name if any.
fn load_channel(src: &InputSource) -> Result<(KrausChannel, String, Option<String>), CliError> {
    if let Some(path) = &src.channel {
        let spec: ChannelSpecFile = read_json(path)?;
        return Ok((spec.to_channel()?, path.display().to_string(), None));
    }
    let spec = src
        .example
        .as_deref()
        .ok_or_else(|| CliError::Parse("need --channel or --example".into()))?;
    let family = spec.split(':').next().unwrap_or(spec).to_string();
    Ok((
        example_channel(spec)?,
        format!("example:{spec}"),
        Some(family),
    ))
}

fn load_state(src: &StateSource) -> Result<Option<(LoadedState, String)>, CliError> {
    if let Some(path) = &src.path {
        let spec: StateSpecFile = read_json(path)?;
        return Ok(Some((spec.to_state()?, path.display().to_string())));
    }
    if let Some(name) = &src.example {
        let psi = families::state_by_name(name).map_err(|e| CliError::Parse(e.to_string()))?;
        return Ok(Some((LoadedState::Pure(psi), format!("example:{name}"))));
    }
    Ok(None)
}

/// Pure `(R, Q)` input: the given state, or the built-in state matching the channel.
fn load_input(
    src: &InputSource,
    channel: &KrausChannel,
    family: Option<&str>,
) -> Result<(PureState, String), CliError> {
    if let Some((state, desc)) = load_state(&src.state)? {
        return Ok((state.reference_input()?, desc));
    }
    let psi = match (family, channel.in_dim()) {
        (Some(f), _) => families::default_state_for(f),
        (None, 2) => families::bell_state(),
        (None, 8) => families::repetition_state(),
        (None, d) => {
            return Err(CliError::Parse(format!(
                "no built-in state for input dimension {d}; pass --state"
            )))
        }
    };
    let name = if psi.dim() == 4 { "bell" } else { "repetition" };
    Ok((psi, format!("example:{name}")))
}

fn labels(input: &PureState) -> (String, String) {
    let l = input.shape().labels();
    (l[0].clone(), l[1].clone())
}

pub fn analyze(src: &InputSource, settings: &Settings) -> Outcome {
    let (channel, channel_desc, family) = load_channel(src)?;
    let (input, state_desc) = load_input(src, &channel, family.as_deref())?;
    let (r, q) = labels(&input);
    if input.shape().dims()[1] != channel.in_dim() {
        return Err(entcert::Error::DimensionMismatch {
            expected: channel.in_dim(),
            found: input.shape().dims()[1],
        }
        .into());
    }
    let joint = input.to_density();
    let s_q = vn_entropy(&partial_trace(&joint, &[q.as_str()])?);
    let out = channel.apply_extended(&joint, &q)?;
    let s_q_out = vn_entropy(&partial_trace(&out, &[q.as_str()])?);
    let s_rq_out = vn_entropy(&out);
    let eof = if settings.skip_eof {
        None
    } else {
        let e = eof_mixed(&out, &[r.as_str()], &settings.optimizer())?;
        Some(OptimizedValue {
            value: e.value,
            converged: e.converged,
            restarts_used: e.restarts_used,
            ensemble_size: e.ensemble_size,
        })
    };
    let re_mutual_info = mutual_information(&re_output(&channel, &input)?, &[r.as_str()])?;
    let mut rep = report(
        "analyze",
        settings.inputs(Some(channel_desc), Some(state_desc)),
    );
    rep.measures = Some(Measures {
        s_q,
        s_q_out,
        s_rq_out,
        coherent_info: s_q_out - s_rq_out,
        eof,
        re_mutual_info,
    });
    Ok((rep, 0))
}

pub fn certify(src: &InputSource, settings: &Settings) -> Outcome {
    let (channel, channel_desc, family) = load_channel(src)?;
    let (input, state_desc) = load_input(src, &channel, family.as_deref())?;
    let cert = certify_instance(&channel, &input, &settings.certify_options())?;
    let code = if cert.correctable { 0 } else { 1 };
    let mut rep = report(
        "certify",
        settings.inputs(Some(channel_desc), Some(state_desc)),
    );
    rep.certificate = Some(cert);
    Ok((rep, code))
}

pub fn recover(src: &InputSource, settings: &Settings, out: Option<&Path>) -> Outcome {
    let (channel, channel_desc, family) = load_channel(src)?;
    let (input, state_desc) = load_input(src, &channel, family.as_deref())?;
    let cert = certify_instance(&channel, &input, &settings.certify_options())?;
    if !cert.correctable {
        return Err(CliError::NotCorrectable(format!(
            "S^Q - I = {:e} exceeds tolerance {:e}",
            cert.s_q - cert.coherent_info,
            settings.tol
        )));
    }
    let recovery = synthesize_recovery(&channel, &input)?;
    let fidelity = verify_recovery(&channel, &recovery, &input)?;
    let (_, q) = labels(&input);
    let rho_q = partial_trace(&input.to_density(), &[q.as_str()])?;
    let petz = petz_recovery(&channel, &rho_q)?;
    let petz_fidelity = verify_recovery(&channel, &petz, &input)?;
    let kraus = ChannelSpecFile::from_channel(&recovery.channel, Some("recovery".into()));
    if let Some(path) = out {
        write_json(path, &kraus)?;
    }
    let mut rep = report(
        "recover",
        settings.inputs(Some(channel_desc), Some(state_desc)),
    );
    rep.certificate = Some(cert);
    rep.recovery = Some(RecoverySummary {
        method: recovery.method,
        fidelity,
        petz_fidelity,
        kraus,
    });
    Ok((rep, 0))
}

/// `start:stop:step` (inclusive of `stop` up to rounding) or `a,b,c`.
pub fn parse_grid(grid: &str) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Parse(format!("bad grid value `{s}`")))
    };
    let values = if grid.contains(':') {
        let parts: Vec<&str> = grid.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Parse("grid must be start:stop:step".into()));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step <= 0.0 || stop < start {
            return Err(CliError::Parse(
                "grid needs step > 0 and stop ≥ start".into(),
            ));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + i as f64 * step).collect()
    } else {
        grid.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if let Some(p) = values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::Parse(format!("grid value {p} outside [0, 1]")));
    }
    Ok(values)
}

pub fn sweep(family: &str, grid: &str, state: &StateSource, settings: &Settings) -> Outcome {
    if !families::SWEEP_FAMILIES.contains(&family) {
        return Err(CliError::Parse(format!(
            "unknown sweep family `{family}` (expected one of {})",
            families::SWEEP_FAMILIES.join(", ")
        )));
    }
    let grid_values = parse_grid(grid)?;
    let (input, state_desc) = match load_state(state)? {
        Some((s, d)) => (s.reference_input()?, d),
        None => (families::bell_state(), "example:bell".to_string()),
    };
    let (r, q) = labels(&input);
    let joint = input.to_density();
    let s_q = vn_entropy(&partial_trace(&joint, &[q.as_str()])?);
    let cfg = settings.optimizer();
    let mut rows = Vec::with_capacity(grid_values.len());
    for p in grid_values {
        let channel = families::channel_by_name(family, p)?;
        let out = channel.apply_extended(&joint, &q)?;
        let coherent_info = vn_entropy(&partial_trace(&out, &[q.as_str()])?) - vn_entropy(&out);
        let eof = if settings.skip_eof {
            None
        } else {
            Some(eof_mixed(&out, &[r.as_str()], &cfg)?.value)
        };
        let (approx, _) = approx_report(&channel, &input, &cfg)?;
        rows.push(SweepRow {
            p,
            coherent_info,
            eof,
            epsilon: approx.epsilon,
            bound: approx.paper_bound,
            fidelity: approx.achieved_fidelity,
            epsilon_eof: eof.map(|e| s_q - e),
        });
    }
    let mut rep = report(
        "sweep",
        settings.inputs(Some(format!("family:{family}")), Some(state_desc)),
    );
    rep.sweep = Some(rows);
    Ok((rep, 0))
}

pub fn tomo(state: &StateSource, settings: &Settings) -> Outcome {
    let (loaded, desc) = load_state(state)?
        .ok_or_else(|| CliError::Parse("tomo needs --state or --state-example".into()))?;
    let rho = loaded.density();
    let dims = rho.shape().dims().to_vec();
    if dims.len() != 2 {
        return Err(CliError::Invalid(format!(
            "tomography needs a bipartite state, got {}",
            rho.shape()
        )));
    }
    let ms = ic_product_set(dims[0], dims[1])?;
    let stats = exact_statistics(&rho, &ms)?;
    let back = reconstruct(&stats, &ms, rho.shape().clone())?;
    let mut rep = report("tomo", settings.inputs(None, Some(desc)));
    rep.tomography = Some(TomoSummary {
        settings: ms.a_settings.len() * ms.b_settings.len(),
        gram_rank: ms.gram_rank(),
        dims,
        reconstruction_error: back.distance(&rho),
        correlation: correlation_test(&stats),
    });
    Ok((rep, 0))
}

/// Built-in channel files, named `<family>[-p].json`.
fn example_channels() -> Vec<(String, KrausChannel)> {
    let phase = CMatrix::from_diagonal(&CVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ]));
    vec![
        ("identity".into(), KrausChannel::identity(2)),
        ("dephasing-0.1".into(), families::dephasing(0.1)),
        ("dephasing-0.5".into(), families::dephasing(0.5)),
        ("bitflip-0.1".into(), families::bit_flip(0.1)),
        ("depolarizing-1.0".into(), families::depolarizing(1.0)),
        (
            "amplitude-damping-0.2".into(),
            families::amplitude_damping(0.2),
        ),
        ("repetition-0.3".into(), families::repetition_bit_flip(0.3)),
        (
            "phase-gate".into(),
            KrausChannel::new(vec![phase]).expect("unitary"),
        ),
    ]
}

fn example_states() -> Vec<(String, StateSpecFile)> {
    let zero_plus = PureState::basis(SystemShape::single("A", 2).expect("valid"), 0)
        .expect("valid")
        .tensor(&families::plus_state("B"))
        .expect("distinct labels");
    let mut classical = CMatrix::zeros(4, 4);
    classical[(0, 0)] = Complex64::new(0.5, 0.0);
    classical[(3, 3)] = Complex64::new(0.5, 0.0);
    let classical = DensityMatrix::new(
        classical,
        SystemShape::new(vec![2, 2], vec!["A", "B"]).expect("valid"),
    )
    .expect("valid state");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut ghz = CVector::zeros(8);
    ghz[0] = Complex64::new(s, 0.0);
    ghz[7] = Complex64::new(s, 0.0);
    let ghz = PureState::new(
        ghz,
        SystemShape::new(vec![2, 2, 2], vec!["A", "B", "C"]).expect("valid"),
    )
    .expect("normalized");
    vec![
        (
            "bell".into(),
            StateSpecFile::from_pure(&families::bell_state()),
        ),
        (
            "repetition".into(),
            StateSpecFile::from_pure(&families::repetition_state()),
        ),
        ("product".into(), StateSpecFile::from_pure(&zero_plus)),
        ("classical".into(), StateSpecFile::from_density(&classical)),
        ("ghz".into(), StateSpecFile::from_pure(&ghz)),
    ]
}

pub fn write_examples(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (name, ch) in example_channels() {
        let spec = ChannelSpecFile::from_channel(&ch, Some(name.clone()));
        write_json(&dir.join(format!("channel-{name}.json")), &spec)?;
    }
    for (name, spec) in example_states() {
        write_json(&dir.join(format!("state-{name}.json")), &spec)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_grid("0:2:0.5").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
    }

    #[test]
    fn example_files_round_trip() {
        for (_, ch) in example_channels() {
            let spec = ChannelSpecFile::from_channel(&ch, None);
            let text = serde_json::to_string(&spec).unwrap();
            let back: ChannelSpecFile = serde_json::from_str(&text).unwrap();
            assert!(back.to_channel().unwrap().same_channel(&ch));
        }
        for (_, spec) in example_states() {
            let text = serde_json::to_string(&spec).unwrap();
            let back: StateSpecFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
            back.to_state().unwrap();
        }
    }
}
