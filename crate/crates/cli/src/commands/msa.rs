use serde::Serialize;
use swing_casimir_core::{integrate_reduced_trajectory, SlowAmplitudes, SlowGrowth, SlowSystem};

use super::{labels, output, resonant_set, PairSummary};
use crate::config::RunConfig;
use crate::error::Result;
use crate::table::{Cell, Table};

#[derive(Debug, Serialize)]
pub struct MsaSummary {
    pub command: &'static str,
    pub omega: f64,
    pub length: f64,
    pub epsilon: f64,
    pub tau_final: f64,
    pub dtau: f64,
    pub modes: Vec<String>,
    pub pairs: Vec<PairSummary>,
    pub lambda_squared: Option<f64>,
    pub lambda: Option<f64>,
    pub growth: Option<&'static str>,
    pub particles: Vec<MsaCount>,
    pub max_analytic_deviation: Option<f64>,
    pub bogoliubov_drift: f64,
}

#[derive(Debug, Serialize)]
pub struct MsaCount {
    pub mode: String,
    pub n: f64,
    pub n_analytic: Option<f64>,
}

fn growth_name(g: SlowGrowth) -> &'static str {
    match g {
        SlowGrowth::Amplifying { .. } => "amplifying",
        SlowGrowth::Oscillating { .. } => "oscillating",
        SlowGrowth::Neutral => "neutral",
    }
}

fn time_of(cfg: &RunConfig, tau: f64) -> f64 {
    if cfg.epsilon > 0.0 {
        tau / cfg.epsilon
    } else {
        0.0
    }
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let tau_f = cfg.tau_final();
    let Some((pairs, system)) = resonant_set(cfg, cfg.omega)? else {
        log::warn!(
            "no resonant pair in the n_z = {} block at omega = {}",
            cfg.n_z,
            cfg.omega
        );
        let summary = MsaSummary {
            command: "msa",
            omega: cfg.omega,
            length: cfg.length,
            epsilon: cfg.epsilon,
            tau_final: tau_f,
            dtau: cfg.dtau,
            modes: Vec::new(),
            pairs: Vec::new(),
            lambda_squared: None,
            lambda: None,
            growth: None,
            particles: Vec::new(),
            max_analytic_deviation: None,
            bogoliubov_drift: 0.0,
        };
        return output(cfg).summary("msa_summary", &summary, true);
    };

    let sample_every = ((cfg.epsilon * cfg.sample_dt / cfg.dtau).round() as usize).max(1);
    let trajectory = integrate_reduced_trajectory(&system, tau_f, cfg.dtau, sample_every)?;
    let (amp_table, particle_table, deviation) = tables(cfg, &system, &trajectory);
    let out = output(cfg);
    out.table(&amp_table, false)?;
    out.table(&particle_table, false)?;

    let last = trajectory
        .last()
        .unwrap_or_else(|| unreachable!("trajectory has its start"));
    let analytic_end = system.solve_analytic(tau_f);
    let particles = system
        .modes()
        .iter()
        .map(|&m| {
            Ok(MsaCount {
                mode: m.label(),
                n: last.particle_number(m)?,
                n_analytic: analytic_end
                    .as_ref()
                    .map(|a| a.particle_number(m))
                    .transpose()?,
            })
        })
        .collect::<Result<_>>()?;
    let drift = trajectory
        .iter()
        .flat_map(|a| (0..system.len()).map(move |k| (a.bogoliubov_norm(k) - 1.0).abs()))
        .fold(0.0, f64::max);
    let lambda_squared = system.lambda_squared();
    let summary = MsaSummary {
        command: "msa",
        omega: cfg.omega,
        length: cfg.length,
        epsilon: cfg.epsilon,
        tau_final: tau_f,
        dtau: cfg.dtau,
        modes: labels(system.modes()),
        pairs: pairs.iter().map(PairSummary::from).collect(),
        lambda_squared,
        lambda: lambda_squared.filter(|&l| l >= 0.0).map(f64::sqrt),
        growth: system.growth().map(growth_name),
        particles,
        max_analytic_deviation: deviation,
        bogoliubov_drift: drift,
    };
    out.summary("msa_summary", &summary, true)
}

/// Long-format amplitude and particle tables with closed-form columns when
/// the resonant set is a star; also returns the largest amplitude deviation.
fn tables(
    cfg: &RunConfig,
    system: &SlowSystem,
    trajectory: &[SlowAmplitudes],
) -> (Table, Table, Option<f64>) {
    let mut amps = Table::new(
        "msa_amplitudes",
        &[
            "t",
            "tau",
            "mode",
            "pump",
            "b_re",
            "b_im",
            "c_re",
            "c_im",
            "b_re_analytic",
            "b_im_analytic",
            "c_re_analytic",
            "c_im_analytic",
        ],
    );
    let mut counts = Table::new("msa_particles", &["t", "tau", "mode", "n", "n_analytic"]);
    let mut deviation: Option<f64> = None;
    let modes = system.modes();
    for a in trajectory {
        let exact = system.solve_analytic(a.tau);
        let t = time_of(cfg, a.tau);
        for (i, m) in modes.iter().enumerate() {
            for (k, p) in modes.iter().enumerate() {
                let (b, c) = (a.b(i, k), a.c(i, k));
                let mut row: Vec<Cell> = vec![
                    t.into(),
                    a.tau.into(),
                    m.label().into(),
                    p.label().into(),
                    b.re.into(),
                    b.im.into(),
                    c.re.into(),
                    c.im.into(),
                ];
                match &exact {
                    Some(e) => {
                        let (eb, ec) = (e.b(i, k), e.c(i, k));
                        let d = (b - eb).norm().max((c - ec).norm());
                        deviation = Some(deviation.map_or(d, |x| x.max(d)));
                        row.extend([eb.re.into(), eb.im.into(), ec.re.into(), ec.im.into()]);
                    }
                    None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
                }
                amps.push(row);
            }
            let n = a.particle_number(*m).ok();
            let na = exact.as_ref().and_then(|e| e.particle_number(*m).ok());
            counts.push(vec![
                t.into(),
                a.tau.into(),
                m.label().into(),
                n.into(),
                na.into(),
            ]);
        }
    }
    (amps, counts, deviation)
}
