use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use heisenberg_trace::cohomology::{bracket_residual, solve_modes, ModeSymbol};
use heisenberg_trace::geodesics::flow::integrate_recording;
use heisenberg_trace::geodesics::{confinement_check, find_closed, PhasePoint};
use heisenberg_trace::magnetics::{landau_energy, landau_kernel_diag, mehler_diag_check};
use heisenberg_trace::spectrum::{enumerate, Indices, Sectors, SpectrumQuery};
use heisenberg_trace::traces::heat::{closed_terms_for, heat_trace_closed, heat_trace_direct};
use heisenberg_trace::traces::lengths::{default_heat_grid, log_grid};
use heisenberg_trace::traces::local::local_h3_trace_tail;
use heisenberg_trace::traces::wave::{uniform_grid, wave_trace_with};
use heisenberg_trace::traces::{
    detect_peaks, extract_lengths_heat, local_h3_trace, LengthSpectrum, Mollifier, TraceSample,
};
use heisenberg_trace::verify::{run_criterion, References, CONFINEMENT_SEED, CRITERIA};

use crate::output::{to_value, Cell, Output, Table};
use crate::{Command, Failure};

type Outcome = Result<(Output, Option<Failure>), Failure>;

fn done(out: impl Into<Output>) -> Outcome {
    Ok((out.into(), None))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SectorArg {
    Heisenberg,
    Torus,
    All,
}

impl From<SectorArg> for Sectors {
    fn from(s: SectorArg) -> Self {
        match s {
            SectorArg::Heisenberg => Sectors::HEISENBERG,
            SectorArg::Torus => Sectors::TORUS,
            SectorArg::All => Sectors::ALL,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SpectrumArgs {
    #[arg(long)]
    lambda_max: f64,
    #[arg(long, value_enum, default_value = "heisenberg")]
    sector: SectorArg,
    /// Merge equal eigenvalues within a sector.
    #[arg(long)]
    merged: bool,
}

fn spectrum(a: &SpectrumArgs) -> Outcome {
    let q = SpectrumQuery::new(a.lambda_max, a.sector.into(), a.merged)?;
    let entries = enumerate(&q)?;
    let mut t = Table::new(&["value", "multiplicity", "sector", "m", "l", "k1", "k2"]);
    for e in &entries {
        let (m, l, k1, k2) = match e.indices {
            Some(Indices::Heisenberg { m, l }) => (Some(m), Some(l), None, None),
            Some(Indices::Torus { k1, k2 }) => (None, None, Some(k1), Some(k2)),
            None => (None, None, None, None),
        };
        t.push(vec![
            e.value.into(),
            e.multiplicity.into(),
            e.sector.name().into(),
            m.into(),
            l.into(),
            k1.into(),
            k2.into(),
        ]);
    }
    done(t)
}

/// Parses `re` or `re,im`.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let mut parts = s.split(',');
    let re = parts.next().unwrap_or("").trim();
    let im = parts.next().map(str::trim);
    if parts.next().is_some() {
        return Err(format!("expected re[,im], got {s:?}"));
    }
    let re: f64 = re.parse().map_err(|e| format!("{re:?}: {e}"))?;
    let im: f64 = match im {
        Some(x) => x.parse().map_err(|e| format!("{x:?}: {e}"))?,
        None => 0.0,
    };
    Ok(Complex64::new(re, im))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeatMethod {
    Direct,
    Closed,
    Both,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct HeatTraceArgs {
    /// Parameter `re[,im]`; may be repeated.
    #[arg(long, required = true, value_parser = parse_complex)]
    z: Vec<Complex64>,
    /// Absolute truncation tolerance.
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long, value_enum, default_value = "both")]
    method: HeatMethod,
}

const TRACE_COLUMNS: [&str; 6] = [
    "method",
    "parameter_re",
    "parameter_im",
    "value_re",
    "value_im",
    "truncation_bound",
];

fn trace_row(method: &str, s: &TraceSample) -> Vec<Cell> {
    vec![
        method.into(),
        s.parameter.re.into(),
        s.parameter.im.into(),
        s.value.re.into(),
        s.value.im.into(),
        s.truncation_bound.into(),
    ]
}

fn heat_trace(a: &HeatTraceArgs) -> Outcome {
    let mut t = Table::new(&TRACE_COLUMNS);
    for &z in &a.z {
        let direct = match a.method {
            HeatMethod::Closed => None,
            _ => Some(heat_trace_direct(z, a.tol)?),
        };
        let closed = match a.method {
            HeatMethod::Direct => None,
            _ => Some(heat_trace_closed(z, closed_terms_for(z, a.tol)?)?),
        };
        if let Some(d) = &direct {
            t.push(trace_row("direct", d));
        }
        if let Some(c) = &closed {
            t.push(trace_row("closed", c));
        }
        if let (Some(d), Some(c)) = (direct, closed) {
            let diff = TraceSample {
                parameter: z,
                value: d.value - c.value,
                truncation_bound: d.truncation_bound + c.truncation_bound,
                terms_used: 0,
            };
            t.push(trace_row("difference", &diff));
        }
    }
    done(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MollifierArg {
    Abel,
    Gaussian,
}

impl From<MollifierArg> for Mollifier {
    fn from(m: MollifierArg) -> Self {
        match m {
            MollifierArg::Abel => Mollifier::Abel,
            MollifierArg::Gaussian => Mollifier::Gaussian,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct WaveTraceArgs {
    #[arg(long, default_value_t = 1.0)]
    t_min: f64,
    #[arg(long, default_value_t = 16.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1501)]
    t_steps: usize,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Spectral cutoff; defaults to the smallest value the mollifier allows.
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long, value_enum, default_value = "heisenberg")]
    sector: SectorArg,
    #[arg(long, value_enum, default_value = "abel")]
    mollifier: MollifierArg,
}

fn wave_samples(a: &WaveTraceArgs) -> Result<Vec<TraceSample>, Failure> {
    if a.t_steps < 2 || a.t_max <= a.t_min || a.t_max.is_nan() || a.t_min.is_nan() {
        return Err(Failure::usage("need t_steps ≥ 2 and t_max > t_min"));
    }
    let m: Mollifier = a.mollifier.into();
    let lambda_max = a
        .lambda_max
        .unwrap_or_else(|| m.required_lambda_max(a.epsilon).max(16.0));
    let grid = uniform_grid(a.t_min, a.t_max, a.t_steps);
    Ok(wave_trace_with(
        &grid,
        a.epsilon,
        lambda_max,
        a.sector.into(),
        m,
    )?)
}

fn wave_trace(a: &WaveTraceArgs) -> Outcome {
    let samples = wave_samples(a)?;
    let mut t = Table::new(&TRACE_COLUMNS);
    for s in &samples {
        t.push(trace_row("wave", s));
    }
    done(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LengthSource {
    Heat,
    Wave,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct LengthsArgs {
    #[arg(long, value_enum, default_value = "heat")]
    from: LengthSource,
    /// Number of lengths to report.
    #[arg(long, default_value_t = 1)]
    n_detect: usize,
    /// Largest heat parameter of the fit grid.
    #[arg(long)]
    z_max: Option<f64>,
    /// Smallest heat parameter of the fit grid.
    #[arg(long)]
    z_min: Option<f64>,
    #[arg(long, default_value_t = 48)]
    z_count: usize,
    /// Mollifier width for wave-trace detection.
    #[arg(long, default_value_t = 0.02)]
    epsilon: f64,
    #[arg(long, default_value_t = 16.0)]
    t_max: f64,
    /// Minimum peak prominence, relative to the tallest peak.
    #[arg(long, default_value_t = 0.05)]
    min_prominence: f64,
}

fn lengths(a: &LengthsArgs) -> Outcome {
    let spectrum = match a.from {
        LengthSource::Heat => {
            let grid = match (a.z_max, a.z_min) {
                (None, None) => default_heat_grid(),
                (hi, lo) => log_grid(hi.unwrap_or(3.0), lo.unwrap_or(0.25), a.z_count),
            };
            extract_lengths_heat(&grid, a.n_detect)?
        }
        LengthSource::Wave => {
            let steps = ((a.t_max - 1.0) / (0.25 * a.epsilon)).ceil() as usize + 1;
            let samples = wave_samples(&WaveTraceArgs {
                t_min: 1.0,
                t_max: a.t_max,
                t_steps: steps,
                epsilon: a.epsilon,
                lambda_max: None,
                sector: SectorArg::Heisenberg,
                mollifier: MollifierArg::Abel,
            })?;
            let tallest = samples.iter().map(|s| s.value.norm()).fold(0.0, f64::max);
            let mut s = detect_peaks(&samples, a.min_prominence * tallest)?;
            s.lengths.truncate(a.n_detect);
            s.amplitudes.truncate(a.n_detect);
            s.confidence.truncate(a.n_detect);
            s
        }
    };
    let mut t = Table::new(&["length", "amplitude", "confidence", "n", "reference"]);
    for k in 0..spectrum.len() {
        let (n, r) = LengthSpectrum::nearest_reference(spectrum.lengths[k]);
        t.push(vec![
            spectrum.lengths[k].into(),
            spectrum.amplitudes[k].into(),
            spectrum.confidence[k].into(),
            n.into(),
            r.into(),
        ]);
    }
    Ok((
        Output {
            table: t,
            json: Some(to_value(&spectrum)),
        },
        None,
    ))
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct LocalTraceArgs {
    #[arg(long)]
    t: f64,
    /// `∫ f` of the test function.
    #[arg(long, default_value_t = 1.0)]
    f_integral: f64,
    #[arg(long, default_value_t = 1_000_000)]
    l_max: u64,
}

fn local_trace(a: &LocalTraceArgs) -> Outcome {
    let v = local_h3_trace(a.t, a.f_integral, a.l_max)?;
    let s = TraceSample {
        parameter: Complex64::new(a.t, 0.0),
        value: Complex64::new(v, 0.0),
        truncation_bound: local_h3_trace_tail(a.t, a.f_integral, a.l_max),
        terms_used: a.l_max as usize + 1,
    };
    let mut t = Table::new(&TRACE_COLUMNS);
    t.push(trace_row("local", &s));
    done(t)
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct GeodesicArgs {
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    #[arg(long, default_value_t = 0.0)]
    y0: f64,
    #[arg(long, default_value_t = 0.0)]
    z0: f64,
    #[arg(long, default_value_t = 1.0)]
    px: f64,
    #[arg(long, default_value_t = 0.0)]
    py: f64,
    #[arg(long, default_value_t = 0.0)]
    zeta: f64,
    /// Final time; may be negative.
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Keep every n-th point of the trajectory.
    #[arg(long, default_value_t = 1)]
    record_every: usize,
}

fn geodesic(a: &GeodesicArgs) -> Outcome {
    let p0 = PhasePoint::new(a.x0, a.y0, a.z0, a.px, a.py, a.zeta);
    let r = integrate_recording(p0, a.t, a.step, a.record_every)?;
    let mut t = Table::new(&["t", "x", "y", "z", "p_x", "p_y", "zeta", "g_star"]);
    for (time, p) in &r.trajectory {
        t.push(vec![
            (*time).into(),
            p.x.into(),
            p.y.into(),
            p.z.into(),
            p.p_x.into(),
            p.p_y.into(),
            p.zeta.into(),
            p.g_star().into(),
        ]);
    }
    Ok((
        Output {
            table: t,
            json: Some(to_value(&r)),
        },
        None,
    ))
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ClosedGeodesicsArgs {
    #[arg(long)]
    max_length: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Lower bound on the fibre momentum; radii run from `1/zeta0`.
    #[arg(long, default_value_t = 1.0)]
    zeta0: f64,
}

fn closed_geodesics(a: &ClosedGeodesicsArgs) -> Outcome {
    let s = find_closed(a.max_length, a.zeta0, a.tol)?;
    let mut t = Table::new(&[
        "length",
        "lattice_index",
        "closest_return",
        "n",
        "reference",
    ]);
    for k in 0..s.len() {
        let (n, r) = LengthSpectrum::nearest_reference(s.lengths[k]);
        t.push(vec![
            s.lengths[k].into(),
            (s.amplitudes[k] as u64).into(),
            s.confidence[k].into(),
            n.into(),
            r.into(),
        ]);
    }
    Ok((
        Output {
            table: t,
            json: Some(to_value(&s)),
        },
        None,
    ))
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ConfinementArgs {
    #[arg(long)]
    c: f64,
    #[arg(long = "T", default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = CONFINEMENT_SEED)]
    seed: u64,
}

fn confinement(a: &ConfinementArgs) -> Outcome {
    let r = confinement_check(a.c, a.t_max, a.samples, a.seed)?;
    let mut t = Table::new(&[
        "c",
        "t_max",
        "samples",
        "seed",
        "c_prime",
        "max_initial_ratio",
        "zeta_sign_changes",
        "max_energy_drift",
        "passed",
    ]);
    t.push(vec![
        r.c.into(),
        r.t_max.into(),
        r.samples.into(),
        r.seed.into(),
        r.c_prime.into(),
        r.max_initial_ratio.into(),
        r.zeta_sign_changes.into(),
        r.max_energy_drift.into(),
        r.passed.into(),
    ]);
    let after = (!r.passed).then(|| Failure {
        code: 3,
        body: json!({"error": "detection", "message": "orbits left the cone or ζ changed sign", "c_prime": r.c_prime}),
    });
    Ok((t.into(), after))
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct MehlerArgs {
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 400)]
    l_max: u64,
}

fn mehler(a: &MehlerArgs) -> Outcome {
    let m = mehler_diag_check(a.t, a.l_max)?;
    let mut t = Table::new(&[
        "t",
        "l_max",
        "lhs",
        "rhs",
        "difference",
        "tail_bound",
        "rounding",
        "passed",
    ]);
    t.push(vec![
        m.t.into(),
        m.l_max.into(),
        m.lhs.into(),
        m.rhs.into(),
        (m.lhs - m.rhs).into(),
        m.tail_bound.into(),
        m.rounding.into(),
        m.passed.into(),
    ]);
    let after = (!m.passed).then(|| Failure {
        code: 3,
        body: json!({"error": "precision", "message": "Mehler sum misses its closed form by more than the tail bound", "difference": m.lhs - m.rhs}),
    });
    Ok((t.into(), after))
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct LandauArgs {
    #[arg(long)]
    l: u64,
    #[arg(long)]
    zeta: f64,
}

fn landau(a: &LandauArgs) -> Outcome {
    let mut t = Table::new(&["l", "zeta", "energy", "kernel_diag"]);
    t.push(vec![
        a.l.into(),
        a.zeta.into(),
        landau_energy(a.l, a.zeta)?.into(),
        landau_kernel_diag(a.l, a.zeta)?.into(),
    ]);
    done(t)
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CohomologyArgs {
    /// Right-hand side as a JSON mode symbol.
    #[arg(long)]
    input: PathBuf,
    /// Also report the residual of the solution.
    #[arg(long)]
    residual: bool,
}

fn cohomology(a: &CohomologyArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| Failure::io(format!("{}: {e}", a.input.display())))?;
    let b: ModeSymbol = serde_json::from_str(&text).map_err(|e| Failure {
        code: 2,
        body: json!({"error": "domain", "message": format!("malformed mode symbol: {e}")}),
    })?;
    let sol = solve_modes(&b)?;
    let residual = if a.residual {
        Some(bracket_residual(&sol, &b)?)
    } else {
        None
    };
    let mut t = Table::new(&["part", "n", "z", "i", "re", "im"]);
    let zs = sol.z.points();
    let is = sol.i.points();
    let mut emit = |part: &str, n: usize, values: &[Complex64]| {
        for (j, &i) in is.iter().enumerate() {
            for (k, &z) in zs.iter().enumerate() {
                let v = values[sol.index(j, k)];
                t.push(vec![
                    part.into(),
                    n.into(),
                    z.into(),
                    i.into(),
                    v.re.into(),
                    v.im.into(),
                ]);
            }
        }
    };
    let mode0: Vec<Complex64> = (0..sol.i.count)
        .flat_map(|j| (0..sol.z.count).map(move |k| (j, k)))
        .map(|(j, k)| sol.mode0_value(j, k))
        .collect();
    emit("mode0", 0, &mode0);
    for (n, v) in sol.pos.iter().enumerate() {
        emit("pos", n + 1, v);
    }
    for (n, v) in sol.neg.iter().enumerate() {
        emit("neg", n + 1, v);
    }
    if let Some(r) = residual {
        t.push(vec![
            "residual".into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            r.into(),
            Cell::Empty,
        ]);
    }
    let mut js = json!({"solution": to_value(&sol)});
    if let Some(r) = residual {
        js["residual"] = json!(r);
    }
    Ok((
        Output {
            table: t,
            json: Some(js),
        },
        None,
    ))
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct VerifyArgs {
    /// Criterion ids to run, comma separated; all by default.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    /// JSON file overriding the reference constants.
    #[arg(long)]
    references: Option<PathBuf>,
    /// Add wall-clock seconds per criterion.
    #[arg(long)]
    timings: bool,
}

fn verify(a: &VerifyArgs) -> Outcome {
    let refs = match &a.references {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::io(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<References>(&text).map_err(|e| Failure {
                code: 2,
                body: json!({"error": "domain", "message": format!("malformed references: {e}")}),
            })?
        }
        None => References::default(),
    };
    let ids: Vec<u8> = if a.only.is_empty() {
        CRITERIA.iter().map(|(id, _)| *id).collect()
    } else {
        a.only.clone()
    };
    if let Some(bad) = ids
        .iter()
        .find(|id| !CRITERIA.iter().any(|(c, _)| c == *id))
    {
        return Err(Failure::usage(format!("no criterion {bad}")));
    }
    let mut columns = vec!["id", "name", "passed", "measured", "tolerance", "detail"];
    if a.timings {
        columns.push("seconds");
    }
    let mut t = Table::new(&columns);
    let mut failed = Vec::new();
    for &id in &ids {
        let r = run_criterion(id, &refs);
        if !r.passed {
            failed.push(id);
        }
        let mut row = vec![
            (r.id as u64).into(),
            r.name.clone().into(),
            r.passed.into(),
            r.measured.into(),
            r.tolerance.into(),
            r.detail.clone().into(),
        ];
        if a.timings {
            row.push(r.seconds.into());
        }
        t.push(row);
    }
    let after = (!failed.is_empty()).then(|| Failure {
        code: 3,
        body: json!({"error": "verification", "message": "acceptance criteria failed", "failed": failed}),
    });
    Ok((t.into(), after))
}

pub fn dispatch(c: &Command) -> Outcome {
    match c {
        Command::Spectrum(a) => spectrum(a),
        Command::HeatTrace(a) => heat_trace(a),
        Command::WaveTrace(a) => wave_trace(a),
        Command::Lengths(a) => lengths(a),
        Command::LocalTrace(a) => local_trace(a),
        Command::Geodesic(a) => geodesic(a),
        Command::ClosedGeodesics(a) => closed_geodesics(a),
        Command::Confinement(a) => confinement(a),
        Command::Mehler(a) => mehler(a),
        Command::Landau(a) => landau(a),
        Command::Cohomology(a) => cohomology(a),
        Command::Verify(a) => verify(a),
    }
}
