//! Scenario file format.
//!
//! Scenario files are TOML. Every angle is a string with an explicit unit
//! suffix (`"63.5deg"`, `"1.1rad"`) or one of the solver keywords listed per
//! key below. All sections are optional; missing keys fall back to the
//! defaults shown.
//!
//! ```toml
//! [scenario]
//! name = "three_box_default"
//! kind = "three-box"            # or "cheshire"
//!
//! [angles]
//! alpha = "joint"               # "joint" | angle
//! phi = "joint"                 # "joint" | "closed_form" | "solve" | angle
//! gamma = "solve"               # "solve" | angle; omit for no gamma
//!
//! [states]
//! pre_axis = "0deg"
//! pre_m = 0
//! post_m = 1                    # post-selection axis is phi
//!
//! [projector]
//! mode = "ideal"                # or "gaussian" with center / delta
//! center = 0.0
//! delta = 1.0
//!
//! [packet]
//! center = 0.0
//! width = 1.0
//! phases = ["0deg", "0deg", "0deg"]   # extra phase on arms A, B, C
//!
//! [[probes]]
//! location = "D2"
//! kind = "path_projector"       # "spin_j_gamma" | "combined"
//! time = 2.0
//!
//! [tolerances]
//! residual = 1e-12
//! orthogonality = 1e-10
//!
//! [meter]
//! sigma = 1.0
//! observable = "pi_a"
//! g = [0.1, 0.01, 0.001]
//!
//! [sweep]
//! start = "10deg"
//! stop = "170deg"
//! step = "2deg"
//!
//! [epsilon]
//! eps = 1e-3
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conditions::{joint_solution, phi_closed_form, solve_gamma_with, solve_phi_with, Selection};
use crate::error::{Error, Result};
use crate::interferometer::{Location, Probe, ProbeKind, ProjectorMode, ScenarioConfig, ScenarioKind, WavepacketGaussian};
use crate::spin_algebra::{j_component, Angle, Observable};
use crate::weak_values::{group_projector, DEFAULT_ORTHOGONALITY_TOL};

pub const THREE_BOX_DEFAULT: &str = include_str!("../../configs/three_box_default.toml");
pub const CHESHIRE_DEFAULT: &str = include_str!("../../configs/cheshire_default.toml");
pub const SWEEP_ALPHA: &str = include_str!("../../configs/sweep_alpha.toml");

/// Looks up a bundled config by name.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "three_box_default" => Some(THREE_BOX_DEFAULT),
        "cheshire_default" => Some(CHESHIRE_DEFAULT),
        "sweep_alpha" => Some(SWEEP_ALPHA),
        _ => None,
    }
}

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-12;
pub const DEFAULT_EPS: f64 = 1e-3;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    scenario: RawScenario,
    #[serde(default)]
    angles: RawAngles,
    #[serde(default)]
    states: RawStates,
    #[serde(default)]
    projector: RawProjector,
    #[serde(default)]
    packet: RawPacket,
    probes: Option<Vec<RawProbe>>,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    meter: RawMeter,
    sweep: Option<RawSweep>,
    #[serde(default)]
    epsilon: RawEpsilon,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default = "default_name")]
    name: String,
    #[serde(default = "default_kind")]
    kind: ScenarioKind,
}

impl Default for RawScenario {
    fn default() -> Self {
        RawScenario {
            name: default_name(),
            kind: default_kind(),
        }
    }
}

fn default_name() -> String {
    "unnamed".into()
}

fn default_kind() -> ScenarioKind {
    ScenarioKind::ThreeBox
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAngles {
    alpha: Option<String>,
    phi: Option<String>,
    gamma: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStates {
    pre_axis: Option<String>,
    pre_m: Option<i32>,
    post_m: Option<i32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProjector {
    #[serde(default = "default_mode")]
    mode: String,
    center: Option<f64>,
    delta: Option<f64>,
}

impl Default for RawProjector {
    fn default() -> Self {
        RawProjector {
            mode: default_mode(),
            center: None,
            delta: None,
        }
    }
}

fn default_mode() -> String {
    "ideal".into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    center: Option<f64>,
    width: Option<f64>,
    phases: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    location: String,
    kind: ProbeKind,
    time: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    residual: Option<f64>,
    orthogonality: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeter {
    sigma: Option<f64>,
    observable: Option<String>,
    g: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    start: String,
    stop: String,
    step: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEpsilon {
    eps: Option<f64>,
}

/// Angle with a mandatory `deg` or `rad` suffix.
pub fn parse_angle(s: &str) -> Result<Angle> {
    let t = s.trim();
    let (num, to_angle): (&str, fn(f64) -> Angle) = if let Some(n) = t.strip_suffix("deg") {
        (n, Angle::from_degrees)
    } else if let Some(n) = t.strip_suffix("rad") {
        (n, Angle::from_radians)
    } else {
        return Err(Error::Config(format!(
            "angle '{s}' needs an explicit unit suffix (deg or rad)"
        )));
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse angle '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("angle '{s}' is not finite")));
    }
    Ok(to_angle(v))
}

/// Spin observables selectable for meter simulations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableName {
    Identity,
    PiA,
    PiAbar,
    PiB,
    PiBbar,
    PiC,
    JGamma,
    Jz,
}

impl ObservableName {
    const NAMES: [(&'static str, ObservableName); 8] = [
        ("identity", ObservableName::Identity),
        ("pi_a", ObservableName::PiA),
        ("pi_abar", ObservableName::PiAbar),
        ("pi_b", ObservableName::PiB),
        ("pi_bbar", ObservableName::PiBbar),
        ("pi_c", ObservableName::PiC),
        ("j_gamma", ObservableName::JGamma),
        ("jz", ObservableName::Jz),
    ];

    /// Spin-space operator for this name, using the scenario's α and γ.
    pub fn build(self, scenario: &ScenarioConfig) -> Result<Observable> {
        let a = scenario.alpha;
        match self {
            ObservableName::Identity => Ok(Observable::identity()),
            ObservableName::PiA => group_projector(a, &[1]),
            ObservableName::PiAbar => group_projector(a, &[0, -1]),
            ObservableName::PiB => group_projector(a, &[0]),
            ObservableName::PiBbar => group_projector(a, &[1, -1]),
            ObservableName::PiC => group_projector(a, &[-1]),
            ObservableName::JGamma => Ok(j_component(scenario.require_gamma()?)),
            ObservableName::Jz => Ok(Observable::jz()),
        }
    }
}

impl FromStr for ObservableName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::NAMES
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(s.trim()))
            .map(|(_, o)| *o)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::NAMES.iter().map(|(n, _)| *n).collect();
                Error::Config(format!("unknown observable '{s}' (known: {})", known.join(", ")))
            })
    }
}

impl fmt::Display for ObservableName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = Self::NAMES.iter().find(|(_, o)| o == self).map(|(n, _)| *n).unwrap_or("?");
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeterSettings {
    pub sigma: f64,
    pub observable: ObservableName,
    pub g_list: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub start: Angle,
    pub stop: Angle,
    pub step: Angle,
}

impl Sweep {
    /// `START:STOP:STEP` in degrees.
    pub fn parse_degrees(s: &str) -> Result<Sweep> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("sweep '{s}' must be START:STOP:STEP")));
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse sweep component '{p}'")))?;
        }
        Sweep::new(Angle::from_degrees(v[0]), Angle::from_degrees(v[1]), Angle::from_degrees(v[2]))
    }

    pub fn new(start: Angle, stop: Angle, step: Angle) -> Result<Sweep> {
        let (a, b, s) = (start.radians(), stop.radians(), step.radians());
        if !(s.is_finite() && s > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
            return Err(Error::Config("sweep needs start <= stop and a positive step".into()));
        }
        if (b - a) / s > 1e6 {
            return Err(Error::Config("sweep has too many points".into()));
        }
        Ok(Sweep { start, stop, step })
    }

    /// Grid points `start + i·step` up to and including `stop` (with a small
    /// slack for round-off).
    pub fn points(&self) -> Vec<Angle> {
        let (a, b, s) = (self.start.degrees(), self.stop.degrees(), self.step.degrees());
        let count = ((b - a) / s + 1e-9).floor() as usize + 1;
        (0..count).map(|i| Angle::from_degrees(a + i as f64 * s)).collect()
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub residual_tol: f64,
    pub meter: MeterSettings,
    pub sweep: Option<Sweep>,
    pub eps: f64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(format!("invalid scenario file: {e}")))?;
        resolve(raw)
    }

    /// Hex SHA-256 over the canonical JSON of the resolved config, so files
    /// that differ only in formatting, comments or key order hash equally.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}

fn resolve(raw: RawFile) -> Result<RunConfig> {
    let kind = raw.scenario.kind;
    let selection = Selection {
        pre_axis: raw.states.pre_axis.as_deref().map(parse_angle).transpose()?.unwrap_or(Angle::ZERO),
        pre_m: raw.states.pre_m.unwrap_or(0),
        post_m: raw.states.post_m.unwrap_or(1),
    };

    let alpha = match raw.angles.alpha.as_deref().unwrap_or("joint") {
        "joint" => joint_solution().alpha,
        other => parse_angle(other)?,
    };
    let phi = match raw.angles.phi.as_deref().unwrap_or("joint") {
        "joint" => joint_solution().phi,
        "closed_form" => phi_closed_form(alpha, 0)?,
        "solve" => *solve_phi_with(&selection, alpha)?
            .first()
            .ok_or_else(|| Error::Config(format!("no phi root for alpha = {alpha}")))?,
        other => parse_angle(other)?,
    };
    let default_gamma = if kind == ScenarioKind::Cheshire { Some("solve") } else { None };
    let gamma = match raw.angles.gamma.as_deref().or(default_gamma) {
        None => None,
        Some("solve") => Some(
            *solve_gamma_with(&selection, alpha, phi)?
                .first()
                .ok_or_else(|| Error::Config(format!("no gamma root for alpha = {alpha}, phi = {phi}")))?,
        ),
        Some(other) => Some(parse_angle(other)?),
    };

    let projector_mode = match raw.projector.mode.as_str() {
        "ideal" => ProjectorMode::Ideal,
        "gaussian" => ProjectorMode::Gaussian {
            center: raw.projector.center.unwrap_or(0.0),
            delta: raw
                .projector
                .delta
                .ok_or_else(|| Error::Config("gaussian projector needs 'delta'".into()))?,
        },
        other => return Err(Error::Config(format!("unknown projector mode '{other}'"))),
    };

    let packet = WavepacketGaussian::new(raw.packet.center.unwrap_or(0.0), raw.packet.width.unwrap_or(1.0))?;
    let path_phases = match raw.packet.phases {
        None => [0.0; 3],
        Some(v) if v.len() == 3 => {
            let mut out = [0.0; 3];
            for (slot, s) in out.iter_mut().zip(&v) {
                *slot = parse_angle(s)?.radians();
            }
            out
        }
        Some(_) => return Err(Error::Config("packet.phases needs exactly three angles (A, B, C)".into())),
    };

    let probes = match raw.probes {
        Some(list) => list
            .into_iter()
            .map(|p| {
                Ok(Probe {
                    location: p.location.parse::<Location>()?,
                    kind: p.kind,
                    time: p.time,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        None => match kind {
            ScenarioKind::ThreeBox => ScenarioConfig::three_box_default().probes,
            ScenarioKind::Cheshire => ScenarioConfig::cheshire_default().probes,
        },
    };

    let scenario = ScenarioConfig {
        name: raw.scenario.name,
        kind,
        alpha,
        phi,
        gamma,
        selection,
        probes,
        projector_mode,
        packet,
        path_phases,
        orthogonality_tol: raw.tolerances.orthogonality.unwrap_or(DEFAULT_ORTHOGONALITY_TOL),
    };
    scenario.validate()?;

    let meter = MeterSettings {
        sigma: raw.meter.sigma.unwrap_or(crate::meter::DEFAULT_SIGMA),
        observable: raw.meter.observable.as_deref().unwrap_or("pi_a").parse()?,
        g_list: raw.meter.g.unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3]),
    };
    let sweep = raw
        .sweep
        .map(|s| Sweep::new(parse_angle(&s.start)?, parse_angle(&s.stop)?, parse_angle(&s.step)?))
        .transpose()?;
    let residual_tol = raw.tolerances.residual.unwrap_or(DEFAULT_RESIDUAL_TOL);
    if !(residual_tol.is_finite() && residual_tol > 0.0) {
        return Err(Error::Config("residual tolerance must be positive".into()));
    }

    Ok(RunConfig {
        scenario,
        residual_tol,
        meter,
        sweep,
        eps: raw.epsilon.eps.unwrap_or(DEFAULT_EPS),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_resolve() {
        let tb = RunConfig::from_toml(THREE_BOX_DEFAULT).unwrap();
        assert_eq!(tb.scenario, ScenarioConfig::three_box_default());
        let cc = RunConfig::from_toml(CHESHIRE_DEFAULT).unwrap();
        assert_eq!(cc.scenario, ScenarioConfig::cheshire_default());
        let sw = RunConfig::from_toml(SWEEP_ALPHA).unwrap();
        assert!(sw.sweep.unwrap().points().len() >= 50);
    }

    #[test]
    fn angles_need_units() {
        assert!((parse_angle("90deg").unwrap().radians() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(parse_angle(" 1.5 rad").unwrap().radians(), 1.5);
        assert!(parse_angle("90").is_err());
        assert!(parse_angle("abcdeg").is_err());
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = "[scenario]\nname = \"x\"\n[angles]\nalpha = \"joint\"\nphi = \"joint\"\n";
        let b = "# comment\n[angles]\nphi   = \"joint\"\n\n[scenario]\nname=\"x\"\n";
        let ha = RunConfig::from_toml(a).unwrap().config_hash();
        let hb = RunConfig::from_toml(b).unwrap().config_hash();
        assert_eq!(ha, hb);
        let c = "[scenario]\nname = \"y\"\n";
        assert_ne!(ha, RunConfig::from_toml(c).unwrap().config_hash());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("[angles]\nbeta = \"1deg\"\n").is_err());
        assert!(RunConfig::from_toml("[projector]\nmode = \"fuzzy\"\n").is_err());
    }

    #[test]
    fn sweep_parsing() {
        let s = Sweep::parse_degrees("10:170:2").unwrap();
        let pts = s.points();
        assert_eq!(pts.len(), 81);
        assert!((pts[80].degrees() - 170.0).abs() < 1e-9);
        assert!(Sweep::parse_degrees("10:170").is_err());
        assert!(Sweep::parse_degrees("10:5:1").is_err());
    }

    #[test]
    fn observable_names() {
        assert_eq!("PI_A".parse::<ObservableName>().unwrap(), ObservableName::PiA);
        assert!("pi_z".parse::<ObservableName>().is_err());
        assert_eq!(ObservableName::PiAbar.to_string(), "pi_abar");
    }
}
