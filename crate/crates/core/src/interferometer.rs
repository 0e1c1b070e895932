//! Stern-Gerlach interferometer: splitting into paths A, B, C, sequential
//! recombination (B+C first, then with A), probe placement and path-resolved
//! weak values.
//!
//! Spatial motion is reduced to a discrete mode label per branch plus a
//! static Gaussian packet. Branches on distinct paths are exactly orthogonal
//! spatial modes; recombination merges modes without touching spin states
//! or relative phases.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conditions::{
    residual_cheshire_with, residual_condition1_with, residual_condition2_with, Selection,
};
use crate::error::{Error, Result};
use crate::spin_algebra::{basis_state, j_component, overlap, Angle, CMatrix3, CVector3, Observable, SpinState};
use crate::weak_values::{check_orthogonality, WeakValue, DEFAULT_ORTHOGONALITY_TOL};

/// Normalized 1D Gaussian `(2/(π w²))^{1/4} exp(−(x − c)² / w²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavepacketGaussian {
    center: f64,
    width: f64,
}

impl WavepacketGaussian {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || !center.is_finite() {
            return Err(Error::Config(format!(
                "wavepacket needs finite center and positive width (got center {center}, width {width})"
            )));
        }
        Ok(WavepacketGaussian { center, width })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// `⟨self|other⟩` for two unit-normalized real Gaussians.
    pub fn overlap(&self, other: &WavepacketGaussian) -> f64 {
        let s = self.width * self.width + other.width * other.width;
        let dc = self.center - other.center;
        (2.0 * self.width * other.width / s).sqrt() * (-dc * dc / s).exp()
    }
}

impl Default for WavepacketGaussian {
    fn default() -> Self {
        WavepacketGaussian {
            center: 0.0,
            width: 1.0,
        }
    }
}

/// Interferometer arm. Box A is the `k = +1` output of the splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Path {
    A,
    B,
    C,
}

impl Path {
    pub const ALL: [Path; 3] = [Path::A, Path::B, Path::C];

    pub fn k(self) -> i32 {
        match self {
            Path::A => 1,
            Path::B => 0,
            Path::C => -1,
        }
    }

    pub fn from_k(k: i32) -> Result<Path> {
        match k {
            1 => Ok(Path::A),
            0 => Ok(Path::B),
            -1 => Ok(Path::C),
            other => Err(Error::InvalidProjection(other)),
        }
    }
}

/// Spatial mode a branch currently occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Source,
    Arm(Path),
    RecombinedBc,
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Prepared,
    Split,
    BcRecombined,
    FullyRecombined,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Prepared => "prepared",
            Stage::Split => "split",
            Stage::BcRecombined => "BC_recombined",
            Stage::FullyRecombined => "fully_recombined",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    /// Arm the branch was routed through; `None` before splitting.
    pub path: Option<Path>,
    pub mode: Mode,
    pub amp: Complex64,
    pub spin: SpinState,
    pub packet: WavepacketGaussian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchState {
    pub branches: Vec<Branch>,
    pub stage: Stage,
}

impl BranchState {
    /// Total norm, treating distinct modes as orthogonal and adding branches
    /// that share a mode coherently.
    pub fn norm_sqr(&self) -> f64 {
        let mut modes: Vec<(Mode, CVector3)> = Vec::new();
        for b in &self.branches {
            let v = b.spin.amps() * b.amp;
            match modes.iter_mut().find(|(m, _)| *m == b.mode) {
                Some((_, acc)) => *acc += v,
                None => modes.push((b.mode, v)),
            }
        }
        modes.iter().map(|(_, v)| v.norm_squared()).sum()
    }

    fn require(&self, expected: Stage) -> Result<()> {
        if self.stage != expected {
            return Err(Error::Stage {
                expected: expected.name(),
                found: self.stage.name(),
            });
        }
        Ok(())
    }

    /// Amplitude for projecting the recombined output on `post`.
    pub fn postselection_amplitude(&self, post: &SpinState) -> Result<Complex64> {
        self.require(Stage::FullyRecombined)?;
        Ok(self.branches.iter().map(|b| b.amp * overlap(post, &b.spin)).sum())
    }

    /// `Σ_b amp_b ⟨post|O|spin_b⟩` over the branches selected by `filter`.
    pub fn transition_element<F: Fn(&Branch) -> bool>(
        &self,
        post: &SpinState,
        obs: &Observable,
        filter: F,
    ) -> Complex64 {
        self.branches
            .iter()
            .filter(|b| filter(b))
            .map(|b| b.amp * obs.matrix_element(post, &b.spin))
            .sum()
    }

    /// Applies a spin unitary to the selected branches in place.
    pub fn apply_spin_unitary<F: Fn(&Branch) -> bool>(&mut self, u: &CMatrix3, filter: F) -> Result<()> {
        for b in self.branches.iter_mut().filter(|b| filter(b)) {
            // keep the unnormalized image: amp absorbs the norm so that a
            // non-unitary (truncated) operator is not silently renormalized
            let v = u * b.spin.amps();
            let n = v.norm();
            b.spin = SpinState::from_vector(v)?;
            b.amp *= n;
        }
        Ok(())
    }
}

/// Single-branch state carrying the pre-selected spin state.
pub fn prepare(config: &ScenarioConfig) -> Result<BranchState> {
    let spin = config.selection.pre_state()?;
    Ok(BranchState {
        branches: vec![Branch {
            path: None,
            mode: Mode::Source,
            amp: Complex64::new(1.0, 0.0),
            spin,
            packet: config.packet,
        }],
        stage: Stage::Prepared,
    })
}

/// Stern-Gerlach splitting along `alpha` with no differential phases.
pub fn split(state: &BranchState, alpha: Angle) -> Result<BranchState> {
    split_with_phases(state, alpha, [0.0; 3])
}

/// Splitting with an extra propagation phase per arm (A, B, C).
pub fn split_with_phases(state: &BranchState, alpha: Angle, phases: [f64; 3]) -> Result<BranchState> {
    state.require(Stage::Prepared)?;
    let mut branches = Vec::with_capacity(3 * state.branches.len());
    for (path, phase) in Path::ALL.iter().zip(phases) {
        let out = basis_state(alpha, path.k())?;
        for src in &state.branches {
            branches.push(Branch {
                path: Some(*path),
                mode: Mode::Arm(*path),
                amp: src.amp * overlap(&out, &src.spin) * Complex64::from_polar(1.0, phase),
                spin: out.clone(),
                packet: src.packet,
            });
        }
    }
    Ok(BranchState {
        branches,
        stage: Stage::Split,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recombination {
    Bc,
    All,
}

/// Merges arms B and C, or (after that) everything into the output mode.
/// Spin states, amplitudes and packets are left untouched.
pub fn recombine(state: &BranchState, which: Recombination) -> Result<BranchState> {
    let (expected, next) = match which {
        Recombination::Bc => (Stage::Split, Stage::BcRecombined),
        Recombination::All => (Stage::BcRecombined, Stage::FullyRecombined),
    };
    state.require(expected)?;
    let branches = state
        .branches
        .iter()
        .map(|b| {
            let mode = match (which, b.mode) {
                (Recombination::Bc, Mode::Arm(Path::B | Path::C)) => Mode::RecombinedBc,
                (Recombination::Bc, m) => m,
                (Recombination::All, _) => Mode::Output,
            };
            Branch { mode, ..b.clone() }
        })
        .collect();
    Ok(BranchState {
        branches,
        stage: next,
    })
}

/// Probe positions. D2/D3/D4 belong to the three-box layout, C0/C2/C3/C5 to
/// the Cheshire-cat layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Location {
    D2,
    D3,
    D4,
    C0,
    C2,
    C3,
    C5,
}

impl Location {
    pub const ALL: [Location; 7] = [
        Location::D2,
        Location::D3,
        Location::D4,
        Location::C0,
        Location::C2,
        Location::C3,
        Location::C5,
    ];

    /// Arms the probe couples to; `None` for probes on the undivided beam.
    pub fn paths(self) -> Option<&'static [Path]> {
        match self {
            Location::D2 | Location::C2 => Some(&[Path::B, Path::C]),
            Location::D3 | Location::C3 => Some(&[Path::A]),
            Location::D4 => Some(&[Path::B]),
            Location::C0 | Location::C5 => None,
        }
    }

    pub fn is_three_box(self) -> bool {
        matches!(self, Location::D2 | Location::D3 | Location::D4)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Location {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Location::ALL
            .iter()
            .copied()
            .find(|l| l.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown probe location '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// Path projector (spin identity restricted to the probe's arms).
    PathProjector,
    /// `J_γ` on the probe's arms.
    SpinJGamma,
    /// `J_γ Π_path`; identical to `SpinJGamma` on arm-localized probes.
    Combined,
}

impl ProbeKind {
    fn uses_gamma(self) -> bool {
        !matches!(self, ProbeKind::PathProjector)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub location: Location,
    pub kind: ProbeKind,
    /// Trigger time, kept for traceability only.
    pub time: Option<f64>,
}

impl Probe {
    pub fn new(location: Location, kind: ProbeKind) -> Self {
        Probe {
            location,
            kind,
            time: None,
        }
    }

    pub fn at(mut self, time: f64) -> Self {
        self.time = Some(time);
        self
    }

    /// Conventional name of the measured quantity.
    pub fn label(&self) -> String {
        use Location::*;
        match (self.kind, self.location) {
            (ProbeKind::PathProjector, D2 | C2) => "Pi_Abar".into(),
            (ProbeKind::PathProjector, D3 | C3) => "Pi_A".into(),
            (ProbeKind::PathProjector, D4) => "Pi_B".into(),
            (ProbeKind::PathProjector, C0 | C5) => "Pi_all".into(),
            (_, C0) => "J_gamma(t0)".into(),
            (_, C5) => "J_gamma(t5)".into(),
            (_, D2 | C2) => "J_gamma^Abar".into(),
            (_, D3 | C3) => "J_gamma^A".into(),
            (_, D4) => "J_gamma^B".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    ThreeBox,
    Cheshire,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProjectorMode {
    Ideal,
    /// Projector onto a Gaussian window of width `delta` centered at `center`.
    Gaussian { center: f64, delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub kind: ScenarioKind,
    pub alpha: Angle,
    pub phi: Angle,
    pub gamma: Option<Angle>,
    pub selection: Selection,
    pub probes: Vec<Probe>,
    pub projector_mode: ProjectorMode,
    pub packet: WavepacketGaussian,
    /// Extra propagation phase on arms A, B, C (radians).
    pub path_phases: [f64; 3],
    pub orthogonality_tol: f64,
}

impl ScenarioConfig {
    /// Three-box layout at the joint solution with probes D2, D3, D4.
    pub fn three_box_default() -> Self {
        let sol = crate::conditions::joint_solution();
        ScenarioConfig {
            name: "three_box_default".into(),
            kind: ScenarioKind::ThreeBox,
            alpha: sol.alpha,
            phi: sol.phi,
            gamma: None,
            selection: Selection::default(),
            probes: vec![
                Probe::new(Location::D2, ProbeKind::PathProjector).at(2.0),
                Probe::new(Location::D3, ProbeKind::PathProjector).at(3.0),
                Probe::new(Location::D4, ProbeKind::PathProjector).at(4.0),
            ],
            projector_mode: ProjectorMode::Ideal,
            packet: WavepacketGaussian::default(),
            path_phases: [0.0; 3],
            orthogonality_tol: DEFAULT_ORTHOGONALITY_TOL,
        }
    }

    /// Cheshire-cat layout at the joint solution with the first γ root.
    pub fn cheshire_default() -> Self {
        let sol = crate::conditions::cheshire_solution();
        ScenarioConfig {
            name: "cheshire_default".into(),
            kind: ScenarioKind::Cheshire,
            alpha: sol.alpha,
            phi: sol.phi,
            gamma: sol.gamma,
            selection: Selection::default(),
            probes: vec![
                Probe::new(Location::C3, ProbeKind::PathProjector).at(3.0),
                Probe::new(Location::C2, ProbeKind::PathProjector).at(2.0),
                Probe::new(Location::C3, ProbeKind::Combined).at(3.0),
                Probe::new(Location::C2, ProbeKind::Combined).at(2.0),
                Probe::new(Location::C0, ProbeKind::SpinJGamma).at(0.0),
                Probe::new(Location::C5, ProbeKind::SpinJGamma).at(5.0),
            ],
            projector_mode: ProjectorMode::Ideal,
            packet: WavepacketGaussian::default(),
            path_phases: [0.0; 3],
            orthogonality_tol: DEFAULT_ORTHOGONALITY_TOL,
        }
    }

    pub fn pre_state(&self) -> Result<SpinState> {
        self.selection.pre_state()
    }

    pub fn post_state(&self) -> Result<SpinState> {
        self.selection.post_state(self.phi)
    }

    pub fn require_gamma(&self) -> Result<Angle> {
        self.gamma
            .ok_or_else(|| Error::Config("gamma is required for J_gamma probes".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.pre_state()?;
        self.post_state()?;
        if !(self.orthogonality_tol.is_finite() && self.orthogonality_tol > 0.0) {
            return Err(Error::Config("orthogonality tolerance must be positive".into()));
        }
        if let ProjectorMode::Gaussian { center, delta } = self.projector_mode {
            WavepacketGaussian::new(center, delta)?;
        }
        for probe in &self.probes {
            let ok = match self.kind {
                ScenarioKind::ThreeBox => probe.location.is_three_box(),
                ScenarioKind::Cheshire => !probe.location.is_three_box(),
            };
            if !ok {
                return Err(Error::Config(format!(
                    "probe location {} is not part of the {:?} layout",
                    probe.location, self.kind
                )));
            }
            if probe.kind.uses_gamma() {
                self.require_gamma()?;
            }
        }
        Ok(())
    }

    /// Squared packet/window overlap applied to arm-localized probes.
    pub fn overlap_factor(&self) -> f64 {
        match self.projector_mode {
            ProjectorMode::Ideal => 1.0,
            ProjectorMode::Gaussian { center, delta } => {
                let window = WavepacketGaussian { center, width: delta };
                window.overlap(&self.packet).powi(2)
            }
        }
    }

    fn split_state(&self) -> Result<BranchState> {
        split_with_phases(&prepare(self)?, self.alpha, self.path_phases)
    }

    /// `⟨ψ_f|ψ_i⟩` through the closed interferometer.
    pub fn postselection_amplitude(&self) -> Result<Complex64> {
        let closed = recombine(&recombine(&self.split_state()?, Recombination::Bc)?, Recombination::All)?;
        closed.postselection_amplitude(&self.post_state()?)
    }
}

/// Weak value of `O_spin ⊗ Π_paths` from the split branches, ideal projectors.
fn arm_weak_value(config: &ScenarioConfig, paths: &[Path], obs: &Observable) -> Result<WeakValue> {
    let post = config.post_state()?;
    let split = config.split_state()?;
    let numerator = split.transition_element(&post, obs, |b| b.path.is_some_and(|p| paths.contains(&p)));
    WeakValue::from_parts(numerator, config.postselection_amplitude()?, config.orthogonality_tol)
}

/// Weak value of the projector onto an arbitrary group of arms, e.g.
/// `[A, C]` for `Π_B̄` (measured on an A+C recombination) or `[C]` for `Π_C`.
pub fn path_group_weak_value(config: &ScenarioConfig, paths: &[Path]) -> Result<WeakValue> {
    config.validate()?;
    Ok(arm_weak_value(config, paths, &Observable::identity())?.scaled(config.overlap_factor()))
}

/// Path-projector weak value seen by D2 (`Π_Ā`), D3 (`Π_A`) or D4 (`Π_B`).
pub fn path_projector_weak_value(config: &ScenarioConfig, probe: Location) -> Result<WeakValue> {
    let paths = match probe {
        Location::D2 | Location::D3 | Location::D4 => probe.paths().expect("arm-localized"),
        other => {
            return Err(Error::Config(format!(
                "{other} is not a path-projector probe location"
            )))
        }
    };
    path_group_weak_value(config, paths)
}

/// `J_γ` weak value at C0 / C5 (whole beam) or `J_γ Π` at C2 (B+C) / C3 (A).
pub fn spin_weak_value_on_path(config: &ScenarioConfig, probe: Location) -> Result<WeakValue> {
    config.validate()?;
    let j_gamma = j_component(config.require_gamma()?);
    let post = config.post_state()?;
    let amp = config.postselection_amplitude()?;
    let tol = config.orthogonality_tol;
    match probe {
        Location::C0 => {
            let prepared = prepare(config)?;
            let numerator = prepared.transition_element(&post, &j_gamma, |_| true);
            WeakValue::from_parts(numerator, amp, tol)
        }
        Location::C5 => {
            let closed = recombine(&recombine(&config.split_state()?, Recombination::Bc)?, Recombination::All)?;
            let numerator = closed.transition_element(&post, &j_gamma, |_| true);
            WeakValue::from_parts(numerator, amp, tol)
        }
        Location::C2 | Location::C3 => {
            let paths = probe.paths().expect("arm-localized");
            Ok(arm_weak_value(config, paths, &j_gamma)?.scaled(config.overlap_factor()))
        }
        other => Err(Error::Config(format!("{other} is not a Cheshire probe location"))),
    }
}

/// Evaluates any configured probe.
pub fn probe_weak_value(config: &ScenarioConfig, probe: &Probe) -> Result<WeakValue> {
    match (probe.kind, probe.location.paths()) {
        (ProbeKind::PathProjector, Some(paths)) => path_group_weak_value(config, paths),
        (ProbeKind::PathProjector, None) => {
            config.validate()?;
            WeakValue::from_parts(
                config.postselection_amplitude()?,
                config.postselection_amplitude()?,
                config.orthogonality_tol,
            )
        }
        (_, Some(paths)) if probe.location.is_three_box() => {
            let j_gamma = j_component(config.require_gamma()?);
            config.validate()?;
            Ok(arm_weak_value(config, paths, &j_gamma)?.scaled(config.overlap_factor()))
        }
        _ => spin_weak_value_on_path(config, probe.location),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub probe: Probe,
    pub label: String,
    pub weak_value: WeakValue,
    /// Spatial factor applied (1 for ideal projectors and whole-beam probes).
    pub overlap_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedValue {
    pub label: String,
    pub weak_value: WeakValue,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedResidual {
    pub name: String,
    pub value: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub kind: ScenarioKind,
    pub alpha: Angle,
    pub phi: Angle,
    pub gamma: Option<Angle>,
    pub postselection_amp: Complex64,
    pub postselection_probability: f64,
    pub probes: Vec<ProbeResult>,
    /// Quantities computed from separate recombination orders (`Π_B̄`, `Π_C`).
    pub derived: Vec<NamedValue>,
    pub residuals: Vec<NamedResidual>,
}

impl Report {
    pub fn probe(&self, label: &str) -> Option<&ProbeResult> {
        self.probes.iter().find(|p| p.label == label)
    }

    pub fn derived(&self, label: &str) -> Option<&NamedValue> {
        self.derived.iter().find(|d| d.label == label)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value.norm()).fold(0.0, f64::max)
    }
}

/// Runs every configured probe plus the scenario's derived quantities and
/// active condition residuals.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Report> {
    config.validate()?;
    let amp = config.postselection_amplitude()?;
    check_orthogonality(amp, config.orthogonality_tol)?;

    let mut probes = Vec::with_capacity(config.probes.len());
    for probe in &config.probes {
        let weak_value = probe_weak_value(config, probe).map_err(|e| Error::Probe {
            probe: format!("{} ({:?})", probe.location, probe.kind),
            source: Box::new(e),
        })?;
        let overlap_factor = if probe.location.paths().is_some() {
            config.overlap_factor()
        } else {
            1.0
        };
        probes.push(ProbeResult {
            probe: *probe,
            label: probe.label(),
            weak_value,
            overlap_factor,
        });
    }

    let sel = &config.selection;
    let mut derived = Vec::new();
    let mut residuals = vec![NamedResidual {
        name: "condition1".into(),
        value: residual_condition1_with(sel, config.alpha, config.phi)?,
    }];
    match config.kind {
        ScenarioKind::ThreeBox => {
            for (label, paths) in [("Pi_Bbar", &[Path::A, Path::C][..]), ("Pi_C", &[Path::C][..])] {
                derived.push(NamedValue {
                    label: label.into(),
                    weak_value: path_group_weak_value(config, paths)?,
                });
            }
            residuals.push(NamedResidual {
                name: "condition2".into(),
                value: residual_condition2_with(sel, config.alpha, config.phi)?,
            });
        }
        ScenarioKind::Cheshire => {
            if let Some(gamma) = config.gamma {
                residuals.push(NamedResidual {
                    name: "cheshire".into(),
                    value: residual_cheshire_with(sel, config.alpha, config.phi, gamma)?,
                });
            }
        }
    }

    Ok(Report {
        scenario: config.name.clone(),
        kind: config.kind,
        alpha: config.alpha,
        phi: config.phi,
        gamma: config.gamma,
        postselection_amp: amp,
        postselection_probability: amp.norm_sqr(),
        probes,
        derived,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weak_values::{group_projector, weak_value};

    fn close(a: Complex64, b: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < 1e-12
    }

    #[test]
    fn prepare_default() {
        let cfg = ScenarioConfig::three_box_default();
        let st = prepare(&cfg).unwrap();
        assert_eq!(st.stage, Stage::Prepared);
        assert_eq!(st.branches.len(), 1);
        assert_eq!(st.branches[0].spin.amps()[1], Complex64::new(1.0, 0.0));
        assert!((st.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn split_at_zero_angle_does_not_split() {
        let cfg = ScenarioConfig::three_box_default();
        let s = split(&prepare(&cfg).unwrap(), Angle::ZERO).unwrap();
        let amps: Vec<f64> = s.branches.iter().map(|b| b.amp.norm()).collect();
        assert!(amps[0] < 1e-15 && (amps[1] - 1.0).abs() < 1e-15 && amps[2] < 1e-15);
        assert_eq!(s.branches[0].path, Some(Path::A));
        assert_eq!(s.branches[2].path, Some(Path::C));
    }

    #[test]
    fn split_amplitude_matches_d_element() {
        let cfg = ScenarioConfig::three_box_default();
        let s = split(&prepare(&cfg).unwrap(), cfg.alpha).unwrap();
        let a = cfg.alpha.radians();
        // ⟨m_α=+1|m_z=0⟩ = d¹_{+1,0}(−α) = sin α / √2
        assert!((s.branches[0].amp.re - a.sin() / 2f64.sqrt()).abs() < 1e-12);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stage_ordering_enforced() {
        let cfg = ScenarioConfig::three_box_default();
        let prepared = prepare(&cfg).unwrap();
        assert!(matches!(recombine(&prepared, Recombination::Bc), Err(Error::Stage { .. })));
        let s = split(&prepared, cfg.alpha).unwrap();
        assert!(matches!(split(&s, cfg.alpha), Err(Error::Stage { .. })));
        assert!(matches!(recombine(&s, Recombination::All), Err(Error::Stage { .. })));
        assert!(matches!(
            s.postselection_amplitude(&cfg.post_state().unwrap()),
            Err(Error::Stage { .. })
        ));
    }

    #[test]
    fn bc_recombination_keeps_a_separate() {
        let cfg = ScenarioConfig::three_box_default();
        let s = split(&prepare(&cfg).unwrap(), cfg.alpha).unwrap();
        let bc = recombine(&s, Recombination::Bc).unwrap();
        assert_eq!(bc.branches[0].mode, Mode::Arm(Path::A));
        assert_eq!(bc.branches[1].mode, Mode::RecombinedBc);
        assert_eq!(bc.branches[2].mode, Mode::RecombinedBc);
        assert!((bc.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
        let all = recombine(&bc, Recombination::All).unwrap();
        assert!((all.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_interferometer_reproduces_direct_overlap() {
        let cfg = ScenarioConfig::three_box_default();
        let direct = overlap(&cfg.post_state().unwrap(), &cfg.pre_state().unwrap());
        assert!((cfg.postselection_amplitude().unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn ideal_three_box_table() {
        let cfg = ScenarioConfig::three_box_default();
        assert!(close(path_projector_weak_value(&cfg, Location::D3).unwrap().value, 1.0));
        assert!(close(path_projector_weak_value(&cfg, Location::D2).unwrap().value, 0.0));
        assert!(close(path_projector_weak_value(&cfg, Location::D4).unwrap().value, 1.0));
        assert!(close(path_group_weak_value(&cfg, &[Path::C]).unwrap().value, -1.0));
        assert!(close(path_group_weak_value(&cfg, &[Path::A, Path::C]).unwrap().value, 0.0));
        assert!(path_projector_weak_value(&cfg, Location::C3).is_err());
    }

    #[test]
    fn arm_weak_values_match_spin_space_projectors() {
        let mut cfg = ScenarioConfig::three_box_default();
        cfg.alpha = Angle::from_radians(0.9);
        cfg.phi = Angle::from_radians(2.0);
        let pre = cfg.pre_state().unwrap();
        let post = cfg.post_state().unwrap();
        for paths in [&[Path::A][..], &[Path::B, Path::C], &[Path::C]] {
            let ks: Vec<i32> = paths.iter().map(|p| p.k()).collect();
            let spin = weak_value(&pre, &post, &group_projector(cfg.alpha, &ks).unwrap()).unwrap();
            let arm = path_group_weak_value(&cfg, paths).unwrap();
            assert!((spin.value - arm.value).norm() < 1e-12);
        }
    }

    #[test]
    fn matched_gaussian_window_is_ideal() {
        let mut cfg = ScenarioConfig::three_box_default();
        cfg.projector_mode = ProjectorMode::Gaussian {
            center: cfg.packet.center(),
            delta: cfg.packet.width(),
        };
        assert!((cfg.overlap_factor() - 1.0).abs() < 1e-12);
        assert!(close(path_projector_weak_value(&cfg, Location::D3).unwrap().value, 1.0));
    }

    #[test]
    fn gaussian_window_degrades_monotonically() {
        let mut cfg = ScenarioConfig::three_box_default();
        let mut last = 0.0;
        for offset in [3.0, 2.0, 1.0, 0.5, 0.1, 0.0] {
            cfg.projector_mode = ProjectorMode::Gaussian {
                center: offset,
                delta: 1.0,
            };
            let v = path_projector_weak_value(&cfg, Location::D3).unwrap().value.re;
            assert!(v > last && v <= 1.0 + 1e-12);
            last = v;
        }
    }

    #[test]
    fn cheshire_probes() {
        let cfg = ScenarioConfig::cheshire_default();
        let c0 = spin_weak_value_on_path(&cfg, Location::C0).unwrap().value;
        let c2 = spin_weak_value_on_path(&cfg, Location::C2).unwrap().value;
        let c3 = spin_weak_value_on_path(&cfg, Location::C3).unwrap().value;
        let c5 = spin_weak_value_on_path(&cfg, Location::C5).unwrap().value;
        assert!(c3.norm() < 1e-12);
        assert!((c2 - c0).norm() < 1e-12 && (c5 - c0).norm() < 1e-12);
        assert!(c0.norm() > 0.1);
        assert!((c2 + c3 - c0).norm() < 1e-12);
    }

    #[test]
    fn missing_gamma_is_config_error() {
        let mut cfg = ScenarioConfig::cheshire_default();
        cfg.gamma = None;
        assert!(matches!(spin_weak_value_on_path(&cfg, Location::C0), Err(Error::Config(_))));
    }

    #[test]
    fn wrong_layout_rejected() {
        let mut cfg = ScenarioConfig::three_box_default();
        cfg.probes.push(Probe::new(Location::C2, ProbeKind::PathProjector));
        assert!(matches!(run_scenario(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn orthogonal_selection_reported() {
        let mut cfg = ScenarioConfig::three_box_default();
        cfg.phi = Angle::ZERO; // ⟨m_z=+1|m_z=0⟩ = 0
        let err = run_scenario(&cfg).unwrap_err();
        assert!(err.is_physical());
    }

    #[test]
    fn report_is_deterministic() {
        let cfg = ScenarioConfig::cheshire_default();
        assert_eq!(run_scenario(&cfg).unwrap(), run_scenario(&cfg).unwrap());
    }

    #[test]
    fn location_parsing() {
        assert_eq!("c3".parse::<Location>().unwrap(), Location::C3);
        assert!("D9".parse::<Location>().is_err());
    }
}
