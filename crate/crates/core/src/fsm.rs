//! Multi-tape finite-state machines for prosody.
//!
//! Two machines are bundled: a single-tape intonation grammar over boundary
//! tones, pitch accents and phrase accents, and a three-tape tone-terracing
//! transducer mapping lexical H/L tones to phonetic tones and pitch-update
//! rules, which [`realize_pitch`] turns into quantitative targets.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contour::{F0Frame, F0Track};
use crate::error::{param, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub to: String,
    /// One symbol per tape; `None` reads/writes nothing on that tape.
    pub labels: Vec<Option<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FsmSpec {
    states: Vec<String>,
    start: String,
    finals: Vec<String>,
    tapes: usize,
    transitions: Vec<Transition>,
}

/// An n-tape nondeterministic finite-state machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FsmSpec")]
pub struct MultiTapeFsm {
    states: Vec<String>,
    start: String,
    finals: Vec<String>,
    tapes: usize,
    transitions: Vec<Transition>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TryFrom<FsmSpec> for MultiTapeFsm {
    type Error = Error;

    fn try_from(s: FsmSpec) -> Result<Self> {
        MultiTapeFsm::new(s.states, s.start, s.finals, s.tapes, s.transitions)
    }
}

impl MultiTapeFsm {
    pub fn new(
        states: Vec<String>,
        start: impl Into<String>,
        finals: Vec<String>,
        tapes: usize,
        transitions: Vec<Transition>,
    ) -> Result<Self> {
        let start = start.into();
        if tapes == 0 {
            return Err(param("a machine needs at least one tape"));
        }
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(param(format!("duplicate state `{s}`")));
            }
        }
        let known = |s: &str| -> Result<()> {
            if index.contains_key(s) {
                Ok(())
            } else {
                Err(param(format!("unknown state `{s}`")))
            }
        };
        known(&start)?;
        for f in &finals {
            known(f)?;
        }
        for t in &transitions {
            known(&t.from)?;
            known(&t.to)?;
            if t.labels.len() != tapes {
                return Err(param(format!(
                    "transition {} -> {} has {} labels for {tapes} tapes",
                    t.from,
                    t.to,
                    t.labels.len()
                )));
            }
        }
        Ok(Self {
            states,
            start,
            finals,
            tapes,
            transitions,
            index,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn finals(&self) -> &[String] {
        &self.finals
    }

    pub fn tapes(&self) -> usize {
        self.tapes
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Symbols that appear on `tape`, sorted.
    pub fn alphabet(&self, tape: usize) -> BTreeSet<&str> {
        self.transitions
            .iter()
            .filter_map(|t| t.labels.get(tape).and_then(|l| l.as_deref()))
            .collect()
    }

    fn is_final(&self, state: usize) -> bool {
        self.finals.iter().any(|f| self.index[f] == state)
    }

    fn closure(&self, mut set: BTreeSet<usize>, tape: usize) -> BTreeSet<usize> {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for t in &self.transitions {
                if self.index[&t.from] == s && t.labels[tape].is_none() {
                    let to = self.index[&t.to];
                    if set.insert(to) {
                        stack.push(to);
                    }
                }
            }
        }
        set
    }

    fn step(&self, set: &BTreeSet<usize>, symbol: &str, tape: usize) -> BTreeSet<usize> {
        let next = self
            .transitions
            .iter()
            .filter(|t| set.contains(&self.index[&t.from]) && t.labels[tape].as_deref() == Some(symbol))
            .map(|t| self.index[&t.to])
            .collect();
        self.closure(next, tape)
    }

    fn initial(&self, tape: usize) -> BTreeSet<usize> {
        self.closure(BTreeSet::from([self.index[&self.start]]), tape)
    }

    /// Whether some start-to-final path spells `input` on `tape`.
    pub fn recognize<S: AsRef<str>>(&self, input: &[S], tape: usize) -> Result<bool> {
        if tape >= self.tapes {
            return Err(param(format!("tape {tape} out of range ({} tapes)", self.tapes)));
        }
        let alphabet = self.alphabet(tape);
        if let Some(bad) = input.iter().find(|s| !alphabet.contains(s.as_ref())) {
            return Err(Error::Alphabet {
                symbol: bad.as_ref().to_string(),
                tape,
            });
        }
        let mut set = self.initial(tape);
        for s in input {
            set = self.step(&set, s.as_ref(), tape);
            if set.is_empty() {
                return Ok(false);
            }
        }
        Ok(set.iter().any(|&s| self.is_final(s)))
    }

    /// All strings of at most `max_len` symbols accepted on `tape`, in
    /// lexicographic order of their symbol sequences.
    pub fn enumerate_strings(&self, max_len: usize, tape: usize) -> Vec<Vec<String>> {
        let alphabet: Vec<String> = self.alphabet(tape).into_iter().map(String::from).collect();
        let mut accepted = BTreeSet::new();
        let mut frontier: Vec<(Vec<String>, BTreeSet<usize>)> = vec![(Vec::new(), self.initial(tape))];
        for len in 0..=max_len {
            let mut next = Vec::new();
            for (prefix, set) in &frontier {
                if set.iter().any(|&s| self.is_final(s)) {
                    accepted.insert(prefix.clone());
                }
                if len == max_len {
                    continue;
                }
                for sym in &alphabet {
                    let to = self.step(set, sym, tape);
                    if !to.is_empty() {
                        let mut p = prefix.clone();
                        p.push(sym.clone());
                        next.push((p, to));
                    }
                }
            }
            frontier = next;
        }
        accepted.into_iter().collect()
    }
}

fn arc(from: &str, to: &str, labels: &[&str], action: Option<&str>) -> Transition {
    Transition {
        from: from.into(),
        to: to.into(),
        labels: labels.iter().map(|l| Some(l.to_string())).collect(),
        action: action.map(String::from),
    }
}

pub const INITIAL_BOUNDARIES: [&str; 2] = ["%H", "%L"];
pub const PITCH_ACCENTS: [&str; 6] = ["H*", "L*", "H*+L", "H+L*", "L*+H", "L+H*"];
pub const PHRASE_ACCENTS: [&str; 2] = ["H-", "L-"];
pub const FINAL_BOUNDARIES: [&str; 2] = ["H%", "L%"];

/// Single-tape intonation grammar.
///
/// An intonation group is an initial boundary tone, one or more intermediate
/// groups (one or more pitch accents closed by a phrase accent) and a final
/// boundary tone. Intonation groups iterate.
pub fn build_pierrehumbert() -> MultiTapeFsm {
    let mut arcs = Vec::new();
    for b in INITIAL_BOUNDARIES {
        arcs.push(arc("start", "open", &[b], None));
        arcs.push(arc("closed", "open", &[b], None));
    }
    for a in PITCH_ACCENTS {
        arcs.push(arc("open", "accented", &[a], None));
        arcs.push(arc("accented", "accented", &[a], None));
        arcs.push(arc("phrased", "accented", &[a], None));
    }
    for p in PHRASE_ACCENTS {
        arcs.push(arc("accented", "phrased", &[p], None));
    }
    for f in FINAL_BOUNDARIES {
        arcs.push(arc("phrased", "closed", &[f], None));
    }
    let states = ["start", "open", "accented", "phrased", "closed"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    MultiTapeFsm::new(states, "start", vec!["closed".into()], 1, arcs)
        .expect("bundled grammar is well formed")
}

/// Three-tape tone-terracing transducer: lexical tone, phonetic tone, pitch rule.
pub fn build_terracing() -> MultiTapeFsm {
    let arcs = vec![
        arc("0", "H", &["H", "hc", "init_high"], Some("init_high")),
        arc("0", "L", &["L", "lc", "init_low"], Some("init_low")),
        arc("H", "H", &["H", "h", "upsweep"], Some("upsweep")),
        arc("L", "L", &["L", "l", "downdrift"], Some("downdrift")),
        arc("H", "L", &["L", "!l", "downstep"], Some("downstep")),
        arc("L", "H", &["H", "^h", "upstep"], Some("upstep")),
    ];
    let states = ["0", "H", "L"].iter().map(|s| s.to_string()).collect();
    MultiTapeFsm::new(states, "0", vec!["H".into(), "L".into()], 3, arcs)
        .expect("bundled transducer is well formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tone {
    H,
    L,
}

impl Tone {
    pub fn as_str(self) -> &'static str {
        match self {
            Tone::H => "H",
            Tone::L => "L",
        }
    }
}

/// Lexical tone string over {H, L}.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ToneSequence(pub Vec<Tone>);

impl FromStr for ToneSequence {
    type Err = Error;

    /// Accepts `HLH`, `H L H` or `H,L,H`.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                'H' | 'h' => Ok(Tone::H),
                'L' | 'l' => Ok(Tone::L),
                other => Err(Error::Alphabet {
                    symbol: other.to_string(),
                    tape: 0,
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(ToneSequence)
    }
}

impl fmt::Display for ToneSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.0.iter().map(|t| t.as_str()).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhoneticTone {
    #[serde(rename = "hc")]
    HighInitial,
    #[serde(rename = "lc")]
    LowInitial,
    #[serde(rename = "h")]
    Upsweep,
    #[serde(rename = "l")]
    Downdrift,
    #[serde(rename = "!l")]
    Downstep,
    #[serde(rename = "^h")]
    Upstep,
}

impl PhoneticTone {
    pub fn as_str(self) -> &'static str {
        match self {
            PhoneticTone::HighInitial => "hc",
            PhoneticTone::LowInitial => "lc",
            PhoneticTone::Upsweep => "h",
            PhoneticTone::Downdrift => "l",
            PhoneticTone::Downstep => "!l",
            PhoneticTone::Upstep => "^h",
        }
    }

    fn is_initial(self) -> bool {
        matches!(self, PhoneticTone::HighInitial | PhoneticTone::LowInitial)
    }
}

impl FromStr for PhoneticTone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "hc" => PhoneticTone::HighInitial,
            "lc" => PhoneticTone::LowInitial,
            "h" => PhoneticTone::Upsweep,
            "l" => PhoneticTone::Downdrift,
            "!l" => PhoneticTone::Downstep,
            "^h" => PhoneticTone::Upstep,
            other => return Err(Error::Labels(format!("unknown phonetic tone `{other}`"))),
        })
    }
}

/// Run the terracing transducer on a lexical tone string and return the
/// phonetic tones written on the second tape.
pub fn transduce_tones(lexical: &ToneSequence) -> Vec<PhoneticTone> {
    let fsm = build_terracing();
    let mut state = fsm.start().to_string();
    let mut out = Vec::with_capacity(lexical.0.len());
    for tone in &lexical.0 {
        let t = fsm
            .transitions()
            .iter()
            .find(|t| t.from == state && t.labels[0].as_deref() == Some(tone.as_str()))
            .expect("terracing transducer is complete over {H, L}");
        out.push(
            t.labels[1]
                .as_deref()
                .expect("phonetic tape is never empty")
                .parse()
                .expect("bundled labels parse"),
        );
        state = t.to.clone();
    }
    out
}

/// Register model constants for pitch realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerracingParams {
    /// Initial high pitch (Hz).
    pub p_h0: f64,
    /// Initial low pitch (Hz).
    pub p_l0: f64,
    /// Upsweep ratio (> 1) applied to the high register on H after H.
    pub k_usw: f64,
    /// Downdrift ratio (< 1) applied to the low register on L after L.
    pub k_dd: f64,
    /// Downstep ratio (< 1) from the high register to the following low.
    pub k_dst: f64,
    /// Terrace ratio (< 1) from the high register to the following upstepped high.
    pub k_ter: f64,
    pub floor_hz: f64,
    pub ceiling_hz: f64,
}

impl Default for TerracingParams {
    fn default() -> Self {
        Self {
            p_h0: 170.0,
            p_l0: 110.0,
            k_usw: 1.02,
            k_dd: 0.98,
            k_dst: 0.70,
            k_ter: 0.90,
            floor_hz: 60.0,
            ceiling_hz: 400.0,
        }
    }
}

impl TerracingParams {
    pub fn validate(&self) -> Result<()> {
        let ratios_ok = self.k_usw > 1.0
            && (0.0..1.0).contains(&self.k_dd)
            && (0.0..1.0).contains(&self.k_dst)
            && (0.0..1.0).contains(&self.k_ter)
            && self.k_dd > 0.0
            && self.k_dst > 0.0
            && self.k_ter > 0.0;
        if !ratios_ok {
            return Err(param("terracing ratios need k_usw > 1 and 0 < k_dd, k_dst, k_ter < 1"));
        }
        if !(self.floor_hz < self.p_l0 && self.p_l0 < self.p_h0 && self.p_h0 < self.ceiling_hz) {
            return Err(param("terracing pitches need floor < P_L0 < P_H0 < ceiling"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchTarget {
    pub label: PhoneticTone,
    pub target_hz: f64,
}

pub type PitchTargetSequence = Vec<PitchTarget>;

/// Map phonetic tones to pitch targets with a two-register model.
///
/// The high and low registers start at `p_h0` / `p_l0`. Upsweep and downdrift
/// scale their own register; downstep sets the low register from the high one;
/// upstep lowers the high register by the terrace ratio. Every target is
/// clamped to `[floor_hz, ceiling_hz]` and the updated register takes the
/// clamped value.
pub fn realize_pitch(labels: &[PhoneticTone], params: &TerracingParams) -> Result<PitchTargetSequence> {
    params.validate()?;
    if let Some(first) = labels.first() {
        if !first.is_initial() {
            return Err(Error::Labels(format!(
                "sequence must start with hc or lc, found {}",
                first.as_str()
            )));
        }
    }
    if let Some(i) = labels.iter().skip(1).position(|l| l.is_initial()) {
        return Err(Error::Labels(format!(
            "initial tone {} at position {} (only allowed first)",
            labels[i + 1].as_str(),
            i + 1
        )));
    }
    let clamp = |p: f64| p.clamp(params.floor_hz, params.ceiling_hz);
    let mut high = params.p_h0;
    let mut low = params.p_l0;
    let mut out = Vec::with_capacity(labels.len());
    for &label in labels {
        let p = match label {
            PhoneticTone::HighInitial => {
                high = clamp(params.p_h0);
                high
            }
            PhoneticTone::LowInitial => {
                low = clamp(params.p_l0);
                low
            }
            PhoneticTone::Upsweep => {
                high = clamp(high * params.k_usw);
                high
            }
            PhoneticTone::Downdrift => {
                low = clamp(low * params.k_dd);
                low
            }
            PhoneticTone::Downstep => {
                low = clamp(high * params.k_dst);
                low
            }
            PhoneticTone::Upstep => {
                high = clamp(high * params.k_ter);
                high
            }
        };
        out.push(PitchTarget {
            label,
            target_hz: p,
        });
    }
    Ok(out)
}

/// Piecewise-constant F0 track with one segment per target at a 10 ms hop.
pub fn synthesize_contour(targets: &[PitchTarget], tone_dur_ms: f64) -> Result<F0Track> {
    const HOP_S: f64 = 0.01;
    if targets.is_empty() {
        return Err(param("no pitch targets"));
    }
    let per_tone = (tone_dur_ms / 1000.0 / HOP_S).round() as usize;
    if per_tone == 0 {
        return Err(param(format!("tone duration {tone_dur_ms} ms is shorter than one frame")));
    }
    let frames = targets
        .iter()
        .flat_map(|t| std::iter::repeat_n(t.target_hz, per_tone))
        .enumerate()
        .map(|(i, f0)| F0Frame {
            time_s: i as f64 * HOP_S,
            f0_hz: Some(f0),
        })
        .collect();
    F0Track::new(frames, HOP_S)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn labels(s: &str) -> Vec<PhoneticTone> {
        s.split_whitespace().map(|l| l.parse().unwrap()).collect()
    }

    #[test]
    fn trivial_machines() {
        let accept_empty = MultiTapeFsm::new(vec!["a".into()], "a", vec!["a".into()], 1, vec![]).unwrap();
        assert!(accept_empty.recognize::<&str>(&[], 0).unwrap());
        assert_eq!(accept_empty.enumerate_strings(0, 0), vec![Vec::<String>::new()]);

        let no_finals = MultiTapeFsm::new(
            vec!["a".into()],
            "a",
            vec![],
            1,
            vec![arc("a", "a", &["x"], None)],
        )
        .unwrap();
        assert!(!no_finals.recognize(&["x", "x"], 0).unwrap());
        assert!(no_finals.enumerate_strings(3, 0).is_empty());
    }

    #[test]
    fn construction_is_validated() {
        assert!(MultiTapeFsm::new(vec!["a".into()], "b", vec![], 1, vec![]).is_err());
        assert!(MultiTapeFsm::new(
            vec!["a".into()],
            "a",
            vec![],
            2,
            vec![arc("a", "a", &["x"], None)]
        )
        .is_err());
    }

    #[test]
    fn empty_labels_are_epsilon_moves() {
        let fsm = MultiTapeFsm::new(
            vec!["a".into(), "b".into(), "c".into()],
            "a",
            vec!["c".into()],
            2,
            vec![
                Transition { from: "a".into(), to: "b".into(), labels: vec![None, Some("y".into())], action: None },
                arc("b", "c", &["x", "z"], None),
            ],
        )
        .unwrap();
        assert!(fsm.recognize(&["x"], 0).unwrap());
        assert!(!fsm.recognize(&["y"], 1).unwrap());
        assert!(fsm.recognize(&["y", "z"], 1).unwrap());
    }

    #[test]
    fn unknown_symbol_is_alphabet_error() {
        let fsm = build_pierrehumbert();
        assert!(matches!(
            fsm.recognize(&["%H", "X*"], 0),
            Err(Error::Alphabet { .. })
        ));
    }

    #[test]
    fn pierrehumbert_examples() {
        let fsm = build_pierrehumbert();
        assert_eq!(fsm.alphabet(0).len(), 12);
        assert!(fsm.recognize(&syms("%H H* H- H%"), 0).unwrap());
        assert!(!fsm.recognize(&syms("%H H- H%"), 0).unwrap());
        assert!(fsm.recognize(&syms("%L L* L*+H L- H* H- L%"), 0).unwrap());
        assert!(fsm.recognize(&syms("%H H* L- L% %L L* H- H%"), 0).unwrap());
        assert!(!fsm.recognize(&syms("H* H- H%"), 0).unwrap());
        assert!(!fsm.recognize(&syms("%H H* H- L- H%"), 0).unwrap());
    }

    #[test]
    fn pierrehumbert_enumeration() {
        let fsm = build_pierrehumbert();
        assert!(fsm.enumerate_strings(3, 0).is_empty());
        let four = fsm.enumerate_strings(4, 0);
        // initial boundary × accent × phrase accent × final boundary
        assert_eq!(four.len(), 2 * 6 * 2 * 2);
        assert!(four.windows(2).all(|w| w[0] < w[1]));
        for s in &four {
            assert!(fsm.recognize(s, 0).unwrap());
        }
    }

    #[test]
    fn terracing_machine_shape() {
        let fsm = build_terracing();
        assert_eq!(fsm.tapes(), 3);
        assert!(fsm.recognize(&syms("H L H"), 0).unwrap());
        assert!(fsm.recognize(&syms("L"), 0).unwrap());
        assert!(!fsm.recognize::<&str>(&[], 0).unwrap());
        assert!(fsm.recognize(&syms("hc !l ^h"), 1).unwrap());
        assert!(!fsm.recognize(&syms("hc ^h"), 1).unwrap());
    }

    #[test]
    fn transduction_examples() {
        let out = |s: &str| -> String {
            transduce_tones(&s.parse().unwrap())
                .iter()
                .map(|t| t.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        assert_eq!(out("H L H L H"), "hc !l ^h !l ^h");
        assert_eq!(out("H H H"), "hc h h");
        assert_eq!(out("L L H"), "lc l ^h");
        assert_eq!(out(""), "");
        assert!("H X".parse::<ToneSequence>().is_err());
    }

    #[test]
    fn upsweep_recurrence() {
        let t = realize_pitch(&labels("hc h h"), &TerracingParams::default()).unwrap();
        let hz: Vec<f64> = t.iter().map(|p| p.target_hz).collect();
        assert!((hz[0] - 170.0).abs() < 1e-9);
        assert!((hz[1] - 173.4).abs() < 1e-9);
        assert!((hz[2] - 176.868).abs() < 1e-9);
    }

    #[test]
    fn terrace_descent() {
        let t = realize_pitch(&labels("hc !l ^h !l ^h"), &TerracingParams::default()).unwrap();
        let hz: Vec<f64> = t.iter().map(|p| p.target_hz).collect();
        let expected = [170.0, 119.0, 153.0, 107.1, 137.7];
        for (a, b) in hz.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{hz:?}");
        }
    }

    #[test]
    fn long_downdrift_respects_floor() {
        let mut l = vec![PhoneticTone::LowInitial];
        l.extend(std::iter::repeat_n(PhoneticTone::Downdrift, 200));
        let t = realize_pitch(&l, &TerracingParams::default()).unwrap();
        assert!(t.iter().all(|p| p.target_hz >= 60.0));
        assert_eq!(t.last().unwrap().target_hz, 60.0);
    }

    #[test]
    fn malformed_labels() {
        let p = TerracingParams::default();
        assert!(matches!(realize_pitch(&labels("h hc"), &p), Err(Error::Labels(_))));
        assert!(matches!(realize_pitch(&labels("hc lc"), &p), Err(Error::Labels(_))));
        assert!("x".parse::<PhoneticTone>().is_err());
        let bad = TerracingParams { k_usw: 0.9, ..p };
        assert!(realize_pitch(&labels("hc"), &bad).is_err());
    }

    #[test]
    fn contour_synthesis() {
        let t = realize_pitch(&labels("hc"), &TerracingParams::default()).unwrap();
        let track = synthesize_contour(&t, 150.0).unwrap();
        assert_eq!(track.frames().len(), 15);
        assert!(track.frames().iter().all(|f| f.f0_hz == Some(170.0)));

        let t = realize_pitch(&labels("hc !l ^h !l ^h"), &TerracingParams::default()).unwrap();
        let track = synthesize_contour(&t, 150.0).unwrap();
        assert_eq!(track.frames().len(), 5 * 15);
        assert!(synthesize_contour(&[], 150.0).is_err());
    }

    #[test]
    fn machine_json_round_trip() {
        let fsm = build_terracing();
        let json = serde_json::to_string(&fsm).unwrap();
        let back: MultiTapeFsm = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fsm);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["states", "start", "finals", "tapes", "transitions"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(serde_json::from_str::<MultiTapeFsm>(r#"{"states":["a"],"start":"b","finals":[],"tapes":1,"transitions":[]}"#).is_err());
    }
}
