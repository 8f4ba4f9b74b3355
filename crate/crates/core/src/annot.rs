//! Interval annotations: Praat TextGrid and flat CSV documents.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adjacent intervals may overlap by this much before it counts as an overlap.
pub const OVERLAP_TOLERANCE_S: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub label: String,
    pub start_s: f64,
    pub end_s: f64,
}

impl Interval {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tier {
    pub name: String,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationDoc {
    pub tiers: Vec<Tier>,
    pub source: String,
    /// Non-fatal notes, e.g. skipped point tiers.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl AnnotationDoc {
    pub fn tier(&self, name: &str) -> Option<&Tier> {
        self.tiers.iter().find(|t| t.name == name)
    }

    /// Serialize as annotation CSV (`tier,label,start_s,end_s`).
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["tier", "label", "start_s", "end_s"])
            .expect("in-memory write");
        for tier in &self.tiers {
            for iv in &tier.intervals {
                w.write_record([
                    tier.name.as_str(),
                    iv.label.as_str(),
                    &iv.start_s.to_string(),
                    &iv.end_s.to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationSequence {
    pub items: Vec<(String, f64)>,
}

impl DurationSequence {
    pub fn new(items: Vec<(String, f64)>) -> Result<Self> {
        if let Some((label, d)) = items.iter().find(|(_, d)| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Parameter(format!(
                "duration of `{label}` must be positive, got {d}"
            )));
        }
        Ok(Self { items })
    }

    pub fn values(&self) -> Vec<f64> {
        self.items.iter().map(|(_, d)| *d).collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Labels treated as pauses by [`durations`] unless overridden.
pub fn default_pause_labels() -> BTreeSet<String> {
    ["", "sil", "#", "<p>"].iter().map(|s| s.to_string()).collect()
}

/// `(label, duration)` for each interval whose (trimmed) label is not excluded.
pub fn durations(tier: &Tier, exclude_labels: &BTreeSet<String>) -> DurationSequence {
    DurationSequence {
        items: tier
            .intervals
            .iter()
            .filter(|iv| !exclude_labels.contains(iv.label.trim()))
            .map(|iv| (iv.label.clone(), iv.duration_s()))
            .collect(),
    }
}

/// Sort check plus end > start and overlap validation. `lines` addresses each
/// interval for error messages.
fn validate_tier(name: &str, intervals: &[Interval], lines: &[usize], what: &str) -> Result<()> {
    for (i, iv) in intervals.iter().enumerate() {
        if !(iv.start_s.is_finite() && iv.end_s.is_finite() && iv.start_s >= 0.0) {
            return Err(Error::Syntax {
                line: lines[i],
                message: format!("tier `{name}`: {what} times must be finite and non-negative"),
            });
        }
        if !(iv.end_s > iv.start_s) {
            return Err(Error::Syntax {
                line: lines[i],
                message: format!(
                    "tier `{name}`: interval `{}` ends ({}) at or before its start ({})",
                    iv.label, iv.end_s, iv.start_s
                ),
            });
        }
    }
    for i in 1..intervals.len() {
        let (prev, cur) = (&intervals[i - 1], &intervals[i]);
        if prev.end_s > cur.start_s + OVERLAP_TOLERANCE_S {
            return Err(Error::Syntax {
                line: lines[i],
                message: format!(
                    "tier `{name}`: {what} at line {} ({}-{}) overlaps {what} at line {} ({}-{})",
                    lines[i - 1],
                    prev.start_s,
                    prev.end_s,
                    lines[i],
                    cur.start_s,
                    cur.end_s
                ),
            });
        }
    }
    Ok(())
}

// --- TextGrid --------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Str(String),
    Flag(bool),
}

#[derive(Debug)]
struct Token {
    value: Value,
    line: usize,
}

/// Reduce a TextGrid to its stream of values.
///
/// Long and short text forms carry the same values in the same order; the long
/// form only adds `key =` labels and `item [n]:` headers, which are bare words
/// that are neither numbers nor flags and are therefore dropped.
fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while let Some(&c) = chars.peek() {
        if c == '\n' {
            line += 1;
            chars.next();
        } else if c.is_whitespace() {
            chars.next();
        } else if c == '!' {
            // comment to end of line
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
        } else if c == '"' {
            let start_line = line;
            chars.next();
            let mut s = String::new();
            loop {
                match chars.next() {
                    Some('"') => {
                        if chars.peek() == Some(&'"') {
                            chars.next();
                            s.push('"');
                        } else {
                            break;
                        }
                    }
                    Some(ch) => {
                        if ch == '\n' {
                            line += 1;
                        }
                        s.push(ch);
                    }
                    None => {
                        return Err(Error::Syntax {
                            line: start_line,
                            message: "unterminated string".into(),
                        })
                    }
                }
            }
            tokens.push(Token {
                value: Value::Str(s),
                line: start_line,
            });
        } else {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '"' {
                    break;
                }
                word.push(c);
                chars.next();
            }
            let value = match word.as_str() {
                "<exists>" => Some(Value::Flag(true)),
                "<absent>" => Some(Value::Flag(false)),
                w => w.parse::<f64>().ok().map(Value::Num),
            };
            if let Some(value) = value {
                tokens.push(Token { value, line });
            }
        }
    }
    Ok(tokens)
}

struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    last_line: usize,
}

impl Cursor {
    fn next(&mut self, what: &str) -> Result<&Token> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                self.last_line = t.line;
                Ok(t)
            }
            None => Err(Error::Syntax {
                line: self.last_line,
                message: format!("unexpected end of document, expected {what}"),
            }),
        }
    }

    fn num(&mut self, what: &str) -> Result<(f64, usize)> {
        let t = self.next(what)?;
        match t.value {
            Value::Num(v) => Ok((v, t.line)),
            ref other => Err(Error::Syntax {
                line: t.line,
                message: format!("expected {what} (number), found {other:?}"),
            }),
        }
    }

    fn count(&mut self, what: &str) -> Result<(usize, usize)> {
        let (v, line) = self.num(what)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::Syntax {
                line,
                message: format!("{what} must be a non-negative integer, found {v}"),
            });
        }
        Ok((v as usize, line))
    }

    fn string(&mut self, what: &str) -> Result<(String, usize)> {
        let t = self.next(what)?;
        match &t.value {
            Value::Str(s) => Ok((s.clone(), t.line)),
            other => Err(Error::Syntax {
                line: t.line,
                message: format!("expected {what} (string), found {other:?}"),
            }),
        }
    }
}

/// Parse a TextGrid in long or short text form.
///
/// Interval tiers are kept; point (`TextTier`) tiers are skipped with a warning.
pub fn parse_textgrid(text: &str) -> Result<AnnotationDoc> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut cur = Cursor {
        tokens: tokenize(text)?,
        pos: 0,
        last_line: 1,
    };
    let (file_type, line) = cur.string("file type")?;
    if file_type != "ooTextFile" {
        return Err(Error::Syntax {
            line,
            message: format!("file type `{file_type}` is not ooTextFile"),
        });
    }
    let (class, line) = cur.string("object class")?;
    if class != "TextGrid" {
        return Err(Error::Syntax {
            line,
            message: format!("object class `{class}` is not TextGrid"),
        });
    }
    cur.num("xmin")?;
    cur.num("xmax")?;

    let mut doc = AnnotationDoc {
        tiers: Vec::new(),
        source: "TextGrid".into(),
        warnings: Vec::new(),
    };
    let exists = match cur.tokens.get(cur.pos).map(|t| &t.value) {
        Some(Value::Flag(b)) => {
            let b = *b;
            cur.pos += 1;
            b
        }
        None => return Ok(doc),
        Some(_) => true,
    };
    if !exists {
        return Ok(doc);
    }
    let (n_tiers, _) = cur.count("tier count")?;
    let mut names: HashMap<String, usize> = HashMap::new();
    for _ in 0..n_tiers {
        let (class, class_line) = cur.string("tier class")?;
        let (name, _) = cur.string("tier name")?;
        cur.num("tier xmin")?;
        cur.num("tier xmax")?;
        let (count, _) = cur.count("item count")?;
        match class.as_str() {
            "IntervalTier" => {
                let mut intervals = Vec::with_capacity(count);
                let mut lines = Vec::with_capacity(count);
                for _ in 0..count {
                    let (start_s, line) = cur.num("interval xmin")?;
                    let (end_s, _) = cur.num("interval xmax")?;
                    let (label, _) = cur.string("interval text")?;
                    intervals.push(Interval {
                        label,
                        start_s,
                        end_s,
                    });
                    lines.push(line);
                }
                validate_tier(&name, &intervals, &lines, "interval")?;
                if let Some(prev) = names.insert(name.clone(), class_line) {
                    return Err(Error::Syntax {
                        line: class_line,
                        message: format!("duplicate tier name `{name}` (first at line {prev})"),
                    });
                }
                doc.tiers.push(Tier { name, intervals });
            }
            "TextTier" => {
                for _ in 0..count {
                    cur.num("point time")?;
                    cur.string("point mark")?;
                }
                doc.warnings
                    .push(format!("point tier `{name}` (line {class_line}) skipped"));
            }
            other => {
                return Err(Error::Syntax {
                    line: class_line,
                    message: format!("unknown tier class `{other}`"),
                })
            }
        }
    }
    Ok(doc)
}

/// Decode raw TextGrid bytes (UTF-8, or UTF-16 with a byte-order mark) and parse.
pub fn parse_textgrid_bytes(bytes: &[u8]) -> Result<AnnotationDoc> {
    let text = decode_text(bytes)?;
    parse_textgrid(&text)
}

fn decode_text(bytes: &[u8]) -> Result<String> {
    let utf16 = |le: bool| -> Result<String> {
        let body = &bytes[2..];
        if !body.len().is_multiple_of(2) {
            return Err(Error::Parse {
                offset: bytes.len() - 1,
                message: "odd byte count in UTF-16 text".into(),
            });
        }
        let units: Vec<u16> = body
            .chunks_exact(2)
            .map(|c| if le { u16::from_le_bytes([c[0], c[1]]) } else { u16::from_be_bytes([c[0], c[1]]) })
            .collect();
        String::from_utf16(&units).map_err(|e| Error::Parse {
            offset: 2,
            message: format!("invalid UTF-16: {e}"),
        })
    };
    match bytes {
        [0xFF, 0xFE, ..] => utf16(true),
        [0xFE, 0xFF, ..] => utf16(false),
        _ => {
            let body = bytes.strip_prefix(&[0xEF, 0xBB, 0xBF]).unwrap_or(bytes);
            std::str::from_utf8(body)
                .map(str::to_string)
                .map_err(|e| Error::Parse {
                    offset: e.valid_up_to(),
                    message: "invalid UTF-8".into(),
                })
        }
    }
}

// --- CSV -------------------------------------------------------------------

/// Parse annotation CSV with header `tier,label,start_s,end_s`.
///
/// Rows are grouped by tier in order of first appearance and sorted by start
/// time. Errors address rows by their line in the document (header = line 1).
pub fn parse_csv_annotation(text: &str) -> Result<AnnotationDoc> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Syntax {
        line: 1,
        message: e.to_string(),
    })?;
    let expected = ["tier", "label", "start_s", "end_s"];
    if header.len() != 4 || header.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(Error::Syntax {
            line: 1,
            message: format!("expected header `tier,label,start_s,end_s`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(Interval, usize)>> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Syntax {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let time = |i: usize, what: &str| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|_| Error::Syntax {
                line,
                message: format!("{what} `{}` is not a number", &rec[i]),
            })
        };
        let start_s = time(2, "start_s")?;
        let end_s = time(3, "end_s")?;
        if !(end_s > start_s) {
            return Err(Error::Syntax {
                line,
                message: format!("end_s {end_s} is not after start_s {start_s}"),
            });
        }
        let tier = rec[0].to_string();
        if !rows.contains_key(&tier) {
            order.push(tier.clone());
        }
        rows.entry(tier).or_default().push((
            Interval {
                label: rec[1].to_string(),
                start_s,
                end_s,
            },
            line,
        ));
    }

    let mut tiers = Vec::with_capacity(order.len());
    for name in order {
        let mut items = rows.remove(&name).unwrap_or_default();
        items.sort_by(|a, b| a.0.start_s.partial_cmp(&b.0.start_s).unwrap().then(a.1.cmp(&b.1)));
        let (intervals, lines): (Vec<Interval>, Vec<usize>) = items.into_iter().unzip();
        validate_tier(&name, &intervals, &lines, "row")?;
        tiers.push(Tier { name, intervals });
    }
    Ok(AnnotationDoc {
        tiers,
        source: "csv".into(),
        warnings: Vec::new(),
    })
}

/// Parse a plain `label,value` table into labelled values in file order.
pub fn parse_value_csv(text: &str) -> Result<Vec<(String, f64)>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Syntax {
        line: 1,
        message: e.to_string(),
    })?;
    if header.len() != 2 || header[0].trim() != "label" || header[1].trim() != "value" {
        return Err(Error::Syntax {
            line: 1,
            message: "expected header `label,value`".into(),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Syntax {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let value = rec[1]
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Syntax {
                line,
                message: format!("value `{}` is not a finite number", &rec[1]),
            })?;
        out.push((rec[0].to_string(), value));
    }
    Ok(out)
}
