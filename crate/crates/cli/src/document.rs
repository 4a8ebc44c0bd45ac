//! On-disk documents. Every number is written as a decimal string (or `p/q`
//! when no terminating decimal exists); readers also accept JSON numbers.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::{Map, Value};
use voltsched_core::discrete::SpeedLadder;
use voltsched_core::{EnergyParams, Job, JobId, JobSet, Scalar, Schedule, Segment};

pub const JOBSET_SCHEMA: &str = "voltsched.jobset/1";
pub const SCHEDULE_SCHEMA: &str = "voltsched.schedule/1";
pub const SSCHEDULE_SCHEMA: &str = "voltsched.sschedule/1";

/// A rejected document, located as precisely as the input allows.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if !self.field.is_empty() {
            write!(f, "{}: ", self.field)?;
        }
        f.write_str(&self.message)
    }
}

impl ParseError {
    fn at(line: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError {
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    fn json(err: serde_json::Error) -> Self {
        let line = (err.line() > 0).then(|| err.line());
        // serde_json appends its own position; keep only the reason
        let text = err.to_string();
        let message = match text.rfind(" at line ") {
            Some(pos) => text[..pos].to_string(),
            None => text,
        };
        ParseError::at(line, "", message)
    }
}

/// A validated job set with optional energy exponent and speed ladder.
#[derive(Clone, Debug)]
pub struct JobSetDocument<T> {
    pub jobs: JobSet<T>,
    pub alpha: Option<EnergyParams>,
    pub speeds: Option<SpeedLadder<T>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJobSet<'a> {
    #[serde(borrow)]
    schema: &'a RawValue,
    #[serde(borrow)]
    jobs: Vec<&'a RawValue>,
    #[serde(default, borrow)]
    alpha: Option<&'a RawValue>,
    #[serde(default, borrow)]
    speeds: Option<Vec<&'a RawValue>>,
}

#[derive(Serialize)]
struct JobOut {
    id: JobId,
    arrival: String,
    deadline: String,
    workload: String,
}

#[derive(Serialize)]
struct JobSetOut<'a> {
    schema: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speeds: Option<Vec<String>>,
    jobs: Vec<JobOut>,
}

impl<T: Scalar> JobSetDocument<T> {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let raw: RawJobSet = serde_json::from_str(text).map_err(ParseError::json)?;
        let schema: String = serde_json::from_str(raw.schema.get()).unwrap_or_default();
        if schema != JOBSET_SCHEMA {
            return Err(ParseError::at(
                line_of(text, raw.schema.get()),
                "schema",
                format!("unsupported schema `{schema}` (expected `{JOBSET_SCHEMA}`)"),
            ));
        }

        let mut jobs = Vec::with_capacity(raw.jobs.len());
        for (i, entry) in raw.jobs.iter().enumerate() {
            let line = line_of(text, entry.get());
            let field = format!("jobs[{i}]");
            let object = object_of(entry, line, &field)?;
            check_keys(&object, &["id", "arrival", "deadline", "workload"], line, &field)?;
            let id = match object.get("id") {
                Some(Value::Number(n)) if n.as_u64().is_some() => n.as_u64().unwrap(),
                Some(_) => {
                    return Err(ParseError::at(
                        line,
                        format!("{field}.id"),
                        "expected a nonnegative integer",
                    ))
                }
                None => return Err(ParseError::at(line, format!("{field}.id"), "missing")),
            };
            let number = |name: &str| number_field(&object, name, line, &field);
            let job = Job {
                id,
                arrival: number("arrival")?,
                deadline: number("deadline")?,
                workload: number("workload")?,
            };
            job.validate()
                .map_err(|e| ParseError::at(line, field.clone(), e.to_string()))?;
            jobs.push(job);
        }
        let jobs = JobSet::new(jobs).map_err(|e| ParseError::at(None, "jobs", e.to_string()))?;

        let alpha = match raw.alpha {
            None => None,
            Some(value) => {
                let line = line_of(text, value.get());
                let alpha = parse_number::<f64>(value, line, "alpha")?;
                Some(EnergyParams::new(alpha).map_err(|e| ParseError::at(line, "alpha", e.to_string()))?)
            }
        };

        let speeds = match raw.speeds {
            None => None,
            Some(values) => {
                let line = values.first().and_then(|v| line_of(text, v.get()));
                let levels = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| parse_number::<T>(v, line_of(text, v.get()), &format!("speeds[{i}]")))
                    .collect::<Result<Vec<T>, _>>()?;
                Some(SpeedLadder::new(levels).map_err(|e| ParseError::at(line, "speeds", e.to_string()))?)
            }
        };

        Ok(JobSetDocument { jobs, alpha, speeds })
    }

    pub fn to_json(&self) -> String {
        let out = JobSetOut {
            schema: JOBSET_SCHEMA,
            alpha: self.alpha.map(|p| p.alpha().to_string()),
            speeds: self
                .speeds
                .as_ref()
                .map(|l| l.levels().iter().map(Scalar::render).collect()),
            jobs: self
                .jobs
                .iter()
                .map(|j| JobOut {
                    id: j.id,
                    arrival: j.arrival.render(),
                    deadline: j.deadline.render(),
                    workload: j.workload.render(),
                })
                .collect(),
        };
        pretty(&out)
    }
}

/// A schedule read back from a schedule document.
pub fn parse_schedule<T: Scalar>(text: &str) -> Result<Schedule<T>, ParseError> {
    #[derive(Deserialize)]
    struct RawSchedule<'a> {
        #[serde(borrow)]
        schema: &'a RawValue,
        #[serde(borrow)]
        segments: Vec<&'a RawValue>,
    }
    let raw: RawSchedule = serde_json::from_str(text).map_err(ParseError::json)?;
    let schema: String = serde_json::from_str(raw.schema.get()).unwrap_or_default();
    if schema != SCHEDULE_SCHEMA && schema != SSCHEDULE_SCHEMA {
        return Err(ParseError::at(
            line_of(text, raw.schema.get()),
            "schema",
            format!("unsupported schema `{schema}` (expected `{SCHEDULE_SCHEMA}`)"),
        ));
    }
    let mut segments = Vec::with_capacity(raw.segments.len());
    for (i, entry) in raw.segments.iter().enumerate() {
        let line = line_of(text, entry.get());
        let field = format!("segments[{i}]");
        let object = object_of(entry, line, &field)?;
        check_keys(&object, &["start", "end", "speed", "job"], line, &field)?;
        let job = match object.get("job") {
            None | Some(Value::Null) => None,
            Some(Value::Number(n)) if n.as_u64().is_some() => n.as_u64(),
            Some(_) => {
                return Err(ParseError::at(
                    line,
                    format!("{field}.job"),
                    "expected a job id or null",
                ))
            }
        };
        let number = |name: &str| number_field(&object, name, line, &field);
        segments.push(Segment {
            start: number("start")?,
            end: number("end")?,
            speed: number("speed")?,
            job,
        });
    }
    Ok(Schedule::new(segments))
}

#[derive(Serialize)]
pub struct SegmentOut {
    pub start: String,
    pub end: String,
    pub speed: String,
    pub job: Option<JobId>,
}

impl SegmentOut {
    pub fn from_segment<T: Scalar>(seg: &Segment<T>) -> Self {
        SegmentOut {
            start: seg.start.render(),
            end: seg.end.render(),
            speed: seg.speed.render(),
            job: seg.job,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn pretty<S: Serialize>(value: &S) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents always serialize");
    text.push('\n');
    text
}

// 1-based line of a slice borrowed from `text`
fn line_of(text: &str, part: &str) -> Option<usize> {
    let base = text.as_ptr() as usize;
    let at = part.as_ptr() as usize;
    (at >= base && at <= base + text.len()).then(|| text[..at - base].matches('\n').count() + 1)
}

fn object_of(raw: &RawValue, line: Option<usize>, field: &str) -> Result<Map<String, Value>, ParseError> {
    match serde_json::from_str(raw.get()) {
        Ok(Value::Object(map)) => Ok(map),
        _ => Err(ParseError::at(line, field, "expected an object")),
    }
}

fn check_keys(object: &Map<String, Value>, known: &[&str], line: Option<usize>, field: &str) -> Result<(), ParseError> {
    match object.keys().find(|k| !known.contains(&k.as_str())) {
        Some(key) => Err(ParseError::at(line, format!("{field}.{key}"), "unknown field")),
        None => Ok(()),
    }
}

fn number_field<T: Scalar>(
    object: &Map<String, Value>,
    name: &str,
    line: Option<usize>,
    field: &str,
) -> Result<T, ParseError> {
    let field = format!("{field}.{name}");
    match object.get(name) {
        Some(value) => number_value(value, line, &field),
        None => Err(ParseError::at(line, field, "missing")),
    }
}

fn parse_number<T: Scalar>(raw: &RawValue, line: Option<usize>, field: &str) -> Result<T, ParseError> {
    let value: Value = serde_json::from_str(raw.get()).map_err(|e| ParseError::at(line, field, e.to_string()))?;
    number_value(&value, line, field)
}

fn number_value<T: Scalar>(value: &Value, line: Option<usize>, field: &str) -> Result<T, ParseError> {
    let text = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(ParseError::at(line, field, "expected a number or a decimal string")),
    };
    T::parse_number(&text).ok_or_else(|| ParseError::at(line, field, format!("`{text}` is not a number")))
}
