use std::fmt::Write as _;

use serde_json::Value;

use crate::env::Observation;

/// `pink_action` value that starts a new episode.
pub const RESET: i64 = -1;
/// `pink_action` value that starts a new episode with the starts exchanged.
pub const SWAP_RESET: i64 = -2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Request {
    Reset { swap_starts: bool },
    Step { pink: i64, green: i64 },
}

/// Parses one request line (without its newline).
pub fn parse_request(line: &str) -> Result<Request, String> {
    let value: Value = serde_json::from_str(line).map_err(|_| "malformed JSON".to_string())?;
    let obj = value.as_object().ok_or("message must be a JSON object")?;
    let field = |name: &str| -> Result<Option<i64>, String> {
        match obj.get(name) {
            None => Ok(None),
            Some(v) => v.as_i64().map(Some).ok_or_else(|| format!("{name} must be an integer")),
        }
    };
    let pink = field("pink_action")?.ok_or("missing pink_action")?;
    let green = field("green_action")?;
    match pink {
        RESET => Ok(Request::Reset { swap_starts: false }),
        SWAP_RESET => Ok(Request::Reset { swap_starts: true }),
        _ => Ok(Request::Step {
            pink,
            green: green.ok_or("missing green_action")?,
        }),
    }
}

/// Canonical request line, as written in the golden transcripts.
pub fn format_request(pink_action: i64, green_action: i64) -> String {
    format!("{{\"pink_action\":{pink_action},\"green_action\":{green_action}}}")
}

/// A reward with at most six fractional digits and at least one.
pub fn format_reward(r: f64) -> String {
    let mut s = format!("{r:.6}");
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    if s == "-0.0" {
        s = "0.0".into();
    }
    s
}

/// One step reply, without the trailing newline.
pub fn format_step_reply(obs_pink: &Observation, obs_green: &Observation, reward_pink: &str, reward_green: &str, done: bool) -> String {
    let mut out = String::with_capacity(1024);
    out.push_str("{\"pink_obs\":");
    push_obs(&mut out, obs_pink);
    out.push_str(",\"green_obs\":");
    push_obs(&mut out, obs_green);
    let _ = write!(out, ",\"pink_reward\":{reward_pink},\"green_reward\":{reward_green},\"done\":{done}}}");
    out
}

pub fn format_error(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn push_obs(out: &mut String, obs: &Observation) {
    out.push('[');
    for (i, v) in obs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if v.fract() == 0.0 {
            let _ = write!(out, "{}", *v as i64);
        } else {
            let _ = write!(out, "{v}");
        }
    }
    out.push(']');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_formatting() {
        assert_eq!(format_reward(0.0), "0.0");
        assert_eq!(format_reward(-0.0), "0.0");
        assert_eq!(format_reward(0.1), "0.1");
        assert_eq!(format_reward(0.1 + 0.2), "0.3");
        assert_eq!(format_reward(-1.1), "-1.1");
        assert_eq!(format_reward(1.0), "1.0");
        assert_eq!(format_reward(12.345678), "12.345678");
        assert_eq!(format_reward(0.0000004), "0.0");
        assert_eq!(format_reward(-0.0000004), "0.0");
    }

    #[test]
    fn request_parsing() {
        assert_eq!(parse_request(r#"{"pink_action": -1, "green_action": 0}"#), Ok(Request::Reset { swap_starts: false }));
        assert_eq!(parse_request(r#"{"pink_action": -2}"#), Ok(Request::Reset { swap_starts: true }));
        assert_eq!(parse_request(&format_request(3, 4)), Ok(Request::Step { pink: 3, green: 4 }));
        assert!(parse_request("{").is_err());
        assert!(parse_request("[1,2]").is_err());
        assert!(parse_request(r#"{"pink_action": 1}"#).is_err());
        assert!(parse_request(r#"{"pink_action": 1.5, "green_action": 0}"#).is_err());
        assert!(parse_request(r#"{"green_action": 0}"#).is_err());
    }

    #[test]
    fn error_is_escaped_json() {
        let e = format_error("bad \"quote\"");
        let v: Value = serde_json::from_str(&e).unwrap();
        assert_eq!(v["error"], "bad \"quote\"");
    }
}
