//! Line-oriented scene files.
//!
//! ```text
//! param <name> <decimal>
//! mirror <x1> <y1> <x2> <y2>
//! refract <x1> <y1> <x2> <y2> <eta>
//! absorb <x1> <y1> <x2> <y2>
//! source <x> <y> <angle_rad>
//! target <x> <y> <radius>
//! ```
//!
//! Tokens are whitespace-separated; `#` starts a comment. Any numeric token
//! except a `param` value may be a `$name` reference. Exactly one `source`
//! and one `target` are required. Parsing yields a [`SceneTemplate`], which
//! resolves to a concrete [`Scene`] once every referenced parameter has a
//! value; the sensitivity sweep re-resolves the template with one parameter
//! overridden per run.

use std::collections::BTreeSet;

use super::{OpticsError, Ray, Scene, Surface, SurfaceKind, Target, Vec2};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Lit(f64),
    Ref(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RawKind {
    Mirror,
    Refract,
    Absorb,
}

#[derive(Debug, Clone)]
struct RawSurface {
    kind: RawKind,
    coords: [Tok; 4],
    eta: Option<Tok>,
}

/// A parsed scene file with (possibly) unresolved `$name` references.
#[derive(Debug, Clone)]
pub struct SceneTemplate {
    params: Vec<(String, f64)>,
    surfaces: Vec<RawSurface>,
    source: (Tok, Tok, Tok),
    target: (Tok, Tok, Tok),
    referenced: BTreeSet<String>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> OpticsError {
    OpticsError::Parse { line, msg: msg.into() }
}

fn numeric_tok(line: usize, raw: &str, referenced: &mut BTreeSet<String>) -> Result<Tok, OpticsError> {
    if let Some(name) = raw.strip_prefix('$') {
        if name.is_empty() {
            return Err(parse_err(line, "empty parameter reference `$`"));
        }
        referenced.insert(name.to_string());
        return Ok(Tok::Ref(name.to_string()));
    }
    let v: f64 = raw
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse number from `{raw}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite literal `{raw}`")));
    }
    Ok(Tok::Lit(v))
}

impl SceneTemplate {
    pub fn parse(text: &str) -> Result<Self, OpticsError> {
        let mut params: Vec<(String, f64)> = Vec::new();
        let mut surfaces = Vec::new();
        let mut source: Option<(Tok, Tok, Tok)> = None;
        let mut target: Option<(Tok, Tok, Tok)> = None;
        let mut referenced = BTreeSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            let args = &tokens[1..];
            let expect = |n: usize| -> Result<(), OpticsError> {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(parse_err(
                        line,
                        format!("`{}` takes {n} arguments, got {}", tokens[0], args.len()),
                    ))
                }
            };
            match tokens[0] {
                "param" => {
                    expect(2)?;
                    let name = args[0].to_string();
                    if name.starts_with('$') || name.parse::<f64>().is_ok() {
                        return Err(parse_err(line, format!("bad parameter name `{name}`")));
                    }
                    if params.iter().any(|(n, _)| *n == name) {
                        return Err(parse_err(line, format!("duplicate parameter `{name}`")));
                    }
                    let value: f64 = args[1].parse().map_err(|_| {
                        parse_err(line, format!("cannot parse parameter value from `{}`", args[1]))
                    })?;
                    if !value.is_finite() {
                        return Err(parse_err(line, "parameter value must be finite"));
                    }
                    params.push((name, value));
                }
                "mirror" | "absorb" | "refract" => {
                    let kind = match tokens[0] {
                        "mirror" => RawKind::Mirror,
                        "absorb" => RawKind::Absorb,
                        _ => RawKind::Refract,
                    };
                    expect(if kind == RawKind::Refract { 5 } else { 4 })?;
                    let coords = [
                        numeric_tok(line, args[0], &mut referenced)?,
                        numeric_tok(line, args[1], &mut referenced)?,
                        numeric_tok(line, args[2], &mut referenced)?,
                        numeric_tok(line, args[3], &mut referenced)?,
                    ];
                    let eta = if kind == RawKind::Refract {
                        Some(numeric_tok(line, args[4], &mut referenced)?)
                    } else {
                        None
                    };
                    surfaces.push(RawSurface { kind, coords, eta });
                }
                "source" => {
                    expect(3)?;
                    if source.is_some() {
                        return Err(parse_err(line, "more than one `source`"));
                    }
                    source = Some((
                        numeric_tok(line, args[0], &mut referenced)?,
                        numeric_tok(line, args[1], &mut referenced)?,
                        numeric_tok(line, args[2], &mut referenced)?,
                    ));
                }
                "target" => {
                    expect(3)?;
                    if target.is_some() {
                        return Err(parse_err(line, "more than one `target`"));
                    }
                    target = Some((
                        numeric_tok(line, args[0], &mut referenced)?,
                        numeric_tok(line, args[1], &mut referenced)?,
                        numeric_tok(line, args[2], &mut referenced)?,
                    ));
                }
                other => {
                    return Err(parse_err(line, format!("unknown directive `{other}`")));
                }
            }
        }

        let source = source.ok_or_else(|| parse_err(text.lines().count().max(1), "missing `source`"))?;
        let target = target.ok_or_else(|| parse_err(text.lines().count().max(1), "missing `target`"))?;
        Ok(SceneTemplate { params, surfaces, source, target, referenced })
    }

    /// Is `name` declared by a `param` line or referenced as `$name`?
    pub fn knows_param(&self, name: &str) -> bool {
        self.params.iter().any(|(n, _)| n == name) || self.referenced.contains(name)
    }

    /// Declared parameter names in file order.
    pub fn param_names(&self) -> Vec<&str> {
        self.params.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Resolves with declared parameter values only.
    pub fn resolve(&self) -> Result<Scene, OpticsError> {
        self.resolve_overrides(&[])
    }

    /// Resolves with `name` overridden to `value`.
    pub fn resolve_with(&self, name: &str, value: f64) -> Result<Scene, OpticsError> {
        self.resolve_overrides(&[(name, value)])
    }

    fn resolve_overrides(&self, overrides: &[(&str, f64)]) -> Result<Scene, OpticsError> {
        let lookup = |tok: &Tok| -> Result<f64, OpticsError> {
            match tok {
                Tok::Lit(v) => Ok(*v),
                Tok::Ref(name) => {
                    if let Some((_, v)) = overrides.iter().find(|(n, _)| n == name) {
                        return Ok(*v);
                    }
                    self.params
                        .iter()
                        .find(|(n, _)| n == name)
                        .map(|(_, v)| *v)
                        .ok_or_else(|| OpticsError::UnresolvedParam(name.clone()))
                }
            }
        };

        let mut surfaces = Vec::with_capacity(self.surfaces.len());
        for raw in &self.surfaces {
            let a = Vec2::new(lookup(&raw.coords[0])?, lookup(&raw.coords[1])?);
            let b = Vec2::new(lookup(&raw.coords[2])?, lookup(&raw.coords[3])?);
            let kind = match raw.kind {
                RawKind::Mirror => SurfaceKind::Mirror,
                RawKind::Absorb => SurfaceKind::Absorb,
                RawKind::Refract => SurfaceKind::Refract {
                    eta: lookup(raw.eta.as_ref().expect("refract carries eta"))?,
                },
            };
            surfaces.push(Surface { kind, a, b });
        }
        let source = Ray::from_angle(
            Vec2::new(lookup(&self.source.0)?, lookup(&self.source.1)?),
            lookup(&self.source.2)?,
        )?;
        let target = Target {
            center: Vec2::new(lookup(&self.target.0)?, lookup(&self.target.1)?),
            radius: lookup(&self.target.2)?,
        };
        Scene::new(surfaces, source, target)
    }
}
