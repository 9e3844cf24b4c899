//! Flat `key = value` configuration files plus command-line overrides.
//!
//! Every key has a documented default; `--config` is applied first and the
//! remaining flags override it regardless of their position on the command
//! line.

use minweier_core::{Complex64, Rect};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Obj,
    Ply,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub expr: Option<String>,
    pub z0: Option<(f64, f64)>,
    pub domain: Rect,
    pub grid: (usize, usize),
    pub quad_tol: f64,
    pub mu_floor: f64,
    pub reg_floor: f64,
    pub nu_floor: f64,
    pub fd_step: Option<f64>,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub gauss_csv: Option<PathBuf>,
    pub base: (usize, usize),
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            expr: None,
            z0: None,
            domain: Rect::new(0.1, 1.1, 0.1, 1.1),
            grid: (33, 33),
            quad_tol: 1e-10,
            mu_floor: 1e-12,
            reg_floor: 1e-12,
            nu_floor: 1e-12,
            fd_step: None,
            out: PathBuf::from("out"),
            formats: vec![Format::Obj, Format::Ply],
            gauss_csv: None,
            base: (0, 0),
        }
    }
}

impl Settings {
    /// Base point: explicit or the domain center.
    pub fn z0_point(&self) -> Complex64 {
        match self.z0 {
            Some((x, y)) => Complex64::new(x, y),
            None => self.domain.center(),
        }
    }

    /// Stencil step: explicit, or scaled to the domain and clamped.
    pub fn fd_step_value(&self) -> f64 {
        self.fd_step
            .unwrap_or_else(|| (1e-4 * self.domain.diagonal()).clamp(1e-6, 1e-2))
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "expr" => self.expr = Some(value.to_string()),
            "z0" => self.z0 = Some(parse_pair(key, value)?),
            "domain" => self.domain = parse_domain(value)?,
            "grid" => self.grid = parse_grid(value)?,
            "quad_tol" => self.quad_tol = parse_float(key, value)?,
            "mu_floor" => self.mu_floor = parse_float(key, value)?,
            "reg_floor" => self.reg_floor = parse_float(key, value)?,
            "nu_floor" => self.nu_floor = parse_float(key, value)?,
            "fd_step" => self.fd_step = Some(parse_float(key, value)?),
            "out" => self.out = PathBuf::from(value),
            "formats" => self.formats = parse_formats(value)?,
            "gauss_csv" => self.gauss_csv = Some(PathBuf::from(value)),
            "base" => {
                let (i, j) = parse_pair(key, value)?;
                if i.fract() != 0.0 || j.fract() != 0.0 || i < 0.0 || j < 0.0 {
                    return Err(format!("base: expected nonnegative integers, got '{value}'"));
                }
                self.base = (i as usize, j as usize);
            }
            other => return Err(format!("unknown config key: {other}")),
        }
        Ok(())
    }

    pub fn apply_config_text(&mut self, text: &str, path: &str) -> Result<(), String> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("{path}:{}: expected 'key = value'", idx + 1));
            };
            self.apply(key.trim(), value.trim())
                .map_err(|e| format!("{path}:{}: {e}", idx + 1))?;
        }
        Ok(())
    }
}

fn parse_float(key: &str, value: &str) -> Result<f64, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: expected a number, got '{value}'"))
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("{key}: expected 'a,b', got '{value}'"));
    }
    Ok((parse_float(key, parts[0])?, parse_float(key, parts[1])?))
}

fn parse_domain(value: &str) -> Result<Rect, String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!(
            "domain: expected 'xmin,xmax,ymin,ymax', got '{value}'"
        ));
    }
    let mut v = [0.0f64; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = parse_float("domain", part)?;
    }
    Ok(Rect::new(v[0], v[1], v[2], v[3]))
}

fn parse_grid(value: &str) -> Result<(usize, usize), String> {
    let lower = value.to_ascii_lowercase();
    let parts: Vec<&str> = lower.split('x').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("grid: expected 'NxM', got '{value}'"));
    }
    let n = parts[0]
        .parse()
        .map_err(|_| format!("grid: expected 'NxM', got '{value}'"))?;
    let m = parts[1]
        .parse()
        .map_err(|_| format!("grid: expected 'NxM', got '{value}'"))?;
    Ok((n, m))
}

fn parse_formats(value: &str) -> Result<Vec<Format>, String> {
    let mut formats = Vec::new();
    for part in value.split(',').map(str::trim) {
        match part {
            "obj" => formats.push(Format::Obj),
            "ply" => formats.push(Format::Ply),
            other => return Err(format!("formats: unknown format '{other}'")),
        }
    }
    if formats.is_empty() {
        return Err("formats: at least one of obj, ply".into());
    }
    Ok(formats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_round_trip() {
        let mut s = Settings::default();
        s.apply_config_text(
            "# demo\nexpr = z\n domain = 0.1, 1.1, 0.2, 0.9 # inline comment\ngrid = 5x7\nz0 = 0.3,0.4\n",
            "demo.cfg",
        )
        .unwrap();
        assert_eq!(s.expr.as_deref(), Some("z"));
        assert_eq!(s.domain, Rect::new(0.1, 1.1, 0.2, 0.9));
        assert_eq!(s.grid, (5, 7));
        assert_eq!(s.z0, Some((0.3, 0.4)));
    }

    #[test]
    fn unknown_key_is_an_error_naming_it() {
        let mut s = Settings::default();
        let err = s.apply_config_text("exprr = z\n", "demo.cfg").unwrap_err();
        assert!(err.contains("demo.cfg:1"));
        assert!(err.contains("exprr"));
    }

    #[test]
    fn defaults_are_documented_values() {
        let s = Settings::default();
        assert_eq!(s.grid, (33, 33));
        assert_eq!(s.quad_tol, 1e-10);
        assert_eq!(s.mu_floor, 1e-12);
        assert_eq!(s.reg_floor, 1e-12);
        let center = s.z0_point();
        assert!((center.re - 0.6).abs() < 1e-12 && (center.im - 0.6).abs() < 1e-12);
        let h = s.fd_step_value();
        assert!((1e-6..=1e-2).contains(&h));
    }

    #[test]
    fn grid_parser_accepts_upper_case_separator() {
        assert_eq!(parse_grid("65X65").unwrap(), (65, 65));
        assert!(parse_grid("65").is_err());
    }
}
