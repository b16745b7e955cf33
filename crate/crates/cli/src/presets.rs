//! Built-in configurations, selectable with `--preset`.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig2c", include_str!("../presets/fig2c.toml")),
    ("fig2d", include_str!("../presets/fig2d.toml")),
    ("fig2e", include_str!("../presets/fig2e.toml")),
    ("fig2f", include_str!("../presets/fig2f.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("indanol-meta", include_str!("../presets/indanol-meta.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    #[test]
    fn every_preset_resolves() {
        for (name, text) in PRESETS {
            let cfg = RunConfig::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            cfg.resolve().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(cfg.note.is_some(), "{name} lacks a note");
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("fig4").is_none());
        assert_eq!(names().count(), 8);
    }
}
