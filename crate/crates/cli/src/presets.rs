use crate::spec::ExperimentSpec;
use crate::CliError;

pub const PRESET_NAMES: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig3" => include_str!("../presets/fig3.toml"),
        "fig4" => include_str!("../presets/fig4.toml"),
        "fig5" => include_str!("../presets/fig5.toml"),
        "fig6" => include_str!("../presets/fig6.toml"),
        "fig7" => include_str!("../presets/fig7.toml"),
        "fig8" => include_str!("../presets/fig8.toml"),
        _ => return None,
    })
}

/// Text and parsed form of a shipped preset.
pub fn preset(name: &str) -> Result<(&'static str, ExperimentSpec), CliError> {
    let text = source(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    Ok((text, ExperimentSpec::from_toml(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_validates() {
        for name in PRESET_NAMES {
            let (text, spec) = preset(name).unwrap();
            assert!(!text.is_empty());
            assert_eq!(spec.name, name);
            spec.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_preset() {
        let err = preset("fig99").unwrap_err();
        assert!(matches!(err, CliError::UnknownPreset(_)));
        assert_eq!(err.exit_code(), 1);
    }
}
