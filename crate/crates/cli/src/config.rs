//! Subcommand arguments. Every field is optional so that a flag, a config-file
//! value and a built-in default can be layered in that order.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::parse::ListArg;
use crate::CliError;

macro_rules! layer {
    ($flags:expr, $file:expr; $($field:ident),+ $(,)?) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field.clone(); } )+
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Boundary matrix to generator.
    Log,
    /// Generator to boundary matrix.
    Exp,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConvertArgs {
    /// `identity`, `diag:<alpha>`, `electrostatic:<eta>` or `phi,alpha,beta,gamma,delta`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Shorthand for `--lambda identity`.
    #[arg(long)]
    #[serde(skip)]
    pub lambda_identity: bool,
    /// Phase for `identity`, `diag:` and `electrostatic:` matrices.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Generator as `re_a,b,c` or `re_a,im_a,b,c`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
    /// Branch indices `n`, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub branch: Option<ListArg>,
    /// Root of the cosine equation (0 or 1).
    #[arg(long)]
    pub root: Option<u8>,
    /// `nu = m pi` family index for multiples of the identity.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<i64>,
    /// Free parameter of the `m != 0` family.
    #[arg(long, allow_hyphen_values = true)]
    pub family_param: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EtaArgs {
    /// `indicator`, `gaussian`, `two-triangle` or `table:<csv path>`.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Values of nu: reals, `pi`, or imaginary values such as `i`, `0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<ListArg>,
    #[arg(long)]
    pub n_grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpectrumArgs {
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Number of `+-` eigenvalue pairs.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub n_grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConvergeArgs {
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Generator as `re_a,b,c` or `re_a,im_a,b,c`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "phase")]
    pub a: Option<String>,
    /// Phase generator `i phi I`.
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    /// Spectral parameter as `re,im` or a complex literal.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Strictly decreasing list of eps.
    #[arg(long)]
    pub eps: Option<ListArg>,
    /// Half-width of the box; `10 / |Im z|` by default.
    #[arg(long)]
    pub box_l: Option<f64>,
    #[arg(long)]
    pub n_box: Option<usize>,
    #[arg(long)]
    pub n_grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RenormArgs {
    #[arg(long, allow_hyphen_values = true, conflicts_with = "phase")]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    /// Scalings t of the potential.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<ListArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert between a boundary matrix and its generators.
    Convert(ConvertArgs),
    /// Tabulate the coupling factor eta against its closed form.
    Eta(EtaArgs),
    /// Largest eigenvalues of the discretized sign kernel.
    Spectrum(SpectrumArgs),
    /// Distance between the regularized and the point-interaction resolvents.
    Converge(ConvergeArgs),
    /// Renormalized coupling matrix and its scaling law.
    Renorm(RenormArgs),
}

/// Config file layout: optional `output` and `seed`, plus one section per subcommand.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub convert: ConvertArgs,
    pub eta: EtaArgs,
    pub spectrum: SpectrumArgs,
    pub converge: ConvergeArgs,
    pub renorm: RenormArgs,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!(
                "field `config`: cannot read {}: {e}",
                path.display()
            ))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("field `config`: {e}")))
    }
}

impl Command {
    /// Fills every flag left unset from the matching config-file section.
    pub fn merged(self, file: &FileConfig) -> Self {
        match self {
            Command::Convert(mut a) => {
                let f = &file.convert;
                layer!(a, f; lambda, phi, a, direction, branch, root, m, family_param);
                Command::Convert(a)
            }
            Command::Eta(mut a) => {
                let f = &file.eta;
                layer!(a, f; profile, center, width, cutoff, nu, n_grid);
                Command::Eta(a)
            }
            Command::Spectrum(mut a) => {
                let f = &file.spectrum;
                layer!(a, f; profile, center, width, cutoff, pairs, n_grid);
                Command::Spectrum(a)
            }
            Command::Converge(mut a) => {
                let f = &file.converge;
                // a generator given on the command line hides one from the file
                if a.a.is_none() && a.phase.is_none() {
                    layer!(a, f; a, phase);
                }
                layer!(a, f; profile, center, width, cutoff, z, eps, box_l, n_box, n_grid);
                Command::Converge(a)
            }
            Command::Renorm(mut a) => {
                let f = &file.renorm;
                if a.a.is_none() && a.phase.is_none() {
                    layer!(a, f; a, phase);
                }
                layer!(a, f; t);
                Command::Renorm(a)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file: FileConfig = serde_json::from_str(
            r#"{"eta": {"nu": [0.5, 1], "n-grid": 64, "profile": "gaussian"}}"#,
        )
        .unwrap();
        let cmd = Command::Eta(EtaArgs {
            n_grid: Some(128),
            ..EtaArgs::default()
        });
        let Command::Eta(a) = cmd.merged(&file) else {
            unreachable!()
        };
        assert_eq!(a.n_grid, Some(128));
        assert_eq!(a.profile.as_deref(), Some("gaussian"));
        assert_eq!(a.nu.unwrap().items().len(), 2);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"eta": {"grid": 3}}"#).is_err());
        assert!(serde_json::from_str::<FileConfig>(r#"{"colour": 1}"#).is_err());
    }
}
