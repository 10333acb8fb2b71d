use anyhow::{bail, Result};
use dynmap::{divisibility, families, gaussian, idempotent, schur, DynamicalFamily, HermitianOperator};

use crate::config::{RunConfig, WitnessSet};

pub struct PresetInfo {
    pub name: &'static str,
    pub commands: &'static str,
    pub description: &'static str,
}

const CHANNEL_COMMANDS: &str = "scan-p, scan-cp, intermediate";
const IDEMPOTENT_COMMANDS: &str = "idempotent, scan-p, scan-cp, intermediate";

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo { name: "unitary", commands: CHANNEL_COMMANDS, description: "conjugation by exp(-itH), random H; --n sets the dimension (default 2)" },
    PresetInfo { name: "generic-noncp", commands: CHANNEL_COMMANDS, description: "swap/Hadamard Kraus family with weight t; --n truncation (default 4)" },
    PresetInfo { name: "idempotent-cp", commands: IDEMPOTENT_COMMANDS, description: "idempotent combination with CP divisors (n = k = 2)" },
    PresetInfo { name: "idempotent-p-not-cp", commands: IDEMPOTENT_COMMANDS, description: "idempotent combination with positive, non-CP divisors (n = 2, k = 1)" },
    PresetInfo { name: "idempotent-not-p", commands: IDEMPOTENT_COMMANDS, description: "idempotent combination a = cos 2πt with non-positive divisors (n = k = 2)" },
    PresetInfo { name: "schur", commands: "schur, scan-p, scan-cp, intermediate", description: "tridiagonal Schur multiplier on [0, 1/2]; --n truncation (default 8)" },
    PresetInfo { name: "rank-collapse", commands: CHANNEL_COMMANDS, description: "depolarising mixture min(t, 1) on [0, 2]; --n dimension (default 2)" },
    PresetInfo { name: "resurrecting", commands: CHANNEL_COMMANDS, description: "depolarising mixture 1 - |1 - t| on [0, 2]; --n dimension (default 2)" },
    PresetInfo { name: "example-4.1", commands: "gaussian", description: "one mode from a two-mode dilation, first factor repaired to be symplectic" },
    PresetInfo { name: "example-4.1-printed", commands: "gaussian", description: "the two-mode dilation with the factors as printed; fails validation" },
    PresetInfo { name: "example-4.2", commands: "gaussian", description: "two modes from a three-mode dilation as printed; fails validation" },
    PresetInfo { name: "attenuator", commands: "gaussian", description: "loss semigroup, transmissivity exp(-t)" },
    PresetInfo { name: "amplifier", commands: "gaussian", description: "amplifier semigroup, gain exp(t)" },
];

pub fn list() -> String {
    let width = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    PRESETS
        .iter()
        .map(|p| format!("{:width$}  [{}]  {}\n", p.name, p.commands, p.description))
        .collect()
}

pub const SCHUR_DEFAULT_N: usize = 8;

/// Builds a channel family by preset name.
pub fn family(name: &str, cfg: &RunConfig) -> Result<DynamicalFamily> {
    let fam = match name {
        "unitary" => families::unitary_family(cfg.n.unwrap_or(2), cfg.seed)?,
        "generic-noncp" => families::generic_noncp_family(cfg.n.unwrap_or(4))?,
        "idempotent-cp" | "idempotent-p-not-cp" | "idempotent-not-p" => {
            idempotent::preset_sized(name, cfg.n, cfg.k)?.into_family()
        }
        "schur" => {
            let n = cfg.n.unwrap_or(SCHUR_DEFAULT_N);
            schur::schur_family(&schur::SchurFamilyConfig::new(n, (0.0, schur::T_MAX))?)?
        }
        "rank-collapse" => families::rank_collapse_family(cfg.n.unwrap_or(2))?,
        "resurrecting" => families::resurrecting_family(cfg.n.unwrap_or(2))?,
        other if gaussian::PRESETS.contains(&other) => {
            bail!("preset `{other}` is a Gaussian family; use the `gaussian` command")
        }
        other => bail!("unknown preset `{other}`; see --list-presets"),
    };
    Ok(fam)
}

fn structured(name: &str, fam: &DynamicalFamily, extended: bool) -> Result<Vec<HermitianOperator>> {
    let d = fam.dim();
    Ok(match (name, extended) {
        ("schur", false) => vec![schur::witness(d, d)?],
        ("schur", true) => vec![schur::cp_witness(d, d)?],
        ("generic-noncp", true) => vec![families::bell_difference_witness(d)?],
        _ => Vec::new(),
    })
}

/// Witnesses on `C^d` (or `C^d ⊗ C^d` when `extended`) for a preset.
pub fn witnesses(name: &str, fam: &DynamicalFamily, cfg: &RunConfig, extended: bool) -> Result<Vec<HermitianOperator>> {
    let library = || {
        if extended {
            divisibility::default_cp_witnesses(fam.dim(), cfg.seed)
        } else {
            divisibility::default_witnesses(fam.dim(), cfg.seed)
        }
    };
    let own = structured(name, fam, extended)?;
    Ok(match cfg.witnesses {
        WitnessSet::Structured if !own.is_empty() => own,
        WitnessSet::Structured | WitnessSet::Library => library(),
        WitnessSet::All => own.into_iter().chain(library()).collect(),
    })
}
