use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use branchdyn::group::{
    cyclic_group, ggs_spec, grigorchuk_spec, symmetric_group, wreath_spec, GroupSpec,
    DEFAULT_ENUM_CAP, DEFAULT_STATE_CAP,
};
use branchdyn::invariants::{Ambient, DisplayBase};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "branchdyn", version, about = "Congruence quotients, section dynamics and f-invariants of self-similar groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Orders |G_n| of the congruence quotients and their successive indices.
    Orders(Common),
    /// r/s sequences, depth evidence, f-invariant and Hausdorff dimension.
    Invariants(Common),
    /// The f-invariant log|G_1| - r_D.
    F(Common),
    /// Finite-level Hausdorff dimensions and the closed-form limit.
    Hdim(Common),
    /// Markov property of the depth-k cone partition.
    Markov {
        #[command(flatten)]
        common: Common,
        /// Partition depth; defaults to the detected depth D.
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        sweep: VertexSweep,
        /// Check only this letter instead of every letter.
        #[arg(long)]
        letter: Option<u32>,
        /// `structural` compares stabilizer indices; `enumerate` compares the
        /// exact conditional laws over every past cell (guarded by --max-enum).
        #[arg(long, value_enum, default_value_t = MarkovMethod::Structural)]
        method: MarkovMethod,
    },
    /// Equal fibers of g -> g|_v^d (finite-level measure preservation).
    Measure {
        #[command(flatten)]
        common: Common,
        /// Section depth d.
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[command(flatten)]
        sweep: VertexSweep,
    },
    /// Extract the depth-D pattern set and count pattern-closed portraits.
    Patterns {
        #[command(flatten)]
        common: Common,
        /// Pattern depth; defaults to the detected depth D.
        #[arg(long)]
        depth: Option<usize>,
        /// Level whose quotient is enumerated to collect patterns; defaults to D.
        #[arg(long)]
        sample_level: Option<usize>,
    },
    /// Level bijections f_n : G_n -> H_n for D <= n <= --levels.
    Iso {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        other: OtherSpec,
        /// Depth D; defaults to the detected depth of the first group.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Haar-random elements of G_n for n = --levels.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkovMethod {
    Structural,
    Enumerate,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternGroup {
    Sym,
    Cyclic,
}

#[derive(Args, Debug, Clone)]
pub struct SpecSource {
    /// JSON spec file (generator table or preset object).
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// Preset name: ggs, grigorchuk or wreath.
    #[arg(long)]
    pub preset: Option<String>,
    /// Prime for the ggs preset.
    #[arg(long)]
    pub p: Option<u64>,
    /// Defining vector for the ggs preset, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<u64>>,
    /// Arity for the wreath preset.
    #[arg(long)]
    pub m: Option<usize>,
    /// Pattern group for the wreath preset.
    #[arg(long, value_enum, default_value_t = PatternGroup::Sym)]
    pub group: PatternGroup,
}

#[derive(Args, Debug, Clone)]
pub struct OtherSpec {
    /// JSON spec file of the second group.
    #[arg(long, conflicts_with = "with_preset")]
    pub with_spec: Option<PathBuf>,
    #[arg(long)]
    pub with_preset: Option<String>,
    #[arg(long)]
    pub with_p: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub with_alpha: Option<Vec<u64>>,
    #[arg(long)]
    pub with_m: Option<usize>,
    #[arg(long, value_enum, default_value_t = PatternGroup::Sym)]
    pub with_group: PatternGroup,
}

impl OtherSpec {
    pub fn source(&self) -> SpecSource {
        SpecSource {
            spec: self.with_spec.clone(),
            preset: self.with_preset.clone(),
            p: self.with_p,
            alpha: self.with_alpha.clone(),
            m: self.with_m,
            group: self.with_group,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct VertexSweep {
    /// A single vertex, letters separated by spaces or commas.
    #[arg(long, conflicts_with = "max_vertex_level")]
    pub vertex: Option<String>,
    /// Sweep every vertex of level <= this bound.
    #[arg(long, default_value_t = 1)]
    pub max_vertex_level: usize,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[command(flatten)]
    pub source: SpecSource,
    /// Level bound n_max.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Cap on enumerated group elements or orbit tuples.
    #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
    pub max_enum: u64,
    /// Cap on pattern-DP states.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub max_states: usize,
    /// Display base: natural, m (arity), p, or an integer >= 2.
    #[arg(long, default_value = "m")]
    pub base: String,
    #[arg(long, default_value = "full")]
    pub ambient: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl Common {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            bail!("--levels must be at least 1");
        }
        if self.max_enum == 0 || self.max_states == 0 {
            bail!("caps must be positive");
        }
        Ok(())
    }

    pub fn ambient(&self) -> Result<Ambient> {
        Ok(self.ambient.parse::<Ambient>()?)
    }

    pub fn display_base(&self, spec: &GroupSpec) -> Result<DisplayBase> {
        Ok(match self.base.trim() {
            "m" => DisplayBase::Base(spec.arity() as u64),
            "p" => match spec.ggs() {
                Some(g) => DisplayBase::Base(g.p),
                None => DisplayBase::Base(spec.arity() as u64),
            },
            other => other.parse::<DisplayBase>()?,
        })
    }
}

impl SpecSource {
    pub fn load(&self) -> Result<GroupSpec> {
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading spec file {}", path.display()))?;
            return GroupSpec::from_json_str(&text)
                .with_context(|| format!("in spec file {}", path.display()));
        }
        let Some(preset) = self.preset.as_deref() else {
            bail!("give a group with --spec FILE or --preset NAME");
        };
        let spec = match preset {
            "ggs" => {
                let p = self.p.context("--preset ggs needs --p")?;
                let alpha = self.alpha.as_deref().context("--preset ggs needs --alpha")?;
                ggs_spec(p, alpha)?
            }
            "grigorchuk" => grigorchuk_spec(),
            "wreath" => {
                let m = self.m.or(self.p.map(|p| p as usize)).context("--preset wreath needs --m")?;
                if m < 2 {
                    bail!("--m must be at least 2");
                }
                let group = match self.group {
                    PatternGroup::Sym if m > 8 => bail!("--group sym supports m <= 8"),
                    PatternGroup::Sym => symmetric_group(m),
                    PatternGroup::Cyclic => cyclic_group(m),
                };
                wreath_spec(m, &group)?
            }
            other => bail!("unknown preset `{other}` (ggs, grigorchuk, wreath)"),
        };
        Ok(spec)
    }
}
