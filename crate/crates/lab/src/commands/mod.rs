mod kalton;
mod moduli;
mod norm;
mod tables;

use std::time::Instant;

use crate::error::LabResult;
use crate::options::{Command, Options};
use crate::report::{Meta, Output, Status};

/// Parameters shared by every command once defaults are applied.
pub struct Run {
    pub command: Command,
    pub opts: Options,
    pub seed: u64,
    pub deadline: Option<Instant>,
}

impl Run {
    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Provenance for the report; call after all defaults are filled in.
    pub fn meta(&self) -> Meta {
        Meta::new(self.command, self.seed, &self.opts)
    }
}

pub struct Finished {
    pub status: Status,
    pub summary: String,
    pub output: Output,
}

pub fn dispatch(command: Command, mut opts: Options) -> LabResult<Finished> {
    let seed = opts.seed();
    let deadline = opts.deadline(Instant::now())?;
    let mut run = Run {
        command,
        opts,
        seed,
        deadline,
    };
    match command {
        Command::Norm => norm::norm(&mut run),
        Command::Interp => norm::interp(&mut run),
        Command::Lemma32 => tables::lemma32(&mut run),
        Command::Obstruction => tables::obstruction(&mut run),
        Command::Prop31 => tables::prop31(&mut run),
        Command::Kalton => kalton::kalton(&mut run),
        Command::SphereGlue => kalton::sphere_glue(&mut run),
        Command::Moduli => moduli::moduli(&mut run),
    }
}
