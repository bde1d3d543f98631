use std::fmt;

/// Failure of a command, mapped onto the documented exit codes.
#[derive(Debug)]
pub enum LabError {
    /// Bad flags, config file or element file (exit 3).
    Input(String),
    Core(opspace_core::Error),
    Io(std::io::Error),
}

impl LabError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        use opspace_core::Error as E;
        match self {
            Self::Input(_) => 3,
            Self::Core(
                E::InvalidParameter(_)
                | E::Ordering { .. }
                | E::Truncation { .. }
                | E::Shape(_)
                | E::Grid(_)
                | E::UnsupportedDescriptor(_)
                | E::EmptyInput(_)
                | E::NonFinite(_)
                | E::ComplexUnsupported(_),
            ) => 3,
            Self::Core(E::BracketExcludesTarget { .. }) => 2,
            Self::Core(_) | Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) => write!(f, "input error: {m}"),
            Self::Core(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<opspace_core::Error> for LabError {
    fn from(e: opspace_core::Error) -> Self {
        Self::Core(e)
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

pub type LabResult<T> = Result<T, LabError>;
