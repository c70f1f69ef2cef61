use std::fmt;

/// Exit codes of the binary.
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn config_error(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, message: msg.into() }
}

pub fn input_error(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: msg.into() }
}

pub fn io_error(e: std::io::Error) -> Failure {
    Failure { code: EXIT_INPUT, message: format!("i/o error: {e}") }
}
