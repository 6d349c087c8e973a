use std::fmt;

use thiserror::Error;

/// Which of the two access technologies a queue belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Wifi,
    Vlc,
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Link::Wifi => f.write_str("WiFi"),
            Link::Vlc => f.write_str("VLC"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NonPositiveParameter: {name} must be positive (got {value})")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("CapacityOrderViolation: WiFi capacity b1={b1} must be below VLC capacity b2={b2}")]
    CapacityOrderViolation { b1: f64, b2: f64 },

    #[error(
        "InfeasibleLoad: offered load lambda*mu={offered} Mb/s is not below total capacity b1+n*b2={capacity} Mb/s"
    )]
    InfeasibleLoad { offered: f64, capacity: f64 },

    #[error(
        "UnstableQueue: {}arrival rate {arrival_rate} /s is not below service rate {service_rate} /s",
        queue_label(*link)
    )]
    UnstableQueue {
        link: Option<Link>,
        arrival_rate: f64,
        service_rate: f64,
    },

    #[error("InvalidAlpha: {0}")]
    InvalidAlpha(String),

    #[error("InvalidRunConfig: {0}")]
    InvalidRunConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

fn queue_label(link: Option<Link>) -> String {
    match link {
        Some(link) => format!("{link} queue "),
        None => String::new(),
    }
}

impl Error {
    /// True for errors caused by an unstable queue rather than bad input.
    pub fn is_instability(&self) -> bool {
        matches!(self, Error::UnstableQueue { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
