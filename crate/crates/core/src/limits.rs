/// Default cap on permanent dimension and total photon number.
pub const DEFAULT_SIZE_CAP: usize = 20;

/// Environment variable overriding [`DEFAULT_SIZE_CAP`].
pub const SIZE_CAP_ENV: &str = "BOSONKIT_SIZE_CAP";

/// The active size cap: `BOSONKIT_SIZE_CAP` when it parses as an integer, else the default.
pub fn size_cap() -> usize {
    std::env::var(SIZE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SIZE_CAP)
}
