use std::fmt;

/// Exit statuses.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_CHECK: u8 = 4;

/// The configuration or its parameters are unusable.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ValidationError {}

/// Acceptance checks failed in `--check` mode.
#[derive(Debug)]
pub struct CheckFailure {
    pub failed: Vec<String>,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "checks failed: {}", self.failed.join(", "))
    }
}

impl std::error::Error for CheckFailure {}

/// Maps an error chain to the exit status it should produce.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<CheckFailure>().is_some() {
            return EXIT_CHECK;
        }
        if cause.downcast_ref::<ValidationError>().is_some()
            || cause.downcast_ref::<serde_json::Error>().is_some()
        {
            return EXIT_VALIDATION;
        }
        if let Some(e) = cause.downcast_ref::<cobound_core::Error>() {
            return match e {
                cobound_core::Error::Domain(_) | cobound_core::Error::Invalid { .. } => {
                    EXIT_VALIDATION
                }
                cobound_core::Error::AtomBudget { .. } | cobound_core::Error::SearchCap { .. } => {
                    EXIT_RESOURCE
                }
            };
        }
    }
    EXIT_RESOURCE
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_follow_the_error_kind() {
        let check: anyhow::Error = CheckFailure {
            failed: vec!["x".into()],
        }
        .into();
        assert_eq!(exit_code(&check), EXIT_CHECK);
        let v: anyhow::Error = ValidationError("bad".into()).into();
        assert_eq!(exit_code(&v.context("while loading")), EXIT_VALIDATION);
        let d: anyhow::Error = cobound_core::Error::Domain("x".into()).into();
        assert_eq!(exit_code(&d), EXIT_VALIDATION);
        let b: anyhow::Error = cobound_core::Error::AtomBudget {
            required: 10,
            budget: 1,
        }
        .into();
        assert_eq!(exit_code(&b), EXIT_RESOURCE);
        let io: anyhow::Error = std::io::Error::other("disk").into();
        assert_eq!(exit_code(&io), EXIT_RESOURCE);
    }
}
