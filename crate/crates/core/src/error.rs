use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A parameter or distribution violates its domain.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// The moment condition m1 - m43/m13 >= 0 does not hold.
    #[error("condition A3 violated: m1 - m43/m13 = {margin:e} < 0")]
    ConditionA3 { margin: f64 },

    /// A meaning transition would require negative purpose.
    #[error("infeasible transition: m_next = {m_next} < lambda * m_prev = {floor} (negative purpose required)")]
    Infeasible { m_next: f64, floor: f64 },

    /// The operation is only defined for a different distribution family.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A finite-difference step or sweep point leaves the valid parameter domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine could not produce a meaningful answer.
    #[error("numerical diagnostic: {0}")]
    Numerical(String),
}

impl ModelError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by the dynamics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            ModelError::Invalid { .. }
                | ModelError::ConditionA3 { .. }
                | ModelError::Unsupported(_)
                | ModelError::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
