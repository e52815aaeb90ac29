//! Source positions and diagnostics shared by the parser, validator and
//! Bio-PEPA self-check.

use std::fmt;

/// A region of source text. Lines and columns are 1-based; `length` counts
/// characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan {
            line,
            column,
            length,
        }
    }

    /// Position used for diagnostics that concern the whole document.
    pub fn start() -> Self {
        SourceSpan::new(1, 1, 0)
    }
}

impl Default for SourceSpan {
    fn default() -> Self {
        SourceSpan::start()
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Stable rule codes. The `Display` form is the identifier printed in
/// `severity[Code]` diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    // lexical / syntax
    UnexpectedChar,
    UnterminatedString,
    Syntax,
    UnknownAttribute,
    DuplicateAttribute,
    MissingAttribute,
    InvalidValue,
    DuplicateId,
    NegativeCount,
    // model validation
    NoProcesses,
    DanglingEntityRef,
    DanglingProcessRef,
    DanglingCompartmentRef,
    DanglingLogicRef,
    MissingCount,
    NonIntegerCount,
    MissingBackwardPropensity,
    UnexpectedBackwardPropensity,
    ReservedSuffix,
    DuplicateManualRef,
    ArcDirectionMismatch,
    NoReactantSide,
    NoProductSide,
    IsolatedEntity,
    LogicArity,
    LogicOutputRange,
    LogicThreshold,
    CyclicLogic,
    RateSyntax,
    UnknownManualArcRef,
    UnknownProperty,
    // Bio-PEPA self-check
    UndeclaredName,
    UndefinedRate,
    MissingComponent,
    DuplicateDefinition,
    // simulation
    NoOpReaction,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub span: SourceSpan,
    /// Identifier of the offending node, when the diagnostic is about one.
    pub subject: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: Code, span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            span,
            subject: None,
            message: message.into(),
        }
    }

    pub fn warning(code: Code, span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, span, message)
        }
    }

    pub fn with_subject(mut self, id: impl Into<String>) -> Self {
        self.subject = Some(id.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: severity[code]: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: {}[{}]: {}",
            file, self.span.line, self.span.column, self.severity, self.code, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}[{}]: {}",
            self.span, self.severity, self.code, self.message
        )
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
