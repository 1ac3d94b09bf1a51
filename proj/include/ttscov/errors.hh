#pragma once

#include <stdexcept>
#include <string>

namespace ttscov {

/// Input text could not be parsed; line is 1-based.
struct ParseError : std::runtime_error {
    int line;
    ParseError(int line, const std::string& what)
        : std::runtime_error("parse error at line " + std::to_string(line) + ": " + what),
          line(line) {}
};

/// A state index exceeds the declared shared/local counts.
struct RangeError : std::runtime_error {
    int line;
    RangeError(int line, const std::string& what)
        : std::runtime_error("range error at line " + std::to_string(line) + ": " + what),
          line(line) {}
};

/// The requested initial-state set cannot be reduced to a unique initial state.
struct BoxPropertyViolation : std::runtime_error {
    explicit BoxPropertyViolation(const std::string& what) : std::runtime_error(what) {}
};

/// A transition was fired from a state that does not enable it.
struct NotEnabled : std::runtime_error {
    explicit NotEnabled(const std::string& what) : std::runtime_error(what) {}
};

/// Requested random-instance shape admits no diagram.
struct InfeasibleShape : std::runtime_error {
    explicit InfeasibleShape(const std::string& what) : std::runtime_error(what) {}
};

/// Loop acceleration was asked for a path that is not a cycle.
struct NotCyclic : std::runtime_error {
    explicit NotCyclic(const std::string& what) : std::runtime_error(what) {}
};

/// An atom cannot be brought to the elementary form required by recurrence solving.
struct NonElementary : std::runtime_error {
    explicit NonElementary(const std::string& what) : std::runtime_error(what) {}
};

/// A configured resource cap (disjuncts, branch depth, node budget) was hit.
struct ResourceExceeded : std::runtime_error {
    explicit ResourceExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// An internal cross-check failed; indicates a bug, never a verdict.
struct InternalInconsistency : std::logic_error {
    explicit InternalInconsistency(const std::string& what) : std::logic_error(what) {}
};

}  // namespace ttscov
