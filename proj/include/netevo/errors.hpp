#ifndef NETEVO_ERRORS_HPP
#define NETEVO_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace netevo {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// add_edge(a, a) or a raw record with identical endpoints.
class SelfLoopError : public Error {
public:
    using Error::Error;
};

/// Edge already present in a simple graph.
class DuplicateEdgeError : public Error {
public:
    using Error::Error;
};

/// Node id outside the current node range.
class UnknownNodeError : public Error {
public:
    using Error::Error;
};

/// A probability query whose choice set is empty.
class EmptyChoiceSetError : public Error {
public:
    using Error::Error;
};

/// Invalid model specification (weights off the simplex, duplicate
/// components, unparseable text).
class SpecError : public Error {
public:
    using Error::Error;
};

/// An event stream that cannot be applied in order; carries the index of
/// the offending event.
class StreamError : public Error {
public:
    StreamError(const std::string& what, std::int64_t index)
        : Error(what + " (event index " + std::to_string(index) + ")"),
          index_(index) {}
    std::int64_t index() const { return index_; }

private:
    std::int64_t index_;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Bad configuration value (fit config, warm-up fraction, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Reports that cannot be ranked against each other (different stream or
/// different choice count).
class IncomparableError : public Error {
public:
    using Error::Error;
};

/// Replay skeleton ran out before the growth target was reached.
class ExhaustedError : public Error {
public:
    using Error::Error;
};

/// Growth cannot make progress (no legal operation remains).
class StuckError : public Error {
public:
    using Error::Error;
};

/// Weight fitting found a choice step to which every candidate component
/// assigns zero probability; carries the step index.
class AllZeroStepsError : public Error {
public:
    AllZeroStepsError(const std::string& what, std::size_t step)
        : Error(what + " (choice step " + std::to_string(step) + ")"),
          step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

}  // namespace netevo

#endif  // NETEVO_ERRORS_HPP
