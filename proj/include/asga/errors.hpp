#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace asga {

/// Non-finite values from an oracle or a numerical subroutine that failed to converge.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A domain-restricted oracle was queried outside its feasible set.
class DomainViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The backtracking inner cycle of ASGA-2/ASGA-4 hit its trial cap.
class LineSearchStall : public std::runtime_error {
public:
    LineSearchStall(std::int64_t iteration, int trials, double last_L)
        : std::runtime_error("line search stalled at iteration " + std::to_string(iteration) + " after " +
                             std::to_string(trials) + " trials (L=" + std::to_string(last_L) + ")"),
          iteration_(iteration), trials_(trials), last_L_(last_L) {}

    std::int64_t iteration() const noexcept { return iteration_; }
    int trials() const noexcept { return trials_; }
    double last_L() const noexcept { return last_L_; }

private:
    std::int64_t iteration_;
    int trials_;
    double last_L_;
};

/// A method was asked to run on a problem it cannot handle (missing Lipschitz constant, box for FISTA, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested brute-force mode does not apply to the given objective/domain.
class Unsupported : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class FormatError : public std::runtime_error {
public:
    FormatError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what, std::vector<std::string> completed = {})
        : std::runtime_error(what), completed_(std::move(completed)) {}

    /// Files fully written before the failure.
    const std::vector<std::string>& completed() const noexcept { return completed_; }

private:
    std::vector<std::string> completed_;
};

/// Thrown by OracleCounter when a call would exceed the configured budget.
/// The run loop catches it and stops with the last committed iterate.
class BudgetExhausted : public std::exception {
public:
    const char* what() const noexcept override { return "oracle budget exhausted"; }
};

} // namespace asga
