#pragma once

#include <stdexcept>
#include <string>

namespace htbandit {

// Bad arguments, malformed configs, dimension mismatches.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A numeric routine could not produce a trustworthy result (non-convergence,
// out-of-domain intermediate). Never swallowed into a silent fallback.
class NumericFailure : public std::runtime_error {
public:
    explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

// choose/update called out of order, or a frozen policy driven further.
class ProtocolViolation : public std::logic_error {
public:
    explicit ProtocolViolation(const std::string& what) : std::logic_error(what) {}
};

// A replayed trace violates one of the bookkeeping inequalities it must satisfy.
class AuditFailure : public std::runtime_error {
public:
    explicit AuditFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace htbandit
