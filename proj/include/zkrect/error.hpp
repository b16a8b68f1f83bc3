#pragma once

#include <stdexcept>
#include <string>

namespace zkrect {

enum class ErrorKind {
    InvalidConfig,
    Shape,
    Domain,
    InvalidGrid,
    InvalidParameter,
    InvalidInput,
    InternalConsistency,
    StepFailure,
    Divergence,
    IncompleteTrajectory,
    NearUncontrollable,
    DataTooLarge,
    Io,
    Schema,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

}  // namespace zkrect
