#pragma once

#include <stdexcept>
#include <string>

namespace ldtail {

enum class errc {
    out_of_strip,
    target_out_of_range,
    no_convergence,
    unsupported,
    too_large,
    degenerate,
    x_too_small,
    empty_result,
    schema_mismatch,
    invalid_argument,
    io_error,
};

inline const char* to_string(errc c) noexcept {
    switch (c) {
        case errc::out_of_strip:        return "OUT_OF_STRIP";
        case errc::target_out_of_range: return "TARGET_OUT_OF_RANGE";
        case errc::no_convergence:      return "NO_CONVERGENCE";
        case errc::unsupported:         return "UNSUPPORTED";
        case errc::too_large:           return "TOO_LARGE";
        case errc::degenerate:          return "DEGENERATE";
        case errc::x_too_small:         return "X_TOO_SMALL";
        case errc::empty_result:        return "EMPTY_RESULT";
        case errc::schema_mismatch:     return "SCHEMA_MISMATCH";
        case errc::invalid_argument:    return "INVALID_ARGUMENT";
        case errc::io_error:            return "IO_ERROR";
    }
    return "UNKNOWN";
}

/// Library error carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& detail) {
    throw Error(code, detail);
}

}  // namespace ldtail
