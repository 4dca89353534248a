#pragma once

#include <stdexcept>
#include <string>

namespace iecc {

// Base class for all library errors. CLI maps subclasses onto exit codes.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Input data cannot satisfy the request (e.g. K > distinct colors).
class degenerate_input_error : public error {
public:
    explicit degenerate_input_error(const std::string& what) : error(what) {}
};

// Two rasters that must agree in width/height/channels do not.
class shape_mismatch_error : public error {
public:
    explicit shape_mismatch_error(const std::string& what) : error(what) {}
};

// A container byte stream violates the wire layout.
class malformed_container_error : public error {
public:
    enum class kind {
        bad_magic,
        unsupported_version,
        truncated,
        inconsistent_length,
        index_out_of_range,
    };

    malformed_container_error(kind k, const std::string& what) : error(what), kind_(k) {}

    kind category() const noexcept { return kind_; }

    static const char* category_name(kind k) noexcept {
        switch (k) {
        case kind::bad_magic: return "bad magic";
        case kind::unsupported_version: return "unsupported version";
        case kind::truncated: return "truncated";
        case kind::inconsistent_length: return "inconsistent length";
        case kind::index_out_of_range: return "index out of range";
        }
        return "unknown";
    }

private:
    kind kind_;
};

// Statistical test has no defined answer (e.g. all paired differences zero).
class undefined_test_error : public error {
public:
    explicit undefined_test_error(const std::string& what) : error(what) {}
};

// File could not be read or written.
class io_error : public error {
public:
    explicit io_error(const std::string& what) : error(what) {}
};

} // namespace iecc
