#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gir {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input in one of the exchange formats (documents, topics, qrels, runs).
/// `location` is a byte offset or a 1-based line number depending on the format.
class parse_error : public error {
  public:
    parse_error(std::string const& what, std::size_t location)
        : error(what), m_location(location) {}

    [[nodiscard]] std::size_t location() const noexcept { return m_location; }

  private:
    std::size_t m_location;
};

/// Violated precondition of a pure function (e.g. invalid model inputs).
class contract_error : public error {
  public:
    using error::error;
};

/// A query whose bag of terms is empty after analysis.
class empty_query : public error {
  public:
    explicit empty_query(std::string const& num)
        : error("empty query for topic " + num), m_num(num) {}

    [[nodiscard]] std::string const& num() const noexcept { return m_num; }

  private:
    std::string m_num;
};

enum class index_error_kind { missing, bad_format, version_mismatch, truncated, checksum, corrupt, io };

inline char const* to_string(index_error_kind kind) {
    switch (kind) {
    case index_error_kind::missing: return "missing index";
    case index_error_kind::bad_format: return "bad format";
    case index_error_kind::version_mismatch: return "version mismatch";
    case index_error_kind::truncated: return "truncated";
    case index_error_kind::checksum: return "checksum mismatch";
    case index_error_kind::corrupt: return "corrupt";
    case index_error_kind::io: return "i/o error";
    }
    return "unknown";
}

class index_error : public error {
  public:
    index_error(index_error_kind kind, std::string const& detail)
        : error(std::string(to_string(kind)) + ": " + detail), m_kind(kind) {}

    [[nodiscard]] index_error_kind kind() const noexcept { return m_kind; }

  private:
    index_error_kind m_kind;
};

/// Raised when evaluation inputs cannot be reconciled (e.g. disjoint topic sets).
class evaluation_error : public error {
  public:
    using error::error;
};

}  // namespace gir
