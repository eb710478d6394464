#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wordeff {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input line. `line()` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A sentence whose arcs do not form a single rooted tree.
class StructureError : public Error {
public:
    /// `sentence` is 1-based; 0 when the sentence is not part of a corpus.
    StructureError(std::size_t sentence, const std::string& detail)
        : Error(sentence == 0 ? detail
                              : "sentence " + std::to_string(sentence) + ": " + detail),
          sentence_(sentence),
          detail_(detail) {}
    std::size_t sentence() const noexcept { return sentence_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t sentence_;
    std::string detail_;
};

}  // namespace wordeff
