#pragma once

#include <stdexcept>
#include <string>

namespace mosaic {

// Base class for every error raised by the pipeline. Stages catch this to
// attach stage names before propagating to the CLI.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class FileNotFoundError : public Error {
public:
    explicit FileNotFoundError(const std::string& path)
        : Error("file not found: " + path) {}
};

// Malformed input file; message carries the 1-based row/line number.
class FormatError : public Error {
public:
    FormatError(const std::string& path, size_t line, const std::string& detail)
        : Error(path + ":" + std::to_string(line) + ": " + detail), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

class DuplicateIdError : public Error {
public:
    explicit DuplicateIdError(const std::string& id)
        : Error("duplicate report id: " + id) {}
};

class EmptyInputError : public Error {
public:
    explicit EmptyInputError(const std::string& what) : Error(what) {}
};

class ProviderUnavailableError : public Error {
public:
    explicit ProviderUnavailableError(const std::string& what) : Error(what) {}
};

class DimensionMismatchError : public Error {
public:
    explicit DimensionMismatchError(const std::string& what) : Error(what) {}
};

class TooFewPointsError : public Error {
public:
    explicit TooFewPointsError(const std::string& what) : Error(what) {}
};

class NonFiniteGradientError : public Error {
public:
    explicit NonFiniteGradientError(const std::string& what) : Error(what) {}
};

class EmptyVocabularyError : public Error {
public:
    explicit EmptyVocabularyError(const std::string& what) : Error(what) {}
};

class AllPairsSkippedError : public Error {
public:
    explicit AllPairsSkippedError(const std::string& what) : Error(what) {}
};

class TooFewTopicsError : public Error {
public:
    explicit TooFewTopicsError(const std::string& what) : Error(what) {}
};

class AllRejectedError : public Error {
public:
    explicit AllRejectedError(const std::string& what) : Error(what) {}
};

class MissingArtifactError : public Error {
public:
    explicit MissingArtifactError(const std::string& filename)
        : Error("missing artifact: " + filename +
                " (run the preceding stage first)") {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace mosaic
