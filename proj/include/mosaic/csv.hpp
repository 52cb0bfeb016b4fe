#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mosaic/errors.hpp"

namespace mosaic {

// RFC 4180 record reader: quoted fields may contain commas, escaped quotes
// ("") and embedded line breaks. Tracks physical line numbers for errors.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one record. Returns false at end of input.
    bool next(std::vector<std::string>& fields) {
        fields.clear();
        int c = in_.get();
        if (c == EOF) return false;
        record_start_line_ = line_;
        std::string field;
        bool quoted = false;
        bool any = false;
        while (true) {
            if (c == EOF) {
                if (quoted)
                    throw FormatError(name_, record_start_line_,
                                      "unterminated quoted field");
                fields.push_back(std::move(field));
                return true;
            }
            char ch = static_cast<char>(c);
            if (quoted) {
                if (ch == '"') {
                    int peek = in_.peek();
                    if (peek == '"') {
                        field.push_back('"');
                        in_.get();
                    } else {
                        quoted = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(ch);
                }
            } else if (ch == '"' && field.empty() && !any) {
                quoted = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
                any = false;
                c = in_.get();
                continue;
            } else if (ch == '\r') {
                if (in_.peek() == '\n') in_.get();
                ++line_;
                fields.push_back(std::move(field));
                return true;
            } else if (ch == '\n') {
                ++line_;
                fields.push_back(std::move(field));
                return true;
            } else {
                field.push_back(ch);
                any = true;
            }
            c = in_.get();
        }
    }

    size_t line() const { return record_start_line_; }
    void set_name(std::string name) { name_ = std::move(name); }

private:
    std::istream& in_;
    std::string name_ = "<csv>";
    size_t line_ = 1;
    size_t record_start_line_ = 1;
};

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline std::string csv_join(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_quote(fields[i]);
    }
    out.push_back('\n');
    return out;
}

// Formats with `sig` significant digits ("%.Ng", C locale). Artifact files
// use 6 for coordinates/weights and 4 for probabilities.
inline std::string format_sig(double v, int sig) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
    return buf;
}

// Round-trip exact formatting for intermediate artifacts that must restore
// the identical double (staged runs must equal monolithic runs bit-for-bit).
inline std::string format_exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Rounds to `sig` significant decimal digits; used before JSON serialization
// so emitted numbers carry the declared precision.
inline double round_sig(double v, int sig) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*e", sig - 1, v);
    return std::strtod(buf, nullptr);
}

}  // namespace mosaic
