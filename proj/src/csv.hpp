#pragma once

#include <charconv>
#include <istream>
#include <string>
#include <vector>

namespace sctrim::detail {

// Minimal RFC 4180 reader: comma separated, double-quoted fields may contain
// commas, quotes ("") and newlines.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    bool next(std::vector<std::string>& fields) {
        fields.clear();
        std::string cell;
        bool in_quotes = false;
        bool any = false;
        int c;
        while ((c = in_.get()) != EOF) {
            any = true;
            if (in_quotes) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        cell.push_back('"');
                        in_.get();
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (c == '\n') ++line_;
                    cell.push_back(static_cast<char>(c));
                }
                continue;
            }
            if (c == '"') {
                in_quotes = true;
            } else if (c == ',') {
                fields.push_back(std::move(cell));
                cell.clear();
            } else if (c == '\r') {
                // tolerate CRLF
            } else if (c == '\n') {
                ++line_;
                fields.push_back(std::move(cell));
                return true;
            } else {
                cell.push_back(static_cast<char>(c));
            }
        }
        if (!any) return false;
        ++line_;
        fields.push_back(std::move(cell));
        return true;
    }

    // 1-based number of the last record read (header is row 1).
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace sctrim::detail
