#include "fgpl/text_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fgpl/errors.hpp"

namespace fgpl::text {

std::string format_exact(double value) {
    char buf[512];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
    if (ec != std::errc{}) {
        throw NumericError("cannot format value");
    }
    return std::string(buf, end);
}

std::string format_g17(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

double parse_double(std::string_view field, std::size_t line) {
    field = trim(field);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("invalid real '" + std::string(field) + "'", line);
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite real '" + std::string(field) + "'", line);
    }
    return value;
}

long long parse_int(std::string_view field, std::size_t line) {
    field = trim(field);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("invalid integer '" + std::string(field) + "'", line);
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::vector<long long> parse_header(std::string_view line, const std::vector<std::string>& keys,
                                    std::size_t line_no) {
    line = trim(line);
    if (line.empty() || line.front() != '#') {
        throw ParseError("expected header line starting with '#'", line_no);
    }
    line.remove_prefix(1);
    std::vector<long long> values(keys.size());
    std::vector<bool> seen(keys.size(), false);
    for (auto token : split(trim(line), ' ')) {
        token = trim(token);
        if (token.empty()) continue;
        const auto eq = token.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("malformed header token '" + std::string(token) + "'", line_no);
        }
        const auto key = token.substr(0, eq);
        for (std::size_t k = 0; k < keys.size(); ++k) {
            if (key == keys[k]) {
                values[k] = parse_int(token.substr(eq + 1), line_no);
                seen[k] = true;
            }
        }
    }
    for (std::size_t k = 0; k < keys.size(); ++k) {
        if (!seen[k]) throw ParseError("header is missing " + keys[k], line_no);
    }
    return values;
}

bool LineReader::next(std::string_view& line) {
    while (pos_ < text_.size()) {
        auto end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        line = trim(text_.substr(pos_, end - pos_));
        pos_ = end + 1;
        ++line_;
        if (!line.empty()) return true;
    }
    return false;
}

std::string_view LineReader::require(const std::string& expected) {
    std::string_view line;
    if (!next(line)) throw ParseError("unexpected end of file, expected " + expected, line_ + 1);
    return line;
}

std::vector<double> parse_real_row(std::string_view line, std::size_t count, std::size_t line_no) {
    const auto fields = split(line, ',');
    if (fields.size() != count) {
        throw ParseError("expected " + std::to_string(count) + " values, found " + std::to_string(fields.size()),
                         line_no);
    }
    std::vector<double> row;
    row.reserve(count);
    for (auto f : fields) row.push_back(parse_double(f, line_no));
    return row;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fgpl::text
