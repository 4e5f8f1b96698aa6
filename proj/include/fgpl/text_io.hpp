#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fgpl::text {

/// Shortest decimal (non-exponent) representation that parses back to the same double.
std::string format_exact(double value);

/// 17 significant digits, `%.17g` style.
std::string format_g17(double value);

/// Parse a complete field; throws ParseError naming `line` on failure.
double parse_double(std::string_view field, std::size_t line);
long long parse_int(std::string_view field, std::size_t line);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Parse `# KEY=<int> KEY=<int> ...`; returns the values in the order of `keys`.
std::vector<long long> parse_header(std::string_view line, const std::vector<std::string>& keys,
                                    std::size_t line_no);

/// Iterates over non-blank lines, tracking 1-based line numbers.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}
    /// Next non-blank trimmed line; false at end of input.
    bool next(std::string_view& line);
    /// Like next(), but throws ParseError mentioning `expected` at end of input.
    std::string_view require(const std::string& expected);
    std::size_t line_number() const { return line_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

/// Parse a comma-separated list of reals with exactly `count` entries.
std::vector<double> parse_real_row(std::string_view line, std::size_t count, std::size_t line_no);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a digest, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace fgpl::text
