// Deterministic CSV emission: fixed %.*g formatting, '\n' endings,
// identical bytes for identical data regardless of thread count.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace polaring {

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns, int precision = 12);

    void add_row(const std::vector<double>& values);
    // pre-assembled row for mixed numeric/text columns
    void add_raw_row(const std::string& row);

    const std::string& buffer() const { return buffer_; }
    void write(const std::filesystem::path& path) const;

    static std::string format(double v, int precision = 12);

private:
    std::string buffer_;
    std::size_t n_columns_;
    int precision_;
};

// FNV-1a over a byte string, used for config hashes and file checksums
std::uint64_t fnv1a_hash(const std::string& bytes);
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

} // namespace polaring
